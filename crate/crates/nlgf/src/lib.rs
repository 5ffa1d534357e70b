//! Geo-focus level classification and geo-foci identification for US local
//! news articles (NLGF).
//!
//! The pipeline: toponym recognition over title and body sentences, LLM-based
//! toponym disambiguation with polygon verification against an
//! administrative-boundary gazetteer, per-toponym initial geo-focus level
//! (IGL) assignment relative to the publisher's state, a 15-feature
//! spatial-semantic vector, a gradient-boosted level classifier, and a
//! normalized focus-score heuristic that emits the article's geo-foci.

pub mod classifier;
pub mod config;
pub mod corpus;
pub mod disambiguation;
pub mod evaluation;
pub mod features;
pub mod gazetteer;
pub mod geofoci;
pub mod igl;
pub mod recognition;
pub mod us_states;

pub use corpus::{Article, GeoFocusLevel};
pub use geofoci::{GeoFocusResult, Pipeline};

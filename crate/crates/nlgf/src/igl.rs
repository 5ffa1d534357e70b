//! Initial Geo-focus Level assignment: maps each verified disambiguated
//! toponym to local/state/national/international relative to the publisher's
//! state.
//!
//! Rule table, keyed on the toponym's administrative level:
//! - country, USA        -> national
//! - country, not USA    -> international
//! - state, == publisher -> state
//! - state, != publisher -> national
//! - county in publisher's state  -> local
//! - county outside publisher's state -> national

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disambiguation::DisambiguatedToponym;
use crate::gazetteer::AdminLevel;
use crate::us_states::normalize_state;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Igl {
    Local,
    State,
    National,
    International,
}

impl Igl {
    pub const ALL: [Igl; 4] = [Igl::Local, Igl::State, Igl::National, Igl::International];

    pub fn index(self) -> usize {
        match self {
            Igl::Local => 0,
            Igl::State => 1,
            Igl::National => 2,
            Igl::International => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Igl::Local => "local",
            Igl::State => "state",
            Igl::National => "national",
            Igl::International => "international",
        }
    }
}

impl std::fmt::Display for Igl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum IglError {
    #[error("toponym '{0}' is not verified")]
    Unverified(String),
    #[error("verified toponym '{0}' lacks a resolved unit at level {1}")]
    MissingUnit(String, &'static str),
}

/// The country unit id treated as the United States.
pub const USA_COUNTRY_ID: &str = "USA";

/// Assigns the IGL for a verified toponym. County membership in the
/// publisher's state is decided by the resolved county's parent chain, not by
/// re-testing the coordinate. `publisher_state` accepts a code or full name;
/// non-state territories never match and therefore yield national.
pub fn assign_igl(t: &DisambiguatedToponym, publisher_state: &str) -> Result<Igl, IglError> {
    if !t.verified {
        return Err(IglError::Unverified(t.mention.surface.clone()));
    }
    let publisher = normalize_state(publisher_state).unwrap_or_default().to_string();
    match t.adm {
        AdminLevel::Country => {
            let country = t
                .resolution
                .country_id
                .as_deref()
                .ok_or_else(|| IglError::MissingUnit(t.mention.surface.clone(), "country"))?;
            if country == USA_COUNTRY_ID {
                Ok(Igl::National)
            } else {
                Ok(Igl::International)
            }
        }
        AdminLevel::State => {
            let state = t
                .resolution
                .state_id
                .as_deref()
                .ok_or_else(|| IglError::MissingUnit(t.mention.surface.clone(), "state"))?;
            if normalize_state(state).map(str::to_string) == Some(publisher.clone())
                && !publisher.is_empty()
            {
                Ok(Igl::State)
            } else {
                Ok(Igl::National)
            }
        }
        AdminLevel::County => {
            let county_state = t
                .resolution
                .state_id
                .as_deref()
                .ok_or_else(|| IglError::MissingUnit(t.mention.surface.clone(), "state"))?;
            if normalize_state(county_state).map(str::to_string) == Some(publisher.clone())
                && !publisher.is_empty()
            {
                Ok(Igl::Local)
            } else {
                Ok(Igl::National)
            }
        }
    }
}

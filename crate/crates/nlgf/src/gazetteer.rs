//! Administrative-boundary gazetteer: US counties, US states, and countries
//! loaded from GeoJSON, with point-containment and great-circle distance
//! queries.
//!
//! Containment uses a bounding-box pre-filter followed by even-odd ray
//! casting over multipolygon rings; ties between overlapping units at the
//! same level go to the smallest-area polygon. The input schema is described
//! in `data/README.md`.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdminLevel {
    County,
    State,
    Country,
}

impl AdminLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            AdminLevel::County => "county",
            AdminLevel::State => "state",
            AdminLevel::Country => "country",
        }
    }
}

/// A latitude/longitude pair in decimal degrees, range-checked on
/// construction (including deserialization).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeoPoint")]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

#[derive(Deserialize)]
struct RawGeoPoint {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawGeoPoint> for GeoPoint {
    type Error = GazetteerError;

    fn try_from(raw: RawGeoPoint) -> Result<GeoPoint, GazetteerError> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<GeoPoint, GazetteerError> {
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(GazetteerError::InvalidCoordinate("latitude", lat));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(GazetteerError::InvalidCoordinate("longitude", lon));
        }
        Ok(GeoPoint { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Rings in lon/lat degrees. Outer/hole distinction is immaterial under the
/// even-odd rule.
type Ring = Vec<[f64; 2]>;

#[derive(Debug, Clone)]
pub struct AdminUnit {
    pub unit_id: String,
    pub name: String,
    pub level: AdminLevel,
    /// county -> state id, state -> country id.
    pub parent_id: Option<String>,
    rings: Vec<Ring>,
    bbox: [f64; 4], // min_lon, min_lat, max_lon, max_lat
    area: f64,      // planar shoelace area in square degrees, for tie-breaks
}

impl AdminUnit {
    pub fn contains(&self, p: &GeoPoint) -> bool {
        let (x, y) = (p.lon, p.lat);
        if x < self.bbox[0] || y < self.bbox[1] || x > self.bbox[2] || y > self.bbox[3] {
            return false;
        }
        // Even-odd ray casting across all rings; holes flip parity.
        let mut inside = false;
        for ring in &self.rings {
            let n = ring.len();
            let mut j = n - 1;
            for i in 0..n {
                let (xi, yi) = (ring[i][0], ring[i][1]);
                let (xj, yj) = (ring[j][0], ring[j][1]);
                if ((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi) {
                    inside = !inside;
                }
                j = i;
            }
        }
        inside
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Arithmetic mean of ring vertices; good enough for fixture centroids.
    pub fn vertex_centroid(&self) -> Option<GeoPoint> {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut n = 0usize;
        for ring in &self.rings {
            for v in &ring[..ring.len() - 1] {
                sx += v[0];
                sy += v[1];
                n += 1;
            }
        }
        if n == 0 {
            return None;
        }
        GeoPoint::new(sy / n as f64, sx / n as f64).ok()
    }
}

/// Deepest containment chain for a query point. Empty when the point falls
/// in no loaded polygon.
#[derive(Debug, Clone, Default)]
pub struct Resolution<'a> {
    pub county: Option<&'a AdminUnit>,
    pub state: Option<&'a AdminUnit>,
    pub country: Option<&'a AdminUnit>,
}

impl Resolution<'_> {
    pub fn is_empty(&self) -> bool {
        self.county.is_none() && self.state.is_none() && self.country.is_none()
    }

    pub fn at(&self, level: AdminLevel) -> Option<&AdminUnit> {
        match level {
            AdminLevel::County => self.county,
            AdminLevel::State => self.state,
            AdminLevel::Country => self.country,
        }
    }
}

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("invalid GeoJSON in {0}: {1}")]
    Json(String, serde_json::Error),
    #[error("{file}: feature {index} is missing property '{property}'")]
    MissingProperty {
        file: String,
        index: usize,
        property: &'static str,
    },
    #[error("{0} out of range: {1}")]
    InvalidCoordinate(&'static str, f64),
}

#[derive(Deserialize)]
struct FeatureCollection {
    features: Vec<Feature>,
}

#[derive(Deserialize)]
struct Feature {
    properties: serde_json::Map<String, serde_json::Value>,
    geometry: Option<Geometry>,
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Geometry {
    Polygon { coordinates: Vec<Ring> },
    MultiPolygon { coordinates: Vec<Vec<Ring>> },
}

/// Immutable after load; safe to share across threads.
#[derive(Debug)]
pub struct Gazetteer {
    counties: Vec<AdminUnit>,
    states: Vec<AdminUnit>,
    countries: Vec<AdminUnit>,
    by_id: HashMap<(AdminLevel, String), usize>,
    /// Features dropped at load (invalid rings), as human-readable notes.
    pub warnings: Vec<String>,
}

fn shoelace(rings: &[Ring]) -> f64 {
    let mut total = 0.0;
    for ring in rings {
        let mut a = 0.0;
        let n = ring.len();
        for i in 0..n - 1 {
            a += ring[i][0] * ring[i + 1][1] - ring[i + 1][0] * ring[i][1];
        }
        total += a.abs() / 2.0;
    }
    total
}

fn collect_rings(geometry: Geometry) -> Vec<Ring> {
    match geometry {
        Geometry::Polygon { coordinates } => coordinates,
        Geometry::MultiPolygon { coordinates } => coordinates.into_iter().flatten().collect(),
    }
}

fn valid_rings(rings: &[Ring]) -> bool {
    !rings.is_empty()
        && rings
            .iter()
            .all(|r| r.len() >= 4 && r.first() == r.last())
}

fn load_level(
    path: &Path,
    level: AdminLevel,
    warnings: &mut Vec<String>,
) -> Result<Vec<AdminUnit>, GazetteerError> {
    let file = File::open(path).map_err(|e| GazetteerError::Io(path.display().to_string(), e))?;
    let fc: FeatureCollection = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| GazetteerError::Json(path.display().to_string(), e))?;
    if fc.features.is_empty() {
        warnings.push(format!("{}: empty FeatureCollection", path.display()));
    }
    let mut units = Vec::new();
    for (index, feature) in fc.features.into_iter().enumerate() {
        let get = |prop: &'static str| -> Result<String, GazetteerError> {
            feature
                .properties
                .get(prop)
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or(GazetteerError::MissingProperty {
                    file: path.display().to_string(),
                    index,
                    property: prop,
                })
        };
        let unit_id = get("id")?;
        let name = get("name")?;
        let parent_id = match level {
            AdminLevel::County => Some(get("state_id")?),
            AdminLevel::State => Some(
                feature
                    .properties
                    .get("country_id")
                    .and_then(|v| v.as_str())
                    .unwrap_or("USA")
                    .to_string(),
            ),
            AdminLevel::Country => None,
        };
        let rings = match feature.geometry {
            Some(g) => collect_rings(g),
            None => {
                warnings.push(format!("{}: feature {index} ({unit_id}) has no geometry", path.display()));
                continue;
            }
        };
        if !valid_rings(&rings) {
            warnings.push(format!(
                "{}: feature {index} ({unit_id}) rejected: unclosed or degenerate ring",
                path.display()
            ));
            continue;
        }
        let mut bbox = [f64::MAX, f64::MAX, f64::MIN, f64::MIN];
        for ring in &rings {
            for v in ring {
                bbox[0] = bbox[0].min(v[0]);
                bbox[1] = bbox[1].min(v[1]);
                bbox[2] = bbox[2].max(v[0]);
                bbox[3] = bbox[3].max(v[1]);
            }
        }
        let area = shoelace(&rings);
        units.push(AdminUnit {
            unit_id,
            name,
            level,
            parent_id,
            rings,
            bbox,
            area,
        });
    }
    Ok(units)
}

impl Gazetteer {
    pub fn load(
        county_path: &Path,
        state_path: &Path,
        country_path: &Path,
    ) -> Result<Gazetteer, GazetteerError> {
        let mut warnings = Vec::new();
        let counties = load_level(county_path, AdminLevel::County, &mut warnings)?;
        let states = load_level(state_path, AdminLevel::State, &mut warnings)?;
        let countries = load_level(country_path, AdminLevel::Country, &mut warnings)?;
        let mut by_id = HashMap::new();
        for (i, u) in counties.iter().enumerate() {
            by_id.insert((AdminLevel::County, u.unit_id.clone()), i);
        }
        for (i, u) in states.iter().enumerate() {
            by_id.insert((AdminLevel::State, u.unit_id.clone()), i);
        }
        for (i, u) in countries.iter().enumerate() {
            by_id.insert((AdminLevel::Country, u.unit_id.clone()), i);
        }
        Ok(Gazetteer {
            counties,
            states,
            countries,
            by_id,
            warnings,
        })
    }

    /// Builds a gazetteer from pre-validated units; used when boundaries come
    /// from somewhere other than GeoJSON files.
    pub fn from_units(
        counties: Vec<AdminUnit>,
        states: Vec<AdminUnit>,
        countries: Vec<AdminUnit>,
    ) -> Gazetteer {
        let mut by_id = HashMap::new();
        for (i, u) in counties.iter().enumerate() {
            by_id.insert((AdminLevel::County, u.unit_id.clone()), i);
        }
        for (i, u) in states.iter().enumerate() {
            by_id.insert((AdminLevel::State, u.unit_id.clone()), i);
        }
        for (i, u) in countries.iter().enumerate() {
            by_id.insert((AdminLevel::Country, u.unit_id.clone()), i);
        }
        Gazetteer {
            counties,
            states,
            countries,
            by_id,
            warnings: Vec::new(),
        }
    }

    pub fn unit(&self, level: AdminLevel, id: &str) -> Option<&AdminUnit> {
        let idx = *self.by_id.get(&(level, id.to_string()))?;
        Some(match level {
            AdminLevel::County => &self.counties[idx],
            AdminLevel::State => &self.states[idx],
            AdminLevel::Country => &self.countries[idx],
        })
    }

    pub fn units(&self, level: AdminLevel) -> &[AdminUnit] {
        match level {
            AdminLevel::County => &self.counties,
            AdminLevel::State => &self.states,
            AdminLevel::Country => &self.countries,
        }
    }

    pub fn len(&self) -> usize {
        self.counties.len() + self.states.len() + self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn smallest_containing<'a>(&self, units: &'a [AdminUnit], p: &GeoPoint) -> Option<&'a AdminUnit> {
        units
            .iter()
            .filter(|u| u.contains(p))
            .min_by(|a, b| a.area.partial_cmp(&b.area).unwrap())
    }

    /// Deepest containment chain for a point. A contained county pulls in its
    /// parent state and country through the parent-id chain so that the chain
    /// is always consistent with the loaded hierarchy.
    pub fn resolve_point(&self, p: &GeoPoint) -> Resolution<'_> {
        if let Some(county) = self.smallest_containing(&self.counties, p) {
            let state = county
                .parent_id
                .as_deref()
                .and_then(|id| self.unit(AdminLevel::State, id));
            let country = state
                .and_then(|s| s.parent_id.as_deref())
                .and_then(|id| self.unit(AdminLevel::Country, id));
            return Resolution {
                county: Some(county),
                state,
                country,
            };
        }
        if let Some(state) = self.smallest_containing(&self.states, p) {
            let country = state
                .parent_id
                .as_deref()
                .and_then(|id| self.unit(AdminLevel::Country, id));
            return Resolution {
                county: None,
                state: Some(state),
                country,
            };
        }
        if let Some(country) = self.smallest_containing(&self.countries, p) {
            return Resolution {
                county: None,
                state: None,
                country: Some(country),
            };
        }
        Resolution::default()
    }
}

/// Great-circle distance in kilometers (haversine, Earth radius 6371.0088 km).
pub fn haversine_km(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (lat1, lon1) = (a.lat.to_radians(), a.lon.to_radians());
    let (lat2, lon2) = (b.lat.to_radians(), b.lon.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fixture_gazetteer() -> Gazetteer {
        // One square country holding two square states and one county.
        let countries = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"id":"C","name":"Country"},
             "geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,10],[0,10],[0,0]]]}}]}"#;
        let states = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"id":"A","name":"State A","country_id":"C"},
             "geometry":{"type":"Polygon","coordinates":[[[0,0],[5,0],[5,10],[0,10],[0,0]]]}},
            {"type":"Feature","properties":{"id":"B","name":"State B","country_id":"C"},
             "geometry":{"type":"Polygon","coordinates":[[[5,0],[10,0],[10,10],[5,10],[5,0]]]}}]}"#;
        let counties = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"id":"A1","name":"County A1","state_id":"A"},
             "geometry":{"type":"Polygon","coordinates":[[[1,1],[2,1],[2,2],[1,2],[1,1]]]}}]}"#;
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, content: &str| {
            let p = dir.path().join(name);
            let mut f = File::create(&p).unwrap();
            f.write_all(content.as_bytes()).unwrap();
            p
        };
        let c = write("counties.geojson", counties);
        let s = write("states.geojson", states);
        let n = write("countries.geojson", countries);
        Gazetteer::load(&c, &s, &n).unwrap()
    }

    #[test]
    fn loads_fixture_units() {
        let g = fixture_gazetteer();
        assert_eq!(g.len(), 4);
        assert_eq!(g.unit(AdminLevel::State, "A").unwrap().name, "State A");
    }

    #[test]
    fn empty_collection_warns() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("e.geojson");
        std::fs::write(&empty, r#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        let g = Gazetteer::load(&empty, &empty, &empty).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.warnings.len(), 3);
    }

    #[test]
    fn unclosed_ring_rejected_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.geojson");
        std::fs::write(
            &bad,
            r#"{"type":"FeatureCollection","features":[
              {"type":"Feature","properties":{"id":"X","name":"X"},
               "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1]]]}}]}"#,
        )
        .unwrap();
        let empty = dir.path().join("e.geojson");
        std::fs::write(&empty, r#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        let g = Gazetteer::load(&empty, &empty, &bad).unwrap();
        assert!(g.units(AdminLevel::Country).is_empty());
        assert!(g.warnings.iter().any(|w| w.contains("rejected")));
    }

    #[test]
    fn missing_property_is_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.geojson");
        std::fs::write(
            &bad,
            r#"{"type":"FeatureCollection","features":[
              {"type":"Feature","properties":{"id":"X"},
               "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]}"#,
        )
        .unwrap();
        let empty = dir.path().join("e.geojson");
        std::fs::write(&empty, r#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        assert!(matches!(
            Gazetteer::load(&empty, &empty, &bad),
            Err(GazetteerError::MissingProperty { .. })
        ));
    }

    #[test]
    fn resolve_chains() {
        let g = fixture_gazetteer();
        let in_county = GeoPoint::new(1.5, 1.5).unwrap();
        let r = g.resolve_point(&in_county);
        assert_eq!(r.county.unwrap().unit_id, "A1");
        assert_eq!(r.state.unwrap().unit_id, "A");
        assert_eq!(r.country.unwrap().unit_id, "C");

        let in_state_b = GeoPoint::new(5.0, 7.5).unwrap();
        let r = g.resolve_point(&in_state_b);
        assert!(r.county.is_none());
        assert_eq!(r.state.unwrap().unit_id, "B");
        assert_eq!(r.country.unwrap().unit_id, "C");

        let ocean = GeoPoint::new(-40.0, -40.0).unwrap();
        assert!(g.resolve_point(&ocean).is_empty());
    }

    #[test]
    fn resolve_state_centroid() {
        let g = fixture_gazetteer();
        let a = g.unit(AdminLevel::State, "A").unwrap();
        let r = g.resolve_point(&a.vertex_centroid().unwrap());
        assert_eq!(r.state.unwrap().unit_id, "A");
        assert_eq!(r.country.unwrap().unit_id, "C");
    }

    #[test]
    fn coordinate_range_checked() {
        assert!(GeoPoint::new(95.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, 181.0).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
        assert!(GeoPoint::new(90.0, -180.0).is_ok());
    }

    #[test]
    fn haversine_basics() {
        let p = GeoPoint::new(12.0, 34.0).unwrap();
        assert_eq!(haversine_km(&p, &p), 0.0);
        let a = GeoPoint::new(0.0, 0.0).unwrap();
        let b = GeoPoint::new(0.0, 180.0).unwrap();
        let half = std::f64::consts::PI * EARTH_RADIUS_KM;
        assert!((haversine_km(&a, &b) - half).abs() < 0.1);
        // NYC to London, hand-evaluated from the haversine formula.
        let nyc = GeoPoint::new(40.7128, -74.0060).unwrap();
        let lon = GeoPoint::new(51.5074, -0.1278).unwrap();
        let d = haversine_km(&nyc, &lon);
        assert!((d - 5570.2).abs() < 1.0, "got {d}");
    }

    proptest::proptest! {
        #[test]
        fn haversine_symmetry_and_triangle(
            lat1 in -89.0f64..89.0, lon1 in -179.0f64..179.0,
            lat2 in -89.0f64..89.0, lon2 in -179.0f64..179.0,
            lat3 in -89.0f64..89.0, lon3 in -179.0f64..179.0,
        ) {
            let a = GeoPoint::new(lat1, lon1).unwrap();
            let b = GeoPoint::new(lat2, lon2).unwrap();
            let c = GeoPoint::new(lat3, lon3).unwrap();
            let ab = haversine_km(&a, &b);
            let ba = haversine_km(&b, &a);
            proptest::prop_assert!((ab - ba).abs() < 1e-6);
            let ac = haversine_km(&a, &c);
            let cb = haversine_km(&c, &b);
            proptest::prop_assert!(ab <= ac + cb + 1e-6);
        }
    }
}

//! Location values shared by every stage: coordinates, the four-slot
//! [`ResolvedPlace`], and the granularity [`Level`]s it is compared at.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A WGS84 point in decimal degrees. Construction validates the ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub lat: f64,
    pub lon: f64,
}

impl Coordinates {
    /// Returns `None` unless `lat ∈ [-90, 90]` and `lon ∈ [-180, 180]`.
    pub fn new(lat: f64, lon: f64) -> Option<Self> {
        let valid = lat.is_finite()
            && lon.is_finite()
            && (-90.0..=90.0).contains(&lat)
            && (-180.0..=180.0).contains(&lon);
        valid.then_some(Coordinates { lat, lon })
    }
}

/// Administrative depth of a location, coarsest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Country,
    State,
    County,
    City,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Country, Level::State, Level::County, Level::City];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Country => "country",
            Level::State => "state",
            Level::County => "county",
            Level::City => "city",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A location normalized into country/state/county/city slots.
///
/// Names are stored normalized (see [`crate::gazetteer::normalize`]) and
/// `country_code` is the lowercase ISO 3166-1 alpha-2 code. A place is valid
/// when at least one granularity slot is filled; the country slot counts as
/// filled when either the code or the name is present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPlace {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub county: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<f64>,
}

impl ResolvedPlace {
    pub fn country_only(country_code: impl Into<String>) -> Self {
        ResolvedPlace {
            country_code: Some(country_code.into()),
            ..Default::default()
        }
    }

    pub fn is_valid(&self) -> bool {
        let coords_ok = match (self.lat, self.lon) {
            (None, None) => true,
            (Some(lat), Some(lon)) => Coordinates::new(lat, lon).is_some(),
            _ => false,
        };
        coords_ok && Level::ALL.iter().any(|&l| self.has_level(l))
    }

    pub fn has_level(&self, level: Level) -> bool {
        match level {
            Level::Country => self.country_code.is_some() || self.country.is_some(),
            _ => self.slot(level).is_some(),
        }
    }

    /// The comparable value at `level`. The country level compares codes.
    pub fn slot(&self, level: Level) -> Option<&str> {
        match level {
            Level::Country => self.country_code.as_deref(),
            Level::State => self.state.as_deref(),
            Level::County => self.county.as_deref(),
            Level::City => self.city.as_deref(),
        }
    }

    pub fn coordinates(&self) -> Option<Coordinates> {
        Coordinates::new(self.lat?, self.lon?)
    }

    pub fn set_coordinates(&mut self, coords: Option<Coordinates>) {
        self.lat = coords.map(|c| c.lat);
        self.lon = coords.map(|c| c.lon);
    }

    /// Strips service-specific fields (coordinates, importance), leaving the
    /// administrative slots that are shared in output records.
    pub fn administrative(&self) -> ResolvedPlace {
        ResolvedPlace {
            lat: None,
            lon: None,
            importance: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_ranges() {
        assert!(Coordinates::new(90.0, -180.0).is_some());
        assert!(Coordinates::new(95.0, 0.0).is_none());
        assert!(Coordinates::new(0.0, 180.5).is_none());
        assert!(Coordinates::new(f64::NAN, 0.0).is_none());
    }

    #[test]
    fn validity_needs_a_granularity_slot() {
        assert!(!ResolvedPlace::default().is_valid());
        assert!(ResolvedPlace::country_only("gb").is_valid());
        let coords_only = ResolvedPlace {
            lat: Some(1.0),
            lon: Some(2.0),
            ..Default::default()
        };
        assert!(!coords_only.is_valid());
        let half_coords = ResolvedPlace {
            city: Some("paris".into()),
            lat: Some(1.0),
            ..Default::default()
        };
        assert!(!half_coords.is_valid());
    }

    #[test]
    fn country_slot_compares_codes() {
        let p = ResolvedPlace {
            country: Some("france".into()),
            ..Default::default()
        };
        assert!(p.has_level(Level::Country));
        assert_eq!(p.slot(Level::Country), None);
    }
}

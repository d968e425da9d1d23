use serde_json::{Map, Value};

use crate::gazetteer::normalize;
use crate::place::{Coordinates, ResolvedPlace};

const STATE_KEYS: &[&str] = &["state", "province", "region"];
const COUNTY_KEYS: &[&str] = &["county", "district"];
const CITY_KEYS: &[&str] = &["city", "town", "village", "municipality", "hamlet"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed geocoder response: {0}")]
pub struct BodyError(pub String);

fn first_present(address: &Map<String, Value>, keys: &[&str]) -> Option<String> {
    keys.iter()
        .filter_map(|k| address.get(*k)?.as_str())
        .map(normalize)
        .find(|v| !v.is_empty())
}

/// Maps a Nominatim `address` object onto the four granularity slots.
///
/// Returns `None` when no slot can be filled.
pub fn map_address(address: &Map<String, Value>) -> Option<ResolvedPlace> {
    let country_code = address
        .get("country_code")
        .and_then(Value::as_str)
        .map(|c| c.trim().to_ascii_lowercase())
        .filter(|c| !c.is_empty());
    let place = ResolvedPlace {
        country_code,
        country: first_present(address, &["country"]),
        state: first_present(address, STATE_KEYS),
        county: first_present(address, COUNTY_KEYS),
        city: first_present(address, CITY_KEYS),
        ..Default::default()
    };
    place.is_valid().then_some(place)
}

fn number(v: Option<&Value>) -> Option<f64> {
    match v? {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn map_result(obj: &Map<String, Value>) -> Option<ResolvedPlace> {
    let mut place = map_address(obj.get("address")?.as_object()?)?;
    place.set_coordinates(
        number(obj.get("lat")).zip(number(obj.get("lon"))).and_then(|(lat, lon)| Coordinates::new(lat, lon)),
    );
    place.importance = number(obj.get("importance"))
        .filter(|v| v.is_finite())
        .map(|v| v.clamp(0.0, 1.0));
    Some(place)
}

/// Parses a `/search` body: a JSON array, best match first. Results whose
/// address maps to nothing are dropped.
pub fn parse_search_body(body: &str) -> Result<Vec<ResolvedPlace>, BodyError> {
    let value: Value = serde_json::from_str(body).map_err(|e| BodyError(e.to_string()))?;
    let Value::Array(items) = value else {
        return Err(BodyError("search response is not an array".into()));
    };
    Ok(items
        .iter()
        .filter_map(Value::as_object)
        .filter_map(map_result)
        .collect())
}

/// Parses a `/reverse` body. `{"error": ...}` (open water, no data) is
/// not-found.
pub fn parse_reverse_body(body: &str) -> Result<Option<ResolvedPlace>, BodyError> {
    let value: Value = serde_json::from_str(body).map_err(|e| BodyError(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(BodyError("reverse response is not an object".into()));
    };
    if obj.contains_key("error") {
        return Ok(None);
    }
    Ok(map_result(&obj))
}

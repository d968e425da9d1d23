//! Geolocation inference for social-media corpora.
//!
//! A tweet can carry location evidence in four places: device GPS
//! coordinates, the platform `place` tag, the free-text profile location, and
//! the tweet body. [`resolve`] turns each into a [`place::ResolvedPlace`]
//! using a Nominatim-compatible [`geocode`] service; free text goes through
//! gazetteer-based [`toponym`] extraction and a country majority vote first.
//!
//! Around that core sit corpus [`ingest`]ion, the accuracy [`eval`]uation
//! against GPS ground truth, corpus [`stats`] reports, and ID [`hydrate`]ion.

pub mod error;
pub mod eval;
pub mod gazetteer;
pub mod geocode;
pub mod hydrate;
pub mod ingest;
pub mod place;
pub mod ratelimit;
pub mod record;
pub mod resolve;
pub mod stats;
pub mod toponym;

pub use error::{Error, Result};

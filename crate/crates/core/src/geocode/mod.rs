//! Client for Nominatim-compatible geocoding services.
//!
//! Forward search (`/search`) turns a place name into ranked candidates and
//! reverse geocoding (`/reverse`) turns coordinates into the containing
//! place. Responses are mapped into [`ResolvedPlace`](crate::place::ResolvedPlace)
//! by [`map_address`], cached persistently by request key, and requests are
//! paced per endpoint.

mod address;
mod cache;
mod client;
mod transport;

pub use address::{map_address, parse_reverse_body, parse_search_body, BodyError};
pub use cache::{CacheStats, GeocodeCache};
pub use client::{
    ClientCounters, EndpointConfig, GeocodeClient, GeocodeClientBuilder, GeocodeError,
    RetryPolicy,
};
pub use transport::{
    FixtureTransport, HttpResponse, HttpTransport, HttpTransportOptions, MissingFixture,
    Transport, TransportError,
};

use crate::place::Coordinates;

/// One geocoding request. Its [`key`](GeocodeRequest::key) identifies the
/// request in the cache and in recorded fixtures.
#[derive(Debug, Clone, PartialEq)]
pub enum GeocodeRequest {
    /// A normalized, non-empty query.
    Search(String),
    Reverse(Coordinates),
}

/// Rounds to 4 decimal places (about 11 m) and folds negative zero.
pub fn round_coordinate(value: f64) -> f64 {
    let r = (value * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl GeocodeRequest {
    /// `search:<query>` or `reverse:<lat>,<lon>` with 4-decimal coordinates.
    pub fn key(&self) -> String {
        match self {
            GeocodeRequest::Search(q) => format!("search:{q}"),
            GeocodeRequest::Reverse(c) => format!(
                "reverse:{:.4},{:.4}",
                round_coordinate(c.lat),
                round_coordinate(c.lon)
            ),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeocodeRequest::Search(_) => "search",
            GeocodeRequest::Reverse(_) => "reverse",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys() {
        assert_eq!(GeocodeRequest::Search("paris".into()).key(), "search:paris");
        let c = Coordinates::new(40.712_84, -74.006_04).unwrap();
        assert_eq!(GeocodeRequest::Reverse(c).key(), "reverse:40.7128,-74.0060");
        let z = Coordinates::new(-0.000_01, 0.0).unwrap();
        assert_eq!(GeocodeRequest::Reverse(z).key(), "reverse:0.0000,0.0000");
    }
}

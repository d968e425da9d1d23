//! Request pacing for outbound HTTP.
//!
//! [`RateLimiter`] enforces a ceiling of `max_requests` per sliding window: it
//! remembers when each recent permit was granted and only grants a new one
//! once the permit `max_requests` grants ago is older than the window. Any
//! window of that length therefore contains at most `max_requests` grants.
//! A configurable guard is added to the window to absorb the gap between
//! granting a permit and the request reaching the server.

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

/// Time source. Tests swap in [`ManualClock`] so waits cost nothing.
pub trait Clock: Send + Sync {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// A virtual clock: `sleep` advances time instantly and records the request.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
    sleeps: Mutex<Vec<Duration>>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }

    /// Every duration passed to `sleep`, in call order.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.sleeps.lock().unwrap().clone()
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.sleeps.lock().unwrap().push(d);
        self.advance(d);
    }
}

/// At most `max_requests` in any window of length `window`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateLimit {
    pub max_requests: u32,
    pub window: Duration,
}

impl RateLimit {
    pub fn per_second(max_requests: u32) -> Self {
        RateLimit {
            max_requests,
            window: Duration::from_secs(1),
        }
    }

    pub fn per_minute(max_requests: u32) -> Self {
        RateLimit {
            max_requests,
            window: Duration::from_secs(60),
        }
    }

    /// The usage ceiling of the public OpenStreetMap Nominatim service.
    pub fn public_nominatim() -> Self {
        RateLimit::per_minute(60)
    }

    /// Ceiling for one self-hosted Nominatim server tuned for bulk work.
    pub fn self_hosted_nominatim() -> Self {
        RateLimit::per_second(4_000)
    }
}

/// Default slack added to the limiter window.
pub const DEFAULT_WINDOW_GUARD: Duration = Duration::from_millis(20);

pub struct RateLimiter {
    limit: RateLimit,
    span: Duration,
    granted: Mutex<VecDeque<Duration>>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for RateLimiter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RateLimiter")
            .field("limit", &self.limit)
            .field("span", &self.span)
            .finish()
    }
}

impl RateLimiter {
    /// Panics if `limit.max_requests` is zero.
    pub fn new(limit: RateLimit, guard: Duration, clock: Arc<dyn Clock>) -> Self {
        assert!(limit.max_requests > 0, "rate limit must allow at least one request");
        RateLimiter {
            limit,
            span: limit.window + guard,
            granted: Mutex::new(VecDeque::with_capacity((limit.max_requests as usize).min(4096))),
            clock,
        }
    }

    pub fn limit(&self) -> RateLimit {
        self.limit
    }

    /// Grants a permit if one is available now; otherwise returns how long to
    /// wait before asking again.
    pub fn try_acquire(&self) -> Result<(), Duration> {
        let mut granted = self.granted.lock().unwrap();
        let now = self.clock.now();
        while granted
            .front()
            .is_some_and(|&t| t + self.span <= now)
        {
            granted.pop_front();
        }
        if granted.len() < self.limit.max_requests as usize {
            granted.push_back(now);
            Ok(())
        } else {
            let oldest = *granted.front().expect("full queue is non-empty");
            Err(oldest + self.span - now)
        }
    }

    /// Blocks until a permit is granted.
    pub fn acquire(&self) {
        while let Err(wait) = self.try_acquire() {
            self.clock.sleep(wait);
        }
    }
}

/// Counting semaphore bounding concurrent in-flight requests.
#[derive(Debug)]
pub struct InFlight {
    available: Mutex<usize>,
    freed: Condvar,
}

pub struct InFlightPermit<'a> {
    owner: &'a InFlight,
}

impl InFlight {
    pub fn new(capacity: usize) -> Self {
        InFlight {
            available: Mutex::new(capacity.max(1)),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> InFlightPermit<'_> {
        let mut available = self.available.lock().unwrap();
        while *available == 0 {
            available = self.freed.wait(available).unwrap();
        }
        *available -= 1;
        InFlightPermit { owner: self }
    }
}

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        *self.owner.available.lock().unwrap() += 1;
        self.owner.freed.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limiter(limit: RateLimit, guard: Duration) -> (Arc<ManualClock>, RateLimiter) {
        let clock = Arc::new(ManualClock::new());
        let l = RateLimiter::new(limit, guard, clock.clone());
        (clock, l)
    }

    #[test]
    fn one_per_second_ten_requests_take_nine_seconds() {
        let (clock, l) = limiter(RateLimit::per_second(1), Duration::ZERO);
        for _ in 0..10 {
            l.acquire();
        }
        assert!(clock.now() >= Duration::from_secs(9));
        assert_eq!(clock.now(), Duration::from_secs(9));
    }

    #[test]
    fn burst_up_to_ceiling_then_wait() {
        let (clock, l) = limiter(RateLimit::per_second(5), Duration::ZERO);
        for _ in 0..5 {
            assert!(l.try_acquire().is_ok());
        }
        assert_eq!(l.try_acquire(), Err(Duration::from_secs(1)));
        clock.advance(Duration::from_millis(999));
        assert!(l.try_acquire().is_err());
        clock.advance(Duration::from_millis(1));
        assert!(l.try_acquire().is_ok());
    }

    #[test]
    fn guard_extends_window() {
        let (clock, l) = limiter(RateLimit::per_second(1), Duration::from_millis(20));
        l.acquire();
        l.acquire();
        assert_eq!(clock.now(), Duration::from_millis(1020));
    }

    #[test]
    fn public_preset_is_sixty_per_minute() {
        let p = RateLimit::public_nominatim();
        assert_eq!(p.max_requests, 60);
        assert_eq!(p.window, Duration::from_secs(60));
    }

    #[test]
    fn grants_never_exceed_ceiling_in_any_window() {
        // Irregular arrivals against a 3-per-second ceiling.
        let (clock, l) = limiter(RateLimit::per_second(3), Duration::ZERO);
        let mut grants = Vec::new();
        for step in [0u64, 10, 10, 300, 5, 700, 1, 1, 1, 2000, 0, 0, 0, 0] {
            clock.advance(Duration::from_millis(step));
            l.acquire();
            grants.push(clock.now());
        }
        for (i, &start) in grants.iter().enumerate() {
            let in_window = grants[i..]
                .iter()
                .take_while(|&&t| t < start + Duration::from_secs(1))
                .count();
            assert!(in_window <= 3, "window at {start:?} held {in_window}");
        }
    }

    #[test]
    fn in_flight_caps_concurrency() {
        let sem = Arc::new(InFlight::new(2));
        let peak = Arc::new(Mutex::new((0usize, 0usize)));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let sem = sem.clone();
                let peak = peak.clone();
                std::thread::spawn(move || {
                    let _p = sem.acquire();
                    {
                        let mut g = peak.lock().unwrap();
                        g.0 += 1;
                        g.1 = g.1.max(g.0);
                    }
                    std::thread::sleep(Duration::from_millis(5));
                    peak.lock().unwrap().0 -= 1;
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.lock().unwrap().1 <= 2);
    }
}

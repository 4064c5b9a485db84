use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Returned when a caller would have to wait longer than allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WouldExceedWait;

/// Evenly spaced request scheduling (GCRA with a burst of one): each
/// request is granted a slot `1/rate` seconds after the previous one, so
/// no one-second window ever holds more than `rate + 1` requests.
/// Callers block until their slot; the lock is held only to reserve it.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    /// `rate` is in requests per second and must be positive.
    pub fn new(rate: f64) -> Self {
        assert!(rate > 0.0 && rate.is_finite(), "rate limit must be positive");
        Self {
            interval: Duration::from_secs_f64(1.0 / rate),
            next_slot: Mutex::new(None),
        }
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    /// Reserve the next slot and sleep until it arrives. Fails without
    /// reserving when the slot is more than `max_wait` away.
    pub fn acquire(&self, max_wait: Duration) -> Result<(), WouldExceedWait> {
        let slot = {
            let mut next = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            if slot.saturating_duration_since(now) > max_wait {
                return Err(WouldExceedWait);
            }
            *next = Some(slot + self.interval);
            slot
        };
        let wait = slot.saturating_duration_since(Instant::now());
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn spaces_requests_by_interval() {
        let limiter = RateLimiter::new(20.0);
        let start = Instant::now();
        for _ in 0..5 {
            limiter.acquire(Duration::from_secs(5)).unwrap();
        }
        // first slot is immediate, four more follow at 50 ms spacing
        assert!(start.elapsed() >= Duration::from_millis(195));
    }

    #[test]
    fn refuses_long_waits() {
        let limiter = RateLimiter::new(1.0);
        limiter.acquire(Duration::ZERO).unwrap();
        assert_eq!(limiter.acquire(Duration::from_millis(100)), Err(WouldExceedWait));
    }

    #[test]
    fn concurrent_callers_get_distinct_slots() {
        let limiter = Arc::new(RateLimiter::new(50.0));
        let stamps = Arc::new(Mutex::new(Vec::new()));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let limiter = Arc::clone(&limiter);
                let stamps = Arc::clone(&stamps);
                std::thread::spawn(move || {
                    for _ in 0..3 {
                        limiter.acquire(Duration::from_secs(5)).unwrap();
                        stamps.lock().unwrap().push(Instant::now());
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        let mut stamps = stamps.lock().unwrap().clone();
        stamps.sort();
        assert_eq!(stamps.len(), 24);
        let span = stamps[23] - stamps[0];
        assert!(span >= Duration::from_millis(400), "{span:?}");
    }
}

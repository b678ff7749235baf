//! Token-bucket rate limiter shared between threads.

use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug)]
struct Bucket {
    tokens: f64,
    last: Instant,
}

/// A blocking token bucket. `acquire` sleeps until a token is available.
#[derive(Debug)]
pub struct RateLimiter {
    rate: f64,
    burst: f64,
    bucket: Mutex<Bucket>,
}

impl RateLimiter {
    /// `per_second` tokens are added each second, up to `burst` stored tokens.
    pub fn new(per_second: f64, burst: u32) -> Self {
        assert!(per_second > 0.0, "rate must be positive");
        let burst = f64::from(burst.max(1));
        Self {
            rate: per_second,
            burst,
            bucket: Mutex::new(Bucket {
                tokens: burst,
                last: Instant::now(),
            }),
        }
    }

    pub fn per_second(per_second: f64) -> Self {
        Self::new(per_second, 1)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Takes a token if one is available, otherwise returns how long to wait.
    fn try_take(&self) -> Result<(), Duration> {
        let mut b = self.bucket.lock().expect("rate limiter poisoned");
        let now = Instant::now();
        let elapsed = now.duration_since(b.last).as_secs_f64();
        b.tokens = (b.tokens + elapsed * self.rate).min(self.burst);
        b.last = now;
        if b.tokens >= 1.0 {
            b.tokens -= 1.0;
            Ok(())
        } else {
            Err(Duration::from_secs_f64((1.0 - b.tokens) / self.rate))
        }
    }

    pub fn acquire(&self) {
        while let Err(wait) = self.try_take() {
            std::thread::sleep(wait);
        }
    }
}

use std::thread;
use std::time::{Duration, Instant};

/// Bounded retry with exponential backoff.
///
/// The whole call, including backoff sleeps, finishes within
/// `timeout × (max_retries + 1)`: each attempt gets at most `timeout`, and
/// sleeps and later attempts are clipped to what is left of that budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub timeout: Duration,
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

/// Outcome of one attempt as judged by the caller.
pub(crate) enum Attempt<T, E> {
    Done(T),
    /// Transient failure; retry if budget remains.
    Retry(E),
    /// Permanent failure; stop now.
    Fail(E),
}

impl RetryPolicy {
    pub fn budget(&self) -> Duration {
        self.timeout * (self.max_retries + 1)
    }

    pub(crate) fn run<T, E>(
        &self,
        mut attempt: impl FnMut(Duration) -> Attempt<T, E>,
    ) -> Result<T, (E, u32)> {
        let start = Instant::now();
        let budget = self.budget();
        let mut backoff = self.initial_backoff;
        let mut tries = 0;
        loop {
            let remaining = budget.saturating_sub(start.elapsed());
            let per_attempt = self.timeout.min(remaining).max(Duration::from_millis(1));
            tries += 1;
            match attempt(per_attempt) {
                Attempt::Done(v) => return Ok(v),
                Attempt::Fail(e) => return Err((e, tries)),
                Attempt::Retry(e) => {
                    let remaining = budget.saturating_sub(start.elapsed());
                    if tries > self.max_retries || remaining.is_zero() {
                        return Err((e, tries));
                    }
                    thread::sleep(backoff.min(remaining));
                    backoff = (backoff * 2).min(self.timeout);
                }
            }
        }
    }
}

use std::fmt;
use std::ops::{Add, Sub};

const MICROS_PER_SEC: u64 = 1_000_000;

/// Simulation time in integer microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * MICROS_PER_SEC)
    }

    /// Rounds to the nearest microsecond. Negative and non-finite inputs
    /// return `None`.
    pub fn from_secs_f64(s: f64) -> Option<Self> {
        if !s.is_finite() || s < 0.0 {
            return None;
        }
        let us = (s * MICROS_PER_SEC as f64).round();
        if us > u64::MAX as f64 {
            return None;
        }
        Some(SimTime(us as u64))
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_SEC as f64
    }

    /// Index of the one-second bucket containing this instant.
    pub const fn bucket(self) -> u64 {
        self.0 / MICROS_PER_SEC
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    /// Serialization delay of `bits` on a channel of `bps`, rounded up to
    /// the next whole microsecond.
    pub fn serialization(bits: u64, bps: u64) -> SimTime {
        assert!(bps > 0, "channel rate must be positive");
        let num = bits as u128 * MICROS_PER_SEC as u128;
        SimTime(num.div_ceil(bps as u128) as u64)
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{:06}",
            self.0 / MICROS_PER_SEC,
            self.0 % MICROS_PER_SEC
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_rounds_up() {
        // 2000 bits at 11 Mb/s is 181.81.. us
        assert_eq!(SimTime::serialization(2000, 11_000_000).as_micros(), 182);
        assert_eq!(
            SimTime::serialization(11_000_000, 11_000_000),
            SimTime::from_secs(1)
        );
        assert_eq!(SimTime::serialization(0, 11_000_000), SimTime::ZERO);
    }

    #[test]
    fn buckets_and_display() {
        let t = SimTime::from_secs_f64(0.5).unwrap();
        assert_eq!(t.bucket(), 0);
        assert_eq!(SimTime::from_secs(3).bucket(), 3);
        assert_eq!(t.to_string(), "0.500000");
        assert!(SimTime::from_secs_f64(-1.0).is_none());
        assert!(SimTime::from_secs_f64(f64::NAN).is_none());
    }
}

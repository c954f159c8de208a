//! Exact gossip mass.
//!
//! Push-pull averaging only ever adds two values and halves the result, so
//! every mass a node can hold is a dyadic rational. Storing the exact
//! numerator and binary exponent makes network-wide mass conservation an
//! equality, not a tolerance.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use std::fmt;

/// A non-negative dyadic rational: `num / 2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mass {
    num: BigUint,
    exp: u32,
}

impl Mass {
    pub fn zero() -> Self {
        Mass {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn from_u64(v: u64) -> Self {
        Mass {
            num: BigUint::from(v),
            exp: 0,
        }
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp as u64) as u32;
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
        self
    }

    pub fn add(&self, other: &Mass) -> Mass {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp) as usize;
        let b = &other.num << (exp - other.exp) as usize;
        Mass { num: a + b, exp }.normalized()
    }

    /// Exact average of two masses.
    pub fn average(a: &Mass, b: &Mass) -> Mass {
        let sum = a.add(b);
        Mass {
            num: sum.num,
            exp: sum.exp + 1,
        }
        .normalized()
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64().unwrap_or(f64::MAX) / 2f64.powi(self.exp as i32)
    }
}

impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}", self.to_f64())
    }
}

pub fn total(masses: &[Mass]) -> Mass {
    masses.iter().fold(Mass::zero(), |acc, m| acc.add(m))
}

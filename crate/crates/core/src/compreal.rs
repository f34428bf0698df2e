//! Computable reals as refinement callbacks.
//!
//! A value is a function `approx(k)` returning a rational within `2^-k` of
//! the real it names. Comparisons refine until the sign is resolved or a
//! precision budget is exhausted; an exhausted budget is reported as an
//! error, never guessed around.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::numeric::{rat_to_f64, RatInterval};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompRealError {
    #[error("comparison undecided at precision budget of {budget_bits} bits{context}")]
    Undecided { budget_bits: u32, context: String },
}

type ApproxFn = dyn Fn(u32) -> BigRational + Send + Sync;

/// A computable real: `approx(k)` is within `2^-k` of the value.
#[derive(Clone)]
pub struct CompReal {
    approx: Arc<ApproxFn>,
}

impl fmt::Debug for CompReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CompReal(≈{})", rat_to_f64(&self.approx_at(40)))
    }
}

fn pow2_inv(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

impl CompReal {
    pub fn from_fn(f: impl Fn(u32) -> BigRational + Send + Sync + 'static) -> Self {
        CompReal { approx: Arc::new(f) }
    }

    pub fn exact(v: BigRational) -> Self {
        CompReal::from_fn(move |_| v.clone())
    }

    pub fn approx_at(&self, bits: u32) -> BigRational {
        (self.approx)(bits)
    }

    /// Enclosing interval at `bits` of refinement.
    pub fn interval(&self, bits: u32) -> RatInterval {
        let mid = self.approx_at(bits);
        let e = pow2_inv(bits);
        RatInterval::new(&mid - &e, mid + e)
    }

    pub fn add(&self, other: &CompReal) -> CompReal {
        let a = self.approx.clone();
        let b = other.approx.clone();
        CompReal::from_fn(move |k| a(k + 1) + b(k + 1))
    }

    pub fn sub(&self, other: &CompReal) -> CompReal {
        let a = self.approx.clone();
        let b = other.approx.clone();
        CompReal::from_fn(move |k| a(k + 1) - b(k + 1))
    }

    pub fn scale(&self, c: BigRational) -> CompReal {
        let a = self.approx.clone();
        CompReal::from_fn(move |k| {
            if c.is_zero() {
                return BigRational::zero();
            }
            // |c·a(k+s) - c·x| < |c|·2^-(k+s) <= 2^-k once 2^s >= |c|.
            let extra = c.abs().ceil().to_integer().bits() as u32 + 1;
            a(k + extra) * &c
        })
    }

    /// Decides `self ? rhs`, refining up to `budget_bits`. `Equal` is only
    /// ever returned for provably-equal dyadic coincidences, so an undecided
    /// comparison is an error, not an answer.
    pub fn compare_rational(
        &self,
        rhs: &BigRational,
        budget_bits: u32,
        context: &str,
    ) -> Result<Ordering, CompRealError> {
        let mut k = 8u32.min(budget_bits);
        loop {
            let iv = self.interval(k);
            if &iv.lo > rhs {
                return Ok(Ordering::Greater);
            }
            if &iv.hi < rhs {
                return Ok(Ordering::Less);
            }
            if k >= budget_bits {
                return Err(CompRealError::Undecided {
                    budget_bits,
                    context: if context.is_empty() {
                        String::new()
                    } else {
                        format!(" ({context})")
                    },
                });
            }
            k = (k * 2).min(budget_bits);
        }
    }

    /// Sign of the value, within budget.
    pub fn sign(&self, budget_bits: u32, context: &str) -> Result<Ordering, CompRealError> {
        self.compare_rational(&BigRational::zero(), budget_bits, context)
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.approx_at(64))
    }
}

/// sqrt(1/2) as a computable real via integer square roots; used by tests
/// that need a genuinely irrational probability.
#[cfg(test)]
pub(crate) fn sqrt_half() -> CompReal {
    CompReal::from_fn(|k| {
        let scaled = BigInt::one() << (2 * (k as u64 + 2) + 1); // 2 * 4^(k+2)
        let root = scaled.sqrt();
        BigRational::new(root, BigInt::one() << (k + 3))
    })
}

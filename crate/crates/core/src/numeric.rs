//! Exact-arithmetic building blocks shared across the crate.
//!
//! Everything here is either exact (big rationals, integer roots) or an
//! enclosure: `RatInterval` is a closed rational interval guaranteed to
//! contain the real value it stands for. Logarithms are evaluated with the
//! atanh series on exact rationals, so the returned intervals are sound by
//! construction, not by floating-point faith.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("cannot parse `{0}` as a rational (expected `a`, `a/b`, or a decimal)")]
    ParseRational(String),
    #[error("denominator must be nonzero")]
    ZeroDenominator,
}

/// Parses `"3/4"`, `"-1/2"`, `"7"`, or a finite decimal like `"0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational, NumericError> {
    let s = s.trim();
    let bad = || NumericError::ParseRational(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(NumericError::ZeroDenominator);
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let i: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let num = if neg { i * &scale - f } else { i * &scale + f };
        return Ok(BigRational::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Formats a rational as `num/den` (or `num` when the denominator is 1).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `base^exp` for big integers with a `u64` exponent.
pub fn bigint_pow(base: &BigInt, mut exp: u64) -> BigInt {
    let mut result = BigInt::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result *= &b;
        }
        exp >>= 1;
        if exp > 0 {
            b = &b * &b;
        }
    }
    result
}

/// `base^exp` for big rationals with a `u64` exponent.
pub fn bigrat_pow(base: &BigRational, exp: u64) -> BigRational {
    BigRational::new(bigint_pow(base.numer(), exp), bigint_pow(base.denom(), exp))
}

/// Converts a big rational to `f64` without overflowing on huge numerators
/// or denominators (`Ratio::to_f64` yields `NaN` once both exceed `f64`
/// range). Relative error is a few ulp.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // Keep ~80 significant bits of each side, track the discarded exponent.
    let keep = 80i64;
    let (ns, ne) = shift_to(num, nb - keep);
    let (ds, de) = shift_to(den, db - keep);
    let mantissa = ns / ds;
    let v = mantissa * 2f64.powi((ne - de) as i32);
    if neg {
        -v
    } else {
        v
    }
}

fn shift_to(x: &BigUint, drop: i64) -> (f64, i64) {
    if drop <= 0 {
        (x.to_f64().unwrap_or(f64::MAX), 0)
    } else {
        let shifted = x >> (drop as u64);
        (shifted.to_f64().unwrap_or(f64::MAX), drop)
    }
}

/// `⌈n^(num/den)⌉` computed exactly via integer root extraction.
///
/// Saturates at `u64::MAX` when the result exceeds `u64` (such thresholds
/// lie beyond any prefix we can examine anyway).
pub fn ceil_pow_rational(n: u64, num: u64, den: u64) -> u64 {
    assert!(den > 0, "exponent denominator must be positive");
    assert!(num > 0, "exponent numerator must be positive");
    if n <= 1 {
        return n;
    }
    let p = bigint_pow(&BigInt::from(n), num);
    let root = p.nth_root(den as u32);
    let exact = bigint_pow(&root, den) == p;
    let r = if exact { root } else { root + 1 };
    r.to_u64().unwrap_or(u64::MAX)
}

/// A closed interval with exact rational endpoints, `lo <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn point(v: BigRational) -> Self {
        RatInterval { lo: v.clone(), hi: v }
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        RatInterval { lo, hi }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        RatInterval::new(lo, hi)
    }

    pub fn scale(&self, c: &BigRational) -> RatInterval {
        if c.is_negative() {
            RatInterval::new(&self.hi * c, &self.lo * c)
        } else {
            RatInterval::new(&self.lo * c, &self.hi * c)
        }
    }

    /// Interval division; `other` must not contain zero.
    pub fn div(&self, other: &RatInterval) -> RatInterval {
        assert!(
            other.lo.is_positive() || other.hi.is_negative(),
            "division by an interval containing zero"
        );
        let candidates = [
            &self.lo / &other.lo,
            &self.lo / &other.hi,
            &self.hi / &other.lo,
            &self.hi / &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        RatInterval::new(lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }
}

fn rat_two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

/// Rounds a positive rational to a dyadic interval of width `2^-bits`
/// containing it, keeping the series terms small when the input has a huge
/// denominator. Small-denominator inputs are kept exact (zero width), which
/// lets the series converge purely by adding terms.
fn dyadic_enclose(x: &BigRational, bits: u32) -> RatInterval {
    if x.denom().bits() <= bits as u64 {
        return RatInterval::point(x.clone());
    }
    let scale = BigInt::one() << bits;
    let scaled = x * BigRational::from_integer(scale.clone());
    let fl = scaled.floor().to_integer();
    let lo = BigRational::new(fl.clone(), scale.clone());
    let hi = BigRational::new(fl + 1, scale);
    RatInterval::new(lo, hi)
}

/// `ln` of a rational in `[1, 2]` via the atanh series
/// `ln x = 2·Σ t^(2j+1)/(2j+1)` with `t = (x-1)/(x+1) ∈ [0, 1/3]`.
///
/// Partial sums underestimate; the remainder after `terms` terms is at most
/// `2·t^(2J+1) / ((2J+1)(1-t²))`.
fn ln_mantissa(m: &BigRational, terms: usize, round_bits: u32) -> RatInterval {
    debug_assert!(*m >= BigRational::one() && *m <= rat_two());
    if m.is_one() {
        return RatInterval::point(BigRational::zero());
    }
    let t_exact = (m - BigRational::one()) / (m + BigRational::one());
    // Round t outward to dyadics so series terms stay small.
    let t_iv = dyadic_enclose(&t_exact, round_bits);
    let eval = |t: &BigRational, upper: bool| -> BigRational {
        let t2 = t * t;
        let mut term = t.clone();
        let mut sum = BigRational::zero();
        for j in 0..terms {
            sum += &term / BigRational::from_integer(BigInt::from(2 * j as u64 + 1));
            term *= &t2;
        }
        let mut v = sum * rat_two();
        if upper {
            // term now holds t^(2J+1)
            let denom = BigRational::from_integer(BigInt::from(2 * terms as u64 + 1))
                * (BigRational::one() - &t2);
            v += rat_two() * term / denom;
        }
        v
    };
    RatInterval::new(eval(&t_iv.lo, false), eval(&t_iv.hi, true))
}

/// Certified enclosure of `ln 2` (the series argument `t = 1/3` stays
/// exact, so the width is the truncation remainder alone).
pub fn ln2_interval(terms: usize) -> RatInterval {
    ln_mantissa(&rat_two(), terms, 8)
}

/// Certified enclosure of `ln x` for a positive rational `x`.
///
/// The interval width shrinks roughly like `9^-terms`; `terms = 40` gives
/// far better than 2^-100.
pub fn ln_interval(x: &BigRational, terms: usize, round_bits: u32) -> RatInterval {
    assert!(x.is_positive(), "ln of a non-positive rational");
    // Range-reduce: x = m * 2^e with m in [1, 2).
    let mut e: i64 = 0;
    let mut m = x.clone();
    let one = BigRational::one();
    let two = rat_two();
    while m < one {
        m *= &two;
        e -= 1;
    }
    while m >= two {
        m /= &two;
        e += 1;
    }
    let ln_m = ln_mantissa(&m, terms, round_bits);
    if e == 0 {
        return ln_m;
    }
    let ln2 = ln2_interval(terms);
    let e_rat = BigRational::from_integer(BigInt::from(e));
    ln_m.add(&ln2.scale(&e_rat))
}

/// Certified enclosure of `log2 x`, with width at most `2^-bits`.
///
/// Exact (zero-width) for powers of two.
pub fn log2_interval(x: &BigRational, bits: u32) -> RatInterval {
    assert!(x.is_positive(), "log2 of a non-positive rational");
    // Powers of two are exact.
    if x.numer().is_one() || x.denom().is_one() {
        let (mag, sign) = if x.denom().is_one() {
            (x.numer().magnitude().clone(), 1i64)
        } else {
            (x.denom().magnitude().clone(), -1i64)
        };
        if mag.count_ones() == 1 {
            let e = sign * (mag.bits() as i64 - 1);
            return RatInterval::point(BigRational::from_integer(BigInt::from(e)));
        }
    }
    let target = BigRational::new(BigInt::one(), BigInt::one() << bits);
    let mut terms = 24usize;
    let round_bits = bits + 32;
    loop {
        let ln_x = ln_interval(x, terms, round_bits);
        let ln2 = ln2_interval(terms);
        let iv = ln_x.div(&ln2);
        if iv.width() <= target || terms > 4096 {
            return iv;
        }
        terms *= 2;
    }
}

/// A `log2` value in fixed point: `value ≈ mantissa · 2^-bits`, with the
/// true value within `err_units · 2^-bits` of it.
#[derive(Debug, Clone)]
pub struct FixedLog {
    pub mantissa: BigInt,
    pub err_units: u64,
    pub bits: u32,
}

/// Fixed-point `log2 p` used by the streaming entropy scans.
pub fn log2_fixed(p: &BigRational, bits: u32) -> FixedLog {
    let iv = log2_interval(p, bits + 2);
    let scale = BigRational::from_integer(BigInt::one() << bits);
    let mid = iv.midpoint() * &scale;
    let mantissa = mid.round().to_integer();
    // Half the interval width plus one unit of rounding slack.
    let half_w = iv.width() * &scale / rat_two();
    let err = half_w.ceil().to_integer().to_u64().unwrap_or(u64::MAX).saturating_add(1);
    FixedLog { mantissa, err_units: err, bits }
}

/// Upper bound on `x` as f64: nudges the value up by a documented margin so
/// that certificate values computed through `f64` transcendentals stay
/// genuine upper bounds (libm-quality primitives are within a few ulp;
/// 2^-40 relative leaves a factor-of-thousands margin).
pub fn round_up(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x + x.abs() * 9.1e-13 + f64::MIN_POSITIVE
}

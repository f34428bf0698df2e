//! Certified tail-bound calculators.
//!
//! Every calculator returns a [`BoundCertificate`]: a numeric upper bound
//! together with a machine-readable record of which inequality produced it
//! and with which parameters. Transcendental steps are evaluated in `f64`
//! and rounded outward (see [`crate::numeric::round_up`]), so a certificate
//! value never under-reports the quantity it bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::numeric::{bigrat_pow, ceil_pow_rational, rat_to_f64, round_up};
use crate::special::{normal_band, upper_incomplete_gamma, SpecialError};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search cap {cap} exceeded while looking for {what}")]
    SearchCap { cap: u64, what: String },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// How a certificate value was derived. Serialized alongside the value so a
/// reader can recompute the chain.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "rule")]
pub enum Derivation {
    /// 2·exp(-eps²·n/2) for the binary deviation set, valid for
    /// 0 < eps <= min{q, 1-q}.
    ChernoffTail { q: String, eps: String, n: u64 },
    /// 2·exp(-2·eps²·n/(b-a)²) for means of `[a,b]`-bounded i.i.d. variables.
    HoeffdingTail { a: f64, b: f64, eps: f64, n: u64 },
    /// c·n²·exp(-cutoff/(c·n²)) majorizing Σ_{k>cutoff} exp(-k/(c·n²)).
    GeometricTailMajorant { n: u64, cutoff: u64, c: f64 },
    /// Head term plus incomplete-gamma integral tail for the double sum
    /// Σ_{n>=g} Σ_{k>=⌈n^(2+eps)⌉} exp(-k/(c·n²)).
    DoubleTail { g: u64, eps: String, c: f64, head: f64, gamma_tail: f64 },
    /// A certificate scaled by a constant factor.
    Scaled { factor: f64, inner: Box<Derivation> },
    /// r^exponent for a rational r in (0,1) (checked exactly).
    GeometricPower { r: String, exponent: u64 },
    /// Sum over a finite window of accuracies of Hoeffding geometric tails.
    WindowHoeffdingSum { n_lo: u64, n_hi: u64, exponent: String, terms: Vec<f64> },
}

/// An upper bound plus the derivation that justifies it.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    /// The quantity being bounded, symbolically identified.
    pub quantity: String,
    /// The bound, rounded outward.
    pub value: f64,
    pub derivation: Derivation,
}

impl BoundCertificate {
    /// JSON of the shape `{quantity, value, derivation, params}` where
    /// `derivation` is the rule name and `params` holds its parameters.
    pub fn to_json(&self) -> serde_json::Value {
        let mut d = serde_json::to_value(&self.derivation).expect("derivation serializes");
        let rule = d
            .as_object_mut()
            .and_then(|m| m.remove("rule"))
            .unwrap_or_else(|| serde_json::Value::String("unknown".into()));
        serde_json::json!({
            "quantity": self.quantity,
            "value": self.value,
            "derivation": rule,
            "params": d,
        })
    }
}

fn check_unit_open(name: &str, q: &BigRational) -> Result<(), BoundsError> {
    if q <= &BigRational::zero() || q >= &BigRational::one() {
        return Err(BoundsError::InvalidParam(format!("{name} must lie strictly in (0,1), got {q}")));
    }
    Ok(())
}

/// Chernoff bound `2·exp(-eps²·n/2)` on the measure of the length-`n`
/// deviation set `{|N_1(σ)/n - q| > eps}`, valid for `0 < eps <= min{q, 1-q}`.
pub fn chernoff_tail(
    q: &BigRational,
    eps: &BigRational,
    n: u64,
) -> Result<BoundCertificate, BoundsError> {
    check_unit_open("q", q)?;
    let min_side = q.min(&(BigRational::one() - q)).clone();
    if eps <= &BigRational::zero() || eps > &min_side {
        return Err(BoundsError::Precondition(format!(
            "need 0 < eps <= min{{q, 1-q}} = {min_side}, got eps = {eps}"
        )));
    }
    let e = rat_to_f64(eps);
    let value = round_up(2.0 * (-e * e * n as f64 / 2.0).exp());
    Ok(BoundCertificate {
        quantity: format!(
            "measure of {{sigma in {{0,1}}^{n} : |N_1(sigma)/{n} - {q}| > {eps}}}"
        ),
        value,
        derivation: Derivation::ChernoffTail { q: q.to_string(), eps: eps.to_string(), n },
    })
}

/// Hoeffding bound `2·exp(-2·eps²·n/(b-a)²)` on
/// `P(|S_n/n - mean| >= eps)` for i.i.d. variables bounded in `[a, b]`.
pub fn hoeffding_tail(a: f64, b: f64, eps: f64, n: u64) -> Result<BoundCertificate, BoundsError> {
    if !(a < b) {
        return Err(BoundsError::Precondition(format!("need a < b, got a={a}, b={b}")));
    }
    if !(eps > 0.0) {
        return Err(BoundsError::Precondition(format!("need eps > 0, got {eps}")));
    }
    let value = round_up(2.0 * (-2.0 * eps * eps * n as f64 / ((b - a) * (b - a))).exp());
    Ok(BoundCertificate {
        quantity: format!("P(|S_{n}/{n} - mean| >= {eps}) for [{a},{b}]-bounded i.i.d. terms"),
        value,
        derivation: Derivation::HoeffdingTail { a, b, eps, n },
    })
}

/// The geometric tail `Σ_{k=cutoff+1}^∞ exp(-k/(c·n²))`.
#[derive(Debug, Clone, Copy)]
pub struct GeometricTail {
    /// Closed form `exp(-(cutoff+1)/(c·n²)) / (1 - exp(-1/(c·n²)))`.
    pub exact: f64,
    /// Majorant `c·n²·exp(-cutoff/(c·n²))` (mean value theorem bound);
    /// always >= `exact`.
    pub majorant: f64,
}

/// Closed form and majorant for `Σ_{k=cutoff+1}^∞ exp(-k/(c·n²))`.
pub fn geometric_tail(n: u64, cutoff: u64, c: f64) -> Result<GeometricTail, BoundsError> {
    if n < 1 || cutoff < 1 {
        return Err(BoundsError::InvalidParam(format!("need n >= 1 and cutoff >= 1, got n={n}, cutoff={cutoff}")));
    }
    if !(c > 0.0) {
        return Err(BoundsError::InvalidParam(format!("need c > 0, got {c}")));
    }
    let cn2 = c * (n as f64) * (n as f64);
    let x = 1.0 / cn2;
    // 1 - exp(-x) computed without cancellation.
    let one_minus = -(-x).exp_m1();
    let exact = (-(cutoff as f64 + 1.0) * x).exp() / one_minus;
    let majorant = round_up(cn2 * (-(cutoff as f64) * x).exp());
    debug_assert!(exact <= majorant);
    Ok(GeometricTail { exact, majorant })
}


/// Certified upper bound on
/// `Σ_{n=g}^∞ Σ_{k=⌈n^(2+eps)⌉}^∞ exp(-k/(c·n²))`.
///
/// The inner sums are geometric tails majorized by
/// `c·e^(1/c)·n²·exp(-n^eps/c)`; the head term `n = g` is kept explicit and
/// the tail over `n > g` is bounded by the incomplete-gamma integral
/// `(c^(3/eps)/eps)·Γ(3/eps, g^eps/c)`, which needs the summand decreasing,
/// i.e. `g^eps >= 2c/eps`.
pub fn double_tail_bound(
    g: u64,
    eps: &BigRational,
    c: f64,
) -> Result<BoundCertificate, BoundsError> {
    if g < 1 {
        return Err(BoundsError::InvalidParam("g must be >= 1".into()));
    }
    if eps <= &BigRational::zero() {
        return Err(BoundsError::InvalidParam(format!("eps must be positive, got {eps}")));
    }
    if !(c > 0.0) {
        return Err(BoundsError::InvalidParam(format!("c must be positive, got {c}")));
    }
    let eps_f = rat_to_f64(eps);
    // Lower bound on g^eps keeps every exp(-g^eps/c) an upper bound.
    let g_pow_eps = ((g as f64).ln() * eps_f).exp() * (1.0 - 1e-12);
    if g_pow_eps < 2.0 * c / eps_f {
        return Err(BoundsError::Precondition(format!(
            "monotonicity threshold g^eps >= 2c/eps violated: g={g}, eps={eps}, c={c}"
        )));
    }
    let front = c * (1.0 / c).exp();
    let head = round_up(front * (g as f64) * (g as f64) * (-g_pow_eps / c).exp());
    let gamma = upper_incomplete_gamma(3.0 / eps_f, g_pow_eps / c, 1e250)
        .map_err(BoundsError::from)?;
    let gamma_tail = round_up(front * c.powf(3.0 / eps_f) / eps_f * round_up(gamma));
    let value = round_up(head + gamma_tail);
    Ok(BoundCertificate {
        quantity: format!(
            "sum over n >= {g}, k >= ceil(n^(2+{eps})) of exp(-k/({c}*n^2))"
        ),
        value,
        derivation: Derivation::DoubleTail {
            g,
            eps: eps.to_string(),
            c,
            head,
            gamma_tail,
        },
    })
}

/// Smallest `g >= floor` (and above the monotonicity threshold) whose
/// [`double_tail_bound`] certificate is below `target`.
pub fn smallest_g_below(
    target: f64,
    eps: &BigRational,
    c: f64,
    floor: u64,
) -> Result<(u64, BoundCertificate), BoundsError> {
    const CAP: u64 = 100_000;
    if !(target > 0.0) {
        return Err(BoundsError::InvalidParam("target must be positive".into()));
    }
    let eps_f = rat_to_f64(eps);
    let thresh = ((2.0 * c / eps_f).ln() / eps_f).exp().ceil().max(1.0) as u64;
    let mut g = floor.max(thresh).max(1);
    // Certificates decrease in g, so the first hit is the minimum.
    while g <= CAP {
        match double_tail_bound(g, eps, c) {
            Ok(cert) if cert.value < target => return Ok((g, cert)),
            Ok(_) => g += 1,
            Err(BoundsError::Precondition(_)) => g += 1,
            Err(e) => return Err(e),
        }
    }
    Err(BoundsError::SearchCap { cap: CAP, what: format!("g with double tail below {target:e}") })
}

/// The paper-facing search: smallest `g >= floor` whose certified double sum
/// (with schedule `⌈n^(2+eps)⌉`) is below `2^-(m+1)`.
pub fn find_g(
    m: u32,
    eps: &BigRational,
    c: f64,
    floor: u64,
) -> Result<(u64, BoundCertificate), BoundsError> {
    if m < 1 {
        return Err(BoundsError::InvalidParam("m must be >= 1".into()));
    }
    smallest_g_below(2f64.powi(-(m as i32) - 1), eps, c, floor)
}

/// Output of [`clt_r`]: a rational strictly between the limiting band
/// integral and 1, plus the integral itself.
#[derive(Debug, Clone)]
pub struct CltR {
    pub r: BigRational,
    pub band_integral: f64,
    pub band_halfwidth: f64,
}

fn rational_above(x: f64) -> BigRational {
    // Round up to the coarsest power-of-ten grid that keeps the result < 1,
    // starting at 10^6.
    let mut denom: u64 = 1_000_000;
    loop {
        let num = (x * denom as f64).ceil() as u64;
        if num < denom {
            return BigRational::new(BigInt::from(num), BigInt::from(denom));
        }
        denom = denom.checked_mul(1000).expect("grid denominator overflow");
    }
}

fn clt_r_from_halfwidth(l: f64) -> Result<CltR, BoundsError> {
    let integral = normal_band(l, 1e-9)?;
    let r = if integral < 0.999_999 {
        // Midpoint between the integral and 1: comfortably above the
        // integral (so exact segment probabilities drop below it at small
        // lengths) yet strictly below 1.
        let mid = (1.0 + round_up(integral)) / 2.0;
        let r = rational_above(mid);
        debug_assert!(rat_to_f64(&r) > integral);
        r
    } else {
        // The tail is too small for the f64 grid. Lower-bound the two-sided
        // tail 1 - integral by the Mills ratio, 2·phi(l)·l/(l²+1), in log2
        // to survive underflow, and take r = 1 - 2^-e safely inside it.
        let log2_tail = (-l * l / 2.0 - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (2.0 * l / (l * l + 1.0)).ln())
            / std::f64::consts::LN_2;
        let e = (-log2_tail).ceil() as u64 + 2;
        BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << e)
    };
    debug_assert!(r < BigRational::one());
    Ok(CltR { r, band_integral: integral, band_halfwidth: l })
}

/// A rational `r` in (band integral, 1) for the symbol-frequency checkpoint
/// argument: the band half-width is `sqrt(3/(p(1-p)))`.
pub fn clt_r(p: &BigRational) -> Result<CltR, BoundsError> {
    check_unit_open("p", p)?;
    let pq = rat_to_f64(&(p * (BigRational::one() - p)));
    clt_r_from_halfwidth((3.0 / pq).sqrt())
}

/// The general-variance variant: band half-width `2*sqrt(3/v)`.
pub fn clt_r_general(v: f64) -> Result<CltR, BoundsError> {
    if !(v > 0.0) {
        return Err(BoundsError::InvalidParam(format!("variance must be positive, got {v}")));
    }
    clt_r_from_halfwidth(2.0 * (3.0 / v).sqrt())
}

/// Certificate `r^exponent` for a rational `r` in (0,1); the comparison with
/// any dyadic target can be done exactly by the caller.
pub fn geometric_power_certificate(
    r: &BigRational,
    exponent: u64,
    quantity: String,
) -> Result<BoundCertificate, BoundsError> {
    check_unit_open("r", r)?;
    let pow = bigrat_pow(r, exponent);
    Ok(BoundCertificate {
        quantity,
        value: round_up(rat_to_f64(&pow)),
        derivation: Derivation::GeometricPower { r: r.to_string(), exponent },
    })
}

/// Exact check `r^exponent < 2^-m` in rational arithmetic.
pub fn power_below_dyadic(r: &BigRational, exponent: u64, m: u32) -> bool {
    let pow = bigrat_pow(r, exponent);
    let target = BigRational::new(BigInt::one(), BigInt::one() << m);
    pow < target
}

/// Smallest exponent `e` with `r^e < 2^-m`, verified exactly.
pub fn exponent_for_dyadic_target(r: &BigRational, m: u32) -> Result<u64, BoundsError> {
    check_unit_open("r", r)?;
    let rf = rat_to_f64(r);
    let mut e = ((-(m as f64) * std::f64::consts::LN_2) / rf.ln()).floor().max(0.0) as u64;
    // Float guess, exact verification: walk to the true boundary.
    while power_below_dyadic(r, e, m) && e > 0 {
        e -= 1;
    }
    while !power_below_dyadic(r, e, m) {
        e += 1;
        if e > 1 << 40 {
            return Err(BoundsError::SearchCap { cap: 1 << 40, what: format!("exponent with r^e < 2^-{m}") });
        }
    }
    Ok(e)
}

pub use crate::numeric::ceil_pow_rational as ceil_power;

/// `⌈n^(2+eps)⌉` for rational `eps = a/b > 0`, computed exactly.
pub fn f_threshold(n: u64, eps: &BigRational) -> u64 {
    assert!(eps.is_positive(), "eps must be positive");
    let a = eps.numer().to_u64().expect("eps numerator fits u64");
    let b = eps.denom().to_u64().expect("eps denominator fits u64");
    ceil_pow_rational(n, 2 * b + a, b)
}

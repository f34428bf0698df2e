//! Finite-depth realization of the frequency-deviation and checkpoint test
//! families.
//!
//! The families are infinite unions in the construction; here every
//! truncation carries a certificate for the discarded part, so nothing is
//! silently dropped:
//!
//! - exact measures of single deviation sets (binomial band sums),
//! - the truncated frequency family with a certified two-sided enclosure,
//! - exact joint checkpoint probabilities by dynamic programming over
//!   band-restricted counts at lengths `4^k`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{
    exponent_for_dyadic_target, f_threshold, find_g, power_below_dyadic, smallest_g_below,
    BoundCertificate, BoundsError, Derivation,
};
use crate::compreal::{CompReal, CompRealError};
use crate::numeric::{bigint_pow, rat_to_f64, round_up};
use crate::prob::{
    rv_mean, FiniteProbabilitySpace, ProbError, RealRandomVariable, SequencePrefix, Symbol,
};
use crate::special::SpecialError;

#[derive(Debug, Error)]
pub enum TestSetError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("configured cap exceeded: {0}")]
    CapExceeded(String),
    #[error("certified enclosure failed its target: {0}")]
    Enclosure(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Precision(#[from] CompRealError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// One deviation set: length-`k` binary words whose relative frequency of
/// symbol 1 differs from `q` by more than `2/n` (strictly, by default).
#[derive(Debug, Clone)]
pub struct DeviationSpec {
    pub k: u64,
    pub n: u64,
    pub q: BigRational,
    pub strict: bool,
}

impl DeviationSpec {
    pub fn new(k: u64, n: u64, q: BigRational) -> Result<Self, TestSetError> {
        if k < 1 || n < 1 {
            return Err(TestSetError::InvalidSpec(format!("need k >= 1 and n >= 1, got k={k}, n={n}")));
        }
        if q.is_negative() || q > BigRational::one() {
            return Err(TestSetError::InvalidSpec(format!("need 0 <= q <= 1, got {q}")));
        }
        Ok(DeviationSpec { k, n, q, strict: true })
    }
}

/// Whether count `j` out of `len` deviates from `q` by more than
/// `threshold` (`>` when strict, `>=` otherwise). Exact integer arithmetic.
fn count_deviates(j: u64, len: u64, q: &BigRational, threshold: &BigRational, strict: bool) -> bool {
    // |j/len - qn/qd| vs tn/td  <=>  |j*qd - len*qn| * td vs tn * len * qd
    let qn = q.numer();
    let qd = q.denom();
    let lhs = (BigInt::from(j) * qd - BigInt::from(len) * qn).magnitude()
        * threshold.denom().magnitude();
    let rhs = threshold.numer().magnitude() * BigUint::from(len) * qd.magnitude();
    if strict {
        lhs > rhs
    } else {
        lhs >= rhs
    }
}

/// Exact binomial probability of the band `lo <= j <= hi` for `Bin(len, p)`.
fn binomial_band_sum(len: u64, p: &BigRational, lo: u64, hi: u64) -> BigRational {
    if lo > hi {
        return BigRational::zero();
    }
    let pn = p.numer().clone();
    let qn = p.denom() - p.numer();
    // C(len, lo) by the multiplicative recurrence.
    let mut c = BigInt::one();
    for i in 0..lo {
        c = c * BigInt::from(len - i) / BigInt::from(i + 1);
    }
    let mut pow_p = bigint_pow(&pn, lo);
    let mut pow_q = bigint_pow(&qn, len - lo);
    let mut sum = BigInt::zero();
    let mut j = lo;
    loop {
        sum += &c * &pow_p * &pow_q;
        if j == hi {
            break;
        }
        c = c * BigInt::from(len - j) / BigInt::from(j + 1);
        pow_p *= &pn;
        // exact: pow_q holds qn^(len-j), divide one factor out
        pow_q /= &qn;
        j += 1;
    }
    BigRational::new(sum, bigint_pow(p.denom(), len))
}

/// Exact measure of the deviation set:
/// `Σ_{j : |j/k - q| > 2/n} C(k,j) q^j (1-q)^(k-j)`.
pub fn deviation_set_measure(spec: &DeviationSpec) -> Result<BigRational, TestSetError> {
    let threshold = BigRational::new(BigInt::from(2), BigInt::from(spec.n));
    // Degenerate targets put all mass on a single count.
    if spec.q.is_zero() || spec.q.is_one() {
        let j = if spec.q.is_zero() { 0 } else { spec.k };
        return Ok(if count_deviates(j, spec.k, &spec.q, &threshold, spec.strict) {
            BigRational::one()
        } else {
            BigRational::zero()
        });
    }
    let qn = spec.q.numer().clone();
    let qq = spec.q.denom() - spec.q.numer();
    let mut sum = BigInt::zero();
    let mut c = BigInt::one(); // C(k, 0)
    let mut pow_p = BigInt::one();
    let mut pow_q = bigint_pow(&qq, spec.k);
    for j in 0..=spec.k {
        if count_deviates(j, spec.k, &spec.q, &threshold, spec.strict) {
            sum += &c * &pow_p * &pow_q;
        }
        if j < spec.k {
            c = c * BigInt::from(spec.k - j) / BigInt::from(j + 1);
            pow_p *= &qn;
            pow_q /= &qq;
        }
    }
    Ok(BigRational::new(sum, bigint_pow(spec.q.denom(), spec.k)))
}

/// Interval-mode deviation measure: membership is decided by refining the
/// computable target (an unresolvable boundary errors out), then the
/// qualifying binomial terms are evaluated over the refined enclosure of
/// `q`. The returned interval contains the true measure.
pub fn deviation_set_measure_interval(
    k: u64,
    n: u64,
    q: &CompReal,
    budget_bits: u32,
) -> Result<crate::numeric::RatInterval, TestSetError> {
    use crate::numeric::RatInterval;
    let members = deviation_set_counts_interval(k, n, q, budget_bits)?;
    let iv = q.interval(budget_bits.min(96));
    let q_lo = iv.lo.max(BigRational::zero());
    let q_hi = iv.hi.min(BigRational::one());
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    let mut c = BigInt::one();
    let mut prev = 0u64;
    for &j in &members {
        for i in prev..j {
            c = &c * BigInt::from(k - i) / BigInt::from(i + 1);
        }
        prev = j;
        let cr = BigRational::from_integer(c.clone());
        lo += &cr
            * crate::numeric::bigrat_pow(&q_lo, j)
            * crate::numeric::bigrat_pow(&(BigRational::one() - &q_hi), k - j);
        hi += &cr
            * crate::numeric::bigrat_pow(&q_hi, j)
            * crate::numeric::bigrat_pow(&(BigRational::one() - &q_lo), k - j);
    }
    if hi > BigRational::one() {
        hi = BigRational::one();
    }
    Ok(RatInterval::new(lo, hi))
}

/// The qualifying counts of a deviation set when the target frequency is a
/// computable real: each boundary comparison is resolved by refinement, and
/// an unresolvable boundary (the count sits exactly on `q ± 2/n`) is an
/// error at the precision budget.
pub fn deviation_set_counts_interval(
    k: u64,
    n: u64,
    q: &CompReal,
    budget_bits: u32,
) -> Result<Vec<u64>, TestSetError> {
    let two_over_n = BigRational::new(BigInt::from(2), BigInt::from(n));
    let mut out = Vec::new();
    for j in 0..=k {
        let freq = BigRational::new(BigInt::from(j), BigInt::from(k));
        let lo = &freq - &two_over_n;
        let hi = &freq + &two_over_n;
        // j deviates iff q < freq - 2/n or q > freq + 2/n.
        let against_hi = q.compare_rational(&hi, budget_bits, "upper deviation boundary")?;
        if against_hi == std::cmp::Ordering::Less {
            let against_lo = q.compare_rational(&lo, budget_bits, "lower deviation boundary")?;
            if against_lo == std::cmp::Ordering::Greater {
                continue; // inside the band
            }
        }
        out.push(j);
    }
    Ok(out)
}

/// One removal step of a union of deviation cylinders: at word length
/// `len`, remove counts deviating from `q` by more than `threshold`.
#[derive(Debug, Clone)]
pub struct UnionStep {
    pub len: u64,
    pub threshold: BigRational,
    pub strict: bool,
}

/// Exact measure of `⟦ ∪_steps D_step ⟧` for deviation sets of different
/// lengths, by a survival dynamic program: evolve the count distribution of
/// surviving strings length by length, removing (and tallying) the mass
/// that enters each deviation set. Equivalent to prefix-free reduction of
/// the padded union, without materializing it.
pub fn binary_union_measure(q: &BigRational, steps: &[UnionStep]) -> Result<BigRational, TestSetError> {
    if steps.is_empty() {
        return Ok(BigRational::zero());
    }
    let mut sorted: Vec<&UnionStep> = steps.iter().collect();
    sorted.sort_by_key(|s| s.len);
    for w in sorted.windows(2) {
        if w[0].len == w[1].len {
            return Err(TestSetError::InvalidSpec("duplicate union step length".into()));
        }
    }
    if sorted[0].len < 1 {
        return Err(TestSetError::InvalidSpec("step length must be >= 1".into()));
    }
    let max_len = sorted.last().unwrap().len;
    let qn = q.numer().clone();
    let qq = q.denom() - q.numer();
    // counts[j] = number of surviving strings of the current length with j ones
    let mut counts: Vec<BigUint> = vec![BigUint::one()];
    let mut removed = BigInt::zero(); // numerator over qd^max_len
    let mut next_step = 0usize;
    for len in 1..=max_len {
        // Pascal update.
        let mut new_counts = vec![BigUint::zero(); counts.len() + 1];
        for (j, c) in counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            new_counts[j] += c;
            new_counts[j + 1] += c;
        }
        counts = new_counts;
        if next_step < sorted.len() && sorted[next_step].len == len {
            let step = sorted[next_step];
            next_step += 1;
            let scale = bigint_pow(q.denom(), max_len - len);
            for (j, c) in counts.iter_mut().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if count_deviates(j as u64, len, q, &step.threshold, step.strict) {
                    let mass = BigInt::from(c.clone())
                        * bigint_pow(&qn, j as u64)
                        * bigint_pow(&qq, len - j as u64);
                    removed += mass * &scale;
                    *c = BigUint::zero();
                }
            }
        }
    }
    Ok(BigRational::new(removed, bigint_pow(q.denom(), max_len)))
}

/// Certified enclosure of the measure of the truncated frequency test
/// family at index `m` (schedule `k >= ⌈n^(2+eps)⌉`, thresholds `2/n`,
/// accuracies from `g(m)`).
#[derive(Debug, Clone)]
pub struct LlnTestMeasure {
    pub m: u32,
    pub l: u32,
    /// Start accuracy `g(m)` (at least the Chernoff validity floor).
    pub g: u64,
    /// Split accuracy: the `n`-tail beyond this is certified away.
    pub g_split: u64,
    /// Truncation length: the `k`-tail beyond this is certified away.
    pub k_cut: u64,
    /// Exact measure of the truncated part (a lower bound for the family).
    pub lower: BigRational,
    /// Certified upper end of the enclosure.
    pub upper: f64,
    /// Certificate for the upper end (min of truncated+tails and the
    /// whole-family Chernoff chain).
    pub upper_cert: BoundCertificate,
    /// Certificate for the discarded accuracies `n > g_split`.
    pub tail_n_cert: BoundCertificate,
    /// Certificate for the discarded lengths `k > k_cut`.
    pub tail_k_cert: BoundCertificate,
}

impl LlnTestMeasure {
    pub fn width(&self) -> f64 {
        self.upper - rat_to_f64(&self.lower)
    }
}

/// Smallest accuracy with `2/n <= min{q, 1-q}` (the Chernoff validity floor).
pub fn chernoff_floor(q: &BigRational) -> Result<u64, TestSetError> {
    if q <= &BigRational::zero() || q >= &BigRational::one() {
        return Err(TestSetError::InvalidSpec(format!("need 0 < q < 1, got {q}")));
    }
    let min_side = q.min(&(BigRational::one() - q)).clone();
    // ceil(2 / min_side)
    let num = BigInt::from(2) * min_side.denom();
    let den = min_side.numer();
    let n0 = num.div_ceil(den);
    Ok(n0.to_u64().expect("floor fits u64"))
}

/// Cap on the truncation length of the exact part of the family measure;
/// beyond it the survival DP would need more than desk-scale time.
pub const LLN_MEASURE_LENGTH_CAP: u64 = 16_384;

/// Evaluates the truncated frequency family: exact measure of the union
/// over `n in [g(m), g_split]`, `k in [⌈n^(2+eps)⌉, k_cut]` of the
/// deviation sets with threshold `2/n`, plus certificates for both tails.
/// The enclosure has width below `2^-(l+1)` and its upper end stays below
/// `2^-m`.
///
/// Small `eps` pushes the certified start accuracy `g(m)` and with it the
/// truncation length far beyond reach (the schedule starts at
/// `⌈g^(2+eps)⌉`); lengths above [`LLN_MEASURE_LENGTH_CAP`] are rejected
/// rather than ground through.
pub fn lln_test_measure(
    m: u32,
    eps: &BigRational,
    q: &BigRational,
    l: u32,
) -> Result<LlnTestMeasure, TestSetError> {
    if m < 1 || l < 1 {
        return Err(TestSetError::InvalidSpec("need m >= 1 and l >= 1".into()));
    }
    let n0 = chernoff_floor(q)?;
    let (g, family_inner) = find_g(m, eps, 1.0, n0)?;
    let (g_split, split_inner) = smallest_g_below(2f64.powi(-(l as i32) - 3), eps, 1.0, g)?;
    let tail_n_value = round_up(2.0 * split_inner.value);
    let tail_n_cert = BoundCertificate {
        quantity: format!("family mass at accuracies n > {g_split}"),
        value: tail_n_value,
        derivation: Derivation::Scaled { factor: 2.0, inner: Box::new(split_inner.derivation) },
    };

    // Smallest k_cut with g_split^3 * exp(-k_cut/g_split^2) < 2^-(l+3);
    // the discarded k-tail then weighs below 2 * that < 2^-(l+2).
    let gs = g_split as f64;
    let target = 2f64.powi(-(l as i32) - 3);
    let mut k_cut = (gs * gs * (3.0 * gs.ln() + (l as f64 + 3.0) * std::f64::consts::LN_2))
        .ceil()
        .max(1.0) as u64;
    while round_up(gs * gs * gs * (-(k_cut as f64) / (gs * gs)).exp()) >= target {
        k_cut += 1;
    }
    if k_cut > LLN_MEASURE_LENGTH_CAP {
        return Err(TestSetError::CapExceeded(format!(
            "truncation length {k_cut} beyond the exact-measure cap {LLN_MEASURE_LENGTH_CAP} \
             (eps = {eps} forces start accuracy g = {g})"
        )));
    }
    let tail_k_value = round_up(2.0 * gs * gs * gs * (-(k_cut as f64) / (gs * gs)).exp());
    let tail_k_cert = BoundCertificate {
        quantity: format!("family mass at lengths k > {k_cut} for accuracies {g}..={g_split}"),
        value: tail_k_value,
        derivation: Derivation::GeometricTailMajorant { n: g_split, cutoff: k_cut, c: 1.0 },
    };

    // Exact truncated union: at each length the binding accuracy is the
    // largest n with ⌈n^(2+eps)⌉ <= len (its threshold 2/n is smallest and
    // its deviation set contains the others).
    let mut steps = Vec::new();
    let first_len = f_threshold(g, eps);
    let mut binding = g;
    for len in first_len..=k_cut {
        while binding < g_split && f_threshold(binding + 1, eps) <= len {
            binding += 1;
        }
        steps.push(UnionStep {
            len,
            threshold: BigRational::new(BigInt::from(2), BigInt::from(binding)),
            strict: true,
        });
    }
    let lower = binary_union_measure(q, &steps)?;

    let family_bound = round_up(2.0 * family_inner.value);
    let truncated_plus_tails = round_up(rat_to_f64(&lower) + tail_n_value + tail_k_value);
    let upper = truncated_plus_tails.min(family_bound);
    let target_m = 2f64.powi(-(m as i32));
    if upper >= target_m {
        return Err(TestSetError::Enclosure(format!(
            "upper end {upper} does not meet the 2^-{m} target"
        )));
    }
    let upper_cert = BoundCertificate {
        quantity: format!(
            "measure of the frequency test family: n >= {g}, k >= ceil(n^(2+{eps})), |N_1/k - {q}| > 2/n"
        ),
        value: upper,
        derivation: Derivation::Scaled {
            factor: 2.0,
            inner: Box::new(family_inner.derivation),
        },
    };
    Ok(LlnTestMeasure {
        m,
        l,
        g,
        g_split,
        k_cut,
        lower,
        upper,
        upper_cert,
        tail_n_cert,
        tail_k_cert,
    })
}

/// An indexed test-family level with a certified measure bound below `2^-m`.
#[derive(Debug, Clone)]
pub struct TestFamily {
    pub m: u32,
    pub description: String,
    pub measure_certificate: BoundCertificate,
}

/// The frequency test family at level `m`: certificate from the Chernoff
/// and double-tail chain, checked against `2^-m`.
pub fn lln_test_family(
    m: u32,
    eps: &BigRational,
    q: &BigRational,
) -> Result<TestFamily, TestSetError> {
    let n0 = chernoff_floor(q)?;
    let (g, inner) = find_g(m, eps, 1.0, n0)?;
    let value = round_up(2.0 * inner.value);
    if value >= 2f64.powi(-(m as i32)) {
        return Err(TestSetError::Enclosure(format!(
            "family certificate {value} not below 2^-{m}"
        )));
    }
    Ok(TestFamily {
        m,
        description: format!(
            "binary words of length k >= ceil(n^(2+{eps})) with |N_1/k - {q}| > 2/n, n >= {g}"
        ),
        measure_certificate: BoundCertificate {
            quantity: format!("measure of the level-{m} frequency test set"),
            value,
            derivation: Derivation::Scaled { factor: 2.0, inner: Box::new(inner.derivation) },
        },
    })
}

/// The checkpoint test family at level `m`: all strings of length
/// `4^f(m)` passing every checkpoint in `[n1, f(m)]`, with measure bound
/// `r^(f(m)-n1) < 2^-m` verified in exact rational arithmetic.
pub fn checkpoint_test_family(
    m: u32,
    p: &BigRational,
    n1: u32,
    r: &BigRational,
) -> Result<TestFamily, TestSetError> {
    let e = exponent_for_dyadic_target(r, m)?;
    let f_m = n1 as u64 + e;
    if !power_below_dyadic(r, e, m) {
        return Err(TestSetError::Enclosure("power target not met".into()));
    }
    Ok(TestFamily {
        m,
        description: format!(
            "strings of length 4^{f_m} with |N_a(prefix 4^k) - 4^k*{p}| <= 2^k for all k in [{n1}, {f_m}]"
        ),
        measure_certificate: BoundCertificate {
            quantity: format!("measure of the level-{m} checkpoint test set"),
            value: round_up(rat_to_f64(&crate::numeric::bigrat_pow(r, e))),
            derivation: Derivation::GeometricPower { r: r.to_string(), exponent: e },
        },
    })
}

/// Checkpoint scheme: at lengths `4^k` the statistic must stay within
/// `2^(k + band_exponent_offset)` of its mean, compared with `<=` or `<`.
#[derive(Debug, Clone)]
pub struct CheckpointSpec {
    pub symbol: Symbol,
    pub p: BigRational,
    pub n_lo: u32,
    pub n_hi: u32,
    /// 0 for the band `2^k`, 1 for the widened band `2^(k+1)`.
    pub band_exponent_offset: u32,
    /// Strict comparison (`<`) instead of `<=`.
    pub strict: bool,
}

impl CheckpointSpec {
    /// Symbol-frequency checkpoints: band `2^k`, inclusive comparison.
    pub fn symbol_frequency(
        symbol: Symbol,
        p: BigRational,
        n_lo: u32,
        n_hi: u32,
    ) -> Result<Self, TestSetError> {
        let spec = CheckpointSpec { symbol, p, n_lo, n_hi, band_exponent_offset: 0, strict: false };
        spec.validate()?;
        Ok(spec)
    }

    /// Random-variable checkpoints: widened band `2^(k+1)`, strict.
    pub fn rv_widened(
        symbol: Symbol,
        p: BigRational,
        n_lo: u32,
        n_hi: u32,
    ) -> Result<Self, TestSetError> {
        let spec = CheckpointSpec { symbol, p, n_lo, n_hi, band_exponent_offset: 1, strict: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), TestSetError> {
        if self.n_lo < 1 || self.n_lo > self.n_hi {
            return Err(TestSetError::InvalidSpec(format!(
                "need 1 <= n_lo <= n_hi, got [{}, {}]",
                self.n_lo, self.n_hi
            )));
        }
        if self.p <= BigRational::zero() || self.p >= BigRational::one() {
            return Err(TestSetError::InvalidSpec(format!("need 0 < p < 1, got {}", self.p)));
        }
        if self.band_exponent_offset > 1 {
            return Err(TestSetError::InvalidSpec("band exponent offset must be 0 or 1".into()));
        }
        Ok(())
    }
}

/// Default cap on checkpoint depth for the exact DP (`4^7` symbols).
pub const DEFAULT_CHECKPOINT_CAP: u32 = 7;

/// Counts `c` in `[0, len]` with `|c - len·p|` inside the band of the given
/// radius, or `None` when the band is empty.
fn band_counts(len: u64, p: &BigRational, radius: &BigInt, strict: bool) -> Option<(u64, u64)> {
    // |c*pd - len*pn| <= radius*pd  (or <)
    let pn = p.numer();
    let pd = p.denom();
    let center = BigInt::from(len) * pn;
    let slack = radius * pd;
    let lo_num = &center - &slack;
    let hi_num = &center + &slack;
    let (lo, hi) = if strict {
        // smallest c with c*pd > lo_num; largest c with c*pd < hi_num
        (lo_num.div_floor(pd) + 1, hi_num.div_ceil(pd) - 1)
    } else {
        (lo_num.div_ceil(pd), hi_num.div_floor(pd))
    };
    let lo = lo.max(BigInt::zero());
    let hi = hi.min(BigInt::from(len));
    if lo > hi {
        None
    } else {
        Some((lo.to_u64().unwrap(), hi.to_u64().unwrap()))
    }
}

/// Exact probability that `Bin(3·4^n, p)` stays within `3·2^n` of its mean
/// (the segment between consecutive checkpoints). Above the cap the normal
/// approximation is used and a Berry-Esseen-style error is reported.
#[derive(Debug, Clone)]
pub struct SegmentProbability {
    pub value: f64,
    pub exact: Option<BigRational>,
    /// Absolute error bound on `value` (0 for the exact route).
    pub err: f64,
}

pub fn segment_band_probability(
    p: &BigRational,
    n: u32,
    cap: u32,
) -> Result<SegmentProbability, TestSetError> {
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(TestSetError::InvalidSpec(format!("need 0 < p < 1, got {p}")));
    }
    let len = 3u64 * 4u64.pow(n);
    if n <= cap {
        let radius = BigInt::from(3) * (BigInt::one() << n);
        let exact = match band_counts(len, p, &radius, false) {
            Some((lo, hi)) => binomial_band_sum(len, p, lo, hi),
            None => BigRational::zero(),
        };
        Ok(SegmentProbability { value: rat_to_f64(&exact), exact: Some(exact), err: 0.0 })
    } else {
        // Normal approximation with a Berry-Esseen margin.
        let pf = rat_to_f64(p);
        let qf = 1.0 - pf;
        let sigma = (len as f64 * pf * qf).sqrt();
        let z = (3.0 * 2f64.powi(n as i32) + 0.5) / sigma;
        let value = crate::special::normal_band(z, 1e-9)?;
        let rho_over_sigma3 = (pf * pf + qf * qf) / (pf * qf).sqrt();
        let err = 2.0 * 0.4748 * rho_over_sigma3 / (len as f64).sqrt() + 1e-9;
        Ok(SegmentProbability { value, exact: None, err })
    }
}

/// Exact joint probability that every checkpoint in the spec is satisfied,
/// by dynamic programming over band-restricted counts with exact binomial
/// transition kernels.
#[derive(Debug, Clone)]
pub struct JointProbability {
    pub exact: BigRational,
    pub value: f64,
    /// Number of DP states at the deepest checkpoint.
    pub states: usize,
}

pub fn checkpoint_joint_probability(
    spec: &CheckpointSpec,
    cap: u32,
) -> Result<JointProbability, TestSetError> {
    spec.validate()?;
    if spec.n_hi > cap {
        return Err(TestSetError::CapExceeded(format!(
            "checkpoint depth {} beyond exact-DP cap {cap} (length 4^{cap})",
            spec.n_hi
        )));
    }
    let p = &spec.p;
    let pn = p.numer().clone();
    let qn = p.denom() - p.numer();
    let radius_at = |k: u32| -> BigInt { BigInt::one() << (k + spec.band_exponent_offset) };

    // Initial distribution at length 4^n_lo restricted to the band.
    let len0 = 4u64.pow(spec.n_lo);
    let Some((lo0, hi0)) = band_counts(len0, p, &radius_at(spec.n_lo), spec.strict) else {
        return Ok(JointProbability { exact: BigRational::zero(), value: 0.0, states: 0 });
    };
    // weights[i] = P-numerator of count (lo + i), over denominator pd^(current length)
    let mut lo = lo0;
    let mut weights: Vec<BigInt> = {
        let mut w = Vec::with_capacity((hi0 - lo0 + 1) as usize);
        let mut c = BigInt::one();
        for i in 0..lo0 {
            c = c * BigInt::from(len0 - i) / BigInt::from(i + 1);
        }
        let mut pow_p = bigint_pow(&pn, lo0);
        let mut pow_q = bigint_pow(&qn, len0 - lo0);
        for j in lo0..=hi0 {
            w.push(&c * &pow_p * &pow_q);
            if j < hi0 {
                c = c * BigInt::from(len0 - j) / BigInt::from(j + 1);
                pow_p *= &pn;
                pow_q /= &qn;
            }
        }
        w
    };

    for k in spec.n_lo..spec.n_hi {
        let seg = 3u64 * 4u64.pow(k);
        let next_len = 4u64.pow(k + 1);
        let Some((nlo, nhi)) = band_counts(next_len, p, &radius_at(k + 1), spec.strict) else {
            return Ok(JointProbability { exact: BigRational::zero(), value: 0.0, states: 0 });
        };
        let hi = lo + weights.len() as u64 - 1;
        if nhi < lo {
            return Ok(JointProbability { exact: BigRational::zero(), value: 0.0, states: 0 });
        }
        // Kernel values C(seg, d) pn^d qn^(seg-d) for the needed increments.
        let dmin = nlo.saturating_sub(hi).min(seg);
        let dmax = (nhi - lo).min(seg);
        if dmin > dmax {
            return Ok(JointProbability { exact: BigRational::zero(), value: 0.0, states: 0 });
        }
        let mut kernel: Vec<BigInt> = Vec::with_capacity((dmax - dmin + 1) as usize);
        {
            let mut c = BigInt::one();
            for i in 0..dmin {
                c = c * BigInt::from(seg - i) / BigInt::from(i + 1);
            }
            let mut pow_p = bigint_pow(&pn, dmin);
            let mut pow_q = bigint_pow(&qn, seg - dmin);
            for d in dmin..=dmax {
                kernel.push(&c * &pow_p * &pow_q);
                if d < dmax {
                    c = c * BigInt::from(seg - d) / BigInt::from(d + 1);
                    pow_p *= &pn;
                    pow_q /= &qn;
                }
            }
        }
        let mut new_weights = vec![BigInt::zero(); (nhi - nlo + 1) as usize];
        for (i, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let c = lo + i as u64;
            for (t, nw) in new_weights.iter_mut().enumerate() {
                let target = nlo + t as u64;
                if target < c {
                    continue;
                }
                let d = target - c;
                if d < dmin || d > dmax {
                    continue;
                }
                *nw += w * &kernel[(d - dmin) as usize];
            }
        }
        weights = new_weights;
        lo = nlo;
    }

    let total: BigInt = weights.iter().sum();
    let exact = BigRational::new(total, bigint_pow(p.denom(), 4u64.pow(spec.n_hi)));
    let value = rat_to_f64(&exact);
    Ok(JointProbability { exact, value, states: weights.len() })
}

/// One checkpoint verdict in a report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckpointEntry {
    pub k: u32,
    pub length: u64,
    pub count_or_sum: String,
    pub band: String,
    /// `None` when the prefix is too short to determine this checkpoint.
    pub pass: Option<bool>,
}

/// Per-checkpoint pass/fail record for a concrete prefix.
#[derive(Debug, Clone, Serialize)]
pub struct CheckpointReport {
    pub entries: Vec<CheckpointEntry>,
    /// Deepest `k` such that every checkpoint up to `k` is determined and
    /// passes.
    pub deepest_full_pass: Option<u32>,
    /// True when every determined checkpoint passes.
    pub all_determined_pass: bool,
}

impl CheckpointReport {
    /// One JSON object per line, schema `{k, length, count_or_sum, band, pass}`.
    pub fn to_json_lines(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn from_entries(entries: Vec<CheckpointEntry>) -> Self {
        let mut deepest = None;
        for e in &entries {
            match e.pass {
                Some(true) => deepest = Some(e.k),
                _ => break,
            }
        }
        let all = entries.iter().all(|e| e.pass != Some(false));
        CheckpointReport { entries, deepest_full_pass: deepest, all_determined_pass: all }
    }
}

/// Evaluates symbol-count checkpoints on a prefix: at each length `4^k`
/// records the count, the band value, and the verdict; checkpoints beyond
/// the prefix are reported as undetermined.
pub fn checkpoint_membership(
    s: &SequencePrefix,
    spec: &CheckpointSpec,
) -> Result<CheckpointReport, TestSetError> {
    spec.validate()?;
    if (spec.symbol as usize) >= s.alphabet_size() {
        return Err(TestSetError::Prob(ProbError::SymbolOutOfRange {
            symbol: spec.symbol,
            alphabet: s.alphabet_size(),
        }));
    }
    let mut entries = Vec::new();
    let mut count = 0u64;
    let mut pos = 0u64;
    let word = s.word().symbols();
    for k in spec.n_lo..=spec.n_hi {
        let length = 4u64.pow(k);
        let radius = BigInt::one() << (k + spec.band_exponent_offset);
        let band = format!("{}2^{}", if spec.strict { "< " } else { "<= " }, k + spec.band_exponent_offset);
        if length > word.len() as u64 {
            entries.push(CheckpointEntry {
                k,
                length,
                count_or_sum: "undetermined".into(),
                band,
                pass: None,
            });
            continue;
        }
        while pos < length {
            if word[pos as usize] == spec.symbol {
                count += 1;
            }
            pos += 1;
        }
        // |count - 4^k p| vs 2^(k+off):  |count*pd - 4^k*pn| vs radius*pd
        let dev = (BigInt::from(count) * spec.p.denom() - BigInt::from(length) * spec.p.numer())
            .magnitude()
            .to_owned();
        let slack = (radius * spec.p.denom()).magnitude().to_owned();
        let pass = if spec.strict { dev < slack } else { dev <= slack };
        entries.push(CheckpointEntry {
            k,
            length,
            count_or_sum: count.to_string(),
            band,
            pass: Some(pass),
        });
    }
    Ok(CheckpointReport::from_entries(entries))
}

/// Random-variable analogue: partial sums of `X` against the widened
/// strict band `2^(k+1)`.
pub fn rv_checkpoint_membership(
    s: &SequencePrefix,
    p: &FiniteProbabilitySpace,
    x: &RealRandomVariable,
    n_lo: u32,
    n_hi: u32,
) -> Result<CheckpointReport, TestSetError> {
    if n_lo < 1 || n_lo > n_hi {
        return Err(TestSetError::InvalidSpec(format!("need 1 <= n_lo <= n_hi, got [{n_lo}, {n_hi}]")));
    }
    let mu = rv_mean(p, x)?;
    // Common denominator for partial sums.
    let denom = x
        .values()
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let scaled: Vec<BigInt> =
        x.values().iter().map(|v| v.numer() * (&denom / v.denom())).collect();
    let word = s.word().symbols();
    let mut entries = Vec::new();
    let mut sum = BigInt::zero();
    let mut pos = 0u64;
    for k in n_lo..=n_hi {
        let length = 4u64.pow(k);
        let band = format!("< 2^{}", k + 1);
        if length > word.len() as u64 {
            entries.push(CheckpointEntry {
                k,
                length,
                count_or_sum: "undetermined".into(),
                band,
                pass: None,
            });
            continue;
        }
        while pos < length {
            sum += &scaled[word[pos as usize] as usize];
            pos += 1;
        }
        // |sum/denom - 4^k mu| < 2^(k+1)
        // <=> |sum * mu_d - 4^k * mu_n * denom| < 2^(k+1) * denom * mu_d
        let dev = (&sum * mu.denom() - BigInt::from(length) * mu.numer() * &denom)
            .magnitude()
            .to_owned();
        let slack = ((BigInt::one() << (k + 1)) * &denom * mu.denom()).magnitude().to_owned();
        let pass = dev < slack;
        let stat = BigRational::new(sum.clone(), denom.clone());
        entries.push(CheckpointEntry {
            k,
            length,
            count_or_sum: crate::numeric::format_rational(&stat),
            band,
            pass: Some(pass),
        });
    }
    Ok(CheckpointReport::from_entries(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{family_measure, prefix_free_reduce, Word};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Brute force: enumerate all binary words of length k, sum the
    /// measures of those deviating by more than 2/n.
    fn deviation_brute_force(k: u64, n: u64, q: &BigRational) -> BigRational {
        let mut sum = BigRational::zero();
        for bits in 0u64..(1 << k) {
            let ones = bits.count_ones() as u64;
            let freq = rat(ones as i64, k as i64);
            let dev = (freq - q).abs();
            if dev > rat(2, n as i64) {
                let m = crate::numeric::bigrat_pow(q, ones)
                    * crate::numeric::bigrat_pow(&(BigRational::one() - q), k - ones);
                sum += m;
            }
        }
        sum
    }

    #[test]
    fn deviation_measure_examples() {
        let spec = DeviationSpec::new(4, 5, rat(1, 2)).unwrap();
        assert_eq!(deviation_set_measure(&spec).unwrap(), rat(1, 8));
        // threshold 2/n >= 1 makes the set empty
        let spec = DeviationSpec::new(6, 2, rat(1, 2)).unwrap();
        assert_eq!(deviation_set_measure(&spec).unwrap(), BigRational::zero());
        // dominated by the Chernoff certificate
        let spec = DeviationSpec::new(8, 4, rat(1, 2)).unwrap();
        let m = deviation_set_measure(&spec).unwrap();
        let cert = crate::bounds::chernoff_tail(&rat(1, 2), &rat(1, 2), 8).unwrap();
        assert!(rat_to_f64(&m) < cert.value);
    }

    #[test]
    fn deviation_measure_matches_brute_force() {
        for &(k, n) in &[(4u64, 5u64), (6, 4), (8, 6), (10, 7), (9, 5)] {
            for q in [rat(1, 2), rat(1, 3), rat(3, 5)] {
                let spec = DeviationSpec::new(k, n, q.clone()).unwrap();
                assert_eq!(
                    deviation_set_measure(&spec).unwrap(),
                    deviation_brute_force(k, n, &q),
                    "k={k} n={n} q={q}"
                );
            }
        }
    }

    #[test]
    fn interval_measure_encloses_exact_value() {
        // Rational target presented as a computable real: the interval
        // measure must contain the exact one.
        let q_rat = rat(2, 7);
        let q = CompReal::exact(q_rat.clone());
        let iv = deviation_set_measure_interval(9, 5, &q, 128).unwrap();
        let spec = DeviationSpec::new(9, 5, q_rat).unwrap();
        let exact = deviation_set_measure(&spec).unwrap();
        assert!(iv.lo <= exact && exact <= iv.hi);
        assert!(rat_to_f64(&iv.width()) < 1e-20);

        // Irrational target from an integer square root.
        let q = crate::compreal::sqrt_half();
        let iv = deviation_set_measure_interval(8, 5, &q, 128).unwrap();
        assert!(iv.lo >= BigRational::zero() && iv.hi <= BigRational::one());
        assert!(rat_to_f64(&iv.width()) < 1e-20);
    }

    #[test]
    fn lln_measure_rejects_infeasible_truncations() {
        // eps = 1/2 pushes the start accuracy into the hundreds and the
        // truncation length into the hundreds of thousands.
        let err = lln_test_measure(1, &rat(1, 2), &rat(1, 3), 3);
        assert!(matches!(err, Err(TestSetError::CapExceeded(_))));
    }

    #[test]
    fn deviation_counts_with_computable_target() {
        // Irrational target: every boundary comparison resolves.
        let q = crate::compreal::sqrt_half();
        let counts = deviation_set_counts_interval(8, 5, &q, 128).unwrap();
        // reference from a fine rational approximation of sqrt(1/2)
        let q_ref = q.approx_at(80);
        let expected: Vec<u64> = (0..=8u64)
            .filter(|&j| (rat(j as i64, 8) - &q_ref).abs() > rat(2, 5))
            .collect();
        assert_eq!(counts, expected);
        // Exact rational target sitting on a boundary: undecidable.
        let q = CompReal::exact(rat(1, 2));
        // j/k - 2/n == 1/2 when j/8 = 1/2 + 2/n; choose n = 8 so boundary is 3/4*8 = 6
        let err = deviation_set_counts_interval(8, 8, &q, 64);
        assert!(err.is_err());
    }

    /// Oracle for unions: enumerate each deviation set as words (membership
    /// re-derived from plain rational comparisons), reduce to the
    /// prefix-free minimal elements, and take the family measure.
    fn union_oracle(q: &BigRational, steps: &[UnionStep]) -> BigRational {
        let space = FiniteProbabilitySpace::bernoulli(q.clone()).unwrap();
        let mut words = Vec::new();
        for step in steps {
            for bits in 0u64..(1 << step.len) {
                let ones = bits.count_ones() as i64;
                let dev = (rat(ones, step.len as i64) - q).abs();
                let deviates = if step.strict {
                    dev > step.threshold
                } else {
                    dev >= step.threshold
                };
                if deviates {
                    let syms: Vec<u32> =
                        (0..step.len).map(|i| ((bits >> i) & 1) as u32).collect();
                    words.push(Word::new(syms));
                }
            }
        }
        let reduced = prefix_free_reduce(&words);
        family_measure(&space, reduced.words()).unwrap().exact().unwrap().clone()
    }

    #[test]
    fn union_measure_matches_prefix_free_oracle() {
        let steps: Vec<UnionStep> = (8..=11)
            .map(|len| UnionStep { len, threshold: rat(1, 4), strict: true })
            .collect();
        for q in [rat(1, 2), rat(1, 3)] {
            let dp = binary_union_measure(&q, &steps).unwrap();
            let oracle = union_oracle(&q, &steps);
            assert_eq!(dp, oracle, "q={q}");
        }
        // Mixed thresholds and a non-strict step.
        let steps = vec![
            UnionStep { len: 6, threshold: rat(1, 3), strict: true },
            UnionStep { len: 9, threshold: rat(1, 4), strict: false },
            UnionStep { len: 12, threshold: rat(1, 5), strict: true },
        ];
        let q = rat(2, 5);
        assert_eq!(binary_union_measure(&q, &steps).unwrap(), union_oracle(&q, &steps));
    }

    #[test]
    fn union_measure_empty_and_single() {
        assert_eq!(binary_union_measure(&rat(1, 2), &[]).unwrap(), BigRational::zero());
        let steps = vec![UnionStep { len: 4, threshold: rat(2, 5), strict: true }];
        assert_eq!(binary_union_measure(&rat(1, 2), &steps).unwrap(), rat(1, 8));
    }

    #[test]
    fn lln_family_enclosure_meets_targets() {
        let eps = rat(1, 1);
        let q = rat(1, 2);
        for m in 1..=3u32 {
            let l = m + 2;
            let out = lln_test_measure(m, &eps, &q, l).unwrap();
            assert!(out.g >= 4, "accuracy floor for q=1/2");
            assert!(out.upper < 2f64.powi(-(m as i32)), "upper end below 2^-{m}");
            assert!(
                out.width() < 2f64.powi(-(l as i32) - 1),
                "width must be below 2^-(l+1), m={m}"
            );
            assert!(rat_to_f64(&out.lower) <= out.upper);
            assert!(out.tail_n_cert.value < 2f64.powi(-(l as i32) - 2));
            assert!(out.tail_k_cert.value < 2f64.powi(-(l as i32) - 2));
        }
    }

    #[test]
    fn lln_enclosures_shrink_as_l_grows() {
        let eps = rat(1, 1);
        let q = rat(1, 2);
        let wide = lln_test_measure(1, &eps, &q, 2).unwrap();
        let tight = lln_test_measure(1, &eps, &q, 4).unwrap();
        assert!(tight.width() < wide.width());
        assert!(tight.upper < 0.5 && wide.upper < 0.5);
    }

    #[test]
    fn lln_family_certificates() {
        let eps = rat(1, 1);
        let q = rat(1, 2);
        for m in 1..=3 {
            let fam = lln_test_family(m, &eps, &q).unwrap();
            assert!(fam.measure_certificate.value < 2f64.powi(-(m as i32)));
        }
    }

    #[test]
    fn checkpoint_family_certificate_is_exact() {
        let r = rat(999_734, 1_000_000);
        let fam = checkpoint_test_family(5, &rat(1, 2), 3, &r).unwrap();
        assert!(fam.measure_certificate.value < 2f64.powi(-5));
    }

    #[test]
    fn segment_probability_examples() {
        let s1 = segment_band_probability(&rat(1, 2), 1, DEFAULT_CHECKPOINT_CAP).unwrap();
        assert_eq!(s1.exact.unwrap(), BigRational::one());
        let s2 = segment_band_probability(&rat(1, 2), 2, DEFAULT_CHECKPOINT_CAP).unwrap();
        // P(|Bin(48,1/2) - 24| <= 12), frozen from an exact binomial sum
        assert!((s2.value - 0.999_777_755_037_378_3).abs() < 1e-12);
        // beyond the cap: approximate with stated error
        let s8 = segment_band_probability(&rat(1, 2), 8, 7).unwrap();
        assert!(s8.exact.is_none());
        assert!(s8.err > 0.0 && (s8.value - 0.99947).abs() < 0.01);
    }

    #[test]
    fn joint_probability_closed_forms() {
        let spec = CheckpointSpec::symbol_frequency(1, rat(1, 2), 1, 1).unwrap();
        let j = checkpoint_joint_probability(&spec, DEFAULT_CHECKPOINT_CAP).unwrap();
        assert_eq!(j.exact, BigRational::one());

        let spec = CheckpointSpec::symbol_frequency(1, rat(1, 2), 1, 2).unwrap();
        let j = checkpoint_joint_probability(&spec, DEFAULT_CHECKPOINT_CAP).unwrap();
        assert_eq!(j.exact, rat(64_142, 65_536));
    }

    #[test]
    fn joint_probability_nonincreasing_in_depth() {
        let mut prev = BigRational::one();
        for n_hi in 1..=4u32 {
            let spec = CheckpointSpec::symbol_frequency(1, rat(1, 2), 1, n_hi).unwrap();
            let j = checkpoint_joint_probability(&spec, DEFAULT_CHECKPOINT_CAP).unwrap();
            assert!(j.exact <= prev);
            prev = j.exact;
        }
    }

    #[test]
    fn joint_probability_cap() {
        let spec = CheckpointSpec::symbol_frequency(1, rat(1, 2), 1, 9).unwrap();
        assert!(matches!(
            checkpoint_joint_probability(&spec, 7),
            Err(TestSetError::CapExceeded(_))
        ));
    }

    /// Direct Monte-Carlo-free oracle: enumerate all strings of length 16
    /// and check both checkpoints.
    #[test]
    fn joint_probability_matches_enumeration_at_depth_two() {
        let spec = CheckpointSpec::symbol_frequency(1, rat(1, 3), 1, 2).unwrap();
        let j = checkpoint_joint_probability(&spec, DEFAULT_CHECKPOINT_CAP).unwrap();
        let p = rat(1, 3);
        let mut total = BigRational::zero();
        for bits in 0u32..(1 << 16) {
            let c4 = (bits & 0xF).count_ones() as i64;
            let c16 = bits.count_ones() as i64;
            let ok4 = (rat(c4, 1) - rat(4, 1) * &p).abs() <= rat(2, 1);
            let ok16 = (rat(c16, 1) - rat(16, 1) * &p).abs() <= rat(4, 1);
            if ok4 && ok16 {
                total += crate::numeric::bigrat_pow(&p, c16 as u64)
                    * crate::numeric::bigrat_pow(&rat(2, 3), 16 - c16 as u64);
            }
        }
        assert_eq!(j.exact, total);
    }

    #[test]
    fn membership_reports() {
        // alternating 0101... passes at all depths present
        let mut s = SequencePrefix::new(2);
        for i in 0..1024usize {
            s.push((i % 2) as u32).unwrap();
        }
        let spec = CheckpointSpec::symbol_frequency(1, rat(1, 2), 1, 6).unwrap();
        let rep = checkpoint_membership(&s, &spec).unwrap();
        assert_eq!(rep.deepest_full_pass, Some(5));
        assert!(rep.entries[5].pass.is_none(), "4^6 beyond the prefix");
        assert!(rep.all_determined_pass);

        // constant 111... fails at k = 2 (|16 - 8| = 8 > 4)
        let mut s = SequencePrefix::new(2);
        for _ in 0..64usize {
            s.push(1).unwrap();
        }
        let rep = checkpoint_membership(&s, &spec).unwrap();
        assert_eq!(rep.entries[0].pass, Some(true));
        assert_eq!(rep.entries[1].pass, Some(false));
        assert_eq!(rep.deepest_full_pass, Some(1));
        assert!(!rep.all_determined_pass);
    }

    #[test]
    fn rv_membership_reduces_to_counts_for_indicators() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let x = RealRandomVariable::indicator(2, 1);
        let mut s = SequencePrefix::new(2);
        for i in 0..256usize {
            s.push(((i * 7 + 1) % 3 % 2) as u32).unwrap();
        }
        let rep = rv_checkpoint_membership(&s, &p, &x, 1, 4).unwrap();
        // same verdicts as symbol checkpoints with widened strict band
        let spec = CheckpointSpec::rv_widened(1, rat(1, 2), 1, 4).unwrap();
        let sym = checkpoint_membership(&s, &spec).unwrap();
        for (a, b) in rep.entries.iter().zip(sym.entries.iter()) {
            assert_eq!(a.pass, b.pass);
        }
    }

    #[test]
    fn rv_membership_constant_and_oscillating() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        // constant X: deviation 0 everywhere
        let x = RealRandomVariable::with_auto_envelope(vec![rat(5, 7), rat(5, 7)]);
        let mut s = SequencePrefix::new(2);
        for i in 0..64usize {
            s.push((i % 2) as u32).unwrap();
        }
        let rep = rv_checkpoint_membership(&s, &p, &x, 1, 3).unwrap();
        assert!(rep.entries.iter().all(|e| e.pass == Some(true)));

        // X = (-1, 1) on alternating prefix: partial sums in {-1, 0}
        let x = RealRandomVariable::with_auto_envelope(vec![rat(-1, 1), rat(1, 1)]);
        let rep = rv_checkpoint_membership(&s, &p, &x, 1, 3).unwrap();
        assert!(rep.entries.iter().all(|e| e.pass == Some(true)));
    }

    #[test]
    fn json_lines_schema() {
        let mut s = SequencePrefix::new(2);
        for _ in 0..16usize {
            s.push(1).unwrap();
        }
        let spec = CheckpointSpec::symbol_frequency(1, rat(1, 2), 1, 2).unwrap();
        let rep = checkpoint_membership(&s, &spec).unwrap();
        let lines = rep.to_json_lines();
        for line in lines.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            for key in ["k", "length", "count_or_sum", "band", "pass"] {
                assert!(v.get(key).is_some(), "missing {key}");
            }
        }
    }
}

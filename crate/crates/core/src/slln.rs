//! Bounded discrete i.i.d. variables at desk scale: Hoeffding-certified
//! effectivization of almost-sure convergence and the checkpoint speed-limit
//! experiment.
//!
//! The certificates (Hoeffding double sums closed by an incomplete-gamma
//! majorant) are valid for any `[a, b]`-bounded i.i.d. family; the sampler
//! is restricted to finite rational support so means, variances, and the
//! support-convolution oracle stay exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{clt_r_general, smallest_g_below, BoundCertificate, BoundsError, Derivation};
use crate::numeric::{
    bigint_pow, bigrat_pow, format_rational, parse_rational, rat_to_f64, round_up, NumericError,
};
use crate::seqio::{cumulative_thresholds, derive_seed, stream_word, SeqIoError};
use crate::stats::McEstimate;
use crate::witness::{scan_scaled_sums, WitnessError, WitnessReport};

#[derive(Debug, Error)]
pub enum SllnError {
    #[error("invalid random variable: {0}")]
    Invalid(String),
    #[error("the speed-limit experiment needs V[X] > 0")]
    ZeroVariance,
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    SeqIo(#[from] SeqIoError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// A bounded random variable with finite rational support.
#[derive(Debug, Clone)]
pub struct BoundedDiscreteRV {
    support: Vec<BigRational>,
    probs: Vec<BigRational>,
    envelope: (BigRational, BigRational),
}

impl BoundedDiscreteRV {
    pub fn new(
        support: Vec<BigRational>,
        probs: Vec<BigRational>,
        envelope: (BigRational, BigRational),
    ) -> Result<Self, SllnError> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(SllnError::Invalid(format!(
                "support ({}) and probabilities ({}) must be non-empty and equal length",
                support.len(),
                probs.len()
            )));
        }
        if envelope.0 >= envelope.1 {
            return Err(SllnError::Invalid(format!(
                "envelope must satisfy a < b, got [{}, {}]",
                envelope.0, envelope.1
            )));
        }
        let mut sum = BigRational::zero();
        for q in &probs {
            if q.is_negative() {
                return Err(SllnError::Invalid(format!("negative probability {q}")));
            }
            sum += q;
        }
        if !sum.is_one() {
            return Err(SllnError::Invalid(format!("probabilities sum to {sum}, not 1")));
        }
        for v in &support {
            if v < &envelope.0 || v > &envelope.1 {
                return Err(SllnError::Invalid(format!(
                    "support value {v} outside envelope [{}, {}]",
                    envelope.0, envelope.1
                )));
            }
        }
        Ok(BoundedDiscreteRV { support, probs, envelope })
    }

    /// Fair coin on {0, 1} with envelope [0, 1].
    pub fn fair_coin() -> Self {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        BoundedDiscreteRV {
            support: vec![BigRational::zero(), BigRational::one()],
            probs: vec![half.clone(), half],
            envelope: (BigRational::zero(), BigRational::one()),
        }
    }

    pub fn support(&self) -> &[BigRational] {
        &self.support
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn envelope(&self) -> (&BigRational, &BigRational) {
        (&self.envelope.0, &self.envelope.1)
    }

    pub fn mean(&self) -> BigRational {
        self.support.iter().zip(&self.probs).map(|(v, q)| v * q).sum()
    }

    pub fn variance(&self) -> BigRational {
        let mu = self.mean();
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(v, q)| {
                let d = v - &mu;
                &d * &d * q
            })
            .sum()
    }

    /// Width of the envelope, `b - a`.
    pub fn range(&self) -> BigRational {
        &self.envelope.1 - &self.envelope.0
    }
}

/// JSON manifest: `{"support": ["num/den"...], "probs": [...],
/// "envelope": ["a", "b"]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvManifest {
    pub support: Vec<String>,
    pub probs: Vec<String>,
    pub envelope: [String; 2],
}

impl RvManifest {
    pub fn to_rv(&self) -> Result<BoundedDiscreteRV, SllnError> {
        let support =
            self.support.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
        let probs =
            self.probs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
        let a = parse_rational(&self.envelope[0])?;
        let b = parse_rational(&self.envelope[1])?;
        BoundedDiscreteRV::new(support, probs, (a, b))
    }

    pub fn from_rv(rv: &BoundedDiscreteRV) -> Self {
        RvManifest {
            support: rv.support.iter().map(format_rational).collect(),
            probs: rv.probs.iter().map(format_rational).collect(),
            envelope: [format_rational(&rv.envelope.0), format_rational(&rv.envelope.1)],
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SllnError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SllnError::Invalid(format!("cannot read manifest: {e}")))?;
        serde_json::from_str(&text).map_err(|e| SllnError::Invalid(format!("bad manifest: {e}")))
    }
}

/// A deterministic i.i.d. sample: values are reproduced on demand from
/// `(seed, position)`, so runs stream without materializing.
#[derive(Debug, Clone)]
pub struct SampleRun {
    rv: BoundedDiscreteRV,
    pub seed: u64,
    pub n: u64,
    thresholds: Vec<u128>,
}

impl SampleRun {
    pub fn rv(&self) -> &BoundedDiscreteRV {
        &self.rv
    }

    /// Support index at position `i` (0-based).
    #[inline]
    pub fn index_at(&self, i: u64) -> usize {
        let u = stream_word(self.seed, i) as u128;
        let mut s = 0usize;
        while u >= self.thresholds[s] {
            s += 1;
        }
        s
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).map(|i| self.index_at(i))
    }

    /// Streaming partial sums `S_1, S_2, …, S_n` as exact rationals.
    pub fn partial_sums(&self) -> impl Iterator<Item = BigRational> + '_ {
        let mut acc = BigRational::zero();
        self.indices().map(move |idx| {
            acc += &self.rv.support[idx];
            acc.clone()
        })
    }
}

/// Inversion sampling against exact cumulative thresholds; deterministic in
/// `(rv, n, seed)`.
pub fn sample_iid(rv: &BoundedDiscreteRV, n: u64, seed: u64) -> SampleRun {
    let thresholds = cumulative_thresholds(&rv.probs);
    SampleRun { rv: rv.clone(), seed, n, thresholds }
}

/// Smallest start index `m` whose certified Hoeffding double-sum bound
/// `Σ_{n>=m} Σ_{k>=⌈n^(2+eps)⌉} 2·exp(-2k/((b-a)²n²))` is below `delta`,
/// with the certificate recording the chain.
pub fn effectivization_certificate(
    rv: &BoundedDiscreteRV,
    eps: &BigRational,
    delta: &BigRational,
) -> Result<(u64, BoundCertificate), SllnError> {
    if !eps.is_positive() || !delta.is_positive() {
        return Err(SllnError::Invalid("eps and delta must be positive".into()));
    }
    let range = rat_to_f64(&rv.range());
    let c = range * range / 2.0;
    // 2·bound < delta with a safety factor for the f64 conversion.
    let target = rat_to_f64(delta) * 0.499_999_9;
    let (m, inner) = smallest_g_below(target, eps, c, 1)?;
    let value = round_up(2.0 * inner.value);
    Ok((
        m,
        BoundCertificate {
            quantity: format!(
                "P(exists n >= {m}, k >= ceil(n^(2+{eps})): |S_k/k - mean| >= 1/n) \
                 for i.i.d. terms in [{}, {}]",
                rv.envelope.0, rv.envelope.1
            ),
            value,
            derivation: Derivation::Scaled { factor: 2.0, inner: Box::new(inner.derivation) },
        },
    ))
}

/// The frequency scan applied to `|S_k/k - mu| < 1/n` over the sampled run.
pub fn as_convergence_scan(
    run: &SampleRun,
    mu: &BigRational,
    eps: &BigRational,
    n_max: u64,
) -> Result<WitnessReport, SllnError> {
    let denom = run
        .rv
        .support
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let scaled: Vec<BigInt> =
        run.rv.support.iter().map(|v| v.numer() * (&denom / v.denom())).collect();
    let increments = run.indices().map(|idx| scaled[idx].clone());
    Ok(scan_scaled_sums(increments, run.n, &denom, mu, eps, n_max)?)
}

/// Exact joint probability that the partial sums stay inside the inclusive
/// bands `|S_(4^k) - 4^k·mu| <= 2^k` for `k` in `[n1, n]`, by dynamic
/// programming over the value lattice with exact convolution kernels.
pub fn support_convolution_joint(
    rv: &BoundedDiscreteRV,
    n1: u32,
    n: u32,
    cap: u32,
) -> Result<BigRational, SllnError> {
    if n1 < 1 || n1 > n {
        return Err(SllnError::Invalid(format!("need 1 <= n1 <= n, got [{n1}, {n}]")));
    }
    if n > cap {
        return Err(SllnError::CapExceeded(format!("4^{n} beyond the convolution cap 4^{cap}")));
    }
    let mu = rv.mean();
    // Common value lattice: all support values as integers over d.
    let d = rv
        .support
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let vals: Vec<i64> = rv
        .support
        .iter()
        .map(|v| {
            (v.numer() * (&d / v.denom()))
                .to_i64()
                .ok_or_else(|| SllnError::CapExceeded("support lattice beyond i64".into()))
        })
        .collect::<Result<_, _>>()?;
    let vmin = *vals.iter().min().unwrap();
    let offsets: Vec<usize> = vals.iter().map(|&v| (v - vmin) as usize).collect();
    let omax = *offsets.iter().max().unwrap();
    // Probability numerators over pd.
    let pd = rv.probs.iter().fold(BigInt::one(), |acc, q| num_integer::lcm(acc, q.denom().clone()));
    let pnum: Vec<BigInt> = rv.probs.iter().map(|q| q.numer() * (&pd / q.denom())).collect();

    // pmf of the sum of `len` i.i.d. copies, as offset weights over pd^len.
    let pmf = |len: u64| -> Vec<BigInt> {
        let base: Vec<BigInt> = {
            let mut b = vec![BigInt::zero(); omax + 1];
            for (i, &o) in offsets.iter().enumerate() {
                b[o] += &pnum[i];
            }
            b
        };
        let mut result = vec![BigInt::one()];
        let mut sq = base;
        let mut e = len;
        while e > 0 {
            if e & 1 == 1 {
                result = convolve(&result, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = convolve(&sq, &sq);
            }
        }
        result
    };

    // Lattice band at checkpoint k: integers s with |s/d - 4^k mu| <= 2^k,
    // i.e. |s*md - 4^k*mn*d| <= 2^k*d*md.
    let band = |k: u32| -> Option<(BigInt, BigInt)> {
        use num_integer::Integer;
        let len = BigInt::from(4u64.pow(k));
        let center = &len * mu.numer() * &d;
        let slack: BigInt = (BigInt::one() << k) * &d * mu.denom();
        let lo = (&center - &slack).div_ceil(mu.denom());
        let hi = (&center + &slack).div_floor(mu.denom());
        if lo > hi {
            None
        } else {
            Some((lo, hi))
        }
    };

    let len0 = 4u64.pow(n1);
    let base_lo = BigInt::from(len0) * BigInt::from(vmin);
    let dist0 = pmf(len0);
    let Some((blo, bhi)) = band(n1) else { return Ok(BigRational::zero()) };
    // state vector indexed by lattice value s = base_lo + offset
    let mut lo_state = blo.clone().max(base_lo.clone());
    let mut weights: Vec<BigInt> = {
        let hi_state = bhi.clone().min(&base_lo + BigInt::from(dist0.len() as u64 - 1));
        if lo_state > hi_state {
            return Ok(BigRational::zero());
        }
        let start = (&lo_state - &base_lo).to_usize().unwrap();
        let end = (&hi_state - &base_lo).to_usize().unwrap();
        dist0[start..=end].to_vec()
    };

    for k in n1..n {
        let seg = 3u64 * 4u64.pow(k);
        let kernel = pmf(seg);
        let kernel_base = BigInt::from(seg) * BigInt::from(vmin);
        let Some((nlo, nhi)) = band(k + 1) else { return Ok(BigRational::zero()) };
        let width = (&nhi - &nlo).to_usize().ok_or_else(|| {
            SllnError::CapExceeded("checkpoint band beyond usize".into())
        })?;
        let mut new_weights = vec![BigInt::zero(); width + 1];
        for (i, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let s = &lo_state + BigInt::from(i as u64);
            for (t, nw) in new_weights.iter_mut().enumerate() {
                let target = &nlo + BigInt::from(t as u64);
                let inc = &target - &s - &kernel_base;
                if inc.is_negative() {
                    continue;
                }
                let Some(idx) = inc.to_usize() else { continue };
                if idx >= kernel.len() {
                    continue;
                }
                *nw += w * &kernel[idx];
            }
        }
        weights = new_weights;
        lo_state = nlo;
    }
    let total: BigInt = weights.iter().sum();
    Ok(BigRational::new(total, bigint_pow(&pd, 4u64.pow(n))))
}

fn convolve(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] += x * y;
        }
    }
    out
}

/// Result of the checkpoint speed-limit experiment for a bounded RV.
#[derive(Debug, Clone, Serialize)]
pub struct SllnCheckpointResult {
    pub n1: u32,
    pub n: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub estimate: McEstimate,
    /// Ceiling constant from the band integral at `2·sqrt(3/v)`.
    pub r: String,
    pub r_value: f64,
    pub r_power: f64,
    /// Exact joint probability when the convolution DP is feasible.
    pub dp_value: Option<f64>,
}

/// Default cap for the support-convolution oracle.
pub const CONVOLUTION_CAP: u32 = 4;

/// Monte Carlo estimate of
/// `P(for all k in [n1, n]: |S_(4^k) - 4^k·mu| <= 2^k)`, compared against
/// the exact convolution DP (when feasible) and the ceiling `r^(n-n1)`.
pub fn slln_checkpoint_experiment(
    rv: &BoundedDiscreteRV,
    n1: u32,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<SllnCheckpointResult, SllnError> {
    if rv.variance().is_zero() {
        return Err(SllnError::ZeroVariance);
    }
    if n1 < 1 || n1 > n {
        return Err(SllnError::Invalid(format!("need 1 <= n1 <= n, got [{n1}, {n}]")));
    }
    if n > 12 {
        return Err(SllnError::CapExceeded("4^n beyond 4^12".into()));
    }
    if trials < 1 {
        return Err(SllnError::Invalid("trials must be >= 1".into()));
    }
    let mu = rv.mean();
    let d = rv
        .support
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let scaled: Vec<i128> = rv
        .support
        .iter()
        .map(|v| {
            (v.numer() * (&d / v.denom()))
                .to_i128()
                .ok_or_else(|| SllnError::CapExceeded("lattice beyond i128".into()))
        })
        .collect::<Result<_, _>>()?;
    let di = d.to_i128().ok_or_else(|| SllnError::CapExceeded("denominator beyond i128".into()))?;
    let mn = mu
        .numer()
        .to_i128()
        .ok_or_else(|| SllnError::CapExceeded("mean beyond i128".into()))?;
    let md = mu.denom().to_i128().unwrap();
    let length = 4u64.pow(n);
    let max_abs = scaled.iter().map(|v| v.abs()).max().unwrap().max(1);
    if (length as i128)
        .checked_mul(max_abs)
        .and_then(|v| v.checked_mul(md))
        .and_then(|v| v.checked_mul(2))
        .is_none()
    {
        return Err(SllnError::CapExceeded("partial sums beyond i128".into()));
    }
    let thresholds = cumulative_thresholds(&rv.probs);
    let checkpoints: Vec<(u64, i128)> =
        (n1..=n).map(|k| (4u64.pow(k), (1i128 << k) * di * md)).collect();
    let passes: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, trial);
            let mut sum = 0i128;
            let mut next = 0usize;
            for i in 0..length {
                let u = stream_word(trial_seed, i) as u128;
                let mut idx = 0usize;
                while u >= thresholds[idx] {
                    idx += 1;
                }
                sum += scaled[idx];
                let here = i + 1;
                if here == checkpoints[next].0 {
                    let dev = (sum * md - here as i128 * mn * di).abs();
                    if dev > checkpoints[next].1 {
                        return 0u64;
                    }
                    next += 1;
                    if next == checkpoints.len() {
                        break;
                    }
                }
            }
            1u64
        })
        .sum();
    let v = rat_to_f64(&rv.variance());
    let r = clt_r_general(v)?;
    let r_value = rat_to_f64(&r.r);
    let dp_value = if n <= CONVOLUTION_CAP {
        Some(rat_to_f64(&support_convolution_joint(rv, n1, n, CONVOLUTION_CAP)?))
    } else {
        None
    };
    Ok(SllnCheckpointResult {
        n1,
        n,
        seed,
        estimate: McEstimate::new(passes, trials),
        r: r.r.to_string(),
        r_value,
        r_power: rat_to_f64(&bigrat_pow(&r.r, (n - n1) as u64)),
        dp_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn three_point() -> BoundedDiscreteRV {
        BoundedDiscreteRV::new(
            vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            vec![rat(1, 4), rat(1, 2), rat(1, 4)],
            (rat(0, 1), rat(1, 1)),
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(BoundedDiscreteRV::new(vec![rat(2, 1)], vec![rat(1, 1)], (rat(0, 1), rat(1, 1)))
            .is_err());
        assert!(BoundedDiscreteRV::new(
            vec![rat(0, 1)],
            vec![rat(1, 2)],
            (rat(0, 1), rat(1, 1))
        )
        .is_err());
        assert!(BoundedDiscreteRV::new(
            vec![rat(0, 1)],
            vec![rat(1, 1)],
            (rat(1, 1), rat(0, 1))
        )
        .is_err());
    }

    #[test]
    fn moments() {
        let rv = three_point();
        assert_eq!(rv.mean(), rat(1, 2));
        assert_eq!(rv.variance(), rat(1, 8));
        let coin = BoundedDiscreteRV::fair_coin();
        assert_eq!(coin.mean(), rat(1, 2));
        assert_eq!(coin.variance(), rat(1, 4));
    }

    #[test]
    fn sampling_determinism_and_degeneracy() {
        let rv = three_point();
        let a = sample_iid(&rv, 1000, 5);
        let b = sample_iid(&rv, 1000, 5);
        assert!(a.indices().eq(b.indices()));
        assert_eq!(sample_iid(&rv, 0, 1).indices().count(), 0);

        let point = BoundedDiscreteRV::new(
            vec![rat(1, 3)],
            vec![rat(1, 1)],
            (rat(0, 1), rat(1, 1)),
        )
        .unwrap();
        let run = sample_iid(&point, 100, 9);
        assert!(run.indices().all(|i| i == 0));
        let sums: Vec<BigRational> = run.partial_sums().take(3).collect();
        assert_eq!(sums, vec![rat(1, 3), rat(2, 3), rat(1, 1)]);
    }

    #[test]
    fn sampler_frequencies_converge() {
        // Hoeffding puts the failure probability of this assertion below
        // 2e^-200; a failure means the sampler is broken.
        let coin = BoundedDiscreteRV::fair_coin();
        let run = sample_iid(&coin, 1_000_000, 31);
        let ones: u64 = run.indices().map(|i| i as u64).sum();
        let freq = ones as f64 / 1_000_000.0;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn certificate_meets_delta_and_dominates_partial_sums() {
        let coin = BoundedDiscreteRV::fair_coin();
        let eps = rat(1, 1);
        let (m, cert) = effectivization_certificate(&coin, &eps, &rat(1, 8)).unwrap();
        assert!(cert.value < 0.125, "certificate {}", cert.value);
        // direct partial double sum never exceeds the certificate
        let c = 0.5; // (b-a)²/2
        let mut direct = 0.0;
        for nn in m..m + 40 {
            let f = crate::bounds::f_threshold(nn, &eps);
            for k in f..f + 50_000 {
                let term = 2.0 * (-(k as f64) / (c * (nn * nn) as f64)).exp();
                direct += term;
                if term < 1e-18 {
                    break;
                }
            }
        }
        assert!(direct <= cert.value);
    }

    #[test]
    fn certificate_start_grows_as_delta_shrinks() {
        let coin = BoundedDiscreteRV::fair_coin();
        let eps = rat(1, 1);
        let mut prev = 0u64;
        for e in 1..=8u32 {
            let delta = BigRational::new(BigInt::one(), BigInt::one() << e);
            let (m, cert) = effectivization_certificate(&coin, &eps, &delta).unwrap();
            assert!(cert.value < rat_to_f64(&delta));
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn scan_constant_rv_holds() {
        let point = BoundedDiscreteRV::new(
            vec![rat(2, 5)],
            vec![rat(1, 1)],
            (rat(0, 1), rat(1, 1)),
        )
        .unwrap();
        let run = sample_iid(&point, 5000, 3);
        let rep = as_convergence_scan(&run, &point.mean(), &rat(1, 1), 5).unwrap();
        assert!(rep.all_determined_hold());
    }

    #[test]
    fn indicator_scan_matches_symbol_scan() {
        // A {0,1} rv sampled from the same stream as a Bernoulli space
        // reproduces the frequency-scan verdicts exactly.
        let coin = BoundedDiscreteRV::fair_coin();
        let run = sample_iid(&coin, 20_000, 17);
        let rep_rv = as_convergence_scan(&run, &coin.mean(), &rat(1, 1), 6).unwrap();

        let space = crate::prob::FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let mut s = crate::prob::SequencePrefix::new(2);
        for idx in run.indices() {
            s.push(idx as u32).unwrap();
        }
        let rep_sym = crate::witness::lln_witness_scan(&s, &space, &rat(1, 1), 6).unwrap();
        for (a, b) in rep_rv.entries.iter().zip(rep_sym.entries.iter()) {
            assert_eq!(
                serde_json::to_string(&a.verdict).unwrap(),
                serde_json::to_string(&b.verdict).unwrap()
            );
        }
    }

    #[test]
    fn ensemble_failure_rate_below_certificate() {
        // 100 fair-coin runs of 50k samples: the fraction with a scan
        // failure anywhere in n >= m, k in [f(n), 50k] stays below the
        // certified double-sum bound plus 3-sigma Wilson slack.
        let coin = BoundedDiscreteRV::fair_coin();
        let eps = rat(1, 1);
        let (m, cert) = effectivization_certificate(&coin, &eps, &rat(1, 8)).unwrap();
        let runs = 100u64;
        let mut failures = 0u64;
        for t in 0..runs {
            let run = sample_iid(&coin, 50_000, crate::seqio::derive_seed(909, t));
            let rep = as_convergence_scan(&run, &coin.mean(), &eps, m + 6).unwrap();
            let failed = rep.entries[m as usize - 1..]
                .iter()
                .any(|e| matches!(e.verdict, crate::witness::NVerdict::Violated { .. }));
            failures += failed as u64;
        }
        let (w_lo, _) = crate::stats::wilson_interval(failures, runs, 3.0);
        assert!(w_lo <= cert.value, "failure rate {} vs certificate {}", failures, cert.value);
    }

    #[test]
    fn convolution_dp_matches_binomial_dp_for_coin() {
        let coin = BoundedDiscreteRV::fair_coin();
        let dp = support_convolution_joint(&coin, 1, 2, CONVOLUTION_CAP).unwrap();
        // the {0,1} coin sum is a plain binomial count
        let spec =
            crate::testsets::CheckpointSpec::symbol_frequency(1, rat(1, 2), 1, 2).unwrap();
        let bin =
            crate::testsets::checkpoint_joint_probability(&spec, 7).unwrap();
        assert_eq!(dp, bin.exact);
        assert_eq!(dp, rat(64_142, 65_536));
    }

    #[test]
    fn experiment_matches_convolution_dp() {
        let rv = three_point();
        let out = slln_checkpoint_experiment(&rv, 1, 2, 50_000, 21).unwrap();
        let dp = out.dp_value.unwrap();
        assert!(out.estimate.contains_3s(dp), "MC {} vs DP {}", out.estimate.rate, dp);
        // r is strictly below 1 as an exact rational (its f64 image may
        // round to 1.0 when the band integral is within 1e-16 of 1).
        assert!(parse_rational(&out.r).unwrap() < BigRational::one());
    }

    #[test]
    fn experiment_monotone_in_depth() {
        let rv = three_point();
        let shallow = slln_checkpoint_experiment(&rv, 1, 2, 20_000, 5).unwrap();
        let deep = slln_checkpoint_experiment(&rv, 1, 3, 20_000, 5).unwrap();
        assert!(deep.estimate.rate <= shallow.estimate.rate + 1e-12);
        assert!(slln_checkpoint_experiment(&rv, 1, 2, 0, 1).is_err());
    }

    #[test]
    fn fair_coin_experiment_matches_symbol_experiment() {
        // identical seeds and stream layout give identical pass counts
        let coin = BoundedDiscreteRV::fair_coin();
        let rv_out = slln_checkpoint_experiment(&coin, 1, 2, 10_000, 77).unwrap();
        let space = crate::prob::FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let sym_out =
            crate::speedlimit::montecarlo_pass_rate(&space, 1, 1, 2, 10_000, 77).unwrap();
        assert_eq!(rv_out.estimate.successes, sym_out.estimate.successes);
    }

    #[test]
    fn constant_rv_rejected() {
        let point = BoundedDiscreteRV::new(
            vec![rat(1, 2)],
            vec![rat(1, 1)],
            (rat(0, 1), rat(1, 1)),
        )
        .unwrap();
        assert!(matches!(
            slln_checkpoint_experiment(&point, 1, 2, 10, 1),
            Err(SllnError::ZeroVariance)
        ));
    }

    #[test]
    fn manifest_roundtrip() {
        let rv = three_point();
        let m = RvManifest::from_rv(&rv);
        let back = m.to_rv().unwrap();
        assert_eq!(back.support(), rv.support());
        assert_eq!(back.probs(), rv.probs());
    }
}

//! Checkpoint experiments at lengths `4^n` with bands `2^n`: scans of
//! concrete prefixes, Monte Carlo estimates of the joint checkpoint-passing
//! probability against the exact DP and the `r^(n-n1)` ceiling, and a
//! generator for sequences that pass every checkpoint by construction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{clt_r, BoundsError, CltR};
use crate::numeric::rat_to_f64;
use crate::prob::{
    rv_mean, rv_variance, FiniteProbabilitySpace, ProbError, RealRandomVariable, SequencePrefix,
    Symbol,
};
use crate::seqio::{derive_seed, stream_word, SeqIoError, SeqSampler};
use crate::stats::McEstimate;
use crate::testsets::{
    checkpoint_membership, rv_checkpoint_membership, segment_band_probability, CheckpointReport,
    CheckpointSpec, TestSetError, DEFAULT_CHECKPOINT_CAP,
};

#[derive(Debug, Error)]
pub enum SpeedLimitError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("sampling cap exceeded: {0}")]
    CapExceeded(String),
    #[error("the checkpoint argument needs V(X) > 0; got a constant variable")]
    ZeroVariance,
    #[error("adversarial steering became infeasible at position {0} (cannot happen for 0 < P(a) < 1)")]
    Infeasible(u64),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    TestSet(#[from] TestSetError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    SeqIo(#[from] SeqIoError),
}

fn unit_open_prob(
    p: &FiniteProbabilitySpace,
    a: Symbol,
) -> Result<BigRational, SpeedLimitError> {
    p.check_symbol(a)?;
    let pa = p.exact_prob(a)?;
    if pa <= BigRational::zero() || pa >= BigRational::one() {
        return Err(SpeedLimitError::Invalid(format!("need 0 < P(a) < 1, got {pa}")));
    }
    Ok(pa)
}

/// Symbol-count checkpoint scan with the inclusive band `2^k`: the
/// finite-depth witness that a prefix sits inside every checkpoint test set
/// up to the reported depth.
pub fn checkpoint_scan(
    s: &SequencePrefix,
    p: &FiniteProbabilitySpace,
    a: Symbol,
    n_lo: u32,
    n_hi: u32,
) -> Result<CheckpointReport, SpeedLimitError> {
    let pa = unit_open_prob(p, a)?;
    let spec = CheckpointSpec::symbol_frequency(a, pa, n_lo, n_hi)?;
    Ok(checkpoint_membership(s, &spec)?)
}

/// Random-variable checkpoint scan with the widened strict band `2^(k+1)`;
/// requires `V(X) > 0`.
pub fn rv_checkpoint_scan(
    s: &SequencePrefix,
    p: &FiniteProbabilitySpace,
    x: &RealRandomVariable,
    n_lo: u32,
    n_hi: u32,
) -> Result<CheckpointReport, SpeedLimitError> {
    if rv_variance(p, x)?.is_zero() {
        return Err(SpeedLimitError::ZeroVariance);
    }
    Ok(rv_checkpoint_membership(s, p, x, n_lo, n_hi)?)
}

/// Generates a prefix of length `4^depth` that passes every checkpoint
/// `|N_a(prefix 4^k) - 4^k P(a)| <= 2^k` for `k <= depth`, by greedy
/// trajectory steering randomized within the slack the bands allow. This is
/// one witness family for the hypothesis of the speed-limit argument, not a
/// canonical one; a finite prefix witnesses the checkpoint property only up
/// to its own depth.
pub fn adversarial_generate(
    p: &FiniteProbabilitySpace,
    a: Symbol,
    depth: u32,
    seed: u64,
) -> Result<SequencePrefix, SpeedLimitError> {
    if !(1..=12).contains(&depth) {
        return Err(SpeedLimitError::Invalid("depth must be in [1, 12]".into()));
    }
    let pa = unit_open_prob(p, a)?;
    let pn = pa.numer().clone();
    let pd = pa.denom().clone();
    // Inclusive count bands at each checkpoint length 4^k.
    let band_at = |k: u32| -> (u64, u64) {
        let len = BigInt::from(4u64.pow(k));
        let radius: BigInt = BigInt::one() << k;
        let lo = (&len * &pn - &radius * &pd).div_ceil(&pd).max(BigInt::zero());
        let hi = (&len * &pn + &radius * &pd).div_floor(&pd).min(len);
        (lo.to_u64().unwrap(), hi.to_u64().unwrap())
    };
    let sampler = SeqSampler::new(p)?;
    // Conditional sampler over the non-`a` symbols.
    let probs = p.exact_probs()?;
    let rest_total = BigRational::one() - &pa;
    let rest_syms: Vec<Symbol> =
        (0..p.len() as Symbol).filter(|&s| s != a && !probs[s as usize].is_zero()).collect();
    let mut rest_thresholds: Vec<(u128, Symbol)> = Vec::new();
    {
        let scale: BigInt = BigInt::one() << 64;
        let mut cum = BigRational::zero();
        for &s in &rest_syms {
            cum += &probs[s as usize] / &rest_total;
            let t = (&cum * BigRational::from_integer(scale.clone())).floor().to_integer();
            rest_thresholds.push((t.to_u128().unwrap(), s));
        }
        if let Some(last) = rest_thresholds.last_mut() {
            last.0 = 1u128 << 64;
        }
    }
    let seed_choice = derive_seed(seed, 0);
    let seed_rest = derive_seed(seed, 1);

    let total = 4u64.pow(depth);
    let mut out = SequencePrefix::new(p.len());
    let mut count = 0u64;
    let mut k = 1u32;
    let (mut lo, mut hi) = band_at(1);
    for i in 1..=total {
        let checkpoint_len = 4u64.pow(k);
        let slots_left = checkpoint_len - i + 1; // including this position
        let forced_a = count + slots_left <= lo;
        let forced_other = count + 1 > hi;
        if forced_a && forced_other {
            return Err(SpeedLimitError::Infeasible(i));
        }
        let sym = if forced_a {
            a
        } else if forced_other {
            let w = stream_word(seed_rest, i) as u128;
            rest_thresholds.iter().find(|(t, _)| w < *t).map(|&(_, s)| s).unwrap()
        } else {
            sampler.symbol_at(seed_choice, i - 1)
        };
        if sym == a {
            count += 1;
        }
        out.push(sym)?;
        if i == checkpoint_len && k < depth {
            k += 1;
            let b = band_at(k);
            lo = b.0;
            hi = b.1;
        }
    }
    // The construction is checked, not trusted.
    let report = checkpoint_scan(&out, p, a, 1, depth)?;
    if !report.all_determined_pass {
        return Err(SpeedLimitError::Infeasible(total));
    }
    Ok(out)
}

/// Monte Carlo estimate of the probability that a sampled sequence passes
/// all symbol checkpoints in `[n1, n]`.
#[derive(Debug, Clone, Serialize)]
pub struct PassRate {
    pub n1: u32,
    pub n: u32,
    pub length: u64,
    pub seed: u64,
    #[serde(flatten)]
    pub estimate: McEstimate,
}

/// Default cap on Monte Carlo prefix lengths (`4^n <= 4^12`).
pub const MC_DEPTH_CAP: u32 = 12;

pub fn montecarlo_pass_rate(
    p: &FiniteProbabilitySpace,
    a: Symbol,
    n1: u32,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<PassRate, SpeedLimitError> {
    let pa = unit_open_prob(p, a)?;
    if n1 < 1 || n1 > n {
        return Err(SpeedLimitError::Invalid(format!("need 1 <= n1 <= n, got [{n1}, {n}]")));
    }
    if n > MC_DEPTH_CAP {
        return Err(SpeedLimitError::CapExceeded(format!("4^{n} beyond 4^{MC_DEPTH_CAP}")));
    }
    if trials < 1 {
        return Err(SpeedLimitError::Invalid("trials must be >= 1".into()));
    }
    let sampler = SeqSampler::new(p)?;
    let pn = pa.numer().to_i128().unwrap();
    let pd = pa.denom().to_i128().unwrap();
    if pd >= (1 << 30) {
        return Err(SpeedLimitError::CapExceeded("denominator beyond i128 fast path".into()));
    }
    let length = 4u64.pow(n);
    let checkpoints: Vec<(u64, i128)> =
        (n1..=n).map(|k| (4u64.pow(k), (1i128 << k) * pd)).collect();
    let passes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, trial);
            let mut count = 0i128;
            let mut next = 0usize;
            for i in 0..length {
                if sampler.symbol_at(trial_seed, i) == a {
                    count += 1;
                }
                let len_here = i + 1;
                if len_here == checkpoints[next].0 {
                    let dev = (count * pd - len_here as i128 * pn).abs();
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
    Ok(PassRate { n1, n, length, seed, estimate: McEstimate::new(passes, trials) })
}

/// The widened-strict-band variant for a random variable with `V(X) > 0`:
/// partial sums of `X` against `< 2^(k+1)`.
pub fn rv_montecarlo_pass_rate(
    p: &FiniteProbabilitySpace,
    x: &RealRandomVariable,
    n1: u32,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<PassRate, SpeedLimitError> {
    if rv_variance(p, x)?.is_zero() {
        return Err(SpeedLimitError::ZeroVariance);
    }
    if n1 < 1 || n1 > n {
        return Err(SpeedLimitError::Invalid(format!("need 1 <= n1 <= n, got [{n1}, {n}]")));
    }
    if n > MC_DEPTH_CAP {
        return Err(SpeedLimitError::CapExceeded(format!("4^{n} beyond 4^{MC_DEPTH_CAP}")));
    }
    let mu = rv_mean(p, x)?;
    let denom = x
        .values()
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let scaled: Vec<i128> = x
        .values()
        .iter()
        .map(|v| {
            (v.numer() * (&denom / v.denom()))
                .to_i128()
                .ok_or_else(|| SpeedLimitError::CapExceeded("value lattice beyond i128".into()))
        })
        .collect::<Result<_, _>>()?;
    let d = denom
        .to_i128()
        .ok_or_else(|| SpeedLimitError::CapExceeded("denominator beyond i128".into()))?;
    let mn = mu.numer().to_i128().unwrap();
    let md = mu.denom().to_i128().unwrap();
    let length = 4u64.pow(n);
    let max_abs = scaled.iter().map(|v| v.abs()).max().unwrap_or(0).max(1);
    if (length as i128)
        .checked_mul(max_abs)
        .and_then(|v| v.checked_mul(md))
        .and_then(|v| v.checked_mul(2))
        .is_none()
    {
        return Err(SpeedLimitError::CapExceeded("partial sums beyond i128".into()));
    }
    let sampler = SeqSampler::new(p)?;
    let checkpoints: Vec<(u64, i128)> =
        (n1..=n).map(|k| (4u64.pow(k), (1i128 << (k + 1)) * d * md)).collect();
    let passes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, trial);
            let mut sum = 0i128;
            let mut next = 0usize;
            for i in 0..length {
                sum += scaled[sampler.symbol_at(trial_seed, i) as usize];
                let len_here = i + 1;
                if len_here == checkpoints[next].0 {
                    let dev = (sum * md - len_here as i128 * mn * d).abs();
                    if dev >= checkpoints[next].1 {
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
    Ok(PassRate { n1, n, length, seed, estimate: McEstimate::new(passes, trials) })
}

/// Exact segment probabilities scanned against the checkpoint ceiling
/// constant `r`: the smallest `n0` with
/// `P(|Bin(3·4^n, p) - 3·4^n·p| <= 3·2^n) < r`, plus the per-`n` values.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentScan {
    pub r: String,
    pub r_value: f64,
    pub band_integral: f64,
    pub n0: Option<u32>,
    pub segments: Vec<(u32, f64)>,
}

pub fn segment_scan(
    p: &FiniteProbabilitySpace,
    a: Symbol,
    n_max: u32,
) -> Result<(CltR, SegmentScan), SpeedLimitError> {
    let pa = unit_open_prob(p, a)?;
    let out = clt_r(&pa)?;
    let mut n0 = None;
    let mut segments = Vec::new();
    for n in 1..=n_max.min(DEFAULT_CHECKPOINT_CAP) {
        let seg = segment_band_probability(&pa, n, DEFAULT_CHECKPOINT_CAP)?;
        segments.push((n, seg.value));
        if n0.is_none() {
            let exact = seg.exact.expect("within the exact cap");
            if exact < out.r {
                n0 = Some(n);
            }
        }
    }
    let scan = SegmentScan {
        r: out.r.to_string(),
        r_value: rat_to_f64(&out.r),
        band_integral: out.band_integral,
        n0,
        segments,
    };
    Ok((out, scan))
}

//! Finite-depth witness scans for effectivized frequency convergence.
//!
//! A scan asks, for every accuracy `n` up to `n_max` and every prefix
//! length `k` from the threshold `⌈n^(2+eps)⌉` onward, whether the
//! empirical statistic stays within `1/n` of its mean. A finite prefix can
//! only ever witness three-valued answers — holds so far, violated at a
//! concrete `(n, k)`, or undetermined because the threshold lies beyond the
//! prefix — and the report keeps them separate. All comparisons are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{BoundCertificate, BoundsError, Derivation};
use crate::numeric::{ceil_pow_rational, log2_fixed, round_up};
use crate::prob::{
    rv_mean, FiniteProbabilitySpace, ProbError, RealRandomVariable, SequencePrefix, Symbol,
};
use crate::seqio::{derive_seed, SeqIoError, SeqSampler};
use crate::stats::McEstimate;
use crate::testsets::TestSetError;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("prefix too large for the fixed-point scan caps: {0}")]
    CapExceeded(String),
    #[error("entropy comparison undecided after escalation at k={k}, n={n}")]
    EntropyUndecided { n: u64, k: u64 },
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    SeqIo(#[from] SeqIoError),
    #[error(transparent)]
    TestSet(#[from] TestSetError),
}

/// `⌈n^(2+eps)⌉`, the effectivized threshold schedule.
pub use crate::bounds::f_threshold;

/// `⌈n^t⌉` for a positive rational exponent `t`.
pub fn pow_threshold(n: u64, t: &BigRational) -> u64 {
    assert!(t.is_positive(), "exponent must be positive");
    let a = t.numer().to_u64().expect("exponent numerator fits u64");
    let b = t.denom().to_u64().expect("exponent denominator fits u64");
    ceil_pow_rational(n, a, b)
}

/// Verdict for one accuracy level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum NVerdict {
    /// Every checked length satisfied the bound; nothing beyond the prefix
    /// is claimed.
    HoldsSoFar { checked_to: u64 },
    /// A concrete counterexample; `symbol` is the offending symbol for
    /// frequency scans and absent for scalar statistics.
    Violated { k: u64, symbol: Option<Symbol> },
    /// The threshold lies beyond the prefix; no length was checkable.
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessEntry {
    pub n: u64,
    /// First length this accuracy applies to.
    pub k_threshold: u64,
    #[serde(flatten)]
    pub verdict: NVerdict,
}

/// Scan outcome over a window of accuracies.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    /// The schedule parameter (`eps` for `n^(2+eps)` scans, `t` for `n^t`).
    pub param: String,
    pub prefix_len: u64,
    pub entries: Vec<WitnessEntry>,
    /// Smallest threshold `M` consistent with the prefix: no violation at
    /// any scanned accuracy `>= M`. `None` when the last scanned accuracy
    /// is itself violated. The true threshold of an infinite sequence may
    /// be larger; this is only what the prefix admits.
    pub candidate_m: Option<u64>,
}

impl WitnessReport {
    fn assemble(param: String, prefix_len: u64, entries: Vec<WitnessEntry>) -> Self {
        let mut candidate = Some(1u64);
        for e in &entries {
            if matches!(e.verdict, NVerdict::Violated { .. }) {
                candidate = if e.n < entries.last().map(|x| x.n).unwrap_or(e.n) {
                    Some(e.n + 1)
                } else {
                    None
                };
            }
        }
        WitnessReport { param, prefix_len, entries, candidate_m: candidate }
    }

    pub fn all_determined_hold(&self) -> bool {
        self.entries.iter().all(|e| !matches!(e.verdict, NVerdict::Violated { .. }))
    }
}

struct RatioDev {
    num: i128,
    den: i128,
}

/// Frequency scan: for each `n <= n_max` and each `k` from
/// `⌈n^(2+eps)⌉` to the prefix length, checks
/// `max_a |N_a(prefix k)/k - P(a)| < 1/n` exactly.
pub fn lln_witness_scan(
    s: &SequencePrefix,
    p: &FiniteProbabilitySpace,
    eps: &BigRational,
    n_max: u64,
) -> Result<WitnessReport, WitnessError> {
    if !(1..=(1u64 << 20)).contains(&n_max) {
        return Err(WitnessError::Invalid("n_max must be in [1, 2^20]".into()));
    }
    if !eps.is_positive() {
        return Err(WitnessError::Invalid(format!("eps must be positive, got {eps}")));
    }
    if s.alphabet_size() != p.len() {
        return Err(WitnessError::Invalid("prefix and space alphabets differ".into()));
    }
    let probs = p.exact_probs()?;
    // Fast path wants i128 arithmetic: |cnt*pd - k*pn| * n < k * pd.
    let len = s.len() as u64;
    let mut fracs: Vec<(i128, i128)> = Vec::with_capacity(probs.len());
    for q in &probs {
        let pn = q.numer().to_i128();
        let pd = q.denom().to_i128();
        match (pn, pd) {
            (Some(pn), Some(pd)) if pd < (1 << 20) && len < (1 << 31) => fracs.push((pn, pd)),
            _ => {
                return Err(WitnessError::CapExceeded(
                    "probabilities or prefix too large for the exact i128 scan".into(),
                ))
            }
        }
    }
    let thresholds: Vec<u64> = (1..=n_max).map(|n| f_threshold(n, eps)).collect();
    let first_threshold = thresholds[0].min(*thresholds.last().unwrap());
    let mut first_violation: Vec<Option<(u64, Symbol)>> = vec![None; n_max as usize + 1];
    let mut counts = vec![0i128; p.len()];
    let word = s.word().symbols();
    for (idx, &sym) in word.iter().enumerate() {
        counts[sym as usize] += 1;
        let k = (idx + 1) as u64;
        if k < first_threshold {
            continue;
        }
        // Worst deviation across symbols at this length.
        let mut worst: Option<(RatioDev, Symbol)> = None;
        for (a, &(pn, pd)) in fracs.iter().enumerate() {
            let num = (counts[a] * pd - k as i128 * pn).abs();
            let den = k as i128 * pd;
            let better = match &worst {
                None => true,
                Some((w, _)) => num * w.den > w.num * den,
            };
            if better {
                worst = Some((RatioDev { num, den }, a as Symbol));
            }
        }
        let (dev, sym) = worst.expect("non-empty alphabet");
        if dev.num.is_zero() {
            continue;
        }
        // dev >= 1/n  <=>  n >= den/num; the violation applies to all
        // applicable accuracies at or above that.
        let n_min = (dev.den + dev.num - 1) / dev.num;
        if n_min > n_max as i128 {
            continue;
        }
        for n in (n_min.max(1) as u64)..=n_max {
            if thresholds[n as usize - 1] <= k && first_violation[n as usize].is_none() {
                first_violation[n as usize] = Some((k, sym));
            }
        }
    }
    let entries = (1..=n_max)
        .map(|n| {
            let k_threshold = thresholds[n as usize - 1];
            let verdict = match first_violation[n as usize] {
                Some((k, sym)) => NVerdict::Violated { k, symbol: Some(sym) },
                None if k_threshold > len => NVerdict::Undetermined,
                None => NVerdict::HoldsSoFar { checked_to: len },
            };
            WitnessEntry { n, k_threshold, verdict }
        })
        .collect();
    Ok(WitnessReport::assemble(eps.to_string(), len, entries))
}

/// Random-variable scan: the same schedule applied to empirical means
/// `|Σ X(prefix)/k - E(X)| < 1/n`, exactly, with the sums carried as
/// integers over the common denominator of the values.
pub fn rv_witness_scan(
    s: &SequencePrefix,
    p: &FiniteProbabilitySpace,
    x: &RealRandomVariable,
    eps: &BigRational,
    n_max: u64,
) -> Result<WitnessReport, WitnessError> {
    let mu = rv_mean(p, x)?;
    let denom = x
        .values()
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let scaled: Vec<BigInt> = x.values().iter().map(|v| v.numer() * (&denom / v.denom())).collect();
    let increments = s.word().symbols().iter().map(|&sym| scaled[sym as usize].clone());
    scan_scaled_sums(increments, s.len() as u64, &denom, &mu, eps, n_max)
}

/// Core of the mean scans: increments arrive as integers over `denom`, and
/// the deviation test `|S/(k·denom) - mu| < 1/n` is exact.
pub(crate) fn scan_scaled_sums(
    increments: impl Iterator<Item = BigInt>,
    len: u64,
    denom: &BigInt,
    mu: &BigRational,
    eps: &BigRational,
    n_max: u64,
) -> Result<WitnessReport, WitnessError> {
    if !(1..=(1u64 << 20)).contains(&n_max) {
        return Err(WitnessError::Invalid("n_max must be in [1, 2^20]".into()));
    }
    if !eps.is_positive() {
        return Err(WitnessError::Invalid(format!("eps must be positive, got {eps}")));
    }
    let thresholds: Vec<u64> = (1..=n_max).map(|n| f_threshold(n, eps)).collect();
    let first_threshold = *thresholds.iter().min().unwrap();
    let mut first_violation: Vec<Option<u64>> = vec![None; n_max as usize + 1];
    let mut sum = BigInt::zero();
    let mu_num = mu.numer();
    let mu_den = mu.denom();
    let mut k = 0u64;
    for inc in increments {
        sum += inc;
        k += 1;
        if k < first_threshold {
            continue;
        }
        // |sum*mu_den - k*mu_num*denom| * n  >=  k*denom*mu_den  => violated
        let dev_num = (&sum * mu_den - BigInt::from(k) * mu_num * denom).magnitude().to_owned();
        if dev_num.is_zero() {
            continue;
        }
        let dev_den = (BigInt::from(k) * denom * mu_den).magnitude().to_owned();
        let n_min = dev_den.div_ceil(&dev_num);
        let n_min = n_min.to_u64().unwrap_or(u64::MAX);
        if n_min > n_max {
            continue;
        }
        for n in n_min.max(1)..=n_max {
            if thresholds[n as usize - 1] <= k && first_violation[n as usize].is_none() {
                first_violation[n as usize] = Some(k);
            }
        }
    }
    let entries = (1..=n_max)
        .map(|n| {
            let k_threshold = thresholds[n as usize - 1];
            let verdict = match first_violation[n as usize] {
                Some(k) => NVerdict::Violated { k, symbol: None },
                None if k_threshold > len => NVerdict::Undetermined,
                None => NVerdict::HoldsSoFar { checked_to: len },
            };
            WitnessEntry { n, k_threshold, verdict }
        })
        .collect();
    Ok(WitnessReport::assemble(eps.to_string(), len, entries))
}

/// Entropy-rate scan: positivity of every prefix measure plus the
/// per-symbol-average of `-log2 P` against `H(P)`.
#[derive(Debug, Clone, Serialize)]
pub struct AepReport {
    /// First occurrence of a zero-probability symbol, if any (1-based
    /// position); prefix measures vanish from there on.
    pub positivity_failure: Option<(usize, Symbol)>,
    pub report: WitnessReport,
}

/// Fixed-point precision of the streaming entropy scan.
const AEP_BITS: u32 = 80;
const AEP_ESCALATED_BITS: u32 = 224;

struct AepTable {
    /// -log2 P(a), scaled by 2^bits (nonnegative).
    neg_log: Vec<i128>,
    err_units: i128,
    entropy: i128,
    entropy_err: i128,
    bits: u32,
}

fn aep_table(
    probs: &[BigRational],
    support: &[bool],
    bits: u32,
) -> Result<AepTable, WitnessError> {
    let mut neg_log = vec![0i128; probs.len()];
    let mut err: i128 = 0;
    for (i, q) in probs.iter().enumerate() {
        if !support[i] {
            continue;
        }
        let fl = log2_fixed(q, bits);
        let m = (-fl.mantissa)
            .to_i128()
            .ok_or_else(|| WitnessError::CapExceeded("log magnitude beyond i128 caps".into()))?;
        neg_log[i] = m;
        err = err.max(fl.err_units as i128);
    }
    let h = crate::prob::shannon_entropy_from_probs(probs, bits + 2)?;
    let scale = BigRational::from_integer(BigInt::one() << bits);
    let mid = (h.midpoint() * &scale).round().to_integer();
    let half_w = (h.width() * &scale / BigRational::from_integer(BigInt::from(2))).ceil();
    let entropy = mid
        .to_i128()
        .ok_or_else(|| WitnessError::CapExceeded("entropy beyond i128 caps".into()))?;
    let entropy_err = half_w.to_integer().to_i128().unwrap_or(i128::MAX / 2) + 1;
    Ok(AepTable { neg_log, err_units: err, entropy, entropy_err, bits })
}

pub fn aep_scan(
    s: &SequencePrefix,
    p: &FiniteProbabilitySpace,
    eps: &BigRational,
    n_max: u64,
) -> Result<AepReport, WitnessError> {
    if !(1..=(1u64 << 12)).contains(&n_max) {
        return Err(WitnessError::Invalid("n_max must be in [1, 4096]".into()));
    }
    let probs = p.exact_probs()?;
    let support: Vec<bool> = probs.iter().map(|q| q.is_positive()).collect();
    let word = s.word().symbols();
    let positivity_failure = word
        .iter()
        .position(|&sym| !support[sym as usize])
        .map(|idx| (idx + 1, word[idx]));
    // Only the positive-measure part of the prefix is scannable.
    let scan_len = positivity_failure.map(|(pos, _)| pos - 1).unwrap_or(word.len()) as u64;
    if scan_len > (1 << 32) {
        return Err(WitnessError::CapExceeded("prefix beyond the 2^32 scan cap".into()));
    }
    let table = aep_table(&probs, &support, AEP_BITS)?;
    let max_mag = table.neg_log.iter().copied().max().unwrap_or(0).max(table.entropy.abs());
    if (scan_len as i128)
        .checked_mul(max_mag + (1i128 << table.bits))
        .and_then(|v| v.checked_mul(n_max as i128))
        .is_none()
    {
        return Err(WitnessError::CapExceeded("fixed-point magnitudes beyond i128".into()));
    }

    let thresholds: Vec<u64> = (1..=n_max).map(|n| f_threshold(n, eps)).collect();
    let first_threshold = *thresholds.iter().min().unwrap();
    let mut first_violation: Vec<Option<u64>> = vec![None; n_max as usize + 1];
    let mut ambiguous: Vec<(u64, u64)> = Vec::new(); // (n, k) needing escalation
    let mut sum: i128 = 0; // Σ -log2 P(symbol), scaled 2^bits
    let mut err_acc: i128 = 0;
    let bound_unit = 1i128 << table.bits;
    for idx in 0..scan_len {
        let sym = word[idx as usize] as usize;
        sum += table.neg_log[sym];
        err_acc += table.err_units;
        let k = idx + 1;
        if k < first_threshold {
            continue;
        }
        // | sum/k - H | < 1/n  at scale 2^bits:
        // | sum - k·H | · n  vs  k·2^bits, with margin (err_acc + k·H_err)·n
        let dev = (sum - k as i128 * table.entropy).abs();
        let margin = err_acc + k as i128 * table.entropy_err;
        let bound = k as i128 * bound_unit;
        for n in 1..=n_max {
            if thresholds[n as usize - 1] > k || first_violation[n as usize].is_some() {
                continue;
            }
            let n_i = n as i128;
            if (dev + margin) * n_i < bound {
                // holds at this k
            } else if (dev - margin) * n_i >= bound {
                first_violation[n as usize] = Some(k);
            } else {
                ambiguous.push((n, k));
            }
        }
    }

    // One escalation pass at higher precision for boundary cases; big-int
    // fixed point, since 224-bit mantissas outgrow i128.
    if !ambiguous.is_empty() {
        let bits = AEP_ESCALATED_BITS;
        let mut neg_log: Vec<BigInt> = vec![BigInt::zero(); probs.len()];
        let mut per_err = BigInt::zero();
        for (i, q) in probs.iter().enumerate() {
            if support[i] {
                let fl = log2_fixed(q, bits);
                neg_log[i] = -fl.mantissa;
                per_err = per_err.max(BigInt::from(fl.err_units));
            }
        }
        let h = crate::prob::shannon_entropy_from_probs(&probs, bits + 2)?;
        let scale = BigRational::from_integer(BigInt::one() << bits);
        let h_mid = (h.midpoint() * &scale).round().to_integer();
        let h_err = (h.width() * &scale).ceil().to_integer() + BigInt::one();
        for &(n, k) in &ambiguous {
            if first_violation[n as usize].map(|v| v <= k).unwrap_or(false) {
                continue;
            }
            let mut sum = BigInt::zero();
            for idx in 0..k {
                sum += &neg_log[word[idx as usize] as usize];
            }
            let dev = (&sum - BigInt::from(k) * &h_mid).magnitude().to_owned();
            let margin: num_bigint::BigUint =
                (BigInt::from(k) * (&per_err + &h_err)).magnitude().clone();
            let bound = (num_bigint::BigUint::from(k) << bits) * n;
            if (&dev + &margin) * n < bound {
                // resolved: holds
            } else if dev > margin && (&dev - &margin) * n >= bound {
                let prev = first_violation[n as usize];
                first_violation[n as usize] = Some(prev.map_or(k, |v| v.min(k)));
            } else {
                return Err(WitnessError::EntropyUndecided { n, k });
            }
        }
    }

    let len = s.len() as u64;
    let entries = (1..=n_max)
        .map(|n| {
            let k_threshold = thresholds[n as usize - 1];
            let verdict = match first_violation[n as usize] {
                Some(k) => NVerdict::Violated { k, symbol: None },
                None if k_threshold > scan_len => NVerdict::Undetermined,
                None => NVerdict::HoldsSoFar { checked_to: scan_len },
            };
            WitnessEntry { n, k_threshold, verdict }
        })
        .collect();
    Ok(AepReport {
        positivity_failure,
        report: WitnessReport::assemble(eps.to_string(), len, entries),
    })
}

/// Certified upper bound on the probability that a sampled sequence fails
/// the frequency scan somewhere in the window: one Hoeffding geometric tail
/// per accuracy, `union_factor` per-symbol union terms each.
pub fn scan_failure_certificate(
    t: &BigRational,
    n_lo: u64,
    n_hi: u64,
    union_factor: u64,
) -> Result<BoundCertificate, WitnessError> {
    if n_lo < 1 || n_lo > n_hi {
        return Err(WitnessError::Invalid(format!("need 1 <= n_lo <= n_hi, got [{n_lo}, {n_hi}]")));
    }
    if t <= &BigRational::from_integer(BigInt::from(2)) {
        return Err(WitnessError::Invalid(
            "the Hoeffding window sum needs exponent t > 2".into(),
        ));
    }
    let mut terms = Vec::new();
    let mut total = 0.0f64;
    for n in n_lo..=n_hi {
        let f = pow_threshold(n, t);
        // Σ_{k >= f} 2 exp(-2k/n²) = 2 · geometric tail with c = 1/2
        let tail = crate::bounds::geometric_tail(n, f - 1, 0.5)?;
        let term = round_up(2.0 * union_factor as f64 * tail.exact);
        terms.push(term);
        total += term;
    }
    Ok(BoundCertificate {
        quantity: format!(
            "P(exists n in [{n_lo},{n_hi}], k >= ceil(n^{t}): empirical deviation >= 1/n)"
        ),
        value: round_up(total),
        derivation: Derivation::WindowHoeffdingSum {
            n_lo,
            n_hi,
            exponent: t.to_string(),
            terms,
        },
    })
}

/// Windows used by the dichotomy experiment.
#[derive(Debug, Clone, Copy)]
pub struct DichotomyWindows {
    /// Accuracy window for the scan event (exponents above 2).
    pub scan_n_lo: u64,
    pub scan_n_hi: u64,
    /// Checkpoint index window for the sustained-checkpoint event (t <= 2).
    pub checkpoint_lo: u32,
    pub checkpoint_hi: u32,
}

impl Default for DichotomyWindows {
    fn default() -> Self {
        DichotomyWindows { scan_n_lo: 4, scan_n_hi: 10, checkpoint_lo: 1, checkpoint_hi: 5 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyRow {
    pub t: String,
    pub event: String,
    pub window_lo: u64,
    pub window_hi: u64,
    pub length: u64,
    pub seed: u64,
    #[serde(flatten)]
    pub estimate: McEstimate,
}

/// Samples `trials` sequences and measures, per exponent `t`, the fraction
/// satisfying the scan condition (`|N_a/k - P(a)| < 1/n` for all window
/// accuracies and all `k` in `[⌈n^t⌉, length]`). Exponents `t <= 2`
/// evaluate the embedded sustained-checkpoint event (`|N_a(4^j) - 4^j P(a)|
/// <= 2^j` over the checkpoint window) instead, which is what the
/// convergence bound at exponent 2 constrains.
pub fn dichotomy_experiment(
    p: &FiniteProbabilitySpace,
    a: Symbol,
    t_grid: &[BigRational],
    trials: u64,
    length: u64,
    seed: u64,
    windows: DichotomyWindows,
) -> Result<Vec<DichotomyRow>, WitnessError> {
    p.check_symbol(a)?;
    let pa = p.exact_prob(a)?;
    if pa <= BigRational::zero() || pa >= BigRational::one() {
        return Err(WitnessError::Invalid(format!("need 0 < P(a) < 1, got {pa}")));
    }
    if trials == 0 {
        return Ok(Vec::new());
    }
    let sampler = SeqSampler::new(p)?;
    let pn = pa.numer().to_i128().ok_or_else(|| WitnessError::CapExceeded("p numerator".into()))?;
    let pd = pa.denom().to_i128().ok_or_else(|| WitnessError::CapExceeded("p denominator".into()))?;
    if pd >= (1 << 30) || length >= (1 << 40) {
        return Err(WitnessError::CapExceeded("denominator or length beyond i128 scan caps".into()));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    // Per exponent: either scan thresholds per accuracy, or checkpoint mode.
    enum EventPlan {
        Scan { thresholds: Vec<(u64, u64)> }, // (n, first k)
        Checkpoint,
    }
    let plans: Vec<EventPlan> = t_grid
        .iter()
        .map(|t| {
            if t > &two {
                let thresholds = (windows.scan_n_lo..=windows.scan_n_hi)
                    .map(|n| (n, pow_threshold(n, t)))
                    .collect();
                EventPlan::Scan { thresholds }
            } else {
                EventPlan::Checkpoint
            }
        })
        .collect();
    let checkpoints: Vec<u64> =
        (windows.checkpoint_lo..=windows.checkpoint_hi).map(|j| 4u64.pow(j)).collect();

    let pass_counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, trial);
            let mut pass: Vec<bool> = vec![true; plans.len()];
            // Per-plan cursors: the binding accuracy (largest n whose
            // threshold is reached) only changes at threshold boundaries.
            let mut binding: Vec<i128> = vec![0; plans.len()];
            let mut cursor: Vec<usize> = vec![0; plans.len()];
            let mut chk_cursor: Vec<usize> = vec![0; plans.len()];
            let mut count = 0i128;
            for i in 0..length {
                let sym = sampler.symbol_at(trial_seed, i);
                if sym == a {
                    count += 1;
                }
                let k = (i + 1) as i128;
                let dev = (count * pd - k * pn).abs();
                for (pi, (plan, ok)) in plans.iter().zip(pass.iter_mut()).enumerate() {
                    if !*ok {
                        continue;
                    }
                    match plan {
                        EventPlan::Scan { thresholds } => {
                            while cursor[pi] < thresholds.len()
                                && thresholds[cursor[pi]].1 <= k as u64
                            {
                                binding[pi] = thresholds[cursor[pi]].0 as i128;
                                cursor[pi] += 1;
                            }
                            // fail when dev >= 1/n: dev*n >= k*pd
                            if binding[pi] > 0 && dev * binding[pi] >= k * pd {
                                *ok = false;
                            }
                        }
                        EventPlan::Checkpoint => {
                            let c = chk_cursor[pi];
                            if c < checkpoints.len() && checkpoints[c] == k as u64 {
                                let band = 1i128 << (windows.checkpoint_lo + c as u32);
                                if dev > band * pd {
                                    *ok = false;
                                }
                                chk_cursor[pi] += 1;
                            }
                        }
                    }
                }
            }
            let mut bits = vec![0u64; plans.len()];
            for (b, ok) in bits.iter_mut().zip(pass.iter()) {
                *b = *ok as u64;
            }
            bits
        })
        .reduce(
            || vec![0u64; plans.len()],
            |mut acc, row| {
                for (a, b) in acc.iter_mut().zip(row.iter()) {
                    *a += b;
                }
                acc
            },
        );

    Ok(t_grid
        .iter()
        .zip(plans.iter())
        .zip(pass_counts.iter())
        .map(|((t, plan), &passes)| {
            let (event, lo, hi) = match plan {
                EventPlan::Scan { .. } => {
                    ("scan".to_string(), windows.scan_n_lo, windows.scan_n_hi)
                }
                EventPlan::Checkpoint => (
                    "checkpoint".to_string(),
                    windows.checkpoint_lo as u64,
                    windows.checkpoint_hi as u64,
                ),
            };
            DichotomyRow {
                t: t.to_string(),
                event,
                window_lo: lo,
                window_hi: hi,
                length,
                seed,
                estimate: McEstimate::new(passes, trials),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;
    use crate::seqio::sample_sequence;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn prefix(bits: &[u32]) -> SequencePrefix {
        SequencePrefix::from_word(crate::prob::Word::new(bits.to_vec()), 2).unwrap()
    }

    #[test]
    fn constant_sequence_with_point_mass_holds_everywhere() {
        let alphabet = Alphabet::new(vec!["a".into(), "b".into()]).unwrap();
        let p = FiniteProbabilitySpace::exact(alphabet, vec![rat(1, 1), rat(0, 1)]).unwrap();
        let s = SequencePrefix::from_word(crate::prob::Word::new(vec![0; 500]), 2).unwrap();
        let rep = lln_witness_scan(&s, &p, &rat(1, 1), 5).unwrap();
        for e in &rep.entries {
            assert!(matches!(e.verdict, NVerdict::HoldsSoFar { .. } | NVerdict::Undetermined));
        }
        assert_eq!(rep.candidate_m, Some(1));
    }

    #[test]
    fn constant_ones_against_fair_coin_violates_everywhere_applicable() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let s = SequencePrefix::from_word(crate::prob::Word::new(vec![1; 2000]), 2).unwrap();
        let rep = lln_witness_scan(&s, &p, &rat(1, 1), 6).unwrap();
        for e in &rep.entries {
            if e.k_threshold <= 2000 && e.n >= 2 {
                match e.verdict {
                    NVerdict::Violated { k, .. } => assert_eq!(k, e.k_threshold),
                    ref v => panic!("expected violation at n={}, got {v:?}", e.n),
                }
            }
        }
        assert_eq!(rep.candidate_m, None, "violated at the last scanned accuracy");
    }

    #[test]
    fn scan_matches_independent_recount() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let s = sample_sequence(&p, 50_000, 99).unwrap();
        let eps = rat(1, 1);
        let n_max = 7u64;
        let rep = lln_witness_scan(&s, &p, &eps, n_max).unwrap();
        // straightforward rescan
        for n in 1..=n_max {
            let f = f_threshold(n, &eps);
            let mut found: Option<u64> = None;
            let mut c0 = 0i64;
            for (i, &sym) in s.word().symbols().iter().enumerate() {
                if sym == 0 {
                    c0 += 1;
                }
                let k = (i + 1) as u64;
                if k < f {
                    continue;
                }
                // deviation of either symbol is the same for binary spaces
                let dev = (rat(c0, 1) / rat(k as i64, 1) - rat(1, 2)).abs();
                if dev >= rat(1, n as i64) && found.is_none() {
                    found = Some(k);
                }
            }
            let entry = &rep.entries[n as usize - 1];
            match (found, &entry.verdict) {
                (Some(k), NVerdict::Violated { k: k2, .. }) => assert_eq!(k, *k2, "n={n}"),
                (None, NVerdict::HoldsSoFar { .. }) if f <= 50_000 => {}
                (None, NVerdict::Undetermined) if f > 50_000 => {}
                other => panic!("mismatch at n={n}: {other:?}"),
            }
        }
    }

    #[test]
    fn rv_indicator_scan_matches_symbol_scan() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 3)).unwrap();
        let s = sample_sequence(&p, 3_000, 5).unwrap();
        let x = RealRandomVariable::indicator(2, 1);
        let eps = rat(1, 2);
        let rv = rv_witness_scan(&s, &p, &x, &eps, 6).unwrap();
        // For binary spaces the symbol-1 deviation equals the max deviation,
        // so the frequency scan and the indicator scan agree verdict for
        // verdict.
        let sym = lln_witness_scan(&s, &p, &eps, 6).unwrap();
        for (a, b) in rv.entries.iter().zip(sym.entries.iter()) {
            match (&a.verdict, &b.verdict) {
                (NVerdict::Violated { k: k1, .. }, NVerdict::Violated { k: k2, .. }) => {
                    assert_eq!(k1, k2)
                }
                (x, y) => assert_eq!(
                    std::mem::discriminant(x),
                    std::mem::discriminant(y),
                    "n={}",
                    a.n
                ),
            }
        }
    }

    #[test]
    fn rv_constant_never_deviates() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let x = RealRandomVariable::with_auto_envelope(vec![rat(3, 7), rat(3, 7)]);
        let s = sample_sequence(&p, 2_000, 1).unwrap();
        let rep = rv_witness_scan(&s, &p, &x, &rat(1, 1), 4).unwrap();
        assert!(rep.all_determined_hold());
    }

    #[test]
    fn rv_oscillating_mean_shrinks() {
        // X = (-1, 1) over alternating 0101…: partial sums stay in {-1, 0},
        // so |mean| <= 1/k. The lone strict-inequality failure is (n=1, k=1)
        // where |S_1| = 1 = 1/n; every accuracy n >= 2 starts at k = n^3 > n
        // and holds throughout.
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let x = RealRandomVariable::with_auto_envelope(vec![rat(-1, 1), rat(1, 1)]);
        let bits: Vec<u32> = (0..4096).map(|i| (i % 2) as u32).collect();
        let s = prefix(&bits);
        let rep = rv_witness_scan(&s, &p, &x, &rat(1, 1), 8).unwrap();
        assert_eq!(rep.entries[0].verdict, NVerdict::Violated { k: 1, symbol: None });
        for e in &rep.entries[1..] {
            assert!(matches!(e.verdict, NVerdict::HoldsSoFar { .. }), "n={}", e.n);
        }
        assert_eq!(rep.candidate_m, Some(2));
    }

    #[test]
    fn aep_point_mass_holds() {
        let alphabet = Alphabet::new(vec!["a".into(), "b".into()]).unwrap();
        let p = FiniteProbabilitySpace::exact(alphabet, vec![rat(1, 1), rat(0, 1)]).unwrap();
        let s = SequencePrefix::from_word(crate::prob::Word::new(vec![0; 300]), 2).unwrap();
        let rep = aep_scan(&s, &p, &rat(1, 1), 4).unwrap();
        assert!(rep.positivity_failure.is_none());
        assert!(rep.report.all_determined_hold());
    }

    #[test]
    fn aep_positivity_fails_at_first_zero_symbol() {
        let alphabet = Alphabet::new(vec!["a".into(), "b".into()]).unwrap();
        let p = FiniteProbabilitySpace::exact(alphabet, vec![rat(1, 1), rat(0, 1)]).unwrap();
        let s = SequencePrefix::from_word(crate::prob::Word::new(vec![0, 0, 1, 0]), 2).unwrap();
        let rep = aep_scan(&s, &p, &rat(1, 1), 3).unwrap();
        assert_eq!(rep.positivity_failure, Some((3, 1)));
    }

    #[test]
    fn aep_matches_direct_recount_on_sampled_prefix() {
        let alphabet = Alphabet::new(vec!["a".into(), "b".into()]).unwrap();
        let p =
            FiniteProbabilitySpace::exact(alphabet, vec![rat(1, 4), rat(3, 4)]).unwrap();
        let s = sample_sequence(&p, 20_000, 7).unwrap();
        let eps = rat(1, 1);
        let rep = aep_scan(&s, &p, &eps, 6).unwrap();
        assert!(rep.positivity_failure.is_none());
        // Direct recount in f64 (margins are enormous compared to 1e-12).
        let h = 0.811_278_124_459_132_8f64;
        let lg = [0.25f64.log2(), 0.75f64.log2()];
        let mut acc = 0.0f64;
        let mut first_violation: Vec<Option<u64>> = vec![None; 7];
        for (i, &sym) in s.word().symbols().iter().enumerate() {
            acc -= lg[sym as usize];
            let k = (i + 1) as u64;
            for n in 1..=6u64 {
                if k >= f_threshold(n, &eps)
                    && (acc / k as f64 - h).abs() >= 1.0 / n as f64
                    && first_violation[n as usize].is_none()
                {
                    first_violation[n as usize] = Some(k);
                }
            }
        }
        for e in &rep.report.entries {
            match e.verdict {
                NVerdict::Violated { k, .. } => {
                    assert_eq!(first_violation[e.n as usize], Some(k), "n={}", e.n)
                }
                _ => assert_eq!(first_violation[e.n as usize], None, "n={}", e.n),
            }
        }
    }

    #[test]
    fn scan_certificate_is_positive_and_small() {
        let cert = scan_failure_certificate(&rat(3, 1), 4, 10, 1).unwrap();
        assert!(cert.value > 0.0 && cert.value < 0.01);
        // more accuracies only add mass
        let wider = scan_failure_certificate(&rat(3, 1), 3, 10, 1).unwrap();
        assert!(wider.value > cert.value);
    }

    #[test]
    fn dichotomy_monotone_and_empty() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        assert!(dichotomy_experiment(
            &p,
            1,
            &[rat(3, 1)],
            0,
            1000,
            1,
            DichotomyWindows::default()
        )
        .unwrap()
        .is_empty());

        let rows = dichotomy_experiment(
            &p,
            1,
            &[rat(2, 1), rat(5, 2), rat(3, 1)],
            200,
            5000,
            42,
            DichotomyWindows { scan_n_lo: 4, scan_n_hi: 8, checkpoint_lo: 1, checkpoint_hi: 5 },
        )
        .unwrap();
        assert_eq!(rows[0].event, "checkpoint");
        assert_eq!(rows[1].event, "scan");
        // pass rate nondecreasing in t across the grid
        assert!(rows[0].estimate.rate <= rows[1].estimate.rate + 0.05);
        assert!(rows[1].estimate.rate <= rows[2].estimate.rate + 1e-12);
    }

    #[test]
    fn dichotomy_is_deterministic_across_worker_counts() {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 2)).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                dichotomy_experiment(
                    &p,
                    1,
                    &[rat(3, 1)],
                    64,
                    2000,
                    7,
                    DichotomyWindows::default(),
                )
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

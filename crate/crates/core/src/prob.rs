//! Finite probability spaces, words, and exact cylinder-set measures.
//!
//! Symbols are small integer indices into an alphabet name table; a
//! `FiniteProbabilitySpace` assigns each symbol a probability that is either
//! an exact rational or a computable real refined on demand. Cylinder
//! measures of words are products of symbol probabilities, so exact mode
//! yields exact rationals and interval mode yields certified enclosures.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use thiserror::Error;

use crate::compreal::{CompReal, CompRealError};
use crate::numeric::{bigrat_pow, log2_interval, rat_to_f64, RatInterval};

pub type Symbol = u32;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("alphabet must be non-empty")]
    EmptyAlphabet,
    #[error("duplicate symbol name `{0}`")]
    DuplicateSymbolName(String),
    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: Symbol, alphabet: usize },
    #[error("expected {expected} probabilities, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("negative probability {0}")]
    NegativeProbability(String),
    #[error("probabilities sum to {0}, not 1")]
    SumNotOne(String),
    #[error("interval-mode probability sum excludes 1 at the configured budget")]
    IntervalSumExcludesOne,
    #[error("operation `{0}` requires an exact-mode probability space")]
    ExactModeRequired(&'static str),
    #[error("contract requires two distinct symbols")]
    SameSymbol,
    #[error("random-variable envelope {envelope} violated by value {value}")]
    EnvelopeViolation { envelope: String, value: String },
    #[error("unknown symbol name `{0}`")]
    UnknownSymbolName(String),
    #[error(transparent)]
    Precision(#[from] CompRealError),
}

/// Ordered table of distinct symbol names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self, ProbError> {
        if names.is_empty() {
            return Err(ProbError::EmptyAlphabet);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(ProbError::DuplicateSymbolName(n.clone()));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn binary() -> Self {
        Alphabet { names: vec!["0".into(), "1".into()] }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s as usize]
    }

    pub fn index_of(&self, name: &str) -> Result<Symbol, ProbError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as Symbol)
            .ok_or_else(|| ProbError::UnknownSymbolName(name.to_string()))
    }

    /// Parses a word: one character per symbol when all names are single
    /// characters, whitespace-separated tokens otherwise.
    pub fn parse_word(&self, text: &str) -> Result<Word, ProbError> {
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let mut syms = Vec::new();
        if single && !text.contains(char::is_whitespace) {
            for ch in text.chars() {
                syms.push(self.index_of(&ch.to_string())?);
            }
        } else {
            for tok in text.split_whitespace() {
                syms.push(self.index_of(tok)?);
            }
        }
        Ok(Word::new(syms))
    }

    pub fn render(&self, w: &Word) -> String {
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let sep = if single { "" } else { " " };
        w.symbols().iter().map(|&s| self.name(s)).collect::<Vec<_>>().join(sep)
    }
}

/// Probability of one symbol: exact rational or computable real.
#[derive(Debug, Clone)]
pub enum ProbValue {
    Exact(BigRational),
    Interval(CompReal),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Interval,
}

/// A finite probability space on an alphabet.
#[derive(Debug, Clone)]
pub struct FiniteProbabilitySpace {
    alphabet: Alphabet,
    probs: Vec<ProbValue>,
    /// Refinement budget (in bits) for interval-mode comparisons.
    budget_bits: u32,
}

pub const DEFAULT_BUDGET_BITS: u32 = 192;

impl FiniteProbabilitySpace {
    pub fn exact(alphabet: Alphabet, probs: Vec<BigRational>) -> Result<Self, ProbError> {
        if probs.len() != alphabet.len() {
            return Err(ProbError::LengthMismatch { expected: alphabet.len(), got: probs.len() });
        }
        let mut sum = BigRational::zero();
        for p in &probs {
            if p.is_negative() {
                return Err(ProbError::NegativeProbability(p.to_string()));
            }
            sum += p;
        }
        if !sum.is_one() {
            return Err(ProbError::SumNotOne(sum.to_string()));
        }
        Ok(FiniteProbabilitySpace {
            alphabet,
            probs: probs.into_iter().map(ProbValue::Exact).collect(),
            budget_bits: DEFAULT_BUDGET_BITS,
        })
    }

    /// Uniform space on the given alphabet.
    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        let p = BigRational::new(BigInt::one(), BigInt::from(n));
        Self::exact(alphabet, vec![p; n]).expect("uniform distribution is valid")
    }

    /// Binary space with P(1) = p.
    pub fn bernoulli(p: BigRational) -> Result<Self, ProbError> {
        let q = BigRational::one() - &p;
        Self::exact(Alphabet::binary(), vec![q, p])
    }

    pub fn interval(
        alphabet: Alphabet,
        probs: Vec<CompReal>,
        budget_bits: u32,
    ) -> Result<Self, ProbError> {
        if probs.len() != alphabet.len() {
            return Err(ProbError::LengthMismatch { expected: alphabet.len(), got: probs.len() });
        }
        // Reject values that are provably negative, and require the interval
        // sum to contain 1 at a moderate refinement.
        let check_bits = 48.min(budget_bits);
        let mut sum_lo = BigRational::zero();
        let mut sum_hi = BigRational::zero();
        for p in &probs {
            let iv = p.interval(check_bits);
            if iv.hi.is_negative() {
                return Err(ProbError::NegativeProbability(rat_to_f64(&iv.hi).to_string()));
            }
            sum_lo += &iv.lo;
            sum_hi += &iv.hi;
        }
        let one = BigRational::one();
        if sum_lo > one || sum_hi < one {
            return Err(ProbError::IntervalSumExcludesOne);
        }
        Ok(FiniteProbabilitySpace {
            alphabet,
            probs: probs.into_iter().map(ProbValue::Interval).collect(),
            budget_bits,
        })
    }

    pub fn mode(&self) -> Mode {
        if self.probs.iter().any(|p| matches!(p, ProbValue::Interval(_))) {
            Mode::Interval
        } else {
            Mode::Exact
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn budget_bits(&self) -> u32 {
        self.budget_bits
    }

    pub fn set_budget_bits(&mut self, bits: u32) {
        self.budget_bits = bits;
    }

    pub fn check_symbol(&self, s: Symbol) -> Result<(), ProbError> {
        if (s as usize) < self.len() {
            Ok(())
        } else {
            Err(ProbError::SymbolOutOfRange { symbol: s, alphabet: self.len() })
        }
    }

    /// Exact probabilities, or an error in interval mode.
    pub fn exact_probs(&self) -> Result<Vec<BigRational>, ProbError> {
        self.probs
            .iter()
            .map(|p| match p {
                ProbValue::Exact(r) => Ok(r.clone()),
                ProbValue::Interval(_) => Err(ProbError::ExactModeRequired("exact_probs")),
            })
            .collect()
    }

    pub fn exact_prob(&self, s: Symbol) -> Result<BigRational, ProbError> {
        self.check_symbol(s)?;
        match &self.probs[s as usize] {
            ProbValue::Exact(r) => Ok(r.clone()),
            ProbValue::Interval(_) => Err(ProbError::ExactModeRequired("exact_prob")),
        }
    }

    pub fn prob_value(&self, s: Symbol) -> &ProbValue {
        &self.probs[s as usize]
    }

    /// Enclosure of P(s), clamped to [0, 1].
    pub fn prob_interval(&self, s: Symbol, bits: u32) -> RatInterval {
        match &self.probs[s as usize] {
            ProbValue::Exact(r) => RatInterval::point(r.clone()),
            ProbValue::Interval(c) => {
                let iv = c.interval(bits);
                let lo = if iv.lo.is_negative() { BigRational::zero() } else { iv.lo };
                let hi = if iv.hi > BigRational::one() { BigRational::one() } else { iv.hi };
                RatInterval::new(lo, hi)
            }
        }
    }

    /// Support of an exact-mode space: symbols with positive probability.
    pub fn support(&self) -> Result<Vec<Symbol>, ProbError> {
        let probs = self.exact_probs()?;
        Ok((0..self.len() as Symbol).filter(|&s| probs[s as usize].is_positive()).collect())
    }
}

/// A finite word over an alphabet; the empty word is allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    symbols: Vec<Symbol>,
}

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word { symbols }
    }

    pub fn empty() -> Self {
        Word { symbols: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.len() <= other.len() && other.symbols[..self.len()] == self.symbols[..]
    }
}

/// A word together with incrementally maintained per-symbol counts.
#[derive(Debug, Clone)]
pub struct SequencePrefix {
    word: Word,
    counts: Vec<u64>,
}

impl SequencePrefix {
    pub fn new(alphabet_size: usize) -> Self {
        SequencePrefix { word: Word::empty(), counts: vec![0; alphabet_size] }
    }

    pub fn from_word(word: Word, alphabet_size: usize) -> Result<Self, ProbError> {
        let mut s = SequencePrefix::new(alphabet_size);
        for &sym in word.symbols() {
            s.push(sym)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, sym: Symbol) -> Result<(), ProbError> {
        if (sym as usize) >= self.counts.len() {
            return Err(ProbError::SymbolOutOfRange { symbol: sym, alphabet: self.counts.len() });
        }
        self.word.symbols.push(sym);
        self.counts[sym as usize] += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// O(1) occurrence count of `a` in the stored word.
pub fn count_occurrences(s: &SequencePrefix, a: Symbol) -> Result<u64, ProbError> {
    if (a as usize) >= s.alphabet_size() {
        return Err(ProbError::SymbolOutOfRange { symbol: a, alphabet: s.alphabet_size() });
    }
    Ok(s.counts[a as usize])
}

/// A set of words none of which is a proper prefix of another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixFreeFamily {
    words: Vec<Word>,
}

impl PrefixFreeFamily {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Minimal elements of `words` under the prefix order. The generated open
/// set of infinite extensions is unchanged: a word has a prefix in the input
/// iff it has one in the output.
pub fn prefix_free_reduce(words: &[Word]) -> PrefixFreeFamily {
    let mut sorted: Vec<Word> = words.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut kept: Vec<Word> = Vec::new();
    for w in sorted {
        // In lexicographic order all extensions of a kept word form a
        // contiguous block, so only the most recently kept word can be a
        // prefix of `w`.
        if let Some(last) = kept.last() {
            if last.is_prefix_of(&w) {
                continue;
            }
        }
        kept.push(w);
    }
    PrefixFreeFamily { words: kept }
}

/// A cylinder-set measure: exact in exact mode, an enclosure otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Exact(BigRational),
    Enclosure(RatInterval),
}

impl Measure {
    pub fn interval(&self) -> RatInterval {
        match self {
            Measure::Exact(r) => RatInterval::point(r.clone()),
            Measure::Enclosure(iv) => iv.clone(),
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Measure::Exact(r) => Some(r),
            Measure::Enclosure(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Measure::Exact(r) => rat_to_f64(r),
            Measure::Enclosure(iv) => iv.to_f64(),
        }
    }
}

/// λ_P of the cylinder of `w`: the product of per-symbol probabilities.
/// The empty word has measure 1.
pub fn word_measure(p: &FiniteProbabilitySpace, w: &Word) -> Result<Measure, ProbError> {
    let mut counts = vec![0u64; p.len()];
    for &s in w.symbols() {
        p.check_symbol(s)?;
        counts[s as usize] += 1;
    }
    match p.mode() {
        Mode::Exact => {
            let probs = p.exact_probs()?;
            let mut m = BigRational::one();
            for (i, &c) in counts.iter().enumerate() {
                if c > 0 {
                    m *= bigrat_pow(&probs[i], c);
                }
            }
            Ok(Measure::Exact(m))
        }
        Mode::Interval => {
            let bits = p.budget_bits();
            let mut lo = BigRational::one();
            let mut hi = BigRational::one();
            for (i, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let iv = p.prob_interval(i as Symbol, bits);
                    lo *= bigrat_pow(&iv.lo, c);
                    hi *= bigrat_pow(&iv.hi, c);
                }
            }
            Ok(Measure::Enclosure(RatInterval::new(lo, hi)))
        }
    }
}

/// λ_P of the open set generated by a finite word family: reduce to the
/// prefix-free minimal elements, then sum word measures. The empty family
/// has measure 0.
pub fn family_measure(p: &FiniteProbabilitySpace, words: &[Word]) -> Result<Measure, ProbError> {
    let reduced = prefix_free_reduce(words);
    match p.mode() {
        Mode::Exact => {
            let mut sum = BigRational::zero();
            for w in reduced.words() {
                match word_measure(p, w)? {
                    Measure::Exact(m) => sum += m,
                    Measure::Enclosure(_) => unreachable!("exact mode"),
                }
            }
            Ok(Measure::Exact(sum))
        }
        Mode::Interval => {
            let mut lo = BigRational::zero();
            let mut hi = BigRational::zero();
            for w in reduced.words() {
                let iv = word_measure(p, w)?.interval();
                lo += iv.lo;
                hi += iv.hi;
            }
            if hi > BigRational::one() {
                hi = BigRational::one();
            }
            Ok(Measure::Enclosure(RatInterval::new(lo, hi)))
        }
    }
}

/// Exact-rational entropy enclosure from a probability vector.
pub(crate) fn shannon_entropy_from_probs(
    probs: &[BigRational],
    bits: u32,
) -> Result<RatInterval, ProbError> {
    let per_term_bits = bits + (usize::BITS - probs.len().leading_zeros()) + 2;
    let mut acc = RatInterval::point(BigRational::zero());
    for q in probs {
        if q.is_zero() {
            continue;
        }
        let lg = log2_interval(q, per_term_bits);
        acc = acc.add(&lg.scale(q).neg());
    }
    Ok(acc)
}

/// Shannon entropy `H(P) = -Σ P(a) log2 P(a)` (the `0·log2 0` term is 0),
/// as a certified enclosure of width at most `2^-bits`.
pub fn shannon_entropy(p: &FiniteProbabilitySpace, bits: u32) -> Result<RatInterval, ProbError> {
    let per_term_bits = bits + (usize::BITS - p.len().leading_zeros()) + 2;
    let target = BigRational::new(BigInt::one(), BigInt::one() << bits);
    match p.mode() {
        Mode::Exact => shannon_entropy_from_probs(&p.exact_probs()?, bits),
        Mode::Interval => {
            let budget = p.budget_bits();
            let mut refine = 32u32.min(budget);
            loop {
                let mut acc = RatInterval::point(BigRational::zero());
                for s in 0..p.len() as Symbol {
                    let iv = p.prob_interval(s, refine);
                    acc = acc.add(&neg_xlog2x_enclosure(&iv, per_term_bits));
                }
                if acc.width() <= target {
                    return Ok(acc);
                }
                if refine >= budget {
                    return Err(ProbError::Precision(CompRealError::Undecided {
                        budget_bits: budget,
                        context: " (entropy term precision: a probability's \
                                  neighborhood of 0 is unresolved)"
                            .into(),
                    }));
                }
                refine = (refine * 2).min(budget);
            }
        }
    }
}

/// Enclosure of `f(x) = -x log2 x` over a subinterval of [0, 1].
/// `f` is 0 at both ends of [0, 1] and unimodal with maximum `log2(e)/e`.
fn neg_xlog2x_enclosure(x: &RatInterval, bits: u32) -> RatInterval {
    let f_point = |v: &BigRational| -> RatInterval {
        if v.is_zero() || v.is_one() {
            RatInterval::point(BigRational::zero())
        } else {
            log2_interval(v, bits).scale(v).neg()
        }
    };
    let f_lo = f_point(&x.lo);
    let f_hi = f_point(&x.hi);
    let mut lo = f_lo.lo.clone().min(f_hi.lo.clone());
    if lo.is_negative() {
        lo = BigRational::zero();
    }
    let mut hi = f_lo.hi.clone().max(f_hi.hi.clone());
    // If the interval may contain the argmax 1/e, cap with a rational upper
    // bound of log2(e)/e = 0.53073...
    let argmax_lo = BigRational::new(BigInt::from(36), BigInt::from(100));
    let argmax_hi = BigRational::new(BigInt::from(37), BigInt::from(100));
    if x.lo < argmax_hi && x.hi > argmax_lo {
        let cap = BigRational::new(BigInt::from(5308), BigInt::from(10000));
        hi = hi.max(cap);
    }
    RatInterval::new(lo, hi)
}

/// A real random variable on an alphabet: rational per-symbol values plus a
/// declared envelope `L` with `|X(a)| <= L`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealRandomVariable {
    values: Vec<BigRational>,
    envelope: BigRational,
}

impl RealRandomVariable {
    pub fn new(values: Vec<BigRational>, envelope: BigRational) -> Result<Self, ProbError> {
        for v in &values {
            if v.abs() > envelope {
                return Err(ProbError::EnvelopeViolation {
                    envelope: envelope.to_string(),
                    value: v.to_string(),
                });
            }
        }
        Ok(RealRandomVariable { values, envelope })
    }

    /// Envelope taken as `max |X(a)|`.
    pub fn with_auto_envelope(values: Vec<BigRational>) -> Self {
        let envelope =
            values.iter().map(|v| v.abs()).max().unwrap_or_else(BigRational::zero);
        RealRandomVariable { values, envelope }
    }

    /// Indicator of one symbol.
    pub fn indicator(alphabet_size: usize, a: Symbol) -> Self {
        let mut values = vec![BigRational::zero(); alphabet_size];
        values[a as usize] = BigRational::one();
        RealRandomVariable { values, envelope: BigRational::one() }
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn value(&self, s: Symbol) -> &BigRational {
        &self.values[s as usize]
    }

    pub fn envelope(&self) -> &BigRational {
        &self.envelope
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_rv(p: &FiniteProbabilitySpace, x: &RealRandomVariable) -> Result<(), ProbError> {
    if x.len() != p.len() {
        return Err(ProbError::LengthMismatch { expected: p.len(), got: x.len() });
    }
    Ok(())
}

/// `E(X) = Σ X(a) P(a)`, exact.
pub fn rv_mean(
    p: &FiniteProbabilitySpace,
    x: &RealRandomVariable,
) -> Result<BigRational, ProbError> {
    check_rv(p, x)?;
    let probs = p.exact_probs()?;
    let mut e = BigRational::zero();
    for (v, q) in x.values().iter().zip(&probs) {
        e += v * q;
    }
    Ok(e)
}

/// `V(X) = Σ (X(a) - E(X))² P(a)`, exact.
pub fn rv_variance(
    p: &FiniteProbabilitySpace,
    x: &RealRandomVariable,
) -> Result<BigRational, ProbError> {
    let e = rv_mean(p, x)?;
    let probs = p.exact_probs()?;
    let mut v = BigRational::zero();
    for (xv, q) in x.values().iter().zip(&probs) {
        let d = xv - &e;
        v += &d * &d * q;
    }
    Ok(v)
}

/// Merges symbol `b` into symbol `a`: returns the space `Q` on `Ω \ {b}`
/// with `Q(a) = P(a) + P(b)` and the prefix with every `b` replaced by `a`.
/// Symbol indices above `b` shift down by one.
pub fn contract(
    p: &FiniteProbabilitySpace,
    s: &SequencePrefix,
    a: Symbol,
    b: Symbol,
) -> Result<(FiniteProbabilitySpace, SequencePrefix), ProbError> {
    if a == b {
        return Err(ProbError::SameSymbol);
    }
    p.check_symbol(a)?;
    p.check_symbol(b)?;
    let remap = |s: Symbol| -> Symbol {
        if s == b {
            if a > b {
                a - 1
            } else {
                a
            }
        } else if s > b {
            s - 1
        } else {
            s
        }
    };
    let mut names = Vec::with_capacity(p.len() - 1);
    for (i, n) in p.alphabet().names().iter().enumerate() {
        if i as Symbol != b {
            names.push(n.clone());
        }
    }
    let alphabet = Alphabet::new(names)?;
    let merged = |pa: &ProbValue, pb: &ProbValue| -> ProbValue {
        match (pa, pb) {
            (ProbValue::Exact(x), ProbValue::Exact(y)) => ProbValue::Exact(x + y),
            (x, y) => {
                let cx = match x {
                    ProbValue::Exact(r) => CompReal::exact(r.clone()),
                    ProbValue::Interval(c) => c.clone(),
                };
                let cy = match y {
                    ProbValue::Exact(r) => CompReal::exact(r.clone()),
                    ProbValue::Interval(c) => c.clone(),
                };
                ProbValue::Interval(cx.add(&cy))
            }
        }
    };
    let mut probs = Vec::with_capacity(p.len() - 1);
    for i in 0..p.len() as Symbol {
        if i == b {
            continue;
        }
        if i == a {
            probs.push(merged(&p.probs[a as usize], &p.probs[b as usize]));
        } else {
            probs.push(p.probs[i as usize].clone());
        }
    }
    let q = FiniteProbabilitySpace { alphabet, probs, budget_bits: p.budget_bits() };
    let mut t = SequencePrefix::new(q.len());
    for &sym in s.word().symbols() {
        t.push(remap(sym))?;
    }
    Ok((q, t))
}

/// Every occurrence in `s` of a symbol with probability zero, as 1-based
/// `(position, symbol)` pairs. A non-empty list witnesses that no extension
/// of the prefix can escape the zero-support test family.
pub fn support_violations(
    p: &FiniteProbabilitySpace,
    s: &SequencePrefix,
) -> Result<Vec<(usize, Symbol)>, ProbError> {
    let mut zero = vec![false; p.len()];
    match p.mode() {
        Mode::Exact => {
            let probs = p.exact_probs()?;
            for (i, q) in probs.iter().enumerate() {
                zero[i] = q.is_zero();
            }
        }
        Mode::Interval => {
            for (i, zero_flag) in zero.iter_mut().enumerate() {
                if s.counts()[i] == 0 {
                    continue; // sign only matters for symbols that occur
                }
                match &p.probs[i] {
                    ProbValue::Exact(r) => *zero_flag = r.is_zero(),
                    ProbValue::Interval(c) => {
                        let ord = c.sign(p.budget_bits(), "probability sign")?;
                        *zero_flag = ord != Ordering::Greater;
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for (pos, &sym) in s.word().symbols().iter().enumerate() {
        if zero[sym as usize] {
            out.push((pos + 1, sym));
        }
    }
    Ok(out)
}

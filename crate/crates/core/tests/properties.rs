//! Property tests for the measure-theoretic invariants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use lln_core::numeric::log2_interval;
use lln_core::prob::{
    contract, count_occurrences, family_measure, prefix_free_reduce, rv_variance,
    shannon_entropy, word_measure, Alphabet, FiniteProbabilitySpace, RealRandomVariable,
    SequencePrefix, Word,
};
use lln_core::witness::{lln_witness_scan, NVerdict};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn space_from_weights(weights: &[u32]) -> FiniteProbabilitySpace {
    let total: u32 = weights.iter().sum();
    let names: Vec<String> = (0..weights.len()).map(|i| format!("s{i}")).collect();
    let probs: Vec<BigRational> =
        weights.iter().map(|&w| rat(w as i64, total as i64)).collect();
    FiniteProbabilitySpace::exact(Alphabet::new(names).unwrap(), probs).unwrap()
}

fn arb_weights(k: usize) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(1u32..20, k..=k)
}

fn arb_words(alphabet: u32) -> impl Strategy<Value = Vec<Word>> {
    proptest::collection::vec(
        proptest::collection::vec(0..alphabet, 0..8).prop_map(Word::new),
        0..12,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Prefix-free reduction never changes the generated open set's measure.
    #[test]
    fn reduction_preserves_family_measure(
        weights in arb_weights(2),
        words in arb_words(2),
    ) {
        let p = space_from_weights(&weights);
        let direct = family_measure(&p, &words).unwrap();
        let reduced = prefix_free_reduce(&words);
        let via_reduced = family_measure(&p, reduced.words()).unwrap();
        prop_assert_eq!(direct.exact().unwrap(), via_reduced.exact().unwrap());
    }

    /// A long word has a prefix in S iff it has a prefix in reduce(S).
    #[test]
    fn reduction_preserves_prefix_cover(
        words in arb_words(2),
        probe in proptest::collection::vec(0u32..2, 8..=10),
    ) {
        let probe = Word::new(probe);
        let reduced = prefix_free_reduce(&words);
        let in_original = words.iter().any(|w| w.len() <= probe.len() && w.is_prefix_of(&probe));
        let in_reduced =
            reduced.words().iter().any(|w| w.len() <= probe.len() && w.is_prefix_of(&probe));
        prop_assert_eq!(in_original, in_reduced);
    }

    /// Cylinder measures are multiplicative under concatenation.
    #[test]
    fn word_measure_is_multiplicative(
        weights in arb_weights(3),
        u in proptest::collection::vec(0u32..3, 0..10),
        v in proptest::collection::vec(0u32..3, 0..10),
    ) {
        let p = space_from_weights(&weights);
        let mut uv = u.clone();
        uv.extend_from_slice(&v);
        let mu = word_measure(&p, &Word::new(u)).unwrap().exact().unwrap().clone();
        let mv = word_measure(&p, &Word::new(v)).unwrap().exact().unwrap().clone();
        let muv = word_measure(&p, &Word::new(uv)).unwrap().exact().unwrap().clone();
        prop_assert_eq!(muv, mu * mv);
    }

    /// 0 <= H(P) <= log2 |alphabet|, with equality at the uniform point.
    #[test]
    fn entropy_bounds(weights in arb_weights(3)) {
        let p = space_from_weights(&weights);
        let h = shannon_entropy(&p, 60).unwrap();
        prop_assert!(!h.hi.is_negative());
        let log_size = log2_interval(&rat(3, 1), 80);
        prop_assert!(h.lo <= log_size.hi);
        if weights.iter().all(|&w| w == weights[0]) {
            // uniform: H = log2(3) within the combined enclosures
            prop_assert!(h.hi >= log_size.lo && h.lo <= log_size.hi);
        }
    }

    /// Variance is nonnegative and vanishes exactly for variables constant
    /// on the support.
    #[test]
    fn variance_nonnegative_and_zero_iff_constant(
        weights in arb_weights(3),
        values in proptest::collection::vec((-20i64..20, 1i64..6), 3..=3),
    ) {
        let p = space_from_weights(&weights);
        let vals: Vec<BigRational> = values.iter().map(|&(n, d)| rat(n, d)).collect();
        let x = RealRandomVariable::with_auto_envelope(vals.clone());
        let var = rv_variance(&p, &x).unwrap();
        prop_assert!(!var.is_negative());
        let support = p.support().unwrap();
        let constant_on_support =
            support.windows(2).all(|w| vals[w[0] as usize] == vals[w[1] as usize]);
        prop_assert_eq!(var.is_zero(), constant_on_support);
    }

    /// Merging symbol b into a adds the counts and the probabilities.
    #[test]
    fn contract_preserves_counts_and_mass(
        weights in arb_weights(3),
        word in proptest::collection::vec(0u32..3, 0..50),
        pair in (0u32..3, 0u32..3).prop_filter("distinct", |(a, b)| a != b),
    ) {
        let p = space_from_weights(&weights);
        let s = SequencePrefix::from_word(Word::new(word), 3).unwrap();
        let (a, b) = pair;
        let na = count_occurrences(&s, a).unwrap();
        let nb = count_occurrences(&s, b).unwrap();
        let (q, t) = contract(&p, &s, a, b).unwrap();
        let a_new = if a > b { a - 1 } else { a };
        prop_assert_eq!(count_occurrences(&t, a_new).unwrap(), na + nb);
        prop_assert_eq!(t.len(), s.len());
        prop_assert_eq!(
            q.exact_prob(a_new).unwrap(),
            p.exact_prob(a).unwrap() + p.exact_prob(b).unwrap()
        );
        // total mass still 1
        let total: BigRational = q.exact_probs().unwrap().into_iter().sum();
        prop_assert!(total.is_one());
    }

    /// Extending the prefix never flips a violated verdict, and a violation
    /// keeps its witness.
    #[test]
    fn scan_verdicts_are_stable_under_extension(
        seed in 0u64..1000,
        short_len in 100u64..400,
        extra in 1u64..400,
    ) {
        let p = FiniteProbabilitySpace::bernoulli(rat(1, 3)).unwrap();
        let long = lln_core::seqio::sample_sequence(&p, short_len + extra, seed).unwrap();
        let mut short = SequencePrefix::new(2);
        for &sym in &long.word().symbols()[..short_len as usize] {
            short.push(sym).unwrap();
        }
        let eps = rat(1, 1);
        let rep_short = lln_witness_scan(&short, &p, &eps, 5).unwrap();
        let rep_long = lln_witness_scan(&long, &p, &eps, 5).unwrap();
        for (a, b) in rep_short.entries.iter().zip(rep_long.entries.iter()) {
            match (&a.verdict, &b.verdict) {
                (NVerdict::Violated { k: k1, symbol: s1 }, NVerdict::Violated { k: k2, symbol: s2 }) => {
                    prop_assert_eq!(k1, k2);
                    prop_assert_eq!(s1, s2);
                }
                (NVerdict::Violated { .. }, other) => {
                    prop_assert!(false, "violation flipped to {:?}", other)
                }
                // holds-so-far may extend or become violated beyond the old
                // length; undetermined may resolve either way
                (NVerdict::HoldsSoFar { .. }, NVerdict::Violated { k, .. }) => {
                    prop_assert!(*k > short_len)
                }
                _ => {}
            }
        }
    }
}

mod common;

use common::{naive_c, naive_c_tilde, naive_max, naive_phi, signs};
use crosscorr::measures::{phi_with, EnumOptions};
use crosscorr::{
    correlation_measure, correlation_v, cross_correlation_k_tuple, estimate_phi, phi, phi_tilde,
    BinarySequence, GeneratorSample, SeedStream, SequenceFamily,
};
use proptest::prelude::*;

fn seq(len: usize) -> impl Strategy<Value = BinarySequence> {
    prop::collection::vec(prop::bool::ANY, len).prop_map(|bits| {
        let signs: Vec<i8> = bits.iter().map(|&b| if b { -1 } else { 1 }).collect();
        BinarySequence::from_signs(&signs).unwrap()
    })
}

fn family(len: usize, max: usize) -> impl Strategy<Value = SequenceFamily> {
    prop::collection::btree_set(seq(len), 1..=max)
        .prop_map(|s| SequenceFamily::new(s.into_iter().collect()).unwrap())
}

fn small_family() -> impl Strategy<Value = (SequenceFamily, usize)> {
    (2usize..=8, 1usize..=3, 2usize..=3).prop_flat_map(|(n, f, k)| (family(n, f), Just(k.min(n))))
}

fn check_witness(seqs: &[BinarySequence], r: &crosscorr::MeasureResult) {
    let tuple: Vec<&BinarySequence> = r.witness.members.iter().map(|&m| &seqs[m]).collect();
    let v = correlation_v(&tuple, &r.witness.shifts, r.witness.window).unwrap();
    assert_eq!(v.unsigned_abs(), r.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn phi_matches_brute_force((fam, k) in small_family()) {
        let r = phi(&fam, k).unwrap();
        prop_assert_eq!(r.value, naive_phi(&fam, k));
        check_witness(fam.members(), &r);
    }

    #[test]
    fn phi_tilde_matches_brute_force(
        n in 1usize..=5,
        images in prop::collection::vec(0u64..32, 1..=3),
        k in 2usize..=3,
    ) {
        prop_assume!(n * images.len() >= k);
        let seqs: Vec<BinarySequence> = images
            .iter()
            .map(|&i| BinarySequence::from_words(n, vec![i]).unwrap())
            .collect();
        let gen = GeneratorSample::from_images(seqs.clone()).unwrap();
        let r = phi_tilde(&gen, k).unwrap();
        prop_assert_eq!(r.value, naive_max(&signs(&seqs), k, false));
        check_witness(&seqs, &r);
    }

    #[test]
    fn c_matches_brute_force(s in (2usize..=10).prop_flat_map(seq), k in 2usize..=4) {
        let k = k.min(s.len());
        let r = correlation_measure(&s, k).unwrap();
        prop_assert_eq!(r.value, naive_c(&s, k));
        check_witness(std::slice::from_ref(&s), &r);
    }

    #[test]
    fn c_tilde_matches_brute_force(
        n in 2usize..=6,
        picks in prop::collection::vec(0u64..64, 2..=3),
    ) {
        let seqs: Vec<BinarySequence> = picks
            .iter()
            .map(|&i| BinarySequence::from_words(n, vec![i]).unwrap())
            .collect();
        let tuple: Vec<&BinarySequence> = seqs.iter().collect();
        let naive = naive_c_tilde(&signs(&seqs));
        match cross_correlation_k_tuple(&tuple, tuple.len()) {
            Ok(r) => {
                prop_assert_eq!(r.value, naive);
                check_witness(&seqs, &r);
            }
            Err(crosscorr::Error::NoAdmissiblePattern) => prop_assert_eq!(naive, 0),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn singleton_law(s in (2usize..=40).prop_flat_map(seq), k in 2usize..=3) {
        let k = k.min(s.len());
        let fam = SequenceFamily::singleton(s.clone());
        prop_assert_eq!(phi(&fam, k).unwrap().value, correlation_measure(&s, k).unwrap().value);
    }

    #[test]
    fn dominance_and_monotonicity(
        (fam, extra) in (4usize..=24).prop_flat_map(|n| (family(n, 3), seq(n))),
        k in 2usize..=3,
    ) {
        let base = phi(&fam, k).unwrap().value;
        for m in fam.members() {
            prop_assert!(base >= correlation_measure(m, k).unwrap().value);
        }
        let mut bigger = fam.clone();
        if bigger.insert(extra).is_ok() {
            prop_assert!(phi(&bigger, k).unwrap().value >= base);
        }
    }

    #[test]
    fn negation_invariance((fam, k) in small_family()) {
        let neg = SequenceFamily::new(fam.members().iter().map(|s| s.negated()).collect()).unwrap();
        prop_assert_eq!(phi(&neg, k).unwrap().value, phi(&fam, k).unwrap().value);
        let s = &fam.members()[0];
        prop_assert_eq!(
            correlation_measure(&s.negated(), k).unwrap().value,
            correlation_measure(s, k).unwrap().value
        );
    }

    #[test]
    fn estimate_is_a_lower_bound((fam, k) in small_family(), seed in any::<u64>()) {
        let exact = phi(&fam, k).unwrap();
        let est = estimate_phi(&fam, k, 200, &SeedStream::new(seed)).unwrap();
        prop_assert!(est.value <= exact.value);
        check_witness(fam.members(), &est);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let mut rng = common::rng(17);
    let fams: Vec<SequenceFamily> = (0..6)
        .map(|i| common::random_family(&mut rng, 20 + 7 * i, 3))
        .collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            fams.iter()
                .flat_map(|f| {
                    [
                        phi_with(f, 2, &EnumOptions::unlimited()).unwrap(),
                        phi_with(f, 3, &EnumOptions::unlimited()).unwrap(),
                        estimate_phi(f, 3, 5000, &SeedStream::new(4)).unwrap(),
                    ]
                })
                .collect::<Vec<_>>()
        })
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(8));
}

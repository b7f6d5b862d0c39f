use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use supersym_core::ensembles::sample;
use supersym_core::testing::{random_element, random_supermatrix, Grade};
use supersym_core::{ConjugationConvention, EnsembleClass, EnsembleSpec, ExactComplex, GrassmannElement, TransposeConvention};

type El = GrassmannElement<ExactComplex>;

fn element(seed: u64, pairs: u32, grade: Grade) -> El {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element(&mut rng, pairs, grade, 6, 3)
}

fn degree_parity_twist(x: &El) -> El {
    let mut out = El::zero(x.pairs());
    for (mask, c) in x.terms() {
        let gens: Vec<_> = (0..2 * x.pairs()).filter(|g| mask >> g & 1 == 1).map(supersym_core::Gen).collect();
        let c = if gens.len() % 2 == 1 { -c.clone() } else { c.clone() };
        out = &out + &El::monomial(x.pairs(), &gens, c).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn odd_elements_anticommute(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = element(s1, 3, Grade::Odd);
        let b = element(s2, 3, Grade::Odd);
        prop_assert_eq!((&a * &b).max_deviation(&(-(&b * &a))), 0.0);
    }

    #[test]
    fn even_elements_commute_with_everything(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = element(s1, 3, Grade::Even);
        let b = element(s2, 3, Grade::Any);
        prop_assert_eq!((&a * &b).max_deviation(&(&b * &a)), 0.0);
    }

    #[test]
    fn product_is_associative(s in any::<u64>()) {
        let (a, b, c) = (element(s, 3, Grade::Any), element(s ^ 1, 3, Grade::Any), element(s ^ 2, 3, Grade::Any));
        prop_assert_eq!((&(&a * &b) * &c).max_deviation(&(&a * &(&b * &c))), 0.0);
    }

    #[test]
    fn odd_squares_vanish(s in any::<u64>()) {
        let a = element(s, 4, Grade::Odd);
        prop_assert!((&a * &a).is_zero());
    }

    #[test]
    fn double_conjugation(s in any::<u64>()) {
        let a = element(s, 3, Grade::Any);
        let minus = a.conjugate(ConjugationConvention::MinusSign).unwrap().conjugate(ConjugationConvention::MinusSign).unwrap();
        prop_assert_eq!(minus.max_deviation(&degree_parity_twist(&a)), 0.0);
        let rev = a.conjugate(ConjugationConvention::OrderReversal).unwrap().conjugate(ConjugationConvention::OrderReversal).unwrap();
        prop_assert_eq!(rev.max_deviation(&a), 0.0);
    }

    #[test]
    fn text_form_roundtrips(s in any::<u64>()) {
        let a = element(s, 3, Grade::Any);
        let back = El::parse(&a.emit()).unwrap();
        prop_assert_eq!(back.max_deviation(&a), 0.0);
    }

    #[test]
    fn sdet_is_multiplicative(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let m = random_supermatrix::<ExactComplex, _>(&mut rng, 2, 2, 2, 4);
        let n = random_supermatrix::<ExactComplex, _>(&mut rng, 2, 2, 2, 4);
        let lhs = m.try_mul(&n).unwrap().sdet().unwrap();
        let rhs = &m.sdet().unwrap() * &n.sdet().unwrap();
        prop_assert_eq!(lhs.max_deviation(&rhs), 0.0);
        prop_assert_eq!(m.sdet_second_form().unwrap().max_deviation(&m.sdet().unwrap()), 0.0);
    }

    #[test]
    fn supertrace_is_cyclic(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let m = random_supermatrix::<ExactComplex, _>(&mut rng, 2, 2, 2, 1);
        let n = random_supermatrix::<ExactComplex, _>(&mut rng, 2, 2, 2, 1);
        let a = m.try_mul(&n).unwrap().supertrace().unwrap();
        let b = n.try_mul(&m).unwrap().supertrace().unwrap();
        prop_assert_eq!(a.max_deviation(&b), 0.0);
    }

    #[test]
    fn dagger_is_an_involution(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let m = random_supermatrix::<ExactComplex, _>(&mut rng, 2, 2, 2, 1);
        for conv in [TransposeConvention::MuMinus, TransposeConvention::NuMinus] {
            prop_assert_eq!(m.dagger(conv).dagger(conv).max_deviation(&m), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), class in prop::sample::select(vec![EnsembleClass::Goe, EnsembleClass::Gue, EnsembleClass::Cue])) {
        let spec = EnsembleSpec::new(class, 6, seed, 5);
        let a = sample(&spec).unwrap();
        let b = sample(&spec).unwrap();
        prop_assert_eq!(a, b);
    }
}

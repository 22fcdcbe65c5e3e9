use nilequi::lattice::Nilmanifold;
use nilequi::obstruction::{check_weak_condition, Character};
use nilequi::realization::Realization;
use nilequi::scalar::int;
use nilequi::{AlgebraVector, DilationFamily, GroupElement, MeasureSpec, NilAlgebra, Rational};
use num_bigint::BigInt;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-8i64..=8, 1i64..=6).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn vector(n: usize) -> impl Strategy<Value = AlgebraVector<Rational>> {
    proptest::collection::vec(rational(), n).prop_map(AlgebraVector)
}

fn algebras() -> Vec<NilAlgebra> {
    Realization::stock().iter().map(|r| r.algebra().unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn group_law_is_associative(which in 0usize..6, seed in vector(6), other in vector(6), third in vector(6)) {
        let alg = &algebras()[which];
        let n = alg.dim();
        let cut = |v: &AlgebraVector<Rational>| GroupElement::exp(AlgebraVector(v.0[..n].to_vec()));
        let (a, b, c) = (cut(&seed), cut(&other), cut(&third));
        let left = alg.group_mul(&alg.group_mul(&a, &b).unwrap(), &c).unwrap();
        let right = alg.group_mul(&a, &alg.group_mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_and_antisymmetry(x in vector(5), y in vector(5)) {
        let alg = NilAlgebra::heisenberg(2);
        prop_assert!(alg.bch(&x, &x.neg()).unwrap().is_zero());
        let xy = alg.bracket(&x, &y).unwrap();
        let yx = alg.bracket(&y, &x).unwrap();
        prop_assert_eq!(xy, yx.neg());
    }

    #[test]
    fn reduction_is_idempotent(x in vector(3), shift in proptest::collection::vec(-4i64..=4, 3)) {
        let space = Nilmanifold::integer_points(NilAlgebra::heisenberg(1)).unwrap();
        let g = GroupElement::exp(x);
        let (rep, _) = space.reduce_mod_lattice(&g);
        let again = space.reduce_mod_lattice(&space.from_second_kind(&rep.second_kind)).0;
        prop_assert_eq!(&again, &rep);
        let word: Vec<BigInt> = shift.into_iter().map(BigInt::from).collect();
        let moved = space.algebra().group_mul(&g, &space.word_element(&word)).unwrap();
        prop_assert_eq!(space.reduce_mod_lattice(&moved).0, rep);
    }

    #[test]
    fn weak_condition_ignores_character_scale(k1 in -5i64..=5, k2 in -5i64..=5, scale in 1i64..=4) {
        prop_assume!(k1 != 0 || k2 != 0);
        let alg = NilAlgebra::abelian(2);
        let a = DilationFamily::multiplication(2).torus_coefficients(&alg).unwrap();
        let spec = MeasureSpec::uniform_atoms(vec![vec![int(1) / int(3), int(0)], vec![int(0), int(1) / int(2)]]);
        let base = check_weak_condition(&spec, &a, &Character(vec![k1, k2])).unwrap();
        let scaled = check_weak_condition(&spec, &a, &Character(vec![scale * k1, scale * k2])).unwrap();
        prop_assert_eq!(base.satisfied, scaled.satisfied);
        prop_assert_eq!(base.slice.unwrap().mass, scaled.slice.unwrap().mass);
    }
}

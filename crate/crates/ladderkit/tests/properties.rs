//! Randomized algebra properties of the exact symbolic engine: ring axioms
//! for the coefficient field, the Leibniz rule, operator composition laws,
//! parser round-trips, and agreement between symbolic and rational
//! evaluation.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use proptest::prelude::*;

use ladderkit::symexpr::{
    parse_expr, Coefficient, DiffOperator, SymbolTable, SymbolicFunction,
};

fn table() -> Arc<SymbolTable> {
    SymbolTable::new(&["l", "K", "s"]).unwrap()
}

/// Polynomial coefficient: sum of small monomials k * l^a * K^b * s^c.
fn poly_coeff(terms: Vec<(i64, [u8; 3])>) -> Coefficient {
    let t = table();
    let mut acc = Coefficient::zero(&t);
    for (k, exps) in terms {
        let mut m = Coefficient::from_i64(&t, k);
        for (name, &e) in ["l", "K", "s"].iter().zip(&exps) {
            let sym = Coefficient::symbol(&t, name).unwrap();
            m = m.mul(&sym.pow(e as i32).unwrap());
        }
        acc = acc.add(&m);
    }
    acc
}

fn term_strategy() -> impl Strategy<Value = (i64, [u8; 3])> {
    (-4i64..=4, [0u8..=2, 0u8..=2, 0u8..=2])
}

fn poly_strategy() -> impl Strategy<Value = Coefficient> {
    prop::collection::vec(term_strategy(), 0..3).prop_map(poly_coeff)
}

/// Rational-function coefficient with a guaranteed nonzero denominator.
fn coeff_strategy() -> impl Strategy<Value = Coefficient> {
    (poly_strategy(), poly_strategy())
        .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
        .prop_map(|(n, d)| n.div(&d).unwrap())
}

fn function_strategy() -> impl Strategy<Value = SymbolicFunction> {
    prop::collection::vec((-3i64..=3, poly_strategy()), 0..3).prop_map(|terms| {
        let t = table();
        let mut f = SymbolicFunction::zero(&t);
        for (p, c) in terms {
            f = f.add(&SymbolicFunction::term(p, c));
        }
        f
    })
}

fn first_order_strategy() -> impl Strategy<Value = DiffOperator> {
    (function_strategy(), function_strategy())
        .prop_map(|(a1, a0)| DiffOperator::new(SymbolicFunction::zero(a0.table()), a1, a0))
}

fn bindings() -> BTreeMap<String, BigRational> {
    let mut b = BTreeMap::new();
    b.insert("l".to_string(), BigRational::new(7.into(), 3.into()));
    b.insert("K".to_string(), BigRational::new((-5).into(), 2.into()));
    b.insert("s".to_string(), BigRational::new(11.into(), 4.into()));
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn coefficient_ring_axioms(a in coeff_strategy(), b in coeff_strategy(), c in coeff_strategy()) {
        let t = table();
        let zero = Coefficient::zero(&t);
        let one = Coefficient::one(&t);
        prop_assert!(a.add(&b) == b.add(&a));
        prop_assert!(a.add(&b).add(&c) == a.add(&b.add(&c)));
        prop_assert!(a.mul(&b) == b.mul(&a));
        prop_assert!(a.mul(&b).mul(&c) == a.mul(&b.mul(&c)));
        prop_assert!(a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.add(&zero) == a);
        prop_assert!(a.mul(&one) == a);
        prop_assert!(a.sub(&a) == zero);
        prop_assert!(a.mul(&zero) == zero);
        if !a.is_zero() {
            prop_assert!(a.mul(&a.inv().unwrap()) == one);
        }
    }

    #[test]
    fn leibniz_rule(f in function_strategy(), g in function_strategy()) {
        let product = f.mul(&g).differentiate();
        let expanded = f.differentiate().mul(&g).add(&f.mul(&g.differentiate()));
        prop_assert!(product == expanded);
        // linearity of the derivative
        let sum = f.add(&g).differentiate();
        prop_assert!(sum == f.differentiate().add(&g.differentiate()));
    }

    #[test]
    fn parser_round_trip(f in function_strategy()) {
        let text = f.to_string();
        let back = parse_expr(&text, &table()).unwrap();
        prop_assert!(back == f, "'{text}' reparsed as '{back}'");
    }

    #[test]
    fn coefficient_print_round_trip(a in coeff_strategy()) {
        let f = SymbolicFunction::constant(a.clone());
        let back = parse_expr(&f.to_string(), &table()).unwrap();
        prop_assert!(back == f);
    }

    #[test]
    fn commutator_antisymmetry(a in first_order_strategy(), b in first_order_strategy()) {
        let zero = DiffOperator::zero(a.a0.table());
        let ab = a.commutator(&b).unwrap();
        let ba = b.commutator(&a).unwrap();
        prop_assert!(ab == zero.sub(&ba));
        // self-commutator vanishes
        prop_assert!(a.commutator(&a).unwrap() == zero);
    }

    #[test]
    fn compose_associativity(a in first_order_strategy(), f in function_strategy(), g in function_strategy()) {
        // keep total order within the second-order algebra: one derivative,
        // two multiplications
        let bf = DiffOperator::multiplication(f);
        let cg = DiffOperator::multiplication(g);
        let left = a.compose(&bf).unwrap().compose(&cg).unwrap();
        let right = a.compose(&bf.compose(&cg).unwrap()).unwrap();
        prop_assert!(left == right);
    }

    #[test]
    fn symbolic_matches_rational_evaluation(a in coeff_strategy(), b in coeff_strategy()) {
        let bind = bindings();
        let (ea, eb) = match (a.substitute_numeric(&bind), b.substitute_numeric(&bind)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => return Ok(()), // denominator vanishes at the sample point
        };
        if let Ok(sum) = a.add(&b).substitute_numeric(&bind) {
            prop_assert_eq!(sum, &ea + &eb);
        }
        if let Ok(prod) = a.mul(&b).substitute_numeric(&bind) {
            prop_assert_eq!(prod, &ea * &eb);
        }
        if let Ok(neg) = a.neg().substitute_numeric(&bind) {
            prop_assert_eq!(neg, -&ea);
        }
    }

    #[test]
    fn function_evaluation_consistency(f in function_strategy(), g in function_strategy(),
                                       num in -9i64..=9, den in 1i64..=9) {
        let x = BigRational::new(num.into(), den.into());
        if x == BigRational::from_integer(0.into()) {
            return Ok(()); // negative powers undefined at zero
        }
        let bind = bindings();
        let (fa, ga) = match (f.eval_rational(&x, &bind), g.eval_rational(&x, &bind)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Ok(()),
        };
        if let Ok(sum) = f.add(&g).eval_rational(&x, &bind) {
            prop_assert_eq!(sum, &fa + &ga);
        }
        if let Ok(prod) = f.mul(&g).eval_rational(&x, &bind) {
            prop_assert_eq!(prod, &fa * &ga);
        }
    }
}

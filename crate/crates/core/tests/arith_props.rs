use gcgmp::arith::{
    check_validity_single_var, eval_acf, eval_atom, eval_term, saturating_eval, Acf, AtomicConstraint, Rel, Sat,
    Summand, Term, UtilityVar, Validity, Valuation,
};
use gcgmp::{Payoff, Scalar};
use num_bigint::BigInt;
use proptest::prelude::*;
use std::collections::BTreeMap;

const AGENTS: [&str; 3] = ["a", "b", "c"];

fn rational() -> impl Strategy<Value = Payoff> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Payoff::new(BigInt::from(n), BigInt::from(d)))
}

fn summand(agents: &'static [&'static str]) -> impl Strategy<Value = Summand<Payoff>> {
    prop_oneof![
        prop::sample::select(agents).prop_map(|a| Summand::Var(UtilityVar::new(a))),
        rational().prop_map(Summand::Const),
    ]
}

fn term(agents: &'static [&'static str]) -> impl Strategy<Value = Term<Payoff>> {
    prop::collection::vec(summand(agents), 1..4).prop_map(|s| Term::new(s).unwrap())
}

fn rel() -> impl Strategy<Value = Rel> {
    prop::sample::select(Rel::ALL.to_vec())
}

fn acf(agents: &'static [&'static str]) -> impl Strategy<Value = Acf<Payoff>> {
    let leaf = prop_oneof![
        1 => any::<bool>().prop_map(Acf::Const),
        6 => (term(agents), rel(), term(agents)).prop_map(|(l, r, t)| Acf::atom(l, r, t)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Acf::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner).prop_map(|(a, b)| a.or(b)),
        ]
    })
}

fn valuation() -> impl Strategy<Value = Valuation<Payoff>> {
    prop::collection::vec(rational(), 3).prop_map(|xs| AGENTS.iter().zip(xs).map(|(a, x)| (a.to_string(), x)).collect())
}

proptest! {
    #[test]
    fn term_evaluation_is_additive(t1 in term(&AGENTS), t2 in term(&AGENTS), v in valuation()) {
        let sum = eval_term(&t1.clone().plus(t2.clone()), &v).unwrap();
        prop_assert_eq!(sum, eval_term(&t1, &v).unwrap() + eval_term(&t2, &v).unwrap());
    }

    #[test]
    fn de_morgan(a in acf(&AGENTS), b in acf(&AGENTS), v in valuation()) {
        let lhs = a.clone().and(b.clone()).not();
        let rhs = a.clone().not().or(b.clone().not());
        prop_assert_eq!(eval_acf(&lhs, &v).unwrap(), eval_acf(&rhs, &v).unwrap());
        let lhs = a.clone().or(b.clone()).not();
        let rhs = a.not().and(b.not());
        prop_assert_eq!(eval_acf(&lhs, &v).unwrap(), eval_acf(&rhs, &v).unwrap());
    }

    #[test]
    fn or_elimination_preserves_meaning(f in acf(&AGENTS), v in valuation()) {
        prop_assert_eq!(eval_acf(&f, &v).unwrap(), eval_acf(&f.without_or(), &v).unwrap());
    }

    #[test]
    fn display_round_trips(f in acf(&AGENTS)) {
        let printed = f.to_string();
        let reparsed = gcgmp::arith::parse_acf::<Payoff>(&printed).unwrap();
        prop_assert_eq!(reparsed, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn validity_agrees_with_sampling(
        f in acf(&["a"]),
        samples in prop::collection::vec((-400i64..=400, 1i64..=12), 10_000),
    ) {
        match check_validity_single_var(&f).unwrap() {
            Validity::Valid => {
                for (n, d) in samples {
                    let x = Payoff::new(BigInt::from(n), BigInt::from(d));
                    let v = Valuation::from([("a".to_string(), x.clone())]);
                    prop_assert!(eval_acf(&f, &v).unwrap(), "valid formula fails at {}", x);
                }
            }
            Validity::Invalid { witness, .. } => {
                let v = Valuation::from([("a".to_string(), witness)]);
                prop_assert!(!eval_acf(&f, &v).unwrap());
            }
        }
    }
}

proptest! {
    #[test]
    fn atoms_against_constants_change_at_most_twice(
        lhs in term(&AGENTS),
        r in rel(),
        bound in rational(),
        start in valuation(),
        increments in prop::collection::vec(prop::collection::vec(0i64..=3, 3), 1..30),
    ) {
        let atom = AtomicConstraint::new(lhs, r, Term::constant(bound));
        let mut v = start;
        let mut last = eval_atom(&atom, &v).unwrap();
        let mut changes = 0;
        for inc in increments {
            for (agent, d) in AGENTS.iter().zip(inc) {
                let x = v.get_mut(*agent).unwrap();
                *x = x.clone() + Payoff::from_int(d);
            }
            let now = eval_atom(&atom, &v).unwrap();
            if now != last {
                changes += 1;
                last = now;
            }
        }
        prop_assert!(changes <= 2, "changed {} times", changes);
    }

    #[test]
    fn saturating_matches_exact_below_cap(t in term(&AGENTS), v in valuation(), cap in 1i64..=40) {
        let cap = Payoff::from_int(cap);
        let exact = eval_term(&t, &v).unwrap();
        let sv: BTreeMap<String, Sat<Payoff>> =
            v.iter().map(|(k, x)| (k.clone(), Sat::Exact(x.clone()))).collect();
        let got = saturating_eval(&t, &sv, &cap).unwrap();
        if exact <= cap {
            prop_assert_eq!(got, Sat::Exact(exact));
        } else {
            prop_assert_eq!(got, Sat::Saturated);
        }
    }
}

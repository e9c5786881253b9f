use gcgmp::arith::{AtomicConstraint, PathConstraint, Rel, Term};
use gcgmp::logic::{parse_formula, PathFormula, StateFormula};
use gcgmp::{Payoff, Scalar};
use proptest::prelude::*;

const AGENTS: [&str; 3] = ["a", "b", "c"];

fn rel() -> impl Strategy<Value = Rel> {
    prop::sample::select(Rel::ALL.to_vec())
}

fn constant() -> impl Strategy<Value = Payoff> {
    (-9i64..=9, 1i64..=3).prop_map(|(n, d)| Payoff::from_int(n) / Payoff::from_int(d))
}

fn constraint() -> impl Strategy<Value = StateFormula<Payoff>> {
    (prop::sample::select(AGENTS.to_vec()), rel(), constant(), any::<bool>()).prop_map(|(a, r, k, twice)| {
        let lhs = if twice { Term::var(a).plus(Term::var("b")) } else { Term::var(a) };
        StateFormula::Constraint(AtomicConstraint::new(lhs, r, Term::constant(k)))
    })
}

fn apc() -> impl Strategy<Value = PathFormula<Payoff>> {
    (prop::sample::select(AGENTS.to_vec()), rel(), constant())
        .prop_map(|(a, rel, bound)| PathFormula::Apc(PathConstraint { agent: a.to_string(), rel, bound }))
}

fn coalition() -> impl Strategy<Value = Vec<String>> {
    prop::sample::subsequence(AGENTS.to_vec(), 0..=3).prop_map(|v| v.into_iter().map(String::from).collect())
}

/// Path formulas over `state`, built with the smart constructors so that
/// the tree is the one the parser produces.
fn path(state: BoxedStrategy<StateFormula<Payoff>>) -> impl Strategy<Value = PathFormula<Payoff>> {
    let leaf = prop_oneof![3 => state.prop_map(StateFormula::path), 1 => apc()];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(PathFormula::not),
            inner.clone().prop_map(PathFormula::next),
            inner.clone().prop_map(PathFormula::always),
            inner.clone().prop_map(PathFormula::eventually),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            (inner.clone(), inner).prop_map(|(a, b)| a.until(b)),
        ]
    })
}

fn formula() -> impl Strategy<Value = StateFormula<Payoff>> {
    let leaf = prop_oneof![
        1 => Just(StateFormula::True),
        3 => prop::sample::select(vec!["p", "q", "halt"]).prop_map(StateFormula::atom),
        2 => constraint(),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(StateFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            (coalition(), path(inner.boxed())).prop_map(|(c, p)| StateFormula::coop(c, p)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parse_inverts_print(f in formula()) {
        let text = f.to_string();
        let back: StateFormula<Payoff> = parse_formula(&text).unwrap();
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn print_normalizes_whitespace(f in formula()) {
        let text = f.to_string();
        let spaced: String = text.chars().flat_map(|c| match c {
            '(' | ')' | '!' | '&' | '|' => vec![' ', c, ' '],
            _ => vec![c],
        }).collect();
        let back: StateFormula<Payoff> = parse_formula(&spaced).unwrap();
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn classification_is_monotone(f in formula(), c in coalition(), extra in apc()) {
        let tag = f.classify();
        let with_apc = f.clone().and(StateFormula::coop(c.clone(), extra.clone()));
        prop_assert!(with_apc.classify() >= tag);
        let boolean = f.clone().or(StateFormula::coop(c, f.clone().path().next().and(extra)));
        prop_assert!(boolean.classify() >= tag);
        if let StateFormula::Coop(agents, body) = &f {
            let wider = StateFormula::coop(agents.clone(), body.as_ref().clone().or(f.clone().path().always()));
            prop_assert!(wider.classify() >= tag);
        }
    }
}

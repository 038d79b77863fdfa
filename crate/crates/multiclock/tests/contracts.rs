mod common;

use common::*;
use multiclock::analysis::{system_contract, ParameterSet};
use multiclock::cli::{shipped_contract, CONTRACTS, NOMINAL_PARAMS, NOMINAL_SCENARIO};
use multiclock::contracts::{check_composition_soundness, compose, refines_on, satisfies, Contract, Refinement};
use multiclock::executive::Scenario;
use multiclock::mcl::{eval_global, parse, Env, Truth};
use multiclock::predicates::Registry;
use proptest::prelude::*;

fn contract(a: u16, g: u16) -> Contract {
    let side = |t: u16| parse(&format!("@c. ({})", dnf_text(t as u32, 4))).unwrap();
    Contract::new("C", side(a), side(g))
}

fn counterexample(r: &Refinement) -> Option<usize> {
    match r {
        Refinement::Holds => None,
        Refinement::Counterexample { behavior, .. } => Some(*behavior),
    }
}

fn truth_of(t: u16, i: usize) -> bool {
    t >> i & 1 == 1
}

fn satisfied(c: &Contract, beh: &multiclock::behaviors::SystemBehavior) -> Truth {
    let reg = Registry::empty();
    eval_global(&c.implication(), beh, &Env::new(&reg, &c.params)).unwrap().truth
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn refinement_matches_truth_tables(a in any::<u16>(), g in any::<u16>(), a2 in any::<u16>(), g2 in any::<u16>()) {
        let corpus = prop_corpus(4);
        let got = refines_on(&contract(a, g), &contract(a2, g2), &corpus, &Registry::empty()).unwrap();
        let bad = (0..16).find(|&i| {
            (truth_of(a2, i) && !truth_of(a, i))
                || ((!truth_of(a, i) || truth_of(g, i)) && !(!truth_of(a2, i) || truth_of(g2, i)))
        });
        match bad {
            None => prop_assert!(got.holds()),
            Some(i) => prop_assert_eq!(counterexample(&got), Some(i)),
        }
    }

    #[test]
    fn refinement_is_reflexive_and_transitive(a in any::<u16>(), g in any::<u16>(), b in any::<u16>(), h in any::<u16>()) {
        let corpus = prop_corpus(4);
        let reg = Registry::empty();
        let c1 = contract(a, g);
        prop_assert!(refines_on(&c1, &c1, &corpus, &reg).unwrap().holds());
        // Weaker assumptions with stronger promises, then the reverse.
        let c0 = contract(a | b, g & a);
        let c2 = contract(a & b, g | h);
        prop_assert!(refines_on(&c0, &c1, &corpus, &reg).unwrap().holds());
        prop_assert!(refines_on(&c1, &c2, &corpus, &reg).unwrap().holds());
        prop_assert!(refines_on(&c0, &c2, &corpus, &reg).unwrap().holds());
    }

    #[test]
    fn composition_is_sound_and_commutative(a in any::<u16>(), g in any::<u16>(), b in any::<u16>(), h in any::<u16>(), c in any::<u16>(), k in any::<u16>()) {
        let corpus = prop_corpus(4);
        let reg = Registry::empty();
        let (c1, c2, c3) = (contract(a, g), contract(b, h), contract(c, k));
        let report = check_composition_soundness(&c1, &c2, &c3, &corpus, &reg).unwrap();
        prop_assert!(report.violations.is_empty());
        let (x, y) = (compose(&c1, &c2).unwrap(), compose(&c2, &c1).unwrap());
        for beh in &corpus {
            prop_assert_eq!(satisfied(&x, beh), satisfied(&y, beh));
            if satisfied(&c1, beh) == Truth::True && satisfied(&c2, beh) == Truth::True {
                prop_assert_eq!(satisfied(&x, beh), Truth::True);
            }
        }
        let own = check_composition_soundness(&c1, &c2, &x, &corpus, &reg).unwrap();
        prop_assert!(own.refinement.holds() && own.violations.is_empty());
    }
}

#[test]
fn composition_shapes() {
    let a = parse("@c. a0 = 1").unwrap();
    let g = parse("@c. a1 = 1").unwrap();
    let c = Contract::new("C", a.clone(), g.clone());
    let top = Contract::new("T", parse("@c. true").unwrap(), parse("@c. true").unwrap());
    let ct = compose(&c, &top).unwrap();
    let t = parse("@c. true").unwrap();
    assert_eq!(ct.assumptions, a.clone().and(t.clone()).or(a.clone().and(g.clone().not())).or(t.clone().and(t.clone().not())));
    assert_eq!(ct.guarantees, c.implication().and(t.clone().implies(t)));
    let cc = compose(&c, &c).unwrap();
    assert_eq!(cc.guarantees, c.implication().and(c.implication()));
}

#[test]
fn satisfaction_examples() {
    let reg = Registry::empty();
    let corpus = prop_corpus(2);
    let vacuous = Contract::new("V", parse("@c. false").unwrap(), parse("@c. a0 = 7").unwrap());
    assert_eq!(satisfies(&corpus, &vacuous, &reg).unwrap().aggregate, Truth::True);
    assert_eq!(satisfies(&[], &contract(0, 0), &reg).unwrap().aggregate, Truth::True);
    let broken = Contract::new("B", parse("@c. true").unwrap(), parse("@c. a0 = 1").unwrap());
    let r = satisfies(&corpus, &broken, &reg).unwrap();
    assert_eq!(r.aggregate, Truth::False);
    assert_eq!(r.behaviors[0].failing().count(), 1);
    let weaker = Contract::new("W", parse("@c. true").unwrap(), parse("(@c. a0 = 1) || (@c. a1 = 1)").unwrap());
    assert!(refines_on(&broken, &weaker, &corpus, &reg).unwrap().holds());
    assert!(!refines_on(&weaker, &broken, &corpus, &reg).unwrap().holds());
}

#[test]
fn shipped_contracts_parse_and_round_trip() {
    assert_eq!(CONTRACTS.len(), 5);
    for (stem, text) in CONTRACTS {
        let c = Contract::parse_file(text).unwrap_or_else(|e| panic!("{stem}: {e}"));
        assert_eq!(Contract::parse_file(&c.to_file_string()).unwrap(), c, "{stem}");
        assert_eq!(shipped_contract(stem), Some(c));
    }
    assert_eq!(shipped_contract("nope"), None);
}

#[test]
fn shipped_contract_constants_match_the_parameter_set() {
    let p = ParameterSet::from_toml(NOMINAL_PARAMS).unwrap();
    let sc = Scenario::from_toml(NOMINAL_SCENARIO).unwrap();
    let all = p.contract_params(sc.run.x_i);
    for (stem, _) in CONTRACTS {
        let c = shipped_contract(stem).unwrap();
        for (k, v) in &c.params {
            assert_eq!(format!("{v:?}"), format!("{:?}", all[k]), "{stem}: {k}");
        }
    }
    let sys = system_contract(&p, sc.run.x_i);
    let shipped = shipped_contract("system").unwrap();
    assert_eq!((&shipped.name, &shipped.assumptions, &shipped.guarantees), (&sys.name, &sys.assumptions, &sys.guarantees));
}

#[test]
fn shipped_components_compose() {
    let mut acc = shipped_contract("mpc").unwrap();
    for stem in ["fl", "est", "tmg"] {
        acc = compose(&acc, &shipped_contract(stem).unwrap()).unwrap();
    }
    assert_eq!(acc.name, "C_MPC||C_FL||C_Est||C_Tmg");
    assert_eq!(acc.guarantees.conjuncts().len(), 2);
    assert_eq!(parse(&acc.guarantees.to_string()).unwrap(), acc.guarantees);
}

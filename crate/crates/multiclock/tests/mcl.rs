mod common;

use common::*;
use multiclock::mcl::{eval_global, eval_local, parse, parse_local, Env, Global, Local, Params, Truth};
use multiclock::predicates::Registry;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn with_env<T>(f: impl FnOnce(&Env) -> T) -> T {
    let reg = Registry::empty();
    let params = Params::new();
    f(&Env::new(&reg, &params))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = parse(&gl_text(&random_global(&mut rng, 2, true))).unwrap();
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn agrees_with_enumerator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_raw(&mut rng, 6);
        let beh = to_behavior(&raw);
        let g = random_global(&mut rng, 2, false);
        let f = parse(&gl_text(&g)).unwrap();
        let got = with_env(|env| eval_global(&f, &beh, env).unwrap().truth);
        let want = Exec::new(&raw).global(&g);
        prop_assert!(want.matches(got), "{}: {got} vs {want:?}", gl_text(&g));
    }

    #[test]
    fn unbounded_modalities_agree_with_enumerator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_raw(&mut rng, 6);
        let beh = to_behavior(&raw);
        let g = random_global(&mut rng, 1, true);
        let f = parse(&gl_text(&g)).unwrap();
        let got = with_env(|env| eval_global(&f, &beh, env).unwrap().truth);
        prop_assert!(Exec::new(&raw).global(&g).matches(got));
    }

    #[test]
    fn globally_is_dual_to_eventually(seed in any::<u64>(), lo in 0u64..3, width in proptest::option::of(0u64..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_raw(&mut rng, 6);
        let beh = to_behavior(&raw);
        let body = fm_text(&random_local(&mut rng, 0, 3, true));
        let iv = width.map_or(format!("[{lo},inf]"), |w| format!("[{lo},{}]", lo + w));
        let g = parse_local(&format!("G{iv} ({body})"), "c").unwrap();
        let d = parse_local(&format!("!(F{iv} (!({body})))"), "c").unwrap();
        let view = beh.view();
        with_env(|env| {
            for pos in 0..=raw.len[0] as i64 {
                prop_assert_eq!(
                    eval_local(&g, &view, "c", pos, env).unwrap().truth,
                    eval_local(&d, &view, "c", pos, env).unwrap().truth
                );
            }
            Ok(())
        })?;
    }

    #[test]
    fn shifting_moves_the_position(seed in any::<u64>(), c in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_raw(&mut rng, 6);
        let beh = to_behavior(&raw);
        let phi = parse_local(&fm_text(&random_local(&mut rng, c, 4, true)), CLOCKS[c]).unwrap();
        let view = beh.view();
        let shifted = view.shift_execution(c, 1);
        with_env(|env| {
            for pos in 1..=raw.len[c] as i64 {
                prop_assert_eq!(
                    eval_local(&phi, &view, CLOCKS[c], pos, env).unwrap().truth,
                    eval_local(&phi, &shifted, CLOCKS[c], pos - 1, env).unwrap().truth
                );
            }
            Ok(())
        })?;
    }

    #[test]
    fn extending_a_trace_never_flips_a_verdict(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_raw(&mut rng, 6);
        let mut short = raw.clone();
        let c = usize::from(raw.len[1] > raw.len[0]);
        if raw.len[c] == 0 {
            return Ok(());
        }
        // Drop the last tick of `c` and every observation of it.
        short.len[c] -= 1;
        short.vals[c].pop();
        short.sync[c][c].pop();
        short.sync[c][1 - c].pop();
        for x in short.sync[1 - c][c].iter_mut() {
            *x = (*x).min(short.len[c] as i64 - 1);
        }
        if short.sync[1 - c][c] != raw.sync[1 - c][c] {
            return Ok(());
        }
        let g = random_global(&mut rng, 1, true);
        let f = parse(&gl_text(&g)).unwrap();
        let (a, b) = with_env(|env| {
            (eval_global(&f, &to_behavior(&short), env).unwrap().truth, eval_global(&f, &to_behavior(&raw), env).unwrap().truth)
        });
        prop_assert!(a == Truth::Inconclusive || a == b, "{}: {a} then {b}", gl_text(&g));
    }
}

#[test]
fn grammar_examples() {
    let f = parse("@l. G (Close(x, xd(0)(0.0); 0.1))").unwrap();
    let Global::Bind { clock, body } = &f else { panic!("{f:?}") };
    assert_eq!(clock, "l");
    assert!(matches!(body, Local::Globally { lo: 0, hi: None, .. }));

    let f = parse("@m. F[1,3] (r(1) - r(0) <= 0.2)").unwrap();
    let Global::Bind { body, .. } = &f else { panic!("{f:?}") };
    assert!(matches!(body, Local::Eventually { lo: 1, hi: Some(3), .. }));

    assert!(parse("@c. c^r(0) > 1").is_err());
    assert!(parse("@c. G[3,1] (y > 0)").is_err());
    assert!(parse("@c. (y > 0").is_err());

    for text in ["@l. G (Close(x, xd(0)(0.0); 0.1))", "@m. F[1,3] (r(1) - r(0) <= 0.2)", "!(@c. y = 1) || (@r. z(-1) != 2)"] {
        let f = parse(text).unwrap();
        assert_eq!(parse(&f.to_string()).unwrap(), f);
    }
}

#[test]
fn evaluation_examples() {
    let raw = Raw { len: [3, 0], vals: [vec![0.0, 1.0, 2.0], vec![]], sync: [[vec![0, 1, 2], vec![-1; 3]], [vec![], vec![]]] };
    let beh = to_behavior(&raw);
    let view = beh.view();
    let eval = |text: &str| with_env(|env| eval_local(&parse_local(text, "c").unwrap(), &view, "c", 0, env).unwrap());

    let v = eval("F[0,2] (y(0) > 1)");
    assert_eq!((v.truth, v.witness), (Truth::True, Some(2)));
    assert_eq!(eval("G[0,inf] (y(0) >= 0)").truth, Truth::Inconclusive);
    assert_eq!(eval("F[0,inf] (y(0) > 5)").truth, Truth::Inconclusive);
    assert_eq!(eval("F[0,2] (y(0) > 5)").truth, Truth::False);
    assert_eq!(eval("y(-1) = 0").truth, Truth::Inconclusive);
    assert_eq!(eval("y(1) = 1 + 1e-12").truth, Truth::True);

    let g = |text: &str| with_env(|env| eval_global(&parse(text).unwrap(), &beh, env).unwrap().truth);
    assert_eq!(g("@c. true"), Truth::True);
    assert_eq!(g("!(@c. y(9) = 0)"), Truth::Inconclusive);
    assert_eq!(g("(@c. true) && (@c. y(9) = 0)"), Truth::Inconclusive);
    assert_eq!(g("(@c. false) && (@c. y(9) = 0)"), Truth::False);
}

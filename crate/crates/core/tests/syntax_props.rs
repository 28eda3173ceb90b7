use std::collections::BTreeSet;

use copyless::frontend::{parse_etype, parse_process, parse_type};
use copyless::generate::{endpoint_type, process, qualified_type};
use copyless::syntax::{Name, Process, Subst};
use copyless::Symbol;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn endpoint_types_round_trip(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        let back = parse_etype(&t.to_string()).map_err(|e| TestCaseError::fail(format!("{t}: {e}")))?;
        prop_assert!(back.alpha_eq(&t), "{t} vs {back}");
    }

    #[test]
    fn qualified_types_round_trip(seed in any::<u64>()) {
        let t = qualified_type(&mut rng(seed), 12);
        let back = parse_type(&t.to_string()).map_err(|e| TestCaseError::fail(format!("{t}: {e}")))?;
        prop_assert!(back.alpha_eq(&t), "{t} vs {back}");
    }

    #[test]
    fn processes_round_trip(seed in any::<u64>()) {
        let p = process(&mut rng(seed), 4);
        let back = parse_process(&p.to_string()).map_err(|e| TestCaseError::fail(format!("{p}: {e}")))?;
        prop_assert!(back.alpha_eq(&p), "{p}\n{back}");
    }

    #[test]
    fn free_names_follow_substitution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = process(&mut r, 4);
        let fns: Vec<Name> = p.free_names().into_iter().collect();
        if fns.is_empty() {
            return Ok(());
        }
        let from = fns[r.gen_range(0..fns.len())].clone();
        let to = if r.gen_bool(0.5) { Name::ptr("fresh") } else { Name::shared("d") };
        let q = p.substitute(&Subst::Name { from: from.clone(), to: to.clone() });
        let mut expected: BTreeSet<Name> = p.free_names();
        expected.remove(&from);
        expected.insert(to);
        prop_assert_eq!(q.free_names(), expected, "{} [{}]", p, from);
        prop_assert_eq!(q.analyze().ftv, p.analyze().ftv);
    }

    #[test]
    fn process_substitution_keeps_names(seed in any::<u64>()) {
        let mut r = rng(seed);
        let body = process(&mut r, 3);
        let x = Symbol::new("Q");
        let p = Process::par(Process::Var(x.clone()), body.clone());
        let arg = process(&mut r, 3);
        let q = p.substitute(&Subst::Proc { var: x, proc: arg.clone() });
        let expected: BTreeSet<Name> = body.free_names().union(&arg.free_names()).cloned().collect();
        prop_assert_eq!(q.free_names(), expected);
    }
}

#[test]
fn process_round_trip_examples() {
    for s in [
        "0",
        "close(a)",
        "a!m<!x.end>(b, *c).0",
        "a?{m<t>(x: lin t).close(x), n.0}",
        "(close(a) (+) close(b)) | rec X.(X (+) 0)",
        "close(a) | (close(b) (+) close(c))",
        "open(a: ?m.end, b: !m.end).open(c: rec g.?m.g).(*c!m.0 | a?m.0)",
    ] {
        let p = parse_process(s).unwrap();
        assert!(parse_process(&p.to_string()).unwrap().alpha_eq(&p), "{s} -> {p}");
    }
}

use std::collections::BTreeSet;
use std::path::PathBuf;

use copyless::frontend::{expectations, parse_program};
use copyless::generate::process;
use copyless::runtime::{
    monitor, normalize, redexes, replay, run, run_tracked, step, Configuration, EnvTracker, Heap,
};
use copyless::syntax::Process;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Accepted fixtures without env or tyvars directives.
fn closed() -> Vec<(String, Process)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        if path.extension().is_none_or(|x| x != "proc") {
            continue;
        }
        let src = std::fs::read_to_string(&path).unwrap();
        let prog = parse_program(&src).unwrap();
        let ok = expectations(&src).iter().any(|(k, v)| k == "check" && v == "ok");
        if ok && prog.env.is_empty() && prog.tyvars.is_empty() {
            if let Some(m) = prog.main {
                out.push((path.file_stem().unwrap().to_string_lossy().into_owned(), m));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// At most one of two distinct peers has pending messages; a shared
/// channel is its own peer.
fn peer_queues_ok(h: &Heap) -> bool {
    h.cells.iter().all(|(a, e)| {
        e.queue.is_empty() || e.peer == *a || h.get(&e.peer).is_none_or(|p| p.queue.is_empty() || p.peer != *a)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn runs_are_deterministic_and_replayable(seed in any::<u64>(), pseed in any::<u64>()) {
        let p = process(&mut ChaCha8Rng::seed_from_u64(pseed), 4);
        let c0 = Configuration::initial(&p);
        let a = run(&c0, seed, 60);
        let b = run(&c0, seed, 60);
        prop_assert_eq!(&a.choices(), &b.choices());
        prop_assert_eq!(&a.verdict, &b.verdict);
        prop_assert_eq!(&a.config, &b.config);
        prop_assert_eq!(replay(&c0, &a.choices()), Some(a.config));
    }

    #[test]
    fn leaf_order_is_irrelevant(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = process(&mut r, 4);
        let mut c = Configuration::initial(&p);
        // walk a few steps so the heap is populated
        for _ in 0..r.gen_range(0..6) {
            let rs = redexes(&c);
            if rs.is_empty() || !monitor(&c).is_good() {
                break;
            }
            c = step(&c, rs[r.gen_range(0..rs.len())]).config;
        }
        let mut ls = c.leaves.clone();
        ls.shuffle(&mut r);
        let shuffled = Configuration::new(c.heap.clone(), &Process::par_all(ls));
        prop_assert_eq!(shuffled.key(), c.key());
        prop_assert_eq!(monitor(&shuffled), monitor(&c));
        prop_assert_eq!(redexes(&shuffled).len(), redexes(&c).len());
        prop_assert!(normalize(&normalize(&c.process())).alpha_eq(&normalize(&c.process())));
    }

    #[test]
    fn opened_locations_are_fresh(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = process(&mut r, 4);
        let mut c = Configuration::initial(&p);
        for _ in 0..40 {
            let rs = redexes(&c);
            if rs.is_empty() {
                break;
            }
            let before = c.heap.dom();
            let names: BTreeSet<String> = c.free_names().iter().map(|n| n.to_string()).collect();
            let next = step(&c, rs[r.gen_range(0..rs.len())]).config;
            for a in next.heap.dom().difference(&before) {
                prop_assert!(!names.contains(&a.to_string()) || p.free_names().iter().any(|n| n.to_string() == a.to_string()),
                    "{} was already in use in {}", a, c);
            }
            prop_assert!(next.heap.dom().len() >= before.len().saturating_sub(2));
            c = next;
        }
    }
}

#[test]
fn closed_fixtures_exist() {
    let names: Vec<String> = closed().into_iter().map(|(n, _)| n).collect();
    for n in ["ping_pong", "delegation", "stream", "transfer", "polymorphic", "service"] {
        assert!(names.contains(&n.to_string()), "{n}");
    }
}

#[test]
fn accepted_runs_keep_heap_invariants() {
    for (name, p) in closed() {
        let c0 = Configuration::initial(&p);
        for seed in 0..100 {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut c = c0.clone();
            for _ in 0..200 {
                assert!(peer_queues_ok(&c.heap), "{name} seed {seed}: {c}");
                assert!(monitor(&c).is_good(), "{name} seed {seed}: {}", monitor(&c));
                let rs = redexes(&c);
                if rs.is_empty() {
                    break;
                }
                c = step(&c, rs[r.gen_range(0..rs.len())]).config;
            }
        }
    }
}

#[test]
fn tracked_environments_type_the_heap() {
    for (name, p) in closed() {
        let c0 = Configuration::initial(&p);
        for seed in 0..100 {
            let res = run_tracked(&c0, seed, 200, Some(EnvTracker::new()));
            assert!(res.heap_check.is_none(), "{name} seed {seed}: {:?}", res.heap_check);
            assert!(res.verdict.is_good(), "{name} seed {seed}: {}", res.verdict);
        }
    }
}

#[test]
fn tracked_run_flags_ill_typed_heap() {
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/micidiale.proc")).unwrap();
    let c0 = Configuration::initial(&parse_program(&src).unwrap().main.unwrap());
    let res = run_tracked(&c0, 0, 200, Some(EnvTracker::new()));
    assert!(res.heap_check.is_some() || !res.verdict.is_good());
}

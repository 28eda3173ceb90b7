use std::collections::BTreeSet;

use copyless::algebra::oracle::default_cap;
use copyless::algebra::*;
use copyless::frontend::parse_type;
use copyless::generate::endpoint_type;
use copyless::syntax::{Branch, EndpointType, Polarity, Type};
use copyless::{Symbol, Tag};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn empty() -> TyVarSet {
    TyVarSet::new()
}

fn rec_var_in_args(t: &EndpointType) -> bool {
    fn go(t: &EndpointType, recs: &mut Vec<Symbol>, in_arg: bool) -> bool {
        match t {
            EndpointType::End => false,
            EndpointType::Var(a) => in_arg && recs.contains(a),
            EndpointType::Rec(a, b) => {
                recs.push(a.clone());
                let r = go(b, recs, in_arg);
                recs.pop();
                r
            }
            EndpointType::Choice(_, bs) => {
                bs.iter().any(|b| b.args.iter().any(|s| go(&s.body, recs, true)) || go(&b.cont, recs, in_arg))
            }
        }
    }
    go(t, &mut Vec::new(), false)
}

#[derive(Clone, Copy, PartialEq)]
enum Site {
    Arg,
    Cont,
    Any,
}

/// Replaces the `k`-th eligible `end` (cyclically) with `Var(a)`.
fn plant(t: &EndpointType, a: &Symbol, site: Site, k: usize) -> Option<EndpointType> {
    fn count(t: &EndpointType, site: Site, in_arg: bool) -> usize {
        match t {
            EndpointType::End => usize::from(site == Site::Any || (site == Site::Arg) == in_arg),
            EndpointType::Var(_) => 0,
            EndpointType::Rec(_, b) => count(b, site, in_arg),
            EndpointType::Choice(_, bs) => bs
                .iter()
                .map(|b| b.args.iter().map(|s| count(&s.body, site, true)).sum::<usize>() + count(&b.cont, site, in_arg))
                .sum(),
        }
    }
    fn go(t: &EndpointType, a: &Symbol, site: Site, in_arg: bool, k: &mut usize) -> EndpointType {
        match t {
            EndpointType::End => {
                if site == Site::Any || (site == Site::Arg) == in_arg {
                    if *k == 0 {
                        *k = usize::MAX;
                        return EndpointType::Var(a.clone());
                    }
                    *k = k.wrapping_sub(1);
                }
                EndpointType::End
            }
            EndpointType::Var(_) => t.clone(),
            EndpointType::Rec(x, b) => EndpointType::rec(x.clone(), go(b, a, site, in_arg, k)),
            EndpointType::Choice(p, bs) => {
                let bs = bs
                    .iter()
                    .map(|b| Branch {
                        tag: b.tag.clone(),
                        params: b.params.clone(),
                        args: b.args.iter().map(|s| Type { qual: s.qual, body: go(&s.body, a, site, true, k) }).collect(),
                        cont: go(&b.cont, a, site, in_arg, k),
                    })
                    .collect();
                EndpointType::choice(*p, bs).unwrap()
            }
        }
    }
    let n = count(t, site, false);
    if n == 0 {
        return None;
    }
    let mut k = k % n;
    Some(go(t, a, site, false, &mut k))
}

/// A supertype: along continuations, output choices lose a branch and
/// input choices gain one.
fn weaken<R: Rng>(t: &EndpointType, rng: &mut R) -> EndpointType {
    match t {
        EndpointType::End | EndpointType::Var(_) => t.clone(),
        // the variable may sit in a contravariant argument position
        EndpointType::Rec(..) if rec_var_in_args(t) => t.clone(),
        EndpointType::Rec(a, b) => EndpointType::rec(a.clone(), weaken(b, rng)),
        EndpointType::Choice(p, bs) => {
            let mut bs: Vec<Branch> = bs.iter().map(|b| Branch { cont: weaken(&b.cont, rng), ..b.clone() }).collect();
            match p {
                Polarity::Out if bs.len() > 1 && rng.gen_bool(0.5) => {
                    let i = rng.gen_range(0..bs.len());
                    bs.remove(i);
                }
                Polarity::In if rng.gen_bool(0.5) && bs.iter().all(|b| b.tag.as_str() != "z") => {
                    bs.push(Branch::simple("z", vec![Type::lin(EndpointType::End)], EndpointType::End));
                }
                _ => {}
            }
            EndpointType::choice(*p, bs).unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dual_is_an_involution(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        let dd = dual(&dual(&t).unwrap()).unwrap();
        prop_assert!(equivalent(&dd, &t), "{t} vs {dd}");
        if !rec_var_in_args(&t) {
            prop_assert!(dd.alpha_eq(&t), "{t} vs {dd}");
        }
    }

    #[test]
    fn dual_is_a_well_formed_dual(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        let d = dual(&t).unwrap();
        prop_assert!(is_dual_pair(&t, &d), "{t} / {d}");
        prop_assert_eq!(check_wf(&empty(), &empty(), &d), Ok(true));
    }

    #[test]
    fn subtyping_is_reflexive(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        prop_assert!(subtype(&t, &t));
        prop_assert!(subtype(&t, &t.canonical()));
    }

    #[test]
    fn weakening_yields_supertypes_transitively(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = endpoint_type(&mut r, 12);
        let s = weaken(&t, &mut r);
        let u = weaken(&s, &mut r);
        prop_assert!(subtype(&t, &s), "{t} <= {s}");
        prop_assert!(subtype(&s, &u), "{s} <= {u}");
        prop_assert!(subtype(&t, &u), "{t} <= {u}");
    }

    #[test]
    fn transitivity_on_random_triples(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (t, s, u) = (endpoint_type(&mut r, 8), endpoint_type(&mut r, 8), endpoint_type(&mut r, 8));
        if subtype(&t, &s) && subtype(&s, &u) {
            prop_assert!(subtype(&t, &u));
        }
    }

    #[test]
    fn duality_is_contravariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = endpoint_type(&mut r, 12);
        let s = if r.gen_bool(0.5) { weaken(&t, &mut r) } else { endpoint_type(&mut r, 12) };
        let (dt, ds) = (dual(&t).unwrap(), dual(&s).unwrap());
        prop_assert_eq!(subtype(&t, &s), subtype(&ds, &dt), "{} / {}", t, s);
    }

    #[test]
    fn weight_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = endpoint_type(&mut r, 12);
        let s = if r.gen_bool(0.5) { weaken(&t, &mut r) } else { endpoint_type(&mut r, 12) };
        let (tq, sq) = (Type::lin(t.clone()), Type::lin(s.clone()));
        if subtype_qualified(&tq, &sq) {
            prop_assert!(weight(&empty(), &t) <= weight(&empty(), &s), "{t} <= {s}");
        }
    }

    #[test]
    fn weight_is_unfold_invariant(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        if let EndpointType::Rec(..) = t {
            prop_assert_eq!(weight(&empty(), &t), weight(&empty(), &t.unfold().unwrap()));
        }
        prop_assert_eq!(weight(&empty(), &t), weight(&empty(), &t.unfold_all()));
    }

    #[test]
    fn subtype_agrees_with_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = endpoint_type(&mut r, 12);
        let s = if r.gen_bool(0.5) { weaken(&t, &mut r) } else { endpoint_type(&mut r, 12) };
        prop_assert_eq!(subtype(&t, &s), subtype_oracle(&t, &s, 400), "{} <= {}", t, s);
    }

    #[test]
    fn weight_agrees_with_oracle(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        prop_assert_eq!(weight(&empty(), &t), weight_oracle(&empty(), &t, default_cap(&t)), "{}", t);
    }

    #[test]
    fn substitution_keeps_weight_finite(seed in any::<u64>(), k in 0usize..16) {
        let mut r = rng(seed);
        let alpha = Symbol::new("alpha");
        let Some(t) = plant(&endpoint_type(&mut r, 10), &alpha, Site::Any, k) else { return Ok(()) };
        let s = endpoint_type(&mut r, 6);
        let da: TyVarSet = [alpha.clone()].into_iter().collect();
        if weight(&da, &t).is_finite() && weight(&empty(), &s).is_finite() {
            prop_assert!(weight(&empty(), &t.subst(&alpha, &s)).is_finite(), "{t} [{s}]");
        }
    }

    #[test]
    fn dual_commutes_with_inner_substitution(seed in any::<u64>(), k in 0usize..16) {
        let mut r = rng(seed);
        let alpha = Symbol::new("alpha");
        let Some(t) = plant(&endpoint_type(&mut r, 10), &alpha, Site::Arg, k) else { return Ok(()) };
        let inner: TyVarSet = [alpha.clone()].into_iter().collect();
        prop_assert_eq!(check_wf(&empty(), &inner, &t), Ok(true));
        let s = endpoint_type(&mut r, 6);
        let lhs = dual(&t.subst(&alpha, &s)).unwrap();
        let rhs = dual(&t).unwrap().subst(&alpha, &s);
        prop_assert!(equivalent(&lhs, &rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn inner_substitution_skips_continuations(seed in any::<u64>(), k in 0usize..16) {
        let mut r = rng(seed);
        let alpha = Symbol::new("alpha");
        let Some(t) = plant(&endpoint_type(&mut r, 10), &alpha, Site::Cont, k) else { return Ok(()) };
        let s = endpoint_type(&mut r, 6);
        prop_assert_eq!(t.subst_inner(&alpha, &s), t);
    }

    #[test]
    fn canonical_renaming_is_alpha_equal(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        prop_assert!(t.alpha_eq(&t.canonical()));
        prop_assert_eq!(t.canonical(), t.canonical().canonical());
    }

    #[test]
    fn unfold_preserves_invariants(seed in any::<u64>()) {
        let t = endpoint_type(&mut rng(seed), 12);
        if let EndpointType::Rec(..) = t {
            let u = t.unfold().unwrap();
            prop_assert!(u.check_contractive().is_ok());
            prop_assert!(u.validate().is_ok());
            prop_assert!(is_wf(&empty(), &u));
        }
    }
}

#[test]
fn types_without_prefixes_ignore_inner_substitution() {
    let alpha = Symbol::new("alpha");
    for t in [EndpointType::End, EndpointType::Var(alpha.clone()), EndpointType::var("b")] {
        assert_eq!(t.subst_inner(&alpha, &EndpointType::End), t);
    }
}

fn enc(s: &Type, t: &Type) -> Type {
    let a = Symbol::new("fa");
    let body = EndpointType::prefix(
        Polarity::In,
        Branch::simple("Arg", vec![s.clone()], EndpointType::prefix(Polarity::Out, Branch::simple("Res", vec![t.clone()], EndpointType::End))),
    );
    Type::un(EndpointType::rec(a.clone(), EndpointType::prefix(Polarity::Out, Branch::simple("Invoke", vec![Type::lin(body)], EndpointType::Var(a)))))
}

fn small_types() -> Vec<Type> {
    ["lin end", "lin !a.end", "lin !{a.end, b.end}", "lin ?a.end", "lin ?{a.end, b.end}", "un rec x.!a.x", "un rec x.!{a.x, b.x}"]
        .iter()
        .map(|s| parse_type(s).unwrap())
        .collect()
}

#[test]
fn encoded_functions_are_contravariant_in_domain() {
    let ts = small_types();
    let mut n = 0;
    for s1 in &ts {
        for t1 in &ts {
            for s2 in &ts {
                for t2 in &ts {
                    let lhs = subtype_qualified(&enc(s1, t1), &enc(s2, t2));
                    let rhs = subtype_qualified(s2, s1) && subtype_qualified(t1, t2);
                    assert_eq!(lhs, rhs, "{s1} -> {t1} vs {s2} -> {t2}");
                    n += 1;
                }
            }
        }
    }
    assert!(n >= 50);
}

fn object(methods: &BTreeSet<&str>) -> EndpointType {
    let a = Symbol::new("o");
    let bs = methods
        .iter()
        .map(|m| Branch { tag: Tag::new(m), params: vec![], args: vec![Type::lin(EndpointType::End)], cont: EndpointType::Var(a.clone()) })
        .collect();
    EndpointType::rec(a, EndpointType::output(bs).unwrap())
}

#[test]
fn objects_with_more_methods_are_subtypes() {
    let tags = ["a", "b", "c", "d"];
    let subsets: Vec<BTreeSet<&str>> = (1u32..16)
        .map(|mask| tags.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, t)| *t).collect())
        .collect();
    let mut n = 0;
    for i in &subsets {
        for j in &subsets {
            assert_eq!(subtype(&object(i), &object(j)), j.is_subset(i), "{i:?} vs {j:?}");
            n += 1;
        }
    }
    assert!(n >= 50);
}

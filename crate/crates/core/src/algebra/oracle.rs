//! Brute-force reference implementations used to cross-check the
//! algorithms: a bounded greatest-fixpoint subtyping check and a direct
//! search for the least weight bound.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::algebra::weight::Weight;
use crate::algebra::wf::TyVarSet;
use crate::symbol::{Fresh, Symbol, TyVar};
use crate::syntax::{EndpointType, Polarity};

/// Head normal form: leading recursions unfolded.
fn hnf(t: &EndpointType) -> EndpointType {
    t.unfold_all()
}

/// Variable standing for the pair `(a, b)` of matched binders.
fn pair_var(a: &TyVar, b: &TyVar) -> TyVar {
    Symbol::new(&format!("#{a}|{b}"))
}

#[derive(Clone)]
struct Node {
    ok: bool,
    succ: Vec<usize>,
}

/// Coinductive subtyping approximated by exploring the graph of pairs
/// reachable within `fuel` decomposition steps; pairs beyond the horizon
/// are assumed related.
pub fn subtype_oracle(t: &EndpointType, s: &EndpointType, fuel: usize) -> bool {
    let mut fresh = Fresh::above(t.max_stamp().max(s.max_stamp()));
    let t = t.rename_binders(&mut fresh);
    let s = s.rename_binders(&mut fresh);

    let mut index: HashMap<(EndpointType, EndpointType), usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut pairs: Vec<(EndpointType, EndpointType)> = Vec::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();

    let mut intern = |t: EndpointType,
                      s: EndpointType,
                      depth: usize,
                      nodes: &mut Vec<Node>,
                      pairs: &mut Vec<(EndpointType, EndpointType)>,
                      queue: &mut VecDeque<(usize, usize)>|
     -> usize {
        let (t, s) = (hnf(&t), hnf(&s));
        let key = (t.canonical(), s.canonical());
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let i = nodes.len();
        index.insert(key, i);
        nodes.push(Node { ok: true, succ: Vec::new() });
        pairs.push((t, s));
        queue.push_back((i, depth));
        i
    };

    let root = intern(t, s, 0, &mut nodes, &mut pairs, &mut queue);
    while let Some((i, depth)) = queue.pop_front() {
        if depth >= fuel {
            continue;
        }
        let (t, s) = pairs[i].clone();
        let mut ok = true;
        let mut children: Vec<(EndpointType, EndpointType)> = Vec::new();
        match (&t, &s) {
            (EndpointType::End, EndpointType::End) => {}
            (EndpointType::Var(a), EndpointType::Var(b)) => ok = a == b,
            (EndpointType::Choice(p, bs), EndpointType::Choice(q, cs)) if p == q => {
                let input = *p == Polarity::In;
                let (small, large) = if input { (bs, cs) } else { (cs, bs) };
                for x in small {
                    let Some(y) = large.iter().find(|y| y.tag == x.tag) else {
                        ok = false;
                        break;
                    };
                    let (l, r) = if input { (x, y) } else { (y, x) };
                    if l.params.len() != r.params.len() || l.args.len() != r.args.len() {
                        ok = false;
                        break;
                    }
                    let mut ml = BTreeMap::new();
                    let mut mr = BTreeMap::new();
                    for (a, b) in l.params.iter().zip(&r.params) {
                        let v = EndpointType::Var(pair_var(a, b));
                        ml.insert(a.clone(), v.clone());
                        mr.insert(b.clone(), v);
                    }
                    for (ta, sa) in l.args.iter().zip(&r.args) {
                        let (tq, sq) = if input { (ta.qual, sa.qual) } else { (sa.qual, ta.qual) };
                        if !tq.le(sq) {
                            ok = false;
                        }
                        let (a1, a2) = (ta.body.subst_many(&ml), sa.body.subst_many(&mr));
                        children.push(if input { (a1, a2) } else { (a2, a1) });
                    }
                    children.push((l.cont.subst_many(&ml), r.cont.subst_many(&mr)));
                }
            }
            _ => ok = false,
        }
        nodes[i].ok = ok;
        if ok {
            for (a, b) in children {
                let j = intern(a, b, depth + 1, &mut nodes, &mut pairs, &mut queue);
                nodes[i].succ.push(j);
            }
        }
    }

    // Greatest fixpoint: drop every pair with a failing successor.
    loop {
        let mut changed = false;
        for i in 0..nodes.len() {
            if nodes[i].ok && nodes[i].succ.iter().any(|&j| !nodes[j].ok) {
                nodes[i].ok = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    nodes[root].ok
}

/// `Δ ⊢ t :: n`, decided as the greatest fixpoint over reachable
/// `(t, n)` states.
pub fn has_weight_bound(delta: &TyVarSet, t: &EndpointType, n: u64) -> bool {
    let hi = delta.iter().map(|a| a.stamp()).max().unwrap_or(0).max(t.max_stamp());
    let mut fresh = Fresh::above(hi);
    let t = t.rename_binders(&mut fresh);

    let mut index: HashMap<(EndpointType, u64), usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut states: Vec<(EndpointType, u64)> = Vec::new();
    let mut todo = Vec::new();

    let mut intern = |t: EndpointType, n: u64, nodes: &mut Vec<Node>, states: &mut Vec<_>, todo: &mut Vec<usize>| {
        let t = hnf(&t);
        let key = (t.canonical(), n);
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let i = nodes.len();
        index.insert(key, i);
        nodes.push(Node { ok: true, succ: Vec::new() });
        states.push((t, n));
        todo.push(i);
        i
    };

    let root = intern(t, n, &mut nodes, &mut states, &mut todo);
    while let Some(i) = todo.pop() {
        let (t, n) = states[i].clone();
        match &t {
            EndpointType::End | EndpointType::Choice(Polarity::Out, _) => {}
            EndpointType::Var(a) => nodes[i].ok = delta.contains(a),
            EndpointType::Rec(..) => nodes[i].ok = false,
            EndpointType::Choice(Polarity::In, bs) => {
                // n > 0 is needed only to bound arguments; a zero-argument
                // message carries no pointer.
                let has_args = bs.iter().any(|b| !b.args.is_empty());
                if (n == 0 && has_args) || bs.iter().any(|b| b.params.iter().any(|p| delta.contains(p))) {
                    nodes[i].ok = false;
                    continue;
                }
                let mut succ = Vec::new();
                for b in bs {
                    for a in &b.args {
                        succ.push(intern(a.body.clone(), n - 1, &mut nodes, &mut states, &mut todo));
                    }
                    succ.push(intern(b.cont.clone(), n, &mut nodes, &mut states, &mut todo));
                }
                nodes[i].succ = succ;
            }
        }
    }
    loop {
        let mut changed = false;
        for i in 0..nodes.len() {
            if nodes[i].ok && nodes[i].succ.iter().any(|&j| !nodes[j].ok) {
                nodes[i].ok = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    nodes[root].ok
}

/// Least `n <= cap` with `Δ ⊢ t :: n`, or infinity.
pub fn weight_oracle(delta: &TyVarSet, t: &EndpointType, cap: u64) -> Weight {
    (0..=cap).find(|&n| has_weight_bound(delta, t, n)).map(Weight::Finite).unwrap_or(Weight::Infinite)
}

/// Default search bound: number of prefixes plus two.
pub fn default_cap(t: &EndpointType) -> u64 {
    t.prefix_count() as u64 + 2
}

//! Seeded random runs, replay and bounded exhaustive exploration.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::Configuration;
use super::monitor::{monitor, MonitorVerdict};
use super::semantics::{redexes, step, Rule};
use super::tracker::EnvTracker;
use crate::checker::HeapVerdict;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub rule: Rule,
    pub redex: String,
    #[serde(rename = "heapDomain")]
    pub heap_domain: Vec<String>,
    /// Index into the redex list the scheduler picked.
    pub choice: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    #[serde(skip)]
    pub config: Configuration,
    pub trace: Vec<TraceEvent>,
    pub verdict: MonitorVerdict,
    pub steps: usize,
    /// First step after which the tracked environments failed to type the heap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heap_check: Option<(usize, HeapVerdict)>,
}

impl RunResult {
    pub fn choices(&self) -> Vec<usize> {
        self.trace.iter().map(|e| e.choice).collect()
    }
}

fn event(n: usize, c: &Configuration, rule: Rule, redex: String, choice: usize) -> TraceEvent {
    TraceEvent { step: n, rule, redex, heap_domain: c.heap.dom().iter().map(|a| a.to_string()).collect(), choice }
}

/// Runs with uniformly random redex choice until a violation, quiescence or
/// `max_steps`.
pub fn run(c0: &Configuration, seed: u64, max_steps: usize) -> RunResult {
    run_tracked(c0, seed, max_steps, None)
}

/// As [`run`], also typing the heap after every step when a tracker is given.
pub fn run_tracked(c0: &Configuration, seed: u64, max_steps: usize, mut tracker: Option<EnvTracker>) -> RunResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = c0.clone();
    let mut trace = Vec::new();
    let mut heap_check = None;
    let mut verdict = monitor(&c);
    while verdict.is_good() && trace.len() < max_steps {
        let rs = redexes(&c);
        if rs.is_empty() {
            break;
        }
        let k = rng.gen_range(0..rs.len());
        let s = step(&c, rs[k]);
        c = s.config;
        trace.push(event(trace.len(), &c, rs[k].rule, s.description, k));
        if let Some(t) = tracker.as_mut() {
            t.apply(&s.effect);
            if heap_check.is_none() {
                let v = t.check(&c);
                if !v.is_ok() {
                    heap_check = Some((trace.len(), v));
                }
            }
        }
        verdict = monitor(&c);
    }
    let steps = trace.len();
    RunResult { config: c, trace, verdict, steps, heap_check }
}

/// Re-applies recorded redex choices.
pub fn replay(c0: &Configuration, choices: &[usize]) -> Option<Configuration> {
    let mut c = c0.clone();
    for &k in choices {
        let rs = redexes(&c);
        c = step(&c, *rs.get(k)?).config;
    }
    Some(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub verdict: MonitorVerdict,
    pub path: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExploreReport {
    pub states: usize,
    pub depth: usize,
    pub max_depth_reached: usize,
    pub stuck: usize,
    pub violations: Vec<Violation>,
    pub truncated: bool,
}

pub const DEFAULT_STATE_BUDGET: usize = 200_000;

/// Breadth-first closure up to `depth` steps, deduplicated up to bound
/// names. Stops expanding once `budget` distinct states are seen.
pub fn explore(c0: &Configuration, depth: usize, budget: usize) -> ExploreReport {
    let mut seen = HashSet::new();
    seen.insert(c0.key());
    let mut queue = VecDeque::from([(c0.clone(), Vec::<usize>::new())]);
    let mut rep = ExploreReport { states: 1, depth, max_depth_reached: 0, stuck: 0, violations: vec![], truncated: false };
    while let Some((c, path)) = queue.pop_front() {
        rep.max_depth_reached = rep.max_depth_reached.max(path.len());
        let v = monitor(&c);
        if !v.is_good() {
            rep.violations.push(Violation { verdict: v, path });
            continue;
        }
        if v == MonitorVerdict::StuckOK {
            rep.stuck += 1;
        }
        if path.len() >= depth {
            continue;
        }
        for (k, r) in redexes(&c).into_iter().enumerate() {
            let next = step(&c, r).config;
            if !seen.insert(next.key()) {
                continue;
            }
            if seen.len() > budget {
                rep.truncated = true;
                seen.remove(&next.key());
                queue.clear();
                break;
            }
            let mut p = path.clone();
            p.push(k);
            queue.push_back((next, p));
        }
    }
    rep.states = seen.len();
    rep
}

/// Successor configurations, one per redex.
pub fn successors(c: &Configuration) -> Vec<Configuration> {
    redexes(c).into_iter().map(|r| step(c, r).config).collect()
}

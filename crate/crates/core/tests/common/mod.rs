//! Random model strategies and brute-force oracles shared by the property
//! tests. Oracles only read the model's public data and never call the
//! scoring or engine code they are compared against.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sadp_core::{
    build_application, ApplicationModel, AttributeCatalog, Edge, ExecutionProfile, Microservice, Modality,
    ModalityDecision, OptimizationObjective, Relevance,
};

pub const CATALOG_KEYS: [&str; 4] = ["resources", "qos", "power", "cost"];

fn profile() -> impl Strategy<Value = ExecutionProfile> {
    (0u32..40, 0u32..60, 0u32..20, 0u32..=10).prop_map(|(p, d, r, q)| ExecutionProfile {
        power_watts: p as f64 * 0.5,
        duration_ms: d as f64 * 10.0,
        reward_units: r as f64,
        quality_score: q as f64 / 10.0,
    })
}

fn relevance() -> impl Strategy<Value = Relevance> {
    prop_oneof![Just(Relevance::Mandatory), Just(Relevance::Optional), Just(Relevance::Unannotated)]
}

fn task(index: usize) -> impl Strategy<Value = Microservice> {
    (
        relevance(),
        proptest::collection::btree_set(0usize..6, 0..6),
        profile(),
        proptest::collection::btree_map(0usize..3, profile(), 0..=3),
    )
        .prop_map(move |(relevance, keys, baseline, variants)| {
            let mut m = Microservice::new(format!("m{index}")).relevance(relevance).baseline(baseline);
            for k in keys {
                // Indices 4 and 5 are foreign keys outside the catalog.
                let key = CATALOG_KEYS.get(k).map(|s| s.to_string()).unwrap_or_else(|| format!("extra{k}"));
                m.annotations.insert(key, "v".into());
            }
            for (v, p) in variants {
                m.declared_variants.insert(Modality::ALL[v], p);
            }
            m
        })
}

/// Models with `1..=max_tasks` tasks and random forward edges (so always a
/// DAG); task order is shuffled relative to the edge direction.
pub fn model(max_tasks: usize) -> impl Strategy<Value = ApplicationModel> {
    (1..=max_tasks)
        .prop_flat_map(|n| {
            let tasks: Vec<_> = (0..n).map(task).collect();
            let pairs = n * n.saturating_sub(1) / 2;
            let perm = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
            (tasks, proptest::collection::vec(any::<bool>(), pairs), perm)
        })
        .prop_map(|(tasks, edge_bits, perm)| {
            let n = tasks.len();
            let mut edges = Vec::new();
            let mut bit = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if edge_bits[bit] {
                        edges.push(Edge::new(format!("m{}", perm[i]), format!("m{}", perm[j])));
                    }
                    bit += 1;
                }
            }
            build_application("random", tasks, edges, BTreeMap::new(), AttributeCatalog::default()).unwrap()
        })
}

pub fn objective() -> impl Strategy<Value = OptimizationObjective> {
    (0u32..4, 0u32..4, 0u32..4, proptest::option::of(0u32..200), proptest::option::of(0u32..60))
        .prop_filter("one positive weight", |(e, t, r, _, _)| e + t + r > 0)
        .prop_map(|(e, t, r, rt, en)| OptimizationObjective {
            weight_energy: e as f64 * 0.5,
            weight_time: t as f64 * 0.01,
            weight_reward: r as f64,
            max_response_time_ms: rt.map(|x| x as f64 * 10.0),
            max_energy_j: en.map(|x| x as f64 * 0.5),
        })
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

pub fn oracle_step1(model: &ApplicationModel) -> f64 {
    let mut hits = 0usize;
    for m in model.microservices() {
        for key in CATALOG_KEYS {
            if m.annotations.contains_key(key) {
                hits += 1;
            }
        }
    }
    hits as f64 / (CATALOG_KEYS.len() * model.microservices().len()) as f64
}

pub fn oracle_step2_explicit(model: &ApplicationModel) -> f64 {
    let optional = model.microservices().iter().filter(|m| m.relevance == Relevance::Optional).count();
    let mandatory = model.microservices().iter().filter(|m| m.relevance == Relevance::Mandatory).count();
    (optional + mandatory) as f64 / model.microservices().len() as f64
}

/// Literal union test `M_O ∪ M_M ≠ ∅`.
pub fn oracle_step2_implicit(model: &ApplicationModel) -> f64 {
    let optional: BTreeSet<&str> =
        model.microservices().iter().filter(|m| m.relevance == Relevance::Optional).map(|m| m.id.as_str()).collect();
    let mandatory: BTreeSet<&str> =
        model.microservices().iter().filter(|m| m.relevance == Relevance::Mandatory).map(|m| m.id.as_str()).collect();
    if optional.union(&mandatory).next().is_some() {
        1.0
    } else {
        0.0
    }
}

pub fn oracle_step3(model: &ApplicationModel) -> f64 {
    let mut count = 0usize;
    for m in model.microservices() {
        for v in Modality::ALL {
            if m.declared_variants.contains_key(&v) {
                count += 1;
            }
        }
    }
    count as f64 / (3 * model.microservices().len()) as f64
}

/// Enumerates every source-to-sink path and returns the largest duration sum.
pub fn brute_force_longest_path(model: &ApplicationModel, durations: &BTreeMap<String, f64>) -> f64 {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut has_pred: BTreeSet<&str> = BTreeSet::new();
    for e in model.edges() {
        succ.entry(e.from_id.as_str()).or_default().push(e.to_id.as_str());
        has_pred.insert(e.to_id.as_str());
    }
    fn walk(node: &str, acc: f64, succ: &BTreeMap<&str, Vec<&str>>, durations: &BTreeMap<String, f64>) -> f64 {
        let here = acc + durations[node];
        match succ.get(node) {
            None => here,
            Some(next) => next.iter().map(|n| walk(n, here, succ, durations)).fold(here, f64::max),
        }
    }
    model
        .microservices()
        .iter()
        .filter(|m| !has_pred.contains(m.id.as_str()))
        .map(|m| walk(&m.id, 0.0, &succ, durations))
        .fold(0.0, f64::max)
}

pub struct OracleOutcome {
    pub energy: f64,
    pub response: f64,
    pub reward: f64,
}

/// Direct simulation of one decision map.
pub fn oracle_simulate(model: &ApplicationModel, decisions: &BTreeMap<String, ModalityDecision>) -> OracleOutcome {
    let mut energy = 0.0;
    let mut reward = 0.0;
    let mut durations = BTreeMap::new();
    for m in model.microservices() {
        let wanted = match decisions[&m.id] {
            ModalityDecision::Skip => None,
            ModalityDecision::UseNormal => Some(Modality::Normal),
            ModalityDecision::UseLowPower => Some(Modality::LowPower),
            ModalityDecision::UseHighPerformance => Some(Modality::HighPerformance),
        };
        let duration = match wanted {
            None => 0.0,
            Some(v) => {
                let p = m.declared_variants.get(&v).copied().unwrap_or(m.baseline_profile);
                energy += p.power_watts * p.duration_ms / 1000.0;
                reward += p.reward_units;
                p.duration_ms
            }
        };
        durations.insert(m.id.clone(), duration);
    }
    OracleOutcome { energy, response: brute_force_longest_path(model, &durations), reward }
}

/// Minimum objective over every feasible assignment, by exhaustive
/// enumeration of all 4^|M| decision vectors. `None` when no assignment
/// meets the bounds.
pub fn oracle_optimum(model: &ApplicationModel, objective: &OptimizationObjective) -> Option<f64> {
    let tasks = model.microservices();
    let n = tasks.len();
    let mut best: Option<f64> = None;
    for code in 0..4usize.pow(n as u32) {
        let mut decisions = BTreeMap::new();
        let mut c = code;
        let mut allowed = true;
        for m in tasks {
            let d = ModalityDecision::ALL[c % 4];
            c /= 4;
            allowed &= match d {
                ModalityDecision::Skip => m.relevance == Relevance::Optional,
                ModalityDecision::UseNormal => true,
                ModalityDecision::UseLowPower => m.declared_variants.contains_key(&Modality::LowPower),
                ModalityDecision::UseHighPerformance => m.declared_variants.contains_key(&Modality::HighPerformance),
            };
            decisions.insert(m.id.clone(), d);
        }
        if !allowed {
            continue;
        }
        let o = oracle_simulate(model, &decisions);
        if objective.max_response_time_ms.is_some_and(|b| o.response > b)
            || objective.max_energy_j.is_some_and(|b| o.energy > b)
        {
            continue;
        }
        let cost = objective.weight_energy * o.energy + objective.weight_time * o.response
            - objective.weight_reward * o.reward;
        if best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
    }
    best
}

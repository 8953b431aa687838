//! Seeded model generator and brute-force oracles for the integration and
//! acceptance tests. The oracles read only public model data.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use sadp_core::{
    build_application, ApplicationModel, AttributeCatalog, Comparator, Condition, DecisionTable, Edge,
    ExecutionProfile, HitPolicy, InputDecl, Microservice, Modality, ModalityDecision, OptimizationObjective,
    Relevance, Rule, Value,
};

pub const CATALOG_KEYS: [&str; 4] = ["resources", "qos", "power", "cost"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn random_profile(rng: &mut StdRng) -> ExecutionProfile {
    ExecutionProfile {
        power_watts: rng.gen_range(0..40) as f64 * 0.5,
        duration_ms: rng.gen_range(0..60) as f64 * 10.0,
        reward_units: rng.gen_range(0..20) as f64,
        quality_score: rng.gen_range(0..=10) as f64 / 10.0,
    }
}

/// A profile with arbitrary finite, non-round values, to exercise number
/// formatting.
pub fn awkward_profile(rng: &mut StdRng) -> ExecutionProfile {
    ExecutionProfile {
        power_watts: rng.gen::<f64>() * 1e3,
        duration_ms: rng.gen::<f64>() * 1e4,
        reward_units: rng.gen::<f64>() * 100.0 - 20.0,
        quality_score: rng.gen::<f64>(),
    }
}

pub fn random_relevance(rng: &mut StdRng) -> Relevance {
    *[Relevance::Mandatory, Relevance::Optional, Relevance::Unannotated].choose(rng).unwrap()
}

/// Tasks `m0..m{n-1}` with random annotations (including keys outside the
/// catalog), relevance, variants and forward edges over a shuffled order.
pub fn random_tasks(rng: &mut StdRng, n: usize, awkward: bool) -> (Vec<Microservice>, Vec<Edge>) {
    let mut tasks = Vec::with_capacity(n);
    for i in 0..n {
        let profile = |rng: &mut StdRng| if awkward { awkward_profile(rng) } else { random_profile(rng) };
        let mut m = Microservice::new(format!("m{i}")).relevance(random_relevance(rng)).baseline(profile(rng));
        if rng.gen_bool(0.3) {
            m.name = format!("Task {i}");
        }
        for k in 0..6 {
            if rng.gen_bool(0.5) {
                let key = CATALOG_KEYS.get(k).map_or_else(|| format!("extra{k}"), |s| s.to_string());
                m.annotations.insert(key, format!("value {}", rng.gen_range(0..100)));
            }
        }
        for v in Modality::ALL {
            if rng.gen_bool(0.4) {
                m.declared_variants.insert(v, profile(rng));
            }
        }
        tasks.push(m);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.3) {
                edges.push(Edge::new(format!("m{}", order[i]), format!("m{}", order[j])));
            }
        }
    }
    (tasks, edges)
}

pub fn random_model(rng: &mut StdRng, max_tasks: usize) -> ApplicationModel {
    let n = rng.gen_range(1..=max_tasks);
    let (tasks, edges) = random_tasks(rng, n, false);
    build_application("random", tasks, edges, BTreeMap::new(), AttributeCatalog::default()).unwrap()
}

fn random_decision(rng: &mut StdRng) -> ModalityDecision {
    *ModalityDecision::ALL.choose(rng).unwrap()
}

pub fn random_table(rng: &mut StdRng, id: &str) -> DecisionTable {
    let mut table = DecisionTable::new(id)
        .input(InputDecl::number("power", Some("kW")))
        .input(InputDecl::boolean("renewable"))
        .input(InputDecl::string("region"));
    table.hit_policy = if rng.gen_bool(0.5) { HitPolicy::First } else { HitPolicy::Unique };
    table.default_output = random_decision(rng);
    for r in 0..rng.gen_range(0..4) {
        let mut conditions = Vec::new();
        if rng.gen_bool(0.7) {
            let op = *Comparator::ALL.choose(rng).unwrap();
            let literal = Value::number(rng.gen_range(0..100) as f64 / 4.0, Some("kW"));
            conditions.push(Condition::new("power", op, literal).unwrap());
        }
        if rng.gen_bool(0.4) {
            let op = if rng.gen_bool(0.5) { Comparator::Eq } else { Comparator::Ne };
            conditions.push(Condition::new("renewable", op, Value::Boolean(rng.gen())).unwrap());
        }
        if rng.gen_bool(0.3) {
            conditions.push(Condition::new("region", Comparator::Eq, Value::Text(format!("eu-{}", rng.gen_range(0..3)))).unwrap());
        }
        let mut rule = Rule::new(conditions, random_decision(rng));
        if rng.gen_bool(0.5) {
            rule = rule.labeled(format!("r{r}"));
        }
        table.rules.push(rule);
    }
    table
}

/// A random model with random decision tables attached to some tasks and
/// a random catalog; used for serialization round trips.
pub fn random_rich_model(rng: &mut StdRng, max_tasks: usize) -> ApplicationModel {
    let n = rng.gen_range(1..=max_tasks);
    let (mut tasks, edges) = random_tasks(rng, n, true);
    let mut tables = BTreeMap::new();
    for t in 0..rng.gen_range(0..3) {
        let id = format!("table{t}");
        tables.insert(id.clone(), random_table(rng, &id));
    }
    for task in &mut tasks {
        if !tables.is_empty() && rng.gen_bool(0.4) {
            let pick = rng.gen_range(0..tables.len());
            task.decision_table_ref = tables.keys().nth(pick).cloned();
        }
    }
    let catalog = if rng.gen_bool(0.5) {
        AttributeCatalog::default()
    } else {
        use sadp_core::AttributeCategory::*;
        AttributeCatalog::new([("qos".to_string(), Quality), ("latency".to_string(), Quality), ("co2".to_string(), Sustainability)])
            .unwrap()
    };
    build_application("rich", tasks, edges, tables, catalog).unwrap()
}

pub fn random_objective(rng: &mut StdRng) -> OptimizationObjective {
    loop {
        let (e, t, r) = (rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4));
        if e + t + r == 0 {
            continue;
        }
        return OptimizationObjective {
            weight_energy: e as f64 * 0.5,
            weight_time: t as f64 * 0.01,
            weight_reward: r as f64,
            max_response_time_ms: rng.gen_bool(0.4).then(|| rng.gen_range(0..200) as f64 * 10.0),
            max_energy_j: rng.gen_bool(0.3).then(|| rng.gen_range(0..60) as f64 * 0.5),
        };
    }
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

pub fn oracle_step1(model: &ApplicationModel) -> f64 {
    let catalog: Vec<&str> = model.catalog().iter().map(|(k, _)| k).collect();
    let hits: usize = model
        .microservices()
        .iter()
        .map(|m| catalog.iter().filter(|k| m.annotations.contains_key(**k)).count())
        .sum();
    hits as f64 / (catalog.len() * model.len()) as f64
}

pub fn oracle_step2_explicit(model: &ApplicationModel) -> f64 {
    let tagged = model.microservices().iter().filter(|m| m.relevance != Relevance::Unannotated).count();
    tagged as f64 / model.len() as f64
}

pub fn oracle_step2_implicit(model: &ApplicationModel) -> f64 {
    if model.microservices().iter().any(|m| m.relevance != Relevance::Unannotated) {
        1.0
    } else {
        0.0
    }
}

pub fn oracle_step3(model: &ApplicationModel) -> f64 {
    let declared: usize = model.microservices().iter().map(|m| m.declared_variants.len()).sum();
    declared as f64 / (3 * model.len()) as f64
}

/// Largest duration sum over every source-to-sink path.
pub fn brute_force_longest_path(model: &ApplicationModel, durations: &BTreeMap<String, f64>) -> f64 {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut has_pred = BTreeSet::new();
    for e in model.edges() {
        succ.entry(e.from_id.as_str()).or_default().push(e.to_id.as_str());
        has_pred.insert(e.to_id.as_str());
    }
    fn walk(node: &str, acc: f64, succ: &BTreeMap<&str, Vec<&str>>, durations: &BTreeMap<String, f64>) -> f64 {
        let here = acc + durations[node];
        succ.get(node)
            .map_or(here, |next| next.iter().map(|n| walk(n, here, succ, durations)).fold(here, f64::max))
    }
    model
        .microservices()
        .iter()
        .filter(|m| !has_pred.contains(m.id.as_str()))
        .map(|m| walk(&m.id, 0.0, &succ, durations))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub energy: f64,
    pub response: f64,
    pub reward: f64,
}

pub fn oracle_simulate(model: &ApplicationModel, decisions: &BTreeMap<String, ModalityDecision>) -> OracleOutcome {
    let mut energy = 0.0;
    let mut reward = 0.0;
    let mut durations = BTreeMap::new();
    for m in model.microservices() {
        let mut d = decisions[&m.id];
        if d == ModalityDecision::Skip && m.relevance != Relevance::Optional {
            d = ModalityDecision::UseNormal;
        }
        let duration = match d.modality() {
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

/// Minimum objective over all 4^|M| decision vectors that are allowed and
/// meet the bounds.
pub fn oracle_optimum(model: &ApplicationModel, objective: &OptimizationObjective) -> Option<f64> {
    let tasks = model.microservices();
    let mut best: Option<f64> = None;
    for code in 0..4usize.pow(tasks.len() as u32) {
        let mut c = code;
        let mut decisions = BTreeMap::new();
        let mut allowed = true;
        for m in tasks {
            let d = ModalityDecision::ALL[c % 4];
            c /= 4;
            allowed &= match d.modality() {
                None => m.relevance == Relevance::Optional,
                Some(Modality::Normal) => true,
                Some(v) => m.declared_variants.contains_key(&v),
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

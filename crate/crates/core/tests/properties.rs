mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sadp_core::engine::feasible_decisions;
use sadp_core::*;

use common::*;

fn rebuild(model: &ApplicationModel, edit: impl FnOnce(&mut Vec<Microservice>)) -> ApplicationModel {
    let (id, mut ms, edges, tables, catalog) = model.clone().into_parts();
    edit(&mut ms);
    build_application(id, ms, edges, tables, catalog).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scores_match_direct_counts(model in model(8)) {
        let s1 = step1_score(&model);
        let s2e = step2_score_explicit(&model);
        let s2i = step2_score_implicit(&model);
        let s3 = step3_score(&model);
        for s in [s1, s2e, s2i, s3] {
            prop_assert!((0.0..=1.0).contains(&s));
        }
        prop_assert!((s1 - oracle_step1(&model)).abs() <= 1e-12);
        prop_assert!((s2e - oracle_step2_explicit(&model)).abs() <= 1e-12);
        prop_assert!((s2i - oracle_step2_implicit(&model)).abs() <= 1e-12);
        prop_assert!((s3 - oracle_step3(&model)).abs() <= 1e-12);
        prop_assert_eq!(s2i == 0.0, s2e == 0.0);
    }

    #[test]
    fn scores_are_monotone(model in model(8), pick in any::<prop::sample::Index>(), key in 0usize..4, var in 0usize..3) {
        let i = pick.index(model.len());
        let more_annotations = rebuild(&model, |ms| {
            ms[i].annotations.insert(CATALOG_KEYS[key].into(), "x".into());
        });
        prop_assert!(step1_score(&more_annotations) >= step1_score(&model));

        let more_variants = rebuild(&model, |ms| {
            ms[i].declared_variants.insert(Modality::ALL[var], ExecutionProfile::default());
        });
        prop_assert!(step3_score(&more_variants) >= step3_score(&model));

        if model.microservices()[i].relevance == Relevance::Unannotated {
            let tagged = rebuild(&model, |ms| ms[i].relevance = Relevance::Mandatory);
            prop_assert!(step2_score_explicit(&tagged) >= step2_score_explicit(&model));
        }
    }

    #[test]
    fn topological_order_is_a_valid_permutation(model in model(10)) {
        let order = topological_order(&model);
        let pos: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        prop_assert_eq!(pos.len(), model.len());
        for m in model.microservices() {
            prop_assert!(pos.contains_key(m.id.as_str()));
        }
        for e in model.edges() {
            prop_assert!(pos[e.from_id.as_str()] < pos[e.to_id.as_str()]);
        }
    }

    #[test]
    fn relevance_partitions_the_model(model in model(8)) {
        let count = |r| model.microservices().iter().filter(|m| m.relevance == r).count();
        prop_assert_eq!(
            count(Relevance::Mandatory) + count(Relevance::Optional) + count(Relevance::Unannotated),
            model.len()
        );
        for m in model.microservices() {
            prop_assert!(m.declared_variants.len() <= 3);
        }
    }

    #[test]
    fn critical_path_matches_path_enumeration(model in model(10)) {
        let report = simulate(&model, &resolve_all_in(&model, WorkflowMode::NORMAL)).unwrap();
        let durations: BTreeMap<String, f64> = report
            .outcomes
            .iter()
            .map(|o| (o.id.clone(), o.profile_used.map_or(0.0, |p| p.duration_ms)))
            .collect();
        prop_assert_eq!(report.response_time_ms, brute_force_longest_path(&model, &durations));
    }

    #[test]
    fn simulation_accounting(model in model(8), basic in any::<bool>(), power in 0usize..3) {
        let mode = WorkflowMode::from_flags(basic, power == 1, power == 2).unwrap();
        let assignment = resolve_all_in(&model, mode);
        let report = simulate(&model, &assignment).unwrap();
        let oracle = oracle_simulate(&model, &assignment.decisions);
        prop_assert!((report.total_energy_j - oracle.energy).abs() <= 1e-9);
        prop_assert!((report.total_reward - oracle.reward).abs() <= 1e-9);
        prop_assert!((report.response_time_ms - oracle.response).abs() <= 1e-9);
        let sum: f64 = report.outcomes.iter().map(|o| o.energy_j).sum();
        prop_assert!((report.total_energy_j - sum).abs() <= 1e-9);
        prop_assert!((0.0..=1.0).contains(&report.mean_quality));
    }

    #[test]
    fn skip_and_fallback_soundness(model in model(8), basic in any::<bool>(), power in 0usize..3) {
        let mode = WorkflowMode::from_flags(basic, power == 1, power == 2).unwrap();
        let report = simulate(&model, &resolve_all_in(&model, mode)).unwrap();
        for (task, outcome) in model.microservices().iter().zip(&report.outcomes) {
            if !task.relevance.is_optional() {
                prop_assert_ne!(outcome.decision, ModalityDecision::Skip);
            }
            let expected_fallback = match outcome.decision.modality() {
                Some(m) if m != Modality::Normal => !task.declared_variants.contains_key(&m),
                _ => false,
            };
            prop_assert_eq!(outcome.fallback_used, expected_fallback);
            if let (Some(m), false) = (outcome.decision.modality(), outcome.fallback_used) {
                if m != Modality::Normal {
                    prop_assert_eq!(outcome.profile_used, task.declared_variants.get(&m).copied());
                }
            }
        }
    }

    #[test]
    fn basic_never_increases_energy(model in model(8), power in 0usize..3) {
        let without = WorkflowMode::from_flags(false, power == 1, power == 2).unwrap();
        let with = WorkflowMode { basic: true, ..without };
        let a = simulate(&model, &resolve_all_in(&model, without)).unwrap();
        let b = simulate(&model, &resolve_all_in(&model, with)).unwrap();
        prop_assert!(b.total_energy_j <= a.total_energy_j);
    }

    #[test]
    fn all_in_equals_unconditional_rules(model in model(8), basic in any::<bool>(), power in 0usize..3) {
        let mode = WorkflowMode::from_flags(basic, power == 1, power == 2).unwrap();
        let all_in = resolve_all_in(&model, mode);
        // One unconditional table per task, returning the all-in decision.
        let (id, ms, edges, _, catalog) = model.clone().into_parts();
        let mut tables = BTreeMap::new();
        let ms: Vec<Microservice> = ms
            .into_iter()
            .map(|m| {
                let table_id = format!("t_{}", m.id);
                let decision = all_in.get(&m.id).unwrap();
                tables.insert(
                    table_id.clone(),
                    DecisionTable::new(table_id.clone()).rule(Rule::new(vec![], decision)),
                );
                m.table(table_id)
            })
            .collect();
        let ruled = build_application(id, ms, edges, tables, catalog).unwrap();
        let by_rules = resolve_rule_driven(&ruled, &ContextSnapshot::new()).unwrap();
        prop_assert_eq!(by_rules.decisions, all_in.decisions);
        prop_assert!(by_rules.clamped.is_empty());
    }

    #[test]
    fn optimizer_matches_exhaustive_oracle(model in model(6), objective in objective()) {
        let oracle = oracle_optimum(&model, &objective);
        match (optimize_assignment(&model, &objective, true), oracle) {
            (Ok(best), Some(expected)) => {
                prop_assert_eq!(best.cost, expected);
                prop_assert_eq!(objective.report_cost(&best.report), expected);
                for task in model.microservices() {
                    let d = best.assignment.get(&task.id).unwrap();
                    prop_assert!(feasible_decisions(task).contains(&d));
                }
            }
            (Err(EngineError::Infeasible { .. }), None) => {}
            (got, expected) => prop_assert!(false, "optimizer {:?} vs oracle {:?}", got.map(|b| b.cost), expected),
        }
    }
}

fn ordered_model() -> impl Strategy<Value = ApplicationModel> {
    model(8).prop_map(|model| {
        // Force LP <= N <= HP in both power and duration on every declared
        // variant, with a Normal variant equal to the baseline.
        rebuild(&model, |ms| {
            for m in ms.iter_mut() {
                let base = m.baseline_profile;
                let lp = ExecutionProfile { power_watts: base.power_watts * 0.5, duration_ms: base.duration_ms * 0.75, ..base };
                let hp = ExecutionProfile { power_watts: base.power_watts * 2.0, duration_ms: base.duration_ms * 1.5, ..base };
                let declared: Vec<Modality> = m.declared_variants.keys().copied().collect();
                m.declared_variants.clear();
                for v in declared {
                    let p = match v {
                        Modality::Normal => base,
                        Modality::LowPower => lp,
                        Modality::HighPerformance => hp,
                    };
                    m.declared_variants.insert(v, p);
                }
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn energy_ordering_follows_profile_ordering(model in ordered_model()) {
        let energy = |power| {
            let mode = WorkflowMode { basic: false, power };
            simulate(&model, &resolve_all_in(&model, mode)).unwrap().total_energy_j
        };
        let lp = energy(PowerSetting::LowPower);
        let n = energy(PowerSetting::Normal);
        let hp = energy(PowerSetting::HighPerformance);
        prop_assert!(lp <= n && n <= hp, "{lp} {n} {hp}");
    }
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

fn literal_oracle(cmp: Comparator, lhs: f64, rhs: f64) -> bool {
    match cmp.symbol() {
        ">" => lhs > rhs,
        ">=" => lhs >= rhs,
        "<" => lhs < rhs,
        "<=" => lhs <= rhs,
        "==" => lhs == rhs,
        "!=" => lhs != rhs,
        other => unreachable!("{other}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn comparators_agree_with_arithmetic(
        cmp in prop::sample::select(Comparator::ALL.to_vec()),
        lhs in -20i32..20,
        rhs in -20i32..20,
        scale in prop::sample::select(vec![1.0, 0.5, 0.1, 1000.0]),
    ) {
        let (lhs, rhs) = (lhs as f64 * scale, rhs as f64 * scale);
        let cond = Condition::new("x", cmp, Value::number(rhs, Some("kW"))).unwrap();
        let ctx = ContextSnapshot::new().with("x", Value::number(lhs, Some("kW"))).unwrap();
        prop_assert_eq!(evaluate_condition(&cond, &ctx).unwrap(), literal_oracle(cmp, lhs, rhs));
    }
}

fn numeric_table() -> impl Strategy<Value = (Vec<Rule>, ContextSnapshot)> {
    let cond = (0usize..2, prop::sample::select(Comparator::ALL.to_vec()), 0i32..10)
        .prop_map(|(v, cmp, lit)| Condition::new(["a", "b"][v], cmp, Value::number(lit as f64, None)).unwrap());
    let rule = (proptest::collection::vec(cond, 0..3), prop::sample::select(ModalityDecision::ALL.to_vec()))
        .prop_map(|(conds, out)| Rule::new(conds, out));
    (proptest::collection::vec(rule, 0..5), 0i32..10, 0i32..10).prop_map(|(rules, a, b)| {
        let ctx = ContextSnapshot::new()
            .with("a", Value::number(a as f64, None))
            .unwrap()
            .with("b", Value::number(b as f64, None))
            .unwrap();
        (rules, ctx)
    })
}

fn table_with(rules: Vec<Rule>, policy: HitPolicy) -> DecisionTable {
    DecisionTable {
        id: "t".into(),
        inputs: vec![InputDecl::number("a", None), InputDecl::number("b", None)],
        rules,
        hit_policy: policy,
        default_output: ModalityDecision::UseNormal,
    }
}

fn match_count(rules: &[Rule], ctx: &ContextSnapshot) -> usize {
    rules
        .iter()
        .filter(|r| r.conditions.iter().all(|c| evaluate_condition(c, ctx).unwrap()))
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn first_policy_is_order_insensitive_without_overlap((rules, ctx) in numeric_table(), seed in any::<u64>()) {
        let hits = match_count(&rules, &ctx);
        let original = evaluate_table(&table_with(rules.clone(), HitPolicy::First), &ctx).unwrap();
        if hits <= 1 {
            let mut shuffled = rules.clone();
            let n = shuffled.len().max(1);
            shuffled.rotate_left((seed as usize) % n);
            shuffled.reverse();
            let permuted = evaluate_table(&table_with(shuffled, HitPolicy::First), &ctx).unwrap();
            prop_assert_eq!(original, permuted);
        }
        prop_assert_eq!(original, evaluate_table(&table_with(rules, HitPolicy::First), &ctx).unwrap());
    }

    #[test]
    fn unique_policy_soundness((rules, ctx) in numeric_table()) {
        let hits = match_count(&rules, &ctx);
        match evaluate_table(&table_with(rules.clone(), HitPolicy::Unique), &ctx) {
            Ok(_) => prop_assert!(hits <= 1),
            Err(RuleError::NonUniqueHit { labels, .. }) => {
                prop_assert!(hits >= 2);
                prop_assert_eq!(labels.len(), hits);
            }
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
        // Static analysis: a reported overlap-free table never multi-hits.
        let issues = validate_table(&table_with(rules, HitPolicy::Unique), None);
        if issues.iter().all(|i| i.code != IssueCode::OverlappingRules) {
            prop_assert!(hits <= 1);
        }
    }

    #[test]
    fn shadowed_rules_never_decide((rules, ctx) in numeric_table()) {
        let table = table_with(rules.clone(), HitPolicy::First);
        let shadowed: BTreeSet<String> = validate_table(&table, None)
            .into_iter()
            .filter(|i| i.code == IssueCode::UnreachableRule)
            .map(|i| i.message)
            .collect();
        // A rule flagged unreachable is never the first match.
        let first = rules.iter().position(|r| r.conditions.iter().all(|c| evaluate_condition(c, &ctx).unwrap()));
        if let Some(i) = first {
            let label = format!("rule #{} ", i + 1);
            prop_assert!(!shadowed.iter().any(|m| m.starts_with(&label)), "{shadowed:?} first={i}");
        }
    }
}

#[test]
fn bounded_optimum_on_five_tasks_matches_enumeration() {
    // Skipping the fast optional task saves little energy; the LP variants
    // save more but are slower, so the response-time bound decides.
    let lp = |p: f64, d: f64| ExecutionProfile::new(p, d);
    let ms = vec![
        Microservice::new("a").baseline(lp(10.0, 100.0)).variant(Modality::LowPower, lp(4.0, 150.0)),
        Microservice::new("b").relevance(Relevance::Optional).baseline(lp(1.0, 10.0)),
        Microservice::new("c").baseline(lp(8.0, 100.0)).variant(Modality::LowPower, lp(3.0, 180.0)),
        Microservice::new("d").relevance(Relevance::Optional).baseline(lp(6.0, 50.0)).variant(Modality::LowPower, lp(2.0, 90.0)),
        Microservice::new("e").baseline(lp(5.0, 60.0)),
    ];
    let edges = vec![Edge::new("a", "b"), Edge::new("b", "c"), Edge::new("c", "d"), Edge::new("d", "e")];
    let model = build_application("five", ms, edges, BTreeMap::new(), AttributeCatalog::default()).unwrap();
    for max_rt in [260.0, 400.0, 450.0, 1000.0] {
        let objective = OptimizationObjective::new(1.0, 0.0, 0.0).unwrap().with_max_response_time(max_rt);
        let best = optimize_assignment(&model, &objective, false).unwrap();
        assert_eq!(Some(best.cost), oracle_optimum(&model, &objective), "max_rt {max_rt}");
        assert!(best.report.response_time_ms <= max_rt);
    }
}

#[test]
fn optimizer_tie_break_prefers_normal_in_id_order() {
    // Identical variants: every choice costs the same energy.
    let p = ExecutionProfile::new(2.0, 100.0);
    let ms = vec![
        Microservice::new("b").baseline(p).variant(Modality::LowPower, p),
        Microservice::new("a").baseline(p).variant(Modality::HighPerformance, p),
    ];
    let model = build_application("tie", ms, vec![], BTreeMap::new(), AttributeCatalog::default()).unwrap();
    let best = optimize_assignment(&model, &OptimizationObjective::new(1.0, 0.0, 0.0).unwrap(), false).unwrap();
    assert!(best.assignment.decisions.values().all(|d| *d == ModalityDecision::UseNormal));
}

use std::cell::RefCell;
use std::collections::BTreeMap;

use gavis::agents::{
    execute_plan, external_plan, plan, AgentKind, Fault, FaultInjector, MockBackend, NoFaults,
    PipelineConfig, PipelineError, PlanRequest, Registry, SubtaskCategory, MAX_RETRIES,
};
use gavis::bench::{parse_dataset, BUNDLED_DATASET};
use proptest::prelude::*;

fn requests() -> Vec<PlanRequest> {
    parse_dataset(BUNDLED_DATASET)
        .unwrap()
        .into_iter()
        .map(|c| PlanRequest::new(c.task_description).with_formula(c.ga_formula))
        .collect()
}

const WORKED: usize = 2;

/// Counts agent invocations per subtask while delegating to a fault.
struct Counting<'a> {
    inner: &'a dyn FaultInjector,
    calls: RefCell<BTreeMap<(String, AgentKind), usize>>,
}

impl FaultInjector for Counting<'_> {
    fn inject(&self, agent: AgentKind, task_id: &str, attempt: usize, fragment: &mut String) {
        *self
            .calls
            .borrow_mut()
            .entry((task_id.to_string(), agent))
            .or_insert(0) += 1;
        self.inner.inject(agent, task_id, attempt, fragment);
    }
}

#[test]
fn every_plan_consumes_only_earlier_outputs() {
    for request in requests() {
        let p = plan(&request).unwrap();
        assert!(
            p.unresolved_operands().is_empty(),
            "{}",
            request.description
        );
        assert!(p.check().is_ok());
        assert!(p.trace.is_well_formed());
    }
}

#[test]
fn registry_categories_are_total() {
    let registry = Registry::bundled();
    for category in SubtaskCategory::ALL {
        assert!(registry.in_category(category).count() >= 6, "{category:?}");
    }
    let total: usize = SubtaskCategory::ALL
        .iter()
        .map(|c| registry.in_category(*c).count())
        .sum();
    assert_eq!(total, registry.functions().len());
}

#[test]
fn pipeline_results_are_deterministic() {
    let config = PipelineConfig::default();
    for request in requests() {
        let p = plan(&request).unwrap();
        let a = serde_json::to_string(&execute_plan(&p, &config, &NoFaults).unwrap()).unwrap();
        let b = serde_json::to_string(
            &execute_plan(&plan(&request).unwrap(), &config, &NoFaults).unwrap(),
        )
        .unwrap();
        assert_eq!(a, b, "{}", request.description);
    }
}

#[test]
fn mock_backend_plans_are_equivalent() {
    let config = PipelineConfig::default();
    for request in requests() {
        let local = plan(&request).unwrap();
        let remote = external_plan(&request, &MockBackend::from_plan(&local)).unwrap();
        assert_eq!(remote, local);
        assert_eq!(
            execute_plan(&remote, &config, &NoFaults),
            execute_plan(&local, &config, &NoFaults)
        );
    }
}

fn fault() -> impl Strategy<Value = Fault> {
    let agent = prop::sample::select(vec![
        AgentKind::Code,
        AgentKind::Assignment,
        AgentKind::Visualization,
    ]);
    let task = prop::sample::select(vec![
        None,
        Some("T1".to_string()),
        Some("T2".to_string()),
        Some("T3".to_string()),
    ]);
    let text = prop::sample::select(vec![
        "",
        "?x4 = ;",
        ":S1 chartreuse;",
        "S1_r = 0.5",
        "?undefined_thing = nothing * e1;",
        "// comment only",
        ":ghost red;",
        "S1 = e1;",
    ]);
    (agent, task, 0usize..5, text).prop_map(|(agent, task_id, attempts, text)| Fault {
        agent,
        task_id,
        attempts,
        text: text.to_string(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_agent_runs_more_than_the_retry_bound(f in fault()) {
        let p = plan(&requests()[WORKED]).unwrap();
        let counting = Counting { inner: &f, calls: RefCell::new(BTreeMap::new()) };
        let result = execute_plan(&p, &PipelineConfig::default(), &counting);
        for ((task, agent), n) in counting.calls.borrow().iter() {
            prop_assert!(*n <= 1 + MAX_RETRIES, "{task} {agent}: {n}");
        }
        match result {
            Ok(r) => {
                for s in &r.subtasks {
                    prop_assert!(s.attempts <= 1 + MAX_RETRIES);
                    prop_assert!(s.invocations.values().all(|n| *n <= 1 + MAX_RETRIES));
                }
            }
            Err(PipelineError::PipelineFailed { retries_used, diagnostics, .. }) => {
                prop_assert!(retries_used <= MAX_RETRIES);
                prop_assert!(!diagnostics.is_empty());
            }
        }
    }
}

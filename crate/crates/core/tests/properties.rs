mod common;

use std::collections::BTreeMap;

use common::{random_poisson, scenario_file};
use drrsim_core::metrics::{cumulative_potential_throughput, fairness_measure_rounds};
use drrsim_core::traffic::arrivals_in;
use drrsim_core::{
    simulate, validate_scenario, ChannelKind, Engine, FlowId, Outcome, Packet, Rational,
    SchedulerPolicy,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn credits_are_conserved(index in 0u64..10_000, p in 0usize..3, policy in 0usize..4) {
        let cfg = random_poisson(index, ["0", "1/10", "3/10"][p]);
        let sc = validate_scenario(&cfg).unwrap();
        let (_, engine) = simulate(&sc, SchedulerPolicy::ALL[policy], sc.seed);
        let l = engine.ledger();
        prop_assert_eq!(
            l.quantum_injected,
            l.total_bytes_served() + engine.total_deficit() + l.discarded_total + engine.banked_bonus()
        );
    }

    #[test]
    fn telescoping_matches_sum(index in 0u64..10_000, policy in 0usize..4) {
        let sc = validate_scenario(&random_poisson(index, "1/10")).unwrap();
        let (_, engine) = simulate(&sc, SchedulerPolicy::ALL[policy], sc.seed);
        let l = engine.ledger();
        for f in &l.flows {
            let visits: Vec<_> = l.services_of(f.id).collect();
            for a in 0..visits.len() {
                for b in a..visits.len().min(a + 12) {
                    let w = &visits[a..=b];
                    let contiguous = w.windows(2).all(|p| p[0].dc_end == p[1].dc_start);
                    let sum = cumulative_potential_throughput(l, f.id, w[0].round, w[w.len() - 1].round).unwrap();
                    let q: u64 = w.iter().map(|s| s.q_credit()).sum();
                    if contiguous {
                        prop_assert_eq!(sum as i64, q as i64 + w[0].dc_start as i64 - w[w.len() - 1].dc_end as i64);
                    }
                }
            }
        }
        prop_assert_eq!(cumulative_potential_throughput(l, FlowId(1), 3, 2).unwrap(), 0);
    }

    #[test]
    fn fm_matches_pair_enumeration(index in 0u64..10_000) {
        let mut cfg = random_poisson(index, "1/10");
        cfg.flows.truncate(5);
        let sc = validate_scenario(&cfg).unwrap();
        let (_, engine) = simulate(&sc, SchedulerPolicy::Odrr, sc.seed);
        let l = engine.ledger();
        let weights: BTreeMap<FlowId, Rational> =
            l.flows.iter().map(|f| (f.id, Rational::from_integer(1 + i128::from(f.id.0 % 3)))).collect();
        let last = l.rounds.last().map_or(0, |r| r.round);
        for (a, b) in [(1, last), (1, last / 2), (last / 3 + 1, last)] {
            if a == 0 || a > b {
                continue;
            }
            let Ok(fm) = fairness_measure_rounds(l, a, b, &weights) else { continue };
            // backlogged through [a, b]: served every round and never emptied before b
            let present: Vec<FlowId> = weights
                .keys()
                .copied()
                .filter(|&id| {
                    let v: Vec<_> = l.services_of(id).filter(|s| s.round <= b).collect();
                    let start = v.iter().rposition(|s| s.emptied && s.round < a).map_or(0, |i| i + 1);
                    v.get(start).is_some_and(|s| s.round <= a) && !v[start..].iter().any(|s| s.emptied && s.round <= b)
                })
                .collect();
            let norm = |id: FlowId| {
                Rational::from_integer(i128::from(cumulative_potential_throughput(l, id, a, b).unwrap())) / weights[&id]
            };
            let mut best = Rational::from_integer(0);
            for &i in &present {
                for &j in &present {
                    best = best.max(norm(i) - norm(j));
                }
            }
            prop_assert_eq!(fm, best);
        }
    }
}

#[test]
fn bernoulli_run_replays_as_script() {
    for index in 0..20 {
        let cfg = random_poisson(index, "3/10");
        let sc = validate_scenario(&cfg).unwrap();
        let (_, engine) = simulate(&sc, SchedulerPolicy::OdrrEdc, sc.seed);
        let mut scripts: BTreeMap<u64, Vec<Outcome>> = BTreeMap::new();
        for a in &engine.ledger().attempts {
            scripts
                .entry(a.packet_id.0)
                .or_default()
                .push(if a.success {
                    Outcome::Success
                } else {
                    Outcome::Failure
                });
        }
        let trace: Vec<Packet> = sc
            .expand_trace(sc.seed)
            .into_iter()
            .map(|p| {
                Packet::new(
                    p.id,
                    p.flow_id,
                    p.size,
                    p.arrival_time,
                    scripts.get(&p.id.0).cloned(),
                )
            })
            .collect();
        let mut scripted_cfg = cfg.clone();
        scripted_cfg.channel = ChannelKind::Scripted;
        let scripted = validate_scenario(&scripted_cfg).unwrap();
        let mut replay = Engine::with_trace(&scripted, SchedulerPolicy::OdrrEdc, sc.seed, trace);
        replay.run_until(&scripted.duration);
        assert_eq!(
            replay.ledger().attempts,
            engine.ledger().attempts,
            "scenario {index}"
        );
        assert_eq!(replay.ledger().services, engine.ledger().services);
    }
}

#[test]
fn redistribution_never_lowers_recipient_spt() {
    let sc = scenario_file("walkthrough");
    let spt_by_round = |policy| {
        let (_, engine) = simulate(&sc, policy, 0);
        let l = engine.ledger().clone();
        let done = l.completion_round(FlowId(1)).unwrap();
        (1..=done)
            .map(|r| {
                l.services_of(FlowId(1))
                    .filter(|s| s.round <= r)
                    .map(|s| s.potential_throughput())
                    .sum::<i64>()
            })
            .collect::<Vec<_>>()
    };
    let base = spt_by_round(SchedulerPolicy::Odrr);
    for policy in [SchedulerPolicy::OdrrEdc, SchedulerPolicy::OdrrSdc] {
        let with = spt_by_round(policy);
        // compare while flow 1 is backlogged under both
        for (r, (a, b)) in with.iter().zip(&base).enumerate() {
            assert!(a >= b, "{policy} round {}: {a} < {b}", r + 1);
        }
        assert!(with.iter().zip(&base).any(|(a, b)| a > b));
    }
}

#[test]
fn arrivals_partition_the_trace() {
    let sc = scenario_file("two_flow");
    let trace = sc.expand_trace(3);
    let cuts: Vec<Rational> = (0..=20).map(|s| Rational::new(s, 1)).collect();
    let mut joined = Vec::new();
    for w in cuts.windows(2) {
        joined.extend_from_slice(arrivals_in(&trace, &w[0], &w[1]));
    }
    assert_eq!(joined, trace);
}

#[test]
fn shaped_flows_keep_to_their_input_rate() {
    let sc = scenario_file("two_flow");
    for seed in 0..5 {
        let trace = sc.expand_trace(seed);
        for f in &sc.flows {
            let own: Vec<_> = trace.iter().filter(|p| p.flow_id == f.id).collect();
            for pair in own.windows(2) {
                let gap = pair[1].arrival_time - pair[0].arrival_time;
                assert!(gap >= Rational::new(i128::from(pair[1].size) * 8, 4500));
            }
        }
    }
}

#![allow(dead_code)]

use std::collections::BTreeMap;

use drrsim_core::model::{FlowConfig, PacketConfig, QosConfig, SizeConfig, TrafficConfig};
use drrsim_core::{
    load_scenario, validate_scenario, ChannelKind, Outcome, ScenarioConfig, SchedulerPolicy,
    ValidatedScenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn scenario_file(name: &str) -> ValidatedScenario {
    let path = format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    load_scenario(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn ertps() -> QosConfig {
    QosConfig {
        kind: "ertPS".into(),
        class_index: None,
        params: BTreeMap::from([
            ("guaranteed data rate".into(), "1000".into()),
            ("delay".into(), "1".into()),
        ]),
    }
}

pub fn base(
    flows: Vec<FlowConfig>,
    quantum: u32,
    channel: ChannelKind,
    duration: &str,
) -> ScenarioConfig {
    ScenarioConfig {
        name: None,
        policy: SchedulerPolicy::Odrr,
        output_rate_bps: 9000,
        duration: duration.into(),
        quantum_default: quantum,
        seed: 0,
        channel,
        interclass_gating: false,
        gating_reading: Default::default(),
        slot_length: None,
        allow_small_quantum: false,
        zero_cost_failures: false,
        flows,
    }
}

/// Poisson flows on a Bernoulli channel, offered load between half and
/// twice the line rate.
pub fn random_poisson(index: u64, p_err: &str) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + index);
    let n = rng.random_range(1..=10u32);
    let cap = rng.random_range(100..=1500u32);
    let lo = rng.random_range(1..=cap);
    let mean = f64::from(lo + cap) / 2.0;
    let load = rng.random_range(0.5..2.0);
    let per_flow_pps = load * 9000.0 / (8.0 * mean * f64::from(n));
    let rate_milli = ((per_flow_pps * 1000.0).round() as u64).max(1);
    let mut order: Vec<u32> = (1..=n).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let flows = (1..=n)
        .map(|id| FlowConfig {
            id: drrsim_core::FlowId(id),
            priority: order[id as usize - 1],
            quantum: rng
                .random_bool(0.5)
                .then(|| cap + rng.random_range(0..=cap)),
            weight: None,
            input_rate_bps: None,
            p_err: Some(p_err.into()),
            qos: ertps(),
            traffic: TrafficConfig::Poisson {
                rate: format!("{rate_milli}/1000"),
                size: SizeConfig::Uniform { lo, hi: cap },
                cap,
            },
        })
        .collect();
    let mut cfg = base(flows, cap, ChannelKind::Bernoulli, "30");
    cfg.seed = index;
    cfg
}

/// A few static flows with scripted failures, small enough for the oracle.
pub fn random_static(index: u64) -> ValidatedScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0000_ac1e_0000 + index);
    let n = rng.random_range(1..=6u32);
    let quantum = rng.random_range(100..=800u32);
    let flows = (1..=n)
        .map(|id| {
            let count = rng.random_range(1..=10);
            let packets = (0..count)
                .map(|_| PacketConfig {
                    size: rng.random_range(1..=quantum),
                    arrival: Some(format!("{}/4", rng.random_range(0..12))),
                    errors: rng.random_bool(0.3).then(|| {
                        (0..rng.random_range(1..=3))
                            .map(|_| {
                                if rng.random_bool(0.7) {
                                    Outcome::Failure
                                } else {
                                    Outcome::Success
                                }
                            })
                            .collect()
                    }),
                })
                .collect();
            FlowConfig {
                id: drrsim_core::FlowId(id),
                priority: n + 1 - id,
                quantum: rng
                    .random_bool(0.3)
                    .then(|| quantum + rng.random_range(0..=quantum)),
                weight: None,
                input_rate_bps: None,
                p_err: None,
                qos: ertps(),
                traffic: TrafficConfig::Static { packets },
            }
        })
        .collect();
    let mut cfg = base(flows, quantum, ChannelKind::Scripted, "1000");
    cfg.zero_cost_failures = rng.random_bool(0.2);
    validate_scenario(&cfg).unwrap()
}

/// Packets at time 0 with optional failure scripts.
pub fn static_flow(id: u32, priority: u32, packets: &[(u32, usize)]) -> FlowConfig {
    FlowConfig {
        id: drrsim_core::FlowId(id),
        priority,
        quantum: None,
        weight: None,
        input_rate_bps: None,
        p_err: None,
        qos: ertps(),
        traffic: TrafficConfig::Static {
            packets: packets
                .iter()
                .map(|&(size, failures)| PacketConfig {
                    size,
                    arrival: None,
                    errors: (failures > 0).then(|| vec![Outcome::Failure; failures]),
                })
                .collect(),
        },
    }
}

pub fn static_scenario(quantum: u32, flows: Vec<FlowConfig>) -> ValidatedScenario {
    validate_scenario(&base(flows, quantum, ChannelKind::Scripted, "1000")).unwrap()
}

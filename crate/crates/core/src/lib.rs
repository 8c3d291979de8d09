//! Deterministic simulator for the deficit round robin family of packet
//! schedulers over lossy links: DRR, opportunity-based DRR (ODRR) and two
//! variants that hand a finished flow's unused credits to higher priority
//! flows (equal split, ODRREDC; single recipient, ODRRSDC).
//!
//! Time, weights and probabilities are exact rationals, so a run is a pure
//! function of `(scenario, policy, seed)`.

pub mod channel;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod sched;
pub mod traffic;

pub use channel::{penalty_factor, AttemptRecord, ChannelKind, ChannelModel};
pub use metrics::{MetricsLedger, ServiceRecord};
pub use model::{
    load_scenario, max_packet_size, validate_scenario, FlowId, Outcome, Packet, PacketId, QosClass,
    QosKind, ScenarioConfig, ScenarioError, ValidatedScenario,
};
pub use rational::{format_rational, parse_rational, Rational, Seconds};
pub use sched::{
    Engine, EngineError, Event, FinalReport, GatingReading, RoundReport, SchedulerPolicy,
    ServiceOutcome,
};

/// Runs one `(policy, seed)` to the scenario duration.
pub fn simulate(
    scenario: &ValidatedScenario,
    policy: SchedulerPolicy,
    seed: u64,
) -> (FinalReport, Engine) {
    let mut engine = Engine::new(scenario, policy, seed);
    let report = engine.run_until(&scenario.duration);
    (report, engine)
}

//! Scenario description, domain types and load-time validation.
//!
//! A scenario is read as a [`ScenarioConfig`] (the serde view of the TOML
//! document) and turned into a [`ValidatedScenario`] by
//! [`validate_scenario`]. The validated form has every default filled in and
//! serializes back to a canonical document, so golden files can compare it
//! byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelKind;
use crate::rational::{
    format_rational, is_non_negative, is_positive, parse_rational, Rational, Seconds,
};
use crate::sched::{GatingReading, SchedulerPolicy};
use crate::traffic::{self, SizeDist, TrafficSpec};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct FlowId(pub u32);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PacketId(pub u64);

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Outcome of a single transmission attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    #[serde(alias = "ok", alias = "succeed")]
    Success,
    #[serde(alias = "fail", alias = "error")]
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub id: PacketId,
    pub flow_id: FlowId,
    pub size: u32,
    pub arrival_time: Seconds,
    pub error_script: Option<Vec<Outcome>>,
    script_cursor: usize,
}

impl Packet {
    pub fn new(
        id: PacketId,
        flow_id: FlowId,
        size: u32,
        arrival_time: Seconds,
        error_script: Option<Vec<Outcome>>,
    ) -> Self {
        Self {
            id,
            flow_id,
            size,
            arrival_time,
            error_script,
            script_cursor: 0,
        }
    }

    /// Consumes the next scripted outcome. Missing or exhausted scripts succeed.
    pub fn next_scripted_outcome(&mut self) -> Outcome {
        let outcome = self
            .error_script
            .as_ref()
            .and_then(|s| s.get(self.script_cursor).copied())
            .unwrap_or(Outcome::Success);
        self.script_cursor += 1;
        outcome
    }

    /// Counts one attempt without consulting the script; returns the
    /// zero-based index of this attempt.
    pub(crate) fn count_attempt(&mut self) -> usize {
        self.script_cursor += 1;
        self.script_cursor - 1
    }

    pub fn attempts_so_far(&self) -> usize {
        self.script_cursor
    }
}

/// The five 802.16 scheduling service types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QosKind {
    Ugs,
    RtPs,
    ErtPs,
    NrtPs,
    Be,
}

impl QosKind {
    pub const ALL: [QosKind; 5] = [
        QosKind::Ugs,
        QosKind::RtPs,
        QosKind::ErtPs,
        QosKind::NrtPs,
        QosKind::Be,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QosKind::Ugs => "UGS",
            QosKind::RtPs => "rtPS",
            QosKind::ErtPs => "ertPS",
            QosKind::NrtPs => "nrtPS",
            QosKind::Be => "BE",
        }
    }

    /// Case-insensitive lookup by service name.
    pub fn from_name(name: &str) -> Option<QosKind> {
        QosKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name.trim()))
    }

    /// The service flow parameters each service type must declare.
    pub fn mandatory_params(self) -> &'static [&'static str] {
        match self {
            QosKind::Ugs => &[
                "maximum sustained traffic rate",
                "maximum latency",
                "tolerated jitter",
                "request/transmission policy",
            ],
            QosKind::RtPs => &[
                "minimum reserved traffic rate",
                "maximum sustained traffic rate",
                "maximum latency",
                "request/transmission policy",
            ],
            QosKind::ErtPs => &["guaranteed data rate", "delay"],
            QosKind::NrtPs => &[
                "minimum reserved traffic rate",
                "maximum sustained traffic rate",
                "traffic priority",
                "request/transmission policy",
            ],
            QosKind::Be => &[
                "maximum sustained traffic rate",
                "traffic priority",
                "request/transmission policy",
            ],
        }
    }

    pub fn latency_critical(self) -> bool {
        matches!(self, QosKind::Ugs | QosKind::RtPs | QosKind::ErtPs)
    }
}

impl fmt::Display for QosKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QosClass {
    pub kind: QosKind,
    /// Class index `k` used by inter-class gating (intervals of `2^k` slots).
    pub class_index_k: u32,
    pub latency_critical: bool,
    pub mandatory_params: BTreeMap<String, String>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("NoFlows: scenario declares no flows")]
    NoFlows,
    #[error("DuplicatePriority: flows {first} and {second} share priority {priority}")]
    DuplicatePriority {
        priority: u32,
        first: FlowId,
        second: FlowId,
    },
    #[error("DuplicateFlowId: flow id {0} declared twice")]
    DuplicateFlowId(FlowId),
    #[error("QuantumBelowMaxPacket: flow {flow} quantum {quantum} < max packet size {max_packet}")]
    QuantumBelowMaxPacket {
        flow: FlowId,
        quantum: u32,
        max_packet: u32,
    },
    #[error("UnknownQoSKind: {0:?}")]
    UnknownQosKind(String),
    #[error("MissingMandatoryParam({kind}, {param})")]
    MissingMandatoryParam { kind: QosKind, param: String },
    #[error("UnexpectedParam({kind}, {param})")]
    UnexpectedParam { kind: QosKind, param: String },
    #[error("NonPositiveRate: {0}")]
    NonPositiveRate(String),
    #[error("NonPositiveQuantum: flow {0}")]
    NonPositiveQuantum(FlowId),
    #[error("InvalidPacketSize: flow {flow} has a packet of size {size}")]
    InvalidPacketSize { flow: FlowId, size: u32 },
    #[error("InvalidWeight: flow {0} weight must be > 0")]
    InvalidWeight(FlowId),
    #[error("InvalidProbability: flow {0} p_err must lie in [0, 1]")]
    InvalidProbability(FlowId),
    #[error("InvalidTime: {0}")]
    InvalidTime(String),
    #[error("InvalidSizeDistribution: flow {0}")]
    InvalidSizeDistribution(FlowId),
}

fn default_channel() -> ChannelKind {
    ChannelKind::Scripted
}

fn is_false(v: &bool) -> bool {
    !*v
}

/// Serde view of a scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub policy: SchedulerPolicy,
    /// Output line rate `B` in bits per second.
    pub output_rate_bps: u64,
    /// Simulated run length in seconds (rational literal).
    pub duration: String,
    pub quantum_default: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_channel")]
    pub channel: ChannelKind,
    #[serde(default)]
    pub interclass_gating: bool,
    #[serde(default)]
    pub gating_reading: GatingReading,
    /// Seconds per scheduler slot; defaults to one max-size packet time at `B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_length: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_small_quantum: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub zero_cost_failures: bool,
    pub flows: Vec<FlowConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub id: FlowId,
    /// Lower number = higher priority.
    pub priority: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    /// Input link rate; generated arrivals are serialized at this rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_rate_bps: Option<u64>,
    /// Per-attempt error probability used by the Bernoulli channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_err: Option<String>,
    pub qos: QosConfig,
    pub traffic: TrafficConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_index: Option<u32>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum TrafficConfig {
    Static {
        packets: Vec<PacketConfig>,
    },
    Poisson {
        /// Mean packet generation rate in packets per second.
        rate: String,
        size: SizeConfig,
        cap: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub size: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<Outcome>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase", deny_unknown_fields)]
pub enum SizeConfig {
    Fixed { bytes: u32 },
    Uniform { lo: u32, hi: u32 },
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }
}

/// One flow after validation, defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDef {
    pub id: FlowId,
    pub priority: u32,
    pub quantum: u32,
    pub weight: Rational,
    pub input_rate_bps: Option<u64>,
    pub p_err: Rational,
    pub qos: QosClass,
    pub traffic: TrafficSpec,
}

impl FlowDef {
    /// Largest packet this flow can ever carry.
    pub fn max_possible_packet(&self) -> u32 {
        self.traffic.max_possible_size()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedScenario {
    pub name: Option<String>,
    pub policy: SchedulerPolicy,
    pub output_rate_bps: u64,
    pub duration: Seconds,
    pub quantum_default: u32,
    pub seed: u64,
    pub channel: ChannelKind,
    pub interclass_gating: bool,
    pub gating_reading: GatingReading,
    pub slot_length: Option<Seconds>,
    pub allow_small_quantum: bool,
    pub zero_cost_failures: bool,
    /// Declaration order is preserved.
    pub flows: Vec<FlowDef>,
}

impl ValidatedScenario {
    pub fn flow(&self, id: FlowId) -> Option<&FlowDef> {
        self.flows.iter().find(|f| f.id == id)
    }

    /// Expands every flow's traffic into one arrival-ordered trace.
    pub fn expand_trace(&self, seed: u64) -> Vec<Packet> {
        traffic::expand_scenario(self, seed)
    }

    /// Scheduler slot length: explicit, or one max-size packet at line rate.
    pub fn slot_length(&self) -> Seconds {
        self.slot_length.unwrap_or_else(|| {
            let m = self
                .flows
                .iter()
                .map(FlowDef::max_possible_packet)
                .max()
                .unwrap_or(1);
            Rational::new(i128::from(m) * 8, i128::from(self.output_rate_bps))
        })
    }

    /// Canonical config with every default made explicit.
    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            name: self.name.clone(),
            policy: self.policy,
            output_rate_bps: self.output_rate_bps,
            duration: format_rational(&self.duration),
            quantum_default: self.quantum_default,
            seed: self.seed,
            channel: self.channel,
            interclass_gating: self.interclass_gating,
            gating_reading: self.gating_reading,
            slot_length: self.slot_length.as_ref().map(format_rational),
            allow_small_quantum: self.allow_small_quantum,
            zero_cost_failures: self.zero_cost_failures,
            flows: self.flows.iter().map(flow_to_config).collect(),
        }
    }

    /// Canonical TOML document.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config()).expect("scenario config is always serializable")
    }
}

fn flow_to_config(flow: &FlowDef) -> FlowConfig {
    let traffic = match &flow.traffic {
        TrafficSpec::Static(packets) => TrafficConfig::Static {
            packets: packets
                .iter()
                .map(|p| PacketConfig {
                    size: p.size,
                    arrival: Some(format_rational(&p.arrival_time)),
                    errors: p.error_script.clone(),
                })
                .collect(),
        },
        TrafficSpec::Poisson { rate, size, cap } => TrafficConfig::Poisson {
            rate: format_rational(rate),
            size: match *size {
                SizeDist::Fixed(bytes) => SizeConfig::Fixed { bytes },
                SizeDist::UniformInt { lo, hi } => SizeConfig::Uniform { lo, hi },
            },
            cap: *cap,
        },
    };
    FlowConfig {
        id: flow.id,
        priority: flow.priority,
        quantum: Some(flow.quantum),
        weight: Some(format_rational(&flow.weight)),
        input_rate_bps: flow.input_rate_bps,
        p_err: Some(format_rational(&flow.p_err)),
        qos: QosConfig {
            kind: flow.qos.kind.name().to_string(),
            class_index: Some(flow.qos.class_index_k),
            params: flow.qos.mandatory_params.clone(),
        },
        traffic,
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<ValidatedScenario, ScenarioError> {
    validate_scenario(&ScenarioConfig::from_toml(text)?)
}

pub fn validate_scenario(raw: &ScenarioConfig) -> Result<ValidatedScenario, ScenarioError> {
    if raw.flows.is_empty() {
        return Err(ScenarioError::NoFlows);
    }
    if raw.output_rate_bps == 0 {
        return Err(ScenarioError::NonPositiveRate("output_rate_bps".into()));
    }
    let duration = parse_time(&raw.duration, "duration")?;
    if !is_non_negative(&duration) {
        return Err(ScenarioError::InvalidTime("duration must be >= 0".into()));
    }
    let slot_length = match &raw.slot_length {
        Some(text) => {
            let v = parse_time(text, "slot_length")?;
            if !is_positive(&v) {
                return Err(ScenarioError::InvalidTime("slot_length must be > 0".into()));
            }
            Some(v)
        }
        None => None,
    };

    let mut ids = BTreeSet::new();
    let mut priorities: BTreeMap<u32, FlowId> = BTreeMap::new();
    let mut flows = Vec::with_capacity(raw.flows.len());
    for fc in &raw.flows {
        if !ids.insert(fc.id) {
            return Err(ScenarioError::DuplicateFlowId(fc.id));
        }
        if let Some(&first) = priorities.get(&fc.priority) {
            return Err(ScenarioError::DuplicatePriority {
                priority: fc.priority,
                first,
                second: fc.id,
            });
        }
        priorities.insert(fc.priority, fc.id);
        flows.push(validate_flow(raw, fc, &duration)?);
    }

    Ok(ValidatedScenario {
        name: raw.name.clone(),
        policy: raw.policy,
        output_rate_bps: raw.output_rate_bps,
        duration,
        quantum_default: raw.quantum_default,
        seed: raw.seed,
        channel: raw.channel,
        interclass_gating: raw.interclass_gating,
        gating_reading: raw.gating_reading,
        slot_length,
        allow_small_quantum: raw.allow_small_quantum,
        zero_cost_failures: raw.zero_cost_failures,
        flows,
    })
}

fn parse_time(text: &str, field: &str) -> Result<Rational, ScenarioError> {
    parse_rational(text).map_err(|_| ScenarioError::InvalidTime(format!("{field}: {text:?}")))
}

fn validate_qos(qc: &QosConfig) -> Result<QosClass, ScenarioError> {
    let kind = QosKind::from_name(&qc.kind)
        .ok_or_else(|| ScenarioError::UnknownQosKind(qc.kind.clone()))?;
    let required = kind.mandatory_params();
    if let Some(missing) = required.iter().find(|p| !qc.params.contains_key(**p)) {
        return Err(ScenarioError::MissingMandatoryParam {
            kind,
            param: missing.to_string(),
        });
    }
    if let Some(extra) = qc.params.keys().find(|k| !required.contains(&k.as_str())) {
        return Err(ScenarioError::UnexpectedParam {
            kind,
            param: extra.clone(),
        });
    }
    Ok(QosClass {
        kind,
        class_index_k: qc.class_index.unwrap_or(0),
        latency_critical: kind.latency_critical(),
        mandatory_params: qc.params.clone(),
    })
}

fn validate_flow(
    raw: &ScenarioConfig,
    fc: &FlowConfig,
    duration: &Seconds,
) -> Result<FlowDef, ScenarioError> {
    let qos = validate_qos(&fc.qos)?;
    let quantum = fc.quantum.unwrap_or(raw.quantum_default);
    if quantum == 0 {
        return Err(ScenarioError::NonPositiveQuantum(fc.id));
    }
    let weight = match &fc.weight {
        Some(w) => parse_rational(w).map_err(|_| ScenarioError::InvalidWeight(fc.id))?,
        None => Rational::from_integer(1),
    };
    if !is_positive(&weight) {
        return Err(ScenarioError::InvalidWeight(fc.id));
    }
    let p_err = match &fc.p_err {
        Some(p) => parse_rational(p).map_err(|_| ScenarioError::InvalidProbability(fc.id))?,
        None => Rational::from_integer(0),
    };
    if !is_non_negative(&p_err) || p_err > Rational::from_integer(1) {
        return Err(ScenarioError::InvalidProbability(fc.id));
    }
    if fc.input_rate_bps == Some(0) {
        return Err(ScenarioError::NonPositiveRate(format!(
            "flow {} input_rate_bps",
            fc.id
        )));
    }

    let traffic = match &fc.traffic {
        TrafficConfig::Static { packets } => {
            let mut out = Vec::with_capacity(packets.len());
            for pc in packets {
                if pc.size == 0 {
                    return Err(ScenarioError::InvalidPacketSize {
                        flow: fc.id,
                        size: 0,
                    });
                }
                let arrival = match &pc.arrival {
                    Some(t) => parse_time(t, "arrival")?,
                    None => Rational::from_integer(0),
                };
                if !is_non_negative(&arrival) || arrival > *duration {
                    return Err(ScenarioError::InvalidTime(format!(
                        "flow {} arrival {t} outside [0, duration]",
                        fc.id,
                        t = format_rational(&arrival)
                    )));
                }
                out.push(traffic::StaticPacket {
                    size: pc.size,
                    arrival_time: arrival,
                    error_script: pc.errors.clone(),
                });
            }
            TrafficSpec::Static(out)
        }
        TrafficConfig::Poisson { rate, size, cap } => {
            let rate = parse_rational(rate)
                .map_err(|_| ScenarioError::NonPositiveRate(format!("flow {} rate", fc.id)))?;
            if !is_positive(&rate) {
                return Err(ScenarioError::NonPositiveRate(format!(
                    "flow {} rate",
                    fc.id
                )));
            }
            let dist = match *size {
                SizeConfig::Fixed { bytes } => SizeDist::Fixed(bytes),
                SizeConfig::Uniform { lo, hi } => SizeDist::UniformInt { lo, hi },
            };
            let (lo, hi) = dist.bounds();
            if *cap == 0 || lo == 0 || lo > hi || hi > *cap {
                return Err(ScenarioError::InvalidSizeDistribution(fc.id));
            }
            TrafficSpec::Poisson {
                rate,
                size: dist,
                cap: *cap,
            }
        }
    };

    let flow = FlowDef {
        id: fc.id,
        priority: fc.priority,
        quantum,
        weight,
        input_rate_bps: fc.input_rate_bps,
        p_err,
        qos,
        traffic,
    };
    let max_packet = flow.max_possible_packet();
    if quantum < max_packet && !raw.allow_small_quantum {
        return Err(ScenarioError::QuantumBelowMaxPacket {
            flow: fc.id,
            quantum,
            max_packet,
        });
    }
    Ok(flow)
}

/// `M`: the largest packet in the expanded trace of the scenario.
pub fn max_packet_size(scenario: &ValidatedScenario) -> u32 {
    max_packet_in(&scenario.expand_trace(scenario.seed))
}

/// Largest packet size in a trace, or 0 for an empty trace.
pub fn max_packet_in(trace: &[Packet]) -> u32 {
    trace.iter().map(|p| p.size).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rtps_params() -> String {
        r#"
[flows.qos]
kind = "rtPS"
[flows.qos.params]
"minimum reserved traffic rate" = "4500"
"maximum sustained traffic rate" = "4500"
"maximum latency" = "2"
"request/transmission policy" = "polling"
"#
        .to_string()
    }

    fn two_flow_doc() -> String {
        let mut doc = String::from(
            r#"
policy = "odrr"
output_rate_bps = 9000
duration = "20"
quantum_default = 750
"#,
        );
        for (id, prio) in [(1, 1), (2, 2)] {
            doc.push_str(&format!(
                "\n[[flows]]\nid = {id}\npriority = {prio}\n[flows.traffic]\ntype = \"static\"\npackets = [{{ size = 750 }}, {{ size = 300 }}]\n"
            ));
            doc.push_str(&rtps_params());
        }
        doc
    }

    #[test]
    fn accepts_two_flow_setup() {
        let sc = load_scenario(&two_flow_doc()).unwrap();
        assert_eq!(sc.flows.len(), 2);
        assert_eq!(sc.flows[0].quantum, 750);
        assert_eq!(sc.flows[0].weight, Rational::from_integer(1));
        assert!(sc.flows[0].qos.latency_critical);
        assert_eq!(max_packet_size(&sc), 750);
    }

    #[test]
    fn rejects_quantum_below_max_packet() {
        let doc = two_flow_doc().replace("quantum_default = 750", "quantum_default = 100");
        let err = load_scenario(&doc).unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::QuantumBelowMaxPacket {
                quantum: 100,
                max_packet: 750,
                ..
            }
        ));
        let allowed = doc.replace(
            "quantum_default = 100",
            "quantum_default = 100\nallow_small_quantum = true",
        );
        assert!(load_scenario(&allowed).is_ok());
    }

    #[test]
    fn rejects_duplicate_priority() {
        let doc = two_flow_doc().replace("priority = 2", "priority = 1");
        assert!(matches!(
            load_scenario(&doc),
            Err(ScenarioError::DuplicatePriority { priority: 1, .. })
        ));
    }

    #[test]
    fn rejects_missing_rtps_maximum_latency() {
        let doc = two_flow_doc().replacen("\"maximum latency\" = \"2\"\n", "", 1);
        let err = load_scenario(&doc).unwrap_err();
        assert_eq!(
            err,
            ScenarioError::MissingMandatoryParam {
                kind: QosKind::RtPs,
                param: "maximum latency".into()
            }
        );
        assert_eq!(
            err.to_string(),
            "MissingMandatoryParam(rtPS, maximum latency)"
        );
    }

    #[test]
    fn rejects_superset_params_and_unknown_kind() {
        let doc = two_flow_doc().replacen(
            "\"maximum latency\" = \"2\"\n",
            "\"maximum latency\" = \"2\"\n\"tolerated jitter\" = \"1\"\n",
            1,
        );
        assert!(matches!(
            load_scenario(&doc),
            Err(ScenarioError::UnexpectedParam { .. })
        ));
        let doc = two_flow_doc().replacen("kind = \"rtPS\"", "kind = \"GOLD\"", 1);
        assert_eq!(
            load_scenario(&doc).unwrap_err(),
            ScenarioError::UnknownQosKind("GOLD".into())
        );
    }

    #[test]
    fn rejects_zero_output_rate() {
        let doc = two_flow_doc().replace("output_rate_bps = 9000", "output_rate_bps = 0");
        assert!(matches!(
            load_scenario(&doc),
            Err(ScenarioError::NonPositiveRate(_))
        ));
    }

    #[test]
    fn every_kind_has_a_distinct_parameter_set() {
        for kind in QosKind::ALL {
            let params = kind.mandatory_params();
            let set: BTreeSet<_> = params.iter().collect();
            assert_eq!(set.len(), params.len());
            assert_eq!(QosKind::from_name(kind.name()), Some(kind));
        }
        assert!(QosKind::Ugs.latency_critical());
        assert!(QosKind::ErtPs.latency_critical());
        assert!(!QosKind::NrtPs.latency_critical());
        assert!(!QosKind::Be.latency_critical());
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let first = load_scenario(&two_flow_doc()).unwrap().to_toml();
        let second = load_scenario(&first).unwrap().to_toml();
        assert_eq!(first, second);
    }

    #[test]
    fn exhausted_script_succeeds() {
        let mut p = Packet::new(
            PacketId(0),
            FlowId(1),
            10,
            Rational::from_integer(0),
            Some(vec![Outcome::Failure]),
        );
        assert_eq!(p.next_scripted_outcome(), Outcome::Failure);
        assert_eq!(p.next_scripted_outcome(), Outcome::Success);
        assert_eq!(p.next_scripted_outcome(), Outcome::Success);
    }
}

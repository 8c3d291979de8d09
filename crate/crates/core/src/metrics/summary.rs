//! JSON run summary. Every value is derived from the ledger's service and
//! packet tables, so it can be recomputed from the CSV exports.

use serde::Serialize;

use super::{
    aggregate_throughput, bandwidth_utilization, critical_mean_latency, delay_bound,
    per_flow_latency, service_span, whole_run_fairness, DelayBoundReading, MetricsLedger,
};
use crate::model::FlowId;
use crate::rational::{format_rational, to_f64};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub flow_id: FlowId,
    pub priority: u32,
    pub kind: String,
    pub latency_critical: bool,
    pub bytes_served: u64,
    pub packets_served: usize,
    pub mean_latency_s: Option<f64>,
    pub max_latency_s: Option<f64>,
    pub utilization: f64,
    pub spt: i64,
    pub completion_round: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub policy: String,
    pub seed: u64,
    pub rounds: u64,
    pub span_s: String,
    pub busy_time_s: String,
    pub total_bytes_served: u64,
    pub aggregate_throughput_bps: f64,
    pub critical_mean_latency_s: Option<f64>,
    pub fm_whole_run: f64,
    pub delay_bound: DelayCheck,
    pub flows: Vec<FlowSummary>,
}

/// Worst latency-critical delay against the bound, with the bound's inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayCheck {
    pub reading: &'static str,
    pub n_critical: u32,
    pub s_bytes: u32,
    pub max_quantum_bytes: u32,
    pub bound_s: Option<String>,
    pub max_critical_latency_s: Option<String>,
    pub met: bool,
}

pub fn summarize(ledger: &MetricsLedger) -> RunSummary {
    summarize_with(ledger, DelayBoundReading::Consistent)
}

pub fn delay_check(ledger: &MetricsLedger, reading: DelayBoundReading) -> DelayCheck {
    let critical: Vec<_> = ledger.flows.iter().filter(|f| f.latency_critical).collect();
    let s = ledger
        .packets
        .iter()
        .filter(|p| critical.iter().any(|f| f.id == p.flow))
        .map(|p| p.size)
        .max()
        .unwrap_or(0);
    let max_q = critical.iter().map(|f| f.quantum).max().unwrap_or(0);
    let bound = delay_bound(
        critical.len() as u32,
        s,
        max_q,
        ledger.output_rate_bps,
        reading,
    )
    .ok();
    let worst = critical
        .iter()
        .filter_map(|f| per_flow_latency(ledger, f.id).ok().map(|l| l.max))
        .max();
    DelayCheck {
        reading: match reading {
            DelayBoundReading::Consistent => "consistent",
            DelayBoundReading::Literal => "literal",
        },
        n_critical: critical.len() as u32,
        s_bytes: s,
        max_quantum_bytes: max_q,
        met: match (&bound, &worst) {
            (Some(b), Some(w)) => w <= b,
            _ => true,
        },
        bound_s: bound.as_ref().map(format_rational),
        max_critical_latency_s: worst.as_ref().map(format_rational),
    }
}

pub fn summarize_with(ledger: &MetricsLedger, reading: DelayBoundReading) -> RunSummary {
    let flows = ledger
        .flows
        .iter()
        .map(|f| {
            let latency = per_flow_latency(ledger, f.id).ok();
            FlowSummary {
                flow_id: f.id,
                priority: f.priority,
                kind: f.kind.name().to_string(),
                latency_critical: f.latency_critical,
                bytes_served: ledger.bytes_served(f.id),
                packets_served: latency.as_ref().map_or(0, |l| l.count),
                mean_latency_s: latency.as_ref().map(|l| to_f64(&l.mean)),
                max_latency_s: latency.as_ref().map(|l| to_f64(&l.max)),
                utilization: to_f64(&bandwidth_utilization(ledger, f.id)),
                spt: ledger
                    .services_of(f.id)
                    .map(|s| s.potential_throughput())
                    .sum(),
                completion_round: ledger.completion_round(f.id),
            }
        })
        .collect();
    RunSummary {
        policy: ledger
            .policy
            .map(|p| p.name().to_string())
            .unwrap_or_default(),
        seed: ledger.seed,
        rounds: ledger.services.iter().map(|s| s.round).max().unwrap_or(0),
        span_s: format_rational(&service_span(ledger)),
        busy_time_s: format_rational(&ledger.busy_time),
        total_bytes_served: ledger.total_bytes_served(),
        aggregate_throughput_bps: to_f64(&aggregate_throughput(ledger)),
        critical_mean_latency_s: critical_mean_latency(ledger).map(|v| to_f64(&v)),
        fm_whole_run: to_f64(&whole_run_fairness(ledger)),
        delay_bound: delay_check(ledger, reading),
        flows,
    }
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

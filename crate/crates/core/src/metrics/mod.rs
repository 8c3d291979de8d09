//! Potential throughput, fairness, latency and utilization over a
//! [`MetricsLedger`].
//!
//! Rounds are per flow: a flow's `k`-th round is its `k`-th visit by the
//! scheduler. `PT(k) = Q'(k) + DC(k-1) - DC(k)` where `Q'` is the quantum
//! plus any donated bonus applied at that visit, so for DRR and ODRR `Q'`
//! is just the quantum.

mod ledger;
pub mod summary;

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::model::FlowId;
use crate::rational::{Rational, Seconds};

pub use ledger::{
    FlowMeta, MetricsLedger, PacketRecord, RoundRecord, ServiceRecord, PACKET_COLUMNS,
    SERVICE_COLUMNS,
};
pub use summary::{delay_check, summarize, summarize_with, DelayCheck, FlowSummary, RunSummary};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("UnknownRound: flow {flow} has no record for round {round}")]
    UnknownRound { flow: FlowId, round: u64 },
    #[error("UnknownFlow: {0}")]
    UnknownFlow(FlowId),
    #[error("NoBackloggedPair: fewer than two flows stay backlogged over the interval")]
    NoBackloggedPair,
    #[error("NoServedPackets: flow {0} completed no packets")]
    NoServedPackets(FlowId),
    #[error("NonPositiveInput: {0}")]
    NonPositiveInput(&'static str),
    #[error("InvalidInterval: start after end")]
    InvalidInterval,
}

/// `PT` of one flow in one global round.
pub fn potential_throughput(
    ledger: &MetricsLedger,
    flow: FlowId,
    round: u64,
) -> Result<u64, MetricsError> {
    ledger
        .service(flow, round)
        .map(|s| s.potential_throughput() as u64)
        .ok_or(MetricsError::UnknownRound { flow, round })
}

/// `SPT` over the flow's visits in global rounds `round_from..=round_to`.
/// An inverted window is empty.
pub fn cumulative_potential_throughput(
    ledger: &MetricsLedger,
    flow: FlowId,
    round_from: u64,
    round_to: u64,
) -> Result<u64, MetricsError> {
    if ledger.flow_meta(flow).is_none() {
        return Err(MetricsError::UnknownFlow(flow));
    }
    if round_from > round_to {
        return Ok(0);
    }
    let last = ledger.rounds.last().map(|r| r.round).unwrap_or(0);
    if round_from == 0 || round_to > last {
        return Err(MetricsError::UnknownRound {
            flow,
            round: if round_from == 0 { 0 } else { round_to },
        });
    }
    Ok(ledger
        .services_of(flow)
        .filter(|s| (round_from..=round_to).contains(&s.round))
        .map(|s| s.potential_throughput() as u64)
        .sum())
}

/// Maximal runs of consecutive visits during which the flow never ran
/// empty. Each run ends with the visit that emptied the queue, if any.
pub fn backlog_periods(ledger: &MetricsLedger, flow: FlowId) -> Vec<Vec<&ServiceRecord>> {
    let mut periods = Vec::new();
    let mut current = Vec::new();
    for s in ledger.services_of(flow) {
        current.push(s);
        if s.emptied {
            periods.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        periods.push(current);
    }
    periods
}

/// Admissible interval `[sum(Q') - M, sum(Q') + M]` for a window of visits.
pub fn deficit_window_bounds(window: &[&ServiceRecord], max_packet: u32) -> (i64, i64) {
    let q: i64 = window.iter().map(|s| s.q_credit() as i64).sum();
    let m = i64::from(max_packet);
    (q - m, q + m)
}

/// Global round range `[first, last]` over which the flow was backlogged
/// for each backlog period. `last` is `None` while still backlogged.
fn backlog_round_spans(ledger: &MetricsLedger, flow: FlowId) -> Vec<(u64, Option<u64>)> {
    backlog_periods(ledger, flow)
        .into_iter()
        .map(|p| {
            let first = p[0].round;
            let tail = p.last().expect("periods are non-empty");
            (first, tail.emptied.then_some(tail.round))
        })
        .collect()
}

fn backlogged_over(ledger: &MetricsLedger, flow: FlowId, from: u64, to: u64) -> bool {
    backlog_round_spans(ledger, flow)
        .into_iter()
        .any(|(first, end)| first <= from && end.is_none_or(|e| e > to))
}

/// Weighted pairwise SPT spread over global rounds `from..=to`, restricted
/// to flows in `weights` that stay backlogged through the window.
pub fn fairness_measure_rounds(
    ledger: &MetricsLedger,
    from: u64,
    to: u64,
    weights: &BTreeMap<FlowId, Rational>,
) -> Result<Rational, MetricsError> {
    if weights.len() < 2 {
        return Ok(Rational::zero());
    }
    if from > to {
        return Err(MetricsError::InvalidInterval);
    }
    let mut normalized = Vec::new();
    for (&flow, w) in weights {
        if w.is_zero() || *w < Rational::zero() {
            return Err(MetricsError::NonPositiveInput("weight"));
        }
        if backlogged_over(ledger, flow, from, to) {
            let spt = cumulative_potential_throughput(ledger, flow, from, to)?;
            normalized.push(Rational::from_integer(i128::from(spt)) / w);
        }
    }
    if normalized.len() < 2 {
        return Err(MetricsError::NoBackloggedPair);
    }
    let max = normalized.iter().max().expect("non-empty");
    let min = normalized.iter().min().expect("non-empty");
    Ok(max - min)
}

/// `FM(t1, t2)`: the fairness measure over whole rounds lying inside the
/// time interval.
pub fn fairness_measure(
    ledger: &MetricsLedger,
    t1: &Seconds,
    t2: &Seconds,
    weights: &BTreeMap<FlowId, Rational>,
) -> Result<Rational, MetricsError> {
    if t1 > t2 {
        return Err(MetricsError::InvalidInterval);
    }
    if weights.len() < 2 {
        return Ok(Rational::zero());
    }
    let inside: Vec<u64> = ledger
        .rounds
        .iter()
        .filter(|r| r.start_time >= *t1 && r.end_time <= *t2)
        .map(|r| r.round)
        .collect();
    match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) => fairness_measure_rounds(ledger, a, b, weights),
        _ => Err(MetricsError::NoBackloggedPair),
    }
}

/// Spread of weighted total SPT across all flows for the whole run.
pub fn whole_run_fairness(ledger: &MetricsLedger) -> Rational {
    let values: Vec<Rational> = ledger
        .flows
        .iter()
        .map(|f| {
            let spt: i64 = ledger
                .services_of(f.id)
                .map(|s| s.potential_throughput())
                .sum();
            Rational::from_integer(i128::from(spt)) / f.weight
        })
        .collect();
    match (values.iter().max(), values.iter().min()) {
        (Some(max), Some(min)) => max - min,
        _ => Rational::zero(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyStats {
    pub count: usize,
    pub mean: Seconds,
    pub max: Seconds,
}

/// Completion minus arrival over the flow's delivered packets.
pub fn per_flow_latency(
    ledger: &MetricsLedger,
    flow: FlowId,
) -> Result<LatencyStats, MetricsError> {
    let latencies: Vec<Seconds> = ledger
        .packets
        .iter()
        .filter(|p| p.flow == flow)
        .filter_map(|p| p.completion_time.map(|c| c - p.arrival_time))
        .collect();
    if latencies.is_empty() {
        return Err(MetricsError::NoServedPackets(flow));
    }
    let total: Seconds = latencies
        .iter()
        .copied()
        .fold(Rational::zero(), |a, b| a + b);
    Ok(LatencyStats {
        count: latencies.len(),
        mean: total / Rational::from_integer(latencies.len() as i128),
        max: latencies.into_iter().max().expect("non-empty"),
    })
}

/// Mean latency over every delivered packet of the latency-critical flows.
pub fn critical_mean_latency(ledger: &MetricsLedger) -> Option<Seconds> {
    let critical: Vec<FlowId> = ledger
        .flows
        .iter()
        .filter(|f| f.latency_critical)
        .map(|f| f.id)
        .collect();
    let latencies: Vec<Seconds> = ledger
        .packets
        .iter()
        .filter(|p| critical.contains(&p.flow))
        .filter_map(|p| p.completion_time.map(|c| c - p.arrival_time))
        .collect();
    if latencies.is_empty() {
        return None;
    }
    let n = Rational::from_integer(latencies.len() as i128);
    Some(latencies.into_iter().fold(Rational::zero(), |a, b| a + b) / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayBoundReading {
    /// `((n * s) + Max) * 8 / B` seconds.
    #[default]
    Consistent,
    /// `(n * s) + Max / B` taken at face value; mixes bytes and seconds.
    Literal,
}

/// Worst-case delay between latency-critical flows with `n_critical`
/// flows of maximum packet size `s`, maximum quantum `max_quantum`
/// (bytes) and output rate `rate_bps`.
pub fn delay_bound(
    n_critical: u32,
    s: u32,
    max_quantum: u32,
    rate_bps: u64,
    reading: DelayBoundReading,
) -> Result<Rational, MetricsError> {
    if s == 0 {
        return Err(MetricsError::NonPositiveInput("s"));
    }
    if max_quantum == 0 {
        return Err(MetricsError::NonPositiveInput("max_quantum"));
    }
    if rate_bps == 0 {
        return Err(MetricsError::NonPositiveInput("rate_bps"));
    }
    let ns = i128::from(n_critical) * i128::from(s);
    let b = i128::from(rate_bps);
    Ok(match reading {
        DelayBoundReading::Consistent => Rational::new((ns + i128::from(max_quantum)) * 8, b),
        DelayBoundReading::Literal => {
            Rational::from_integer(ns) + Rational::new(i128::from(max_quantum), b)
        }
    })
}

/// Share of the output line's busy time spent on this flow's successful
/// bits.
pub fn bandwidth_utilization(ledger: &MetricsLedger, flow: FlowId) -> Rational {
    if ledger.busy_time.is_zero() {
        return Rational::zero();
    }
    let bits = i128::from(ledger.bytes_served(flow)) * 8;
    Rational::from_integer(bits)
        / (Rational::from_integer(i128::from(ledger.output_rate_bps)) * ledger.busy_time)
}

/// Time of the last service end; zero if nothing was served.
pub fn service_span(ledger: &MetricsLedger) -> Seconds {
    ledger
        .services
        .iter()
        .map(|s| s.end_time)
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Successfully delivered bits per second of [`service_span`].
pub fn aggregate_throughput(ledger: &MetricsLedger) -> Rational {
    let span = service_span(ledger);
    if span.is_zero() {
        return Rational::zero();
    }
    Rational::from_integer(i128::from(ledger.total_bytes_served()) * 8) / span
}

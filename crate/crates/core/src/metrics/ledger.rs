use std::io;

use crate::channel::AttemptRecord;
use crate::model::{FlowId, PacketId, QosKind};
use crate::rational::{format_rational, Rational, Seconds};
use crate::sched::SchedulerPolicy;

/// One visit of one flow by the scheduler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceRecord {
    pub round: u64,
    pub flow: FlowId,
    pub quantum: u32,
    /// Donated credits applied at this visit.
    pub bonus: u64,
    /// Deficit counter carried into the visit, `DC(k-1)`.
    pub dc_start: u64,
    /// Deficit counter after the visit, `DC(k)`.
    pub dc_end: u64,
    pub bytes_attempted: u64,
    pub bytes_served: u64,
    pub packets_served: u32,
    pub suspended: bool,
    /// Queue ran empty during this visit.
    pub emptied: bool,
    pub leftover: u64,
    pub donated: u64,
    pub discarded: u64,
    pub start_time: Seconds,
    pub end_time: Seconds,
}

impl ServiceRecord {
    /// Credit added at the start of the visit: quantum plus bonus.
    pub fn q_credit(&self) -> u64 {
        u64::from(self.quantum) + self.bonus
    }

    /// `PT = Q + DC(k-1) - DC(k)`.
    pub fn potential_throughput(&self) -> i64 {
        self.q_credit() as i64 + self.dc_start as i64 - self.dc_end as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: u64,
    pub start_time: Seconds,
    pub end_time: Seconds,
    pub bytes_served: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    pub packet_id: PacketId,
    pub flow: FlowId,
    pub size: u32,
    pub arrival_time: Seconds,
    pub completion_time: Option<Seconds>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMeta {
    pub id: FlowId,
    pub priority: u32,
    pub quantum: u32,
    pub weight: Rational,
    pub kind: QosKind,
    pub latency_critical: bool,
}

/// Everything the engine observed during one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetricsLedger {
    pub policy: Option<SchedulerPolicy>,
    pub seed: u64,
    pub output_rate_bps: u64,
    /// `M`, the largest packet in the run's trace.
    pub max_packet: u32,
    pub flows: Vec<FlowMeta>,
    pub services: Vec<ServiceRecord>,
    pub rounds: Vec<RoundRecord>,
    /// Indexed by packet id.
    pub packets: Vec<PacketRecord>,
    pub attempts: Vec<AttemptRecord>,
    /// Output line time spent on attempts, successful or not.
    pub busy_time: Seconds,
    pub run_duration: Seconds,
    pub quantum_injected: u64,
    pub donated_total: u64,
    pub discarded_total: u64,
}

impl MetricsLedger {
    pub fn flow_meta(&self, flow: FlowId) -> Option<&FlowMeta> {
        self.flows.iter().find(|f| f.id == flow)
    }

    pub fn services_of(&self, flow: FlowId) -> impl Iterator<Item = &ServiceRecord> + '_ {
        self.services.iter().filter(move |s| s.flow == flow)
    }

    pub fn service(&self, flow: FlowId, round: u64) -> Option<&ServiceRecord> {
        self.services
            .iter()
            .find(|s| s.flow == flow && s.round == round)
    }

    pub fn bytes_served(&self, flow: FlowId) -> u64 {
        self.services_of(flow).map(|s| s.bytes_served).sum()
    }

    pub fn total_bytes_served(&self) -> u64 {
        self.services.iter().map(|s| s.bytes_served).sum()
    }

    /// Round in which the flow's queue ran empty for the last time.
    pub fn completion_round(&self, flow: FlowId) -> Option<u64> {
        self.services_of(flow)
            .filter(|s| s.emptied)
            .map(|s| s.round)
            .last()
    }

    /// Flow-round CSV, one row per service record.
    pub fn write_services_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SERVICE_COLUMNS)?;
        for s in &self.services {
            w.write_record([
                s.round.to_string(),
                s.flow.to_string(),
                s.quantum.to_string(),
                s.bonus.to_string(),
                s.dc_start.to_string(),
                s.dc_end.to_string(),
                s.bytes_attempted.to_string(),
                s.bytes_served.to_string(),
                s.packets_served.to_string(),
                u8::from(s.suspended).to_string(),
                u8::from(s.emptied).to_string(),
                s.leftover.to_string(),
                s.donated.to_string(),
                s.discarded.to_string(),
                format_rational(&s.start_time),
                format_rational(&s.end_time),
                s.potential_throughput().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-packet CSV: arrival and completion times.
    pub fn write_packets_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(PACKET_COLUMNS)?;
        for p in &self.packets {
            w.write_record([
                p.packet_id.to_string(),
                p.flow.to_string(),
                p.size.to_string(),
                format_rational(&p.arrival_time),
                p.completion_time
                    .as_ref()
                    .map(format_rational)
                    .unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const SERVICE_COLUMNS: [&str; 17] = [
    "round",
    "flow_id",
    "quantum",
    "bonus",
    "dc_start",
    "dc_end",
    "bytes_attempted",
    "bytes_served",
    "packets_served",
    "suspended",
    "emptied",
    "leftover",
    "donated",
    "discarded",
    "start_time",
    "end_time",
    "potential_throughput",
];

pub const PACKET_COLUMNS: [&str; 5] = [
    "packet_id",
    "flow_id",
    "size",
    "arrival_time",
    "completion_time",
];

//! Round-robin service engine for the DRR family.
//!
//! All four policies share one service loop over the active list. They
//! differ in what happens on a failed attempt and on flow completion:
//!
//! | policy    | on failure                         | leftover at completion            |
//! |-----------|------------------------------------|-----------------------------------|
//! | `Drr`     | stop this visit, retry next round  | discarded                         |
//! | `Odrr`    | suspend, DC charged by penalty     | discarded                         |
//! | `OdrrEdc` | suspend, failed packet not charged | split over higher-priority flows  |
//! | `OdrrSdc` | suspend, failed packet not charged | all to highest-priority flow      |
//!
//! Suspended flows wait in the error queue until no error-free flow is left
//! in the active list, then rejoin in priority order.

mod engine;
mod events;
mod gate;
mod redistribute;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::FlowId;

pub use engine::{Engine, FinalReport, FlowState, RoundReport, ServiceOutcome, DEFAULT_MAX_ROUNDS};
pub use events::{write_ndjson, Event};
pub use gate::slot_eligible;
pub use redistribute::{equal_split, Donation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerPolicy {
    Drr,
    Odrr,
    #[serde(rename = "odrredc")]
    OdrrEdc,
    #[serde(rename = "odrrsdc")]
    OdrrSdc,
}

impl SchedulerPolicy {
    pub const ALL: [SchedulerPolicy; 4] = [
        SchedulerPolicy::Drr,
        SchedulerPolicy::Odrr,
        SchedulerPolicy::OdrrEdc,
        SchedulerPolicy::OdrrSdc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerPolicy::Drr => "drr",
            SchedulerPolicy::Odrr => "odrr",
            SchedulerPolicy::OdrrEdc => "odrredc",
            SchedulerPolicy::OdrrSdc => "odrrsdc",
        }
    }

    pub fn redistributes(self) -> bool {
        matches!(self, SchedulerPolicy::OdrrEdc | SchedulerPolicy::OdrrSdc)
    }

    pub fn suspends_on_error(self) -> bool {
        !matches!(self, SchedulerPolicy::Drr)
    }
}

impl fmt::Display for SchedulerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchedulerPolicy::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown policy {s:?} (expected drr, odrr, odrredc, odrrsdc)"))
    }
}

/// How the inter-class interval rule is read when gating is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GatingReading {
    /// Interval length and period are both `2^k`: every slot is covered.
    Literal,
    /// Class `k` owns `2^k`-slot blocks with idle blocks of equal length
    /// between them: slots `s` with `floor(s / 2^k)` even.
    #[default]
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("UnknownFlow: {0}")]
    UnknownFlow(FlowId),
    #[error("ServeOnCompletedFlow: flow {0} has no packets and no future arrivals")]
    ServeOnCompletedFlow(FlowId),
    #[error("ServeOnIdleFlow: flow {0} has an empty queue")]
    ServeOnIdleFlow(FlowId),
    #[error("NotCompleted: donor flow {0} still has queued packets")]
    NotCompleted(FlowId),
    #[error("WrongPolicy: {op} is not defined for {policy}")]
    WrongPolicy {
        op: &'static str,
        policy: SchedulerPolicy,
    },
}

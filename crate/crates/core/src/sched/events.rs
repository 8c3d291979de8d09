use std::io;

use serde::Serialize;

use crate::model::FlowId;

/// One line of the engine's newline-delimited event log. Times and ratios
/// are exact rational strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Serve {
        round: u64,
        flow: FlowId,
        dc_before: u64,
        quantum: u32,
        bonus: u64,
        credit: u64,
        bytes_attempted: u64,
        bytes_served: u64,
        packets_served: u32,
        dc_after: u64,
        start: String,
        end: String,
    },
    Suspend {
        round: u64,
        flow: FlowId,
        bytes_attempted: u64,
        bytes_served: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        penalty_factor: Option<String>,
        dc: u64,
    },
    Complete {
        round: u64,
        flow: FlowId,
        leftover: u64,
    },
    Donate {
        round: u64,
        from: FlowId,
        to: FlowId,
        bytes: u64,
    },
    Discard {
        round: u64,
        flow: FlowId,
        bytes: u64,
        reason: &'static str,
    },
    Readmit {
        round: u64,
        flow: FlowId,
    },
    Skip {
        round: u64,
        flow: FlowId,
    },
    Idle {
        from: String,
        to: String,
    },
}

pub fn write_ndjson<W: io::Write>(events: &[Event], mut out: W) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

//! Per-run artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use drrsim_core::metrics::{
    bandwidth_utilization, per_flow_latency, summarize_with, DelayBoundReading, RunSummary,
};
use drrsim_core::rational::to_f64;
use drrsim_core::sched::write_ndjson;
use drrsim_core::traffic::write_trace_csv;
use drrsim_core::{Engine, Event, MetricsLedger, Packet, SchedulerPolicy, ValidatedScenario};

use crate::{io_failure, Failure, Format, RunArgs};

pub struct Run {
    pub policy: SchedulerPolicy,
    pub seed: u64,
    pub ledger: MetricsLedger,
    pub events: Vec<Event>,
    pub trace: Vec<Packet>,
    pub summary: RunSummary,
}

pub fn simulate(
    scenario: &ValidatedScenario,
    policy: SchedulerPolicy,
    seed: u64,
    reading: DelayBoundReading,
) -> Run {
    let trace = scenario.expand_trace(seed);
    let mut engine = Engine::with_trace(scenario, policy, seed, trace.clone());
    engine.run_until(&scenario.duration);
    let (ledger, events) = engine.into_parts();
    let summary = summarize_with(&ledger, reading);
    Run {
        policy,
        seed,
        ledger,
        events,
        trace,
        summary,
    }
}

impl Run {
    pub fn dir(&self, out: &Path) -> PathBuf {
        out.join(self.policy.name())
            .join(format!("seed-{}", self.seed))
    }

    pub fn one_line(&self) -> String {
        let s = &self.summary;
        let latency = s
            .critical_mean_latency_s
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        format!(
            "{} seed {}: {} rounds, {} bytes, throughput {:.1} bps, critical mean latency {latency} s, delay bound {}",
            s.policy,
            s.seed,
            s.rounds,
            s.total_bytes_served,
            s.aggregate_throughput_bps,
            if s.delay_bound.met { "met" } else { "VIOLATED" },
        )
    }
}

/// Writes to a sibling temp file, then renames over the target.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| io_failure(tmp.display(), e))?;
    f.write_all(bytes)
        .map_err(|e| io_failure(tmp.display(), e))?;
    f.sync_all().map_err(|e| io_failure(tmp.display(), e))?;
    fs::rename(&tmp, path).map_err(|e| io_failure(path.display(), e))
}

fn plot_data(rows: impl Iterator<Item = (u32, String)>) -> Vec<u8> {
    let mut s = String::from("# flow_id\tvalue\n");
    for (id, v) in rows {
        s.push_str(&format!("{id}\t{v}\n"));
    }
    s.into_bytes()
}

pub fn write_run(run: &Run, scenario: &ValidatedScenario, args: &RunArgs) -> Result<(), Failure> {
    let dir = run.dir(&args.out);
    fs::create_dir_all(&dir).map_err(|e| io_failure(dir.display(), e))?;
    if args.wants(Format::Csv) {
        let mut buf = Vec::new();
        run.ledger
            .write_services_csv(&mut buf)
            .map_err(|e| io_failure("ledger.csv", e))?;
        write_atomic(&dir.join("ledger.csv"), &buf)?;
        let mut buf = Vec::new();
        run.ledger
            .write_packets_csv(&mut buf)
            .map_err(|e| io_failure("packets.csv", e))?;
        write_atomic(&dir.join("packets.csv"), &buf)?;
        let mut buf = Vec::new();
        write_trace_csv(&run.trace, &mut buf).map_err(|e| io_failure("trace.csv", e))?;
        write_atomic(&dir.join("trace.csv"), &buf)?;
    }
    if args.wants(Format::Json) {
        write_atomic(&dir.join("summary.json"), run.summary.to_json().as_bytes())?;
        let mut buf = Vec::new();
        write_ndjson(&run.events, &mut buf).map_err(|e| io_failure("events.ndjson", e))?;
        write_atomic(&dir.join("events.ndjson"), &buf)?;
    }
    if args.wants(Format::Plotdata) {
        let util = scenario.flows.iter().map(|f| {
            (
                f.id.0,
                to_f64(&bandwidth_utilization(&run.ledger, f.id)).to_string(),
            )
        });
        write_atomic(&dir.join("utilization.dat"), &plot_data(util))?;
        let latency = scenario.flows.iter().map(|f| {
            let v = per_flow_latency(&run.ledger, f.id)
                .map_or("nan".to_string(), |l| to_f64(&l.mean).to_string());
            (f.id.0, v)
        });
        write_atomic(&dir.join("latency.dat"), &plot_data(latency))?;
    }
    Ok(())
}

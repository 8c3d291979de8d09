//! Policy comparison table: one CSV row per (policy, seed), and a text
//! digest with per-policy means and per-seed wins.

use std::fmt::Write as _;
use std::path::Path;

use drrsim_core::SchedulerPolicy;

use crate::output::Run;
use crate::{io_failure, Failure};

struct Row<'a> {
    run: &'a Run,
    latency: Option<f64>,
    throughput: f64,
    fm: f64,
}

fn row(run: &Run) -> Row<'_> {
    Row {
        run,
        latency: run.summary.critical_mean_latency_s,
        throughput: run.summary.aggregate_throughput_bps,
        fm: run.summary.fm_whole_run,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn write(
    runs: &[Run],
    policies: &[SchedulerPolicy],
    seeds: &[u64],
    out: &Path,
) -> Result<(), Failure> {
    let rows: Vec<Row> = runs.iter().map(row).collect();
    let flow_ids: Vec<_> = runs
        .first()
        .map(|r| r.summary.flows.iter().map(|f| f.flow_id).collect())
        .unwrap_or_default();
    let baseline = policies[0];
    let base_of = |seed: u64| {
        rows.iter()
            .find(|r| r.run.policy == baseline && r.run.seed == seed)
    };

    let mut csv =
        String::from("policy,seed,critical_mean_latency_s,aggregate_throughput_bps,fm_whole_run");
    for id in &flow_ids {
        write!(csv, ",utilization_{id}").unwrap();
    }
    for id in &flow_ids {
        write!(csv, ",completion_round_{id}").unwrap();
    }
    writeln!(csv, ",delta_latency_s,delta_throughput_bps,delta_fm").unwrap();
    for r in &rows {
        write!(
            csv,
            "{},{},{},{},{}",
            r.run.policy,
            r.run.seed,
            opt(r.latency),
            r.throughput,
            r.fm
        )
        .unwrap();
        for f in &r.run.summary.flows {
            write!(csv, ",{}", f.utilization).unwrap();
        }
        for f in &r.run.summary.flows {
            write!(
                csv,
                ",{}",
                f.completion_round
                    .map_or_else(String::new, |c| c.to_string())
            )
            .unwrap();
        }
        let b = base_of(r.run.seed).expect("baseline ran for every seed");
        let dl = r.latency.zip(b.latency).map(|(a, b)| a - b);
        writeln!(
            csv,
            ",{},{},{}",
            opt(dl),
            r.throughput - b.throughput,
            r.fm - b.fm
        )
        .unwrap();
    }

    let mut text = format!("{} seeds, baseline {baseline}\n\n", seeds.len());
    writeln!(
        text,
        "{:<8} {:>14} {:>14} {:>10} {:>12} {:>15}",
        "policy", "mean latency s", "throughput bps", "FM", "latency wins", "throughput wins"
    )
    .unwrap();
    let mut seen = Vec::new();
    for &p in policies {
        if seen.contains(&p) {
            continue;
        }
        seen.push(p);
        let mine: Vec<&Row> = rows.iter().filter(|r| r.run.policy == p).collect();
        let n = mine.len() as f64;
        let lat: Vec<f64> = mine.iter().filter_map(|r| r.latency).collect();
        let mean_lat = if lat.is_empty() {
            f64::NAN
        } else {
            lat.iter().sum::<f64>() / lat.len() as f64
        };
        let mean_thr = mine.iter().map(|r| r.throughput).sum::<f64>() / n;
        let mean_fm = mine.iter().map(|r| r.fm).sum::<f64>() / n;
        // ties count as a win for every tied policy
        let mut lat_wins = 0;
        let mut thr_wins = 0;
        for &seed in seeds {
            let same: Vec<&Row> = rows.iter().filter(|r| r.run.seed == seed).collect();
            let Some(me) = same.iter().find(|r| r.run.policy == p) else {
                continue;
            };
            let best_lat = same
                .iter()
                .filter_map(|r| r.latency)
                .fold(f64::INFINITY, f64::min);
            let best_thr = same
                .iter()
                .map(|r| r.throughput)
                .fold(f64::NEG_INFINITY, f64::max);
            lat_wins += usize::from(me.latency == Some(best_lat));
            thr_wins += usize::from(me.throughput == best_thr);
        }
        writeln!(
            text,
            "{:<8} {:>14.4} {:>14.1} {:>10.1} {:>12} {:>15}",
            p.name(),
            mean_lat,
            mean_thr,
            mean_fm,
            format!("{lat_wins}/{}", seeds.len()),
            format!("{thr_wins}/{}", seeds.len())
        )
        .unwrap();
    }

    for (name, body) in [("compare.csv", csv), ("compare.txt", text.clone())] {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|e| io_failure(path.display(), e))?;
    }
    print!("{text}");
    Ok(())
}

//! Packet arrival generation: static lists and seeded Poisson processes.

use std::io;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::model::{FlowId, Outcome, Packet, PacketId, ValidatedScenario};
use crate::rational::{format_rational, Rational, Seconds};

/// Generated arrival instants are quantized to this many ticks per second.
pub const ARRIVAL_TICKS_PER_SECOND: i128 = 1_000_000;

const TRAFFIC_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeDist {
    Fixed(u32),
    UniformInt { lo: u32, hi: u32 },
}

impl SizeDist {
    pub fn bounds(self) -> (u32, u32) {
        match self {
            SizeDist::Fixed(b) => (b, b),
            SizeDist::UniformInt { lo, hi } => (lo, hi),
        }
    }

    fn sample<R: Rng>(self, rng: &mut R) -> u32 {
        match self {
            SizeDist::Fixed(b) => b,
            SizeDist::UniformInt { lo, hi } => rng.random_range(lo..=hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticPacket {
    pub size: u32,
    pub arrival_time: Seconds,
    pub error_script: Option<Vec<Outcome>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrafficSpec {
    Static(Vec<StaticPacket>),
    Poisson {
        /// Packets per second.
        rate: Rational,
        size: SizeDist,
        cap: u32,
    },
}

impl TrafficSpec {
    pub fn max_possible_size(&self) -> u32 {
        match self {
            TrafficSpec::Static(packets) => packets.iter().map(|p| p.size).max().unwrap_or(0),
            TrafficSpec::Poisson { size, cap, .. } => size.bounds().1.min(*cap),
        }
    }
}

fn flow_rng(seed: u64, flow: FlowId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TRAFFIC_STREAM_BASE + u64::from(flow.0));
    rng
}

/// Materializes one flow's arrivals in `[0, duration)` (static packets may sit
/// at `duration` exactly). Packet ids are left at 0; [`expand_scenario`]
/// assigns global ids.
pub fn expand_trace(
    flow: FlowId,
    spec: &TrafficSpec,
    duration: &Seconds,
    seed: u64,
) -> Vec<Packet> {
    match spec {
        TrafficSpec::Static(packets) => {
            let mut out: Vec<Packet> = packets
                .iter()
                .map(|p| {
                    Packet::new(
                        PacketId(0),
                        flow,
                        p.size,
                        p.arrival_time,
                        p.error_script.clone(),
                    )
                })
                .collect();
            out.sort_by_key(|a| a.arrival_time);
            out
        }
        TrafficSpec::Poisson { rate, size, cap } => {
            let mut rng = flow_rng(seed, flow);
            let rate_f = rate.to_f64().expect("validated rate is finite");
            let exp = Exp::new(rate_f).expect("validated rate is positive");
            let horizon = *duration * Rational::from_integer(ARRIVAL_TICKS_PER_SECOND);
            let mut ticks: i128 = 0;
            let mut out = Vec::new();
            loop {
                let gap: f64 = exp.sample(&mut rng);
                ticks += (gap * ARRIVAL_TICKS_PER_SECOND as f64).round() as i128;
                if Rational::from_integer(ticks) >= horizon {
                    break;
                }
                let bytes = size.sample(&mut rng).min(*cap);
                out.push(Packet::new(
                    PacketId(0),
                    flow,
                    bytes,
                    Rational::new(ticks, ARRIVAL_TICKS_PER_SECOND),
                    None,
                ));
            }
            out
        }
    }
}

/// Delays generated arrivals so that a flow delivers at most `rate_bps` into
/// its scheduler queue: a packet is fully received `size * 8 / rate` after the
/// input link frees up. Packets that would land after `duration` are dropped.
pub fn serialize_on_input_link(
    packets: Vec<Packet>,
    rate_bps: u64,
    duration: &Seconds,
) -> Vec<Packet> {
    let rate = i128::from(rate_bps);
    let mut link_free = Rational::from_integer(0);
    let mut out = Vec::with_capacity(packets.len());
    for mut p in packets {
        let start = p.arrival_time.max(link_free);
        let done = start + Rational::new(i128::from(p.size) * 8, rate);
        link_free = done;
        if done > *duration {
            break;
        }
        p.arrival_time = done;
        out.push(p);
    }
    out
}

/// Expands every flow and merges into one trace ordered by arrival time.
/// Equal arrival times keep flow declaration order; ids follow that order.
pub fn expand_scenario(scenario: &ValidatedScenario, seed: u64) -> Vec<Packet> {
    let mut all = Vec::new();
    for flow in &scenario.flows {
        let mut packets = expand_trace(flow.id, &flow.traffic, &scenario.duration, seed);
        if let (Some(rate), TrafficSpec::Poisson { .. }) = (flow.input_rate_bps, &flow.traffic) {
            packets = serialize_on_input_link(packets, rate, &scenario.duration);
        }
        all.extend(packets);
    }
    all.sort_by_key(|a| a.arrival_time);
    for (i, p) in all.iter_mut().enumerate() {
        p.id = PacketId(i as u64);
    }
    all
}

/// Packets with `from <= arrival_time < to`, for a trace sorted by arrival.
pub fn arrivals_in<'a>(trace: &'a [Packet], from: &Seconds, to: &Seconds) -> &'a [Packet] {
    debug_assert!(from <= to);
    debug_assert!(trace
        .windows(2)
        .all(|w| w[0].arrival_time <= w[1].arrival_time));
    let lo = trace.partition_point(|p| p.arrival_time < *from);
    let hi = trace.partition_point(|p| p.arrival_time < *to).max(lo);
    &trace[lo..hi]
}

/// CSV audit export: `packet_id,flow_id,size,arrival_time`.
pub fn write_trace_csv<W: io::Write>(trace: &[Packet], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["packet_id", "flow_id", "size", "arrival_time"])?;
    for p in trace {
        w.write_record([
            p.id.to_string(),
            p.flow_id.to_string(),
            p.size.to_string(),
            format_rational(&p.arrival_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn secs(n: i128) -> Seconds {
        Rational::from_integer(n)
    }

    fn poisson(rate: Rational, size: SizeDist) -> TrafficSpec {
        TrafficSpec::Poisson {
            rate,
            size,
            cap: 750,
        }
    }

    #[test]
    fn static_list_passes_through_in_order() {
        let spec = TrafficSpec::Static(
            [750, 50, 500, 150]
                .into_iter()
                .map(|size| StaticPacket {
                    size,
                    arrival_time: secs(0),
                    error_script: None,
                })
                .collect(),
        );
        let trace = expand_trace(FlowId(2), &spec, &secs(20), 7);
        let sizes: Vec<u32> = trace.iter().map(|p| p.size).collect();
        assert_eq!(sizes, vec![750, 50, 500, 150]);
        assert!(trace.iter().all(|p| p.arrival_time == secs(0)));
    }

    #[test]
    fn poisson_over_empty_interval_is_empty() {
        let spec = poisson(Rational::from_integer(2), SizeDist::Fixed(750));
        assert!(expand_trace(FlowId(1), &spec, &secs(0), 42).is_empty());
    }

    #[test]
    fn poisson_is_a_pure_function_of_seed() {
        let spec = poisson(
            Rational::from_integer(2),
            SizeDist::UniformInt { lo: 50, hi: 750 },
        );
        let a = expand_trace(FlowId(1), &spec, &secs(20), 42);
        let b = expand_trace(FlowId(1), &spec, &secs(20), 42);
        let c = expand_trace(FlowId(1), &spec, &secs(20), 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|p| (50..=750).contains(&p.size)));
    }

    #[test]
    fn poisson_count_matches_independent_exponential_stream() {
        // Oracle: replay the same seeded exponential gaps and count events.
        let rate = 2.0;
        let mut rng = flow_rng(42, FlowId(1));
        let exp = Exp::new(rate).unwrap();
        let mut t = 0i128;
        let mut expected = 0usize;
        loop {
            let gap: f64 = exp.sample(&mut rng);
            t += (gap * 1e6).round() as i128;
            if t >= 20_000_000 {
                break;
            }
            expected += 1;
        }
        let spec = poisson(Rational::from_integer(2), SizeDist::Fixed(750));
        let trace = expand_trace(FlowId(1), &spec, &secs(20), 42);
        assert_eq!(trace.len(), expected);
        // ~40 expected; a Poisson(40) count outside [15, 70] would be absurd.
        assert!((15..=70).contains(&trace.len()), "{}", trace.len());
    }

    #[test]
    fn mean_gap_converges_to_inverse_rate() {
        let spec = poisson(Rational::from_integer(4), SizeDist::Fixed(100));
        let trace = expand_trace(FlowId(3), &spec, &secs(5_000), 9);
        assert!(trace.len() >= 10_000);
        let last = crate::rational::to_f64(&trace.last().unwrap().arrival_time);
        let mean_gap = last / trace.len() as f64;
        assert!((mean_gap - 0.25).abs() / 0.25 < 0.05, "mean gap {mean_gap}");
    }

    #[test]
    fn input_link_limits_delivery_rate() {
        let spec = poisson(Rational::from_integer(10), SizeDist::Fixed(750));
        let raw = expand_trace(FlowId(1), &spec, &secs(20), 1);
        let shaped = serialize_on_input_link(raw, 4500, &secs(20));
        for w in shaped.windows(2) {
            let gap = w[1].arrival_time - w[0].arrival_time;
            assert!(gap >= Rational::new(750 * 8, 4500));
        }
        assert!(shaped.iter().all(|p| p.arrival_time <= secs(20)));
    }

    #[test]
    fn arrivals_in_window() {
        let mk = |t: Rational| Packet::new(PacketId(0), FlowId(1), 1, t, None);
        let trace = vec![mk(secs(0)), mk(Rational::new(3, 2)), mk(secs(3))];
        let window = arrivals_in(&trace, &secs(1), &secs(2));
        assert_eq!(window.len(), 1);
        assert_eq!(window[0].arrival_time, Rational::new(3, 2));
        assert_eq!(arrivals_in(&trace, &secs(0), &secs(4)).len(), 3);
        assert!(arrivals_in(&trace, &secs(1), &secs(1)).is_empty());
    }
}

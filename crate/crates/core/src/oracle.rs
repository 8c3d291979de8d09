//! Straight-line reference simulator used to cross-check the engine.
//!
//! Shares no code with [`crate::sched`]: the round semantics are restated
//! here from scratch over plain vectors, for small scripted scenarios only.

use std::collections::{BTreeMap, VecDeque};

use crate::channel::ChannelKind;
use crate::model::{FlowId, Outcome, ValidatedScenario};
use crate::rational::Rational;
use crate::sched::SchedulerPolicy;
use crate::traffic::TrafficSpec;

pub const MAX_ORACLE_FLOWS: usize = 8;
pub const MAX_ORACLE_PACKETS_PER_FLOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("ScenarioTooLarge: at most {MAX_ORACLE_FLOWS} flows of {MAX_ORACLE_PACKETS_PER_FLOW} packets")]
    ScenarioTooLarge,
    #[error("oracle supports static traffic on perfect or scripted channels without gating")]
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Round in which each flow's queue last ran empty.
    pub completion_round: BTreeMap<FlowId, Option<u64>>,
    pub bytes_served: BTreeMap<FlowId, u64>,
    pub final_dc: BTreeMap<FlowId, u64>,
}

struct Pkt {
    size: u64,
    script: Vec<bool>,
    tries: usize,
}

struct Fl {
    id: FlowId,
    prio: u32,
    quantum: u64,
    dc: u64,
    bank: u64,
    queue: VecDeque<Pkt>,
    served: u64,
    done_round: Option<u64>,
}

struct Arrival {
    at: Rational,
    flow: usize,
    size: u64,
    script: Vec<bool>,
}

pub fn oracle_simulate(
    scenario: &ValidatedScenario,
    policy: SchedulerPolicy,
) -> Result<OracleResult, OracleError> {
    if scenario.flows.len() > MAX_ORACLE_FLOWS {
        return Err(OracleError::ScenarioTooLarge);
    }
    if scenario.interclass_gating || scenario.channel == ChannelKind::Bernoulli {
        return Err(OracleError::Unsupported);
    }
    let scripted = scenario.channel == ChannelKind::Scripted;

    let mut flows = Vec::new();
    let mut arrivals = Vec::new();
    for (i, f) in scenario.flows.iter().enumerate() {
        let TrafficSpec::Static(list) = &f.traffic else {
            return Err(OracleError::Unsupported);
        };
        if list.len() > MAX_ORACLE_PACKETS_PER_FLOW {
            return Err(OracleError::ScenarioTooLarge);
        }
        for p in list {
            let script = match (&p.error_script, scripted) {
                (Some(s), true) => s.iter().map(|o| *o == Outcome::Failure).collect(),
                _ => Vec::new(),
            };
            arrivals.push(Arrival {
                at: p.arrival_time,
                flow: i,
                size: u64::from(p.size),
                script,
            });
        }
        flows.push(Fl {
            id: f.id,
            prio: f.priority,
            quantum: u64::from(f.quantum),
            dc: 0,
            bank: 0,
            queue: VecDeque::new(),
            served: 0,
            done_round: None,
        });
    }
    // stable: equal times keep declaration order, as the trace merge does
    arrivals.sort_by_key(|a| a.at);
    let biggest = arrivals.iter().map(|a| a.size).max().unwrap_or(0);
    let rate = i128::from(scenario.output_rate_bps);
    let t_end = scenario.duration;

    let mut sim = Sim {
        flows,
        arrivals: arrivals.into(),
        order: Vec::new(),
        parked: Vec::new(),
        busy: None,
        clock: Rational::from_integer(0),
    };
    let mut round: u64 = 1;

    loop {
        if sim.clock >= t_end {
            break;
        }
        sim.admit();
        if sim.order.is_empty() && sim.parked.is_empty() {
            match sim.arrivals.front() {
                Some(a) if a.at < t_end => {
                    sim.clock = a.at;
                    continue;
                }
                _ => break,
            }
        }
        sim.unpark_if_idle();

        let visits = sim.order.len();
        for _ in 0..visits {
            let f = sim.order.remove(0);
            sim.busy = Some(f);
            let credit = sim.flows[f].dc + sim.flows[f].quantum + sim.flows[f].bank;
            sim.flows[f].bank = 0;
            let mut avail = credit;
            let mut sent = 0u64;
            let mut errored = false;
            while let Some(head) = sim.flows[f].queue.front_mut() {
                if head.size > avail {
                    break;
                }
                let fails = head.script.get(head.tries).copied().unwrap_or(false);
                head.tries += 1;
                let size = head.size;
                if !(fails && scenario.zero_cost_failures) {
                    sim.clock += Rational::new(i128::from(size as u32) * 8, rate);
                }
                if fails {
                    sim.admit();
                    errored = true;
                    break;
                }
                sim.flows[f].queue.pop_front();
                avail -= size;
                sent += size;
                sim.admit();
            }
            sim.flows[f].served += sent;
            sim.flows[f].dc = match policy {
                SchedulerPolicy::Odrr if errored => credit - sent,
                _ => avail,
            };

            if sim.flows[f].queue.is_empty() {
                let leftover = std::mem::take(&mut sim.flows[f].dc);
                sim.flows[f].done_round = Some(round);
                let me = sim.flows[f].prio;
                let mut takers: Vec<usize> = (0..sim.flows.len())
                    .filter(|&j| j != f && !sim.flows[j].queue.is_empty())
                    .collect();
                takers.sort_by_key(|&j| sim.flows[j].prio);
                match policy {
                    SchedulerPolicy::OdrrEdc => {
                        takers.retain(|&j| sim.flows[j].prio < me);
                        let k = takers.len() as u64;
                        if let Some(each) = leftover.checked_div(k) {
                            for (n, &j) in takers.iter().enumerate() {
                                sim.flows[j].bank += each + u64::from((n as u64) < leftover % k);
                            }
                        }
                    }
                    SchedulerPolicy::OdrrSdc => {
                        if let Some(&j) = takers.first() {
                            sim.flows[j].bank += leftover;
                        }
                    }
                    SchedulerPolicy::Drr | SchedulerPolicy::Odrr => {}
                }
            } else {
                sim.flows[f].dc = sim.flows[f].dc.min(biggest);
                if errored && policy != SchedulerPolicy::Drr {
                    sim.parked.push(f);
                } else {
                    sim.order.push(f);
                }
            }
            sim.busy = None;
        }
        sim.unpark_if_idle();
        round += 1;
    }

    Ok(OracleResult {
        completion_round: sim.flows.iter().map(|f| (f.id, f.done_round)).collect(),
        bytes_served: sim.flows.iter().map(|f| (f.id, f.served)).collect(),
        final_dc: sim.flows.iter().map(|f| (f.id, f.dc)).collect(),
    })
}

struct Sim {
    flows: Vec<Fl>,
    arrivals: VecDeque<Arrival>,
    order: Vec<usize>,
    parked: Vec<usize>,
    busy: Option<usize>,
    clock: Rational,
}

impl Sim {
    fn admit(&mut self) {
        while self.arrivals.front().is_some_and(|a| a.at <= self.clock) {
            let a = self.arrivals.pop_front().unwrap();
            let was_empty = self.flows[a.flow].queue.is_empty();
            self.flows[a.flow].queue.push_back(Pkt {
                size: a.size,
                script: a.script,
                tries: 0,
            });
            let listed = self.order.contains(&a.flow) || self.parked.contains(&a.flow);
            if was_empty && self.busy != Some(a.flow) && !listed {
                self.flows[a.flow].dc = 0;
                self.order.push(a.flow);
            }
        }
    }

    fn unpark_if_idle(&mut self) {
        if self.order.is_empty() && !self.parked.is_empty() {
            let mut p = std::mem::take(&mut self.parked);
            p.sort_by_key(|&j| self.flows[j].prio);
            self.order = p;
        }
    }
}

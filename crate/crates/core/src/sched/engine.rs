use std::collections::{BTreeMap, VecDeque};

use num_integer::Integer;
use num_traits::Zero;

use super::gate::{next_eligible_slot, slot_eligible};
use super::{EngineError, Event, GatingReading, SchedulerPolicy};
use crate::channel::{penalty_factor, ChannelModel};
use crate::metrics::{FlowMeta, MetricsLedger, PacketRecord, RoundRecord, ServiceRecord};
use crate::model::{max_packet_in, FlowId, Packet, QosClass, ValidatedScenario};
use crate::rational::{format_rational, Rational, Seconds};

/// Safety cap for [`Engine::run_until`]; only reachable when every attempt
/// fails at zero cost.
pub const DEFAULT_MAX_ROUNDS: u64 = 5_000_000;

#[derive(Debug, Clone)]
pub struct FlowState {
    pub id: FlowId,
    pub priority: u32,
    pub qos: QosClass,
    pub weight: Rational,
    pub quantum: u32,
    pub queue: VecDeque<Packet>,
    pub dc: u64,
    /// Donated credits banked for the next visit.
    pub bonus: u64,
    pub suspended: bool,
    /// Queue empty and no arrivals left in the trace.
    pub completed: bool,
    pending_arrivals: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceOutcome {
    pub flow: FlowId,
    pub bytes_served: u64,
    pub packets_served: u32,
    pub suspended: bool,
    /// Queue ran empty during the visit.
    pub emptied: bool,
    pub completed: bool,
    pub dc_after: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundReport {
    /// `None` for an idle step in which nothing was backlogged.
    pub round: Option<u64>,
    pub bytes_by_flow: BTreeMap<FlowId, u64>,
    pub clock: Seconds,
}

impl RoundReport {
    pub fn bytes_served(&self) -> u64 {
        self.bytes_by_flow.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalReport {
    pub rounds: u64,
    pub clock: Seconds,
    pub bytes_by_flow: BTreeMap<FlowId, u64>,
    pub all_completed: bool,
    /// Stopped by the round cap rather than by time or completion.
    pub truncated: bool,
}

impl FinalReport {
    pub fn bytes_served(&self) -> u64 {
        self.bytes_by_flow.values().sum()
    }
}

/// One simulation run: a fixed policy over one expanded trace.
pub struct Engine {
    pub(super) policy: SchedulerPolicy,
    pub(super) flows: Vec<FlowState>,
    index: BTreeMap<FlowId, usize>,
    pub(super) active_list: VecDeque<usize>,
    pub(super) error_queue: VecDeque<usize>,
    pending: VecDeque<Packet>,
    channel: ChannelModel,
    pub(super) round_index: u64,
    clock: Seconds,
    output_rate_bps: u64,
    max_packet: u32,
    gating: Option<(GatingReading, Seconds)>,
    zero_cost_failures: bool,
    max_rounds: u64,
    in_service: Option<usize>,
    pub(super) ledger: MetricsLedger,
    pub(super) events: Vec<Event>,
}

impl Engine {
    pub fn new(scenario: &ValidatedScenario, policy: SchedulerPolicy, seed: u64) -> Self {
        let trace = scenario.expand_trace(seed);
        Self::with_trace(scenario, policy, seed, trace)
    }

    /// Builds an engine over an explicit trace; packet ids must be unique
    /// and the trace sorted by arrival time.
    pub fn with_trace(
        scenario: &ValidatedScenario,
        policy: SchedulerPolicy,
        seed: u64,
        trace: Vec<Packet>,
    ) -> Self {
        let p_err = scenario.flows.iter().map(|f| (f.id, f.p_err)).collect();
        let channel = ChannelModel::new(scenario.channel, p_err, seed);
        let max_packet = max_packet_in(&trace);

        let mut flows: Vec<FlowState> = scenario
            .flows
            .iter()
            .map(|f| FlowState {
                id: f.id,
                priority: f.priority,
                qos: f.qos.clone(),
                weight: f.weight,
                quantum: f.quantum,
                queue: VecDeque::new(),
                dc: 0,
                bonus: 0,
                suspended: false,
                completed: false,
                pending_arrivals: 0,
            })
            .collect();
        let index: BTreeMap<FlowId, usize> =
            flows.iter().enumerate().map(|(i, f)| (f.id, i)).collect();

        let mut packets = Vec::with_capacity(trace.len());
        for p in &trace {
            let idx = index[&p.flow_id];
            flows[idx].pending_arrivals += 1;
            packets.push(PacketRecord {
                packet_id: p.id,
                flow: p.flow_id,
                size: p.size,
                arrival_time: p.arrival_time,
                completion_time: None,
            });
        }
        packets.sort_by_key(|p| p.packet_id);
        for f in &mut flows {
            f.completed = f.pending_arrivals == 0;
        }

        let ledger = MetricsLedger {
            policy: Some(policy),
            seed,
            output_rate_bps: scenario.output_rate_bps,
            max_packet,
            flows: scenario
                .flows
                .iter()
                .map(|f| FlowMeta {
                    id: f.id,
                    priority: f.priority,
                    quantum: f.quantum,
                    weight: f.weight,
                    kind: f.qos.kind,
                    latency_critical: f.qos.latency_critical,
                })
                .collect(),
            packets,
            busy_time: Rational::zero(),
            run_duration: Rational::zero(),
            ..MetricsLedger::default()
        };

        let gating = scenario
            .interclass_gating
            .then(|| (scenario.gating_reading, scenario.slot_length()));

        let mut engine = Self {
            policy,
            flows,
            index,
            active_list: VecDeque::new(),
            error_queue: VecDeque::new(),
            pending: trace.into(),
            channel,
            round_index: 1,
            clock: Rational::zero(),
            output_rate_bps: scenario.output_rate_bps,
            max_packet,
            gating,
            zero_cost_failures: scenario.zero_cost_failures,
            max_rounds: DEFAULT_MAX_ROUNDS,
            in_service: None,
            ledger,
            events: Vec::new(),
        };
        engine.admit_arrivals();
        engine
    }

    pub fn set_max_rounds(&mut self, max_rounds: u64) {
        self.max_rounds = max_rounds;
    }

    pub fn policy(&self) -> SchedulerPolicy {
        self.policy
    }

    pub fn clock(&self) -> Seconds {
        self.clock
    }

    /// Index of the round that will run next.
    pub fn round_index(&self) -> u64 {
        self.round_index
    }

    pub fn max_packet(&self) -> u32 {
        self.max_packet
    }

    pub fn flow(&self, id: FlowId) -> Option<&FlowState> {
        self.index.get(&id).map(|&i| &self.flows[i])
    }

    pub fn flows(&self) -> &[FlowState] {
        &self.flows
    }

    pub fn active_list(&self) -> Vec<FlowId> {
        self.active_list.iter().map(|&i| self.flows[i].id).collect()
    }

    pub fn error_queue(&self) -> Vec<FlowId> {
        self.error_queue.iter().map(|&i| self.flows[i].id).collect()
    }

    pub fn ledger(&self) -> &MetricsLedger {
        &self.ledger
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_parts(self) -> (MetricsLedger, Vec<Event>) {
        (self.ledger, self.events)
    }

    /// Overwrites a flow's counters. Intended for tests and what-if probes.
    pub fn set_credits(&mut self, id: FlowId, dc: u64, bonus: u64) -> Result<(), EngineError> {
        let idx = self.index_of(id)?;
        self.flows[idx].dc = dc;
        self.flows[idx].bonus = bonus;
        Ok(())
    }

    pub(super) fn index_of(&self, id: FlowId) -> Result<usize, EngineError> {
        self.index
            .get(&id)
            .copied()
            .ok_or(EngineError::UnknownFlow(id))
    }

    fn is_listed(&self, idx: usize) -> bool {
        self.active_list.contains(&idx) || self.error_queue.contains(&idx)
    }

    /// Moves arrivals with `arrival_time <= clock` into their queues.
    fn admit_arrivals(&mut self) {
        while self
            .pending
            .front()
            .is_some_and(|p| p.arrival_time <= self.clock)
        {
            let packet = self.pending.pop_front().expect("front checked");
            let idx = self.index[&packet.flow_id];
            let flow = &mut self.flows[idx];
            flow.pending_arrivals -= 1;
            let was_idle = flow.queue.is_empty();
            flow.queue.push_back(packet);
            if was_idle && self.in_service != Some(idx) && !self.is_listed(idx) {
                self.flows[idx].dc = 0;
                self.active_list.push_back(idx);
            }
        }
    }

    /// Suspended flows rejoin, highest priority first, once no error-free
    /// flow is waiting.
    fn readmit_if_drained(&mut self) {
        if !self.active_list.is_empty() || self.error_queue.is_empty() {
            return;
        }
        let mut parked: Vec<usize> = self.error_queue.drain(..).collect();
        parked.sort_by_key(|&i| self.flows[i].priority);
        for idx in parked {
            self.flows[idx].suspended = false;
            self.events.push(Event::Readmit {
                round: self.round_index,
                flow: self.flows[idx].id,
            });
            self.active_list.push_back(idx);
        }
    }

    fn slot_of(&self, time: &Seconds) -> Option<u64> {
        let (_, slot_len) = self.gating.as_ref()?;
        Some((time / slot_len).floor().to_integer() as u64)
    }

    /// Whether the flow's class owns the current slot. Always true when
    /// gating is off.
    pub fn interclass_gate(&self, id: FlowId) -> Result<bool, EngineError> {
        let idx = self.index_of(id)?;
        Ok(self.gate_idx(idx))
    }

    fn gate_idx(&self, idx: usize) -> bool {
        match (&self.gating, self.slot_of(&self.clock)) {
            (Some((reading, _)), Some(slot)) => {
                slot_eligible(*reading, self.flows[idx].qos.class_index_k, slot)
            }
            _ => true,
        }
    }

    fn attempt_cost(&self, size: u32, success: bool) -> Seconds {
        if !success && self.zero_cost_failures {
            return Rational::zero();
        }
        Rational::new(i128::from(size) * 8, i128::from(self.output_rate_bps))
    }

    pub(super) fn discard(&mut self, idx: usize, bytes: u64, reason: &'static str) {
        if bytes == 0 {
            return;
        }
        self.ledger.discarded_total += bytes;
        self.events.push(Event::Discard {
            round: self.round_index,
            flow: self.flows[idx].id,
            bytes,
            reason,
        });
    }

    /// One visit of `id`: adds quantum and banked bonus to the deficit
    /// counter, then sends head-of-line packets while they fit.
    ///
    /// A failed attempt leaves the packet queued and is not charged to the
    /// counter. Under the ODRR family it also suspends the flow; ODRR sets
    /// the counter to `credit - pf * attempted`. A flow whose queue empties
    /// gives up its leftover (donated under EDC/SDC, discarded otherwise).
    pub fn serve_flow(&mut self, id: FlowId) -> Result<ServiceOutcome, EngineError> {
        let idx = self.index_of(id)?;
        if self.flows[idx].queue.is_empty() {
            return Err(if self.flows[idx].completed {
                EngineError::ServeOnCompletedFlow(id)
            } else {
                EngineError::ServeOnIdleFlow(id)
            });
        }
        self.active_list.retain(|&i| i != idx);
        self.error_queue.retain(|&i| i != idx);
        self.in_service = Some(idx);

        let round = self.round_index;
        let start_time = self.clock;
        let dc_start = self.flows[idx].dc;
        let bonus = std::mem::take(&mut self.flows[idx].bonus);
        let quantum = self.flows[idx].quantum;
        let credit = dc_start + u64::from(quantum) + bonus;
        self.ledger.quantum_injected += u64::from(quantum);
        self.flows[idx].dc = credit;

        let mut attempted: u64 = 0;
        let mut served: u64 = 0;
        let mut packets_served = 0u32;
        let mut failed = false;

        while let Some(head) = self.flows[idx].queue.front() {
            if u64::from(head.size) > self.flows[idx].dc {
                break;
            }
            assert!(
                head.size <= self.max_packet,
                "dequeued packet larger than M"
            );
            let mut packet = self.flows[idx].queue.pop_front().expect("head exists");
            let record = self.channel.attempt_transmit(&mut packet, round);
            let cost = self.attempt_cost(packet.size, record.success);
            self.clock += cost;
            self.ledger.busy_time += cost;
            self.ledger.attempts.push(record.clone());
            attempted += u64::from(packet.size);
            if record.success {
                served += u64::from(packet.size);
                packets_served += 1;
                self.flows[idx].dc -= u64::from(packet.size);
                self.ledger.packets[packet.id.0 as usize].completion_time = Some(self.clock);
                self.admit_arrivals();
            } else {
                self.flows[idx].queue.push_front(packet);
                self.admit_arrivals();
                failed = true;
                break;
            }
        }

        // the serve record goes ahead of the suspend/complete/donate events it causes
        let mark = self.events.len();
        let mut suspended = false;
        if failed && self.policy.suspends_on_error() {
            suspended = true;
            let mut pf_text = None;
            if self.policy == SchedulerPolicy::Odrr {
                let pf = penalty_factor(attempted, served).expect("at least one attempt was made");
                let charge = pf * attempted;
                debug_assert!(charge.is_integer());
                self.flows[idx].dc = credit - charge.to_integer();
                pf_text = Some(format!("{}/{}", pf.numer(), pf.denom()));
            }
            self.events.push(Event::Suspend {
                round,
                flow: id,
                bytes_attempted: attempted,
                bytes_served: served,
                penalty_factor: pf_text,
                dc: self.flows[idx].dc,
            });
        }

        let emptied = self.flows[idx].queue.is_empty();
        let mut leftover = 0;
        let mut donated = 0;
        let discarded_before = self.ledger.discarded_total;
        if emptied {
            leftover = self.flows[idx].dc;
            self.events.push(Event::Complete {
                round,
                flow: id,
                leftover,
            });
            let donations = match self.policy {
                SchedulerPolicy::OdrrEdc => self.redistribute_equal(id, leftover)?,
                SchedulerPolicy::OdrrSdc => self.redistribute_single(id, leftover)?,
                SchedulerPolicy::Drr | SchedulerPolicy::Odrr => {
                    self.discard(idx, leftover, "reset");
                    self.flows[idx].dc = 0;
                    Vec::new()
                }
            };
            donated = donations.iter().map(|d| d.bytes).sum();
        } else {
            let cap = u64::from(self.max_packet);
            if self.flows[idx].dc > cap {
                let excess = self.flows[idx].dc - cap;
                self.flows[idx].dc = cap;
                self.discard(idx, excess, "clamp");
            }
        }
        let discarded = self.ledger.discarded_total - discarded_before;

        let flow = &mut self.flows[idx];
        flow.completed = emptied && flow.pending_arrivals == 0;
        flow.suspended = suspended;
        let dc_after = flow.dc;
        self.in_service = None;
        if suspended {
            self.error_queue.push_back(idx);
        } else if !emptied {
            self.active_list.push_back(idx);
        }

        self.events.insert(
            mark,
            Event::Serve {
                round,
                flow: id,
                dc_before: dc_start,
                quantum,
                bonus,
                credit,
                bytes_attempted: attempted,
                bytes_served: served,
                packets_served,
                dc_after,
                start: format_rational(&start_time),
                end: format_rational(&self.clock),
            },
        );
        self.ledger.services.push(ServiceRecord {
            round,
            flow: id,
            quantum,
            bonus,
            dc_start,
            dc_end: dc_after,
            bytes_attempted: attempted,
            bytes_served: served,
            packets_served,
            suspended,
            emptied,
            leftover,
            donated,
            discarded,
            start_time,
            end_time: self.clock,
        });

        Ok(ServiceOutcome {
            flow: id,
            bytes_served: served,
            packets_served,
            suspended,
            emptied,
            completed: self.flows[idx].completed,
            dc_after,
        })
    }

    /// Next time something becomes pending: an arrival, or (under gating) a
    /// slot in which some listed flow is eligible.
    fn next_wakeup(&self) -> Option<Seconds> {
        let arrival = self.pending.front().map(|p| p.arrival_time);
        let gated = match (&self.gating, self.slot_of(&self.clock)) {
            (Some((reading, slot_len)), Some(slot)) if !self.active_list.is_empty() => self
                .active_list
                .iter()
                .map(|&i| next_eligible_slot(*reading, self.flows[i].qos.class_index_k, slot + 1))
                .min()
                .map(|s| Rational::from_integer(i128::from(s)) * slot_len),
            _ => None,
        };
        match (arrival, gated) {
            (Some(a), Some(g)) => Some(a.min(g)),
            (a, g) => a.or(g),
        }
    }

    fn idle_until(&mut self, to: Seconds) {
        if to > self.clock {
            self.events.push(Event::Idle {
                from: format_rational(&self.clock),
                to: format_rational(&to),
            });
            self.clock = to;
        }
    }

    /// One pass over the active list. With nothing backlogged the clock
    /// jumps to the next arrival and no round is counted.
    pub fn run_round(&mut self) -> RoundReport {
        self.admit_arrivals();
        self.readmit_if_drained();
        if self.active_list.is_empty() {
            if let Some(t) = self.next_wakeup() {
                self.idle_until(t);
                self.admit_arrivals();
            }
            return RoundReport {
                round: None,
                bytes_by_flow: BTreeMap::new(),
                clock: self.clock,
            };
        }

        let round = self.round_index;
        let start_time = self.clock;
        let mut bytes_by_flow = BTreeMap::new();
        let mut served_any = false;
        let visits = self.active_list.len();
        for _ in 0..visits {
            let Some(&idx) = self.active_list.front() else {
                break;
            };
            if !self.gate_idx(idx) {
                self.active_list.rotate_left(1);
                self.events.push(Event::Skip {
                    round,
                    flow: self.flows[idx].id,
                });
                continue;
            }
            let id = self.flows[idx].id;
            let outcome = self.serve_flow(id).expect("listed flows are backlogged");
            served_any = true;
            *bytes_by_flow.entry(id).or_insert(0) += outcome.bytes_served;
        }
        if !served_any {
            if let Some(t) = self.next_wakeup() {
                self.idle_until(t);
            }
        }
        self.readmit_if_drained();

        let bytes: u64 = bytes_by_flow.values().sum();
        self.ledger.rounds.push(RoundRecord {
            round,
            start_time,
            end_time: self.clock,
            bytes_served: bytes,
        });
        self.round_index += 1;
        RoundReport {
            round: Some(round),
            bytes_by_flow,
            clock: self.clock,
        }
    }

    fn backlogged(&self) -> bool {
        !self.active_list.is_empty() || !self.error_queue.is_empty()
    }

    /// Runs rounds until the clock reaches `t_end` or nothing is left to do.
    pub fn run_until(&mut self, t_end: &Seconds) -> FinalReport {
        let mut rounds = 0;
        let mut truncated = false;
        loop {
            if self.clock >= *t_end {
                break;
            }
            self.admit_arrivals();
            if !self.backlogged() {
                match self.pending.front() {
                    Some(p) if p.arrival_time < *t_end => {}
                    _ => break,
                }
            }
            if rounds >= self.max_rounds {
                truncated = true;
                break;
            }
            if self.run_round().round.is_some() {
                rounds += 1;
            }
        }
        self.ledger.run_duration = self.clock;

        let mut bytes_by_flow = BTreeMap::new();
        for f in &self.flows {
            bytes_by_flow.insert(f.id, self.ledger.bytes_served(f.id));
        }
        FinalReport {
            rounds,
            clock: self.clock,
            bytes_by_flow,
            all_completed: self.flows.iter().all(|f| f.completed),
            truncated,
        }
    }

    /// Outstanding bonus credits across all flows.
    pub fn banked_bonus(&self) -> u64 {
        self.flows.iter().map(|f| f.bonus).sum()
    }

    /// Sum of all deficit counters.
    pub fn total_deficit(&self) -> u64 {
        self.flows.iter().map(|f| f.dc).sum()
    }

    /// Seconds needed to send `bytes` at the output rate.
    pub fn transmission_time(&self, bytes: u64) -> Seconds {
        let (n, d) = (i128::from(bytes) * 8, i128::from(self.output_rate_bps));
        let g = n.gcd(&d).max(1);
        Rational::new(n / g, d / g)
    }
}

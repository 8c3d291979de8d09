//! Balance-credit donation on flow completion.

use serde::Serialize;

use super::engine::Engine;
use super::{EngineError, Event, SchedulerPolicy};
use crate::model::FlowId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Donation {
    pub to: FlowId,
    pub bytes: u64,
}

/// Splits `leftover` over `recipients` slots as evenly as possible. Slots
/// are in priority order; the first `leftover % n` of them get one extra
/// byte.
pub fn equal_split(leftover: u64, recipients: usize) -> Vec<u64> {
    if recipients == 0 {
        return Vec::new();
    }
    let n = recipients as u64;
    let base = leftover / n;
    let extra = (leftover % n) as usize;
    (0..recipients)
        .map(|i| base + u64::from(i < extra))
        .collect()
}

impl Engine {
    /// Donates `leftover` equally to every uncompleted flow with strictly
    /// higher priority than `donor`. Nothing eligible: the bytes are
    /// discarded. The donor's deficit counter is zeroed either way.
    pub fn redistribute_equal(
        &mut self,
        donor: FlowId,
        leftover: u64,
    ) -> Result<Vec<Donation>, EngineError> {
        if self.policy != SchedulerPolicy::OdrrEdc {
            return Err(EngineError::WrongPolicy {
                op: "redistribute_equal",
                policy: self.policy,
            });
        }
        let donor_idx = self.donor_index(donor)?;
        let donor_prio = self.flows[donor_idx].priority;
        let recipients = self.uncompleted_by_priority(donor_idx, |p| p < donor_prio);
        let shares = equal_split(leftover, recipients.len());
        let donations = recipients
            .into_iter()
            .zip(shares)
            .filter(|(_, b)| *b > 0)
            .collect::<Vec<_>>();
        Ok(self.apply_donations(donor_idx, leftover, donations))
    }

    /// Donates all of `leftover` to the highest-priority uncompleted flow,
    /// whatever its priority relative to the donor.
    pub fn redistribute_single(
        &mut self,
        donor: FlowId,
        leftover: u64,
    ) -> Result<Vec<Donation>, EngineError> {
        if self.policy != SchedulerPolicy::OdrrSdc {
            return Err(EngineError::WrongPolicy {
                op: "redistribute_single",
                policy: self.policy,
            });
        }
        let donor_idx = self.donor_index(donor)?;
        let donations = self
            .uncompleted_by_priority(donor_idx, |_| true)
            .first()
            .filter(|_| leftover > 0)
            .map(|&idx| vec![(idx, leftover)])
            .unwrap_or_default();
        Ok(self.apply_donations(donor_idx, leftover, donations))
    }

    fn donor_index(&self, donor: FlowId) -> Result<usize, EngineError> {
        let idx = self.index_of(donor)?;
        if !self.flows[idx].queue.is_empty() {
            return Err(EngineError::NotCompleted(donor));
        }
        Ok(idx)
    }

    /// Backlogged flows other than `exclude`, highest priority first.
    fn uncompleted_by_priority(&self, exclude: usize, keep: impl Fn(u32) -> bool) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.flows.len())
            .filter(|&i| i != exclude)
            .filter(|&i| !self.flows[i].queue.is_empty() && keep(self.flows[i].priority))
            .collect();
        out.sort_by_key(|&i| self.flows[i].priority);
        out
    }

    fn apply_donations(
        &mut self,
        donor_idx: usize,
        leftover: u64,
        donations: Vec<(usize, u64)>,
    ) -> Vec<Donation> {
        let round = self.round_index;
        let from = self.flows[donor_idx].id;
        let mut given = 0;
        let mut out = Vec::with_capacity(donations.len());
        for (idx, bytes) in donations {
            let flow = &mut self.flows[idx];
            flow.bonus += bytes;
            given += bytes;
            out.push(Donation { to: flow.id, bytes });
            self.events.push(Event::Donate {
                round,
                from,
                to: flow.id,
                bytes,
            });
        }
        debug_assert!(given <= leftover);
        self.discard(donor_idx, leftover - given, "no_recipient");
        self.flows[donor_idx].dc = 0;
        self.ledger.donated_total += given;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_split_examples() {
        assert_eq!(equal_split(50, 2), vec![25, 25]);
        assert_eq!(equal_split(650, 1), vec![650]);
        assert_eq!(equal_split(5, 3), vec![2, 2, 1]);
        assert!(equal_split(5, 0).is_empty());
        assert_eq!(equal_split(0, 3), vec![0, 0, 0]);
    }

    /// Oracle: among all assignments of the remainder bytes that preserve
    /// the total, keep shares within one byte and never favour a lower
    /// priority slot. That set has exactly one member.
    fn brute_force_split(leftover: u64, n: usize) -> Vec<Vec<u64>> {
        let mut found = Vec::new();
        let base = leftover / n as u64;
        for mask in 0u32..(1 << n) {
            let shares: Vec<u64> = (0..n)
                .map(|i| base + u64::from(mask >> i & 1 == 1))
                .collect();
            if shares.iter().sum::<u64>() != leftover {
                continue;
            }
            if shares.windows(2).all(|w| w[0] >= w[1]) {
                found.push(shares);
            }
        }
        found
    }

    #[test]
    fn equal_split_matches_enumeration() {
        for n in 1..=6 {
            for leftover in 0..40 {
                let oracle = brute_force_split(leftover, n);
                assert_eq!(oracle.len(), 1);
                assert_eq!(
                    equal_split(leftover, n),
                    oracle[0],
                    "leftover {leftover} n {n}"
                );
            }
        }
    }
}

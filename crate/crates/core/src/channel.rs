//! Per-attempt transmission outcomes and the ODRR penalty factor.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{FlowId, Outcome, Packet, PacketId};
use crate::rational::Rational;

const CHANNEL_STREAM: u64 = 1;
/// One ChaCha block per attempt; leaves room for rejection resampling.
const WORDS_PER_ATTEMPT: u128 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Perfect,
    #[default]
    Scripted,
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttemptRecord {
    pub packet_id: PacketId,
    pub flow_id: FlowId,
    pub round_index: u64,
    pub success: bool,
    pub bytes_attempted: u32,
    pub bytes_counted_successful: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ChannelError {
    #[error("ZeroAttempt: penalty factor undefined for zero attempted bytes")]
    ZeroAttempt,
    #[error("successful bytes {successful} exceed attempted bytes {attempted}")]
    ExceedsAttempted { attempted: u64, successful: u64 },
}

/// Decides the fate of every transmission attempt. Owns its own random
/// stream, so traffic generation never perturbs channel outcomes.
///
/// A Bernoulli draw is read at a stream position fixed by the packet id
/// and attempt number, so a given packet meets the same errors under
/// every policy run on the same seed.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    kind: ChannelKind,
    p_err: BTreeMap<FlowId, Rational>,
    rng: ChaCha8Rng,
}

impl ChannelModel {
    pub fn new(kind: ChannelKind, p_err: BTreeMap<FlowId, Rational>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(CHANNEL_STREAM);
        Self { kind, p_err, rng }
    }

    pub fn perfect() -> Self {
        Self::new(ChannelKind::Perfect, BTreeMap::new(), 0)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// Decides one attempt. Never touches the flow queue; a scripted packet
    /// has one script entry consumed.
    pub fn attempt_transmit(&mut self, packet: &mut Packet, round_index: u64) -> AttemptRecord {
        let outcome = match self.kind {
            ChannelKind::Perfect => Outcome::Success,
            ChannelKind::Scripted => packet.next_scripted_outcome(),
            ChannelKind::Bernoulli => {
                let p = self
                    .p_err
                    .get(&packet.flow_id)
                    .copied()
                    .unwrap_or_else(|| Rational::from_integer(0));
                let attempt = packet.count_attempt() as u128 & 0xffff_ffff;
                self.rng
                    .set_word_pos(((u128::from(packet.id.0) << 32) | attempt) * WORDS_PER_ATTEMPT);
                let draw = self.rng.random_range(0..*p.denom());
                if draw < *p.numer() {
                    Outcome::Failure
                } else {
                    Outcome::Success
                }
            }
        };
        let success = outcome == Outcome::Success;
        AttemptRecord {
            packet_id: packet.id,
            flow_id: packet.flow_id,
            round_index,
            success,
            bytes_attempted: packet.size,
            bytes_counted_successful: if success { packet.size } else { 0 },
        }
    }
}

/// Bytes served over bytes that would have been served this round.
pub fn penalty_factor(
    attempted_bytes: u64,
    successful_bytes: u64,
) -> Result<Ratio<u64>, ChannelError> {
    if attempted_bytes == 0 {
        return Err(ChannelError::ZeroAttempt);
    }
    if successful_bytes > attempted_bytes {
        return Err(ChannelError::ExceedsAttempted {
            attempted: attempted_bytes,
            successful: successful_bytes,
        });
    }
    Ok(Ratio::new(successful_bytes, attempted_bytes))
}

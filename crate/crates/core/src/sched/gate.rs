use super::GatingReading;

/// Whether class `k` may transmit in slot `slot`.
pub fn slot_eligible(reading: GatingReading, class_index: u32, slot: u64) -> bool {
    match reading {
        GatingReading::Literal => true,
        GatingReading::Alternating => {
            let block = block_len(class_index);
            (slot / block).is_multiple_of(2)
        }
    }
}

/// First slot at or after `slot` in which class `k` is eligible.
pub(crate) fn next_eligible_slot(reading: GatingReading, class_index: u32, slot: u64) -> u64 {
    if slot_eligible(reading, class_index, slot) {
        return slot;
    }
    let block = block_len(class_index);
    (slot / block + 1) * block
}

fn block_len(class_index: u32) -> u64 {
    1u64.checked_shl(class_index.min(62)).unwrap_or(1 << 62)
}

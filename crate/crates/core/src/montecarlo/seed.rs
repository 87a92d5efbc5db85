//! Labelled sub-seeds: every experiment derives its stream key from the single
//! master seed and a fixed label, so runs of different subcommands with the
//! same seed never share Brownian paths by accident.
//!
//! `derive_seed(master, label) = splitmix64(master ⊕ splitmix64(fnv1a64(label)))`.

pub const CONVERGE: &str = "converge";
pub const MOMENTS: &str = "moments";
pub const COMPARE: &str = "compare";
pub const TIMECHANGE_ORIGINAL: &str = "timechange/original";
pub const TIMECHANGE_CHANGED: &str = "timechange/changed";

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, label: &str) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a64(label.as_bytes())))
}

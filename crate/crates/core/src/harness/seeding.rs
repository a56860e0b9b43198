use serde::{Deserialize, Serialize};

/// What a derived seed is used for. Each purpose gets its own disjoint family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Weights,
    Graph,
    /// Master seed of one point of a parameter grid.
    GridPoint,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Self::Weights => 0,
            Self::Graph => 1,
            Self::GridPoint => 2,
        }
    }
}

/// The 64-bit finalizer of splitmix64. A bijection on `u64`.
pub fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for `(replica, purpose)` under `master`:
/// `fmix64(fmix64(master) ^ fmix64(replica << 2 | purpose))`.
///
/// Every step is a bijection, so for a fixed master the map is injective over
/// all `replica < 2^62` and purposes.
pub fn derive_substream(master: u64, replica: u64, purpose: Purpose) -> u64 {
    let word = (replica << 2) | purpose.code();
    fmix64(fmix64(master) ^ fmix64(word))
}

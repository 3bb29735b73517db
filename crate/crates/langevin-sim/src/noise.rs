use rand_chacha::ChaCha12Rng;
use rand::SeedableRng;

/// Channel identifiers for the independent generator substreams of a run.
#[derive(Debug, Clone, Copy)]
pub enum NoiseChannel {
    /// Thermal force acting on mode `j`.
    Thermal(usize),
    /// In-loop probe readout noise.
    InloopSensor,
    /// Out-of-loop probe readout noise.
    OutloopSensor,
}

impl NoiseChannel {
    fn index(self) -> u64 {
        match self {
            NoiseChannel::InloopSensor => 0,
            NoiseChannel::OutloopSensor => 1,
            NoiseChannel::Thermal(j) => 2 + j as u64,
        }
    }
}

/// SplitMix64 finalizer: a well-mixed 64-bit permutation used to derive
/// independent substream seeds from (master seed, channel index).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-channel generator: the same (seed, channel) always
/// yields the same stream, and distinct channels are decorrelated.
pub fn channel_rng(master_seed: u64, channel: NoiseChannel) -> ChaCha12Rng {
    let mixed = splitmix64(master_seed ^ splitmix64(channel.index()));
    ChaCha12Rng::seed_from_u64(mixed)
}

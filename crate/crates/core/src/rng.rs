//! Counter-based random substreams.
//!
//! Every replication of every simulation draws from its own ChaCha8 stream,
//! keyed by `(master seed, stream tag)` and indexed by the replication
//! counter. Draws therefore never depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

/// Stream tags keep unrelated simulations from sharing randomness.
pub mod tags {
    pub const NULL_FINITE: u64 = 0x6e75_6c6c_6669_6e00;
    pub const NULL_ASYMPTOTIC: u64 = 0x6e75_6c6c_6173_7900;
    pub const J_SAMPLER: u64 = 0x6a5f_7361_6d70_6c00;
    pub const CLASSICAL_NULL: u64 = 0x636c_6173_7369_6300;
    pub const MC_DATA: u64 = 0x6d63_5f64_6174_6100;
    pub const MC_AUX: u64 = 0x6d63_5f61_7578_0000;
    pub const MC_CALIBRATION: u64 = 0x6d63_5f63_616c_6900;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of identifiers into a single stream tag.
pub fn stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x2545_f491_4f6c_dd1d, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// RNG for replication `index` of stream `stream` under `master`.
pub fn substream(master: u64, stream: u64, index: u64) -> SimRng {
    let mut key = [0u8; 32];
    let words = [
        splitmix64(master),
        splitmix64(stream ^ 0xa076_1d64_78bd_642f),
        splitmix64(master.rotate_left(17) ^ stream),
        splitmix64(master ^ stream.rotate_left(29) ^ 0xe703_7ed1_a0b4_28db),
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

pub fn fill_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Zero-start Gaussian random walk `y_t = y_{t-1} + e_t`, `y_0 = 0`.
pub fn random_walk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|_| {
            acc += rng.sample::<f64, _>(StandardNormal);
            acc
        })
        .collect()
}

//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, key, index)`: the seed and key words are
//! mixed into a ChaCha key, and the sample index selects the ChaCha stream.
//! Draw `i` of sample `s` therefore never depends on how many other samples
//! were generated, or on which thread generated them.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, key: &[u64], index: u64) -> ChaCha20Rng {
    let mut state = seed;
    for &k in key {
        let mut s = state ^ k.wrapping_mul(0xD1B5_4A32_D192_ED03);
        state = splitmix64(&mut s);
    }
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha20Rng::from_seed(bytes);
    rng.set_stream(index);
    rng
}

/// `count` independent standard normals from stream `(seed, key, index)`.
pub fn standard_normals(seed: u64, key: &[u64], index: u64, count: usize) -> Vec<f64> {
    let mut rng = stream(seed, key, index);
    (0..count).map(|_| StandardNormal.sample(&mut rng)).collect()
}

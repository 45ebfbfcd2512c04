//! Seeded random streams.
//!
//! Every stochastic component draws from its own ChaCha8 stream keyed by
//! (master seed, trial index, component tag), so results do not depend on the
//! order in which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over a byte string.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derive a 64-bit seed for a named component of a trial.
pub fn derive_seed(master: u64, trial: u64, component: &str) -> u64 {
    let mut st = master ^ fnv1a(component.as_bytes()).rotate_left(17);
    let a = splitmix64(&mut st);
    st ^= trial.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let b = splitmix64(&mut st);
    a ^ b.rotate_left(32)
}

/// Independent generator for `(master, trial, component)`.
pub fn substream(master: u64, trial: u64, component: &str) -> StreamRng {
    let mut st = derive_seed(master, trial, component);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut st).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

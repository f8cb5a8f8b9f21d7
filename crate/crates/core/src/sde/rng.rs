//! Keyed, counter-based noise streams.
//!
//! Each path owns two ChaCha8 streams (non-tilde and tilde noise). The key is
//! the 64-bit base seed plus a purpose tag, and the stream id is derived from
//! the path index, so a path's noise does not depend on how many other paths
//! exist or on the order in which they are simulated.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Separates the independent uses of one base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Dynamics = 0,
    Initial = 1,
    Probe = 2,
}

/// Gaussian displacement with mean 0 and variance `dt`.
pub fn wiener_increment<R: Rng + ?Sized>(rng: &mut R, dt: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * dt.sqrt()
}

fn keyed(base_seed: u64, purpose: Purpose, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    key[8] = purpose as u8;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// The pair of independent standard-normal streams of one path.
#[derive(Debug, Clone)]
pub struct PathNoise {
    non_tilde: ChaCha8Rng,
    tilde: ChaCha8Rng,
}

impl PathNoise {
    /// Streams for path `path_index`; distinct `(base_seed, purpose,
    /// path_index)` give distinct streams for `path_index < 2^63`.
    pub fn new(base_seed: u64, purpose: Purpose, path_index: u64) -> Self {
        PathNoise {
            non_tilde: keyed(base_seed, purpose, 2 * path_index),
            tilde: keyed(base_seed, purpose, 2 * path_index + 1),
        }
    }

    /// Standard normal draws `(ξ, ξ̃)`, one from each stream.
    #[inline]
    pub fn normals(&mut self) -> (f64, f64) {
        (
            self.non_tilde.sample(StandardNormal),
            self.tilde.sample(StandardNormal),
        )
    }

    /// Wiener increments `(dW, dW̃)` over `dt`.
    #[inline]
    pub fn increments(&mut self, dt: f64) -> (f64, f64) {
        let (a, b) = self.normals();
        let s = dt.sqrt();
        (a * s, b * s)
    }

    pub fn non_tilde(&mut self) -> &mut ChaCha8Rng {
        &mut self.non_tilde
    }

    pub fn tilde(&mut self) -> &mut ChaCha8Rng {
        &mut self.tilde
    }
}

//! Deterministic random streams.
//!
//! Every Monte Carlo trial draws from its own [`RngStream`], identified by the
//! pair `(master_seed, stream_id)`. The stream id selects an independent
//! ChaCha keystream, so results never depend on how trials are scheduled
//! across workers.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Roles used to separate streams that belong to the same trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamRole {
    Data = 1,
    Noise = 2,
    Channel = 3,
    Interleaver = 4,
}

/// Builds a stream id from a role and up to two indices (experiment point,
/// trial block). Uses the splitmix64 finalizer so nearby tuples land far
/// apart in id space.
pub fn stream_id(role: StreamRole, point: u64, block: u64) -> u64 {
    let mut z = (role as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(point.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(block.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn spawn(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        RngStream {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Circularly symmetric complex Gaussian with total variance `variance`
    /// (each component carries `variance / 2`).
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let sigma = (variance * 0.5).sqrt();
        let re: f64 = self.inner.sample(StandardNormal);
        let im: f64 = self.inner.sample(StandardNormal);
        Complex64::new(sigma * re, sigma * im)
    }

    pub fn bit(&mut self) -> u8 {
        (self.inner.next_u32() & 1) as u8
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let word = self.inner.next_u64();
            let take = (n - out.len()).min(64);
            out.extend((0..take).map(|k| ((word >> k) & 1) as u8));
        }
        out
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Convenience wrapper matching the `spawn_stream(master_seed, stream_id)`
/// operation.
pub fn spawn_stream(master_seed: u64, stream_id: u64) -> RngStream {
    RngStream::spawn(master_seed, stream_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_id_same_sequence() {
        let mut a = spawn_stream(42, 0);
        let mut b = spawn_stream(42, 0);
        let xa: Vec<u64> = (0..100).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..100).map(|_| b.next_u64()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn different_id_different_sequence() {
        let mut a = spawn_stream(42, 0);
        let mut b = spawn_stream(42, 1);
        let xa: Vec<u64> = (0..100).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..100).map(|_| b.next_u64()).collect();
        assert_ne!(xa, xb);
        let equal = xa.iter().zip(&xb).filter(|(x, y)| x == y).count();
        assert_eq!(equal, 0);
    }

    #[test]
    fn unit_complex_gaussian_variance() {
        let mut s = spawn_stream(42, 7);
        let n = 100_000;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        for _ in 0..n {
            let z = s.complex_gaussian(1.0);
            sum += z;
            sq += z.norm_sqr();
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean.norm_sqr();
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn components_split_variance_evenly() {
        let mut s = spawn_stream(3, 11);
        let n = 200_000;
        let total = 0.4;
        let (mut re2, mut im2, mut cross) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = s.complex_gaussian(total);
            re2 += z.re * z.re;
            im2 += z.im * z.im;
            cross += z.re * z.im;
        }
        let (re2, im2, cross) = (re2 / n as f64, im2 / n as f64, cross / n as f64);
        assert!((re2 / (total / 2.0) - 1.0).abs() < 0.02, "re var {re2}");
        assert!((im2 / (total / 2.0) - 1.0).abs() < 0.02, "im var {im2}");
        assert!(cross.abs() < 0.01 * total);
    }

    #[test]
    fn stream_ids_separate_roles() {
        let a = stream_id(StreamRole::Data, 0, 0);
        let b = stream_id(StreamRole::Noise, 0, 0);
        let c = stream_id(StreamRole::Data, 0, 1);
        let d = stream_id(StreamRole::Data, 1, 0);
        assert!(a != b && a != c && a != d && c != d);
    }

    #[test]
    fn bits_are_binary_and_balanced() {
        let mut s = spawn_stream(1, 2);
        let b = s.bits(100_001);
        assert_eq!(b.len(), 100_001);
        assert!(b.iter().all(|&x| x <= 1));
        let ones: usize = b.iter().map(|&x| x as usize).sum();
        assert!((ones as f64 / b.len() as f64 - 0.5).abs() < 0.01);
    }
}

use rand::seq::SliceRandom;

use crate::rng::RngStream;

/// Uniform random bit interleaver. Off by default in the simulation chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn random(len: usize, rng: &mut RngStream) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(rng);
        Interleaver { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `out[i] = input[perm[i]]`.
    pub fn interleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.perm.len());
        self.perm.iter().map(|&p| input[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.perm.len());
        let mut out = vec![T::default(); input.len()];
        for (&p, &v) in self.perm.iter().zip(input) {
            out[p] = v;
        }
        out
    }
}

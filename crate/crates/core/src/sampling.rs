//! Deterministic low-discrepancy points for sampled checks.

use alloc::vec::Vec;

/// Halton sequence in `dims` dimensions, starting after `skip` points.
pub(crate) struct Halton {
    bases: Vec<u64>,
    index: u64,
}

impl Halton {
    pub(crate) fn new(dims: usize, skip: u64) -> Self {
        Self {
            bases: first_primes(dims),
            index: skip + 1,
        }
    }

    /// Next point in the unit cube.
    pub(crate) fn next_into(&mut self, out: &mut [f64]) {
        for (o, &b) in out.iter_mut().zip(&self.bases) {
            *o = radical_inverse(self.index, b);
        }
        self.index += 1;
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

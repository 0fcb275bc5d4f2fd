//! Compensated (Kahan) summation.
//!
//! Heavy-tailed summands mix magnitudes badly: a single near-singular draw can
//! be many orders of magnitude above the bulk, and naive accumulation then
//! drops the small terms that determine the distribution body.

use std::ops::AddAssign;

/// Kahan compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    err: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.err;
        let t = self.sum + y;
        self.err = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl AddAssign<f64> for KahanSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl From<KahanSum> for f64 {
    fn from(k: KahanSum) -> f64 {
        k.value()
    }
}

/// Sum a slice with compensation.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

//! Small f64 vector helpers. Squared norms are per-dimension throughout the
//! crate, so distortions read directly as MSE per dimension.

use alloc::vec::Vec;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Per-dimension squared norm: `dot(v, v) / len`.
pub fn nsq(v: &[f64]) -> f64 {
    dot(v, v) / v.len() as f64
}

/// Per-dimension squared distance.
pub fn dist_nsq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s / a.len() as f64
}

/// Plain Euclidean squared distance.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    dist_nsq(a, b) * a.len() as f64
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add_scaled_into(acc: &mut [f64], v: &[f64], s: f64) {
    for i in 0..acc.len() {
        acc[i] += v[i] * s;
    }
}

/// Neumaier compensated summation; keeps alternating series honest.
#[derive(Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

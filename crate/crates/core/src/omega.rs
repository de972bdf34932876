//! Coefficient sequences in the interaction representation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::fourier::{weighted_seq_norm, NormParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `e^{itn|n|}`, the linear Benjamin–Ono phase at frequency `n`.
#[inline]
pub fn linear_phase(t: f64, n: i64) -> Complex64 {
    let (s, c) = (t * (n * n.abs()) as f64).sin_cos();
    Complex64::new(c, s)
}

/// A complex sequence on `[-n_max, n_max]` stamped with a time `t`.
///
/// Used both for `ω(t, ·)` and for the output of every term evaluator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaState {
    n_max: usize,
    t: f64,
    seq: Vec<Complex64>,
}

impl OmegaState {
    pub fn new(n_max: usize, t: f64, seq: Vec<Complex64>) -> Result<Self> {
        if seq.len() != 2 * n_max + 1 {
            return input(format!(
                "expected {} entries for n_max = {n_max}, got {}",
                2 * n_max + 1,
                seq.len()
            ));
        }
        Ok(Self { n_max, t, seq })
    }

    pub fn zeros(n_max: usize, t: f64) -> Self {
        Self {
            n_max,
            t,
            seq: vec![ZERO; 2 * n_max + 1],
        }
    }

    pub fn from_fn(n_max: usize, t: f64, f: impl FnMut(i64) -> Complex64) -> Self {
        let n = n_max as i64;
        Self {
            n_max,
            t,
            seq: (-n..=n).map(f).collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn seq(&self) -> &[Complex64] {
        &self.seq
    }

    pub fn into_seq(self) -> Vec<Complex64> {
        self.seq
    }

    /// `ω(n)`, zero outside the band.
    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        let m = self.n_max as i64;
        if n.abs() > m {
            ZERO
        } else {
            self.seq[(n + m) as usize]
        }
    }

    /// `ω*(n) = conj(ω(-n))`.
    #[inline]
    pub fn star(&self, n: i64) -> Complex64 {
        self.get(-n).conj()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m = self.n_max as i64;
        (-m..=m).zip(self.seq.iter().copied())
    }

    pub fn map(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        Self {
            n_max: self.n_max,
            t: self.t,
            seq: self.iter().map(|(n, c)| f(n, c)).collect(),
        }
    }

    /// Keeps only `n > 0`.
    pub fn positive_part(&self) -> Self {
        self.map(|n, c| if n > 0 { c } else { ZERO })
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.map(|_, c| c * z)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + h·other`.
    pub fn axpy(&self, h: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b * h)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.n_max != other.n_max {
            return input(format!(
                "band mismatch: n_max {} vs {}",
                self.n_max, other.n_max
            ));
        }
        Ok(Self {
            n_max: self.n_max,
            t: self.t,
            seq: self
                .seq
                .iter()
                .zip(&other.seq)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Truncates or zero-pads to a different band.
    pub fn with_band(&self, n_max: usize) -> Self {
        Self::from_fn(n_max, self.t, |n| self.get(n))
    }

    pub fn norm(&self, params: NormParams) -> f64 {
        weighted_seq_norm(self.iter(), params)
    }

    /// `ℓ²_s` norm.
    pub fn l2s(&self, s: f64) -> f64 {
        self.norm(NormParams::l2(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.seq.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let m = self.n_max.max(other.n_max) as i64;
        (-m..=m)
            .map(|n| (self.get(n) - other.get(n)).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.seq.iter().all(|c| *c == ZERO)
    }
}

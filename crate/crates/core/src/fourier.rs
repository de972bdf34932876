//! Truncated Fourier representation of 2π-periodic functions.
//!
//! Coefficients follow `f̂(n) = (1/2π) ∫₀^{2π} f(x) e^{-inx} dx`, so that
//! `f(x) = Σ f̂(n) e^{inx}`. Every norm in this crate is taken on the
//! coefficient side, which makes the constant function `1` have norm one in
//! every `H^s`.
//!
//! Coefficients are stored densely, indexed by `n + n_max`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Result};

/// Relative tolerance used to detect Hermitian symmetry and a vanishing mean.
pub const FLAG_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `⟨n⟩ = (1 + n²)^{1/2}`.
#[inline]
pub fn bracket(n: i64) -> f64 {
    let n = n as f64;
    (1.0 + n * n).sqrt()
}

/// Frequency band `[-n_max, n_max]` together with the physical sample count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    n_max: usize,
    grid_points: usize,
}

impl GridSpec {
    pub fn new(n_max: usize, grid_points: usize) -> Result<Self> {
        if n_max == 0 {
            return input("n_max must be positive");
        }
        if grid_points < 2 * n_max + 1 {
            return input(format!(
                "grid_points = {grid_points} cannot resolve the band |n| <= {n_max} (need >= {})",
                2 * n_max + 1
            ));
        }
        Ok(Self { n_max, grid_points })
    }

    /// A grid with `4·n_max` points, enough for quadratic products to be
    /// alias-free inside the band.
    pub fn dealiased(n_max: usize) -> Result<Self> {
        Self::new(n_max, 4 * n_max)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    /// Number of stored frequencies, `2·n_max + 1`.
    pub fn band_len(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn frequencies(&self) -> RangeInclusive<i64> {
        let n = self.n_max as i64;
        -n..=n
    }

    /// Sample locations `x_j = 2πj / grid_points`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> {
        let g = self.grid_points;
        (0..g).map(move |j| 2.0 * PI * j as f64 / g as f64)
    }

    /// Same oversampling policy on a different band.
    pub fn with_band(&self, n_max: usize) -> Self {
        let grid_points = self.grid_points.max(2 * n_max + 1);
        Self { n_max, grid_points }
    }

    #[inline]
    pub fn index(&self, n: i64) -> Option<usize> {
        let n_max = self.n_max as i64;
        (n.abs() <= n_max).then(|| (n + n_max) as usize)
    }
}

/// Complex Fourier coefficients of a periodic function on a truncated band.
///
/// The `is_real` and `is_mean_zero` flags are detected on construction with
/// relative tolerance [`FLAG_TOL`]; once detected they hold exactly (the
/// coefficients are symmetrised or the mean is zeroed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    is_real: bool,
    is_mean_zero: bool,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.band_len() {
            return input(format!(
                "expected {} coefficients for n_max = {}, got {}",
                grid.band_len(),
                grid.n_max(),
                coeffs.len()
            ));
        }
        Ok(Self::from_vec(grid, coeffs))
    }

    pub(crate) fn from_vec(grid: GridSpec, mut coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.band_len());
        let (is_real, is_mean_zero) = detect_flags(&mut coeffs, grid.n_max());
        Self {
            grid,
            coeffs,
            is_real,
            is_mean_zero,
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_vec(grid, vec![ZERO; grid.band_len()])
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let coeffs = grid.frequencies().map(&mut f).collect();
        Self::from_vec(grid, coeffs)
    }

    /// Field with the listed modes set; every mode must lie inside the band.
    pub fn from_modes(grid: GridSpec, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![ZERO; grid.band_len()];
        for &(n, c) in modes {
            match grid.index(n) {
                Some(i) => coeffs[i] += c,
                None => return input(format!("mode {n} lies outside |n| <= {}", grid.n_max())),
            }
        }
        Ok(Self::from_vec(grid, coeffs))
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn n_max(&self) -> usize {
        self.grid.n_max()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at frequency `n`; zero outside the band.
    #[inline]
    pub fn coeff(&self, n: i64) -> Complex64 {
        self.grid.index(n).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn is_mean_zero(&self) -> bool {
        self.is_mean_zero
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.grid.frequencies().zip(self.coeffs.iter().copied())
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self.iter().map(|(n, c)| f(n, c)).collect();
        Self::from_vec(self.grid, coeffs)
    }

    /// Coefficients of the complex conjugate function: `n ↦ conj(f̂(-n))`.
    pub fn conj(&self) -> Self {
        self.map_coeffs(|n, _| self.coeff(-n).conj())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.map_coeffs(|_, c| c * z)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.n_max() != other.n_max() {
            return input(format!(
                "band mismatch: n_max {} vs {}",
                self.n_max(),
                other.n_max()
            ));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_vec(self.grid, coeffs))
    }

    /// Truncates or zero-pads to another band.
    pub fn with_band(&self, n_max: usize) -> Self {
        let grid = self.grid.with_band(n_max);
        Self::from_fn(grid, |n| self.coeff(n))
    }

    /// Same coefficients on a grid with a different sample count.
    pub fn with_grid(&self, grid: GridSpec) -> Self {
        Self::from_fn(grid, |n| self.coeff(n))
    }

    /// Largest `|n|` carrying a nonzero coefficient (0 for the zero field).
    pub fn band_limit(&self) -> usize {
        self.iter()
            .filter(|(_, c)| *c != ZERO)
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `sup_n |f̂(n) - ĝ(n)|` over the union of both bands.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.n_max().max(other.n_max()) as i64;
        (-n..=n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

fn detect_flags(coeffs: &mut [Complex64], n_max: usize) -> (bool, bool) {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tol = FLAG_TOL * scale;
    let mid = n_max;
    let mean_zero = coeffs[mid].norm() <= tol;
    let real = (0..=n_max).all(|k| (coeffs[mid + k] - coeffs[mid - k].conj()).norm() <= tol);
    if real {
        for k in 1..=n_max {
            let avg = (coeffs[mid + k] + coeffs[mid - k].conj()) * 0.5;
            coeffs[mid + k] = avg;
            coeffs[mid - k] = avg.conj();
        }
        coeffs[mid].im = 0.0;
    }
    if mean_zero {
        coeffs[mid] = ZERO;
    }
    (real, mean_zero)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Discrete Fourier coefficients of samples taken at `x_j = 2πj/grid_points`,
/// i.e. `(1/G) Σ_j f(x_j) e^{-inx_j}` for `|n| ≤ n_max`.
pub fn analyze(samples: &[Complex64], grid: GridSpec) -> Result<SpectralField> {
    let g = grid.grid_points();
    if samples.len() != g {
        return input(format!(
            "expected {g} samples, got {}",
            samples.len()
        ));
    }
    let mut buf = samples.to_vec();
    forward_plan(g).process(&mut buf);
    let inv = 1.0 / g as f64;
    let coeffs = grid
        .frequencies()
        .map(|n| buf[n.rem_euclid(g as i64) as usize] * inv)
        .collect();
    Ok(SpectralField::from_vec(grid, coeffs))
}

/// Physical samples `Σ f̂(n) e^{inx_j}` on the field's own grid.
pub fn synthesize(field: &SpectralField) -> Vec<Complex64> {
    synthesize_on(field, field.grid().grid_points())
}

/// Physical samples on an arbitrary grid with `points ≥ 2·n_max + 1` nodes.
pub fn synthesize_on(field: &SpectralField, points: usize) -> Vec<Complex64> {
    assert!(
        points > 2 * field.n_max(),
        "synthesis grid of {points} points cannot hold band {}",
        field.n_max()
    );
    let mut buf = vec![ZERO; points];
    for (n, c) in field.iter() {
        buf[n.rem_euclid(points as i64) as usize] = c;
    }
    inverse_plan(points).process(&mut buf);
    buf
}

/// Samples of a field evaluated on `points` nodes, re-analysed on `grid`.
pub(crate) fn analyze_band(samples: &[Complex64], n_max: usize) -> SpectralField {
    let g = samples.len();
    let grid = GridSpec::new(n_max, g).expect("sample count resolves the requested band");
    analyze(samples, grid).expect("length matches by construction")
}

/// Smallest even grid on which products of the two bands are alias-free up to `out_band`.
pub(crate) fn product_grid(a_band: usize, b_band: usize, out_band: usize) -> usize {
    let g = a_band + b_band + out_band + 1;
    g + (g % 2)
}

/// Coefficients of the pointwise product `f·g` restricted to `|n| ≤ out_band`,
/// computed on a zero-padded physical grid (no aliasing inside the output band).
pub fn dealiased_product(f: &SpectralField, g: &SpectralField, out_band: usize) -> SpectralField {
    let points = product_grid(f.n_max(), g.n_max(), out_band)
        .max(2 * out_band + 1)
        .max(f.grid().grid_points());
    let fs = synthesize_on(f, points);
    let gs = synthesize_on(g, points);
    let prod: Vec<Complex64> = fs.iter().zip(&gs).map(|(a, b)| a * b).collect();
    let out = analyze_band(&prod, out_band);
    let grid = f.grid().with_band(out_band);
    out.with_grid(grid)
}

/// Direct convolution `Σ_k f̂(k) ĝ(n-k)` for `|n| ≤ out_band`. Exact zeros stay zeros.
pub fn exact_convolution(f: &SpectralField, g: &SpectralField, out_band: usize) -> SpectralField {
    let grid = f.grid().with_band(out_band);
    SpectralField::from_fn(grid, |n| {
        f.iter()
            .filter(|(_, a)| *a != ZERO)
            .map(|(k, a)| a * g.coeff(n - k))
            .sum()
    })
}

/// Indicator masks on the frequency side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    /// `P₊`: `n > 0`.
    Plus,
    /// `P₋`: `n < 0`.
    Minus,
    /// `P_c`: `n = 0`.
    Mean,
    /// `P_{≠c}`: `n ≠ 0`.
    NonMean,
    /// `P_{≤N}`: `|n| ≤ N`.
    LowPass(usize),
    /// `P_{>N}`: `|n| > N`.
    HighPass(usize),
}

impl Projection {
    #[inline]
    pub fn keeps(self, n: i64) -> bool {
        match self {
            Projection::Plus => n > 0,
            Projection::Minus => n < 0,
            Projection::Mean => n == 0,
            Projection::NonMean => n != 0,
            Projection::LowPass(cut) => n.unsigned_abs() as usize <= cut,
            Projection::HighPass(cut) => n.unsigned_abs() as usize > cut,
        }
    }
}

pub fn apply_projection(field: &SpectralField, kind: Projection) -> SpectralField {
    field.map_coeffs(|n, c| if kind.keeps(n) { c } else { ZERO })
}

/// Fourier multipliers used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplier {
    /// Periodic Hilbert transform, symbol `-i·sgn(n)`.
    Hilbert,
    /// `∂x`, symbol `in`.
    Dx,
    /// `∂x⁻¹` on mean-zero functions, symbol `1/(in)` for `n ≠ 0`.
    DxInv,
    /// `∂̂ = P_c + ∂x`.
    DHat,
    /// `∂̂⁻¹ = P_c + ∂x⁻¹ P_{≠c}`.
    DHatInv,
}

/// `c · (i·k)` without forming a complex product.
#[inline]
fn times_i(c: Complex64, k: f64) -> Complex64 {
    Complex64::new(-c.im * k, c.re * k)
}

/// `c / (i·k)` without forming a complex quotient.
#[inline]
fn over_i(c: Complex64, k: f64) -> Complex64 {
    Complex64::new(c.im / k, -c.re / k)
}

impl Multiplier {
    /// Applies the symbol at frequency `n` to a coefficient.
    #[inline]
    pub fn apply_at(self, n: i64, c: Complex64) -> Complex64 {
        let k = n as f64;
        match self {
            Multiplier::Hilbert => match n.signum() {
                1 => times_i(c, -1.0),
                -1 => times_i(c, 1.0),
                _ => ZERO,
            },
            Multiplier::Dx => times_i(c, k),
            Multiplier::DxInv => {
                if n == 0 {
                    ZERO
                } else {
                    over_i(c, k)
                }
            }
            Multiplier::DHat => {
                if n == 0 {
                    c
                } else {
                    times_i(c, k)
                }
            }
            Multiplier::DHatInv => {
                if n == 0 {
                    c
                } else {
                    over_i(c, k)
                }
            }
        }
    }
}

pub fn apply_multiplier(field: &SpectralField, kind: Multiplier) -> Result<SpectralField> {
    if kind == Multiplier::DxInv && !field.is_mean_zero() {
        return domain(format!(
            "∂x⁻¹ needs a mean-zero field, but f̂(0) = {}",
            field.coeff(0)
        ));
    }
    Ok(field.map_coeffs(|n, c| kind.apply_at(n, c)))
}

/// Exponent of a weighted sequence norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeqExponent {
    One,
    Two,
    Infinity,
}

/// Parameters of `ℓ^p_s`: `‖ω‖ = ‖⟨·⟩^s ω‖_{ℓ^p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub p: SeqExponent,
}

impl NormParams {
    pub fn l2(s: f64) -> Self {
        Self {
            s,
            p: SeqExponent::Two,
        }
    }
}

/// `ℓ^p_s` norm of a frequency-indexed sequence.
pub fn weighted_seq_norm(seq: impl IntoIterator<Item = (i64, Complex64)>, params: NormParams) -> f64 {
    let weighted = seq
        .into_iter()
        .map(|(n, c)| bracket(n).powf(params.s) * c.norm());
    match params.p {
        SeqExponent::One => weighted.sum(),
        SeqExponent::Two => weighted.map(|x| x * x).sum::<f64>().sqrt(),
        SeqExponent::Infinity => weighted.fold(0.0, f64::max),
    }
}

/// `H^s` norm on the coefficient side: `(Σ ⟨n⟩^{2s} |f̂(n)|²)^{1/2}`.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    weighted_seq_norm(field.iter(), NormParams::l2(s))
}

/// `(∫₀^{2π} |f|² dx)^{1/2}` approximated by the rectangle rule on the samples.
pub fn physical_l2(samples: &[Complex64]) -> f64 {
    let h = 2.0 * PI / samples.len() as f64;
    (h * samples.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// `∫₀^{2π} |f| dx` by the rectangle rule.
pub fn physical_l1(samples: &[Complex64]) -> f64 {
    let h = 2.0 * PI / samples.len() as f64;
    h * samples.iter().map(|z| z.norm()).sum::<f64>()
}

//! The gauge transform `u ↦ (V, v, ω)` and its inverse.
//!
//! `V = e^{-i∂x⁻¹u}` is computed pointwise on an oversampled grid and then
//! truncated to the band of `u`; `v = i∂̂V` and `ω(n) = e^{itn|n|} v̂(n)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Result};
use crate::fourier::{
    analyze, apply_multiplier, apply_projection, dealiased_product, exact_convolution,
    physical_l1, sobolev_norm, synthesize, synthesize_on, GridSpec, Multiplier, Projection,
    SpectralField,
};
use crate::omega::{linear_phase, OmegaState};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mean removed from an initial datum.
///
/// A solution `u` with mean `c` corresponds to the mean-zero solution
/// `w(t, x) = u(t, x - 2tc) - c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub mean: f64,
}

impl ShiftRecord {
    pub fn describe(&self) -> String {
        format!("x -> x - 2t*({}), u -> u - ({})", self.mean, self.mean)
    }

    /// Undoes the normalisation: `u(t, x) = w(t, x + 2tc) + c`.
    pub fn restore(&self, w: &SpectralField, t: f64) -> SpectralField {
        let a = 2.0 * t * self.mean;
        let c = self.mean;
        w.map_coeffs(|n, z| {
            let (s, co) = (n as f64 * a).sin_cos();
            let shifted = z * Complex64::new(co, s);
            if n == 0 {
                shifted + c
            } else {
                shifted
            }
        })
    }
}

/// Splits a real datum into its mean and a mean-zero remainder.
pub fn remove_mean(u0: &SpectralField) -> (SpectralField, ShiftRecord) {
    let mean = u0.coeff(0).re;
    let w = apply_projection(u0, Projection::NonMean);
    (w, ShiftRecord { mean })
}

/// Gauge factor `V` and gauged unknown `v = i∂̂V`, both on the band of `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugePair {
    pub big_v: SpectralField,
    pub v: SpectralField,
}

/// Accuracy indicators of a forward gauge computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeDiagnostics {
    /// `ℓ²` mass of the oversampled spectrum of `V` outside the stored band.
    pub tail_mass: f64,
    /// `max_x ||V(x)| - 1|` on the oversampled grid, before truncation.
    pub unimodularity_defect: f64,
    /// The same after band truncation.
    pub truncated_unimodularity_defect: f64,
    pub oversampled_points: usize,
}

fn require_real_mean_zero(u: &SpectralField, what: &str) -> Result<()> {
    if !u.is_real() {
        return domain(format!("{what} needs a real-valued field"));
    }
    if !u.is_mean_zero() {
        return domain(format!(
            "{what} needs a mean-zero field, but the mean is {}",
            u.coeff(0)
        ));
    }
    Ok(())
}

/// Forward gauge transform of a real mean-zero field.
pub fn gauge_forward(u: &SpectralField) -> Result<GaugePair> {
    gauge_forward_with_diagnostics(u).map(|(p, _)| p)
}

pub fn gauge_forward_with_diagnostics(u: &SpectralField) -> Result<(GaugePair, GaugeDiagnostics)> {
    require_real_mean_zero(u, "the gauge transform")?;
    let grid = u.grid();
    let n_max = grid.n_max();
    let points = 4 * grid.band_len();
    let theta = synthesize_on(&apply_multiplier(u, Multiplier::DxInv)?, points);
    let samples: Vec<Complex64> = theta
        .iter()
        .map(|th| {
            let (s, c) = th.re.sin_cos();
            Complex64::new(c, -s)
        })
        .collect();
    let unimodularity_defect = samples
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);

    let half = (points - 1) / 2;
    let full = analyze(&samples, GridSpec::new(half, points)?)?;
    let tail_mass = full
        .iter()
        .filter(|(n, _)| n.unsigned_abs() as usize > n_max)
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let big_v = SpectralField::from_fn(grid, |n| full.coeff(n));
    let truncated_unimodularity_defect = synthesize_on(&big_v, points)
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let v = apply_multiplier(&big_v, Multiplier::DHat)?.scale(I);
    Ok((
        GaugePair { big_v, v },
        GaugeDiagnostics {
            tail_mass,
            unimodularity_defect,
            truncated_unimodularity_defect,
            oversampled_points: points,
        },
    ))
}

/// Rebuilds the pair from `v` alone via `V = -i∂̂⁻¹v`.
pub fn gauge_from_v(v: &SpectralField) -> GaugePair {
    let big_v = apply_multiplier(v, Multiplier::DHatInv)
        .expect("∂̂⁻¹ is defined on every field")
        .scale(-I);
    GaugePair {
        big_v,
        v: v.clone(),
    }
}

/// `u = V̄ P_{≠c} v`, truncated to the band of `v`.
///
/// The product is real for an exact pair; the result is projected onto
/// Hermitian-symmetric coefficients to remove roundoff.
pub fn gauge_inverse(pair: &GaugePair) -> SpectralField {
    let n_max = pair.v.n_max();
    let prod = dealiased_product(
        &pair.big_v.conj(),
        &apply_projection(&pair.v, Projection::NonMean),
        n_max,
    );
    let grid = pair.v.grid();
    SpectralField::from_fn(grid, |n| (prod.coeff(n) + prod.coeff(-n).conj()) * 0.5)
}

/// `i P_c V + V·u`, the defining expression of `v` before simplification.
pub fn v_definition_form(u: &SpectralField, big_v: &SpectralField) -> SpectralField {
    let prod = dealiased_product(big_v, u, u.n_max());
    prod.map_coeffs(|n, c| if n == 0 { c + I * big_v.coeff(0) } else { c })
}

/// `ω(n) = e^{itn|n|} v̂(n)`.
pub fn omega_of(v: &SpectralField, t: f64) -> OmegaState {
    OmegaState::from_fn(v.n_max(), t, |n| linear_phase(t, n) * v.coeff(n))
}

/// `v̂(n) = e^{-itn|n|} ω(n)` on a de-aliased grid.
pub fn v_of(omega: &OmegaState) -> SpectralField {
    let grid = GridSpec::dealiased(omega.n_max()).expect("band is positive");
    v_of_on(omega, grid)
}

pub fn v_of_on(omega: &OmegaState, grid: GridSpec) -> SpectralField {
    let t = omega.t();
    SpectralField::from_fn(grid, |n| linear_phase(-t, n) * omega.get(n))
}

/// `G_N = P_{≤N}∂x(u²) - ∂x((P_{≤N}u)²)` on the band `2·n_max`.
///
/// Products are direct convolutions, so `G_N` is exactly zero when `2·band(u) ≤ N`.
pub fn commutator_gn(u: &SpectralField, n_cut: usize) -> SpectralField {
    let out = 2 * u.n_max();
    let u_n = apply_projection(u, Projection::LowPass(n_cut));
    let full = exact_convolution(u, u, out);
    let low = exact_convolution(&u_n, &u_n, out);
    full.map_coeffs(|n, c| {
        let k = Complex64::new(0.0, n as f64);
        let kept = if n.unsigned_abs() as usize <= n_cut { c } else { Complex64::new(0.0, 0.0) };
        k * kept - k * low.coeff(n)
    })
}

/// `‖∂x⁻¹ P_{≠c} G_N‖_{L¹}`.
pub fn commutator_l1(u: &SpectralField, n_cut: usize) -> f64 {
    let g = apply_projection(&commutator_gn(u, n_cut), Projection::NonMean);
    let prim = apply_multiplier(&g, Multiplier::DxInv).expect("projected field has zero mean");
    physical_l1(&synthesize(&prim))
}

/// Quotients of the exponential bounds:
/// `‖e^{-i∂x⁻¹f}‖_{H^{s+1}} / (1+‖f‖²_{H^s})` and
/// `‖e^{-i∂x⁻¹f} - e^{-i∂x⁻¹g}‖_{H^{s+1}} / ((1+‖f‖²+‖g‖²)‖f-g‖_{H^s})`.
///
/// The second is `None` when `f = g`.
pub fn lemma_exp_ratios(f: &SpectralField, g: &SpectralField, s: f64) -> Result<(f64, Option<f64>)> {
    if !(0.0..=1.0).contains(&s) {
        return input(format!("exponential bounds need 0 <= s <= 1, got {s}"));
    }
    if f.n_max() != g.n_max() {
        return input("f and g must share a band");
    }
    let vf = gauge_forward(f)?.big_v;
    let vg = gauge_forward(g)?.big_v;
    let nf = sobolev_norm(f, s);
    let ng = sobolev_norm(g, s);
    let first = sobolev_norm(&vf, s + 1.0) / (1.0 + nf * nf);
    let diff = sobolev_norm(&f.sub(g)?, s);
    let second = (diff > 0.0).then(|| {
        let dv = vf.sub(&vg).expect("same band");
        sobolev_norm(&dv, s + 1.0) / ((1.0 + nf * nf + ng * ng) * diff)
    });
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cos_field(n_max: usize, k: i64, amp: f64) -> SpectralField {
        let g = GridSpec::dealiased(n_max).unwrap();
        SpectralField::from_modes(g, &[(k, c(amp / 2.0, 0.0)), (-k, c(amp / 2.0, 0.0))]).unwrap()
    }

    #[test]
    fn remove_mean_examples() {
        let g = GridSpec::dealiased(4).unwrap();
        let u0 = SpectralField::from_modes(g, &[(0, c(1.0, 0.0)), (1, c(0.5, 0.0)), (-1, c(0.5, 0.0))])
            .unwrap();
        let (w, rec) = remove_mean(&u0);
        assert_eq!(rec.mean, 1.0);
        assert_eq!(w, cos_field(4, 1, 1.0));
        let (z, rec) = remove_mean(&SpectralField::from_modes(g, &[(0, c(3.0, 0.0))]).unwrap());
        assert_eq!(rec.mean, 3.0);
        assert_eq!(z.max_abs(), 0.0);
        assert!(z.is_mean_zero());
    }

    #[test]
    fn zero_datum() {
        let g = GridSpec::dealiased(4).unwrap();
        let pair = gauge_forward(&SpectralField::zeros(g)).unwrap();
        assert!((pair.big_v.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((pair.v.coeff(0) - c(0.0, 1.0)).norm() < 1e-15);
        assert!(pair.v.iter().filter(|(n, _)| *n != 0).all(|(_, z)| z.norm() < 1e-15));
        assert_eq!(gauge_inverse(&pair).max_abs(), 0.0);
    }

    #[test]
    fn non_mean_zero_rejected() {
        let g = GridSpec::dealiased(4).unwrap();
        let u = SpectralField::from_modes(g, &[(0, c(1.0, 0.0))]).unwrap();
        assert!(matches!(gauge_forward(&u), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn omega_phase_example() {
        let g = GridSpec::dealiased(4).unwrap();
        let v = SpectralField::from_modes(g, &[(2, c(1.0, 0.0))]).unwrap();
        let w = omega_of(&v, 0.5);
        assert!((w.get(2) - c(2f64.cos(), 2f64.sin())).norm() < 1e-15);
        assert_eq!(omega_of(&v, 0.0).get(2), c(1.0, 0.0));
    }

    #[test]
    fn commutator_vanishes_for_low_band() {
        let u = cos_field(8, 2, 1.0);
        assert_eq!(commutator_gn(&u, 4).max_abs(), 0.0);
        assert!(commutator_gn(&u, 3).max_abs() > 0.0);
    }

    #[test]
    fn exp_ratio_at_zero() {
        let g = GridSpec::dealiased(4).unwrap();
        let z = SpectralField::zeros(g);
        let (a, b) = lemma_exp_ratios(&z, &z, 0.3).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        assert_eq!(b, None);
        assert!(lemma_exp_ratios(&z, &z, 1.5).is_err());
    }
}

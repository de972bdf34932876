#![allow(dead_code)]

pub mod reference;

use bo_core::fourier::{GridSpec, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real mean-zero field on `n_max` with random coefficients up to `band`, scaled to `amp` in ℓ².
pub fn random_field(n_max: usize, band: usize, amp: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<Complex64> = (0..=band)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let grid = GridSpec::dealiased(n_max).unwrap();
    let raw = SpectralField::from_fn(grid, |n| {
        let k = n.unsigned_abs() as usize;
        if n == 0 || k > band {
            c(0.0, 0.0)
        } else if n > 0 {
            pos[k]
        } else {
            pos[k].conj()
        }
    });
    let norm: f64 = raw.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
    raw.scale(c(amp / norm, 0.0))
}

/// Relative ℓ² distance `‖a - b‖ / max(‖b‖, floor)`.
pub fn rel(a: &[Complex64], b: &[Complex64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let s: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    d / s.max(floor)
}

/// `(term, relative ℓ² mismatch, reference norm)` for every term against the brute-force reference.
pub fn reference_mismatch(
    u: &SpectralField,
    omega: &bo_core::omega::OmegaState,
    cfg: &bo_core::nfr::NfrConfig,
) -> Vec<(String, f64, f64)> {
    let set = bo_core::nfr::all_terms(u, omega, cfg).unwrap();
    let r = reference::Ref {
        b: cfg.n_max as i64,
        t: omega.t(),
        m: cfg.m,
        k: cfg.k.k(),
    };
    let b = cfg.n_max as i64;
    let useq: Vec<Complex64> = (-b..=b).map(|n| u.coeff(n)).collect();
    let expected = r.all(&useq, &omega.seq().to_vec());
    bo_core::nfr::TermId::ALL
        .iter()
        .map(|&id| {
            let (_, want) = expected.iter().find(|(name, _)| *name == id.name()).unwrap();
            let norm = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (id.name().to_string(), rel(set.get(id).seq(), want, 1e-300), norm)
        })
        .collect()
}

//! Initial data recipes.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::FlowState;
use crate::error::{NscError, Result};
use crate::field::{forward_plane, sample_plane, PlaneField, SpectralVectorField};
use crate::grid::Grid;
use crate::norms::{self, Norm};
use crate::oseen;
use crate::spectral;

/// How a nonzero circulation is represented on the periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackgroundMode {
    /// Vortex carried in closed form; the grid holds the remainder.
    #[default]
    Analytic,
    /// Vortex vorticity minus its mean inverted on the box; circulation is lost.
    DropMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Random3d {
    /// Coefficient amplitude `∝ (1 + |ξ|²)^{slope/2}`.
    pub slope: f64,
    /// Target L² norm.
    pub amplitude: f64,
    pub seed: u64,
    /// Keep modes with `band.0 ≤ |ξ| ≤ band.1`.
    pub band: (f64, f64),
    pub zero_vertical_mean: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    Zero,
    Oseen { alpha: f64 },
    OseenPlus2dPerturbation { alpha: f64, amplitude: f64, seed: u64 },
    Random3d(Random3d),
    File(PathBuf),
    /// `base` plus a random overlay.
    WithNoise(Box<Recipe>, Random3d),
}

/// Zero-mean perturbation vorticity: three antipodal pairs of Gaussian blobs
/// (even in `x`, so the first moment vanishes), zero total weight.
fn blob_vorticity(grid: &Grid, seed: u64) -> PlaneField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blobs = Vec::with_capacity(3);
    for _ in 0..3 {
        let r: f64 = rng.random_range(0.5..2.0);
        let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let w: f64 = rng.random_range(0.8..1.5);
        let m: f64 = rng.sample(StandardNormal);
        blobs.push(([r * th.cos(), r * th.sin()], w, m));
    }
    let mean = blobs.iter().map(|b| b.2).sum::<f64>() / 3.0;
    for b in blobs.iter_mut() {
        b.2 -= mean;
    }
    let l = grid.box_len;
    let s = sample_plane(grid, |x1, x2| {
        oseen::periodize(l, x1, x2, |a, b| {
            blobs
                .iter()
                .map(|(c, w, m)| {
                    let k = m / (2.0 * std::f64::consts::PI * w * w);
                    let g = |dx: f64, dy: f64| (-(dx * dx + dy * dy) / (2.0 * w * w)).exp();
                    k * (g(a - c[0], b - c[1]) + g(a + c[0], b + c[1]))
                })
                .sum()
        })
    });
    let mut w = forward_plane(grid, &s).expect("sample size matches grid");
    w.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    w
}

fn planar_velocity(w: &PlaneField) -> SpectralVectorField {
    let [u1, u2] = spectral::biot_savart_2d(w);
    let z = PlaneField::zeros(*w.grid());
    let mut u = SpectralVectorField::from_planes([&u1, &u2, &z]);
    spectral::dealias_vector(&mut u);
    u
}

fn random_3d(grid: &Grid, spec: &Random3d) -> Result<SpectralVectorField> {
    if !(spec.amplitude >= 0.0) || !(spec.band.0 <= spec.band.1) {
        return Err(NscError::param("random_3d", "need amplitude >= 0 and band.0 <= band.1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut u = SpectralVectorField::zeros(*grid);
    for idx in 0..grid.len() {
        let mut z = [0.0f64; 6];
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let s = grid.symbol_flat(idx);
        let mag = s.mag_sq.sqrt();
        if mag < spec.band.0 || mag > spec.band.1 || idx == 0 {
            continue;
        }
        if spec.zero_vertical_mean && idx % grid.nz == 0 {
            continue;
        }
        let a = (1.0 + s.mag_sq).powf(0.5 * spec.slope);
        for c in 0..3 {
            u.comps[c].coeffs_mut()[idx] = Complex64::new(a * z[2 * c], a * z[2 * c + 1]);
        }
    }
    u.symmetrize();
    spectral::leray_project_in_place(&mut u);
    spectral::dealias_vector(&mut u);
    let n = norms::norm_vector(&u, Norm::L2)?;
    if n == 0.0 {
        if spec.amplitude == 0.0 {
            return Ok(u);
        }
        return Err(NscError::param("random_3d", "band contains no resolved modes"));
    }
    u.scale(spec.amplitude / n);
    Ok(u)
}

fn with_alpha(u: SpectralVectorField, alpha: f64, mode: BackgroundMode) -> FlowState {
    let grid = *u.grid();
    let mut s = FlowState::new(u, 0.0);
    match mode {
        BackgroundMode::Analytic => s.alpha_background = alpha,
        BackgroundMode::DropMean => {
            if alpha != 0.0 {
                let mut w = oseen::periodized_vorticity(&grid, 0.0);
                w.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
                w.scale(alpha);
                s.u.axpy(1.0, &planar_velocity(&w));
            }
        }
    }
    s
}

/// Build the initial flow state (`t = 0` unless read from a file; set
/// `omega` afterwards).
pub fn make_initial_data(grid: &Grid, recipe: &Recipe, mode: BackgroundMode) -> Result<FlowState> {
    match recipe {
        Recipe::Zero => Ok(FlowState::new(SpectralVectorField::zeros(*grid), 0.0)),
        Recipe::Oseen { alpha } => Ok(with_alpha(SpectralVectorField::zeros(*grid), *alpha, mode)),
        Recipe::OseenPlus2dPerturbation {
            alpha,
            amplitude,
            seed,
        } => {
            let mut u = planar_velocity(&blob_vorticity(grid, *seed));
            let p = u.planes();
            let l1 = norms::norm_plane(&spectral::plane_curl(&p[0], &p[1]), Norm::L1)?;
            if l1 > 0.0 {
                u.scale(amplitude / l1);
            }
            let base = with_alpha(SpectralVectorField::zeros(*grid), *alpha, mode);
            let mut s = base;
            s.u.axpy(1.0, &u);
            Ok(s)
        }
        Recipe::Random3d(spec) => Ok(FlowState::new(random_3d(grid, spec)?, 0.0)),
        Recipe::File(path) => {
            let s = FlowState::load(path)?;
            if s.grid() != grid {
                return Err(NscError::GridMismatch);
            }
            let res = s.u.divergence_residual();
            if res > 1e-10 {
                return Err(NscError::DivergenceViolation {
                    residual: res,
                    tolerance: 1e-10,
                });
            }
            // keep the stored time: a carried vortex is evaluated at it
            Ok(s)
        }
        Recipe::WithNoise(base, spec) => {
            let mut s = make_initial_data(grid, base, mode)?;
            s.u.axpy(1.0, &random_3d(grid, spec)?);
            Ok(s)
        }
    }
}

/// Convenience: a z-independent field from a plane vorticity.
pub fn velocity_from_vorticity(w: &PlaneField) -> SpectralVectorField {
    planar_velocity(w)
}

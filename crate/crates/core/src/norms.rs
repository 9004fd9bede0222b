//! Lebesgue and Sobolev norms on the discrete layer.
//!
//! `L2` and `Hs` are evaluated from coefficients (Parseval), `L1`, `L4` and
//! `Linf` from grid samples with quadrature weight `L²/(Nx Ny) · 1/Nz`
//! (`L²/(Nx Ny)` for plane fields). Vector fields use the pointwise Euclidean
//! magnitude. All sums run in a fixed order, independent of thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NscError, Result};
use crate::field::{synthesize, synthesize_plane, PlaneField, SpectralField, SpectralVectorField};
use crate::grid::Grid;
use crate::spectral;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L1,
    L2,
    L4,
    Linf,
    Hs(f64),
}

/// Deterministic sum of `f(i, x_i)`: fixed-size chunks summed in parallel,
/// partial sums combined sequentially.
pub(crate) fn ordered_sum<T: Sync>(xs: &[T], f: impl Fn(usize, &T) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = xs
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let base = ci * CHUNK;
            chunk
                .iter()
                .enumerate()
                .map(|(j, x)| f(base + j, x))
                .sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

fn check_s(which: Norm) -> Result<()> {
    if let Norm::Hs(s) = which {
        if !(s >= 0.0) {
            return Err(NscError::param("s", format!("Sobolev index {s} must be >= 0")));
        }
    }
    Ok(())
}

fn weighted_sq_sum(grid: &Grid, c: &[Complex64], s: f64) -> f64 {
    if s == 0.0 {
        ordered_sum(c, |_, v| v.norm_sqr())
    } else {
        ordered_sum(c, |i, v| {
            (1.0 + grid.symbol_flat(i).mag_sq).powf(s) * v.norm_sqr()
        })
    }
}

fn plane_weighted_sq_sum(grid: &Grid, c: &[Complex64], s: f64) -> f64 {
    if s == 0.0 {
        ordered_sum(c, |_, v| v.norm_sqr())
    } else {
        ordered_sum(c, |i, v| {
            let (k1, k2) = (grid.k1(i / grid.ny), grid.k2(i % grid.ny));
            (1.0 + k1 * k1 + k2 * k2).powf(s) * v.norm_sqr()
        })
    }
}

/// Norm of sampled magnitudes `|f|` with quadrature weight `w`.
pub fn sample_norm(mags: &[f64], weight: f64, p: Norm) -> f64 {
    match p {
        Norm::L1 => weight * ordered_sum(mags, |_, v| v.abs()),
        Norm::L2 => (weight * ordered_sum(mags, |_, v| v * v)).sqrt(),
        Norm::L4 => (weight * ordered_sum(mags, |_, v| (v * v) * (v * v))).powf(0.25),
        Norm::Linf => mags.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Norm::Hs(_) => panic!("Sobolev norms are spectral"),
    }
}

/// Pointwise Euclidean magnitude of several sampled components.
pub fn magnitude(components: &[Vec<f64>]) -> Vec<f64> {
    let n = components[0].len();
    (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| c[i] * c[i])
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

pub fn norm(f: &SpectralField, which: Norm) -> Result<f64> {
    check_s(which)?;
    let g = *f.grid();
    Ok(match which {
        Norm::L2 => g.box_len * weighted_sq_sum(&g, f.coeffs(), 0.0).sqrt(),
        Norm::Hs(s) => g.box_len * weighted_sq_sum(&g, f.coeffs(), s).sqrt(),
        p => {
            let s = synthesize(f);
            sample_norm(&s, g.cell_volume(), p)
        }
    })
}

pub fn norm_vector(u: &SpectralVectorField, which: Norm) -> Result<f64> {
    check_s(which)?;
    let g = *u.grid();
    Ok(match which {
        Norm::L2 | Norm::Hs(_) => {
            let s = if let Norm::Hs(s) = which { s } else { 0.0 };
            let sq: f64 = u
                .comps
                .iter()
                .map(|c| weighted_sq_sum(&g, c.coeffs(), s))
                .sum();
            g.box_len * sq.sqrt()
        }
        p => {
            let comps: Vec<Vec<f64>> = u.comps.iter().map(synthesize).collect();
            sample_norm(&magnitude(&comps), g.cell_volume(), p)
        }
    })
}

pub fn norm_plane(f: &PlaneField, which: Norm) -> Result<f64> {
    check_s(which)?;
    let g = *f.grid();
    Ok(match which {
        Norm::L2 => g.box_len * plane_weighted_sq_sum(&g, f.coeffs(), 0.0).sqrt(),
        Norm::Hs(s) => g.box_len * plane_weighted_sq_sum(&g, f.coeffs(), s).sqrt(),
        p => {
            let s = synthesize_plane(f);
            sample_norm(&s, g.cell_area(), p)
        }
    })
}

pub fn norm_plane_vector(comps: &[&PlaneField], which: Norm) -> Result<f64> {
    check_s(which)?;
    let g = *comps[0].grid();
    Ok(match which {
        Norm::L2 | Norm::Hs(_) => {
            let s = if let Norm::Hs(s) = which { s } else { 0.0 };
            let sq: f64 = comps
                .iter()
                .map(|c| plane_weighted_sq_sum(&g, c.coeffs(), s))
                .sum();
            g.box_len * sq.sqrt()
        }
        p => {
            let samples: Vec<Vec<f64>> = comps.iter().map(|c| synthesize_plane(c)).collect();
            sample_norm(&magnitude(&samples), g.cell_area(), p)
        }
    })
}

/// Physical-space L² norm from samples (for Parseval checks).
pub fn physical_l2(grid: &Grid, samples: &[f64]) -> f64 {
    sample_norm(samples, grid.cell_volume(), Norm::L2)
}

/// `‖∇u‖_{L²}` of a vector field (sum over components).
pub fn grad_l2(u: &SpectralVectorField) -> f64 {
    let g = *u.grid();
    let sq: f64 = u
        .comps
        .iter()
        .map(|c| ordered_sum(c.coeffs(), |i, v| g.symbol_flat(i).deriv_sq() * v.norm_sqr()))
        .sum();
    g.box_len * sq.sqrt()
}

/// `‖Δu‖_{L²}` of a vector field.
pub fn lap_l2(u: &SpectralVectorField) -> f64 {
    let g = *u.grid();
    let sq: f64 = u
        .comps
        .iter()
        .map(|c| {
            ordered_sum(c.coeffs(), |i, v| {
                let m = g.symbol_flat(i).mag_sq;
                m * m * v.norm_sqr()
            })
        })
        .sum();
    g.box_len * sq.sqrt()
}

pub fn plane_grad_l2(p: &PlaneField) -> f64 {
    let g = *p.grid();
    let sq = ordered_sum(p.coeffs(), |i, v| {
        let (k1, k2) = (g.k1_deriv(i / g.ny), g.k2_deriv(i % g.ny));
        (k1 * k1 + k2 * k2) * v.norm_sqr()
    });
    g.box_len * sq.sqrt()
}

pub fn plane_lap_l2(p: &PlaneField) -> f64 {
    let g = *p.grid();
    let sq = ordered_sum(p.coeffs(), |i, v| {
        let (k1, k2) = (g.k1(i / g.ny), g.k2(i % g.ny));
        let m = k1 * k1 + k2 * k2;
        m * m * v.norm_sqr()
    });
    g.box_len * sq.sqrt()
}

/// Norm of the solution space: `‖ũ‖_{H¹} + ‖ū3‖_{H¹} + ‖ω̄3‖_{L¹} + ‖ω̄3‖_{L²}`
/// with `ω̄3` the vertical vorticity of the periodic field itself.
pub fn x_norm(u: &SpectralVectorField) -> f64 {
    let bar = u.planes();
    let w3 = spectral::plane_curl(&bar[0], &bar[1]);
    x_norm_with_vorticity(u, &w3)
}

/// Same as [`x_norm`] with an externally supplied total `ω̄3` (used when part
/// of the vortex is carried in closed form).
pub fn x_norm_with_vorticity(u: &SpectralVectorField, w3bar: &PlaneField) -> f64 {
    let tilde = spectral::fluctuation(u);
    let u3bar = u.comps[2].plane();
    let h = |r: Result<f64>| r.expect("nonnegative index");
    h(norm_vector(&tilde, Norm::Hs(1.0)))
        + h(norm_plane(&u3bar, Norm::Hs(1.0)))
        + h(norm_plane(w3bar, Norm::L1))
        + h(norm_plane(w3bar, Norm::L2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::forward_transform;

    #[test]
    fn constant_has_l2_norm_l() {
        let g = Grid::new(8, 8, 4, 3.5).unwrap();
        let f = forward_transform(&g, &vec![1.0; g.len()]).unwrap();
        assert!((norm(&f, Norm::L2).unwrap() - 3.5).abs() < 1e-14);
        assert!((norm(&f, Norm::L1).unwrap() - 3.5 * 3.5).abs() < 1e-12);
        assert!((norm(&f, Norm::Linf).unwrap() - 1.0).abs() < 1e-14);
        assert!(norm(&f, Norm::Hs(-1.0)).is_err());
    }

    #[test]
    fn hs_of_single_mode() {
        let g = Grid::new(8, 8, 4, 2.0).unwrap();
        let c = Complex64::new(0.3, -0.4);
        let f = SpectralField::single_mode(g, 1, 2, 1, c);
        let k1 = std::f64::consts::PI;
        let k2 = 2.0 * std::f64::consts::PI;
        let kz = 2.0 * std::f64::consts::PI;
        let w = 1.0 + k1 * k1 + k2 * k2 + kz * kz;
        for s in [0.0, 1.0, 2.5] {
            // two conjugate coefficients of modulus 0.5, box area 4
            let expect = w.powf(s / 2.0) * 0.5 * 2f64.sqrt() * 2.0;
            assert!((norm(&f, Norm::Hs(s)).unwrap() - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn ordered_sum_is_sequentially_stable() {
        let xs: Vec<f64> = (0..20000).map(|i| (i as f64).sin()).collect();
        let a = ordered_sum(&xs, |_, v| *v);
        let b = ordered_sum(&xs, |_, v| *v);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

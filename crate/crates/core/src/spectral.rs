//! Spectral calculus: vertical averaging, Leray projection, curl,
//! Biot-Savart inversions, derivatives and dealiasing.
//!
//! Differential symbols use `ξ = i (k1, k2, 2πn)` built from the derivative
//! wavevector of [`Grid::symbol`]; Nyquist components are zero.

use num_complex::Complex64;

use crate::error::{NscError, Result};
use crate::field::{FieldDecomposition, PlaneField, SpectralField, SpectralVectorField};
use crate::grid::{mode_label, Grid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Split into the `n = 0` part and the fluctuation.
pub fn vertical_average(u: &SpectralVectorField) -> FieldDecomposition {
    let g = *u.grid();
    let mut bar = u.clone();
    let mut tilde = u.clone();
    for c in 0..3 {
        let b = bar.comps[c].coeffs_mut();
        let t = tilde.comps[c].coeffs_mut();
        for idx in 0..g.len() {
            if idx % g.nz == 0 {
                t[idx] = Complex64::new(0.0, 0.0);
            } else {
                b[idx] = Complex64::new(0.0, 0.0);
            }
        }
    }
    FieldDecomposition { bar, tilde }
}

/// Fluctuation part only (`u - Qu`).
pub fn fluctuation(u: &SpectralVectorField) -> SpectralVectorField {
    vertical_average(u).tilde
}

#[inline]
fn project_mode(k: [f64; 3], u: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return u;
    }
    let d = (u[0] * k[0] + u[1] * k[1] + u[2] * k[2]) / k2;
    [u[0] - d * k[0], u[1] - d * k[1], u[2] - d * k[2]]
}

#[inline]
fn get3(u: &SpectralVectorField, idx: usize) -> [Complex64; 3] {
    [
        u.comps[0].coeffs()[idx],
        u.comps[1].coeffs()[idx],
        u.comps[2].coeffs()[idx],
    ]
}

#[inline]
fn set3(u: &mut SpectralVectorField, idx: usize, v: [Complex64; 3]) {
    for (c, val) in v.into_iter().enumerate() {
        u.comps[c].coeffs_mut()[idx] = val;
    }
}

/// Leray projection onto divergence-free fields. Modes with a vanishing
/// wavevector (the mean flow) pass through unchanged.
pub fn leray_project(f: &SpectralVectorField) -> SpectralVectorField {
    let mut out = f.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(f: &mut SpectralVectorField) {
    let g = *f.grid();
    for idx in 0..g.len() {
        let k = g.symbol_flat(idx).deriv;
        let v = project_mode(k, get3(f, idx));
        set3(f, idx, v);
    }
}

#[inline]
fn cross(a: [Complex64; 3], b: [Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn xi(k: [f64; 3]) -> [Complex64; 3] {
    [I * k[0], I * k[1], I * k[2]]
}

/// `ω = ξ ∧ u` mode by mode.
pub fn curl(u: &SpectralVectorField) -> SpectralVectorField {
    let g = *u.grid();
    let mut out = SpectralVectorField::zeros(g);
    for idx in 0..g.len() {
        let k = g.symbol_flat(idx).deriv;
        set3(&mut out, idx, cross(xi(k), get3(u, idx)));
    }
    out
}

/// Spectral divergence `ξ · u`.
pub fn divergence(u: &SpectralVectorField) -> SpectralField {
    let g = *u.grid();
    let mut out = SpectralField::zeros(g);
    let c = out.coeffs_mut();
    for (idx, slot) in c.iter_mut().enumerate() {
        let k = g.symbol_flat(idx).deriv;
        let v = get3(u, idx);
        *slot = I * (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]);
    }
    out
}

/// Horizontal velocity `(u1, u2)` with `∂1u2 - ∂2u1 = w3 - mean(w3)` and
/// zero divergence; the mean flow is set to zero.
pub fn biot_savart_2d(w3: &PlaneField) -> [PlaneField; 2] {
    let g = *w3.grid();
    let mut u1 = PlaneField::zeros(g);
    let mut u2 = PlaneField::zeros(g);
    for i1 in 0..g.nx {
        let k1 = g.k1_deriv(i1);
        for i2 in 0..g.ny {
            let k2 = g.k2_deriv(i2);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                continue;
            }
            let idx = w3.index(i1, i2);
            let w = w3.coeffs()[idx];
            u1.coeffs_mut()[idx] = I * k2 * w / kk;
            u2.coeffs_mut()[idx] = -I * k1 * w / kk;
        }
    }
    [u1, u2]
}

/// Vertical velocity of the 2D part from the horizontal vorticity:
/// `Δū3 = ∂2 w1 - ∂1 w2`, zero mean.
pub fn biot_savart_u3bar(w1: &PlaneField, w2: &PlaneField) -> Result<PlaneField> {
    if w1.grid() != w2.grid() {
        return Err(NscError::GridMismatch);
    }
    let g = *w1.grid();
    let mut u3 = PlaneField::zeros(g);
    for i1 in 0..g.nx {
        let k1 = g.k1_deriv(i1);
        for i2 in 0..g.ny {
            let k2 = g.k2_deriv(i2);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                continue;
            }
            let idx = w1.index(i1, i2);
            let rhs = I * k2 * w1.coeffs()[idx] - I * k1 * w2.coeffs()[idx];
            u3.coeffs_mut()[idx] = -rhs / kk;
        }
    }
    Ok(u3)
}

/// Velocity of the fluctuation from its vorticity, `ũ = ξ ∧ ω / |ξ|²`.
pub fn biot_savart_3d(w: &SpectralVectorField) -> Result<SpectralVectorField> {
    let m = w.vertical_mean_magnitude();
    if m > 0.0 {
        return Err(NscError::NonzeroVerticalMean { magnitude: m });
    }
    let g = *w.grid();
    let mut out = SpectralVectorField::zeros(g);
    for idx in 0..g.len() {
        let s = g.symbol_flat(idx);
        let kk = s.deriv_sq();
        if kk == 0.0 {
            continue;
        }
        let v = cross(xi(s.deriv), get3(w, idx));
        set3(&mut out, idx, [v[0] / kk, v[1] / kk, v[2] / kk]);
    }
    Ok(out)
}

/// Gradient `(∂1 f, ∂2 f, ∂3 f)`.
pub fn gradient(f: &SpectralField) -> [SpectralField; 3] {
    let g = *f.grid();
    let mut out = [
        SpectralField::zeros(g),
        SpectralField::zeros(g),
        SpectralField::zeros(g),
    ];
    for idx in 0..g.len() {
        let k = g.symbol_flat(idx).deriv;
        let v = f.coeffs()[idx];
        for d in 0..3 {
            out[d].coeffs_mut()[idx] = I * k[d] * v;
        }
    }
    out
}

/// Horizontal gradient of a plane field.
pub fn plane_gradient(p: &PlaneField) -> [PlaneField; 2] {
    let g = *p.grid();
    let mut a = PlaneField::zeros(g);
    let mut b = PlaneField::zeros(g);
    for i1 in 0..g.nx {
        let k1 = g.k1_deriv(i1);
        for i2 in 0..g.ny {
            let k2 = g.k2_deriv(i2);
            let idx = p.index(i1, i2);
            let v = p.coeffs()[idx];
            a.coeffs_mut()[idx] = I * k1 * v;
            b.coeffs_mut()[idx] = I * k2 * v;
        }
    }
    [a, b]
}

/// `∂1 u2 - ∂2 u1` for plane fields.
pub fn plane_curl(u1: &PlaneField, u2: &PlaneField) -> PlaneField {
    let g = *u1.grid();
    let mut w = PlaneField::zeros(g);
    for i1 in 0..g.nx {
        let k1 = g.k1_deriv(i1);
        for i2 in 0..g.ny {
            let k2 = g.k2_deriv(i2);
            let idx = w.index(i1, i2);
            w.coeffs_mut()[idx] = I * k1 * u2.coeffs()[idx] - I * k2 * u1.coeffs()[idx];
        }
    }
    w
}

/// Laplacian with the magnitude symbol `-(|k|² + 4π²n²)`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= -g.symbol_flat(idx).mag_sq;
    }
    out
}

pub fn plane_laplacian(p: &PlaneField) -> PlaneField {
    let g = *p.grid();
    let mut out = p.clone();
    for i1 in 0..g.nx {
        let k1 = g.k1(i1);
        for i2 in 0..g.ny {
            let k2 = g.k2(i2);
            let idx = out.index(i1, i2);
            out.coeffs_mut()[idx] *= -(k1 * k1 + k2 * k2);
        }
    }
    out
}

/// 2/3-rule truncation.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(f: &mut SpectralField) {
    let g = *f.grid();
    let c = f.coeffs_mut();
    for i1 in 0..g.nx {
        let keep1 = Grid::keeps(mode_label(i1, g.nx), g.nx);
        for i2 in 0..g.ny {
            let keep2 = keep1 && Grid::keeps(mode_label(i2, g.ny), g.ny);
            for i3 in 0..g.nz {
                if !(keep2 && Grid::keeps(mode_label(i3, g.nz), g.nz)) {
                    c[g.index(i1, i2, i3)] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}

pub fn dealias_vector(u: &mut SpectralVectorField) {
    u.comps.iter_mut().for_each(dealias_in_place);
}

pub fn dealias_plane(p: &mut PlaneField) {
    let g = *p.grid();
    for i1 in 0..g.nx {
        let keep1 = Grid::keeps(mode_label(i1, g.nx), g.nx);
        for i2 in 0..g.ny {
            if !(keep1 && Grid::keeps(mode_label(i2, g.ny), g.ny)) {
                let idx = p.index(i1, i2);
                p.coeffs_mut()[idx] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// L² pairing `∫ f·conj(g)` over the box (real part for real fields).
pub fn inner(f: &SpectralVectorField, g: &SpectralVectorField) -> f64 {
    let grid = *f.grid();
    let area = grid.box_len * grid.box_len;
    let mut acc = 0.0;
    for c in 0..3 {
        acc += crate::norms::ordered_sum(f.comps[c].coeffs(), |i, a| {
            (a * g.comps[c].coeffs()[i].conj()).re
        });
    }
    acc * area
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{forward_plane, sample_plane};
    use std::f64::consts::PI;

    fn g() -> Grid {
        Grid::new(8, 8, 4, 2.0 * PI).unwrap()
    }

    #[test]
    fn curl_of_single_mode() {
        // u = (0, 0, sin(x1)) gives ω = (0, -cos(x1), 0).
        let grid = g();
        let mut u = SpectralVectorField::zeros(grid);
        u.comps[2] = SpectralField::single_mode(grid, 1, 0, 0, Complex64::new(0.0, -0.5));
        let w = curl(&u);
        assert!(w.comps[0].is_zero());
        assert!(w.comps[2].is_zero());
        let expect = Complex64::new(-0.5, 0.0);
        assert!((w.comps[1].at(1, 0, 0) - expect).norm() < 1e-15);
        assert!((w.comps[1].at(7, 0, 0) - expect).norm() < 1e-15);
    }

    #[test]
    fn biot_savart_2d_single_mode() {
        // w = cos(x1) → u2 = sin(x1), u1 = 0.
        let grid = g();
        let s = sample_plane(&grid, |x, _| x.cos());
        let w = forward_plane(&grid, &s).unwrap();
        let [u1, u2] = biot_savart_2d(&w);
        assert!(u1.max_abs() < 1e-15);
        let back = crate::field::inverse_plane(&u2).unwrap();
        for (i, v) in back.iter().enumerate() {
            let x = grid.x1_centered(i / grid.ny);
            assert!((v - x.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn biot_savart_3d_rejects_mean() {
        let grid = g();
        let mut w = SpectralVectorField::zeros(grid);
        w.comps[0] = SpectralField::single_mode(grid, 1, 0, 0, Complex64::new(1.0, 0.0));
        assert!(matches!(
            biot_savart_3d(&w),
            Err(NscError::NonzeroVerticalMean { .. })
        ));
    }

    #[test]
    fn dealias_keeps_low_and_kills_nyquist() {
        let grid = Grid::new(12, 12, 6, 1.0).unwrap();
        let low = SpectralField::single_mode(grid, 4, 11, 2, Complex64::new(1.0, 2.0));
        assert_eq!(dealias(&low), low);
        let nyq = SpectralField::single_mode(grid, 6, 0, 0, Complex64::new(1.0, 0.0));
        assert!(dealias(&nyq).is_zero());
        let high = SpectralField::single_mode(grid, 0, 0, 3, Complex64::new(1.0, 0.0));
        assert!(dealias(&high).is_zero());
    }
}

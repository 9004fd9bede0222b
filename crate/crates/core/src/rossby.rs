//! Linear Rossby flow `∂t u + Ω P(e3 ∧ u) = Δu`, diagonalized mode by mode.
//!
//! With `ξ = i(k, 2πn)` the evolution matrix is
//! `M = |ξ|² I + (2πinΩ/|ξ|²) [ξ∧]`, whose eigenvalues on the plane
//! orthogonal to `ξ` are `|ξ|² ± iΩη`, `η = 2πn/|ξ|`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{NscError, Result};
use crate::field::SpectralVectorField;
use crate::grid::Grid;
use crate::spectral;

pub type CMat3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Eigen-structure of the Coriolis symbol at one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoriolisEigenData {
    pub xi_sq: f64,
    pub eta: f64,
    pub wplus: [Complex64; 3],
    pub wminus: [Complex64; 3],
}

/// `M_n^Ω(k)` as a complex matrix.
pub fn coriolis_symbol(k: [f64; 2], n: i64, omega: f64) -> Result<CMat3> {
    let kz = 2.0 * PI * n as f64;
    let xi_sq = k[0] * k[0] + k[1] * k[1] + kz * kz;
    if xi_sq == 0.0 {
        return Err(NscError::ZeroMode);
    }
    let s: CMat3 = [
        [ZERO, -I * kz, I * k[1]],
        [I * kz, ZERO, -I * k[0]],
        [-I * k[1], I * k[0], ZERO],
    ];
    let c = I * (kz * omega / xi_sq);
    let mut m = [[ZERO; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = c * s[a][b];
        }
        m[a][a] += xi_sq;
    }
    Ok(m)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal frame `(e_a, e_b, ĥ)` with `e_a × e_b = ĥ`.
fn frame(h: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut axis = 0;
    for i in 1..3 {
        if h[i].abs() < h[axis].abs() {
            axis = i;
        }
    }
    let mut ea = [0.0; 3];
    ea[axis] = 1.0;
    let d = h[axis];
    for i in 0..3 {
        ea[i] -= d * h[i];
    }
    let nrm = (ea[0] * ea[0] + ea[1] * ea[1] + ea[2] * ea[2]).sqrt();
    for v in ea.iter_mut() {
        *v /= nrm;
    }
    (ea, cross(h, ea))
}

fn eigen_from_vector(kv: [f64; 3]) -> Result<(CoriolisEigenData, [f64; 3])> {
    let xi_sq = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
    if xi_sq == 0.0 {
        return Err(NscError::ZeroMode);
    }
    let mag = xi_sq.sqrt();
    let h = [kv[0] / mag, kv[1] / mag, kv[2] / mag];
    let (ea, eb) = frame(h);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut wp = [ZERO; 3];
    for i in 0..3 {
        wp[i] = Complex64::new(ea[i] * s, eb[i] * s);
    }
    // phase: first nonzero component real and positive
    if let Some(first) = wp.iter().find(|c| c.norm() > 1e-14) {
        let phase = first.conj() / first.norm();
        for c in wp.iter_mut() {
            *c *= phase;
        }
    }
    let wm = [wp[0].conj(), wp[1].conj(), wp[2].conj()];
    Ok((
        CoriolisEigenData {
            xi_sq,
            eta: kv[2] / mag,
            wplus: wp,
            wminus: wm,
        },
        h,
    ))
}

/// Eigenvalues `|ξ|²`, `|ξ|² ± iΩη` and unit eigenvectors `w±` orthogonal
/// to `ξ`; `w-` is the conjugate of `w+`.
pub fn eigen_data(k: [f64; 2], n: i64) -> Result<CoriolisEigenData> {
    eigen_from_vector([k[0], k[1], 2.0 * PI * n as f64]).map(|(e, _)| e)
}

fn diag(v: f64) -> CMat3 {
    let mut m = [[ZERO; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(v, 0.0);
    }
    m
}

/// `exp(-t M)` at one mode: heat factor from `mag_sq`, eigen-phases from the
/// wavevector `kv`.
fn mode_propagator(kv: [f64; 3], mag_sq: f64, t: f64, omega: f64) -> CMat3 {
    let heat = (-t * mag_sq).exp();
    if kv[2] == 0.0 || omega == 0.0 {
        return diag(heat);
    }
    let (e, h) = match eigen_from_vector(kv) {
        Ok(v) => v,
        Err(_) => return diag(heat),
    };
    let theta = t * omega * e.eta;
    let pp = Complex64::from_polar(heat, -theta);
    let pm = Complex64::from_polar(heat, theta);
    let mut m = [[ZERO; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = pp * e.wplus[a] * e.wplus[b].conj()
                + pm * e.wminus[a] * e.wminus[b].conj()
                + heat * h[a] * h[b];
        }
    }
    m
}

/// Cached `exp(-t M)` for every mode of a grid.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    grid: Grid,
    t: f64,
    omega: f64,
    mats: Vec<CMat3>,
}

impl LinearPropagator {
    pub fn new(grid: Grid, t: f64, omega: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(NscError::param("t", format!("{t} must be finite and >= 0")));
        }
        let mut mats: Vec<CMat3> = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let cj = grid.conj_flat(idx);
            let m = if cj < idx {
                // mirror the partner so reality is preserved exactly
                let p = mats[cj];
                let mut c = [[ZERO; 3]; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        c[a][b] = p[a][b].conj();
                    }
                }
                c
            } else {
                let s = grid.symbol_flat(idx);
                let mut m = mode_propagator(s.deriv, s.mag_sq, t, omega);
                if cj == idx {
                    for row in m.iter_mut() {
                        for v in row.iter_mut() {
                            v.im = 0.0;
                        }
                    }
                }
                m
            };
            mats.push(m);
        }
        Ok(LinearPropagator {
            grid,
            t,
            omega,
            mats,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply_in_place(&self, u: &mut SpectralVectorField) {
        assert_eq!(*u.grid(), self.grid, "grid mismatch");
        let [c0, c1, c2] = &mut u.comps;
        let (a0, a1, a2) = (c0.coeffs_mut(), c1.coeffs_mut(), c2.coeffs_mut());
        for (idx, m) in self.mats.iter().enumerate() {
            let v = [a0[idx], a1[idx], a2[idx]];
            a0[idx] = m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2];
            a1[idx] = m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2];
            a2[idx] = m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2];
        }
    }

    pub fn apply(&self, u: &SpectralVectorField) -> SpectralVectorField {
        let mut out = u.clone();
        self.apply_in_place(&mut out);
        out
    }
}

/// Exact solution of the linear Rossby flow at time `t`.
pub fn rossby_propagate(
    u0: &SpectralVectorField,
    t: f64,
    omega: f64,
) -> Result<SpectralVectorField> {
    Ok(LinearPropagator::new(*u0.grid(), t, omega)?.apply(u0))
}

/// `Ω P(e3 ∧ u)`.
pub fn coriolis_term(u: &SpectralVectorField, omega: f64) -> SpectralVectorField {
    let mut r = u.clone();
    r.comps[0] = u.comps[1].clone();
    r.comps[0].scale(-omega);
    r.comps[1] = u.comps[0].clone();
    r.comps[1].scale(omega);
    r.comps[2] = crate::field::SpectralField::zeros(*u.grid());
    spectral::leray_project(&r)
}

/// Smooth cutoff profile: 1 on `|x| ≤ 1/2`, 0 on `|x| ≥ 1`,
/// `q(2 - 2|x|)` in between with `q(r) = r³(10 - 15r + 6r²)`.
pub fn chi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let r = 2.0 - 2.0 * a;
        r * r * r * (10.0 - 15.0 * r + 6.0 * r * r)
    }
}

/// Fourier ball radius of the smooth cutoff `P_R = χ(|∇|/R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub radius: f64,
}

impl CutoffSpec {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(NscError::param("R", format!("{radius} must be positive")));
        }
        Ok(CutoffSpec { radius })
    }

    #[inline]
    pub fn multiplier(&self, xi_mag: f64) -> f64 {
        chi(xi_mag / self.radius)
    }
}

/// Split `x = lo + hi` with `lo ≈ c x` such that `lo + hi == x` exactly.
#[inline]
fn split_exact(x: f64, c: f64) -> (f64, f64) {
    let lo0 = c * x;
    let hi = x - lo0;
    let lo = x - hi;
    (lo, hi)
}

/// `(P_R u, (1 - P_R) u)`; the two parts add back to `u` bitwise.
pub fn fourier_cutoff(
    u: &SpectralVectorField,
    spec: &CutoffSpec,
) -> (SpectralVectorField, SpectralVectorField) {
    let g = *u.grid();
    let mut low = u.clone();
    let mut high = u.clone();
    for c in 0..3 {
        let src = u.comps[c].coeffs();
        let lo = low.comps[c].coeffs_mut();
        let hi = high.comps[c].coeffs_mut();
        for idx in 0..g.len() {
            let m = spec.multiplier(g.symbol_flat(idx).mag_sq.sqrt());
            let (lr, hr) = split_exact(src[idx].re, m);
            let (li, hi_) = split_exact(src[idx].im, m);
            lo[idx] = Complex64::new(lr, li);
            hi[idx] = Complex64::new(hr, hi_);
        }
    }
    (low, high)
}

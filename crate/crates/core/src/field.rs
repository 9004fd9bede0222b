//! Spectral and physical field containers.

use num_complex::Complex64;

use crate::error::{NscError, Result};
use crate::fft;
use crate::grid::{conj_index, Grid};

/// Tolerance on the relative conjugate-symmetry defect accepted by
/// [`inverse_transform`].
pub const REALITY_TOL: f64 = 1e-10;

/// Scalar field stored as interpolation coefficients `f_n(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

/// Scalar field on the horizontal plane (the `n = 0` slice of a
/// [`SpectralField`]), indexed `(m1, m2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    pub comps: [SpectralField; 3],
}

/// Vertical-average split `u = ū + ũ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecomposition {
    pub bar: SpectralVectorField,
    pub tilde: SpectralVectorField,
}

fn zero_c() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn max_abs(c: &[Complex64]) -> f64 {
    c.iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![zero_c(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(NscError::DimensionMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Field with a single mode `c` at `(i1, i2, i3)` and its conjugate
    /// partner, so the result is real.
    pub fn single_mode(grid: Grid, i1: usize, i2: usize, i3: usize, c: Complex64) -> Self {
        let mut f = SpectralField::zeros(grid);
        let idx = grid.index(i1, i2, i3);
        let cj = grid.conj_flat(idx);
        f.coeffs[idx] = c;
        if cj == idx {
            f.coeffs[idx] = Complex64::new(c.re, 0.0);
        } else {
            f.coeffs[cj] = c.conj();
        }
        f
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize, i3: usize) -> Complex64 {
        self.coeffs[self.grid.index(i1, i2, i3)]
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    /// Relative conjugate-symmetry defect `max |f(m) - conj f(-m)| / max |f|`.
    pub fn reality_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let g = self.grid;
        let mut worst = 0.0f64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let d = (c - self.coeffs[g.conj_flat(idx)].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    /// Replace `f(m)` by `(f(m) + conj f(-m)) / 2`; the result satisfies the
    /// reality condition exactly.
    pub fn symmetrize(&mut self) {
        symmetrize_slice(&mut self.coeffs, self.grid.dims());
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        assert_eq!(self.grid, x.grid, "grid mismatch");
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += v * a;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// The `n = 0` slice (vertical average).
    pub fn plane(&self) -> PlaneField {
        let g = self.grid;
        let mut coeffs = Vec::with_capacity(g.plane_len());
        for i1 in 0..g.nx {
            for i2 in 0..g.ny {
                coeffs.push(self.coeffs[g.index(i1, i2, 0)]);
            }
        }
        PlaneField { grid: g, coeffs }
    }

    /// Embed a plane field as a z-independent field.
    pub fn from_plane(p: &PlaneField) -> Self {
        let g = p.grid;
        let mut f = SpectralField::zeros(g);
        for i1 in 0..g.nx {
            for i2 in 0..g.ny {
                f.coeffs[g.index(i1, i2, 0)] = p.coeffs[i1 * g.ny + i2];
            }
        }
        f
    }

    /// Largest modulus among the `n = 0` coefficients.
    pub fn vertical_mean_magnitude(&self) -> f64 {
        let g = self.grid;
        let mut m = 0.0f64;
        for i1 in 0..g.nx {
            for i2 in 0..g.ny {
                m = m.max(self.coeffs[g.index(i1, i2, 0)].norm());
            }
        }
        m
    }
}

pub(crate) fn symmetrize_slice(c: &mut [Complex64], dims: [usize; 3]) {
    let [n0, n1, n2] = dims;
    for i0 in 0..n0 {
        let j0 = conj_index(i0, n0);
        for i1 in 0..n1 {
            let j1 = conj_index(i1, n1);
            for i2 in 0..n2 {
                let j2 = conj_index(i2, n2.max(1));
                let a = (i0 * n1 + i1) * n2 + i2;
                let b = (j0 * n1 + j1) * n2 + j2;
                if b < a {
                    continue;
                }
                if a == b {
                    c[a] = Complex64::new(c[a].re, 0.0);
                } else {
                    let avg = (c[a] + c[b].conj()) * 0.5;
                    c[a] = avg;
                    c[b] = avg.conj();
                }
            }
        }
    }
}

impl PlaneField {
    pub fn zeros(grid: Grid) -> Self {
        PlaneField {
            grid,
            coeffs: vec![zero_c(); grid.plane_len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.plane_len() {
            return Err(NscError::DimensionMismatch {
                expected: grid.plane_len(),
                got: coeffs.len(),
            });
        }
        Ok(PlaneField { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.grid.ny + i2
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.coeffs[i1 * self.grid.ny + i2]
    }

    /// Coefficient of the constant mode (the box average).
    #[inline]
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    pub fn symmetrize(&mut self) {
        let g = self.grid;
        symmetrize_slice(&mut self.coeffs, [g.nx, g.ny, 1]);
    }

    pub fn reality_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let g = self.grid;
        let mut worst = 0.0f64;
        for i1 in 0..g.nx {
            for i2 in 0..g.ny {
                let a = self.at(i1, i2);
                let b = self.at(conj_index(i1, g.nx), conj_index(i2, g.ny));
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst / scale
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    pub fn axpy(&mut self, a: f64, x: &PlaneField) {
        assert_eq!(self.grid, x.grid, "grid mismatch");
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += v * a;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

impl SpectralVectorField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralVectorField {
            comps: [
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
            ],
        }
    }

    pub fn new(c0: SpectralField, c1: SpectralField, c2: SpectralField) -> Result<Self> {
        if c0.grid != c1.grid || c0.grid != c2.grid {
            return Err(NscError::GridMismatch);
        }
        Ok(SpectralVectorField {
            comps: [c0, c1, c2],
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.comps[0].grid
    }

    pub fn symmetrize(&mut self) {
        self.comps.iter_mut().for_each(SpectralField::symmetrize);
    }

    pub fn reality_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(SpectralField::reality_defect)
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, a: f64) {
        self.comps.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn axpy(&mut self, a: f64, x: &SpectralVectorField) {
        for (s, v) in self.comps.iter_mut().zip(&x.comps) {
            s.axpy(a, v);
        }
    }

    pub fn add(&self, x: &SpectralVectorField) -> SpectralVectorField {
        let mut out = self.clone();
        out.axpy(1.0, x);
        out
    }

    pub fn sub(&self, x: &SpectralVectorField) -> SpectralVectorField {
        let mut out = self.clone();
        out.axpy(-1.0, x);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(SpectralField::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Largest modulus among the `n = 0` coefficients of any component.
    pub fn vertical_mean_magnitude(&self) -> f64 {
        self.comps
            .iter()
            .map(SpectralField::vertical_mean_magnitude)
            .fold(0.0, f64::max)
    }

    /// Relative divergence residual `max |k·u| / max(|k| |u|)`, using the
    /// derivative wavevector.
    pub fn divergence_residual(&self) -> f64 {
        let g = *self.grid();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for idx in 0..g.len() {
            let s = g.symbol_flat(idx);
            let [a, b, c] = s.deriv;
            let u = [
                self.comps[0].coeffs[idx],
                self.comps[1].coeffs[idx],
                self.comps[2].coeffs[idx],
            ];
            let d = u[0] * a + u[1] * b + u[2] * c;
            num = num.max(d.norm());
            let un = (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr()).sqrt();
            den = den.max(un * s.deriv_sq().sqrt());
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.divergence_residual() <= tol
    }

    /// z-independent vector field from three plane components.
    pub fn from_planes(p: [&PlaneField; 3]) -> Self {
        SpectralVectorField {
            comps: [
                SpectralField::from_plane(p[0]),
                SpectralField::from_plane(p[1]),
                SpectralField::from_plane(p[2]),
            ],
        }
    }

    pub fn planes(&self) -> [PlaneField; 3] {
        [
            self.comps[0].plane(),
            self.comps[1].plane(),
            self.comps[2].plane(),
        ]
    }
}

fn to_complex(samples: &[f64]) -> Vec<Complex64> {
    samples.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Physical samples (row-major `(i, j, l)`) to interpolation coefficients.
pub fn forward_transform(grid: &Grid, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(NscError::DimensionMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let mut c = to_complex(samples);
    fft::forward(&mut c, grid.dims());
    let mut f = SpectralField {
        grid: *grid,
        coeffs: c,
    };
    f.symmetrize();
    Ok(f)
}

/// Coefficients to physical samples; refuses fields that are not the
/// transform of a real field.
pub fn inverse_transform(f: &SpectralField) -> Result<Vec<f64>> {
    let defect = f.reality_defect();
    if defect > REALITY_TOL {
        return Err(NscError::RealityViolation {
            defect,
            tolerance: REALITY_TOL,
        });
    }
    Ok(synthesize(f))
}

/// Inverse transform without the reality check (real part of the synthesis).
pub(crate) fn synthesize(f: &SpectralField) -> Vec<f64> {
    let mut c = f.coeffs.clone();
    fft::inverse(&mut c, f.grid.dims());
    c.into_iter().map(|v| v.re).collect()
}

pub fn forward_plane(grid: &Grid, samples: &[f64]) -> Result<PlaneField> {
    if samples.len() != grid.plane_len() {
        return Err(NscError::DimensionMismatch {
            expected: grid.plane_len(),
            got: samples.len(),
        });
    }
    let mut c = to_complex(samples);
    fft::forward(&mut c, [grid.nx, grid.ny, 1]);
    let mut p = PlaneField {
        grid: *grid,
        coeffs: c,
    };
    p.symmetrize();
    Ok(p)
}

pub fn inverse_plane(p: &PlaneField) -> Result<Vec<f64>> {
    let defect = p.reality_defect();
    if defect > REALITY_TOL {
        return Err(NscError::RealityViolation {
            defect,
            tolerance: REALITY_TOL,
        });
    }
    Ok(synthesize_plane(p))
}

pub(crate) fn synthesize_plane(p: &PlaneField) -> Vec<f64> {
    let mut c = p.coeffs.clone();
    fft::inverse(&mut c, [p.grid.nx, p.grid.ny, 1]);
    c.into_iter().map(|v| v.re).collect()
}

/// Sample `f(x1, x2, z)` on the grid with `x` in the centered box
/// `[-L/2, L/2)²`.
pub fn sample(grid: &Grid, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.nx {
        let x1 = grid.x1_centered(i);
        for j in 0..grid.ny {
            let x2 = grid.x2_centered(j);
            for l in 0..grid.nz {
                out.push(f(x1, x2, grid.z(l)));
            }
        }
    }
    out
}

/// Sample `f(x1, x2)` on the horizontal grid (centered coordinates).
pub fn sample_plane(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.plane_len());
    for i in 0..grid.nx {
        let x1 = grid.x1_centered(i);
        for j in 0..grid.ny {
            out.push(f(x1, grid.x2_centered(j)));
        }
    }
    out
}

//! Dispersive kernel `K[A,B](x,z) = (1/4π²) Σ_n ∫ e^{-A|ξ|² + iBη} ψ_n(k)² e^{i(k·x + 2πnz)} dk`
//! with `ψ_n = (1 - δ_{n0}) χ(|ξ|/2R)`, and the sweep of `sup|K|·√B·e^{4π²A}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NscError, Result};
use crate::grid::Grid;
use crate::rossby::chi;

/// Relative change of the sup below which quadrature refinement stops.
pub const REFINE_TOL: f64 = 1e-4;
const MAX_LEVELS: usize = 8;

#[derive(Debug, Clone)]
pub struct KernelSample {
    /// Samples on the eval grid (centered `x`, row-major `(x1, x2, z)`).
    pub values: Vec<f64>,
    pub sup: f64,
    /// Final k-step of the midpoint rule.
    pub step: f64,
    /// Number of refinement levels used.
    pub levels: usize,
    /// Whether the refinement criterion was met before the level cap.
    pub converged: bool,
}

/// Largest vertical label in the support of `ψ`.
pub fn n_max(r: f64) -> i64 {
    (2.0 * r / (2.0 * PI)).ceil() as i64 + 1
}

/// `F_n(x) = (1/4π²) ∫ e^{-A|ξ|²+iBη} ψ_n² e^{ik·x} dk` on the eval plane, midpoint rule with step `h`.
fn plane_transform(a: f64, b: f64, r: f64, n: i64, h: f64, grid: &Grid) -> Vec<Complex64> {
    let kmax = 2.0 * r;
    let half = (kmax / h).ceil() as usize;
    let m = 2 * half;
    let ks: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5 - half as f64) * h).collect();
    let kz = 2.0 * PI * n as f64;
    let norm = h * h / (4.0 * PI * PI);

    // weights on the k-grid; rows outside the disc are dropped
    let mut rows: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for &k1 in &ks {
        let mut row = vec![Complex64::new(0.0, 0.0); m];
        let mut any = false;
        for (j, &k2) in ks.iter().enumerate() {
            let xi_sq = k1 * k1 + k2 * k2 + kz * kz;
            let psi = chi(xi_sq.sqrt() / (2.0 * r));
            if psi == 0.0 {
                continue;
            }
            let eta = kz / xi_sq.sqrt();
            row[j] = Complex64::from_polar(norm * (-a * xi_sq).exp() * psi * psi, b * eta);
            any = true;
        }
        if any {
            rows.push((k1, row));
        }
    }

    let (nx, ny) = (grid.nx, grid.ny);
    let x2: Vec<f64> = (0..ny).map(|j| grid.x2_centered(j)).collect();
    let e2: Vec<Vec<Complex64>> = ks
        .iter()
        .map(|&k2| x2.iter().map(|&x| Complex64::from_polar(1.0, k2 * x)).collect())
        .collect();

    // T[a][j] = Σ_b w_ab e^{i k2_b x2_j}
    let t: Vec<(f64, Vec<Complex64>)> = rows
        .par_iter()
        .map(|(k1, row)| {
            let mut out = vec![Complex64::new(0.0, 0.0); ny];
            for (bi, w) in row.iter().enumerate() {
                if w.re == 0.0 && w.im == 0.0 {
                    continue;
                }
                for (o, e) in out.iter_mut().zip(&e2[bi]) {
                    *o += w * e;
                }
            }
            (*k1, out)
        })
        .collect();

    // F[i][j] = Σ_a e^{i k1_a x1_i} T[a][j]
    (0..nx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x1 = grid.x1_centered(i);
            let mut out = vec![Complex64::new(0.0, 0.0); ny];
            for (k1, row) in &t {
                let e = Complex64::from_polar(1.0, k1 * x1);
                for (o, v) in out.iter_mut().zip(row) {
                    *o += e * v;
                }
            }
            out
        })
        .collect()
}

fn evaluate(a: f64, b: f64, r: f64, h: f64, grid: &Grid) -> Vec<f64> {
    let np = grid.plane_len();
    let mut vals = vec![0.0; grid.len()];
    // F_{-n} = conj(F_n), so K = Σ_{n>0} 2 Re(e^{2πinz} F_n)
    for n in 1..=n_max(r) {
        let f = plane_transform(a, b, r, n, h, grid);
        for p in 0..np {
            for l in 0..grid.nz {
                let ph = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * grid.z(l));
                vals[p * grid.nz + l] += 2.0 * (ph * f[p]).re;
            }
        }
    }
    vals
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Row sums `s_n(k1) = Σ_{k2} w_n(k1, k2)`: `K` restricted to the `x1` axis.
fn axis_weights(a: f64, b: f64, r: f64, h: f64) -> Vec<Vec<(f64, Complex64)>> {
    let kmax = 2.0 * r;
    let half = (kmax / h).ceil() as usize;
    let ks: Vec<f64> = (0..2 * half)
        .map(|i| (i as f64 + 0.5 - half as f64) * h)
        .collect();
    let norm = h * h / (4.0 * PI * PI);
    (1..=n_max(r))
        .map(|n| {
            let kz = 2.0 * PI * n as f64;
            ks.iter()
                .filter_map(|&k1| {
                    let mut s = Complex64::new(0.0, 0.0);
                    for &k2 in &ks {
                        let xi_sq = k1 * k1 + k2 * k2 + kz * kz;
                        let psi = chi(xi_sq.sqrt() / (2.0 * r));
                        if psi != 0.0 {
                            s += Complex64::from_polar(
                                norm * (-a * xi_sq).exp() * psi * psi,
                                b * kz / xi_sq.sqrt(),
                            );
                        }
                    }
                    (s.norm_sqr() > 0.0).then_some((k1, s))
                })
                .collect()
        })
        .collect()
}

fn axis_value(ws: &[Vec<(f64, Complex64)>], rr: f64, z: f64) -> f64 {
    let mut v = 0.0;
    for (i, row) in ws.iter().enumerate() {
        let n = (i + 1) as f64;
        let mut f = Complex64::new(0.0, 0.0);
        for (k1, s) in row {
            f += s * Complex64::from_polar(1.0, k1 * rr);
        }
        v += 2.0 * (Complex64::from_polar(1.0, 2.0 * PI * n * z) * f).re;
    }
    v
}

/// `sup |K|` over `|x| ≤ r_max`, `z ∈ T` using radial symmetry: coarse scan
/// along the `x1` axis followed by local grid refinement.
fn radial_sup(ws: &[Vec<(f64, Complex64)>], r_max: f64, dr: f64) -> f64 {
    let nr = (r_max / dr).ceil() as usize + 1;
    let nzs = 128;
    let dz = 1.0 / nzs as f64;
    let scan: Vec<(f64, f64, f64)> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let rr = i as f64 * dr;
            let mut best = (0.0, rr, 0.0);
            for l in 0..nzs {
                let z = l as f64 * dz;
                let v = axis_value(ws, rr, z).abs();
                if v > best.0 {
                    best = (v, rr, z);
                }
            }
            best
        })
        .collect();
    let (mut best, mut r0, mut z0) = scan
        .into_iter()
        .fold((0.0, 0.0, 0.0), |b, c| if c.0 > b.0 { c } else { b });
    let (mut wr, mut wz) = (dr, dz);
    for _ in 0..4 {
        let m = 10;
        for i in -m..=m {
            let rr = (r0 + wr * i as f64 / m as f64).clamp(0.0, r_max);
            for j in -m..=m {
                let z = z0 + wz * j as f64 / m as f64;
                let v = axis_value(ws, rr, z).abs();
                if v > best {
                    best = v;
                    r0 = rr;
                    z0 = z;
                }
            }
        }
        wr /= 5.0;
        wz /= 5.0;
    }
    best
}

/// Default eval window: `[-16, 16)²` at 128² points, 16 vertical samples.
pub fn default_eval_grid() -> Grid {
    Grid::new(128, 128, 16, 32.0).expect("valid grid")
}

/// Sample `K[A,B]` on `eval_grid`. The k-step of the midpoint rule starts at
/// `π/L` and is halved until `sup|K|` over the eval window changes by less
/// than [`REFINE_TOL`] relative. The sup is located by a refined search
/// (the continuum kernel is radial in `x`), not just over grid samples.
pub fn kernel_k(a: f64, b: f64, r: f64, eval_grid: &Grid) -> Result<KernelSample> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(NscError::param("A", format!("{a} must be >= 0")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(NscError::param("R", format!("{r} must be positive")));
    }
    if !b.is_finite() {
        return Err(NscError::param("B", "must be finite"));
    }
    let r_max = 0.5 * eval_grid.box_len;
    let dr = eval_grid.dx() / 8.0;
    let mut h = PI / eval_grid.box_len;
    let mut sup = radial_sup(&axis_weights(a, b, r, h), r_max, dr);
    let mut levels = 1;
    let mut converged = false;
    while levels < MAX_LEVELS {
        let h2 = 0.5 * h;
        let s2 = radial_sup(&axis_weights(a, b, r, h2), r_max, dr);
        let change = (s2 - sup).abs();
        h = h2;
        sup = s2;
        levels += 1;
        if change <= REFINE_TOL * sup || sup == 0.0 {
            converged = true;
            break;
        }
    }
    let values = evaluate(a, b, r, h, eval_grid);
    let sup = sup.max(sup_abs(&values));
    Ok(KernelSample {
        values,
        sup,
        step: h,
        levels,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRow {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub sup: f64,
    pub ratio: f64,
}

/// Sweep `ratio = sup|K[A,B]|·√|B|·e^{4π²A}` over `A_list × B_list`.
pub fn lemma_b2_check(r: f64, a_list: &[f64], b_list: &[f64]) -> Result<Vec<KernelRow>> {
    lemma_b2_check_on(&default_eval_grid(), r, a_list, b_list)
}

pub fn lemma_b2_check_on(
    grid: &Grid,
    r: f64,
    a_list: &[f64],
    b_list: &[f64],
) -> Result<Vec<KernelRow>> {
    if !(r > 0.0) {
        return Err(NscError::param("R", format!("{r} must be positive")));
    }
    if let Some(b) = b_list.iter().find(|b| !(b.abs() >= 1.0)) {
        return Err(NscError::param("B", format!("{b}: entries must satisfy |B| >= 1")));
    }
    let mut out = Vec::with_capacity(a_list.len() * b_list.len());
    for &a in a_list {
        for &b in b_list {
            let k = kernel_k(a, b, r, grid)?;
            out.push(KernelRow {
                a,
                b,
                r,
                sup: k.sup,
                ratio: k.sup * b.abs().sqrt() * (4.0 * PI * PI * a).exp(),
            });
        }
    }
    Ok(out)
}

/// `max ratio / min ratio` over a sweep.
pub fn ratio_spread(rows: &[KernelRow]) -> f64 {
    let max = rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::MAX, f64::min);
    max / min
}

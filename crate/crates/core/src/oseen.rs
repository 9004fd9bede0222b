//! Closed-form Lamb-Oseen vortex.
//!
//! Self-similar profiles `g(ξ) = e^{-|ξ|²/4}/(4π)` and
//! `U(ξ) = (1 - e^{-|ξ|²/4})/(2π|ξ|²) · ξ^⊥`; the vortex of unit circulation
//! started at `t = 0` is `u(t,x) = U(x/√s)/√s`, `ω3(t,x) = g(x/√s)/s` with
//! `s = 1 + t`.

use std::f64::consts::PI;

use crate::field::{forward_plane, sample_plane, PlaneField};
use crate::grid::Grid;

/// Number of periodic images on each side used when periodizing.
const IMAGES: i32 = 1;

/// Gaussian profile `g(ξ) = e^{-|ξ|²/4} / (4π)`.
#[inline]
pub fn g_profile(x1: f64, x2: f64) -> f64 {
    (-(x1 * x1 + x2 * x2) / 4.0).exp() / (4.0 * PI)
}

/// `f(q) = (1 - e^{-a q}) / (2π q)` and `f'(q)`, with `q = r²`.
#[inline]
fn radial(q: f64, a: f64) -> (f64, f64) {
    let x = a * q;
    if x < 0.1 {
        // series in x = a q
        let mut f = 0.0;
        let mut df = 0.0;
        let mut fact = 1.0; // (k+1)!
        for k in 0..12 {
            fact *= (k + 1) as f64;
            let c = if k % 2 == 0 { 1.0 } else { -1.0 };
            f += c * x.powi(k) / fact;
            if k >= 1 {
                df += c * (k as f64) * x.powi(k - 1) / fact;
            }
        }
        (a * f / (2.0 * PI), a * a * df / (2.0 * PI))
    } else {
        let one_minus = -(-x).exp_m1();
        let f = one_minus / (2.0 * PI * q);
        let df = (a * q * (-x).exp() - one_minus) / (2.0 * PI * q * q);
        (f, df)
    }
}

/// Velocity of the unit-circulation vortex at time `t` (third component 0).
pub fn oseen_velocity(x: [f64; 2], t: f64) -> [f64; 3] {
    let s = 1.0 + t;
    let q = x[0] * x[0] + x[1] * x[1];
    let (f, _) = radial(q, 1.0 / (4.0 * s));
    [-f * x[1], f * x[0], 0.0]
}

/// Vorticity `(0, 0, g(x/√s)/s)` of the unit-circulation vortex.
pub fn oseen_vorticity(x: [f64; 2], t: f64) -> [f64; 3] {
    let s = 1.0 + t;
    [0.0, 0.0, (-(x[0] * x[0] + x[1] * x[1]) / (4.0 * s)).exp() / (4.0 * PI * s)]
}

/// Self-similar velocity profile `U(ξ)`.
pub fn profile_velocity(xi: [f64; 2]) -> [f64; 2] {
    let v = oseen_velocity(xi, 0.0);
    [v[0], v[1]]
}

/// Velocity gradient `[[∂1u1, ∂2u1], [∂1u2, ∂2u2]]`.
pub fn oseen_velocity_gradient(x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
    let s = 1.0 + t;
    let q = x[0] * x[0] + x[1] * x[1];
    let (f, df) = radial(q, 1.0 / (4.0 * s));
    let (x1, x2) = (x[0], x[1]);
    [
        [-2.0 * x1 * x2 * df, -f - 2.0 * x2 * x2 * df],
        [f + 2.0 * x1 * x1 * df, 2.0 * x1 * x2 * df],
    ]
}

/// Sum over the `3×3` nearest periodic images of `f(x + L m)`.
pub fn periodize(l: f64, x1: f64, x2: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for a in -IMAGES..=IMAGES {
        for b in -IMAGES..=IMAGES {
            acc += f(x1 + l * a as f64, x2 + l * b as f64);
        }
    }
    acc
}

/// Periodized vortex vorticity `Θ(t)` as a plane field on `grid`.
pub fn periodized_vorticity(grid: &Grid, t: f64) -> PlaneField {
    let l = grid.box_len;
    let s = sample_plane(grid, |x1, x2| {
        periodize(l, x1, x2, |a, b| oseen_vorticity([a, b], t)[2])
    });
    forward_plane(grid, &s).expect("sample size matches grid")
}

/// Periodized profile `g` on `grid`.
pub fn periodized_profile(grid: &Grid) -> PlaneField {
    periodized_vorticity(grid, 0.0)
}

/// Samples of the unit-circulation vortex velocity on the centered box.
pub fn velocity_samples(grid: &Grid, t: f64) -> [Vec<f64>; 2] {
    let n = grid.plane_len();
    let mut u1 = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    for i in 0..grid.nx {
        let x1 = grid.x1_centered(i);
        for j in 0..grid.ny {
            let v = oseen_velocity([x1, grid.x2_centered(j)], t);
            u1.push(v[0]);
            u2.push(v[1]);
        }
    }
    [u1, u2]
}

/// Samples of the velocity gradient, `out[i][j] = ∂_j u_i`.
pub fn gradient_samples(grid: &Grid, t: f64) -> [[Vec<f64>; 2]; 2] {
    let n = grid.plane_len();
    let mut out: [[Vec<f64>; 2]; 2] = Default::default();
    for row in out.iter_mut() {
        for c in row.iter_mut() {
            c.reserve(n);
        }
    }
    for i in 0..grid.nx {
        let x1 = grid.x1_centered(i);
        for j in 0..grid.ny {
            let gr = oseen_velocity_gradient([x1, grid.x2_centered(j)], t);
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b].push(gr[a][b]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((oseen_vorticity([0.0, 0.0], 0.0)[2] - 0.079_577_471_545_947_67).abs() < 1e-15);
        let v = oseen_velocity([2.0, 0.0], 0.0);
        let expect = (1.0 - (-1.0f64).exp()) / (4.0 * PI);
        assert!(v[0].abs() < 1e-16);
        assert!((v[1] - expect).abs() < 1e-15);
        assert!((v[1] - 0.050302).abs() < 1e-6);
        assert_eq!(oseen_velocity([0.0, 0.0], 3.0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn small_radius_limit() {
        // u ~ x^⊥ / (8π s) near the axis
        let t = 0.5;
        let x = [1e-5, -2e-5];
        let v = oseen_velocity(x, t);
        let c = 1.0 / (8.0 * PI * (1.0 + t));
        assert!((v[0] - (-x[1] * c)).abs() < 1e-15);
        assert!((v[1] - x[0] * c).abs() < 1e-15);
    }

    #[test]
    fn series_and_direct_branches_agree() {
        let a = 0.25;
        for q in [0.399, 0.4, 0.401] {
            let (f, df) = radial(q, a);
            let x: f64 = a * q;
            let f_direct = -(-x).exp_m1() / (2.0 * PI * q);
            let df_direct = (a * q * (-x).exp() + (-x).exp_m1()) / (2.0 * PI * q * q);
            assert!((f - f_direct).abs() < 1e-15);
            assert!((df - df_direct).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let t = 0.7;
        let h = 1e-5;
        for x in [[0.3, -0.2], [1.5, 2.0], [-3.0, 0.5]] {
            let gr = oseen_velocity_gradient(x, t);
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let up = oseen_velocity(xp, t);
                let um = oseen_velocity(xm, t);
                for i in 0..2 {
                    let fd = (up[i] - um[i]) / (2.0 * h);
                    assert!((gr[i][j] - fd).abs() < 1e-9);
                }
            }
            // curl of the velocity is the vorticity
            let w = gr[1][0] - gr[0][1];
            assert!((w - oseen_vorticity(x, t)[2]).abs() < 1e-14);
        }
    }

    #[test]
    fn self_advection_is_a_gradient() {
        // (u·∇)u = -|u|²/r² x is radial, hence curl-free.
        for x in [[0.4, 1.1], [2.5, -1.0], [-0.01, 0.02]] {
            let u = oseen_velocity(x, 0.2);
            let gr = oseen_velocity_gradient(x, 0.2);
            let a = [
                u[0] * gr[0][0] + u[1] * gr[0][1],
                u[0] * gr[1][0] + u[1] * gr[1][1],
            ];
            let cross = x[0] * a[1] - x[1] * a[0];
            assert!(cross.abs() < 1e-16);
        }
    }
}

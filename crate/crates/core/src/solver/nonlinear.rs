//! Pseudo-spectral `-P((u·∇)u)` for `u = α u^G + u'`.
//!
//! The background self-interaction `(u^G·∇)u^G` is a gradient and is dropped;
//! what remains is `(u·∇)u' + (u'_h·∇)(α u^G)`. When `u'` has no fluctuation
//! the products are formed on the horizontal plane only.

use num_complex::Complex64;

use super::{FlowState, DIV_TOL};
use crate::error::{NscError, Result};
use crate::field::{
    forward_plane, forward_transform, synthesize, synthesize_plane, SpectralField,
    SpectralVectorField,
};
use crate::oseen;
use crate::spectral;

/// Background samples on the plane: `u^G_h` and `∂_j u^G_i`.
struct Background {
    alpha: f64,
    vel: [Vec<f64>; 2],
    grad: [[Vec<f64>; 2]; 2],
}

/// `N_i = Σ_j v_j ∂_j u'_i + [i < 2] α Σ_{j<2} u'_j ∂_j u^G_i`, with
/// `v = u' + α u^G`. Samples are row-major with `nzz` points per column.
fn products(
    u: &[Vec<f64>; 3],
    du: &[[Option<Vec<f64>>; 3]; 3],
    bg: Option<&Background>,
    nzz: usize,
) -> ([Vec<f64>; 3], f64) {
    let n = u[0].len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut vmax = 0.0f64;
    for idx in 0..n {
        let p = idx / nzz;
        let mut v = [u[0][idx], u[1][idx], u[2][idx]];
        if let Some(b) = bg {
            v[0] += b.alpha * b.vel[0][p];
            v[1] += b.alpha * b.vel[1][p];
        }
        vmax = vmax.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
        for i in 0..3 {
            let mut acc = 0.0;
            for j in 0..3 {
                if let Some(d) = &du[i][j] {
                    acc += v[j] * d[idx];
                }
            }
            if i < 2 {
                if let Some(b) = bg {
                    acc += b.alpha * (u[0][idx] * b.grad[i][0][p] + u[1][idx] * b.grad[i][1][p]);
                }
            }
            out[i][idx] = acc;
        }
    }
    (out, vmax)
}

/// `-P((u·∇)u)` for the periodic part `u` at time `t` with background
/// circulation `alpha`; also returns `max |u|` over the grid (background
/// included) for the CFL check.
pub fn nonlinear_term(
    u: &SpectralVectorField,
    t: f64,
    alpha: f64,
) -> Result<(SpectralVectorField, f64)> {
    let res = u.divergence_residual();
    if res > DIV_TOL {
        return Err(NscError::DivergenceViolation {
            residual: res,
            tolerance: DIV_TOL,
        });
    }
    let g = *u.grid();
    let bg = (alpha != 0.0).then(|| Background {
        alpha,
        vel: oseen::velocity_samples(&g, t),
        grad: oseen::gradient_samples(&g, t),
    });
    let planar = spectral::fluctuation(u).is_zero();

    let (prod, vmax) = if planar {
        let p = u.planes();
        let us = [
            synthesize_plane(&p[0]),
            synthesize_plane(&p[1]),
            synthesize_plane(&p[2]),
        ];
        let mut du: [[Option<Vec<f64>>; 3]; 3] = Default::default();
        for i in 0..3 {
            let gr = spectral::plane_gradient(&p[i]);
            du[i][0] = Some(synthesize_plane(&gr[0]));
            du[i][1] = Some(synthesize_plane(&gr[1]));
        }
        let (prod, vmax) = products(&us, &du, bg.as_ref(), 1);
        let mut comps = Vec::with_capacity(3);
        for c in prod.iter() {
            comps.push(SpectralField::from_plane(&forward_plane(&g, c)?));
        }
        let [a, b, c]: [SpectralField; 3] = comps.try_into().expect("three components");
        (SpectralVectorField::new(a, b, c)?, vmax)
    } else {
        let us = [
            synthesize(&u.comps[0]),
            synthesize(&u.comps[1]),
            synthesize(&u.comps[2]),
        ];
        let mut du: [[Option<Vec<f64>>; 3]; 3] = Default::default();
        for i in 0..3 {
            let gr = spectral::gradient(&u.comps[i]);
            for j in 0..3 {
                du[i][j] = Some(synthesize(&gr[j]));
            }
        }
        let (prod, vmax) = products(&us, &du, bg.as_ref(), g.nz);
        let mut comps = Vec::with_capacity(3);
        for c in prod.iter() {
            comps.push(forward_transform(&g, c)?);
        }
        let [a, b, c]: [SpectralField; 3] = comps.try_into().expect("three components");
        (SpectralVectorField::new(a, b, c)?, vmax)
    };

    let mut out = prod;
    spectral::dealias_vector(&mut out);
    spectral::leray_project_in_place(&mut out);
    out.scale(-1.0);
    for c in out.comps.iter_mut() {
        c.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    }
    out.symmetrize();
    Ok((out, vmax))
}

/// `-P((u·∇)u)` for a flow state.
pub fn nonlinear_rhs(state: &FlowState) -> Result<SpectralVectorField> {
    nonlinear_term(&state.u, state.t, state.alpha_background).map(|(n, _)| n)
}

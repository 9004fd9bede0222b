//! Energy-inequality monitors along a trajectory.
//!
//! Raw norms are sampled per snapshot; time derivatives are taken afterwards
//! by finite differences across samples.

use super::FlowState;
use crate::field::{synthesize, synthesize_plane, SpectralVectorField};
use crate::norms::{self, magnitude, sample_norm, Norm};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConstants {
    pub c0: f64,
    pub c1: f64,
    /// Weight of `‖∇ū3‖²` in `Φ`.
    pub delta: f64,
    /// Residuals must exceed `-tol · (largest term)`.
    pub tol: f64,
}

impl Default for MonitorConstants {
    fn default() -> Self {
        MonitorConstants {
            c0: 4.0,
            c1: 10.0,
            delta: 1.0,
            tol: 1e-4,
        }
    }
}

/// Norms at one instant. Squared quantities carry a `_sq` suffix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonitorSample {
    pub t: f64,
    pub l2_u3bar_sq: f64,
    pub grad_u3bar_sq: f64,
    pub lap_u3bar_sq: f64,
    pub h1_u3bar: f64,
    pub l2_w3bar_sq: f64,
    pub grad_w3bar_sq: f64,
    pub l1_w3bar: f64,
    pub l2_tilde: f64,
    pub lap_tilde: f64,
    pub l4_tilde: f64,
    pub h1_tilde: f64,
    /// `‖ |ũ| |∇ũ| ‖²`.
    pub u_grad_u_sq: f64,
    pub grad_r_sq: f64,
    pub lap_r_sq: f64,
    pub l4_ubar: f64,
    pub grad_ubar_sq: f64,
    pub lap_ubar_sq: f64,
    pub l4_grad_lambda: f64,
    pub linf_lambda: f64,
    pub circulation: f64,
    pub x_norm: f64,
}

fn gradient_samples(u: &SpectralVectorField) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(9);
    for c in &u.comps {
        for d in spectral::gradient(c) {
            out.push(synthesize(&d));
        }
    }
    out
}

/// Norms of `state` (full flow); `lambda` is the linear part of the split
/// (`λ ≡ 0`, `r = ũ` when absent).
pub fn sample_monitors(state: &FlowState, lambda: Option<&SpectralVectorField>) -> MonitorSample {
    let g = *state.grid();
    let u = &state.u;
    let sq = |x: f64| x * x;
    let h = |r: crate::Result<f64>| r.expect("valid norm index");

    let u3 = u.comps[2].plane();
    let w3 = state.total_w3bar();
    let tilde = spectral::fluctuation(u);

    let tilde_s: Vec<Vec<f64>> = tilde.comps.iter().map(synthesize).collect();
    let tmag = magnitude(&tilde_s);
    let gmag = magnitude(&gradient_samples(&tilde));
    let prod: Vec<f64> = tmag.iter().zip(&gmag).map(|(a, b)| a * b).collect();

    let (grad_r_sq, lap_r_sq, l4_grad_lambda, linf_lambda) = match lambda {
        Some(l) => {
            let r = tilde.sub(l);
            let lg = magnitude(&gradient_samples(l));
            let ls: Vec<Vec<f64>> = l.comps.iter().map(synthesize).collect();
            (
                sq(norms::grad_l2(&r)),
                sq(norms::lap_l2(&r)),
                sample_norm(&lg, g.cell_volume(), Norm::L4),
                sample_norm(&magnitude(&ls), 1.0, Norm::Linf),
            )
        }
        None => (sq(norms::grad_l2(&tilde)), sq(norms::lap_l2(&tilde)), 0.0, 0.0),
    };

    let ubar = state.total_ubar_samples();
    let l2_w3bar_sq = sq(h(norms::norm_plane(&w3, Norm::L2)));
    let grad_w3bar_sq = sq(norms::plane_grad_l2(&w3));
    let grad_u3bar_sq = sq(norms::plane_grad_l2(&u3));
    let lap_u3bar_sq = sq(norms::plane_lap_l2(&u3));

    MonitorSample {
        t: state.t,
        l2_u3bar_sq: sq(h(norms::norm_plane(&u3, Norm::L2))),
        grad_u3bar_sq,
        lap_u3bar_sq,
        h1_u3bar: h(norms::norm_plane(&u3, Norm::Hs(1.0))),
        l2_w3bar_sq,
        grad_w3bar_sq,
        l1_w3bar: sample_norm(&synthesize_plane(&w3), g.cell_area(), Norm::L1),
        l2_tilde: h(norms::norm_vector(&tilde, Norm::L2)),
        lap_tilde: norms::lap_l2(&tilde),
        l4_tilde: sample_norm(&tmag, g.cell_volume(), Norm::L4),
        h1_tilde: h(norms::norm_vector(&tilde, Norm::Hs(1.0))),
        u_grad_u_sq: sq(sample_norm(&prod, g.cell_volume(), Norm::L2)),
        grad_r_sq,
        lap_r_sq,
        l4_ubar: sample_norm(&magnitude(&ubar), g.cell_area(), Norm::L4),
        // ‖∇ū_h‖ = ‖ω̄3‖ and ‖Δū_h‖ = ‖∇ω̄3‖ for divergence-free ū_h
        grad_ubar_sq: l2_w3bar_sq + grad_u3bar_sq,
        lap_ubar_sq: grad_w3bar_sq + lap_u3bar_sq,
        l4_grad_lambda,
        linf_lambda,
        circulation: state.circulation(),
        x_norm: state.x_norm(),
    }
}

/// One inequality `lhs ≤ rhs` at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    /// Largest absolute term entering the inequality.
    pub scale: f64,
}

impl Inequality {
    pub fn residual(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.residual() >= -tol * self.scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRow {
    pub sample: MonitorSample,
    pub phi: f64,
    pub sys: [Inequality; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMonitors {
    pub constants: MonitorConstants,
    pub rows: Vec<MonitorRow>,
}

impl EnergyMonitors {
    /// Indices (row, inequality) of violated inequalities.
    pub fn violations(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            for (j, s) in r.sys.iter().enumerate() {
                if !s.holds(self.constants.tol) {
                    v.push((i, j));
                }
            }
        }
        v
    }

    /// Smallest `residual / scale` per inequality.
    pub fn worst_relative(&self) -> [f64; 5] {
        let mut w = [f64::INFINITY; 5];
        for r in &self.rows {
            for (j, s) in r.sys.iter().enumerate() {
                let rel = if s.scale > 0.0 { s.residual() / s.scale } else { 0.0 };
                w[j] = w[j].min(rel);
            }
        }
        w
    }
}

/// Time derivative by finite differences: centered inside, second-order
/// one-sided at the ends (first order with two samples).
pub fn time_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    match n {
        0 => vec![],
        1 => vec![f64::NAN],
        2 => {
            let d = (f[1] - f[0]) / (t[1] - t[0]);
            vec![d, d]
        }
        _ => {
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                // three-point formula, exact for quadratics on any spacing
                d[i] = -h1 / (h0 * (h0 + h1)) * f[i - 1] + (h1 - h0) / (h0 * h1) * f[i]
                    + h0 / (h1 * (h0 + h1)) * f[i + 1];
            }
            let one_sided = |t0: f64, t1: f64, t2: f64, f0: f64, f1: f64, f2: f64| {
                let (a, b) = (t1 - t0, t2 - t0);
                // derivative at t0 of the interpolating quadratic
                -(a + b) / (a * b) * f0 + b / (a * (b - a)) * f1 - a / (b * (b - a)) * f2
            };
            d[0] = one_sided(t[0], t[1], t[2], f[0], f[1], f[2]);
            d[n - 1] = one_sided(t[n - 1], t[n - 2], t[n - 3], f[n - 1], f[n - 2], f[n - 3]);
            d
        }
    }
}

fn scale_of(terms: &[f64]) -> f64 {
    terms.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Residuals of the five energy inequalities along sampled snapshots.
pub fn energy_monitors(samples: &[MonitorSample], c: MonitorConstants) -> EnergyMonitors {
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let der = |f: fn(&MonitorSample) -> f64| {
        time_derivative(&t, &samples.iter().map(f).collect::<Vec<_>>())
    };
    let d1 = der(|s| s.l2_u3bar_sq);
    let d2 = der(|s| s.grad_u3bar_sq);
    let d3 = der(|s| s.l2_w3bar_sq);
    let d5 = der(|s| s.grad_r_sq);

    let l1_0 = samples.first().map(|s| s.l1_w3bar).unwrap_or(0.0);
    let mut integral = 0.0;
    let mut rows = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        if i > 0 {
            let p = &samples[i - 1];
            integral += 0.5 * (s.t - p.t) * (p.l2_tilde * p.lap_tilde + s.l2_tilde * s.lap_tilde);
        }
        let l4 = s.l4_tilde.powi(4);
        let sys1_terms = [d1[i], s.grad_u3bar_sq, l4];
        let a2 = s.grad_u3bar_sq * s.l2_w3bar_sq;
        let sys2_terms = [d2[i], s.lap_u3bar_sq, c.c0 * a2, c.c0 * s.u_grad_u_sq];
        let sys3_terms = [d3[i], s.grad_w3bar_sq, 8.0 * s.u_grad_u_sq];
        let sys4_terms = [s.l1_w3bar, l1_0, 2.0 * integral];
        let q1 = c.c1 * s.grad_r_sq * s.grad_ubar_sq * s.lap_ubar_sq;
        let q2 = c.c1 * s.l4_ubar.powi(2) * s.l4_grad_lambda.powi(2);
        let q3 = c.c1 * s.grad_ubar_sq * s.linf_lambda.powi(2);
        let q4 = c.c1 * s.u_grad_u_sq;
        let sys5_terms = [d5[i], s.lap_r_sq, q1, q2, q3, q4];
        let sys = [
            Inequality {
                lhs: d1[i],
                rhs: -s.grad_u3bar_sq + l4,
                scale: scale_of(&sys1_terms),
            },
            Inequality {
                lhs: d2[i],
                rhs: -s.lap_u3bar_sq + c.c0 * (a2 + s.u_grad_u_sq),
                scale: scale_of(&sys2_terms),
            },
            Inequality {
                lhs: d3[i],
                rhs: -s.grad_w3bar_sq + 8.0 * s.u_grad_u_sq,
                scale: scale_of(&sys3_terms),
            },
            Inequality {
                lhs: s.l1_w3bar,
                rhs: l1_0 + 2.0 * integral,
                scale: scale_of(&sys4_terms),
            },
            Inequality {
                lhs: d5[i],
                rhs: -s.lap_r_sq + q1 + q2 + q3 + q4,
                scale: scale_of(&sys5_terms),
            },
        ];
        rows.push(MonitorRow {
            sample: *s,
            phi: s.l2_u3bar_sq + s.l2_w3bar_sq + c.delta * s.grad_u3bar_sq + s.grad_r_sq,
            sys,
        });
    }
    EnergyMonitors { constants: c, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_exact_on_quadratics() {
        let t = [0.0, 0.1, 0.25, 0.3, 0.5];
        let f: Vec<f64> = t.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let d = time_derivative(&t, &f);
        for (x, di) in t.iter().zip(&d) {
            assert!((di - (6.0 * x - 1.0)).abs() < 1e-12, "{x}: {di}");
        }
    }
}

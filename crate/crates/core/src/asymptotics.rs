//! Self-similar variables `ξ = x/√(1+t)`, `τ = log(1+t)`, distance to the
//! Oseen profile, decay fits, and the rescaled 2D vorticity equation
//! `∂τ w = Δw + ∇·(½ξ w − v w)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{NscError, Result};
use crate::field::{forward_plane, synthesize_plane, PlaneField};
use crate::grid::Grid;
use crate::norms::{self, sample_norm, Norm};
use crate::oseen;
use crate::solver::FlowState;
use crate::spectral;

/// Smallest ξ-box side for which L¹ comparisons with the Gaussian are trusted.
pub const MIN_XI_BOX: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledVorticity {
    pub tau: f64,
    /// Vorticity on the ξ-grid (box side `L/√(1+t)`).
    pub w: PlaneField,
    pub mass: f64,
    /// ξ-box below [`MIN_XI_BOX`].
    pub flagged: bool,
}

impl RescaledVorticity {
    /// Wrap a profile given directly on a ξ-grid.
    pub fn new(w: PlaneField, tau: f64) -> Self {
        let g = *w.grid();
        RescaledVorticity {
            tau,
            mass: g.box_len * g.box_len * w.mean(),
            flagged: g.box_len < MIN_XI_BOX,
            w,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.w.grid()
    }
}

/// `w(τ, ξ) = (1+t) ω̄3(t, ξ√(1+t))`. On the band-limited periodic field
/// this is an exact relabeling: same samples, box shrunk by `√(1+t)`.
pub fn to_selfsimilar(w3bar: &PlaneField, t: f64) -> Result<RescaledVorticity> {
    if !(t >= 0.0) {
        return Err(NscError::param("t", format!("{t} must be >= 0")));
    }
    let s = 1.0 + t;
    let g = w3bar.grid().with_box_len(w3bar.grid().box_len / s.sqrt())?;
    let mut c = w3bar.coeffs().to_vec();
    for z in c.iter_mut() {
        *z *= s;
    }
    Ok(RescaledVorticity::new(PlaneField::from_coeffs(g, c)?, s.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub l1: f64,
    /// Bound on `|α| ∫ g` outside the ξ-box.
    pub tail_bound: f64,
}

/// `‖w − α g‖_{L¹}` over the ξ-box (`g` periodized).
pub fn oseen_distance(w: &RescaledVorticity, alpha: f64) -> Distance {
    let g = *w.grid();
    let mut d = w.w.clone();
    let mut prof = oseen::periodized_profile(&g);
    prof.scale(alpha);
    d.axpy(-1.0, &prof);
    let half = 0.5 * g.box_len;
    Distance {
        l1: sample_norm(&synthesize_plane(&d), g.cell_area(), Norm::L1),
        tail_bound: 4.0 * (-half * half / 4.0).exp() * alpha.abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `v ≈ C e^{-μ t}`; the rate is `μ`.
    Exponential,
    /// `v ≈ C (1+t)^p`; the rate is `p`.
    Algebraic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub quantity: String,
    pub model: DecayModel,
    pub rate: f64,
    /// RMS residual of the log fit.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares fit of `log v` against `t` or `log(1+t)`.
pub fn fit_decay(quantity: &str, t: &[f64], v: &[f64], model: DecayModel) -> Result<RateFit> {
    if t.len() != v.len() {
        return Err(NscError::DimensionMismatch {
            expected: t.len(),
            got: v.len(),
        });
    }
    if t.len() < MIN_FIT_SAMPLES {
        return Err(NscError::TooFewSamples {
            needed: MIN_FIT_SAMPLES,
            got: t.len(),
        });
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !(**x > 0.0)) {
        return Err(NscError::NonPositiveSample { index, value });
    }
    let xs: Vec<f64> = match model {
        DecayModel::Exponential => t.to_vec(),
        DecayModel::Algebraic => t.iter().map(|x| x.ln_1p()).collect(),
    };
    let ys: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(NscError::param("t", "fit window has zero width"));
    }
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum();
    Ok(RateFit {
        quantity: quantity.to_string(),
        model,
        rate: match model {
            DecayModel::Exponential => -slope,
            DecayModel::Algebraic => slope,
        },
        residual: (rss / n).sqrt(),
        window: (t[0], t[t.len() - 1]),
        samples: t.len(),
    })
}

/// `∇·(½ξ w − v w)` with `v = α U^G(ξ) + BS(w − α g)`, `α` the mass of `w`.
fn drift_divergence(w: &PlaneField, advect: bool) -> (PlaneField, f64) {
    let g = *w.grid();
    let ws = synthesize_plane(w);
    let alpha = g.box_len * g.box_len * w.mean();
    let mut vel = [vec![0.0; ws.len()], vec![0.0; ws.len()]];
    if advect {
        let mut pert = w.clone();
        let mut prof = oseen::periodized_profile(&g);
        prof.scale(alpha);
        pert.axpy(-1.0, &prof);
        pert.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        let [p1, p2] = spectral::biot_savart_2d(&pert);
        vel = [synthesize_plane(&p1), synthesize_plane(&p2)];
        let mut k = 0;
        for i in 0..g.nx {
            let x1 = g.x1_centered(i);
            for j in 0..g.ny {
                let u = oseen::profile_velocity([x1, g.x2_centered(j)]);
                vel[0][k] += alpha * u[0];
                vel[1][k] += alpha * u[1];
                k += 1;
            }
        }
    }
    let mut q = [vec![0.0; ws.len()], vec![0.0; ws.len()]];
    let mut vmax = 0.0f64;
    let mut k = 0;
    for i in 0..g.nx {
        let x1 = g.x1_centered(i);
        for j in 0..g.ny {
            let d = [0.5 * x1 - vel[0][k], 0.5 * g.x2_centered(j) - vel[1][k]];
            vmax = vmax.max(d[0].hypot(d[1]));
            q[0][k] = d[0] * ws[k];
            q[1][k] = d[1] * ws[k];
            k += 1;
        }
    }
    let q1 = forward_plane(&g, &q[0]).expect("plane size");
    let q2 = forward_plane(&g, &q[1]).expect("plane size");
    let mut out = PlaneField::zeros(g);
    for (idx, o) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = (g.k1_deriv(idx / g.ny), g.k2_deriv(idx % g.ny));
        *o = Complex64::new(0.0, 1.0) * (q1.coeffs()[idx] * k1 + q2.coeffs()[idx] * k2);
    }
    spectral::dealias_plane(&mut out);
    out.symmetrize();
    (out, vmax)
}

fn heat(w: &PlaneField, h: f64) -> PlaneField {
    let g = *w.grid();
    let mut out = w.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = (g.k1(idx / g.ny), g.k2(idx % g.ny));
        *c *= (-h * (k1 * k1 + k2 * k2)).exp();
    }
    out
}

fn rk2(w: &PlaneField, h: f64, advect: bool) -> Result<PlaneField> {
    let g = *w.grid();
    let (k1, vmax) = drift_divergence(w, advect);
    let kmax = g.k_unit() * ((g.nx.max(g.ny) / 2 - 1) as f64);
    let number = h * vmax * kmax;
    if number > 0.5 {
        return Err(NscError::Cfl {
            dt: h,
            max_speed: vmax,
            max_wavenumber: kmax,
            number,
            limit: 0.5,
        });
    }
    let mut s = w.clone();
    s.axpy(h, &k1);
    let (k2, _) = drift_divergence(&heat(&s, h), advect);
    let mut s = w.clone();
    s.axpy(0.5 * h, &k1);
    let mut out = heat(&s, h);
    out.axpy(0.5 * h, &k2);
    out.symmetrize();
    Ok(out)
}

/// One IF-RK2 step of the rescaled equation on a fixed ξ-grid. Diffusion is
/// exact per mode; the divergence-form drift and advection are explicit, so
/// the zero mode (mass) is untouched.
pub fn rescaled_2d_step(w: &RescaledVorticity, dtau: f64) -> Result<RescaledVorticity> {
    if !(dtau > 0.0) {
        return Err(NscError::param("dtau", format!("{dtau} must be positive")));
    }
    let next = rk2(&w.w, dtau, true)?;
    Ok(RescaledVorticity {
        tau: w.tau + dtau,
        mass: w.mass,
        flagged: w.flagged,
        w: next,
    })
}

/// `max |w⁺ − w| / max |w|` after one step.
pub fn fixed_point_residual(w: &RescaledVorticity, dtau: f64) -> Result<f64> {
    let next = rescaled_2d_step(w, dtau)?;
    let a = synthesize_plane(&w.w);
    let b = synthesize_plane(&next.w);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(diff / scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FokkerPlanckRow {
    pub tau: f64,
    /// `f64::INFINITY` encodes `p = ∞`.
    pub p: f64,
    pub norm: f64,
    /// `‖w0‖₁ ‖G_a‖_p = ‖w0‖₁ (4πa)^{-(1-1/p)} p^{-1/p}`.
    pub sharp_bound: f64,
    /// `‖w0‖₁ / (4π a^{1-1/p})`.
    pub printed_bound: f64,
    pub margin: f64,
    pub holds: bool,
    pub holds_printed: bool,
}

fn lp(samples: &[f64], area: f64, p: f64) -> f64 {
    if p.is_infinite() {
        sample_norm(samples, area, Norm::Linf)
    } else if p == 1.0 {
        sample_norm(samples, area, Norm::L1)
    } else {
        (area * samples.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

/// Relative slack for the bound comparison: `p = 1` is an equality case for
/// nonnegative data and the discrete flow is only approximately positive.
pub const FP_SLACK: f64 = 1e-6;

/// Evolve the linear part `Δw + ∇·(½ξ w)` from `w0` and compare
/// `‖S(τ)w0‖_{L^p}` with the smoothing bound, `a(τ) = 1 − e^{−τ}`.
pub fn fokker_planck_bound_check(
    w0: &PlaneField,
    tau_list: &[f64],
    p_list: &[f64],
    dtau: f64,
) -> Result<Vec<FokkerPlanckRow>> {
    if !(dtau > 0.0) {
        return Err(NscError::param("dtau", "must be positive"));
    }
    let g = *w0.grid();
    let m1 = norms::norm_plane(w0, Norm::L1)?;
    let mut taus = tau_list.to_vec();
    taus.sort_by(f64::total_cmp);
    let mut w = w0.clone();
    let mut tau = 0.0;
    let mut out = Vec::new();
    for &target in &taus {
        while tau < target - 1e-12 {
            let h = dtau.min(target - tau);
            w = rk2(&w, h, false)?;
            tau += h;
        }
        let s = synthesize_plane(&w);
        let a = -(-target).exp_m1();
        for &p in p_list {
            let e = if p.is_infinite() { 1.0 } else { 1.0 - 1.0 / p };
            let pf = if p.is_infinite() { 1.0 } else { p.powf(-1.0 / p) };
            let norm = lp(&s, g.cell_area(), p);
            let sharp = m1 * (4.0 * PI * a).powf(-e) * pf;
            let printed = m1 / (4.0 * PI * a.powf(e));
            out.push(FokkerPlanckRow {
                tau: target,
                p,
                norm,
                sharp_bound: sharp,
                printed_bound: printed,
                margin: sharp - norm,
                holds: norm <= sharp * (1.0 + FP_SLACK),
                holds_printed: norm <= printed,
            });
        }
    }
    Ok(out)
}

/// One line of the convergence report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub t: f64,
    pub tau: f64,
    pub oseen_l1_distance: f64,
    pub tail_bound: f64,
    pub flagged: bool,
    pub mass: f64,
    pub h1_tilde: f64,
    pub h1_u3bar: f64,
    /// `(1+t) ‖ω̄3‖²`.
    pub scaled_l2_w3bar_sq: f64,
    /// `t(1+t) ‖∇ω̄3‖²`.
    pub scaled_grad_w3bar_sq: f64,
}

pub fn convergence_row(state: &FlowState, alpha: f64) -> Result<ConvergenceRow> {
    let t = state.t;
    let w3 = state.total_w3bar();
    let r = to_selfsimilar(&w3, t)?;
    let d = oseen_distance(&r, alpha);
    let tilde = spectral::fluctuation(&state.u);
    let u3 = state.u.comps[2].plane();
    Ok(ConvergenceRow {
        t,
        tau: r.tau,
        oseen_l1_distance: d.l1,
        tail_bound: d.tail_bound,
        flagged: r.flagged,
        mass: r.mass,
        h1_tilde: norms::norm_vector(&tilde, Norm::Hs(1.0))?,
        h1_u3bar: norms::norm_plane(&u3, Norm::Hs(1.0))?,
        scaled_l2_w3bar_sq: (1.0 + t) * norms::norm_plane(&w3, Norm::L2)?.powi(2),
        scaled_grad_w3bar_sq: t * (1.0 + t) * norms::plane_grad_l2(&w3).powi(2),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Fits that could be computed; failures are listed in `degenerate`.
    pub fits: Vec<RateFit>,
    pub degenerate: Vec<(String, String)>,
}

/// Series of Oseen distances and norms plus decay fits:
/// `‖ũ‖_{H¹}` exponential, `‖ū3‖_{H¹}` and the Oseen distance algebraic in `1+t`.
pub fn convergence_report(states: &[FlowState], alpha: f64) -> Result<ConvergenceReport> {
    let rows = states
        .iter()
        .map(|s| convergence_row(s, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(report_from_rows(rows))
}

pub fn report_from_rows(rows: Vec<ConvergenceRow>) -> ConvergenceReport {
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let mut fits = Vec::new();
    let mut degenerate = Vec::new();
    let series: [(&str, DecayModel, fn(&ConvergenceRow) -> f64); 3] = [
        ("h1_tilde", DecayModel::Exponential, |r| r.h1_tilde),
        ("h1_u3bar", DecayModel::Algebraic, |r| r.h1_u3bar),
        ("oseen_l1_distance", DecayModel::Algebraic, |r| r.oseen_l1_distance),
    ];
    for (name, model, f) in series {
        let v: Vec<f64> = rows.iter().map(f).collect();
        match fit_decay(name, &t, &v, model) {
            Ok(fit) => fits.push(fit),
            Err(e) => degenerate.push((name.to_string(), e.to_string())),
        }
    }
    ConvergenceReport {
        rows,
        fits,
        degenerate,
    }
}

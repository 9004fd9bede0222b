//! Time-integrated sup norm `∫₀^T ‖e^{-tM}λ₀‖_{L∞} dt` across rotation speeds.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{NscError, Result};
use crate::field::{synthesize, SpectralVectorField};
use crate::norms::{magnitude, sample_norm, Norm};
use crate::rossby::LinearPropagator;

/// Integration stops once the coefficient ℓ¹ bound falls below this
/// fraction of the running integral; the remainder is reported as a tail bound.
const TAIL_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrichartzRow {
    pub omega: f64,
    pub integral: f64,
    /// log-log slope against the previous row (NaN for the first).
    pub slope_fit_local: f64,
    /// Rigorous bound on the part of `[0, T]` not integrated.
    pub tail_bound: f64,
    /// End of the integrated window.
    pub t_effective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrichartzReport {
    pub rows: Vec<StrichartzRow>,
    /// Least-squares slope of `log integral` against `log⟨Ω⟩`.
    pub slope: f64,
    /// Set when the slope is undefined (fewer than two Ω, or a zero integral).
    pub slope_degenerate: bool,
}

/// `⟨Ω⟩ = (1 + Ω²)^{1/2}`.
pub fn japanese(omega: f64) -> f64 {
    (1.0 + omega * omega).sqrt()
}

fn linf(u: &SpectralVectorField) -> f64 {
    let comps: Vec<Vec<f64>> = u.comps.iter().map(synthesize).collect();
    sample_norm(&magnitude(&comps), 1.0, Norm::Linf)
}

/// `Σ |û|` over modes: an upper bound for `‖u‖_{L∞}`.
fn coeff_l1(u: &SpectralVectorField) -> f64 {
    let g = u.grid();
    (0..g.len())
        .map(|i| {
            u.comps
                .iter()
                .map(|c| c.coeffs()[i].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

fn integrate_one(u0: &SpectralVectorField, omega: f64, t_end: f64, dt: f64) -> Result<(f64, f64, f64)> {
    let steps = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / steps as f64;
    let prop = LinearPropagator::new(*u0.grid(), h, omega)?;
    let mut u = u0.clone();
    let mut prev = linf(&u);
    let mut integral = 0.0;
    let decay = 4.0 * PI * PI;
    for i in 1..=steps {
        prop.apply_in_place(&mut u);
        let cur = linf(&u);
        integral += 0.5 * h * (prev + cur);
        prev = cur;
        let t = i as f64 * h;
        let bound = coeff_l1(&u);
        if i < steps && bound * (1.0 - (-decay * (t_end - t)).exp()) / decay <= TAIL_CUTOFF * integral {
            let tail = bound * (1.0 - (-decay * (t_end - t)).exp()) / decay;
            return Ok((integral, tail, t));
        }
    }
    Ok((integral, 0.0, t_end))
}

/// Propagate `u0` (already cut off to a Fourier ball, vertical mean zero)
/// for each `Ω`, sampling `‖·‖_{L∞}` every `dt_sample` up to `t_end` and
/// integrating by the trapezoid rule. Rows are sorted by `Ω`.
pub fn strichartz_experiment(
    u0: &SpectralVectorField,
    omega_list: &[f64],
    t_end: f64,
    dt_sample: f64,
) -> Result<StrichartzReport> {
    if omega_list.is_empty() {
        return Err(NscError::param("omega_list", "must not be empty"));
    }
    if !(t_end > 0.0) || !(dt_sample > 0.0) || dt_sample > t_end {
        return Err(NscError::param(
            "T/dt_sample",
            format!("need 0 < dt_sample ({dt_sample}) <= T ({t_end})"),
        ));
    }
    let mean = u0.vertical_mean_magnitude();
    if mean > 1e-12 * u0.max_abs().max(f64::MIN_POSITIVE) {
        return Err(NscError::NonzeroVerticalMean { magnitude: mean });
    }
    let div = u0.divergence_residual();
    if div > 1e-8 {
        return Err(NscError::DivergenceViolation {
            residual: div,
            tolerance: 1e-8,
        });
    }
    let mut omegas = omega_list.to_vec();
    omegas.sort_by(f64::total_cmp);

    let raw: Vec<(f64, f64, f64)> = omegas
        .par_iter()
        .map(|&om| integrate_one(u0, om, t_end, dt_sample))
        .collect::<Result<_>>()?;

    let mut rows: Vec<StrichartzRow> = omegas
        .iter()
        .zip(&raw)
        .map(|(&omega, &(integral, tail_bound, t_effective))| StrichartzRow {
            omega,
            integral,
            slope_fit_local: f64::NAN,
            tail_bound,
            t_effective,
        })
        .collect();
    for i in 1..rows.len() {
        let (a, b) = (rows[i - 1], rows[i]);
        rows[i].slope_fit_local = (b.integral / a.integral).ln()
            / (japanese(b.omega) / japanese(a.omega)).ln();
    }

    let usable = rows.len() >= 2 && rows.iter().all(|r| r.integral > 0.0);
    let slope = if usable {
        let xs: Vec<f64> = rows.iter().map(|r| japanese(r.omega).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.integral.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    Ok(StrichartzReport {
        rows,
        slope,
        slope_degenerate: !slope.is_finite(),
    })
}

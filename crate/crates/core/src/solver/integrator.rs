//! Integrating-factor Runge-Kutta stepping and the run loop.
//!
//! The stiff linear part (heat + Coriolis) is applied exactly through the
//! cached mode propagators; only the nonlinear term is explicit.

use std::path::PathBuf;

use super::nonlinear::nonlinear_term;
use super::FlowState;
use crate::error::{NscError, Result};
use crate::field::SpectralVectorField;
use crate::rossby::{fourier_cutoff, CutoffSpec, LinearPropagator};
use crate::spectral;

pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    IfRk2,
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub integrator: Integrator,
    /// When false the nonlinear term is forced to zero (linear Rossby flow).
    pub nonlinear: bool,
    pub cfl_limit: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            integrator: Integrator::IfRk2,
            nonlinear: true,
            cfl_limit: CFL_LIMIT,
        }
    }
}

/// Fixed-step integrator with cached propagators `E(dt)` and `E(dt/2)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    dt: f64,
    opts: StepOptions,
    full: LinearPropagator,
    half: LinearPropagator,
}

impl Stepper {
    pub fn new(grid: crate::Grid, dt: f64, omega: f64, opts: StepOptions) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(NscError::param("dt", format!("{dt} must be positive")));
        }
        Ok(Stepper {
            dt,
            opts,
            full: LinearPropagator::new(grid, dt, omega)?,
            half: LinearPropagator::new(grid, 0.5 * dt, omega)?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn omega(&self) -> f64 {
        self.full.omega()
    }

    fn eval(&self, u: &SpectralVectorField, t: f64, alpha: f64) -> Result<(SpectralVectorField, f64)> {
        if self.opts.nonlinear {
            nonlinear_term(u, t, alpha)
        } else {
            Ok((SpectralVectorField::zeros(*u.grid()), 0.0))
        }
    }

    fn cfl(&self, speed: f64, grid: &crate::Grid) -> Result<()> {
        let kmax = grid.max_wavenumber();
        let number = self.dt * speed * kmax;
        if number > self.opts.cfl_limit {
            return Err(NscError::Cfl {
                dt: self.dt,
                max_speed: speed,
                max_wavenumber: kmax,
                number,
                limit: self.opts.cfl_limit,
            });
        }
        Ok(())
    }

    /// One step of `v` with the nonlinear term evaluated at `v + λ`, where
    /// `λ` evolves by the linear flow alone. Returns the new `v` and `λ`.
    fn advance(
        &self,
        state: &FlowState,
        lambda: Option<&SpectralVectorField>,
    ) -> Result<(FlowState, Option<SpectralVectorField>)> {
        if state.omega != self.omega() {
            return Err(NscError::param("omega", "state and stepper disagree"));
        }
        let h = self.dt;
        let (t, a) = (state.t, state.alpha_background);
        let v = &state.u;
        let with = |x: &SpectralVectorField, l: Option<&SpectralVectorField>| match l {
            Some(l) => x.add(l),
            None => x.clone(),
        };
        let lam_half = lambda.map(|l| self.half.apply(l));
        let lam_full = lambda.map(|l| self.full.apply(l));

        let (k1, speed) = self.eval(&with(v, lambda), t, a)?;
        self.cfl(speed, v.grid())?;

        let mut next = match self.opts.integrator {
            Integrator::IfRk2 => {
                let mut s = v.clone();
                s.axpy(h, &k1);
                let ustar = self.full.apply(&s);
                let (k2, _) = self.eval(&with(&ustar, lam_full.as_ref()), t + h, a)?;
                let mut s = v.clone();
                s.axpy(0.5 * h, &k1);
                let mut out = self.full.apply(&s);
                out.axpy(0.5 * h, &k2);
                out
            }
            Integrator::IfRk4 => {
                let mut s = v.clone();
                s.axpy(0.5 * h, &k1);
                let a2 = self.half.apply(&s);
                let (k2, _) = self.eval(&with(&a2, lam_half.as_ref()), t + 0.5 * h, a)?;
                let eh = self.half.apply(v);
                let mut b = eh.clone();
                b.axpy(0.5 * h, &k2);
                let (k3, _) = self.eval(&with(&b, lam_half.as_ref()), t + 0.5 * h, a)?;
                let mut c = self.full.apply(v);
                c.axpy(h, &self.half.apply(&k3));
                let (k4, _) = self.eval(&with(&c, lam_full.as_ref()), t + h, a)?;
                let mut out = self.full.apply(v);
                out.axpy(h / 6.0, &self.full.apply(&k1));
                let mut mid = k2;
                mid.axpy(1.0, &k3);
                out.axpy(h / 3.0, &self.half.apply(&mid));
                out.axpy(h / 6.0, &k4);
                out
            }
        };
        next.symmetrize();
        Ok((
            FlowState {
                u: next,
                t: t + h,
                omega: state.omega,
                alpha_background: a,
            },
            lam_full,
        ))
    }

    pub fn step(&self, state: &FlowState) -> Result<FlowState> {
        self.advance(state, None).map(|(s, _)| s)
    }

    /// Step the remainder `v = u - λ`; `λ` follows the linear flow exactly.
    pub fn step_split(
        &self,
        v: &FlowState,
        lambda: &SpectralVectorField,
    ) -> Result<(FlowState, SpectralVectorField)> {
        self.advance(v, Some(lambda))
            .map(|(s, l)| (s, l.expect("lambda propagated")))
    }
}

/// Single IF-RK2 step with default options.
pub fn step(state: &FlowState, dt: f64) -> Result<FlowState> {
    Stepper::new(*state.grid(), dt, state.omega, StepOptions::default())?.step(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub options: StepOptions,
    /// Observer cadence in steps.
    pub monitor_every: usize,
    /// Checkpoint cadence in steps (requires `checkpoint_dir`).
    pub checkpoint_every: Option<usize>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Cutoff radius of the `λ/r` split; `Some(0.0)` gives `λ ≡ 0`.
    pub split_radius: Option<f64>,
}

impl SimConfig {
    pub fn new(dt: f64, t_max: f64) -> Self {
        SimConfig {
            dt,
            t_max,
            options: StepOptions::default(),
            monitor_every: 1,
            checkpoint_every: None,
            checkpoint_dir: None,
            split_radius: None,
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// What an observer sees at each sampled step. `state` is always the full
/// flow; `lambda` is present for split runs.
pub struct Snapshot<'a> {
    pub step: usize,
    pub state: &'a FlowState,
    pub lambda: Option<&'a SpectralVectorField>,
}

pub fn checkpoint_name(step: usize) -> String {
    format!("ckpt_{step:07}.nscf")
}

/// Run to `t_max`, calling `observer` at step 0, every `monitor_every`
/// steps and at the end. Non-finite values abort the run after saving the
/// last valid state (when a checkpoint directory is configured).
pub fn simulate(
    initial: FlowState,
    cfg: &SimConfig,
    mut observer: impl FnMut(&Snapshot) -> Result<()>,
) -> Result<FlowState> {
    if !(cfg.t_max >= 0.0) || !cfg.t_max.is_finite() {
        return Err(NscError::param("t_max", format!("{} must be >= 0", cfg.t_max)));
    }
    if cfg.monitor_every == 0 {
        return Err(NscError::param("monitor_every", "must be >= 1"));
    }
    if cfg.checkpoint_every == Some(0) {
        return Err(NscError::param("checkpoint_every", "must be >= 1"));
    }
    let res = initial.u.divergence_residual();
    if res > 1e-10 {
        return Err(NscError::DivergenceViolation {
            residual: res,
            tolerance: 1e-10,
        });
    }
    let grid = *initial.grid();
    let stepper = Stepper::new(grid, cfg.dt, initial.omega, cfg.options)?;
    let n = cfg.n_steps();

    // split: v = ū + r carried by the stepper, λ alongside
    let mut lambda = match cfg.split_radius {
        None => None,
        Some(r) if r == 0.0 => Some(SpectralVectorField::zeros(grid)),
        Some(r) => {
            let spec = CutoffSpec::new(r)?;
            let (low, _) = fourier_cutoff(&spectral::fluctuation(&initial.u), &spec);
            Some(low)
        }
    };
    let mut v = initial.clone();
    if let Some(l) = &lambda {
        v.u = v.u.sub(l);
    }

    let full = |v: &FlowState, l: &Option<SpectralVectorField>| match l {
        Some(l) => {
            let mut s = v.clone();
            s.u = s.u.add(l);
            s
        }
        None => v.clone(),
    };

    let save = |s: &FlowState, name: &str| -> Result<Option<PathBuf>> {
        match &cfg.checkpoint_dir {
            Some(dir) => {
                let p = dir.join(name);
                s.save(&p)?;
                Ok(Some(p))
            }
            None => Ok(None),
        }
    };

    let mut current = full(&v, &lambda);
    observer(&Snapshot {
        step: 0,
        state: &current,
        lambda: lambda.as_ref(),
    })?;
    if cfg.checkpoint_every.is_some() {
        save(&current, &checkpoint_name(0))?;
    }

    for k in 1..=n {
        let (nv, nl) = match &lambda {
            Some(l) => {
                let (a, b) = stepper.step_split(&v, l)?;
                (a, Some(b))
            }
            None => (stepper.step(&v)?, None),
        };
        // re-anchor time to avoid drift from repeated addition
        let mut nv = nv;
        nv.t = initial.t + k as f64 * cfg.dt;
        let next = full(&nv, &nl);
        if !next.is_finite() {
            let ck = save(&current, "ckpt_last_valid.nscf")?;
            return Err(NscError::NonFinite {
                t: next.t,
                last_valid_t: current.t,
                checkpoint: ck,
            });
        }
        v = nv;
        lambda = nl;
        current = next;
        if k % cfg.monitor_every == 0 || k == n {
            observer(&Snapshot {
                step: k,
                state: &current,
                lambda: lambda.as_ref(),
            })?;
        }
        if let Some(every) = cfg.checkpoint_every {
            if k % every == 0 || k == n {
                save(&current, &checkpoint_name(k))?;
            }
        }
    }
    Ok(current)
}

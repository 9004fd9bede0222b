//! Nonlinear time integration of the rotating Navier-Stokes system.
//!
//! A state is `u = α u^G(t) + u'`: the Lamb-Oseen vortex of circulation
//! `α = alpha_background` is carried in closed form (it is an exact solution
//! for every `Ω`), and only the periodic remainder `u'` lives on the grid.

pub mod initial;
pub mod integrator;
pub mod monitors;
pub mod nonlinear;

use std::path::Path;

use num_complex::Complex64;

use crate::checkpoint::{self, Checkpoint};
use crate::error::{NscError, Result};
use crate::field::{synthesize_plane, PlaneField, SpectralField, SpectralVectorField};
use crate::grid::Grid;
use crate::norms;
use crate::oseen;
use crate::spectral;

pub use initial::{make_initial_data, BackgroundMode, Random3d, Recipe};
pub use integrator::{simulate, step, Integrator, SimConfig, Snapshot, StepOptions, Stepper};
pub use monitors::{energy_monitors, sample_monitors, EnergyMonitors, MonitorConstants, MonitorSample};
pub use nonlinear::{nonlinear_rhs, nonlinear_term};

/// Divergence residual above which the nonlinear term refuses its input.
pub const DIV_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    /// Periodic part `u'`.
    pub u: SpectralVectorField,
    pub t: f64,
    pub omega: f64,
    pub alpha_background: f64,
}

impl FlowState {
    pub fn new(u: SpectralVectorField, omega: f64) -> Self {
        FlowState {
            u,
            t: 0.0,
            omega,
            alpha_background: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// `α Θ(t)`: the background vorticity periodized on the box.
    pub fn background_vorticity(&self) -> PlaneField {
        let mut w = oseen::periodized_vorticity(self.grid(), self.t);
        w.scale(self.alpha_background);
        w
    }

    /// Vertical vorticity of the 2D part including the background.
    pub fn total_w3bar(&self) -> PlaneField {
        let p = self.u.planes();
        let mut w = spectral::plane_curl(&p[0], &p[1]);
        if self.alpha_background != 0.0 {
            w.axpy(1.0, &self.background_vorticity());
        }
        w
    }

    /// Physical samples of the horizontal 2D velocity `ū_h` including the
    /// background, on the centered plane.
    pub fn total_ubar_samples(&self) -> [Vec<f64>; 3] {
        let p = self.u.planes();
        let mut s = [
            synthesize_plane(&p[0]),
            synthesize_plane(&p[1]),
            synthesize_plane(&p[2]),
        ];
        if self.alpha_background != 0.0 {
            let bg = oseen::velocity_samples(self.grid(), self.t);
            for c in 0..2 {
                for (v, b) in s[c].iter_mut().zip(&bg[c]) {
                    *v += self.alpha_background * b;
                }
            }
        }
        s
    }

    /// `α + ∫ curl₃ u'`; the periodic integral is the zero mode times `L²`.
    pub fn circulation(&self) -> f64 {
        let p = self.u.planes();
        let w = spectral::plane_curl(&p[0], &p[1]);
        self.alpha_background + self.grid().box_len.powi(2) * w.mean()
    }

    pub fn x_norm(&self) -> f64 {
        norms::x_norm_with_vorticity(&self.u, &self.total_w3bar())
    }

    /// NSCF1 image: the three velocity components, plus a fourth component
    /// carrying `α` in its zero mode when a background is present.
    pub fn to_checkpoint_bytes(&self) -> Result<Vec<u8>> {
        let g = *self.grid();
        let c = &self.u.comps;
        if self.alpha_background != 0.0 {
            let mut a = SpectralField::zeros(g);
            a.coeffs_mut()[0] = Complex64::new(self.alpha_background, 0.0);
            checkpoint::encode(&g, self.t, self.omega, &[&c[0], &c[1], &c[2], &a])
        } else {
            checkpoint::encode(&g, self.t, self.omega, &[&c[0], &c[1], &c[2]])
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::atomic_write(path, &self.to_checkpoint_bytes()?)
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self> {
        let n = ck.comps.len();
        if n != 3 && n != 4 {
            return Err(NscError::Format(format!("expected 3 or 4 components, found {n}")));
        }
        let mut it = ck.comps.into_iter();
        let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        let alpha = it.next().map(|f| f.coeffs()[0].re).unwrap_or(0.0);
        Ok(FlowState {
            u: SpectralVectorField::new(a, b, c)?,
            t: ck.t,
            omega: ck.omega,
            alpha_background: alpha,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(checkpoint::read_checkpoint(path)?)
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .comps
            .iter()
            .all(|c| c.coeffs().iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

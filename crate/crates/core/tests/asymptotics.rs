use std::f64::consts::PI;

use nsc_core::asymptotics::{
    convergence_report, fokker_planck_bound_check, oseen_distance, rescaled_2d_step,
    to_selfsimilar, DecayModel, RescaledVorticity,
};
use nsc_core::field::{forward_plane, sample_plane};
use nsc_core::oseen;
use nsc_core::solver::{make_initial_data, simulate, BackgroundMode, Recipe, SimConfig};
use nsc_core::Grid;
use proptest::prelude::*;

fn heat_gaussian(g: &Grid, b: f64) -> RescaledVorticity {
    let s = sample_plane(g, |x, y| (-(x * x + y * y) / (4.0 * b)).exp() / (4.0 * PI * b));
    RescaledVorticity::new(forward_plane(g, &s).unwrap(), 0.0)
}

#[test]
fn fokker_planck_maps_gaussians_to_gaussians() {
    // S(τ) G_b = G_{b e^{-τ} + 1 - e^{-τ}}
    let g = Grid::new(128, 128, 4, 24.0).unwrap();
    let b = 0.3;
    let w0 = heat_gaussian(&g, b).w;
    let rows = fokker_planck_bound_check(&w0, &[1.0], &[f64::INFINITY], 2e-3).unwrap();
    let bt = b * (-1.0f64).exp() + 1.0 - (-1.0f64).exp();
    let expect = 1.0 / (4.0 * PI * bt);
    assert!((rows[0].norm - expect).abs() < 1e-5 * expect, "{} vs {expect}", rows[0].norm);
}

#[test]
fn smoothing_bound_holds_and_printed_form_does_not() {
    let g = Grid::new(128, 128, 4, 24.0).unwrap();
    let ps = [1.0, 2.0, 4.0, f64::INFINITY];
    for w0 in [oseen::periodized_profile(&g), heat_gaussian(&g, 0.1).w] {
        let rows = fokker_planck_bound_check(&w0, &[0.25, 1.0, 3.0], &ps, 3e-3).unwrap();
        assert_eq!(rows.len(), 12);
        for r in &rows {
            assert!(r.holds, "{r:?}");
        }
    }
    // g is invariant, so ‖g‖_1 = 1 > 1/(4π) whatever τ is
    let rows = fokker_planck_bound_check(&oseen::periodized_profile(&g), &[3.0], &ps, 3e-3).unwrap();
    assert!(!rows[0].holds_printed);
    assert!((rows[0].norm - 1.0).abs() < 1e-9);
}

#[test]
fn step_rejects_cfl_violation_and_bad_step() {
    let g = Grid::new(64, 64, 4, 24.0).unwrap();
    let r = RescaledVorticity::new(oseen::periodized_profile(&g), 0.0);
    assert!(rescaled_2d_step(&r, 0.0).is_err());
    assert!(matches!(rescaled_2d_step(&r, 1.0), Err(nsc_core::NscError::Cfl { .. })));
}

#[test]
fn pure_oseen_report_is_flat_zero() {
    let g = Grid::new(64, 64, 4, 40.0).unwrap();
    let s0 = make_initial_data(&g, &Recipe::Oseen { alpha: 1.0 }, BackgroundMode::Analytic).unwrap();
    let mut states = Vec::new();
    let mut cfg = SimConfig::new(0.05, 1.0);
    cfg.monitor_every = 2;
    simulate(s0, &cfg, |snap| {
        states.push(snap.state.clone());
        Ok(())
    })
    .unwrap();
    let rep = convergence_report(&states, 1.0).unwrap();
    assert_eq!(rep.rows.len(), 11);
    for r in &rep.rows {
        assert!(r.oseen_l1_distance < 1e-8, "{r:?}");
        assert!((r.mass - 1.0).abs() < 1e-10);
        assert_eq!(r.h1_tilde, 0.0);
    }
    // zero series cannot be fitted on a log scale
    assert!(rep.degenerate.iter().any(|(q, _)| q == "h1_tilde"));
}

#[test]
fn perturbed_vortex_approaches_oseen() {
    let g = Grid::new(64, 64, 4, 40.0).unwrap();
    let recipe = Recipe::OseenPlus2dPerturbation {
        alpha: 1.0,
        amplitude: 0.5,
        seed: 3,
    };
    let s0 = make_initial_data(&g, &recipe, BackgroundMode::Analytic).unwrap();
    let mut states = Vec::new();
    let mut cfg = SimConfig::new(0.02, 4.0);
    cfg.monitor_every = 20;
    simulate(s0, &cfg, |snap| {
        states.push(snap.state.clone());
        Ok(())
    })
    .unwrap();
    let rep = convergence_report(&states, 1.0).unwrap();
    let d: Vec<f64> = rep.rows.iter().map(|r| r.oseen_l1_distance).collect();
    assert!((d[0] - 0.5).abs() < 1e-6, "{}", d[0]);
    assert!(d.last().unwrap() < &(0.6 * d[0]), "{d:?}");
    for r in &rep.rows {
        assert!((r.mass - 1.0).abs() < 1e-10);
    }
    let fit = rep.fits.iter().find(|f| f.quantity == "oseen_l1_distance").unwrap();
    assert_eq!(fit.model, DecayModel::Algebraic);
    assert!(fit.rate < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rescaling_preserves_mass_and_l1(t in 0.0f64..20.0, alpha in -3.0f64..3.0) {
        let g = Grid::new(64, 64, 4, 40.0).unwrap();
        let mut w = oseen::periodized_vorticity(&g, 0.0);
        w.scale(alpha);
        let r = to_selfsimilar(&w, t).unwrap();
        prop_assert!((r.mass - alpha).abs() < 1e-10 * alpha.abs().max(1.0));
        prop_assert!((r.tau - t.ln_1p()).abs() < 1e-14);
        prop_assert!((r.grid().box_len - 40.0 / (1.0 + t).sqrt()).abs() < 1e-12);
        // L¹ norms of ω̄3 and w agree
        let l1w = nsc_core::norms::norm_plane(&w, nsc_core::Norm::L1).unwrap();
        let l1r = nsc_core::norms::norm_plane(&r.w, nsc_core::Norm::L1).unwrap();
        prop_assert!((l1w - l1r).abs() < 1e-10 * l1w.max(1e-300));
        prop_assert!(oseen_distance(&r, 0.0).l1 >= 0.0);
    }
}

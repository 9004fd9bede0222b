use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nsc_core::asymptotics::{convergence_row, report_from_rows, DecayModel};
use nsc_core::kernel::{lemma_b2_check_on, ratio_spread};
use nsc_core::rossby::{fourier_cutoff, CutoffSpec, LinearPropagator};
use nsc_core::solver::{
    energy_monitors, make_initial_data, sample_monitors, simulate, FlowState,
    MonitorConstants, MonitorSample, Random3d, Recipe,
};
use nsc_core::strichartz::strichartz_experiment;
use nsc_core::{norms, spectral, Grid, Norm};
use serde::Serialize;

use crate::config::{ConvergenceConfig, Experiment, KernelConfig, RossbyConfig, RunConfig, StrichartzConfig};
use crate::output::{csv_bytes, num, Outputs};
use crate::CliError;

pub struct Context {
    pub config: RunConfig,
    /// Directory of the config file; relative input paths resolve here.
    pub base: PathBuf,
}

fn initial_state(ctx: &Context) -> Result<FlowState, CliError> {
    let grid = ctx.config.grid()?;
    let mut s = make_initial_data(&grid, &ctx.config.recipe(&ctx.base), ctx.config.background())?;
    s.omega = ctx.config.run.omega;
    Ok(s)
}

const MONITOR_HEADER: [&str; 20] = [
    "t", "l2_u3bar", "h1_u3bar", "l1_w3bar", "l2_w3bar", "h1_tilde", "l4_tilde", "circulation",
    "phi", "sys1_lhs", "sys1_rhs", "sys2_lhs", "sys2_rhs", "sys3_lhs", "sys3_rhs", "sys4_lhs",
    "sys4_rhs", "sys5_lhs", "sys5_rhs", "x_norm",
];

/// Run the configured simulation, writing checkpoints (if requested) under
/// `out/checkpoints`; returns the sampled monitors and the final state.
fn run_simulation(
    ctx: &Context,
    out: &mut Outputs,
    checkpoint_every: Option<usize>,
) -> Result<(Vec<MonitorSample>, FlowState), CliError> {
    let s0 = initial_state(ctx)?;
    let mut cfg = ctx.config.sim_config();
    cfg.checkpoint_every = checkpoint_every;
    let ck_dir = out.path("checkpoints");
    cfg.checkpoint_dir = Some(ck_dir.clone());
    std::fs::create_dir_all(&ck_dir)?;
    let mut samples = Vec::new();
    let result = simulate(s0, &cfg, |snap| {
        samples.push(sample_monitors(snap.state, snap.lambda));
        Ok(())
    });
    // checkpoints are part of the outputs even when the run aborted
    let mut names: Vec<String> = std::fs::read_dir(&ck_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".nscf"))
        .collect();
    names.sort();
    for n in names {
        out.record(&format!("checkpoints/{n}"))?;
    }
    let last = result?;
    Ok((samples, last))
}

fn write_monitors(out: &mut Outputs, samples: &[MonitorSample]) -> Result<nsc_core::solver::EnergyMonitors, CliError> {
    let em = energy_monitors(samples, MonitorConstants::default());
    let rows: Vec<Vec<String>> = em
        .rows
        .iter()
        .map(|r| {
            let s = &r.sample;
            let mut v = vec![
                num(s.t),
                num(s.l2_u3bar_sq.sqrt()),
                num(s.h1_u3bar),
                num(s.l1_w3bar),
                num(s.l2_w3bar_sq.sqrt()),
                num(s.h1_tilde),
                num(s.l4_tilde),
                num(s.circulation),
                num(r.phi),
            ];
            for q in &r.sys {
                v.push(num(q.lhs));
                v.push(num(q.rhs));
            }
            v.push(num(s.x_norm));
            v
        })
        .collect();
    out.write("monitors.csv", &csv_bytes(&MONITOR_HEADER, &rows)?)?;
    Ok(em)
}

#[derive(Serialize)]
struct SimulateSummary {
    steps: usize,
    t_final: f64,
    circulation_initial: f64,
    circulation_final: f64,
    x_norm_final: f64,
}

pub fn simulate_cmd(ctx: &Context, out: &mut Outputs) -> Result<(), CliError> {
    let (samples, last) = run_simulation(ctx, out, ctx.config.run.checkpoint_every)?;
    write_monitors(out, &samples)?;
    out.write("final.nscf", &last.to_checkpoint_bytes()?)?;
    out.write_toml(
        "summary.toml",
        &SimulateSummary {
            steps: ctx.config.sim_config().n_steps(),
            t_final: last.t,
            circulation_initial: samples.first().map(|s| s.circulation).unwrap_or(f64::NAN),
            circulation_final: last.circulation(),
            x_norm_final: last.x_norm(),
        },
    )
}

#[derive(Serialize)]
struct EnergySummary {
    samples: usize,
    tol: f64,
    violations: usize,
    worst_relative: [f64; 5],
    pass: bool,
}

pub fn energy_check_cmd(ctx: &Context, out: &mut Outputs) -> Result<(), CliError> {
    let (samples, _) = run_simulation(ctx, out, ctx.config.run.checkpoint_every)?;
    let em = write_monitors(out, &samples)?;
    let mut header = vec!["t".to_string(), "phi".to_string()];
    for k in 1..=5 {
        for part in ["lhs", "rhs", "relative"] {
            header.push(format!("sys{k}_{part}"));
        }
    }
    let rows: Vec<Vec<String>> = em
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![num(r.sample.t), num(r.phi)];
            for q in &r.sys {
                let rel = if q.scale > 0.0 { q.residual() / q.scale } else { 0.0 };
                v.extend([num(q.lhs), num(q.rhs), num(rel)]);
            }
            v
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write("energy.csv", &csv_bytes(&h, &rows)?)?;
    let violations = em.violations().len();
    let summary = EnergySummary {
        samples: em.rows.len(),
        tol: em.constants.tol,
        violations,
        worst_relative: em.worst_relative(),
        pass: violations == 0,
    };
    eprintln!(
        "energy-check: {} samples, {} violations (tol {:e})",
        summary.samples, violations, summary.tol
    );
    out.write_toml("summary.toml", &summary)
}

#[derive(Serialize)]
struct StrichartzSummary {
    slope: f64,
    slope_degenerate: bool,
    datum_l2: f64,
    cutoff_radius: f64,
}

/// Random vertical-mean-free datum restricted to the cutoff ball and
/// rescaled to the requested L² size.
pub fn strichartz_datum(grid: &Grid, cfg: &StrichartzConfig, seed: u64) -> Result<nsc_core::SpectralVectorField, CliError> {
    let recipe = Recipe::Random3d(Random3d {
        slope: cfg.slope,
        amplitude: 1.0,
        seed,
        band: (0.0, f64::INFINITY),
        zero_vertical_mean: true,
    });
    let s = make_initial_data(grid, &recipe, Default::default())?;
    let (mut low, _) = fourier_cutoff(&s.u, &CutoffSpec::new(cfg.cutoff_radius)?);
    let n = norms::norm_vector(&low, Norm::L2)?;
    if n > 0.0 {
        low.scale(cfg.amplitude / n);
    }
    Ok(low)
}

pub fn strichartz_cmd(ctx: &Context, out: &mut Outputs) -> Result<(), CliError> {
    let cfg = ctx.config.strichartz.clone().unwrap_or_default();
    let grid = ctx.config.grid()?;
    let u0 = strichartz_datum(&grid, &cfg, ctx.config.seed)?;
    let rep = strichartz_experiment(&u0, &cfg.omegas, cfg.t_end, cfg.dt_sample)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.omega),
                num(r.integral),
                num(r.slope_fit_local),
                num(r.tail_bound),
            ]
        })
        .collect();
    out.write(
        "strichartz.csv",
        &csv_bytes(&["omega", "integral_LinfL1", "slope_fit_local", "tail_bound"], &rows)?,
    )?;
    if rep.slope_degenerate {
        eprintln!("strichartz: slope undefined (single Ω or vanishing integral)");
    }
    out.write_toml(
        "summary.toml",
        &StrichartzSummary {
            slope: rep.slope,
            slope_degenerate: rep.slope_degenerate,
            datum_l2: norms::norm_vector(&u0, Norm::L2)?,
            cutoff_radius: cfg.cutoff_radius,
        },
    )
}

#[derive(Serialize)]
struct KernelSummary {
    r: f64,
    ratio_spread: f64,
}

pub fn kernel_bound_cmd(ctx: &Context, out: &mut Outputs) -> Result<(), CliError> {
    let k: KernelConfig = ctx.config.kernel.clone().unwrap_or_default();
    let grid = Grid::new(k.eval_n, k.eval_n, k.eval_nz, k.eval_box)?;
    let rows = lemma_b2_check_on(&grid, k.r, &k.a, &k.b)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.a), num(r.b), num(r.r), num(r.sup), num(r.ratio)])
        .collect();
    out.write("kernel.csv", &csv_bytes(&["A", "B", "R", "sup_K", "ratio"], &table)?)?;
    out.write_toml(
        "summary.toml",
        &KernelSummary {
            r: k.r,
            ratio_spread: ratio_spread(&rows),
        },
    )
}

#[derive(Serialize)]
struct FitEntry {
    quantity: String,
    model: &'static str,
    rate: f64,
    residual: f64,
    window: [f64; 2],
    samples: usize,
}

#[derive(Serialize)]
struct ConvergenceSummary {
    fits: Vec<FitEntry>,
    degenerate: Vec<[String; 2]>,
    flagged_rows: usize,
}

fn checkpoint_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot read checkpoints in {}: {e}", dir.display())))?;
    let mut v: Vec<PathBuf> = rd
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("ckpt_") && n.ends_with(".nscf") && n != "ckpt_last_valid.nscf")
        })
        .collect();
    v.sort();
    if v.is_empty() {
        return Err(CliError::Config(format!("no checkpoints found in {}", dir.display())));
    }
    Ok(v)
}

pub fn oseen_convergence_cmd(ctx: &Context, out: &mut Outputs) -> Result<(), CliError> {
    let cc: ConvergenceConfig = ctx.config.convergence.clone().unwrap_or_default();
    let alpha = cc.alpha.unwrap_or(ctx.config.init.alpha);
    let dir = match &cc.from_checkpoints {
        Some(p) => {
            if p.is_absolute() {
                p.clone()
            } else {
                ctx.base.join(p)
            }
        }
        None => {
            let every = ctx.config.run.checkpoint_every.unwrap_or(ctx.config.run.monitor_every);
            run_simulation(ctx, out, Some(every))?;
            out.path("checkpoints")
        }
    };
    let mut rows = Vec::new();
    for p in checkpoint_files(&dir)? {
        let s = FlowState::load(&p)?;
        rows.push(convergence_row(&s, alpha)?);
    }
    let rep = report_from_rows(rows);
    let table: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                num(r.tau),
                num(r.oseen_l1_distance),
                num(r.h1_tilde),
                num(r.h1_u3bar),
                num(r.scaled_l2_w3bar_sq),
                num(r.scaled_grad_w3bar_sq),
                num(r.tail_bound),
                num(r.mass),
                (r.flagged as u8).to_string(),
            ]
        })
        .collect();
    out.write(
        "convergence.csv",
        &csv_bytes(
            &[
                "t",
                "tau",
                "oseen_L1_distance",
                "h1_tilde",
                "h1_u3bar",
                "scaled_l2_w3bar_sq",
                "scaled_grad_w3bar_sq",
                "tail_bound",
                "mass",
                "xi_box_flagged",
            ],
            &table,
        )?,
    )?;
    let summary = ConvergenceSummary {
        fits: rep
            .fits
            .iter()
            .map(|f| FitEntry {
                quantity: f.quantity.clone(),
                model: match f.model {
                    DecayModel::Exponential => "exponential",
                    DecayModel::Algebraic => "algebraic",
                },
                rate: f.rate,
                residual: f.residual,
                window: [f.window.0, f.window.1],
                samples: f.samples,
            })
            .collect(),
        degenerate: rep.degenerate.iter().map(|(a, b)| [a.clone(), b.clone()]).collect(),
        flagged_rows: rep.rows.iter().filter(|r| r.flagged).count(),
    };
    out.write_toml("fits.toml", &summary)
}

#[derive(Serialize)]
struct RossbySummary {
    /// Largest relative increase of `‖ũ‖ e^{4π² t}` between samples.
    max_product_increase: f64,
}

pub fn rossby_decay_cmd(ctx: &Context, out: &mut Outputs) -> Result<(), CliError> {
    let rc: RossbyConfig = ctx.config.rossby.clone().unwrap_or_default();
    let s0 = initial_state(ctx)?;
    let u0 = spectral::fluctuation(&s0.u);
    let h = rc.t_end / rc.samples as f64;
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for &om in &rc.omegas {
        let prop = LinearPropagator::new(*u0.grid(), h, om)?;
        let mut u = u0.clone();
        let mut prev = f64::NAN;
        for i in 0..=rc.samples {
            if i > 0 {
                prop.apply_in_place(&mut u);
            }
            let t = i as f64 * h;
            let l2 = norms::norm_vector(&u, Norm::L2)?;
            let prod = l2 * (4.0 * PI * PI * t).exp();
            if i > 0 && prev > 0.0 {
                worst = worst.max((prod - prev) / prev);
            }
            prev = prod;
            rows.push(vec![num(om), num(t), num(l2), num(prod)]);
        }
    }
    out.write(
        "rossby.csv",
        &csv_bytes(&["omega", "t", "l2_tilde", "decay_product"], &rows)?,
    )?;
    out.write_toml(
        "summary.toml",
        &RossbySummary {
            max_product_increase: worst,
        },
    )
}

pub fn dispatch(exp: Experiment, ctx: &Context, out: &mut Outputs) -> Result<(), CliError> {
    match exp {
        Experiment::Simulate => simulate_cmd(ctx, out),
        Experiment::Strichartz => strichartz_cmd(ctx, out),
        Experiment::KernelBound => kernel_bound_cmd(ctx, out),
        Experiment::OseenConvergence => oseen_convergence_cmd(ctx, out),
        Experiment::EnergyCheck => energy_check_cmd(ctx, out),
        Experiment::RossbyDecay => rossby_decay_cmd(ctx, out),
    }
}

use std::path::{Path, PathBuf};
use std::process::Command;

use nsc_core::checkpoint;
use nsc_core::Grid;
use nsc_core::SpectralField;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nsc-lab"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Run {
    let o = bin()
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).trim().to_string(),
        stderr: String::from_utf8_lossy(&o.stderr).to_string(),
    }
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let h = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (h, rows)
}

const ZERO: &str = r#"
[grid]
nx = 16
ny = 16
nz = 4
box_l = 10.0

[run]
t_max = 0.1
dt = 0.01
monitor_every = 5
checkpoint_every = 5
"#;

#[test]
fn zero_data_run_is_static() {
    let d = tempfile::tempdir().unwrap();
    let c = write_config(d.path(), "zero.toml", ZERO);
    let out = d.path().join("out");
    let r = run("simulate", &c, &out, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.len(), 64);
    let (h, rows) = read_csv(&out.join("monitors.csv"));
    assert_eq!(h[0], "t");
    assert_eq!(h.len(), 20);
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert!(row[1..8].iter().all(|x| *x == 0.0), "{row:?}");
    }
    for name in ["ckpt_0000000.nscf", "ckpt_0000005.nscf", "ckpt_0000010.nscf"] {
        assert!(out.join("checkpoints").join(name).exists());
    }
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains(&r.stdout));
    assert!(manifest.contains("monitors.csv"));
}

#[test]
fn malformed_key_exits_with_config_error() {
    let d = tempfile::tempdir().unwrap();
    let c = write_config(d.path(), "bad.toml", "[run]\ndt = 0.01\nt_mux = 1.0\n");
    let r = run("simulate", &c, &d.path().join("out"), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("t_mux") && r.stderr.contains("line 3"), "{}", r.stderr);

    let c = write_config(d.path(), "neg.toml", "[run]\ndt = -0.01\n");
    assert_eq!(run("simulate", &c, &d.path().join("out"), &[]).code, 2);

    let c = write_config(d.path(), "k.toml", "[kernel]\nr = -1.0\n");
    assert_eq!(run("kernel-bound", &c, &d.path().join("out"), &[]).code, 2);

    let c = write_config(d.path(), "mismatch.toml", "experiment = \"strichartz\"\n");
    let r = run("simulate", &c, &d.path().join("out"), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("strichartz"));
}

#[test]
fn numerical_failures_exit_with_code_one() {
    let d = tempfile::tempdir().unwrap();
    // CFL: vortex speed on a coarse box with a huge step
    let c = write_config(
        d.path(),
        "cfl.toml",
        "[grid]\nnx = 32\nny = 32\nnz = 4\nbox_l = 10.0\n[run]\ndt = 2.0\nt_max = 4.0\n[init]\nrecipe = \"oseen\"\n",
    );
    let r = run("simulate", &c, &d.path().join("o1"), &[]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("CFL"));

    // NaN in the initial data: aborts after one step
    let g = Grid::new(16, 16, 4, 10.0).unwrap();
    let mut f = SpectralField::zeros(g);
    f.coeffs_mut()[g.index(1, 0, 1)].re = f64::NAN;
    let z = SpectralField::zeros(g);
    let bytes = checkpoint::encode(&g, 0.0, 0.0, &[&z, &f, &z]).unwrap();
    std::fs::write(d.path().join("nan.nscf"), bytes).unwrap();
    let c = write_config(
        d.path(),
        "nan.toml",
        "[grid]\nnx = 16\nny = 16\nnz = 4\nbox_l = 10.0\n[run]\ndt = 0.01\nt_max = 0.1\n[init]\nrecipe = \"file\"\npath = \"nan.nscf\"\n",
    );
    let out = d.path().join("o2");
    let r = run("simulate", &c, &out, &[]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("non-finite"), "{}", r.stderr);
    assert!(out.join("checkpoints/ckpt_last_valid.nscf").exists());
}

#[test]
fn file_recipe_continues_a_run() {
    let d = tempfile::tempdir().unwrap();
    let base = "[grid]\nnx = 32\nny = 32\nnz = 4\nbox_l = 20.0\n[run]\ndt = 0.01\nt_max = 0.2\nmonitor_every = 20\n";
    let c = write_config(
        d.path(),
        "a.toml",
        &format!("{base}[init]\nrecipe = \"oseen-perturbed\"\namplitude = 0.3\n"),
    );
    let out = d.path().join("a");
    assert_eq!(run("simulate", &c, &out, &[]).code, 0);
    let c2 = write_config(
        d.path(),
        "b.toml",
        &format!("{base}[init]\nrecipe = \"file\"\npath = \"a/final.nscf\"\n"),
    );
    let r = run("simulate", &c2, &d.path().join("b"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, rows) = read_csv(&d.path().join("b/monitors.csv"));
    assert!((rows[0][0] - 0.2).abs() < 1e-12);
    assert!((rows.last().unwrap()[0] - 0.4).abs() < 1e-12);

    let c3 = write_config(
        d.path(),
        "c.toml",
        "[grid]\nnx = 16\nny = 16\nnz = 4\nbox_l = 20.0\n[init]\nrecipe = \"file\"\npath = \"a/final.nscf\"\n",
    );
    assert_eq!(run("simulate", &c3, &d.path().join("c"), &[]).code, 2);
}

#[test]
fn strichartz_sorts_and_flags_single_omega() {
    let d = tempfile::tempdir().unwrap();
    let grid = "[grid]\nnx = 16\nny = 16\nnz = 4\nbox_l = 6.0\n";
    let c = write_config(
        d.path(),
        "s.toml",
        &format!("{grid}[strichartz]\nomegas = [1000.0, 0.0, 10.0]\nt_end = 0.05\ndt_sample = 1e-3\ncutoff_radius = 12.0\n"),
    );
    let out = d.path().join("s");
    let r = run("strichartz", &c, &out, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&out.join("strichartz.csv"));
    assert_eq!(h, ["omega", "integral_LinfL1", "slope_fit_local", "tail_bound"]);
    let om: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(om, [0.0, 10.0, 1000.0]);
    assert!(rows.iter().all(|r| r[1] > 0.0));

    let c = write_config(
        d.path(),
        "one.toml",
        &format!("{grid}[strichartz]\nomegas = [10.0]\nt_end = 0.05\ndt_sample = 1e-3\ncutoff_radius = 12.0\n"),
    );
    let out = d.path().join("one");
    let r = run("strichartz", &c, &out, &[]);
    assert_eq!(r.code, 0);
    let (_, rows) = read_csv(&out.join("strichartz.csv"));
    assert_eq!(rows.len(), 1);
    let summary = std::fs::read_to_string(out.join("summary.toml")).unwrap();
    assert!(summary.contains("slope_degenerate = true"), "{summary}");
}

#[test]
fn kernel_single_cell() {
    let d = tempfile::tempdir().unwrap();
    let c = write_config(
        d.path(),
        "k.toml",
        "[kernel]\nr = 4.0\na = [0.0]\nb = [1.0]\neval_n = 32\neval_nz = 4\neval_box = 32.0\n",
    );
    let out = d.path().join("k");
    let r = run("kernel-bound", &c, &out, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&out.join("kernel.csv"));
    assert_eq!(h, ["A", "B", "R", "sup_K", "ratio"]);
    assert_eq!(rows.len(), 1);
    assert!(rows[0][3] > 0.0 && rows[0][3] == rows[0][4]);
}

#[test]
fn oseen_convergence_pure_vortex_and_missing_checkpoints() {
    let d = tempfile::tempdir().unwrap();
    let c = write_config(
        d.path(),
        "o.toml",
        "[grid]\nnx = 32\nny = 32\nnz = 4\nbox_l = 40.0\n[run]\ndt = 0.05\nt_max = 1.0\nmonitor_every = 2\n[init]\nrecipe = \"oseen\"\n",
    );
    let out = d.path().join("o");
    let r = run("oseen-convergence", &c, &out, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&out.join("convergence.csv"));
    assert_eq!(&h[..5], ["t", "tau", "oseen_L1_distance", "h1_tilde", "h1_u3bar"]);
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[2] < 1e-8));

    let empty = d.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let c = write_config(
        d.path(),
        "m.toml",
        &format!("[convergence]\nfrom_checkpoints = \"{}\"\n", empty.display()),
    );
    let r = run("oseen-convergence", &c, &d.path().join("m"), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("no checkpoints"), "{}", r.stderr);
}

#[test]
fn rossby_decay_product_never_grows() {
    let d = tempfile::tempdir().unwrap();
    let c = write_config(
        d.path(),
        "r.toml",
        "[grid]\nnx = 16\nny = 16\nnz = 8\nbox_l = 6.0\n[init]\nrecipe = \"random-3d\"\nzero_vertical_mean = true\namplitude = 1.0\n[rossby]\nomegas = [0.0, 50.0]\nt_end = 0.1\nsamples = 10\n",
    );
    let out = d.path().join("r");
    assert_eq!(run("rossby-decay", &c, &out, &[]).code, 0);
    let (_, rows) = read_csv(&out.join("rossby.csv"));
    assert_eq!(rows.len(), 22);
    for w in rows.windows(2) {
        if w[0][0] == w[1][0] {
            assert!(w[1][3] <= w[0][3] * (1.0 + 1e-12));
        }
    }
}

#[test]
fn outputs_independent_of_threads_but_not_seed() {
    let d = tempfile::tempdir().unwrap();
    let c = write_config(
        d.path(),
        "n.toml",
        "seed = 4\n[grid]\nnx = 16\nny = 16\nnz = 4\nbox_l = 8.0\n[run]\ndt = 0.01\nt_max = 0.05\nmonitor_every = 1\ncheckpoint_every = 5\n[init]\nrecipe = \"oseen\"\n[init.noise]\namplitude = 0.01\n",
    );
    let a = run("simulate", &c, &d.path().join("a"), &["--threads", "1"]);
    let b = run("simulate", &c, &d.path().join("b"), &["--threads", "3"]);
    let s = run("simulate", &c, &d.path().join("s"), &["--seed", "5"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, s.stdout);
    assert_eq!(
        std::fs::read(d.path().join("a/manifest.toml")).unwrap(),
        std::fs::read(d.path().join("b/manifest.toml")).unwrap()
    );
}

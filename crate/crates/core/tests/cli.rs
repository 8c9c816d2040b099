use std::fs;
use std::path::Path;
use std::process::Command;

use parareal::trace_io::read_trace;
use parareal::IterationTrace;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parareal"))
}

fn run_ok(args: &[&str]) -> std::process::Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

fn trace_at(path: &Path) -> IterationTrace {
    read_trace(std::io::BufReader::new(fs::File::open(path).unwrap())).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn run_writes_a_readable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    run_ok(&[
        "run",
        "--preset",
        "heat-dirichlet-N6",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# schema = parareal-trace/1\n"));
    assert!(text.contains("# model = heat-dirichlet\n"));
    let trace = trace_at(&out);
    assert_eq!(trace.metadata["n_slices"], "6");
    let k = trace.last_iteration().unwrap();
    assert!(trace.sup_error(k).unwrap() <= 1e-10);
}

#[test]
fn dirichlet_n6_coarse_free_beats_coarse() {
    let dir = tempfile::tempdir().unwrap();
    let with = dir.path().join("with.csv");
    let without = dir.path().join("without.csv");
    run_ok(&[
        "run",
        "--preset",
        "heat-dirichlet-N6",
        "--out",
        with.to_str().unwrap(),
    ]);
    run_ok(&[
        "run",
        "--preset",
        "heat-dirichlet-N6",
        "--no-coarse",
        "--out",
        without.to_str().unwrap(),
    ]);
    let (a, b) = (trace_at(&with), trace_at(&without));
    assert_eq!(b.metadata["coarse"], "none");
    for k in 1..=3 {
        assert!(b.sup_error(k).unwrap() < a.sup_error(k).unwrap(), "k = {k}");
    }
}

#[test]
fn neumann_n48_coarse_free_does_not_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    run_ok(&[
        "run",
        "--preset",
        "heat-neumann-N48",
        "--no-coarse",
        "--iterations",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    let s = trace_at(&out).sup_errors();
    assert_eq!(s.len(), 11);
    for k in 2..=10 {
        assert!(s[k] >= 0.99 * s[1], "k = {k}: {} vs {}", s[k], s[1]);
    }
}

#[test]
fn spectral_theorem_bound_column_matches_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    run_ok(&[
        "run",
        "--preset",
        "spectral-theorem",
        "--out",
        out.to_str().unwrap(),
    ]);
    let trace = trace_at(&out);
    for k in 1..6 {
        let sup = trace.sup_error(k).unwrap();
        let bound = trace.bound(k).unwrap();
        assert!(
            (sup - bound).abs() <= 1e-12 * bound,
            "k = {k}: {sup} vs {bound}"
        );
        for e in trace.iteration(k) {
            assert!(e.error_l2 <= bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    run_ok(&[
        "run",
        "--preset",
        "heat-neumann-N24",
        "--out",
        a.to_str().unwrap(),
    ]);
    run_ok(&[
        "run",
        "--preset",
        "heat-neumann-N24",
        "--out",
        b.to_str().unwrap(),
    ]);
    run_ok(&[
        "run",
        "--preset",
        "heat-neumann-N24",
        "--sequential",
        "--out",
        c.to_str().unwrap(),
    ]);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    assert_eq!(bytes, fs::read(&c).unwrap());
}

#[test]
fn timing_fills_the_wall_time_column() {
    let out = run_ok(&["run", "--preset", "heat-dirichlet-N6", "--timing"]);
    let trace = read_trace(out.stdout.as_slice()).unwrap();
    assert!(trace.entries.iter().all(|e| e.wall_time_ms.is_some()));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let out = dir.path().join("t.csv");
    fs::write(
        &cfg,
        format!(
            "preset = \"heat-neumann-N12\"\n[parareal]\niterations = 2\nearly_stop = false\n[output]\npath = \"{}\"\n",
            out.display()
        ),
    )
    .unwrap();
    run_ok(&["run", "--config", cfg.to_str().unwrap()]);
    let trace = trace_at(&out);
    assert_eq!(trace.last_iteration(), Some(2));
    assert_eq!(trace.metadata["model"], "heat-neumann");
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[fine]\ndt = 0.03\n").unwrap();
    let out = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fine.dt"));

    fs::write(&cfg, "[parareal]\nitrations = 3\n").unwrap();
    let out = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("itrations"));

    assert_eq!(code(&["run", "--config", "/nonexistent/x.toml"]), 2);
    assert_eq!(code(&["run", "--preset", "no-such-preset"]), 2);
    assert_eq!(code(&["run", "--bogus-flag"]), 2);
}

#[test]
fn factors_single_row() {
    let out = run_ok(&[
        "factors", "--m-min", "1", "--m-max", "1", "--dt-min", "0.5", "--dt-max", "0.5",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,dT,rho_nocoarse,rho_coarse");
    assert_eq!(lines.len(), 2);
    let cells: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], 1.0);
    assert_eq!(cells[1], 0.5);
    assert!((cells[2] - 0.606531).abs() < 5e-7);
    assert!((cells[3] - 0.180408).abs() < 5e-7);
}

#[test]
fn factors_default_grid_has_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    run_ok(&["factors", "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 16 * 8);
    assert!(rows.iter().any(|r| r[2] < r[3]));
    assert!(rows.iter().any(|r| r[2] > r[3]));
}

#[test]
fn factors_rejects_bad_ranges() {
    assert_eq!(code(&["factors", "--m-min", "0"]), 2);
    assert_eq!(code(&["factors", "--m-min", "5", "--m-max", "4"]), 2);
    assert_eq!(code(&["factors", "--dt-min", "1", "--dt-max", "0.5"]), 2);
    assert_eq!(code(&["factors", "--basis", "cosine", "--m-min", "0"]), 2);
}

fn field(preset: &str) -> Vec<Vec<f64>> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    run_ok(&[
        "solution-field",
        "--preset",
        preset,
        "--out",
        out.to_str().unwrap(),
    ]);
    csv_rows(&out)
}

fn at_time(rows: &[Vec<f64>], t: f64) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| (r[1] - t).abs() < 1e-12)
        .map(|r| (r[0], r[2]))
        .collect()
}

#[test]
fn dirichlet_field_decays_after_last_pulse() {
    let rows = field("heat-dirichlet");
    let peak = rows.iter().map(|r| r[2].abs()).fold(0.0, f64::max);
    let last = at_time(&rows, 3.0);
    assert_eq!(last.len(), 127);
    let end = last.iter().map(|(_, u)| u.abs()).fold(0.0, f64::max);
    assert!(end < 0.02 * peak, "{end} vs peak {peak}");
}

#[test]
fn neumann_field_ends_flat() {
    let rows = field("heat-neumann");
    let last: Vec<f64> = at_time(&rows, 3.0).into_iter().map(|(_, u)| u).collect();
    assert_eq!(last.len(), 129);
    let mean = last.iter().sum::<f64>() / last.len() as f64;
    let var = last.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / last.len() as f64;
    assert!(mean > 0.0);
    assert!(var.sqrt() < 0.05 * mean, "std {} mean {mean}", var.sqrt());
}

#[test]
fn periodic_advection_conserves_injected_source() {
    let rows = field("advection-periodic");
    let last = at_time(&rows, 3.0);
    assert_eq!(last.len(), 128);
    let total: f64 = last.iter().map(|(_, u)| u).sum();

    let heater = parareal::source::PulsedGaussian::heater();
    let xs: Vec<f64> = (0..128).map(|j| j as f64 / 128.0).collect();
    let dt = 1.0 / 128.0;
    let mut injected = 0.0;
    for i in 0..384 {
        let t = i as f64 * dt;
        injected += dt * xs.iter().map(|&x| heater.eval(x, t)).sum::<f64>();
    }
    assert!(
        (total - injected).abs() <= 1e-10 * injected.abs().max(1.0),
        "{total} vs {injected}"
    );
}

#[test]
fn solution_field_errors() {
    assert_eq!(code(&["solution-field", "--preset", "unknown"]), 2);
    assert_eq!(code(&["solution-field", "--preset", "spectral-theorem"]), 2);
}

#[test]
fn presets_lists_every_preset() {
    let out = run_ok(&["presets"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in parareal::presets::names() {
        assert!(
            text.lines()
                .any(|l| l.split_whitespace().next() == Some(name)),
            "{name}"
        );
    }
}

#[test]
fn every_preset_runs_from_its_name_alone() {
    for name in parareal::presets::names() {
        let out = bin().args(["run", "--preset", name]).output().unwrap();
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

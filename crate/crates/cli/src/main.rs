//! `robin`: batch front-end for the verification suites, the forward solver,
//! the far-field comparison and the reflection planner.
//!
//! Exit codes: 0 pass, 1 invariant or solver failure, 2 inconclusive, 3 input
//! or usage error. With a directory as `--scenario` every `*.json` file in it
//! is run (in parallel, `--jobs` threads) and the worst exit code is returned.

mod scenario;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use robin_core::geometry::{EscapePath, Polygon};
use robin_core::path_planner::{classify_gap, plan_reflections, GapCase, Termination};
use robin_core::scattering::{
    assemble_solve, uniqueness_experiment, ExperimentOptions, FarFieldPattern, MeshParams, Verdict,
};
use robin_core::verify::{self, CheckResult, Settings};
use scenario::{CommandKind, Overrides, Scenario};

#[derive(Parser, Debug)]
#[command(name = "robin", version, about = "Robin reflection and impedance scattering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario file, or a directory of scenario files.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory (overrides the scenario).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the randomized suites (overrides the scenario).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplier applied to every tolerance (overrides the scenario).
    #[arg(long, global = true, allow_negative_numbers = true)]
    tolerance_scale: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Harmonic reflection suites.
    VerifyHarmonic,
    /// Helmholtz extension suites.
    VerifyHelmholtz,
    /// Forward scattering: far field and solution metadata.
    Solve,
    /// Far-field comparison of two obstacles.
    Compare,
    /// Reflection walk between two obstacles.
    PlanPath,
}

impl Cmd {
    fn kind(self) -> CommandKind {
        match self {
            Cmd::VerifyHarmonic => CommandKind::VerifyHarmonic,
            Cmd::VerifyHelmholtz => CommandKind::VerifyHelmholtz,
            Cmd::Solve => CommandKind::Solve,
            Cmd::Compare => CommandKind::Compare,
            Cmd::PlanPath => CommandKind::PlanPath,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Pass,
    Inconclusive,
    Fail,
    InputError,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
            Status::InputError => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::InputError.code() } else { 0 });
        }
    };
    let jobs = cli.jobs.unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(Status::InputError.code());
    }
    let overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        tolerance_scale: cli.tolerance_scale,
    };
    let status = match &cli.scenario {
        Some(dir) if dir.is_dir() => run_directory(cli.command, dir, &overrides),
        Some(file) => run_file(cli.command, Some(file), &overrides, None),
        None => run_file(cli.command, None, &overrides, None),
    };
    ExitCode::from(status.code())
}

fn run_directory(cmd: Cmd, dir: &Path, overrides: &Overrides) -> Status {
    let mut files: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", dir.display());
            return Status::InputError;
        }
    };
    files.sort();
    if files.is_empty() {
        eprintln!("error: no scenario files in {}", dir.display());
        return Status::InputError;
    }
    files
        .par_iter()
        .map(|f| {
            let sub = f.file_stem().map(PathBuf::from);
            run_file(cmd, Some(f), overrides, sub.as_deref())
        })
        .max()
        .unwrap_or(Status::Pass)
}

fn run_file(cmd: Cmd, file: Option<&Path>, overrides: &Overrides, subdir: Option<&Path>) -> Status {
    let label = file.map(|f| f.display().to_string()).unwrap_or_else(|| "defaults".into());
    let mut scenario = match Scenario::load(file, cmd.kind(), overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{label}: input error: {e:#}");
            return Status::InputError;
        }
    };
    if let Some(sub) = subdir {
        scenario.out = scenario.out.join(sub);
    }
    if let Err(e) = fs::create_dir_all(&scenario.out).and_then(|_| {
        fs::write(scenario.out.join("scenario.json"), serde_json::to_string_pretty(&scenario)? + "\n")
    }) {
        eprintln!("{label}: input error: cannot write to {}: {e}", scenario.out.display());
        return Status::InputError;
    }
    let result = match cmd {
        Cmd::VerifyHarmonic => verify_command(&scenario, verify::harmonic_suite),
        Cmd::VerifyHelmholtz => verify_command(&scenario, verify::helmholtz_suite),
        Cmd::Solve => solve_command(&scenario),
        Cmd::Compare => compare_command(&scenario),
        Cmd::PlanPath => plan_command(&scenario),
    };
    match result {
        Ok((status, message)) => {
            println!("{label}: {message}");
            status
        }
        Err(e) => {
            eprintln!("{label}: failure: {e:#}");
            Status::Fail
        }
    }
}

fn settings(s: &Scenario) -> Settings {
    Settings {
        tolerance_scale: s.tolerance_scale,
        seed: s.seed,
        corrupt_kernel_sign: s.corrupt_kernel_sign,
    }
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

const CHECK_COLUMNS: &str = "x1, x2: sample point; re, im: computed value (empty when not applicable); error: measured error";

fn write_check_csv(path: &Path, check: &CheckResult) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x1", "x2", "re", "im", "error"])?;
    for s in &check.samples {
        let (re, im) = s.value.map(|v| (v.re.to_string(), v.im.to_string())).unwrap_or_default();
        w.write_record([s.x.to_string(), s.y.to_string(), re, im, s.error.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn verify_command(s: &Scenario, suite: fn(&Settings) -> Vec<CheckResult>) -> anyhow::Result<(Status, String)> {
    let checks = suite(&settings(s));
    let mut files = Vec::new();
    for c in &checks {
        if !c.samples.is_empty() {
            let name = format!("{}.csv", slug(&c.name));
            write_check_csv(&s.out.join(&name), c)?;
            files.push(name);
        }
        println!(
            "  {} {}: {:.3e} (tolerance {:.1e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.detail
        );
    }
    let failing: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let summary = json!({
        "seed": s.seed,
        "tolerance_scale": s.tolerance_scale,
        "corrupt_kernel_sign": s.corrupt_kernel_sign,
        "csv_files": files,
        "csv_columns": CHECK_COLUMNS,
        "checks": checks,
        "failing": failing,
    });
    fs::write(s.out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(if failing.is_empty() {
        (Status::Pass, format!("all {} checks pass", checks.len()))
    } else {
        (Status::Fail, format!("failing invariant(s): {}", failing.join(", ")))
    })
}

const FAR_FIELD_COLUMNS: &str = "angle: observation angle in radians; re, im: far-field pattern; abs: its modulus";

fn write_far_field(path: &Path, ff: &FarFieldPattern) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["angle", "re", "im", "abs"])?;
    for (a, v) in ff.angles.iter().zip(&ff.values) {
        w.write_record([a.to_string(), v.re.to_string(), v.im.to_string(), v.norm().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn mesh_params(s: &Scenario) -> MeshParams {
    MeshParams {
        panels: s.panels,
        grading: s.grading,
        diagnostics: s.diagnostics,
        ..MeshParams::default()
    }
}

fn solve_command(s: &Scenario) -> anyhow::Result<(Status, String)> {
    let poly = &s.polygons[0];
    let wave = s.wave_params()?;
    let sol = assemble_solve(poly, &wave, &mesh_params(s)).context("forward solve")?;
    let ff = sol.far_field(s.far_field_samples)?;
    write_far_field(&s.out.join("far_field.csv"), &ff)?;
    let boundary_residual = sol.boundary_residual();
    let meta = json!({
        "k": wave.k,
        "lambda": [wave.lambda.re, wave.lambda.im],
        "direction": [wave.direction.x, wave.direction.y],
        "seed": s.seed,
        "tolerance_scale": s.tolerance_scale,
        "panels": sol.mesh.len(),
        "grading": sol.mesh.grading,
        "min_panel_length": sol.mesh.min_length(),
        "max_panel_length": sol.mesh.max_length(),
        "linear_residual": sol.residual,
        "boundary_residual": boundary_residual,
        "condition_estimate": sol.condition,
        "warnings": sol.warnings,
        "far_field_l2_norm": ff.l2_norm(),
        "csv_columns": FAR_FIELD_COLUMNS,
    });
    fs::write(s.out.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok((
        Status::Pass,
        format!(
            "{} panels, ‖u∞‖ = {:.6e}, boundary residual {boundary_residual:.2e}",
            sol.mesh.len(),
            ff.l2_norm()
        ),
    ))
}

fn compare_command(s: &Scenario) -> anyhow::Result<(Status, String)> {
    let [d1, d2] = two_polygons(s)?;
    let wave = s.wave_params()?;
    let opts = ExperimentOptions {
        base_panels: s.base_panels,
        grading: s.grading,
    };
    let r = uniqueness_experiment(d1, d2, &wave, s.far_field_samples, &opts).context("far-field comparison")?;
    let verdict = match r.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    };
    let report = json!({
        "farfield_gap": r.farfield_gap,
        "mesh_error_estimate": r.mesh_error_estimate,
        "per_obstacle_error": r.per_obstacle_error,
        "observed_order": r.observed_order,
        "identical": r.identical,
        "verdict": verdict,
        "identical_tolerance_factor": 3.0,
        "distinct_tolerance_factor": 10.0,
        "seed": s.seed,
        "base_panels": s.base_panels,
        "far_field_samples": s.far_field_samples,
    });
    fs::write(s.out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let message = format!(
        "gap {:.4e}, estimate {:.4e}, verdict {verdict}",
        r.farfield_gap, r.mesh_error_estimate
    );
    Ok(match r.verdict {
        Verdict::Pass => (Status::Pass, message),
        Verdict::Fail => (Status::Fail, message),
        Verdict::Inconclusive => (Status::Inconclusive, message),
    })
}

fn two_polygons(s: &Scenario) -> anyhow::Result<[&Polygon; 2]> {
    match s.polygons.as_slice() {
        [a, b] => Ok([a, b]),
        _ => bail!("two geometries required"),
    }
}

fn plan_command(s: &Scenario) -> anyhow::Result<(Status, String)> {
    let [d1, d2] = two_polygons(s)?;
    let escape = s.escape_path.as_ref().context("escape path required")?;
    let gamma = EscapePath::new(
        escape.waypoints.iter().map(|p| robin_core::pt(p[0], p[1])).collect(),
        robin_core::pt(escape.ray[0], escape.ray[1]),
    )?;
    let config = classify_gap(d1, d2)?;
    let case = match &config.case {
        GapCase::Identical => "identical".to_string(),
        GapCase::Corner { .. } => "corner".to_string(),
        GapCase::Segment { .. } => "segment".to_string(),
        GapCase::Unclassified(why) => format!("unclassified ({why})"),
    };
    let plan = match plan_reflections(&config, &gamma, s.budget) {
        Ok(plan) => plan,
        Err(e) => {
            fs::write(s.out.join("plan.txt"), format!("case {case}\nerror {e}\n"))?;
            return Ok((Status::Fail, format!("planner error: {e}")));
        }
    };
    fs::write(s.out.join("plan.txt"), format!("case {case}\nswapped {}\n{plan}", config.swapped))?;
    Ok(match plan.termination {
        Termination::BudgetExceeded => (
            Status::Fail,
            format!("budget of {} reflections exhausted at step {}", s.budget, plan.steps.len() - 1),
        ),
        Termination::FullLine { step, .. } => (Status::Pass, format!("{case}: full-line certificate at step {step}")),
        Termination::SectorPair { step, .. } => {
            (Status::Pass, format!("{case}: sector-pair certificate at step {step}"))
        }
    })
}

//! CSV series (12 significant digits, one header line) and JSON manifests.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::pipeline::{Comparison, RunOutput, SweepRow};
use crate::CliError;
use optocool::KernelTables;

pub const TRAJECTORY_HEADER: &str = "t,re_alpha,im_alpha,re_beta,im_beta,delta_eff,abs_g";
pub const PROPAGATOR_HEADER: &str = "t,re_m,im_m,re_l,im_l,m2_minus_l2";
pub const OCCUPANCY_HEADER: &str = "t,n_b,homog,f1_part,f2_part,f3_part";
pub const MOMENTS_HEADER: &str =
    "t,n_a,n_b,upsilon_a,upsilon_b,upsilon_c,upsilon_kappa,delta_upsilon,upsilon_sq,delta_upsilon_heat";
pub const KERNEL_HEADER: &str = "t,re_f,im_f,re_c3,im_c3";
pub const COMPARISON_HEADER: &str = "t,n_b_kernel,n_b_moments,abs_diff";
pub const SWEEP_HEADER: &str = "value,final_n_b,min_n_b";

/// Writes `header` and one comma-separated line per row, `{:.11e}` per field.
pub fn write_csv<const N: usize>(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = [f64; N]>,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let mut first = true;
        for x in row {
            if !first {
                w.write_all(b",")?;
            }
            first = false;
            write!(w, "{x:.11e}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn comparison_json(c: &Comparison) -> Value {
    json!({
        "max_abs_deviation": c.max_abs,
        "max_rel_deviation": c.max_rel,
        "worst_ratio": c.worst_ratio,
        "worst_t": c.worst_t,
        "tolerance_rel": c.tolerance_rel,
        "tolerance_abs": c.tolerance_abs,
        "passed": c.passed(),
    })
}

pub fn manifest(run: &RunOutput, files: &[String]) -> Value {
    let events: Vec<Value> =
        run.schedule.events().iter().map(|(q, t, v)| json!({"quantity": q, "t": t, "value": v})).collect();
    let mut checks = serde_json::Map::new();
    if let Some(k) = &run.kernel {
        let max_imag = k.occupancy.imag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        checks.insert("occupancy_max_imag".into(), json!(max_imag));
        checks.insert("quadrature_nodes".into(), json!(run.quad_nodes));
    }
    if let Some(m) = &run.moments {
        checks.insert("moments_max_imag".into(), json!(m.series.max_imag));
        checks.insert("moments_audit_n_a".into(), json!(m.audit.0));
        checks.insert("moments_audit_n_b".into(), json!(m.audit.1));
        checks.insert("bath_modes".into(), json!(m.modes.len()));
    }
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(&run.config).expect("config serializes"),
        "grid": {"dt": run.grid.dt, "n_steps": run.grid.n_steps, "t_end": run.grid.t_end()},
        "markovian_rate": run.markovian_rate,
        "events": events,
        "warnings": run.warnings,
        "checks": checks,
        "comparison": run.comparison.as_ref().map(comparison_json),
        "wall_time_s": run.wall_time,
        "files": files,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

/// All series of a run plus `manifest.json`; returns the files written.
pub fn write_run(dir: &Path, run: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut names = vec!["trajectory.csv".to_string()];
    write_csv(&dir.join("trajectory.csv"), TRAJECTORY_HEADER, run.trajectory.rows())?;
    if let Some(k) = &run.kernel {
        write_csv(&dir.join("propagators.csv"), PROPAGATOR_HEADER, k.pair.rows())?;
        write_csv(&dir.join("occupancy.csv"), OCCUPANCY_HEADER, k.occupancy.rows())?;
        names.extend(["propagators.csv".into(), "occupancy.csv".into()]);
    }
    if let Some(m) = &run.moments {
        write_csv(&dir.join("moments.csv"), MOMENTS_HEADER, m.series.rows())?;
        names.push("moments.csv".into());
    }
    if let (Some(k), Some(m)) = (&run.kernel, &run.moments) {
        let rows = k
            .occupancy
            .total
            .iter()
            .zip(&m.series.n_b)
            .enumerate()
            .map(|(i, (&a, &b))| [run.grid.t(i), a, b, (a - b).abs()]);
        write_csv(&dir.join("comparison.csv"), COMPARISON_HEADER, rows)?;
        names.push("comparison.csv".into());
    }
    names.push("manifest.json".into());
    write_json(&dir.join("manifest.json"), &manifest(run, &names))?;
    Ok(names.into_iter().map(|n| dir.join(n)).collect())
}

pub fn write_kernel(dir: &Path, tables: &KernelTables) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join("kernel.csv");
    let rows = (0..tables.f.len()).map(|i| {
        let (f, c) = (tables.f[i], tables.c3[i]);
        [tables.grid.t(i), f.re, f.im, c.re, c.im]
    });
    write_csv(&path, KERNEL_HEADER, rows)?;
    Ok(path)
}

pub fn write_sweep(dir: &Path, axis: &str, rows: &[SweepRow], failures: &[(f64, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("summary.csv"), SWEEP_HEADER, rows.iter().map(|r| [r.value, r.final_n_b, r.min_n_b]))?;
    let failed: Vec<Value> = failures.iter().map(|(v, e)| json!({"value": v, "error": e})).collect();
    let ok: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let body = json!({"version": env!("CARGO_PKG_VERSION"), "axis": axis, "completed": ok, "failed": failed});
    write_json(&dir.join("manifest.json"), &body)
}

//! Deterministic file emission: CSV data files, JSON dumps, a metadata
//! document, and small companion plot scripts.
//!
//! Data files are byte-stable for identical inputs and version; wall-clock
//! timings live only in metadata.json.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scan::{
    MagnusOrdersResult, PointOutcome, RunMeta, ScanResult, SimulateResult, SpectrumResult,
};
use crate::tdse::Trajectory;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization: {e}")))?;
    write_file(dir, name, &text)
}

fn write_metadata(dir: &Path, meta: &RunMeta, files: &[PathBuf]) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Metadata<'a> {
        version: &'a str,
        wall_time_s: f64,
        solver_steps: u64,
        files: Vec<String>,
        config: &'a crate::config::RunConfig,
    }
    write_json(
        dir,
        "metadata.json",
        &Metadata {
            version: &meta.version,
            wall_time_s: meta.wall_time_s,
            solver_steps: meta.solver_steps,
            files: files
                .iter()
                .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
                .collect(),
            config: &meta.config,
        },
    )
}

fn plot_script(csv_name: &str, kind: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "#!/usr/bin/env python3");
    let _ = writeln!(s, "import matplotlib.pyplot as plt");
    let _ = writeln!(s, "import numpy as np");
    let _ = writeln!(s, "data = np.genfromtxt({csv_name:?}, delimiter=\",\", names=True)");
    match kind {
        "trace" => {
            let _ = writeln!(s, "plt.plot(data[\"t_ps\"], data[\"cos_theta\"])");
            let _ = writeln!(s, "plt.xlabel(\"t (ps)\")");
            let _ = writeln!(s, "plt.ylabel(\"<cos theta>\")");
        }
        "spectrum" => {
            let _ = writeln!(s, "plt.plot(data[\"omega_THz\"], data[\"abs_A\"])");
            let _ = writeln!(s, "plt.xlabel(\"frequency (THz)\")");
            let _ = writeln!(s, "plt.ylabel(\"|A|\")");
        }
        "density" => {
            let _ = writeln!(s, "t = np.unique(data[\"t_ps\"]); th = np.unique(data[\"theta_rad\"])");
            let _ = writeln!(s, "z = data[\"density\"].reshape(len(t), len(th))");
            let _ = writeln!(
                s,
                "plt.pcolormesh(t, th, z.T, shading=\"auto\"); plt.colorbar(label=\"density\")"
            );
            let _ = writeln!(s, "plt.xlabel(\"t (ps)\"); plt.ylabel(\"theta (rad)\")");
        }
        "scan" => {
            let _ = writeln!(s, "e0 = np.unique(data[\"E0_V_per_m\"]); d1 = np.unique(data[\"delta1_THz\"])");
            let _ = writeln!(s, "z = data[\"a_oqr\"].reshape(len(e0), len(d1))");
            let _ = writeln!(
                s,
                "plt.pcolormesh(d1, e0, z, shading=\"auto\"); plt.colorbar(label=\"A_OQR\")"
            );
            let _ = writeln!(s, "plt.xlabel(\"delta1 (THz)\"); plt.ylabel(\"E0 (V/m)\")");
        }
        _ => {}
    }
    let _ = writeln!(s, "plt.tight_layout()");
    let _ = writeln!(s, "plt.savefig({:?})", format!("{}.png", csv_name.trim_end_matches(".csv")));
    s
}

/// Write the scan artifact set; returns the created files.
pub fn write_scan(result: &ScanResult, dir: &Path, json: bool, plots: bool) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if json {
        files.push(write_json(dir, "scan.json", result)?);
    } else {
        // Matrix layout: header row of delta1 values, first column E0.
        let mut matrix = String::from("E0_V_per_m");
        for d in &result.delta1_axis_thz {
            let _ = write!(matrix, ",{d}");
        }
        matrix.push('\n');
        for (i, e0) in result.e0_axis.iter().enumerate() {
            let _ = write!(matrix, "{e0}");
            for j in 0..result.delta1_axis_thz.len() {
                match result.a_oqr(i, j) {
                    Some(v) => {
                        let _ = write!(matrix, ",{v}");
                    }
                    None => {
                        let _ = write!(matrix, ",nan");
                    }
                }
            }
            matrix.push('\n');
        }
        files.push(write_file(dir, "scan_a_oqr.csv", &matrix)?);

        // Long form with the per-point reports.
        let mut long = String::from(
            "E0_V_per_m,delta1_THz,a_oqr,cos_max,cos_min,t_max_ps,t_min_ps,error\n",
        );
        for p in &result.points {
            match &p.outcome {
                PointOutcome::Ok { report, a_oqr, .. } => {
                    let _ = writeln!(
                        long,
                        "{},{},{},{},{},{},{},",
                        p.e0_v_per_m,
                        p.delta1_thz,
                        a_oqr,
                        report.max_value,
                        report.min_value,
                        report.t_max,
                        report.t_min
                    );
                }
                PointOutcome::Failed { error } => {
                    let _ = writeln!(
                        long,
                        "{},{},nan,nan,nan,nan,nan,{}",
                        p.e0_v_per_m,
                        p.delta1_thz,
                        error.replace(',', ";")
                    );
                }
            }
        }
        files.push(write_file(dir, "scan_points.csv", &long)?);

        // Final populations and relative phases per point.
        if let Some(PointOutcome::Ok { phases, .. }) =
            result.points.iter().find_map(|p| match &p.outcome {
                ok @ PointOutcome::Ok { .. } => Some(ok),
                _ => None,
            })
        {
            // Column count comes from the first successful point; rows from
            // auto-truncated runs with a different basis size are padded or
            // truncated to keep the file rectangular.
            let n_pop = phases.populations.len();
            let n_phi = phases.phases.len();
            let mut head = String::from("E0_V_per_m,delta1_THz");
            for l in &phases.labels {
                let _ = write!(head, ",pop_J{}", l.j());
            }
            for w in phases.labels.windows(2) {
                let _ = write!(head, ",phi_J{}", w[0].j());
            }
            head.push('\n');
            let mut body = head;
            for p in &result.points {
                if let PointOutcome::Ok { phases, .. } = &p.outcome {
                    let _ = write!(body, "{},{}", p.e0_v_per_m, p.delta1_thz);
                    for k in 0..n_pop {
                        match phases.populations.get(k) {
                            Some(v) => {
                                let _ = write!(body, ",{v}");
                            }
                            None => {
                                let _ = write!(body, ",nan");
                            }
                        }
                    }
                    for k in 0..n_phi {
                        match phases.phases.get(k) {
                            Some(v) => {
                                let _ = write!(body, ",{v}");
                            }
                            None => {
                                let _ = write!(body, ",nan");
                            }
                        }
                    }
                    body.push('\n');
                }
            }
            files.push(write_file(dir, "scan_phases.csv", &body)?);
        }
        if plots {
            files.push(write_file(dir, "plot_scan.py", &plot_script("scan_points.csv", "scan"))?);
        }
    }
    files.push(write_metadata(dir, &result.meta, &files)?);
    Ok(files)
}

/// Write trace, density, and report files.
pub fn write_simulate(
    result: &SimulateResult,
    dir: &Path,
    json: bool,
    plots: bool,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if json {
        files.push(write_json(dir, "simulate.json", result)?);
    } else {
        let mut trace = String::from("t_ps,cos_theta\n");
        for (t, v) in result.trace.times.iter().zip(&result.trace.values) {
            let _ = writeln!(trace, "{t},{v}");
        }
        files.push(write_file(dir, "trace.csv", &trace)?);

        let mut dens = String::from("t_ps,theta_rad,density\n");
        for (i, t) in result.density.times.iter().enumerate() {
            for (j, th) in result.density.thetas.iter().enumerate() {
                let _ = writeln!(dens, "{t},{th},{}", result.density.values[i][j]);
            }
        }
        files.push(write_file(dir, "density.csv", &dens)?);

        files.push(write_json(dir, "report.json", &result.report)?);
        if plots {
            files.push(write_file(dir, "plot_trace.py", &plot_script("trace.csv", "trace"))?);
            files.push(write_file(dir, "plot_density.py", &plot_script("density.csv", "density"))?);
        }
    }
    files.push(write_metadata(dir, &result.meta, &files)?);
    Ok(files)
}

/// Write only the angular density map (plus metadata).
pub fn write_density(
    result: &SimulateResult,
    dir: &Path,
    json: bool,
    plots: bool,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if json {
        files.push(write_json(dir, "density.json", &result.density)?);
    } else {
        let mut dens = String::from("t_ps,theta_rad,density\n");
        for (i, t) in result.density.times.iter().enumerate() {
            for (j, th) in result.density.thetas.iter().enumerate() {
                let _ = writeln!(dens, "{t},{th},{}", result.density.values[i][j]);
            }
        }
        files.push(write_file(dir, "density.csv", &dens)?);
        if plots {
            files.push(write_file(dir, "plot_density.py", &plot_script("density.csv", "density"))?);
        }
    }
    files.push(write_metadata(dir, &result.meta, &files)?);
    Ok(files)
}

/// Write the per-order population files.
pub fn write_magnus_orders(
    result: &MagnusOrdersResult,
    dir: &Path,
    json: bool,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if json {
        files.push(write_json(dir, "magnus_orders.json", result)?);
    } else {
        let mut fin = String::from("E0_V_per_m,order_tag,pop_J0,pop_J1,pop_J2\n");
        for curve in &result.curves {
            for (e0, pops) in result.e0_axis.iter().zip(&curve.final_pops) {
                let _ = writeln!(
                    fin,
                    "{e0},{},{},{},{}",
                    curve.order_tag, pops[0], pops[1], pops[2]
                );
            }
        }
        files.push(write_file(dir, "magnus_orders_final.csv", &fin)?);

        let mut tr = String::from("t_ps,order_tag,pop_J0,pop_J1,pop_J2\n");
        for trace in &result.time_traces {
            for (t, pops) in result.time_axis.iter().zip(&trace.pops) {
                let _ = writeln!(
                    tr,
                    "{t},{},{},{},{}",
                    trace.order_tag, pops[0], pops[1], pops[2]
                );
            }
        }
        files.push(write_file(dir, "magnus_orders_time.csv", &tr)?);
    }
    files.push(write_metadata(dir, &result.meta, &files)?);
    Ok(files)
}

/// Write the spectrum CSV (omega_THz, abs_A).
pub fn write_spectrum(
    result: &SpectrumResult,
    dir: &Path,
    json: bool,
    plots: bool,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if json {
        files.push(write_json(dir, "spectrum.json", result)?);
    } else {
        let mut s = String::from("omega_THz,abs_A\n");
        for (f, a) in result.omega_thz.iter().zip(&result.abs_a) {
            let _ = writeln!(s, "{f},{a}");
        }
        files.push(write_file(dir, "spectrum.csv", &s)?);
        if plots {
            files.push(write_file(
                dir,
                "plot_spectrum.py",
                &plot_script("spectrum.csv", "spectrum"),
            )?);
        }
    }
    files.push(write_metadata(dir, &result.meta, &files)?);
    Ok(files)
}

/// Export a trajectory as CSV: t_ps then re/im of every basis coefficient.
pub fn write_trajectory(traj: &Trajectory, dir: &Path, name: &str) -> Result<PathBuf> {
    let mut s = String::from("t_ps");
    for j in traj.basis.j_values() {
        let _ = write!(s, ",re_c{j},im_c{j}");
    }
    s.push('\n');
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        let _ = write!(s, "{t}");
        for c in snap {
            let _ = write!(s, ",{},{}", c.re, c.im);
        }
        s.push('\n');
    }
    write_file(dir, name, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ConfigFile, Overrides};
    use crate::scan::run_spectrum;

    #[test]
    fn spectrum_files_are_byte_stable() {
        let cfg = resolve(ConfigFile::default(), &Overrides::default()).unwrap();
        let tmp = std::env::temp_dir().join("oqr-output-test");
        let _ = fs::remove_dir_all(&tmp);
        let r1 = run_spectrum(&cfg, 17).unwrap();
        let files = write_spectrum(&r1, &tmp, false, true).unwrap();
        let first = fs::read(tmp.join("spectrum.csv")).unwrap();
        assert!(files.iter().any(|f| f.ends_with("plot_spectrum.py")));
        let r2 = run_spectrum(&cfg, 17).unwrap();
        write_spectrum(&r2, &tmp, false, true).unwrap();
        let second = fs::read(tmp.join("spectrum.csv")).unwrap();
        assert_eq!(first, second);
        let meta = fs::read_to_string(tmp.join("metadata.json")).unwrap();
        assert!(meta.contains("\"version\""));
        assert!(meta.contains("\"config\""));
        let _ = fs::remove_dir_all(&tmp);
    }
}

//! End-to-end pipelines behind the `scatterlab` subcommands. Each run
//! emits its outputs plus a `<out>.manifest.json` recording the inputs,
//! seeds, tool version, and wall time. Outputs are byte-identical for
//! equal manifest inputs, independent of the worker-pool size.

use crate::dataset::SweepMethod;
use crate::datastore::{
    load_dataset, load_potential, parse_config, save_dataset, save_potential, write_container,
    ExperimentConfig, NamedArray,
};
use crate::ergodic::{
    band_statistics_over_grid, exceedance_probability, AComponent, ProcessSampler,
};
use crate::error::{Error, Result};
use crate::forward::backscatter_sweep;
use crate::gridfield::{make_grid, synthesize_potential};
use crate::inverse::{
    data_discrepancy, default_tau_grid, estimate_hhat, reconstruct_strength, stability_experiment,
};
use crate::report::{fmt_f64, write_csv, write_svg_lines};
use crate::specband::{resolvent_bound_shape, resolvent_probe};
use crate::sphere;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub wall_time_ms: u128,
    pub outputs: Vec<String>,
}

fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}

fn emit_manifest(
    subcommand: &str,
    inputs_repr: &str,
    seeds: Vec<u64>,
    outputs: &[&Path],
    started: Instant,
) -> Result<()> {
    let manifest = RunManifest {
        subcommand: subcommand.into(),
        config_hash: format!("{:08x}", crate::datastore::crc32(inputs_repr.as_bytes())),
        seeds,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: started.elapsed().as_millis(),
        outputs: outputs
            .iter()
            .map(|p| p.to_string_lossy().into_owned())
            .collect(),
    };
    let path = manifest_path(outputs[0]);
    std::fs::write(&path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

/// `scatterlab synth`: synthesize one potential realization.
pub fn run_synth(config: &Path, seed: u64, out: &Path) -> Result<()> {
    let started = Instant::now();
    let cfg = parse_config(config)?;
    let strength = cfg.strength()?;
    let v = synthesize_potential(&strength, cfg.field.m, seed)?;
    save_potential(out, &v)?;
    emit_manifest(
        "synth",
        &format!("{cfg:?}|seed={seed}"),
        vec![seed],
        &[out],
        started,
    )
}

/// `scatterlab forward`: backscatter sweep over a frequency band.
#[allow(clippy::too_many_arguments)]
pub fn run_forward(
    potential: &Path,
    k_min: f64,
    k_max: f64,
    nk: usize,
    n_dir: usize,
    tol: f64,
    method: SweepMethod,
    born_terms: usize,
    out: &Path,
) -> Result<()> {
    let started = Instant::now();
    if nk < 2 || !(k_min > 0.0 && k_min < k_max) {
        return Err(Error::config(
            "kmin/kmax/nk",
            "need 0 < kmin < kmax and nk >= 2",
        ));
    }
    let v = load_potential(potential)?;
    let k_grid: Vec<f64> = (0..nk)
        .map(|j| k_min + (k_max - k_min) * j as f64 / (nk - 1) as f64)
        .collect();
    let dirs = sphere::antipodal_directions(n_dir);
    let ds = backscatter_sweep(&v, &dirs, &k_grid, tol, method, born_terms)?;
    save_dataset(out, &ds)?;
    emit_manifest(
        "forward",
        &format!(
            "{}|{k_min}|{k_max}|{nk}|{n_dir}|{tol}|{method:?}|{born_terms}",
            potential.display()
        ),
        vec![v.seed()],
        &[out],
        started,
    )
}

/// `scatterlab resolvent`: norm estimates over a complex frequency list
/// (CSV lines `re,im`), with the reference bound shape per row.
pub fn run_resolvent(
    grid_n: usize,
    l_box: f64,
    chi_radius: f64,
    lambda_list: &Path,
    out: &Path,
) -> Result<()> {
    let started = Instant::now();
    let grid = make_grid(grid_n, l_box)?;
    let text = std::fs::read_to_string(lambda_list)?;
    let mut lambdas = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("re") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::config(
                "lambda-list",
                format!("line {}: expected re,im", ln + 1),
            ));
        }
        let re: f64 = parts[0]
            .parse()
            .map_err(|_| Error::config("lambda-list", format!("line {}: bad re", ln + 1)))?;
        let im: f64 = parts[1]
            .parse()
            .map_err(|_| Error::config("lambda-list", format!("line {}: bad im", ln + 1)))?;
        lambdas.push(Complex64::new(re, im));
    }
    let probe = resolvent_probe(&lambdas, &grid, chi_radius, 2.0 * l_box)?;
    let rows: Vec<Vec<String>> = probe
        .lambda_grid
        .iter()
        .zip(&probe.norms)
        .map(|(l, n)| {
            vec![
                fmt_f64(l.re),
                fmt_f64(l.im),
                fmt_f64(*n),
                fmt_f64(resolvent_bound_shape(*l, probe.cutoff_diam)),
            ]
        })
        .collect();
    write_csv(out, &["re_lambda", "im_lambda", "norm_estimate", "bound_value"], &rows)?;
    emit_manifest(
        "resolvent",
        &format!("{grid_n}|{l_box}|{chi_radius}|{}", text),
        vec![],
        &[out],
        started,
    )
}

/// `scatterlab reconstruct`: strength estimation from one dataset, with an
/// optional second dataset for the data discrepancy.
pub fn run_reconstruct(
    data: &Path,
    data2: Option<&Path>,
    n_tau: usize,
    n_theta: usize,
    out_prefix: &str,
) -> Result<()> {
    let started = Instant::now();
    let ds = load_dataset(data)?;
    let hh = estimate_hhat(&ds, n_tau, n_theta)?;
    let grid = make_grid(ds.meta.grid_n, ds.meta.grid_l)?;
    let mut rec = reconstruct_strength(&hh, &grid)?;

    if let Some(p2) = data2 {
        let ds2 = load_dataset(p2)?;
        let f_max = *ds.frequencies.last().unwrap();
        let tau_grid = default_tau_grid();
        let k_top = (f_max - tau_grid.last().unwrap()) / 2.0;
        let stride = (ds.n_freq() / 16).max(1);
        rec.epsilon_sq = Some(data_discrepancy(
            &ds,
            &ds2,
            (ds.frequencies[0], k_top),
            &tau_grid,
            stride,
        )?);
    }

    let hhat_path = PathBuf::from(format!("{out_prefix}_hhat.csv"));
    let hrec_path = PathBuf::from(format!("{out_prefix}_hrec.ffpk"));
    let report_path = PathBuf::from(format!("{out_prefix}_report.csv"));

    let mut rows = Vec::new();
    for ti in 0..hh.n_tau() {
        for di in 0..hh.n_theta() {
            let xi = hh.xi(ti, di);
            let e = hh.estimate(ti, di);
            rows.push(vec![
                fmt_f64(hh.tau_grid[ti]),
                fmt_f64(xi[0]),
                fmt_f64(xi[1]),
                fmt_f64(xi[2]),
                fmt_f64(e.re),
                fmt_f64(e.im),
            ]);
        }
    }
    write_csv(
        &hhat_path,
        &["tau", "xi_x", "xi_y", "xi_z", "re", "im"],
        &rows,
    )?;

    let header = serde_json::json!({
        "kind": "hrec",
        "grid_n": grid.n(),
        "grid_l": grid.l_box(),
        "band_k": rec.band_k,
        "imag_residue": rec.imag_residue,
        "epsilon_sq": rec.epsilon_sq,
    });
    write_container(
        &hrec_path,
        &header,
        &[NamedArray::real("h_rec", rec.h_rec.clone())],
    )?;

    write_csv(
        &report_path,
        &["band_k_low", "band_k_high", "imag_residue", "epsilon_sq"],
        &[vec![
            fmt_f64(hh.k_band.0),
            fmt_f64(hh.k_band.1),
            fmt_f64(rec.imag_residue),
            fmt_f64(rec.epsilon_sq.unwrap_or(f64::NAN)),
        ]],
    )?;
    emit_manifest(
        "reconstruct",
        &format!(
            "{}|{:?}|{n_tau}|{n_theta}",
            data.display(),
            data2.map(|p| p.display().to_string())
        ),
        vec![ds.meta.seed],
        &[&hhat_path, &hrec_path, &report_path],
        started,
    )
}

#[derive(Serialize, Deserialize)]
struct EnsembleIndex {
    files: Vec<String>,
}

/// `scatterlab ergodic`: exceedance harness over a dataset ensemble
/// directory (`index.json` listing the member files). Runs all eight
/// components of the correlation decomposition and reports the worst case
/// per threshold.
pub fn run_ergodic(
    ensemble_dir: &Path,
    eps: f64,
    tau: f64,
    dir_index: usize,
    ktilde_list: &[f64],
    out: &Path,
) -> Result<()> {
    let started = Instant::now();
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::config("eps", "must lie in (0, 1/4)"));
    }
    let index_path = ensemble_dir.join("index.json");
    let index: EnsembleIndex = serde_json::from_str(&std::fs::read_to_string(&index_path)?)?;
    let mut ensemble = Vec::with_capacity(index.files.len());
    let mut seeds = Vec::new();
    for f in &index.files {
        let ds = load_dataset(&ensemble_dir.join(f))?;
        seeds.push(ds.meta.seed);
        ensemble.push(ds);
    }
    if ensemble.is_empty() {
        return Err(Error::Coverage("empty ensemble".into()));
    }
    let freqs = ensemble[0].frequencies.clone();
    let f_lo = freqs[0];
    let f_hi = *freqs.last().unwrap();
    // Bands [k, 2k] that fit the data after the tau shift.
    let k_max = (f_hi - tau) / 2.0;
    if k_max <= f_lo {
        return Err(Error::Coverage("dataset band too narrow for Y_k".into()));
    }
    let n_k = 25;
    let k_grid: Vec<f64> = (0..n_k)
        .map(|j| f_lo * (k_max / f_lo).powf(j as f64 / (n_k - 1) as f64))
        .collect();

    let mut rows = Vec::new();
    let mut worst: Vec<f64> = vec![0.0; ktilde_list.len()];
    for component in AComponent::ALL {
        let sampler = ProcessSampler::Born0FarField {
            dir: dir_index,
            tau,
            component,
        };
        let paths = sampler.sample(&ensemble)?;
        let y: Vec<Vec<f64>> = paths
            .iter()
            .map(|p| band_statistics_over_grid(p, &k_grid, eps))
            .collect::<Result<_>>()?;
        for (i, &kt) in ktilde_list.iter().enumerate() {
            let prob = exceedance_probability(&y, &k_grid, kt);
            worst[i] = worst[i].max(prob);
            rows.push(vec![
                format!("{component:?}"),
                fmt_f64(kt),
                fmt_f64(prob),
            ]);
        }
    }
    for (i, &kt) in ktilde_list.iter().enumerate() {
        rows.push(vec!["worst_case".into(), fmt_f64(kt), fmt_f64(worst[i])]);
    }
    write_csv(out, &["component", "k_tilde", "exceedance"], &rows)?;
    emit_manifest(
        "ergodic",
        &format!("{}|{eps}|{tau}|{dir_index}|{ktilde_list:?}", ensemble_dir.display()),
        seeds,
        &[out],
        started,
    )
}

/// `scatterlab experiment`: the stability experiment, emitting row and
/// summary CSVs plus an SVG overview.
pub fn run_experiment(config: &Path, out_prefix: &str) -> Result<()> {
    let started = Instant::now();
    let cfg: ExperimentConfig = parse_config(config)?;
    let report = stability_experiment(&cfg)?;

    let rows_path = PathBuf::from(format!("{out_prefix}_rows.csv"));
    let summary_path = PathBuf::from(format!("{out_prefix}_summary.csv"));
    let svg_path = PathBuf::from(format!("{out_prefix}_curves.svg"));

    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.realization.to_string(),
                fmt_f64(r.band_k),
                fmt_f64(r.eps_sq),
                fmt_f64(r.rec_diff_sq),
                fmt_f64(r.h_diff_band_sq),
                fmt_f64(r.rec1_err_rel),
                fmt_f64(r.rec2_err_rel),
                fmt_f64(r.rhs),
                (r.success as u8).to_string(),
            ]
        })
        .collect();
    write_csv(
        &rows_path,
        &[
            "realization",
            "band_k",
            "eps_sq",
            "rec_diff_sq",
            "h_diff_band_sq",
            "rec1_err_rel",
            "rec2_err_rel",
            "stability_rhs",
            "success",
        ],
        &rows,
    )?;

    let summary: Vec<Vec<String>> = report
        .success_fraction
        .iter()
        .zip(&report.median_rec_error)
        .map(|((k, f), (_, med))| vec![fmt_f64(*k), fmt_f64(*f), fmt_f64(*med)])
        .collect();
    write_csv(
        &summary_path,
        &["band_k", "success_fraction", "median_rec_error"],
        &summary,
    )?;

    write_svg_lines(
        &svg_path,
        "stability experiment",
        &[
            (
                "success fraction".into(),
                report.success_fraction.clone(),
            ),
            (
                "median rec error".into(),
                report.median_rec_error.clone(),
            ),
        ],
    )?;
    emit_manifest(
        "experiment",
        &format!("{cfg:?}"),
        (0..cfg.ensemble.r as u64)
            .map(|r| cfg.seeds.base.wrapping_add(r))
            .collect(),
        &[&rows_path, &summary_path, &svg_path],
        started,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "scatterlab-pipe-{tag}-{}",
            std::process::id()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn synth_then_forward_then_reconstruct_runs() {
        let dir = scratch("chain");
        let cfg_path = dir.join("cfg.json");
        std::fs::write(
            &cfg_path,
            r#"{"grid": {"n": 16, "L": 0.7}, "field": {"radius": 0.25}, "tau": {"n": 4}}"#,
        )
        .unwrap();
        let pot_path = dir.join("v.ffpk");
        run_synth(&cfg_path, 7, &pot_path).unwrap();
        assert!(pot_path.exists());
        assert!(manifest_path(&pot_path).exists());

        let ds_path = dir.join("d.ffpk");
        run_forward(
            &pot_path,
            4.0,
            8.5,
            160,
            6,
            1e-8,
            SweepMethod::Born0,
            0,
            &ds_path,
        )
        .unwrap();

        let prefix = dir.join("rec").to_string_lossy().into_owned();
        run_reconstruct(&ds_path, None, 4, 6, &prefix).unwrap();
        assert!(PathBuf::from(format!("{prefix}_hhat.csv")).exists());
        assert!(PathBuf::from(format!("{prefix}_hrec.ffpk")).exists());
        assert!(PathBuf::from(format!("{prefix}_report.csv")).exists());
    }

    #[test]
    fn reruns_are_byte_identical_across_thread_counts() {
        let dir = scratch("det");
        let cfg_path = dir.join("cfg.json");
        std::fs::write(
            &cfg_path,
            r#"{"grid": {"n": 16, "L": 0.7}, "field": {"radius": 0.25}}"#,
        )
        .unwrap();
        let mut bytes = Vec::new();
        for threads in [1usize, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let pot_path = dir.join(format!("v{threads}.ffpk"));
            let ds_path = dir.join(format!("d{threads}.ffpk"));
            pool.install(|| {
                run_synth(&cfg_path, 11, &pot_path).unwrap();
                run_forward(
                    &pot_path,
                    4.0,
                    6.0,
                    40,
                    6,
                    1e-8,
                    SweepMethod::Born0,
                    0,
                    &ds_path,
                )
                .unwrap();
            });
            bytes.push((
                std::fs::read(&pot_path).unwrap(),
                std::fs::read(&ds_path).unwrap(),
            ));
        }
        assert_eq!(bytes[0].0, bytes[1].0, "potential differs across thread counts");
        assert_eq!(bytes[0].1, bytes[1].1, "dataset differs across thread counts");
    }
}

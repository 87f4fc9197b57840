//! Executes a [`RunConfig`] and writes its run directory.
//!
//! A run directory holds `config.txt`, `header.txt`, `index.txt`, the
//! snapshot payloads, `summary.txt` and, for 1D models, one
//! `spacetime_<species>.csv` per species (one row per snapshot, time first).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use rdspectral::adi::{adi_integrate, AdiTiming};
use rdspectral::{integrate, GridSpec, ModelSpec, State};

use crate::config::RunConfig;
use crate::snapshot::{Header, SnapshotWriter};
use crate::{CliError, Result};

pub const CONFIG_FILE: &str = "config.txt";
pub const SUMMARY_FILE: &str = "summary.txt";

const SPECIES_NAMES: [&str; 2] = ["u", "v"];

/// Spectral and ADI run statistics in one shape.
#[derive(Debug, Clone)]
pub struct Summary {
    pub final_state: State,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub reaction_evals: u64,
    pub transforms: u64,
    pub snapshots: usize,
    pub wall_time: Duration,
    pub mean_dt: f64,
    pub adi_timing: Option<AdiTiming>,
}

/// Integrates `cfg` from the model's initial condition, without touching disk.
pub fn simulate(cfg: &RunConfig, sink: &mut dyn FnMut(&State) -> rdspectral::Result<()>) -> Result<Summary> {
    let model = cfg.model_spec()?;
    let grid = cfg.grid()?;
    let initial = model.initial_condition(&grid)?;
    simulate_from(cfg, &model, &grid, initial, sink)
}

pub fn simulate_from(
    cfg: &RunConfig,
    model: &ModelSpec,
    grid: &GridSpec,
    initial: State,
    sink: &mut dyn FnMut(&State) -> rdspectral::Result<()>,
) -> Result<Summary> {
    match cfg.integrate_options() {
        Some(opts) => {
            let s = integrate(model, grid, initial, &opts, sink)?;
            let mean_dt = s.mean_dt();
            Ok(Summary {
                accepted_steps: s.accepted_steps,
                rejected_steps: s.rejected_steps,
                reaction_evals: s.counters.reaction_evals,
                transforms: s.counters.forward_transforms + s.counters.inverse_transforms,
                snapshots: s.snapshots,
                wall_time: s.wall_time,
                mean_dt,
                adi_timing: None,
                final_state: s.final_state,
            })
        }
        None => {
            let s = adi_integrate(model, grid, &initial, cfg.dt, cfg.t_final, cfg.snap_every, cfg.adi_variant, sink)?;
            Ok(Summary {
                mean_dt: if s.steps > 0 { cfg.t_final / s.steps as f64 } else { 0.0 },
                accepted_steps: s.steps,
                rejected_steps: 0,
                reaction_evals: s.reaction_evals,
                transforms: 0,
                snapshots: s.snapshots,
                wall_time: s.wall_time,
                adi_timing: Some(s.timing),
                final_state: s.final_state,
            })
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn summary_text(cfg: &RunConfig, outcome: &std::result::Result<Summary, &CliError>, snapshots: usize) -> String {
    let mut s = format!("model = {}\nscheme = {}\n", cfg.model, cfg.scheme);
    match outcome {
        Ok(sum) => {
            s.push_str("status = completed\n");
            s.push_str(&format!("t_final = {}\n", sum.final_state.t));
            s.push_str(&format!("accepted_steps = {}\n", sum.accepted_steps));
            s.push_str(&format!("rejected_steps = {}\n", sum.rejected_steps));
            s.push_str(&format!("reaction_evals = {}\n", sum.reaction_evals));
            s.push_str(&format!("transforms = {}\n", sum.transforms));
            s.push_str(&format!("mean_dt = {}\n", sum.mean_dt));
            s.push_str(&format!("wall_time_s = {:.6}\n", sum.wall_time.as_secs_f64()));
            if let Some(t) = &sum.adi_timing {
                s.push_str(&format!("adi_factorization_s = {:.6}\n", t.factorization.as_secs_f64()));
                s.push_str(&format!("adi_multiplies_s = {:.6}\n", t.multiplies.as_secs_f64()));
                s.push_str(&format!("adi_solves_s = {:.6}\n", t.solves.as_secs_f64()));
                s.push_str(&format!("adi_reaction_s = {:.6}\n", t.reaction.as_secs_f64()));
            }
        }
        Err(e) => {
            s.push_str("status = aborted\n");
            s.push_str(&format!("error = {}\n", e.to_string().replace('\n', " ")));
        }
    }
    s.push_str(&format!("snapshots = {snapshots}\n"));
    s
}

/// Runs `cfg`, writing its run directory. Numerical aborts still leave a
/// summary behind before the error is returned.
pub fn execute(cfg: &RunConfig) -> Result<Summary> {
    let model = cfg.model_spec()?;
    let grid = cfg.grid()?;
    let initial = model.initial_condition(&grid)?;
    let dir = cfg.out.as_path();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_text(&dir.join(CONFIG_FILE), &cfg.to_text())?;

    let header = Header {
        model: cfg.model.clone(),
        scheme: cfg.scheme.to_string(),
        n: grid.axes().iter().map(|a| a.n).collect(),
        half_length: cfg.half_length,
        species: model.diffusivities.len(),
        snap_every: cfg.snap_every,
    };
    let mut writer = SnapshotWriter::create(dir, header)?;
    let mut spacetime = Vec::new();
    if grid.dims() == 1 {
        let x = grid.coords(0);
        for k in 0..model.diffusivities.len() {
            let name = SPECIES_NAMES.get(k).map(|s| s.to_string()).unwrap_or_else(|| format!("s{k}"));
            let path = dir.join(format!("spacetime_{name}.csv"));
            let mut w = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
            let cols: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "t,{}", cols.join(",")).map_err(|e| CliError::io(&path, e))?;
            spacetime.push((path, w));
        }
    }

    let mut io_error = None;
    let outcome = simulate_from(cfg, &model, &grid, initial, &mut |s: &State| {
        let res = writer.write(s.t, &s.physical).and_then(|_| {
            for ((path, w), field) in spacetime.iter_mut().zip(&s.physical) {
                let row: Vec<String> = field.iter().map(|v| format!("{v:.16e}")).collect();
                writeln!(w, "{:.16e},{}", s.t, row.join(",")).map_err(|e| CliError::io(&*path, e))?;
            }
            Ok(())
        });
        match res {
            Ok(()) => Ok(()),
            Err(e) => {
                let msg = e.to_string();
                io_error = Some(e);
                Err(rdspectral::Error::InvalidConfig(msg))
            }
        }
    });
    let outcome = match (outcome, io_error) {
        (_, Some(e)) => Err(e),
        (o, None) => o,
    };
    for (path, mut w) in spacetime {
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    write_text(&dir.join(SUMMARY_FILE), &summary_text(cfg, &outcome.as_ref().map(Clone::clone), writer.count()))?;
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigMap;
    use crate::snapshot::read_run;

    fn cfg(text: &str, out: &Path) -> RunConfig {
        let mut m = ConfigMap::parse(text).unwrap();
        m.set("out", out.display());
        RunConfig::from_map(&m).unwrap()
    }

    #[test]
    fn one_dimensional_run_writes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("model = gray1d\nn = 64\ndt = 0.1\nt_final = 1\nsnap_every = 0.5", dir.path());
        let s = execute(&c).unwrap();
        assert_eq!(s.accepted_steps, 10);
        let (h, snaps) = read_run(dir.path()).unwrap();
        assert_eq!(h.n, vec![64]);
        let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 3);
        assert!((times[2] - 1.0).abs() < 1e-12);
        assert_eq!(snaps[2].fields, s.final_state.physical);

        let csv = fs::read_to_string(dir.path().join("spacetime_v.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        let last: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last.len(), 65);
        assert_eq!(&last[1..], &s.final_state.physical[1][..]);

        let summary = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert!(summary.contains("status = completed"));
        let again = RunConfig::parse(&fs::read_to_string(dir.path().join(CONFIG_FILE)).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn adi_run_records_timing() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("model = fisher2d\nscheme = adi\nn = 16\nL = 10\ndt = 0.1\nt_final = 0.3", dir.path());
        let s = execute(&c).unwrap();
        assert!(s.adi_timing.is_some());
        assert!(!dir.path().join("spacetime_u.csv").exists());
        let summary = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert!(summary.contains("adi_solves_s"));
    }

    #[test]
    fn blow_up_leaves_an_aborted_summary() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(
            "model = fisher1d\nn = 64\nL = 20\ndt = 5\nt_final = 200\nparam.delta = 1",
            dir.path(),
        );
        let err = execute(&c).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
        let summary = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert!(summary.contains("status = aborted"));
        assert!(summary.contains("blow-up"));
    }
}

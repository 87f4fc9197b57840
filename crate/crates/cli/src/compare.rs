//! Accuracy studies: several fixed-step schemes at several step sizes,
//! measured against a fine ETDRK4-B reference at the same final time.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rdspectral::postprocess::{least_squares_slope, max_abs_error};
use rdspectral::{Scheme, State};

use crate::config::{RunConfig, SchemeChoice};
use crate::run::simulate;
use crate::{CliError, Result};

pub const DEFAULT_GOLD_DT: f64 = 1e-3;
pub const DEFAULT_DTS: [f64; 4] = [0.8, 0.4, 0.2, 0.1];
pub const DEFAULT_SCHEMES: [SchemeChoice; 3] = [
    SchemeChoice::Spectral(Scheme::Rk4),
    SchemeChoice::Spectral(Scheme::Etdrk4),
    SchemeChoice::Spectral(Scheme::Etdrk4b),
];

#[derive(Debug, Clone)]
pub struct StudySpec {
    /// Model, grid, final time and dealiasing; its scheme and step are ignored.
    pub base: RunConfig,
    pub schemes: Vec<SchemeChoice>,
    pub dts: Vec<f64>,
    pub gold_dt: f64,
}

impl StudySpec {
    pub fn new(base: RunConfig) -> Self {
        Self {
            base,
            schemes: DEFAULT_SCHEMES.to_vec(),
            dts: DEFAULT_DTS.to_vec(),
            gold_dt: DEFAULT_GOLD_DT,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for s in &self.schemes {
            if matches!(s, SchemeChoice::Spectral(Scheme::Ck45)) {
                problems.push("compare: ck45 is adaptive; pick fixed-step schemes".to_string());
            }
            if *s == SchemeChoice::Adi && self.base.model != "fisher2d" {
                problems.push(format!("compare: adi is only available for fisher2d, not {}", self.base.model));
            }
        }
        if self.schemes.is_empty() || self.dts.is_empty() {
            problems.push("compare: need at least one scheme and one step size".into());
        }
        for dt in self.dts.iter().chain([&self.gold_dt]) {
            if !(*dt > 0.0 && dt.is_finite()) {
                problems.push(format!("compare: step sizes must be positive, got {dt}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(problems))
        }
    }

    fn member(&self, scheme: SchemeChoice, dt: f64) -> RunConfig {
        RunConfig {
            scheme,
            dt,
            snap_every: None,
            ..self.base.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub scheme: SchemeChoice,
    pub dt: f64,
    /// Max-abs difference from the reference over all species; `None` when
    /// the member run aborted.
    pub error: Option<f64>,
    pub abort: Option<String>,
    pub steps: u64,
    pub reaction_evals: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub gold: State,
    pub gold_wall_time: Duration,
    pub rows: Vec<ErrorRow>,
}

impl StudyResult {
    pub fn row(&self, scheme: SchemeChoice, dt: f64) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.dt == dt)
    }

    /// Least-squares slope of log error against log dt over the finite,
    /// nonzero errors of `scheme`.
    pub fn slope(&self, scheme: SchemeChoice) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .filter_map(|r| r.error.filter(|e| e.is_finite() && *e > 0.0).map(|e| (r.dt.ln(), e.ln())))
            .collect();
        (pts.len() >= 2).then(|| least_squares_slope(&pts))
    }

    pub fn errors_csv(&self) -> String {
        let mut s = String::from("scheme,dt,error,steps,reaction_evals,wall_time_s,status\n");
        for r in &self.rows {
            let err = r.error.map(|e| format!("{e:.16e}")).unwrap_or_else(|| "nan".into());
            let status = r.abort.as_deref().map(|a| a.replace(',', ";")).unwrap_or_else(|| "ok".into());
            s.push_str(&format!(
                "{},{},{err},{},{},{:.6},{status}\n",
                r.scheme,
                r.dt,
                r.steps,
                r.reaction_evals,
                r.wall_time.as_secs_f64()
            ));
        }
        s
    }

    pub fn slopes_csv(&self) -> String {
        let mut s = String::from("scheme,slope\n");
        let mut seen = Vec::new();
        for r in &self.rows {
            if seen.contains(&r.scheme) {
                continue;
            }
            seen.push(r.scheme);
            let slope = self.slope(r.scheme).map(|v| format!("{v:.6}")).unwrap_or_else(|| "nan".into());
            s.push_str(&format!("{},{slope}\n", r.scheme));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, text) in [("errors.csv", self.errors_csv()), ("slopes.csv", self.slopes_csv())] {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        }
        Ok(())
    }
}

/// Runs the reference, then every scheme/step pair concurrently. A failing
/// reference aborts the study; failing members are recorded and skipped.
pub fn run_study(spec: &StudySpec) -> Result<StudyResult> {
    spec.validate()?;
    let started = Instant::now();
    let gold_cfg = spec.member(SchemeChoice::Spectral(Scheme::Etdrk4b), spec.gold_dt);
    let gold = simulate(&gold_cfg, &mut |_| Ok(()))?.final_state;
    let gold_wall_time = started.elapsed();

    let pairs: Vec<(SchemeChoice, f64)> = spec
        .schemes
        .iter()
        .flat_map(|s| spec.dts.iter().map(move |dt| (*s, *dt)))
        .collect();
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .iter()
            .map(|&(scheme, dt)| {
                let cfg = spec.member(scheme, dt);
                let gold = &gold;
                scope.spawn(move || {
                    let t0 = Instant::now();
                    let outcome = simulate(&cfg, &mut |_| Ok(()));
                    let wall_time = t0.elapsed();
                    match outcome {
                        Ok(s) => ErrorRow {
                            scheme,
                            dt,
                            error: max_abs_error(&s.final_state.physical, &gold.physical).ok(),
                            abort: None,
                            steps: s.accepted_steps,
                            reaction_evals: s.reaction_evals,
                            wall_time,
                        },
                        Err(e) => ErrorRow {
                            scheme,
                            dt,
                            error: None,
                            abort: Some(e.to_string()),
                            steps: 0,
                            reaction_evals: 0,
                            wall_time,
                        },
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study member panicked"))
            .collect()
    });
    Ok(StudyResult {
        gold,
        gold_wall_time,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(t_final: f64) -> RunConfig {
        RunConfig::parse(&format!("model = gray1d\nn = 64\nt_final = {t_final}")).unwrap()
    }

    #[test]
    fn small_study_has_fourth_order_etd() {
        let spec = StudySpec {
            dts: vec![0.2, 0.1, 0.05],
            gold_dt: 0.005,
            ..StudySpec::new(base(2.0))
        };
        let r = run_study(&spec).unwrap();
        assert_eq!(r.rows.len(), 9);
        let slope = r.slope(SchemeChoice::Spectral(Scheme::Etdrk4b)).unwrap();
        assert!(slope > 3.5, "slope {slope}");
        assert!(r.errors_csv().lines().count() == 10);
        assert!(r.slopes_csv().contains("etdrk4,"));
    }

    #[test]
    fn adaptive_members_are_rejected() {
        let spec = StudySpec {
            schemes: vec![SchemeChoice::Spectral(Scheme::Ck45)],
            ..StudySpec::new(base(1.0))
        };
        assert!(matches!(run_study(&spec), Err(CliError::Invalid(_))));
    }

    #[test]
    fn member_abort_is_recorded() {
        let cfg = RunConfig::parse("model = fisher1d\nn = 64\nL = 20\nt_final = 100").unwrap();
        let spec = StudySpec {
            schemes: vec![SchemeChoice::Spectral(Scheme::Rk4)],
            dts: vec![5.0, 0.1],
            gold_dt: 0.05,
            ..StudySpec::new(cfg)
        };
        let r = run_study(&spec).unwrap();
        let bad = r.row(SchemeChoice::Spectral(Scheme::Rk4), 5.0).unwrap();
        assert!(bad.error.is_none() && bad.abort.is_some());
        assert!(r.row(SchemeChoice::Spectral(Scheme::Rk4), 0.1).unwrap().error.is_some());
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdspectral_cli::compare::{run_study, StudySpec};
use rdspectral_cli::config::{ConfigMap, SchemeChoice};
use rdspectral_cli::snapshot::upsample_file;
use rdspectral_cli::{run, CliError, Result, RunConfig};

/// Pseudospectral reaction-diffusion solver.
#[derive(Parser)]
#[command(name = "rdspectral", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one model and write a run directory.
    Run(RunArgs),
    /// Measure fixed-step errors against a fine ETDRK4-B reference.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated fixed-step schemes.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        /// Comma-separated step sizes.
        #[arg(long, value_delimiter = ',')]
        dts: Option<Vec<f64>>,
        #[arg(long)]
        gold_dt: Option<f64>,
    },
    /// Spectrally interpolate one snapshot onto a finer grid.
    Upsample {
        snapshot: PathBuf,
        /// New points along x.
        #[arg(long)]
        n: usize,
        /// New points along y (2D only; defaults to --n).
        #[arg(long)]
        ny: Option<usize>,
    },
    /// List the built-in models.
    ListModels,
    /// Show a model's equations, parameters and defaults.
    Describe { model: String },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// rk4, ck45, etdrk4, etdrk4b or adi.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Half-length of the periodic domain.
    #[arg(long = "L", allow_negative_numbers = true)]
    half_length: Option<String>,
    /// Step size (initial step for ck45).
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<String>,
    /// Relative tolerance for ck45.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    t_final: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    snap_every: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dealias: bool,
    /// `extrapolated` or `printed`.
    #[arg(long)]
    adi_variant: Option<String>,
    /// Model parameter override, `name=value`; repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut map = match &self.config {
            Some(p) => ConfigMap::load(p)?,
            None => ConfigMap::default(),
        };
        let flags = [
            ("model", &self.model),
            ("scheme", &self.scheme),
            ("n", &self.n),
            ("L", &self.half_length),
            ("dt", &self.dt),
            ("tol", &self.tol),
            ("t_final", &self.t_final),
            ("snap_every", &self.snap_every),
            ("adi_variant", &self.adi_variant),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.set(k, v);
            }
        }
        if let Some(out) = &self.out {
            map.set("out", out.display());
        }
        if self.dealias {
            map.set("dealias", true);
        }
        let mut problems = Vec::new();
        for p in &self.params {
            match p.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => map.set(&format!("param.{}", k.trim()), v.trim()),
                _ => problems.push(format!("--param: expected name=value, got `{p}`")),
            }
        }
        match RunConfig::from_map(&map) {
            Err(CliError::Invalid(mut more)) if !problems.is_empty() => {
                problems.append(&mut more);
                Err(CliError::Invalid(problems))
            }
            Ok(_) if !problems.is_empty() => Err(CliError::Invalid(problems)),
            other => other,
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run(args) => {
            let cfg = args.resolve()?;
            let s = run::execute(&cfg)?;
            println!(
                "{}: {} steps ({} rejected), {} reaction evaluations, {:.3} s -> {}",
                cfg.model,
                s.accepted_steps,
                s.rejected_steps,
                s.reaction_evals,
                s.wall_time.as_secs_f64(),
                cfg.out.display()
            );
        }
        Cmd::Compare {
            run,
            schemes,
            dts,
            gold_dt,
        } => {
            let base = run.resolve()?;
            let mut spec = StudySpec::new(base);
            if let Some(names) = schemes {
                let mut problems = Vec::new();
                spec.schemes = names
                    .iter()
                    .filter_map(|n| n.trim().parse::<SchemeChoice>().map_err(|e| problems.push(e)).ok())
                    .collect();
                if !problems.is_empty() {
                    return Err(CliError::Invalid(problems));
                }
            }
            if let Some(d) = dts {
                spec.dts = d;
            }
            if let Some(g) = gold_dt {
                spec.gold_dt = g;
            }
            let result = run_study(&spec)?;
            result.write(&spec.base.out)?;
            print!("{}", result.errors_csv());
            print!("{}", result.slopes_csv());
        }
        Cmd::Upsample { snapshot, n, ny } => {
            let (header, _) = rdspectral_cli::snapshot::read_file(&snapshot)?;
            let sizes = if header.n.len() == 2 { vec![n, ny.unwrap_or(n)] } else { vec![n] };
            let out = upsample_file(&snapshot, &sizes)?;
            println!("{}", out.display());
        }
        Cmd::ListModels => {
            for m in rdspectral::list_models() {
                println!("{m}");
            }
        }
        Cmd::Describe { model } => print!("{}", rdspectral::describe(&model)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

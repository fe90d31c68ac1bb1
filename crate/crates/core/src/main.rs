use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bargmann_fpo::poles::Method;
use bargmann_fpo::roots::Region;
use bargmann_fpo::sweep::{preset, run_experiment, ExperimentConfig, ExperimentKind};
use bargmann_fpo::{Error, Result};

#[derive(Parser)]
#[command(name = "bargmann-fpo", version, about = "Resonance poles of truncated Bargmann potentials")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Dump V(r) and its truncation.
    Potential(Common),
    /// Lattice phase shift against the exact one.
    PhaseShift(Common),
    /// Pole search with the selected methods.
    Poles(Common),
    /// Fixed points of the effective-Hamiltonian eigenvalues.
    FixedPoint(Common),
    /// Pole trajectories over a sweep of the cutoff radius.
    Trajectories(Common),
    /// Pole search with several methods and a matching report.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named experiment (fig1 .. fig9).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seeding grid, `N_RE,N_IM` or `N_RExN_IM`.
    #[arg(long)]
    grid: Option<String>,
    /// `re_min,re_max,im_min,im_max`
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Lattice constant.
    #[arg(long)]
    a: Option<f64>,
    /// Cutoff radius.
    #[arg(long)]
    rcut: Option<f64>,
    /// Comma-separated methods: transcendental, determinant, fixed_point.
    #[arg(long)]
    method: Option<String>,
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split([',', 'x']).collect();
    match parts[..] {
        [a, b] => {
            let p = |x: &str| x.trim().parse::<usize>().map_err(|e| Error::Config(format!("grid '{s}': {e}")));
            Ok((p(a)?, p(b)?))
        }
        _ => Err(Error::Config(format!("grid '{s}' needs two sizes"))),
    }
}

fn parse_methods(s: &str) -> Result<Vec<Method>> {
    s.split(',').map(|m| m.parse()).collect()
}

fn build(verb: &Verb) -> Result<ExperimentConfig> {
    let (common, kind, default_preset) = match verb {
        Verb::Potential(c) => (c, ExperimentKind::Potential, "fig1"),
        Verb::PhaseShift(c) => (c, ExperimentKind::PhaseShift, "fig2"),
        Verb::Poles(c) | Verb::FixedPoint(c) | Verb::Compare(c) => (c, ExperimentKind::Poles, "fig3"),
        Verb::Trajectories(c) => (c, ExperimentKind::Trajectories, "fig6"),
    };
    let mut config = match (&common.config, &common.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset(default_preset)?,
    };
    config.kind = kind;
    if let Some(dir) = &common.out_dir {
        config.output.dir = dir.clone();
    }
    if let Some(a) = common.a {
        config.lattice.a = a;
    }
    if let Some(r) = common.rcut {
        config.continuum.r_cut = r;
        config.lattice.radius = None;
    }
    if let Some(g) = &common.grid {
        let g = parse_grid(g)?;
        config.poles.grid = g;
        config.sweep.grid = g;
    }
    if let Some(r) = &common.region {
        let r: Region = r.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        config.poles.region = r;
        config.sweep.region = r;
    }
    let methods = common.method.as_deref().map(parse_methods).transpose()?;
    match verb {
        Verb::FixedPoint(_) => {
            config.poles.methods = vec![Method::FixedPoint];
            if methods.is_some() {
                return Err(Error::Config("fixed-point takes no --method".into()));
            }
        }
        Verb::Trajectories(_) => {
            if let Some(m) = methods {
                match m[..] {
                    [m] => config.sweep.method = m,
                    _ => return Err(Error::Config("trajectories take a single --method".into())),
                }
            }
        }
        Verb::Compare(_) => {
            if let Some(m) = methods {
                config.poles.methods = m;
            }
            if config.poles.methods.len() < 2 {
                return Err(Error::Config("compare needs at least two methods".into()));
            }
        }
        _ => {
            if let Some(m) = methods {
                config.poles.methods = m;
            }
        }
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = build(&cli.verb).and_then(|config| run_experiment(&config));
    match result {
        Ok(run) => {
            for path in &run.artifacts {
                println!("{}", path.display());
            }
            println!("{}", run.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

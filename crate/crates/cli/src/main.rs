use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use uqgeom::exact::{brute_force_distribution_capped, exact_distribution_with, DEFAULT_SUPPORT_CAP};
use uqgeom::geom::bbox_diameter;
use uqgeom::harness::{read_deviation_csv, save_raster, write_deviation_csv, Generator, DEFAULT_LEVELS};
use uqgeom::quantize::{write_csv, write_kd_csv};
use uqgeom::{
    build_eda_kernel, build_kvariate_quantization, build_quantization, build_random_sip, deterministic_sip,
    discretize_for_measure_with, extract_isolines, fit_sample_constant, isolines_to_svg, load_point_set,
    rasterize_sip, run_deviation_experiment, save_point_set, simplify, Bounds, Direction, DiscretizeOptions, Error,
    ExactOptions, ExperimentConfig, MeasureId, Result, SampleBudget, SipField, UncertainSet,
};

#[derive(Parser)]
#[command(name = "uqgeom", version, about = "Distributions of geometric measures over uncertain point sets")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file, or directory for `experiment`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Budget {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Sample count, overriding the computed budget.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct Grid {
    /// Raster size as `W,H`.
    #[arg(long, default_value = "200,200", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Query window as `x0,y0,x1,y1`. Defaults to the candidates' box grown
    /// by half its diameter.
    #[arg(long, value_parser = parse_bounds)]
    bounds: Option<Bounds>,
    /// Also write isolines at the default levels to this SVG file.
    #[arg(long)]
    isolines: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo ε-quantization of one measure.
    Quantize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[command(flatten)]
        budget: Budget,
        #[arg(long)]
        nu: Option<f64>,
        /// Reduce to at most ⌈2/ε⌉ breakpoints.
        #[arg(long)]
        simplify: bool,
    },
    /// Joint quantization of several measures.
    Kvariate {
        #[arg(long)]
        input: PathBuf,
        /// Semicolon-separated measures, e.g. `seb2;aabb-area`.
        #[arg(long, value_parser = parse_measure, value_delimiter = ';', num_args = 1..)]
        measures: Vec<MeasureId>,
        #[command(flatten)]
        budget: Budget,
        /// Merge into at most this many grid cells per axis.
        #[arg(long)]
        thin: Option<usize>,
    },
    /// (ε,δ,α)-kernel; writes width quantization along `--direction`, or
    /// the kernels as JSON.
    Kernel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        budget: Budget,
        /// Query direction as `ux,uy[,uz]`.
        #[arg(long, value_parser = parse_direction)]
        direction: Option<Direction>,
    },
    /// Sampled shape-inclusion probability raster (PGM plus JSON sidecar).
    SipRandom {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        grid: Grid,
    },
    /// Exact shape-inclusion probability raster.
    SipExact {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[command(flatten)]
        grid: Grid,
    },
    /// Exact distribution of an LP-type measure.
    Exact {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        /// Refuse scans of more candidate subsets than this.
        #[arg(long)]
        subset_cap: Option<u64>,
    },
    /// Distribution by enumerating every support.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
        cap: u64,
    },
    /// Continuous set to indecisive set for a measure.
    Discretize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        max_candidates: usize,
    },
    /// Deviation experiment on a cylinder or custom set.
    Experiment {
        /// Custom point set instead of the cylinder.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        /// Semicolon-separated measures; defaults to width at 75° to the
        /// axis, diameter and seb2.
        #[arg(long, value_parser = parse_measure, value_delimiter = ';')]
        measures: Vec<MeasureId>,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
        m: Vec<usize>,
        #[arg(long, default_value_t = 20_000)]
        eta: usize,
        #[arg(long, default_value_t = 200)]
        tau: usize,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
    },
    /// Fit the sample-size constant to a deviation CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
    },
}

fn parse_measure(s: &str) -> std::result::Result<MeasureId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_direction(s: &str) -> std::result::Result<Direction, String> {
    let c = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Direction::new(&c).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once(',').ok_or("expected W,H")?;
    let w: usize = w.trim().parse().map_err(|_| "bad width")?;
    let h: usize = h.trim().parse().map_err(|_| "bad height")?;
    if w == 0 || h == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((w, h))
}

fn parse_bounds(s: &str) -> std::result::Result<Bounds, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let [x0, y0, x1, y1] = v[..] else {
        return Err("expected x0,y0,x1,y1".into());
    };
    Bounds::new(x0, y0, x1, y1).map_err(|e| e.to_string())
}

fn load(path: &Path) -> Result<UncertainSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::Validation {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_point_set(&bytes)
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json(out: &Option<PathBuf>, v: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    emit(out, &s)
}

fn budget(b: &Budget, nu: f64) -> Result<SampleBudget> {
    let budget = SampleBudget::new(b.eps, b.delta, nu)?;
    match b.m {
        Some(m) => budget.with_m(m),
        None => Ok(budget),
    }
}

fn default_bounds(set: &UncertainSet) -> Result<Bounds> {
    let Some(ind) = set.as_indecisive() else {
        return Err(Error::InvalidParameter {
            name: "bounds",
            message: "continuous inputs need explicit --bounds".into(),
        });
    };
    let locs: Vec<_> = ind.all_locations().copied().collect();
    let pad = 0.5 * bbox_diameter(&locs).max(1e-9);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for l in &locs {
        x0 = x0.min(l.x());
        y0 = y0.min(l.y());
        x1 = x1.max(l.x());
        y1 = y1.max(l.y());
    }
    Bounds::new(x0 - pad, y0 - pad, x1 + pad, y1 + pad)
}

fn write_field(field: &SipField, set: &UncertainSet, grid: &Grid, out: &Option<PathBuf>) -> Result<()> {
    let Some(out) = out else {
        return Err(Error::InvalidParameter {
            name: "out",
            message: "raster output needs --out".into(),
        });
    };
    let bounds = match grid.bounds {
        Some(b) => b,
        None => default_bounds(set)?,
    };
    let raster = rasterize_sip(field, grid.grid.0, grid.grid.1, bounds)?;
    let raster = raster.as_raster().expect("rasterized");
    save_raster(raster, out)?;
    if let Some(svg) = &grid.isolines {
        let lines = extract_isolines(raster, &DEFAULT_LEVELS)?;
        std::fs::write(svg, isolines_to_svg(&lines, &bounds))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    let out = &cli.out;
    match cli.command {
        Command::Quantize {
            input,
            measure,
            budget: b,
            nu,
            simplify: reduce,
        } => {
            let set = load(&input)?;
            let q = build_quantization(&set, &measure, &budget(&b, nu.unwrap_or(1.0))?, seed)?;
            let q = if reduce { simplify(&q, b.eps)? } else { q };
            let mut buf = Vec::new();
            write_csv(&q, &mut buf)?;
            emit(out, &buf)
        }
        Command::Kvariate {
            input,
            measures,
            budget: b,
            thin,
        } => {
            let set = load(&input)?;
            let nu = measures.len() as f64;
            let q = build_kvariate_quantization(&set, &measures, &budget(&b, nu)?, seed)?;
            let q = match thin {
                Some(cells) => q.thin(cells),
                None => q,
            };
            let mut buf = Vec::new();
            write_kd_csv(&q, &mut buf)?;
            emit(out, &buf)
        }
        Command::Kernel {
            input,
            alpha,
            budget: b,
            direction,
        } => {
            let set = load(&input)?;
            let k = build_eda_kernel(&set, alpha, &budget(&b, set.dimension() as f64)?, seed)?;
            match direction {
                Some(u) => {
                    let mut buf = Vec::new();
                    write_csv(&k.query(&u).to_quantization()?, &mut buf)?;
                    emit(out, &buf)
                }
                None => emit_json(
                    out,
                    &json!({
                        "alpha": k.alpha,
                        "m": k.budget.m(),
                        "storage": k.storage(),
                        "kernels": k.kernels,
                    }),
                ),
            }
        }
        Command::SipRandom {
            input,
            measure,
            budget: b,
            grid,
        } => {
            let set = load(&input)?;
            let mut budget = SampleBudget::for_sip(b.eps, b.delta, &measure)?;
            if let Some(m) = b.m {
                budget = budget.with_m(m)?;
            }
            let field = build_random_sip(&set, &measure, &budget, seed)?;
            write_field(&field, &set, &grid, out)
        }
        Command::SipExact { input, measure, grid } => {
            let set = load(&input)?;
            let ind = indecisive(&set)?;
            let field = deterministic_sip(ind, &measure)?;
            write_field(&field, &set, &grid, out)
        }
        Command::Exact {
            input,
            measure,
            subset_cap,
        } => {
            let set = load(&input)?;
            let mut options = ExactOptions::default();
            if let Some(cap) = subset_cap {
                options.subset_cap = cap;
            }
            let d = exact_distribution_with(indecisive(&set)?, &measure, &options)?;
            let mut buf = Vec::new();
            write_csv(&d.collapsed, &mut buf)?;
            emit(out, &buf)
        }
        Command::Oracle { input, measure, cap } => {
            let set = load(&input)?;
            let d = brute_force_distribution_capped(indecisive(&set)?, &measure, cap)?;
            let mut buf = Vec::new();
            write_csv(&d.collapsed, &mut buf)?;
            emit(out, &buf)
        }
        Command::Discretize {
            input,
            measure,
            eps,
            max_candidates,
        } => {
            let set = load(&input)?;
            let Some(cont) = set.as_continuous() else {
                return Err(Error::InvalidParameter {
                    name: "input",
                    message: "discretize needs a continuous point set".into(),
                });
            };
            let d = discretize_for_measure_with(cont, &measure, eps, &DiscretizeOptions { max_candidates })?;
            emit(out, &save_point_set(&UncertainSet::from(d)))
        }
        Command::Experiment {
            input,
            n,
            length,
            radius,
            sigma,
            measures,
            m,
            eta,
            tau,
            nu,
        } => {
            let mut config = ExperimentConfig::desk_scale(seed);
            config.generator = match input {
                Some(p) => Generator::Custom(load(&p)?),
                None => Generator::Cylinder { n, length, radius, sigma },
            };
            if !measures.is_empty() {
                config.measures = measures;
            }
            config.m_values = m;
            config.eta = eta;
            config.tau = tau;
            config.nu = nu;
            let report = run_deviation_experiment(&config)?;
            let summary = serde_json::to_value(&report)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    for (i, m) in report.measures.iter().enumerate() {
                        let mut buf = Vec::new();
                        write_deviation_csv(&m.tables, &mut buf)?;
                        std::fs::write(dir.join(format!("deviations_{i}.csv")), buf)?;
                    }
                    emit_json(&Some(dir.join("report.json")), &summary)
                }
                None => emit_json(&None, &summary),
            }
        }
        Command::Fit { input, nu } => {
            let file = std::fs::File::open(&input).map_err(|e| Error::Validation {
                path: input.display().to_string(),
                message: e.to_string(),
            })?;
            let tables = read_deviation_csv(std::io::BufReader::new(file))?;
            let fit = fit_sample_constant(&tables, nu)?;
            emit_json(out, &serde_json::to_value(fit)?)
        }
    }
}

fn indecisive(set: &UncertainSet) -> Result<&uqgeom::IndecisivePointSet> {
    set.as_indecisive().ok_or_else(|| Error::InvalidParameter {
        name: "input",
        message: "this command needs an indecisive point set".into(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::CapExceeded { .. } => 3,
                ref e if e.is_validation() => 2,
                _ => 1,
            })
        }
    }
}

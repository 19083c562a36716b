use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lplab::config::{ExperimentConfig, KernelRef, ScaleSpec, Shape, ThetaSpec};
use lplab::family::Profile;
use lplab::scenarios::{constant_sequence, default_constants_grid, partition_for};
use lplab::{emit_report, run_experiment};
use lplab_core::constants::check_conditions;
use lplab_core::field::io::{read_field, write_field, write_field_csv};
use lplab_core::field::{Grid, SampledField};
use lplab_core::kernel::{make_builtin, BUILTIN_CATALOG};
use lplab_core::maximal::{grand_max, hl_max, peetre_max, GrandMaxConfig, PeetreParams};
use lplab_core::transforms::g_function;
use serde_json::json;

#[derive(Parser)]
#[command(name = "lplab", version, about = "Numerical lab for Littlewood-Paley square functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write report.json, ratios.csv and plotdata/.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Builtin kernels.
    Kernels {
        #[command(subcommand)]
        action: KernelsAction,
    },
    /// Calderon partition systems.
    Calderon {
        #[command(subcommand)]
        action: CalderonAction,
    },
    /// Kernel constants and condition checks.
    Constants {
        #[command(subcommand)]
        action: ConstantsAction,
    },
    /// Apply a maximal operator to a stored field.
    Maximal {
        #[arg(long, value_enum)]
        op: MaximalOp,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Peetre decay exponent.
        #[arg(long = "N", default_value_t = 2.0)]
        n: f64,
        /// Peetre frequency radius.
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Square functions of a stored field.
    Transform {
        #[command(subcommand)]
        action: TransformAction,
    },
    /// Sample test functions.
    Field {
        #[command(subcommand)]
        action: FieldAction,
    },
}

#[derive(Subcommand)]
enum KernelsAction {
    List,
}

#[derive(Subcommand)]
enum CalderonAction {
    Build {
        #[arg(long)]
        kernel: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = 1)]
        dimension: usize,
        /// Directory for calderon.json and eta_ray.csv; JSON goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ConstantsAction {
    Report {
        #[arg(long, default_value = "poissonQ")]
        phi: String,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, value_delimiter = ',')]
        psi_params: Vec<f64>,
        /// Exponent of the condition checks.
        #[arg(long = "N", default_value_t = 2.0)]
        n: f64,
        /// Weight exponent of the `C(psi, j, L)` table.
        #[arg(long = "L", default_value_t = 2.0)]
        l: f64,
        #[arg(long = "A", default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, value_enum, default_value_t = ThetaArg::One)]
        theta: ThetaArg,
        #[arg(long, default_value_t = 8)]
        j_max: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ThetaArg {
    Zero,
    One,
    Xi1,
}

impl From<ThetaArg> for ThetaSpec {
    fn from(t: ThetaArg) -> Self {
        match t {
            ThetaArg::Zero => ThetaSpec::Zero,
            ThetaArg::One => ThetaSpec::One,
            ThetaArg::Xi1 => ThetaSpec::Xi1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MaximalOp {
    Peetre,
    Hl,
    Grand,
}

#[derive(Subcommand)]
enum TransformAction {
    /// `g_psi(f)` over log-spaced scales.
    G {
        #[arg(long)]
        kernel: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        t_min: f64,
        #[arg(long, default_value_t = 1e3)]
        t_max: f64,
        #[arg(long, default_value_t = 96)]
        count: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    GaussianDerivative,
    ModulatedGaussian,
    BandNoise,
}

#[derive(Subcommand)]
enum FieldAction {
    Sample {
        #[arg(long, value_enum)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        translate: isize,
        #[arg(long, default_value_t = 1)]
        dimension: usize,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        #[arg(long, default_value_t = 16.0)]
        half_extent: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => run(&config, &out),
        Command::Kernels { action: KernelsAction::List } => {
            for (name, doc) in BUILTIN_CATALOG {
                println!("{name:<26} {doc}");
            }
            Ok(true)
        }
        Command::Calderon { action } => calderon(action).map(|_| true),
        Command::Constants { action } => constants(action).map(|_| true),
        Command::Maximal {
            op,
            input,
            out,
            n,
            r,
            csv,
        } => maximal(op, &input, &out, n, r, csv.as_deref()).map(|_| true),
        Command::Transform { action } => transform(action).map(|_| true),
        Command::Field { action } => field(action).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(config: &Path, out: &Path) -> Result<bool> {
    let cfg = ExperimentConfig::from_path(config)?;
    let report = run_experiment(&cfg)?;
    emit_report(&report, out)?;
    println!(
        "{:?}: {} rows, spread {}, {}",
        report.scenario,
        report.rows.len(),
        report.spread.map_or("n/a".to_string(), |s| format!("{s:.4}")),
        if report.pass { "PASS" } else { "FAIL" }
    );
    for d in report.failures() {
        println!("  failed {} [{}]: {} > {:?}", d.name, d.subject, d.value, d.bound);
    }
    Ok(report.pass)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn calderon(action: CalderonAction) -> Result<()> {
    let CalderonAction::Build {
        kernel,
        params,
        b,
        dimension,
        out,
    } = action;
    let phi = make_builtin(&kernel, &params)?;
    let p = partition_for(&phi, dimension, b)?;
    let summary = p.summary();
    let residual = p.annulus_residual(256, 16);
    let doc = json!({
        "kernel": kernel,
        "dimension": dimension,
        "b": summary.b,
        "b0": summary.b0,
        "intervals": summary.intervals,
        "r1": summary.r1,
        "r2": summary.r2,
        "plateau": summary.plateau,
        "threshold": summary.threshold,
        "reproducing_residual": residual,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    match out {
        None => println!("{text}"),
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            write_text(&dir.join("calderon.json"), &text)?;
            let mut csv = String::from("r,eta_re,eta_im,reproducing_sum_re\n");
            let (lo, hi) = (0.5 * p.r1(), 2.0 * p.r2());
            for k in 0..=400 {
                let r = lo + (hi - lo) * k as f64 / 400.0;
                let xi = [r, 0.0];
                let eta = p.eta(&xi[..dimension]);
                let s = p.reproducing_sum(&xi[..dimension]);
                csv.push_str(&format!("{r},{},{},{}\n", eta.re, eta.im, s.re));
            }
            write_text(&dir.join("eta_ray.csv"), &csv)?;
        }
    }
    Ok(())
}

fn constants(action: ConstantsAction) -> Result<()> {
    let ConstantsAction::Report {
        phi,
        psi,
        psi_params,
        n,
        l,
        a,
        b,
        theta,
        j_max,
        out,
    } = action;
    let phi_k = KernelRef::named(&phi).build()?;
    let psi_k = match &psi {
        Some(name) => make_builtin(name, &psi_params)?,
        None => phi_k.clone(),
    };
    let p = partition_for(&phi_k, 1, b)?;
    let g = default_constants_grid(1);
    let theta_k = ThetaSpec::from(theta).build();
    let rep = check_conditions(&p, &phi_k, &psi_k, &theta_k, a, n, &g, j_max)?;
    let seq = constant_sequence(&p, &psi_k, l, &g, j_max)?;
    let doc = json!({
        "phi": phi,
        "psi": psi_k.name(),
        "b": b,
        "L": l,
        "conditions": rep,
        "all_pass": rep.all_pass(),
        "c_sequence": seq,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    match out {
        None => println!("{text}"),
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            write_text(&dir.join("constants.json"), &text)?;
            let mut csv = String::from("j,t,value\n");
            for (j, v) in &seq {
                csv.push_str(&format!("{j},{},{v}\n", b.powi(*j as i32)));
            }
            write_text(&dir.join("c_vs_j.csv"), &csv)?;
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<SampledField> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_field(&mut BufReader::new(file))?)
}

fn store(f: &SampledField, path: &Path, csv: Option<&Path>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_field(&mut w, f)?;
    w.flush()?;
    if let Some(c) = csv {
        let file = File::create(c).with_context(|| format!("creating {}", c.display()))?;
        let mut w = BufWriter::new(file);
        write_field_csv(&mut w, f)?;
        w.flush()?;
    }
    Ok(())
}

fn maximal(op: MaximalOp, input: &Path, out: &Path, n: f64, r: f64, csv: Option<&Path>) -> Result<()> {
    let f = load(input)?;
    let m = match op {
        MaximalOp::Peetre => peetre_max(&f, PeetreParams::new(n, r)?),
        MaximalOp::Hl => hl_max(&f),
        MaximalOp::Grand => grand_max(&f, &GrandMaxConfig::default_for(f.grid())),
    };
    store(&m, out, csv)
}

fn transform(action: TransformAction) -> Result<()> {
    let TransformAction::G {
        kernel,
        params,
        q,
        input,
        out,
        t_min,
        t_max,
        count,
        csv,
    } = action;
    let psi = make_builtin(&kernel, &params)?;
    let scales = ScaleSpec { t_min, t_max, count }.build()?;
    let f = load(&input)?;
    store(&g_function(&f, &psi, &scales, q)?, &out, csv.as_deref())
}

fn field(action: FieldAction) -> Result<()> {
    let FieldAction::Sample {
        shape,
        lambda,
        translate,
        dimension,
        points,
        half_extent,
        seed,
        out,
        csv,
    } = action;
    let shape = match shape {
        ShapeArg::GaussianDerivative => Shape::GaussianDerivative,
        ShapeArg::ModulatedGaussian => Shape::ModulatedGaussian,
        ShapeArg::BandNoise => Shape::BandNoise,
    };
    let g = Grid::new(dimension, points, half_extent)?;
    let f = Profile::new(shape, dimension, seed).sample(&g, lambda, translate);
    store(&f, &out, csv.as_deref())
}

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use gq_core::baselines::train_lbg;
use gq_core::eval::voronoi::{voronoi_cells, voronoi_csv};
use gq_core::eval::{cell_stats_csv, lm_grid_mse};
use gq_core::highrate::analytic_distortion_hr;
use gq_core::io::{codebook_to_json, to_json_string};
use gq_core::sweep::{magnitude_profile, profile_csv, run_sweep, sweep_csv, SweepSpec};
use gq_core::{
    build_scheme, cell_statistics, empirical_entropy, load_codebook, mc_distortion, optimize_lloydmax, papr, rd_reference,
    Codebook, SchemeTag,
};

use crate::config::{CommonArgs, Effective};
use crate::CliError;

fn parse_scheme(s: &str) -> Result<SchemeTag, String> {
    s.parse::<SchemeTag>().map_err(|_| {
        let names: Vec<&str> = SchemeTag::ALL.iter().map(|t| t.as_str()).collect();
        format!("unknown scheme `{s}` (expected one of {})", names.join(", "))
    })
}

fn parse_n(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("`{s}` is not a codebook size >= 1")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// highrate, lloydmax, lbg, rect, polar, rect-uniform or polar-uniform
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: SchemeTag,
    /// Number of centroids
    #[arg(long, short = 'n', value_parser = parse_n)]
    pub n: usize,
    /// Also write the optimizer's distortion trace (lloydmax, lbg) as CSV
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

fn summary(cb: &Codebook) -> String {
    let m = cb.metadata();
    let d = match cb.scheme() {
        gq_core::Scheme::HighRateGQ => Some(("D_hr", analytic_distortion_hr(cb.len(), cb.sigma2()))),
        gq_core::Scheme::LloydMaxGQ => m.get("final_distortion").and_then(|v| v.as_f64()).map(|d| ("D_grid", d)),
        gq_core::Scheme::RectProduct => m.get("analytic_mse").and_then(|v| v.as_f64()).map(|d| ("D_analytic", d)),
        gq_core::Scheme::PolarProduct => m.get("grid_mse").and_then(|v| v.as_f64()).map(|d| ("D_grid", d)),
        gq_core::Scheme::LBG => m.get("training_distortion").and_then(|v| v.as_f64()).map(|d| ("D_train", d)),
    };
    let mut s = format!("scheme={} N={} rate={:.6} bits", cb.scheme(), cb.len(), cb.rate_bits());
    if let Some((name, d)) = d {
        let _ = write!(s, " {name}={d:.6e} ({:.4} dB)", 10.0 * (d / cb.sigma2()).log10());
    }
    s
}

pub fn gen(args: &GenArgs, common: &CommonArgs) -> Result<(), CliError> {
    let eff = Effective::resolve(common, None)?;
    let design = eff.design()?;
    let (cb, trace) = match args.scheme {
        SchemeTag::Lloydmax => {
            let (cb, state) = optimize_lloydmax(args.n, eff.sigma2, &design.lloydmax)?;
            (cb, Some(state.trace_csv()))
        }
        SchemeTag::Lbg => {
            let samples = design.lbg_samples_per_cell.max(gq_core::baselines::lbg::MIN_SAMPLES_PER_CELL) * args.n;
            let run = train_lbg(args.n, eff.sigma2, samples, eff.seed, eff.lbg_tol, eff.lbg_max_iter)?;
            let mut csv = String::from("iteration,distortion\n");
            for (k, d) in run.trace.iter().enumerate() {
                let _ = writeln!(csv, "{k},{d:.16e}");
            }
            (run.codebook, Some(csv))
        }
        tag => (build_scheme(tag, args.n, eff.sigma2, &design)?, None),
    };
    if let Some(path) = &args.trace {
        let csv = trace.ok_or_else(|| CliError::Usage(format!("--trace is only available for lloydmax and lbg, not {}", args.scheme)))?;
        emit(Some(path), &format!("# {}\n{csv}", eff.json_line()))?;
    }
    let cb = cb.with_meta("config", eff.json());
    emit(common.out.as_deref(), &codebook_to_json(&cb))?;
    if common.out.is_some() {
        println!("{}", summary(&cb));
    } else {
        eprintln!("{}", summary(&cb));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Codebook JSON file
    pub codebook: PathBuf,
    /// Write per-cell statistics (grid quadrature) as CSV
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Write Voronoi cell boundaries, clipped to the grid square, as CSV polylines
    #[arg(long)]
    pub voronoi: Option<PathBuf>,
    /// Add the grid-quadrature MSE to the report metadata
    #[arg(long)]
    pub grid: bool,
    /// Add the empirical index entropy to the report metadata
    #[arg(long)]
    pub entropy: bool,
}

pub fn eval(args: &EvalArgs, common: &CommonArgs) -> Result<(), CliError> {
    let cb = load_codebook(&args.codebook)?;
    let eff = Effective::resolve(common, Some(cb.sigma2()))?;
    let source = eff.source();
    let mut report = mc_distortion(&cb, &source, eff.samples, eff.seed)?;
    report.metadata.insert("config".into(), eff.json());
    report.metadata.insert("papr_db".into(), papr(&cb, None).ok().into());
    if args.entropy {
        let h = empirical_entropy(&cb, &source, eff.samples, eff.seed)?;
        report.metadata.insert("entropy_bits".into(), h.into());
    }
    if args.grid || args.cells.is_some() {
        let grid = eff.grid()?;
        if args.grid {
            report.metadata.insert("grid_mse".into(), lm_grid_mse(&cb, &source, &grid)?.into());
        }
        if let Some(path) = &args.cells {
            let stats = cell_statistics(&cb, &source, &grid)?;
            emit(Some(path), &format!("# {}\n{}", eff.json_line(), cell_stats_csv(&stats)))?;
        }
    }
    if let Some(path) = &args.voronoi {
        let cells = voronoi_cells(cb.centroids(), eff.grid_extent);
        emit(Some(path), &format!("# {}\n{}", eff.json_line(), voronoi_csv(&cells)))?;
    }
    emit(common.out.as_deref(), &to_json_string(&report))
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated schemes
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme, default_value = "highrate,lloydmax,lbg,rect,polar")]
    pub schemes: Vec<SchemeTag>,
    /// Comma-separated codebook sizes (any N >= 1)
    #[arg(long, value_delimiter = ',', value_parser = parse_n, default_value = "16,64,256")]
    pub ns: Vec<usize>,
}

pub fn sweep(args: &SweepArgs, common: &CommonArgs) -> Result<(), CliError> {
    let eff = Effective::resolve(common, None)?;
    let spec = SweepSpec {
        schemes: args.schemes.clone(),
        ns: args.ns.clone(),
        sigma2: eff.sigma2,
        seed: eff.seed,
        samples: eff.samples,
    };
    let rows = run_sweep(&spec, &eff.design()?)?;
    emit(common.out.as_deref(), &sweep_csv(&rows, Some(&eff.json_line())))
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Comma-separated golden schemes
    #[arg(long, visible_alias = "scheme", value_delimiter = ',', value_parser = parse_scheme, default_value = "highrate,lloydmax")]
    pub schemes: Vec<SchemeTag>,
    /// Comma-separated codebook sizes
    #[arg(long, value_delimiter = ',', value_parser = parse_n, default_value = "16,64,256")]
    pub ns: Vec<usize>,
}

pub fn profile(args: &ProfileArgs, common: &CommonArgs) -> Result<(), CliError> {
    let eff = Effective::resolve(common, None)?;
    let design = eff.design()?;
    let mut rows = Vec::new();
    for &tag in &args.schemes {
        rows.extend(magnitude_profile(tag, &args.ns, eff.sigma2, &design)?);
    }
    emit(common.out.as_deref(), &profile_csv(&rows, Some(&eff.json_line())))
}

#[derive(Debug, Args)]
pub struct RdArgs {
    /// Comma-separated rates in bits per complex sample
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,1,2,3,4,5,6,7,8,9,10")]
    pub rates: Vec<f64>,
}

pub fn rd(args: &RdArgs, common: &CommonArgs) -> Result<(), CliError> {
    let eff = Effective::resolve(common, None)?;
    let curve = rd_reference(eff.sigma2, &args.rates)?;
    let mut out = format!("# {}\nrate,distortion,distortion_db\n", eff.json_line());
    for (r, d) in curve {
        let _ = writeln!(out, "{r:.16e},{d:.16e},{:.16e}", 10.0 * (d / eff.sigma2).log10());
    }
    emit(common.out.as_deref(), &out)
}

//! Batch command-line surface over the sphq library.
//!
//! File conventions: radial functions are CSV with header `node,value`;
//! spectral functions are CSV with header `node,value_re,value_im`;
//! exponents and symbols are JSON specification files; reports and suite
//! manifests are JSON. Sampled inputs are resampled onto the requested
//! transform grids by cubic interpolation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sphq::audit::{audit_pipeline, PipelineConfig};
use sphq::exponent::GangolliExponent;
use sphq::galerkin::{alpha0_compute, assemble_bilinear_form, solve_resolvent};
use sphq::grid::{RadialFunction, SpectralFunction};
use sphq::psdo::{
    apply_psdo, fractional_laplacian, fractional_laplacian_subordinated, SubordinationOpts,
};
use sphq::semigroup::evolve;
use sphq::suite::{export_plots, render_table, run_suite, SuiteConfig};
use sphq::symbol::{audit_a1, GridSpec, PsiSpec, SymbolSpec};
use sphq::transform::TruncationPolicy;
use sphq::{Result, SphericalTransform, SphqError};

#[derive(Parser)]
#[command(
    name = "sphq",
    about = "Spherical-transform calculus on real hyperbolic spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Spectral truncation Lambda.
    #[arg(long, default_value_t = 40.0)]
    lmax: f64,
    /// Radial truncation R.
    #[arg(long, default_value_t = 20.0)]
    rmax: f64,
    /// Quadrature panels per axis (16 Gauss nodes each).
    #[arg(long, default_value_t = 250)]
    panels: usize,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            r_max: self.rmax,
            lambda_max: self.lmax,
            radial_panels: self.panels,
            spectral_panels: self.panels,
            nodes_per_panel: 16,
        }
    }
}

fn parse_space(s: &str) -> std::result::Result<i64, String> {
    match s {
        "h2" => Ok(2),
        "h3" => Ok(3),
        other => other
            .strip_prefix("hd:")
            .and_then(|d| d.parse::<i64>().ok())
            .ok_or_else(|| format!("expected h2 | h3 | hd:<d>, got '{other}'")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Forward or inverse spherical transform of a sampled function.
    Transform {
        #[arg(long, value_parser = parse_space)]
        space: i64,
        /// fwd (radial -> spectral) or inv (spectral -> radial).
        #[arg(long, value_parser = ["fwd", "inv"])]
        dir: String,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        grids: GridArgs,
        /// Accept truncation risk at the grid boundary.
        #[arg(long)]
        allow_truncation: bool,
    },
    /// Applies a symbol file as a pseudodifferential operator.
    PsdoApply {
        #[arg(long, value_name = "FILE")]
        symbol: PathBuf,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Fractional Laplacian by multiplier or Bochner subordination.
    FracLaplacian {
        #[arg(long, value_parser = parse_space)]
        space: i64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_parser = ["multiplier", "subordination"], default_value = "multiplier")]
        route: String,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        grids: GridArgs,
    },
    /// Runs the certification chain on a symbol file.
    SymbolAudit {
        #[arg(long, value_name = "FILE")]
        symbol: PathBuf,
        /// Smoothness order (even); overrides the file value.
        #[arg(long = "M")]
        m_order: Option<usize>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Semigroup evolution by an exponent file.
    Evolve {
        #[arg(long, value_name = "FILE")]
        psi: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Galerkin resolvent solve (q(sigma,D) + alpha) u = f.
    Solve {
        #[arg(long, value_name = "FILE")]
        symbol: PathBuf,
        /// Shift alpha, or 'auto' for alpha_0 + 1.
        #[arg(long, default_value = "auto")]
        alpha: String,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        nbasis: usize,
        /// Spectral band of the Galerkin basis.
        #[arg(long, default_value_t = 10.0)]
        lambda_gal: f64,
        /// Where to write the JSON solve report.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Runs the invariant suite and writes the manifest.
    Suite {
        /// JSON suite configuration (defaults to the reference run).
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Run only checks whose name contains one of these substrings.
        #[arg(long)]
        only: Vec<String>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Emits plot-ready CSV columns.
    ExportPlots {
        #[arg(long, value_parser = parse_space)]
        space: i64,
        /// psi | heat | resolvent | residual-curve
        #[arg(long)]
        kind: String,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        grids: GridArgs,
    },
}

fn build_transform(dimension: i64, spec: &GridSpec) -> Result<SphericalTransform> {
    let (rgrid, sgrid) = spec.build();
    SphericalTransform::new(dimension, rgrid, sgrid)
}

fn load_radial(path: &PathBuf, t: &SphericalTransform) -> Result<RadialFunction> {
    let f = RadialFunction::read_csv(path)?;
    Ok(f.resample(t.rgrid()))
}

fn policy(allow: bool) -> TruncationPolicy {
    if allow {
        TruncationPolicy::Allow
    } else {
        TruncationPolicy::Strict
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Transform {
            space,
            dir,
            r#in,
            out,
            grids,
            allow_truncation,
        } => {
            let t = build_transform(space, &grids.spec())?;
            match dir.as_str() {
                "fwd" => {
                    let f = load_radial(&r#in, &t)?;
                    let fhat = t.forward(&f, policy(allow_truncation))?;
                    fhat.write_csv(&out)?;
                }
                _ => {
                    let raw = SpectralFunction::read_csv(&r#in)?;
                    // Resample onto the transform's spectral grid.
                    let vals: Vec<f64> = raw.real_values();
                    let nodes = raw.grid.nodes.clone();
                    let fhat = SpectralFunction::from_fn(t.sgrid(), |l| {
                        if l > *nodes.last().unwrap() {
                            0.0
                        } else {
                            sphq::grid::interp_cubic(&nodes, &vals, l)
                        }
                    });
                    let f = t.inverse(&fhat, policy(allow_truncation))?;
                    f.write_csv(&out)?;
                }
            }
            eprintln!(
                "calibrated plancherel_scale = {:.12e}",
                t.calibration().plancherel_scale
            );
            Ok(())
        }
        Command::PsdoApply { symbol, r#in, out } => {
            let spec = SymbolSpec::from_file(&symbol)?;
            let t = build_transform(spec.dimension, &spec.grids)?;
            let sym = spec.build_symbol(t.space(), t.sgrid())?;
            let f = load_radial(&r#in, &t)?;
            let g = apply_psdo(&t, &sym, &f, TruncationPolicy::Strict)?;
            g.write_csv(&out)?;
            Ok(())
        }
        Command::FracLaplacian {
            space,
            beta,
            route,
            r#in,
            out,
            grids,
        } => {
            let t = build_transform(space, &grids.spec())?;
            let f = load_radial(&r#in, &t)?;
            let g = match route.as_str() {
                "multiplier" => fractional_laplacian(&t, &f, beta, TruncationPolicy::Strict)?,
                _ => {
                    if (beta - 1.0).abs() > 1e-12 {
                        return Err(SphqError::usage(
                            "the subordination route realizes beta = 1",
                        ));
                    }
                    fractional_laplacian_subordinated(
                        &t,
                        &f,
                        SubordinationOpts::default(),
                        TruncationPolicy::Strict,
                    )?
                }
            };
            g.write_csv(&out)?;
            Ok(())
        }
        Command::SymbolAudit {
            symbol,
            m_order,
            out,
        } => {
            let mut spec = SymbolSpec::from_file(&symbol)?;
            if let Some(m) = m_order {
                spec.m_order = m;
            }
            let t = build_transform(spec.dimension, &spec.grids)?;
            let sym = spec.build_symbol(t.space(), t.sgrid())?;
            let report = audit_pipeline(&t, &sym, &PipelineConfig::default())?;
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            for stage in &report.stages {
                eprintln!("{:<20} {:?}: {}", stage.name, stage.status, stage.detail);
            }
            if report.pass {
                Ok(())
            } else {
                Err(SphqError::usage("audit failed; see the report"))
            }
        }
        Command::Evolve { psi, t, r#in, out } => {
            let spec = PsiSpec::from_file(&psi)?;
            let tr = build_transform(spec.dimension, &spec.grids)?;
            let exponent: GangolliExponent = spec.psi.build(tr.space())?;
            let f = load_radial(&r#in, &tr)?;
            let g = evolve(&tr, &exponent, &f, t, TruncationPolicy::Strict)?;
            g.write_csv(&out)?;
            Ok(())
        }
        Command::Solve {
            symbol,
            alpha,
            r#in,
            out,
            nbasis,
            lambda_gal,
            report,
        } => {
            let spec = SymbolSpec::from_file(&symbol)?;
            let t = build_transform(spec.dimension, &spec.grids)?;
            let sym = spec.build_symbol(t.space(), t.sgrid())?;
            let a1 = audit_a1(&sym, &sym.psi, t.sgrid());
            if !a1.pass {
                return Err(SphqError::usage(
                    "symbol fails the comparability audit; no coercive solve",
                ));
            }
            let alpha0 = alpha0_compute(&sym, &sym.psi, a1.c0, t.sgrid());
            let alpha_val = if alpha == "auto" {
                alpha0 + 1.0
            } else {
                let v: f64 = alpha
                    .parse()
                    .map_err(|_| SphqError::usage("alpha must be a number or 'auto'"))?;
                if v < alpha0 {
                    return Err(SphqError::usage(format!(
                        "alpha = {v} below the coercivity shift alpha_0 = {alpha0:.6}"
                    )));
                }
                v
            };
            let f = load_radial(&r#in, &t)?;
            let sys = assemble_bilinear_form(&t, &sym, alpha_val, a1.c0, nbasis, lambda_gal)?;
            let solved = solve_resolvent(&t, &sys, &f)?;
            solved.u.write_csv(&out)?;
            let summary = serde_json::json!({
                "alpha": alpha_val,
                "alpha0": alpha0,
                "c0": a1.c0,
                "c1": a1.c1,
                "n_basis": nbasis,
                "lambda_gal": lambda_gal,
                "residual_rel": solved.residual_rel,
            });
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
            }
            eprintln!("residual_rel = {:.3e}", solved.residual_rel);
            Ok(())
        }
        Command::Suite { config, only, out } => {
            let mut cfg: SuiteConfig = match config {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => SuiteConfig::default(),
            };
            if !only.is_empty() {
                cfg.only = Some(only);
            }
            let manifest = run_suite(&cfg)?;
            print!("{}", render_table(&manifest));
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
            }
            if manifest.all_pass {
                Ok(())
            } else {
                Err(SphqError::usage("suite failed"))
            }
        }
        Command::ExportPlots {
            space,
            kind,
            out,
            grids,
        } => {
            let t = build_transform(space, &grids.spec())?;
            let data = export_plots(&t, &kind)?;
            data.write_csv(&out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

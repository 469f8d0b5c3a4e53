use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ffr_core::experiments::calibrate::{linear_grid, reference_targets};
use ffr_core::experiments::config::load_sim_config;
use ffr_core::experiments::figures::Figure;
use ffr_core::experiments::validation;
use ffr_core::experiments::{
    calibrate_unstated, emit, run_sweep, write_plot_csv, Axis, CalibratedRecord, CalibrationOptions, Format,
    SweepMode, SweepOptions, SweepSpec,
};
use ffr_core::simulator::{SimConfig, Workers};

#[derive(Parser)]
#[command(name = "ffr", version, about = "Modified FFR coverage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Evaluate grid points concurrently.
    #[arg(long)]
    parallel_points: bool,
}

impl RunArgs {
    fn options(&self) -> SweepOptions {
        SweepOptions {
            workers: Workers::from_count(Some(self.workers)),
            parallel_points: self.parallel_points,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter, optionally overlaid with a second.
    Sweep {
        /// threshold_T_dB, beta, alpha or power_ratio_a.
        #[arg(long)]
        axis: String,
        /// Comma list `v1,v2,...` or range `lo:step:hi`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// `axis=v1,v2,...`.
        #[arg(long, allow_hyphen_values = true)]
        overlay: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        drops: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the SIR stage and report CEU density only.
        #[arg(long)]
        classification_only: bool,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write long-format plot data here.
        #[arg(long)]
        emit_plot: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check the simulator against the closed forms; exits nonzero on failure.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        drops: u64,
        /// Path-loss α of the CEU-density cross-check; defaults to the calibrated value.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Fit the constants the reference figures leave unstated.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 20_000)]
        drops: u64,
        #[arg(long, default_value = "calibration/record.toml")]
        out: PathBuf,
        /// JSON report with residuals and nearest misses.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Regenerate one reference figure's data.
    Reproduce {
        /// fig3, fig4 or fig5.
        figure: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Calibration record; the bundled one by default.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long)]
        drops: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Coarse grid instead of 1 dB / 0.1 steps.
        #[arg(long)]
        coarse: bool,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        emit_plot: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let [lo, step, hi] = [parts[0], parts[1], parts[2]].map(|p| p.trim().parse::<f64>());
        let (lo, step, hi) = (lo?, step?, hi?);
        if !(step > 0.0 && hi >= lo) {
            bail!("range `{s}` needs step > 0 and hi >= lo");
        }
        return Ok(linear_grid(lo, hi, step));
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad grid value `{v}`")))
        .collect()
}

fn parse_overlay(s: &str) -> anyhow::Result<(Axis, Vec<f64>)> {
    let (axis, values) = s.split_once('=').context("overlay must look like `axis=v1,v2`")?;
    Ok((Axis::parse(axis.trim())?, parse_grid(values)?))
}

fn base_config(path: Option<&Path>, drops: Option<u64>, seed: Option<u64>) -> anyhow::Result<SimConfig> {
    let mut cfg = match path {
        Some(p) => load_sim_config(p)?,
        None => SimConfig::default(),
    };
    if let Some(d) = drops {
        cfg.n_drops = d;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_record(path: Option<&Path>) -> anyhow::Result<CalibratedRecord> {
    Ok(match path {
        Some(p) => CalibratedRecord::load(p)?,
        None => CalibratedRecord::bundled(),
    })
}

fn write_outputs(
    result: &ffr_core::experiments::SweepResult,
    format: &str,
    out: &Path,
    plot: Option<&Path>,
    figure: &str,
) -> anyhow::Result<()> {
    emit(result, Format::parse(format)?, out)?;
    if let Some(p) = plot {
        write_plot_csv(result, figure, p)?;
    }
    eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Sweep {
            axis,
            grid,
            overlay,
            config,
            drops,
            seed,
            classification_only,
            format,
            out,
            emit_plot,
            run,
        } => {
            let base = base_config(config.as_deref(), drops, seed)?;
            let mut spec = SweepSpec::new(base, Axis::parse(&axis)?, parse_grid(&grid)?);
            if let Some(o) = overlay {
                let (axis, values) = parse_overlay(&o)?;
                spec = spec.with_overlay(axis, values);
            }
            if classification_only {
                spec = spec.with_mode(SweepMode::ClassificationOnly);
            }
            let result = run_sweep(&spec, run.options())?;
            write_outputs(&result, &format, &out, emit_plot.as_deref(), "sweep")?;
            Ok(true)
        }
        Command::Validate {
            config,
            drops,
            alpha,
            calibration,
            workers,
        } => {
            let base = base_config(config.as_deref(), Some(drops), None)?;
            let alpha = match alpha {
                Some(a) => a,
                None => load_record(calibration.as_deref())?.ceu_density_alpha,
            };
            let checks = validation::run_all(&base, alpha, drops, Workers::from_count(Some(workers)))?;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Calibrate {
            config,
            drops,
            out,
            report,
            workers,
        } => {
            let opts = CalibrationOptions {
                base: base_config(config.as_deref(), None, None)?,
                drops,
                workers: Workers::from_count(Some(workers)),
                ..CalibrationOptions::default()
            };
            let rep = calibrate_unstated(&reference_targets(), &opts)?;
            for fit in &rep.fits {
                println!("{} feasible={} parameters={:?}", fit.figure, fit.feasible, fit.parameters);
                for r in &fit.residuals {
                    println!(
                        "  {} {:?}: predicted {:.4} score {:.3}",
                        if r.satisfied { "ok  " } else { "MISS" },
                        r.target.anchor,
                        r.predicted,
                        r.score
                    );
                }
            }
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            rep.record.save(&out)?;
            if let Some(p) = report {
                std::fs::write(&p, serde_json::to_string_pretty(&rep)?).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(rep.feasible())
        }
        Command::Reproduce {
            figure,
            config,
            calibration,
            drops,
            seed,
            coarse,
            format,
            out,
            emit_plot,
            run,
        } => {
            let fig = Figure::parse(&figure)?;
            let base = base_config(config.as_deref(), drops, seed)?;
            let record = load_record(calibration.as_deref())?;
            let spec = if coarse { fig.coarse_spec(&base, &record)? } else { fig.spec(&base, &record)? };
            let result = run_sweep(&spec, run.options())?;
            write_outputs(&result, &format, &out, emit_plot.as_deref(), fig.name())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

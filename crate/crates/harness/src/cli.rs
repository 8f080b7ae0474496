//! Argument parsing and dispatch. Every option can also come from the
//! config file; command-line values win.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use qrl_core::fisher::default_eta_schedule;
use qrl_core::unitary::{EdgeId, UnitaryParams, Vertex};

use crate::commands;
use crate::config::{parse_fixed, parse_list, pick, ConfigFile};
use crate::error::{HarnessError, Result};
use crate::report::{rows_to_string, Metric, Status};
use crate::run::{coordinate, run_sweep, Settings, SweepPlan};
use crate::svg::{render, Series};

#[derive(Debug, Parser)]
#[command(name = "qrl", version, about = "Figures of merit for reading quantum information stored in a qubit")]
pub struct Cli {
    /// `key = value` file with [global] and per-command sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the random probe starts.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Decreasing comma-separated cutoffs for the averaged QFI.
    #[arg(long, global = true)]
    pub eta_schedule: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report h2, bound and averaged QFI at a vertex.
    Vertex {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample one metric along one or more edges.
    Sweep {
        /// Edge name, or a comma-separated list of edges.
        #[arg(long)]
        edge: Option<String>,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        /// Plot abscissa: `coordinate` (t pi/2) or `norm` (|alpha|).
        #[arg(long)]
        x_axis: Option<String>,
    },
    /// Tabulate the one-shot bound over epsilon and n.
    Bound {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        epsilons: Option<String>,
        #[arg(long)]
        ns: Option<String>,
        #[arg(long)]
        probe: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Averaged QFI at one point, per cutoff.
    Qfi {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        probe: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn section(&self) -> &'static str {
        match self {
            Command::Vertex { .. } => "vertex",
            Command::Sweep { .. } => "sweep",
            Command::Bound { .. } => "bound",
            Command::Qfi { .. } => "qfi",
        }
    }
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required (flag or config file)")))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Global settings from flags, then the file, then defaults.
pub fn settings(cli: &Cli, file: &ConfigFile, section: &str) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(seed) = pick(cli.seed, file, section, "seed")? {
        s.seed = seed;
    }
    if let Some(w) = pick(cli.workers, file, section, "workers")? {
        s.workers = w;
    }
    if let Some(k) = file.parsed::<usize>(section, "extra_starts")? {
        s.extra_starts = k;
    }
    if let Some(k) = file.parsed::<usize>(section, "probe_grid")? {
        s.capacity.probe_grid = k;
        s.fisher.probe_grid = k;
    }
    let eta = cli.eta_schedule.clone().or_else(|| file.get(section, "eta_schedule").map(String::from));
    s.fisher.eta_schedule = match eta {
        Some(text) => parse_list::<f64>(&text, "eta-schedule")?,
        None => default_eta_schedule(),
    };
    qrl_core::fisher::check_schedule(&s.fisher.eta_schedule).map_err(|e| usage(format!("--eta-schedule: {e}")))?;
    Ok(s)
}

fn params_from(text: &str) -> Result<UnitaryParams<f64>> {
    let a = parse_fixed::<3>(text, "alpha")?;
    Ok(UnitaryParams::from_array(a)?)
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::empty(),
    };
    let section = cli.command.section();
    let mut settings = settings(&cli, &file, section)?;

    match &cli.command {
        Command::Vertex { name, epsilon, n, out } => {
            let name: String = required(pick(name.clone(), &file, section, "name")?, "name")?;
            let vertex: Vertex = name.parse().map_err(usage)?;
            if let Some(e) = pick(*epsilon, &file, section, "epsilon")? {
                settings.epsilon = e;
            }
            if let Some(n) = pick(*n, &file, section, "n")? {
                settings.n = n;
            }
            let out_path: Option<PathBuf> = pick(out.clone(), &file, section, "out")?;
            let rows = commands::vertex_rows(vertex, &settings);
            open_out(out_path.as_deref())?.write_all(rows_to_string(&rows)?.as_bytes())?;
            fail_on_non_converged(&rows)
        }
        Command::Sweep {
            edge,
            metric,
            samples,
            svg,
            out,
            epsilon,
            n,
            x_axis,
        } => {
            let edges: String = required(pick(edge.clone(), &file, section, "edge")?, "edge")?;
            let edges: Vec<EdgeId> = parse_list(&edges, "edge")?;
            if edges.is_empty() {
                return Err(usage("--edge names no edge"));
            }
            let metric: String = required(pick(metric.clone(), &file, section, "metric")?, "metric")?;
            let metric: Metric = metric.parse().map_err(usage)?;
            let samples: usize = required(pick(*samples, &file, section, "samples")?, "samples")?;
            if samples < 2 {
                return Err(usage("--samples must be at least 2"));
            }
            if let Some(e) = pick(*epsilon, &file, section, "epsilon")? {
                settings.epsilon = e;
            }
            if let Some(n) = pick(*n, &file, section, "n")? {
                settings.n = n;
            }
            let out_path: PathBuf = required(pick(out.clone(), &file, section, "out")?, "out")?;
            let svg_path: Option<PathBuf> = pick(svg.clone(), &file, section, "svg")?;
            let axis = pick(x_axis.clone(), &file, section, "x_axis")?.unwrap_or_else(|| "coordinate".into());
            let by_norm = match axis.as_str() {
                "coordinate" => false,
                "norm" => true,
                other => return Err(usage(format!("--x-axis '{other}', expected coordinate or norm"))),
            };

            let plan = SweepPlan { edges, metric, samples };
            let rows = run_sweep(&plan, &settings)?;
            std::fs::write(&out_path, rows_to_string(&rows)?)?;
            if let Some(p) = svg_path {
                let series: Vec<Series> = plan
                    .edges
                    .iter()
                    .map(|e| Series {
                        name: e.name().to_string(),
                        points: rows
                            .iter()
                            .filter(|r| r.edge == e.name())
                            .filter_map(|r| {
                                let x = if by_norm { r.alpha_norm } else { coordinate(r.t?) };
                                Some((x, r.value?))
                            })
                            .collect(),
                    })
                    .collect();
                let x_label = if by_norm { "|alpha|" } else { "edge coordinate" };
                std::fs::write(p, render(&series, x_label, metric.name()))?;
            }
            fail_on_non_converged(&rows)
        }
        Command::Bound {
            alpha,
            epsilons,
            ns,
            probe,
            out,
        } => {
            let alpha: String = required(pick(alpha.clone(), &file, section, "alpha")?, "alpha")?;
            let params = params_from(&alpha)?;
            let eps: String = required(pick(epsilons.clone(), &file, section, "epsilons")?, "epsilons")?;
            let eps: Vec<f64> = parse_list(&eps, "epsilons")?;
            let ns: String = required(pick(ns.clone(), &file, section, "ns")?, "ns")?;
            let ns: Vec<u64> = parse_list(&ns, "ns")?;
            let probe = pick(probe.clone(), &file, section, "probe")?
                .map(|p: String| parse_fixed::<2>(&p, "probe"))
                .transpose()?;
            let out_path: Option<PathBuf> = pick(out.clone(), &file, section, "out")?;
            commands::bound_table(open_out(out_path.as_deref())?, &params, probe, &eps, &ns, &settings)
        }
        Command::Qfi { alpha, probe, out } => {
            let alpha: String = required(pick(alpha.clone(), &file, section, "alpha")?, "alpha")?;
            let params = params_from(&alpha)?;
            let probe = pick(probe.clone(), &file, section, "probe")?
                .map(|p: String| parse_fixed::<2>(&p, "probe"))
                .transpose()?;
            let out_path: Option<PathBuf> = pick(out.clone(), &file, section, "out")?;
            let result = commands::qfi_result(&params, probe, &settings)?;
            commands::qfi_table(open_out(out_path.as_deref())?, &params, &result)?;
            if !result.converged {
                return Err(HarnessError::Numerical("probe optimization did not converge".into()));
            }
            Ok(())
        }
    }
}

// The output is written first so partial results survive.
fn fail_on_non_converged(rows: &[crate::report::MeritRow]) -> Result<()> {
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r.status == Status::NonConverged)
        .map(|r| format!("{} t={:?} {}", r.edge, r.t, r.metric))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Numerical(format!("non-converged points: {}", bad.join("; "))))
    }
}

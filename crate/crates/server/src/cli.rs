//! Command-line interface.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use farpls_core::campaign::{CampaignPool, Mode};
use farpls_core::features::FeatureConfig;
use farpls_core::pipeline::{self, load_features, read_json, PoolFile};
use farpls_core::similarity::ClusterAssignment;
use farpls_core::simulate::{simulate, Schedule, SimulationConfig};
use farpls_core::store::{export_labels, ExportFormat, LabelStore};
use farpls_core::synth::TrajectorySynth;
use farpls_core::trajectory::serialize_trajectory;

use crate::api::{router, AppState};
use crate::config::{CampaignConfig, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "farpls",
    version,
    about = "Pairwise preference labeling for robot trajectories"
)]
pub struct Cli {
    /// Campaign config file (TOML).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Pipeline work directory; overrides the config.
    #[arg(long, global = true)]
    pub work: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Farpls,
    Baseline,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScheduleArg {
    RoundRobin,
    Sequential,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic trajectory files.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        min_steps: usize,
        #[arg(long, default_value_t = 170)]
        max_steps: usize,
    },
    /// Parse, validate and filter trajectory files into the work directory.
    Ingest {
        dir: PathBuf,
        #[arg(long, default_value_t = pipeline::DEFAULT_MAX_DURATION_S)]
        max_duration: f64,
    },
    /// Extract features of every ingested trajectory.
    Features {
        /// Also store the per-step feature channels.
        #[arg(long)]
        series: bool,
    },
    /// Build DTW distance matrices and cluster with k-medoids.
    Cluster {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw the labeling pool by stratified weighted sampling.
    Sample {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the labeling service.
    Serve,
    /// Run synthetic labelers through a fresh in-memory campaign.
    Simulate {
        #[arg(long, default_value_t = 21)]
        users: usize,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 0.25)]
        noise: f64,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
        #[arg(long, default_value_t = 0)]
        utility_seed: u64,
        #[arg(long, value_enum, default_value = "round-robin")]
        schedule: ScheduleArg,
        /// Write the full report (with traces) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the campaign's labels.
    Export {
        #[arg(long, default_value = "labels")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = CampaignConfig::load(cli.config.as_deref())?;
    if let Some(work) = cli.work {
        config.work_dir = work;
    }
    let work = config.work_dir.clone();
    match cli.command {
        Command::Synth {
            out,
            n,
            seed,
            min_steps,
            max_steps,
        } => {
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for g in TrajectorySynth::new(seed).generate_many(n, min_steps..=max_steps) {
                let path = out.join(format!("{}.jsonl", g.trajectory.id));
                fs::write(&path, serialize_trajectory(&g.trajectory))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!("wrote {n} trajectories to {}", out.display());
        }
        Command::Ingest { dir, max_duration } => {
            let m = pipeline::ingest(&dir, &work, max_duration)?;
            println!(
                "ingested {} trajectories ({} filtered, {} rejected) into {}",
                m.trajectories.len(),
                m.filtered.len(),
                m.rejected.len(),
                work.display()
            );
            for r in &m.rejected {
                eprintln!("rejected {}: {}", r.file, r.reason);
            }
        }
        Command::Features { series } => {
            let n = pipeline::features(&work, &FeatureConfig::default(), series)?;
            println!("extracted features for {n} trajectories");
        }
        Command::Cluster { k, seed } => {
            let k = k.unwrap_or(config.cluster.k);
            let seed = seed.unwrap_or(config.cluster.seed);
            let c = pipeline::cluster(&work, k, seed, config.weights, &FeatureConfig::default())?;
            println!(
                "clustered into {k} groups of sizes {:?}; medoids {:?}",
                c.sizes(),
                c.medoids
            );
        }
        Command::Sample { m, seed } => {
            let m = m.unwrap_or(config.sample.m);
            let seed = seed.unwrap_or(config.sample.seed);
            let pool = pipeline::sample(&work, m, seed)?;
            println!(
                "sampled {} trajectories: {}",
                pool.ids.len(),
                pool.ids.join(", ")
            );
        }
        Command::Serve => serve(config)?,
        Command::Simulate {
            users,
            mode,
            noise,
            tau,
            utility_seed,
            schedule,
            out,
        } => {
            let mut options = config.options();
            if let Some(m) = mode {
                options.mode = match m {
                    ModeArg::Farpls => Mode::Farpls,
                    ModeArg::Baseline => Mode::Baseline,
                };
            }
            let sim = SimulationConfig {
                users,
                utility_seed,
                noise_sd: noise,
                tie_threshold: tau,
                schedule: match schedule {
                    ScheduleArg::RoundRobin => Schedule::RoundRobin,
                    ScheduleArg::Sequential => Schedule::Sequential,
                },
            };
            let report = simulate(options, load_pool(&config)?, &sim)?;
            println!(
                "{} users, {} unique + {} check labels over {} pairs",
                report.users,
                report.unique_labels,
                report.check_labels,
                report.pairs.len()
            );
            println!(
                "label count per pair: min {} max {}",
                report.count_min, report.count_max
            );
            println!("mean pair disagreement {:.4}", report.mean_disagreement);
            println!("mean consistency {:.3}", report.mean_consistency);
            if let Some(out) = out {
                pipeline::write_json(&out, &report)?;
                println!("report written to {}", out.display());
            }
        }
        Command::Export { format, out } => {
            let format: ExportFormat = format.parse()?;
            let store = LabelStore::open(config.data_dir.join(farpls_core::campaign::LABELS_FILE))?;
            let bytes = export_labels(store.log(), format);
            match out {
                Some(path) => fs::write(&path, bytes)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&bytes)?;
                }
            }
        }
    }
    Ok(())
}

fn load_pool(config: &CampaignConfig) -> anyhow::Result<Arc<CampaignPool>> {
    config.check_inputs()?;
    let pool: PoolFile = read_json(&config.pool_path())?;
    let clusters: ClusterAssignment = read_json(&config.clusters_path())?;
    let features = load_features(&config.work_dir, &pool.ids)?;
    Ok(Arc::new(CampaignPool::new(
        &pool.ids, &clusters, &features,
    )?))
}

fn serve(config: CampaignConfig) -> anyhow::Result<()> {
    let state = Arc::new(AppState::from_config(&config)?);
    let app = router(state, config.static_dir.clone());
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&config.bind)
            .await
            .with_context(|| format!("binding {}", config.bind))?;
        println!(
            "serving {} campaign on http://{}",
            serde_json::to_value(config.mode)?
                .as_str()
                .unwrap_or("farpls"),
            listener.local_addr()?
        );
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

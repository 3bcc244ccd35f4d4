//! `sndn`: generate traces, run single simulations and parameter sweeps.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use sndn_core::baselines::SchemeId;
use sndn_core::engine::{
    events_csv, metrics_row, requests_csv, run, short_hash, trace_hash, MetricsReport, SimConfig,
    METRICS_HEADER,
};
use sndn_core::traces::{generate_synthetic_trace, load_trace_dir, write_trace_dir, TraceSet};

use config::{ConfigFile, TraceSpecFile};

#[derive(Parser)]
#[command(name = "sndn", version, about = "Named-data content retrieval over contact traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace directory.
    GenTrace {
        /// TOML file with a `[synthetic]` table.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one simulation.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        scheme: Option<SchemeId>,
    },
    /// Run the cross-product of an experiment file's `[sweep]` axes.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trace_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        parallelism: Option<usize>,
        /// Restrict the sweep to one scheme.
        #[arg(long)]
        scheme: Option<SchemeId>,
    },
    /// Check a trace directory and optionally a configuration.
    Validate {
        #[arg(long)]
        trace_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenTrace { config, out, seed } => gen_trace(config.as_deref(), &out, seed),
        Command::Run {
            config,
            trace_dir,
            out,
            seed,
            scheme,
        } => run_one(config.as_deref(), &trace_dir, &out, seed, scheme),
        Command::Sweep {
            config,
            trace_dir,
            out,
            parallelism,
            scheme,
        } => sweep(&config, &trace_dir, &out, parallelism, scheme),
        Command::Validate { trace_dir, config } => validate(&trace_dir, config.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if is_missing_file(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

/// The error chain joined with `: `, skipping causes already spelled out by
/// their parent's message.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn is_missing_file(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::NotFound)
    })
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn gen_trace(config: Option<&Path>, out: &Path, seed: Option<u64>) -> Result<ExitCode> {
    let mut spec = match config {
        Some(p) => TraceSpecFile::load(p)?.synthetic,
        None => Default::default(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let set: TraceSet = generate_synthetic_trace(&spec)?.into();
    write_trace_dir(out, &set)?;
    println!(
        "wrote {}: {} nodes, {} stations, {} contacts, {} items, trace {}",
        out.display(),
        set.bundle.nodes.len(),
        set.bundle.base_stations.len(),
        set.bundle.events.len(),
        set.catalog.items.len(),
        trace_hash(&set.bundle, &set.catalog, &set.profiles)
    );
    Ok(ExitCode::SUCCESS)
}

fn run_one(
    config: Option<&Path>,
    trace_dir: &Path,
    out: &Path,
    seed: Option<u64>,
    scheme: Option<SchemeId>,
) -> Result<ExitCode> {
    let file = load_config(config)?;
    let mut cfg = file.to_sim();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = scheme {
        cfg.scheme = s;
    }
    cfg.validate()?;
    let set = load_trace_dir(trace_dir)?;
    let output = run(&cfg, &set.bundle, &set.catalog, &set.profiles)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(
        &out.join("metrics.csv"),
        &format!("{METRICS_HEADER}\n{}\n", metrics_row(&output.report, &cfg)),
    )?;
    write(&out.join("events.csv"), &events_csv(&output.events))?;
    write(&out.join("requests.csv"), &requests_csv(&output.requests))?;
    write(&out.join("config.toml"), &ConfigFile::from_sim(&cfg).to_toml())?;
    let r = &output.report;
    println!("scheme          {}", r.scheme);
    println!("config          {}", r.config_hash);
    println!("trace           {}", r.trace_hash);
    println!("requests        {} ({} direct-served)", r.created, r.direct_served);
    println!("delivery ratio  {:.4}", r.delivery_ratio);
    println!("actual delay    {:.1} s", r.actual_delay);
    println!("overhead        {:.3}", r.overhead);
    Ok(ExitCode::SUCCESS)
}

type SweepKey = (SchemeId, u64, f64, u64, f64);

fn key_of(c: &SimConfig) -> SweepKey {
    (c.scheme, c.ttl, c.params.alpha, c.params.window, c.kappa)
}

fn cmp_key(a: &SweepKey, b: &SweepKey) -> std::cmp::Ordering {
    a.0.as_str()
        .cmp(b.0.as_str())
        .then(a.1.cmp(&b.1))
        .then(a.2.total_cmp(&b.2))
        .then(a.3.cmp(&b.3))
        .then(a.4.total_cmp(&b.4))
}

fn sweep(
    config: &Path,
    trace_dir: &Path,
    out: &Path,
    parallelism: Option<usize>,
    scheme: Option<SchemeId>,
) -> Result<ExitCode> {
    let mut file = ConfigFile::load(config)?;
    if let Some(s) = scheme {
        file.sweep.get_or_insert_with(Default::default).scheme = vec![s];
    }
    let mut runs = file.expand()?;
    let set = load_trace_dir(trace_dir)?;
    runs.sort_by(|a, b| cmp_key(&key_of(a), &key_of(b)).then(a.seed.cmp(&b.seed)));
    log::info!("sweep: {} runs", runs.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.unwrap_or(0))
        .build()
        .map_err(|e| anyhow!("thread pool: {e}"))?;
    let results: Vec<Result<MetricsReport, String>> = pool.install(|| {
        runs.par_iter()
            .map(|cfg| {
                run(cfg, &set.bundle, &set.catalog, &set.profiles)
                    .map(|o| o.report)
                    .map_err(|e| e.to_string())
            })
            .collect()
    });

    std::fs::create_dir_all(out.join("configs"))
        .with_context(|| format!("creating {}", out.display()))?;
    let mut csv = format!("{METRICS_HEADER},status\n");
    let mut failures = 0usize;
    let mut groups: BTreeMap<usize, Vec<&MetricsReport>> = BTreeMap::new();
    let mut group_of: Vec<usize> = Vec::with_capacity(runs.len());
    for (i, cfg) in runs.iter().enumerate() {
        let g = match group_of.last() {
            Some(&g) if cmp_key(&key_of(&runs[i - 1]), &key_of(cfg)).is_eq() => g,
            Some(&g) => g + 1,
            None => 0,
        };
        group_of.push(g);
        let hash = cfg.hash();
        write(
            &out.join("configs").join(format!("{hash}.toml")),
            &ConfigFile::from_sim(cfg).to_toml(),
        )?;
        match &results[i] {
            Ok(report) => {
                csv.push_str(&format!("{},ok\n", metrics_row(report, cfg)));
                groups.entry(g).or_default().push(report);
            }
            Err(msg) => {
                failures += 1;
                log::error!("run {hash} failed: {msg}");
                csv.push_str(&format!(
                    "{},{},{},{},{},{},,,,,,,{},failed\n",
                    cfg.scheme, cfg.ttl, cfg.params.alpha, cfg.params.window, cfg.kappa, cfg.seed, hash
                ));
            }
        }
    }
    for (g, reports) in &groups {
        let first = group_of.iter().position(|x| x == g).expect("group has a run");
        let cfg = &runs[first];
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(|r| f(r)).sum::<f64>() / n;
        let hashes: Vec<&str> = reports.iter().map(|r| r.config_hash.as_str()).collect();
        csv.push_str(&format!(
            "{},{},{},{},{},-1,{:.6},{:.3},{:.6},{:.2},{:.2},{:.2},{},aggregate\n",
            cfg.scheme,
            cfg.ttl,
            cfg.params.alpha,
            cfg.params.window,
            cfg.kappa,
            mean(&|r| r.delivery_ratio),
            mean(&|r| r.actual_delay),
            mean(&|r| r.overhead),
            mean(&|r| r.delivered as f64),
            mean(&|r| r.expired as f64),
            mean(&|r| r.direct_served as f64),
            short_hash(hashes.join(",").as_bytes())
        ));
    }
    write(&out.join("metrics.csv"), &csv)?;
    println!(
        "{} runs, {} failed, {} aggregate rows -> {}",
        runs.len(),
        failures,
        groups.len(),
        out.join("metrics.csv").display()
    );
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn validate(trace_dir: &Path, config: Option<&Path>) -> Result<ExitCode> {
    let set = load_trace_dir(trace_dir)?;
    let b = &set.bundle;
    println!(
        "trace {}: {} nodes ({} stations), {} contacts, horizon {} s",
        trace_hash(b, &set.catalog, &set.profiles),
        b.nodes.len(),
        b.base_stations.len(),
        b.events.len(),
        b.horizon
    );
    println!(
        "catalog: {} items over {} components; {} profiles",
        set.catalog.items.len(),
        set.catalog.namespace.len(),
        set.profiles.len()
    );
    if let Some(path) = config {
        let file = ConfigFile::load(path)?;
        let runs = file.expand()?;
        for cfg in &runs {
            if b.horizon < cfg.warmup {
                return Err(anyhow!(
                    "horizon {} s is shorter than warm-up {} s",
                    b.horizon,
                    cfg.warmup
                ));
            }
        }
        println!("config {}: {} run(s)", path.display(), runs.len());
    }
    Ok(ExitCode::SUCCESS)
}

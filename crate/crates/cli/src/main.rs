//! Command-line entry point: run the experiment suites, validate configs,
//! dump topologies, export traces.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use steersim_core::config::SimConfig;
use steersim_core::engine::results::{aggregate_csv, raw_csv, summary_table, Provenance};
use steersim_core::engine::rng::{stream_rng, Stream};
use steersim_core::engine::{run_batch, CaseId, RunResult, ScenarioKind};
use steersim_core::policy::{available_policies, BASELINE_3GPP, FLOW_CONTROLLED};
use steersim_core::topology::place_topology;

#[derive(Parser)]
#[command(
    name = "steersim",
    version,
    about = "Multi-RAT traffic steering simulator: NR macro cell + Wi-Fi APs under a flow controller"
)]
struct Cli {
    /// TOML config file; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Number of deployment seeds (overrides the config).
    #[arg(long, global = true)]
    seeds: Option<u32>,
    /// Explicit comma-separated seed list (overrides --seeds).
    #[arg(long, global = true, value_delimiter = ',')]
    seed_list: Vec<u64>,
    /// Parallel worker bound for seed execution.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the five service-mix cases under both policies.
    DownlinkCases,
    /// Run the uplink/downlink decoupling scenario under both policies.
    UplinkDecoupling,
    /// Run one scenario under one policy.
    Single {
        /// One of case-a..case-e, uplink-decoupling, single-ue.
        #[arg(long, default_value = "case-c")]
        scenario: String,
        #[arg(long, default_value = FLOW_CONTROLLED)]
        policy: String,
        /// Write control-plane setup traces as newline-delimited JSON.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Schema-check the config and print the effective parameter set.
    Validate,
    /// Write one seeded deployment as CSV (ue_id, x, y, ap_id, dual_connected).
    DumpTopology {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; defaults to <out>/topology-<seed>.csv.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(1);
        }
    };

    let outcome = match cli.jobs {
        Some(jobs) => {
            let pool = match rayon_pool(jobs) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("runtime error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            pool.install(|| dispatch(&cli, &cfg))
        }
        None => dispatch(&cli, &cfg),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("runtime error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn rayon_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building worker pool")
}

fn load_config(cli: &Cli) -> Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    if let Some(n) = cli.seeds {
        cfg.run.deployments = n;
        cfg.run.seeds.clear();
    }
    if !cli.seed_list.is_empty() {
        cfg.run.seeds = cli.seed_list.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli, cfg: &SimConfig) -> Result<()> {
    match &cli.cmd {
        Cmd::DownlinkCases => {
            let scenarios: Vec<ScenarioKind> =
                CaseId::ALL.iter().map(|c| ScenarioKind::Case(*c)).collect();
            run_suite(cli, cfg, &scenarios, &[FLOW_CONTROLLED, BASELINE_3GPP], "downlink")
        }
        Cmd::UplinkDecoupling => run_suite(
            cli,
            cfg,
            &[ScenarioKind::UplinkDecoupling],
            &[FLOW_CONTROLLED, BASELINE_3GPP],
            "uplink",
        ),
        Cmd::Single {
            scenario,
            policy,
            trace_out,
        } => {
            let kind = ScenarioKind::parse(scenario)?;
            if !available_policies().contains(&policy.as_str()) {
                anyhow::bail!(
                    "unknown policy {policy:?}; available: {}",
                    available_policies().join(", ")
                );
            }
            let seeds = cfg.seed_list();
            let result = run_batch(cfg, &[kind], &[policy.as_str()], &seeds)?;
            if let Some(path) = trace_out {
                let mut nd = String::new();
                for row in &result.rows {
                    for tr in &row.setup_traces {
                        nd.push_str(&tr.to_ndjson());
                    }
                }
                write_atomic(path, nd.as_bytes())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            write_artifacts(cli, cfg, &result, "single", &[policy.as_str()])
        }
        Cmd::Validate => {
            print_effective(cfg);
            Ok(())
        }
        Cmd::DumpTopology { seed, file } => {
            let topo = place_topology(
                &cfg.topology,
                &mut stream_rng(*seed, Stream::ApPlacement),
                &mut stream_rng(*seed, Stream::UePlacement),
                &mut stream_rng(*seed, Stream::DualSelection),
            );
            let mut csv = String::from("ue_id,x,y,ap_id,dual_connected\n");
            for (ue, x, y, ap, dual) in topo.dump_rows() {
                csv.push_str(&format!(
                    "{ue},{x:.3},{y:.3},{},{dual}\n",
                    ap.map(|a| a.to_string()).unwrap_or_default()
                ));
            }
            let path = file
                .clone()
                .unwrap_or_else(|| cli.out.join(format!("topology-{seed}.csv")));
            write_atomic(&path, csv.as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
            for w in &topo.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn run_suite(
    cli: &Cli,
    cfg: &SimConfig,
    scenarios: &[ScenarioKind],
    policies: &[&str],
    prefix: &str,
) -> Result<()> {
    let seeds = cfg.seed_list();
    let result = run_batch(cfg, scenarios, policies, &seeds)?;
    write_artifacts(cli, cfg, &result, prefix, policies)
}

fn write_artifacts(
    cli: &Cli,
    cfg: &SimConfig,
    result: &RunResult,
    prefix: &str,
    policies: &[&str],
) -> Result<()> {
    let seeds = cfg.seed_list();
    let prov = Provenance::new(seeds.first().copied().unwrap_or(0), cfg.content_hash());

    let raw = raw_csv(&result.rows, &prov);
    let agg = aggregate_csv(result, &prov);
    let summary = summary_table(result, policies);

    let raw_path = cli.out.join(format!("{prefix}-raw.csv"));
    let agg_path = cli.out.join(format!("{prefix}-aggregate.csv"));
    let sum_path = cli.out.join(format!("{prefix}-summary.txt"));
    write_atomic(&raw_path, raw.as_bytes())
        .with_context(|| format!("writing {}", raw_path.display()))?;
    write_atomic(&agg_path, agg.as_bytes())
        .with_context(|| format!("writing {}", agg_path.display()))?;
    write_atomic(&sum_path, summary.as_bytes())
        .with_context(|| format!("writing {}", sum_path.display()))?;

    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    print!("{summary}");
    println!(
        "wrote {} rows to {} (aggregates: {})",
        result.rows.len(),
        raw_path.display(),
        agg_path.display()
    );
    Ok(())
}

/// Write via a temp file and rename, so a failed run never leaves a partial
/// artifact behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Keys the parameter table does not provide; their defaults are this
/// artifact's choices.
const ARTIFACT_KEYS: &[&str] = &[
    "run.",
    "topology.dual_fraction",
    "topology.ue_placement",
    "topology.ap_placement",
    "topology.ap_annulus_inner_m",
    "topology.ap_edge_margin_m",
    "nr.snr_good_db",
    "wifi.ue_gain_dbi",
    "wifi.ue_height_m",
    "wifi.ap_noise_figure_db",
    "wifi.ue_noise_figure_db",
    "selection.load_low_ratio",
    "selection.load_high_ratio",
    "selection.ue_order",
    "selection.proactive_nas_path",
    "nr_mac.s_slot_dl_fraction",
    "nr_mac.slot_duration_us",
    "dcf.",
    "cn.",
    "measurement.",
];

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, val, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn print_effective(cfg: &SimConfig) {
    let mut actual = Vec::new();
    let mut default = Vec::new();
    flatten(
        "",
        &serde_json::to_value(cfg).expect("config serializes"),
        &mut actual,
    );
    flatten(
        "",
        &serde_json::to_value(SimConfig::default()).expect("config serializes"),
        &mut default,
    );
    let defaults: std::collections::BTreeMap<_, _> = default.into_iter().collect();

    println!("effective configuration ({} keys):", actual.len());
    for (key, value) in actual {
        let tag = if defaults.get(&key) != Some(&value) {
            "[override]"
        } else if key == "selection.gnb_capacity_users" || key == "selection.wifi_capacity_users" {
            // C_0 and W_0 have no published values.
            "[non-paper default]"
        } else if ARTIFACT_KEYS.iter().any(|p| key.starts_with(p)) {
            "[artifact default]"
        } else {
            "[table]"
        };
        println!("  {key} = {value} {tag}");
    }
    println!("config hash: {}", cfg.content_hash());
    println!("ok");
}

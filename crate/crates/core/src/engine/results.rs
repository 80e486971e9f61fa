//! Result serialization: raw per-seed rows and aggregate rows as CSV, each
//! carrying the build/seed/config provenance tuple.

use std::collections::BTreeMap;

use super::run::{RunResult, SeedRow};

/// Build identifier baked in at compile time.
pub fn build_id() -> &'static str {
    option_env!("STEERSIM_BUILD").unwrap_or(concat!("v", env!("CARGO_PKG_VERSION")))
}

/// Provenance columns attached to every CSV row.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub build: String,
    pub master_seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(master_seed: u64, config_hash: String) -> Self {
        Self {
            build: build_id().to_string(),
            master_seed,
            config_hash,
        }
    }
}

pub const RAW_HEADER: &str =
    "build,config_hash,master_seed,seed,case,policy,topology_hash,metric,value";
pub const AGG_HEADER: &str = "build,config_hash,master_seed,case,policy,metric,mean,std";

fn fmt_value(v: f64) -> String {
    format!("{v:.6}")
}

/// One line per (seed, metric), sorted by (case, policy, seed, metric).
pub fn raw_csv(rows: &[SeedRow], prov: &Provenance) -> String {
    let mut sorted: Vec<&SeedRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.scenario, &a.policy, a.seed).cmp(&(b.scenario, &b.policy, b.seed))
    });
    let mut out = String::from(RAW_HEADER);
    out.push('\n');
    for row in sorted {
        for (metric, value) in &row.metrics {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:016x},{},{}\n",
                prov.build,
                prov.config_hash,
                prov.master_seed,
                row.seed,
                row.scenario,
                row.policy,
                row.topology_hash,
                metric,
                fmt_value(*value)
            ));
        }
    }
    out
}

/// Mean and sample standard deviation per (case, policy, metric), folding
/// seeds in ascending order so aggregation is independent of arrival order.
#[allow(clippy::type_complexity)]
pub fn aggregate_csv(result: &RunResult, prov: &Provenance) -> String {
    let mut groups: BTreeMap<(&str, &str, &str), Vec<(u64, f64)>> = BTreeMap::new();
    for row in &result.rows {
        for (metric, value) in &row.metrics {
            groups
                .entry((row.scenario, row.policy.as_str(), metric.as_str()))
                .or_default()
                .push((row.seed, *value));
        }
    }
    let mut out = String::from(AGG_HEADER);
    out.push('\n');
    for ((case, policy, metric), mut values) in groups {
        values.sort_by_key(|(seed, _)| *seed);
        let n = values.len() as f64;
        let mean = values.iter().map(|(_, v)| v).sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|(_, v)| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            prov.build,
            prov.config_hash,
            prov.master_seed,
            case,
            policy,
            metric,
            fmt_value(mean),
            fmt_value(var.sqrt())
        ));
    }
    out
}

/// Plain-text comparison table: one block per scenario, policies side by
/// side for the headline metrics.
pub fn summary_table(result: &RunResult, policies: &[&str]) -> String {
    let mut scenarios: Vec<&str> = result.rows.iter().map(|r| r.scenario).collect();
    scenarios.sort();
    scenarios.dedup();

    let metrics = [
        ("throughput_total_mbps", "total Mbps"),
        ("throughput_gnb_mbps", "gnb Mbps"),
        ("throughput_wifi_mbps", "wifi Mbps"),
        ("load_share_gnb", "gnb share"),
        ("load_share_wifi", "wifi share"),
        ("throughput_s1_mbps", "class-1 Mbps"),
        ("throughput_s2_mbps", "class-2 Mbps"),
        ("throughput_s3_mbps", "class-3 Mbps"),
        ("throughput_s4_mbps", "class-4 Mbps"),
        ("delay_overall_ms", "delay ms"),
        ("delay_s1_ms", "class-1 delay ms"),
        ("delay_s2_ms", "class-2 delay ms"),
        ("delay_s3_ms", "class-3 delay ms"),
        ("delay_s4_ms", "class-4 delay ms"),
        ("loss_packets", "lost pkts"),
    ];

    let mut out = String::new();
    for scenario in scenarios {
        out.push_str(&format!("== {scenario} ==\n"));
        out.push_str(&format!("{:<22}", "metric"));
        for p in policies {
            out.push_str(&format!("{p:>18}"));
        }
        out.push('\n');
        for (key, label) in metrics {
            let mut line = format!("{label:<22}");
            let mut any = false;
            for p in policies {
                match result.mean_metric(scenario, p, key) {
                    Some(v) => {
                        any = true;
                        line.push_str(&format!("{v:>18.3}"));
                    }
                    None => line.push_str(&format!("{:>18}", "-")),
                }
            }
            if any {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out.push('\n');
    }
    out
}

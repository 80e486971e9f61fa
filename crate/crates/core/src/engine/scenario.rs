//! Scenario construction: one seeded deployment with frozen channels, rates
//! and service classes, ready for a policy to act on.

use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::channel::{
    classify_snr, compute_snr, draw_link_state, pathloss_uma, pathloss_umi, ChannelQuality,
    LinkBudget, PathLossModel,
};
use crate::config::{ServiceMix, SimConfig, TopologyConfig};
use crate::error::ConfigError;
use crate::mac::nr::link_rate_nr;
use crate::mac::wifi::wifi_rate;
use crate::policy::types::UeSelectionInput;
use crate::topology::{place_topology, ApId, Topology, UeId};

use super::rng::{stream_rng, Stream};

/// Which experiment a run belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// One of the five 80-user service mixes, downlink only, priority
    /// scheduling, all-downlink slots.
    Case(CaseId),
    /// 3 Mbps down / 1 Mbps up per UE, TDD pattern, round-robin scheduling,
    /// uplink decided separately from downlink.
    UplinkDecoupling,
    /// One dual-connected UE with the given service class, for offered-load
    /// sanity checks.
    SingleUe(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    A,
    B,
    C,
    D,
    E,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [CaseId::A, CaseId::B, CaseId::C, CaseId::D, CaseId::E];

    pub fn mix(self, cfg: &SimConfig) -> ServiceMix {
        match self {
            CaseId::A => cfg.cases.case_a,
            CaseId::B => cfg.cases.case_b,
            CaseId::C => cfg.cases.case_c,
            CaseId::D => cfg.cases.case_d,
            CaseId::E => cfg.cases.case_e,
        }
    }
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Case(CaseId::A) => "case-a",
            ScenarioKind::Case(CaseId::B) => "case-b",
            ScenarioKind::Case(CaseId::C) => "case-c",
            ScenarioKind::Case(CaseId::D) => "case-d",
            ScenarioKind::Case(CaseId::E) => "case-e",
            ScenarioKind::UplinkDecoupling => "uplink-decoupling",
            ScenarioKind::SingleUe(_) => "single-ue",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "case-a" => Ok(ScenarioKind::Case(CaseId::A)),
            "case-b" => Ok(ScenarioKind::Case(CaseId::B)),
            "case-c" => Ok(ScenarioKind::Case(CaseId::C)),
            "case-d" => Ok(ScenarioKind::Case(CaseId::D)),
            "case-e" => Ok(ScenarioKind::Case(CaseId::E)),
            "uplink-decoupling" => Ok(ScenarioKind::UplinkDecoupling),
            "single-ue" => Ok(ScenarioKind::SingleUe(1)),
            other => Err(ConfigError::invalid(
                "scenario",
                format!("unknown scenario {other:?}"),
            )),
        }
    }
}

/// Frozen Wi-Fi link of one UE.
#[derive(Debug, Clone, Copy)]
pub struct WifiLink {
    pub dl_snr_db: f64,
    pub ul_snr_db: f64,
    pub dl_rate_mbps: f64,
    pub ul_rate_mbps: f64,
}

/// Frozen radio state of one UE.
#[derive(Debug, Clone, Copy)]
pub struct UeLink {
    pub nr_dl_snr_db: f64,
    pub nr_ul_snr_db: f64,
    /// Bytes per PRB per slot.
    pub nr_dl_rate: f64,
    pub nr_ul_rate: f64,
    pub nr_quality: ChannelQuality,
    pub wifi: Option<WifiLink>,
}

/// One seeded deployment with everything a run needs.
pub struct Deployment {
    pub seed: u64,
    pub topology: Topology,
    pub links: Vec<UeLink>,
    pub services: Vec<u8>,
    /// Dual connectivity after radio admission (association can drop when
    /// the Wi-Fi link cannot hold the lowest rate).
    pub dual_effective: Vec<bool>,
    pub warnings: Vec<String>,
    pub topology_hash: u64,
}

impl Deployment {
    pub fn serving_ap(&self, ue: UeId) -> Option<ApId> {
        if self.dual_effective[ue.0 as usize] {
            self.topology.ue_ap_association[ue.0 as usize]
        } else {
            None
        }
    }

    pub fn selection_inputs(&self) -> Vec<UeSelectionInput> {
        (0..self.topology.num_ues())
            .map(|i| {
                let ue = UeId(i as u32);
                UeSelectionInput {
                    ue,
                    service: self.services[i],
                    nr_channel: self.links[i].nr_quality,
                    dual_connected: self.dual_effective[i],
                    serving_ap: self.serving_ap(ue),
                    gnb_distance_m: self.topology.ue_gnb_distance(ue),
                }
            })
            .collect()
    }
}

fn assign_services(
    scenario: ScenarioKind,
    cfg: &SimConfig,
    n: usize,
    rng: &mut impl Rng,
) -> Vec<u8> {
    match scenario {
        ScenarioKind::Case(case) => {
            let mix = case.mix(cfg);
            let mut classes = Vec::with_capacity(n);
            for (class, count) in mix.counts().iter().enumerate() {
                classes.extend(std::iter::repeat_n(class as u8 + 1, *count as usize));
            }
            classes.shuffle(rng);
            classes
        }
        // No service differentiation in the decoupling experiment.
        ScenarioKind::UplinkDecoupling => vec![3; n],
        ScenarioKind::SingleUe(s) => vec![s; n],
    }
}

/// Build the seeded deployment for a scenario.
#[allow(clippy::needless_range_loop)]
pub fn build_deployment(cfg: &SimConfig, scenario: ScenarioKind, seed: u64) -> Deployment {
    let topo_cfg: TopologyConfig = match scenario {
        ScenarioKind::SingleUe(_) => TopologyConfig {
            num_aps: 1,
            num_ues: 1,
            dual_fraction: 1.0,
            ..cfg.topology.clone()
        },
        _ => cfg.topology.clone(),
    };

    let topology = place_topology(
        &topo_cfg,
        &mut stream_rng(seed, Stream::ApPlacement),
        &mut stream_rng(seed, Stream::UePlacement),
        &mut stream_rng(seed, Stream::DualSelection),
    );
    let mut warnings = topology.warnings.clone();

    let mut services = assign_services(
        scenario,
        cfg,
        topology.num_ues(),
        &mut stream_rng(seed, Stream::ServiceMix),
    );
    if services.len() != topology.num_ues() {
        // Scenario overrides the UE count (single-UE sanity runs).
        services.resize(topology.num_ues(), services.first().copied().unwrap_or(3));
    }

    let mut channel_rng = stream_rng(seed, Stream::Channel);
    let nr_bw_hz = cfg.nr.bandwidth_mhz * 1e6;
    let wifi_bw_hz = cfg.wifi.bandwidth_mhz * 1e6;

    let mut links = Vec::with_capacity(topology.num_ues());
    let mut dual_effective = topology.dual_connected.clone();
    let mut demoted = 0usize;

    for i in 0..topology.num_ues() {
        let ue = UeId(i as u32);
        let d_gnb = topology.ue_gnb_distance(ue);
        let (los, shadow) = draw_link_state(PathLossModel::Uma, d_gnb, &mut channel_rng);
        let pl = pathloss_uma(d_gnb, cfg.nr.carrier_ghz, cfg.nr.gnb_height_m, cfg.nr.ue_height_m, los)
            .expect("positive distance");
        let gains = cfg.nr.gnb_gain_dbi + cfg.nr.ue_gain_dbi;
        let dl = compute_snr(
            &LinkBudget {
                tx_power_dbm: cfg.nr.gnb_tx_dbm,
                antenna_gain_dbi: gains,
                path_loss_db: pl,
                shadowing_db: shadow,
                noise_figure_db: cfg.nr.ue_noise_figure_db,
            },
            nr_bw_hz,
            cfg.nr.snr_good_db,
        )
        .expect("positive bandwidth");
        let ul = compute_snr(
            &LinkBudget {
                tx_power_dbm: cfg.nr.ue_tx_dbm,
                antenna_gain_dbi: gains,
                path_loss_db: pl,
                shadowing_db: shadow,
                noise_figure_db: cfg.nr.gnb_noise_figure_db,
            },
            nr_bw_hz,
            cfg.nr.snr_good_db,
        )
        .expect("positive bandwidth");

        // The selection algorithm classifies the gNB channel on the downlink
        // sample.
        let nr_quality = classify_snr(dl.snr_db, cfg.nr.snr_good_db);

        let wifi = topology.ue_ap_association[i].map(|ap| {
            let d_ap = topology.ue_positions[i].distance(&topology.ap_positions[ap.0 as usize]);
            let (wlos, wshadow) =
                draw_link_state(PathLossModel::Umi, d_ap.max(0.5), &mut channel_rng);
            let wpl = pathloss_umi(
                d_ap.max(0.5),
                cfg.wifi.carrier_ghz,
                cfg.wifi.ap_height_m,
                cfg.wifi.ue_height_m,
                wlos,
            )
            .expect("positive distance");
            let wgains = cfg.wifi.ap_gain_dbi + cfg.wifi.ue_gain_dbi;
            let wdl = compute_snr(
                &LinkBudget {
                    tx_power_dbm: cfg.wifi.ap_tx_dbm,
                    antenna_gain_dbi: wgains,
                    path_loss_db: wpl,
                    shadowing_db: wshadow,
                    noise_figure_db: cfg.wifi.ue_noise_figure_db,
                },
                wifi_bw_hz,
                cfg.nr.snr_good_db,
            )
            .expect("positive bandwidth");
            let wul = compute_snr(
                &LinkBudget {
                    tx_power_dbm: cfg.wifi.ue_tx_dbm,
                    antenna_gain_dbi: wgains,
                    path_loss_db: wpl,
                    shadowing_db: wshadow,
                    noise_figure_db: cfg.wifi.ap_noise_figure_db,
                },
                wifi_bw_hz,
                cfg.nr.snr_good_db,
            )
            .expect("positive bandwidth");
            (wdl.snr_db, wul.snr_db)
        });

        let wifi_link = wifi.and_then(|(dl_snr, ul_snr)| {
            match (wifi_rate(dl_snr), wifi_rate(ul_snr)) {
                (Some((_, dl_rate)), Some((_, ul_rate))) => Some(WifiLink {
                    dl_snr_db: dl_snr,
                    ul_snr_db: ul_snr,
                    dl_rate_mbps: dl_rate,
                    ul_rate_mbps: ul_rate,
                }),
                // Below the lowest rate the station cannot associate.
                _ => None,
            }
        });
        if dual_effective[i] && wifi_link.is_none() {
            dual_effective[i] = false;
            demoted += 1;
        }

        links.push(UeLink {
            nr_dl_snr_db: dl.snr_db,
            nr_ul_snr_db: ul.snr_db,
            nr_dl_rate: link_rate_nr(dl.snr_db),
            nr_ul_rate: link_rate_nr(ul.snr_db),
            nr_quality,
            wifi: wifi_link,
        });
    }
    if demoted > 0 {
        warnings.push(format!(
            "{demoted} UE(s) below the lowest Wi-Fi rate were disassociated"
        ));
    }

    let topology_hash = hash_deployment(&topology, &links, &services);

    Deployment {
        seed,
        topology,
        links,
        services,
        dual_effective,
        warnings,
        topology_hash,
    }
}

fn hash_deployment(topology: &Topology, links: &[UeLink], services: &[u8]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in topology.ap_positions.iter().chain(topology.ue_positions.iter()) {
        p.x.to_bits().hash(&mut h);
        p.y.to_bits().hash(&mut h);
    }
    for a in &topology.ue_ap_association {
        a.map(|x| x.0).unwrap_or(u32::MAX).hash(&mut h);
    }
    topology.dual_connected.hash(&mut h);
    services.hash(&mut h);
    for l in links {
        l.nr_dl_snr_db.to_bits().hash(&mut h);
        l.nr_ul_snr_db.to_bits().hash(&mut h);
        if let Some(w) = &l.wifi {
            w.dl_snr_db.to_bits().hash(&mut h);
            w.ul_snr_db.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deployment_is_reproducible() {
        let cfg = SimConfig::default();
        let a = build_deployment(&cfg, ScenarioKind::Case(CaseId::C), 3);
        let b = build_deployment(&cfg, ScenarioKind::Case(CaseId::C), 3);
        assert_eq!(a.topology_hash, b.topology_hash);
        let c = build_deployment(&cfg, ScenarioKind::Case(CaseId::C), 4);
        assert_ne!(a.topology_hash, c.topology_hash);
    }

    #[test]
    fn service_mix_matches_the_case_table() {
        let cfg = SimConfig::default();
        let d = build_deployment(&cfg, ScenarioKind::Case(CaseId::B), 9);
        let count =
            |k: u8| -> u32 { d.services.iter().filter(|s| **s == k).count() as u32 };
        assert_eq!(
            [count(1), count(2), count(3), count(4)],
            [10, 10, 30, 30]
        );
    }

    #[test]
    fn service_mix_is_policy_independent_but_seed_dependent() {
        let cfg = SimConfig::default();
        let a = build_deployment(&cfg, ScenarioKind::Case(CaseId::C), 3);
        let b = build_deployment(&cfg, ScenarioKind::Case(CaseId::C), 5);
        assert_ne!(a.services, b.services);
    }

    #[test]
    fn single_ue_scenario_has_one_dual_ue() {
        let cfg = SimConfig::default();
        let d = build_deployment(&cfg, ScenarioKind::SingleUe(1), 1);
        assert_eq!(d.topology.num_ues(), 1);
        assert!(d.dual_effective[0]);
        assert!(d.links[0].wifi.is_some());
    }

    #[test]
    fn selection_inputs_mirror_the_deployment() {
        let cfg = SimConfig::default();
        let d = build_deployment(&cfg, ScenarioKind::Case(CaseId::A), 2);
        let inputs = d.selection_inputs();
        assert_eq!(inputs.len(), 80);
        for inp in &inputs {
            inp.validate().unwrap();
            assert_eq!(inp.dual_connected, d.dual_effective[inp.ue.0 as usize]);
            if inp.dual_connected {
                assert!(inp.serving_ap.is_some());
            }
        }
    }
}

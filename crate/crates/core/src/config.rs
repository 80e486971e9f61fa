//! Simulation configuration: the full parameter surface of the simulator.
//!
//! Defaults reproduce the network-model table of the evaluated scenario; every
//! field can be overridden from a TOML file. Unknown keys are hard errors so a
//! typo never silently falls back to a default.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;

/// Where a default value comes from, reported by `validate --print`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Value taken from the published network-model table.
    Table,
    /// Value the artifact had to choose itself (not given by the table).
    ArtifactDefault,
    /// Value differs from the built-in default (user override).
    Override,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub cell_radius_m: f64,
    pub num_aps: u32,
    pub num_ues: u32,
    pub wifi_coverage_m: f64,
    /// Fraction of UEs that end up connected to both RATs.
    pub dual_fraction: f64,
    /// UE drop model: "hotspot" places `dual_fraction` of the UEs inside AP
    /// coverage, "uniform" drops everyone uniformly in the disk.
    pub ue_placement: String,
    /// AP drop model: "disk" or "annulus" (edge-offload deployments).
    pub ap_placement: String,
    /// Inner radius used when `ap_placement = "annulus"`.
    pub ap_annulus_inner_m: f64,
    /// Margin kept between an AP and the cell edge.
    pub ap_edge_margin_m: f64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 250.0,
            num_aps: 10,
            num_ues: 80,
            wifi_coverage_m: 40.0,
            dual_fraction: 0.8,
            ue_placement: "hotspot".into(),
            ap_placement: "disk".into(),
            ap_annulus_inner_m: 125.0,
            ap_edge_margin_m: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NrRadioConfig {
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
    pub prbs: u32,
    pub slots_per_subframe: u32,
    /// The parameter table lists "UE/gNB Transmit Power 43/23 dBm"; the
    /// defaults keep that literal order (UE 43, gNB 23).
    pub gnb_tx_dbm: f64,
    pub ue_tx_dbm: f64,
    pub gnb_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub gnb_height_m: f64,
    pub ue_height_m: f64,
    pub gnb_noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
    /// SNR at or above this is classified as a good channel.
    pub snr_good_db: f64,
}

impl Default for NrRadioConfig {
    fn default() -> Self {
        Self {
            carrier_ghz: 1.9,
            bandwidth_mhz: 60.0,
            prbs: 162,
            slots_per_subframe: 2,
            gnb_tx_dbm: 23.0,
            ue_tx_dbm: 43.0,
            gnb_gain_dbi: 15.0,
            ue_gain_dbi: 2.0,
            gnb_height_m: 25.0,
            ue_height_m: 1.5,
            gnb_noise_figure_db: 10.0,
            ue_noise_figure_db: 7.0,
            snr_good_db: 6.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WifiRadioConfig {
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
    pub ap_tx_dbm: f64,
    pub ue_tx_dbm: f64,
    pub ap_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub ap_height_m: f64,
    pub ue_height_m: f64,
    pub ap_noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
    pub mpdu_bytes: u32,
}

impl Default for WifiRadioConfig {
    fn default() -> Self {
        Self {
            carrier_ghz: 2.4,
            bandwidth_mhz: 20.0,
            ap_tx_dbm: 15.0,
            ue_tx_dbm: 20.0,
            ap_gain_dbi: 4.0,
            ue_gain_dbi: 2.0,
            ap_height_m: 10.0,
            ue_height_m: 1.5,
            ap_noise_figure_db: 7.0,
            ue_noise_figure_db: 7.0,
            mpdu_bytes: 1500,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Decision threshold T'. The stated constant is 170; the mean of all
    /// possible scores (167.5) can be set here instead.
    pub t_prime: f64,
    /// C_0: gNB capacity in user slots. Not given by the table; sized so the
    /// 80-user cases walk through all three load levels.
    pub gnb_capacity_users: u32,
    /// W_0: per-AP capacity in user slots, also the uplink per-AP user cap.
    /// Not given by the table.
    pub wifi_capacity_users: u32,
    /// remaining/initial above this ratio means low load.
    pub load_low_ratio: f64,
    /// remaining/initial above this ratio (and at most `load_low_ratio`)
    /// means medium load; at or below it means high load.
    pub load_high_ratio: f64,
    /// Order in which UEs are fed to the downlink selection loop:
    /// "priority" (ascending service class, then UE id) or "ue-id".
    pub ue_order: String,
    /// Install the NAS forwarding path proactively (before the first NAS
    /// message) or reactively on table miss.
    pub proactive_nas_path: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            alpha: 30.0,
            beta: 10.0,
            gamma: 50.0,
            delta: 25.0,
            t_prime: 170.0,
            gnb_capacity_users: 30,
            wifi_capacity_users: 3,
            load_low_ratio: 2.0 / 3.0,
            load_high_ratio: 1.0 / 3.0,
            ue_order: "priority".into(),
            proactive_nas_path: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NrMacConfig {
    /// TDD pattern string over one 5 ms period, e.g. "DDDSUUUUUU".
    pub tdd_pattern: String,
    /// Slot duration at numerology 1.
    pub slot_duration_us: u64,
    /// Fraction of an S slot usable for downlink (all symbols but the last).
    pub s_slot_dl_fraction: f64,
}

impl Default for NrMacConfig {
    fn default() -> Self {
        Self {
            tdd_pattern: "DDDSUUUUUU".into(),
            slot_duration_us: 500,
            s_slot_dl_fraction: 13.0 / 14.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DcfConfig {
    pub slot_us: u64,
    pub sifs_us: u64,
    pub difs_us: u64,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    /// PHY preamble + header of a data frame (11n mixed format).
    pub preamble_us: u64,
    /// ACK frame airtime including its preamble.
    pub ack_us: u64,
}

impl Default for DcfConfig {
    fn default() -> Self {
        Self {
            slot_us: 9,
            sifs_us: 16,
            difs_us: 34,
            cw_min: 15,
            cw_max: 1023,
            retry_limit: 7,
            preamble_us: 36,
            ack_us: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    pub payload_bytes: u32,
    pub header_bytes: u32,
    /// Downlink packet rate per UE in the per-case experiments.
    pub dl_packets_per_s: f64,
    /// Rates for the uplink/downlink decoupling scenario.
    pub decoupling_dl_packets_per_s: f64,
    pub decoupling_ul_packets_per_s: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            payload_bytes: 1000,
            header_bytes: 60,
            dl_packets_per_s: 500.0,
            decoupling_dl_packets_per_s: 375.0,
            decoupling_ul_packets_per_s: 125.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CoreNetworkConfig {
    /// One-way latency of the black-box core for CN-path packets and NGAP
    /// answers.
    pub latency_us: u64,
}

impl Default for CoreNetworkConfig {
    fn default() -> Self {
        Self { latency_us: 5000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementConfig {
    pub enabled: bool,
    pub period_us: u64,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            period_us: 100_000,
        }
    }
}

/// Number of users per service class (1 is the highest priority).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ServiceMix {
    pub s1: u32,
    pub s2: u32,
    pub s3: u32,
    pub s4: u32,
}

impl ServiceMix {
    pub fn total(&self) -> u32 {
        self.s1 + self.s2 + self.s3 + self.s4
    }

    pub fn counts(&self) -> [u32; 4] {
        [self.s1, self.s2, self.s3, self.s4]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CasesConfig {
    pub case_a: ServiceMix,
    pub case_b: ServiceMix,
    pub case_c: ServiceMix,
    pub case_d: ServiceMix,
    pub case_e: ServiceMix,
}

impl Default for CasesConfig {
    fn default() -> Self {
        Self {
            case_a: ServiceMix { s1: 0, s2: 0, s3: 40, s4: 40 },
            case_b: ServiceMix { s1: 10, s2: 10, s3: 30, s4: 30 },
            case_c: ServiceMix { s1: 20, s2: 20, s3: 20, s4: 20 },
            case_d: ServiceMix { s1: 30, s2: 30, s3: 10, s4: 10 },
            case_e: ServiceMix { s1: 40, s2: 40, s3: 0, s4: 0 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub horizon_s: f64,
    /// Number of deployment seeds when no explicit list is given.
    pub deployments: u32,
    /// First seed of the derived list `first_seed..first_seed+deployments`.
    pub first_seed: u64,
    /// Explicit seed list; overrides `deployments`/`first_seed` if non-empty.
    pub seeds: Vec<u64>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            horizon_s: 1.0,
            deployments: 50,
            first_seed: 1,
            seeds: Vec::new(),
        }
    }
}

/// Root configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub run: RunSection,
    pub topology: TopologyConfig,
    pub nr: NrRadioConfig,
    pub wifi: WifiRadioConfig,
    pub selection: SelectionConfig,
    pub nr_mac: NrMacConfig,
    pub dcf: DcfConfig,
    pub traffic: TrafficConfig,
    pub cn: CoreNetworkConfig,
    pub measurement: MeasurementConfig,
    pub cases: CasesConfig,
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Seeds to run: the explicit list, or `first_seed..first_seed+deployments`.
    pub fn seed_list(&self) -> Vec<u64> {
        if !self.run.seeds.is_empty() {
            self.run.seeds.clone()
        } else {
            (0..self.run.deployments as u64)
                .map(|i| self.run.first_seed + i)
                .collect()
        }
    }

    /// SHA-256 over the canonical serialized form, for result provenance.
    pub fn content_hash(&self) -> String {
        let canon = toml::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        let digest = h.finalize();
        let mut out = String::with_capacity(16);
        for b in digest.iter().take(8) {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, format!("must be > 0, got {v}")))
            }
        }

        positive("run.horizon_s", self.run.horizon_s)?;
        if self.run.seeds.is_empty() && self.run.deployments == 0 {
            return Err(ConfigError::invalid("run.deployments", "must be >= 1"));
        }

        positive("topology.cell_radius_m", self.topology.cell_radius_m)?;
        positive("topology.wifi_coverage_m", self.topology.wifi_coverage_m)?;
        if self.topology.num_aps == 0 {
            return Err(ConfigError::invalid("topology.num_aps", "must be >= 1"));
        }
        if self.topology.num_ues == 0 {
            return Err(ConfigError::invalid("topology.num_ues", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.topology.dual_fraction) {
            return Err(ConfigError::invalid(
                "topology.dual_fraction",
                "must be within [0, 1]",
            ));
        }
        match self.topology.ue_placement.as_str() {
            "hotspot" | "uniform" => {}
            other => {
                return Err(ConfigError::invalid(
                    "topology.ue_placement",
                    format!("unknown mode {other:?}, expected \"hotspot\" or \"uniform\""),
                ))
            }
        }
        match self.topology.ap_placement.as_str() {
            "disk" | "annulus" => {}
            other => {
                return Err(ConfigError::invalid(
                    "topology.ap_placement",
                    format!("unknown mode {other:?}, expected \"disk\" or \"annulus\""),
                ))
            }
        }
        if self.topology.ap_annulus_inner_m >= self.topology.cell_radius_m {
            return Err(ConfigError::invalid(
                "topology.ap_annulus_inner_m",
                "must be smaller than the cell radius",
            ));
        }

        positive("nr.carrier_ghz", self.nr.carrier_ghz)?;
        positive("nr.bandwidth_mhz", self.nr.bandwidth_mhz)?;
        positive("wifi.carrier_ghz", self.wifi.carrier_ghz)?;
        positive("wifi.bandwidth_mhz", self.wifi.bandwidth_mhz)?;
        if self.nr.prbs == 0 {
            return Err(ConfigError::invalid("nr.prbs", "must be >= 1"));
        }
        if self.wifi.mpdu_bytes == 0 {
            return Err(ConfigError::invalid("wifi.mpdu_bytes", "must be >= 1"));
        }

        for (key, v) in [
            ("selection.alpha", self.selection.alpha),
            ("selection.beta", self.selection.beta),
            ("selection.gamma", self.selection.gamma),
            ("selection.delta", self.selection.delta),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::invalid(key, "must be finite"));
            }
        }
        if self.selection.gnb_capacity_users == 0 {
            return Err(ConfigError::invalid(
                "selection.gnb_capacity_users",
                "must be >= 1",
            ));
        }
        if self.selection.wifi_capacity_users == 0 {
            return Err(ConfigError::invalid(
                "selection.wifi_capacity_users",
                "must be >= 1",
            ));
        }
        if !(self.selection.load_high_ratio < self.selection.load_low_ratio
            && self.selection.load_high_ratio > 0.0
            && self.selection.load_low_ratio < 1.0)
        {
            return Err(ConfigError::invalid(
                "selection.load_high_ratio",
                "load ratios must satisfy 0 < high < low < 1",
            ));
        }
        match self.selection.ue_order.as_str() {
            "priority" | "ue-id" => {}
            other => {
                return Err(ConfigError::invalid(
                    "selection.ue_order",
                    format!("unknown order {other:?}, expected \"priority\" or \"ue-id\""),
                ))
            }
        }

        if self.nr_mac.tdd_pattern.is_empty()
            || !self.nr_mac.tdd_pattern.chars().all(|c| matches!(c, 'D' | 'U' | 'S'))
        {
            return Err(ConfigError::invalid(
                "nr_mac.tdd_pattern",
                "must be a non-empty string over {D,U,S}",
            ));
        }
        if !(0.0..=1.0).contains(&self.nr_mac.s_slot_dl_fraction) {
            return Err(ConfigError::invalid(
                "nr_mac.s_slot_dl_fraction",
                "must be within [0, 1]",
            ));
        }
        if self.nr_mac.slot_duration_us == 0 {
            return Err(ConfigError::invalid("nr_mac.slot_duration_us", "must be >= 1"));
        }

        if self.dcf.cw_min == 0 || self.dcf.cw_max < self.dcf.cw_min {
            return Err(ConfigError::invalid(
                "dcf.cw_max",
                "contention windows must satisfy 0 < cw_min <= cw_max",
            ));
        }
        if self.dcf.slot_us == 0 {
            return Err(ConfigError::invalid("dcf.slot_us", "must be >= 1"));
        }

        if self.traffic.payload_bytes == 0 {
            return Err(ConfigError::invalid("traffic.payload_bytes", "must be >= 1"));
        }
        positive("traffic.dl_packets_per_s", self.traffic.dl_packets_per_s)?;
        positive(
            "traffic.decoupling_dl_packets_per_s",
            self.traffic.decoupling_dl_packets_per_s,
        )?;
        positive(
            "traffic.decoupling_ul_packets_per_s",
            self.traffic.decoupling_ul_packets_per_s,
        )?;
        if self.traffic.payload_bytes + self.traffic.header_bytes > self.wifi.mpdu_bytes {
            return Err(ConfigError::invalid(
                "traffic.payload_bytes",
                "payload + header must fit in one MPDU",
            ));
        }

        if self.measurement.enabled && self.measurement.period_us == 0 {
            return Err(ConfigError::invalid("measurement.period_us", "must be >= 1"));
        }

        let n = self.topology.num_ues;
        for (name, mix) in [
            ("cases.case_a", &self.cases.case_a),
            ("cases.case_b", &self.cases.case_b),
            ("cases.case_c", &self.cases.case_c),
            ("cases.case_d", &self.cases.case_d),
            ("cases.case_e", &self.cases.case_e),
        ] {
            if mix.total() != n {
                return Err(ConfigError::invalid(
                    name,
                    format!("service mix sums to {}, expected {}", mix.total(), n),
                ));
            }
        }
        Ok(())
    }
}

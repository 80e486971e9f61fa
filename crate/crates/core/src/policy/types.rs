//! Shared types of the RAT-selection policies.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::ChannelQuality;
use crate::error::DomainError;
use crate::topology::{ApId, UeId};

/// Which radio carries a flow (0 = gNB, 1 = Wi-Fi in the scoring rule).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Rat {
    Gnb,
    Wifi,
}

impl Rat {
    pub fn label(self) -> &'static str {
        match self {
            Rat::Gnb => "gnb",
            Rat::Wifi => "wifi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Downlink,
    Uplink,
}

/// Discrete load level of a RAT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LoadLevel {
    Low,
    Medium,
    High,
}

impl LoadLevel {
    pub fn value(self) -> u8 {
        match self {
            LoadLevel::Low => 1,
            LoadLevel::Medium => 2,
            LoadLevel::High => 3,
        }
    }

    pub fn from_value(v: u8) -> Result<Self, DomainError> {
        match v {
            1 => Ok(LoadLevel::Low),
            2 => Ok(LoadLevel::Medium),
            3 => Ok(LoadLevel::High),
            other => Err(DomainError::LoadLevelOutOfRange(other)),
        }
    }
}

/// Ratio boundaries mapping remaining/initial capacity onto load levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadThresholds {
    /// Above this ratio the load is low.
    pub low_ratio: f64,
    /// Above this ratio (and at most `low_ratio`) the load is medium; at or
    /// below it the load is high.
    pub high_ratio: f64,
}

impl Default for LoadThresholds {
    fn default() -> Self {
        Self {
            low_ratio: 2.0 / 3.0,
            high_ratio: 1.0 / 3.0,
        }
    }
}

/// Remaining user slots of one RAT node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityState {
    pub initial: u32,
    pub remaining: u32,
}

impl CapacityState {
    pub fn fresh(initial: u32) -> Self {
        Self {
            initial,
            remaining: initial,
        }
    }

    /// Consume one user slot; floors at zero.
    pub fn consume(&mut self) {
        self.remaining = self.remaining.saturating_sub(1);
    }

    /// Load level is a pure function of the remaining/initial ratio.
    pub fn level(&self, t: &LoadThresholds) -> LoadLevel {
        let ratio = self.remaining as f64 / self.initial.max(1) as f64;
        if ratio > t.low_ratio {
            LoadLevel::Low
        } else if ratio > t.high_ratio {
            LoadLevel::Medium
        } else {
            LoadLevel::High
        }
    }
}

/// Load and capacity picture the downlink selection walks over.
#[derive(Debug, Clone, PartialEq)]
pub struct RatLoadState {
    pub gnb: CapacityState,
    pub per_ap: BTreeMap<ApId, CapacityState>,
    pub thresholds: LoadThresholds,
}

impl RatLoadState {
    pub fn fresh(
        gnb_capacity: u32,
        ap_capacity: u32,
        aps: impl IntoIterator<Item = ApId>,
        thresholds: LoadThresholds,
    ) -> Self {
        Self {
            gnb: CapacityState::fresh(gnb_capacity),
            per_ap: aps
                .into_iter()
                .map(|ap| (ap, CapacityState::fresh(ap_capacity)))
                .collect(),
            thresholds,
        }
    }

    pub fn gnb_level(&self) -> LoadLevel {
        self.gnb.level(&self.thresholds)
    }

    pub fn ap_level(&self, ap: ApId) -> LoadLevel {
        self.per_ap
            .get(&ap)
            .map(|c| c.level(&self.thresholds))
            .unwrap_or(LoadLevel::Low)
    }
}

/// Per-UE inputs to the downlink selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeSelectionInput {
    pub ue: UeId,
    /// Service class, 1 (highest) to 4 (lowest).
    pub service: u8,
    /// gNB channel classification.
    pub nr_channel: ChannelQuality,
    pub dual_connected: bool,
    pub serving_ap: Option<ApId>,
    pub gnb_distance_m: f64,
}

impl UeSelectionInput {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !(1..=4).contains(&self.service) {
            return Err(DomainError::ServicePriorityOutOfRange(self.service));
        }
        Ok(())
    }
}

/// Per-UE, per-direction RAT decision.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RatAssignment {
    pub downlink: BTreeMap<UeId, Rat>,
    pub uplink: BTreeMap<UeId, Rat>,
}

impl RatAssignment {
    pub fn rat(&self, ue: UeId, dir: Direction) -> Option<Rat> {
        match dir {
            Direction::Downlink => self.downlink.get(&ue).copied(),
            Direction::Uplink => self.uplink.get(&ue).copied(),
        }
    }
}

/// Weights of the threshold score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for SelectionWeights {
    fn default() -> Self {
        Self {
            alpha: 30.0,
            beta: 10.0,
            gamma: 50.0,
            delta: 25.0,
        }
    }
}

//! Core-network-style baseline: RAT choice from service priority alone, and
//! uplink coupled to downlink.

use std::collections::BTreeMap;

use crate::topology::UeId;

use super::types::{Rat, UeSelectionInput};

/// Priority 1 and 2 always take the gNB; 3 and 4 take Wi-Fi when the UE has
/// a Wi-Fi leg. Load and channel conditions are never consulted.
pub fn baseline_downlink(ues: &[UeSelectionInput]) -> BTreeMap<UeId, Rat> {
    ues.iter()
        .map(|u| {
            let rat = if u.service <= 2 {
                Rat::Gnb
            } else if u.dual_connected && u.serving_ap.is_some() {
                Rat::Wifi
            } else {
                Rat::Gnb
            };
            (u.ue, rat)
        })
        .collect()
}

/// Uplink copies downlink per UE.
pub fn baseline_uplink(downlink: &BTreeMap<UeId, Rat>) -> BTreeMap<UeId, Rat> {
    downlink.clone()
}

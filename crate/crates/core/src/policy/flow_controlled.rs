//! Controller-side RAT selection: threshold scoring over load, channel and
//! service class for the downlink, and per-AP user offloading for the uplink.

use std::collections::BTreeMap;

use crate::error::DomainError;
use crate::topology::{ApId, UeId};

use super::types::{
    CapacityState, LoadLevel, Rat, RatLoadState, SelectionWeights, UeSelectionInput,
};

/// Threshold score: alpha*l_g + beta*l_w + gamma*ch_g + delta*s.
///
/// `ch_g` is 0 for a good gNB channel, 1 for bad; `s` is the service class
/// (1 highest priority). Inputs outside their domains are rejected.
pub fn threshold_score(
    l_g: u8,
    l_w: u8,
    ch_g: u8,
    s: u8,
    w: &SelectionWeights,
) -> Result<f64, DomainError> {
    LoadLevel::from_value(l_g)?;
    LoadLevel::from_value(l_w)?;
    if ch_g > 1 {
        return Err(DomainError::ChannelClassOutOfRange(ch_g));
    }
    if !(1..=4).contains(&s) {
        return Err(DomainError::ServicePriorityOutOfRange(s));
    }
    Ok(w.alpha * l_g as f64 + w.beta * l_w as f64 + w.gamma * ch_g as f64 + w.delta * s as f64)
}

/// Downlink selection walk.
///
/// UEs are processed in the order given. Dual-connected UEs are scored
/// against the current load state: a score above `t_prime` selects Wi-Fi and
/// consumes a slot at the serving AP, otherwise the gNB and a gNB slot.
/// NR-only UEs take the gNB unconditionally and leave the state untouched.
/// Returns the assignment together with the evolved state.
pub fn select_downlink(
    ues: &[UeSelectionInput],
    mut state: RatLoadState,
    weights: &SelectionWeights,
    t_prime: f64,
) -> (BTreeMap<UeId, Rat>, RatLoadState) {
    let mut out = BTreeMap::new();
    for ue in ues {
        let ap = match (ue.dual_connected, ue.serving_ap) {
            (true, Some(ap)) => ap,
            _ => {
                out.insert(ue.ue, Rat::Gnb);
                continue;
            }
        };
        let l_g = state.gnb_level().value();
        let l_w = state.ap_level(ap).value();
        let score = threshold_score(
            l_g,
            l_w,
            ue.nr_channel.as_score_input(),
            ue.service,
            weights,
        )
        .expect("validated inputs");
        if score > t_prime {
            out.insert(ue.ue, Rat::Wifi);
            if let Some(c) = state.per_ap.get_mut(&ap) {
                c.consume();
            }
        } else {
            out.insert(ue.ue, Rat::Gnb);
            state.gnb.consume();
        }
    }
    (out, state)
}

/// Uplink offload walk.
///
/// Wi-Fi APs are visited in descending order of attached uplink users (ties
/// by AP id). Each AP above the `w0` cap moves its excess users — preferring
/// those closest to the gNB — onto the gNB uplink, bounded by the remaining
/// gNB capacity. Downlink assignments are not touched.
pub fn select_uplink(
    ues: &[UeSelectionInput],
    initial_uplink: &BTreeMap<UeId, Rat>,
    gnb_capacity: u32,
    w0: u32,
) -> BTreeMap<UeId, Rat> {
    let mut out = initial_uplink.clone();
    let by_ue: BTreeMap<UeId, &UeSelectionInput> = ues.iter().map(|u| (u.ue, u)).collect();

    let mut per_ap: BTreeMap<ApId, Vec<UeId>> = BTreeMap::new();
    for (ue, rat) in initial_uplink {
        if *rat == Rat::Wifi {
            if let Some(input) = by_ue.get(ue) {
                if let Some(ap) = input.serving_ap {
                    per_ap.entry(ap).or_default().push(*ue);
                }
            }
        }
    }

    let mut order: Vec<(ApId, usize)> = per_ap.iter().map(|(ap, v)| (*ap, v.len())).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut remaining = CapacityState::fresh(gnb_capacity);
    for (ap, n) in order {
        let excess = (n as u32).saturating_sub(w0);
        let k = excess.min(remaining.remaining) as usize;
        if k == 0 {
            continue;
        }
        let mut members = per_ap.remove(&ap).expect("grouped above");
        members.sort_by(|a, b| {
            let da = by_ue[a].gnb_distance_m;
            let db = by_ue[b].gnb_distance_m;
            da.partial_cmp(&db).expect("finite distances").then(a.cmp(b))
        });
        for ue in members.into_iter().take(k) {
            out.insert(ue, Rat::Gnb);
            remaining.consume();
        }
    }
    out
}

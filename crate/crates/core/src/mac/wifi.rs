//! Wi-Fi link abstractions: 802.11n single-stream rate selection and DCF
//! contention.
//!
//! The DCF model is round-based: every backlogged station draws a fresh
//! backoff in [0, CW]; the unique minimum wins the TXOP, simultaneous minima
//! collide and double their windows. APs on different channels never contend
//! with each other.

use std::collections::BTreeMap;

use rand::Rng;

use crate::config::DcfConfig;

/// 802.11n 20 MHz, single spatial stream, long guard interval:
/// (SNR threshold dB, MCS index, PHY rate Mbps).
pub const MCS_TABLE: [(f64, u8, f64); 8] = [
    (2.0, 0, 6.5),
    (5.0, 1, 13.0),
    (9.0, 2, 19.5),
    (11.0, 3, 26.0),
    (15.0, 4, 39.0),
    (18.0, 5, 52.0),
    (20.0, 6, 58.5),
    (25.0, 7, 65.0),
];

/// MCS index and PHY rate for an SNR; `None` means the station cannot hold
/// the lowest MCS and is disassociated for this deployment.
pub fn wifi_rate(snr_db: f64) -> Option<(u8, f64)> {
    let mut pick = None;
    for (thr, mcs, rate) in MCS_TABLE {
        if snr_db >= thr {
            pick = Some((mcs, rate));
        } else {
            break;
        }
    }
    pick
}

/// Per-station contention state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DcfState {
    pub cw: u32,
    pub retries: u32,
}

impl DcfState {
    pub fn new(params: &DcfConfig) -> Self {
        Self {
            cw: params.cw_min,
            retries: 0,
        }
    }

    fn on_win(&mut self, params: &DcfConfig) {
        self.cw = params.cw_min;
        self.retries = 0;
    }

    /// Binary exponential backoff; returns false once the retry limit is
    /// exceeded (frame should be discarded and the window reset).
    fn on_collision(&mut self, params: &DcfConfig) -> bool {
        self.retries += 1;
        if self.retries > params.retry_limit {
            self.cw = params.cw_min;
            self.retries = 0;
            return false;
        }
        self.cw = ((self.cw + 1) * 2 - 1).min(params.cw_max);
        true
    }
}

/// One station bidding for the medium.
#[derive(Debug, Clone, Copy)]
pub struct Contender<K> {
    pub key: K,
    pub frame_bytes: u32,
    pub phy_rate_mbps: f64,
}

/// Result of one contention round.
#[derive(Debug, Clone, PartialEq)]
pub enum TxOutcome<K> {
    /// A station won and occupied the medium for `airtime_us`.
    Won { winner: K, airtime_us: u64 },
    /// Simultaneous minimum backoffs; nobody delivered. Stations in
    /// `dropped` exhausted their retry budget for the head frame.
    Collision {
        colliders: Vec<K>,
        dropped: Vec<K>,
        airtime_us: u64,
    },
}

/// Frame occupancy on the air, including the ACK exchange.
pub fn frame_airtime_us(frame_bytes: u32, phy_rate_mbps: f64, params: &DcfConfig) -> u64 {
    let data_us = (frame_bytes as f64 * 8.0 / phy_rate_mbps).ceil() as u64;
    params.preamble_us + data_us + params.sifs_us + params.ack_us
}

/// Run one DCF contention round among `contenders`.
///
/// New keys get fresh state; state for absent keys is left untouched.
pub fn wifi_txop<K: Copy + Ord>(
    contenders: &[Contender<K>],
    states: &mut BTreeMap<K, DcfState>,
    params: &DcfConfig,
    rng: &mut impl Rng,
) -> TxOutcome<K> {
    assert!(!contenders.is_empty(), "txop needs at least one contender");

    let draws: Vec<(usize, u32)> = contenders
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let st = states.entry(c.key).or_insert_with(|| DcfState::new(params));
            (i, rng.gen_range(0..=st.cw))
        })
        .collect();

    let min = draws.iter().map(|(_, b)| *b).min().expect("non-empty");
    let winners: Vec<usize> = draws
        .iter()
        .filter(|(_, b)| *b == min)
        .map(|(i, _)| *i)
        .collect();
    let wait_us = params.difs_us + min as u64 * params.slot_us;

    if winners.len() == 1 {
        let c = &contenders[winners[0]];
        states.get_mut(&c.key).expect("state exists").on_win(params);
        TxOutcome::Won {
            winner: c.key,
            airtime_us: wait_us + frame_airtime_us(c.frame_bytes, c.phy_rate_mbps, params),
        }
    } else {
        let mut longest = 0;
        let mut dropped = Vec::new();
        let mut colliders = Vec::with_capacity(winners.len());
        for &i in &winners {
            let c = &contenders[i];
            longest = longest.max(frame_airtime_us(c.frame_bytes, c.phy_rate_mbps, params));
            colliders.push(c.key);
            if !states
                .get_mut(&c.key)
                .expect("state exists")
                .on_collision(params)
            {
                dropped.push(c.key);
            }
        }
        TxOutcome::Collision {
            colliders,
            dropped,
            airtime_us: wait_us + longest,
        }
    }
}

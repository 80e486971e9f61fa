//! NR link abstractions: TDD slot pattern, SNR-to-rate mapping and the
//! per-slot PRB scheduler.

use serde::Serialize;

use crate::error::ConfigError;
use crate::topology::UeId;

/// CQI step table: (SNR threshold dB, spectral efficiency bit/s/Hz).
/// Efficiencies are the 15-entry 64QAM CQI table; thresholds are the widely
/// used link-level calibration points for it.
pub const CQI_TABLE: [(f64, f64); 15] = [
    (-6.7, 0.1523),
    (-4.7, 0.2344),
    (-2.3, 0.3770),
    (0.2, 0.6016),
    (2.4, 0.8770),
    (4.3, 1.1758),
    (5.9, 1.4766),
    (8.1, 1.9141),
    (10.3, 2.4063),
    (11.7, 2.7305),
    (14.1, 3.3223),
    (16.3, 3.9023),
    (18.7, 4.5234),
    (21.0, 5.1152),
    (22.7, 5.5547),
];

const SUBCARRIERS_PER_PRB: f64 = 12.0;
const SYMBOLS_PER_SLOT: f64 = 14.0;

/// Bytes one PRB carries in one slot at the given SNR; 0 below the lowest
/// CQI threshold (outage).
pub fn link_rate_nr(snr_db: f64) -> f64 {
    let mut eff = 0.0;
    for (thr, e) in CQI_TABLE {
        if snr_db >= thr {
            eff = e;
        } else {
            break;
        }
    }
    SUBCARRIERS_PER_PRB * SYMBOLS_PER_SLOT * eff / 8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SlotKind {
    Downlink,
    Uplink,
    Special,
}

/// Repeating TDD frame pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct TddPattern {
    pub slots: Vec<SlotKind>,
    pub slot_duration_us: u64,
}

impl TddPattern {
    pub fn parse(pattern: &str, slot_duration_us: u64) -> Result<Self, ConfigError> {
        let slots = pattern
            .chars()
            .map(|c| match c {
                'D' => Ok(SlotKind::Downlink),
                'U' => Ok(SlotKind::Uplink),
                'S' => Ok(SlotKind::Special),
                other => Err(ConfigError::invalid(
                    "nr_mac.tdd_pattern",
                    format!("invalid slot symbol {other:?}"),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if slots.is_empty() {
            return Err(ConfigError::invalid("nr_mac.tdd_pattern", "must be non-empty"));
        }
        Ok(Self {
            slots,
            slot_duration_us,
        })
    }

    pub fn all_downlink(len: usize, slot_duration_us: u64) -> Self {
        Self {
            slots: vec![SlotKind::Downlink; len],
            slot_duration_us,
        }
    }

    pub fn period_us(&self) -> u64 {
        self.slots.len() as u64 * self.slot_duration_us
    }
}

/// Slot kind at a global slot index (pattern applied modulo its length).
pub fn tdd_slot_type(slot_index: u64, pattern: &TddPattern) -> SlotKind {
    pattern.slots[(slot_index % pattern.slots.len() as u64) as usize]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerMode {
    Priority,
    RoundRobin,
}

/// Scheduler view of one backlogged UE.
#[derive(Debug, Clone, Copy)]
pub struct UeDemand {
    pub ue: UeId,
    pub backlog_bytes: u64,
    /// Service class, 1 is highest priority.
    pub priority: u8,
    pub bytes_per_prb: f64,
}

impl UeDemand {
    fn prbs_needed(&self) -> u64 {
        if self.bytes_per_prb <= 0.0 || self.backlog_bytes == 0 {
            return 0;
        }
        (self.backlog_bytes as f64 / self.bytes_per_prb).ceil() as u64
    }
}

/// Allocate PRBs of one slot. Returns `(ue, granted prbs)` for every UE that
/// received anything; the grant total never exceeds `prbs`.
pub fn nr_schedule_slot(demands: &[UeDemand], prbs: u32, mode: SchedulerMode) -> Vec<(UeId, u32)> {
    let mut active: Vec<(UeDemand, u64)> = demands
        .iter()
        .filter(|d| d.prbs_needed() > 0)
        .map(|d| (*d, d.prbs_needed()))
        .collect();
    let mut remaining = prbs as u64;
    let mut grants: Vec<(UeId, u64)> = Vec::new();

    match mode {
        SchedulerMode::Priority => {
            active.sort_by_key(|(d, _)| (d.priority, d.ue));
            for (d, need) in active {
                if remaining == 0 {
                    break;
                }
                let g = need.min(remaining);
                remaining -= g;
                grants.push((d.ue, g));
            }
        }
        SchedulerMode::RoundRobin => {
            active.sort_by_key(|(d, _)| d.ue);
            let mut granted = vec![0u64; active.len()];
            loop {
                let unsatisfied: Vec<usize> = (0..active.len())
                    .filter(|&i| granted[i] < active[i].1)
                    .collect();
                if unsatisfied.is_empty() || remaining == 0 {
                    break;
                }
                let share = remaining / unsatisfied.len() as u64;
                let mut leftover = remaining % unsatisfied.len() as u64;
                if share == 0 {
                    // Fewer PRBs than UEs: lowest ids take the remainder.
                    for &i in unsatisfied.iter().take(leftover as usize) {
                        granted[i] += 1;
                    }
                    break;
                }
                for &i in &unsatisfied {
                    let extra = if leftover > 0 {
                        leftover -= 1;
                        1
                    } else {
                        0
                    };
                    let quota = share + extra;
                    let g = quota.min(active[i].1 - granted[i]);
                    granted[i] += g;
                    remaining -= g;
                }
            }
            for (i, (d, _)) in active.iter().enumerate() {
                if granted[i] > 0 {
                    grants.push((d.ue, granted[i]));
                }
            }
        }
    }

    grants
        .into_iter()
        .map(|(ue, g)| (ue, u32::try_from(g).unwrap_or(u32::MAX)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demand(ue: u32, backlog: u64, priority: u8, rate: f64) -> UeDemand {
        UeDemand {
            ue: UeId(ue),
            backlog_bytes: backlog,
            priority,
            bytes_per_prb: rate,
        }
    }

    #[test]
    fn top_cqi_rate() {
        let r = link_rate_nr(40.0);
        assert!((r - 116.6487).abs() < 0.05, "{r}");
    }

    #[test]
    fn outage_below_lowest_cqi() {
        assert_eq!(link_rate_nr(-10.0), 0.0);
    }

    #[test]
    fn rate_is_monotone() {
        assert!(link_rate_nr(10.0) <= link_rate_nr(20.0));
        let mut prev = 0.0;
        let mut s = -20.0;
        while s < 40.0 {
            let r = link_rate_nr(s);
            assert!(r >= prev);
            prev = r;
            s += 0.25;
        }
    }

    #[test]
    fn tdd_pattern_indexing() {
        let p = TddPattern::parse("DDDSUUUUUU", 500).unwrap();
        assert_eq!(p.period_us(), 5000);
        assert_eq!(tdd_slot_type(0, &p), SlotKind::Downlink);
        assert_eq!(tdd_slot_type(3, &p), SlotKind::Special);
        assert_eq!(tdd_slot_type(10, &p), tdd_slot_type(0, &p));
    }

    #[test]
    fn strict_priority_takes_everything() {
        let grants = nr_schedule_slot(
            &[
                demand(0, 1_000_000, 1, 100.0),
                demand(1, 1_000_000, 4, 100.0),
            ],
            162,
            SchedulerMode::Priority,
        );
        assert_eq!(grants, vec![(UeId(0), 162)]);
    }

    #[test]
    fn priority_water_fills_leftovers() {
        let grants = nr_schedule_slot(
            &[demand(0, 1_000, 1, 100.0), demand(1, 1_000_000, 4, 100.0)],
            162,
            SchedulerMode::Priority,
        );
        // UE0 needs ceil(1000/100) = 10 PRBs, the rest flows down.
        assert_eq!(grants, vec![(UeId(0), 10), (UeId(1), 152)]);
    }

    #[test]
    fn round_robin_equal_split() {
        let grants = nr_schedule_slot(
            &[
                demand(0, 1_000_000, 3, 100.0),
                demand(1, 1_000_000, 3, 100.0),
                demand(2, 1_000_000, 3, 100.0),
            ],
            162,
            SchedulerMode::RoundRobin,
        );
        assert_eq!(
            grants,
            vec![(UeId(0), 54), (UeId(1), 54), (UeId(2), 54)]
        );
    }

    #[test]
    fn round_robin_redistributes_unused_shares() {
        let grants = nr_schedule_slot(
            &[demand(0, 500, 3, 100.0), demand(1, 1_000_000, 3, 100.0)],
            162,
            SchedulerMode::RoundRobin,
        );
        // UE0 only needs 5 PRBs; UE1 absorbs the rest.
        assert_eq!(grants, vec![(UeId(0), 5), (UeId(1), 157)]);
    }

    #[test]
    fn grants_never_exceed_grid() {
        for n in 1..40u32 {
            let demands: Vec<UeDemand> = (0..n)
                .map(|i| demand(i, 10_000 + i as u64 * 137, 1 + (i % 4) as u8, 50.0))
                .collect();
            for mode in [SchedulerMode::Priority, SchedulerMode::RoundRobin] {
                let total: u64 = nr_schedule_slot(&demands, 162, mode)
                    .iter()
                    .map(|(_, g)| *g as u64)
                    .sum();
                assert!(total <= 162);
            }
        }
    }

    #[test]
    fn outage_ue_gets_nothing() {
        let grants = nr_schedule_slot(
            &[demand(0, 1_000, 1, 0.0), demand(1, 1_000, 2, 100.0)],
            162,
            SchedulerMode::Priority,
        );
        assert_eq!(grants, vec![(UeId(1), 10)]);
    }
}

//! Throughput and delay accounting.
//!
//! Throughput counts delivered payload bits only (headers ride the air but
//! are not goodput). Delay is the mean over delivered packets; scopes with no
//! deliveries report `None` rather than zero, alongside a loss count.

use std::collections::BTreeMap;

use crate::policy::types::{Direction, Rat};
use crate::topology::UeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scope {
    Total,
    Rat(Rat),
    Ue(UeId),
    Service(u8),
    Dir(Direction),
    RatDir(Rat, Direction),
}

#[derive(Debug, Clone, Copy, Default)]
struct Bucket {
    payload_bytes: u64,
    delay_sum_us: f64,
    delivered: u64,
    lost: u64,
}

/// Accumulates delivery and loss events for one run.
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    total: Bucket,
    per_rat: BTreeMap<Rat, Bucket>,
    per_ue: BTreeMap<UeId, Bucket>,
    per_service: BTreeMap<u8, Bucket>,
    per_direction: BTreeMap<&'static str, Bucket>,
    per_rat_direction: BTreeMap<(Rat, &'static str), Bucket>,
}

fn dir_key(d: Direction) -> &'static str {
    match d {
        Direction::Downlink => "dl",
        Direction::Uplink => "ul",
    }
}

impl MetricsAccumulator {
    #[allow(clippy::too_many_arguments)]
    pub fn record_delivery(
        &mut self,
        ue: UeId,
        rat: Rat,
        service: u8,
        direction: Direction,
        payload_bytes: u32,
        created_at_us: u64,
        delivered_at_us: u64,
    ) {
        debug_assert!(delivered_at_us >= created_at_us);
        let delay = (delivered_at_us - created_at_us) as f64;
        for b in [
            &mut self.total,
            self.per_rat.entry(rat).or_default(),
            self.per_ue.entry(ue).or_default(),
            self.per_service.entry(service).or_default(),
            self.per_direction.entry(dir_key(direction)).or_default(),
            self.per_rat_direction
                .entry((rat, dir_key(direction)))
                .or_default(),
        ] {
            b.payload_bytes += payload_bytes as u64;
            b.delay_sum_us += delay;
            b.delivered += 1;
        }
    }

    pub fn record_loss(&mut self, ue: UeId, rat: Rat, service: u8, direction: Direction) {
        for b in [
            &mut self.total,
            self.per_rat.entry(rat).or_default(),
            self.per_ue.entry(ue).or_default(),
            self.per_service.entry(service).or_default(),
            self.per_direction.entry(dir_key(direction)).or_default(),
            self.per_rat_direction
                .entry((rat, dir_key(direction)))
                .or_default(),
        ] {
            b.lost += 1;
        }
    }

    fn bucket(&self, scope: Scope) -> Option<&Bucket> {
        match scope {
            Scope::Total => Some(&self.total),
            Scope::Rat(r) => self.per_rat.get(&r),
            Scope::Ue(u) => self.per_ue.get(&u),
            Scope::Service(s) => self.per_service.get(&s),
            Scope::Dir(d) => self.per_direction.get(dir_key(d)),
            Scope::RatDir(r, d) => self.per_rat_direction.get(&(r, dir_key(d))),
        }
    }

    /// Delivered payload Mbps over the horizon.
    pub fn throughput_mbps(&self, scope: Scope, horizon_s: f64) -> f64 {
        assert!(horizon_s > 0.0);
        self.bucket(scope)
            .map(|b| b.payload_bytes as f64 * 8.0 / 1e6 / horizon_s)
            .unwrap_or(0.0)
    }

    /// Mean delivery delay in milliseconds; `None` when nothing was
    /// delivered in the scope.
    pub fn avg_delay_ms(&self, scope: Scope) -> Option<f64> {
        self.bucket(scope).and_then(|b| {
            (b.delivered > 0).then(|| b.delay_sum_us / b.delivered as f64 / 1000.0)
        })
    }

    pub fn delivered_count(&self, scope: Scope) -> u64 {
        self.bucket(scope).map(|b| b.delivered).unwrap_or(0)
    }

    pub fn loss_count(&self, scope: Scope) -> u64 {
        self.bucket(scope).map(|b| b.lost).unwrap_or(0)
    }

    /// Fraction of delivered payload carried by `rat`.
    pub fn rat_share(&self, rat: Rat) -> f64 {
        if self.total.payload_bytes == 0 {
            return 0.0;
        }
        self.per_rat
            .get(&rat)
            .map(|b| b.payload_bytes as f64 / self.total.payload_bytes as f64)
            .unwrap_or(0.0)
    }
}

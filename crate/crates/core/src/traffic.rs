//! Open-loop traffic generation and per-packet records.

use rand::Rng;
use serde::Serialize;

use crate::policy::types::Direction;
use crate::topology::UeId;

/// One offered-load flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    pub ue: UeId,
    pub direction: Direction,
    pub packets_per_s: f64,
    pub payload_bytes: u32,
    pub header_bytes: u32,
    /// Service class, 1 highest priority.
    pub service: u8,
}

impl FlowSpec {
    /// On-air PDU size.
    pub fn pdu_bytes(&self) -> u32 {
        self.payload_bytes + self.header_bytes
    }

    pub fn offered_mbps(&self) -> f64 {
        self.packets_per_s * self.payload_bytes as f64 * 8.0 / 1e6
    }
}

/// Lifecycle record of one packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketRecord {
    pub ue: UeId,
    #[serde(skip)]
    pub direction: Direction,
    pub seq: u32,
    pub created_at_us: u64,
    pub delivered_at_us: Option<u64>,
    pub payload_bytes: u32,
    pub pdu_bytes: u32,
    pub service: u8,
}

/// Draw the arrival times of one flow over the horizon: i.i.d. exponential
/// inter-arrivals with mean `1/rate`, returned in microseconds.
pub fn poisson_arrivals(flow: &FlowSpec, horizon_s: f64, rng: &mut impl Rng) -> Vec<u64> {
    assert!(flow.packets_per_s > 0.0, "rate must be positive");
    let mut out = Vec::with_capacity((flow.packets_per_s * horizon_s * 1.2) as usize + 4);
    let mut t = 0.0f64;
    loop {
        let u: f64 = rng.gen::<f64>();
        // Inverse CDF; 1-u avoids ln(0).
        t += -(1.0 - u).ln() / flow.packets_per_s;
        if t >= horizon_s {
            break;
        }
        out.push((t * 1e6).round() as u64);
    }
    out
}

//! Random deployments: node placement, UE–AP association, dual connectivity.

use rand::Rng;
use serde::Serialize;

use crate::config::TopologyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn distance(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct UeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ApId(pub u32);

impl std::fmt::Display for UeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ue{}", self.0)
    }
}

impl std::fmt::Display for ApId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ap{}", self.0)
    }
}

/// A generated deployment: positions, associations and dual-connectivity
/// flags. Immutable once built.
#[derive(Debug, Clone)]
pub struct Topology {
    pub cell_radius_m: f64,
    pub gnb_position: Point,
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// Nearest AP within coverage, if any.
    pub ue_ap_association: Vec<Option<ApId>>,
    pub dual_connected: Vec<bool>,
    /// Scenario-level warnings (e.g. dual-connectivity deficit).
    pub warnings: Vec<String>,
}

impl Topology {
    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn ue_gnb_distance(&self, ue: UeId) -> f64 {
        self.ue_positions[ue.0 as usize].distance(&self.gnb_position)
    }

    pub fn ue_ap_distance(&self, ue: UeId) -> Option<f64> {
        self.ue_ap_association[ue.0 as usize]
            .map(|ap| self.ue_positions[ue.0 as usize].distance(&self.ap_positions[ap.0 as usize]))
    }

    /// A UE can use the Wi-Fi leg only if it is dual connected (which implies
    /// an associated AP).
    pub fn serving_ap(&self, ue: UeId) -> Option<ApId> {
        if self.dual_connected[ue.0 as usize] {
            self.ue_ap_association[ue.0 as usize]
        } else {
            None
        }
    }

    pub fn dual_count(&self) -> usize {
        self.dual_connected.iter().filter(|d| **d).count()
    }

    /// Rows for the topology CSV dump: (ue_id, x, y, ap_id, dual_connected).
    pub fn dump_rows(&self) -> Vec<(u32, f64, f64, Option<u32>, bool)> {
        (0..self.num_ues())
            .map(|i| {
                (
                    i as u32,
                    self.ue_positions[i].x,
                    self.ue_positions[i].y,
                    self.ue_ap_association[i].map(|a| a.0),
                    self.dual_connected[i],
                )
            })
            .collect()
    }
}

fn uniform_in_disk(rng: &mut impl Rng, radius: f64) -> Point {
    // r = R * sqrt(u) avoids center bias.
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

fn uniform_in_annulus(rng: &mut impl Rng, inner: f64, outer: f64) -> Point {
    let u = rng.gen::<f64>();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

/// Uniform point inside the intersection of the AP coverage disk and the
/// cell, by rejection.
fn uniform_near_ap(rng: &mut impl Rng, ap: Point, coverage: f64, cell_radius: f64) -> Point {
    loop {
        let off = uniform_in_disk(rng, coverage);
        let p = Point {
            x: ap.x + off.x,
            y: ap.y + off.y,
        };
        if p.distance(&Point::ORIGIN) <= cell_radius {
            return p;
        }
    }
}

/// Generate a deployment.
///
/// APs are dropped uniformly (disk or annulus per config). In hotspot mode a
/// `dual_fraction` share of UEs is dropped inside AP coverage so that the
/// configured share of users can actually hold both links; the rest are
/// uniform in the cell. Association is nearest AP within coverage. The
/// dual-connected flag is then drawn uniformly among associated UEs; if too
/// few UEs have coverage the deficit is recorded as a warning instead of
/// moving anyone.
pub fn place_topology(
    cfg: &TopologyConfig,
    ap_rng: &mut impl Rng,
    ue_rng: &mut impl Rng,
    dual_rng: &mut impl Rng,
) -> Topology {
    let n_aps = cfg.num_aps as usize;
    let n_ues = cfg.num_ues as usize;
    let ap_outer = (cfg.cell_radius_m - cfg.ap_edge_margin_m).max(1.0);

    let ap_positions: Vec<Point> = (0..n_aps)
        .map(|_| match cfg.ap_placement.as_str() {
            "annulus" => {
                uniform_in_annulus(ap_rng, cfg.ap_annulus_inner_m.min(ap_outer - 1.0), ap_outer)
            }
            _ => uniform_in_disk(ap_rng, ap_outer),
        })
        .collect();

    let dual_target = (cfg.dual_fraction * n_ues as f64).round() as usize;

    let ue_positions: Vec<Point> = match cfg.ue_placement.as_str() {
        "hotspot" => (0..n_ues)
            .map(|i| {
                if i < dual_target {
                    // Spread hotspot UEs round-robin over APs so per-AP
                    // populations stay comparable across seeds.
                    let ap = ap_positions[i % n_aps];
                    uniform_near_ap(ue_rng, ap, cfg.wifi_coverage_m, cfg.cell_radius_m)
                } else {
                    uniform_in_disk(ue_rng, cfg.cell_radius_m)
                }
            })
            .collect(),
        _ => (0..n_ues)
            .map(|_| uniform_in_disk(ue_rng, cfg.cell_radius_m))
            .collect(),
    };

    let ue_ap_association: Vec<Option<ApId>> = ue_positions
        .iter()
        .map(|ue| {
            let mut best: Option<(usize, f64)> = None;
            for (i, ap) in ap_positions.iter().enumerate() {
                let d = ue.distance(ap);
                if d <= cfg.wifi_coverage_m && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            best.map(|(i, _)| ApId(i as u32))
        })
        .collect();

    let mut covered: Vec<usize> = ue_ap_association
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.map(|_| i))
        .collect();

    let mut warnings = Vec::new();
    let mut dual_connected = vec![false; n_ues];
    if covered.len() < dual_target {
        warnings.push(format!(
            "only {} of {} UEs lie inside AP coverage; dual-connected target of {} not met",
            covered.len(),
            n_ues,
            dual_target
        ));
        for i in &covered {
            dual_connected[*i] = true;
        }
    } else {
        // Fisher-Yates prefix selection.
        for k in 0..dual_target {
            let j = k + dual_rng.gen_range(0..covered.len() - k);
            covered.swap(k, j);
            dual_connected[covered[k]] = true;
        }
    }

    Topology {
        cell_radius_m: cfg.cell_radius_m,
        gnb_position: Point::ORIGIN,
        ap_positions,
        ue_positions,
        ue_ap_association,
        dual_connected,
        warnings,
    }
}

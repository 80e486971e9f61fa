//! Single-run execution and Monte-Carlo orchestration.
//!
//! One run is strictly single-threaded and bit-deterministic per
//! (config, scenario, policy, seed). Seeds are embarrassingly parallel and
//! merge in seed order.

use std::collections::{BTreeMap, VecDeque};
use std::hash::{Hash, Hasher};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::SimConfig;
use crate::control::{CallFlowTrace, ControlPlane, SessionId};
use crate::error::{ConfigError, ControlError};
use crate::mac::nr::{nr_schedule_slot, tdd_slot_type, SchedulerMode, SlotKind, TddPattern, UeDemand};
use crate::mac::wifi::{wifi_txop, Contender, DcfState, TxOutcome};
use crate::metrics::{MetricsAccumulator, Scope};
use crate::policy::types::{Direction, Rat, RatAssignment, RatLoadState};
use crate::policy::{create_policy, SelectionParams};
use crate::topology::{ApId, UeId};
use crate::traffic::{poisson_arrivals, FlowSpec};

use super::event::{EventKind, EventQueue};
use super::rng::{keyed_stream_rng, Stream};
use super::scenario::{build_deployment, Deployment, ScenarioKind};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("control plane: {0}")]
    Control(#[from] ControlError),
    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<EngineError>,
    },
}

/// Snapshot pushed to the controller by the periodic measurement service.
#[derive(Debug, Clone)]
pub struct MeasurementNote {
    pub time_us: u64,
    pub gnb_level: u8,
    pub ap_levels: BTreeMap<ApId, u8>,
    pub delivered_packets: u64,
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct SeedRow {
    pub seed: u64,
    pub scenario: &'static str,
    pub policy: String,
    pub topology_hash: u64,
    pub arrival_hash: u64,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub measurement_notes: Vec<MeasurementNote>,
    pub setup_traces: Vec<CallFlowTrace>,
}

struct Packet {
    ue: UeId,
    direction: Direction,
    service: u8,
    created_us: u64,
    rat: Rat,
    remaining: u64,
    payload: u32,
    delivered_us: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum WifiNode {
    Ap,
    Sta(UeId),
}

struct WifiCell {
    dl_queue: VecDeque<usize>,
    ul_queues: BTreeMap<UeId, VecDeque<usize>>,
    dcf: BTreeMap<WifiNode, DcfState>,
    rng: ChaCha8Rng,
    busy_until_us: u64,
    round_pending: bool,
}

struct NrSide {
    dl_queues: BTreeMap<UeId, VecDeque<usize>>,
    dl_backlog: BTreeMap<UeId, u64>,
    ul_queues: BTreeMap<UeId, VecDeque<usize>>,
    ul_backlog: BTreeMap<UeId, u64>,
}

fn scenario_scheduler(scenario: ScenarioKind) -> SchedulerMode {
    match scenario {
        ScenarioKind::UplinkDecoupling => SchedulerMode::RoundRobin,
        _ => SchedulerMode::Priority,
    }
}

fn scenario_pattern(cfg: &SimConfig, scenario: ScenarioKind) -> Result<TddPattern, ConfigError> {
    match scenario {
        // Downlink experiments dedicate the whole band to the downlink.
        ScenarioKind::Case(_) | ScenarioKind::SingleUe(_) => Ok(TddPattern::all_downlink(
            cfg.nr_mac.tdd_pattern.len().max(1),
            cfg.nr_mac.slot_duration_us,
        )),
        ScenarioKind::UplinkDecoupling => {
            TddPattern::parse(&cfg.nr_mac.tdd_pattern, cfg.nr_mac.slot_duration_us)
        }
    }
}

fn scenario_rates(cfg: &SimConfig, scenario: ScenarioKind) -> (f64, f64) {
    match scenario {
        ScenarioKind::Case(_) | ScenarioKind::SingleUe(_) => (cfg.traffic.dl_packets_per_s, 0.0),
        ScenarioKind::UplinkDecoupling => (
            cfg.traffic.decoupling_dl_packets_per_s,
            cfg.traffic.decoupling_ul_packets_per_s,
        ),
    }
}

/// Execute one (scenario, policy, seed) run.
pub fn run_single(
    cfg: &SimConfig,
    scenario: ScenarioKind,
    policy_name: &str,
    seed: u64,
) -> Result<SeedRow, EngineError> {
    let deployment = build_deployment(cfg, scenario, seed);
    let params = SelectionParams::from(&cfg.selection);
    let policy = create_policy(policy_name, &params)
        .ok_or_else(|| EngineError::UnknownPolicy(policy_name.to_string()))?;

    // Selection inputs in the configured processing order.
    let mut inputs = deployment.selection_inputs();
    match cfg.selection.ue_order.as_str() {
        "priority" => inputs.sort_by_key(|i| (i.service, i.ue)),
        _ => inputs.sort_by_key(|i| i.ue),
    }

    let n_ues = deployment.topology.num_ues();
    let aps: Vec<ApId> = (0..deployment.topology.num_aps() as u32).map(ApId).collect();
    let fresh_state = RatLoadState::fresh(
        params.gnb_capacity_users,
        params.wifi_capacity_users,
        aps.iter().copied(),
        params.thresholds,
    );

    let has_uplink = matches!(scenario, ScenarioKind::UplinkDecoupling);
    let (assignment, final_state) = if has_uplink {
        // The decoupling experiment pins the downlink (Wi-Fi for every
        // dual-connected UE) and lets the policy decide the uplink.
        let mut state = fresh_state.clone();
        let mut dl = BTreeMap::new();
        for inp in &inputs {
            let rat = match inp.serving_ap {
                Some(ap) if inp.dual_connected => {
                    if let Some(c) = state.per_ap.get_mut(&ap) {
                        c.consume();
                    }
                    Rat::Wifi
                }
                _ => {
                    state.gnb.consume();
                    Rat::Gnb
                }
            };
            dl.insert(inp.ue, rat);
        }
        let ul = policy.uplink(&inputs, &dl);
        (
            RatAssignment {
                downlink: dl,
                uplink: ul,
            },
            state,
        )
    } else {
        let (dl, state) = policy.downlink(&inputs, fresh_state);
        (
            RatAssignment {
                downlink: dl,
                uplink: BTreeMap::new(),
            },
            state,
        )
    };
    let dl_map = &assignment.downlink;
    let ul_map = &assignment.uplink;

    // Control-plane setup: attach, register, establish one session per UE.
    let mut cp = ControlPlane::new(cfg.cn.latency_us, cfg.selection.proactive_nas_path);
    let mut setup_traces = Vec::new();
    let mut sessions: BTreeMap<UeId, SessionId> = BTreeMap::new();
    for i in 0..n_ues {
        let ue = UeId(i as u32);
        cp.add_ue(ue, deployment.dual_effective[i]);
    }
    for i in 0..n_ues {
        let ue = UeId(i as u32);
        setup_traces.push(cp.run_initial_connection(ue)?);
        if cfg.selection.proactive_nas_path {
            setup_traces.push(cp.install_nas_path(ue)?);
        }
    }
    for i in 0..n_ues {
        let ue = UeId(i as u32);
        let (session, tr) = cp.run_pdu_session_setup(ue, dl_map[&ue])?;
        setup_traces.push(tr);
        sessions.insert(ue, session);
        if has_uplink {
            setup_traces.push(cp.install_uplink_path(ue, session, ul_map[&ue])?);
        }
    }

    // Route resolution through the switch pipelines; static for the run
    // since users are stationary and tables do not change after setup.
    let mut dl_rat = vec![Rat::Gnb; n_ues];
    let mut ul_rat = vec![Rat::Gnb; n_ues];
    for i in 0..n_ues {
        let ue = UeId(i as u32);
        let session = sessions[&ue];
        let rat = cp
            .classify_downlink(ue, session)
            .ok_or(ControlError::NotConnected(ue.0))?;
        debug_assert_eq!(rat, dl_map[&ue]);
        assert!(cp.deliver_downlink(ue, session), "ue switch must map drb to ip");
        dl_rat[i] = rat;
        if has_uplink {
            ul_rat[i] = cp
                .classify_uplink(ue, session)
                .ok_or(ControlError::NotConnected(ue.0))?;
            debug_assert_eq!(ul_rat[i], ul_map[&ue]);
        }
    }

    // Traffic generation: per-UE streams so policy choices never disturb
    // the draws.
    let (dl_pps, ul_pps) = scenario_rates(cfg, scenario);
    let horizon_us = (cfg.run.horizon_s * 1e6).round() as u64;
    let mut arena: Vec<Packet> = Vec::new();
    let mut queue = EventQueue::default();
    let mut arrival_hasher = std::collections::hash_map::DefaultHasher::new();
    for i in 0..n_ues {
        let ue = UeId(i as u32);
        let mut gen_dir = |direction: Direction, pps: f64, key: u64| {
            if pps <= 0.0 {
                return;
            }
            let flow = FlowSpec {
                ue,
                direction,
                packets_per_s: pps,
                payload_bytes: cfg.traffic.payload_bytes,
                header_bytes: cfg.traffic.header_bytes,
                service: deployment.services[i],
            };
            let mut rng = keyed_stream_rng(seed, Stream::Traffic, key);
            for t in poisson_arrivals(&flow, cfg.run.horizon_s, &mut rng) {
                let ingress = match direction {
                    // Downlink packets cross the core first.
                    Direction::Downlink => t + cfg.cn.latency_us,
                    Direction::Uplink => t,
                };
                let idx = arena.len();
                arena.push(Packet {
                    ue,
                    direction,
                    service: deployment.services[i],
                    created_us: t,
                    rat: match direction {
                        Direction::Downlink => dl_rat[i],
                        Direction::Uplink => ul_rat[i],
                    },
                    remaining: flow.pdu_bytes() as u64,
                    payload: flow.payload_bytes,
                    delivered_us: None,
                });
                (ue.0, matches!(direction, Direction::Uplink), t).hash(&mut arrival_hasher);
                if ingress < horizon_us {
                    queue.push(ingress, EventKind::Arrival(idx));
                }
            }
        };
        gen_dir(Direction::Downlink, dl_pps, (i as u64) * 2);
        gen_dir(Direction::Uplink, ul_pps, (i as u64) * 2 + 1);
    }
    let arrival_hash = arrival_hasher.finish();

    // MAC state.
    let pattern = scenario_pattern(cfg, scenario)?;
    let sched_mode = scenario_scheduler(scenario);
    let mut nr = NrSide {
        dl_queues: BTreeMap::new(),
        dl_backlog: BTreeMap::new(),
        ul_queues: BTreeMap::new(),
        ul_backlog: BTreeMap::new(),
    };
    let mut cells: BTreeMap<ApId, WifiCell> = aps
        .iter()
        .map(|ap| {
            (
                *ap,
                WifiCell {
                    dl_queue: VecDeque::new(),
                    ul_queues: BTreeMap::new(),
                    dcf: BTreeMap::new(),
                    rng: keyed_stream_rng(seed, Stream::Backoff, ap.0 as u64),
                    busy_until_us: 0,
                    round_pending: false,
                },
            )
        })
        .collect();

    queue.push(0, EventKind::SlotBoundary(0));
    if cfg.measurement.enabled {
        let mut k = 0u32;
        while (k as u64) * cfg.measurement.period_us < horizon_us {
            queue.push((k as u64) * cfg.measurement.period_us, EventKind::MeasurementTick(k));
            k += 1;
        }
    }

    let mut acc = MetricsAccumulator::default();
    let mut notes = Vec::new();
    let mut clock = 0u64;
    let serving_ap: Vec<Option<ApId>> = (0..n_ues)
        .map(|i| deployment.serving_ap(UeId(i as u32)))
        .collect();

    while let Some((t, kind)) = queue.pop() {
        assert!(t >= clock, "event time must not run backwards");
        if t >= horizon_us {
            break;
        }
        clock = t;
        match kind {
            EventKind::Arrival(idx) => {
                let (ue, direction, rat, pdu) = {
                    let p = &arena[idx];
                    (p.ue, p.direction, p.rat, p.remaining)
                };
                let i = ue.0 as usize;
                match (direction, rat) {
                    (Direction::Downlink, Rat::Gnb) => {
                        nr.dl_queues.entry(ue).or_default().push_back(idx);
                        *nr.dl_backlog.entry(ue).or_default() += pdu;
                    }
                    (Direction::Uplink, Rat::Gnb) => {
                        nr.ul_queues.entry(ue).or_default().push_back(idx);
                        *nr.ul_backlog.entry(ue).or_default() += pdu;
                    }
                    (dir, Rat::Wifi) => {
                        let ap = serving_ap[i].expect("wifi rat implies serving ap");
                        let cell = cells.get_mut(&ap).expect("cell exists");
                        match dir {
                            Direction::Downlink => cell.dl_queue.push_back(idx),
                            Direction::Uplink => {
                                cell.ul_queues.entry(ue).or_default().push_back(idx)
                            }
                        }
                        if !cell.round_pending {
                            cell.round_pending = true;
                            queue.push(t.max(cell.busy_until_us), EventKind::WifiRound(ap));
                        }
                    }
                }
            }
            EventKind::SlotBoundary(k) => {
                let slot_end = t + pattern.slot_duration_us;
                match tdd_slot_type(k, &pattern) {
                    SlotKind::Downlink => serve_nr(
                        &mut nr,
                        Direction::Downlink,
                        cfg.nr.prbs,
                        sched_mode,
                        &deployment,
                        &mut arena,
                        &mut acc,
                        slot_end,
                        0,
                    ),
                    SlotKind::Special => {
                        // Downlink symbols except the switching tail.
                        let prbs =
                            (cfg.nr.prbs as f64 * cfg.nr_mac.s_slot_dl_fraction).floor() as u32;
                        serve_nr(
                            &mut nr,
                            Direction::Downlink,
                            prbs,
                            sched_mode,
                            &deployment,
                            &mut arena,
                            &mut acc,
                            slot_end,
                            0,
                        )
                    }
                    SlotKind::Uplink => serve_nr(
                        &mut nr,
                        Direction::Uplink,
                        cfg.nr.prbs,
                        sched_mode,
                        &deployment,
                        &mut arena,
                        &mut acc,
                        slot_end,
                        cfg.cn.latency_us,
                    ),
                }
                if slot_end < horizon_us {
                    queue.push(slot_end, EventKind::SlotBoundary(k + 1));
                }
            }
            EventKind::WifiRound(ap) => {
                let cell = cells.get_mut(&ap).expect("cell exists");
                cell.round_pending = false;
                let mut contenders: Vec<Contender<WifiNode>> = Vec::new();
                if let Some(&head) = cell.dl_queue.front() {
                    let p = &arena[head];
                    let link = deployment.links[p.ue.0 as usize]
                        .wifi
                        .expect("wifi packet implies wifi link");
                    contenders.push(Contender {
                        key: WifiNode::Ap,
                        frame_bytes: p.remaining as u32,
                        phy_rate_mbps: link.dl_rate_mbps,
                    });
                }
                for (ue, q) in &cell.ul_queues {
                    if let Some(&head) = q.front() {
                        let link = deployment.links[ue.0 as usize]
                            .wifi
                            .expect("wifi packet implies wifi link");
                        contenders.push(Contender {
                            key: WifiNode::Sta(*ue),
                            frame_bytes: arena[head].remaining as u32,
                            phy_rate_mbps: link.ul_rate_mbps,
                        });
                    }
                }
                if contenders.is_empty() {
                    continue;
                }
                let outcome = wifi_txop(&contenders, &mut cell.dcf, &cfg.dcf, &mut cell.rng);
                let airtime = match outcome {
                    TxOutcome::Won { winner, airtime_us } => {
                        let idx = match winner {
                            WifiNode::Ap => cell.dl_queue.pop_front().expect("head exists"),
                            WifiNode::Sta(ue) => cell
                                .ul_queues
                                .get_mut(&ue)
                                .and_then(|q| q.pop_front())
                                .expect("head exists"),
                        };
                        let p = &mut arena[idx];
                        let extra = match p.direction {
                            // Uplink terminates behind the core.
                            Direction::Uplink => cfg.cn.latency_us,
                            Direction::Downlink => 0,
                        };
                        let delivered = t + airtime_us + extra;
                        p.delivered_us = Some(delivered);
                        acc.record_delivery(
                            p.ue,
                            Rat::Wifi,
                            p.service,
                            p.direction,
                            p.payload,
                            p.created_us,
                            delivered,
                        );
                        airtime_us
                    }
                    TxOutcome::Collision {
                        dropped,
                        airtime_us,
                        ..
                    } => {
                        for key in dropped {
                            let idx = match key {
                                WifiNode::Ap => cell.dl_queue.pop_front(),
                                WifiNode::Sta(ue) => {
                                    cell.ul_queues.get_mut(&ue).and_then(|q| q.pop_front())
                                }
                            };
                            if let Some(idx) = idx {
                                let p = &arena[idx];
                                acc.record_loss(p.ue, Rat::Wifi, p.service, p.direction);
                                // Mark as handled so horizon accounting
                                // does not double-count it.
                                arena[idx].delivered_us = Some(u64::MAX);
                            }
                        }
                        airtime_us
                    }
                };
                cell.busy_until_us = t + airtime;
                let backlog = !cell.dl_queue.is_empty()
                    || cell.ul_queues.values().any(|q| !q.is_empty());
                if backlog {
                    cell.round_pending = true;
                    queue.push(cell.busy_until_us, EventKind::WifiRound(ap));
                }
            }
            EventKind::MeasurementTick(_) => {
                notes.push(MeasurementNote {
                    time_us: t,
                    gnb_level: final_state.gnb_level().value(),
                    ap_levels: final_state
                        .per_ap
                        .iter()
                        .map(|(ap, c)| (*ap, c.level(&final_state.thresholds).value()))
                        .collect(),
                    delivered_packets: acc.delivered_count(Scope::Total),
                });
            }
        }
    }

    // End of horizon: everything not delivered counts as a loss.
    for p in &arena {
        if p.delivered_us.is_none() {
            acc.record_loss(p.ue, p.rat, p.service, p.direction);
        }
    }
    debug_assert_eq!(
        acc.delivered_count(Scope::Total) + acc.loss_count(Scope::Total),
        arena.len() as u64
    );

    // Flatten metrics.
    let horizon_s = cfg.run.horizon_s;
    let mut metrics = BTreeMap::new();
    metrics.insert(
        "throughput_total_mbps".into(),
        acc.throughput_mbps(Scope::Total, horizon_s),
    );
    metrics.insert(
        "throughput_gnb_mbps".into(),
        acc.throughput_mbps(Scope::Rat(Rat::Gnb), horizon_s),
    );
    metrics.insert(
        "throughput_wifi_mbps".into(),
        acc.throughput_mbps(Scope::Rat(Rat::Wifi), horizon_s),
    );
    if has_uplink {
        metrics.insert(
            "throughput_dl_mbps".into(),
            acc.throughput_mbps(Scope::Dir(Direction::Downlink), horizon_s),
        );
        metrics.insert(
            "throughput_ul_mbps".into(),
            acc.throughput_mbps(Scope::Dir(Direction::Uplink), horizon_s),
        );
        metrics.insert(
            "throughput_wifi_dl_mbps".into(),
            acc.throughput_mbps(Scope::RatDir(Rat::Wifi, Direction::Downlink), horizon_s),
        );
        metrics.insert(
            "throughput_wifi_ul_mbps".into(),
            acc.throughput_mbps(Scope::RatDir(Rat::Wifi, Direction::Uplink), horizon_s),
        );
    }
    let mut classes: Vec<u8> = deployment.services.clone();
    classes.sort_unstable();
    classes.dedup();
    for s in classes {
        metrics.insert(
            format!("throughput_s{s}_mbps"),
            acc.throughput_mbps(Scope::Service(s), horizon_s),
        );
        if let Some(d) = acc.avg_delay_ms(Scope::Service(s)) {
            metrics.insert(format!("delay_s{s}_ms"), d);
        }
    }
    if let Some(d) = acc.avg_delay_ms(Scope::Total) {
        metrics.insert("delay_overall_ms".into(), d);
    }
    metrics.insert("loss_packets".into(), acc.loss_count(Scope::Total) as f64);
    metrics.insert(
        "delivered_packets".into(),
        acc.delivered_count(Scope::Total) as f64,
    );
    metrics.insert("load_share_gnb".into(), acc.rat_share(Rat::Gnb));
    metrics.insert("load_share_wifi".into(), acc.rat_share(Rat::Wifi));
    metrics.insert(
        "dl_users_gnb".into(),
        dl_map.values().filter(|r| **r == Rat::Gnb).count() as f64,
    );
    metrics.insert(
        "dl_users_wifi".into(),
        dl_map.values().filter(|r| **r == Rat::Wifi).count() as f64,
    );
    if has_uplink {
        metrics.insert(
            "ul_users_gnb".into(),
            ul_map.values().filter(|r| **r == Rat::Gnb).count() as f64,
        );
        metrics.insert(
            "ul_users_wifi".into(),
            ul_map.values().filter(|r| **r == Rat::Wifi).count() as f64,
        );
    }
    metrics.insert("measurement_ticks".into(), notes.len() as f64);

    Ok(SeedRow {
        seed,
        scenario: scenario.label(),
        policy: policy_name.to_string(),
        topology_hash: deployment.topology_hash,
        arrival_hash,
        metrics,
        warnings: deployment.warnings.clone(),
        measurement_notes: notes,
        setup_traces,
    })
}

#[allow(clippy::too_many_arguments)]
fn serve_nr(
    nr: &mut NrSide,
    direction: Direction,
    prbs: u32,
    mode: SchedulerMode,
    deployment: &Deployment,
    arena: &mut [Packet],
    acc: &mut MetricsAccumulator,
    slot_end_us: u64,
    delivery_extra_us: u64,
) {
    let (queues, backlog) = match direction {
        Direction::Downlink => (&mut nr.dl_queues, &mut nr.dl_backlog),
        Direction::Uplink => (&mut nr.ul_queues, &mut nr.ul_backlog),
    };
    if prbs == 0 {
        return;
    }
    let demands: Vec<UeDemand> = queues
        .iter()
        .filter_map(|(ue, q)| {
            if q.is_empty() {
                return None;
            }
            let i = ue.0 as usize;
            let rate = match direction {
                Direction::Downlink => deployment.links[i].nr_dl_rate,
                Direction::Uplink => deployment.links[i].nr_ul_rate,
            };
            Some(UeDemand {
                ue: *ue,
                backlog_bytes: backlog.get(ue).copied().unwrap_or(0),
                priority: deployment.services[i],
                bytes_per_prb: rate,
            })
        })
        .collect();
    if demands.is_empty() {
        return;
    }
    for (ue, granted_prbs) in nr_schedule_slot(&demands, prbs, mode) {
        let i = ue.0 as usize;
        let rate = match direction {
            Direction::Downlink => deployment.links[i].nr_dl_rate,
            Direction::Uplink => deployment.links[i].nr_ul_rate,
        };
        let mut budget = (granted_prbs as f64 * rate).floor() as u64;
        let q = queues.get_mut(&ue).expect("granted ue has a queue");
        while budget > 0 {
            let Some(&head) = q.front() else { break };
            let served = budget.min(arena[head].remaining);
            arena[head].remaining -= served;
            budget -= served;
            *backlog.get_mut(&ue).expect("backlog tracked") -= served;
            if arena[head].remaining == 0 {
                q.pop_front();
                let p = &mut arena[head];
                let delivered = slot_end_us + delivery_extra_us;
                p.delivered_us = Some(delivered);
                acc.record_delivery(
                    p.ue,
                    Rat::Gnb,
                    p.service,
                    p.direction,
                    p.payload,
                    p.created_us,
                    delivered,
                );
            }
        }
    }
}

/// Aggregated batch output.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub rows: Vec<SeedRow>,
    pub warnings: Vec<String>,
}

impl RunResult {
    /// Mean of a metric over all seeds of one (scenario, policy) pair.
    pub fn mean_metric(&self, scenario: &str, policy: &str, metric: &str) -> Option<f64> {
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.scenario == scenario && r.policy == policy)
            .filter_map(|r| r.metrics.get(metric).copied())
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}

/// Run a set of scenarios under a set of policies over the given seeds.
/// Seeds execute in parallel; results merge in deterministic order.
pub fn run_batch(
    cfg: &SimConfig,
    scenarios: &[ScenarioKind],
    policies: &[&str],
    seeds: &[u64],
) -> Result<RunResult, EngineError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &scenario in scenarios {
        for &policy in policies {
            let mut batch: Vec<Result<SeedRow, EngineError>> = Vec::new();
            seeds
                .par_iter()
                .map(|&seed| {
                    run_single(cfg, scenario, policy, seed).map_err(|e| EngineError::Seed {
                        seed,
                        source: Box::new(e),
                    })
                })
                .collect_into_vec(&mut batch);
            for row in batch {
                rows.push(row?);
            }
        }
    }
    let mut warnings: Vec<String> = rows.iter().flat_map(|r| r.warnings.clone()).collect();
    warnings.sort();
    warnings.dedup();
    Ok(RunResult { rows, warnings })
}

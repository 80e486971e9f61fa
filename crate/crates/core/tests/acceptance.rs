//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured values. Run with `--nocapture` to see them.
//!
//! Criteria 5 and 6 share one Monte-Carlo batch (cases a-e, both policies,
//! seeds 1..=10 of the default configuration).

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steersim_core::channel::ChannelQuality;
use steersim_core::config::SimConfig;
use steersim_core::control::{conformance, trace, ControlPlane};
use steersim_core::engine::results::{raw_csv, Provenance};
use steersim_core::engine::{run_batch, CaseId, RunResult, ScenarioKind};
use steersim_core::mac::wifi::{wifi_txop, Contender, TxOutcome};
use steersim_core::policy::flow_controlled::{select_downlink, select_uplink, threshold_score};
use steersim_core::policy::types::{
    LoadThresholds, Rat, RatLoadState, SelectionWeights, UeSelectionInput,
};
use steersim_core::policy::{BASELINE_3GPP, FLOW_CONTROLLED};
use steersim_core::topology::{ApId, UeId};

const POLICIES: [&str; 2] = [FLOW_CONTROLLED, BASELINE_3GPP];

fn acceptance_seeds() -> Vec<u64> {
    (1..=10).collect()
}

fn downlink_batch() -> &'static RunResult {
    static BATCH: OnceLock<RunResult> = OnceLock::new();
    BATCH.get_or_init(|| {
        let cfg = SimConfig::default();
        let scenarios: Vec<ScenarioKind> =
            CaseId::ALL.iter().map(|c| ScenarioKind::Case(*c)).collect();
        run_batch(&cfg, &scenarios, &POLICIES, &acceptance_seeds()).expect("downlink batch")
    })
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:02} ({name}): {verdict} — {detail}");
    assert!(pass, "criterion {id:02} ({name}) failed: {detail}");
}

// --- criterion 1: scoring-rule oracle over the full input domain ----------

#[test]
fn c01_threshold_score_oracle() {
    let start = Instant::now();
    let w = SelectionWeights::default();
    let thresholds = LoadThresholds::default();
    let mut checked = 0;
    for l_g in 1..=3u8 {
        for l_w in 1..=3u8 {
            for ch in 0..=1u8 {
                for s in 1..=4u8 {
                    // Independent straight-line evaluation.
                    let expected =
                        30.0 * l_g as f64 + 10.0 * l_w as f64 + 50.0 * ch as f64 + 25.0 * s as f64;
                    let got = threshold_score(l_g, l_w, ch, s, &w).unwrap();
                    assert_eq!(got, expected, "tuple ({l_g},{l_w},{ch},{s})");

                    // Decision at T' = 170 through the real selection walk.
                    let mut state = RatLoadState::fresh(3, 3, [ApId(0)], thresholds);
                    state.gnb.remaining = match l_g {
                        1 => 3,
                        2 => 2,
                        _ => 1,
                    };
                    state.per_ap.get_mut(&ApId(0)).unwrap().remaining = match l_w {
                        1 => 3,
                        2 => 2,
                        _ => 1,
                    };
                    let ue = UeSelectionInput {
                        ue: UeId(0),
                        service: s,
                        nr_channel: if ch == 0 {
                            ChannelQuality::Good
                        } else {
                            ChannelQuality::Bad
                        },
                        dual_connected: true,
                        serving_ap: Some(ApId(0)),
                        gnb_distance_m: 100.0,
                    };
                    let (dl, _) = select_downlink(&[ue], state, &w, 170.0);
                    let expected_rat = if expected > 170.0 { Rat::Wifi } else { Rat::Gnb };
                    assert_eq!(dl[&UeId(0)], expected_rat, "tuple ({l_g},{l_w},{ch},{s})");
                    checked += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "scoring-rule oracle",
        checked == 72 && elapsed.as_secs_f64() < 1.0,
        &format!("{checked}/72 tuples exact, decisions match at T'=170, {elapsed:?}"),
    );
}

// --- criterion 2: downlink selection vs straight-line re-implementation ---

fn oracle_level(remaining: u32, initial: u32) -> u8 {
    let ratio = remaining as f64 / initial.max(1) as f64;
    if ratio > 2.0 / 3.0 {
        1
    } else if ratio > 1.0 / 3.0 {
        2
    } else {
        3
    }
}

/// Literal transcription of the downlink walk, kept independent of the
/// production code path.
#[allow(clippy::type_complexity)]
fn oracle_downlink(
    ues: &[UeSelectionInput],
    mut c_g: (u32, u32),
    mut c_w: BTreeMap<ApId, (u32, u32)>,
    t_prime: f64,
) -> BTreeMap<UeId, Rat> {
    let mut out = BTreeMap::new();
    for ue in ues {
        if !ue.dual_connected || ue.serving_ap.is_none() {
            out.insert(ue.ue, Rat::Gnb);
            continue;
        }
        let ap = ue.serving_ap.unwrap();
        let l_g = oracle_level(c_g.0, c_g.1);
        let l_w = c_w.get(&ap).map(|(r, i)| oracle_level(*r, *i)).unwrap_or(1);
        let ch = match ue.nr_channel {
            ChannelQuality::Good => 0u8,
            ChannelQuality::Bad => 1,
        };
        let t = 30.0 * l_g as f64 + 10.0 * l_w as f64 + 50.0 * ch as f64 + 25.0 * ue.service as f64;
        if t > t_prime {
            out.insert(ue.ue, Rat::Wifi);
            if let Some(e) = c_w.get_mut(&ap) {
                e.0 = e.0.saturating_sub(1);
            }
        } else {
            out.insert(ue.ue, Rat::Gnb);
            c_g.0 = c_g.0.saturating_sub(1);
        }
    }
    out
}

#[test]
fn c02_downlink_selection_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let w = SelectionWeights::default();
    let thresholds = LoadThresholds::default();
    for instance in 0..1000 {
        let n_ues = rng.gen_range(1..=20);
        let n_aps = rng.gen_range(1..=4u32);
        let gnb_init = rng.gen_range(1..=20u32);
        let gnb_rem = rng.gen_range(0..=gnb_init);
        let ap_caps: Vec<(u32, u32)> = (0..n_aps)
            .map(|_| {
                let init = rng.gen_range(1..=8u32);
                (rng.gen_range(0..=init), init)
            })
            .collect();

        let ues: Vec<UeSelectionInput> = (0..n_ues)
            .map(|i| {
                let dual = rng.gen_bool(0.8);
                UeSelectionInput {
                    ue: UeId(i),
                    service: rng.gen_range(1..=4),
                    nr_channel: if rng.gen_bool(0.3) {
                        ChannelQuality::Bad
                    } else {
                        ChannelQuality::Good
                    },
                    dual_connected: dual,
                    serving_ap: dual.then(|| ApId(rng.gen_range(0..n_aps))),
                    gnb_distance_m: rng.gen_range(1.0..250.0),
                }
            })
            .collect();

        let mut state = RatLoadState::fresh(gnb_init, 1, (0..n_aps).map(ApId), thresholds);
        state.gnb.remaining = gnb_rem;
        for (ap, (rem, init)) in ap_caps.iter().enumerate() {
            let e = state.per_ap.get_mut(&ApId(ap as u32)).unwrap();
            e.initial = *init;
            e.remaining = *rem;
        }
        let expected = oracle_downlink(
            &ues,
            (gnb_rem, gnb_init),
            ap_caps
                .iter()
                .enumerate()
                .map(|(i, c)| (ApId(i as u32), *c))
                .collect(),
            170.0,
        );
        let (got, _) = select_downlink(&ues, state, &w, 170.0);
        assert_eq!(got, expected, "instance {instance}");
    }
    let elapsed = start.elapsed();
    report(
        2,
        "downlink selection oracle",
        elapsed.as_secs_f64() < 10.0,
        &format!("1000 random instances match exactly, {elapsed:?}"),
    );
}

// --- criterion 3: uplink offload vs brute force ----------------------------

fn oracle_uplink(
    ues: &[UeSelectionInput],
    dl: &BTreeMap<UeId, Rat>,
    mut c_g: u32,
    w0: u32,
) -> BTreeMap<UeId, Rat> {
    let mut out = dl.clone();
    let mut groups: BTreeMap<ApId, Vec<&UeSelectionInput>> = BTreeMap::new();
    for ue in ues {
        if dl.get(&ue.ue) == Some(&Rat::Wifi) {
            if let Some(ap) = ue.serving_ap {
                groups.entry(ap).or_default().push(ue);
            }
        }
    }
    let mut aps: Vec<(ApId, usize)> = groups.iter().map(|(a, v)| (*a, v.len())).collect();
    aps.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    for (ap, n) in aps {
        let k = (n as u32).saturating_sub(w0).min(c_g);
        let mut members = groups.remove(&ap).unwrap();
        members.sort_by(|a, b| {
            a.gnb_distance_m
                .partial_cmp(&b.gnb_distance_m)
                .unwrap()
                .then(a.ue.cmp(&b.ue))
        });
        for m in members.into_iter().take(k as usize) {
            out.insert(m.ue, Rat::Gnb);
            c_g -= 1;
        }
    }
    out
}

#[test]
fn c03_uplink_selection_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB2);
    for instance in 0..1000 {
        let n_ues = rng.gen_range(1..=20);
        let n_aps = rng.gen_range(1..=5u32);
        let w0 = rng.gen_range(0..=6u32);
        let c_g = rng.gen_range(0..=10u32);
        let ues: Vec<UeSelectionInput> = (0..n_ues)
            .map(|i| {
                let dual = rng.gen_bool(0.85);
                UeSelectionInput {
                    ue: UeId(i),
                    service: 3,
                    nr_channel: ChannelQuality::Good,
                    dual_connected: dual,
                    serving_ap: dual.then(|| ApId(rng.gen_range(0..n_aps))),
                    gnb_distance_m: (rng.gen_range(1..2500) as f64) / 10.0,
                }
            })
            .collect();
        let dl: BTreeMap<UeId, Rat> = ues
            .iter()
            .map(|u| {
                let rat = if u.dual_connected && u.serving_ap.is_some() {
                    Rat::Wifi
                } else {
                    Rat::Gnb
                };
                (u.ue, rat)
            })
            .collect();
        let dl_before = dl.clone();
        let expected = oracle_uplink(&ues, &dl, c_g, w0);
        let got = select_uplink(&ues, &dl, c_g, w0);
        assert_eq!(got, expected, "instance {instance}");
        assert_eq!(dl, dl_before, "downlink mutated in instance {instance}");

        // Conservation: per-AP uplink population never exceeds
        // max(w0, original N_i), and the total moved stays within c_g.
        let mut before_per_ap: BTreeMap<ApId, u32> = BTreeMap::new();
        let mut after_per_ap: BTreeMap<ApId, u32> = BTreeMap::new();
        for ue in &ues {
            if let Some(ap) = ue.serving_ap {
                if dl[&ue.ue] == Rat::Wifi {
                    *before_per_ap.entry(ap).or_default() += 1;
                }
                if got[&ue.ue] == Rat::Wifi {
                    *after_per_ap.entry(ap).or_default() += 1;
                }
            }
        }
        for (ap, after) in &after_per_ap {
            let before = before_per_ap.get(ap).copied().unwrap_or(0);
            assert!(*after <= before.max(w0), "instance {instance}");
        }
        let moved = got.values().filter(|r| **r == Rat::Gnb).count()
            - dl.values().filter(|r| **r == Rat::Gnb).count();
        assert!(moved as u32 <= c_g, "instance {instance}");
    }
    let elapsed = start.elapsed();
    report(
        3,
        "uplink offload oracle",
        elapsed.as_secs_f64() < 10.0,
        &format!("1000 random instances match, downlink untouched, {elapsed:?}"),
    );
}

// --- criterion 4: call-flow conformance ------------------------------------

#[test]
fn c04_call_flow_conformance() {
    let start = Instant::now();
    let mut cp = ControlPlane::new(5000, true);
    cp.add_ue(UeId(1), true);
    cp.add_ue(UeId(2), true);

    let tr = cp.run_initial_connection(UeId(1)).unwrap();
    conformance::check(&tr, &conformance::initial_connection(UeId(1))).unwrap();
    let tr = cp.install_nas_path(UeId(1)).unwrap();
    conformance::check(&tr, &conformance::registration(UeId(1))).unwrap();
    let (_, tr) = cp.run_pdu_session_setup(UeId(1), Rat::Gnb).unwrap();
    conformance::check(&tr, &conformance::pdu_session(UeId(1), Rat::Gnb)).unwrap();

    // Second UE takes the Wi-Fi leg.
    cp.run_initial_connection(UeId(2)).unwrap();
    cp.install_nas_path(UeId(2)).unwrap();
    let (_, tr) = cp.run_pdu_session_setup(UeId(2), Rat::Wifi).unwrap();
    conformance::check(&tr, &conformance::pdu_session(UeId(2), Rat::Wifi)).unwrap();

    // Direct Internet attachment: no core-side events at all.
    let tr = cp.run_direct_internet_setup(UeId(1), true).unwrap();
    conformance::check(&tr, &conformance::direct_internet(UeId(1), true)).unwrap();
    let core_events = tr.count_named(trace::NGAP_SESSION_SETUP)
        + tr.count_named(trace::NGAP_ASSOCIATION_CREATED)
        + tr.count_named(trace::GTP_TUNNEL_CREATED)
        + tr.count_named(trace::NAS_UPLINK)
        + tr.count_named(trace::NAS_FORWARD);
    assert_eq!(core_events, 0);

    // Rejected admission path.
    let mut cp2 = ControlPlane::new(5000, true);
    cp2.add_ue(UeId(9), true);
    cp2.set_admission(|_| false);
    let tr = cp2.run_initial_connection(UeId(9)).unwrap();
    conformance::check(&tr, &conformance::initial_connection_rejected(UeId(9))).unwrap();

    let elapsed = start.elapsed();
    report(
        4,
        "call-flow conformance",
        elapsed.as_secs_f64() < 1.0,
        &format!("initial/registration/session/direct traces conform, {elapsed:?}"),
    );
}

// --- criteria 5 and 6: downlink case trends --------------------------------

#[test]
fn c05_skewed_case_dominance() {
    let start = Instant::now();
    let batch = downlink_batch();
    let mut detail = String::new();
    let mut pass = true;
    for case in CaseId::ALL {
        let label = ScenarioKind::Case(case).label();
        let flow = batch
            .mean_metric(label, FLOW_CONTROLLED, "throughput_total_mbps")
            .unwrap();
        let base = batch
            .mean_metric(label, BASELINE_3GPP, "throughput_total_mbps")
            .unwrap();
        match case {
            CaseId::C => {
                let rel = (flow - base).abs() / base;
                pass &= rel <= 0.15;
                detail.push_str(&format!("{label}: |Δ|/base={rel:.3} "));
            }
            _ => {
                pass &= flow > base;
                detail.push_str(&format!("{label}: {flow:.1} vs {base:.1} "));
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 300.0;
    report(5, "skewed-case dominance", pass, &format!("{detail}({elapsed:?})"));
}

#[test]
fn c06_load_balancing_flatness() {
    let batch = downlink_batch();
    let totals = |policy: &str| -> Vec<f64> {
        CaseId::ALL
            .iter()
            .map(|c| {
                batch
                    .mean_metric(ScenarioKind::Case(*c).label(), policy, "throughput_total_mbps")
                    .unwrap()
            })
            .collect()
    };
    let flatness = |v: &[f64]| -> f64 {
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (max - min) / mean
    };
    let flow = flatness(&totals(FLOW_CONTROLLED));
    let base = flatness(&totals(BASELINE_3GPP));
    // The good-channel score for priority-1/2 users never exceeds the
    // decision threshold, so the all-high-priority case is bounded by the
    // macro cell alone while mixed cases run both RATs; see
    // docs/acceptance-notes.md for why this bound cannot be met together
    // with criterion 5.
    report(
        6,
        "load-balancing flatness",
        flow <= 0.2 && base > 0.2,
        &format!("flow {flow:.3} (need <= 0.2), baseline {base:.3} (need > 0.2)"),
    );
}

// --- criterion 7: uplink decoupling trends ----------------------------------

#[test]
fn c07_uplink_decoupling() {
    let start = Instant::now();
    let cfg = SimConfig::default();
    let batch = run_batch(
        &cfg,
        &[ScenarioKind::UplinkDecoupling],
        &POLICIES,
        &acceptance_seeds(),
    )
    .expect("uplink batch");
    let label = ScenarioKind::UplinkDecoupling.label();
    let m = |p: &str, k: &str| batch.mean_metric(label, p, k).unwrap();
    // Wi-Fi comparison on the downlink component: both policies offer the
    // same downlink load to Wi-Fi, so the delivered difference isolates the
    // contention relief.
    let flow_wifi = m(FLOW_CONTROLLED, "throughput_wifi_dl_mbps");
    let base_wifi = m(BASELINE_3GPP, "throughput_wifi_dl_mbps");
    let flow_total = m(FLOW_CONTROLLED, "throughput_total_mbps");
    let base_total = m(BASELINE_3GPP, "throughput_total_mbps");
    let flow_delay = m(FLOW_CONTROLLED, "delay_overall_ms");
    let base_delay = m(BASELINE_3GPP, "delay_overall_ms");
    let elapsed = start.elapsed();
    let pass = flow_wifi > base_wifi
        && flow_total > base_total
        && flow_delay < base_delay
        && elapsed.as_secs_f64() < 300.0;
    report(
        7,
        "uplink decoupling",
        pass,
        &format!(
            "wifi-dl {flow_wifi:.1} vs {base_wifi:.1}, total {flow_total:.1} vs {base_total:.1}, delay {flow_delay:.1} vs {base_delay:.1} ms ({elapsed:?})"
        ),
    );
}

// --- criterion 8: offered-load sanity ---------------------------------------

#[test]
fn c08_offered_load_sanity() {
    let start = Instant::now();
    let cfg = SimConfig::default();
    let seeds: Vec<u64> = (1..=5).collect();
    // Highest priority under the scoring policy lands on the macro cell.
    let gnb = run_batch(&cfg, &[ScenarioKind::SingleUe(1)], &[FLOW_CONTROLLED], &seeds)
        .expect("gnb leg");
    // Lowest priority under the baseline lands on Wi-Fi.
    let wifi = run_batch(&cfg, &[ScenarioKind::SingleUe(4)], &[BASELINE_3GPP], &seeds)
        .expect("wifi leg");
    let gnb_tput = gnb
        .mean_metric("single-ue", FLOW_CONTROLLED, "throughput_gnb_mbps")
        .unwrap();
    let wifi_tput = wifi
        .mean_metric("single-ue", BASELINE_3GPP, "throughput_wifi_mbps")
        .unwrap();
    // Uncontended delivery must also be near-lossless per seed.
    let lossless = gnb.rows.iter().chain(wifi.rows.iter()).all(|r| {
        let delivered = r.metrics["delivered_packets"];
        let lost = r.metrics["loss_packets"];
        delivered / (delivered + lost) >= 0.99
    });
    let elapsed = start.elapsed();
    let pass = gnb_tput >= 0.95 * 4.0
        && wifi_tput >= 0.95 * 4.0
        && lossless
        && elapsed.as_secs_f64() < 30.0;
    report(
        8,
        "offered-load sanity",
        pass,
        &format!("gnb leg {gnb_tput:.3} Mbps, wifi leg {wifi_tput:.3} Mbps of 4.0 offered, lossless={lossless} ({elapsed:?})"),
    );
}

// --- criterion 9: end-to-end determinism ------------------------------------

#[test]
fn c09_determinism() {
    let start = Instant::now();
    let cfg = SimConfig::default();
    let run = || {
        let batch = run_batch(&cfg, &[ScenarioKind::Case(CaseId::C)], &POLICIES, &[7])
            .expect("case-c pipeline");
        let prov = Provenance::new(7, cfg.content_hash());
        raw_csv(&batch.rows, &prov).into_bytes()
    };
    let first = run();
    let second = run();
    let elapsed = start.elapsed();
    report(
        9,
        "determinism",
        first == second && elapsed.as_secs_f64() < 60.0,
        &format!("double execution produced byte-identical CSV ({} bytes, {elapsed:?})", first.len()),
    );
}

// --- criterion 10: contention fairness ---------------------------------------

#[test]
fn c10_dcf_fairness() {
    let start = Instant::now();
    let params = steersim_core::config::DcfConfig::default();
    let contenders: Vec<Contender<u32>> = (0..5)
        .map(|k| Contender {
            key: k,
            frame_bytes: 1060,
            phy_rate_mbps: 65.0,
        })
        .collect();
    let mut states = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let mut airtime: BTreeMap<u32, u64> = BTreeMap::new();
    let mut transmissions = 0u64;
    while transmissions < 100_000 {
        if let TxOutcome::Won { winner, airtime_us } =
            wifi_txop(&contenders, &mut states, &params, &mut rng)
        {
            *airtime.entry(winner).or_default() += airtime_us;
            transmissions += 1;
        }
    }
    let total: u64 = airtime.values().sum();
    let expected = total as f64 / 5.0;
    let worst = airtime
        .values()
        .map(|a| (*a as f64 - expected).abs() / expected)
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    report(
        10,
        "contention fairness",
        worst < 0.05 && elapsed.as_secs_f64() < 60.0,
        &format!("5 saturated stations, worst airtime deviation {:.2}% over {transmissions} transmissions ({elapsed:?})", worst * 100.0),
    );
}

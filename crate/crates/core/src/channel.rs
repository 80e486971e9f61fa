//! Radio channel model: urban macro / urban micro path loss, log-normal
//! shadowing, link budgets and good/bad channel classification.
//!
//! Path-loss formulas follow TR 38.901 (UMa for the NR macro link, UMi street
//! canyon for the Wi-Fi link). LOS state and shadowing are drawn once per link
//! per deployment and frozen; nothing here is resampled per packet.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::DomainError;

/// Thermal noise density in dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LosState {
    Los,
    Nlos,
}

/// Pathloss model family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLossModel {
    /// Urban macro, for the gNB link.
    Uma,
    /// Urban micro street canyon, for the AP link.
    Umi,
}

/// Good/bad channel classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelQuality {
    Good,
    Bad,
}

impl ChannelQuality {
    /// Numeric form used by the selection score (0 good, 1 bad).
    pub fn as_score_input(self) -> u8 {
        match self {
            ChannelQuality::Good => 0,
            ChannelQuality::Bad => 1,
        }
    }
}

/// Classification is a pure function of SNR; the boundary is inclusive-good.
pub fn classify_snr(snr_db: f64, threshold_db: f64) -> ChannelQuality {
    if snr_db >= threshold_db {
        ChannelQuality::Good
    } else {
        ChannelQuality::Bad
    }
}

/// One frozen link draw.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelSample {
    pub path_loss_db: f64,
    pub shadowing_db: f64,
    pub snr_db: f64,
    pub quality: ChannelQuality,
}

fn d3d(d2d_m: f64, h_tx_m: f64, h_rx_m: f64) -> f64 {
    (d2d_m * d2d_m + (h_tx_m - h_rx_m).powi(2)).sqrt()
}

/// UMa path loss in dB. Valid below the breakpoint distance, which for the
/// 1.9 GHz / 25 m configuration sits at 304 m, outside the 250 m cell.
pub fn pathloss_uma(
    d2d_m: f64,
    fc_ghz: f64,
    h_bs_m: f64,
    h_ut_m: f64,
    los: LosState,
) -> Result<f64, DomainError> {
    if d2d_m <= 0.0 {
        return Err(DomainError::NonPositiveDistance(d2d_m));
    }
    let d = d3d(d2d_m, h_bs_m, h_ut_m);
    let pl_los = 28.0 + 22.0 * d.log10() + 20.0 * fc_ghz.log10();
    Ok(match los {
        LosState::Los => pl_los,
        LosState::Nlos => {
            let pl_nlos =
                13.54 + 39.08 * d.log10() + 20.0 * fc_ghz.log10() - 0.6 * (h_ut_m - 1.5);
            pl_los.max(pl_nlos)
        }
    })
}

/// UMi street-canyon path loss in dB.
pub fn pathloss_umi(
    d2d_m: f64,
    fc_ghz: f64,
    h_bs_m: f64,
    h_ut_m: f64,
    los: LosState,
) -> Result<f64, DomainError> {
    if d2d_m <= 0.0 {
        return Err(DomainError::NonPositiveDistance(d2d_m));
    }
    let d = d3d(d2d_m, h_bs_m, h_ut_m);
    let pl_los = 32.4 + 21.0 * d.log10() + 20.0 * fc_ghz.log10();
    Ok(match los {
        LosState::Los => pl_los,
        LosState::Nlos => {
            let pl_nlos =
                22.4 + 35.3 * d.log10() + 21.3 * fc_ghz.log10() - 0.3 * (h_ut_m - 1.5);
            pl_los.max(pl_nlos)
        }
    })
}

/// LOS probability for outdoor users.
pub fn los_probability(model: PathLossModel, d2d_m: f64) -> f64 {
    if d2d_m <= 18.0 {
        return 1.0;
    }
    let decay = match model {
        PathLossModel::Uma => 63.0,
        PathLossModel::Umi => 36.0,
    };
    18.0 / d2d_m + (-d2d_m / decay).exp() * (1.0 - 18.0 / d2d_m)
}

/// Shadow-fading standard deviation in dB.
pub fn shadowing_sigma(model: PathLossModel, los: LosState) -> f64 {
    match (model, los) {
        (PathLossModel::Uma, LosState::Los) => 4.0,
        (PathLossModel::Uma, LosState::Nlos) => 6.0,
        (PathLossModel::Umi, LosState::Los) => 4.0,
        (PathLossModel::Umi, LosState::Nlos) => 7.82,
    }
}

/// Draw the frozen LOS state and shadowing for one link.
pub fn draw_link_state(
    model: PathLossModel,
    d2d_m: f64,
    rng: &mut impl Rng,
) -> (LosState, f64) {
    let p = los_probability(model, d2d_m);
    let los = if rng.gen::<f64>() < p {
        LosState::Los
    } else {
        LosState::Nlos
    };
    let sigma = shadowing_sigma(model, los);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    (los, normal.sample(rng))
}

/// Inputs to the link budget.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    /// Sum of both antenna gains.
    pub antenna_gain_dbi: f64,
    pub path_loss_db: f64,
    pub shadowing_db: f64,
    pub noise_figure_db: f64,
}

/// Close the link budget over the given bandwidth and classify the result.
pub fn compute_snr(
    budget: &LinkBudget,
    bandwidth_hz: f64,
    good_threshold_db: f64,
) -> Result<ChannelSample, DomainError> {
    if bandwidth_hz <= 0.0 {
        return Err(DomainError::NonPositiveBandwidth(bandwidth_hz));
    }
    let noise_dbm =
        THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + budget.noise_figure_db;
    let snr_db = budget.tx_power_dbm + budget.antenna_gain_dbi
        - budget.path_loss_db
        - budget.shadowing_db
        - noise_dbm;
    Ok(ChannelSample {
        path_loss_db: budget.path_loss_db,
        shadowing_db: budget.shadowing_db,
        snr_db,
        quality: classify_snr(snr_db, good_threshold_db),
    })
}

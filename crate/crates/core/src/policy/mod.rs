//! RAT-selection policies behind a common trait, registered by name and
//! selected at runtime.

pub mod baseline;
pub mod flow_controlled;
pub mod types;

use std::collections::BTreeMap;

use crate::config::SelectionConfig;
use crate::topology::UeId;

use types::{LoadThresholds, Rat, RatLoadState, SelectionWeights, UeSelectionInput};

/// Knobs shared by every policy instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionParams {
    pub weights: SelectionWeights,
    pub t_prime: f64,
    pub gnb_capacity_users: u32,
    pub wifi_capacity_users: u32,
    pub thresholds: LoadThresholds,
}

impl From<&SelectionConfig> for SelectionParams {
    fn from(c: &SelectionConfig) -> Self {
        Self {
            weights: SelectionWeights {
                alpha: c.alpha,
                beta: c.beta,
                gamma: c.gamma,
                delta: c.delta,
            },
            t_prime: c.t_prime,
            gnb_capacity_users: c.gnb_capacity_users,
            wifi_capacity_users: c.wifi_capacity_users,
            thresholds: LoadThresholds {
                low_ratio: c.load_low_ratio,
                high_ratio: c.load_high_ratio,
            },
        }
    }
}

/// A RAT-selection strategy. Implementations must be pure with respect to
/// their inputs: identical inputs give identical assignments.
pub trait RatSelectionPolicy: Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;

    /// Decide downlink RATs. UEs are processed in the order given; the
    /// returned state reflects consumed capacities.
    fn downlink(
        &self,
        ues: &[UeSelectionInput],
        state: RatLoadState,
    ) -> (BTreeMap<UeId, Rat>, RatLoadState);

    /// Decide uplink RATs, given an initial uplink assignment (by
    /// convention the downlink one: the two start coupled).
    fn uplink(
        &self,
        ues: &[UeSelectionInput],
        initial_uplink: &BTreeMap<UeId, Rat>,
    ) -> BTreeMap<UeId, Rat>;
}

/// Threshold-scoring policy driven by RAN-level state.
pub struct FlowControlledPolicy {
    pub params: SelectionParams,
}

impl RatSelectionPolicy for FlowControlledPolicy {
    fn name(&self) -> &'static str {
        FLOW_CONTROLLED
    }

    fn downlink(
        &self,
        ues: &[UeSelectionInput],
        state: RatLoadState,
    ) -> (BTreeMap<UeId, Rat>, RatLoadState) {
        flow_controlled::select_downlink(ues, state, &self.params.weights, self.params.t_prime)
    }

    fn uplink(
        &self,
        ues: &[UeSelectionInput],
        initial_uplink: &BTreeMap<UeId, Rat>,
    ) -> BTreeMap<UeId, Rat> {
        flow_controlled::select_uplink(
            ues,
            initial_uplink,
            self.params.gnb_capacity_users,
            self.params.wifi_capacity_users,
        )
    }
}

/// Priority-only baseline with coupled uplink.
pub struct BaselinePolicy;

impl RatSelectionPolicy for BaselinePolicy {
    fn name(&self) -> &'static str {
        BASELINE_3GPP
    }

    fn downlink(
        &self,
        ues: &[UeSelectionInput],
        state: RatLoadState,
    ) -> (BTreeMap<UeId, Rat>, RatLoadState) {
        (baseline::baseline_downlink(ues), state)
    }

    fn uplink(
        &self,
        _ues: &[UeSelectionInput],
        initial_uplink: &BTreeMap<UeId, Rat>,
    ) -> BTreeMap<UeId, Rat> {
        baseline::baseline_uplink(initial_uplink)
    }
}

pub const FLOW_CONTROLLED: &str = "flow-controlled";
pub const BASELINE_3GPP: &str = "baseline-3gpp";

/// Registered policy names, in presentation order.
pub fn available_policies() -> &'static [&'static str] {
    &[FLOW_CONTROLLED, BASELINE_3GPP]
}

/// Instantiate a policy by registry name.
pub fn create_policy(name: &str, params: &SelectionParams) -> Option<Box<dyn RatSelectionPolicy>> {
    match name {
        FLOW_CONTROLLED => Some(Box::new(FlowControlledPolicy {
            params: params.clone(),
        })),
        BASELINE_3GPP => Some(Box::new(BaselinePolicy)),
        _ => None,
    }
}

//! Deterministic discrete-event simulator of a unified multi-RAT access
//! network: an NR macro cell plus Wi-Fi APs whose UEs and network node are
//! modeled as match-action flow switches under a centralized controller,
//! with pluggable RAT-selection policies.

pub mod channel;
pub mod config;
pub mod control;
pub mod engine;
pub mod error;
pub mod mac;
pub mod metrics;
pub mod policy;
pub mod topology;
pub mod traffic;

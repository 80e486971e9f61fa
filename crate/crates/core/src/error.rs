use thiserror::Error;

/// Errors produced when validating a simulation configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("failed to read config file: {0}")]
    Io(#[from] std::io::Error),
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Errors for operations given arguments outside their stated domain.
#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("load level must be in 1..=3, got {0}")]
    LoadLevelOutOfRange(u8),
    #[error("channel class must be 0 (good) or 1 (bad), got {0}")]
    ChannelClassOutOfRange(u8),
    #[error("service priority must be in 1..=4, got {0}")]
    ServicePriorityOutOfRange(u8),
}

/// Errors raised by flow switches and the controller.
#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("switch {switch}: unknown port {port}")]
    UnknownPort { switch: String, port: u32 },
    #[error("switch {switch}: {kind} binding {binding:#x} already exists")]
    DuplicateBinding {
        switch: String,
        kind: &'static str,
        binding: u64,
    },
    #[error("ue {0}: admission denied")]
    AdmissionDenied(u32),
    #[error("ue {0}: initial connection not established")]
    NotConnected(u32),
    #[error("ue {ue}: no {rat} leg available")]
    RatUnavailable { ue: u32, rat: &'static str },
    #[error("ue {0}: session already established")]
    SessionExists(u32),
}

//! Declarative sequence templates for the call flows, and a checker that
//! validates recorded traces against them.

use thiserror::Error;

use crate::policy::types::Rat;
use crate::topology::UeId;

use super::trace::{self, Actor, CallFlowTrace};

/// One expected step of a call flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedEvent {
    pub name: &'static str,
    pub sender: Actor,
    pub receiver: Actor,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConformanceError {
    #[error("trace has {got} events, template expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("step {index}: expected {expected}, found {found}")]
    StepMismatch {
        index: usize,
        expected: String,
        found: String,
    },
}

/// Validate a trace against a template: same length, and each step matching
/// on (event, sender, receiver).
pub fn check(trace: &CallFlowTrace, template: &[ExpectedEvent]) -> Result<(), ConformanceError> {
    if trace.len() != template.len() {
        return Err(ConformanceError::LengthMismatch {
            expected: template.len(),
            got: trace.len(),
        });
    }
    for (i, (ev, want)) in trace.events().iter().zip(template.iter()).enumerate() {
        if ev.event != want.name || ev.sender != want.sender || ev.receiver != want.receiver {
            return Err(ConformanceError::StepMismatch {
                index: i,
                expected: format!("{} {}->{}", want.name, want.sender, want.receiver),
                found: format!("{} {}->{}", ev.event, ev.sender, ev.receiver),
            });
        }
    }
    Ok(())
}

fn step(name: &'static str, sender: Actor, receiver: Actor) -> ExpectedEvent {
    ExpectedEvent {
        name,
        sender,
        receiver,
    }
}

/// Initial connection setup, admitted UE: the eleven-step sequence ending in
/// the controller handshake.
pub fn initial_connection(ue: UeId) -> Vec<ExpectedEvent> {
    let u = Actor::Ue(ue);
    vec![
        step(trace::RRC_SETUP_REQUEST, u, Actor::Mrn),
        step(trace::ADMISSION_NOTIFICATION, Actor::Mrn, Actor::Controller),
        step(trace::PORT_CREATE, Actor::Controller, Actor::Mrn),
        step(trace::RRC_SETUP, Actor::Mrn, u),
        step(trace::RRC_SETUP_COMPLETE, u, Actor::Mrn),
        step(trace::PACKET_IN, Actor::Mrn, Actor::Controller),
        step(trace::FLOW_MOD_ADD, Actor::Controller, Actor::Mrn),
        step(trace::PORT_CREATE, Actor::Controller, Actor::Mrn),
        step(trace::RRC_RECONFIGURATION, Actor::Mrn, u),
        step(trace::PORT_CREATE, Actor::Controller, u),
        step(trace::HELLO, u, Actor::Controller),
    ]
}

/// Initial connection with admission denied: request and the rejecting
/// notification, nothing else.
pub fn initial_connection_rejected(ue: UeId) -> Vec<ExpectedEvent> {
    vec![
        step(trace::RRC_SETUP_REQUEST, Actor::Ue(ue), Actor::Mrn),
        step(trace::ADMISSION_NOTIFICATION, Actor::Mrn, Actor::Controller),
    ]
}

/// Proactive registration path installation plus the registration exchange.
pub fn registration(ue: UeId) -> Vec<ExpectedEvent> {
    let u = Actor::Ue(ue);
    vec![
        step(trace::PORT_CREATE, Actor::Controller, Actor::Mrn),
        step(trace::NGAP_ASSOCIATION_CREATED, Actor::Mrn, Actor::Controller),
        step(trace::FLOW_MOD_ADD, Actor::Controller, Actor::Mrn),
        step(trace::FLOW_MOD_ADD, Actor::Controller, Actor::Mrn),
        step(trace::NAS_UPLINK, u, Actor::Amf),
        step(trace::NAS_FORWARD, Actor::Amf, u),
    ]
}

/// Session establishment over the chosen radio leg (proactive NAS path).
pub fn pdu_session(ue: UeId, leg: Rat) -> Vec<ExpectedEvent> {
    let u = Actor::Ue(ue);
    let mut t = vec![
        step(trace::NAS_UPLINK, u, Actor::Amf),
        step(trace::NGAP_SESSION_SETUP, Actor::Amf, Actor::Mrn),
        step(trace::NAS_FORWARD, Actor::Mrn, u),
        step(trace::PACKET_IN, Actor::Mrn, Actor::Controller),
        step(trace::PORT_CREATE, Actor::Controller, Actor::Mrn),
    ];
    match leg {
        Rat::Gnb => {
            t.push(step(trace::RRC_RECONFIGURATION, Actor::Mrn, u));
            t.push(step(trace::RRC_RECONFIGURATION_COMPLETE, u, Actor::Mrn));
        }
        Rat::Wifi => {
            t.push(step(trace::WIFI_PORT_CONFIGURED, Actor::Mrn, u));
        }
    }
    t.extend([
        step(trace::PORT_CREATE, Actor::Controller, Actor::Mrn),
        step(trace::GTP_TUNNEL_CREATED, Actor::Mrn, Actor::Controller),
        step(trace::FLOW_MOD_ADD, Actor::Controller, Actor::Mrn),
        step(trace::FLOW_MOD_ADD, Actor::Controller, Actor::Mrn),
        step(trace::PORT_CREATE, Actor::Controller, u),
        step(trace::FLOW_MOD_ADD, Actor::Controller, u),
    ]);
    t
}

/// Direct Internet attachment, with or without a dedicated bearer.
pub fn direct_internet(ue: UeId, dedicated_drb: bool) -> Vec<ExpectedEvent> {
    let u = Actor::Ue(ue);
    let mut t = vec![
        step(trace::UE_PACKET_OUT, u, u),
        step(trace::PACKET_IN, u, Actor::Controller),
    ];
    if dedicated_drb {
        t.extend([
            step(trace::PORT_CREATE, Actor::Controller, Actor::Mrn),
            step(trace::RRC_RECONFIGURATION, Actor::Mrn, u),
            step(trace::RRC_RECONFIGURATION_COMPLETE, u, Actor::Mrn),
            step(trace::PORT_CREATE, Actor::Controller, u),
        ]);
    }
    t.extend([
        step(trace::FLOW_MOD_ADD, Actor::Controller, u),
        step(trace::FLOW_MOD_ADD, Actor::Controller, Actor::Mrn),
    ]);
    t
}

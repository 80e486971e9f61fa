//! Call-flow traces: append-only, time-ordered event logs produced by the
//! control-plane procedures, exportable as newline-delimited records.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;

use crate::topology::UeId;

/// Entities that appear as senders/receivers in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Actor {
    Ue(UeId),
    Mrn,
    Controller,
    Amf,
}

impl std::fmt::Display for Actor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Actor::Ue(u) => write!(f, "{u}"),
            Actor::Mrn => write!(f, "mrn"),
            Actor::Controller => write!(f, "controller"),
            Actor::Amf => write!(f, "amf"),
        }
    }
}

// Event names shared by emitters, templates and tests.
pub const RRC_SETUP_REQUEST: &str = "rrc-setup-request";
pub const ADMISSION_NOTIFICATION: &str = "admission-notification";
pub const PORT_CREATE: &str = "port-create";
pub const RRC_SETUP: &str = "rrc-setup";
pub const RRC_SETUP_COMPLETE: &str = "rrc-setup-complete";
pub const PACKET_IN: &str = "packet-in";
pub const FLOW_MOD_ADD: &str = "flow-mod-add";
pub const RRC_RECONFIGURATION: &str = "rrc-reconfiguration";
pub const RRC_RECONFIGURATION_COMPLETE: &str = "rrc-reconfiguration-complete";
pub const HELLO: &str = "hello";
pub const NAS_UPLINK: &str = "nas-uplink";
pub const NAS_FORWARD: &str = "nas-forward";
pub const NGAP_SESSION_SETUP: &str = "ngap-session-setup";
pub const NGAP_ASSOCIATION_CREATED: &str = "ngap-association-created";
pub const GTP_TUNNEL_CREATED: &str = "gtp-tunnel-created";
pub const WIFI_PORT_CONFIGURED: &str = "wifi-port-configured";
pub const UE_PACKET_OUT: &str = "ue-packet-out";

/// One trace record.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEvent {
    pub time_us: u64,
    pub event: &'static str,
    pub sender: Actor,
    pub receiver: Actor,
    pub ue: Option<UeId>,
    pub detail: String,
}

/// Append-only event log; pushes must be in event-time order.
#[derive(Debug, Clone, Default)]
pub struct CallFlowTrace {
    events: Vec<TraceEvent>,
}

impl CallFlowTrace {
    pub fn push(&mut self, ev: TraceEvent) {
        if let Some(last) = self.events.last() {
            assert!(
                ev.time_us >= last.time_us,
                "trace must stay in event-time order"
            );
        }
        self.events.push(ev);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count_named(&self, name: &str) -> usize {
        self.events.iter().filter(|e| e.event == name).count()
    }

    pub fn extend(&mut self, other: CallFlowTrace) {
        for ev in other.events {
            self.push(ev);
        }
    }

    /// Newline-delimited JSON records (event, time_us, sender, receiver, ue).
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for ev in &self.events {
            #[derive(Serialize)]
            struct Row<'a> {
                event: &'a str,
                time_us: u64,
                sender: String,
                receiver: String,
                ue_id: Option<u32>,
            }
            let row = Row {
                event: ev.event,
                time_us: ev.time_us,
                sender: ev.sender.to_string(),
                receiver: ev.receiver.to_string(),
                ue_id: ev.ue.map(|u| u.0),
            };
            out.push_str(&serde_json::to_string(&row).expect("serializable row"));
            out.push('\n');
        }
        out
    }
}

/// Opaque NAS payload with a taint flag: any content access marks the blob
/// as inspected. Switches forward blobs without ever touching the content.
#[derive(Debug)]
pub struct NasBlob {
    data: Vec<u8>,
    inspected: AtomicBool,
}

impl NasBlob {
    pub fn new(data: Vec<u8>) -> Self {
        Self {
            data,
            inspected: AtomicBool::new(false),
        }
    }

    /// Content access; sets the taint flag.
    pub fn payload(&self) -> &[u8] {
        self.inspected.store(true, Ordering::Relaxed);
        &self.data
    }

    /// Size is routing metadata, not content.
    pub fn len_bytes(&self) -> usize {
        self.data.len()
    }

    pub fn was_inspected(&self) -> bool {
        self.inspected.load(Ordering::Relaxed)
    }
}

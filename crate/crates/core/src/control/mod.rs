//! Control plane: flow switches, the centralized controller, call-flow
//! traces and their conformance templates.

pub mod conformance;
pub mod controller;
pub mod switch;
pub mod trace;

pub use controller::{ControlPlane, ControllerMsg, SessionCtx};
pub use switch::{
    FlowAction, FlowEntry, FlowMatch, FlowSwitch, LogicalPort, PacketMeta, PortId, PortKind,
    SessionId, SwitchId,
};
pub use trace::{Actor, CallFlowTrace, NasBlob, TraceEvent};

//! Match–action flow switch with logical ports.
//!
//! Ports virtualize radio bearers, the per-UE core association, user-plane
//! tunnels and local IP endpoints; flow entries map between them. Matching is
//! bearer-level: (in_port, ue, session).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::ControlError;
use crate::policy::types::Rat;
use crate::topology::UeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PortId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SessionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PortKind {
    Srb,
    Drb,
    NgapAssoc,
    GtpTunnel,
    IpLocal,
    PhysNr,
    PhysWifi,
}

impl PortKind {
    pub fn label(self) -> &'static str {
        match self {
            PortKind::Srb => "srb",
            PortKind::Drb => "drb",
            PortKind::NgapAssoc => "ngap-assoc",
            PortKind::GtpTunnel => "gtp-tunnel",
            PortKind::IpLocal => "ip-local",
            PortKind::PhysNr => "phys-nr",
            PortKind::PhysWifi => "phys-wifi",
        }
    }

    fn is_physical(self) -> bool {
        matches!(self, PortKind::PhysNr | PortKind::PhysWifi | PortKind::IpLocal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogicalPort {
    pub id: PortId,
    pub kind: PortKind,
    /// Bearer id, tunnel id or association id, scoped by kind.
    pub binding: Option<u64>,
    pub owner: Option<UeId>,
    /// Radio leg a bearer port rides on.
    pub carrier: Option<Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowMatch {
    pub in_port: PortId,
    pub ue: Option<UeId>,
    pub session: Option<SessionId>,
}

impl FlowMatch {
    pub fn on_port(in_port: PortId) -> Self {
        Self {
            in_port,
            ue: None,
            session: None,
        }
    }

    fn matches(&self, meta: &PacketMeta) -> bool {
        self.in_port == meta.in_port
            && self.ue.is_none_or(|u| Some(u) == meta.ue)
            && self.session.is_none_or(|s| Some(s) == meta.session)
    }
}

/// Metadata a packet presents to the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketMeta {
    pub in_port: PortId,
    pub ue: Option<UeId>,
    pub session: Option<SessionId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowAction {
    Forward(PortId),
    ToController,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEntry {
    pub matcher: FlowMatch,
    pub action: FlowAction,
    pub priority: i32,
    seq: u64,
}

impl FlowEntry {
    pub fn new(matcher: FlowMatch, action: FlowAction, priority: i32) -> Self {
        Self {
            matcher,
            action,
            priority,
            seq: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchId {
    Mrn,
    Ue(UeId),
}

impl std::fmt::Display for SwitchId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SwitchId::Mrn => write!(f, "mrn"),
            SwitchId::Ue(u) => write!(f, "{u}-switch"),
        }
    }
}

/// One match-action switch instance.
#[derive(Debug, Clone)]
pub struct FlowSwitch {
    pub id: SwitchId,
    ports: BTreeMap<PortId, LogicalPort>,
    table: Vec<FlowEntry>,
    next_port: u32,
    next_seq: u64,
}

impl FlowSwitch {
    /// Construct with the physical ports pre-created.
    pub fn new(id: SwitchId) -> Self {
        let mut sw = Self {
            id,
            ports: BTreeMap::new(),
            table: Vec::new(),
            next_port: 1,
            next_seq: 0,
        };
        for kind in [PortKind::PhysNr, PortKind::PhysWifi, PortKind::IpLocal] {
            let pid = sw.alloc_port_id();
            sw.ports.insert(
                pid,
                LogicalPort {
                    id: pid,
                    kind,
                    binding: None,
                    owner: None,
                    carrier: None,
                },
            );
        }
        sw
    }

    fn alloc_port_id(&mut self) -> PortId {
        let id = PortId(self.next_port);
        self.next_port += 1;
        id
    }

    pub fn port(&self, id: PortId) -> Option<&LogicalPort> {
        self.ports.get(&id)
    }

    pub fn ports(&self) -> impl Iterator<Item = &LogicalPort> {
        self.ports.values()
    }

    pub fn phys_port(&self, kind: PortKind) -> PortId {
        self.ports
            .values()
            .find(|p| p.kind == kind && p.binding.is_none())
            .map(|p| p.id)
            .expect("physical ports exist from construction")
    }

    pub fn find_port(&self, kind: PortKind, owner: Option<UeId>, binding: u64) -> Option<&LogicalPort> {
        self.ports
            .values()
            .find(|p| p.kind == kind && p.owner == owner && p.binding == Some(binding))
    }

    /// Create a logical port. Bearer bindings are unique per (UE, kind);
    /// tunnel and association bindings are unique switch-wide.
    pub fn create_port(
        &mut self,
        kind: PortKind,
        owner: Option<UeId>,
        binding: u64,
        carrier: Option<Rat>,
    ) -> Result<PortId, ControlError> {
        if kind.is_physical() {
            // Physical ports exist from construction and are never added.
            return Err(ControlError::DuplicateBinding {
                switch: self.id.to_string(),
                kind: kind.label(),
                binding,
            });
        }
        let clash = match kind {
            PortKind::Srb | PortKind::Drb => self
                .ports
                .values()
                .any(|p| p.kind == kind && p.owner == owner && p.binding == Some(binding) && p.carrier == carrier),
            _ => self
                .ports
                .values()
                .any(|p| p.kind == kind && p.binding == Some(binding)),
        };
        if clash {
            return Err(ControlError::DuplicateBinding {
                switch: self.id.to_string(),
                kind: kind.label(),
                binding,
            });
        }
        let id = self.alloc_port_id();
        self.ports.insert(
            id,
            LogicalPort {
                id,
                kind,
                binding: Some(binding),
                owner,
                carrier,
            },
        );
        Ok(id)
    }

    /// Install a flow entry. Entries referencing unknown ports are rejected;
    /// an entry with an identical match and priority replaces the old one.
    pub fn install_flow(&mut self, mut entry: FlowEntry) -> Result<(), ControlError> {
        let mut referenced = vec![entry.matcher.in_port];
        if let FlowAction::Forward(out) = entry.action {
            referenced.push(out);
        }
        for port in referenced {
            if !self.ports.contains_key(&port) {
                return Err(ControlError::UnknownPort {
                    switch: self.id.to_string(),
                    port: port.0,
                });
            }
        }
        if let Some(existing) = self
            .table
            .iter_mut()
            .find(|e| e.matcher == entry.matcher && e.priority == entry.priority)
        {
            existing.action = entry.action;
            return Ok(());
        }
        entry.seq = self.next_seq;
        self.next_seq += 1;
        self.table.push(entry);
        Ok(())
    }

    /// Remove entries with this exact match, returning how many went away.
    pub fn remove_flows(&mut self, matcher: &FlowMatch) -> usize {
        let before = self.table.len();
        self.table.retain(|e| e.matcher != *matcher);
        before - self.table.len()
    }

    pub fn flow_entries(&self) -> &[FlowEntry] {
        &self.table
    }

    /// Apply the highest-priority matching entry (ties broken by insertion
    /// order); a table miss goes to the controller.
    pub fn match_packet(&self, meta: &PacketMeta) -> FlowAction {
        self.table
            .iter()
            .filter(|e| e.matcher.matches(meta))
            .max_by(|a, b| a.priority.cmp(&b.priority).then(b.seq.cmp(&a.seq)))
            .map(|e| e.action)
            .unwrap_or(FlowAction::ToController)
    }
}

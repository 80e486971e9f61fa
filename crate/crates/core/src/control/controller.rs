//! Centralized flow controller, the switches it manages, and the call-flow
//! procedures: initial connection, registration, session setup, uplink path
//! installation and the direct-Internet path.
//!
//! The controller and the network-side switch exchange messages over an
//! in-process ordered channel; UE-side control messages conceptually ride the
//! radio. Procedures run on a logical clock (one tick per event) with the
//! core answering after its configured latency; data-plane time only starts
//! once setup is done.

use std::collections::BTreeMap;

use crate::error::ControlError;
use crate::policy::types::Rat;
use crate::topology::UeId;

use super::switch::{
    FlowAction, FlowEntry, FlowMatch, FlowSwitch, PacketMeta, PortId, PortKind, SessionId,
    SwitchId,
};
use super::trace::{self, Actor, CallFlowTrace, NasBlob, TraceEvent};

/// Messages exchanged between switches and the controller.
#[derive(Debug)]
pub enum ControllerMsg {
    PacketIn {
        switch: SwitchId,
        in_port: Option<PortId>,
        summary: String,
    },
    FlowModAdd {
        switch: SwitchId,
        entry: FlowEntry,
    },
    PortCreate {
        switch: SwitchId,
        kind: PortKind,
        binding: u64,
        ue: Option<UeId>,
    },
    PortCreated {
        port: PortId,
    },
    Notification {
        event: String,
    },
    Hello,
}

/// Per-session control state.
#[derive(Debug, Clone)]
pub struct SessionCtx {
    pub session: SessionId,
    pub teid: u64,
    pub dl_rat: Rat,
    pub ul_rat: Rat,
    pub gtp_port: PortId,
    pub mrn_dl_drb: PortId,
    pub ue_dl_port: PortId,
    pub mrn_ul_in: PortId,
    pub ue_ul_entry: Option<FlowMatch>,
    pub mrn_ul_entry: FlowMatch,
}

#[derive(Debug, Clone, Default)]
struct UeCtx {
    has_wifi: bool,
    established: bool,
    nas_path_installed: bool,
    next_bearer: u64,
    srb1_mrn: Option<PortId>,
    ctrl_drb_mrn: Option<PortId>,
    ngap_port: Option<PortId>,
    sessions: Vec<SessionCtx>,
}

/// The control plane: one network-side switch, one switch per UE, and the
/// controller state machine.
pub struct ControlPlane {
    pub mrn: FlowSwitch,
    ue_switches: BTreeMap<UeId, FlowSwitch>,
    ue_ctx: BTreeMap<UeId, UeCtx>,
    admission: Box<dyn Fn(UeId) -> bool + Send + Sync>,
    clock_us: u64,
    next_teid: u64,
    next_session: u32,
    next_ngap_id: u64,
    cn_latency_us: u64,
    proactive_nas: bool,
    /// NAS blobs the black-box core received, for opacity checks.
    pub amf_received: Vec<NasBlob>,
}

impl ControlPlane {
    pub fn new(cn_latency_us: u64, proactive_nas: bool) -> Self {
        Self {
            mrn: FlowSwitch::new(SwitchId::Mrn),
            ue_switches: BTreeMap::new(),
            ue_ctx: BTreeMap::new(),
            admission: Box::new(|_| true),
            clock_us: 0,
            next_teid: 0x10,
            next_session: 1,
            next_ngap_id: 1,
            cn_latency_us,
            proactive_nas,
            amf_received: Vec::new(),
        }
    }

    pub fn set_admission(&mut self, cb: impl Fn(UeId) -> bool + Send + Sync + 'static) {
        self.admission = Box::new(cb);
    }

    pub fn add_ue(&mut self, ue: UeId, has_wifi: bool) {
        self.ue_switches.insert(ue, FlowSwitch::new(SwitchId::Ue(ue)));
        self.ue_ctx.insert(
            ue,
            UeCtx {
                has_wifi,
                next_bearer: 1,
                ..UeCtx::default()
            },
        );
    }

    pub fn ue_switch(&self, ue: UeId) -> Option<&FlowSwitch> {
        self.ue_switches.get(&ue)
    }

    pub fn is_established(&self, ue: UeId) -> bool {
        self.ue_ctx.get(&ue).map(|c| c.established).unwrap_or(false)
    }

    pub fn sessions(&self, ue: UeId) -> &[SessionCtx] {
        self.ue_ctx
            .get(&ue)
            .map(|c| c.sessions.as_slice())
            .unwrap_or(&[])
    }

    pub fn ngap_port_count(&self, ue: UeId) -> usize {
        self.mrn
            .ports()
            .filter(|p| p.kind == PortKind::NgapAssoc && p.owner == Some(ue))
            .count()
    }

    fn emit(
        &mut self,
        trace: &mut CallFlowTrace,
        event: &'static str,
        sender: Actor,
        receiver: Actor,
        ue: Option<UeId>,
        detail: impl Into<String>,
    ) {
        self.clock_us += 1;
        trace.push(TraceEvent {
            time_us: self.clock_us,
            event,
            sender,
            receiver,
            ue,
            detail: detail.into(),
        });
    }

    fn ctx(&self, ue: UeId) -> Result<&UeCtx, ControlError> {
        self.ue_ctx.get(&ue).ok_or(ControlError::NotConnected(ue.0))
    }

    fn ctx_mut(&mut self, ue: UeId) -> Result<&mut UeCtx, ControlError> {
        self.ue_ctx
            .get_mut(&ue)
            .ok_or(ControlError::NotConnected(ue.0))
    }

    fn alloc_bearer(&mut self, ue: UeId) -> u64 {
        let ctx = self.ue_ctx.get_mut(&ue).expect("ue exists");
        let id = ctx.next_bearer;
        ctx.next_bearer += 1;
        id
    }

    /// Create a logical port on a switch, emitting the port-create command
    /// and the interface-specific configuration events the port kind
    /// implies: RRC reconfiguration for an NR bearer, a tunnel event for a
    /// user-plane tunnel, an association event for the core association.
    pub fn create_logical_port(
        &mut self,
        switch: SwitchId,
        kind: PortKind,
        ue: UeId,
        binding: u64,
        carrier: Option<Rat>,
        trace: &mut CallFlowTrace,
    ) -> Result<PortId, ControlError> {
        let target_actor = match switch {
            SwitchId::Mrn => Actor::Mrn,
            SwitchId::Ue(u) => Actor::Ue(u),
        };
        self.emit(
            trace,
            trace::PORT_CREATE,
            Actor::Controller,
            target_actor,
            Some(ue),
            format!("{} binding {binding:#x}", kind.label()),
        );
        let port = self.create_port_raw(switch, kind, ue, binding, carrier)?;
        match (kind, carrier) {
            (PortKind::Drb, Some(Rat::Gnb)) => {
                self.emit(
                    trace,
                    trace::RRC_RECONFIGURATION,
                    Actor::Mrn,
                    Actor::Ue(ue),
                    Some(ue),
                    format!("configure drb {binding}"),
                );
                self.emit(
                    trace,
                    trace::RRC_RECONFIGURATION_COMPLETE,
                    Actor::Ue(ue),
                    Actor::Mrn,
                    Some(ue),
                    String::new(),
                );
            }
            (PortKind::Drb, Some(Rat::Wifi)) => {
                self.emit(
                    trace,
                    trace::WIFI_PORT_CONFIGURED,
                    target_actor,
                    Actor::Ue(ue),
                    Some(ue),
                    format!("transparent wifi port, bearer {binding}"),
                );
            }
            (PortKind::GtpTunnel, _) => {
                self.emit(
                    trace,
                    trace::GTP_TUNNEL_CREATED,
                    Actor::Mrn,
                    Actor::Controller,
                    Some(ue),
                    format!("teid {binding:#x}"),
                );
            }
            (PortKind::NgapAssoc, _) => {
                self.emit(
                    trace,
                    trace::NGAP_ASSOCIATION_CREATED,
                    Actor::Mrn,
                    Actor::Controller,
                    Some(ue),
                    format!("ran-ue id {binding}"),
                );
            }
            _ => {}
        }
        Ok(port)
    }

    fn create_port_raw(
        &mut self,
        switch: SwitchId,
        kind: PortKind,
        ue: UeId,
        binding: u64,
        carrier: Option<Rat>,
    ) -> Result<PortId, ControlError> {
        match switch {
            SwitchId::Mrn => self.mrn.create_port(kind, Some(ue), binding, carrier),
            SwitchId::Ue(u) => self
                .ue_switches
                .get_mut(&u)
                .ok_or(ControlError::NotConnected(u.0))?
                .create_port(kind, Some(ue), binding, carrier),
        }
    }

    fn install(
        &mut self,
        switch: SwitchId,
        entry: FlowEntry,
        trace: &mut CallFlowTrace,
        ue: UeId,
        detail: &str,
    ) -> Result<(), ControlError> {
        let target = match switch {
            SwitchId::Mrn => Actor::Mrn,
            SwitchId::Ue(u) => Actor::Ue(u),
        };
        self.emit(
            trace,
            trace::FLOW_MOD_ADD,
            Actor::Controller,
            target,
            Some(ue),
            detail.to_string(),
        );
        match switch {
            SwitchId::Mrn => self.mrn.install_flow(entry),
            SwitchId::Ue(u) => self
                .ue_switches
                .get_mut(&u)
                .ok_or(ControlError::NotConnected(u.0))?
                .install_flow(entry),
        }
    }

    /// Initial connection setup: radio attach, admission, control-channel
    /// bearer establishment and the first controller handshake.
    pub fn run_initial_connection(&mut self, ue: UeId) -> Result<CallFlowTrace, ControlError> {
        self.ctx(ue)?;
        let mut tr = CallFlowTrace::default();

        self.emit(
            &mut tr,
            trace::RRC_SETUP_REQUEST,
            Actor::Ue(ue),
            Actor::Mrn,
            Some(ue),
            "srb0 common channel",
        );
        let admitted = (self.admission)(ue);
        self.emit(
            &mut tr,
            trace::ADMISSION_NOTIFICATION,
            Actor::Mrn,
            Actor::Controller,
            Some(ue),
            if admitted { "admitted" } else { "rejected" }.to_string(),
        );
        if !admitted {
            return Ok(tr);
        }

        // SRB1 at the network side for dedicated signaling.
        self.emit(
            &mut tr,
            trace::PORT_CREATE,
            Actor::Controller,
            Actor::Mrn,
            Some(ue),
            "srb1",
        );
        let srb1 = self.create_port_raw(SwitchId::Mrn, PortKind::Srb, ue, 1, Some(Rat::Gnb))?;
        self.emit(&mut tr, trace::RRC_SETUP, Actor::Mrn, Actor::Ue(ue), Some(ue), String::new());

        // Attach completion carries an address request in the NAS field.
        let dhcp_request = NasBlob::new(vec![0x44, 0x48]);
        self.emit(
            &mut tr,
            trace::RRC_SETUP_COMPLETE,
            Actor::Ue(ue),
            Actor::Mrn,
            Some(ue),
            format!("nas dhcp request ({} bytes)", dhcp_request.len_bytes()),
        );
        // Table miss at the network switch raises a packet-in.
        self.emit(
            &mut tr,
            trace::PACKET_IN,
            Actor::Mrn,
            Actor::Controller,
            Some(ue),
            "table miss on srb1",
        );
        // The controller is the address-assignment endpoint, so reading the
        // payload here is legitimate; switches never did.
        let _ = dhcp_request.payload();

        let ue_switch_srb_in = srb1;
        self.emit(
            &mut tr,
            trace::FLOW_MOD_ADD,
            Actor::Controller,
            Actor::Mrn,
            Some(ue),
            "srb1 -> controller",
        );
        self.mrn.install_flow(FlowEntry::new(
            FlowMatch {
                in_port: ue_switch_srb_in,
                ue: Some(ue),
                session: None,
            },
            FlowAction::ToController,
            10,
        ))?;

        // Dedicated bearer for the UE-controller channel.
        let ctrl_bearer = self.alloc_bearer(ue);
        self.emit(
            &mut tr,
            trace::PORT_CREATE,
            Actor::Controller,
            Actor::Mrn,
            Some(ue),
            format!("control drb {ctrl_bearer}"),
        );
        let ctrl_drb =
            self.create_port_raw(SwitchId::Mrn, PortKind::Drb, ue, ctrl_bearer, Some(Rat::Gnb))?;
        self.emit(
            &mut tr,
            trace::RRC_RECONFIGURATION,
            Actor::Mrn,
            Actor::Ue(ue),
            Some(ue),
            "nas dhcp response",
        );
        self.emit(
            &mut tr,
            trace::PORT_CREATE,
            Actor::Controller,
            Actor::Ue(ue),
            Some(ue),
            "srb + control drb",
        );
        self.create_port_raw(SwitchId::Ue(ue), PortKind::Srb, ue, 1, Some(Rat::Gnb))?;
        self.create_port_raw(SwitchId::Ue(ue), PortKind::Drb, ue, ctrl_bearer, Some(Rat::Gnb))?;
        self.emit(
            &mut tr,
            trace::HELLO,
            Actor::Ue(ue),
            Actor::Controller,
            Some(ue),
            "of channel over control drb",
        );

        let ctx = self.ctx_mut(ue)?;
        ctx.established = true;
        ctx.srb1_mrn = Some(srb1);
        ctx.ctrl_drb_mrn = Some(ctrl_drb);
        Ok(tr)
    }

    /// Proactive registration: core association port, NAS forwarding
    /// entries, and the registration exchange itself.
    pub fn install_nas_path(&mut self, ue: UeId) -> Result<CallFlowTrace, ControlError> {
        let ctx = self.ctx(ue)?;
        if !ctx.established {
            return Err(ControlError::NotConnected(ue.0));
        }
        if ctx.nas_path_installed {
            return Ok(CallFlowTrace::default());
        }
        let srb1 = ctx.srb1_mrn.expect("established implies srb1");
        let mut tr = CallFlowTrace::default();

        let ngap_id = self.next_ngap_id;
        self.next_ngap_id += 1;
        let ngap = self.create_logical_port(
            SwitchId::Mrn,
            PortKind::NgapAssoc,
            ue,
            ngap_id,
            None,
            &mut tr,
        )?;
        self.install(
            SwitchId::Mrn,
            FlowEntry::new(
                FlowMatch {
                    in_port: srb1,
                    ue: Some(ue),
                    session: None,
                },
                FlowAction::Forward(ngap),
                20,
            ),
            &mut tr,
            ue,
            "srb1 -> ngap (nas uplink)",
        )?;
        self.install(
            SwitchId::Mrn,
            FlowEntry::new(
                FlowMatch {
                    in_port: ngap,
                    ue: Some(ue),
                    session: None,
                },
                FlowAction::Forward(srb1),
                20,
            ),
            &mut tr,
            ue,
            "ngap -> srb1 (nas downlink)",
        )?;

        // Registration exchange rides the installed path untouched.
        let registration = NasBlob::new(vec![0x52, 0x45, 0x47]);
        self.emit(
            &mut tr,
            trace::NAS_UPLINK,
            Actor::Ue(ue),
            Actor::Amf,
            Some(ue),
            "registration request (opaque nas)",
        );
        self.forward_nas_uplink(ue, registration)?;
        self.clock_us += self.cn_latency_us;
        self.emit(
            &mut tr,
            trace::NAS_FORWARD,
            Actor::Amf,
            Actor::Ue(ue),
            Some(ue),
            "registration accept (opaque nas)",
        );

        self.ctx_mut(ue)?.ngap_port = Some(ngap);
        self.ctx_mut(ue)?.nas_path_installed = true;
        Ok(tr)
    }

    /// Route a NAS blob through the network switch to the core without
    /// looking at it: the pipeline only consults port metadata.
    fn forward_nas_uplink(&mut self, ue: UeId, blob: NasBlob) -> Result<(), ControlError> {
        let srb1 = self.ctx(ue)?.srb1_mrn.expect("established");
        let action = self.mrn.match_packet(&PacketMeta {
            in_port: srb1,
            ue: Some(ue),
            session: None,
        });
        match action {
            FlowAction::Forward(port)
                if self.mrn.port(port).map(|p| p.kind) == Some(PortKind::NgapAssoc) =>
            {
                self.amf_received.push(blob);
                Ok(())
            }
            _ => Err(ControlError::NotConnected(ue.0)),
        }
    }

    /// Session establishment: NAS request to the core, session answer, radio
    /// and tunnel ports, and the mappings that stitch the user plane.
    pub fn run_pdu_session_setup(
        &mut self,
        ue: UeId,
        dl_rat: Rat,
    ) -> Result<(SessionId, CallFlowTrace), ControlError> {
        let ctx = self.ctx(ue)?;
        if !ctx.established {
            return Err(ControlError::NotConnected(ue.0));
        }
        if dl_rat == Rat::Wifi && !ctx.has_wifi {
            return Err(ControlError::RatUnavailable {
                ue: ue.0,
                rat: "wifi",
            });
        }
        let reactive_install = !ctx.nas_path_installed;
        if reactive_install && self.proactive_nas {
            // Proactive mode requires the path before any NAS traffic.
            return Err(ControlError::NotConnected(ue.0));
        }

        let mut tr = CallFlowTrace::default();
        let session = SessionId(self.next_session);
        self.next_session += 1;

        let request = NasBlob::new(vec![0x50, 0x44, 0x55]);
        self.emit(
            &mut tr,
            trace::NAS_UPLINK,
            Actor::Ue(ue),
            Actor::Amf,
            Some(ue),
            "pdu session establishment request (opaque nas)",
        );
        if reactive_install {
            // Table miss on the first NAS message; install on demand.
            self.emit(
                &mut tr,
                trace::PACKET_IN,
                Actor::Mrn,
                Actor::Controller,
                Some(ue),
                "nas table miss",
            );
            let srb1 = self.ctx(ue)?.srb1_mrn.expect("established");
            let ngap_id = self.next_ngap_id;
            self.next_ngap_id += 1;
            let ngap = self.create_logical_port(
                SwitchId::Mrn,
                PortKind::NgapAssoc,
                ue,
                ngap_id,
                None,
                &mut tr,
            )?;
            self.install(
                SwitchId::Mrn,
                FlowEntry::new(
                    FlowMatch {
                        in_port: srb1,
                        ue: Some(ue),
                        session: None,
                    },
                    FlowAction::Forward(ngap),
                    20,
                ),
                &mut tr,
                ue,
                "srb1 -> ngap (reactive)",
            )?;
            self.install(
                SwitchId::Mrn,
                FlowEntry::new(
                    FlowMatch {
                        in_port: ngap,
                        ue: Some(ue),
                        session: None,
                    },
                    FlowAction::Forward(srb1),
                    20,
                ),
                &mut tr,
                ue,
                "ngap -> srb1 (reactive)",
            )?;
            let c = self.ctx_mut(ue)?;
            c.ngap_port = Some(ngap);
            c.nas_path_installed = true;
        }
        self.forward_nas_uplink(ue, request)?;

        // Core answers with tunnel endpoint and QoS stub after its latency.
        let teid = self.next_teid;
        self.next_teid += 1;
        self.clock_us += self.cn_latency_us;
        self.emit(
            &mut tr,
            trace::NGAP_SESSION_SETUP,
            Actor::Amf,
            Actor::Mrn,
            Some(ue),
            format!("session resource setup, teid {teid:#x}, qos stub"),
        );
        // The bundled NAS accept passes through transparently; the session
        // resource part raises a packet-in for the controller.
        self.emit(
            &mut tr,
            trace::NAS_FORWARD,
            Actor::Mrn,
            Actor::Ue(ue),
            Some(ue),
            "pdu session establishment accept (opaque nas)",
        );
        self.emit(
            &mut tr,
            trace::PACKET_IN,
            Actor::Mrn,
            Actor::Controller,
            Some(ue),
            "ngap session event",
        );

        // Radio-leg bearer at the network switch (and its UE counterpart).
        let bearer = self.alloc_bearer(ue);
        let mrn_drb =
            self.create_logical_port(SwitchId::Mrn, PortKind::Drb, ue, bearer, Some(dl_rat), &mut tr)?;
        // Tunnel port toward the user plane.
        let gtp =
            self.create_logical_port(SwitchId::Mrn, PortKind::GtpTunnel, ue, teid, None, &mut tr)?;

        // Network-side mappings: tunnel to bearer (downlink) and bearer to
        // tunnel (uplink).
        self.install(
            SwitchId::Mrn,
            FlowEntry::new(
                FlowMatch {
                    in_port: gtp,
                    ue: Some(ue),
                    session: Some(session),
                },
                FlowAction::Forward(mrn_drb),
                30,
            ),
            &mut tr,
            ue,
            "gtp -> drb (dl)",
        )?;
        let mrn_ul_entry = FlowMatch {
            in_port: mrn_drb,
            ue: Some(ue),
            session: Some(session),
        };
        self.install(
            SwitchId::Mrn,
            FlowEntry::new(mrn_ul_entry, FlowAction::Forward(gtp), 30),
            &mut tr,
            ue,
            "drb -> gtp (ul)",
        )?;

        // UE side: bearer port mapped onto the local IP endpoint.
        self.emit(
            &mut tr,
            trace::PORT_CREATE,
            Actor::Controller,
            Actor::Ue(ue),
            Some(ue),
            format!("session drb {bearer}"),
        );
        let ue_port = self.create_port_raw(SwitchId::Ue(ue), PortKind::Drb, ue, bearer, Some(dl_rat))?;
        let ue_ip = self
            .ue_switches
            .get(&ue)
            .expect("ue exists")
            .phys_port(PortKind::IpLocal);
        self.install(
            SwitchId::Ue(ue),
            FlowEntry::new(
                FlowMatch {
                    in_port: ue_port,
                    ue: Some(ue),
                    session: Some(session),
                },
                FlowAction::Forward(ue_ip),
                30,
            ),
            &mut tr,
            ue,
            "drb -> ip (dl)",
        )?;

        self.ctx_mut(ue)?.sessions.push(SessionCtx {
            session,
            teid,
            dl_rat,
            ul_rat: dl_rat,
            gtp_port: gtp,
            mrn_dl_drb: mrn_drb,
            ue_dl_port: ue_port,
            mrn_ul_in: mrn_drb,
            ue_ul_entry: None,
            mrn_ul_entry,
        });
        Ok((session, tr))
    }

    /// Point the uplink of a session at `ul_rat`, creating the uplink bearer
    /// ports if the leg differs from the downlink one. The downlink mapping
    /// is never touched.
    pub fn install_uplink_path(
        &mut self,
        ue: UeId,
        session: SessionId,
        ul_rat: Rat,
    ) -> Result<CallFlowTrace, ControlError> {
        let ctx = self.ctx(ue)?;
        if ul_rat == Rat::Wifi && !ctx.has_wifi {
            return Err(ControlError::RatUnavailable {
                ue: ue.0,
                rat: "wifi",
            });
        }
        let sess = ctx
            .sessions
            .iter()
            .find(|s| s.session == session)
            .ok_or(ControlError::NotConnected(ue.0))?
            .clone();
        let mut tr = CallFlowTrace::default();

        let (mrn_in, ue_out) = if ul_rat == sess.dl_rat {
            (sess.mrn_dl_drb, sess.ue_dl_port)
        } else {
            let bearer = self.alloc_bearer(ue);
            let mrn_port = self.create_logical_port(
                SwitchId::Mrn,
                PortKind::Drb,
                ue,
                bearer,
                Some(ul_rat),
                &mut tr,
            )?;
            self.emit(
                &mut tr,
                trace::PORT_CREATE,
                Actor::Controller,
                Actor::Ue(ue),
                Some(ue),
                format!("uplink drb {bearer}"),
            );
            let ue_port =
                self.create_port_raw(SwitchId::Ue(ue), PortKind::Drb, ue, bearer, Some(ul_rat))?;
            (mrn_port, ue_port)
        };

        // Drop the previous uplink mapping if it pointed elsewhere.
        if sess.mrn_ul_in != mrn_in {
            self.mrn.remove_flows(&sess.mrn_ul_entry);
            let entry = FlowMatch {
                in_port: mrn_in,
                ue: Some(ue),
                session: Some(session),
            };
            self.install(
                SwitchId::Mrn,
                FlowEntry::new(entry, FlowAction::Forward(sess.gtp_port), 30),
                &mut tr,
                ue,
                "drb -> gtp (ul re-point)",
            )?;
            let s = self.session_mut(ue, session);
            s.mrn_ul_entry = entry;
        }

        let ue_ip = self
            .ue_switches
            .get(&ue)
            .expect("ue exists")
            .phys_port(PortKind::IpLocal);
        let ue_entry = FlowMatch {
            in_port: ue_ip,
            ue: Some(ue),
            session: Some(session),
        };
        if let Some(old) = self.session_mut(ue, session).ue_ul_entry.take() {
            self.ue_switches.get_mut(&ue).expect("ue exists").remove_flows(&old);
        }
        self.install(
            SwitchId::Ue(ue),
            FlowEntry::new(ue_entry, FlowAction::Forward(ue_out), 30),
            &mut tr,
            ue,
            "ip -> drb (ul)",
        )?;

        let s = self.session_mut(ue, session);
        s.ul_rat = ul_rat;
        s.mrn_ul_in = mrn_in;
        s.ue_ul_entry = Some(ue_entry);
        Ok(tr)
    }

    fn session_mut(&mut self, ue: UeId, session: SessionId) -> &mut SessionCtx {
        self.ue_ctx
            .get_mut(&ue)
            .expect("ue exists")
            .sessions
            .iter_mut()
            .find(|s| s.session == session)
            .expect("session exists")
    }

    /// Direct Internet path: local IP packet misses, the controller wires a
    /// bearer straight to the network-side IP port. No core involvement.
    pub fn run_direct_internet_setup(
        &mut self,
        ue: UeId,
        dedicated_drb: bool,
    ) -> Result<CallFlowTrace, ControlError> {
        let ctx = self.ctx(ue)?;
        if !ctx.established {
            return Err(ControlError::NotConnected(ue.0));
        }
        let ctrl_drb_mrn = ctx.ctrl_drb_mrn;
        let mut tr = CallFlowTrace::default();

        self.emit(
            &mut tr,
            trace::UE_PACKET_OUT,
            Actor::Ue(ue),
            Actor::Ue(ue),
            Some(ue),
            "ip packet, table miss",
        );
        self.emit(
            &mut tr,
            trace::PACKET_IN,
            Actor::Ue(ue),
            Actor::Controller,
            Some(ue),
            "table miss at ue switch",
        );

        let (mrn_in, ue_out) = if dedicated_drb {
            let bearer = self.alloc_bearer(ue);
            let mrn_drb = self.create_logical_port(
                SwitchId::Mrn,
                PortKind::Drb,
                ue,
                bearer,
                Some(Rat::Gnb),
                &mut tr,
            )?;
            self.emit(
                &mut tr,
                trace::PORT_CREATE,
                Actor::Controller,
                Actor::Ue(ue),
                Some(ue),
                format!("direct drb {bearer}"),
            );
            let ue_port =
                self.create_port_raw(SwitchId::Ue(ue), PortKind::Drb, ue, bearer, Some(Rat::Gnb))?;
            (mrn_drb, ue_port)
        } else {
            let ctrl = ctrl_drb_mrn.expect("established");
            let ue_ctrl = self
                .ue_switches
                .get(&ue)
                .expect("ue exists")
                .find_port(PortKind::Drb, Some(ue), 1)
                .expect("control drb exists")
                .id;
            (ctrl, ue_ctrl)
        };

        let ue_ip = self
            .ue_switches
            .get(&ue)
            .expect("ue exists")
            .phys_port(PortKind::IpLocal);
        self.install(
            SwitchId::Ue(ue),
            FlowEntry::new(
                FlowMatch {
                    in_port: ue_ip,
                    ue: Some(ue),
                    session: None,
                },
                FlowAction::Forward(ue_out),
                25,
            ),
            &mut tr,
            ue,
            "ip -> drb (direct ul)",
        )?;
        let mrn_ip = self.mrn.phys_port(PortKind::IpLocal);
        self.install(
            SwitchId::Mrn,
            FlowEntry::new(
                FlowMatch {
                    in_port: mrn_in,
                    ue: Some(ue),
                    session: None,
                },
                FlowAction::Forward(mrn_ip),
                25,
            ),
            &mut tr,
            ue,
            "drb -> local ip (direct)",
        )?;
        Ok(tr)
    }

    /// Downlink classification for one data packet: run it through the
    /// network switch and report which radio leg carries it.
    pub fn classify_downlink(&self, ue: UeId, session: SessionId) -> Option<Rat> {
        let sess = self
            .ue_ctx
            .get(&ue)?
            .sessions
            .iter()
            .find(|s| s.session == session)?;
        let action = self.mrn.match_packet(&PacketMeta {
            in_port: sess.gtp_port,
            ue: Some(ue),
            session: Some(session),
        });
        match action {
            FlowAction::Forward(port) => self.mrn.port(port).and_then(|p| p.carrier),
            _ => None,
        }
    }

    /// Uplink classification at the UE switch.
    pub fn classify_uplink(&self, ue: UeId, session: SessionId) -> Option<Rat> {
        let sw = self.ue_switches.get(&ue)?;
        let ip = sw.phys_port(PortKind::IpLocal);
        let action = sw.match_packet(&PacketMeta {
            in_port: ip,
            ue: Some(ue),
            session: Some(session),
        });
        match action {
            FlowAction::Forward(port) => sw.port(port).and_then(|p| p.carrier),
            _ => None,
        }
    }

    /// Deliver a downlink packet at the UE switch; true when the bearer maps
    /// to the local IP endpoint.
    pub fn deliver_downlink(&self, ue: UeId, session: SessionId) -> bool {
        let Some(sess) = self
            .ue_ctx
            .get(&ue)
            .and_then(|c| c.sessions.iter().find(|s| s.session == session))
        else {
            return false;
        };
        let Some(sw) = self.ue_switches.get(&ue) else {
            return false;
        };
        matches!(
            sw.match_packet(&PacketMeta {
                in_port: sess.ue_dl_port,
                ue: Some(ue),
                session: Some(session),
            }),
            FlowAction::Forward(p) if sw.port(p).map(|q| q.kind) == Some(PortKind::IpLocal)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> ControlPlane {
        let mut cp = ControlPlane::new(5000, true);
        cp.add_ue(UeId(1), true);
        cp.add_ue(UeId(2), false);
        cp
    }

    fn connect(cp: &mut ControlPlane, ue: UeId) {
        cp.run_initial_connection(ue).unwrap();
        cp.install_nas_path(ue).unwrap();
    }

    #[test]
    fn initial_connection_is_eleven_steps() {
        let mut cp = plane();
        let tr = cp.run_initial_connection(UeId(1)).unwrap();
        assert_eq!(tr.len(), 11);
        assert!(cp.is_established(UeId(1)));
    }

    #[test]
    fn admission_denied_stops_after_two_events() {
        let mut cp = plane();
        cp.set_admission(|_| false);
        let tr = cp.run_initial_connection(UeId(1)).unwrap();
        assert_eq!(tr.len(), 2);
        assert!(!cp.is_established(UeId(1)));
        // No ports beyond the physical ones.
        assert_eq!(cp.mrn.ports().count(), 3);
    }

    #[test]
    fn two_ues_get_disjoint_ports() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        connect(&mut cp, UeId(2));
        let ue1_ports: Vec<PortId> = cp
            .mrn
            .ports()
            .filter(|p| p.owner == Some(UeId(1)))
            .map(|p| p.id)
            .collect();
        let ue2_ports: Vec<PortId> = cp
            .mrn
            .ports()
            .filter(|p| p.owner == Some(UeId(2)))
            .map(|p| p.id)
            .collect();
        assert!(!ue1_ports.is_empty() && !ue2_ports.is_empty());
        assert!(ue1_ports.iter().all(|p| !ue2_ports.contains(p)));
    }

    #[test]
    fn pdu_session_wires_both_switches() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        let mrn_entries_before = cp.mrn.flow_entries().len();
        let (session, _tr) = cp.run_pdu_session_setup(UeId(1), Rat::Gnb).unwrap();
        assert_eq!(cp.mrn.flow_entries().len() - mrn_entries_before, 2);
        assert_eq!(cp.ue_switch(UeId(1)).unwrap().flow_entries().len(), 1);
        assert_eq!(cp.classify_downlink(UeId(1), session), Some(Rat::Gnb));
        assert!(cp.deliver_downlink(UeId(1), session));
    }

    #[test]
    fn wifi_leg_uses_the_wifi_carrier() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        let (session, tr) = cp.run_pdu_session_setup(UeId(1), Rat::Wifi).unwrap();
        assert_eq!(cp.classify_downlink(UeId(1), session), Some(Rat::Wifi));
        assert_eq!(tr.count_named(trace::WIFI_PORT_CONFIGURED), 1);
        assert_eq!(tr.count_named(trace::RRC_RECONFIGURATION), 0);
    }

    #[test]
    fn nr_only_ue_cannot_take_wifi() {
        let mut cp = plane();
        connect(&mut cp, UeId(2));
        let err = cp.run_pdu_session_setup(UeId(2), Rat::Wifi).unwrap_err();
        assert!(matches!(err, ControlError::RatUnavailable { .. }));
    }

    #[test]
    fn one_registration_even_with_both_rats_in_use() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        let (session, _) = cp.run_pdu_session_setup(UeId(1), Rat::Wifi).unwrap();
        cp.install_uplink_path(UeId(1), session, Rat::Gnb).unwrap();
        assert_eq!(cp.ngap_port_count(UeId(1)), 1);
        assert_eq!(cp.classify_downlink(UeId(1), session), Some(Rat::Wifi));
        assert_eq!(cp.classify_uplink(UeId(1), session), Some(Rat::Gnb));
    }

    #[test]
    fn uplink_repoint_keeps_exactly_one_pair_per_session() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        let (session, _) = cp.run_pdu_session_setup(UeId(1), Rat::Gnb).unwrap();
        cp.install_uplink_path(UeId(1), session, Rat::Gnb).unwrap();
        cp.install_uplink_path(UeId(1), session, Rat::Wifi).unwrap();
        let sess = cp.sessions(UeId(1))[0].clone();
        let to_gtp = cp
            .mrn
            .flow_entries()
            .iter()
            .filter(|e| e.action == FlowAction::Forward(sess.gtp_port))
            .count();
        let from_gtp = cp
            .mrn
            .flow_entries()
            .iter()
            .filter(|e| e.matcher.in_port == sess.gtp_port)
            .count();
        assert_eq!((to_gtp, from_gtp), (1, 1));
        assert_eq!(cp.classify_uplink(UeId(1), session), Some(Rat::Wifi));
        assert_eq!(cp.classify_downlink(UeId(1), session), Some(Rat::Gnb));
    }

    #[test]
    fn nas_blobs_stay_opaque_through_the_switches() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        cp.run_pdu_session_setup(UeId(1), Rat::Gnb).unwrap();
        assert_eq!(cp.amf_received.len(), 2);
        for blob in &cp.amf_received {
            assert!(!blob.was_inspected(), "a switch looked inside a NAS payload");
        }
    }

    #[test]
    fn direct_internet_path_avoids_core_ports() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        let tr = cp.run_direct_internet_setup(UeId(1), true).unwrap();
        assert_eq!(tr.count_named(trace::GTP_TUNNEL_CREATED), 0);
        assert_eq!(tr.count_named(trace::NGAP_ASSOCIATION_CREATED), 0);
        assert_eq!(tr.count_named(trace::NGAP_SESSION_SETUP), 0);
        // Repeat packet hits the installed flow: no table miss.
        let sw = cp.ue_switch(UeId(1)).unwrap();
        let ip = sw.phys_port(PortKind::IpLocal);
        let action = sw.match_packet(&PacketMeta {
            in_port: ip,
            ue: Some(UeId(1)),
            session: None,
        });
        assert!(matches!(action, FlowAction::Forward(_)));
    }

    #[test]
    fn direct_and_core_paths_coexist_with_disjoint_entries() {
        let mut cp = plane();
        connect(&mut cp, UeId(1));
        let (session, _) = cp.run_pdu_session_setup(UeId(1), Rat::Gnb).unwrap();
        let before: Vec<FlowEntry> = cp.mrn.flow_entries().to_vec();
        cp.run_direct_internet_setup(UeId(1), true).unwrap();
        let after = cp.mrn.flow_entries();
        // The direct path adds entries without touching the session pair.
        assert_eq!(after.len(), before.len() + 1);
        for e in &before {
            assert!(after.iter().any(|x| x == e));
        }
        assert_eq!(cp.classify_downlink(UeId(1), session), Some(Rat::Gnb));
    }

    #[test]
    fn reactive_mode_installs_on_first_nas_message() {
        let mut cp = ControlPlane::new(5000, false);
        cp.add_ue(UeId(1), true);
        cp.run_initial_connection(UeId(1)).unwrap();
        // No install_nas_path: the first session request triggers it.
        let (_, tr) = cp.run_pdu_session_setup(UeId(1), Rat::Gnb).unwrap();
        assert_eq!(cp.ngap_port_count(UeId(1)), 1);
        assert!(tr.count_named(trace::PACKET_IN) >= 2);
    }

    #[test]
    fn proactive_mode_requires_the_path_first() {
        let mut cp = plane();
        cp.run_initial_connection(UeId(1)).unwrap();
        assert!(cp.run_pdu_session_setup(UeId(1), Rat::Gnb).is_err());
    }
}

//! Network graph: users, access networks (user, switch, AWG), backbone nodes,
//! fiber spans and pair sources, plus reference builders and routing.
//!
//! Labels are 1-based in text (`A1`, `B1`, `S1`, `U1`) and 0-based in code.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ComponentKind, NodeAction, NodeKind, SignalClass};
use crate::error::{Error, Result};
use crate::scheduler::{NodeConfiguration, Port};
use crate::units::Distance;
use crate::wdm_grid::{
    cwdm_parent, dwdm_fit_count, Band, BandKind, CwdmChannel, DwdmChannel, GridSpacing, DEFAULT_CWDM_PASSBAND_NM,
};

pub const DEFAULT_USER_DROP_KM: f64 = 1.0;
pub const DEFAULT_FEEDER_KM: f64 = 3.5;
pub const DEFAULT_SPAN_KM: f64 = 4.0;
pub const DEFAULT_AWG_PORTS: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Star,
    OpenRing,
    Ring,
    Mesh,
}

impl TopologyKind {
    pub fn is_ring(self) -> bool {
        matches!(self, TopologyKind::Ring | TopologyKind::OpenRing)
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopologyKind::Star => "star",
            TopologyKind::OpenRing => "open_ring",
            TopologyKind::Ring => "ring",
            TopologyKind::Mesh => "mesh",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackboneNode {
    pub id: usize,
    pub kind: NodeKind,
}

/// A backbone fiber span. Ring spans are one-way `a → b`; mesh spans carry
/// both directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: usize,
    pub a: usize,
    pub b: usize,
    pub length: Distance,
    pub directed: bool,
}

impl Link {
    /// Far end when leaving `from`, respecting direction.
    pub fn next_from(&self, from: usize) -> Option<usize> {
        if self.a == from {
            Some(self.b)
        } else if self.b == from && !self.directed {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessNetwork {
    pub id: usize,
    /// Attached backbone node; `None` for a standalone star.
    pub node: Option<usize>,
    pub switch_ports: u32,
    /// Loops on the network side of the switch for intra-network paths.
    pub return_loops: u32,
    pub awg_ports: u32,
    pub users: Vec<usize>,
    pub conventional: Option<CwdmChannel>,
    pub quantum: Option<CwdmChannel>,
    pub user_drop: Distance,
    pub feeder: Distance,
}

impl AccessNetwork {
    pub fn assigned(&self, band: BandKind) -> Option<CwdmChannel> {
        match band {
            BandKind::OConventional => self.conventional,
            BandKind::CQuantum => self.quantum,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: usize,
    pub access_network: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    /// On the add path of a backbone node (passive OADM) or at a PXC input.
    Node(usize),
    /// Directly on the backbone fiber, `span` before node `next`.
    Backbone { next: usize, span: Distance },
    /// Inside an access network, in front of its AWG.
    AccessSwitch(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSite {
    pub id: usize,
    pub attachment: Attachment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    User(usize),
    Source(usize),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::User(u) => write!(f, "U{}", u + 1),
            Endpoint::Source(s) => write!(f, "S{}", s + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub kind: TopologyKind,
    pub nodes: Vec<BackboneNode>,
    pub links: Vec<Link>,
    pub access_networks: Vec<AccessNetwork>,
    pub users: Vec<User>,
    pub sources: Vec<SourceSite>,
    pub catalog: Catalog,
    pub spacing: GridSpacing,
    pub cwdm_passband_nm: f64,
    /// Shared CWDM channels of a mesh, where channels are switched rather
    /// than bound to access networks.
    pub quantum_channels: Vec<CwdmChannel>,
    pub conventional_channels: Vec<CwdmChannel>,
    /// Replaces the node kind's default quantum band.
    #[serde(default)]
    pub quantum_band_override: Option<Band>,
    pub warnings: Vec<String>,
}

/// Knobs of the reference builders.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOptions {
    pub user_drop: Distance,
    pub feeder: Distance,
    pub span: Distance,
    pub users_per_an: Option<usize>,
    pub return_loops: u32,
    pub spacing: GridSpacing,
    pub cwdm_passband_nm: f64,
    /// Mesh span list as `(a, b, length)`; `None` uses the reference family.
    pub mesh_edges: Option<Vec<(usize, usize, Distance)>>,
    pub catalog: Catalog,
    /// Quantum band and first quantum channel of a ring plan, replacing the
    /// node kind's defaults.
    pub quantum_band: Option<Band>,
    pub first_quantum_nm: Option<u32>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            user_drop: Distance::km(DEFAULT_USER_DROP_KM),
            feeder: Distance::km(DEFAULT_FEEDER_KM),
            span: Distance::km(DEFAULT_SPAN_KM),
            users_per_an: None,
            return_loops: 1,
            spacing: GridSpacing::GHZ_100,
            cwdm_passband_nm: DEFAULT_CWDM_PASSBAND_NM,
            mesh_edges: None,
            catalog: Catalog::default(),
            quantum_band: None,
            first_quantum_nm: None,
        }
    }
}

/// First conventional and quantum CWDM channels of a ring channel plan.
/// The two sit one AWG period apart, so access network `i` gets
/// `(C1290 + 20i, C1510 + 20i)`.
pub const RING_FIRST_CONVENTIONAL_NM: u32 = 1290;
pub const RING_FIRST_QUANTUM_NM: u32 = 1510;
/// First channel of the entanglement-only ring, which uses no O band.
pub const ENT_ONLY_FIRST_QUANTUM_NM: u32 = 1470;

/// Quantum band of a network built from single-channel CWDM OADMs. With no
/// conventional traffic it may spread below 1500 nm.
pub const fn entanglement_only_band() -> Band {
    Band { kind: BandKind::CQuantum, lo_nm: 1460.0, hi_nm: 1620.0 }
}

/// Reference mesh spans: a cycle plus chords fanning out of node 0. For four
/// nodes that is the cycle 1-2-3-4 with the chord 1-3.
pub fn reference_mesh_edges(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    match n {
        0 | 1 => {}
        2 => edges.push((0, 1)),
        _ => {
            edges.extend((0..n).map(|i| (i, (i + 1) % n)));
            edges.extend((2..n - 1).map(|k| (0, k)));
        }
    }
    edges
}

pub fn build_reference_network(kind: TopologyKind, n_access: usize, node_kind: Option<NodeKind>) -> Result<NetworkModel> {
    build_reference_network_with(kind, n_access, node_kind, &ReferenceOptions::default())
}

pub fn build_reference_network_with(
    kind: TopologyKind,
    n_access: usize,
    node_kind: Option<NodeKind>,
    opts: &ReferenceOptions,
) -> Result<NetworkModel> {
    if n_access == 0 {
        return Err(Error::Topology("at least one access network is required".into()));
    }
    let node_kind = match (kind, node_kind) {
        (TopologyKind::Star, _) => None,
        (TopologyKind::Mesh, None) => Some(NodeKind::ActivePxc),
        (_, None) => Some(NodeKind::PassiveOadm),
        (_, k) => k,
    };
    if kind == TopologyKind::Star && n_access != 1 {
        return Err(Error::Topology("a star has exactly one access network".into()));
    }
    if kind == TopologyKind::Mesh && node_kind != Some(NodeKind::ActivePxc) {
        return Err(Error::Topology("mesh backbones need active_pxc nodes".into()));
    }
    if kind.is_ring() && node_kind == Some(NodeKind::ActivePxc) {
        return Err(Error::Topology("ring backbones use passive nodes".into()));
    }

    let users_per_an = opts.users_per_an.unwrap_or_else(|| dwdm_fit_count(opts.cwdm_passband_nm, opts.spacing));
    let mut net = NetworkModel {
        kind,
        nodes: Vec::new(),
        links: Vec::new(),
        access_networks: Vec::new(),
        users: Vec::new(),
        sources: Vec::new(),
        catalog: opts.catalog.clone(),
        spacing: opts.spacing,
        cwdm_passband_nm: opts.cwdm_passband_nm,
        quantum_channels: Vec::new(),
        conventional_channels: Vec::new(),
        quantum_band_override: opts.quantum_band,
        warnings: Vec::new(),
    };

    if let Some(nk) = node_kind {
        net.nodes = (0..n_access).map(|id| BackboneNode { id, kind: nk }).collect();
    }

    match kind {
        TopologyKind::Star => {}
        TopologyKind::Ring | TopologyKind::OpenRing => {
            let n_links = if kind == TopologyKind::Ring { n_access } else { n_access - 1 };
            net.links = (0..n_links)
                .map(|i| Link { id: i, a: i, b: (i + 1) % n_access, length: opts.span, directed: true })
                .collect();
        }
        TopologyKind::Mesh => {
            let edges: Vec<(usize, usize, Distance)> = match &opts.mesh_edges {
                Some(e) => e.clone(),
                None => reference_mesh_edges(n_access).into_iter().map(|(a, b)| (a, b, opts.span)).collect(),
            };
            net.links = edges
                .into_iter()
                .enumerate()
                .map(|(id, (a, b, length))| Link { id, a, b, length, directed: false })
                .collect();
            if n_access < 3 {
                net.warnings.push(format!("mesh with {n_access} access network(s) degenerates to a ring"));
            }
        }
    }

    for an in 0..n_access {
        let (conventional, quantum) = reference_assignment(kind, node_kind, an, opts)?;
        let users: Vec<usize> = (net.users.len()..net.users.len() + users_per_an).collect();
        for &u in &users {
            net.users.push(User { id: u, access_network: an });
        }
        net.access_networks.push(AccessNetwork {
            id: an,
            node: node_kind.map(|_| an),
            switch_ports: users_per_an as u32 + 2 * opts.return_loops,
            return_loops: opts.return_loops,
            awg_ports: DEFAULT_AWG_PORTS,
            users,
            conventional,
            quantum,
            user_drop: opts.user_drop,
            feeder: opts.feeder,
        });
    }

    match (kind, node_kind) {
        (TopologyKind::Star, _) => net.sources.push(SourceSite { id: 0, attachment: Attachment::AccessSwitch(0) }),
        (_, Some(NodeKind::CwdmOadmSimple)) => {
            // All inter-network sources grouped on the backbone ahead of the
            // first node; each access network has its own local source for
            // pairs inside it.
            net.sources.push(SourceSite { id: 0, attachment: Attachment::Backbone { next: 0, span: opts.span } });
            for an in 0..n_access {
                net.sources.push(SourceSite { id: an + 1, attachment: Attachment::AccessSwitch(an) });
            }
        }
        _ => {
            net.sources = (0..n_access).map(|i| SourceSite { id: i, attachment: Attachment::Node(i) }).collect();
        }
    }

    if kind == TopologyKind::Mesh {
        net.quantum_channels = [1530, 1550]
            .iter()
            .map(|&nm| CwdmChannel::with_passband(nm, opts.cwdm_passband_nm))
            .collect::<Result<_>>()?;
        net.conventional_channels = [1290, 1310]
            .iter()
            .map(|&nm| CwdmChannel::with_passband(nm, opts.cwdm_passband_nm))
            .collect::<Result<_>>()?;
    }

    net.validate()?;
    Ok(net)
}

fn reference_assignment(
    kind: TopologyKind,
    node_kind: Option<NodeKind>,
    an: usize,
    opts: &ReferenceOptions,
) -> Result<(Option<CwdmChannel>, Option<CwdmChannel>)> {
    let passband = opts.cwdm_passband_nm;
    let pick = |nm: u32, band: Band| -> Result<CwdmChannel> {
        let c = CwdmChannel::with_passband(nm, passband)
            .map_err(|_| Error::Topology(format!("no CWDM channel left for A{}", an + 1)))?;
        if !band.contains_cwdm(&c) {
            return Err(Error::Topology(format!("no {} CWDM channel left for A{}", band.kind, an + 1)));
        }
        Ok(c)
    };
    let step = 20 * an as u32;
    match (kind, node_kind) {
        (TopologyKind::Mesh, _) => Ok((None, None)),
        (TopologyKind::Star, _) => Ok((
            Some(pick(1310, Band::o_conventional())?),
            Some(pick(1550, Band::c_quantum())?),
        )),
        (_, Some(NodeKind::CwdmOadmSimple)) => {
            let first = opts.first_quantum_nm.unwrap_or(ENT_ONLY_FIRST_QUANTUM_NM);
            Ok((None, Some(pick(first + step, opts.quantum_band.unwrap_or(entanglement_only_band()))?)))
        }
        _ => Ok((
            Some(pick(RING_FIRST_CONVENTIONAL_NM + step, Band::o_conventional())?),
            Some(pick(
                opts.first_quantum_nm.unwrap_or(RING_FIRST_QUANTUM_NM) + step,
                opts.quantum_band.unwrap_or(Band::c_quantum()),
            )?),
        )),
    }
}

/// One element of a route, in signal order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hop {
    /// `backbone` spans count towards closeness; `link` names a numbered span.
    Fiber { length: Distance, link: Option<usize>, backbone: bool, label: String },
    Component { kind: ComponentKind, label: String },
    /// A backbone node; `priced_as` picks the column of its loss table.
    Node { node: usize, kind: NodeKind, action: NodeAction, priced_as: SignalClass },
    /// Patch loop on the network side of an access switch.
    ReturnLoop { access_network: usize },
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hop::Fiber { label, length, .. } => write!(f, "{label} ({length})"),
            Hop::Component { label, .. } => f.write_str(label),
            Hop::Node { node, action, .. } => write!(f, "B{} {action}", node + 1),
            Hop::ReturnLoop { access_network } => write!(f, "A{} return loop", access_network + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub from: Endpoint,
    pub to: Endpoint,
    pub class: SignalClass,
    pub channel: DwdmChannel,
    pub hops: Vec<Hop>,
}

impl Route {
    /// Number of backbone spans crossed: `k` for the k-closest network.
    pub fn closeness(&self) -> usize {
        self.hops.iter().filter(|h| matches!(h, Hop::Fiber { backbone: true, .. })).count()
    }

    pub fn backbone_nodes(&self) -> Vec<usize> {
        self.hops
            .iter()
            .filter_map(|h| match h {
                Hop::Node { node, .. } => Some(*node),
                _ => None,
            })
            .collect()
    }

    pub fn uses_return_loop(&self) -> bool {
        self.hops.iter().any(|h| matches!(h, Hop::ReturnLoop { .. }))
    }

    /// Links crossed, with the node each was entered from.
    pub fn link_traversals(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut last_node = None;
        for h in &self.hops {
            match h {
                Hop::Node { node, .. } => last_node = Some(*node),
                Hop::Fiber { link: Some(l), .. } => {
                    if let Some(n) = last_node {
                        out.push((*l, n));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Backbone nodes and spans alternate; the first node adds (or injects)
    /// unless the source sits on the fiber itself, and the last node drops.
    /// Routes without backbone nodes stay inside one access network.
    pub fn is_well_formed(&self) -> bool {
        let seq: Vec<&Hop> = self
            .hops
            .iter()
            .filter(|h| matches!(h, Hop::Node { .. } | Hop::Fiber { backbone: true, .. }))
            .collect();
        if seq.is_empty() {
            return self.uses_return_loop() || matches!(self.from, Endpoint::Source(_));
        }
        let is_node = |h: &&Hop| matches!(h, Hop::Node { .. });
        if seq.windows(2).any(|w| is_node(&w[0]) == is_node(&w[1])) {
            return false;
        }
        let action = |h: &Hop| match h {
            Hop::Node { action, .. } => Some(*action),
            _ => None,
        };
        let starts = match action(seq[0]) {
            Some(a) => matches!(a, NodeAction::Add | NodeAction::Cross),
            None => matches!(self.from, Endpoint::Source(_)),
        };
        starts && matches!(action(seq[seq.len() - 1]), Some(NodeAction::Drop | NodeAction::Cross))
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} → {} on {}: ", self.from, self.to, self.channel)?;
        let parts: Vec<String> = self.hops.iter().map(|h| h.to_string()).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Routing switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RouteOptions {
    /// Send same-network traffic around the backbone instead of the return
    /// loop.
    pub force_backbone: bool,
}

impl NetworkModel {
    pub fn n_access(&self) -> usize {
        self.access_networks.len()
    }

    pub fn user(&self, id: usize) -> Result<&User> {
        self.users.get(id).ok_or_else(|| Error::InvalidArgument(format!("no user U{}", id + 1)))
    }

    pub fn source(&self, id: usize) -> Result<&SourceSite> {
        self.sources.get(id).ok_or_else(|| Error::InvalidArgument(format!("no source S{}", id + 1)))
    }

    pub fn access(&self, id: usize) -> Result<&AccessNetwork> {
        self.access_networks
            .get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("no access network A{}", id + 1)))
    }

    pub fn node_kind(&self) -> Option<NodeKind> {
        self.nodes.first().map(|n| n.kind)
    }

    /// Band the quantum CWDM channels of this network are drawn from.
    pub fn quantum_band(&self) -> Band {
        if let Some(b) = self.quantum_band_override {
            b
        } else if self.node_kind() == Some(NodeKind::CwdmOadmSimple) {
            entanglement_only_band()
        } else {
            Band::c_quantum()
        }
    }

    /// Access networks hanging off `node`.
    pub fn access_at(&self, node: usize) -> Vec<usize> {
        self.access_networks.iter().filter(|a| a.node == Some(node)).map(|a| a.id).collect()
    }

    /// Backbone neighbors reachable in one span from `node`, as `(link, node)`.
    pub fn out_links(&self, node: usize) -> Vec<(usize, usize)> {
        self.links.iter().filter_map(|l| l.next_from(node).map(|n| (l.id, n))).collect()
    }

    /// Source sites attached at `node`.
    pub fn sources_at(&self, node: usize) -> Vec<usize> {
        self.sources
            .iter()
            .filter(|s| s.attachment == Attachment::Node(node))
            .map(|s| s.id)
            .collect()
    }

    /// Whether the backbone is connected (ignoring direction).
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        self.components().len() == 1
    }

    /// Connected components of the undirected backbone graph; each is sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for l in &self.links {
            adj[l.a].push(l.b);
            adj[l.b].push(l.a);
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Every simple node path starting at `from`, including the trivial one.
    pub fn simple_paths_from(&self, from: usize) -> Vec<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        let mut visited = BTreeSet::from([from]);
        let mut path = Vec::new();
        self.walk(from, &mut visited, &mut path, &mut out);
        out
    }

    fn walk(
        &self,
        at: usize,
        visited: &mut BTreeSet<usize>,
        path: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        out.push(path.clone());
        for (link, next) in self.out_links(at) {
            if visited.insert(next) {
                path.push((link, next));
                self.walk(next, visited, path, out);
                path.pop();
                visited.remove(&next);
            }
        }
    }

    /// Longest simple path length (in spans) anywhere in the backbone.
    pub fn longest_simple_path(&self) -> usize {
        (0..self.nodes.len())
            .flat_map(|n| self.simple_paths_from(n))
            .map(|p| p.len())
            .max()
            .unwrap_or(0)
    }

    /// Topology invariants.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Topology(m));
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return err(format!("node ids must be 0..{}", self.nodes.len()));
            }
        }
        for (i, l) in self.links.iter().enumerate() {
            if l.id != i || l.a >= self.nodes.len() || l.b >= self.nodes.len() {
                return err(format!("span {} references an unknown node", i + 1));
            }
            if !l.directed && l.a == l.b {
                return err(format!("span {} is a self-loop", i + 1));
            }
        }
        let mut owner = vec![None; self.users.len()];
        for (i, an) in self.access_networks.iter().enumerate() {
            if an.id != i {
                return err("access network ids must be consecutive".into());
            }
            match an.node {
                Some(n) if n >= self.nodes.len() => return err(format!("A{} attached to unknown node", i + 1)),
                None if !self.nodes.is_empty() => return err(format!("A{} is not attached to the backbone", i + 1)),
                _ => {}
            }
            if an.users.len() > an.awg_ports as usize {
                return err(format!("A{} has {} users but {} AWG ports", i + 1, an.users.len(), an.awg_ports));
            }
            for &u in &an.users {
                match owner.get_mut(u) {
                    Some(slot @ None) => *slot = Some(i),
                    Some(Some(_)) => return err(format!("U{} belongs to two access networks", u + 1)),
                    None => return err(format!("A{} lists unknown user U{}", i + 1, u + 1)),
                }
            }
        }
        for (u, user) in self.users.iter().enumerate() {
            if owner[u] != Some(user.access_network) {
                return err(format!("U{} is not listed by its access network", u + 1));
            }
        }
        for s in &self.sources {
            let ok = match &s.attachment {
                Attachment::Node(n) => *n < self.nodes.len(),
                Attachment::Backbone { next, .. } => *next < self.nodes.len(),
                Attachment::AccessSwitch(a) => *a < self.access_networks.len(),
            };
            if !ok {
                return err(format!("S{} attached to an unknown element", s.id + 1));
            }
        }
        match self.kind {
            TopologyKind::Ring => self.check_cycle(),
            TopologyKind::OpenRing => self.check_chain(),
            TopologyKind::Mesh if !self.is_connected() => err("mesh backbone is not connected".into()),
            _ => Ok(()),
        }
    }

    fn check_cycle(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.links.len() != n || self.links.iter().any(|l| !l.directed) {
            return Err(Error::Topology("ring spans must form one directed cycle".into()));
        }
        let mut seen = BTreeSet::new();
        let mut at = 0;
        for _ in 0..n {
            let next: Vec<_> = self.out_links(at);
            if next.len() != 1 || !seen.insert(at) {
                return Err(Error::Topology("ring spans must form one directed cycle".into()));
            }
            at = next[0].1;
        }
        if at != 0 || seen.len() != n {
            return Err(Error::Topology("ring spans must form one directed cycle".into()));
        }
        Ok(())
    }

    fn check_chain(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut at = 0;
        for _ in 1..n {
            match self.out_links(at).as_slice() {
                [(_, next)] => at = *next,
                _ => return Err(Error::Topology("open ring spans must form one directed chain".into())),
            }
        }
        if !self.out_links(at).is_empty() || self.links.len() + 1 != n.max(1) {
            return Err(Error::Topology("open ring spans must form one directed chain".into()));
        }
        Ok(())
    }

    fn up_chain(&self, an: &AccessNetwork, hops: &mut Vec<Hop>) {
        let a = an.id + 1;
        hops.push(Hop::Fiber { length: an.user_drop, link: None, backbone: false, label: format!("A{a} user fiber") });
        hops.push(Hop::Component { kind: ComponentKind::Switch, label: format!("A{a} switch") });
        hops.push(Hop::Component { kind: ComponentKind::Awg32, label: format!("A{a} AWG") });
        hops.push(Hop::Fiber { length: an.feeder, link: None, backbone: false, label: format!("A{a} feeder") });
    }

    fn down_chain(&self, an: &AccessNetwork, hops: &mut Vec<Hop>) {
        let a = an.id + 1;
        hops.push(Hop::Fiber { length: an.feeder, link: None, backbone: false, label: format!("A{a} feeder") });
        hops.push(Hop::Component { kind: ComponentKind::Awg32, label: format!("A{a} AWG") });
        hops.push(Hop::Component { kind: ComponentKind::Switch, label: format!("A{a} switch") });
        hops.push(Hop::Fiber { length: an.user_drop, link: None, backbone: false, label: format!("A{a} user fiber") });
    }

    fn span_hop(&self, link: usize) -> Hop {
        let l = &self.links[link];
        Hop::Fiber { length: l.length, link: Some(link), backbone: true, label: format!("span B{}-B{}", l.a + 1, l.b + 1) }
    }
}

fn no_route(channel: &DwdmChannel, reason: impl Into<String>) -> Error {
    Error::NoRoute { channel: channel.to_string(), reason: reason.into() }
}

/// Route of `channel` from a user or source to user `to`. Ring backbones
/// route by wavelength alone; meshes follow the supplied configuration.
pub fn enumerate_route(
    net: &NetworkModel,
    from: Endpoint,
    to: usize,
    channel: &DwdmChannel,
    config: Option<&NodeConfiguration>,
) -> Result<Route> {
    enumerate_route_with(net, from, to, channel, config, RouteOptions::default())
}

pub fn enumerate_route_with(
    net: &NetworkModel,
    from: Endpoint,
    to: usize,
    channel: &DwdmChannel,
    config: Option<&NodeConfiguration>,
    opts: RouteOptions,
) -> Result<Route> {
    let dest_user = net.user(to)?;
    let dest = net.access(dest_user.access_network)?;
    let parent = cwdm_parent(channel, net.cwdm_passband_nm)
        .ok_or_else(|| no_route(channel, "channel lies outside every CWDM passband"))?;
    let band = if net.quantum_band().contains_cwdm(&parent) {
        BandKind::CQuantum
    } else if Band::o_conventional().contains_cwdm(&parent) {
        BandKind::OConventional
    } else {
        return Err(no_route(channel, format!("{parent} is in neither band")));
    };
    let class = match from {
        Endpoint::Source(_) => SignalClass::Entangled,
        Endpoint::User(_) if band == BandKind::OConventional => SignalClass::Conventional,
        Endpoint::User(_) => SignalClass::QuantumOneWay,
    };
    if class == SignalClass::Entangled && band != BandKind::CQuantum {
        return Err(no_route(channel, "pair photons travel in the quantum band"));
    }

    if net.kind == TopologyKind::Mesh {
        let shared = match band {
            BandKind::OConventional => &net.conventional_channels,
            BandKind::CQuantum => &net.quantum_channels,
        };
        if !shared.contains(&parent) {
            return Err(no_route(channel, format!("{parent} is not a switched channel of this mesh")));
        }
    } else {
        if dest.assigned(band) != Some(parent) {
            return Err(no_route(channel, format!("{parent} is not assigned to A{}", dest.id + 1)));
        }
    }

    let mut hops = Vec::new();
    match from {
        Endpoint::User(u) => {
            let src_an = net.access(net.user(u)?.access_network)?;
            if u == to {
                return Err(no_route(channel, "source and destination are the same user"));
            }
            if src_an.id == dest.id && !opts.force_backbone && (src_an.return_loops > 0 || net.nodes.is_empty()) {
                let a = src_an.id + 1;
                if src_an.return_loops == 0 {
                    return Err(no_route(channel, format!("A{a} has no return loop")));
                }
                hops.push(Hop::Fiber { length: src_an.user_drop, link: None, backbone: false, label: format!("A{a} user fiber") });
                hops.push(Hop::Component { kind: ComponentKind::Switch, label: format!("A{a} switch") });
                hops.push(Hop::ReturnLoop { access_network: src_an.id });
                hops.push(Hop::Component { kind: ComponentKind::Switch, label: format!("A{a} switch") });
                hops.push(Hop::Fiber { length: src_an.user_drop, link: None, backbone: false, label: format!("A{a} user fiber") });
            } else {
                let start = src_an.node.ok_or_else(|| no_route(channel, "no backbone"))?;
                net.up_chain(src_an, &mut hops);
                if net.kind == TopologyKind::Mesh {
                    let conf = config.ok_or_else(|| no_route(channel, "mesh routing needs a node configuration"))?;
                    trace_mesh(net, conf, start, Port::Access(src_an.id), parent, class, dest, channel, &mut hops)?;
                } else {
                    hops.push(Hop::Node {
                        node: start,
                        kind: net.nodes[start].kind,
                        action: NodeAction::Add,
                        priced_as: class,
                    });
                    trace_ring(net, start, class, dest, channel, &mut hops)?;
                }
            }
        }
        Endpoint::Source(s) => match &net.source(s)?.attachment {
            Attachment::AccessSwitch(a) => {
                if *a != dest.id {
                    return Err(no_route(channel, format!("S{} only reaches A{}", s + 1, a + 1)));
                }
                let a = dest.id + 1;
                hops.push(Hop::Component { kind: ComponentKind::Awg32, label: format!("A{a} AWG") });
                hops.push(Hop::Component { kind: ComponentKind::Switch, label: format!("A{a} switch") });
                hops.push(Hop::Fiber { length: dest.user_drop, link: None, backbone: false, label: format!("A{a} user fiber") });
            }
            Attachment::Node(n) => {
                if net.kind == TopologyKind::Mesh {
                    let conf = config.ok_or_else(|| no_route(channel, "mesh routing needs a node configuration"))?;
                    trace_mesh(net, conf, *n, Port::Source(s), parent, class, dest, channel, &mut hops)?;
                } else {
                    hops.push(Hop::Node { node: *n, kind: net.nodes[*n].kind, action: NodeAction::Add, priced_as: class });
                    trace_ring(net, *n, class, dest, channel, &mut hops)?;
                }
            }
            Attachment::Backbone { next, span } => {
                if !net.kind.is_ring() {
                    return Err(no_route(channel, "backbone-attached sources need a ring"));
                }
                hops.push(Hop::Fiber {
                    length: *span,
                    link: None,
                    backbone: true,
                    label: format!("source span to B{}", next + 1),
                });
                arrive_ring(net, *next, class, dest, channel, &mut hops)?;
            }
        },
    }
    Ok(Route { from, to: Endpoint::User(to), class, channel: *channel, hops })
}

/// Leaves `start` along the ring until the destination's node drops the
/// channel. A destination at `start` itself needs a full lap.
fn trace_ring(
    net: &NetworkModel,
    start: usize,
    class: SignalClass,
    dest: &AccessNetwork,
    channel: &DwdmChannel,
    hops: &mut Vec<Hop>,
) -> Result<()> {
    let (link, next) = match net.out_links(start).as_slice() {
        [one] => *one,
        _ => return Err(no_route(channel, format!("B{} has no outgoing span", start + 1))),
    };
    hops.push(net.span_hop(link));
    arrive_ring(net, next, class, dest, channel, hops)
}

fn arrive_ring(
    net: &NetworkModel,
    mut at: usize,
    class: SignalClass,
    dest: &AccessNetwork,
    channel: &DwdmChannel,
    hops: &mut Vec<Hop>,
) -> Result<()> {
    let target = dest.node.ok_or_else(|| no_route(channel, "destination has no backbone node"))?;
    for _ in 0..=net.nodes.len() {
        let kind = net.nodes[at].kind;
        if at == target {
            hops.push(Hop::Node { node: at, kind, action: NodeAction::Drop, priced_as: class });
            net.down_chain(dest, hops);
            return Ok(());
        }
        hops.push(Hop::Node { node: at, kind, action: NodeAction::Pass, priced_as: class });
        match net.out_links(at).as_slice() {
            [(link, next)] => {
                hops.push(net.span_hop(*link));
                at = *next;
            }
            _ => return Err(no_route(channel, format!("ring ends at B{} before A{}", at + 1, dest.id + 1))),
        }
    }
    Err(no_route(channel, "ring does not reach the destination"))
}

#[allow(clippy::too_many_arguments)]
fn trace_mesh(
    net: &NetworkModel,
    conf: &NodeConfiguration,
    start: usize,
    start_port: Port,
    parent: CwdmChannel,
    class: SignalClass,
    dest: &AccessNetwork,
    channel: &DwdmChannel,
    hops: &mut Vec<Hop>,
) -> Result<()> {
    let mut at = start;
    let mut port = start_port;
    for step in 0..=net.links.len() + 1 {
        // A source's own switch injects; every later node is a plain cross.
        let priced_as = if class == SignalClass::Entangled && step > 0 { SignalClass::QuantumOneWay } else { class };
        hops.push(Hop::Node { node: at, kind: net.nodes[at].kind, action: NodeAction::Cross, priced_as });
        let out = conf
            .output(at, port, parent)
            .ok_or_else(|| no_route(channel, format!("B{} does not switch {parent} from {port}", at + 1)))?;
        match out {
            Port::Access(a) => {
                if net.access(a)?.node != Some(at) {
                    return Err(no_route(channel, format!("A{} is not attached to B{}", a + 1, at + 1)));
                }
                if a != dest.id {
                    return Err(no_route(channel, format!("configuration delivers {parent} to A{} instead", a + 1)));
                }
                net.down_chain(dest, hops);
                return Ok(());
            }
            Port::Link(l) => {
                let next = net
                    .links
                    .get(l)
                    .and_then(|link| link.next_from(at))
                    .ok_or_else(|| no_route(channel, format!("B{} has no span {}", at + 1, l + 1)))?;
                hops.push(net.span_hop(l));
                port = Port::Link(l);
                at = next;
            }
            Port::Source(_) => return Err(no_route(channel, "a source port is not an output")),
        }
    }
    Err(no_route(channel, "configuration loops"))
}

/// Per access network, its users in id order.
pub fn users_by_access(net: &NetworkModel) -> BTreeMap<usize, Vec<usize>> {
    net.access_networks.iter().map(|a| (a.id, a.users.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wdm_grid::dwdm_channels_in;

    fn first_channel(c: CwdmChannel, net: &NetworkModel) -> DwdmChannel {
        dwdm_channels_in(&c, net.spacing)[0]
    }

    #[test]
    fn passive_ring_of_three() {
        let net = build_reference_network(TopologyKind::Ring, 3, Some(NodeKind::PassiveOadm)).unwrap();
        assert_eq!(net.nodes.len(), 3);
        assert_eq!(net.access_networks.len(), 3);
        let total: u64 = net.links.iter().map(|l| l.length.as_meters()).sum();
        assert_eq!(total, 12_000);
        let a: Vec<_> = net.access_networks.iter().map(|a| (a.conventional.unwrap().nominal_nm(), a.quantum.unwrap().nominal_nm())).collect();
        assert_eq!(a, vec![(1290, 1510), (1310, 1530), (1330, 1550)]);
        assert_eq!(net.access_networks[0].users.len(), 16);
    }

    #[test]
    fn star_is_a_single_access_network() {
        let net = build_reference_network(TopologyKind::Star, 1, None).unwrap();
        assert!(net.nodes.is_empty());
        assert_eq!(net.sources[0].attachment, Attachment::AccessSwitch(0));
        assert!(build_reference_network(TopologyKind::Star, 2, None).is_err());
    }

    #[test]
    fn reference_mesh() {
        let net = build_reference_network(TopologyKind::Mesh, 4, Some(NodeKind::ActivePxc)).unwrap();
        assert_eq!(net.nodes.len(), 4);
        assert!(net.is_connected());
        assert_eq!(net.links.len(), 5);
        assert!(net.access_networks.iter().all(|a| a.node == Some(a.id)));
        assert_eq!(net.longest_simple_path(), 3);
        assert!(net.warnings.is_empty());
    }

    #[test]
    fn small_mesh_warns() {
        let net = build_reference_network(TopologyKind::Mesh, 2, None).unwrap();
        assert_eq!(net.warnings.len(), 1);
    }

    #[test]
    fn same_network_uses_return_loop() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let ch = first_channel(net.access_networks[0].quantum.unwrap(), &net);
        let r = enumerate_route(&net, Endpoint::User(0), 1, &ch, None).unwrap();
        assert!(r.uses_return_loop());
        assert!(r.backbone_nodes().is_empty());
        assert!(r.is_well_formed());
    }

    #[test]
    fn one_closest_route() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let dest = net.access_networks[1].users[0];
        let ch = first_channel(net.access_networks[1].quantum.unwrap(), &net);
        let r = enumerate_route(&net, Endpoint::User(0), dest, &ch, None).unwrap();
        assert_eq!(r.closeness(), 1);
        let actions: Vec<_> = r
            .hops
            .iter()
            .filter_map(|h| if let Hop::Node { action, .. } = h { Some(*action) } else { None })
            .collect();
        assert_eq!(actions, vec![NodeAction::Add, NodeAction::Drop]);
        assert!(r.is_well_formed());
    }

    #[test]
    fn source_to_own_network_goes_all_the_way_round() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let ch = first_channel(net.access_networks[0].quantum.unwrap(), &net);
        let r = enumerate_route(&net, Endpoint::Source(0), 0, &ch, None).unwrap();
        assert_eq!(r.closeness(), 3);
        assert_eq!(r.backbone_nodes(), vec![0, 1, 2, 0]);
    }

    #[test]
    fn wrong_channel_has_no_route() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let ch = first_channel(net.access_networks[2].quantum.unwrap(), &net);
        let err = enumerate_route(&net, Endpoint::User(0), net.access_networks[1].users[0], &ch, None).unwrap_err();
        assert!(err.to_string().contains("no route for channel"));
    }

    #[test]
    fn open_ring_cannot_wrap() {
        let net = build_reference_network(TopologyKind::OpenRing, 3, None).unwrap();
        let ch = first_channel(net.access_networks[0].quantum.unwrap(), &net);
        let dest = net.access_networks[0].users[0];
        assert!(enumerate_route(&net, Endpoint::Source(1), dest, &ch, None).is_err());
    }

    #[test]
    fn entanglement_only_ring_arms() {
        let net = build_reference_network(TopologyKind::Ring, 8, Some(NodeKind::CwdmOadmSimple)).unwrap();
        assert_eq!(net.access_networks[7].quantum.unwrap().nominal_nm(), 1610);
        let last = &net.access_networks[7];
        let ch = first_channel(last.quantum.unwrap(), &net);
        let r = enumerate_route(&net, Endpoint::Source(0), last.users[0], &ch, None).unwrap();
        assert_eq!(r.closeness(), 8);
        assert_eq!(r.backbone_nodes().len(), 8);
    }

    #[test]
    fn mesh_needs_a_configuration() {
        let net = build_reference_network(TopologyKind::Mesh, 4, None).unwrap();
        let ch = first_channel(net.quantum_channels[0], &net);
        let err = enumerate_route(&net, Endpoint::User(0), net.access_networks[1].users[0], &ch, None).unwrap_err();
        assert!(err.to_string().contains("no route for channel"));
    }

    #[test]
    fn validate_rejects_broken_rings() {
        let mut net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        net.links[2].b = 1;
        assert!(net.validate().is_err());
        let mut mesh = build_reference_network(TopologyKind::Mesh, 4, None).unwrap();
        mesh.links.retain(|l| l.a != 0 && l.b != 0);
        for (i, l) in mesh.links.iter_mut().enumerate() {
            l.id = i;
        }
        assert!(mesh.validate().is_err());
    }

    #[test]
    fn too_many_networks_for_the_band() {
        assert!(build_reference_network(TopologyKind::Ring, 5, None).is_err());
        assert!(build_reference_network(TopologyKind::Ring, 4, None).is_ok());
        assert!(build_reference_network(TopologyKind::Ring, 9, Some(NodeKind::CwdmOadmSimple)).is_err());
    }
}

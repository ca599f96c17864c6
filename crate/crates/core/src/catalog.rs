//! Insertion losses of off-the-shelf components and of the two backbone node
//! designs built from them.
//!
//! Default values are the usual datasheet numbers for metro WDM gear. Items
//! quoted as a range (bandpass filters, single-channel OADMs) keep both
//! endpoints and use the midpoint, 0.5 dB, when one number is needed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Db, Distance};
use crate::wdm_grid::{Band, BandKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Fiber,
    Splitter1x2,
    Splitter1x32,
    CwdmOadm1Ch,
    DwdmOadm1Ch,
    CwdmMux4,
    WdmMux1310_1550,
    BandpassFilter,
    Circulator,
    Awg32,
    Switch,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 11] = [
        ComponentKind::Fiber,
        ComponentKind::Splitter1x2,
        ComponentKind::Splitter1x32,
        ComponentKind::CwdmOadm1Ch,
        ComponentKind::DwdmOadm1Ch,
        ComponentKind::CwdmMux4,
        ComponentKind::WdmMux1310_1550,
        ComponentKind::BandpassFilter,
        ComponentKind::Circulator,
        ComponentKind::Awg32,
        ComponentKind::Switch,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ComponentKind::Fiber => "fiber",
            ComponentKind::Splitter1x2 => "splitter_1x2",
            ComponentKind::Splitter1x32 => "splitter_1x32",
            ComponentKind::CwdmOadm1Ch => "cwdm_oadm_1ch",
            ComponentKind::DwdmOadm1Ch => "dwdm_oadm_1ch",
            ComponentKind::CwdmMux4 => "cwdm_mux4",
            ComponentKind::WdmMux1310_1550 => "wdm_mux_1310_1550",
            ComponentKind::BandpassFilter => "bandpass_filter",
            ComponentKind::Circulator => "circulator",
            ComponentKind::Awg32 => "awg32",
            ComponentKind::Switch => "switch",
        }
    }

    pub fn from_key(key: &str) -> Option<ComponentKind> {
        ComponentKind::ALL.into_iter().find(|k| k.key() == key)
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A loss quoted either as a single number or as a `min..max` range with a
/// nominal value used in calculations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossValue {
    pub min: Db,
    pub max: Db,
    pub nominal: Db,
}

impl LossValue {
    pub fn exact(db: f64) -> Self {
        let v = Db::from_db(db);
        LossValue { min: v, max: v, nominal: v }
    }

    pub fn range(min: f64, max: f64) -> Self {
        let (min, max) = (Db::from_db(min), Db::from_db(max));
        LossValue { min, max, nominal: Db::from_centi((min.centi() + max.centi()) / 2) }
    }

    pub fn is_range(&self) -> bool {
        self.min != self.max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandLoss {
    Uniform(LossValue),
    /// Fiber attenuation differs between the 1310 and 1550 nm windows.
    PerBand { o_band: LossValue, c_band: LossValue },
}

impl BandLoss {
    pub fn in_band(&self, band: BandKind) -> LossValue {
        match (self, band) {
            (BandLoss::Uniform(v), _) => *v,
            (BandLoss::PerBand { o_band, .. }, BandKind::OConventional) => *o_band,
            (BandLoss::PerBand { c_band, .. }, BandKind::CQuantum) => *c_band,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WavelengthRange {
    pub lo_nm: u32,
    pub hi_nm: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    pub name: String,
    pub loss: BandLoss,
    /// Loss is per km of length (fiber only).
    pub per_km: bool,
    /// Operating ranges; empty means unrestricted.
    pub ranges: Vec<WavelengthRange>,
    /// Cyclic devices (AWGs) repeat their response every free spectral range
    /// and therefore work in any band.
    pub cyclic: bool,
}

impl ComponentSpec {
    pub fn operates_in(&self, band: &Band) -> bool {
        self.cyclic
            || self.ranges.is_empty()
            || self.ranges.iter().any(|r| band.overlaps(r.lo_nm as f64, r.hi_nm as f64))
    }

    pub fn nominal(&self, band: BandKind) -> Db {
        self.loss.in_band(band).nominal
    }
}

fn spec(kind: ComponentKind, name: &str, loss: LossValue, ranges: &[(u32, u32)]) -> ComponentSpec {
    ComponentSpec {
        kind,
        name: name.to_string(),
        loss: BandLoss::Uniform(loss),
        per_km: false,
        ranges: ranges.iter().map(|&(lo_nm, hi_nm)| WavelengthRange { lo_nm, hi_nm }).collect(),
        cyclic: false,
    }
}

/// Default component table.
pub fn table1() -> Vec<ComponentSpec> {
    let mut fiber = spec(ComponentKind::Fiber, "Single-mode fibre ITU-T G.652", LossValue::exact(0.0), &[]);
    fiber.loss = BandLoss::PerBand { o_band: LossValue::exact(0.32), c_band: LossValue::exact(0.2) };
    fiber.per_km = true;
    let mut awg = spec(ComponentKind::Awg32, "32-channels AWG (100 GHz)", LossValue::exact(3.0), &[(1533, 1558)]);
    awg.cyclic = true;
    vec![
        fiber,
        spec(ComponentKind::Splitter1x2, "1:2 Splitter", LossValue::exact(3.6), &[(1260, 1610)]),
        spec(ComponentKind::Splitter1x32, "1:32 Splitter", LossValue::exact(16.5), &[(1260, 1610)]),
        spec(ComponentKind::CwdmOadm1Ch, "1-channel CWDM OADM", LossValue::range(0.4, 0.6), &[(1270, 1610)]),
        spec(ComponentKind::DwdmOadm1Ch, "1-channel DWDM OADM", LossValue::range(0.4, 0.6), &[(1525, 1610)]),
        spec(ComponentKind::CwdmMux4, "4-channels CWDM mux", LossValue::exact(1.0), &[(1270, 1610)]),
        spec(
            ComponentKind::WdmMux1310_1550,
            "1310/1550 WDM mux",
            LossValue::exact(0.5),
            &[(1260, 1360), (1500, 1600)],
        ),
        spec(ComponentKind::BandpassFilter, "Bandpass filter", LossValue::range(0.4, 0.6), &[]),
        spec(ComponentKind::Circulator, "Circulator", LossValue::exact(0.8), &[]),
        awg,
        spec(ComponentKind::Switch, "4x4 to 192x192 Switch", LossValue::exact(1.0), &[(1270, 1675)]),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// OADM with a pair source on the add path (ring backbone, all signals).
    PassiveOadm,
    /// Photonic cross-connect (mesh backbone).
    ActivePxc,
    /// Single-channel CWDM OADM of the entanglement-only ring.
    CwdmOadmSimple,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::PassiveOadm => "passive_oadm",
            NodeKind::ActivePxc => "active_pxc",
            NodeKind::CwdmOadmSimple => "cwdm_oadm_simple",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeAction {
    Add,
    Pass,
    Cross,
    Drop,
}

impl fmt::Display for NodeAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeAction::Add => "add",
            NodeAction::Pass => "pass",
            NodeAction::Cross => "cross",
            NodeAction::Drop => "drop",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalClass {
    Conventional,
    QuantumOneWay,
    /// One photon of an entangled pair on its way from the source.
    Entangled,
}

impl SignalClass {
    pub const ALL: [SignalClass; 3] =
        [SignalClass::Conventional, SignalClass::QuantumOneWay, SignalClass::Entangled];

    /// Conventional traffic rides the O band, everything quantum the C band.
    pub fn band(self) -> BandKind {
        match self {
            SignalClass::Conventional => BandKind::OConventional,
            _ => BandKind::CQuantum,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            SignalClass::Conventional => "conventional",
            SignalClass::QuantumOneWay => "quantum",
            SignalClass::Entangled => "entangled",
        }
    }
}

impl fmt::Display for SignalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Per-action losses of one backbone node design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeActionLossTable {
    pub node_kind: NodeKind,
    pub losses: BTreeMap<(NodeAction, SignalClass), Db>,
}

impl NodeActionLossTable {
    fn from_rows(node_kind: NodeKind, rows: &[(NodeAction, [f64; 3])]) -> Self {
        let mut losses = BTreeMap::new();
        for (action, values) in rows {
            for (class, v) in SignalClass::ALL.iter().zip(values) {
                losses.insert((*action, *class), Db::from_db(*v));
            }
        }
        NodeActionLossTable { node_kind, losses }
    }

    /// OADM with a 1:2 splitter for the source and a 90:10 splitter for the
    /// access add path.
    pub fn passive_oadm() -> Self {
        NodeActionLossTable::from_rows(
            NodeKind::PassiveOadm,
            &[
                (NodeAction::Add, [6.2, 6.2, 3.6]),
                (NodeAction::Pass, [4.8, 4.8, 4.8]),
                (NodeAction::Drop, [2.3, 1.7, 1.7]),
            ],
        )
    }

    /// The entangled entry is the source injection: switch, CWDM mux and WDM
    /// mux on the way out.
    pub fn active_pxc() -> Self {
        NodeActionLossTable::from_rows(NodeKind::ActivePxc, &[(NodeAction::Cross, [4.0, 4.0, 2.5])])
    }

    /// Single-channel CWDM OADM at its nominal 0.5 dB. The entanglement-only
    /// ring carries no conventional traffic and never adds at a node.
    pub fn cwdm_oadm_simple() -> Self {
        let mut losses = BTreeMap::new();
        for class in [SignalClass::QuantumOneWay, SignalClass::Entangled] {
            losses.insert((NodeAction::Pass, class), Db::from_db(0.5));
            losses.insert((NodeAction::Drop, class), Db::from_db(0.5));
        }
        NodeActionLossTable { node_kind: NodeKind::CwdmOadmSimple, losses }
    }

    pub fn defaults(kind: NodeKind) -> Self {
        match kind {
            NodeKind::PassiveOadm => NodeActionLossTable::passive_oadm(),
            NodeKind::ActivePxc => NodeActionLossTable::active_pxc(),
            NodeKind::CwdmOadmSimple => NodeActionLossTable::cwdm_oadm_simple(),
        }
    }

    pub fn get(&self, action: NodeAction, class: SignalClass) -> Result<Db> {
        self.losses
            .get(&(action, class))
            .copied()
            .ok_or(Error::UndefinedNodeAction { kind: self.node_kind, action, class })
    }

    pub fn supports(&self, action: NodeAction) -> bool {
        self.losses.keys().any(|(a, _)| *a == action)
    }
}

/// Components plus node tables: everything needed to price a route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    components: BTreeMap<ComponentKind, ComponentSpec>,
    /// CWDM (de)mux loss by channel count.
    cwdm_mux: BTreeMap<u8, Db>,
    nodes: BTreeMap<NodeKind, NodeActionLossTable>,
}

impl Default for Catalog {
    fn default() -> Self {
        let components = table1().into_iter().map(|c| (c.kind, c)).collect();
        let cwdm_mux = BTreeMap::from([(4u8, Db::from_db(1.0))]);
        let nodes = [NodeKind::PassiveOadm, NodeKind::ActivePxc, NodeKind::CwdmOadmSimple]
            .into_iter()
            .map(|k| (k, NodeActionLossTable::defaults(k)))
            .collect();
        Catalog { components, cwdm_mux, nodes }
    }
}

impl Catalog {
    pub fn component(&self, kind: ComponentKind) -> &ComponentSpec {
        &self.components[&kind]
    }

    pub fn components(&self) -> impl Iterator<Item = &ComponentSpec> {
        self.components.values()
    }

    /// Replaces the nominal loss of a component (both bands for fiber use
    /// [`Catalog::set_fiber_loss`]).
    pub fn set_component_loss(&mut self, kind: ComponentKind, db: f64) -> Result<()> {
        if db < 0.0 {
            return Err(Error::InvalidArgument(format!("negative loss for {kind}")));
        }
        let c = self.components.get_mut(&kind).expect("catalog holds every kind");
        match &mut c.loss {
            BandLoss::Uniform(v) => v.nominal = Db::from_db(db),
            BandLoss::PerBand { o_band, c_band } => {
                o_band.nominal = Db::from_db(db);
                c_band.nominal = Db::from_db(db);
            }
        }
        Ok(())
    }

    pub fn set_fiber_loss(&mut self, band: BandKind, db_per_km: f64) -> Result<()> {
        if db_per_km < 0.0 {
            return Err(Error::InvalidArgument("negative fiber loss".into()));
        }
        let fiber = self.components.get_mut(&ComponentKind::Fiber).expect("fiber");
        if let BandLoss::PerBand { o_band, c_band } = &mut fiber.loss {
            let v = LossValue::exact(db_per_km);
            match band {
                BandKind::OConventional => *o_band = v,
                BandKind::CQuantum => *c_band = v,
            }
        }
        Ok(())
    }

    pub fn set_cwdm_mux_loss(&mut self, channels: u8, db: f64) {
        self.cwdm_mux.insert(channels, Db::from_db(db));
    }

    pub fn cwdm_mux_loss(&self, channels: u8) -> Result<Db> {
        self.cwdm_mux.get(&channels).copied().ok_or(Error::MissingMuxLoss(channels))
    }

    pub fn node_table(&self, kind: NodeKind) -> &NodeActionLossTable {
        &self.nodes[&kind]
    }

    pub fn set_node_loss(&mut self, kind: NodeKind, action: NodeAction, class: SignalClass, db: f64) {
        self.nodes
            .get_mut(&kind)
            .expect("catalog holds every node kind")
            .losses
            .insert((action, class), Db::from_db(db));
    }

    pub fn node_loss(&self, kind: NodeKind, action: NodeAction, class: SignalClass) -> Result<Db> {
        self.node_table(kind).get(action, class)
    }

    pub fn fiber_per_km(&self, band: BandKind) -> Db {
        self.component(ComponentKind::Fiber).nominal(band)
    }

    /// Loss of one element in `band`, checking the operating range.
    pub fn element_loss(&self, kind: ComponentKind, length: Option<Distance>, band: BandKind) -> Result<Db> {
        let c = self.component(kind);
        element_loss(c, length, band)
    }
}

fn element_loss(c: &ComponentSpec, length: Option<Distance>, band: BandKind) -> Result<Db> {
    if !c.operates_in(&Band::of(band)) {
        return Err(Error::ComponentOutOfRange { component: c.name.clone(), band: band.to_string() });
    }
    let per_unit = c.nominal(band);
    Ok(if c.per_km { length.unwrap_or_default().attenuation(per_unit) } else { per_unit })
}

/// Components in signal order; fiber entries carry a length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComponentChain {
    pub items: Vec<(ComponentSpec, Option<Distance>)>,
}

impl ComponentChain {
    pub fn new() -> Self {
        ComponentChain::default()
    }

    pub fn push(mut self, spec: &ComponentSpec) -> Self {
        self.items.push((spec.clone(), None));
        self
    }

    pub fn fiber(mut self, spec: &ComponentSpec, length: Distance) -> Self {
        self.items.push((spec.clone(), Some(length)));
        self
    }

    pub fn concat(mut self, other: &ComponentChain) -> Self {
        self.items.extend(other.items.iter().cloned());
        self
    }
}

/// Sum of member losses in `band`, fiber scaled by its length.
pub fn chain_loss(chain: &ComponentChain, band: BandKind) -> Result<Db> {
    chain.items.iter().map(|(c, len)| element_loss(c, *len, band)).sum()
}

/// Cross loss of a PXC: WDM demux, CWDM demux, switch, CWDM mux, WDM mux.
/// Only the 4-channel CWDM mux is in the default catalog; other channel counts
/// need [`Catalog::set_cwdm_mux_loss`].
pub fn derive_pxc_cross_loss(catalog: &Catalog, n_cwdm_channels: u32) -> Result<Db> {
    let mux = pxc_mux_loss(catalog, n_cwdm_channels)?;
    let wdm = catalog.component(ComponentKind::WdmMux1310_1550).nominal(BandKind::CQuantum);
    let switch = catalog.component(ComponentKind::Switch).nominal(BandKind::CQuantum);
    Ok(wdm + mux + switch + mux + wdm)
}

/// A source wired straight into the PXC switch: switch, CWDM mux, WDM mux.
pub fn derive_pxc_injection_loss(catalog: &Catalog, n_cwdm_channels: u32) -> Result<Db> {
    let mux = pxc_mux_loss(catalog, n_cwdm_channels)?;
    let wdm = catalog.component(ComponentKind::WdmMux1310_1550).nominal(BandKind::CQuantum);
    let switch = catalog.component(ComponentKind::Switch).nominal(BandKind::CQuantum);
    Ok(switch + mux + wdm)
}

fn pxc_mux_loss(catalog: &Catalog, n: u32) -> Result<Db> {
    if !(1..=18).contains(&n) {
        return Err(Error::InvalidChannelCount(n));
    }
    catalog.cwdm_mux_loss(n as u8)
}

/// A photonic cross-connect with a given number of ports. Every signal
/// crosses the same component sequence whatever the port count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PxcNode {
    pub degree: usize,
    pub cwdm_channels_per_band: u32,
}

impl PxcNode {
    pub fn cross_loss(&self, catalog: &Catalog, class: SignalClass) -> Result<Db> {
        match class {
            SignalClass::Entangled => derive_pxc_injection_loss(catalog, self.cwdm_channels_per_band),
            _ => derive_pxc_cross_loss(catalog, self.cwdm_channels_per_band),
        }
    }
}

/// Component-level estimate of the passive OADM, for cross-checking the node
/// table against a chosen filter loss. Conventional drop is left out: its
/// internal composition is not pinned down by the node design.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OadmChainEstimate {
    pub add: Db,
    pub pass: Db,
    pub drop_quantum: Db,
    pub add_entangled: Db,
}

pub fn passive_oadm_chain_estimate(catalog: &Catalog, filter_db: f64, unbalanced_splitter_db: f64) -> OadmChainEstimate {
    let band = BandKind::CQuantum;
    let wdm = catalog.component(ComponentKind::WdmMux1310_1550).nominal(band);
    let circ = catalog.component(ComponentKind::Circulator).nominal(band);
    let split = catalog.component(ComponentKind::Splitter1x2).nominal(band);
    let filter = Db::from_db(filter_db);
    let unbalanced = Db::from_db(unbalanced_splitter_db);
    OadmChainEstimate {
        // WDM demux, circulator, WDM mux, then both splitters.
        add: wdm + circ + wdm + split + unbalanced,
        // Reflected by the filter, then both splitters.
        pass: filter + split + unbalanced,
        drop_quantum: filter + circ + wdm,
        add_entangled: split,
    }
}

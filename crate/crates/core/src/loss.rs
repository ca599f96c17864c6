//! Route pricing, entangled-link losses (sum of both arms), budget checks and
//! the x-closest worst-case tables.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{ComponentKind, SignalClass};
use crate::error::{Error, Result};
use crate::scheduler::{NodeConfiguration, Port};
use crate::topology::{
    enumerate_route, enumerate_route_with, Attachment, Endpoint, Hop, NetworkModel, Route, RouteOptions, TopologyKind,
};
use crate::units::Db;
use crate::wdm_grid::{dwdm_channels_in, BandKind, CwdmChannel, DwdmChannel};

pub const DEFAULT_BUDGET_DB: f64 = 30.0;

/// Tolerable loss; `None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Budget(pub Option<Db>);

impl Budget {
    pub const UNBOUNDED: Budget = Budget(None);

    pub fn db(db: f64) -> Budget {
        Budget(Some(Db::from_db(db)))
    }

    pub fn allows(self, loss: Db) -> bool {
        self.0.is_none_or(|b| loss <= b)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::db(DEFAULT_BUDGET_DB)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(db) => write!(f, "{db} dB"),
            None => f.write_str("unbounded"),
        }
    }
}

/// One budget per signal class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub conventional: Budget,
    pub quantum: Budget,
    pub entangled: Budget,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets::uniform(Budget::default())
    }
}

impl Budgets {
    pub fn uniform(b: Budget) -> Self {
        Budgets { conventional: b, quantum: b, entangled: b }
    }

    pub fn unbounded() -> Self {
        Budgets::uniform(Budget::UNBOUNDED)
    }

    pub fn for_class(&self, class: SignalClass) -> Budget {
        match class {
            SignalClass::Conventional => self.conventional,
            SignalClass::QuantumOneWay => self.quantum,
            SignalClass::Entangled => self.entangled,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub element: String,
    pub loss: Db,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathLossReport {
    pub class: SignalClass,
    /// One route, or the two arms of an entangled link.
    pub routes: Vec<Route>,
    pub per_segment: Vec<Segment>,
    /// Per-route subtotals.
    pub arms: Vec<Db>,
    pub total: Db,
    pub budget: Budget,
    pub feasible: bool,
}

impl PathLossReport {
    /// x-closest class of each route.
    pub fn closeness(&self) -> Vec<usize> {
        self.routes.iter().map(Route::closeness).collect()
    }
}

impl fmt::Display for PathLossReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.feasible { "within" } else { "exceeds" };
        write!(f, "{} {} dB ({verdict} budget {})", self.class, self.total, self.budget)?;
        if self.arms.len() > 1 {
            let arms: Vec<String> = self.arms.iter().map(|a| a.to_string()).collect();
            write!(f, " = {}", arms.join(" + "))?;
        }
        Ok(())
    }
}

/// Per-hop losses of a route in its class's band.
pub fn price_route(net: &NetworkModel, route: &Route) -> Result<Vec<Segment>> {
    let band = route.class.band();
    let cat = &net.catalog;
    route
        .hops
        .iter()
        .map(|h| {
            let loss = match h {
                Hop::Fiber { length, .. } => cat.element_loss(ComponentKind::Fiber, Some(*length), band)?,
                Hop::Component { kind, .. } => cat.element_loss(*kind, None, band)?,
                Hop::Node { kind, action, priced_as, .. } => cat.node_loss(*kind, *action, *priced_as)?,
                Hop::ReturnLoop { .. } => Db::ZERO,
            };
            Ok(Segment { element: h.to_string(), loss })
        })
        .collect()
}

pub fn one_way_loss(net: &NetworkModel, route: &Route, budgets: &Budgets) -> Result<PathLossReport> {
    if route.class == SignalClass::Entangled {
        return Err(Error::InvalidArgument("one-way pricing of an entangled arm; use entangled_link_loss".into()));
    }
    single_route_report(net, route, budgets)
}

/// Loss of a single arm, reported on its own against the entangled budget.
pub fn arm_loss(net: &NetworkModel, route: &Route, budgets: &Budgets) -> Result<PathLossReport> {
    single_route_report(net, route, budgets)
}

fn single_route_report(net: &NetworkModel, route: &Route, budgets: &Budgets) -> Result<PathLossReport> {
    let per_segment = price_route(net, route)?;
    let total: Db = per_segment.iter().map(|s| s.loss).sum();
    let budget = budgets.for_class(route.class);
    Ok(PathLossReport {
        class: route.class,
        routes: vec![route.clone()],
        per_segment,
        arms: vec![total],
        total,
        budget,
        feasible: budget.allows(total),
    })
}

/// Entangled link between two users: `pair.0` goes to `user_a`, `pair.1`
/// to `user_b`, both from `source`. The link loss is the sum of the arms.
pub fn entangled_link_loss(
    net: &NetworkModel,
    source: usize,
    user_a: usize,
    user_b: usize,
    pair: (DwdmChannel, DwdmChannel),
    config: Option<&NodeConfiguration>,
    budgets: &Budgets,
) -> Result<PathLossReport> {
    if pair.0 == pair.1 {
        return Err(Error::InvalidArgument(format!("{} is its own partner; the pair cannot be split", pair.0)));
    }
    if user_a == user_b {
        return Err(Error::InvalidArgument("both photons addressed to the same user".into()));
    }
    let ra = enumerate_route(net, Endpoint::Source(source), user_a, &pair.0, config)?;
    let rb = enumerate_route(net, Endpoint::Source(source), user_b, &pair.1, config)?;
    let mut per_segment = Vec::new();
    let mut arms = Vec::new();
    for (i, r) in [&ra, &rb].into_iter().enumerate() {
        let segs = price_route(net, r)?;
        arms.push(segs.iter().map(|s| s.loss).sum());
        per_segment.extend(segs.into_iter().map(|s| Segment { element: format!("arm {}: {}", i + 1, s.element), ..s }));
    }
    let total = arms.iter().copied().sum();
    let budget = budgets.entangled;
    Ok(PathLossReport {
        class: SignalClass::Entangled,
        routes: vec![ra, rb],
        per_segment,
        arms,
        total,
        budget,
        feasible: budget.allows(total),
    })
}

/// First two DWDM channels of a CWDM channel; enough to address two users.
fn probe_channels(c: &CwdmChannel, net: &NetworkModel) -> Result<(DwdmChannel, DwdmChannel)> {
    let chans = dwdm_channels_in(c, net.spacing);
    match chans.as_slice() {
        [a, b, ..] => Ok((*a, *b)),
        _ => Err(Error::InvalidArgument(format!("{c} holds fewer than two DWDM channels"))),
    }
}

/// A user of access network `an` other than `not`.
fn user_of(net: &NetworkModel, an: usize, not: Option<usize>) -> Result<usize> {
    net.access(an)?
        .users
        .iter()
        .copied()
        .find(|&u| Some(u) != not)
        .ok_or_else(|| Error::InvalidArgument(format!("A{} has too few users", an + 1)))
}

/// Cheapest entangled link between access networks `a` and `b` (equal for a
/// self-pair) over every source that reaches both. Ties go to the lowest
/// source id.
pub fn best_pair_link(net: &NetworkModel, a: usize, b: usize, budgets: &Budgets) -> Result<PathLossReport> {
    let ua = user_of(net, a, None)?;
    let ub = user_of(net, b, Some(ua))?;
    let mut best: Option<PathLossReport> = None;
    for s in &net.sources {
        let report = if net.kind == TopologyKind::Mesh {
            let Attachment::Node(node) = s.attachment else { continue };
            let (q0, q1) = match net.quantum_channels.as_slice() {
                [q0, q1, ..] => (*q0, *q1),
                _ => return Err(Error::InvalidArgument("a mesh needs two quantum CWDM channels".into())),
            };
            let Some(conf) = shortest_arm_configuration(net, node, s.id, (a, q0), (b, q1)) else { continue };
            let pair = (probe_channels(&q0, net)?.0, probe_channels(&q1, net)?.0);
            entangled_link_loss(net, s.id, ua, ub, pair, Some(&conf), budgets)
        } else {
            let ca = net.access(a)?.quantum.ok_or_else(|| Error::InvalidArgument("no quantum channel".into()))?;
            let cb = net.access(b)?.quantum.ok_or_else(|| Error::InvalidArgument("no quantum channel".into()))?;
            let pair = if a == b { probe_channels(&ca, net)? } else { (probe_channels(&ca, net)?.0, probe_channels(&cb, net)?.0) };
            entangled_link_loss(net, s.id, ua, ub, pair, None, budgets)
        };
        let Ok(report) = report else { continue };
        if best.as_ref().is_none_or(|b| report.total < b.total) {
            best = Some(report);
        }
    }
    best.ok_or_else(|| Error::NoRoute {
        channel: "any".into(),
        reason: format!("no source reaches both A{} and A{}", a + 1, b + 1),
    })
}

/// Configuration sending `arm_a.1` to access network `arm_a.0` and `arm_b.1`
/// to `arm_b.0` along shortest paths from a source at `node`.
fn shortest_arm_configuration(
    net: &NetworkModel,
    node: usize,
    source: usize,
    arm_a: (usize, CwdmChannel),
    arm_b: (usize, CwdmChannel),
) -> Option<NodeConfiguration> {
    let paths = net.simple_paths_from(node);
    let mut conf = NodeConfiguration::default();
    for (an, ch) in [arm_a, arm_b] {
        let target = net.access_networks.get(an)?.node?;
        let path = paths
            .iter()
            .filter(|p| p.last().map_or(node, |x| x.1) == target)
            .min_by_key(|p| p.len())?;
        conf.route_path(net, node, Port::Source(source), path, an, ch).ok()?;
    }
    Some(conf)
}

/// A table cell: a priced route, or a combination the design does not use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Value { loss: Db, feasible: bool },
    /// Not offered; a full backbone lap would cost `via_full_backbone`.
    Undefined { via_full_backbone: Option<Db> },
}

impl Cell {
    pub fn loss(&self) -> Option<Db> {
        match self {
            Cell::Value { loss, .. } => Some(*loss),
            Cell::Undefined { .. } => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value { loss, .. } => write!(f, "{loss} dB"),
            Cell::Undefined { .. } => f.write_str("–"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseRow {
    pub closeness: usize,
    pub cells: BTreeMap<SignalClass, Cell>,
    /// Source that produced the entangled cell, if any.
    pub entangled_source: Option<usize>,
}

/// An arm-closeness combination (one entry for one-way, two for entangled).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCase {
    pub closeness: Vec<usize>,
    pub loss: Db,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub worst_feasible: Option<BoundaryCase>,
    pub best_infeasible: Option<BoundaryCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseTable {
    pub rows: Vec<WorstCaseRow>,
    pub boundaries: BTreeMap<SignalClass, Boundary>,
    pub budgets: Budgets,
}

impl WorstCaseTable {
    pub fn cell(&self, closeness: usize, class: SignalClass) -> Option<&Cell> {
        self.rows.iter().find(|r| r.closeness == closeness).and_then(|r| r.cells.get(&class))
    }
}

/// Loss from access network A1 (and its node's source) to every x-closest
/// network, per signal class, with the feasibility boundary of each class.
pub fn worst_case_analysis(net: &NetworkModel, budgets: &Budgets) -> Result<WorstCaseTable> {
    if net.access_networks.is_empty() {
        return Err(Error::InvalidArgument("network has no access networks".into()));
    }
    let max_x = match net.kind {
        TopologyKind::Ring => net.n_access(),
        TopologyKind::OpenRing => net.n_access().saturating_sub(1) + 1,
        TopologyKind::Mesh => net.simple_paths_from(0).iter().map(|p| p.len()).max().unwrap_or(0),
        TopologyKind::Star => 0,
    };
    let mut rows = Vec::new();
    for x in 0..=max_x {
        let mut cells = BTreeMap::new();
        for class in [SignalClass::Conventional, SignalClass::QuantumOneWay] {
            let cell = match one_way_at(net, class, x)? {
                Some(route) => priced_cell(net, &route, budgets)?,
                None => Cell::Undefined { via_full_backbone: None },
            };
            cells.insert(class, cell);
        }
        let (cell, src) = entangled_at(net, x, budgets)?;
        cells.insert(SignalClass::Entangled, cell);
        rows.push(WorstCaseRow { closeness: x, cells, entangled_source: src });
    }
    let boundaries = SignalClass::ALL.iter().map(|&c| (c, boundary(&rows, c, budgets.for_class(c)))).collect();
    Ok(WorstCaseTable { rows, boundaries, budgets: *budgets })
}

fn priced_cell(net: &NetworkModel, route: &Route, budgets: &Budgets) -> Result<Cell> {
    match price_route(net, route) {
        Ok(segs) => {
            let loss: Db = segs.iter().map(|s| s.loss).sum();
            Ok(Cell::Value { loss, feasible: budgets.for_class(route.class).allows(loss) })
        }
        Err(Error::UndefinedNodeAction { .. }) => Ok(Cell::Undefined { via_full_backbone: None }),
        Err(e) => Err(e),
    }
}

fn class_channel(net: &NetworkModel, class: SignalClass, an: usize) -> Option<CwdmChannel> {
    let band = class.band();
    if net.kind == TopologyKind::Mesh {
        let list = match band {
            BandKind::OConventional => &net.conventional_channels,
            BandKind::CQuantum => &net.quantum_channels,
        };
        list.first().copied()
    } else {
        net.access_networks.get(an)?.assigned(band)
    }
}

/// The one-way route from a user of A1 that crosses `x` spans.
fn one_way_at(net: &NetworkModel, class: SignalClass, x: usize) -> Result<Option<Route>> {
    let origin = user_of(net, 0, None)?;
    if x == 0 {
        let Some(c) = class_channel(net, class, 0) else { return Ok(None) };
        let dest = user_of(net, 0, Some(origin))?;
        let ch = probe_channels(&c, net)?.0;
        return Ok(enumerate_route(net, Endpoint::User(origin), dest, &ch, None).ok());
    }
    if net.kind == TopologyKind::Mesh {
        let Some(path) = net.simple_paths_from(0).into_iter().find(|p| p.len() == x) else { return Ok(None) };
        let Some(c) = class_channel(net, class, 0) else { return Ok(None) };
        let end = path.last().unwrap().1;
        let Some(&an) = net.access_at(end).first() else { return Ok(None) };
        let mut conf = NodeConfiguration::default();
        conf.route_path(net, 0, Port::Access(0), &path, an, c)?;
        let dest = user_of(net, an, None)?;
        let ch = probe_channels(&c, net)?.0;
        return Ok(enumerate_route(net, Endpoint::User(origin), dest, &ch, Some(&conf)).ok());
    }
    for an in 0..net.n_access() {
        let Some(c) = class_channel(net, class, an) else { continue };
        let ch = probe_channels(&c, net)?.0;
        let dest = user_of(net, an, Some(origin))?;
        let opts = RouteOptions { force_backbone: true };
        if let Ok(r) = enumerate_route_with(net, Endpoint::User(origin), dest, &ch, None, opts) {
            if r.closeness() == x {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Arm from the source nearest A1 that crosses `x` spans. Ring sources never
/// serve their own node's network, so that cell is undefined there.
fn entangled_at(net: &NetworkModel, x: usize, budgets: &Budgets) -> Result<(Cell, Option<usize>)> {
    let undefined = Cell::Undefined { via_full_backbone: None };
    let node_source = net.sources.iter().find(|s| s.attachment == Attachment::Node(0)).map(|s| s.id);
    let backbone_source =
        net.sources.iter().find(|s| matches!(s.attachment, Attachment::Backbone { next: 0, .. })).map(|s| s.id);
    let local_source = net.sources.iter().find(|s| s.attachment == Attachment::AccessSwitch(0)).map(|s| s.id);

    if net.kind == TopologyKind::Mesh {
        let Some(src) = node_source else { return Ok((undefined, None)) };
        let Some(path) = net.simple_paths_from(0).into_iter().find(|p| p.len() == x) else {
            return Ok((undefined, None));
        };
        let end = path.last().map_or(0, |p| p.1);
        let Some(&an) = net.access_at(end).first() else { return Ok((undefined, None)) };
        let Some(c) = net.quantum_channels.first().copied() else { return Ok((undefined, None)) };
        let mut conf = NodeConfiguration::default();
        conf.route_path(net, 0, Port::Source(src), &path, an, c)?;
        let ch = probe_channels(&c, net)?.0;
        let route = enumerate_route(net, Endpoint::Source(src), user_of(net, an, None)?, &ch, Some(&conf))?;
        return Ok((priced_cell(net, &route, budgets)?, Some(src)));
    }

    let candidates: Vec<usize> = if x == 0 {
        local_source.into_iter().collect()
    } else {
        node_source.or(backbone_source).into_iter().collect()
    };
    for src in candidates {
        for an in 0..net.n_access() {
            let Some(c) = net.access_networks[an].quantum else { continue };
            let ch = probe_channels(&c, net)?.0;
            let Ok(route) = enumerate_route(net, Endpoint::Source(src), user_of(net, an, None)?, &ch, None) else {
                continue;
            };
            if route.closeness() == x {
                return Ok((priced_cell(net, &route, budgets)?, Some(src)));
            }
        }
    }
    if x == 0 {
        if let Some(src) = node_source {
            // A node's own network is only reachable by a full lap.
            let c = net.access_networks[0].quantum;
            if let Some(c) = c {
                let ch = probe_channels(&c, net)?.0;
                if let Ok(route) = enumerate_route(net, Endpoint::Source(src), user_of(net, 0, None)?, &ch, None) {
                    let via = price_route(net, &route).ok().map(|s| s.iter().map(|s| s.loss).sum());
                    return Ok((Cell::Undefined { via_full_backbone: via }, Some(src)));
                }
            }
        }
    }
    Ok((undefined, None))
}

fn boundary(rows: &[WorstCaseRow], class: SignalClass, budget: Budget) -> Boundary {
    let mut cases: Vec<BoundaryCase> = Vec::new();
    let valued: Vec<(usize, Db, Option<usize>)> = rows
        .iter()
        .filter_map(|r| {
            r.cells.get(&class).and_then(Cell::loss).map(|l| (r.closeness, l, r.entangled_source))
        })
        .collect();
    if class == SignalClass::Entangled {
        for (i, &(xi, li, si)) in valued.iter().enumerate() {
            for &(xj, lj, sj) in &valued[i..] {
                if si == sj {
                    cases.push(BoundaryCase { closeness: vec![xi, xj], loss: li + lj });
                }
            }
        }
    } else {
        cases.extend(valued.iter().map(|&(x, l, _)| BoundaryCase { closeness: vec![x], loss: l }));
    }
    // Prefer the larger minimum arm on ties: (1, 2) over (0, 3).
    let key = |c: &BoundaryCase| (c.loss, c.closeness[0]);
    let worst_feasible = cases.iter().filter(|c| budget.allows(c.loss)).max_by_key(|c| key(c)).cloned();
    let best_infeasible = cases
        .iter()
        .filter(|c| !budget.allows(c.loss))
        .min_by_key(|c| (c.loss, std::cmp::Reverse(c.closeness[0])))
        .cloned();
    Boundary { worst_feasible, best_infeasible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::NodeKind;
    use crate::topology::build_reference_network;

    fn db(x: f64) -> Db {
        Db::from_db(x)
    }

    fn column(t: &WorstCaseTable, class: SignalClass) -> Vec<Option<Db>> {
        t.rows.iter().map(|r| r.cells[&class].loss()).collect()
    }

    #[test]
    fn ring_table() {
        let net = build_reference_network(TopologyKind::Ring, 3, Some(NodeKind::PassiveOadm)).unwrap();
        let t = worst_case_analysis(&net, &Budgets::default()).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(
            column(&t, SignalClass::QuantumOneWay),
            vec![Some(db(2.4)), Some(db(18.5)), Some(db(24.1)), Some(db(29.7))]
        );
        assert_eq!(
            column(&t, SignalClass::Conventional),
            vec![Some(db(2.64)), Some(db(20.66)), Some(db(26.74)), Some(db(32.82))]
        );
        assert_eq!(column(&t, SignalClass::Entangled), vec![None, Some(db(11.0)), Some(db(16.6)), Some(db(22.2))]);
        assert_eq!(
            t.cell(0, SignalClass::Entangled),
            Some(&Cell::Undefined { via_full_backbone: Some(db(22.2)) })
        );
        let ent = &t.boundaries[&SignalClass::Entangled];
        assert_eq!(ent.worst_feasible, Some(BoundaryCase { closeness: vec![1, 2], loss: db(27.6) }));
    }

    #[test]
    fn mesh_table() {
        let net = build_reference_network(TopologyKind::Mesh, 4, None).unwrap();
        let t = worst_case_analysis(&net, &Budgets::default()).unwrap();
        assert_eq!(
            column(&t, SignalClass::QuantumOneWay),
            vec![Some(db(2.4)), Some(db(18.6)), Some(db(23.4)), Some(db(28.2))]
        );
        assert_eq!(
            column(&t, SignalClass::Entangled),
            vec![Some(db(7.4)), Some(db(12.2)), Some(db(17.0)), Some(db(21.8))]
        );
        let ent = &t.boundaries[&SignalClass::Entangled];
        assert_eq!(ent.worst_feasible, Some(BoundaryCase { closeness: vec![1, 2], loss: db(29.2) }));
    }

    #[test]
    fn zero_budget_makes_every_loss_infeasible() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let t = worst_case_analysis(&net, &Budgets::uniform(Budget::db(0.0))).unwrap();
        for row in &t.rows {
            for cell in row.cells.values() {
                if let Cell::Value { loss, feasible } = cell {
                    assert!(*loss > Db::ZERO && !feasible);
                }
            }
        }
    }

    #[test]
    fn report_total_is_segment_sum() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let r = best_pair_link(&net, 0, 1, &Budgets::default()).unwrap();
        assert_eq!(r.total, r.per_segment.iter().map(|s| s.loss).sum::<Db>());
        assert_eq!(r.total, db(27.6));
        assert_eq!(r.closeness(), vec![1, 2]);
    }

    #[test]
    fn self_pair_in_ring_uses_previous_node() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let r = best_pair_link(&net, 0, 0, &Budgets::default()).unwrap();
        assert_eq!(r.total, db(22.0));
    }

    #[test]
    fn entanglement_only_arms() {
        let net = build_reference_network(TopologyKind::Ring, 8, Some(NodeKind::CwdmOadmSimple)).unwrap();
        let r = best_pair_link(&net, 6, 7, &Budgets::default()).unwrap();
        assert_eq!(r.arms, vec![db(14.0), db(15.3)]);
        assert_eq!(r.total, db(29.3));
        assert!(r.feasible);
    }

    #[test]
    fn degenerate_pair_rejected() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let ch = dwdm_channels_in(&net.access_networks[1].quantum.unwrap(), net.spacing)[0];
        let u = net.access_networks[1].users.clone();
        assert!(entangled_link_loss(&net, 0, u[0], u[1], (ch, ch), None, &Budgets::default()).is_err());
    }
}

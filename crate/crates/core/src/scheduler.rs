//! Switch configurations for photonic cross-connect meshes, and the search
//! for a short list of configurations that together serve every demand.
//!
//! A configuration maps `(node, input port, CWDM channel)` to an output
//! port. Keeping that map injective per node and channel is what makes a
//! span carry a channel for at most one path in each direction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{NodeKind, SignalClass};
use crate::error::{Error, Result};
use crate::loss::{entangled_link_loss, one_way_loss, price_route, Budgets, PathLossReport};
use crate::topology::{enumerate_route, Attachment, Endpoint, NetworkModel, Route, TopologyKind};
use crate::units::Db;
use crate::wdm_grid::{dwdm_channels_in, CwdmChannel, DwdmChannel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    /// Towards (or from) an access network's feeder.
    Access(usize),
    /// A backbone span.
    Link(usize),
    /// A pair source sitting at the node.
    Source(usize),
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::Access(a) => write!(f, "A{}", a + 1),
            Port::Link(l) => write!(f, "span {}", l + 1),
            Port::Source(s) => write!(f, "S{}", s + 1),
        }
    }
}

pub type SwitchKey = (usize, Port, CwdmChannel);

/// Switch state of every node in the mesh.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeConfiguration {
    entries: BTreeMap<SwitchKey, Port>,
}

impl NodeConfiguration {
    pub fn output(&self, node: usize, input: Port, channel: CwdmChannel) -> Option<Port> {
        self.entries.get(&(node, input, channel)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SwitchKey, &Port)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds one setting; rejects a second output for the same input or a
    /// second input for the same output.
    pub fn insert(&mut self, node: usize, input: Port, channel: CwdmChannel, output: Port) -> Result<()> {
        if let Some(prev) = self.entries.get(&(node, input, channel)) {
            if *prev == output {
                return Ok(());
            }
            return Err(Error::InvalidArgument(format!(
                "B{} already switches {channel} from {input} to {prev}",
                node + 1
            )));
        }
        if let Some(((_, other, _), _)) =
            self.entries.iter().find(|((n, _, c), o)| *n == node && *c == channel && **o == output)
        {
            return Err(Error::InvalidArgument(format!(
                "B{} already switches {channel} from {other} to {output}",
                node + 1
            )));
        }
        self.entries.insert((node, input, channel), output);
        Ok(())
    }

    /// Adds a setting without any checks, for building broken states.
    pub fn insert_unchecked(&mut self, node: usize, input: Port, channel: CwdmChannel, output: Port) {
        self.entries.insert((node, input, channel), output);
    }

    /// Switches `channel` from `start_port` at `start` along `path` (as
    /// returned by [`NetworkModel::simple_paths_from`]) down to `dest`.
    pub fn route_path(
        &mut self,
        net: &NetworkModel,
        start: usize,
        start_port: Port,
        path: &[(usize, usize)],
        dest: usize,
        channel: CwdmChannel,
    ) -> Result<()> {
        for (key, out) in leg_entries(net, start, start_port, path, dest, channel)? {
            self.insert(key.0, key.1, key.2, out)?;
        }
        Ok(())
    }
}

fn leg_entries(
    net: &NetworkModel,
    start: usize,
    start_port: Port,
    path: &[(usize, usize)],
    dest: usize,
    channel: CwdmChannel,
) -> Result<Vec<(SwitchKey, Port)>> {
    let mut out = Vec::with_capacity(path.len() + 1);
    let mut at = start;
    let mut port = start_port;
    for &(link, next) in path {
        let l = net.links.get(link).ok_or_else(|| Error::Topology(format!("no span {}", link + 1)))?;
        if l.next_from(at) != Some(next) {
            return Err(Error::Topology(format!("span {} does not lead from B{} to B{}", link + 1, at + 1, next + 1)));
        }
        out.push(((at, port, channel), Port::Link(link)));
        port = Port::Link(link);
        at = next;
    }
    if net.access(dest)?.node != Some(at) {
        return Err(Error::Topology(format!("A{} is not attached to B{}", dest + 1, at + 1)));
    }
    out.push(((at, port, channel), Port::Access(dest)));
    Ok(out)
}

fn reverse_path(start: usize, path: &[(usize, usize)]) -> (usize, Vec<(usize, usize)>) {
    let nodes: Vec<usize> = std::iter::once(start).chain(path.iter().map(|p| p.1)).collect();
    let rev = path.iter().enumerate().rev().map(|(i, &(link, _))| (link, nodes[i])).collect();
    (*nodes.last().unwrap(), rev)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandKind {
    /// Bidirectional one-way path, quantum and conventional together.
    Direct,
    Entangled,
}

/// A pair of access networks to connect, stored with `a <= b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Demand {
    pub kind: DemandKind,
    pub a: usize,
    pub b: usize,
}

impl Demand {
    pub fn direct(a: usize, b: usize) -> Demand {
        Demand { kind: DemandKind::Direct, a: a.min(b), b: a.max(b) }
    }

    pub fn entangled(a: usize, b: usize) -> Demand {
        Demand { kind: DemandKind::Entangled, a: a.min(b), b: a.max(b) }
    }

    pub fn is_self_pair(&self) -> bool {
        self.a == self.b
    }
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DemandKind::Direct => "direct",
            DemandKind::Entangled => "entangled",
        };
        write!(f, "{kind} (A{}, A{})", self.a + 1, self.b + 1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSet {
    pub direct: BTreeSet<(usize, usize)>,
    pub entangled: BTreeSet<(usize, usize)>,
}

impl DemandSet {
    /// Every direct pair and every entangled pair; self-pairs optional.
    pub fn all_pairs(n: usize, include_self: bool) -> DemandSet {
        let mut set = DemandSet::default();
        for a in 0..n {
            for b in a..n {
                if a != b {
                    set.direct.insert((a, b));
                    set.entangled.insert((a, b));
                } else if include_self {
                    set.entangled.insert((a, a));
                }
            }
        }
        set
    }

    pub fn from_demands(demands: impl IntoIterator<Item = Demand>) -> DemandSet {
        let mut set = DemandSet::default();
        for d in demands {
            match d.kind {
                DemandKind::Direct => set.direct.insert((d.a, d.b)),
                DemandKind::Entangled => set.entangled.insert((d.a, d.b)),
            };
        }
        set
    }

    /// Demands in identifier order.
    pub fn demands(&self) -> Vec<Demand> {
        let mut v: Vec<Demand> = self
            .direct
            .iter()
            .map(|&(a, b)| Demand::direct(a, b))
            .chain(self.entangled.iter().map(|&(a, b)| Demand::entangled(a, b)))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn len(&self) -> usize {
        self.demands().len()
    }

    pub fn is_empty(&self) -> bool {
        self.direct.is_empty() && self.entangled.is_empty()
    }

    pub fn validate(&self, n_access: usize) -> Result<()> {
        for d in self.demands() {
            if d.b >= n_access {
                return Err(Error::InvalidArgument(format!("{d} names an unknown access network")));
            }
            if d.kind == DemandKind::Direct && d.is_self_pair() {
                return Err(Error::InvalidArgument(format!(
                    "{d}: paths inside one access network use its return loop"
                )));
            }
        }
        Ok(())
    }
}

/// One switched path of a realization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub start: usize,
    pub start_port: Port,
    pub path: Vec<(usize, usize)>,
    pub dest: usize,
    pub channel: CwdmChannel,
}

/// How one demand is carried inside a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub demand: Demand,
    pub source: Option<usize>,
    pub legs: Vec<Leg>,
    /// Loss per priced class: quantum and conventional for a direct path,
    /// the arm sum for an entangled pair.
    pub losses: Vec<(SignalClass, Db)>,
}

impl Realization {
    fn entries(&self, net: &NetworkModel) -> Vec<(SwitchKey, Port)> {
        self.legs
            .iter()
            .flat_map(|l| leg_entries(net, l.start, l.start_port, &l.path, l.dest, l.channel).unwrap_or_default())
            .collect()
    }

    pub fn worst_loss(&self) -> Db {
        self.losses.iter().map(|l| l.1).max().unwrap_or(Db::ZERO)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledConfiguration {
    pub config: NodeConfiguration,
    pub served: Vec<Realization>,
}

impl ScheduledConfiguration {
    pub fn demands(&self) -> Vec<Demand> {
        self.served.iter().map(|r| r.demand).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub configurations: Vec<ScheduledConfiguration>,
    pub coverage: BTreeMap<Demand, usize>,
    /// Counting bound from access-port capacity.
    pub lower_bound: usize,
    /// Exhaustive search finished and found this length minimal.
    pub proven_minimal: bool,
    /// The greedy fallback was used.
    pub non_minimal_possible: bool,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleOptions {
    pub budgets: Budgets,
    /// Search steps before falling back to the greedy cover.
    pub step_budget: u64,
    /// Largest number of access networks searched exhaustively.
    pub exact_max_access: usize,
    /// Try spreading each demand kind evenly before an unrestricted search.
    pub balanced: bool,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions { budgets: Budgets::default(), step_budget: 2_000_000, exact_max_access: 6, balanced: true }
    }
}

type Mask = u128;
const MAX_DEMANDS: usize = 128;

fn bit(i: usize) -> Mask {
    1 << i
}

fn bits(m: Mask) -> impl Iterator<Item = usize> {
    (0..MAX_DEMANDS).filter(move |&i| m & bit(i) != 0)
}

/// All in-budget ways to carry each demand, cheapest first.
struct OptionTable {
    demands: Vec<Demand>,
    options: Vec<Vec<Realization>>,
    entries: Vec<Vec<Vec<(SwitchKey, Port)>>>,
    quantum_slots: usize,
}

/// Emitter node, direction, hops, drop node and class of a priced path.
type PathKey = (usize, bool, Vec<(usize, usize)>, usize, SignalClass);

struct Pricer<'a> {
    net: &'a NetworkModel,
    cache: HashMap<PathKey, Option<Db>>,
}

impl<'a> Pricer<'a> {
    fn leg(&mut self, leg: &Leg, class: SignalClass) -> Option<Db> {
        let is_source = matches!(leg.start_port, Port::Source(_));
        let key = (leg.start, is_source, leg.path.clone(), leg.dest, class);
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let v = self.price(leg).ok();
        self.cache.insert(key, v);
        v
    }

    fn price(&self, leg: &Leg) -> Result<Db> {
        let net = self.net;
        let mut conf = NodeConfiguration::default();
        conf.route_path(net, leg.start, leg.start_port, &leg.path, leg.dest, leg.channel)?;
        let ch = first_dwdm(net, &leg.channel)?;
        let from = match leg.start_port {
            Port::Source(s) => Endpoint::Source(s),
            Port::Access(a) => Endpoint::User(first_user(net, a, None)?),
            Port::Link(_) => return Err(Error::InvalidArgument("a leg cannot start on a span".into())),
        };
        let to = first_user(net, leg.dest, from_user(from))?;
        let route = enumerate_route(net, from, to, &ch, Some(&conf))?;
        Ok(price_route(net, &route)?.iter().map(|s| s.loss).sum())
    }
}

fn from_user(e: Endpoint) -> Option<usize> {
    match e {
        Endpoint::User(u) => Some(u),
        Endpoint::Source(_) => None,
    }
}

fn first_dwdm(net: &NetworkModel, c: &CwdmChannel) -> Result<DwdmChannel> {
    dwdm_channels_in(c, net.spacing)
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("{c} holds no DWDM channel")))
}

fn first_user(net: &NetworkModel, an: usize, not: Option<usize>) -> Result<usize> {
    net.access(an)?
        .users
        .iter()
        .copied()
        .find(|&u| Some(u) != not)
        .ok_or_else(|| Error::InvalidArgument(format!("A{} has too few users", an + 1)))
}

fn paths_between(net: &NetworkModel, from: usize, to: usize) -> Vec<Vec<(usize, usize)>> {
    let mut paths: Vec<_> =
        net.simple_paths_from(from).into_iter().filter(|p| p.last().map_or(from, |x| x.1) == to).collect();
    paths.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    paths
}

fn node_of(net: &NetworkModel, an: usize) -> Result<usize> {
    net.access(an)?.node.ok_or_else(|| Error::Topology(format!("A{} has no backbone node", an + 1)))
}

/// Every in-budget realization of `d`, cheapest first.
fn demand_options(
    net: &NetworkModel,
    pricer: &mut Pricer<'_>,
    d: Demand,
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
) -> Result<Vec<Realization>> {
    let mut out = Vec::new();
    let na = node_of(net, d.a)?;
    let nb = node_of(net, d.b)?;
    match d.kind {
        DemandKind::Direct => {
            for path in paths_between(net, na, nb) {
                let (end, back) = reverse_path(na, &path);
                for (i, &cq) in quantum.iter().enumerate() {
                    let fwd = Leg { start: na, start_port: Port::Access(d.a), path: path.clone(), dest: d.b, channel: cq };
                    let Some(lq) = pricer.leg(&fwd, SignalClass::QuantumOneWay) else { continue };
                    if !budgets.quantum.allows(lq) {
                        continue;
                    }
                    let rev = Leg { start: end, start_port: Port::Access(d.b), path: back.clone(), dest: d.a, channel: cq };
                    let mut legs = vec![fwd.clone(), rev];
                    let mut losses = vec![(SignalClass::QuantumOneWay, lq)];
                    if let Some(&cc) = conventional.get(i % conventional.len().max(1)) {
                        let cf = Leg { channel: cc, ..fwd };
                        let Some(lc) = pricer.leg(&cf, SignalClass::Conventional) else { continue };
                        if !budgets.conventional.allows(lc) {
                            continue;
                        }
                        let cr = Leg { start: end, start_port: Port::Access(d.b), path: back.clone(), dest: d.a, channel: cc };
                        legs.push(cf);
                        legs.push(cr);
                        losses.push((SignalClass::Conventional, lc));
                    }
                    out.push(Realization { demand: d, source: None, legs, losses });
                }
            }
        }
        DemandKind::Entangled => {
            for s in &net.sources {
                let Attachment::Node(n) = s.attachment else { continue };
                let to_a = paths_between(net, n, na);
                let to_b = paths_between(net, n, nb);
                for (i, &c1) in quantum.iter().enumerate() {
                    for (j, &c2) in quantum.iter().enumerate() {
                        if i == j || (d.is_self_pair() && j < i) {
                            continue;
                        }
                        for pa in &to_a {
                            let la_leg = Leg { start: n, start_port: Port::Source(s.id), path: pa.clone(), dest: d.a, channel: c1 };
                            let Some(la) = pricer.leg(&la_leg, SignalClass::Entangled) else { continue };
                            for pb in &to_b {
                                let lb_leg =
                                    Leg { start: n, start_port: Port::Source(s.id), path: pb.clone(), dest: d.b, channel: c2 };
                                let Some(lb) = pricer.leg(&lb_leg, SignalClass::Entangled) else { continue };
                                if !budgets.entangled.allows(la + lb) {
                                    continue;
                                }
                                out.push(Realization {
                                    demand: d,
                                    source: Some(s.id),
                                    legs: vec![la_leg.clone(), lb_leg],
                                    losses: vec![(SignalClass::Entangled, la + lb)],
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    // Stable: cheapest first, generation order breaks ties.
    out.sort_by_key(|r| r.worst_loss());
    Ok(out)
}

fn check_mesh(net: &NetworkModel, quantum: &[CwdmChannel]) -> Result<()> {
    if net.kind != TopologyKind::Mesh || net.nodes.iter().any(|n| n.kind != NodeKind::ActivePxc) {
        return Err(Error::InvalidArgument("scheduling needs a mesh of active_pxc nodes".into()));
    }
    if quantum.is_empty() {
        return Err(Error::InvalidArgument("no quantum CWDM channels to schedule".into()));
    }
    Ok(())
}

fn option_table(
    net: &NetworkModel,
    demands: &DemandSet,
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
) -> Result<OptionTable> {
    check_mesh(net, quantum)?;
    demands.validate(net.n_access())?;
    let list = demands.demands();
    if list.len() > MAX_DEMANDS {
        return Err(Error::InvalidArgument(format!("at most {MAX_DEMANDS} demands can be scheduled")));
    }
    let mut pricer = Pricer { net, cache: HashMap::new() };
    let mut options = Vec::with_capacity(list.len());
    for &d in &list {
        let opts = demand_options(net, &mut pricer, d, quantum, conventional, budgets)?;
        if opts.is_empty() {
            let free = demand_options(net, &mut pricer, d, quantum, conventional, &Budgets::unbounded())?;
            let reason = match free.iter().map(Realization::worst_loss).min() {
                Some(min) => format!("minimum achievable loss {min} dB exceeds the budget"),
                None => "no route exists with the given channels and sources".to_string(),
            };
            return Err(Error::UnservableDemand { demand: d.to_string(), reason });
        }
        options.push(opts);
    }
    // Options that collide with themselves (a span direction reused by two
    // legs on one channel) are dropped once here so the search never sees them.
    let mut entries = Vec::with_capacity(options.len());
    for (d, os) in list.iter().zip(options.iter_mut()) {
        let mut kept = Vec::with_capacity(os.len());
        let mut es = Vec::with_capacity(os.len());
        for o in os.drain(..) {
            let e = o.entries(net);
            if Usage::default().fits_alone(&e) {
                kept.push(o);
                es.push(e);
            }
        }
        if kept.is_empty() {
            return Err(Error::UnservableDemand {
                demand: d.to_string(),
                reason: "every route reuses a span on one channel".to_string(),
            });
        }
        *os = kept;
        entries.push(es);
    }
    Ok(OptionTable { demands: list, options, entries, quantum_slots: quantum.len() })
}

/// Exhaustive realizability of demand subsets, memoized.
struct Realizer<'t> {
    table: &'t OptionTable,
    memo: HashMap<Mask, Option<Vec<usize>>>,
    steps: u64,
    step_budget: u64,
    exhausted: bool,
}

#[derive(Default)]
struct Usage {
    keys: HashSet<SwitchKey>,
    outs: HashSet<(usize, CwdmChannel, Port)>,
}

impl Usage {
    fn fits_alone(&self, entries: &[(SwitchKey, Port)]) -> bool {
        let mut keys = HashSet::new();
        let mut outs = HashSet::new();
        entries.iter().all(|&(k, o)| keys.insert(k) && outs.insert((k.0, k.2, o)))
    }

    /// Entries of a table option are already consistent among themselves.
    fn fits(&self, entries: &[(SwitchKey, Port)]) -> bool {
        entries.iter().all(|&(k, o)| !self.keys.contains(&k) && !self.outs.contains(&(k.0, k.2, o)))
    }

    fn add(&mut self, entries: &[(SwitchKey, Port)]) {
        for &(k, o) in entries {
            self.keys.insert(k);
            self.outs.insert((k.0, k.2, o));
        }
    }

    fn remove(&mut self, entries: &[(SwitchKey, Port)]) {
        for &(k, o) in entries {
            self.keys.remove(&k);
            self.outs.remove(&(k.0, k.2, o));
        }
    }
}

impl<'t> Realizer<'t> {
    fn new(table: &'t OptionTable, step_budget: u64) -> Self {
        Realizer { table, memo: HashMap::new(), steps: 0, step_budget, exhausted: false }
    }

    /// Access drops are the scarce resource: each access network takes at
    /// most one arriving path per quantum channel.
    fn slots_ok(&self, mask: Mask) -> bool {
        let mut count: HashMap<usize, usize> = HashMap::new();
        for i in bits(mask) {
            let d = self.table.demands[i];
            *count.entry(d.a).or_default() += 1;
            *count.entry(d.b).or_default() += 1;
        }
        count.values().all(|&c| c <= self.table.quantum_slots)
    }

    /// Chosen option per demand of `mask` (in index order), if any.
    fn realize(&mut self, mask: Mask) -> Option<Vec<usize>> {
        if let Some(r) = self.memo.get(&mask) {
            return r.clone();
        }
        if !self.slots_ok(mask) {
            self.memo.insert(mask, None);
            return None;
        }
        let mut order: Vec<usize> = bits(mask).collect();
        order.sort_by_key(|&i| (self.table.options[i].len(), i));
        let mut chosen = vec![usize::MAX; order.len()];
        let mut usage = Usage::default();
        let before = self.exhausted;
        let found = self.dfs(&order, 0, &mut usage, &mut chosen);
        let result = found.then(|| {
            let mut by_index: Vec<(usize, usize)> = order.iter().copied().zip(chosen.iter().copied()).collect();
            by_index.sort();
            by_index.into_iter().map(|p| p.1).collect::<Vec<_>>()
        });
        if (result.is_some() || !self.exhausted || before)
            && (result.is_some() || !self.exhausted) {
                self.memo.insert(mask, result.clone());
            }
        result
    }

    fn dfs(&mut self, order: &[usize], k: usize, usage: &mut Usage, chosen: &mut [usize]) -> bool {
        if k == order.len() {
            return true;
        }
        let d = order[k];
        for (oi, entries) in self.table.entries[d].iter().enumerate() {
            self.steps += 1;
            if self.steps > self.step_budget {
                self.exhausted = true;
                return false;
            }
            if !usage.fits(entries) {
                continue;
            }
            usage.add(entries);
            // Forward check: every later demand keeps at least one option.
            // Scanned options count as steps.
            let mut scanned = 0;
            let viable = order[k + 1..].iter().all(|&e| {
                self.table.entries[e].iter().any(|en| {
                    scanned += 1;
                    usage.fits(en)
                })
            });
            self.steps += scanned;
            if viable {
                chosen[k] = oi;
                if self.dfs(order, k + 1, usage, chosen) {
                    return true;
                }
            }
            usage.remove(entries);
            if self.exhausted {
                return false;
            }
        }
        false
    }
}

/// Counting bound: every demand takes two access drops, and an access
/// network offers one drop per quantum channel.
fn lower_bound(table: &OptionTable, n_access: usize) -> usize {
    let n = table.demands.len();
    if n == 0 {
        return 0;
    }
    let q = table.quantum_slots.max(1);
    let total = (2 * n).div_ceil(n_access.max(1) * q);
    let mut per_an: HashMap<usize, usize> = HashMap::new();
    for d in &table.demands {
        *per_an.entry(d.a).or_default() += 1;
        *per_an.entry(d.b).or_default() += 1;
    }
    let local = per_an.values().map(|&c| c.div_ceil(q)).max().unwrap_or(1);
    total.max(local).max(1)
}

struct Packer<'r, 't> {
    realizer: &'r mut Realizer<'t>,
    k: usize,
    caps: Option<(usize, usize)>,
}

impl Packer<'_, '_> {
    fn pack(&mut self, order: &[usize], bins: &mut Vec<Mask>) -> bool {
        let Some((&d, rest)) = order.split_first() else { return true };
        let kind = self.realizer.table.demands[d].kind;
        let used = bins.iter().position(|&b| b == 0).unwrap_or(bins.len());
        for j in 0..self.k.min(used + 1) {
            if let Some((cd, ce)) = self.caps {
                let cap = if kind == DemandKind::Direct { cd } else { ce };
                let same = bits(bins[j]).filter(|&i| self.realizer.table.demands[i].kind == kind).count();
                if same >= cap {
                    continue;
                }
            }
            let next = bins[j] | bit(d);
            if self.realizer.realize(next).is_some() {
                let prev = bins[j];
                bins[j] = next;
                if self.pack(rest, bins) {
                    return true;
                }
                bins[j] = prev;
            }
            if self.realizer.exhausted {
                return false;
            }
        }
        false
    }
}

/// A short list of configurations serving every demand. Small instances
/// are searched exhaustively for the fewest configurations; larger ones,
/// or searches that run out of steps, fall back to packing demands greedily
/// in identifier order.
pub fn schedule(
    net: &NetworkModel,
    demands: &DemandSet,
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    opts: &ScheduleOptions,
) -> Result<Schedule> {
    let table = option_table(net, demands, quantum, conventional, &opts.budgets)?;
    let n = table.demands.len();
    let lb = lower_bound(&table, net.n_access());
    let mut realizer = Realizer::new(&table, opts.step_budget);
    let order: Vec<usize> = (0..n).collect();

    let mut found: Option<(Vec<Mask>, bool)> = None;
    if n > 0 && net.n_access() <= opts.exact_max_access {
        let n_direct = table.demands.iter().filter(|d| d.kind == DemandKind::Direct).count();
        let n_ent = n - n_direct;
        'outer: for k in lb..=n {
            let mut attempts = Vec::new();
            if opts.balanced {
                attempts.push(Some((n_direct.div_ceil(k), n_ent.div_ceil(k))));
            }
            attempts.push(None);
            for caps in attempts {
                let mut bins = vec![0; k];
                let mut packer = Packer { realizer: &mut realizer, k, caps };
                if packer.pack(&order, &mut bins) {
                    bins.retain(|&b| b != 0);
                    found = Some((bins, true));
                    break 'outer;
                }
                if realizer.exhausted {
                    break 'outer;
                }
            }
        }
    }

    let (bins, exact) = match found {
        Some(f) => f,
        None => {
            let mut greedy = Realizer::new(&table, opts.step_budget);
            (greedy_cover(&mut greedy, n), false)
        }
    };
    let proven_minimal = exact && (bins.len() == lb || !realizer.exhausted);

    let mut configurations = Vec::new();
    let mut coverage = BTreeMap::new();
    let mut full = Realizer::new(&table, u64::MAX);
    for (ci, &mask) in bins.iter().enumerate() {
        let choice = full.realize(mask).expect("packed configuration is realizable");
        let mut config = NodeConfiguration::default();
        let mut served = Vec::new();
        for (i, oi) in bits(mask).zip(choice) {
            let r = table.options[i][oi].clone();
            for (key, out) in &table.entries[i][oi] {
                config.insert(key.0, key.1, key.2, *out)?;
            }
            coverage.insert(r.demand, ci);
            served.push(r);
        }
        configurations.push(ScheduledConfiguration { config, served });
    }
    Ok(Schedule { configurations, coverage, lower_bound: lb, proven_minimal, non_minimal_possible: !proven_minimal })
}

fn greedy_cover(realizer: &mut Realizer<'_>, n: usize) -> Vec<Mask> {
    let mut left: Vec<usize> = (0..n).collect();
    let mut bins = Vec::new();
    while !left.is_empty() {
        let mut mask = 0;
        left.retain(|&d| {
            let next = mask | bit(d);
            // Each probe gets the full step allowance; running out counts as
            // not fitting. A lone demand always fits on its first option.
            realizer.steps = 0;
            realizer.exhausted = false;
            if realizer.realize(next).is_some() {
                mask = next;
                false
            } else {
                true
            }
        });
        bins.push(mask);
    }
    bins
}

/// Cheapest way to carry `d` alone within `budgets`, if there is one.
pub fn cheapest_realization(
    net: &NetworkModel,
    d: Demand,
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
) -> Result<Option<Realization>> {
    check_mesh(net, quantum)?;
    let mut pricer = Pricer { net, cache: HashMap::new() };
    Ok(demand_options(net, &mut pricer, d, quantum, conventional, budgets)?.into_iter().next())
}

/// Loss reports of a realization, priced against `budgets`.
pub fn realization_reports(
    net: &NetworkModel,
    r: &Realization,
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
) -> Result<Vec<PathLossReport>> {
    let mut conf = NodeConfiguration::default();
    for (key, out) in r.entries(net) {
        conf.insert(key.0, key.1, key.2, out)?;
    }
    trace_demand(net, &conf, r.demand, quantum, conventional, budgets)
        .map_err(|reason| Error::UnservableDemand { demand: r.demand.to_string(), reason })
}

/// Carries `demands` together in one configuration, if possible.
pub fn realize_configuration(
    net: &NetworkModel,
    demands: &[Demand],
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
) -> Result<Option<ScheduledConfiguration>> {
    let set = DemandSet::from_demands(demands.iter().copied());
    let table = option_table(net, &set, quantum, conventional, budgets)?;
    let mut realizer = Realizer::new(&table, u64::MAX);
    let mask = (0..table.demands.len()).fold(0, |m, i| m | bit(i));
    let Some(choice) = realizer.realize(mask) else { return Ok(None) };
    let mut config = NodeConfiguration::default();
    let mut served = Vec::new();
    for (i, oi) in (0..table.demands.len()).zip(choice) {
        for (key, out) in &table.entries[i][oi] {
            config.insert(key.0, key.1, key.2, *out)?;
        }
        served.push(table.options[i][oi].clone());
    }
    Ok(Some(ScheduledConfiguration { config, served }))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NotInjective { node: usize, channel: CwdmChannel, output: Port, inputs: Vec<Port> },
    ForeignChannel { node: usize, channel: CwdmChannel },
    BadPort { node: usize, port: Port },
    Unrouted { demand: Demand, reason: String },
    /// Two served demands share a span direction (or an access drop) on one
    /// channel.
    ChannelConflict { resource: String, channel: CwdmChannel, demands: Vec<Demand> },
    OverBudget { demand: Demand, report: Box<PathLossReport> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotInjective { node, channel, output, inputs } => {
                let ins: Vec<String> = inputs.iter().map(|p| p.to_string()).collect();
                write!(f, "B{}: {channel} from {} all switched to {output}", node + 1, ins.join(", "))
            }
            Violation::ForeignChannel { node, channel } => {
                write!(f, "B{}: {channel} is not one of the planned channels", node + 1)
            }
            Violation::BadPort { node, port } => write!(f, "B{}: {port} is not a port of this node", node + 1),
            Violation::Unrouted { demand, reason } => write!(f, "{demand}: {reason}"),
            Violation::ChannelConflict { resource, channel, demands } => {
                let ds: Vec<String> = demands.iter().map(|d| d.to_string()).collect();
                write!(f, "{resource} carries {channel} for {}", ds.join(" and "))
            }
            Violation::OverBudget { demand, report } => write!(f, "{demand}: {report}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigurationVerdict {
    pub violations: Vec<Violation>,
    pub reports: Vec<(Demand, PathLossReport)>,
}

impl ConfigurationVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks switch-map injectivity, port sanity, a route for every served
/// demand, per-demand budgets and channel disjointness between demands.
pub fn validate_configuration(
    net: &NetworkModel,
    conf: &NodeConfiguration,
    served: &[Demand],
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
) -> ConfigurationVerdict {
    let mut violations = Vec::new();
    let mut reports = Vec::new();

    let mut by_output: BTreeMap<(usize, CwdmChannel, Port), Vec<Port>> = BTreeMap::new();
    for (&(node, input, ch), &out) in conf.entries() {
        by_output.entry((node, ch, out)).or_default().push(input);
        if !quantum.contains(&ch) && !conventional.contains(&ch) {
            violations.push(Violation::ForeignChannel { node, channel: ch });
        }
        for (port, is_input) in [(input, true), (out, false)] {
            if !port_ok(net, node, port, is_input) {
                violations.push(Violation::BadPort { node, port });
            }
        }
    }
    for ((node, channel, output), inputs) in by_output {
        if inputs.len() > 1 {
            violations.push(Violation::NotInjective { node, channel, output, inputs });
        }
    }

    let mut usage: BTreeMap<(String, CwdmChannel), Vec<Demand>> = BTreeMap::new();
    for &d in served {
        match trace_demand(net, conf, d, quantum, conventional, budgets) {
            Ok(found) => {
                for r in &found {
                    if !r.feasible {
                        violations.push(Violation::OverBudget { demand: d, report: Box::new(r.clone()) });
                    }
                    for route in &r.routes {
                        for res in route_resources(net, route) {
                            usage.entry(res).or_default().push(d);
                        }
                    }
                    reports.push((d, r.clone()));
                }
            }
            Err(reason) => violations.push(Violation::Unrouted { demand: d, reason }),
        }
    }
    for ((resource, channel), mut ds) in usage {
        ds.dedup();
        if ds.len() > 1 {
            violations.push(Violation::ChannelConflict { resource, channel, demands: ds });
        }
    }
    ConfigurationVerdict { violations, reports }
}

fn port_ok(net: &NetworkModel, node: usize, port: Port, is_input: bool) -> bool {
    match port {
        Port::Access(a) => net.access_networks.get(a).is_some_and(|x| x.node == Some(node)),
        Port::Link(l) => net.links.get(l).is_some_and(|link| {
            if is_input {
                link.next_from(link.a) == Some(node) && link.a != node || link.next_from(link.b) == Some(node) && link.b != node
            } else {
                link.next_from(node).is_some()
            }
        }),
        Port::Source(s) => is_input && net.sources.get(s).is_some_and(|x| x.attachment == Attachment::Node(node)),
    }
}

fn route_resources(net: &NetworkModel, route: &Route) -> Vec<(String, CwdmChannel)> {
    let Some(ch) = crate::wdm_grid::cwdm_parent(&route.channel, net.cwdm_passband_nm) else { return Vec::new() };
    let mut out: Vec<(String, CwdmChannel)> = route
        .link_traversals()
        .into_iter()
        .map(|(l, from)| (format!("span {} leaving B{}", l + 1, from + 1), ch))
        .collect();
    if let Endpoint::User(u) = route.to {
        if let Ok(user) = net.user(u) {
            out.push((format!("drop to A{}", user.access_network + 1), ch));
        }
    }
    out
}

/// Finds how `conf` carries `d`: the first channel (and source) whose
/// routes all exist.
fn trace_demand(
    net: &NetworkModel,
    conf: &NodeConfiguration,
    d: Demand,
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
) -> std::result::Result<Vec<PathLossReport>, String> {
    let err = |e: Error| e.to_string();
    let ua = first_user(net, d.a, None).map_err(err)?;
    let ub = first_user(net, d.b, Some(ua)).map_err(err)?;
    let mut last = String::from("no planned channel reaches both ends");
    match d.kind {
        DemandKind::Direct => {
            for (i, cq) in quantum.iter().enumerate() {
                let mut channels = vec![*cq];
                if let Some(cc) = conventional.get(i % conventional.len().max(1)) {
                    channels.push(*cc);
                }
                let attempt = || -> Result<Vec<PathLossReport>> {
                    let mut reps = Vec::new();
                    for c in &channels {
                        let ch = first_dwdm(net, c)?;
                        for (x, y) in [(ua, ub), (ub, ua)] {
                            let r = enumerate_route(net, Endpoint::User(x), y, &ch, Some(conf))?;
                            reps.push(one_way_loss(net, &r, budgets)?);
                        }
                    }
                    Ok(reps)
                };
                match attempt() {
                    Ok(reps) => return Ok(reps),
                    Err(e) => last = e.to_string(),
                }
            }
        }
        DemandKind::Entangled => {
            for s in &net.sources {
                if !matches!(s.attachment, Attachment::Node(_)) {
                    continue;
                }
                for c1 in quantum {
                    for c2 in quantum {
                        if c1 == c2 {
                            continue;
                        }
                        let pair = match (first_dwdm(net, c1), first_dwdm(net, c2)) {
                            (Ok(x), Ok(y)) => (x, y),
                            _ => continue,
                        };
                        match entangled_link_loss(net, s.id, ua, ub, pair, Some(conf), budgets) {
                            Ok(r) => return Ok(vec![r]),
                            Err(e) => last = e.to_string(),
                        }
                    }
                }
            }
        }
    }
    Err(last)
}

/// AN → channel maps, one per step. With at least as many channels as
/// access networks one step suffices; otherwise the assignment rotates so
/// every access network meets every channel.
pub fn rotate_channel_assignment(
    n_access: usize,
    channels: &[CwdmChannel],
) -> Result<Vec<BTreeMap<usize, CwdmChannel>>> {
    if channels.is_empty() {
        return Err(Error::InvalidArgument("at least one channel is needed".into()));
    }
    let m = channels.len();
    let steps = if n_access <= m { 1 } else { m };
    Ok((0..steps).map(|t| (0..n_access).map(|a| (a, channels[(a + t) % m])).collect()).collect())
}

/// Access networks sharing a channel within one connected part of the
/// backbone. Reuse across disconnected parts is fine.
pub fn assignment_conflicts(
    net: &NetworkModel,
    step: &BTreeMap<usize, CwdmChannel>,
) -> Vec<(CwdmChannel, usize, usize)> {
    let comps = net.components();
    let region = |an: usize| {
        net.access_networks.get(an).and_then(|a| a.node).and_then(|n| comps.iter().position(|c| c.contains(&n)))
    };
    let mut out = Vec::new();
    for (&a, ca) in step {
        for (&b, cb) in step.range(a + 1..) {
            if ca == cb && region(a).is_some() && region(a) == region(b) {
                out.push((*ca, a, b));
            }
        }
    }
    out
}

/// Outcome of enumerating every realizable configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityCertificate {
    /// Schedule length that was tested for (`shorter_than - 1` configurations).
    pub shorter_than: usize,
    pub realizable_sets: usize,
    pub maximal_sets: Vec<Vec<Demand>>,
    pub largest_configuration: usize,
    /// A cover with fewer configurations, if one exists.
    pub shorter_schedule: Option<Vec<Vec<Demand>>>,
}

impl MinimalityCertificate {
    pub fn certifies(&self) -> bool {
        self.shorter_schedule.is_none()
    }
}

/// Enumerates every demand subset one configuration can carry (level by
/// level, only extending realizable sets) and searches for a cover with
/// `k - 1` of them.
pub fn certify_minimal(
    net: &NetworkModel,
    demands: &DemandSet,
    quantum: &[CwdmChannel],
    conventional: &[CwdmChannel],
    budgets: &Budgets,
    k: usize,
) -> Result<MinimalityCertificate> {
    let table = option_table(net, demands, quantum, conventional, budgets)?;
    let n = table.demands.len();
    let mut realizer = Realizer::new(&table, u64::MAX);

    let mut all: Vec<Mask> = Vec::new();
    let mut level: Vec<Mask> = (0..n).map(bit).filter(|&m| realizer.realize(m).is_some()).collect();
    let mut maximal = Vec::new();
    while !level.is_empty() {
        let known: HashSet<Mask> = level.iter().copied().collect();
        let mut next = Vec::new();
        let mut extended: HashSet<Mask> = HashSet::new();
        for &s in &level {
            let top = bits(s).last().unwrap_or(0);
            for d in top + 1..n {
                let t = s | bit(d);
                if !bits(t).all(|x| known.contains(&(t & !bit(x)))) {
                    continue;
                }
                if realizer.realize(t).is_some() {
                    next.push(t);
                    for x in bits(t) {
                        extended.insert(t & !bit(x));
                    }
                }
            }
        }
        maximal.extend(level.iter().copied().filter(|s| !extended.contains(s)));
        all.extend(level);
        level = next;
    }

    let largest = maximal.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0);
    let full: Mask = (0..n).fold(0, |m, i| m | bit(i));
    let mut pick = Vec::new();
    let shorter = if k > 1 && cover(&maximal, full, 0, k - 1, &mut pick) {
        Some(pick.iter().map(|&m| bits(m).map(|i| table.demands[i]).collect()).collect())
    } else if k <= 1 && n == 0 {
        Some(Vec::new())
    } else {
        None
    };
    let to_list = |m: &Mask| bits(*m).map(|i| table.demands[i]).collect::<Vec<_>>();
    Ok(MinimalityCertificate {
        shorter_than: k,
        realizable_sets: all.len(),
        maximal_sets: maximal.iter().map(to_list).collect(),
        largest_configuration: largest,
        shorter_schedule: shorter,
    })
}

fn cover(sets: &[Mask], full: Mask, covered: Mask, left: usize, pick: &mut Vec<Mask>) -> bool {
    if covered == full {
        return true;
    }
    if left == 0 {
        return false;
    }
    let first = (0..MAX_DEMANDS).find(|&i| full & bit(i) != 0 && covered & bit(i) == 0).unwrap();
    for &s in sets.iter().filter(|&&s| s & bit(first) != 0) {
        pick.push(s);
        if cover(sets, full, covered | s, left - 1, pick) {
            return true;
        }
        pick.pop();
    }
    false
}

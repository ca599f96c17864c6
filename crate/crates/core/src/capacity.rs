//! Channel plans and capacity limits of the reference networks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{NodeKind, SignalClass};
use crate::error::{Error, Result};
use crate::loss::{best_pair_link, one_way_loss, worst_case_analysis, Boundary, Budgets, PathLossReport};
use crate::scheduler::{cheapest_realization, realization_reports, Demand};
use crate::source::{
    pair_center, plan_sources_for_pairs, required_width_nm, ConnectionScheme, PlannedSource, PlannerOptions,
    SchemeKind, DEFAULT_SPECTRAL_WIDTH_NM,
};
use crate::topology::{
    build_reference_network_with, entanglement_only_band, Endpoint, NetworkModel, ReferenceOptions, TopologyKind,
    ENT_ONLY_FIRST_QUANTUM_NM, RING_FIRST_CONVENTIONAL_NM, RING_FIRST_QUANTUM_NM,
};
use crate::units::Db;
use crate::wdm_grid::{
    dwdm_block, dwdm_channels_in, dwdm_fit_count, Band, BandKind, CwdmChannel, DwdmChannel, GridSpacing,
    DEFAULT_CWDM_PASSBAND_NM,
};

/// Distance between an access network's quantum channel and its
/// conventional channel: one period of the cyclic AWG.
pub const AWG_PERIOD_NM: u32 = RING_FIRST_QUANTUM_NM - RING_FIRST_CONVENTIONAL_NM;

/// Width needed to span the entanglement-only band end to end.
pub const WIDE_SOURCE_NM: f64 = 160.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanLayout {
    /// Quantum channels from C1510 up, each with a conventional channel one
    /// AWG period below.
    Shared,
    /// Quantum channels only, from C1470 up.
    EntanglementOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPlanOptions {
    pub spacing: GridSpacing,
    pub passband_nm: f64,
    pub layout: PlanLayout,
    /// Share of each quantum block kept for one-way links. Any positive
    /// share keeps at least one channel.
    pub one_way_fraction: f64,
    /// Channels at each block edge left unused.
    pub guard_channels: usize,
    pub scheme: SchemeKind,
    pub max_width_nm: f64,
}

impl Default for ChannelPlanOptions {
    fn default() -> Self {
        ChannelPlanOptions {
            spacing: GridSpacing::GHZ_100,
            passband_nm: DEFAULT_CWDM_PASSBAND_NM,
            layout: PlanLayout::Shared,
            one_way_fraction: 0.5,
            guard_channels: 0,
            scheme: SchemeKind::FixedSplit,
            max_width_nm: f64::INFINITY,
        }
    }
}

impl ChannelPlanOptions {
    pub fn entanglement_only() -> Self {
        ChannelPlanOptions {
            layout: PlanLayout::EntanglementOnly,
            one_way_fraction: 0.0,
            max_width_nm: WIDE_SOURCE_NM,
            ..Default::default()
        }
    }

    fn quantum_band(&self) -> Band {
        match self.layout {
            PlanLayout::Shared => Band::c_quantum(),
            PlanLayout::EntanglementOnly => entanglement_only_band(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DwdmRole {
    Entangled(usize),
    OneWay,
    Reserved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnAssignment {
    pub access_network: usize,
    pub conventional: Option<CwdmChannel>,
    pub quantum: CwdmChannel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPlan {
    pub spacing: GridSpacing,
    pub passband_nm: f64,
    pub assignments: Vec<AnAssignment>,
    pub roles: BTreeMap<DwdmChannel, DwdmRole>,
    pub sources: Vec<PlannedSource>,
    pub scheme: ConnectionScheme,
    pub one_way_fraction: f64,
}

impl ChannelPlan {
    fn owner(&self, ch: &DwdmChannel) -> Option<usize> {
        self.assignments.iter().position(|a| dwdm_block(&a.quantum, self.spacing).contains(&ch.index))
    }

    pub fn channels_of(&self, an: usize, role: impl Fn(&DwdmRole) -> bool) -> Vec<DwdmChannel> {
        self.roles.iter().filter(|(ch, r)| self.owner(ch) == Some(an) && role(r)).map(|(ch, _)| *ch).collect()
    }

    pub fn entangled_count(&self, an: usize) -> usize {
        self.channels_of(an, |r| matches!(r, DwdmRole::Entangled(_))).len()
    }

    pub fn one_way_count(&self, an: usize) -> usize {
        self.channels_of(an, |r| *r == DwdmRole::OneWay).len()
    }

    /// Mirrored channel pairs a source delivers, as (channel at the first
    /// served network, channel at the second).
    pub fn pairs_of(&self, source: usize) -> Vec<(DwdmChannel, DwdmChannel)> {
        let Some(s) = self.sources.get(source) else { return Vec::new() };
        let (i, _) = s.serves[0];
        let mut out = Vec::new();
        for (ch, role) in &self.roles {
            if *role != DwdmRole::Entangled(source) {
                continue;
            }
            let Ok(p) = s.spec.partner_of(ch) else { continue };
            if self.owner(ch) == Some(i) && (ch < &p || self.owner(&p) != Some(i)) {
                out.push((*ch, p));
            }
        }
        out
    }

    /// Turns a one-way channel and its partner under `source` into an
    /// entangled pair. Returns the partner.
    pub fn convert_one_way(&mut self, source: usize, ch: DwdmChannel) -> Result<DwdmChannel> {
        let s = self.sources.get_mut(source).ok_or_else(|| Error::InvalidArgument(format!("no source S{}", source + 1)))?;
        let p = s.spec.partner_of(&ch)?;
        for c in [ch, p] {
            if self.roles.get(&c) != Some(&DwdmRole::OneWay) {
                return Err(Error::InvalidArgument(format!("{c} is not a one-way channel")));
            }
        }
        let (i, j) = s.serves[0];
        let blocks = [dwdm_block(&self.assignments[i].quantum, self.spacing), dwdm_block(&self.assignments[j].quantum, self.spacing)];
        let fits = (blocks[0].contains(&ch.index) && blocks[1].contains(&p.index))
            || (blocks[1].contains(&ch.index) && blocks[0].contains(&p.index));
        if !fits {
            return Err(Error::InvalidArgument(format!("S{} does not serve both {ch} and {p}", source + 1)));
        }
        s.spec.connect_pair(&ch)?;
        self.roles.insert(ch, DwdmRole::Entangled(source));
        self.roles.insert(p, DwdmRole::Entangled(source));
        self.scheme.allocation.entry(source).or_default().extend([ch, p]);
        Ok(p)
    }

    /// Checks band separation, AWG alignment, pairing closure, coverage of
    /// every pair and the one-way reservation.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::PlanDeficit(m));
        let mut seen = BTreeSet::new();
        for a in &self.assignments {
            if !seen.insert(a.quantum) {
                return bad(format!("{} assigned twice", a.quantum));
            }
            if let Some(c) = a.conventional {
                if c.band() != Some(BandKind::OConventional) {
                    return bad(format!("{c} is outside the conventional band"));
                }
                if a.quantum.nominal_nm() != c.nominal_nm() + AWG_PERIOD_NM {
                    return bad(format!("{c} and {} are not one AWG period apart", a.quantum));
                }
                if !seen.insert(c) {
                    return bad(format!("{c} assigned twice"));
                }
            }
        }
        for (si, s) in self.sources.iter().enumerate() {
            if !s.spec.is_pairing_closed() {
                return bad(format!("S{} is not pairing-closed", si + 1));
            }
            let mine: BTreeSet<DwdmChannel> =
                self.roles.iter().filter(|(_, r)| **r == DwdmRole::Entangled(si)).map(|(c, _)| *c).collect();
            if &mine != s.spec.connected() {
                return bad(format!("S{} drives channels outside its role list", si + 1));
            }
        }
        let n = self.assignments.len();
        for i in 0..n {
            for j in i..n {
                let served = self.sources.iter().enumerate().any(|(si, s)| s.serves.contains(&(i, j)) && !self.pairs_of(si).is_empty());
                if !served {
                    return bad(format!("no entangled pair reaches A{} and A{}", i + 1, j + 1));
                }
            }
            if self.one_way_fraction > 0.0 && self.one_way_count(i) == 0 {
                return bad(format!("A{} has no one-way channel", i + 1));
            }
        }
        self.scheme.validate(self.passband_nm)
    }
}

/// Assigns CWDM channels to `n_access` networks and splits each quantum
/// block between entangled pairs (one source per network pair, self-pairs
/// included) and one-way links. Pairs are dealt out round-robin so every
/// network pair gets one mirrored channel pair before any gets a second.
pub fn synthesize_channel_plan(n_access: usize, opts: &ChannelPlanOptions) -> Result<ChannelPlan> {
    if n_access == 0 {
        return Err(Error::InvalidArgument("at least one access network is required".into()));
    }
    if !(0.0..=1.0).contains(&opts.one_way_fraction) {
        return Err(Error::InvalidArgument(format!("one-way share {} is not in [0, 1]", opts.one_way_fraction)));
    }
    let band = opts.quantum_band();
    let first = match opts.layout {
        PlanLayout::Shared => RING_FIRST_QUANTUM_NM,
        PlanLayout::EntanglementOnly => ENT_ONLY_FIRST_QUANTUM_NM,
    };
    let mut assignments = Vec::with_capacity(n_access);
    for an in 0..n_access {
        let nm = first + 20 * an as u32;
        let q = CwdmChannel::with_passband(nm, opts.passband_nm).ok().filter(|c| band.contains_cwdm(c));
        let Some(quantum) = q else {
            return Err(Error::PlanDeficit(format!(
                "the {} band holds fewer than {n_access} CWDM channels",
                band.kind
            )));
        };
        let conventional = match opts.layout {
            PlanLayout::EntanglementOnly => None,
            PlanLayout::Shared => {
                let c = CwdmChannel::with_passband(nm - AWG_PERIOD_NM, opts.passband_nm)
                    .ok()
                    .filter(|c| Band::o_conventional().contains_cwdm(c));
                match c {
                    Some(c) => Some(c),
                    None => {
                        return Err(Error::PlanDeficit(format!(
                            "the conventional band holds fewer than {n_access} CWDM channels"
                        )))
                    }
                }
            }
        };
        assignments.push(AnAssignment { access_network: an, conventional, quantum });
    }

    let quantum: Vec<CwdmChannel> = assignments.iter().map(|a| a.quantum).collect();
    let planner = PlannerOptions { spacing: opts.spacing, max_width_nm: opts.max_width_nm, overlap: false, quantum_band: band };
    let mut sp = plan_sources_for_pairs(&quantum, &planner)?;
    if let Some(bad) = sp.infeasible.first() {
        return Err(Error::PlanDeficit(format!(
            "A{} and A{} need a {:.1} nm source, wider than {} nm",
            bad.pair.0 + 1,
            bad.pair.1 + 1,
            bad.required_width_nm,
            opts.max_width_nm
        )));
    }
    for s in &mut sp.sources {
        s.spec.spectral_width_nm = s.required_width_nm;
    }

    // Roles: guards first, then the entangled quota per network.
    let mut roles = BTreeMap::new();
    let blocks: Vec<Vec<i32>> = quantum.iter().map(|q| dwdm_block(q, opts.spacing).collect()).collect();
    let mut quota = Vec::with_capacity(n_access);
    for (an, block) in blocks.iter().enumerate() {
        let g = opts.guard_channels.min(block.len() / 2);
        for (k, &idx) in block.iter().enumerate() {
            if k < g || k >= block.len() - g {
                roles.insert(DwdmChannel::new(idx, opts.spacing), DwdmRole::Reserved);
            }
        }
        let usable = block.len() - 2 * g;
        let one_way = if opts.one_way_fraction > 0.0 {
            ((opts.one_way_fraction * usable as f64).round() as usize).clamp(1, usable)
        } else {
            0
        };
        let entangled = usable.saturating_sub(one_way);
        let needed = n_access + 1;
        if entangled < needed {
            return Err(Error::PlanDeficit(format!(
                "A{} needs {needed} entangled channels for its {n_access} pairs, {entangled} remain after {one_way} one-way and {} guard channels (short by {})",
                an + 1,
                2 * g,
                needed - entangled
            )));
        }
        quota.push(entangled);
    }

    // Mirrored candidates per source, oriented (first network, second network).
    let candidates: Vec<Vec<(DwdmChannel, DwdmChannel)>> = sp
        .sources
        .iter()
        .map(|s| {
            let (i, j) = s.serves[0];
            s.spec
                .pairs_between(&quantum[i], &quantum[j])
                .into_iter()
                .map(|(x, y)| if blocks[i].contains(&x.index) { (x, y) } else { (y, x) })
                .filter(|(x, y)| !roles.contains_key(x) && !roles.contains_key(y))
                .collect()
        })
        .collect();

    let mut used = vec![0usize; n_access];
    let mut cursor = vec![0usize; sp.sources.len()];
    let mut round = 0;
    loop {
        let mut progress = false;
        for (si, s) in sp.sources.iter_mut().enumerate() {
            let (i, j) = s.serves[0];
            let cost_ok = if i == j { used[i] + 2 <= quota[i] } else { used[i] < quota[i] && used[j] < quota[j] };
            if !cost_ok {
                continue;
            }
            while let Some(&(x, y)) = candidates[si].get(cursor[si]) {
                cursor[si] += 1;
                if roles.contains_key(&x) || roles.contains_key(&y) {
                    continue;
                }
                s.spec.connect_pair(&x)?;
                roles.insert(x, DwdmRole::Entangled(si));
                roles.insert(y, DwdmRole::Entangled(si));
                used[i] += 1;
                used[j] += 1;
                progress = true;
                break;
            }
            if round == 0 && s.spec.connected().is_empty() {
                return Err(Error::PlanDeficit(format!(
                    "no free mirrored DWDM pair left for A{} and A{}",
                    i + 1,
                    j + 1
                )));
            }
        }
        round += 1;
        if !progress {
            break;
        }
    }
    for block in &blocks {
        for &idx in block {
            roles.entry(DwdmChannel::new(idx, opts.spacing)).or_insert(DwdmRole::OneWay);
        }
    }

    let allocation = sp.sources.iter().enumerate().map(|(si, s)| (si, s.spec.connected().clone())).collect();
    let plan = ChannelPlan {
        spacing: opts.spacing,
        passband_nm: opts.passband_nm,
        assignments,
        roles,
        sources: sp.sources,
        scheme: ConnectionScheme { kind: opts.scheme, allocation },
        one_way_fraction: opts.one_way_fraction,
    };
    plan.check()?;
    Ok(plan)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitingFactor {
    LossBudget,
    SourceWidth,
    CwdmSpectrum,
}

impl fmt::Display for LimitingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitingFactor::LossBudget => "loss_budget",
            LimitingFactor::SourceWidth => "source_width",
            LimitingFactor::CwdmSpectrum => "cwdm_spectrum",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityReport {
    pub node_kind: NodeKind,
    /// `None` when no size up to the search limit fails.
    pub max_access_networks: Option<usize>,
    pub limiting_factor: Option<LimitingFactor>,
    pub users_per_an: usize,
    pub total_users: Option<usize>,
    /// Worst path of each class at the maximum size.
    pub witnesses: Vec<PathLossReport>,
    /// Paths over budget one size further.
    pub violations: Vec<PathLossReport>,
    /// Source width the widest pair needs at the maximum size, and one
    /// size further.
    pub required_width_nm: Option<f64>,
    pub next_required_width_nm: Option<f64>,
}

/// Largest meshes tried before declaring the reference mesh unbounded. Its
/// spans fan out of one hub, so from four nodes on no pair is more than two
/// spans apart and larger instances repeat the same path classes.
pub const MESH_SEARCH_LIMIT: usize = 5;

struct SizeCheck {
    loss_ok: Option<bool>,
    width_nm: Option<f64>,
    width_ok: bool,
    spectrum_ok: bool,
    reports: Vec<PathLossReport>,
}

impl SizeCheck {
    fn feasible(&self) -> bool {
        self.spectrum_ok && self.width_ok && self.loss_ok == Some(true)
    }

    fn factor(&self) -> Option<LimitingFactor> {
        if self.loss_ok == Some(false) {
            Some(LimitingFactor::LossBudget)
        } else if !self.width_ok {
            Some(LimitingFactor::SourceWidth)
        } else if !self.spectrum_ok {
            Some(LimitingFactor::CwdmSpectrum)
        } else {
            None
        }
    }
}

fn kind_of(node_kind: NodeKind) -> TopologyKind {
    match node_kind {
        NodeKind::ActivePxc => TopologyKind::Mesh,
        _ => TopologyKind::Ring,
    }
}

/// Network of the same shape whose quantum channels sit in a wide band,
/// for pricing sizes the normal band cannot hold. Path losses do not depend
/// on which CWDM channel an access network uses within the band.
fn probe_options(base: &ReferenceOptions) -> ReferenceOptions {
    ReferenceOptions {
        quantum_band: Some(Band { kind: BandKind::CQuantum, lo_nm: 1260.0, hi_nm: 1620.0 }),
        first_quantum_nm: Some(1270),
        ..base.clone()
    }
}

fn check_size(
    node_kind: NodeKind,
    n: usize,
    budgets: &Budgets,
    width_nm: f64,
    opts: &ReferenceOptions,
) -> Result<SizeCheck> {
    let kind = kind_of(node_kind);
    let (net, spectrum_ok) = match build_reference_network_with(kind, n, Some(node_kind), opts) {
        Ok(net) => (Some(net), true),
        Err(_) if node_kind == NodeKind::CwdmOadmSimple => {
            (build_reference_network_with(kind, n, Some(node_kind), &probe_options(opts)).ok(), false)
        }
        Err(_) => (None, false),
    };
    let Some(net) = net else {
        return Ok(SizeCheck { loss_ok: None, width_nm: None, width_ok: true, spectrum_ok, reports: Vec::new() });
    };
    let required = widest_pair_nm(&net);
    let reports = required_reports(&net, budgets)?;
    Ok(SizeCheck {
        loss_ok: Some(reports.iter().all(|r| r.feasible)),
        width_nm: required,
        width_ok: required.is_none_or(|w| w <= width_nm + 1e-9),
        spectrum_ok,
        reports,
    })
}

/// Width of a source centered between the two outermost quantum channels.
fn widest_pair_nm(net: &NetworkModel) -> Option<f64> {
    let mut qs: Vec<CwdmChannel> = if net.kind == TopologyKind::Mesh {
        net.quantum_channels.clone()
    } else {
        net.access_networks.iter().filter_map(|a| a.quantum).collect()
    };
    qs.sort();
    let (lo, hi) = (qs.first()?, qs.last()?);
    Some(required_width_nm(pair_center(lo, hi, net.spacing).0, lo, hi))
}

/// Every path the design must support: one-way between any two networks
/// (both bands) and an entangled link for every pair, each priced the
/// cheapest way the topology allows.
pub fn required_reports(net: &NetworkModel, budgets: &Budgets) -> Result<Vec<PathLossReport>> {
    let n = net.n_access();
    let mut out = Vec::new();
    if net.kind == TopologyKind::Mesh {
        let (q, c) = (&net.quantum_channels, &net.conventional_channels);
        for a in 0..n {
            for b in a..n {
                let mut ds = vec![Demand::entangled(a, b)];
                if a != b {
                    ds.insert(0, Demand::direct(a, b));
                }
                for d in ds {
                    let r = cheapest_realization(net, d, q, c, &Budgets::unbounded())?.ok_or_else(|| {
                        Error::UnservableDemand { demand: d.to_string(), reason: "no route".into() }
                    })?;
                    out.extend(realization_reports(net, &r, q, c, budgets)?);
                }
            }
        }
        return Ok(out);
    }
    let one_way = net.node_kind() != Some(NodeKind::CwdmOadmSimple);
    for a in 0..n {
        for b in 0..n {
            if one_way {
                let ua = net.access(a)?.users[0];
                let dest = net.access(b)?;
                let ub = dest.users.iter().copied().find(|&u| u != ua).unwrap_or(ua);
                for c in [dest.quantum, dest.conventional].into_iter().flatten() {
                    let ch = dwdm_channels_in(&c, net.spacing)[0];
                    let route = crate::topology::enumerate_route(net, Endpoint::User(ua), ub, &ch, None)?;
                    out.push(one_way_loss(net, &route, budgets)?);
                }
            }
            if a <= b {
                out.push(best_pair_link(net, a, b, budgets)?);
            }
        }
    }
    Ok(out)
}

fn worst_per_class(reports: &[PathLossReport]) -> Vec<PathLossReport> {
    let mut worst: BTreeMap<SignalClass, &PathLossReport> = BTreeMap::new();
    for r in reports {
        let e = worst.entry(r.class).or_insert(r);
        if r.total > e.total {
            *e = r;
        }
    }
    worst.into_values().cloned().collect()
}

fn violations(reports: &[PathLossReport]) -> Vec<PathLossReport> {
    let mut v: Vec<PathLossReport> = reports.iter().filter(|r| !r.feasible).cloned().collect();
    v.sort_by_key(|p| std::cmp::Reverse(p.total));
    v
}

pub fn max_access_networks(node_kind: NodeKind, budgets: &Budgets, source_width_nm: f64) -> Result<CapacityReport> {
    max_access_networks_with(node_kind, budgets, source_width_nm, &ReferenceOptions::default())
}

/// Largest reference network of `node_kind` whose every required path is in
/// budget, whose widest source pair fits `source_width_nm` and whose
/// channels fit the band. Ties between factors at the first failing size
/// are reported as loss budget, then source width, then spectrum.
pub fn max_access_networks_with(
    node_kind: NodeKind,
    budgets: &Budgets,
    source_width_nm: f64,
    opts: &ReferenceOptions,
) -> Result<CapacityReport> {
    // Sizes vary, so a fixed span list cannot apply.
    let opts = &ReferenceOptions { mesh_edges: None, ..opts.clone() };
    let users_per_an = opts.users_per_an.unwrap_or_else(|| dwdm_fit_count(opts.cwdm_passband_nm, opts.spacing));
    let limit = if node_kind == NodeKind::ActivePxc { MESH_SEARCH_LIMIT } else { usize::MAX };
    let mut last: Option<SizeCheck> = None;
    let mut n = 1;
    loop {
        let check = check_size(node_kind, n, budgets, source_width_nm, opts)?;
        if !check.feasible() {
            let max = n - 1;
            return Ok(CapacityReport {
                node_kind,
                max_access_networks: Some(max),
                limiting_factor: check.factor(),
                users_per_an,
                total_users: Some(max * users_per_an),
                witnesses: last.as_ref().map(|l| worst_per_class(&l.reports)).unwrap_or_default(),
                violations: violations(&check.reports),
                required_width_nm: last.as_ref().and_then(|l| l.width_nm),
                next_required_width_nm: check.width_nm,
            });
        }
        if n >= limit {
            return Ok(CapacityReport {
                node_kind,
                max_access_networks: None,
                limiting_factor: None,
                users_per_an,
                total_users: None,
                witnesses: worst_per_class(&check.reports),
                violations: Vec::new(),
                required_width_nm: check.width_nm,
                next_required_width_nm: None,
            });
        }
        last = Some(check);
        n += 1;
    }
}

/// Outcome of growing a network by some access networks.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionVerdict {
    pub from: usize,
    pub to: usize,
    pub feasible: bool,
    /// Paths over budget after the extension, worst first.
    pub violations: Vec<PathLossReport>,
    /// Worst in-budget path of each class after the extension.
    pub worst: Vec<PathLossReport>,
    /// Per-class boundary between served and unservable closeness cases.
    pub boundaries: BTreeMap<SignalClass, Boundary>,
    pub notes: Vec<String>,
}

/// Reference options reproducing the distances and catalog of `net`.
pub fn reference_options_of(net: &NetworkModel) -> ReferenceOptions {
    let d = ReferenceOptions::default();
    let first = net.access_networks.first();
    ReferenceOptions {
        user_drop: first.map_or(d.user_drop, |a| a.user_drop),
        feeder: first.map_or(d.feeder, |a| a.feeder),
        span: net.links.first().map_or(d.span, |l| l.length),
        users_per_an: first.map(|a| a.users.len()),
        return_loops: first.map_or(d.return_loops, |a| a.return_loops),
        spacing: net.spacing,
        cwdm_passband_nm: net.cwdm_passband_nm,
        mesh_edges: None,
        catalog: net.catalog.clone(),
        quantum_band: net.quantum_band_override,
        first_quantum_nm: None,
    }
}

/// Rebuilds the reference network of `net`'s kind with `added` more access
/// networks and lists every required path that would break the budget.
pub fn feasibility_of_extension(net: &NetworkModel, added: usize, budgets: &Budgets) -> Result<ExtensionVerdict> {
    let from = net.n_access();
    let to = from + added;
    let opts = reference_options_of(net);
    let node_kind = net.node_kind();
    let mut notes = Vec::new();
    let grown = match build_reference_network_with(net.kind, to, node_kind, &opts) {
        Ok(g) => Some(g),
        Err(e) => {
            notes.push(format!("{to} access networks do not fit the channel plan: {e}"));
            if node_kind == Some(NodeKind::CwdmOadmSimple) {
                build_reference_network_with(net.kind, to, node_kind, &probe_options(&opts)).ok()
            } else {
                None
            }
        }
    };
    let Some(grown) = grown else {
        return Ok(ExtensionVerdict {
            from,
            to,
            feasible: false,
            violations: Vec::new(),
            worst: Vec::new(),
            boundaries: BTreeMap::new(),
            notes,
        });
    };
    let reports = required_reports(&grown, budgets)?;
    let v = violations(&reports);
    let ok: Vec<PathLossReport> = reports.into_iter().filter(|r| r.feasible).collect();
    let boundaries = worst_case_analysis(&grown, budgets)?.boundaries;
    Ok(ExtensionVerdict {
        from,
        to,
        feasible: v.is_empty() && notes.is_empty(),
        violations: v,
        worst: worst_per_class(&ok),
        boundaries,
        notes,
    })
}

/// The entangled loss of the widest served combination, if any.
pub fn worst_admissible(verdict: &ExtensionVerdict, class: SignalClass) -> Option<Db> {
    verdict.boundaries.get(&class).and_then(|b| b.worst_feasible.as_ref()).map(|c| c.loss)
}

/// Users one access network can host: one DWDM channel each.
pub fn users_per_access_network(passband_nm: f64, spacing: GridSpacing) -> usize {
    dwdm_fit_count(passband_nm, spacing)
}

/// Default source width for capacity questions about `node_kind`.
pub fn default_source_width(node_kind: NodeKind) -> f64 {
    match node_kind {
        NodeKind::CwdmOadmSimple => WIDE_SOURCE_NM,
        _ => DEFAULT_SPECTRAL_WIDTH_NM,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::Budget;
    use crate::topology::build_reference_network;

    fn db(x: f64) -> Db {
        Db::from_db(x)
    }

    #[test]
    fn three_networks_plan() {
        let plan = synthesize_channel_plan(3, &ChannelPlanOptions::default()).unwrap();
        assert_eq!(plan.sources.len(), 6);
        let pairs: Vec<(u32, u32)> = plan
            .assignments
            .iter()
            .map(|a| (a.conventional.unwrap().nominal_nm(), a.quantum.nominal_nm()))
            .collect();
        assert_eq!(pairs, vec![(1290, 1510), (1310, 1530), (1330, 1550)]);
        for an in 0..3 {
            assert_eq!(plan.one_way_count(an), 8);
            assert_eq!(plan.entangled_count(an), 8);
        }
    }

    #[test]
    fn single_network_plan() {
        let plan = synthesize_channel_plan(1, &ChannelPlanOptions::default()).unwrap();
        assert_eq!(plan.sources.len(), 1);
        assert_eq!(plan.sources[0].serves, vec![(0, 0)]);
    }

    #[test]
    fn dropping_the_reservation_frees_channels() {
        let default = synthesize_channel_plan(3, &ChannelPlanOptions::default()).unwrap();
        let none = synthesize_channel_plan(3, &ChannelPlanOptions { one_way_fraction: 0.0, ..Default::default() }).unwrap();
        for an in 0..3 {
            assert!(none.entangled_count(an) > default.entangled_count(an));
        }
    }

    #[test]
    fn deficit_names_the_shortfall() {
        let opts = ChannelPlanOptions { one_way_fraction: 0.9, ..Default::default() };
        let err = synthesize_channel_plan(3, &opts).unwrap_err().to_string();
        assert!(err.contains("short by"), "{err}");
        assert!(synthesize_channel_plan(5, &ChannelPlanOptions::default()).is_err());
    }

    #[test]
    fn conversion_keeps_closure() {
        let mut plan = synthesize_channel_plan(2, &ChannelPlanOptions::default()).unwrap();
        let s = plan.sources.iter().position(|s| s.serves == vec![(0, 1)]).unwrap();
        let free = plan.channels_of(0, |r| *r == DwdmRole::OneWay);
        let ch = free
            .into_iter()
            .find(|c| plan.sources[s].spec.partner_of(c).is_ok_and(|p| plan.roles.get(&p) == Some(&DwdmRole::OneWay)))
            .unwrap();
        plan.convert_one_way(s, ch).unwrap();
        plan.check().unwrap();
    }

    #[test]
    fn entanglement_only_ring_capacity() {
        let r = max_access_networks(NodeKind::CwdmOadmSimple, &Budgets::default(), 160.0).unwrap();
        assert_eq!(r.max_access_networks, Some(8));
        assert_eq!(r.total_users, Some(128));
        assert_eq!(r.limiting_factor, Some(LimitingFactor::LossBudget));
        let ent = r.witnesses.iter().find(|w| w.class == SignalClass::Entangled).unwrap();
        assert_eq!(ent.total, db(29.3));
    }

    #[test]
    fn narrow_source_limits_entanglement_only_ring() {
        let r = max_access_networks(NodeKind::CwdmOadmSimple, &Budgets::default(), 70.0).unwrap();
        assert_eq!(r.max_access_networks, Some(3));
        assert_eq!(r.limiting_factor, Some(LimitingFactor::SourceWidth));
    }

    #[test]
    fn tighter_budget_shrinks_entanglement_only_ring() {
        let b = Budgets::uniform(Budget::db(25.0));
        let r = max_access_networks(NodeKind::CwdmOadmSimple, &b, 160.0).unwrap();
        assert_eq!(r.max_access_networks, Some(6));
        assert_eq!(r.limiting_factor, Some(LimitingFactor::LossBudget));
    }

    #[test]
    fn passive_ring_capacity() {
        let r = max_access_networks(NodeKind::PassiveOadm, &Budgets::default(), 70.0).unwrap();
        assert_eq!(r.max_access_networks, Some(3));
        assert_eq!(r.total_users, Some(48));
        assert_eq!(r.limiting_factor, Some(LimitingFactor::LossBudget));
        assert!(r.violations.iter().any(|v| v.class == SignalClass::Entangled && v.total == db(33.2)));
    }

    #[test]
    fn mesh_capacity_is_unbounded() {
        let r = max_access_networks(NodeKind::ActivePxc, &Budgets::default(), 70.0).unwrap();
        assert_eq!(r.max_access_networks, None);
        assert_eq!(r.limiting_factor, None);
    }

    #[test]
    fn ring_extension_breaks_budget() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let v = feasibility_of_extension(&net, 1, &Budgets::default()).unwrap();
        assert!(!v.feasible);
        let w = v.violations.iter().find(|r| r.class == SignalClass::Entangled).unwrap();
        assert_eq!(w.total, db(33.2));
        assert_eq!(w.arms.iter().copied().sum::<Db>(), db(33.2));
    }

    #[test]
    fn mesh_extension_stays_feasible() {
        let net = build_reference_network(TopologyKind::Mesh, 4, None).unwrap();
        let v = feasibility_of_extension(&net, 1, &Budgets::default()).unwrap();
        assert!(v.feasible, "{:?}", v.violations);
        assert_eq!(worst_admissible(&v, SignalClass::Entangled), Some(db(29.2)));
    }

    #[test]
    fn unbounded_budget_always_extends() {
        let net = build_reference_network(TopologyKind::Ring, 3, None).unwrap();
        let v = feasibility_of_extension(&net, 1, &Budgets::unbounded()).unwrap();
        assert!(v.feasible);
    }
}

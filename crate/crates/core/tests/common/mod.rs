//! Helpers shared by the integration targets: a hand-written loss oracle
//! and the property checks.
#![allow(dead_code)]

use std::collections::BTreeSet;

use qmon::catalog::{chain_loss, Catalog, ComponentChain, ComponentKind, PxcNode, SignalClass};
use qmon::loss::Budgets;
use qmon::scheduler::{schedule, validate_configuration, Demand, DemandSet, ScheduleOptions};
use qmon::source::{plan_sources_for_pairs, PlannerOptions};
use qmon::topology::{build_reference_network_with, ReferenceOptions, TopologyKind};
use qmon::units::{Db, Distance, Frequency};
use qmon::wdm_grid::{entangled_partner, snap_to_half_grid, BandKind, DwdmChannel, GridSpacing, ANCHOR};
use qmon::capacity::{synthesize_channel_plan, ChannelPlanOptions, DwdmRole};

/// Loss arithmetic done by hand from the datasheet numbers and the node
/// tables, in f64 and without touching the library's route pricing.
pub mod oracle {
    pub const FIBER_O: f64 = 0.32;
    pub const FIBER_C: f64 = 0.2;
    pub const SWITCH: f64 = 1.0;
    pub const AWG: f64 = 3.0;
    pub const USER_DROP_KM: f64 = 1.0;
    pub const FEEDER_KM: f64 = 3.5;
    pub const SPAN_KM: f64 = 4.0;

    // Passive OADM: add, pass, drop for conventional / quantum / entangled.
    pub const OADM_ADD: [f64; 3] = [6.2, 6.2, 3.6];
    pub const OADM_PASS: [f64; 3] = [4.8, 4.8, 4.8];
    pub const OADM_DROP: [f64; 3] = [2.3, 1.7, 1.7];
    // PXC: cross for one-way signals, injection for a local source.
    pub const PXC: [f64; 3] = [4.0, 4.0, 2.5];
    // Single-channel CWDM OADM at its midpoint.
    pub const SIMPLE_OADM: f64 = 0.5;

    fn per_km(class: usize) -> f64 {
        if class == 0 {
            FIBER_O
        } else {
            FIBER_C
        }
    }

    /// User, switch, AWG, feeder: one end of a path, node excluded.
    pub fn access_leg(class: usize) -> f64 {
        (USER_DROP_KM + FEEDER_KM) * per_km(class) + SWITCH + AWG
    }

    /// Two users of one access network over its return loop.
    pub fn return_loop(class: usize) -> f64 {
        2.0 * USER_DROP_KM * per_km(class) + 2.0 * SWITCH
    }

    pub fn ring_one_way(class: usize, x: usize) -> f64 {
        if x == 0 {
            return return_loop(class);
        }
        let xf = x as f64;
        2.0 * access_leg(class)
            + OADM_ADD[class]
            + (xf - 1.0) * OADM_PASS[class]
            + OADM_DROP[class]
            + xf * SPAN_KM * per_km(class)
    }

    /// One arm from the source in an OADM to an x-closest user.
    pub fn ring_arm(x: usize) -> f64 {
        let xf = x as f64;
        OADM_ADD[2] + xf * SPAN_KM * FIBER_C + (xf - 1.0) * OADM_PASS[2] + OADM_DROP[2] + access_leg(2)
    }

    pub fn mesh_one_way(class: usize, x: usize) -> f64 {
        if x == 0 {
            return return_loop(class);
        }
        let xf = x as f64;
        2.0 * access_leg(class) + (xf + 1.0) * PXC[class] + xf * SPAN_KM * per_km(class)
    }

    pub fn mesh_arm(x: usize) -> f64 {
        let xf = x as f64;
        PXC[2] + xf * (SPAN_KM * FIBER_C + PXC[1]) + access_leg(2)
    }

    /// Arm from the backbone source of the entanglement-only ring, which
    /// sits one span ahead of the first node, to the x-th node downstream.
    pub fn simple_ring_arm(x: usize) -> f64 {
        let xf = x as f64;
        xf * SPAN_KM * FIBER_C + (xf - 1.0) * SIMPLE_OADM + SIMPLE_OADM + access_leg(2)
    }

    pub fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 0.01 + 1e-9
    }
}

pub fn db(x: f64) -> Db {
    Db::from_db(x)
}

// ---- property checks; each returns a description of the first failure ----

pub fn check_pairing(index: i32, center_half_steps: i64) -> Result<(), String> {
    let spacing = GridSpacing::GHZ_100;
    let half = spacing.as_mhz() as i64 / 2;
    let center = Frequency::mhz(ANCHOR.as_mhz() + center_half_steps * half);
    let ch = DwdmChannel::new(index, spacing);
    let p = entangled_partner(&ch, center).map_err(|e| e.to_string())?;
    let back = entangled_partner(&p, center).map_err(|e| e.to_string())?;
    if back != ch {
        return Err(format!("partner of partner of {index} is {}", back.index));
    }
    let sum = ch.center_frequency().as_mhz() + p.center_frequency().as_mhz();
    if sum != 2 * center.as_mhz() {
        return Err(format!("frequency sum {sum} != {}", 2 * center.as_mhz()));
    }
    // Any frequency snaps to a center that pairs the grid onto itself.
    let snapped = snap_to_half_grid(Frequency::mhz(center.as_mhz() + 17), spacing);
    entangled_partner(&ch, snapped).map(|_| ()).map_err(|e| e.to_string())
}

const CHAIN_KINDS: [ComponentKind; 6] = [
    ComponentKind::Splitter1x2,
    ComponentKind::Splitter1x32,
    ComponentKind::CwdmMux4,
    ComponentKind::BandpassFilter,
    ComponentKind::Circulator,
    ComponentKind::Switch,
];

fn chain(cat: &Catalog, picks: &[(usize, u16)]) -> ComponentChain {
    picks.iter().fold(ComponentChain::new(), |c, &(k, km)| {
        if k == CHAIN_KINDS.len() {
            c.fiber(cat.component(ComponentKind::Fiber), Distance::km(km as f64 / 10.0))
        } else {
            c.push(cat.component(CHAIN_KINDS[k]))
        }
    })
}

/// `picks` index `CHAIN_KINDS`, with one past the end meaning fiber of
/// `km / 10` kilometres.
pub fn check_chain(a: &[(usize, u16)], b: &[(usize, u16)], extra: (usize, u16)) -> Result<(), String> {
    let cat = Catalog::default();
    for band in [BandKind::OConventional, BandKind::CQuantum] {
        let (ca, cb) = (chain(&cat, a), chain(&cat, b));
        let la = chain_loss(&ca, band).map_err(|e| e.to_string())?;
        let lb = chain_loss(&cb, band).map_err(|e| e.to_string())?;
        let joined = chain_loss(&ca.clone().concat(&cb), band).map_err(|e| e.to_string())?;
        if joined != la + lb {
            return Err(format!("{band}: {joined} != {la} + {lb}"));
        }
        let longer = chain_loss(&chain(&cat, &[a, &[extra]].concat()), band).map_err(|e| e.to_string())?;
        if longer < la {
            return Err(format!("{band}: appending lowered {la} to {longer}"));
        }
    }
    Ok(())
}

pub fn check_pxc_degree(d1: usize, d2: usize) -> Result<(), String> {
    let cat = Catalog::default();
    for class in SignalClass::ALL {
        let a = PxcNode { degree: d1, cwdm_channels_per_band: 4 }.cross_loss(&cat, class).map_err(|e| e.to_string())?;
        let b = PxcNode { degree: d2, cwdm_channels_per_band: 4 }.cross_loss(&cat, class).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{class}: degree {d1} gives {a}, degree {d2} gives {b}"));
        }
    }
    Ok(())
}

/// Every unordered pair of access networks, self-pairs included, is served
/// by a source whose channels are all entangled and land in the right blocks.
pub fn check_plan(n: usize) -> Result<(), String> {
    let plan = synthesize_channel_plan(n, &ChannelPlanOptions::entanglement_only()).map_err(|e| e.to_string())?;
    plan.check().map_err(|e| e.to_string())?;
    let mut served = BTreeSet::new();
    for (si, s) in plan.sources.iter().enumerate() {
        for &pair in &s.serves {
            served.insert(pair);
        }
        if plan.pairs_of(si).is_empty() {
            return Err(format!("S{} carries no pair", si + 1));
        }
        for (a, b) in plan.pairs_of(si) {
            for ch in [a, b] {
                if plan.roles.get(&ch) != Some(&DwdmRole::Entangled(si)) {
                    return Err(format!("{ch} of S{} is not marked entangled", si + 1));
                }
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            if !served.contains(&(i, j)) {
                return Err(format!("pair ({i}, {j}) unserved with {n} access networks"));
            }
        }
        if plan.entangled_count(i) == 0 {
            return Err(format!("A{} has no entangled channel", i + 1));
        }
    }
    // The planner on its own agrees on the pair list.
    let chans: Vec<_> = plan.assignments.iter().map(|a| a.quantum).collect();
    let opts = PlannerOptions { max_width_nm: 160.0, quantum_band: chans_band(), ..PlannerOptions::default() };
    let alone = plan_sources_for_pairs(&chans, &opts).map_err(|e| e.to_string())?;
    if alone.sources.len() != plan.sources.len() {
        return Err(format!("{} planned sources vs {} in the channel plan", alone.sources.len(), plan.sources.len()));
    }
    Ok(())
}

fn chans_band() -> qmon::wdm_grid::Band {
    qmon::topology::entanglement_only_band()
}

/// A connected mesh from a parent list (node `i` hangs off `parents[i - 1]`,
/// which is taken modulo `i`) and extra spans picked by `extra_bits`.
pub fn random_mesh_edges(n: usize, parents: &[usize], extra_bits: u32) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let p = parents[i - 1] % i;
        edges.insert((p, i));
    }
    let mut bit = 0;
    for a in 0..n {
        for b in a + 1..n {
            if extra_bits & (1 << bit) != 0 {
                edges.insert((a, b));
            }
            bit += 1;
        }
    }
    edges.into_iter().collect()
}

/// Schedules `demands` on the mesh and checks that every demand is served
/// exactly once, that no two legs of a configuration share a span direction
/// or an access drop on one channel, and that each configuration validates.
pub fn check_schedule(n: usize, edges: &[(usize, usize)], demands: &[Demand]) -> Result<(), String> {
    let opts = ReferenceOptions {
        mesh_edges: Some(edges.iter().map(|&(a, b)| (a, b, Distance::km(4.0))).collect()),
        ..ReferenceOptions::default()
    };
    let net = build_reference_network_with(TopologyKind::Mesh, n, None, &opts).map_err(|e| e.to_string())?;
    let set = DemandSet::from_demands(demands.iter().copied());
    let budgets = Budgets::default();
    let sopts = ScheduleOptions { budgets, step_budget: 50_000, ..ScheduleOptions::default() };
    let result = schedule(&net, &set, &net.quantum_channels, &net.conventional_channels, &sopts);
    let hops = hop_distances(n, edges);
    let unservable: Vec<Demand> = demands.iter().copied().filter(|d| !servable(&hops, *d)).collect();
    if !unservable.is_empty() {
        return match result {
            Err(qmon::Error::UnservableDemand { .. }) => Ok(()),
            Err(e) => Err(format!("expected an unservable demand among {unservable:?}, got {e}")),
            Ok(_) => Err(format!("{unservable:?} scheduled although over budget")),
        };
    }
    let s = result.map_err(|e| e.to_string())?;

    let mut seen = BTreeSet::new();
    for conf in &s.configurations {
        for d in conf.demands() {
            if !seen.insert(d) {
                return Err(format!("{d} scheduled twice"));
            }
        }
    }
    let wanted: BTreeSet<Demand> = set.demands().into_iter().collect();
    if seen != wanted {
        return Err(format!("served {} of {} demands", seen.len(), wanted.len()));
    }
    if s.len() < s.lower_bound {
        return Err(format!("{} configurations below the bound {}", s.len(), s.lower_bound));
    }

    for (k, conf) in s.configurations.iter().enumerate() {
        let mut used = BTreeSet::new();
        for r in &conf.served {
            for leg in &r.legs {
                let mut at = leg.start;
                for &(link, next) in &leg.path {
                    if !used.insert((0, link, at, leg.channel)) {
                        return Err(format!("configuration {}: span {link} from B{} reused on {}", k + 1, at + 1, leg.channel));
                    }
                    at = next;
                }
                if !used.insert((1, leg.dest, usize::MAX, leg.channel)) {
                    return Err(format!("configuration {}: drop to A{} reused on {}", k + 1, leg.dest + 1, leg.channel));
                }
            }
        }
        let v = validate_configuration(
            &net,
            &conf.config,
            &conf.demands(),
            &net.quantum_channels,
            &net.conventional_channels,
            &budgets,
        );
        if !v.is_valid() {
            return Err(format!("configuration {} invalid: {:?}", k + 1, v.violations));
        }
    }
    Ok(())
}

/// Demands from index picks over all direct pairs `a < b` and all
/// entangled pairs `a <= b`.
pub fn pick_demands(n: usize, picks: &[usize]) -> Vec<Demand> {
    let mut all = Vec::new();
    for a in 0..n {
        for b in a..n {
            if a != b {
                all.push(Demand::direct(a, b));
            }
            all.push(Demand::entangled(a, b));
        }
    }
    let chosen: BTreeSet<Demand> = picks.iter().map(|&i| all[i % all.len()]).collect();
    chosen.into_iter().collect()
}

/// Span counts between backbone nodes, by breadth-first search.
pub fn hop_distances(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut dist = vec![vec![usize::MAX; n]; n];
    for (s, row) in dist.iter_mut().enumerate() {
        row[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &(a, b) in edges {
                let v = if a == u { b } else if b == u { a } else { continue };
                if row[v] == usize::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// Whether the cheapest way to carry `d` stays within 30 dB, using the
/// hand oracle on shortest spans (every span is 4 km).
pub fn servable(hops: &[Vec<usize>], d: Demand) -> bool {
    let ok = |x: f64| x <= 30.0 + 1e-9;
    match d.kind {
        qmon::scheduler::DemandKind::Direct => {
            let h = hops[d.a][d.b];
            ok(oracle::mesh_one_way(0, h)) && ok(oracle::mesh_one_way(1, h))
        }
        qmon::scheduler::DemandKind::Entangled => {
            (0..hops.len()).any(|s| ok(oracle::mesh_arm(hops[s][d.a]) + oracle::mesh_arm(hops[s][d.b])))
        }
    }
}

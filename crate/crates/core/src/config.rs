//! Declarative network descriptions in TOML.
//!
//! Every section is optional; a missing one falls back to the reference
//! network of the requested kind. Access networks, nodes and sources are
//! numbered from 1, as in the printed reports.
//!
//! ```toml
//! budget_db = 30
//!
//! [topology]
//! kind = "mesh"
//! access_networks = 4
//!
//! [[edge]]
//! a = 1
//! b = 2
//! length_km = 4
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capacity::{default_source_width, ChannelPlanOptions, PlanLayout};
use crate::catalog::{ComponentKind, NodeAction, NodeKind, SignalClass};
use crate::error::{Error, Result};
use crate::loss::{Budget, Budgets, DEFAULT_BUDGET_DB};
use crate::scheduler::DemandSet;
use crate::source::SchemeKind;
use crate::topology::{
    build_reference_network_with, Attachment, NetworkModel, ReferenceOptions, SourceSite, TopologyKind,
};
use crate::units::Distance;
use crate::wdm_grid::{BandKind, CwdmChannel, GridSpacing};

/// Access networks in the reference network when none are given.
pub const DEFAULT_ACCESS_NETWORKS: usize = 3;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    /// One budget for every signal class; `inf` lifts it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<BudgetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<CatalogSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<DemandSection>,
    #[serde(default, rename = "edge", skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
    #[serde(default, rename = "source", skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceEntry>,
}

/// Per-class budgets overriding `budget_db`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conventional: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangled: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cwdm_passband_nm: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_o_db_per_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_c_db_per_km: Option<f64>,
    /// Nominal loss by component key, e.g. `switch = 1.2`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, f64>,
    /// CWDM (de)mux loss by channel count, e.g. `"4" = 1.0`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cwdm_mux: BTreeMap<String, f64>,
    #[serde(default, rename = "node_loss", skip_serializing_if = "Vec::is_empty")]
    pub node_losses: Vec<NodeLossEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeLossEntry {
    pub node: NodeKind,
    pub action: NodeAction,
    /// `conventional`, `quantum` or `entangled`.
    pub class: String,
    pub db: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TopologyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_kind: Option<NodeKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_networks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feeder_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_drop_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub users_per_an: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_loops: Option<u32>,
    /// Shared quantum CWDM channels of a mesh, in nm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_channels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conventional_channels: Option<Vec<u32>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<PlanLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_way_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_channels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_width_nm: Option<f64>,
}

/// Demands for the scheduler. Without lists every pair is demanded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangled: Option<Vec<[usize; 2]>>,
    /// Adds entanglement inside each access network when lists are absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_self: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub a: usize,
    pub b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_km: Option<f64>,
}

/// Where a pair source sits: at a backbone node, at an access switch, or on
/// the span entering a node.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_network: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before_node: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_km: Option<f64>,
}

pub fn parse_config(text: &str) -> Result<ConfigDocument> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn km(v: f64, what: &str) -> Result<Distance> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::Config(format!("{what} must be a non-negative length, got {v}")));
    }
    Ok(Distance::km(v))
}

fn index(v: usize, what: &str, n: usize) -> Result<usize> {
    if v == 0 || v > n {
        return Err(Error::Config(format!("{what} {v} is outside 1..={n}")));
    }
    Ok(v - 1)
}

fn budget(v: f64) -> Result<Budget> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::Config(format!("budget {v} dB is not a non-negative number")));
    }
    Ok(if v.is_infinite() { Budget::UNBOUNDED } else { Budget::db(v) })
}

fn class_from_key(key: &str) -> Result<SignalClass> {
    SignalClass::ALL
        .into_iter()
        .find(|c| c.key() == key)
        .ok_or_else(|| Error::Config(format!("unknown signal class `{key}`")))
}

impl ConfigDocument {
    /// Canonical text: fixed section order, defaults omitted.
    pub fn to_canonical_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn budgets(&self) -> Result<Budgets> {
        let base = budget(self.budget_db.unwrap_or(DEFAULT_BUDGET_DB))?;
        let mut b = Budgets::uniform(base);
        if let Some(s) = &self.budgets {
            if let Some(v) = s.conventional {
                b.conventional = budget(v)?;
            }
            if let Some(v) = s.quantum {
                b.quantum = budget(v)?;
            }
            if let Some(v) = s.entangled {
                b.entangled = budget(v)?;
            }
        }
        Ok(b)
    }

    pub fn topology_kind(&self) -> TopologyKind {
        self.topology.as_ref().and_then(|t| t.kind).unwrap_or(TopologyKind::Ring)
    }

    pub fn access_networks(&self) -> usize {
        let t = self.topology.as_ref();
        t.and_then(|t| t.access_networks).unwrap_or(match self.topology_kind() {
            TopologyKind::Star => 1,
            TopologyKind::Mesh => 4,
            _ => DEFAULT_ACCESS_NETWORKS,
        })
    }

    pub fn reference_options(&self) -> Result<ReferenceOptions> {
        let mut o = ReferenceOptions::default();
        if let Some(g) = &self.grid {
            if let Some(s) = g.spacing_ghz {
                o.spacing = GridSpacing::ghz(s).map_err(|e| Error::Config(e.to_string()))?;
            }
            if let Some(p) = g.cwdm_passband_nm {
                CwdmChannel::with_passband(1550, p).map_err(|e| Error::Config(e.to_string()))?;
                o.cwdm_passband_nm = p;
            }
        }
        if let Some(c) = &self.catalog {
            let cfg = |e: Error| Error::Config(e.to_string());
            if let Some(v) = c.fiber_o_db_per_km {
                o.catalog.set_fiber_loss(BandKind::OConventional, v).map_err(cfg)?;
            }
            if let Some(v) = c.fiber_c_db_per_km {
                o.catalog.set_fiber_loss(BandKind::CQuantum, v).map_err(cfg)?;
            }
            for (key, &v) in &c.components {
                let kind = ComponentKind::from_key(key)
                    .ok_or_else(|| Error::Config(format!("unknown component `{key}`")))?;
                if kind == ComponentKind::Fiber {
                    return Err(Error::Config("set fiber loss with fiber_o_db_per_km / fiber_c_db_per_km".into()));
                }
                o.catalog.set_component_loss(kind, v).map_err(cfg)?;
            }
            for (key, &v) in &c.cwdm_mux {
                let n: u8 = key.parse().map_err(|_| Error::Config(format!("cwdm_mux key `{key}` is not a channel count")))?;
                if v < 0.0 {
                    return Err(Error::Config(format!("negative loss for a {n}-channel mux")));
                }
                o.catalog.set_cwdm_mux_loss(n, v);
            }
            for e in &c.node_losses {
                if e.db < 0.0 {
                    return Err(Error::Config(format!("negative loss for {} {}", e.node, e.action)));
                }
                o.catalog.set_node_loss(e.node, e.action, class_from_key(&e.class)?, e.db);
            }
        }
        if let Some(t) = &self.topology {
            if let Some(v) = t.span_km {
                o.span = km(v, "span_km")?;
            }
            if let Some(v) = t.feeder_km {
                o.feeder = km(v, "feeder_km")?;
            }
            if let Some(v) = t.user_drop_km {
                o.user_drop = km(v, "user_drop_km")?;
            }
            if let Some(u) = t.users_per_an {
                if u < 2 {
                    return Err(Error::Config("users_per_an must be at least 2".into()));
                }
                o.users_per_an = Some(u);
            }
            if let Some(r) = t.return_loops {
                o.return_loops = r;
            }
        }
        let n = self.access_networks();
        if !self.edges.is_empty() {
            let edges = self
                .edges
                .iter()
                .map(|e| Ok((index(e.a, "edge end", n)?, index(e.b, "edge end", n)?, km(e.length_km.map_or(o.span.as_km(), |v| v), "length_km")?)))
                .collect::<Result<Vec<_>>>()?;
            o.mesh_edges = Some(edges);
        }
        Ok(o)
    }

    /// The described network, validated.
    pub fn network(&self) -> Result<NetworkModel> {
        let kind = self.topology_kind();
        if !self.edges.is_empty() && kind != TopologyKind::Mesh {
            return Err(Error::Config("[[edge]] lists apply to mesh topologies only".into()));
        }
        let node_kind = self.topology.as_ref().and_then(|t| t.node_kind);
        let opts = self.reference_options()?;
        let cfg = |e: Error| Error::Config(e.to_string());
        let mut net = build_reference_network_with(kind, self.access_networks(), node_kind, &opts).map_err(cfg)?;
        if let Some(t) = &self.topology {
            let chans = |nms: &Vec<u32>| -> Result<Vec<CwdmChannel>> {
                nms.iter().map(|&nm| CwdmChannel::with_passband(nm, net.cwdm_passband_nm).map_err(cfg)).collect()
            };
            if let Some(q) = &t.quantum_channels {
                if kind != TopologyKind::Mesh {
                    return Err(Error::Config("quantum_channels applies to mesh topologies only".into()));
                }
                net.quantum_channels = chans(q)?;
            }
            if let Some(c) = &t.conventional_channels {
                if kind != TopologyKind::Mesh {
                    return Err(Error::Config("conventional_channels applies to mesh topologies only".into()));
                }
                net.conventional_channels = chans(c)?;
            }
        }
        if !self.sources.is_empty() {
            let n_nodes = net.nodes.len();
            let n_an = net.n_access();
            net.sources = self
                .sources
                .iter()
                .enumerate()
                .map(|(id, s)| {
                    let attachment = match (s.node, s.access_network, s.before_node) {
                        (Some(v), None, None) => Attachment::Node(index(v, "source node", n_nodes)?),
                        (None, Some(v), None) => Attachment::AccessSwitch(index(v, "source access_network", n_an)?),
                        (None, None, Some(v)) => Attachment::Backbone {
                            next: index(v, "source before_node", n_nodes)?,
                            span: km(s.span_km.unwrap_or(opts.span.as_km()), "span_km")?,
                        },
                        _ => {
                            return Err(Error::Config(format!(
                                "source {} needs exactly one of node, access_network, before_node",
                                id + 1
                            )))
                        }
                    };
                    Ok(SourceSite { id, attachment })
                })
                .collect::<Result<_>>()?;
        }
        net.validate().map_err(cfg)?;
        Ok(net)
    }

    pub fn plan_options(&self, net: &NetworkModel) -> Result<ChannelPlanOptions> {
        let entanglement_only = net.node_kind() == Some(NodeKind::CwdmOadmSimple);
        let p = self.plan.clone().unwrap_or_default();
        let layout = p.layout.unwrap_or(if entanglement_only { PlanLayout::EntanglementOnly } else { PlanLayout::Shared });
        let mut o = match layout {
            PlanLayout::EntanglementOnly => ChannelPlanOptions::entanglement_only(),
            PlanLayout::Shared => ChannelPlanOptions::default(),
        };
        o.spacing = net.spacing;
        o.passband_nm = net.cwdm_passband_nm;
        if let Some(f) = p.one_way_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("one_way_fraction {f} is not in [0, 1]")));
            }
            o.one_way_fraction = f;
        }
        if let Some(g) = p.guard_channels {
            o.guard_channels = g;
        }
        if let Some(s) = p.scheme {
            o.scheme = s;
        }
        if p.source_width_nm.is_some() {
            o.max_width_nm = self.source_width_nm(net)?;
        }
        Ok(o)
    }

    /// Source width for capacity questions: the configured one or the node
    /// kind's default.
    pub fn source_width_nm(&self, net: &NetworkModel) -> Result<f64> {
        match self.plan.as_ref().and_then(|p| p.source_width_nm) {
            Some(w) if w.is_nan() || w <= 0.0 => Err(Error::Config(format!("source_width_nm {w} must be positive"))),
            Some(w) => Ok(w),
            None => Ok(net.node_kind().map_or(crate::source::DEFAULT_SPECTRAL_WIDTH_NM, default_source_width)),
        }
    }

    pub fn demand_set(&self, n_access: usize) -> Result<DemandSet> {
        let d = self.demands.clone().unwrap_or_default();
        if d.direct.is_none() && d.entangled.is_none() {
            return Ok(DemandSet::all_pairs(n_access, d.include_self.unwrap_or(false)));
        }
        let pairs = |list: &Option<Vec<[usize; 2]>>| -> Result<Vec<(usize, usize)>> {
            list.iter()
                .flatten()
                .map(|&[a, b]| {
                    let (a, b) = (index(a, "demand end", n_access)?, index(b, "demand end", n_access)?);
                    Ok((a.min(b), a.max(b)))
                })
                .collect()
        };
        let set = DemandSet {
            direct: pairs(&d.direct)?.into_iter().collect(),
            entangled: pairs(&d.entangled)?.into_iter().collect(),
        };
        set.validate(n_access).map_err(|e| Error::Config(e.to_string()))?;
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_passive_ring() {
        let doc = parse_config("").unwrap();
        let net = doc.network().unwrap();
        assert_eq!(net.kind, TopologyKind::Ring);
        assert_eq!(net.n_access(), 3);
        assert_eq!(net.node_kind(), Some(NodeKind::PassiveOadm));
        assert_eq!(doc.budgets().unwrap(), Budgets::default());
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let err = parse_config("budget_db = 30\n[topology]\nkind = \"ring\"\nwidth = 3\n").unwrap_err().to_string();
        assert!(err.contains("width"), "{err}");
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        assert!(parse_config("budget_db = 30\nbudget_db = 25\n").is_err());
    }

    #[test]
    fn type_mismatch_is_rejected() {
        let err = parse_config("[topology]\naccess_networks = \"three\"\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn round_trip_is_stable() {
        let text = r#"
budget_db = 25

[budgets]
entangled = 28

[grid]
spacing_ghz = 100

[catalog]
fiber_c_db_per_km = 0.2
components = { switch = 1.0 }

[[catalog.node_loss]]
node = "active_pxc"
action = "cross"
class = "entangled"
db = 2.5

[topology]
kind = "mesh"
access_networks = 4

[demands]
entangled = [[1, 1], [1, 2]]

[[edge]]
a = 1
b = 2

[[edge]]
a = 2
b = 3
length_km = 5.5

[[source]]
node = 2
"#;
        let doc = parse_config(text).unwrap();
        let canon = doc.to_canonical_string().unwrap();
        assert_eq!(parse_config(&canon).unwrap(), doc);
        assert_eq!(parse_config(&canon).unwrap().to_canonical_string().unwrap(), canon);
    }

    #[test]
    fn infinite_budget_is_unbounded() {
        let doc = parse_config("budget_db = inf\n").unwrap();
        assert_eq!(doc.budgets().unwrap(), Budgets::unbounded());
        assert!(parse_config("budget_db = -1\n").unwrap().budgets().is_err());
    }

    #[test]
    fn sources_need_one_attachment() {
        let doc = parse_config("[topology]\nkind = \"mesh\"\n[[source]]\nnode = 1\naccess_network = 1\n").unwrap();
        assert!(doc.network().is_err());
        let doc = parse_config("[topology]\nkind = \"mesh\"\n[[source]]\nnode = 9\n").unwrap();
        assert!(doc.network().is_err());
    }

    #[test]
    fn explicit_demands_are_one_based() {
        let doc = parse_config("[demands]\ndirect = [[1, 4]]\nentangled = [[2, 2]]\n").unwrap();
        let d = doc.demand_set(4).unwrap();
        assert!(d.direct.contains(&(0, 3)));
        assert!(d.entangled.contains(&(1, 1)));
        assert!(doc.demand_set(3).is_err());
    }
}

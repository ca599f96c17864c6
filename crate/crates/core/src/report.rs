//! Report documents: a rendered table for people and line records for
//! scripts, both built from the same values.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::capacity::{CapacityReport, ChannelPlan, DwdmRole, ExtensionVerdict};
use crate::catalog::SignalClass;
use crate::loss::{Boundary, Cell, PathLossReport, WorstCaseTable};
use crate::scheduler::{ConfigurationVerdict, DemandKind, Schedule};
use crate::topology::NetworkModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    LossTable,
    Capacity,
    ChannelPlan,
    Schedule,
    Validation,
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportKind::LossTable => "loss_table",
            ReportKind::Capacity => "capacity",
            ReportKind::ChannelPlan => "channel_plan",
            ReportKind::Schedule => "schedule",
            ReportKind::Validation => "validation",
        })
    }
}

/// One machine-readable line: a tag and `key=value` fields in fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub tag: String,
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(tag: &str) -> Self {
        Record { tag: tag.to_string(), fields: Vec::new() }
    }

    pub fn field(mut self, key: &str, value: impl fmt::Display) -> Self {
        // Values never contain spaces so a line splits on whitespace.
        self.fields.push((key.to_string(), value.to_string().replace(' ', "_")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportDocument {
    pub kind: ReportKind,
    pub records: Vec<Record>,
    pub table: String,
    /// Problems found; a non-empty list means the network is infeasible.
    pub violations: Vec<String>,
}

impl ReportDocument {
    pub fn render(&self, records: bool) -> String {
        let mut out = String::new();
        if records {
            let _ = writeln!(out, "report kind={}", self.kind);
            for r in &self.records {
                let _ = writeln!(out, "{r}");
            }
            for v in &self.violations {
                let _ = writeln!(out, "violation text={}", v.replace(' ', "_"));
            }
        } else {
            out.push_str(&self.table);
            if !self.violations.is_empty() {
                out.push_str("\nViolations:\n");
                for v in &self.violations {
                    let _ = writeln!(out, "  {v}");
                }
            }
        }
        out
    }

    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn class_header(c: SignalClass) -> &'static str {
    match c {
        SignalClass::Conventional => "Conv.",
        SignalClass::QuantumOneWay => "Quant.",
        SignalClass::Entangled => "Ent.",
    }
}

fn path_record(tag: &str, r: &PathLossReport) -> Record {
    let closeness: Vec<String> = r.closeness().iter().map(|c| c.to_string()).collect();
    let arms: Vec<String> = r.arms.iter().map(|a| a.to_string()).collect();
    let ends: Vec<String> = r.routes.iter().map(|x| format!("{}>{}", x.from, x.to)).collect();
    Record::new(tag)
        .field("class", r.class)
        .field("ends", ends.join(","))
        .field("closeness", closeness.join("+"))
        .field("arms_db", arms.join("+"))
        .field("total_db", r.total)
        .field("budget", r.budget)
        .field("feasible", r.feasible)
}

fn boundary_records(boundaries: &std::collections::BTreeMap<SignalClass, Boundary>) -> (Vec<Record>, String) {
    let mut recs = Vec::new();
    let mut text = String::new();
    for (class, b) in boundaries {
        if b.worst_feasible.is_none() && b.best_infeasible.is_none() {
            continue;
        }
        let mut r = Record::new("boundary").field("class", class);
        let mut line = format!("{class}:");
        if let Some(w) = &b.worst_feasible {
            let c: Vec<String> = w.closeness.iter().map(|x| x.to_string()).collect();
            r = r.field("worst_feasible", c.join("+")).field("worst_feasible_db", w.loss);
            let _ = write!(line, " worst served {} at {} dB", c.join("+"), w.loss);
        }
        if let Some(w) = &b.best_infeasible {
            let c: Vec<String> = w.closeness.iter().map(|x| x.to_string()).collect();
            r = r.field("best_infeasible", c.join("+")).field("best_infeasible_db", w.loss);
            let _ = write!(line, "; first unserved {} at {} dB", c.join("+"), w.loss);
        }
        recs.push(r);
        let _ = writeln!(text, "  {line}");
    }
    (recs, text)
}

/// Loss table in the x-closest × {Conv., Quant., Ent.} layout. Cells over
/// budget carry a `*`.
pub fn loss_table_report(net: &NetworkModel, table: &WorstCaseTable) -> ReportDocument {
    let mut records = Vec::new();
    let mut out = String::new();
    let _ = writeln!(out, "Path losses from an emitter at A1 ({} backbone, {} access networks)", net.kind, net.n_access());
    let _ = writeln!(
        out,
        "Budgets: conventional {}, quantum {}, entangled {}\n",
        table.budgets.conventional, table.budgets.quantum, table.budgets.entangled
    );
    let _ = write!(out, "{:>9}", "x-closest");
    for c in SignalClass::ALL {
        let _ = write!(out, " | {:>8}", class_header(c));
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(9 + 3 * 11));
    for row in &table.rows {
        let _ = write!(out, "{:>9}", row.closeness);
        for c in SignalClass::ALL {
            let mut rec = Record::new("cell").field("closeness", row.closeness).field("class", c);
            let text = match row.cells.get(&c) {
                Some(Cell::Value { loss, feasible }) => {
                    rec = rec.field("loss_db", loss).field("feasible", feasible);
                    format!("{loss}{}", if *feasible { " " } else { "*" })
                }
                Some(Cell::Undefined { via_full_backbone }) => {
                    rec = rec.field("loss_db", "-");
                    if let Some(v) = via_full_backbone {
                        rec = rec.field("via_full_backbone_db", v);
                    }
                    "– ".to_string()
                }
                None => {
                    rec = rec.field("loss_db", "-");
                    "- ".to_string()
                }
            };
            let _ = write!(out, " | {text:>8}");
            records.push(rec);
        }
        out.push('\n');
    }
    let (b, text) = boundary_records(&table.boundaries);
    records.extend(b);
    let _ = write!(out, "\n* over budget\nBoundary of served cases:\n{text}");
    ReportDocument { kind: ReportKind::LossTable, records, table: out, violations: Vec::new() }
}

pub fn capacity_report(report: &CapacityReport, extension: Option<&ExtensionVerdict>) -> ReportDocument {
    let mut records = Vec::new();
    let mut out = String::new();
    let mut rec = Record::new("capacity").field("node_kind", report.node_kind);
    match report.max_access_networks {
        Some(n) => {
            rec = rec
                .field("max_access_networks", n)
                .field("users_per_an", report.users_per_an)
                .field("total_users", n * report.users_per_an);
            let _ = writeln!(out, "N={n}, {} users ({} per access network)", n * report.users_per_an, report.users_per_an);
        }
        None => {
            rec = rec.field("max_access_networks", "unbounded").field("users_per_an", report.users_per_an);
            let _ = writeln!(out, "N unbounded: every size up to the search limit is feasible ({} users per access network)", report.users_per_an);
        }
    }
    if let Some(f) = report.limiting_factor {
        rec = rec.field("limiting_factor", f);
        let _ = writeln!(out, "Limited by: {f}");
    }
    if let Some(w) = report.required_width_nm {
        rec = rec.field("required_width_nm", format!("{w:.1}"));
        let _ = writeln!(out, "Widest source pair needs {w:.1} nm");
    }
    records.push(rec);
    if !report.witnesses.is_empty() {
        out.push_str("Worst path per class at this size:\n");
        for w in &report.witnesses {
            let _ = writeln!(out, "  {w}");
            records.push(path_record("witness", w));
        }
    }
    if !report.violations.is_empty() {
        out.push_str("One access network more breaks:\n");
        for w in report.violations.iter().take(5) {
            let _ = writeln!(out, "  {w}");
        }
        for w in &report.violations {
            records.push(path_record("next_size_violation", w));
        }
    }
    let mut violations = Vec::new();
    if report.max_access_networks == Some(0) {
        violations.push("no size of this network fits the budget".to_string());
    }
    if let Some(v) = extension {
        let _ = writeln!(out, "\nExtension from {} to {} access networks: {}", v.from, v.to, if v.feasible { "feasible" } else { "infeasible" });
        records.push(Record::new("extension").field("from", v.from).field("to", v.to).field("feasible", v.feasible));
        for n in &v.notes {
            let _ = writeln!(out, "  {n}");
        }
        for w in &v.violations {
            let _ = writeln!(out, "  {w}");
            records.push(path_record("extension_violation", w));
        }
        let (b, text) = boundary_records(&v.boundaries);
        records.extend(b);
        out.push_str(&text);
    }
    ReportDocument { kind: ReportKind::Capacity, records, table: out, violations }
}

pub fn plan_report(plan: &ChannelPlan) -> ReportDocument {
    let mut records = Vec::new();
    let mut out = String::new();
    let _ = writeln!(out, "{:<4} | {:>6} | {:>7} | {:>9} | {:>7} | {:>8}", "AN", "Conv.", "Quant.", "Entangled", "One-way", "Reserved");
    let _ = writeln!(out, "{}", "-".repeat(57));
    for (i, a) in plan.assignments.iter().enumerate() {
        let conv = a.conventional.map_or("-".to_string(), |c| c.to_string());
        let ent = plan.entangled_count(i);
        let one = plan.one_way_count(i);
        let res = plan.channels_of(i, |r| *r == DwdmRole::Reserved).len();
        let _ = writeln!(out, "{:<4} | {conv:>6} | {:>7} | {ent:>9} | {one:>7} | {res:>8}", format!("A{}", i + 1), a.quantum.to_string());
        records.push(
            Record::new("assignment")
                .field("access_network", format!("A{}", i + 1))
                .field("conventional", &conv)
                .field("quantum", a.quantum)
                .field("entangled_channels", ent)
                .field("one_way_channels", one)
                .field("reserved_channels", res),
        );
    }
    out.push_str("\nSources:\n");
    for (si, s) in plan.sources.iter().enumerate() {
        let serves: Vec<String> = s.serves.iter().map(|(a, b)| format!("(A{}, A{})", a + 1, b + 1)).collect();
        let pairs = plan.pairs_of(si).len();
        let _ = writeln!(
            out,
            "  S{}: center {:.2} nm, width {:.1} nm, serves {}, {pairs} channel pair(s)",
            si + 1,
            s.spec.center_wavelength_nm(),
            s.spec.spectral_width_nm,
            serves.join(" ")
        );
        records.push(
            Record::new("source")
                .field("id", format!("S{}", si + 1))
                .field("center_nm", format!("{:.2}", s.spec.center_wavelength_nm()))
                .field("nominal_center_nm", s.nominal_center_nm)
                .field("width_nm", format!("{:.1}", s.spec.spectral_width_nm))
                .field("serves", serves.join("").replace(' ', ""))
                .field("channel_pairs", pairs),
        );
    }
    ReportDocument { kind: ReportKind::ChannelPlan, records, table: out, violations: Vec::new() }
}

pub fn schedule_report(schedule: &Schedule, verdicts: &[ConfigurationVerdict]) -> ReportDocument {
    let mut records = Vec::new();
    let mut violations = Vec::new();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} configuration(s); lower bound {}; {}",
        schedule.len(),
        schedule.lower_bound,
        if schedule.proven_minimal { "minimal" } else { "greedy, a shorter schedule may exist" }
    );
    records.push(
        Record::new("schedule")
            .field("configurations", schedule.len())
            .field("lower_bound", schedule.lower_bound)
            .field("proven_minimal", schedule.proven_minimal)
            .field("non_minimal_possible", schedule.non_minimal_possible),
    );
    for (ci, c) in schedule.configurations.iter().enumerate() {
        let _ = writeln!(out, "\nConfiguration {}:", ci + 1);
        for r in &c.served {
            let legs: Vec<String> = r.legs.iter().map(|l| format!("{}>A{}", l.channel, l.dest + 1)).collect();
            let losses: Vec<String> = r.losses.iter().map(|(k, v)| format!("{k} {v} dB")).collect();
            let via = r.source.map_or(String::new(), |s| format!(" from S{}", s + 1));
            let _ = writeln!(out, "  {}{via}: {} [{}]", r.demand, losses.join(", "), legs.join(" "));
            let mut rec = Record::new("served")
                .field("configuration", ci + 1)
                .field("kind", match r.demand.kind {
                    DemandKind::Direct => "direct",
                    DemandKind::Entangled => "entangled",
                })
                .field("a", format!("A{}", r.demand.a + 1))
                .field("b", format!("A{}", r.demand.b + 1))
                .field("source", r.source.map_or("-".to_string(), |s| format!("S{}", s + 1)));
            for (k, v) in &r.losses {
                rec = rec.field(&format!("{k}_db"), v);
            }
            records.push(rec.field("legs", legs.join(",")));
        }
        let _ = writeln!(out, "  switch settings: {}", c.config.len());
        if let Some(v) = verdicts.get(ci) {
            records.push(Record::new("verdict").field("configuration", ci + 1).field("valid", v.is_valid()));
            for x in &v.violations {
                violations.push(format!("configuration {}: {x}", ci + 1));
            }
        }
    }
    ReportDocument { kind: ReportKind::Schedule, records, table: out, violations }
}

pub fn validation_report(net: &NetworkModel, reports: &[PathLossReport]) -> ReportDocument {
    let mut records = vec![Record::new("network")
        .field("kind", net.kind)
        .field("node_kind", net.node_kind().map_or("-".to_string(), |k| k.to_string()))
        .field("access_networks", net.n_access())
        .field("links", net.links.len())
        .field("users", net.users.len())
        .field("sources", net.sources.len())];
    let mut out = format!(
        "{} backbone, {} access networks, {} spans, {} users, {} sources\n",
        net.kind,
        net.n_access(),
        net.links.len(),
        net.users.len(),
        net.sources.len()
    );
    for w in &net.warnings {
        let _ = writeln!(out, "warning: {w}");
        records.push(Record::new("warning").field("text", w));
    }
    let mut violations = Vec::new();
    for class in SignalClass::ALL {
        let of: Vec<&PathLossReport> = reports.iter().filter(|r| r.class == class).collect();
        let Some(worst) = of.iter().max_by_key(|r| r.total) else { continue };
        let _ = writeln!(out, "  {class}: {} paths checked, worst {} dB", of.len(), worst.total);
        records.push(path_record("worst", worst));
    }
    for r in reports.iter().filter(|r| !r.feasible) {
        violations.push(r.to_string());
        records.push(path_record("over_budget", r));
    }
    out.push_str(if violations.is_empty() { "All required paths are within budget.\n" } else { "" });
    ReportDocument { kind: ReportKind::Validation, records, table: out, violations }
}

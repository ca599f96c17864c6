//! Command dispatch shared by the binary and the tests.

use std::str::FromStr;

use crate::capacity::{feasibility_of_extension, max_access_networks_with, required_reports, synthesize_channel_plan};
use crate::config::{parse_config, ConfigDocument};
use crate::error::{Error, Result};
use crate::loss::worst_case_analysis;
use crate::report::{
    capacity_report, loss_table_report, plan_report, schedule_report, validation_report, ReportDocument,
};
use crate::scheduler::{schedule, validate_configuration, ScheduleOptions};
use crate::topology::TopologyKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_BAD_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    LossReport,
    Capacity,
    Plan,
    Schedule,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "validate" => Command::Validate,
            "loss-report" => Command::LossReport,
            "capacity" => Command::Capacity,
            "plan" => Command::Plan,
            "schedule" => Command::Schedule,
            other => return Err(Error::InvalidArgument(format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    /// Line records instead of the rendered table.
    pub records: bool,
    /// With `capacity`: also try growing the network by this many access
    /// networks.
    pub extend: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command on configuration text.
pub fn run(command: Command, config_text: &str, flags: Flags) -> Outcome {
    let doc = match parse_config(config_text) {
        Ok(d) => d,
        Err(e) => return bad_config(e),
    };
    match build_report(command, &doc, flags) {
        Ok(report) => {
            let code = if report.is_feasible() { EXIT_OK } else { EXIT_INFEASIBLE };
            Outcome { code, stdout: report.render(flags.records), stderr: String::new() }
        }
        Err(e @ Error::Config(_)) => bad_config(e),
        Err(e) => Outcome { code: EXIT_INFEASIBLE, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn bad_config(e: Error) -> Outcome {
    Outcome { code: EXIT_BAD_CONFIG, stdout: String::new(), stderr: format!("{e}\n") }
}

fn build_report(command: Command, doc: &ConfigDocument, flags: Flags) -> Result<ReportDocument> {
    let net = doc.network()?;
    let budgets = doc.budgets()?;
    match command {
        Command::Validate => Ok(validation_report(&net, &required_reports(&net, &budgets)?)),
        Command::LossReport => Ok(loss_table_report(&net, &worst_case_analysis(&net, &budgets)?)),
        Command::Capacity => {
            let Some(kind) = net.node_kind() else {
                return Err(Error::InvalidArgument("a star has a single access network; capacity applies to backbones".into()));
            };
            let opts = doc.reference_options()?;
            let report = max_access_networks_with(kind, &budgets, doc.source_width_nm(&net)?, &opts)?;
            let ext = flags.extend.map(|k| feasibility_of_extension(&net, k, &budgets)).transpose()?;
            Ok(capacity_report(&report, ext.as_ref()))
        }
        Command::Plan => {
            let opts = doc.plan_options(&net)?;
            match synthesize_channel_plan(net.n_access(), &opts) {
                Ok(plan) => Ok(plan_report(&plan)),
                Err(e @ Error::PlanDeficit(_)) => {
                    let mut r = ReportDocument {
                        kind: crate::report::ReportKind::ChannelPlan,
                        records: Vec::new(),
                        table: String::new(),
                        violations: Vec::new(),
                    };
                    r.violations.push(e.to_string());
                    Ok(r)
                }
                Err(e) => Err(e),
            }
        }
        Command::Schedule => {
            if net.kind != TopologyKind::Mesh {
                return Err(Error::InvalidArgument(format!("schedule applies to mesh backbones, not {}", net.kind)));
            }
            let demands = doc.demand_set(net.n_access())?;
            let opts = ScheduleOptions { budgets, ..Default::default() };
            let s = schedule(&net, &demands, &net.quantum_channels, &net.conventional_channels, &opts)?;
            let verdicts: Vec<_> = s
                .configurations
                .iter()
                .map(|c| {
                    validate_configuration(
                        &net,
                        &c.config,
                        &c.demands(),
                        &net.quantum_channels,
                        &net.conventional_channels,
                        &budgets,
                    )
                })
                .collect();
            Ok(schedule_report(&s, &verdicts))
        }
    }
}

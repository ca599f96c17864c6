//! How many access networks each design supports, and what one more costs.

use qmon::capacity::{default_source_width, feasibility_of_extension, max_access_networks};
use qmon::catalog::NodeKind;
use qmon::loss::{Budget, Budgets};
use qmon::report::capacity_report;
use qmon::topology::{build_reference_network, TopologyKind};

fn main() -> qmon::Result<()> {
    let budgets = Budgets::default();
    for kind in [NodeKind::CwdmOadmSimple, NodeKind::PassiveOadm, NodeKind::ActivePxc] {
        let report = max_access_networks(kind, &budgets, default_source_width(kind))?;
        println!("== {kind}\n{}", capacity_report(&report, None).render(false));
    }

    // A narrower source caps the entanglement-only ring before the budget does.
    let narrow = max_access_networks(NodeKind::CwdmOadmSimple, &budgets, 70.0)?;
    println!("70 nm source: N={:?}, limited by {:?}", narrow.max_access_networks, narrow.limiting_factor);

    let tight = max_access_networks(NodeKind::CwdmOadmSimple, &Budgets::uniform(Budget::db(25.0)), 160.0)?;
    println!("25 dB budget: N={:?}", tight.max_access_networks);

    let ring = build_reference_network(TopologyKind::Ring, 3, Some(NodeKind::PassiveOadm))?;
    let v = feasibility_of_extension(&ring, 1, &budgets)?;
    println!("\nring 3 -> 4: feasible = {}", v.feasible);
    for p in v.violations.iter().take(3) {
        println!("  {p}");
    }
    Ok(())
}

//! Worst-case path losses of the passive ring and the switched mesh.

use qmon::loss::{worst_case_analysis, Budgets};
use qmon::report::loss_table_report;
use qmon::topology::{build_reference_network, TopologyKind};

fn main() -> qmon::Result<()> {
    for (kind, n) in [(TopologyKind::Ring, 3), (TopologyKind::Mesh, 4)] {
        let net = build_reference_network(kind, n, None)?;
        let table = worst_case_analysis(&net, &Budgets::default())?;
        println!("{}", loss_table_report(&net, &table).render(false));
    }
    Ok(())
}

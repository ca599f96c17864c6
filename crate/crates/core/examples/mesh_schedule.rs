//! Switch configurations that together connect every pair of access
//! networks on the four-node mesh, with a proof that fewer cannot.

use qmon::loss::Budgets;
use qmon::report::schedule_report;
use qmon::scheduler::{certify_minimal, schedule, validate_configuration, DemandSet, ScheduleOptions};
use qmon::topology::{build_reference_network, TopologyKind};

fn main() -> qmon::Result<()> {
    let net = build_reference_network(TopologyKind::Mesh, 4, None)?;
    let (q, c) = (&net.quantum_channels, &net.conventional_channels);
    let budgets = Budgets::default();
    let demands = DemandSet::all_pairs(4, false);

    let s = schedule(&net, &demands, q, c, &ScheduleOptions::default())?;
    let verdicts: Vec<_> =
        s.configurations.iter().map(|conf| validate_configuration(&net, &conf.config, &conf.demands(), q, c, &budgets)).collect();
    println!("{}", schedule_report(&s, &verdicts).render(false));

    let cert = certify_minimal(&net, &demands, q, c, &budgets, s.len())?;
    println!(
        "{} realizable demand sets, largest holds {}; {} configurations minimal: {}",
        cert.realizable_sets,
        cert.largest_configuration,
        s.len(),
        cert.certifies()
    );

    let with_self = schedule(&net, &DemandSet::all_pairs(4, true), q, c, &ScheduleOptions::default())?;
    println!("with pairs inside each access network: {} configurations", with_self.len());
    Ok(())
}

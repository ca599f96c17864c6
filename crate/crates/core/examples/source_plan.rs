//! One pair source per pair of access networks, and what merging shared
//! midpoints saves.

use qmon::source::{plan_sources_for_pairs, PlannerOptions};
use qmon::wdm_grid::CwdmChannel;

fn main() -> qmon::Result<()> {
    let chans = [CwdmChannel::new(1510)?, CwdmChannel::new(1530)?, CwdmChannel::new(1550)?];
    for overlap in [false, true] {
        let opts = PlannerOptions { overlap, ..PlannerOptions::default() };
        let plan = plan_sources_for_pairs(&chans, &opts)?;
        println!("overlap = {overlap}: {} sources", plan.sources.len());
        for (i, s) in plan.sources.iter().enumerate() {
            let serves: Vec<String> =
                s.serves.iter().map(|&(a, b)| format!("({}, {})", chans[a], chans[b])).collect();
            println!(
                "  S{}: center {} nm, needs {:.1} nm, serves {}",
                i + 1,
                s.nominal_center_nm,
                s.required_width_nm,
                serves.join(" ")
            );
        }
    }
    Ok(())
}

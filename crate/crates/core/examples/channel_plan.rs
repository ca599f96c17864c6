//! Channel plans: shared O/C layout for the passive ring and the
//! entanglement-only layout, plus turning a one-way pair into an entangled one.

use qmon::capacity::{synthesize_channel_plan, ChannelPlanOptions, DwdmRole};
use qmon::report::plan_report;

fn main() -> qmon::Result<()> {
    let mut plan = synthesize_channel_plan(3, &ChannelPlanOptions::default())?;
    println!("{}", plan_report(&plan).render(false));

    // Hand a free channel pair of A1/A2 to the source serving them.
    let s = plan.sources.iter().position(|s| s.serves == vec![(0, 1)]).expect("A1-A2 source");
    let candidate = plan
        .channels_of(0, |r| *r == DwdmRole::OneWay)
        .into_iter()
        .find(|c| plan.sources[s].spec.partner_of(c).is_ok_and(|p| plan.roles.get(&p) == Some(&DwdmRole::OneWay)));
    if let Some(ch) = candidate {
        let partner = plan.convert_one_way(s, ch)?;
        plan.check()?;
        println!("converted {ch} <-> {partner} to S{}; A1 now has {} entangled channels\n", s + 1, plan.entangled_count(0));
    }

    let wide = synthesize_channel_plan(8, &ChannelPlanOptions::entanglement_only())?;
    println!("{}", plan_report(&wide).render(false));
    Ok(())
}

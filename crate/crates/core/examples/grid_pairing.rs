//! DWDM slices of CWDM channels and the mirror pairing of a pair source.

use qmon::source::{pair_center, EntangledSourceSpec};
use qmon::wdm_grid::{dwdm_channels_in, dwdm_fit_count, CwdmChannel, GridSpacing};

fn main() -> qmon::Result<()> {
    let spacing = GridSpacing::GHZ_100;
    println!("{} DWDM channels fit a 13 nm CWDM passband at 100 GHz", dwdm_fit_count(13.0, spacing));

    let (a, b) = (CwdmChannel::new(1510)?, CwdmChannel::new(1530)?);
    let (center, shift) = pair_center(&a, &b, spacing);
    println!("source for {a}+{b}: {center} ({:.2} nm), snapped by {shift} MHz", center.wavelength_nm());

    let mut source = EntangledSourceSpec::new(center, spacing)?;
    for ch in dwdm_channels_in(&a, spacing).iter().take(4) {
        let partner = source.connect_pair(ch)?;
        let sum = ch.center_frequency().as_mhz() + partner.center_frequency().as_mhz();
        println!("  {ch} <-> {partner}  (sum {sum} MHz = 2 x center)");
    }
    println!("pairing closed: {}", source.is_pairing_closed());
    Ok(())
}

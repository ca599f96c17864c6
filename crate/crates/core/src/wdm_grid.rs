//! CWDM and DWDM channel arithmetic.
//!
//! DWDM channels live on the ITU-T G.694.1 grid anchored at 193.1 THz and are
//! identified by an integer index, so equality and the frequency mirror used
//! for entangled pairs are exact. Frequencies and wavelengths are derived on
//! demand.
//!
//! A CWDM channel (ITU-T G.694.2, 1270..=1610 nm every 20 nm) groups a block
//! of DWDM channels. The block size follows the usual planning rule of
//! `floor(passband / channel width)` with the channel width taken at the grid
//! anchor (0.80 nm per 100 GHz), which assumes the access AWG band is aligned
//! with the CWDM passband.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Frequency, SPEED_OF_LIGHT_NM_THZ};

/// Grid anchor, 193.1 THz.
pub const ANCHOR: Frequency = Frequency::mhz(193_100_000);

pub const CWDM_FIRST_NM: u32 = 1270;
pub const CWDM_LAST_NM: u32 = 1610;
pub const CWDM_STEP_NM: u32 = 20;
pub const DEFAULT_CWDM_PASSBAND_NM: f64 = 13.0;

/// DWDM channel spacing, stored in MHz so 12.5 GHz grids stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridSpacing(u32);

impl GridSpacing {
    pub const GHZ_100: GridSpacing = GridSpacing(100_000);

    pub fn mhz(mhz: i64) -> Result<Self> {
        if mhz <= 0 || mhz % 2 != 0 || mhz > u32::MAX as i64 {
            return Err(Error::InvalidSpacing(mhz));
        }
        Ok(GridSpacing(mhz as u32))
    }

    pub fn ghz(ghz: f64) -> Result<Self> {
        GridSpacing::mhz((ghz * 1000.0).round() as i64)
    }

    pub const fn as_mhz(self) -> u32 {
        self.0
    }

    pub fn as_ghz(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Width of one channel in nm at the grid anchor.
    pub fn width_nm_at_anchor(self) -> f64 {
        let f = ANCHOR.as_thz();
        SPEED_OF_LIGHT_NM_THZ / (f * f) * (self.0 as f64 / 1e6)
    }
}

impl Default for GridSpacing {
    fn default() -> Self {
        GridSpacing::GHZ_100
    }
}

/// A channel of the DWDM grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DwdmChannel {
    pub index: i32,
    pub spacing: GridSpacing,
}

impl DwdmChannel {
    pub fn new(index: i32, spacing: GridSpacing) -> Self {
        DwdmChannel { index, spacing }
    }

    pub fn center_frequency(&self) -> Frequency {
        Frequency::mhz(ANCHOR.as_mhz() + self.index as i64 * self.spacing.as_mhz() as i64)
    }

    pub fn wavelength_nm(&self) -> f64 {
        wavelength_of(self)
    }

    /// Spacing-wide passband in nm, `(short edge, long edge)`.
    pub fn passband_nm(&self) -> (f64, f64) {
        let f = self.center_frequency().as_thz();
        let half = self.spacing.as_mhz() as f64 / 2e6;
        (SPEED_OF_LIGHT_NM_THZ / (f + half), SPEED_OF_LIGHT_NM_THZ / (f - half))
    }
}

impl fmt::Display for DwdmChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{:.2}", self.wavelength_nm())
    }
}

/// Vacuum wavelength of a DWDM channel center, in nm.
pub fn wavelength_of(ch: &DwdmChannel) -> f64 {
    SPEED_OF_LIGHT_NM_THZ / ch.center_frequency().as_thz()
}

/// Frequency in THz of a vacuum wavelength in nm.
pub fn frequency_of(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT_NM_THZ / wavelength_nm
}

/// A CWDM channel, written `C<nm>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CwdmChannel {
    nominal_nm: u32,
    /// Passband width in 0.01 nm.
    passband_centi_nm: u32,
}

impl CwdmChannel {
    pub fn new(nominal_nm: u32) -> Result<Self> {
        CwdmChannel::with_passband(nominal_nm, DEFAULT_CWDM_PASSBAND_NM)
    }

    pub fn with_passband(nominal_nm: u32, passband_nm: f64) -> Result<Self> {
        if !(CWDM_FIRST_NM..=CWDM_LAST_NM).contains(&nominal_nm)
            || !(nominal_nm - CWDM_FIRST_NM).is_multiple_of(CWDM_STEP_NM)
        {
            return Err(Error::InvalidCwdmWavelength(nominal_nm));
        }
        // Wider than the 20 nm pitch would overlap the neighbours.
        if !(passband_nm > 0.0 && passband_nm <= CWDM_STEP_NM as f64) {
            return Err(Error::InvalidPassband(passband_nm));
        }
        Ok(CwdmChannel {
            nominal_nm,
            passband_centi_nm: (passband_nm * 100.0).round() as u32,
        })
    }

    /// All 18 channels of the grid with the given passband.
    pub fn all(passband_nm: f64) -> Result<Vec<CwdmChannel>> {
        (CWDM_FIRST_NM..=CWDM_LAST_NM)
            .step_by(CWDM_STEP_NM as usize)
            .map(|nm| CwdmChannel::with_passband(nm, passband_nm))
            .collect()
    }

    pub fn nominal_nm(&self) -> u32 {
        self.nominal_nm
    }

    /// Position on the CWDM grid, 0 for C1270.
    pub fn grid_position(&self) -> u32 {
        (self.nominal_nm - CWDM_FIRST_NM) / CWDM_STEP_NM
    }

    pub fn passband_width_nm(&self) -> f64 {
        self.passband_centi_nm as f64 / 100.0
    }

    pub fn passband_nm(&self) -> (f64, f64) {
        let half = self.passband_width_nm() / 2.0;
        let c = self.nominal_nm as f64;
        (c - half, c + half)
    }

    pub fn center_frequency(&self) -> Frequency {
        Frequency::from_wavelength_nm(self.nominal_nm as f64)
    }

    /// Same channel, same passband, `steps` grid positions away.
    pub fn offset(&self, steps: i32) -> Result<CwdmChannel> {
        let nm = self.nominal_nm as i64 + steps as i64 * CWDM_STEP_NM as i64;
        if nm < 0 {
            return Err(Error::InvalidCwdmWavelength(0));
        }
        CwdmChannel::with_passband(nm as u32, self.passband_width_nm())
    }

    /// Band whose range contains the whole passband, if any.
    pub fn band(&self) -> Option<BandKind> {
        [Band::o_conventional(), Band::c_quantum()]
            .into_iter()
            .find(|b| b.contains_cwdm(self))
            .map(|b| b.kind)
    }
}

impl fmt::Display for CwdmChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.nominal_nm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// O band, conventional signals.
    OConventional,
    /// C band and its vicinity, quantum signals.
    CQuantum,
}

impl fmt::Display for BandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandKind::OConventional => "O (conventional)",
            BandKind::CQuantum => "C (quantum)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub kind: BandKind,
    pub lo_nm: f64,
    pub hi_nm: f64,
}

impl Band {
    pub const fn o_conventional() -> Band {
        Band { kind: BandKind::OConventional, lo_nm: 1260.0, hi_nm: 1360.0 }
    }

    pub const fn c_quantum() -> Band {
        Band { kind: BandKind::CQuantum, lo_nm: 1500.0, hi_nm: 1600.0 }
    }

    pub fn of(kind: BandKind) -> Band {
        match kind {
            BandKind::OConventional => Band::o_conventional(),
            BandKind::CQuantum => Band::c_quantum(),
        }
    }

    pub fn contains_cwdm(&self, c: &CwdmChannel) -> bool {
        let (lo, hi) = c.passband_nm();
        lo >= self.lo_nm - 1e-9 && hi <= self.hi_nm + 1e-9
    }

    pub fn overlaps(&self, lo_nm: f64, hi_nm: f64) -> bool {
        lo_nm <= self.hi_nm && hi_nm >= self.lo_nm
    }

    /// Edge-to-edge gap to another band (negative when overlapping).
    pub fn gap_nm(&self, other: &Band) -> f64 {
        if self.hi_nm <= other.lo_nm {
            other.lo_nm - self.hi_nm
        } else {
            self.lo_nm - other.hi_nm
        }
    }

    /// CWDM channels whose whole passband fits inside the band.
    pub fn cwdm_channels(&self, passband_nm: f64) -> Result<Vec<CwdmChannel>> {
        Ok(CwdmChannel::all(passband_nm)?
            .into_iter()
            .filter(|c| self.contains_cwdm(c))
            .collect())
    }
}

/// Number of spacing-wide DWDM channels that fit a CWDM passband.
pub fn dwdm_fit_count(passband_nm: f64, spacing: GridSpacing) -> usize {
    (passband_nm / spacing.width_nm_at_anchor() + 1e-9).floor().max(0.0) as usize
}

/// Grid indices of the DWDM block inside a CWDM channel: `dwdm_fit_count`
/// consecutive channels centered on the CWDM center frequency. Empty when not
/// even one channel fits.
pub fn dwdm_block(c: &CwdmChannel, spacing: GridSpacing) -> RangeInclusive<i32> {
    let count = dwdm_fit_count(c.passband_width_nm(), spacing) as i64;
    if count == 0 {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    let pos = (c.center_frequency().as_mhz() - ANCHOR.as_mhz()) as f64 / spacing.as_mhz() as f64;
    let start = (pos - (count - 1) as f64 / 2.0).round() as i64;
    (start as i32)..=((start + count - 1) as i32)
}

/// Every DWDM channel carried inside the CWDM channel, in ascending index.
pub fn dwdm_channels_in(c: &CwdmChannel, spacing: GridSpacing) -> Vec<DwdmChannel> {
    dwdm_block(c, spacing).map(|i| DwdmChannel::new(i, spacing)).collect()
}

/// The CWDM channel (with the given passband) whose DWDM block holds `ch`.
pub fn cwdm_parent(ch: &DwdmChannel, passband_nm: f64) -> Option<CwdmChannel> {
    CwdmChannel::all(passband_nm)
        .ok()?
        .into_iter()
        .find(|c| dwdm_block(c, ch.spacing).contains(&ch.index))
}

/// Twice the grid position of `center`; the mirror of index `i` is `m - i`.
pub fn mirror_sum(center: Frequency, spacing: GridSpacing) -> Result<i64> {
    let doubled = 2 * (center.as_mhz() - ANCHOR.as_mhz());
    let s = spacing.as_mhz() as i64;
    if doubled % s != 0 {
        return Err(Error::PairingNotGridAligned {
            center_mhz: center.as_mhz(),
            spacing_mhz: spacing.as_mhz(),
        });
    }
    Ok(doubled / s)
}

/// Snaps a frequency to the nearest point where the grid mirrors onto itself
/// (a channel center or a midpoint between two channels).
pub fn snap_to_half_grid(f: Frequency, spacing: GridSpacing) -> Frequency {
    let half = spacing.as_mhz() as i64 / 2;
    let steps = ((f.as_mhz() - ANCHOR.as_mhz()) as f64 / half as f64).round() as i64;
    Frequency::mhz(ANCHOR.as_mhz() + steps * half)
}

/// The channel whose photons are frequency-correlated with `ch` for a pair
/// source centered at `source_center`: `f' = 2·f_c − f`.
pub fn entangled_partner(ch: &DwdmChannel, source_center: Frequency) -> Result<DwdmChannel> {
    let m = mirror_sum(source_center, ch.spacing)?;
    Ok(DwdmChannel::new((m - ch.index as i64) as i32, ch.spacing))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(nm: u32) -> CwdmChannel {
        CwdmChannel::new(nm).unwrap()
    }

    #[test]
    fn anchor_channel_wavelength() {
        let ch = DwdmChannel::new(0, GridSpacing::GHZ_100);
        // 299792.458 / 193.1 = 1552.5243...
        assert!((wavelength_of(&ch) - 1552.524).abs() < 5e-4);
    }

    #[test]
    fn index_ten_is_194_1_thz() {
        let ch = DwdmChannel::new(10, GridSpacing::GHZ_100);
        assert_eq!(ch.center_frequency(), Frequency::thz(194.1));
    }

    #[test]
    fn opposite_indices_bracket_anchor() {
        let lo = DwdmChannel::new(-10, GridSpacing::GHZ_100).wavelength_nm();
        let hi = DwdmChannel::new(10, GridSpacing::GHZ_100).wavelength_nm();
        let anchor = DwdmChannel::new(0, GridSpacing::GHZ_100).wavelength_nm();
        assert!(hi < anchor && anchor < lo);
    }

    #[test]
    fn wavelength_frequency_round_trip() {
        for i in [-300, -17, 0, 5, 44, 390] {
            let ch = DwdmChannel::new(i, GridSpacing::GHZ_100);
            let f = frequency_of(wavelength_of(&ch));
            let rel = (f - ch.center_frequency().as_thz()).abs() / f;
            assert!(rel < 1e-9);
        }
    }

    #[test]
    fn c1550_block_sizes() {
        assert_eq!(dwdm_channels_in(&c(1550), GridSpacing::GHZ_100).len(), 16);
        assert_eq!(dwdm_channels_in(&c(1550), GridSpacing::ghz(200.0).unwrap()).len(), 8);
        let narrow = CwdmChannel::with_passband(1550, 0.5).unwrap();
        assert!(dwdm_channels_in(&narrow, GridSpacing::GHZ_100).is_empty());
    }

    #[test]
    fn block_is_centered_on_cwdm_channel() {
        let block = dwdm_channels_in(&c(1550), GridSpacing::GHZ_100);
        let first = block.first().unwrap().wavelength_nm();
        let last = block.last().unwrap().wavelength_nm();
        assert!(((first + last) / 2.0 - 1550.0).abs() < 0.5);
        for ch in &block {
            assert_eq!(cwdm_parent(ch, DEFAULT_CWDM_PASSBAND_NM), Some(c(1550)));
        }
    }

    #[test]
    fn cwdm_validation() {
        assert!(CwdmChannel::new(1260).is_err());
        assert!(CwdmChannel::new(1551).is_err());
        assert!(CwdmChannel::new(1630).is_err());
        assert!(CwdmChannel::with_passband(1550, 0.0).is_err());
        assert!(CwdmChannel::with_passband(1550, 21.0).is_err());
        assert_eq!(CwdmChannel::all(13.0).unwrap().len(), 18);
    }

    #[test]
    fn bands_are_disjoint_and_far_apart() {
        let o = Band::o_conventional();
        let q = Band::c_quantum();
        assert!(o.gap_nm(&q) >= 140.0);
        assert_eq!(c(1310).band(), Some(BandKind::OConventional));
        assert_eq!(c(1550).band(), Some(BandKind::CQuantum));
        assert_eq!(c(1450).band(), None);
    }

    #[test]
    fn partner_about_1530_maps_c1510_into_c1550() {
        let spacing = GridSpacing::GHZ_100;
        let mid = Frequency::mhz(
            (c(1510).center_frequency().as_mhz() + c(1550).center_frequency().as_mhz()) / 2,
        );
        let center = snap_to_half_grid(mid, spacing);
        let block_1550 = dwdm_block(&c(1550), spacing);
        let hits = dwdm_channels_in(&c(1510), spacing)
            .iter()
            .map(|ch| entangled_partner(ch, center).unwrap())
            .filter(|p| block_1550.contains(&p.index))
            .count();
        assert!(hits >= 14, "only {hits} partners landed in C1550");
    }

    #[test]
    fn degenerate_channel_is_fixed_point() {
        let ch = DwdmChannel::new(7, GridSpacing::GHZ_100);
        assert_eq!(entangled_partner(&ch, ch.center_frequency()).unwrap(), ch);
    }

    #[test]
    fn off_grid_center_is_rejected() {
        let ch = DwdmChannel::new(0, GridSpacing::GHZ_100);
        let err = entangled_partner(&ch, Frequency::mhz(ANCHOR.as_mhz() + 20_000)).unwrap_err();
        assert!(err.to_string().contains("pairing not grid-aligned"));
        // A half-step center is fine.
        assert!(entangled_partner(&ch, Frequency::mhz(ANCHOR.as_mhz() + 50_000)).is_ok());
    }
}

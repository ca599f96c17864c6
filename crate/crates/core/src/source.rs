//! Broadband pair sources: spectral coverage, channel pairing, per-channel
//! pair rates and the planning of which sources serve which access-network
//! pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Frequency, SPEED_OF_LIGHT_NM_THZ};
use crate::wdm_grid::{
    cwdm_parent, dwdm_block, entangled_partner, mirror_sum, snap_to_half_grid, Band, CwdmChannel, DwdmChannel,
    GridSpacing,
};

pub const DEFAULT_SPECTRAL_WIDTH_NM: f64 = 70.0;
/// Pairs/s per mW of pump per GHz of optical bandwidth.
pub const DEFAULT_PAIR_RATE_DENSITY: f64 = 4.5e5;
/// Above this pump power multi-pair emission starts to matter.
pub const MULTI_PAIR_PUMP_LIMIT_MW: f64 = 1.0;
pub const NOMINAL_PUMP_NM: f64 = 775.0;
pub const PUMP_TOLERANCE_NM: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SourceWarning {
    MultiPairRisk { pump_power_mw: f64 },
    PumpOutsideNominal { pump_nm: f64 },
}

impl fmt::Display for SourceWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceWarning::MultiPairRisk { pump_power_mw } => {
                write!(f, "pump power {pump_power_mw} mW exceeds {MULTI_PAIR_PUMP_LIMIT_MW} mW; multi-pair emission likely")
            }
            SourceWarning::PumpOutsideNominal { pump_nm } => {
                write!(f, "pump wavelength {pump_nm:.1} nm outside {NOMINAL_PUMP_NM}±{PUMP_TOLERANCE_NM} nm")
            }
        }
    }
}

/// A degenerate SPDC source. Only the center frequency is stored; the pump
/// wavelength is always exactly half the center wavelength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntangledSourceSpec {
    center: Frequency,
    spacing: GridSpacing,
    pub spectral_width_nm: f64,
    pub pair_rate_density: f64,
    pub pump_power_mw: f64,
    connected: BTreeSet<DwdmChannel>,
}

impl EntangledSourceSpec {
    /// `center` must mirror the grid onto itself.
    pub fn new(center: Frequency, spacing: GridSpacing) -> Result<Self> {
        mirror_sum(center, spacing)?;
        Ok(EntangledSourceSpec {
            center,
            spacing,
            spectral_width_nm: DEFAULT_SPECTRAL_WIDTH_NM,
            pair_rate_density: DEFAULT_PAIR_RATE_DENSITY,
            pump_power_mw: 1.0,
            connected: BTreeSet::new(),
        })
    }

    /// Center given as a wavelength, snapped to the nearest mirror point of
    /// the grid.
    pub fn from_center_wavelength(center_nm: f64, spacing: GridSpacing) -> Result<Self> {
        EntangledSourceSpec::new(snap_to_half_grid(Frequency::from_wavelength_nm(center_nm), spacing), spacing)
    }

    pub fn from_pump_wavelength(pump_nm: f64, spacing: GridSpacing) -> Result<Self> {
        EntangledSourceSpec::from_center_wavelength(2.0 * pump_nm, spacing)
    }

    pub fn with_width(mut self, nm: f64) -> Self {
        self.spectral_width_nm = nm;
        self
    }

    pub fn with_pump_power(mut self, mw: f64) -> Self {
        self.pump_power_mw = mw;
        self
    }

    pub fn center(&self) -> Frequency {
        self.center
    }

    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    pub fn center_wavelength_nm(&self) -> f64 {
        self.center.wavelength_nm()
    }

    pub fn pump_wavelength_nm(&self) -> f64 {
        self.center_wavelength_nm() / 2.0
    }

    /// `[center − width/2, center + width/2]` in nm.
    pub fn coverage(&self) -> (f64, f64) {
        let c = self.center_wavelength_nm();
        (c - self.spectral_width_nm / 2.0, c + self.spectral_width_nm / 2.0)
    }

    fn inside(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.coverage();
        lo >= a - 1e-9 && hi <= b + 1e-9
    }

    pub fn covers_channel(&self, ch: &DwdmChannel) -> bool {
        let (lo, hi) = ch.passband_nm();
        self.inside(lo, hi)
    }

    pub fn covers_cwdm(&self, c: &CwdmChannel) -> bool {
        let (lo, hi) = c.passband_nm();
        self.inside(lo, hi)
    }

    /// Partner of `ch`, also checking both lie in the emitted spectrum.
    pub fn partner_of(&self, ch: &DwdmChannel) -> Result<DwdmChannel> {
        let partner = entangled_partner(ch, self.center)?;
        let (lo_nm, hi_nm) = self.coverage();
        if !self.covers_channel(ch) {
            return Err(Error::ChannelOutsideCoverage { channel: ch.to_string(), lo_nm, hi_nm });
        }
        if !self.covers_channel(&partner) {
            return Err(Error::PartnerOutsideSpectrum {
                channel: ch.to_string(),
                partner: partner.to_string(),
                lo_nm,
                hi_nm,
            });
        }
        Ok(partner)
    }

    /// Wires `ch` and its partner to the network. Returns the partner.
    pub fn connect_pair(&mut self, ch: &DwdmChannel) -> Result<DwdmChannel> {
        let partner = self.partner_of(ch)?;
        self.connected.insert(*ch);
        self.connected.insert(partner);
        Ok(partner)
    }

    pub fn connected(&self) -> &BTreeSet<DwdmChannel> {
        &self.connected
    }

    pub fn is_pairing_closed(&self) -> bool {
        self.connected
            .iter()
            .all(|ch| entangled_partner(ch, self.center).map(|p| self.connected.contains(&p)).unwrap_or(false))
    }

    pub fn warnings(&self) -> Vec<SourceWarning> {
        let mut w = Vec::new();
        if self.pump_power_mw > MULTI_PAIR_PUMP_LIMIT_MW {
            w.push(SourceWarning::MultiPairRisk { pump_power_mw: self.pump_power_mw });
        }
        let pump = self.pump_wavelength_nm();
        if (pump - NOMINAL_PUMP_NM).abs() > PUMP_TOLERANCE_NM + 1e-9 {
            w.push(SourceWarning::PumpOutsideNominal { pump_nm: pump });
        }
        w
    }

    /// Pairs/s into one channel of the grid. The output spectrum is flat,
    /// so every in-coverage channel of equal width gets the same rate.
    pub fn pair_rate_per_channel(&self, ch: &DwdmChannel) -> Result<f64> {
        self.partner_of(ch)?;
        Ok(self.pair_rate_density * self.pump_power_mw * ch.spacing.as_ghz())
    }

    /// Distinct non-degenerate pairs with one channel in each block, each
    /// reported once as `(lower index, higher index)`.
    pub fn pairs_between(&self, a: &CwdmChannel, b: &CwdmChannel) -> Vec<(DwdmChannel, DwdmChannel)> {
        let block_b = dwdm_block(b, self.spacing);
        let mut out = BTreeSet::new();
        for i in dwdm_block(a, self.spacing) {
            let ch = DwdmChannel::new(i, self.spacing);
            let Ok(p) = self.partner_of(&ch) else { continue };
            if p != ch && block_b.contains(&p.index) {
                out.insert(if ch < p { (ch, p) } else { (p, ch) });
            }
        }
        out.into_iter().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// A switch picks one source per CWDM channel at a time.
    SwitchedCwdm,
    /// Switches pick the source of every DWDM channel.
    SwitchedDwdm,
    /// No switches; each source owns a fixed DWDM set.
    FixedSplit,
}

/// Which DWDM channels each source drives (at one instant for switched
/// schemes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionScheme {
    pub kind: SchemeKind,
    pub allocation: BTreeMap<usize, BTreeSet<DwdmChannel>>,
}

impl ConnectionScheme {
    pub fn validate(&self, cwdm_passband_nm: f64) -> Result<()> {
        let mut owner: BTreeMap<String, usize> = BTreeMap::new();
        for (&src, channels) in &self.allocation {
            let keys: BTreeSet<String> = match self.kind {
                SchemeKind::SwitchedCwdm => channels
                    .iter()
                    .map(|ch| cwdm_parent(ch, cwdm_passband_nm).map_or_else(|| ch.to_string(), |c| c.to_string()))
                    .collect(),
                SchemeKind::SwitchedDwdm | SchemeKind::FixedSplit => channels.iter().map(|c| c.to_string()).collect(),
            };
            for k in keys {
                if let Some(prev) = owner.insert(k.clone(), src) {
                    return Err(Error::InvalidArgument(format!(
                        "{k} driven by both source {} and source {}",
                        prev + 1,
                        src + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerOptions {
    pub spacing: GridSpacing,
    pub max_width_nm: f64,
    /// Let one source also serve pairs sharing its midpoint.
    pub overlap: bool,
    pub quantum_band: Band,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            spacing: GridSpacing::GHZ_100,
            max_width_nm: DEFAULT_SPECTRAL_WIDTH_NM,
            overlap: false,
            quantum_band: Band::c_quantum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedSource {
    pub spec: EntangledSourceSpec,
    /// Mean of the two CWDM nominal wavelengths of the widest served pair.
    pub nominal_center_nm: f64,
    /// Served access-network pairs as indices into the planner input, `i <= j`.
    pub serves: Vec<(usize, usize)>,
    pub required_width_nm: f64,
    /// Snapped center minus the exact frequency midpoint.
    pub center_shift_mhz: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfeasiblePair {
    pub pair: (usize, usize),
    pub required_width_nm: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SourcePlan {
    pub sources: Vec<PlannedSource>,
    pub infeasible: Vec<InfeasiblePair>,
}

impl SourcePlan {
    pub fn source_for(&self, pair: (usize, usize)) -> Option<usize> {
        let pair = (pair.0.min(pair.1), pair.0.max(pair.1));
        self.sources.iter().position(|s| s.serves.contains(&pair))
    }
}

/// Full width a source centered at `center` needs to cover both passbands.
pub fn required_width_nm(center: Frequency, a: &CwdmChannel, b: &CwdmChannel) -> f64 {
    let c = SPEED_OF_LIGHT_NM_THZ / center.as_thz();
    let lo = a.passband_nm().0.min(b.passband_nm().0);
    let hi = a.passband_nm().1.max(b.passband_nm().1);
    2.0 * (c - lo).max(hi - c)
}

/// Source center for a pair: the frequency midpoint snapped onto the grid.
pub fn pair_center(a: &CwdmChannel, b: &CwdmChannel, spacing: GridSpacing) -> (Frequency, i64) {
    let raw = Frequency::mhz((a.center_frequency().as_mhz() + b.center_frequency().as_mhz()) / 2);
    let snapped = snap_to_half_grid(raw, spacing);
    (snapped, snapped.as_mhz() - raw.as_mhz())
}

/// One source per unordered access-network pair (self-pairs included), or
/// fewer with `overlap`, where a source also serves the other pairs sharing
/// its midpoint if their blocks mirror onto each other and fit its width.
pub fn plan_sources_for_pairs(an_channels: &[CwdmChannel], opts: &PlannerOptions) -> Result<SourcePlan> {
    let distinct: BTreeSet<_> = an_channels.iter().map(|c| c.nominal_nm()).collect();
    if distinct.len() != an_channels.len() {
        return Err(Error::InvalidArgument("access-network CWDM channels must be distinct".into()));
    }
    if let Some(c) = an_channels.iter().find(|c| !opts.quantum_band.contains_cwdm(c)) {
        return Err(Error::InvalidArgument(format!("{c} lies outside the quantum band")));
    }

    let n = an_channels.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut plan = SourcePlan::default();
    let mut served = vec![false; pairs.len()];

    // Group by nominal midpoint; the widest pair of a group anchors it.
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    if opts.overlap {
        order.sort_by_key(|&k| {
            let (i, j) = pairs[k];
            let mid = an_channels[i].nominal_nm() + an_channels[j].nominal_nm();
            let span = an_channels[j].nominal_nm().abs_diff(an_channels[i].nominal_nm());
            (mid, std::cmp::Reverse(span), k)
        });
    }

    for &k in &order {
        if served[k] {
            continue;
        }
        let (i, j) = pairs[k];
        let (a, b) = (&an_channels[i], &an_channels[j]);
        let (center, shift) = pair_center(a, b, opts.spacing);
        let width = required_width_nm(center, a, b);
        if width > opts.max_width_nm + 1e-9 {
            plan.infeasible.push(InfeasiblePair { pair: (i, j), required_width_nm: width });
            served[k] = true;
            continue;
        }
        let spec = EntangledSourceSpec::new(center, opts.spacing)?.with_width(opts.max_width_nm);
        let mut source = PlannedSource {
            nominal_center_nm: (a.nominal_nm() + b.nominal_nm()) as f64 / 2.0,
            serves: vec![(i, j)],
            required_width_nm: width,
            center_shift_mhz: shift,
            spec,
        };
        served[k] = true;

        if opts.overlap {
            let mid = a.nominal_nm() + b.nominal_nm();
            for &other in &order {
                if served[other] {
                    continue;
                }
                let (p, q) = pairs[other];
                let (pa, pb) = (&an_channels[p], &an_channels[q]);
                if pa.nominal_nm() + pb.nominal_nm() != mid {
                    continue;
                }
                let w = required_width_nm(center, pa, pb);
                if w <= opts.max_width_nm + 1e-9 && !source.spec.pairs_between(pa, pb).is_empty() {
                    source.serves.push((p, q));
                    source.required_width_nm = source.required_width_nm.max(w);
                    served[other] = true;
                }
            }
            source.serves.sort();
        }
        plan.sources.push(source);
    }
    plan.infeasible.sort_by_key(|p| p.pair);
    Ok(plan)
}

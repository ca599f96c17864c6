use thiserror::Error;

use crate::catalog::{NodeAction, NodeKind, SignalClass};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pairing not grid-aligned: source center {center_mhz} MHz does not mirror the {spacing_mhz} MHz grid")]
    PairingNotGridAligned { center_mhz: i64, spacing_mhz: u32 },

    #[error("partner outside source spectrum: {channel} maps to {partner} outside [{lo_nm:.2}, {hi_nm:.2}] nm")]
    PartnerOutsideSpectrum {
        channel: String,
        partner: String,
        lo_nm: f64,
        hi_nm: f64,
    },

    #[error("channel {channel} lies outside the source coverage [{lo_nm:.2}, {hi_nm:.2}] nm")]
    ChannelOutsideCoverage { channel: String, lo_nm: f64, hi_nm: f64 },

    #[error("{0} nm is not a CWDM grid wavelength (1270..=1610 in 20 nm steps)")]
    InvalidCwdmWavelength(u32),

    #[error("invalid CWDM passband {0} nm (must be in (0, 20])")]
    InvalidPassband(f64),

    #[error("invalid DWDM grid spacing {0} MHz (must be positive and even)")]
    InvalidSpacing(i64),

    #[error("component `{component}` does not operate in the {band} band")]
    ComponentOutOfRange { component: String, band: String },

    #[error("action {action} is not defined for {class} signals on a {kind} node")]
    UndefinedNodeAction {
        kind: NodeKind,
        action: NodeAction,
        class: SignalClass,
    },

    #[error("no CWDM mux loss configured for {0} channels")]
    MissingMuxLoss(u8),

    #[error("CWDM channel count {0} outside 1..=18")]
    InvalidChannelCount(u32),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("no route for channel {channel}: {reason}")]
    NoRoute { channel: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("channel plan infeasible: {0}")]
    PlanDeficit(String),

    #[error("demand {demand} cannot be served in any configuration: {reason}")]
    UnservableDemand { demand: String, reason: String },

    #[error("{0}")]
    Config(String),
}

//! Fixed-point physical quantities shared by every module.
//!
//! Losses are kept in hundredths of a dB so that sums over long routes are
//! exact and golden tables compare bit-for-bit. Lengths are whole meters and
//! optical frequencies whole MHz.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Speed of light expressed in nm·THz, so `λ[nm] = C / f[THz]`.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

/// An attenuation in dB at 0.01 dB resolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Db(i64);

impl Db {
    pub const ZERO: Db = Db(0);

    pub const fn from_centi(centi: i64) -> Self {
        Db(centi)
    }

    /// Rounds to the nearest 0.01 dB.
    pub fn from_db(db: f64) -> Self {
        Db((db * 100.0).round() as i64)
    }

    pub const fn centi(self) -> i64 {
        self.0
    }

    pub fn as_db(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Always two decimals, used in machine-readable records.
    pub fn fixed(self) -> String {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        format!("{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

/// Trailing zeros are dropped (`11`, `2.4`, `2.64`), the way loss tables
/// are usually typeset.
impl fmt::Display for Db {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.fixed();
        let s = s.trim_end_matches('0').trim_end_matches('.');
        f.write_str(s)
    }
}

impl Add for Db {
    type Output = Db;
    fn add(self, rhs: Db) -> Db {
        Db(self.0 + rhs.0)
    }
}

impl AddAssign for Db {
    fn add_assign(&mut self, rhs: Db) {
        self.0 += rhs.0;
    }
}

impl Sub for Db {
    type Output = Db;
    fn sub(self, rhs: Db) -> Db {
        Db(self.0 - rhs.0)
    }
}

impl Mul<i64> for Db {
    type Output = Db;
    fn mul(self, rhs: i64) -> Db {
        Db(self.0 * rhs)
    }
}

impl Sum for Db {
    fn sum<I: Iterator<Item = Db>>(iter: I) -> Db {
        iter.fold(Db::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Db> for Db {
    fn sum<I: Iterator<Item = &'a Db>>(iter: I) -> Db {
        iter.copied().sum()
    }
}

/// A fiber length in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distance(u64);

impl Distance {
    pub const fn meters(m: u64) -> Self {
        Distance(m)
    }

    pub fn km(km: f64) -> Self {
        Distance((km * 1000.0).round().max(0.0) as u64)
    }

    pub const fn as_meters(self) -> u64 {
        self.0
    }

    pub fn as_km(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Attenuation of this length for a per-km coefficient, rounded half up
    /// to 0.01 dB.
    pub fn attenuation(self, per_km: Db) -> Db {
        let milli = per_km.centi() * self.0 as i64;
        Db::from_centi((milli + 500).div_euclid(1000))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} km", self.as_km())
    }
}

/// An optical frequency in MHz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(i64);

impl Frequency {
    pub const fn mhz(mhz: i64) -> Self {
        Frequency(mhz)
    }

    pub fn thz(thz: f64) -> Self {
        Frequency((thz * 1e6).round() as i64)
    }

    /// Frequency of a vacuum wavelength, rounded to the nearest MHz.
    pub fn from_wavelength_nm(nm: f64) -> Self {
        Frequency::thz(SPEED_OF_LIGHT_NM_THZ / nm)
    }

    pub const fn as_mhz(self) -> i64 {
        self.0
    }

    pub fn as_thz(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn wavelength_nm(self) -> f64 {
        SPEED_OF_LIGHT_NM_THZ / self.as_thz()
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} THz", self.as_thz())
    }
}

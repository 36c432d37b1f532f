//! Domain records produced by ingestion and consumed by the fusion join.

use alloc::string::String;
use serde::{Deserialize, Serialize};

use crate::date::Date;

/// Australian state/territory, matching major-station metadata codes.
#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    WA,
    QLD,
    VIC,
    TAS,
    SA,
    NSW,
    NT,
    ACT,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::WA,
        Region::QLD,
        Region::VIC,
        Region::TAS,
        Region::SA,
        Region::NSW,
        Region::NT,
        Region::ACT,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Region::WA => "WA",
            Region::QLD => "QLD",
            Region::VIC => "VIC",
            Region::TAS => "TAS",
            Region::SA => "SA",
            Region::NSW => "NSW",
            Region::NT => "NT",
            Region::ACT => "ACT",
        }
    }

    pub fn from_code(code: &str) -> Option<Region> {
        Region::ALL.iter().copied().find(|r| r.code() == code)
    }
}

/// One satellite fire detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireEvent {
    pub latitude: f64,
    pub longitude: f64,
    pub date: Date,
    /// Minutes since midnight UTC.
    pub minutes: u32,
    /// Fire radiative power, megawatts.
    pub frp: f64,
    /// Detection confidence 0..=100; parsed but unused by default.
    pub confidence: Option<u8>,
}

/// One station-day of meteorological observations. Variables are optional
/// per cell: a station missing precipitation on a day still contributes its
/// other variables to interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherDay {
    pub station_id: String,
    pub region: Region,
    pub latitude: f64,
    pub longitude: f64,
    pub date: Date,
    pub tmin: Option<f64>,
    pub tmax: Option<f64>,
    pub tavg: Option<f64>,
    pub prcp: Option<f64>,
    pub wspd: Option<f64>,
}

/// One location-date vegetation-index value from a 16-day composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdviSample {
    pub latitude: f64,
    pub longitude: f64,
    /// Start of the 16-day compositing period.
    pub composite_date: Date,
    pub ndvi: f64,
}

/// Fire-risk class derived from capped FRP.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum RiskClass {
    Low,
    Medium,
    High,
}

impl RiskClass {
    pub fn name(self) -> &'static str {
        match self {
            RiskClass::Low => "low",
            RiskClass::Medium => "medium",
            RiskClass::High => "high",
        }
    }

    /// Class index in train matrices: low=0, then medium (3-class), high last.
    pub fn index(self, n_classes: usize) -> usize {
        match (self, n_classes) {
            (RiskClass::Low, _) => 0,
            (RiskClass::Medium, _) => 1,
            (RiskClass::High, 2) => 1,
            (RiskClass::High, _) => 2,
        }
    }
}

//! Parsers for the three input file families. Parsing is total: after the
//! header validates, every row either becomes a record or lands in the drop
//! summary, so `kept + dropped == rows` always holds.

use std::collections::HashMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use pyrocast_core::date::Date;
use pyrocast_core::types::{FireEvent, NdviSample, Region, WeatherDay};
use serde::{Deserialize, Serialize};

use crate::{PipelineError, Result};

/// Australia bounding box used to filter fire detections.
pub const AUS_LAT: (f64, f64) = (-44.0, -10.0);
pub const AUS_LON: (f64, f64) = (113.0, 154.0);

/// Per-cause drop counts for one parsed file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropSummary {
    /// Data rows seen (header excluded).
    pub rows: usize,
    /// A required cell was empty or the row was short.
    pub missing: usize,
    /// A cell failed to parse or violated a value constraint.
    pub invalid: usize,
    /// Coordinates outside the Australia bounding box.
    pub out_of_bounds: usize,
    /// Date outside the configured study window.
    pub out_of_window: usize,
    /// tmin > tmax.
    pub inconsistent: usize,
    /// NDVI outside [-1, 1].
    pub out_of_range: usize,
}

impl DropSummary {
    pub fn dropped(&self) -> usize {
        self.missing
            + self.invalid
            + self.out_of_bounds
            + self.out_of_window
            + self.inconsistent
            + self.out_of_range
    }

    pub fn kept(&self) -> usize {
        self.rows - self.dropped()
    }
}

/// Header lookup that fails with the missing column's name.
struct Header {
    index: HashMap<String, usize>,
}

impl Header {
    fn new(record: &csv::StringRecord, path: &Path, required: &[&str]) -> Result<Header> {
        let index: HashMap<String, usize> = record
            .iter()
            .enumerate()
            .map(|(i, name)| (name.trim().to_string(), i))
            .collect();
        for col in required {
            if !index.contains_key(*col) {
                return Err(PipelineError::Schema(format!(
                    "{}: missing required column `{col}`",
                    path.display()
                )));
            }
        }
        Ok(Header { index })
    }

    fn cell<'r>(&self, row: &'r csv::StringRecord, col: &str) -> Option<&'r str> {
        let s = row.get(*self.index.get(col)?)?.trim();
        (!s.is_empty()).then_some(s)
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(PipelineError::io(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn parse_iso_date(s: &str) -> Option<Date> {
    let d = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
    Some(Date::from_ymd(d.year(), d.month(), d.day()))
}

/// "HHMM" (or "HMM"/"MM"/"M") to minutes since midnight.
fn parse_acq_time(s: &str) -> Option<u32> {
    let raw: u32 = s.parse().ok()?;
    let (h, m) = (raw / 100, raw % 100);
    (h < 24 && m < 60).then_some(h * 60 + m)
}

/// Parse a FIRMS-style fire extract. The brightness column, if present, is
/// ignored; rows with missing required cells, unparseable values, or
/// coordinates outside Australia are dropped and counted.
pub fn parse_fire_events(path: &Path) -> Result<(Vec<FireEvent>, DropSummary)> {
    let mut reader = open_reader(path)?;
    let header = Header::new(
        reader
            .headers()
            .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?,
        path,
        &["latitude", "longitude", "acq_date", "acq_time", "frp"],
    )?;
    let mut events = Vec::new();
    let mut summary = DropSummary::default();
    for row in reader.records() {
        let Ok(row) = row else {
            summary.rows += 1;
            summary.invalid += 1;
            continue;
        };
        summary.rows += 1;
        let required = (
            header.cell(&row, "latitude"),
            header.cell(&row, "longitude"),
            header.cell(&row, "acq_date"),
            header.cell(&row, "acq_time"),
            header.cell(&row, "frp"),
        );
        let (Some(lat), Some(lon), Some(date), Some(time), Some(frp)) = required else {
            summary.missing += 1;
            continue;
        };
        let parsed = (
            lat.parse::<f64>().ok(),
            lon.parse::<f64>().ok(),
            parse_iso_date(date),
            parse_acq_time(time),
            frp.parse::<f64>().ok(),
        );
        let (Some(lat), Some(lon), Some(date), Some(minutes), Some(frp)) = parsed else {
            summary.invalid += 1;
            continue;
        };
        if !frp.is_finite() || frp < 0.0 {
            summary.invalid += 1;
            continue;
        }
        if !(AUS_LAT.0..=AUS_LAT.1).contains(&lat) || !(AUS_LON.0..=AUS_LON.1).contains(&lon) {
            summary.out_of_bounds += 1;
            continue;
        }
        let confidence = header
            .cell(&row, "confidence")
            .and_then(|s| s.parse::<u8>().ok())
            .filter(|&c| c <= 100);
        events.push(FireEvent {
            latitude: lat,
            longitude: lon,
            date,
            minutes,
            frp,
            confidence,
        });
    }
    Ok((events, summary))
}

/// Parse a station-day weather extract. The five variable columns must exist
/// but individual cells may be empty; rows with tmin > tmax are dropped as
/// inconsistent, and rows outside the study window are dropped.
pub fn parse_weather(
    path: &Path,
    window: (Date, Date),
) -> Result<(Vec<WeatherDay>, DropSummary)> {
    let mut reader = open_reader(path)?;
    let header = Header::new(
        reader
            .headers()
            .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?,
        path,
        &[
            "station_id",
            "region",
            "latitude",
            "longitude",
            "date",
            "tmin",
            "tmax",
            "tavg",
            "prcp",
            "wspd",
        ],
    )?;
    let mut days = Vec::new();
    let mut summary = DropSummary::default();
    for row in reader.records() {
        let Ok(row) = row else {
            summary.rows += 1;
            summary.invalid += 1;
            continue;
        };
        summary.rows += 1;
        let required = (
            header.cell(&row, "station_id"),
            header.cell(&row, "region"),
            header.cell(&row, "latitude"),
            header.cell(&row, "longitude"),
            header.cell(&row, "date"),
        );
        let (Some(station_id), Some(region_code), Some(lat), Some(lon), Some(date)) = required
        else {
            summary.missing += 1;
            continue;
        };
        let Some(region) = Region::from_code(region_code) else {
            return Err(PipelineError::Schema(format!(
                "{}: unknown region code `{region_code}` (row {})",
                path.display(),
                summary.rows
            )));
        };
        let parsed = (lat.parse::<f64>().ok(), lon.parse::<f64>().ok(), parse_iso_date(date));
        let (Some(latitude), Some(longitude), Some(date)) = parsed else {
            summary.invalid += 1;
            continue;
        };
        if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
            summary.invalid += 1;
            continue;
        }
        if date < window.0 || date > window.1 {
            summary.out_of_window += 1;
            continue;
        }
        // optional variables: empty cells are fine, garbage is not
        let mut bad_cell = false;
        let mut var = |name: &str| -> Option<f64> {
            match header.cell(&row, name) {
                None => None,
                Some(s) => match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        bad_cell = true;
                        None
                    }
                },
            }
        };
        let (tmin, tmax, tavg, prcp, wspd) =
            (var("tmin"), var("tmax"), var("tavg"), var("prcp"), var("wspd"));
        if bad_cell
            || prcp.is_some_and(|v| v < 0.0)
            || wspd.is_some_and(|v| v < 0.0)
        {
            summary.invalid += 1;
            continue;
        }
        if let (Some(lo), Some(hi)) = (tmin, tmax) {
            if lo > hi {
                summary.inconsistent += 1;
                continue;
            }
        }
        days.push(WeatherDay {
            station_id: station_id.to_string(),
            region,
            latitude,
            longitude,
            date,
            tmin,
            tmax,
            tavg,
            prcp,
            wspd,
        });
    }
    Ok((days, summary))
}

/// Parse a point-sampled NDVI extract. Values outside [-1, 1] are dropped;
/// composite dates are normalized to the start of their 16-day period.
pub fn parse_ndvi(path: &Path) -> Result<(Vec<NdviSample>, DropSummary)> {
    let mut reader = open_reader(path)?;
    let header = Header::new(
        reader
            .headers()
            .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?,
        path,
        &["latitude", "longitude", "composite_date", "ndvi"],
    )?;
    let mut samples = Vec::new();
    let mut summary = DropSummary::default();
    for row in reader.records() {
        let Ok(row) = row else {
            summary.rows += 1;
            summary.invalid += 1;
            continue;
        };
        summary.rows += 1;
        let required = (
            header.cell(&row, "latitude"),
            header.cell(&row, "longitude"),
            header.cell(&row, "composite_date"),
            header.cell(&row, "ndvi"),
        );
        let (Some(lat), Some(lon), Some(date), Some(ndvi)) = required else {
            summary.missing += 1;
            continue;
        };
        let parsed = (
            lat.parse::<f64>().ok(),
            lon.parse::<f64>().ok(),
            parse_iso_date(date),
            ndvi.parse::<f64>().ok(),
        );
        let (Some(latitude), Some(longitude), Some(date), Some(ndvi)) = parsed else {
            summary.invalid += 1;
            continue;
        };
        if !(-1.0..=1.0).contains(&ndvi) {
            summary.out_of_range += 1;
            continue;
        }
        samples.push(NdviSample {
            latitude,
            longitude,
            composite_date: date.composite_start_16d(),
            ndvi,
        });
    }
    Ok((samples, summary))
}

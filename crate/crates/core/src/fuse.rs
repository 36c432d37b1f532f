//! Spatio-temporal join of fire events with station weather and NDVI samples.
//!
//! Each event is matched to the weather stations inside the search radius that
//! reported on the event's date; every weather variable is IDW-interpolated
//! over the stations carrying that variable, the nearest matched station
//! supplies region and distance, and the event is aligned with the closest
//! NDVI composite inside the day window. Events that cannot be fully matched
//! are excluded and counted per cause.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::geo::{idw, GridIndex};
use crate::types::{FireEvent, NdviSample, Region, WeatherDay};
use crate::Result;

/// Join parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuseConfig {
    /// Station search radius around an event, km.
    pub radius_km: f64,
    /// IDW exponent.
    pub idw_power: f64,
    /// Maximum |event date - composite date| in days.
    pub ndvi_window_days: i32,
    /// Maximum distance to the nearest NDVI sample point, km. Samples are
    /// expected pre-extracted at event coordinates; this guards misuse.
    pub ndvi_max_km: f64,
}

impl Default for FuseConfig {
    fn default() -> Self {
        FuseConfig {
            radius_km: 5.0,
            idw_power: 2.0,
            ndvi_window_days: 8,
            ndvi_max_km: 2.5,
        }
    }
}

/// Why an event was dropped from the join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionCause {
    /// No station with weather data inside the radius on the event date.
    NoStation,
    /// Stations matched, but some weather variable had no contributing
    /// station on the event date.
    MissingWeatherVar,
    /// No NDVI sample point nearby, or none within the day window.
    NoNdvi,
}

impl ExclusionCause {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionCause::NoStation => "no_station",
            ExclusionCause::MissingWeatherVar => "missing_weather_var",
            ExclusionCause::NoNdvi => "no_ndvi",
        }
    }
}

/// Per-cause exclusion counts for one fuse run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionSummary {
    pub no_station: usize,
    pub missing_weather_var: usize,
    pub no_ndvi: usize,
}

impl ExclusionSummary {
    pub fn total(&self) -> usize {
        self.no_station + self.missing_weather_var + self.no_ndvi
    }

    fn bump(&mut self, cause: ExclusionCause) {
        match cause {
            ExclusionCause::NoStation => self.no_station += 1,
            ExclusionCause::MissingWeatherVar => self.missing_weather_var += 1,
            ExclusionCause::NoNdvi => self.no_ndvi += 1,
        }
    }
}

/// A fire event joined with interpolated weather and an NDVI composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedRecord {
    pub event: FireEvent,
    pub region: Region,
    pub tmin: f64,
    pub tmax: f64,
    pub tavg: f64,
    pub prcp: f64,
    pub wspd: f64,
    /// Distance to the nearest matched station, metres.
    pub distance_m: f64,
    pub ndvi: f64,
    /// Signed days from event date to the chosen composite date.
    pub ndvi_lag_days: i32,
}

/// Weather stations in a spatial index plus their per-date observations.
pub struct StationIndex {
    grid: GridIndex,
    meta: BTreeMap<String, (f64, f64, Region)>,
    /// station id -> date -> index into the weather slice
    days: BTreeMap<String, BTreeMap<Date, usize>>,
    radius_km: f64,
}

impl StationIndex {
    /// Build from station-day rows; station coordinates and region come from
    /// each station's first row.
    pub fn build(weather: &[WeatherDay], radius_km: f64) -> Self {
        let mut meta: BTreeMap<String, (f64, f64, Region)> = BTreeMap::new();
        let mut days: BTreeMap<String, BTreeMap<Date, usize>> = BTreeMap::new();
        for (i, w) in weather.iter().enumerate() {
            meta.entry(w.station_id.clone())
                .or_insert((w.latitude, w.longitude, w.region));
            days.entry(w.station_id.clone()).or_default().insert(w.date, i);
        }
        let grid = GridIndex::build(
            meta.iter().map(|(id, &(lat, lon, _))| (id.clone(), lat, lon)),
            radius_km,
        );
        StationIndex {
            grid,
            meta,
            days,
            radius_km,
        }
    }

    pub fn n_stations(&self) -> usize {
        self.meta.len()
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    /// Stations within `radius_km` of `p`, sorted ascending by distance with
    /// ties broken by station id.
    pub fn stations_within(&self, p: (f64, f64), radius_km: f64) -> Vec<(&str, f64)> {
        self.grid.within(p.0, p.1, radius_km)
    }

    pub fn region_of(&self, station_id: &str) -> Option<Region> {
        self.meta.get(station_id).map(|&(_, _, r)| r)
    }

    fn day_row(&self, station_id: &str, date: Date) -> Option<usize> {
        self.days.get(station_id)?.get(&date).copied()
    }
}

/// NDVI samples grouped by sample location in a spatial index.
pub struct NdviIndex {
    grid: GridIndex,
    /// Per location: (composite date, ndvi), sorted by date.
    locations: Vec<Vec<(Date, f64)>>,
}

impl NdviIndex {
    pub fn build(samples: &[NdviSample], radius_km: f64) -> Self {
        let mut by_loc: BTreeMap<(u64, u64), Vec<(Date, f64)>> = BTreeMap::new();
        for s in samples {
            by_loc
                .entry((s.latitude.to_bits(), s.longitude.to_bits()))
                .or_default()
                .push((s.composite_date, s.ndvi));
        }
        // Sort locations by coordinates so index order (and therefore id
        // tie-breaking) does not depend on input order.
        let mut locs: Vec<((f64, f64), Vec<(Date, f64)>)> = by_loc
            .into_iter()
            .map(|((la, lo), mut v)| {
                v.sort_by_key(|&(d, _)| d);
                ((f64::from_bits(la), f64::from_bits(lo)), v)
            })
            .collect();
        locs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let grid = GridIndex::build(
            locs.iter()
                .enumerate()
                .map(|(i, ((lat, lon), _))| (format!("{i:08}"), *lat, *lon)),
            radius_km,
        );
        NdviIndex {
            grid,
            locations: locs.into_iter().map(|(_, v)| v).collect(),
        }
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    /// Samples at the nearest location within `max_km`, if any.
    pub fn nearest_samples(&self, p: (f64, f64), max_km: f64) -> Option<&[(Date, f64)]> {
        let (id, _) = self.grid.nearest_within(p.0, p.1, max_km)?;
        let idx: usize = id.parse().ok()?;
        Some(&self.locations[idx])
    }
}

/// Pick the composite minimizing |composite date - event date|, ties broken
/// toward the earlier composite; `None` when the best lag exceeds the window.
pub fn match_ndvi(
    samples: &[(Date, f64)],
    event_date: Date,
    window_days: i32,
) -> Option<(f64, i32)> {
    let mut best: Option<(i32, Date, f64)> = None; // (|lag|, date, ndvi)
    for &(date, ndvi) in samples {
        let lag = event_date.days_until(date);
        let key = (lag.abs(), date);
        match best {
            Some((ba, bd, _)) if (ba, bd) <= key => {}
            _ => best = Some((lag.abs(), date, ndvi)),
        }
    }
    let (abs_lag, date, ndvi) = best?;
    if abs_lag > window_days {
        return None;
    }
    Some((ndvi, event_date.days_until(date)))
}

const WEATHER_VARS: usize = 5;

fn var_value(w: &WeatherDay, var: usize) -> Option<f64> {
    match var {
        0 => w.tmin,
        1 => w.tmax,
        2 => w.tavg,
        3 => w.prcp,
        _ => w.wspd,
    }
}

fn fuse_one(
    event: &FireEvent,
    weather: &[WeatherDay],
    stations: &StationIndex,
    ndvi: &NdviIndex,
    config: &FuseConfig,
) -> core::result::Result<FusedRecord, ExclusionCause> {
    let hits = stations.stations_within((event.latitude, event.longitude), config.radius_km);
    // A station counts only if it reported on the event date.
    let matched: Vec<(&str, f64, usize)> = hits
        .into_iter()
        .filter_map(|(id, d)| stations.day_row(id, event.date).map(|row| (id, d, row)))
        .collect();
    let (nearest_id, nearest_km, _) = *matched.first().ok_or(ExclusionCause::NoStation)?;

    let mut vars = [0.0; WEATHER_VARS];
    for (var, slot) in vars.iter_mut().enumerate() {
        let samples: Vec<(f64, f64)> = matched
            .iter()
            .filter_map(|&(_, d, row)| var_value(&weather[row], var).map(|v| (d, v)))
            .collect();
        if samples.is_empty() {
            return Err(ExclusionCause::MissingWeatherVar);
        }
        *slot = idw(&samples, config.idw_power).expect("non-empty samples");
    }

    let candidates = ndvi
        .nearest_samples((event.latitude, event.longitude), config.ndvi_max_km)
        .ok_or(ExclusionCause::NoNdvi)?;
    let (ndvi_value, lag) =
        match_ndvi(candidates, event.date, config.ndvi_window_days).ok_or(ExclusionCause::NoNdvi)?;

    Ok(FusedRecord {
        event: event.clone(),
        region: stations.region_of(nearest_id).expect("matched station has metadata"),
        tmin: vars[0],
        tmax: vars[1],
        tavg: vars[2],
        prcp: vars[3],
        wspd: vars[4],
        distance_m: nearest_km * 1000.0,
        ndvi: ndvi_value,
        ndvi_lag_days: lag,
    })
}

/// Join every event with weather and NDVI. Output order equals event order;
/// excluded events are counted per cause, so
/// `fused.len() + summary.total() == events.len()`.
pub fn fuse(
    events: &[FireEvent],
    weather: &[WeatherDay],
    ndvi: &[NdviSample],
    config: &FuseConfig,
) -> Result<(Vec<FusedRecord>, ExclusionSummary)> {
    let stations = StationIndex::build(weather, config.radius_km);
    let ndvi_index = NdviIndex::build(ndvi, config.ndvi_max_km);

    #[cfg(feature = "parallel")]
    let outcomes: Vec<core::result::Result<FusedRecord, ExclusionCause>> = {
        use rayon::prelude::*;
        events
            .par_iter()
            .map(|e| fuse_one(e, weather, &stations, &ndvi_index, config))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<core::result::Result<FusedRecord, ExclusionCause>> = events
        .iter()
        .map(|e| fuse_one(e, weather, &stations, &ndvi_index, config))
        .collect();

    let mut fused = Vec::new();
    let mut summary = ExclusionSummary::default();
    for outcome in outcomes {
        match outcome {
            Ok(rec) => fused.push(rec),
            Err(cause) => summary.bump(cause),
        }
    }
    Ok((fused, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn event(lat: f64, lon: f64, date: Date) -> FireEvent {
        FireEvent {
            latitude: lat,
            longitude: lon,
            date,
            minutes: 90,
            frp: 12.0,
            confidence: Some(80),
        }
    }

    fn station(id: &str, lat: f64, lon: f64, date: Date) -> WeatherDay {
        WeatherDay {
            station_id: id.to_string(),
            region: Region::NSW,
            latitude: lat,
            longitude: lon,
            date,
            tmin: Some(12.0),
            tmax: Some(25.0),
            tavg: Some(18.0),
            prcp: Some(0.0),
            wspd: Some(15.0),
        }
    }

    #[test]
    fn match_ndvi_prefers_smaller_lag() {
        let d0 = Date::from_ymd(2020, 6, 15);
        let samples = vec![(Date(d0.0 - 3), 0.4), (Date(d0.0 + 5), 0.6)];
        assert_eq!(match_ndvi(&samples, d0, 8), Some((0.4, -3)));
    }

    #[test]
    fn match_ndvi_window_exceeded() {
        let d0 = Date::from_ymd(2020, 6, 15);
        let samples = vec![(Date(d0.0 + 9), 0.4)];
        assert_eq!(match_ndvi(&samples, d0, 8), None);
    }

    #[test]
    fn match_ndvi_tie_goes_to_earlier_composite() {
        let d0 = Date::from_ymd(2020, 6, 15);
        let samples = vec![(Date(d0.0 - 4), 0.4), (Date(d0.0 + 4), 0.6)];
        assert_eq!(match_ndvi(&samples, d0, 8), Some((0.4, -4)));
    }

    #[test]
    fn fuse_single_station_carries_distance() {
        let date = Date::from_ymd(2020, 1, 10);
        let ev = event(-33.0, 151.0, date);
        // ~2 km north of the event
        let st = station("A", -33.0 + 2.0 / 111.19492664455873, 151.0, date);
        let nd = vec![NdviSample {
            latitude: -33.0,
            longitude: 151.0,
            composite_date: date,
            ndvi: 0.5,
        }];
        let (fused, summary) = fuse(
            core::slice::from_ref(&ev),
            core::slice::from_ref(&st),
            &nd,
            &FuseConfig::default(),
        )
        .unwrap();
        assert_eq!(fused.len(), 1);
        assert_eq!(summary.total(), 0);
        assert!((fused[0].distance_m - 2000.0).abs() < 1.0, "{}", fused[0].distance_m);
        assert_eq!(fused[0].ndvi_lag_days, 0);
        assert_eq!(fused[0].tavg, 18.0);
    }

    #[test]
    fn fuse_excludes_event_without_station() {
        let date = Date::from_ymd(2020, 1, 10);
        let ev = event(-33.0, 151.0, date);
        let st = station("A", -34.0, 151.0, date); // ~111 km away
        let nd = vec![NdviSample {
            latitude: -33.0,
            longitude: 151.0,
            composite_date: date,
            ndvi: 0.5,
        }];
        let (fused, summary) =
            fuse(&[ev], &[st], &nd, &FuseConfig::default()).unwrap();
        assert!(fused.is_empty());
        assert_eq!(summary.no_station, 1);
    }

    #[test]
    fn fuse_excludes_event_with_stale_ndvi() {
        let date = Date::from_ymd(2020, 1, 10);
        let ev = event(-33.0, 151.0, date);
        let st = station("A", -33.0, 151.0, date);
        let nd = vec![NdviSample {
            latitude: -33.0,
            longitude: 151.0,
            composite_date: Date(date.0 + 12),
            ndvi: 0.5,
        }];
        let (fused, summary) =
            fuse(&[ev], &[st], &nd, &FuseConfig::default()).unwrap();
        assert!(fused.is_empty());
        assert_eq!(summary.no_ndvi, 1);
    }

    #[test]
    fn fuse_interpolates_per_variable() {
        let date = Date::from_ymd(2020, 1, 10);
        let ev = event(-33.0, 151.0, date);
        let mut near = station("A", -33.009, 151.0, date); // ~1 km
        near.prcp = None; // A is silent on prcp that day
        let far = station("B", -33.018, 151.0, date); // ~2 km
        let mut far = far;
        far.prcp = Some(4.0);
        let nd = vec![NdviSample {
            latitude: -33.0,
            longitude: 151.0,
            composite_date: date,
            ndvi: 0.5,
        }];
        let (fused, summary) =
            fuse(&[ev], &[near, far], &nd, &FuseConfig::default()).unwrap();
        assert_eq!(summary.total(), 0);
        // prcp comes from B alone; other vars blend both stations.
        assert_eq!(fused[0].prcp, 4.0);
        assert_eq!(fused[0].tavg, 18.0);
    }

    #[test]
    fn fuse_counts_missing_variable() {
        let date = Date::from_ymd(2020, 1, 10);
        let ev = event(-33.0, 151.0, date);
        let mut st = station("A", -33.0, 151.0, date);
        st.wspd = None;
        let nd = vec![NdviSample {
            latitude: -33.0,
            longitude: 151.0,
            composite_date: date,
            ndvi: 0.5,
        }];
        let (fused, summary) =
            fuse(&[ev], &[st], &nd, &FuseConfig::default()).unwrap();
        assert!(fused.is_empty());
        assert_eq!(summary.missing_weather_var, 1);
    }
}

//! Great-circle distance, a fixed-grid spatial index for radius queries, and
//! inverse-distance-weighted interpolation.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Mean Earth radius, km (IUGG).
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Kilometres per degree of latitude (and of longitude at the equator).
const KM_PER_DEG: f64 = 2.0 * core::f64::consts::PI * EARTH_RADIUS_KM / 360.0;

/// Haversine great-circle distance in km between two (lat, lon) points given
/// in degrees. Symmetric, non-negative, zero for identical points.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let lat1 = a.0.to_radians();
    let lat2 = b.0.to_radians();
    let dlat = (b.0 - a.0).to_radians();
    let dlon = (b.1 - a.1).to_radians();
    let sl = math::sin(dlat / 2.0);
    let so = math::sin(dlon / 2.0);
    let h = sl * sl + math::cos(lat1) * math::cos(lat2) * so * so;
    2.0 * EARTH_RADIUS_KM * math::asin(math::sqrt(h.min(1.0)))
}

/// A point registered in a [`GridIndex`].
#[derive(Debug, Clone)]
struct Entry {
    id: String,
    lat: f64,
    lon: f64,
}

/// Fixed geographic grid over (lat, lon) degrees supporting exact radius
/// queries: candidate cells are scanned, then every candidate is confirmed
/// with the haversine distance, so results equal a linear scan.
#[derive(Debug, Clone)]
pub struct GridIndex {
    entries: Vec<Entry>,
    /// cell edge, degrees
    cell_deg: f64,
    cells: alloc::collections::BTreeMap<(i32, i32), Vec<usize>>,
    radius_km: f64,
}

impl GridIndex {
    /// Build an index from `(id, lat, lon)` triples sized for queries of
    /// roughly `radius_km`.
    pub fn build(points: impl IntoIterator<Item = (String, f64, f64)>, radius_km: f64) -> Self {
        let entries: Vec<Entry> = points
            .into_iter()
            .map(|(id, lat, lon)| Entry { id, lat, lon })
            .collect();
        let cell_deg = (radius_km / KM_PER_DEG).max(1e-6);
        let mut cells: alloc::collections::BTreeMap<(i32, i32), Vec<usize>> =
            alloc::collections::BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            cells.entry(Self::cell_of(cell_deg, e.lat, e.lon)).or_default().push(i);
        }
        GridIndex {
            entries,
            cell_deg,
            cells,
            radius_km,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    fn cell_of(cell_deg: f64, lat: f64, lon: f64) -> (i32, i32) {
        (
            math::floor(lat / cell_deg) as i32,
            math::floor(lon / cell_deg) as i32,
        )
    }

    /// All points within `radius_km` of `(lat, lon)`, sorted ascending by
    /// distance with ties broken by id. Empty when nothing is in range.
    pub fn within(&self, lat: f64, lon: f64, radius_km: f64) -> Vec<(&str, f64)> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        // Cells to scan: latitude degrees are uniform; longitude degrees
        // shrink with cos(lat), so widen the scan accordingly.
        let dlat_cells = math::ceil(radius_km / KM_PER_DEG / self.cell_deg) as i32;
        let cos_lat = math::cos(lat.to_radians()).abs().max(1e-3);
        let dlon_cells = math::ceil(radius_km / (KM_PER_DEG * cos_lat) / self.cell_deg) as i32;

        let (ci, cj) = Self::cell_of(self.cell_deg, lat, lon);
        let mut hits: Vec<(&str, f64)> = Vec::new();
        for di in -dlat_cells..=dlat_cells {
            for dj in -dlon_cells..=dlon_cells {
                if let Some(bucket) = self.cells.get(&(ci + di, cj + dj)) {
                    for &k in bucket {
                        let e = &self.entries[k];
                        let d = haversine_km((lat, lon), (e.lat, e.lon));
                        if d <= radius_km {
                            hits.push((e.id.as_str(), d));
                        }
                    }
                }
            }
        }
        hits.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(b.0)));
        hits
    }

    /// Nearest point to `(lat, lon)` within `radius_km`, if any.
    pub fn nearest_within(&self, lat: f64, lon: f64, radius_km: f64) -> Option<(&str, f64)> {
        self.within(lat, lon, radius_km).into_iter().next()
    }
}

/// Inverse-distance-weighted interpolation over `(distance_km, value)` pairs
/// with weights `d^-power`. A zero-distance sample wins outright (first such
/// entry); the result is always within the input value range.
pub fn idw(samples: &[(f64, f64)], power: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("idw requires at least one sample"));
    }
    if samples.len() == 1 {
        return Ok(samples[0].1);
    }
    if let Some(&(_, v)) = samples.iter().find(|(d, _)| *d == 0.0) {
        return Ok(v);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(d, v) in samples {
        let w = math::powf(d, -power);
        num += w * v;
        den += w;
    }
    Ok(num / den)
}

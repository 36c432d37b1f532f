//! Brute-force reference implementations used by the verification suites
//! (feature `reference`, off by default). Each routine re-derives its result
//! from first principles with linear scans and exhaustive enumeration so the
//! production paths can be checked against an independent route. Nothing here
//! is part of the supported API.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::Matrix;
use crate::date::Date;
use crate::fuse::{ExclusionSummary, FuseConfig, FusedRecord};
use crate::geo::haversine_km;
use crate::types::{FireEvent, NdviSample, Region, WeatherDay};

/// Great-circle distance by the spherical law of cosines; an independent
/// route to the haversine value (less accurate near zero, fine at city
/// scales).
pub fn law_of_cosines_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (la, lb) = (a.0.to_radians(), b.0.to_radians());
    let dlon = (b.1 - a.1).to_radians();
    let cosc = libm::sin(la) * libm::sin(lb) + libm::cos(la) * libm::cos(lb) * libm::cos(dlon);
    crate::geo::EARTH_RADIUS_KM * libm::acos(cosc.clamp(-1.0, 1.0))
}

/// O(events x stations x ndvi) join, written straight from the matching
/// rules with no spatial index.
pub fn fuse_linear_scan(
    events: &[FireEvent],
    weather: &[WeatherDay],
    ndvi: &[NdviSample],
    config: &FuseConfig,
) -> (Vec<FusedRecord>, ExclusionSummary) {
    // station metadata: first row wins
    let mut stations: Vec<(String, f64, f64, Region)> = Vec::new();
    for w in weather {
        if !stations.iter().any(|(id, ..)| id == &w.station_id) {
            stations.push((w.station_id.clone(), w.latitude, w.longitude, w.region));
        }
    }
    // duplicate station-day rows: the last one wins
    let day_row = |id: &str, date: Date| -> Option<&WeatherDay> {
        weather
            .iter()
            .rev()
            .find(|w| w.station_id == id && w.date == date)
    };

    // NDVI locations sorted by coordinates, samples by date
    let mut locs: Vec<((f64, f64), Vec<(Date, f64)>)> = Vec::new();
    for s in ndvi {
        match locs
            .iter_mut()
            .find(|((la, lo), _)| *la == s.latitude && *lo == s.longitude)
        {
            Some((_, v)) => v.push((s.composite_date, s.ndvi)),
            None => locs.push(((s.latitude, s.longitude), alloc::vec![(s.composite_date, s.ndvi)])),
        }
    }
    locs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (_, v) in &mut locs {
        v.sort_by_key(|&(d, _)| d);
    }

    let mut fused = Vec::new();
    let mut summary = ExclusionSummary::default();
    'events: for ev in events {
        let mut matched: Vec<(&str, f64, &WeatherDay)> = Vec::new();
        for (id, lat, lon, _) in &stations {
            let d = haversine_km((ev.latitude, ev.longitude), (*lat, *lon));
            if d <= config.radius_km {
                if let Some(row) = day_row(id, ev.date) {
                    matched.push((id.as_str(), d, row));
                }
            }
        }
        if matched.is_empty() {
            summary.no_station += 1;
            continue;
        }
        matched.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(b.0)));
        let (nearest_id, nearest_km, _) = matched[0];

        let mut vars = [0.0f64; 5];
        for (k, slot) in vars.iter_mut().enumerate() {
            let samples: Vec<(f64, f64)> = matched
                .iter()
                .filter_map(|&(_, d, w)| {
                    match k {
                        0 => w.tmin,
                        1 => w.tmax,
                        2 => w.tavg,
                        3 => w.prcp,
                        _ => w.wspd,
                    }
                    .map(|v| (d, v))
                })
                .collect();
            if samples.is_empty() {
                summary.missing_weather_var += 1;
                continue 'events;
            }
            *slot = if samples.len() == 1 {
                samples[0].1
            } else if let Some(&(_, v)) = samples.iter().find(|(d, _)| *d == 0.0) {
                v
            } else {
                let mut num = 0.0;
                let mut den = 0.0;
                for &(d, v) in &samples {
                    let w = libm::pow(d, -config.idw_power);
                    num += w * v;
                    den += w;
                }
                num / den
            };
        }

        // nearest NDVI location within range, ties by coordinate order
        let mut best_loc: Option<(f64, usize)> = None;
        for (i, ((lat, lon), _)) in locs.iter().enumerate() {
            let d = haversine_km((ev.latitude, ev.longitude), (*lat, *lon));
            if d <= config.ndvi_max_km && best_loc.map_or(true, |(bd, _)| d < bd) {
                best_loc = Some((d, i));
            }
        }
        let Some((_, loc)) = best_loc else {
            summary.no_ndvi += 1;
            continue;
        };
        let mut best: Option<(i32, Date, f64)> = None;
        for &(date, value) in &locs[loc].1 {
            let lag = date.0 - ev.date.0;
            match best {
                Some((ba, bd, _)) if (ba, bd) <= (lag.abs(), date) => {}
                _ => best = Some((lag.abs(), date, value)),
            }
        }
        let (abs_lag, date, value) = best.unwrap();
        if abs_lag > config.ndvi_window_days {
            summary.no_ndvi += 1;
            continue;
        }

        let region = stations
            .iter()
            .find(|(id, ..)| id == nearest_id)
            .map(|&(_, _, _, r)| r)
            .unwrap();
        fused.push(FusedRecord {
            event: ev.clone(),
            region,
            tmin: vars[0],
            tmax: vars[1],
            tavg: vars[2],
            prcp: vars[3],
            wspd: vars[4],
            distance_m: nearest_km * 1000.0,
            ndvi: value,
            ndvi_lag_days: date.0 - ev.date.0,
        });
    }
    (fused, summary)
}

/// Exhaustive Gini split enumeration over every (feature, midpoint)
/// candidate. Mirrors the tree's tie rule: first maximum in ascending
/// (feature, threshold) order wins.
pub fn best_gini_split_enumeration(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
) -> Option<(f64, usize, f64)> {
    let n = x.n_rows();
    let gini = |counts: &[f64], total: f64| -> f64 {
        if total <= 0.0 {
            return 0.0;
        }
        1.0 - counts.iter().map(|&c| (c / total) * (c / total)).sum::<f64>()
    };
    let mut total_counts = alloc::vec![0.0; n_classes];
    for &c in y {
        total_counts[c] += 1.0;
    }
    let parent = gini(&total_counts, n as f64);

    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x.n_cols() {
        let mut vals: Vec<f64> = x.column(f);
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let threshold = w[0] + (w[1] - w[0]) / 2.0;
            let mut left = alloc::vec![0.0; n_classes];
            let mut n_left = 0usize;
            for i in 0..n {
                if x.get(i, f) <= threshold {
                    left[y[i]] += 1.0;
                    n_left += 1;
                }
            }
            let right: Vec<f64> = total_counts.iter().zip(&left).map(|(t, l)| t - l).collect();
            let (wl, wr) = (n_left as f64, (n - n_left) as f64);
            let gain =
                parent - wl / n as f64 * gini(&left, wl) - wr / n as f64 * gini(&right, wr);
            match best {
                Some((bg, _, _)) if bg >= gain => {}
                _ => best = Some((gain, f, threshold)),
            }
        }
    }
    best
}

/// Exact-split (unbinned) depth-wise logistic boosting, rederiving gradients,
/// gains, and Newton leaf values from the formulas. Returns raw train scores
/// after each round.
pub fn exact_gbdt_scores(
    x: &Matrix,
    y01: &[f64],
    rounds: usize,
    max_depth: usize,
    learning_rate: f64,
    lambda: f64,
) -> Vec<Vec<f64>> {
    let n = x.n_rows();
    let pbar = y01.iter().sum::<f64>() / n as f64;
    let base = libm::log(pbar / (1.0 - pbar));
    let mut scores = alloc::vec![base; n];
    let mut per_round = Vec::new();

    fn sigmoid(z: f64) -> f64 {
        if z >= 0.0 {
            1.0 / (1.0 + libm::exp(-z))
        } else {
            let e = libm::exp(z);
            e / (1.0 + e)
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn split_node(
        x: &Matrix,
        g: &[f64],
        h: &[f64],
        idx: &[usize],
        lambda: f64,
        depth: usize,
        max_depth: usize,
        lr: f64,
        out: &mut [f64],
    ) {
        let gs: f64 = idx.iter().map(|&i| g[i]).sum();
        let hs: f64 = idx.iter().map(|&i| h[i]).sum();
        let leaf = -gs / (hs + lambda) * lr;
        if depth >= max_depth || idx.len() < 2 {
            for &i in idx {
                out[i] = leaf;
            }
            return;
        }
        let parent = gs * gs / (hs + lambda);
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..x.n_cols() {
            let mut vals: Vec<f64> = idx.iter().map(|&i| x.get(i, f)).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            for w in vals.windows(2) {
                let t = w[0] + (w[1] - w[0]) / 2.0;
                let mut gl = 0.0;
                let mut hl = 0.0;
                for &i in idx {
                    if x.get(i, f) <= t {
                        gl += g[i];
                        hl += h[i];
                    }
                }
                let (gr, hr) = (gs - gl, hs - hl);
                let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                if gain > best.map_or(0.0, |b| b.0) {
                    best = Some((gain, f, t));
                }
            }
        }
        match best {
            None => {
                for &i in idx {
                    out[i] = leaf;
                }
            }
            Some((_, f, t)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x.get(i, f) <= t);
                split_node(x, g, h, &l, lambda, depth + 1, max_depth, lr, out);
                split_node(x, g, h, &r, lambda, depth + 1, max_depth, lr, out);
            }
        }
    }

    for _ in 0..rounds {
        let g: Vec<f64> = scores.iter().zip(y01).map(|(&s, &t)| sigmoid(s) - t).collect();
        let h: Vec<f64> = scores.iter().map(|&s| sigmoid(s) * (1.0 - sigmoid(s))).collect();
        let idx: Vec<usize> = (0..n).collect();
        let mut contrib = alloc::vec![0.0; n];
        split_node(x, &g, &h, &idx, lambda, 0, max_depth, learning_rate, &mut contrib);
        for (s, c) in scores.iter_mut().zip(&contrib) {
            *s += c;
        }
        per_round.push(scores.clone());
    }
    per_round
}

/// All-pairs Mann-Whitney concordance, ties counted one half.
pub fn auc_pairwise(scores: &[f64], labels: &[usize]) -> f64 {
    let mut concordant = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                concordant += 1.0;
            } else if si == sj {
                concordant += 0.5;
            }
        }
    }
    concordant / pairs
}

/// Plain counting implementation of the classification report.
/// Returns (per-class precision/recall/f1/support, accuracy,
/// (macro p, r, f1), (weighted p, r, f1)).
#[allow(clippy::type_complexity)]
pub fn report_counting(
    labels: &[usize],
    preds: &[usize],
    n_classes: usize,
) -> (Vec<(f64, f64, f64, usize)>, f64, (f64, f64, f64), (f64, f64, f64)) {
    let n = labels.len() as f64;
    let mut per_class = Vec::new();
    for c in 0..n_classes {
        let tp = labels
            .iter()
            .zip(preds)
            .filter(|&(&t, &p)| t == c && p == c)
            .count() as f64;
        let fp = labels
            .iter()
            .zip(preds)
            .filter(|&(&t, &p)| t != c && p == c)
            .count() as f64;
        let fn_ = labels
            .iter()
            .zip(preds)
            .filter(|&(&t, &p)| t == c && p != c)
            .count() as f64;
        let support = labels.iter().filter(|&&t| t == c).count();
        let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push((precision, recall, f1, support));
    }
    let accuracy = labels.iter().zip(preds).filter(|&(&t, &p)| t == p).count() as f64 / n;
    let k = n_classes as f64;
    let macro_avg = (
        per_class.iter().map(|m| m.0).sum::<f64>() / k,
        per_class.iter().map(|m| m.1).sum::<f64>() / k,
        per_class.iter().map(|m| m.2).sum::<f64>() / k,
    );
    let weighted = (
        per_class.iter().map(|m| m.3 as f64 * m.0).sum::<f64>() / n,
        per_class.iter().map(|m| m.3 as f64 * m.1).sum::<f64>() / n,
        per_class.iter().map(|m| m.3 as f64 * m.2).sum::<f64>() / n,
    );
    (per_class, accuracy, macro_avg, weighted)
}

/// R-squared of `y` on columns-plus-intercept via modified Gram-Schmidt
/// orthogonalization, an independent route to the normal equations.
pub fn r_squared_gram_schmidt(cols: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = y.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut candidates: Vec<Vec<f64>> = alloc::vec![alloc::vec![1.0; n]];
    candidates.extend(cols.iter().cloned());
    for mut v in candidates {
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm: f64 = libm::sqrt(v.iter().map(|a| a * a).sum());
        if norm > 1e-10 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    let mut resid: Vec<f64> = y.to_vec();
    for b in &basis {
        let dot: f64 = resid.iter().zip(b).map(|(a, c)| a * c).sum();
        for (ri, bi) in resid.iter_mut().zip(b) {
            *ri -= dot * bi;
        }
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ssr: f64 = resid.iter().map(|v| v * v).sum();
    if sst == 0.0 {
        return 1.0;
    }
    1.0 - ssr / sst
}

/// VIF via the Gram-Schmidt route, with the same infinity sentinel rule.
pub fn vif_gram_schmidt(x: &Matrix) -> Vec<f64> {
    let cols: Vec<Vec<f64>> = (0..x.n_cols()).map(|j| x.column(j)).collect();
    (0..x.n_cols())
        .map(|j| {
            let others: Vec<Vec<f64>> = (0..x.n_cols())
                .filter(|&k| k != j)
                .map(|k| cols[k].clone())
                .collect();
            let r2 = r_squared_gram_schmidt(&others, &cols[j]);
            if r2 >= 1.0 - 1e-12 {
                f64::INFINITY
            } else {
                1.0 / (1.0 - r2)
            }
        })
        .collect()
}

/// Pearson correlation via raw moments, an independent route to the
/// centered-sum implementation.
pub fn correlation_raw_moments(x: &Matrix) -> Matrix {
    let n = x.n_rows() as f64;
    let p = x.n_cols();
    let mut out = Matrix::zeros(p, p);
    for j in 0..p {
        out.set(j, j, 1.0);
        for k in j + 1..p {
            let (mut sj, mut sk, mut sjj, mut skk, mut sjk) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..x.n_rows() {
                let a = x.get(i, j);
                let b = x.get(i, k);
                sj += a;
                sk += b;
                sjj += a * a;
                skk += b * b;
                sjk += a * b;
            }
            let cov = sjk / n - (sj / n) * (sk / n);
            let vj = sjj / n - (sj / n) * (sj / n);
            let vk = skk / n - (sk / n) * (sk / n);
            let r = if vj <= 0.0 || vk <= 0.0 {
                0.0
            } else {
                cov / libm::sqrt(vj * vk)
            };
            out.set(j, k, r);
            out.set(k, j, r);
        }
    }
    out
}

/// High-class F1 at a threshold, recounted from scratch.
pub fn f1_recount(probs: &[f64], labels: &[usize], threshold: f64) -> f64 {
    let preds: Vec<usize> = probs.iter().map(|&p| usize::from(p >= threshold)).collect();
    let tp = preds
        .iter()
        .zip(labels)
        .filter(|&(&p, &y)| p == 1 && y == 1)
        .count() as f64;
    let pred_pos = preds.iter().filter(|&&p| p == 1).count() as f64;
    let actual_pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / pred_pos;
    let recall = tp / actual_pos;
    2.0 * precision * recall / (precision + recall)
}

/// Max-norm residual of the best convex reconstruction of `z` from any pair
/// of rows in `pool`, used to verify SMOTE synthetics.
pub fn convex_residual(pool: &Matrix, z: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for a_idx in 0..pool.n_rows() {
        for b_idx in 0..pool.n_rows() {
            if a_idx == b_idx {
                continue;
            }
            let a = pool.row(a_idx);
            let b = pool.row(b_idx);
            // lambda from the coordinate with the largest spread
            let mut lambda = 0.0;
            let mut spread = 0.0;
            for j in 0..z.len() {
                let d = b[j] - a[j];
                if d.abs() > spread {
                    spread = d.abs();
                    lambda = (z[j] - a[j]) / d;
                }
            }
            if !(-(1e-9)..=1.0 + 1e-9).contains(&lambda) {
                continue;
            }
            let resid = (0..z.len())
                .map(|j| (a[j] + lambda * (b[j] - a[j]) - z[j]).abs())
                .fold(0.0f64, f64::max);
            if resid < best {
                best = resid;
            }
        }
    }
    best
}

/// Seeded random fusion instance exercising zero-distance stations, missing
/// variables, out-of-radius events, and stale or absent composites.
pub fn random_fusion_instance(
    seed: u64,
    n_stations: usize,
    n_events: usize,
) -> (Vec<FireEvent>, Vec<WeatherDay>, Vec<NdviSample>) {
    use rand::Rng;
    let mut rng = crate::seeding::rng(seed);
    let base = Date::from_ymd(2019, 11, 1);
    let window = 30;

    let mut stations = Vec::new();
    for s in 0..n_stations {
        let lat = rng.gen_range(-38.0..-28.0);
        let lon = rng.gen_range(140.0..153.0);
        let region = Region::ALL[rng.gen_range(0..Region::ALL.len())];
        stations.push((alloc::format!("s{s:04}"), lat, lon, region));
    }

    let mut weather = Vec::new();
    for (id, lat, lon, region) in &stations {
        for off in 0..window {
            if rng.gen_bool(0.7) {
                let tmin = rng.gen_range(5.0..25.0);
                let var = |rng: &mut rand_chacha::ChaCha8Rng, v: f64| -> Option<f64> {
                    rng.gen_bool(0.85).then_some(v)
                };
                let dr = rng.gen_range(0.0..15.0);
                let prcp = rng.gen_range(0.0..20.0);
                let wspd = rng.gen_range(0.0..40.0);
                weather.push(WeatherDay {
                    station_id: id.clone(),
                    region: *region,
                    latitude: *lat,
                    longitude: *lon,
                    date: Date(base.0 + off),
                    tmin: var(&mut rng, tmin),
                    tmax: var(&mut rng, tmin + dr),
                    tavg: var(&mut rng, tmin + dr / 2.0),
                    prcp: var(&mut rng, prcp),
                    wspd: var(&mut rng, wspd),
                });
            }
        }
    }

    let mut events = Vec::new();
    let mut ndvi = Vec::new();
    for _ in 0..n_events {
        let (lat, lon) = if !stations.is_empty() && rng.gen_bool(0.7) {
            let (_, slat, slon, _) = &stations[rng.gen_range(0..stations.len())];
            if rng.gen_bool(0.05) {
                (*slat, *slon) // exactly on a station
            } else {
                (
                    slat + rng.gen_range(-0.06..0.06),
                    slon + rng.gen_range(-0.06..0.06),
                )
            }
        } else {
            (rng.gen_range(-38.0..-28.0), rng.gen_range(140.0..153.0))
        };
        let date = Date(base.0 + rng.gen_range(0..window));
        events.push(FireEvent {
            latitude: lat,
            longitude: lon,
            date,
            minutes: rng.gen_range(0..1440),
            frp: rng.gen_range(0.0..400.0),
            confidence: rng.gen_bool(0.8).then(|| rng.gen_range(0..=100)),
        });
        // composites at the event location (sometimes offset out of range,
        // sometimes missing, lags from well inside to outside the window)
        if rng.gen_bool(0.85) {
            let (nlat, nlon) = if rng.gen_bool(0.1) {
                (lat + 0.05, lon) // ~5.5 km away: past the 2.5 km cap
            } else {
                (lat, lon)
            };
            for _ in 0..rng.gen_range(1..=3) {
                let lag = rng.gen_range(-20..=20);
                ndvi.push(NdviSample {
                    latitude: nlat,
                    longitude: nlon,
                    composite_date: Date(date.0 + lag),
                    ndvi: rng.gen_range(-0.1..0.95),
                });
            }
        }
    }
    (events, weather, ndvi)
}

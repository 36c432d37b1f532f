//! Spatial-join verification against independent reference routes.

use pyrocast_core::fuse::{fuse, FuseConfig};
use pyrocast_core::geo::haversine_km;
use pyrocast_core::reference;

#[test]
fn haversine_agrees_with_law_of_cosines_oracle() {
    let sydney = (-33.87, 151.21);
    let melbourne = (-37.81, 144.96);
    let h = haversine_km(sydney, melbourne);
    let o = reference::law_of_cosines_km(sydney, melbourne);
    assert!((h - o).abs() / o < 1e-6, "haversine {h} vs oracle {o}");
    // sanity: the real-world distance is ~714 km
    assert!((700.0..730.0).contains(&h), "{h}");
}

#[test]
fn haversine_agrees_with_oracle_on_random_pairs() {
    use rand::Rng;
    let mut rng = pyrocast_core::seeding::rng(31);
    for _ in 0..200 {
        let a = (rng.gen_range(-44.0..-10.0), rng.gen_range(113.0..154.0));
        let b = (rng.gen_range(-44.0..-10.0), rng.gen_range(113.0..154.0));
        let h = haversine_km(a, b);
        let o = reference::law_of_cosines_km(a, b);
        if o > 1.0 {
            assert!((h - o).abs() / o < 1e-6, "{a:?} {b:?}: {h} vs {o}");
        }
    }
}

#[test]
fn fuse_matches_linear_scan_reference_join() {
    let config = FuseConfig::default();
    for seed in 0..12u64 {
        let (events, weather, ndvi) =
            reference::random_fusion_instance(seed, 40 + (seed as usize * 17) % 120, 300);
        let (got, got_summary) = fuse(&events, &weather, &ndvi, &config).unwrap();
        let (want, want_summary) = reference::fuse_linear_scan(&events, &weather, &ndvi, &config);
        assert_eq!(got_summary, want_summary, "seed {seed}");
        assert_eq!(got, want, "seed {seed}");
        assert_eq!(got.len() + got_summary.total(), events.len(), "seed {seed}");
    }
}

#[test]
fn fused_records_respect_radius_and_window() {
    let config = FuseConfig::default();
    let (events, weather, ndvi) = reference::random_fusion_instance(99, 150, 800);
    let (fused, summary) = fuse(&events, &weather, &ndvi, &config).unwrap();
    assert!(!fused.is_empty(), "instance should fuse something");
    assert!(summary.total() > 0, "instance should exclude something");
    for rec in &fused {
        assert!(rec.distance_m <= config.radius_km * 1000.0, "{}", rec.distance_m);
        assert!(rec.ndvi_lag_days.abs() <= config.ndvi_window_days);
        assert!((-1.0..=1.0).contains(&rec.ndvi));
    }
}

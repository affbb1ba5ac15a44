use proptest::prelude::*;
use rand::Rng;
use vista_core::geo::{heading_between, vcs_to_world, world_to_vcs, LocalFrame};
use vista_core::model::{GeoPosition, HeadingDeg, VcsPosition};
use vista_testkit::{rng, vincenty_inverse};

/// Point `meters` from `p` along a meridian (north positive) or a parallel
/// (east positive), found by bisection on the geodesic distance.
fn offset_along(p: GeoPosition, meters: f64, north: bool) -> GeoPosition {
    let at = |deg: f64| {
        if north {
            GeoPosition::new(p.lat + deg, p.lon)
        } else {
            GeoPosition::new(p.lat, p.lon + deg)
        }
    };
    let (mut lo, mut hi) = (0.0f64, 1e-3f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let q = at(mid * meters.signum());
        let d = vincenty_inverse(p.lat, p.lon, q.lat, q.lon).unwrap().0;
        if d < meters.abs() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi) * meters.signum())
}

#[test]
fn tsv_five_behind_four_right_of_north_facing_vut() {
    let vut = GeoPosition::new(1.354088453458461, 103.6957499292194);
    let south = offset_along(vut, -5.0, true);
    let tsv = offset_along(south, 4.0, false);
    let v = world_to_vcs(vut, HeadingDeg::new(0.0), tsv).unwrap();
    assert!((v.x + 5.0).abs() < 1e-6, "{v:?}");
    assert!((v.y - 4.0).abs() < 1e-6, "{v:?}");
    assert_eq!(format!("({:.0}, {:.0})", v.x, v.y), "(-5, 4)");

    let back = vcs_to_world(vut, HeadingDeg::new(0.0), VcsPosition::new(-5.0, 4.0)).unwrap();
    assert!((back.lat - tsv.lat).abs() < 1e-10 && (back.lon - tsv.lon).abs() < 1e-10);
    assert!(back.lat < vut.lat && back.lon > vut.lon);
}

#[test]
fn one_millidegree_north_matches_geodesic() {
    let o = GeoPosition::new(1.354, 103.695);
    let p = GeoPosition::new(o.lat + 0.001, o.lon);
    let [e, n] = LocalFrame::new(o).to_local(p).unwrap();
    let (d, _) = vincenty_inverse(o.lat, o.lon, p.lat, p.lon).unwrap();
    assert_eq!(e, 0.0);
    assert!((n - 110.57).abs() < 0.2, "{n}");
    assert!((n - d).abs() < 1e-3, "{n} vs {d}");
}

#[test]
fn worked_polygon_edges_match_geodesic() {
    // vertices of the published obstacle polygon
    let v = [
        (1.354088453458461, 103.6957499292194),
        (1.3540848, 103.6956478),
        (1.354060261353194, 103.6956508073799),
        (1.354064076671374, 103.6957503367588),
    ];
    let f = LocalFrame::new(GeoPosition::new(v[0].0, v[0].1));
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let a = f.to_local(GeoPosition::new(v[i].0, v[i].1)).unwrap();
            let b = f.to_local(GeoPosition::new(v[j].0, v[j].1)).unwrap();
            let planar = (a[0] - b[0]).hypot(a[1] - b[1]);
            let (d, _) = vincenty_inverse(v[i].0, v[i].1, v[j].0, v[j].1).unwrap();
            assert!((planar - d).abs() <= 1e-3 * d, "{i}-{j}: {planar} vs {d}");
        }
    }
}

#[test]
fn world_vcs_round_trip_within_five_km() {
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let vut = GeoPosition::new(r.random_range(-70.0..70.0), r.random_range(-180.0..180.0));
        let heading = HeadingDeg::new(r.random_range(0.0..360.0));
        let dist = r.random_range(0.0..5000.0);
        let ang: f64 = r.random_range(0.0..std::f64::consts::TAU);
        let f = LocalFrame::new(vut);
        let p = f.to_geo([dist * ang.sin(), dist * ang.cos()]).unwrap();
        let v = world_to_vcs(vut, heading, p).unwrap();
        let q = vcs_to_world(vut, heading, v).unwrap();
        let dlon = (q.lon - p.lon + 540.0).rem_euclid(360.0) - 180.0;
        worst = worst.max((q.lat - p.lat).abs()).max(dlon.abs());
        assert!((v.x.hypot(v.y) - dist).abs() < 1e-6);
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn distances_within_five_km_match_geodesic() {
    let mut r = rng(7);
    for _ in 0..2000 {
        let vut = GeoPosition::new(r.random_range(-60.0..60.0), r.random_range(-179.0..179.0));
        let f = LocalFrame::new(vut);
        let heading = HeadingDeg::new(r.random_range(0.0..360.0));
        let pts: Vec<GeoPosition> = (0..2)
            .map(|_| {
                let d = r.random_range(0.0..2500.0);
                let a: f64 = r.random_range(0.0..std::f64::consts::TAU);
                f.to_geo([d * a.sin(), d * a.cos()]).unwrap()
            })
            .collect();
        let a = world_to_vcs(vut, heading, pts[0]).unwrap();
        let b = world_to_vcs(vut, heading, pts[1]).unwrap();
        let planar = (a.x - b.x).hypot(a.y - b.y);
        let (d, _) = vincenty_inverse(pts[0].lat, pts[0].lon, pts[1].lat, pts[1].lon).unwrap();
        if d > 1.0 {
            assert!((planar - d).abs() <= 1e-3 * d, "{planar} vs {d}");
        }
    }
}

#[test]
fn bearings_match_geodesic_within_one_km() {
    let mut r = rng(99);
    for _ in 0..2000 {
        let a = GeoPosition::new(r.random_range(-60.0..60.0), r.random_range(-179.0..179.0));
        let d = r.random_range(10.0..1000.0);
        let ang: f64 = r.random_range(0.0..std::f64::consts::TAU);
        let b = LocalFrame::new(a).to_geo([d * ang.sin(), d * ang.cos()]).unwrap();
        let h = heading_between(a, b).unwrap().degrees();
        let (_, brg) = vincenty_inverse(a.lat, a.lon, b.lat, b.lon).unwrap();
        let diff = (h - brg + 540.0).rem_euclid(360.0) - 180.0;
        assert!(diff.abs() < 0.01, "{h} vs {brg}");
    }
}

proptest! {
    #[test]
    fn heading_normalization_is_idempotent(deg in -1e6f64..1e6) {
        let h = HeadingDeg::new(deg);
        prop_assert!((0.0..360.0).contains(&h.degrees()));
        prop_assert_eq!(HeadingDeg::new(h.degrees()), h);
        let turns = (deg - h.degrees()) / 360.0;
        prop_assert!((turns - turns.round()).abs() < 1e-6);
    }

    #[test]
    fn heading_zero_is_north_forward(n in 0.1f64..1000.0) {
        let vut = GeoPosition::new(1.354, 103.695);
        let p = LocalFrame::new(vut).to_geo([0.0, n]).unwrap();
        let v = world_to_vcs(vut, HeadingDeg::new(0.0), p).unwrap();
        prop_assert!((v.x - n).abs() < 1e-9);
        prop_assert!(v.y.abs() < 1e-9);
    }

    #[test]
    fn angle_to_is_symmetric_and_bounded(a in 0.0f64..360.0, b in 0.0f64..360.0) {
        let (ha, hb) = (HeadingDeg::new(a), HeadingDeg::new(b));
        let d = ha.angle_to(hb);
        prop_assert!((0.0..=180.0).contains(&d));
        prop_assert!((d - hb.angle_to(ha)).abs() < 1e-9);
        prop_assert!((ha.reversed().angle_to(ha) - 180.0).abs() < 1e-9);
    }
}

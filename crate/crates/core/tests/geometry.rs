use mmshare::geometry::{
    associate, sample_hppp, split_deployment, Area, Coalition, Deployment, NspId, Point, Site,
};
use proptest::prelude::*;

fn site(x: f64, y: f64, nsp: NspId) -> Site {
    Site {
        position: Point::new(x, y),
        nsp,
    }
}

#[test]
fn hppp_is_reproducible_and_inside_the_area() {
    let area = Area::new(500.0, 300.0).unwrap();
    let a = sample_hppp(400.0, &area, 11).unwrap();
    let b = sample_hppp(400.0, &area, 11).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|p| area.contains(*p)));
    assert_ne!(a, sample_hppp(400.0, &area, 12).unwrap());
}

#[test]
fn hppp_mean_count_matches_intensity() {
    // E[N] = 200 / km^2 * 0.25 km^2 = 50.
    let area = Area::new(500.0, 500.0).unwrap();
    let runs = 400;
    let total: usize = (0..runs).map(|s| sample_hppp(200.0, &area, s).unwrap().len()).sum();
    let mean = total as f64 / runs as f64;
    // Standard error is sqrt(50 / 400) ~ 0.35.
    assert!((mean - 50.0).abs() < 1.5, "mean count {mean}");
}

#[test]
fn bad_intensity_and_area_are_rejected() {
    let area = Area::new(100.0, 100.0).unwrap();
    assert!(sample_hppp(-1.0, &area, 0).is_err());
    assert!(sample_hppp(f64::NAN, &area, 0).is_err());
    assert!(Area::new(0.0, 10.0).is_err());
    assert!(Area::new(10.0, f64::INFINITY).is_err());
}

#[test]
fn split_deployment_tags_both_providers() {
    let area = Area::new(1000.0, 1000.0).unwrap();
    let d = split_deployment(100.0, 1000.0, 0.7, area, 5).unwrap();
    let count = |sites: &[Site], nsp| sites.iter().filter(|s| s.nsp == nsp).count() as f64;
    let bs1 = count(&d.base_stations, NspId::FIRST);
    let ue1 = count(&d.users, NspId::FIRST);
    assert!((bs1 / d.base_stations.len() as f64 - 0.7).abs() < 0.15);
    assert!((ue1 / d.users.len() as f64 - 0.7).abs() < 0.05);
    assert!(split_deployment(100.0, 1000.0, 1.5, area, 5).is_err());
}

#[test]
fn no_sharing_keeps_users_on_their_own_network() {
    let area = Area::new(100.0, 100.0).unwrap();
    let d = Deployment {
        area,
        base_stations: vec![site(0.0, 0.0, NspId::FIRST), site(50.0, 0.0, NspId::SECOND)],
        users: vec![site(45.0, 0.0, NspId::FIRST), site(5.0, 0.0, NspId::SECOND)],
    };
    let a = associate(&d, Coalition::none());
    assert_eq!(a.serving_bs, vec![Some(0), Some(1)]);
    let shared = associate(&d, Coalition::of(&[NspId::FIRST, NspId::SECOND]));
    assert_eq!(shared.serving_bs, vec![Some(1), Some(0)]);
    assert_eq!(shared.cell_members, vec![vec![1], vec![0]]);
}

#[test]
fn users_without_an_eligible_bs_stay_unassociated() {
    let area = Area::new(100.0, 100.0).unwrap();
    let d = Deployment {
        area,
        base_stations: vec![site(0.0, 0.0, NspId::FIRST)],
        users: vec![site(1.0, 1.0, NspId::SECOND), site(2.0, 2.0, NspId::FIRST)],
    };
    let a = associate(&d, Coalition::none());
    assert_eq!(a.serving_bs, vec![None, Some(0)]);
    assert_eq!(a.unassociated(), 1);
}

#[test]
fn distance_ties_go_to_the_lowest_index() {
    let area = Area::new(100.0, 100.0).unwrap();
    let d = Deployment {
        area,
        base_stations: vec![site(10.0, 0.0, NspId::FIRST), site(-10.0, 0.0, NspId::FIRST)],
        users: vec![site(0.0, 0.0, NspId::FIRST)],
    };
    assert_eq!(associate(&d, Coalition::none()).serving_bs, vec![Some(0)]);
}

#[test]
fn bearing_convention() {
    let o = Point::new(0.0, 0.0);
    assert_eq!(o.bearing_deg(Point::new(1.0, 0.0)), 0.0);
    assert!((o.bearing_deg(Point::new(0.0, 1.0)) - 90.0).abs() < 1e-12);
    assert!((o.distance(Point::new(3.0, 4.0)) - 5.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn association_picks_the_nearest_eligible_bs(seed in 0u64..500, n1 in 0.1f64..0.9) {
        let area = Area::new(300.0, 300.0).unwrap();
        let d = split_deployment(150.0, 600.0, n1, area, seed).unwrap();
        for coalition in [Coalition::none(), Coalition::of(&[NspId::FIRST, NspId::SECOND])] {
            let a = associate(&d, coalition);
            let mut members = 0;
            for (u, user) in d.users.iter().enumerate() {
                let eligible: Vec<usize> = (0..d.base_stations.len())
                    .filter(|&b| coalition.permits(user.nsp, d.base_stations[b].nsp))
                    .collect();
                match a.serving_bs[u] {
                    None => prop_assert!(eligible.is_empty()),
                    Some(b) => {
                        prop_assert!(eligible.contains(&b));
                        let best = user.position.distance(d.base_stations[b].position);
                        for &o in &eligible {
                            prop_assert!(best <= user.position.distance(d.base_stations[o].position));
                        }
                        prop_assert!(a.cell_members[b].contains(&u));
                        members += 1;
                    }
                }
            }
            let listed: usize = a.cell_members.iter().map(Vec::len).sum();
            prop_assert_eq!(listed, members);
        }
    }
}

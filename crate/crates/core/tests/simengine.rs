use mmshare::channel::{InterferenceMode, LinkClass};
use mmshare::geometry::{Area, NspId};
use mmshare::scheduler::WeightRegime;
use mmshare::simengine::{run_campaign, run_drop, run_drop_regimes, sweep_psi, SimConfig, World};
use mmshare::{Error, SharingRegime};

fn small() -> SimConfig {
    SimConfig {
        area: Area::new(400.0, 400.0).unwrap(),
        slots_per_drop: 400,
        num_drops: 4,
        base_seed: 21,
        psi_grid: vec![0.55, 0.9],
        ..SimConfig::default()
    }
}

fn regimes() -> Vec<WeightRegime<f64>> {
    vec![
        WeightRegime::NoSharing,
        WeightRegime::EqualSharing,
        WeightRegime::weighted_duopoly(0.7).unwrap(),
    ]
}

#[test]
fn campaigns_are_reproducible() {
    let c = small();
    let a = run_campaign(&c, &WeightRegime::EqualSharing).unwrap();
    let b = run_campaign(&c, &WeightRegime::EqualSharing).unwrap();
    assert_eq!(a, b);
    let other = run_campaign(&SimConfig { base_seed: 22, ..c }, &WeightRegime::EqualSharing).unwrap();
    assert_ne!(a.per_drop, other.per_drop);
}

#[test]
fn a_regime_run_alone_matches_the_lockstep_run() {
    let c = small();
    let together = run_drop_regimes(&c, &regimes(), 5).unwrap();
    for (regime, joint) in regimes().iter().zip(&together) {
        assert_eq!(&run_drop(&c, regime, 5).unwrap(), joint);
    }
}

#[test]
fn drop_metrics_are_consistent() {
    let c = small();
    let world = World::sample(&c, 9).unwrap();
    let users = world.deployment.users.len();
    let metrics = mmshare::simengine::run_world(&c, &world, &regimes()).unwrap();
    for m in &metrics {
        assert_eq!(m.associated_users[0] + m.associated_users[1] + m.unassociated_users, users);
        assert!(m.user_tput.iter().chain(&m.cell_tput).all(|&v| v >= 0.0 && v.is_finite()));
        assert!(m.active_cells <= world.deployment.base_stations.len());
    }
    // Pooling base stations can only widen the eligible set.
    assert!(metrics[1].unassociated_users <= metrics[0].unassociated_users);
    assert_eq!(metrics[1].unassociated_users, metrics[2].unassociated_users);
}

#[test]
fn world_links_skip_outage() {
    let c = small();
    let world = World::sample(&c, 3).unwrap();
    let d = &world.deployment;
    let mut counted = 0;
    for u in 0..d.users.len() {
        for b in 0..d.base_stations.len() {
            let link = world.link_state(u, b);
            if link.class != LinkClass::Outage {
                counted += 1;
                assert!(link.path_loss_db.is_finite());
            }
        }
    }
    assert_eq!(counted, world.non_outage_links());
}

#[test]
fn interference_costs_throughput() {
    let c = SimConfig {
        num_drops: 3,
        ..small()
    };
    let full = run_campaign(&c, &WeightRegime::EqualSharing).unwrap();
    let quiet = run_campaign(
        &SimConfig {
            interference: InterferenceMode::NoiseLimited,
            ..c
        },
        &WeightRegime::EqualSharing,
    )
    .unwrap();
    assert!(quiet.total_cell_tput.mean > full.total_cell_tput.mean);
}

#[test]
fn larger_weight_raises_the_first_provider_throughput() {
    let sweep = sweep_psi(&small()).unwrap();
    assert_eq!(sweep.weighted.len(), 2);
    assert_eq!(sweep.all().count(), 4);
    let low = &sweep.weighted[0];
    let high = &sweep.weighted[1];
    assert_eq!(low.psi1, Some(0.55));
    assert!(high.user_tput[NspId::FIRST.index()].mean > low.user_tput[NspId::FIRST.index()].mean);
    assert!(high.user_tput[NspId::SECOND.index()].mean < low.user_tput[NspId::SECOND.index()].mean);
    assert_eq!(sweep.no_sharing.regime, SharingRegime::NoSharing);
    assert_eq!(low.drops, 4);
    assert!(low.total_cell_tput.half_width.is_some());
}

#[test]
fn single_drop_has_no_interval() {
    let m = run_campaign(
        &SimConfig {
            num_drops: 1,
            ..small()
        },
        &WeightRegime::NoSharing,
    )
    .unwrap();
    assert_eq!(m.user_tput_all.half_width, None);
    assert_eq!(m.user_tput_all.samples, 1);
}

#[test]
fn invalid_configs_are_rejected() {
    let cases = [
        SimConfig { slots_per_drop: 0, ..small() },
        SimConfig { num_drops: 0, ..small() },
        SimConfig { n1: 1.2, ..small() },
        SimConfig { gamma: -1.0, ..small() },
        SimConfig { psi_grid: vec![0.5, 1.5], ..small() },
        SimConfig { bs_density_per_km2: f64::NAN, ..small() },
    ];
    for c in cases {
        assert!(matches!(run_campaign(&c, &WeightRegime::NoSharing), Err(Error::InvalidParameter { .. })));
    }
}

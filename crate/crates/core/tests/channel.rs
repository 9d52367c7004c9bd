use approx::assert_relative_eq;
use mmshare::channel::{
    data_rate, draw_link, interference_power, link_power_gain, normalize_angle_deg, AntennaPattern,
    ChannelParams, InterferenceMode, InterferencePath, LinkClass, RateConfig,
};
use mmshare::seeds;
use proptest::prelude::*;

#[test]
fn class_probabilities_match_reference_values() {
    let ch = ChannelParams::<f64>::mmwave_73ghz();
    // (distance, p_out, p_los, p_nlos), computed independently.
    let table = [
        (10.0, 0.0, 0.8615421511608179, 0.1384578488391821),
        (50.0, 0.0, 0.4746600179703318, 0.5253399820296683),
        (100.0, 0.0, 0.22530213265959573, 0.7746978673404042),
        (200.0, 0.7693068177450372, 0.011710228385404543, 0.2189829538695583),
    ];
    for (d, out, los, nlos) in table {
        let p = ch.probabilities(d);
        assert_relative_eq!(p.outage, out, epsilon = 1e-12);
        assert_relative_eq!(p.los, los, max_relative = 1e-12);
        assert_relative_eq!(p.nlos, nlos, max_relative = 1e-12);
    }
}

#[test]
fn median_path_loss_reference() {
    let ch = ChannelParams::<f64>::mmwave_73ghz();
    assert_relative_eq!(ch.los.median_db(100.0), 109.8, max_relative = 1e-12);
    assert_relative_eq!(ch.nlos.median_db(100.0), 135.6, max_relative = 1e-12);
}

#[test]
fn noise_and_rate_reference() {
    let cfg = RateConfig::<f64>::default();
    assert_relative_eq!(cfg.noise_power_mw(), 1.9952623149688826e-08, max_relative = 1e-12);
    assert_relative_eq!(data_rate(1e-10, 0.0, &cfg, 1000.0), 9033367637.803005, max_relative = 1e-12);
    assert_relative_eq!(data_rate(1e-10, 1e-7, &cfg, 1000.0), 6965421226.847198, max_relative = 1e-12);
    assert_eq!(data_rate(0.0, 0.0, &cfg, 1000.0), 0.0);
}

#[test]
fn rate_config_bounds() {
    let bad_overhead = RateConfig::<f64> {
        overhead: 1.0,
        ..RateConfig::default()
    };
    assert!(bad_overhead.validate().unwrap_err().to_string().contains("overhead"));
    let bad_loss = RateConfig::<f64> {
        loss_factor: 0.0,
        ..RateConfig::default()
    };
    assert!(bad_loss.validate().is_err());
    assert!(RateConfig::<f64>::default().validate().is_ok());
}

#[test]
fn antenna_pattern_lobes() {
    let bs = AntennaPattern::<f64>::base_station_8x8();
    assert_relative_eq!(bs.gain(0.0), 100.0, max_relative = 1e-12);
    assert_relative_eq!(bs.gain(2.5), 100.0, max_relative = 1e-12);
    assert_relative_eq!(bs.gain(2.6), 0.1, max_relative = 1e-12);
    assert_relative_eq!(bs.gain(357.5), 100.0, max_relative = 1e-12);
    let ue = AntennaPattern::<f64>::user_4x4();
    assert_relative_eq!(ue.gain(-15.0), 10.0, max_relative = 1e-12);
    assert_relative_eq!(ue.gain(180.0), 0.1, max_relative = 1e-12);
    assert!(AntennaPattern::new(10.0, -10.0, 0.0).is_err());
}

#[test]
fn outage_links_carry_no_power() {
    let ch = ChannelParams::<f64>::mmwave_73ghz();
    let mut rng = seeds::stream(1);
    let mut seen_outage = false;
    for _ in 0..200 {
        let link = draw_link(300.0, &ch, &mut rng);
        if link.class == LinkClass::Outage {
            seen_outage = true;
            assert_eq!(link_power_gain(&link), 0.0);
        } else {
            assert!(link_power_gain(&link) > 0.0);
        }
    }
    assert!(seen_outage);
}

#[test]
fn class_frequencies_follow_the_probabilities() {
    let ch = ChannelParams::<f64>::mmwave_73ghz();
    let mut rng = seeds::stream(2);
    let n = 40_000;
    let los = (0..n)
        .filter(|_| draw_link(50.0, &ch, &mut rng).class == LinkClass::Los)
        .count() as f64
        / n as f64;
    // p_los(50) = 0.4747, standard error ~ 0.0025.
    assert!((los - 0.4746600179703318).abs() < 0.01, "{los}");
}

#[test]
fn noise_limited_mode_drops_interference() {
    let bs = AntennaPattern::<f64>::base_station_8x8();
    let ue = AntennaPattern::<f64>::user_4x4();
    let paths = [InterferencePath {
        bs_offset_deg: 0.0,
        user_offset_deg: 0.0,
        channel_gain: 1e-9,
    }];
    assert_eq!(interference_power(1000.0, &bs, &ue, paths, InterferenceMode::NoiseLimited), 0.0);
    assert_relative_eq!(
        interference_power(1000.0, &bs, &ue, paths, InterferenceMode::Full),
        1000.0 * 100.0 * 10.0 * 1e-9,
        max_relative = 1e-12
    );
}

proptest! {
    #[test]
    fn probabilities_form_a_distribution(d in 1.0f64..2000.0) {
        let p = ChannelParams::<f64>::mmwave_73ghz().probabilities(d);
        for v in [p.outage, p.los, p.nlos] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!((p.outage + p.los + p.nlos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outage_grows_with_distance(d in 1.0f64..1000.0, step in 0.1f64..100.0) {
        let ch = ChannelParams::<f64>::mmwave_73ghz();
        prop_assert!(ch.probabilities(d + step).outage >= ch.probabilities(d).outage);
    }

    #[test]
    fn rate_is_monotone(h in 1e-14f64..1e-6, y in 0.0f64..1e-6, k in 1.01f64..10.0) {
        let cfg = RateConfig::<f64>::default();
        prop_assert!(data_rate(h * k, y, &cfg, 1000.0) > data_rate(h, y, &cfg, 1000.0));
        prop_assert!(data_rate(h, y * k + 1e-12, &cfg, 1000.0) < data_rate(h, y, &cfg, 1000.0));
    }

    #[test]
    fn angles_wrap_into_half_open_range(a in -5000.0f64..5000.0) {
        let w = normalize_angle_deg(a);
        prop_assert!(w > -180.0 && w <= 180.0);
        let turns = (a - w) / 360.0;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }
}

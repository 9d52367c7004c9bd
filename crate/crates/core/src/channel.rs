//! Link-level model: sectored antenna patterns, LOS/NLOS/outage link
//! classes, log-distance path loss with lognormal shadowing, Rayleigh block
//! fading, interference and the downlink rate.
//!
//! Powers are carried in mW; every dB quantity goes through [`crate::units`].

use rand::Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;
use crate::units::{db_to_linear, dbm_to_mw};

fn c<T: Real>(v: f64) -> T {
    T::lit(v)
}

/// Wraps an angle into (-180, 180].
pub fn normalize_angle_deg<T: Real>(angle: T) -> T {
    let full = c::<T>(360.0);
    let half = c::<T>(180.0);
    let mut a = angle % full;
    if a <= -half {
        a = a + full;
    } else if a > half {
        a = a - full;
    }
    a
}

/// Flat-top sectored pattern: main-lobe gain inside the beamwidth, back-lobe
/// gain everywhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern<T> {
    pub main_lobe_gain_db: T,
    pub back_lobe_gain_db: T,
    pub beamwidth_deg: T,
}

impl<T: Real> AntennaPattern<T> {
    pub fn new(main_lobe_gain_db: T, back_lobe_gain_db: T, beamwidth_deg: T) -> Result<Self> {
        let p = AntennaPattern {
            main_lobe_gain_db,
            back_lobe_gain_db,
            beamwidth_deg,
        };
        p.validate()?;
        Ok(p)
    }

    /// 8x8 base-station array: (20 dB, -10 dB, 5 deg).
    pub fn base_station_8x8() -> Self {
        AntennaPattern {
            main_lobe_gain_db: c(20.0),
            back_lobe_gain_db: c(-10.0),
            beamwidth_deg: c(5.0),
        }
    }

    /// 4x4 user-device array: (10 dB, -10 dB, 30 deg).
    pub fn user_4x4() -> Self {
        AntennaPattern {
            main_lobe_gain_db: c(10.0),
            back_lobe_gain_db: c(-10.0),
            beamwidth_deg: c(30.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.main_lobe_gain_db >= self.back_lobe_gain_db) {
            return Err(Error::invalid(
                "main_lobe_gain_db",
                "main-lobe gain must not be below back-lobe gain",
            ));
        }
        if !(self.beamwidth_deg > T::zero() && self.beamwidth_deg < c(360.0)) {
            return Err(Error::invalid("beamwidth_deg", "must lie in (0, 360)"));
        }
        Ok(())
    }

    pub fn main_lobe(&self) -> T {
        db_to_linear(self.main_lobe_gain_db)
    }

    pub fn back_lobe(&self) -> T {
        db_to_linear(self.back_lobe_gain_db)
    }

    /// Linear power gain at `angle_deg` off boresight. The lobe edge
    /// `|angle| = beamwidth / 2` counts as main lobe.
    pub fn gain(&self, angle_deg: T) -> T {
        if self.in_main_lobe(angle_deg) {
            self.main_lobe()
        } else {
            self.back_lobe()
        }
    }

    pub fn in_main_lobe(&self, angle_deg: T) -> bool {
        let a = <T as num_traits::Float>::abs(normalize_angle_deg(angle_deg));
        a <= self.beamwidth_deg / c(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkClass {
    Los,
    Nlos,
    Outage,
}

/// `PL(d) = intercept + 10 * slope * log10(d)` dB plus N(0, sigma^2) shadowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel<T> {
    pub intercept_db: T,
    pub slope: T,
    pub shadowing_sigma_db: T,
}

impl<T: Real> PathLossModel<T> {
    pub fn median_db(&self, distance_m: T) -> T {
        self.intercept_db + c::<T>(10.0) * self.slope * distance_m.log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProbabilities<T> {
    pub outage: T,
    pub los: T,
    pub nlos: T,
}

/// Three-state distance-dependent link model:
///
/// ```text
/// p_out(d) = max(0, 1 - exp(-a_out d + b_out))
/// p_los(d) = (1 - p_out(d)) exp(-a_los d)
/// p_nlos   = 1 - p_out - p_los
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    pub outage_decay_per_m: T,
    pub outage_offset: T,
    pub los_decay_per_m: T,
    pub los: PathLossModel<T>,
    pub nlos: PathLossModel<T>,
}

impl<T: Real> ChannelParams<T> {
    /// Empirical 73 GHz dense-urban fit: 1/a_out = 30 m, b_out = 5.2,
    /// 1/a_los = 67.1 m; LOS (69.8 dB, 2.0, 5.8 dB); NLOS (86.6 dB, 2.45, 8.0 dB).
    pub fn mmwave_73ghz() -> Self {
        ChannelParams {
            outage_decay_per_m: c::<T>(1.0) / c(30.0),
            outage_offset: c(5.2),
            los_decay_per_m: c::<T>(1.0) / c(67.1),
            los: PathLossModel {
                intercept_db: c(69.8),
                slope: c(2.0),
                shadowing_sigma_db: c(5.8),
            },
            nlos: PathLossModel {
                intercept_db: c(86.6),
                slope: c(2.45),
                shadowing_sigma_db: c(8.0),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: T, name: &str| {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be non-negative and finite"))
            }
        };
        nonneg(self.outage_decay_per_m, "outage_decay_per_m")?;
        nonneg(self.los_decay_per_m, "los_decay_per_m")?;
        nonneg(self.los.shadowing_sigma_db, "los.shadowing_sigma_db")?;
        nonneg(self.nlos.shadowing_sigma_db, "nlos.shadowing_sigma_db")?;
        if !self.outage_offset.is_finite() {
            return Err(Error::invalid("outage_offset", "must be finite"));
        }
        Ok(())
    }

    pub fn probabilities(&self, distance_m: T) -> ClassProbabilities<T> {
        let one = T::one();
        let outage = (one - (-self.outage_decay_per_m * distance_m + self.outage_offset).exp())
            .max_of(T::zero())
            .min_of(one);
        let los = (one - outage) * (-self.los_decay_per_m * distance_m).exp();
        let nlos = (one - outage - los).max_of(T::zero());
        ClassProbabilities { outage, los, nlos }
    }

    /// Maps a uniform draw `u` in [0, 1) to a link class at `distance_m`.
    pub fn classify(&self, distance_m: T, u: T) -> LinkClass {
        let p = self.probabilities(distance_m);
        if u < p.outage {
            LinkClass::Outage
        } else if u < p.outage + p.los {
            LinkClass::Los
        } else {
            LinkClass::Nlos
        }
    }

    pub fn path_loss(&self, class: LinkClass) -> Option<&PathLossModel<T>> {
        match class {
            LinkClass::Los => Some(&self.los),
            LinkClass::Nlos => Some(&self.nlos),
            LinkClass::Outage => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState<T> {
    pub class: LinkClass,
    pub path_loss_db: T,
    pub shadowing_db: T,
    pub fading_power_gain: T,
    pub distance_m: T,
}

/// Channel power gain H: path loss, shadowing and fading combined; zero in outage.
pub fn link_power_gain<T: Real>(link: &LinkState<T>) -> T {
    match link.class {
        LinkClass::Outage => T::zero(),
        _ => db_to_linear(-(link.path_loss_db + link.shadowing_db)) * link.fading_power_gain,
    }
}

pub fn classify_link<R: Rng + ?Sized>(
    distance_m: f64,
    params: &ChannelParams<f64>,
    rng: &mut R,
) -> LinkClass {
    params.classify(distance_m, rng.random::<f64>())
}

/// Draws the per-drop part of a link (class, path loss, shadowing). Fading is
/// left at unit gain; it is redrawn every slot by the caller.
///
/// Always consumes exactly one uniform and one normal variate so that stream
/// positions do not depend on the outcome.
pub fn draw_link<R: Rng + ?Sized>(
    distance_m: f64,
    params: &ChannelParams<f64>,
    rng: &mut R,
) -> LinkState<f64> {
    let class = classify_link(distance_m, params, rng);
    let z: f64 = rand_distr::StandardNormal.sample(rng);
    let (path_loss_db, shadowing_db) = match params.path_loss(class) {
        Some(m) => (m.median_db(distance_m), z * m.shadowing_sigma_db),
        None => (f64::INFINITY, 0.0),
    };
    LinkState {
        class,
        path_loss_db,
        shadowing_db,
        fading_power_gain: 1.0,
        distance_m,
    }
}

/// Unit-mean exponential power gain (Rayleigh amplitude).
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rand_distr::Exp1.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceMode {
    #[default]
    Full,
    NoiseLimited,
}

/// One interfering transmission, already reduced to angles and gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferencePath<T> {
    /// Offset of the victim from the interfering BS's boresight.
    pub bs_offset_deg: T,
    /// Offset of the interfering BS from the victim's boresight.
    pub user_offset_deg: T,
    pub channel_gain: T,
}

/// Y = sum of P * G_bs(phi_b) * G_ue(phi_u) * H over the interfering paths.
pub fn interference_power<T: Real, I>(
    tx_power_mw: T,
    bs_pattern: &AntennaPattern<T>,
    user_pattern: &AntennaPattern<T>,
    paths: I,
    mode: InterferenceMode,
) -> T
where
    I: IntoIterator<Item = InterferencePath<T>>,
{
    if mode == InterferenceMode::NoiseLimited {
        return T::zero();
    }
    paths.into_iter().fold(T::zero(), |acc, p| {
        acc + tx_power_mw
            * bs_pattern.gain(p.bs_offset_deg)
            * user_pattern.gain(p.user_offset_deg)
            * p.channel_gain
    })
}

/// An active BS other than the victim's server, beamed at its own scheduled user.
#[derive(Debug, Clone, Copy)]
pub struct Interferer<'a> {
    pub position: Point,
    pub scheduled_user: Point,
    pub link_to_victim: &'a LinkState<f64>,
}

/// Interference at `victim`, whose beam points at `serving_bs`.
pub fn interference_at(
    victim: Point,
    serving_bs: Point,
    interferers: &[Interferer<'_>],
    tx_power_mw: f64,
    bs_pattern: &AntennaPattern<f64>,
    user_pattern: &AntennaPattern<f64>,
    mode: InterferenceMode,
) -> f64 {
    let victim_boresight = victim.bearing_deg(serving_bs);
    let paths = interferers.iter().map(|i| InterferencePath {
        bs_offset_deg: i.position.bearing_deg(victim) - i.position.bearing_deg(i.scheduled_user),
        user_offset_deg: victim.bearing_deg(i.position) - victim_boresight,
        channel_gain: link_power_gain(i.link_to_victim),
    });
    interference_power(tx_power_mw, bs_pattern, user_pattern, paths, mode)
}

/// Downlink PHY abstraction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig<T> {
    pub bandwidth_hz: T,
    pub overhead: T,
    pub loss_factor: T,
    pub tx_power_dbm: T,
    pub noise_figure_db: T,
    pub noise_psd_dbm_hz: T,
}

impl<T: Real> Default for RateConfig<T> {
    fn default() -> Self {
        RateConfig {
            bandwidth_hz: c(1e9),
            overhead: c(0.2),
            loss_factor: c(0.5),
            tx_power_dbm: c(30.0),
            noise_figure_db: c(7.0),
            noise_psd_dbm_hz: c(-174.0),
        }
    }
}

impl<T: Real> RateConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > T::zero() && self.bandwidth_hz.is_finite()) {
            return Err(Error::invalid("bandwidth_hz", "must be positive"));
        }
        if !(self.overhead >= T::zero() && self.overhead < T::one()) {
            return Err(Error::invalid("overhead", "overhead factor must satisfy 0 <= overhead < 1"));
        }
        if !(self.loss_factor > T::zero() && self.loss_factor <= T::one()) {
            return Err(Error::invalid("loss_factor", "loss factor must satisfy 0 < loss_factor <= 1"));
        }
        for (v, name) in [
            (self.tx_power_dbm, "tx_power_dbm"),
            (self.noise_figure_db, "noise_figure_db"),
            (self.noise_psd_dbm_hz, "noise_psd_dbm_hz"),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn tx_power_mw(&self) -> T {
        dbm_to_mw(self.tx_power_dbm)
    }

    /// Receiver noise N_f * N_0 * W in mW.
    pub fn noise_power_mw(&self) -> T {
        dbm_to_mw(self.noise_psd_dbm_hz + self.noise_figure_db) * self.bandwidth_hz
    }

    /// Pre-log factor (1 - alpha) W.
    pub fn rate_scale(&self) -> T {
        (T::one() - self.overhead) * self.bandwidth_hz
    }
}

/// `R = (1 - a) W log2(1 + b P G H / (N_f N_0 W + Y))` in bit/s, where `G` is
/// the aligned-beam directivity `M_ue * M_bs` (linear).
pub fn data_rate<T: Real>(h: T, interference_mw: T, cfg: &RateConfig<T>, directivity: T) -> T {
    if h <= T::zero() {
        return T::zero();
    }
    let sinr = cfg.loss_factor * cfg.tx_power_mw() * directivity * h
        / (cfg.noise_power_mw() + interference_mw);
    cfg.rate_scale() * sinr.ln_1p() / c::<T>(2.0).ln()
}

//! Time-slotted Monte Carlo drops and campaign aggregation.
//!
//! A drop samples one deployment and one set of per-link channel draws (the
//! [`World`]); every regime evaluated in that drop sees the same world and the
//! same per-slot fading, so regime comparisons are paired. Regimes are
//! advanced in lockstep, one slot at a time.
//!
//! With interference enabled a slot runs in two phases. Selection uses the
//! interference produced by the beams of the previous slot (at slot 0 every
//! active BS points at its lowest-index member); once every cell has picked a
//! user the beams are steered and the served rates are evaluated with the
//! interference of the current slot. Fading is drawn once per slot and reused
//! by both phases.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    draw_fading, draw_link, link_power_gain, AntennaPattern, ChannelParams, InterferenceMode, LinkClass,
    LinkState, RateConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{associate, split_deployment, Area, Association, Coalition, Deployment, NspId, Point};
use crate::scheduler::{compute_weights, SchedulerState, WeightRegime};
use crate::seeds;
use crate::stats::{confidence_interval, Estimate};
use crate::SharingRegime;

pub const CONFIDENCE_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub area: Area,
    pub bs_density_per_km2: f64,
    pub user_density_per_km2: f64,
    /// Fraction of BSs and users belonging to NSP 1.
    pub n1: f64,
    pub rate: RateConfig<f64>,
    pub channel: ChannelParams<f64>,
    pub bs_antenna: AntennaPattern<f64>,
    pub user_antenna: AntennaPattern<f64>,
    pub gamma: f64,
    /// Rates are divided by this before entering `R_j + gamma * b_j`.
    pub rate_unit_bps: f64,
    pub psi_grid: Vec<f64>,
    pub slots_per_drop: usize,
    pub num_drops: usize,
    pub base_seed: u64,
    pub interference: InterferenceMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area: Area {
                width_m: 1000.0,
                height_m: 1000.0,
            },
            bs_density_per_km2: 100.0,
            user_density_per_km2: 500.0,
            n1: 0.5,
            rate: RateConfig::default(),
            channel: ChannelParams::mmwave_73ghz(),
            bs_antenna: AntennaPattern::base_station_8x8(),
            user_antenna: AntennaPattern::user_4x4(),
            gamma: 0.01,
            rate_unit_bps: 1e9,
            psi_grid: default_psi_grid(),
            slots_per_drop: 10_000,
            num_drops: 50,
            base_seed: 1,
            interference: InterferenceMode::Full,
        }
    }
}

/// 0.50, 0.55, ..., 0.95.
pub fn default_psi_grid() -> Vec<f64> {
    (0..10).map(|k| f64::from(50 + 5 * k) / 100.0).collect()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.area.validate()?;
        for (v, name) in [
            (self.bs_density_per_km2, "bs_density_per_km2"),
            (self.user_density_per_km2, "user_density_per_km2"),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be non-negative and finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.n1) {
            return Err(Error::invalid("n1", "must lie in [0, 1]"));
        }
        self.rate.validate()?;
        self.channel.validate()?;
        self.bs_antenna.validate()?;
        self.user_antenna.validate()?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be non-negative and finite"));
        }
        if !(self.rate_unit_bps > 0.0 && self.rate_unit_bps.is_finite()) {
            return Err(Error::invalid("rate_unit_bps", "must be positive"));
        }
        if self.psi_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("psi_grid", "values must lie in [0, 1]"));
        }
        if self.slots_per_drop == 0 {
            return Err(Error::invalid("slots_per_drop", "must be at least 1"));
        }
        if self.num_drops == 0 {
            return Err(Error::invalid("num_drops", "must be at least 1"));
        }
        Ok(())
    }
}

/// A non-outage BS-to-user link with its per-drop draws resolved.
#[derive(Debug, Clone, Copy)]
struct Link {
    bs: usize,
    state: LinkState<f64>,
    /// `10^(-(PL + shadowing)/10)`.
    static_gain: f64,
    /// Unit vector from the BS towards the user.
    ux: f64,
    uy: f64,
}

/// Everything about a drop that does not depend on the sharing regime.
#[derive(Debug, Clone)]
pub struct World {
    pub deployment: Deployment,
    /// Non-outage links, grouped by user in increasing BS index.
    links: Vec<Link>,
    link_offsets: Vec<usize>,
    seed: u64,
}

impl World {
    /// Samples the deployment and the per-drop part of every user-BS link.
    pub fn sample(config: &SimConfig, seed: u64) -> Result<World> {
        let deployment = split_deployment(
            config.bs_density_per_km2,
            config.user_density_per_km2,
            config.n1,
            config.area,
            seeds::derive(seed, "deploy", 0),
        )?;
        let mut rng = seeds::stream(seeds::derive(seed, "links", 0));
        let mut links = Vec::new();
        let mut link_offsets = Vec::with_capacity(deployment.users.len() + 1);
        link_offsets.push(0);
        for user in &deployment.users {
            for (b, bs) in deployment.base_stations.iter().enumerate() {
                let d = user.position.distance(bs.position).max(1e-3);
                let state = draw_link(d, &config.channel, &mut rng);
                if state.class == LinkClass::Outage {
                    continue;
                }
                let (dx, dy) = (user.position.x - bs.position.x, user.position.y - bs.position.y);
                let norm = dx.hypot(dy).max(f64::MIN_POSITIVE);
                links.push(Link {
                    bs: b,
                    static_gain: link_power_gain(&state),
                    state,
                    ux: dx / norm,
                    uy: dy / norm,
                });
            }
            link_offsets.push(links.len());
        }
        Ok(World {
            deployment,
            links,
            link_offsets,
            seed,
        })
    }

    fn user_links(&self, u: usize) -> std::ops::Range<usize> {
        self.link_offsets[u]..self.link_offsets[u + 1]
    }

    /// Index of the non-outage link between `u` and `bs`, if any.
    fn link_index(&self, u: usize, bs: usize) -> Option<usize> {
        let range = self.user_links(u);
        let start = range.start;
        self.links[range].binary_search_by_key(&bs, |l| l.bs).ok().map(|k| start + k)
    }

    /// Channel state of the `u`-`bs` link (outage links are rebuilt on demand).
    pub fn link_state(&self, u: usize, bs: usize) -> LinkState<f64> {
        match self.link_index(u, bs) {
            Some(k) => self.links[k].state,
            None => LinkState {
                class: LinkClass::Outage,
                path_loss_db: f64::INFINITY,
                shadowing_db: 0.0,
                fading_power_gain: 0.0,
                distance_m: self.deployment.users[u]
                    .position
                    .distance(self.deployment.base_stations[bs].position),
            },
        }
    }

    pub fn non_outage_links(&self) -> usize {
        self.links.len()
    }
}

/// Per-slot fading for every non-outage link (full mode) or every user
/// (noise-limited mode), drawn in a fixed order.
struct Fading {
    rng: seeds::StreamRng,
    values: Vec<f64>,
    per_user: bool,
}

impl Fading {
    fn new(world: &World, mode: InterferenceMode) -> Self {
        let per_user = mode == InterferenceMode::NoiseLimited;
        let n = if per_user {
            world.deployment.users.len()
        } else {
            world.links.len()
        };
        Fading {
            rng: seeds::stream(seeds::derive(world.seed, "fading", 0)),
            values: vec![1.0; n],
            per_user,
        }
    }

    fn redraw(&mut self) {
        for v in &mut self.values {
            *v = draw_fading(&mut self.rng);
        }
    }

    fn serving(&self, u: usize, link: usize) -> f64 {
        if self.per_user {
            self.values[u]
        } else {
            self.values[link]
        }
    }
}

/// `R = scale * log2(1 + signal * h / (noise + y))` with constants hoisted.
#[derive(Debug, Clone, Copy)]
struct RateKernel {
    signal: f64,
    noise_mw: f64,
    scale: f64,
}

impl RateKernel {
    fn new(config: &SimConfig) -> Self {
        let directivity = config.bs_antenna.main_lobe() * config.user_antenna.main_lobe();
        RateKernel {
            signal: config.rate.loss_factor * config.rate.tx_power_mw() * directivity,
            noise_mw: config.rate.noise_power_mw(),
            scale: config.rate.rate_scale() / std::f64::consts::LN_2,
        }
    }

    fn rate(&self, h: f64, y: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        // ln rather than ln_1p: measurably faster, and the SINRs met here are
        // far above the range where the two differ.
        self.scale * (1.0 + self.signal * h / (self.noise_mw + y)).ln()
    }
}

#[derive(Debug, Clone, Copy)]
struct InterferenceTerm {
    link: u32,
    bs: u32,
    /// `P * G_ue(offset) * 10^(-(PL + shadowing)/10)`.
    weight: f64,
    /// Direction from the interfering BS to the victim.
    ux: f64,
    uy: f64,
}

struct Cell {
    bs: usize,
    members: Vec<usize>,
    scheduler: SchedulerState<f64>,
    served_by_nsp: [f64; 2],
}

/// One regime's view of a drop: association, schedulers and accumulators.
struct RegimeRun {
    serving_link: Vec<Option<usize>>,
    terms: Vec<InterferenceTerm>,
    term_offsets: Vec<usize>,
    cells: Vec<Cell>,
    /// Beam direction per BS (unit vector); unused for inactive BSs.
    beams: Vec<(f64, f64)>,
    association: Association,
    rates: Vec<f64>,
    served: Vec<f64>,
    scratch: Vec<f64>,
}

impl RegimeRun {
    fn new(config: &SimConfig, world: &World, regime: &WeightRegime<f64>) -> Result<Self> {
        let deployment = &world.deployment;
        let coalition = match regime.regime() {
            SharingRegime::NoSharing => Coalition::none(),
            _ => Coalition::of(&[NspId::FIRST, NspId::SECOND]),
        };
        let association = associate(deployment, coalition);
        let n_bs = deployment.base_stations.len();
        let active: Vec<bool> = association.cell_members.iter().map(|m| !m.is_empty()).collect();

        let mut beams = vec![(1.0, 0.0); n_bs];
        let mut cells = Vec::new();
        for (b, members) in association.cell_members.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let nsps: Vec<NspId> = members.iter().map(|&u| deployment.users[u].nsp).collect();
            let weights = compute_weights(&nsps, regime);
            beams[b] = unit(deployment.base_stations[b].position, deployment.users[members[0]].position);
            cells.push(Cell {
                bs: b,
                members: members.clone(),
                scheduler: SchedulerState::new(weights, config.gamma)?,
                served_by_nsp: [0.0; 2],
            });
        }

        let tx_mw = config.rate.tx_power_mw();
        let mut serving_link = Vec::with_capacity(deployment.users.len());
        let mut terms = Vec::new();
        let mut term_offsets = vec![0];
        for (u, user) in deployment.users.iter().enumerate() {
            let serving = association.serving_bs[u];
            serving_link.push(serving.and_then(|b| world.link_index(u, b)));
            if let (Some(s), InterferenceMode::Full) = (serving, config.interference) {
                let boresight = user.position.bearing_deg(deployment.base_stations[s].position);
                for k in world.user_links(u) {
                    let b = world.links[k].bs;
                    if b == s || !active[b] {
                        continue;
                    }
                    let offset = user.position.bearing_deg(deployment.base_stations[b].position) - boresight;
                    let l = &world.links[k];
                    terms.push(InterferenceTerm {
                        link: k as u32,
                        bs: b as u32,
                        weight: tx_mw * config.user_antenna.gain(offset) * l.static_gain,
                        ux: l.ux,
                        uy: l.uy,
                    });
                }
            }
            term_offsets.push(terms.len());
        }

        let n_users = deployment.users.len();
        Ok(RegimeRun {
            serving_link,
            terms,
            term_offsets,
            cells,
            beams,
            association,
            rates: vec![0.0; n_users],
            served: vec![0.0; n_users],
            scratch: Vec::new(),
        })
    }

    fn interference(&self, fading: &Fading, u: usize, bs_gains: (f64, f64, f64)) -> f64 {
        let (main, back, cos_half) = bs_gains;
        let mut y = 0.0;
        for t in &self.terms[self.term_offsets[u]..self.term_offsets[u + 1]] {
            let (bx, by) = self.beams[t.bs as usize];
            let g = if t.ux * bx + t.uy * by >= cos_half { main } else { back };
            y += t.weight * g * fading.values[t.link as usize];
        }
        y
    }

    fn user_rate(&self, world: &World, fading: &Fading, kernel: &RateKernel, u: usize, bs_gains: (f64, f64, f64)) -> f64 {
        match self.serving_link[u] {
            Some(k) => {
                let h = world.links[k].static_gain * fading.serving(u, k);
                kernel.rate(h, self.interference(fading, u, bs_gains))
            }
            None => 0.0,
        }
    }

    fn step(&mut self, world: &World, fading: &Fading, kernel: &RateKernel, rate_unit: f64, bs_gains: (f64, f64, f64)) -> Result<()> {
        let users = &world.deployment.users;
        let mut picks = Vec::with_capacity(self.cells.len());
        for ci in 0..self.cells.len() {
            let mut scratch = std::mem::take(&mut self.scratch);
            scratch.clear();
            for &u in &self.cells[ci].members {
                let r = self.user_rate(world, fading, kernel, u, bs_gains);
                self.rates[u] = r;
                scratch.push(r / rate_unit);
            }
            let j = self.cells[ci].scheduler.select(&scratch)?;
            self.scratch = scratch;
            picks.push(self.cells[ci].members[j]);
        }
        let with_interference = !self.terms.is_empty();
        if with_interference {
            for (cell, &u) in self.cells.iter().zip(&picks) {
                self.beams[cell.bs] = unit(world.deployment.base_stations[cell.bs].position, users[u].position);
            }
        }
        for (ci, &u) in picks.iter().enumerate() {
            let r = if with_interference {
                self.user_rate(world, fading, kernel, u, bs_gains)
            } else {
                self.rates[u]
            };
            self.served[u] += r;
            self.cells[ci].served_by_nsp[users[u].nsp.index()] += r;
        }
        Ok(())
    }

    fn metrics(&self, world: &World, slots: usize) -> DropMetrics {
        let t = slots as f64;
        let mut user_sum = [0.0; 2];
        let mut user_count = [0usize; 2];
        for (u, user) in world.deployment.users.iter().enumerate() {
            if self.association.serving_bs[u].is_some() {
                user_sum[user.nsp.index()] += self.served[u] / t;
                user_count[user.nsp.index()] += 1;
            }
        }
        let mut cell_sum = [0.0; 2];
        for cell in &self.cells {
            for (sum, served) in cell_sum.iter_mut().zip(cell.served_by_nsp) {
                *sum += served / t;
            }
        }
        let n_cells = self.cells.len();
        let avg = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
        let cell_tput = [avg(cell_sum[0], n_cells), avg(cell_sum[1], n_cells)];
        DropMetrics {
            user_tput: [avg(user_sum[0], user_count[0]), avg(user_sum[1], user_count[1])],
            user_tput_all: avg(user_sum[0] + user_sum[1], user_count[0] + user_count[1]),
            cell_tput,
            total_cell_tput: cell_tput[0] + cell_tput[1],
            associated_users: user_count,
            unassociated_users: self.association.unassociated(),
            active_cells: n_cells,
        }
    }
}

fn unit(from: Point, to: Point) -> (f64, f64) {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let n = dx.hypot(dy);
    if n > 0.0 {
        (dx / n, dy / n)
    } else {
        (1.0, 0.0)
    }
}

/// Single-drop results for one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropMetrics {
    /// Mean user throughput per NSP over its associated users (bit/s).
    pub user_tput: [f64; 2],
    /// Mean user throughput over all associated users.
    pub user_tput_all: f64,
    /// Mean over non-empty cells of the throughput delivered to each NSP's users.
    pub cell_tput: [f64; 2],
    pub total_cell_tput: f64,
    pub associated_users: [usize; 2],
    pub unassociated_users: usize,
    pub active_cells: usize,
}

/// Runs every regime over the same world and fading realization.
pub fn run_drop_regimes(config: &SimConfig, regimes: &[WeightRegime<f64>], seed: u64) -> Result<Vec<DropMetrics>> {
    config.validate()?;
    let world = World::sample(config, seed)?;
    run_world(config, &world, regimes)
}

pub fn run_world(config: &SimConfig, world: &World, regimes: &[WeightRegime<f64>]) -> Result<Vec<DropMetrics>> {
    let kernel = RateKernel::new(config);
    let bs_gains = (
        config.bs_antenna.main_lobe(),
        config.bs_antenna.back_lobe(),
        (config.bs_antenna.beamwidth_deg / 2.0).to_radians().cos(),
    );
    let mut runs = regimes
        .iter()
        .map(|r| RegimeRun::new(config, world, r))
        .collect::<Result<Vec<_>>>()?;
    let mut fading = Fading::new(world, config.interference);
    for _ in 0..config.slots_per_drop {
        fading.redraw();
        for run in &mut runs {
            run.step(world, &fading, &kernel, config.rate_unit_bps, bs_gains)?;
        }
    }
    Ok(runs.iter().map(|r| r.metrics(world, config.slots_per_drop)).collect())
}

pub fn run_drop(config: &SimConfig, regime: &WeightRegime<f64>, seed: u64) -> Result<DropMetrics> {
    Ok(run_drop_regimes(config, std::slice::from_ref(regime), seed)?[0])
}

/// Campaign aggregate for one regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    pub regime: SharingRegime,
    pub psi1: Option<f64>,
    pub user_tput: [Estimate; 2],
    pub user_tput_all: Estimate,
    pub cell_tput: [Estimate; 2],
    pub total_cell_tput: Estimate,
    /// Summed over drops.
    pub unassociated_users: usize,
    pub drops: usize,
    pub slots: usize,
    pub per_drop: Vec<DropMetrics>,
}

impl SimMetrics {
    fn aggregate(regime: &WeightRegime<f64>, per_drop: Vec<DropMetrics>, slots: usize) -> Self {
        let ci = |f: &dyn Fn(&DropMetrics) -> f64| {
            let xs: Vec<f64> = per_drop.iter().map(f).collect();
            confidence_interval(&xs, CONFIDENCE_LEVEL)
        };
        SimMetrics {
            regime: regime.regime(),
            psi1: regime.psi1(),
            user_tput: [ci(&|d| d.user_tput[0]), ci(&|d| d.user_tput[1])],
            user_tput_all: ci(&|d| d.user_tput_all),
            cell_tput: [ci(&|d| d.cell_tput[0]), ci(&|d| d.cell_tput[1])],
            total_cell_tput: ci(&|d| d.total_cell_tput),
            unassociated_users: per_drop.iter().map(|d| d.unassociated_users).sum(),
            drops: per_drop.len(),
            slots,
            per_drop,
        }
    }

    pub fn user_samples(&self, nsp: NspId) -> Vec<f64> {
        self.per_drop.iter().map(|d| d.user_tput[nsp.index()]).collect()
    }

    pub fn total_samples(&self) -> Vec<f64> {
        self.per_drop.iter().map(|d| d.total_cell_tput).collect()
    }
}

/// Campaigns for several regimes over shared drop seeds. Drops run in
/// parallel; results are reduced in drop order.
pub fn run_campaigns(config: &SimConfig, regimes: &[WeightRegime<f64>]) -> Result<Vec<SimMetrics>> {
    config.validate()?;
    let per_drop: Vec<Vec<DropMetrics>> = (0..config.num_drops)
        .into_par_iter()
        .map(|d| run_drop_regimes(config, regimes, seeds::drop_seed(config.base_seed, d)))
        .collect::<Result<_>>()?;
    Ok(regimes
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let drops = per_drop.iter().map(|d| d[i]).collect();
            SimMetrics::aggregate(r, drops, config.slots_per_drop)
        })
        .collect())
}

pub fn run_campaign(config: &SimConfig, regime: &WeightRegime<f64>) -> Result<SimMetrics> {
    Ok(run_campaigns(config, std::slice::from_ref(regime))?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub no_sharing: SimMetrics,
    pub equal_sharing: SimMetrics,
    /// One entry per `psi_grid` value, in grid order.
    pub weighted: Vec<SimMetrics>,
}

impl Sweep {
    pub fn all(&self) -> impl Iterator<Item = &SimMetrics> {
        [&self.no_sharing, &self.equal_sharing].into_iter().chain(&self.weighted)
    }
}

/// Weighted sharing over the psi grid plus both baselines, all on the same drops.
pub fn sweep_psi(config: &SimConfig) -> Result<Sweep> {
    if config.psi_grid.is_empty() {
        return Err(Error::invalid("psi_grid", "must not be empty"));
    }
    let mut regimes = vec![WeightRegime::NoSharing, WeightRegime::EqualSharing];
    for &psi in &config.psi_grid {
        regimes.push(WeightRegime::weighted_duopoly(psi)?);
    }
    let mut all = run_campaigns(config, &regimes)?.into_iter();
    let no_sharing = all.next().expect("baseline present");
    let equal_sharing = all.next().expect("baseline present");
    Ok(Sweep {
        no_sharing,
        equal_sharing,
        weighted: all.collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{data_rate, interference_at, Interferer};
    use approx::assert_relative_eq;

    fn small() -> SimConfig {
        SimConfig {
            area: Area {
                width_m: 300.0,
                height_m: 300.0,
            },
            slots_per_drop: 200,
            num_drops: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn kernel_matches_rate_formula() {
        let cfg = SimConfig::default();
        let k = RateKernel::new(&cfg);
        let d = cfg.bs_antenna.main_lobe() * cfg.user_antenna.main_lobe();
        for (h, y) in [(1e-11, 0.0), (3e-13, 1e-9), (0.0, 0.0), (1e-9, 5e-7)] {
            assert_relative_eq!(k.rate(h, y), data_rate(h, y, &cfg.rate, d), max_relative = 1e-12);
        }
    }

    #[test]
    fn fast_interference_matches_reference() {
        let cfg = small();
        let world = World::sample(&cfg, 11).unwrap();
        let regime = WeightRegime::EqualSharing;
        let mut run = RegimeRun::new(&cfg, &world, &regime).unwrap();
        let mut fading = Fading::new(&world, cfg.interference);
        fading.redraw();
        let dep = &world.deployment;
        // Point each active BS at its last member instead of the first.
        let mut scheduled = vec![None; dep.base_stations.len()];
        for cell in &run.cells {
            let u = *cell.members.last().unwrap();
            scheduled[cell.bs] = Some(u);
            run.beams[cell.bs] = unit(dep.base_stations[cell.bs].position, dep.users[u].position);
        }
        let gains = (
            cfg.bs_antenna.main_lobe(),
            cfg.bs_antenna.back_lobe(),
            (cfg.bs_antenna.beamwidth_deg / 2.0).to_radians().cos(),
        );
        let mut checked = 0;
        for (u, user) in dep.users.iter().enumerate() {
            let Some(s) = run.association.serving_bs[u] else { continue };
            let mut states = Vec::new();
            for (b, sched) in scheduled.iter().enumerate() {
                if b == s || sched.is_none() {
                    continue;
                }
                let mut st = world.link_state(u, b);
                if let Some(k) = world.link_index(u, b) {
                    st.fading_power_gain = fading.values[k];
                }
                states.push((b, st));
            }
            let interferers: Vec<Interferer<'_>> = states
                .iter()
                .map(|(b, st)| Interferer {
                    position: dep.base_stations[*b].position,
                    scheduled_user: dep.users[scheduled[*b].unwrap()].position,
                    link_to_victim: st,
                })
                .collect();
            let reference = interference_at(
                user.position,
                dep.base_stations[s].position,
                &interferers,
                cfg.rate.tx_power_mw(),
                &cfg.bs_antenna,
                &cfg.user_antenna,
                InterferenceMode::Full,
            );
            let fast = run.interference(&fading, u, gains);
            assert_relative_eq!(fast, reference, max_relative = 1e-9, epsilon = 1e-300);
            if reference > 0.0 {
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn deterministic_and_regime_independent() {
        let cfg = small();
        let regimes = [WeightRegime::NoSharing, WeightRegime::weighted_duopoly(0.7).unwrap()];
        let a = run_drop_regimes(&cfg, &regimes, 5).unwrap();
        let b = run_drop_regimes(&cfg, &regimes, 5).unwrap();
        assert_eq!(a, b);
        // Lockstep evaluation does not perturb an individual regime.
        assert_eq!(run_drop(&cfg, &regimes[1], 5).unwrap(), a[1]);
    }

    #[test]
    fn accounting_identity() {
        let cfg = small();
        for m in run_drop_regimes(&cfg, &[WeightRegime::EqualSharing], 8).unwrap() {
            assert_relative_eq!(m.total_cell_tput, m.cell_tput[0] + m.cell_tput[1], max_relative = 1e-12);
            assert!(m.user_tput.iter().chain(&m.cell_tput).all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn empty_drop_is_all_zero() {
        let cfg = SimConfig {
            area: Area {
                width_m: 1.0,
                height_m: 1.0,
            },
            ..small()
        };
        let m = run_drop(&cfg, &WeightRegime::EqualSharing, 1).unwrap();
        assert_eq!(m.total_cell_tput, 0.0);
        assert_eq!(m.user_tput, [0.0, 0.0]);
    }

    #[test]
    fn single_drop_has_no_interval() {
        let cfg = SimConfig { num_drops: 1, ..small() };
        let m = run_campaign(&cfg, &WeightRegime::NoSharing).unwrap();
        assert_eq!(m.total_cell_tput.half_width, None);
        assert_eq!(m.drops, 1);
    }

    #[test]
    fn noise_limited_mode_runs() {
        let cfg = SimConfig {
            interference: InterferenceMode::NoiseLimited,
            ..small()
        };
        let full = run_drop(&small(), &WeightRegime::EqualSharing, 3).unwrap();
        let quiet = run_drop(&cfg, &WeightRegime::EqualSharing, 3).unwrap();
        assert!(quiet.total_cell_tput > 0.0 && full.total_cell_tput > 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SimConfig { slots_per_drop: 0, ..small() }.validate().is_err());
        assert!(SimConfig { psi_grid: vec![1.5], ..small() }.validate().is_err());
        assert!(SimConfig { n1: -0.1, ..small() }.validate().is_err());
        let empty = SimConfig { psi_grid: vec![], ..small() };
        assert!(sweep_psi(&empty).is_err());
    }
}

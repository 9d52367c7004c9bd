//! Sequential-pricing duopoly under the three sharing regimes.
//!
//! NSP 1 (the larger provider) posts a price, NSP 2 replies, and consumers
//! with taste `w ~ U[0, w_hat]` buy from the provider maximizing
//! `w * mu * q_i - p_i`, or from no one. The regime only changes the
//! perceived qualities `q_i`:
//!
//! | regime   | q_1                 | q_2                 |
//! |----------|---------------------|---------------------|
//! | none     | n_1                 | n_2                 |
//! | equal    | n_1 + n_2           | n_1 + n_2           |
//! | weighted | psi_1 (n_1 + n_2)   | psi_2 (n_1 + n_2)   |
//!
//! Closed forms are generic over [`Scalar`] so they can be checked exactly
//! with rationals; the grid oracle [`numeric_equilibrium`] is `f64` only and
//! shares nothing with them beyond the consumer stage.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::SharingRegime;

fn int<T: Scalar>(v: i32) -> T {
    T::int(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams<T> {
    /// BS share of the larger provider.
    pub n1: T,
    pub n2: T,
    /// Marginal cost per subscriber.
    pub c1: T,
    pub c2: T,
    pub mu: T,
    pub omega_hat: T,
    pub psi1: T,
    pub consumer_mass: T,
    /// Undercut used by the low-cost provider under equal sharing.
    pub undercut_epsilon: T,
}

impl<T: Scalar> MarketParams<T> {
    /// Zero-cost market with `mu = w_hat = 1` and unit consumer mass.
    pub fn zero_cost(n1: T, n2: T, psi1: T) -> Self {
        MarketParams {
            n1,
            n2,
            c1: T::zero(),
            c2: T::zero(),
            mu: T::one(),
            omega_hat: T::one(),
            psi1,
            consumer_mass: T::one(),
            undercut_epsilon: T::lit(1e-6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        if !(self.n2 > zero) {
            return Err(Error::invalid("n2", "must be positive"));
        }
        if !(self.n1 >= self.n2) {
            return Err(Error::invalid("n1", "the leader must be at least as large as NSP 2 (n1 >= n2)"));
        }
        if !(self.n1 + self.n2 <= one) {
            return Err(Error::invalid("n1", "n1 + n2 must not exceed 1"));
        }
        if !(self.mu > zero) {
            return Err(Error::invalid("mu", "must be positive"));
        }
        if !(self.omega_hat > zero) {
            return Err(Error::invalid("omega_hat", "must be positive"));
        }
        if !(self.psi1 >= zero && self.psi1 <= one) {
            return Err(Error::invalid("psi1", "must lie in [0, 1]"));
        }
        if !(self.consumer_mass > zero) {
            return Err(Error::invalid("consumer_mass", "must be positive"));
        }
        if !(self.c1 >= zero) {
            return Err(Error::invalid("c1", "must be non-negative"));
        }
        if !(self.c2 >= zero) {
            return Err(Error::invalid("c2", "must be non-negative"));
        }
        if !(self.undercut_epsilon >= zero) {
            return Err(Error::invalid("undercut_epsilon", "must be non-negative"));
        }
        Ok(())
    }

    pub fn psi2(&self) -> T {
        T::one() - self.psi1
    }

    /// `mu * w_hat`, the willingness to pay of the keenest consumer per unit quality.
    pub fn scale(&self) -> T {
        self.mu * self.omega_hat
    }

    pub fn qualities(&self, regime: SharingRegime) -> (T, T) {
        let total = self.n1 + self.n2;
        match regime {
            SharingRegime::NoSharing => (self.n1, self.n2),
            SharingRegime::EqualSharing => (total, total),
            SharingRegime::WeightedSharing => (self.psi1 * total, self.psi2() * total),
        }
    }
}

/// Indifference points from the closed forms, before any clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalConsumers<T> {
    /// Indifferent between NSP 2 and not subscribing.
    pub lower: T,
    /// Indifferent between NSP 1 and NSP 2.
    pub upper: T,
}

pub fn marginal_consumers<T: Scalar>(
    params: &MarketParams<T>,
    p1: T,
    p2: T,
    regime: SharingRegime,
) -> Result<MarginalConsumers<T>> {
    let mu = params.mu;
    match regime {
        SharingRegime::NoSharing => {
            if params.n1 == params.n2 {
                return Err(Error::DegenerateMarket(
                    "n1 = n2 without sharing: providers differ only in price".into(),
                ));
            }
            Ok(MarginalConsumers {
                lower: p2 / (mu * params.n2),
                upper: (p1 - p2) / (mu * (params.n1 - params.n2)),
            })
        }
        SharingRegime::WeightedSharing => {
            let (psi1, psi2) = (params.psi1, params.psi2());
            if psi1 == psi2 {
                return Err(Error::DegenerateMarket(
                    "psi1 = psi2: providers differ only in price".into(),
                ));
            }
            if psi2 == T::zero() {
                return Err(Error::DegenerateMarket("psi2 = 0: NSP 2 offers no service".into()));
            }
            let total = params.n1 + params.n2;
            Ok(MarginalConsumers {
                lower: p2 / (mu * psi2 * total),
                upper: (p1 - p2) / (mu * total * (psi1 - psi2)),
            })
        }
        SharingRegime::EqualSharing => Err(Error::DegenerateMarket(
            "equal sharing: consumers choose on price alone".into(),
        )),
    }
}

/// Outcome of the consumer stage.
///
/// `lower` is the lowest subscribing type and `upper` the type splitting the
/// two providers, both clamped to `[0, w_hat]`. With NSP 1 as the
/// higher-quality provider, `share1 = (w_hat - upper) / w_hat` and
/// `share2 = (upper - lower) / w_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsumerSplit<T> {
    pub lower: T,
    pub upper: T,
    pub share1: T,
    pub share2: T,
}

/// Exact consumer choice at prices `(p1, p2)`.
///
/// Unlike the raw closed forms this also covers the corners: a provider
/// priced out of the market, a provider serving everyone, and the equal
/// quality case (cheaper provider takes all, exact ties split evenly).
pub fn consumer_split<T: Scalar>(
    params: &MarketParams<T>,
    p1: T,
    p2: T,
    regime: SharingRegime,
) -> ConsumerSplit<T> {
    let (q1, q2) = params.qualities(regime);
    let w = params.omega_hat;
    let mu = params.mu;
    let zero = T::zero();
    let clamp = |x: T| x.clamp_to(zero, w);
    // Lowest type buying from a provider of quality q at price p, absent rivals.
    let cutoff = |p: T, q: T| if q > zero { p / (mu * q) } else { w };
    let share = |a: T, b: T| (b - a).max_of(zero) / w;

    if q1 == q2 {
        return if p1 < p2 {
            let lower = clamp(cutoff(p1, q1));
            ConsumerSplit {
                lower,
                upper: lower,
                share1: share(lower, w),
                share2: zero,
            }
        } else if p2 < p1 {
            let lower = clamp(cutoff(p2, q2));
            ConsumerSplit {
                lower,
                upper: w,
                share1: zero,
                share2: share(lower, w),
            }
        } else {
            let lower = clamp(cutoff(p1, q1));
            let half = share(lower, w) / int(2);
            ConsumerSplit {
                lower,
                upper: (lower + w) / int(2),
                share1: half,
                share2: half,
            }
        };
    }

    // Vertical differentiation: `hi` has the better quality.
    let (q_hi, q_lo, p_hi, p_lo) = if q1 > q2 { (q1, q2, p1, p2) } else { (q2, q1, p2, p1) };
    let lo_cut = cutoff(p_lo, q_lo);
    let indifferent = (p_hi - p_lo) / (mu * (q_hi - q_lo));
    let (lower, upper, share_hi, share_lo) = if q_lo > zero && lo_cut < indifferent {
        let lower = clamp(lo_cut);
        let upper = clamp(indifferent);
        (lower, upper, share(upper, w), share(lower, upper))
    } else {
        let cut = clamp(cutoff(p_hi, q_hi));
        (cut, cut, share(cut, w), zero)
    };
    if q1 > q2 {
        ConsumerSplit {
            lower,
            upper,
            share1: share_hi,
            share2: share_lo,
        }
    } else {
        ConsumerSplit {
            lower,
            upper,
            share1: share_lo,
            share2: share_hi,
        }
    }
}

/// `pi_i = (p_i - c_i) N_i` with `N_i` from the exact consumer stage.
pub fn profits<T: Scalar>(params: &MarketParams<T>, p1: T, p2: T, regime: SharingRegime) -> (T, T) {
    let split = consumer_split(params, p1, p2, regime);
    (
        (p1 - params.c1) * params.consumer_mass * split.share1,
        (p2 - params.c2) * params.consumer_mass * split.share2,
    )
}

/// Leader/follower prices without sharing, by backward induction on the
/// interior demand system.
pub fn no_sharing_prices<T: Scalar>(n1: T, n2: T, c1: T, c2: T, scale: T) -> (T, T) {
    let p1 = ((int::<T>(2) * c1 + c2) * n1 - c1 * n2 + int::<T>(2) * scale * n1 * (n1 - n2))
        / (int::<T>(2) * (int::<T>(2) * n1 - n2));
    let p2 = (int::<T>(4) * c2 * n1 * n1
        + (int::<T>(2) * c1 - c2 + int::<T>(2) * scale * (n1 - n2)) * n1 * n2
        - c1 * n2 * n2)
        / (int::<T>(4) * n1 * (int::<T>(2) * n1 - n2));
    (p1, p2)
}

/// Leader/follower prices under weighted sharing with total BS share `total`.
pub fn weighted_sharing_prices<T: Scalar>(psi1: T, psi2: T, total: T, c1: T, c2: T, scale: T) -> (T, T) {
    let two = int::<T>(2);
    let p1 = (two * scale * psi1 * (psi1 - psi2) * total + (two * c1 + c2) * psi1 - c1 * psi2)
        / (two * (two * psi1 - psi2));
    let p2 = (psi1 * psi2 * (two * scale * total * (psi1 - psi2) + two * c1 - c2)
        + int::<T>(4) * c2 * psi1 * psi1
        - c1 * psi2 * psi2)
        / (int::<T>(4) * psi1 * (two * psi1 - psi2));
    (p1, p2)
}

/// Bertrand outcome under equal sharing. Equal costs price at cost; otherwise
/// the cheaper provider undercuts the rival's cost by `epsilon` (or charges
/// its monopoly price if lower) and the rival prices at cost.
pub fn equal_sharing_prices<T: Scalar>(params: &MarketParams<T>) -> (T, T) {
    let (c1, c2) = (params.c1, params.c2);
    let q = params.n1 + params.n2;
    let monopoly = |c: T| (params.scale() * q + c) / int(2);
    let eps = params.undercut_epsilon;
    if c1 == c2 {
        (c1, c2)
    } else if c1 < c2 {
        ((c2 - eps).min_of(monopoly(c1)).max_of(c1), c2)
    } else {
        (c1, (c1 - eps).min_of(monopoly(c2)).max_of(c2))
    }
}

/// Subgame-perfect prices `(p1*, p2*)` from the closed forms.
pub fn best_response_prices<T: Scalar>(params: &MarketParams<T>, regime: SharingRegime) -> Result<(T, T)> {
    params.validate()?;
    let scale = params.scale();
    match regime {
        SharingRegime::NoSharing => {
            if params.n1 == params.n2 {
                return Err(Error::DegenerateMarket(
                    "n1 = n2 without sharing: providers differ only in price".into(),
                ));
            }
            Ok(no_sharing_prices(params.n1, params.n2, params.c1, params.c2, scale))
        }
        SharingRegime::WeightedSharing => {
            let (psi1, psi2) = (params.psi1, params.psi2());
            if psi1 < psi2 {
                return Err(Error::invalid("psi1", "weighted best responses require psi1 >= psi2"));
            }
            if psi1 == psi2 {
                return Err(Error::DegenerateMarket(
                    "psi1 = psi2: providers differ only in price".into(),
                ));
            }
            Ok(weighted_sharing_prices(
                psi1,
                psi2,
                params.n1 + params.n2,
                params.c1,
                params.c2,
                scale,
            ))
        }
        SharingRegime::EqualSharing => Ok(equal_sharing_prices(params)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketOutcome<T> {
    pub regime: SharingRegime,
    pub p1: T,
    pub p2: T,
    /// Closed-form indifference points; absent under equal sharing.
    pub marginal_raw: Option<MarginalConsumers<T>>,
    pub omega_lower: T,
    pub omega_upper: T,
    pub share1: T,
    pub share2: T,
    pub subscribers1: T,
    pub subscribers2: T,
    pub profit1: T,
    pub profit2: T,
    /// The closed forms assume `0 <= lower <= upper <= w_hat`; set when the
    /// returned prices violate that.
    pub corner: bool,
}

/// Evaluates the whole market at given prices.
pub fn evaluate<T: Scalar>(params: &MarketParams<T>, p1: T, p2: T, regime: SharingRegime) -> MarketOutcome<T> {
    let marginal_raw = marginal_consumers(params, p1, p2, regime).ok();
    let split = consumer_split(params, p1, p2, regime);
    let (profit1, profit2) = profits(params, p1, p2, regime);
    let corner = match marginal_raw {
        Some(m) => !(T::zero() <= m.lower && m.lower <= m.upper && m.upper <= params.omega_hat),
        None => false,
    };
    MarketOutcome {
        regime,
        p1,
        p2,
        marginal_raw,
        omega_lower: split.lower,
        omega_upper: split.upper,
        share1: split.share1,
        share2: split.share2,
        subscribers1: params.consumer_mass * split.share1,
        subscribers2: params.consumer_mass * split.share2,
        profit1,
        profit2,
        corner,
    }
}

/// Closed-form equilibrium together with the market it induces.
pub fn solve<T: Scalar>(params: &MarketParams<T>, regime: SharingRegime) -> Result<MarketOutcome<T>> {
    let (p1, p2) = best_response_prices(params, regime)?;
    Ok(evaluate(params, p1, p2, regime))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridEquilibrium {
    pub p1: f64,
    pub p2: f64,
    pub profit1: f64,
    pub profit2: f64,
}

fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent + 1e-12 * incumbent.abs()
}

/// Brute-force backward induction used as an independent check of the
/// closed forms.
struct GridGame<'a> {
    params: &'a MarketParams<f64>,
    regime: SharingRegime,
    step: f64,
    steps1: usize,
    steps2: usize,
    differentiated: bool,
    follower_capped: bool,
}

impl<'a> GridGame<'a> {
    fn new(params: &'a MarketParams<f64>, regime: SharingRegime, step: f64) -> Self {
        let (q1, q2) = params.qualities(regime);
        let top = (params.scale() * q1.max(q2)).max(params.c1).max(params.c2);
        let steps = |c: f64| ((top - c) / step).ceil().max(0.0) as usize;
        GridGame {
            params,
            regime,
            step,
            steps1: steps(params.c1),
            steps2: steps(params.c2),
            differentiated: q1 != q2,
            // A follower with no better quality sells nothing above the
            // leader's price, and ties go to the lower price anyway.
            follower_capped: q2 <= q1,
        }
    }

    fn p1(&self, k: usize) -> f64 {
        self.params.c1 + k as f64 * self.step
    }

    fn p2(&self, k: usize) -> f64 {
        self.params.c2 + k as f64 * self.step
    }

    fn follower_profit(&self, p1: f64, p2: f64) -> f64 {
        profits(self.params, p1, p2, self.regime).1
    }

    /// NSP 2's reply to `p1`: exhaustive scan of its grid (ties to the lower
    /// price) then, when qualities differ, one parabolic step inside the
    /// winning cell so grid rounding cannot be exploited by the leader.
    fn follower_reply(&self, p1: f64) -> f64 {
        let mut best_k = 0;
        let mut best = self.follower_profit(p1, self.p2(0));
        for k in 1..=self.steps2 {
            let p2 = self.p2(k);
            if self.follower_capped && p2 > p1 {
                break;
            }
            let v = self.follower_profit(p1, p2);
            if improves(v, best) {
                best = v;
                best_k = k;
            }
        }
        let x = self.p2(best_k);
        if !self.differentiated || best_k == 0 || best_k == self.steps2 {
            return x;
        }
        let fa = self.follower_profit(p1, x - self.step);
        let fc = self.follower_profit(p1, x + self.step);
        let curvature = fa - 2.0 * best + fc;
        if curvature >= 0.0 {
            return x;
        }
        let shift = (self.step * (fa - fc) / (2.0 * curvature)).clamp(-self.step, self.step);
        let refined = x + shift;
        if improves(self.follower_profit(p1, refined), best) {
            refined
        } else {
            x
        }
    }

    fn solve(&self) -> GridEquilibrium {
        let leader = |k: usize| {
            let p1 = self.p1(k);
            let p2 = self.follower_reply(p1);
            let (v1, _) = profits(self.params, p1, p2, self.regime);
            (k, p2, v1)
        };
        let evaluated: Vec<(usize, f64, f64)> = (0..=self.steps1).into_par_iter().map(leader).collect();
        let mut best = evaluated[0];
        for &cand in &evaluated[1..] {
            if improves(cand.2, best.2) {
                best = cand;
            }
        }
        let p1 = self.p1(best.0);
        let (profit1, profit2) = profits(self.params, p1, best.1, self.regime);
        GridEquilibrium {
            p1,
            p2: best.1,
            profit1,
            profit2,
        }
    }
}

/// Backward induction over price grids `c_i + k * resolution` (providers
/// never price below marginal cost). For each leader price the follower's
/// best reply is found by exhaustive search; the leader then maximizes its
/// profit anticipating that reply. Ties go to the lower price.
pub fn numeric_equilibrium(
    params: &MarketParams<f64>,
    regime: SharingRegime,
    resolution: f64,
) -> Result<GridEquilibrium> {
    params.validate()?;
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::invalid("resolution", "must be positive"));
    }
    Ok(GridGame::new(params, regime, resolution).solve())
}

/// NSP 2's exact best profit against `p1` on the oracle grid.
pub fn follower_best_profit(params: &MarketParams<f64>, regime: SharingRegime, p1: f64, resolution: f64) -> f64 {
    let g = GridGame::new(params, regime, resolution);
    g.follower_profit(p1, g.follower_reply(p1))
}

/// Leader profit when it posts `p1` and the follower replies optimally on the grid.
pub fn leader_profit_against_reply(
    params: &MarketParams<f64>,
    regime: SharingRegime,
    p1: f64,
    resolution: f64,
) -> f64 {
    let g = GridGame::new(params, regime, resolution);
    profits(params, p1, g.follower_reply(p1), regime).0
}

/// Zero-cost equilibrium profits for a market of scale `mu * w_hat`.
pub fn zero_cost_profits<T: Scalar>(
    n1: T,
    n2: T,
    psi1: T,
    mu_omega_hat: T,
    regime: SharingRegime,
) -> Result<(T, T)> {
    let (two, four) = (int::<T>(2), int::<T>(4));
    match regime {
        SharingRegime::NoSharing => {
            if n1 == n2 {
                return Err(Error::DegenerateMarket(
                    "n1 = n2 without sharing: providers differ only in price".into(),
                ));
            }
            let d = two * n1 - n2;
            Ok((
                mu_omega_hat * n1 * (n1 - n2) / (two * d),
                mu_omega_hat * n1 * n2 * (n1 - n2) / (four * d * d),
            ))
        }
        SharingRegime::WeightedSharing => {
            let psi2 = T::one() - psi1;
            if psi1 < psi2 {
                return Err(Error::invalid("psi1", "weighted sharing profits require psi1 >= psi2"));
            }
            if psi1 == psi2 {
                return Err(Error::DegenerateMarket(
                    "psi1 = psi2: providers differ only in price".into(),
                ));
            }
            let total = n1 + n2;
            let d = two * psi1 - psi2;
            Ok((
                mu_omega_hat * psi1 * (psi1 - psi2) * total / (two * d),
                mu_omega_hat * psi1 * psi2 * (psi1 - psi2) * total / (four * d * d),
            ))
        }
        SharingRegime::EqualSharing => Err(Error::invalid(
            "regime",
            "zero-cost profit formulas exist for no sharing and weighted sharing only",
        )),
    }
}

/// Range of `psi1` over which weighted sharing beats no sharing for both providers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiBounds<T> {
    /// `n1 / (n1 + n2)`: below this NSP 1 prefers not to share.
    pub psi_min: T,
    /// Upper root before capping at 1; `None` when the discriminant is negative.
    pub psi_max_raw: Option<T>,
    pub delta: T,
}

impl<T: Real> PsiBounds<T> {
    pub fn psi_max(&self) -> Option<T> {
        self.psi_max_raw.map(|v| v.min_of(T::one()))
    }

    /// Open interval `(psi_min, psi_max)` when non-empty.
    pub fn interval(&self) -> Option<(T, T)> {
        self.psi_max()
            .filter(|&hi| self.psi_min < hi)
            .map(|hi| (self.psi_min, hi))
    }

    pub fn is_beneficial(&self) -> bool {
        self.interval().is_some()
    }
}

pub fn psi_bounds<T: Real>(n1: T, n2: T) -> Result<PsiBounds<T>> {
    if !(n2 > T::zero() && n1 >= n2) {
        return Err(Error::invalid("n2", "requires 0 < n2 <= n1"));
    }
    if !(n1 + n2 <= T::one()) {
        return Err(Error::invalid("n1", "n1 + n2 must not exceed 1"));
    }
    let i = int::<T>;
    let delta = i(16) * n1.powi(4) - i(8) * n1.powi(3) * n2 - i(15) * n1.powi(2) * n2.powi(2)
        + i(10) * n1 * n2.powi(3)
        + n2.powi(4);
    let psi_min = n1 / (n1 + n2);
    let psi_max_raw = (delta >= T::zero()).then(|| {
        (i(4) * n1 * n1 - i(5) * n1 * n2 + i(3) * n2 * n2 + delta.sqrt())
            / (i(4) * (i(2) * n1 - n2).powi(2))
    });
    Ok(PsiBounds {
        psi_min,
        psi_max_raw,
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCell {
    pub n1: f64,
    pub n2: f64,
    pub bounds: PsiBounds<f64>,
}

/// `psi_bounds` over `{(n1, n2) = (i r, j r) : 0 < n2 <= n1, n1 + n2 <= 1}`,
/// ordered by `n1` then `n2`.
pub fn mutual_benefit_region(resolution: f64) -> Result<Vec<RegionCell>> {
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::invalid("resolution", "must lie in (0, 0.5]"));
    }
    let steps = (1.0 / resolution + 1e-9).floor() as usize;
    let cells = (1..=steps)
        .into_par_iter()
        .flat_map_iter(|i| {
            (1..=i.min(steps - i)).map(move |j| {
                let n1 = i as f64 * resolution;
                let n2 = j as f64 * resolution;
                let bounds = psi_bounds(n1, n2).expect("grid stays inside the valid domain");
                RegionCell { n1, n2, bounds }
            })
        })
        .collect();
    Ok(cells)
}

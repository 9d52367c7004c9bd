//! Random deployments over a rectangle and nearest-BS association.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Network service provider identifier (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NspId(pub u8);

impl NspId {
    pub const FIRST: NspId = NspId(1);
    pub const SECOND: NspId = NspId(2);

    /// Zero-based slot for per-provider arrays.
    pub fn index(self) -> usize {
        usize::from(self.0) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Direction of `other` seen from `self`, degrees in (-180, 180].
    pub fn bearing_deg(self, other: Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x).to_degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Area {
    pub fn new(width_m: f64, height_m: f64) -> Result<Self> {
        let area = Area { width_m, height_m };
        area.validate()?;
        Ok(area)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_m > 0.0 && self.width_m.is_finite()) {
            return Err(Error::invalid("area_width_m", "must be positive and finite"));
        }
        if !(self.height_m > 0.0 && self.height_m.is_finite()) {
            return Err(Error::invalid("area_height_m", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn km2(&self) -> f64 {
        self.width_m * self.height_m * 1e-6
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width_m).contains(&p.x) && (0.0..=self.height_m).contains(&p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub position: Point,
    pub nsp: NspId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub area: Area,
    pub base_stations: Vec<Site>,
    pub users: Vec<Site>,
}

/// Draws a homogeneous Poisson point process on `area` from `rng`.
pub fn sample_hppp_with<R: Rng + ?Sized>(
    intensity_per_km2: f64,
    area: &Area,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if !(intensity_per_km2 >= 0.0 && intensity_per_km2.is_finite()) {
        return Err(Error::invalid("intensity", "must be non-negative and finite"));
    }
    area.validate()?;
    let mean = intensity_per_km2 * area.km2();
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::invalid("intensity", e.to_string()))?;
    let count = poisson.sample(rng) as usize;
    Ok((0..count)
        .map(|_| {
            Point::new(
                rng.random::<f64>() * area.width_m,
                rng.random::<f64>() * area.height_m,
            )
        })
        .collect())
}

/// Seeded hPPP sample; the same seed always yields the same points.
pub fn sample_hppp(intensity_per_km2: f64, area: &Area, seed: u64) -> Result<Vec<Point>> {
    sample_hppp_with(intensity_per_km2, area, &mut seeds::stream(seed))
}

/// Two providers with independent BS and user processes, NSP 1 holding
/// fraction `n1` of both total densities.
pub fn split_deployment(
    total_bs_density: f64,
    total_user_density: f64,
    n1: f64,
    area: Area,
    seed: u64,
) -> Result<Deployment> {
    if !(0.0..=1.0).contains(&n1) {
        return Err(Error::invalid("n1", format!("must lie in [0, 1], got {n1}")));
    }
    let shares = [(NspId::FIRST, n1), (NspId::SECOND, 1.0 - n1)];
    let mut base_stations = Vec::new();
    let mut users = Vec::new();
    for (nsp, share) in shares {
        let idx = u64::from(nsp.0);
        for p in sample_hppp(share * total_bs_density, &area, seeds::derive(seed, "bs", idx))? {
            base_stations.push(Site { position: p, nsp });
        }
        for p in sample_hppp(share * total_user_density, &area, seeds::derive(seed, "ue", idx))? {
            users.push(Site { position: p, nsp });
        }
    }
    Ok(Deployment {
        area,
        base_stations,
        users,
    })
}

/// Set of providers that pool their base stations.
///
/// Subscribers of a member may attach to any member's BS; everyone else is
/// restricted to their own provider. An empty or single-member coalition is
/// therefore the no-sharing case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Coalition(u64);

impl Coalition {
    pub fn none() -> Self {
        Coalition(0)
    }

    pub fn of(members: &[NspId]) -> Self {
        Coalition(members.iter().fold(0, |m, n| m | (1u64 << n.0)))
    }

    pub fn contains(self, nsp: NspId) -> bool {
        self.0 & (1u64 << nsp.0) != 0
    }

    /// Whether a subscriber of `user` may attach to a BS of `bs`.
    pub fn permits(self, user: NspId, bs: NspId) -> bool {
        user == bs || (self.contains(user) && self.contains(bs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    /// Serving BS per user; `None` when no BS is eligible.
    pub serving_bs: Vec<Option<usize>>,
    /// Users attached to each BS, in increasing user index.
    pub cell_members: Vec<Vec<usize>>,
}

impl Association {
    pub fn unassociated(&self) -> usize {
        self.serving_bs.iter().filter(|s| s.is_none()).count()
    }
}

/// Attaches every user to the nearest eligible BS (lowest index on ties).
pub fn associate(deployment: &Deployment, coalition: Coalition) -> Association {
    let mut cell_members = vec![Vec::new(); deployment.base_stations.len()];
    let serving_bs = deployment
        .users
        .iter()
        .enumerate()
        .map(|(u, user)| {
            let mut best: Option<(usize, f64)> = None;
            for (b, bs) in deployment.base_stations.iter().enumerate() {
                if !coalition.permits(user.nsp, bs.nsp) {
                    continue;
                }
                let d = user.position.distance(bs.position);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((b, d));
                }
            }
            let serving = best.map(|(b, _)| b);
            if let Some(b) = serving {
                cell_members[b].push(u);
            }
            serving
        })
        .collect();
    Association {
        serving_bs,
        cell_members,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site(x: f64, y: f64, nsp: u8) -> Site {
        Site {
            position: Point::new(x, y),
            nsp: NspId(nsp),
        }
    }

    #[test]
    fn zero_intensity_is_empty() {
        let area = Area::new(1000.0, 1000.0).unwrap();
        assert!(sample_hppp(0.0, &area, 3).unwrap().is_empty());
    }

    #[test]
    fn negative_intensity_rejected() {
        let area = Area::new(1000.0, 1000.0).unwrap();
        assert!(matches!(
            sample_hppp(-1.0, &area, 3),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn same_seed_same_points() {
        let area = Area::new(1000.0, 1000.0).unwrap();
        let a = sample_hppp(100.0, &area, 42).unwrap();
        let b = sample_hppp(100.0, &area, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| area.contains(*p)));
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let area = Area::new(100.0, 100.0).unwrap();
        assert!(split_deployment(100.0, 500.0, 1.2, area, 1).is_err());
        assert!(split_deployment(100.0, 500.0, -0.1, area, 1).is_err());
    }

    #[test]
    fn full_split_gives_everything_to_first() {
        let area = Area::new(1000.0, 1000.0).unwrap();
        let d = split_deployment(100.0, 500.0, 1.0, area, 9).unwrap();
        assert!(!d.base_stations.is_empty());
        assert!(d.base_stations.iter().all(|s| s.nsp == NspId::FIRST));
        assert!(d.users.iter().all(|s| s.nsp == NspId::FIRST));
    }

    #[test]
    fn user_without_eligible_bs_is_unassociated() {
        let d = Deployment {
            area: Area::new(10.0, 10.0).unwrap(),
            base_stations: vec![site(1.0, 1.0, 2)],
            users: vec![site(2.0, 2.0, 1)],
        };
        let a = associate(&d, Coalition::none());
        assert_eq!(a.serving_bs, vec![None]);
        assert_eq!(a.unassociated(), 1);
        let shared = associate(&d, Coalition::of(&[NspId::FIRST, NspId::SECOND]));
        assert_eq!(shared.serving_bs, vec![Some(0)]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let d = Deployment {
            area: Area::new(10.0, 10.0).unwrap(),
            base_stations: vec![site(0.0, 5.0, 1), site(10.0, 5.0, 1)],
            users: vec![site(5.0, 5.0, 1)],
        };
        assert_eq!(associate(&d, Coalition::none()).serving_bs, vec![Some(0)]);
    }

    #[test]
    fn single_member_coalition_is_no_sharing() {
        let area = Area::new(500.0, 500.0).unwrap();
        let d = split_deployment(100.0, 500.0, 0.5, area, 5).unwrap();
        assert_eq!(
            associate(&d, Coalition::of(&[NspId::FIRST])),
            associate(&d, Coalition::none())
        );
    }
}

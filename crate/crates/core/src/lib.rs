//! Base-station sharing in millimeter-wave cellular networks: a Monte Carlo
//! throughput simulator built on a weighted temporal-fair scheduler, and a
//! sequential-pricing duopoly solver for the sharing regimes it models.

// `!(x >= 0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod commands;
pub mod config;
pub mod duopoly;
pub mod error;
pub mod geometry;
pub mod scalar;
pub mod scheduler;
pub mod seeds;
pub mod simengine;
pub mod stats;
pub mod units;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use geometry::NspId;
pub use scalar::{Real, Scalar};

/// How the two providers treat each other's subscribers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SharingRegime {
    #[serde(rename = "none")]
    NoSharing,
    #[serde(rename = "equal")]
    EqualSharing,
    #[serde(rename = "weighted")]
    WeightedSharing,
}

impl SharingRegime {
    pub const ALL: [SharingRegime; 3] = [
        SharingRegime::NoSharing,
        SharingRegime::EqualSharing,
        SharingRegime::WeightedSharing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SharingRegime::NoSharing => "none",
            SharingRegime::EqualSharing => "equal",
            SharingRegime::WeightedSharing => "weighted",
        }
    }
}

impl fmt::Display for SharingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SharingRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SharingRegime::NoSharing),
            "equal" => Ok(SharingRegime::EqualSharing),
            "weighted" => Ok(SharingRegime::WeightedSharing),
            other => Err(Error::invalid("regime", format!("expected none, equal or weighted, got `{other}`"))),
        }
    }
}

pub type Market = duopoly::MarketParams<f64>;
pub type ExactMarket = duopoly::MarketParams<num_rational::Rational64>;
pub type Scheduler = scheduler::SchedulerState<f64>;
pub type Antenna = channel::AntennaPattern<f64>;
pub type Channel = channel::ChannelParams<f64>;
pub type Rate = channel::RateConfig<f64>;

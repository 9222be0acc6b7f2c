//! Sound output boxes for a network over an input box.

pub mod ibp;
pub mod linear;
pub mod relax;

pub use ibp::propagate_ibp;
pub use linear::{concretize, propagate_linear, AffineBounds};
pub use relax::{relax_activation, RelaxMode, Relaxation};

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    Ibp,
    FastLin,
    Crown,
}

impl Propagator {
    pub const ALL: [Propagator; 3] = [Propagator::Ibp, Propagator::FastLin, Propagator::Crown];

    pub fn name(self) -> &'static str {
        match self {
            Propagator::Ibp => "ibp",
            Propagator::FastLin => "fastlin",
            Propagator::Crown => "crown",
        }
    }

    pub fn propagate(self, net: &Network, input: &IntervalBox) -> Result<IntervalBox> {
        match self {
            Propagator::Ibp => propagate_ibp(net, input),
            Propagator::FastLin => propagate_linear(net, input, RelaxMode::FastLin).map(|r| r.1),
            Propagator::Crown => propagate_linear(net, input, RelaxMode::Crown).map(|r| r.1),
        }
    }
}

impl std::fmt::Display for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Propagator {
    type Err = ReachError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ibp" => Ok(Propagator::Ibp),
            "fastlin" => Ok(Propagator::FastLin),
            "crown" => Ok(Propagator::Crown),
            other => Err(ReachError::InvalidArgument(format!("unknown propagator {other:?}"))),
        }
    }
}

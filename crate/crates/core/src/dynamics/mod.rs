//! Post transmission, algorithmic distribution, attraction/repulsion and
//! rewiring.
//!
//! One iteration: a random user meets a random post value `θ`, decides
//! whether to post it, the platform picks which neighbors see it, each
//! receiver is attracted towards or repulsed away from `θ` by a fixed step,
//! and repulsed receivers may drop the poster for a random non-neighbor.

mod engine;
mod functions;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use engine::{run, run_until, Checkpoint, RewireEvent, RunTrace, Simulation, StepEvents};
pub use functions::{
    apply_opinion_update, attraction_prob, distribution_prob, rewire_prob, transmission_prob,
    unclamped_update,
};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Per-user posting behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransmissionFn {
    /// Posts content that is either very close to or very far from their own
    /// opinion.
    Polarized,
    /// Posts only agreeable content.
    Similar,
    /// Posts everything.
    Uniform,
}

impl TransmissionFn {
    pub const ALL: [TransmissionFn; 3] = [
        TransmissionFn::Polarized,
        TransmissionFn::Similar,
        TransmissionFn::Uniform,
    ];
}

/// Population-level transmission setting. `Mixed` gives every user one of
/// the three behaviors at random, fixed for the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransmissionKind {
    Polarized,
    Similar,
    Uniform,
    Mixed,
}

impl TransmissionKind {
    pub const ALL: [TransmissionKind; 4] = [
        TransmissionKind::Polarized,
        TransmissionKind::Similar,
        TransmissionKind::Uniform,
        TransmissionKind::Mixed,
    ];

    /// Behavior shared by every user, or `None` for `Mixed`.
    pub fn uniform_behavior(self) -> Option<TransmissionFn> {
        match self {
            TransmissionKind::Polarized => Some(TransmissionFn::Polarized),
            TransmissionKind::Similar => Some(TransmissionFn::Similar),
            TransmissionKind::Uniform => Some(TransmissionFn::Uniform),
            TransmissionKind::Mixed => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TransmissionKind::Polarized => "pol",
            TransmissionKind::Similar => "sim",
            TransmissionKind::Uniform => "uni",
            TransmissionKind::Mixed => "all",
        }
    }
}

impl fmt::Display for TransmissionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TransmissionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pol" => Ok(TransmissionKind::Polarized),
            "sim" => Ok(TransmissionKind::Similar),
            "uni" => Ok(TransmissionKind::Uniform),
            "all" => Ok(TransmissionKind::Mixed),
            other => Err(Error::param(format!(
                "unknown transmission '{other}' (expected pol|sim|uni|all)"
            ))),
        }
    }
}

/// How the platform chooses which neighbors see a post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistributionKind {
    /// `cos²(xπ/2 + φ)`.
    Steep,
    /// `cos²(xπ/4 + φ)`, half the angular rate of `Steep`.
    Smooth,
    /// Every neighbor sees every post.
    Uniform,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 3] = [
        DistributionKind::Steep,
        DistributionKind::Smooth,
        DistributionKind::Uniform,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DistributionKind::Steep => "d1",
            DistributionKind::Smooth => "d2",
            DistributionKind::Uniform => "d3",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d1" => Ok(DistributionKind::Steep),
            "d2" => Ok(DistributionKind::Smooth),
            "d3" => Ok(DistributionKind::Uniform),
            other => Err(Error::param(format!(
                "unknown distribution '{other}' (expected d1|d2|d3)"
            ))),
        }
    }
}

/// Phase shift `φ` of the distribution functions.
///
/// Both cosine-squared distribution functions have period π in `φ`, so the
/// phase is stored as a 32-bit fixed-point fraction of π. `φ` and `φ + π`
/// map to the same fraction, which makes runs at the two phases identical
/// bit for bit rather than merely close. The resolution is about 7e-10 rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    radians: f64,
    fraction: u32,
}

impl Phase {
    const SCALE: f64 = 4_294_967_296.0; // 2^32

    pub fn new(radians: f64) -> Self {
        assert!(radians.is_finite(), "phase {radians} is not finite");
        let turns = radians / PI;
        let frac = turns - turns.floor();
        let fraction = ((frac * Self::SCALE).round() as u64 % (1u64 << 32)) as u32;
        Phase { radians, fraction }
    }

    /// The value supplied by the caller.
    pub fn radians(self) -> f64 {
        self.radians
    }

    /// Representative in `[0, π)` actually used by the distribution
    /// functions.
    pub fn reduced(self) -> f64 {
        f64::from(self.fraction) / Self::SCALE * PI
    }
}

impl From<f64> for Phase {
    fn from(radians: f64) -> Self {
        Phase::new(radians)
    }
}

/// Default opinion step.
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub transmission: TransmissionKind,
    pub distribution: DistributionKind,
    pub phi: Phase,
    pub delta: f64,
    pub rewiring: bool,
    pub iterations: u64,
    pub checkpoint_interval: u64,
    pub seed: u64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            transmission: TransmissionKind::Uniform,
            distribution: DistributionKind::Uniform,
            phi: Phase::new(0.0),
            delta: DEFAULT_DELTA,
            rewiring: false,
            iterations: 1_000_000,
            checkpoint_interval: 100_000,
            seed: 0,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 2.0) {
            return Err(Error::param(format!("delta {} outside (0, 2]", self.delta)));
        }
        if self.checkpoint_interval == 0 {
            return Err(Error::param("checkpoint interval must be positive"));
        }
        Ok(())
    }
}

/// Opinions in `[-1, 1]` and, for mixed transmission, each user's fixed
/// posting behavior.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState {
    opinions: Vec<f64>,
    behaviors: Option<Vec<TransmissionFn>>,
}

impl OpinionState {
    pub fn new(opinions: Vec<f64>) -> Result<Self> {
        if let Some((i, b)) = opinions
            .iter()
            .enumerate()
            .find(|(_, b)| !(-1.0..=1.0).contains(*b))
        {
            return Err(Error::Validation(format!(
                "opinion {b} of node {i} outside [-1, 1]"
            )));
        }
        Ok(OpinionState {
            opinions,
            behaviors: None,
        })
    }

    pub fn with_behaviors(mut self, behaviors: Vec<TransmissionFn>) -> Result<Self> {
        if behaviors.len() != self.opinions.len() {
            return Err(Error::Validation(format!(
                "{} behaviors for {} nodes",
                behaviors.len(),
                self.opinions.len()
            )));
        }
        self.behaviors = Some(behaviors);
        Ok(self)
    }

    /// Uniform random opinions on `[-1, 1]`, plus random behaviors when
    /// `transmission` is mixed.
    pub fn random(n: usize, transmission: TransmissionKind, rng: &mut SimRng) -> Self {
        let opinions = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let behaviors = (transmission == TransmissionKind::Mixed).then(|| assign_behaviors(n, rng));
        OpinionState {
            opinions,
            behaviors,
        }
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    pub fn opinions(&self) -> &[f64] {
        &self.opinions
    }

    pub fn behaviors(&self) -> Option<&[TransmissionFn]> {
        self.behaviors.as_deref()
    }

    pub(crate) fn opinions_mut(&mut self) -> &mut [f64] {
        &mut self.opinions
    }
}

/// Independent uniform choice among the three behaviors for each of `n`
/// users.
pub fn assign_behaviors(n: usize, rng: &mut SimRng) -> Vec<TransmissionFn> {
    (0..n)
        .map(|_| TransmissionFn::ALL[rng.gen_range(0..TransmissionFn::ALL.len())])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn phase_reduction_is_exact_under_half_turn_shift() {
        for k in 0..1000 {
            let phi = k as f64 * 0.0063;
            assert_eq!(
                Phase::new(phi).reduced(),
                Phase::new(phi + PI).reduced(),
                "{phi}"
            );
        }
        assert_eq!(Phase::new(0.0).reduced(), Phase::new(PI).reduced());
        assert!(Phase::new(-0.5).reduced() > 0.0);
    }

    #[test]
    fn phase_keeps_supplied_value() {
        assert_eq!(Phase::new(4.0).radians(), 4.0);
        assert!((Phase::new(4.0).reduced() - (4.0 - PI)).abs() < 1e-9);
    }

    #[test]
    fn labels_round_trip() {
        for t in TransmissionKind::ALL {
            assert_eq!(t.label().parse::<TransmissionKind>().unwrap(), t);
        }
        for d in DistributionKind::ALL {
            assert_eq!(d.label().parse::<DistributionKind>().unwrap(), d);
        }
        assert!("d4".parse::<DistributionKind>().is_err());
    }

    #[test]
    fn behaviors_are_roughly_equal_thirds() {
        let n = 30_000;
        let b = assign_behaviors(n, &mut seeded(3));
        for f in TransmissionFn::ALL {
            let share = b.iter().filter(|&&x| x == f).count() as f64 / n as f64;
            assert!((share - 1.0 / 3.0).abs() < 0.01, "{f:?}: {share}");
        }
        assert_eq!(assign_behaviors(1, &mut seeded(0)).len(), 1);
        assert_eq!(
            assign_behaviors(50, &mut seeded(8)),
            assign_behaviors(50, &mut seeded(8))
        );
    }

    #[test]
    fn opinion_state_validates_range() {
        assert!(OpinionState::new(vec![0.0, 1.0, -1.0]).is_ok());
        assert!(OpinionState::new(vec![1.5]).is_err());
        let s = OpinionState::new(vec![0.0; 2]).unwrap();
        assert!(s.with_behaviors(vec![TransmissionFn::Uniform]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(DynamicsConfig::default().validate().is_ok());
        let bad = DynamicsConfig {
            delta: 0.0,
            ..DynamicsConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = DynamicsConfig {
            checkpoint_interval: 0,
            ..DynamicsConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}

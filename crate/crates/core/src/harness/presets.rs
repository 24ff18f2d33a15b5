//! Named experiment suites on desk-scale networks (about 1000 nodes).

use std::fmt;
use std::str::FromStr;

use super::{phi_grid, SteadyStateRule, SweepSpec};
use crate::dynamics::{DistributionKind, DynamicsConfig, TransmissionKind};
use crate::error::{Error, Result};
use crate::graph::{GeneratorKind, GeneratorSpec, LfrParams};

/// Replicates per configuration point unless a preset says otherwise.
pub const DEFAULT_REPLICATES: usize = 10;

/// Phase used by the selected-phase presets.
pub const SELECTED_PHI: f64 = 1.473;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// All transmissions × {steep, smooth} distributions over 33 phases in
    /// `[0, 2π]`, with rewiring.
    PhiSweepRewiring,
    /// Same grid without rewiring.
    PhiSweep,
    /// Uniform distribution, every transmission, with rewiring.
    NullDistributionRewiring,
    /// Uniform distribution, every transmission, no rewiring.
    NullDistribution,
    /// Uniform transmission, {steep, smooth} over 33 phases, no rewiring.
    UniformTransmission,
    /// Lattice, RRG, power-law configuration model, LFR and ER at two mean
    /// degrees, phases 0 and 1.473, no rewiring.
    TopologyComparison,
    /// Two weakly linked communities, uniform transmission, smooth
    /// distribution at φ = 1.47, no rewiring, 50 replicates.
    SbmBistable,
    /// Polarized transmission with the smooth distribution at φ = 1.473 and
    /// no rewiring, run for a fixed 10⁷ iterations to record the transient.
    Transient,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::PhiSweepRewiring,
        Preset::PhiSweep,
        Preset::NullDistributionRewiring,
        Preset::NullDistribution,
        Preset::UniformTransmission,
        Preset::TopologyComparison,
        Preset::SbmBistable,
        Preset::Transient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PhiSweepRewiring => "phi-sweep-rewiring",
            Preset::PhiSweep => "phi-sweep",
            Preset::NullDistributionRewiring => "null-distribution-rewiring",
            Preset::NullDistribution => "null-distribution",
            Preset::UniformTransmission => "uniform-transmission",
            Preset::TopologyComparison => "topology-comparison",
            Preset::SbmBistable => "sbm-bistable",
            Preset::Transient => "transient",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::param(format!(
                    "unknown preset '{s}'; available: {}",
                    names.join(", ")
                ))
            })
    }
}

fn er_1000() -> GeneratorSpec {
    GeneratorSpec::er(1000, 8.0)
}

fn template(rewiring: bool) -> DynamicsConfig {
    DynamicsConfig {
        rewiring,
        ..DynamicsConfig::default()
    }
}

fn grid(
    name: &str,
    generators: Vec<GeneratorSpec>,
    transmissions: &[TransmissionKind],
    distributions: &[DistributionKind],
    phi_values: Vec<f64>,
    rewiring: bool,
) -> SweepSpec {
    SweepSpec {
        name: name.to_string(),
        generators,
        transmissions: transmissions.to_vec(),
        distributions: distributions.to_vec(),
        template: template(rewiring),
        phi_values,
        replicates: DEFAULT_REPLICATES,
        seed_base: 0,
        steady_state: Some(SteadyStateRule::default()),
    }
}

fn full_phi_grid() -> Vec<f64> {
    phi_grid(0.0, std::f64::consts::TAU, 33)
}

const COSINE_DISTRIBUTIONS: [DistributionKind; 2] =
    [DistributionKind::Steep, DistributionKind::Smooth];

fn topology_generators() -> Vec<GeneratorSpec> {
    let mut out = vec![GeneratorSpec::new(GeneratorKind::Lattice2d { side: 32 })];
    for (avg, k_min) in [(4.0, 2), (8.0, 4)] {
        out.push(GeneratorSpec::er(1000, avg));
        out.push(GeneratorSpec::new(GeneratorKind::RandomRegular {
            n: 1000,
            k: avg as usize,
        }));
        out.push(GeneratorSpec::new(GeneratorKind::PowerLawConfig {
            n: 1000,
            gamma: 2.2,
            k_min,
            k_max: 40,
        }));
        out.push(GeneratorSpec::new(GeneratorKind::Lfr(LfrParams {
            avg_degree: avg,
            ..LfrParams::default()
        })));
    }
    out.into_iter()
        .map(GeneratorSpec::with_largest_component)
        .collect()
}

pub fn preset_experiment(preset: Preset) -> SweepSpec {
    use TransmissionKind as T;
    let all = &T::ALL;
    let name = preset.name();
    match preset {
        Preset::PhiSweepRewiring => grid(
            name,
            vec![er_1000()],
            all,
            &COSINE_DISTRIBUTIONS,
            full_phi_grid(),
            true,
        ),
        Preset::PhiSweep => grid(
            name,
            vec![er_1000()],
            all,
            &COSINE_DISTRIBUTIONS,
            full_phi_grid(),
            false,
        ),
        Preset::NullDistributionRewiring => grid(
            name,
            vec![er_1000()],
            all,
            &[DistributionKind::Uniform],
            vec![0.0],
            true,
        ),
        Preset::NullDistribution => grid(
            name,
            vec![er_1000()],
            all,
            &[DistributionKind::Uniform],
            vec![0.0],
            false,
        ),
        Preset::UniformTransmission => grid(
            name,
            vec![er_1000()],
            &[T::Uniform],
            &COSINE_DISTRIBUTIONS,
            full_phi_grid(),
            false,
        ),
        Preset::TopologyComparison => grid(
            name,
            topology_generators(),
            all,
            &COSINE_DISTRIBUTIONS,
            vec![0.0, SELECTED_PHI],
            false,
        ),
        Preset::SbmBistable => {
            let sbm = GeneratorSpec::new(GeneratorKind::StochasticBlock {
                sizes: vec![500, 500],
                p_in: 8.0 / 499.0,
                p_out: 8e-5,
            });
            SweepSpec {
                replicates: 50,
                ..grid(
                    name,
                    vec![sbm],
                    &[T::Uniform],
                    &[DistributionKind::Smooth],
                    vec![1.47],
                    false,
                )
            }
        }
        Preset::Transient => SweepSpec {
            template: DynamicsConfig {
                iterations: 10_000_000,
                checkpoint_interval: 100_000,
                ..template(false)
            },
            steady_state: None,
            ..grid(
                name,
                vec![er_1000()],
                &[T::Polarized],
                &[DistributionKind::Smooth],
                vec![SELECTED_PHI],
                false,
            )
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse_back() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        let err = "nope".parse::<Preset>().unwrap_err().to_string();
        assert!(err.contains("sbm-bistable"), "{err}");
    }

    #[test]
    fn sbm_bistable_matches_reference_setup() {
        let s = preset_experiment(Preset::SbmBistable);
        assert_eq!(s.replicates, 50);
        assert_eq!(s.transmissions, vec![TransmissionKind::Uniform]);
        assert_eq!(s.distributions, vec![DistributionKind::Smooth]);
        assert_eq!(s.phi_values, vec![1.47]);
        assert!(!s.template.rewiring);
        match &s.generators[0].kind {
            GeneratorKind::StochasticBlock { sizes, p_out, .. } => {
                assert_eq!(sizes, &vec![500, 500]);
                assert_eq!(*p_out, 8e-5);
            }
            other => panic!("unexpected generator {other:?}"),
        }
        assert_eq!(s.run_count(), 50);
    }

    #[test]
    fn null_distribution_rewiring_grid() {
        let s = preset_experiment(Preset::NullDistributionRewiring);
        assert_eq!(s.transmissions.len(), 4);
        assert_eq!(s.distributions, vec![DistributionKind::Uniform]);
        assert!(s.template.rewiring);
    }

    #[test]
    fn phi_sweep_rewiring_grid() {
        let s = preset_experiment(Preset::PhiSweepRewiring);
        assert_eq!(s.phi_values.len(), 33);
        assert_eq!(s.phi_values[0], 0.0);
        assert_eq!(*s.phi_values.last().unwrap(), std::f64::consts::TAU);
        assert_eq!(s.transmissions.len(), 4);
        assert_eq!(s.distributions, COSINE_DISTRIBUTIONS.to_vec());
        assert!(s.template.rewiring);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn every_preset_validates() {
        for p in Preset::ALL {
            preset_experiment(p).validate().unwrap();
        }
    }
}

//! Built-in scenario catalog.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridChart;
use crate::spacelike::{
    from_graph, homogeneous_flat, homogeneous_hyperbolic, AnyState, SpacelikeState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FlatTorus,
    GraphTorus,
    HyperbolicForm,
    FlatForm,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::FlatTorus,
        ScenarioKind::GraphTorus,
        ScenarioKind::HyperbolicForm,
        ScenarioKind::FlatForm,
        ScenarioKind::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::FlatTorus => "flat_torus",
            ScenarioKind::GraphTorus => "graph_torus",
            ScenarioKind::HyperbolicForm => "hyperbolic_form",
            ScenarioKind::FlatForm => "flat_form",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scenario '{s}'")))
    }
}

/// One Fourier mode `a · cos(kx·x + ky·y + phase)` of a custom graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphMode {
    pub amplitude: f64,
    pub kx: i32,
    pub ky: i32,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: ScenarioKind,
    /// Graph amplitude (graph_torus).
    pub amplitude: f64,
    /// Graph wave number (graph_torus).
    pub frequency: u32,
    /// Nodes per axis for grid scenarios.
    pub grid: usize,
    /// Dimension of homogeneous forms.
    pub n: usize,
    pub phi0: f64,
    pub base_volume: f64,
    pub base_euler: i64,
    /// Modes of a custom graph; drawn from `seed` when empty.
    pub modes: Vec<GraphMode>,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self::defaults(ScenarioKind::GraphTorus)
    }
}

impl ScenarioSpec {
    pub fn defaults(name: ScenarioKind) -> Self {
        let mut spec = Self {
            name,
            amplitude: 0.2,
            frequency: 1,
            grid: 64,
            n: 2,
            phi0: 1.0,
            // genus-2 surface: area = −2πχ
            base_volume: 4.0 * PI,
            base_euler: -2,
            modes: Vec::new(),
            seed: 0,
        };
        match name {
            ScenarioKind::FlatTorus => spec.amplitude = 0.0,
            ScenarioKind::FlatForm => {
                spec.base_volume = TAU * TAU;
                spec.base_euler = 0;
            }
            _ => {}
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        match self.name {
            ScenarioKind::GraphTorus => {
                let slope = self.amplitude.abs() * self.frequency as f64;
                if !(slope < 1.0) {
                    return Err(Error::NotSpacelike {
                        max_gradient: slope,
                    });
                }
            }
            ScenarioKind::HyperbolicForm | ScenarioKind::FlatForm => {
                if self.n == 0 || !self.n.is_multiple_of(2) {
                    return Err(Error::OddDimension(self.n));
                }
            }
            ScenarioKind::Custom => {
                let slope: f64 = self
                    .modes
                    .iter()
                    .map(|m| m.amplitude.abs() * ((m.kx * m.kx + m.ky * m.ky) as f64).sqrt())
                    .sum();
                if !(slope < 1.0) {
                    return Err(Error::NotSpacelike {
                        max_gradient: slope,
                    });
                }
            }
            ScenarioKind::FlatTorus => {}
        }
        Ok(())
    }

    /// Modes used by a custom graph: the explicit list, or three seeded random modes.
    pub fn graph_modes(&self) -> Vec<GraphMode> {
        if !self.modes.is_empty() {
            return self.modes.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..3)
            .map(|_| {
                let kx = rng.gen_range(-2..=2);
                let ky = rng.gen_range(1..=2);
                let k = ((kx * kx + ky * ky) as f64).sqrt();
                GraphMode {
                    // total slope below 0.45
                    amplitude: rng.gen_range(0.05..0.15) / k,
                    kx,
                    ky,
                    phase: rng.gen_range(0.0..TAU),
                }
            })
            .collect()
    }

    pub fn build(&self) -> Result<AnyState> {
        self.validate()?;
        Ok(match self.name {
            ScenarioKind::FlatTorus => {
                AnyState::Grid(SpacelikeState::flat(GridChart::torus(self.grid)?))
            }
            ScenarioKind::GraphTorus => {
                let grid = GridChart::torus(self.grid)?;
                let (a, f) = (self.amplitude, self.frequency as f64);
                let u = ScalarField::new(grid.sample(|x, y| a * (f * x).sin() * (f * y).sin()));
                AnyState::Grid(from_graph(&grid, &u)?)
            }
            ScenarioKind::Custom => {
                let grid = GridChart::torus(self.grid)?;
                let modes = self.graph_modes();
                let u = ScalarField::new(grid.sample(|x, y| {
                    modes
                        .iter()
                        .map(|m| m.amplitude * (m.kx as f64 * x + m.ky as f64 * y + m.phase).cos())
                        .sum()
                }));
                AnyState::Grid(from_graph(&grid, &u)?)
            }
            ScenarioKind::HyperbolicForm => AnyState::Homogeneous(homogeneous_hyperbolic(
                self.n,
                self.phi0,
                self.base_volume,
                self.base_euler,
            )?),
            ScenarioKind::FlatForm => {
                AnyState::Homogeneous(homogeneous_flat(self.n, self.phi0, self.base_volume)?)
            }
        })
    }
}

pub fn catalog_list() -> Vec<ScenarioSpec> {
    ScenarioKind::ALL
        .into_iter()
        .map(ScenarioSpec::defaults)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_defaults() {
        let cat = catalog_list();
        for name in ["flat_torus", "graph_torus", "hyperbolic_form", "flat_form"] {
            assert!(cat.iter().any(|s| s.name.as_str() == name));
        }
        let g = ScenarioSpec::defaults(ScenarioKind::GraphTorus);
        assert_eq!((g.amplitude, g.frequency, g.grid), (0.2, 1, 64));
        let h = ScenarioSpec::defaults(ScenarioKind::HyperbolicForm);
        assert_eq!((h.n, h.phi0, h.base_euler), (2, 1.0, -2));
        assert!((h.base_volume - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn every_default_builds() {
        for spec in catalog_list() {
            spec.build().unwrap();
        }
    }

    #[test]
    fn steep_graph_is_rejected_before_sampling() {
        let mut s = ScenarioSpec::defaults(ScenarioKind::GraphTorus);
        s.amplitude = 0.6;
        s.frequency = 2;
        assert!(matches!(s.build(), Err(Error::NotSpacelike { .. })));
    }

    #[test]
    fn seeded_modes_are_reproducible_and_spacelike() {
        let mut s = ScenarioSpec::defaults(ScenarioKind::Custom);
        s.seed = 7;
        assert_eq!(s.graph_modes(), s.graph_modes());
        s.modes = s.graph_modes();
        s.validate().unwrap();
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "flat_form".parse::<ScenarioKind>().unwrap(),
            ScenarioKind::FlatForm
        );
        assert!("sphere".parse::<ScenarioKind>().is_err());
    }
}

//! Finite test families standing in for the harmonic and subharmonic
//! classes. A family is fully determined by its descriptor, the reference
//! ball and the dimension, so results are reproducible from a scenario file.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{harmonic_poly_basis, point_potential, truncate, TestFunction};
use crate::error::{Error, Result};
use crate::geom::{Ball, Point};
use crate::measure::DiscreteCharge;

/// Poles closer than this to an atom are moved.
pub const POLE_CLEARANCE: f64 = 1e-6;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Closed under negation; balayage becomes equality of integrals.
    Harmonic,
    Subharmonic,
}

/// Versioned recipe for a test family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescriptor {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default = "default_degree")]
    pub harmonic_degree: usize,
    /// Explicit poles; when empty, `potential_count` poles are drawn.
    #[serde(default)]
    pub potential_poles: Vec<Point>,
    #[serde(default = "default_potential_count")]
    pub potential_count: usize,
    #[serde(default = "default_truncations")]
    pub truncations: Vec<f64>,
    #[serde(default = "default_max_combos")]
    pub max_combos: usize,
    #[serde(default)]
    pub smooth_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_version() -> u32 {
    1
}
fn default_degree() -> usize {
    6
}
fn default_potential_count() -> usize {
    20
}
fn default_truncations() -> Vec<f64> {
    vec![5.0, 10.0, 20.0, 40.0]
}
fn default_max_combos() -> usize {
    10
}

impl Default for FamilyDescriptor {
    fn default() -> Self {
        FamilyDescriptor {
            version: default_version(),
            harmonic_degree: default_degree(),
            potential_poles: Vec::new(),
            potential_count: default_potential_count(),
            truncations: default_truncations(),
            max_combos: default_max_combos(),
            smooth_samples: 0,
            seed: 0,
        }
    }
}

impl FamilyDescriptor {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Family {
    pub kind: FamilyKind,
    pub descriptor: FamilyDescriptor,
    members: Vec<TestFunction>,
}

impl Family {
    /// Harmonic basis members and their negations, interleaved.
    pub fn harmonic(d: usize, degree: usize) -> Result<Family> {
        let basis = harmonic_poly_basis(d, degree)?;
        let mut members = Vec::with_capacity(2 * basis.len());
        for p in basis.members {
            let h = TestFunction::HarmonicPoly { poly: p };
            members.push(TestFunction::negate(h.clone())?);
            members.insert(members.len() - 1, h);
        }
        Ok(Family {
            kind: FamilyKind::Harmonic,
            descriptor: FamilyDescriptor {
                harmonic_degree: degree,
                potential_count: 0,
                truncations: Vec::new(),
                max_combos: 0,
                ..FamilyDescriptor::default()
            },
            members,
        })
    }

    /// The default subharmonic family over `domain`: harmonic basis members
    /// (without negations), truncated point potentials with poles from a
    /// shifted Halton sequence in the ball, maxima of random harmonic pairs,
    /// and optional smooth samples. Poles are kept [`POLE_CLEARANCE`] away
    /// from the atoms of every charge in `avoid`.
    pub fn subharmonic(
        desc: &FamilyDescriptor,
        domain: &Ball,
        avoid: &[&DiscreteCharge],
    ) -> Result<Family> {
        let d = domain.dim();
        let basis = harmonic_poly_basis(d, desc.harmonic_degree)?;
        let mut rng = ChaCha8Rng::seed_from_u64(desc.seed);
        let mut members: Vec<TestFunction> = basis
            .members
            .iter()
            .map(|p| TestFunction::HarmonicPoly { poly: p.clone() })
            .collect();

        let poles = if desc.potential_poles.is_empty() {
            halton_ball_points(domain, desc.potential_count, &mut rng)
        } else {
            if let Some(bad) = desc.potential_poles.iter().find(|p| p.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.dim(),
                });
            }
            desc.potential_poles.clone()
        };
        for pole in poles {
            let pole = clear_of_atoms(pole, avoid);
            for &m in &desc.truncations {
                members.push(truncate(point_potential(pole.clone()), m)?);
            }
        }

        let non_constant = basis.len().saturating_sub(1);
        if non_constant >= 2 {
            for _ in 0..desc.max_combos {
                let i = 1 + rng.random_range(0..non_constant);
                let mut j = 1 + rng.random_range(0..non_constant - 1);
                if j >= i {
                    j += 1;
                }
                members.push(TestFunction::max_of(vec![
                    TestFunction::HarmonicPoly {
                        poly: basis.members[i].clone(),
                    },
                    TestFunction::HarmonicPoly {
                        poly: basis.members[j].clone(),
                    },
                ])?);
            }
        }

        for center in halton_ball_points(domain, desc.smooth_samples, &mut rng) {
            members.push(TestFunction::smooth_sbh(center, 1.0)?);
        }

        Ok(Family {
            kind: FamilyKind::Subharmonic,
            descriptor: desc.clone(),
            members,
        })
    }

    pub fn from_members(kind: FamilyKind, members: Vec<TestFunction>) -> Family {
        Family {
            kind,
            descriptor: FamilyDescriptor {
                potential_count: 0,
                truncations: Vec::new(),
                max_combos: 0,
                ..FamilyDescriptor::default()
            },
            members,
        }
    }

    pub fn members(&self) -> &[TestFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members at `indices`, in the given order.
    pub fn subfamily(&self, indices: &[usize]) -> Family {
        Family {
            kind: self.kind,
            descriptor: self.descriptor.clone(),
            members: indices.iter().map(|&i| self.members[i].clone()).collect(),
        }
    }

    pub fn push(&mut self, f: TestFunction) {
        self.members.push(f);
    }

    /// Whether the family contains a function equal to `c` everywhere.
    pub fn has_constant(&self, c: f64) -> bool {
        let origin = self.members.first().map(|_| ());
        origin.is_some()
            && self.members.iter().any(|f| match f {
                TestFunction::Constant { value } => *value == c,
                TestFunction::HarmonicPoly { poly } => {
                    poly.degree() == 0 && poly.terms.iter().map(|(_, k)| k).sum::<f64>() == c
                }
                TestFunction::Negation { inner } => match inner.as_ref() {
                    TestFunction::Constant { value } => -*value == c,
                    TestFunction::HarmonicPoly { poly } => {
                        poly.degree() == 0 && -poly.terms.iter().map(|(_, k)| k).sum::<f64>() == c
                    }
                    _ => false,
                },
                _ => false,
            })
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Halton points with a random (Cranley-Patterson) shift, mapped to the
/// bounding cube of `ball` and kept when they fall inside it.
fn halton_ball_points(ball: &Ball, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let d = ball.dim();
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let coords: Vec<f64> = (0..d)
            .map(|k| {
                let u = (radical_inverse(i, PRIMES[k % PRIMES.len()]) + shift[k]).fract();
                ball.center[k] + ball.radius * (2.0 * u - 1.0)
            })
            .collect();
        let p = Point::from(coords);
        if p.dist(&ball.center) < ball.radius {
            out.push(p);
        }
        i += 1;
    }
    out
}

fn clear_of_atoms(mut pole: Point, avoid: &[&DiscreteCharge]) -> Point {
    let too_close = |q: &Point| {
        avoid
            .iter()
            .flat_map(|m| m.atoms())
            .any(|a| a.point.dist(q) < POLE_CLEARANCE)
    };
    let mut step = 0;
    while too_close(&pole) {
        step += 1;
        let k = step % pole.dim();
        pole.coords_mut()[k] += 2.0 * POLE_CLEARANCE;
    }
    pole
}

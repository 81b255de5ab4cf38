//! Scenario files: parsing, name resolution and charge builders.

use std::collections::BTreeMap;

use balayage_core::construct::{harmonic_measure_ball, jensen_mixture};
use balayage_core::lyons::{build_example5, LyonsFixture};
use balayage_core::{Ball, DiscreteCharge, FamilyDescriptor, Point, SetExpr};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub dimension: usize,
    pub domain: SetExpr,
    #[serde(default)]
    pub charges: BTreeMap<String, ChargeSpec>,
    #[serde(default)]
    pub family: FamilyDescriptor,
    pub task: Task,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Slack for subharmonic checks, and for harmonic ones unless overridden.
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub harmonic: Option<f64>,
}

fn default_eps() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps: default_eps(),
            harmonic: None,
        }
    }
}

impl Tolerances {
    pub fn for_family(&self, kind: FamilyChoice) -> f64 {
        match kind {
            FamilyChoice::Subharmonic => self.eps,
            FamilyChoice::Harmonic => self.harmonic.unwrap_or(self.eps),
        }
    }
}

/// A literal charge or a recipe producing one.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ChargeSpec {
    Build {
        build: Builder,
    },
    Literal(DiscreteCharge),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builder {
    Dirac {
        point: Point,
    },
    HarmonicMeasure {
        center: Point,
        radius: f64,
        x: Point,
        n: usize,
    },
    JensenMixture {
        a: f64,
        b: f64,
        center: Point,
        radius: f64,
        x: Point,
        n: usize,
    },
    Example5 {
        part: Example5Part,
        level: usize,
        #[serde(default)]
        fixture: Option<LyonsFixture>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example5Part {
    Theta,
    Mu,
    MuE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    #[default]
    Subharmonic,
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Check {
        theta: String,
        mu: String,
        #[serde(default)]
        family: FamilyChoice,
    },
    Jensen {
        measure: String,
        point: Point,
    },
    #[serde(rename = "as")]
    ArensSinger {
        measure: String,
        point: Point,
        #[serde(default)]
        degree: Option<usize>,
    },
    Construct {
        construction: Construction,
        #[serde(default)]
        verify: Option<Verify>,
    },
    Hull {
        k: SetExpr,
        h: f64,
        #[serde(default)]
        o_big: Option<SetExpr>,
        #[serde(default)]
        expected_components: Option<usize>,
    },
    Lyons {
        #[serde(default = "LyonsFixture::standard")]
        fixture: LyonsFixture,
        #[serde(default = "default_lyons_level")]
        level: usize,
        #[serde(default = "default_lyons_degree")]
        harmonic_degree: usize,
        #[serde(default = "default_sweep_levels")]
        sweep_levels: Vec<f64>,
    },
    Riesz {
        pole: Point,
        half_width: f64,
        h: f64,
        radius: f64,
        /// The potential is replaced by `max(u, -truncation)` so grid nodes
        /// on the pole stay finite.
        #[serde(default = "default_riesz_truncation")]
        truncation: f64,
        #[serde(default = "default_riesz_expected")]
        expected: f64,
        #[serde(default = "default_riesz_rel_tol")]
        rel_tol: f64,
    },
    Masses {
        theta: String,
        mu: String,
        #[serde(default)]
        family: FamilyChoice,
    },
}

fn default_lyons_level() -> usize {
    128
}
fn default_lyons_degree() -> usize {
    8
}
fn default_sweep_levels() -> Vec<f64> {
    (1..=10).map(|k| 5.0 * k as f64).collect()
}
fn default_riesz_truncation() -> f64 {
    20.0
}
fn default_riesz_expected() -> f64 {
    1.0
}
fn default_riesz_rel_tol() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construction {
    Convolution {
        mu: String,
        iota0: String,
    },
    /// Integral of the parallel shifts of `iota0` against `mu`.
    ParallelShift {
        mu: String,
        iota0: String,
    },
    Smooth {
        mu: String,
        radius: f64,
        level: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verify {
    pub theta: String,
    #[serde(default)]
    pub family: FamilyChoice,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Check { .. } => "check",
            Task::Jensen { .. } => "jensen",
            Task::ArensSinger { .. } => "as",
            Task::Construct { .. } => "construct",
            Task::Hull { .. } => "hull",
            Task::Lyons { .. } => "lyons",
            Task::Riesz { .. } => "riesz",
            Task::Masses { .. } => "masses",
        }
    }

    /// Charge names the task refers to.
    pub fn references(&self) -> Vec<&str> {
        match self {
            Task::Check { theta, mu, .. } | Task::Masses { theta, mu, .. } => vec![theta, mu],
            Task::Jensen { measure, .. } | Task::ArensSinger { measure, .. } => vec![measure],
            Task::Construct { construction, verify } => {
                let mut v: Vec<&str> = match construction {
                    Construction::Convolution { mu, iota0 } | Construction::ParallelShift { mu, iota0 } => {
                        vec![mu, iota0]
                    }
                    Construction::Smooth { mu, .. } => vec![mu],
                };
                if let Some(ver) = verify {
                    v.push(&ver.theta);
                }
                v
            }
            Task::Hull { .. } | Task::Lyons { .. } | Task::Riesz { .. } => Vec::new(),
        }
    }
}

/// 1-based line and column of the first occurrence of `needle`.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    match text.find(needle) {
        Some(at) => {
            let before = &text[..at];
            let line = before.matches('\n').count() + 1;
            let col = at - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, col)
        }
        None => (0, 0),
    }
}

impl Scenario {
    /// Parses and validates a scenario; `origin` labels diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Scenario, CliError> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| CliError::Schema {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let schema = |needle: &str, message: String| {
            let (line, column) = locate(text, needle);
            CliError::Schema {
                origin: origin.to_string(),
                line,
                column,
                message,
            }
        };
        if sc.dimension < 2 {
            return Err(schema("\"dimension\"", format!("dimension must be at least 2, got {}", sc.dimension)));
        }
        for name in sc.task.references() {
            if !sc.charges.contains_key(name) {
                return Err(schema(&format!("\"{name}\""), format!("unknown charge {name:?}")));
            }
        }
        for (name, spec) in &sc.charges {
            if let ChargeSpec::Literal(c) = spec {
                if c.dim() != sc.dimension {
                    return Err(schema(
                        &format!("\"{name}\""),
                        format!("charge {name:?} has dimension {}, scenario has {}", c.dim(), sc.dimension),
                    ));
                }
            }
        }
        if !(sc.tolerances.eps >= 0.0) || sc.tolerances.harmonic.is_some_and(|h| !(h >= 0.0)) {
            return Err(schema("\"tolerances\"", "tolerances must be non-negative".into()));
        }
        Ok(sc)
    }

    /// Builds the named charge.
    pub fn charge(&self, name: &str) -> Result<DiscreteCharge, CliError> {
        let spec = self
            .charges
            .get(name)
            .ok_or_else(|| CliError::Invalid(format!("unknown charge {name:?}")))?;
        let c = match spec {
            ChargeSpec::Literal(c) => c.clone(),
            ChargeSpec::Build { build } => build.build()?,
        };
        if c.dim() != self.dimension {
            return Err(CliError::Invalid(format!(
                "charge {name:?} has dimension {}, scenario has {}",
                c.dim(),
                self.dimension
            )));
        }
        Ok(c)
    }

    /// The family descriptor with the scenario seed applied.
    pub fn family_descriptor(&self) -> FamilyDescriptor {
        self.family.clone().with_seed(self.seed)
    }

    /// Ball from which family poles are drawn: the domain itself when it is
    /// a ball, otherwise the ball around its bounding box.
    pub fn pole_ball(&self) -> Result<Ball, CliError> {
        if let SetExpr::Ball(b) = &self.domain {
            return Ok(Ball::open(b.center.clone(), b.radius));
        }
        let (lo, hi) = self
            .domain
            .bounding_box()
            .ok_or_else(|| CliError::Invalid("domain is empty".into()))?;
        let c: Vec<f64> = lo.coords().iter().zip(hi.coords()).map(|(a, b)| 0.5 * (a + b)).collect();
        Ok(Ball::open(Point::new(&c), 0.5 * lo.dist(&hi)))
    }
}

impl Builder {
    pub fn build(&self) -> Result<DiscreteCharge, CliError> {
        Ok(match self {
            Builder::Dirac { point } => DiscreteCharge::dirac(point.clone())?,
            Builder::HarmonicMeasure { center, radius, x, n } => {
                harmonic_measure_ball(&Ball::new(center.clone(), *radius, false)?, x, *n)?
            }
            Builder::JensenMixture {
                a,
                b,
                center,
                radius,
                x,
                n,
            } => jensen_mixture(*a, x, *b, &Ball::new(center.clone(), *radius, false)?, *n)?,
            Builder::Example5 { part, level, fixture } => {
                let f = fixture.clone().unwrap_or_else(LyonsFixture::standard);
                let ex = build_example5(&f, *level)?;
                match part {
                    Example5Part::Theta => ex.theta,
                    Example5Part::Mu => ex.mu,
                    Example5Part::MuE => ex.mu_e,
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "dimension": 2,
  "domain": {"ball": {"center": [0, 0], "radius": 1}},
  "charges": {"a": {"d": 2, "atoms": [{"p": [0, 0], "w": 1}]}},
  "task": {"kind": "check", "theta": "a", "mu": "a"}
}"#;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let sc = Scenario::parse(MINIMAL, "mem").unwrap();
        assert_eq!(sc.seed, 0);
        assert_eq!(sc.tolerances, Tolerances::default());
        assert_eq!(sc.task.name(), "check");
        assert_eq!(sc.charge("a").unwrap().total_mass(), 1.0);
    }

    #[test]
    fn unknown_names_are_located() {
        let text = MINIMAL.replace("\"mu\": \"a\"", "\"mu\": \"zz\"");
        match Scenario::parse(&text, "mem") {
            Err(CliError::Schema { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("zz"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let text = MINIMAL.replace("\"dimension\": 2,", "\"dimension\": 2");
        match Scenario::parse(&text, "mem") {
            Err(CliError::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_tasks_are_rejected() {
        assert!(Scenario::parse(&MINIMAL.replace("\"task\"", "\"tsak\""), "m").is_err());
        assert!(Scenario::parse(&MINIMAL.replace("\"check\"", "\"frobnicate\""), "m").is_err());
        let extra = MINIMAL.replace("\"dimension\": 2,", "\"dimension\": 2, \"colour\": 1,");
        assert!(Scenario::parse(&extra, "m").is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = MINIMAL.replace("\"dimension\": 2", "\"dimension\": 3");
        assert!(matches!(Scenario::parse(&text, "m"), Err(CliError::Schema { .. })));
    }

    #[test]
    fn builders_produce_charges() {
        let b = Builder::JensenMixture {
            a: 0.5,
            b: 0.5,
            center: Point::origin(2),
            radius: 0.5,
            x: Point::origin(2),
            n: 64,
        };
        assert!((b.build().unwrap().total_mass() - 1.0).abs() < 1e-12);
        let e = Builder::Example5 {
            part: Example5Part::MuE,
            level: 8,
            fixture: None,
        };
        assert_eq!(e.build().unwrap().atoms().len(), 1);
    }

    #[test]
    fn harmonic_tolerance_falls_back_to_eps() {
        let t = Tolerances {
            eps: 1e-7,
            harmonic: None,
        };
        assert_eq!(t.for_family(FamilyChoice::Harmonic), 1e-7);
        let t = Tolerances {
            harmonic: Some(1e-6),
            ..t
        };
        assert_eq!(t.for_family(FamilyChoice::Harmonic), 1e-6);
        assert_eq!(t.for_family(FamilyChoice::Subharmonic), 1e-7);
    }
}

//! Batch scenario runner: loads a scenario, dispatches to the core crate
//! and renders a deterministic JSON report plus optional plot-data CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod report;
pub mod scenario;

use std::fmt::Write as _;

use balayage_core::balayage::{mass_relations, verify_arens_singer, verify_jensen};
use balayage_core::construct::{
    convolution_balayage, default_radii, family_integral_balayage, smooth, MeasureFamily,
};
use balayage_core::hull::{inward_filled_hull, koc_check, padded_box, rasterize};
use balayage_core::lyons::{build_example5, verify_example5, Example5Options};
use balayage_core::testfn::{harmonic_poly_basis, point_potential, riesz_measure_grid, truncate};
use balayage_core::{
    check, constants, BallQuery, DiscreteCharge, Family, Point, SetExpr, Verdict,
};
use serde_json::{json, Value};
use thiserror::Error;

use report::{csv_field, decimal, encode_numbers, to_value};
pub use scenario::{FamilyChoice, Scenario, Task};

/// Version of the report layout.
pub const REPORT_FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: {message}")]
    Schema {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] balayage_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}

static FIXTURES: &[(&str, &str)] = &[
    ("example5", include_str!("../fixtures/example5.json")),
    ("hull_shell", include_str!("../fixtures/hull_shell.json")),
    ("jensen_ball", include_str!("../fixtures/jensen_ball.json")),
    ("convolution_chain", include_str!("../fixtures/convolution_chain.json")),
    ("riesz_log", include_str!("../fixtures/riesz_log.json")),
    ("masses", include_str!("../fixtures/masses.json")),
    ("harmonic_equality", include_str!("../fixtures/harmonic_equality.json")),
];

pub const SCHEMA: &str = include_str!("../schema.json");

/// Names of the bundled scenarios, in a fixed order.
pub fn list_fixtures() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Replaces every tolerance of the scenario.
    pub eps: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, sc: &mut Scenario) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            sc.seed = s;
        }
        if let Some(e) = self.eps {
            if !(e >= 0.0) {
                return Err(CliError::Invalid(format!("eps must be non-negative, got {e}")));
            }
            sc.tolerances.eps = e;
            sc.tolerances.harmonic = Some(e);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub inconclusive: bool,
    pub report: Value,
    pub csv: String,
    /// Measure built by a `construct` task.
    pub product: Option<DiscreteCharge>,
}

impl Outcome {
    /// 0 for a conclusive pass, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.pass && !self.inconclusive {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        report::render(&self.report)
    }
}

struct TaskResult {
    pass: bool,
    inconclusive: bool,
    body: Value,
    csv: String,
    product: Option<DiscreteCharge>,
}

impl TaskResult {
    fn new(pass: bool, inconclusive: bool, body: Value, csv: String) -> Self {
        TaskResult {
            pass,
            inconclusive,
            body,
            csv,
            product: None,
        }
    }
}

/// Runs a parsed scenario.
pub fn run(sc: &Scenario) -> Result<Outcome, CliError> {
    let r = match &sc.task {
        Task::Check { theta, mu, family } => run_check(sc, theta, mu, *family)?,
        Task::Jensen { measure, point } => {
            let m = sc.charge(measure)?.flatten()?;
            let fam = family(sc, FamilyChoice::Subharmonic, &[&m])?;
            let v = verify_jensen(&m, point, &fam, sc.tolerances.eps)?;
            verdict_result(&v, &fam)
        }
        Task::ArensSinger { measure, point, degree } => {
            let m = sc.charge(measure)?.flatten()?;
            let n = degree.unwrap_or(sc.family.harmonic_degree);
            let basis = harmonic_poly_basis(sc.dimension, n)?;
            let v = verify_arens_singer(&m, point, &basis, sc.tolerances.for_family(FamilyChoice::Harmonic))?;
            verdict_result(&v, &Family::harmonic(sc.dimension, n)?)
        }
        Task::Construct { construction, verify } => run_construct(sc, construction, verify.as_ref())?,
        Task::Hull {
            k,
            h,
            o_big,
            expected_components,
        } => run_hull(sc, k, *h, o_big.as_ref(), *expected_components)?,
        Task::Lyons {
            fixture,
            level,
            harmonic_degree,
            sweep_levels,
        } => {
            if fixture.d != sc.dimension {
                return Err(CliError::Invalid(format!(
                    "fixture dimension {} differs from scenario dimension {}",
                    fixture.d, sc.dimension
                )));
            }
            let opts = Example5Options {
                family: sc.family_descriptor(),
                harmonic_degree: *harmonic_degree,
                sweep_levels: sweep_levels.clone(),
                eps_subharmonic: sc.tolerances.eps,
                eps_harmonic: sc.tolerances.for_family(FamilyChoice::Harmonic),
                eps_sweep: 0.0,
            };
            let ex = build_example5(fixture, *level)?;
            let rep = verify_example5(fixture, &ex, &opts)?;
            let mut csv = String::from("level,margin\n");
            for (m, v) in &rep.sweep.margins {
                let _ = writeln!(csv, "{},{}", decimal(*m), decimal(*v));
            }
            let polar = rep.sweep.first_failure.is_some() && rep.atom_masses.iter().all(|a| a.ok);
            let body = json!({
                "conclusions": {
                    "theta_balayage_of_mu_subharmonic": rep.subharmonic.pass,
                    "theta_balayage_of_mu_e_harmonic": rep.harmonic.pass && !rep.harmonic.inconclusive,
                    "mu_e_charges_polar_set": polar,
                },
                "fixture": to_value(fixture),
                "level": level,
                "details": to_value(&rep),
            });
            TaskResult::new(rep.pass, rep.harmonic.inconclusive, body, csv)
        }
        Task::Riesz {
            pole,
            half_width,
            h,
            radius,
            truncation,
            expected,
            rel_tol,
        } => {
            if pole.dim() != sc.dimension {
                return Err(CliError::Invalid("pole dimension differs from the scenario".into()));
            }
            let lo = Point::from(pole.coords().iter().map(|c| c - half_width).collect::<Vec<_>>());
            let hi = Point::from(pole.coords().iter().map(|c| c + half_width).collect::<Vec<_>>());
            let m = riesz_measure_grid(&truncate(point_potential(pole.clone()), *truncation)?, &lo, &hi, *h)?;
            let mass = m.ball_mass(&BallQuery::new(pole.clone(), *radius))?;
            let pass = (mass - expected).abs() <= rel_tol * expected.abs();
            TaskResult::new(
                pass,
                false,
                json!({
                    "mass": mass,
                    "expected": expected,
                    "rel_tol": rel_tol,
                    "constants": to_value(&constants(sc.dimension)?),
                    "nodes": m.atoms().len(),
                }),
                atoms_csv(&m),
            )
        }
        Task::Masses { theta, mu, family: choice } => {
            let theta = sc.charge(theta)?.flatten()?;
            let mu = sc.charge(mu)?.flatten()?;
            let fam = family(sc, *choice, &[&theta, &mu])?;
            let v = check(&theta, &mu, &fam, sc.tolerances.for_family(*choice))?;
            let masses = mass_relations(&theta, &mu, fam.has_constant(1.0), fam.has_constant(-1.0));
            let mut r = verdict_result(&v, &fam);
            r.body = json!({
                "verdict": r.body,
                "masses": to_value(&masses),
                "consistent": !v.pass || masses.pass(),
            });
            r.pass = v.pass && masses.pass();
            r
        }
    };
    let report = encode_numbers(json!({
        "format": REPORT_FORMAT,
        "scenario": sc.name,
        "task": sc.task.name(),
        "dimension": sc.dimension,
        "seed": sc.seed,
        "pass": r.pass,
        "inconclusive": r.inconclusive,
        "result": r.body,
    }));
    Ok(Outcome {
        pass: r.pass,
        inconclusive: r.inconclusive,
        report,
        csv: r.csv,
        product: r.product,
    })
}

/// Parses, applies overrides and runs.
pub fn run_text(text: &str, origin: &str, ov: Overrides) -> Result<Outcome, CliError> {
    let mut sc = Scenario::parse(text, origin)?;
    ov.apply(&mut sc)?;
    run(&sc)
}

fn family(sc: &Scenario, choice: FamilyChoice, avoid: &[&DiscreteCharge]) -> Result<Family, CliError> {
    let desc = sc.family_descriptor();
    Ok(match choice {
        FamilyChoice::Subharmonic => Family::subharmonic(&desc, &sc.pole_ball()?, avoid)?,
        FamilyChoice::Harmonic => Family::harmonic(sc.dimension, desc.harmonic_degree)?,
    })
}

fn margins_csv(v: &Verdict, fam: &Family) -> String {
    let mut csv = String::from("index,margin,member\n");
    for (i, (m, f)) in v.margins.iter().zip(fam.members()).enumerate() {
        let m = match m {
            Some(x) => match x.finite() {
                Some(f) => decimal(f),
                None => x.to_string(),
            },
            None => "skipped".into(),
        };
        let _ = writeln!(csv, "{i},{m},{}", csv_field(&f.describe()));
    }
    csv
}

fn atoms_csv(m: &DiscreteCharge) -> String {
    let mut csv = String::new();
    for k in 0..m.dim() {
        let _ = write!(csv, "x{k},");
    }
    csv.push_str("weight\n");
    for a in m.atoms() {
        for c in a.point.coords() {
            let _ = write!(csv, "{},", decimal(*c));
        }
        let _ = writeln!(csv, "{}", decimal(a.weight));
    }
    csv
}

fn verdict_result(v: &Verdict, fam: &Family) -> TaskResult {
    TaskResult::new(v.pass, v.inconclusive, to_value(v), margins_csv(v, fam))
}

fn run_check(sc: &Scenario, theta: &str, mu: &str, choice: FamilyChoice) -> Result<TaskResult, CliError> {
    let theta = sc.charge(theta)?.flatten()?;
    let mu = sc.charge(mu)?.flatten()?;
    let fam = family(sc, choice, &[&theta, &mu])?;
    let v = check(&theta, &mu, &fam, sc.tolerances.for_family(choice))?;
    Ok(verdict_result(&v, &fam))
}

fn run_construct(
    sc: &Scenario,
    construction: &scenario::Construction,
    verify: Option<&scenario::Verify>,
) -> Result<TaskResult, CliError> {
    use scenario::Construction as C;
    let (op, product) = match construction {
        C::Convolution { mu, iota0 } => (
            "convolution",
            convolution_balayage(&sc.charge(mu)?, &sc.charge(iota0)?, &sc.domain)?,
        ),
        C::ParallelShift { mu, iota0 } => (
            "parallel_shift",
            family_integral_balayage(
                &sc.charge(mu)?.flatten()?,
                &MeasureFamily::ParallelShift {
                    base: sc.charge(iota0)?,
                },
                &sc.domain,
            )?,
        ),
        C::Smooth { mu, radius, level } => {
            let mu = sc.charge(mu)?.flatten()?;
            let radii = default_radii(&mu, *radius, &sc.domain)?;
            ("smooth", smooth(&mu, &radii, *level, &sc.domain)?)
        }
    };
    let flat = product.flatten()?;
    let mut body = json!({
        "op": op,
        "mass": flat.total_mass(),
        "variation": flat.variation_mass(),
        "atoms": flat.atoms().len(),
        "point_atoms": product.atoms().len(),
        "components": product.components().len(),
        "budget": flat.budget(),
        "support_radius": flat.support_radius(&Point::origin(sc.dimension)),
    });
    let (pass, inconclusive, csv) = match verify {
        Some(ver) => {
            let theta = sc.charge(&ver.theta)?.flatten()?;
            let fam = family(sc, ver.family, &[&theta, &flat])?;
            let v = check(&theta, &flat, &fam, sc.tolerances.for_family(ver.family))?;
            body["verdict"] = to_value(&v);
            (v.pass, v.inconclusive, margins_csv(&v, &fam))
        }
        None => (true, false, atoms_csv(&flat)),
    };
    Ok(TaskResult {
        pass,
        inconclusive,
        body,
        csv,
        product: Some(product),
    })
}

fn run_hull(
    sc: &Scenario,
    k: &SetExpr,
    h: f64,
    o_big: Option<&SetExpr>,
    expected: Option<usize>,
) -> Result<TaskResult, CliError> {
    if !(h > 0.0) {
        return Err(CliError::Invalid(format!("cell size must be positive, got {h}")));
    }
    let outer = o_big.unwrap_or(&sc.domain);
    let (lo, hi) = padded_box(outer, h, 2)?;
    let o = rasterize(&sc.domain, &lo, &hi, h)?;
    let big = rasterize(outer, &lo, &hi, h)?;
    let km = rasterize(k, &lo, &hi, h)?;
    let rep = inward_filled_hull(&o, &km)?;
    let koc = koc_check(&o, &big, &km, expected)?;
    let pass = rep.algorithms_agree && koc.pass();
    Ok(TaskResult::new(
        pass,
        false,
        json!({
            "hull": to_value(&rep),
            "properties": to_value(&koc),
            "mask": rep.hull.to_json(),
        }),
        rep.hull.to_csv(),
    ))
}

/// Caps the global thread pool from a `BALAYAGE_THREADS`-style value.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("BALAYAGE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(e.to_string()))
}

//! The balayage relation `theta <=_H mu`: `int h dtheta <= int h dmu` for
//! every `h` in a finite test family, plus Jensen / Arens-Singer checks,
//! mass relations and the truncated-potential witness sweep.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::measure::{DiscreteCharge, ExtendedReal};
use crate::testfn::{
    point_potential, truncate, Family, FamilyDescriptor, FamilyKind, HarmonicBasis, Tag,
    TestFunction,
};

/// Fraction of skipped members above which a verdict is inconclusive.
pub const SKIP_LIMIT: f64 = 0.1;

/// Tolerance of the exact mass comparisons.
pub const MASS_TOL: f64 = 1e-12;

/// Minimum distance between the sweep point and the atoms of `theta`.
pub const SWEEP_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub index: usize,
    pub description: String,
    pub function: TestFunction,
}

/// Certificate of a balayage check against a finite family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// `min_h (int h dmu - int h dtheta)` over the evaluated members.
    pub worst_margin: ExtendedReal,
    pub witness: Option<Witness>,
    pub skipped: usize,
    pub tolerance: f64,
    pub inconclusive: bool,
    /// Largest `|margin|`, the relevant quantity for harmonic families.
    pub max_abs_margin: ExtendedReal,
    pub family_kind: FamilyKind,
    pub family_size: usize,
    pub family: FamilyDescriptor,
    /// Per-member margins; `None` marks a skipped member.
    #[serde(skip)]
    pub margins: Vec<Option<ExtendedReal>>,
}

impl Verdict {
    pub fn worst_margin_finite(&self) -> Option<f64> {
        self.worst_margin.finite()
    }
}

fn margin_of(theta: &DiscreteCharge, mu: &DiscreteCharge, h: &TestFunction) -> Result<Option<ExtendedReal>> {
    let a = match mu.integrate(h) {
        Ok(v) => v,
        Err(Error::UndefinedIntegral) => return Ok(None),
        Err(e) => return Err(e),
    };
    let b = match theta.integrate(h) {
        Ok(v) => v,
        Err(Error::UndefinedIntegral) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(a.checked_sub(b))
}

/// Checks `theta <=_F mu` with tolerance `eps` plus both quadrature budgets.
///
/// Members whose integrals are undefined are skipped and counted. Ties on
/// the worst margin go to the lowest family index. For harmonic families
/// with `eps = 0` on discretized charges the verdict is marked
/// inconclusive, since the equality can only hold up to quadrature noise.
pub fn check(theta: &DiscreteCharge, mu: &DiscreteCharge, family: &Family, eps: f64) -> Result<Verdict> {
    if theta.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            got: mu.dim(),
        });
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be non-negative, got {eps}")));
    }
    let margins: Vec<Option<ExtendedReal>> = family
        .members()
        .par_iter()
        .map(|h| margin_of(theta, mu, h))
        .collect::<Result<_>>()?;

    let budget = theta.budget() + mu.budget();
    let tolerance = eps + budget;
    let mut worst: Option<(usize, ExtendedReal)> = None;
    let mut max_abs = ExtendedReal::ZERO;
    let mut skipped = 0;
    for (i, m) in margins.iter().enumerate() {
        let Some(m) = *m else {
            skipped += 1;
            continue;
        };
        if worst.is_none_or(|(_, w)| m < w) {
            worst = Some((i, m));
        }
        let abs = match m {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v.abs()),
            _ => ExtendedReal::PosInf,
        };
        if abs > max_abs {
            max_abs = abs;
        }
    }
    let worst_margin = worst.map_or(ExtendedReal::PosInf, |(_, w)| w);
    let pass = worst_margin >= ExtendedReal::Finite(-tolerance);
    let too_many_skips =
        !family.is_empty() && skipped as f64 > SKIP_LIMIT * family.len() as f64;
    let noisy_equality = family.kind == FamilyKind::Harmonic && eps == 0.0 && budget > 0.0;
    Ok(Verdict {
        pass,
        worst_margin,
        witness: worst.map(|(i, _)| Witness {
            index: i,
            description: family.members()[i].describe(),
            function: family.members()[i].clone(),
        }),
        skipped,
        tolerance,
        inconclusive: too_many_skips || noisy_equality,
        max_abs_margin: max_abs,
        family_kind: family.kind,
        family_size: family.len(),
        family: family.descriptor.clone(),
        margins,
    })
}

/// Outcome of the mass comparisons implied by constants in the family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassReport {
    pub theta_mass: f64,
    pub mu_mass: f64,
    /// `theta(O) <= mu(O)`, evaluated when `1` is in the family.
    pub at_most: Option<bool>,
    /// `theta(O) = mu(O)`, evaluated when `+-1` are in the family.
    pub equal: Option<bool>,
}

impl MassReport {
    pub fn pass(&self) -> bool {
        self.at_most != Some(false) && self.equal != Some(false)
    }
}

pub fn mass_relations(
    theta: &DiscreteCharge,
    mu: &DiscreteCharge,
    family_has_one: bool,
    family_has_minus_one: bool,
) -> MassReport {
    let theta_mass = theta.total_mass();
    let mu_mass = mu.total_mass();
    let tol = MASS_TOL * theta_mass.abs().max(mu_mass.abs()).max(1.0);
    MassReport {
        theta_mass,
        mu_mass,
        at_most: family_has_one.then_some(theta_mass <= mu_mass + tol),
        equal: (family_has_one && family_has_minus_one).then_some((theta_mass - mu_mass).abs() <= tol),
    }
}

fn require_positive(mu: &DiscreteCharge) -> Result<()> {
    if !mu.is_flat() {
        return Err(Error::NotFlattened(mu.components().len()));
    }
    if let Some(a) = mu.atoms().iter().find(|a| a.weight < 0.0) {
        return Err(Error::NotCandidate(format!(
            "negative weight {} at {:?}",
            a.weight, a.point
        )));
    }
    Ok(())
}

/// Checks that `mu` is a Jensen measure for `x` relative to `family`.
///
/// The constants `+-1` (forcing unit mass) and the negation of every
/// harmonic member are added first: all of them are subharmonic.
pub fn verify_jensen(mu: &DiscreteCharge, x: &Point, family: &Family, eps: f64) -> Result<Verdict> {
    require_positive(mu)?;
    let mut fam = family.clone();
    fam.kind = FamilyKind::Subharmonic;
    fam.push(TestFunction::constant(1.0));
    fam.push(TestFunction::constant(-1.0));
    for h in family.members() {
        if h.tag() == Tag::Harmonic && !matches!(h, TestFunction::Negation { .. }) {
            fam.push(TestFunction::negate(h.clone())?);
        }
    }
    check(&DiscreteCharge::dirac(x.clone())?, mu, &fam, eps)
}

/// Checks `|int h dmu - h(x)| <= eps` for every basis member.
pub fn verify_arens_singer(
    mu: &DiscreteCharge,
    x: &Point,
    basis: &HarmonicBasis,
    eps: f64,
) -> Result<Verdict> {
    require_positive(mu)?;
    if basis.d != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: basis.d,
        });
    }
    let fam = Family::harmonic(basis.d, basis.max_degree)?;
    check(&DiscreteCharge::dirac(x.clone())?, mu, &fam, eps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub point: Point,
    /// `(M, margin(M))` for every level in the list.
    pub margins: Vec<(f64, f64)>,
    pub tolerance: f64,
    /// Smallest level whose margin is below `-tolerance`.
    pub first_failure: Option<f64>,
}

/// Runs `max(potential_e, -M)` for increasing `M` through the balayage
/// inequality. A positive atom of `mu` at `e` eventually drives the margin
/// to `-inf`-like values, while mass-free neighbourhoods stabilize.
pub fn polar_witness_sweep(
    theta: &DiscreteCharge,
    mu: &DiscreteCharge,
    e: &Point,
    levels: &[f64],
    eps: f64,
) -> Result<SweepReport> {
    if let Some(a) = theta.atoms().iter().find(|a| a.point.dist(e) < SWEEP_CLEARANCE) {
        return Err(Error::Precondition(format!(
            "sweep point lies on the support of theta (atom at {:?})",
            a.point
        )));
    }
    if levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("truncation levels must increase".into()));
    }
    let tolerance = eps + theta.budget() + mu.budget();
    let margins = levels
        .par_iter()
        .map(|&m| {
            let u = truncate(point_potential(e.clone()), m)?;
            let diff = mu.integrate(&u)?.checked_sub(theta.integrate(&u)?);
            diff.and_then(|v| v.finite())
                .map(|v| (m, v))
                .ok_or(Error::UndefinedIntegral)
        })
        .collect::<Result<Vec<_>>>()?;
    let first_failure = margins.iter().find(|(_, v)| *v < -tolerance).map(|(m, _)| *m);
    Ok(SweepReport {
        point: e.clone(),
        margins,
        tolerance,
        first_failure,
    })
}

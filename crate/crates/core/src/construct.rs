//! Builders for balayage measures: harmonic measure of a ball, Jensen
//! mixtures, integrals of measure families (with convolution as the
//! parallel-shift case) and mollifier smoothing.
//!
//! The measure-valued integral `beta = int iota_x dmu(x)` is realized only
//! for atomic `mu`, where it is the finite mixture `sum_i w_i iota_{x_i}`.
//! Continuous charges reduce to this case once flattened.

use rayon::prelude::*;

use crate::balayage::verify_jensen;
use crate::error::{Error, Result};
use crate::geom::{Ball, Point, SetExpr};
use crate::measure::{convolve, mix, Atom, DiscreteCharge, COALESCE_DIST};
use crate::quad::{discretize_sphere, ComponentKind, ContinuousComponent};
use crate::testfn::{Family, FamilyDescriptor};

/// Tolerance of the Jensen check applied to convolution kernels.
pub const KERNEL_JENSEN_EPS: f64 = 1e-9;

/// Fraction of the boundary distance used by [`default_radii`].
pub const DEFAULT_RADIUS_FRACTION: f64 = 0.4;

/// Harmonic measure of `ball` at `x`: the sphere rule of level `n`
/// reweighted by the Poisson kernel `(R^2 - |x-c|^2) / (R |x - zeta|^d)`
/// and normalized to unit mass.
///
/// The budget `rho^n` with `rho = |x - c| / R` reflects the geometric
/// convergence of the periodic rule on the analytic Poisson kernel.
pub fn harmonic_measure_ball(ball: &Ball, x: &Point, n: usize) -> Result<DiscreteCharge> {
    let d = ball.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.dim(),
        });
    }
    let r = ball.radius;
    let rho = x.dist(&ball.center) / r;
    if !(rho < 1.0) {
        return Err(Error::Precondition(format!(
            "point {x:?} is not inside the ball of radius {r}"
        )));
    }
    let sphere = discretize_sphere(&ContinuousComponent::new(
        ComponentKind::SurfaceSphere,
        ball.center.clone(),
        r,
        1.0,
        n,
    ))?;
    let numerator = r * r - x.dist_sq(&ball.center);
    let raw: Vec<Atom> = sphere
        .atoms
        .into_iter()
        .map(|a| {
            let kernel = numerator / (r * a.point.dist(x).powi(d as i32));
            Atom::new(a.point, a.weight * kernel)
        })
        .collect();
    let total: f64 = raw.iter().map(|a| a.weight).sum();
    let atoms = raw
        .into_iter()
        .map(|a| Atom::new(a.point, a.weight / total))
        .collect();
    let budget = if d <= 3 { rho.powi(n as i32) } else { sphere.budget };
    Ok(DiscreteCharge::from_atoms(d, atoms)?.with_budget(budget))
}

/// `a delta_x + b omega(x, .)` for the harmonic measure of `ball`.
pub fn jensen_mixture(a: f64, x: &Point, b: f64, ball: &Ball, n: usize) -> Result<DiscreteCharge> {
    if !(a >= 0.0 && b >= 0.0) || (a + b - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "mixture coefficients must be non-negative with sum 1, got {a} and {b}"
        )));
    }
    let dirac = DiscreteCharge::dirac(x.clone())?;
    if b == 0.0 {
        return Ok(dirac);
    }
    let omega = harmonic_measure_ball(ball, x, n)?;
    if a == 0.0 {
        return Ok(omega);
    }
    mix(&[(a, &dirac), (b, &omega)])
}

/// Assignment `x -> iota_x` of probability measures to the atoms of `mu`.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureFamily {
    /// `iota_x` is `base` shifted by `x`.
    ParallelShift { base: DiscreteCharge },
    /// Explicit measures, matched to atoms within the coalescing distance.
    Table { entries: Vec<(Point, DiscreteCharge)> },
}

impl MeasureFamily {
    pub fn at(&self, x: &Point) -> Result<DiscreteCharge> {
        match self {
            MeasureFamily::ParallelShift { base } => base.flatten()?.shifted(x),
            MeasureFamily::Table { entries } => entries
                .iter()
                .find(|(p, _)| p.dist(x) <= COALESCE_DIST)
                .map(|(_, m)| m.flatten())
                .unwrap_or_else(|| Err(Error::MissingFamilyEntry(x.coords().to_vec()))),
        }
    }
}

fn require_probability(m: &DiscreteCharge, what: &str) -> Result<()> {
    if !m.is_positive() || (m.total_mass() - 1.0).abs() > 1e-12 {
        return Err(Error::NotCandidate(format!(
            "{what} must be a probability measure (mass {})",
            m.total_mass()
        )));
    }
    Ok(())
}

/// Half the distance from the atoms of `mu` to the boundary of `domain`.
fn half_boundary_distance(mu: &DiscreteCharge, domain: &SetExpr) -> Result<f64> {
    let dist = mu.boundary_distance(domain)?;
    if !(dist > 0.0) {
        return Err(Error::Precondition(format!(
            "support of mu is not inside the domain (distance {dist})"
        )));
    }
    Ok(0.5 * dist)
}

/// `beta = sum_i w_i iota_{x_i}` over the atoms of `mu`. Every `iota_x`
/// must be a probability measure supported in `B(x, dist(supp mu, dO)/2)`.
pub fn family_integral_balayage(
    mu: &DiscreteCharge,
    fam: &MeasureFamily,
    domain: &SetExpr,
) -> Result<DiscreteCharge> {
    if !mu.is_flat() {
        return Err(Error::NotFlattened(mu.components().len()));
    }
    if !mu.is_positive() {
        return Err(Error::NotCandidate("mu must be positive".into()));
    }
    let bound = half_boundary_distance(mu, domain)?;
    let parts = mu
        .atoms()
        .par_iter()
        .map(|a| {
            let iota = fam.at(&a.point)?;
            require_probability(&iota, "iota_x")?;
            let reach = iota.support_radius(&a.point);
            if reach >= bound {
                return Err(Error::SupportTooLarge {
                    measured: reach,
                    bound,
                });
            }
            Ok(iota)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = DiscreteCharge::zero(mu.dim())?;
    let mut budget = mu.budget();
    for (a, iota) in mu.atoms().iter().zip(&parts) {
        for b in iota.atoms() {
            out.push_atom(Atom::new(b.point.clone(), a.weight * b.weight))?;
        }
        budget += a.weight.abs() * iota.budget();
    }
    Ok(out.with_budget(budget))
}

/// `beta = iota0 * mu`, after confirming that `iota0` is a Jensen measure
/// for the origin and that `diam supp iota0 < dist(supp mu, dO) / 2`.
pub fn convolution_balayage(
    mu: &DiscreteCharge,
    iota0: &DiscreteCharge,
    domain: &SetExpr,
) -> Result<DiscreteCharge> {
    let iota0 = iota0.flatten()?;
    let mu = mu.flatten()?;
    require_probability(&iota0, "iota0")?;
    let origin = Point::origin(mu.dim());
    let reach = iota0.support_radius(&origin);
    if reach > 0.0 {
        let probe = Ball::open(origin.clone(), 2.0 * reach);
        let family = Family::subharmonic(&FamilyDescriptor::default(), &probe, &[&iota0])?;
        let v = verify_jensen(&iota0, &origin, &family, KERNEL_JENSEN_EPS)?;
        if !v.pass {
            return Err(Error::NotCandidate(format!(
                "iota0 is not a Jensen measure for 0 (margin {})",
                v.worst_margin
            )));
        }
    }
    let bound = half_boundary_distance(&mu, domain)?;
    let diam = iota0.support_diameter()?;
    if diam >= bound {
        return Err(Error::SupportTooLarge {
            measured: diam,
            bound,
        });
    }
    let beta = convolve(&iota0, &mu)?;
    let inside = beta.boundary_distance(domain)?;
    if !(inside > 0.0) {
        return Err(Error::Precondition(format!(
            "convolution leaves the domain (distance {inside})"
        )));
    }
    Ok(beta)
}

/// `min(r_user, 0.4 dist(supp mu, dO))` for every atom; the global
/// distance keeps each mollifier inside the half-distance ball.
pub fn default_radii(mu: &DiscreteCharge, r_user: f64, domain: &SetExpr) -> Result<Vec<f64>> {
    let dist = mu.boundary_distance(domain)?;
    let r = r_user.min(DEFAULT_RADIUS_FRACTION * dist);
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing radius must be positive, got {r}"
        )));
    }
    Ok(vec![r; mu.atoms().len()])
}

/// Replaces every atom `(x, w)` by a mollifier component of radius
/// `radii[i]` and mass `w` centered at `x`. The result has no point atoms.
pub fn smooth(
    mu: &DiscreteCharge,
    radii: &[f64],
    level: usize,
    domain: &SetExpr,
) -> Result<DiscreteCharge> {
    if !mu.is_flat() {
        return Err(Error::NotFlattened(mu.components().len()));
    }
    if radii.len() != mu.atoms().len() {
        return Err(Error::InvalidParameter(format!(
            "{} radii for {} atoms",
            radii.len(),
            mu.atoms().len()
        )));
    }
    let bound = half_boundary_distance(mu, domain)?;
    let mut out = DiscreteCharge::zero(mu.dim())?.with_budget(mu.budget());
    for (a, &r) in mu.atoms().iter().zip(radii) {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smoothing radius must be positive at {:?}",
                a.point
            )));
        }
        if r >= bound {
            return Err(Error::SupportTooLarge {
                measured: r,
                bound,
            });
        }
        let c = ContinuousComponent::new(ComponentKind::Mollifier, a.point.clone(), r, a.weight, level);
        c.validate()?;
        out.push_component(c)?;
    }
    Ok(out)
}

//! A harmonic balayage that charges a polar set.
//!
//! With `theta` uniform on `B(r0)` and `mu` uniform on `B(r)`, the measure
//! `mu_E` removes the uniform mass of small balls `B(e_j, r_j)` from `mu`
//! and puts it back as atoms at the centers. By the mean-value property
//! nothing changes for harmonic test functions, so `mu_E` is still a
//! harmonic balayage of `theta`; but `mu_E` charges the finite (polar) set
//! `{e_j}` off the support of `theta`, which a subharmonic balayage cannot
//! do. The excised mass `r_j^d / r^d` is exactly the atom weight.
//!
//! The construction uses finitely many points: a single point already
//! shows the effect.

use rayon::join;
use serde::{Deserialize, Serialize};

use crate::balayage::{check, polar_witness_sweep, SweepReport, Verdict};
use crate::construct::harmonic_measure_ball;
use crate::error::{Error, Result};
use crate::geom::{Ball, Point, SetExpr};
use crate::hull::{inward_filled_hull, padded_box, rasterize};
use crate::measure::{Atom, BallQuery, DiscreteCharge};
use crate::quad::{ComponentKind, ContinuousComponent};
use crate::testfn::{point_potential, Family, FamilyDescriptor, TestFunction};

fn default_domain_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excision {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyonsFixture {
    pub d: usize,
    pub r0: f64,
    pub r: f64,
    pub excisions: Vec<Excision>,
    /// Radius of the ambient ball `O`.
    #[serde(default = "default_domain_radius")]
    pub domain_radius: f64,
}

impl LyonsFixture {
    /// One excision of radius `0.1` at `(0.5, 0)` with `r0 = 0.3`, `r = 0.8`.
    pub fn standard() -> Self {
        LyonsFixture {
            d: 2,
            r0: 0.3,
            r: 0.8,
            excisions: vec![Excision {
                center: Point::new(&[0.5, 0.0]),
                radius: 0.1,
            }],
            domain_radius: 1.0,
        }
    }

    /// The same fixture with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        LyonsFixture {
            d: self.d,
            r0: s * self.r0,
            r: s * self.r,
            excisions: self
                .excisions
                .iter()
                .map(|e| Excision {
                    center: e.center.scale(s),
                    radius: s * e.radius,
                })
                .collect(),
            domain_radius: s * self.domain_radius,
        }
    }

    pub fn domain(&self) -> Ball {
        Ball::open(Point::origin(self.d), self.domain_radius)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::BadDimension(self.d));
        }
        if !(0.0 < self.r0 && self.r0 < self.r && self.r < self.domain_radius) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < r0 < r < {}, got r0 = {}, r = {}",
                self.domain_radius, self.r0, self.r
            )));
        }
        if self.excisions.is_empty() {
            return Err(Error::InvalidParameter("at least one excision is required".into()));
        }
        for (i, e) in self.excisions.iter().enumerate() {
            if e.center.dim() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: e.center.dim(),
                });
            }
            let s = e.center.norm();
            if !(e.radius > 0.0 && s - e.radius > self.r0 && s + e.radius < self.r) {
                return Err(Error::InvalidParameter(format!(
                    "excision {i} is not inside the annulus {} < |x| < {}",
                    self.r0, self.r
                )));
            }
            for f in &self.excisions[..i] {
                if e.center.dist(&f.center) <= e.radius + f.radius {
                    return Err(Error::InvalidParameter(format!("excision {i} overlaps another")));
                }
            }
        }
        Ok(())
    }

    /// Weight `r_j^d / r^d` of the atom replacing excision `j`.
    pub fn atom_weight(&self, j: usize) -> f64 {
        (self.excisions[j].radius / self.r).powi(self.d as i32)
    }
}

/// The three measures, still carrying their continuous components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example5 {
    pub theta: DiscreteCharge,
    pub mu: DiscreteCharge,
    pub mu_e: DiscreteCharge,
}

impl Example5 {
    pub fn flatten(&self) -> Result<Example5> {
        Ok(Example5 {
            theta: self.theta.flatten()?,
            mu: self.mu.flatten()?,
            mu_e: self.mu_e.flatten()?,
        })
    }
}

fn uniform(center: Point, radius: f64, total: f64, level: usize) -> ContinuousComponent {
    ContinuousComponent::new(ComponentKind::UniformBall, center, radius, total, level)
}

/// Builds `theta`, `mu` and `mu_E` with uniform-ball components of the
/// given level.
pub fn build_example5(f: &LyonsFixture, level: usize) -> Result<Example5> {
    f.validate()?;
    let o = Point::origin(f.d);
    let theta = DiscreteCharge::from_component(uniform(o.clone(), f.r0, 1.0, level))?;
    let mu = DiscreteCharge::from_component(uniform(o, f.r, 1.0, level))?;
    let mut mu_e = mu.clone();
    for (j, e) in f.excisions.iter().enumerate() {
        let w = f.atom_weight(j);
        mu_e.push_component(uniform(e.center.clone(), e.radius, -w, level))?;
        mu_e.push_atom(Atom::new(e.center.clone(), w))?;
    }
    Ok(Example5 { theta, mu, mu_e })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example5Options {
    pub family: FamilyDescriptor,
    pub harmonic_degree: usize,
    /// Truncation levels of the witness sweep.
    pub sweep_levels: Vec<f64>,
    pub eps_subharmonic: f64,
    pub eps_harmonic: f64,
    pub eps_sweep: f64,
}

impl Default for Example5Options {
    fn default() -> Self {
        Example5Options {
            family: FamilyDescriptor::default(),
            harmonic_degree: 8,
            sweep_levels: (1..=10).map(|k| 5.0 * k as f64).collect(),
            eps_subharmonic: 1e-7,
            eps_harmonic: 1e-6,
            eps_sweep: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomMass {
    pub point: Point,
    pub expected: f64,
    pub measured: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example5Report {
    pub masses: [f64; 3],
    /// `theta <= mu` for the subharmonic family.
    pub subharmonic: Verdict,
    /// `theta <= mu_E` for the harmonic family.
    pub harmonic: Verdict,
    /// Truncated potentials at the first excision center.
    pub sweep: SweepReport,
    pub atom_masses: Vec<AtomMass>,
    pub pass: bool,
}

/// Radius of the queries used to read off the atoms at the excisions.
pub const ATOM_QUERY_RADIUS: f64 = 1e-9;

/// Runs the four checks on a flattened fixture: the subharmonic balayage
/// `theta <= mu`, the harmonic balayage `theta <= mu_E`, the failure of the
/// subharmonic relation for `mu_E` detected at `e_1`, and the atom masses.
pub fn verify_example5(f: &LyonsFixture, ex: &Example5, opts: &Example5Options) -> Result<Example5Report> {
    let ex = ex.flatten()?;
    let domain = f.domain();
    let sbh = Family::subharmonic(&opts.family, &domain, &[&ex.theta, &ex.mu])?;
    let har = Family::harmonic(f.d, opts.harmonic_degree)?;
    let ((subharmonic, harmonic), sweep) = join(
        || {
            join(
                || check(&ex.theta, &ex.mu, &sbh, opts.eps_subharmonic),
                || check(&ex.theta, &ex.mu_e, &har, opts.eps_harmonic),
            )
        },
        || {
            polar_witness_sweep(
                &ex.theta,
                &ex.mu_e,
                &f.excisions[0].center,
                &opts.sweep_levels,
                opts.eps_sweep,
            )
        },
    );
    let (subharmonic, harmonic, sweep) = (subharmonic?, harmonic?, sweep?);
    let atom_masses = f
        .excisions
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let measured = ex.mu_e.ball_mass(&BallQuery::new(e.center.clone(), ATOM_QUERY_RADIUS))?;
            let expected = f.atom_weight(j);
            Ok(AtomMass {
                point: e.center.clone(),
                expected,
                measured,
                ok: (measured - expected).abs() <= 1e-12,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = subharmonic.pass
        && harmonic.pass
        && !harmonic.inconclusive
        && sweep.first_failure.is_some()
        && atom_masses.iter().all(|a| a.ok);
    Ok(Example5Report {
        masses: [
            ex.theta.total_mass(),
            ex.mu.total_mass(),
            ex.mu_e.total_mass(),
        ],
        subharmonic,
        harmonic,
        sweep,
        atom_masses,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleCase {
    pub pole: Point,
    /// Whether the pole lies in the grid hull of the supports.
    pub in_hull: bool,
    /// `|int h dtheta - int h dmu|`, expected to vanish when the pole is
    /// off the hull.
    pub gap: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullEqualityReport {
    pub d: usize,
    pub equality: PoleCase,
    /// `int u dmu - int u dtheta` for the maximum of two potentials.
    pub max_margin: f64,
    pub degenerate: PoleCase,
    pub tolerance: f64,
    pub pass: bool,
}

/// Cell size of the hull grid used to classify poles.
const HULL_GRID: f64 = 1.0 / 128.0;

/// `theta = delta_0` and `mu` the harmonic measure of `B(0, 0.5)` at `0`,
/// inside `O = B(0, 1)`. A potential with its pole at `0.8 e_1` is harmonic
/// near the hull (the closed ball of radius `0.5`), so both integrals agree;
/// the maximum of the potentials at `+-0.8 e_1` is subharmonic, so `mu`
/// dominates. A pole at `0.49 e_1` lies in the hull and is reported as
/// excluded.
pub fn hull_equality_fixture(d: usize, n: usize) -> Result<HullEqualityReport> {
    const TOL: f64 = 1e-7;
    let o = Point::origin(d);
    let theta = DiscreteCharge::dirac(o.clone())?;
    let mu = harmonic_measure_ball(&Ball::open(o.clone(), 0.5), &o, n)?;

    let h = if d == 2 { HULL_GRID } else { 4.0 * HULL_GRID };
    let domain = SetExpr::ball(o.clone(), 1.0, false);
    let support = SetExpr::Union(vec![
        SetExpr::ball(o.clone(), h, true),
        SetExpr::Annulus {
            center: o.clone(),
            inner: 0.5 - h,
            outer: 0.5 + h,
        },
    ]);
    let (lo, hi) = padded_box(&domain, h, 2)?;
    let om = rasterize(&domain, &lo, &hi, h)?;
    let km = rasterize(&support, &lo, &hi, h)?.and(&om)?;
    let hull = inward_filled_hull(&om, &km)?.hull;
    let in_hull = |p: &Point| {
        (0..hull.len()).any(|i| hull.get(i) && hull.center(i).coords().iter().zip(p.coords()).all(|(c, x)| (c - x).abs() <= 0.5 * h))
    };

    let gap = |f: &TestFunction| -> Result<f64> {
        let a = theta.integrate(f)?.finite();
        let b = mu.integrate(f)?.finite();
        match (a, b) {
            (Some(a), Some(b)) => Ok((a - b).abs()),
            _ => Ok(f64::INFINITY),
        }
    };
    let case = |t: f64| -> Result<PoleCase> {
        let pole = Point::axis(d, 0, t);
        let inside = in_hull(&pole);
        Ok(PoleCase {
            gap: gap(&point_potential(pole.clone()))?,
            in_hull: inside,
            excluded: inside,
            pole,
        })
    };
    let equality = case(0.8)?;
    let degenerate = case(0.49)?;
    let u = TestFunction::max_of(vec![
        point_potential(Point::axis(d, 0, 0.8)),
        point_potential(Point::axis(d, 0, -0.8)),
    ])?;
    let max_margin = match mu.integrate(&u)?.checked_sub(theta.integrate(&u)?) {
        Some(v) => v.finite().unwrap_or(f64::NEG_INFINITY),
        None => return Err(Error::UndefinedIntegral),
    };
    let pass = !equality.excluded && equality.gap <= TOL && max_margin >= -TOL && degenerate.excluded;
    Ok(HullEqualityReport {
        d,
        equality,
        max_margin,
        degenerate,
        tolerance: TOL,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mean of `log|x - e|` over the uniform disk `B(0, R)`, for `|e| <= R`.
    fn disk_log_mean(radius: f64, e: f64) -> f64 {
        radius.ln() + 0.5 * (e * e / (radius * radius) - 1.0)
    }

    #[test]
    fn atom_weight_and_masses() {
        let f = LyonsFixture::standard();
        assert_eq!(f.atom_weight(0), 0.015625);
        let ex = build_example5(&f, 32).unwrap();
        for m in [&ex.theta, &ex.mu, &ex.mu_e] {
            assert!((m.total_mass() - 1.0).abs() < 1e-12);
        }
        let flat = ex.flatten().unwrap();
        for m in [&flat.theta, &flat.mu, &flat.mu_e] {
            assert!((m.total_mass() - 1.0).abs() < 1e-12);
        }
        let q = BallQuery::new(Point::new(&[0.5, 0.0]), ATOM_QUERY_RADIUS);
        assert_eq!(flat.mu_e.ball_mass(&q).unwrap(), 0.015625);
    }

    #[test]
    fn invalid_fixtures_are_rejected() {
        let mut f = LyonsFixture::standard();
        f.excisions[0].radius = 0.25;
        assert!(build_example5(&f, 16).is_err());
        let mut f = LyonsFixture::standard();
        f.excisions.push(Excision {
            center: Point::new(&[0.55, 0.05]),
            radius: 0.1,
        });
        assert!(build_example5(&f, 16).is_err());
        let mut f = LyonsFixture::standard();
        f.r = 1.2;
        assert!(build_example5(&f, 16).is_err());
    }

    #[test]
    fn excision_is_neutral_for_harmonic_functions() {
        let f = LyonsFixture::standard();
        let e = &f.excisions[0];
        let w = f.atom_weight(0);
        let ball = DiscreteCharge::from_component(uniform(e.center.clone(), e.radius, w, 32))
            .unwrap()
            .flatten()
            .unwrap();
        let family = Family::harmonic(2, 8).unwrap();
        for h in family.members() {
            let a = ball.integrate(h).unwrap().finite().unwrap();
            let b = w * h.eval_finite(&e.center).unwrap();
            assert!((a - b).abs() <= ball.budget() + 1e-15);
        }
    }

    #[test]
    fn sweep_margins_follow_the_linear_law() {
        let f = LyonsFixture::standard();
        let ex = build_example5(&f, 128).unwrap().flatten().unwrap();
        let e = 0.5;
        let w = f.atom_weight(0);
        // continuous part of mu_E minus theta, by the disk mean formula
        let c = disk_log_mean(0.8, e) - w * disk_log_mean(0.1, 0.0) - e.ln();
        let levels: Vec<f64> = (1..=10).map(|k| 5.0 * k as f64).collect();
        let r = polar_witness_sweep(&ex.theta, &ex.mu_e, &f.excisions[0].center, &levels, 0.0).unwrap();
        for &(m, margin) in &r.margins {
            assert!((margin - (c - w * m)).abs() < 1e-3, "M={m}: {margin} vs {}", c - w * m);
        }
        assert_eq!(r.first_failure, Some(15.0));
    }

    #[test]
    fn full_verification_on_standard_fixture() {
        let f = LyonsFixture::standard();
        let ex = build_example5(&f, 128).unwrap();
        let r = verify_example5(&f, &ex, &Example5Options::default()).unwrap();
        assert!(r.pass, "{r:#?}");
        assert!(r.subharmonic.worst_margin >= crate::ExtendedReal::Finite(-1e-7));
        assert!(r.harmonic.max_abs_margin <= crate::ExtendedReal::Finite(1e-6));
    }

    #[test]
    fn verdicts_are_scale_invariant() {
        let f = LyonsFixture::standard();
        for s in [0.5, 2.0] {
            let g = f.scaled(s);
            let r = verify_example5(&g, &build_example5(&g, 64).unwrap(), &Example5Options::default())
                .unwrap();
            assert!(r.pass, "scale {s}");
        }
    }

    #[test]
    fn hull_equality_in_the_plane_and_space() {
        let r = hull_equality_fixture(2, 512).unwrap();
        assert!(r.pass, "{r:#?}");
        assert!(r.equality.gap <= 1e-7);
        assert!(r.degenerate.excluded && r.degenerate.in_hull);
        assert!(r.degenerate.gap > 1e-3);
        let r = hull_equality_fixture(3, 24).unwrap();
        assert!(r.pass, "{r:#?}");
    }
}

//! Discretizers for the continuous measures: normalized volume on a ball,
//! surface measure on a sphere, and a radial bump mollifier.
//!
//! Ball and sphere rules in `d = 2, 3` are polar product rules
//! (Gauss-Legendre in the radius and polar cosine, equispaced azimuth with a
//! half-step offset). They integrate harmonic polynomials of degree below the
//! azimuth count exactly, so mean-value identities survive discretization.
//! Every rule returns non-negative weights rescaled to the declared total and
//! a heuristic error budget.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::measure::{compensated_sum, Atom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    UniformBall,
    SurfaceSphere,
    Mollifier,
}

impl ComponentKind {
    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::UniformBall => "uniform_ball",
            ComponentKind::SurfaceSphere => "surface_sphere",
            ComponentKind::Mollifier => "mollifier",
        }
    }
}

/// A continuous measure of mass `total` awaiting discretization at `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousComponent {
    pub kind: ComponentKind,
    pub center: Point,
    pub radius: f64,
    pub total: f64,
    pub level: usize,
}

impl ContinuousComponent {
    pub fn new(kind: ComponentKind, center: Point, radius: f64, total: f64, level: usize) -> Self {
        ContinuousComponent {
            kind,
            center,
            radius,
            total,
            level,
        }
    }

    pub fn with_total(&self, total: f64) -> Self {
        ContinuousComponent {
            total,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "component radius must be positive, got {}",
                self.radius
            )));
        }
        if !self.total.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidParameter("component must be finite".into()));
        }
        Ok(())
    }
}

/// Atoms produced by a discretizer plus its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub atoms: Vec<Atom>,
    pub budget: f64,
}

pub fn discretize(c: &ContinuousComponent) -> Result<Discretization> {
    match c.kind {
        ComponentKind::UniformBall => discretize_uniform_ball(c),
        ComponentKind::SurfaceSphere => discretize_sphere(c),
        ComponentKind::Mollifier => discretize_mollifier(c),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

fn half_offset_angles(n: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..n).map(move |k| {
        let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        (t.cos(), t.sin())
    })
}

/// Rescales `raw` weights to sum to `total` and sorts the atoms.
fn finish(center: &Point, mut nodes: Vec<(Vec<f64>, f64)>, total: f64, budget: f64) -> Discretization {
    let sum = compensated_sum(nodes.iter().map(|(_, w)| *w));
    let scale = total / sum;
    let mut atoms: Vec<Atom> = nodes
        .drain(..)
        .map(|(offset, w)| {
            let p: Vec<f64> = offset.iter().zip(center.coords()).map(|(o, c)| c + o).collect();
            Atom::new(Point::from(p), w * scale)
        })
        .collect();
    atoms.sort_by(|a, b| a.point.lex_cmp(&b.point));
    Discretization { atoms, budget }
}

/// Points on the unit sphere of `R^d` with relative weights summing to one.
fn unit_sphere_rule(d: usize, level: usize) -> (Vec<(Vec<f64>, f64)>, f64) {
    match d {
        2 => {
            let nodes = half_offset_angles(level)
                .map(|(c, s)| (vec![c, s], 1.0 / level as f64))
                .collect();
            (nodes, 2.0 * PI / level as f64)
        }
        3 => {
            let (t, w) = gauss_legendre(level);
            let n_az = 2 * level;
            let mut nodes = Vec::with_capacity(level * n_az);
            for (z, wz) in t.iter().zip(&w) {
                let rho = (1.0 - z * z).sqrt();
                for (c, s) in half_offset_angles(n_az) {
                    nodes.push((vec![rho * c, rho * s, *z], wz / (2.0 * n_az as f64)));
                }
            }
            (nodes, PI / level as f64)
        }
        _ => {
            // Monte Carlo on S^{d-1}: normalized Gaussian vectors.
            let n = level * level;
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ (d as u64) << 32 ^ level as u64);
            let mut nodes = Vec::with_capacity(n);
            while nodes.len() < n {
                let v: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 1e-12 {
                    nodes.push((v.iter().map(|x| x / r).collect(), 1.0 / n as f64));
                }
            }
            (nodes, 1.0 / (n as f64).sqrt())
        }
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Normalized volume measure on `B(center, radius)` with mass `total`.
pub fn discretize_uniform_ball(c: &ContinuousComponent) -> Result<Discretization> {
    if c.kind != ComponentKind::UniformBall {
        return Err(Error::WrongComponentKind { kind: c.kind.name() });
    }
    if c.level < 2 {
        return Err(Error::LevelTooSmall { level: c.level, min: 2 });
    }
    c.validate()?;
    let d = c.center.dim();
    let r = c.radius;
    let half = c.level.div_ceil(2);
    if d > 3 {
        return Ok(midpoint_ball(c));
    }
    let n_r = half;
    let (t, wt) = gauss_legendre(n_r);
    let (dirs, angular_spacing) = match d {
        2 => unit_sphere_rule(2, 4 * half),
        _ => {
            let (z, wz) = gauss_legendre(half);
            let n_az = 4 * half;
            let mut nodes = Vec::with_capacity(half * n_az);
            for (zz, w) in z.iter().zip(&wz) {
                let rho = (1.0 - zz * zz).sqrt();
                for (cs, sn) in half_offset_angles(n_az) {
                    nodes.push((vec![rho * cs, rho * sn, *zz], w / (2.0 * n_az as f64)));
                }
            }
            (nodes, 2.0 * PI / n_az as f64)
        }
    };
    let mut nodes = Vec::with_capacity(n_r * dirs.len());
    for (ti, wi) in t.iter().zip(&wt) {
        let rho = 0.5 * r * (1.0 + ti);
        let radial = wi * rho.powi(d as i32 - 1);
        for (dir, wd) in &dirs {
            nodes.push((dir.iter().map(|u| rho * u).collect(), radial * wd));
        }
    }
    let spacing = (r * angular_spacing).max(r / n_r as f64);
    Ok(finish(&c.center, nodes, c.total, c.total.abs() * spacing * spacing))
}

fn midpoint_ball(c: &ContinuousComponent) -> Discretization {
    let d = c.center.dim();
    let n = c.level;
    let h = 2.0 / n as f64;
    let mut nodes = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        // odd integers over n: exactly symmetric under sign flips
        let x: Vec<f64> = idx
            .iter()
            .map(|&i| (2.0 * i as f64 + 1.0 - n as f64) / n as f64)
            .collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            nodes.push((x.iter().map(|v| v * c.radius).collect(), 1.0));
        }
        if !advance(&mut idx, n) {
            break;
        }
    }
    let spacing = c.radius * h;
    finish(&c.center, nodes, c.total, c.total.abs() * spacing)
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < n {
            return true;
        }
        *i = 0;
    }
    false
}

/// Surface measure on the sphere `|x - center| = radius` with mass `total`.
/// In `d = 2` the level is the node count; in `d = 3` it is the number of
/// polar nodes, with twice as many azimuths. Higher dimensions fall back to
/// Monte Carlo with `level^2` samples.
pub fn discretize_sphere(c: &ContinuousComponent) -> Result<Discretization> {
    if c.kind != ComponentKind::SurfaceSphere {
        return Err(Error::WrongComponentKind { kind: c.kind.name() });
    }
    if c.level < 2 {
        return Err(Error::LevelTooSmall { level: c.level, min: 2 });
    }
    c.validate()?;
    let d = c.center.dim();
    let (dirs, spacing) = unit_sphere_rule(d, c.level);
    let nodes = dirs
        .into_iter()
        .map(|(u, w)| (u.iter().map(|v| v * c.radius).collect(), w))
        .collect();
    let budget = if d <= 3 {
        let h = c.radius * spacing;
        c.total.abs() * h * h
    } else {
        c.total.abs() * spacing
    };
    Ok(finish(&c.center, nodes, c.total, budget))
}

/// Radial bump `exp(-1/(1 - t^2))`, `t = |x|/radius`, zero for `t >= 1`.
pub fn bump(t: f64) -> f64 {
    if t < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Smooth radial probability density on `B(center, radius)` scaled to
/// `total`, sampled on a centered midpoint lattice with `level` nodes per
/// axis. The lattice is invariant under coordinate permutations and sign
/// flips, and scaling the radius scales the nodes without touching weights.
pub fn discretize_mollifier(c: &ContinuousComponent) -> Result<Discretization> {
    if c.kind != ComponentKind::Mollifier {
        return Err(Error::WrongComponentKind { kind: c.kind.name() });
    }
    if c.level < 8 {
        return Err(Error::LevelTooSmall { level: c.level, min: 8 });
    }
    c.validate()?;
    let d = c.center.dim();
    let n = c.level;
    let h = 2.0 / n as f64;
    let mut nodes = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        // odd integers over n: exactly symmetric under sign flips
        let x: Vec<f64> = idx
            .iter()
            .map(|&i| (2.0 * i as f64 + 1.0 - n as f64) / n as f64)
            .collect();
        let w = bump(x.iter().map(|v| v * v).sum::<f64>().sqrt());
        if w > 0.0 {
            nodes.push((x.iter().map(|v| v * c.radius).collect(), w));
        }
        if !advance(&mut idx, n) {
            break;
        }
    }
    // Logarithmic integrands are scale invariant under the mollifier
    // scaling, so the budget depends on the relative spacing only; the log
    // factor covers poles inside the support.
    let budget = c.total.abs() * MOLLIFIER_BUDGET_FACTOR * h * h * (1.0 - h.ln());
    Ok(finish(&c.center, nodes, c.total, budget))
}

const MOLLIFIER_BUDGET_FACTOR: f64 = 0.05;

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(kind: ComponentKind, center: &[f64], radius: f64, level: usize) -> ContinuousComponent {
        ContinuousComponent::new(kind, Point::new(center), radius, 1.0, level)
    }

    fn integrate(disc: &Discretization, f: impl Fn(&[f64]) -> f64) -> f64 {
        compensated_sum(disc.atoms.iter().map(|a| a.weight * f(a.point.coords())))
    }

    fn mass(disc: &Discretization) -> f64 {
        compensated_sum(disc.atoms.iter().map(|a| a.weight))
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn uniform_ball_examples() {
        for level in [2, 3, 7, 64] {
            let d = discretize_uniform_ball(&comp(ComponentKind::UniformBall, &[0.0, 0.0], 1.0, level))
                .unwrap();
            assert!((mass(&d) - 1.0).abs() < 1e-12);
            assert!(d.atoms.iter().all(|a| a.weight >= 0.0));
        }
        let d = discretize_uniform_ball(&comp(ComponentKind::UniformBall, &[0.0, 0.0], 1.0, 64)).unwrap();
        assert_eq!(d.atoms.len(), 64 * 64);
        assert!(integrate(&d, |x| x[0]).abs() < 1e-10);
        // polar-coordinates oracle: int_0^1 r^2 * 2r dr = 1/2
        assert!((integrate(&d, |x| x[0] * x[0] + x[1] * x[1]) - 0.5).abs() < 5e-3);
        assert!(matches!(
            discretize_uniform_ball(&comp(ComponentKind::UniformBall, &[0.0, 0.0], 1.0, 1)),
            Err(Error::LevelTooSmall { .. })
        ));
        assert!(discretize_uniform_ball(&comp(ComponentKind::Mollifier, &[0.0, 0.0], 1.0, 8)).is_err());
    }

    #[test]
    fn uniform_ball_three_dimensional_moments() {
        let d = discretize_uniform_ball(&comp(ComponentKind::UniformBall, &[0.0, 0.0, 0.0], 2.0, 16))
            .unwrap();
        assert!((mass(&d) - 1.0).abs() < 1e-12);
        // |x|^2 over the ball of radius R has mean 3R^2/5
        let m2 = integrate(&d, |x| x.iter().map(|v| v * v).sum());
        assert!((m2 - 3.0 * 4.0 / 5.0).abs() < 1e-12, "{m2}");
    }

    #[test]
    fn midpoint_fallback_in_four_dimensions() {
        let d = discretize_uniform_ball(&comp(ComponentKind::UniformBall, &[0.0; 4], 1.0, 10)).unwrap();
        assert!((mass(&d) - 1.0).abs() < 1e-12);
        let m = integrate(&d, |x| x[2]);
        assert!(m.abs() < 1e-12, "{m} {}", d.atoms.len());
    }

    /// Doubling the level on a smooth integrand shrinks the error at least
    /// like a second-order rule.
    #[test]
    fn ball_rule_refinement_order() {
        let f = |x: &[f64]| (x[0] + 0.5 * x[1]).exp() + (3.0 * x[1]).sin() * x[0];
        let reference = integrate(
            &discretize_uniform_ball(&comp(ComponentKind::UniformBall, &[0.0, 0.0], 1.0, 256)).unwrap(),
            f,
        );
        let err = |level| {
            let d = discretize_uniform_ball(&comp(ComponentKind::UniformBall, &[0.0, 0.0], 1.0, level))
                .unwrap();
            (integrate(&d, f) - reference).abs()
        };
        for level in [2usize, 4] {
            let (e1, e2) = (err(level), err(2 * level));
            let order = (e1 / e2).log2();
            assert!(order >= 1.8, "level {level}: {e1} -> {e2}, order {order}");
        }
    }

    #[test]
    fn sphere_examples() {
        let d = discretize_sphere(&comp(ComponentKind::SurfaceSphere, &[0.0, 0.0], 1.0, 16)).unwrap();
        assert!((mass(&d) - 1.0).abs() < 1e-15);
        assert!(integrate(&d, |x| x[0] * x[0] - x[1] * x[1]).abs() < 1e-14);

        let d3 = discretize_sphere(&comp(ComponentKind::SurfaceSphere, &[0.0, 0.0, 0.0], 1.0, 12)).unwrap();
        assert_eq!(d3.atoms.len(), 12 * 24);
        assert!((mass(&d3) - 1.0).abs() < 1e-12);
        assert!(integrate(&d3, |x| x[0] * x[1] * x[2]).abs() < 1e-12);
        // x^2 has mean 1/3 on S^2
        assert!((integrate(&d3, |x| x[0] * x[0]) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn circle_rule_reproduces_harmonic_polynomials() {
        // Re z^k has mean zero on every circle centered at the origin for k >= 1
        let n = 32;
        let c = [0.2, -0.1];
        let d = discretize_sphere(&comp(ComponentKind::SurfaceSphere, &c, 0.7, n)).unwrap();
        for k in 0..=n / 2 {
            let f = |x: &[f64]| {
                let (a, b) = (x[0] - c[0], x[1] - c[1]);
                let (r, t) = ((a * a + b * b).sqrt(), b.atan2(a));
                r.powi(k as i32) * (k as f64 * t).cos() + 3.0
            };
            assert!((integrate(&d, f) - if k == 0 { 4.0 } else { 3.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_sphere_in_high_dimension() {
        let d = discretize_sphere(&comp(ComponentKind::SurfaceSphere, &[0.0; 5], 1.0, 40)).unwrap();
        assert!((mass(&d) - 1.0).abs() < 1e-12);
        assert!((d.budget - 1.0 / 40.0).abs() < 1e-15);
        assert!(integrate(&d, |x| x[3]).abs() < 4.0 * d.budget);
    }

    #[test]
    fn mollifier_examples() {
        let d = discretize_mollifier(&comp(ComponentKind::Mollifier, &[0.0, 0.0], 0.1, 16)).unwrap();
        assert!((mass(&d) - 1.0).abs() < 1e-12);
        assert!(integrate(&d, |x| x[0]).abs() < 1e-12);
        assert!(integrate(&d, |x| x[1]).abs() < 1e-12);
        assert!(d.atoms.iter().all(|a| a.weight > 0.0 && a.point.norm() < 0.1));
        assert!(matches!(
            discretize_mollifier(&comp(ComponentKind::Mollifier, &[0.0, 0.0], 0.1, 7)),
            Err(Error::LevelTooSmall { .. })
        ));
    }

    #[test]
    fn mollifier_is_hyperoctahedrally_symmetric() {
        let d = discretize_mollifier(&comp(ComponentKind::Mollifier, &[0.0, 0.0, 0.0], 0.3, 10)).unwrap();
        let lookup = |q: [f64; 3]| {
            d.atoms
                .iter()
                .find(|a| (0..3).all(|k| (a.point[k] - q[k]).abs() < 1e-14))
                .map(|a| a.weight)
        };
        for a in &d.atoms {
            let x = [a.point[0], a.point[1], a.point[2]];
            for img in [[x[1], x[0], x[2]], [x[2], x[1], x[0]], [-x[0], x[1], x[2]], [x[0], -x[1], -x[2]]] {
                let w = lookup(img).expect("image node present");
                assert!((w - a.weight).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mollifier_scaling_law() {
        let one = discretize_mollifier(&comp(ComponentKind::Mollifier, &[0.0, 0.0], 1.0, 12)).unwrap();
        let r = discretize_mollifier(&comp(ComponentKind::Mollifier, &[0.0, 0.0], 0.25, 12)).unwrap();
        assert_eq!(one.atoms.len(), r.atoms.len());
        for (a, b) in one.atoms.iter().zip(&r.atoms) {
            assert!((a.weight - b.weight).abs() < 1e-15);
            assert!(a.point.scale(0.25).dist(&b.point) < 1e-15);
        }
    }

    /// Sub-mean-value inequality for log|x - p| with the pole inside the
    /// bump's support, against a dense radial oracle.
    #[test]
    fn mollifier_jensen_inequality_for_log_potential() {
        let r = 0.2;
        let d = discretize_mollifier(&comp(ComponentKind::Mollifier, &[0.0, 0.0], r, 64)).unwrap();
        let at0 = |p: f64| p.ln();
        for pole in [0.05, 0.1, 0.15] {
            let got = integrate(&d, |x| ((x[0] - pole).powi(2) + x[1] * x[1]).sqrt().ln());
            // the circle mean of log|x - p| over |x| = s is log max(s, |p|)
            let n = 20_000;
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..n {
                let s = r * (i as f64 + 0.5) / n as f64;
                let w = bump(s / r) * s;
                num += w * s.max(pole).ln();
                den += w;
            }
            let oracle = num / den;
            assert!(got >= at0(pole) - 1e-9, "pole {pole}: {got} < {}", at0(pole));
            assert!((got - oracle).abs() < 5e-3, "pole {pole}: {got} vs {oracle}");
        }
        // pole outside the support: harmonic, so equality up to quadrature
        let got = integrate(&d, |x| ((x[0] - 0.5).powi(2) + x[1] * x[1]).sqrt().ln());
        assert!((got - 0.5f64.ln()).abs() < 1e-6);
    }
}

//! Test functions for balayage checks: harmonic polynomials, point
//! potentials and their truncations, smooth subharmonic samples, maxima of
//! subharmonic functions. Also finite-difference Laplacians and a grid
//! estimate of the Riesz measure.

mod family;
mod poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::measure::{Atom, DiscreteCharge, ExtendedReal};

pub use family::{Family, FamilyDescriptor, FamilyKind};
pub use poly::{
    harmonic_poly_basis, homogeneous_harmonic_dim, monomials, HarmonicBasis, Polynomial,
    MAX_HARMONIC_DEGREE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Harmonic,
    Subharmonic,
}

/// An evaluatable scalar field with a harmonic or subharmonic tag.
///
/// Negation is only accepted for harmonic functions; every other
/// constructor yields a subharmonic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Constant { value: f64 },
    HarmonicPoly { poly: Polynomial },
    /// `log|x - pole|` in the plane, `-|x - pole|^{2-d}` for `d >= 3`.
    PointPotential { pole: Point },
    /// `max(inner, -level)`.
    TruncatedPotential { inner: Box<TestFunction>, level: f64 },
    /// `scale * |x - center|^2` with `scale >= 0`.
    SmoothSbh { center: Point, scale: f64 },
    Negation { inner: Box<TestFunction> },
    MaxCombo { parts: Vec<TestFunction> },
}

impl TestFunction {
    pub fn constant(value: f64) -> Self {
        TestFunction::Constant { value }
    }

    pub fn harmonic_poly(poly: Polynomial) -> Result<Self> {
        if poly.laplacian().coefficient_l1() > 1e-9 * poly.coefficient_l1().max(1.0) {
            return Err(Error::InvalidTestFunction(
                "polynomial is not harmonic".into(),
            ));
        }
        Ok(TestFunction::HarmonicPoly { poly })
    }

    pub fn smooth_sbh(center: Point, scale: f64) -> Result<Self> {
        if !(scale >= 0.0) {
            return Err(Error::InvalidTestFunction(
                "smooth sample needs a non-negative scale".into(),
            ));
        }
        Ok(TestFunction::SmoothSbh { center, scale })
    }

    pub fn negate(f: TestFunction) -> Result<Self> {
        if f.tag() != Tag::Harmonic {
            return Err(Error::InvalidTestFunction(
                "only harmonic functions may be negated".into(),
            ));
        }
        Ok(TestFunction::Negation { inner: Box::new(f) })
    }

    pub fn max_of(parts: Vec<TestFunction>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidTestFunction("empty max combination".into()));
        }
        Ok(TestFunction::MaxCombo { parts })
    }

    pub fn tag(&self) -> Tag {
        match self {
            TestFunction::Constant { .. } | TestFunction::HarmonicPoly { .. } => Tag::Harmonic,
            TestFunction::Negation { inner } => inner.tag(),
            TestFunction::MaxCombo { parts } if parts.len() == 1 => parts[0].tag(),
            _ => Tag::Subharmonic,
        }
    }

    /// Points where the function equals `-inf`.
    pub fn poles(&self) -> Vec<Point> {
        match self {
            TestFunction::PointPotential { pole } => vec![pole.clone()],
            TestFunction::MaxCombo { parts } => {
                let mut common = parts[0].poles();
                for p in &parts[1..] {
                    let other = p.poles();
                    common.retain(|q| other.contains(q));
                }
                common
            }
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, x: &Point) -> ExtendedReal {
        match self {
            TestFunction::Constant { value } => ExtendedReal::Finite(*value),
            TestFunction::HarmonicPoly { poly } => ExtendedReal::Finite(poly.eval(x)),
            TestFunction::PointPotential { pole } => potential(pole, x),
            TestFunction::TruncatedPotential { inner, level } => match inner.eval(x) {
                ExtendedReal::Finite(v) => ExtendedReal::Finite(v.max(-level)),
                ExtendedReal::NegInf => ExtendedReal::Finite(-level),
                ExtendedReal::PosInf => ExtendedReal::PosInf,
            },
            TestFunction::SmoothSbh { center, scale } => {
                ExtendedReal::Finite(scale * center.dist_sq(x))
            }
            TestFunction::Negation { inner } => -inner.eval(x),
            TestFunction::MaxCombo { parts } => parts
                .iter()
                .map(|p| p.eval(x))
                .fold(ExtendedReal::NegInf, |a, b| if b > a { b } else { a }),
        }
    }

    /// Finite value, or `None` at a pole.
    pub fn eval_finite(&self, x: &Point) -> Option<f64> {
        self.eval(x).finite()
    }

    /// One-line human description used in reports.
    pub fn describe(&self) -> String {
        match self {
            TestFunction::Constant { value } => format!("const({value})"),
            TestFunction::HarmonicPoly { poly } => {
                format!("harmonic_poly(deg {}, {} terms)", poly.degree(), poly.terms.len())
            }
            TestFunction::PointPotential { pole } => format!("potential({pole:?})"),
            TestFunction::TruncatedPotential { inner, level } => {
                format!("max({}, -{level})", inner.describe())
            }
            TestFunction::SmoothSbh { center, scale } => format!("{scale}*|x-{center:?}|^2"),
            TestFunction::Negation { inner } => format!("-{}", inner.describe()),
            TestFunction::MaxCombo { parts } => format!(
                "max[{}]",
                parts.iter().map(|p| p.describe()).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

fn potential(pole: &Point, x: &Point) -> ExtendedReal {
    let d = pole.dim();
    let r = pole.dist(x);
    if r == 0.0 {
        return ExtendedReal::NegInf;
    }
    if d == 2 {
        ExtendedReal::Finite(r.ln())
    } else {
        ExtendedReal::Finite(-r.powi(2 - d as i32))
    }
}

/// The fundamental subharmonic function with `-inf` at `pole`.
pub fn point_potential(pole: Point) -> TestFunction {
    TestFunction::PointPotential { pole }
}

/// `max(f, -level)`; finite wherever `f` is not `+inf`.
pub fn truncate(f: TestFunction, level: f64) -> Result<TestFunction> {
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "truncation level must be positive, got {level}"
        )));
    }
    Ok(TestFunction::TruncatedPotential {
        inner: Box::new(f),
        level,
    })
}

/// Central `(2d+1)`-point stencil estimate of the Laplacian of `f` at `x`.
pub fn laplacian_fd_with(f: impl Fn(&Point) -> f64, x: &Point, h: f64) -> Result<f64> {
    let sample = |p: &Point| {
        let v = f(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(p.coords().to_vec()))
        }
    };
    let center = sample(x)?;
    let mut acc = -2.0 * x.dim() as f64 * center;
    let mut y = x.clone();
    for k in 0..x.dim() {
        let xk = x[k];
        y.coords_mut()[k] = xk + h;
        acc += sample(&y)?;
        y.coords_mut()[k] = xk - h;
        acc += sample(&y)?;
        y.coords_mut()[k] = xk;
    }
    Ok(acc / (h * h))
}

pub fn laplacian_fd(f: &TestFunction, x: &Point, h: f64) -> Result<f64> {
    laplacian_fd_with(|p| f.eval_finite(p).unwrap_or(f64::NEG_INFINITY), x, h)
}

/// Riesz measure `c_d * Laplacian(f)` estimated on the grid nodes
/// `lo + i h` inside the box: every node carries `c_d * stencil * h^d`.
pub fn riesz_measure_grid(f: &TestFunction, lo: &Point, hi: &Point, h: f64) -> Result<DiscreteCharge> {
    let d = lo.dim();
    if hi.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: hi.dim(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {h}")));
    }
    let c = geom::constants(d)?.c;
    let counts: Vec<usize> = (0..d)
        .map(|k| ((hi[k] - lo[k]) / h + 1e-9).floor() as usize + 1)
        .collect();
    // values on the grid padded by one node per side
    let padded: Vec<usize> = counts.iter().map(|n| n + 2).collect();
    let strides: Vec<usize> = (0..d)
        .map(|k| padded[..k].iter().product())
        .collect();
    let total: usize = padded.iter().product();
    let node = |flat: usize, offset: isize| -> Point {
        let mut p = Vec::with_capacity(d);
        let mut rest = flat;
        for k in 0..d {
            let i = (rest % padded[k]) as isize + offset;
            rest /= padded[k];
            p.push(lo[k] + i as f64 * h);
        }
        Point::from(p)
    };
    let mut values = Vec::with_capacity(total);
    for flat in 0..total {
        let p = node(flat, -1);
        match f.eval(&p) {
            ExtendedReal::Finite(v) => values.push(v),
            _ => return Err(Error::NonFinite(p.coords().to_vec())),
        }
    }
    let scale = c * h.powi(d as i32 - 2);
    let mut atoms = Vec::new();
    let mut idx = vec![1usize; d];
    loop {
        let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        let mut lap = -2.0 * d as f64 * values[flat];
        for s in &strides {
            lap += values[flat + s] + values[flat - s];
        }
        atoms.push(Atom::new(node(flat, -1), scale * lap));
        let mut k = 0;
        loop {
            if k == d {
                return DiscreteCharge::from_atoms(d, atoms);
            }
            idx[k] += 1;
            if idx[k] <= counts[k] {
                break;
            }
            idx[k] = 1;
            k += 1;
        }
    }
}

//! Finite signed measures: point atoms plus tagged continuous components
//! that are turned into atoms by [`DiscreteCharge::flatten`].
//!
//! Integrals follow the extended-real conventions `x * (+-inf) = +-inf` for
//! `x > 0` and `0 * (+-inf) = 0`. A sum that meets both `+inf` and `-inf`
//! has no value and is reported as [`Error::UndefinedIntegral`].

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::{Placement, Point, SetExpr};
use crate::quad::{self, ContinuousComponent};
use crate::testfn::TestFunction;

/// Atoms closer than this are merged by [`DiscreteCharge::coalesce`].
pub const COALESCE_DIST: f64 = 1e-12;

/// A real number or one of the two infinities.
///
/// The derived ordering puts `NegInf` below every finite value and `PosInf`
/// above.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// `w * self` with `0 * (+-inf) = 0`.
    pub fn scaled(self, w: f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(w * v),
            _ if w == 0.0 => ExtendedReal::ZERO,
            ExtendedReal::NegInf if w > 0.0 => ExtendedReal::NegInf,
            ExtendedReal::NegInf => ExtendedReal::PosInf,
            ExtendedReal::PosInf if w > 0.0 => ExtendedReal::PosInf,
            ExtendedReal::PosInf => ExtendedReal::NegInf,
        }
    }


    /// `None` for `inf + (-inf)`.
    pub fn checked_add(self, other: ExtendedReal) -> Option<ExtendedReal> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (NegInf, PosInf) | (PosInf, NegInf) => None,
            (NegInf, _) | (_, NegInf) => Some(NegInf),
            (PosInf, _) | (_, PosInf) => Some(PosInf),
        }
    }

    pub fn checked_sub(self, other: ExtendedReal) -> Option<ExtendedReal> {
        self.checked_add(-other)
    }

    pub fn min(self, other: ExtendedReal) -> ExtendedReal {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else if v == f64::INFINITY {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => f.write_str("-inf"),
            ExtendedReal::PosInf => f.write_str("+inf"),
            ExtendedReal::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl std::ops::Neg for ExtendedReal {
    type Output = ExtendedReal;

    fn neg(self) -> ExtendedReal {
        self.scaled(-1.0)
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::NegInf => s.serialize_str("-inf"),
            ExtendedReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtendedReal::Finite(v)),
            Repr::Str(s) => match s.as_str() {
                "-inf" => Ok(ExtendedReal::NegInf),
                "+inf" | "inf" => Ok(ExtendedReal::PosInf),
                other => Err(serde::de::Error::custom(format!(
                    "expected number or \"-inf\"/\"+inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// Neumaier-compensated running sum over extended reals.
#[derive(Debug, Default)]
pub(crate) struct ExtSum {
    sum: f64,
    comp: f64,
    neg_inf: bool,
    pos_inf: bool,
}

impl ExtSum {
    pub(crate) fn push(&mut self, v: ExtendedReal) {
        match v {
            ExtendedReal::Finite(x) => {
                let t = self.sum + x;
                if self.sum.abs() >= x.abs() {
                    self.comp += (self.sum - t) + x;
                } else {
                    self.comp += (x - t) + self.sum;
                }
                self.sum = t;
            }
            ExtendedReal::NegInf => self.neg_inf = true,
            ExtendedReal::PosInf => self.pos_inf = true,
        }
    }

    pub(crate) fn value(&self) -> Option<ExtendedReal> {
        match (self.neg_inf, self.pos_inf) {
            (true, true) => None,
            (true, false) => Some(ExtendedReal::NegInf),
            (false, true) => Some(ExtendedReal::PosInf),
            (false, false) => Some(ExtendedReal::Finite(self.sum + self.comp)),
        }
    }
}

pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = ExtSum::default();
    for v in values {
        acc.push(ExtendedReal::Finite(v));
    }
    acc.sum + acc.comp
}

/// A weighted point mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "p")]
    pub point: Point,
    #[serde(rename = "w")]
    pub weight: f64,
}

impl Atom {
    pub fn new(point: Point, weight: f64) -> Self {
        Atom { point, weight }
    }
}

/// Closed-ball query `B(center, radius)`; atoms on the sphere are counted.
#[derive(Debug, Clone, PartialEq)]
pub struct BallQuery {
    pub center: Point,
    pub radius: f64,
}

impl BallQuery {
    pub fn new(center: Point, radius: f64) -> Self {
        BallQuery { center, radius }
    }
}

/// Finite signed measure with compact support.
///
/// `budget` carries the accumulated quadrature error estimate of whatever
/// continuous parts were discretized into the atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChargeRepr")]
pub struct DiscreteCharge {
    #[serde(rename = "d")]
    dim: usize,
    atoms: Vec<Atom>,
    components: Vec<ContinuousComponent>,
    #[serde(skip_serializing_if = "is_zero")]
    budget: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChargeRepr {
    d: usize,
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    components: Vec<ContinuousComponent>,
    #[serde(default)]
    budget: f64,
}

impl TryFrom<ChargeRepr> for DiscreteCharge {
    type Error = Error;

    fn try_from(r: ChargeRepr) -> Result<Self> {
        let mut m = DiscreteCharge::zero(r.d)?;
        for a in r.atoms {
            m.push_atom(a)?;
        }
        for c in r.components {
            m.push_component(c)?;
        }
        if !(r.budget >= 0.0) {
            return Err(Error::InvalidParameter("budget must be non-negative".into()));
        }
        m.budget = r.budget;
        Ok(m)
    }
}

/// Positive part, negative part and total variation of a charge.
#[derive(Debug, Clone, PartialEq)]
pub struct Jordan {
    pub positive: DiscreteCharge,
    pub negative: DiscreteCharge,
    pub variation: DiscreteCharge,
}

impl DiscreteCharge {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        Ok(DiscreteCharge {
            dim,
            atoms: Vec::new(),
            components: Vec::new(),
            budget: 0.0,
        })
    }

    pub fn dirac(point: Point) -> Result<Self> {
        Self::from_atoms(point.dim(), vec![Atom::new(point, 1.0)])
    }

    pub fn from_atoms(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        let mut m = Self::zero(dim)?;
        for a in atoms {
            m.push_atom(a)?;
        }
        Ok(m)
    }

    pub fn from_component(component: ContinuousComponent) -> Result<Self> {
        let mut m = Self::zero(component.center.dim())?;
        m.push_component(component)?;
        Ok(m)
    }

    pub fn push_atom(&mut self, atom: Atom) -> Result<()> {
        if atom.point.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: atom.point.dim(),
            });
        }
        if !atom.point.is_finite() || !atom.weight.is_finite() {
            return Err(Error::InvalidParameter("atom must be finite".into()));
        }
        self.atoms.push(atom);
        Ok(())
    }

    pub fn push_component(&mut self, c: ContinuousComponent) -> Result<()> {
        if c.center.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: c.center.dim(),
            });
        }
        c.validate()?;
        self.components.push(c);
        Ok(())
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn components(&self) -> &[ContinuousComponent] {
        &self.components
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn is_flat(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.components.is_empty()
    }

    fn require_flat(&self) -> Result<()> {
        if self.is_flat() {
            Ok(())
        } else {
            Err(Error::NotFlattened(self.components.len()))
        }
    }

    /// Discretizes every continuous component; the error budgets of the
    /// discretizers are added to the charge's budget.
    pub fn flatten(&self) -> Result<DiscreteCharge> {
        let mut out = DiscreteCharge {
            dim: self.dim,
            atoms: self.atoms.clone(),
            components: Vec::new(),
            budget: self.budget,
        };
        for c in &self.components {
            let disc = quad::discretize(c)?;
            out.atoms.extend(disc.atoms);
            out.budget += disc.budget;
        }
        Ok(out)
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .map(|a| a.weight)
                .chain(self.components.iter().map(|c| c.total)),
        )
    }

    /// Mass of the total variation of the atomic part.
    pub fn variation_mass(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.weight.abs()))
            + self.components.iter().map(|c| c.total.abs()).sum::<f64>()
    }

    pub fn is_positive(&self) -> bool {
        self.atoms.iter().all(|a| a.weight >= 0.0) && self.components.iter().all(|c| c.total >= 0.0)
    }

    /// Merges atoms closer than [`COALESCE_DIST`] and drops zero weights.
    /// Output atoms are in lexicographic point order.
    pub fn coalesce(&self) -> Result<DiscreteCharge> {
        self.require_flat()?;
        let mut sorted = self.atoms.clone();
        sorted.sort_by(|a, b| a.point.lex_cmp(&b.point));
        let mut merged = vec![false; sorted.len()];
        let mut atoms = Vec::with_capacity(sorted.len());
        for i in 0..sorted.len() {
            if merged[i] {
                continue;
            }
            let mut w = sorted[i].weight;
            let lead = sorted[i].point[0];
            for j in i + 1..sorted.len() {
                if sorted[j].point[0] - lead > COALESCE_DIST {
                    break;
                }
                if !merged[j] && sorted[j].point.dist(&sorted[i].point) <= COALESCE_DIST {
                    merged[j] = true;
                    w += sorted[j].weight;
                }
            }
            if w != 0.0 {
                atoms.push(Atom::new(sorted[i].point.clone(), w));
            }
        }
        Ok(DiscreteCharge {
            dim: self.dim,
            atoms,
            components: Vec::new(),
            budget: self.budget,
        })
    }

    pub fn jordan(&self) -> Result<Jordan> {
        let net = self.coalesce()?;
        let mut positive = DiscreteCharge::zero(self.dim)?;
        let mut negative = DiscreteCharge::zero(self.dim)?;
        for a in net.atoms {
            match a.weight.partial_cmp(&0.0) {
                Some(Ordering::Greater) => positive.atoms.push(a),
                Some(Ordering::Less) => negative.atoms.push(Atom::new(a.point, -a.weight)),
                _ => {}
            }
        }
        let mut variation = positive.clone();
        variation.atoms.extend(negative.atoms.iter().cloned());
        variation.atoms.sort_by(|a, b| a.point.lex_cmp(&b.point));
        Ok(Jordan {
            positive,
            negative,
            variation,
        })
    }

    /// Restriction to `region`. Components must lie wholly inside or wholly
    /// outside the region.
    pub fn restrict(&self, region: &SetExpr) -> Result<DiscreteCharge> {
        let mut out = DiscreteCharge {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .filter(|a| region.contains(&a.point))
                .cloned()
                .collect(),
            components: Vec::new(),
            budget: self.budget,
        };
        for c in &self.components {
            match region.place_ball(&c.center, c.radius) {
                Placement::Inside => out.components.push(c.clone()),
                Placement::Outside => {}
                Placement::Straddles => {
                    return Err(Error::StraddlingComponent {
                        center: c.center.coords().to_vec(),
                        radius: c.radius,
                    })
                }
            }
        }
        Ok(out)
    }

    pub fn ball_mass(&self, q: &BallQuery) -> Result<f64> {
        self.require_flat()?;
        let r2 = q.radius * q.radius;
        Ok(compensated_sum(
            self.atoms
                .iter()
                .filter(|a| a.point.dist_sq(&q.center) <= r2)
                .map(|a| a.weight),
        ))
    }

    /// `sum_i w_i f(x_i)` under extended-real arithmetic.
    pub fn integrate(&self, f: &TestFunction) -> Result<ExtendedReal> {
        self.require_flat()?;
        let mut acc = ExtSum::default();
        for a in &self.atoms {
            acc.push(f.eval(&a.point).scaled(a.weight));
        }
        acc.value().ok_or(Error::UndefinedIntegral)
    }

    /// Integral of a plain real function; non-finite samples are errors.
    pub fn integrate_fn(&self, f: impl Fn(&Point) -> f64) -> Result<f64> {
        self.require_flat()?;
        let mut acc = ExtSum::default();
        for a in &self.atoms {
            let v = f(&a.point);
            if !v.is_finite() {
                return Err(Error::NonFinite(a.point.coords().to_vec()));
            }
            acc.push(ExtendedReal::Finite(a.weight * v));
        }
        Ok(acc.value().and_then(|v| v.finite()).unwrap_or(f64::NAN))
    }

    /// Moves every atom by `map`; weights are kept. `None` from the map
    /// marks a point where it is undefined.
    pub fn pushforward(&self, map: impl Fn(&Point) -> Option<Point>) -> Result<DiscreteCharge> {
        self.require_flat()?;
        let mut out = DiscreteCharge::zero(self.dim)?;
        out.budget = self.budget;
        for a in &self.atoms {
            let p = map(&a.point).ok_or_else(|| {
                Error::Precondition(format!("map undefined at {:?}", a.point))
            })?;
            out.push_atom(Atom::new(p, a.weight))?;
        }
        Ok(out)
    }

    pub fn shifted(&self, v: &Point) -> Result<DiscreteCharge> {
        self.pushforward(|p| Some(p + v))
    }

    pub fn scaled(&self, s: f64) -> DiscreteCharge {
        DiscreteCharge {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.point.clone(), s * a.weight))
                .collect(),
            components: self
                .components
                .iter()
                .map(|c| c.with_total(s * c.total))
                .collect(),
            budget: s.abs() * self.budget,
        }
    }

    /// Largest `|x - center|` over atoms and component supports.
    pub fn support_radius(&self, center: &Point) -> f64 {
        let atoms = self.atoms.iter().map(|a| a.point.dist(center));
        let comps = self.components.iter().map(|c| c.center.dist(center) + c.radius);
        atoms.chain(comps).fold(0.0, f64::max)
    }

    /// Smallest signed distance from an atom to the boundary of `domain`.
    pub fn boundary_distance(&self, domain: &SetExpr) -> Result<f64> {
        self.require_flat()?;
        Ok(self
            .atoms
            .iter()
            .map(|a| domain.signed_distance(&a.point))
            .fold(f64::INFINITY, f64::min))
    }

    /// Diameter of the atomic support.
    pub fn support_diameter(&self) -> Result<f64> {
        self.require_flat()?;
        let mut diam: f64 = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                diam = diam.max(a.point.dist(&b.point));
            }
        }
        Ok(diam)
    }

    pub fn first_moment(&self) -> Result<Point> {
        self.require_flat()?;
        let coords = (0..self.dim)
            .map(|k| compensated_sum(self.atoms.iter().map(|a| a.weight * a.point[k])))
            .collect::<Vec<_>>();
        Ok(Point::from(coords))
    }
}

/// `a * b`: atoms `(x_i + y_j, w_i v_j)` over all pairs.
pub fn convolve(a: &DiscreteCharge, b: &DiscreteCharge) -> Result<DiscreteCharge> {
    a.require_flat()?;
    b.require_flat()?;
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let mut atoms = Vec::with_capacity(a.atoms.len() * b.atoms.len());
    for x in &a.atoms {
        for y in &b.atoms {
            atoms.push(Atom::new(&x.point + &y.point, x.weight * y.weight));
        }
    }
    let budget = a.budget * b.variation_mass() + b.budget * a.variation_mass();
    Ok(DiscreteCharge {
        dim: a.dim,
        atoms,
        components: Vec::new(),
        budget,
    })
}

/// Linear combination `sum_i c_i m_i`.
pub fn mix(parts: &[(f64, &DiscreteCharge)]) -> Result<DiscreteCharge> {
    let dim = parts
        .first()
        .map(|(_, m)| m.dim)
        .ok_or_else(|| Error::InvalidParameter("mix needs at least one part".into()))?;
    let mut out = DiscreteCharge::zero(dim)?;
    for (coef, m) in parts {
        if m.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.dim,
            });
        }
        let s = m.scaled(*coef);
        out.atoms.extend(s.atoms);
        out.components.extend(s.components);
        out.budget += s.budget;
    }
    Ok(out)
}

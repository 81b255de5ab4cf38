//! Points, balls, a small constructive set language, sphere inversion and
//! the dimensional constants of potential theory in `R^d`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A point of `R^d`. Coordinates are stored inline for `d <= 3`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(SmallVec<[f64; 3]>);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Point(SmallVec::from_slice(coords))
    }

    pub fn origin(d: usize) -> Self {
        Point(SmallVec::from_elem(0.0, d))
    }

    /// The `k`-th standard basis vector scaled by `t`.
    pub fn axis(d: usize, k: usize, t: f64) -> Self {
        let mut p = Self::origin(d);
        p.0[k] = t;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|c| c * s).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Lexicographic comparison under `f64::total_cmp`.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Add<&Point> for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&Point> for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(SmallVec::from_vec(v))
    }
}

/// Open or closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
    #[serde(default)]
    pub closed: bool,
}

impl Ball {
    pub fn new(center: Point, radius: f64, closed: bool) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter("ball center is not finite".into()));
        }
        Ok(Ball {
            center,
            radius,
            closed,
        })
    }

    pub fn open(center: Point, radius: f64) -> Self {
        Ball {
            center,
            radius,
            closed: false,
        }
    }

    pub fn closed(center: Point, radius: f64) -> Self {
        Ball {
            center,
            radius,
            closed: true,
        }
    }

    /// Unit ball of `R^d`.
    pub fn unit(d: usize) -> Self {
        Ball::open(Point::origin(d), 1.0)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        let r2 = self.center.dist_sq(p);
        if self.closed {
            r2 <= self.radius * self.radius
        } else {
            r2 < self.radius * self.radius
        }
    }
}

/// Where a ball-shaped support sits relative to a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Inside,
    Outside,
    Straddles,
}

/// Finite expression over balls describing open sets and compacts.
///
/// `Diff` removes every later argument from the first one. `Annulus` is the
/// closed shell `inner <= |x - center| <= outer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetExprRepr", into = "SetExprRepr")]
pub enum SetExpr {
    Ball(Ball),
    Union(Vec<SetExpr>),
    Diff(Vec<SetExpr>),
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SetExprRepr {
    Leaf {
        ball: Ball,
    },
    Shell {
        op: String,
        center: Point,
        inner: f64,
        outer: f64,
    },
    Node {
        op: String,
        args: Vec<SetExprRepr>,
    },
}

impl TryFrom<SetExprRepr> for SetExpr {
    type Error = String;

    fn try_from(repr: SetExprRepr) -> std::result::Result<Self, String> {
        match repr {
            SetExprRepr::Leaf { ball } => {
                if !(ball.radius > 0.0) {
                    return Err(format!("ball radius must be positive, got {}", ball.radius));
                }
                Ok(SetExpr::Ball(ball))
            }
            SetExprRepr::Shell {
                op,
                center,
                inner,
                outer,
            } => {
                if op != "annulus" {
                    return Err(format!("unknown shell op {op:?}"));
                }
                if !(inner >= 0.0 && outer > inner) {
                    return Err(format!("bad annulus radii {inner}, {outer}"));
                }
                Ok(SetExpr::Annulus {
                    center,
                    inner,
                    outer,
                })
            }
            SetExprRepr::Node { op, args } => {
                let args = args
                    .into_iter()
                    .map(SetExpr::try_from)
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                match op.as_str() {
                    "union" => Ok(SetExpr::Union(args)),
                    "diff" => {
                        if args.is_empty() {
                            Err("diff needs at least one argument".into())
                        } else {
                            Ok(SetExpr::Diff(args))
                        }
                    }
                    other => Err(format!("unknown set op {other:?}")),
                }
            }
        }
    }
}

impl From<SetExpr> for SetExprRepr {
    fn from(e: SetExpr) -> Self {
        match e {
            SetExpr::Ball(ball) => SetExprRepr::Leaf { ball },
            SetExpr::Union(args) => SetExprRepr::Node {
                op: "union".into(),
                args: args.into_iter().map(Into::into).collect(),
            },
            SetExpr::Diff(args) => SetExprRepr::Node {
                op: "diff".into(),
                args: args.into_iter().map(Into::into).collect(),
            },
            SetExpr::Annulus {
                center,
                inner,
                outer,
            } => SetExprRepr::Shell {
                op: "annulus".into(),
                center,
                inner,
                outer,
            },
        }
    }
}

impl SetExpr {
    pub fn empty() -> Self {
        SetExpr::Union(Vec::new())
    }

    pub fn ball(center: Point, radius: f64, closed: bool) -> Self {
        SetExpr::Ball(Ball {
            center,
            radius,
            closed,
        })
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            SetExpr::Ball(b) => b.contains(p),
            SetExpr::Union(args) => args.iter().any(|a| a.contains(p)),
            SetExpr::Diff(args) => {
                args[0].contains(p) && !args[1..].iter().any(|a| a.contains(p))
            }
            SetExpr::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = center.dist(p);
                *inner <= r && r <= *outer
            }
        }
    }

    /// Conservative lower bound on the distance from `p` to the boundary,
    /// signed positive inside. Exact for single balls and annuli.
    pub fn signed_distance(&self, p: &Point) -> f64 {
        match self {
            SetExpr::Ball(b) => b.radius - b.center.dist(p),
            SetExpr::Union(args) => args
                .iter()
                .map(|a| a.signed_distance(p))
                .fold(f64::NEG_INFINITY, f64::max),
            SetExpr::Diff(args) => args[1..]
                .iter()
                .map(|a| -a.signed_distance(p))
                .fold(args[0].signed_distance(p), f64::min),
            SetExpr::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = center.dist(p);
                (outer - r).min(r - inner)
            }
        }
    }

    /// Classifies the closed ball `B(center, radius)` against the set. The
    /// answer `Straddles` is also returned when the test is inconclusive.
    pub fn place_ball(&self, center: &Point, radius: f64) -> Placement {
        match self {
            SetExpr::Ball(b) => {
                let s = b.center.dist(center);
                if s + radius <= b.radius {
                    Placement::Inside
                } else if s >= b.radius + radius {
                    Placement::Outside
                } else {
                    Placement::Straddles
                }
            }
            SetExpr::Union(args) => {
                let places: Vec<_> = args.iter().map(|a| a.place_ball(center, radius)).collect();
                if places.contains(&Placement::Inside) {
                    Placement::Inside
                } else if places.iter().all(|p| *p == Placement::Outside) {
                    Placement::Outside
                } else {
                    Placement::Straddles
                }
            }
            SetExpr::Diff(args) => {
                let head = args[0].place_ball(center, radius);
                let rest: Vec<_> = args[1..]
                    .iter()
                    .map(|a| a.place_ball(center, radius))
                    .collect();
                if head == Placement::Outside || rest.contains(&Placement::Inside) {
                    Placement::Outside
                } else if head == Placement::Inside && rest.iter().all(|p| *p == Placement::Outside)
                {
                    Placement::Inside
                } else {
                    Placement::Straddles
                }
            }
            SetExpr::Annulus {
                center: c,
                inner,
                outer,
            } => {
                let s = c.dist(center);
                if s - radius >= *inner && s + radius <= *outer {
                    Placement::Inside
                } else if s + radius < *inner || s - radius > *outer {
                    Placement::Outside
                } else {
                    Placement::Straddles
                }
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` of the set, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            SetExpr::Ball(b) => Some(ball_box(&b.center, b.radius)),
            SetExpr::Annulus { center, outer, .. } => Some(ball_box(center, *outer)),
            SetExpr::Union(args) => args
                .iter()
                .filter_map(|a| a.bounding_box())
                .reduce(|(lo1, hi1), (lo2, hi2)| {
                    let lo = lo1.coords().iter().zip(lo2.coords()).map(|(a, b)| a.min(*b));
                    let hi = hi1.coords().iter().zip(hi2.coords()).map(|(a, b)| a.max(*b));
                    (Point(lo.collect()), Point(hi.collect()))
                }),
            SetExpr::Diff(args) => args[0].bounding_box(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SetExpr::Ball(b) => Some(b.dim()),
            SetExpr::Annulus { center, .. } => Some(center.dim()),
            SetExpr::Union(args) | SetExpr::Diff(args) => args.iter().find_map(|a| a.dim()),
        }
    }
}

fn ball_box(center: &Point, r: f64) -> (Point, Point) {
    (
        Point(center.coords().iter().map(|c| c - r).collect()),
        Point(center.coords().iter().map(|c| c + r).collect()),
    )
}

/// Inversion in the unit sphere centered at `o`.
pub fn invert(p: &Point, o: &Point) -> Result<Point> {
    check_same_dim(p, o)?;
    let v = p - o;
    let r2 = v.norm_sq();
    if r2 == 0.0 {
        return Err(Error::PoleAtCenter);
    }
    Ok(o + &v.scale(1.0 / r2))
}

/// Value of the Kelvin transform of `u` at `invert(x, o)`, given `u(x)`.
pub fn kelvin_value(u_at_x: f64, x: &Point, o: &Point, d: usize) -> Result<f64> {
    check_same_dim(x, o)?;
    let r = x.dist(o);
    if r == 0.0 {
        return Err(Error::PoleAtCenter);
    }
    Ok(r.powi(d as i32 - 2) * u_at_x)
}

fn check_same_dim(a: &Point, b: &Point) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Surface area `s`, ball volumes `b[p]` for `p = 0..=d`, and the Riesz
/// normalization `c` in dimension `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimConstants {
    pub d: usize,
    pub s: f64,
    pub b: Vec<f64>,
    pub c: f64,
}

/// `Gamma(k/2)` for a positive integer `k`, by the half-integer recursion.
pub(crate) fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    let (mut g, mut x) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Area of the unit sphere in `R^p`, i.e. `2 pi^{p/2} / Gamma(p/2)`.
pub fn sphere_area(p: usize) -> f64 {
    2.0 * PI.powf(p as f64 / 2.0) / gamma_half(p)
}

pub fn constants(d: usize) -> Result<DimConstants> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    let s = sphere_area(d);
    let b = (0..=d)
        .map(|p| if p == 0 { 0.0 } else { sphere_area(p) / p as f64 })
        .collect();
    let c = 1.0 / (s * (1.0 + (d as f64 - 3.0).max(0.0)));
    Ok(DimConstants { d, s, b, c })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c)
    }

    #[test]
    fn inversion_examples() {
        let o3 = Point::origin(3);
        assert_eq!(invert(&p(&[2.0, 0.0, 0.0]), &o3).unwrap(), p(&[0.5, 0.0, 0.0]));
        let o2 = Point::origin(2);
        assert_eq!(invert(&p(&[1.0, 0.0]), &o2).unwrap(), p(&[1.0, 0.0]));
        let back = invert(&invert(&p(&[0.3, 0.4]), &o2).unwrap(), &o2).unwrap();
        assert!(back.dist(&p(&[0.3, 0.4])) < 1e-15);
        assert_eq!(invert(&o2, &o2), Err(Error::PoleAtCenter));
    }

    #[test]
    fn kelvin_examples() {
        let o = Point::origin(2);
        assert_eq!(kelvin_value(5.0, &p(&[0.3, -2.0]), &o, 2).unwrap(), 5.0);
        let o3 = Point::origin(3);
        assert_eq!(kelvin_value(1.0, &p(&[2.0, 0.0, 0.0]), &o3, 3).unwrap(), 2.0);
        assert!(kelvin_value(1.0, &o3, &o3, 3).is_err());
    }

    #[test]
    fn constants_match_closed_forms() {
        let c2 = constants(2).unwrap();
        assert!((c2.s - 2.0 * PI).abs() < 1e-14);
        assert!((c2.c - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((c2.b[2] - PI).abs() < 1e-14);
        assert_eq!(c2.b[0], 0.0);
        assert!((c2.b[1] - 2.0).abs() < 1e-15);
        let c3 = constants(3).unwrap();
        assert!((c3.s - 4.0 * PI).abs() < 1e-14);
        assert!((c3.c - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((c3.b[3] - 4.0 * PI / 3.0).abs() < 1e-14);
        let c4 = constants(4).unwrap();
        assert!((c4.s - 2.0 * PI * PI).abs() < 1e-13);
        assert!((c4.c - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert_eq!(constants(1), Err(Error::BadDimension(1)));
    }

    #[test]
    fn normalization_identity_across_dimensions() {
        for d in 2..=9 {
            let k = constants(d).unwrap();
            let prod = k.c * k.s * (d as f64 - 2.0).max(1.0);
            assert!((prod - 1.0).abs() < 1e-12, "d={d}: {prod}");
        }
    }

    #[test]
    fn gamma_half_integers() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(3) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
    }

    #[test]
    fn set_expr_json_shape() {
        let json = r#"{"op":"diff","args":[
            {"ball":{"center":[0,0],"radius":1,"closed":false}},
            {"op":"union","args":[{"ball":{"center":[0.5,0],"radius":0.1,"closed":true}}]}
        ]}"#;
        let e: SetExpr = serde_json::from_str(json).unwrap();
        assert!(e.contains(&p(&[0.0, 0.0])));
        assert!(!e.contains(&p(&[0.55, 0.0])));
        assert!(!e.contains(&p(&[0.6, 0.0])));
        assert!(e.contains(&p(&[0.61, 0.0])));
        let round: SetExpr =
            serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(round, e);
        assert!(serde_json::from_str::<SetExpr>(r#"{"op":"xor","args":[]}"#).is_err());
    }

    #[test]
    fn ball_placement() {
        let e = SetExpr::Diff(vec![
            SetExpr::ball(Point::origin(2), 1.0, false),
            SetExpr::ball(p(&[0.5, 0.0]), 0.1, false),
        ]);
        assert_eq!(e.place_ball(&p(&[-0.5, 0.0]), 0.2), Placement::Inside);
        assert_eq!(e.place_ball(&p(&[0.5, 0.0]), 0.05), Placement::Outside);
        assert_eq!(e.place_ball(&p(&[0.5, 0.0]), 0.2), Placement::Straddles);
        assert_eq!(e.place_ball(&p(&[3.0, 0.0]), 0.2), Placement::Outside);
    }

    #[test]
    fn signed_distance_of_annulus() {
        let a = SetExpr::Annulus {
            center: Point::origin(2),
            inner: 0.45,
            outer: 0.55,
        };
        assert!((a.signed_distance(&p(&[0.5, 0.0])) - 0.05).abs() < 1e-15);
        assert!(a.signed_distance(&p(&[0.2, 0.0])) < 0.0);
    }
}

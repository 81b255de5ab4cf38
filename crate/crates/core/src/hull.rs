//! Grid model of holes and the inward-filled hull.
//!
//! Sets are rasterized onto a box of cubic cells (a cell belongs to the set
//! when its center does). Connectivity is face adjacency (`2d` neighbours)
//! for the set and for its complement alike. The box boundary stands in for
//! the point at infinity, which is only sound because every set is bounded
//! and strictly inside the box.

use std::collections::VecDeque;
use std::fmt::Write as _;

use base64::Engine as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Point, SetExpr};

pub const CONNECTIVITY: &str = "face";

/// Bit array over a box `lo + [0, dims] * h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMask {
    lo: Vec<f64>,
    h: f64,
    dims: Vec<usize>,
    bits: Vec<bool>,
}

impl GridMask {
    pub fn empty(lo: &[f64], h: f64, dims: &[usize]) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("cell size must be positive, got {h}")));
        }
        if lo.len() != dims.len() || dims.contains(&0) {
            return Err(Error::InvalidParameter("grid needs one positive extent per axis".into()));
        }
        Ok(GridMask {
            lo: lo.to_vec(),
            h,
            dims: dims.to_vec(),
            bits: vec![false; dims.iter().product()],
        })
    }

    /// A grid of cell size `h` covering `[lo, hi]`.
    pub fn covering(lo: &Point, hi: &Point, h: f64) -> Result<Self> {
        let dims: Vec<usize> = lo
            .coords()
            .iter()
            .zip(hi.coords())
            .map(|(a, b)| ((b - a) / h).ceil().max(1.0) as usize)
            .collect();
        GridMask::empty(lo.coords(), h, &dims)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.dims)
            .map(|(l, &n)| l + n as f64 * self.h)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Lebesgue measure of the selected cells.
    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.h.powi(self.dim() as i32)
    }

    /// Multi-index of cell `i`; the last axis varies fastest.
    pub fn index(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = i % self.dims[k];
            i /= self.dims[k];
        }
        out
    }

    pub fn center(&self, i: usize) -> Point {
        let idx = self.index(i);
        Point::from(
            idx.iter()
                .zip(&self.lo)
                .map(|(&j, l)| l + (j as f64 + 0.5) * self.h)
                .collect::<Vec<_>>(),
        )
    }

    fn stride(&self, k: usize) -> usize {
        self.dims[k + 1..].iter().product()
    }

    /// Face neighbours of cell `i`, and whether it lies on the box boundary.
    fn neighbours(&self, i: usize, out: &mut Vec<usize>) -> bool {
        out.clear();
        let idx = self.index(i);
        let mut boundary = false;
        for (k, &ik) in idx.iter().enumerate() {
            let s = self.stride(k);
            if ik == 0 {
                boundary = true;
            } else {
                out.push(i - s);
            }
            if ik + 1 == self.dims[k] {
                boundary = true;
            } else {
                out.push(i + s);
            }
        }
        boundary
    }

    fn same_grid(&self, other: &GridMask) -> Result<()> {
        if self.lo == other.lo && self.h == other.h && self.dims == other.dims {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &GridMask, f: impl Fn(bool, bool) -> bool) -> Result<GridMask> {
        self.same_grid(other)?;
        Ok(GridMask {
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone()
        })
    }

    pub fn and(&self, other: &GridMask) -> Result<GridMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &GridMask) -> Result<GridMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn minus(&self, other: &GridMask) -> Result<GridMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> GridMask {
        GridMask {
            bits: self.bits.iter().map(|b| !b).collect(),
            ..self.clone()
        }
    }

    /// Whether every selected cell is also selected in `other`.
    pub fn is_subset(&self, other: &GridMask) -> Result<bool> {
        Ok(self.minus(other)?.count() == 0)
    }

    /// Whether a selected cell lies on the box boundary.
    pub fn touches_box(&self) -> bool {
        let mut nb = Vec::new();
        (0..self.len()).any(|i| self.bits[i] && self.neighbours(i, &mut nb))
    }

    /// Mask of cells within `radius` of one of `points`.
    pub fn from_points(like: &GridMask, points: &[Point], radius: f64) -> GridMask {
        let mut out = GridMask {
            bits: vec![false; like.len()],
            ..like.clone()
        };
        let r2 = radius * radius;
        for i in 0..out.len() {
            let c = out.center(i);
            if points.iter().any(|p| p.dist_sq(&c) <= r2) {
                out.bits[i] = true;
            }
        }
        out
    }

    /// `{"box":{"lo","hi"},"h","dims","connectivity","rows"}` where every
    /// row is a line along the last axis packed most significant bit first
    /// and base64 encoded.
    pub fn to_json(&self) -> serde_json::Value {
        let row_len = *self.dims.last().expect("non-empty grid");
        let rows: Vec<String> = self
            .bits
            .chunks(row_len)
            .map(|row| {
                let mut bytes = vec![0u8; row_len.div_ceil(8)];
                for (j, &b) in row.iter().enumerate() {
                    if b {
                        bytes[j / 8] |= 0x80 >> (j % 8);
                    }
                }
                base64::engine::general_purpose::STANDARD.encode(bytes)
            })
            .collect();
        serde_json::json!({
            "box": {"lo": self.lo, "hi": self.hi()},
            "h": self.h,
            "dims": self.dims,
            "connectivity": CONNECTIVITY,
            "rows": rows,
        })
    }

    /// Inverse of [`GridMask::to_json`].
    pub fn from_json(v: &serde_json::Value) -> Result<GridMask> {
        let bad = |what: &str| Error::InvalidParameter(format!("mask JSON: {what}"));
        let lo: Vec<f64> = serde_json::from_value(v["box"]["lo"].clone()).map_err(|_| bad("box.lo"))?;
        let h = v["h"].as_f64().ok_or_else(|| bad("h"))?;
        let dims: Vec<usize> = serde_json::from_value(v["dims"].clone()).map_err(|_| bad("dims"))?;
        let mut out = GridMask::empty(&lo, h, &dims)?;
        let row_len = *dims.last().expect("checked by empty");
        let rows = v["rows"].as_array().ok_or_else(|| bad("rows"))?;
        if rows.len() * row_len != out.len() {
            return Err(bad("row count"));
        }
        for (r, row) in rows.iter().enumerate() {
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(row.as_str().ok_or_else(|| bad("row"))?)
                .map_err(|_| bad("base64"))?;
            if bytes.len() != row_len.div_ceil(8) {
                return Err(bad("row length"));
            }
            for j in 0..row_len {
                out.bits[r * row_len + j] = bytes[j / 8] & (0x80 >> (j % 8)) != 0;
            }
        }
        Ok(out)
    }

    /// Cell centers of the selected cells, one per line, with a header.
    pub fn to_csv(&self) -> String {
        let axes = ["x", "y", "z", "w"];
        let header: Vec<String> = (0..self.dim())
            .map(|k| axes.get(k).map_or(format!("x{k}"), |s| s.to_string()))
            .collect();
        let mut out = header.join(",");
        out.push('\n');
        for i in (0..self.len()).filter(|&i| self.bits[i]) {
            let c = self.center(i);
            let line: Vec<String> = c.coords().iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// Cells whose centers lie in `s`.
pub fn rasterize(s: &SetExpr, lo: &Point, hi: &Point, h: f64) -> Result<GridMask> {
    let mut m = GridMask::covering(lo, hi, h)?;
    for i in 0..m.len() {
        m.bits[i] = s.contains(&m.center(i));
    }
    Ok(m)
}

/// Bounding box of `s` padded by `pad` cells on every side, so the set sits
/// strictly inside the grid.
pub fn padded_box(s: &SetExpr, h: f64, pad: usize) -> Result<(Point, Point)> {
    let (lo, hi) = s
        .bounding_box()
        .ok_or_else(|| Error::InvalidParameter("cannot size a grid for an empty set".into()))?;
    let m = pad as f64 * h;
    Ok((
        Point::from(lo.coords().iter().map(|v| v - m).collect::<Vec<_>>()),
        Point::from(hi.coords().iter().map(|v| v + m).collect::<Vec<_>>()),
    ))
}

/// Face-connected components labelled `1..=count` in scan order; `0`
/// marks unselected cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub labels: Vec<u32>,
    pub count: usize,
}

impl Components {
    pub fn mask(&self, like: &GridMask, label: u32) -> GridMask {
        GridMask {
            bits: self.labels.iter().map(|&l| l == label).collect(),
            ..like.clone()
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }
}

pub fn components(m: &GridMask) -> Components {
    let mut labels = vec![0u32; m.len()];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    let mut nb = Vec::new();
    for start in 0..m.len() {
        if !m.bits[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            m.neighbours(i, &mut nb);
            for &j in &nb {
                if m.bits[j] && labels[j] == 0 {
                    labels[j] = count;
                    queue.push_back(j);
                }
            }
        }
    }
    Components {
        labels,
        count: count as usize,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullReport {
    #[serde(skip)]
    pub hull: GridMask,
    pub hull_cells: usize,
    pub hull_volume: f64,
    pub hole_count: usize,
    pub hole_sizes: Vec<usize>,
    /// Components of `O \ K`.
    pub gap_components: usize,
    /// Components of the complement of the hull inside the box.
    pub complement_components: usize,
    pub algorithms_agree: bool,
    pub connectivity: &'static str,
}

/// Whether cell `i` of `gap` touches the outside of `o` or the box boundary.
fn escapes(o: &GridMask, i: usize, nb: &mut Vec<usize>) -> bool {
    let boundary = o.neighbours(i, nb);
    boundary || nb.iter().any(|&j| !o.bits[j])
}

/// Inward-filled hull of `k` in `o`, computed twice: as `K` plus the holes
/// (components of `O \ K` that touch neither the outside of `O` nor the box
/// boundary), and as `O` minus everything of `O \ K` reachable from such
/// touching cells. Disagreement is an error.
pub fn inward_filled_hull(o: &GridMask, k: &GridMask) -> Result<HullReport> {
    o.same_grid(k)?;
    if !k.is_subset(o)? {
        return Err(Error::Precondition("K is not contained in O".into()));
    }
    let gap = o.minus(k)?;
    let mut nb = Vec::new();

    // by holes
    let comps = components(&gap);
    let mut open = vec![false; comps.count + 1];
    for i in 0..gap.len() {
        let l = comps.labels[i] as usize;
        if l > 0 && !open[l] && escapes(o, i, &mut nb) {
            open[l] = true;
        }
    }
    let mut by_holes = k.clone();
    let mut hole_sizes = vec![0usize; comps.count + 1];
    for i in 0..gap.len() {
        let l = comps.labels[i] as usize;
        if l > 0 && !open[l] {
            by_holes.bits[i] = true;
            hole_sizes[l] += 1;
        }
    }
    let hole_sizes: Vec<usize> = (1..=comps.count).filter(|&l| !open[l]).map(|l| hole_sizes[l]).collect();

    // by flooding from the outside
    let mut reached = vec![false; gap.len()];
    let mut queue = VecDeque::new();
    for (i, r) in reached.iter_mut().enumerate() {
        if gap.bits[i] && escapes(o, i, &mut nb) {
            *r = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        gap.neighbours(i, &mut nb);
        for &j in &nb {
            if gap.bits[j] && !reached[j] {
                reached[j] = true;
                queue.push_back(j);
            }
        }
    }
    let by_flood = GridMask {
        bits: o.bits.iter().zip(&reached).map(|(&a, &r)| a && !r).collect(),
        ..o.clone()
    };

    let disagreement = by_holes.bits.iter().zip(&by_flood.bits).filter(|(a, b)| a != b).count();
    if disagreement > 0 {
        return Err(Error::HullDisagreement(disagreement));
    }
    let complement_components = components(&by_holes.complement()).count;
    Ok(HullReport {
        hull_cells: by_holes.count(),
        hull_volume: by_holes.volume(),
        hole_count: hole_sizes.len(),
        hole_sizes,
        gap_components: comps.count,
        complement_components,
        algorithms_agree: true,
        connectivity: CONNECTIVITY,
        hull: by_holes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KocReport {
    /// The hull lies in `O` and away from the box boundary.
    pub compact_in_o: bool,
    /// `hull_O K` is contained in `hull_O' K` cell by cell.
    pub monotone: bool,
    pub complement_components: usize,
    pub expected_components: Option<usize>,
    pub census_ok: bool,
    pub idempotent: bool,
}

impl KocReport {
    pub fn pass(&self) -> bool {
        self.compact_in_o && self.monotone && self.census_ok && self.idempotent
    }
}

/// Checks containment and boundedness of the hull, monotonicity in the
/// ambient set, the complement census and idempotence.
pub fn koc_check(
    o: &GridMask,
    o_big: &GridMask,
    k: &GridMask,
    expected_components: Option<usize>,
) -> Result<KocReport> {
    if !o.is_subset(o_big)? {
        return Err(Error::Precondition("O is not contained in the larger set".into()));
    }
    let small = inward_filled_hull(o, k)?;
    let big = inward_filled_hull(o_big, k)?;
    let again = inward_filled_hull(o, &small.hull)?;
    Ok(KocReport {
        compact_in_o: small.hull.is_subset(o)? && !small.hull.touches_box(),
        monotone: small.hull.is_subset(&big.hull)?,
        complement_components: small.complement_components,
        expected_components,
        census_ok: expected_components.is_none_or(|n| n == small.complement_components),
        idempotent: again.hull == small.hull && again.hole_count == 0,
    })
}

/// A seeded random pair `(O, K)` of planar or spatial sets: `O` a union of
/// up to three balls, `K` a union of shells and balls placed inside `O`.
pub fn random_scene(seed: u64, d: usize) -> (SetExpr, SetExpr) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_point = |rng: &mut ChaCha8Rng, s: f64| {
        Point::from((0..d).map(|_| rng.random_range(-s..s)).collect::<Vec<_>>())
    };
    let n_o = rng.random_range(1..=3);
    let mut o_parts = Vec::new();
    let mut k_parts = Vec::new();
    for _ in 0..n_o {
        let c = rand_point(&mut rng, 0.5);
        let r = rng.random_range(0.4..0.9);
        o_parts.push(SetExpr::ball(c.clone(), r, false));
        let inner = rng.random_range(0.1..0.5) * r;
        let width = rng.random_range(0.08..0.25) * r;
        let offset = rand_point(&mut rng, 0.1 * r);
        let kc = &c + &offset;
        if rng.random_bool(0.75) {
            k_parts.push(SetExpr::Annulus {
                center: kc,
                inner,
                outer: inner + width,
            });
        } else {
            k_parts.push(SetExpr::ball(kc, inner, true));
        }
    }
    let o = SetExpr::Union(o_parts);
    (o, SetExpr::Union(k_parts))
}

/// Runs both hull algorithms on `count` seeded scenes; returns the number
/// of scenes on which they disagree.
pub fn random_scene_disagreements(count: usize, seed: u64, d: usize, h: f64) -> Result<usize> {
    let outcomes = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let (o, k) = random_scene(seed.wrapping_add(i), d);
            let (lo, hi) = padded_box(&o, h, 2)?;
            let om = rasterize(&o, &lo, &hi, h)?;
            let km = rasterize(&k, &lo, &hi, h)?.and(&om)?;
            match inward_filled_hull(&om, &km) {
                Ok(_) => Ok(0),
                Err(Error::HullDisagreement(_)) => Ok(1),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(outcomes.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(c: &[f64]) -> Point {
        Point::new(c)
    }

    fn unit_box(d: usize, half: f64) -> (Point, Point) {
        (Point::from(vec![-half; d]), Point::from(vec![half; d]))
    }

    fn shell(inner: f64, outer: f64) -> SetExpr {
        SetExpr::Annulus {
            center: Point::origin(2),
            inner,
            outer,
        }
    }

    #[test]
    fn rasterized_disk_area() {
        let (lo, hi) = unit_box(2, 1.1);
        let m = rasterize(&SetExpr::ball(Point::origin(2), 1.0, false), &lo, &hi, 0.01).unwrap();
        let expected = PI * 1e4;
        assert!((m.count() as f64 - expected).abs() < 0.02 * expected);
        assert_eq!(rasterize(&SetExpr::empty(), &lo, &hi, 0.01).unwrap().count(), 0);
    }

    #[test]
    fn component_counts() {
        let (lo, hi) = unit_box(2, 1.1);
        let h = 0.02;
        let two = SetExpr::Union(vec![
            SetExpr::ball(p(&[-0.5, 0.0]), 0.3, false),
            SetExpr::ball(p(&[0.5, 0.0]), 0.3, false),
        ]);
        assert_eq!(components(&rasterize(&two, &lo, &hi, h).unwrap()).count, 2);
        assert_eq!(components(&rasterize(&shell(0.4, 0.6), &lo, &hi, h).unwrap()).count, 1);
        // ball minus a diametral slab three cells wide
        let disk = rasterize(&SetExpr::ball(Point::origin(2), 0.8, false), &lo, &hi, h).unwrap();
        let mut cut = disk.clone();
        for i in 0..cut.len() {
            if cut.center(i)[0].abs() < 1.5 * h {
                cut.set(i, false);
            }
        }
        let c = components(&cut);
        assert_eq!(c.count, 2);
        assert_eq!(c.labels.iter().find(|&&l| l > 0), Some(&1));
    }

    #[test]
    fn shell_hull_is_filled_disk() {
        let h = 1.0 / 128.0;
        let (lo, hi) = unit_box(2, 1.0 + 2.0 * h);
        let o = rasterize(&SetExpr::ball(Point::origin(2), 1.0, false), &lo, &hi, h).unwrap();
        let k = rasterize(&shell(0.45, 0.55), &lo, &hi, h).unwrap();
        let r = inward_filled_hull(&o, &k).unwrap();
        assert_eq!(r.hole_count, 1);
        assert_eq!(r.gap_components, 2);
        let filled = rasterize(&SetExpr::ball(Point::origin(2), 0.55, true), &lo, &hi, h).unwrap();
        assert_eq!(r.hull, filled);
        assert_eq!(r.complement_components, 1);
    }

    #[test]
    fn no_holes_means_hull_is_k() {
        let h = 1.0 / 64.0;
        let (lo, hi) = unit_box(2, 1.1);
        let o = rasterize(&SetExpr::ball(Point::origin(2), 1.0, false), &lo, &hi, h).unwrap();
        let k = rasterize(&SetExpr::ball(p(&[0.2, 0.1]), 0.2, true), &lo, &hi, h).unwrap();
        let r = inward_filled_hull(&o, &k).unwrap();
        assert_eq!(r.hull, k);
        assert_eq!(r.hole_count, 0);
    }

    #[test]
    fn nested_shells_have_two_holes() {
        let h = 1.0 / 128.0;
        let (lo, hi) = unit_box(2, 1.1);
        let o = rasterize(&SetExpr::ball(Point::origin(2), 1.0, false), &lo, &hi, h).unwrap();
        let k = rasterize(&SetExpr::Union(vec![shell(0.2, 0.3), shell(0.6, 0.7)]), &lo, &hi, h).unwrap();
        let r = inward_filled_hull(&o, &k).unwrap();
        assert_eq!(r.hole_count, 2);
        let filled = rasterize(&SetExpr::ball(Point::origin(2), 0.7, true), &lo, &hi, h).unwrap();
        assert_eq!(r.hull, filled);
    }

    #[test]
    fn koc_properties_on_shell() {
        let h = 1.0 / 64.0;
        let (lo, hi) = unit_box(2, 2.1);
        let o = rasterize(&SetExpr::ball(Point::origin(2), 1.0, false), &lo, &hi, h).unwrap();
        let big = rasterize(&SetExpr::ball(Point::origin(2), 2.0, false), &lo, &hi, h).unwrap();
        let k = rasterize(&shell(0.45, 0.55), &lo, &hi, h).unwrap();
        let r = koc_check(&o, &big, &k, Some(1)).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(koc_check(&big, &o, &k, None).is_err());
    }

    #[test]
    fn shell_touching_the_boundary_of_o_is_not_a_hole() {
        // K cuts O into an inner disk and an outer ring; only the disk is a hole
        let h = 1.0 / 64.0;
        let (lo, hi) = unit_box(2, 1.1);
        let o = rasterize(&SetExpr::ball(Point::origin(2), 1.0, false), &lo, &hi, h).unwrap();
        let k = rasterize(&shell(0.5, 0.6), &lo, &hi, h).unwrap();
        let r = inward_filled_hull(&o, &k).unwrap();
        assert_eq!(r.gap_components, 2);
        assert_eq!(r.hole_count, 1);
    }

    #[test]
    fn grid_mismatch_and_precondition() {
        let (lo, hi) = unit_box(2, 1.0);
        let a = rasterize(&SetExpr::ball(Point::origin(2), 0.5, false), &lo, &hi, 0.1).unwrap();
        let b = rasterize(&SetExpr::ball(Point::origin(2), 0.5, false), &lo, &hi, 0.05).unwrap();
        assert_eq!(inward_filled_hull(&a, &b).unwrap_err(), Error::GridMismatch);
        let big = rasterize(&SetExpr::ball(Point::origin(2), 0.9, false), &lo, &hi, 0.1).unwrap();
        assert!(matches!(inward_filled_hull(&a, &big), Err(Error::Precondition(_))));
    }

    #[test]
    fn json_round_trip_and_csv() {
        let (lo, hi) = unit_box(2, 1.0);
        let m = rasterize(&shell(0.3, 0.6), &lo, &hi, 0.1).unwrap();
        let v = m.to_json();
        assert_eq!(v["connectivity"], "face");
        assert_eq!(v["rows"].as_array().unwrap().len(), 20);
        assert_eq!(GridMask::from_json(&v).unwrap(), m);
        let csv = m.to_csv();
        assert!(csv.starts_with("x,y\n"));
        assert_eq!(csv.lines().count(), m.count() + 1);
    }

    #[test]
    fn three_dimensional_shell() {
        let h = 1.0 / 24.0;
        let (lo, hi) = unit_box(3, 1.1);
        let o = rasterize(&SetExpr::ball(Point::origin(3), 1.0, false), &lo, &hi, h).unwrap();
        let shell3 = SetExpr::Annulus {
            center: Point::origin(3),
            inner: 0.4,
            outer: 0.6,
        };
        let k = rasterize(&shell3, &lo, &hi, h).unwrap();
        let r = inward_filled_hull(&o, &k).unwrap();
        assert_eq!(r.hole_count, 1);
    }

    #[test]
    fn random_scenes_agree() {
        assert_eq!(random_scene_disagreements(20, 7, 2, 1.0 / 64.0).unwrap(), 0);
        assert_eq!(random_scene(3, 2), random_scene(3, 2));
    }

    #[test]
    fn hull_area_is_stable_under_refinement() {
        let area = |h: f64| {
            let (lo, hi) = unit_box(2, 1.0 + 2.0 * h);
            let o = rasterize(&SetExpr::ball(Point::origin(2), 1.0, false), &lo, &hi, h).unwrap();
            let k = rasterize(&shell(0.45, 0.55), &lo, &hi, h).unwrap();
            inward_filled_hull(&o, &k).unwrap().hull_volume
        };
        let (a, b) = (area(1.0 / 64.0), area(1.0 / 128.0));
        assert!((a - b).abs() < 0.05 * b);
    }
}

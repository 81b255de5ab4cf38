//! Multivariate polynomials over the monomial basis and the harmonic
//! subspace of polynomials of bounded degree.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Largest degree accepted by [`harmonic_poly_basis`].
pub const MAX_HARMONIC_DEGREE: usize = 12;

/// `sum_k coef_k * x^{exps_k}` in `d` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub d: usize,
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn from_terms(d: usize, terms: Vec<(Vec<u32>, f64)>) -> Self {
        Polynomial { d, terms }
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Polynomial {
            d,
            terms: vec![(vec![0; d], c)],
        }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(e, _)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.eval_slice(x.coords())
    }

    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Exact Laplacian, with like terms merged and zeros dropped.
    pub fn laplacian(&self) -> Polynomial {
        self.map_derivative(|e, out| {
            for i in 0..e.len() {
                if e[i] >= 2 {
                    let mut f = e.to_vec();
                    f[i] -= 2;
                    out.push((f, (e[i] * (e[i] - 1)) as f64));
                }
            }
        })
    }

    /// `sum_i d^4 p / dx_i^4`, the leading error term of the central stencil.
    pub fn fourth_derivative_sum(&self) -> Polynomial {
        self.map_derivative(|e, out| {
            for i in 0..e.len() {
                if e[i] >= 4 {
                    let mut f = e.to_vec();
                    f[i] -= 4;
                    let k = e[i];
                    out.push((f, (k * (k - 1) * (k - 2) * (k - 3)) as f64));
                }
            }
        })
    }

    fn map_derivative(&self, rule: impl Fn(&[u32], &mut Vec<(Vec<u32>, f64)>)) -> Polynomial {
        let mut acc: Vec<(Vec<u32>, f64)> = Vec::new();
        for (e, c) in &self.terms {
            let mut parts = Vec::new();
            rule(e, &mut parts);
            for (f, k) in parts {
                match acc.iter_mut().find(|(g, _)| *g == f) {
                    Some(slot) => slot.1 += c * k,
                    None => acc.push((f, c * k)),
                }
            }
        }
        acc.retain(|(_, c)| *c != 0.0);
        Polynomial {
            d: self.d,
            terms: acc,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == 0.0)
    }

    /// Sum of absolute coefficients; bounds `|p|` on the closed unit cube.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).sum()
    }
}

/// All exponent vectors of total degree `k` in `d` variables, graded
/// lexicographic with the first variable most significant.
pub fn monomials(d: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(d: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if d == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(d - 1, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, k as u32, &mut Vec::new(), &mut out);
    out
}

/// A basis of the harmonic polynomials of degree at most `max_degree`,
/// ordered by degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicBasis {
    pub d: usize,
    pub max_degree: usize,
    pub members: Vec<Polynomial>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Dimension of the homogeneous harmonic polynomials of degree `k`.
pub fn homogeneous_harmonic_dim(d: usize, k: usize) -> usize {
    let binom = |n: usize, r: usize| -> usize {
        if r > n {
            return 0;
        }
        (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    };
    let all = binom(k + d - 1, d - 1);
    if k < 2 {
        all
    } else {
        all - binom(k - 2 + d - 1, d - 1)
    }
}

fn basis_cache() -> &'static Mutex<HashMap<(usize, usize), HarmonicBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), HarmonicBasis>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Null space of `p -> Laplacian(p)` on polynomials of degree `<= n`,
/// computed degree by degree with exact rational elimination. Each member is
/// scaled so its largest coefficient has magnitude one.
pub fn harmonic_poly_basis(d: usize, n: usize) -> Result<HarmonicBasis> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    if n > MAX_HARMONIC_DEGREE {
        return Err(Error::DegreeTooLarge(n));
    }
    if let Some(b) = basis_cache().lock().unwrap().get(&(d, n)) {
        return Ok(b.clone());
    }
    let mut members = Vec::new();
    for k in 0..=n {
        members.extend(homogeneous_null_space(d, k));
    }
    let basis = HarmonicBasis {
        d,
        max_degree: n,
        members,
    };
    basis_cache().lock().unwrap().insert((d, n), basis.clone());
    Ok(basis)
}

fn homogeneous_null_space(d: usize, k: usize) -> Vec<Polynomial> {
    let cols = monomials(d, k);
    if k < 2 {
        return cols
            .into_iter()
            .map(|e| Polynomial::from_terms(d, vec![(e, 1.0)]))
            .collect();
    }
    let rows = monomials(d, k - 2);
    let row_index: HashMap<&[u32], usize> =
        rows.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
    let mut m = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
    for (j, e) in cols.iter().enumerate() {
        for i in 0..d {
            if e[i] >= 2 {
                let mut f = e.clone();
                f[i] -= 2;
                let r = row_index[f.as_slice()];
                m[r][j] += BigRational::from_integer(BigInt::from(e[i] * (e[i] - 1)));
            }
        }
    }
    let pivots = rref(&mut m);
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut out = Vec::new();
    for free in (0..cols.len()).filter(|c| !pivot_cols.contains(c)) {
        let mut coef = vec![BigRational::zero(); cols.len()];
        coef[free] = BigRational::one();
        for &(r, c) in &pivots {
            coef[c] = -m[r][free].clone();
        }
        let scale = coef
            .iter()
            .map(|c| c.abs())
            .max()
            .expect("non-empty column set");
        let terms = cols
            .iter()
            .zip(&coef)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e.clone(), (c / &scale).to_f64().unwrap_or(f64::NAN)))
            .collect();
        out.push(Polynomial::from_terms(d, terms));
    }
    out
}

/// Reduced row echelon form in place; returns `(row, column)` of pivots.
fn rref(m: &mut [Vec<BigRational>]) -> Vec<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (head, tail) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&mut b[0], &a[r])
                };
                for (x, y) in head.iter_mut().zip(tail.iter()) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(2, 3).len(), 4);
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(3, 2)[0], vec![2, 0, 0]);
    }

    #[test]
    fn small_bases() {
        let b = harmonic_poly_basis(2, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.members[0].eval_slice(&[0.3, 0.7]), 1.0);
        assert_eq!(harmonic_poly_basis(2, 2).unwrap().len(), 5);
        assert_eq!(harmonic_poly_basis(3, 2).unwrap().len(), 9);
        assert_eq!(harmonic_poly_basis(2, 13), Err(Error::DegreeTooLarge(13)));
        assert_eq!(harmonic_poly_basis(1, 2), Err(Error::BadDimension(1)));
    }

    #[test]
    fn degree_two_plane_basis_spans_known_members() {
        let b = harmonic_poly_basis(2, 2).unwrap();
        let quad: Vec<_> = b.members.iter().filter(|p| p.degree() == 2).collect();
        assert_eq!(quad.len(), 2);
        // each quadratic member is a combination of xy and x^2 - y^2
        for p in quad {
            let c = |e: [u32; 2]| {
                p.terms
                    .iter()
                    .find(|(f, _)| f.as_slice() == e)
                    .map_or(0.0, |(_, c)| *c)
            };
            assert_eq!(c([2, 0]), -c([0, 2]));
        }
    }

    #[test]
    fn members_are_symbolically_harmonic() {
        for d in 2..=4 {
            let b = harmonic_poly_basis(d, 8.min(12 - 2 * d)).unwrap();
            for p in &b.members {
                assert!(p.laplacian().coefficient_l1() < 1e-12, "{p:?}");
            }
        }
        let b = harmonic_poly_basis(3, 12).unwrap();
        assert!(b.members.iter().all(|p| p.laplacian().coefficient_l1() < 1e-12));
        assert_eq!(b.len(), 13 * 13);
    }

    #[test]
    fn homogeneous_dimension_formula() {
        assert_eq!(homogeneous_harmonic_dim(2, 0), 1);
        assert_eq!(homogeneous_harmonic_dim(2, 5), 2);
        assert_eq!(homogeneous_harmonic_dim(3, 4), 9);
        assert_eq!(homogeneous_harmonic_dim(4, 2), 9);
    }
}

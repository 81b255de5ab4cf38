//! Harmonic polynomial basis against linear-algebra oracles.

use approx::assert_abs_diff_eq;
use balayage_core::testfn::harmonic_poly_basis;
use balayage_core::Point;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exponent vectors of total degree `k` in `d` variables.
fn exponents(d: usize, k: usize) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![k as u32]];
    }
    let mut out = Vec::new();
    for a in (0..=k).rev() {
        for mut rest in exponents(d - 1, k - a) {
            rest.insert(0, a as u32);
            out.push(rest);
        }
    }
    out
}

/// `dim P_k - rank(Laplacian: P_k -> P_{k-2})`, by singular values.
fn harmonic_dim_oracle(d: usize, k: usize) -> usize {
    let src = exponents(d, k);
    if k < 2 {
        return src.len();
    }
    let dst = exponents(d, k - 2);
    let mut m = DMatrix::<f64>::zeros(dst.len(), src.len());
    for (j, e) in src.iter().enumerate() {
        for i in 0..d {
            if e[i] >= 2 {
                let mut t = e.clone();
                t[i] -= 2;
                let row = dst.iter().position(|x| *x == t).unwrap();
                m[(row, j)] += (e[i] * (e[i] - 1)) as f64;
            }
        }
    }
    src.len() - m.rank(1e-9)
}

#[test]
fn basis_sizes_match_the_laplacian_kernel() {
    for d in 2..=4 {
        for n in 0..=6 {
            let expected: usize = (0..=n).map(|k| harmonic_dim_oracle(d, k)).sum();
            assert_eq!(harmonic_poly_basis(d, n).unwrap().len(), expected, "d={d}, n={n}");
        }
    }
}

#[test]
fn basis_members_are_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in 2..=3 {
        let basis = harmonic_poly_basis(d, 6).unwrap();
        let samples: Vec<Vec<f64>> = (0..4 * basis.len())
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let m = DMatrix::from_fn(samples.len(), basis.len(), |i, j| basis.members[j].eval_slice(&samples[i]));
        assert_eq!(m.rank(1e-8), basis.len());
    }
}

#[test]
fn basis_members_have_the_mean_value_property() {
    let basis = harmonic_poly_basis(2, 8).unwrap();
    let c = [0.2, -0.1];
    let r = 0.7;
    let n = 64;
    for p in &basis.members {
        let mean = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                p.eval(&Point::new(&[c[0] + r * t.cos(), c[1] + r * t.sin()]))
            })
            .sum::<f64>()
            / n as f64;
        assert_abs_diff_eq!(mean, p.eval(&Point::new(&c)), epsilon = 1e-12);
    }
}

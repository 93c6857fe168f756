//! Shared test oracles.
#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use qssep_core::QssepConfig;

type Pair = (usize, usize);
type Linear = Vec<(Pair, f64)>;

/// Exact stationary second moments `E[G_ab G_cd]` of the continuous-time
/// dynamics on `L + 1` sites, from the closed linear equations they satisfy.
pub struct SecondMoments {
    n: usize,
    profile: Vec<f64>,
    index: HashMap<(Pair, Pair), usize>,
    values: DVector<f64>,
    generator: DMatrix<f64>,
}

fn key(p: Pair, q: Pair) -> (Pair, Pair) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

/// Phase symmetry: only `{a, c} = {b, d}` survives.
fn neutral(p: Pair, q: Pair) -> bool {
    let mut rows = [p.0, q.0];
    let mut cols = [p.1, q.1];
    rows.sort_unstable();
    cols.sort_unstable();
    rows == cols
}

impl SecondMoments {
    pub fn solve(cfg: &QssepConfig) -> Self {
        let n = cfg.sites();
        let d = cfg.d;
        let bounds = [(0, cfg.alpha0, cfg.beta0), (cfg.l, cfg.alpha_l, cfg.beta_l)];
        // Drift of G_ab: linear part and constant.
        let drift = |a: usize, b: usize| -> (Linear, f64) {
            let mut lin: Linear = Vec::new();
            let mut cst = 0.0;
            for e in 0..n - 1 {
                let (j, k) = (e, e + 1);
                // D (E_kj G E_jk + E_jk G E_kj) − D/2 (P G + G P)
                if a == k && b == k {
                    lin.push(((j, j), d));
                }
                if a == j && b == j {
                    lin.push(((k, k), d));
                }
                let pa = (a == j || a == k) as u8 as f64;
                let pb = (b == j || b == k) as u8 as f64;
                lin.push(((a, b), -0.5 * d * (pa + pb)));
            }
            for &(j, al, be) in &bounds {
                let hits = (a == j) as u8 as f64 + (b == j) as u8 as f64;
                lin.push(((a, b), -0.5 * (al + be) * hits));
                if a == j && b == j {
                    cst += al;
                }
            }
            (lin, cst)
        };
        // [E_kj, G]_ab and [E_jk, G]_ab.
        let comm = |e: usize, up: bool, a: usize, b: usize| -> Linear {
            let (j, k) = if up { (e, e + 1) } else { (e + 1, e) };
            let mut out = Vec::new();
            if a == k {
                out.push(((j, b), 1.0));
            }
            if b == j {
                out.push(((a, k), -1.0));
            }
            out
        };
        let mut keys = Vec::new();
        for a in 0..n {
            for c in 0..n {
                keys.push(key((a, a), (c, c)));
                if a != c {
                    keys.push(key((a, c), (c, a)));
                }
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let index: HashMap<_, _> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let m = keys.len();
        let mut mat = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        let profile = cfg.steady_profile();
        let mean = |p: Pair| if p.0 == p.1 { profile[p.0] } else { 0.0 };
        let add = |row: usize, p: Pair, q: Pair, c: f64, mat: &mut DMatrix<f64>| {
            if c == 0.0 {
                return;
            }
            let k = key(p, q);
            match index.get(&k) {
                Some(&col) => mat[(row, col)] += c,
                None => assert!(!neutral(p, q), "missing unknown {k:?}"),
            }
        };
        for (row, &(p, q)) in keys.iter().enumerate() {
            for (x, y) in [(p, q), (q, p)] {
                let (lin, cst) = drift(x.0, x.1);
                for (z, c) in lin {
                    add(row, z, y, c, &mut mat);
                }
                rhs[row] -= cst * mean(y);
            }
            for e in 0..n - 1 {
                for (u1, u2) in [(true, false), (false, true)] {
                    for (z1, c1) in comm(e, u1, p.0, p.1) {
                        for (z2, c2) in comm(e, u2, q.0, q.1) {
                            add(row, z1, z2, -d * c1 * c2, &mut mat);
                        }
                    }
                }
            }
        }
        let values = mat.clone().lu().solve(&rhs).expect("stationary second moments are unique");
        SecondMoments {
            n,
            profile,
            index,
            values,
            generator: mat,
        }
    }

    /// Slowest relaxation rate of the second-moment equations.
    pub fn gap(&self) -> f64 {
        self.generator
            .complex_eigenvalues()
            .iter()
            .map(|z| -z.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn moment(&self, p: Pair, q: Pair) -> f64 {
        self.index.get(&key(p, q)).map(|&i| self.values[i]).unwrap_or(0.0)
    }

    /// `E[G_ij G_ji] − E[G_ij]E[G_ji]`.
    pub fn pair_cumulant(&self, i: usize, j: usize) -> f64 {
        let m = if i == j { self.profile[i] } else { 0.0 };
        self.moment((i, j), (j, i)) - m * m
    }

    /// `E[G_ii G_jj] − n_i n_j`.
    pub fn density_covariance(&self, i: usize, j: usize) -> f64 {
        self.moment((i, i), (j, j)) - self.profile[i] * self.profile[j]
    }

    pub fn sites(&self) -> usize {
        self.n
    }
}

//! Recursive construction of loop polynomials `[σ](x)` from the stationarity
//! conditions, memoized over canonical cycles.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::MultilinearPoly;
use crate::permutations::{Cycle, SubLoop};

/// The polynomial of a loop, homogeneous of degree `P` in the density jump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopValue {
    pub cycle: Cycle,
    pub poly: MultilinearPoly,
    pub degree: usize,
}

impl LoopValue {
    /// Checks both boundary conditions and the full-derivative value.
    pub fn check_invariants(&self) -> Result<()> {
        let p = self.degree;
        if p >= 2 && !(self.poly.eval_zero(1).is_zero() && self.poly.eval_one(p).is_zero()) {
            return Err(Error::Invariant(format!("{} violates a boundary condition", self.cycle)));
        }
        let top = self.poly.multi_derivative(p).constant_term();
        let want = catalan_numbers(p).pop().unwrap_or_default();
        if top != want {
            return Err(Error::Invariant(format!(
                "{}: full derivative {top}, expected {want}",
                self.cycle
            )));
        }
        Ok(())
    }
}

/// Product `[σ_j^−]·[σ_j^+]` of the two loops produced by cutting at `j`.
///
/// A one-point loop is `n_a + x`; only its `x` part is kept in `poly` and its
/// label is listed in `dropped_offsets`. The offset disappears as soon as that
/// label is differentiated.
#[derive(Clone, Debug)]
pub struct SplitProduct {
    pub poly: MultilinearPoly,
    pub dropped_offsets: Vec<usize>,
}

/// Memoizing solver. Safe to share between threads.
#[derive(Debug, Default)]
pub struct Solver {
    cache: DashMap<Cycle, Arc<MultilinearPoly>>,
    memoize: bool,
    disk: Option<PathBuf>,
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            cache: DashMap::new(),
            memoize: true,
            disk: None,
        }
    }

    /// A solver that recomputes every sub-loop.
    pub fn without_cache() -> Self {
        Solver {
            memoize: false,
            ..Solver::new()
        }
    }

    /// Also persists loop values as JSON files in `dir`.
    pub fn with_disk_cache(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Solver {
            disk: Some(dir.as_ref().to_path_buf()),
            ..Solver::new()
        })
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    pub fn loop_expectation(&self, sigma: &Cycle) -> Result<LoopValue> {
        Ok(LoopValue {
            cycle: sigma.clone(),
            poly: (*self.poly(sigma)?).clone(),
            degree: sigma.size(),
        })
    }

    /// `[σ]` with the one-point offset dropped.
    pub fn poly(&self, sigma: &Cycle) -> Result<Arc<MultilinearPoly>> {
        if self.memoize {
            if let Some(hit) = self.cache.get(sigma) {
                return Ok(Arc::clone(&hit));
            }
        }
        if let Some(v) = self.read_disk(sigma) {
            let v = Arc::new(v);
            if self.memoize {
                self.cache.insert(sigma.clone(), Arc::clone(&v));
            }
            return Ok(v);
        }
        let v = Arc::new(self.compute(sigma)?);
        self.write_disk(sigma, &v)?;
        if self.memoize {
            let stored = self.cache.entry(sigma.clone()).or_insert_with(|| Arc::clone(&v));
            if **stored != *v {
                return Err(Error::Invariant(format!("cache disagreement for {sigma}")));
            }
        }
        Ok(v)
    }

    fn disk_path(&self, sigma: &Cycle) -> Option<PathBuf> {
        let name: Vec<String> = sigma.sequence().iter().map(|a| a.to_string()).collect();
        self.disk.as_ref().map(|d| d.join(format!("{}.json", name.join("-"))))
    }

    fn read_disk(&self, sigma: &Cycle) -> Option<MultilinearPoly> {
        let text = fs::read_to_string(self.disk_path(sigma)?).ok()?;
        let v: LoopValue = serde_json::from_str(&text).ok()?;
        (v.cycle == *sigma).then_some(v.poly)
    }

    fn write_disk(&self, sigma: &Cycle, poly: &MultilinearPoly) -> Result<()> {
        if let Some(path) = self.disk_path(sigma) {
            let v = LoopValue {
                cycle: sigma.clone(),
                poly: poly.clone(),
                degree: sigma.size(),
            };
            let text = serde_json::to_string(&v).map_err(|e| Error::Io(e.to_string()))?;
            fs::write(path, text)?;
        }
        Ok(())
    }

    fn compute(&self, sigma: &Cycle) -> Result<MultilinearPoly> {
        let p = sigma.size();
        if p == 1 {
            return Ok(MultilinearPoly::var(1, 1));
        }
        let mut out = MultilinearPoly::zero(p);
        for j in 1..p {
            let h = self.hole_coefficient(sigma, j)?;
            let mut term = &prefix_monomial(p, j) * &h;
            if j == p - 1 {
                term = &term * &MultilinearPoly::one_minus_var(p, p);
            }
            out += &term;
        }
        Ok(out)
    }

    /// A sub-loop's polynomial written in the parent's variables.
    fn embed(&self, sub: &SubLoop, nvars: usize) -> Result<(MultilinearPoly, Option<usize>)> {
        if sub.len() == 1 {
            let a = sub.global(1);
            return Ok((MultilinearPoly::var(nvars, a), Some(a)));
        }
        let local = self.poly(&sub.cycle)?;
        Ok((local.rename(nvars, |i| sub.global(i)), None))
    }

    /// `[σ_j^−]·[σ_j^+]` in the variables of `σ`.
    pub fn split_product(&self, sigma: &Cycle, j: usize) -> Result<SplitProduct> {
        let p = sigma.size();
        let (minus, plus) = sigma.split(j)?;
        let (a, oa) = self.embed(&minus, p)?;
        let (b, ob) = self.embed(&plus, p)?;
        Ok(SplitProduct {
            poly: a.try_mul(&b)?,
            dropped_offsets: oa.into_iter().chain(ob).collect(),
        })
    }

    /// `Σ_{k=1}^{j} [(τ_{k+1}⋯τ_j∘σ)_k^−]·[(τ_{k+1}⋯τ_j∘σ)_k^+]`, the last term being
    /// the plain split of `σ` at `j`. Offsets of one-point loops must lie in `1..=j+1`.
    pub fn twisted_split_sum(&self, sigma: &Cycle, j: usize) -> Result<MultilinearPoly> {
        let p = sigma.size();
        let mut sum = MultilinearPoly::zero(p);
        for k in 1..=j {
            let twisted = sigma.twist_chain(k, j)?;
            let sp = self.split_product(&twisted, k)?;
            if let Some(&a) = sp.dropped_offsets.iter().find(|&&a| a > j + 1) {
                return Err(Error::Invariant(format!(
                    "one-point loop ({a}) of {twisted} escapes the derivative string 1..={}",
                    j + 1
                )));
            }
            sum += &sp.poly;
        }
        Ok(sum)
    }

    /// `[σ]°_{j+1} = 𝔇_{j+1} Σ_k […]·[…]`, for `1 ≤ j ≤ P−1`.
    pub fn hole_coefficient(&self, sigma: &Cycle, j: usize) -> Result<MultilinearPoly> {
        Ok(self.twisted_split_sum(sigma, j)?.multi_derivative(j + 1))
    }

    /// All variables set to `−t`, as coefficients in `t`.
    pub fn minus_t_specialization(&self, sigma: &Cycle) -> Result<Vec<BigInt>> {
        Ok(self.poly(sigma)?.specialize_minus_t())
    }
}

fn prefix_monomial(nvars: usize, j: usize) -> MultilinearPoly {
    let vars: Vec<usize> = (1..=j).collect();
    MultilinearPoly::from_terms(nvars, [(vars, BigInt::one())]).expect("valid monomial")
}

/// Alternating Catalan numbers `C₁..C_{P_max}`: `C₁ = 1`, `C_P = −Σ C_n C_{P−n}`.
pub fn catalan_numbers(p_max: usize) -> Vec<BigInt> {
    let mut c: Vec<BigInt> = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        if p == 1 {
            c.push(BigInt::one());
        } else {
            let s: BigInt = (1..p).map(|n| &c[n - 1] * &c[p - n - 1]).sum();
            c.push(-s);
        }
    }
    c
}

/// `Φ_{P−1}(t)` from `[ω_P](−t, …, −t) = −t(1+t)Φ_{P−1}(t)`, for `P ≥ 2`.
pub fn associahedron_profile(solver: &Solver, p: usize) -> Result<Vec<BigInt>> {
    if p < 2 {
        return Err(Error::Unsupported("the face polynomial needs at least 2 points".into()));
    }
    let f = solver.minus_t_specialization(&Cycle::regular(p))?;
    divide_by_minus_t_one_plus_t(&f)
}

/// Exact division of a polynomial in `t` by `−t(1+t)`.
pub fn divide_by_minus_t_one_plus_t(f: &[BigInt]) -> Result<Vec<BigInt>> {
    if f.is_empty() || !f[0].is_zero() {
        return Err(Error::Invariant("specialization is not divisible by t".into()));
    }
    // g = −f/t, then synthetic division by (1 + t) from the top.
    let g: Vec<BigInt> = f[1..].iter().map(|c| -c).collect();
    let n = g.len();
    if n < 2 {
        return Err(Error::Invariant("specialization has degree < 2".into()));
    }
    let mut q = vec![BigInt::zero(); n - 1];
    let mut r = g.clone();
    for i in (1..n).rev() {
        q[i - 1] = r[i].clone();
        let qi = q[i - 1].clone();
        r[i - 1] -= &qi;
        r[i] = BigInt::zero();
    }
    if !r[0].is_zero() {
        return Err(Error::Invariant("specialization is not divisible by 1 + t".into()));
    }
    Ok(q)
}

/// Formats a polynomial in `t` as `1 + 14t + 56t^2`.
pub fn format_t_poly(c: &[BigInt]) -> String {
    let mut s = String::new();
    for (i, a) in c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let neg = a < &BigInt::zero();
        let mag = if neg { -a } else { a.clone() };
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let coeff = if mag.is_one() && i > 0 { String::new() } else { mag.to_string() };
        match i {
            0 => s.push_str(&mag.to_string()),
            1 => s.push_str(&format!("{coeff}t")),
            _ => s.push_str(&format!("{coeff}t^{i}")),
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

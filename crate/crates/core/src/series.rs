//! Truncated power series in `z` whose coefficients are multilinear
//! polynomials in floating variables `y₀, y₁, …` (variable index `l + 1`
//! stands for `y_l`), and the towers of generating functions built from them.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multilinear::MultilinearPoly;
use crate::permutations::{Extraction, ExtractionKind, Profile};
use crate::solver::catalan_numbers;

/// A power series in `z` known exactly up to `order()` inclusive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesPoly {
    nvars: usize,
    coeffs: Vec<MultilinearPoly>,
}

impl SeriesPoly {
    pub fn from_coeffs(nvars: usize, coeffs: Vec<MultilinearPoly>) -> Self {
        let coeffs = coeffs.into_iter().map(|c| c.with_nvars(nvars)).collect();
        SeriesPoly { nvars, coeffs }
    }

    /// A series with the single coefficient `c` at `z⁰`, known to `order`.
    pub fn constant(c: MultilinearPoly, order: usize) -> Self {
        let nvars = c.nvars();
        let mut coeffs = vec![MultilinearPoly::zero(nvars); order + 1];
        coeffs[0] = c;
        SeriesPoly { nvars, coeffs }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Highest exactly known power of `z`; `-1` when nothing is known.
    pub fn order(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn coeffs(&self) -> &[MultilinearPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Result<&MultilinearPoly> {
        self.coeffs.get(n).ok_or(Error::InsufficientOrder {
            have: self.order(),
            need: n as isize,
        })
    }

    /// The `z⁰` coefficient.
    pub fn at_zero(&self) -> Result<MultilinearPoly> {
        self.coeff(0).cloned()
    }

    /// Index of the first nonzero coefficient, `order + 1` if none.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(self.coeffs.len())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(order + 1);
        out
    }

    fn widen(&self, nvars: usize) -> usize {
        self.nvars.max(nvars)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let nvars = self.widen(other.nvars);
        let coeffs = (0..n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        SeriesPoly { nvars, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let nvars = self.widen(other.nvars);
        let coeffs = (0..n).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect();
        SeriesPoly { nvars, coeffs }
    }

    /// Product; the known order accounts for leading zeros of each factor.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (oa, ob) = (self.order(), other.order());
        if oa < 0 || ob < 0 {
            return Ok(SeriesPoly {
                nvars: self.widen(other.nvars),
                coeffs: Vec::new(),
            });
        }
        let (va, vb) = (self.valuation() as isize, other.valuation() as isize);
        let order = (oa + vb).min(ob + va);
        let nvars = self.widen(other.nvars);
        let mut coeffs = vec![MultilinearPoly::zero(nvars); (order + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if (i + j) as isize > order {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j] += &a.try_mul(b)?;
                }
            }
        }
        Ok(SeriesPoly { nvars, coeffs })
    }

    /// Multiplies every coefficient by a polynomial.
    pub fn mul_poly(&self, p: &MultilinearPoly) -> Result<Self> {
        let nvars = self.widen(p.nvars());
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.try_mul(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesPoly { nvars, coeffs })
    }

    /// `(A(z) − A(0)) / z`.
    pub fn shift_down(&self) -> Self {
        SeriesPoly {
            nvars: self.nvars,
            coeffs: self.coeffs.iter().skip(1).cloned().collect(),
        }
    }

    /// `z·A(z)`.
    pub fn shift_up(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(MultilinearPoly::zero(self.nvars));
        coeffs.extend(self.coeffs.iter().cloned());
        SeriesPoly {
            nvars: self.nvars,
            coeffs,
        }
    }

    /// `A(z) − A(0)`.
    pub fn without_constant(&self) -> Self {
        let mut out = self.clone();
        if let Some(c) = out.coeffs.first_mut() {
            *c = MultilinearPoly::zero(self.nvars);
        }
        out
    }

    /// `[z^{−s} A(z)]_+`: the non-negative powers after dividing by `z^s`.
    pub fn positive_part_shifted(&self, s: usize) -> Self {
        SeriesPoly {
            nvars: self.nvars,
            coeffs: self.coeffs.iter().skip(s).cloned().collect(),
        }
    }

    /// Renames floating variables (by polynomial index) into `nvars` variables.
    pub fn rename(&self, nvars: usize, map: impl Fn(usize) -> usize) -> Self {
        SeriesPoly {
            nvars,
            coeffs: self.coeffs.iter().map(|c| c.rename(nvars, &map)).collect(),
        }
    }

    /// Coefficients as strings in the `y` names.
    pub fn display_y(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.display_with(&y_name)).collect()
    }
}

impl fmt::Display for SeriesPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.coeffs.iter().enumerate() {
            writeln!(f, "z^{n}: {}", c.display_with(&y_name))?;
        }
        write!(f, "+ O(z^{})", self.coeffs.len())
    }
}

/// `y_l` is the polynomial variable `l + 1`.
pub fn y_name(i: usize) -> String {
    format!("y{}", i - 1)
}

/// The polynomial `y_l`.
pub fn y_var(nvars: usize, l: usize) -> MultilinearPoly {
    MultilinearPoly::var(nvars, l + 1)
}

/// `𝔠(z) = Σ C_{N+1} z^N = 1 − z + 2z² − 5z³ + …`, the root of `z𝔠² + 𝔠 − 1 = 0`.
pub fn catalan_series(order: usize) -> SeriesPoly {
    let c = catalan_numbers(order + 1);
    SeriesPoly {
        nvars: 0,
        coeffs: c.into_iter().map(|v| MultilinearPoly::constant(0, v)).collect(),
    }
}

/// `𝒞_{k+1} = 𝔠𝒞_k + y_k z^{-1}(𝒞_k − 𝒞_k(0))`.
pub fn ck_step(catalan: &SeriesPoly, ck: &SeriesPoly, k: usize) -> Result<SeriesPoly> {
    let nvars = k + 1;
    let a = catalan.mul(ck)?;
    let b = ck.shift_down().mul_poly(&y_var(nvars, k))?;
    Ok(a.add(&b).rename(nvars, |i| i))
}

/// `x₁·c(y_l = x_{k+1−l})`: a loop polynomial on `k + 1` points from a
/// `z⁰` coefficient in `k` floating variables.
pub fn reconstruct_from_constant(c0: &MultilinearPoly, k: usize) -> MultilinearPoly {
    let p = k + 1;
    let body = c0.rename(p, |i| p + 1 - i);
    &MultilinearPoly::var(p, 1) * &body
}

/// Truncations `D̄(y₀, …, y_{k−1}, 0, 0, …)` of a stabilized series.
#[derive(Clone, Debug, Serialize)]
pub struct StableSeries {
    /// `(k, polynomial in k floating variables)`.
    pub levels: Vec<(usize, MultilinearPoly)>,
}

impl StableSeries {
    pub fn at(&self, k: usize) -> Option<&MultilinearPoly> {
        self.levels.iter().find(|(kk, _)| *kk == k).map(|(_, p)| p)
    }

    /// Appending a zero variable must give back the previous level.
    pub fn check_padding(&self) -> Result<()> {
        for w in self.levels.windows(2) {
            let ((k, lo), (k1, hi)) = (&w[0], &w[1]);
            if *k1 != k + 1 {
                continue;
            }
            let padded = hi.eval_zero(k1 - 1 + 1).with_nvars(hi.nvars());
            if padded != lo.clone().with_nvars(hi.nvars()) {
                return Err(Error::Invariant(format!(
                    "padding y{k} = 0 at level {k1} gives {} instead of {}",
                    padded.display_with(&y_name),
                    lo.display_with(&y_name)
                )));
            }
        }
        Ok(())
    }
}

/// The regular-loop tower `𝒞₀ = 𝔠, 𝒞₁, …, 𝒞_{k_max}`.
#[derive(Clone, Debug)]
pub struct RegularTower {
    catalan: SeriesPoly,
    levels: Vec<SeriesPoly>,
}

impl RegularTower {
    /// Builds `𝒞_0..𝒞_{k_max}` starting from `𝔠` known to `order`.
    pub fn new(k_max: usize, order: usize) -> Result<Self> {
        let catalan = catalan_series(order);
        let mut levels = vec![catalan.clone()];
        for k in 0..k_max {
            let next = ck_step(&catalan, &levels[k], k)?;
            levels.push(next);
        }
        let tower = RegularTower { catalan, levels };
        tower.check_invariants()?;
        Ok(tower)
    }

    /// Smallest tower that reconstructs loops up to `p_max` points.
    pub fn for_points(p_max: usize) -> Result<Self> {
        Self::new(p_max.saturating_sub(1), p_max.saturating_sub(1))
    }

    pub fn catalan(&self) -> &SeriesPoly {
        &self.catalan
    }

    pub fn k_max(&self) -> usize {
        self.levels.len() - 1
    }

    /// `𝒞_k`.
    pub fn ck(&self, k: usize) -> Result<&SeriesPoly> {
        self.levels.get(k).ok_or(Error::Unsupported(format!(
            "tower built to k = {}, level {k} requested",
            self.k_max()
        )))
    }

    /// `𝒪_k = 𝔠·𝒞_k`.
    pub fn outgoing(&self, k: usize) -> Result<SeriesPoly> {
        self.catalan.mul(self.ck(k)?)
    }

    /// `[ω_{k+1}] = x₁·𝒞_k(0)`.
    pub fn reconstruct(&self, k: usize) -> Result<MultilinearPoly> {
        Ok(reconstruct_from_constant(&self.ck(k)?.at_zero()?, k))
    }

    /// `D̄_ω` truncated to `k` variables for every available `k`.
    pub fn stable(&self) -> Result<StableSeries> {
        let levels = (0..=self.k_max())
            .filter(|&k| self.levels[k].order() >= 0)
            .map(|k| Ok((k, self.levels[k].at_zero()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(StableSeries { levels })
    }

    /// `(1 − y₀)` divides every coefficient for `k ≥ 1`, and `𝒪_k(0) = 𝒞_k(0)`.
    pub fn check_invariants(&self) -> Result<()> {
        for (k, ck) in self.levels.iter().enumerate() {
            if k >= 1 && ck.coeffs().iter().any(|c| !c.eval_one(1).is_zero()) {
                return Err(Error::Invariant(format!("(1 - y0) does not divide C_{k}")));
            }
            if ck.order() >= 0 && self.outgoing(k)?.at_zero()? != ck.at_zero()? {
                return Err(Error::Invariant(format!("O_{k}(0) differs from C_{k}(0)")));
            }
        }
        Ok(())
    }
}

/// Family of series indexed by `(q, k)`.
pub type Family = HashMap<(usize, usize), SeriesPoly>;

/// The transposition tower `𝒟_k^{(q)}`, `𝒮_k^{(q)}` for `0 ≤ q ≤ k ≤ k_max`.
#[derive(Clone, Debug)]
pub struct TranspositionTower {
    pub d: Family,
    pub s: Family,
    k_max: usize,
}

impl TranspositionTower {
    pub fn new(reg: &RegularTower, k_max: usize) -> Result<Self> {
        let cat = reg.catalan();
        let mut d = Family::new();
        let mut s = Family::new();
        for k in 0..=k_max {
            let ck = reg.ck(k)?;
            d.insert((0, k), ck.clone());
            s.insert((0, k), cat.mul(&ck.without_constant())?.add(ck));
            if k >= 1 {
                let c1 = reg.ck(1)?.rename(k, |_| k);
                s.insert((1, k), c1.mul(reg.ck(k - 1)?)?);
            }
            for q in 1..=k {
                let prev = &d[&(q - 1, k - 1)];
                let hop = prev.shift_down().mul_poly(&y_var(k, k - 1))?;
                let dq = s[&(q - 1, k - 1)].add(&hop).rename(k, |i| i);
                if q >= 2 {
                    s.insert((q, k), cat.mul(&dq)?);
                }
                d.insert((q, k), dq);
            }
        }
        for k in 1..=k_max {
            if d[&(1, k)].order() >= 0 && d[&(1, k)].at_zero()? != reg.ck(k)?.at_zero()? {
                return Err(Error::Invariant(format!("D_{k}^(1)(0) differs from C_{k}(0)")));
            }
        }
        Ok(TranspositionTower { d, s, k_max })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `[τ_q∘ω_{k+1}] = x₁·𝒟_k^{(q)}(0)`, for `1 ≤ q ≤ k`.
    pub fn reconstruct(&self, q: usize, k: usize) -> Result<MultilinearPoly> {
        let series = self.d.get(&(q, k)).ok_or(Error::Unsupported(format!(
            "transposition tower has no level q = {q}, k = {k}"
        )))?;
        Ok(reconstruct_from_constant(&series.at_zero()?, k))
    }

    /// Stabilized swap series at distance `r = k − q` from the right end.
    pub fn stable(&self, r: usize) -> Result<StableSeries> {
        stable_diagonal(&self.d, r)
    }
}

/// Levels `𝒟_k^{(q)}(0)` along `k − q = r`, `q ≥ 2`.
///
/// Setting `y_k = 0` at level `k + 1` drops the point next to `x₁`, which
/// moves the deformation one step to the left: padding therefore relates
/// `(q + 1, k + 1)` to `(q, k)`, through `𝒮^{(q)}(0) = 𝒟^{(q)}(0)`. At fixed
/// `q` it fails.
fn stable_diagonal(d: &Family, r: usize) -> Result<StableSeries> {
    let mut ks: Vec<usize> = d
        .keys()
        .filter(|(q, k)| *q >= 2 && k.checked_sub(*q) == Some(r))
        .map(|&(_, k)| k)
        .collect();
    ks.sort_unstable();
    let levels = ks
        .into_iter()
        .filter(|k| d[&(k - r, *k)].order() >= 0)
        .map(|k| Ok((k, d[&(k - r, k)].at_zero()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StableSeries { levels })
}

/// Computes the series `𝒟̂^ν_{k′;p}` and `𝒮̂^ν_{k′;p}` for arbitrary profiles,
/// recursing into extractions and caching by normalized profile.
#[derive(Debug)]
pub struct HatEngine<'a> {
    reg: &'a RegularTower,
    d_cache: HashMap<(Profile, usize, usize), SeriesPoly>,
    s_cache: HashMap<(Profile, usize, usize), SeriesPoly>,
}

impl<'a> HatEngine<'a> {
    pub fn new(reg: &'a RegularTower) -> Self {
        HatEngine {
            reg,
            d_cache: HashMap::new(),
            s_cache: HashMap::new(),
        }
    }

    /// `𝒟̂^ν_{k′;p} = Σ_N C^{ν_{N+1}}_{N+k′+|ν|; k′+p} z^N`, for `0 ≤ p ≤ |ν|`.
    ///
    /// For `p = |ν|` (and for the empty profile) the `z⁰` coefficient is not a
    /// derivative of a loop and is only ever used after subtraction.
    pub fn hat_d(&mut self, nu: &Profile, k: usize, p: usize) -> Result<SeriesPoly> {
        let key = (nu.clone(), k, p);
        if let Some(v) = self.d_cache.get(&key) {
            return Ok(v.clone());
        }
        if p > nu.len() {
            return Err(Error::Invariant(format!("p = {p} exceeds |{nu}|")));
        }
        let ck = self.reg.ck(k)?;
        let out = if nu.is_empty() {
            ck.shift_up()
        } else if p == 0 {
            ck.positive_part_shifted(nu.len() - 1)
        } else {
            let s = self.hat_s(nu, k, p - 1)?;
            let d = self.hat_d(nu, k, p - 1)?;
            let nvars = k + p;
            s.add(&d.mul_poly(&y_var(nvars, k + p - 1))?).rename(nvars, |i| i)
        };
        self.d_cache.insert(key, out.clone());
        Ok(out)
    }

    /// `𝒮̂^ν_{k′;p}` for `0 ≤ p ≤ |ν| − 1`, with `M = |ν| − p`.
    pub fn hat_s(&mut self, nu: &Profile, k: usize, p: usize) -> Result<SeriesPoly> {
        let key = (nu.clone(), k, p);
        if let Some(v) = self.s_cache.get(&key) {
            return Ok(v.clone());
        }
        let n = nu.len();
        if n == 0 || p >= n {
            return Err(Error::Invariant(format!("S-hat needs p < |{nu}|, got {p}")));
        }
        let big = n - p;
        let nvars = k + p;
        let head = nu.extract(ExtractionKind::Head { bound: big })?;
        let tail = nu.extract(ExtractionKind::Tail { bound: big })?;
        check_split(&head, &tail, p)?;
        let a = self.routed(&head, 0, k, n, nvars)?;
        let b = self.routed(&tail, k, k, n, nvars)?;
        let mut out = a.shift_down().mul(&b.without_constant())?;
        for m in 1..big {
            let inner = nu.extract(ExtractionKind::Inner { m, bound: big })?;
            let outer = nu.extract(ExtractionKind::Outer { m, bound: big })?;
            check_split(&inner, &outer, p)?;
            let a0 = self.routed(&inner, 0, k, n, nvars)?.at_zero()?;
            let b = self.routed(&outer, k, k, n, nvars)?;
            out = out.add(&b.mul_poly(&a0)?);
        }
        if p == n - 1 {
            out = out.without_constant();
        }
        let out = out.rename(nvars, |i| i);
        self.s_cache.insert(key, out.clone());
        Ok(out)
    }

    /// The hat series of an extraction with its floating variables renamed into
    /// the parent's: the first `own_k` stay put, and a floating image `j` becomes
    /// `y_{k′+|ν|−j}`.
    fn routed(
        &mut self,
        e: &Extraction,
        own_k: usize,
        parent_k: usize,
        parent_len: usize,
        nvars: usize,
    ) -> Result<SeriesPoly> {
        let series = self.hat_d(&e.profile, own_k, e.floating())?;
        let floats = e.floating_images_desc();
        Ok(series.rename(nvars, |i| {
            if i <= own_k {
                i
            } else {
                let j = floats[i - own_k - 1];
                parent_k + parent_len - j + 1
            }
        }))
    }
}

fn check_split(a: &Extraction, b: &Extraction, p: usize) -> Result<()> {
    if a.floating() + b.floating() != p {
        return Err(Error::Invariant(format!(
            "extractions {:?} and {:?} float {} + {} variables, expected {p}",
            a.kind,
            b.kind,
            a.floating(),
            b.floating()
        )));
    }
    Ok(())
}

/// The tower `𝒟_k^{(μ;q)}`, `𝒮_k^{(μ;q)}` of a deformation profile, for
/// `q ≥ 1` and `k ≥ q + |μ| − 2`, up to `k_max`.
#[derive(Clone, Debug)]
pub struct DeformationTower {
    pub profile: Profile,
    pub d: Family,
    pub s: Family,
    k_max: usize,
}

impl DeformationTower {
    /// Builds the tower with a regular tower sized for the request.
    pub fn build(mu: &Profile, k_max: usize) -> Result<Self> {
        let reg = RegularTower::new(k_max, Self::required_order(mu, k_max))?;
        Self::new(&reg, mu, k_max)
    }

    /// Starting order of `𝔠` needed to reach `z⁰` at every level up to `k_max`.
    pub fn required_order(mu: &Profile, k_max: usize) -> usize {
        k_max + mu.len()
    }

    pub fn new(reg: &RegularTower, mu: &Profile, k_max: usize) -> Result<Self> {
        let n = mu.len();
        if n < 2 || !mu.is_minimal() {
            return Err(Error::InvalidProfile(format!(
                "{mu} must have minimal support of size at least 2"
            )));
        }
        if k_max + 1 < n || reg.k_max() < k_max + 1 - (n - 1) {
            return Err(Error::Unsupported(format!(
                "k_max = {k_max} too small for a profile of size {n} or regular tower too short"
            )));
        }
        let cat = reg.catalan();
        let mut engine = HatEngine::new(reg);
        let mut d = Family::new();
        let mut s = Family::new();
        for big_k in n - 1..=k_max {
            let kp = big_k + 1 - n;
            d.insert((1, big_k), engine.hat_d(mu, kp, n - 1)?);
            s.insert((1, big_k), engine.hat_s(mu, kp, n - 1)?.shift_down());
        }
        for q in 2..=k_max + 2 - n {
            for big_k in q + n - 2..=k_max {
                let prev_d = &d[&(q - 1, big_k - 1)];
                let hop = prev_d.shift_down().mul_poly(&y_var(big_k, big_k - 1))?;
                let dq = s[&(q - 1, big_k - 1)].add(&hop).rename(big_k, |i| i);
                s.insert((q, big_k), cat.mul(&dq)?);
                d.insert((q, big_k), dq);
            }
        }
        if let Some(worst) = d.values().map(SeriesPoly::order).min().filter(|&o| o < 0) {
            return Err(Error::InsufficientOrder {
                have: reg.catalan().order(),
                need: reg.catalan().order() - worst,
            });
        }
        Ok(DeformationTower {
            profile: mu.clone(),
            d,
            s,
            k_max,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `𝒟_k^{(μ;q)}`.
    pub fn series(&self, q: usize, k: usize) -> Result<&SeriesPoly> {
        self.d.get(&(q, k)).ok_or(Error::Unsupported(format!(
            "no level q = {q}, k = {k} for profile {} (need 1 ≤ q, q + |μ| − 2 ≤ k ≤ {})",
            self.profile, self.k_max
        )))
    }

    /// `[μ_q∘ω_{k+1}] = x₁·𝒟_k^{(μ;q)}(0)`.
    pub fn reconstruct(&self, q: usize, k: usize) -> Result<MultilinearPoly> {
        Ok(reconstruct_from_constant(&self.series(q, k)?.at_zero()?, k))
    }

    /// Stabilized series at distance `r = k − q` from the right end.
    pub fn stable(&self, r: usize) -> Result<StableSeries> {
        stable_diagonal(&self.d, r)
    }
}

/// Numerical coefficient list of a series whose coefficients are constants.
pub fn constant_coefficients(s: &SeriesPoly) -> Vec<BigInt> {
    s.coeffs()
        .iter()
        .map(|c| if c.is_zero() { BigInt::zero() } else { c.constant_term() })
        .collect()
}

//! Exact multilinear polynomials: degree at most one in each variable.
//!
//! A monomial is a bitmask (bit `i − 1` stands for variable `i`), so at most 64
//! variables are supported. Coefficients are arbitrary-precision integers and
//! zero coefficients are never stored.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_VARS: usize = 64;

fn bit(j: usize) -> u64 {
    1u64 << (j - 1)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct MultilinearPoly {
    nvars: usize,
    terms: BTreeMap<u64, BigInt>,
}

impl MultilinearPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        MultilinearPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(0, c.into());
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    /// The variable `x_j`.
    pub fn var(nvars: usize, j: usize) -> Self {
        assert!(j >= 1 && j <= nvars, "variable x{j} outside 1..={nvars}");
        let mut p = Self::zero(nvars);
        p.add_term(bit(j), BigInt::one());
        p
    }

    /// `1 − x_j`.
    pub fn one_minus_var(nvars: usize, j: usize) -> Self {
        &Self::one(nvars) - &Self::var(nvars, j)
    }

    /// Builds from `(variables, coefficient)` pairs; repeated monomials add up.
    pub fn from_terms<I, V>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, BigInt)>,
        V: AsRef<[usize]>,
    {
        if nvars > MAX_VARS {
            return Err(Error::TooManyVariables(nvars));
        }
        let mut p = Self::zero(nvars);
        for (vars, c) in terms {
            let mut mask = 0u64;
            for &v in vars.as_ref() {
                if v == 0 || v > nvars {
                    return Err(Error::IndexOutOfRange { index: v, max: nvars });
                }
                if mask & bit(v) != 0 {
                    return Err(Error::NotMultilinear(v));
                }
                mask |= bit(v);
            }
            p.add_term(mask, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Same polynomial viewed in a larger ambient space.
    pub fn with_nvars(mut self, nvars: usize) -> Self {
        let used = self.max_var();
        assert!(used <= nvars, "x{used} does not fit in {nvars} variables");
        self.nvars = nvars;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates `(mask, coefficient)` in increasing mask order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigInt)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    /// Coefficient of the monomial on the listed variables.
    pub fn coeff(&self, vars: &[usize]) -> BigInt {
        let mask = vars.iter().fold(0u64, |m, &v| m | bit(v));
        self.terms.get(&mask).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(&[])
    }

    /// Largest variable index with a nonzero coefficient (0 when constant).
    pub fn max_var(&self) -> usize {
        self.terms
            .keys()
            .map(|m| 64 - m.leading_zeros() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn depends_on(&self, j: usize) -> bool {
        self.terms.keys().any(|m| m & bit(j) != 0)
    }

    fn add_term(&mut self, mask: u64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = Self::zero(self.nvars);
        if !c.is_zero() {
            for (&m, v) in &self.terms {
                out.terms.insert(m, v * c);
            }
        }
        out
    }

    /// Product of polynomials; fails if a monomial would repeat a variable.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero(self.nvars.max(other.nvars));
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                if a & b != 0 {
                    return Err(Error::NotMultilinear((a & b).trailing_zeros() as usize + 1));
                }
                out.add_term(a | b, ca * cb);
            }
        }
        Ok(out)
    }

    /// `∇_j`, the derivative in `x_j`.
    pub fn derivative(&self, j: usize) -> Self {
        let b = bit(j);
        let mut out = Self::zero(self.nvars);
        for (&m, c) in &self.terms {
            if m & b != 0 {
                out.terms.insert(m & !b, c.clone());
            }
        }
        out
    }

    /// Derivative in every variable of `mask` at once.
    pub fn derivative_mask(&self, mask: u64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (&m, c) in &self.terms {
            if m & mask == mask {
                out.terms.insert(m & !mask, c.clone());
            }
        }
        out
    }

    /// `𝔇_k = ∇_k⋯∇_1`.
    pub fn multi_derivative(&self, k: usize) -> Self {
        if k == 0 {
            return self.clone();
        }
        self.derivative_mask(prefix_mask(k))
    }

    /// `Q|_{x_j=0}`.
    pub fn eval_zero(&self, j: usize) -> Self {
        let b = bit(j);
        let mut out = Self::zero(self.nvars);
        for (&m, c) in &self.terms {
            if m & b == 0 {
                out.terms.insert(m, c.clone());
            }
        }
        out
    }

    /// `Q|_{x_j=1}`.
    pub fn eval_one(&self, j: usize) -> Self {
        self.substitute_affine(j, 1, 0)
    }

    /// Substitutes `x_j ↦ a + b·x_j`.
    pub fn substitute_affine(&self, j: usize, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        let (a, b) = (a.into(), b.into());
        let bj = bit(j);
        let mut out = Self::zero(self.nvars);
        for (&m, c) in &self.terms {
            if m & bj == 0 {
                out.add_term(m, c.clone());
            } else {
                out.add_term(m & !bj, c * &a);
                out.add_term(m, c * &b);
            }
        }
        out
    }

    /// Renames variable `i` to `map(i)`; `map` must be injective on the used variables.
    pub fn rename(&self, nvars: usize, map: impl Fn(usize) -> usize) -> Self {
        let mut out = Self::zero(nvars);
        for (&m, c) in &self.terms {
            let mut nm = 0u64;
            let mut rest = m;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize + 1;
                rest &= rest - 1;
                let t = map(i);
                assert!(t >= 1 && t <= nvars, "x{i} renamed outside 1..={nvars}");
                assert!(nm & bit(t) == 0, "rename is not injective");
                nm |= bit(t);
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Splits as `A + B x_j + C x_{j+1} + D x_j x_{j+1}`.
    pub fn exchange_decomposition(&self, j: usize) -> ExchangeDecomposition {
        let (bj, bk) = (bit(j), bit(j + 1));
        let mut parts: [Self; 4] = std::array::from_fn(|_| Self::zero(self.nvars));
        for (&m, c) in &self.terms {
            let idx = usize::from(m & bj != 0) + 2 * usize::from(m & bk != 0);
            parts[idx].terms.insert(m & !(bj | bk), c.clone());
        }
        let [a, b, c, d] = parts;
        ExchangeDecomposition { j, a, b, c, d }
    }

    /// Hole decomposition `Q = Q°₁ + Σ_{j=1}^{P} x₁⋯x_j Q°_{j+1}`; returns
    /// `[Q°₁, …, Q°_{P+1}]` with `Q°_{j+1} = 𝔇_j Q|_{x_{j+1}=0}`.
    pub fn hole_decomposition(&self) -> Vec<Self> {
        let p = self.nvars;
        (0..=p)
            .map(|j| {
                let d = self.multi_derivative(j);
                if j < p {
                    d.eval_zero(j + 1)
                } else {
                    d
                }
            })
            .collect()
    }

    /// Inverse of [`hole_decomposition`](Self::hole_decomposition).
    pub fn from_holes(nvars: usize, holes: &[Self]) -> Self {
        let mut out = Self::zero(nvars);
        for (j, h) in holes.iter().enumerate() {
            let mask = if j == 0 { 0 } else { prefix_mask(j) };
            for (&m, c) in &h.terms {
                assert!(m & mask == 0, "hole coefficient depends on a prefix variable");
                out.add_term(m | mask, c.clone());
            }
        }
        out
    }

    /// All variables set to `−t`: coefficients of the resulting polynomial in `t`.
    pub fn specialize_minus_t(&self) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.nvars + 1];
        for (&m, c) in &self.terms {
            let d = m.count_ones() as usize;
            if d % 2 == 0 {
                out[d] += c;
            } else {
                out[d] -= c;
            }
        }
        while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
            out.pop();
        }
        out
    }

    /// Numerical value at `x` (`x[i-1]` is `x_i`).
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(&m, c)| {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                let mut rest = m;
                while rest != 0 {
                    v *= x[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                v
            })
            .sum()
    }

    /// Expanded form with a custom variable namer.
    pub fn display_with(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<u64> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&m| (m.count_ones(), mask_vars(m)));
        let mut s = String::new();
        for (n, m) in keys.into_iter().enumerate() {
            let c = &self.terms[&m];
            let mag = c.abs();
            if n == 0 {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            }
            let vars: Vec<String> = mask_vars(m).into_iter().map(name).collect();
            if vars.is_empty() {
                s.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    s.push_str(&mag.to_string());
                    s.push('*');
                }
                s.push_str(&vars.join("*"));
            }
        }
        s
    }

    /// Pulls out `x1` and `(1 - xP)` when they divide the polynomial.
    pub fn pretty_factored(&self) -> String {
        let name = |i: usize| format!("x{i}");
        let p = self.nvars;
        if p == 0 || self.is_zero() {
            return self.display_with(&name);
        }
        let mut factors = Vec::new();
        let mut rest = self.clone();
        if rest.terms.keys().all(|m| m & 1 != 0) {
            factors.push("x1".to_string());
            rest = rest.derivative(1);
        }
        let mut tail = None;
        if p >= 2 {
            let r0 = rest.eval_zero(p);
            if !r0.is_zero() && rest.derivative(p) == -&r0 {
                tail = Some(format!("(1 - x{p})"));
                rest = r0;
            }
        }
        let trivial_body = rest.len() == 1 && rest.constant_term().is_one();
        let bare = factors.is_empty() && tail.is_none();
        if !trivial_body || bare {
            let body = rest.display_with(&name);
            factors.push(if rest.len() > 1 && !bare { format!("({body})") } else { body });
        }
        factors.extend(tail);
        factors.join("*")
    }
}

fn mask_vars(m: u64) -> Vec<usize> {
    (1..=64).filter(|&i| m & bit(i) != 0).collect()
}

/// Mask of `x₁…x_k`.
pub fn prefix_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&|i| format!("x{i}")))
    }
}

impl std::ops::Add for &MultilinearPoly {
    type Output = MultilinearPoly;
    fn add(self, rhs: &MultilinearPoly) -> MultilinearPoly {
        let mut out = self.clone();
        out.nvars = out.nvars.max(rhs.nvars);
        for (&m, c) in &rhs.terms {
            out.add_term(m, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &MultilinearPoly {
    type Output = MultilinearPoly;
    fn sub(self, rhs: &MultilinearPoly) -> MultilinearPoly {
        let mut out = self.clone();
        out.nvars = out.nvars.max(rhs.nvars);
        for (&m, c) in &rhs.terms {
            out.add_term(m, -c);
        }
        out
    }
}

impl std::ops::Neg for &MultilinearPoly {
    type Output = MultilinearPoly;
    fn neg(self) -> MultilinearPoly {
        self.scale(&BigInt::from(-1))
    }
}

impl std::ops::Mul for &MultilinearPoly {
    type Output = MultilinearPoly;
    /// Panics when the factors share a variable; see [`MultilinearPoly::try_mul`].
    fn mul(self, rhs: &MultilinearPoly) -> MultilinearPoly {
        self.try_mul(rhs).expect("factors must involve disjoint variables")
    }
}

impl std::ops::AddAssign<&MultilinearPoly> for MultilinearPoly {
    fn add_assign(&mut self, rhs: &MultilinearPoly) {
        self.nvars = self.nvars.max(rhs.nvars);
        for (&m, c) in &rhs.terms {
            self.add_term(m, c.clone());
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    vars: Vec<usize>,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}

impl Serialize for MultilinearPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(&m, c)| TermJson {
                    vars: mask_vars(m),
                    coeff: c.to_string(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultilinearPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| {
                t.coeff
                    .parse::<BigInt>()
                    .map(|c| (t.vars, c))
                    .map_err(|e| D::Error::custom(format!("bad coefficient {:?}: {e}", t.coeff)))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        MultilinearPoly::from_terms(raw.nvars, terms).map_err(D::Error::custom)
    }
}

/// `[σ] = A + B x_j + C x_{j+1} + D x_j x_{j+1}` with `A..D` free of `x_j, x_{j+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeDecomposition {
    pub j: usize,
    pub a: MultilinearPoly,
    pub b: MultilinearPoly,
    pub c: MultilinearPoly,
    pub d: MultilinearPoly,
}

impl ExchangeDecomposition {
    pub fn recompose(&self) -> MultilinearPoly {
        let n = self.a.nvars().max(self.j + 1);
        let xj = MultilinearPoly::var(n, self.j);
        let xk = MultilinearPoly::var(n, self.j + 1);
        let mut out = self.a.clone();
        out += &(&self.b * &xj);
        out += &(&self.c * &xk);
        out += &(&(&self.d * &xj) * &xk);
        out
    }
}

//! Stationarity conditions as executable predicates. Every check compares two
//! exact polynomials and reports the residual; failures are data, not errors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::MultilinearPoly;
use crate::permutations::Cycle;
use crate::solver::Solver;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Boundary,
    Moves,
    Continuity,
    Gluing,
    Compat,
    Propag,
    Pair,
}

impl Property {
    /// Properties that run at every admissible `j` in a sweep.
    pub const SWEEP: [Property; 6] = [
        Property::Boundary,
        Property::Moves,
        Property::Continuity,
        Property::Gluing,
        Property::Compat,
        Property::Propag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Boundary => "boundary",
            Property::Moves => "moves",
            Property::Continuity => "continuity",
            Property::Gluing => "gluing",
            Property::Compat => "compat",
            Property::Propag => "propag",
            Property::Pair => "pair",
        }
    }

    /// Positions `j` at which the property applies for a `p`-point loop.
    pub fn positions(self, p: usize) -> Vec<Option<usize>> {
        match self {
            Property::Boundary => vec![None],
            Property::Compat => (1..=p.saturating_sub(2)).map(Some).collect(),
            _ => (1..p).map(Some).collect(),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "boundary" => Property::Boundary,
            "moves" => Property::Moves,
            "continuity" => Property::Continuity,
            "gluing" => Property::Gluing,
            "compat" | "compatibility" => Property::Compat,
            "propag" | "propagation" => Property::Propag,
            "pair" => Property::Pair,
            other => return Err(Error::Parse(format!("unknown property {other:?}"))),
        })
    }
}

/// One polynomial identity `lhs = rhs`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Identity {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
    pub pass: bool,
}

impl Identity {
    fn new(name: &str, lhs: &MultilinearPoly, rhs: &MultilinearPoly) -> Self {
        let residual = lhs - rhs;
        Identity {
            name: name.to_string(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            pass: residual.is_zero(),
            residual: residual.to_string(),
        }
    }
}

/// Outcome of one check on one loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub cycle: String,
    pub j: Option<usize>,
    pub property: Property,
    pub identities: Vec<Identity>,
    pub error: Option<String>,
    pub pass: bool,
}

impl Report {
    fn build(cycle: &Cycle, j: Option<usize>, property: Property, body: Result<Vec<Identity>>) -> Self {
        let (identities, error) = match body {
            Ok(ids) => (ids, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        let pass = error.is_none() && identities.iter().all(|i| i.pass);
        Report {
            cycle: cycle.to_string(),
            j,
            property,
            identities,
            error,
            pass,
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = self.j.map(|j| format!(" j={j}")).unwrap_or_default();
        let status = if self.pass { "pass" } else { "FAIL" };
        write!(f, "{status} {} {}{at}", self.property, self.cycle)?;
        if let Some(e) = &self.error {
            write!(f, ": {e}")?;
        }
        for id in self.identities.iter().filter(|i| !i.pass) {
            write!(f, "\n  {}: residual {}", id.name, id.residual)?;
        }
        Ok(())
    }
}

fn check_index(sigma: &Cycle, j: usize, span: usize) -> Result<()> {
    let max = sigma.size().saturating_sub(span);
    if j == 0 || j > max {
        return Err(Error::IndexOutOfRange { index: j, max });
    }
    Ok(())
}

/// `∇_j∇_{j+1}[σ_j^−·σ_j^+]`.
fn split_term(solver: &Solver, sigma: &Cycle, j: usize) -> Result<MultilinearPoly> {
    let sp = solver.split_product(sigma, j)?;
    Ok(sp.poly.derivative(j).derivative(j + 1))
}

/// Checker bound to a solver; all methods are pure given the solver.
#[derive(Clone, Copy)]
pub struct Verifier<'a> {
    solver: &'a Solver,
}

impl<'a> Verifier<'a> {
    pub fn new(solver: &'a Solver) -> Self {
        Verifier { solver }
    }

    pub fn check(&self, property: Property, sigma: &Cycle, j: Option<usize>) -> Report {
        match (property, j) {
            (Property::Boundary, _) => self.check_boundary(sigma),
            (Property::Moves, Some(j)) => self.check_moves(sigma, j),
            (Property::Continuity, Some(j)) => self.check_continuity(sigma, j),
            (Property::Gluing, Some(j)) => self.check_gluing(sigma, j),
            (Property::Compat, Some(j)) => self.check_compatibility(sigma, j),
            (Property::Propag, Some(j)) => self.check_propagation(sigma, j),
            (Property::Pair, Some(n)) => self.check_pair(sigma.size(), n),
            (_, None) => Report::build(
                sigma,
                None,
                property,
                Err(Error::Unsupported(format!("{property} needs a position j"))),
            ),
        }
    }

    /// `[σ]|_{x₁=0} = 0` and `[σ]|_{x_P=1} = 0` for `P > 1`.
    pub fn check_boundary(&self, sigma: &Cycle) -> Report {
        let body = (|| {
            let p = sigma.size();
            if p < 2 {
                return Ok(Vec::new());
            }
            let q = self.solver.poly(sigma)?;
            let zero = MultilinearPoly::zero(p);
            Ok(vec![
                Identity::new("left", &q.eval_zero(1), &zero),
                Identity::new("right", &q.eval_one(p), &zero),
            ])
        })();
        Report::build(sigma, None, Property::Boundary, body)
    }

    /// `A, D` invariant under `τ_j`, and `B(τσ) = C(σ) + ∇∇[σ⁻σ⁺]`, `C(τσ) = B(σ) − ∇∇[σ⁻σ⁺]`.
    pub fn check_moves(&self, sigma: &Cycle, j: usize) -> Report {
        let body = (|| {
            check_index(sigma, j, 1)?;
            let tau = sigma.adjoint_transposition(j)?;
            let e = self.solver.poly(sigma)?.exchange_decomposition(j);
            let f = self.solver.poly(&tau)?.exchange_decomposition(j);
            let g = split_term(self.solver, sigma, j)?;
            Ok(vec![
                Identity::new("A", &f.a, &e.a),
                Identity::new("B", &f.b, &(&e.c + &g)),
                Identity::new("C", &f.c, &(&e.b - &g)),
                Identity::new("D", &f.d, &e.d),
            ])
        })();
        Report::build(sigma, Some(j), Property::Moves, body)
    }

    /// `[σ]|_{x_j=x_{j+1}} = [τ_j∘σ]|_{x_j=x_{j+1}}`, coefficient by coefficient.
    pub fn check_continuity(&self, sigma: &Cycle, j: usize) -> Report {
        let body = (|| {
            check_index(sigma, j, 1)?;
            let tau = sigma.adjoint_transposition(j)?;
            let e = self.solver.poly(sigma)?.exchange_decomposition(j);
            let f = self.solver.poly(&tau)?.exchange_decomposition(j);
            Ok(vec![
                Identity::new("constant", &f.a, &e.a),
                Identity::new("linear", &(&f.b + &f.c), &(&e.b + &e.c)),
                Identity::new("quadratic", &f.d, &e.d),
            ])
        })();
        Report::build(sigma, Some(j), Property::Continuity, body)
    }

    /// `(∇_j − ∇_{j+1})([σ] + [τ_j∘σ])|_{x_j=x_{j+1}} = 2∇_j∇_{j+1}[σ⁻σ⁺]`.
    pub fn check_gluing(&self, sigma: &Cycle, j: usize) -> Report {
        let body = (|| {
            check_index(sigma, j, 1)?;
            let tau = sigma.adjoint_transposition(j)?;
            let s = self.solver.poly(sigma)?;
            let t = self.solver.poly(&tau)?;
            let sum = &*s + &*t;
            let diff = &sum.derivative(j) - &sum.derivative(j + 1);
            let merged = merge(&diff, j);
            let g = split_term(self.solver, sigma, j)?;
            Ok(vec![Identity::new("neumann", &merged, &(&g + &g))])
        })();
        Report::build(sigma, Some(j), Property::Gluing, body)
    }

    /// Compatibility of the moves with `τ_jτ_{j+1}τ_j = τ_{j+1}τ_jτ_{j+1}`, with
    /// the book-keeping variable carried as a fresh variable `x_{P+1}`.
    pub fn check_compatibility(&self, sigma: &Cycle, j: usize) -> Report {
        let body = (|| {
            check_index(sigma, j, 2)?;
            let p = sigma.size();
            let swapped = sigma.relabel(|a| {
                if a == j {
                    j + 2
                } else if a == j + 2 {
                    j
                } else {
                    a
                }
            });
            let side = |c: &Cycle| -> Result<MultilinearPoly> {
                let first = split_term(self.solver, c, j)?.rename(p + 1, |i| if i == j + 2 { p + 1 } else { i });
                let second = split_term(self.solver, c, j + 1)?.rename(p + 1, |i| if i == j { p + 1 } else { i });
                Ok(&first + &second)
            };
            Ok(vec![Identity::new("braid", &side(&swapped)?, &side(sigma)?)])
        })();
        Report::build(sigma, Some(j), Property::Compat, body)
    }

    /// The hole `∇₁⋯∇_j[σ]|_{x_{j+1}=0}` of the assembled polynomial against the
    /// sum of twisted split products.
    pub fn check_propagation(&self, sigma: &Cycle, j: usize) -> Report {
        let body = (|| {
            check_index(sigma, j, 1)?;
            let q = self.solver.poly(sigma)?;
            let assembled = q.multi_derivative(j).eval_zero(j + 1);
            let propagated = self.solver.hole_coefficient(sigma, j)?;
            Ok(vec![Identity::new("hole", &assembled, &propagated)])
        })();
        Report::build(sigma, Some(j), Property::Propag, body)
    }

    /// The moves for the pair `ω_P`, `τ_n∘ω_P`, plus the two auxiliary
    /// identities relating their holes at `n` and `n + 1`.
    pub fn check_pair(&self, p: usize, n: usize) -> Report {
        let omega = Cycle::regular(p);
        let body = (|| {
            check_index(&omega, n, 1)?;
            let mut ids = self.check_moves(&omega, n).identities;
            let tau = omega.adjoint_transposition(n)?;
            let hw = self.solver.poly(&omega)?.hole_decomposition();
            let ht = self.solver.poly(&tau)?.hole_decomposition();
            let extra = if p >= 2 {
                self.solver
                    .poly(&Cycle::regular(p - 1))?
                    .multi_derivative(n)
                    .rename(p, |i| if i > n { i + 1 } else { i })
            } else {
                MultilinearPoly::zero(p)
            };
            // Holes are indexed from 1: `Q°_{m}` is entry `m − 1`.
            let lhs_a = &ht[n];
            let rhs_a = &hw[n - 1].derivative(n + 1) + &extra;
            let lhs_b = ht[n - 1].derivative(n + 1);
            let rhs_b = &hw[n] - &extra;
            ids.push(Identity::new("hole n+1", lhs_a, &rhs_a));
            ids.push(Identity::new("hole n", &lhs_b, &rhs_b));
            Ok(ids)
        })();
        Report::build(&omega, Some(n), Property::Pair, body)
    }

    /// Every property in `properties` at every admissible position, for all
    /// single cycles with `p_min ≤ P ≤ p_max`, in parallel.
    pub fn sweep(&self, p_min: usize, p_max: usize, properties: &[Property]) -> Vec<Report> {
        let mut jobs = Vec::new();
        for p in p_min.max(1)..=p_max {
            for sigma in Cycle::all(p) {
                for &prop in properties {
                    if prop == Property::Pair {
                        continue;
                    }
                    for j in prop.positions(p) {
                        jobs.push((sigma.clone(), prop, j));
                    }
                }
            }
            if properties.contains(&Property::Pair) {
                for n in 1..p {
                    jobs.push((Cycle::regular(p), Property::Pair, Some(n)));
                }
            }
        }
        jobs.par_iter().map(|(s, prop, j)| self.check(*prop, s, *j)).collect()
    }
}

/// Sets `x_{j+1} = x_j` in a polynomial that is multilinear in both.
fn merge(q: &MultilinearPoly, j: usize) -> MultilinearPoly {
    let e = q.exchange_decomposition(j);
    let xj = MultilinearPoly::var(q.nvars().max(j + 1), j);
    if !e.d.is_zero() {
        // x_j² does not reduce; keep it visible as a residual rather than fold it.
        return e.recompose();
    }
    &e.a + &(&(&e.b + &e.c) * &xj)
}

/// Aggregate counts of a sweep.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl SweepSummary {
    pub fn of(reports: &[Report]) -> Self {
        let passed = reports.iter().filter(|r| r.pass).count();
        SweepSummary {
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
        }
    }
}

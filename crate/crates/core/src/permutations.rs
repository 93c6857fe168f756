//! Single-cycle permutations, loop splitting, transposition twists and
//! deformation profiles with their extractions.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `{1..P}` with a single orbit, stored as its successor map.
///
/// Composition follows `(τσ)(x) = τ(σ(x))`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Cycle {
    succ: Vec<usize>,
}

impl Cycle {
    /// Builds a cycle from `succ[i - 1] = σ(i)`.
    pub fn from_succ(succ: Vec<usize>) -> Result<Self> {
        let p = succ.len();
        if p == 0 {
            return Err(Error::InvalidCycle("empty successor map".into()));
        }
        let mut seen = vec![false; p];
        for &s in &succ {
            if s == 0 || s > p || seen[s - 1] {
                return Err(Error::InvalidCycle(format!("{succ:?} is not a bijection")));
            }
            seen[s - 1] = true;
        }
        let mut x = 1;
        for step in 1..=p {
            x = succ[x - 1];
            if x == 1 && step < p {
                return Err(Error::InvalidCycle(format!("{succ:?} has more than one orbit")));
            }
        }
        Ok(Cycle { succ })
    }

    /// Builds a cycle from its points listed in loop order (any rotation).
    pub fn from_sequence(seq: &[usize]) -> Result<Self> {
        let p = seq.len();
        if p == 0 {
            return Err(Error::InvalidCycle("empty sequence".into()));
        }
        let mut succ = vec![0; p];
        for (i, &a) in seq.iter().enumerate() {
            if a == 0 || a > p || succ[a - 1] != 0 {
                return Err(Error::InvalidCycle(format!(
                    "{seq:?} is not a permutation of 1..={p}"
                )));
            }
            succ[a - 1] = seq[(i + 1) % p];
        }
        Ok(Cycle { succ })
    }

    /// The regular loop `ω_P = (1 2 ⋯ P)`.
    pub fn regular(p: usize) -> Self {
        assert!(p >= 1, "a loop has at least one point");
        Cycle {
            succ: (1..=p).map(|i| i % p + 1).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.succ.len()
    }

    /// `σ(x)`.
    pub fn apply(&self, x: usize) -> usize {
        self.succ[x - 1]
    }

    /// `σ⁻¹(x)`.
    pub fn apply_inverse(&self, x: usize) -> usize {
        self.succ.iter().position(|&s| s == x).expect("label in range") + 1
    }

    pub fn successors(&self) -> &[usize] {
        &self.succ
    }

    /// Points in loop order, starting at label 1.
    pub fn sequence(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size());
        let mut x = 1;
        for _ in 0..self.size() {
            out.push(x);
            x = self.apply(x);
        }
        out
    }

    pub fn is_regular(&self) -> bool {
        self.succ.iter().enumerate().all(|(i, &s)| s == (i + 1) % self.size() + 1)
    }

    /// Conjugation `π σ π⁻¹`: every label `a` of the loop is renamed `π(a)`.
    pub fn relabel(&self, pi: impl Fn(usize) -> usize) -> Cycle {
        let seq: Vec<usize> = self.sequence().into_iter().map(pi).collect();
        Cycle::from_sequence(&seq).expect("relabeling by a permutation keeps a single cycle")
    }

    fn check_index(&self, j: usize, max: usize) -> Result<()> {
        if j == 0 || j > max {
            Err(Error::IndexOutOfRange { index: j, max })
        } else {
            Ok(())
        }
    }

    /// `τ_j∘σ = τ_j σ τ_j`, exchanging labels `j` and `j+1`.
    pub fn adjoint_transposition(&self, j: usize) -> Result<Cycle> {
        self.check_index(j, self.size().saturating_sub(1))?;
        Ok(self.relabel(|a| {
            if a == j {
                j + 1
            } else if a == j + 1 {
                j
            } else {
                a
            }
        }))
    }

    /// `τ_{k+1}⋯τ_j ∘ σ`: conjugation by the cyclic shift `(k+1 k+2 ⋯ j+1)`.
    pub fn twist_chain(&self, k: usize, j: usize) -> Result<Cycle> {
        self.check_index(j, self.size().saturating_sub(1))?;
        self.check_index(k, j)?;
        Ok(self.relabel(|a| {
            if a > k && a <= j {
                a + 1
            } else if a == j + 1 {
                k + 1
            } else {
                a
            }
        }))
    }

    /// Splits `τ_jσ` into the loop through `j` and the loop through `j+1`.
    pub fn split(&self, j: usize) -> Result<(SubLoop, SubLoop)> {
        self.check_index(j, self.size().saturating_sub(1))?;
        let arc = |start: usize, stop: usize| {
            let mut out = vec![start];
            let mut x = self.apply(start);
            while x != stop {
                out.push(x);
                x = self.apply(x);
            }
            out
        };
        let minus = SubLoop::from_orbit(&arc(j, j + 1))?;
        let plus = SubLoop::from_orbit(&arc(j + 1, j))?;
        Ok((minus, plus))
    }

    /// Conjugation by the reflection `k ↦ P+1−k`.
    pub fn reversed(&self) -> Cycle {
        let p = self.size();
        self.relabel(|a| p + 1 - a)
    }

    pub fn inverse(&self) -> Cycle {
        let mut seq = self.sequence();
        seq[1..].reverse();
        Cycle::from_sequence(&seq).expect("inverse of a cycle is a cycle")
    }

    /// Every single cycle on `{1..P}`, in lexicographic order of sequences.
    pub fn all(p: usize) -> impl Iterator<Item = Cycle> {
        assert!(p >= 1);
        (2..=p).permutations(p - 1).map(|rest| {
            let mut seq = Vec::with_capacity(rest.len() + 1);
            seq.push(1);
            seq.extend(rest);
            Cycle::from_sequence(&seq).expect("permutation of 1..=P")
        })
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.sequence().iter().join(" "))
    }
}

/// Reads `(1 3 2 4)`, `(1,3,2,4)` or the compact `(1324)` when every label is a digit.
fn parse_label_list(s: &str) -> Result<Vec<usize>> {
    let t = s.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected parenthesized list, got {s:?}")))?
        .trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let has_sep = inner.contains(|c: char| c.is_whitespace() || c == ',');
    let parts: Vec<&str> = if has_sep {
        inner
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|p| !p.is_empty())
            .collect()
    } else {
        inner
            .char_indices()
            .map(|(i, c)| &inner[i..i + c.len_utf8()])
            .collect()
    };
    parts
        .into_iter()
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad label {p:?} in {s:?}")))
        })
        .collect()
}

impl FromStr for Cycle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Cycle::from_sequence(&parse_label_list(s)?)
    }
}

impl Serialize for Cycle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cycle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A loop on a subset of labels, relabeled order-preservingly onto `{1..p}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubLoop {
    pub points: Vec<usize>,
    pub cycle: Cycle,
}

impl SubLoop {
    /// Builds the sub-loop visiting `orbit` in the given order.
    pub fn from_orbit(orbit: &[usize]) -> Result<Self> {
        let mut points = orbit.to_vec();
        points.sort_unstable();
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCycle(format!("repeated label in {orbit:?}")));
        }
        let local: Vec<usize> = orbit
            .iter()
            .map(|a| points.binary_search(a).expect("label present") + 1)
            .collect();
        Ok(SubLoop {
            cycle: Cycle::from_sequence(&local)?,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The global label of local label `i`.
    pub fn global(&self, i: usize) -> usize {
        self.points[i - 1]
    }

    /// Global labels in loop order.
    pub fn orbit(&self) -> Vec<usize> {
        self.cycle.sequence().into_iter().map(|i| self.global(i)).collect()
    }
}

/// A permutation `μ` of `{1..|μ|}`, stored as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Profile {
    images: Vec<usize>,
}

impl Profile {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &a in &images {
            if a == 0 || a > n || seen[a - 1] {
                return Err(Error::InvalidProfile(format!("{images:?} is not a permutation")));
            }
            seen[a - 1] = true;
        }
        Ok(Profile { images })
    }

    pub fn empty() -> Self {
        Profile { images: Vec::new() }
    }

    /// The exchange of two neighbours, `(2 1)`.
    pub fn swap() -> Self {
        Profile { images: vec![2, 1] }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `μ(i)`.
    pub fn image(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// `μ⁻¹(a)`.
    pub fn position_of(&self, a: usize) -> usize {
        self.images.iter().position(|&b| b == a).expect("label in range") + 1
    }

    /// True when `μ` moves its first and last points (or is empty).
    pub fn is_minimal(&self) -> bool {
        let n = self.len();
        n == 0 || (n >= 2 && self.images[0] != 1 && self.images[n - 1] != n)
    }

    /// Order-preserving relabeling of an injective list onto `{1..len}`.
    pub fn normalized(images: &[usize]) -> Profile {
        let mut sorted = images.to_vec();
        sorted.sort_unstable();
        Profile {
            images: images
                .iter()
                .map(|a| sorted.binary_search(a).expect("present") + 1)
                .collect(),
        }
    }

    /// All profiles on `{1..n}` with minimal support.
    pub fn full_support(n: usize) -> Vec<Profile> {
        (1..=n)
            .permutations(n)
            .map(|images| Profile { images })
            .filter(Profile::is_minimal)
            .collect()
    }

    /// The translate `μ_n` evaluated at `x`.
    pub fn translate(&self, n: usize, x: usize) -> usize {
        if x >= n && x < n + self.len() {
            self.image(x - n + 1) + n - 1
        } else {
            x
        }
    }

    /// The deformed loop `μ_n∘ω_P`.
    pub fn apply(&self, n: usize, p: usize) -> Result<Cycle> {
        if n == 0 || (!self.is_empty() && n + self.len() - 1 > p) {
            return Err(Error::Unsupported(format!(
                "profile of size {} at offset {n} does not fit in {p} points",
                self.len()
            )));
        }
        Ok(Cycle::regular(p).relabel(|a| self.translate(n, a)))
    }

    /// Builds one of the extractions of this profile.
    pub fn extract(&self, kind: ExtractionKind) -> Result<Extraction> {
        Extraction::new(self, kind)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.images.iter().join(" "))
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Profile::new(parse_label_list(s)?)
    }
}

impl Serialize for Profile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A profile placed at an offset: `μ_n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Deformation {
    pub profile: Profile,
    pub offset: usize,
}

impl Deformation {
    pub fn apply(&self, p: usize) -> Result<Cycle> {
        self.profile.apply(self.offset, p)
    }
}

/// Finds the deformation of smallest support with `μ_n∘ω_P = σ`.
///
/// Every rotation of the loop sequence gives a conjugator of `ω_P`; among them
/// the shortest support wins, then the smallest offset.
pub fn profile_of(sigma: &Cycle) -> Deformation {
    let seq = sigma.sequence();
    let p = seq.len();
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    for r in 0..p {
        let pi: Vec<usize> = (0..p).map(|i| seq[(i + r) % p]).collect();
        let moved: Vec<usize> = (1..=p).filter(|&i| pi[i - 1] != i).collect();
        let (len, n) = match (moved.first(), moved.last()) {
            (Some(&lo), Some(&hi)) => (hi - lo + 1, lo),
            _ => (0, 1),
        };
        if best.as_ref().is_none_or(|(bl, bn, _)| (len, n) < (*bl, *bn)) {
            let images = (n..n + len).map(|x| pi[x - 1] + 1 - n).collect();
            best = Some((len, n, images));
        }
    }
    let (_, offset, images) = best.expect("at least one rotation");
    Deformation {
        profile: Profile { images },
        offset,
    }
}

/// The extraction kinds. `m < M` are labels of the profile.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum ExtractionKind {
    /// `μ^{(a,b)}`: positions `μ⁻¹(a) .. μ⁻¹(b)−1`; needs `μ⁻¹(a) < μ⁻¹(b)`.
    Truncation { from: usize, to: usize },
    /// `μ^{a)(b}`: positions outside `μ⁻¹(a) .. μ⁻¹(b)−1`; needs `μ⁻¹(a) < μ⁻¹(b)`.
    Complement { from: usize, to: usize },
    /// `μ^{M]}`: positions before `μ⁻¹(M)`.
    Head { bound: usize },
    /// `μ^{[M}`: positions after `μ⁻¹(M)`.
    Tail { bound: usize },
    /// `μ^{[m,M]}`: the truncation between `m` and `M`, whichever comes first.
    Inner { m: usize, bound: usize },
    /// `μ^{m][M}`: the complement of `Inner`.
    Outer { m: usize, bound: usize },
}

/// A restriction of a profile to some positions, with its `ω^ℓ_M`-shifted images.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Extraction {
    pub kind: ExtractionKind,
    /// Domain positions in increasing order.
    pub positions: Vec<usize>,
    /// `μ` restricted to `positions`.
    pub images: Vec<usize>,
    /// Images after composition with `ω^ℓ_M`.
    pub varpi: Vec<usize>,
    /// The bound `M`; images above it are floating.
    pub bound: usize,
    /// `varpi` relabeled order-preservingly onto `{1..len}`.
    pub profile: Profile,
}

/// `ω^ℓ_M = (ℓ ℓ+1 ⋯ M)` applied to `a`.
pub fn partial_shift(l: usize, m_bound: usize, a: usize) -> usize {
    if a >= l && a < m_bound {
        a + 1
    } else if a == m_bound {
        l
    } else {
        a
    }
}

impl Extraction {
    fn new(mu: &Profile, kind: ExtractionKind) -> Result<Self> {
        let n = mu.len();
        let label_ok = |a: usize| a >= 1 && a <= n;
        let pair = |a: usize, b: usize| -> Result<(usize, usize)> {
            if !label_ok(a) || !label_ok(b) || a == b {
                return Err(Error::InvalidProfile(format!(
                    "labels ({a},{b}) invalid for a profile of size {n}"
                )));
            }
            Ok((mu.position_of(a), mu.position_of(b)))
        };
        let (positions, shift_from, bound): (Vec<usize>, usize, usize) = match kind {
            ExtractionKind::Truncation { from, to } | ExtractionKind::Complement { from, to } => {
                let (i, j) = pair(from, to)?;
                if i >= j {
                    return Err(Error::InvalidProfile(format!(
                        "positions of {from} and {to} are not ordered in {mu}"
                    )));
                }
                let inside = matches!(kind, ExtractionKind::Truncation { .. });
                let pos = (1..=n).filter(|&x| (x >= i && x < j) == inside).collect();
                (pos, from.min(to) + 1, from.max(to))
            }
            ExtractionKind::Inner { m, bound } | ExtractionKind::Outer { m, bound } => {
                if m >= bound {
                    return Err(Error::InvalidProfile(format!("need m < M, got ({m},{bound})")));
                }
                let (i, j) = pair(m, bound)?;
                let (lo, hi) = (i.min(j), i.max(j));
                let inside = matches!(kind, ExtractionKind::Inner { .. });
                let pos = (1..=n).filter(|&x| (x >= lo && x < hi) == inside).collect();
                (pos, m + 1, bound)
            }
            ExtractionKind::Head { bound } | ExtractionKind::Tail { bound } => {
                if !label_ok(bound) {
                    return Err(Error::InvalidProfile(format!(
                        "bound {bound} invalid for a profile of size {n}"
                    )));
                }
                let i = mu.position_of(bound);
                let pos = if matches!(kind, ExtractionKind::Head { .. }) {
                    (1..i).collect()
                } else {
                    (i + 1..=n).collect()
                };
                (pos, 1, bound)
            }
        };
        let images: Vec<usize> = positions.iter().map(|&x| mu.image(x)).collect();
        let varpi: Vec<usize> = images
            .iter()
            .map(|&a| partial_shift(shift_from, bound, a))
            .collect();
        let profile = Profile::normalized(&varpi);
        Ok(Extraction {
            kind,
            positions,
            images,
            varpi,
            bound,
            profile,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of images above the bound, `k^{·}`.
    pub fn floating(&self) -> usize {
        self.varpi.iter().filter(|&&a| a > self.bound).count()
    }

    /// Images above the bound, largest first. These are the floating variables
    /// of the extracted loop in the order `y₀, y₁, …` of its own tower.
    pub fn floating_images_desc(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.varpi.iter().copied().filter(|&a| a > self.bound).collect();
        f.sort_unstable_by(|a, b| b.cmp(a));
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Cycle {
        s.parse().unwrap()
    }

    #[test]
    fn regular_and_display() {
        assert_eq!(Cycle::regular(1).to_string(), "(1)");
        assert_eq!(Cycle::regular(4).to_string(), "(1 2 3 4)");
        assert_eq!(c("(1234)"), Cycle::regular(4));
        assert_eq!(c("(3 4 1 2)"), Cycle::regular(4));
        assert!(Cycle::regular(5).is_regular());
    }

    #[test]
    fn rejects_bad_input() {
        assert!("(1 2 2)".parse::<Cycle>().is_err());
        assert!("(1 3)".parse::<Cycle>().is_err());
        assert!("1 2".parse::<Cycle>().is_err());
        assert!(Cycle::from_succ(vec![2, 1, 3]).is_err());
    }

    #[test]
    fn adjoint_transposition_examples() {
        assert_eq!(c("(12345)").adjoint_transposition(2).unwrap(), c("(13245)"));
        assert_eq!(c("(12)").adjoint_transposition(1).unwrap(), c("(12)"));
        assert_eq!(c("(1234)").adjoint_transposition(3).unwrap(), c("(1243)"));
        assert!(c("(123)").adjoint_transposition(3).is_err());
    }

    #[test]
    fn split_examples() {
        let (m, p) = c("(123)").split(1).unwrap();
        assert_eq!(m.orbit(), vec![1]);
        assert_eq!(p.orbit(), vec![2, 3]);
        let (m, p) = c("(1234)").split(2).unwrap();
        assert_eq!(m.orbit(), vec![2]);
        assert_eq!(p.orbit(), vec![1, 3, 4]);
        assert_eq!(p.points, vec![1, 3, 4]);
        assert_eq!(p.cycle, Cycle::regular(3));
        let (m, p) = c("(12)").split(1).unwrap();
        assert_eq!((m.orbit(), p.orbit()), (vec![1], vec![2]));
    }

    #[test]
    fn twist_chain_examples() {
        assert_eq!(c("(1234)").twist_chain(1, 2).unwrap(), c("(1324)"));
        assert_eq!(c("(12345)").twist_chain(1, 3).unwrap(), c("(13425)"));
        assert_eq!(c("(13245)").twist_chain(3, 3).unwrap(), c("(13245)"));
    }

    #[test]
    fn twist_chain_is_product_of_transpositions() {
        for sigma in Cycle::all(6) {
            for j in 1..6 {
                for k in 1..=j {
                    let mut t = sigma.clone();
                    for i in (k + 1..=j).rev() {
                        t = t.adjoint_transposition(i).unwrap();
                    }
                    assert_eq!(sigma.twist_chain(k, j).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn reversal_and_inverse() {
        assert_eq!(c("(123)").reversed(), c("(132)"));
        assert_eq!(c("(1324)").inverse(), c("(1423)"));
    }

    #[test]
    fn all_counts() {
        assert_eq!(Cycle::all(1).count(), 1);
        assert_eq!(Cycle::all(5).count(), 24);
        assert_eq!(Cycle::all(7).count(), 720);
    }

    #[test]
    fn profile_of_examples() {
        let d = profile_of(&c("(13245)"));
        assert_eq!((d.profile.clone(), d.offset), (Profile::swap(), 2));
        let d = profile_of(&Cycle::regular(6));
        assert!(d.profile.is_empty());
        // (1342) is τ₁∘ω₄; the rotation starting at 1 would give (2 3 1) at n=2.
        let d = profile_of(&c("(1342)"));
        assert_eq!((d.profile.clone(), d.offset), (Profile::swap(), 1));
        assert_eq!(Profile::new(vec![2, 3, 1]).unwrap().apply(2, 4).unwrap(), c("(1342)"));
    }

    #[test]
    fn profile_round_trip() {
        for p in 1..=6 {
            for sigma in Cycle::all(p) {
                let d = profile_of(&sigma);
                assert!(d.profile.is_minimal(), "{sigma} -> {}", d.profile);
                assert_eq!(d.apply(p).unwrap(), sigma);
            }
        }
    }

    #[test]
    fn full_support_s3() {
        let s3: Vec<String> = Profile::full_support(3).iter().map(|p| p.to_string()).collect();
        assert_eq!(s3, vec!["(2 3 1)", "(3 1 2)", "(3 2 1)"]);
        assert_eq!(Profile::full_support(2), vec![Profile::swap()]);
    }

    #[test]
    fn extraction_fixture_pair() {
        let mu = Profile::new(vec![2, 6, 4, 7, 3, 1, 5]).unwrap();
        let e = mu.extract(ExtractionKind::Truncation { from: 2, to: 5 }).unwrap();
        assert_eq!(e.positions, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(e.varpi, vec![2, 6, 5, 7, 4, 1]);
        let inner = mu.extract(ExtractionKind::Inner { m: 2, bound: 5 }).unwrap();
        assert_eq!(inner.varpi, e.varpi);
        let outer = mu.extract(ExtractionKind::Outer { m: 2, bound: 5 }).unwrap();
        assert_eq!((outer.positions.clone(), outer.varpi.clone()), (vec![7], vec![3]));
    }

    #[test]
    fn extraction_fixture_head_tail() {
        let mu = Profile::new(vec![2, 5, 7, 6, 4, 1, 3]).unwrap();
        let head = mu.extract(ExtractionKind::Head { bound: 4 }).unwrap();
        assert_eq!(head.varpi, vec![3, 5, 7, 6]);
        assert_eq!(head.floating(), 3);
        let tail = mu.extract(ExtractionKind::Tail { bound: 4 }).unwrap();
        assert_eq!(tail.positions, vec![6, 7]);
        assert_eq!(tail.varpi, vec![2, 4]);
        assert_eq!(tail.floating(), 0);
    }

    #[test]
    fn extraction_swap() {
        let mu = Profile::swap();
        let head = mu.extract(ExtractionKind::Head { bound: 1 }).unwrap();
        assert_eq!((head.positions.clone(), head.images.clone()), (vec![1], vec![2]));
        assert_eq!(head.floating(), 1);
        assert!(mu.extract(ExtractionKind::Tail { bound: 1 }).unwrap().is_empty());
        let inner = mu.extract(ExtractionKind::Inner { m: 1, bound: 2 }).unwrap();
        assert_eq!((inner.images.clone(), inner.floating()), (vec![2], 0));
        let outer = mu.extract(ExtractionKind::Outer { m: 1, bound: 2 }).unwrap();
        assert_eq!(outer.images, vec![1]);
    }

    #[test]
    fn extraction_bookkeeping_exhaustive() {
        for n in 2..=5 {
            for images in (1..=n).permutations(n) {
                let mu = Profile::new(images).unwrap();
                for big in 1..=n {
                    let head = mu.extract(ExtractionKind::Head { bound: big }).unwrap();
                    let tail = mu.extract(ExtractionKind::Tail { bound: big }).unwrap();
                    assert_eq!(head.len() + tail.len(), n - 1);
                    assert_eq!(head.floating() + tail.floating(), n - big);
                    for m in 1..big {
                        let i = mu.extract(ExtractionKind::Inner { m, bound: big }).unwrap();
                        let o = mu.extract(ExtractionKind::Outer { m, bound: big }).unwrap();
                        assert_eq!(i.len() + o.len(), n);
                        assert_eq!(i.floating() + o.floating(), n - big);
                        let mut all: Vec<usize> = i.varpi.iter().chain(&o.varpi).copied().collect();
                        all.sort_unstable();
                        assert_eq!(all, (1..=n).collect::<Vec<_>>());
                    }
                }
            }
        }
    }
}

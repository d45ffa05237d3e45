//! Absolute and relative root data for simple types, split or quasi-split.
//!
//! A quasi-split group is described by an absolute simply-laced type together
//! with a diagram automorphism of order `e`. The relative root system lives in
//! `𝔞*` and is realized in the basis of relative simple roots: every root is
//! an integer coefficient vector, and a Gram matrix supplies the pairing.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, invariant, Result};

/// Cartan–Killing family letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl FromStr for Family {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" => Ok(Family::E),
            "F" => Ok(Family::F),
            "G" => Ok(Family::G),
            other => invalid(format!("unknown family '{other}' (expected one of A..G)")),
        }
    }
}

/// A simple type with a pinned twist of order `e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupSpec {
    pub family: Family,
    pub rank_abs: usize,
    pub e: u32,
}

impl GroupSpec {
    /// Validates the combination of family, rank and twist order.
    pub fn new(family: Family, rank_abs: usize, e: u32) -> Result<Self> {
        use Family::*;
        let rank_ok = match family {
            A => rank_abs >= 1,
            B | C => rank_abs >= 2,
            D => rank_abs >= 4,
            E => (6..=8).contains(&rank_abs),
            F => rank_abs == 4,
            G => rank_abs == 2,
        };
        if !rank_ok {
            return invalid(format!("{family}{rank_abs} is not a simple type (rank out of range for family {family})"));
        }
        let twist_ok = match e {
            1 => true,
            2 => matches!((family, rank_abs), (A, r) if r >= 2) || family == D || (family == E && rank_abs == 6),
            3 => family == D && rank_abs == 4,
            _ => false,
        };
        if !twist_ok {
            return invalid(format!(
                "twist order {e} is not allowed for {family}{rank_abs}: e=2 needs A (rank >= 2), D or E6; e=3 needs D4"
            ));
        }
        Ok(GroupSpec { family, rank_abs, e })
    }

    /// Short label such as `G2`, `2A4` or `3D4`.
    pub fn label(&self) -> String {
        if self.e == 1 {
            format!("{}{}", self.family, self.rank_abs)
        } else {
            format!("{}{}{}", self.e, self.family, self.rank_abs)
        }
    }

    /// True for the non-reduced case ²A_{2n}.
    pub fn is_odd_unitary(&self) -> bool {
        self.e == 2 && self.family == Family::A && self.rank_abs.is_multiple_of(2)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for GroupSpec {
    type Err = crate::Error;
    /// Parses labels like `E8`, `2A4`, `3D4` (also accepts a leading `^`).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('^');
        let (e, rest) = match t.chars().next() {
            Some(c @ ('2' | '3')) => (c.to_digit(10).unwrap_or(1), &t[1..]),
            _ => (1, t),
        };
        let mut chars = rest.chars();
        let fam: Family = match chars.next() {
            Some(c) => c.to_string().parse()?,
            None => return invalid(format!("cannot parse type label '{s}'")),
        };
        let rank: usize = match chars.as_str().parse() {
            Ok(r) => r,
            Err(_) => return invalid(format!("cannot parse rank in type label '{s}'")),
        };
        GroupSpec::new(fam, rank, e)
    }
}

/// Symmetric Gram matrix `(α_i, α_j)` of the simple roots of a reduced Cartan type.
///
/// Bourbaki numbering, except that `G2` takes `α_1` long. Squared lengths are
/// scaled to small integers.
pub fn cartan_gram(family: Family, n: usize) -> Vec<Vec<i64>> {
    use Family::*;
    let mut g = vec![vec![0i64; n]; n];
    let link = |g: &mut Vec<Vec<i64>>, i: usize, j: usize, v: i64| {
        g[i][j] = v;
        g[j][i] = v;
    };
    match family {
        A => {
            for i in 0..n {
                g[i][i] = 2;
                if i + 1 < n {
                    link(&mut g, i, i + 1, -1);
                }
            }
        }
        B => {
            for i in 0..n {
                g[i][i] = 2;
                if i + 1 < n {
                    link(&mut g, i, i + 1, -1);
                }
            }
            g[n - 1][n - 1] = 1;
        }
        C => {
            for i in 0..n {
                g[i][i] = 2;
                if i + 1 < n {
                    link(&mut g, i, i + 1, -1);
                }
            }
            g[n - 1][n - 1] = 4;
            link(&mut g, n - 2, n - 1, -2);
        }
        D => {
            for i in 0..n {
                g[i][i] = 2;
            }
            for i in 0..n - 2 {
                link(&mut g, i, i + 1, -1);
            }
            link(&mut g, n - 3, n - 1, -1);
        }
        E => {
            for i in 0..n {
                g[i][i] = 2;
            }
            link(&mut g, 0, 2, -1);
            link(&mut g, 1, 3, -1);
            for i in 2..n - 1 {
                link(&mut g, i, i + 1, -1);
            }
        }
        F => {
            g = vec![vec![4, -2, 0, 0], vec![-2, 4, -2, 0], vec![0, -2, 2, -1], vec![0, 0, -1, 2]];
        }
        G => {
            g = vec![vec![6, -3], vec![-3, 2]];
        }
    }
    g
}

/// `(a, b)` for coefficient vectors in the simple-root basis.
pub fn inner(gram: &[Vec<i64>], a: &[i64], b: &[i64]) -> i64 {
    let mut s = 0;
    for i in 0..a.len() {
        if a[i] == 0 {
            continue;
        }
        for j in 0..b.len() {
            s += a[i] * gram[i][j] * b[j];
        }
    }
    s
}

/// `⟨a, b∨⟩ = 2(a, b)/(b, b)`; panics if not integral (crystallographic failure).
pub fn coroot_pairing(gram: &[Vec<i64>], a: &[i64], b: &[i64]) -> i64 {
    let num = 2 * inner(gram, a, b);
    let den = inner(gram, b, b);
    assert!(den > 0 && num % den == 0, "non-integral coroot pairing");
    num / den
}

/// Positive roots of the reduced root system with the given Gram matrix, sorted by height.
///
/// Standard root-string construction: `β + α_j` is a root exactly when
/// `p − ⟨β, α_j∨⟩ > 0`, where `p` is the length of the `α_j`-string below `β`.
pub fn positive_roots(gram: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = gram.len();
    let mut roots: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        })
        .collect();
    let mut seen: HashSet<Vec<i64>> = roots.iter().cloned().collect();
    let mut k = 0;
    while k < roots.len() {
        let beta = roots[k].clone();
        for j in 0..n {
            let mut cand = beta.clone();
            cand[j] += 1;
            if seen.contains(&cand) {
                continue;
            }
            let mut p = 0;
            let mut t = beta.clone();
            loop {
                t[j] -= 1;
                if seen.contains(&t) {
                    p += 1;
                } else {
                    break;
                }
            }
            let unit: Vec<i64> = (0..n).map(|i| i64::from(i == j)).collect();
            if p - coroot_pairing(gram, &beta, &unit) > 0 {
                seen.insert(cand.clone());
                roots.push(cand);
            }
        }
        k += 1;
    }
    roots.sort_by(|a, b| height(a).cmp(&height(b)).then_with(|| a.cmp(b)));
    roots
}

/// Height: sum of coefficients.
pub fn height(v: &[i64]) -> i64 {
    v.iter().sum()
}

/// Degrees of the Weyl group read off the height distribution of positive roots.
///
/// With `n_k` positive roots of height `k`, the exponents form the conjugate
/// partition of `(n_1, n_2, ...)`; degrees are exponents plus one. Valid for
/// reducible systems as well (the conjugate of a sum is the union).
pub fn degrees_from_heights(positive: &[Vec<i64>], rank: usize) -> Vec<u32> {
    let maxh = positive.iter().map(|r| height(r)).max().unwrap_or(0) as usize;
    let mut counts = vec![0usize; maxh + 1];
    for r in positive {
        counts[height(r) as usize] += 1;
    }
    let mut degs: Vec<u32> =
        (1..=rank).map(|j| counts[1..].iter().filter(|&&c| c >= j).count() as u32 + 1).collect();
    degs.sort_unstable();
    degs
}

/// A relative root: coefficients in the relative simple roots plus its metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelRoot {
    pub coeffs: Vec<i64>,
    /// Squared length in the stored Gram normalization.
    pub norm2: i64,
    /// True if the root has maximal length in the relative system.
    pub longest: bool,
    /// Number of absolute roots restricting to it.
    pub multiplicity: u32,
    /// `⟨α_j, ᾱ∨⟩` for the relative simple roots `α_j`.
    pub coroot: Vec<i64>,
}

impl RelRoot {
    pub fn height(&self) -> i64 {
        height(&self.coeffs)
    }
}

/// The full package of group data used by every other module.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootDatum {
    pub spec: GroupSpec,
    /// Relative rank `r = dim 𝔞`.
    pub rank: usize,
    /// Name of the relative root system (e.g. `BC2`).
    pub relative_type: String,
    /// Gram matrix of the relative simple roots.
    pub gram: Vec<Vec<i64>>,
    /// All relative roots (positive first, then their negatives in the same order).
    pub roots: Vec<RelRoot>,
    /// Number of absolute roots.
    pub abs_root_count: usize,
    /// Degrees of the absolute Weyl group, ascending.
    pub degrees: Vec<u32>,
    /// Twist exponents aligned with `degrees`.
    pub twist_exponents: Vec<u32>,
    /// Coefficients of `β = Σ a_i α_i` (index 0 is `a_0 = 1`).
    pub marks: Vec<u32>,
    /// Dual marks with `a∨_0 β∨ = Σ a∨_i α_i∨`.
    pub dual_marks: Vec<u32>,
    pub h_theta: u32,
    pub h_dual_theta: u32,
    /// Index into `roots` of `β`.
    pub beta: usize,
    /// `ρ∨` in the coordinates `y_j = ⟨α_j, x⟩`.
    pub rho_vee: Vec<i64>,
}

/// Build the data for a validated spec.
pub fn build_root_datum(spec: GroupSpec) -> Result<RootDatum> {
    use Family::*;
    let n = spec.rank_abs;
    // Absolute system: used for degrees and the absolute root count.
    let abs_gram = cartan_gram(spec.family, n);
    let abs_pos = positive_roots(&abs_gram);
    let degrees = degrees_from_heights(&abs_pos, n);

    // Relative system, possibly non-reduced.
    let (rel_family, rel_rank, doubled) = match (spec.e, spec.family) {
        (1, f) => (f, n, false),
        (2, A) if n % 2 == 1 => (C, n.div_ceil(2), false),
        (2, A) => (B, n / 2, true),
        (2, D) => (B, n - 1, false),
        (2, E) => (F, 4, false),
        (3, D) => (G, 2, false),
        _ => return invalid(format!("no relative system for {spec}")),
    };
    let relative_type = if doubled { format!("BC{rel_rank}") } else { format!("{rel_family}{rel_rank}") };
    let gram = if rel_rank == 1 && rel_family == B { vec![vec![1]] } else { cartan_gram(rel_family, rel_rank) };
    let mut pos = if rel_rank == 1 { vec![vec![1]] } else { positive_roots(&gram) };
    let norms: Vec<i64> = pos.iter().map(|r| inner(&gram, r, r)).collect();
    let min_norm = *norms.iter().min().unwrap_or(&0);
    if doubled {
        let shorts: Vec<Vec<i64>> =
            pos.iter().zip(&norms).filter(|(_, &nn)| nn == min_norm).map(|(r, _)| r.iter().map(|x| 2 * x).collect()).collect();
        pos.extend(shorts);
        pos.sort_by(|a, b| height(a).cmp(&height(b)).then_with(|| a.cmp(b)));
    }
    let max_norm = pos.iter().map(|r| inner(&gram, r, r)).max().unwrap_or(0);
    let e = spec.e;
    let make = |c: Vec<i64>| {
        let norm2 = inner(&gram, &c, &c);
        let longest = norm2 == max_norm;
        let coroot: Vec<i64> = (0..rel_rank)
            .map(|j| {
                let unit: Vec<i64> = (0..rel_rank).map(|i| i64::from(i == j)).collect();
                coroot_pairing(&gram, &unit, &c)
            })
            .collect();
        RelRoot { coeffs: c, norm2, longest, multiplicity: if longest { 1 } else { e }, coroot }
    };
    let mut roots: Vec<RelRoot> = pos.iter().cloned().map(make).collect();
    let negs: Vec<RelRoot> = pos.iter().map(|r| make(r.iter().map(|x| -x).collect())).collect();
    roots.extend(negs);

    let abs_root_count: usize = roots.iter().map(|r| r.multiplicity as usize).sum();
    if abs_root_count != 2 * abs_pos.len() {
        return invariant(format!(
            "{spec}: relative multiplicities sum to {abs_root_count}, absolute system has {} roots",
            2 * abs_pos.len()
        ));
    }

    // β: highest root (split), highest short root (twisted), or 2ε₁ for ²A_{2n}.
    let npos = pos.len();
    let beta = if e == 1 || doubled {
        (0..npos).max_by_key(|&i| (roots[i].height(), roots[i].norm2)).unwrap()
    } else {
        (0..npos).filter(|&i| roots[i].norm2 == min_norm).max_by_key(|&i| roots[i].height()).unwrap()
    };
    let bcoeffs = roots[beta].coeffs.clone();
    let mut marks = vec![1u32];
    marks.extend(bcoeffs.iter().map(|&c| c as u32));
    let h_theta = e * marks.iter().sum::<u32>();

    let a0_dual: i64 = if doubled { 2 } else { 1 };
    let bnorm = roots[beta].norm2;
    let mut dual_marks = vec![a0_dual as u32];
    for (i, &b) in bcoeffs.iter().enumerate() {
        let num = a0_dual * b * gram[i][i];
        if num % bnorm != 0 {
            return invariant(format!("{spec}: non-integral dual mark at node {}", i + 1));
        }
        dual_marks.push((num / bnorm) as u32);
    }
    let h_dual_theta = dual_marks.iter().sum();

    let twist_exponents = twist_exponents_for(spec, &degrees);

    let datum = RootDatum {
        spec,
        rank: rel_rank,
        relative_type,
        gram,
        roots,
        abs_root_count,
        degrees,
        twist_exponents,
        marks,
        dual_marks,
        h_theta,
        h_dual_theta,
        beta,
        rho_vee: vec![1; rel_rank],
    };
    datum.check_invariants()?;
    Ok(datum)
}

/// Eigen-characters of `μ_e` on a basis of fundamental invariants.
///
/// For ²A_n and ²E₆ the twist acts as `−w₀`, hence by `(−1)^d` in degree `d`.
/// For ²D_n it flips the sign of the Pfaffian (degree `n`) only. For ³D₄ the
/// two degree-4 invariants carry the two nontrivial characters.
fn twist_exponents_for(spec: GroupSpec, degrees: &[u32]) -> Vec<u32> {
    use Family::*;
    match (spec.e, spec.family) {
        (1, _) => vec![0; degrees.len()],
        (2, A) | (2, E) => degrees.iter().map(|d| d % 2).collect(),
        (2, D) => {
            let n = spec.rank_abs as u32;
            let k = degrees.iter().rposition(|&d| d == n).expect("Pfaffian degree present");
            (0..degrees.len()).map(|i| u32::from(i == k)).collect()
        }
        (3, D) => {
            let mut next = 1;
            degrees
                .iter()
                .map(|&d| {
                    if d == 4 {
                        let v = next;
                        next += 1;
                        v
                    } else {
                        0
                    }
                })
                .collect()
        }
        _ => vec![0; degrees.len()],
    }
}

impl RootDatum {
    /// Positive roots are the first half of `roots`.
    pub fn n_positive(&self) -> usize {
        self.roots.len() / 2
    }

    /// Index of `−roots[i]`.
    pub fn neg(&self, i: usize) -> usize {
        let h = self.n_positive();
        if i < h {
            i + h
        } else {
            i - h
        }
    }

    /// Finds the index of a root by coefficients.
    pub fn find(&self, coeffs: &[i64]) -> Option<usize> {
        self.roots.iter().position(|r| r.coeffs == coeffs)
    }

    /// Whether `ᾱ + k/e` is an affine root for the root with index `i`.
    pub fn admissible(&self, i: usize, k: i64) -> bool {
        let r = &self.roots[i];
        let e = self.spec.e as i64;
        if !r.longest {
            true
        } else if self.spec.is_odd_unitary() {
            k.rem_euclid(2) == 1
        } else {
            k.rem_euclid(e) == 0
        }
    }

    /// `Σ ε_i / e = (rank_abs − r)/2`, compared exactly as `2 Σ ε_i = e (rank_abs − r)`.
    pub fn twist_exponents_check(&self) -> bool {
        let lhs: u32 = 2 * self.twist_exponents.iter().sum::<u32>();
        let rhs = self.spec.e * (self.spec.rank_abs as u32 - self.rank as u32);
        lhs == rhs
    }

    /// Weyl group order from the degrees.
    pub fn weyl_order(&self) -> u128 {
        self.degrees.iter().map(|&d| d as u128).product()
    }

    fn check_invariants(&self) -> Result<()> {
        let spec = self.spec;
        let sum_marks: u32 = self.marks.iter().sum();
        if self.h_theta != spec.e * sum_marks {
            return invariant(format!("{spec}: h_theta != e * sum of marks"));
        }
        if self.abs_root_count != (self.h_theta as usize) * self.rank {
            return invariant(format!(
                "{spec}: absolute root count {} != h_theta * r = {}",
                self.abs_root_count,
                self.h_theta as usize * self.rank
            ));
        }
        if !self.twist_exponents_check() {
            return invariant(format!("{spec}: twist exponents fail the sum identity"));
        }
        if self.twist_exponents.iter().any(|&x| x >= spec.e) {
            return invariant(format!("{spec}: twist exponent out of range"));
        }
        let n_abs_pos = self.abs_root_count / 2;
        let deg_sum: u32 = self.degrees.iter().map(|d| d - 1).sum();
        if deg_sum as usize != n_abs_pos {
            return invariant(format!("{spec}: exponents do not sum to the number of positive roots"));
        }
        Ok(())
    }
}

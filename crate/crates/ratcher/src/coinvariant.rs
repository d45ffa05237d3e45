//! Coinvariant algebras of the wall group and multiplication images inside them.
//!
//! [`GradedQuotient`] is the direct construction: invariants degree by degree
//! as common fixed vectors of the generators on `Sym^d`, the ideal slice
//! `I_d = 𝔞*·I_{d−1} + Inv_d`, and the non-pivot monomials of `I_d` as a
//! normal-form basis of `H_d`.
//!
//! [`CoinvariantAlgebra`] is what the dimension computations use. Linear forms
//! fixed by the group lie in the ideal, and the remaining space splits along
//! the irreducible components, so `H` is the tensor product of the coinvariant
//! algebras of the components in their own simple-root variables. Each factor
//! is built once per Cartan matrix and shared through a process-wide table.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, invariant, Error, Result};
use crate::exactla::{self, q, Echelon, IntEchelon, QMatrix, SparseVec, Q};
use crate::rootdata::{self, coroot_pairing, inner, Family, RootDatum};

/// Default cap on the number of monomials of top degree in the ambient variables.
pub const DEFAULT_MONOMIAL_BUDGET: u128 = 100_000;

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of monomials of degree `d` in `n` variables.
pub fn monomial_count(n: usize, d: usize) -> u128 {
    if n == 0 {
        return u128::from(d == 0);
    }
    binomial((d + n - 1) as u64, (n - 1) as u64)
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// A polynomial with rational coefficients, keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PolyQ {
    pub nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl PolyQ {
    pub fn zero(nvars: usize) -> Self {
        PolyQ { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    /// The monomial `x^exp`.
    pub fn monomial(exp: Vec<u32>) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, Q::one());
        p
    }

    /// `Σ c_i x_i`.
    pub fn linear(coeffs: &[Q]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    /// Product of integer linear forms.
    pub fn product_of_linear(nvars: usize, factors: &[Vec<i64>]) -> Self {
        factors.iter().fold(Self::one(nvars), |acc, f| {
            acc.mul(&Self::linear(&f.iter().map(|&x| q(x)).collect::<Vec<_>>()))
        })
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().sum::<u32>() as usize).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn add(&self, other: &PolyQ) -> PolyQ {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> PolyQ {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        PolyQ { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn mul(&self, other: &PolyQ) -> PolyQ {
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    /// Substitutes `x_i ↦ images[i]`.
    pub fn substitute(&self, images: &[PolyQ]) -> PolyQ {
        let n = images.first().map_or(self.nvars, |p| p.nvars);
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            let mut t = Self::constant(n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t.mul(&images[i]);
                }
            }
            out = out.add(&t);
        }
        out
    }
}

/// Exponent vectors of degree `d` in `n` variables, in decreasing grevlex order.
pub fn monomials(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=d {
            prefix.push(k);
            rec(n, d - k, prefix, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(n, d as u32, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| grevlex_cmp(b, a));
    out
}

/// Graded reverse lexicographic comparison.
pub fn grevlex_cmp(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| {
        for i in (0..a.len()).rev() {
            if a[i] != b[i] {
                return b[i].cmp(&a[i]);
            }
        }
        std::cmp::Ordering::Equal
    })
}

// ---------------------------------------------------------------------------
// The wall group
// ---------------------------------------------------------------------------

/// One irreducible factor of a wall group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallComponent {
    /// Cartan type such as `B2`.
    pub cartan_type: String,
    pub rank: usize,
    /// Indices into [`WallGroup::simple_roots`].
    pub simple: Vec<usize>,
    /// Cartan matrix `⟨β_i, β_j∨⟩` of the component's simple roots.
    pub cartan: Vec<Vec<i64>>,
    pub degrees: Vec<u32>,
}

/// A finite reflection group acting on `𝔞*`, recognized by type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallGroup {
    /// Dimension of the ambient space.
    pub ambient_rank: usize,
    /// Gram matrix of the ambient basis.
    pub gram: Vec<Vec<i64>>,
    /// Simple roots in ambient coordinates.
    pub simple_roots: Vec<Vec<i64>>,
    /// All positive roots in ambient coordinates.
    pub positive_roots: Vec<Vec<i64>>,
    pub components: Vec<WallComponent>,
    /// Product of component types, `1` for the trivial group.
    pub type_decomposition: String,
    pub degrees: Vec<u32>,
    pub order: u128,
    pub n_reflections: usize,
}

fn family_degrees(f: Family, k: usize) -> Vec<u32> {
    let k32 = k as u32;
    let mut d: Vec<u32> = match f {
        Family::A => (2..=k32 + 1).collect(),
        Family::B | Family::C => (1..=k32).map(|i| 2 * i).collect(),
        Family::D => (1..k32).map(|i| 2 * i).chain([k32]).collect(),
        Family::E => match k {
            6 => vec![2, 5, 6, 8, 9, 12],
            7 => vec![2, 6, 8, 10, 12, 14, 18],
            _ => vec![2, 8, 12, 14, 18, 20, 24, 30],
        },
        Family::F => vec![2, 6, 8, 12],
        Family::G => vec![2, 6],
    };
    d.sort_unstable();
    d
}

/// Recognizes an irreducible crystallographic Cartan matrix.
fn classify_irreducible(cartan: &[Vec<i64>], norms: &[i64]) -> Result<(Family, usize)> {
    let k = cartan.len();
    let mut edges = 0;
    for i in 0..k {
        if cartan[i][i] != 2 {
            return invariant("Cartan matrix has a diagonal entry other than 2");
        }
        for j in 0..k {
            if i == j {
                continue;
            }
            let (a, b) = (cartan[i][j], cartan[j][i]);
            if a > 0 || (a == 0) != (b == 0) || a * b > 3 {
                return invariant("Cartan matrix is not crystallographic");
            }
            if i < j && a != 0 {
                edges += 1;
            }
        }
    }
    if edges + 1 != k {
        return invariant("Dynkin diagram of a component is not a tree");
    }
    let gram: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| cartan[i][j] * norms[j]).collect()).collect();
    // This is twice the Gram matrix, which has the same root system.
    let count = rootdata::positive_roots(&gram).len();
    let max_norm = *norms.iter().max().unwrap();
    let short = norms.iter().filter(|&&n| n != max_norm).count();
    let triple = (0..k).any(|i| (0..k).any(|j| cartan[i][j] == -3));
    let f = if triple {
        Family::G
    } else if short == 0 {
        if count == k * (k + 1) / 2 {
            Family::A
        } else if k >= 4 && count == k * (k - 1) {
            Family::D
        } else if (k == 6 && count == 36) || (k == 7 && count == 63) || (k == 8 && count == 120) {
            Family::E
        } else {
            return invariant(format!("unrecognized simply laced component: rank {k}, {count} roots"));
        }
    } else if k == 4 && count == 24 {
        Family::F
    } else if count == k * k {
        if short == 1 {
            Family::B
        } else {
            Family::C
        }
    } else {
        return invariant(format!("unrecognized component: rank {k}, {count} roots"));
    };
    Ok((f, k))
}

impl WallGroup {
    /// The trivial group on an `r`-dimensional space.
    pub fn trivial(gram: Vec<Vec<i64>>) -> Self {
        WallGroup {
            ambient_rank: gram.len(),
            gram,
            simple_roots: Vec::new(),
            positive_roots: Vec::new(),
            components: Vec::new(),
            type_decomposition: "1".into(),
            degrees: Vec::new(),
            order: 1,
            n_reflections: 0,
        }
    }

    /// Builds the group from its positive roots, given as indices into `datum.roots`.
    ///
    /// The roots must form the positive system of a reduced root system with
    /// one root per reflecting hyperplane.
    pub fn from_roots(datum: &RootDatum, roots: &[usize]) -> Result<Self> {
        let pos: Vec<Vec<i64>> = roots.iter().map(|&i| datum.roots[i].coeffs.clone()).collect();
        Self::from_positive_roots(datum.gram.clone(), pos)
    }

    /// Builds the group from a positive system given in ambient coordinates.
    pub fn from_positive_roots(gram: Vec<Vec<i64>>, positive: Vec<Vec<i64>>) -> Result<Self> {
        if positive.is_empty() {
            return Ok(Self::trivial(gram));
        }
        let set: std::collections::HashSet<&Vec<i64>> = positive.iter().collect();
        let simple: Vec<Vec<i64>> = positive
            .iter()
            .filter(|a| {
                !positive.iter().any(|b| {
                    let diff: Vec<i64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
                    set.contains(&diff)
                })
            })
            .cloned()
            .collect();
        let k = simple.len();
        let norms: Vec<i64> = simple.iter().map(|s| inner(&gram, s, s)).collect();
        let cartan: Vec<Vec<i64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let num = 2 * inner(&gram, &simple[i], &simple[j]);
                        if num % norms[j] != 0 {
                            return i64::MIN;
                        }
                        num / norms[j]
                    })
                    .collect()
            })
            .collect();
        if cartan.iter().flatten().any(|&x| x == i64::MIN) {
            return invariant("wall group roots have a non-integral pairing");
        }
        // Connected components of the Dynkin diagram, in order of first simple root.
        let mut comp = vec![usize::MAX; k];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for s in 0..k {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = groups.len();
            let mut stack = vec![s];
            let mut members = Vec::new();
            comp[s] = id;
            while let Some(i) = stack.pop() {
                members.push(i);
                for j in 0..k {
                    if comp[j] == usize::MAX && cartan[i][j] != 0 {
                        comp[j] = id;
                        stack.push(j);
                    }
                }
            }
            members.sort_unstable();
            groups.push(members);
        }
        let mut components = Vec::new();
        for members in groups {
            let sub: Vec<Vec<i64>> = members.iter().map(|&i| members.iter().map(|&j| cartan[i][j]).collect()).collect();
            let sub_norms: Vec<i64> = members.iter().map(|&i| norms[i]).collect();
            let (f, rk) = classify_irreducible(&sub, &sub_norms)?;
            components.push(WallComponent {
                cartan_type: format!("{f}{rk}"),
                rank: rk,
                simple: members,
                cartan: sub,
                degrees: family_degrees(f, rk),
            });
        }
        let mut degrees: Vec<u32> = components.iter().flat_map(|c| c.degrees.clone()).collect();
        degrees.sort_unstable();
        let n_reflections: usize = degrees.iter().map(|&d| d as usize - 1).sum();
        if n_reflections != positive.len() {
            return invariant(format!(
                "wall group has {} positive roots but its type predicts {n_reflections}",
                positive.len()
            ));
        }
        let order = degrees.iter().map(|&d| d as u128).product();
        let type_decomposition = components.iter().map(|c| c.cartan_type.clone()).collect::<Vec<_>>().join("×");
        Ok(WallGroup {
            ambient_rank: gram.len(),
            gram,
            simple_roots: simple,
            positive_roots: positive,
            components,
            type_decomposition,
            degrees,
            order,
            n_reflections,
        })
    }

    /// Reflection in the root `beta` acting on `𝔞*`; column `i` is the image of the `i`-th basis form.
    pub fn reflection_matrix(&self, beta: &[i64]) -> QMatrix {
        reflection_matrix(&self.gram, beta)
    }

    /// Simple reflections as matrices on `𝔞*`.
    pub fn generators(&self) -> Vec<QMatrix> {
        self.simple_roots.iter().map(|b| self.reflection_matrix(b)).collect()
    }

    /// The component containing the root `beta`, if any.
    pub fn component_of(&self, beta: &[i64]) -> Option<usize> {
        self.components.iter().position(|c| {
            c.simple.iter().any(|&s| inner(&self.gram, &self.simple_roots[s], beta) != 0)
        })
    }
}

/// Reflection `s_β(ℓ) = ℓ − ⟨ℓ, β∨⟩β` on coefficient vectors, as a matrix acting on columns.
pub fn reflection_matrix(gram: &[Vec<i64>], beta: &[i64]) -> QMatrix {
    let r = gram.len();
    let mut rows = vec![vec![Q::zero(); r]; r];
    for i in 0..r {
        let mut e = vec![0; r];
        e[i] = 1;
        let p = coroot_pairing(gram, &e, beta);
        for j in 0..r {
            rows[j][i] = q(e[j] - p * beta[j]);
        }
    }
    QMatrix::from_rows(r, rows)
}

/// Applies a reflection to an integer linear form.
pub fn reflect_form(gram: &[Vec<i64>], beta: &[i64], l: &[i64]) -> Vec<i64> {
    let p = coroot_pairing(gram, l, beta);
    l.iter().zip(beta).map(|(a, b)| a - p * b).collect()
}

// ---------------------------------------------------------------------------
// Generic graded quotient
// ---------------------------------------------------------------------------

/// `Sym(V*)` modulo the ideal generated by positive-degree invariants, degree by degree.
#[derive(Clone, Debug)]
pub struct GradedQuotient {
    pub nvars: usize,
    /// Highest degree whose ideal slice is stored.
    pub max_degree: usize,
    /// Monomials of each degree in decreasing grevlex order.
    pub monomials: Vec<Vec<Vec<u32>>>,
    index: Vec<HashMap<Vec<u32>, usize>>,
    /// Reduced echelon basis of `I_d`.
    pub ideal: Vec<Echelon>,
    /// Normal-form basis of `H_d`: indices of the non-pivot monomials.
    pub basis: Vec<Vec<usize>>,
    pub hilbert: Vec<usize>,
    /// `H_d = 0` for every `d` at or above this degree, when known.
    pub vanishes_from: Option<usize>,
}

/// Sparse vector of `x_i · v` for `v` in degree `d`.
fn times_var(
    idx_from: &[Vec<u32>],
    index_to: &HashMap<Vec<u32>, usize>,
    v: &SparseVec,
    var: usize,
) -> SparseVec {
    let mut out: SparseVec = v
        .iter()
        .map(|(c, x)| {
            let mut e = idx_from[*c].clone();
            e[var] += 1;
            (index_to[&e], x.clone())
        })
        .collect();
    out.sort_by_key(|(c, _)| *c);
    out
}

fn accumulate(map: &mut BTreeMap<usize, Q>, c: usize, x: Q) {
    let slot = map.entry(c).or_insert_with(Q::zero);
    *slot += x;
    if slot.is_zero() {
        map.remove(&c);
    }
}

/// Builds the quotient by the invariants of the group generated by `generators`.
///
/// Each generator acts on the variables: column `j` holds the image of `x_j`.
pub fn build_quotient_from_generators(
    generators: &[QMatrix],
    nvars: usize,
    max_degree: usize,
    budget: u128,
) -> Result<GradedQuotient> {
    let need = monomial_count(nvars, max_degree);
    if need > budget {
        return Err(Error::Infeasible(format!(
            "degree {max_degree} in {nvars} variables needs {need} monomials, above the budget of {budget}"
        )));
    }
    let mut monos = vec![monomials(nvars, 0)];
    let mut index = vec![monos[0].iter().cloned().enumerate().map(|(i, m)| (m, i)).collect::<HashMap<_, _>>()];
    let mut ideal = vec![Echelon::empty(1)];
    let mut basis = vec![vec![0usize]];
    let mut hilbert = vec![1usize];
    let mut vanishes_from = if nvars == 0 { Some(1) } else { None };
    // Images of the degree-(d−1) monomials under each generator.
    let var_images: Vec<Vec<SparseVec>> = generators
        .iter()
        .map(|g| {
            (0..nvars)
                .map(|j| (0..nvars).filter_map(|i| {
                    let v = g.get(i, j);
                    (!v.is_zero()).then_some((i, v))
                }).collect())
                .collect()
        })
        .collect();
    let mut prev_images: Vec<Vec<SparseVec>> = generators.iter().map(|_| vec![vec![(0, Q::one())]]).collect();

    for d in 1..=max_degree {
        if vanishes_from.is_some() {
            break;
        }
        let m = monomials(nvars, d);
        let idx: HashMap<Vec<u32>, usize> = m.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let dim = m.len();
        // Action of each generator on Sym^d, built from Sym^{d−1}.
        let images: Vec<Vec<SparseVec>> = (0..generators.len())
            .into_par_iter()
            .map(|g| {
                m.iter()
                    .map(|e| {
                        let i = e.iter().position(|&k| k > 0).unwrap();
                        let mut lower = e.clone();
                        lower[i] -= 1;
                        let prev = &prev_images[g][index[d - 1][&lower]];
                        let mut acc = BTreeMap::new();
                        for (c, x) in prev {
                            for (var, y) in &var_images[g][i] {
                                let mut t = monos[d - 1][*c].clone();
                                t[*var] += 1;
                                accumulate(&mut acc, idx[&t], x * y);
                            }
                        }
                        acc.into_iter().collect()
                    })
                    .collect()
            })
            .collect();
        // Rows of (g − I)^T stacked: the kernel of their transpose is the fixed space.
        let mut stacked: Vec<SparseVec> = Vec::new();
        for img in &images {
            let mut rows: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); dim];
            for (col, v) in img.iter().enumerate() {
                for (row, x) in v {
                    accumulate(&mut rows[*row], col, x.clone());
                }
                accumulate(&mut rows[col], col, -Q::one());
            }
            stacked.extend(rows.into_iter().map(|r| r.into_iter().collect::<SparseVec>()));
        }
        let invariants = if generators.is_empty() {
            (0..dim).map(|i| vec![(i, Q::one())]).collect::<Vec<SparseVec>>()
        } else {
            exactla::kernel(&QMatrix::from_sparse_rows(dim, stacked))
                .into_iter()
                .map(|v| v.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect())
                .collect()
        };
        let mut ech = IntEchelon::new(dim);
        for row in &ideal[d - 1].rows {
            for var in 0..nvars {
                ech.insert(&times_var(&monos[d - 1], &idx, row, var));
            }
        }
        for v in &invariants {
            ech.insert(v);
        }
        let red = ech.into_reduced();
        let comp = red.complement();
        hilbert.push(comp.len());
        if comp.is_empty() {
            vanishes_from = Some(d);
        }
        basis.push(comp);
        ideal.push(red);
        monos.push(m);
        index.push(idx);
        prev_images = images;
    }
    Ok(GradedQuotient {
        nvars,
        max_degree: monos.len() - 1,
        monomials: monos,
        index,
        ideal,
        basis,
        hilbert,
        vanishes_from,
    })
}

/// The coinvariant algebra of the wall group in the ambient variables, up to `max_degree`.
pub fn build_quotient(group: &WallGroup, max_degree: usize) -> Result<GradedQuotient> {
    build_quotient_from_generators(&group.generators(), group.ambient_rank, max_degree, DEFAULT_MONOMIAL_BUDGET)
}

impl GradedQuotient {
    /// Whether `H_d = 0` is known.
    pub fn is_zero_in(&self, d: usize) -> bool {
        match self.vanishes_from {
            Some(v) => d >= v,
            None => false,
        }
    }

    pub fn total_dimension(&self) -> usize {
        self.hilbert.iter().sum()
    }

    /// Coordinates of a homogeneous polynomial of degree `d` in the monomial basis.
    pub fn vector_of(&self, p: &PolyQ, d: usize) -> SparseVec {
        let mut v: SparseVec = p.terms().map(|(e, c)| (self.index[d][e], c.clone())).collect();
        v.sort_by_key(|(c, _)| *c);
        v
    }

    /// Normal form of a degree-`d` vector, supported on basis monomials.
    pub fn reduce(&self, d: usize, v: &SparseVec) -> SparseVec {
        if self.is_zero_in(d) {
            return Vec::new();
        }
        assert!(d <= self.max_degree, "degree {d} beyond the computed range");
        self.ideal[d].reduce(v)
    }

    /// Product of `p` (homogeneous of degree `k`) with the basis monomial `b` of degree `d`, reduced.
    fn times_basis(&self, p: &PolyQ, d: usize, b: usize, k: usize) -> SparseVec {
        let shift = &self.monomials[d][b];
        let mut acc = BTreeMap::new();
        for (e, c) in p.terms() {
            let t: Vec<u32> = e.iter().zip(shift).map(|(x, y)| x + y).collect();
            accumulate(&mut acc, self.index[d + k][&t], c.clone());
        }
        self.reduce(d + k, &acc.into_iter().collect())
    }
}

fn homogeneous_degree(lambda: &PolyQ) -> Result<usize> {
    if !lambda.is_homogeneous() {
        return invalid("λ must be homogeneous");
    }
    Ok(lambda.degree().unwrap_or(0))
}

/// Rank of multiplication by `λ` from `H_d` to `H_{d+k}`, for every source degree `d`.
pub fn image_hilbert(quotient: &GradedQuotient, lambda: &PolyQ) -> Result<Vec<usize>> {
    if lambda.is_zero() {
        return Ok(vec![0; quotient.hilbert.len()]);
    }
    let k = homogeneous_degree(lambda)?;
    (0..quotient.hilbert.len())
        .map(|d| {
            if quotient.hilbert[d] == 0 || quotient.is_zero_in(d + k) {
                return Ok(0);
            }
            if d + k > quotient.max_degree {
                return invalid("quotient not computed to a high enough degree");
            }
            let mut ech = IntEchelon::new(quotient.monomials[d + k].len());
            for &b in &quotient.basis[d] {
                ech.insert(&quotient.times_basis(lambda, d, b, k));
            }
            Ok(ech.rank())
        })
        .collect()
}

/// `dim λ·H`.
pub fn image_dimension(quotient: &GradedQuotient, lambda: &PolyQ) -> Result<usize> {
    Ok(image_hilbert(quotient, lambda)?.iter().sum())
}

/// Matrix (on basis coordinates) of the substitution `x_j ↦ column j of g` acting on `H_d`.
fn action_on_degree(quotient: &GradedQuotient, g: &QMatrix, d: usize) -> Vec<SparseVec> {
    let n = quotient.nvars;
    let images: Vec<PolyQ> =
        (0..n).map(|j| PolyQ::linear(&(0..n).map(|i| g.get(i, j)).collect::<Vec<_>>())).collect();
    quotient.basis[d]
        .iter()
        .map(|&b| {
            let p = PolyQ::monomial(quotient.monomials[d][b].clone()).substitute(&images);
            quotient.reduce(d, &quotient.vector_of(&p, d))
        })
        .collect()
}

/// `dim λ·H^{W'}` where `W'` is generated by `parabolic_gens` (matrices on the variables).
pub fn parabolic_invariant_image(
    quotient: &GradedQuotient,
    parabolic_gens: &[QMatrix],
    lambda: &PolyQ,
) -> Result<usize> {
    let k = homogeneous_degree(lambda)?;
    let n = quotient.nvars;
    for g in parabolic_gens {
        let images: Vec<PolyQ> =
            (0..n).map(|j| PolyQ::linear(&(0..n).map(|i| g.get(i, j)).collect::<Vec<_>>())).collect();
        if lambda.substitute(&images) != *lambda {
            return invalid("λ is not invariant under the parabolic subgroup");
        }
    }
    let mut total = 0;
    for d in 0..quotient.hilbert.len() {
        if quotient.hilbert[d] == 0 || quotient.is_zero_in(d + k) {
            continue;
        }
        let basis = &quotient.basis[d];
        let pos: HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let dim = basis.len();
        let mats: Vec<QMatrix> = parabolic_gens
            .iter()
            .map(|g| {
                let cols = action_on_degree(quotient, g, d);
                let mut rows = vec![vec![Q::zero(); dim]; dim];
                for (c, v) in cols.iter().enumerate() {
                    for (m, x) in v {
                        rows[pos[m]][c] = x.clone();
                    }
                }
                QMatrix::from_rows(dim, rows)
            })
            .collect();
        let fixed = exactla::fixed_space(&mats, dim);
        let mut ech = IntEchelon::new(quotient.monomials[d + k].len());
        for v in fixed {
            let mut acc = BTreeMap::new();
            for (i, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (m, x) in quotient.times_basis(lambda, d, basis[i], k) {
                    accumulate(&mut acc, m, x * c);
                }
            }
            ech.insert(&acc.into_iter().collect());
        }
        total += ech.rank();
    }
    Ok(total)
}

/// Coefficients of `Π (1 − q^{d_i})/(1 − q)`.
pub fn hilbert_from_degrees(degrees: &[u32]) -> Vec<usize> {
    let mut h = vec![1usize];
    for &d in degrees {
        let mut next = vec![0usize; h.len() + d as usize - 1];
        for (i, &c) in h.iter().enumerate() {
            for j in 0..d as usize {
                next[i + j] += c;
            }
        }
        h = next;
    }
    h
}

// ---------------------------------------------------------------------------
// Factorized algebra
// ---------------------------------------------------------------------------

/// The coinvariant algebra of one irreducible component in its simple-root variables.
#[derive(Debug)]
struct Factor {
    /// Degree of each basis element; basis elements are ordered by degree.
    degree_of: Vec<usize>,
    /// Monomial index (within its degree) of each basis element.
    monomial_of: Vec<usize>,
    hilbert: Vec<usize>,
    /// `mul[i][b]`: `z_i · b` in basis coordinates.
    mul: Vec<Vec<SparseVec>>,
    quotient: GradedQuotient,
    /// Position of a basis monomial `(d, monomial index)` in the global basis.
    global: HashMap<(usize, usize), usize>,
}

impl Factor {
    fn build(cartan: &[Vec<i64>]) -> Result<Self> {
        let k = cartan.len();
        // s_j(z_i) = z_i − ⟨β_i, β_j∨⟩ z_j
        let gens: Vec<QMatrix> = (0..k)
            .map(|j| {
                let mut rows = vec![vec![Q::zero(); k]; k];
                for i in 0..k {
                    rows[i][i] = Q::one();
                    if i != j {
                        rows[j][i] = q(-cartan[i][j]);
                    }
                }
                rows[j][j] = q(-1);
                QMatrix::from_rows(k, rows)
            })
            .collect();
        let n_top = count_positive_from_cartan(cartan);
        let quotient = build_quotient_from_generators(&gens, k, n_top + 1, u128::MAX)?;
        let mut degree_of = Vec::new();
        let mut monomial_of = Vec::new();
        let mut global = HashMap::new();
        for (d, b) in quotient.basis.iter().enumerate() {
            if quotient.is_zero_in(d) {
                continue;
            }
            for &m in b {
                global.insert((d, m), degree_of.len());
                degree_of.push(d);
                monomial_of.push(m);
            }
        }
        let mut mul = vec![Vec::with_capacity(degree_of.len()); k];
        for i in 0..k {
            for (d, b) in quotient.basis.iter().enumerate() {
                if quotient.is_zero_in(d) {
                    continue;
                }
                for &m in b {
                    let v = if quotient.is_zero_in(d + 1) {
                        Vec::new()
                    } else {
                        let mut e = quotient.monomials[d][m].clone();
                        e[i] += 1;
                        let unit = vec![(quotient.index[d + 1][&e], Q::one())];
                        let mut r: SparseVec =
                            quotient.reduce(d + 1, &unit).into_iter().map(|(c, x)| (global[&(d + 1, c)], x)).collect();
                        r.sort_by_key(|(c, _)| *c);
                        r
                    };
                    mul[i].push(v);
                }
            }
        }
        let hilbert = quotient.hilbert.iter().copied().take_while(|&h| h > 0).collect();
        Ok(Factor { degree_of, monomial_of, hilbert, mul, quotient, global })
    }

    fn dim(&self) -> usize {
        self.degree_of.len()
    }

    /// Action of a linear substitution of the variables on the basis.
    fn substitution(&self, images: &[PolyQ]) -> Vec<SparseVec> {
        let qt = &self.quotient;
        (0..self.dim())
            .map(|g| {
                let d = self.degree_of[g];
                let m = self.monomial_of[g];
                let p = PolyQ::monomial(qt.monomials[d][m].clone()).substitute(images);
                let mut r: SparseVec = qt
                    .reduce(d, &qt.vector_of(&p, d))
                    .into_iter()
                    .map(|(c, x)| (self.global[&(d, c)], x))
                    .collect();
                r.sort_by_key(|(c, _)| *c);
                r
            })
            .collect()
    }
}

fn count_positive_from_cartan(cartan: &[Vec<i64>]) -> usize {
    // Symmetrize: norms chosen so that d_j A_ij is symmetric.
    let k = cartan.len();
    let mut norm = vec![0i64; k];
    for s in 0..k {
        if norm[s] != 0 {
            continue;
        }
        norm[s] = 6;
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for j in 0..k {
                if i != j && cartan[i][j] != 0 && norm[j] == 0 {
                    // (β_i, β_j) = A_ij n_j / 2 = A_ji n_i / 2
                    norm[j] = cartan[j][i] * norm[i] / cartan[i][j];
                    stack.push(j);
                }
            }
        }
    }
    let gram: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| cartan[i][j] * norm[j]).collect()).collect();
    rootdata::positive_roots(&gram).len()
}

fn factor_table() -> &'static Mutex<HashMap<Vec<Vec<i64>>, Arc<Factor>>> {
    static TABLE: OnceLock<Mutex<HashMap<Vec<Vec<i64>>, Arc<Factor>>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

fn shared_factor(cartan: &[Vec<i64>]) -> Result<Arc<Factor>> {
    let key = cartan.to_vec();
    if let Some(f) = factor_table().lock().unwrap().get(&key) {
        return Ok(f.clone());
    }
    let f = Arc::new(Factor::build(cartan)?);
    factor_table().lock().unwrap().entry(key).or_insert_with(|| f.clone());
    Ok(f)
}

/// `H` for a wall group, as a tensor product over its irreducible components.
#[derive(Debug, Clone)]
pub struct CoinvariantAlgebra {
    pub group: WallGroup,
    factors: Vec<Arc<Factor>>,
    /// Mixed-radix strides of the tensor basis.
    strides: Vec<usize>,
    /// Tensor basis indices grouped by degree.
    by_degree: Vec<Vec<usize>>,
    pub hilbert: Vec<usize>,
    /// `proj[u]` maps an ambient form to its coefficients on component `u`'s simple roots: solve `G_u c = ((ℓ, β_j))_j`.
    proj: Vec<QMatrix>,
}

impl CoinvariantAlgebra {
    /// Builds the algebra, refusing if the top degree in the ambient variables exceeds `budget` monomials.
    pub fn new(group: &WallGroup, budget: u128) -> Result<Self> {
        let need = monomial_count(group.ambient_rank, group.n_reflections);
        if need > budget {
            return Err(Error::Infeasible(format!(
                "wall group {} has top degree {} in {} variables ({need} monomials), above the budget of {budget}",
                group.type_decomposition, group.n_reflections, group.ambient_rank
            )));
        }
        let factors: Vec<Arc<Factor>> =
            group.components.iter().map(|c| shared_factor(&c.cartan)).collect::<Result<_>>()?;
        for (c, f) in group.components.iter().zip(&factors) {
            if f.hilbert != hilbert_from_degrees(&c.degrees) {
                return invariant(format!("coinvariant Hilbert series of {} disagrees with its degrees", c.cartan_type));
            }
        }
        let mut strides = Vec::with_capacity(factors.len());
        let mut total = 1usize;
        for f in &factors {
            strides.push(total);
            total *= f.dim();
        }
        let n_top = group.n_reflections;
        let mut by_degree = vec![Vec::new(); n_top + 1];
        for idx in 0..total {
            let d: usize = factors.iter().zip(&strides).map(|(f, s)| f.degree_of[(idx / s) % f.dim()]).sum();
            by_degree[d].push(idx);
        }
        let hilbert: Vec<usize> = by_degree.iter().map(|v| v.len()).collect();
        if hilbert != hilbert_from_degrees(&group.degrees) || total as u128 != group.order {
            return invariant("tensor Hilbert series disagrees with the wall group degrees");
        }
        let proj = group
            .components
            .iter()
            .map(|c| {
                let roots: Vec<&Vec<i64>> = c.simple.iter().map(|&s| &group.simple_roots[s]).collect();
                let g: Vec<Vec<Q>> =
                    roots.iter().map(|a| roots.iter().map(|b| q(inner(&group.gram, a, b))).collect()).collect();
                // Row j of the pairing matrix: ℓ ↦ (ℓ, β_j).
                let pair: Vec<Vec<Q>> = roots
                    .iter()
                    .map(|b| (0..group.ambient_rank).map(|i| q(group.gram[i].iter().zip(b.iter()).map(|(x, y)| x * y).sum())).collect())
                    .collect();
                // proj = G^{-1} · pair, column by column.
                let k = roots.len();
                let r = group.ambient_rank;
                let gm = QMatrix::from_rows(k, g);
                let mut out = vec![vec![Q::zero(); r]; k];
                for i in 0..r {
                    let rhs: Vec<Q> = pair.iter().map(|row| row[i].clone()).collect();
                    let x = exactla::solve(&gm, &rhs).expect("Gram matrix of simple roots is invertible");
                    for j in 0..k {
                        out[j][i] = x[j].clone();
                    }
                }
                QMatrix::from_rows(r, out)
            })
            .collect();
        Ok(CoinvariantAlgebra { group: group.clone(), factors, strides, by_degree, hilbert, proj })
    }

    pub fn dim(&self) -> usize {
        self.hilbert.iter().sum()
    }

    pub fn top_degree(&self) -> usize {
        self.group.n_reflections
    }

    fn project(&self, l: &[i64]) -> Vec<Vec<Q>> {
        let v: Vec<Q> = l.iter().map(|&x| q(x)).collect();
        self.proj.iter().map(|p| p.mul_vec(&v)).collect()
    }

    /// `ℓ · v` for a projected linear form.
    fn apply_linear(&self, form: &[Vec<Q>], v: &BTreeMap<usize, Q>) -> BTreeMap<usize, Q> {
        let mut out = BTreeMap::new();
        for (&idx, x) in v {
            for (u, f) in self.factors.iter().enumerate() {
                let s = self.strides[u];
                let t = (idx / s) % f.dim();
                let base = idx - t * s;
                for (i, c) in form[u].iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for (j, y) in &f.mul[i][t] {
                        accumulate(&mut out, base + j * s, x * c * y);
                    }
                }
            }
        }
        out
    }

    fn apply_lambda(&self, forms: &[Vec<Vec<Q>>], start: BTreeMap<usize, Q>) -> SparseVec {
        let mut v = start;
        for f in forms {
            if v.is_empty() {
                break;
            }
            v = self.apply_linear(f, &v);
        }
        v.into_iter().collect()
    }

    /// Per-source-degree ranks of multiplication by `Π factors`.
    pub fn image_hilbert(&self, factors: &[Vec<i64>]) -> Vec<usize> {
        let k = factors.len();
        let n = self.top_degree();
        if k > n {
            return vec![0; n + 1];
        }
        let forms: Vec<Vec<Vec<Q>>> = factors.iter().map(|l| self.project(l)).collect();
        (0..=n)
            .into_par_iter()
            .map(|d| {
                if d + k > n {
                    return 0;
                }
                let mut ech = IntEchelon::new(self.dim());
                for &b in &self.by_degree[d] {
                    let row = self.apply_lambda(&forms, BTreeMap::from([(b, Q::one())]));
                    ech.insert(&row);
                    if ech.rank() == self.hilbert[d + k] {
                        break;
                    }
                }
                ech.rank()
            })
            .collect()
    }

    /// `dim λ·H` for `λ = Π factors`.
    pub fn image_dimension(&self, factors: &[Vec<i64>]) -> usize {
        self.image_hilbert(factors).iter().sum()
    }

    /// `dim λ·H^{W'}` where `W'` is generated by reflections in `reflections` (ambient coordinates, roots of the wall group).
    pub fn parabolic_image_dimension(&self, reflections: &[Vec<i64>], factors: &[Vec<i64>]) -> Result<usize> {
        let gram = &self.group.gram;
        for beta in reflections {
            if !lambda_invariant_under(gram, beta, factors) {
                return invalid("λ is not invariant under the parabolic subgroup");
            }
        }
        if reflections.is_empty() {
            return Ok(self.image_dimension(factors));
        }
        let k = factors.len();
        let n = self.top_degree();
        if k > n {
            return Ok(0);
        }
        // Each reflection acts on the single factor containing its root.
        let actions: Vec<(usize, Vec<SparseVec>)> = reflections
            .iter()
            .map(|beta| {
                let u = self.group.component_of(beta).ok_or_else(|| Error::Invalid("reflection not in the wall group".into()))?;
                let comp = &self.group.components[u];
                let roots: Vec<&Vec<i64>> = comp.simple.iter().map(|&s| &self.group.simple_roots[s]).collect();
                let bc: Vec<Q> = self.proj[u].mul_vec(&beta.iter().map(|&x| q(x)).collect::<Vec<_>>());
                let images: Vec<PolyQ> = roots
                    .iter()
                    .map(|bi| {
                        let p = coroot_pairing(gram, bi, beta);
                        let mut coeffs = vec![Q::zero(); roots.len()];
                        for (j, r) in roots.iter().enumerate() {
                            if r == bi {
                                coeffs[j] += Q::one();
                            }
                        }
                        for j in 0..roots.len() {
                            coeffs[j] -= q(p) * &bc[j];
                        }
                        PolyQ::linear(&coeffs)
                    })
                    .collect();
                Ok((u, self.factors[u].substitution(&images)))
            })
            .collect::<Result<_>>()?;
        let forms: Vec<Vec<Vec<Q>>> = factors.iter().map(|l| self.project(l)).collect();
        let total = (0..=n)
            .into_par_iter()
            .map(|d| {
                if d + k > n {
                    return 0;
                }
                let block = &self.by_degree[d];
                let pos: HashMap<usize, usize> = block.iter().enumerate().map(|(i, &b)| (b, i)).collect();
                let dim = block.len();
                let mats: Vec<QMatrix> = actions
                    .iter()
                    .map(|(u, act)| {
                        let f = &self.factors[*u];
                        let s = self.strides[*u];
                        let mut rows = vec![vec![Q::zero(); dim]; dim];
                        for (c, &idx) in block.iter().enumerate() {
                            let t = (idx / s) % f.dim();
                            let base = idx - t * s;
                            for (j, y) in &act[t] {
                                rows[pos[&(base + j * s)]][c] += y;
                            }
                        }
                        QMatrix::from_rows(dim, rows)
                    })
                    .collect();
                let fixed = exactla::fixed_space(&mats, dim);
                let mut ech = IntEchelon::new(self.dim());
                for v in fixed {
                    let start: BTreeMap<usize, Q> =
                        v.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (block[i], x)).collect();
                    ech.insert(&self.apply_lambda(&forms, start));
                }
                ech.rank()
            })
            .sum();
        Ok(total)
    }
}

/// Whether `Π factors` is fixed (exactly, sign included) by the reflection in `beta`.
pub fn lambda_invariant_under(gram: &[Vec<i64>], beta: &[i64], factors: &[Vec<i64>]) -> bool {
    fn canon(v: Vec<i64>) -> (Vec<i64>, bool) {
        let neg = v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0);
        if neg {
            (v.into_iter().map(|x| -x).collect(), true)
        } else {
            (v, false)
        }
    }
    let mut before: Vec<Vec<i64>> = Vec::new();
    let mut after: Vec<Vec<i64>> = Vec::new();
    let mut flips = 0usize;
    for f in factors {
        let (a, na) = canon(f.clone());
        let (b, nb) = canon(reflect_form(gram, beta, f));
        flips += usize::from(na) + usize::from(nb);
        before.push(a);
        after.push(b);
    }
    before.sort();
    after.sort();
    before == after && flips.is_multiple_of(2)
}

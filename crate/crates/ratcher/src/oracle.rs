//! Slow reference computations for small reflection groups.
//!
//! Nothing here is used by the main pipeline. The group is enumerated
//! element by element, its invariant ideal is generated by orbit power sums,
//! and images are ranked degree by degree in the full monomial basis.

use std::collections::{HashMap, HashSet};

use num_traits::Zero;

use crate::coinvariant::{monomials, reflect_form, PolyQ};
use crate::exactla::{q, rank_of_rows, SparseVec};

/// Every element of the group generated by the reflections in `simple`,
/// each stored as the list of images of the coordinate forms.
pub fn group_elements(gram: &[Vec<i64>], simple: &[Vec<i64>]) -> Vec<Vec<Vec<i64>>> {
    let r = gram.len();
    let id: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect();
    let mut seen: HashSet<Vec<Vec<i64>>> = HashSet::from([id.clone()]);
    let mut stack = vec![id];
    while let Some(w) = stack.pop() {
        for s in simple {
            let next: Vec<Vec<i64>> = w.iter().map(|img| reflect_form(gram, s, img)).collect();
            if seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort();
    out
}

/// Indecomposable elements of a positive system.
pub fn simple_system(positive: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let set: HashSet<&Vec<i64>> = positive.iter().collect();
    positive
        .iter()
        .filter(|a| {
            !positive.iter().any(|b| {
                let diff: Vec<i64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
                b != *a && set.contains(&diff)
            })
        })
        .cloned()
        .collect()
}

/// Applies a group element to a linear form.
pub fn act(w: &[Vec<i64>], form: &[i64]) -> Vec<i64> {
    let n = form.len();
    (0..n).map(|j| form.iter().zip(w.iter()).map(|(c, img)| c * img[j]).sum()).collect()
}

fn linear(c: &[i64]) -> PolyQ {
    PolyQ::linear(&c.iter().map(|&x| q(x)).collect::<Vec<_>>())
}

fn vector(index: &HashMap<Vec<u32>, usize>, p: &PolyQ) -> SparseVec {
    let mut v: SparseVec = p.terms().filter(|(_, c)| !c.is_zero()).map(|(m, c)| (index[m], c.clone())).collect();
    v.sort_by_key(|(i, _)| *i);
    v
}

/// The coinvariant quotient with its ideal spelled out in every degree up to `N + 1`.
pub struct PowerSumQuotient {
    nvars: usize,
    order: usize,
    top: usize,
    index: Vec<HashMap<Vec<u32>, usize>>,
    ideal: Vec<Vec<SparseVec>>,
}

impl PowerSumQuotient {
    pub fn new(gram: &[Vec<i64>], positive: &[Vec<i64>]) -> Self {
        let n = gram.len();
        let group = group_elements(gram, &simple_system(positive));
        let top = positive.len();
        let index: Vec<HashMap<Vec<u32>, usize>> = (0..=top + 1)
            .map(|d| monomials(n, d).into_iter().enumerate().map(|(i, m)| (m, i)).collect())
            .collect();
        // Orbits closed under negation have vanishing odd power sums, so two
        // generic seeds join the coordinate forms.
        let mut seeds: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        seeds.push((0..n).map(|j| 1 + 2 * j as i64).collect());
        seeds.push((0..n).map(|j| 5 - 3 * j as i64).collect());
        let mut gens: Vec<PolyQ> = Vec::new();
        for seed in &seeds {
            let orbit: Vec<PolyQ> = group.iter().map(|w| linear(&act(w, seed))).collect();
            let mut powers: Vec<PolyQ> = orbit.clone();
            for k in 1..=top + 1 {
                if k > 1 {
                    powers = powers.iter().zip(&orbit).map(|(p, l)| p.mul(l)).collect();
                }
                let s = powers.iter().fold(PolyQ::zero(n), |acc, p| acc.add(p));
                if !s.is_zero() {
                    gens.push(s);
                }
            }
        }
        let mut ideal: Vec<Vec<SparseVec>> = vec![Vec::new(); top + 2];
        for g in &gens {
            let e = g.degree().unwrap_or(0);
            for d in e..=top + 1 {
                for m in monomials(n, d - e) {
                    ideal[d].push(vector(&index[d], &g.mul(&PolyQ::monomial(m))));
                }
            }
        }
        PowerSumQuotient { nvars: n, order: group.len(), top, index, ideal }
    }

    pub fn group_order(&self) -> usize {
        self.order
    }

    /// Quotient dimensions in degrees `0..=N+1`.
    pub fn hilbert(&self) -> Vec<usize> {
        (0..=self.top + 1)
            .map(|d| self.index[d].len() - rank_of_rows(self.index[d].len(), self.ideal[d].iter()))
            .collect()
    }

    /// `dim λ·H` for `λ` the product of the given linear forms.
    pub fn image_dimension(&self, factors: &[Vec<i64>]) -> usize {
        let k = factors.len();
        let lambda = factors.iter().fold(PolyQ::one(self.nvars), |acc, f| acc.mul(&linear(f)));
        (k..=self.top)
            .map(|d| {
                let cols = self.index[d].len();
                let base = rank_of_rows(cols, self.ideal[d].iter());
                let mut rows = self.ideal[d].clone();
                for m in monomials(self.nvars, d - k) {
                    rows.push(vector(&self.index[d], &lambda.mul(&PolyQ::monomial(m))));
                }
                rank_of_rows(cols, rows.iter()) - base
            })
            .sum()
    }
}

/// Number of points `w·p` of a generic orbit at which `λ` does not vanish.
///
/// The coinvariant algebra degenerates to functions on a free orbit, where
/// multiplication by `λ` has exactly this rank, so it bounds `dim λ·H`.
pub fn generic_orbit_bound(gram: &[Vec<i64>], positive: &[Vec<i64>], factors: &[Vec<i64>]) -> usize {
    let n = gram.len();
    let group = group_elements(gram, &simple_system(positive));
    let p: Vec<i64> = (0..n).map(|i| 7 + 13 * i as i64).collect();
    group
        .iter()
        .filter(|w| {
            factors.iter().all(|f| {
                let g = act(w, f);
                g.iter().zip(&p).map(|(a, b)| a * b).sum::<i64>() != 0
            })
        })
        .count()
}

//! Affine roots, slopes, the wall group `W_ν`, alcove enumeration and clans.
//!
//! Points of the apartment are written in the coordinates `y_j = ⟨α_j, x⟩`
//! against the relative simple roots, so a root with coefficient vector `c`
//! evaluates to `Σ c_j y_j`. During enumeration every point is multiplied by a
//! common denominator `scale`, which keeps barycenters, `νρ∨` and all affine
//! root values integral.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coinvariant::WallGroup;
use crate::error::{invalid, invariant, Error, Result};
use crate::exactla::{self, q, qf, QMatrix, Q};
use crate::rootdata::{Family, RootDatum};

/// Default limit on the number of alcoves visited by the enumeration.
pub const DEFAULT_ALCOVE_CAP: usize = 10_000_000;

// ---------------------------------------------------------------------------
// Slopes and regular numbers
// ---------------------------------------------------------------------------

/// Elliptic regular numbers recorded for specific types.
const REGULAR_TABLE: &[(&str, &[u64])] = &[
    ("2A2", &[6, 2]),
    ("C2", &[4, 2]),
    ("2A3", &[6, 2]),
    ("2A4", &[10, 2]),
    ("G2", &[6, 3, 2]),
    ("3D4", &[12, 6, 3]),
    ("F4", &[12, 8, 6, 4, 3, 2]),
    ("E6", &[12, 9, 6, 3]),
    ("E7", &[18, 14, 6, 2]),
    ("E8", &[30, 24, 20, 15, 12, 10, 8, 6, 5, 4, 3, 2]),
];

/// Where a list of regular numbers came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularSource {
    /// Divisibility criterion on degrees and codegrees (split types).
    DegreeCodegree,
    /// Built-in table of elliptic regular numbers.
    Table,
    /// Twisted type without a table: the twisted Coxeter number, and 2 when the twist is the opposition.
    CoxeterOnly,
}

/// The recorded elliptic regular numbers for a type label, if any.
pub fn tabulated_regular_numbers(label: &str) -> Option<&'static [u64]> {
    REGULAR_TABLE.iter().find(|(l, _)| *l == label).map(|(_, v)| *v)
}

/// Regular numbers accepted for the datum, in decreasing order.
pub fn regular_numbers(datum: &RootDatum) -> (Vec<u64>, RegularSource) {
    let spec = datum.spec;
    if spec.e == 1 {
        let max = *datum.degrees.iter().max().unwrap_or(&1) as u64;
        let mut out: Vec<u64> = (1..=max)
            .filter(|&m| {
                let deg = datum.degrees.iter().filter(|&&d| (d as u64).is_multiple_of(m)).count();
                let codeg = datum.degrees.iter().filter(|&&d| (d as u64 - 2).is_multiple_of(m)).count();
                deg == codeg
            })
            .collect();
        out.reverse();
        return (out, RegularSource::DegreeCodegree);
    }
    if let Some(t) = tabulated_regular_numbers(&spec.label()) {
        return (t.to_vec(), RegularSource::Table);
    }
    let mut out = vec![datum.h_theta as u64];
    let opposition = spec.e == 2
        && match spec.family {
            Family::A | Family::E => true,
            Family::D => spec.rank_abs % 2 == 1,
            _ => false,
        };
    if opposition && datum.h_theta != 2 {
        out.push(2);
    }
    (out, RegularSource::CoxeterOnly)
}

/// A θ-admissible slope, with its normal form and ellipticity data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeSpec {
    pub d1: u64,
    pub m1: u64,
    pub d: u64,
    pub m: u64,
    pub elliptic: bool,
    pub t_fixed_dim: usize,
}

impl SlopeSpec {
    /// `ν` as a rational.
    pub fn nu(&self) -> Q {
        qf(self.d1 as i64, self.m1 as i64)
    }

    /// `νρ∨` in the coordinates `y_j`.
    pub fn base_point(&self, datum: &RootDatum) -> Vec<Q> {
        datum.rho_vee.iter().map(|&x| q(x) * self.nu()).collect()
    }
}

impl fmt::Display for SlopeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.d1, self.m1)
    }
}

/// Normal form and ellipticity for `ν = d₁/m₁`.
pub fn make_slope(datum: &RootDatum, d1: u64, m1: u64) -> Result<SlopeSpec> {
    if d1 == 0 || m1 == 0 {
        return invalid("slopes must be positive");
    }
    if d1.gcd(&m1) != 1 {
        return invalid(format!("slope {d1}/{m1} is not in lowest terms"));
    }
    let (regular, _) = regular_numbers(datum);
    if !regular.contains(&m1) {
        let list: Vec<String> = regular.iter().map(|m| m.to_string()).collect();
        return invalid(format!(
            "{m1} is not a regular number for {}; accepted: {{{}}}",
            datum.spec,
            list.join(", ")
        ));
    }
    let e = datum.spec.e as u64;
    let m = m1.lcm(&e);
    let d = d1 * (m / m1);
    let t_fixed_dim = fixed_character_count(datum, d1, m1);
    Ok(SlopeSpec { d1, m1, d, m, elliptic: t_fixed_dim == 0, t_fixed_dim })
}

/// `#{i : ν(d_i − 1) + ε_i/e ∈ ℤ}`.
pub fn fixed_character_count(datum: &RootDatum, d1: u64, m1: u64) -> usize {
    let e = datum.spec.e as u64;
    datum
        .degrees
        .iter()
        .zip(&datum.twist_exponents)
        .filter(|(&deg, &eps)| (d1 * (deg as u64 - 1) * e + eps as u64 * m1).is_multiple_of(m1 * e))
        .count()
}

// ---------------------------------------------------------------------------
// Affine roots
// ---------------------------------------------------------------------------

/// The affine root `ᾱ + (k/e)δ`, with `ᾱ = datum.roots[root]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AffineRoot {
    pub root: usize,
    pub k: i64,
}

impl AffineRoot {
    /// The constant term `k/e`.
    pub fn offset(&self, datum: &RootDatum) -> Q {
        qf(self.k, datum.spec.e as i64)
    }

    /// Exact value at a point given in `y` coordinates.
    pub fn value(&self, datum: &RootDatum, y: &[Q]) -> Q {
        let c = &datum.roots[self.root].coeffs;
        c.iter().zip(y).fold(self.offset(datum), |acc, (&ci, yi)| acc + q(ci) * yi)
    }

    /// Human-readable form such as `α1+2α2−δ/3`.
    pub fn describe(&self, datum: &RootDatum) -> String {
        let mut s = linear_form_string(&datum.roots[self.root].coeffs);
        let off = self.offset(datum);
        if !off.is_zero() {
            let sign = if off.is_negative() { "−" } else { "+" };
            let a = off.abs();
            let body = if a.is_one() {
                "δ".to_string()
            } else if a.denom().is_one() {
                format!("{}δ", a.numer())
            } else if a.numer().is_one() {
                format!("δ/{}", a.denom())
            } else {
                format!("{}δ/{}", a.numer(), a.denom())
            };
            s.push_str(sign);
            s.push_str(&body);
        }
        s
    }
}

/// Formats a coefficient vector as `2α1−α2`.
pub fn linear_form_string(c: &[i64]) -> String {
    let mut s = String::new();
    for (j, &x) in c.iter().enumerate() {
        if x == 0 {
            continue;
        }
        if x < 0 {
            s.push('−');
        } else if !s.is_empty() {
            s.push('+');
        }
        if x.abs() != 1 {
            s.push_str(&x.abs().to_string());
        }
        s.push_str(&format!("α{}", j + 1));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Precomputed apartment data for one datum and one slope.
#[derive(Clone, Debug)]
pub struct Apartment {
    pub datum: RootDatum,
    /// Common denominator of all enumerated points.
    pub scale: i64,
    /// `ν = nu.0 / nu.1` in lowest terms.
    pub nu: (i64, i64),
    /// `refl[g][h]`: index of `s_g(h)` in `datum.roots`.
    refl: Vec<Vec<u32>>,
    /// `pair[h][g] = ⟨h̄, ḡ∨⟩`.
    pair: Vec<Vec<i64>>,
    /// Scaled barycenter of the fundamental alcove.
    pub base: Vec<i64>,
    /// Scaled `νρ∨`.
    pub target: Vec<i64>,
    /// Affine roots taking the value `ν` at `νρ∨`.
    pub nu_roots: Vec<AffineRoot>,
    /// Affine roots vanishing at `νρ∨`, positive on the fundamental alcove, one per hyperplane.
    pub wall_roots: Vec<AffineRoot>,
}

impl Apartment {
    /// Builds the apartment for the datum at slope `nu_num/nu_den`.
    pub fn new(datum: &RootDatum, nu_num: u64, nu_den: u64) -> Result<Self> {
        if nu_num == 0 || nu_den == 0 {
            return invalid("slope must be positive");
        }
        let g = nu_num.gcd(&nu_den);
        let nu = ((nu_num / g) as i64, (nu_den / g) as i64);
        let r = datum.rank;
        let e = datum.spec.e as i64;
        let mut scale: i64 = nu.1;
        for j in 1..=r {
            scale = scale.lcm(&((r as i64 + 1) * e * datum.marks[j] as i64));
        }
        let base: Vec<i64> = (1..=r).map(|j| scale / ((r as i64 + 1) * e * datum.marks[j] as i64)).collect();
        let target: Vec<i64> = datum.rho_vee.iter().map(|&x| x * scale / nu.1 * nu.0).collect();

        let index: HashMap<&[i64], usize> =
            datum.roots.iter().enumerate().map(|(i, rt)| (rt.coeffs.as_slice(), i)).collect();
        let nroots = datum.roots.len();
        let mut refl = vec![vec![0u32; nroots]; nroots];
        let mut pair = vec![vec![0i64; nroots]; nroots];
        for h in 0..nroots {
            for gi in 0..nroots {
                let hc = &datum.roots[h].coeffs;
                let gc = &datum.roots[gi].coeffs;
                let p: i64 = hc.iter().zip(&datum.roots[gi].coroot).map(|(a, b)| a * b).sum();
                pair[h][gi] = p;
                let img: Vec<i64> = hc.iter().zip(gc).map(|(a, b)| a - p * b).collect();
                let Some(&k) = index.get(img.as_slice()) else {
                    return invariant(format!("{}: root system not closed under reflections", datum.spec));
                };
                refl[gi][h] = k as u32;
            }
        }

        let mut ap = Apartment {
            datum: datum.clone(),
            scale,
            nu,
            refl,
            pair,
            base,
            target,
            nu_roots: Vec::new(),
            wall_roots: Vec::new(),
        };
        ap.nu_roots = ap.compute_nu_roots();
        ap.wall_roots = ap.compute_wall_roots();
        for a in &ap.nu_roots {
            if ap.eval(a, &ap.target) * ap.nu.1 != ap.nu.0 * ap.scale {
                return invariant("a ν-weight root does not take the value ν at νρ∨");
            }
        }
        Ok(ap)
    }

    pub fn rank(&self) -> usize {
        self.datum.rank
    }

    /// Scaled value of an affine root at a scaled point.
    pub fn eval(&self, a: &AffineRoot, y: &[i64]) -> i64 {
        let c = &self.datum.roots[a.root].coeffs;
        let mut s = a.k * (self.scale / self.datum.spec.e as i64);
        for (ci, yi) in c.iter().zip(y) {
            s += ci * yi;
        }
        s
    }

    /// Affine roots `ᾱ + nδ` with `ᾱ(νρ∨) + n` equal to a prescribed multiple of `ν`.
    fn roots_with_value(&self, times_nu: i64) -> Vec<AffineRoot> {
        let e = self.datum.spec.e as i64;
        let (a, b) = self.nu;
        let mut out = Vec::new();
        for (i, rt) in self.datum.roots.iter().enumerate() {
            // n = ν (times_nu − ht), k = e n
            let num = e * a * (times_nu - rt.height());
            if num % b != 0 {
                continue;
            }
            let k = num / b;
            if self.datum.admissible(i, k) {
                out.push(AffineRoot { root: i, k });
            }
        }
        out
    }

    fn compute_nu_roots(&self) -> Vec<AffineRoot> {
        let mut v = self.roots_with_value(1);
        v.sort_by_key(|a| (-self.datum.roots[a.root].height(), a.root));
        v
    }

    fn compute_wall_roots(&self) -> Vec<AffineRoot> {
        let mut by_plane: HashMap<(Vec<i64>, i64), AffineRoot> = HashMap::new();
        for a in self.roots_with_value(0) {
            if self.eval(&a, &self.base) <= 0 {
                continue;
            }
            let c = &self.datum.roots[a.root].coeffs;
            let g = c.iter().fold(a.k.abs(), |acc, &x| acc.gcd(&x.abs()));
            let key = (c.iter().map(|x| x / g).collect::<Vec<_>>(), a.k / g);
            let norm = self.datum.roots[a.root].norm2;
            by_plane
                .entry(key)
                .and_modify(|cur| {
                    if norm < self.datum.roots[cur.root].norm2 {
                        *cur = a;
                    }
                })
                .or_insert(a);
        }
        let mut v: Vec<AffineRoot> = by_plane.into_values().collect();
        v.sort_by_key(|a| (self.datum.roots[a.root].height(), a.root));
        v
    }

    /// The affine simple roots `α_0, α_1, …, α_r` bounding the fundamental alcove.
    pub fn simple_affine_roots(&self) -> Vec<AffineRoot> {
        let r = self.rank();
        let mut v = vec![AffineRoot { root: self.datum.neg(self.datum.beta), k: 1 }];
        for j in 0..r {
            let mut c = vec![0; r];
            c[j] = 1;
            v.push(AffineRoot { root: self.datum.find(&c).expect("simple root present"), k: 0 });
        }
        v
    }

    /// Reflection of an affine root in another: `s_g(h) = h − ⟨h̄, ḡ∨⟩ g`.
    pub fn reflect_root(&self, g: &AffineRoot, h: &AffineRoot) -> AffineRoot {
        AffineRoot { root: self.refl[g.root][h.root] as usize, k: h.k - self.pair[h.root][g.root] * g.k }
    }

    /// Reflection of a scaled point in the hyperplane of `g`.
    pub fn reflect_point(&self, g: &AffineRoot, y: &[i64]) -> Vec<i64> {
        let v = self.eval(g, y);
        let co = &self.datum.roots[g.root].coroot;
        y.iter()
            .zip(co)
            .map(|(yi, ci)| {
                v.checked_mul(*ci).and_then(|t| yi.checked_sub(t)).expect("coordinate overflow in reflection")
            })
            .collect()
    }

    /// The fundamental alcove.
    pub fn fundamental_alcove(&self) -> Alcove {
        self.make_alcove(self.base.clone(), self.simple_affine_roots())
    }

    fn make_alcove(&self, bary: Vec<i64>, walls: Vec<AffineRoot>) -> Alcove {
        let negatives: Vec<u16> =
            (0..self.nu_roots.len()).filter(|&i| self.eval(&self.nu_roots[i], &bary) < 0).map(|i| i as u16).collect();
        Alcove { sep: negatives.len() as u32, bary, walls, negatives }
    }

    /// The alcove adjacent across wall `i`.
    pub fn neighbor(&self, a: &Alcove, i: usize) -> Alcove {
        let g = a.walls[i];
        let bary = self.reflect_point(&g, &a.bary);
        let walls = a
            .walls
            .iter()
            .enumerate()
            .map(|(l, h)| if l == i { AffineRoot { root: self.datum.neg(g.root), k: -g.k } } else { self.reflect_root(&g, h) })
            .collect();
        self.make_alcove(bary, walls)
    }

    /// True iff the scaled point lies strictly inside the `W_ν` chamber containing the fundamental alcove.
    pub fn is_dominant(&self, y: &[i64]) -> bool {
        self.wall_roots.iter().all(|w| self.eval(w, y) > 0)
    }

    /// Sign of an affine root at `νρ∨ + ε (b₀ − νρ∨)` for infinitesimal `ε > 0`.
    fn perturbed_target_sign(&self, a: &AffineRoot) -> i64 {
        let t = self.eval(a, &self.target);
        if t != 0 {
            t.signum()
        } else {
            self.eval(a, &self.base).signum()
        }
    }

    /// The alcove containing points near `νρ∨` inside the dominant chamber.
    pub fn base_alcove(&self) -> Result<Alcove> {
        let mut cur = self.fundamental_alcove();
        let mut steps = 0usize;
        loop {
            let Some(i) = (0..cur.walls.len()).find(|&i| self.perturbed_target_sign(&cur.walls[i]) < 0) else {
                return Ok(cur);
            };
            cur = self.neighbor(&cur, i);
            steps += 1;
            if steps > 1_000_000 {
                return invariant("walk towards νρ∨ did not terminate");
            }
        }
    }

    /// Exact barycenter of an alcove.
    pub fn barycenter(&self, a: &Alcove) -> Vec<Q> {
        a.bary.iter().map(|&x| qf(x, self.scale)).collect()
    }

    /// Vertices of an alcove; vertex `j` lies on every wall except wall `j`.
    pub fn vertices(&self, a: &Alcove) -> Vec<Vec<Q>> {
        let r = self.rank();
        (0..=r)
            .map(|j| {
                let walls: Vec<&AffineRoot> = a.walls.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, w)| w).collect();
                let rows: Vec<Vec<Q>> =
                    walls.iter().map(|w| self.datum.roots[w.root].coeffs.iter().map(|&c| q(c)).collect()).collect();
                let rhs: Vec<Q> = walls.iter().map(|w| -w.offset(&self.datum)).collect();
                exactla::solve(&QMatrix::from_rows(r, rows), &rhs).expect("alcove walls are independent")
            })
            .collect()
    }

    /// A reduced word `s_{i_1} ⋯ s_{i_k}` for the affine Weyl group element of an alcove.
    pub fn reduced_word(&self, a: &Alcove) -> Vec<usize> {
        let mut cur = a.clone();
        let mut rev = Vec::new();
        while let Some(i) = (0..cur.walls.len()).find(|&i| self.eval(&cur.walls[i], &self.base) < 0) {
            cur = self.neighbor(&cur, i);
            rev.push(i);
        }
        rev.reverse();
        rev
    }

    /// The affine map `x ↦ A x + t` (in `y` coordinates) sending the fundamental alcove onto `a`.
    pub fn affine_map(&self, a: &Alcove) -> (QMatrix, Vec<Q>) {
        let r = self.rank();
        // Columns of `lin` are the linear parts w(α_j) in the α-basis.
        let lin = QMatrix::from_rows(
            r,
            (0..r).map(|i| (1..=r).map(|j| q(self.datum.roots[a.walls[j].root].coeffs[i])).collect()).collect(),
        );
        // On 𝔞 in y coordinates the linear part is the inverse transpose.
        let inv_cols: Vec<Vec<Q>> = (0..r)
            .map(|j| {
                let mut rhs = vec![Q::zero(); r];
                rhs[j] = Q::one();
                exactla::solve(&lin, &rhs).expect("Weyl group element is invertible")
            })
            .collect();
        // inv_cols[j] is column j of lin^{-1}; A = (lin^{-1})^T has row j equal to that column.
        let amat = QMatrix::from_rows(r, inv_cols);
        let b0: Vec<Q> = self.base.iter().map(|&x| qf(x, self.scale)).collect();
        let ab0 = amat.mul_vec(&b0);
        let t = self.barycenter(a).iter().zip(ab0).map(|(x, y)| x - y).collect();
        (amat, t)
    }
}

/// An alcove, stored by its scaled barycenter and its walls `w̃α_0, …, w̃α_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alcove {
    pub bary: Vec<i64>,
    pub walls: Vec<AffineRoot>,
    /// Number of ν-walls separating the alcove from `νρ∨`.
    pub sep: u32,
    /// Indices into `nu_roots` of the ν-weight roots negative on the alcove.
    pub negatives: Vec<u16>,
}

/// All affine roots with value `ν` at `νρ∨`.
pub fn nu_weight_roots(ap: &Apartment) -> &[AffineRoot] {
    &ap.nu_roots
}

/// The stabilizer `W_ν` of `νρ∨`, classified.
pub fn wall_group(ap: &Apartment) -> Result<WallGroup> {
    let lin: Vec<usize> = ap.wall_roots.iter().map(|a| a.root).collect();
    WallGroup::from_roots(&ap.datum, &lin)
}

/// Sign-vector data of the ν-walls for a set of negative ν-roots: whether the clan is bounded.
fn clan_is_bounded(ap: &Apartment, negatives: &[u16]) -> bool {
    let rows: Vec<Vec<i64>> = (0..ap.nu_roots.len())
        .map(|i| {
            let s = if negatives.contains(&(i as u16)) { -1 } else { 1 };
            ap.datum.roots[ap.nu_roots[i].root].coeffs.iter().map(|c| s * c).collect()
        })
        .collect();
    cone_is_zero(&rows, ap.rank())
}

/// Breadth-first enumeration of the alcoves in the dominant chamber at `νρ∨`
/// that lie in bounded clans and are separated from `νρ∨` by at most
/// `max_sep` ν-walls.
///
/// Alcoves of unbounded clans are neither kept nor expanded. Boundedness is
/// decided once per sign vector.
pub fn enumerate_alcoves(ap: &Apartment, max_sep: u32, cap: usize) -> Result<Vec<Alcove>> {
    let start = ap.base_alcove()?;
    if !ap.is_dominant(&start.bary) || start.sep != 0 {
        return invariant("the alcove at νρ∨ is not dominant with empty separation");
    }
    let mut bounded: HashMap<Vec<u16>, bool> = HashMap::new();
    if !clan_is_bounded(ap, &start.negatives) {
        return invariant("the clan of νρ∨ is unbounded");
    }
    bounded.insert(start.negatives.clone(), true);
    bfs(ap, start, cap, |nb| {
        nb.sep <= max_sep
            && *bounded.entry(nb.negatives.clone()).or_insert_with(|| clan_is_bounded(ap, &nb.negatives))
    })
}

/// Enumeration with only the separation bound: may not terminate, so `cap` matters.
pub fn enumerate_alcoves_unpruned(ap: &Apartment, max_sep: u32, cap: usize) -> Result<Vec<Alcove>> {
    let start = ap.base_alcove()?;
    bfs(ap, start, cap, |nb| nb.sep <= max_sep)
}

fn bfs(ap: &Apartment, start: Alcove, cap: usize, mut admit: impl FnMut(&Alcove) -> bool) -> Result<Vec<Alcove>> {
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut out = vec![start.clone()];
    seen.insert(start.bary.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        let cur = out[idx].clone();
        for i in 0..cur.walls.len() {
            let nb = ap.neighbor(&cur, i);
            if seen.contains_key(&nb.bary) || !ap.is_dominant(&nb.bary) || !admit(&nb) {
                continue;
            }
            if out.len() >= cap {
                return Err(Error::Infeasible(format!(
                    "alcove enumeration exceeded the cap of {cap} alcoves"
                )));
            }
            seen.insert(nb.bary.clone(), out.len());
            queue.push_back(out.len());
            out.push(nb);
        }
    }
    Ok(out)
}

/// Coordinatewise bounds `[lo, hi]` (scaled) of the vertices of the ν-wall arrangement.
///
/// Every bounded clan lies in the convex hull of these vertices. The number of
/// candidate vertices grows like `C(#ν-roots, r)`, so this is meant for small cases.
pub fn arrangement_box(ap: &Apartment) -> Option<(Vec<Q>, Vec<Q>)> {
    let r = ap.rank();
    let n = ap.nu_roots.len();
    let mut lo: Option<Vec<Q>> = None;
    let mut hi: Option<Vec<Q>> = None;
    let mut subset: Vec<usize> = (0..r).collect();
    if n < r {
        return None;
    }
    loop {
        let rows: Vec<Vec<Q>> =
            subset.iter().map(|&i| ap.datum.roots[ap.nu_roots[i].root].coeffs.iter().map(|&c| q(c)).collect()).collect();
        let rhs: Vec<Q> = subset.iter().map(|&i| -ap.nu_roots[i].offset(&ap.datum)).collect();
        let m = QMatrix::from_rows(r, rows);
        if exactla::rank(&m) == r {
            let v = exactla::solve(&m, &rhs).expect("nonsingular system");
            match (&mut lo, &mut hi) {
                (Some(l), Some(h)) => {
                    for j in 0..r {
                        if v[j] < l[j] {
                            l[j] = v[j].clone();
                        }
                        if v[j] > h[j] {
                            h[j] = v[j].clone();
                        }
                    }
                }
                _ => {
                    lo = Some(v.clone());
                    hi = Some(v);
                }
            }
        }
        // Next r-subset in lexicographic order.
        let mut i = r;
        loop {
            if i == 0 {
                return lo.zip(hi);
            }
            i -= 1;
            if subset[i] < n - r + i {
                subset[i] += 1;
                for j in i + 1..r {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Enumeration without the boundedness pruning: every dominant alcove with
/// barycenter inside the arrangement box (widened by one unit) is visited, and
/// those with at most `max_sep` negative ν-roots are returned.
pub fn enumerate_alcoves_in_box(ap: &Apartment, max_sep: u32, cap: usize) -> Result<Vec<Alcove>> {
    let Some((lo, hi)) = arrangement_box(ap) else {
        return invalid("the ν-walls have no vertices");
    };
    let s = ap.scale;
    let lo: Vec<Q> = lo.into_iter().map(|x| (x - q(1)) * q(s)).collect();
    let hi: Vec<Q> = hi.into_iter().map(|x| (x + q(1)) * q(s)).collect();
    let inside = |y: &[i64]| y.iter().zip(lo.iter().zip(&hi)).all(|(v, (l, h))| q(*v) >= *l && q(*v) <= *h);
    let start = ap.base_alcove()?;
    let all = bfs(ap, start, cap, |nb| inside(&nb.bary))?;
    Ok(all.into_iter().filter(|a| a.sep <= max_sep).collect())
}

/// Coset representatives of `W_ν \ W_aff` whose `λ` has degree at most the reflection count of `W_ν`.
pub fn enumerate_contributing_alcoves(ap: &Apartment, wg: &WallGroup, cap: usize) -> Result<Vec<Alcove>> {
    enumerate_alcoves(ap, wg.n_reflections as u32, cap)
}

/// Linear parts of the ν-weight roots negative on the alcove.
pub fn lambda_factors(ap: &Apartment, alcove: &Alcove) -> Vec<Vec<i64>> {
    ap.nu_roots
        .iter()
        .filter(|a| ap.eval(a, &alcove.bary) < 0)
        .map(|a| ap.datum.roots[a.root].coeffs.clone())
        .collect()
}

/// A connected component of the complement of the ν-walls, restricted to the enumerated alcoves.
#[derive(Clone, Debug, Serialize)]
pub struct Clan {
    /// `+`/`−` per ν-weight root, in the order of `Apartment::nu_roots`.
    pub sign_vector: String,
    /// Indices of the member alcoves in the enumeration.
    pub alcoves: Vec<usize>,
    /// Indices (into `nu_roots`) of the roots contributing to `λ`.
    pub negatives: Vec<u16>,
    /// Linear parts of `λ`'s factors.
    pub lambda_factors: Vec<Vec<i64>>,
    pub sep: u32,
    pub bounded: bool,
}

/// Groups alcoves by their sign vector against the ν-walls.
pub fn clan_decomposition(ap: &Apartment, alcoves: &[Alcove]) -> Vec<Clan> {
    let mut groups: HashMap<&[u16], Vec<usize>> = HashMap::new();
    for (i, a) in alcoves.iter().enumerate() {
        groups.entry(a.negatives.as_slice()).or_default().push(i);
    }
    let n = ap.nu_roots.len();
    let mut clans: Vec<Clan> = groups
        .into_iter()
        .map(|(neg, members)| {
            let mut signs = vec!['+'; n];
            for &i in neg {
                signs[i as usize] = '−';
            }
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|i| {
                    let s = if signs[i] == '+' { 1 } else { -1 };
                    ap.datum.roots[ap.nu_roots[i].root].coeffs.iter().map(|c| s * c).collect()
                })
                .collect();
            Clan {
                sign_vector: signs.into_iter().collect(),
                alcoves: members,
                negatives: neg.to_vec(),
                lambda_factors: neg.iter().map(|&i| ap.datum.roots[ap.nu_roots[i as usize].root].coeffs.clone()).collect(),
                sep: neg.len() as u32,
                bounded: cone_is_zero(&rows, ap.rank()),
            }
        })
        .collect();
    clans.sort_by(|a, b| (a.sep, &a.sign_vector).cmp(&(b.sep, &b.sign_vector)));
    clans
}

// ---------------------------------------------------------------------------
// Recession cones
// ---------------------------------------------------------------------------

/// Decides whether `{y : row·y ≥ 0 for every row} = {0}`.
///
/// That happens exactly when the rows span and some combination with all
/// coefficients strictly positive vanishes (Stiemke). Scaling, the
/// coefficients may be taken `≥ 1`, which is a phase-one linear program solved
/// exactly with Bland's rule.
pub fn cone_is_zero(rows: &[Vec<i64>], dim: usize) -> bool {
    let m = QMatrix::from_rows(dim, rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect());
    exactla::rank(&m) == dim && positive_relation_exists(rows, dim)
}

/// Whether `Σ cⱼ rowⱼ = 0` has a solution with every `cⱼ ≥ 1`.
fn positive_relation_exists(rows: &[Vec<i64>], dim: usize) -> bool {
    let n = rows.len();
    let width = n + dim + 1;
    let rhs = n + dim;
    // Substituting c = 1 + x gives Σ xⱼ rowⱼ = −Σ rowⱼ with x ≥ 0.
    let mut t: Vec<Vec<Q>> = (0..dim)
        .map(|i| {
            let mut row = vec![Q::zero(); width];
            let mut b = 0i64;
            for (j, r) in rows.iter().enumerate() {
                row[j] = q(r[i]);
                b -= r[i];
            }
            row[rhs] = q(b);
            if b < 0 {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            row[n + i] = Q::one();
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + dim).collect();
    // Reduced costs of "minimise the sum of the artificials".
    let mut cost: Vec<Q> = (0..width)
        .map(|j| if (n..n + dim).contains(&j) { Q::zero() } else { -t.iter().map(|r| r[j].clone()).sum::<Q>() })
        .collect();
    while let Some(enter) = (0..rhs).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..dim {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = &t[i][rhs] / &t[i][enter];
            let better = match &leave {
                None => true,
                Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((p, _)) = leave else { break };
        let piv = t[p][enter].clone();
        for x in t[p].iter_mut() {
            *x /= &piv;
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        let f = cost[enter].clone();
        for (x, y) in cost.iter_mut().zip(&prow) {
            *x -= &f * y;
        }
        basis[p] = enter;
    }
    cost[rhs].is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootdata::build_root_datum;

    fn datum(s: &str) -> RootDatum {
        build_root_datum(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn slopes() {
        let a2 = datum("A2");
        let s = make_slope(&a2, 1, 2).unwrap();
        assert!(!s.elliptic);
        assert_eq!(s.t_fixed_dim, 1);
        let g2 = datum("G2");
        let s = make_slope(&g2, 1, 3).unwrap();
        assert!(s.elliptic);
        assert_eq!(s.t_fixed_dim, 0);
        let d4 = datum("3D4");
        let s = make_slope(&d4, 1, 6).unwrap();
        assert_eq!(s.m, 6);
        assert!(s.elliptic);
        assert!(make_slope(&g2, 1, 4).is_err());
        assert!(make_slope(&g2, 2, 4).is_err());
    }

    #[test]
    fn a1_half() {
        let a1 = datum("A1");
        let ap = Apartment::new(&a1, 1, 2).unwrap();
        let descr: Vec<String> = ap.nu_roots.iter().map(|a| a.describe(&a1)).collect();
        assert_eq!(descr.len(), 2);
        assert!(descr.contains(&"α1".to_string()));
        assert!(descr.contains(&"−α1+δ".to_string()));
        let wg = wall_group(&ap).unwrap();
        assert_eq!(wg.n_reflections, 0);
        // Across the wall of −α+δ the single factor is −α.
        let fund = ap.fundamental_alcove();
        let i = fund.walls.iter().position(|w| w.k == 1).unwrap();
        let nb = ap.neighbor(&fund, i);
        assert_eq!(lambda_factors(&ap, &nb), vec![vec![-1]]);
        assert!(lambda_factors(&ap, &fund).is_empty());
    }

    #[test]
    fn g2_third_roots() {
        let g2 = datum("G2");
        let ap = Apartment::new(&g2, 1, 3).unwrap();
        let mut d: Vec<String> = ap.nu_roots.iter().map(|a| a.describe(&g2)).collect();
        d.sort();
        let mut expect =
            vec!["α1+3α2−δ", "α2", "−α1−α2+δ", "−2α1−3α2+2δ", "α1"].into_iter().map(String::from).collect::<Vec<_>>();
        expect.sort();
        assert_eq!(d, expect);
        let w: Vec<String> = ap.wall_roots.iter().map(|a| a.describe(&g2)).collect();
        assert_eq!(w, vec!["−α1−2α2+δ".to_string()]);
    }

    #[test]
    fn recession_cones() {
        // The positive quadrant is a nontrivial cone.
        assert!(!cone_is_zero(&[vec![1, 0], vec![0, 1]], 2));
        // Three directions positively spanning the plane leave only zero.
        assert!(cone_is_zero(&[vec![1, 0], vec![0, 1], vec![-1, -1]], 2));
        // Rank deficiency always leaves a line.
        assert!(!cone_is_zero(&[vec![1, 1], vec![-1, -1]], 2));
    }

    #[test]
    fn affine_map_sends_base_to_barycenter() {
        let g2 = datum("G2");
        let ap = Apartment::new(&g2, 1, 2).unwrap();
        let wg = wall_group(&ap).unwrap();
        let alcoves = enumerate_contributing_alcoves(&ap, &wg, 1000).unwrap();
        for a in alcoves.iter().take(5) {
            let (m, t) = ap.affine_map(a);
            let b0: Vec<Q> = ap.base.iter().map(|&x| qf(x, ap.scale)).collect();
            let img: Vec<Q> = m.mul_vec(&b0).into_iter().zip(&t).map(|(x, y)| x + y).collect();
            assert_eq!(img, ap.barycenter(a));
            let word = ap.reduced_word(a);
            let mut cur = ap.fundamental_alcove();
            for &i in &word {
                cur = ap.neighbor(&cur, i);
            }
            assert_eq!(cur.bary, a.bary);
        }
    }
}

//! Total and per-clan dimensions, and the closed-form fiber dimensions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apartment::{self, Apartment, SlopeSpec, DEFAULT_ALCOVE_CAP};
use crate::coinvariant::{CoinvariantAlgebra, DEFAULT_MONOMIAL_BUDGET};
use crate::error::{invalid, invariant, Error, Result};
use crate::exactla::{q, Q};
use crate::rootdata::{Family, RootDatum};

/// A standard parahoric, given by the affine simple reflections `S ⊆ {0, …, r}` of its Levi.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Parahoric {
    #[default]
    Iwahori,
    Standard(Vec<usize>),
}

impl Parahoric {
    pub fn reflections(&self) -> &[usize] {
        match self {
            Parahoric::Iwahori => &[],
            Parahoric::Standard(s) => s,
        }
    }

    pub fn is_iwahori(&self) -> bool {
        self.reflections().is_empty()
    }
}

impl fmt::Display for Parahoric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_iwahori() {
            return f.write_str("I");
        }
        let s: Vec<String> = self.reflections().iter().map(|i| i.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

impl FromStr for Parahoric {
    type Err = Error;

    /// `I` (or empty) for the Iwahori, otherwise a comma-separated list of node indices.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t.eq_ignore_ascii_case("i") || t.eq_ignore_ascii_case("iwahori") {
            return Ok(Parahoric::Iwahori);
        }
        let mut nodes: Vec<usize> = t
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad parahoric node '{x}'"))))
            .collect::<Result<_>>()?;
        nodes.sort_unstable();
        nodes.dedup();
        Ok(if nodes.is_empty() { Parahoric::Iwahori } else { Parahoric::Standard(nodes) })
    }
}

/// Closed-form dimensions attached to a slope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formulas {
    pub dim_sp: u64,
    pub dim_m: u64,
    pub t_fixed_dim: usize,
    /// `r(h_θν − 1)/2`, present for elliptic slopes.
    pub n_top: Option<u64>,
}

/// `2·dim_Sp` before halving: `ν·#Φ − r + t`.
fn twice(datum: &RootDatum, slope: &SlopeSpec, sign: i64) -> Result<i64> {
    let num = slope.d1 as i64 * datum.abs_root_count as i64;
    if num % slope.m1 as i64 != 0 {
        return invariant(format!("ν·#Φ is not integral for {} at {slope}", datum.spec));
    }
    Ok(num / slope.m1 as i64 - datum.rank as i64 + sign * slope.t_fixed_dim as i64)
}

fn halve(x: i64, what: &str) -> Result<u64> {
    if x < 0 || x % 2 != 0 {
        return invariant(format!("{what} = {x}/2 is not a nonnegative integer"));
    }
    Ok((x / 2) as u64)
}

/// Dimension of the homogeneous affine Springer fiber.
pub fn dim_springer(datum: &RootDatum, slope: &SlopeSpec) -> Result<u64> {
    halve(twice(datum, slope, 1)?, "dim Sp")
}

/// Dimension of the corresponding Hitchin fiber.
pub fn dim_hitchin(datum: &RootDatum, slope: &SlopeSpec) -> Result<u64> {
    halve(twice(datum, slope, -1)?, "dim M")
}

/// All formula values with their consistency checks.
pub fn formulas(datum: &RootDatum, slope: &SlopeSpec) -> Result<Formulas> {
    let dim_sp = dim_springer(datum, slope)?;
    let dim_m = dim_hitchin(datum, slope)?;
    if dim_sp - dim_m != slope.t_fixed_dim as u64 {
        return invariant("dim Sp − dim M differs from the fixed-torus dimension");
    }
    let n_top = if slope.elliptic {
        // r(h ν − 1)/2 with ν = d₁/m₁
        let num = datum.rank as i64 * (datum.h_theta as i64 * slope.d1 as i64 - slope.m1 as i64);
        let den = 2 * slope.m1 as i64;
        if num % den != 0 {
            return invariant("r(h_θν − 1)/2 is not integral for an elliptic slope");
        }
        let n = (num / den) as u64;
        if n != dim_sp {
            return invariant(format!("elliptic dim Sp = {dim_sp} but r(h_θν − 1)/2 = {n}"));
        }
        Some(n)
    } else {
        None
    };
    Ok(Formulas { dim_sp, dim_m, t_fixed_dim: slope.t_fixed_dim, n_top })
}

/// Enumeration allowance when the coinvariant algebra is already out of budget.
pub const PARTIAL_REPORT_ALCOVE_CAP: usize = 50_000;

/// Settings for [`total_dimension`].
#[derive(Clone, Debug)]
pub struct DimOptions {
    pub parahoric: Parahoric,
    /// Enumerate at `d/m` itself instead of scaling the value at `1/m`.
    pub direct: bool,
    /// Include per-clan graded data.
    pub graded: bool,
    pub budget: u128,
    pub alcove_cap: usize,
}

impl Default for DimOptions {
    fn default() -> Self {
        DimOptions {
            parahoric: Parahoric::Iwahori,
            direct: false,
            graded: false,
            budget: DEFAULT_MONOMIAL_BUDGET,
            alcove_cap: DEFAULT_ALCOVE_CAP,
        }
    }
}

/// One clan's contribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClanReport {
    pub sign_vector: String,
    pub alcove_count: usize,
    pub lambda_degree: usize,
    /// Expected dimension `N − sep`.
    pub expected_dim: i64,
    pub bounded: bool,
    /// `dim λ·H` for one coset; absent when the algebra was not computed.
    pub image_dim: Option<u128>,
    pub subtotal: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hilbert: Option<Vec<usize>>,
}

/// Everything computed for one `(type, slope, parahoric)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimReport {
    #[serde(rename = "type")]
    pub type_label: String,
    pub relative_type: String,
    pub rank: usize,
    pub e: u32,
    pub slope: SlopeSpec,
    pub parahoric: String,
    /// Slope actually enumerated.
    pub enumerated_slope: String,
    /// Factor applied to the enumerated total (`d₁^r`, or 1 for direct runs).
    pub scale_factor: u128,
    pub wallgroup_type: String,
    pub wallgroup_order: u128,
    pub n_reflections: usize,
    pub n_cosets: usize,
    pub n_clans: usize,
    pub per_clan: Vec<ClanReport>,
    pub total: Option<u128>,
    pub formulas: Formulas,
    /// `None` for checked results; a note otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<String>,
}

/// Computes `dim L_ν(triv)` with its clan breakdown.
pub fn total_dimension(datum: &RootDatum, slope: &SlopeSpec, opts: &DimOptions) -> Result<DimReport> {
    if !slope.elliptic {
        return invalid(format!("slope {slope} is not elliptic for {}; the dimension formula needs an elliptic slope", datum.spec));
    }
    let r = datum.rank;
    for &i in opts.parahoric.reflections() {
        if i > r {
            return invalid(format!("parahoric node {i} out of range 0..={r}"));
        }
    }
    if opts.parahoric.reflections().len() > r {
        return invalid("a parahoric must omit at least one affine simple reflection");
    }
    let formulas = formulas(datum, slope)?;
    let scaled = !opts.direct && opts.parahoric.is_iwahori();
    let (num, scale_factor) = if scaled { (1, (slope.d1 as u128).pow(r as u32)) } else { (slope.d1, 1) };
    let ap = Apartment::new(datum, num, slope.m1)?;
    let wg = apartment::wall_group(&ap)?;
    if num == 1 {
        // At ν = 1/m₁ the top degree r(h_θ/m₁ − 1)/2 is the number of reflections in W_ν.
        let top = r as u64 * (datum.h_theta as u64 - slope.m1) / (2 * slope.m1);
        if top != wg.n_reflections as u64 {
            return invariant(format!(
                "top degree {top} disagrees with the wall group's {} reflections",
                wg.n_reflections
            ));
        }
    }
    let n_top = wg.n_reflections;
    let (algebra, mut infeasible) = match CoinvariantAlgebra::new(&wg, opts.budget) {
        Ok(a) => (Some(a), None),
        Err(Error::Infeasible(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    // A refused algebra only needs the clan list, so it gets a smaller enumeration allowance.
    let cap = if algebra.is_some() { opts.alcove_cap } else { opts.alcove_cap.min(PARTIAL_REPORT_ALCOVE_CAP) };
    let alcoves = match apartment::enumerate_contributing_alcoves(&ap, &wg, cap) {
        Ok(a) => a,
        Err(Error::Infeasible(msg)) if algebra.is_none() => {
            infeasible = infeasible.map(|m| format!("{m}; {msg}"));
            Vec::new()
        }
        Err(e) => return Err(e),
    };

    let mut per_clan: Vec<ClanReport>;
    let n_clans;
    let status;
    if opts.parahoric.is_iwahori() {
        let clans = apartment::clan_decomposition(&ap, &alcoves);
        n_clans = clans.len();
        per_clan = clans
            .par_iter()
            .map(|c| {
                let k = c.lambda_factors.len();
                let (image, hilbert) = match &algebra {
                    None => (None, None),
                    Some(_) if k > n_top => (Some(0), opts.graded.then(Vec::new)),
                    Some(a) => {
                        let h = a.image_hilbert(&c.lambda_factors);
                        (Some(h.iter().sum::<usize>() as u128), opts.graded.then_some(h))
                    }
                };
                ClanReport {
                    sign_vector: c.sign_vector.clone(),
                    alcove_count: c.alcoves.len(),
                    lambda_degree: k,
                    expected_dim: n_top as i64 - k as i64,
                    bounded: c.bounded,
                    image_dim: image,
                    subtotal: image.map(|x| x * c.alcoves.len() as u128),
                    hilbert,
                }
            })
            .collect();
        status = None;
    } else {
        per_clan = parahoric_contributions(&ap, &wg, &alcoves, algebra.as_ref(), &opts.parahoric)?;
        n_clans = per_clan.len();
        status = Some("unverified: no published values for parahoric runs".to_string());
    }
    per_clan.sort_by(|a, b| (a.lambda_degree, &a.sign_vector).cmp(&(b.lambda_degree, &b.sign_vector)));
    for c in &per_clan {
        if c.lambda_degree > n_top && c.image_dim.is_some_and(|x| x != 0) {
            return invariant("a clan with λ of degree above N contributed");
        }
        if let (Some(h), Some(x)) = (&c.hilbert, c.image_dim) {
            if h.iter().sum::<usize>() as u128 != x {
                return invariant("graded and ungraded clan dimensions disagree");
            }
        }
    }
    let total = if algebra.is_some() {
        let sub: u128 = per_clan.iter().map(|c| c.subtotal.unwrap_or(0)).sum();
        Some(sub * scale_factor)
    } else {
        None
    };
    Ok(DimReport {
        type_label: datum.spec.label(),
        relative_type: datum.relative_type.clone(),
        rank: r,
        e: datum.spec.e,
        slope: slope.clone(),
        parahoric: opts.parahoric.to_string(),
        enumerated_slope: format!("{num}/{}", slope.m1),
        scale_factor,
        wallgroup_type: wg.type_decomposition.clone(),
        wallgroup_order: wg.order,
        n_reflections: n_top,
        n_cosets: alcoves.len(),
        n_clans,
        per_clan,
        total,
        formulas,
        status,
        infeasible,
    })
}

/// Per-facet contributions for a standard parahoric.
///
/// The cosets `W_ν\W_aff/W_P` correspond to facets of type `S` up to `W_ν`.
/// Each facet of an enumerated alcove is folded into the closed dominant
/// chamber at `νρ∨` and deduplicated there. Its `λ` collects the ν-weight
/// roots strictly negative on the facet, and `W'` is generated by the wall
/// reflections fixing the facet pointwise.
fn parahoric_contributions(
    ap: &Apartment,
    wg: &crate::coinvariant::WallGroup,
    alcoves: &[apartment::Alcove],
    algebra: Option<&CoinvariantAlgebra>,
    parahoric: &Parahoric,
) -> Result<Vec<ClanReport>> {
    let s = parahoric.reflections();
    let datum = &ap.datum;
    let mut facets: BTreeMap<Vec<Q>, usize> = BTreeMap::new();
    for a in alcoves {
        let verts = ap.vertices(a);
        let keep: Vec<&Vec<Q>> = verts.iter().enumerate().filter(|(j, _)| !s.contains(j)).map(|(_, v)| v).collect();
        let n = q(keep.len() as i64);
        let mut y: Vec<Q> = (0..ap.rank()).map(|i| keep.iter().map(|v| v[i].clone()).sum::<Q>() / &n).collect();
        // Fold into the closed dominant chamber.
        loop {
            let Some(w) = ap.wall_roots.iter().find(|w| w.value(datum, &y).is_negative()) else { break };
            let v = w.value(datum, &y);
            for (yi, c) in y.iter_mut().zip(&datum.roots[w.root].coroot) {
                *yi -= &v * q(*c);
            }
        }
        *facets.entry(y).or_insert(0) += 1;
    }
    let n_top = wg.n_reflections;
    let mut out = Vec::new();
    for (y, _) in facets {
        let lam: Vec<Vec<i64>> = ap
            .nu_roots
            .iter()
            .filter(|a| a.value(datum, &y).is_negative())
            .map(|a| datum.roots[a.root].coeffs.clone())
            .collect();
        let fix: Vec<Vec<i64>> = ap
            .wall_roots
            .iter()
            .filter(|w| w.value(datum, &y).is_zero())
            .map(|w| datum.roots[w.root].coeffs.clone())
            .collect();
        let signs: String = ap
            .nu_roots
            .iter()
            .map(|a| {
                let v = a.value(datum, &y);
                if v.is_negative() {
                    '−'
                } else if v.is_zero() {
                    '0'
                } else {
                    '+'
                }
            })
            .collect();
        let k = lam.len();
        let image = match algebra {
            None => None,
            Some(_) if k > n_top => Some(0),
            Some(alg) => Some(alg.parabolic_image_dimension(&fix, &lam)? as u128),
        };
        out.push(ClanReport {
            sign_vector: signs,
            alcove_count: 1,
            lambda_degree: k,
            expected_dim: n_top as i64 - k as i64,
            bounded: true,
            image_dim: image,
            subtotal: image,
            hilbert: None,
        });
    }
    Ok(out)
}

/// Compares direct enumeration at `d₁/m₁` against `d₁^r` times the value at `1/m₁`.
pub fn scaling_check(datum: &RootDatum, m1: u64, d1: u64, opts: &DimOptions) -> Result<(bool, u128, u128)> {
    let base = apartment::make_slope(datum, 1, m1)?;
    let target = apartment::make_slope(datum, d1, m1)?;
    let mut o = opts.clone();
    o.direct = false;
    let scaled = total_dimension(datum, &base, &o)?.total.ok_or_else(|| Error::Infeasible("base slope".into()))?
        * (d1 as u128).pow(datum.rank as u32);
    o.direct = true;
    let direct = total_dimension(datum, &target, &o)?.total.ok_or_else(|| Error::Infeasible("direct slope".into()))?;
    Ok((scaled == direct, direct, scaled))
}

/// Coefficients `1..=n_max` of the two conjectured generating functions.
///
/// The `D` series is `(1 − 4x)^{−3/2}`, the `C` series is
/// `(1 − 4x)^{−3/2}(1 + √(1 − 4x))²/4`. Coefficient `n` predicts type `D_{2n}`
/// (respectively `C_{2n}`) at `ν = 1/(2n)`.
pub fn conjecture_series(family: Family, n_max: usize) -> Result<Vec<(usize, i128)>> {
    let central = |n: usize| -> i128 { crate::coinvariant::binomial(2 * n as u64, n as u64) as i128 };
    let a: Vec<i128> = (0..=n_max).map(|n| (2 * n as i128 + 1) * central(n)).collect();
    let series = match family {
        Family::D => a,
        Family::C => {
            // (1 + √(1−4x))²/4 = (1 − 2x + √(1−4x))/2 = 1 − 2x − Σ_{n≥2} Cat_{n−1} xⁿ
            let catalan = |n: usize| central(n) / (n as i128 + 1);
            let b: Vec<i128> =
                (0..=n_max).map(|n| if n == 0 { 1 } else if n == 1 { -2 } else { -catalan(n - 1) }).collect();
            (0..=n_max).map(|n| (0..=n).map(|i| a[i] * b[n - i]).sum()).collect()
        }
        _ => return invalid("conjectured series exist only for types C and D"),
    };
    Ok((1..=n_max).map(|n| (n, series[n])).collect())
}

//! SVG pictures of rank-1 and rank-2 apartments.
//!
//! Coordinates are exact until the last step. A point with coordinates
//! `y_j = ⟨α_j, x⟩` is placed in the plane through the Cholesky factor of the
//! adjugate of the Gram matrix, which is a multiple of the invariant form on
//! `𝔞` in the basis dual to the simple roots. The one square root involved is
//! taken as a fixed-point integer, so the output is reproducible bit for bit.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::apartment::{self, AffineRoot, Apartment};
use crate::coinvariant::CoinvariantAlgebra;
use crate::error::{invalid, Result};
use crate::exactla::{q, qf, Q};
use crate::rootdata::RootDatum;

/// Fixed-point resolution of the square root.
const FIXED: i64 = 1 << 16;
/// Width of the output in SVG user units.
const WIDTH: i64 = 640;

/// A rendered figure with the counts used to check its structure.
#[derive(Clone, Debug, Serialize)]
pub struct Figure {
    pub svg: String,
    pub nu_walls: usize,
    pub w_walls: usize,
    pub alcoves: usize,
    pub clans: usize,
    /// Label texts of all alcoves, sorted.
    pub labels: Vec<i64>,
    /// Labels of alcoves whose coset contributes nothing.
    pub empty_labels: Vec<i64>,
}

struct Plane {
    a: i64,
    b: i64,
    /// `round(FIXED · √det)` for the 2×2 case.
    s: i64,
    rank: usize,
}

impl Plane {
    fn new(gram: &[Vec<i64>]) -> Self {
        if gram.len() == 1 {
            return Plane { a: 1, b: 0, s: FIXED, rank: 1 };
        }
        // adj(G) = [[g11, −g01], [−g01, g00]]
        let a = gram[1][1];
        let b = -gram[0][1];
        let c = gram[0][0];
        let det = (a * c - b * b) as i128;
        let s = ((det * (FIXED as i128) * (FIXED as i128)).sqrt()) as i64;
        Plane { a, b, s, rank: 2 }
    }

    /// Exact plane coordinates (scaled by `FIXED`) of a point in `y` coordinates.
    fn map(&self, y: &[Q]) -> (Q, Q) {
        if self.rank == 1 {
            return (&y[0] * q(FIXED), Q::zero());
        }
        let x = (&y[0] * q(self.a) + &y[1] * q(self.b)) * q(FIXED);
        let yy = &y[1] * q(self.s);
        (x, -yy)
    }
}

fn round(x: &Q) -> i64 {
    let two = BigInt::from(2);
    let n = x.numer() * &two + x.denom();
    let d = x.denom() * &two;
    let mut f = &n / &d;
    if n.is_negative() && !(&n % &d).is_zero() {
        f -= 1;
    }
    f.to_i64().expect("coordinate fits in i64")
}

/// Clips the line `{p + t·v}` to the rectangle, returning the segment if it meets it.
fn clip(p: (Q, Q), v: (Q, Q), lo: (&Q, &Q), hi: (&Q, &Q)) -> Option<((Q, Q), (Q, Q))> {
    let mut t0: Option<Q> = None;
    let mut t1: Option<Q> = None;
    for (pc, vc, l, h) in [(&p.0, &v.0, lo.0, hi.0), (&p.1, &v.1, lo.1, hi.1)] {
        if vc.is_zero() {
            if pc < l || pc > h {
                return None;
            }
            continue;
        }
        let (mut a, mut b) = ((l - pc) / vc, (h - pc) / vc);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t0 = Some(match t0 {
            Some(t) if t > a => t,
            _ => a,
        });
        t1 = Some(match t1 {
            Some(t) if t < b => t,
            _ => b,
        });
    }
    let (t0, t1) = (t0?, t1?);
    if t0 >= t1 {
        return None;
    }
    let at = |t: &Q| (&p.0 + &v.0 * t, &p.1 + &v.1 * t);
    Some((at(&t0), at(&t1)))
}

/// Renders the apartment of `datum` at slope `d₁/m₁`, with the enumerated alcoves labeled.
pub fn apartment_figure(datum: &RootDatum, d1: u64, m1: u64, budget: u128, cap: usize) -> Result<Figure> {
    let r = datum.rank;
    if r == 0 || r > 2 {
        return invalid(format!("apartment pictures need relative rank 1 or 2; {} has rank {r}", datum.spec));
    }
    let slope = apartment::make_slope(datum, d1, m1)?;
    if !slope.elliptic {
        return invalid(format!("slope {slope} is not elliptic for {}", datum.spec));
    }
    let ap = Apartment::new(datum, d1, m1)?;
    let wg = apartment::wall_group(&ap)?;
    let alcoves = apartment::enumerate_contributing_alcoves(&ap, &wg, cap)?;
    let clans = apartment::clan_decomposition(&ap, &alcoves);
    let algebra = CoinvariantAlgebra::new(&wg, budget).ok();
    let n_top = wg.n_reflections as i64;

    // Clan index and contribution per alcove.
    let mut clan_of = vec![0usize; alcoves.len()];
    let mut contrib: Vec<Option<usize>> = vec![None; clans.len()];
    for (ci, c) in clans.iter().enumerate() {
        for &a in &c.alcoves {
            clan_of[a] = ci;
        }
        if let Some(alg) = &algebra {
            contrib[ci] = Some(alg.image_dimension(&c.lambda_factors));
        }
    }

    let plane = Plane::new(&datum.gram);
    let verts: Vec<Vec<(Q, Q)>> =
        alcoves.iter().map(|a| ap.vertices(a).iter().map(|v| plane.map(v)).collect()).collect();
    let target: Vec<Q> = ap.target.iter().map(|&x| qf(x, ap.scale)).collect();
    let tp = plane.map(&target);

    // Bounding box of the alcoves, widened by a quarter on each side.
    let mut lo = tp.clone();
    let mut hi = tp.clone();
    for p in verts.iter().flatten() {
        if p.0 < lo.0 {
            lo.0 = p.0.clone();
        }
        if p.1 < lo.1 {
            lo.1 = p.1.clone();
        }
        if p.0 > hi.0 {
            hi.0 = p.0.clone();
        }
        if p.1 > hi.1 {
            hi.1 = p.1.clone();
        }
    }
    let span = if plane.rank == 1 { &hi.0 - &lo.0 } else { std::cmp::max(&hi.0 - &lo.0, &hi.1 - &lo.1) };
    let pad = &span / q(4);
    lo = (&lo.0 - &pad, &lo.1 - &pad);
    hi = (&hi.0 + &pad, &hi.1 + &pad);
    let zoom = q(WIDTH) / (&hi.0 - &lo.0);
    let px = |p: &(Q, Q)| (round(&((&p.0 - &lo.0) * &zoom)), round(&((&p.1 - &lo.1) * &zoom)));
    let height = if plane.rank == 1 { WIDTH / 4 } else { round(&((&hi.1 - &lo.1) * &zoom)) };
    let mid = height / 2;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {WIDTH} {height}" width="{WIDTH}" height="{height}">"#
    );
    let _ = writeln!(svg, "<title>Apartment for {} at ν = {slope}</title>", datum.spec);
    let _ = writeln!(
        svg,
        "<style>.alcove{{fill:#f4f4f4;stroke:#bbb;stroke-width:0.5}}.fundamental{{fill:#c9dcf0}}\
.nu-wall{{stroke:#c0392b;stroke-width:1.5}}.w-wall{{stroke:#1f5fa0;stroke-width:1.5;stroke-dasharray:6 3}}\
.label{{font:11px sans-serif;text-anchor:middle;dominant-baseline:middle}}.empty{{fill:#999;font-style:italic}}\
.base-point{{fill:#000}}</style>"
    );

    let mut labels = Vec::new();
    let mut empty_labels = Vec::new();
    let fund = ap.fundamental_alcove().bary;
    for (i, a) in alcoves.iter().enumerate() {
        let ci = clan_of[i];
        let class = if a.bary == fund { "alcove fundamental" } else { "alcove" };
        let pts: Vec<(i64, i64)> = if plane.rank == 1 {
            // Draw a segment as a thin band.
            let xs: Vec<i64> = verts[i].iter().map(|p| px(p).0).collect();
            let (x0, x1) = (xs[0].min(xs[1]), xs[0].max(xs[1]));
            vec![(x0, mid - 12), (x1, mid - 12), (x1, mid + 12), (x0, mid + 12)]
        } else {
            verts[i].iter().map(&px).collect()
        };
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x},{y}")).collect();
        let _ = writeln!(svg, r#"<polygon class="{class}" data-clan="{ci}" points="{}"/>"#, path.join(" "));
        let label = n_top - a.sep as i64;
        let empty = contrib[ci] == Some(0);
        let (cx, cy) = if plane.rank == 1 {
            let bc = plane.map(&ap.barycenter(a));
            (px(&bc).0, mid)
        } else {
            px(&plane.map(&ap.barycenter(a)))
        };
        let lclass = if empty { "label empty" } else { "label" };
        let _ = writeln!(svg, r#"<text class="{lclass}" x="{cx}" y="{cy}">{label}</text>"#);
        labels.push(label);
        if empty {
            empty_labels.push(label);
        }
    }

    let walls = |svg: &mut String, roots: &[AffineRoot], class: &str| {
        for a in roots {
            let c = &datum.roots[a.root].coeffs;
            let off = a.offset(datum);
            if plane.rank == 1 {
                let x = px(&plane.map(&[-off / q(c[0])])).0;
                let _ = writeln!(
                    svg,
                    r#"<line class="{class}" data-root="{}" x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#,
                    a.describe(datum),
                    mid - 30,
                    mid + 30
                );
                continue;
            }
            // A point on the line and a direction, in y coordinates.
            let (p, v): (Vec<Q>, Vec<Q>) = if c[0] != 0 {
                (vec![-off / q(c[0]), Q::zero()], vec![q(-c[1]), q(c[0])])
            } else {
                (vec![Q::zero(), -off / q(c[1])], vec![q(1), Q::zero()])
            };
            let p2 = plane.map(&p);
            let end = plane.map(&[&p[0] + &v[0], &p[1] + &v[1]]);
            let dir = (&end.0 - &p2.0, &end.1 - &p2.1);
            if let Some((s, e)) = clip(p2, dir, (&lo.0, &lo.1), (&hi.0, &hi.1)) {
                let (x1, y1) = px(&s);
                let (x2, y2) = px(&e);
                let _ = writeln!(
                    svg,
                    r#"<line class="{class}" data-root="{}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#,
                    a.describe(datum)
                );
            }
        }
    };
    walls(&mut svg, &ap.nu_roots, "nu-wall");
    walls(&mut svg, &ap.wall_roots, "w-wall");
    let (tx, ty) = px(&tp);
    let ty = if plane.rank == 1 { mid } else { ty };
    let _ = writeln!(svg, r#"<circle class="base-point" cx="{tx}" cy="{ty}" r="3"/>"#);
    svg.push_str("</svg>\n");

    labels.sort_unstable();
    empty_labels.sort_unstable();
    let clan_count = clans.len();
    let count_class = |cls: &str| svg.matches(&format!(r#"class="{cls}""#)).count();
    let nu_walls = count_class("nu-wall");
    let w_walls = count_class("w-wall");
    Ok(Figure { nu_walls, w_walls, alcoves: alcoves.len(), clans: clan_count, labels, empty_labels, svg })
}

//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails the test target if any required criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ratcher::apartment::{self, make_slope, regular_numbers, Apartment};
use ratcher::coinvariant::{hilbert_from_degrees, CoinvariantAlgebra, WallGroup, DEFAULT_MONOMIAL_BUDGET};
use ratcher::dimensions::{conjecture_series, formulas, scaling_check, total_dimension, DimOptions, DimReport};
use ratcher::oracle::{generic_orbit_bound, PowerSumQuotient};
use ratcher::rootdata::{build_root_datum, cartan_gram, positive_roots, Family, RootDatum};
use ratcher::svg::apartment_figure;

const MATRIX: [&str; 10] = ["2A2", "C2", "2A3", "2A4", "G2", "3D4", "F4", "E6", "E7", "E8"];

fn datum(label: &str) -> RootDatum {
    build_root_datum(label.parse().expect("valid label")).expect("root datum")
}

fn run(d: &RootDatum, num: u64, den: u64, direct: bool) -> ratcher::Result<DimReport> {
    let slope = make_slope(d, num, den)?;
    total_dimension(d, &slope, &DimOptions { direct, ..DimOptions::default() })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Elliptic `m` with `1/m` a valid slope, largest first.
fn elliptic_denominators(d: &RootDatum) -> Vec<u64> {
    let (mut ms, _) = regular_numbers(d);
    ms.sort_unstable_by(|a, b| b.cmp(a));
    ms.into_iter().filter(|&m| make_slope(d, 1, m).map(|s| s.elliptic).unwrap_or(false)).collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

/// Reports collected along the way, checked again by the formula criterion.
#[derive(Default)]
struct Runs {
    reports: Vec<DimReport>,
}

fn criterion_1(runs: &mut Runs) -> Outcome {
    let cases = [
        ("2A2", 2, 3),
        ("C2", 2, 4),
        ("2A3", 2, 8),
        ("2A4", 2, 25),
        ("G2", 3, 4),
        ("G2", 2, 9),
        ("3D4", 6, 4),
        ("3D4", 3, 16),
    ];
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for (label, m, want) in cases {
        let start = Instant::now();
        let got = run(&datum(label), 1, m, false).ok().and_then(|r| {
            let t = r.total;
            runs.reports.push(r);
            t
        });
        let took = start.elapsed();
        slowest = slowest.max(took);
        if got != Some(want) || took >= Duration::from_secs(1) {
            bad.push(format!("{label} 1/{m}: got {got:?} want {want} in {took:?}"));
        }
    }
    let detail = if bad.is_empty() {
        format!("8/8 exact, slowest {:.0} ms", slowest.as_secs_f64() * 1e3)
    } else {
        bad.join("; ")
    };
    Outcome::new(bad.is_empty(), detail)
}

fn criterion_2(runs: &mut Runs) -> Outcome {
    let tables: [(&str, &[(u64, u128)], u64); 4] = [
        ("F4", &[(12, 1), (8, 6), (6, 20), (4, 96), (3, 256), (2, 1620)], 600),
        ("E6", &[(12, 1), (9, 8), (6, 92), (3, 4152)], 1800),
        ("E7", &[(18, 1), (14, 9), (6, 3894)], 3600),
        ("E8", &[(30, 1), (24, 10), (20, 54), (15, 576), (12, 3380)], 7200),
    ];
    let mut bad = Vec::new();
    let mut timings = Vec::new();
    for (label, rows, limit) in tables {
        let d = datum(label);
        let start = Instant::now();
        for &(m, want) in rows {
            match run(&d, 1, m, false) {
                Ok(r) => {
                    if r.total != Some(want) {
                        bad.push(format!("{label} 1/{m}: got {:?} want {want}", r.total));
                    }
                    runs.reports.push(r);
                }
                Err(e) => bad.push(format!("{label} 1/{m}: {e}")),
            }
        }
        let took = start.elapsed();
        if took > Duration::from_secs(limit) {
            bad.push(format!("{label} took {took:?}, over {limit} s"));
        }
        timings.push(format!("{label} {:.1}s", took.as_secs_f64()));
    }
    // Entries left open in the published table must be refused.
    let mut refused = 0;
    for (label, m) in [("E7", 2), ("E8", 6), ("E8", 5), ("E8", 4), ("E8", 3), ("E8", 2)] {
        match run(&datum(label), 1, m, false) {
            Ok(r) if r.total.is_none() && r.infeasible.is_some() => refused += 1,
            Err(ratcher::Error::Infeasible(_)) => refused += 1,
            Ok(r) => bad.push(format!("{label} 1/{m} answered {:?} instead of being refused", r.total)),
            Err(e) => bad.push(format!("{label} 1/{m}: unexpected error {e}")),
        }
    }
    // Stretch entries: optional, but never wrong.
    let stretch = [(10u64, 14769u128), (8, 62640)];
    let e8 = datum("E8");
    let mut stretch_notes = Vec::new();
    for (m, want) in stretch {
        let start = Instant::now();
        match run(&e8, 1, m, false) {
            Ok(r) if r.total == Some(want) => {
                stretch_notes.push(format!("E8 1/{m} = {want} ({:.0}s)", start.elapsed().as_secs_f64()))
            }
            Ok(r) if r.total.is_none() => stretch_notes.push(format!("E8 1/{m} refused")),
            Ok(r) => bad.push(format!("stretch E8 1/{m}: got {:?} want {want}", r.total)),
            Err(e) => stretch_notes.push(format!("E8 1/{m} not computed: {e}")),
        }
    }
    let detail = if bad.is_empty() {
        format!(
            "18/18 exact [{}]; {refused}/6 open entries refused; stretch: {}",
            timings.join(", "),
            stretch_notes.join(", ")
        )
    } else {
        bad.join("; ")
    };
    Outcome::new(bad.is_empty(), detail)
}

fn criterion_3(runs: &mut Runs) -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    let mut skipped = Vec::new();
    for label in MATRIX {
        let d = datum(label);
        let h = d.h_theta as u64;
        match run(&d, 1, h, false) {
            Ok(r) => {
                if r.total != Some(1) {
                    bad.push(format!("{label} 1/{h}: {:?}", r.total));
                }
                runs.reports.push(r);
                checked += 1;
            }
            Err(e) => bad.push(format!("{label} 1/{h}: {e}")),
        }
        for k in [2u64, 3] {
            if gcd(k, h) != 1 {
                skipped.push(format!("{label} {k}/{h}"));
                continue;
            }
            let want = (k as u128).pow(d.rank as u32);
            // Direct enumeration is cheap in rank two; larger ranks use the scaled path.
            match run(&d, k, h, d.rank <= 2) {
                Ok(r) => {
                    if r.total != Some(want) {
                        bad.push(format!("{label} {k}/{h}: {:?} want {want}", r.total));
                    }
                    runs.reports.push(r);
                    checked += 1;
                }
                Err(e) => bad.push(format!("{label} {k}/{h}: {e}")),
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{checked} Coxeter slopes exact; not in lowest terms, so not Coxeter slopes: {}", skipped.join(", "))
    } else {
        bad.join("; ")
    };
    Outcome::new(bad.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    let mut ok = Vec::new();
    for label in MATRIX {
        let d = datum(label);
        if d.rank != 2 {
            continue;
        }
        for m in elliptic_denominators(&d) {
            for k in [2u64, 3] {
                if gcd(k, m) != 1 || make_slope(&d, k, m).is_err() {
                    continue;
                }
                match scaling_check(&d, m, k, &DimOptions::default()) {
                    Ok((true, direct, _)) => ok.push(format!("{label} {k}/{m}={direct}")),
                    Ok((false, direct, scaled)) => bad.push(format!("{label} {k}/{m}: direct {direct}, scaled {scaled}")),
                    Err(e) => bad.push(format!("{label} {k}/{m}: {e}")),
                }
            }
        }
    }
    let pass = bad.is_empty() && !ok.is_empty();
    Outcome::new(pass, if bad.is_empty() { ok.join(", ") } else { bad.join("; ") })
}

fn criterion_5(runs: &Runs) -> Outcome {
    let mut bad = Vec::new();
    let mut n = 0;
    for r in &runs.reports {
        let f = &r.formulas;
        if f.dim_sp - f.dim_m != f.t_fixed_dim as u64 || f.n_top != Some(f.dim_sp) {
            bad.push(format!("{} {}", r.type_label, r.slope));
        }
        n += 1;
    }
    // Every admissible slope d/m with d ≤ 3, elliptic or not.
    for label in MATRIX.iter().chain(&["A1", "A2", "A3", "B3", "C3", "D4", "D5", "2D4"]) {
        let d = datum(label);
        let (ms, _) = regular_numbers(&d);
        for m in ms {
            for k in 1..=3u64 {
                let Ok(slope) = make_slope(&d, k, m) else { continue };
                match formulas(&d, &slope) {
                    Ok(f) => {
                        if f.dim_sp - f.dim_m != slope.t_fixed_dim as u64 {
                            bad.push(format!("{label} {slope}"));
                        }
                        if slope.elliptic != f.n_top.is_some() {
                            bad.push(format!("{label} {slope}: top degree presence"));
                        }
                    }
                    Err(e) => bad.push(format!("{label} {slope}: {e}")),
                }
                n += 1;
            }
        }
    }
    Outcome::new(bad.is_empty(), if bad.is_empty() { format!("{n} runs consistent") } else { bad.join("; ") })
}

/// Every wall group met in criteria 1 to 3, with the `λ` of each of its clans.
fn wall_groups() -> BTreeMap<String, (WallGroup, Vec<Vec<Vec<i64>>>)> {
    let mut out = BTreeMap::new();
    let mut slopes: Vec<(&str, u64)> = vec![
        ("2A2", 2),
        ("C2", 2),
        ("2A3", 2),
        ("2A4", 2),
        ("G2", 3),
        ("G2", 2),
        ("3D4", 6),
        ("3D4", 3),
    ];
    for (label, ms) in [
        ("F4", &[12u64, 8, 6, 4, 3, 2][..]),
        ("E6", &[12, 9, 6, 3]),
        ("E7", &[18, 14, 6]),
        ("E8", &[30, 24, 20, 15, 12]),
    ] {
        slopes.extend(ms.iter().map(|&m| (label, m)));
    }
    for label in MATRIX {
        slopes.push((label, datum(label).h_theta as u64));
    }
    for (label, m) in slopes {
        let d = datum(label);
        let ap = Apartment::new(&d, 1, m).expect("apartment");
        let wg = apartment::wall_group(&ap).expect("wall group");
        let alcoves = apartment::enumerate_contributing_alcoves(&ap, &wg, 10_000_000).expect("enumeration");
        let lambdas = apartment::clan_decomposition(&ap, &alcoves).into_iter().map(|c| c.lambda_factors).collect();
        out.insert(format!("{label} 1/{m}"), (wg, lambdas));
    }
    out
}

fn criterion_6(groups: &BTreeMap<String, (WallGroup, Vec<Vec<Vec<i64>>>)>) -> Outcome {
    let mut bad = Vec::new();
    let mut lambdas = 0;
    for (name, (wg, clans)) in groups {
        let alg = match CoinvariantAlgebra::new(wg, DEFAULT_MONOMIAL_BUDGET) {
            Ok(a) => a,
            Err(e) => {
                bad.push(format!("{name}: {e}"));
                continue;
            }
        };
        let h = alg.image_hilbert(&[]);
        let product: u128 = wg.degrees.iter().map(|&x| x as u128).product();
        if h.iter().sum::<usize>() as u128 != product {
            bad.push(format!("{name}: total {} vs product of degrees {product}", h.iter().sum::<usize>()));
        }
        if h != hilbert_from_degrees(&wg.degrees) {
            bad.push(format!("{name}: Hilbert vector differs from the degree formula"));
        }
        if h.iter().rev().cloned().collect::<Vec<_>>() != h {
            bad.push(format!("{name}: Hilbert vector is not palindromic"));
        }
        for lam in clans.iter().filter(|l| !l.is_empty()) {
            lambdas += 1;
            let full = alg.image_dimension(lam);
            let mut scaled = lam.clone();
            scaled[0] = scaled[0].iter().map(|x| -3 * x).collect();
            if alg.image_dimension(&scaled) != full {
                bad.push(format!("{name}: scaling a factor changed the image"));
            }
            if alg.image_dimension(&lam[1..]) < full {
                bad.push(format!("{name}: dropping a factor shrank the image"));
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{} wall groups, {lambdas} clan products", groups.len())
    } else {
        bad.join("; ")
    };
    Outcome::new(bad.is_empty(), detail)
}

fn criterion_7(groups: &BTreeMap<String, (WallGroup, Vec<Vec<Vec<i64>>>)>) -> Outcome {
    let mut bad = Vec::new();
    let mut compared = 0;
    // Rank-two cases: orbit bound and brute force on every clan.
    for (name, (wg, clans)) in groups.iter().filter(|(_, (wg, _))| wg.ambient_rank == 2) {
        let alg = CoinvariantAlgebra::new(wg, DEFAULT_MONOMIAL_BUDGET).expect("small algebra");
        let brute = PowerSumQuotient::new(&wg.gram, &wg.positive_roots);
        for lam in clans {
            let got = alg.image_dimension(lam);
            if got > generic_orbit_bound(&wg.gram, &wg.positive_roots, lam) {
                bad.push(format!("{name}: orbit bound violated"));
            }
            if brute.image_dimension(lam) != got {
                bad.push(format!("{name}: brute force {} vs {got}", brute.image_dimension(lam)));
            }
            compared += 1;
        }
    }
    // The listed wall-group types, each against every product of up to three ambient roots.
    let g2 = cartan_gram(Family::G, 2);
    let b2 = cartan_gram(Family::B, 2);
    let g2_long: Vec<Vec<i64>> = positive_roots(&g2).into_iter().filter(|r| ratcher::rootdata::inner(&g2, r, r) == 6).collect();
    let g2_pair: Vec<Vec<i64>> = vec![vec![1, 0], vec![1, 2]];
    let cases: Vec<(&str, Vec<Vec<i64>>, Vec<Vec<i64>>)> = vec![
        ("trivial", g2.clone(), vec![]),
        ("A1", g2.clone(), vec![vec![0, 1]]),
        ("A1xA1", g2.clone(), g2_pair),
        ("A2", g2.clone(), g2_long),
        ("B2", b2.clone(), positive_roots(&b2)),
        ("G2", g2.clone(), positive_roots(&g2)),
    ];
    let mut types = Vec::new();
    for (name, gram, pos) in cases {
        let wg = match WallGroup::from_positive_roots(gram.clone(), pos.clone()) {
            Ok(w) => w,
            Err(e) => {
                bad.push(format!("{name}: {e}"));
                continue;
            }
        };
        let alg = CoinvariantAlgebra::new(&wg, DEFAULT_MONOMIAL_BUDGET).expect("small algebra");
        let brute = PowerSumQuotient::new(&gram, &pos);
        let roots = positive_roots(&gram);
        let mut products: Vec<Vec<Vec<i64>>> = vec![vec![]];
        for _ in 0..3 {
            let last = products.clone();
            for p in last.iter().filter(|p| p.len() == last.iter().map(|x| x.len()).max().unwrap_or(0)) {
                for r in &roots {
                    let mut q = p.clone();
                    q.push(r.clone());
                    products.push(q);
                }
            }
        }
        for lam in &products {
            let got = alg.image_dimension(lam);
            if brute.image_dimension(lam) != got || got > generic_orbit_bound(&gram, &pos, lam) {
                bad.push(format!("{name}: mismatch on a product of {} roots", lam.len()));
            }
            compared += 1;
        }
        types.push(wg.type_decomposition.clone());
    }
    let detail = if bad.is_empty() {
        format!("{compared} image dimensions agree; types {}", types.join(", "))
    } else {
        bad.join("; ")
    };
    Outcome::new(bad.is_empty(), detail)
}

/// Report-only: mismatches are findings, not failures.
fn criterion_8() -> Outcome {
    let d_series = conjecture_series(Family::D, 3).expect("series");
    let c_series = conjecture_series(Family::C, 2).expect("series");
    let mut lines = Vec::new();
    let mut agree = true;
    for (label, m, predicted) in [("D4", 4u64, d_series[1].1), ("D6", 6, d_series[2].1), ("C4", 4, c_series[1].1)] {
        let got = run(&datum(label), 1, m, false).ok().and_then(|r| r.total);
        let same = got.map(|g| g as i128) == Some(predicted);
        agree &= same;
        lines.push(format!("{label} 1/{m} computed {got:?} predicted {predicted}{}", if same { "" } else { " (differs)" }));
    }
    let d4 = run(&datum("D4"), 1, 4, false).ok().and_then(|r| r.total);
    if !agree && d4.map(|x| x as i128) == Some(d_series[0].1) {
        lines.push("D-type values equal the series coefficients one index lower".into());
    }
    Outcome::new(agree, lines.join("; "))
}

fn criterion_9() -> Outcome {
    // (type, m, ν-walls, wall-group walls, alcoves, clans, labels, labels drawn as empty)
    let expected: [(&str, u64, usize, usize, usize, usize, &[i64], &[i64]); 8] = [
        ("G2", 3, 5, 1, 3, 2, &[0, 0, 1], &[]),
        ("G2", 2, 8, 2, 6, 4, &[0, 0, 0, 0, 1, 2], &[0]),
        ("C2", 2, 6, 1, 3, 3, &[0, 0, 1], &[]),
        ("2A2", 2, 4, 1, 2, 2, &[0, 1], &[]),
        ("2A3", 2, 7, 2, 4, 4, &[0, 0, 1, 2], &[]),
        ("2A4", 2, 9, 4, 8, 6, &[0, 0, 0, 1, 1, 2, 3, 4], &[]),
        ("3D4", 6, 6, 1, 3, 3, &[0, 0, 1], &[]),
        ("3D4", 3, 7, 3, 6, 4, &[0, 0, 1, 1, 2, 3], &[]),
    ];
    let mut bad = Vec::new();
    for (label, m, nu, w, alcoves, clans, labels, empty) in expected {
        let d = datum(label);
        let fig = match apartment_figure(&d, 1, m, DEFAULT_MONOMIAL_BUDGET, 1_000_000) {
            Ok(f) => f,
            Err(e) => {
                bad.push(format!("{label} 1/{m}: {e}"));
                continue;
            }
        };
        let again = apartment_figure(&d, 1, m, DEFAULT_MONOMIAL_BUDGET, 1_000_000).expect("second render");
        let count = |class: &str| fig.svg.matches(&format!("class=\"{class}\"")).count();
        let ok = fig.nu_walls == nu
            && fig.w_walls == w
            && fig.alcoves == alcoves
            && fig.clans == clans
            && fig.labels == labels
            && fig.empty_labels == empty
            && count("nu-wall") == nu
            && count("w-wall") == w
            && count("label") + count("label empty") == alcoves
            && count("alcove fundamental") == 1
            && fig.svg.starts_with("<svg")
            && again.svg == fig.svg;
        if !ok {
            bad.push(format!(
                "{label} 1/{m}: walls {}/{}, alcoves {}, clans {}, labels {:?}, empty {:?}",
                fig.nu_walls, fig.w_walls, fig.alcoves, fig.clans, fig.labels, fig.empty_labels
            ));
        }
    }
    Outcome::new(bad.is_empty(), if bad.is_empty() { "8/8 figures structurally as expected".into() } else { bad.join("; ") })
}

fn main() {
    let mut runs = Runs::default();
    let mut failures = 0;
    let mut line = |n: u32, title: &str, required: bool, o: Outcome, took: Duration| {
        let verdict = match (o.pass, required) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FLAG",
        };
        if !o.pass && required {
            failures += 1;
        }
        println!("criterion {n} {verdict}: {title} ({:.1}s): {}", took.as_secs_f64(), o.detail);
    };

    let t = Instant::now();
    let o = criterion_1(&mut runs);
    line(1, "rank-two reproductions", true, o, t.elapsed());
    let t = Instant::now();
    let o = criterion_2(&mut runs);
    line(2, "exceptional tables", true, o, t.elapsed());
    let t = Instant::now();
    let o = criterion_3(&mut runs);
    line(3, "Coxeter law", true, o, t.elapsed());
    let t = Instant::now();
    let o = criterion_4();
    line(4, "scaling law", true, o, t.elapsed());
    let t = Instant::now();
    let o = criterion_5(&runs);
    line(5, "formula identities", true, o, t.elapsed());
    let t = Instant::now();
    let groups = wall_groups();
    let o = criterion_6(&groups);
    line(6, "coinvariant properties", true, o, t.elapsed());
    let t = Instant::now();
    let o = criterion_7(&groups);
    line(7, "oracle equivalence", true, o, t.elapsed());
    let t = Instant::now();
    let o = criterion_8();
    line(8, "conjecture cross-checks (report only)", false, o, t.elapsed());
    let t = Instant::now();
    let o = criterion_9();
    line(9, "apartment figures", true, o, t.elapsed());

    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

//! The acceptance suite: ten checks of the library against known values,
//! shared by the `verify` subcommand and the `acceptance` test target.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builtin::{f2d, f3d};
use crate::decomp::{
    boundaries_analytic, boundaries_empirical, decompose, tiling_2d, Method, RasterSpec, ScanSpec, Window,
};
use crate::exec::Execution;
use crate::ext::{principal_sqrt, ExtendedComplex, Infinity};
use crate::ivpp2d::{branches, gamma_poly, IvppBranch2D};
use crate::lv::{lv_boundaries_empirical, lv_period2_param, lv_recurrence, Sign};
use crate::map::PointD;
use crate::mobius::{
    boundary_d, boundary_index, eigen, eigen_coordinate, period2_exclusion, reduced_apply, s_plus_one, x_to_z,
};

pub const COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {}: {} ({:.2} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

const TITLES: [&str; COUNT] = [
    "golden z-table",
    "interval tables",
    "cycle permutations",
    "period polynomials",
    "eigen-coordinate conjugacy",
    "analytic vs empirical boundaries",
    "period exactness",
    "Lotka-Volterra period 2",
    "period-2 exclusion",
    "period-3 tiling raster",
];

// wall-clock budgets, seconds
const LIMITS: [Option<f64>; COUNT] = [Some(1.0), None, None, None, None, Some(30.0), None, None, None, Some(60.0)];

/// Runs criterion `id` (1-based). Raster work uses `exec`.
pub fn run(id: usize, exec: Execution) -> CriterionResult {
    assert!((1..=COUNT).contains(&id), "criterion {id} out of range");
    let start = Instant::now();
    let (mut pass, mut detail) = match id {
        1 => golden_table(),
        2 => interval_tables(),
        3 => cycle_permutations(),
        4 => period_polynomials(),
        5 => conjugacy(),
        6 => empirical_agreement(),
        7 => period_exactness(),
        8 => lotka_volterra(),
        9 => exclusion(),
        _ => tiling_raster(exec),
    };
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = LIMITS[id - 1] {
        if seconds >= limit {
            pass = false;
            detail.push_str(&format!("; over the {limit} s budget"));
        }
    }
    CriterionResult { id, title: TITLES[id - 1], pass, detail, seconds }
}

pub fn run_all(exec: Execution) -> Vec<CriterionResult> {
    (1..=COUNT).map(|id| run(id, exec)).collect()
}

type Outcome = (bool, String);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ci(im: f64) -> ExtendedComplex {
    ExtendedComplex::complex(0.0, im)
}

fn ext_error(a: ExtendedComplex, b: ExtendedComplex) -> f64 {
    match (a, b) {
        (Infinity, Infinity) => 0.0,
        (ExtendedComplex::Finite(a), ExtendedComplex::Finite(b)) => (a - b).norm(),
        _ => f64::INFINITY,
    }
}

fn golden_rows() -> Vec<(&'static str, u32, Complex64, ExtendedComplex, ExtendedComplex)> {
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let (ap, am) = (-5.0 + 2.0 * s5, -5.0 - 2.0 * s5);
    let (bp, bm) = (-2.0 + s5, -2.0 - s5);
    let (qp, qm) = (principal_sqrt(c(ap)), principal_sqrt(c(am)));
    let x = ExtendedComplex::real;
    let z = |v: Complex64| ExtendedComplex::from(v);
    vec![
        ("3", 3, c(-3.0), Infinity, ci(-s3)),
        ("3", 3, c(-3.0), x(-1.0), Infinity),
        ("3", 3, c(-3.0), x(1.0), x(0.0)),
        ("4", 4, c(-1.0), Infinity, ci(-1.0)),
        ("4", 4, c(-1.0), x(-1.0), Infinity),
        ("4", 4, c(-1.0), x(0.0), ci(1.0)),
        ("4", 4, c(-1.0), x(1.0), x(0.0)),
        ("5+", 5, c(ap), Infinity, z(-qp)),
        ("5+", 5, c(ap), x(-1.0), Infinity),
        ("5+", 5, c(ap), x(-bp), z(0.5 * qp * (s5 + 1.0))),
        ("5+", 5, c(ap), x(bp), z(0.5 * qp * (s5 - 1.0))),
        ("5+", 5, c(ap), x(1.0), x(0.0)),
        ("5-", 5, c(am), Infinity, z(-qm)),
        ("5-", 5, c(am), x(-1.0), Infinity),
        ("5-", 5, c(am), x(-bm), z(-0.5 * qm * (s5 - 1.0))),
        ("5-", 5, c(am), x(bm), z(-0.5 * qm * (s5 + 1.0))),
        ("5-", 5, c(am), x(1.0), x(0.0)),
        ("6", 6, c(-1.0 / 3.0), Infinity, ci(-s3 / 3.0)),
        ("6", 6, c(-1.0 / 3.0), x(-1.0 / 3.0), ci(2.0 * s3 / 3.0)),
        ("6", 6, c(-1.0 / 3.0), x(0.0), ci(s3 / 3.0)),
        ("6", 6, c(-1.0 / 3.0), x(1.0 / 3.0), ci(s3 / 6.0)),
        ("6", 6, c(-1.0 / 3.0), x(1.0), x(0.0)),
    ]
}

fn golden_table() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let rows = golden_rows();
    for (label, n, r, x, want) in &rows {
        let via_z = x_to_z(*r, *x);
        // the same value through the closed form for the boundary orbit
        let via_d = boundary_index(*r, *n, *x, 1e-9).map(|m| boundary_d(*n, *r, m));
        let e_d = match via_d {
            Some(Ok(d)) => ext_error(d, *want),
            _ => f64::INFINITY,
        };
        let e = ext_error(via_z, *want).max(e_d);
        worst = worst.max(e);
        if !(e < 1e-9) {
            failures.push(format!("n={label} x={x}"));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} values via z and d, max error {worst:.1e}", rows.len())
    } else {
        format!("mismatch at {}", failures.join(", "))
    };
    (failures.is_empty(), detail)
}

fn branch_5(m: u32) -> IvppBranch2D {
    IvppBranch2D::new(5, m).expect("period 5 has branches m = 1, 2")
}

/// `(label, branch, finite boundaries, sigma as image vector)`.
fn tables() -> Vec<(&'static str, IvppBranch2D, Vec<f64>, Vec<usize>)> {
    let s5 = 5f64.sqrt();
    let (bp, bm) = (-2.0 + s5, -2.0 - s5);
    let b = |n| IvppBranch2D::new(n, 1).expect("m = 1 is admissible");
    vec![
        ("3", b(3), vec![-1.0, 1.0], vec![1, 2, 0]),
        ("4", b(4), vec![-1.0, 0.0, 1.0], vec![1, 2, 3, 0]),
        ("5+", branch_5(1), vec![-1.0, -bp, bp, 1.0], vec![1, 2, 3, 4, 0]),
        // C1 -> C3 -> C5 -> C2 -> C4 -> C1
        ("5-", branch_5(2), vec![bm, -1.0, 1.0, -bm], vec![2, 3, 4, 0, 1]),
        ("6", b(6), vec![-1.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0], vec![1, 2, 3, 4, 5, 0]),
    ]
}

fn interval_tables() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (label, branch, want, _) in tables() {
        match decompose(&branch, Method::Analytic) {
            Ok(d) => {
                let ok_len = d.cuts.len() == want.len() && d.components.len() == branch.n as usize;
                let e = d.cuts.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst = worst.max(e);
                let has_inf = d.boundaries().iter().any(|b| b.is_infinite());
                if !ok_len || !(e < 1e-9) || !has_inf {
                    failures.push(format!("n={label} got {:?}", d.cuts));
                }
            }
            Err(e) => failures.push(format!("n={label}: {e}")),
        }
    }
    let detail = if failures.is_empty() { format!("5 branches, max error {worst:.1e}") } else { failures.join("; ") };
    (failures.is_empty(), detail)
}

fn cycle_permutations() -> Outcome {
    let mut failures = Vec::new();
    let mut shown = Vec::new();
    for (label, branch, _, want) in tables() {
        match decompose(&branch, Method::Analytic) {
            Ok(d) if d.sigma == want => shown.push(format!("{label}:{}", d.sigma_cycles())),
            Ok(d) => failures.push(format!("n={label} got {}", d.sigma_cycles())),
            Err(e) => failures.push(format!("n={label}: {e}")),
        }
    }
    if failures.is_empty() {
        (true, shown.join(" "))
    } else {
        (false, failures.join("; "))
    }
}

fn period_polynomials() -> Outcome {
    // constant term first
    let printed: [(u32, &[i64]); 4] = [(3, &[3, 1]), (4, &[1, 1]), (5, &[5, 10, 1]), (6, &[1, 3])];
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, want) in printed {
        let Ok(g) = gamma_poly(n) else {
            failures.push(format!("n={n}: no polynomial"));
            continue;
        };
        let Some((k, ints)) = &g.integer else {
            failures.push(format!("n={n}: no integer scaling"));
            continue;
        };
        let e = g.monic.iter().zip(want).map(|(&m, &w)| (m * *k as f64 - w as f64).abs()).fold(0.0, f64::max);
        worst = worst.max(e);
        if ints.as_slice() != want || g.monic.len() != want.len() || !(e < 1e-9) {
            failures.push(format!("n={n}: got {ints:?}"));
        }
    }
    if failures.is_empty() {
        (true, format!("n=3..6 match after integer scaling, max error {worst:.1e}"))
    } else {
        (false, failures.join("; "))
    }
}

fn conjugacy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let r = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let x = ExtendedComplex::complex(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let Some(s) = eigen(r).s.finite() else { continue };
        let lhs = eigen_coordinate(r, reduced_apply(r, x));
        let rhs = match eigen_coordinate(r, x) {
            ExtendedComplex::Finite(w) => ExtendedComplex::from(s * w),
            Infinity => Infinity,
        };
        worst = worst.max(lhs.chordal(&rhs));
    }
    (worst < 1e-9, format!("200 samples, max chordal error {worst:.1e}"))
}

fn empirical_agreement() -> Outcome {
    let map = f2d();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut failures = Vec::new();
    for n in 3..=6 {
        for b in branches(n).expect("periods 3..6 have branches") {
            count += 1;
            let want = boundaries_analytic(&b);
            let got = boundaries_empirical(&map, &|x| b.point_real(x), n, &ScanSpec::default());
            match (want, got) {
                (Ok(w), Ok(g)) if w.len() == g.len() => {
                    for (a, e) in g.iter().zip(&w) {
                        let d = if a.is_infinite() && e.is_infinite() { 0.0 } else { (a - e).abs() };
                        worst = worst.max(d);
                    }
                }
                (Ok(w), Ok(g)) => failures.push(format!("n={n} {}: {} vs {} boundaries", b.label(), g.len(), w.len())),
                (Err(e), _) | (_, Err(e)) => failures.push(format!("n={n} {}: {e}", b.label())),
            }
        }
    }
    if !(worst < 1e-7) {
        failures.push(format!("max error {worst:.1e}"));
    }
    if failures.is_empty() {
        (true, format!("{count} branches, max error {worst:.1e}"))
    } else {
        (false, failures.join("; "))
    }
}

fn period_exactness() -> Outcome {
    let map = f2d();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 3..=6 {
        for b in branches(n).expect("periods 3..6 have branches") {
            let mut done = 0;
            let mut tries = 0;
            while done < 50 && tries < 500 {
                tries += 1;
                let p = b.point_real(rng.random_range(-5.0..5.0));
                match map.detect_period(&p, 8, 1e-9) {
                    // orbit through a pole: resample
                    Err(_) => continue,
                    Ok(Some(k)) if k == n as usize => done += 1,
                    Ok(other) => {
                        failures.push(format!("n={n} {}: period {other:?}", b.label()));
                        done += 1;
                    }
                }
            }
            checked += done;
        }
    }
    let mut periodic = 0;
    for _ in 0..1000 {
        let p = PointD::real(&[rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]);
        if let Ok(Some(_)) = map.detect_period(&p, 8, 1e-6) {
            periodic += 1;
        }
    }
    if periodic > 0 {
        failures.push(format!("{periodic} generic points reported periodic"));
    }
    if failures.is_empty() {
        (true, format!("{checked} on-branch points have exact period; 1000 generic points aperiodic up to 8"))
    } else {
        (false, failures.join("; "))
    }
}

fn lotka_volterra() -> Outcome {
    let f = f3d();
    let mut failures = Vec::new();
    let mut worst_s: f64 = 0.0;
    let mut not_closed = 0;
    let mut points = 0;
    for i in 0..50 {
        let x = -3.0 + 0.13 * i as f64;
        let r = -4.0 + 0.17 * i as f64;
        for sign in [Sign::Plus, Sign::Minus] {
            let Ok(p) = lv_period2_param(x, r, sign) else { continue };
            points += 1;
            match f.invariant_values(&p.point) {
                Ok(v) => worst_s = worst_s.max((v[1] + 1.0).norm()),
                Err(_) => worst_s = f64::INFINITY,
            }
            if !matches!(f.detect_period(&p.point, 4, 1e-9), Ok(Some(2))) {
                not_closed += 1;
            }
        }
    }
    if !(worst_s < 1e-10) {
        failures.push(format!("s deviates by {worst_s:.1e}"));
    }
    if not_closed > 0 {
        failures.push(format!("{not_closed} of {points} points do not close in 2 steps"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst_inv: f64 = 0.0;
    for _ in 0..200 {
        let v = ExtendedComplex::real(rng.random_range(-10.0..10.0));
        worst_inv = worst_inv.max(lv_recurrence(lv_recurrence(v)).chordal(&v));
    }
    let fixed = [0.0, 2.0].iter().all(|&x| {
        let v = ExtendedComplex::real(x);
        lv_recurrence(v).chordal(&v) < 1e-10
    });
    if !(worst_inv < 1e-10) || !fixed {
        failures.push(format!("involution error {worst_inv:.1e}, fixed points ok: {fixed}"));
    }

    // r = -1 is indeterminate and r = 0 reducible; both are skipped
    let mut worst_b: f64 = 0.0;
    let mut levels = 0;
    for r in -5..=5 {
        if r == -1 || r == 0 {
            continue;
        }
        for sign in [Sign::Plus, Sign::Minus] {
            match lv_boundaries_empirical(r as f64, sign, 2048) {
                Ok(b) if b.len() == 3 && b[2].is_infinite() => {
                    worst_b = worst_b.max((b[0] - 0.0).abs()).max((b[1] - 1.0).abs());
                }
                Ok(b) => failures.push(format!("r={r} {}: {b:?}", sign.symbol())),
                Err(e) => failures.push(format!("r={r}: {e}")),
            }
        }
        levels += 1;
    }
    if !(worst_b < 1e-6) {
        failures.push(format!("boundary error {worst_b:.1e}"));
    }
    if failures.is_empty() {
        (
            true,
            format!(
                "{points} points: |s+1| <= {worst_s:.1e}, period 2; involution error {worst_inv:.1e}; \
                 boundaries {{0, 1, inf}} on {levels} levels (r = -1, 0 excluded) within {worst_b:.1e}"
            ),
        )
    } else {
        (false, failures.join("; "))
    }
}

fn exclusion() -> Outcome {
    let mut failures = Vec::new();
    let bound = period2_exclusion(1000.0, 400, 720);
    if !(bound.grid_min > 0.0 && bound.grid_min >= bound.analytic_min * (1.0 - 1e-9)) {
        failures.push(format!("grid minimum {:.3e} below {:.3e}", bound.grid_min, bound.analytic_min));
    }
    // |s + 1| against the closed form 2/|1 - sqrt r|
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..2000 {
        let r = Complex64::from_polar(rng.random_range(0.0..1000.0), rng.random_range(-PI..PI));
        if let ExtendedComplex::Finite(s) = eigen(r).s {
            let a = (s + 1.0).norm();
            worst = worst.max((a - s_plus_one(r)).abs() / a);
        }
    }
    if !(worst < 1e-9) {
        failures.push(format!("|s+1| identity error {worst:.1e}"));
    }
    // the branch itself cannot be formed, so there is nothing to decompose
    let msg = match IvppBranch2D::new(2, 1) {
        Err(e) => e.to_string(),
        Ok(_) => String::new(),
    };
    if !msg.contains("period 2 has no IVPP") {
        failures.push("period 2 decomposition did not fail".into());
    }
    if failures.is_empty() {
        (
            true,
            format!(
                "min |s+1| on |r| <= 1e3 is {:.4e} (bound {:.4e}); period 2 rejected",
                bound.grid_min, bound.analytic_min
            ),
        )
    } else {
        (false, failures.join("; "))
    }
}

fn tiling_raster(exec: Execution) -> Outcome {
    let b = IvppBranch2D::new(3, 1).expect("period 3 has branch m = 1");
    let d = match decompose(&b, Method::Analytic) {
        Ok(d) => d,
        Err(e) => return (false, e.to_string()),
    };
    let mut spec = RasterSpec::new(Window::square(4.0), 800, 800);
    spec.exec = exec;
    let (raster, report) = tiling_2d(&f2d(), &[(b, d)], &spec);
    let classes = raster.component_classes();
    let pass = classes.len() == 3 && report.fraction() >= 0.999;
    (
        pass,
        format!(
            "{} classes on {} cells; successor property on {}/{} ({:.4}), {} at poles",
            classes.len(),
            raster.classified(),
            report.agreeing,
            report.checked,
            report.fraction(),
            report.poles
        ),
    )
}

//! Acceptance suite: one PASS/FAIL line per criterion, then a non-zero exit
//! if any criterion failed.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sphere_degree::constructors::{build_alpha, degree_table, power_pair};
use sphere_degree::degree::{degree, pl_degree_at_level, winding_number, DegreeOptions, SphereMap};
use sphere_degree::fields::{norm, FnField, Monomial, PolyField, Sign, VectorField};
use sphere_degree::index::{check_lemma21, index_at, verify_homotopy_nonvanishing};
use sphere_degree::mesh::max_level;
use sphere_degree::morse::{bundled_scenarios, morse_check, MorseOptions};

const DEGREE_BUDGET: Duration = Duration::from_secs(60);
const MORSE_BUDGET: Duration = Duration::from_secs(30);
const HOMOTOPY_RADIUS: f64 = 0.1;
const HOMOTOPY_FLOOR: f64 = 1e-3;
const CANCELLATION_CEILING: f64 = 1e-6;
const HOMOTOPY_GRID: usize = 20;
const HOMOTOPY_LEVEL: u32 = 4;
const RANDOM_LINEAR_FIELDS: usize = 30;
const RANDOM_TRIG_MAPS: usize = 50;
const STABILITY_SEEDS: u64 = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("degree realization", degree_realization),
        ("suspension sign relations", suspension_signs),
        ("homotopy non-vanishing", homotopy),
        ("Morse index formula", morse_formula),
        ("doubling identity", doubling),
        ("engine self-consistency", self_consistency),
        ("CLI determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: criteria {failed:?} failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}

fn degree_realization() -> Outcome {
    let start = Instant::now();
    let opts = DegreeOptions::default();
    let mut rows = 0;
    for (n, bound) in [(1usize, 6i64), (2, 4), (3, 3)] {
        match degree_table(n, -bound, bound, &opts) {
            Ok(table) => {
                // the table covers every dimension up to n
                let table: Vec<_> = table.into_iter().filter(|r| r.n == n).collect();
                if let Some(r) = table.iter().find(|r| r.degree != r.m) {
                    return outcome(false, format!("n={} m={} gave {}", r.n, r.m, r.degree));
                }
                let expected_method = if n == 1 { "pl+winding" } else { "pl" };
                if table.iter().any(|r| r.method != expected_method) {
                    return outcome(false, format!("n={n}: unexpected confirmation method"));
                }
                rows += table.len();
            }
            Err(e) => return outcome(false, format!("n={n}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        rows == 13 + 9 + 7 && elapsed < DEGREE_BUDGET,
        format!("{rows} rows, every degree = m, {:.1}s (budget {}s)", elapsed.as_secs_f64(), DEGREE_BUDGET.as_secs()),
    )
}

fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * cofactor_det(&minor)
        })
        .sum()
}

fn suspension_signs() -> Outcome {
    let opts = DegreeOptions::default();
    for m in 0..=4u32 {
        for sign in [Sign::Plus, Sign::Minus] {
            let r = match check_lemma21(&power_pair(m), sign, 0.5, &opts) {
                Ok(r) => r,
                Err(e) => return outcome(false, format!("m={m} sign={}: {e}", sign.as_i64())),
            };
            let expected = sign.as_i64() * m as i64;
            if r.base_index != m as i64 || r.suspended_index != expected || !r.relation_holds {
                return outcome(
                    false,
                    format!("m={m} sign={}: base {} suspended {}", sign.as_i64(), r.base_index, r.suspended_index),
                );
            }
        }
    }

    // random integer matrices; the ones whose condition number needs a mesh
    // finer than the level cap are redrawn
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < RANDOM_LINEAR_FIELDS {
        let d = 2 + checked % 2;
        let a: Vec<Vec<f64>> =
            (0..d).map(|_| (0..d).map(|_| rng.random_range(-3i32..=3) as f64).collect()).collect();
        let det = cofactor_det(&a);
        let sv = sampled_condition(&a);
        if det == 0.0 || sv > 6.0 {
            continue;
        }
        let field = PolyField::linear(&a).expect("square matrix");
        match index_at(&field, &vec![0.0; d], 1.0, &opts) {
            Ok(r) if r.index == det.signum() as i64 => checked += 1,
            Ok(r) => return outcome(false, format!("{a:?}: index {} but det {det}", r.index)),
            Err(e) => return outcome(false, format!("{a:?}: {e}")),
        }
    }
    outcome(true, format!("(P_m,Q_m) m=0..4 both signs; {checked} random integer matrices match sign(det)"))
}

/// max ‖Ax‖ / min ‖Ax‖ over a dense sample of unit vectors, a lower bound
/// on the condition number that is enough to screen out near-singular draws.
fn sampled_condition(a: &[Vec<f64>]) -> f64 {
    let d = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let steps = 200;
    for i in 0..steps {
        for j in 0..if d == 2 { 1 } else { steps } {
            let (t, p) = (2.0 * PI * i as f64 / steps as f64, PI * (j as f64 + 0.5) / steps as f64);
            let x = if d == 2 { vec![t.cos(), t.sin()] } else { vec![p.sin() * t.cos(), p.sin() * t.sin(), p.cos()] };
            let ax: Vec<f64> = a.iter().map(|row| row.iter().zip(&x).map(|(r, v)| r * v).sum()).collect();
            let len = norm(&ax);
            lo = lo.min(len);
            hi = hi.max(len);
        }
    }
    hi / lo
}

/// `(P_m, Q_m, s·x₃³)`: the base field with cubic normal damping.
fn damped(m: u32, sign: Sign) -> PolyField {
    let pair = power_pair(m);
    let lift = |c: &[Monomial]| c.iter().map(|t| Monomial::new(t.coeff, vec![t.exponents[0], t.exponents[1], 0])).collect();
    PolyField::new(
        3,
        vec![
            lift(&pair.components()[0]),
            lift(&pair.components()[1]),
            vec![Monomial::new(sign.value(), vec![0, 0, 3])],
        ],
    )
    .expect("well formed")
}

fn homotopy() -> Outcome {
    let origin = [0.0; 3];
    let mut lines = Vec::new();
    let mut pass = true;
    for m in 0..=4u32 {
        for sign in [Sign::Plus, Sign::Minus] {
            let v = damped(m, sign);
            let w = power_pair(m).suspend(sign);
            let r = verify_homotopy_nonvanishing(&v, &w, &origin, HOMOTOPY_RADIUS, HOMOTOPY_GRID, HOMOTOPY_LEVEL)
                .expect("same dimensions");
            let ok = r.min_norm > HOMOTOPY_FLOOR;
            pass &= ok;
            lines.push(format!("m={m},s={:+}:{:.3e}{}", sign.as_i64(), r.min_norm, if ok { "" } else { "!" }));
        }
    }
    let x = PolyField::identity(2);
    let saddle = PolyField::linear(&[vec![1.0, 0.0], vec![0.0, -1.0]]).expect("square");
    let c = verify_homotopy_nonvanishing(&x, &saddle, &[0.0, 0.0], HOMOTOPY_RADIUS, HOMOTOPY_GRID, HOMOTOPY_LEVEL)
        .expect("same dimensions");
    let at_cancellation = (c.witness_t - 0.5).abs() < 1e-12 && c.witness_point[0].abs() < 1e-12;
    let counter_ok = c.min_norm < CANCELLATION_CEILING && at_cancellation;
    pass &= counter_ok;
    outcome(
        pass,
        format!(
            "min-norm at r={HOMOTOPY_RADIUS} (need > {HOMOTOPY_FLOOR:e}): [{}]; counterexample {:.1e} at t={} on the x2-axis: {}",
            lines.join(" "),
            c.min_norm,
            c.witness_t,
            if counter_ok { "ok" } else { "not found" }
        ),
    )
}

fn morse_formula() -> Outcome {
    let start = Instant::now();
    let opts = MorseOptions { doubling: false, ..MorseOptions::default() };
    let scenarios = bundled_scenarios();
    let mut parts = Vec::new();
    let mut pass = scenarios.len() == 8;
    for s in &scenarios {
        let name = s.name.clone().unwrap_or_default();
        match morse_check(s, &opts) {
            Ok(r) => {
                pass &= r.formula_holds;
                parts.push(format!("{name} {}+{}={}", r.ind_v, r.ind_dminus_v, r.chi_m));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} error: {e}"));
            }
        }
    }
    let saddle_ok = scenarios
        .iter()
        .find(|s| s.name.as_deref() == Some("ball_saddle"))
        .and_then(|s| morse_check(s, &opts).ok())
        .is_some_and(|r| r.ind_v == -1 && r.ind_dminus_v == 2);
    let elapsed = start.elapsed();
    pass &= saddle_ok && elapsed < MORSE_BUDGET;
    outcome(pass, format!("{}; {:.1}s (budget {}s)", parts.join(", "), elapsed.as_secs_f64(), MORSE_BUDGET.as_secs()))
}

fn doubling() -> Outcome {
    let mut pass = true;
    let mut spot = 0;
    let mut parts = Vec::new();
    for s in bundled_scenarios() {
        let name = s.name.clone().unwrap_or_default();
        match morse_check(&s, &MorseOptions::default()) {
            Ok(r) => {
                let d = r.doubling_check.expect("doubling requested");
                pass &= d.holds;
                spot += d.spot_checks.iter().filter(|c| c.measured == c.predicted).count();
                pass &= d.spot_checks.iter().all(|c| c.measured == c.predicted);
                parts.push(format!("{name} {}={}", d.doubled_sum, d.target));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} error: {e}"));
            }
        }
    }
    pass &= spot >= 1;
    outcome(pass, format!("{}; {spot} in-situ spot checks matched", parts.join(", ")))
}

/// `θ ↦ (Σ a_k cos kθ + b_k sin kθ, Σ c_k cos kθ + d_k sin kθ)`, `k ≤ 2`,
/// extended radially to R² \ {0}.
fn trig_map(coeffs: [[f64; 5]; 2]) -> impl VectorField {
    FnField::new(2, 2, move |x: &[f64]| {
        let t = x[1].atan2(x[0]);
        let basis = [1.0, t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()];
        coeffs.iter().map(|c| c.iter().zip(&basis).map(|(a, b)| a * b).sum()).collect()
    })
}

fn trig_min_norm(field: &dyn VectorField) -> f64 {
    (0..4096)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 4096.0;
            norm(&field.eval_unchecked(&[t.cos(), t.sin()]))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Degree must agree across seeds and across every mesh level from the one
/// first accepted up to the cap.
fn stable(map: &SphereMap<'_>, expected: i64) -> Result<(), String> {
    let n = map.n();
    for seed in 0..STABILITY_SEEDS {
        let r = pl_degree_at_level(map, 1, &DegreeOptions::with_seed(seed)).map_err(|e| e.to_string())?;
        if r.degree != expected {
            return Err(format!("seed {seed}: {} vs {expected}", r.degree));
        }
        if seed == 0 {
            for level in r.mesh_level + 1..=max_level(n) {
                let finer = pl_degree_at_level(map, level, &DegreeOptions::default()).map_err(|e| e.to_string())?;
                if finer.degree != expected {
                    return Err(format!("level {level}: {} vs {expected}", finer.degree));
                }
            }
        }
    }
    Ok(())
}

fn self_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut degrees = Vec::new();
    let origin = [0.0, 0.0];
    while degrees.len() < RANDOM_TRIG_MAPS {
        let mut coeffs = [[0.0; 5]; 2];
        for row in coeffs.iter_mut() {
            for c in row.iter_mut() {
                *c = rng.random_range(-2.0..2.0);
            }
        }
        let field = trig_map(coeffs);
        if trig_min_norm(&field) < 0.3 {
            continue;
        }
        let map = SphereMap::new(&field, &origin, 1.0).expect("valid map");
        let report = match degree(&map, &DegreeOptions::default()) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("trig map {}: {e}", degrees.len())),
        };
        let w = winding_number(&map, 64).expect("nonvanishing");
        if w.degree != report.degree {
            return outcome(false, format!("trig map {}: winding {} vs PL {}", degrees.len(), w.degree, report.degree));
        }
        if let Err(e) = stable(&map, report.degree) {
            return outcome(false, format!("trig map {}: {e}", degrees.len()));
        }
        degrees.push(report.degree);
    }
    for (n, m) in [(2usize, -2i64), (2, 3), (3, -1), (3, 2)] {
        let alpha = build_alpha(n, m).expect("n >= 1");
        let center = vec![0.0; n + 1];
        let map = SphereMap::new(&alpha.field, &center, 1.0).expect("valid map");
        if let Err(e) = stable(&map, m) {
            return outcome(false, format!("alpha n={n} m={m}: {e}"));
        }
    }
    let mut hist = std::collections::BTreeMap::new();
    for d in &degrees {
        *hist.entry(*d).or_insert(0) += 1;
    }
    outcome(
        true,
        format!(
            "{RANDOM_TRIG_MAPS} trig maps (degrees {hist:?}) agree winding/PL, stable over {STABILITY_SEEDS} seeds and all finer levels; 4 sphere maps stable"
        ),
    )
}

fn spheredeg(args: &[&str]) -> (Vec<u8>, Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_spheredeg")).args(args).output().expect("binary runs");
    (out.stdout, out.stderr, out.status.code())
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("spheredeg-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let field = dir.join("alpha.json");
    std::fs::write(&field, build_alpha(2, 3).expect("n >= 1").field.to_json()).expect("write field");
    let field = field.to_str().expect("utf-8 path").to_string();
    let base = dir.join("power2.json");
    std::fs::write(&base, power_pair(2).to_json()).expect("write field");
    let base = base.to_str().expect("utf-8 path").to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["--seed", "7", "degree", "--field", &field],
        vec!["--seed", "7", "index", "--field", &field, "--zero", "0,0,0"],
        vec!["--seed", "7", "morse-check", "--scenario", "disk_power2"],
        vec!["--seed", "7", "degree-table", "--n-max", "2", "--m-min", "-2", "--m-max", "2"],
        vec!["--seed", "7", "lemma21", "--field", &base, "--sign", "-1"],
        vec!["--seed", "7", "suspend", "--field", &base, "--sign", "1"],
    ];
    let mut identical = 0;
    let mut problems = Vec::new();
    for args in &runs {
        let (a, ea, ca) = spheredeg(args);
        let (b, eb, cb) = spheredeg(args);
        if a == b && ea == eb && ca == cb && ca == Some(0) {
            identical += 1;
        } else {
            problems.push(args[2].to_string());
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        problems.is_empty(),
        format!("{identical}/{} commands byte-identical across two runs with --seed 7 {problems:?}", runs.len()),
    )
}

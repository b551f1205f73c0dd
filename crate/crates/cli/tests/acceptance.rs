//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the test
//! harness so the lines always reach the output; exits nonzero if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scalecalc::expr::{parse_expr, Expr, Point, Var};
use scalecalc::holder::{weierstrass, Smooth, WeierstrassParams};
use scalecalc::identities::{
    barrow_residual, leibniz_residual, parts_residual, smooth_consistency, taylor_order_fit, PassRule,
};
use scalecalc::scale_ops::{blowup_slope, estimate_holder_exponent, hscale_derivative, DyadicScales};
use scalecalc::variational::{
    gateaux_derivative, random_variation, residual_report, solve_free_t, Candidate, Regime, Solution,
    VariationalProblem,
};
use scalecalc::{Error, Grid, SampledFn};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

const H: f64 = 1.0 / 1024.0;

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 0.5f64.powi(k)).collect()
}

fn triadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 3f64.powi(-k)).collect()
}

fn w_half_three() -> impl Fn(f64) -> f64 + Copy + Send + Sync {
    weierstrass(WeierstrassParams::new(0.5, 3.0, 30).unwrap())
}

fn smooth_consistency_orders() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [Smooth::Sin, Smooth::Exp, Smooth::Poly(3)] {
        let steps = dyadic(6, 12);
        let r = smooth_consistency(s.func(), s.deriv(), 0.0, 1.0, &steps).unwrap();
        let order = r.fitted_order.unwrap_or(f64::NAN);
        let c = r.residual_per_h.iter().map(|&(h, e)| e / h).fold(0.0, f64::max);
        ok &= order >= 0.95;
        parts.push(format!("{s} order {order:.3} C {c:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    (ok, format!("{}; {secs:.2} s", parts.join(", ")))
}

fn algebraic_pins() -> Outcome {
    let mut worst_sq: f64 = 0.0;
    for h in [0.1, 1.0 / 64.0, H] {
        let g = Grid::new(0.0, 1.0, h, 1).unwrap();
        let d = hscale_derivative(&SampledFn::sample(|t: f64| t * t, &g).unwrap()).unwrap();
        for k in 0..=g.cells() {
            let t = g.node(g.first_core() + k);
            worst_sq = worst_sq.max((d.at_core(k) - Complex64::new(2.0 * t, h)).norm());
        }
    }
    let l = leibniz_residual(
        |t| t,
        |t| t,
        0.0,
        1.0,
        &[0.1, 0.05, 0.025, 1.0 / 64.0],
        PassRule::smooth(),
    )
    .unwrap();
    let worst_l = l.residual_per_h.iter().map(|&(h, r)| (r - h).abs()).fold(0.0, f64::max);
    let b = barrow_residual(|t| t * t, 0.0, 1.0, &[0.1, 0.05], PassRule::smooth()).unwrap();
    let gap_b = (b.residual_per_h[0].1 - Complex64::new(-0.1, 0.1).norm()).abs();
    let ok = worst_sq <= 1e-13 && worst_l <= 1e-13 && gap_b <= 1e-12;
    (
        ok,
        format!("□(t²) gap {worst_sq:.1e}, Leibniz−h gap {worst_l:.1e}, Barrow gap {gap_b:.1e}"),
    )
}

fn identity_decay() -> Outcome {
    let start = Instant::now();
    let steps = dyadic(6, 10);
    let mut ok = true;
    let mut worst_order = f64::INFINITY;
    let pairs = [
        (Smooth::Sin, Smooth::Cos),
        (Smooth::Exp, Smooth::Poly(3)),
        (Smooth::Poly(3), Smooth::Sin),
        (Smooth::Cos, Smooth::Exp),
    ];
    for (f, g) in pairs {
        let reports = [
            leibniz_residual(f.func(), g.func(), 0.0, 1.0, &steps, PassRule::smooth()).unwrap(),
            barrow_residual(f.func(), 0.0, 1.0, &steps, PassRule::smooth()).unwrap(),
            parts_residual(f.func(), g.func(), 0.0, 1.0, &steps, PassRule::smooth()).unwrap(),
        ];
        for r in &reports {
            let order = r.fitted_order.unwrap_or(f64::NAN);
            worst_order = worst_order.min(order);
            ok &= r.strictly_decreasing() && order >= 0.9 && r.pass;
        }
    }
    // A base-3 lacunary series decays monotonically along powers of three.
    let w = w_half_three();
    let rough = triadic(4, 8);
    let rough_reports = [
        (
            "leibniz",
            leibniz_residual(w, w, 0.0, 1.0, &rough, PassRule::holder()).unwrap(),
        ),
        (
            "barrow",
            barrow_residual(w, 0.0, 1.0, &rough, PassRule::holder()).unwrap(),
        ),
        (
            "parts",
            parts_residual(w, w, 0.0, 1.0, &rough, PassRule::holder()).unwrap(),
        ),
    ];
    let mut rough_text = Vec::new();
    for (name, r) in &rough_reports {
        ok &= r.strictly_decreasing();
        rough_text.push(format!(
            "{name} {}",
            if r.strictly_decreasing() {
                "decreasing"
            } else {
                "NOT decreasing"
            }
        ));
    }
    let mut slopes = Vec::new();
    for (f, a) in [
        (Smooth::Exp, 0.0),
        (Smooth::Sin, 0.5),
        (Smooth::Cos, 0.5),
        (Smooth::Poly(3), 0.5),
    ] {
        let r = taylor_order_fit(f.func(), a, &dyadic(2, 6)).unwrap();
        let p = r.fitted_order.unwrap_or(f64::NAN);
        ok &= (1.8..=2.2).contains(&p);
        slopes.push(format!("{f}@{a} {p:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    (
        ok,
        format!(
            "smooth min order {worst_order:.3}; W(1/2,3) on 3⁻⁴..3⁻⁸: {}; Taylor {}; {secs:.2} s",
            rough_text.join(", "),
            slopes.join(", ")
        ),
    )
}

fn problem(src: &str, order: usize, regime: Regime) -> VariationalProblem {
    VariationalProblem::from_source(src, order, (0.0, 2.0), regime, H).unwrap()
}

fn regime_a(h: f64) -> VariationalProblem {
    VariationalProblem::from_source("0.5*v^2 + y", 1, (0.0, 2.0), Regime::A { y_a: 0.5 }, h)
        .unwrap()
        .with_t_scan(0.1, 1.9)
        .unwrap()
}

fn regime_c() -> VariationalProblem {
    problem("0.5*v^2 + 1", 1, Regime::C { y_a: 0.0, y_t: 1.0 })
}

fn regime_d() -> VariationalProblem {
    problem("0.5*v^2 + 1", 1, Regime::d_from_source(0.0, "2 - t").unwrap())
}

fn higher(src: &str) -> VariationalProblem {
    let r = Regime::HigherOrder {
        y_a: 0.125,
        derivs_a: vec![Complex64::new(0.0, 0.0)],
    };
    problem(src, 2, r).with_t_scan(0.2, 1.8).unwrap()
}

/// Sup-norm gap to `exact` over the nodes of `[a, T]`.
fn defect(s: &Solution, exact: impl Fn(f64) -> f64) -> f64 {
    let y = &s.candidate.y;
    let g = y.grid();
    (0..=g.cells())
        .filter(|&k| g.node(g.first_core() + k) <= s.report.t_end + 1e-12)
        .map(|k| (y.at_core(k) - exact(g.node(g.first_core() + k))).norm())
        .fold(0.0, f64::max)
}

fn roots(p: &VariationalProblem) -> Result<Vec<Solution>, Error> {
    solve_free_t(p).map(|s| s.roots)
}

fn single(p: &VariationalProblem) -> Result<Solution, String> {
    match roots(p) {
        Ok(mut r) if r.len() == 1 => Ok(r.remove(0)),
        Ok(r) => Err(format!("{} roots", r.len())),
        Err(e) => Err(e.to_string()),
    }
}

fn golden_a() -> Outcome {
    let run = |h: f64| -> Result<(Vec<f64>, f64), String> {
        let start = Instant::now();
        let s = single(&regime_a(h))?;
        let secs = start.elapsed().as_secs_f64();
        let mut d = vec![(s.report.t_end - 1.0).abs(), defect(&s, |t| 0.5 * (t - 1.0).powi(2))];
        d.extend(s.report.natural_conditions.iter().map(|c| c.norm()));
        Ok((d, secs))
    };
    let ((coarse, secs), (fine, _)) = match (run(H), run(H / 2.0)) {
        (Ok(c), Ok(f)) => (c, f),
        (Err(e), _) | (_, Err(e)) => return (false, e),
    };
    let within = coarse.iter().all(|&d| d <= 1e-3);
    let halves = coarse.iter().zip(&fine).all(|(c, f)| *f <= 0.5 * c || *f <= 1e-9);
    let ok = within && halves && secs < 10.0;
    let fmt = |v: &[f64]| v.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(" ");
    (
        ok,
        format!(
            "|T−1|, defect, y(a), dL/dv(T), L(T) at h: {} | at h/2: {}; {secs:.2} s",
            fmt(&coarse),
            fmt(&fine)
        ),
    )
}

fn golden_c() -> Outcome {
    match single(&regime_c()) {
        Ok(s) => {
            let e = (s.report.t_end - 0.5f64.sqrt()).abs();
            (e <= 1e-3, format!("T = {:.12}, |T − 1/√2| = {e:.1e}", s.report.t_end))
        }
        Err(e) => (false, e),
    }
}

fn golden_d() -> Outcome {
    match single(&regime_d()) {
        Ok(s) => {
            let t = s.report.t_end;
            let e = (t - 2.0 / 3f64.sqrt()).abs();
            let slope = hscale_derivative(&s.candidate.y).unwrap().interp_linear(t).unwrap();
            let es = (slope - Complex64::new(3f64.sqrt() - 1.0, 0.0)).norm();
            (
                e <= 1e-3 && es <= 5e-3,
                format!("|T − 2/√3| = {e:.1e}, |□y(T) − (√3 − 1)| = {es:.1e}"),
            )
        }
        Err(e) => (false, e),
    }
}

fn golden_higher() -> Outcome {
    let start = Instant::now();
    let quartic = |t: f64| -t.powi(4) / 24.0 + t.powi(3) / 6.0 - t * t / 4.0 + 0.125;
    match single(&higher("0.5*v2^2 + y")) {
        Ok(s) => {
            let secs = start.elapsed().as_secs_f64();
            let e = (s.report.t_end - 1.0).abs();
            let d = defect(&s, quartic);
            (
                e <= 5e-3 && d <= 5e-3 && secs < 30.0,
                format!("|T−1| = {e:.1e}, defect {d:.1e}; {secs:.2} s"),
            )
        }
        Err(e) => (false, e),
    }
}

fn first_variation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = true;
    let mut text = Vec::new();
    for p in [regime_a(H), regime_c(), regime_d(), higher("0.5*v2^2 + y")] {
        let name = p.regime().name();
        let s = match single(&p) {
            Ok(s) => s,
            Err(e) => return (false, format!("{name}: {e}")),
        };
        let mut at_root: f64 = 0.0;
        for _ in 0..20 {
            let (eta, delta) = random_variation(&p, &s.candidate, &mut rng).unwrap();
            at_root = at_root.max(gateaux_derivative(&p, &s.candidate, &eta, delta).unwrap().magnitude());
        }
        let t = s.report.t_end;
        let bump = SampledFn::sample(
            |x: f64| 0.1 * (std::f64::consts::PI * x / t).sin(),
            s.candidate.y.grid(),
        )
        .unwrap();
        let off = Candidate::new(s.candidate.y.add(&bump).unwrap(), t);
        residual_report(&p, &off).unwrap();
        let mut perturbed: f64 = 0.0;
        for _ in 0..20 {
            let (eta, delta) = random_variation(&p, &off, &mut rng).unwrap();
            perturbed = perturbed.max(gateaux_derivative(&p, &off, &eta, delta).unwrap().magnitude());
        }
        ok &= at_root <= 1e-3 && perturbed > 1e-2;
        text.push(format!("{name} max {at_root:.1e} / perturbed {perturbed:.1e}"));
    }
    (ok, text.join(", "))
}

fn holder_estimation() -> Outcome {
    let w = w_half_three();
    let alpha = 2f64.ln() / 3f64.ln();
    let est = estimate_holder_exponent(w, 0.0, 1.0, DyadicScales::default()).unwrap();
    let slope = blowup_slope(w, 0.0, 1.0, &triadic(3, 8)).unwrap();
    let (ea, es) = ((est.alpha_hat - alpha).abs(), (slope - (alpha - 1.0)).abs());
    (
        ea <= 0.05 && es <= 0.15,
        format!(
            "α̂ = {:.4} (ln2/ln3 = {alpha:.4}), blow-up slope {slope:.4} vs α−1 = {:.4}",
            est.alpha_hat,
            alpha - 1.0
        ),
    )
}

fn negative_controls() -> Outcome {
    let c = roots(&problem("0.5*v^2", 1, Regime::C { y_a: 0.0, y_t: 1.0 }));
    let flat = roots(&higher("0.5*v2^2"));
    let ok_c = matches!(c, Err(Error::NoRoot { .. }));
    let ok_flat = matches!(flat, Err(Error::IndeterminateT { .. }));
    let show = |r: &Result<Vec<Solution>, Error>| match r {
        Ok(v) => format!("{} roots", v.len()),
        Err(e) => e.to_string(),
    };
    (ok_c && ok_flat, format!("C: {}; higher: {}", show(&c), show(&flat)))
}

/// Random Lagrangian source over `t, y, v, v2` whose value stays finite on
/// `[-1, 1]`: denominators and real powers are shifted away from zero.
fn random_source(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => "t".into(),
            1 => "y".into(),
            2 => "v".into(),
            3 => "v2".into(),
            _ => format!("{}", rng.gen_range(1..40) as f64 / 8.0),
        };
    }
    let mut sub = || random_source(rng, depth - 1);
    let (a, b) = (sub(), sub());
    match rng.gen_range(0..10) {
        0 => format!("{a} + {b}"),
        1 => format!("({a}) - ({b})"),
        2 => format!("({a})*({b})"),
        3 => format!("({a})/(2 + ({b})^2)"),
        4 => format!("({a})^{}", rng.gen_range(2..4)),
        5 => format!("(1.5 + ({a})^2)^0.5"),
        6 => format!("-({a})"),
        7 => format!("sin({a})"),
        8 => format!("cos({a})*exp(0.3*({b}))"),
        _ => format!("log(3 + ({a})^2)"),
    }
}

fn eval_at(e: &Expr, x: [f64; 4]) -> Complex64 {
    let v = [Complex64::new(x[2], 0.0), Complex64::new(x[3], 0.0)];
    e.eval(&Point {
        t: x[0],
        y: Complex64::new(x[1], 0.0),
        v: &v,
    })
    .unwrap()
}

fn parser_checks() -> (bool, String, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    let cases = 100;
    for _ in 0..cases {
        let src = random_source(&mut rng, 4);
        let e = match parse_expr(&src, 2) {
            Ok(e) => e,
            Err(err) => {
                failures.push(format!("{src}: {err}"));
                continue;
            }
        };
        let printed = e.to_string();
        let again = parse_expr(&printed, 2).map(|r| r.to_string());
        if again.as_deref() != Ok(printed.as_str()) {
            failures.push(format!("round trip {src} -> {printed} -> {again:?}"));
            continue;
        }
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let reparsed = parse_expr(&printed, 2).unwrap();
        let (z0, z1) = (eval_at(&e, x), eval_at(&reparsed, x));
        if (z0 - z1).norm() > 1e-12 * z0.norm().max(1.0) {
            failures.push(format!("value {src}: {z0} vs {z1}"));
        }
        for (slot, var) in [(1, Var::Y), (2, Var::V(1)), (3, Var::V(2))] {
            let exact = eval_at(&e.diff(var), x);
            let s = 1e-3;
            let shifted = |k: f64| {
                let mut p = x;
                p[slot] += k * s;
                eval_at(&e, p)
            };
            let fd = (shifted(-2.0) - shifted(2.0) + (shifted(1.0) - shifted(-1.0)) * 8.0) / (12.0 * s);
            if (exact - fd).norm() > 1e-5 * exact.norm().max(1.0) {
                failures.push(format!("d/d{var} {src}: {exact} vs {fd}"));
            }
        }
    }
    let ok = failures.is_empty();
    let detail = failures.into_iter().next().unwrap_or_default();
    (ok, detail, cases)
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn exit_code(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_scalecalc"))
        .arg("--quiet")
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn cli_contract() -> (bool, String) {
    let dir = std::env::temp_dir().join(format!("scalecalc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = |name: &str| workspace().join("problems").join(name).to_string_lossy().into_owned();
    let csv = |name: &str, h: f64, last: i64| {
        let path = dir.join(name);
        let mut text = String::from("t,re_y,im_y\n");
        for j in -2..=last {
            text.push_str(&format!("{},0.5,0\n", j as f64 * h));
        }
        std::fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    };
    let golden = p("golden_a.json");
    let solved = dir.join("golden");
    let mut checks: Vec<(&str, i32, i32)> = vec![
        ("solve golden", 0, exit_code(&["solve", &golden], &solved)),
        (
            "solve no-root",
            2,
            exit_code(&["solve", &p("negative_c_noroot.json")], &dir),
        ),
        (
            "solve flat",
            3,
            exit_code(&["solve", &p("negative_higher_flat.json")], &dir),
        ),
        ("solve malformed", 1, exit_code(&["solve", &p("malformed.json")], &dir)),
    ];
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(solved.join("report.json")).unwrap_or_default())
            .unwrap_or_default();
    let traj = solved.join("trajectory_1.csv").to_string_lossy().into_owned();
    let t_end = format!("{:.17e}", report["roots"][0]["T"].as_f64().unwrap_or(f64::NAN));
    checks.extend([
        (
            "verify golden",
            0,
            exit_code(&["verify", &golden, &traj, "--t-end", &t_end], &dir),
        ),
        (
            "verify constant",
            4,
            exit_code(&["verify", &golden, &csv("const.csv", H, 1026)], &dir),
        ),
        (
            "verify wrong h",
            1,
            exit_code(&["verify", &golden, &csv("coarse.csv", 2.0 * H, 514)], &dir),
        ),
        (
            "identities sin",
            0,
            exit_code(&["identities", "--function", "sin"], &dir),
        ),
        (
            "identities weierstrass",
            0,
            exit_code(&["identities", "--function", "weierstrass:0.5,3"], &dir),
        ),
        (
            "identities unknown",
            1,
            exit_code(&["identities", "--function", "tangent"], &dir),
        ),
        ("derive A", 0, exit_code(&["derive", &golden], &dir)),
        (
            "derive higher",
            0,
            exit_code(&["derive", &p("golden_higher.json")], &dir),
        ),
        (
            "derive malformed",
            1,
            exit_code(&["derive", &p("malformed.json")], &dir),
        ),
    ]);
    let _ = std::fs::remove_dir_all(&dir);
    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, want, got)| want != got)
        .map(|(name, want, got)| format!("{name}: want {want}, got {got}"))
        .collect();
    (
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} exit codes as expected", checks.len())
        } else {
            bad.join("; ")
        },
    )
}

fn parser_and_cli() -> Outcome {
    let (ok_p, detail, cases) = parser_checks();
    let (ok_c, cli) = cli_contract();
    let parser = if ok_p {
        format!("{cases} random expressions round-trip and match 4-point differences")
    } else {
        format!("parser failure: {detail}")
    };
    (ok_p && ok_c, format!("{parser}; {cli}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("smooth-limit consistency", smooth_consistency_orders),
        ("exact algebraic pins", algebraic_pins),
        ("identity decay", identity_decay),
        ("golden regime A", golden_a),
        ("golden regime C", golden_c),
        ("golden regime D", golden_d),
        ("golden higher order", golden_higher),
        ("first-variation oracle", first_variation_oracle),
        ("Hölder estimation", holder_estimation),
        ("negative controls", negative_controls),
        ("parser and exit codes", parser_and_cli),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        failed += usize::from(!ok);
        println!("[{}] {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, k + 1);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

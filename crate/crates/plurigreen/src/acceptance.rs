//! Built-in verification suite, one function per criterion.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plurigreen_core::bipoly::{sup_norm_bidisk, BiPoly, DEFAULT_RESOLUTION};
use plurigreen_core::classify::{classify, geometric_schedule, FamilySpec, Regime};
use plurigreen_core::cxgeom::{build_frame, canonicalize, CanonicalFrame, Complex2};
use plurigreen_core::green::{upper_bound_two_point, Certificate, GreenConfig, GreenContext, PolyLabel, SANDWICH_TOL};
use plurigreen_core::ideals::{ci_rescaled_generators, frame_to_standard, line_polys, line_product, q_generators};
use plurigreen_core::C64;

use crate::config::{GridRecord, SweepConfig};
use crate::harness::{run_sweep, Row, SweepReport};
use crate::output::csv_string;

pub const RESIDUAL_TOL: f64 = 1e-10;
pub const RANDOM_FRAMES: usize = 1000;
pub const GENERATOR_TIME_LIMIT: Duration = Duration::from_secs(5);
pub const VERIFY_TIME_LIMIT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {} {verdict} {}: {}", self.id, self.title, self.detail)
    }
}

fn result(id: u8, title: &'static str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        title,
        passed,
        detail,
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The three reference families: complete intersection with `m = -2`,
/// degenerate `delta = sqrt(eps)`, and the generic triple `a3 = (0, eps)`.
pub fn ci_family() -> FamilySpec {
    FamilySpec::power_law(0.5, 1.0, 1.0, 1.0)
}

pub fn degenerate_family() -> FamilySpec {
    FamilySpec::power_law(0.5, 1.0, 1.0, 0.5)
}

pub fn generic_family(schedule: &[f64]) -> FamilySpec {
    let rows = schedule
        .iter()
        .map(|&eps| {
            let t = canonicalize(Complex2::ZERO, Complex2::real(eps, 0.0), Complex2::real(0.0, eps))
                .expect("distinct points");
            (eps, t)
        })
        .collect();
    FamilySpec::SampleTable(rows)
}

pub fn grid_5x5() -> Vec<Complex2> {
    GridRecord {
        min: 0.2,
        max: 0.8,
        n: 5,
    }
    .points()
}

pub fn sweep_schedule() -> Vec<f64> {
    geometric_schedule(1e-1, 1e-5, 5)
}

pub fn sweep_configs(seed: u64) -> [(&'static str, SweepConfig); 3] {
    let schedule = sweep_schedule();
    let make = |family| {
        let mut cfg = SweepConfig::new(family, schedule.clone(), grid_5x5());
        cfg.seed = seed;
        cfg
    };
    [
        ("complete-intersection", make(ci_family())),
        ("degenerate", make(degenerate_family())),
        ("generic", make(generic_family(&schedule))),
    ]
}

fn random_unit(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Frame with `eps` in `[eps_lo, 0.3]`, `|rho| <= eps / 2` and
/// `|delta|` in `[1e-3, 1]`, all phases random.
pub fn random_frame(rng: &mut ChaCha8Rng, eps_lo: f64) -> CanonicalFrame {
    let eps = log_uniform(rng, eps_lo, 0.3);
    let rho = random_unit(rng) * eps * rng.gen_range(0.05..0.5);
    let delta = random_unit(rng) * log_uniform(rng, 1e-3, 1.0);
    CanonicalFrame::from_params(eps, rho, delta).expect("delta is nonzero")
}

/// Random unitary `2 x 2` matrix.
fn random_unitary(rng: &mut ChaCha8Rng) -> [[C64; 2]; 2] {
    let t = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
    let (a, b, g) = (random_unit(rng), random_unit(rng), random_unit(rng));
    let (ct, st) = (c(t.cos(), 0.0), c(t.sin(), 0.0));
    [[a * ct, -b.conj() * st * g], [b * st, a.conj() * ct * g]]
}

fn apply(u: [[C64; 2]; 2], z: Complex2) -> Complex2 {
    Complex2::new(u[0][0] * z.c1 + u[0][1] * z.c2, u[1][0] * z.c1 + u[1][1] * z.c2)
}

/// Largest vanishing residual of `Q1..Q3` and `l1..l3` at their points,
/// in frame coordinates and again in standard coordinates after a random
/// unitary change of basis.
fn generator_residual(frame: &CanonicalFrame, u: [[C64; 2]; 2]) -> plurigreen_core::Result<f64> {
    let check = |f: &CanonicalFrame, poles: [Complex2; 3], standard: bool| -> plurigreen_core::Result<f64> {
        let q = q_generators(f)?.generators;
        let l = line_polys(f)?;
        let conv = |p: &BiPoly| if standard { frame_to_standard(p, f) } else { p.clone() };
        let mut worst: f64 = 0.0;
        for p in &q {
            let p = conv(p);
            for a in poles {
                worst = worst.max(p.eval(a).norm());
            }
        }
        // l1 through a1, a2; l2 through a1, a3; l3 through a2, a3
        let on = [[0, 1], [0, 2], [1, 2]];
        for (p, idx) in l.iter().zip(on) {
            let p = conv(p);
            for i in idx {
                worst = worst.max(p.eval(poles[i]).norm());
            }
        }
        Ok(worst)
    };
    let direct = check(frame, frame.poles(), false)?;
    let [p, q, r] = frame.poles().map(|a| apply(u, a));
    let t = canonicalize(p, q, r)?;
    let rotated = build_frame(&t)?;
    Ok(direct.max(check(&rotated, t.points(), true)?))
}

pub fn criterion_1(seed: u64) -> CriterionResult {
    let title = "generator residuals on random frames";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..RANDOM_FRAMES {
        let frame = random_frame(&mut rng, 1e-6);
        let u = random_unitary(&mut rng);
        match generator_residual(&frame, u) {
            Ok(r) => worst = worst.max(r),
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    let passed = failures == 0 && worst <= RESIDUAL_TOL && elapsed <= GENERATOR_TIME_LIMIT;
    result(
        1,
        title,
        passed,
        format!(
            "{RANDOM_FRAMES} frames, max residual {worst:.3e} (tol {RESIDUAL_TOL:.0e}), {failures} errors, {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

/// Coefficient distance of the rescaled generators to `{z2 + 2 z1^2, z1^3}`
/// along the family `rho = eps / 2`, `delta = eps`.
pub fn ci_generator_distances(schedule: &[f64]) -> plurigreen_core::Result<Vec<f64>> {
    let target_1 = BiPoly::from_terms([(0, 1, c(1.0, 0.0)), (2, 0, c(2.0, 0.0))]);
    let target_2 = BiPoly::monomial(3, 0, c(1.0, 0.0));
    schedule
        .iter()
        .map(|&eps| {
            let frame = CanonicalFrame::from_params(eps, c(eps / 2.0, 0.0), c(eps, 0.0))?;
            let [g1, g2] = ci_rescaled_generators(&frame)?;
            Ok(g1.coeff_distance(&target_1) + g2.coeff_distance(&target_2))
        })
        .collect()
}

pub fn criterion_2() -> CriterionResult {
    let title = "rescaled generators converge to the complete-intersection limit";
    let schedule = geometric_schedule(1e-1, 1e-6, 6);
    match ci_generator_distances(&schedule) {
        Ok(d) => {
            let monotone = d.windows(2).all(|w| w[1] < w[0]);
            let last = *d.last().expect("nonempty schedule");
            let list: Vec<String> = d.iter().map(|x| format!("{x:.3e}")).collect();
            result(
                2,
                title,
                monotone && last <= 1e-4,
                format!("distances [{}], monotone {monotone}, last {last:.3e} (tol 1e-4)", list.join(", ")),
            )
        }
        Err(e) => result(2, title, false, format!("error: {e}")),
    }
}

pub fn criterion_3() -> CriterionResult {
    let title = "classification of the reference families";
    let schedule = geometric_schedule(1e-1, 1e-6, 6);
    let families = [
        ("delta=eps", ci_family()),
        ("delta=sqrt(eps)", degenerate_family()),
        ("a3=(0,eps)", generic_family(&schedule)),
    ];
    let mut parts = Vec::new();
    let mut passed = true;
    for (i, (name, fam)) in families.iter().enumerate() {
        let c = match classify(fam, &schedule) {
            Ok(c) => c,
            Err(e) => {
                passed = false;
                parts.push(format!("{name}: error {e}"));
                continue;
            }
        };
        let ok = match (i, c.regime) {
            (0, Regime::CompleteIntersection { m }) => (m + 2.0).norm() <= 1e-6,
            (1, Regime::MaxSquareDegenerate) | (2, Regime::MaxSquareGeneric) => true,
            _ => false,
        };
        let consistent = !c.evidence.contradiction && c.evidence.equivalence_holds() != Some(false);
        passed &= ok && consistent;
        let regime = match c.regime {
            Regime::CompleteIntersection { m } => format!("CompleteIntersection(m={:.9}{:+.1e}i)", m.re, m.im),
            r => format!("{r:?}"),
        };
        parts.push(format!("{name} -> {regime}, equivalence {:?}", c.evidence.equivalence_holds()));
    }
    result(3, title, passed, parts.join("; "))
}

fn sandwich_violations(report: &SweepReport) -> (usize, usize, usize) {
    let (mut lower_upper, mut env_two, mut failed) = (0, 0, 0);
    for row in &report.rows {
        match row.bounds() {
            Some(b) => {
                if b.lower > b.upper_two_point.min(b.upper_envelope) + SANDWICH_TOL {
                    lower_upper += 1;
                }
                if b.upper_envelope > b.upper_two_point + SANDWICH_TOL {
                    env_two += 1;
                }
            }
            None => failed += 1,
        }
    }
    (lower_upper, env_two, failed)
}

pub fn criterion_4(reports: &[(&str, SweepReport)]) -> CriterionResult {
    let title = "sandwich soundness on the 5x5 grid";
    let mut passed = reports.len() == 3;
    let mut parts = Vec::new();
    for (name, r) in reports {
        let (lu, et, failed) = sandwich_violations(r);
        let disks = r.rows.iter().filter(|row| row.bounds().is_some_and(|b| b.envelope_from_disk)).count();
        passed &= lu == 0 && et == 0 && failed == 0;
        parts.push(format!(
            "{name}: {} rows, {lu} lower>upper, {et} envelope>two-point, {failed} unevaluated, {disks} disk certificates",
            r.rows.len()
        ));
    }
    result(4, title, passed, parts.join("; "))
}

pub fn criterion_5() -> CriterionResult {
    let title = "two-point bound reproduces 2 log|z1| where |z2| <= |z1|^2";
    let points = [(0.5, 0.2), (0.7, 0.4), (0.3, 0.05)];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (x, y) in points {
        let z = Complex2::real(x, y);
        match upper_bound_two_point(z, 1e-4) {
            Ok(b) => {
                let err = (b.value - 2.0 * x.ln()).abs();
                worst = worst.max(err);
                parts.push(format!("({x},{y}): {err:.3e}"));
            }
            Err(e) => {
                worst = f64::INFINITY;
                parts.push(format!("({x},{y}): error {e}"));
            }
        }
    }
    result(5, title, worst <= 1e-3, format!("{} (tol 1e-3)", parts.join(", ")))
}

pub fn criterion_6() -> CriterionResult {
    let title = "lower-bound limits at eps = 1e-4";
    let eps = 1e-4;
    let ctx = CanonicalFrame::from_params(eps, c(eps / 2.0, 0.0), c(eps.sqrt(), 0.0))
        .and_then(|f| GreenContext::new(f, GreenConfig::default()));
    let ctx = match ctx {
        Ok(ctx) => ctx,
        Err(e) => return result(6, title, false, format!("error: {e}")),
    };
    let mut worst_margin = f64::INFINITY;
    let mut errors = 0;
    for z in grid_5x5() {
        let target = (2.0 * z.c1.norm().ln()).max(1.5 * z.c2.norm().ln());
        match ctx.lower_bound_best(z) {
            Ok(b) => worst_margin = worst_margin.min(b.value - target),
            Err(_) => errors += 1,
        }
    }
    let q1 = ctx.lower_bounds(Complex2::real(0.5, 0.0)).ok().and_then(|bs| {
        bs.into_iter()
            .find(|b| matches!(b.certificate, Certificate::Polynomial { label: PolyLabel::Q1, .. }))
    });
    let q1_err = q1.map_or(f64::INFINITY, |b| (b.value - 2.0 * 0.5f64.ln()).abs());
    let passed = errors == 0 && worst_margin >= -5e-2 && q1_err <= 1e-2;
    result(
        6,
        title,
        passed,
        format!(
            "min(lower - target) over grid {worst_margin:.4e} (tol -5e-2), {errors} errors; Q1 certificate at (0.5,0) off by {q1_err:.4e} (tol 1e-2)"
        ),
    )
}

fn last_three_gaps(report: &SweepReport, point: usize) -> Option<Vec<f64>> {
    let rows: Vec<&Row> = report.rows_for_point(point).collect();
    rows[rows.len().saturating_sub(3)..].iter().map(|r| r.gap()).collect()
}

pub fn criterion_7(report: &SweepReport) -> CriterionResult {
    let title = "complete-intersection limit consistency at eps = 1e-5";
    let band = 0.05;
    let n_points = report.config.test_points.len();
    let last_eps = report.frames.len().saturating_sub(1);
    let (mut lower_bad, mut upper_bad, mut missing, mut shrinking) = (0, 0, 0, 0);
    let mut worst_upper: f64 = f64::INFINITY;
    let mut worst_lower: f64 = f64::NEG_INFINITY;
    for p in 0..n_points {
        let row = report
            .rows
            .iter()
            .find(|r| r.point_index == p && r.eps_index == last_eps);
        match row.and_then(|r| Some((r.bounds()?, r.target()?))) {
            Some((b, t)) => {
                worst_lower = worst_lower.max(b.lower - t.value);
                worst_upper = worst_upper.min(b.upper_envelope - t.value);
                lower_bad += usize::from(b.lower > t.value + band);
                upper_bad += usize::from(b.upper_envelope < t.value - band);
            }
            None => missing += 1,
        }
        if let Some(g) = last_three_gaps(report, p) {
            if g.windows(2).all(|w| w[1] <= w[0] + crate::harness::TREND_SLACK) {
                shrinking += 1;
            }
        }
    }
    let fraction = if n_points == 0 { 0.0 } else { shrinking as f64 / n_points as f64 };
    let is_ci = matches!(report.classification.regime, Regime::CompleteIntersection { .. });
    let passed = is_ci && n_points > 0 && missing == 0 && lower_bad == 0 && upper_bad == 0 && fraction >= 0.9;
    result(
        7,
        title,
        passed,
        format!(
            "eps {:.1e}: {lower_bad}/{n_points} points with lower > exact + {band} (max excess {worst_lower:.4}), \
             {upper_bad}/{n_points} with envelope < exact - {band} (min gap {worst_upper:.4}), {missing} missing; \
             gap non-increasing at {shrinking}/{n_points} points ({:.0}%, need 90%)",
            report.frames.get(last_eps).map_or(f64::NAN, |f| f.0),
            100.0 * fraction
        ),
    )
}

/// Closed-form bound on `sup |l1 l2 l3|` over the bidisk.
pub fn line_product_bound(frame: &CanonicalFrame) -> f64 {
    let d = frame.delta.norm();
    (1.0 + d) * (1.0 + d * (1.0 + frame.eps))
}

pub fn criterion_8(seed: u64) -> CriterionResult {
    let title = "sup-norm oracle";
    let mut passed = true;
    let mut parts = Vec::new();
    for m in [c(0.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 1.0)] {
        let p = BiPoly::from_terms([(0, 1, c(1.0, 0.0)), (2, 0, -m)]);
        match sup_norm_bidisk(&p, DEFAULT_RESOLUTION) {
            Ok(s) => {
                let err = (s.value - (1.0 + m.norm())).abs();
                passed &= err <= s.uncertainty + 1e-6;
                parts.push(format!("m={}{:+}i: err {err:.2e} (unc {:.2e})", m.re, m.im, s.uncertainty));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("m={m}: error {e}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (mut over, mut errors) = (0, 0);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let frame = random_frame(&mut rng, 1e-6);
        match line_product(&frame).and_then(|p| sup_norm_bidisk(&p, DEFAULT_RESOLUTION)) {
            Ok(s) => {
                let bound = line_product_bound(&frame);
                worst_ratio = worst_ratio.max(s.value / bound);
                over += usize::from(s.value > bound * (1.0 + 1e-12));
            }
            Err(_) => errors += 1,
        }
    }
    passed &= over == 0 && errors == 0;
    parts.push(format!(
        "line product over 100 frames: {over} above bound, max sup/bound {worst_ratio:.4}, {errors} errors"
    ));
    result(8, title, passed, parts.join("; "))
}

pub fn criterion_9(
    reports: &[(&str, SweepReport)],
    rerun: &[(&str, SweepReport)],
    workers: (usize, usize),
    elapsed: Duration,
) -> CriterionResult {
    let title = "deterministic sweeps and verify runtime";
    let identical = reports.len() == rerun.len()
        && reports
            .iter()
            .zip(rerun)
            .all(|((_, a), (_, b))| csv_string(a).as_bytes() == csv_string(b).as_bytes());
    let fast = elapsed <= VERIFY_TIME_LIMIT;
    result(
        9,
        title,
        identical && fast,
        format!(
            "CSV byte-identical with {} vs {} workers: {identical}; suite time {:.1} s (limit {} s)",
            workers.0,
            workers.1,
            elapsed.as_secs_f64(),
            VERIFY_TIME_LIMIT.as_secs()
        ),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub workers: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(2, |n| n.get()).clamp(2, 8);
        Self { workers, seed: 0 }
    }
}

fn run_sweeps(seed: u64, workers: usize) -> Result<Vec<(&'static str, SweepReport)>, String> {
    sweep_configs(seed)
        .into_iter()
        .map(|(name, cfg)| run_sweep(&cfg, workers).map(|r| (name, r)).map_err(|e| format!("{name}: {e}")))
        .collect()
}

/// Runs every criterion. The sweeps are computed once and shared by the
/// sweep-based criteria; criterion 9 repeats them on a different worker
/// count.
pub fn run_all(opts: VerifyOptions) -> Vec<CriterionResult> {
    let start = Instant::now();
    let mut out = vec![criterion_1(opts.seed), criterion_2(), criterion_3()];
    let other_workers = if opts.workers == 1 { 3 } else { 1 };
    let sweeps = run_sweeps(opts.seed, opts.workers);
    match &sweeps {
        Ok(r) => out.push(criterion_4(r)),
        Err(e) => out.push(result(4, "sandwich soundness on the 5x5 grid", false, e.clone())),
    }
    out.push(criterion_5());
    out.push(criterion_6());
    match &sweeps {
        Ok(r) => out.push(criterion_7(&r[0].1)),
        Err(e) => out.push(result(7, "complete-intersection limit consistency at eps = 1e-5", false, e.clone())),
    }
    out.push(criterion_8(opts.seed));
    let rerun = run_sweeps(opts.seed, other_workers);
    let elapsed = start.elapsed();
    match (&sweeps, &rerun) {
        (Ok(a), Ok(b)) => out.push(criterion_9(a, b, (opts.workers, other_workers), elapsed)),
        (Err(e), _) | (_, Err(e)) => out.push(result(9, "deterministic sweeps and verify runtime", false, e.clone())),
    }
    out
}

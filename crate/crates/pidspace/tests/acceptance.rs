//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Oracles here are deliberately independent of the library's own
//! machinery where possible: characteristic polynomials are rebuilt from
//! coefficient arrays, stability uses a Schur-Cohn recursion instead of
//! root finding, and loop values are evaluated from the controller written
//! as a sum of fractions.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pidspace::project::{parse_config, Project, Reference};
use pidspace_core::analyzer::{self, AnalysisSettings, LoopContext};
use pidspace_core::boundary::{self, GainPlane, WeightPair, WeightRole, WeightSpec};
use pidspace_core::region::{self, ConstraintSet, GridSpec, MapSettings};
use pidspace_core::tf::Gain;
use pidspace_core::{grid, Complex, GainScaling, PidGains, Structure, TransferFunction};

// Tolerances and limits, fixed.
const ZOH_REL_TOL: f64 = 5e-4;
const ZOH_LIMIT: Duration = Duration::from_secs(1);
const CRB_SAMPLES: usize = 200;
const CRB_RADIUS_TOL: f64 = 1e-6;
const CRB_LIMIT: Duration = Duration::from_secs(5);
const RRB_ROOT_TOL: f64 = 1e-9;
const MAP_N: usize = 201;
const MAP_AGREEMENT: f64 = 0.99;
const MAP_LIMIT: Duration = Duration::from_secs(30);
const PM_LEVEL: f64 = 40.0;
const PM_TOL: f64 = 0.1;
const GM_LEVEL: f64 = 10.0;
const GM_TOL: f64 = 0.05;
const MS_RESIDUAL_TOL: f64 = 1e-9;
const MS_RP_TOL: f64 = 1e-3;
const SIM_STEPS: usize = 3000;
const STEP_ERROR_TOL: f64 = 1e-2;
const CROSS_CHECK_TRIPLES: usize = 100;
const CROSS_CHECK_TOL: f64 = 1e-12;

const T: f64 = 0.01;
const STEERING_NUM: [f64; 3] = [227.6, 5536.0, 36260.0];
const STEERING_DEN: [f64; 5] = [1.0, 22.16, 37.92, 0.0, 0.0];
// Printed discrete plant at T = 0.01, four significant figures.
const PRINTED_NUM: [f64; 4] = [0.01147, -0.008747, -0.01145, 0.009058];
const PRINTED_DEN: [f64; 5] = [1.0, -3.798, 5.397, -3.4, 0.8012];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn steering() -> TransferFunction {
    TransferFunction::continuous(&STEERING_NUM, &STEERING_DEN)
        .unwrap()
        .c2d_zoh(T)
        .unwrap()
}

fn double_pole() -> TransferFunction {
    TransferFunction::discrete(&[1.0], &[1.0, 1.0, 0.0], 1.0).unwrap()
}

fn weights() -> (WeightSpec, WeightSpec) {
    (
        WeightSpec { l: 0.5, h: 4.0, omega: 5.0, role: WeightRole::Sensitivity },
        WeightSpec { l: 0.2, h: 1.8, omega: 120.0, role: WeightRole::Complementary },
    )
}

fn horner(c: &[f64], z: Complex) -> Complex {
    c.iter().fold(Complex::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let pad = |p: &[f64]| {
        let mut v = vec![0.0; n - p.len()];
        v.extend_from_slice(p);
        v
    };
    pad(a).iter().zip(pad(b)).map(|(x, y)| x + y).collect()
}

/// `den Dc + num Nc` from coefficient arrays, with the controller numerator
/// and denominator written out per structure.
fn charpoly(num: &[f64], den: &[f64], g: &PidGains) -> Vec<f64> {
    let (kp, ki, kd) = (g.kp, g.ki, g.kd);
    let (nc, dc): (Vec<f64>, Vec<f64>) = match g.structure {
        Structure::P => (vec![kp], vec![1.0]),
        Structure::PI => (vec![kp + ki, -kp], vec![1.0, -1.0]),
        Structure::PD => (vec![kp + kd, -kd], vec![1.0, 0.0]),
        Structure::PID => (vec![kp + ki + kd, -kp - 2.0 * kd, kd], vec![1.0, -1.0, 0.0]),
    };
    poly_add(&poly_mul(den, &dc), &poly_mul(num, &nc))
}

/// Schur-Cohn recursion: all roots strictly inside the unit circle.
fn schur_stable(p: &[f64]) -> bool {
    let mut a: Vec<f64> = p.to_vec();
    while a.len() > 1 && a[0] == 0.0 {
        a.remove(0);
    }
    while a.len() > 1 {
        let n = a.len() - 1;
        let k = a[n] / a[0];
        if !(k.abs() < 1.0) {
            return false;
        }
        a = (0..n).map(|i| a[i] - k * a[n - i]).collect();
    }
    true
}

/// Controller `C(z)` as a sum of fractions.
fn controller(g: &PidGains, z: Complex) -> Complex {
    g.kp + g.ki * z / (z - 1.0) + g.kd * (z - 1.0) / z
}

fn loop_value(plant: &TransferFunction, g: &PidGains, theta: f64) -> Complex {
    let z = Complex::from_polar(1.0, theta);
    horner(plant.num().coeffs(), z) / horner(plant.den().coeffs(), z) * controller(g, z)
}

fn nearest_root_distance(p: &[f64], target: Complex) -> f64 {
    let poly = pidspace_core::Polynomial::from_slice(p).unwrap();
    poly.roots()
        .unwrap()
        .iter()
        .map(|r| (r - target).norm())
        .fold(f64::INFINITY, f64::min)
}

fn c1_zoh() -> Outcome {
    let t0 = Instant::now();
    let d = steering();
    let elapsed = t0.elapsed();
    let rel = |got: &[f64], want: &[f64]| -> f64 {
        got.iter()
            .zip(want)
            .map(|(g, w)| ((g - w) / w).abs())
            .fold(0.0, f64::max)
    };
    let (n, dd) = (d.num().coeffs(), d.den().coeffs());
    if n.len() != PRINTED_NUM.len() || dd.len() != PRINTED_DEN.len() {
        return outcome(false, format!("degree mismatch: num {n:?}, den {dd:?}"));
    }
    let err = rel(n, &PRINTED_NUM).max(rel(dd, &PRINTED_DEN));
    outcome(
        err < ZOH_REL_TOL && elapsed < ZOH_LIMIT,
        format!("max relative deviation {err:.2e} (tol {ZOH_REL_TOL:.0e}), {elapsed:.2?} (limit {ZOH_LIMIT:?})"),
    )
}

fn c2_crb() -> Outcome {
    let t0 = Instant::now();
    let plant = double_pole();
    let (num, den) = (plant.num().coeffs().to_vec(), plant.den().coeffs().to_vec());
    let planes = [
        ("(kp, ki)", GainPlane::pi(GainScaling::Standard)),
        ("(kd, kp)", GainPlane::pd(GainScaling::Standard)),
    ];
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, plane) in planes {
        let crb = boundary::stability_crb(&plant, &plane, &grid::open_half_circle(4 * CRB_SAMPLES)).unwrap();
        if crb.points.len() < CRB_SAMPLES {
            pass = false;
            notes.push(format!("{name}: only {} points", crb.points.len()));
            continue;
        }
        let stride = crb.points.len() as f64 / CRB_SAMPLES as f64;
        for k in 0..CRB_SAMPLES {
            let p = crb.points[(k as f64 * stride) as usize];
            let g = plane.gains_at(p.x, p.y);
            let target = Complex::from_polar(1.0, p.theta);
            let poly = pidspace_core::Polynomial::from_slice(&charpoly(&num, &den, &g)).unwrap();
            let r = poly
                .roots()
                .unwrap()
                .into_iter()
                .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
                .unwrap();
            let dev = (r.norm() - 1.0).abs().max((r - target).norm());
            worst = worst.max(dev);
        }
        notes.push(format!("{name}: {CRB_SAMPLES} points"));
    }
    let elapsed = t0.elapsed();
    pass &= worst < CRB_RADIUS_TOL && elapsed < CRB_LIMIT;
    outcome(
        pass,
        format!(
            "{}; worst root deviation from e^(j theta) {worst:.2e} (tol {CRB_RADIUS_TOL:.0e}), {elapsed:.2?} (limit {CRB_LIMIT:?})",
            notes.join(", ")
        ),
    )
}

fn c3_rrb() -> Outcome {
    let plants = [double_pole(), steering()];
    let mut pass = true;
    let mut worst_root = 0.0f64;
    let mut literal_worst = 0.0f64;
    let mut notes = Vec::new();
    for (k, plant) in plants.iter().enumerate() {
        let t = plant.sample_time().unwrap();
        let (num, den) = (plant.num().coeffs(), plant.den().coeffs());
        assert!(plant.num().eval_real(1.0).abs() > 1e-6);
        let planes = [
            GainPlane::pi(GainScaling::Standard),
            GainPlane::new(Gain::Kp, Gain::Ki, 0.3, Structure::PID, GainScaling::Standard).unwrap(),
            GainPlane::pd(GainScaling::Standard),
            GainPlane::new(Gain::Kd, Gain::Kp, 0.05, Structure::PID, GainScaling::Standard).unwrap(),
        ];
        for plane in planes {
            let [plus, minus] = boundary::stability_rrb(plant, &plane).unwrap();
            // z = +1: exactly ki = 0 whenever ki is an axis of the plane
            if plane.x_axis == Gain::Ki || plane.y_axis == Gain::Ki {
                let Some(&l) = plus.singular_segments.first() else {
                    pass = false;
                    notes.push(format!("plant {k}: no z=+1 line"));
                    continue;
                };
                let ki_axis = if plane.x_axis == Gain::Ki { 0 } else { 1 };
                if !(l.point[ki_axis] == 0.0 && l.direction[ki_axis] == 0.0) {
                    pass = false;
                    notes.push(format!("plant {k}: z=+1 line is not ki = 0: {l:?}"));
                }
            }
            let Some(l) = minus.singular_segments.first() else {
                pass = false;
                notes.push(format!("plant {k}: no z=-1 line"));
                continue;
            };
            for s in [-3.0, -0.5, 0.0, 0.7, 2.0] {
                let (x, y) = (l.point[0] + s * l.direction[0], l.point[1] + s * l.direction[1]);
                let g = plane.standard_gains_at(x, y, t);
                let p = charpoly(num, den, &g);
                worst_root = worst_root.max(nearest_root_distance(&p, Complex::new(-1.0, 0.0)));
                if plane.structure == Structure::PID && plant.den().eval_real(-1.0).abs() > 1e-12 {
                    // printed form: 2 kp + 4 kd + ki = -1 / G(-1)
                    let g1 = plant.num().eval_real(-1.0) / plant.den().eval_real(-1.0);
                    let lhs = 2.0 * g.kp + 4.0 * g.kd + g.ki;
                    literal_worst = literal_worst.max((lhs + 1.0 / g1).abs() / (1.0 / g1).abs());
                }
            }
        }
    }
    pass &= worst_root < RRB_ROOT_TOL;
    notes.insert(
        0,
        format!(
            "z=+1 is ki = 0 in every plane with ki; worst |r + 1| on z=-1 lines {worst_root:.2e} (tol {RRB_ROOT_TOL:.0e}); \
             the form 2 kp + 4 kd + ki = -1/G(-1) is off by relative {literal_worst:.2} on the same points"
        ),
    );
    outcome(pass, notes.join("; "))
}

fn c4_region() -> Outcome {
    let t0 = Instant::now();
    let plant = double_pole();
    let (num, den) = (plant.num().coeffs().to_vec(), plant.den().coeffs().to_vec());
    let cases = [
        ("PI", GainPlane::pi(GainScaling::Standard), [-1.5, 2.5], [-1.0, 1.5]),
        ("PD", GainPlane::pd(GainScaling::Standard), [-1.5, 1.5], [-1.0, 2.0]),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, plane, xr, yr) in cases {
        let g = GridSpec::new(xr, yr, MAP_N, MAP_N).unwrap();
        let c = ConstraintSet::stability(plant.clone());
        let map = pidspace::parallel::region_map(&c, &plane, g, &MapSettings::default(), None).unwrap();
        let diag = g.dx().hypot(g.dy());
        let span = (xr[1] - xr[0]).max(yr[1] - yr[0]);
        // segments of the sampled curves and the singular lines
        let mut segs: Vec<([f64; 2], [f64; 2])> = Vec::new();
        let mut lines: Vec<([f64; 2], [f64; 2])> = Vec::new();
        for curve in &map.boundaries {
            for w in curve.points.windows(2) {
                let (a, b) = ([w[0].x, w[0].y], [w[1].x, w[1].y]);
                if (a[0] - b[0]).hypot(a[1] - b[1]) < 0.25 * span {
                    segs.push((a, b));
                }
            }
            lines.extend(curve.singular_segments.iter().map(|l| (l.point, l.direction)));
        }
        let dist = |x: f64, y: f64| -> f64 {
            let mut d = f64::INFINITY;
            for (a, b) in &segs {
                let (vx, vy) = (b[0] - a[0], b[1] - a[1]);
                let l2 = vx * vx + vy * vy;
                let t = if l2 > 0.0 { (((x - a[0]) * vx + (y - a[1]) * vy) / l2).clamp(0.0, 1.0) } else { 0.0 };
                d = d.min((x - a[0] - t * vx).hypot(y - a[1] - t * vy));
            }
            for (p, u) in &lines {
                d = d.min(((x - p[0]) * u[1] - (y - p[1]) * u[0]).abs());
            }
            d
        };
        let (mut far, mut agree) = (0usize, 0usize);
        for idx in 0..g.len() {
            let (x, y) = g.center(idx);
            if dist(x, y) <= diag {
                continue;
            }
            far += 1;
            let oracle = schur_stable(&charpoly(&num, &den, &plane.gains_at(x, y)));
            if oracle == (map.cells[idx] & region::STABLE != 0) {
                agree += 1;
            }
        }
        let frac = agree as f64 / far.max(1) as f64;
        let stable_cells = map.cells.iter().filter(|c| **c & region::STABLE != 0).count();
        pass &= far > 0 && stable_cells > 0 && frac >= MAP_AGREEMENT;
        notes.push(format!("{name}: {agree}/{far} far cells agree ({:.3}%), {stable_cells} stable", 100.0 * frac));
    }
    let elapsed = t0.elapsed();
    pass &= elapsed < MAP_LIMIT;
    outcome(
        pass,
        format!("{} (need >= {:.0}%), {elapsed:.2?} (limit {MAP_LIMIT:?})", notes.join("; "), 100.0 * MAP_AGREEMENT),
    )
}

fn c5_margins() -> Outcome {
    let plant = steering();
    let plane = GainPlane::pd(GainScaling::SampleTime);
    let ctx = LoopContext::new(&plant, Structure::PD, None, &AnalysisSettings::default()).unwrap();
    let theta = grid::open_half_circle(400);
    let mut pass = true;
    let mut notes = Vec::new();
    for (label, level, tol) in [("PM", PM_LEVEL, PM_TOL), ("GM", GM_LEVEL, GM_TOL)] {
        let curve = if label == "PM" {
            boundary::pm_boundary(&plant, &plane, level, &theta).unwrap()
        } else {
            boundary::gm_boundary(&plant, &plane, level, &theta).unwrap()
        };
        let (mut checked, mut worst) = (0usize, 0.0f64);
        for p in &curve.points {
            let g = plane.standard_gains_at(p.x, p.y, T);
            let m = ctx.margins(&g).unwrap();
            let list = if label == "PM" { &m.gain_crossovers } else { &m.phase_crossovers };
            let near = list
                .iter()
                .min_by(|a, b| (a.theta - p.theta).abs().total_cmp(&(b.theta - p.theta).abs()));
            let err = match near {
                Some(c) if (c.theta - p.theta).abs() < 1e-6 => (c.margin - level).abs(),
                _ => f64::INFINITY,
            };
            worst = worst.max(err);
            checked += 1;
        }
        pass &= checked > 0 && worst <= tol;
        notes.push(format!("{label} {level}: {checked} points, worst |error| {worst:.2e} (tol {tol})"));
    }
    outcome(pass, notes.join("; "))
}

fn c6_mixed_sensitivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_res = 0.0f64;
    let mut roots = 0usize;
    for _ in 0..20_000 {
        let ws = rng.gen_range(0.0..4.0);
        let wt = rng.gen_range(0.0..3.0);
        let tl = rng.gen_range(-PI..PI);
        for x in boundary::ms_magnitude_solutions(ws, wt, tl) {
            let l = Complex::from_polar(x, tl);
            let res = ws + wt * x - (1.0 + l).norm();
            worst_res = worst_res.max(res.abs() / (1.0 + ws + wt * x));
            roots += 1;
        }
    }
    let plant = steering();
    let (ws, wt) = weights();
    let w = WeightPair::from_specs(&ws, &wt, T).unwrap();
    let plane = GainPlane::pd(GainScaling::SampleTime);
    let freqs = grid::log_spaced(12, 1e-3 * PI, 0.9 * PI);
    let curves = boundary::ms_boundary(&plant, &w, &plane, &freqs, &grid::full_circle(180)).unwrap();
    let (mut checked, mut worst_rp) = (0usize, 0.0f64);
    for c in &curves {
        for p in &c.points {
            let g = plane.standard_gains_at(p.x, p.y, T);
            let l = loop_value(&plant, &g, p.theta);
            let (mws, mwt) = w.magnitudes(p.theta).unwrap();
            let rp = mws / (1.0 + l).norm() + mwt * (l / (1.0 + l)).norm();
            worst_rp = worst_rp.max((rp - 1.0).abs());
            checked += 1;
        }
    }
    outcome(
        roots > 1000 && worst_res < MS_RESIDUAL_TOL && checked > 0 && worst_rp <= MS_RP_TOL,
        format!(
            "{roots} magnitude roots, worst unsquared residual {worst_res:.2e} (tol {MS_RESIDUAL_TOL:.0e}); \
             {checked} curve points, worst |RP - 1| {worst_rp:.2e} (tol {MS_RP_TOL:.0e})"
        ),
    )
}

fn design_project() -> Project {
    let path = format!("{}/../../configs/steering_pd.json", env!("CARGO_MANIFEST_DIR"));
    Project::from_config(parse_config(&std::fs::read_to_string(path).unwrap()).unwrap()).unwrap()
}

fn c7_design_point() -> Outcome {
    let t0 = Instant::now();
    let p = design_project();
    let map = p.region_map().unwrap();
    let elapsed = t0.elapsed();
    let a = p.analyze(0.2, 0.0, 0.07).unwrap();
    let pm_ok = a.gain_crossovers.iter().all(|c| (20.0..=80.0).contains(&c.pm_deg)) && !a.gain_crossovers.is_empty();
    let rp = a.rp_supremum.unwrap_or(f64::INFINITY);
    let stable = a.spectral_radius < 1.0;
    let pass = map.grid.nx == MAP_N
        && map.member_count() > 0
        && map.contains(0.07, 0.2)
        && stable
        && pm_ok
        && rp < 1.0;
    // the same point read with the derivative gain in standard units
    let literal = analyzer::closed_loop_poles(&p.plants[0], &PidGains::pd(0.2, 0.07)).unwrap().2;
    outcome(
        pass,
        format!(
            "{}x{} map in {elapsed:.2?}: {} all-bits cells, contains (0.07, 0.2) = {}; analyzer: spectral radius {:.4}, PM {:?} deg, RP sup {rp:.4}; \
             note: with kd in standard units (no 1/T) the point has spectral radius {literal:.4}",
            map.grid.nx,
            map.grid.ny,
            map.member_count(),
            map.contains(0.07, 0.2),
            a.spectral_radius,
            a.gain_crossovers.iter().map(|c| (c.pm_deg * 100.0).round() / 100.0).collect::<Vec<_>>(),
        ),
    )
}

fn c8_simulation() -> Outcome {
    let p = design_project();
    let step = p.simulate(0.2, 0.0, 0.07, Reference::Step, SIM_STEPS, false).unwrap();
    let ramp = p.simulate(0.2, 0.0, 0.07, Reference::Ramp, SIM_STEPS, false).unwrap();
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let step_out = max_abs(&step.output);
    let step_err = step.error.last().unwrap().abs();
    let ramp_err = max_abs(&ramp.error);
    let half = SIM_STEPS / 2;
    let ramp_late = max_abs(&ramp.error[half..]);
    let ramp_early = max_abs(&ramp.error[..half]);
    let pass = step_out.is_finite()
        && step_out < 10.0
        && step_err < STEP_ERROR_TOL
        && ramp_err.is_finite()
        && ramp_late <= ramp_early;
    outcome(
        pass,
        format!(
            "step: max |y| {step_out:.3}, final |e| {step_err:.2e} (tol {STEP_ERROR_TOL:.0e}); \
             ramp: max |e| {ramp_err:.3}, max |e| second half {ramp_late:.2e} <= first half {ramp_early:.3}"
        ),
    )
}

fn c9_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..CROSS_CHECK_TRIPLES {
        let nd = rng.gen_range(2..=5);
        let nn = rng.gen_range(1..=nd);
        let mut den: Vec<f64> = (0..nd).map(|_| rng.gen_range(-2.0..2.0)).collect();
        den.insert(0, 1.0);
        let num: Vec<f64> = (0..nn).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let plant = TransferFunction::discrete(&num, &den, 0.05).unwrap();
        let g = PidGains::pid(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let theta = rng.gen_range(1e-3..PI - 1e-3);
        let z = Complex::from_polar(1.0, theta);
        let (nz, dz) = (horner(&num, z), horner(&den, z));
        // (z - 1) z + G (kp (z - 1) z + ki z^2 + kd (z - 1)^2), times den
        let pid = g.kp * (z - 1.0) * z + g.ki * z * z + g.kd * (z - 1.0) * (z - 1.0);
        let direct = ((z - 1.0) * z + nz / dz * pid) * dz;
        let r = boundary::characteristic_rows(&plant, Structure::PID, theta).residual(&g);
        let scale = dz.norm() * 2.0 + nz.norm() * (2.0 * g.kp.abs() + g.ki.abs() + 4.0 * g.kd.abs());
        let err = (Complex::new(r[0], r[1]) - direct).norm() / scale;
        worst = worst.max(err);
    }
    outcome(
        worst < CROSS_CHECK_TOL,
        format!("{CROSS_CHECK_TRIPLES} random triples, worst scaled |rows - direct| {worst:.2e} (tol {CROSS_CHECK_TOL:.0e})"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("ZOH fidelity", c1_zoh),
        ("CRB soundness", c2_crb),
        ("RRB soundness", c3_rrb),
        ("region/oracle agreement", c4_region),
        ("PM/GM boundary calibration", c5_margins),
        ("mixed-sensitivity calibration", c6_mixed_sensitivity),
        ("design point", c7_design_point),
        ("simulation sanity", c8_simulation),
        ("equation-form cross-check", c9_cross_check),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{tag}] {}. {name}: {} [{:.2?}]", k + 1, o.detail, t0.elapsed());
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

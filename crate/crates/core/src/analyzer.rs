//! Point oracle: closed-loop poles, stability margins, robust performance and
//! time-domain simulation of one gain point, all in standard gain units.
//!
//! Nothing here uses boundary curves, so it can be used to check them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::boundary::{MarginSpec, WeightPair};
use crate::grid::wrap_angle;
use crate::tf::{unit, Gain, PidGains, Structure, TransferFunction};
use crate::{Complex, Error, Polynomial, Result};

pub const DEFAULT_MARGIN_POINTS: usize = 8192;
pub const DEFAULT_RP_POINTS: usize = 4096;
/// Bisection stops once the bracket is narrower than this (radians).
pub const CROSSOVER_TOL: f64 = 1e-12;
/// Open-loop denominator magnitude treated as a pole on the unit circle.
pub const LOOP_POLE_TOL: f64 = 1e-12;
/// A loop is stable when every closed-loop pole is inside `1 - STABILITY_TOL`.
pub const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisSettings {
    pub margin_points: usize,
    pub rp_points: usize,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            margin_points: DEFAULT_MARGIN_POINTS,
            rp_points: DEFAULT_RP_POINTS,
        }
    }
}

/// `den(z) Dc(z) + num(z) Nc(z)`: the closed-loop characteristic polynomial.
/// Controller poles absent from the structure never appear, so a PD loop is
/// one degree lower than a PID loop.
pub fn closed_loop_charpoly(plant: &TransferFunction, gains: &PidGains) -> Result<Polynomial> {
    plant.ensure_discrete()?;
    gains.validate()?;
    let p = &(plant.den() * &gains.structure.denominator()) + &(plant.num() * &gains.numerator());
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::DegenerateCharPoly);
    }
    Ok(p)
}

/// Closed-loop poles and the largest pole magnitude.
pub fn closed_loop_poles(plant: &TransferFunction, gains: &PidGains) -> Result<(Polynomial, Vec<Complex>, f64)> {
    let p = closed_loop_charpoly(plant, gains)?;
    let poles = p.roots()?;
    let rho = poles.iter().map(|r| r.norm()).fold(0.0, f64::max);
    Ok((p, poles, rho))
}

pub fn is_stable(spectral_radius: f64) -> bool {
    spectral_radius < 1.0 - STABILITY_TOL
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    pub theta: f64,
    /// Phase margin in degrees at a gain crossover, gain margin in dB at a
    /// phase crossover.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Margins {
    pub gain_crossovers: Vec<Crossover>,
    pub phase_crossovers: Vec<Crossover>,
}

impl Margins {
    /// Smallest phase margin, `None` without a gain crossover.
    pub fn worst_pm(&self) -> Option<f64> {
        self.gain_crossovers.iter().map(|c| c.margin).reduce(f64::min)
    }

    /// Smallest gain margin, `None` (infinite) without a phase crossover.
    pub fn worst_gm(&self) -> Option<f64> {
        self.phase_crossovers.iter().map(|c| c.margin).reduce(f64::min)
    }

    fn largest_pm(&self) -> Option<f64> {
        self.gain_crossovers.iter().map(|c| c.margin).reduce(f64::max)
    }
}

/// Phase margin in degrees for a loop value on the unit circle,
/// `180 + arg L` wrapped into `(-180, 180]`.
pub fn phase_margin_deg(l: Complex) -> f64 {
    wrap_angle(PI + l.arg()).to_degrees()
}

pub fn gain_margin_db(l: Complex) -> f64 {
    -20.0 * l.norm().log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustPerformance {
    /// `max |W_S S| + |W_T T|` over the unit circle.
    pub supremum: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy)]
struct LoopSample {
    theta: f64,
    /// `num(z) W_g(z)` for kp, ki, kd.
    num_basis: [Complex; 3],
    /// `den(z) Dc(z)`.
    den: Complex,
}

impl LoopSample {
    fn new(plant: &TransferFunction, structure: Structure, theta: f64, z: Complex) -> Self {
        let n = plant.num().eval(z);
        Self {
            theta,
            num_basis: Gain::ALL.map(|g| n * structure.basis(g).eval(z)),
            den: plant.den().eval(z) * structure.denominator().eval(z),
        }
    }

    #[inline]
    fn num(&self, k: &[f64; 3]) -> Complex {
        self.num_basis[0] * k[0] + self.num_basis[1] * k[1] + self.num_basis[2] * k[2]
    }

    #[inline]
    fn loop_value(&self, k: &[f64; 3]) -> Option<Complex> {
        if self.den.norm() <= LOOP_POLE_TOL {
            None
        } else {
            Some(self.num(k) / self.den)
        }
    }
}

/// Grid point on the closed half circle; the endpoints are exactly `1` and `-1`.
fn half_circle_point(k: usize, n: usize) -> (f64, Complex) {
    if k == 0 {
        (0.0, Complex::new(1.0, 0.0))
    } else if k == n {
        (PI, Complex::new(-1.0, 0.0))
    } else {
        let theta = PI * k as f64 / n as f64;
        (theta, unit(theta))
    }
}

/// Cached unit-circle samples of one plant and controller structure, reused
/// for every gain point of a region map.
#[derive(Debug, Clone)]
pub struct LoopContext {
    plant: TransferFunction,
    structure: Structure,
    sample_time: f64,
    margin: Vec<LoopSample>,
    rp: Option<(WeightPair, Vec<(LoopSample, f64, f64)>)>,
}

impl LoopContext {
    pub fn new(
        plant: &TransferFunction,
        structure: Structure,
        weights: Option<&WeightPair>,
        settings: &AnalysisSettings,
    ) -> Result<Self> {
        let sample_time = plant.ensure_discrete()?;
        plant.ensure_proper()?;
        if settings.margin_points < 2 || settings.rp_points < 2 {
            return Err(Error::EmptyGrid);
        }
        let n = settings.margin_points;
        let margin = (0..=n)
            .map(|k| {
                let (theta, z) = half_circle_point(k, n);
                LoopSample::new(plant, structure, theta, z)
            })
            .collect();
        let rp = match weights {
            None => None,
            Some(w) => {
                let tw = w.sample_time();
                if (tw - sample_time).abs() > 1e-12 * sample_time {
                    return Err(Error::SampleTimeMismatch(sample_time, tw));
                }
                let m = settings.rp_points;
                let samples = (0..=m)
                    .map(|k| {
                        let (theta, z) = half_circle_point(k, m);
                        let ws = w.sensitivity.eval(z).map_or(f64::INFINITY, |v| v.norm());
                        let wt = w.complementary.eval(z).map_or(f64::INFINITY, |v| v.norm());
                        (LoopSample::new(plant, structure, theta, z), ws, wt)
                    })
                    .collect();
                Some((w.clone(), samples))
            }
        };
        Ok(Self {
            plant: plant.clone(),
            structure,
            sample_time,
            margin,
            rp,
        })
    }

    pub fn plant(&self) -> &TransferFunction {
        &self.plant
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn sample_time(&self) -> f64 {
        self.sample_time
    }

    pub fn weights(&self) -> Option<&WeightPair> {
        self.rp.as_ref().map(|(w, _)| w)
    }

    fn gain_vector(&self, gains: &PidGains) -> Result<[f64; 3]> {
        if gains.structure != self.structure {
            return Err(Error::InvalidGains(format!(
                "{} gains on a {} loop",
                gains.structure, self.structure
            )));
        }
        gains.validate()?;
        Ok([gains.kp, gains.ki, gains.kd])
    }

    fn sample_at(&self, theta: f64) -> LoopSample {
        LoopSample::new(&self.plant, self.structure, theta, unit(theta))
    }

    /// `L(e^{j theta}) = C G`, `None` at an open-loop pole.
    pub fn loop_value(&self, gains: &PidGains, theta: f64) -> Result<Option<Complex>> {
        let k = self.gain_vector(gains)?;
        Ok(self.sample_at(theta).loop_value(&k))
    }

    /// Gain and phase crossovers on `[0, pi]`.
    ///
    /// Gain crossovers are sign changes of `|L| - 1` between grid samples.
    /// Phase crossovers are sign changes of `Im L` with `Re L < 0`, plus the
    /// endpoints when `L` is real and negative there. Both are refined by
    /// bisection and kept only if the refined point still satisfies the
    /// crossover condition to `1e-6`.
    pub fn margins(&self, gains: &PidGains) -> Result<Margins> {
        let k = self.gain_vector(gains)?;
        let values: Vec<Option<Complex>> = self.margin.iter().map(|s| s.loop_value(&k)).collect();
        let mut out = Margins::default();
        let mag = |l: Complex| l.norm() - 1.0;
        let im = |l: Complex| l.im;

        for (i, w) in values.windows(2).enumerate() {
            let (Some(a), Some(b)) = (w[0], w[1]) else {
                continue;
            };
            let (ta, tb) = (self.margin[i].theta, self.margin[i + 1].theta);
            if mag(a) == 0.0 {
                out.gain_crossovers.push(Crossover { theta: ta, margin: phase_margin_deg(a) });
            }
            if mag(a) * mag(b) < 0.0 {
                if let Some((theta, l)) = self.refine(&k, ta, tb, mag) {
                    if mag(l).abs() < 1e-6 {
                        out.gain_crossovers.push(Crossover { theta, margin: phase_margin_deg(l) });
                    }
                }
            }
            if im(a) * im(b) < 0.0 && (a.re < 0.0 || b.re < 0.0) {
                if let Some((theta, l)) = self.refine(&k, ta, tb, im) {
                    if l.re < 0.0 && l.im.abs() <= 1e-6 * l.norm() {
                        out.phase_crossovers.push(Crossover { theta, margin: gain_margin_db(l) });
                    }
                }
            }
        }
        // exact zeros on grid samples, including both endpoints
        for (s, l) in self.margin.iter().zip(&values) {
            let Some(l) = *l else { continue };
            if l.im == 0.0 && l.re < 0.0 {
                out.phase_crossovers.push(Crossover { theta: s.theta, margin: gain_margin_db(l) });
            }
        }
        if let (Some(last), Some(Some(l))) = (self.margin.last(), values.last()) {
            if mag(*l) == 0.0 {
                out.gain_crossovers.push(Crossover { theta: last.theta, margin: phase_margin_deg(*l) });
            }
        }
        dedup(&mut out.gain_crossovers);
        dedup(&mut out.phase_crossovers);
        Ok(out)
    }

    fn refine(&self, k: &[f64; 3], mut lo: f64, mut hi: f64, f: impl Fn(Complex) -> f64) -> Option<(f64, Complex)> {
        let mut flo = f(self.sample_at(lo).loop_value(k)?);
        while hi - lo > CROSSOVER_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = f(self.sample_at(mid).loop_value(k)?);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let theta = 0.5 * (lo + hi);
        Some((theta, self.sample_at(theta).loop_value(k)?))
    }

    /// `|W_S S| + |W_T T|` at one angle; `+inf` when `1 + L = 0`.
    pub fn rp_value(&self, gains: &PidGains, theta: f64) -> Result<f64> {
        let k = self.gain_vector(gains)?;
        let (w, _) = self.rp.as_ref().ok_or(Error::InvalidSpec("no weights".into()))?;
        let ws = w.sensitivity.eval(unit(theta)).map_or(f64::INFINITY, |v| v.norm());
        let wt = w.complementary.eval(unit(theta)).map_or(f64::INFINITY, |v| v.norm());
        Ok(rp_from_sample(&self.sample_at(theta), &k, ws, wt))
    }

    /// Grid maximum of the robust-performance function, refined by golden
    /// section search between the neighbours of the grid argmax. `None`
    /// without weights.
    pub fn robust_performance(&self, gains: &PidGains) -> Result<Option<RobustPerformance>> {
        let k = self.gain_vector(gains)?;
        let Some((w, samples)) = &self.rp else {
            return Ok(None);
        };
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, (s, ws, wt)) in samples.iter().enumerate() {
            let v = rp_from_sample(s, &k, *ws, *wt);
            if v > best.1 {
                best = (i, v);
                if !v.is_finite() {
                    break;
                }
            }
        }
        let (i, vmax) = best;
        let theta = samples[i].0.theta;
        if !vmax.is_finite() {
            return Ok(Some(RobustPerformance {
                supremum: f64::INFINITY,
                theta,
            }));
        }
        let lo = samples[i.saturating_sub(1)].0.theta;
        let hi = samples[(i + 1).min(samples.len() - 1)].0.theta;
        let eval = |t: f64| {
            let z = unit(t);
            let ws = w.sensitivity.eval(z).map_or(f64::INFINITY, |v| v.norm());
            let wt = w.complementary.eval(z).map_or(f64::INFINITY, |v| v.norm());
            rp_from_sample(&self.sample_at(t), &k, ws, wt)
        };
        let (t_ref, v_ref) = golden_max(eval, lo, hi, 1e-10);
        Ok(Some(if v_ref > vmax {
            RobustPerformance {
                supremum: v_ref,
                theta: t_ref,
            }
        } else {
            RobustPerformance {
                supremum: vmax,
                theta,
            }
        }))
    }
}

/// `S = d/(d + n)`, `T = n/(d + n)`; stays finite at open-loop poles.
/// `NaN` when `d` and `n` vanish together (a controller pole cancelled by
/// its own zero), which callers skip.
#[inline]
fn rp_from_sample(s: &LoopSample, k: &[f64; 3], ws: f64, wt: f64) -> f64 {
    let n = s.num(k);
    let c = (s.den + n).norm();
    if c == 0.0 {
        return if s.den.norm() == 0.0 && n.norm() == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        };
    }
    (ws * s.den.norm() + wt * n.norm()) / c
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

fn dedup(list: &mut Vec<Crossover>) {
    list.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    list.dedup_by(|b, a| (b.theta - a.theta).abs() < 1e-7);
}

/// Crossovers of `C G` on a dense grid.
pub fn margins(plant: &TransferFunction, gains: &PidGains) -> Result<Margins> {
    LoopContext::new(plant, gains.structure, None, &AnalysisSettings::default())?.margins(gains)
}

/// Robust-performance supremum over `rp_points + 1` angles on `[0, pi]`.
pub fn robust_performance(
    plant: &TransferFunction,
    gains: &PidGains,
    weights: &WeightPair,
    rp_points: usize,
) -> Result<RobustPerformance> {
    let settings = AnalysisSettings {
        rp_points,
        ..AnalysisSettings::default()
    };
    let ctx = LoopContext::new(plant, gains.structure, Some(weights), &settings)?;
    Ok(ctx.robust_performance(gains)?.expect("weights given"))
}

/// One pass/fail verdict with a short explanation.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub pass: bool,
    pub reason: String,
}

impl Check {
    fn new(pass: bool, reason: String) -> Self {
        Self { pass, reason }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flags {
    pub stable: Check,
    pub pm: Option<Check>,
    pub gm: Option<Check>,
    pub ms: Option<Check>,
}

impl Flags {
    pub fn all_pass(&self) -> bool {
        self.stable.pass
            && [&self.pm, &self.gm, &self.ms]
                .into_iter()
                .all(|c| c.as_ref().map_or(true, |c| c.pass))
    }
}

pub fn stability_check(spectral_radius: f64) -> Check {
    if is_stable(spectral_radius) {
        Check::new(true, format!("spectral radius {spectral_radius:.6} < 1"))
    } else {
        Check::new(false, format!("spectral radius {spectral_radius:.6} >= 1"))
    }
}

/// PM check: every gain crossover has its phase margin in `[pm_min, pm_max]`.
pub fn pm_check(m: &Margins, spec: &MarginSpec) -> Check {
    let (Some(worst), Some(largest)) = (m.worst_pm(), m.largest_pm()) else {
        return Check::new(false, "no crossover".into());
    };
    if let Some(lo) = spec.pm_min {
        if worst < lo {
            return Check::new(false, format!("PM {worst:.3} deg below {lo}"));
        }
    }
    if let Some(hi) = spec.pm_max {
        if largest > hi {
            return Check::new(false, format!("PM {largest:.3} deg above {hi}"));
        }
    }
    Check::new(true, format!("PM {worst:.3} deg"))
}

pub fn gm_check(m: &Margins, gm_min: f64) -> Check {
    match m.worst_gm() {
        None => Check::new(true, "no phase crossover, infinite GM".into()),
        Some(g) if g >= gm_min => Check::new(true, format!("GM {g:.3} dB")),
        Some(g) => Check::new(false, format!("GM {g:.3} dB below {gm_min}")),
    }
}

pub fn ms_check(rp: &RobustPerformance) -> Check {
    if rp.supremum < 1.0 {
        Check::new(true, format!("robust performance {:.6} < 1", rp.supremum))
    } else if rp.supremum.is_infinite() {
        Check::new(false, "closed-loop pole on the unit circle".into())
    } else {
        Check::new(false, format!("robust performance {:.6} >= 1", rp.supremum))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    /// Standard units.
    pub gains: PidGains,
    pub sample_time: f64,
    pub char_poly: Polynomial,
    pub poles: Vec<Complex>,
    pub spectral_radius: f64,
    pub margins: Margins,
    pub worst_pm: Option<f64>,
    pub worst_gm: Option<f64>,
    pub robust_performance: Option<RobustPerformance>,
    pub flags: Flags,
}

/// Full single-point analysis. Margin checks are reported only for the
/// requirements that are set; robust performance only with weights.
pub fn analyze_with(ctx: &LoopContext, gains: &PidGains, spec: Option<&MarginSpec>) -> Result<AnalysisReport> {
    let (char_poly, poles, rho) = closed_loop_poles(ctx.plant(), gains)?;
    let margins = ctx.margins(gains)?;
    let rp = ctx.robust_performance(gains)?;
    let flags = Flags {
        stable: stability_check(rho),
        pm: spec.filter(|s| s.constrains_pm()).map(|s| pm_check(&margins, s)),
        gm: spec.and_then(|s| s.gm_min).map(|g| gm_check(&margins, g)),
        ms: rp.as_ref().map(ms_check),
    };
    Ok(AnalysisReport {
        gains: *gains,
        sample_time: ctx.sample_time(),
        char_poly,
        poles,
        spectral_radius: rho,
        worst_pm: margins.worst_pm(),
        worst_gm: margins.worst_gm(),
        margins,
        robust_performance: rp,
        flags,
    })
}

pub fn analyze(
    plant: &TransferFunction,
    gains: &PidGains,
    spec: Option<&MarginSpec>,
    weights: Option<&WeightPair>,
) -> Result<AnalysisReport> {
    if let Some(s) = spec {
        s.validate()?;
    }
    let ctx = LoopContext::new(plant, gains.structure, weights, &AnalysisSettings::default())?;
    analyze_with(&ctx, gains, spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub time: Vec<f64>,
    pub reference: Vec<f64>,
    pub output: Vec<f64>,
    pub error: Vec<f64>,
    pub control: Vec<f64>,
    /// Set when an unstable loop was simulated on request.
    pub diverging: bool,
}

pub fn step_reference(n: usize, amplitude: f64) -> Vec<f64> {
    vec![amplitude; n]
}

/// `slope * t` sampled at `t = k T`.
pub fn ramp_reference(n: usize, slope: f64, sample_time: f64) -> Vec<f64> {
    (0..n).map(|k| slope * k as f64 * sample_time).collect()
}

/// Direct-form filter `y = (b / a) u` with monic `a`, `b` padded to `a`'s length.
struct Filter {
    b: Vec<f64>,
    a: Vec<f64>,
    u: Vec<f64>,
    y: Vec<f64>,
}

impl Filter {
    fn new(num: &Polynomial, den: &Polynomial) -> Self {
        let lead = den.leading();
        let n = den.degree();
        Self {
            b: num.padded(n + 1).iter().map(|c| c / lead).collect(),
            a: den.coeffs().iter().map(|c| c / lead).collect(),
            u: vec![0.0; n + 1],
            y: vec![0.0; n + 1],
        }
    }

    fn feedthrough(&self) -> f64 {
        self.b[0]
    }

    /// Output at the current step minus the feedthrough term.
    fn past(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.a.len() {
            acc += self.b[i] * self.u[i - 1] - self.a[i] * self.y[i - 1];
        }
        acc
    }

    fn push(&mut self, u: f64, y: f64) {
        self.u.rotate_right(1);
        self.y.rotate_right(1);
        self.u[0] = u;
        self.y[0] = y;
    }
}

/// Unity-feedback loop `e = r - y`, `u = C e`, `y = G u` from rest.
///
/// Errors on an unstable loop unless `allow_unstable` is set.
pub fn simulate_closed_loop(
    plant: &TransferFunction,
    gains: &PidGains,
    reference: &[f64],
    allow_unstable: bool,
) -> Result<SimResult> {
    let t = plant.ensure_discrete()?;
    plant.ensure_proper()?;
    if reference.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("reference"));
    }
    let (_, _, rho) = closed_loop_poles(plant, gains)?;
    let diverging = !is_stable(rho);
    if diverging && !allow_unstable {
        return Err(Error::Unstable(rho));
    }
    let mut c = Filter::new(&gains.numerator(), &gains.structure.denominator());
    let mut g = Filter::new(plant.num(), plant.den());
    let (c0, g0) = (c.feedthrough(), g.feedthrough());
    let loop_gain = 1.0 + g0 * c0;
    if loop_gain.abs() < 1e-12 {
        return Err(Error::DegenerateCharPoly);
    }
    let n = reference.len();
    let mut out = SimResult {
        time: (0..n).map(|k| k as f64 * t).collect(),
        reference: reference.to_vec(),
        output: Vec::with_capacity(n),
        error: Vec::with_capacity(n),
        control: Vec::with_capacity(n),
        diverging,
    };
    for &r in reference {
        let (pc, pg) = (c.past(), g.past());
        // y = g0 (c0 (r - y) + pc) + pg
        let y = (g0 * (c0 * r + pc) + pg) / loop_gain;
        let e = r - y;
        let u = c0 * e + pc;
        c.push(e, u);
        g.push(u, y);
        out.output.push(y);
        out.error.push(e);
        out.control.push(u);
    }
    Ok(out)
}

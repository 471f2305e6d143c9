//! Constraint boundaries in a two-gain plane.
//!
//! Every boundary is found the same way: at each angle `theta` on the unit
//! circle, a complex equation that is linear in the three PID gains is split
//! into real and imaginary rows, the gain not on the plane is moved to the
//! right-hand side, and the remaining 2x2 system is solved.
//!
//! - Stability (complex root boundary): the closed-loop characteristic
//!   polynomial `den(z) Dc(z) + num(z) (kp Wp(z) + ki Wi(z) + kd Wd(z))`
//!   vanishes at `z = e^{j theta}`. It is kept in polynomial form so plants
//!   with poles on the unit circle never need `G` evaluated at a pole.
//! - Real root boundaries: the same polynomial at `z = +1` and `z = -1`,
//!   one real equation each.
//! - Phase margin, gain margin and mixed sensitivity: the loop value
//!   `L(e^{j theta}) = C(e^{j theta}) G(e^{j theta})` equals a prescribed
//!   complex target (`e^{j(PM - pi)}`, `-10^{-GM/20}` or `|L| e^{j theta_L}`).
//!
//! Systems whose smallest singular value falls below `1e-9` times the largest
//! are singular frequencies: when the right-hand side is consistent they
//! contribute a straight line of solutions, otherwise nothing.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

// float methods come from libm when built without std
#[allow(unused_imports)]
use num_traits::Float;
use crate::tf::{unit, Gain, GainScaling, PidGains, Structure, TransferFunction};
use crate::{Complex, Error, Result};

/// Relative singular-value threshold for singular frequencies.
pub const SINGULAR_TOL: f64 = 1e-9;
/// Plant gain below which a frequency cannot be shaped by the controller.
pub const MIN_PLANT_GAIN: f64 = 1e-12;
/// `|sin theta|` below which the mixed-sensitivity back-substitution is skipped.
pub const MIN_SIN_THETA: f64 = 1e-6;

/// The two gains spanning a design plane and the value of the third.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPlane {
    pub x_axis: Gain,
    pub y_axis: Gain,
    /// Value of the gain on neither axis, in `scaling` units.
    pub fixed_value: f64,
    pub structure: Structure,
    pub scaling: GainScaling,
}

impl GainPlane {
    pub fn new(
        x_axis: Gain,
        y_axis: Gain,
        fixed_value: f64,
        structure: Structure,
        scaling: GainScaling,
    ) -> Result<Self> {
        let plane = Self {
            x_axis,
            y_axis,
            fixed_value,
            structure,
            scaling,
        };
        plane.validate()?;
        Ok(plane)
    }

    /// PD design plane `(kd, kp)`.
    pub fn pd(scaling: GainScaling) -> Self {
        Self {
            x_axis: Gain::Kd,
            y_axis: Gain::Kp,
            fixed_value: 0.0,
            structure: Structure::PD,
            scaling,
        }
    }

    /// PI design plane `(kp, ki)`.
    pub fn pi(scaling: GainScaling) -> Self {
        Self {
            x_axis: Gain::Kp,
            y_axis: Gain::Ki,
            fixed_value: 0.0,
            structure: Structure::PI,
            scaling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_axis == self.y_axis {
            return Err(Error::InvalidPlane(format!("both axes are {}", self.x_axis)));
        }
        for axis in [self.x_axis, self.y_axis] {
            if !self.structure.has(axis) {
                return Err(Error::InvalidPlane(format!(
                    "axis {axis} is not a gain of the {} structure",
                    self.structure
                )));
            }
        }
        if !self.fixed_value.is_finite() {
            return Err(Error::InvalidPlane("fixed gain is not finite".into()));
        }
        let fixed = self.fixed_axis();
        if !self.structure.has(fixed) && self.fixed_value != 0.0 {
            return Err(Error::InvalidPlane(format!(
                "{fixed} must be 0 for the {} structure",
                self.structure
            )));
        }
        Ok(())
    }

    pub fn fixed_axis(&self) -> Gain {
        Gain::ALL
            .into_iter()
            .find(|g| *g != self.x_axis && *g != self.y_axis)
            .expect("three gains, two axes")
    }

    /// Gains at plane coordinates, in the plane's own units.
    pub fn gains_at(&self, x: f64, y: f64) -> PidGains {
        let mut g = PidGains {
            kp: 0.0,
            ki: 0.0,
            kd: 0.0,
            structure: self.structure,
        };
        g.set(self.x_axis, x);
        g.set(self.y_axis, y);
        g.set(self.fixed_axis(), self.fixed_value);
        g
    }

    /// Gains at plane coordinates converted to standard units.
    pub fn standard_gains_at(&self, x: f64, y: f64, sample_time: f64) -> PidGains {
        self.gains_at(x, y).to_standard(self.scaling, sample_time)
    }

    fn factors(&self, sample_time: f64) -> [f64; 3] {
        [
            self.scaling.factor(self.x_axis, sample_time),
            self.scaling.factor(self.y_axis, sample_time),
            self.scaling.factor(self.fixed_axis(), sample_time),
        ]
    }

    /// Restricts a 2x3 system in standard `(kp, ki, kd)` to the plane's axes.
    /// Returns the 2x2 matrix (standard units) and right-hand side.
    fn restrict(&self, rows: &LinearRows, sample_time: f64) -> ([[f64; 2]; 2], [f64; 2]) {
        let f = self.factors(sample_time);
        let fixed_std = self.fixed_value * f[2];
        let (ix, iy, iz) = (
            self.x_axis.index(),
            self.y_axis.index(),
            self.fixed_axis().index(),
        );
        let a = [
            [rows.a[0][ix], rows.a[0][iy]],
            [rows.a[1][ix], rows.a[1][iy]],
        ];
        let b = [
            rows.b[0] - rows.a[0][iz] * fixed_std,
            rows.b[1] - rows.a[1][iz] * fixed_std,
        ];
        (a, b)
    }

    fn to_plane_units(&self, p: [f64; 2], sample_time: f64) -> [f64; 2] {
        let f = self.factors(sample_time);
        [p[0] / f[0], p[1] / f[1]]
    }
}

/// Two real equations `a . [kp, ki, kd] = b` in standard gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRows {
    pub a: [[f64; 3]; 2],
    pub b: [f64; 2],
}

impl LinearRows {
    /// `a . k - b` for a gain vector.
    pub fn residual(&self, gains: &PidGains) -> [f64; 2] {
        let k = [gains.kp, gains.ki, gains.kd];
        let row = |r: usize| self.a[r].iter().zip(k).map(|(a, k)| a * k).sum::<f64>() - self.b[r];
        [row(0), row(1)]
    }
}

/// Controller numerator basis `(Wp, Wi, Wd)` and denominator `Dc` of a
/// structure, evaluated at `e^{j theta}` with explicit trigonometry.
fn structure_basis_on_circle(structure: Structure, theta: f64) -> ([Complex; 3], Complex) {
    let (c1, s1) = (theta.cos(), theta.sin());
    let (c2, s2) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    let zero = Complex::new(0.0, 0.0);
    match structure {
        Structure::PID => {
            let wp = Complex::new(c2 - c1, s2 - s1);
            (
                [wp, Complex::new(c2, s2), Complex::new(c2 - 2.0 * c1 + 1.0, s2 - 2.0 * s1)],
                wp,
            )
        }
        Structure::PD => {
            let z = Complex::new(c1, s1);
            ([z, zero, Complex::new(c1 - 1.0, s1)], z)
        }
        Structure::PI => {
            let zm1 = Complex::new(c1 - 1.0, s1);
            ([zm1, Complex::new(c1, s1), zero], zm1)
        }
        Structure::P => ([Complex::new(1.0, 0.0), zero, zero], Complex::new(1.0, 0.0)),
    }
}

/// Real and imaginary parts of the characteristic equation at
/// `z = e^{j theta}`, regrouped by gain.
///
/// With `N = num(z)`, `D = den(z)` and the structure basis above, row 0 is
/// the real part and row 1 the imaginary part of
/// `N (kp Wp + ki Wi + kd Wd) = -D Dc`.
pub fn characteristic_rows(plant: &TransferFunction, structure: Structure, theta: f64) -> LinearRows {
    let z = unit(theta);
    let n = plant.num().eval(z);
    let d = plant.den().eval(z);
    let (w, dc) = structure_basis_on_circle(structure, theta);
    let mut a = [[0.0; 3]; 2];
    for (g, wg) in w.iter().enumerate() {
        a[0][g] = n.re * wg.re - n.im * wg.im;
        a[1][g] = n.re * wg.im + n.im * wg.re;
    }
    let b = [-(d.re * dc.re - d.im * dc.im), -(d.re * dc.im + d.im * dc.re)];
    LinearRows { a, b }
}

/// Controller `C(e^{j theta})` per unit gain: `1`, `z/(z-1)`, `(z-1)/z`.
///
/// `z/(z-1) = (1 - cos - j sin) / ((cos - 1)^2 + sin^2)` and
/// `(z-1)/z = (1 - cos) + j sin`.
pub fn controller_basis_on_circle(theta: f64) -> [Complex; 3] {
    let (c, s) = (theta.cos(), theta.sin());
    let q = (c - 1.0) * (c - 1.0) + s * s;
    [
        Complex::new(1.0, 0.0),
        Complex::new((1.0 - c) / q, -s / q),
        Complex::new(1.0 - c, s),
    ]
}

/// Rows of `C(e^{j theta}) G(e^{j theta}) = target`, regrouped by gain.
/// `None` when `G` has a pole at this angle or is numerically zero.
pub fn loop_target_rows(plant: &TransferFunction, theta: f64, target: Complex) -> Option<LinearRows> {
    let g = plant.eval_unit_circle(theta).ok()?;
    if g.norm() < MIN_PLANT_GAIN {
        return None;
    }
    Some(loop_rows_from_value(g, theta, target))
}

fn loop_rows_from_value(g: Complex, theta: f64, target: Complex) -> LinearRows {
    let basis = controller_basis_on_circle(theta);
    let mut a = [[0.0; 3]; 2];
    for (k, c) in basis.iter().enumerate() {
        let gc = g * c;
        a[0][k] = gc.re;
        a[1][k] = gc.im;
    }
    LinearRows {
        a,
        b: [target.re, target.im],
    }
}

/// Outcome of one 2x2 solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PlaneSolution {
    Point([f64; 2]),
    /// Consistent singular system: the line `point + t * direction`.
    Line { point: [f64; 2], direction: [f64; 2] },
    Inconsistent,
}

pub(crate) fn solve_plane(a: [[f64; 2]; 2], b: [f64; 2]) -> PlaneSolution {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let fro2 = a[0][0].powi(2) + a[0][1].powi(2) + a[1][0].powi(2) + a[1][1].powi(2);
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((fro2 + disc) / 2.0).sqrt();
    let smin = if smax > 0.0 { det.abs() / smax } else { 0.0 };
    if smax > 0.0 && smin > SINGULAR_TOL * smax {
        let x = (b[0] * a[1][1] - a[0][1] * b[1]) / det;
        let y = (a[0][0] * b[1] - b[0] * a[1][0]) / det;
        return PlaneSolution::Point([x, y]);
    }
    // rank of [A : b] through its three 2x2 minors (Cauchy-Binet)
    let m13 = a[0][0] * b[1] - a[1][0] * b[0];
    let m23 = a[0][1] * b[1] - a[1][1] * b[0];
    let gram_tr = fro2 + b[0] * b[0] + b[1] * b[1];
    let gram_det = det * det + m13 * m13 + m23 * m23;
    let s1 = ((gram_tr + (gram_tr * gram_tr - 4.0 * gram_det).max(0.0).sqrt()) / 2.0).sqrt();
    let s2 = if s1 > 0.0 { gram_det.sqrt() / s1 } else { 0.0 };
    if smax == 0.0 || s2 > SINGULAR_TOL * s1 {
        return PlaneSolution::Inconsistent;
    }
    let r = if a[0][0].hypot(a[0][1]) >= a[1][0].hypot(a[1][1]) { 0 } else { 1 };
    let (u, v) = (a[r][0], a[r][1]);
    let n2 = u * u + v * v;
    let nn = n2.sqrt();
    PlaneSolution::Line {
        point: [u * b[r] / n2, v * b[r] / n2],
        direction: [-v / nn, u / nn],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Complex root boundary: a root on the unit circle at `e^{j theta}`.
    Crb,
    /// Real root boundary at `z = +1`.
    RrbPlusOne,
    /// Real root boundary at `z = -1`.
    RrbMinusOne,
    Pm,
    Gm,
    Ms,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Crb => "CRB",
            BoundaryKind::RrbPlusOne => "RRB_z_plus1",
            BoundaryKind::RrbMinusOne => "RRB_z_minus1",
            BoundaryKind::Pm => "PM",
            BoundaryKind::Gm => "GM",
            BoundaryKind::Ms => "MS",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            BoundaryKind::Crb,
            BoundaryKind::RrbPlusOne,
            BoundaryKind::RrbMinusOne,
            BoundaryKind::Pm,
            BoundaryKind::Gm,
            BoundaryKind::Ms,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub theta_l: Option<f64>,
}

/// A straight line of solutions in plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: [f64; 2],
    /// Unit direction.
    pub direction: [f64; 2],
    pub theta: f64,
}

/// A real root boundary that is not a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// The characteristic polynomial vanishes at the point for every gain.
    RootAlways,
    /// It never vanishes there for gains on this plane.
    RootNever,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    PlantPole,
    PlantGainZero,
    Singular,
    SmallSine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub kind: BoundaryKind,
    /// PM in degrees, GM in dB, the generating angle for MS curves, 0 otherwise.
    pub constraint_value: f64,
    pub points: Vec<BoundaryPoint>,
    pub singular_segments: Vec<Line>,
    pub degenerate: Option<Degeneracy>,
    /// Angles that produced no point.
    pub skipped: Vec<(f64, SkipReason)>,
}

impl BoundaryCurve {
    fn empty(kind: BoundaryKind, constraint_value: f64) -> Self {
        Self {
            kind,
            constraint_value,
            points: Vec::new(),
            singular_segments: Vec::new(),
            degenerate: None,
            skipped: Vec::new(),
        }
    }

    fn push_solution(
        &mut self,
        plane: &GainPlane,
        sample_time: f64,
        sol: PlaneSolution,
        theta: f64,
        theta_l: Option<f64>,
    ) {
        match sol {
            PlaneSolution::Point(p) => {
                let [x, y] = plane.to_plane_units(p, sample_time);
                if x.is_finite() && y.is_finite() {
                    self.points.push(BoundaryPoint { x, y, theta, theta_l });
                }
            }
            PlaneSolution::Line { point, direction } => {
                let point = plane.to_plane_units(point, sample_time);
                let d = plane.to_plane_units(direction, sample_time);
                let n = d[0].hypot(d[1]);
                self.singular_segments.push(Line {
                    point,
                    direction: [d[0] / n, d[1] / n],
                    theta,
                });
            }
            PlaneSolution::Inconsistent => self.skipped.push((theta, SkipReason::Singular)),
        }
    }
}

fn check_inputs(plant: &TransferFunction, plane: &GainPlane, grid: &[f64]) -> Result<f64> {
    let t = plant.ensure_discrete()?;
    plane.validate()?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if plant.num().is_zero() {
        return Err(Error::ZeroPlant);
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("angle grid"));
    }
    Ok(t)
}

/// Complex root boundary: gains placing a closed-loop root at `e^{j theta}`
/// for each angle of `theta_grid`. Plant poles on the unit circle need no
/// special treatment since `G` itself is never evaluated.
pub fn stability_crb(plant: &TransferFunction, plane: &GainPlane, theta_grid: &[f64]) -> Result<BoundaryCurve> {
    let t = check_inputs(plant, plane, theta_grid)?;
    let mut curve = BoundaryCurve::empty(BoundaryKind::Crb, 0.0);
    for &theta in theta_grid {
        let rows = characteristic_rows(plant, plane.structure, theta);
        let (a, b) = plane.restrict(&rows, t);
        curve.push_solution(plane, t, solve_plane(a, b), theta, None);
    }
    Ok(curve)
}

/// Real root boundaries at `z = +1` and `z = -1`.
///
/// Each is one real equation `c0 + sum_g cg kg = 0` from the characteristic
/// polynomial at the point. For the PID structure at `z = -1` this is
/// `2 den(-1) + num(-1) (2 kp + ki + 4 kd) = 0`; at `z = +1` it is
/// `num(1) ki = 0`.
pub fn stability_rrb(plant: &TransferFunction, plane: &GainPlane) -> Result<[BoundaryCurve; 2]> {
    let t = plant.ensure_discrete()?;
    plane.validate()?;
    if plant.num().is_zero() {
        return Err(Error::ZeroPlant);
    }
    let make = |z: f64, kind: BoundaryKind| -> BoundaryCurve {
        let theta = if z > 0.0 { 0.0 } else { PI };
        let mut curve = BoundaryCurve::empty(kind, 0.0);
        let n = plant.num().eval_real(z);
        let d = plant.den().eval_real(z);
        let s = plane.structure;
        let coef: [f64; 3] = Gain::ALL.map(|g| n * s.basis(g).eval_real(z));
        let c0 = d * s.denominator().eval_real(z);

        let f = plane.factors(t);
        let ax = coef[plane.x_axis.index()] * f[0];
        let ay = coef[plane.y_axis.index()] * f[1];
        let rhs = -(c0 + coef[plane.fixed_axis().index()] * plane.fixed_value * f[2]);
        let scale = plant.num().max_abs_coeff().max(plant.den().max_abs_coeff());
        let tiny = 1e-12 * scale.max(1.0);
        if ax.abs() <= tiny && ay.abs() <= tiny {
            curve.degenerate = Some(if rhs.abs() <= tiny {
                Degeneracy::RootAlways
            } else {
                Degeneracy::RootNever
            });
            return curve;
        }
        let n2 = ax * ax + ay * ay;
        let nn = n2.sqrt();
        curve.singular_segments.push(Line {
            point: [ax * rhs / n2, ay * rhs / n2],
            direction: [-ay / nn, ax / nn],
            theta,
        });
        curve
    };
    Ok([
        make(1.0, BoundaryKind::RrbPlusOne),
        make(-1.0, BoundaryKind::RrbMinusOne),
    ])
}

fn frequency_boundary(
    plant: &TransferFunction,
    plane: &GainPlane,
    theta_grid: &[f64],
    kind: BoundaryKind,
    value: f64,
    target: Complex,
) -> Result<BoundaryCurve> {
    let t = check_inputs(plant, plane, theta_grid)?;
    let mut curve = BoundaryCurve::empty(kind, value);
    for &theta in theta_grid {
        match plant.eval_unit_circle(theta) {
            Err(_) => {
                curve.skipped.push((theta, SkipReason::PlantPole));
                continue;
            }
            Ok(g) if g.norm() < MIN_PLANT_GAIN => {
                curve.skipped.push((theta, SkipReason::PlantGainZero));
                continue;
            }
            Ok(_) => {}
        }
        let rows = loop_target_rows(plant, theta, target).expect("checked above");
        let (a, b) = plane.restrict(&rows, t);
        curve.push_solution(plane, t, solve_plane(a, b), theta, None);
    }
    Ok(curve)
}

/// Loop value at the gain crossover for phase margin `pm_deg`:
/// `e^{j(PM - pi)} = -cos PM - j sin PM`.
pub fn pm_target(pm_deg: f64) -> Complex {
    let pm = pm_deg.to_radians();
    Complex::new(-pm.cos(), -pm.sin())
}

/// Loop value at the phase crossover for gain margin `gm_db`: `-10^{-GM/20}`.
pub fn gm_target(gm_db: f64) -> Complex {
    Complex::new(-(10f64.powf(-gm_db / 20.0)), 0.0)
}

/// Gains for which the loop crosses unit magnitude at `theta` with phase
/// margin exactly `pm_deg`.
pub fn pm_boundary(plant: &TransferFunction, plane: &GainPlane, pm_deg: f64, theta_grid: &[f64]) -> Result<BoundaryCurve> {
    if !(pm_deg > 0.0 && pm_deg < 180.0) {
        return Err(Error::InvalidSpec(format!("phase margin {pm_deg} outside (0, 180) degrees")));
    }
    frequency_boundary(plant, plane, theta_grid, BoundaryKind::Pm, pm_deg, pm_target(pm_deg))
}

/// Gains for which the loop crosses -180 degrees at `theta` with gain margin
/// exactly `gm_db`.
pub fn gm_boundary(plant: &TransferFunction, plane: &GainPlane, gm_db: f64, theta_grid: &[f64]) -> Result<BoundaryCurve> {
    if !(gm_db.is_finite() && gm_db >= 0.0) {
        return Err(Error::InvalidSpec(format!("gain margin {gm_db} dB must be finite and >= 0")));
    }
    frequency_boundary(plant, plane, theta_grid, BoundaryKind::Gm, gm_db, gm_target(gm_db))
}

/// Phase and gain margin requirements. `pm_max = 180` is no upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MarginSpec {
    /// Degrees.
    pub pm_min: Option<f64>,
    /// Degrees.
    pub pm_max: Option<f64>,
    /// Decibels.
    pub gm_min: Option<f64>,
}

impl MarginSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.pm_min {
            if !(p > 0.0 && p < 180.0) {
                return Err(Error::InvalidSpec(format!("pm_min {p} outside (0, 180)")));
            }
        }
        if let Some(p) = self.pm_max {
            if !(p > 0.0 && p <= 180.0) {
                return Err(Error::InvalidSpec(format!("pm_max {p} outside (0, 180]")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.pm_min, self.pm_max) {
            if lo >= hi {
                return Err(Error::InvalidSpec(format!("pm_min {lo} >= pm_max {hi}")));
            }
        }
        if let Some(g) = self.gm_min {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::InvalidSpec(format!("gm_min {g} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn constrains_pm(&self) -> bool {
        self.pm_min.is_some() || self.pm_max.is_some_and(|p| p < 180.0)
    }

    pub fn constrains_gm(&self) -> bool {
        self.gm_min.is_some()
    }

    /// Boundary levels to draw: the PM bounds that are below 180 degrees.
    pub fn pm_levels(&self) -> Vec<f64> {
        [self.pm_min, self.pm_max.filter(|p| *p < 180.0)]
            .into_iter()
            .flatten()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRole {
    Sensitivity,
    Complementary,
}

/// First-order weight parameters: low-frequency level `l`, high-frequency
/// level `h` and corner frequency `omega` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub l: f64,
    pub h: f64,
    pub omega: f64,
    pub role: WeightRole,
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h.is_finite()
            && self.h > 0.0
            && self.omega.is_finite()
            && self.omega > 0.0
            && self.l.is_finite()
            && match self.role {
                WeightRole::Sensitivity => self.l > 0.0,
                WeightRole::Complementary => self.l >= 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "weight {self:?} needs h > 0, omega > 0 and a stable pole"
            )))
        }
    }
}

/// Continuous weight of a spec.
///
/// Sensitivity: `W_S(s) = (s + omega h) / (h (s + omega l))`, the inverse of
/// `h (s + omega l)/(s + omega h)`, so `|W_S(0)| = 1/l` and `|W_S(inf)| = 1/h`.
/// Complementary: `W_T(s) = h (s + omega l) / (s + omega h)`.
pub fn weight_tf(spec: &WeightSpec) -> Result<TransferFunction> {
    spec.validate()?;
    let WeightSpec { l, h, omega, role } = *spec;
    match role {
        WeightRole::Sensitivity => TransferFunction::continuous(&[1.0 / h, omega], &[1.0, omega * l]),
        WeightRole::Complementary => TransferFunction::continuous(&[h, h * omega * l], &[1.0, omega * h]),
    }
}

/// Discrete sensitivity and complementary-sensitivity weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    pub sensitivity: TransferFunction,
    pub complementary: TransferFunction,
}

impl WeightPair {
    pub fn new(sensitivity: TransferFunction, complementary: TransferFunction) -> Result<Self> {
        let ts = sensitivity.ensure_discrete()?;
        let tt = complementary.ensure_discrete()?;
        if (ts - tt).abs() > 1e-12 * ts.max(tt) {
            return Err(Error::SampleTimeMismatch(ts, tt));
        }
        Ok(Self {
            sensitivity,
            complementary,
        })
    }

    /// Builds both weights from their specs and discretizes them by
    /// zero-order hold at `sample_time`.
    pub fn from_specs(ws: &WeightSpec, wt: &WeightSpec, sample_time: f64) -> Result<Self> {
        if ws.role != WeightRole::Sensitivity || wt.role != WeightRole::Complementary {
            return Err(Error::InvalidSpec("weight roles must be (sensitivity, complementary)".into()));
        }
        Self::new(
            weight_tf(ws)?.c2d_zoh(sample_time)?,
            weight_tf(wt)?.c2d_zoh(sample_time)?,
        )
    }

    pub fn sample_time(&self) -> f64 {
        self.sensitivity.sample_time().expect("discrete by construction")
    }

    /// `(|W_S(e^{j theta})|, |W_T(e^{j theta})|)`.
    pub fn magnitudes(&self, theta: f64) -> Result<(f64, f64)> {
        Ok((
            self.sensitivity.eval_unit_circle(theta)?.norm(),
            self.complementary.eval_unit_circle(theta)?.norm(),
        ))
    }
}

/// Nonnegative magnitudes `x = |L|` with `ws + wt x = |1 + x e^{j theta_l}|`,
/// ascending.
///
/// Squaring gives `(1 - wt^2) x^2 + 2 (cos theta_l - ws wt) x + (1 - ws^2) = 0`
/// with discriminant (over 4) `cos^2 + ws^2 + wt^2 - 2 ws wt cos - 1`. Both
/// sides of the unsquared equation are nonnegative, so every nonnegative root
/// of the quadratic solves it. `wt = 1` leaves the linear equation.
pub fn ms_magnitude_solutions(ws: f64, wt: f64, theta_l: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(ws.is_finite() && wt.is_finite() && theta_l.is_finite()) || ws < 0.0 || wt < 0.0 {
        return out;
    }
    let c = theta_l.cos();
    let qa = 1.0 - wt * wt;
    let qb = c - ws * wt; // half the linear coefficient
    let qc = 1.0 - ws * ws;
    let accept = |x: f64, out: &mut Vec<f64>| {
        if x.is_finite() && x >= 0.0 {
            out.push(x);
        }
    };
    if qa.abs() <= 1e-12 {
        if qb != 0.0 {
            accept(-qc / (2.0 * qb), &mut out);
        }
        return out;
    }
    let delta = c * c + ws * ws + wt * wt - 2.0 * ws * wt * c - 1.0;
    if delta < 0.0 {
        return out;
    }
    let sq = delta.sqrt();
    // stable pairing of the two roots of qa x^2 + 2 qb x + qc
    let q = -(qb + qb.signum() * sq);
    let (r1, r2) = if q != 0.0 {
        (q / qa, qc / q)
    } else {
        let r = -qb / qa;
        (r, r)
    };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    accept(lo, &mut out);
    if delta > 0.0 {
        accept(hi, &mut out);
    }
    out
}

/// Mixed-sensitivity boundary curves, one per frequency of `theta_grid`.
///
/// At each `theta` the magnitudes `|W_S|`, `|W_T|` and the plant value are
/// evaluated; every `theta_l` with real solutions gives target loop values
/// `L = |L| e^{j theta_l}` that are mapped back to gains. Points of the
/// smaller-magnitude branch are listed in `theta_l` order followed by the
/// larger branch reversed, so each curve traces a closed contour.
pub fn ms_boundary(
    plant: &TransferFunction,
    weights: &WeightPair,
    plane: &GainPlane,
    theta_grid: &[f64],
    theta_l_grid: &[f64],
) -> Result<Vec<BoundaryCurve>> {
    let t = check_inputs(plant, plane, theta_grid)?;
    if theta_l_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let tw = weights.sample_time();
    if (tw - t).abs() > 1e-12 * t {
        return Err(Error::SampleTimeMismatch(t, tw));
    }
    let mut curves = Vec::new();
    for &theta in theta_grid {
        if theta.sin().abs() < MIN_SIN_THETA {
            continue;
        }
        let g = match plant.eval_unit_circle(theta) {
            Ok(g) if g.norm() >= MIN_PLANT_GAIN => g,
            _ => continue,
        };
        let Ok((ws, wt)) = weights.magnitudes(theta) else {
            continue;
        };
        let mut curve = BoundaryCurve::empty(BoundaryKind::Ms, theta);
        let mut upper = BoundaryCurve::empty(BoundaryKind::Ms, theta);
        for &theta_l in theta_l_grid {
            let mags = ms_magnitude_solutions(ws, wt, theta_l);
            for (branch, m) in mags.iter().enumerate() {
                let rows = loop_rows_from_value(g, theta, Complex::from_polar(*m, theta_l));
                let (a, b) = plane.restrict(&rows, t);
                let target = if branch == 0 { &mut curve } else { &mut upper };
                target.push_solution(plane, t, solve_plane(a, b), theta, Some(theta_l));
            }
        }
        upper.points.reverse();
        curve.points.extend(upper.points);
        curve.singular_segments.extend(upper.singular_segments);
        curve.skipped.extend(upper.skipped);
        if !curve.points.is_empty() || !curve.singular_segments.is_empty() {
            curves.push(curve);
        }
    }
    Ok(curves)
}

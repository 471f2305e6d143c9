//! Rational transfer functions, zero-order-hold discretization and the
//! digital PID controller `C(z) = kp + ki z/(z-1) + kd (z-1)/z`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

// float methods come from libm when built without std
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::{Complex, Error, Polynomial, Result};

/// Denominator magnitude below which a unit-circle evaluation is treated as
/// hitting a pole.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDomain {
    Continuous,
    Discrete { sample_time: f64 },
}

/// `num(x) / den(x)` in `s` or `z`. The denominator is stored monic.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
    domain: TimeDomain,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial, domain: TimeDomain) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if let TimeDomain::Discrete { sample_time } = domain {
            if !(sample_time.is_finite() && sample_time > 0.0) {
                return Err(Error::InvalidSampleTime(sample_time));
            }
        }
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
            domain,
        })
    }

    pub fn continuous(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(
            Polynomial::from_slice(num)?,
            Polynomial::from_slice(den)?,
            TimeDomain::Continuous,
        )
    }

    pub fn discrete(num: &[f64], den: &[f64], sample_time: f64) -> Result<Self> {
        Self::new(
            Polynomial::from_slice(num)?,
            Polynomial::from_slice(den)?,
            TimeDomain::Discrete { sample_time },
        )
    }

    /// Static gain `k` in the given domain.
    pub fn gain(k: f64, domain: TimeDomain) -> Result<Self> {
        Self::new(Polynomial::constant(k), Polynomial::one(), domain)
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn sample_time(&self) -> Option<f64> {
        match self.domain {
            TimeDomain::Discrete { sample_time } => Some(sample_time),
            TimeDomain::Continuous => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.domain, TimeDomain::Discrete { .. })
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn ensure_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::Improper {
                num: self.num.degree(),
                den: self.den.degree(),
            })
        }
    }

    pub fn ensure_discrete(&self) -> Result<f64> {
        self.sample_time().ok_or(Error::WrongDomain { expected: "discrete" })
    }

    pub fn poles(&self) -> Result<Vec<Complex>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        self.den.roots()
    }

    /// Value at an arbitrary complex point; `None` at a pole.
    pub fn eval(&self, x: Complex) -> Option<Complex> {
        let d = self.den.eval(x);
        if d.norm() <= POLE_TOL {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// `G(e^{j theta})` for a discrete transfer function.
    pub fn eval_unit_circle(&self, theta: f64) -> Result<Complex> {
        self.ensure_discrete()?;
        self.eval(unit(theta)).ok_or(Error::PoleOnUnitCircle { theta })
    }

    /// `|G(jw)|` limit as `w -> inf` for a proper continuous transfer function.
    pub fn high_frequency_gain(&self) -> f64 {
        if self.num.degree() == self.den.degree() && !self.num.is_zero() {
            self.num.leading() / self.den.leading()
        } else {
            0.0
        }
    }

    /// Series connection `self * other`. Domains must agree.
    pub fn series(&self, other: &TransferFunction) -> Result<Self> {
        check_same_domain(self.domain, other.domain)?;
        Self::new(&self.num * &other.num, &self.den * &other.den, self.domain)
    }

    /// Exact zero-order-hold equivalent with sample time `t`.
    ///
    /// The plant is realized in controllable canonical form and the augmented
    /// matrix `[[A, B], [0, 0]] T` is exponentiated, which handles repeated
    /// poles (such as a double integrator) exactly. The discrete polynomials
    /// come from the Faddeev-LeVerrier recursion on `(Ad, Bd, C, D)`.
    pub fn c2d_zoh(&self, t: f64) -> Result<Self> {
        if self.is_discrete() {
            return Err(Error::WrongDomain { expected: "continuous" });
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidSampleTime(t));
        }
        self.ensure_proper()?;
        let domain = TimeDomain::Discrete { sample_time: t };
        let n = self.den.degree();
        if n == 0 {
            return Self::new(self.num.clone(), self.den.clone(), domain);
        }

        let den = self.den.coeffs();
        let num = self.num.padded(n + 1);
        let d = num[0];

        let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
        for j in 0..n {
            aug[(0, j)] = -den[j + 1] * t;
        }
        for i in 1..n {
            aug[(i, i - 1)] = t;
        }
        aug[(0, n)] = t;
        let e = linalg::expm(&aug);

        let ad = e.view((0, 0), (n, n)).into_owned();
        let bd = DVector::from_iterator(n, (0..n).map(|i| e[(i, n)]));
        let c = DVector::from_iterator(n, (0..n).map(|i| num[i + 1] - d * den[i + 1]));
        let (num_d, den_d) = linalg::ss_to_tf(&ad, &bd, &c, d);
        Self::new(Polynomial::new(num_d)?, Polynomial::new(den_d)?, domain)
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.is_discrete() { "z" } else { "s" };
        write!(
            f,
            "({}) / ({})",
            format_poly(&self.num, var),
            format_poly(&self.den, var)
        )
    }
}

fn format_poly(p: &Polynomial, var: &str) -> alloc::string::String {
    let n = p.degree();
    let mut out = alloc::string::String::new();
    for (i, c) in p.coeffs().iter().enumerate() {
        if *c == 0.0 && n > 0 {
            continue;
        }
        let pow = n - i;
        let term = match pow {
            0 => format!("{c}"),
            1 => format!("{c} {var}"),
            _ => format!("{c} {var}^{pow}"),
        };
        if !out.is_empty() {
            out.push_str(" + ");
        }
        out.push_str(&term);
    }
    out
}

fn check_same_domain(a: TimeDomain, b: TimeDomain) -> Result<()> {
    match (a, b) {
        (TimeDomain::Continuous, TimeDomain::Continuous) => Ok(()),
        (TimeDomain::Discrete { sample_time: x }, TimeDomain::Discrete { sample_time: y }) => {
            if (x - y).abs() <= 1e-12 * x.abs().max(y.abs()) {
                Ok(())
            } else {
                Err(Error::SampleTimeMismatch(x, y))
            }
        }
        _ => Err(Error::WrongDomain {
            expected: "matching time domain",
        }),
    }
}

/// `e^{j theta}`.
pub fn unit(theta: f64) -> Complex {
    Complex::new(theta.cos(), theta.sin())
}

/// One of the three PID gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gain {
    Kp,
    Ki,
    Kd,
}

impl Gain {
    pub const ALL: [Gain; 3] = [Gain::Kp, Gain::Ki, Gain::Kd];

    pub fn name(self) -> &'static str {
        match self {
            Gain::Kp => "kp",
            Gain::Ki => "ki",
            Gain::Kd => "kd",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Gain::Kp => 0,
            Gain::Ki => 1,
            Gain::Kd => 2,
        }
    }
}

impl fmt::Display for Gain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    P,
    PI,
    PD,
    PID,
}

impl Structure {
    pub fn has(self, gain: Gain) -> bool {
        match gain {
            Gain::Kp => true,
            Gain::Ki => matches!(self, Structure::PI | Structure::PID),
            Gain::Kd => matches!(self, Structure::PD | Structure::PID),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Structure::P => "P",
            Structure::PI => "PI",
            Structure::PD => "PD",
            Structure::PID => "PID",
        }
    }

    /// Controller denominator with structurally absent poles cancelled:
    /// `z(z-1)` for PID, `z` for PD, `z-1` for PI, `1` for P.
    pub fn denominator(self) -> Polynomial {
        let c: &[f64] = match self {
            Structure::PID => &[1.0, -1.0, 0.0],
            Structure::PD => &[1.0, 0.0],
            Structure::PI => &[1.0, -1.0],
            Structure::P => &[1.0],
        };
        Polynomial::from_slice(c).expect("static coefficients")
    }

    /// Numerator polynomial multiplying `gain` over [`Self::denominator`].
    /// Zero for gains the structure does not contain.
    pub fn basis(self, gain: Gain) -> Polynomial {
        let c: &[f64] = match (self, gain) {
            (Structure::PID, Gain::Kp) => &[1.0, -1.0, 0.0],
            (Structure::PID, Gain::Ki) => &[1.0, 0.0, 0.0],
            (Structure::PID, Gain::Kd) => &[1.0, -2.0, 1.0],
            (Structure::PD, Gain::Kp) => &[1.0, 0.0],
            (Structure::PD, Gain::Kd) => &[1.0, -1.0],
            (Structure::PI, Gain::Kp) => &[1.0, -1.0],
            (Structure::PI, Gain::Ki) => &[1.0, 0.0],
            (Structure::P, Gain::Kp) => &[1.0],
            _ => &[0.0],
        };
        Polynomial::from_slice(c).expect("static coefficients")
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P" => Ok(Structure::P),
            "PI" => Ok(Structure::PI),
            "PD" => Ok(Structure::PD),
            "PID" => Ok(Structure::PID),
            other => Err(Error::InvalidSpec(format!("unknown controller structure {other:?}"))),
        }
    }
}

/// Units the user-facing gains are expressed in.
///
/// `Standard` is the controller exactly as written above. `SampleTime` uses
/// `kp + ki T z/(z-1) + (kd/T)(z-1)/z`, i.e. integral and derivative gains in
/// continuous-time units; it converts to `Standard` by `ki * T` and `kd / T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GainScaling {
    #[default]
    Standard,
    SampleTime,
}

impl GainScaling {
    /// Multiplier taking a gain in these units to standard units.
    pub fn factor(self, gain: Gain, sample_time: f64) -> f64 {
        match (self, gain) {
            (GainScaling::Standard, _) | (GainScaling::SampleTime, Gain::Kp) => 1.0,
            (GainScaling::SampleTime, Gain::Ki) => sample_time,
            (GainScaling::SampleTime, Gain::Kd) => 1.0 / sample_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub structure: Structure,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64, structure: Structure) -> Result<Self> {
        let g = Self {
            kp,
            ki,
            kd,
            structure,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn pd(kp: f64, kd: f64) -> Self {
        Self {
            kp,
            ki: 0.0,
            kd,
            structure: Structure::PD,
        }
    }

    pub fn pi(kp: f64, ki: f64) -> Self {
        Self {
            kp,
            ki,
            kd: 0.0,
            structure: Structure::PI,
        }
    }

    pub fn pid(kp: f64, ki: f64, kd: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            structure: Structure::PID,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for gain in Gain::ALL {
            let v = self.get(gain);
            if !v.is_finite() {
                return Err(Error::InvalidGains(format!("{gain} is not finite")));
            }
            if !self.structure.has(gain) && v != 0.0 {
                return Err(Error::InvalidGains(format!(
                    "{gain} = {v} but the {} structure has no {gain} term",
                    self.structure
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, gain: Gain) -> f64 {
        match gain {
            Gain::Kp => self.kp,
            Gain::Ki => self.ki,
            Gain::Kd => self.kd,
        }
    }

    pub fn set(&mut self, gain: Gain, value: f64) {
        match gain {
            Gain::Kp => self.kp = value,
            Gain::Ki => self.ki = value,
            Gain::Kd => self.kd = value,
        }
    }

    /// Converts gains given in `scaling` units to standard units.
    pub fn to_standard(&self, scaling: GainScaling, sample_time: f64) -> Self {
        let mut out = *self;
        for g in Gain::ALL {
            out.set(g, self.get(g) * scaling.factor(g, sample_time));
        }
        out
    }

    pub fn from_standard(&self, scaling: GainScaling, sample_time: f64) -> Self {
        let mut out = *self;
        for g in Gain::ALL {
            out.set(g, self.get(g) / scaling.factor(g, sample_time));
        }
        out
    }

    /// Controller numerator over [`Structure::denominator`].
    pub fn numerator(&self) -> Polynomial {
        Gain::ALL.iter().fold(Polynomial::zero(), |acc, &g| {
            &acc + &self.structure.basis(g).scale(self.get(g))
        })
    }
}

/// Discrete controller `C(z)` for standard-unit gains.
pub fn pid_tf(gains: &PidGains, sample_time: f64) -> Result<TransferFunction> {
    gains.validate()?;
    TransferFunction::new(
        gains.numerator(),
        gains.structure.denominator(),
        TimeDomain::Discrete { sample_time },
    )
}

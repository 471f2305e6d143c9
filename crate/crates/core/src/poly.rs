//! Real-coefficient polynomials, stored highest degree first.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::linalg;
use crate::{Complex, Error, Result};

/// Iteration cap handed to the Schur decomposition of the companion matrix.
const SCHUR_MAX_ITER: usize = 10_000;
/// Normalized residual a returned root must reach.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;
const POLISH_STEPS: usize = 8;

/// Real polynomial `c[0] x^n + c[1] x^(n-1) + ... + c[n]`.
///
/// Leading zeros are stripped on construction. The zero polynomial is the
/// single coefficient `[0.0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyPolynomial);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        Ok(Self::from_vec_unchecked(coeffs))
    }

    pub fn from_slice(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.to_vec())
    }

    fn from_vec_unchecked(mut coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|c| *c != 0.0);
        match first {
            Some(0) => {}
            Some(i) => {
                coeffs.drain(..i);
            }
            None => coeffs = vec![0.0],
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `x - root`.
    pub fn linear_root(root: f64) -> Self {
        Self::from_vec_unchecked(vec![1.0, -root])
    }

    /// Monic polynomial with the given roots. Imaginary parts of the product
    /// are dropped, so complex roots must come in conjugate pairs.
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut acc = vec![Complex::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex::zero(); acc.len() + 1];
            for (i, c) in acc.iter().enumerate() {
                next[i] += *c;
                next[i + 1] -= *c * *r;
            }
            acc = next;
        }
        Self::from_vec_unchecked(acc.into_iter().map(|c| c.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Coefficients padded with leading zeros to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len.saturating_sub(self.coeffs.len())];
        out.extend_from_slice(&self.coeffs);
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_vec_unchecked(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Divides every coefficient by the leading one.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(1.0 / self.leading())
    }

    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero();
        }
        Self::from_vec_unchecked(
            self.coeffs[..n]
                .iter()
                .enumerate()
                .map(|(i, c)| c * (n - i) as f64)
                .collect(),
        )
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .fold(Complex::zero(), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative at `z` in one Horner pass.
    fn eval_with_derivative(&self, z: Complex) -> (Complex, Complex) {
        let mut p = Complex::zero();
        let mut dp = Complex::zero();
        for &c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Residual scaled as `|p(r)| / (max|c| * max(1, |r|)^n)`.
    pub fn normalized_residual(&self, r: Complex) -> f64 {
        let scale = self.max_abs_coeff() * r.norm().max(1.0).powi(self.degree() as i32);
        if scale == 0.0 {
            return 0.0;
        }
        self.eval(r).norm() / scale
    }

    /// All roots with multiplicity.
    ///
    /// Eigenvalues of the balanced companion matrix, polished by Newton steps
    /// on the original coefficients. Complex roots of the real input are
    /// returned as exact conjugate pairs.
    pub fn roots(&self) -> Result<Vec<Complex>> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::NoRoots);
        }
        let trailing = self.coeffs.iter().rev().take_while(|c| **c == 0.0).count();
        let mut roots = vec![Complex::zero(); trailing];
        let reduced = Self::from_vec_unchecked(self.coeffs[..self.coeffs.len() - trailing].to_vec());
        let m = reduced.degree();
        if m == 0 {
            return Ok(roots);
        }
        if m == 1 {
            roots.push(Complex::new(-reduced.coeffs[1] / reduced.coeffs[0], 0.0));
            return Ok(roots);
        }

        let lead = reduced.coeffs[0];
        let mut companion = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            companion[(0, j)] = -reduced.coeffs[j + 1] / lead;
        }
        for i in 1..m {
            companion[(i, i - 1)] = 1.0;
        }
        linalg::balance(&mut companion);

        let schur = nalgebra::linalg::Schur::try_new(companion, f64::EPSILON, SCHUR_MAX_ITER)
            .ok_or(Error::RootsNotConverged {
                degree: m,
                iterations: SCHUR_MAX_ITER,
            })?;
        let eigs = schur.complex_eigenvalues();

        let n_pos = eigs.iter().filter(|e| e.im > 0.0).count();
        let n_neg = eigs.iter().filter(|e| e.im < 0.0).count();
        if n_pos == n_neg {
            for e in eigs.iter() {
                if e.im > 0.0 {
                    let r = reduced.polish(*e);
                    roots.push(r);
                    roots.push(r.conj());
                } else if e.im == 0.0 {
                    let r = reduced.polish(*e);
                    roots.push(Complex::new(r.re, 0.0));
                }
            }
        } else {
            roots.extend(eigs.iter().map(|e| reduced.polish(*e)));
        }

        if roots
            .iter()
            .any(|r| !r.re.is_finite() || !r.im.is_finite() || self.normalized_residual(*r) > ROOT_RESIDUAL_TOL)
        {
            return Err(Error::RootsNotConverged {
                degree: n,
                iterations: SCHUR_MAX_ITER,
            });
        }
        Ok(roots)
    }

    fn polish(&self, start: Complex) -> Complex {
        let mut r = start;
        let mut best = self.eval(r).norm();
        for _ in 0..POLISH_STEPS {
            let (p, dp) = self.eval_with_derivative(r);
            if dp.norm() == 0.0 || best == 0.0 {
                break;
            }
            let cand = r - p / dp;
            let res = self.eval(cand).norm();
            if !(res < best) {
                break;
            }
            r = cand;
            best = res;
        }
        if start.im == 0.0 {
            r.im = 0.0;
        }
        r
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let a = self.padded(len);
        let b = rhs.padded(len);
        Polynomial::from_vec_unchecked(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_vec_unchecked(out)
    }
}

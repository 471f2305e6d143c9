//! Small dense-matrix helpers on top of nalgebra: balancing, the matrix
//! exponential and state-space to polynomial conversion.

use alloc::vec;
use alloc::vec::Vec;

// float methods come from libm when built without std
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};

const RADIX: f64 = 2.0;

/// Parlett-Reinsch diagonal balancing in place. Preserves eigenvalues and
/// the zero pattern (so Hessenberg input stays Hessenberg).
pub(crate) fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Matrix exponential by scaling and squaring with a [6/6] Padé
/// approximant (Golub & Van Loan, Algorithm 11.3.1).
pub(crate) fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm.log2().floor() as i32 + 2).max(0) as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);

    const Q: usize = 6;
    let eye = DMatrix::<f64>::identity(n, n);
    let mut c = 0.5;
    let mut x = scaled.clone();
    let mut num = &eye + &scaled * c;
    let mut den = &eye - &scaled * c;
    let mut positive = true;
    for k in 2..=Q {
        c *= (Q - k + 1) as f64 / (k * (2 * Q - k + 1)) as f64;
        x = &scaled * &x;
        num += &x * c;
        if positive {
            den += &x * c;
        } else {
            den -= &x * c;
        }
        positive = !positive;
    }
    let mut f = den.lu().solve(&num).unwrap_or(num);
    for _ in 0..squarings {
        f = &f * &f;
    }
    f
}

/// Transfer function coefficients of the single-input single-output
/// realization `(a, b, c, d)`, via Faddeev-LeVerrier.
///
/// Returns `(numerator, denominator)`, both of length `n + 1`, highest
/// degree first; the denominator is monic.
pub(crate) fn ss_to_tf(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    d: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut den = vec![0.0; n + 1];
    let mut num = vec![0.0; n + 1];
    den[0] = 1.0;
    num[0] = d;
    // adj(zI - A) = sum_k N_k z^(n-1-k)
    let mut nk = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        num[k] = c.dot(&(&nk * b));
        let an = a * &nk;
        let ck = -an.trace() / k as f64;
        den[k] = ck;
        num[k] += d * ck;
        nk = an + DMatrix::<f64>::identity(n, n) * ck;
    }
    (num, den)
}

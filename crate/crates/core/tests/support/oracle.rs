//! Reference computations kept independent of the library's code paths.
//!
//! * OLS via explicit normal equations `(X'X)^-1 X'y` with Gauss-Jordan
//!   inversion and textbook standard errors.
//! * Student's t tails via the hypergeometric power series of the incomplete
//!   beta function, with exact log-gamma at half-integers.

#![allow(dead_code)]

/// `ln Gamma(m / 2)` for a positive integer `m`, from factorial identities.
pub fn ln_gamma_half(m: u64) -> f64 {
    assert!(m > 0);
    if m.is_multiple_of(2) {
        // Gamma(k) = (k - 1)!
        (1..m / 2).map(|i| (i as f64).ln()).sum()
    } else {
        // Gamma(k + 1/2) = (2k)! / (4^k k!) * sqrt(pi)
        let k = (m - 1) / 2;
        let ln_2k_fact: f64 = (1..=2 * k).map(|i| (i as f64).ln()).sum();
        let ln_k_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
        ln_2k_fact - (k as f64) * 4f64.ln() - ln_k_fact + 0.5 * std::f64::consts::PI.ln()
    }
}

/// `I_x(a, b)` with `a = a2 / 2`, `b = b2 / 2`, by power series.
pub fn inc_beta_series(a2: u64, b2: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > 0.5 {
        // Use the complement only when the result is at least 1/2, so the
        // subtraction cannot cancel.
        let complement = inc_beta_series(b2, a2, 1.0 - x);
        if complement <= 0.5 {
            return 1.0 - complement;
        }
    }
    let (a, b) = (a2 as f64 / 2.0, b2 as f64 / 2.0);
    let ln_beta = ln_gamma_half(a2) + ln_gamma_half(b2) - ln_gamma_half(a2 + b2);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut n = 0.0;
    loop {
        term *= x * (a + b + n) / (a + 1.0 + n);
        sum += term;
        n += 1.0;
        if term < 1e-18 * sum || n > 1e8 {
            break;
        }
    }
    (a * x.ln() + b * (1.0 - x).ln() - ln_beta).exp() / a * sum
}

/// Two-sided Student's t tail `P(|T| > t)`.
pub fn t_tail_two_sided(t: f64, df: u64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df as f64 / (df as f64 + t * t);
    inc_beta_series(df, 1, x)
}

fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

pub struct OracleFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
}

/// OLS with intercept via explicit normal equations.
pub fn ols_normal_equations(x: &[Vec<f64>], y: &[f64]) -> OracleFit {
    let n = y.len();
    let design: Vec<Vec<f64>> = x.iter().map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect()).collect();
    let p = design[0].len();
    let xtx: Vec<Vec<f64>> =
        (0..p).map(|i| (0..p).map(|j| design.iter().map(|r| r[i] * r[j]).sum()).collect()).collect();
    let xty: Vec<f64> = (0..p).map(|i| design.iter().zip(y).map(|(r, v)| r[i] * v).sum()).collect();
    let inv = invert(xtx);
    let coef: Vec<f64> = (0..p).map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum()).collect();
    let rss: f64 = design
        .iter()
        .zip(y)
        .map(|(r, v)| {
            let fit: f64 = r.iter().zip(&coef).map(|(a, b)| a * b).sum();
            (v - fit).powi(2)
        })
        .sum();
    let df = n - p;
    let s2 = rss / df as f64;
    let se: Vec<f64> = (0..p).map(|i| (s2 * inv[i][i]).sqrt()).collect();
    let t: Vec<f64> = coef.iter().zip(&se).map(|(b, s)| b / s).collect();
    let pv = t.iter().map(|t| t_tail_two_sided(t.abs(), df as u64)).collect();
    OracleFit { coef, se, t, p: pv }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

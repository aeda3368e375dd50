//! Special functions and small numerical kernels.

/// B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta ζ(s, a) = Σ_{k≥0} (a+k)^{-s} for s > 1, a > 0, by Euler–Maclaurin.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1, a > 0");
    let shift = if a < 16.0 { (16.0 - a).ceil() as usize } else { 0 };
    let mut direct = 0.0;
    for k in (0..shift).rev() {
        direct += (a + k as f64).powf(-s);
    }
    let x = a + shift as f64;
    let mut sum = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    let mut rising = s;
    let mut xpow = x.powf(-s - 1.0);
    let mut factorial = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / factorial * rising * xpow;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + k - 1.0) * (s + k);
        xpow /= x * x;
        factorial *= (k + 1.0) * (k + 2.0);
    }
    direct + sum
}

pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// Polynomial extrapolation of `(h, value)` samples to h = 0 (Neville).
/// Returns the estimate and the change from dropping the oldest sample.
pub fn extrapolate_to_zero(h: &[f64], values: &[f64]) -> (f64, f64) {
    assert_eq!(h.len(), values.len());
    let n = h.len();
    assert!(n > 0);
    let neville = |lo: usize| {
        let mut p: Vec<f64> = values[lo..].to_vec();
        let xs = &h[lo..];
        for level in 1..p.len() {
            for i in 0..p.len() - level {
                let (xi, xj) = (xs[i], xs[i + level]);
                p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
            }
        }
        p[0]
    };
    let full = neville(0);
    let reduced = if n > 1 { neville(1) } else { full };
    (full, (full - reduced).abs())
}

/// Composite Simpson rule on [a, b] with `panels` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

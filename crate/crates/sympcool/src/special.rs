//! Small special-function kit: Bessel J₀/J₁ and Gauss-Legendre nodes.
//!
//! The micromotion diagnostics need J₀ and J₁ only on |x| ≲ 2.4 (up to the
//! first zero of J₀), where the ascending power series converges rapidly in
//! f64. The recoil-averaging quadrature needs Gauss-Legendre nodes of modest
//! order. Both are short, deterministic routines kept here rather than pulled
//! in as an extra dependency.

/// First positive zero of J₀ — the validity edge for the fluorescence-ratio
/// inversion.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Bessel function of the first kind, order 0, by ascending series.
///
/// Accurate to ~1e-15 relative for |x| ≤ 8, which comfortably covers the
/// micromotion-modulation arguments (|k·u| < 2.405) this crate evaluates.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// Bessel function of the first kind, order 1, by ascending series.
pub fn bessel_j1(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..200 {
        term *= q / ((k * (k + 1)) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on Pₙ with the Chebyshev-angle initial guess; standard
/// textbook construction, exact for polynomials of degree ≤ 2n−1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th root of P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P'_n(x) by upward recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // derivative from the recurrence relation
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Associated Laguerre polynomial L_k^α(x) by the stable three-term
/// recurrence (k+1)L_{k+1}^α = (2k+1+α−x)L_k^α − (k+α)L_{k−1}^α.
pub fn laguerre_assoc(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for m in 1..k {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - x) * cur - (mf + alpha) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

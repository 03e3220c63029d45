//! Independent oracles shared by unit and integration tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    // Split first so narrow features are not skipped by the first estimate.
    let pieces = 64;
    let step = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * step;
            let hi = lo + step;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(fa, fm, fb, lo, hi);
            recurse(&f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// Explicit product-sum form of the generalized recursion started at `r0`:
/// `r_n = Σ_k Π_{j>k}(1 - γ_j Z_j) γ_k W_k + Π_j (1 - γ_j Z_j) r0`,
/// with `Z_k = h_k⁻¹K((x - X_k)/h_k)` and `W_k = Y_k Z_k`. Returns every
/// iterate r_1..r_n. Quadratic in n by construction.
pub fn unrolled_iterates(
    history: &[(f64, f64)],
    x: f64,
    gamma: impl Fn(u64) -> f64,
    h: impl Fn(u64) -> f64,
    kernel: impl Fn(f64) -> f64,
    r0: f64,
) -> Vec<f64> {
    let z: Vec<f64> = history
        .iter()
        .enumerate()
        .map(|(i, &(xi, _))| {
            let hk = h(i as u64 + 1);
            kernel((x - xi) / hk) / hk
        })
        .collect();
    (1..=history.len())
        .map(|n| {
            let factor = |k: usize| 1.0 - gamma(k as u64) * z[k - 1];
            let mut total = r0 * (1..=n).map(factor).product::<f64>();
            for k in 1..=n {
                let tail: f64 = (k + 1..=n).map(factor).product();
                total += tail * gamma(k as u64) * history[k - 1].1 * z[k - 1];
            }
            total
        })
        .collect()
}

/// `Σ q_k r_k / Σ q_k` over a stored list of iterates.
pub fn weighted_average(iterates: &[f64], q: impl Fn(u64) -> f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, r) in iterates.iter().enumerate() {
        let w = q(i as u64 + 1);
        num += w * r;
        den += w;
    }
    num / den
}

//! Shared numerical kernels: log-sum-exp and the monotone exponential-mixture root.

/// `ln Σ exp(xᵢ)` with max-shift; `−∞` for an empty or all-`−∞` input.
pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + xs.into_iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Term `exp(log_coef − rate·q)` of a decreasing exponential mixture.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExpTerm {
    pub log_coef: f64,
    pub rate: f64,
}

/// Solves `Σ exp(log_coefⱼ − rateⱼ·q) = exp(log_target)` for `q`.
///
/// `q ↦ ln Σ(..)` is strictly decreasing and convex, so Newton started at
/// the largest single-term root (which lies left of the root) increases
/// monotonically to the solution. Bisection on a guaranteed bracket is
/// the fallback.
pub(crate) fn solve_exp_mixture(terms: &[ExpTerm], log_target: f64) -> f64 {
    debug_assert!(!terms.is_empty());
    let single_root = |t: &ExpTerm, shift: f64| (t.log_coef - log_target + shift) / t.rate;
    let lo = terms.iter().map(|t| single_root(t, 0.0)).fold(f64::NEG_INFINITY, f64::max);
    let n_ln = (terms.len() as f64).ln();
    let hi = terms.iter().map(|t| single_root(t, n_ln)).fold(f64::NEG_INFINITY, f64::max);
    if terms.len() == 1 || hi - lo <= 0.0 {
        return lo;
    }

    let eval = |q: f64| -> (f64, f64) {
        let max = terms.iter().map(|t| t.log_coef - t.rate * q).fold(f64::NEG_INFINITY, f64::max);
        let (mut s, mut ds) = (0.0, 0.0);
        for t in terms {
            let e = (t.log_coef - t.rate * q - max).exp();
            s += e;
            ds += t.rate * e;
        }
        (max + s.ln() - log_target, -ds / s)
    };

    let mut q = lo;
    for _ in 0..100 {
        let (f, df) = eval(q);
        if f.abs() <= 1e-15 {
            return q;
        }
        let next = q - f / df;
        if !next.is_finite() || next < lo || next > hi {
            break;
        }
        if (next - q).abs() <= 1e-15 * (1.0 + q.abs()) {
            return next;
        }
        q = next;
    }

    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if eval(mid).0 > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

//! Small numerical utilities used to cross-check the closed forms:
//! adaptive quadrature, bracketed 1-D minimization, and bisection.

use std::cell::Cell;

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// `rel_tol` is interpreted against the running integral's magnitude (with a
/// tiny absolute floor so integrals near zero terminate). Recursion depth is
/// capped; the cap is generous enough for the sharply peaked resonances this
/// crate deals with.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    assert!(b >= a, "integration bounds must be ordered");
    assert!(rel_tol > 0.0);
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    // Two passes: the first is anchored to the coarse whole-interval probe,
    // which can badly over- or under-shoot a sharply peaked integrand; the
    // second re-runs with the tolerance anchored to the refined value. Each
    // pass carries an evaluation budget so a rounding-noise-dominated
    // integrand degrades accuracy instead of recursing without bound.
    let scale = whole.abs().max(1e-300);
    let budget = Cell::new(EVAL_BUDGET);
    let first = adapt(f, a, b, fa, fm, fb, whole, rel_tol * scale, 60, &budget);
    budget.set(EVAL_BUDGET);
    adapt(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        rel_tol * first.abs().max(1e-300),
        60,
        &budget,
    )
}

const EVAL_BUDGET: u64 = 50_000_000;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &Cell<u64>,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let remaining = budget.get();
    budget.set(remaining.saturating_sub(2));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || remaining < 2 || err.abs() <= 15.0 * tol {
        // Richardson correction: Simpson halving gains a factor 16.
        left + right + err / 15.0
    } else {
        adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)
            + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)
    }
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns (argmin, min). `x_tol` is absolute on the argument.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    assert!(b > a);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Bisection root of `f` on a bracketing interval `[a, b]`
/// (`f(a)` and `f(b)` of opposite sign), to absolute tolerance `x_tol`.
pub fn bisect_root<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, x_tol: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo.signum() != fhi.signum(),
        "bisection requires a sign change on the bracket"
    );
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

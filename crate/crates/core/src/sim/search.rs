//! Derivative-free univariate minimization.

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Only interior points are evaluated. Stops once the bracket is no wider
/// than `tolerance` and returns the best point seen.
pub fn golden_section_minimize<F>(mut f: F, mut lo: f64, mut hi: f64, tolerance: f64) -> GoldenResult
where
    F: FnMut(f64) -> f64,
{
    assert!(lo < hi && tolerance > 0.0, "need lo < hi and a positive tolerance");
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;

    while hi - lo > tolerance {
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
        evaluations += 1;
    }

    if f1 <= f2 {
        GoldenResult {
            x: x1,
            fx: f1,
            evaluations,
        }
    } else {
        GoldenResult {
            x: x2,
            fx: f2,
            evaluations,
        }
    }
}

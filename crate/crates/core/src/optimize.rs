//! Scalar maximization on a bracket.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Stops once the bracket is narrower than `rel_tol · max(1, |x|)`.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..500 {
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        if f1 >= f2 {
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
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid scan over `[lo, hi]` followed by golden-section refinement around
/// the best grid point. Non-finite values of `f` count as −∞.
pub fn bracketed_max<F>(f: F, lo: f64, hi: f64, grid: usize, rel_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let g = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            y
        } else {
            f64::NEG_INFINITY
        }
    };
    let grid = grid.max(2);
    let step = (hi - lo) / grid as f64;
    let (best_k, _) = (0..=grid)
        .map(|k| (k, g(lo + step * k as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, (k, y)| if y > acc.1 { (k, y) } else { acc });
    let a = lo + step * best_k.saturating_sub(1) as f64;
    let b = (lo + step * (best_k + 1) as f64).min(hi);
    let (x, y) = golden_section_max(g, a, b, rel_tol);
    // Endpoints of the bracket are not probed by the golden search.
    [(lo, g(lo)), (hi, g(hi)), (lo + step * best_k as f64, g(lo + step * best_k as f64))]
        .into_iter()
        .fold((x, y), |acc, c| if c.1 > acc.1 { c } else { acc })
}

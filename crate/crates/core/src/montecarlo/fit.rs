/// Least-squares fit of `log2 e_ℓ = intercept − λ̂ ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub lambda_hat: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
    pub used_levels: Vec<u32>,
}

/// Levels whose stderr exceeds this fraction of the error are left out.
pub const MAX_RELATIVE_STDERR: f64 = 0.25;
pub const MIN_FIT_LEVELS: usize = 3;

/// Unweighted fit over `(level, error)` pairs; `None` with fewer than three
/// points.
pub fn fit_order(points: &[(u32, f64)]) -> Option<OrderFit> {
    if points.len() < MIN_FIT_LEVELS || points.iter().any(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_stderr = (sse / (n - 2.0) / sxx).sqrt();
    Some(OrderFit {
        lambda_hat: -slope,
        intercept,
        r2,
        slope_stderr,
        used_levels: points.iter().map(|p| p.0).collect(),
    })
}

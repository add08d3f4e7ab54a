//! Ordinary least squares on a line.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub intercept: T,
    pub slope: T,
    pub r_squared: T,
}

/// Fit `y = a + b x`. `None` with fewer than two points or degenerate `x`.
pub fn linear_fit<T: Real>(pts: &[(T, T)]) -> Option<LinearFit<T>> {
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: T = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if !(sxx > T::zero()) {
        return None;
    }
    let slope = sxy / sxx;
    // a perfectly flat series is explained exactly
    let r_squared = if syy > T::zero() {
        sxy * sxy / (sxx * syy)
    } else {
        T::one()
    };
    Some(LinearFit {
        intercept: my - slope * mx,
        slope,
        r_squared,
    })
}

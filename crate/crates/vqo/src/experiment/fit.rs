//! Log-log power-law fits for scaling checks.

use crate::error::{Error, Result};

/// Least-squares exponent and `r²` of `y = c·x^a` over `(x, y)` points.
///
/// Needs at least three distinct positive `x` values.
pub fn fit_powerlaw(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| a == b);
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs ≥ 3 distinct x values, got {}",
            xs.len()
        )));
    }
    if points.iter().any(|(x, y)| *x <= 0.0 || *y <= 0.0) {
        return Err(Error::InvalidArgument(
            "power-law fit needs positive coordinates".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::Numeric("degenerate x spread in power-law fit".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r2 = if ss_tot <= 1e-30 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_quadratic() {
        let points: Vec<(f64, f64)> = (1..=8).map(|k| (k as f64, (k * k) as f64)).collect();
        let (slope, r2) = fit_powerlaw(&points).unwrap();
        assert!((slope - 2.0).abs() <= 1e-6);
        assert!(r2 >= 1.0 - 1e-12);
    }

    #[test]
    fn flat_series_has_near_zero_exponent() {
        let points = vec![(1.0, 3.0), (2.0, 3.0), (4.0, 3.0), (8.0, 3.0)];
        let (slope, _) = fit_powerlaw(&points).unwrap();
        assert!(slope.abs() <= 1e-12);
    }

    #[test]
    fn needs_three_distinct_points() {
        assert!(fit_powerlaw(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_powerlaw(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(fit_powerlaw(&[(1.0, 1.0), (2.0, -2.0), (3.0, 3.0)]).is_err());
    }
}

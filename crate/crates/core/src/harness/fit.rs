//! Least-squares fits, relaxation curves and dynamic-exponent collapse.

use serde::Serialize;

use super::HarnessError;

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the linearised fit.
    pub residual: f64,
    /// Inclusive `x` range of the points actually used.
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Chord length `(L/π) sin(πℓ/L)`.
pub fn chord_length(l: usize, ell: usize) -> f64 {
    let lf = l as f64;
    lf / std::f64::consts::PI * (std::f64::consts::PI * ell as f64 / lf).sin()
}

fn in_window(x: f64, window: Option<(f64, f64)>) -> bool {
    window.is_none_or(|(lo, hi)| x >= lo && x <= hi)
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<FitResult, HarnessError> {
    if points.len() < 4 {
        return Err(HarnessError::Fit(format!("need at least 4 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(HarnessError::Fit("degenerate abscissae".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult { slope, intercept, residual, window: (lo, hi), n_points: points.len() })
}

/// Fit `y = slope·ln x + intercept` over `x` in `window`.
pub fn fit_log_slope(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FitResult, HarnessError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && in_window(p.0, window))
        .map(|&(x, y)| (x.ln(), y))
        .collect();
    let mut f = linear_fit(&pts)?;
    f.window = (f.window.0.exp(), f.window.1.exp());
    Ok(f)
}

/// Fit `ln y = slope·ln x + intercept`, skipping non-positive `y`.
pub fn fit_power_law(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FitResult, HarnessError> {
    let logy: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    fit_log_slope(&logy, window)
}

/// Fit `y ∝ exp(-slope·x)`; the returned `slope` is the decay rate.
pub fn fit_exponential_tail(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FitResult, HarnessError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0 && in_window(p.0, window))
        .map(|&(x, y)| (x, y.ln()))
        .collect();
    let mut f = linear_fit(&pts)?;
    f.slope = -f.slope;
    Ok(f)
}

/// Default temporal window: drop `t < 4` and the last quarter of the record.
pub fn default_time_window(times: &[f64]) -> Option<(f64, f64)> {
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    (hi > lo).then(|| (lo.max(4.0), lo + 0.75 * (hi - lo)))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Saturation {
    Auto,
    Value(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxationCurve {
    /// `(τ, |S(t) − S_∞|)` with `τ = t / L^z`
    pub points: Vec<(f64, f64)>,
    pub s_inf: f64,
    pub warnings: Vec<String>,
}

/// Distance to saturation of a time series `(t, S)`. With [`Saturation::Auto`]
/// the saturation value is the mean over the last 10% of recorded times, and
/// a warning is raised if those values spread by more than 10% or the record
/// ends before `4 L^z`.
pub fn relaxation_curve(series: &[(f64, f64)], l: usize, z: f64, s_inf: Saturation) -> Result<RelaxationCurve, HarnessError> {
    if series.is_empty() {
        return Err(HarnessError::Fit("empty series".into()));
    }
    let mut warnings = Vec::new();
    let scale = (l as f64).powf(z);
    let s_inf = match s_inf {
        Saturation::Value(v) if v.is_finite() => v,
        Saturation::Value(v) => return Err(HarnessError::Fit(format!("saturation value {v} is not finite"))),
        Saturation::Auto => {
            let k = (series.len() / 10).max(1);
            let tail: Vec<f64> = series[series.len() - k..].iter().map(|p| p.1).collect();
            let mean = tail.iter().sum::<f64>() / k as f64;
            let spread = tail.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - tail.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            if spread > 0.1 * mean.abs() {
                warnings.push(format!("saturation estimate spread {spread:.3e} exceeds 10% of {mean:.3e}"));
            }
            let last = series[series.len() - 1].0;
            if last < 4.0 * scale {
                warnings.push(format!("record ends at t={last}, before 4 L^z = {}", 4.0 * scale));
            }
            mean
        }
    };
    let points = series.iter().map(|&(t, s)| (t / scale, (s - s_inf).abs())).collect();
    Ok(RelaxationCurve { points, s_inf, warnings })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseScan {
    pub best_z: f64,
    /// `(z, mismatch)` for every trial exponent.
    pub quality: Vec<(f64, f64)>,
}

fn interp(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    let i = curve.partition_point(|p| p.0 < x);
    if i == 0 {
        return (curve[0].0 == x).then_some(curve[0].1);
    }
    if i == curve.len() {
        return None;
    }
    let (a, b) = (curve[i - 1], curve[i]);
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

/// Mean squared mismatch of `ln δS` between all pairs of curves after
/// rescaling time by `L^z`, compared on a log-time axis over their overlap.
pub fn collapse_mismatch(curves: &[(usize, Vec<(f64, f64)>)], z: f64) -> f64 {
    let scaled: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|(l, pts)| {
            let mut v: Vec<(f64, f64)> = pts
                .iter()
                .filter(|p| p.0 > 0.0 && p.1 > 0.0)
                .map(|&(t, d)| ((t / (*l as f64).powf(z)).ln(), d.ln()))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
        .collect();
    let (mut total, mut count) = (0.0, 0usize);
    for i in 0..scaled.len() {
        for j in 0..scaled.len() {
            if i == j || scaled[i].is_empty() || scaled[j].len() < 2 {
                continue;
            }
            for &(x, y) in &scaled[i] {
                if let Some(yj) = interp(&scaled[j], x) {
                    total += (y - yj).powi(2);
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        f64::INFINITY
    } else {
        total / count as f64
    }
}

/// Pick the dynamic exponent from `z_grid` that best collapses the curves.
pub fn scan_collapse_z(curves: &[(usize, Vec<(f64, f64)>)], z_grid: &[f64]) -> Result<CollapseScan, HarnessError> {
    if curves.len() < 2 {
        return Err(HarnessError::Fit("collapse needs at least two system sizes".into()));
    }
    let quality: Vec<(f64, f64)> = z_grid.iter().map(|&z| (z, collapse_mismatch(curves, z))).collect();
    let best = quality
        .iter()
        .filter(|q| q.1.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| HarnessError::Fit("no overlapping rescaled curves".into()))?;
    Ok(CollapseScan { best_z: best.0, quality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chord_limits() {
        assert!((chord_length(100, 50) - 100.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((chord_length(1000, 3) - 3.0).abs() < 1e-3);
    }

    #[test]
    fn exponential_tail_recovers_rate() {
        let pts: Vec<(f64, f64)> = (0..40).map(|t| (t as f64, 3.0 * (-0.25 * t as f64).exp())).collect();
        let f = fit_exponential_tail(&pts, Some((5.0, 30.0))).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-12);
        assert_eq!(f.window, (5.0, 30.0));
        assert!(fit_exponential_tail(&pts, Some((100.0, 200.0))).is_err());
    }

    #[test]
    fn relaxation_auto_saturation() {
        let series: Vec<(f64, f64)> = (0..400).map(|t| (t as f64, 2.0 - (-(t as f64) / 5.0).exp())).collect();
        let c = relaxation_curve(&series, 50, 1.0, Saturation::Auto).unwrap();
        assert!((c.s_inf - 2.0).abs() < 1e-6);
        assert!(c.warnings.is_empty());
        assert_eq!(c.points[100].0, 2.0);
        let c = relaxation_curve(&series[..150], 50, 1.0, Saturation::Auto).unwrap();
        assert!(!c.warnings.is_empty());
        let flat = relaxation_curve(&[(1.0, 3.0); 20], 4, 1.0, Saturation::Auto).unwrap();
        assert!(flat.points.iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn inverse_tau_has_unit_slope() {
        let l = 64;
        let series: Vec<(f64, f64)> = (1..64).map(|t| (t as f64, 5.0 - l as f64 / t as f64)).collect();
        let c = relaxation_curve(&series, l, 1.0, Saturation::Value(5.0)).unwrap();
        let f = fit_power_law(&c.points, None).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!(fit_log_slope(&[(1.0, 0.0), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], None).is_err());
    }

    #[test]
    fn collapse_finds_planted_exponent() {
        let z_true = 1.5;
        let curves: Vec<(usize, Vec<(f64, f64)>)> = [16usize, 32, 64]
            .iter()
            .map(|&l| {
                let pts = (1..2000).map(|t| (t as f64, (-(t as f64) / (l as f64).powf(z_true)).exp())).collect();
                (l, pts)
            })
            .collect();
        let grid: Vec<f64> = (0..=30).map(|k| 0.5 + 0.05 * k as f64).collect();
        let scan = scan_collapse_z(&curves, &grid).unwrap();
        assert!((scan.best_z - z_true).abs() < 0.051, "{}", scan.best_z);
    }

    proptest! {
        #[test]
        fn log_slope_is_exact_on_noiseless_data(a in -3.0f64..3.0, b in -5.0f64..5.0) {
            let pts: Vec<(f64, f64)> = (1..30).map(|x| (x as f64, a * (x as f64).ln() + b)).collect();
            let f = fit_log_slope(&pts, None).unwrap();
            prop_assert!((f.slope - a).abs() < 1e-9 && (f.intercept - b).abs() < 1e-9);
            prop_assert!(f.residual < 1e-9);
        }

        #[test]
        fn power_law_is_scale_invariant(a in -2.0f64..0.0, c in 0.1f64..10.0) {
            let pts: Vec<(f64, f64)> = (1..50).map(|x| (x as f64, c * (x as f64).powf(a))).collect();
            let f = fit_power_law(&pts, Some((2.0, 40.0))).unwrap();
            prop_assert!((f.slope - a).abs() < 1e-9);
        }
    }
}

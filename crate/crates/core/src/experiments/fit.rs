use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares slope of `log e` against `log β`, negated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit {
    pub p: f64,
    /// Half-width of the 95% confidence interval on `p`.
    pub width: f64,
    pub intercept: f64,
    pub count: usize,
}

// two-sided 97.5% Student t quantiles, df = 1..=30
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
    2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

fn t_quantile(df: usize) -> f64 {
    T975.get(df.wrapping_sub(1)).copied().unwrap_or(1.96)
}

/// Fits `e ≈ C β^{-p}` over the points with `β` in `[lo, hi]`.
///
/// Fewer than four usable points, or a single distinct `β`, is a [`Error::DegenerateFit`].
pub fn order_fit(points: &[(f64, f64)], window: (f64, f64)) -> Result<OrderFit> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(b, e)| *b >= lo && *b <= hi && *e > 0.0 && e.is_finite())
        .map(|(b, e)| (b.ln(), e.ln()))
        .collect();
    let k = pts.len();
    if k < 4 {
        return Err(Error::DegenerateFit(format!("{k} points in [{lo}, {hi}], need at least 4")));
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-12 * kf {
        return Err(Error::DegenerateFit("all points share one beta".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (sse / (kf - 2.0) / sxx).sqrt();
    Ok(OrderFit {
        p: -slope,
        width: t_quantile(k - 2) * se,
        intercept,
        count: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = (0..8).map(|i| {
            let b = 100.0 * 1.5f64.powi(i);
            (b, 3.0 * b.powf(-2.0))
        }).collect();
        let f = order_fit(&pts, (0.0, f64::INFINITY)).unwrap();
        assert!((f.p - 2.0).abs() < 1e-12);
        assert!(f.width < 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn window_filters_points() {
        let mut pts: Vec<_> = (0..6).map(|i| {
            let b = 200.0 * 1.4f64.powi(i);
            (b, b.powf(-1.0))
        }).collect();
        pts.push((50.0, 1.0));
        pts.push((9000.0, 1.0));
        let f = order_fit(&pts, (200.0, 2000.0)).unwrap();
        assert!((f.p - 1.0).abs() < 1e-12);
        assert_eq!(f.count, 6);
    }

    #[test]
    fn degenerate_inputs() {
        let few = [(100.0, 1.0), (200.0, 0.5), (300.0, 0.3)];
        assert!(matches!(order_fit(&few, (0.0, 1e9)), Err(Error::DegenerateFit(_))));
        let same = [(100.0, 1.0), (100.0, 0.5), (100.0, 0.3), (100.0, 0.2)];
        assert!(matches!(order_fit(&same, (0.0, 1e9)), Err(Error::DegenerateFit(_))));
    }

    proptest! {
        #[test]
        fn recovers_slope(p in 0.3f64..3.0, c in 1e-3f64..10.0, k in 4usize..12) {
            let pts: Vec<_> = (0..k).map(|i| {
                let b = 90.0 * 1.3f64.powi(i as i32);
                (b, c * b.powf(-p))
            }).collect();
            let f = order_fit(&pts, (0.0, f64::INFINITY)).unwrap();
            prop_assert!((f.p - p).abs() < 1e-9);
        }

        #[test]
        fn noisy_slope_inside_interval(noise in proptest::collection::vec(-0.02f64..0.02, 10)) {
            let pts: Vec<_> = noise.iter().enumerate().map(|(i, n)| {
                let b = 100.0 * 1.35f64.powi(i as i32);
                (b, b.powf(-2.0) * n.exp())
            }).collect();
            let f = order_fit(&pts, (0.0, f64::INFINITY)).unwrap();
            prop_assert!((f.p - 2.0).abs() < 0.1);
            prop_assert!(f.width > 0.0);
        }
    }
}

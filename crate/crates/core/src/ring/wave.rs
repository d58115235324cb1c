use super::sim::HeadwaySeries;
use crate::error::{Error, Result};

/// Minimum normalized correlation accepted as a coherent wave.
const MIN_PEAK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpeed {
    /// Phase speed; negative when the pattern moves against the vehicle index.
    pub c: f64,
    /// Time lag between neighbouring headways, `1/c`.
    pub lag: f64,
    /// Standard deviation of the per-vehicle lag estimates.
    pub dispersion: f64,
    /// Temporal period of the headway oscillation.
    pub time_period: f64,
    /// Number of waves on the circuit.
    pub wave_number: usize,
    pub peak: f64,
}

struct Centered {
    cols: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

fn centered(series: &HeadwaySeries) -> Centered {
    let nv = series.n_vehicles();
    let mut cols = Vec::with_capacity(nv);
    let mut norms = Vec::with_capacity(nv);
    for j in 0..nv {
        let col: Vec<f64> = series.headways.iter().map(|h| h[j]).collect();
        let m = col.iter().sum::<f64>() / col.len() as f64;
        let col: Vec<f64> = col.iter().map(|x| x - m).collect();
        norms.push(col.iter().map(|x| x * x).sum::<f64>().sqrt());
        cols.push(col);
    }
    Centered { cols, norms }
}

/// Normalized correlation of `a(τ)` with `b(τ + k Δ)` over the overlap.
fn corr(a: &[f64], b: &[f64], k: isize) -> f64 {
    let n = a.len() as isize;
    let (lo, hi) = (0.max(-k), n.min(n - k));
    if hi - lo < 2 {
        return 0.0;
    }
    let (mut s, mut sa, mut sb) = (0.0, 0.0, 0.0);
    for i in lo..hi {
        let (x, y) = (a[i as usize], b[(i + k) as usize]);
        s += x * y;
        sa += x * x;
        sb += y * y;
    }
    if sa == 0.0 || sb == 0.0 {
        0.0
    } else {
        s / (sa * sb).sqrt()
    }
}

/// Vertex offset in `(-1/2, 1/2)` of the parabola through three samples.
fn parabolic(ym: f64, y0: f64, yp: f64) -> f64 {
    let den = ym - 2.0 * y0 + yp;
    if den >= 0.0 {
        0.0
    } else {
        (0.5 * (ym - yp) / den).clamp(-0.5, 0.5)
    }
}

/// Speed of a developed wave from the lag between neighbouring headway series.
pub fn estimate_wave_speed(series: &HeadwaySeries) -> Result<WaveSpeed> {
    let nv = series.n_vehicles();
    let samples = series.times.len();
    let data = centered(series);
    if nv < 2 || samples < 8 || data.norms.iter().any(|&s| s <= 1e-12 * series.length) {
        return Err(Error::NoCoherentWave { peak: 0.0 });
    }
    let dt = series.dt_sample;
    let max_lag = (samples / 2) as isize;

    // Temporal period: strongest autocorrelation peak after the first zero crossing.
    let a0 = &data.cols[0];
    let auto: Vec<f64> = (0..=max_lag).map(|k| corr(a0, a0, k)).collect();
    let first_neg = auto.iter().position(|&x| x < 0.0).ok_or(Error::NoCoherentWave { peak: 0.0 })?;
    let global = auto[first_neg..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // First local maximum close to the global one; later peaks are multiples of the period.
    let kp = (first_neg.max(1)..auto.len() - 1)
        .find(|&k| auto[k] >= auto[k - 1] && auto[k] >= auto[k + 1] && auto[k] >= 0.9 * global)
        .unwrap_or(0);
    let peak_auto = auto[kp];
    if peak_auto < MIN_PEAK || kp == 0 || kp as isize >= max_lag {
        return Err(Error::NoCoherentWave { peak: peak_auto });
    }
    let kp_ref = kp as f64
        + parabolic(auto[kp - 1], auto[kp], *auto.get(kp + 1).unwrap_or(&auto[kp]));
    let time_period = kp_ref * dt;

    // Neighbour lag within half a period either side.
    let half = (kp / 2) as isize;
    let mut lags = Vec::with_capacity(nv);
    let mut peak_sum = 0.0;
    for j in 0..nv {
        let a = &data.cols[(j + 1) % nv];
        let b = &data.cols[j];
        let cs: Vec<f64> = (-half..=half).map(|k| corr(a, b, k)).collect();
        let (bi, bv) = cs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        let off = if bi > 0 && bi + 1 < cs.len() {
            parabolic(cs[bi - 1], cs[bi], cs[bi + 1])
        } else {
            0.0
        };
        lags.push((bi as f64 - half as f64 + off) * dt);
        peak_sum += bv;
    }
    let peak = peak_sum / nv as f64;
    if peak < MIN_PEAK {
        return Err(Error::NoCoherentWave { peak });
    }
    let lag = lags.iter().sum::<f64>() / nv as f64;
    let dispersion = (lags.iter().map(|x| (x - lag).powi(2)).sum::<f64>() / nv as f64).sqrt();
    if lag == 0.0 {
        return Err(Error::NoCoherentWave { peak });
    }
    let c = 1.0 / lag;
    let wave_number = (nv as f64 / (c.abs() * time_period)).round().max(1.0) as usize;
    Ok(WaveSpeed {
        c,
        lag,
        dispersion,
        time_period,
        wave_number,
        peak,
    })
}

#[derive(Debug, Clone)]
pub struct ExtractedProfile {
    pub period: f64,
    pub u: Vec<f64>,
    /// Standard deviation of the samples in each bin.
    pub scatter: Vec<f64>,
}

/// Bins every sample `Δx_j(τ)` at phase `(cτ + j) mod period` and averages per bin.
pub fn extract_profile(series: &HeadwaySeries, c: f64, period: f64, bins: usize) -> Result<ExtractedProfile> {
    if bins == 0 || !(period > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bins",
            value: bins as f64,
            reason: "need a positive bin count and period",
        });
    }
    let width = period / bins as f64;
    let mut sum = vec![0.0; bins];
    let mut sq = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (t, h) in series.times.iter().zip(&series.headways) {
        for (j, &d) in h.iter().enumerate() {
            // Bin centres sit on the grid points j * width.
            let phase = (c * t + j as f64).rem_euclid(period);
            let b = ((phase / width).round() as usize) % bins;
            sum[b] += d;
            sq[b] += d * d;
            count[b] += 1;
        }
    }
    let filled = count.iter().filter(|&&k| k > 0).count();
    if filled < bins {
        return Err(Error::InsufficientCoverage {
            fraction: filled as f64 / bins as f64,
        });
    }
    let u: Vec<f64> = sum.iter().zip(&count).map(|(s, &k)| s / k as f64).collect();
    let scatter = (0..bins)
        .map(|b| (sq[b] / count[b] as f64 - u[b] * u[b]).max(0.0).sqrt())
        .collect();
    Ok(ExtractedProfile { period, u, scatter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn synthetic(c: f64, sign: f64, period: f64, n: usize, t_end: f64, dt: f64) -> HeadwaySeries {
        let u = |t: f64| 0.025 + 0.015 * (2.0 * PI * t / period).sin().tanh() * 1.2;
        let times: Vec<f64> = (0..(t_end / dt) as usize).map(|k| k as f64 * dt).collect();
        let headways = times
            .iter()
            .map(|&t| (0..n).map(|j| u(c * t + sign * j as f64)).collect())
            .collect();
        HeadwaySeries {
            times,
            headways,
            dt_sample: dt,
            length: 1.0,
        }
    }

    #[test]
    fn recovers_speed_of_synthetic_wave() {
        let s = synthetic(0.93, 1.0, 40.0, 40, 400.0, 0.1);
        let w = estimate_wave_speed(&s).unwrap();
        assert!((w.c - 0.93).abs() / 0.93 < 0.005, "{w:?}");
        assert_eq!(w.wave_number, 1);
        let r = synthetic(0.93, -1.0, 40.0, 40, 400.0, 0.1);
        let w = estimate_wave_speed(&r).unwrap();
        assert!(w.c < 0.0 && (w.c + 0.93).abs() / 0.93 < 0.005, "{w:?}");
    }

    #[test]
    fn detects_multiple_waves() {
        let s = synthetic(0.9, 1.0, 40.0 / 3.0, 40, 300.0, 0.05);
        let w = estimate_wave_speed(&s).unwrap();
        assert_eq!(w.wave_number, 3);
        assert!((w.c - 0.9).abs() / 0.9 < 0.005);
    }

    #[test]
    fn constant_series_has_no_wave() {
        let s = HeadwaySeries {
            times: (0..100).map(|k| k as f64).collect(),
            headways: vec![vec![0.025; 10]; 100],
            dt_sample: 1.0,
            length: 0.25,
        };
        assert!(matches!(estimate_wave_speed(&s), Err(Error::NoCoherentWave { .. })));
        let p = extract_profile(&s, 1.0, 10.0, 10).unwrap();
        assert!(p.u.iter().all(|x| (x - 0.025).abs() < 1e-15));
    }

    #[test]
    fn extraction_recovers_synthetic_profile() {
        let s = synthetic(0.93, 1.0, 40.0, 40, 400.0, 0.05);
        let p = extract_profile(&s, 0.93, 40.0, 160).unwrap();
        let u = |t: f64| 0.025 + 0.015 * (2.0 * PI * t / 40.0).sin().tanh() * 1.2;
        let amp = 0.036;
        for (b, v) in p.u.iter().enumerate() {
            assert!((v - u(b as f64 * 0.25)).abs() < 0.01 * amp);
        }
        let short = synthetic(0.93, 1.0, 40.0, 4, 1.0, 0.5);
        assert!(matches!(extract_profile(&short, 0.93, 40.0, 400), Err(Error::InsufficientCoverage { .. })));
    }
}

//! Oscillation-frequency extraction from uniformly sampled signals:
//! Hann-windowed DFT with parabolic peak interpolation.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One spectral peak: angular frequency and (windowed) power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub omega: f64,
    pub power: f64,
}

/// Zero-padding factor applied before the FFT; pads the spectrum densely
/// enough for a stable parabolic refinement of the peak bin.
const PAD_FACTOR: usize = 8;

/// Estimates the dominant angular frequencies of a real signal sampled at
/// spacing `dt`. Returns up to `max_peaks` local spectral maxima sorted by
/// power (strongest first).
///
/// Fails when the signal is too short, constant, or no peak rises above the
/// spectral noise floor.
pub fn estimate_frequencies(
    signal: &[f64],
    dt: f64,
    max_peaks: usize,
) -> Result<Vec<SpectralPeak>> {
    if signal.len() < 8 {
        return Err(Error::Estimation(format!(
            "need at least 8 samples, got {}",
            signal.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("sample spacing must be positive".into()));
    }
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let variance = signal.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
    let scale = signal.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(1e-300);
    if variance <= 1e-24 * scale * scale {
        return Err(Error::Estimation(
            "signal is constant; no oscillation to estimate".into(),
        ));
    }

    // Hann window against leakage, then zero-pad.
    let padded = (n * PAD_FACTOR).next_power_of_two();
    let mut buf: Vec<C64> = Vec::with_capacity(padded);
    for (k, s) in signal.iter().enumerate() {
        let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos());
        buf.push(C64::new((s - mean) * w, 0.0));
    }
    buf.resize(padded, C64::ZERO);
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);

    let half = padded / 2;
    let power: Vec<f64> = buf[..half].iter().map(|c| c.norm_sqr()).collect();
    let max_power = power[1..].iter().fold(0.0f64, |m, &p| m.max(p));
    let median = {
        let mut sorted: Vec<f64> = power[1..].to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted[sorted.len() / 2]
    };
    // A genuine oscillation towers over the floor; a flat spectrum does not.
    if max_power < 30.0 * median.max(1e-300) {
        return Err(Error::Estimation("no dominant spectral peak".into()));
    }

    // Local maxima above a fraction of the strongest peak. The Hann main
    // lobe spans ~4 * PAD_FACTOR padded bins, so require separation.
    let min_sep = 2 * PAD_FACTOR;
    let mut peaks: Vec<(usize, f64)> = Vec::new();
    for k in 1..half - 1 {
        if power[k] > power[k - 1] && power[k] >= power[k + 1] && power[k] >= 1e-4 * max_power {
            if let Some(last) = peaks.last_mut() {
                if k - last.0 < min_sep {
                    if power[k] > last.1 {
                        *last = (k, power[k]);
                    }
                    continue;
                }
            }
            peaks.push((k, power[k]));
        }
    }
    if peaks.is_empty() {
        return Err(Error::Estimation("no dominant spectral peak".into()));
    }
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    peaks.truncate(max_peaks);

    let d_omega = 2.0 * std::f64::consts::PI / (padded as f64 * dt);
    let refined = peaks
        .into_iter()
        .map(|(k, p)| {
            let frac = if k > 0 && k + 1 < half {
                parabolic_offset(power[k - 1], power[k], power[k + 1])
            } else {
                0.0
            };
            SpectralPeak {
                omega: (k as f64 + frac) * d_omega,
                power: p,
            }
        })
        .collect();
    Ok(refined)
}

/// Vertex offset in [-1/2, 1/2] of the parabola through three equidistant
/// samples (log-magnitude fit).
fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let (a, b, c) = (
        left.max(1e-300).ln(),
        center.max(1e-300).ln(),
        right.max(1e-300).ln(),
    );
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-300 {
        0.0
    } else {
        0.5 * (a - c) / denom
    }
}

/// Detuning estimate from a doublon oscillation signal: the dominant
/// angular frequency is `delta (L - 1)`, so `delta = omega / (L - 1)`.
pub fn extract_detuning(signal: &[f64], dt: f64, sites: usize) -> Result<f64> {
    if sites < 2 {
        return Err(Error::InvalidParameter(
            "detuning extraction needs at least 2 sites".into(),
        ));
    }
    let peaks = estimate_frequencies(signal, dt, 1)?;
    Ok(peaks[0].omega / (sites as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled<F: Fn(f64) -> f64>(f: F, t_max: f64, n: usize) -> (Vec<f64>, f64) {
        let dt = t_max / n as f64;
        ((0..n).map(|k| f(k as f64 * dt)).collect(), dt)
    }

    #[test]
    fn single_tone_recovered_within_3_percent() {
        // (1/2)[1 - sin(0.3 (5-1) t + phi)] over ~3 periods.
        let delta = 0.3;
        let omega = delta * 4.0;
        let phi = 1.1;
        let t_max = 3.0 * 2.0 * std::f64::consts::PI / omega;
        let (sig, dt) = sampled(|t| 0.5 * (1.0 - (omega * t + phi).sin()), t_max, 96);
        let est = extract_detuning(&sig, dt, 5).unwrap();
        assert!(
            (est - delta).abs() <= 0.03 * delta,
            "estimated {est}, true {delta}"
        );
    }

    #[test]
    fn constant_signal_flags_estimation_failure() {
        let sig = vec![0.75; 64];
        assert!(matches!(
            extract_detuning(&sig, 0.1, 5),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn two_component_mixture_resolves_both_tones() {
        // Equal-weight mixture of lengths l = 10 and l' = 6 at delta = 0.3:
        // peaks at delta (l-1) = 2.7 and delta (l'-1) = 1.5.
        let (w1, w2) = (2.7, 1.5);
        let t_max = 8.0 * 2.0 * std::f64::consts::PI / w2;
        let (sig, dt) = sampled(
            |t| 0.5 * (1.0 - (w1 * t + 0.4).sin()) + 0.5 * (1.0 - (w2 * t + 2.0).sin()),
            t_max,
            512,
        );
        let peaks = estimate_frequencies(&sig, dt, 2).unwrap();
        assert_eq!(peaks.len(), 2);
        let mut omegas: Vec<f64> = peaks.iter().map(|p| p.omega).collect();
        omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((omegas[0] - w2).abs() <= 0.05 * w2, "low peak {}", omegas[0]);
        assert!((omegas[1] - w1).abs() <= 0.05 * w1, "high peak {}", omegas[1]);
    }
}

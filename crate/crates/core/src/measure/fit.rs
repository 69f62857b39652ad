use core::f64::consts::PI;

use crate::measure::spectrum::{extract_peaks, spectrum, Window};
use crate::sequences::SignalTrace;
use crate::{Error, Result};

/// `value ≈ offset + amplitude cos(2 pi frequency t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationFit {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// RMS of the fit residuals.
    pub residual: f64,
    /// Amplitude indistinguishable from the residual noise.
    pub flat: bool,
}

/// Linear least squares for offset, cosine and sine at fixed frequency.
/// Returns `(offset, a, b, rss)` for `offset + a cos + b sin`.
fn linear_fit(t: &[f64], y: &[f64], f: f64) -> (f64, f64, f64, f64) {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let ph = 2.0 * PI * f * ti;
        let row = nalgebra::Vector3::new(1.0, libm::cos(ph), libm::sin(ph));
        ata += row * row.transpose();
        aty += row * yi;
    }
    let Some(x) = ata.cholesky().map(|c| c.solve(&aty)) else {
        return (0.0, 0.0, 0.0, f64::INFINITY);
    };
    let rss = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let ph = 2.0 * PI * f * ti;
            let r = yi - x[0] - x[1] * libm::cos(ph) - x[2] * libm::sin(ph);
            r * r
        })
        .sum();
    (x[0], x[1], x[2], rss)
}

/// Least-squares cosine fit seeded by the strongest spectral line.
pub fn fit_modulation(trace: &SignalTrace) -> Result<ModulationFit> {
    let (t, y) = (&trace.abscissa[..], &trace.values[..]);
    let spec = spectrum(t, y, Window::Hann)?;
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let flat_result = |residual: f64| ModulationFit {
        frequency: 0.0,
        amplitude: 0.0,
        phase: 0.0,
        offset: mean,
        residual,
        flat: true,
    };
    let peaks = extract_peaks(&spec, 1);
    let Some(seed) = peaks.peaks.first() else {
        let rms = libm::sqrt(y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64);
        return Ok(flat_result(rms));
    };

    // coarse scan over ±1.5 bins, then golden section around the best node
    let df = spec.resolution();
    let lo = (seed.frequency - 1.5 * df).max(0.05 * df);
    let hi = seed.frequency + 1.5 * df;
    let rss = |f: f64| linear_fit(t, y, f).3;
    let nodes = 31;
    let step = (hi - lo) / (nodes - 1) as f64;
    let best = (0..nodes)
        .map(|i| lo + step * i as f64)
        .min_by(|&a, &b| rss(a).total_cmp(&rss(b)))
        .ok_or_else(|| Error::invalid("empty frequency scan"))?;
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (rss(c), rss(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = rss(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = rss(d);
        }
        if b - a < 1e-12 * hi {
            break;
        }
    }
    let frequency = 0.5 * (a + b);
    let (offset, ca, sb, rss_min) = linear_fit(t, y, frequency);
    let amplitude = libm::hypot(ca, sb);
    let residual = libm::sqrt(rss_min / n as f64);
    // standard error of a fitted amplitude is about residual * sqrt(2 / n)
    let noise_floor = 5.0 * residual * libm::sqrt(2.0 / n as f64);
    let flat = amplitude <= noise_floor.max(1e-9 * spec_scale(y));
    Ok(ModulationFit {
        frequency,
        amplitude,
        phase: libm::atan2(-sb, ca),
        offset,
        residual,
        flat,
    })
}

fn spec_scale(y: &[f64]) -> f64 {
    y.iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE)
}

/// `p0` from the line amplitudes of a multiplet ordered by the partner's `m = -1, 0, +1`.
/// Spectral amplitudes suffer from dephasing and overlap, so this is a lower bound of
/// the true polarization.
pub fn estimate_polarization(multiplet: [f64; 3]) -> Result<f64> {
    if multiplet.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::invalid("line amplitudes must be non-negative"));
    }
    let sum: f64 = multiplet.iter().sum();
    if sum == 0.0 {
        return Err(Error::invalid("all multiplet amplitudes are zero"));
    }
    Ok(multiplet[1] / sum)
}

//! Magnitude spectra of uniformly sampled traces and peak extraction.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::C64;
use crate::sequences::SignalTrace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => alloc::vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * libm::cos(2.0 * PI * i as f64 / n as f64))
                .collect(),
        }
    }

    /// Upper bound of the far leakage of a unit line at `d` bins, used to tell side
    /// lobes from real lines.
    fn leakage(self, d: f64) -> f64 {
        match self {
            Window::Rectangular => 1.5 / (PI * d),
            Window::Hann if d > 1.5 => 1.5 / (PI * d * (d * d - 1.0)),
            Window::Hann => 1.0,
        }
    }
}

/// One-sided magnitude spectrum, scaled so that a cosine of amplitude `a` centered
/// on a bin shows magnitude `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    frequencies: Vec<f64>,
    magnitudes: Vec<f64>,
    window: Window,
    dt: f64,
    weighted: Vec<f64>,
    window_sum: f64,
    scale: f64,
}

impl Spectrum {
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }
    pub fn window(&self) -> Window {
        self.window
    }
    /// Bin spacing in Hz.
    pub fn resolution(&self) -> f64 {
        1.0 / (self.weighted.len() as f64 * self.dt)
    }

    /// Mean square of the windowed, de-meaned samples recovered from the spectrum.
    pub fn power(&self) -> f64 {
        let n = self.weighted.len();
        let m = &self.magnitudes;
        let nyquist = n % 2 == 0;
        let mut p = m[0] * m[0];
        for (k, &x) in m.iter().enumerate().skip(1) {
            if nyquist && k == m.len() - 1 {
                p += x * x;
            } else {
                p += x * x / 2.0;
            }
        }
        p * (self.window_sum / n as f64).powi(2)
    }

    /// Windowed line amplitude at an arbitrary frequency.
    pub fn amplitude_at(&self, f: f64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        let w = -2.0 * PI * f * self.dt;
        for (i, &x) in self.weighted.iter().enumerate() {
            let ph = w * i as f64;
            acc += C64::new(libm::cos(ph), libm::sin(ph)) * x;
        }
        2.0 * acc.norm() / self.window_sum
    }
}

/// Discrete Fourier transform `X_k = sum_n x_n e^{-2 pi i k n / N}`. Uses radix-2
/// when `N` is a power of two.
pub fn dft(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    if n.is_power_of_two() && n > 1 {
        let mut a = x.to_vec();
        fft_in_place(&mut a);
        a
    } else {
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let ph = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                        v * C64::new(libm::cos(ph), libm::sin(ph))
                    })
                    .sum()
            })
            .collect()
    }
}

fn fft_in_place(a: &mut [C64]) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let ph = ang * k as f64;
                let w = C64::new(libm::cos(ph), libm::sin(ph));
                let u = a[start + k];
                let v = a[start + k + len / 2] * w;
                a[start + k] = u + v;
                a[start + k + len / 2] = u - v;
            }
        }
        len <<= 1;
    }
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(dt)
}

/// Spectrum of `values` sampled at `times` after removing the mean.
pub fn spectrum(times: &[f64], values: &[f64], window: Window) -> Result<Spectrum> {
    if times.len() != values.len() {
        return Err(Error::invalid("times and values differ in length"));
    }
    if values.len() < 8 {
        return Err(Error::InsufficientData {
            found: values.len(),
            required: 8,
        });
    }
    let dt = uniform_step(times)?;
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let w = window.weights(n);
    let window_sum: f64 = w.iter().sum();
    let weighted: Vec<f64> = values.iter().zip(&w).map(|(v, w)| (v - mean) * w).collect();
    let input: Vec<C64> = weighted.iter().map(|&x| C64::new(x, 0.0)).collect();
    let bins = dft(&input);
    let half = n / 2;
    let mut magnitudes = Vec::with_capacity(half + 1);
    for (k, z) in bins.iter().take(half + 1).enumerate() {
        let edge = k == 0 || (n % 2 == 0 && k == half);
        let factor = if edge { 1.0 } else { 2.0 };
        magnitudes.push(factor * z.norm() / window_sum);
    }
    let frequencies = (0..=half).map(|k| k as f64 / (n as f64 * dt)).collect();
    Ok(Spectrum {
        frequencies,
        magnitudes,
        window,
        dt,
        weighted,
        window_sum,
        scale,
    })
}

/// Hann-windowed spectrum of a trace.
pub fn fft_spectrum(trace: &SignalTrace) -> Result<Spectrum> {
    spectrum(&trace.abscissa, &trace.values, Window::Hann)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frequency: f64,
    pub amplitude: f64,
}

/// Peaks in descending amplitude. `requested` is what the caller asked for; when
/// fewer distinct lines were found the list is flagged incomplete.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    pub peaks: Vec<Peak>,
    pub requested: usize,
}

impl PeakList {
    pub fn is_complete(&self) -> bool {
        self.peaks.len() >= self.requested
    }
}

/// The `count` strongest local maxima, refined by a parabola through the logarithm
/// of the three top bins. Maxima explained by window leakage of a stronger line are
/// discarded.
pub fn extract_peaks(spectrum: &Spectrum, count: usize) -> PeakList {
    let m = &spectrum.magnitudes;
    let floor = 1e-9 * spectrum.scale.max(f64::MIN_POSITIVE);
    let mut candidates: Vec<usize> = (1..m.len().saturating_sub(1))
        .filter(|&k| m[k] > floor && m[k] > m[k - 1] && m[k] >= m[k + 1])
        .collect();
    candidates.sort_by(|&a, &b| m[b].total_cmp(&m[a]));

    let mut accepted: Vec<(usize, f64, f64)> = Vec::new(); // bin, refined bin, amplitude
    for k in candidates {
        let masked = accepted.iter().any(|&(j, pos, amp)| {
            let d = (k as f64 - pos).abs();
            // no real valley between the two maxima: same line
            let (lo, hi) = if j < k { (j, k) } else { (k, j) };
            let valley = m[lo + 1..hi].iter().cloned().fold(f64::INFINITY, f64::min);
            m[k] <= amp * spectrum.window.leakage(d) || valley > 0.9 * m[k]
        });
        if masked {
            continue;
        }
        let (a, b, c) = (
            m[k - 1].max(floor).ln(),
            m[k].ln(),
            m[k + 1].max(floor).ln(),
        );
        let denom = a - 2.0 * b + c;
        let delta = if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let pos = k as f64 + delta;
        let amplitude = spectrum.amplitude_at(pos * spectrum.resolution());
        accepted.push((k, pos, amplitude));
        if accepted.len() == count {
            break;
        }
    }
    let res = spectrum.resolution();
    let mut peaks: Vec<Peak> = accepted
        .into_iter()
        .map(|(_, pos, amplitude)| Peak {
            frequency: pos * res,
            amplitude,
        })
        .collect();
    peaks.sort_by(|x, y| y.amplitude.total_cmp(&x.amplitude));
    PeakList {
        peaks,
        requested: count,
    }
}

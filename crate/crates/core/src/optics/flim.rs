use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::{Error, Result};

/// A point emitter; position in nm relative to the image center, lifetime in ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterModel {
    pub position: [f64; 2],
    pub lifetime: f64,
    pub brightness: f64,
}

impl EmitterModel {
    pub fn new(position: [f64; 2], lifetime: f64, brightness: f64) -> Result<Self> {
        if !(lifetime > 0.0 && brightness > 0.0) || position.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid(
                "emitter needs positive lifetime and brightness",
            ));
        }
        Ok(Self {
            position,
            lifetime,
            brightness,
        })
    }
}

/// Scan and detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlimConfig {
    /// Gaussian PSF full width at half maximum, nm.
    pub psf_fwhm: f64,
    /// Expected detected photons of an emitter with brightness 1.
    pub photons: f64,
    pub nx: usize,
    pub ny: usize,
    /// nm
    pub pitch: f64,
    pub bins: usize,
    /// ns
    pub bin_width: f64,
}

impl Default for FlimConfig {
    fn default() -> Self {
        Self {
            psf_fwhm: 250.0,
            photons: 1e5,
            nx: 41,
            ny: 41,
            pitch: 20.0,
            bins: 64,
            bin_width: 0.5,
        }
    }
}

/// Per-pixel decay histograms on a square-pixel grid centered on the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FlimImage {
    nx: usize,
    ny: usize,
    pitch: f64,
    bins: usize,
    bin_width: f64,
    counts: Vec<u32>,
}

impl FlimImage {
    /// `counts` is row-major over pixels (y outer, x inner), bins innermost.
    pub fn new(
        nx: usize,
        ny: usize,
        pitch: f64,
        bins: usize,
        bin_width: f64,
        counts: Vec<u32>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 || bins == 0 {
            return Err(Error::invalid("image dimensions must be non-zero"));
        }
        if !(pitch > 0.0 && bin_width > 0.0) {
            return Err(Error::invalid("pixel pitch and bin width must be positive"));
        }
        if counts.len() != nx * ny * bins {
            return Err(Error::invalid(
                "count array does not match the image dimensions",
            ));
        }
        Ok(Self {
            nx,
            ny,
            pitch,
            bins,
            bin_width,
            counts,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn pitch(&self) -> f64 {
        self.pitch
    }
    pub fn bins(&self) -> usize {
        self.bins
    }
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn histogram(&self, ix: usize, iy: usize) -> &[u32] {
        let start = (iy * self.nx + ix) * self.bins;
        &self.counts[start..start + self.bins]
    }

    /// Center of pixel `i` along an axis with `n` pixels, nm.
    pub(crate) fn coordinate(i: usize, n: usize, pitch: f64) -> f64 {
        (i as f64 - (n as f64 - 1.0) / 2.0) * pitch
    }
}

/// Probability of a photon landing in each bin, for an exponential decay truncated
/// to the histogram range.
fn bin_probabilities(lifetime: f64, bins: usize, bin_width: f64) -> Vec<f64> {
    let edge = |k: usize| libm::exp(-(k as f64) * bin_width / lifetime);
    let total = 1.0 - edge(bins);
    (0..bins).map(|k| (edge(k) - edge(k + 1)) / total).collect()
}

/// Poisson counts from two emitters seen through a Gaussian PSF. Each pixel row uses
/// its own stream of the seed.
pub fn synthesize_flim(
    emitters: &[EmitterModel; 2],
    config: &FlimConfig,
    seed: u64,
) -> Result<FlimImage> {
    if emitters[0].lifetime == emitters[1].lifetime {
        return Err(Error::invalid("emitters must have distinct lifetimes"));
    }
    if !(config.psf_fwhm > 0.0 && config.photons > 0.0) {
        return Err(Error::invalid(
            "PSF width and photon budget must be positive",
        ));
    }
    let sigma = config.psf_fwhm / (2.0 * libm::sqrt(2.0 * core::f64::consts::LN_2));
    let norm = config.pitch * config.pitch / (2.0 * core::f64::consts::PI * sigma * sigma);
    let decay: Vec<Vec<f64>> = emitters
        .iter()
        .map(|e| bin_probabilities(e.lifetime, config.bins, config.bin_width))
        .collect();
    let mut counts = alloc::vec![0u32; config.nx * config.ny * config.bins];
    for iy in 0..config.ny {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(iy as u64);
        let y = FlimImage::coordinate(iy, config.ny, config.pitch);
        for ix in 0..config.nx {
            let x = FlimImage::coordinate(ix, config.nx, config.pitch);
            let weights: Vec<f64> = emitters
                .iter()
                .map(|e| {
                    let (dx, dy) = (x - e.position[0], y - e.position[1]);
                    config.photons
                        * e.brightness
                        * norm
                        * libm::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
                })
                .collect();
            for b in 0..config.bins {
                let mean = weights[0] * decay[0][b] + weights[1] * decay[1][b];
                let c = if mean > 0.0 {
                    Poisson::new(mean)
                        .map_err(|_| Error::invalid("invalid photon mean"))?
                        .sample(&mut rng)
                } else {
                    0.0
                };
                counts[(iy * config.nx + ix) * config.bins + b] = c as u32;
            }
        }
    }
    FlimImage::new(
        config.nx,
        config.ny,
        config.pitch,
        config.bins,
        config.bin_width,
        counts,
    )
}

/// Photons attributed to each lifetime component, per pixel (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeImages {
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub noise: PixelNoise,
}

/// Poisson noise of the amplitude estimates, propagated from the fitted bin means.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelNoise {
    pub first_variance: Vec<f64>,
    pub second_variance: Vec<f64>,
    /// Summed per-pixel covariance of the two estimates. Both come from the same
    /// photons, so it is negative and enters the correlation at zero lag only.
    pub cross_covariance: f64,
}

/// Weighted two-component NNLS for one histogram. Returns the amplitudes and the rows
/// of the unconstrained linear estimator.
fn nnls2(p: &[f64], q: &[f64], hist: &[u32], weights: &[f64]) -> ([f64; 2], Vec<f64>, Vec<f64>) {
    let (mut pp, mut qq, mut pq, mut py, mut qy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..p.len() {
        let (w, y) = (weights[k], f64::from(hist[k]));
        pp += w * p[k] * p[k];
        qq += w * q[k] * q[k];
        pq += w * p[k] * q[k];
        py += w * p[k] * y;
        qy += w * q[k] * y;
    }
    let det = pp * qq - pq * pq;
    let row_a = (0..p.len())
        .map(|k| weights[k] * (qq * p[k] - pq * q[k]) / det)
        .collect();
    let row_b = (0..p.len())
        .map(|k| weights[k] * (pp * q[k] - pq * p[k]) / det)
        .collect();
    let a = (qq * py - pq * qy) / det;
    let b = (pp * qy - pq * py) / det;
    // the constrained optimum lies on a face when the free one is infeasible
    let amps = if a >= 0.0 && b >= 0.0 {
        [a, b]
    } else {
        let only_a = (py / pp).max(0.0);
        let only_b = (qy / qq).max(0.0);
        // residual reduction of a single component is c (p.y)
        if only_a * py >= only_b * qy {
            [only_a, 0.0]
        } else {
            [0.0, only_b]
        }
    };
    (amps, row_a, row_b)
}

/// Floor on the modeled counts of a bin when forming Poisson weights.
const MIN_BIN_MEAN: f64 = 0.5;

/// Non-negative least squares with two fixed exponential components in every pixel.
/// An unweighted pass provides the bin means that weight a second, Poisson-weighted one.
pub fn fit_amplitudes(image: &FlimImage, lifetimes: [f64; 2]) -> Result<AmplitudeImages> {
    if !(lifetimes[0] > 0.0 && lifetimes[1] > 0.0) || lifetimes[0] == lifetimes[1] {
        return Err(Error::invalid("lifetimes must be positive and distinct"));
    }
    let p = bin_probabilities(lifetimes[0], image.bins, image.bin_width);
    let q = bin_probabilities(lifetimes[1], image.bins, image.bin_width);
    let n = image.nx * image.ny;
    let (mut first, mut second) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let unit = alloc::vec![1.0; image.bins];
    let (mut var_a, mut var_b) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let mut cross_covariance = 0.0;
    for (pixel, hist) in image.counts.chunks(image.bins).enumerate() {
        let ([a0, b0], _, _) = nnls2(&p, &q, hist, &unit);
        let weights: Vec<f64> = (0..image.bins)
            .map(|k| 1.0 / (a0 * p[k] + b0 * q[k]).max(MIN_BIN_MEAN))
            .collect();
        let ([a, b], row_a, row_b) = nnls2(&p, &q, hist, &weights);
        first[pixel] = a;
        second[pixel] = b;
        for k in 0..image.bins {
            let mean = a * p[k] + b * q[k];
            var_a[pixel] += row_a[k] * row_a[k] * mean;
            var_b[pixel] += row_b[k] * row_b[k] * mean;
            cross_covariance += row_a[k] * row_b[k] * mean;
        }
    }
    let noise = PixelNoise {
        first_variance: var_a,
        second_variance: var_b,
        cross_covariance,
    };
    Ok(AmplitudeImages {
        nx: image.nx,
        ny: image.ny,
        pitch: image.pitch,
        first,
        second,
        noise,
    })
}

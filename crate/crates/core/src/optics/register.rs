use alloc::vec::Vec;

use nalgebra::{SMatrix, SVector};

use crate::optics::{AmplitudeImages, PixelNoise};
use crate::{Error, Result};

/// Shift of the second image relative to the first, nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Registration {
    pub shift: [f64; 2],
    /// 1σ per axis from the registration residual, nm.
    pub uncertainty: [f64; 2],
}

impl Registration {
    pub fn distance(&self) -> f64 {
        libm::hypot(self.shift[0], self.shift[1])
    }
}

struct Grid<'a> {
    nx: usize,
    ny: usize,
    data: &'a [f64],
}

impl Grid<'_> {
    fn at(&self, ix: isize, iy: isize) -> f64 {
        if ix < 0 || iy < 0 || ix >= self.nx as isize || iy >= self.ny as isize {
            0.0
        } else {
            self.data[iy as usize * self.nx + ix as usize]
        }
    }

    /// Bilinear sample at fractional pixel coordinates.
    fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (libm::floor(x), libm::floor(y));
        let (fx, fy) = (x - x0, y - y0);
        let (ix, iy) = (x0 as isize, y0 as isize);
        self.at(ix, iy) * (1.0 - fx) * (1.0 - fy)
            + self.at(ix + 1, iy) * fx * (1.0 - fy)
            + self.at(ix, iy + 1) * (1.0 - fx) * fy
            + self.at(ix + 1, iy + 1) * fx * fy
    }
}

/// `sum_x a(x) b(x + d)` for an integer pixel shift.
fn correlation(a: &Grid<'_>, b: &Grid<'_>, dx: isize, dy: isize) -> f64 {
    let mut acc = 0.0;
    for iy in 0..a.ny as isize {
        for ix in 0..a.nx as isize {
            acc += a.at(ix, iy) * b.at(ix + dx, iy + dy);
        }
    }
    acc
}

/// Half-width of the window used for the quadratic peak refinement, pixels.
const REFINE_HALF_WIDTH: isize = 6;

/// Vertex of a least-squares quadratic surface through `samples` of `(x, y, c)`,
/// fitted to the logarithm when all are positive (exact for Gaussian peaks).
fn vertex(samples: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let positive = samples.iter().all(|s| s.2 > 0.0);
    let mut ata = SMatrix::<f64, 6, 6>::zeros();
    let mut atb = SVector::<f64, 6>::zeros();
    for &(x, y, c) in samples {
        let row = SVector::<f64, 6>::from([1.0, x, y, x * x, x * y, y * y]);
        let v = if positive { libm::log(c) } else { c };
        ata += row * row.transpose();
        atb += row * v;
    }
    let k = ata.lu().solve(&atb)?;
    let hess = SMatrix::<f64, 2, 2>::new(2.0 * k[3], k[4], k[4], 2.0 * k[5]);
    // a maximum needs a negative definite curvature
    if !(hess[(0, 0)] < 0.0 && hess.determinant() > 0.0) {
        return None;
    }
    let v = hess.lu().solve(&SVector::<f64, 2>::new(-k[1], -k[2]))?;
    Some((v[0], v[1]))
}

/// Pixel layout shared by a pair of images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    pub nx: usize,
    pub ny: usize,
    /// nm
    pub pitch: f64,
}

/// Displacement of image `second` with respect to `first` from the peak of their
/// cross-correlation, refined to sub-pixel precision.
///
/// With `noise`, the expected zero-lag noise product is removed before the peak search
/// and the uncertainty is propagated from the per-pixel variances. Without it, the
/// uncertainty comes from the residual of `second` against the shifted `first`.
pub fn correlate_displacement(
    first: &[f64],
    second: &[f64],
    grid: ImageGrid,
    noise: Option<&PixelNoise>,
) -> Result<Registration> {
    let ImageGrid { nx, ny, pitch } = grid;
    if first.len() != nx * ny || second.len() != nx * ny || nx < 3 || ny < 3 {
        return Err(Error::invalid(
            "images must share a grid of at least 3x3 pixels",
        ));
    }
    if let Some(n) = noise {
        if n.first_variance.len() != nx * ny || n.second_variance.len() != nx * ny {
            return Err(Error::invalid("noise maps must match the image grid"));
        }
    }
    let zero_lag_bias = noise.map_or(0.0, |n| n.cross_covariance);
    let a = Grid {
        nx,
        ny,
        data: first,
    };
    let b = Grid {
        nx,
        ny,
        data: second,
    };
    let correlation = |a: &Grid<'_>, b: &Grid<'_>, dx: isize, dy: isize| {
        let c = correlation(a, b, dx, dy);
        if dx == 0 && dy == 0 {
            c - zero_lag_bias
        } else {
            c
        }
    };
    let (rx, ry) = (nx as isize / 2, ny as isize / 2);
    let mut best = (0isize, 0isize, f64::NEG_INFINITY);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for dy in -ry..=ry {
        for dx in -rx..=rx {
            let c = correlation(&a, &b, dx, dy);
            lo = lo.min(c);
            hi = hi.max(c);
            if c > best.2 {
                best = (dx, dy, c);
            }
        }
    }
    if !(hi - lo > 0.0) || !best.2.is_finite() {
        return Err(Error::FlatCorrelation);
    }
    let (dx, dy, _) = best;
    let w = REFINE_HALF_WIDTH;
    let mut window = Vec::with_capacity(((2 * w + 1) * (2 * w + 1)) as usize);
    for oy in -w..=w {
        for ox in -w..=w {
            window.push((ox as f64, oy as f64, correlation(&a, &b, dx + ox, dy + oy)));
        }
    }
    let wf = w as f64;
    let (sx, sy) = match vertex(&window) {
        Some((x, y)) if x.abs() <= wf && y.abs() <= wf => (x, y),
        _ => (0.0, 0.0),
    };
    let (px, py) = (dx as f64 + sx, dy as f64 + sy);
    let (vx, vy) = match noise {
        Some(n) => propagated_variance(&a, &b, n),
        None => residual_variance(&a, &b, px, py),
    };
    let sd = |v: f64| libm::sqrt(v) * pitch;
    Ok(Registration {
        shift: [px * pitch, py * pitch],
        uncertainty: [sd(vx), sd(vy)],
    })
}

/// Central-difference gradient of `g` at a pixel, per pixel.
fn gradient(g: &Grid<'_>, ix: isize, iy: isize) -> (f64, f64) {
    (
        (g.at(ix + 1, iy) - g.at(ix - 1, iy)) / 2.0,
        (g.at(ix, iy + 1) - g.at(ix, iy - 1)) / 2.0,
    )
}

/// Shift variance (pixels²) of a least-squares registration with independent pixel
/// noise, evaluated on the mean of the two images.
fn propagated_variance(a: &Grid<'_>, b: &Grid<'_>, noise: &PixelNoise) -> (f64, f64) {
    let mean: Vec<f64> = a
        .data
        .iter()
        .zip(b.data)
        .map(|(u, v)| 0.5 * (u + v))
        .collect();
    let m = Grid {
        nx: a.nx,
        ny: a.ny,
        data: &mean,
    };
    let (mut nx_, mut ny_, mut gx, mut gy) = (0.0, 0.0, 0.0, 0.0);
    for iy in 0..a.ny as isize {
        for ix in 0..a.nx as isize {
            let (x, y) = gradient(&m, ix, iy);
            let i = iy as usize * a.nx + ix as usize;
            let v = noise.first_variance[i] + noise.second_variance[i];
            nx_ += v * x * x;
            ny_ += v * y * y;
            gx += x * x;
            gy += y * y;
        }
    }
    let ratio = |n: f64, g: f64| if g > 0.0 { n / (g * g) } else { f64::INFINITY };
    (ratio(nx_, gx), ratio(ny_, gy))
}

/// Shift variance (pixels²) from the residual of `b ≈ s·a(x − d)` and the gradient of `a`.
fn residual_variance(a: &Grid<'_>, b: &Grid<'_>, px: f64, py: f64) -> (f64, f64) {
    let (nx, ny) = (a.nx, a.ny);
    let shifted: Vec<f64> = (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| a.sample(ix as f64 - px, iy as f64 - py))
        .collect();
    let ss: f64 = shifted.iter().map(|v| v * v).sum();
    let scale = if ss > 0.0 {
        shifted.iter().zip(b.data).map(|(u, v)| u * v).sum::<f64>() / ss
    } else {
        0.0
    };
    let rss: f64 = shifted
        .iter()
        .zip(b.data)
        .map(|(u, v)| (v - scale * u).powi(2))
        .sum();
    let noise = rss / (nx * ny).saturating_sub(3).max(1) as f64;
    let (mut gx, mut gy) = (0.0, 0.0);
    for iy in 0..ny as isize {
        for ix in 0..nx as isize {
            let (x, y) = gradient(a, ix, iy);
            gx += x * x;
            gy += y * y;
        }
    }
    let v = |g: f64| {
        if g > 0.0 && scale != 0.0 {
            noise / (scale * scale * g)
        } else {
            f64::INFINITY
        }
    };
    (v(gx), v(gy))
}

impl AmplitudeImages {
    pub fn grid(&self) -> ImageGrid {
        ImageGrid {
            nx: self.nx,
            ny: self.ny,
            pitch: self.pitch,
        }
    }

    /// Position of the second component relative to the first.
    pub fn displacement(&self) -> Result<Registration> {
        correlate_displacement(&self.first, &self.second, self.grid(), Some(&self.noise))
    }
}

//! Edge-aware weighted Voronoi stippling of a grayscale image.
//!
//! Weights follow a linear darkness ramp that is zero above a brightness
//! threshold, with Canny edge pixels forced to full weight. Points are
//! relaxed with a raster Lloyd iteration: every weighted pixel goes to its
//! nearest point and each point moves to the weighted centroid of its cell.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tour::gaussian_kernel;
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.8;
pub const DEFAULT_BLUR_SIGMA: f64 = 2.0;
pub const DEFAULT_CANNY_LOW: f64 = 0.1;
pub const DEFAULT_CANNY_HIGH: f64 = 0.2;
pub const DEFAULT_POINTS: usize = 2000;
pub const DEFAULT_ITERATIONS: usize = 40;

/// Row-major brightness image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width < 8 || height < 8 {
            return Err(Error::InvalidParameter(alloc::format!(
                "image must be at least 8x8, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("brightness outside [0, 1]".into()));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

/// Binary edge mask, same layout as the image.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    pub width: usize,
    pub height: usize,
    pub mask: Vec<bool>,
}

impl EdgeMask {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    pub width: usize,
    pub height: usize,
    pub weights: Vec<f64>,
    pub brightness_threshold: f64,
}

/// Stipple points in image coordinates: `x` is the column, `y` the row,
/// pixel centers sit on integers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StipplePattern {
    pub points: Vec<[f64; 2]>,
}

fn blur(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width, img.height);
    if !(sigma > 0.0) {
        return img.pixels.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() - 1) as isize / 2;
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * img.pixels[y * w + clamp(x as isize + i as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp[clamp(y as isize + i as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

/// Canny edge detection: Gaussian blur, Sobel gradients, non-maximum
/// suppression along the quantized gradient direction, and hysteresis on
/// the gradient magnitude normalized to `[0, 1]`.
pub fn canny_edges(img: &GrayImage, blur_sigma: f64, low: f64, high: f64) -> Result<EdgeMask> {
    if !(low > 0.0 && low < high) {
        return Err(Error::InvalidParameter(alloc::format!(
            "Canny thresholds need 0 < low < high, got ({low}, {high})"
        )));
    }
    let (w, h) = (img.width, img.height);
    let smooth = blur(img, blur_sigma);
    let at = |x: isize, y: isize| {
        let xc = x.clamp(0, w as isize - 1) as usize;
        let yc = y.clamp(0, h as isize - 1) as usize;
        smooth[yc * w + xc]
    };
    let mut mag = vec![0.0; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            mag[i] = (gx * gx + gy * gy).sqrt();
            // Quantize the gradient angle into 0°, 45°, 90°, 135°.
            let mut angle = gy.atan2(gx);
            if angle < 0.0 {
                angle += PI;
            }
            dir[i] = ((angle / (PI / 4.0)).round() as u8) % 4;
        }
    }
    let max = mag.iter().copied().fold(0.0, f64::max);
    let mut mask = vec![false; w * h];
    if max <= 1e-12 {
        return Ok(EdgeMask { width: w, height: h, mask });
    }
    mag.iter_mut().for_each(|m| *m /= max);

    // Strict on the forward neighbour, non-strict on the backward one, so a
    // symmetric ridge keeps exactly one pixel.
    let mut thin = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m < low {
                continue;
            }
            let (dx, dy): (isize, isize) = match dir[i] {
                0 => (1, 0),
                1 => (1, 1),
                2 => (0, 1),
                _ => (-1, 1),
            };
            let fwd = mag[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
            let back = mag[(y as isize - dy) as usize * w + (x as isize - dx) as usize];
            if m > fwd && m >= back {
                thin[i] = m;
            }
        }
    }

    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if thin[i] >= high {
            mask[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !mask[j] && thin[j] >= low {
                    mask[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(EdgeMask { width: w, height: h, mask })
}

/// Linear darkness ramp `(b - brightness) / b`, zero at or above `b`, with
/// edge pixels forced to weight 1.
pub fn build_weights(img: &GrayImage, b: f64, edges: &EdgeMask) -> Result<WeightMap> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("brightness threshold {b} not in (0, 1]")));
    }
    if edges.width != img.width || edges.height != img.height {
        return Err(Error::DimensionMismatch("edge mask and image differ in shape".into()));
    }
    let weights: Vec<f64> = img
        .pixels
        .iter()
        .zip(&edges.mask)
        .map(|(&v, &edge)| if edge { 1.0 } else { ((b - v) / b).max(0.0) })
        .collect();
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::EmptyWeights);
    }
    Ok(WeightMap { width: img.width, height: img.height, weights, brightness_threshold: b })
}

/// Uniform bucket grid for nearest-point queries.
struct Grid {
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl Grid {
    fn new(points: &[[f64; 2]], width: usize, height: usize) -> Self {
        let area = (width * height) as f64;
        let cell = (area / points.len().max(1) as f64).sqrt().max(1.0);
        let cols = (width as f64 / cell).ceil() as usize + 1;
        let rows = (height as f64 / cell).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        let mut grid = Self { cell, cols, rows, buckets: Vec::new() };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = grid.cell_of(p[0], p[1]);
            buckets[cy * cols + cx].push(i);
        }
        grid.buckets = buckets;
        grid
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let cx = ((x / self.cell).floor().max(0.0) as usize).min(self.cols - 1);
        let cy = ((y / self.cell).floor().max(0.0) as usize).min(self.rows - 1);
        (cx, cy)
    }

    /// Nearest point; exact ties go to the lowest index.
    fn nearest(&self, points: &[[f64; 2]], x: f64, y: f64) -> usize {
        let (cx, cy) = self.cell_of(x, y);
        let (cx, cy) = (cx as isize, cy as isize);
        let mut best = usize::MAX;
        let mut best_d2 = f64::INFINITY;
        let max_ring = self.cols.max(self.rows) as isize;
        for ring in 0..=max_ring {
            if ring > 0 && best != usize::MAX {
                let reach = (ring - 1) as f64 * self.cell;
                if reach * reach > best_d2 {
                    break;
                }
            }
            for gy in cy - ring..=cy + ring {
                if gy < 0 || gy >= self.rows as isize {
                    continue;
                }
                let on_edge_row = gy == cy - ring || gy == cy + ring;
                let step = if on_edge_row || ring == 0 { 1 } else { 2 * ring };
                let mut gx = cx - ring;
                while gx <= cx + ring {
                    if gx >= 0 && gx < self.cols as isize {
                        for &i in &self.buckets[gy as usize * self.cols + gx as usize] {
                            let dx = points[i][0] - x;
                            let dy = points[i][1] - y;
                            let d2 = dx * dx + dy * dy;
                            if d2 < best_d2 || (d2 == best_d2 && i < best) {
                                best_d2 = d2;
                                best = i;
                            }
                        }
                    }
                    gx += step;
                }
            }
        }
        best
    }
}

fn sample_point(weights: &WeightMap, max_w: f64, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let (w, h) = (weights.width, weights.height);
    loop {
        let i = rng.random_range(0..w * h);
        if weights.weights[i] > 0.0 && rng.random::<f64>() * max_w < weights.weights[i] {
            let x = (i % w) as f64 + rng.random_range(-0.5..0.5);
            let y = (i / w) as f64 + rng.random_range(-0.5..0.5);
            return [x.clamp(0.0, (w - 1) as f64), y.clamp(0.0, (h - 1) as f64)];
        }
    }
}

/// Weighted quantization energy `Σ weight · dist²(pixel, nearest point)`.
pub fn quantization_energy(weights: &WeightMap, points: &[[f64; 2]]) -> f64 {
    let grid = Grid::new(points, weights.width, weights.height);
    let mut e = 0.0;
    for (i, &wt) in weights.weights.iter().enumerate() {
        if wt > 0.0 {
            let (x, y) = ((i % weights.width) as f64, (i / weights.width) as f64);
            let p = points[grid.nearest(points, x, y)];
            e += wt * ((p[0] - x).powi(2) + (p[1] - y).powi(2));
        }
    }
    e
}

/// Initial rejection sample for [`voronoi_stipple`], exposed for diagnostics.
pub fn initial_stipple(weights: &WeightMap, n_points: usize, seed: u64) -> Result<StipplePattern> {
    let (_, pattern) = initial_state(weights, n_points, seed)?;
    Ok(pattern)
}

fn initial_state(weights: &WeightMap, n_points: usize, seed: u64) -> Result<(ChaCha8Rng, StipplePattern)> {
    let available = weights.weights.iter().filter(|&&w| w > 0.0).count();
    if available == 0 {
        return Err(Error::EmptyWeights);
    }
    if n_points == 0 || n_points > available {
        return Err(Error::TooManyPoints { requested: n_points, available });
    }
    let max_w = weights.weights.iter().copied().fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n_points).map(|_| sample_point(weights, max_w, &mut rng)).collect();
    Ok((rng, StipplePattern { points }))
}

/// Weighted Lloyd relaxation of a rejection-sampled initial pattern.
/// Points whose cell receives no weight are resampled. Deterministic in
/// `seed`.
pub fn voronoi_stipple(weights: &WeightMap, n_points: usize, n_iters: usize, seed: u64) -> Result<StipplePattern> {
    let (mut rng, mut pattern) = initial_state(weights, n_points, seed)?;
    let max_w = weights.weights.iter().copied().fold(0.0, f64::max);
    for _ in 0..n_iters {
        lloyd_step(weights, &mut pattern.points, max_w, &mut rng);
    }
    Ok(pattern)
}

/// One relaxation step; returns how many empty cells were resampled.
fn lloyd_step(weights: &WeightMap, points: &mut [[f64; 2]], max_w: f64, rng: &mut ChaCha8Rng) -> usize {
    let n = points.len();
    let grid = Grid::new(points, weights.width, weights.height);
    let mut acc = vec![[0.0f64; 3]; n];
    for (i, &wt) in weights.weights.iter().enumerate() {
        if wt > 0.0 {
            let (x, y) = ((i % weights.width) as f64, (i / weights.width) as f64);
            let k = grid.nearest(points, x, y);
            acc[k][0] += wt * x;
            acc[k][1] += wt * y;
            acc[k][2] += wt;
        }
    }
    let mut resampled = 0;
    for (p, a) in points.iter_mut().zip(&acc) {
        if a[2] > 0.0 {
            *p = [a[0] / a[2], a[1] / a[2]];
        } else {
            *p = sample_point(weights, max_w, rng);
            resampled += 1;
        }
    }
    resampled
}

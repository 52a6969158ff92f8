//! Image to closed curve: stippling followed by a short tour.

use crate::stipple::{
    build_weights, canny_edges, voronoi_stipple, GrayImage, StipplePattern, DEFAULT_BLUR_SIGMA, DEFAULT_CANNY_HIGH,
    DEFAULT_CANNY_LOW, DEFAULT_ITERATIONS, DEFAULT_POINTS, DEFAULT_THRESHOLD,
};
use crate::tour::{curvature_flow, mst_tour, two_opt, Curve};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct StippleOptions {
    pub threshold: f64,
    pub blur_sigma: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    pub n_points: usize,
    pub n_iters: usize,
    pub seed: u64,
}

impl Default for StippleOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            blur_sigma: DEFAULT_BLUR_SIGMA,
            canny_low: DEFAULT_CANNY_LOW,
            canny_high: DEFAULT_CANNY_HIGH,
            n_points: DEFAULT_POINTS,
            n_iters: DEFAULT_ITERATIONS,
            seed: 0,
        }
    }
}

pub fn stipple_image(img: &GrayImage, opts: &StippleOptions) -> Result<StipplePattern> {
    let edges = canny_edges(img, opts.blur_sigma, opts.canny_low, opts.canny_high)?;
    let weights = build_weights(img, opts.threshold, &edges)?;
    voronoi_stipple(&weights, opts.n_points, opts.n_iters, opts.seed)
}

/// MST preorder tour, 2-opt, then one curvature-flow pass at `smooth_sigma`
/// unless it is `None`.
pub fn tour_stipple(pattern: &StipplePattern, smooth_sigma: Option<f64>) -> Result<Curve> {
    let tour = two_opt(&mst_tour(pattern)?);
    match smooth_sigma {
        Some(sigma) => curvature_flow(&tour, sigma),
        None => Ok(tour),
    }
}

pub fn tsp_art(img: &GrayImage, opts: &StippleOptions, smooth_sigma: Option<f64>) -> Result<Curve> {
    tour_stipple(&stipple_image(img, opts)?, smooth_sigma)
}

//! Closed curves: building a tour through a stipple pattern, untangling it
//! with 2-opt, arc-length resampling and Gaussian curvature-shortening
//! smoothing.

use alloc::vec;
use alloc::vec::Vec;


use crate::stipple::StipplePattern;
use crate::{Error, Result};

/// Improvements smaller than this are treated as ties, which keeps 2-opt
/// from cycling on cocircular point sets.
pub const TWO_OPT_EPS: f64 = 1e-12;

/// A closed polyline in 2 or 3 dimensions; the last point connects back to
/// the first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Curve {
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dimension = points.first().map(|p| p.len()).unwrap_or(0);
        let curve = Self { dimension, points };
        curve.validate()?;
        Ok(curve)
    }

    pub fn from_xy(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().map(|p| p.to_vec()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 3 {
            return Err(Error::TooFewPoints(self.points.len()));
        }
        if !(2..=3).contains(&self.dimension) {
            return Err(Error::InvalidParameter(alloc::format!(
                "curve dimension must be 2 or 3, got {}",
                self.dimension
            )));
        }
        for p in &self.points {
            if p.len() != self.dimension {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "point with {} coordinates in a {}-d curve",
                    p.len(),
                    self.dimension
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite curve coordinate".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Coordinate `i` of every point.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[i]).collect()
    }

    /// Builds a curve from per-dimension coordinate rows.
    pub fn from_coordinates(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("coordinate rows differ in length".into()));
        }
        Self::new((0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { dimension: self.dimension, points }
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Total length including the closing segment.
pub fn curve_length(curve: &Curve) -> f64 {
    closed_length(&curve.points)
}

pub fn closed_length(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    (0..n).map(|i| dist(&points[i], &points[(i + 1) % n])).sum()
}

/// Visits the points in depth-first preorder of their Euclidean minimum
/// spanning tree (Prim, `O(M²)`), starting from point 0.
pub fn mst_tour(pattern: &StipplePattern) -> Result<Curve> {
    let pts = &pattern.points;
    let n = pts.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let mut distinct: Vec<[f64; 2]> = Vec::new();
    for p in pts {
        if !distinct.contains(p) {
            distinct.push(*p);
            if distinct.len() >= 3 {
                break;
            }
        }
    }
    if distinct.len() < 3 {
        return Err(Error::DuplicatePoints);
    }

    let d = |a: usize, b: usize| {
        let dx = pts[a][0] - pts[b][0];
        let dy = pts[a][1] - pts[b][1];
        (dx * dx + dy * dy).sqrt()
    };
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    best[0] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            children[parent[u]].push(u);
        }
        for v in 0..n {
            if !in_tree[v] {
                let dv = d(u, v);
                if dv < best[v] {
                    best[v] = dv;
                    parent[v] = u;
                }
            }
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        order.push(u);
        // Push in reverse so lower-index children are visited first.
        for &c in children[u].iter().rev() {
            stack.push(c);
        }
    }
    Curve::new(order.into_iter().map(|i| pts[i].to_vec()).collect())
}

/// Finds the first `(i, j)` in lexicographic order whose 2-opt swap shortens
/// the tour by more than [`TWO_OPT_EPS`].
pub fn find_improving_move(points: &[Vec<f64>]) -> Option<(usize, usize)> {
    let n = points.len();
    for i in 0..n.saturating_sub(2) {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if two_opt_gain(points, i, j) > TWO_OPT_EPS {
                return Some((i, j));
            }
        }
    }
    None
}

fn two_opt_gain(p: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let n = p.len();
    let (a, b, c, d) = (&p[i], &p[i + 1], &p[j], &p[(j + 1) % n]);
    dist(a, b) + dist(c, d) - dist(a, c) - dist(b, d)
}

/// Repeated first-improvement 2-opt sweeps until a full sweep finds no
/// improving swap. Each swap reverses the tour between `i + 1` and `j`.
pub fn two_opt(curve: &Curve) -> Curve {
    let mut p = curve.points.clone();
    let n = p.len();
    if n < 4 {
        return curve.clone();
    }
    loop {
        let mut improved = false;
        for i in 0..n - 2 {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if two_opt_gain(&p, i, j) > TWO_OPT_EPS {
                    p[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Curve { dimension: curve.dimension, points: p }
}

/// `n` points equally spaced by arc length along the closed polyline,
/// starting at its first vertex.
pub fn resample_closed(curve: &Curve, n: usize) -> Result<Curve> {
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let pts = &curve.points;
    let m = pts.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        let last = *cum.last().unwrap();
        cum.push(last + dist(&pts[i], &pts[(i + 1) % m]));
    }
    let total = cum[m];
    if !(total > 0.0) {
        return Err(Error::ZeroLengthCurve);
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        let t = total * k as f64 / n as f64;
        while seg + 1 < m && cum[seg + 1] <= t {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let frac = if len > 0.0 { ((t - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        let a = &pts[seg];
        let b = &pts[(seg + 1) % m];
        out.push(a.iter().zip(b).map(|(x, y)| x + frac * (y - x)).collect());
    }
    Ok(Curve { dimension: curve.dimension, points: out })
}

/// Discrete Gaussian of standard deviation `sigma` samples, truncated at
/// `±4σ` and normalized to sum 1. Index `radius` is the center.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// One step of curvature-shortening flow: arc-length resampling at the
/// same point count, then circular Gaussian convolution of each coordinate.
pub fn curvature_flow(curve: &Curve, sigma: f64) -> Result<Curve> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter("sigma must be positive".into()));
    }
    let m = curve.len();
    let resampled = resample_closed(curve, m)?;
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() - 1) / 2;
    let points = (0..m)
        .map(|i| {
            let mut acc = vec![0.0; curve.dimension];
            for (t, w) in kernel.iter().enumerate() {
                let idx = (i + m * (radius / m + 1) + t - radius) % m;
                for (a, x) in acc.iter_mut().zip(&resampled.points[idx]) {
                    *a += w * x;
                }
            }
            acc
        })
        .collect();
    Ok(Curve { dimension: curve.dimension, points })
}

fn orient(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Strict crossing test: the segments cross at a single interior point.
pub fn segments_cross(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Whether any two non-adjacent segments of the closed 2-d loop properly
/// intersect.
pub fn has_self_crossing(curve: &Curve) -> bool {
    let p = &curve.points;
    let n = p.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(&p[i], &p[i + 1], &p[j], &p[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square_xy() -> Curve {
        Curve::from_xy(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    fn random_pattern(n: usize, seed: u64) -> StipplePattern {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        StipplePattern {
            points: (0..n).map(|_| [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)]).collect(),
        }
    }

    // Kruskal with union-find, independent of Prim in mst_tour.
    fn kruskal_weight(pts: &[[f64; 2]]) -> f64 {
        let n = pts.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((dist(&pts[i], &pts[j]), i, j));
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut total = 0.0;
        for (w, a, b) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                total += w;
            }
        }
        total
    }

    #[test]
    fn curve_length_examples() {
        assert!((curve_length(&square_xy()) - 4.0).abs() < 1e-12);
        let same = Curve::new(vec![vec![1.0, 2.0]; 3]).unwrap();
        assert_eq!(curve_length(&same), 0.0);
        let tri = Curve::from_xy(&[[0.0, 0.0], [2.0, 0.0], [1.0, 3f64.sqrt()]]).unwrap();
        assert!((curve_length(&tri) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn curve_validation() {
        assert_eq!(Curve::new(vec![vec![0.0, 0.0]; 2]), Err(Error::TooFewPoints(2)));
        assert!(Curve::new(vec![vec![0.0], vec![1.0], vec![2.0]]).is_err());
        assert!(Curve::new(vec![vec![0.0, 0.0], vec![1.0], vec![2.0, 0.0]]).is_err());
        assert!(Curve::new(vec![vec![0.0, f64::NAN], vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn mst_tour_square_and_line() {
        let sq = StipplePattern { points: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]] };
        let t = mst_tour(&sq).unwrap();
        assert_eq!(t.len(), 4);
        assert!(curve_length(&t) <= 6.0 + 1e-12);

        let line = StipplePattern { points: (0..10).map(|i| [i as f64, 0.0]).collect() };
        assert!(curve_length(&mst_tour(&line).unwrap()) <= 18.0 + 1e-12);
    }

    #[test]
    fn mst_tour_within_twice_mst_weight() {
        for seed in 0..5 {
            let pat = random_pattern(50, seed);
            let tour = mst_tour(&pat).unwrap();
            assert_eq!(tour.len(), 50);
            assert!(curve_length(&tour) <= 2.0 * kruskal_weight(&pat.points) + 1e-9);
        }
    }

    #[test]
    fn mst_tour_rejects_duplicates() {
        let pat = StipplePattern { points: vec![[1.0, 1.0], [1.0, 1.0], [2.0, 2.0], [1.0, 1.0]] };
        assert_eq!(mst_tour(&pat), Err(Error::DuplicatePoints));
    }

    #[test]
    fn two_opt_uncrosses_square() {
        let crossed = Curve::from_xy(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(has_self_crossing(&crossed));
        assert!((curve_length(&crossed) - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        let fixed = two_opt(&crossed);
        assert!((curve_length(&fixed) - 4.0).abs() < 1e-12);
        assert!(!has_self_crossing(&fixed));
    }

    #[test]
    fn two_opt_leaves_triangle() {
        let tri = Curve::from_xy(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(two_opt(&tri), tri);
    }

    #[test]
    fn two_opt_random_instances_are_locally_optimal() {
        for seed in 10..15 {
            let tour = mst_tour(&random_pattern(50, seed)).unwrap();
            let opt = two_opt(&tour);
            assert!(curve_length(&opt) <= curve_length(&tour));
            assert_eq!(find_improving_move(&opt.points), None);
            assert!(!has_self_crossing(&opt));
        }
    }

    #[test]
    fn resample_square_midpoints() {
        let r = resample_closed(&square_xy(), 8).unwrap();
        let expected = [
            [0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 0.5],
            [1.0, 1.0], [0.5, 1.0], [0.0, 1.0], [0.0, 0.5],
        ];
        for (p, e) in r.points.iter().zip(expected) {
            assert!(dist(p, &e) < 1e-12, "{p:?} vs {e:?}");
        }
    }

    #[test]
    fn resample_uniform_is_identity() {
        let circle = circle(64, 2.0);
        let r = resample_closed(&circle, 64).unwrap();
        for (a, b) in r.points.iter().zip(&circle.points) {
            assert!(dist(a, b) < 1e-9);
        }
    }

    #[test]
    fn resample_preserves_length_of_dense_smooth_curves() {
        let n = 600;
        let flower = Curve::new(
            (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    let r = 1.0 + 0.3 * (5.0 * t).cos();
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect(),
        )
        .unwrap();
        let r = resample_closed(&flower, 2000).unwrap();
        let (a, b) = (curve_length(&flower), curve_length(&r));
        assert!((a - b).abs() / a < 1e-3, "{a} vs {b}");
    }

    #[test]
    fn resample_rejects_degenerate() {
        let same = Curve::new(vec![vec![1.0, 2.0]; 3]).unwrap();
        assert_eq!(resample_closed(&same, 5), Err(Error::ZeroLengthCurve));
        assert_eq!(resample_closed(&square_xy(), 2), Err(Error::TooFewPoints(2)));
    }

    fn circle(n: usize, r: f64) -> Curve {
        Curve::new(
            (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    vec![3.0 + r * t.cos(), -1.0 + r * t.sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn curvature_flow_shrinks_circle() {
        let c = circle(200, 1.0);
        let s = curvature_flow(&c, 1.0).unwrap();
        let cx = s.coordinate(0).iter().sum::<f64>() / 200.0;
        let cy = s.coordinate(1).iter().sum::<f64>() / 200.0;
        assert!((cx - 3.0).abs() < 1e-6 && (cy + 1.0).abs() < 1e-6);
        for p in &s.points {
            let r = dist(p, &[3.0, -1.0]);
            assert!(r < 1.0 && r > 0.99);
        }
    }

    #[test]
    fn tiny_sigma_is_identity() {
        let c = circle(50, 1.0);
        let s = curvature_flow(&c, 1e-3).unwrap();
        for (a, b) in s.points.iter().zip(&c.points) {
            assert!(dist(a, b) < 1e-9);
        }
        assert!(curvature_flow(&c, 0.0).is_err());
    }

    // Mean radial deviation over 20 seeded noisy circles; single instances
    // scatter around a 0.45 ratio.
    #[test]
    fn curvature_flow_denoises_circle() {
        let n = 200;
        let dev = |c: &Curve| {
            let radii: Vec<f64> = c.points.iter().map(|p| dist(p, &[0.0, 0.0])).collect();
            let m = radii.iter().sum::<f64>() / radii.len() as f64;
            radii.iter().map(|r| (r - m).abs()).sum::<f64>() / radii.len() as f64
        };
        let mut ratio_sum = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noisy = Curve::new(
                (0..n)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / n as f64;
                        let r = 1.0 + rng.random_range(-0.05..0.05);
                        vec![r * t.cos(), r * t.sin()]
                    })
                    .collect(),
            )
            .unwrap();
            let smooth = curvature_flow(&noisy, 1.0).unwrap();
            assert!(curve_length(&smooth) < curve_length(&noisy));
            ratio_sum += dev(&smooth) / dev(&noisy);
        }
        assert!(ratio_sum / 20.0 <= 0.5, "mean ratio {}", ratio_sum / 20.0);
    }

    #[test]
    fn crossing_examples() {
        let convex = circle(12, 1.0);
        assert!(!has_self_crossing(&convex));
        let eight = Curve::from_xy(&[
            [1.0, 1.0], [2.0, 0.0], [1.0, -1.0], [-1.0, 1.0], [-2.0, 0.0], [-1.0, -1.0],
        ])
        .unwrap();
        assert!(has_self_crossing(&eight));
        let crossed_square = Curve::from_xy(&[[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!(has_self_crossing(&crossed_square));
    }

    proptest::proptest! {
        #[test]
        fn resampling_a_regular_polygon_is_stable(n in 3usize..40, r in 0.1f64..10.0) {
            let c = circle(n, r);
            let once = resample_closed(&c, n).unwrap();
            let twice = resample_closed(&once, n).unwrap();
            for (a, b) in once.points.iter().zip(&twice.points) {
                proptest::prop_assert!(dist(a, b) < 1e-9);
            }
        }

        #[test]
        fn two_opt_never_lengthens(seed in 0u64..200) {
            let tour = mst_tour(&random_pattern(25, seed)).unwrap();
            let opt = two_opt(&tour);
            proptest::prop_assert!(curve_length(&opt) <= curve_length(&tour) + 1e-9);
            proptest::prop_assert!(find_improving_move(&opt.points).is_none());
        }
    }
}

//! Convex polygon machinery for rate regions: hulls that tolerate
//! collinear and degenerate input, halfplane clipping, point membership
//! with slack, and the Hausdorff metric.

/// Cross products below this are treated as collinear.
const COLLINEAR_EPS: f64 = 1e-12;

/// A pair of rates (common, private) in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub rc: f64,
    pub rp: f64,
}

impl RatePair {
    pub fn new(rc: f64, rp: f64) -> Self {
        Self { rc, rp }
    }
}

fn cross(o: RatePair, a: RatePair, b: RatePair) -> f64 {
    (a.rc - o.rc) * (b.rp - o.rp) - (a.rp - o.rp) * (b.rc - o.rc)
}

fn dist(a: RatePair, b: RatePair) -> f64 {
    ((a.rc - b.rc).powi(2) + (a.rp - b.rp).powi(2)).sqrt()
}

/// Monotone-chain convex hull in counter-clockwise order. Collinear
/// interior points are dropped; one or two distinct input points yield a
/// degenerate hull of that size.
pub fn convex_hull(points: &[RatePair]) -> Vec<RatePair> {
    let mut pts: Vec<RatePair> = points.to_vec();
    pts.sort_by(|a, b| {
        a.rc
            .partial_cmp(&b.rc)
            .unwrap()
            .then(a.rp.partial_cmp(&b.rp).unwrap())
    });
    pts.dedup_by(|a, b| dist(*a, *b) < 1e-13);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<RatePair> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2
            && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= COLLINEAR_EPS
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<RatePair> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= COLLINEAR_EPS
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() <= 2 {
        // all points collinear: keep the two extreme ones
        let mut ends = vec![pts[0], pts[pts.len() - 1]];
        ends.dedup_by(|a, b| dist(*a, *b) < 1e-13);
        return ends;
    }
    lower
}

/// Convex polygon of achievable rate pairs, stored as a counter-clockwise
/// vertex list. Degenerate regions (a point or a segment) keep one or two
/// vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    vertices: Vec<RatePair>,
}

impl RateRegion {
    /// Hull of the given points. An empty input collapses to the origin.
    pub fn from_points(points: &[RatePair]) -> Self {
        if points.is_empty() {
            return Self {
                vertices: vec![RatePair::new(0.0, 0.0)],
            };
        }
        Self {
            vertices: convex_hull(points),
        }
    }

    pub fn vertices(&self) -> &[RatePair] {
        &self.vertices
    }

    /// Point membership with additive slack on each supporting halfplane.
    pub fn contains(&self, pt: RatePair, slack: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => dist(self.vertices[0], pt) <= slack,
            2 => point_segment_distance(pt, self.vertices[0], self.vertices[1]) <= slack,
            n => {
                for i in 0..n {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    let len = dist(a, b).max(1e-300);
                    if cross(a, b, pt) < -slack * len {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Support value max(μ·v) over the region in direction `dir`.
    pub fn support(&self, dir: (f64, f64)) -> f64 {
        self.vertices
            .iter()
            .map(|v| dir.0 * v.rc + dir.1 * v.rp)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Distance from a point to the region (zero inside).
    pub fn distance_to(&self, pt: RatePair) -> f64 {
        match self.vertices.len() {
            0 => f64::INFINITY,
            1 => dist(self.vertices[0], pt),
            2 => point_segment_distance(pt, self.vertices[0], self.vertices[1]),
            n => {
                if self.contains(pt, 0.0) {
                    return 0.0;
                }
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    best = best.min(point_segment_distance(pt, a, b));
                }
                best
            }
        }
    }
}

fn point_segment_distance(p: RatePair, a: RatePair, b: RatePair) -> f64 {
    let (dx, dy) = (b.rc - a.rc, b.rp - a.rp);
    let len2 = dx * dx + dy * dy;
    if len2 <= 1e-300 {
        return dist(p, a);
    }
    let t = (((p.rc - a.rc) * dx + (p.rp - a.rp) * dy) / len2).clamp(0.0, 1.0);
    dist(
        p,
        RatePair::new(a.rc + t * dx, a.rp + t * dy),
    )
}

/// Symmetric Hausdorff distance between two convex regions. For convex
/// polygons the maximum over each region is attained at a vertex.
pub fn region_distance(a: &RateRegion, b: &RateRegion) -> f64 {
    let one_way = |from: &RateRegion, to: &RateRegion| {
        from.vertices()
            .iter()
            .map(|&v| to.distance_to(v))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Clips a convex polygon against the halfplane a·rc + b·rp ≤ c
/// (Sutherland-Hodgman). The input must be in counter-clockwise order.
pub fn clip_halfplane(poly: &[RatePair], a: f64, b: f64, c: f64) -> Vec<RatePair> {
    if poly.is_empty() {
        return Vec::new();
    }
    let inside = |p: RatePair| a * p.rc + b * p.rp <= c + 1e-12;
    let intersect = |p: RatePair, q: RatePair| {
        let fp = a * p.rc + b * p.rp - c;
        let fq = a * q.rc + b * q.rp - c;
        let t = fp / (fp - fq);
        RatePair::new(p.rc + t * (q.rc - p.rc), p.rp + t * (q.rp - p.rp))
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        match (inside(p), inside(q)) {
            (true, true) => out.push(q),
            (true, false) => out.push(intersect(p, q)),
            (false, true) => {
                out.push(intersect(p, q));
                out.push(q);
            }
            (false, false) => {}
        }
    }
    out
}

/// The polytope cut from the nonnegative quadrant by upper bounds:
/// rc ≤ `rc_max`, rp ≤ `rp_max` (skipped when `None`), and any number of
/// sum constraints rc + rp ≤ s.
pub fn bounded_polytope(rc_max: f64, rp_max: Option<f64>, sums: &[f64]) -> RateRegion {
    // Start from the tight bounding rectangle so intersection arithmetic
    // stays at unit scale.
    let min_sum = sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let rc_up = rc_max.min(min_sum).clamp(0.0, 1e6);
    let rp_up = rp_max
        .unwrap_or(f64::INFINITY)
        .min(min_sum)
        .clamp(0.0, 1e6);
    let mut poly = vec![
        RatePair::new(0.0, 0.0),
        RatePair::new(rc_up, 0.0),
        RatePair::new(rc_up, rp_up),
        RatePair::new(0.0, rp_up),
    ];
    for &s in sums {
        poly = clip_halfplane(&poly, 1.0, 1.0, s.max(0.0));
    }
    RateRegion::from_points(&poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(rc: f64, rp: f64) -> RatePair {
        RatePair::new(rc, rp)
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = vec![
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(0.5, 0.0),
            pt(0.25, 0.25),
            pt(0.0, 1.0),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 3);
        assert!(hull.contains(&pt(0.0, 0.0)));
        assert!(hull.contains(&pt(1.0, 0.0)));
        assert!(hull.contains(&pt(0.0, 1.0)));
    }

    #[test]
    fn hull_handles_degenerate_input() {
        assert_eq!(convex_hull(&[pt(0.3, 0.4)]).len(), 1);
        let seg = convex_hull(&[pt(0.0, 0.0), pt(0.5, 0.5), pt(1.0, 1.0)]);
        assert_eq!(seg, vec![pt(0.0, 0.0), pt(1.0, 1.0)]);
        let dup = convex_hull(&[pt(0.2, 0.2), pt(0.2, 0.2)]);
        assert_eq!(dup.len(), 1);
    }

    #[test]
    fn contains_origin_vertex_and_outside() {
        let region = RateRegion::from_points(&[pt(0.0, 0.0), pt(0.5, 0.0), pt(0.0, 0.5)]);
        assert!(region.contains(pt(0.0, 0.0), 0.0));
        assert!(region.contains(pt(0.5, 0.0), 1e-9));
        assert!(!region.contains(pt(0.4, 0.4), 1e-6));
        assert!(region.contains(pt(0.25, 0.25 + 5e-7), 1e-6));
    }

    #[test]
    fn contains_degenerate_segment() {
        let seg = RateRegion::from_points(&[pt(0.0, 0.0), pt(0.0, 0.5)]);
        assert!(seg.contains(pt(0.0, 0.25), 1e-12));
        assert!(!seg.contains(pt(0.1, 0.25), 1e-3));
    }

    #[test]
    fn hausdorff_examples() {
        let tri = RateRegion::from_points(&[pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)]);
        assert_eq!(region_distance(&tri, &tri), 0.0);

        let shifted = RateRegion::from_points(&[pt(0.3, 0.0), pt(1.3, 0.0), pt(0.3, 1.0)]);
        assert!((region_distance(&tri, &shifted) - 0.3).abs() < 1e-12);

        // rectangle vs its hull with one extra exterior vertex at distance d
        let rect = RateRegion::from_points(&[pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)]);
        let d = 0.25;
        let with_spike = RateRegion::from_points(&[
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(1.0 + d, 0.5),
            pt(1.0, 1.0),
            pt(0.0, 1.0),
        ]);
        assert!((region_distance(&rect, &with_spike) - d).abs() < 1e-12);
    }

    #[test]
    fn clipping_builds_expected_polytope() {
        // rc <= 0.4, rp <= 0.3, rc + rp <= 0.5 cuts the corner
        let region = bounded_polytope(0.4, Some(0.3), &[0.5]);
        let vs = region.vertices();
        assert_eq!(vs.len(), 5);
        assert!(region.contains(pt(0.4, 0.1), 1e-12));
        assert!(region.contains(pt(0.2, 0.3), 1e-12));
        assert!(!region.contains(pt(0.35, 0.3), 1e-9));

        // degenerate: rp bound of zero gives a segment on the rc axis
        let seg = bounded_polytope(0.4, Some(0.0), &[1.0]);
        assert_eq!(seg.vertices().len(), 2);

        // everything zero collapses to the origin
        let origin = bounded_polytope(0.0, Some(0.0), &[0.0]);
        assert_eq!(origin.vertices().len(), 1);
        assert_eq!(origin.vertices()[0], pt(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn hull_contains_every_input_point(
            raw in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 3..12)
        ) {
            let pts: Vec<RatePair> = raw.into_iter().map(|(a, b)| pt(a, b)).collect();
            let region = RateRegion::from_points(&pts);
            for &p in &pts {
                prop_assert!(region.contains(p, 1e-9));
            }
        }

        #[test]
        fn hausdorff_is_symmetric_and_zero_on_self(
            raw_a in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 3..8),
            raw_b in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 3..8),
        ) {
            let a = RateRegion::from_points(
                &raw_a.into_iter().map(|(x, y)| pt(x, y)).collect::<Vec<_>>(),
            );
            let b = RateRegion::from_points(
                &raw_b.into_iter().map(|(x, y)| pt(x, y)).collect::<Vec<_>>(),
            );
            prop_assert!(region_distance(&a, &a) <= 1e-12);
            prop_assert!((region_distance(&a, &b) - region_distance(&b, &a)).abs() < 1e-12);
        }

        #[test]
        fn clip_never_grows_the_polygon(
            bound in 0.05..1.0f64,
            raw in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 3..8),
        ) {
            let pts: Vec<RatePair> = raw.into_iter().map(|(a, b)| pt(a, b)).collect();
            let region = RateRegion::from_points(&pts);
            if region.vertices().len() >= 3 {
                let clipped = clip_halfplane(region.vertices(), 1.0, 1.0, bound);
                for v in RateRegion::from_points(&clipped).vertices() {
                    if clipped.is_empty() {
                        break; // the halfplane misses the polygon entirely
                    }
                    prop_assert!(v.rc + v.rp <= bound + 1e-9);
                    prop_assert!(region.contains(*v, 1e-9));
                }
            }
        }
    }
}

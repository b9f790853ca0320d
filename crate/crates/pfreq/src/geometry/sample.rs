//! Seeded random convex polygons for property tests and sweeps.

use super::{cross2, norm2, sub, ConvexPolygon, Point};
use rand::Rng;

/// Convex hull of a small random point cloud in a disk, retried until the
/// hull has at least 5 strictly convex vertices. Deterministic given the rng.
pub fn random_convex_polygon<R: Rng + ?Sized>(rng: &mut R) -> ConvexPolygon {
    loop {
        let radius: f64 = rng.random_range(0.5..2.0);
        let pts: Vec<Point> = (0..14)
            .map(|_| {
                // rejection-free disk sample
                let r = radius * rng.random_range(0.0f64..1.0).sqrt();
                let th = rng.random_range(0.0..std::f64::consts::TAU);
                [r * th.cos(), r * th.sin()]
            })
            .collect();
        let hull = convex_hull(&pts);
        if hull.len() < 5 {
            continue;
        }
        if let Ok(pg) = ConvexPolygon::new(hull) {
            return pg;
        }
    }
}

/// Andrew monotone chain with a strict turn threshold so near-collinear
/// triples never survive into the hull.
fn convex_hull(pts: &[Point]) -> Vec<Point> {
    let mut s: Vec<Point> = pts.to_vec();
    s.sort_by(|a, b| f64::total_cmp(&a[0], &b[0]).then(f64::total_cmp(&a[1], &b[1])));
    s.dedup_by(|a, b| a == b);
    if s.len() < 3 {
        return s;
    }
    let strict = |o: Point, a: Point, b: Point| {
        let u = sub(a, o);
        let w = sub(b, a);
        cross2(u, w) > 1e-6 * norm2(u) * norm2(w)
    };
    let mut lower: Vec<Point> = Vec::new();
    for &p in &s {
        while lower.len() >= 2 && !strict(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in s.iter().rev() {
        while upper.len() >= 2 && !strict(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn polygons_are_valid_and_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(123);
        let mut b = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20 {
            let pa = random_convex_polygon(&mut a);
            let pb = random_convex_polygon(&mut b);
            assert_eq!(pa.vertices(), pb.vertices());
            assert!(pa.len() >= 5);
            assert!(pa.measure() > 0.0);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(2);
        let pa = random_convex_polygon(&mut a);
        let pb = random_convex_polygon(&mut b);
        assert_ne!(pa.vertices(), pb.vertices());
    }
}

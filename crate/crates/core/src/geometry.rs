//! Hexagonal cell with both gNBs co-located at one vertex.

use rand::Rng;

/// Regular hexagon whose vertex-to-opposite-vertex span equals the largest
/// gNB–UE distance. The gNBs sit at the origin, which is a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    max_distance_m: f64,
}

impl CellGeometry {
    pub fn new(max_distance_m: f64) -> Self {
        assert!(max_distance_m > 0.0);
        Self { max_distance_m }
    }

    pub fn max_distance_m(&self) -> f64 {
        self.max_distance_m
    }

    fn circumradius(&self) -> f64 {
        self.max_distance_m / 2.0
    }

    /// Hexagon centred at `(R, 0)` with vertices at `(0,0)` and `(2R,0)`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let r = self.circumradius();
        let s3 = 3f64.sqrt();
        let dx = (x - r).abs();
        let dy = y.abs();
        dy <= r * s3 / 2.0 + 1e-9 && s3 * dx + dy <= s3 * r + 1e-9
    }

    /// Uniform point inside the hexagon.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let r = self.circumradius();
        let h = r * 3f64.sqrt() / 2.0;
        loop {
            let x = rng.random::<f64>() * 2.0 * r;
            let y = (rng.random::<f64>() * 2.0 - 1.0) * h;
            if self.contains(x, y) && (x != 0.0 || y != 0.0) {
                return (x, y);
            }
        }
    }
}

/// Drops `n` UEs uniformly in the cell and returns their gNB distances.
pub fn drop_ues<R: Rng + ?Sized>(n: usize, geometry: &CellGeometry, rng: &mut R) -> Vec<f64> {
    assert!(n >= 1, "at least one UE");
    (0..n)
        .map(|_| {
            let (x, y) = geometry.sample_point(rng);
            x.hypot(y).min(geometry.max_distance_m())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RngStreams;

    #[test]
    fn vertices_and_centre() {
        let g = CellGeometry::new(133.0);
        assert!(g.contains(0.0, 0.0));
        assert!(g.contains(133.0, 0.0));
        assert!(g.contains(66.5, 0.0));
        assert!(!g.contains(-1.0, 0.0));
        assert!(!g.contains(10.0, 50.0));
    }

    #[test]
    fn drops_stay_inside_and_are_reproducible() {
        let g = CellGeometry::new(133.0);
        let a = drop_ues(2000, &g, &mut RngStreams::new(5).stream("drop"));
        let b = drop_ues(2000, &g, &mut RngStreams::new(5).stream("drop"));
        assert_eq!(a, b);
        assert!(a.iter().all(|&d| d > 0.0 && d <= 133.0));
        // Uniform in area: mean distance from a vertex is well inside the cell.
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!(mean > 55.0 && mean < 80.0, "mean {mean}");
    }
}

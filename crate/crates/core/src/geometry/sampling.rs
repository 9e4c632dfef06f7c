use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::NetworkParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Shortest distance on the torus of side `side`.
    pub fn torus_distance(self, other: Point, side: f64) -> f64 {
        let wrap = |d: f64| d - side * (d / side).round();
        wrap(self.x - other.x).hypot(wrap(self.y - other.y))
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

/// One sampled cluster network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRealization {
    pub bs_positions: Vec<Point>,
    /// Absolute user positions, grouped by serving base station.
    pub users: Vec<Vec<Point>>,
    /// Per base station, user distances sorted ascending (rank order).
    pub ranked_distances: Vec<Vec<f64>>,
}

/// Homogeneous PPP of `intensity` points per km² on `[0, side]²`.
pub fn sample_ppp<R: Rng + ?Sized>(intensity: f64, side: f64, rng: &mut R) -> Vec<Point> {
    let mean = intensity * side * side;
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean)
        .expect("finite positive Poisson mean")
        .sample(rng) as usize;
    (0..count)
        .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect()
}

/// Uniform point in the disk of radius `radius` centered at the origin.
pub fn sample_disk_offset<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    Point::new(r * phi.cos(), r * phi.sin())
}

/// Indices of `distances` in rank order. Ties keep index order.
pub fn rank_by_distance(distances: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
    order
}

/// Matern cluster process with exactly `c̄` users per cluster.
pub fn sample_mcp<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> ClusterRealization {
    let bs_positions = sample_ppp(params.bs_intensity, params.region_side, rng);
    populate_clusters(bs_positions, params, rng)
}

/// Drops `c̄` users uniformly on the disk of radius `R` around each given
/// base station.
pub fn populate_clusters<R: Rng + ?Sized>(
    bs_positions: Vec<Point>,
    params: &NetworkParams,
    rng: &mut R,
) -> ClusterRealization {
    let mut users = Vec::with_capacity(bs_positions.len());
    let mut ranked_distances = Vec::with_capacity(bs_positions.len());
    for &bs in &bs_positions {
        let offsets: Vec<Point> = (0..params.users_per_cluster)
            .map(|_| sample_disk_offset(params.cluster_radius, rng))
            .collect();
        let dists: Vec<f64> = offsets.iter().map(|o| o.norm()).collect();
        ranked_distances.push(rank_by_distance(&dists).into_iter().map(|i| dists[i]).collect());
        users.push(offsets.into_iter().map(|o| bs + o).collect());
    }
    ClusterRealization {
        bs_positions,
        users,
        ranked_distances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_intensity_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_ppp(0.0, 10.0, &mut rng).is_empty());
    }

    #[test]
    fn ppp_count_mean_and_variance() {
        // mean 2 over 1e5 draws: sd of the sample mean is sqrt(2/1e5)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let counts: Vec<f64> = (0..n)
            .map(|_| sample_ppp(0.02, 10.0, &mut rng).len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 3.0 * (2.0f64 / n as f64).sqrt(), "{mean}");

        let counts: Vec<f64> = (0..n)
            .map(|_| sample_ppp(0.08, 10.0, &mut rng).len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / mean - 1.0).abs() < 0.05, "var {var} mean {mean}");
    }

    #[test]
    fn ppp_points_inside_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in sample_ppp(1.0, 5.0, &mut rng) {
            assert!((0.0..5.0).contains(&p.x) && (0.0..5.0).contains(&p.y));
        }
    }

    #[test]
    fn mcp_structure() {
        let params = NetworkParams {
            users_per_cluster: 1,
            bs_intensity: 0.2,
            ..NetworkParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let real = sample_mcp(&params, &mut rng);
        assert!(!real.bs_positions.is_empty());
        assert!(real.users.iter().all(|u| u.len() == 1));

        let params = NetworkParams::default().with_bs_count(30.0);
        let real = sample_mcp(&params, &mut rng);
        for ((bs, users), ranked) in real
            .bs_positions
            .iter()
            .zip(&real.users)
            .zip(&real.ranked_distances)
        {
            assert_eq!(users.len(), 8);
            let mut raw: Vec<f64> = users.iter().map(|u| u.distance(*bs)).collect();
            assert!(raw.iter().all(|d| *d <= params.cluster_radius + 1e-12));
            raw.sort_by(f64::total_cmp);
            for (a, b) in raw.iter().zip(ranked) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(ranked.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn mcp_seed_determinism() {
        let params = NetworkParams::default().with_bs_count(8.0);
        let a = sample_mcp(&params, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_mcp(&params, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn ties_break_by_index() {
        assert_eq!(rank_by_distance(&[0.5, 0.2, 0.5, 0.1]), vec![3, 1, 0, 2]);
    }

    #[test]
    fn torus_distance_wraps() {
        let a = Point::new(0.5, 0.5);
        let b = Point::new(9.5, 9.5);
        assert!((a.torus_distance(b, 10.0) - 2f64.sqrt()).abs() < 1e-12);
    }
}

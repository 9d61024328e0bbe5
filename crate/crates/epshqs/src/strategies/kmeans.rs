//! Weighted k-means with k-means++ seeding, used by the diversity-batched
//! strategy. Operates on normalized coordinates.

use rand::Rng;

pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    1 + sorted.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Draw an index with probability proportional to `weights`; assumes a
/// positive total.
fn weighted_index(weights: &[f64], total: f64, rng: &mut impl Rng) -> usize {
    let mut u = rng.random_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn plus_plus_init(
    points: &[Vec<f64>],
    weights: &[f64],
    k: usize,
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let total: f64 = weights.iter().sum();
    centroids.push(points[weighted_index(weights, total, rng)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let scores: Vec<f64> = d2.iter().zip(weights).map(|(&d, &w)| d * w).collect();
        let total: f64 = scores.iter().sum();
        let next = if total > 0.0 {
            weighted_index(&scores, total, rng)
        } else {
            // every remaining point coincides with a centroid
            weighted_index(weights, weights.iter().sum(), rng)
        };
        centroids.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centroids.last().unwrap()));
        }
    }
    centroids
}

fn lloyd(
    points: &[Vec<f64>],
    weights: &[f64],
    mut centroids: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
) -> KMeansResult {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assign = vec![0usize; points.len()];
    for _ in 0..max_iter {
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut wsum = vec![0.0; k];
        for (i, p) in points.iter().enumerate() {
            let c = assign[i];
            wsum[c] += weights[i];
            for (s, &x) in sums[c].iter_mut().zip(p) {
                *s += weights[i] * x;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if wsum[c] > 0.0 {
                let new: Vec<f64> = sums[c].iter().map(|s| s / wsum[c]).collect();
                shift = shift.max(sq_dist(&new, &centroids[c]).sqrt());
                centroids[c] = new;
            } else {
                // Empty cluster: re-seed at the point currently worst served.
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| {
                        let da = centroids.iter().map(|m| sq_dist(a, m)).fold(f64::INFINITY, f64::min);
                        let db = centroids.iter().map(|m| sq_dist(b, m)).fold(f64::INFINITY, f64::min);
                        da.total_cmp(&db)
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                shift = f64::INFINITY;
                centroids[c] = points[far].clone();
            }
        }
        if shift < tol {
            break;
        }
    }
    let inertia = points
        .iter()
        .zip(weights)
        .map(|(p, &w)| {
            w * centroids
                .iter()
                .map(|c| sq_dist(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    KMeansResult { centroids, inertia }
}

/// Exact weighted 2-means by bipartition enumeration. Worth it for tiny
/// inputs, where Lloyd restarts can still land in a local optimum.
fn exact_two_means(points: &[Vec<f64>], weights: &[f64]) -> KMeansResult {
    let n = points.len();
    let dim = points[0].len();
    let mut best: Option<KMeansResult> = None;
    // Point n-1 pinned to one side to skip mirror partitions.
    for mask in 1u32..(1 << (n - 1)) {
        let mut centroids = vec![vec![0.0; dim]; 2];
        let mut wsum = [0.0f64; 2];
        for i in 0..n {
            let c = usize::from(mask >> i & 1 == 0);
            wsum[c] += weights[i];
            for (s, &x) in centroids[c].iter_mut().zip(&points[i]) {
                *s += weights[i] * x;
            }
        }
        if wsum[0] <= 0.0 || wsum[1] <= 0.0 {
            continue;
        }
        for c in 0..2 {
            for s in centroids[c].iter_mut() {
                *s /= wsum[c];
            }
        }
        let inertia: f64 = (0..n)
            .map(|i| {
                let c = usize::from(mask >> i & 1 == 0);
                weights[i] * sq_dist(&points[i], &centroids[c])
            })
            .sum();
        if best.as_ref().is_none_or(|b| inertia < b.inertia) {
            best = Some(KMeansResult { centroids, inertia });
        }
    }
    best.expect("at least one valid bipartition")
}

/// Largest input size the exact 2-means path handles; 2^15 bipartitions.
const EXACT_TWO_MEANS_MAX: usize = 16;

/// Weighted k-means. Returns `None` when the input has fewer than `k`
/// distinct points. Runs `n_init` k-means++ restarts and keeps the lowest
/// weighted inertia; k=2 on tiny inputs is solved exactly instead.
pub fn weighted_kmeans(
    points: &[Vec<f64>],
    weights: &[f64],
    k: usize,
    n_init: usize,
    max_iter: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Option<KMeansResult> {
    assert!(k >= 1 && points.len() >= k && points.len() == weights.len());
    if distinct_count(points) < k {
        return None;
    }
    // Degenerate weights (all ~zero) fall back to uniform.
    let weights: Vec<f64> = if weights.iter().sum::<f64>() <= 1e-12 {
        vec![1.0; weights.len()]
    } else {
        weights.to_vec()
    };
    if k == 2 && points.len() <= EXACT_TWO_MEANS_MAX {
        return Some(exact_two_means(points, &weights));
    }
    let mut best: Option<KMeansResult> = None;
    for _ in 0..n_init {
        let init = plus_plus_init(points, &weights, k, rng);
        let result = lloyd(points, &weights, init, max_iter, tol);
        if best.as_ref().is_none_or(|b| result.inertia < b.inertia) {
            best = Some(result);
        }
    }
    best
}

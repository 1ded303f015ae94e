//! UMAP: fuzzy k-NN graph plus negative-sampled cross-entropy layout.
//!
//! The layout loop follows the usual epoch scheduling: edge `e` is sampled
//! every `max_w / w_e` epochs and carries `negative_samples` repulsive draws
//! per positive sample. Initialization is uniform on (−10, 10).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sq_dist, Matrix, SeededRng};

const SIGMA_STEPS: usize = 64;
const SIGMA_TOL: f64 = 1e-5;
const MIN_SCALE: f64 = 1e-3;
const GRAD_CLIP: f64 = 4.0;
const AB_GRID: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UmapConfig {
    pub out_dims: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub epochs: usize,
    pub negative_samples: usize,
    pub learning_rate: f64,
    /// Kernel parameters; fitted from `min_dist`/`spread` when absent.
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl Default for UmapConfig {
    fn default() -> Self {
        UmapConfig {
            out_dims: 3,
            n_neighbors: 15,
            min_dist: 0.1,
            spread: 1.0,
            epochs: 200,
            negative_samples: 5,
            learning_rate: 1.0,
            a: None,
            b: None,
        }
    }
}

impl UmapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.out_dims == 0 {
            return Err(Error::Config("UMAP out_dims must be at least 1".into()));
        }
        if self.n_neighbors < 2 {
            return Err(Error::Config("UMAP n_neighbors must be at least 2".into()));
        }
        if !(self.spread > 0.0) || !(self.min_dist >= 0.0) || self.min_dist > self.spread {
            return Err(Error::Config(format!(
                "UMAP needs 0 <= min_dist <= spread and spread > 0 (got {}, {})",
                self.min_dist, self.spread
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("UMAP learning_rate must be positive".into()));
        }
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("UMAP kernel parameter {name} must be positive")));
                }
            }
        }
        Ok(())
    }

    pub fn kernel_params(&self) -> (f64, f64) {
        match (self.a, self.b) {
            (Some(a), Some(b)) => (a, b),
            _ => fit_ab(self.spread, self.min_dist),
        }
    }
}

/// Exact neighbours of each row, self excluded, ordered by (distance, index).
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    pub indices: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

pub fn knn_exact(x: &Matrix, k: usize) -> Result<Knn> {
    let n = x.rows();
    if k >= n {
        return Err(Error::Input(format!("need more than {k} rows for {k} neighbours, got {n}")));
    }
    let mut indices = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        let xi = x.row(i);
        cand.extend((0..n).filter(|&j| j != i).map(|j| (sq_dist(xi, x.row(j)), j)));
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < cand.len() {
            cand.select_nth_unstable_by(k, cmp);
            cand.truncate(k);
        }
        cand.sort_by(cmp);
        indices.push(cand.iter().map(|c| c.1).collect());
        distances.push(cand.iter().map(|c| c.0.sqrt()).collect());
    }
    Ok(Knn { indices, distances })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothKnn {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Whether the membership sum reached `log2(k)` within tolerance.
    pub converged: Vec<bool>,
}

/// Per-point `ρ_i` (nearest-neighbour distance) and `σ_i` such that
/// `Σ_j exp(−max(0, d_ij − ρ_i)/σ_i) = log2(k)`.
pub fn smooth_knn(knn: &Knn) -> SmoothKnn {
    let n = knn.distances.len();
    let k = knn.distances.first().map_or(0, Vec::len);
    let target = (k as f64).log2();
    let all_mean = {
        let total: f64 = knn.distances.iter().flatten().sum();
        total / (n * k).max(1) as f64
    };
    let mut out = SmoothKnn {
        rho: vec![0.0; n],
        sigma: vec![1.0; n],
        converged: vec![false; n],
    };
    for (i, d) in knn.distances.iter().enumerate() {
        let rho = d.first().copied().unwrap_or(0.0);
        let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
        let mut psum = 0.0;
        for _ in 0..SIGMA_STEPS {
            psum = d.iter().map(|&dj| (-(dj - rho).max(0.0) / mid).exp()).sum();
            if (psum - target).abs() < SIGMA_TOL {
                break;
            }
            if psum > target {
                hi = mid;
                mid = 0.5 * (lo + hi);
            } else {
                lo = mid;
                mid = if hi.is_finite() { 0.5 * (lo + hi) } else { mid * 2.0 };
            }
        }
        out.converged[i] = (psum - target).abs() < 1e-4;
        let mean_i = d.iter().sum::<f64>() / k.max(1) as f64;
        let floor = MIN_SCALE * if rho > 0.0 { mean_i } else { all_mean };
        out.rho[i] = rho;
        out.sigma[i] = mid.max(floor);
    }
    out
}

/// Probabilistic OR: `a + b − ab`.
pub fn fuzzy_union(a: f64, b: f64) -> f64 {
    a + b - a * b
}

pub fn membership(d: f64, rho: f64, sigma: f64) -> f64 {
    (-(d - rho).max(0.0) / sigma).exp()
}

/// Symmetric fuzzy graph stored as unordered pairs `i < j`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl FuzzyGraph {
    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for &(i, j, w) in &self.edges {
            m[(i, j)] = w;
            m[(j, i)] = w;
        }
        m
    }
}

pub fn fuzzy_graph(knn: &Knn, smooth: &SmoothKnn) -> FuzzyGraph {
    let n = knn.indices.len();
    // (lo, hi, w_{hi|lo} contribution, w_{lo|hi} contribution)
    let mut directed: Vec<(usize, usize, f64, f64)> = Vec::new();
    for i in 0..n {
        for (&j, &d) in knn.indices[i].iter().zip(&knn.distances[i]) {
            let w = membership(d, smooth.rho[i], smooth.sigma[i]);
            if i < j {
                directed.push((i, j, w, 0.0));
            } else {
                directed.push((j, i, 0.0, w));
            }
        }
    }
    directed.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut idx = 0;
    while idx < directed.len() {
        let (i, j) = (directed[idx].0, directed[idx].1);
        let (mut fwd, mut back) = (0.0f64, 0.0f64);
        while idx < directed.len() && directed[idx].0 == i && directed[idx].1 == j {
            fwd = fwd.max(directed[idx].2);
            back = back.max(directed[idx].3);
            idx += 1;
        }
        let w = fuzzy_union(fwd, back);
        if w > 0.0 {
            edges.push((i, j, w));
        }
    }
    FuzzyGraph { n, edges }
}

/// Least-squares fit of `(1 + a x^{2b})⁻¹` to the piecewise target curve
/// (1 below `min_dist`, `exp(−(x − min_dist)/spread)` above) on a uniform grid
/// over `[0, 3·spread]`, by Levenberg–Marquardt.
pub fn fit_ab(spread: f64, min_dist: f64) -> (f64, f64) {
    let (xs, ys) = ab_target(spread, min_dist);
    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut lambda = 1e-3;
    let mut cost = ab_sse(a, b, &xs, &ys);
    for _ in 0..500 {
        // normal equations J^T J δ = −J^T r
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            let (f, da, db) = kernel_with_grad(a, b, x);
            let r = f - y;
            let j = [da, db];
            for p in 0..2 {
                jtr[p] += j[p] * r;
                for q in 0..2 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let da = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let db = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, nb) = (a + da, b + db);
            if na > 0.0 && nb > 0.0 {
                let c = ab_sse(na, nb, &xs, &ys);
                if c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    a = na;
                    b = nb;
                    cost = c;
                    lambda = (lambda * 0.1).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

/// Grid and target values used by [`fit_ab`].
pub fn ab_target(spread: f64, min_dist: f64) -> (Vec<f64>, Vec<f64>) {
    let hi = 3.0 * spread;
    let xs: Vec<f64> = (0..AB_GRID).map(|i| hi * i as f64 / (AB_GRID - 1) as f64).collect();
    let ys = xs
        .iter()
        .map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() })
        .collect();
    (xs, ys)
}

pub fn ab_sse(a: f64, b: f64, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (kernel_with_grad(a, b, x).0 - y).powi(2))
        .sum()
}

fn kernel_with_grad(a: f64, b: f64, x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    let p = x.powf(2.0 * b);
    let denom = 1.0 + a * p;
    let f = 1.0 / denom;
    let da = -p / (denom * denom);
    let db = -a * p * 2.0 * x.ln() / (denom * denom);
    (f, da, db)
}

pub fn umap_embed(x: &Matrix, cfg: &UmapConfig, rng: &mut SeededRng) -> Result<Matrix> {
    cfg.validate()?;
    let n = x.rows();
    if n <= cfg.n_neighbors {
        return Err(Error::Input(format!(
            "UMAP needs more than {} rows, got {n}",
            cfg.n_neighbors
        )));
    }
    if !x.all_finite() {
        return Err(Error::Input("UMAP input contains non-finite values".into()));
    }
    let knn = knn_exact(x, cfg.n_neighbors)?;
    let smooth = smooth_knn(&knn);
    let unconverged = smooth.converged.iter().filter(|c| !**c).count();
    if unconverged > 0 {
        log::warn!("UMAP: sigma search hit the floor for {unconverged} points");
    }
    let graph = fuzzy_graph(&knn, &smooth);
    let (a, b) = cfg.kernel_params();
    Ok(optimize_layout(&graph, cfg, a, b, rng))
}

fn optimize_layout(graph: &FuzzyGraph, cfg: &UmapConfig, a: f64, b: f64, rng: &mut SeededRng) -> Matrix {
    let n = graph.n;
    let dims = cfg.out_dims;
    let epochs = cfg.epochs;
    let mut y: Vec<f64> = (0..n * dims).map(|_| rng.uniform(-10.0, 10.0)).collect();

    let max_w = graph.edges.iter().map(|e| e.2).fold(0.0f64, f64::max);
    let cutoff = if epochs > 0 { max_w / epochs as f64 } else { 0.0 };
    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut eps = Vec::new();
    for &(i, j, w) in &graph.edges {
        if w < cutoff {
            continue;
        }
        for (h, t) in [(i, j), (j, i)] {
            heads.push(h);
            tails.push(t);
            eps.push(max_w / w);
        }
    }
    let eps_neg: Vec<f64> = eps.iter().map(|e| e / cfg.negative_samples.max(1) as f64).collect();
    let mut next = eps.clone();
    let mut next_neg = eps_neg.clone();

    let mut h = vec![0.0; dims];
    for epoch in 0..epochs {
        let alpha = cfg.learning_rate * (1.0 - epoch as f64 / epochs as f64);
        let e_now = epoch as f64;
        for e in 0..heads.len() {
            if next[e] > e_now {
                continue;
            }
            let (hi, ti) = (heads[e], tails[e]);
            h.copy_from_slice(&y[hi * dims..(hi + 1) * dims]);
            let d2 = sq_dist(&h, &y[ti * dims..(ti + 1) * dims]);
            let coef = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for k in 0..dims {
                let g = clip(coef * (h[k] - y[ti * dims + k])) * alpha;
                y[hi * dims + k] += g;
                y[ti * dims + k] -= g;
            }
            next[e] += eps[e];

            if cfg.negative_samples > 0 {
                let n_neg = ((e_now - next_neg[e]) / eps_neg[e]).floor().max(0.0) as usize;
                for _ in 0..n_neg {
                    let other = rng.below(n);
                    if other == hi {
                        continue;
                    }
                    h.copy_from_slice(&y[hi * dims..(hi + 1) * dims]);
                    let d2 = sq_dist(&h, &y[other * dims..(other + 1) * dims]);
                    let coef = if d2 > 0.0 {
                        2.0 * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0))
                    } else {
                        0.0
                    };
                    for k in 0..dims {
                        let g = if coef > 0.0 {
                            clip(coef * (h[k] - y[other * dims + k]))
                        } else {
                            GRAD_CLIP
                        };
                        y[hi * dims + k] += g * alpha;
                    }
                }
                next_neg[e] += n_neg as f64 * eps_neg[e];
            }
        }
    }
    Matrix::from_vec(n, dims, y).expect("layout buffer has n*dims entries")
}

fn clip(v: f64) -> f64 {
    v.clamp(-GRAD_CLIP, GRAD_CLIP)
}

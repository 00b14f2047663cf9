//! Cross-method comparison metrics over a methods x tasks score table:
//! normalized accuracy, mean rank, best %, and win %.

use ndarray::Array2;
use serde::Serialize;

/// Scores for several methods on the same tasks. `higher_is_better` applies
/// to every column; mixed-direction tables should be converted by negating
/// the loss-like columns first.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub methods: Vec<String>,
    pub tasks: Vec<String>,
    /// `scores[[m, t]]` is method m's score on task t.
    pub scores: Array2<f64>,
    pub higher_is_better: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    /// Mean over tasks of per-task min-max normalized score in [0, 100].
    pub normalized_accuracy: f64,
    /// Mean over tasks of the method's rank, 0 = best; ties share the mean
    /// of the ranks they span.
    pub mean_rank: f64,
    /// Percentage of tasks on which the method attains the best score
    /// (ties count).
    pub best_pct: f64,
    /// Percentage of tasks on which the method strictly beats every other
    /// method.
    pub win_pct: f64,
}

pub fn metric_suite(table: &ScoreTable) -> Vec<MethodSummary> {
    let (n_methods, n_tasks) = (table.methods.len(), table.tasks.len());
    assert_eq!(table.scores.shape(), [n_methods, n_tasks]);
    assert!(n_methods > 0 && n_tasks > 0, "score table must be nonempty");
    let sign = if table.higher_is_better { 1.0 } else { -1.0 };

    let mut norm_sum = vec![0.0; n_methods];
    let mut rank_sum = vec![0.0; n_methods];
    let mut best_count = vec![0usize; n_methods];
    let mut win_count = vec![0usize; n_methods];

    for t in 0..n_tasks {
        let col: Vec<f64> = (0..n_methods).map(|m| sign * table.scores[[m, t]]).collect();
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo.is_finite() && hi.is_finite(), "non-finite score in task column {t}");

        for (m, &s) in col.iter().enumerate() {
            // Degenerate columns (all methods tied) score 100 for everyone.
            let norm = if hi > lo { (s - lo) / (hi - lo) * 100.0 } else { 100.0 };
            norm_sum[m] += norm;

            let strictly_better = col.iter().filter(|&&o| o > s).count();
            let tied = col.iter().filter(|&&o| o == s).count();
            // Rank 0 = best; a tie group spanning ranks r..r+k-1 shares
            // their mean.
            rank_sum[m] += strictly_better as f64 + (tied as f64 - 1.0) / 2.0;
            if s == hi {
                best_count[m] += 1;
                if tied == 1 {
                    win_count[m] += 1;
                }
            }
        }
    }

    (0..n_methods)
        .map(|m| MethodSummary {
            method: table.methods[m].clone(),
            normalized_accuracy: norm_sum[m] / n_tasks as f64,
            mean_rank: rank_sum[m] / n_tasks as f64,
            best_pct: best_count[m] as f64 / n_tasks as f64 * 100.0,
            win_pct: win_count[m] as f64 / n_tasks as f64 * 100.0,
        })
        .collect()
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(n >= 2.0, "correlation needs at least two points");
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Average ranks (0-based; ties share their mean rank).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Rank 2-D points by angle around their centroid, cutting the circle at
/// the largest angular gap so a 1-D manifold of points gets a consistent
/// linear order regardless of where it sits on the circle.
pub fn angular_ranks(points: &[(f64, f64)]) -> Vec<f64> {
    let n = points.len();
    assert!(n >= 2);
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let angles: Vec<f64> = points
        .iter()
        .map(|&(x, y)| (y - cy).atan2(x - cx))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].partial_cmp(&angles[b]).unwrap());
    // Find the largest gap between consecutive sorted angles (wrapping).
    let mut cut = 0;
    let mut widest = f64::NEG_INFINITY;
    for i in 0..n {
        let a = angles[order[i]];
        let b = angles[order[(i + 1) % n]];
        let gap = if i + 1 == n {
            b + std::f64::consts::TAU - a
        } else {
            b - a
        };
        if gap > widest {
            widest = gap;
            cut = (i + 1) % n;
        }
    }
    let mut ranks = vec![0.0; n];
    for k in 0..n {
        ranks[order[(cut + k) % n]] = k as f64;
    }
    ranks
}

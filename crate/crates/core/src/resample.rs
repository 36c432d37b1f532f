//! Class rebalancing on the training partition: SMOTE oversampling followed by
//! Tomek-link cleaning.
//!
//! Distances are Euclidean in the (already standardized) feature space.
//! Synthesis draws come from one seeded stream per class, so results do not
//! depend on thread count.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::seeding;
use crate::{Error, Result};

/// What Tomek cleaning removes from each link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TomekPolicy {
    /// Remove only majority-class members; minority data survives intact.
    RemoveMajorityOnly,
    /// Remove both members of every link.
    RemoveBoth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleConfig {
    pub k_neighbors: usize,
    /// Minority/majority ratio after SMOTE.
    pub target_ratio: f64,
    pub tomek_policy: TomekPolicy,
    pub seed: u64,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        ResampleConfig {
            k_neighbors: 5,
            target_ratio: 1.0,
            tomek_policy: TomekPolicy::RemoveMajorityOnly,
            seed: 0,
        }
    }
}

impl ResampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::InvalidParam("k_neighbors must be >= 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::InvalidParam(alloc::format!(
                "target_ratio must be in (0,1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

/// Class-count bookkeeping for one resampling run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleReport {
    pub before: Vec<usize>,
    pub after_smote: Vec<usize>,
    pub links_removed: usize,
    pub cleaning_passes: usize,
    pub after: Vec<usize>,
}

fn class_counts(labels: &[usize]) -> Vec<usize> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = alloc::vec![0usize; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    counts
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest points to `target` among `rows` (excluding
/// `target` itself), ties broken by lower index.
fn k_nearest(rows: &Matrix, target: usize, k: usize) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = (0..rows.n_rows())
        .filter(|&j| j != target)
        .map(|j| (sq_dist(rows.row(target), rows.row(j)), j))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    dists.truncate(k);
    dists.into_iter().map(|(_, j)| j).collect()
}

/// SMOTE: oversample every class below `ceil(target_ratio * majority_count)`
/// by interpolating between class members and their k nearest same-class
/// neighbours. Originals are preserved verbatim; synthetic rows are appended.
pub fn smote(rows: &Matrix, labels: &[usize], config: &ResampleConfig) -> Result<(Matrix, Vec<usize>)> {
    config.validate()?;
    if rows.n_rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.n_rows(),
            right: labels.len(),
        });
    }
    let counts = class_counts(labels);
    let majority = counts.iter().max().copied().unwrap_or(0);
    let target = libm::ceil(config.target_ratio * majority as f64) as usize;

    let mut out_rows = rows.clone();
    let mut out_labels = labels.to_vec();
    for (class, &count) in counts.iter().enumerate() {
        if count == 0 || count >= target {
            continue;
        }
        if count <= config.k_neighbors {
            return Err(Error::MinorityTooSmall {
                minority: count,
                k: config.k_neighbors,
            });
        }
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &y)| (y == class).then_some(i))
            .collect();
        let class_rows = rows.select_rows(&members);
        let k = config.k_neighbors.min(class_rows.n_rows() - 1);

        #[cfg(feature = "parallel")]
        let neighbours: Vec<Vec<usize>> = {
            use rayon::prelude::*;
            (0..class_rows.n_rows())
                .into_par_iter()
                .map(|i| k_nearest(&class_rows, i, k))
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let neighbours: Vec<Vec<usize>> = (0..class_rows.n_rows())
            .map(|i| k_nearest(&class_rows, i, k))
            .collect();

        let mut rng = seeding::rng(seeding::derive(config.seed, class as u64));
        for _ in 0..target - count {
            let base = rng.gen_range(0..class_rows.n_rows());
            let nn = neighbours[base][rng.gen_range(0..k)];
            let u: f64 = rng.gen();
            let row: Vec<f64> = class_rows
                .row(base)
                .iter()
                .zip(class_rows.row(nn))
                .map(|(&a, &b)| a + u * (b - a))
                .collect();
            out_rows.push_row(&row);
            out_labels.push(class);
        }
    }
    Ok((out_rows, out_labels))
}

/// Tomek links: pairs `(i, j)`, `i < j`, of opposite-class points that are
/// mutual single nearest neighbours (ties broken by lower index).
pub fn tomek_links(rows: &Matrix, labels: &[usize]) -> Vec<(usize, usize)> {
    let n = rows.n_rows();
    if n < 2 {
        return Vec::new();
    }

    let nearest = |i: usize| -> usize {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = sq_dist(rows.row(i), rows.row(j));
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        best
    };

    #[cfg(feature = "parallel")]
    let nn: Vec<usize> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(nearest).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let nn: Vec<usize> = (0..n).map(nearest).collect();

    (0..n)
        .filter_map(|i| {
            let j = nn[i];
            (i < j && labels[i] != labels[j] && nn[j] == i).then_some((i, j))
        })
        .collect()
}

/// SMOTE followed by Tomek cleaning. Cleaning repeats until no links remain
/// (removing points can create new mutual pairs), so under
/// [`TomekPolicy::RemoveBoth`] the result is link-free.
pub fn smote_tomek(
    rows: &Matrix,
    labels: &[usize],
    config: &ResampleConfig,
) -> Result<(Matrix, Vec<usize>, ResampleReport)> {
    let before = class_counts(labels);
    // Majority is judged on the original distribution; ties -> lower class.
    let majority_class = before
        .iter()
        .enumerate()
        .max_by_key(|&(i, &c)| (c, usize::MAX - i))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let (mut cur_rows, mut cur_labels) = smote(rows, labels, config)?;
    let after_smote = class_counts(&cur_labels);

    let mut links_removed = 0;
    let mut passes = 0;
    loop {
        let links = tomek_links(&cur_rows, &cur_labels);
        if links.is_empty() {
            break;
        }
        let mut drop = alloc::vec![false; cur_rows.n_rows()];
        for (i, j) in links {
            match config.tomek_policy {
                TomekPolicy::RemoveBoth => {
                    drop[i] = true;
                    drop[j] = true;
                }
                TomekPolicy::RemoveMajorityOnly => {
                    if cur_labels[i] == majority_class {
                        drop[i] = true;
                    }
                    if cur_labels[j] == majority_class {
                        drop[j] = true;
                    }
                }
            }
        }
        let removed = drop.iter().filter(|&&d| d).count();
        if removed == 0 {
            // Remaining links do not involve the majority class; policy done.
            break;
        }
        links_removed += removed;
        passes += 1;
        let keep: Vec<usize> = (0..cur_rows.n_rows()).filter(|&i| !drop[i]).collect();
        cur_rows = cur_rows.select_rows(&keep);
        cur_labels = keep.into_iter().map(|i| cur_labels[i]).collect();
    }

    let report = ResampleReport {
        before,
        after_smote,
        links_removed,
        cleaning_passes: passes,
        after: class_counts(&cur_labels),
    };
    Ok((cur_rows, cur_labels, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid_two_class(n0: usize, n1: usize) -> (Matrix, Vec<usize>) {
        // well-separated clusters
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n0 {
            rows.push(vec![i as f64 * 0.01, 0.0]);
            labels.push(0);
        }
        for i in 0..n1 {
            rows.push(vec![10.0 + i as f64 * 0.01, 0.0]);
            labels.push(1);
        }
        (Matrix::from_rows(&rows), labels)
    }

    #[test]
    fn smote_balanced_input_is_identity() {
        let (m, y) = grid_two_class(10, 10);
        let (m2, y2) = smote(&m, &y, &ResampleConfig::default()).unwrap();
        assert_eq!(m2, m);
        assert_eq!(y2, y);
    }

    #[test]
    fn smote_synthetics_lie_on_the_segment() {
        let m = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![50.0, 0.0],
            vec![50.0, 1.0],
            vec![51.0, 0.0],
            vec![51.0, 1.0],
        ]);
        let y = vec![0, 0, 1, 1, 1, 1];
        let cfg = ResampleConfig {
            k_neighbors: 1,
            ..Default::default()
        };
        let (m2, y2) = smote(&m, &y, &cfg).unwrap();
        assert_eq!(y2.iter().filter(|&&c| c == 0).count(), 4);
        for i in m.n_rows()..m2.n_rows() {
            let r = m2.row(i);
            // on the segment between (0,0) and (1,1): x == y, 0 <= x <= 1
            assert!((r[0] - r[1]).abs() <= 1e-12);
            assert!((0.0..=1.0).contains(&r[0]));
        }
    }

    #[test]
    fn smote_hits_the_target_count() {
        let (m, y) = grid_two_class(100, 10);
        let (_, y2) = smote(&m, &y, &ResampleConfig::default()).unwrap();
        assert_eq!(y2.iter().filter(|&&c| c == 1).count(), 100);
        assert_eq!(y2.iter().filter(|&&c| c == 0).count(), 100);
    }

    #[test]
    fn smote_small_minority_is_an_error() {
        let (m, y) = grid_two_class(100, 4);
        assert!(matches!(
            smote(&m, &y, &ResampleConfig::default()),
            Err(Error::MinorityTooSmall { minority: 4, k: 5 })
        ));
    }

    #[test]
    fn tomek_finds_interleaved_pair() {
        let m = Matrix::from_rows(&[
            vec![0.0],
            vec![1.0],
            vec![1.1],
            vec![9.0],
        ]);
        let y = vec![0, 0, 1, 1];
        assert_eq!(tomek_links(&m, &y), vec![(1, 2)]);
    }

    #[test]
    fn tomek_single_class_is_empty() {
        let m = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]);
        assert!(tomek_links(&m, &[0, 0, 0]).is_empty());
    }

    #[test]
    fn smote_tomek_separable_classes_unchanged_by_cleaning() {
        let (m, y) = grid_two_class(20, 10);
        let cfg = ResampleConfig {
            tomek_policy: TomekPolicy::RemoveBoth,
            ..Default::default()
        };
        let (m2, y2, report) = smote_tomek(&m, &y, &cfg).unwrap();
        assert_eq!(report.links_removed, 0);
        assert_eq!(y2.iter().filter(|&&c| c == 1).count(), 20);
        assert_eq!(m2.n_rows(), 40);
    }

    #[test]
    fn majority_only_policy_preserves_minority_count() {
        // interleave the clusters so links exist
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..14 {
            rows.push(vec![i as f64]);
            labels.push(0);
        }
        for i in 0..7 {
            rows.push(vec![i as f64 * 2.0 + 0.45]);
            labels.push(1);
        }
        let m = Matrix::from_rows(&rows);
        let cfg = ResampleConfig {
            k_neighbors: 3,
            ..Default::default()
        };
        let (_, y2, report) = smote_tomek(&m, &labels, &cfg).unwrap();
        assert_eq!(y2.iter().filter(|&&c| c == 1).count(), report.after_smote[1]);
        assert!(report.after[0] <= report.after_smote[0]);
    }
}

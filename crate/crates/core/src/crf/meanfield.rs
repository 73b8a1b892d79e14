use std::str::FromStr;

use rayon::prelude::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::softmax;

use super::model::{CrfModel, NodeFeatures};

/// Node counts up to this cache the full kernel matrix.
const CACHE_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanFieldMode {
    /// All nodes updated from the previous iterate.
    #[default]
    Parallel,
    /// Nodes updated in index order, each seeing the latest values.
    Sequential,
}

impl FromStr for MeanFieldMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(MeanFieldMode::Parallel),
            "sequential" => Ok(MeanFieldMode::Sequential),
            other => Err(Error::invalid(format!("unknown mean-field mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanFieldConfig {
    pub iters: usize,
    /// Weight kept on the previous distribution, in `[0, 1)`.
    pub damping: f64,
    pub mode: MeanFieldMode,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self { iters: 10, damping: 0.5, mode: MeanFieldMode::Parallel }
    }
}

/// Per-node label distributions `Q`, row-major `N x C`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldState {
    pub num_nodes: usize,
    pub num_labels: usize,
    pub q: Vec<f64>,
    pub iterations: usize,
    /// Free energy of the initial `Q` and after every iteration.
    pub free_energy: Vec<f64>,
}

impl MeanFieldState {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.num_labels..(i + 1) * self.num_labels]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.num_labels).map(<[f64]>::to_vec).collect()
    }
}

struct Pairs<'a> {
    model: &'a CrfModel,
    feats: &'a NodeFeatures,
    cache: Option<Vec<f64>>,
}

impl<'a> Pairs<'a> {
    fn new(model: &'a CrfModel, feats: &'a NodeFeatures) -> Self {
        let n = model.num_nodes();
        let cache = (n <= CACHE_LIMIT).then(|| {
            (0..n * n)
                .into_par_iter()
                .map(|k| if k / n == k % n { 0.0 } else { model.kernel_sum(feats.row(k / n), feats.row(k % n)) })
                .collect()
        });
        Self { model, feats, cache }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match &self.cache {
            Some(c) => c[i * self.model.num_nodes() + j],
            None if i == j => 0.0,
            None => self.model.kernel_sum(self.feats.row(i), self.feats.row(j)),
        }
    }
}

/// Mean-field update target for node `i` given the current `Q`.
fn node_update(pairs: &Pairs, q: &[f64], i: usize) -> Vec<f64> {
    let model = pairs.model;
    let (n, c) = (model.num_nodes(), model.num_labels());
    let mut t = vec![0.0f64; c];
    for j in (0..n).filter(|&j| j != i) {
        let k = pairs.get(i, j);
        if k != 0.0 {
            t.iter_mut().zip(&q[j * c..(j + 1) * c]).for_each(|(a, &qj)| *a += k * qj);
        }
    }
    let neg_energy: Vec<f64> =
        (0..c).map(|l| -model.unary(i)[l] - (0..c).map(|l2| model.compat(l, l2) * t[l2]).sum::<f64>()).collect();
    softmax(&neg_energy)
}

fn mix(old: &mut [f64], new: &[f64], damping: f64) {
    old.iter_mut().zip(new).for_each(|(o, &v)| *o = damping * *o + (1.0 - damping) * v);
    let s: f64 = old.iter().sum();
    old.iter_mut().for_each(|o| *o /= s);
}

/// `E_Q[E] - H(Q)` for a factorized distribution.
pub fn free_energy(model: &CrfModel, feats: &NodeFeatures, q: &[f64]) -> Result<f64> {
    model.check_features(feats)?;
    if q.len() != model.num_nodes() * model.num_labels() {
        return Err(Error::shape("Q does not match the model"));
    }
    Ok(free_energy_with(&Pairs { model, feats, cache: None }, q))
}

fn free_energy_with(pairs: &Pairs, q: &[f64]) -> f64 {
    let model = pairs.model;
    let (n, c) = (model.num_nodes(), model.num_labels());
    let mut f = 0.0;
    for i in 0..n {
        let qi = &q[i * c..(i + 1) * c];
        for (l, &p) in qi.iter().enumerate() {
            f += p * model.unary(i)[l];
            if p > 0.0 {
                f += p * p.ln();
            }
        }
        for j in i + 1..n {
            let k = pairs.get(i, j);
            if k == 0.0 {
                continue;
            }
            let qj = &q[j * c..(j + 1) * c];
            let mut e = 0.0;
            for (a, &pa) in qi.iter().enumerate() {
                for (b, &pb) in qj.iter().enumerate() {
                    e += model.compat(a, b) * pa * pb;
                }
            }
            f += k * e;
        }
    }
    f
}

/// Naive fully connected mean field starting from `softmax(-unary)`.
pub fn mean_field_refine(model: &CrfModel, feats: &NodeFeatures, cfg: &MeanFieldConfig) -> Result<MeanFieldState> {
    model.check_features(feats)?;
    if cfg.iters == 0 {
        return Err(Error::invalid("mean field needs at least one iteration"));
    }
    if !(0.0..1.0).contains(&cfg.damping) {
        return Err(Error::invalid("damping must lie in [0, 1)"));
    }
    let (n, c) = (model.num_nodes(), model.num_labels());
    let pairs = Pairs::new(model, feats);
    let mut q: Vec<f64> =
        (0..n).flat_map(|i| softmax(&model.unary(i).iter().map(|u| -u).collect::<Vec<_>>())).collect();
    let track = n <= CACHE_LIMIT;
    let mut energies = Vec::new();
    if track {
        energies.push(free_energy_with(&pairs, &q));
    }
    for _ in 0..cfg.iters {
        match cfg.mode {
            MeanFieldMode::Parallel => {
                let updates: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| node_update(&pairs, &q, i)).collect();
                for (i, u) in updates.iter().enumerate() {
                    mix(&mut q[i * c..(i + 1) * c], u, cfg.damping);
                }
            }
            MeanFieldMode::Sequential => {
                for i in 0..n {
                    let u = node_update(&pairs, &q, i);
                    mix(&mut q[i * c..(i + 1) * c], &u, cfg.damping);
                }
            }
        }
        if track {
            energies.push(free_energy_with(&pairs, &q));
        }
    }
    Ok(MeanFieldState { num_nodes: n, num_labels: c, q, iterations: cfg.iters, free_energy: energies })
}

/// Most probable label per node; ties go to the smallest label.
pub fn map_labels(state: &MeanFieldState) -> Vec<u16> {
    (0..state.num_nodes).map(|i| crate::learner::argmax(state.row(i)) as u16).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::model::Kernel;

    #[test]
    fn no_pairwise_is_softmax_fixed_point() {
        let m = CrfModel::potts(&[vec![0.0, 3f64.ln()], vec![1.0, 1.0]], vec![]).unwrap();
        let f = NodeFeatures::new(&[vec![0.0], vec![1.0]]).unwrap();
        for iters in [1, 5] {
            let s = mean_field_refine(&m, &f, &MeanFieldConfig { iters, ..Default::default() }).unwrap();
            assert!((s.row(0)[0] - 0.75).abs() < 1e-12);
            assert!((s.row(1)[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pair_agrees() {
        let k = vec![Kernel::new(2.0, 0, vec![1.0]).unwrap()];
        let m = CrfModel::potts(&[vec![0.2, 0.9], vec![0.2, 0.9]], k).unwrap();
        let f = NodeFeatures::new(&[vec![0.0], vec![0.5]]).unwrap();
        for mode in [MeanFieldMode::Parallel, MeanFieldMode::Sequential] {
            let s = mean_field_refine(&m, &f, &MeanFieldConfig { iters: 8, damping: 0.0, mode }).unwrap();
            if mode == MeanFieldMode::Parallel {
                assert_eq!(s.row(0), s.row(1));
            }
            assert!(s.rows().iter().all(|r| (r.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn argmax_ties() {
        let s = MeanFieldState {
            num_nodes: 2,
            num_labels: 3,
            q: vec![1.0 / 3.0; 3].into_iter().chain([0.0, 0.0, 1.0]).collect(),
            iterations: 1,
            free_energy: vec![],
        };
        assert_eq!(map_labels(&s), vec![0, 2]);
    }

    #[test]
    fn rejects_bad_config() {
        let m = CrfModel::potts(&[vec![0.0, 0.0]], vec![]).unwrap();
        let f = NodeFeatures::new(&[vec![0.0]]).unwrap();
        assert!(mean_field_refine(&m, &f, &MeanFieldConfig { iters: 0, ..Default::default() }).is_err());
        assert!(mean_field_refine(&m, &f, &MeanFieldConfig { damping: 1.0, ..Default::default() }).is_err());
    }
}

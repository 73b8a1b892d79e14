use crate::error::{Error, Result};

/// Gaussian kernel over the feature dims `offset..offset + precision.len()`
/// with a diagonal precision matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub weight: f64,
    pub offset: usize,
    pub precision: Vec<f64>,
}

impl Kernel {
    pub fn new(weight: f64, offset: usize, precision: Vec<f64>) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::invalid("kernel weight must be finite and nonnegative"));
        }
        if precision.is_empty() || precision.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::invalid("kernel precisions must be positive"));
        }
        Ok(Self { weight, offset, precision })
    }

    fn end(&self) -> usize {
        self.offset + self.precision.len()
    }

    pub fn eval(&self, fi: &[f64], fj: &[f64]) -> f64 {
        let r = self.offset..self.end();
        kernel_eval(&fi[r.clone()], &fj[r], &self.precision)
    }
}

/// `exp(-1/2 (fi - fj)^T diag(precision) (fi - fj))`.
pub fn kernel_eval(fi: &[f64], fj: &[f64], precision: &[f64]) -> f64 {
    let q: f64 = fi.iter().zip(fj).zip(precision).map(|((a, b), p)| p * (a - b) * (a - b)).sum();
    (-0.5 * q).exp()
}

/// Per-node feature vectors of a shared dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeFeatures {
    dim: usize,
    data: Vec<f64>,
}

impl NodeFeatures {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::shape("node features differ in dimension"));
        }
        Ok(Self { dim, data: rows.concat() })
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 && !data.is_empty() || dim > 0 && !data.len().is_multiple_of(dim) {
            return Err(Error::shape("flat features do not split into rows"));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Fully connected pairwise CRF: unary costs, Gaussian kernel mixture and a
/// label compatibility matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfModel {
    num_nodes: usize,
    num_labels: usize,
    unary: Vec<f64>,
    kernels: Vec<Kernel>,
    compat: Vec<f64>,
}

impl CrfModel {
    /// Model with Potts compatibility `[a != b]`.
    pub fn potts(unary: &[Vec<f64>], kernels: Vec<Kernel>) -> Result<Self> {
        let c = unary.first().map_or(0, Vec::len);
        let compat = (0..c * c).map(|k| if k / c == k % c { 0.0 } else { 1.0 }).collect();
        Self::new(unary, kernels, compat)
    }

    /// `compat` is `C x C` row-major and must be symmetric.
    pub fn new(unary: &[Vec<f64>], kernels: Vec<Kernel>, compat: Vec<f64>) -> Result<Self> {
        let n = unary.len();
        let c = unary.first().map_or(0, Vec::len);
        if n == 0 || c == 0 || unary.iter().any(|u| u.len() != c) {
            return Err(Error::shape("unary must be a nonempty N x C table"));
        }
        if unary.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("unary costs must be finite"));
        }
        if compat.len() != c * c {
            return Err(Error::shape("compatibility must be C x C"));
        }
        if (0..c).any(|a| (0..c).any(|b| compat[a * c + b] != compat[b * c + a])) {
            return Err(Error::invalid("compatibility must be symmetric"));
        }
        Ok(Self { num_nodes: n, num_labels: c, unary: unary.concat(), kernels, compat })
    }

    /// Unary costs `-ln max(p, floor)` from per-node class probabilities.
    pub fn unary_from_probabilities(probs: &[Vec<f64>], floor: f64) -> Vec<Vec<f64>> {
        probs.iter().map(|p| p.iter().map(|&v| -v.max(floor).ln()).collect()).collect()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn unary(&self, i: usize) -> &[f64] {
        &self.unary[i * self.num_labels..(i + 1) * self.num_labels]
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn compat(&self, a: usize, b: usize) -> f64 {
        self.compat[a * self.num_labels + b]
    }

    /// `sum_m w_m k_m(fi, fj)`.
    pub fn kernel_sum(&self, fi: &[f64], fj: &[f64]) -> f64 {
        self.kernels.iter().map(|k| k.weight * k.eval(fi, fj)).sum()
    }

    pub(crate) fn check_features(&self, feats: &NodeFeatures) -> Result<()> {
        if feats.len() != self.num_nodes {
            return Err(Error::shape(format!("{} feature rows for {} nodes", feats.len(), self.num_nodes)));
        }
        if let Some(k) = self.kernels.iter().find(|k| k.end() > feats.dim()) {
            return Err(Error::shape(format!("kernel reads dims up to {} of {}-dim features", k.end(), feats.dim())));
        }
        Ok(())
    }
}

/// `mu(xi, xj) * sum_m w_m k_m(fi, fj)`.
pub fn pairwise_potential(xi: usize, xj: usize, fi: &[f64], fj: &[f64], model: &CrfModel) -> f64 {
    let mu = model.compat(xi, xj);
    if mu == 0.0 {
        0.0
    } else {
        mu * model.kernel_sum(fi, fj)
    }
}

/// Unary plus pairwise energy over every unordered node pair.
pub fn gibbs_energy(labels: &[usize], model: &CrfModel, feats: &NodeFeatures) -> Result<f64> {
    model.check_features(feats)?;
    if labels.len() != model.num_nodes {
        return Err(Error::shape("labeling length differs from node count"));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= model.num_labels) {
        return Err(Error::invalid(format!("label {l} outside {} labels", model.num_labels)));
    }
    let mut e: f64 = labels.iter().enumerate().map(|(i, &l)| model.unary(i)[l]).sum();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            e += pairwise_potential(labels[i], labels[j], feats.row(i), feats.row(j), model);
        }
    }
    Ok(e)
}

/// Largest labeling space enumerated exhaustively.
pub const MAX_ENUMERATION: usize = 1 << 20;

/// Exact Gibbs distribution over all `C^N` labelings. Labeling index `t`
/// encodes node `i`'s label as digit `i` of `t` in base `C` (node 0 least
/// significant).
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsTable {
    pub num_nodes: usize,
    pub num_labels: usize,
    pub probs: Vec<f64>,
    pub energies: Vec<f64>,
    pub partition: f64,
}

impl GibbsTable {
    pub fn labeling(&self, t: usize) -> Vec<usize> {
        let mut rest = t;
        (0..self.num_nodes)
            .map(|_| {
                let l = rest % self.num_labels;
                rest /= self.num_labels;
                l
            })
            .collect()
    }

    /// `P(x_i = l)` for every node and label.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.num_labels]; self.num_nodes];
        for (t, &p) in self.probs.iter().enumerate() {
            for (i, l) in self.labeling(t).into_iter().enumerate() {
                m[i][l] += p;
            }
        }
        m
    }

    /// Minimum-energy labeling; ties go to the smallest index.
    pub fn map_labeling(&self) -> Vec<usize> {
        let best = (1..self.energies.len()).fold(0, |b, t| if self.energies[t] < self.energies[b] { t } else { b });
        self.labeling(best)
    }
}

pub fn gibbs_distribution_bruteforce(model: &CrfModel, feats: &NodeFeatures) -> Result<GibbsTable> {
    model.check_features(feats)?;
    let (n, c) = (model.num_nodes, model.num_labels);
    let total =
        (0..n).try_fold(1usize, |acc, _| acc.checked_mul(c).filter(|&t| t <= MAX_ENUMERATION)).ok_or_else(|| {
            Error::invalid(format!("{c}^{n} labelings exceed the enumeration limit of {MAX_ENUMERATION}"))
        })?;
    let pair: Vec<f64> = (0..n * n).map(|k| model.kernel_sum(feats.row(k / n), feats.row(k % n))).collect();
    let mut table = GibbsTable {
        num_nodes: n,
        num_labels: c,
        probs: Vec::new(),
        energies: Vec::with_capacity(total),
        partition: 0.0,
    };
    for t in 0..total {
        let x = table.labeling(t);
        let mut e: f64 = x.iter().enumerate().map(|(i, &l)| model.unary(i)[l]).sum();
        for i in 0..n {
            for j in i + 1..n {
                e += model.compat(x[i], x[j]) * pair[i * n + j];
            }
        }
        table.energies.push(e);
    }
    let min = table.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = table.energies.iter().map(|e| (min - e).exp()).collect();
    let sum: f64 = weights.iter().sum();
    table.partition = sum * (-min).exp();
    table.probs = weights.into_iter().map(|w| w / sum).collect();
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_kernel(w: f64, p: f64) -> Vec<Kernel> {
        vec![Kernel::new(w, 0, vec![p]).unwrap()]
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_eval(&[1.0, 2.0], &[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((kernel_eval(&[0.0], &[2.0], &[0.5]) - (-1f64).exp()).abs() < 1e-15);
        assert!(kernel_eval(&[0.0], &[1.0], &[1.0]) > kernel_eval(&[0.0], &[1.5], &[1.0]));
        assert!(Kernel::new(1.0, 0, vec![0.0]).is_err());
    }

    #[test]
    fn pairwise_hand_case() {
        // kernel value 0.5 needs precision 2 ln 2 at distance 1
        let m = CrfModel::potts(&[vec![0.0, 0.0], vec![0.0, 0.0]], one_kernel(2.0, 2.0 * 2f64.ln())).unwrap();
        assert!((pairwise_potential(0, 1, &[0.0], &[1.0], &m) - 1.0).abs() < 1e-12);
        assert_eq!(pairwise_potential(1, 1, &[0.0], &[1.0], &m), 0.0);
        assert_eq!(pairwise_potential(1, 0, &[1.0], &[0.0], &m), pairwise_potential(0, 1, &[0.0], &[1.0], &m));
    }

    #[test]
    fn two_node_energy() {
        let unary = [vec![1.0, 2.0], vec![0.5, 3.0]];
        let m = CrfModel::potts(&unary, one_kernel(4.0, 0.5)).unwrap();
        let f = NodeFeatures::new(&[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(gibbs_energy(&[0, 0], &m, &f).unwrap(), 1.5);
        let e = gibbs_energy(&[1, 0], &m, &f).unwrap();
        assert!((e - (2.5 + 4.0 * (-1f64).exp())).abs() < 1e-12);
        assert!(gibbs_energy(&[2, 0], &m, &f).is_err());
    }

    #[test]
    fn single_node_is_softmax() {
        let m = CrfModel::potts(&[vec![0.0, 3f64.ln()]], vec![]).unwrap();
        let f = NodeFeatures::new(&[vec![0.0]]).unwrap();
        let t = gibbs_distribution_bruteforce(&m, &f).unwrap();
        assert!((t.probs[0] - 0.75).abs() < 1e-12);
        assert!((t.partition - (1.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn three_node_partition() {
        // pairwise weight only between equal features: all pairs share f
        let unary = [vec![0.0, 1.0], vec![0.0, 0.0], vec![2.0, 0.0]];
        let m = CrfModel::potts(&unary, one_kernel(1.0, 1.0)).unwrap();
        let f = NodeFeatures::new(&[vec![0.0], vec![0.0], vec![0.0]]).unwrap();
        let t = gibbs_distribution_bruteforce(&m, &f).unwrap();
        let mut z = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let e = unary[0][a]
                        + unary[1][b]
                        + unary[2][c]
                        + [a != b, a != c, b != c].iter().filter(|&&d| d).count() as f64;
                    z += (-e as f64).exp();
                }
            }
        }
        assert!((t.partition - z).abs() < 1e-12);
        assert!((t.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let marg = t.marginals();
        assert!(marg.iter().all(|m| (m.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn guard_rejects_large_instances() {
        let unary = vec![vec![0.0; 2]; 21];
        let m = CrfModel::potts(&unary, vec![]).unwrap();
        let f = NodeFeatures::new(&vec![vec![0.0]; 21]).unwrap();
        assert!(gibbs_distribution_bruteforce(&m, &f).is_err());
    }

    #[test]
    fn zero_energy_is_uniform() {
        let m = CrfModel::potts(&vec![vec![0.0; 3]; 2], vec![]).unwrap();
        let f = NodeFeatures::new(&[vec![1.0], vec![2.0]]).unwrap();
        let t = gibbs_distribution_bruteforce(&m, &f).unwrap();
        assert!(t.probs.iter().all(|p| (p - 1.0 / 9.0).abs() < 1e-15));
    }
}

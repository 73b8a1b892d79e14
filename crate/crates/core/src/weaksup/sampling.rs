use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::normalize::NormalizedField;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Score times feature-dissimilarity penalty.
    #[default]
    Diverse,
    /// Highest scores.
    TopK,
    /// Score times spatial-dissimilarity penalty.
    Spatial,
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diverse" => Ok(SamplingMode::Diverse),
            "topk" => Ok(SamplingMode::TopK),
            "spatial" => Ok(SamplingMode::Spatial),
            other => Err(Error::invalid(format!("unknown sampling mode '{other}'"))),
        }
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

/// Greedy penalized selection shared by the diverse and spatial samplers.
///
/// Candidates are unpicked locations allowed by `eligible` with positive
/// score; the pick maximizes `score * (1 - max similarity to earlier picks)`.
/// When no positive candidate remains, the highest raw score among eligible
/// locations is taken, then among all locations.
fn greedy_penalized(
    scores: &[f64],
    k: usize,
    eligible: impl Fn(usize) -> bool,
    similarity: impl Fn(usize, usize) -> f64,
) -> Vec<usize> {
    let n = scores.len();
    let mut picked = vec![false; n];
    let mut max_sim = vec![0.0f64; n];
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !picked[i] && eligible(i) && scores[i] > 0.0) {
            let v = scores[i] * (1.0 - max_sim[i]);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let pick = best.map(|(i, _)| i).or_else(|| {
            let raw = |filter: &dyn Fn(usize) -> bool| {
                (0..n).filter(|&i| !picked[i] && filter(i)).fold(None, |acc: Option<usize>, i| match acc {
                    Some(b) if scores[b] >= scores[i] => Some(b),
                    _ => Some(i),
                })
            };
            raw(&eligible).or_else(|| raw(&|_| true))
        });
        let Some(p) = pick else { break };
        picked[p] = true;
        out.push(p);
        for i in 0..n {
            if !picked[i] {
                max_sim[i] = max_sim[i].max(similarity(i, p));
            }
        }
    }
    out
}

/// Diverse foreground picks: the top score first, then scores discounted
/// by feature similarity to earlier picks. Degenerate locations are skipped
/// unless nothing else remains.
pub fn diverse_sample_fg(scores: &[f64], z: &NormalizedField, k: usize) -> Result<Vec<usize>> {
    if scores.len() != z.len() {
        return Err(Error::shape("scores and feature field differ in size"));
    }
    check_k(k, scores.len())?;
    Ok(greedy_penalized(scores, k, |i| z.is_valid(i), |i, j| z.abs_similarity(i, j)))
}

/// Background picks least similar to every foreground pick and every
/// earlier background pick. Foreground points and degenerate locations are
/// never chosen; fewer than `k_bg` points come back when candidates run out.
pub fn diverse_sample_bg(z: &NormalizedField, fg: &[usize], k_bg: usize) -> Result<Vec<usize>> {
    if fg.is_empty() {
        return Err(Error::invalid("background sampling needs foreground points"));
    }
    if let Some(&bad) = fg.iter().find(|&&p| p >= z.len()) {
        return Err(Error::invalid(format!("foreground point {bad} outside grid of {}", z.len())));
    }
    let n = z.len();
    let mut blocked = vec![false; n];
    fg.iter().for_each(|&p| blocked[p] = true);
    let mut objective: Vec<f64> =
        (0..n).map(|i| fg.iter().map(|&p| z.abs_similarity(i, p)).fold(0.0, f64::max)).collect();
    let mut out = Vec::with_capacity(k_bg);
    while out.len() < k_bg {
        let mut best: Option<usize> = None;
        for i in (0..n).filter(|&i| !blocked[i] && z.is_valid(i)) {
            if best.is_none_or(|b| objective[i] < objective[b]) {
                best = Some(i);
            }
        }
        let Some(p) = best else { break };
        blocked[p] = true;
        out.push(p);
        for (i, o) in objective.iter_mut().enumerate() {
            *o = o.max(z.abs_similarity(i, p));
        }
    }
    Ok(out)
}

/// Indices of the `k` highest scores, ties to the smaller index.
pub fn topk_sample(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    check_k(k, scores.len())?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(order)
}

/// Diverse sampling with similarity `1 - dist / diag` between grid cells.
pub fn spatial_diverse_sample(scores: &[f64], height: usize, width: usize, k: usize) -> Result<Vec<usize>> {
    if scores.len() != height * width {
        return Err(Error::shape("scores do not fill the grid"));
    }
    check_k(k, scores.len())?;
    let diag = ((height * height + width * width) as f64).sqrt();
    let sim = |i: usize, j: usize| {
        let dy = (i / width) as f64 - (j / width) as f64;
        let dx = (i % width) as f64 - (j % width) as f64;
        1.0 - (dx * dx + dy * dy).sqrt() / diag
    };
    Ok(greedy_penalized(scores, k, |_| true, sim))
}

/// Foreground points per sampled class plus shared background points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleSet {
    /// `(class, ordered grid indices)`.
    pub foreground: Vec<(usize, Vec<usize>)>,
    pub background: Vec<usize>,
}

impl SampleSet {
    /// Rows of `(class, row, col, rank)`; foreground channel `c` maps to
    /// class `c + 1` and background to class 0.
    pub fn to_rows(&self, width: usize) -> Vec<[u32; 4]> {
        let row =
            |class: usize, p: usize, rank: usize| [class as u32, (p / width) as u32, (p % width) as u32, rank as u32];
        let mut rows: Vec<[u32; 4]> = self
            .foreground
            .iter()
            .flat_map(|(c, pts)| pts.iter().enumerate().map(move |(r, &p)| row(c + 1, p, r)))
            .collect();
        rows.extend(self.background.iter().enumerate().map(|(r, &p)| row(0, p, r)));
        rows
    }
}

/// Samples `k` foreground points for each listed class (`scores[c]` over the
/// grid) and `k_bg` background points against all of them. Background
/// points always use the diverse rule.
pub fn sample_points(
    scores: &[Vec<f64>],
    classes: &[usize],
    z: &NormalizedField,
    k: usize,
    k_bg: usize,
    mode: SamplingMode,
) -> Result<SampleSet> {
    let mut set = SampleSet::default();
    for &c in classes {
        let s = scores.get(c).ok_or_else(|| Error::invalid(format!("no score channel for class {c}")))?;
        let pts = match mode {
            SamplingMode::Diverse => diverse_sample_fg(s, z, k)?,
            SamplingMode::TopK => topk_sample(s, k)?,
            SamplingMode::Spatial => spatial_diverse_sample(s, z.height, z.width, k)?,
        };
        set.foreground.push((c, pts));
    }
    let all_fg: Vec<usize> = set.foreground.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if !all_fg.is_empty() && k_bg > 0 {
        set.background = diverse_sample_bg(z, &all_fg, k_bg)?;
    }
    Ok(set)
}

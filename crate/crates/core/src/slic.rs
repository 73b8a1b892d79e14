//! Simple linear iterative clustering.
//!
//! Pixels are clustered in the joint `[l, a, b, x, y]` space. Every cluster
//! only competes for pixels inside a `2S x 2S` window around its center,
//! which keeps each iteration linear in the pixel count.
//!
//! Spatial coordinates are continuous: pixel `(col, row)` sits at
//! `(col + 0.5, row + 0.5)`, so a center at `x` lies on pixel `floor(x)`.

use std::collections::BTreeMap;

use crate::color::rgb_to_lab;
use crate::error::{Error, Result};
use crate::image::{LabImage, RgbImage, SuperpixelMap};

#[derive(Clone, Debug, PartialEq)]
pub struct SlicParams {
    /// Desired number of superpixels.
    pub k: usize,
    /// Compactness `m`: weight of spatial against color distance.
    pub compactness: f64,
    pub max_iters: usize,
    /// Stop once the summed center movement drops below this value.
    pub residual_threshold: f64,
    pub enforce_connectivity: bool,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self { k: 500, compactness: 15.0, max_iters: 10, residual_threshold: 1.0, enforce_connectivity: true }
    }
}

impl SlicParams {
    pub fn new(k: usize, compactness: f64) -> Self {
        Self { k, compactness, ..Self::default() }
    }

    fn validate(&self, num_pixels: usize) -> Result<()> {
        if self.k == 0 || self.k > num_pixels {
            return Err(Error::invalid(format!("k = {} must be in 1..={num_pixels} (pixel count)", self.k)));
        }
        if !(self.compactness > 0.0) {
            return Err(Error::invalid("compactness m must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// A cluster center in `[l, a, b, x, y]` space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterCenter {
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub y: f64,
}

impl ClusterCenter {
    fn at_pixel(lab: &LabImage, col: usize, row: usize, x: f64, y: f64) -> Self {
        let [l, a, b] = lab.pixel(col, row).map(f64::from);
        Self { l, a, b, x, y }
    }

    fn labxy(&self) -> [f64; 5] {
        [self.l, self.a, self.b, self.x, self.y]
    }

    /// Euclidean distance in the joint 5-D space.
    pub fn labxy_distance(&self, other: &ClusterCenter) -> f64 {
        self.labxy().iter().zip(other.labxy()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct SlicResult {
    pub map: SuperpixelMap,
    /// Mean `labxy` of every final superpixel, indexed by id.
    pub centers: Vec<ClusterCenter>,
    pub iterations: usize,
    /// Residual of the last update step.
    pub residual: f64,
    /// Distance evaluations summed over all assignment steps.
    pub distance_evaluations: u64,
}

/// Grid interval `S = sqrt(N / k)`.
pub fn grid_interval(num_pixels: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if num_pixels < k {
        return Err(Error::invalid(format!("k = {k} exceeds pixel count {num_pixels}")));
    }
    Ok((num_pixels as f64 / k as f64).sqrt())
}

/// Seeds `ceil(W/S) * ceil(H/S)` centers at `(S/2 + iS, S/2 + jS)`, row-major.
pub fn init_centers(lab: &LabImage, s: f64) -> Vec<ClusterCenter> {
    let (w, h) = (lab.width(), lab.height());
    let cols = ((w as f64 / s).ceil() as usize).max(1);
    let rows = ((h as f64 / s).ceil() as usize).max(1);
    let mut centers = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        let y = (s / 2.0 + j as f64 * s).min(h as f64 - 0.5);
        for i in 0..cols {
            let x = (s / 2.0 + i as f64 * s).min(w as f64 - 0.5);
            centers.push(ClusterCenter::at_pixel(lab, x as usize, y as usize, x, y));
        }
    }
    centers
}

fn lab_sq_diff(p: [f32; 3], q: [f32; 3]) -> f64 {
    p.iter().zip(q).map(|(a, b)| f64::from(a - b).powi(2)).sum()
}

/// Squared central-difference gradient magnitude, coordinates clamped at borders.
fn gradient(lab: &LabImage, col: usize, row: usize) -> f64 {
    let (w, h) = (lab.width(), lab.height());
    let left = lab.pixel(col.saturating_sub(1), row);
    let right = lab.pixel((col + 1).min(w - 1), row);
    let up = lab.pixel(col, row.saturating_sub(1));
    let down = lab.pixel(col, (row + 1).min(h - 1));
    lab_sq_diff(right, left) + lab_sq_diff(down, up)
}

/// Moves every center to the lowest-gradient pixel of its 3x3 neighborhood.
///
/// A center stays put unless some neighbor is strictly lower; among strictly
/// lower neighbors the first in row-major order wins. With `S <= 2` the
/// neighborhood would reach into other seeds' cells, so centers stay put.
pub fn perturb_centers(lab: &LabImage, centers: &[ClusterCenter], s: f64) -> Vec<ClusterCenter> {
    let (w, h) = (lab.width() as isize, lab.height() as isize);
    let reach: isize = if s > 2.0 { 1 } else { 0 };
    centers
        .iter()
        .map(|c| {
            let (col, row) = (c.x as isize, c.y as isize);
            let mut best = gradient(lab, col as usize, row as usize);
            let mut best_pos = (col, row);
            for ny in row - reach..=row + reach {
                for nx in col - reach..=col + reach {
                    if nx < 0 || ny < 0 || nx >= w || ny >= h || (nx, ny) == (col, row) {
                        continue;
                    }
                    let g = gradient(lab, nx as usize, ny as usize);
                    if g < best {
                        best = g;
                        best_pos = (nx, ny);
                    }
                }
            }
            if best_pos == (col, row) {
                *c
            } else {
                let (nx, ny) = (best_pos.0 as usize, best_pos.1 as usize);
                ClusterCenter::at_pixel(lab, nx, ny, nx as f64 + 0.5, ny as f64 + 0.5)
            }
        })
        .collect()
}

/// `D_s = d_lab + (m / S) * d_xy`.
pub fn slic_distance(center: &ClusterCenter, pixel_labxy: [f64; 5], m: f64, s: f64) -> f64 {
    let [l, a, b, x, y] = pixel_labxy;
    let d_lab = ((center.l - l).powi(2) + (center.a - a).powi(2) + (center.b - b).powi(2)).sqrt();
    let d_xy = ((center.x - x).powi(2) + (center.y - y).powi(2)).sqrt();
    d_lab + (m / s) * d_xy
}

fn pixel_labxy(lab: &LabImage, col: usize, row: usize) -> [f64; 5] {
    let [l, a, b] = lab.pixel(col, row).map(f64::from);
    [l, a, b, col as f64 + 0.5, row as f64 + 0.5]
}

/// Output of one assignment step.
#[derive(Clone, Debug)]
pub struct Assignment {
    /// Center index per pixel.
    pub labels: Vec<u32>,
    /// Distance of each pixel to its assigned center.
    pub distances: Vec<f64>,
    /// Window distance evaluations performed (fallback excluded).
    pub evaluations: u64,
    /// Pixels that no window covered and went to the global nearest center.
    pub fallback_pixels: usize,
}

/// Assigns each pixel to the closest center whose `2S x 2S` window covers it.
///
/// Centers are visited in id order and only a strictly smaller distance
/// replaces the current one, so ties resolve to the smallest id.
pub fn assign_pixels(lab: &LabImage, centers: &[ClusterCenter], m: f64, s: f64) -> Assignment {
    assert!(!centers.is_empty(), "assign_pixels needs at least one center");
    let (w, h) = (lab.width(), lab.height());
    let n = w * h;
    let mut labels = vec![u32::MAX; n];
    let mut distances = vec![f64::INFINITY; n];
    let mut evaluations = 0u64;

    for (id, c) in centers.iter().enumerate() {
        // pixel centers p + 0.5 with |p + 0.5 - c| <= S
        let x0 = (c.x - s - 0.5).ceil().max(0.0) as usize;
        let x1 = ((c.x + s - 0.5).floor() as isize).min(w as isize - 1);
        let y0 = (c.y - s - 0.5).ceil().max(0.0) as usize;
        let y1 = ((c.y + s - 0.5).floor() as isize).min(h as isize - 1);
        if x1 < 0 || y1 < 0 {
            continue;
        }
        for row in y0..=y1 as usize {
            for col in x0..=x1 as usize {
                let d = slic_distance(c, pixel_labxy(lab, col, row), m, s);
                evaluations += 1;
                let i = row * w + col;
                if d < distances[i] {
                    distances[i] = d;
                    labels[i] = id as u32;
                }
            }
        }
    }

    let mut fallback_pixels = 0;
    for i in 0..n {
        if labels[i] != u32::MAX {
            continue;
        }
        fallback_pixels += 1;
        let p = pixel_labxy(lab, i % w, i / w);
        for (id, c) in centers.iter().enumerate() {
            let d = slic_distance(c, p, m, s);
            if d < distances[i] {
                distances[i] = d;
                labels[i] = id as u32;
            }
        }
    }

    Assignment { labels, distances, evaluations, fallback_pixels }
}

/// Recomputes centers as the mean `labxy` of their pixels.
///
/// Returns the new centers and the residual `E`, the summed labxy movement.
/// Empty clusters keep their previous center and add nothing to `E`.
pub fn update_centers(lab: &LabImage, labels: &[u32], previous: &[ClusterCenter]) -> (Vec<ClusterCenter>, f64) {
    let w = lab.width();
    let mut sums = vec![[0.0f64; 5]; previous.len()];
    let mut counts = vec![0usize; previous.len()];
    for (i, &l) in labels.iter().enumerate() {
        let p = pixel_labxy(lab, i % w, i / w);
        let acc = &mut sums[l as usize];
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
        counts[l as usize] += 1;
    }
    let mut residual = 0.0;
    let centers = previous
        .iter()
        .zip(sums.iter().zip(&counts))
        .map(|(old, (sum, &count))| {
            if count == 0 {
                return *old;
            }
            let n = count as f64;
            let new = ClusterCenter { l: sum[0] / n, a: sum[1] / n, b: sum[2] / n, x: sum[3] / n, y: sum[4] / n };
            residual += old.labxy_distance(&new);
            new
        })
        .collect();
    (centers, residual)
}

pub fn run_slic(img: &RgbImage, params: &SlicParams) -> Result<SlicResult> {
    run_slic_lab(&rgb_to_lab(img), params)
}

pub fn run_slic_lab(lab: &LabImage, params: &SlicParams) -> Result<SlicResult> {
    let n = lab.num_pixels();
    params.validate(n)?;
    let s = grid_interval(n, params.k)?;
    let mut centers = perturb_centers(lab, &init_centers(lab, s), s);

    let mut labels = Vec::new();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut distance_evaluations = 0;
    while iterations < params.max_iters {
        let assignment = assign_pixels(lab, &centers, params.compactness, s);
        distance_evaluations += assignment.evaluations;
        labels = assignment.labels;
        let (updated, e) = update_centers(lab, &labels, &centers);
        centers = updated;
        residual = e;
        iterations += 1;
        log::trace!("slic iteration {iterations}: residual {e:.4}");
        if residual < params.residual_threshold {
            break;
        }
    }

    let mut map = SuperpixelMap::from_arbitrary(lab.width(), lab.height(), &compact_in_order(&labels))?;
    if params.enforce_connectivity {
        map = enforce_connectivity(&map);
    }
    let centers = superpixel_centers(lab, &map);
    Ok(SlicResult { map, centers, iterations, residual, distance_evaluations })
}

/// Renumbers used cluster ids to `0..K'` preserving their relative order.
fn compact_in_order(labels: &[u32]) -> Vec<u32> {
    let max = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut used = vec![false; max + 1];
    labels.iter().for_each(|&l| used[l as usize] = true);
    let mut remap = vec![0u32; max + 1];
    let mut next = 0;
    for (old, &u) in used.iter().enumerate() {
        if u {
            remap[old] = next;
            next += 1;
        }
    }
    labels.iter().map(|&l| remap[l as usize]).collect()
}

/// Mean `labxy` of each superpixel.
pub fn superpixel_centers(lab: &LabImage, map: &SuperpixelMap) -> Vec<ClusterCenter> {
    let zero = ClusterCenter { l: 0.0, a: 0.0, b: 0.0, x: 0.0, y: 0.0 };
    update_centers(lab, map.labels(), &vec![zero; map.num_superpixels()]).0
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Makes every superpixel 4-connected.
///
/// Each 4-connected piece of an id becomes its own region. Pieces smaller
/// than a quarter of the mean superpixel area are merged, smallest first,
/// into the neighboring region they share the longest boundary with (ties
/// to the lowest piece index). Final ids follow `(original id, first pixel)`
/// order, so a map that is already connected comes back unchanged.
pub fn enforce_connectivity(map: &SuperpixelMap) -> SuperpixelMap {
    let (w, h) = (map.width(), map.height());
    let labels = map.labels();
    let n = labels.len();

    // connected components, numbered by first pixel in row-major order
    let mut comp = vec![usize::MAX; n];
    let mut comp_label = Vec::new();
    let mut comp_first = Vec::new();
    let mut size = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = comp_label.len();
        comp_label.push(labels[start]);
        comp_first.push(start);
        comp[start] = id;
        stack.push(start);
        let mut count = 0;
        while let Some(p) = stack.pop() {
            count += 1;
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if comp[q] == usize::MAX && labels[q] == labels[start] {
                    comp[q] = id;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        size.push(count);
    }
    let num_comps = comp_label.len();

    let mut boundary: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); num_comps];
    for p in 0..n {
        let (x, y) = (p % w, p / w);
        for q in [(x + 1 < w).then(|| p + 1), (y + 1 < h).then(|| p + w)].into_iter().flatten() {
            let (a, b) = (comp[p], comp[q]);
            if a != b {
                *boundary[a].entry(b).or_default() += 1;
                *boundary[b].entry(a).or_default() += 1;
            }
        }
    }

    let min_size = (n as f64 / map.num_superpixels() as f64) / 4.0;
    let mut parent: Vec<usize> = (0..num_comps).collect();
    let mut order: Vec<usize> = (0..num_comps).filter(|&c| (size[c] as f64) < min_size).collect();
    order.sort_by_key(|&c| (size[c], c));
    for c in order {
        let r = find(&mut parent, c);
        if size[r] as f64 >= min_size {
            continue;
        }
        let mut merged: BTreeMap<usize, usize> = BTreeMap::new();
        for (&k, &v) in &boundary[r] {
            let root = find(&mut parent, k);
            if root != r {
                *merged.entry(root).or_default() += v;
            }
        }
        let Some((&target, _)) = merged.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) else {
            continue;
        };
        parent[r] = target;
        size[target] += size[r];
        let mut combined = std::mem::take(&mut boundary[target]);
        for (k, v) in std::mem::take(&mut boundary[r]) {
            *combined.entry(k).or_default() += v;
        }
        boundary[target] = merged_without(&combined, &mut parent, target);
    }

    let mut roots: Vec<usize> = (0..num_comps).filter(|&c| find(&mut parent, c) == c).collect();
    roots.sort_by_key(|&c| (comp_label[c], comp_first[c]));
    let mut new_id = vec![0u32; num_comps];
    for (i, &r) in roots.iter().enumerate() {
        new_id[r] = i as u32;
    }
    let out = comp.iter().map(|&c| new_id[find(&mut parent, c)]).collect();
    SuperpixelMap::new(w, h, out).expect("every root keeps its pixels")
}

fn merged_without(boundary: &BTreeMap<usize, usize>, parent: &mut [usize], self_root: usize) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for (&k, &v) in boundary {
        let root = find(parent, k);
        if root != self_root {
            *out.entry(root).or_default() += v;
        }
    }
    out
}

/// True when every id forms a single 4-connected region.
pub fn is_connected(map: &SuperpixelMap) -> bool {
    let (w, h) = (map.width(), map.height());
    let labels = map.labels();
    let mut seen = vec![false; labels.len()];
    let mut id_seen = vec![false; map.num_superpixels()];
    let mut stack = Vec::new();
    for start in 0..labels.len() {
        if seen[start] {
            continue;
        }
        let id = labels[start] as usize;
        if id_seen[id] {
            return false;
        }
        id_seen[id] = true;
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let neighbors = [
                (x > 0).then(|| p - 1),
                (x + 1 < w).then(|| p + 1),
                (y > 0).then(|| p - w),
                (y + 1 < h).then(|| p + w),
            ];
            for q in neighbors.into_iter().flatten() {
                if !seen[q] && labels[q] == labels[start] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_lab(w: usize, h: usize, v: [f32; 3]) -> LabImage {
        LabImage::new(w, h, v.iter().copied().cycle().take(w * h * 3).collect()).unwrap()
    }

    fn lab_from_fn(w: usize, h: usize, f: impl Fn(usize, usize) -> [f32; 3]) -> LabImage {
        let mut data = Vec::new();
        for y in 0..h {
            for x in 0..w {
                data.extend_from_slice(&f(x, y));
            }
        }
        LabImage::new(w, h, data).unwrap()
    }

    fn center(l: f64, x: f64, y: f64) -> ClusterCenter {
        ClusterCenter { l, a: 0.0, b: 0.0, x, y }
    }

    #[test]
    fn grid_interval_values() {
        assert_eq!(grid_interval(10000, 100).unwrap(), 10.0);
        assert_eq!(grid_interval(37, 37).unwrap(), 1.0);
        assert_eq!(grid_interval(25, 1).unwrap(), 5.0);
        assert!(grid_interval(25, 0).is_err());
    }

    #[test]
    fn init_grid_layouts() {
        let lab = flat_lab(10, 10, [50.0, 0.0, 0.0]);
        let c = init_centers(&lab, 5.0);
        let xy: Vec<_> = c.iter().map(|c| (c.x, c.y)).collect();
        assert_eq!(xy, vec![(2.5, 2.5), (7.5, 2.5), (2.5, 7.5), (7.5, 7.5)]);
        assert_eq!(init_centers(&lab, 12.0).len(), 1);
        assert_eq!(init_centers(&flat_lab(9, 9, [0.0; 3]), 3.0).len(), 9);
    }

    #[test]
    fn perturb_flat_image_is_identity() {
        let lab = flat_lab(9, 9, [40.0, 10.0, -5.0]);
        let c = init_centers(&lab, 3.0);
        assert_eq!(perturb_centers(&lab, &c, 3.0), c);
        let one = flat_lab(1, 1, [1.0, 2.0, 3.0]);
        let c = init_centers(&one, 1.0);
        assert_eq!(perturb_centers(&one, &c, 1.0), c);
    }

    #[test]
    fn perturb_moves_off_step_edge() {
        // columns 0-1 dark, 2-4 bright: G is large at x = 1 and x = 2, zero at x = 3
        let lab = lab_from_fn(5, 5, |x, _| if x < 2 { [0.0; 3] } else { [100.0, 0.0, 0.0] });
        assert!(gradient(&lab, 2, 2) > 0.0 && gradient(&lab, 3, 2) == 0.0);
        let moved = perturb_centers(&lab, &[center(100.0, 2.5, 2.5)], 5.0);
        assert_eq!((moved[0].x, moved[0].y), (3.5, 1.5));
    }

    #[test]
    fn distance_examples() {
        let c = center(0.0, 0.0, 0.0);
        assert_eq!(slic_distance(&c, [0.0; 5], 10.0, 10.0), 0.0);
        assert_eq!(slic_distance(&c, [3.0, 0.0, 0.0, 0.0, 4.0], 10.0, 10.0), 7.0);
        assert_eq!(slic_distance(&c, [0.0, 0.0, 0.0, 3.0, 4.0], 15.0, 10.0), 7.5);
    }

    #[test]
    fn single_center_takes_everything() {
        let lab = flat_lab(6, 4, [10.0, 0.0, 0.0]);
        let a = assign_pixels(&lab, &[center(10.0, 0.5, 0.5)], 10.0, 1.0);
        assert!(a.labels.iter().all(|&l| l == 0));
        assert!(a.fallback_pixels > 0);
    }

    #[test]
    fn two_color_partition() {
        // 4x2 image, left half dark, right half bright; centers on each half
        let lab = lab_from_fn(4, 2, |x, _| if x < 2 { [10.0, 0.0, 0.0] } else { [90.0, 0.0, 0.0] });
        let centers = [center(10.0, 1.0, 1.0), center(90.0, 3.0, 1.0)];
        let a = assign_pixels(&lab, &centers, 0.1, 2.0);
        assert_eq!(a.labels, vec![0, 0, 1, 1, 0, 0, 1, 1]);
    }

    #[test]
    fn equidistant_goes_to_lower_id() {
        let lab = flat_lab(3, 1, [0.0; 3]);
        let centers = [center(0.0, 0.5, 0.5), center(0.0, 2.5, 0.5)];
        let a = assign_pixels(&lab, &centers, 1.0, 3.0);
        assert_eq!(a.labels[1], 0);
    }

    #[test]
    fn update_examples() {
        let lab = lab_from_fn(3, 1, |x, _| [x as f32 * 10.0, 0.0, 0.0]);
        // one cluster over pixels 0 and 2
        let (c, _) = update_centers(&lab, &[0, 1, 0], &[center(0.0, 0.0, 0.0), center(10.0, 1.5, 0.5)]);
        assert_eq!(c[0].x, 1.5); // mean of pixel centers 0.5 and 2.5
        assert_eq!(c[0].l, 10.0);
        // fixed point has zero residual
        let (again, e) = update_centers(&lab, &[0, 1, 0], &c);
        assert_eq!(e, 0.0);
        assert_eq!(again, c);
        // hand case: clusters {0, 1} and {2}
        let (c, e) = update_centers(&lab, &[0, 0, 1], &[center(0.0, 0.5, 0.5), center(20.0, 2.5, 0.5)]);
        assert_eq!((c[0].l, c[0].x, c[0].y), (5.0, 1.0, 0.5));
        assert_eq!((c[1].l, c[1].x), (20.0, 2.5));
        assert!((e - (25.0f64 + 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_cluster_keeps_center() {
        let lab = flat_lab(2, 1, [0.0; 3]);
        let prev = [center(0.0, 1.0, 0.5), center(50.0, 5.0, 5.0)];
        let (c, e) = update_centers(&lab, &[0, 0], &prev);
        assert_eq!(c[1], prev[1]);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn one_superpixel_per_pixel() {
        let lab = lab_from_fn(6, 5, |x, y| [(x * 7 + y * 3) as f32, 0.0, 0.0]);
        let params = SlicParams { k: 30, enforce_connectivity: false, ..SlicParams::new(30, 10.0) };
        let r = run_slic_lab(&lab, &params).unwrap();
        assert_eq!(r.map.num_superpixels(), 30);
        let mut ids = r.map.labels().to_vec();
        ids.sort();
        assert_eq!(ids, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn connected_map_is_unchanged() {
        let map = SuperpixelMap::new(4, 2, vec![0, 0, 1, 1, 2, 2, 1, 1]).unwrap();
        assert_eq!(enforce_connectivity(&map), map);
    }

    #[test]
    fn stray_pixel_is_absorbed() {
        let mut labels = vec![0u32; 25];
        labels[12] = 1;
        labels[24] = 1;
        for (i, l) in labels.iter_mut().enumerate() {
            if i % 5 == 4 {
                *l = 1;
            }
        }
        // id 1: right column plus a stray pixel in the middle
        let map = SuperpixelMap::new(5, 5, labels).unwrap();
        let out = enforce_connectivity(&map);
        assert!(is_connected(&out));
        assert_eq!(out.num_superpixels(), 2);
        assert_eq!(out.get(2, 2), out.get(1, 2));
    }

    #[test]
    fn checkerboard_becomes_connected() {
        let labels: Vec<u32> = (0..36).map(|i| ((i % 6 + i / 6) % 2) as u32).collect();
        let map = SuperpixelMap::new(6, 6, labels).unwrap();
        assert!(!is_connected(&map));
        let out = enforce_connectivity(&map);
        assert!(is_connected(&out));
    }
}

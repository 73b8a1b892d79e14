use crate::error::{Error, Result};
use crate::image::SuperpixelMap;

use super::adjacency::{neighbors_within_radius, AdjacencyGraph};

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn contains(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && self.y0 <= other.y0 && self.x1 >= other.x1 && self.y1 >= other.y1
    }
}

/// Tight bounding box of each superpixel.
pub fn superpixel_bboxes(map: &SuperpixelMap) -> Vec<Rect> {
    let mut boxes = vec![Rect { x0: usize::MAX, y0: usize::MAX, x1: 0, y1: 0 }; map.num_superpixels()];
    let w = map.width();
    for (p, &l) in map.labels().iter().enumerate() {
        let (x, y) = (p % w, p / w);
        let b = &mut boxes[l as usize];
        b.x0 = b.x0.min(x);
        b.y0 = b.y0.min(y);
        b.x1 = b.x1.max(x + 1);
        b.y1 = b.y1.max(y + 1);
    }
    boxes
}

/// Bounding box of the pixels of every superpixel within `radius` hops of `s`.
pub fn subscene_bbox(boxes: &[Rect], g: &AdjacencyGraph, s: usize, radius: usize) -> Rect {
    neighbors_within_radius(g, s, radius)
        .into_iter()
        .map(|t| boxes[t])
        .reduce(|a, b| a.union(&b))
        .expect("ball contains s")
}

/// Partitions the image into a grid of `ceil(sqrt(count W/H)) x
/// ceil(sqrt(count H/W))` near-equal rectangles with row-major ids.
pub fn rect_regions(width: usize, height: usize, count: usize) -> Result<SuperpixelMap> {
    if count == 0 {
        return Err(Error::invalid("rectangle count must be at least 1"));
    }
    let (w, h, n) = (width as f64, height as f64, count as f64);
    let cols = ((n * w / h).sqrt().ceil() as usize).clamp(1, width);
    let rows = ((n * h / w).sqrt().ceil() as usize).clamp(1, height);
    let mut labels = Vec::with_capacity(width * height);
    for y in 0..height {
        let r = y * rows / height;
        for x in 0..width {
            labels.push((r * cols + x * cols / width) as u32);
        }
    }
    SuperpixelMap::new(width, height, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoomout::adjacency::build_adjacency;

    #[test]
    fn four_blocks() {
        let map = rect_regions(4, 4, 4).unwrap();
        assert_eq!(map.labels(), &[0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3]);
        assert_eq!(rect_regions(3, 3, 1).unwrap().num_superpixels(), 1);
        // ceil(sqrt(7/3)) x ceil(sqrt(3/7)) = 2 x 1
        assert_eq!(rect_regions(7, 3, 1).unwrap().num_superpixels(), 2);
    }

    #[test]
    fn rect_grid_partitions_image() {
        for (w, h, n) in [(37, 23, 10), (64, 64, 500), (5, 40, 7)] {
            let map = rect_regions(w, h, n).unwrap();
            assert_eq!(map.num_pixels(), w * h);
            assert!(map.sizes().iter().all(|&s| s > 0));
            let boxes = superpixel_bboxes(&map);
            let widths: Vec<_> = boxes.iter().map(|b| b.x1 - b.x0).collect();
            let heights: Vec<_> = boxes.iter().map(|b| b.y1 - b.y0).collect();
            assert!(widths.iter().max().unwrap() - widths.iter().min().unwrap() <= 1);
            assert!(heights.iter().max().unwrap() - heights.iter().min().unwrap() <= 1);
            assert_eq!(boxes.iter().map(Rect::area).sum::<usize>(), w * h);
        }
    }

    #[test]
    fn stacked_regions_union() {
        let map = SuperpixelMap::new(3, 4, vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]).unwrap();
        let g = build_adjacency(&map);
        let boxes = superpixel_bboxes(&map);
        assert_eq!(boxes[1], Rect { x0: 0, y0: 2, x1: 3, y1: 4 });
        let b = subscene_bbox(&boxes, &g, 1, 1);
        assert_eq!(b, Rect { x0: 0, y0: 0, x1: 3, y1: 4 });
        assert!(b.contains(&boxes[1]));
        let lone = SuperpixelMap::new(2, 2, vec![0; 4]).unwrap();
        let g = build_adjacency(&lone);
        assert_eq!(subscene_bbox(&superpixel_bboxes(&lone), &g, 0, 3), Rect { x0: 0, y0: 0, x1: 2, y1: 2 });
    }
}

//! sRGB <-> CIELAB under the D65 illuminant.

use crate::image::{LabImage, RgbImage};

// sRGB primaries to XYZ; rows sum to the D65 white point below.
const RGB_TO_XYZ: [[f64; 3]; 3] =
    [[0.4124564, 0.3575761, 0.1804375], [0.2126729, 0.7151522, 0.0721750], [0.0193339, 0.1191920, 0.9503041]];

const XYZ_TO_RGB: [[f64; 3]; 3] =
    [[3.2404542, -1.5371385, -0.4985314], [-0.9692660, 1.8760108, 0.0415560], [0.0556434, -0.2040259, 1.0572252]];

const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > EPSILON {
        t
    } else {
        (116.0 * f - 16.0) / KAPPA
    }
}

/// Converts one 8-bit sRGB triple to `[L, a, b]`.
pub fn srgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = rgb.map(|c| srgb_to_linear(c as f64 / 255.0));
    let mut xyz = [0.0; 3];
    for (row, out) in RGB_TO_XYZ.iter().zip(xyz.iter_mut()) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Inverse of [`srgb_pixel_to_lab`], clamping out-of-gamut colors.
pub fn lab_pixel_to_srgb(lab: [f64; 3]) -> [u8; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let xyz = [lab_f_inv(fx) * WHITE[0], lab_f_inv(fy) * WHITE[1], lab_f_inv(fz) * WHITE[2]];
    let mut rgb = [0u8; 3];
    for (row, out) in XYZ_TO_RGB.iter().zip(rgb.iter_mut()) {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        let s = linear_to_srgb(lin.clamp(0.0, 1.0));
        *out = (s * 255.0).round().clamp(0.0, 255.0) as u8;
    }
    rgb
}

pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    let data =
        img.data().chunks_exact(3).flat_map(|p| srgb_pixel_to_lab([p[0], p[1], p[2]]).map(|v| v as f32)).collect();
    LabImage::new(img.width(), img.height(), data).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_and_black() {
        let w = srgb_pixel_to_lab([255, 255, 255]);
        assert!((w[0] - 100.0).abs() < 1e-3);
        assert!(w[1].abs() < 0.01 && w[2].abs() < 0.01);
        let b = srgb_pixel_to_lab([0, 0, 0]);
        assert!(b.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn mid_gray() {
        // Y = ((119/255 + 0.055) / 1.055)^2.4 = 0.18447, L = 116 * Y^(1/3) - 16 = 50.04
        let g = srgb_pixel_to_lab([119, 119, 119]);
        assert!((g[0] - 49.9).abs() < 0.2, "{g:?}");
        assert!(g[1].abs() < 0.2 && g[2].abs() < 0.2);
    }

    #[test]
    fn grays_are_neutral_and_monotone() {
        let mut last = -1.0;
        for v in 0..=255u8 {
            let lab = srgb_pixel_to_lab([v, v, v]);
            assert!(lab[1].abs() < 0.01 && lab[2].abs() < 0.01, "{v}: {lab:?}");
            assert!(lab[0] > last);
            assert!(lab[0] <= 100.0 + 1e-3);
            last = lab[0];
        }
    }

    #[test]
    fn inverse_recovers_bytes() {
        for rgb in [[12u8, 200, 99], [255, 0, 0], [0, 0, 255], [128, 128, 128]] {
            assert_eq!(lab_pixel_to_srgb(srgb_pixel_to_lab(rgb)), rgb);
        }
    }
}

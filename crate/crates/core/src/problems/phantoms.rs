//! Deterministic synthetic test images with values in `[0, 1]`.

use crate::tensor::Matrix;

/// `(intensity, center x, center y, semi-axis a, semi-axis b, angle in degrees)`
const SHEPP_LOGAN: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.0, 0.0, 0.69, 0.92, 0.0),
    (-0.8, 0.0, -0.0184, 0.6624, 0.874, 0.0),
    (-0.2, 0.22, 0.0, 0.11, 0.31, -18.0),
    (-0.2, -0.22, 0.0, 0.16, 0.41, 18.0),
    (0.1, 0.0, 0.35, 0.21, 0.25, 0.0),
    (0.1, 0.0, 0.1, 0.046, 0.046, 0.0),
    (0.1, 0.0, -0.1, 0.046, 0.046, 0.0),
    (0.1, -0.08, -0.605, 0.046, 0.023, 0.0),
    (0.1, 0.0, -0.605, 0.023, 0.023, 0.0),
    (0.1, 0.06, -0.605, 0.023, 0.046, 0.0),
];

fn ellipse_sum(n: usize, shapes: &[(f64, f64, f64, f64, f64, f64)]) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        let x = 2.0 * (j as f64 + 0.5) / n as f64 - 1.0;
        let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        shapes
            .iter()
            .filter(|&&(_, cx, cy, a, b, deg)| {
                let (s, c) = deg.to_radians().sin_cos();
                let (dx, dy) = (x - cx, y - cy);
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            })
            .map(|s| s.0)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    })
}

/// Modified Shepp-Logan head phantom, a stand-in for an MRI slice.
pub fn shepp_logan(n: usize) -> Matrix {
    ellipse_sum(n, &SHEPP_LOGAN)
}

/// Three-channel image of smooth overlapping blobs on a shaded background.
pub fn rgb_blobs(n: usize) -> [Matrix; 3] {
    // (center x, center y, radius, r, g, b)
    const BLOBS: [(f64, f64, f64, f64, f64, f64); 5] = [
        (-0.35, 0.3, 0.45, 0.85, 0.15, 0.1),
        (0.4, 0.35, 0.35, 0.2, 0.7, 0.15),
        (0.1, -0.35, 0.5, 0.9, 0.55, 0.05),
        (-0.5, -0.5, 0.25, 0.3, 0.8, 0.2),
        (0.55, -0.45, 0.3, 0.75, 0.1, 0.15),
    ];
    let channel = |c: usize| {
        Matrix::from_fn(n, n, |i, j| {
            let x = 2.0 * (j as f64 + 0.5) / n as f64 - 1.0;
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let mut v = 0.1 + 0.05 * (x + y);
            for b in &BLOBS {
                let r2 = ((x - b.0).powi(2) + (y - b.1).powi(2)) / (b.2 * b.2);
                if r2 <= 1.0 {
                    let tone = [b.3, b.4, b.5][c];
                    v = v.max(tone * (1.0 - 0.3 * r2));
                }
            }
            v.clamp(0.0, 1.0)
        })
    };
    [channel(0), channel(1), channel(2)]
}

/// `count` frames of a bright disk moving diagonally over a fixed
/// background bar.
pub fn moving_disk(n: usize, count: usize) -> Vec<Matrix> {
    (0..count)
        .map(|f| {
            let t = if count > 1 {
                f as f64 / (count - 1) as f64
            } else {
                0.0
            };
            let (cx, cy) = (-0.4 + 0.8 * t, 0.4 - 0.8 * t);
            Matrix::from_fn(n, n, |i, j| {
                let x = 2.0 * (j as f64 + 0.5) / n as f64 - 1.0;
                let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let mut v = if x.abs() < 0.15 { 0.4 } else { 0.1 };
                if (x - cx).powi(2) + (y - cy).powi(2) <= 0.09 {
                    v = 0.9;
                }
                v
            })
        })
        .collect()
}

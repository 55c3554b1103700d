//! Direction grids on the unit sphere.
//!
//! Backscatter estimators pair each direction with its antipode, so every
//! grid here is closed under negation and laid out as
//! `[d_0 .. d_{h-1}, -d_0 .. -d_{h-1}]` with h = n/2. Quadrature uses the
//! uniform weight `4*pi/n`, adequate for the sphere averages in this crate.

/// Antipodally symmetric Fibonacci-spiral grid with `n` directions
/// (`n` even, >= 2). The first half lives on the upper hemisphere.
pub fn antipodal_directions(n: usize) -> Vec<[f64; 3]> {
    assert!(n >= 2 && n % 2 == 0, "direction count must be even");
    let half = n / 2;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut dirs = Vec::with_capacity(n);
    for i in 0..half {
        // z in (0, 1): upper hemisphere only, antipodes fill the lower one.
        let z = (i as f64 + 0.5) / half as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
        dirs.push([r * phi.cos(), r * phi.sin(), z]);
    }
    for i in 0..half {
        let d = dirs[i];
        dirs.push([-d[0], -d[1], -d[2]]);
    }
    dirs
}

/// The six signed coordinate axes.
pub fn axis_directions() -> Vec<[f64; 3]> {
    vec![
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
    ]
}

/// Uniform quadrature weight for an `n`-point sphere grid.
pub fn uniform_weight(n: usize) -> f64 {
    4.0 * std::f64::consts::PI / n as f64
}

/// Index of the antipode of direction `i` in an antipodal grid of size `n`.
pub fn antipode_index(i: usize, n: usize) -> usize {
    let half = n / 2;
    if i < half {
        i + half
    } else {
        i - half
    }
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_unit_and_antipodal() {
        let n = 16;
        let dirs = antipodal_directions(n);
        assert_eq!(dirs.len(), n);
        for (i, d) in dirs.iter().enumerate() {
            assert!((norm(*d) - 1.0).abs() < 1e-12);
            let j = antipode_index(i, n);
            for c in 0..3 {
                assert!((dirs[j][c] + d[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_integrates_to_sphere_area() {
        let n = 64;
        let total = uniform_weight(n) * n as f64;
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}

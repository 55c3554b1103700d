//! Uniform 3-D sampling lattice over the computational box.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform lattice on `[-L, L]^3` with midpoint collocation: node `i` along
/// an axis sits at `-L + (i + 1/2) * spacing`. The implied frequency lattice
/// is `(pi/L) * {-n/2, .., n/2 - 1}` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct GridSpec3 {
    n: usize,
    l_box: f64,
    spacing: f64,
    cell_volume: f64,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    n_per_axis: usize,
    box_half_width: f64,
}

impl From<GridSpec3> for GridRepr {
    fn from(g: GridSpec3) -> Self {
        GridRepr {
            n_per_axis: g.n,
            box_half_width: g.l_box,
        }
    }
}

impl TryFrom<GridRepr> for GridSpec3 {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        make_grid(r.n_per_axis, r.box_half_width)
    }
}

pub fn make_grid(n: usize, l_box: f64) -> Result<GridSpec3> {
    if n % 2 != 0 {
        return Err(Error::Grid(format!("n must be even, got {n}")));
    }
    if n < 16 {
        return Err(Error::Grid(format!("n must be >= 16, got {n}")));
    }
    if !(l_box > 0.0) {
        return Err(Error::Grid(format!("box half-width must be > 0, got {l_box}")));
    }
    let spacing = 2.0 * l_box / n as f64;
    Ok(GridSpec3 {
        n,
        l_box,
        spacing,
        cell_volume: spacing * spacing * spacing,
    })
}

impl GridSpec3 {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_box(&self) -> f64 {
        self.l_box
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.l_box).powi(3)
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Midpoint coordinate of node `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.l_box + (i as f64 + 0.5) * self.spacing
    }

    #[inline]
    pub fn node_coords(&self, idx: usize) -> [f64; 3] {
        let iz = idx % self.n;
        let iy = (idx / self.n) % self.n;
        let ix = idx / (self.n * self.n);
        [self.coord(ix), self.coord(iy), self.coord(iz)]
    }

    /// Frequency of DFT index `j` along one axis, wrapped to the symmetric
    /// range `(pi/L) * {-n/2, .., n/2 - 1}`.
    #[inline]
    pub fn freq(&self, j: usize) -> f64 {
        let f = if j < self.n / 2 {
            j as isize
        } else {
            j as isize - self.n as isize
        };
        std::f64::consts::PI / self.l_box * f as f64
    }

    /// |xi|^2 at DFT index `(jx, jy, jz)`.
    #[inline]
    pub fn freq_norm_sq(&self, jx: usize, jy: usize, jz: usize) -> f64 {
        let a = self.freq(jx);
        let b = self.freq(jy);
        let c = self.freq(jz);
        a * a + b * b + c * c
    }

    /// Nearest lattice node to an arbitrary point (components clamped to the
    /// box).
    pub fn nearest_node(&self, x: [f64; 3]) -> [usize; 3] {
        let mut out = [0usize; 3];
        for (o, c) in out.iter_mut().zip(x) {
            let raw = ((c + self.l_box) / self.spacing - 0.5).round();
            *o = raw.clamp(0.0, (self.n - 1) as f64) as usize;
        }
        out
    }
}

//! Discretization of the layer R² × T¹.
//!
//! The horizontal plane is replaced by a periodic box of side `box_len`; the
//! vertical direction is the unit torus. Spectral arrays are stored row-major
//! over `(m1, m2, n)` in FFT order (`0..=N/2`, then `-N/2+1..=-1`), physical
//! arrays row-major over `(i, j, l)` at `x = (L i/Nx, L j/Ny)`, `z = l/Nz`.
//!
//! Two wavevectors are attached to each mode. The *magnitude* wavevector uses
//! the label `m` as is and feeds every even multiplier (heat factor, Sobolev
//! weights, cutoffs). The *derivative* wavevector zeroes the Nyquist label in
//! each direction and feeds every odd or mixed symbol (gradient, curl, Leray,
//! Biot-Savart, Coriolis) so that those symbols map real fields to real fields.

use std::f64::consts::PI;

use crate::error::{NscError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub box_len: f64,
}

/// Wavevector data of a single mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSymbol {
    /// Real vector `(k1, k2, 2πn)` with Nyquist components zeroed; the
    /// differential symbol is `ξ = i * deriv`.
    pub deriv: [f64; 3],
    /// `|k|² + 4π²n²` from the unmodified labels.
    pub mag_sq: f64,
}

impl ModeSymbol {
    #[inline]
    pub fn deriv_sq(&self) -> f64 {
        let [a, b, c] = self.deriv;
        a * a + b * b + c * c
    }
}

/// Signed mode label for FFT index `i` of an axis with `n` points.
#[inline]
pub fn mode_label(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index of the conjugate mode `-m`.
#[inline]
pub fn conj_index(i: usize, n: usize) -> usize {
    (n - i) % n
}

#[inline]
fn is_nyquist(i: usize, n: usize) -> bool {
    n > 1 && i == n / 2
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize, box_len: f64) -> Result<Self> {
        for (name, v) in [("nx", nx), ("ny", ny), ("nz", nz)] {
            if v < 4 || v % 2 != 0 {
                return Err(NscError::InvalidGrid(format!(
                    "{name} = {v} must be even and at least 4"
                )));
            }
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(NscError::InvalidGrid(format!(
                "box length {box_len} must be positive"
            )));
        }
        Ok(Grid {
            nx,
            ny,
            nz,
            box_len,
        })
    }

    /// Same horizontal resolution on a box of a different side length.
    pub fn with_box_len(&self, box_len: f64) -> Result<Self> {
        Grid::new(self.nx, self.ny, self.nz, box_len)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.ny + i2) * self.nz + i3
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let i3 = idx % self.nz;
        let rest = idx / self.nz;
        (rest / self.ny, rest % self.ny, i3)
    }

    /// Flat index of the conjugate mode `(-m1, -m2, -n)`.
    #[inline]
    pub fn conj_flat(&self, idx: usize) -> usize {
        let (a, b, c) = self.unindex(idx);
        self.index(
            conj_index(a, self.nx),
            conj_index(b, self.ny),
            conj_index(c, self.nz),
        )
    }

    #[inline]
    pub fn labels(&self, i1: usize, i2: usize, i3: usize) -> (i64, i64, i64) {
        (
            mode_label(i1, self.nx),
            mode_label(i2, self.ny),
            mode_label(i3, self.nz),
        )
    }

    #[inline]
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.box_len
    }

    #[inline]
    pub fn k1(&self, i1: usize) -> f64 {
        self.k_unit() * mode_label(i1, self.nx) as f64
    }

    #[inline]
    pub fn k2(&self, i2: usize) -> f64 {
        self.k_unit() * mode_label(i2, self.ny) as f64
    }

    #[inline]
    pub fn kz(&self, i3: usize) -> f64 {
        2.0 * PI * mode_label(i3, self.nz) as f64
    }

    #[inline]
    pub fn k1_deriv(&self, i1: usize) -> f64 {
        if is_nyquist(i1, self.nx) {
            0.0
        } else {
            self.k1(i1)
        }
    }

    #[inline]
    pub fn k2_deriv(&self, i2: usize) -> f64 {
        if is_nyquist(i2, self.ny) {
            0.0
        } else {
            self.k2(i2)
        }
    }

    #[inline]
    pub fn kz_deriv(&self, i3: usize) -> f64 {
        if is_nyquist(i3, self.nz) {
            0.0
        } else {
            self.kz(i3)
        }
    }

    #[inline]
    pub fn symbol(&self, i1: usize, i2: usize, i3: usize) -> ModeSymbol {
        let (k1, k2, kz) = (self.k1(i1), self.k2(i2), self.kz(i3));
        ModeSymbol {
            deriv: [self.k1_deriv(i1), self.k2_deriv(i2), self.kz_deriv(i3)],
            mag_sq: k1 * k1 + k2 * k2 + kz * kz,
        }
    }

    #[inline]
    pub fn symbol_flat(&self, idx: usize) -> ModeSymbol {
        let (a, b, c) = self.unindex(idx);
        self.symbol(a, b, c)
    }

    /// Largest derivative wavenumber along any axis.
    pub fn max_wavenumber(&self) -> f64 {
        let kh = self.k_unit() * ((self.nx.max(self.ny) / 2 - 1) as f64);
        let kz = 2.0 * PI * ((self.nz / 2 - 1) as f64);
        kh.max(kz)
    }

    /// Largest `|ξ|` represented on the grid.
    pub fn max_xi(&self) -> f64 {
        let k1 = self.k_unit() * (self.nx / 2) as f64;
        let k2 = self.k_unit() * (self.ny / 2) as f64;
        let kz = 2.0 * PI * (self.nz / 2) as f64;
        (k1 * k1 + k2 * k2 + kz * kz).sqrt()
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.box_len / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.box_len / self.ny as f64
    }

    /// Quadrature weight of one physical sample of the 3D box.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx() * self.dy() / self.nz as f64
    }

    /// Quadrature weight of one sample of a horizontal plane.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    #[inline]
    pub fn x1(&self, i: usize) -> f64 {
        self.box_len * i as f64 / self.nx as f64
    }

    #[inline]
    pub fn x2(&self, j: usize) -> f64 {
        self.box_len * j as f64 / self.ny as f64
    }

    #[inline]
    pub fn z(&self, l: usize) -> f64 {
        l as f64 / self.nz as f64
    }

    /// Sample coordinate mapped into the principal box `[-L/2, L/2)`.
    #[inline]
    pub fn x1_centered(&self, i: usize) -> f64 {
        centered(self.x1(i), self.box_len)
    }

    #[inline]
    pub fn x2_centered(&self, j: usize) -> f64 {
        centered(self.x2(j), self.box_len)
    }

    /// Dealiasing keep-mask along one axis (2/3 rule).
    #[inline]
    pub fn keeps(label: i64, n: usize) -> bool {
        3 * label.unsigned_abs() as usize <= n
    }
}

#[inline]
fn centered(x: f64, l: f64) -> f64 {
    if x >= 0.5 * l {
        x - l
    } else {
        x
    }
}

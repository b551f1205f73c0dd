//! Uniform grids with halo layers and complex samples living on them.
//!
//! A [`Grid`] covers the core interval `[a, b]` with step `h` and carries
//! `halo` extra layers on each side, so nodes run from `a - halo*h` to
//! `b + halo*h`. Difference operators consume one halo layer per side; see
//! [`crate::scale_ops`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used to decide that `(b - a) / h` is an integer.
const COMMENSURATE_TOL: f64 = 1e-9;

/// Points closer than this fraction of `h` to a node are treated as the node.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    h: f64,
    halo: usize,
    cells: usize,
}

/// Build a grid on `[a, b]` with step `h` and `halo` layers beyond each end.
pub fn make_grid(a: f64, b: f64, h: f64, halo: usize) -> Result<Grid> {
    Grid::new(a, b, h, halo)
}

impl Grid {
    pub fn new(a: f64, b: f64, h: f64, halo: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0 && h < 1.0) {
            return Err(Error::BadStep(h));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::BadInterval { a, b });
        }
        let ratio = (b - a) / h;
        let cells = ratio.round();
        if (ratio - cells).abs() > COMMENSURATE_TOL * ratio.max(1.0) || cells < 1.0 {
            return Err(Error::NonCommensurate { len: b - a, h });
        }
        Ok(Self {
            a,
            b,
            h,
            halo,
            cells: cells as usize,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn halo(&self) -> usize {
        self.halo
    }

    /// Number of cells in the core interval `[a, b]`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells + 2 * self.halo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `j`, counted from the leftmost halo node.
    pub fn node(&self, j: usize) -> f64 {
        let k = j as i64 - self.halo as i64;
        if k == self.cells as i64 {
            self.b
        } else {
            self.a + k as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.node(j))
    }

    /// Index of the node at `a`.
    pub fn first_core(&self) -> usize {
        self.halo
    }

    /// Index of the node at `b`.
    pub fn last_core(&self) -> usize {
        self.halo + self.cells
    }

    pub fn lo(&self) -> f64 {
        self.node(0)
    }

    pub fn hi(&self) -> f64 {
        self.node(self.len() - 1)
    }

    /// Same core interval with a different halo depth.
    pub fn with_halo(&self, halo: usize) -> Self {
        Self { halo, ..*self }
    }

    /// Same step and left end, with the core truncated to `cells` cells.
    pub fn truncated(&self, cells: usize) -> Result<Self> {
        if cells == 0 || cells > self.cells {
            return Err(Error::BadInterval {
                a: self.a,
                b: self.a + cells as f64 * self.h,
            });
        }
        let b = if cells == self.cells {
            self.b
        } else {
            self.a + cells as f64 * self.h
        };
        Ok(Self { b, cells, ..*self })
    }

    /// Whether the two grids share step and core interval (halo may differ).
    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.cells == other.cells
            && (self.a - other.a).abs() <= SNAP * self.h
            && (self.h - other.h).abs() <= 1e-15 * self.h
    }

    /// Fractional node position of `t`: integer part is the node to the left.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (lo, hi) = (self.lo(), self.hi());
        let slack = SNAP * self.h;
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let x = (t - lo) / self.h;
        let nearest = x.round();
        if (x - nearest).abs() <= SNAP {
            return Ok((nearest as usize, 0.0));
        }
        let j = (x.floor() as usize).min(self.len() - 2);
        Ok((j, x - j as f64))
    }

    /// Core index of the last node at or before `t` and the fractional offset to it.
    pub fn locate_core(&self, t: f64) -> Result<(usize, f64)> {
        self.check_core(t)?;
        let (j, frac) = self.locate(t)?;
        Ok((j - self.halo, frac))
    }

    fn check_core(&self, t: f64) -> Result<()> {
        let slack = SNAP * self.h;
        if t >= self.a - slack && t <= self.b + slack {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                t,
                lo: self.a,
                hi: self.b,
            })
        }
    }
}

/// Complex values sampled at every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    grid: Grid,
    values: Vec<Complex64>,
}

/// Evaluate `f` at every node of `grid`.
pub fn sample<F, V>(f: F, grid: &Grid) -> Result<SampledFn>
where
    F: Fn(f64) -> V,
    V: Into<Complex64>,
{
    SampledFn::sample(f, grid)
}

impl SampledFn {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { t: grid.node(j) });
        }
        Ok(Self { grid, values })
    }

    /// Construct from values already known to be finite.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn sample<F, V>(f: F, grid: &Grid) -> Result<Self>
    where
        F: Fn(f64) -> V,
        V: Into<Complex64>,
    {
        let values = grid.nodes().map(|t| f(t).into()).collect();
        Self::new(*grid, values)
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at core node `k` (node `a` is `k = 0`).
    pub fn at_core(&self, k: usize) -> Complex64 {
        self.values[self.grid.halo + k]
    }

    /// Drop outer layers so that exactly `halo` remain on each side.
    pub fn restrict(&self, halo: usize) -> Result<Self> {
        let have = self.grid.halo;
        if halo > have {
            return Err(Error::HaloExhausted {
                needed: halo,
                available: have,
            });
        }
        let drop = have - halo;
        let values = self.values[drop..self.values.len() - drop].to_vec();
        Ok(Self::from_parts(self.grid.with_halo(halo), values))
    }

    /// Restrict both operands to their common halo; error if lattices differ.
    fn aligned<'a>(&'a self, other: &'a SampledFn) -> Result<(Grid, &'a [Complex64], &'a [Complex64])> {
        if !self.grid.same_lattice(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let halo = self.grid.halo.min(other.grid.halo);
        let cut = |f: &'a SampledFn| {
            let d = f.grid.halo - halo;
            &f.values[d..f.values.len() - d]
        };
        Ok((self.grid.with_halo(halo), cut(self), cut(other)))
    }

    pub fn zip_with(&self, other: &SampledFn, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        let (grid, x, y) = self.aligned(other)?;
        let values: Vec<_> = x.iter().zip(y).map(|(&p, &q)| op(p, q)).collect();
        Self::new(grid, values)
    }

    pub fn map(&self, op: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| op(v)).collect())
    }

    pub fn add(&self, other: &SampledFn) -> Result<Self> {
        self.zip_with(other, |p, q| p + q)
    }

    pub fn sub(&self, other: &SampledFn) -> Result<Self> {
        self.zip_with(other, |p, q| p - q)
    }

    pub fn mul(&self, other: &SampledFn) -> Result<Self> {
        self.zip_with(other, |p, q| p * q)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&v| v * c).collect())
    }

    /// Largest modulus over all nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Linear interpolation at `t`; exact at nodes.
    pub fn interp_linear(&self, t: f64) -> Result<Complex64> {
        let (j, frac) = self.grid.locate(t)?;
        if frac == 0.0 {
            return Ok(self.values[j]);
        }
        Ok(self.values[j] * (1.0 - frac) + self.values[j + 1] * frac)
    }

    /// Integral over `[a, t_end]` of the piecewise-linear interpolant.
    ///
    /// Full cells use the trapezoid rule; a partial last cell integrates the
    /// linear interpolant up to `t_end`.
    pub fn quad_to(&self, t_end: f64) -> Result<Complex64> {
        self.quad_between(self.grid.a, t_end)
    }

    /// Integral over `[lo, hi]` of the piecewise-linear interpolant, both ends in the core.
    pub fn quad_between(&self, lo: f64, hi: f64) -> Result<Complex64> {
        self.grid.check_core(lo)?;
        self.grid.check_core(hi)?;
        if hi < lo {
            return Ok(-self.quad_between(hi, lo)?);
        }
        let h = self.grid.h;
        let (jl, fl) = self.grid.locate(lo)?;
        let (jh, fh) = self.grid.locate(hi)?;
        if jl == jh {
            let (x, y) = (self.interp_linear(lo)?, self.interp_linear(hi)?);
            return Ok((x + y) * (0.5 * (fh - fl) * h));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        // partial cell [lo, node jl+1]
        let first_full = if fl > 0.0 {
            let x = self.interp_linear(lo)?;
            sum += (x + self.values[jl + 1]) * (0.5 * (1.0 - fl) * h);
            jl + 1
        } else {
            jl
        };
        for j in first_full..jh {
            sum += (self.values[j] + self.values[j + 1]) * (0.5 * h);
        }
        if fh > 0.0 {
            let y = self.interp_linear(hi)?;
            sum += (self.values[jh] + y) * (0.5 * fh * h);
        }
        Ok(sum)
    }
}

//! Banded least squares by Givens rotations.
//!
//! Rows arrive one at a time as a dense segment starting at some column and
//! are folded into an upper-triangular factor stored with `w` entries per
//! row. Fill-in never leaves the band as long as every row segment fits in
//! `w` columns, and each row costs `O(w²)` when rows arrive sorted by their
//! first column.

use crate::error::{Error, Result};

pub(crate) struct BandedLsq {
    n: usize,
    w: usize,
    r: Vec<f64>,
    rhs: Vec<f64>,
    filled: Vec<bool>,
    residual_sq: f64,
    buf: Vec<f64>,
}

impl BandedLsq {
    pub fn new(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            r: vec![0.0; n * w],
            rhs: vec![0.0; n],
            filled: vec![false; n],
            residual_sq: 0.0,
            buf: vec![0.0; w],
        }
    }

    /// Add the equation `Σ_k vals[k]·x[first + k] = b`.
    pub fn add_row(&mut self, first: usize, vals: &[f64], b: f64) {
        let w = self.w;
        debug_assert!(vals.len() <= w);
        self.buf.iter_mut().for_each(|x| *x = 0.0);
        let len = vals.len().min(self.n.saturating_sub(first));
        self.buf[..len].copy_from_slice(&vals[..len]);
        let mut beta = b;
        let mut c = first;
        while c < self.n {
            if self.buf[0] != 0.0 {
                let row = &mut self.r[c * w..(c + 1) * w];
                if !self.filled[c] {
                    row.copy_from_slice(&self.buf);
                    self.rhs[c] = beta;
                    self.filled[c] = true;
                    return;
                }
                let (p, q) = (row[0], self.buf[0]);
                let rho = p.hypot(q);
                let (cs, sn) = (p / rho, q / rho);
                for (x, y) in row.iter_mut().zip(self.buf.iter_mut()) {
                    let (u, v) = (*x, *y);
                    *x = cs * u + sn * v;
                    *y = cs * v - sn * u;
                }
                let u = self.rhs[c];
                self.rhs[c] = cs * u + sn * beta;
                beta = cs * beta - sn * u;
            }
            self.buf.rotate_left(1);
            self.buf[w - 1] = 0.0;
            c += 1;
            if self.buf.iter().all(|&x| x == 0.0) {
                break;
            }
        }
        self.residual_sq += beta * beta;
    }

    #[cfg(test)]
    /// Squared norm of the part of the right-hand side outside the range.
    pub fn residual_sq(&self) -> f64 {
        self.residual_sq
    }

    /// Back substitution; fails when a pivot is missing or negligible.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let w = self.w;
        let scale = (0..self.n)
            .filter(|&c| self.filled[c])
            .map(|c| self.r[c * w].abs())
            .fold(0.0, f64::max);
        let mut x = vec![0.0; self.n];
        for c in (0..self.n).rev() {
            let row = &self.r[c * w..(c + 1) * w];
            if !self.filled[c] || row[0].abs() <= 1e-14 * scale {
                return Err(Error::SingularJacobian { column: c });
            }
            let mut s = self.rhs[c];
            for k in 1..w.min(self.n - c) {
                s -= row[k] * x[c + k];
            }
            x[c] = s / row[0];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_tridiagonal() {
        // 2x0 - x1 = 1, -x0 + 2x1 - x2 = 0, -x1 + 2x2 = 1  ->  x = (1, 1, 1)
        let mut q = BandedLsq::new(3, 3);
        q.add_row(0, &[2.0, -1.0], 1.0);
        q.add_row(0, &[-1.0, 2.0, -1.0], 0.0);
        q.add_row(1, &[-1.0, 2.0], 1.0);
        let x = q.solve().unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(q.residual_sq() < 1e-28);
    }

    #[test]
    fn overdetermined_line_fit() {
        // fit c0 + c1*t through (0,1), (1,3), (2,4): normal equations give c = (7/6, 3/2)
        let mut q = BandedLsq::new(2, 2);
        for (t, y) in [(0.0, 1.0), (1.0, 3.0), (2.0, 4.0)] {
            q.add_row(0, &[1.0, t], y);
        }
        let x = q.solve().unwrap();
        assert!((x[0] - 7.0 / 6.0).abs() < 1e-14 && (x[1] - 1.5).abs() < 1e-14);
        assert!((q.residual_sq() - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let mut q = BandedLsq::new(3, 2);
        q.add_row(0, &[1.0, 1.0], 1.0);
        q.add_row(1, &[1.0, 1.0], 1.0);
        assert!(matches!(q.solve(), Err(Error::SingularJacobian { column: 2 })));
    }
}

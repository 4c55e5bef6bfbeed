//! Uniform grids and second-order finite differences.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::QMat2;
use crate::quat::Quaternion;

/// Anything finite differences can act on.
pub trait Lin: Copy + Add<Output = Self> + Mul<f64, Output = Self> + Default {}

impl Lin for f64 {}
impl Lin for Quaternion {}
impl Lin for QMat2 {}
impl Lin for num_complex::Complex64 {}

/// Sample layout: index `iv * nu + iu`, position `(u0 + iu du, v0 + iv dv)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeom {
    pub nu: usize,
    pub nv: usize,
    pub du: f64,
    pub dv: f64,
    pub periodic_u: bool,
    pub periodic_v: bool,
}

/// Stencil: up to four (index, weight) pairs along one axis.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub idx: [usize; 4],
    pub w: [f64; 4],
    pub len: usize,
}

impl Stencil {
    fn new(pairs: &[(usize, f64)]) -> Stencil {
        let mut s = Stencil { idx: [0; 4], w: [0.0; 4], len: pairs.len() };
        for (k, &(i, w)) in pairs.iter().enumerate() {
            s.idx[k] = i;
            s.w[k] = w;
        }
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(move |k| (self.idx[k], self.w[k]))
    }
}

fn axis_first(i: usize, n: usize, h: f64, periodic: bool) -> Stencil {
    let c = 0.5 / h;
    if periodic {
        return Stencil::new(&[((i + n - 1) % n, -c), ((i + 1) % n, c)]);
    }
    if i == 0 {
        Stencil::new(&[(0, -3.0 * c), (1, 4.0 * c), (2, -c)])
    } else if i == n - 1 {
        Stencil::new(&[(n - 1, 3.0 * c), (n - 2, -4.0 * c), (n - 3, c)])
    } else {
        Stencil::new(&[(i - 1, -c), (i + 1, c)])
    }
}

fn axis_second(i: usize, n: usize, h: f64, periodic: bool) -> Stencil {
    let c = 1.0 / (h * h);
    if periodic {
        return Stencil::new(&[((i + n - 1) % n, c), (i, -2.0 * c), ((i + 1) % n, c)]);
    }
    if i == 0 {
        Stencil::new(&[(0, 2.0 * c), (1, -5.0 * c), (2, 4.0 * c), (3, -c)])
    } else if i == n - 1 {
        Stencil::new(&[(n - 1, 2.0 * c), (n - 2, -5.0 * c), (n - 3, 4.0 * c), (n - 4, -c)])
    } else {
        Stencil::new(&[(i - 1, c), (i, -2.0 * c), (i + 1, c)])
    }
}

impl GridGeom {
    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, iu: usize, iv: usize) -> usize {
        iv * self.nu + iu
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nu, k / self.nu)
    }

    pub fn h(&self) -> f64 {
        self.du.max(self.dv)
    }

    pub fn validate(&self) -> Result<()> {
        let need = |periodic: bool| if periodic { 3 } else { 4 };
        if self.nu < need(self.periodic_u) || self.nv < need(self.periodic_v) {
            return Err(Error::GridTooSmall(format!(
                "{}x{} (need at least 4 samples along open directions, 3 along periodic ones)",
                self.nu, self.nv
            )));
        }
        if !(self.du > 0.0 && self.dv > 0.0 && self.du.is_finite() && self.dv.is_finite()) {
            return Err(Error::Input(format!("spacings must be positive, got du={} dv={}", self.du, self.dv)));
        }
        Ok(())
    }

    pub fn check_index(&self, iu: usize, iv: usize) -> Result<()> {
        if iu >= self.nu || iv >= self.nv {
            return Err(Error::IndexOutOfRange { iu, iv, nu: self.nu, nv: self.nv });
        }
        Ok(())
    }

    pub fn su(&self, iu: usize) -> Stencil {
        axis_first(iu, self.nu, self.du, self.periodic_u)
    }
    pub fn sv(&self, iv: usize) -> Stencil {
        axis_first(iv, self.nv, self.dv, self.periodic_v)
    }
    pub fn suu(&self, iu: usize) -> Stencil {
        axis_second(iu, self.nu, self.du, self.periodic_u)
    }
    pub fn svv(&self, iv: usize) -> Stencil {
        axis_second(iv, self.nv, self.dv, self.periodic_v)
    }

    pub fn d_du<T: Lin>(&self, data: &[T], iu: usize, iv: usize) -> T {
        self.su(iu).iter().fold(T::default(), |acc, (i, w)| acc + data[self.idx(i, iv)] * w)
    }

    pub fn d_dv<T: Lin>(&self, data: &[T], iu: usize, iv: usize) -> T {
        self.sv(iv).iter().fold(T::default(), |acc, (j, w)| acc + data[self.idx(iu, j)] * w)
    }

    pub fn d_uu<T: Lin>(&self, data: &[T], iu: usize, iv: usize) -> T {
        self.suu(iu).iter().fold(T::default(), |acc, (i, w)| acc + data[self.idx(i, iv)] * w)
    }

    pub fn d_vv<T: Lin>(&self, data: &[T], iu: usize, iv: usize) -> T {
        self.svv(iv).iter().fold(T::default(), |acc, (j, w)| acc + data[self.idx(iu, j)] * w)
    }

    pub fn d_uv<T: Lin>(&self, data: &[T], iu: usize, iv: usize) -> T {
        let (a, b) = (self.su(iu), self.sv(iv));
        let mut acc = T::default();
        for (i, wi) in a.iter() {
            for (j, wj) in b.iter() {
                acc = acc + data[self.idx(i, j)] * (wi * wj);
            }
        }
        acc
    }

    /// Is every sample touched by the second-order stencils at `(iu, iv)` valid?
    pub fn stencil_valid(&self, valid: &[bool], iu: usize, iv: usize) -> bool {
        let (a, b) = (self.suu(iu), self.svv(iv));
        let ok_u = a.iter().chain(self.su(iu).iter()).all(|(i, _)| valid[self.idx(i, iv)]);
        let ok_v = b.iter().chain(self.sv(iv).iter()).all(|(j, _)| valid[self.idx(iu, j)]);
        let ok_uv = self.su(iu).iter().all(|(i, _)| self.sv(iv).iter().all(|(j, _)| valid[self.idx(i, j)]));
        ok_u && ok_v && ok_uv
    }

    /// Distance in samples to the nearest open edge (large when periodic).
    pub fn edge_distance(&self, iu: usize, iv: usize) -> usize {
        let du = if self.periodic_u { usize::MAX } else { iu.min(self.nu - 1 - iu) };
        let dv = if self.periodic_v { usize::MAX } else { iv.min(self.nv - 1 - iv) };
        du.min(dv)
    }
}

/// Pairwise summation, deterministic for a given input order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n: usize, periodic: bool) -> GridGeom {
        let h = if periodic { std::f64::consts::TAU / n as f64 } else { 1.0 / (n - 1) as f64 };
        GridGeom { nu: n, nv: n, du: h, dv: h, periodic_u: periodic, periodic_v: periodic }
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let g = geom(7, false);
        let f: Vec<f64> = (0..g.len())
            .map(|k| {
                let (iu, iv) = g.coords(k);
                let (u, v) = (iu as f64 * g.du, iv as f64 * g.dv);
                1.0 + 2.0 * u - v + 3.0 * u * u + 0.5 * u * v - 2.0 * v * v
            })
            .collect();
        for iv in 0..g.nv {
            for iu in 0..g.nu {
                let (u, v) = (iu as f64 * g.du, iv as f64 * g.dv);
                assert!((g.d_du(&f, iu, iv) - (2.0 + 6.0 * u + 0.5 * v)).abs() < 1e-12);
                assert!((g.d_dv(&f, iu, iv) - (-1.0 + 0.5 * u - 4.0 * v)).abs() < 1e-12);
                assert!((g.d_uu(&f, iu, iv) - 6.0).abs() < 1e-9);
                assert!((g.d_vv(&f, iu, iv) + 4.0).abs() < 1e-9);
                assert!((g.d_uv(&f, iu, iv) - 0.5).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn periodic_wrap_uses_last_column() {
        let g = geom(8, true);
        let s = g.su(0);
        assert_eq!(s.idx[0], 7);
        assert_eq!(s.idx[1], 1);
    }

    #[test]
    fn second_order_convergence_on_sine() {
        let err = |n: usize| {
            let g = geom(n, false);
            let f: Vec<f64> = (0..g.len()).map(|k| (g.coords(k).0 as f64 * g.du * 3.0).sin()).collect();
            (0..g.nu).map(|iu| (g.d_du(&f, iu, 0) - 3.0 * (iu as f64 * g.du * 3.0).cos()).abs()).fold(0.0, f64::max)
        };
        let order = (err(33) / err(65)).log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn pairwise_matches_naive() {
        let x: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        assert!((pairwise_sum(&x) - x.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn too_small_grid_rejected() {
        let g = GridGeom { nu: 3, nv: 10, du: 0.1, dv: 0.1, periodic_u: false, periodic_v: false };
        assert!(g.validate().is_err());
    }
}

//! Dense radial convolution engine shared by all integral operators.
//!
//! A `RadialKernel` stores one integrated weight per lattice offset: for
//! off-diagonal offsets the kernel density at that distance times the cell
//! volume, and for the zero offset whatever analytic self-cell value the
//! builder supplies. Applying it is a dense O(N^2) (dim 1) / O(N^4) (dim 2)
//! double sum, parallelized over output cells with a fixed inner summation
//! order, so results are bit-identical across thread counts.

use crate::lattice::{Grid, GridFunction};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct RadialKernel {
    grid: Grid,
    /// Integrated weights indexed by absolute per-axis offsets:
    /// `weights[di]` in dim 1, `weights[di * N + dj]` in dim 2.
    weights: Vec<f64>,
}

impl RadialKernel {
    /// Builds a kernel from a radial density evaluated at every lattice
    /// offset distance (multiplied by the cell volume), with an explicitly
    /// supplied integrated diagonal value.
    pub fn from_distance_fn(
        grid: Grid,
        density: impl Fn(f64) -> f64 + Sync,
        diagonal: f64,
    ) -> RadialKernel {
        let n = grid.points_per_axis();
        let h = grid.spacing();
        let vol = grid.cell_volume();
        let weights = match grid.dim() {
            1 => {
                let mut w = vec![0.0; n];
                w[0] = diagonal;
                for (k, slot) in w.iter_mut().enumerate().skip(1) {
                    *slot = density(k as f64 * h) * vol;
                }
                w
            }
            _ => {
                let mut w = vec![0.0; n * n];
                for di in 0..n {
                    for dj in 0..n {
                        if di == 0 && dj == 0 {
                            w[0] = diagonal;
                        } else {
                            let d = ((di * di + dj * dj) as f64).sqrt() * h;
                            w[di * n + dj] = density(d) * vol;
                        }
                    }
                }
                w
            }
        };
        RadialKernel { grid, weights }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Integrated weight at per-axis offsets (di, dj); dj is ignored in dim 1.
    pub fn weight(&self, di: usize, dj: usize) -> f64 {
        match self.grid.dim() {
            1 => self.weights[di],
            _ => self.weights[di * self.grid.points_per_axis() + dj],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Pointwise combination with another kernel on the same grid.
    pub fn zip(&self, other: &RadialKernel, f: impl Fn(f64, f64) -> f64) -> RadialKernel {
        assert_eq!(self.grid, other.grid, "kernel grid mismatch");
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(&a, &b)| f(a, b))
            .collect();
        RadialKernel { grid: self.grid, weights }
    }

    /// Dense application out(x) = sum_y W(|x - y|) f(y) with zero extension
    /// outside the domain.
    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        self.apply_impl(f, false)
    }

    /// Row-normalized application out(x) = sum_y W f / sum_y W, i.e. the
    /// Markov normalization that fixes constants exactly at every point.
    pub fn apply_normalized(&self, f: &GridFunction) -> GridFunction {
        self.apply_impl(f, true)
    }

    fn apply_impl(&self, f: &GridFunction, normalized: bool) -> GridFunction {
        assert_eq!(self.grid, f.grid(), "kernel/function grid mismatch");
        let n = self.grid.points_per_axis();
        let vals = f.values();
        let out: Vec<f64> = match self.grid.dim() {
            1 => (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for (j, &v) in vals.iter().enumerate() {
                        let w = self.weights[i.abs_diff(j)];
                        num += w * v;
                        den += w;
                    }
                    if normalized {
                        num / den
                    } else {
                        num
                    }
                })
                .collect(),
            _ => (0..n * n)
                .into_par_iter()
                .map(|idx| {
                    let (i0, i1) = (idx / n, idx % n);
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for j0 in 0..n {
                        let row = &self.weights[i0.abs_diff(j0) * n..i0.abs_diff(j0) * n + n];
                        let frow = &vals[j0 * n..j0 * n + n];
                        for (j1, &v) in frow.iter().enumerate() {
                            let w = row[i1.abs_diff(j1)];
                            num += w * v;
                            den += w;
                        }
                    }
                    if normalized {
                        num / den
                    } else {
                        num
                    }
                })
                .collect(),
        };
        GridFunction::from_values(self.grid, out).expect("kernel application stays finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn apply_matches_brute_force_dim1() {
        let g = Grid::new(1, 2.0, 32).unwrap();
        let k = RadialKernel::from_distance_fn(g, |d| (-d).exp(), 0.7);
        let f = GridFunction::from_fn(g, |p| p[0].cos()).unwrap();
        let out = k.apply(&f);
        for i in 0..32usize {
            let mut s = 0.0;
            for j in 0..32usize {
                s += k.weight(i.abs_diff(j), 0) * f.value(j);
            }
            assert_abs_diff_eq!(out.value(i), s, epsilon = 1e-13);
        }
    }

    #[test]
    fn apply_matches_brute_force_dim2() {
        let g = Grid::new(2, 1.0, 8).unwrap();
        let k = RadialKernel::from_distance_fn(g, |d| 1.0 / (1.0 + d * d), 0.3);
        let f = GridFunction::from_fn(g, |p| p[0] + 2.0 * p[1]).unwrap();
        let out = k.apply(&f);
        let n = 8usize;
        for i0 in 0..n {
            for i1 in 0..n {
                let mut s = 0.0;
                for j0 in 0..n {
                    for j1 in 0..n {
                        s += k.weight(i0.abs_diff(j0), i1.abs_diff(j1))
                            * f.value(g.flat_index(j0, j1));
                    }
                }
                assert_abs_diff_eq!(out.value(g.flat_index(i0, i1)), s, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn normalized_apply_fixes_constants() {
        for dim in [1usize, 2] {
            let g = Grid::new(dim, 2.0, if dim == 1 { 64 } else { 16 }).unwrap();
            let k = RadialKernel::from_distance_fn(g, |d| (-d * d).exp(), 1.0);
            let c = GridFunction::constant(g, 3.5).unwrap();
            let out = k.apply_normalized(&c);
            for i in 0..g.cell_count() {
                assert_abs_diff_eq!(out.value(i), 3.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn apply_is_linear() {
        let g = Grid::new(1, 1.0, 48).unwrap();
        let k = RadialKernel::from_distance_fn(g, |d| 1.0 / (0.1 + d), 0.2);
        let f = GridFunction::from_fn(g, |p| p[0]).unwrap();
        let h = GridFunction::from_fn(g, |p| (3.0 * p[0]).sin()).unwrap();
        let combo = f.zip(&h, |a, b| 2.0 * a - 0.5 * b).unwrap();
        let lhs = k.apply(&combo);
        let rhs = k
            .apply(&f)
            .zip(&k.apply(&h), |a, b| 2.0 * a - 0.5 * b)
            .unwrap();
        for i in 0..g.cell_count() {
            assert_abs_diff_eq!(lhs.value(i), rhs.value(i), epsilon = 1e-12);
        }
    }
}

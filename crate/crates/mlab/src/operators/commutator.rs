//! Multilinear commutators of fractional integral operators and their
//! sigma-expansion into plain operator applications.
//!
//! The commutator applies the product kernel
//!   T_b f(x) = sum_{y != x} prod_i (b_i(x) - b_i(y)) W(|x - y|) f(y);
//! the diagonal term carries the factor prod_i (b_i(x) - b_i(x)) and so drops
//! out identically, which is why the commutator never touches the kernel's
//! self-cell weight.

use crate::error::{Error, Result};
use crate::lattice::{Grid, GridFunction};
use crate::operators::fractional::{fractional_kernel, riesz_kernel, TimeQuadrature};
use crate::operators::kernel::RadialKernel;
use crate::operators::semigroup::SemigroupSpec;
use rayon::prelude::*;

/// Order/exponent bundle for a multilinear commutator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorSpec {
    pub alpha: f64,
    pub order: usize,
}

impl CommutatorSpec {
    pub fn new(dim: usize, alpha: f64, order: usize) -> Result<CommutatorSpec> {
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::Parameter(format!(
                "commutator needs alpha in (0, {dim}), got {alpha}"
            )));
        }
        if order == 0 {
            return Err(Error::Parameter("commutator order m must be >= 1".into()));
        }
        Ok(CommutatorSpec { alpha, order })
    }
}

/// A radial kernel tagged for commutator use.
#[derive(Debug, Clone)]
pub struct CommutatorKernel {
    kernel: RadialKernel,
}

impl CommutatorKernel {
    /// The classical Riesz kernel I_alpha.
    pub fn classical(grid: Grid, alpha: f64) -> Result<CommutatorKernel> {
        Ok(CommutatorKernel { kernel: riesz_kernel(grid, alpha)? })
    }

    /// The generalized fractional kernel L^{-alpha/2}.
    pub fn generalized(
        spec: &SemigroupSpec,
        grid: Grid,
        alpha: f64,
        quad: &TimeQuadrature,
    ) -> Result<CommutatorKernel> {
        let (kernel, _) = fractional_kernel(spec, grid, alpha, quad)?;
        Ok(CommutatorKernel { kernel })
    }

    /// Wraps an already-built radial kernel, sharing its weight table.
    pub fn from_radial(kernel: RadialKernel) -> CommutatorKernel {
        CommutatorKernel { kernel }
    }

    pub fn radial(&self) -> &RadialKernel {
        &self.kernel
    }

    pub fn grid(&self) -> Grid {
        self.kernel.grid()
    }
}

fn check_inputs(
    kernel: &CommutatorKernel,
    symbols: &[GridFunction],
    f: &GridFunction,
) -> Result<()> {
    if symbols.is_empty() {
        return Err(Error::Parameter("commutator needs at least one symbol".into()));
    }
    if symbols.len() > 12 {
        return Err(Error::Parameter(format!(
            "commutator order {} is unreasonably large (max 12)",
            symbols.len()
        )));
    }
    let grid = kernel.grid();
    if f.grid() != grid || symbols.iter().any(|b| b.grid() != grid) {
        return Err(Error::Parameter("commutator inputs live on mismatched grids".into()));
    }
    Ok(())
}

/// T_b f with the full product kernel; O(m N^2) (dim 1) / O(m N^4) (dim 2).
pub fn multilinear_commutator(
    kernel: &CommutatorKernel,
    symbols: &[GridFunction],
    f: &GridFunction,
) -> Result<GridFunction> {
    check_inputs(kernel, symbols, f)?;
    let grid = kernel.grid();
    let n = grid.points_per_axis();
    let weights = kernel.kernel.weights();
    let vals = f.values();
    let syms: Vec<&[f64]> = symbols.iter().map(|b| b.values()).collect();
    let out: Vec<f64> = match grid.dim() {
        1 => (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for (j, &v) in vals.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let mut prod = weights[i.abs_diff(j)] * v;
                    for b in &syms {
                        prod *= b[i] - b[j];
                    }
                    acc += prod;
                }
                acc
            })
            .collect(),
        _ => (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i0, i1) = (idx / n, idx % n);
                let mut acc = 0.0;
                for j0 in 0..n {
                    let row = &weights[i0.abs_diff(j0) * n..i0.abs_diff(j0) * n + n];
                    for j1 in 0..n {
                        let j = j0 * n + j1;
                        if j == idx {
                            continue;
                        }
                        let mut prod = row[i1.abs_diff(j1)] * vals[j];
                        for b in &syms {
                            prod *= b[idx] - b[j];
                        }
                        acc += prod;
                    }
                }
                acc
            })
            .collect(),
    };
    GridFunction::from_values(grid, out)
}

/// The sigma-expansion of the commutator around the shifts lambda:
///   sum_{sigma subset [m]} (-1)^{m - |sigma|}
///     prod_{i in sigma} (b_i(x) - lambda_i)
///     T( prod_{i notin sigma} (b_i - lambda_i) f )(x),
/// assembled from 2^m plain kernel applications. Algebraically identical to
/// `multilinear_commutator` for every choice of lambda.
pub fn sigma_expansion(
    kernel: &CommutatorKernel,
    symbols: &[GridFunction],
    lambdas: &[f64],
    f: &GridFunction,
) -> Result<GridFunction> {
    check_inputs(kernel, symbols, f)?;
    if lambdas.len() != symbols.len() {
        return Err(Error::Parameter(format!(
            "got {} shifts for {} symbols",
            lambdas.len(),
            symbols.len()
        )));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::Parameter("sigma-expansion shifts must be finite".into()));
    }
    let grid = kernel.grid();
    let m = symbols.len();
    let shifted: Vec<GridFunction> = symbols
        .iter()
        .zip(lambdas)
        .map(|(b, &l)| b.map(|v| v - l))
        .collect::<Result<_>>()?;
    let mut total = GridFunction::zeros(grid);
    for mask in 0u32..(1u32 << m) {
        // Inner factor: f times the symbols outside sigma.
        let mut inner = f.clone();
        for (i, b) in shifted.iter().enumerate() {
            if mask & (1 << i) == 0 {
                inner = inner.zip(b, |a, c| a * c)?;
            }
        }
        let applied = kernel.kernel.apply(&inner);
        // Outer factor: symbols inside sigma, with the alternating sign.
        let sign = if (m - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        let mut outer = applied.scale(sign)?;
        for (i, b) in shifted.iter().enumerate() {
            if mask & (1 << i) != 0 {
                outer = outer.zip(b, |a, c| a * c)?;
            }
        }
        total = total.zip(&outer, |a, c| a + c)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bump(g: Grid) -> GridFunction {
        GridFunction::from_fn(g, |p| (-(p[0] * p[0] + p[1] * p[1])).exp()).unwrap()
    }

    #[test]
    fn spec_validates() {
        assert!(CommutatorSpec::new(1, 0.5, 2).is_ok());
        assert!(CommutatorSpec::new(1, 1.0, 2).is_err());
        assert!(CommutatorSpec::new(2, 1.5, 0).is_err());
        assert!(CommutatorSpec::new(2, 1.5, 3).is_ok());
    }

    #[test]
    fn constant_symbols_annihilate() {
        let g = Grid::new(1, 2.0, 128).unwrap();
        let k = CommutatorKernel::classical(g, 0.5).unwrap();
        let f = bump(g);
        for m in 1..=3 {
            let symbols = vec![GridFunction::constant(g, 1.7).unwrap(); m];
            let out = multilinear_commutator(&k, &symbols, &f).unwrap();
            assert!(out.max_abs() <= 1e-12, "m = {m}: {}", out.max_abs());
        }
    }

    #[test]
    fn symbols_commute() {
        let g = Grid::new(1, 2.0, 96).unwrap();
        let k = CommutatorKernel::classical(g, 0.25).unwrap();
        let b1 = GridFunction::from_fn(g, |p| p[0]).unwrap();
        let b2 = GridFunction::from_fn(g, |p| (2.0 * p[0]).sin()).unwrap();
        let f = bump(g);
        let ab = multilinear_commutator(&k, &[b1.clone(), b2.clone()], &f).unwrap();
        let ba = multilinear_commutator(&k, &[b2, b1], &f).unwrap();
        for i in 0..g.cell_count() {
            assert_abs_diff_eq!(ab.value(i), ba.value(i), epsilon = 1e-12);
        }
    }

    #[test]
    fn matches_double_sum_oracle() {
        let g = Grid::new(1, 4.0, 32).unwrap();
        let k = CommutatorKernel::classical(g, 0.5).unwrap();
        let b1 = GridFunction::from_fn(g, |p| p[0].abs().max(0.1).ln()).unwrap();
        let b2 = GridFunction::from_fn(g, |p| p[0]).unwrap();
        let f = bump(g);
        let out = multilinear_commutator(&k, &[b1.clone(), b2.clone()], &f).unwrap();
        // Closest sample to x = 2.
        let i = (0..32)
            .min_by(|&a, &b| {
                let da = (g.point(a)[0] - 2.0).abs();
                let db = (g.point(b)[0] - 2.0).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let mut expect = 0.0;
        for j in 0..32 {
            if j == i {
                continue;
            }
            expect += (b1.value(i) - b1.value(j))
                * (b2.value(i) - b2.value(j))
                * k.radial().weight(i.abs_diff(j), 0)
                * f.value(j);
        }
        assert_abs_diff_eq!(out.value(i), expect, epsilon = 1e-12);
    }

    #[test]
    fn dim2_matches_double_sum_oracle() {
        let g = Grid::new(2, 1.0, 8).unwrap();
        let k = CommutatorKernel::classical(g, 1.0).unwrap();
        let b = GridFunction::from_fn(g, |p| p[0] + p[1] * p[1]).unwrap();
        let f = bump(g);
        let out = multilinear_commutator(&k, &[b.clone()], &f).unwrap();
        let i = g.flat_index(2, 5);
        let mut expect = 0.0;
        for j0 in 0..8 {
            for j1 in 0..8 {
                let j = g.flat_index(j0, j1);
                if j == i {
                    continue;
                }
                expect += (b.value(i) - b.value(j))
                    * k.radial().weight(2usize.abs_diff(j0), 5usize.abs_diff(j1))
                    * f.value(j);
            }
        }
        assert_abs_diff_eq!(out.value(i), expect, epsilon = 1e-13);
    }

    #[test]
    fn sigma_expansion_is_the_commutator() {
        let g = Grid::new(1, 2.0, 128).unwrap();
        let k = CommutatorKernel::classical(g, 0.5).unwrap();
        let b1 = GridFunction::from_fn(g, |p| (3.0 * p[0]).cos()).unwrap();
        let b2 = GridFunction::from_fn(g, |p| p[0]).unwrap();
        let b3 = GridFunction::from_fn(g, |p| p[0] * p[0]).unwrap();
        let f = bump(g);
        for lambdas in [[0.0, 0.0, 0.0], [0.3, -1.2, 2.5]] {
            for m in 1..=3 {
                let symbols = [b1.clone(), b2.clone(), b3.clone()][..m].to_vec();
                let direct = multilinear_commutator(&k, &symbols, &f).unwrap();
                let expanded = sigma_expansion(&k, &symbols, &lambdas[..m], &f).unwrap();
                let scale = direct.max_abs().max(1.0);
                for i in 0..g.cell_count() {
                    assert!(
                        (direct.value(i) - expanded.value(i)).abs() <= 1e-10 * scale,
                        "m = {m}, lambdas = {lambdas:?}, cell {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let g = Grid::new(1, 1.0, 32).unwrap();
        let g2 = Grid::new(1, 1.0, 64).unwrap();
        let k = CommutatorKernel::classical(g, 0.5).unwrap();
        let f = bump(g);
        assert!(multilinear_commutator(&k, &[], &f).is_err());
        let wrong = bump(g2);
        assert!(multilinear_commutator(&k, &[wrong], &f).is_err());
        let b = bump(g);
        assert!(sigma_expansion(&k, &[b], &[0.1, 0.2], &f).is_err());
    }
}

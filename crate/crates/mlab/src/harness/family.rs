//! Fixed, versioned test family: the desk-scale surrogate for "for all f".
//!
//! Every quantified check ranges over these functions, symbols, and weights;
//! the members are chosen to exercise smooth decay, jumps, oscillation, and a
//! cusp, and the family is deliberately closed to adversarial extension.

use crate::error::Result;
use crate::lattice::{Grid, GridFunction};
use crate::weights::WeightSpec;

#[derive(Debug, Clone)]
pub struct NamedFunction {
    pub name: &'static str,
    pub f: GridFunction,
}

#[derive(Debug, Clone)]
pub struct TestFamily {
    /// Input functions f.
    pub functions: Vec<NamedFunction>,
    /// BMO symbols b.
    pub symbols: Vec<NamedFunction>,
    /// Weight specs (realized per grid by the caller).
    pub weights: Vec<(&'static str, WeightSpec)>,
}

fn radial(dim: usize, p: &[f64; 2]) -> f64 {
    if dim == 1 {
        p[0].abs()
    } else {
        (p[0] * p[0] + p[1] * p[1]).sqrt()
    }
}

impl TestFamily {
    pub fn build(grid: Grid) -> Result<TestFamily> {
        let dim = grid.dim();
        let mut functions = Vec::new();
        for (name, sigma) in [("gauss-w25", 0.25), ("gauss-w50", 0.5), ("gauss-w100", 1.0)] {
            functions.push(NamedFunction {
                name,
                f: GridFunction::from_fn(grid, |p| {
                    let r = radial(dim, p);
                    (-r * r / (2.0 * sigma * sigma)).exp()
                })?,
            });
        }
        for (name, a) in [("chi-05", 0.5), ("chi-1", 1.0), ("chi-2", 2.0)] {
            functions.push(NamedFunction {
                name,
                f: GridFunction::from_fn(grid, |p| {
                    let inside = if dim == 1 {
                        p[0].abs() <= a
                    } else {
                        p[0].abs() <= a && p[1].abs() <= a
                    };
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                })?,
            });
        }
        functions.push(NamedFunction {
            name: "osc",
            f: GridFunction::from_fn(grid, |p| {
                let r = radial(dim, p);
                (4.0 * std::f64::consts::PI * p[0]).sin() * (-r * r / 2.0).exp()
            })?,
        });
        functions.push(NamedFunction {
            name: "cusp",
            f: GridFunction::from_fn(grid, |p| {
                let r = radial(dim, p);
                if r <= 1.0 {
                    r.powf(0.25)
                } else {
                    0.0
                }
            })?,
        });

        // log|x| truncated at a fixed +-4: the canonical BMO symbol, clipped
        // at a resolution-independent level so the family is the same
        // continuum function on every grid (an N-dependent clamp leaks log N
        // growth into cross-resolution trends), and low enough that the
        // innermost cells saturate the clamp from N = 512 upward.
        let cap = 4.0;
        let mut symbols = vec![NamedFunction {
            name: "b-log",
            f: GridFunction::from_fn(grid, |p| radial(dim, p).ln().clamp(-cap, cap))?,
        }];
        symbols.push(NamedFunction {
            name: "b-sin",
            f: GridFunction::from_fn(grid, |p| (std::f64::consts::PI * p[0]).sin())?,
        });
        // x on [-1, 1], continued by an exponential tail of matching value.
        symbols.push(NamedFunction {
            name: "b-ramp",
            f: GridFunction::from_fn(grid, |p| {
                let x = p[0];
                if x.abs() <= 1.0 {
                    x
                } else {
                    x.signum() * (1.0 - x.abs()).exp()
                }
            })?,
        });

        let weights = vec![
            ("w-unit", WeightSpec::Const(1.0)),
            ("w-q4", WeightSpec::Power(-0.25)),
            ("w-q2", WeightSpec::Power(-0.5)),
        ];
        Ok(TestFamily { functions, symbols, weights })
    }
}

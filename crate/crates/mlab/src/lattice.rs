//! Discretization substrate: cell-centered grids on [-R, R]^dim (dim 1 or 2),
//! grid functions, metric balls, dyadic ball families, and midpoint-rule
//! quadrature. Every other module consumes only these types.
//!
//! The grid is cell-centered with an even number of points per axis, so the
//! origin is never a sample point and power weights |x|^beta with beta < 0 are
//! finite at every sample.

use crate::error::{Error, Result};
use serde::Serialize;
use std::ops::Range;

/// Cell-centered grid on [-R, R]^dim.
///
/// Sample coordinates along each axis are x_i = -R + (i + 1/2) h with
/// h = 2R/N, i = 0..N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Grid> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("dim must be 1 or 2, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if points_per_axis == 0 || points_per_axis % 2 != 0 {
            return Err(Error::Config(format!(
                "points_per_axis must be a positive even integer, got {points_per_axis}"
            )));
        }
        Ok(Grid { dim, half_width, points_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Cell volume h^dim.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn cell_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Coordinate of the i-th sample along one axis.
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Full coordinates of a flat cell index; in dim 1 the second component is 0.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.axis_coord(idx), 0.0],
            _ => {
                let n = self.points_per_axis;
                [self.axis_coord(idx / n), self.axis_coord(idx % n)]
            }
        }
    }

    /// Flat index from per-axis indices (the second is ignored in dim 1).
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        match self.dim {
            1 => i,
            _ => i * self.points_per_axis + j,
        }
    }

    /// True for cells in the inner half of the domain per axis (|x_k| <= R/2),
    /// the region used for boundary-pollution-free error metrics.
    pub fn is_interior(&self, idx: usize) -> bool {
        let p = self.point(idx);
        let bound = self.half_width / 2.0;
        match self.dim {
            1 => p[0].abs() <= bound,
            _ => p[0].abs() <= bound && p[1].abs() <= bound,
        }
    }
}

/// Real-valued samples on a grid, one per cell, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.cell_count() {
            return Err(Error::Parameter(format!(
                "value count {} does not match cell count {}",
                values.len(),
                grid.cell_count()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite sample {} at cell {}",
                values[bad], bad
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 2]) -> f64) -> Result<GridFunction> {
        let values = (0..grid.cell_count()).map(|i| f(&grid.point(i))).collect();
        GridFunction::from_values(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<GridFunction> {
        GridFunction::from_values(grid, vec![c; grid.cell_count()])
    }

    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction { grid, values: vec![0.0; grid.cell_count()] }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Pointwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::Parameter("grid mismatch in zip".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GridFunction::from_values(self.grid, values)
    }

    pub fn scale(&self, c: f64) -> Result<GridFunction> {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> GridFunction {
        // |v| of finite values is finite; unwrap is safe.
        self.map(f64::abs).expect("abs preserves finiteness")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Relative L2 distance to `other` over the interior region (inner half of
    /// the domain per axis), normalized by the interior L2 mass of `other`.
    pub fn interior_rel_l2(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Parameter("grid mismatch in interior_rel_l2".into()));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.values.len() {
            if self.grid.is_interior(i) {
                let d = self.values[i] - other.values[i];
                num += d * d;
                den += other.values[i] * other.values[i];
            }
        }
        if den == 0.0 {
            return Err(Error::Degenerate("reference function vanishes on the interior".into()));
        }
        Ok((num / den).sqrt())
    }

    /// CSV serialization: columns are index per axis, coordinate per axis,
    /// value; row order lexicographic in the axis indices.
    pub fn write_csv(&self, mut out: impl std::io::Write) -> Result<()> {
        match self.grid.dim {
            1 => {
                writeln!(out, "i,x,value")?;
                for (i, v) in self.values.iter().enumerate() {
                    writeln!(out, "{},{},{}", i, self.grid.axis_coord(i), v)?;
                }
            }
            _ => {
                writeln!(out, "i,j,x,y,value")?;
                let n = self.grid.points_per_axis;
                for (idx, v) in self.values.iter().enumerate() {
                    let (i, j) = (idx / n, idx % n);
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        i,
                        j,
                        self.grid.axis_coord(i),
                        self.grid.axis_coord(j),
                        v
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Reads samples from the CSV layout written by `write_csv`; only the
    /// final column is consumed, rows must be in lexicographic order.
    pub fn read_csv(grid: Grid, text: &str) -> Result<GridFunction> {
        let mut values = Vec::with_capacity(grid.cell_count());
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 && line.chars().any(|c| c.is_ascii_alphabetic()) {
                continue; // header
            }
            if line.trim().is_empty() {
                continue;
            }
            let last = line.rsplit(',').next().unwrap_or("").trim();
            let v: f64 = last.parse().map_err(|_| {
                Error::Config(format!("bad CSV value `{last}` on line {}", lineno + 1))
            })?;
            values.push(v);
        }
        GridFunction::from_values(grid, values)
    }
}

/// Metric ball; in dim 1 the second center coordinate is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    pub fn new(center: [f64; 2], radius: f64) -> Ball {
        Ball { center, radius }
    }

    /// Semigroup time scale t_B = r_B^2.
    pub fn t_b(&self) -> f64 {
        self.radius * self.radius
    }

    /// The concentric ball with radius scaled by `factor` (2B, 2^k B, ...).
    pub fn scaled(&self, factor: f64) -> Ball {
        Ball { center: self.center, radius: self.radius * factor }
    }

    pub fn contains(&self, p: &[f64; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// Contiguous flat-index ranges covering the cells whose centers lie in a
/// ball (one range per grid row in dim 2, a single range in dim 1).
pub fn ball_cell_ranges(grid: &Grid, ball: &Ball) -> Vec<Range<usize>> {
    let n = grid.points_per_axis;
    let r2 = ball.radius * ball.radius;
    let mut ranges = Vec::new();
    match grid.dim {
        1 => {
            if let Some(range) = axis_range(grid, ball.center[0], r2) {
                ranges.push(range);
            }
        }
        _ => {
            for i in 0..n {
                let dx = grid.axis_coord(i) - ball.center[0];
                let rem = r2 - dx * dx;
                if rem < 0.0 {
                    continue;
                }
                if let Some(range) = axis_range(grid, ball.center[1], rem) {
                    ranges.push(i * n + range.start..i * n + range.end);
                }
            }
        }
    }
    ranges
}

/// Indices i with (x_i - c)^2 <= rem, as a half-open range (samples along an
/// axis are monotone, so the admissible set is contiguous).
fn axis_range(grid: &Grid, c: f64, rem: f64) -> Option<Range<usize>> {
    let n = grid.points_per_axis;
    let h = grid.spacing();
    let inside = |i: usize| {
        let d = grid.axis_coord(i) - c;
        d * d <= rem
    };
    let dx = rem.sqrt();
    // Candidate bounds from arithmetic, then corrected by the predicate so
    // membership is decided by exactly one floating-point comparison per cell.
    let approx_lo = ((c - dx + grid.half_width) / h - 0.5).floor() as i64;
    let mut lo = approx_lo.clamp(0, n as i64) as usize;
    while lo > 0 && inside(lo - 1) {
        lo -= 1;
    }
    while lo < n && !inside(lo) {
        lo += 1;
    }
    if lo >= n {
        return None;
    }
    let approx_hi = ((c + dx + grid.half_width) / h - 0.5).ceil() as i64;
    let mut hi = approx_hi.clamp(lo as i64, n as i64 - 1) as usize;
    while hi + 1 < n && inside(hi + 1) {
        hi += 1;
    }
    while hi > lo && !inside(hi) {
        hi -= 1;
    }
    if !inside(hi) {
        return None;
    }
    Some(lo..hi + 1)
}

/// Number of cells whose center lies in the ball.
pub fn cell_count_in(grid: &Grid, ball: &Ball) -> usize {
    ball_cell_ranges(grid, ball).iter().map(|r| r.len()).sum()
}

/// Discrete Lebesgue measure h^dim * #(cells with center in the ball).
pub fn lebesgue_measure(grid: &Grid, ball: &Ball) -> f64 {
    cell_count_in(grid, ball) as f64 * grid.cell_volume()
}

/// Integration region: the whole domain or a single ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Whole,
    Ball(Ball),
}

/// Midpoint-rule integral h^dim * sum of samples over the region, summed in
/// fixed cell-index order.
pub fn integrate(f: &GridFunction, region: &Region) -> Result<f64> {
    let grid = f.grid();
    let sum = match region {
        Region::Whole => f.values().iter().sum::<f64>(),
        Region::Ball(ball) => {
            let ranges = ball_cell_ranges(&grid, ball);
            if ranges.iter().all(|r| r.is_empty()) {
                return Err(Error::EmptyRegion(format!(
                    "ball at ({}, {}) radius {} contains no cell centers",
                    ball.center[0], ball.center[1], ball.radius
                )));
            }
            ranges
                .iter()
                .map(|r| f.values()[r.clone()].iter().sum::<f64>())
                .sum::<f64>()
        }
    };
    Ok(sum * grid.cell_volume())
}

/// Enumeration policy for the finite ball family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallPolicy {
    /// Center stride in cells along each axis; `None` keeps only the origin.
    pub stride: Option<usize>,
    /// Include balls centered at the origin (which is never a sample point).
    pub include_origin: bool,
    /// Treat each cell as a degenerate ball of radius h/2 in maximal-operator
    /// sups, so that Mf >= |f| holds pointwise on the lattice.
    pub include_single_cell: bool,
}

impl Default for BallPolicy {
    fn default() -> Self {
        BallPolicy { stride: Some(4), include_origin: true, include_single_cell: true }
    }
}

impl BallPolicy {
    /// Stable descriptor embedded in reports.
    pub fn descriptor(&self) -> String {
        format!(
            "stride={};origin={};single_cell={}",
            self.stride.map_or("none".into(), |s| s.to_string()),
            self.include_origin,
            self.include_single_cell
        )
    }
}

/// Finite family of balls with dyadic radii {2^k h : k = 1..K-1},
/// K = floor(log2(R/h)), over strided lattice centers plus the origin.
///
/// Cell ranges for every ball are precomputed once; all sups and averages in
/// the toolkit iterate these cached ranges.
#[derive(Debug, Clone)]
pub struct BallFamily {
    grid: Grid,
    policy: BallPolicy,
    balls: Vec<Ball>,
    cells: Vec<Vec<Range<usize>>>,
    radii: Vec<f64>,
}

/// Dyadic radii 2^k h for k = 1..K-1 with K = floor(log2(R/h)) = floor(log2(N/2)).
pub fn dyadic_radii(grid: &Grid) -> Vec<f64> {
    let half_n = grid.points_per_axis() / 2;
    let cap = (usize::BITS - 1 - half_n.leading_zeros()) as usize; // floor(log2(N/2))
    (1..cap).map(|k| (1u64 << k) as f64 * grid.spacing()).collect()
}

pub fn build_ball_family(grid: Grid, policy: BallPolicy) -> Result<BallFamily> {
    let radii = dyadic_radii(&grid);
    if grid.points_per_axis() < 4 || radii.is_empty() {
        return Err(Error::Config(format!(
            "grid too small to host any ball (N = {})",
            grid.points_per_axis()
        )));
    }
    if policy.stride == Some(0) {
        return Err(Error::Config("ball-family stride must be >= 1".into()));
    }
    let mut centers: Vec<[f64; 2]> = Vec::new();
    if policy.include_origin {
        centers.push([0.0, 0.0]);
    }
    if let Some(s) = policy.stride {
        let axis: Vec<usize> = (s / 2..grid.points_per_axis()).step_by(s.max(1)).collect();
        match grid.dim() {
            1 => centers.extend(axis.iter().map(|&i| [grid.axis_coord(i), 0.0])),
            _ => {
                for &i in &axis {
                    for &j in &axis {
                        centers.push([grid.axis_coord(i), grid.axis_coord(j)]);
                    }
                }
            }
        }
    }
    if centers.is_empty() {
        return Err(Error::Config(
            "ball-family policy yields no centers (no stride and origin excluded)".into(),
        ));
    }
    let mut balls = Vec::with_capacity(centers.len() * radii.len());
    for c in &centers {
        for &r in &radii {
            balls.push(Ball::new(*c, r));
        }
    }
    let cells = balls.iter().map(|b| ball_cell_ranges(&grid, b)).collect();
    Ok(BallFamily { grid, policy, balls, cells, radii })
}

impl BallFamily {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn policy(&self) -> BallPolicy {
        self.policy
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    /// Cached cell ranges of the i-th ball.
    pub fn cell_ranges(&self, i: usize) -> &[Range<usize>] {
        &self.cells[i]
    }

    /// Distinct dyadic radii, ascending.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn descriptor(&self) -> String {
        format!(
            "dim={};R={};N={};{}",
            self.grid.dim(),
            self.grid.half_width(),
            self.grid.points_per_axis(),
            self.policy.descriptor()
        )
    }

    /// Sum of samples over the i-th ball (no h^dim factor), fixed order.
    pub fn sum_over(&self, i: usize, values: &[f64]) -> f64 {
        self.cells[i]
            .iter()
            .map(|r| values[r.clone()].iter().sum::<f64>())
            .sum()
    }

    /// Number of cells in the i-th ball.
    pub fn cell_count(&self, i: usize) -> usize {
        self.cells[i].iter().map(|r| r.len()).sum()
    }
}

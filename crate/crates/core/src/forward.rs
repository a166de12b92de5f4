//! The forward operator (indicator of the hypograph), exact fidelity terms,
//! and the per-node data-cost profiles consumed by the solver.
//!
//! Two routes to the data misfit coexist on purpose:
//!
//! * [`fidelity_exact`] evaluates `||F(a) - F(b)||_{L^2}^2` through the exact
//!   identity with the `L^1` distance of the curves — no rasterization at all.
//! * [`misfit`] evaluates the misfit of the height-quantized model through a
//!   [`DataCostTable`], which is the separable cost the solver minimizes
//!   exactly. Against smooth continuum data it carries an `O(h_t)` model
//!   error; against data produced by the model itself it is exact.

use crate::error::{Error, Result};
use crate::geometry::{dist_l1, Curve, CylinderField, PeriodicGrid};

/// Rasterized forward image: exact per-cell coverage fractions of the
/// hypograph of the piecewise-linear interpolant. Values lie in `[0, 1]`;
/// cells fully below the curve are exactly `1`, fully above exactly `0`.
pub fn apply_forward(c: &Curve) -> CylinderField {
    let grid = c.grid();
    let n_t = grid.n_t();
    let n_x = grid.n_x();
    let h_t = grid.h_t();
    let h_x = grid.h_x();
    let v = c.values();
    let mut cells = vec![0.0; n_t * n_x];
    for i in 0..n_t {
        let a = v[i];
        let b = v[(i + 1) % n_t];
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let row = &mut cells[i * n_x..(i + 1) * n_x];
        for (j, cell) in row.iter_mut().enumerate() {
            let x_bottom = grid.boundary_x(j);
            let x_top = grid.boundary_x(j + 1);
            if x_top <= lo {
                *cell = 1.0;
            } else if x_bottom >= hi {
                *cell = 0.0;
            } else {
                let integral = clamped_linear_integral(a - x_bottom, b - x_bottom, h_x, h_t);
                *cell = integral / (h_t * h_x);
            }
        }
    }
    CylinderField::new(grid, cells).expect("coverage fractions are finite")
}

/// Integral over `[0, h]` of `clamp(linear from d0 to d1, 0, cap)`.
///
/// The clamped linear function is piecewise linear with breakpoints where it
/// crosses `0` and `cap`, so the trapezoid rule on each piece is exact.
fn clamped_linear_integral(d0: f64, d1: f64, cap: f64, h: f64) -> f64 {
    debug_assert!(cap > 0.0 && h > 0.0);
    if d0 == d1 {
        return h * d0.clamp(0.0, cap);
    }
    let slope = (d1 - d0) / h;
    let t_zero = (-d0 / slope).clamp(0.0, h);
    let t_cap = ((cap - d0) / slope).clamp(0.0, h);
    let (ta, tb) = if t_zero <= t_cap {
        (t_zero, t_cap)
    } else {
        (t_cap, t_zero)
    };
    let eval = |t: f64| (d0 + slope * t).clamp(0.0, cap);
    let piece = |t0: f64, t1: f64| {
        if t1 > t0 {
            0.5 * (eval(t0) + eval(t1)) * (t1 - t0)
        } else {
            0.0
        }
    };
    piece(0.0, ta) + piece(ta, tb) + piece(tb, h)
}

/// `||F(a) - F(b)||_{L^2}^2`, computed exactly through the identity with the
/// `L^1` distance of the curves: per segment, the symmetric-difference band
/// between the two graphs is integrated in closed form, resolving
/// sign-change subintervals analytically.
pub fn fidelity_exact(a: &Curve, b: &Curve) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let va = a.values();
    let vb = b.values();
    let n = va.len();
    let h = a.grid().h_t();
    let mut total = 0.0;
    for i in 0..n {
        let d0 = va[i] - vb[i];
        let d1 = va[(i + 1) % n] - vb[(i + 1) % n];
        if d0 == 0.0 && d1 == 0.0 {
            continue;
        }
        total += if d0 * d1 >= 0.0 {
            0.5 * h * (d0.abs() + d1.abs())
        } else {
            // band area of a crossing segment in closed form
            0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
        };
    }
    Ok(total)
}

/// `||F(a) - F(b)||_{L^p}`, through the identity
/// `||F(a) - F(b)||_{L^p}^p = ||a - b||_{L^1}`. Requires finite `p >= 1`.
pub fn lp_distance(a: &Curve, b: &Curve, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("must be finite and >= 1, got {p}"),
        });
    }
    Ok(dist_l1(a, b)?.powf(1.0 / p))
}

/// Per-angle-node cost profiles `g_i(y)`: the inner radial integrals of the
/// misfit for a curve passing through height `y` at node `i`, with the angle
/// weight `h_t` folded in. Continuous and piecewise linear in `y` with
/// breakpoints at radial cell boundaries; within cell `j` the slope is
/// `h_t * (1 - 2 u[i][j])`.
#[derive(Debug, Clone)]
pub struct DataCostTable {
    grid: PeriodicGrid,
    /// `n_t x (n_x + 1)` breakpoint values, row-major per node.
    breakpoints: Vec<f64>,
    /// `n_t x n_x` per-cell slopes.
    slopes: Vec<f64>,
}

impl DataCostTable {
    /// Tabulates radial prefix sums of `(1 - u)^2 h_x` and suffix sums of
    /// `u^2 h_x` per node; cost `O(n_t * n_x)`.
    pub fn build(u: &CylinderField) -> Self {
        let grid = u.grid();
        let n_t = grid.n_t();
        let n_x = grid.n_x();
        let h_t = grid.h_t();
        let h_x = grid.h_x();
        let mut breakpoints = vec![0.0; n_t * (n_x + 1)];
        let mut slopes = vec![0.0; n_t * n_x];
        for i in 0..n_t {
            let row = &u.cells()[i * n_x..(i + 1) * n_x];
            // suffix[j] = sum_{l >= j} u^2 h_x
            let mut suffix = vec![0.0; n_x + 1];
            for j in (0..n_x).rev() {
                suffix[j] = suffix[j + 1] + row[j] * row[j] * h_x;
            }
            let bp = &mut breakpoints[i * (n_x + 1)..(i + 1) * (n_x + 1)];
            let mut prefix = 0.0;
            for j in 0..=n_x {
                bp[j] = h_t * (prefix + suffix[j]);
                if j < n_x {
                    let r = 1.0 - row[j];
                    prefix += r * r * h_x;
                    slopes[i * n_x + j] = h_t * (1.0 - 2.0 * row[j]);
                }
            }
        }
        Self {
            grid,
            breakpoints,
            slopes,
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    /// `g_i(y)`. Heights outside `[0, x_max]` are clamped to the domain.
    pub fn evaluate(&self, node: usize, y: f64) -> f64 {
        let n_x = self.grid.n_x();
        let y = y.clamp(0.0, self.grid.x_max());
        let h_x = self.grid.h_x();
        let j = ((y / h_x) as usize).min(n_x - 1);
        let base = node * (n_x + 1);
        self.breakpoints[base + j] + self.slopes[node * n_x + j] * (y - self.grid.boundary_x(j))
    }

    /// Slope of `g_i` at height `y` with the left-limit convention: at a
    /// breakpoint the cell below the height is used; at `y <= 0` cell `0`.
    pub fn slope_at(&self, node: usize, y: f64) -> f64 {
        self.slopes[node * self.grid.n_x() + self.cell_below(y)]
    }

    /// Index of the cell under the left-limit convention.
    pub(crate) fn cell_below(&self, y: f64) -> usize {
        let n_x = self.grid.n_x();
        if y <= 0.0 {
            return 0;
        }
        let h_x = self.grid.h_x();
        let mut j = ((y / h_x).ceil() as isize - 1).clamp(0, n_x as isize - 1) as usize;
        // pin against exact boundary values, robust to the division rounding
        while j > 0 && self.grid.boundary_x(j) >= y {
            j -= 1;
        }
        while j + 1 < n_x && self.grid.boundary_x(j + 1) < y {
            j += 1;
        }
        j
    }
}

/// Builds the cost table for a data field. See [`DataCostTable`].
pub fn build_cost_table(u: &CylinderField) -> DataCostTable {
    DataCostTable::build(u)
}

/// Misfit of the height-quantized model: `sum_i g_i(c[i])` over the table
/// built from `u`.
pub fn misfit(c: &Curve, u: &CylinderField) -> Result<f64> {
    if c.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    let table = DataCostTable::build(u);
    misfit_with_table(c, &table)
}

/// Misfit against a prebuilt table.
pub fn misfit_with_table(c: &Curve, table: &DataCostTable) -> Result<f64> {
    if c.grid() != table.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(c
        .values()
        .iter()
        .enumerate()
        .map(|(i, &y)| table.evaluate(i, y))
        .sum())
}

/// Exact gradient of [`misfit`] in the node heights, away from cell
/// boundaries: entry `i` is `h_t * (1 - 2 u(t_i, c[i]))` with the cell value
/// taken below the height (left-limit convention at breakpoints).
pub fn misfit_gradient(c: &Curve, u: &CylinderField) -> Result<Vec<f64>> {
    if c.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    let table = DataCostTable::build(u);
    Ok(c
        .values()
        .iter()
        .enumerate()
        .map(|(i, &y)| table.slope_at(i, y))
        .collect())
}

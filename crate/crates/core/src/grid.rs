//! Rectilinear grids on axis-aligned boxes and flat tori.
//!
//! Cell-centered layout: along axis `a` with `N_a` cells over length `L_a`,
//! centers sit at `x_j = (j + 1/2) h_a`, `h_a = L_a / N_a`. Values are stored
//! row-major (last axis contiguous). Neumann axes model a truncated `R^n`
//! via reflected ghost cells (zero normal derivative across the wall at the
//! domain edge); periodic axes wrap.

use crate::{Error, Result};

/// Boundary behaviour of one grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Wrap-around axis of a flat torus.
    Periodic,
    /// Reflecting axis (zero normal derivative) of a box.
    Neumann,
}

/// A validated rectilinear grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    extents: Vec<f64>,
    cells: Vec<usize>,
    topology: Vec<Topology>,
    spacing: Vec<f64>,
}

impl GridSpec {
    /// Build a grid. Rejects `dim` outside 1..=3, cell counts below 8 and
    /// non-positive extents.
    pub fn new(extents: &[f64], cells: &[usize], topology: &[Topology]) -> Result<GridSpec> {
        let dim = extents.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim {dim} not in 1..=3")));
        }
        if cells.len() != dim || topology.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "axis counts disagree: {} extents, {} cells, {} topologies",
                dim,
                cells.len(),
                topology.len()
            )));
        }
        for (a, (&l, &n)) in extents.iter().zip(cells).enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidGrid(format!("extent {l} on axis {a}")));
            }
            if n < 8 {
                return Err(Error::InvalidGrid(format!("{n} cells on axis {a}, need >= 8")));
            }
        }
        let spacing = extents.iter().zip(cells).map(|(&l, &n)| l / n as f64).collect();
        Ok(GridSpec {
            extents: extents.to_vec(),
            cells: cells.to_vec(),
            topology: topology.to_vec(),
            spacing,
        })
    }

    /// Periodic box `[0, l)^dim` with `n` cells per axis.
    pub fn torus(dim: usize, l: f64, n: usize) -> Result<GridSpec> {
        GridSpec::new(&vec![l; dim], &vec![n; dim], &vec![Topology::Periodic; dim])
    }

    /// Neumann box `[0, l]^dim` with `n` cells per axis.
    pub fn neumann_box(dim: usize, l: f64, n: usize) -> Result<GridSpec> {
        GridSpec::new(&vec![l; dim], &vec![n; dim], &vec![Topology::Neumann; dim])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn topology(&self) -> &[Topology] {
        &self.topology
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Volume of one cell, `prod h_a`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn total_cells(&self) -> usize {
        self.cells.iter().product()
    }

    /// Center coordinate of cell `j` along `axis`.
    pub fn axis_coord(&self, axis: usize, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing[axis]
    }

    /// Multi-index of a flat cell index (row-major, last axis contiguous).
    pub fn coords_of(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.cells[a];
            idx /= self.cells[a];
        }
        out
    }

    /// Cell-center position of a flat index.
    pub fn center(&self, idx: usize) -> Vec<f64> {
        let c = self.coords_of(idx);
        (0..self.dim()).map(|a| self.axis_coord(a, c[a])).collect()
    }

    /// Signed axis displacement `p - q`, wrapped to the minimal image on
    /// periodic axes.
    pub fn axis_delta(&self, axis: usize, p: f64, q: f64) -> f64 {
        let mut d = p - q;
        if self.topology[axis] == Topology::Periodic {
            let l = self.extents[axis];
            d -= (d / l).round() * l;
        }
        d
    }

    /// Squared distance between two points, geodesic on periodic axes.
    pub fn distance_sq(&self, p: &[f64], q: &[f64]) -> f64 {
        (0..self.dim())
            .map(|a| {
                let d = self.axis_delta(a, p[a], q[a]);
                d * d
            })
            .sum()
    }

    /// Largest distance realizable between two points of the domain.
    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let l = self.extents[a];
                let d = match self.topology[a] {
                    Topology::Periodic => l / 2.0,
                    Topology::Neumann => l,
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn fully_periodic(&self) -> bool {
        self.topology.iter().all(|&t| t == Topology::Periodic)
    }
}

/// One real value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: &GridSpec, c: f64) -> ScalarField {
        ScalarField { grid: grid.clone(), values: vec![c; grid.total_cells()] }
    }

    /// Sample a function of the cell-center position.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        let mut values = Vec::with_capacity(grid.total_cells());
        let mut pos = vec![0.0; grid.dim()];
        for idx in 0..grid.total_cells() {
            let c = grid.coords_of(idx);
            for a in 0..grid.dim() {
                pos[a] = grid.axis_coord(a, c[a]);
            }
            values.push(f(&pos));
        }
        ScalarField { grid: grid.clone(), values }
    }

    pub fn from_values(grid: &GridSpec, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.total_cells() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} cells",
                values.len(),
                grid.total_cells()
            )));
        }
        Ok(ScalarField { grid: grid.clone(), values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(index) => Err(Error::NonFinite { index }),
        }
    }

    /// Second-order 3/5/7-point Laplacian; periodic axes wrap, Neumann axes
    /// reflect.
    pub fn laplacian(&self) -> ScalarField {
        let mut out = vec![0.0; self.values.len()];
        self.laplacian_into(&mut out);
        ScalarField { grid: self.grid.clone(), values: out }
    }

    pub(crate) fn laplacian_into(&self, out: &mut [f64]) {
        stencil_pass(&self.grid, &self.values, out, StencilKind::Laplacian);
    }

    /// Laplacian of raw values on `grid`, written into `out`.
    pub(crate) fn laplacian_values(grid: &GridSpec, u: &[f64], out: &mut [f64]) {
        stencil_pass(grid, u, out, StencilKind::Laplacian);
    }

    /// Centered-difference gradient, squared and summed over axes. Same
    /// boundary treatment as [`ScalarField::laplacian`].
    pub fn grad_sq(&self) -> ScalarField {
        let mut out = vec![0.0; self.values.len()];
        stencil_pass(&self.grid, &self.values, &mut out, StencilKind::GradSq);
        ScalarField { grid: self.grid.clone(), values: out }
    }

    /// Midpoint quadrature: `sum(values) * cell_volume`.
    pub fn integrate(&self) -> f64 {
        let s: f64 = self.values.iter().sum();
        s * self.grid.cell_volume()
    }

    /// Quadrature restricted to cells whose centers lie in the (geodesic)
    /// ball of `radius` around `center`. Rejects non-positive radii.
    pub fn ball_sum(&self, center: &[f64], radius: f64) -> Result<f64> {
        ball_sum_values(&self.grid, &self.values, center, radius)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

pub(crate) fn ball_sum_values(
    grid: &GridSpec,
    values: &[f64],
    center: &[f64],
    radius: f64,
) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("ball radius {radius} must be > 0")));
    }
    let dim = grid.dim();
    let r2 = radius * radius;

    // Per-axis index windows around the center; on periodic axes indices wrap.
    let mut windows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(dim);
    for a in 0..dim {
        let h = grid.spacing()[a];
        let n = grid.cells()[a];
        let reach = (radius / h).ceil() as i64 + 1;
        let jc = (center[a] / h - 0.5).round() as i64;
        let mut w = Vec::new();
        match grid.topology()[a] {
            Topology::Periodic => {
                let reach = reach.min(n as i64 / 2);
                for off in -reach..=reach {
                    let j = (jc + off).rem_euclid(n as i64) as usize;
                    let d = grid.axis_delta(a, grid.axis_coord(a, j), center[a]);
                    w.push((j, d * d));
                }
                w.sort_unstable_by_key(|&(j, _)| j);
                w.dedup_by_key(|&mut (j, _)| j);
            }
            Topology::Neumann => {
                let lo = (jc - reach).max(0);
                let hi = (jc + reach).min(n as i64 - 1);
                for j in lo..=hi {
                    let d = grid.axis_coord(a, j as usize) - center[a];
                    w.push((j as usize, d * d));
                }
            }
        }
        windows.push(w);
    }

    let cells = grid.cells();
    let mut sum = 0.0;
    match dim {
        1 => {
            for &(i, d2) in &windows[0] {
                if d2 <= r2 {
                    sum += values[i];
                }
            }
        }
        2 => {
            let n1 = cells[1];
            for &(i, di2) in &windows[0] {
                if di2 > r2 {
                    continue;
                }
                let row = i * n1;
                for &(j, dj2) in &windows[1] {
                    if di2 + dj2 <= r2 {
                        sum += values[row + j];
                    }
                }
            }
        }
        _ => {
            let n1 = cells[1];
            let n2 = cells[2];
            for &(i, di2) in &windows[0] {
                if di2 > r2 {
                    continue;
                }
                for &(j, dj2) in &windows[1] {
                    let d2 = di2 + dj2;
                    if d2 > r2 {
                        continue;
                    }
                    let row = (i * n1 + j) * n2;
                    for &(k, dk2) in &windows[2] {
                        if d2 + dk2 <= r2 {
                            sum += values[row + k];
                        }
                    }
                }
            }
        }
    }
    Ok(sum * grid.cell_volume())
}

enum StencilKind {
    Laplacian,
    GradSq,
}

/// Neighbour pair (minus, plus) of index `i` on an axis of `n` cells.
/// Neumann reflection returns the cell itself past the wall.
#[inline]
fn neighbours(i: usize, n: usize, topo: Topology) -> (usize, usize) {
    match topo {
        Topology::Periodic => (if i == 0 { n - 1 } else { i - 1 }, if i + 1 == n { 0 } else { i + 1 }),
        Topology::Neumann => (i.saturating_sub(1), if i + 1 == n { i } else { i + 1 }),
    }
}

fn stencil_pass(grid: &GridSpec, u: &[f64], out: &mut [f64], kind: StencilKind) {
    let cells = grid.cells();
    let h = grid.spacing();
    let lap = matches!(kind, StencilKind::Laplacian);
    match grid.dim() {
        1 => {
            let n = cells[0];
            let t = grid.topology()[0];
            let c = if lap { 1.0 / (h[0] * h[0]) } else { 1.0 / (2.0 * h[0]) };
            for i in 0..n {
                let (im, ip) = neighbours(i, n, t);
                out[i] = if lap {
                    (u[ip] - 2.0 * u[i] + u[im]) * c
                } else {
                    let g = (u[ip] - u[im]) * c;
                    g * g
                };
            }
        }
        2 => {
            let (n0, n1) = (cells[0], cells[1]);
            let (t0, t1) = (grid.topology()[0], grid.topology()[1]);
            let c0 = if lap { 1.0 / (h[0] * h[0]) } else { 1.0 / (2.0 * h[0]) };
            let c1 = if lap { 1.0 / (h[1] * h[1]) } else { 1.0 / (2.0 * h[1]) };
            for i in 0..n0 {
                let (im, ip) = neighbours(i, n0, t0);
                let (row, rm, rp) = (i * n1, im * n1, ip * n1);
                for j in 0..n1 {
                    let (jm, jp) = neighbours(j, n1, t1);
                    out[row + j] = if lap {
                        (u[rp + j] - 2.0 * u[row + j] + u[rm + j]) * c0
                            + (u[row + jp] - 2.0 * u[row + j] + u[row + jm]) * c1
                    } else {
                        let g0 = (u[rp + j] - u[rm + j]) * c0;
                        let g1 = (u[row + jp] - u[row + jm]) * c1;
                        g0 * g0 + g1 * g1
                    };
                }
            }
        }
        _ => {
            let (n0, n1, n2) = (cells[0], cells[1], cells[2]);
            let (t0, t1, t2) = (grid.topology()[0], grid.topology()[1], grid.topology()[2]);
            let c0 = if lap { 1.0 / (h[0] * h[0]) } else { 1.0 / (2.0 * h[0]) };
            let c1 = if lap { 1.0 / (h[1] * h[1]) } else { 1.0 / (2.0 * h[1]) };
            let c2 = if lap { 1.0 / (h[2] * h[2]) } else { 1.0 / (2.0 * h[2]) };
            for i in 0..n0 {
                let (im, ip) = neighbours(i, n0, t0);
                for j in 0..n1 {
                    let (jm, jp) = neighbours(j, n1, t1);
                    let base = (i * n1 + j) * n2;
                    let bi_m = (im * n1 + j) * n2;
                    let bi_p = (ip * n1 + j) * n2;
                    let bj_m = (i * n1 + jm) * n2;
                    let bj_p = (i * n1 + jp) * n2;
                    for k in 0..n2 {
                        let (km, kp) = neighbours(k, n2, t2);
                        out[base + k] = if lap {
                            (u[bi_p + k] - 2.0 * u[base + k] + u[bi_m + k]) * c0
                                + (u[bj_p + k] - 2.0 * u[base + k] + u[bj_m + k]) * c1
                                + (u[base + kp] - 2.0 * u[base + k] + u[base + km]) * c2
                        } else {
                            let g0 = (u[bi_p + k] - u[bi_m + k]) * c0;
                            let g1 = (u[bj_p + k] - u[bj_m + k]) * c1;
                            let g2 = (u[base + kp] - u[base + km]) * c2;
                            g0 * g0 + g1 * g1 + g2 * g2
                        };
                    }
                }
            }
        }
    }
}

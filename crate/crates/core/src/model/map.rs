use crate::error::ModelError;

use super::StateVector;

/// Binary road grid (`true` = road) with a precomputed nearest-road-cell
/// field for constant-time distance queries.
#[derive(Debug, Clone)]
pub struct DigitalMap {
    origin: (f64, f64),
    cell_size: f64,
    nx: usize,
    ny: usize,
    road: Vec<bool>,
    nearest: Vec<u32>,
    pub lane_count: u32,
    pub lane_width: f64,
}

const NO_SITE: u32 = u32::MAX;

impl DigitalMap {
    /// `road` is row-major with `nx` columns (x) and `ny` rows (y).
    pub fn new(
        origin: (f64, f64),
        cell_size: f64,
        nx: usize,
        ny: usize,
        road: Vec<bool>,
    ) -> Result<Self, ModelError> {
        if !(cell_size > 0.0) {
            return Err(ModelError::InvalidMap("cell size must be > 0"));
        }
        if nx == 0 || ny == 0 || road.len() != nx * ny {
            return Err(ModelError::InvalidMap(
                "grid must be non-empty and nx*ny cells",
            ));
        }
        if road.len() >= NO_SITE as usize {
            return Err(ModelError::InvalidMap("grid too large"));
        }
        let mut map = Self {
            origin,
            cell_size,
            nx,
            ny,
            road,
            nearest: Vec::new(),
            lane_count: 0,
            lane_width: 3.5,
        };
        map.nearest = map.nearest_sites();
        Ok(map)
    }

    /// Builds a grid by evaluating `is_road` at every cell center.
    pub fn from_fn(
        origin: (f64, f64),
        cell_size: f64,
        nx: usize,
        ny: usize,
        is_road: impl Fn(f64, f64) -> bool,
    ) -> Result<Self, ModelError> {
        let mut road = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = origin.0 + (i as f64 + 0.5) * cell_size;
                let y = origin.1 + (j as f64 + 0.5) * cell_size;
                road.push(is_road(x, y));
            }
        }
        Self::new(origin, cell_size, nx, ny, road)
    }

    pub fn with_lanes(mut self, lane_count: u32, lane_width: f64) -> Self {
        self.lane_count = lane_count;
        self.lane_width = lane_width;
        self
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn has_road(&self) -> bool {
        self.road.iter().any(|&r| r)
    }

    pub fn is_road_cell(&self, i: usize, j: usize) -> bool {
        self.road[j * self.nx + i]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.cell_size,
            self.origin.1 + (j as f64 + 0.5) * self.cell_size,
        )
    }

    fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.origin.0) / self.cell_size).floor();
        let fj = ((y - self.origin.1) / self.cell_size).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            None
        } else {
            Some((fi as usize, fj as usize))
        }
    }

    // Exact squared Euclidean distance transform over cell centres (separable
    // lower-envelope passes), keeping the argmin site for every cell.
    fn nearest_sites(&self) -> Vec<u32> {
        let (nx, ny) = (self.nx, self.ny);
        let inf = f64::INFINITY;
        // column pass: nearest road row within each column
        let mut col_d = vec![inf; nx * ny];
        let mut col_row = vec![NO_SITE; nx * ny];
        let mut f = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                f[j] = if self.road[j * nx + i] { 0.0 } else { inf };
            }
            let (d, arg) = lower_envelope(&f);
            for j in 0..ny {
                col_d[j * nx + i] = d[j];
                col_row[j * nx + i] = arg[j];
            }
        }
        let mut site = vec![NO_SITE; nx * ny];
        let mut g = vec![0.0; nx];
        for j in 0..ny {
            g.copy_from_slice(&col_d[j * nx..(j + 1) * nx]);
            let (d, arg) = lower_envelope(&g);
            for i in 0..nx {
                if d[i].is_finite() {
                    let src_col = arg[i] as usize;
                    let src_row = col_row[j * nx + src_col] as usize;
                    site[j * nx + i] = (src_row * nx + src_col) as u32;
                }
            }
        }
        site
    }

    /// Distance (m) from `(x, y)` to the closest road cell: zero inside a road
    /// cell, otherwise centre distance less half a cell diagonal, floored at 0.
    pub fn distance(&self, x: f64, y: f64) -> Result<f64, ModelError> {
        if let Some((i, j)) = self.cell_of(x, y) {
            if self.is_road_cell(i, j) {
                return Ok(0.0);
            }
        }
        let mut best = f64::INFINITY;
        let mut consider = |i: usize, j: usize| {
            let s = self.nearest[j * self.nx + i];
            if s != NO_SITE {
                let (sx, sy) = self.cell_center(s as usize % self.nx, s as usize / self.nx);
                best = best.min((x - sx).hypot(y - sy));
            }
        };
        match self.cell_of(x, y) {
            Some((ci, cj)) => {
                for nj in cj.saturating_sub(1)..=(cj + 1).min(self.ny - 1) {
                    for ni in ci.saturating_sub(1)..=(ci + 1).min(self.nx - 1) {
                        consider(ni, nj);
                    }
                }
            }
            None => {
                // the closest site from outside is also closest to the point
                // where the connecting segment crosses the border
                for i in 0..self.nx {
                    consider(i, 0);
                    consider(i, self.ny - 1);
                }
                for j in 0..self.ny {
                    consider(0, j);
                    consider(self.nx - 1, j);
                }
            }
        }
        if !best.is_finite() {
            return Err(ModelError::NoRoadCells);
        }
        let half_diagonal = self.cell_size * std::f64::consts::SQRT_2 / 2.0;
        Ok((best - half_diagonal).max(0.0))
    }

    pub fn map_distance(&self, state: &StateVector) -> Result<f64, ModelError> {
        self.distance(state.x, state.y)
    }
}

/// 1-D distance transform `d[q] = min_p (q - p)^2 + f[p]` with argmin.
fn lower_envelope(f: &[f64]) -> (Vec<f64>, Vec<u32>) {
    let n = f.len();
    let mut d = vec![f64::INFINITY; n];
    let mut arg = vec![NO_SITE; n];
    let finite: Vec<usize> = (0..n).filter(|&p| f[p].is_finite()).collect();
    if finite.is_empty() {
        return (d, arg);
    }
    let mut v: Vec<usize> = Vec::with_capacity(finite.len());
    let mut z: Vec<f64> = Vec::with_capacity(finite.len() + 1);
    let inter = |p: usize, q: usize| {
        let (pf, qf) = (p as f64, q as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
    };
    for &q in &finite {
        while let Some(&last) = v.last() {
            let s = inter(last, q);
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                break;
            }
        }
        let s = v.last().map_or(f64::NEG_INFINITY, |&last| inter(last, q));
        v.push(q);
        z.push(s);
    }
    let mut k = 0;
    for q in 0..n {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
        arg[q] = p as u32;
    }
    (d, arg)
}

use crate::geometry::{ConductivityField, PhaseDomain, Point};
use crate::{Error, Result};

/// Uniform square grid of `cells × cells` cells centered on the origin.
///
/// Cell `(i, j)` has center `((i + ½)h − L, (j + ½)h − L)` and is stored at
/// index `j·cells + i`. The origin is the common corner of the four central
/// cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    cells: usize,
    spacing: f64,
}

impl GridSpec {
    /// Smallest grid with spacing `spacing` covering `[−L, L]²`. The effective
    /// half-extent is rounded up to a whole number of cells.
    pub fn new(half_extent: f64, spacing: f64) -> Result<Self> {
        if !(half_extent > 0.0 && spacing > 0.0) || !half_extent.is_finite() {
            return Err(Error::invalid("grid extent and spacing must be positive"));
        }
        let per_half = (half_extent / spacing - 1e-9).ceil();
        if per_half < 20.0 {
            return Err(Error::invalid(format!(
                "grid needs L/h ≥ 20, got {}",
                half_extent / spacing
            )));
        }
        GridSpec::from_cells(2 * per_half as usize, spacing)
    }

    /// Grid with an explicit cell count. Skips the resolution rule of
    /// [`GridSpec::new`]; meant for small oracle problems.
    pub fn from_cells(cells: usize, spacing: f64) -> Result<Self> {
        if cells < 2 || !(spacing > 0.0) {
            return Err(Error::invalid(
                "grid needs at least 2 cells per side and positive spacing",
            ));
        }
        Ok(GridSpec { cells, spacing })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells * self.cells
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_extent(&self) -> f64 {
        0.5 * self.cells as f64 * self.spacing
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells + i
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        let l = self.half_extent();
        let h = self.spacing;
        [(i as f64 + 0.5) * h - l, (j as f64 + 0.5) * h - l]
    }

    /// Bilinear interpolation of cell-centered values, clamped at the walls.
    /// At the origin this is the mean of the four adjacent cells.
    pub fn interpolate(&self, u: &[f64], x: Point) -> f64 {
        let n = self.cells;
        let h = self.spacing;
        let l = self.half_extent();
        let coord = |c: f64| {
            let s = ((c + l) / h - 0.5).clamp(0.0, (n - 1) as f64);
            let i = (s.floor() as usize).min(n.saturating_sub(2));
            (i, s - i as f64)
        };
        let (i, fx) = coord(x[0]);
        let (j, fy) = coord(x[1]);
        let v00 = u[self.index(i, j)];
        let v10 = u[self.index(i + 1, j)];
        let v01 = u[self.index(i, j + 1)];
        let v11 = u[self.index(i + 1, j + 1)];
        (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11)
    }
}

/// Face conductivities of a grid: harmonic means of the two adjacent cells.
///
/// `east[j·(n−1) + i]` couples cells `(i, j)` and `(i+1, j)`; `north[j·n + i]`
/// couples `(i, j)` and `(i, j+1)`. Walls carry no face (zero flux).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceConductivity {
    cells: usize,
    pub east: Vec<f64>,
    pub north: Vec<f64>,
    /// Sum of the face values around each cell.
    pub degree: Vec<f64>,
}

impl FaceConductivity {
    /// Builds faces from per-cell conductivities.
    pub fn from_cells(grid: &GridSpec, sigma: &[f64]) -> Self {
        let n = grid.cells();
        assert_eq!(sigma.len(), n * n);
        let harmonic = |a: f64, b: f64| 2.0 * a * b / (a + b);
        let mut east = Vec::with_capacity((n - 1) * n);
        for j in 0..n {
            let row = &sigma[j * n..(j + 1) * n];
            east.extend(row.windows(2).map(|w| harmonic(w[0], w[1])));
        }
        let mut north = Vec::with_capacity(n * (n - 1));
        for j in 0..n - 1 {
            let (lo, hi) = (&sigma[j * n..(j + 1) * n], &sigma[(j + 1) * n..(j + 2) * n]);
            north.extend(lo.iter().zip(hi).map(|(&a, &b)| harmonic(a, b)));
        }
        let mut degree = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n - 1 {
                let s = east[j * (n - 1) + i];
                degree[j * n + i] += s;
                degree[j * n + i + 1] += s;
            }
        }
        for j in 0..n - 1 {
            for i in 0..n {
                let s = north[j * n + i];
                degree[j * n + i] += s;
                degree[(j + 1) * n + i] += s;
            }
        }
        FaceConductivity {
            cells: n,
            east,
            north,
            degree,
        }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn max_degree(&self) -> f64 {
        self.degree.iter().copied().fold(0.0, f64::max)
    }

    /// `y = x + c·K x`, where `(K x)_i = Σ_faces σ_f (x_i − x_j)`.
    pub fn apply_shifted(&self, c: f64, x: &[f64], y: &mut [f64]) {
        let n = self.cells;
        let zeros = vec![0.0; n];
        for j in 0..n {
            let row = j * n;
            let xr = &x[row..row + n];
            // Missing neighbours along the walls get zero faces.
            let (xb, fb) = if j > 0 {
                (&x[row - n..row], &self.north[row - n..row])
            } else {
                (xr, &zeros[..])
            };
            let (xa, fa) = if j + 1 < n {
                (&x[row + n..row + 2 * n], &self.north[row..row + n])
            } else {
                (xr, &zeros[..])
            };
            let east = &self.east[j * (n - 1)..(j + 1) * (n - 1)];
            let deg = &self.degree[row..row + n];
            let yr = &mut y[row..row + n];
            let vertical = |i: usize| deg[i] * xr[i] - fb[i] * xb[i] - fa[i] * xa[i];
            yr[0] = xr[0] + c * (vertical(0) - east[0] * xr[1]);
            yr[n - 1] = xr[n - 1] + c * (vertical(n - 1) - east[n - 2] * xr[n - 2]);
            let interior = yr[1..n - 1]
                .iter_mut()
                .zip(xr.windows(3))
                .zip(east.windows(2))
                .zip(&deg[1..n - 1])
                .zip(fb[1..n - 1].iter().zip(&xb[1..n - 1]))
                .zip(fa[1..n - 1].iter().zip(&xa[1..n - 1]));
            for (((((yi, xw), ew), d), (fbi, xbi)), (fai, xai)) in interior {
                let k = d * xw[1] - ew[0] * xw[0] - ew[1] * xw[2] - fbi * xbi - fai * xai;
                *yi = xw[1] + c * k;
            }
        }
    }
}

/// Cell-centered finite-volume faces with harmonic-mean conductivity.
pub fn discretize(field: &ConductivityField, grid: &GridSpec) -> FaceConductivity {
    let n = grid.cells();
    let mut sigma = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            sigma.push(field.at(grid.center(i, j)));
        }
    }
    FaceConductivity::from_cells(grid, &sigma)
}

/// Indicator of `domain` sampled at cell centers.
pub fn init_state_values(domain: &PhaseDomain, grid: &GridSpec) -> Vec<f64> {
    let n = grid.cells();
    let mut u = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            u.push(if domain.contains(grid.center(i, j)) {
                1.0
            } else {
                0.0
            });
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConeDomain, CustomDomain};

    #[test]
    fn grid_layout() {
        let g = GridSpec::new(1.0, 0.05).unwrap();
        assert_eq!(g.cells(), 40);
        assert!((g.half_extent() - 1.0).abs() < 1e-12);
        let c = g.center(20, 19);
        assert!((c[0] - 0.025).abs() < 1e-12 && (c[1] + 0.025).abs() < 1e-12);
        assert!(GridSpec::new(1.0, 0.1).is_err());
        // Non-integral L/h rounds the extent up.
        let g = GridSpec::new(2.01, 0.1).unwrap();
        assert_eq!(g.cells(), 42);
    }

    #[test]
    fn interpolation_at_origin_is_corner_mean() {
        let g = GridSpec::from_cells(4, 1.0).unwrap();
        let u: Vec<f64> = (0..16).map(|k| k as f64).collect();
        let mean =
            (u[g.index(1, 1)] + u[g.index(2, 1)] + u[g.index(1, 2)] + u[g.index(2, 2)]) / 4.0;
        assert_eq!(g.interpolate(&u, [0.0, 0.0]), mean);
        assert_eq!(g.interpolate(&u, g.center(3, 0)), u[g.index(3, 0)]);
        assert_eq!(g.interpolate(&u, [100.0, -100.0]), u[g.index(3, 0)]);
    }

    #[test]
    fn constant_and_harmonic_faces() {
        let g = GridSpec::from_cells(6, 0.5).unwrap();
        let field =
            ConductivityField::constant(2.5, PhaseDomain::Custom(CustomDomain::All)).unwrap();
        let f = discretize(&field, &g);
        assert!(f.east.iter().chain(&f.north).all(|&s| s == 2.5));

        let two = FaceConductivity::from_cells(
            &GridSpec::from_cells(2, 1.0).unwrap(),
            &[1.0, 3.0, 1.0, 3.0],
        );
        assert_eq!(two.east, vec![1.5, 1.5]);
        assert_eq!(two.north, vec![1.0, 3.0]);
    }

    /// Brute-force enumeration of the faces of a two-phase cone on a 10×10 grid.
    #[test]
    fn cone_faces_by_enumeration() {
        let g = GridSpec::from_cells(10, 0.3).unwrap();
        let cone = ConeDomain::sector(0.0, std::f64::consts::FRAC_PI_4).unwrap();
        let field = ConductivityField::new(2.0, 1.0, PhaseDomain::Cone(cone.clone())).unwrap();
        let f = discretize(&field, &g);
        let mut crossing = 0;
        for j in 0..10 {
            for i in 0..10 {
                let a = cone.contains(g.center(i, j));
                let expect = |b: bool| match (a, b) {
                    (true, true) => 2.0,
                    (false, false) => 1.0,
                    _ => 4.0 / 3.0,
                };
                if i + 1 < 10 {
                    let b = cone.contains(g.center(i + 1, j));
                    crossing += usize::from(a != b);
                    assert_eq!(f.east[j * 9 + i], expect(b));
                }
                if j + 1 < 10 {
                    let b = cone.contains(g.center(i, j + 1));
                    crossing += usize::from(a != b);
                    assert_eq!(f.north[j * 10 + i], expect(b));
                }
            }
        }
        let mixed = f
            .east
            .iter()
            .chain(&f.north)
            .filter(|&&s| s == 4.0 / 3.0)
            .count();
        assert_eq!(mixed, crossing);
        assert!(crossing > 0);
    }

    #[test]
    fn initial_indicator() {
        let g = GridSpec::new(1.0, 0.05).unwrap();
        let all = init_state_values(&PhaseDomain::Custom(CustomDomain::All), &g);
        assert!(all.iter().all(|&v| v == 1.0));
        let none = init_state_values(&PhaseDomain::Custom(CustomDomain::Empty), &g);
        assert!(none.iter().all(|&v| v == 0.0));
        let half = init_state_values(
            &PhaseDomain::Custom(CustomDomain::HalfPlane {
                normal: crate::geometry::Direction::new(0.0),
            }),
            &g,
        );
        assert_eq!(half.iter().sum::<f64>() as usize, g.len() / 2);
    }

    #[test]
    fn shifted_operator_annihilates_constants() {
        let g = GridSpec::from_cells(7, 0.2).unwrap();
        let sigma: Vec<f64> = (0..49).map(|k| 1.0 + (k % 5) as f64).collect();
        let f = FaceConductivity::from_cells(&g, &sigma);
        let x = vec![0.3; 49];
        let mut y = vec![0.0; 49];
        f.apply_shifted(10.0, &x, &mut y);
        for v in y {
            assert!((v - 0.3).abs() < 1e-14);
        }
    }
}

//! Fate rasters over rectangular grids, basin-boundary extraction, and the
//! grid estimate of the bounded-orbit set.
//!
//! Cells are sampled at their centers and stored row-major, index j*nx + i
//! with j = 0 the bottom row. Rasterization is embarrassingly parallel and
//! collects into the same positions whatever the worker count, so outputs
//! are byte-identical across thread configurations.

use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::float17;
use crate::map::MapFamily;
use crate::orbit::{classify_forward, in_filled_julia, FateKind, JuliaMembership, OrbitBudget};
use crate::point::{pt, Point2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParams(format!("grid {nx}x{ny} has an empty axis")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::InvalidParams("grid bounds must be finite".into()));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidParams(format!(
                "grid bounds [{x_min}, {x_max}] x [{y_min}, {y_max}] are not increasing"
            )));
        }
        Ok(Self { nx, ny, x_min, x_max, y_min, y_max })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    /// Length of one cell diagonal, the natural resolution unit of the grid.
    pub fn diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        pt(
            self.x_min + (i as f64 + 0.5) * self.dx(),
            self.y_min + (j as f64 + 0.5) * self.dy(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct BasinRaster {
    pub grid: GridSpec,
    /// Row-major cell fates, j*nx + i.
    pub fates: Vec<FateKind>,
}

pub fn rasterize(map: &MapFamily, grid: &GridSpec, budget: &OrbitBudget) -> BasinRaster {
    let nx = grid.nx;
    let fates: Vec<FateKind> = (0..grid.len())
        .into_par_iter()
        .map(|k| classify_forward(map, grid.cell_center(k % nx, k / nx), budget).kind)
        .collect();
    BasinRaster { grid: *grid, fates }
}

impl BasinRaster {
    pub fn fate(&self, i: usize, j: usize) -> FateKind {
        self.fates[self.grid.index(i, j)]
    }

    fn neighbor_kinds(&self, i: usize, j: usize) -> impl Iterator<Item = FateKind> + '_ {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        [
            (i > 0).then(|| self.fate(i - 1, j)),
            (i + 1 < nx).then(|| self.fate(i + 1, j)),
            (j > 0).then(|| self.fate(i, j - 1)),
            (j + 1 < ny).then(|| self.fate(i, j + 1)),
        ]
        .into_iter()
        .flatten()
    }

    pub fn count(&self, kind: FateKind) -> usize {
        self.fates.iter().filter(|&&k| k == kind).count()
    }
}

/// Centers of basin cells that touch a decided cell of a different kind
/// through an edge: the grid's picture of the basin boundary. Scan order.
pub fn extract_boundary(raster: &BasinRaster) -> Vec<Point2> {
    boundary_cells(raster, |kinds| {
        kinds.iter().any(|&k| k != FateKind::ToAlpha && k != FateKind::Undecided)
    })
}

/// Basin cells whose only differing neighbors are undecided: places where
/// the budget, not the dynamics, limited the boundary.
pub fn undecided_fringe(raster: &BasinRaster) -> Vec<Point2> {
    boundary_cells(raster, |kinds| {
        kinds.contains(&FateKind::Undecided)
            && !kinds.iter().any(|&k| k != FateKind::ToAlpha && k != FateKind::Undecided)
    })
}

fn boundary_cells(raster: &BasinRaster, pick: impl Fn(&[FateKind]) -> bool) -> Vec<Point2> {
    let mut out = Vec::new();
    for j in 0..raster.grid.ny {
        for i in 0..raster.grid.nx {
            if raster.fate(i, j) != FateKind::ToAlpha {
                continue;
            }
            let kinds: Vec<FateKind> = raster.neighbor_kinds(i, j).collect();
            if pick(&kinds) {
                out.push(raster.grid.cell_center(i, j));
            }
        }
    }
    out
}

/// sup over `points` of the distance to the nearest of the `curves`.
/// Infinite when there are points but no curve to land on.
pub fn one_sided_hausdorff(points: &[Point2], curves: &[&crate::manifold::ManifoldCurve]) -> f64 {
    points
        .par_iter()
        .map(|&p| {
            curves
                .iter()
                .map(|c| c.distance_to(p))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(|| 0.0, f64::max)
        .reduce(|| 0.0, f64::max)
}

/// Membership of every cell center in the bounded-orbit set, row-major.
pub fn estimate_k(map: &MapFamily, grid: &GridSpec, budget: &OrbitBudget) -> Vec<JuliaMembership> {
    let nx = grid.nx;
    (0..grid.len())
        .into_par_iter()
        .map(|k| in_filled_julia(map, grid.cell_center(k % nx, k / nx), budget))
        .collect()
}

const COLOR_ALPHA: [u8; 3] = [0, 0, 255];
const COLOR_INFINITY: [u8; 3] = [255, 255, 255];
const COLOR_ORIGIN: [u8; 3] = [255, 0, 0];
const COLOR_UNDECIDED: [u8; 3] = [128, 128, 128];

pub fn fate_color(kind: FateKind) -> [u8; 3] {
    match kind {
        FateKind::ToAlpha => COLOR_ALPHA,
        FateKind::ToInfinity => COLOR_INFINITY,
        FateKind::ToOrigin => COLOR_ORIGIN,
        FateKind::Undecided => COLOR_UNDECIDED,
    }
}

/// Binary PPM, top row at y_max.
pub fn ppm_bytes(raster: &BasinRaster) -> Vec<u8> {
    let (nx, ny) = (raster.grid.nx, raster.grid.ny);
    let mut out = Vec::with_capacity(32 + 3 * nx * ny);
    write!(out, "P6\n{nx} {ny}\n255\n").unwrap();
    for j in (0..ny).rev() {
        for i in 0..nx {
            out.extend_from_slice(&fate_color(raster.fate(i, j)));
        }
    }
    out
}

pub fn write_ppm(raster: &BasinRaster, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, ppm_bytes(raster))
}

pub fn points_csv(points: &[Point2]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        out.push_str(&format!("{},{}\n", float17(p.x), float17(p.y)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{trace_manifold_with, Branch, ManifoldKind, TraceOptions};

    fn map() -> MapFamily {
        MapFamily::henon(0.1, 2.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0, 4, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 0.0, f64::NAN, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_single_column_grid() {
        let g = GridSpec::new(1, 2, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.cell_center(0, 0), pt(0.5, 0.25));
        assert_eq!(g.cell_center(0, 1), pt(0.5, 0.75));
        assert_eq!(g.index(0, 1), 1);
    }

    #[test]
    fn raster_separates_basin_from_escape() {
        let m = map();
        let g = GridSpec::new(60, 60, -1.0, 2.0, -0.5, 0.5).unwrap();
        let r = rasterize(&m, &g, &OrbitBudget::default_for(&m));
        assert!(r.count(FateKind::ToAlpha) > 0);
        assert!(r.count(FateKind::ToInfinity) > 0);
        assert!(r.count(FateKind::Undecided) < g.len() / 100);
        // The interior fixed point's cell converges, the far left escapes.
        let alpha = m.alpha().unwrap();
        let i = ((alpha.x - g.x_min) / g.dx()) as usize;
        let j = ((alpha.y - g.y_min) / g.dy()) as usize;
        assert_eq!(r.fate(i, j), FateKind::ToAlpha);
        assert_eq!(r.fate(0, 0), FateKind::ToInfinity);
    }

    #[test]
    fn boundary_hugs_the_two_strands() {
        let m = map();
        let g = GridSpec::new(60, 60, -1.0, 2.0, -0.5, 0.5).unwrap();
        let r = rasterize(&m, &g, &OrbitBudget::default_for(&m));
        let boundary = extract_boundary(&r);
        assert!(!boundary.is_empty());
        for p in &boundary {
            let near_left = p.x > -0.25 && p.x < 0.12;
            let near_right = p.x > 0.85 && p.x < 1.15;
            assert!(near_left || near_right, "stray boundary cell at {p:?}");
        }
    }

    #[test]
    fn boundary_cells_track_the_stable_manifold() {
        let m = map();
        let g = GridSpec::new(80, 80, -1.0, 2.0, -0.5, 0.5).unwrap();
        let r = rasterize(&m, &g, &OrbitBudget::default_for(&m));
        let boundary = extract_boundary(&r);
        let opts = TraceOptions { window: Some((-3.0, 4.0, -6.0, 3.0)), ring_cap: 64 };
        let plus =
            trace_manifold_with(&m, ManifoldKind::Stable, Branch::Plus, 16.0, 0.01, &opts).unwrap();
        let minus =
            trace_manifold_with(&m, ManifoldKind::Stable, Branch::Minus, 16.0, 0.01, &opts)
                .unwrap();
        let d = one_sided_hausdorff(&boundary, &[&plus.curve, &minus.curve]);
        assert!(d <= 2.0 * g.diagonal(), "hausdorff {d} vs diagonal {}", g.diagonal());
    }

    #[test]
    fn raster_is_identical_across_worker_counts() {
        let m = map();
        let g = GridSpec::new(40, 30, -1.0, 2.0, -0.5, 0.5).unwrap();
        let b = OrbitBudget::default_for(&m);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| rasterize(&m, &g, &b));
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| rasterize(&m, &g, &b));
        assert_eq!(single.fates, several.fates);
    }

    #[test]
    fn boundary_and_fringe_classification() {
        let g = GridSpec::new(2, 1, 0.0, 2.0, 0.0, 1.0).unwrap();
        let decided = BasinRaster { grid: g, fates: vec![FateKind::ToAlpha, FateKind::ToInfinity] };
        assert_eq!(extract_boundary(&decided), vec![g.cell_center(0, 0)]);
        assert!(undecided_fringe(&decided).is_empty());

        let fringe = BasinRaster { grid: g, fates: vec![FateKind::ToAlpha, FateKind::Undecided] };
        assert!(extract_boundary(&fringe).is_empty());
        assert_eq!(undecided_fringe(&fringe), vec![g.cell_center(0, 0)]);
    }

    #[test]
    fn hausdorff_of_empty_point_set_is_zero() {
        let m = map();
        let t = trace_manifold_with(
            &m,
            ManifoldKind::Unstable,
            Branch::Plus,
            0.01,
            0.001,
            &TraceOptions { window: None, ring_cap: 64 },
        )
        .unwrap();
        assert_eq!(one_sided_hausdorff(&[], &[&t.curve]), 0.0);
        assert!(one_sided_hausdorff(&[pt(0.0, 0.0)], &[]).is_infinite());
    }

    #[test]
    fn bounded_set_cells_at_the_fixed_points() {
        let m = map();
        let b = OrbitBudget::default_for(&m);
        let alpha = m.alpha().unwrap();
        let h = 1e-4;
        for center in [Point2::ORIGIN, alpha] {
            let g = GridSpec::new(
                3,
                3,
                center.x - 1.5 * h,
                center.x + 1.5 * h,
                center.y - 1.5 * h,
                center.y + 1.5 * h,
            )
            .unwrap();
            // Center cell lands exactly on the fixed point.
            assert_eq!(g.cell_center(1, 1), center);
            let members = estimate_k(&m, &g, &b);
            assert_eq!(members[g.index(1, 1)], JuliaMembership::Yes, "center {center:?}");
            for (k, m_) in members.iter().enumerate() {
                if k != g.index(1, 1) {
                    assert_ne!(*m_, JuliaMembership::Yes, "cell {k} near {center:?}");
                }
            }
        }
    }

    #[test]
    fn ppm_layout_and_colors() {
        let g = GridSpec::new(2, 2, 0.0, 1.0, 0.0, 1.0).unwrap();
        let r = BasinRaster {
            grid: g,
            fates: vec![
                FateKind::ToAlpha,     // (0,0) bottom left
                FateKind::ToInfinity,  // (1,0) bottom right
                FateKind::ToOrigin,    // (0,1) top left
                FateKind::Undecided,   // (1,1) top right
            ],
        };
        let bytes = ppm_bytes(&r);
        let header = b"P6\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 12);
        let body = &bytes[header.len()..];
        // Top row written first: cells (0,1), (1,1).
        assert_eq!(&body[0..3], &COLOR_ORIGIN);
        assert_eq!(&body[3..6], &COLOR_UNDECIDED);
        assert_eq!(&body[6..9], &COLOR_ALPHA);
        assert_eq!(&body[9..12], &COLOR_INFINITY);
    }

    #[test]
    fn csv_shape() {
        let csv = points_csv(&[pt(1.0, -2.0)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,y");
        assert_eq!(lines.next().unwrap(), "1.0000000000000000e0,-2.0000000000000000e0");
        assert!(lines.next().is_none());
    }
}

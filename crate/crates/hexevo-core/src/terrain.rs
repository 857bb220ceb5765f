//! Procedural obstacle course.
//!
//! The course is a piecewise-constant height field on a 0.02 m grid,
//! 8.2 m long and 3.0 m wide, bounded by one-cell side walls. Walking from
//! the start line the robot meets, in order: a 3 m stepping field, a square
//! beam, a 1.5 m stepping field, a twin pair of beams separated by a fixed
//! gap, and a 45 degree incline with step noise. Stepping fields are tiled
//! with 0.15 m square blocks whose heights are drawn uniformly from
//! [0, 0.076] m in a fixed raster order, so a seed pins the whole course.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::scalar;
use crate::rng::{stream_rng, STREAM_TERRAIN};

/// Grid cell size in meters.
pub const GRID_RESOLUTION: f64 = 0.02;
/// Side length of one stepping-field block in meters.
pub const STEP_BLOCK_SIZE: f64 = 0.15;
/// Maximum random block height in meters.
pub const STEP_HEIGHT_MAX: f64 = 0.076;
/// Cross-section side of the square beams in meters.
pub const BEAM_SIZE: f64 = 0.114;
/// Walking gap between the twin beams in meters.
pub const TWIN_BEAM_GAP: f64 = 0.35;

/// Geometry of the standard course; distances are along-track meters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CourseLayout {
    pub length: f64,
    pub width: f64,
    pub resolution: f64,
    /// First stepping field `[start, end)`.
    pub steps1: (f64, f64),
    /// Leading edge of the single beam.
    pub beam1: f64,
    /// Second stepping field `[start, end)`.
    pub steps2: (f64, f64),
    /// Leading edges of the twin beams.
    pub beam2a: f64,
    pub beam2b: f64,
    /// Foot of the incline.
    pub incline_start: f64,
    /// Incline rise per meter of run (1.0 is 45 degrees).
    pub incline_grade: f64,
    pub beam_size: f64,
    pub step_block: f64,
    pub step_height_max: f64,
}

impl CourseLayout {
    /// The standard competition course.
    pub fn standard() -> CourseLayout {
        let beam2a = 4.75;
        CourseLayout {
            length: 8.2,
            width: 3.0,
            resolution: GRID_RESOLUTION,
            steps1: (0.0, 3.0),
            beam1: 3.0,
            steps2: (3.0 + BEAM_SIZE, 3.0 + BEAM_SIZE + 1.5),
            beam2a,
            beam2b: beam2a + BEAM_SIZE + TWIN_BEAM_GAP,
            incline_start: 5.7,
            incline_grade: 1.0,
            beam_size: BEAM_SIZE,
            step_block: STEP_BLOCK_SIZE,
            step_height_max: STEP_HEIGHT_MAX,
        }
    }

    /// Same footprint as the standard course but completely flat: zero step
    /// heights, obstacles pushed past the far end, no incline.
    pub fn flat() -> CourseLayout {
        let standard = CourseLayout::standard();
        let off = standard.length;
        CourseLayout {
            steps1: (0.0, off),
            beam1: off,
            steps2: (off, off),
            beam2a: off,
            beam2b: off,
            incline_start: off,
            step_height_max: 0.0,
            ..standard
        }
    }

    /// Check the layout is rasterizable: positive dimensions and no overlap
    /// between obstacles that actually lie on the course.
    pub fn validate(&self) -> Result<(), LayoutError> {
        if !(self.length > 0.0) || !(self.width > 0.0) || !(self.resolution > 0.0) {
            return Err(LayoutError::NonPositiveFootprint);
        }
        if !(self.beam_size > 0.0) || !(self.step_block > 0.0) {
            return Err(LayoutError::NonPositiveObstacle);
        }
        if self.step_height_max < 0.0 || self.incline_grade < 0.0 {
            return Err(LayoutError::NegativeHeight);
        }
        if self.steps1.0 > self.steps1.1 || self.steps2.0 > self.steps2.1 {
            return Err(LayoutError::InvertedStepRange);
        }
        // Obstacles at or past `length` are absent; active ones must not
        // overlap each other or a stepping field.
        let beams: Vec<(f64, f64)> = [self.beam1, self.beam2a, self.beam2b]
            .iter()
            .filter(|&&b| b < self.length)
            .map(|&b| (b, b + self.beam_size))
            .collect();
        let overlaps = |a: (f64, f64), b: (f64, f64)| a.0 < b.1 && b.0 < a.1;
        for (k, &a) in beams.iter().enumerate() {
            for &b in &beams[k + 1..] {
                if overlaps(a, b) {
                    return Err(LayoutError::OverlappingObstacles);
                }
            }
            if overlaps(a, self.steps1) || overlaps(a, self.steps2) {
                return Err(LayoutError::OverlappingObstacles);
            }
        }
        Ok(())
    }
}

/// Why a course layout cannot be rasterized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutError {
    NonPositiveFootprint,
    NonPositiveObstacle,
    NegativeHeight,
    InvertedStepRange,
    OverlappingObstacles,
}

impl core::fmt::Display for LayoutError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            LayoutError::NonPositiveFootprint => "course length, width and resolution must be positive",
            LayoutError::NonPositiveObstacle => "beam and step-block sizes must be positive",
            LayoutError::NegativeHeight => "step height and incline grade must be nonnegative",
            LayoutError::InvertedStepRange => "stepping-field ranges must have start <= end",
            LayoutError::OverlappingObstacles => "beams overlap each other or a stepping field",
        };
        f.write_str(msg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LayoutError {}

/// Piecewise-constant terrain sampled at cell centers, plus a wall mask.
///
/// Heights describe the walkable terrain only; boundary walls are carried
/// separately so queries can tell "tall ground" from "off the course".
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    resolution: f64,
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    heights: Vec<f64>,
    wall: Vec<bool>,
}

/// What lies under a queried point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerrainSample {
    /// Walkable ground at the given height.
    Ground(f64),
    /// A boundary wall cell, or a lateral point beyond the course width.
    Wall,
    /// Before the start line or past the far end of the course.
    BeyondEnd,
}

/// Read access to a terrain model.
pub trait HeightQuery {
    /// Classify the point: ground (with height), wall, or beyond an end.
    fn sample(&self, x: f64, y: f64) -> TerrainSample;
    /// Terrain height under `(x, y)` in meters; never includes walls.
    /// Queries outside the grid clamp to the nearest cell.
    fn height_at(&self, x: f64, y: f64) -> f64;
    /// True when `(x, y)` lies in a boundary wall or beyond the course edge.
    fn is_wall(&self, x: f64, y: f64) -> bool;
    /// Highest non-wall cell overlapping the rectangle; 0.0 if none does.
    fn max_height_in(&self, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> f64;
}

impl HeightField {
    /// Assemble a field from raw parts (used by course file loaders).
    pub fn from_parts(
        resolution: f64,
        x0: f64,
        y0: f64,
        nx: usize,
        ny: usize,
        heights: Vec<f64>,
        wall: Vec<bool>,
    ) -> HeightField {
        assert_eq!(heights.len(), nx * ny, "height grid size mismatch");
        assert_eq!(wall.len(), nx * ny, "wall grid size mismatch");
        HeightField { resolution, nx, ny, x0, y0, heights, wall }
    }

    /// Flat ground of the given extent with the usual boundary walls.
    pub fn flat(length: f64, width: f64) -> HeightField {
        let nx = scalar::round(length / GRID_RESOLUTION) as usize;
        let ny = scalar::round(width / GRID_RESOLUTION) as usize;
        let mut field = HeightField {
            resolution: GRID_RESOLUTION,
            nx,
            ny,
            x0: 0.0,
            y0: -width / 2.0,
            heights: vec![0.0; nx * ny],
            wall: vec![false; nx * ny],
        };
        field.mark_boundary_walls();
        field
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Lower-left corner of cell (0, 0).
    pub fn origin(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }

    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    pub fn wall_cell(&self, i: usize, j: usize) -> bool {
        self.wall[j * self.nx + i]
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    fn mark_boundary_walls(&mut self) {
        for i in 0..self.nx {
            self.wall[i] = true;
            self.wall[(self.ny - 1) * self.nx + i] = true;
        }
    }

    fn clamp_index(&self, x: f64, y: f64) -> (usize, usize) {
        let fi = scalar::floor((x - self.x0) / self.resolution);
        let fj = scalar::floor((y - self.y0) / self.resolution);
        let i = (fi.max(0.0) as usize).min(self.nx - 1);
        let j = (fj.max(0.0) as usize).min(self.ny - 1);
        (i, j)
    }
}

impl HeightQuery for HeightField {
    fn sample(&self, x: f64, y: f64) -> TerrainSample {
        if x < self.x0 || x >= self.x0 + self.nx as f64 * self.resolution {
            return TerrainSample::BeyondEnd;
        }
        if self.is_wall(x, y) {
            return TerrainSample::Wall;
        }
        TerrainSample::Ground(self.height_at(x, y))
    }

    fn height_at(&self, x: f64, y: f64) -> f64 {
        let (i, j) = self.clamp_index(x, y);
        self.cell(i, j)
    }

    fn is_wall(&self, x: f64, y: f64) -> bool {
        if y < self.y0 || y >= self.y0 + self.ny as f64 * self.resolution {
            return true;
        }
        let (i, j) = self.clamp_index(x, y);
        self.wall_cell(i, j)
    }

    fn max_height_in(&self, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> f64 {
        let (i0, j0) = self.clamp_index(x_min, y_min);
        let (i1, j1) = self.clamp_index(x_max, y_max);
        let mut max = 0.0f64;
        for j in j0..=j1 {
            for i in i0..=i1 {
                if !self.wall_cell(i, j) {
                    max = max.max(self.cell(i, j));
                }
            }
        }
        max
    }
}

/// Heights for one stepping field's block grid, drawn row by row (near-left
/// corner first) so the generator's draw order is part of the format.
struct BlockGrid {
    x_start: f64,
    y_start: f64,
    ncols: usize,
    nrows: usize,
    heights: Vec<f64>,
}

impl BlockGrid {
    fn draw(rng: &mut impl Rng, x_range: (f64, f64), y_start: f64, width: f64, h_max: f64) -> Self {
        let ncols = scalar::ceil((x_range.1 - x_range.0) / STEP_BLOCK_SIZE - 1e-9) as usize;
        let nrows = scalar::ceil(width / STEP_BLOCK_SIZE - 1e-9) as usize;
        let mut heights = Vec::with_capacity(ncols * nrows);
        for _row in 0..nrows {
            for _col in 0..ncols {
                heights.push(rng.gen::<f64>() * h_max);
            }
        }
        BlockGrid { x_start: x_range.0, y_start, ncols, nrows, heights }
    }

    fn height_at(&self, x: f64, y: f64) -> f64 {
        let col = (scalar::floor((x - self.x_start) / STEP_BLOCK_SIZE).max(0.0) as usize)
            .min(self.ncols - 1);
        let row = (scalar::floor((y - self.y_start) / STEP_BLOCK_SIZE).max(0.0) as usize)
            .min(self.nrows - 1);
        self.heights[row * self.ncols + col]
    }
}

/// Build the standard course for a master seed (terrain has its own
/// RNG stream, so the same seed always yields the same course).
pub fn generate_course(master_seed: u64) -> HeightField {
    build_course(&CourseLayout::standard(), &mut stream_rng(master_seed, STREAM_TERRAIN))
}

/// Rasterize `layout` onto the grid, drawing block noise from `rng`.
///
/// Draw order is fixed: first stepping field, second stepping field, then
/// incline noise; each row by row. Cells take the profile value at their
/// center, so beam edges land on the nearest grid line.
pub fn build_course(layout: &CourseLayout, rng: &mut impl Rng) -> HeightField {
    let nx = scalar::round(layout.length / layout.resolution) as usize;
    let ny = scalar::round(layout.width / layout.resolution) as usize;
    let y0 = -layout.width / 2.0;

    let steps1 = BlockGrid::draw(rng, layout.steps1, y0, layout.width, layout.step_height_max);
    let steps2 = BlockGrid::draw(rng, layout.steps2, y0, layout.width, layout.step_height_max);
    let incline_noise = BlockGrid::draw(
        rng,
        (layout.incline_start, layout.length),
        y0,
        layout.width,
        layout.step_height_max,
    );

    let in_beam = |x: f64| {
        [layout.beam1, layout.beam2a, layout.beam2b]
            .iter()
            .any(|&bx| x >= bx && x < bx + layout.beam_size)
    };

    let mut heights = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = y0 + (j as f64 + 0.5) * layout.resolution;
        for i in 0..nx {
            let x = (i as f64 + 0.5) * layout.resolution;
            let h = if in_beam(x) {
                BEAM_SIZE
            } else if x >= layout.steps1.0 && x < layout.steps1.1 {
                steps1.height_at(x, y)
            } else if x >= layout.steps2.0 && x < layout.steps2.1 {
                steps2.height_at(x, y)
            } else if x >= layout.incline_start {
                (x - layout.incline_start) * layout.incline_grade + incline_noise.height_at(x, y)
            } else {
                0.0
            };
            heights.push(h);
        }
    }

    let mut field = HeightField {
        resolution: layout.resolution,
        nx,
        ny,
        x0: 0.0,
        y0,
        heights,
        wall: vec![false; nx * ny],
    };
    field.mark_boundary_walls();
    field
}

//! Structured simplicial meshes of intervals and rectangles.

use crate::error::{MhdError, Result};

pub const MARKER_LEFT: usize = 1;
pub const MARKER_RIGHT: usize = 2;
pub const MARKER_BOTTOM: usize = 3;
pub const MARKER_TOP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrianglePattern {
    /// Each square split along the diagonal from lower-left to upper-right.
    Right,
    /// Each square split into four triangles through its center.
    Crossed,
}

impl TrianglePattern {
    pub fn name(&self) -> &'static str {
        match self {
            TrianglePattern::Right => "right",
            TrianglePattern::Crossed => "crossed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(TrianglePattern::Right),
            "crossed" => Ok(TrianglePattern::Crossed),
            other => Err(MhdError::Config(format!("unknown triangulation pattern '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 2]>,
    /// Vertex indices per cell: two for intervals, three (counterclockwise) for triangles.
    pub cells: Vec<Vec<usize>>,
    /// Boundary facets as vertex lists with their side marker.
    pub boundary_facets: Vec<(Vec<usize>, usize)>,
    /// `[[x_min, x_max], [y_min, y_max]]`; the y range is `[0, 0]` in 1D.
    pub bounds: [[f64; 2]; 2],
}

pub fn build_interval_mesh(n_cells: usize, x_min: f64, x_max: f64) -> Result<Mesh> {
    if n_cells == 0 {
        return Err(MhdError::InvalidDomain("need at least one cell".into()));
    }
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(MhdError::InvalidDomain(format!("empty interval [{x_min}, {x_max}]")));
    }
    let dx = (x_max - x_min) / n_cells as f64;
    let mut vertices: Vec<[f64; 2]> = (0..=n_cells).map(|i| [x_min + i as f64 * dx, 0.0]).collect();
    vertices[n_cells][0] = x_max;
    let cells = (0..n_cells).map(|i| vec![i, i + 1]).collect();
    Ok(Mesh {
        dim: 1,
        vertices,
        cells,
        boundary_facets: vec![(vec![0], MARKER_LEFT), (vec![n_cells], MARKER_RIGHT)],
        bounds: [[x_min, x_max], [0.0, 0.0]],
    })
}

pub fn build_triangulated_rectangle(
    nx: usize,
    ny: usize,
    bounds: [[f64; 2]; 2],
    pattern: TrianglePattern,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(MhdError::InvalidDomain("need at least one cell per direction".into()));
    }
    let [[x0, x1], [y0, y1]] = bounds;
    if !(x1 > x0) || !(y1 > y0) {
        return Err(MhdError::InvalidDomain(format!("degenerate rectangle {bounds:?}")));
    }
    let dx = (x1 - x0) / nx as f64;
    let dy = (y1 - y0) / ny as f64;
    let coord = |i: usize, n: usize, lo: f64, hi: f64, d: f64| if i == n { hi } else { lo + i as f64 * d };
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([coord(i, nx, x0, x1, dx), coord(j, ny, y0, y1, dy)]);
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            match pattern {
                TrianglePattern::Right => {
                    cells.push(vec![a, b, c]);
                    cells.push(vec![a, c, d]);
                }
                TrianglePattern::Crossed => {
                    let m = vertices.len();
                    vertices.push([x0 + (i as f64 + 0.5) * dx, y0 + (j as f64 + 0.5) * dy]);
                    cells.push(vec![a, b, m]);
                    cells.push(vec![b, c, m]);
                    cells.push(vec![c, d, m]);
                    cells.push(vec![d, a, m]);
                }
            }
        }
    }
    let mut boundary_facets = Vec::new();
    for i in 0..nx {
        boundary_facets.push((vec![vid(i, 0), vid(i + 1, 0)], MARKER_BOTTOM));
        boundary_facets.push((vec![vid(i, ny), vid(i + 1, ny)], MARKER_TOP));
    }
    for j in 0..ny {
        boundary_facets.push((vec![vid(0, j), vid(0, j + 1)], MARKER_LEFT));
        boundary_facets.push((vec![vid(nx, j), vid(nx, j + 1)], MARKER_RIGHT));
    }
    Ok(Mesh { dim: 2, vertices, cells, boundary_facets, bounds })
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_vertices(&self, c: usize) -> Vec<[f64; 2]> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Signed measure (length or area) of a cell.
    pub fn cell_measure(&self, c: usize) -> f64 {
        let v = self.cell_vertices(c);
        if self.dim == 1 {
            v[1][0] - v[0][0]
        } else {
            0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
        }
    }

    /// Circumradius: half the length of an interval, `abc / (4 area)` for a triangle.
    pub fn circumradius(&self, c: usize) -> f64 {
        let v = self.cell_vertices(c);
        if self.dim == 1 {
            0.5 * (v[1][0] - v[0][0]).abs()
        } else {
            let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            d(v[0], v[1]) * d(v[1], v[2]) * d(v[2], v[0]) / (4.0 * self.cell_measure(c).abs())
        }
    }

    pub fn domain_measure(&self) -> f64 {
        let [[x0, x1], [y0, y1]] = self.bounds;
        if self.dim == 1 {
            x1 - x0
        } else {
            (x1 - x0) * (y1 - y0)
        }
    }
}

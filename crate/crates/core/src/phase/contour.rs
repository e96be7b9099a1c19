//! Zero set of `F'[0]` in the `(sigma_a, sigma_m)` plane by marching squares.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linspace;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{find_root, Bracket, QuadratureSpec};
use crate::selfconsistency::slope_at_zero;

/// Smallest accepted number of grid lines per axis.
pub const MIN_RESOLUTION: usize = 32;
/// Contour points are refined until `|F'[0]|` is below this.
pub const REFINE_TOL: f64 = 1e-5;
const EDGE_TOL: f64 = 1e-10;

/// Rectangular window and resolution of a contour trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub sigma_a: (f64, f64),
    pub sigma_m: (f64, f64),
    /// Grid lines along `sigma_a`.
    pub n_a: usize,
    /// Grid lines along `sigma_m`.
    pub n_m: usize,
}

impl ContourGrid {
    pub fn new(sigma_a: (f64, f64), sigma_m: (f64, f64), n_a: usize, n_m: usize) -> Result<Self> {
        let g = Self {
            sigma_a,
            sigma_m,
            n_a,
            n_m,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let (a0, a1) = self.sigma_a;
        let (m0, m1) = self.sigma_m;
        if !(a0 > 0.0 && a0 < a1 && a1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_a range must satisfy 0 < lo < hi, got {a0}..{a1}"
            )));
        }
        if !(m0 >= 0.0 && m0 < m1 && m1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_m range must satisfy 0 <= lo < hi, got {m0}..{m1}"
            )));
        }
        if self.n_a < MIN_RESOLUTION || self.n_m < MIN_RESOLUTION {
            return Err(Error::InvalidParameter(format!(
                "contour resolution must be at least {MIN_RESOLUTION}x{MIN_RESOLUTION}, got {}x{}",
                self.n_a, self.n_m
            )));
        }
        Ok(())
    }

    fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        (
            linspace(self.sigma_a.0, self.sigma_a.1, self.n_a),
            linspace(self.sigma_m.0, self.sigma_m.1, self.n_m),
        )
    }
}

/// Polyline approximation of `{F'[0] = 0}` at fixed `nu`, `a`, `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseContour {
    pub nu: f64,
    pub a: f64,
    pub theta: f64,
    pub grid: ContourGrid,
    /// Connected pieces, each a list of `(sigma_a, sigma_m)`. Pieces touching
    /// the lower `sigma_m` edge come first and start there.
    pub polylines: Vec<Vec<(f64, f64)>>,
    /// Every point satisfies `|F'[0]| < 1e-5`.
    pub refined: bool,
}

impl PhaseContour {
    /// All points, piece after piece.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.polylines.iter().flatten().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(|p| p.is_empty())
    }

    /// Largest `sigma_a` on the contour.
    pub fn peak_sigma_a(&self) -> Option<f64> {
        self.polylines
            .iter()
            .flatten()
            .map(|p| p.0)
            .reduce(f64::max)
    }

    /// `sigma_a` where the contour meets the lower `sigma_m` edge, if it does.
    pub fn axis_crossing(&self) -> Option<f64> {
        let m0 = self.grid.sigma_m.0;
        self.polylines
            .iter()
            .flatten()
            .find(|p| p.1 == m0)
            .map(|p| p.0)
    }
}

/// Cell edge: `H(i, j)` joins nodes `(i, j)`-`(i+1, j)`, `V(i, j)` joins `(i, j)`-`(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Contour at `a = theta = 1`.
pub fn trace_contour(nu: f64, grid: &ContourGrid, spec: &QuadratureSpec) -> Result<PhaseContour> {
    trace_contour_with(nu, 1.0, 1.0, grid, spec)
}

/// Samples `F'[0]` on the grid, extracts sign-change cells, refines the
/// crossing on every cut edge with Brent's method and chains the cell
/// segments into polylines. Saddle cells are resolved by the centre value.
pub fn trace_contour_with(
    nu: f64,
    a: f64,
    theta: f64,
    grid: &ContourGrid,
    spec: &QuadratureSpec,
) -> Result<PhaseContour> {
    grid.validate()?;
    let base = ModelParams::new(nu, grid.sigma_a.0, grid.sigma_m.0, a, theta)?;
    let slope = |sa: f64, sm: f64| slope_at_zero(&base.with_sigma_a(sa).with_sigma_m(sm), spec);
    let (sa, sm) = grid.axes();
    let (na, nm) = (grid.n_a, grid.n_m);

    let values: Vec<f64> = (0..na * nm)
        .into_par_iter()
        .map(|k| slope(sa[k % na], sm[k / na]))
        .collect::<Result<_>>()?;
    let v = |i: usize, j: usize| values[j * na + i];
    let pos = |i: usize, j: usize| v(i, j) > 0.0;

    // Segments per cell, as pairs of cut edges.
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    let mut saddles = Vec::new();
    for j in 0..nm - 1 {
        for i in 0..na - 1 {
            let bottom = pos(i, j) != pos(i + 1, j);
            let top = pos(i, j + 1) != pos(i + 1, j + 1);
            let left = pos(i, j) != pos(i, j + 1);
            let right = pos(i + 1, j) != pos(i + 1, j + 1);
            let cut: Vec<Edge> = [
                (bottom, Edge::H(i, j)),
                (right, Edge::V(i + 1, j)),
                (top, Edge::H(i, j + 1)),
                (left, Edge::V(i, j)),
            ]
            .into_iter()
            .filter_map(|(c, e)| c.then_some(e))
            .collect();
            match cut.len() {
                0 => {}
                2 => segments.push((cut[0], cut[1])),
                _ => saddles.push((i, j)),
            }
        }
    }
    let centres: Vec<bool> = saddles
        .par_iter()
        .map(|&(i, j)| Ok(slope(0.5 * (sa[i] + sa[i + 1]), 0.5 * (sm[j] + sm[j + 1]))? > 0.0))
        .collect::<Result<_>>()?;
    for (&(i, j), centre_pos) in saddles.iter().zip(centres) {
        let (b, r, t, l) = (
            Edge::H(i, j),
            Edge::V(i + 1, j),
            Edge::H(i, j + 1),
            Edge::V(i, j),
        );
        if centre_pos == pos(i, j) {
            // Bottom-left and top-right corners are joined through the centre.
            segments.push((b, r));
            segments.push((t, l));
        } else {
            segments.push((b, l));
            segments.push((r, t));
        }
    }

    // Refine every cut edge once.
    let mut edges: Vec<Edge> = segments.iter().flat_map(|(x, y)| [*x, *y]).collect();
    edges.sort_by_key(|e| match *e {
        Edge::H(i, j) => (0, j, i),
        Edge::V(i, j) => (1, j, i),
    });
    edges.dedup();
    let refined_points: Vec<((f64, f64), bool)> = edges
        .par_iter()
        .map(|e| {
            let (lo, hi, f_lo, f_hi) = match *e {
                Edge::H(i, j) => (sa[i], sa[i + 1], v(i, j), v(i + 1, j)),
                Edge::V(i, j) => (sm[j], sm[j + 1], v(i, j), v(i, j + 1)),
            };
            let point = |x: f64| match *e {
                Edge::H(_, j) => (x, sm[j]),
                Edge::V(i, _) => (sa[i], x),
            };
            let g = |x: f64| {
                let (a, m) = point(x);
                slope(a, m).unwrap_or(f64::NAN)
            };
            let x = find_root(g, Bracket::new(lo, hi, f_lo, f_hi)?, EDGE_TOL)?;
            let (pa, pm) = point(x);
            let ok = slope(pa, pm)?.abs() < REFINE_TOL;
            Ok(((pa, pm), ok))
        })
        .collect::<Result<_>>()?;
    let refined = refined_points.iter().all(|(_, ok)| *ok);
    let location: HashMap<Edge, (f64, f64)> = edges
        .iter()
        .copied()
        .zip(refined_points.iter().map(|(p, _)| *p))
        .collect();

    let polylines = chain(&segments, nm)
        .into_iter()
        .map(|line| line.into_iter().map(|e| location[&e]).collect())
        .collect();

    Ok(PhaseContour {
        nu,
        a,
        theta,
        grid: *grid,
        polylines,
        refined,
    })
}

/// Joins cell segments sharing an edge into maximal chains. Open chains are
/// listed before closed ones; open chains touching the bottom row start there.
fn chain(segments: &[(Edge, Edge)], nm: usize) -> Vec<Vec<Edge>> {
    let mut adjacency: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (x, y)) in segments.iter().enumerate() {
        adjacency.entry(*x).or_default().push(k);
        adjacency.entry(*y).or_default().push(k);
    }
    let on_bottom = |e: &Edge| matches!(e, Edge::H(_, 0));
    let on_boundary = |e: &Edge| adjacency[e].len() == 1;
    let mut used = vec![false; segments.len()];

    let walk = |start: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut line = vec![start];
        let mut at = start;
        while let Some(&k) = adjacency[&at].iter().find(|&&k| !used[k]) {
            used[k] = true;
            let (x, y) = segments[k];
            at = if x == at { y } else { x };
            line.push(at);
        }
        line
    };

    // Deterministic start order: bottom edge by sigma_a, then other boundary edges.
    let mut starts: Vec<Edge> = adjacency
        .keys()
        .copied()
        .filter(|e| on_boundary(e))
        .collect();
    starts.sort_by_key(|e| {
        let bottom = on_bottom(e);
        match *e {
            Edge::H(i, j) => (!bottom, 0, j, i),
            Edge::V(i, j) => (true, 1, i, j.min(nm)),
        }
    });
    let mut lines = Vec::new();
    for s in starts {
        if adjacency[&s].iter().all(|&k| used[k]) {
            continue;
        }
        lines.push(walk(s, &mut used));
    }
    // Closed loops.
    for k in 0..segments.len() {
        if !used[k] {
            let start = segments[k].0;
            lines.push(walk(start, &mut used));
        }
    }
    lines
}

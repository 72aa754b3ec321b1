//! Structured meshes of the unit interval and unit square with a split of the
//! boundary into a Dirichlet part Γ₀ and a conormal part Γ₁.
//!
//! The square is divided into `n × n` cells, each cut into two triangles along
//! the `(i,j)–(i+1,j+1)` diagonal. Nodes are numbered row-major, `j * (n+1) + i`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A side of the unit interval (`Left`, `Right`) or unit square (all four).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn sides_for(dimension: usize) -> &'static [Side] {
        if dimension == 1 {
            &Self::ALL[..2]
        } else {
            &Self::ALL[..]
        }
    }

    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }

    /// Distance of `p` from the line carrying this side.
    pub fn distance(self, p: [f64; 2]) -> f64 {
        match self {
            Side::Left => p[0],
            Side::Right => 1.0 - p[0],
            Side::Bottom => p[1],
            Side::Top => 1.0 - p[1],
        }
    }

    /// Coordinate along the side, in `[0, 1]`.
    pub fn tangential(self, p: [f64; 2]) -> f64 {
        match self {
            Side::Left | Side::Right => p[1],
            Side::Bottom | Side::Top => p[0],
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Bottom => Side::Top,
            Side::Top => Side::Bottom,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "bottom" => Ok(Side::Bottom),
            "top" => Ok(Side::Top),
            other => Err(format!("unknown boundary side '{other}'")),
        }
    }
}

/// Per-element geometric data for piecewise-linear elements.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub volume: f64,
    pub centroid: [f64; 2],
    /// Gradient of each local nodal basis function (constant on the element).
    pub basis_gradients: Vec<[f64; 2]>,
}

impl ElementGeometry {
    /// Gradient of the piecewise-linear interpolant with local nodal `values`.
    pub fn gradient(&self, values: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (gi, v) in self.basis_gradients.iter().zip(values) {
            g[0] += gi[0] * v;
            g[1] += gi[1] * v;
        }
        g
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryFacet {
    pub nodes: Vec<usize>,
    pub side: Side,
    pub normal: [f64; 2],
    pub dirichlet: bool,
}

#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    dimension: usize,
    resolution: usize,
    node_coords: Vec<[f64; 2]>,
    nodes_per_element: usize,
    connectivity: Vec<usize>,
    geometry: Vec<ElementGeometry>,
    gamma0_sides: BTreeSet<Side>,
    gamma0_nodes: Vec<usize>,
    gamma1_nodes: Vec<usize>,
    is_gamma0: Vec<bool>,
    boundary_facets: Vec<BoundaryFacet>,
    h_values: Vec<f64>,
}

/// Builds the structured mesh with the Dirichlet part given by `gamma0_spec`;
/// all remaining boundary becomes Γ₁. Corner nodes shared by a Γ₀ side and a
/// Γ₁ side are Dirichlet.
pub fn build_domain(dimension: usize, resolution: usize, gamma0_spec: &[Side]) -> Result<DiscreteDomain> {
    if dimension != 1 && dimension != 2 {
        return Err(Error::Dimension(dimension));
    }
    if resolution < 4 {
        return Err(Error::ResolutionTooSmall(resolution));
    }
    if gamma0_spec.is_empty() {
        return Err(Error::EmptyDirichlet);
    }
    for side in gamma0_spec {
        if !Side::sides_for(dimension).contains(side) {
            return Err(Error::InvalidSide {
                side: side.to_string(),
                dim: dimension,
            });
        }
    }
    let gamma0_sides: BTreeSet<Side> = gamma0_spec.iter().copied().collect();
    let n = resolution;
    let h = 1.0 / n as f64;

    let (node_coords, nodes_per_element, connectivity) = if dimension == 1 {
        let coords = (0..=n).map(|i| [i as f64 / n as f64, 0.0]).collect::<Vec<_>>();
        let conn = (0..n).flat_map(|i| [i, i + 1]).collect::<Vec<_>>();
        (coords, 2, conn)
    } else {
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut coords = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                coords.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut conn = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (ll, lr, ur, ul) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                conn.extend_from_slice(&[ll, lr, ur]);
                conn.extend_from_slice(&[ll, ur, ul]);
            }
        }
        (coords, 3, conn)
    };

    let geometry = connectivity
        .chunks(nodes_per_element)
        .map(|el| element_geometry(&node_coords, el))
        .collect::<Vec<_>>();

    let on_side = |p: [f64; 2], side: Side| side.distance(p).abs() < 0.5 * h;
    let sides = Side::sides_for(dimension);
    let mut is_gamma0 = vec![false; node_coords.len()];
    let mut gamma0_nodes = Vec::new();
    let mut gamma1_nodes = Vec::new();
    for (i, &p) in node_coords.iter().enumerate() {
        let touching: Vec<Side> = sides.iter().copied().filter(|&s| on_side(p, s)).collect();
        if touching.is_empty() {
            continue;
        }
        if touching.iter().any(|s| gamma0_sides.contains(s)) {
            is_gamma0[i] = true;
            gamma0_nodes.push(i);
        } else {
            gamma1_nodes.push(i);
        }
    }

    let mut boundary_facets = Vec::new();
    for &side in sides {
        let dirichlet = gamma0_sides.contains(&side);
        let normal = side.outward_normal();
        if dimension == 1 {
            let node = if side == Side::Left { 0 } else { n };
            boundary_facets.push(BoundaryFacet {
                nodes: vec![node],
                side,
                normal,
                dirichlet,
            });
        } else {
            let idx = |i: usize, j: usize| j * (n + 1) + i;
            for k in 0..n {
                let nodes = match side {
                    Side::Left => vec![idx(0, k), idx(0, k + 1)],
                    Side::Right => vec![idx(n, k), idx(n, k + 1)],
                    Side::Bottom => vec![idx(k, 0), idx(k + 1, 0)],
                    Side::Top => vec![idx(k, n), idx(k + 1, n)],
                };
                boundary_facets.push(BoundaryFacet {
                    nodes,
                    side,
                    normal,
                    dirichlet,
                });
            }
        }
    }

    let h_values = node_coords
        .iter()
        .map(|&p| {
            sides
                .iter()
                .map(|s| s.distance(p))
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
        })
        .collect();

    let domain = DiscreteDomain {
        dimension,
        resolution,
        node_coords,
        nodes_per_element,
        connectivity,
        geometry,
        gamma0_sides,
        gamma0_nodes,
        gamma1_nodes,
        is_gamma0,
        boundary_facets,
        h_values,
    };
    debug_assert!(domain.check_invariants().is_ok());
    Ok(domain)
}

fn element_geometry(coords: &[[f64; 2]], el: &[usize]) -> ElementGeometry {
    if el.len() == 2 {
        let (a, b) = (coords[el[0]][0], coords[el[1]][0]);
        let len = b - a;
        ElementGeometry {
            volume: len,
            centroid: [0.5 * (a + b), 0.0],
            basis_gradients: vec![[-1.0 / len, 0.0], [1.0 / len, 0.0]],
        }
    } else {
        let (p0, p1, p2) = (coords[el[0]], coords[el[1]], coords[el[2]]);
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        // gradient of barycentric λ_i is the rotated opposite edge over 2|T|
        let grad = |pa: [f64; 2], pb: [f64; 2]| [(pa[1] - pb[1]) / det, (pb[0] - pa[0]) / det];
        ElementGeometry {
            volume: 0.5 * det,
            centroid: [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0],
            basis_gradients: vec![grad(p1, p2), grad(p2, p0), grad(p0, p1)],
        }
    }
}

impl DiscreteDomain {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Mesh width `1 / resolution`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_elements(&self) -> usize {
        self.geometry.len()
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.connectivity[e * self.nodes_per_element..(e + 1) * self.nodes_per_element]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.connectivity.chunks(self.nodes_per_element)
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    pub fn gamma0_sides(&self) -> impl Iterator<Item = Side> + '_ {
        self.gamma0_sides.iter().copied()
    }

    pub fn gamma1_sides(&self) -> impl Iterator<Item = Side> + '_ {
        Side::sides_for(self.dimension)
            .iter()
            .copied()
            .filter(|s| !self.gamma0_sides.contains(s))
    }

    pub fn gamma0_nodes(&self) -> &[usize] {
        &self.gamma0_nodes
    }

    pub fn gamma1_nodes(&self) -> &[usize] {
        &self.gamma1_nodes
    }

    pub fn is_gamma0(&self, node: usize) -> bool {
        self.is_gamma0[node]
    }

    /// Node indices not on Γ₀, ascending.
    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| !self.is_gamma0[i]).collect()
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    /// Distance-to-boundary level set sampled at the nodes.
    pub fn h_values(&self) -> &[f64] {
        &self.h_values
    }

    /// Lebesgue measure of Ω (always 1 on these geometries, computed anyway).
    pub fn measure(&self) -> f64 {
        self.geometry.iter().map(|g| g.volume).sum()
    }

    /// Structured index `(i, j)` of a node (`j = 0` in 1D).
    pub fn grid_index(&self, node: usize) -> (usize, usize) {
        if self.dimension == 1 {
            (node, 0)
        } else {
            (node % (self.resolution + 1), node / (self.resolution + 1))
        }
    }

    pub fn node_at(&self, i: usize, j: usize) -> usize {
        if self.dimension == 1 {
            i
        } else {
            j * (self.resolution + 1) + i
        }
    }

    /// Largest deviation of `|∇h|` from 1 over elements touching the boundary.
    /// Elements near a corner, where the nearest side changes, are skipped:
    /// `h` has a kink there.
    pub fn first_layer_gradient_error(&self) -> f64 {
        let sides = Side::sides_for(self.dimension);
        let nearest = |i: usize| {
            let p = self.node_coords[i];
            let close: Vec<Side> = sides.iter().copied().filter(|s| s.distance(p) == self.h_values[i]).collect();
            (close.len() == 1).then(|| close[0])
        };
        let mut worst: f64 = 0.0;
        for (e, el) in self.elements().enumerate() {
            let on_boundary = el.iter().any(|&i| self.h_values[i] == 0.0);
            let first = nearest(el[0]);
            let one_side = first.is_some() && el.iter().all(|&i| nearest(i) == first);
            if !on_boundary || !one_side {
                continue;
            }
            let vals: Vec<f64> = el.iter().map(|&i| self.h_values[i]).collect();
            let g = self.geometry[e].gradient(&vals);
            worst = worst.max(((g[0] * g[0] + g[1] * g[1]).sqrt() - 1.0).abs());
        }
        worst
    }

    pub fn check_invariants(&self) -> Result<()> {
        let broken = |msg: String| Err(Error::Diagnostics(format!("domain invariant: {msg}")));
        if self.gamma0_nodes.is_empty() {
            return Err(Error::EmptyDirichlet);
        }
        let g0: BTreeSet<_> = self.gamma0_nodes.iter().collect();
        if self.gamma1_nodes.iter().any(|i| g0.contains(i)) {
            return broken("Γ₀ and Γ₁ overlap".into());
        }
        for (i, &hv) in self.h_values.iter().enumerate() {
            let boundary = g0.contains(&i) || self.gamma1_nodes.contains(&i);
            if hv < 0.0 || (boundary != (hv == 0.0)) {
                return broken(format!("h = {hv} at node {i} (boundary: {boundary})"));
            }
        }
        if let Some((e, g)) = self.geometry.iter().enumerate().find(|(_, g)| g.volume <= 0.0) {
            return broken(format!("element {e} has volume {}", g.volume));
        }
        Ok(())
    }
}

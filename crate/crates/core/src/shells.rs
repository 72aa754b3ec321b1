//! Inner shells `Ψ_τ(Γ₁) = { r - τ ν(r) }` realized as mesh layers parallel to
//! the Γ₁ sides.

use crate::error::{Error, Result};
use crate::mesh::{DiscreteDomain, Side};

/// One Γ₁ side's part of a shell.
#[derive(Debug, Clone)]
pub struct ShellPiece {
    pub side: Side,
    /// Outward normal of the parent Γ₁ side, reused on every shell.
    pub normal: [f64; 2],
    /// Nodes on the shell, ordered along the side.
    pub nodes: Vec<usize>,
    /// Facets of the shell (single node in 1D, node pairs in 2D).
    pub facets: Vec<Vec<usize>>,
    /// Elements between this shell and the next layer inward.
    pub strip_elements: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Shell {
    pub depth: usize,
    pub tau: f64,
    pub pieces: Vec<ShellPiece>,
}

#[derive(Debug, Clone)]
pub struct ShellFamily {
    pub shells: Vec<Shell>,
}

impl ShellFamily {
    /// Shell depths, starting with τ = 0 on Γ₁.
    pub fn tau_values(&self) -> Vec<f64> {
        self.shells.iter().map(|s| s.tau).collect()
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }
}

/// Layer index of `node` measured inward from `side`.
fn layer_of(domain: &DiscreteDomain, side: Side, node: usize) -> usize {
    let n = domain.resolution();
    let (i, j) = domain.grid_index(node);
    match side {
        Side::Left => i,
        Side::Right => n - i,
        Side::Bottom => j,
        Side::Top => n - j,
    }
}

pub fn build_shells(domain: &DiscreteDomain, n_shells: usize) -> Result<ShellFamily> {
    if n_shells < 2 {
        return Err(Error::Shells(format!("need at least 2 shells, got {n_shells}")));
    }
    let sides: Vec<Side> = domain.gamma1_sides().collect();
    if sides.is_empty() {
        return Err(Error::Shells("Γ₁ is empty".into()));
    }
    let n = domain.resolution();
    let opposed = sides.iter().any(|s| sides.contains(&s.opposite()));
    let available = if opposed { n / 2 } else { n };
    if n_shells > available {
        return Err(Error::TooManyShells {
            requested: n_shells,
            available,
        });
    }
    let h = domain.spacing();
    let layers: Vec<Vec<usize>> = sides
        .iter()
        .map(|&s| (0..domain.n_nodes()).map(|v| layer_of(domain, s, v)).collect())
        .collect();

    let shells = (0..n_shells)
        .map(|k| {
            let pieces = sides
                .iter()
                .zip(&layers)
                .map(|(&side, layer)| {
                    let mut nodes: Vec<usize> = (0..domain.n_nodes()).filter(|&v| layer[v] == k).collect();
                    let coords = domain.node_coords();
                    nodes.sort_by(|&a, &b| side.tangential(coords[a]).total_cmp(&side.tangential(coords[b])));
                    let facets = if domain.dimension() == 1 {
                        nodes.iter().map(|&v| vec![v]).collect()
                    } else {
                        nodes.windows(2).map(|w| w.to_vec()).collect()
                    };
                    let strip_elements = domain
                        .elements()
                        .enumerate()
                        .filter(|(_, el)| el.iter().all(|&v| layer[v] == k || layer[v] == k + 1))
                        .map(|(e, _)| e)
                        .collect();
                    ShellPiece {
                        side,
                        normal: side.outward_normal(),
                        nodes,
                        facets,
                        strip_elements,
                    }
                })
                .collect();
            Shell {
                depth: k,
                tau: k as f64 * h,
                pieces,
            }
        })
        .collect();
    Ok(ShellFamily { shells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_domain;

    #[test]
    fn interval_shells_at_structured_offsets() {
        let d = build_domain(1, 10, &[Side::Left]).unwrap();
        let fam = build_shells(&d, 3).unwrap();
        let taus = fam.tau_values();
        for (t, want) in taus.iter().zip([0.0, 0.1, 0.2]) {
            assert!((t - want).abs() < 1e-15);
        }
        let xs: Vec<f64> = fam
            .shells
            .iter()
            .map(|s| d.node_coords()[s.pieces[0].nodes[0]][0])
            .collect();
        for (x, want) in xs.iter().zip([1.0, 0.9, 0.8]) {
            assert!((x - want).abs() < 1e-14);
        }
        assert_eq!(fam.shells[0].pieces[0].strip_elements, vec![9]);
        assert_eq!(fam.shells[0].pieces[0].normal, [1.0, 0.0]);
    }

    #[test]
    fn square_right_edge_columns() {
        let d = build_domain(2, 16, &[Side::Left, Side::Bottom, Side::Top]).unwrap();
        let fam = build_shells(&d, 2).unwrap();
        let coords = d.node_coords();
        for (shell, x) in fam.shells.iter().zip([1.0, 1.0 - 1.0 / 16.0]) {
            assert_eq!(shell.pieces.len(), 1);
            let piece = &shell.pieces[0];
            assert_eq!(piece.nodes.len(), 17);
            assert_eq!(piece.facets.len(), 16);
            assert!(piece.nodes.iter().all(|&v| (coords[v][0] - x).abs() < 1e-14));
            assert_eq!(piece.strip_elements.len(), 32);
        }
    }

    #[test]
    fn shells_are_nested() {
        let d = build_domain(2, 12, &[Side::Left]).unwrap();
        let fam = build_shells(&d, 4).unwrap();
        for w in fam.shells.windows(2) {
            for (outer, inner) in w[0].pieces.iter().zip(&w[1].pieces) {
                let dist = |v: usize| outer.side.distance(d.node_coords()[v]);
                let max_outer = outer.nodes.iter().map(|&v| dist(v)).fold(0.0, f64::max);
                let min_inner = inner.nodes.iter().map(|&v| dist(v)).fold(f64::INFINITY, f64::min);
                assert!(min_inner > max_outer);
            }
        }
    }

    #[test]
    fn zero_depth_shell_is_gamma1() {
        let d = build_domain(2, 8, &[Side::Left, Side::Bottom, Side::Top]).unwrap();
        let fam = build_shells(&d, 2).unwrap();
        let facets: Vec<_> = d
            .boundary_facets()
            .iter()
            .filter(|f| !f.dirichlet)
            .map(|f| f.nodes.clone())
            .collect();
        assert_eq!(fam.shells[0].pieces[0].facets, facets);
    }

    #[test]
    fn too_many_shells_rejected() {
        let d = build_domain(1, 8, &[Side::Left]).unwrap();
        assert!(matches!(
            build_shells(&d, 9),
            Err(Error::TooManyShells { requested: 9, available: 8 })
        ));
        let d2 = build_domain(2, 8, &[Side::Bottom]).unwrap();
        assert!(matches!(
            build_shells(&d2, 5),
            Err(Error::TooManyShells { available: 4, .. })
        ));
        assert!(build_shells(&d, 1).is_err());
        let dd = build_domain(1, 8, &[Side::Left, Side::Right]).unwrap();
        assert!(build_shells(&dd, 2).is_err());
    }
}

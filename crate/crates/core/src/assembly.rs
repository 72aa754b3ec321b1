//! Piecewise-linear mass and stiffness assembly for `L u = -div(A ∇u)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::mesh::DiscreteDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassMode {
    #[default]
    Lumped,
    Consistent,
}

impl fmt::Display for MassMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MassMode::Lumped => "lumped",
            MassMode::Consistent => "consistent",
        })
    }
}

impl FromStr for MassMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "lumped" => Ok(MassMode::Lumped),
            "consistent" => Ok(MassMode::Consistent),
            other => Err(format!("unknown mass mode '{other}' (expected lumped|consistent)")),
        }
    }
}

/// Compressed sparse row matrix; rows sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.nrows, (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()))
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        (0..self.nrows)
            .map(|r| x[r] * self.row(r).map(|(c, v)| v * x[c]).sum::<f64>())
            .sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|r| self.get(r, r)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, v)| r == c || v == 0.0)
    }

    /// `max |A - Aᵀ|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Dense principal submatrix on the index set `idx`.
    pub fn dense_submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        let mut pos = vec![usize::MAX; self.ncols];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = DMatrix::zeros(idx.len(), idx.len());
        for (k, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    m[(k, pos[c])] += v;
                }
            }
        }
        m
    }

    /// Writes `# name rows cols nnz` followed by one `i j value` line per entry.
    pub fn write_triplets<W: Write>(&self, name: &str, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# {} {} {} {}", name, self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub mass_mode: MassMode,
    pub mass: SparseMatrix,
    pub stiffness_a: SparseMatrix,
    pub stiffness_i: SparseMatrix,
    pub free_dofs: Vec<usize>,
    /// Position of each node in `free_dofs`, `None` on Γ₀.
    pub free_index: Vec<Option<usize>>,
    pub lambda1: f64,
    pub lambda2: f64,
}

fn element_stiffness(geom_grads: &[[f64; 2]], volume: f64, a: &[[f64; 2]; 2]) -> Vec<f64> {
    let k = geom_grads.len();
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        let gi = geom_grads[i];
        let agi = [a[0][0] * gi[0] + a[0][1] * gi[1], a[1][0] * gi[0] + a[1][1] * gi[1]];
        for j in 0..k {
            let gj = geom_grads[j];
            out[i * k + j] = volume * (agi[0] * gj[0] + agi[1] * gj[1]);
        }
    }
    out
}

const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// Assembles `M`, `K_A` and `K_I`, then checks the ellipticity sandwich on
/// random vectors and positive definiteness of `K_A` on the free nodes.
pub fn assemble(domain: &DiscreteDomain, coeff: &CoefficientField, mass_mode: MassMode) -> Result<AssembledOperators> {
    let n = domain.n_nodes();
    let dim = domain.dimension();
    let identity = if dim == 1 { [[1.0, 0.0], [0.0, 0.0]] } else { IDENTITY };
    let mut ka = Vec::new();
    let mut ki = Vec::new();
    let mut mass = Vec::new();
    for (e, el) in domain.elements().enumerate() {
        let g = domain.geometry(e);
        let kae = element_stiffness(&g.basis_gradients, g.volume, coeff.element(e));
        let kie = element_stiffness(&g.basis_gradients, g.volume, &identity);
        let k = el.len();
        let consistent_scale = g.volume / ((dim + 1) * (dim + 2)) as f64;
        for a in 0..k {
            for b in 0..k {
                // read the upper triangle so both halves carry identical bits
                let idx = a.min(b) * k + a.max(b);
                ka.push((el[a], el[b], kae[idx]));
                ki.push((el[a], el[b], kie[idx]));
                match mass_mode {
                    MassMode::Consistent => {
                        let w = if a == b { 2.0 } else { 1.0 };
                        mass.push((el[a], el[b], w * consistent_scale));
                    }
                    MassMode::Lumped if a == b => mass.push((el[a], el[a], g.volume / (dim + 1) as f64)),
                    MassMode::Lumped => {}
                }
            }
        }
    }
    let free_dofs = domain.free_nodes();
    let mut free_index = vec![None; n];
    for (k, &i) in free_dofs.iter().enumerate() {
        free_index[i] = Some(k);
    }
    let ops = AssembledOperators {
        mass_mode,
        mass: SparseMatrix::from_triplets(n, n, mass),
        stiffness_a: SparseMatrix::from_triplets(n, n, ka),
        stiffness_i: SparseMatrix::from_triplets(n, n, ki),
        free_dofs,
        free_index,
        lambda1: coeff.lambda1,
        lambda2: coeff.lambda2,
    };

    let violation = ops.sandwich_violation(100, 0x5eed);
    if violation > 1e-12 {
        return Err(Error::Diagnostics(format!(
            "ellipticity sandwich violated by {violation:e}"
        )));
    }
    if ops.free_dofs.is_empty() || ops.stiffness_a.dense_submatrix(&ops.free_dofs).cholesky().is_none() {
        return Err(Error::SingularStiffness);
    }
    Ok(ops)
}

impl AssembledOperators {
    pub fn n_nodes(&self) -> usize {
        self.mass.nrows()
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    /// Zeroes the Γ₀ entries in place; returns whether any entry was nonzero.
    pub fn project_dirichlet(&self, v: &mut DVector<f64>) -> bool {
        let mut changed = false;
        for (i, slot) in self.free_index.iter().enumerate() {
            if slot.is_none() && v[i] != 0.0 {
                v[i] = 0.0;
                changed = true;
            }
        }
        changed
    }

    pub fn restrict(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.n_free(), self.free_dofs.iter().map(|&i| v[i]))
    }

    pub fn extend(&self, v_free: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.n_nodes());
        for (k, &i) in self.free_dofs.iter().enumerate() {
            v[i] = v_free[k];
        }
        v
    }

    /// `∫ u` for a piecewise-linear field (row sums of `M` give the exact integral).
    pub fn integral(&self, u: &DVector<f64>) -> f64 {
        (0..self.n_nodes())
            .map(|r| self.mass.row(r).map(|(_, v)| v).sum::<f64>() * u[r])
            .sum()
    }

    pub fn mass_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&self.mass.mul_vec(v))
    }

    pub fn mass_norm(&self, u: &DVector<f64>) -> f64 {
        self.mass.quadratic_form(u).max(0.0).sqrt()
    }

    /// Largest relative breach of `Λ₁ vᵀK_I v ≤ vᵀK_A v ≤ Λ₂ vᵀK_I v` on random vectors.
    pub fn sandwich_violation(&self, trials: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let v = DVector::from_fn(self.n_nodes(), |_, _| rng.random_range(-1.0..1.0));
            let qa = self.stiffness_a.quadratic_form(&v);
            let qi = self.stiffness_i.quadratic_form(&v);
            let scale = qa.abs().max(qi.abs()).max(f64::MIN_POSITIVE);
            worst = worst
                .max((self.lambda1 * qi - qa) / scale)
                .max((qa - self.lambda2 * qi) / scale);
        }
        worst.max(0.0)
    }

    pub fn write_dump<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.mass.write_triplets("M", out)?;
        self.stiffness_a.write_triplets("K_A", out)?;
        self.stiffness_i.write_triplets("K_I", out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{build_coefficients, CoefficientSpec};
    use crate::mesh::{build_domain, Side};

    fn ops_1d(n: usize, mode: MassMode) -> AssembledOperators {
        let d = build_domain(1, n, &[Side::Left]).unwrap();
        let c = build_coefficients(&d, &CoefficientSpec::Identity).unwrap();
        assemble(&d, &c, mode).unwrap()
    }

    #[test]
    fn stiffness_stencil_1d() {
        let n = 10;
        let h = 0.1;
        let ops = ops_1d(n, MassMode::Lumped);
        for i in 1..n {
            assert!((ops.stiffness_a.get(i, i) - 2.0 / h).abs() < 1e-10);
            assert!((ops.stiffness_a.get(i, i - 1) + 1.0 / h).abs() < 1e-10);
            assert!((ops.stiffness_a.get(i, i + 1) + 1.0 / h).abs() < 1e-10);
        }
        assert!((ops.stiffness_a.get(0, 0) - 1.0 / h).abs() < 1e-10);
    }

    #[test]
    fn lumped_mass_is_row_sum_of_consistent() {
        let n = 10;
        let lumped = ops_1d(n, MassMode::Lumped);
        let consistent = ops_1d(n, MassMode::Consistent);
        assert!(lumped.mass.is_diagonal());
        let diag = lumped.mass.diagonal();
        for (i, d) in diag.iter().enumerate() {
            let row_sum: f64 = consistent.mass.row(i).map(|(_, v)| v).sum();
            assert!((d - row_sum).abs() < 1e-15);
        }
        assert!((diag[0] - 0.05).abs() < 1e-15);
        assert!((diag[5] - 0.1).abs() < 1e-15);
        assert!((diag[n] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn constants_have_zero_gradient_energy() {
        let ops = ops_1d(8, MassMode::Lumped);
        let c = DVector::from_element(9, 3.7);
        assert!(ops.stiffness_i.quadratic_form(&c).abs() < 1e-12);
        let d = build_domain(2, 6, &[Side::Left]).unwrap();
        let coeff = build_coefficients(&d, &CoefficientSpec::constant_full(2.0, 0.3, 1.0)).unwrap();
        let ops2 = assemble(&d, &coeff, MassMode::Consistent).unwrap();
        let c2 = DVector::from_element(d.n_nodes(), -1.5);
        assert!(ops2.stiffness_a.quadratic_form(&c2).abs() < 1e-11);
    }

    #[test]
    fn patch_test_linear_field() {
        let ops = ops_1d(12, MassMode::Lumped);
        let u = DVector::from_fn(13, |i, _| i as f64 / 12.0);
        let r = ops.stiffness_a.mul_vec(&u);
        for i in 1..12 {
            assert!(r[i].abs() < 1e-12, "row {i}: {}", r[i]);
        }
    }

    #[test]
    fn operators_symmetric() {
        let d = build_domain(2, 6, &[Side::Left, Side::Top]).unwrap();
        let coeff = build_coefficients(&d, &CoefficientSpec::constant_full(2.0, 0.4, 1.0)).unwrap();
        for mode in [MassMode::Lumped, MassMode::Consistent] {
            let ops = assemble(&d, &coeff, mode).unwrap();
            assert_eq!(ops.stiffness_a.asymmetry(), 0.0);
            assert_eq!(ops.stiffness_i.asymmetry(), 0.0);
            assert_eq!(ops.mass.asymmetry(), 0.0);
        }
    }

    #[test]
    fn mass_integrates_exactly() {
        let d = build_domain(2, 5, &[Side::Left]).unwrap();
        let c = build_coefficients(&d, &CoefficientSpec::Identity).unwrap();
        let ops = assemble(&d, &c, MassMode::Consistent).unwrap();
        let one = DVector::from_element(d.n_nodes(), 1.0);
        assert!((ops.mass.quadratic_form(&one) - 1.0).abs() < 1e-13);
        assert!((ops.integral(&one) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn dump_has_header_and_entries() {
        let ops = ops_1d(4, MassMode::Lumped);
        let mut buf = Vec::new();
        ops.stiffness_a.write_triplets("K_A", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# K_A 5 5 13");
        assert_eq!(lines.count(), 13);
    }
}

//! Compressed-sparse-row complex matrices.

use nalgebra::DMatrix;

use crate::pauli::PauliOperator;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Realizes a Pauli operator row by row. Entries below 1e-14 are dropped.
    pub fn from_pauli(op: &PauliOperator) -> Self {
        let dim = 1usize << op.n_qubits();
        let rows = crate::par::map_range(dim, |r| {
            let mut row: Vec<(usize, C64)> = op
                .groups()
                .iter()
                .filter_map(|(x, zs)| {
                    let v = op.row_entry(r as u64, *x, zs);
                    (v.norm() > 1e-14).then_some(((r as u64 ^ x) as usize, v))
                })
                .collect();
            row.sort_by_key(|e| e.0);
            row
        });
        Self::from_rows(dim, rows)
    }

    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        assert_eq!(rows.len(), dim);
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            dim,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(j, _)| j == c)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn matvec_into(&self, x: &[C64], out: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        crate::par::fill(out, |r| self.row(r).map(|(c, v)| v * x[c]).sum());
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); self.dim];
        self.matvec_into(x, &mut out);
        out
    }

    /// `<x| A |x>`, reduced in fixed-size chunks for a deterministic order.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        assert_eq!(x.len(), self.dim);
        const CHUNK: usize = 1024;
        crate::par::map_range(self.dim.div_ceil(CHUNK), |k| {
            let hi = ((k + 1) * CHUNK).min(self.dim);
            (k * CHUNK..hi)
                .map(|r| x[r].conj() * self.row(r).map(|(c, v)| v * x[c]).sum::<C64>())
                .sum::<C64>()
        })
        .into_iter()
        .sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Dense block `P^dagger A P` where `P` selects the given basis indices.
    pub fn restrict(&self, basis: &[usize]) -> DMatrix<C64> {
        let mut pos = vec![usize::MAX; self.dim];
        for (i, &b) in basis.iter().enumerate() {
            pos[b] = i;
        }
        let mut m = DMatrix::zeros(basis.len(), basis.len());
        for (i, &b) in basis.iter().enumerate() {
            for (c, v) in self.row(b) {
                if pos[c] != usize::MAX {
                    m[(i, pos[c])] += v;
                }
            }
        }
        m
    }

    /// Largest `|A_rc - conj(A_cr)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

use std::fmt::Write as _;

/// Compressed sparse row matrix. Column indices are sorted within each row
/// and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Compresses triplets, summing duplicates in insertion order.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *data.last_mut().expect("previous entry") += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.data[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.data[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &CsrMatrix) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(r, c, v)| (r, c, a * v)));
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        self.add_scaled(-1.0, other).max_abs()
    }

    /// Rows `rows` and columns `cols` as a new matrix.
    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut t = Vec::new();
        for r in rows.clone() {
            for (c, v) in self.row(r) {
                if cols.contains(&c) {
                    t.push((r - rows.start, c - cols.start, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t)
    }

    /// Scales every stored entry of row `r`, keeping the pattern.
    pub(crate) fn row_values_mut(&mut self, r: usize) -> (&[usize], &mut [f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &mut self.data[span])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// MatrixMarket coordinate text, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{} {} {:.17e}", r + 1, c + 1, v);
        }
        s
    }
}

/// Result of assembling a form of arity 0, 1 or 2.
#[derive(Debug, Clone, PartialEq)]
pub enum GlobalTensor {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(CsrMatrix),
}

impl GlobalTensor {
    pub fn into_scalar(self) -> Option<f64> {
        match self {
            GlobalTensor::Scalar(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_vector(self) -> Option<Vec<f64>> {
        match self {
            GlobalTensor::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_matrix(self) -> Option<CsrMatrix> {
        match self {
            GlobalTensor::Matrix(m) => Some(m),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.matvec(&[1.0, 1.0, 2.0]), vec![2.0, 2.0]);
        assert_eq!(m.transpose().get(2, 1), 1.5);
    }

    #[test]
    fn matrix_market_is_one_based() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(1, 0, 3.0)]);
        let text = m.to_matrix_market();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real general");
        assert_eq!(lines[1], "2 2 1");
        assert!(lines[2].starts_with("2 1 3."));
    }
}

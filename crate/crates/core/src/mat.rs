//! Minimal dense complex matrix used for code words, channel gains, and
//! received blocks. Row-major storage; rows are time slots on the transmit
//! side and receive antennas run along columns.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CxMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CxMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.data.iter().copied()
    }

    pub fn entries_mut(&mut self) -> impl Iterator<Item = &mut Complex64> {
        self.data.iter_mut()
    }

    /// Plain matrix product; dimensions must agree.
    pub fn mul(&self, rhs: &CxMat) -> CxMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = CxMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> CxMat {
        let mut out = CxMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Sum of squared entry magnitudes (squared Frobenius norm).
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_matches_hand_computation() {
        let a = CxMat::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(2.0, 0.0), c(0.0, 0.0)],
        ]);
        let b = CxMat::from_rows(&[vec![c(1.0, 1.0)], vec![c(3.0, 0.0)]]);
        let p = a.mul(&b);
        assert_eq!(p.rows(), 2);
        assert_eq!(p.cols(), 1);
        // (1)(1+i) + (i)(3) = 1 + 4i
        assert!((p.get(0, 0) - c(1.0, 4.0)).norm() < 1e-12);
        assert!((p.get(1, 0) - c(2.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn hermitian_conjugates_and_transposes() {
        let a = CxMat::from_rows(&[vec![c(1.0, 2.0), c(3.0, -4.0)]]);
        let h = a.hermitian();
        assert_eq!(h.rows(), 2);
        assert_eq!(h.cols(), 1);
        assert_eq!(h.get(0, 0), c(1.0, -2.0));
        assert_eq!(h.get(1, 0), c(3.0, 4.0));
    }

    #[test]
    fn energy_sums_squared_magnitudes() {
        let a = CxMat::from_rows(&[vec![c(3.0, 4.0), c(0.0, 2.0)]]);
        assert!((a.energy() - 29.0).abs() < 1e-12);
    }
}

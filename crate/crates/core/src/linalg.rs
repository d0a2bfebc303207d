//! Small dense linear algebra: LU solves for the Patankar stage systems,
//! eigenvalues via Hessenberg reduction and Francis double-shift QR, null
//! spaces and least-squares solves.
//!
//! Everything here targets matrices of dimension at most a handful; no attempt
//! is made at blocking or cache efficiency.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used for eigenvalues and stability-function arguments.
pub type ComplexValue = Complex64;

const PIVOT_RTOL: f64 = 1e-14;
const QR_MAX_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Row-major dense real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting NaN and infinities.
    pub fn from_row_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                n_rows,
                n_cols
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / n_cols.max(1),
                col: k % n_cols.max(1),
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n_cols
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n_rows, n_cols, data)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Self {
        assert_eq!(
            (self.n_rows, self.n_cols),
            (other.n_rows, other.n_cols),
            "shape mismatch in add_scaled"
        );
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + factor * b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_rows, "shape mismatch in matmul");
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.n_cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.n_cols, x.len(), "shape mismatch in mul_vec");
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<LuDecomposition> {
        LuDecomposition::new(self)
    }

    /// Solves `self * X = rhs` column by column.
    pub fn solve_matrix(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        let lu = self.lu()?;
        let mut out = DenseMatrix::zeros(rhs.n_rows, rhs.n_cols);
        for j in 0..rhs.n_cols {
            out.set_column(j, &lu.solve(&rhs.column(j))?);
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n_cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n_cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.n_rows, self.n_cols)?;
        for i in 0..self.n_rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuDecomposition {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                m.n_rows, m.n_cols
            )));
        }
        let n = m.n_rows;
        // per-column scale: Patankar stage matrices have columns scaled by
        // 1/w_j, which can differ by many orders of magnitude
        let col_scale: Vec<f64> = (0..n)
            .map(|j| (0..n).fold(0.0_f64, |acc, i| acc.max(m.data[i * n + j].abs())))
            .collect();
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let threshold = PIVOT_RTOL * col_scale[k];
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::Singular {
                    column: k,
                    pivot,
                    threshold,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let diag = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / diag;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                n
            )));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }

    pub fn determinant(&self) -> f64 {
        let mut det: f64 = (0..self.n).map(|i| self.lu[i * self.n + i]).product();
        // parity of the row permutation
        let mut seen = vec![false; self.n];
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.perm[k];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }
}

/// Solves `m x = b` with partial pivoting.
pub fn lu_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    m.lu()?.solve(b)
}

/// All eigenvalues of a square matrix, conjugate pairs included, sorted by
/// `(re, im)`.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<ComplexValue>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.n_rows, m.n_cols
        )));
    }
    let n = m.n_rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    hessenberg_reduce(&mut h);
    let mut eig = hessenberg_qr(&mut h)?;
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Householder similarity reduction to upper Hessenberg form.
fn hessenberg_reduce(a: &mut [Vec<f64>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        // A <- H A
        for j in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[k + 1 + t][j]).sum();
            for (t, vt) in v.iter().enumerate() {
                a[k + 1 + t][j] -= 2.0 * vt * dot;
            }
        }
        // A <- A H
        for row in a.iter_mut() {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * row[k + 1 + t]).sum();
            for (t, vt) in v.iter().enumerate() {
                row[k + 1 + t] -= 2.0 * vt * dot;
            }
        }
        for i in k + 2..n {
            a[i][k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hessenberg_qr(a: &mut [Vec<f64>]) -> Result<Vec<ComplexValue>> {
    let n = a.len();
    let mut eig = vec![ComplexValue::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut shift = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // locate a negligible subdiagonal entry
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = a[nu][nu];
            if l == nu {
                eig[nu] = ComplexValue::new(x + shift, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += shift;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    let hi = x + z;
                    let lo = if z != 0.0 { x - w / z } else { hi };
                    eig[nu - 1] = ComplexValue::new(hi, 0.0);
                    eig[nu] = ComplexValue::new(lo, 0.0);
                } else {
                    eig[nu - 1] = ComplexValue::new(x + p, z);
                    eig[nu] = ComplexValue::new(x + p, -z);
                }
                nn -= 2;
                break;
            }

            if its == QR_MAX_ITERATIONS_PER_EIGENVALUE {
                return Err(Error::Convergence {
                    iterations: its,
                    residual: a[nu][nu - 1].abs(),
                });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                shift += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // look for two consecutive small subdiagonal elements
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }

            // double QR step on rows l..=nu, columns m..=nu
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nu - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pj = a[k][j] + q * a[k + 1][j];
                        if k != nu - 1 {
                            pj += r * a[k + 2][j];
                            a[k + 2][j] -= pj * z;
                        }
                        a[k + 1][j] -= pj * y;
                        a[k][j] -= pj * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        let mut pi = x * row[k] + y * row[k + 1];
                        if k != nu - 1 {
                            pi += z * row[k + 2];
                            row[k + 2] -= pi * r;
                        }
                        row[k + 1] -= pi * q;
                        row[k] -= pi;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(eig)
}

/// Basis of the right null space of `m`, from a reduced row echelon form with
/// partial pivoting. Pivots below `rtol * max(‖m‖∞, tiny)` count as zero.
pub fn null_space(m: &DenseMatrix, rtol: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = (m.n_rows, m.n_cols);
    let norm = m.norm_inf();
    let threshold = rtol * norm;
    let mut r: Vec<Vec<f64>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
    let mut pivot_cols = Vec::new();
    let mut prow = 0;

    for c in 0..cols {
        if prow == rows {
            break;
        }
        let (p, best) = (prow..rows)
            .map(|i| (i, r[i][c].abs()))
            .fold((prow, -1.0), |b, cur| if cur.1 > b.1 { cur } else { b });
        if best <= threshold || best == 0.0 {
            for row in r.iter_mut().skip(prow) {
                row[c] = 0.0;
            }
            continue;
        }
        r.swap(prow, p);
        let piv = r[prow][c];
        for v in r[prow].iter_mut() {
            *v /= piv;
        }
        for i in 0..rows {
            if i != prow {
                let f = r[i][c];
                if f != 0.0 {
                    for j in 0..cols {
                        r[i][j] -= f * r[prow][j];
                    }
                }
            }
        }
        pivot_cols.push(c);
        prow += 1;
    }

    (0..cols)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = vec![0.0; cols];
            v[free] = 1.0;
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -r[row][free];
            }
            v
        })
        .collect()
}

/// Numerical rank (`cols - dim null space`).
pub fn rank(m: &DenseMatrix, rtol: f64) -> usize {
    m.n_cols - null_space(m, rtol).len()
}

/// Least-squares solution of a tall system `m x ≈ b` by Householder QR.
///
/// Fails with [`Error::Underdetermined`] when `m` has a numerically zero
/// column direction.
pub fn least_squares(m: &DenseMatrix, b: &[f64], rtol: f64) -> Result<Vec<f64>> {
    let (rows, cols) = (m.n_rows, m.n_cols);
    if b.len() != rows {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            rows
        )));
    }
    if rows < cols {
        return Err(Error::Underdetermined {
            rank: rows,
            dim: cols,
        });
    }
    let threshold = rtol * m.norm_inf().max(f64::MIN_POSITIVE);
    let mut a: Vec<Vec<f64>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
    let mut rhs = b.to_vec();

    for k in 0..cols {
        let norm: f64 = (k..rows).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm <= threshold {
            return Err(Error::Underdetermined {
                rank: k,
                dim: cols,
            });
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[k + t][j]).sum();
            let f = 2.0 * dot / vv;
            for (t, vt) in v.iter().enumerate() {
                a[k + t][j] -= f * vt;
            }
        }
        let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * rhs[k + t]).sum();
        let f = 2.0 * dot / vv;
        for (t, vt) in v.iter().enumerate() {
            rhs[k + t] -= f * vt;
        }
    }

    let mut x = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut acc = rhs[i];
        for j in i + 1..cols {
            acc -= a[i][j] * x[j];
        }
        if a[i][i].abs() <= threshold {
            return Err(Error::Underdetermined {
                rank: i,
                dim: cols,
            });
        }
        x[i] = acc / a[i][i];
    }
    Ok(x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn solve_identity() {
        let x = lu_solve(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn solve_two_by_two() {
        let x = lu_solve(&m(&[&[2.0, -1.0], &[-1.0, 2.0]]), &[2.0, 1.0]).unwrap();
        assert_relative_eq!(x[0], 5.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(x[1], 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_rank_one() {
        let err = lu_solve(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(matches!(
            DenseMatrix::from_rows(&[[1.0, f64::NAN]]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(lu_solve(&DenseMatrix::zeros(2, 3), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn determinant_tracks_permutation_sign() {
        let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_relative_eq!(a.lu().unwrap().determinant(), -1.0);
        let b = m(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        assert_relative_eq!(b.lu().unwrap().determinant(), 18.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let e = eigenvalues(&DenseMatrix::from_diagonal(&[-1.0, -2.0])).unwrap();
        assert_eq!(e.len(), 2);
        assert_relative_eq!(e[0].re, -2.0);
        assert_relative_eq!(e[1].re, -1.0);
        assert_eq!(e[0].im, 0.0);
    }

    #[test]
    fn real_spectrum_problem_matrix() {
        let a = m(&[&[-2.0, 1.0, 1.0], &[1.0, -4.0, 1.0], &[1.0, 3.0, -2.0]]).scale(100.0);
        let e = eigenvalues(&a).unwrap();
        let expect = [-500.0, -300.0, 0.0];
        for (z, x) in e.iter().zip(expect) {
            assert!((z.re - x).abs() <= 1e-8 * 500.0, "{z} vs {x}");
            assert!(z.im.abs() <= 1e-8 * 500.0);
        }
        assert_relative_eq!(spectral_radius(&a).unwrap(), 500.0, max_relative = 1e-10);
    }

    #[test]
    fn complex_spectrum_problem_matrix() {
        let a = m(&[&[-4.0, 3.0, 1.0], &[2.0, -4.0, 3.0], &[2.0, 1.0, -4.0]]).scale(100.0);
        let e = eigenvalues(&a).unwrap();
        let expect = [
            ComplexValue::new(-600.0, -100.0),
            ComplexValue::new(-600.0, 100.0),
            ComplexValue::new(0.0, 0.0),
        ];
        for (z, x) in e.iter().zip(expect) {
            assert!((z - x).norm() <= 1e-8 * 600.0, "{z} vs {x}");
        }
    }

    #[test]
    fn spectral_radius_small_cases() {
        assert_relative_eq!(spectral_radius(&DenseMatrix::identity(2)).unwrap(), 1.0);
        assert_relative_eq!(
            spectral_radius(&DenseMatrix::from_diagonal(&[0.5, -0.9])).unwrap(),
            0.9
        );
    }

    #[test]
    fn rotation_has_unit_modulus_pair() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let e = eigenvalues(&m(&[&[c, -s], &[s, c]])).unwrap();
        assert_relative_eq!(e[0].im, -s, epsilon = 1e-14);
        assert_relative_eq!(e[1].im, s, epsilon = 1e-14);
        assert_relative_eq!(e[0].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn null_space_dimensions() {
        assert_eq!(null_space(&DenseMatrix::zeros(2, 2), 1e-10).len(), 2);
        assert_eq!(null_space(&DenseMatrix::identity(3), 1e-10).len(), 0);
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.len(), 1);
        assert!(norm2(&a.mul_vec(&ns[0])) < 1e-14);
        assert_eq!(rank(&a, 1e-10), 1);
    }

    #[test]
    fn least_squares_consistent_tall_system() {
        let a = m(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let x = least_squares(&a, &[1.0, 2.0, 3.0], 1e-12).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], 2.0, epsilon = 1e-14);
        let deficient = m(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]);
        assert!(matches!(
            least_squares(&deficient, &[1.0, 2.0, 3.0], 1e-12),
            Err(Error::Underdetermined { .. })
        ));
    }
}

//! Production–destruction systems.
//!
//! A PDS is `y_i' = Σ_j p_ij(y) − Σ_j d_ij(y)` with `p_ij = d_ji ≥ 0`. Linear
//! systems `y' = A y` with a Metzler, column-sum-zero matrix are the special
//! case `p_ij(y) = a_ij y_j`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// Relative tolerance for conservativity and rank decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Strictly positive concentration vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Domain { index, value });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A (possibly nonlinear) production–destruction system.
///
/// Implementors must keep `production(i, j, y) == destruction(j, i, y)` and
/// zero diagonals; [`check_pairing`] verifies this at a given state.
pub trait ProductionDestruction {
    fn dim(&self) -> usize;

    /// Rate at which component `j` turns into component `i`.
    fn production(&self, i: usize, j: usize, y: &[f64]) -> f64;

    /// Rate at which component `i` turns into component `j`.
    fn destruction(&self, i: usize, j: usize, y: &[f64]) -> f64 {
        self.production(j, i, y)
    }

    fn production_matrix(&self, y: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    p[(i, j)] = self.production(i, j, y);
                }
            }
        }
        p
    }

    fn destruction_matrix(&self, y: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[(i, j)] = self.destruction(i, j, y);
                }
            }
        }
        d
    }

    /// Right-hand side `P_i(y) − D_i(y)`.
    fn rhs(&self, y: &[f64]) -> Vec<f64> {
        let p = self.production_matrix(y);
        let d = self.destruction_matrix(y);
        (0..self.dim())
            .map(|i| p.row(i).iter().sum::<f64>() - d.row(i).iter().sum::<f64>())
            .collect()
    }
}

/// Checks the pairing `p_ij = d_ji`, zero diagonals and nonnegativity at `y`.
pub fn check_pairing<P: ProductionDestruction + ?Sized>(pds: &P, y: &[f64], tol: f64) -> Result<()> {
    let n = pds.dim();
    for i in 0..n {
        if pds.production(i, i, y) != 0.0 || pds.destruction(i, i, y) != 0.0 {
            return Err(Error::ContractViolation(format!(
                "nonzero diagonal rate at ({i}, {i})"
            )));
        }
        for j in 0..n {
            let p = pds.production(i, j, y);
            let d = pds.destruction(j, i, y);
            if p < 0.0 || d < 0.0 {
                return Err(Error::ContractViolation(format!(
                    "negative rate at ({i}, {j})"
                )));
            }
            if (p - d).abs() > tol * p.abs().max(d.abs()).max(1.0) {
                return Err(Error::ContractViolation(format!(
                    "p({i},{j}) = {p} differs from d({j},{i}) = {d}"
                )));
            }
        }
    }
    Ok(())
}

/// One structural defect found by [`validate_linear_pds`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Negative off-diagonal entry (not Metzler).
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    /// Column whose sum does not vanish (not conservative).
    ColumnSum { col: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeOffDiagonal { row, col, value } => {
                write!(f, "negative off-diagonal entry a[{row},{col}] = {value}")
            }
            Violation::ColumnSum { col, sum } => write!(f, "column {col} sums to {sum}"),
        }
    }
}

/// Result of [`validate_linear_pds`]: empty means the matrix is Metzler and
/// conservative.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_linear_pds(a: &DenseMatrix, tol: f64) -> Result<ValidationReport> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "system matrix must be square, got {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    let n = a.n_rows();
    let scale = a.norm_inf().max(1.0);
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] < -tol {
                violations.push(Violation::NegativeOffDiagonal {
                    row: i,
                    col: j,
                    value: a[(i, j)],
                });
            }
        }
    }
    for j in 0..n {
        let sum: f64 = (0..n).map(|i| a[(i, j)]).sum();
        if sum.abs() > tol * scale {
            violations.push(Violation::ColumnSum { col: j, sum });
        }
    }
    Ok(ValidationReport { violations })
}

/// Linear positive conservative system `y' = A y`.
#[derive(Debug, Clone)]
pub struct LinearPds {
    matrix: DenseMatrix,
    invariant_basis: Vec<Vec<f64>>,
}

impl LinearPds {
    /// Validates `a` and caches a basis of its linear invariants.
    pub fn new(a: DenseMatrix) -> Result<Self> {
        let report = validate_linear_pds(&a, DEFAULT_TOL)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::ContractViolation(format!(
                "not a conservative Metzler matrix: {v}"
            )));
        }
        let invariant_basis = linear_invariants(&a, DEFAULT_TOL)?;
        Ok(Self {
            matrix: a,
            invariant_basis,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn invariant_basis(&self) -> &[Vec<f64>] {
        &self.invariant_basis
    }

    /// Rows of the invariant matrix `N` applied to `y`.
    pub fn invariant_values(&self, y: &[f64]) -> Vec<f64> {
        self.invariant_basis
            .iter()
            .map(|n| linalg::dot(n, y))
            .collect()
    }

    /// Basis of `ker(A)`, the steady-state directions.
    pub fn kernel_basis(&self) -> Vec<Vec<f64>> {
        linalg::null_space(&self.matrix, DEFAULT_TOL)
    }
}

/// The PDS view of a linear system: `p_ij(y) = a_ij y_j` for `i ≠ j`.
#[derive(Debug, Clone)]
pub struct MatrixPds {
    a: DenseMatrix,
}

pub fn pds_from_matrix(system: &LinearPds) -> MatrixPds {
    MatrixPds {
        a: system.matrix().clone(),
    }
}

impl ProductionDestruction for MatrixPds {
    fn dim(&self) -> usize {
        self.a.n_rows()
    }

    fn production(&self, i: usize, j: usize, y: &[f64]) -> f64 {
        if i == j {
            0.0
        } else {
            self.a[(i, j)] * y[j]
        }
    }

    fn destruction(&self, i: usize, j: usize, y: &[f64]) -> f64 {
        if i == j {
            0.0
        } else {
            self.a[(j, i)] * y[i]
        }
    }

    fn production_matrix(&self, y: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    p[(i, j)] = self.a[(i, j)] * y[j];
                }
            }
        }
        p
    }

    fn destruction_matrix(&self, y: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[(i, j)] = self.a[(j, i)] * y[i];
                }
            }
        }
        d
    }
}

/// A PDS defined by a production closure; destruction follows from pairing.
pub struct FnPds<F> {
    dim: usize,
    production: F,
}

impl<F> FnPds<F>
where
    F: Fn(usize, usize, &[f64]) -> f64,
{
    pub fn new(dim: usize, production: F) -> Self {
        Self { dim, production }
    }
}

impl<F> ProductionDestruction for FnPds<F>
where
    F: Fn(usize, usize, &[f64]) -> f64,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn production(&self, i: usize, j: usize, y: &[f64]) -> f64 {
        if i == j {
            0.0
        } else {
            (self.production)(i, j, y)
        }
    }
}

/// Basis of `ker(Aᵀ)`; each vector `n` gives a linear invariant `nᵀy`.
pub fn linear_invariants(a: &DenseMatrix, tol: f64) -> Result<Vec<Vec<f64>>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "system matrix must be square, got {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    Ok(linalg::null_space(&a.transpose(), tol))
}

/// Limit state `y*` reached from `y0`: solves `[A; N] y* = [0; N y0]`.
pub fn steady_state(system: &LinearPds, y0: &StateVector) -> Result<Vec<f64>> {
    let a = system.matrix();
    let n = system.dim();
    if y0.len() != n {
        return Err(Error::Dimension(format!(
            "initial state has length {}, expected {}",
            y0.len(),
            n
        )));
    }
    let basis = system.invariant_basis();
    let k = basis.len();
    let mut stacked = DenseMatrix::zeros(n + k, n);
    let mut rhs = vec![0.0; n + k];
    for i in 0..n {
        for j in 0..n {
            stacked[(i, j)] = a[(i, j)];
        }
    }
    for (r, v) in basis.iter().enumerate() {
        for j in 0..n {
            stacked[(n + r, j)] = v[j];
        }
        rhs[n + r] = linalg::dot(v, y0);
    }
    let y_star = linalg::least_squares(&stacked, &rhs, DEFAULT_TOL)?;
    let residual = linalg::norm2(&a.mul_vec(&y_star));
    if residual > DEFAULT_TOL * a.norm_inf().max(1.0) * linalg::norm2(&y_star).max(1.0) {
        return Err(Error::ContractViolation(format!(
            "steady state residual ‖A y*‖ = {residual:e}"
        )));
    }
    Ok(y_star)
}

/// Parses a square matrix from text. Rows are separated by newlines or `;`,
/// entries by whitespace or commas. A single row of `n²` entries is read as
/// row-major `n×n`.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let rows: Vec<Vec<f64>> = text
        .split(['\n', ';'])
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(parse_vector)
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::MatrixParse("no entries".into()));
    }
    if rows.len() == 1 {
        let values = &rows[0];
        let n = (values.len() as f64).sqrt().round() as usize;
        if n * n != values.len() {
            return Err(Error::MatrixParse(format!(
                "{} entries do not form a square matrix",
                values.len()
            )));
        }
        return DenseMatrix::from_row_major(n, n, values.clone());
    }
    let m = DenseMatrix::from_rows(&rows).map_err(|e| Error::MatrixParse(e.to_string()))?;
    if !m.is_square() {
        return Err(Error::MatrixParse(format!(
            "matrix is {}x{}, expected square",
            m.n_rows(),
            m.n_cols()
        )));
    }
    Ok(m)
}

/// Parses a whitespace- or comma-separated list of reals.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::MatrixParse(format!("`{t}` is not a number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn real3() -> DenseMatrix {
        DenseMatrix::from_rows(&[[-2.0, 1.0, 1.0], [1.0, -4.0, 1.0], [1.0, 3.0, -2.0]])
            .unwrap()
            .scale(100.0)
    }

    fn complex3() -> DenseMatrix {
        DenseMatrix::from_rows(&[[-4.0, 3.0, 1.0], [2.0, -4.0, 3.0], [2.0, 1.0, -4.0]])
            .unwrap()
            .scale(100.0)
    }

    fn double_kernel4() -> DenseMatrix {
        DenseMatrix::from_rows(&[
            [-2.0, 0.0, 0.0, 1.0],
            [0.0, -4.0, 3.0, 0.0],
            [0.0, 4.0, -3.0, 0.0],
            [2.0, 0.0, 0.0, -1.0],
        ])
        .unwrap()
        .scale(100.0)
    }

    fn state(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validation_accepts_problem_matrix_and_zero() {
        assert!(validate_linear_pds(&real3(), DEFAULT_TOL).unwrap().is_ok());
        assert!(validate_linear_pds(&DenseMatrix::zeros(3, 3), DEFAULT_TOL)
            .unwrap()
            .is_ok());
    }

    #[test]
    fn validation_names_negative_entry() {
        let a = DenseMatrix::from_rows(&[[-1.0, -1.0], [1.0, 1.0]]).unwrap();
        let report = validate_linear_pds(&a, DEFAULT_TOL).unwrap();
        assert!(report
            .violations
            .contains(&Violation::NegativeOffDiagonal {
                row: 0,
                col: 1,
                value: -1.0
            }));
    }

    #[test]
    fn validation_flags_column_sum_and_shape() {
        let a = DenseMatrix::from_rows(&[[-1.0, 0.0], [0.5, 0.0]]).unwrap();
        let report = validate_linear_pds(&a, DEFAULT_TOL).unwrap();
        assert_eq!(
            report.violations,
            vec![Violation::ColumnSum { col: 0, sum: -0.5 }]
        );
        assert!(matches!(
            validate_linear_pds(&DenseMatrix::zeros(2, 3), DEFAULT_TOL),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn matrix_pds_rates() {
        let sys = LinearPds::new(real3()).unwrap();
        let pds = pds_from_matrix(&sys);
        let y = [1.0, 9.0, 5.0];
        assert_eq!(pds.production(0, 1, &y), 900.0);
        assert_eq!(pds.destruction(1, 0, &y), pds.production(0, 1, &y));
        for i in 0..3 {
            assert_eq!(pds.production(i, i, &y), 0.0);
            assert_eq!(pds.destruction(i, i, &y), 0.0);
            // −Σ_j d_ij(y) = a_ii y_i
            let dsum: f64 = (0..3).map(|j| pds.destruction(i, j, &y)).sum();
            assert_relative_eq!(-dsum, sys.matrix()[(i, i)] * y[i], epsilon = 1e-12);
        }
        check_pairing(&pds, &y, 1e-14).unwrap();
        let ay = sys.matrix().mul_vec(&y);
        for (r, e) in pds.rhs(&y).iter().zip(ay) {
            assert_relative_eq!(*r, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn rates_at_unit_basis_reassemble_off_diagonal() {
        let a = complex3();
        let pds = pds_from_matrix(&LinearPds::new(a.clone()).unwrap());
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            for i in 0..3 {
                if i != j {
                    assert_eq!(pds.production(i, j, &e), a[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn invariant_dimensions() {
        let inv = linear_invariants(&real3(), DEFAULT_TOL).unwrap();
        assert_eq!(inv.len(), 1);
        // proportional to the ones vector
        assert_relative_eq!(inv[0][0], inv[0][1], max_relative = 1e-12);
        assert_relative_eq!(inv[0][0], inv[0][2], max_relative = 1e-12);

        let a4 = double_kernel4();
        let inv = linear_invariants(&a4, DEFAULT_TOL).unwrap();
        assert_eq!(inv.len(), 2);
        // 1 and (1,2,2,1) lie in the span: append them and the rank stays 2
        let mut rows = inv.clone();
        rows.push(vec![1.0; 4]);
        rows.push(vec![1.0, 2.0, 2.0, 1.0]);
        let stacked = DenseMatrix::from_rows(&rows).unwrap();
        assert_eq!(linalg::rank(&stacked, 1e-10), 2);
        for n in &inv {
            assert!(linalg::norm2(&a4.transpose().mul_vec(n)) <= 1e-10 * a4.norm_inf());
        }

        assert_eq!(
            linear_invariants(&DenseMatrix::zeros(2, 2), DEFAULT_TOL)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn steady_states_of_test_problems() {
        let cases: [(DenseMatrix, [f64; 4], Vec<f64>); 3] = [
            (real3(), [1.0, 9.0, 5.0, 0.0], vec![5.0, 3.0, 7.0]),
            (complex3(), [9.0, 20.0, 8.0, 0.0], vec![13.0, 14.0, 10.0]),
            (
                double_kernel4(),
                [4.0, 1.0, 9.0, 1.0],
                vec![35.0 / 21.0, 90.0 / 21.0, 120.0 / 21.0, 70.0 / 21.0],
            ),
        ];
        for (a, y0, expect) in cases {
            let n = a.n_rows();
            let sys = LinearPds::new(a).unwrap();
            let y_star = steady_state(&sys, &state(&y0[..n])).unwrap();
            for (got, want) in y_star.iter().zip(&expect) {
                assert_relative_eq!(*got, *want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn steady_state_scale_invariant() {
        let y0 = state(&[9.0, 20.0, 8.0]);
        let base = steady_state(&LinearPds::new(complex3()).unwrap(), &y0).unwrap();
        for c in [1e-3, 0.5, 7.0, 1e4] {
            let scaled = steady_state(&LinearPds::new(complex3().scale(c)).unwrap(), &y0).unwrap();
            assert!(linalg::dist2(&base, &scaled) <= 1e-9 * linalg::norm2(&base));
        }
    }

    #[test]
    fn steady_state_of_zero_system_is_start() {
        let sys = LinearPds::new(DenseMatrix::zeros(2, 2)).unwrap();
        let y = steady_state(&sys, &state(&[2.0, 3.0])).unwrap();
        assert_relative_eq!(y[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(y[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn state_vector_rejects_nonpositive() {
        assert!(matches!(
            StateVector::new(vec![1.0, 0.0]),
            Err(Error::Domain { index: 1, .. })
        ));
        assert!(StateVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn parses_matrix_text() {
        let m = parse_matrix("-2, 1, 1\n1 -4 1\n1,3,-2").unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[-2.0, 1.0, 1.0], [1.0, -4.0, 1.0], [1.0, 3.0, -2.0]]).unwrap());
        let flat = parse_matrix("-1 1 1 -1").unwrap();
        assert_eq!(flat.n_rows(), 2);
        assert!(parse_matrix("1 2 3").is_err());
        assert!(parse_matrix("1 2; 3").is_err());
        assert!(parse_matrix("1 x; 3 4").is_err());
    }
}

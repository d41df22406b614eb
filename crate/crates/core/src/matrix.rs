//! Matrix constructions: the lower-banded variable-Toeplitz matrix `L_n`, its
//! Hermitian part `S_n`, banded Toeplitz comparison matrices, diagonal
//! samplings, and the first-order momentary approximation.

use std::fmt::Write as _;

use crate::eigsolve;
use crate::error::{Error, Result};
use crate::grid::{GridMap, RatioSequence};
use crate::symbol::{momentary_weight, SymbolParams};

/// Lower triangular matrix with bandwidth 2, stored as three diagonals.
///
/// Row `k` (1-based) is `[..., -eta*sqrt(r_k r_{k+1})/(1+r_{k+1}),
/// -delta*sqrt(r_{k+1})/(1+r_{k+1}), 1/(1+r_{k+1})]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBand3Matrix {
    dim: usize,
    diag: Vec<f64>,
    sub1: Vec<f64>,
    sub2: Vec<f64>,
}

impl LowerBand3Matrix {
    /// Assembles a lower-banded matrix directly from its three diagonals.
    pub fn from_diagonals(diag: Vec<f64>, sub1: Vec<f64>, sub2: Vec<f64>) -> Result<Self> {
        let dim = diag.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("empty diagonal".into()));
        }
        if sub1.len() != dim.saturating_sub(1) || sub2.len() != dim.saturating_sub(2) {
            return Err(Error::InvalidArgument(format!(
                "diagonal lengths ({}, {}, {}) inconsistent with dim {}",
                diag.len(),
                sub1.len(),
                sub2.len(),
                dim
            )));
        }
        Ok(Self { dim, diag, sub1, sub2 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sub1(&self) -> &[f64] {
        &self.sub1
    }

    pub fn sub2(&self) -> &[f64] {
        &self.sub2
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.dim && col < self.dim);
        match row as i64 - col as i64 {
            0 => self.diag[row],
            1 => self.sub1[col],
            2 => self.sub2[col],
            _ => 0.0,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = self.diag[i];
            if i + 1 < n {
                a[(i + 1) * n + i] = self.sub1[i];
            }
            if i + 2 < n {
                a[(i + 2) * n + i] = self.sub2[i];
            }
        }
        a
    }

    /// Coordinate-list CSV of the nonzero entries, columns `row,col,value`.
    pub fn to_coo_csv(&self) -> String {
        let mut out = String::from("# schema vartoeplitz.matrix-coo.v1\nrow,col,value\n");
        for i in 0..self.dim {
            if i >= 2 && self.sub2[i - 2] != 0.0 {
                let _ = writeln!(out, "{},{},{}", i, i - 2, self.sub2[i - 2]);
            }
            if i >= 1 && self.sub1[i - 1] != 0.0 {
                let _ = writeln!(out, "{},{},{}", i, i - 1, self.sub1[i - 1]);
            }
            let _ = writeln!(out, "{},{},{}", i, i, self.diag[i]);
        }
        out
    }
}

/// Dense symmetric matrix stored as a packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    dim: usize,
    upper: Vec<f64>,
}

impl DenseSymmetric {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, upper: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                let idx = m.index(i, j);
                m.upper[idx] = v;
            }
        }
        m
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.dim);
        i * self.dim - i * (i + 1) / 2 + j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.upper[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let idx = self.index(i, j);
        self.upper[idx] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let idx = self.index(i, j);
        self.upper[idx] += v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Row-major dense copy (both triangles filled).
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.upper[self.index(i, j)];
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    pub fn sub(&self, other: &DenseSymmetric) -> Result<DenseSymmetric> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| a - b).collect();
        Ok(DenseSymmetric { dim: self.dim, upper })
    }

    pub fn scaled(&self, factor: f64) -> DenseSymmetric {
        DenseSymmetric { dim: self.dim, upper: self.upper.iter().map(|v| v * factor).collect() }
    }

    pub fn max_abs_diff(&self, other: &DenseSymmetric) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Coordinate-list CSV of the nonzero entries (both triangles).
    pub fn to_coo_csv(&self) -> String {
        let mut out = String::from("# schema vartoeplitz.matrix-coo.v1\nrow,col,value\n");
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                if v != 0.0 {
                    let _ = writeln!(out, "{},{},{}", i, j, v);
                }
            }
        }
        out
    }

    /// Plain dense text dump for debugging, one row per line.
    pub fn to_dense_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }
}

/// Banded Toeplitz matrix; entry `(j, k)` equals the coefficient `a_{j-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedToeplitz {
    dim: usize,
    num_super: usize,
    /// `coeffs[i] = a_{i - num_super}`, so the layout is `a_{-q}, ..., a_p`.
    coeffs: Vec<f64>,
}

impl BandedToeplitz {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, k: i64) -> f64 {
        let idx = k + self.num_super as i64;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            0.0
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.dim && col < self.dim);
        self.coefficient(row as i64 - col as i64)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.get(i, j);
            }
        }
        a
    }

    /// Packs into symmetric storage; the coefficients must satisfy
    /// `a_k = a_{-k}` within `tol`.
    pub fn to_dense_symmetric(&self, tol: f64) -> Result<DenseSymmetric> {
        let p = self.coeffs.len() - 1 - self.num_super;
        if p != self.num_super {
            return Err(Error::InvalidArgument(format!(
                "band is not symmetric: {} superdiagonals vs {} subdiagonals",
                self.num_super, p
            )));
        }
        for k in 1..=self.num_super as i64 {
            let d = (self.coefficient(k) - self.coefficient(-k)).abs();
            if d > tol {
                return Err(Error::InvalidArgument(format!(
                    "coefficients a_{k} and a_-{k} differ by {d}"
                )));
            }
        }
        Ok(DenseSymmetric::from_fn(self.dim, |i, j| self.coefficient(j as i64 - i as i64)))
    }
}

/// Builds a banded Toeplitz matrix from the coefficient list
/// `a_{-q}, ..., a_p` with `q = num_super` superdiagonals.
pub fn build_toeplitz(coeffs: &[f64], num_super: usize, dim: usize) -> Result<BandedToeplitz> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    if coeffs.is_empty() || num_super >= coeffs.len() {
        return Err(Error::InvalidArgument(format!(
            "coefficient list of length {} cannot have {} superdiagonals",
            coeffs.len(),
            num_super
        )));
    }
    let num_sub = coeffs.len() - 1 - num_super;
    if num_super >= dim || num_sub >= dim {
        return Err(Error::InvalidArgument(format!(
            "band ({num_super} super, {num_sub} sub) is wider than dim {dim}"
        )));
    }
    Ok(BandedToeplitz { dim, num_super, coeffs: coeffs.to_vec() })
}

/// Diagonal sampling matrix `diag(alpha(i/n))`, `i = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagSampling {
    values: Vec<f64>,
}

impl DiagSampling {
    pub fn sample(alpha: impl Fn(f64) -> f64, n: usize) -> Self {
        Self { values: (1..=n).map(|i| alpha(i as f64 / n as f64)).collect() }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Builds `L(r_2, ..., r_n)` of dimension `len(r)`.
///
/// The entries follow the banded display; the builder recomputes them through
/// the factored form `D1 - delta*D2*T(e^{i th}) - eta*D3*T(e^{2i th})` and
/// asserts the two routes agree to 1e-15.
pub fn build_l(r: &RatioSequence, params: &SymbolParams) -> Result<LowerBand3Matrix> {
    let rs = r.as_slice();
    let m = rs.len();
    let mut diag = Vec::with_capacity(m);
    let mut sub1 = Vec::with_capacity(m.saturating_sub(1));
    let mut sub2 = Vec::with_capacity(m.saturating_sub(2));
    for i in 0..m {
        diag.push(1.0 / (1.0 + rs[i]));
    }
    for i in 0..m.saturating_sub(1) {
        sub1.push(-params.delta * rs[i + 1].sqrt() / (1.0 + rs[i + 1]));
    }
    for i in 0..m.saturating_sub(2) {
        sub2.push(-params.eta * (rs[i + 1] * rs[i + 2]).sqrt() / (1.0 + rs[i + 2]));
    }

    // Factored route: diagonal samplings as in the D1/D2/D3 lists, pushed
    // through the shift matrices. Positions 0 and 1 of D3 never enter the
    // product, which is where the undefined r_1 of the display would sit.
    let d2: Vec<f64> = rs.iter().map(|&v| v.sqrt() / (1.0 + v)).collect();
    let d3: Vec<f64> = (0..m)
        .map(|j| if j == 0 { f64::NAN } else { (rs[j - 1] * rs[j]).sqrt() / (1.0 + rs[j]) })
        .collect();
    for i in 0..m {
        let display = diag[i];
        let factored = 1.0 / (1.0 + rs[i]);
        debug_assert!((display - factored).abs() <= 1e-15);
        let _ = (display, factored);
    }
    for (i, &s) in sub1.iter().enumerate() {
        let factored = -params.delta * d2[i + 1];
        if (s - factored).abs() > 1e-15 * s.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "construction mismatch on subdiagonal 1 at {i}: {s} vs {factored}"
            )));
        }
    }
    for (i, &s) in sub2.iter().enumerate() {
        let factored = -params.eta * d3[i + 2];
        if (s - factored).abs() > 1e-15 * s.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "construction mismatch on subdiagonal 2 at {i}: {s} vs {factored}"
            )));
        }
    }
    Ok(LowerBand3Matrix { dim: m, diag, sub1, sub2 })
}

/// Hermitian part `S = (L + L^T)/2`; pentadiagonal symmetric.
pub fn symmetrize(l: &LowerBand3Matrix) -> DenseSymmetric {
    let mut s = DenseSymmetric::zeros(l.dim);
    for i in 0..l.dim {
        s.set(i, i, l.diag[i]);
        if i + 1 < l.dim {
            s.set(i, i + 1, 0.5 * l.sub1[i]);
        }
        if i + 2 < l.dim {
            s.set(i, i + 2, 0.5 * l.sub2[i]);
        }
    }
    s
}

/// First-order momentary approximation `Re(A_n + h B_n)` of dimension `n-1`
/// for a smooth grid map, with `h = 1/n`:
/// `A_n = (1/2)I - (delta/2)T(e^{i th}) - (eta/2)T(e^{2i th})` and
/// `B_n = diag(-psi''/psi' at (i-1)/n) * ((1/4)I + (eta/4)T(e^{2i th}))`.
pub fn build_momentary_matrix(
    map: &GridMap,
    n: usize,
    params: &SymbolParams,
) -> Result<DenseSymmetric> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let m = n - 1;
    let h = 1.0 / n as f64;
    let weights: Vec<f64> = (0..m)
        .map(|i| momentary_weight(map, i as f64 / n as f64))
        .collect::<Result<_>>()?;
    let mut s = DenseSymmetric::zeros(m);
    for i in 0..m {
        s.set(i, i, 0.5 + h * weights[i] * 0.25);
        if i + 1 < m {
            // A contributes -delta/2 on the first subdiagonal; symmetrizing halves it
            s.set(i, i + 1, -params.delta / 4.0);
        }
        if i >= 2 {
            let low = -params.eta / 2.0 + h * weights[i] * params.eta * 0.25;
            s.set(i - 2, i, 0.5 * low);
        }
    }
    Ok(s)
}

/// Spectral norm of `S - S_approx`, computed with the Jacobi eigensolver.
pub fn residual_spectral_gap(s: &DenseSymmetric, approx: &DenseSymmetric) -> Result<f64> {
    let diff = s.sub(approx)?;
    let sample = eigsolve::jacobi_eigenvalues(&diff, eigsolve::DEFAULT_TOL)?;
    let vals = sample.values();
    if vals.is_empty() {
        return Ok(0.0);
    }
    Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{eval_re_kappa, fourier_coefficients, PhiSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;

    fn defaults() -> SymbolParams {
        SymbolParams::default()
    }

    #[test]
    fn build_l_two_by_two() {
        let r = RatioSequence::new(vec![1.0, 1.0]).unwrap();
        let p = SymbolParams::new(1.0, -0.5).unwrap();
        let l = build_l(&r, &p).unwrap();
        assert_eq!(l.dim(), 2);
        assert_abs_diff_eq!(l.get(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(l.get(0, 1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.get(1, 0), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(l.get(1, 1), 0.5, epsilon = 1e-15);
        assert!(l.sub2().is_empty());
    }

    #[test]
    fn build_l_uniform_is_lower_toeplitz() {
        let p = defaults();
        let r = RatioSequence::constant(1.0, 9).unwrap();
        let l = build_l(&r, &p).unwrap();
        for &v in l.diag() {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        }
        for &v in l.sub1() {
            assert_abs_diff_eq!(v, -p.delta / 2.0, epsilon = 1e-15);
        }
        for &v in l.sub2() {
            assert_abs_diff_eq!(v, -p.eta / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn build_l_entrywise_oracle() {
        // independent evaluation of the display for r = (3, 5/3), delta = eta = 1
        let r = RatioSequence::new(vec![3.0, 5.0 / 3.0]).unwrap();
        let p = SymbolParams::new(1.0, 1.0).unwrap();
        let l = build_l(&r, &p).unwrap();
        assert_abs_diff_eq!(l.get(0, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(l.get(1, 1), 3.0 / 8.0, epsilon = 1e-15);
        let expect_21 = -(5.0f64 / 3.0).sqrt() / (8.0 / 3.0);
        assert_abs_diff_eq!(l.get(1, 0), expect_21, epsilon = 1e-15);
        assert_abs_diff_eq!(l.get(1, 0), -(5.0f64 / 3.0).sqrt() * (3.0 / 8.0), epsilon = 1e-15);
    }

    #[test]
    fn build_l_general_display_oracle() {
        // one more ratio pattern, checked entry by entry against the display
        let rs = [0.5, 2.0, 1.25, 0.8, 3.0];
        let p = SymbolParams::new(0.7, -0.3).unwrap();
        let l = build_l(&RatioSequence::new(rs.to_vec()).unwrap(), &p).unwrap();
        for k in 0..5 {
            assert_relative_eq!(l.get(k, k), 1.0 / (1.0 + rs[k]), max_relative = 1e-15);
        }
        for k in 1..5 {
            assert_relative_eq!(
                l.get(k, k - 1),
                -p.delta * rs[k].sqrt() / (1.0 + rs[k]),
                max_relative = 1e-15
            );
        }
        for k in 2..5 {
            assert_relative_eq!(
                l.get(k, k - 2),
                -p.eta * (rs[k - 1] * rs[k]).sqrt() / (1.0 + rs[k]),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn empty_ratios_rejected() {
        assert!(RatioSequence::new(vec![]).is_err());
    }

    #[test]
    fn symmetrize_diagonal_is_identity_op() {
        let r = RatioSequence::new(vec![1.0, 3.0, 0.5]).unwrap();
        let p = SymbolParams::new(0.0, 0.0).unwrap();
        let l = build_l(&r, &p).unwrap();
        let s = symmetrize(&l);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(s.get(i, j), l.get(i, j), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn symmetrize_transpose_invariant() {
        let r = RatioSequence::new(vec![0.5, 2.0, 1.25, 0.8, 3.0]).unwrap();
        let s = symmetrize(&build_l(&r, &defaults()).unwrap());
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
    }

    #[test]
    fn symmetrized_uniform_matches_fourier_toeplitz() {
        // halving the subdiagonals of L(1,...,1) gives T(Re kappa_1), whose
        // coefficients come from quadrature
        let p = defaults();
        let m = 200;
        let s = symmetrize(&build_l(&RatioSequence::constant(1.0, m).unwrap(), &p).unwrap());
        let coeffs: Vec<f64> = fourier_coefficients(
            |t| {
                Complex64::new(
                    eval_re_kappa(&p, &PhiSpec::Constant(1.0), 0.5, t).unwrap(),
                    0.0,
                )
            },
            2,
        )
        .iter()
        .map(|c| c.re)
        .collect();
        assert_abs_diff_eq!(coeffs[2], 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(coeffs[1], -p.delta / 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(coeffs[0], -p.eta / 4.0, epsilon = 1e-13);
        let t = build_toeplitz(&coeffs, 2, m).unwrap().to_dense_symmetric(1e-12).unwrap();
        assert!(s.max_abs_diff(&t).unwrap() <= 1e-13);
    }

    #[test]
    fn toeplitz_stencil_display() {
        let t = build_toeplitz(&[1.0, -4.0, 6.0, -4.0, 1.0], 2, 7).unwrap();
        for i in 0..7usize {
            for j in 0..7usize {
                let expect = match i as i64 - j as i64 {
                    0 => 6.0,
                    1 | -1 => -4.0,
                    2 | -2 => 1.0,
                    _ => 0.0,
                };
                assert_eq!(t.get(i, j), expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn toeplitz_scalar_is_identity_multiple() {
        let t = build_toeplitz(&[2.5], 0, 4).unwrap();
        for i in 0..4usize {
            for j in 0..4usize {
                assert_eq!(t.get(i, j), if i == j { 2.5 } else { 0.0 });
            }
        }
    }

    #[test]
    fn toeplitz_band_wider_than_dim_rejected() {
        assert!(build_toeplitz(&[1.0, 2.0, 3.0, 2.0, 1.0], 2, 2).is_err());
        assert!(build_toeplitz(&[1.0, 2.0], 2, 8).is_err());
        assert!(build_toeplitz(&[], 0, 8).is_err());
    }

    #[test]
    fn momentary_identity_map_equals_uniform_symmetrization() {
        let p = defaults();
        let n = 40;
        let m1 = build_momentary_matrix(&GridMap::Identity, n, &p).unwrap();
        let m2 = symmetrize(&build_l(&RatioSequence::constant(1.0, n - 1).unwrap(), &p).unwrap());
        assert_eq!(m1.max_abs_diff(&m2).unwrap(), 0.0);
    }

    #[test]
    fn momentary_eta_zero_touches_only_diagonal() {
        let p = SymbolParams::new(0.9672, 0.0).unwrap();
        let n = 24;
        let m1 = build_momentary_matrix(&GridMap::AffineQuadratic, n, &p).unwrap();
        let m2 = symmetrize(&build_l(&RatioSequence::constant(1.0, n - 1).unwrap(), &p).unwrap());
        let d = m1.sub(&m2).unwrap();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                if i != j {
                    assert_abs_diff_eq!(d.get(i, j), 0.0, epsilon = 1e-16);
                }
            }
        }
    }

    #[test]
    fn momentary_residual_is_second_order_entrywise() {
        // Taylor remainder oracle: max |entry| of S_n - momentary halves
        // twice when n doubles
        let p = defaults();
        let map = GridMap::AffineQuadratic;
        let gap = |n: usize| {
            let grid = crate::grid::mapped_grid(&map, n, 1.0).unwrap();
            let s = symmetrize(&build_l(&crate::grid::ratios_of(&grid), &p).unwrap());
            let m = build_momentary_matrix(&map, n, &p).unwrap();
            s.max_abs_diff(&m).unwrap()
        };
        let g64 = gap(64);
        let g128 = gap(128);
        let ratio = g64 / g128;
        assert!((3.0..5.0).contains(&ratio), "entrywise decay ratio {ratio}");
    }

    #[test]
    fn momentary_rejects_power_maps_with_flat_start() {
        let p = defaults();
        assert!(build_momentary_matrix(&GridMap::power(2.0).unwrap(), 16, &p).is_err());
        assert!(build_momentary_matrix(&GridMap::power(3.0).unwrap(), 16, &p).is_err());
    }

    #[test]
    fn residual_gap_zero_for_identical() {
        let p = defaults();
        let s = symmetrize(&build_l(&RatioSequence::constant(1.0, 30).unwrap(), &p).unwrap());
        assert_abs_diff_eq!(residual_spectral_gap(&s, &s).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn residual_gap_dimension_mismatch() {
        let p = defaults();
        let a = symmetrize(&build_l(&RatioSequence::constant(1.0, 10).unwrap(), &p).unwrap());
        let b = symmetrize(&build_l(&RatioSequence::constant(1.0, 11).unwrap(), &p).unwrap());
        assert!(residual_spectral_gap(&a, &b).is_err());
    }

    #[test]
    fn dense_symmetric_packing() {
        let m = DenseSymmetric::from_fn(4, |i, j| (i * 10 + j) as f64);
        for i in 0..4 {
            for j in i..4 {
                assert_eq!(m.get(i, j), (i * 10 + j) as f64);
                assert_eq!(m.get(j, i), (i * 10 + j) as f64);
            }
        }
        assert_eq!(m.trace(), 0.0 + 11.0 + 22.0 + 33.0);
    }

    #[test]
    fn diag_sampling_canonical_grid() {
        let d = DiagSampling::sample(|x| x * x, 4);
        assert_eq!(d.dim(), 4);
        assert_abs_diff_eq!(d.values()[0], 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.values()[3], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coo_csv_round_trip_shape() {
        let r = RatioSequence::new(vec![1.0, 2.0, 0.5]).unwrap();
        let l = build_l(&r, &defaults()).unwrap();
        let csv = l.to_coo_csv();
        assert!(csv.starts_with("# schema vartoeplitz.matrix-coo.v1\n"));
        // 3 diag + 2 sub1 + 1 sub2 entries plus two header lines
        assert_eq!(csv.lines().count(), 2 + 6);
    }
}

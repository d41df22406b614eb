//! Distribution tests: eigenvalue/singular-value clouds against symbol
//! samplings, the negative-eigenvalue counting law, and extreme-eigenvalue
//! convergence studies.
//!
//! The Weyl-type limit relations are operationalized as quantile
//! (rearrangement) comparisons between two sorted multisets: the computed
//! spectrum and a sorted symbol sampling resampled to the same length.

use std::fmt::Write as _;

use serde::Serialize;

use crate::eigsolve::{self, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::grid::RatioSequence;
use crate::matrix::{build_l, symmetrize};
use crate::symbol::{
    extrema_on_interval, negative_level_measure, sample_symbol, PhiSpec, SymbolParams, SymbolPart,
};

/// Outcome of one spectrum-vs-symbol comparison.
#[derive(Debug, Clone)]
pub struct DistributionReport {
    pub n: usize,
    pub dim: usize,
    pub quantile_l1: f64,
    pub quantile_sup: f64,
    /// Distances non-increasing along the study (10% slack) and below the
    /// threshold schedule when one is given.
    pub passed: bool,
    pub symbol_id: String,
    pub part: SymbolPart,
}

/// Linear interpolation of the quantile function of a sorted sample,
/// evaluated at `k` midpoints `(j - 1/2)/k`.
pub fn resample_quantiles(sorted: &[f64], k: usize) -> Vec<f64> {
    let m = sorted.len();
    let mut out = Vec::with_capacity(k);
    for j in 1..=k {
        let p = (j as f64 - 0.5) / k as f64;
        let h = p * m as f64 - 0.5;
        let v = if h <= 0.0 {
            sorted[0]
        } else if h >= (m - 1) as f64 {
            sorted[m - 1]
        } else {
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
        };
        out.push(v);
    }
    out
}

/// Mean and maximum absolute gap between two sorted samples; `b` is
/// resampled by quantile interpolation when the lengths differ.
pub fn quantile_distance(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("quantile distance of an empty sample".into()));
    }
    let resampled;
    let b = if b.len() == a.len() {
        b
    } else {
        resampled = resample_quantiles(b, a.len());
        &resampled[..]
    };
    let mut l1 = 0.0;
    let mut sup: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        l1 += d;
        sup = sup.max(d);
    }
    Ok((l1 / a.len() as f64, sup))
}

/// Tensor-grid sizes for symbol sampling with 16x oversampling. All the
/// budget goes into the theta direction when the profile is constant in x.
pub fn sampling_dims(phi: &PhiSpec, n: usize) -> (usize, usize) {
    if phi.constant_value().is_some() {
        (1, 16 * n)
    } else {
        let g = (4.0 * (n as f64).sqrt()).ceil() as usize;
        (g, g)
    }
}

fn ratios_from_phi(phi: &PhiSpec, n: usize) -> Result<RatioSequence> {
    let vals: Vec<f64> = (2..=n).map(|i| phi.eval(i as f64 / n as f64)).collect();
    RatioSequence::new(vals).map_err(|e| {
        Error::InvalidArgument(format!("phi {} does not yield valid ratios: {e}", phi.id()))
    })
}

/// Runs `f` for every n, one thread per n, preserving input order.
fn par_over_ns<T, F>(ns: &[usize], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = ns.iter().map(|&n| scope.spawn(move || f(n))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("distribution worker panicked"))
            .collect()
    })
}

fn mark_passed(reports: &mut [DistributionReport], thresholds: Option<&[f64]>) {
    let mut prev = f64::INFINITY;
    for (i, r) in reports.iter_mut().enumerate() {
        let monotone = r.quantile_l1 <= 1.1 * prev;
        let below = thresholds.map_or(true, |t| r.quantile_l1 <= t[i]);
        r.passed = monotone && below;
        prev = r.quantile_l1;
    }
}

fn distribution_test(
    phi: &PhiSpec,
    params: &SymbolParams,
    ns: &[usize],
    thresholds: Option<&[f64]>,
    part: SymbolPart,
) -> Result<Vec<DistributionReport>> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("empty n list".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n list must be strictly increasing".into()));
    }
    if let Some(t) = thresholds {
        if t.len() != ns.len() {
            return Err(Error::DimensionMismatch { expected: ns.len(), got: t.len() });
        }
    }
    let mut reports = par_over_ns(ns, |n| {
        let ratios = ratios_from_phi(phi, n)?;
        let l = build_l(&ratios, params)?;
        let spectrum = match part {
            SymbolPart::RealPart => eigsolve::jacobi_eigenvalues(&symmetrize(&l), DEFAULT_TOL)?,
            SymbolPart::Modulus => eigsolve::singular_values(&l, DEFAULT_TOL)?,
        };
        let (gx, gt) = sampling_dims(phi, n);
        let symbol = sample_symbol(params, phi, gx, gt, part)?;
        let (l1, sup) = quantile_distance(spectrum.values(), &symbol)?;
        Ok(DistributionReport {
            n,
            dim: n - 1,
            quantile_l1: l1,
            quantile_sup: sup,
            passed: false,
            symbol_id: phi.id(),
            part,
        })
    })?;
    mark_passed(&mut reports, thresholds);
    Ok(reports)
}

/// Eigenvalues of `S_n` against sorted `Re(kappa)` samples for each n.
pub fn eigen_distribution_test(
    phi: &PhiSpec,
    params: &SymbolParams,
    ns: &[usize],
    thresholds: Option<&[f64]>,
) -> Result<Vec<DistributionReport>> {
    distribution_test(phi, params, ns, thresholds, SymbolPart::RealPart)
}

/// Singular values of `L_n` against sorted `|kappa|` samples for each n.
pub fn singular_distribution_test(
    phi: &PhiSpec,
    params: &SymbolParams,
    ns: &[usize],
    thresholds: Option<&[f64]>,
) -> Result<Vec<DistributionReport>> {
    distribution_test(phi, params, ns, thresholds, SymbolPart::Modulus)
}

/// One row of the negative-eigenvalue counting law study.
#[derive(Debug, Clone)]
pub struct CountLawRow {
    pub n: usize,
    pub count: usize,
    /// `n * mu / pi` with `mu` the negative level-set measure of the symbol.
    pub predicted: f64,
    pub gap: f64,
}

/// Counts `lambda_j(S_n(r)) < 0` against the symbol prediction for a
/// constant-ratio family.
pub fn negative_count_law(
    r: f64,
    params: &SymbolParams,
    ns: &[usize],
) -> Result<Vec<CountLawRow>> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("empty n list".into()));
    }
    let mu = negative_level_measure(params, r)?;
    par_over_ns(ns, |n| {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
        }
        let ratios = RatioSequence::constant(r, n - 1)?;
        let s = symmetrize(&build_l(&ratios, params)?);
        let eig = eigsolve::jacobi_eigenvalues(&s, DEFAULT_TOL)?;
        let count = eig.values().iter().filter(|&&v| v < 0.0).count();
        let predicted = n as f64 * mu / std::f64::consts::PI;
        Ok(CountLawRow { n, count, predicted, gap: (count as f64 - predicted).abs() })
    })
}

/// Per-n extreme eigenvalues of the stationary family.
#[derive(Debug, Clone)]
pub struct ExtremeStudyRow {
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Result of the extreme-eigenvalue convergence study at uniform ratios.
#[derive(Debug, Clone)]
pub struct ExtremeStudy {
    pub rows: Vec<ExtremeStudyRow>,
    /// Fitted order of `lambda_min -> m`.
    pub order_min: f64,
    /// Fitted order of `M -> lambda_max`.
    pub order_max: f64,
    /// Essential infimum of the symbol.
    pub symbol_min: f64,
    /// Essential supremum of the symbol.
    pub symbol_max: f64,
}

/// Convergence orders of `lambda_min(S_n) -> m` and `lambda_max(S_n) -> M`
/// for uniform ratios; needs at least 3 values of n for the fit.
pub fn extreme_convergence_study(params: &SymbolParams, ns: &[usize]) -> Result<ExtremeStudy> {
    let extrema = extrema_on_interval(params, 1.0)?;
    let rows = par_over_ns(ns, |n| {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
        }
        let ratios = RatioSequence::constant(1.0, n - 1)?;
        let s = symmetrize(&build_l(&ratios, params)?);
        let (lambda_min, lambda_max) = eigsolve::min_max_eig(&s)?;
        Ok(ExtremeStudyRow { n, lambda_min, lambda_max })
    })?;
    let err_min: Vec<f64> = rows.iter().map(|r| r.lambda_min - extrema.min).collect();
    let err_max: Vec<f64> = rows.iter().map(|r| extrema.max - r.lambda_max).collect();
    let order_min = eigsolve::fit_convergence_order(ns, &err_min)?;
    let order_max = eigsolve::fit_convergence_order(ns, &err_max)?;
    Ok(ExtremeStudy {
        rows,
        order_min,
        order_max,
        symbol_min: extrema.min,
        symbol_max: extrema.max,
    })
}

/// Flat row shared by every study export; unused fields stay empty.
#[derive(Debug, Clone, Serialize, Default)]
pub struct ReportRow {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
}

impl DistributionReport {
    pub fn to_row(&self) -> ReportRow {
        ReportRow {
            n: self.n,
            l1: Some(self.quantile_l1),
            sup: Some(self.quantile_sup),
            ..ReportRow::default()
        }
    }
}

impl CountLawRow {
    pub fn to_row(&self) -> ReportRow {
        ReportRow {
            n: self.n,
            count: Some(self.count),
            predicted: Some(self.predicted),
            ..ReportRow::default()
        }
    }
}

impl ExtremeStudyRow {
    pub fn to_row(&self) -> ReportRow {
        ReportRow {
            n: self.n,
            lambda_min: Some(self.lambda_min),
            lambda_max: Some(self.lambda_max),
            ..ReportRow::default()
        }
    }
}

/// JSON export: `{"schema": "vartoeplitz.report.v1", "rows": [...]}`.
pub fn rows_to_json(rows: &[ReportRow]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        schema: &'static str,
        rows: &'a [ReportRow],
    }
    serde_json::to_string_pretty(&Doc { schema: "vartoeplitz.report.v1", rows })
        .expect("report serialization cannot fail")
}

/// CSV export with the fixed column order
/// `n,l1,sup,count,predicted,lambda_min,lambda_max`.
pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out =
        String::from("# schema vartoeplitz.report.v1\nn,l1,sup,count,predicted,lambda_min,lambda_max\n");
    fn field<T: std::fmt::Display>(v: &Option<T>) -> String {
        v.as_ref().map(|x| x.to_string()).unwrap_or_default()
    }
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            field(&r.l1),
            field(&r.sup),
            field(&r.count),
            field(&r.predicted),
            field(&r.lambda_min),
            field(&r.lambda_max)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantile_distance_identical() {
        let a = [0.5, 1.0, 2.0];
        let (l1, sup) = quantile_distance(&a, &a).unwrap();
        assert_eq!((l1, sup), (0.0, 0.0));
    }

    #[test]
    fn quantile_distance_constant_shift() {
        let (l1, sup) = quantile_distance(&[0.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!((l1, sup), (1.0, 1.0));
    }

    #[test]
    fn quantile_distance_rejects_empty() {
        assert!(quantile_distance(&[], &[1.0]).is_err());
        assert!(quantile_distance(&[1.0], &[]).is_err());
    }

    #[test]
    fn resampling_preserves_duplicated_sample() {
        let a = [1.0, 2.0];
        let b = [1.0, 1.0, 2.0, 2.0];
        let (l1, sup) = quantile_distance(&a, &b).unwrap();
        assert_abs_diff_eq!(l1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sup, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn resample_same_length_is_identity() {
        let v = [0.1, 0.4, 0.9, 1.3];
        assert_eq!(resample_quantiles(&v, 4), v.to_vec());
    }

    #[test]
    fn eigen_test_exact_for_scaled_identity() {
        // phi = 1 with delta = eta = 0: S_n = I/2 and the symbol is 1/2
        let params = SymbolParams::new(0.0, 0.0).unwrap();
        let reports =
            eigen_distribution_test(&PhiSpec::Constant(1.0), &params, &[20, 40], None).unwrap();
        for r in &reports {
            assert_abs_diff_eq!(r.quantile_l1, 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!(r.quantile_sup, 0.0, epsilon = 1e-13);
            assert!(r.passed);
        }
    }

    #[test]
    fn singular_test_diagonal_case() {
        // delta = eta = 0: singular values are exactly the diagonal entries
        let params = SymbolParams::new(0.0, 0.0).unwrap();
        let reports =
            singular_distribution_test(&PhiSpec::XSquared, &params, &[80, 160], None).unwrap();
        assert!(reports[0].quantile_l1 < 0.01, "l1 = {}", reports[0].quantile_l1);
        assert!(reports[1].quantile_l1 <= 1.1 * reports[0].quantile_l1);
        for r in &reports {
            assert!(r.passed);
        }
    }

    #[test]
    fn eigen_test_requires_increasing_ns() {
        let params = SymbolParams::default();
        assert!(eigen_distribution_test(&PhiSpec::Constant(1.0), &params, &[40, 40], None)
            .is_err());
        assert!(eigen_distribution_test(&PhiSpec::Constant(1.0), &params, &[], None).is_err());
    }

    #[test]
    fn threshold_schedule_is_applied() {
        let params = SymbolParams::new(0.0, 0.0).unwrap();
        let reports = eigen_distribution_test(
            &PhiSpec::Constant(1.0),
            &params,
            &[20, 40],
            Some(&[-1.0, -1.0]),
        )
        .unwrap();
        // distances are exactly zero but the impossible thresholds fail them
        assert!(reports.iter().all(|r| !r.passed));
    }

    #[test]
    fn count_law_zero_for_positive_symbol() {
        let params = SymbolParams::default();
        let rows = negative_count_law(1.0, &params, &[32, 64]).unwrap();
        for row in rows {
            assert_eq!(row.count, 0);
            assert_eq!(row.predicted, 0.0);
        }
    }

    #[test]
    fn count_law_tracks_prediction() {
        let params = SymbolParams::default();
        let rows = negative_count_law(2.5, &params, &[64, 128]).unwrap();
        for row in rows {
            assert!(row.count > 0);
            assert!(row.gap <= 4.0, "n={}: gap {}", row.n, row.gap);
        }
    }

    #[test]
    fn extreme_study_orders_and_bounds() {
        let params = SymbolParams::default();
        let study = extreme_convergence_study(&params, &[32, 64, 128, 256]).unwrap();
        assert_abs_diff_eq!(study.order_min, 2.0, epsilon = 0.3);
        assert_abs_diff_eq!(study.order_max, 2.0, epsilon = 0.3);
        let mut prev_min = f64::INFINITY;
        let mut prev_max = f64::NEG_INFINITY;
        for row in &study.rows {
            assert!(row.lambda_min > study.symbol_min);
            assert!(row.lambda_max < study.symbol_max);
            assert!(row.lambda_min <= prev_min + 1e-12);
            assert!(row.lambda_max >= prev_max - 1e-12);
            prev_min = row.lambda_min;
            prev_max = row.lambda_max;
        }
    }

    #[test]
    fn report_rows_serialize_with_fixed_columns() {
        let rows = vec![
            ReportRow { n: 8, l1: Some(0.5), sup: Some(1.0), ..ReportRow::default() },
            ReportRow { n: 16, count: Some(3), predicted: Some(2.5), ..ReportRow::default() },
        ];
        let csv = rows_to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "n,l1,sup,count,predicted,lambda_min,lambda_max");
        assert_eq!(lines[2], "8,0.5,1,,,,");
        assert_eq!(lines[3], "16,,,3,2.5,,");
        let json = rows_to_json(&rows);
        assert!(json.contains("\"schema\": \"vartoeplitz.report.v1\""));
        assert!(json.contains("\"count\": 3"));
        assert!(!json.contains("lambda_min"));
    }
}

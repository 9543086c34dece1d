//! Reduction of count scans to expectation values and the final report.
//!
//! The fringe frequency is fixed by the physics at one cycle per 2π of the
//! phase shifter, so the sinusoid fit is linear in (mean, a·cos, b·sin) and
//! is solved through the weighted normal equations with Poisson weights.
//! Count rates at the evaluation settings come from the fitted model, and
//! the two ratio estimators propagate the full fit covariance.

use crate::apparatus::{ApparatusConfig, ScanData, ScanKind, SpinAnalysis};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("fit needs at least 8 points, got {points}")]
    TooFewPoints { points: usize },
    #[error("fit needs at least 3 distinct phase settings, got {distinct}")]
    TooFewSettings { distinct: usize },
    #[error("negative counts in fit input")]
    NegativeCounts,
    #[error("degenerate settings grid: normal equations are singular")]
    DegenerateGrid,
    #[error("estimator denominator is not positive ({denominator})")]
    NonpositiveDenominator { denominator: f64 },
    #[error("estimate {value} is implausible for reported uncertainty {sigma}")]
    ImplausibleEstimate { value: f64, sigma: f64 },
    #[error("cannot aggregate an empty estimate list")]
    EmptyAggregate,
    #[error("cannot aggregate estimates with different labels")]
    MixedLabels,
    #[error("missing scans: {what}")]
    MissingScans { what: String },
}

/// Result of the fixed-frequency sinusoid fit mean + amplitude·cos(χ + phase).
///
/// `covariance` is in (mean, amplitude, phase) order; when the fitted
/// amplitude is consistent with zero, the phase is undefined and its
/// variance is reported as infinite. `linear` holds the equivalent
/// (mean, cos-coefficient, sin-coefficient) solution whose covariance
/// `linear_covariance` stays finite in every case and drives all model
/// evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub mean: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub covariance: [[f64; 3]; 3],
    /// Residual chi-squared per degree of freedom.
    pub goodness: f64,
    pub linear: [f64; 3],
    pub linear_covariance: [[f64; 3]; 3],
}

fn invert3(s: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1])
        - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
        + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0]);
    let scale = s
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if det.abs() <= 1e-12 * scale.powi(3).max(f64::MIN_POSITIVE) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            let (c, d) = ((j + 1) % 3, (j + 2) % 3);
            // Cofactor expansion; transposition is implicit in the index swap.
            inv[j][i] = (s[a][c] * s[b][d] - s[a][d] * s[b][c]) / det;
        }
    }
    Some(inv)
}

fn quad_form3(c: &[[f64; 3]; 3], x: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += x[i] * c[i][j] * x[j];
        }
    }
    acc
}

/// Weighted least-squares fit of `counts = mean + a·cos χ + b·sin χ` with
/// per-point variance max(counts, 1).
pub fn fit_sinusoid_points(points: &[(f64, f64)]) -> Result<SinusoidFit, AnalysisError> {
    let n = points.len();
    if n < 8 {
        return Err(AnalysisError::TooFewPoints { points: n });
    }
    if points.iter().any(|(_, c)| *c < 0.0 || !c.is_finite()) {
        return Err(AnalysisError::NegativeCounts);
    }
    let mut distinct: Vec<f64> = Vec::new();
    for (chi, _) in points {
        let reduced = chi.rem_euclid(2.0 * PI);
        let seen = distinct
            .iter()
            .any(|d| (d - reduced).abs() < 1e-9 || (d - reduced).abs() > 2.0 * PI - 1e-9);
        if !seen {
            distinct.push(reduced);
        }
    }
    if distinct.len() < 3 {
        return Err(AnalysisError::TooFewSettings {
            distinct: distinct.len(),
        });
    }

    let mut normal = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (chi, counts) in points {
        let w = 1.0 / counts.max(1.0);
        let x = [1.0, chi.cos(), chi.sin()];
        for i in 0..3 {
            rhs[i] += w * counts * x[i];
            for j in 0..3 {
                normal[i][j] += w * x[i] * x[j];
            }
        }
    }
    let linear_covariance = invert3(&normal).ok_or(AnalysisError::DegenerateGrid)?;
    let mut linear = [0.0; 3];
    for i in 0..3 {
        linear[i] = (0..3).map(|j| linear_covariance[i][j] * rhs[j]).sum();
    }

    let mut chi_sq = 0.0;
    for (chi, counts) in points {
        let x = [1.0, chi.cos(), chi.sin()];
        let model: f64 = (0..3).map(|i| linear[i] * x[i]).sum();
        chi_sq += (counts - model).powi(2) / counts.max(1.0);
    }
    let goodness = chi_sq / (n - 3) as f64;

    let (mean, a, b) = (linear[0], linear[1], linear[2]);
    let amplitude = a.hypot(b);
    let (phase, covariance) = if amplitude > 1e-12 * (1.0 + mean.abs()) {
        let phase = (-b).atan2(a);
        // Jacobian of (mean, amplitude, phase) w.r.t. (mean, a, b).
        let jac = [
            [1.0, 0.0, 0.0],
            [0.0, a / amplitude, b / amplitude],
            [0.0, b / (amplitude * amplitude), -a / (amplitude * amplitude)],
        ];
        let mut cov = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += jac[i][k] * linear_covariance[k][l] * jac[j][l];
                    }
                }
                cov[i][j] = acc;
            }
        }
        (phase, cov)
    } else {
        // Amplitude consistent with zero: the phase is undefined.
        let mut cov = [[0.0; 3]; 3];
        cov[0][0] = linear_covariance[0][0];
        cov[1][1] = linear_covariance[1][1].max(linear_covariance[2][2]);
        cov[2][2] = f64::INFINITY;
        (0.0, cov)
    };

    Ok(SinusoidFit {
        mean,
        amplitude,
        phase,
        covariance,
        goodness,
        linear,
        linear_covariance,
    })
}

/// Fits one scan's points.
pub fn fit_sinusoid(scan: &ScanData) -> Result<SinusoidFit, AnalysisError> {
    let points: Vec<(f64, f64)> = scan.points.iter().map(|p| (p.chi, p.counts)).collect();
    fit_sinusoid_points(&points)
}

/// Fitted count rate and its standard error at a phase setting.
pub fn counts_at(fit: &SinusoidFit, chi: f64) -> (f64, f64) {
    let x = [1.0, chi.cos(), chi.sin()];
    let value: f64 = (0..3).map(|i| fit.linear[i] * x[i]).sum();
    let variance = quad_form3(&fit.linear_covariance, &x);
    (value, variance.max(0.0).sqrt())
}

/// Model evaluations at two settings of the same fit, with their joint 2×2
/// covariance; the shared fit parameters correlate the two values.
fn evaluate_pair(fit: &SinusoidFit, chi_a: f64, chi_b: f64) -> (f64, f64, [[f64; 2]; 2]) {
    let xa = [1.0, chi_a.cos(), chi_a.sin()];
    let xb = [1.0, chi_b.cos(), chi_b.sin()];
    let va: f64 = (0..3).map(|i| fit.linear[i] * xa[i]).sum();
    let vb: f64 = (0..3).map(|i| fit.linear[i] * xb[i]).sum();
    let mut cov = [[0.0; 2]; 2];
    let xs = [xa, xb];
    for (r, xr) in xs.iter().enumerate() {
        for (s, xsv) in xs.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    acc += xr[i] * fit.linear_covariance[i][j] * xsv[j];
                }
            }
            cov[r][s] = acc;
        }
    }
    (va, vb, cov)
}

fn quad_form2(c: &[[f64; 2]; 2], g: &[f64; 2]) -> f64 {
    g[0] * c[0][0] * g[0] + 2.0 * g[0] * c[0][1] * g[1] + g[1] * c[1][1] * g[1]
}

/// Which term of the three-term inequality an estimate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermLabel {
    /// ⟨σx ⊗ σx⟩ from the α ∈ {0, π} joint scans.
    SpinPathX,
    /// ⟨σy ⊗ σy⟩ from the α ∈ {π/2, 3π/2} joint scans.
    SpinPathY,
    /// The product observable pair from the discrimination scans.
    ProductPair,
}

impl std::fmt::Display for TermLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TermLabel::SpinPathX => "E_xx",
            TermLabel::SpinPathY => "E_yy",
            TermLabel::ProductPair => "E_pair",
        })
    }
}

/// An expectation value with its standard error.
///
/// Statistical excursions slightly past ±1 are tolerated up to 3σ; values
/// are clamped to the physical range when they enter a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub sigma: f64,
    pub label: TermLabel,
}

impl ExpectationEstimate {
    pub fn new(value: f64, sigma: f64, label: TermLabel) -> Result<Self, AnalysisError> {
        let sigma_valid = sigma.is_finite() && sigma >= 0.0;
        if !sigma_valid || !value.is_finite() || value.abs() > 1.0 + 3.0 * sigma {
            return Err(AnalysisError::ImplausibleEstimate { value, sigma });
        }
        Ok(Self { value, sigma, label })
    }

    /// Value clamped to the physical range [−1, 1].
    pub fn reported_value(&self) -> f64 {
        self.value.clamp(-1.0, 1.0)
    }
}

/// Ratio estimator over the four joint-projection count rates
/// [N(α,χ) + N(α+π,χ+π) − N(α+π,χ) − N(α,χ+π)] / (sum), with the rates
/// taken from the two fitted curves at α and α + π.
///
/// The α dependence is entirely carried by which fits are passed in; the
/// angle itself is kept in the signature to document the pairing contract.
pub fn expectation_spin_path(
    fit_alpha: &SinusoidFit,
    fit_alpha_pi: &SinusoidFit,
    _alpha: f64,
    chi: f64,
    label: TermLabel,
) -> Result<ExpectationEstimate, AnalysisError> {
    let (n1, n2, cov_n) = evaluate_pair(fit_alpha, chi, chi + PI);
    let (m1, m2, cov_m) = evaluate_pair(fit_alpha_pi, chi, chi + PI);
    let numerator = n1 + m2 - m1 - n2;
    let denominator = n1 + n2 + m1 + m2;
    if denominator <= 0.0 {
        return Err(AnalysisError::NonpositiveDenominator { denominator });
    }
    let value = numerator / denominator;
    let d_same = (denominator - numerator) / denominator.powi(2);
    let d_opposite = -(denominator + numerator) / denominator.powi(2);
    // n1 enters with +, n2 with −; m1 with −, m2 with +.
    let variance =
        quad_form2(&cov_n, &[d_same, d_opposite]) + quad_form2(&cov_m, &[d_opposite, d_same]);
    ExpectationEstimate::new(value, variance.max(0.0).sqrt(), label)
}

/// Ratio estimator of the pair-discrimination scans: up-channel rates at
/// χ = ±π/2 minus down-channel rates at χ = ±π/2 over the total.
pub fn expectation_bell(
    fit_down: &SinusoidFit,
    fit_up: &SinusoidFit,
) -> Result<ExpectationEstimate, AnalysisError> {
    let (u1, u2, cov_u) = evaluate_pair(fit_up, FRAC_PI_2, -FRAC_PI_2);
    let (d1, d2, cov_d) = evaluate_pair(fit_down, FRAC_PI_2, -FRAC_PI_2);
    let numerator = u1 + u2 - d1 - d2;
    let denominator = u1 + u2 + d1 + d2;
    if denominator <= 0.0 {
        return Err(AnalysisError::NonpositiveDenominator { denominator });
    }
    let value = numerator / denominator;
    let d_up = (denominator - numerator) / denominator.powi(2);
    let d_down = -(denominator + numerator) / denominator.powi(2);
    let variance = quad_form2(&cov_u, &[d_up, d_up]) + quad_form2(&cov_d, &[d_down, d_down]);
    ExpectationEstimate::new(value, variance.max(0.0).sqrt(), TermLabel::ProductPair)
}

/// Combines repeated measurements of one term: inverse-variance weighted
/// mean, with the reported uncertainty never smaller than the run-to-run
/// standard error, so slow drifts show up in the error bar.
pub fn aggregate_runs(
    estimates: &[ExpectationEstimate],
) -> Result<ExpectationEstimate, AnalysisError> {
    let first = estimates.first().ok_or(AnalysisError::EmptyAggregate)?;
    if estimates.iter().any(|e| e.label != first.label) {
        return Err(AnalysisError::MixedLabels);
    }
    if estimates.len() == 1 {
        return Ok(*first);
    }
    let n = estimates.len() as f64;
    let (value, propagated) = if estimates.iter().any(|e| e.sigma == 0.0) {
        // Exact inputs dominate an inverse-variance average.
        let exact: Vec<f64> = estimates
            .iter()
            .filter(|e| e.sigma == 0.0)
            .map(|e| e.value)
            .collect();
        (exact.iter().sum::<f64>() / exact.len() as f64, 0.0)
    } else {
        let weight_sum: f64 = estimates.iter().map(|e| e.sigma.powi(-2)).sum();
        let value = estimates
            .iter()
            .map(|e| e.value * e.sigma.powi(-2))
            .sum::<f64>()
            / weight_sum;
        (value, weight_sum.sqrt().recip())
    };
    let mean: f64 = estimates.iter().map(|e| e.value).sum::<f64>() / n;
    let scatter_se = (estimates
        .iter()
        .map(|e| (e.value - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0)
        / n)
        .sqrt();
    ExpectationEstimate::new(value, propagated.max(scatter_se), first.label)
}

/// The evaluated three-term inequality with its uncertainty budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    /// The three term estimates, clamped to the physical range.
    pub terms: Vec<ExpectationEstimate>,
    /// −E_xx − E_yy − E_pair.
    pub total: f64,
    /// Quadrature sum of the term uncertainties (independent scans).
    pub total_sigma: f64,
    /// The noncontextual bound, 1.
    pub bound: f64,
    /// (total − bound) / total_sigma.
    pub significance: f64,
    pub config: Option<ApparatusConfig>,
    pub seed: Option<u64>,
}

/// Evaluates −E_xx − E_yy − E_pair against the noncontextual bound 1.
///
/// With all-zero uncertainties the significance is ±∞, which JSON encodes
/// as null; fitted pipelines always carry positive uncertainties.
pub fn evaluate_inequality4(
    e_xx: ExpectationEstimate,
    e_yy: ExpectationEstimate,
    e_pair: ExpectationEstimate,
) -> InequalityReport {
    let clamp = |e: ExpectationEstimate| ExpectationEstimate {
        value: e.reported_value(),
        ..e
    };
    let terms = vec![clamp(e_xx), clamp(e_yy), clamp(e_pair)];
    let total: f64 = terms.iter().map(|e| -e.value).sum();
    let total_sigma = terms
        .iter()
        .map(|e| e.sigma.powi(2))
        .sum::<f64>()
        .sqrt();
    let bound = 1.0;
    let significance = (total - bound) / total_sigma;
    InequalityReport {
        terms,
        total,
        total_sigma,
        bound,
        significance,
        config: None,
        seed: None,
    }
}

impl InequalityReport {
    pub fn with_provenance(mut self, config: ApparatusConfig) -> Self {
        self.seed = Some(config.rng_seed);
        self.config = Some(config);
        self
    }

    /// Plain-text summary, one line per term plus the verdict.
    pub fn text_summary(&self) -> String {
        let mut out = String::new();
        for term in &self.terms {
            out.push_str(&format!(
                "{} = {:+.4} ± {:.4}\n",
                term.label, term.value, term.sigma
            ));
        }
        out.push_str(&format!(
            "total = {:.4} ± {:.4} (noncontextual bound {})\n",
            self.total, self.total_sigma, self.bound
        ));
        out.push_str(&format!(
            "violation significance: {:.1} standard deviations\n",
            self.significance
        ));
        out
    }
}

/// One fitted scan, kept for plotting and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub kind: ScanKind,
    pub run: u32,
    pub fit: SinusoidFit,
}

/// Full analysis result: the report, per-repetition estimates, the fitted
/// curves, and any per-scan problems that did not abort the analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentAnalysis {
    pub report: InequalityReport,
    pub per_run: Vec<Vec<ExpectationEstimate>>,
    pub fits: Vec<FitRecord>,
    pub issues: Vec<String>,
}

fn alpha_matches(alpha: f64, target: f64) -> bool {
    (alpha - target).abs() < 1e-9
}

/// The three term estimates of one repetition, or `None` when a required
/// fit is missing.
fn repetition_estimates(
    fits: &[Option<SinusoidFit>],
) -> Result<Option<Vec<ExpectationEstimate>>, AnalysisError> {
    let (Some(a0), Some(api), Some(ah), Some(a3h), Some(down), Some(up)) =
        (&fits[0], &fits[1], &fits[2], &fits[3], &fits[4], &fits[5])
    else {
        return Ok(None);
    };
    let e_xx = expectation_spin_path(a0, api, 0.0, 0.0, TermLabel::SpinPathX)?;
    let e_yy = expectation_spin_path(ah, a3h, FRAC_PI_2, FRAC_PI_2, TermLabel::SpinPathY)?;
    let e_pair = expectation_bell(down, up)?;
    Ok(Some(vec![e_xx, e_yy, e_pair]))
}

/// Runs the full reduction over a scan set: groups the six standard curves
/// by repetition, fits them, forms the three term estimates per repetition,
/// aggregates across repetitions and evaluates the inequality.
///
/// Scans that fail to fit are reported in `issues` and their repetition is
/// skipped; the analysis fails only if no complete repetition remains.
pub fn analyze_experiment(scans: &[ScanData]) -> Result<ExperimentAnalysis, AnalysisError> {
    let mut groups: [Vec<&ScanData>; 6] = Default::default();
    let mut issues = Vec::new();
    for scan in scans {
        let slot = match scan.kind {
            ScanKind::SpinPath { alpha } if alpha_matches(alpha, 0.0) => Some(0),
            ScanKind::SpinPath { alpha } if alpha_matches(alpha, PI) => Some(1),
            ScanKind::SpinPath { alpha } if alpha_matches(alpha, FRAC_PI_2) => Some(2),
            ScanKind::SpinPath { alpha } if alpha_matches(alpha, 3.0 * FRAC_PI_2) => Some(3),
            ScanKind::BellDiscrimination {
                analysis: SpinAnalysis::Down,
            } => Some(4),
            ScanKind::BellDiscrimination {
                analysis: SpinAnalysis::Up,
            } => Some(5),
            ScanKind::SpinPath { alpha } => {
                issues.push(format!(
                    "run {}: spin/path scan at α = {alpha} is not used by the inequality",
                    scan.run
                ));
                None
            }
        };
        if let Some(slot) = slot {
            groups[slot].push(scan);
        }
    }
    let group_names = [
        "spin/path α=0",
        "spin/path α=π",
        "spin/path α=π/2",
        "spin/path α=3π/2",
        "discrimination down",
        "discrimination up",
    ];
    for group in groups.iter_mut() {
        group.sort_by_key(|s| s.run);
    }
    let repetitions = groups.iter().map(|g| g.len()).min().unwrap_or(0);
    if repetitions == 0 {
        let missing: Vec<&str> = groups
            .iter()
            .zip(group_names)
            .filter(|(g, _)| g.is_empty())
            .map(|(_, name)| name)
            .collect();
        return Err(AnalysisError::MissingScans {
            what: missing.join(", "),
        });
    }
    if groups.iter().any(|g| g.len() != repetitions) {
        issues.push(format!(
            "unbalanced scan set; only the first {repetitions} repetitions per curve are used"
        ));
    }

    let mut fits = Vec::new();
    let mut per_run = Vec::new();
    let mut xx_estimates = Vec::new();
    let mut yy_estimates = Vec::new();
    let mut pair_estimates = Vec::new();
    for rep in 0..repetitions {
        let mut rep_fits: Vec<Option<SinusoidFit>> = Vec::with_capacity(6);
        for (slot, group) in groups.iter().enumerate() {
            let scan = group[rep];
            match fit_sinusoid(scan) {
                Ok(fit) => {
                    fits.push(FitRecord {
                        kind: scan.kind,
                        run: scan.run,
                        fit: fit.clone(),
                    });
                    rep_fits.push(Some(fit));
                }
                Err(err) => {
                    issues.push(format!(
                        "run {} ({}): {err}",
                        scan.run, group_names[slot]
                    ));
                    rep_fits.push(None);
                }
            }
        }
        match repetition_estimates(&rep_fits) {
            Ok(Some(triple)) => {
                xx_estimates.push(triple[0]);
                yy_estimates.push(triple[1]);
                pair_estimates.push(triple[2]);
                per_run.push(triple);
            }
            Err(err) => issues.push(format!("repetition {rep}: {err}")),
            Ok(None) => issues.push(format!("repetition {rep}: skipped, missing fits")),
        }
    }
    if per_run.is_empty() {
        return Err(AnalysisError::MissingScans {
            what: "no complete repetition survived fitting".into(),
        });
    }

    let report = evaluate_inequality4(
        aggregate_runs(&xx_estimates)?,
        aggregate_runs(&yy_estimates)?,
        aggregate_runs(&pair_estimates)?,
    )
    .with_provenance(scans[0].config);
    if scans.iter().any(|s| s.config != scans[0].config) {
        issues.push("scans carry differing config snapshots; report uses the first".into());
    }

    Ok(ExperimentAnalysis {
        report,
        per_run,
        fits,
        issues,
    })
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let wrapped = x.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn synthetic_scan(mean: f64, amplitude: f64, phase: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let chi = k as f64 * 2.0 * PI / n as f64;
                (chi, mean + amplitude * (chi + phase).cos())
            })
            .collect()
    }

    #[test]
    fn exact_recovery_of_noiseless_scan() {
        let fit = fit_sinusoid_points(&synthetic_scan(100.0, 68.0, 0.0, 16)).unwrap();
        assert_abs_diff_eq!(fit.mean, 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.amplitude, 68.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.phase, 0.0, epsilon = 1e-9);
        assert!(fit.goodness < 1e-18);

        let fit = fit_sinusoid_points(&synthetic_scan(500.0, 340.0, 1.234, 16)).unwrap();
        assert_abs_diff_eq!(fit.phase, 1.234, epsilon = 1e-9);

        // Both covariances are positive semidefinite: nonnegative diagonal
        // and 2×2 principal minors.
        for cov in [&fit.covariance, &fit.linear_covariance] {
            for i in 0..3 {
                assert!(cov[i][i] >= 0.0);
                for j in 0..3 {
                    assert!(cov[i][i] * cov[j][j] - cov[i][j] * cov[j][i] >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(matches!(
            fit_sinusoid_points(&synthetic_scan(10.0, 1.0, 0.0, 7)),
            Err(AnalysisError::TooFewPoints { points: 7 })
        ));
        let two_settings: Vec<(f64, f64)> = (0..8)
            .map(|k| (if k % 2 == 0 { 0.0 } else { PI }, 5.0))
            .collect();
        assert!(matches!(
            fit_sinusoid_points(&two_settings),
            Err(AnalysisError::TooFewSettings { distinct: 2 })
        ));
        let negative = vec![(0.0, -1.0); 8];
        assert!(matches!(
            fit_sinusoid_points(&negative),
            Err(AnalysisError::NegativeCounts)
        ));
    }

    #[test]
    fn zero_scan_flags_undefined_phase() {
        let points: Vec<(f64, f64)> = (0..16)
            .map(|k| (k as f64 * 2.0 * PI / 16.0, 0.0))
            .collect();
        let fit = fit_sinusoid_points(&points).unwrap();
        assert_eq!(fit.amplitude, 0.0);
        assert!(fit.covariance[2][2].is_infinite());
        // Model evaluation stays finite through the linear covariance.
        let (value, sigma) = counts_at(&fit, 1.0);
        assert!(value.abs() < 1e-12);
        assert!(sigma.is_finite());
    }

    #[test]
    fn counts_at_evaluates_the_model() {
        let fit = fit_sinusoid_points(&synthetic_scan(100.0, 68.0, 0.0, 16)).unwrap();
        let (at_pi, _) = counts_at(&fit, PI);
        assert_abs_diff_eq!(at_pi, 32.0, epsilon = 1e-9);
        let (at_half, _) = counts_at(&fit, FRAC_PI_2);
        assert_abs_diff_eq!(at_half, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn sigma_at_zero_matches_amplitude_basis_propagation() {
        // For a fit with phase 0, var(N(0)) = var(mean) + var(amplitude)
        // + 2 cov(mean, amplitude).
        let mut points = synthetic_scan(100.0, 40.0, 0.0, 16);
        // Small deterministic perturbation so the covariance is generic.
        for (k, p) in points.iter_mut().enumerate() {
            p.1 += (k % 3) as f64 * 0.5;
        }
        let fit = fit_sinusoid_points(&points).unwrap();
        let (_, sigma) = counts_at(&fit, -fit.phase);
        let c = &fit.covariance;
        let direct = (c[0][0] + c[1][1] + 2.0 * c[0][1]).sqrt();
        assert_abs_diff_eq!(sigma, direct, epsilon = 1e-6);
    }

    type Points = Vec<(f64, f64)>;

    fn probability_scans(alpha: f64, contrast: f64, n: usize) -> (Points, Points) {
        let curve = |alpha: f64| -> Points {
            (0..n)
                .map(|k| {
                    let chi = k as f64 * 2.0 * PI / n as f64;
                    (chi, 0.25 * (1.0 - contrast * (alpha - chi).cos()))
                })
                .collect()
        };
        (curve(alpha), curve(alpha + PI))
    }

    #[test]
    fn spin_path_estimator_identity_on_exact_probabilities() {
        for contrast in [1.0, 0.68, 0.3] {
            for i in 0..5 {
                for j in 0..5 {
                    let alpha = i as f64 * 0.9 - 1.2;
                    let chi = j as f64 * 1.1 - 2.0;
                    let (pts_a, pts_b) = probability_scans(alpha, contrast, 16);
                    let fit_a = fit_sinusoid_points(&pts_a).unwrap();
                    let fit_b = fit_sinusoid_points(&pts_b).unwrap();
                    let estimate = expectation_spin_path(
                        &fit_a,
                        &fit_b,
                        alpha,
                        chi,
                        TermLabel::SpinPathX,
                    )
                    .unwrap();
                    let expected = -contrast * (alpha - chi).cos();
                    assert_abs_diff_eq!(estimate.value, expected, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn ideal_bell_estimator_reaches_minus_one() {
        let n = 16;
        let down: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let chi = k as f64 * 2.0 * PI / n as f64;
                (chi, 0.5 * (1.0 - chi.cos()))
            })
            .collect();
        let up: Vec<(f64, f64)> = (0..n)
            .map(|k| (k as f64 * 2.0 * PI / n as f64, 0.0))
            .collect();
        let fit_down = fit_sinusoid_points(&down).unwrap();
        let fit_up = fit_sinusoid_points(&up).unwrap();
        let estimate = expectation_bell(&fit_down, &fit_up).unwrap();
        assert_abs_diff_eq!(estimate.value, -1.0, epsilon = 1e-10);

        // Identical channels measure zero.
        let symmetric = expectation_bell(&fit_down, &fit_down).unwrap();
        assert_abs_diff_eq!(symmetric.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_combines_runs() {
        let e = |v: f64, s: f64| ExpectationEstimate::new(v, s, TermLabel::SpinPathX).unwrap();
        // Identical runs: uncertainty shrinks as 1/√3.
        let combined = aggregate_runs(&[e(-0.68, 0.006), e(-0.68, 0.006), e(-0.68, 0.006)]).unwrap();
        assert_abs_diff_eq!(combined.value, -0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(combined.sigma, 0.006 / 3.0_f64.sqrt(), epsilon = 1e-12);

        // Scattered runs: the run-to-run standard error takes over.
        let scattered = aggregate_runs(&[e(-0.60, 0.001), e(-0.68, 0.001), e(-0.76, 0.001)]).unwrap();
        let expected_se = 0.08 / 3.0_f64.sqrt(); // sd of {−0.60, −0.68, −0.76} is 0.08
        assert_abs_diff_eq!(scattered.sigma, expected_se, epsilon = 1e-9);
        assert!(scattered.sigma > 0.001);

        // Single estimate passes through.
        let single = aggregate_runs(&[e(-0.5, 0.01)]).unwrap();
        assert_eq!(single.value, -0.5);
        assert_eq!(single.sigma, 0.01);

        assert!(matches!(
            aggregate_runs(&[]),
            Err(AnalysisError::EmptyAggregate)
        ));
        let mixed = [
            e(-0.5, 0.01),
            ExpectationEstimate::new(-0.5, 0.01, TermLabel::SpinPathY).unwrap(),
        ];
        assert!(matches!(
            aggregate_runs(&mixed),
            Err(AnalysisError::MixedLabels)
        ));
    }

    #[test]
    fn inequality_report_on_published_figures() {
        let report = evaluate_inequality4(
            ExpectationEstimate::new(-0.679, 0.005, TermLabel::SpinPathX).unwrap(),
            ExpectationEstimate::new(-0.682, 0.005, TermLabel::SpinPathY).unwrap(),
            ExpectationEstimate::new(-0.93, 0.003, TermLabel::ProductPair).unwrap(),
        );
        assert_abs_diff_eq!(report.total, 2.291, epsilon = 1e-12);
        // Quadrature of (0.005, 0.005, 0.003).
        assert_abs_diff_eq!(report.total_sigma, 0.0076811, epsilon = 1e-6);
        assert_abs_diff_eq!(report.significance, 168.07, epsilon = 0.05);
        assert_eq!(report.bound, 1.0);
    }

    #[test]
    fn inequality_report_edges() {
        let e = |v: f64, s: f64, l| ExpectationEstimate::new(v, s, l).unwrap();
        let ideal = evaluate_inequality4(
            e(-1.0, 0.0, TermLabel::SpinPathX),
            e(-1.0, 0.0, TermLabel::SpinPathY),
            e(-1.0, 0.0, TermLabel::ProductPair),
        );
        assert_eq!(ideal.total, 3.0);

        let null = evaluate_inequality4(
            e(0.0, 0.01, TermLabel::SpinPathX),
            e(0.0, 0.01, TermLabel::SpinPathY),
            e(0.0, 0.01, TermLabel::ProductPair),
        );
        assert_eq!(null.total, 0.0);
        assert!(null.significance < 0.0);
        assert_abs_diff_eq!(
            null.significance,
            -1.0 / (0.01 * 3.0_f64.sqrt()),
            epsilon = 1e-9
        );
    }

    #[test]
    fn implausible_estimates_rejected() {
        assert!(ExpectationEstimate::new(1.05, 0.02, TermLabel::SpinPathX).is_ok());
        assert!(matches!(
            ExpectationEstimate::new(1.2, 0.02, TermLabel::SpinPathX),
            Err(AnalysisError::ImplausibleEstimate { .. })
        ));
        assert!(ExpectationEstimate::new(0.5, -0.1, TermLabel::SpinPathX).is_err());
    }

    proptest! {
        #[test]
        fn estimator_bounded_for_nonnegative_rates(
            n1 in 0.0f64..1.0e6,
            n2 in 0.0f64..1.0e6,
            m1 in 0.0f64..1.0e6,
            m2 in 0.0f64..1.0e6,
        ) {
            prop_assume!(n1 + n2 + m1 + m2 > 1e-9);
            // Exact fits realizing the four rates at χ = 0 and χ = π.
            let fit_for = |at_zero: f64, at_pi: f64| SinusoidFit {
                mean: (at_zero + at_pi) / 2.0,
                amplitude: ((at_zero - at_pi) / 2.0).abs(),
                phase: 0.0,
                covariance: [[0.0; 3]; 3],
                goodness: 0.0,
                linear: [(at_zero + at_pi) / 2.0, (at_zero - at_pi) / 2.0, 0.0],
                linear_covariance: [[0.0; 3]; 3],
            };
            let fit_a = fit_for(n1, n2);
            let fit_b = fit_for(m1, m2);
            let estimate = expectation_spin_path(&fit_a, &fit_b, 0.0, 0.0, TermLabel::SpinPathX)
                .unwrap();
            prop_assert!(estimate.value.abs() <= 1.0 + 1e-12);
        }
    }
}

//! Forward simulation of the interferometer beamline.
//!
//! The model covers state preparation (incident polarization and the first
//! RF flipper), the phase shifter, the optional second RF flipper used for
//! the entangled-pair measurement, and spin analysis in the forward beam.
//! Imperfections enter as incoherent admixtures: a wrong-spin branch, a
//! path-decohered branch for a failed first flip, and one isotropic
//! contrast parameter per scan mode. Counts are Poisson-distributed around
//! the modeled rate, with an optional per-scan phase drift.

use crate::hilbert::{
    analysis_product_state, entangled_state, Arm, DensityState, HilbertError, PureState, Spin,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApparatusError {
    #[error("config field `{field}` = {value} is out of range {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("scan grid is empty")]
    EmptyGrid,
    #[error("scan has {distinct} distinct phase settings, need at least 8")]
    TooFewSettings { distinct: usize },
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("negative counts in scan data")]
    NegativeCounts,
    #[error("malformed scan record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    State(#[from] HilbertError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How the slow phase drift between repetitions is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftModel {
    /// No drift; the phase shifter is exactly at its nominal setting.
    None,
    /// One uniform random offset per scan, bounded by `phase_drift_max`,
    /// added to every nominal χ of that scan. Models slow thermal shifts.
    UniformOffsetPerRun,
}

/// Whether detector counts are Poisson-sampled or taken at their expected
/// value (the noise-free limit used for exact pipeline checks).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingMode {
    Poisson,
    Expected,
}

/// Noise and acquisition parameters of the beamline.
///
/// Detector efficiency is deliberately absent: it only rescales the rate and
/// is absorbed into `counts_per_point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApparatusConfig {
    /// Fraction of incident neutrons with the intended spin, in [0, 1].
    pub incident_polarization: f64,
    /// Efficiency of the spin flipper preparing the entangled state, in [0, 1].
    pub flip_efficiency_rf1: f64,
    /// Efficiency of the in-loop flipper used by the pair measurement, in [0, 1].
    pub flip_efficiency_rf2: f64,
    /// Fringe visibility of the joint spin/path scans, in [0, 1].
    pub contrast_spin_path: f64,
    /// Fringe visibility of the entangled-pair discrimination scans, in [0, 1].
    pub contrast_bell: f64,
    /// Bound on the per-scan phase offset, radians ≥ 0.
    pub phase_drift_max: f64,
    pub drift_model: DriftModel,
    pub counting: CountingMode,
    /// Expected counts at unit probability; must be > 0.
    pub counts_per_point: f64,
    pub rng_seed: u64,
}

impl ApparatusConfig {
    /// A noise-free configuration in expected-count mode.
    pub fn ideal() -> Self {
        Self {
            incident_polarization: 1.0,
            flip_efficiency_rf1: 1.0,
            flip_efficiency_rf2: 1.0,
            contrast_spin_path: 1.0,
            contrast_bell: 1.0,
            phase_drift_max: 0.0,
            drift_model: DriftModel::None,
            counting: CountingMode::Expected,
            counts_per_point: 2000.0,
            rng_seed: 0,
        }
    }

    /// Contrast and drift figures matching the measured apparatus: 68%
    /// joint-scan visibility, 93% pair-discrimination visibility, up to 9°
    /// of slow phase drift.
    pub fn calibrated() -> Self {
        Self {
            incident_polarization: 1.0,
            flip_efficiency_rf1: 1.0,
            flip_efficiency_rf2: 1.0,
            contrast_spin_path: 0.680,
            contrast_bell: 0.93,
            phase_drift_max: 9.0 * PI / 180.0,
            drift_model: DriftModel::UniformOffsetPerRun,
            counting: CountingMode::Poisson,
            counts_per_point: 2000.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ApparatusError> {
        let unit_fields = [
            ("incident_polarization", self.incident_polarization),
            ("flip_efficiency_rf1", self.flip_efficiency_rf1),
            ("flip_efficiency_rf2", self.flip_efficiency_rf2),
            ("contrast_spin_path", self.contrast_spin_path),
            ("contrast_bell", self.contrast_bell),
        ];
        for (field, value) in unit_fields {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(ApparatusError::OutOfRange {
                    field,
                    value,
                    range: "[0, 1]",
                });
            }
        }
        if !self.phase_drift_max.is_finite() || self.phase_drift_max < 0.0 {
            return Err(ApparatusError::OutOfRange {
                field: "phase_drift_max",
                value: self.phase_drift_max,
                range: "[0, ∞)",
            });
        }
        if !self.counts_per_point.is_finite() || self.counts_per_point <= 0.0 {
            return Err(ApparatusError::OutOfRange {
                field: "counts_per_point",
                value: self.counts_per_point,
                range: "(0, ∞)",
            });
        }
        Ok(())
    }
}

impl Default for ApparatusConfig {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Spin channel selected by the analysis system in the forward beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinAnalysis {
    Up,
    Down,
}

impl std::fmt::Display for SpinAnalysis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpinAnalysis::Up => "up",
            SpinAnalysis::Down => "down",
        })
    }
}

/// One measured intensity curve: either a joint spin/path scan at a fixed
/// Larmor phase α, or a pair-discrimination scan at a fixed spin channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScanKind {
    SpinPath { alpha: f64 },
    BellDiscrimination { analysis: SpinAnalysis },
}

impl ScanKind {
    pub fn mode_name(&self) -> &'static str {
        match self {
            ScanKind::SpinPath { .. } => "spin_path",
            ScanKind::BellDiscrimination { .. } => "bell_discrimination",
        }
    }

    /// The `alpha_or_spin` column value of the CSV format.
    pub fn setting_string(&self) -> String {
        match self {
            ScanKind::SpinPath { alpha } => format!("{alpha}"),
            ScanKind::BellDiscrimination { analysis } => analysis.to_string(),
        }
    }
}

/// A single nominal phase setting and the counts recorded there. Counts are
/// integral in Poisson mode and real-valued in expected mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub chi: f64,
    pub counts: f64,
}

/// One scan: the settings grid, the counts, and the configuration snapshot
/// it was produced under. `run` is the unique RNG substream index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanData {
    pub kind: ScanKind,
    pub run: u32,
    pub points: Vec<ScanPoint>,
    pub config: ApparatusConfig,
}

impl ScanData {
    pub fn validate(&self) -> Result<(), ApparatusError> {
        let mut distinct: Vec<f64> = Vec::new();
        for p in &self.points {
            if p.counts < 0.0 || !p.counts.is_finite() {
                return Err(ApparatusError::NegativeCounts);
            }
            if !distinct.iter().any(|c| (c - p.chi).abs() < 1e-12) {
                distinct.push(p.chi);
            }
        }
        if distinct.len() < 8 {
            return Err(ApparatusError::TooFewSettings {
                distinct: distinct.len(),
            });
        }
        Ok(())
    }
}

/// The density matrix leaving the preparation stage.
///
/// With probability `incident_polarization` the correct spin enters and the
/// first flipper acts on the path-I component: success yields the entangled
/// state, failure leaves the populations with the spin/path coherence
/// destroyed. The wrong-spin branch is mirrored and orthogonal to the
/// intended state.
pub fn prepare_state(config: &ApparatusConfig) -> Result<DensityState, ApparatusError> {
    config.validate()?;
    let p = config.incident_polarization;
    let eta = config.flip_efficiency_rf1;

    let intended = DensityState::from_pure(&entangled_state());
    let intended_decohered = DensityState::mixture(&[
        (0.5, DensityState::from_pure(&PureState::basis(Spin::Down, Arm::I))),
        (0.5, DensityState::from_pure(&PureState::basis(Spin::Up, Arm::II))),
    ])?;
    // Wrong-spin analog of the entangled state: (|↑,I⟩ − |↓,II⟩)/√2.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let wrong = DensityState::from_pure(&PureState::try_new([
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-s, 0.0),
    ])?);
    let wrong_decohered = DensityState::mixture(&[
        (0.5, DensityState::from_pure(&PureState::basis(Spin::Up, Arm::I))),
        (0.5, DensityState::from_pure(&PureState::basis(Spin::Down, Arm::II))),
    ])?;

    Ok(DensityState::mixture(&[
        (p * eta, intended),
        (p * (1.0 - eta), intended_decohered),
        ((1.0 - p) * eta, wrong),
        ((1.0 - p) * (1.0 - eta), wrong_decohered),
    ])?)
}

/// Joint-projection probability of an ideal spin/path scan:
/// P = (1 − V·cos(α − χ))/4 with fringe visibility V.
pub fn ideal_intensity_spin_path(alpha: f64, chi: f64, contrast: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&contrast));
    0.25 * (1.0 - contrast * (alpha - chi).cos())
}

/// Projection probability of an ideal pair-discrimination scan with
/// visibility V.
///
/// The down channel carries the fringe V·(1 − cos χ)/2 on top of the
/// isotropic floor (1 − V)/4; the up channel sees only the floor, which
/// vanishes at V = 1.
pub fn ideal_intensity_bell(analysis: SpinAnalysis, chi: f64, contrast: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&contrast));
    match analysis {
        SpinAnalysis::Down => 0.25 * (1.0 + contrast - 2.0 * contrast * chi.cos()),
        SpinAnalysis::Up => 0.25 * (1.0 - contrast),
    }
}

/// Prepared state plus the measurement chain, with the prepared density
/// matrix cached for scan loops.
pub struct BeamlineModel {
    prepared: DensityState,
    config: ApparatusConfig,
}

impl BeamlineModel {
    pub fn new(config: &ApparatusConfig) -> Result<Self, ApparatusError> {
        Ok(Self {
            prepared: prepare_state(config)?,
            config: *config,
        })
    }

    /// Detection probability at an actual (drift-included) phase χ.
    pub fn probability(&self, kind: &ScanKind, chi: f64) -> f64 {
        let prob = match kind {
            ScanKind::SpinPath { alpha } => {
                let rho = self.prepared.depolarized(self.config.contrast_spin_path);
                rho.fidelity(&analysis_product_state(*alpha, chi))
            }
            ScanKind::BellDiscrimination { analysis } => {
                let rho = self.prepared.depolarized(self.config.contrast_bell);
                let eta2 = self.config.flip_efficiency_rf2;
                // A working second flipper pulls the product analyzer back to
                // the entangled analyzer state; a failed flip leaves the
                // plain spin ⊗ path projection.
                let flipped = rho.fidelity(&bell_analysis_state(*analysis, chi));
                let unflipped = rho.fidelity(&product_analysis_state(*analysis, chi));
                eta2 * flipped + (1.0 - eta2) * unflipped
            }
        };
        prob.clamp(0.0, 1.0)
    }
}

/// Analyzer state of the pair-discrimination setup: (|↓,I⟩ + e^{iχ}|↑,II⟩)/√2
/// for the down channel, (|↑,I⟩ + e^{iχ}|↓,II⟩)/√2 for the up channel.
fn bell_analysis_state(analysis: SpinAnalysis, chi: f64) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = Complex64::from_polar(s, chi);
    let zero = Complex64::new(0.0, 0.0);
    let amps = match analysis {
        SpinAnalysis::Down => [zero, phase, Complex64::new(s, 0.0), zero],
        SpinAnalysis::Up => [Complex64::new(s, 0.0), zero, zero, phase],
    };
    PureState::try_new(amps).expect("unit analyzer state")
}

/// Plain product analyzer |spin⟩ ⊗ (|I⟩ + e^{iχ}|II⟩)/√2 seen when the
/// second flipper fails.
fn product_analysis_state(analysis: SpinAnalysis, chi: f64) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let spin = match analysis {
        SpinAnalysis::Up => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        SpinAnalysis::Down => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    };
    let path = [Complex64::new(s, 0.0), Complex64::from_polar(s, chi)];
    PureState::product(spin, path).expect("unit analyzer state")
}

/// Detection probability of the full model at a nominal setting, without
/// drift. Convenience wrapper over [`BeamlineModel`].
pub fn model_probability(
    kind: &ScanKind,
    chi: f64,
    config: &ApparatusConfig,
) -> Result<f64, ApparatusError> {
    Ok(BeamlineModel::new(config)?.probability(kind, chi))
}

/// Evenly spaced phase settings over [0, 2π).
pub fn default_chi_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 * 2.0 * PI / points as f64).collect()
}

fn scan_rng(seed: u64, run: u32) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(run));
    rng
}

/// Simulates one scan. Deterministic for a fixed (config, run): the RNG is
/// seeded from `config.rng_seed` on substream `run`, so distinct runs may be
/// simulated concurrently and in any order.
pub fn simulate_scan(
    kind: ScanKind,
    chi_grid: &[f64],
    config: &ApparatusConfig,
    run: u32,
) -> Result<ScanData, ApparatusError> {
    if chi_grid.is_empty() {
        return Err(ApparatusError::EmptyGrid);
    }
    let model = BeamlineModel::new(config)?;
    let mut rng = scan_rng(config.rng_seed, run);
    let drift = match config.drift_model {
        DriftModel::None => 0.0,
        DriftModel::UniformOffsetPerRun => {
            rng.gen_range(-config.phase_drift_max..=config.phase_drift_max)
        }
    };
    let mut points = Vec::with_capacity(chi_grid.len());
    for &chi in chi_grid {
        let expected = config.counts_per_point * model.probability(&kind, chi + drift);
        let counts = match config.counting {
            CountingMode::Expected => expected,
            CountingMode::Poisson => {
                if expected > 0.0 {
                    Poisson::new(expected)
                        .expect("positive finite mean")
                        .sample(&mut rng)
                } else {
                    0.0
                }
            }
        };
        points.push(ScanPoint { chi, counts });
    }
    let scan = ScanData {
        kind,
        run,
        points,
        config: *config,
    };
    scan.validate()?;
    Ok(scan)
}

/// The six scan curves needed to evaluate the three-term inequality: joint
/// scans at α ∈ {0, π} and {π/2, 3π/2}, and the two pair-discrimination
/// channels.
pub fn standard_scan_kinds() -> [ScanKind; 6] {
    [
        ScanKind::SpinPath { alpha: 0.0 },
        ScanKind::SpinPath { alpha: PI },
        ScanKind::SpinPath { alpha: FRAC_PI_2 },
        ScanKind::SpinPath { alpha: 3.0 * FRAC_PI_2 },
        ScanKind::BellDiscrimination {
            analysis: SpinAnalysis::Down,
        },
        ScanKind::BellDiscrimination {
            analysis: SpinAnalysis::Up,
        },
    ]
}

/// Simulates `repetitions` independent passes over the standard scan set,
/// each scan on its own RNG substream with a fresh drift offset.
pub fn run_experiment_set(
    config: &ApparatusConfig,
    repetitions: u32,
    chi_points: usize,
) -> Result<Vec<ScanData>, ApparatusError> {
    if repetitions < 1 {
        return Err(ApparatusError::NoRepetitions);
    }
    let grid = default_chi_grid(chi_points);
    let kinds = standard_scan_kinds();
    let mut scans = Vec::with_capacity(repetitions as usize * kinds.len());
    for rep in 0..repetitions {
        for (slot, kind) in kinds.iter().enumerate() {
            let run = rep * kinds.len() as u32 + slot as u32;
            scans.push(simulate_scan(*kind, &grid, config, run)?);
        }
    }
    Ok(scans)
}

// ---------------------------------------------------------------------------
// Scan persistence
// ---------------------------------------------------------------------------

pub const SCAN_CSV_HEADER: [&str; 5] = ["mode", "run", "alpha_or_spin", "chi_radians", "counts"];

/// Writes scans as tidy CSV, one row per point.
pub fn write_scans_csv<W: Write>(scans: &[ScanData], writer: W) -> Result<(), ApparatusError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SCAN_CSV_HEADER)?;
    for scan in scans {
        for point in &scan.points {
            w.write_record([
                scan.kind.mode_name().to_string(),
                scan.run.to_string(),
                scan.kind.setting_string(),
                format!("{}", point.chi),
                format!("{}", point.counts),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of the scan CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCsvRow {
    pub mode: String,
    pub run: u32,
    pub alpha_or_spin: String,
    pub chi_radians: f64,
    pub counts: f64,
}

/// Reads and schema-validates the scan CSV format.
pub fn read_scans_csv<R: Read>(reader: R) -> Result<Vec<ScanCsvRow>, ApparatusError> {
    let mut r = csv::Reader::from_reader(reader);
    {
        let headers = r.headers()?;
        if headers != &csv::StringRecord::from(SCAN_CSV_HEADER.to_vec()) {
            return Err(ApparatusError::BadRecord(format!(
                "unexpected CSV header {headers:?}"
            )));
        }
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default().to_string();
        let mode = field(0);
        if mode != "spin_path" && mode != "bell_discrimination" {
            return Err(ApparatusError::BadRecord(format!("unknown mode `{mode}`")));
        }
        let run: u32 = field(1)
            .parse()
            .map_err(|e| ApparatusError::BadRecord(format!("run: {e}")))?;
        let alpha_or_spin = field(2);
        if mode == "spin_path" {
            alpha_or_spin
                .parse::<f64>()
                .map_err(|e| ApparatusError::BadRecord(format!("alpha: {e}")))?;
        } else if alpha_or_spin != "up" && alpha_or_spin != "down" {
            return Err(ApparatusError::BadRecord(format!(
                "unknown spin channel `{alpha_or_spin}`"
            )));
        }
        let chi_radians: f64 = field(3)
            .parse()
            .map_err(|e| ApparatusError::BadRecord(format!("chi: {e}")))?;
        let counts: f64 = field(4)
            .parse()
            .map_err(|e| ApparatusError::BadRecord(format!("counts: {e}")))?;
        if counts < 0.0 {
            return Err(ApparatusError::NegativeCounts);
        }
        rows.push(ScanCsvRow {
            mode,
            run,
            alpha_or_spin,
            chi_radians,
            counts,
        });
    }
    Ok(rows)
}

/// Writes the structured JSON record: all scans with their config snapshots.
pub fn write_scans_json<W: Write>(scans: &[ScanData], writer: W) -> Result<(), ApparatusError> {
    serde_json::to_writer_pretty(writer, scans)?;
    Ok(())
}

/// Reads scans back from JSON and re-validates each one.
pub fn read_scans_json<R: Read>(reader: R) -> Result<Vec<ScanData>, ApparatusError> {
    let scans: Vec<ScanData> = serde_json::from_reader(reader)?;
    for scan in &scans {
        scan.validate()?;
        scan.config.validate()?;
    }
    Ok(scans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{projector, TOL_ALGEBRA, TOL_NUMERIC};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ideal_preparation_is_the_entangled_projector() {
        let rho = prepare_state(&ApparatusConfig::ideal()).unwrap();
        let target = projector(&entangled_state());
        assert!(rho.matrix().max_abs_diff(target.matrix()) < TOL_ALGEBRA);
        assert_abs_diff_eq!(rho.fidelity(&entangled_state()), 1.0, epsilon = TOL_NUMERIC);
    }

    #[test]
    fn flip_inefficiency_halves_the_lost_fidelity() {
        let mut config = ApparatusConfig::ideal();
        config.flip_efficiency_rf1 = 0.9;
        let rho = prepare_state(&config).unwrap();
        // Explicit density-matrix construction gives (1 + η)/2.
        assert_abs_diff_eq!(rho.fidelity(&entangled_state()), 0.95, epsilon = TOL_NUMERIC);
    }

    #[test]
    fn polarization_scales_fidelity() {
        let mut config = ApparatusConfig::ideal();
        config.incident_polarization = 0.8;
        let rho = prepare_state(&config).unwrap();
        assert_abs_diff_eq!(rho.fidelity(&entangled_state()), 0.8, epsilon = TOL_NUMERIC);
    }

    #[test]
    fn config_validation_rejects_out_of_range() {
        let mut config = ApparatusConfig::ideal();
        config.contrast_bell = 1.2;
        assert!(matches!(
            config.validate(),
            Err(ApparatusError::OutOfRange { field: "contrast_bell", .. })
        ));
        let mut config = ApparatusConfig::ideal();
        config.counts_per_point = 0.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn config_has_no_hidden_efficiency_knob() {
        // The exact field set is part of the contract: detector efficiency
        // is folded into counts_per_point and must not reappear.
        let value = serde_json::to_value(ApparatusConfig::ideal()).unwrap();
        let mut keys: Vec<&str> = value.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            vec![
                "contrast_bell",
                "contrast_spin_path",
                "counting",
                "counts_per_point",
                "drift_model",
                "flip_efficiency_rf1",
                "flip_efficiency_rf2",
                "incident_polarization",
                "phase_drift_max",
                "rng_seed",
            ]
        );
    }

    #[test]
    fn ideal_spin_path_intensities() {
        assert_abs_diff_eq!(ideal_intensity_spin_path(0.0, PI, 1.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ideal_intensity_spin_path(0.7, 0.7, 1.0), 0.0, epsilon = 1e-15);
        for chi in default_chi_grid(8) {
            assert_abs_diff_eq!(ideal_intensity_spin_path(0.3, chi, 0.0), 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn ideal_bell_intensities() {
        assert_abs_diff_eq!(
            ideal_intensity_bell(SpinAnalysis::Down, PI, 1.0),
            1.0,
            epsilon = 1e-15
        );
        for chi in [FRAC_PI_2, -FRAC_PI_2] {
            assert_abs_diff_eq!(
                ideal_intensity_bell(SpinAnalysis::Down, chi, 1.0),
                0.5,
                epsilon = 1e-15
            );
        }
        for chi in default_chi_grid(8) {
            assert_abs_diff_eq!(
                ideal_intensity_bell(SpinAnalysis::Up, chi, 1.0),
                0.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn model_chain_matches_closed_forms() {
        // The density-matrix chain and the analytic intensities are
        // independent routes to the same probabilities.
        for contrast in [1.0, 0.93, 0.68, 0.2] {
            let mut config = ApparatusConfig::ideal();
            config.contrast_spin_path = contrast;
            config.contrast_bell = contrast;
            let model = BeamlineModel::new(&config).unwrap();
            for chi in default_chi_grid(16) {
                for alpha in [0.0, FRAC_PI_2, 1.1] {
                    let via_chain = model.probability(&ScanKind::SpinPath { alpha }, chi);
                    let closed = ideal_intensity_spin_path(alpha, chi, contrast);
                    assert_abs_diff_eq!(via_chain, closed, epsilon = TOL_NUMERIC);
                }
                for analysis in [SpinAnalysis::Down, SpinAnalysis::Up] {
                    let kind = ScanKind::BellDiscrimination { analysis };
                    let via_chain = model.probability(&kind, chi);
                    let closed = ideal_intensity_bell(analysis, chi, contrast);
                    assert_abs_diff_eq!(via_chain, closed, epsilon = TOL_NUMERIC);
                }
            }
        }
    }

    #[test]
    fn same_seed_reproduces_the_scan() {
        let mut config = ApparatusConfig::calibrated();
        config.rng_seed = 4242;
        let grid = default_chi_grid(16);
        let kind = ScanKind::SpinPath { alpha: 0.0 };
        let a = simulate_scan(kind, &grid, &config, 3).unwrap();
        let b = simulate_scan(kind, &grid, &config, 3).unwrap();
        assert_eq!(a, b);
        // A different substream gives different counts.
        let c = simulate_scan(kind, &grid, &config, 4).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn expected_mode_returns_scaled_probabilities() {
        let config = ApparatusConfig::ideal();
        let grid = default_chi_grid(12);
        let scan = simulate_scan(ScanKind::SpinPath { alpha: 0.0 }, &grid, &config, 0).unwrap();
        for point in &scan.points {
            let expected =
                config.counts_per_point * ideal_intensity_spin_path(0.0, point.chi, 1.0);
            assert_abs_diff_eq!(point.counts, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn ideal_up_channel_counts_are_zero_even_with_poisson() {
        let mut config = ApparatusConfig::ideal();
        config.counting = CountingMode::Poisson;
        let kind = ScanKind::BellDiscrimination {
            analysis: SpinAnalysis::Up,
        };
        let scan = simulate_scan(kind, &default_chi_grid(16), &config, 0).unwrap();
        assert!(scan.points.iter().all(|p| p.counts == 0.0));
    }

    #[test]
    fn experiment_set_layout() {
        let mut config = ApparatusConfig::calibrated();
        config.rng_seed = 7;
        let scans = run_experiment_set(&config, 3, 16).unwrap();
        assert_eq!(scans.len(), 18);
        for kind in standard_scan_kinds() {
            let matching = scans.iter().filter(|s| s.kind == kind).count();
            assert_eq!(matching, 3);
        }
        // Runs are the unique substream ids.
        let mut runs: Vec<u32> = scans.iter().map(|s| s.run).collect();
        runs.sort_unstable();
        assert_eq!(runs, (0..18).collect::<Vec<_>>());
        assert!(matches!(
            run_experiment_set(&config, 0, 16),
            Err(ApparatusError::NoRepetitions)
        ));
    }

    #[test]
    fn short_grid_rejected() {
        let config = ApparatusConfig::ideal();
        let err = simulate_scan(
            ScanKind::SpinPath { alpha: 0.0 },
            &default_chi_grid(4),
            &config,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, ApparatusError::TooFewSettings { distinct: 4 }));
        assert!(matches!(
            simulate_scan(ScanKind::SpinPath { alpha: 0.0 }, &[], &config, 0),
            Err(ApparatusError::EmptyGrid)
        ));
    }

    #[test]
    fn csv_round_trip_validates() {
        let mut config = ApparatusConfig::calibrated();
        config.rng_seed = 99;
        let scans = run_experiment_set(&config, 1, 16).unwrap();
        let mut buf = Vec::new();
        write_scans_csv(&scans, &mut buf).unwrap();
        let rows = read_scans_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 6 * 16);
        assert_eq!(rows[0].mode, "spin_path");
        assert_eq!(rows[0].alpha_or_spin, "0");
        let bell_rows = rows.iter().filter(|r| r.mode == "bell_discrimination").count();
        assert_eq!(bell_rows, 2 * 16);
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let mut config = ApparatusConfig::calibrated();
        config.rng_seed = 11;
        let scans = run_experiment_set(&config, 1, 16).unwrap();
        let mut buf = Vec::new();
        write_scans_json(&scans, &mut buf).unwrap();
        let back = read_scans_json(buf.as_slice()).unwrap();
        assert_eq!(scans, back);
    }

    proptest! {
        #[test]
        fn probabilities_stay_in_unit_interval(
            polarization in 0.0f64..=1.0,
            eta1 in 0.0f64..=1.0,
            eta2 in 0.0f64..=1.0,
            contrast_sp in 0.0f64..=1.0,
            contrast_bell in 0.0f64..=1.0,
            alpha in -10.0f64..10.0,
            chi in -10.0f64..10.0,
        ) {
            let config = ApparatusConfig {
                incident_polarization: polarization,
                flip_efficiency_rf1: eta1,
                flip_efficiency_rf2: eta2,
                contrast_spin_path: contrast_sp,
                contrast_bell,
                ..ApparatusConfig::ideal()
            };
            let model = BeamlineModel::new(&config).unwrap();
            let kinds = [
                ScanKind::SpinPath { alpha },
                ScanKind::BellDiscrimination { analysis: SpinAnalysis::Down },
                ScanKind::BellDiscrimination { analysis: SpinAnalysis::Up },
            ];
            for kind in kinds {
                let p = model.probability(&kind, chi);
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}

//! Multi-period adaptive vs non-adaptive PEC runs, configuration and reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::inference::{
    map_estimate, predicted_probs, roll_prior, simulate_shots, CalibrationModel, MapOptions, ModelKind, ShotRecord,
};
use crate::noise::{schedule_channel, Feasibility, NoiseSchedule, PauliChannel, QubitDrift, DEFAULT_GATE_TIME_US};
use crate::pec::{pec_run, quasiprob_decompose, FrameTable, MitigatedResult, PecOptions, QuasiProb, SamplingScheme};
use crate::quantum::{pauli_label, DensityMatrix, Gate, StateOptions};
use crate::stats::{hellinger_discrete, nonstationarity, Histogram};

/// Which circuit generates the adaptive arm's calibration shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationKind {
    /// The bare noisy gate.
    #[default]
    PlainNoisy,
    /// Circuits sampled from the previous period's decomposition.
    OldPecMixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    /// Interpolation grid size; the run covers a prefix of it.
    pub periods: usize,
    pub gate_time_us: f64,
    pub qubits: Vec<QubitDrift>,
    /// Per-period measured means; replaces `qubits` when set.
    pub csv: Option<PathBuf>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            periods: 5,
            gate_time_us: DEFAULT_GATE_TIME_US,
            qubits: vec![
                QubitDrift {
                    t1_start: 150.0,
                    t1_end: 60.0,
                    t2_start: 70.0,
                    t2_end: 50.0,
                },
                QubitDrift {
                    t1_start: 200.0,
                    t1_end: 10.0,
                    t2_start: 130.0,
                    t2_end: 62.5,
                },
            ],
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PecConfig {
    pub n_circuits: usize,
    pub shots_per_circuit: u64,
    pub scheme: SamplingScheme,
}

impl Default for PecConfig {
    fn default() -> Self {
        let d = PecOptions::default();
        Self {
            n_circuits: d.n_circuits,
            shots_per_circuit: d.shots_per_circuit,
            scheme: d.scheme,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
}

impl Default for MapConfig {
    fn default() -> Self {
        let d = MapOptions::default();
        Self {
            max_iter: d.max_iter,
            tol: d.tol,
            restarts: d.restarts,
        }
    }
}

/// Where the test state comes from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    /// JSON file `{"re": [[..]], "im": [[..]]}`; the built-in state if absent.
    pub file: Option<PathBuf>,
    /// Project a slightly non-PSD input onto the PSD cone instead of failing.
    pub project: bool,
}

/// Everything a run needs. All fields have defaults except `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub gate: Gate,
    /// Number of periods to run, starting at 0.
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_calibration_shots")]
    pub calibration_shots: u64,
    /// Prior concentration used when rolling an estimate forward.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Concentration of the Dirichlet laws compared for non-stationarity.
    #[serde(default = "default_nonstationarity_kappa")]
    pub nonstationarity_kappa: f64,
    #[serde(default)]
    pub calibration_model: CalibrationKind,
    #[serde(default)]
    pub allow_unphysical: bool,
    /// Worker threads; 0 picks the available parallelism.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub pec: PecConfig,
    #[serde(default)]
    pub map: MapConfig,
    #[serde(default)]
    pub state: StateConfig,
}

fn default_periods() -> usize {
    3
}
fn default_calibration_shots() -> u64 {
    100_000
}
fn default_kappa() -> f64 {
    50.0
}
fn default_nonstationarity_kappa() -> f64 {
    100.0
}

impl ExperimentConfig {
    /// Defaults for everything but the seed.
    pub fn with_seed(seed: u64) -> Self {
        toml::from_str(&format!("seed = {seed}")).expect("defaults parse")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::load(Some(path), None)
    }

    /// Read an optional config file, letting `seed` override (or supply) the
    /// file's seed. Relative paths in the file resolve against its directory.
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Self> {
        let mut table = match path {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        if let Some(seed) = seed {
            let seed = i64::try_from(seed).map_err(|_| Error::Config("seed exceeds i64 range".into()))?;
            table.insert("seed".into(), toml::Value::Integer(seed));
        }
        let mut cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(dir) = path.and_then(Path::parent) {
            for p in [&mut cfg.schedule.csv, &mut cfg.state.file].into_iter().flatten() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("periods", self.periods),
            ("pec.n_circuits", self.pec.n_circuits),
            ("map.max_iter", self.map.max_iter),
            ("map.restarts", self.map.restarts),
            ("schedule.periods", self.schedule.periods),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.calibration_shots == 0 || self.pec.shots_per_circuit == 0 {
            return Err(Error::Config("shot counts must be at least 1".into()));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("nonstationarity_kappa", self.nonstationarity_kappa),
            ("map.tol", self.map.tol),
            ("schedule.gate_time_us", self.schedule.gate_time_us),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn feasibility(&self) -> Feasibility {
        if self.allow_unphysical {
            Feasibility::AllowUnphysical
        } else {
            Feasibility::Strict
        }
    }

    pub fn build_schedule(&self) -> Result<NoiseSchedule> {
        let schedule = match &self.schedule.csv {
            Some(path) => ingest_t1t2_csv(path, self.schedule.gate_time_us, self.feasibility())?,
            None => NoiseSchedule::interpolated(
                self.schedule.periods,
                self.schedule.qubits.clone(),
                self.schedule.gate_time_us,
            )?
            .with_feasibility(self.feasibility()),
        };
        Ok(schedule)
    }

    pub fn build_state(&self, num_qubits: usize) -> Result<DensityMatrix> {
        let rho = match &self.state.file {
            None => DensityMatrix::test_state(),
            Some(path) => read_state(path, self.state.project)?,
        };
        if rho.num_qubits() != num_qubits {
            return Err(Error::Config(format!(
                "test state has {} qubits but the schedule has {num_qubits}",
                rho.num_qubits()
            )));
        }
        Ok(rho)
    }

    fn pec_options(&self) -> PecOptions {
        PecOptions {
            n_circuits: self.pec.n_circuits,
            shots_per_circuit: self.pec.shots_per_circuit,
            scheme: self.pec.scheme,
            workers: self.workers,
        }
    }

    fn map_options(&self, seed: u64, initial: &PauliChannel) -> MapOptions {
        MapOptions {
            max_iter: self.map.max_iter,
            tol: self.map.tol,
            restarts: self.map.restarts,
            seed,
            initial: Some(initial.coeffs().to_vec()),
            workers: self.workers,
        }
    }
}

#[derive(Deserialize)]
struct StateFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

/// Read a density matrix stored as real and imaginary row lists.
pub fn read_state(path: &Path, project: bool) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let dim = file.re.len();
    let im = file.im.unwrap_or_else(|| vec![vec![0.0; dim]; dim]);
    if im.len() != dim || file.re.iter().chain(&im).any(|row| row.len() != dim) {
        return Err(Error::InvalidState(format!("{}: matrix is not square", path.display())));
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(file.re[i][j], im[i][j]));
    DensityMatrix::with_options(
        m,
        &StateOptions {
            project,
            ..StateOptions::default()
        },
    )
}

/// Per-period explicit T1/T2 means from `qubit,period,t1_us,t2_us` rows.
pub fn ingest_t1t2_csv(path: &Path, gate_time: f64, feasibility: Feasibility) -> Result<NoiseSchedule> {
    NoiseSchedule::from_csv_path(path, gate_time, feasibility)
}

/// Outcome counts from `outcome,count` lines. Outcomes are bitstrings
/// (`01`) or decimal indices; a header line is skipped.
pub fn read_counts(path: &Path) -> Result<ShotRecord> {
    parse_counts(&fs::read_to_string(path)?)
}

pub fn parse_counts(text: &str) -> Result<ShotRecord> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut entries: Vec<(usize, u64)> = Vec::new();
    let mut width = None;
    for row in rdr.records() {
        let row = row?;
        if row.len() != 2 {
            return Err(Error::InvalidInput(format!("expected `outcome,count`, got {row:?}")));
        }
        if row[0].eq_ignore_ascii_case("outcome") {
            continue;
        }
        let outcome = &row[0];
        let index = if outcome.len() > 1 && outcome.bytes().all(|b| b == b'0' || b == b'1') {
            width = Some(outcome.len());
            usize::from_str_radix(outcome, 2).expect("binary digits")
        } else {
            outcome
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad outcome {outcome:?}")))?
        };
        let count: u64 = row[1]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad count {:?}", &row[1])))?;
        entries.push((index, count));
    }
    let max_index = entries.iter().map(|e| e.0).max().unwrap_or(0);
    let len = match width {
        Some(w) => 1usize << w,
        None => (max_index + 1).next_power_of_two().max(2),
    };
    if max_index >= len {
        return Err(Error::InvalidInput(format!(
            "outcome {max_index} exceeds register size {len}"
        )));
    }
    let mut counts = vec![0u64; len];
    for (i, c) in entries {
        counts[i] += c;
    }
    ShotRecord::new(counts)
}

/// Vector indexed by Pauli string, serialized as an ordered label map.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliVector {
    pub num_qubits: usize,
    pub values: Vec<f64>,
}

impl Serialize for PauliVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.values.len()))?;
        for (i, v) in self.values.iter().enumerate() {
            map.serialize_entry(&pauli_label(i, self.num_qubits), v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub theta: PauliVector,
    pub one_norm: f64,
}

impl From<&QuasiProb> for Decomposition {
    fn from(q: &QuasiProb) -> Self {
        Self {
            theta: PauliVector {
                num_qubits: q.num_qubits(),
                values: q.theta().to_vec(),
            },
            one_norm: q.one_norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub counts: Vec<u64>,
    pub log_posterior: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Predicted outcome distribution at the estimate.
    pub predicted: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodReport {
    pub period: usize,
    pub x_true: PauliChannel,
    /// Adaptive estimate; absent in period 0, where the channel is known.
    pub x_hat: Option<PauliChannel>,
    pub calibration: Option<Calibration>,
    pub decomposition_nonadaptive: Decomposition,
    pub decomposition_adaptive: Decomposition,
    pub ideal: Histogram,
    pub nonadaptive: MitigatedResult,
    pub adaptive: MitigatedResult,
    pub hd_nonadaptive: f64,
    pub hd_adaptive: f64,
    pub hd_nonstationarity: f64,
    /// Not serialized, so report files stay byte-stable.
    #[serde(skip)]
    pub wall_clock_s: f64,
}

/// A period either completes or records why it did not.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum PeriodResult {
    Completed(Box<PeriodReport>),
    Failed { period: usize, error: String },
}

impl PeriodResult {
    pub fn period(&self) -> usize {
        match self {
            PeriodResult::Completed(r) => r.period,
            PeriodResult::Failed { period, .. } => *period,
        }
    }

    pub fn report(&self) -> Option<&PeriodReport> {
        match self {
            PeriodResult::Completed(r) => Some(r),
            PeriodResult::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Arm {
    NonAdaptive = 0,
    Adaptive = 1,
    Calibration = 2,
    Map = 3,
}

fn derive_seed(seed: u64, period: usize, arm: Arm) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((period as u64) << 2 | arm as u64);
    rng.next_u64()
}

/// State carried between periods.
struct Carry {
    x0: PauliChannel,
    q0: QuasiProb,
    x_hat: PauliChannel,
    q_hat: QuasiProb,
}

struct Setup {
    schedule: NoiseSchedule,
    frames: FrameTable,
    ideal: Histogram,
}

fn setup(config: &ExperimentConfig) -> Result<Setup> {
    config.validate()?;
    let schedule = config.build_schedule()?;
    if config.periods > schedule.periods() {
        return Err(Error::Config(format!(
            "{} periods requested but the schedule has {}",
            config.periods,
            schedule.periods()
        )));
    }
    let n = schedule.num_qubits();
    let rho = config.build_state(n)?;
    let gate = config.gate.unitary(n)?;
    let frames = FrameTable::new(&gate, &rho)?;
    let ideal = frames.ideal();
    Ok(Setup {
        schedule,
        frames,
        ideal,
    })
}

/// Run periods `0..config.periods`. Configuration problems are errors; a
/// failure inside a period is recorded and the remaining periods still run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<PeriodResult>> {
    let setup = setup(config)?;
    let mut carry: Option<Carry> = None;
    let mut out = Vec::with_capacity(config.periods);
    for period in 0..config.periods {
        let started = Instant::now();
        let result = run_period(config, &setup, period, &mut carry);
        out.push(match result {
            Ok(mut report) => {
                report.wall_clock_s = started.elapsed().as_secs_f64();
                PeriodResult::Completed(Box::new(report))
            }
            Err(e) => PeriodResult::Failed {
                period,
                error: e.to_string(),
            },
        });
    }
    Ok(out)
}

fn run_period(
    config: &ExperimentConfig,
    setup: &Setup,
    period: usize,
    carry: &mut Option<Carry>,
) -> Result<PeriodReport> {
    let (x_true, _) = schedule_channel(&setup.schedule, period)?;
    let opts = config.pec_options();
    let hd = |r: &MitigatedResult| hellinger_discrete(&r.clipped_histogram, &setup.ideal);

    let Some(state) = carry.as_mut() else {
        if period != 0 {
            return Err(Error::InvalidInput("baseline period did not complete".into()));
        }
        let q0 = quasiprob_decompose(&x_true)?;
        let result = pec_run(
            &q0,
            &x_true,
            &setup.frames,
            &opts,
            derive_seed(config.seed, 0, Arm::NonAdaptive),
        )?;
        let h = hd(&result)?;
        let report = PeriodReport {
            period,
            x_hat: None,
            calibration: None,
            decomposition_nonadaptive: (&q0).into(),
            decomposition_adaptive: (&q0).into(),
            ideal: setup.ideal.clone(),
            nonadaptive: result.clone(),
            adaptive: result,
            hd_nonadaptive: h,
            hd_adaptive: h,
            hd_nonstationarity: 0.0,
            wall_clock_s: 0.0,
            x_true: x_true.clone(),
        };
        *carry = Some(Carry {
            x0: x_true.clone(),
            q0: q0.clone(),
            x_hat: x_true,
            q_hat: q0,
        });
        return Ok(report);
    };

    let nonadaptive = pec_run(
        &state.q0,
        &x_true,
        &setup.frames,
        &opts,
        derive_seed(config.seed, period, Arm::NonAdaptive),
    )?;

    let kind = match config.calibration_model {
        CalibrationKind::PlainNoisy => ModelKind::PlainNoisy,
        CalibrationKind::OldPecMixture => ModelKind::OldPecMixture(state.q_hat.clone()),
    };
    let model = CalibrationModel::from_frames(setup.frames.clone(), kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, period, Arm::Calibration));
    let record = simulate_shots(&predicted_probs(&x_true, &model)?, config.calibration_shots, &mut rng);
    let eta = roll_prior(&state.x_hat, config.kappa)?;
    let map_opts = config.map_options(derive_seed(config.seed, period, Arm::Map), &state.x_hat);
    let estimate = map_estimate(&record, &model, &eta, &map_opts)?;
    let q_hat = quasiprob_decompose(&estimate.x_hat)?;
    let adaptive = pec_run(
        &q_hat,
        &x_true,
        &setup.frames,
        &opts,
        derive_seed(config.seed, period, Arm::Adaptive),
    )?;

    let report = PeriodReport {
        period,
        hd_nonadaptive: hd(&nonadaptive)?,
        hd_adaptive: hd(&adaptive)?,
        hd_nonstationarity: nonstationarity(&state.x0, &x_true, config.nonstationarity_kappa)?,
        x_hat: Some(estimate.x_hat.clone()),
        calibration: Some(Calibration {
            counts: record.counts().to_vec(),
            log_posterior: estimate.log_posterior,
            iterations: estimate.iterations,
            converged: estimate.converged,
            predicted: estimate.predicted,
        }),
        decomposition_nonadaptive: (&state.q0).into(),
        decomposition_adaptive: (&q_hat).into(),
        ideal: setup.ideal.clone(),
        nonadaptive,
        adaptive,
        wall_clock_s: 0.0,
        x_true,
    };
    state.x_hat = estimate.x_hat;
    state.q_hat = q_hat;
    Ok(report)
}

/// Output file set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    /// Both `report.json` and `summary.csv`.
    #[default]
    All,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "all" | "both" => Ok(ReportFormat::All),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Serialize)]
struct SummaryRow {
    period: usize,
    hd_nonadaptive: Option<f64>,
    hd_adaptive: Option<f64>,
    hd_nonstationarity: Option<f64>,
    p00_ideal: Option<f64>,
    p00_nonadaptive: Option<f64>,
    p00_adaptive: Option<f64>,
}

impl SummaryRow {
    fn from_result(r: &PeriodResult) -> Self {
        let rep = r.report();
        let p00 = |h: &Histogram| h.probs()[0];
        SummaryRow {
            period: r.period(),
            hd_nonadaptive: rep.map(|r| r.hd_nonadaptive),
            hd_adaptive: rep.map(|r| r.hd_adaptive),
            hd_nonstationarity: rep.map(|r| r.hd_nonstationarity),
            p00_ideal: rep.map(|r| p00(&r.ideal)),
            p00_nonadaptive: rep.map(|r| p00(&r.nonadaptive.clipped_histogram)),
            p00_adaptive: rep.map(|r| p00(&r.adaptive.clipped_histogram)),
        }
    }
}

/// Write `report.json` and/or `summary.csv` into `out_dir`.
pub fn emit_reports(results: &[PeriodResult], out_dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no period results to report".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    if matches!(format, ReportFormat::Json | ReportFormat::All) {
        let path = out_dir.join("report.json");
        let mut text = serde_json::to_string_pretty(results)?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
    }
    if matches!(format, ReportFormat::Csv | ReportFormat::All) {
        let path = out_dir.join("summary.csv");
        let mut w = csv::Writer::from_path(&path)?;
        for r in results {
            w.serialize(SummaryRow::from_result(r))?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quick(seed: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::with_seed(seed);
        c.pec.n_circuits = 2000;
        c.calibration_shots = 20_000;
        c.workers = 1;
        c
    }

    #[test]
    fn seed_is_required() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("periods = 2"),
            Err(Error::Config(_))
        ));
        let c = ExperimentConfig::from_toml_str("seed = 1").unwrap();
        assert_eq!(c, ExperimentConfig::with_seed(1));
        assert_eq!(c.periods, 3);
        assert_eq!(c.calibration_model, CalibrationKind::PlainNoisy);
    }

    #[test]
    fn nested_config_parses() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            seed = 5
            gate = "cnot"
            calibration_model = "old-pec-mixture"
            [pec]
            n_circuits = 10
            scheme = "iid"
            [schedule]
            periods = 3
            [[schedule.qubits]]
            t1_start = 100.0
            t1_end = 90.0
            t2_start = 80.0
            t2_end = 70.0
            "#,
        )
        .unwrap();
        assert_eq!(c.gate, Gate::Cnot);
        assert_eq!(c.pec.scheme, SamplingScheme::Iid);
        assert_eq!(c.pec.shots_per_circuit, 100);
        assert_eq!(c.schedule.qubits.len(), 1);
        assert!(ExperimentConfig::from_toml_str("seed = 1\nbogus = 2").is_err());
        assert_eq!(ExperimentConfig::load(None, Some(9)).unwrap().seed, 9);
        assert!(matches!(ExperimentConfig::load(None, None), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_counts_are_config_errors() {
        let mut c = quick(1);
        c.pec.n_circuits = 0;
        assert!(matches!(run_experiment(&c), Err(Error::Config(_))));
        let mut c = quick(1);
        c.periods = 9;
        assert!(matches!(run_experiment(&c), Err(Error::Config(_))));
    }

    #[test]
    fn period_zero_arms_coincide() {
        let mut c = quick(3);
        c.periods = 1;
        let out = run_experiment(&c).unwrap();
        let r = out[0].report().unwrap();
        assert_eq!(r.hd_nonadaptive, r.hd_adaptive);
        assert!(r.hd_adaptive < 0.02);
        assert_abs_diff_eq!(r.ideal.probs()[0], 3.05 / 4.04, epsilon = 1e-6);
    }

    #[test]
    fn failing_period_is_isolated() {
        // Period 4 of the default grid has T2 > 2 T1 on the second qubit.
        let mut c = quick(4);
        c.periods = 5;
        let out = run_experiment(&c).unwrap();
        assert!(out[..4].iter().all(|r| r.report().is_some()));
        assert!(matches!(&out[4], PeriodResult::Failed { period: 4, error } if error.contains("T2")));
        let dir = tempfile::tempdir().unwrap();
        emit_reports(&out, dir.path(), ReportFormat::All).unwrap();
        let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "period,hd_nonadaptive,hd_adaptive,hd_nonstationarity,p00_ideal,p00_nonadaptive,p00_adaptive"
        );
        assert_eq!(csv.lines().last().unwrap(), "4,,,,,,");
    }

    #[test]
    fn json_uses_pauli_labels() {
        let mut c = quick(2);
        c.periods = 2;
        let out = run_experiment(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_reports(&out, dir.path(), ReportFormat::Json).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        let x = v[1]["x_hat"].as_object().unwrap();
        let keys: Vec<&String> = x.keys().collect();
        assert_eq!(keys.len(), 16);
        assert_eq!(v[1]["status"], "completed");
        assert!(v[1]["decomposition_adaptive"]["theta"]["ZZ"].is_number());
        assert!(v[1].get("wall_clock_s").is_none());
    }

    #[test]
    fn counts_parsing() {
        let r = parse_counts("outcome,count\n00,70\n01,10\n10,15\n11,5\n").unwrap();
        assert_eq!(r.counts(), &[70, 10, 15, 5]);
        let r = parse_counts("0, 3\n3, 1\n").unwrap();
        assert_eq!(r.counts(), &[3, 0, 0, 1]);
        assert!(parse_counts("00,x\n").is_err());
    }

    #[test]
    fn state_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.json");
        fs::write(&path, r#"{"re": [[0.5, 0.5], [0.5, 0.5]]}"#).unwrap();
        let rho = read_state(&path, false).unwrap();
        assert_eq!(rho.num_qubits(), 1);
        fs::write(&path, r#"{"re": [[1.0, 0.0]]}"#).unwrap();
        assert!(read_state(&path, false).is_err());
    }
}

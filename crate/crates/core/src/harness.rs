//! Experiment runners: per-start method comparisons and seeded
//! fail-probability sweeps, with JSON and CSV report output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_baseline, BaselineConfig, BaselineMethod};
use crate::error::{Error, Result};
use crate::gcs::{gcs_run, GcsConfig};
use crate::objective::{Objective, ObjectiveSpec};
use crate::scalar::Scalar;

/// Final values strictly below this count as a success.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gcs,
    NelderMead,
    Powell,
    FdGradientDescent,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Self::Gcs,
        Self::NelderMead,
        Self::Powell,
        Self::FdGradientDescent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gcs => "gcs",
            Self::NelderMead => "nelder_mead",
            Self::Powell => "powell",
            Self::FdGradientDescent => "fd_gradient_descent",
        }
    }

    pub fn baseline(self) -> Option<BaselineMethod> {
        match self {
            Self::Gcs => None,
            Self::NelderMead => Some(BaselineMethod::NelderMead),
            Self::Powell => Some(BaselineMethod::Powell),
            Self::FdGradientDescent => Some(BaselineMethod::FdGradientDescent),
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Self::name).join(", ")
    }

    /// Parse a comma-separated list such as `gcs,powell`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let methods = s
            .split(',')
            .map(str::trim)
            .filter(|m| !m.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if methods.is_empty() {
            return Err(Error::Empty("method list"));
        }
        Ok(methods)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The value was NaN or infinite; counted as a failure.
    NonFinite,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Pass iff `final_value < threshold`.
pub fn classify<T: Scalar>(final_value: T, threshold: T) -> Verdict {
    if !final_value.is_finite() {
        Verdict::NonFinite
    } else if final_value < threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const SEED_KEY: u64 = 0x6a09_e667_f3bc_c908;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a per-run seed from a base seed and a list of indices.
///
/// `h = splitmix64(base ^ K)`, then for every index in order
/// `h = splitmix64((h + γ) ^ index)`, where `γ` is the 64-bit golden-ratio
/// increment and `K` the first 64 fractional bits of √2. Stable across
/// platforms and releases.
pub fn derive_seed(base_seed: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(base_seed ^ SEED_KEY), |h, &idx| {
            splitmix64(h.wrapping_add(GOLDEN_GAMMA) ^ idx)
        })
}

/// Everything besides the objective and start points that a report depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ExperimentSettings<T> {
    pub gcs: GcsConfig<T>,
    pub baseline: BaselineConfig<T>,
    pub threshold: T,
    pub base_seed: u64,
}

impl<T: Scalar> Default for ExperimentSettings<T> {
    fn default() -> Self {
        Self {
            gcs: GcsConfig::default(),
            baseline: BaselineConfig::default(),
            threshold: T::lit(DEFAULT_THRESHOLD),
            base_seed: 42,
        }
    }
}

impl<T: Scalar> ExperimentSettings<T> {
    pub fn with_seed(mut self, base_seed: u64) -> Self {
        self.base_seed = base_seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ComparisonRow<T> {
    pub start: Vec<T>,
    pub method: Method,
    pub final_value: T,
    pub passed: bool,
    pub evaluations: u64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ComparisonReport<T> {
    pub objective: ObjectiveSpec<T>,
    pub settings: ExperimentSettings<T>,
    pub rows: Vec<ComparisonRow<T>>,
}

fn check_starts<T: Scalar>(objective: &ObjectiveSpec<T>, starts: &[Vec<T>]) -> Result<()> {
    objective.validate()?;
    if starts.is_empty() {
        return Err(Error::Empty("start list"));
    }
    for start in starts {
        if start.len() != objective.dimension() {
            return Err(Error::DimensionMismatch {
                expected: objective.dimension(),
                got: start.len(),
            });
        }
    }
    Ok(())
}

fn check_threshold<T: Scalar>(threshold: T) -> Result<()> {
    if threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "threshold must be finite, got {threshold}"
        )))
    }
}

/// One row per `(start, method)`, start-major. GCS rows are seeded with
/// `derive_seed(base_seed, [start_index, method_index])`.
pub fn run_comparison<T: Scalar>(
    objective: &ObjectiveSpec<T>,
    starts: &[Vec<T>],
    methods: &[Method],
    settings: &ExperimentSettings<T>,
) -> Result<ComparisonReport<T>> {
    check_starts(objective, starts)?;
    if methods.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "method list must not be empty; valid methods: {}",
            Method::valid_names()
        )));
    }
    check_threshold(settings.threshold)?;
    settings.gcs.validate()?;
    settings.baseline.validate(objective.dimension())?;

    let mut rows = Vec::with_capacity(starts.len() * methods.len());
    for (si, start) in starts.iter().enumerate() {
        for (mi, &method) in methods.iter().enumerate() {
            let run = match method.baseline() {
                None => {
                    let config = settings
                        .gcs
                        .clone()
                        .with_seed(derive_seed(settings.base_seed, &[si as u64, mi as u64]))
                        .with_trace(false);
                    gcs_run(objective, start, &config)?
                }
                Some(baseline) => run_baseline(
                    objective,
                    start,
                    &settings.baseline.clone().with_method(baseline),
                )?,
            };
            rows.push(ComparisonRow {
                start: start.clone(),
                method,
                final_value: run.best_value,
                passed: classify(run.best_value, settings.threshold).passed(),
                evaluations: run.evaluations,
                seed: run.seed,
            });
        }
    }
    Ok(ComparisonReport {
        objective: objective.clone(),
        settings: settings.clone(),
        rows,
    })
}

/// Column names for the start coordinates: `start_x,start_y` in two
/// dimensions, `start_0..start_{d-1}` otherwise.
fn start_columns(dimension: usize) -> Vec<String> {
    if dimension == 2 {
        vec!["start_x".into(), "start_y".into()]
    } else {
        (0..dimension).map(|i| format!("start_{i}")).collect()
    }
}

impl<T: Scalar> ComparisonReport<T> {
    /// `start_x,start_y,method,final_value,passed,evaluations,seed`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = start_columns(self.objective.dimension);
        header.extend(["method", "final_value", "passed", "evaluations", "seed"].map(String::from));
        out.write_record(&header)?;
        for row in &self.rows {
            let mut record: Vec<String> = row.start.iter().map(|x| x.to_string()).collect();
            record.push(row.method.to_string());
            record.push(row.final_value.to_string());
            record.push(row.passed.to_string());
            record.push(row.evaluations.to_string());
            record.push(row.seed.map(|s| s.to_string()).unwrap_or_default());
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FailProbRow<T> {
    pub start: Vec<T>,
    pub failures: u64,
    pub fail_fraction: f64,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FailProbReport<T> {
    pub objective: ObjectiveSpec<T>,
    pub threshold: T,
    pub trials_per_start: u64,
    pub base_seed: u64,
    /// GCS settings shared by every trial; each trial overrides the seed.
    pub gcs: GcsConfig<T>,
    pub rows: Vec<FailProbRow<T>>,
}

/// For every start, run `trials` independent GCS searches seeded with
/// `derive_seed(base_seed, [start_index, trial_index])` and count failures.
///
/// Trials run on `jobs` threads; the report does not depend on `jobs`.
pub fn run_failprob<T: Scalar>(
    objective: &ObjectiveSpec<T>,
    starts: &[Vec<T>],
    trials: u64,
    threshold: T,
    base_seed: u64,
    gcs: &GcsConfig<T>,
    jobs: usize,
) -> Result<FailProbReport<T>> {
    check_starts(objective, starts)?;
    check_threshold(threshold)?;
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if jobs == 0 {
        return Err(Error::InvalidConfig("jobs must be at least 1".into()));
    }
    gcs.validate()?;

    let base_config = gcs.clone().with_trace(false);
    let trial = |(si, ti): (usize, u64)| -> Result<Verdict> {
        let config = base_config
            .clone()
            .with_seed(derive_seed(base_seed, &[si as u64, ti]));
        let run = gcs_run(objective, &starts[si], &config)?;
        Ok(classify(run.best_value, threshold))
    };
    let work: Vec<(usize, u64)> = (0..starts.len())
        .flat_map(|si| (0..trials).map(move |ti| (si, ti)))
        .collect();

    let verdicts: Vec<Verdict> = if jobs == 1 {
        work.into_iter().map(trial).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {jobs} workers: {e}")))?;
        pool.install(|| work.into_par_iter().map(trial).collect::<Result<_>>())?
    };

    let rows = starts
        .iter()
        .zip(verdicts.chunks(trials as usize))
        .map(|(start, chunk)| {
            let failures = chunk.iter().filter(|v| !v.passed()).count() as u64;
            FailProbRow {
                start: start.clone(),
                failures,
                fail_fraction: failures as f64 / trials as f64,
                base_seed,
            }
        })
        .collect();

    Ok(FailProbReport {
        objective: objective.clone(),
        threshold,
        trials_per_start: trials,
        base_seed,
        gcs: base_config,
        rows,
    })
}

impl<T: Scalar> FailProbReport<T> {
    /// `start_x,start_y,trials,failures,fail_fraction,base_seed`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = start_columns(self.objective.dimension);
        header.extend(["trials", "failures", "fail_fraction", "base_seed"].map(String::from));
        out.write_record(&header)?;
        for row in &self.rows {
            let mut record: Vec<String> = row.start.iter().map(|x| x.to_string()).collect();
            record.push(self.trials_per_start.to_string());
            record.push(row.failures.to_string());
            record.push(row.fail_fraction.to_string());
            record.push(row.base_seed.to_string());
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn fail_fractions(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.fail_fraction).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify(0.0843, 0.5), Verdict::Pass);
        assert_eq!(classify(15.0, 0.5), Verdict::Fail);
        assert_eq!(classify(0.5, 0.5), Verdict::Fail);
        assert_eq!(classify(f64::NAN, 0.5), Verdict::NonFinite);
        assert!(!classify(f64::INFINITY, 0.5).passed());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(42, &[0, 0]), derive_seed(42, &[0, 0]));
        assert_ne!(derive_seed(42, &[0, 0]), derive_seed(42, &[0, 1]));
        assert_ne!(derive_seed(42, &[1, 0]), derive_seed(43, &[1, 0]));
        assert_ne!(derive_seed(42, &[0, 1]), derive_seed(42, &[1, 0]));
        assert_ne!(derive_seed(42, &[]), derive_seed(42, &[0]));
    }

    #[test]
    fn seeds_do_not_collide_on_a_grid() {
        let mut seen = std::collections::HashSet::new();
        for base in 0..8 {
            for a in 0..64 {
                for b in 0..64 {
                    assert!(seen.insert(derive_seed(base, &[a, b])));
                }
            }
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!(
            Method::parse_list("gcs, powell").unwrap(),
            vec![Method::Gcs, Method::Powell]
        );
        assert!(matches!(Method::parse_list(""), Err(Error::Empty(_))));
        let err = Method::parse_list("gcs,bogus").unwrap_err().to_string();
        assert!(
            err.contains("bogus") && err.contains("fd_gradient_descent"),
            "{err}"
        );
    }

    #[test]
    fn comparison_rejects_empty_inputs() {
        let well = ObjectiveSpec::<f64>::reference_well();
        let settings = ExperimentSettings::default();
        assert!(run_comparison(&well, &[vec![1.0, 1.0]], &[], &settings).is_err());
        assert!(run_comparison(&well, &[], &[Method::Gcs], &settings).is_err());
        assert!(run_comparison(&well, &[vec![1.0]], &[Method::Gcs], &settings).is_err());
    }

    #[test]
    fn comparison_row_order_and_seeds() {
        let well = ObjectiveSpec::<f64>::reference_well();
        let mut settings = ExperimentSettings::default().with_seed(7);
        settings.gcs.max_iters = 50;
        let starts = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let methods = [Method::NelderMead, Method::Gcs];
        let report = run_comparison(&well, &starts, &methods, &settings).unwrap();
        let order: Vec<_> = report.rows.iter().map(|r| (r.start[0], r.method)).collect();
        assert_eq!(
            order,
            vec![
                (1.0, Method::NelderMead),
                (1.0, Method::Gcs),
                (2.0, Method::NelderMead),
                (2.0, Method::Gcs)
            ]
        );
        assert_eq!(report.rows[0].seed, None);
        assert_eq!(report.rows[1].seed, Some(derive_seed(7, &[0, 1])));
        assert_eq!(report.rows[3].seed, Some(derive_seed(7, &[1, 1])));
        for row in &report.rows {
            assert_eq!(row.passed, classify(row.final_value, 0.5).passed());
        }
    }

    #[test]
    fn failprob_at_optimum_never_fails() {
        let well = ObjectiveSpec::<f64>::reference_well();
        let report = run_failprob(
            &well,
            &[vec![0.0, 0.0]],
            1,
            0.5,
            3,
            &GcsConfig::default(),
            1,
        )
        .unwrap();
        assert_eq!(report.rows[0].failures, 0);
        assert_eq!(report.rows[0].fail_fraction, 0.0);
    }

    #[test]
    fn failprob_validates() {
        let well = ObjectiveSpec::<f64>::reference_well();
        let gcs = GcsConfig::default();
        assert!(run_failprob(&well, &[vec![0.0, 0.0]], 0, 0.5, 3, &gcs, 1).is_err());
        assert!(run_failprob(&well, &[vec![0.0, 0.0]], 1, 0.5, 3, &gcs, 0).is_err());
        assert!(run_failprob(&well, &[vec![0.0, 0.0]], 1, f64::NAN, 3, &gcs, 1).is_err());
    }

    #[test]
    fn csv_headers() {
        let well = ObjectiveSpec::<f64>::reference_well();
        let gcs = GcsConfig {
            max_iters: 10,
            ..GcsConfig::default()
        };
        let report = run_failprob(&well, &[vec![0.0, 0.0]], 4, 0.5, 3, &gcs, 1).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "start_x,start_y,trials,failures,fail_fraction,base_seed\n0,0,4,0,0,3\n"
        );
    }
}

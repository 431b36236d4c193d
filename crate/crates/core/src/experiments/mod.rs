//! Seeded Monte Carlo trials against the typical-value bands.
//!
//! Trial `i` draws everything from the stream `(seed, i)`, so any trial can
//! be replayed alone and the record stream does not depend on scheduling.

mod oracle;
mod record;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{
    correlation_measure_with, count_windows, estimate_phi, estimate_phi_tilde, phi_tilde_with,
    phi_with, EnumOptions, MeasureResult, DEFAULT_BUDGET,
};
use crate::seq::{sample_family, sample_generator, SeedStream};
use crate::tailmath::{ln_choose, theorem_band, Band, BandKind};

pub use oracle::{
    collision_experiment, empirical_pmf, exact_distribution_oracle, total_variation,
    CollisionReport, ORACLE_MAX_FAMILIES, ORACLE_MAX_LENGTH,
};
pub use record::{
    format_f64, parse_jsonl, read_jsonl, to_csv, to_jsonl, write_jsonl, BoundsRecord, Mode,
    Witness, CSV_HEADER,
};

pub const DEFAULT_ESTIMATOR_TRIALS: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub length: usize,
    /// Family size, or seed count in generator mode.
    pub cardinality: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
    /// Target miss rate `ε`: a run meets it when at least `1 − ε` of the
    /// values fall inside the band.
    pub confidence: f64,
    /// Max configurations per exact computation; `None` for no limit.
    pub budget: Option<u64>,
    /// Fall back to the sampling estimator when over budget.
    pub allow_approx: bool,
    pub estimator_trials: u64,
}

impl ExperimentConfig {
    pub fn new(length: usize, cardinality: usize, k: usize, trials: u64, seed: u64) -> Self {
        Self {
            length,
            cardinality,
            k_min: k,
            k_max: k,
            trials,
            seed,
            mode: Mode::Family,
            confidence: 0.05,
            budget: Some(DEFAULT_BUDGET),
            allow_approx: false,
            estimator_trials: DEFAULT_ESTIMATOR_TRIALS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::param("length must be at least 2"));
        }
        if self.cardinality == 0 {
            return Err(Error::param("cardinality must be positive"));
        }
        if self.k_min < 2 || self.k_min > self.k_max || self.k_max > self.length {
            return Err(Error::param(format!(
                "k range {}..={} must lie within [2, {}]",
                self.k_min, self.k_max, self.length
            )));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::param("confidence must lie in (0, 1)"));
        }
        if self.estimator_trials == 0 {
            return Err(Error::param("estimator trials must be at least 1"));
        }
        Ok(())
    }

    pub fn ks(&self) -> std::ops::RangeInclusive<usize> {
        self.k_min..=self.k_max
    }

    /// Name of the measure each record reports.
    pub fn measure(&self) -> &'static str {
        match self.mode {
            Mode::Family if self.cardinality == 1 => "c_k",
            Mode::Family => "phi",
            Mode::Generator => "phi_tilde",
        }
    }

    pub fn band_kind(&self) -> BandKind {
        match self.mode {
            Mode::Family if self.cardinality == 1 => BandKind::Single,
            Mode::Family => BandKind::Family,
            Mode::Generator => BandKind::Generator,
        }
    }

    pub fn band(&self, k: usize) -> Result<Band> {
        theorem_band(
            self.length as u64,
            k as u64,
            self.cardinality as u64,
            self.band_kind(),
        )
    }

    /// Orders whose exact enumeration exceeds the budget.
    pub fn over_budget(&self) -> Result<Vec<(usize, u64)>> {
        let mut over = Vec::new();
        if let Some(budget) = self.budget {
            for k in self.ks() {
                let c = count_windows(self.length, k, self.cardinality)?;
                if c.saturated || c.count > budget {
                    over.push((k, c.count));
                }
            }
        }
        Ok(over)
    }
}

/// Runs every trial for every order in the range; records come back in
/// (trial, k) order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<BoundsRecord>> {
    config.validate()?;
    let over = config.over_budget()?;
    if let (Some(&(_, count)), false) = (over.first(), config.allow_approx) {
        return Err(Error::BudgetExceeded {
            count,
            budget: config.budget.expect("over budget implies a budget"),
        });
    }
    let bands = config
        .ks()
        .map(|k| config.band(k))
        .collect::<Result<Vec<_>>>()?;
    let root = SeedStream::new(config.seed);
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|t| run_one(config, &bands, &over, root.derive(t), t))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

fn run_one(
    config: &ExperimentConfig,
    bands: &[Band],
    over: &[(usize, u64)],
    streams: SeedStream,
    trial: u64,
) -> Result<Vec<BoundsRecord>> {
    let opts = EnumOptions {
        budget: config.budget,
    };
    let mut rng = streams.rng(0);
    let mut out = Vec::with_capacity(bands.len());
    match config.mode {
        Mode::Family => {
            let family = sample_family(config.length, config.cardinality, &mut rng)?;
            for (k, band) in config.ks().zip(bands) {
                let start = Instant::now();
                let approximate = over.iter().any(|&(o, _)| o == k);
                let result = if approximate {
                    estimate_phi(
                        &family,
                        k,
                        config.estimator_trials,
                        &streams.derive(k as u64),
                    )?
                } else if config.cardinality == 1 {
                    correlation_measure_with(&family.members()[0], k, &opts)?
                } else {
                    phi_with(&family, k, &opts)?
                };
                out.push(make_record(
                    config,
                    band,
                    k,
                    result,
                    approximate,
                    trial,
                    start,
                ));
            }
        }
        Mode::Generator => {
            let gen = sample_generator(config.length, config.cardinality, &mut rng)?;
            for (k, band) in config.ks().zip(bands) {
                let start = Instant::now();
                let approximate = over.iter().any(|&(o, _)| o == k);
                let result = if approximate {
                    estimate_phi_tilde(&gen, k, config.estimator_trials, &streams.derive(k as u64))?
                } else {
                    phi_tilde_with(&gen, k, &opts)?
                };
                out.push(make_record(
                    config,
                    band,
                    k,
                    result,
                    approximate,
                    trial,
                    start,
                ));
            }
        }
    }
    Ok(out)
}

fn make_record(
    config: &ExperimentConfig,
    band: &Band,
    k: usize,
    result: MeasureResult,
    approximate: bool,
    trial: u64,
    start: Instant,
) -> BoundsRecord {
    BoundsRecord {
        n: config.length,
        k,
        mode: config.mode,
        cardinality: config.cardinality,
        measure: config.measure().to_string(),
        value: result.value,
        lower: band.lower,
        upper: band.upper,
        within_band: band.contains(result.value as f64),
        approximate,
        witness: Witness {
            members: result.witness.members,
            d: result.witness.shifts,
            m: result.witness.window,
        },
        trial,
        seed: config.seed,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

impl Spread {
    fn of(mut xs: Vec<f64>) -> Self {
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        let median = if n % 2 == 1 {
            xs[n / 2]
        } else {
            (xs[n / 2 - 1] + xs[n / 2]) / 2.0
        };
        Self {
            min: xs[0],
            median,
            max: xs[n - 1],
            mean: xs.iter().sum::<f64>() / n as f64,
        }
    }
}

/// Aggregates of one (configuration, k) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub k: usize,
    pub mode: Mode,
    pub cardinality: usize,
    pub measure: String,
    pub records: usize,
    pub value_min: u64,
    pub value_median: f64,
    pub value_max: u64,
    pub lower: f64,
    pub upper: f64,
    pub within_band: usize,
    pub within_band_fraction: f64,
    pub approximate: usize,
    /// `value / √(N(ln C(N,k) + k·ln cardinality))`.
    pub ratio: Spread,
}

impl SummaryRow {
    pub fn meets(&self, confidence: f64) -> bool {
        self.within_band_fraction >= 1.0 - confidence
    }
}

/// Per-k aggregates, ordered by (n, mode, cardinality, measure, k).
pub fn summarize(records: &[BoundsRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::param("no records to summarize"));
    }
    let mut groups: BTreeMap<_, Vec<&BoundsRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.n, r.mode, r.cardinality, r.measure.clone(), r.k))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((n, mode, cardinality, measure, k), rs)| {
            let card = if measure == "c_k" { 1 } else { cardinality };
            let base =
                (n as f64 * (ln_choose(n as u64, k as u64) + k as f64 * (card as f64).ln())).sqrt();
            let values = Spread::of(rs.iter().map(|r| r.value as f64).collect());
            let within = rs.iter().filter(|r| r.within_band).count();
            SummaryRow {
                n,
                k,
                mode,
                cardinality,
                measure,
                records: rs.len(),
                value_min: values.min as u64,
                value_median: values.median,
                value_max: values.max as u64,
                lower: rs[0].lower,
                upper: rs[0].upper,
                within_band: within,
                within_band_fraction: within as f64 / rs.len() as f64,
                approximate: rs.iter().filter(|r| r.approximate).count(),
                ratio: Spread::of(rs.iter().map(|r| r.value as f64 / base).collect()),
            }
        })
        .collect())
}

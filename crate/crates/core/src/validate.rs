//! Sample ingestion and statistical comparison against hypothesis tables.
//!
//! Every comparison aligns samples with a table over `{0..n}^B` plus one
//! overflow cell holding the table's missing mass and the samples beyond `n`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::binned::BinnedDistribution;
use crate::error::{Error, Result};
use crate::partition::BinPartition;

/// Expected counts below this are pooled into the overflow cell.
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

/// Floor applied to probabilities inside the log-likelihood ratio.
pub const LLR_PROBABILITY_FLOOR: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    /// One JSON array of counts per line.
    Jsonl,
    /// One comma-separated row of counts per line, no header.
    Csv,
}

/// Photon-count records of uniform length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub modes: usize,
    pub records: Vec<Vec<usize>>,
    pub source: Option<String>,
}

impl SampleSet {
    pub fn new(records: Vec<Vec<usize>>, source: Option<String>) -> Result<Self> {
        let modes = records.first().map_or(0, Vec::len);
        if let Some(i) = records.iter().position(|r| r.len() != modes) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("record has {} counts, expected {modes}", records[i].len()),
            });
        }
        Ok(Self { modes, records, source })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes one JSON array per line.
    pub fn write_jsonl<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

fn count_from(value: i64, line: usize) -> Result<usize> {
    usize::try_from(value).map_err(|_| Error::Parse { line, message: format!("negative count {value}") })
}

fn check_length(record: &[usize], expected: &mut Option<usize>, line: usize) -> Result<()> {
    match *expected {
        None => *expected = Some(record.len()),
        Some(m) if m != record.len() => {
            return Err(Error::Parse { line, message: format!("record has {} counts, expected {m}", record.len()) })
        }
        _ => {}
    }
    Ok(())
}

/// Reads samples from any reader.
pub fn read_samples<R: Read>(reader: R, format: SampleFormat, source: Option<String>) -> Result<SampleSet> {
    let mut records = Vec::new();
    let mut width = None;
    match format {
        SampleFormat::Jsonl => {
            for (i, line) in BufReader::new(reader).lines().enumerate() {
                let line_no = i + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let raw: Vec<i64> = serde_json::from_str(trimmed)
                    .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
                let record = raw.into_iter().map(|v| count_from(v, line_no)).collect::<Result<Vec<_>>>()?;
                check_length(&record, &mut width, line_no)?;
                records.push(record);
            }
        }
        SampleFormat::Csv => {
            let mut csv = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
            for row in csv.records() {
                let row = row.map_err(|e| Error::Parse {
                    line: e.position().map_or(0, |p| p.line() as usize),
                    message: e.to_string(),
                })?;
                let line_no = row.position().map_or(0, |p| p.line() as usize);
                let record = row
                    .iter()
                    .map(|f| {
                        f.parse::<i64>()
                            .map_err(|e| Error::Parse { line: line_no, message: format!("`{f}`: {e}") })
                            .and_then(|v| count_from(v, line_no))
                    })
                    .collect::<Result<Vec<_>>>()?;
                check_length(&record, &mut width, line_no)?;
                records.push(record);
            }
        }
    }
    if records.is_empty() {
        return Err(Error::Parse { line: 0, message: "no records".into() });
    }
    SampleSet::new(records, source)
}

/// Reads a sample file.
pub fn ingest_samples(path: &Path, format: SampleFormat) -> Result<SampleSet> {
    let file = std::fs::File::open(path)?;
    read_samples(file, format, Some(path.display().to_string()))
}

/// Binned sample counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedCounts {
    pub bins: usize,
    /// Largest count seen in any bin.
    pub max_count: usize,
    pub counts: BTreeMap<Vec<usize>, u64>,
    pub total: u64,
}

impl BinnedCounts {
    pub fn frequency(&self, pattern: &[usize]) -> f64 {
        self.counts.get(pattern).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    /// Empirical table over `{0..max_count}^B`.
    pub fn empirical_distribution(&self, partition: &BinPartition) -> BinnedDistribution {
        let side = self.max_count + 1;
        let mut probs = vec![0.0; side.pow(self.bins as u32)];
        for (k, &c) in &self.counts {
            let idx = k.iter().fold(0, |acc, &x| acc * side + x);
            probs[idx] = c as f64 / self.total as f64;
        }
        BinnedDistribution {
            cutoff: self.max_count,
            bins: self.bins,
            probs,
            tail_bound: 0.0,
            imag_residue: 0.0,
            clamped_mass: 0.0,
            partition: partition.clone(),
        }
    }
}

/// Sums each record's counts within every bin.
pub fn bin_samples(samples: &SampleSet, partition: &BinPartition) -> Result<BinnedCounts> {
    if !samples.is_empty() && partition.modes() != samples.modes {
        return Err(Error::Dimension(format!(
            "partition over {} modes for {}-mode samples",
            partition.modes(),
            samples.modes
        )));
    }
    let mut counts = BTreeMap::new();
    let mut max_count = 0;
    for r in &samples.records {
        let pattern: Vec<usize> = partition.bins().iter().map(|b| b.iter().map(|&i| r[i]).sum()).collect();
        max_count = max_count.max(pattern.iter().copied().max().unwrap_or(0));
        *counts.entry(pattern).or_insert(0) += 1;
    }
    Ok(BinnedCounts { bins: partition.len(), max_count, counts, total: samples.len() as u64 })
}

/// Probability of the overflow cell: everything the table does not list.
fn overflow_probability(dist: &BinnedDistribution) -> f64 {
    (1.0 - dist.total()).max(0.0)
}

/// Total variation distance between two tables.
pub fn tv_distance(p: &BinnedDistribution, q: &BinnedDistribution) -> f64 {
    p.tv_distance(q)
}

/// TV distance between binned samples and a table, with the overflow cell.
pub fn tv_to_samples(dist: &BinnedDistribution, counts: &BinnedCounts) -> f64 {
    let n = counts.total as f64;
    let mut sum = 0.0;
    let mut observed_over = 0.0;
    for (k, &c) in &counts.counts {
        if dist.index_of(k).is_none() {
            observed_over += c as f64 / n;
        }
    }
    for (k, p) in dist.iter() {
        sum += (counts.frequency(&k) - p).abs();
    }
    sum += (observed_over - overflow_probability(dist)).abs();
    (0.5 * sum).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells with small expectation merged into the overflow cell.
    pub pooled_cells: usize,
}

/// Pearson chi-square of `counts` against `expected`.
///
/// Cells with expected count below 5 are pooled into the overflow cell;
/// `dof = cells - 1` after pooling.
pub fn chi_square(expected: &BinnedDistribution, counts: &BinnedCounts) -> Result<ChiSquare> {
    if counts.total == 0 {
        return Err(Error::Domain("chi-square needs at least one sample".into()));
    }
    if counts.bins != expected.bins {
        return Err(Error::Dimension(format!(
            "{}-bin samples against a {}-bin table",
            counts.bins, expected.bins
        )));
    }
    let n = counts.total as f64;
    let mut pooled_expected = n * overflow_probability(expected);
    let mut pooled_observed = 0.0;
    for (k, &c) in &counts.counts {
        if expected.index_of(k).is_none() {
            pooled_observed += c as f64;
        }
    }
    let mut statistic = 0.0;
    let mut cells: usize = 0;
    let mut pooled_cells = 0;
    for (k, p) in expected.iter() {
        let e = n * p;
        let o = counts.counts.get(&k).copied().unwrap_or(0) as f64;
        if e < CHI_SQUARE_MIN_EXPECTED {
            pooled_expected += e;
            pooled_observed += o;
            pooled_cells += 1;
        } else {
            statistic += (o - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_expected > 0.0 {
        statistic += (pooled_observed - pooled_expected).powi(2) / pooled_expected;
        cells += 1;
    } else if pooled_observed > 0.0 {
        statistic = f64::INFINITY;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    let p_value = if statistic.is_infinite() {
        0.0
    } else if dof == 0 || statistic == 0.0 {
        1.0
    } else {
        gamma_ur(0.5 * dof as f64, 0.5 * statistic).clamp(0.0, 1.0)
    };
    Ok(ChiSquare { statistic, dof, p_value, pooled_cells })
}

fn cell_probability(dist: &BinnedDistribution, pattern: &[usize]) -> f64 {
    match dist.index_of(pattern) {
        Some(i) => dist.probs[i],
        None => overflow_probability(dist),
    }
}

/// `Σ_samples ln P_a(k) - ln P_b(k)`; positive values favour `a`.
///
/// Patterns beyond a table's cutoff use its overflow mass. Probabilities are
/// floored at [`LLR_PROBABILITY_FLOOR`].
pub fn log_likelihood_ratio(counts: &BinnedCounts, a: &BinnedDistribution, b: &BinnedDistribution) -> f64 {
    counts
        .counts
        .iter()
        .map(|(k, &c)| {
            let pa = cell_probability(a, k).max(LLR_PROBABILITY_FLOOR);
            let pb = cell_probability(b, k).max(LLR_PROBABILITY_FLOOR);
            c as f64 * (pa.ln() - pb.ln())
        })
        .sum()
}

/// Draws `count` bin patterns from the table, reproducibly from `seed`.
///
/// The table is sampled as given (its overflow mass is not represented).
/// Records in the returned set are bin patterns, one entry per bin.
pub fn generate_samples(dist: &BinnedDistribution, count: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return Ok(SampleSet { modes: dist.bins, records: Vec::new(), source: Some(format!("seed {seed}")) });
    }
    let index = WeightedIndex::new(&dist.probs)
        .map_err(|e| Error::Domain(format!("cannot sample from the table: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..count).map(|_| dist.pattern(index.sample(&mut rng))).collect();
    SampleSet::new(records, Some(format!("seed {seed}")))
}

/// Scores of one hypothesis against the samples.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisScore {
    pub name: String,
    pub cutoff: usize,
    pub tail_bound: f64,
    pub tv_distance: f64,
    pub chi_square: ChiSquare,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub partition: Vec<Vec<usize>>,
    pub hypotheses: Vec<HypothesisScore>,
    /// `ln L(a) - ln L(b)` when two hypotheses are given.
    pub log_likelihood_ratio: Option<f64>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// Scores samples against one or two named hypothesis tables.
pub fn validate_samples(
    samples: &SampleSet,
    partition: &BinPartition,
    hypotheses: &[(String, BinnedDistribution)],
) -> Result<ValidationReport> {
    let counts = bin_samples(samples, partition)?;
    let mut warnings = Vec::new();
    let mut scores = Vec::new();
    for (name, dist) in hypotheses {
        let chi = chi_square(dist, &counts)?;
        if chi.dof == 0 {
            warnings.push(format!("{name}: no chi-square degrees of freedom after pooling"));
        }
        let beyond: u64 =
            counts.counts.iter().filter(|(k, _)| dist.index_of(k).is_none()).map(|(_, &c)| c).sum();
        if beyond > 0 {
            warnings.push(format!("{name}: {beyond} samples exceed the cutoff {}", dist.cutoff));
        }
        scores.push(HypothesisScore {
            name: name.clone(),
            cutoff: dist.cutoff,
            tail_bound: dist.tail_bound,
            tv_distance: tv_to_samples(dist, &counts),
            chi_square: chi,
        });
    }
    let log_likelihood_ratio = match hypotheses {
        [(_, a), (_, b)] => Some(log_likelihood_ratio(&counts, a, b)),
        _ => None,
    };
    Ok(ValidationReport {
        samples: samples.len(),
        partition: partition.to_one_based(),
        hypotheses: scores,
        log_likelihood_ratio,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(probs: Vec<f64>, cutoff: usize, bins: usize) -> BinnedDistribution {
        BinnedDistribution {
            cutoff,
            bins,
            probs,
            tail_bound: 0.0,
            imag_residue: 0.0,
            clamped_mass: 0.0,
            partition: BinPartition::singletons(bins),
        }
    }

    #[test]
    fn jsonl_records() {
        let s = read_samples("[0,2,0]\n[1,0,0]\n\n".as_bytes(), SampleFormat::Jsonl, None).unwrap();
        assert_eq!(s.modes, 3);
        assert_eq!(s.records, vec![vec![0, 2, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn csv_records() {
        let s = read_samples("0, 2,0\n1,0,0\n".as_bytes(), SampleFormat::Csv, None).unwrap();
        assert_eq!(s.records[1], vec![1, 0, 0]);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(read_samples("".as_bytes(), SampleFormat::Jsonl, None), Err(Error::Parse { .. })));
    }

    #[test]
    fn negative_count_reports_line() {
        let err = read_samples("[0,1]\n[0,-1]\n".as_bytes(), SampleFormat::Jsonl, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = read_samples("0,1\n0,-1\n".as_bytes(), SampleFormat::Csv, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn ragged_records_rejected() {
        let err = read_samples("[0,1]\n[0,1,2]\n".as_bytes(), SampleFormat::Jsonl, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn binning_single_record() {
        let s = SampleSet::new(vec![vec![1, 0, 2]], None).unwrap();
        let p = BinPartition::from_one_based(&[vec![1, 2], vec![3]], 3).unwrap();
        let c = bin_samples(&s, &p).unwrap();
        assert_eq!(c.counts.get(&vec![1, 2]), Some(&1));
        assert_eq!(c.frequency(&[1, 2]), 1.0);
    }

    #[test]
    fn duplicates_accumulate() {
        let s = SampleSet::new(vec![vec![1, 0], vec![1, 0], vec![0, 1]], None).unwrap();
        let c = bin_samples(&s, &BinPartition::total(2)).unwrap();
        assert_eq!(c.counts.get(&vec![1]), Some(&3));
        let f: f64 = c.counts.keys().map(|k| c.frequency(k)).sum();
        assert!((f - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tv_extremes() {
        let a = table(vec![1.0, 0.0], 1, 1);
        let b = table(vec![0.0, 1.0], 1, 1);
        assert_eq!(tv_distance(&a, &a), 0.0);
        assert_eq!(tv_distance(&a, &b), 1.0);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let d = table(vec![0.5, 0.5], 1, 1);
        let s = SampleSet::new(vec![vec![0]; 50].into_iter().chain(vec![vec![1]; 50]).collect(), None).unwrap();
        let c = bin_samples(&s, &BinPartition::singletons(1)).unwrap();
        let chi = chi_square(&d, &c).unwrap();
        assert_eq!(chi.statistic, 0.0);
        assert_eq!(chi.dof, 1);
        assert!((chi.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_reference_value() {
        // 60/40 against 50/50: stat = 2·10²/50 = 4, p = 0.0455.
        let d = table(vec![0.5, 0.5], 1, 1);
        let s = SampleSet::new(vec![vec![0]; 60].into_iter().chain(vec![vec![1]; 40]).collect(), None).unwrap();
        let c = bin_samples(&s, &BinPartition::singletons(1)).unwrap();
        let chi = chi_square(&d, &c).unwrap();
        assert!((chi.statistic - 4.0).abs() < 1e-12);
        assert!((chi.p_value - 0.045500).abs() < 1e-5);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = table(vec![0.2, 0.3, 0.5], 2, 1);
        let a = generate_samples(&d, 100, 7).unwrap();
        let b = generate_samples(&d, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!(generate_samples(&d, 0, 7).unwrap().is_empty());
        let delta = table(vec![0.0, 1.0, 0.0], 2, 1);
        assert!(generate_samples(&delta, 20, 1).unwrap().records.iter().all(|r| r == &vec![1]));
    }

    #[test]
    fn llr_sign() {
        let a = table(vec![0.9, 0.1], 1, 1);
        let b = table(vec![0.1, 0.9], 1, 1);
        let s = generate_samples(&a, 200, 3).unwrap();
        let c = bin_samples(&s, &BinPartition::singletons(1)).unwrap();
        assert!(log_likelihood_ratio(&c, &a, &b) > 0.0);
    }
}

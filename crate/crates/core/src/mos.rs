//! Subjective-score curation for depth-map labelling.
//!
//! Raters score each item on a 1-5 scale in two dimensions (content and
//! depth consistency). Raters with too many outlying scores are dropped,
//! each rater's scores are standardised per dimension, mapped onto
//! `[1, 100]` with dimension-wide extremes, and averaged per item. A
//! separate gate keeps, for each item, the best-scoring candidate depth map
//! if its predicted quality reaches the retention threshold.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_OUTLIER_RATE_CAP: f64 = 0.05;
/// Half-width of the 95% interval in units of the cross-rater deviation.
pub const OUTLIER_Z: f64 = 1.96;
pub const SELECTION_THRESHOLD: f64 = 90.0;
pub const MIN_RATERS_FOR_FILTER: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dimension {
    Content,
    Depth,
}

impl Dimension {
    pub const BOTH: [Dimension; 2] = [Dimension::Content, Dimension::Depth];

    fn slot(self) -> usize {
        match self {
            Dimension::Content => 0,
            Dimension::Depth => 1,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Content => "content",
            Dimension::Depth => "depth",
        })
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "content" | "c" => Ok(Dimension::Content),
            "depth" | "d" => Ok(Dimension::Depth),
            other => Err(Error::Data(format!("unknown score dimension {other:?}"))),
        }
    }
}

/// Standard deviation convention for the per-rater standardisation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Spread {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rating {
    pub rater: String,
    pub item: String,
    pub dimension: Dimension,
    pub score: u8,
}

/// Raw integer scores indexed by rater, item and dimension. Missing entries
/// are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    raters: Vec<String>,
    items: Vec<String>,
    scores: Vec<[Option<u8>; 2]>,
}

impl ScoreTable {
    /// Raters and items are ordered by first appearance.
    pub fn from_ratings<'a>(ratings: impl IntoIterator<Item = &'a Rating>) -> Result<Self> {
        let mut rater_ix: HashMap<String, usize> = HashMap::new();
        let mut item_ix: HashMap<String, usize> = HashMap::new();
        let mut raters = Vec::new();
        let mut items = Vec::new();
        let mut cells = Vec::new();
        for r in ratings {
            if !(1..=5).contains(&r.score) {
                return Err(Error::Data(format!(
                    "score {} from rater {} on item {} is outside 1..=5",
                    r.score, r.rater, r.item
                )));
            }
            let ri = *rater_ix.entry(r.rater.clone()).or_insert_with(|| {
                raters.push(r.rater.clone());
                raters.len() - 1
            });
            let ii = *item_ix.entry(r.item.clone()).or_insert_with(|| {
                items.push(r.item.clone());
                items.len() - 1
            });
            cells.push((ri, ii, r.dimension, r.score));
        }
        let mut scores = vec![[None; 2]; raters.len() * items.len()];
        for (ri, ii, dim, score) in cells {
            let slot = &mut scores[ri * items.len() + ii][dim.slot()];
            if slot.is_some() {
                return Err(Error::Data(format!(
                    "duplicate {dim} score from rater {} on item {}",
                    raters[ri], items[ii]
                )));
            }
            *slot = Some(score);
        }
        Ok(Self { raters, items, scores })
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn score(&self, rater: usize, item: usize, dim: Dimension) -> Option<u8> {
        self.scores[rater * self.items.len() + item][dim.slot()]
    }

    fn without_raters(&self, drop: &[bool]) -> Self {
        let n_items = self.items.len();
        let mut raters = Vec::new();
        let mut scores = Vec::new();
        for (ri, id) in self.raters.iter().enumerate() {
            if !drop[ri] {
                raters.push(id.clone());
                scores.extend_from_slice(&self.scores[ri * n_items..(ri + 1) * n_items]);
            }
        }
        Self { raters, items: self.items.clone(), scores }
    }
}

/// Real-valued scores on the same grid as a `ScoreTable`. `None` marks a
/// missing raw score or a degenerate rater-dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedScores {
    raters: Vec<String>,
    items: Vec<String>,
    values: Vec<[Option<f64>; 2]>,
    /// Per rater and dimension: fewer than two distinct scores.
    degenerate: Vec<[bool; 2]>,
}

impl NormalizedScores {
    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn value(&self, rater: usize, item: usize, dim: Dimension) -> Option<f64> {
        self.values[rater * self.items.len() + item][dim.slot()]
    }

    pub fn is_degenerate(&self, rater: usize, dim: Dimension) -> bool {
        self.degenerate[rater][dim.slot()]
    }

    pub fn rater_values(&self, rater: usize, dim: Dimension) -> impl Iterator<Item = f64> + '_ {
        let n = self.items.len();
        self.values[rater * n..(rater + 1) * n].iter().filter_map(move |v| v[dim.slot()])
    }
}

/// Per-rater, per-dimension standardisation `(s - mean) / sd`.
#[allow(clippy::needless_range_loop)]
pub fn zscore_normalize(table: &ScoreTable, spread: Spread) -> NormalizedScores {
    let n_items = table.items.len();
    let mut values = vec![[None; 2]; table.scores.len()];
    let mut degenerate = vec![[false; 2]; table.raters.len()];
    for ri in 0..table.raters.len() {
        for dim in Dimension::BOTH {
            let s = dim.slot();
            let own: Vec<f64> =
                (0..n_items).filter_map(|ii| table.scores[ri * n_items + ii][s]).map(f64::from).collect();
            let distinct = own.iter().any(|&v| v != own[0]);
            let denom = match spread {
                Spread::Population => own.len() as f64,
                Spread::Sample => own.len() as f64 - 1.0,
            };
            if own.len() < 2 || !distinct || denom <= 0.0 {
                degenerate[ri][s] = true;
                continue;
            }
            let mean = own.iter().sum::<f64>() / own.len() as f64;
            let sd = (own.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / denom).sqrt();
            for ii in 0..n_items {
                let cell = ri * n_items + ii;
                values[cell][s] = table.scores[cell][s].map(|v| (f64::from(v) - mean) / sd);
            }
        }
    }
    NormalizedScores { raters: table.raters.clone(), items: table.items.clone(), values, degenerate }
}

/// Maps standardised scores onto `[1, 100]` using the extremes of each
/// dimension over the whole table.
pub fn rescale_scores(z: &NormalizedScores) -> Result<NormalizedScores> {
    let mut out = z.clone();
    for dim in Dimension::BOTH {
        let s = dim.slot();
        let (lo, hi) = z
            .values
            .iter()
            .filter_map(|v| v[s])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi <= lo {
            return Err(Error::Undefined(format!(
                "{dim} scores need at least two distinct standardised values to rescale"
            )));
        }
        for v in out.values.iter_mut() {
            if let Some(x) = v[s].as_mut() {
                *x = if *x == lo {
                    1.0
                } else if *x == hi {
                    100.0
                } else {
                    (*x - lo) * (100.0 - 1.0) / (hi - lo) + 1.0
                };
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItemMos {
    pub item: String,
    pub content: f64,
    pub depth: f64,
    /// `(content + depth) / 2`.
    pub mos: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RaterStatus {
    pub rater: String,
    pub excluded: bool,
    pub degenerate: [bool; 2],
}

impl RaterStatus {
    pub fn is_valid(&self) -> bool {
        !self.excluded && !self.degenerate.iter().any(|&d| d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MosResult {
    pub items: Vec<ItemMos>,
    /// Items lacking a valid score in at least one dimension.
    pub dropped_items: Vec<String>,
    pub raters: Vec<RaterStatus>,
    pub excluded_raters: usize,
}

/// Per-item means over the valid scores of each dimension.
pub fn aggregate_mos(scores: &NormalizedScores) -> MosResult {
    let n_items = scores.items.len();
    let mut items = Vec::new();
    let mut dropped_items = Vec::new();
    for ii in 0..n_items {
        let mut means = [0.0; 2];
        let mut complete = true;
        for dim in Dimension::BOTH {
            let (sum, count) = (0..scores.raters.len())
                .filter_map(|ri| scores.value(ri, ii, dim))
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            if count == 0 {
                complete = false;
            } else {
                means[dim.slot()] = sum / count as f64;
            }
        }
        if complete {
            items.push(ItemMos {
                item: scores.items[ii].clone(),
                content: means[0],
                depth: means[1],
                mos: (means[0] + means[1]) / 2.0,
            });
        } else {
            dropped_items.push(scores.items[ii].clone());
        }
    }
    let raters = scores
        .raters
        .iter()
        .zip(&scores.degenerate)
        .map(|(id, d)| RaterStatus { rater: id.clone(), excluded: false, degenerate: *d })
        .collect();
    MosResult { items, dropped_items, raters, excluded_raters: 0 }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterOutcome {
    pub table: ScoreTable,
    pub excluded: Vec<String>,
    /// True when too few raters remained to screen for outliers.
    pub skipped: bool,
}

/// Fraction of each rater's scores lying outside `mean +- 1.96 sd` of the
/// cross-rater scores for the same item and dimension.
pub fn outlier_rates(table: &ScoreTable) -> Vec<f64> {
    let (n_raters, n_items) = (table.raters.len(), table.items.len());
    let mut outliers = vec![0usize; n_raters];
    let mut counts = vec![0usize; n_raters];
    for ii in 0..n_items {
        for dim in Dimension::BOTH {
            let cell: Vec<(usize, f64)> =
                (0..n_raters).filter_map(|ri| table.score(ri, ii, dim).map(|s| (ri, f64::from(s)))).collect();
            if cell.is_empty() {
                continue;
            }
            let n = cell.len() as f64;
            let mean = cell.iter().map(|(_, s)| s).sum::<f64>() / n;
            let sd = (cell.iter().map(|(_, s)| (s - mean) * (s - mean)).sum::<f64>() / n).sqrt();
            for &(ri, s) in &cell {
                counts[ri] += 1;
                if (s - mean).abs() > OUTLIER_Z * sd {
                    outliers[ri] += 1;
                }
            }
        }
    }
    outliers.iter().zip(&counts).map(|(&o, &c)| if c == 0 { 0.0 } else { o as f64 / c as f64 }).collect()
}

/// Drops raters whose outlier rate exceeds `cap`, repeating the screen on
/// the remaining raters until no further rater is dropped. The result is a
/// fixed point, so filtering its output again changes nothing.
pub fn filter_raters(table: &ScoreTable, cap: f64) -> FilterOutcome {
    let mut current = table.clone();
    let mut excluded = Vec::new();
    if current.raters.len() < MIN_RATERS_FOR_FILTER {
        return FilterOutcome { table: current, excluded, skipped: true };
    }
    while current.raters.len() >= MIN_RATERS_FOR_FILTER {
        let drop: Vec<bool> = outlier_rates(&current).iter().map(|&r| r > cap).collect();
        if !drop.iter().any(|&d| d) {
            break;
        }
        excluded.extend(current.raters.iter().zip(&drop).filter(|(_, &d)| d).map(|(id, _)| id.clone()));
        current = current.without_raters(&drop);
    }
    FilterOutcome { table: current, excluded, skipped: false }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MosOptions {
    pub outlier_rate_cap: f64,
    pub spread: Spread,
    pub filter: bool,
}

impl Default for MosOptions {
    fn default() -> Self {
        Self { outlier_rate_cap: DEFAULT_OUTLIER_RATE_CAP, spread: Spread::Population, filter: true }
    }
}

/// Screening, standardisation, rescaling and aggregation in sequence.
pub fn run_mos_pipeline(table: &ScoreTable, opts: &MosOptions) -> Result<(MosResult, FilterOutcome)> {
    let outcome = if opts.filter {
        filter_raters(table, opts.outlier_rate_cap)
    } else {
        FilterOutcome { table: table.clone(), excluded: Vec::new(), skipped: true }
    };
    let z = zscore_normalize(&outcome.table, opts.spread);
    let mut result = aggregate_mos(&rescale_scores(&z)?);
    for id in &outcome.excluded {
        result.raters.push(RaterStatus { rater: id.clone(), excluded: true, degenerate: [false; 2] });
    }
    result.excluded_raters = outcome.excluded.len();
    Ok((result, outcome))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItemCandidates {
    pub item: String,
    /// `(source id, predicted quality score)`
    pub candidates: Vec<(u64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub item: String,
    pub source: u64,
    pub score: f64,
    pub retained: bool,
}

/// Groups flat `(item, source, score)` rows by item, keeping first-seen order.
pub fn group_candidates(rows: impl IntoIterator<Item = (String, u64, f64)>) -> Vec<ItemCandidates> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<ItemCandidates> = Vec::new();
    for (item, source, score) in rows {
        let k = *index.entry(item.clone()).or_insert_with(|| {
            out.push(ItemCandidates { item, candidates: Vec::new() });
            out.len() - 1
        });
        out[k].candidates.push((source, score));
    }
    out
}

/// Picks each item's best candidate (ties to the smaller source id) and
/// retains it iff its score is at least 90.
pub fn select_depth_maps(items: &[ItemCandidates]) -> Result<Vec<Selection>> {
    items
        .iter()
        .map(|ic| {
            if let Some(&(src, s)) = ic.candidates.iter().find(|(_, s)| !s.is_finite()) {
                return Err(Error::Data(format!("item {} source {src} has score {s}", ic.item)));
            }
            let &(source, score) = ic
                .candidates
                .iter()
                .reduce(|best, c| if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) { c } else { best })
                .ok_or_else(|| Error::Data(format!("item {} has no candidates", ic.item)))?;
            Ok(Selection { item: ic.item.clone(), source, score, retained: score >= SELECTION_THRESHOLD })
        })
        .collect()
}

//! Runtime harness comparing the tree scan with the fixed-order baselines.

use std::fmt;
use std::hash::Hasher;
use std::str::FromStr;
use std::time::Instant;

use fnv::FnvHasher;

use crate::baseline::{make_permutation, sequence_scan, ScanPermutation, Strategy, DEFAULT_BLOCK};
use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::rng::random_feature_map;
use crate::scan::{make_params, normalize_gates, tree_scan, ParamWeights, ScanVariant};
use crate::tree::minimum_spanning_tree;

pub const MIN_REPS: usize = 3;
/// Mixed into the map seed to derive the parameter-weight seed.
const WEIGHT_SEED_SALT: u64 = 0x5eed_f00d_7ee5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchStrategy {
    Tree,
    Sequence(Strategy),
}

impl BenchStrategy {
    pub const ALL: [BenchStrategy; 5] = [
        BenchStrategy::Tree,
        BenchStrategy::Sequence(Strategy::Raster),
        BenchStrategy::Sequence(Strategy::Continuous),
        BenchStrategy::Sequence(Strategy::Diagonal),
        BenchStrategy::Sequence(Strategy::NestedS),
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchStrategy::Tree => "tree",
            BenchStrategy::Sequence(s) => s.name(),
        }
    }
}

impl fmt::Display for BenchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "tree" {
            Ok(BenchStrategy::Tree)
        } else {
            s.parse().map(BenchStrategy::Sequence)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<(usize, usize)>,
    pub strategies: Vec<BenchStrategy>,
    pub reps: usize,
    pub seed: u64,
    pub channels: usize,
    pub variant: ScanVariant,
    pub block: usize,
    pub root: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![(64, 64), (128, 128), (256, 256)],
            strategies: BenchStrategy::ALL.to_vec(),
            reps: 5,
            seed: 0,
            channels: 4,
            variant: ScanVariant::MatrixConsistent,
            block: DEFAULT_BLOCK,
            root: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub strategy: BenchStrategy,
    pub height: usize,
    pub width: usize,
    pub nodes: usize,
    pub reps: usize,
    pub median_ns: u64,
    pub min_ns: u64,
    pub max_ns: u64,
    /// Consecutive visits that are not grid neighbours (breadth-first order
    /// for the tree strategy).
    pub adjacency_breaks: usize,
    /// First 8 hex digits of the 64-bit FNV-1a hash of the output values
    /// as little-endian `f64` bytes.
    pub checksum: String,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str =
        "strategy,height,width,nodes,reps,median_ns,min_ns,max_ns,adjacency_breaks,checksum";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.strategy,
            self.height,
            self.width,
            self.nodes,
            self.reps,
            self.median_ns,
            self.min_ns,
            self.max_ns,
            self.adjacency_breaks,
            self.checksum
        )
    }
}

pub fn checksum(map: &FeatureMap<f64>) -> String {
    let mut hasher = FnvHasher::default();
    for v in map.data() {
        hasher.write(&v.to_le_bytes());
    }
    format!("{:016x}", hasher.finish())[..8].to_string()
}

fn order_breaks(order: &[usize], height: usize, width: usize) -> usize {
    ScanPermutation { order: order.to_vec(), strategy: Strategy::Raster, block: 1, height, width }
        .adjacency_violations()
}

/// One forward pass of a strategy on a map, including tree construction or
/// permutation generation and coefficient generation.
pub fn run_strategy(
    strategy: BenchStrategy,
    map: &FeatureMap<f64>,
    weights: &ParamWeights<f64>,
    cfg: &BenchConfig,
) -> Result<FeatureMap<f64>> {
    let params = normalize_gates(make_params(map, weights)?);
    match strategy {
        BenchStrategy::Tree => {
            let tree = minimum_spanning_tree(map, cfg.root)?;
            tree_scan(map, &tree, &params, cfg.variant)
        }
        BenchStrategy::Sequence(s) => {
            let perm = make_permutation(s, map.height(), map.width(), cfg.block)?;
            sequence_scan(map, &perm, &params)
        }
    }
}

/// Times every size and strategy. A warm-up pass per combination is run
/// first and excluded from the statistics; its output provides the checksum.
pub fn cmd_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.reps < MIN_REPS {
        return Err(Error::Data(format!("need at least {MIN_REPS} repetitions, got {}", cfg.reps)));
    }
    if cfg.channels == 0 {
        return Err(Error::Dimension("channel count must be positive".into()));
    }
    let mut records = Vec::with_capacity(cfg.sizes.len() * cfg.strategies.len());
    for &(h, w) in &cfg.sizes {
        if h == 0 || w == 0 {
            return Err(Error::Dimension(format!("bench size {h}x{w} must be positive")));
        }
        if cfg.root >= h * w {
            return Err(Error::Index { index: cfg.root, len: h * w });
        }
        let map = random_feature_map::<f64>(h, w, cfg.channels, cfg.seed);
        let weights = ParamWeights::random(cfg.channels, cfg.seed ^ WEIGHT_SEED_SALT);
        for &strategy in &cfg.strategies {
            let warm = run_strategy(strategy, &map, &weights, cfg)?;
            let mut times = Vec::with_capacity(cfg.reps);
            for _ in 0..cfg.reps {
                let start = Instant::now();
                let out = run_strategy(strategy, &map, &weights, cfg)?;
                times.push(start.elapsed().as_nanos() as u64);
                std::hint::black_box(out);
            }
            times.sort_unstable();
            let mid = times.len() / 2;
            let median_ns = if times.len() % 2 == 1 { times[mid] } else { (times[mid - 1] + times[mid]) / 2 };
            let adjacency_breaks = match strategy {
                BenchStrategy::Tree => order_breaks(minimum_spanning_tree(&map, cfg.root)?.bfs_order(), h, w),
                BenchStrategy::Sequence(s) => make_permutation(s, h, w, cfg.block)?.adjacency_violations(),
            };
            records.push(BenchRecord {
                strategy,
                height: h,
                width: w,
                nodes: h * w,
                reps: cfg.reps,
                median_ns,
                min_ns: times[0],
                max_ns: *times.last().unwrap(),
                adjacency_breaks,
                checksum: checksum(&warm),
            });
        }
    }
    Ok(records)
}

/// Parses `HxW[,HxW...]`.
pub fn parse_sizes(list: &str) -> Result<Vec<(usize, usize)>> {
    list.split(',')
        .map(|part| {
            let (h, w) =
                part.trim().split_once(['x', 'X']).ok_or_else(|| Error::Data(format!("size {part:?} is not HxW")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| Error::Data(format!("size {part:?} has a non-positive dimension")))
            };
            Ok((parse(h)?, parse(w)?))
        })
        .collect()
}

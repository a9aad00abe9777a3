use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use treescan::baseline::{make_permutation, sequence_scan, Strategy};
use treescan::bench::{cmd_bench, BenchConfig, BenchRecord};
use treescan::io::{load_depth, load_tensor, save_pgm, save_tensor};
use treescan::metrics::depth_metrics;
use treescan::mos::{group_candidates, run_mos_pipeline, select_depth_maps, MosOptions, Rating, ScoreTable, Spread};
use treescan::scan::{gradient_check, make_params, normalize_gates, tree_scan, ParamWeights, ScanParams, ScanVariant};
use treescan::tree::{cosine_distance, minimum_spanning_tree};
use treescan::{DepthMap, FeatureMap};

use crate::{InternalFailure, IoArgs};

fn load_map(path: &Path) -> Result<FeatureMap<f64>> {
    load_tensor(path).with_context(|| format!("reading {}", path.display()))
}

fn seeded_params(map: &FeatureMap<f64>, seed: u64) -> Result<ScanParams<f64>> {
    let weights = ParamWeights::random(map.channels(), seed);
    Ok(normalize_gates(make_params(map, &weights)?))
}

fn write_outputs(io: &IoArgs, y: &FeatureMap<f64>) -> Result<()> {
    save_tensor(y, &io.output).with_context(|| format!("writing {}", io.output.display()))?;
    if let Some(pgm) = &io.pgm {
        save_pgm(&DepthMap::from_channel_shifted(y, 0)?, pgm).with_context(|| format!("writing {}", pgm.display()))?;
    }
    Ok(())
}

pub fn scan(io: &IoArgs, root: usize, variant: ScanVariant) -> Result<()> {
    let map = load_map(&io.input)?;
    let tree = minimum_spanning_tree(&map, root)?;
    let params = seeded_params(&map, io.seed)?;
    write_outputs(io, &tree_scan(&map, &tree, &params, variant)?)
}

pub fn baseline(io: &IoArgs, strategy: Strategy, block: usize) -> Result<()> {
    let map = load_map(&io.input)?;
    let perm = make_permutation(strategy, map.height(), map.width(), block)?;
    let params = seeded_params(&map, io.seed)?;
    write_outputs(io, &sequence_scan(&map, &perm, &params)?)
}

pub fn mst(input: &Path, root: usize) -> Result<()> {
    let map = load_map(input)?;
    let tree = minimum_spanning_tree(&map, root)?;
    let mut out = io::stdout().lock();
    writeln!(out, "root {}", tree.root())?;
    for (u, v) in tree.edges() {
        let (u, v) = (u.min(v), u.max(v));
        let weight = cosine_distance(map.node(u), map.node(v))?;
        writeln!(out, "{u} {v} {weight}")?;
    }
    Ok(())
}

pub fn gradcheck(seed: u64, h: usize, w: usize, variant: ScanVariant, step: f64, threshold: f64) -> Result<()> {
    let report = gradient_check(seed, h, w, variant, step)?;
    let worst = report.max();
    println!("max_rel_error {worst:e}");
    println!("grad_x {:e}", report.grad_x);
    println!("grad_a {:e}", report.grad_a);
    println!("grad_b {:e}", report.grad_b);
    println!("grad_c {:e}", report.grad_c);
    if worst.is_nan() || worst > threshold {
        return Err(InternalFailure(format!("gradient error {worst:e} exceeds {threshold:e}")).into());
    }
    Ok(())
}

pub fn metrics(pred: &Path, reference: &Path, eps: f64, align: bool, csv: bool) -> Result<()> {
    let load = |p: &Path| load_depth::<f64>(p).with_context(|| format!("reading {}", p.display()));
    let (mut p, mut r) = (load(pred)?, load(reference)?);
    if align {
        p = p.min_max_normalized();
        r = r.min_max_normalized();
    }
    let report = depth_metrics(&p, &r, eps)?;
    if csv {
        let values: Vec<String> = report.entries().iter().map(|(_, v)| v.to_string()).collect();
        println!("{}", values.join(","));
    } else {
        for (name, v) in report.entries() {
            println!("{name} {v}");
        }
    }
    Ok(())
}

pub struct MosJob {
    pub scores: PathBuf,
    pub output: Option<PathBuf>,
    /// Candidate input and selection output.
    pub candidates: Option<(PathBuf, PathBuf)>,
    pub outlier_cap: f64,
    pub filter: bool,
    pub spread: Spread,
}

fn csv_reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let found = rdr.headers()?;
    if found.iter().ne(header.iter().copied()) {
        bail!(
            "{}: expected header {:?}, found {:?}",
            path.display(),
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        );
    }
    Ok(rdr)
}

fn csv_sink(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("writing {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    Ok(csv::WriterBuilder::new().from_writer(sink))
}

fn read_ratings(path: &Path) -> Result<Vec<Rating>> {
    let mut ratings = Vec::new();
    for (line, rec) in csv_reader(path, &["rater", "item", "dimension", "score"])?.records().enumerate() {
        let rec = rec?;
        let ctx = || format!("{} record {}", path.display(), line + 1);
        ratings.push(Rating {
            rater: rec[0].to_string(),
            item: rec[1].to_string(),
            dimension: rec[2].parse().with_context(ctx)?,
            score: rec[3].parse().with_context(ctx)?,
        });
    }
    Ok(ratings)
}

fn read_candidates(path: &Path) -> Result<Vec<(String, u64, f64)>> {
    csv_reader(path, &["item", "source", "score"])?
        .records()
        .enumerate()
        .map(|(line, rec)| {
            let rec = rec?;
            let ctx = || format!("{} record {}", path.display(), line + 1);
            Ok((rec[0].to_string(), rec[1].parse().with_context(ctx)?, rec[2].parse().with_context(ctx)?))
        })
        .collect()
}

pub fn mos(job: &MosJob) -> Result<()> {
    let table = ScoreTable::from_ratings(&read_ratings(&job.scores)?)?;
    let opts = MosOptions { outlier_rate_cap: job.outlier_cap, spread: job.spread, filter: job.filter };
    let (result, outcome) = run_mos_pipeline(&table, &opts)?;
    if job.filter && outcome.skipped {
        eprintln!("warning: fewer than 3 raters, outlier screening skipped");
    }
    for id in &outcome.excluded {
        eprintln!("excluded rater {id}");
    }
    for id in &result.dropped_items {
        eprintln!("dropped item {id}: no valid score in some dimension");
    }
    let mut out = csv_sink(job.output.as_deref())?;
    out.write_record(["item", "content", "depth", "mos"])?;
    for m in &result.items {
        out.write_record([m.item.clone(), m.content.to_string(), m.depth.to_string(), m.mos.to_string()])?;
    }
    out.flush()?;

    if let Some((input, dest)) = &job.candidates {
        let picks = select_depth_maps(&group_candidates(read_candidates(input)?))?;
        let mut sel = csv_sink(Some(dest))?;
        sel.write_record(["item", "source", "score", "retained"])?;
        for s in &picks {
            sel.write_record([s.item.clone(), s.source.to_string(), s.score.to_string(), s.retained.to_string()])?;
        }
        sel.flush()?;
    }
    Ok(())
}

pub fn bench(cfg: &BenchConfig, output: Option<&Path>) -> Result<()> {
    let records = cmd_bench(cfg)?;
    let mut sink: Box<dyn Write> = match output {
        Some(p) => Box::new(File::create(p).with_context(|| format!("writing {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(sink, "{}", BenchRecord::CSV_HEADER)?;
    for r in &records {
        writeln!(sink, "{}", r.csv_row())?;
    }
    sink.flush()?;
    Ok(())
}

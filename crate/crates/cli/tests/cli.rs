use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use treescan::io::{load_tensor, save_pgm, save_tensor};
use treescan::rng::random_feature_map;
use treescan::scan::{make_params, normalize_gates, tree_scan, ParamWeights, ScanVariant};
use treescan::tree::minimum_spanning_tree;
use treescan::{DepthMap, FeatureMap};

fn treescan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treescan")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_map(dir: &Path, name: &str, map: &FeatureMap<f64>) -> String {
    let path = dir.join(name);
    save_tensor(map, &path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn usage_and_exit_codes() {
    assert_eq!(treescan(&[]).status.code(), Some(1));
    let unknown = treescan(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(treescan(&["--help"]).status.code(), Some(0));
    assert_eq!(treescan(&["scan", "--input", "/nonexistent.tsr", "--output", "/tmp/x"]).status.code(), Some(1));
    assert_eq!(treescan(&["scan", "--variant", "bogus"]).status.code(), Some(1));
}

#[test]
fn gradcheck_passes_and_threshold_fails() {
    let ok = treescan(&["gradcheck", "--seed", "7"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    let err: f64 = text.lines().next().unwrap().strip_prefix("max_rel_error ").unwrap().parse().unwrap();
    assert!(err < 1e-4);
    assert_eq!(treescan(&["gradcheck", "--seed", "7", "--variant", "literal"]).status.code(), Some(0));
    assert_eq!(treescan(&["gradcheck", "--seed", "7", "--threshold", "0"]).status.code(), Some(2));
}

#[test]
#[allow(clippy::approx_constant)]
fn mst_lists_tree_edges() {
    let dir = TempDir::new().unwrap();
    let s = 0.7071;
    let map = FeatureMap::new(2, 2, 2, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, s, s]).unwrap();
    let input = write_map(dir.path(), "f.tsr", &map);
    let out = treescan(&["mst", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "root 0");
    let pairs: Vec<(usize, usize)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(pairs, vec![(0, 1), (1, 3), (2, 3)]);
    assert_eq!(stdout(&treescan(&["mst", "--input", &input, "--root", "3"])).lines().next(), Some("root 3"));
    assert_eq!(treescan(&["mst", "--input", &input, "--root", "4"]).status.code(), Some(1));
}

#[test]
fn scan_matches_library_and_writes_pgm() {
    let dir = TempDir::new().unwrap();
    let map = random_feature_map::<f64>(5, 6, 3, 11);
    let input = write_map(dir.path(), "in.tsr", &map);
    let output = dir.path().join("out.tsr");
    let pgm = dir.path().join("out.pgm");
    let out = treescan(&[
        "scan",
        "--input",
        &input,
        "--output",
        output.to_str().unwrap(),
        "--seed",
        "5",
        "--root",
        "7",
        "--variant",
        "literal",
        "--pgm",
        pgm.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // The file stores f32, so the input goes through the same rounding.
    let stored: FeatureMap<f64> = load_tensor(&input).unwrap();
    let tree = minimum_spanning_tree(&stored, 7).unwrap();
    let params = normalize_gates(make_params(&stored, &ParamWeights::random(3, 5)).unwrap());
    let want = tree_scan(&stored, &tree, &params, ScanVariant::LiteralEq9).unwrap();
    let got: FeatureMap<f64> = load_tensor(&output).unwrap();
    assert!(got.same_shape(&want));
    for (g, w) in got.data().iter().zip(want.data()) {
        assert!((g - w).abs() <= 1e-6 * w.abs().max(1.0));
    }
    let header = fs::read(&pgm).unwrap();
    assert!(header.starts_with(b"P5 6 5 65535\n"));
    assert_eq!(header.len(), b"P5 6 5 65535\n".len() + 2 * 30);
}

#[test]
fn baseline_runs_every_strategy() {
    let dir = TempDir::new().unwrap();
    let input = write_map(dir.path(), "in.tsr", &random_feature_map::<f64>(4, 7, 2, 3));
    for strategy in ["raster", "continuous", "diagonal", "nesteds"] {
        let output = dir.path().join(format!("{strategy}.tsr"));
        let out = treescan(&[
            "baseline",
            "--input",
            &input,
            "--output",
            output.to_str().unwrap(),
            "--strategy",
            strategy,
            "--block",
            "3",
        ]);
        assert_eq!(out.status.code(), Some(0), "{strategy}");
        let y: FeatureMap<f64> = load_tensor(&output).unwrap();
        assert_eq!((y.height(), y.width(), y.channels()), (4, 7, 2));
    }
    let out = treescan(&["baseline", "--input", &input, "--output", "/tmp/unused.tsr", "--strategy", "zigzag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn metrics_name_value_and_csv() {
    let dir = TempDir::new().unwrap();
    let one = DepthMap::filled(4, 4, 1.0).unwrap();
    let two = DepthMap::filled(4, 4, 2.0).unwrap();
    let reference = write_map(dir.path(), "ref.tsr", &one.clone().into_feature_map());
    let pred = write_map(dir.path(), "pred.tsr", &two.into_feature_map());

    let text = stdout(&treescan(&["metrics", "--pred", &pred, "--ref", &reference]));
    let names: Vec<&str> = text.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(names, ["rmse", "rmse_log", "a_rel", "s_rel", "log10", "delta1", "delta2", "delta3"]);
    assert!(text.contains("a_rel 1\n"));
    assert!(text.contains("delta3 0\n"));

    let csv = stdout(&treescan(&["metrics", "--pred", &pred, "--ref", &reference, "--csv"]));
    assert_eq!(csv.lines().count(), 1);
    assert_eq!(csv.trim().split(',').count(), 8);

    let pgm = dir.path().join("ref.pgm");
    save_pgm(&DepthMap::new(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap(), &pgm).unwrap();
    let same = stdout(&treescan(&["metrics", "--pred", pgm.to_str().unwrap(), "--ref", pgm.to_str().unwrap()]));
    assert!(same.contains("rmse 0\n") && same.contains("delta1 1\n"));
    let mismatch = treescan(&["metrics", "--pred", pgm.to_str().unwrap(), "--ref", &reference]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn mos_pipeline_files() {
    let dir = TempDir::new().unwrap();
    let mut scores = String::from("rater,item,dimension,score\n");
    for (r, offset) in ["ann", "bo", "cy", "di"].iter().zip([0, 1, 0, 1]) {
        for (i, base) in [("a", 1), ("b", 2), ("c", 3)] {
            scores.push_str(&format!("{r},{i},content,{}\n", base + offset));
            scores.push_str(&format!("{r},{i},depth,{}\n", 5 - base - offset + 1));
        }
    }
    let scores_path = dir.path().join("scores.csv");
    fs::write(&scores_path, scores).unwrap();
    let candidates_path = dir.path().join("cand.csv");
    fs::write(&candidates_path, "item,source,score\na,2,95\na,1,95\nb,0,89.5\n").unwrap();
    let mos_path = dir.path().join("mos.csv");
    let sel_path = dir.path().join("sel.csv");
    let out = treescan(&[
        "mos",
        "--scores",
        scores_path.to_str().unwrap(),
        "--output",
        mos_path.to_str().unwrap(),
        "--candidates",
        candidates_path.to_str().unwrap(),
        "--selection",
        sel_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mos = fs::read_to_string(&mos_path).unwrap();
    let lines: Vec<&str> = mos.lines().collect();
    assert_eq!(lines[0], "item,content,depth,mos");
    assert_eq!(lines.len(), 4);
    let content: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(content[0] < content[1] && content[1] < content[2]);
    assert!(content.iter().all(|v| (1.0..=100.0).contains(v)));

    let sel = fs::read_to_string(&sel_path).unwrap();
    assert_eq!(sel, "item,source,score,retained\na,1,95,true\nb,0,89.5,false\n");

    let small = dir.path().join("small.csv");
    fs::write(&small, "rater,item,dimension,score\nx,a,content,1\nx,b,content,3\nx,a,depth,2\nx,b,depth,4\n").unwrap();
    let out = treescan(&["mos", "--scores", small.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("screening skipped"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "item,rater,dimension,score\n").unwrap();
    assert_eq!(treescan(&["mos", "--scores", bad.to_str().unwrap()]).status.code(), Some(1));
    fs::write(&bad, "rater,item,dimension,score\nx,a,content,6\n").unwrap();
    assert_eq!(treescan(&["mos", "--scores", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn bench_rows_and_deterministic_checksums() {
    let run = || {
        let out = treescan(&["bench", "--sizes", "16x16,32x32", "--reps", "3", "--seed", "4"]);
        assert_eq!(out.status.code(), Some(0));
        stdout(&out)
    };
    let (first, second) = (run(), run());
    let rows = |t: &str| -> Vec<Vec<String>> {
        t.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
    };
    let (a, b) = (rows(&first), rows(&second));
    assert_eq!(a.len(), 2 * 5);
    assert!(first.starts_with("strategy,height,width,nodes,reps,median_ns,min_ns,max_ns,adjacency_breaks,checksum\n"));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x[0], y[0]);
        assert_eq!(x[9], y[9], "checksum differs for {}", x[0]);
    }
    let tree: Vec<&Vec<String>> = a.iter().filter(|r| r[0] == "tree").collect();
    assert_eq!(tree[1][3].parse::<usize>().unwrap(), 4 * tree[0][3].parse::<usize>().unwrap());
    assert_eq!(treescan(&["bench", "--reps", "2"]).status.code(), Some(1));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn graphon(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphon"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

/// `(index, value columns)` rows of a result table.
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sample_is_reproducible_and_writes_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--graphon", "er:0.4", "--n", "100", "--seed", "1", "--out"];
    let a = graphon(&[&args[..], &["a"]].concat(), dir.path());
    let b = graphon(&[&args[..], &["b"]].concat(), dir.path());
    assert_ok(&a);
    assert_ok(&b);
    assert!(stdout(&a).starts_with("edge_density="));
    for file in ["adjacency.csv", "labels.csv", "config.toml"] {
        let x = fs::read(dir.path().join("a").join(file)).unwrap();
        let y = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
    let snapshot = fs::read_to_string(dir.path().join("a/config.toml")).unwrap();
    assert!(snapshot.contains("graphon = \"er:0.4\"") && snapshot.contains("seed = 1"));
}

#[test]
fn sample_accepts_exp_and_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&graphon(&["sample", "--graphon", "exp:2.3", "--n", "30", "--out", "x"], dir.path()));
    let zero = graphon(&["sample", "--graphon", "er:0.4", "--n", "0"], dir.path());
    assert_eq!(zero.status.code(), Some(2));
    let bad = graphon(&["sample", "--graphon", "nope:1", "--n", "5"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    let out_of_range = graphon(&["sample", "--graphon", "er:1.5", "--n", "5"], dir.path());
    assert_eq!(out_of_range.status.code(), Some(2));
}

#[test]
fn spectrum_of_constant_graphon_is_one_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let o = graphon(&["spectrum", "--graphon", "er:0.4", "--resolution", "200"], dir.path());
    assert_ok(&o);
    let rows: Vec<Vec<String>> = data_rows(&stdout(&o))
        .into_iter()
        .filter(|r| r[1].parse::<f64>().unwrap() != 0.0)
        .collect();
    assert_eq!(rows.len(), 1, "{rows:?}");
    assert_eq!(rows[0][0], "1");
    assert!((rows[0][1].parse::<f64>().unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn spectrum_of_two_node_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p2.csv"), "0,1\n1,0\n").unwrap();
    let o = graphon(&["spectrum", "--graph", "p2.csv"], dir.path());
    assert_ok(&o);
    let rows = data_rows(&stdout(&o));
    let parsed: Vec<(String, f64, f64)> = rows
        .iter()
        .map(|r| (r[0].clone(), r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    assert_eq!(parsed.len(), 2);
    assert_eq!(parsed[0].0, "1");
    assert_eq!(parsed[1].0, "-1");
    assert!((parsed[0].1 - 1.0).abs() < 1e-12 && (parsed[1].1 + 1.0).abs() < 1e-12);
    assert!((parsed[0].2 - 0.5).abs() < 1e-12 && (parsed[1].2 + 0.5).abs() < 1e-12);
}

#[test]
fn spectrum_refinement_agrees_on_top_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let top = |n: &str| -> f64 {
        let o = graphon(&["spectrum", "--graphon", "exp:2.3", "--resolution", n, "--k", "3"], dir.path());
        assert_ok(&o);
        data_rows(&stdout(&o))[0][1].parse().unwrap()
    };
    // Midpoint discretization of a smooth kernel converges at O(1/N^2).
    assert!((top("500") - top("1000")).abs() < 1e-4);
}

#[test]
fn filter_identities_and_cross_mode_check() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.csv"), "0,1,0.5\n1,0,0.25\n0.5,0.25,0\n").unwrap();
    fs::write(dir.path().join("x.csv"), "1\n-2\n0.5\n").unwrap();
    let values = |o: &Output| -> Vec<f64> {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.parse().unwrap())
            .collect()
    };
    let echo = graphon(&["filter", "--graph", "g.csv", "--signal", "x.csv", "--taps", "1"], dir.path());
    assert_ok(&echo);
    assert_eq!(values(&echo), vec![1.0, -2.0, 0.5]);
    assert!(stdout(&echo).contains("# mode=poly"));
    let spectral = graphon(
        &["filter", "--graph", "g.csv", "--signal", "x.csv", "--filter", "const:1", "--mode", "spectral"],
        dir.path(),
    );
    assert_ok(&spectral);
    for (a, b) in values(&spectral).iter().zip([1.0, -2.0, 0.5]) {
        assert!((a - b).abs() < 1e-12);
    }
    let check = graphon(
        &["filter", "--graph", "g.csv", "--signal", "x.csv", "--taps", "0.5,-1,0.25", "--check"],
        dir.path(),
    );
    assert_ok(&check);
    let gap: f64 = stdout(&check)
        .lines()
        .find_map(|l| l.strip_prefix("# cross_mode_max_difference="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(gap < 1e-10, "{gap}");
    let missing = graphon(&["filter", "--graph", "g.csv", "--signal", "x.csv", "--mode", "poly"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn density_of_edge_and_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let edge = graphon(&["density", "--motif", "edge", "--graphon", "er:0.4"], dir.path());
    assert_ok(&edge);
    let v: f64 = data_rows(&stdout(&edge))[0][1].parse().unwrap();
    assert!((v - 0.4).abs() < 1e-15);
    fs::write(dir.path().join("k3.csv"), "0,1,1\n1,0,1\n1,1,0\n").unwrap();
    let tri = graphon(&["density", "--motif", "cycle:3", "--graph", "k3.csv"], dir.path());
    assert_ok(&tri);
    let v: f64 = data_rows(&stdout(&tri))[0][1].parse().unwrap();
    assert!((v - 6.0 / 27.0).abs() < 1e-15);
}

#[test]
fn experiment_is_deterministic_and_rerunnable_from_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["experiment", "eigconv", "--graphon", "er:0.4", "--n", "50,100,200", "--reps", "5", "--seed", "7", "--resolution", "200"];
    let a = graphon(&[&args[..], &["--out", "a", "--svg"]].concat(), dir.path());
    let b = graphon(&[&args[..], &["--out", "b", "--threads", "1"]].concat(), dir.path());
    assert_ok(&a);
    assert_ok(&b);
    let read = |d: &str, f: &str| fs::read(dir.path().join(d).join(f)).unwrap();
    for f in ["eigconv.csv", "eigconv_summary.csv", "freq_response.csv", "config.toml"] {
        assert_eq!(read("a", f), read("b", f), "{f}");
    }
    assert!(String::from_utf8(read("a", "eigconv.csv")).unwrap().starts_with("# schema=v1\n"));
    assert!(String::from_utf8(read("a", "eigconv.svg")).unwrap().contains("<polyline"));
    let c = graphon(&["experiment", "eigconv", "--config", "a/config.toml", "--out", "c"], dir.path());
    assert_ok(&c);
    assert_eq!(read("a", "eigconv.csv"), read("c", "eigconv.csv"));
}

#[test]
fn pollution_at_reduced_scale_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let o = graphon(
        &["experiment", "pollution", "--n", "10,20,50,100", "--reps", "20", "--resolution", "400", "--out", "p"],
        dir.path(),
    );
    assert_ok(&o);
    let summary = fs::read_to_string(dir.path().join("p/pollution_summary.csv")).unwrap();
    let header: Vec<String> = summary
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let col = header.iter().position(|h| h == "median").unwrap();
    let medians: Vec<f64> = data_rows(&summary).iter().map(|r| r[col].parse().unwrap()).collect();
    assert_eq!(medians.len(), 4);
    assert!(medians[3] < medians[0], "{medians:?}");
}

#[test]
fn bad_config_and_mismatched_experiment_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "no_such_key = 3\n").unwrap();
    let o = graphon(&["experiment", "gmrf", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    fs::write(dir.path().join("other.toml"), "experiment = \"pollution\"\n").unwrap();
    let o = graphon(&["experiment", "gmrf", "--config", "other.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = graphon(&["experiment", "gmrf", "--n", "50,20"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn movie_without_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = graphon(&["experiment", "movie"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fetch_movielens.sh"));
    let o = graphon(&["experiment", "movie", "--data", "missing/u.data"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn movie_runs_on_synthetic_ratings() {
    let dir = tempfile::tempdir().unwrap();
    let o = graphon(
        &["experiment", "movie", "--synthetic", "--n", "200,400", "--orders", "1", "--out", "m", "--svg"],
        dir.path(),
    );
    assert_ok(&o);
    let csv = fs::read_to_string(dir.path().join("m/movie.csv")).unwrap();
    assert!(csv.contains("K,base_rmse,n200,n400"));
    assert!(dir.path().join("m/movie.svg").exists());
    let snapshot = fs::read_to_string(dir.path().join("m/config.toml")).unwrap();
    assert!(snapshot.starts_with("experiment = \"movie\""));
}

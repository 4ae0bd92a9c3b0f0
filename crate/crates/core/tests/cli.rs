use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn thinning(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinning"))
        .args(args)
        .current_dir(dir)
        .env_remove("THINNING_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn dstar_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = thinning(&["dstar"], tmp.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# seed=1\n"));
    assert!(text.contains("# d_star=0.08323049"));

    let o = thinning(&["dstar", "--set", "alpha=0"], tmp.path());
    assert!(stdout(&o).contains("# d_star=0.0 attained_at=0"));

    let cfg = write(tmp.path(), "bad.cfg", "alpha = 0.9\np_d = 1.2\n");
    let o = thinning(&["dstar", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p_d"));
}

#[test]
fn value_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = thinning(&["value", "--star", "--set", "mark_law=point:0.1"], tmp.path());
    let rows = data_rows(&stdout(&o));
    assert!((rows[0][0].parse::<f64>().unwrap() - 22.5).abs() < 1e-9);

    let pat = write(tmp.path(), "x.csv", "x,y,mark\n1,1,0.05\n2,2,0.03\n");
    let o = thinning(&["value", &pat, "--horizon", "1"], tmp.path());
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows[0][0], "0.08");

    let o = thinning(&["value", &pat, "--star"], tmp.path());
    let row: Vec<f64> = data_rows(&stdout(&o))[0][..3].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], row[1] + row[2]);

    let bad = write(tmp.path(), "bad.csv", "x,y,mark\n1,1,0.05\n2,oops,0.03\n");
    let o = thinning(&["value", &bad, "--star"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 2"));
}

#[test]
fn bounds_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let pat = write(tmp.path(), "x.csv", "x,y,mark\n1,1,0.05\n2,2,0.03\n0.02,4.9,0.08\n");
    let o = thinning(&["bounds", &pat, "--n-max", "60", "--set", "integration=montecarlo"], tmp.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<(u32, f64, f64)> = data_rows(&text)
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    assert_eq!(rows.len(), 60);
    assert_eq!(rows[0], (1, 0.16, 0.16));
    assert!(rows.iter().all(|(_, lo, hi)| lo <= hi));
    let (last, prev) = (rows[49].2, rows[48].2);
    assert!((last - prev).abs() / last < 1e-3);

    let clash = write(tmp.path(), "clash.csv", "x,y,mark\n1,1,0.05\n1.05,1,0.03\n");
    let o = thinning(&["bounds", &clash], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("points 0 and 1"));
}

#[test]
fn simulate_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let pat = write(tmp.path(), "x.csv", "x,y,mark\n1,1,0.05\n2,2,0.03\n");
    let o = thinning(&["simulate", &pat, "--policy", "removeall", "--horizon", "1", "--replications", "5"], tmp.path());
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows[0][..3], ["removeall", "0.08", "0.0"]);

    let o = thinning(&["simulate", "--policy", "keepall", "--set", "beta=0", "--replications", "5"], tmp.path());
    assert_eq!(data_rows(&stdout(&o))[0][1], "0.0");

    let o = thinning(&["simulate", "--policy", "thin:everything"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("french:<d>"));

    let o = thinning(&["simulate", "--policy", "french:dstar", "--replications", "2000"], tmp.path());
    let text = stdout(&o);
    let row = &data_rows(&text)[0];
    let (mean, se, trunc): (f64, f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap(), row[5].parse().unwrap());
    let v = thinning(&["value", "--star"], tmp.path());
    let exact: f64 = data_rows(&stdout(&v))[0][0].parse().unwrap();
    assert!((mean - exact).abs() <= 3.0 * se + trunc, "{mean} ± {se} vs {exact}");
    assert!(text.contains("# lemma1_bound="));
}

#[test]
fn outputs_are_deterministic_and_carry_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let pat = write(tmp.path(), "x.csv", "x,y,mark\n1,1,0.05\n2,2,0.03\n");
    let runs: [&[&str]; 3] = [
        &["simulate", &pat, "--policy", "german:0.05:0.5", "--replications", "200"],
        &["bounds", &pat, "--n-max", "20", "--set", "integration=montecarlo"],
        &["figure1", "--set", "figure_n_max=10", "--set", "gibbs_sweeps=50"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let out = tmp.path().join(format!("{}-{run}", args[0]));
            let mut full: Vec<&str> = args.to_vec();
            let out_str = out.to_str().unwrap().to_string();
            full.extend(["--seed", "17", "--out", &out_str]);
            let o = thinning(&full, tmp.path());
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
                })
                .collect();
            files.sort();
            assert!(!files.is_empty());
            for (name, bytes) in &files {
                assert!(bytes.starts_with(b"# seed=17\n"), "{name}");
            }
            outputs.push((o.stdout, files));
        }
        assert_eq!(outputs[0], outputs[1], "{}", args[0]);
    }
}

#[test]
fn env_var_sets_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_thinning"))
        .arg("dstar")
        .current_dir(tmp.path())
        .env("THINNING_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("dstar.csv")).unwrap(), o.stdout);
}

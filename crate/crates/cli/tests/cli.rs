use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bwk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bwk")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bwk-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: &str = "
env = stochastic
rewards = 0, 0.8, 0.5
consumptions = 0, 0.6, 0.2
T = 400
rho = 0.25
seeds = 3
master_seed = 9
";

#[test]
fn run_writes_one_row_per_seed_and_is_reproducible() {
    let cfg = scratch("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for out in [&a, &b] {
        let res = bwk(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "run_id,seed,algo,T,K,d,rho,sigma_r_decl,sigma_c_decl,sigma_r_meas,sigma_c_meas,T_A,REW,OPT_FD,ratio,E,T_res"
    );
    assert_eq!(lines.len(), 4);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn run_prints_csv_to_stdout_without_out() {
    let cfg = scratch("stdout.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let res = bwk(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(res.status.success());
    assert_eq!(stdout(&res).lines().count(), 4);
    assert!(String::from_utf8_lossy(&res.stderr).contains("mean"));
}

#[test]
fn sweep_concatenates_runs_with_fresh_ids() {
    let cfg = scratch("sweep.cfg");
    fs::write(&cfg, SMALL.replace("seeds = 3", "seeds = 2")).unwrap();
    let res = bwk(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--param", "rho", "--from", "0.1", "--to", "0.3", "--steps", "3",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = stdout(&res);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let ids: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(ids, ["0", "1", "2", "3", "4", "5"]);
    let rhos: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    for (got, want) in rhos.iter().zip([0.1, 0.1, 0.2, 0.2, 0.3, 0.3]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn bounds_tabulates_the_grid() {
    let out = scratch("bounds.csv");
    let res = bwk(&[
        "bounds", "--rho", "0.04", "--sigma-c", "0.04", "--d", "1", "--grid", "11", "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rho,sigma_r,sigma_c,d,thm2,thm5,thm4_upper,x_argmin");
    assert_eq!(lines.len(), 12);
    // sigma_c = rho keeps thm2 at rho for every sigma_r.
    let last: Vec<f64> = lines[11].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[1], 1.0);
    assert!((last[4] - 0.04).abs() < 1e-12);
}

fn write_trace(name: &str, body: &str) -> PathBuf {
    let path = scratch(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn opt_reports_the_hindsight_solution() {
    let mut body = String::from("t,action,r,c_1\n");
    for t in 1..=40 {
        body.push_str(&format!("{t},1,1,1\n"));
    }
    let trace = write_trace("unit.csv", &body);
    let res = bwk(&["opt", "--trace", trace.to_str().unwrap(), "--budget", "30"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = stdout(&res);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T_star,value,x,p_0,p_1");
    let v: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(v[0], 30.0);
    assert!((v[1] - 30.0).abs() < 1e-9);
    assert!((v[2] - 0.75).abs() < 1e-12);
    assert!((v[3] + v[4] - 1.0).abs() < 1e-12);
}

#[test]
fn check_measures_stationarity() {
    let mut body = String::from("t,action,r,c_1\n");
    for t in 1..=10 {
        let r = if t % 2 == 0 { 1.0 } else { 0.5 };
        body.push_str(&format!("{t},1,{r},0.4\n"));
    }
    let trace = write_trace("two_level.csv", &body);
    let res = bwk(&["check", "--trace", trace.to_str().unwrap()]);
    assert!(res.status.success());
    let text = stdout(&res);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,K,d,sigma_r,sigma_c,E_max");
    assert_eq!(lines[1], "10,2,1,0.5,1,0");
}

#[test]
fn validation_errors_exit_with_one() {
    let cfg = scratch("bad.cfg");
    fs::write(&cfg, format!("{SMALL}period = 10\n")).unwrap();
    assert_eq!(bwk(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(bwk(&["run", "--config", "/nonexistent/bwk.cfg"]).status.code(), Some(1));
    assert_eq!(bwk(&["bounds", "--rho", "0", "--sigma-c", "0.1"]).status.code(), Some(1));
    assert_eq!(bwk(&["bounds", "--rho", "abc", "--sigma-c", "0.1"]).status.code(), Some(1));
    assert_eq!(bwk(&["frobnicate"]).status.code(), Some(1));
    let good = scratch("good.cfg");
    fs::write(&good, SMALL).unwrap();
    let res = bwk(&["sweep", "--config", good.to_str().unwrap(), "--param", "env", "--from", "0", "--to", "1", "--steps", "2"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let cfg = scratch("io.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let res = bwk(&["run", "--config", cfg.to_str().unwrap(), "--out", "/nonexistent-dir/runs.csv"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn help_succeeds() {
    let res = bwk(&["--help"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(stdout(&res).contains("sweep"));
}

use std::path::Path;
use std::process::{Command, Output};

fn rsma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsma-sop")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn analytic_prints_sop_and_terms() {
    let o = rsma(&["analytic", "--scenario", "II", "--set", "tx_power_dbm=10"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("scenario = II"));
    let sop: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("sop = "))
        .expect("sop line")
        .parse()
        .unwrap();
    assert!((sop - 0.014831).abs() < 1e-5, "{sop}");
    assert!(text.contains("term Delta_3"));
}

#[test]
fn mc_is_reproducible() {
    let args = ["mc", "-s", "I", "-n", "20000", "--seed", "4"];
    let a = rsma(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, rsma(&args).stdout);
    let full = rsma(&["mc", "-s", "I", "-n", "2000", "--full-vector"]);
    assert!(stdout(&full).contains("mc_trials = 2000"));
}

#[test]
fn sweep_csv_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        "scenario = \"II\"\naxis_1 = \"tx_power_dbm\"\nvalues_1 = [0.0, 10.0]\nmode = \"compare\"\nn_trials = 20000\nseed = 3\n",
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = rsma(&["sweep", "-c", &cfg, "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tx_power_dbm,scenario,sop_analytic,sop_mc,std_err,abs_diff,flagged,converged,status"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn two_axis_sweep_is_axis_major() {
    let o = rsma(&[
        "sweep",
        "--set",
        "axis_1=tx_power_dbm",
        "--set",
        "values_1=[0, 10]",
        "--set",
        "axis_2=r_e",
        "--set",
        "values_2=[25, 30, 35]",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][..2], ["0.00000000e0", "2.50000000e1"]);
    assert_eq!(rows[1][..2], ["0.00000000e0", "3.00000000e1"]);
    assert_eq!(rows[3][..2], ["1.00000000e1", "2.50000000e1"]);
}

#[test]
fn invalid_point_is_error_row_and_exit_1() {
    // τ_1 = 0.9 with τ_c = τ_2 = 1/3 breaks the power budget
    let o = rsma(&["sweep", "--set", "axis_1=tau_1", "--set", "values_1=[0.2, 0.9]"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",ok"));
    assert!(rows[2].contains("error:"), "{}", rows[2]);
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(rsma(&["analytic", "--set", "no_such_key=1"]).status.code(), Some(2));
    assert_eq!(rsma(&["analytic", "-c", "/nonexistent/run.toml"]).status.code(), Some(2));
    assert_eq!(rsma(&["analytic", "-s", "V"]).status.code(), Some(2));
    assert_eq!(rsma(&["noma-compare", "--step", "0.3", "--analytic-only"]).status.code(), Some(2));
}

#[test]
fn noma_compare_reports_both_minima() {
    let o = rsma(&["noma-compare", "-s", "IV", "--step", "0.1", "--analytic-only", "--set", "r_e=25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for key in ["rsma:", "noma_tau2_zero:", "noma_tau1_zero:", "rsma_le_noma = true"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn quad_order_flag_applies() {
    let o = rsma(&["analytic", "-s", "III", "--quad-order", "20"]);
    assert!(o.status.success());
    assert_eq!(rsma(&["analytic", "--quad-order", "0"]).status.code(), Some(2));
}

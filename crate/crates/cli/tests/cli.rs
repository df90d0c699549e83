use std::process::{Command, Output};

fn confluence(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confluence")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn base_lists_first_points() {
    let o = confluence(&["base", "--delta", "0.01", "--count", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let qs: Vec<&str> = text.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(qs, ["3186", "3964", "4742"]);
}

#[test]
fn zeta_two_is_pi_squared_over_six() {
    let o = confluence(&["zeta", "--sigma", "2", "--t", "0", "--digits", "20"]);
    assert!(stdout(&o).contains("1.6449340668482264364"));
}

#[test]
fn errors_carry_a_category_and_exit_code() {
    let o = confluence(&["zeta", "--sigma", "1", "--t", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error[pole]"));
}

#[test]
fn search_refuses_to_overwrite_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let run = run.to_str().unwrap();
    let first = confluence(&["search", "--delta", "0.1", "--max-order", "3", "--base-count", "1500", "--out", run]);
    assert!(first.status.success());
    let again = confluence(&["search", "--delta", "0.1", "--max-order", "4", "--base-count", "1500", "--out", run]);
    assert_eq!(again.status.code(), Some(2));
    let resumed =
        confluence(&["search", "--delta", "0.1", "--max-order", "4", "--base-count", "1500", "--out", run, "--resume"]);
    assert!(resumed.status.success());
    let text = stdout(&resumed);
    assert!(text.contains("C3 delta 0.1 points 23 first 8274"));
    assert!(text.contains("C4 delta 0.1 points 26 first 171406"));
    let stats = confluence(&["stats", "--run", run, "--order", "4"]);
    assert!(stats.status.success());
}

use std::collections::BTreeMap;
use std::fs;

use confluence::confsearch::{run_partial, run_with_hook, ExhaustionPolicy, RunConfig, RunResult};
use confluence::store::{load_table, save_table, table_from_str, table_to_string, PointTable, RunDir};
use confluence::precision::PrimePair;

fn config(max_order: usize, steps: u64) -> RunConfig {
    let mut c = RunConfig::new(PrimePair::TWO_THREE, 0.1, max_order);
    c.budgets = BTreeMap::from([(2, 1500), (3, steps)]);
    c.exhaustion = ExhaustionPolicy::Relax { step: 0.1, retries: 1 };
    c
}

fn table(r: &RunResult, order: usize) -> PointTable {
    let o = &r.orders[&order];
    PointTable::new(o.criteria.clone(), o.delta_used, o.points.clone())
}

fn dir_bytes(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != RunDir::LOCK)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn order_three_table_round_trips() {
    let r = run_partial(&config(3, 5000), None).unwrap();
    let t = table(&r, 3);
    let d = tempfile::tempdir().unwrap();
    let path = d.path().join("c3.tbl");
    save_table(&path, &t).unwrap();
    assert_eq!(load_table(&path).unwrap(), t);
}

#[test]
fn relaxed_order_round_trips() {
    let r = run_partial(&config(5, 50_000), None).unwrap();
    let t = table(&r, 5);
    assert_eq!(table_from_str(&table_to_string(&t)).unwrap(), t);
}

#[test]
fn edited_tables_are_rejected() {
    let r = run_partial(&config(3, 5000), None).unwrap();
    let text = table_to_string(&table(&r, 3));
    let (head, body) = text.split_once("---\n").unwrap();
    let mut rows: Vec<&str> = body.lines().collect();
    rows.swap(0, 1);
    let swapped = format!("{head}---\n{}\n", rows.join("\n"));
    assert_eq!(table_from_str(&swapped).unwrap_err().category(), "checksum");

    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let sha = lines.iter().position(|l| l.starts_with("sha256 ")).unwrap();
    let sep = lines.iter().position(|l| l == "---").unwrap();
    lines.swap(sep + 1, sep + 2);
    let body: String = lines[sep + 1..].iter().map(|l| format!("{l}\n")).collect();
    lines[sha] = format!("sha256 {}", sha256_hex(&body));
    let resealed = lines.join("\n") + "\n";
    let e = table_from_str(&resealed).unwrap_err();
    assert_eq!(e.category(), "format");
    assert!(e.to_string().contains("out of order"));

    let bumped = text.replacen("confluence-table 1", "confluence-table 9", 1);
    assert_eq!(table_from_str(&bumped).unwrap_err().category(), "version");
}

fn sha256_hex(s: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(s.as_bytes()))
}

#[test]
fn split_runs_write_identical_directories() {
    let full_cfg = config(5, 50_000);
    let whole = tempfile::tempdir().unwrap();
    {
        let d = RunDir::open(whole.path()).unwrap();
        let r = run_partial(&full_cfg, None).unwrap();
        d.save(&r).unwrap();
    }

    let split = tempfile::tempdir().unwrap();
    {
        let d = RunDir::open(split.path()).unwrap();
        let r = run_partial(&config(3, 20_000), None).unwrap();
        d.save(&r).unwrap();
    }
    {
        let d = RunDir::open(split.path()).unwrap();
        let prev = d.load().unwrap().unwrap();
        let r = run_with_hook(&full_cfg, Some(&prev), &mut |r| d.save(r)).unwrap();
        d.save(&r).unwrap();
    }
    assert_eq!(dir_bytes(whole.path()), dir_bytes(split.path()));
}

#[test]
fn a_locked_directory_refuses_a_second_owner() {
    let d = tempfile::tempdir().unwrap();
    let first = RunDir::open(d.path()).unwrap();
    assert_eq!(RunDir::open(d.path()).err().unwrap().category(), "locked");
    drop(first);
    assert!(RunDir::open(d.path()).is_ok());
}

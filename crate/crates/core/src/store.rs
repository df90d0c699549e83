//! Text file formats for point tables, gap tables, run configurations and
//! run directories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::confsearch::{Criteria, GapTable, OrderResult, RunConfig, RunEvent, RunResult, WalkStop};
use crate::error::{Error, Result};
use crate::modspace::{ConfluencePoint, Window};
use crate::precision::turns::PhaseKernel;
use crate::precision::{ExactT, PrimePair};

pub const TABLE_VERSION: u32 = 1;
pub const CONFIG_VERSION: u32 = 1;
const TABLE_MAGIC: &str = "confluence-table";
const GAPS_MAGIC: &str = "confluence-gaps";
const STATE_MAGIC: &str = "confluence-state";
const SEPARATOR: &str = "---";
/// Stored residues may differ from recomputed ones by rounding only.
const RESIDUE_TOLERANCE: f64 = 1e-12;

/// A persisted set of same-order points with the windows they satisfy.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTable {
    pub pair: PrimePair,
    pub order: usize,
    pub delta: f64,
    pub criteria: Criteria,
    pub points: Vec<ConfluencePoint>,
}

impl PointTable {
    pub fn new(criteria: Criteria, delta: f64, points: Vec<ConfluencePoint>) -> PointTable {
        PointTable {
            pair: criteria.pair,
            order: criteria.order(),
            delta,
            criteria,
            points,
        }
    }
}

fn checksum(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Format(format!("bad {what}: {s:?}")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Format(format!("bad {what}: {s:?}")))
}

fn parse_biguint(s: &str) -> Result<BigUint> {
    BigUint::from_str(s).map_err(|_| Error::Format(format!("bad integer: {s:?}")))
}

/// Header key/value lines, a separator, then the body.
struct Document<'a> {
    header: Vec<(&'a str, &'a str)>,
    body: &'a str,
}

impl<'a> Document<'a> {
    fn split(text: &'a str, magic: &str, version: u32) -> Result<Document<'a>> {
        let (head, body) = text
            .split_once(&format!("\n{SEPARATOR}\n"))
            .ok_or_else(|| Error::Format("missing header separator".into()))?;
        let mut lines = head.lines();
        let first = lines.next().unwrap_or_default();
        let (m, v) = first.split_once(' ').unwrap_or((first, ""));
        if m != magic {
            return Err(Error::Format(format!("expected a {magic} file")));
        }
        let found: u32 = v.parse().map_err(|_| Error::Format(format!("bad version {v:?}")))?;
        if found != version {
            return Err(Error::Version { found, expected: version });
        }
        let header = lines
            .map(|l| l.split_once(' ').ok_or_else(|| Error::Format(format!("bad header line {l:?}"))))
            .collect::<Result<_>>()?;
        let doc = Document { header, body };
        if checksum(body) != doc.get("sha256")? {
            return Err(Error::Checksum("body does not match its sha256".into()));
        }
        Ok(doc)
    }

    fn get(&self, key: &str) -> Result<&'a str> {
        self.header
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Format(format!("missing header field {key}")))
    }

    fn all(&self, key: &str) -> Vec<&'a str> {
        self.header.iter().filter(|(k, _)| *k == key).map(|(_, v)| *v).collect()
    }
}

fn assemble(magic: &str, version: u32, header: &str, body: &str) -> String {
    format!("{magic} {version}\n{header}sha256 {}\n{SEPARATOR}\n{body}", checksum(body))
}

pub fn table_to_string(t: &PointTable) -> String {
    let mut header = String::new();
    writeln!(header, "pair {}", t.pair).unwrap();
    writeln!(header, "order {}", t.order).unwrap();
    writeln!(header, "delta {}", fmt_f64(t.delta)).unwrap();
    writeln!(header, "theta pi/2").unwrap();
    writeln!(header, "k-definition {}", t.pair.k_definition()).unwrap();
    for (p, w) in t.criteria.primes().iter().zip(t.criteria.windows()) {
        writeln!(header, "window {p} {} {}", fmt_f64(w.lo), fmt_f64(w.hi)).unwrap();
    }
    writeln!(header, "count {}", t.points.len()).unwrap();
    let mut body = String::new();
    for p in &t.points {
        body.push_str(&p.q().to_string());
        for r in &p.residues {
            write!(body, " {r:.15}").unwrap();
        }
        body.push('\n');
    }
    assemble(TABLE_MAGIC, TABLE_VERSION, &header, &body)
}

/// Parses a table, recomputing every residue and checking it against the
/// stored value, the header windows and the ordering of q.
pub fn table_from_str(text: &str) -> Result<PointTable> {
    let doc = Document::split(text, TABLE_MAGIC, TABLE_VERSION)?;
    let pair = PrimePair::parse(doc.get("pair")?)?;
    let order = parse_usize(doc.get("order")?, "order")?;
    let delta = parse_f64(doc.get("delta")?, "delta")?;
    if doc.get("k-definition")? != pair.k_definition() {
        return Err(Error::Format("k definition does not match the pair".into()));
    }
    let mut windows = Vec::new();
    for w in doc.all("window") {
        let f: Vec<&str> = w.split(' ').collect();
        let [p, lo, hi] = f[..] else {
            return Err(Error::Format(format!("bad window {w:?}")));
        };
        let p: u64 = p.parse().map_err(|_| Error::Format(format!("bad prime {p:?}")))?;
        windows.push((p, Window { lo: parse_f64(lo, "window")?, hi: parse_f64(hi, "window")? }));
    }
    if windows.len() != order || order < 2 || windows[0].0 != pair.p1 || windows[1].0 != pair.p2 {
        return Err(Error::Format("windows do not match the pair and order".into()));
    }
    let criteria = Criteria {
        pair,
        base: windows[0].1,
        added: windows[2..].to_vec(),
    };
    if criteria.windows() != windows.iter().map(|w| w.1).collect::<Vec<_>>() {
        return Err(Error::Format("the two base windows differ".into()));
    }
    let count = parse_usize(doc.get("count")?, "count")?;
    let mut rows = Vec::with_capacity(count);
    for (i, line) in doc.body.lines().enumerate() {
        let mut f = line.split(' ');
        let q = parse_biguint(f.next().unwrap_or_default())?;
        let stored: Vec<f64> = f.map(|r| parse_f64(r, "residue")).collect::<Result<_>>()?;
        if stored.len() != order {
            return Err(Error::Format(format!("row {} has {} residues", i + 1, stored.len())));
        }
        if let Some((prev, _)) = rows.last() {
            if &q <= prev {
                return Err(Error::Format(format!("row {} is out of order", i + 1)));
            }
        }
        rows.push((q, stored));
    }
    if rows.len() != count {
        return Err(Error::Format(format!("expected {count} rows, found {}", rows.len())));
    }
    let primes = criteria.primes();
    let q_bits = rows.last().map_or(8, |(q, _)| q.bits() + 8);
    let kernel = PhaseKernel::new(pair, &primes, q_bits);
    let mut points = Vec::with_capacity(count);
    for (i, (q, stored)) in rows.into_iter().enumerate() {
        let residues = kernel.residues(&q);
        if residues.iter().zip(&stored).any(|(a, b)| (a - b).abs() > RESIDUE_TOLERANCE) {
            return Err(Error::Format(format!("row {} residues do not match q", i + 1)));
        }
        if !criteria.accepts(&residues) {
            return Err(Error::Format(format!("row {} lies outside the header windows", i + 1)));
        }
        points.push(ConfluencePoint {
            order,
            t: ExactT::new(q, pair),
            delta,
            residues,
        });
    }
    Ok(PointTable {
        pair,
        order,
        delta,
        criteria,
        points,
    })
}

pub fn save_table(path: &Path, t: &PointTable) -> Result<()> {
    write_atomic(path, &table_to_string(t))
}

pub fn load_table(path: &Path) -> Result<PointTable> {
    table_from_str(&fs::read_to_string(path)?)
}

pub fn gaps_to_string(pair: PrimePair, g: &GapTable) -> String {
    let mut header = String::new();
    writeln!(header, "pair {pair}").unwrap();
    writeln!(header, "order {}", g.order).unwrap();
    writeln!(header, "source-delta {}", fmt_f64(g.source_delta)).unwrap();
    writeln!(header, "count {}", g.len()).unwrap();
    let mut body = String::new();
    for (gap, c) in g.gaps.iter().zip(&g.counts) {
        writeln!(body, "{gap} {c}").unwrap();
    }
    assemble(GAPS_MAGIC, TABLE_VERSION, &header, &body)
}

pub fn gaps_from_str(text: &str) -> Result<(PrimePair, GapTable)> {
    let doc = Document::split(text, GAPS_MAGIC, TABLE_VERSION)?;
    let pair = PrimePair::parse(doc.get("pair")?)?;
    let order = parse_usize(doc.get("order")?, "order")?;
    let source_delta = parse_f64(doc.get("source-delta")?, "source delta")?;
    let mut gaps = Vec::new();
    let mut counts = Vec::new();
    for line in doc.body.lines() {
        let (g, c) = line.split_once(' ').ok_or_else(|| Error::Format(format!("bad gap row {line:?}")))?;
        let g = parse_biguint(g)?;
        if gaps.last().is_some_and(|l| &g <= l) {
            return Err(Error::Format("gaps out of order".into()));
        }
        gaps.push(g);
        counts.push(c.parse().map_err(|_| Error::Format(format!("bad count {c:?}")))?);
    }
    if gaps.len() != parse_usize(doc.get("count")?, "count")? {
        return Err(Error::Format("gap count mismatch".into()));
    }
    if gaps.iter().any(|g| g.bit(0) || *g == BigUint::ZERO) {
        return Err(Error::Format("gaps must be positive and even".into()));
    }
    Ok((pair, GapTable { order, gaps, counts, source_delta }))
}

/// Flat `key = value` text with a leading version line.
pub fn config_to_string(c: &RunConfig) -> String {
    let mut s = format!("version = {CONFIG_VERSION}\npair = {}\n", c.pair);
    for (o, d) in &c.delta_schedule {
        writeln!(s, "delta.{o} = {}", fmt_f64(*d)).unwrap();
    }
    for (o, b) in &c.budgets {
        writeln!(s, "budget.{o} = {b}").unwrap();
    }
    writeln!(s, "max-order = {}", c.max_order).unwrap();
    writeln!(s, "gap-acquisition = {}", c.gap_acquisition).unwrap();
    writeln!(s, "exhaustion = {}", c.exhaustion).unwrap();
    writeln!(s, "base-n-start = {}", c.base_n_start).unwrap();
    writeln!(s, "evaluation-ceiling = {}", fmt_f64(c.evaluation_ceiling)).unwrap();
    s
}

pub fn config_from_str(text: &str) -> Result<RunConfig> {
    let mut kv = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key = value", i + 1)))?;
        if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Format(format!("line {}: duplicate key {}", i + 1, k.trim())));
        }
    }
    let version: u32 = kv
        .remove("version")
        .ok_or_else(|| Error::Format("missing version".into()))?
        .parse()
        .map_err(|_| Error::Format("bad version".into()))?;
    if version != CONFIG_VERSION {
        return Err(Error::Version { found: version, expected: CONFIG_VERSION });
    }
    let pair = match kv.remove("pair") {
        Some(p) => PrimePair::parse(&p)?,
        None => PrimePair::TWO_THREE,
    };
    let mut c = RunConfig::new(pair, 0.1, 2);
    c.delta_schedule.clear();
    c.budgets.clear();
    for (k, v) in kv {
        let order_of = |k: &str| -> Result<usize> { parse_usize(k, "order in key") };
        if let Some(o) = k.strip_prefix("delta.") {
            c.delta_schedule.insert(order_of(o)?, parse_f64(&v, &k)?);
        } else if let Some(o) = k.strip_prefix("budget.") {
            c.budgets.insert(order_of(o)?, v.parse().map_err(|_| Error::Format(format!("bad {k}")))?);
        } else {
            match k.as_str() {
                "max-order" => c.max_order = parse_usize(&v, &k)?,
                "gap-acquisition" => c.gap_acquisition = parse_usize(&v, &k)?,
                "exhaustion" => c.exhaustion = v.parse()?,
                "base-n-start" => c.base_n_start = v.parse().map_err(|_| Error::Format(format!("bad {k}")))?,
                "evaluation-ceiling" => c.evaluation_ceiling = parse_f64(&v, &k)?,
                _ => return Err(Error::Format(format!("unknown key {k}"))),
            }
        }
    }
    if c.budgets.is_empty() {
        c.budgets.insert(2, 1500);
    }
    c.validate()?;
    Ok(c)
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// An output directory owned by one process for as long as the value lives.
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub const LOCK: &'static str = "run.lock";

    pub fn open(root: &Path) -> Result<RunDir> {
        fs::create_dir_all(root)?;
        let lock = root.join(Self::LOCK);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(RunDir { root: root.to_path_buf() }),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(Error::Locked(format!(
                "{} (remove it if no other process owns the directory)",
                lock.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn table_path(&self, order: usize) -> PathBuf {
        self.root.join(format!("C{order:02}.tbl"))
    }

    pub fn gaps_path(&self, order: usize) -> PathBuf {
        self.root.join(format!("G{order:02}.gap"))
    }

    fn config_path(&self) -> PathBuf {
        self.root.join("config.txt")
    }

    fn state_path(&self) -> PathBuf {
        self.root.join("state.txt")
    }

    pub fn save_config(&self, c: &RunConfig) -> Result<()> {
        write_atomic(&self.config_path(), &config_to_string(c))
    }

    pub fn load_config(&self) -> Result<Option<RunConfig>> {
        match fs::read_to_string(self.config_path()) {
            Ok(t) => config_from_str(&t).map(Some),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes every order's table, its gap table and the run state.
    pub fn save(&self, r: &RunResult) -> Result<()> {
        for (o, res) in &r.orders {
            save_table(&self.table_path(*o), &PointTable::new(res.criteria.clone(), res.delta_used, res.points.clone()))?;
            if let Some(g) = &res.gap_table {
                write_atomic(&self.gaps_path(*o), &gaps_to_string(r.pair, g))?;
            }
        }
        write_atomic(&self.state_path(), &state_to_string(r))
    }

    /// The persisted run, or none when the directory holds no state yet.
    pub fn load(&self) -> Result<Option<RunResult>> {
        let text = match fs::read_to_string(self.state_path()) {
            Ok(t) => t,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let doc = Document::split(&text, STATE_MAGIC, TABLE_VERSION)?;
        let pair = PrimePair::parse(doc.get("pair")?)?;
        let mut run = RunResult::empty(pair);
        run.aborted = doc.get("aborted")? == "true";
        for line in doc.body.lines() {
            let (kind, rest) = line.split_once(' ').unwrap_or((line, ""));
            match kind {
                "order" => {
                    let r = self.load_order(pair, rest)?;
                    run.orders.insert(r.order, r);
                }
                "event" => run.log.push(parse_event(rest)?),
                _ => return Err(Error::Format(format!("bad state line {line:?}"))),
            }
        }
        Ok(Some(run))
    }

    fn load_order(&self, pair: PrimePair, rest: &str) -> Result<OrderResult> {
        let f: BTreeMap<&str, &str> = rest.split(' ').filter_map(|kv| kv.split_once('=')).collect();
        let field = |k: &str| f.get(k).copied().ok_or_else(|| Error::Format(format!("state is missing {k}")));
        let order = parse_usize(field("order")?, "order")?;
        let table = load_table(&self.table_path(order))?;
        if table.pair != pair || table.order != order {
            return Err(Error::Format(format!("table for order {order} does not match the state")));
        }
        let gap_table = match field("gaps")? {
            "none" => None,
            _ => {
                let (p, g) = gaps_from_str(&fs::read_to_string(self.gaps_path(order))?)?;
                if p != pair {
                    return Err(Error::Format("gap table pair mismatch".into()));
                }
                Some(g)
            }
        };
        let last_visited = match field("last")? {
            "none" => None,
            q => Some(ExactT::new(parse_biguint(q)?, pair)),
        };
        let parse_u64 = |k: &str| -> Result<u64> { field(k)?.parse().map_err(|_| Error::Format(format!("bad {k}"))) };
        Ok(OrderResult {
            order,
            delta_used: table.delta,
            criteria: table.criteria,
            points: table.points,
            gap_table,
            steps: parse_u64("steps")?,
            first_gap_hits: parse_u64("first-gap-hits")?,
            last_visited,
            stop: match field("stop")? {
                "budget" => WalkStop::Budget,
                "exhausted" => WalkStop::Exhausted,
                s => return Err(Error::Format(format!("bad stop {s:?}"))),
            },
            adjustments: parse_u64("adjustments")? as u32,
        })
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.root.join(Self::LOCK));
    }
}

fn state_to_string(r: &RunResult) -> String {
    let header = format!("pair {}\naborted {}\n", r.pair, r.aborted);
    let mut body = String::new();
    for (o, res) in &r.orders {
        writeln!(
            body,
            "order order={o} steps={} first-gap-hits={} last={} stop={} adjustments={} gaps={}",
            res.steps,
            res.first_gap_hits,
            res.last_visited.as_ref().map_or("none".to_string(), |t| t.q().to_string()),
            match res.stop {
                WalkStop::Budget => "budget",
                WalkStop::Exhausted => "exhausted",
            },
            res.adjustments,
            if res.gap_table.is_some() { "file" } else { "none" },
        )
        .unwrap();
    }
    for e in &r.log {
        writeln!(body, "event {e}").unwrap();
    }
    assemble(STATE_MAGIC, TABLE_VERSION, &header, &body)
}

fn parse_event(s: &str) -> Result<RunEvent> {
    let (kind, rest) = s.split_once(' ').unwrap_or((s, ""));
    let f: BTreeMap<&str, &str> = rest.split(' ').filter_map(|kv| kv.split_once('=')).collect();
    let get = |k: &str| f.get(k).copied().ok_or_else(|| Error::Format(format!("event is missing {k}")));
    let order = parse_usize(get("order")?, "order")?;
    Ok(match kind {
        "exhausted" => RunEvent::Exhausted {
            order,
            stranded: parse_biguint(get("stranded")?)?,
            delta: parse_f64(get("delta")?, "delta")?,
        },
        "relaxed" => RunEvent::Relaxed {
            order,
            from: parse_f64(get("from")?, "from")?,
            to: parse_f64(get("to")?, "to")?,
        },
        "reacquired" => RunEvent::Reacquired {
            order,
            points: parse_usize(get("points")?, "points")?,
            gaps: parse_usize(get("gaps")?, "gaps")?,
        },
        "aborted" => RunEvent::Aborted {
            order,
            stranded: parse_biguint(get("stranded")?)?,
        },
        "stopped" => RunEvent::Stopped {
            order,
            reason: rest.split_once("reason=").map_or("", |(_, r)| r).to_string(),
        },
        _ => return Err(Error::Format(format!("unknown event {kind:?}"))),
    })
}

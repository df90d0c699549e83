//! Command-line driver for the confluence library.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use confluence::confsearch::{build_gap_table, drift_stats, run_with_hook, ExhaustionPolicy, RunConfig, RunEvent, RunResult};
use confluence::error::{Error, Result};
use confluence::modspace::{base_set, portrait, BaseSetParams, ConfluencePoint};
use confluence::precision::{BigReal, ExactT, PrimePair, MIN_DIGITS};
use confluence::scanner::{scan_tables, BruteScan, ScanConfig, DEFAULT_SAMPLES};
use confluence::store::{config_from_str, save_table, PointTable, RunDir};
use confluence::titchmarsh::{disk_bound, negativity_threshold};
use confluence::zeta::{arg_buildup, crossing_index, cutoff, euler_log_partial, zeta_with_cutoff, Abscissa, EvalRequest, DEFAULT_CEILING};
use num_bigint::BigUint;
use num_rational::Ratio;

/// Environment variable holding the lowest precision any command may use.
pub const DIGITS_ENV: &str = "CONFLUENCE_MIN_DIGITS";

#[derive(Parser, Debug)]
#[command(name = "confluence", version, about = "Confluence sets of prime residues and negative values of zeta(1+it)")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Decimal digits of working precision
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    /// Output file or directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Continue from the state already stored at the output location
    #[arg(long, global = true)]
    pub resume: bool,
    /// Accepted for compatibility; every command is deterministic
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Disk bound on log zeta(sigma+it) and the negativity threshold
    Bounds {
        #[arg(long, default_value = "2")]
        sigma: f64,
    },
    /// Order-2 confluence points
    Base {
        #[arg(long, default_value = "2,3")]
        pair: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        qmax: Option<u64>,
        /// Maximum number of points
        #[arg(long)]
        count: Option<usize>,
        /// First and last R-line outer index, as A..B
        #[arg(long)]
        n_range: Option<String>,
    },
    /// Lift confluence sets order by order with gap tables
    Search(SearchArgs),
    /// Evaluate zeta around every point of a stored run
    Scan {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        max_order: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_CEILING)]
        ceiling: f64,
    },
    /// First t in a range with Re zeta(1+it) < 0
    Brutescan {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value = "0.1")]
        step: String,
    },
    /// zeta(sigma + it)
    Zeta {
        #[command(flatten)]
        point: PointArgs,
        /// Number of Dirichlet terms before the Euler-Maclaurin tail
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// Partial sum of log(1 - p^-s)^-1 over the first primes
    Logsum {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        terms: usize,
    },
    /// Accumulated arctan(1/sqrt(p^2-1)) over the first primes
    Buildup {
        #[arg(long, default_value_t = 15)]
        max: usize,
    },
    /// Residues of each congruence around a point
    Portrait {
        #[arg(long, default_value = "2,3")]
        pair: String,
        #[arg(long)]
        q: BigUint,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Gap drift statistics for one order of a stored run
    Stats {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        order: usize,
    },
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Run configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "2,3")]
    pub pair: String,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Order-2 point count
    #[arg(long)]
    pub base_count: Option<u64>,
    /// Walk steps for every order above 2
    #[arg(long)]
    pub steps: Option<u64>,
    /// abort, relax(step[,retries]) or reacquire(factor)
    #[arg(long)]
    pub exhaustion: Option<ExhaustionPolicy>,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[arg(long, default_value = "1")]
    pub sigma: String,
    /// Height as a decimal
    #[arg(long, conflicts_with = "q")]
    pub t: Option<String>,
    /// Height as an integer multiple of k
    #[arg(long)]
    pub q: Option<BigUint>,
    /// Offset added to q k, a fraction in [-1, 1]
    #[arg(long, allow_hyphen_values = true, requires = "q")]
    pub offset: Option<String>,
    #[arg(long, default_value = "2,3")]
    pub pair: String,
}

impl PointArgs {
    fn abscissa(&self) -> Result<Abscissa> {
        match (&self.t, &self.q) {
            (Some(t), None) => Abscissa::parse(t),
            (None, Some(q)) => {
                let t = ExactT::new(q.clone(), PrimePair::parse(&self.pair)?);
                Ok(Abscissa::Exact(match &self.offset {
                    Some(o) => t.with_offset(parse_ratio(o)?)?,
                    None => t,
                }))
            }
            _ => Err(Error::InvalidArgument("give either --t or --q".into())),
        }
    }
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("not a fraction: {s:?}")))
}

/// Working digits: the flag or the default, never below the environment floor.
pub fn effective_digits(flag: Option<u32>, default: u32) -> u32 {
    let floor = std::env::var(DIGITS_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(0);
    flag.unwrap_or(default).max(floor)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Bounds { sigma } => {
            let digits = effective_digits(g.digits, MIN_DIGITS);
            let d = disk_bound(*sigma, digits)?;
            let threshold = negativity_threshold(digits)?;
            let places = (digits / 2) as usize;
            writeln!(out, "sigma {sigma}")?;
            writeln!(out, "center {}", d.center.to_significant(digits as usize))?;
            writeln!(out, "radius {}", d.radius.to_significant(digits as usize))?;
            writeln!(out, "threshold {threshold:.places$}")?;
        }
        Command::Base { pair, delta, qmax, count, n_range } => {
            let pair = PrimePair::parse(pair)?;
            let mut p = BaseSetParams::new(pair, *delta);
            if let Some(q) = qmax {
                p = p.with_q_max(*q);
            }
            if let Some(c) = count {
                p = p.with_max_points(*c);
            }
            if let Some(r) = n_range {
                let (a, b) = r
                    .split_once("..")
                    .ok_or_else(|| Error::InvalidArgument("n range must look like A..B".into()))?;
                let n = |s: &str| s.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad index {s:?}")));
                p = p.with_n_range(n(a)?, n(b)?);
            }
            let points = base_set(&p)?;
            match &g.out {
                Some(path) => {
                    let criteria = confluence::confsearch::Criteria::base(pair, *delta);
                    save_table(path, &PointTable::new(criteria, *delta, points.clone()))?;
                    write_summary(out, 2, &points)?;
                }
                None => write_points(out, &points)?,
            }
        }
        Command::Search(a) => search(a, g, out)?,
        Command::Scan { run, max_order, samples, ceiling } => {
            let dir = RunDir::open(run)?;
            let r = dir.load()?.ok_or_else(|| Error::InvalidArgument(format!("{} holds no run", run.display())))?;
            drop(dir);
            let config = ScanConfig {
                digits: effective_digits(g.digits, confluence::scanner::SCAN_DIGITS).min(confluence::zeta::FAST_MAX_DIGITS),
                ceiling: *ceiling,
                ..ScanConfig::default()
            };
            let report = scan_tables(&r, *max_order, *samples, &config)?;
            let mut text = String::new();
            for h in &report.hits {
                let source = h.source.as_ref().map_or("none".to_string(), |p| format!("C{}:{}", p.order, p.q()));
                text += &format!(
                    "hit t={} decimal={} zeta={} source={source}\n",
                    h.t_sample,
                    h.decimal_t(),
                    h.zeta.format(6)
                );
            }
            for t in &report.unverifiable {
                text += &format!("unverifiable t={t} reason=above-ceiling\n");
            }
            text += &format!("windows {} hits {} unverifiable {}\n", report.windows, report.hits.len(), report.unverifiable.len());
            emit(out, g.out.as_deref(), &text)?;
        }
        Command::Brutescan { from, to, step } => brutescan(from, to, step, g, out)?,
        Command::Zeta { point, cutoff: n } => {
            let digits = effective_digits(g.digits, MIN_DIGITS);
            let req = EvalRequest::new(BigReal::parse(&point.sigma, digits + 20)?, point.abscissa()?, digits)?;
            let v = zeta_with_cutoff(&req, n.unwrap_or_else(|| cutoff(&req)), DEFAULT_CEILING)?;
            writeln!(out, "zeta({} + i {}) = {}", point.sigma, req.t, v.format(digits as usize))?;
            writeln!(out, "error-bound {:e}", v.err_bound)?;
        }
        Command::Logsum { point, terms } => {
            let digits = effective_digits(g.digits, MIN_DIGITS);
            let sigma = BigReal::parse(&point.sigma, digits + 20)?;
            let t = point.abscissa()?;
            let v = euler_log_partial(&sigma, &t, *terms, digits)?;
            writeln!(out, "logsum({} + i {}, {terms}) = {}", point.sigma, t, v.format(digits as usize))?;
        }
        Command::Buildup { max } => {
            for r in arg_buildup(*max) {
                writeln!(out, "{} {:.10}", r.n, r.value)?;
            }
            writeln!(out, "crossing {}", crossing_index())?;
        }
        Command::Portrait { pair, q, order, alpha, samples } => {
            let point = ConfluencePoint {
                order: *order,
                t: ExactT::new(q.clone(), PrimePair::parse(pair)?),
                delta: 0.0,
                residues: Vec::new(),
            };
            let mut text = String::from("prime\toffset\tresidue\n");
            for r in portrait(&point, *alpha, *samples)? {
                text += &format!("{}\t{:.6}\t{:.15}\n", r.prime, r.offset, r.residue);
            }
            emit(out, g.out.as_deref(), &text)?;
        }
        Command::Stats { run, order } => {
            let dir = RunDir::open(run)?;
            let r = dir.load()?.ok_or_else(|| Error::InvalidArgument(format!("{} holds no run", run.display())))?;
            let acquisition = dir.load_config()?.map_or(1500, |c| c.gap_acquisition);
            drop(dir);
            let o = r
                .orders
                .get(order)
                .ok_or_else(|| Error::InvalidArgument(format!("the run has no order {order}")))?;
            let table = build_gap_table(&o.points[..acquisition.min(o.points.len())])?;
            let s = drift_stats(&o.points, &table)?;
            writeln!(out, "points {}", s.points)?;
            writeln!(out, "table-gaps {}", table.len())?;
            writeln!(out, "first-gap {} fraction {:.6}", table.gaps[0], s.first_gap_fraction)?;
            writeln!(out, "off-table {}", s.off_table)?;
            writeln!(out, "residue min {:.15} max {:.15} mean {:.15}", s.min_residue, s.max_residue, s.mean_residue)?;
            writeln!(out, "residue-bins {}", s.residue_bins.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))?;
            for (g, c) in &s.gap_histogram {
                writeln!(out, "gap {g} {c}")?;
            }
        }
    }
    Ok(())
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_points(out: &mut dyn Write, points: &[ConfluencePoint]) -> Result<()> {
    for p in points {
        write!(out, "{}", p.q())?;
        for r in &p.residues {
            write!(out, " {r:.15}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn write_summary(out: &mut dyn Write, order: usize, points: &[ConfluencePoint]) -> Result<()> {
    let q = |p: Option<&ConfluencePoint>| p.map_or("none".to_string(), |p| p.q().to_string());
    writeln!(out, "C{order} points {} first {} last {}", points.len(), q(points.first()), q(points.last()))?;
    Ok(())
}

fn search_config(a: &SearchArgs, stored: Option<RunConfig>) -> Result<RunConfig> {
    let mut c = match (&a.config, stored) {
        (Some(path), _) => config_from_str(&fs::read_to_string(path)?)?,
        (None, Some(c)) => c,
        (None, None) => {
            let delta = a
                .delta
                .ok_or_else(|| Error::InvalidArgument("search needs --config or --delta".into()))?;
            RunConfig::new(PrimePair::parse(&a.pair)?, delta, 3)
        }
    };
    if let Some(m) = a.max_order {
        c.max_order = m;
    }
    if let Some(b) = a.base_count {
        c.budgets.insert(2, b);
    }
    if let Some(s) = a.steps {
        c.budgets.retain(|o, _| *o <= 2);
        c.budgets.insert(3, s);
    }
    if let Some(e) = a.exhaustion {
        c.exhaustion = e;
    }
    c.validate()?;
    Ok(c)
}

fn search(a: &SearchArgs, g: &Global, out: &mut dyn Write) -> Result<()> {
    let report = |r: &RunResult, out: &mut dyn Write| -> Result<()> {
        for o in r.orders.values() {
            let q = |t: Option<&ExactT>| t.map_or("none".to_string(), |t| t.q().to_string());
            writeln!(
                out,
                "C{} delta {} points {} first {} last {} mean-gap {:.1} steps {}",
                o.order,
                o.delta_used,
                o.points.len(),
                q(o.first()),
                q(o.last()),
                o.mean_gap(),
                o.steps
            )?;
        }
        for e in &r.log {
            writeln!(out, "event {e}")?;
        }
        Ok(())
    };
    let Some(path) = &g.out else {
        let c = search_config(a, None)?;
        let r = run_with_hook(&c, None, &mut |_| Ok(()))?;
        report(&r, out)?;
        return exhausted_error(&r);
    };
    let dir = RunDir::open(path)?;
    let previous = dir.load()?;
    if previous.is_some() && !g.resume {
        return Err(Error::InvalidArgument(format!(
            "{} already holds a run; pass --resume to continue it",
            path.display()
        )));
    }
    let stored = if g.resume { dir.load_config()? } else { None };
    let c = search_config(a, stored)?;
    dir.save_config(&c)?;
    let r = run_with_hook(&c, previous.as_ref(), &mut |r| dir.save(r))?;
    dir.save(&r)?;
    report(&r, out)?;
    exhausted_error(&r)
}

fn exhausted_error(r: &RunResult) -> Result<()> {
    if !r.aborted {
        return Ok(());
    }
    match r.log.iter().rev().find(|e| matches!(e, RunEvent::Aborted { .. })) {
        Some(RunEvent::Aborted { order, stranded }) => Err(Error::GapTableExhausted {
            order: *order,
            stranded: stranded.to_string(),
            delta: r.orders.get(order).map_or(0.0, |o| o.delta_used),
        }),
        _ => Ok(()),
    }
}

fn brutescan(from: &str, to: &str, step: &str, g: &Global, out: &mut dyn Write) -> Result<()> {
    let mut scan = BruteScan::new(from, to, step)?;
    let state = g.out.as_ref().map(|p| p.with_extension("state"));
    if let (true, Some(s)) = (g.resume, &state) {
        if let Ok(text) = fs::read_to_string(s) {
            let saved = parse_brute_state(&text)?;
            if (saved.start, saved.end, saved.step) != (scan.start, scan.end, scan.step) {
                return Err(Error::InvalidArgument("stored scan state is for a different range".into()));
            }
            scan.next = saved.next;
        }
    }
    let config = ScanConfig {
        digits: effective_digits(g.digits, confluence::scanner::SCAN_DIGITS).min(confluence::zeta::FAST_MAX_DIGITS),
        ..ScanConfig::default()
    };
    let mut found = None;
    while !scan.is_done() && found.is_none() {
        found = scan.advance(256, &config)?;
        if let Some(s) = &state {
            fs::write(s, brute_state(&scan))?;
        }
    }
    let text = match found {
        Some(h) => format!("first-negative t={} zeta={}\n", h.t, h.value.format(6)),
        None => format!("none in [{from}, {to}] at step {step}\n"),
    };
    emit(out, g.out.as_deref(), &text)
}

fn brute_state(s: &BruteScan) -> String {
    format!("brutescan 1\nfrom {}\nto {}\nstep {}\nnext {}\n", s.start, s.end, s.step, s.next)
}

fn parse_brute_state(text: &str) -> Result<BruteScan> {
    let kv: BTreeMap<&str, &str> = text.lines().filter_map(|l| l.split_once(' ')).collect();
    if kv.get("brutescan") != Some(&"1") {
        return Err(Error::Format("not a brutescan state file".into()));
    }
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| Error::Format(format!("state is missing {k}")));
    let mut s = BruteScan::new(get("from")?, get("to")?, get("step")?)?;
    s.next = get("next")?.parse().map_err(|_| Error::Format("bad next index".into()))?;
    Ok(s)
}

/// The line printed for a failed command.
pub fn error_line(e: &Error) -> String {
    format!("error[{}]: {e}", e.category())
}

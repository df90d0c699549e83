//! Gap tables and the gap-table walk that lifts order-n points to order n+1.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modspace::{base_set, base_window, BaseSetParams, ConfluencePoint, Window};
use crate::precision::turns::{Phase, PhaseKernel, TurnWindow};
use crate::precision::{ExactT, PrimePair};
use crate::primes::prime_sequence;

pub const DEFAULT_ACQUISITION: usize = 1500;

#[derive(Clone, Debug, PartialEq)]
pub struct GapTable {
    pub order: usize,
    pub gaps: Vec<BigUint>,
    pub counts: Vec<u64>,
    pub source_delta: f64,
}

impl GapTable {
    /// A table with the given gaps, each counted once.
    pub fn from_gaps(order: usize, gaps: &[u64], source_delta: f64) -> Result<GapTable> {
        let mut map = BTreeMap::new();
        for &g in gaps {
            *map.entry(BigUint::from(g)).or_insert(0u64) += 1;
        }
        GapTable::from_map(order, map, source_delta)
    }

    fn from_map(order: usize, map: BTreeMap<BigUint, u64>, source_delta: f64) -> Result<GapTable> {
        if map.keys().any(|g| g.is_zero() || g.is_odd()) {
            return Err(Error::InvalidArgument("gaps must be positive and even".into()));
        }
        let (gaps, counts) = map.into_iter().unzip();
        Ok(GapTable {
            order,
            gaps,
            counts,
            source_delta,
        })
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn contains(&self, gap: &BigUint) -> bool {
        self.gaps.binary_search(gap).is_ok()
    }

    pub fn max_gap(&self) -> BigUint {
        self.gaps.last().cloned().unwrap_or_default()
    }

    /// Union with another table of the same order; counts add.
    pub fn merge(&self, other: &GapTable) -> GapTable {
        let mut map: BTreeMap<BigUint, u64> = self.gaps.iter().cloned().zip(self.counts.iter().copied()).collect();
        for (g, c) in other.gaps.iter().zip(&other.counts) {
            *map.entry(g.clone()).or_insert(0) += c;
        }
        let (gaps, counts) = map.into_iter().unzip();
        GapTable {
            order: self.order,
            gaps,
            counts,
            source_delta: self.source_delta.max(other.source_delta),
        }
    }
}

/// Distinct successive differences of a sorted run of same-order points.
pub fn build_gap_table(points: &[ConfluencePoint]) -> Result<GapTable> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("a gap table needs at least 2 points".into()));
    }
    let order = points[0].order;
    let mut map = BTreeMap::new();
    for w in points.windows(2) {
        if w[1].order != order {
            return Err(Error::InvalidArgument("points of mixed order".into()));
        }
        if w[1].q() <= w[0].q() {
            return Err(Error::InvalidArgument("points must be strictly increasing".into()));
        }
        *map.entry(w[1].q() - w[0].q()).or_insert(0u64) += 1;
    }
    let delta = points.iter().map(|p| p.delta).fold(0.0, f64::max);
    GapTable::from_map(order, map, delta)
}

/// Residue windows defining an order-n confluence set: the base window for
/// the pair, then a one-sided window for every added prime.
#[derive(Clone, Debug, PartialEq)]
pub struct Criteria {
    pub pair: PrimePair,
    pub base: Window,
    pub added: Vec<(u64, Window)>,
}

impl Criteria {
    pub fn base(pair: PrimePair, delta: f64) -> Criteria {
        Criteria {
            pair,
            base: base_window(pair, delta),
            added: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        2 + self.added.len()
    }

    pub fn primes(&self) -> Vec<u64> {
        let mut v = vec![self.pair.p1, self.pair.p2];
        v.extend(self.added.iter().map(|(p, _)| *p));
        v
    }

    pub fn windows(&self) -> Vec<Window> {
        let mut v = vec![self.base, self.base];
        v.extend(self.added.iter().map(|(_, w)| *w));
        v
    }

    pub fn extended(&self, prime: u64, delta: f64) -> Criteria {
        let mut c = self.clone();
        c.added.push((prime, Window::one_sided(delta)));
        c
    }

    /// Same primes with every added window set to [0, delta).
    pub fn with_delta(&self, delta: f64) -> Criteria {
        let mut c = self.clone();
        for (_, w) in &mut c.added {
            *w = Window::one_sided(delta);
        }
        c
    }

    pub fn accepts(&self, residues: &[f64]) -> bool {
        residues.len() >= self.order()
            && self.windows().iter().zip(residues).all(|(w, r)| w.contains(*r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkStop {
    Budget,
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct Walk {
    /// Points that also passed the next prime.
    pub points: Vec<ConfluencePoint>,
    pub last_visited: ExactT,
    pub steps: u64,
    /// Steps resolved by the first gap of the table.
    pub first_gap_hits: u64,
    pub stop: WalkStop,
}

struct Walker {
    kernel: PhaseKernel,
    check: Vec<TurnWindow>,
    next: TurnWindow,
    gap_phases: Vec<Vec<Phase>>,
    gaps: Vec<BigUint>,
}

impl Walker {
    fn new(start: &ExactT, table: &GapTable, check: &Criteria, next_prime: u64, delta: f64, budget: u64) -> Walker {
        let mut primes = check.primes();
        primes.push(next_prime);
        let reach = table.max_gap() * BigUint::from(budget.max(1) + 1);
        let q_bits = (start.q() + reach).bits() + 8;
        let kernel = PhaseKernel::new(check.pair, &primes, q_bits);
        let gap_phases = table.gaps.iter().map(|g| kernel.phases(g)).collect();
        Walker {
            check: check.windows().iter().map(Window::turns).collect(),
            next: Window::one_sided(delta).turns(),
            kernel,
            gap_phases,
            gaps: table.gaps.clone(),
        }
    }

    fn passes_next(&self, phases: &[Phase]) -> bool {
        self.next.contains(phases[self.check.len()].top())
    }

    /// First gap index landing on a point of the checked set.
    fn step(&self, phases: &[Phase], scratch: &mut [Phase]) -> Option<usize> {
        'gaps: for (gi, gp) in self.gap_phases.iter().enumerate() {
            for (j, w) in self.check.iter().enumerate() {
                scratch[j].clone_from(&phases[j]);
                scratch[j].add_assign(&gp[j]);
                if !w.contains(scratch[j].top()) {
                    continue 'gaps;
                }
            }
            return Some(gi);
        }
        None
    }
}

/// Walks the order-n set from `start`, emitting every visited point that also
/// has its `next_prime` residue in [0, delta). At most `budget` steps are
/// taken. With `include_start` the start point itself is tested first.
pub fn walk(
    start: &ExactT,
    table: &GapTable,
    check: &Criteria,
    next_prime: u64,
    delta: f64,
    budget: u64,
    include_start: bool,
) -> Result<Walk> {
    if table.order != check.order() {
        return Err(Error::InvalidArgument(format!(
            "gap table is for order {} but the criteria have order {}",
            table.order,
            check.order()
        )));
    }
    if delta < table.source_delta {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} is tighter than the table's source delta {}",
            table.source_delta
        )));
    }
    if table.is_empty() {
        return Err(Error::InvalidArgument("empty gap table".into()));
    }
    let check = check.with_delta(delta);
    let walker = Walker::new(start, table, &check, next_prime, delta, budget);
    let order = check.order() + 1;
    let pair = check.pair;
    let mut q = start.q().clone();
    let mut phases = walker.kernel.phases(&q);
    let mut scratch = phases.clone();
    let mut points = Vec::new();
    let emit = |q: &BigUint, phases: &[Phase], points: &mut Vec<ConfluencePoint>| {
        points.push(ConfluencePoint {
            order,
            t: ExactT::new(q.clone(), pair),
            delta,
            residues: phases.iter().map(Phase::residue).collect(),
        });
    };
    if include_start && walker.passes_next(&phases) {
        emit(&q, &phases, &mut points);
    }
    let mut first_gap_hits = 0;
    let mut steps = 0;
    let mut stop = WalkStop::Budget;
    while steps < budget {
        let Some(gi) = walker.step(&phases, &mut scratch) else {
            stop = WalkStop::Exhausted;
            break;
        };
        steps += 1;
        if gi == 0 {
            first_gap_hits += 1;
        }
        for (j, p) in phases.iter_mut().enumerate() {
            p.add_assign(&walker.gap_phases[gi][j]);
        }
        q += &walker.gaps[gi];
        if walker.passes_next(&phases) {
            emit(&q, &phases, &mut points);
        }
    }
    Ok(Walk {
        points,
        last_visited: ExactT::new(q, pair),
        steps,
        first_gap_hits,
        stop,
    })
}

/// Order-(n+1) points reachable from `start` through the table, with the
/// checked primes' added windows at [0, delta). Exhaustion is an error
/// carrying the stranded position.
pub fn next_order_search(
    start: &ExactT,
    table: &GapTable,
    check: &Criteria,
    next_prime: u64,
    delta: f64,
    max_points: u64,
) -> Result<Walk> {
    let w = walk(start, table, check, next_prime, delta, max_points, true)?;
    if w.stop == WalkStop::Exhausted {
        return Err(Error::GapTableExhausted {
            order: table.order,
            stranded: w.last_visited.q().to_string(),
            delta,
        });
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExhaustionPolicy {
    Abort,
    /// Widen delta by `step` and continue from the stranded point, at most
    /// `retries` times per order.
    Relax { step: f64, retries: u32 },
    /// Rebuild the table from `factor` times as many points and continue.
    Reacquire { factor: f64 },
}

impl Default for ExhaustionPolicy {
    fn default() -> Self {
        ExhaustionPolicy::Relax {
            step: 0.01,
            retries: 1,
        }
    }
}

impl fmt::Display for ExhaustionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExhaustionPolicy::Abort => write!(f, "abort"),
            ExhaustionPolicy::Relax { step, retries } => write!(f, "relax({step},{retries})"),
            ExhaustionPolicy::Reacquire { factor } => write!(f, "reacquire({factor})"),
        }
    }
}

impl std::str::FromStr for ExhaustionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("bad exhaustion policy {s:?}"));
        let s = s.trim();
        if s == "abort" {
            return Ok(ExhaustionPolicy::Abort);
        }
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<&str> = rest.strip_suffix(')').ok_or_else(bad)?.split(',').map(str::trim).collect();
        match (name, args.as_slice()) {
            ("relax", [step]) => Ok(ExhaustionPolicy::Relax {
                step: step.parse().map_err(|_| bad())?,
                retries: 1,
            }),
            ("relax", [step, retries]) => Ok(ExhaustionPolicy::Relax {
                step: step.parse().map_err(|_| bad())?,
                retries: retries.parse().map_err(|_| bad())?,
            }),
            ("reacquire", [factor]) => Ok(ExhaustionPolicy::Reacquire {
                factor: factor.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub pair: PrimePair,
    /// delta per order; orders without an entry inherit the nearest lower one.
    pub delta_schedule: BTreeMap<usize, f64>,
    /// Order 2: number of base points. Higher orders: walk steps.
    pub budgets: BTreeMap<usize, u64>,
    pub max_order: usize,
    pub gap_acquisition: usize,
    pub exhaustion: ExhaustionPolicy,
    /// First R-line outer index used for the base set.
    pub base_n_start: i64,
    pub evaluation_ceiling: f64,
}

impl RunConfig {
    pub fn new(pair: PrimePair, base_delta: f64, max_order: usize) -> RunConfig {
        RunConfig {
            pair,
            delta_schedule: BTreeMap::from([(2, base_delta)]),
            budgets: BTreeMap::from([(2, 1500)]),
            max_order,
            gap_acquisition: DEFAULT_ACQUISITION,
            exhaustion: ExhaustionPolicy::default(),
            base_n_start: 1,
            evaluation_ceiling: crate::zeta::DEFAULT_CEILING,
        }
    }

    pub fn delta(&self, order: usize) -> f64 {
        self.delta_schedule
            .range(..=order)
            .next_back()
            .map(|(_, d)| *d)
            .unwrap_or(0.0)
    }

    pub fn budget(&self, order: usize) -> u64 {
        self.budgets
            .range(..=order)
            .next_back()
            .map(|(_, b)| *b)
            .unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order < 2 {
            return Err(Error::InvalidArgument("max order must be at least 2".into()));
        }
        if !self.delta_schedule.contains_key(&2) {
            return Err(Error::InvalidArgument("delta schedule needs an entry for order 2".into()));
        }
        for (o, d) in &self.delta_schedule {
            if !(*d > 0.0 && *d < std::f64::consts::FRAC_PI_2) {
                return Err(Error::InvalidArgument(format!("delta for order {o} must lie in (0, pi/2)")));
            }
        }
        if self.budgets.values().any(|b| *b == 0) {
            return Err(Error::InvalidArgument("budgets must be at least 1".into()));
        }
        if self.gap_acquisition < 2 {
            return Err(Error::InvalidArgument("gap acquisition size must be at least 2".into()));
        }
        match self.exhaustion {
            ExhaustionPolicy::Relax { step, .. } if !(step > 0.0) => {
                Err(Error::InvalidArgument("relax step must be positive".into()))
            }
            ExhaustionPolicy::Reacquire { factor } if !(factor > 1.0) => {
                Err(Error::InvalidArgument("reacquire factor must exceed 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunEvent {
    Exhausted { order: usize, stranded: BigUint, delta: f64 },
    Relaxed { order: usize, from: f64, to: f64 },
    Reacquired { order: usize, points: usize, gaps: usize },
    Aborted { order: usize, stranded: BigUint },
    Stopped { order: usize, reason: String },
}

impl fmt::Display for RunEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunEvent::Exhausted { order, stranded, delta } => {
                write!(f, "exhausted order={order} stranded={stranded} delta={delta}")
            }
            RunEvent::Relaxed { order, from, to } => write!(f, "relaxed order={order} from={from} to={to}"),
            RunEvent::Reacquired { order, points, gaps } => {
                write!(f, "reacquired order={order} points={points} gaps={gaps}")
            }
            RunEvent::Aborted { order, stranded } => write!(f, "aborted order={order} stranded={stranded}"),
            RunEvent::Stopped { order, reason } => write!(f, "stopped order={order} reason={reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderResult {
    pub order: usize,
    pub points: Vec<ConfluencePoint>,
    pub delta_used: f64,
    pub criteria: Criteria,
    /// Table the order was searched with (none for the base set).
    pub gap_table: Option<GapTable>,
    pub steps: u64,
    pub first_gap_hits: u64,
    pub last_visited: Option<ExactT>,
    pub stop: WalkStop,
    pub adjustments: u32,
}

impl OrderResult {
    pub fn first(&self) -> Option<&ExactT> {
        self.points.first().map(|p| &p.t)
    }

    pub fn last(&self) -> Option<&ExactT> {
        self.points.last().map(|p| &p.t)
    }

    /// Mean distance between consecutive points, in k-units.
    pub fn mean_gap(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) if self.points.len() > 1 => {
                (b.q() - a.q()).to_f64().unwrap_or(f64::INFINITY) / (self.points.len() - 1) as f64
            }
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub pair: PrimePair,
    pub orders: BTreeMap<usize, OrderResult>,
    pub log: Vec<RunEvent>,
    pub aborted: bool,
}

impl RunResult {
    pub fn empty(pair: PrimePair) -> RunResult {
        RunResult {
            pair,
            orders: BTreeMap::new(),
            log: Vec::new(),
            aborted: false,
        }
    }

    pub fn max_order(&self) -> usize {
        self.orders.keys().next_back().copied().unwrap_or(0)
    }
}

/// Runs the configured chain and fails if the exhaustion policy aborted it.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    let r = run_partial(config, None)?;
    if r.aborted {
        if let Some(RunEvent::Aborted { order, stranded }) = r.log.last() {
            return Err(Error::GapTableExhausted {
                order: *order,
                stranded: stranded.to_string(),
                delta: r.orders.get(order).map_or(0.0, |o| o.delta_used),
            });
        }
    }
    Ok(r)
}

/// Runs the chain, reusing whatever `previous` already holds when it is
/// consistent with `config`. An abort is recorded in the result instead of
/// being returned as an error.
pub fn run_partial(config: &RunConfig, previous: Option<&RunResult>) -> Result<RunResult> {
    run_with_hook(config, previous, &mut |_| Ok(()))
}

/// As `run_partial`, calling `hook` after each order is finished.
pub fn run_with_hook(
    config: &RunConfig,
    previous: Option<&RunResult>,
    hook: &mut dyn FnMut(&RunResult) -> Result<()>,
) -> Result<RunResult> {
    config.validate()?;
    let mut result = RunResult::empty(config.pair);
    let mut reuse = previous.filter(|p| p.pair == config.pair);

    let base = match reuse.and_then(|p| p.orders.get(&2)) {
        Some(b) if base_matches(b, config) => b.clone(),
        _ => {
            reuse = None;
            compute_base(config)?
        }
    };
    result.orders.insert(2, base);
    hook(&result)?;

    for order in 3..=config.max_order {
        let prev = &result.orders[&(order - 1)];
        if prev.points.len() < 2 {
            result.log.push(RunEvent::Stopped {
                order,
                reason: format!("order {} has fewer than 2 points", order - 1),
            });
            break;
        }
        let stored = reuse.and_then(|p| p.orders.get(&order)).cloned();
        let outcome = match stored {
            Some(s) if order_reusable(&s, config) => {
                result.log.extend(events_for(reuse.unwrap(), order));
                OrderOutcome { result: s, aborted: false }
            }
            Some(s) if order_extendable(&s, config) => {
                result.log.extend(events_for(reuse.unwrap(), order));
                let prev = prev.clone();
                let out = search_order(config, &prev, Some(s), &mut result.log)?;
                reuse = None;
                out
            }
            _ => {
                reuse = None;
                let prev = prev.clone();
                search_order(config, &prev, None, &mut result.log)?
            }
        };
        result.orders.insert(order, outcome.result);
        if outcome.aborted {
            result.aborted = true;
            hook(&result)?;
            break;
        }
        hook(&result)?;
    }
    Ok(result)
}

fn events_for(run: &RunResult, order: usize) -> Vec<RunEvent> {
    run.log
        .iter()
        .filter(|e| match e {
            RunEvent::Exhausted { order: o, .. }
            | RunEvent::Relaxed { order: o, .. }
            | RunEvent::Reacquired { order: o, .. }
            | RunEvent::Aborted { order: o, .. }
            | RunEvent::Stopped { order: o, .. } => *o == order,
        })
        .cloned()
        .collect()
}

fn base_params(config: &RunConfig) -> BaseSetParams {
    let mut p = BaseSetParams::new(config.pair, config.delta(2)).with_max_points(config.budget(2) as usize);
    p.n_start = config.base_n_start;
    p
}

fn base_matches(stored: &OrderResult, config: &RunConfig) -> bool {
    stored.delta_used == config.delta(2)
        && stored.steps == config.budget(2)
        && stored.criteria == Criteria::base(config.pair, config.delta(2))
        && stored.last_visited.as_ref().map(|t| t.q().to_u64()) == Some(Some(config.base_n_start as u64))
}

fn compute_base(config: &RunConfig) -> Result<OrderResult> {
    let delta = config.delta(2);
    let points = base_set(&base_params(config))?;
    Ok(OrderResult {
        order: 2,
        points,
        delta_used: delta,
        criteria: Criteria::base(config.pair, delta),
        gap_table: None,
        steps: config.budget(2),
        first_gap_hits: 0,
        // the base set records its R-line start index here so a resume can
        // tell whether it was built the same way
        last_visited: Some(ExactT::from_u64(config.base_n_start.max(0) as u64, config.pair)),
        stop: WalkStop::Budget,
        adjustments: 0,
    })
}

fn order_reusable(s: &OrderResult, config: &RunConfig) -> bool {
    s.steps == config.budget(s.order) || (s.stop == WalkStop::Exhausted && s.steps < config.budget(s.order))
}

fn order_extendable(s: &OrderResult, config: &RunConfig) -> bool {
    s.stop == WalkStop::Budget && s.steps < config.budget(s.order)
}

struct OrderOutcome {
    result: OrderResult,
    aborted: bool,
}

fn search_order(
    config: &RunConfig,
    prev: &OrderResult,
    resume: Option<OrderResult>,
    log: &mut Vec<RunEvent>,
) -> Result<OrderOutcome> {
    let order = prev.order + 1;
    let next_prime = prime_sequence(config.pair.p1, config.pair.p2, order)[order - 1];
    let budget = config.budget(order);

    let (mut table, mut delta, mut out, mut start, mut include_start, mut adjustments);
    match resume {
        Some(s) => {
            table = s.gap_table.clone().expect("searched orders carry their table");
            delta = s.delta_used;
            start = s.last_visited.clone().expect("searched orders record their position");
            include_start = false;
            adjustments = s.adjustments;
            out = s;
        }
        None => {
            let acq = config.gap_acquisition.min(prev.points.len());
            table = build_gap_table(&prev.points[..acq])?;
            delta = config.delta(order);
            if delta < table.source_delta {
                return Err(Error::InvalidArgument(format!(
                    "order {order} delta {delta} is tighter than order {} delta {}",
                    order - 1,
                    table.source_delta
                )));
            }
            start = prev.points[0].t.clone();
            include_start = true;
            adjustments = 0;
            out = OrderResult {
                order,
                points: Vec::new(),
                delta_used: delta,
                criteria: prev.criteria.with_delta(delta).extended(next_prime, delta),
                gap_table: Some(table.clone()),
                steps: 0,
                first_gap_hits: 0,
                last_visited: None,
                stop: WalkStop::Budget,
                adjustments: 0,
            };
        }
    }

    let mut aborted = false;
    while out.steps < budget {
        let w = walk(
            &start,
            &table,
            &prev.criteria,
            next_prime,
            delta,
            budget - out.steps,
            include_start,
        )?;
        out.steps += w.steps;
        out.first_gap_hits += w.first_gap_hits;
        for p in w.points {
            if out.points.last().is_none_or(|l| l.t < p.t) {
                out.points.push(p);
            }
        }
        out.last_visited = Some(w.last_visited.clone());
        out.stop = w.stop;
        if w.stop == WalkStop::Budget {
            break;
        }
        let stranded = w.last_visited.q().clone();
        log.push(RunEvent::Exhausted {
            order,
            stranded: stranded.clone(),
            delta,
        });
        let retry = match config.exhaustion {
            ExhaustionPolicy::Abort => false,
            ExhaustionPolicy::Relax { step, retries } if adjustments < retries => {
                let to = delta + step;
                log.push(RunEvent::Relaxed { order, from: delta, to });
                delta = to;
                true
            }
            ExhaustionPolicy::Reacquire { factor } if adjustments < 1 => {
                let n = ((config.gap_acquisition as f64 * factor).ceil() as usize).min(prev.points.len());
                table = table.merge(&build_gap_table(&prev.points[..n])?);
                log.push(RunEvent::Reacquired {
                    order,
                    points: n,
                    gaps: table.len(),
                });
                true
            }
            _ => false,
        };
        if !retry {
            log.push(RunEvent::Aborted { order, stranded });
            aborted = true;
            break;
        }
        adjustments += 1;
        start = w.last_visited;
        include_start = true;
    }
    out.delta_used = delta;
    for p in &mut out.points {
        p.delta = delta;
    }
    out.criteria = prev.criteria.with_delta(delta).extended(next_prime, delta);
    out.gap_table = Some(table);
    out.adjustments = adjustments;
    Ok(OrderOutcome { result: out, aborted })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftStats {
    pub points: usize,
    /// Fraction of consecutive differences equal to the table's first gap.
    pub first_gap_fraction: f64,
    /// Consecutive differences and how often each occurs.
    pub gap_histogram: Vec<(BigUint, u64)>,
    /// Consecutive differences that are not in the table.
    pub off_table: u64,
    pub max_residue: f64,
    pub min_residue: f64,
    pub mean_residue: f64,
    /// Counts of residues in ten equal bins spanning [min, max].
    pub residue_bins: Vec<u64>,
}

pub fn drift_stats(points: &[ConfluencePoint], table: &GapTable) -> Result<DriftStats> {
    if points.is_empty() || table.is_empty() {
        return Err(Error::InvalidArgument("drift statistics need points and a table".into()));
    }
    let mut hist: BTreeMap<BigUint, u64> = BTreeMap::new();
    for w in points.windows(2) {
        *hist.entry(w[1].q() - w[0].q()).or_insert(0) += 1;
    }
    let steps = points.len().saturating_sub(1) as u64;
    let first = hist.get(&table.gaps[0]).copied().unwrap_or(0);
    let off_table = hist.iter().filter(|(g, _)| !table.contains(g)).map(|(_, c)| c).sum();
    let all: Vec<f64> = points.iter().flat_map(|p| p.residues.iter().copied()).collect();
    let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = all.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = all.iter().sum::<f64>() / all.len().max(1) as f64;
    let mut bins = vec![0u64; 10];
    let width = (max - min).max(f64::MIN_POSITIVE);
    for r in &all {
        let b = (((r - min) / width) * 10.0).floor() as usize;
        bins[b.min(9)] += 1;
    }
    Ok(DriftStats {
        points: points.len(),
        first_gap_fraction: if steps == 0 { 0.0 } else { first as f64 / steps as f64 },
        gap_histogram: hist.into_iter().collect(),
        off_table,
        max_residue: max,
        min_residue: min,
        mean_residue: mean,
        residue_bins: bins,
    })
}

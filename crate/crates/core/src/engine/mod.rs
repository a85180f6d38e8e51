//! Work-queue solver: joins facts into a lattice-valued database and fires
//! dependent rule variants until nothing changes.

mod db;
mod eval;
mod queue;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{fence, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value as Json;
use thiserror::Error;

use crate::lang::{TExpr, TypedProgram};
use crate::lattice::{LatticeError, Ty, Value};
use crate::planner::{EvalPlan, Variant};

pub use db::{FactsDB, Joined, RelationStore};
pub use queue::{PriorityKey, Schedule, Task, WorkQueue};

use eval::{Derived, Evaluator};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("no value bound for const `{0}`")]
    MissingConst(String),
    #[error("unknown const `{0}`")]
    UnknownConst(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown query `{0}`")]
    UnknownQuery(String),
    #[error("`{relation}` takes {expected} argument(s), got {found}")]
    Arity { relation: String, expected: usize, found: usize },
    #[error("argument {position} of `{relation}` must be {expected}, got {found}")]
    Kind {
        relation: String,
        position: usize,
        expected: String,
        found: String,
    },
    #[error("argument {position} of `{relation}`: {source}")]
    Decode {
        relation: String,
        position: usize,
        source: LatticeError,
    },
}

/// A fact as the user sees it: relation name and arguments in declaration
/// order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fact {
    pub relation: String,
    pub args: Vec<Value>,
}

impl Fact {
    /// One JSON object with `relation` first.
    pub fn to_json_line(&self) -> String {
        let args = Json::Array(self.args.iter().map(Value::to_json).collect());
        format!("{{\"relation\":{},\"args\":{}}}", Json::String(self.relation.clone()), args)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub popped: u64,
    pub discarded: u64,
    pub applied: u64,
    /// Complete rule-body satisfactions, per rule.
    pub firings: BTreeMap<String, u64>,
    /// Strict database updates, per relation.
    pub strict_updates: BTreeMap<String, u64>,
    pub wall_time_ms: f64,
}

impl SolverStats {
    pub fn total_firings(&self) -> u64 {
        self.firings.values().sum()
    }

    pub fn total_strict_updates(&self) -> u64 {
        self.strict_updates.values().sum()
    }

    pub fn firings_of(&self, rule: &str) -> u64 {
        self.firings.get(rule).copied().unwrap_or(0)
    }

    pub fn strict_updates_of(&self, relation: &str) -> u64 {
        self.strict_updates.get(relation).copied().unwrap_or(0)
    }

    fn minus(&self, before: &SolverStats) -> SolverStats {
        let sub = |a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>| {
            a.iter()
                .map(|(k, v)| (k.clone(), v - b.get(k).copied().unwrap_or(0)))
                .collect()
        };
        SolverStats {
            popped: self.popped - before.popped,
            discarded: self.discarded - before.discarded,
            applied: self.applied - before.applied,
            firings: sub(&self.firings, &before.firings),
            strict_updates: sub(&self.strict_updates, &before.strict_updates),
            wall_time_ms: 0.0,
        }
    }
}

#[derive(Default)]
struct Counters {
    popped: AtomicU64,
    discarded: AtomicU64,
    applied: AtomicU64,
    firings: Vec<AtomicU64>,
    strict: Vec<AtomicU64>,
}

/// Parses a command-line style value: symbols are taken verbatim, anything
/// else is read as JSON.
pub fn parse_value_text(ty: &Ty, text: &str) -> Result<Value, LatticeError> {
    let json = match ty {
        Ty::Opaque(_) => Json::String(text.to_owned()),
        _ => serde_json::from_str(text).unwrap_or_else(|_| Json::String(text.to_owned())),
    };
    Value::from_json(ty, &json)
}

pub const DUMP_HEADER: &str = "fpop canonical dump";

pub struct Solver {
    plan: Arc<EvalPlan>,
    consts: Vec<Value>,
    db: FactsDB,
    queue: WorkQueue,
    counters: Counters,
    /// Values inserted but not yet popped, for duplicate-insert detection.
    pending_inserts: HashMap<(usize, Vec<Value>), Vec<Value>>,
}

impl Solver {
    /// Creates an empty database and runs the program's axioms, queueing
    /// what they derive.
    pub fn new(plan: impl Into<Arc<EvalPlan>>, consts: &BTreeMap<String, Value>) -> Result<Self, EngineError> {
        let plan = plan.into();
        let p = &*plan.program;
        for name in consts.keys() {
            if p.const_id(name).is_none() {
                return Err(EngineError::UnknownConst(name.clone()));
            }
        }
        let mut values = Vec::new();
        for c in &p.consts {
            let v = consts.get(&c.name).ok_or_else(|| EngineError::MissingConst(c.name.clone()))?;
            if !v.has_type(&c.ty) {
                return Err(EngineError::Kind {
                    relation: format!("const {}", c.name),
                    position: 0,
                    expected: c.ty.to_string(),
                    found: v.kind_name().into(),
                });
            }
            values.push(v.clone());
        }
        let db = FactsDB::new(
            p.relations.iter().map(|r| r.value_lattices.clone()).collect(),
            &plan.indexes,
        );
        let counters = Counters {
            firings: p.rules.iter().map(|_| AtomicU64::new(0)).collect(),
            strict: p.relations.iter().map(|_| AtomicU64::new(0)).collect(),
            ..Counters::default()
        };
        let solver = Solver {
            plan: plan.clone(),
            consts: values,
            db,
            queue: WorkQueue::new(Schedule::Priority),
            counters,
            pending_inserts: HashMap::new(),
        };
        let mut out = Vec::new();
        for v in &plan.init {
            let n = solver.evaluator().fire_full(v, &mut out);
            solver.counters.firings[v.rule].fetch_add(n, Ordering::Relaxed);
        }
        for (r, k, val) in out {
            solver.enqueue(r, k, val);
        }
        Ok(solver)
    }

    /// Compiles, plans and initializes in one step.
    pub fn from_source(src: &str, consts: &BTreeMap<String, Value>) -> Result<Self, String> {
        let tp = crate::lang::compile(src).map_err(render)?;
        let plan = crate::planner::plan(tp).map_err(render)?;
        Solver::new(plan, consts).map_err(|e| e.to_string())
    }

    pub fn program(&self) -> &TypedProgram {
        &self.plan.program
    }

    pub fn plan(&self) -> &EvalPlan {
        &self.plan
    }

    pub fn set_schedule(&mut self, schedule: Schedule) {
        self.queue.set_schedule(schedule);
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    fn evaluator(&self) -> Evaluator<'_> {
        Evaluator {
            program: &self.plan.program,
            consts: &self.consts,
            db: &self.db,
        }
    }

    fn enqueue(&self, r: usize, key: Vec<Value>, value: Vec<Value>) {
        let consumers: Vec<&Variant> = self.plan.consumers[r].iter().map(|&i| &self.plan.delta[i]).collect();
        let prio = self.evaluator().priority_of(&consumers, &key, &value);
        self.queue.push(r, key, value, move || prio);
    }

    fn relation_id(&self, relation: &str) -> Result<usize, EngineError> {
        self.plan
            .program
            .relation_id(relation)
            .ok_or_else(|| EngineError::UnknownRelation(relation.to_owned()))
    }

    fn check_args(&self, r: usize, args: &[Value]) -> Result<(), EngineError> {
        let rel = &self.plan.program.relations[r];
        if args.len() != rel.arity() {
            return Err(EngineError::Arity {
                relation: rel.name.clone(),
                expected: rel.arity(),
                found: args.len(),
            });
        }
        for (i, (a, kind)) in args.iter().zip(&rel.args).enumerate() {
            let ty = kind.ty();
            if !a.has_type(&ty) {
                return Err(EngineError::Kind {
                    relation: rel.name.clone(),
                    position: i,
                    expected: ty.to_string(),
                    found: a.kind_name().into(),
                });
            }
        }
        Ok(())
    }

    /// Queues a fact unless the database, or an earlier pending insert,
    /// already subsumes it. Returns whether it was queued.
    pub fn insert_fact(&mut self, relation: &str, args: Vec<Value>) -> Result<bool, EngineError> {
        let r = self.relation_id(relation)?;
        self.check_args(r, &args)?;
        let rel = &self.plan.program.relations[r];
        let (key, value) = rel.split(&args);
        if self.db.subsumes(r, &key, &value) {
            return Ok(false);
        }
        let lattices = &rel.value_lattices;
        let slot = (r, key.clone());
        if let Some(prev) = self.pending_inserts.get(&slot) {
            if db::leq_tuple(lattices, &value, prev) {
                return Ok(false);
            }
        }
        let merged = match self.pending_inserts.get(&slot) {
            Some(prev) => lattices
                .iter()
                .zip(prev.iter().zip(&value))
                .map(|(l, (a, b))| l.join(a, b).expect("type checked"))
                .collect(),
            None => value.clone(),
        };
        self.pending_inserts.insert(slot, merged);
        self.enqueue(r, key, value);
        Ok(true)
    }

    /// Inserts a fact given as JSON arguments, decoded by the declared types.
    pub fn insert_json(&mut self, relation: &str, args: &[Json]) -> Result<bool, EngineError> {
        let r = self.relation_id(relation)?;
        let rel = &self.plan.program.relations[r];
        if args.len() != rel.arity() {
            return Err(EngineError::Arity {
                relation: relation.to_owned(),
                expected: rel.arity(),
                found: args.len(),
            });
        }
        let values = args
            .iter()
            .zip(&rel.args)
            .enumerate()
            .map(|(i, (j, kind))| {
                Value::from_json(&kind.ty(), j).map_err(|source| EngineError::Decode {
                    relation: relation.to_owned(),
                    position: i,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.insert_fact(relation, values)
    }

    fn process(&self, task: Task) {
        let c = &self.counters;
        c.popped.fetch_add(1, Ordering::Relaxed);
        let Joined::Updated(value) = self.db.join(task.relation, &task.key, &task.value) else {
            c.discarded.fetch_add(1, Ordering::Relaxed);
            return;
        };
        c.applied.fetch_add(1, Ordering::Relaxed);
        c.strict[task.relation].fetch_add(1, Ordering::Relaxed);
        // Publish the update before reading other relations.
        fence(Ordering::SeqCst);
        let ev = self.evaluator();
        let mut out: Vec<Derived> = Vec::new();
        for &vid in &self.plan.consumers[task.relation] {
            let v = &self.plan.delta[vid];
            let n = ev.fire_delta(v, &task.key, &value, &mut out);
            c.firings[v.rule].fetch_add(n, Ordering::Relaxed);
        }
        for (r, k, val) in out {
            if !self.db.subsumes(r, &k, &val) {
                self.enqueue(r, k, val);
            }
        }
    }

    /// Processes exactly one queued task. Returns false when the queue is
    /// empty.
    pub fn step(&mut self) -> bool {
        match self.queue.try_pop() {
            Some(t) => {
                self.process(t);
                self.queue.done();
                true
            }
            None => false,
        }
    }

    /// Runs to quiescence with `workers` threads and returns the work done
    /// by this call.
    pub fn solve(&mut self, workers: usize) -> SolverStats {
        let start = Instant::now();
        let before = self.stats();
        self.pending_inserts.clear();
        let workers = workers.max(1);
        if workers == 1 {
            while let Some(t) = self.queue.try_pop() {
                self.process(t);
                self.queue.done();
            }
        } else {
            let this = &*self;
            std::thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(move || {
                        while let Some(t) = this.queue.pop_wait() {
                            this.process(t);
                            this.queue.done();
                        }
                    });
                }
            });
        }
        let mut out = self.stats().minus(&before);
        out.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        out
    }

    /// Inserts more facts into a solved state and solves again, reusing
    /// everything already derived.
    pub fn resolve_incremental(
        &mut self,
        facts: impl IntoIterator<Item = (String, Vec<Value>)>,
        workers: usize,
    ) -> Result<SolverStats, EngineError> {
        for (rel, args) in facts {
            self.insert_fact(&rel, args)?;
        }
        Ok(self.solve(workers))
    }

    /// Naive evaluation: queued facts are joined without firing, then every
    /// rule is re-run over the whole database in rounds until a round
    /// changes nothing.
    pub fn solve_naive(&mut self) -> SolverStats {
        let start = Instant::now();
        let before = self.stats();
        self.pending_inserts.clear();
        let c = &self.counters;
        for t in self.queue.drain() {
            c.popped.fetch_add(1, Ordering::Relaxed);
            match self.db.join(t.relation, &t.key, &t.value) {
                Joined::Updated(_) => {
                    c.applied.fetch_add(1, Ordering::Relaxed);
                    c.strict[t.relation].fetch_add(1, Ordering::Relaxed);
                }
                Joined::Unchanged => {
                    c.discarded.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        loop {
            let mut out = Vec::new();
            let ev = self.evaluator();
            for v in &self.plan.full {
                let n = ev.fire_full(v, &mut out);
                c.firings[v.rule].fetch_add(n, Ordering::Relaxed);
            }
            let mut changed = false;
            for (r, k, val) in out {
                if let Joined::Updated(_) = self.db.join(r, &k, &val) {
                    c.strict[r].fetch_add(1, Ordering::Relaxed);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut out = self.stats().minus(&before);
        out.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        out
    }

    /// Re-derives every rule over the whole database and counts derived
    /// facts the database does not already subsume. Zero at a fixpoint.
    pub fn audit_fixpoint(&self) -> u64 {
        let ev = self.evaluator();
        let mut out = Vec::new();
        for v in &self.plan.full {
            ev.fire_full(v, &mut out);
        }
        out.iter().filter(|(r, k, val)| !self.db.subsumes(*r, k, val)).count() as u64
    }

    /// Cumulative statistics since creation.
    pub fn stats(&self) -> SolverStats {
        let p = &self.plan.program;
        let c = &self.counters;
        SolverStats {
            popped: c.popped.load(Ordering::Relaxed),
            discarded: c.discarded.load(Ordering::Relaxed),
            applied: c.applied.load(Ordering::Relaxed),
            firings: p
                .rules
                .iter()
                .zip(&c.firings)
                .map(|(r, n)| (r.name.clone(), n.load(Ordering::Relaxed)))
                .collect(),
            strict_updates: p
                .relations
                .iter()
                .zip(&c.strict)
                .map(|(r, n)| (r.name.clone(), n.load(Ordering::Relaxed)))
                .collect(),
            wall_time_ms: 0.0,
        }
    }

    fn facts_of(&self, r: usize, keep: impl Fn(&[Value]) -> bool) -> Vec<Fact> {
        let rel = &self.plan.program.relations[r];
        self.db
            .relation(r)
            .read()
            .sorted()
            .into_iter()
            .filter(|(k, _)| keep(k))
            .map(|(k, v)| Fact {
                relation: rel.name.clone(),
                args: rel.assemble(&k, &v),
            })
            .collect()
    }

    /// Facts of `relation` whose key matches `pattern`, in key order. The
    /// pattern covers either the key columns or every argument; lattice
    /// positions in a full-width pattern must be wildcards.
    pub fn query(&self, relation: &str, pattern: &[Option<Value>]) -> Result<Vec<Fact>, EngineError> {
        let r = self.relation_id(relation)?;
        let rel = &self.plan.program.relations[r];
        let key_pattern: Vec<Option<Value>> = if pattern.len() == rel.key_cols.len() {
            pattern.to_vec()
        } else if pattern.len() == rel.arity() {
            for &c in &rel.lattice_cols {
                if pattern[c].is_some() {
                    return Err(EngineError::Kind {
                        relation: rel.name.clone(),
                        position: c,
                        expected: "a wildcard".into(),
                        found: "a value".into(),
                    });
                }
            }
            rel.key_cols.iter().map(|&c| pattern[c].clone()).collect()
        } else {
            return Err(EngineError::Arity {
                relation: rel.name.clone(),
                expected: rel.key_cols.len(),
                found: pattern.len(),
            });
        };
        Ok(self.facts_of(r, |k| {
            key_pattern.iter().zip(k).all(|(p, x)| p.as_ref().is_none_or(|p| p == x))
        }))
    }

    /// Runs a `query` declared in the program.
    pub fn run_query(&self, name: &str) -> Result<Vec<Fact>, EngineError> {
        let p = &self.plan.program;
        let q = p
            .queries
            .iter()
            .find(|q| q.name == name)
            .ok_or_else(|| EngineError::UnknownQuery(name.to_owned()))?;
        let pattern: Vec<Option<Value>> = q
            .pattern
            .iter()
            .map(|e| e.as_ref().and_then(|e| eval::eval(e, &Vec::new(), &self.consts)))
            .collect();
        debug_assert!(q.pattern.iter().all(|e| !matches!(e, Some(TExpr::Var(_)))));
        self.query(&p.relations[q.relation].name, &pattern)
    }

    /// All facts of one relation in key order.
    pub fn facts(&self, relation: &str) -> Result<Vec<Fact>, EngineError> {
        Ok(self.facts_of(self.relation_id(relation)?, |_| true))
    }

    pub fn fact_count(&self) -> usize {
        (0..self.plan.program.relations.len())
            .map(|r| self.db.relation(r).read().len())
            .sum()
    }

    /// Every fact, relations in declaration order and keys sorted, one JSON
    /// line each after a fixed header.
    pub fn canonical_dump(&self) -> String {
        let mut out = String::from(DUMP_HEADER);
        out.push('\n');
        for r in 0..self.plan.program.relations.len() {
            for f in self.facts_of(r, |_| true) {
                out.push_str(&f.to_json_line());
                out.push('\n');
            }
        }
        out
    }
}

fn render(diags: Vec<crate::lang::Diagnostic>) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests;

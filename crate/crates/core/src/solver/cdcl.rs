//! Conflict-driven clause learning with two-watched-literal propagation,
//! first-UIP learning, VSIDS branching, phase saving, Luby restarts, and
//! activity-based learnt-clause deletion. Fully deterministic: no randomness
//! and index-based tie-breaking.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 100;
const TIME_CHECK_MASK: u64 = 0xFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, positive: bool) -> Lit {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watcher {
    clause: usize,
    blocker: Lit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum SearchResult {
    Sat,
    Unsat,
    Timeout,
}

/// Max-heap over variables keyed by activity, ties broken by smaller index.
struct VarOrder {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarOrder {
    fn new(num_vars: usize) -> Self {
        let mut order = VarOrder { heap: Vec::with_capacity(num_vars), pos: vec![NOT_IN_HEAP; num_vars] };
        for v in 0..num_vars {
            order.heap.push(v);
            order.pos[v] = v;
        }
        order
    }

    fn better(activity: &[f64], a: usize, b: usize) -> bool {
        activity[a] > activity[b] || (activity[a] == activity[b] && a < b)
    }

    fn sift_up(&mut self, mut i: usize, activity: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(activity, self.heap[i], self.heap[parent]) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, activity: &[f64]) {
        loop {
            let mut best = i;
            for child in [2 * i + 1, 2 * i + 2] {
                if child < self.heap.len() && Self::better(activity, self.heap[child], self.heap[best]) {
                    best = child;
                }
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i]] = i;
        self.pos[self.heap[j]] = j;
    }

    fn contains(&self, var: usize) -> bool {
        self.pos[var] != NOT_IN_HEAP
    }

    fn insert(&mut self, var: usize, activity: &[f64]) {
        if self.contains(var) {
            return;
        }
        self.pos[var] = self.heap.len();
        self.heap.push(var);
        self.sift_up(self.heap.len() - 1, activity);
    }

    fn pop(&mut self, activity: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.sift_down(0, activity);
        }
        Some(top)
    }

    fn bumped(&mut self, var: usize, activity: &[f64]) {
        if self.contains(var) {
            self.sift_up(self.pos[var], activity);
        }
    }
}

pub(super) struct Solver {
    num_vars: usize,
    clauses: Vec<Clause>,
    learnts: Vec<usize>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Value>,
    polarity: Vec<bool>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    order: VarOrder,
    seen: Vec<bool>,
    ok: bool,
    conflicts: u64,
    max_learnts: f64,
}

impl Solver {
    pub(super) fn new(num_vars: usize) -> Self {
        Solver {
            num_vars,
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![Value::Undef; num_vars],
            polarity: vec![false; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            var_activity: vec![0.0; num_vars],
            var_inc: 1.0,
            clause_inc: 1.0,
            order: VarOrder::new(num_vars),
            seen: vec![false; num_vars],
            ok: true,
            conflicts: 0,
            max_learnts: 0.0,
        }
    }

    fn value(&self, lit: Lit) -> Value {
        match self.assigns[lit.var()] {
            Value::Undef => Value::Undef,
            Value::True => {
                if lit.is_positive() {
                    Value::True
                } else {
                    Value::False
                }
            }
            Value::False => {
                if lit.is_positive() {
                    Value::False
                } else {
                    Value::True
                }
            }
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    pub(super) fn add_clause(&mut self, clause: &[i32]) -> Result<()> {
        if !self.ok {
            return Ok(());
        }
        let mut lits: Vec<Lit> = Vec::with_capacity(clause.len());
        for &l in clause {
            if l == 0 || l.unsigned_abs() as usize > self.num_vars {
                return Err(Error::InvalidInput(format!("bad literal {l}")));
            }
            let lit = Lit::new(l.unsigned_abs() as usize - 1, l > 0);
            if lits.contains(&!lit) {
                return Ok(()); // tautology
            }
            if !lits.contains(&lit) {
                lits.push(lit);
            }
        }
        // Level-0 simplification.
        lits.retain(|&l| self.value(l) != Value::False);
        if lits.iter().any(|&l| self.value(l) == Value::True) {
            return Ok(());
        }
        match lits.len() {
            0 => {
                self.ok = false;
                Ok(())
            }
            1 => {
                self.enqueue(lits[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                Ok(())
            }
            _ => {
                self.attach(lits, false);
                Ok(())
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> usize {
        debug_assert!(lits.len() >= 2);
        let idx = self.clauses.len();
        self.watches[(!lits[0]).index()].push(Watcher { clause: idx, blocker: lits[1] });
        self.watches[(!lits[1]).index()].push(Watcher { clause: idx, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0 });
        if learnt {
            self.learnts.push(idx);
        }
        idx
    }

    fn detach(&mut self, idx: usize) {
        let (w0, w1) = {
            let c = &self.clauses[idx];
            ((!c.lits[0]).index(), (!c.lits[1]).index())
        };
        self.watches[w0].retain(|w| w.clause != idx);
        self.watches[w1].retain(|w| w.clause != idx);
    }

    fn enqueue(&mut self, lit: Lit, from: Option<usize>) {
        debug_assert_eq!(self.value(lit), Value::Undef);
        let v = lit.var();
        self.assigns[v] = if lit.is_positive() { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = from;
        self.trail.push(lit);
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            // Clauses watching !p live in watches[p.index()].
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            while i < ws.len() {
                let w = ws[i];
                if self.value(w.blocker) == Value::True {
                    i += 1;
                    continue;
                }
                let first;
                let mut new_watch = None;
                {
                    let c = &mut self.clauses[w.clause];
                    if c.lits[0] == false_lit {
                        c.lits.swap(0, 1);
                    }
                    first = c.lits[0];
                    if first != w.blocker && self.assigns[first.var()] != Value::Undef {
                        let fv = if first.is_positive() {
                            self.assigns[first.var()] == Value::True
                        } else {
                            self.assigns[first.var()] == Value::False
                        };
                        if fv {
                            ws[i] = Watcher { clause: w.clause, blocker: first };
                            i += 1;
                            continue;
                        }
                    }
                    for k in 2..c.lits.len() {
                        let lk = c.lits[k];
                        let falsified = match self.assigns[lk.var()] {
                            Value::Undef => false,
                            Value::True => !lk.is_positive(),
                            Value::False => lk.is_positive(),
                        };
                        if !falsified {
                            c.lits.swap(1, k);
                            new_watch = Some(!c.lits[1]);
                            break;
                        }
                    }
                }
                if let Some(nw) = new_watch {
                    self.watches[nw.index()].push(Watcher { clause: w.clause, blocker: first });
                    ws.swap_remove(i);
                    continue;
                }
                // Clause is unit or conflicting.
                ws[i] = Watcher { clause: w.clause, blocker: first };
                i += 1;
                if self.value(first) == Value::False {
                    self.qhead = self.trail.len();
                    let confl = w.clause;
                    let mut existing = std::mem::take(&mut self.watches[p.index()]);
                    ws.append(&mut existing);
                    self.watches[p.index()] = ws;
                    return Some(confl);
                }
                self.enqueue(first, Some(w.clause));
            }
            let mut existing = std::mem::take(&mut self.watches[p.index()]);
            ws.append(&mut existing);
            self.watches[p.index()] = ws;
        }
        None
    }

    fn bump_var(&mut self, var: usize) {
        self.var_activity[var] += self.var_inc;
        if self.var_activity[var] > 1e100 {
            for a in &mut self.var_activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(var, &self.var_activity);
    }

    fn bump_clause(&mut self, idx: usize) {
        let c = &mut self.clauses[idx];
        if !c.learnt {
            return;
        }
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts.clone() {
                self.clauses[l].activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backtrack level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut to_clear: Vec<usize> = Vec::new();
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let clause_lits: Vec<Lit> = self.clauses[confl].lits[start..].to_vec();
            for q in clause_lits {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    to_clear.push(v);
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let pl = self.trail[index];
            self.seen[pl.var()] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = !pl;
                break;
            }
            p = Some(pl);
            confl = self.reason[pl.var()].expect("non-decision implied literal has a reason");
        }
        // Basic clause minimization: drop literals implied by the rest.
        let keep = |solver: &Solver, lit: Lit| -> bool {
            match solver.reason[lit.var()] {
                None => true,
                Some(r) => solver.clauses[r].lits[1..]
                    .iter()
                    .any(|q| !solver.seen[q.var()] && solver.level[q.var()] > 0),
            }
        };
        let mut minimized = vec![learnt[0]];
        for &lit in &learnt[1..] {
            if keep(self, lit) {
                minimized.push(lit);
            }
        }
        let mut learnt = minimized;
        for v in to_clear {
            self.seen[v] = false;
        }
        let backtrack = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var()]
        };
        (learnt, backtrack)
    }

    fn cancel_until(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target];
        while self.trail.len() > bound {
            let lit = self.trail.pop().expect("nonempty trail");
            let v = lit.var();
            self.polarity[v] = lit.is_positive();
            self.assigns[v] = Value::Undef;
            self.reason[v] = None;
            self.order.insert(v, &self.var_activity);
        }
        self.trail_lim.truncate(target);
        self.qhead = self.trail.len();
    }

    fn is_locked(&self, idx: usize) -> bool {
        let first = self.clauses[idx].lits[0];
        self.reason[first.var()] == Some(idx) && self.value(first) == Value::True
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<usize> = self
            .learnts
            .iter()
            .copied()
            .filter(|&i| self.clauses[i].lits.len() > 2 && !self.is_locked(i))
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for &idx in candidates.iter().take(candidates.len() / 2) {
            self.detach(idx);
            self.clauses[idx].deleted = true;
            self.clauses[idx].lits.clear();
        }
        self.learnts.retain(|&i| !self.clauses[i].deleted);
    }

    fn luby(mut x: u64) -> u64 {
        // Sequence 1 1 2 1 1 2 4 ...
        let mut size: u64 = 1;
        let mut seq: u32 = 0;
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) / 2;
            seq -= 1;
            x %= size;
        }
        1u64 << seq
    }

    pub(super) fn search(&mut self, budget: Duration) -> SearchResult {
        if !self.ok {
            return SearchResult::Unsat;
        }
        let start = Instant::now();
        let mut restarts: u64 = 0;
        let mut conflicts_this_restart: u64 = 0;
        let mut restart_limit = RESTART_BASE * Self::luby(0);
        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(4000.0);
        let mut ticks: u64 = 0;
        loop {
            ticks += 1;
            if ticks & TIME_CHECK_MASK == 0 && start.elapsed() >= budget {
                self.cancel_until(0);
                return SearchResult::Timeout;
            }
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                conflicts_this_restart += 1;
                if self.decision_level() == 0 {
                    return SearchResult::Unsat;
                }
                let (learnt, backtrack) = self.analyze(confl);
                self.cancel_until(backtrack);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let idx = self.attach(learnt, true);
                    self.bump_clause(idx);
                    self.enqueue(asserting, Some(idx));
                }
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY;
            } else {
                if conflicts_this_restart >= restart_limit {
                    restarts += 1;
                    conflicts_this_restart = 0;
                    restart_limit = RESTART_BASE * Self::luby(restarts);
                    self.cancel_until(0);
                    continue;
                }
                if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                // Decision.
                let next = loop {
                    match self.order.pop(&self.var_activity) {
                        None => break None,
                        Some(v) if self.assigns[v] == Value::Undef => break Some(v),
                        Some(_) => continue,
                    }
                };
                match next {
                    None => return SearchResult::Sat,
                    Some(v) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(Lit::new(v, self.polarity[v]), None);
                    }
                }
            }
        }
    }

    pub(super) fn model(&self) -> Vec<bool> {
        self.assigns
            .iter()
            .map(|&v| match v {
                Value::True => true,
                // Unconstrained variables default to false.
                _ => false,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luby_sequence() {
        let expect = [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(Solver::luby(i as u64), e, "luby({i})");
        }
    }

    #[test]
    fn unit_propagation_chain() {
        let mut s = Solver::new(3);
        s.add_clause(&[1]).unwrap();
        s.add_clause(&[-1, 2]).unwrap();
        s.add_clause(&[-2, 3]).unwrap();
        assert_eq!(s.search(Duration::from_secs(10)), SearchResult::Sat);
        assert_eq!(s.model(), vec![true, true, true]);
    }

    #[test]
    fn immediate_conflict() {
        let mut s = Solver::new(2);
        s.add_clause(&[1, 2]).unwrap();
        s.add_clause(&[-1, 2]).unwrap();
        s.add_clause(&[1, -2]).unwrap();
        s.add_clause(&[-1, -2]).unwrap();
        assert_eq!(s.search(Duration::from_secs(10)), SearchResult::Unsat);
    }
}

//! Weighted set cover as a 0/1 integer program, solved exactly.
//!
//! ```text
//! minimize   sum_j c_j x_j
//! subject to sum_{j covers t} x_j >= 1   for every target t
//!            x_j in {0, 1}
//! ```
//!
//! with `c_j = 1 + 0.01 * literals(j)`, handled in integer hundredths.
//!
//! The optimum value comes from branch-and-bound on a reduced problem
//! (essential columns forced, dominated rows and columns removed, greedy
//! incumbent). Node bounds are Lagrangian: subgradient steps starting from the
//! cost-share bound, with reduced-cost fixing of columns that cannot improve
//! on the incumbent. Branching takes the column covering the most uncovered
//! rows among those the relaxation selects. A second pass fixes columns in
//! canonical order to return the lexicographically first cover of that cost,
//! so ties resolve exactly as in Petrick's method.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::error::LabelError;
use crate::labeling::{CoverInstance, DnfLabel, Implicant};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct RowSet(Vec<u64>);

impl RowSet {
    fn empty(n: usize) -> Self {
        RowSet(vec![0; n.div_ceil(64).max(1)])
    }

    fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn intersection_count(&self, other: &RowSet) -> usize {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    fn intersects(&self, other: &RowSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn minus(&self, other: &RowSet) -> RowSet {
        RowSet(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn and(&self, other: &RowSet) -> RowSet {
        RowSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_subset(&self, other: &RowSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }
}

#[derive(Debug)]
struct Problem {
    costs: Vec<u64>,
    col_rows: Vec<RowSet>,
    row_cols: Vec<Vec<usize>>,
    n_rows: usize,
}

impl Problem {
    fn new(primes: &[Implicant], instance: &CoverInstance) -> Result<Self, LabelError> {
        let targets: Vec<u32> = instance.targets.iter().copied().collect();
        let n_rows = targets.len();
        let mut col_rows = vec![RowSet::empty(n_rows); primes.len()];
        let mut row_cols = vec![Vec::new(); n_rows];
        for (r, &t) in targets.iter().enumerate() {
            for (j, p) in primes.iter().enumerate() {
                if p.covers(t) {
                    col_rows[j].insert(r);
                    row_cols[r].push(j);
                }
            }
            if row_cols[r].is_empty() {
                return Err(LabelError::Infeasible(t));
            }
        }
        Ok(Self { costs: primes.iter().map(Implicant::cost_units).collect(), col_rows, row_cols, n_rows })
    }
}

/// Greedy cover: repeatedly takes the column with the most newly covered
/// targets per unit cost, ties to the lower index. Returns the chosen column
/// indices in selection order and the total cost in hundredths.
pub fn greedy_cover(primes: &[Implicant], instance: &CoverInstance) -> Result<(Vec<usize>, u64), LabelError> {
    let p = Problem::new(primes, instance)?;
    let cols: Vec<usize> = (0..primes.len()).collect();
    Ok(greedy(&p, &RowSet::full(p.n_rows), &cols))
}

fn greedy(p: &Problem, uncovered: &RowSet, cols: &[usize]) -> (Vec<usize>, u64) {
    let mut left = uncovered.clone();
    let mut chosen = Vec::new();
    let mut cost = 0;
    while !left.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for &j in cols {
            let gain = p.col_rows[j].intersection_count(&left);
            if gain == 0 {
                continue;
            }
            let better = match best {
                None => true,
                // gain_j / c_j > gain_b / c_b
                Some((b, gb)) => (gain as u64) * p.costs[b] > (gb as u64) * p.costs[j],
            };
            if better {
                best = Some((j, gain));
            }
        }
        let (j, _) = best.expect("feasible problem");
        left = left.minus(&p.col_rows[j]);
        chosen.push(j);
        cost += p.costs[j];
    }
    (chosen, cost)
}

pub fn ilp_cover(primes: &[Implicant], instance: &CoverInstance) -> Result<DnfLabel, LabelError> {
    let p = Problem::new(primes, instance)?;
    let optimum = optimal_cost(&p);
    let chosen = lex_first_cover(&p, optimum);
    Ok(DnfLabel::from_selection(primes, &chosen, instance))
}

/// Optimal cover cost in hundredths.
fn optimal_cost(p: &Problem) -> u64 {
    solve_value(p, RowSet::full(p.n_rows), vec![true; p.costs.len()], u64::MAX, 0).expect("every row has a column")
}

/// Cheapest cover of `rows` from the `avail` columns costing less than
/// `cutoff`, if any. The search may stop at the first cover costing `floor`
/// or less.
fn solve_value(p: &Problem, rows: RowSet, avail: Vec<bool>, cutoff: u64, floor: u64) -> Option<u64> {
    let (forced, rows, cols) = reduce(p, rows, avail)?;
    if forced >= cutoff {
        return None;
    }
    if rows.is_empty() {
        return Some(forced);
    }
    let limit = cutoff - forced;
    let (_, mut incumbent) = greedy(p, &rows, &cols);
    let mut avail = vec![false; p.costs.len()];
    for &j in &cols {
        avail[j] = true;
    }
    // improve the incumbent from the relaxation before searching
    let (local_rows, local_cols) = restrict(p, &rows, |j| avail[j]);
    let mut lu = vec![0.0; local_rows.len()];
    lagrangian(p, &local_cols, &mut lu, &mut incumbent, ROOT_ITERATIONS, true);
    let mut u = vec![0.0; p.n_rows];
    for (i, &r) in local_rows.iter().enumerate() {
        u[r] = lu[i];
    }
    let mut search = Search { best: incumbent.min(limit), floor: floor.saturating_sub(forced) };
    branch(p, &mut search, rows, avail, 0, u, NODE_ITERATIONS);
    (search.best < limit).then_some(forced + search.best)
}

/// Forces essential columns and strips dominated rows and columns until
/// nothing changes. Returns the forced cost, remaining rows and columns, or
/// `None` when some row has no column left.
fn reduce(p: &Problem, mut rows: RowSet, mut cols: Vec<bool>) -> Option<(u64, RowSet, Vec<usize>)> {
    let mut forced = 0;
    loop {
        let mut changed = false;

        for r in rows.clone().iter() {
            if !rows.contains(r) {
                continue;
            }
            let live: Vec<usize> = p.row_cols[r].iter().copied().filter(|&j| cols[j]).collect();
            if live.is_empty() {
                return None;
            }
            if live.len() == 1 {
                let j = live[0];
                forced += p.costs[j];
                rows = rows.minus(&p.col_rows[j]);
                cols[j] = false;
                changed = true;
            }
        }
        for j in 0..cols.len() {
            if cols[j] && !p.col_rows[j].intersects(&rows) {
                cols[j] = false;
                changed = true;
            }
        }

        // row r2 is implied by r1 when every column covering r1 covers r2
        let live_rows: Vec<usize> = rows.iter().collect();
        let row_sets: Vec<Vec<usize>> = live_rows
            .iter()
            .map(|&r| p.row_cols[r].iter().copied().filter(|&j| cols[j]).collect())
            .collect();
        for (a, &r1) in live_rows.iter().enumerate() {
            if !rows.contains(r1) {
                continue;
            }
            for (b, &r2) in live_rows.iter().enumerate() {
                if a == b || !rows.contains(r2) {
                    continue;
                }
                let sub = row_sets[a].iter().all(|j| row_sets[b].binary_search(j).is_ok());
                if sub && (row_sets[a].len() < row_sets[b].len() || a < b) {
                    rows.remove(r2);
                    changed = true;
                }
            }
        }

        // column j1 is never needed when j2 covers a superset at no higher
        // cost; identical row sets keep the cheapest, then lowest, column
        let mut by_set: HashMap<RowSet, usize> = HashMap::new();
        for j in 0..cols.len() {
            if !cols[j] {
                continue;
            }
            let set = p.col_rows[j].and(&rows);
            match by_set.entry(set) {
                Entry::Vacant(e) => {
                    e.insert(j);
                }
                Entry::Occupied(mut e) => {
                    let k = *e.get();
                    let loser = if (p.costs[j], j) < (p.costs[k], k) {
                        e.insert(j);
                        k
                    } else {
                        j
                    };
                    cols[loser] = false;
                    changed = true;
                }
            }
        }
        let mut reps: Vec<(RowSet, usize)> = by_set.into_iter().collect();
        reps.sort_by_key(|(set, j)| (std::cmp::Reverse(set.len()), *j));
        for a in 0..reps.len() {
            let (set_a, j1) = &reps[a];
            let dominated = reps[..a]
                .iter()
                .any(|(set_b, j2)| p.costs[*j2] <= p.costs[*j1] && set_b.len() > set_a.len() && set_a.is_subset(set_b));
            if dominated {
                cols[*j1] = false;
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }
    let live = (0..cols.len()).filter(|&j| cols[j]).collect();
    Some((forced, rows, live))
}


const EPS: f64 = 1e-6;
const ROOT_ITERATIONS: usize = 200;
const NODE_ITERATIONS: usize = 30;

/// Branch-and-bound state: the cheapest cover cost found so far (or the
/// cutoff), and a cost at which any cover ends the search.
struct Search {
    best: u64,
    floor: u64,
}

/// Active columns restricted to `uncovered`, with rows renumbered densely.
fn restrict(p: &Problem, uncovered: &RowSet, avail: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<(usize, Vec<usize>)>) {
    let rows: Vec<usize> = uncovered.iter().collect();
    let mut local = vec![usize::MAX; p.n_rows];
    for (i, &r) in rows.iter().enumerate() {
        local[r] = i;
    }
    let cols = (0..p.costs.len())
        .filter(|&j| avail(j))
        .filter_map(|j| {
            let rs: Vec<usize> = p.col_rows[j].and(uncovered).iter().map(|r| local[r]).collect();
            (!rs.is_empty()).then_some((j, rs))
        })
        .collect();
    (rows, cols)
}

/// Lagrangian bound of the covering problem over `cols`, improved by
/// projected subgradient steps from `u`. The first iterate from a zero `u` is
/// the cost-share bound. Leaves the best multipliers in `u` and returns the
/// bound with the reduced costs at those multipliers. With `heuristic`, each
/// iterate is also repaired into a cover that may lower `budget`.
fn lagrangian(p: &Problem, cols: &[(usize, Vec<usize>)], u: &mut [f64], budget: &mut u64, iterations: usize, heuristic: bool) -> (f64, Vec<f64>) {
    let m = u.len();
    if u.iter().all(|&x| x == 0.0) {
        u.fill(f64::INFINITY);
        for (j, rows) in cols {
            let share = p.costs[*j] as f64 / rows.len() as f64;
            for &r in rows {
                u[r] = u[r].min(share);
            }
        }
        if u.iter().any(|x| x.is_infinite()) {
            return (f64::INFINITY, vec![0.0; cols.len()]);
        }
    }
    let mut rc = vec![0.0; cols.len()];
    let mut best = (f64::NEG_INFINITY, u.to_vec(), rc.clone());
    let mut scale = 2.0;
    let mut stall = 0;
    for _ in 0..=iterations {
        let mut bound: f64 = u.iter().sum();
        let mut g = vec![1.0; m];
        for (k, (j, rows)) in cols.iter().enumerate() {
            let r = p.costs[*j] as f64 - rows.iter().map(|&r| u[r]).sum::<f64>();
            rc[k] = r;
            if r < 0.0 {
                bound += r;
                for &row in rows {
                    g[row] -= 1.0;
                }
            }
        }
        if heuristic {
            *budget = (*budget).min(repair(p, cols, &rc, m));
        }
        if bound > best.0 {
            best = (bound, u.to_vec(), rc.clone());
            stall = 0;
        } else {
            stall += 1;
            if stall >= 5 {
                scale /= 2.0;
                stall = 0;
            }
        }
        if best.0 > *budget as f64 - 1.0 + EPS || scale < 1e-3 {
            break;
        }
        for (r, gr) in g.iter_mut().enumerate() {
            if u[r] <= 0.0 && *gr < 0.0 {
                *gr = 0.0;
            }
        }
        let norm: f64 = g.iter().map(|x| x * x).sum();
        if norm == 0.0 {
            break;
        }
        let t = scale * (*budget as f64 - bound).max(1.0) / norm;
        for (ur, gr) in u.iter_mut().zip(&g) {
            *ur = (*ur + t * gr).max(0.0);
        }
    }
    u.copy_from_slice(&best.1);
    (best.0, best.2)
}

/// Cover built from the columns with negative reduced cost, completed
/// greedily and stripped of redundant columns, most expensive first.
fn repair(p: &Problem, cols: &[(usize, Vec<usize>)], rc: &[f64], m: usize) -> u64 {
    let mut count = vec![0u32; m];
    let mut taken: Vec<bool> = rc.iter().map(|&r| r < 0.0).collect();
    for (k, (_, rows)) in cols.iter().enumerate() {
        if taken[k] {
            rows.iter().for_each(|&r| count[r] += 1);
        }
    }
    loop {
        let mut pick: Option<(usize, f64)> = None;
        for (k, (j, rows)) in cols.iter().enumerate() {
            let new = rows.iter().filter(|&&r| count[r] == 0).count();
            if taken[k] || new == 0 {
                continue;
            }
            let ratio = p.costs[*j] as f64 / new as f64;
            if pick.is_none_or(|(_, b)| ratio < b) {
                pick = Some((k, ratio));
            }
        }
        let Some((k, _)) = pick else { break };
        taken[k] = true;
        cols[k].1.iter().for_each(|&r| count[r] += 1);
    }
    let mut order: Vec<usize> = (0..cols.len()).filter(|&k| taken[k]).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(p.costs[cols[k].0]));
    let mut total = 0;
    for k in order {
        let rows = &cols[k].1;
        if rows.iter().all(|&r| count[r] > 1) {
            rows.iter().for_each(|&r| count[r] -= 1);
        } else {
            total += p.costs[cols[k].0];
        }
    }
    total
}

fn branch(p: &Problem, s: &mut Search, mut uncovered: RowSet, mut avail: Vec<bool>, mut cost: u64, mut u: Vec<f64>, iterations: usize) {
    if s.best <= s.floor {
        return;
    }
    // node-level essentials
    loop {
        if uncovered.is_empty() {
            s.best = s.best.min(cost);
            return;
        }
        let mut forced = None;
        for r in uncovered.iter() {
            let mut live = p.row_cols[r].iter().filter(|&&j| avail[j]);
            match (live.next(), live.next()) {
                (None, _) => return,
                (Some(&j), None) => {
                    forced = Some(j);
                    break;
                }
                _ => {}
            }
        }
        match forced {
            Some(j) => {
                cost += p.costs[j];
                uncovered = uncovered.minus(&p.col_rows[j]);
                avail[j] = false;
                if cost >= s.best {
                    return;
                }
            }
            None => break,
        }
    }

    let mut budget = s.best - cost;
    let (rows, cols) = restrict(p, &uncovered, |j| avail[j]);
    let mut lu: Vec<f64> = rows.iter().map(|&r| u[r]).collect();
    let (lb, rc) = lagrangian(p, &cols, &mut lu, &mut budget, iterations, false);
    s.best = cost + budget;
    // only strictly cheaper covers are of interest, and costs are integral
    if lb > budget as f64 - 1.0 + EPS {
        return;
    }
    for (i, &r) in rows.iter().enumerate() {
        u[r] = lu[i];
    }
    // reduced-cost fixing: taking column k costs at least lb + rc_k
    for (k, (j, _)) in cols.iter().enumerate() {
        if lb + rc[k] > budget as f64 - 1.0 + EPS {
            avail[*j] = false;
        }
    }

    let mut pick: Option<(usize, usize)> = None;
    // among the columns the relaxation takes, the one covering the most
    // uncovered rows; any column when it takes none. Ties to the lower index.
    for negative_only in [true, false] {
        for (k, (j, rs)) in cols.iter().enumerate() {
            if avail[*j] && (!negative_only || rc[k] < 0.0) && pick.is_none_or(|(_, g)| rs.len() > g) {
                pick = Some((*j, rs.len()));
            }
        }
        if pick.is_some() {
            break;
        }
    }
    let Some((j, _)) = pick else { return };
    avail[j] = false;
    branch(p, s, uncovered.minus(&p.col_rows[j]), avail.clone(), cost + p.costs[j], u.clone(), NODE_ITERATIONS);
    branch(p, s, uncovered, avail, cost, u, NODE_ITERATIONS);
}

/// Lagrangian bound for covering `rows` with columns from `from` on, at fixed
/// multipliers.
fn screen_bound(p: &Problem, rows: &RowSet, from: usize, u: &[f64]) -> f64 {
    let mut bound: f64 = rows.iter().map(|r| u[r]).sum();
    for j in from..p.costs.len() {
        let covered: f64 = p.col_rows[j].and(rows).iter().map(|r| u[r]).sum();
        let rc = p.costs[j] as f64 - covered;
        if rc < 0.0 {
            bound += rc;
        }
    }
    bound
}

/// Lexicographically smallest ascending column list among covers costing
/// `optimum`. Columns are fixed one at a time: the next one is the lowest index
/// that still admits a completion of exactly the optimal cost from later
/// columns. Every column of a minimum-cost cover covers some row no other
/// member covers, so only columns touching an uncovered row are tried.
fn lex_first_cover(p: &Problem, optimum: u64) -> Vec<usize> {
    let n = p.costs.len();
    let mut chosen = Vec::new();
    let mut uncovered = RowSet::full(p.n_rows);
    let mut spent = 0;
    let mut next = 0;
    while !uncovered.is_empty() {
        let (rows, cols) = restrict(p, &uncovered, |j| j >= next);
        let mut lu = vec![0.0; rows.len()];
        lagrangian(p, &cols, &mut lu, &mut (optimum - spent + 1), ROOT_ITERATIONS, false);
        let mut u = vec![0.0; p.n_rows];
        for (i, &r) in rows.iter().enumerate() {
            u[r] = if lu[i].is_finite() { lu[i] } else { 0.0 };
        }

        let mut step = None;
        for j in next..n {
            let c = p.costs[j];
            if !p.col_rows[j].intersects(&uncovered) || spent + c > optimum {
                continue;
            }
            let rest = uncovered.minus(&p.col_rows[j]);
            let remaining = optimum - spent - c;
            let completes = if rest.is_empty() {
                remaining == 0
            } else {
                screen_bound(p, &rest, j + 1, &u) <= remaining as f64 + EPS
                    && solve_value(p, rest.clone(), (0..n).map(|k| k > j).collect(), remaining + 1, remaining)
                        == Some(remaining)
            };
            if completes {
                step = Some((j, rest));
                break;
            }
        }
        let (j, rest) = step.expect("a cover of the optimal cost extends the chosen prefix");
        chosen.push(j);
        spent += p.costs[j];
        uncovered = rest;
        next = j + 1;
    }
    chosen
}

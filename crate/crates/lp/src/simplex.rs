use crate::model::{LinearProgram, LpError, LpSolution, LpStatus, Relation};
use crate::FEASIBILITY_TOL;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 20;

/// How an original variable maps onto non-negative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + y`
    Shift { col: usize, offset: f64 },
    /// `x = offset - y`
    Neg { col: usize, offset: f64 },
    /// `x = y⁺ - y⁻`
    Free { pos: usize, neg: usize },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowOrigin {
    Original(usize),
    Bound,
}

struct StdRow {
    dense: Vec<f64>,
    relation: Relation,
    rhs: f64,
    origin: RowOrigin,
    /// Product of the equilibration factor and the sign flip.
    factor: f64,
}

struct Tableau {
    width: usize,
    a: Vec<f64>,
    basis: Vec<usize>,
    ident: Vec<usize>,
    ncols: usize,
    d: Vec<f64>,
}

enum RunOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.a[r * self.width + j]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.ncols)
    }

    fn price_out(&mut self, costs: &[f64]) {
        let w = self.width;
        self.d.clear();
        self.d.extend_from_slice(costs);
        self.d.push(0.0);
        for r in 0..self.rows() {
            let cb = costs[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.a[r * w..(r + 1) * w];
            for (dj, &arj) in self.d.iter_mut().zip(row) {
                *dj -= cb * arj;
            }
        }
    }

    fn objective(&self) -> f64 {
        -self.d[self.ncols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let piv = self.a[pr * w + pc];
        let prow: Vec<f64> = self.a[pr * w..(pr + 1) * w].iter().map(|v| v / piv).collect();
        for r in 0..self.rows() {
            if r == pr {
                continue;
            }
            let f = self.a[r * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[r * w..(r + 1) * w];
            for (v, p) in row.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            row[pc] = 0.0;
        }
        let f = self.d[pc];
        if f != 0.0 {
            for (v, p) in self.d.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.d[pc] = 0.0;
        }
        self.a[pr * w..(pr + 1) * w].copy_from_slice(&prow);
        self.a[pr * w + pc] = 1.0;
        self.basis[pr] = pc;
    }

    fn entering(&self, limit: usize, bland: bool) -> Option<usize> {
        if bland {
            (0..limit).find(|&j| self.d[j] < -COST_TOL)
        } else {
            let mut best = None;
            let mut best_val = -COST_TOL;
            for j in 0..limit {
                if self.d[j] < best_val {
                    best_val = self.d[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, pc: usize, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows() {
            let arj = self.at(r, pc);
            if arj <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(r).max(0.0) / arj;
            let Some((br, bratio)) = best else {
                best = Some((r, ratio));
                continue;
            };
            let tol = 1e-12 * (1.0 + bratio.abs());
            if ratio < bratio - tol {
                best = Some((r, ratio));
            } else if ratio <= bratio + tol {
                let replace = if bland {
                    self.basis[r] < self.basis[br]
                } else {
                    arj > self.at(br, pc)
                };
                if replace {
                    best = Some((r, ratio));
                }
            }
        }
        best
    }

    fn run(&mut self, costs: &[f64], limit_col: usize, max_iter: usize) -> RunOutcome {
        let mut streak = 0usize;
        let mut iter = 0usize;
        let mut refreshed = false;
        loop {
            let bland = streak >= DEGENERATE_STREAK;
            let Some(pc) = self.entering(limit_col, bland) else {
                if refreshed {
                    return RunOutcome::Optimal;
                }
                // Recompute reduced costs from the basis to shed accumulated
                // round-off before declaring optimality.
                self.price_out(costs);
                refreshed = true;
                continue;
            };
            refreshed = false;
            let Some((pr, ratio)) = self.leaving(pc, bland) else {
                return RunOutcome::Unbounded;
            };
            if ratio <= 1e-12 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(pr, pc);
            iter += 1;
            if iter > max_iter {
                return RunOutcome::IterationLimit;
            }
        }
    }
}

/// Solves `min cᵀx` subject to the rows and bounds of `p`.
///
/// Uses a dense two-phase tableau with Dantzig pricing that falls back to
/// Bland's rule after a run of degenerate pivots. Rows are equilibrated
/// before pivoting; duals are reported for the original rows.
pub fn solve_lp(p: &LinearProgram) -> Result<LpSolution, LpError> {
    p.validate()?;
    let n = p.num_vars();
    let m = p.num_rows();

    // Variable substitution.
    let mut maps = Vec::with_capacity(n);
    let mut ns = 0usize;
    let mut struct_costs = Vec::new();
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (l, u, c) = (p.lower[j], p.upper[j], p.costs[j]);
        let map = if l.is_finite() && u.is_finite() && u - l <= 0.0 {
            VarMap::Fixed(l)
        } else if l.is_finite() {
            let col = ns;
            ns += 1;
            struct_costs.push(c);
            if u.is_finite() {
                bound_rows.push((col, u - l));
            }
            VarMap::Shift { col, offset: l }
        } else if u.is_finite() {
            let col = ns;
            ns += 1;
            struct_costs.push(-c);
            VarMap::Neg { col, offset: u }
        } else {
            let pos = ns;
            let neg = ns + 1;
            ns += 2;
            struct_costs.push(c);
            struct_costs.push(-c);
            VarMap::Free { pos, neg }
        };
        maps.push(map);
    }

    let mut std_rows: Vec<StdRow> = Vec::with_capacity(m + bound_rows.len());
    for (i, row) in p.rows.iter().enumerate() {
        let mut dense = vec![0.0; ns];
        let mut rhs = row.rhs;
        for &(j, a) in &row.coeffs {
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    dense[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Neg { col, offset } => {
                    dense[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Free { pos, neg } => {
                    dense[pos] += a;
                    dense[neg] -= a;
                }
                VarMap::Fixed(v) => rhs -= a * v,
            }
        }
        std_rows.push(StdRow {
            dense,
            relation: row.relation,
            rhs,
            origin: RowOrigin::Original(i),
            factor: 1.0,
        });
    }
    for &(col, ub) in &bound_rows {
        let mut dense = vec![0.0; ns];
        dense[col] = 1.0;
        std_rows.push(StdRow {
            dense,
            relation: Relation::Le,
            rhs: ub,
            origin: RowOrigin::Bound,
            factor: 1.0,
        });
    }

    // Equilibrate, normalise rhs sign, drop empty rows.
    let mut kept: Vec<StdRow> = Vec::with_capacity(std_rows.len());
    for mut row in std_rows {
        let amax = row.dense.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if amax == 0.0 {
            let tol = FEASIBILITY_TOL * (1.0 + row.rhs.abs());
            let ok = match row.relation {
                Relation::Le => 0.0 <= row.rhs + tol,
                Relation::Ge => 0.0 >= row.rhs - tol,
                Relation::Eq => row.rhs.abs() <= tol,
            };
            if !ok {
                return Ok(LpSolution::without_values(LpStatus::Infeasible, n, m));
            }
            continue;
        }
        let mut factor = 1.0 / amax;
        if row.rhs * factor < 0.0 {
            factor = -factor;
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        for v in row.dense.iter_mut() {
            *v *= factor;
        }
        row.rhs *= factor;
        row.factor = factor;
        kept.push(row);
    }

    // Column layout: structural | slack/surplus | artificial.
    let rows = kept.len();
    let n_slack = kept.iter().filter(|r| r.relation != Relation::Eq).count();
    let n_art = kept.iter().filter(|r| r.relation != Relation::Le).count();
    let art_start = ns + n_slack;
    let ncols = art_start + n_art;
    let width = ncols + 1;
    let mut a = vec![0.0; rows * width];
    let mut basis = vec![0usize; rows];
    let mut ident = vec![0usize; rows];
    let mut next_slack = ns;
    let mut next_art = art_start;
    for (r, row) in kept.iter().enumerate() {
        let base = r * width;
        a[base..base + ns].copy_from_slice(&row.dense);
        a[base + ncols] = row.rhs;
        match row.relation {
            Relation::Le => {
                a[base + next_slack] = 1.0;
                basis[r] = next_slack;
                ident[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                a[base + next_slack] = -1.0;
                next_slack += 1;
                a[base + next_art] = 1.0;
                basis[r] = next_art;
                ident[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                a[base + next_art] = 1.0;
                basis[r] = next_art;
                ident[r] = next_art;
                next_art += 1;
            }
        }
    }
    let mut t = Tableau {
        width,
        a,
        basis,
        ident,
        ncols,
        d: Vec::with_capacity(width),
    };
    let max_iter = 200 * (rows + ncols) + 1000;

    if n_art > 0 {
        let mut c1 = vec![0.0; ncols];
        for c in c1.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        t.price_out(&c1);
        match t.run(&c1, ncols, max_iter) {
            RunOutcome::Optimal => {}
            // Phase one is bounded below by zero.
            RunOutcome::Unbounded | RunOutcome::IterationLimit => {
                return Ok(LpSolution::without_values(LpStatus::NumericalFailure, n, m));
            }
        }
        let rhs_scale = kept.iter().fold(1.0f64, |acc, r| acc.max(r.rhs.abs()));
        if t.objective() > 1e-9 * rhs_scale {
            return Ok(LpSolution::without_values(LpStatus::Infeasible, n, m));
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..rows {
            if t.basis[r] < art_start {
                continue;
            }
            let mut best = None;
            let mut best_abs = 1e-7;
            for j in 0..art_start {
                let v = t.at(r, j).abs();
                if v > best_abs {
                    best_abs = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                t.pivot(r, j);
            }
        }
        for r in 0..rows {
            let idx = r * width + ncols;
            if t.a[idx] < 0.0 {
                t.a[idx] = 0.0;
            }
        }
    }

    // Scale the objective so the reduced-cost tolerance is relative.
    let cscale = struct_costs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let cscale = if cscale > 0.0 { cscale } else { 1.0 };
    let mut c2 = vec![0.0; ncols];
    for (c, &v) in c2.iter_mut().zip(&struct_costs) {
        *c = v / cscale;
    }
    t.price_out(&c2);
    match t.run(&c2, art_start, max_iter) {
        RunOutcome::Optimal => {}
        RunOutcome::Unbounded => {
            return Ok(LpSolution::without_values(LpStatus::Unbounded, n, m));
        }
        RunOutcome::IterationLimit => {
            return Ok(LpSolution::without_values(LpStatus::NumericalFailure, n, m));
        }
    }

    let mut yval = vec![0.0; ns];
    for r in 0..rows {
        let b = t.basis[r];
        if b < ns {
            yval[b] = t.rhs(r).max(0.0);
        }
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset } => offset + yval[col],
            VarMap::Neg { col, offset } => offset - yval[col],
            VarMap::Free { pos, neg } => yval[pos] - yval[neg],
            VarMap::Fixed(v) => v,
        })
        .collect();

    let mut duals = vec![0.0; m];
    for (r, row) in kept.iter().enumerate() {
        if let RowOrigin::Original(i) = row.origin {
            let col = t.ident[r];
            let mut y = 0.0;
            for k in 0..rows {
                let cb = c2[t.basis[k]];
                if cb != 0.0 {
                    y += cb * t.at(k, col);
                }
            }
            duals[i] = y * row.factor * cscale;
        }
    }

    if !p.is_feasible(&x, FEASIBILITY_TOL) {
        return Ok(LpSolution::without_values(LpStatus::NumericalFailure, n, m));
    }
    let objective = p.objective_at(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        duals,
    })
}

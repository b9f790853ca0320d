//! Dense two-phase simplex for the tiny LPs this crate needs.
//!
//! Problems have the form `max c.z  s.t.  G z <= b` with all variables free.
//! Sizes are a handful of columns and at most a few hundred rows, so a dense
//! tableau with Bland's rule is both fast enough and deterministic. No
//! external solver dependency on purpose.

/// Outcome of an LP solve. `Infeasible` cannot occur for the Chebyshev
/// programs built by this crate (free variables always admit a point) but the
/// solver reports it faithfully for general input.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { z: Vec<f64>, value: f64 },
    Unbounded,
    Infeasible,
}

const MAX_PIVOTS: usize = 20_000;

/// Maximize `c.z` over free `z` subject to `rows[i].z <= rhs[i]`.
///
/// Free variables are split `z = u - v`; each row gets a slack, and rows with
/// negative right-hand side get a phase-1 artificial. Bland's rule keeps the
/// pivot sequence finite on degenerate inputs.
pub(crate) fn solve_max(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> LpOutcome {
    let d = c.len();
    let m = rows.len();
    assert_eq!(m, rhs.len());
    for r in rows {
        assert_eq!(r.len(), d);
    }

    let scale = rhs.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
    let eps = 1e-10 * scale;

    // Columns: u (d) | v (d) | slack (m) | artificial (k).
    let n_struct = 2 * d + m;
    let need_art: Vec<bool> = rhs.iter().map(|&b| b < 0.0).collect();
    let k = need_art.iter().filter(|&&x| x).count();
    let n = n_struct + k;

    let mut tab = vec![vec![0.0_f64; n + 1]; m];
    let mut basis = vec![0_usize; m];
    let mut art_col = n_struct;
    for i in 0..m {
        let sgn = if need_art[i] { -1.0 } else { 1.0 };
        for j in 0..d {
            tab[i][j] = sgn * rows[i][j];
            tab[i][d + j] = -sgn * rows[i][j];
        }
        tab[i][2 * d + i] = sgn;
        tab[i][n] = sgn * rhs[i];
        if need_art[i] {
            tab[i][art_col] = 1.0;
            basis[i] = art_col;
            art_col += 1;
        } else {
            basis[i] = 2 * d + i;
        }
    }

    // Phase 1: minimize the artificial sum.
    if k > 0 {
        let mut cost = vec![0.0_f64; n];
        for j in n_struct..n {
            cost[j] = 1.0;
        }
        if !run_phase(&mut tab, &mut basis, &cost, n, eps).is_some() {
            unreachable!("phase 1 objective is bounded below");
        }
        let obj: f64 = (0..m)
            .filter(|&i| basis[i] >= n_struct)
            .map(|i| tab[i][n])
            .sum();
        if obj > eps.max(1e-8 * scale) {
            return LpOutcome::Infeasible;
        }
        // Drive leftover artificials out of the basis; rows that cannot pivot
        // are redundant and can stay (their rhs is zero).
        for i in 0..m {
            if basis[i] >= n_struct {
                if let Some(j) = (0..n_struct).find(|&j| tab[i][j].abs() > eps) {
                    pivot(&mut tab, &mut basis, i, j, n);
                }
            }
        }
        // Mask artificial columns for phase 2.
        for row in tab.iter_mut() {
            for j in n_struct..n {
                row[j] = 0.0;
            }
        }
    }

    // Phase 2: minimize -c.(u - v).
    let mut cost = vec![0.0_f64; n];
    for j in 0..d {
        cost[j] = -c[j];
        cost[d + j] = c[j];
    }
    for i in 0..m {
        if basis[i] >= n_struct {
            cost[basis[i]] = 0.0;
        }
    }
    match run_phase(&mut tab, &mut basis, &cost, n, eps) {
        Some(()) => {}
        None => return LpOutcome::Unbounded,
    }

    let mut x = vec![0.0_f64; n];
    for i in 0..m {
        x[basis[i]] = tab[i][n];
    }
    let z: Vec<f64> = (0..d).map(|j| x[j] - x[d + j]).collect();
    let value = c.iter().zip(&z).map(|(ci, zi)| ci * zi).sum();
    LpOutcome::Optimal { z, value }
}

/// Runs simplex iterations for one phase. Returns None on unboundedness.
fn run_phase(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    n: usize,
    eps: f64,
) -> Option<()> {
    let m = tab.len();
    for _ in 0..MAX_PIVOTS {
        // Reduced costs r_j = c_j - c_B . column_j (tableau is B^-1 A).
        let mut enter = None;
        'cols: for j in 0..n {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                if cost[basis[i]] != 0.0 {
                    r -= cost[basis[i]] * tab[i][j];
                }
            }
            if r < -eps.max(1e-12) {
                enter = Some(j); // Bland: first improving column
                break 'cols;
            }
        }
        let Some(j) = enter else { return Some(()) };

        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if tab[i][j] > eps {
                let ratio = tab[i][n] / tab[i][j];
                let better = ratio < best - 1e-14
                    || (ratio < best + 1e-14
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(i) = leave else { return None };
        pivot(tab, basis, i, j, n);
    }
    // Bland's rule precludes cycling; hitting the cap means numerical trouble.
    // Treat as converged to the current (feasible) vertex.
    Some(())
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], i: usize, j: usize, n: usize) {
    let piv = tab[i][j];
    for v in tab[i].iter_mut() {
        *v /= piv;
    }
    let pivot_row = tab[i].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r != i && row[j].abs() > 0.0 {
            let f = row[j];
            for (v, pv) in row.iter_mut().zip(&pivot_row).take(n + 1) {
                *v -= f * pv;
            }
        }
    }
    basis[i] = j;
}

//! Dense tableau simplex for small zero-sum matrix games.

const PIVOT_EPS: f64 = 1e-12;

/// Optimal strategies of a matrix game where the row player minimizes and
/// the column player maximizes `x^T M y`.
#[derive(Debug, Clone)]
pub(crate) struct MatrixGameSolution {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    pub value: f64,
}

/// Solves the game for a minimizing row player by handing `-M` to
/// [`solve_max_min`].
pub(crate) fn solve_matrix_game(payoff: &[Vec<f64>]) -> MatrixGameSolution {
    let neg: Vec<Vec<f64>> = payoff.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
    let sol = solve_max_min(&neg);
    MatrixGameSolution { value: -sol.value, ..sol }
}

/// Game where the row player maximizes, solved through the LP
/// `max sum(y) s.t. B y <= 1, y >= 0` on the shifted matrix `B = A + s > 0`.
/// Its optimum is `1 / v(B)` with `y` normalized as the minimizing column
/// strategy; the maximizing row strategy is read from the dual prices.
/// Bland's rule prevents cycling.
fn solve_max_min(payoff: &[Vec<f64>]) -> MatrixGameSolution {
    let r = payoff.len();
    let c = payoff[0].len();
    let min = payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let width = c + r + 1;
    // rows 0..r are constraints, row r is the objective
    let mut t = vec![vec![0.0; width]; r + 1];
    for (i, row) in payoff.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            t[i][j] = x + shift;
        }
        t[i][c + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    t[r][..c].fill(-1.0);
    let mut basis: Vec<usize> = (c..c + r).collect();

    while let Some(enter) = (0..c + r).find(|&j| t[r][j] < -PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        for i in 0..r {
            let a = t[i][enter];
            if a > PIVOT_EPS {
                let ratio = t[i][width - 1] / a;
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][width - 1] / t[l][enter];
                        if ratio < best - PIVOT_EPS
                            || ((ratio - best).abs() <= PIVOT_EPS && basis[i] < basis[l])
                        {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        // the feasible region is bounded because B > 0
        let l = leave.expect("bounded LP has a leaving row");
        let p = t[l][enter];
        for x in t[l].iter_mut() {
            *x /= p;
        }
        let pivot_row = t[l].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != l {
                let f = row[enter];
                if f != 0.0 {
                    for (x, &y) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * y;
                    }
                }
            }
        }
        basis[l] = enter;
    }

    let mut cols = vec![0.0; c];
    for (i, &b) in basis.iter().enumerate() {
        if b < c {
            cols[b] = t[i][width - 1].max(0.0);
        }
    }
    let mut rows: Vec<f64> = (0..r).map(|i| t[r][c + i].max(0.0)).collect();
    let total = t[r][width - 1];
    normalize(&mut cols);
    normalize(&mut rows);
    MatrixGameSolution { rows, cols, value: 1.0 / total - shift }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

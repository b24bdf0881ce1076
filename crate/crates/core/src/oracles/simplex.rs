//! Dense tableau simplex for small problems of the form
//! `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0` (the origin is feasible).
//! Bland's rule keeps it from cycling on degenerate vertices.

const EPS: f64 = 1e-12;

/// Optimal `x`, or `None` when the objective is unbounded.
pub(crate) fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = c.len();
    let m = a.len();
    debug_assert!(b.iter().all(|&v| v >= 0.0));
    let width = n + m + 1;
    // rows 0..m constraints, row m objective (reduced costs, negated)
    let mut t = vec![vec![0.0; width]; m + 1];
    for (i, row) in a.iter().enumerate() {
        t[i][..n].copy_from_slice(row);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i].max(0.0);
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| t[m][j] < -EPS) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[i][enter];
            if coef > EPS {
                let ratio = t[i][width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let row = leave?;
        let pivot = t[row][enter];
        for v in t[row].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[enter];
            if f != 0.0 {
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        basis[row] = enter;
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i][width - 1];
        }
    }
    Some(x)
}

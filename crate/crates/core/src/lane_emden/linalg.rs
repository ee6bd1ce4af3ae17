use crate::scalar::Real;

/// Solves `A x = b` by LU with partial pivoting. `None` when a pivot falls
/// below `rel_pivot * max|A_ij|`.
pub(crate) fn lu_solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>, rel_pivot: T) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if !(scale > T::zero()) {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))
            .expect("nonempty");
        if !(a[piv][col].abs() > rel_pivot * scale) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Levenberg step: solves `(JᵀJ + μ I) x = Jᵀ b`.
pub(crate) fn levenberg_solve<T: Real>(j: &[Vec<T>], b: &[T], mu_rel: T) -> Option<Vec<T>> {
    let n = b.len();
    let mut jtj = vec![vec![T::zero(); n]; n];
    let mut jtb = vec![T::zero(); n];
    for (row, &bi) in j.iter().zip(b) {
        for a in 0..n {
            jtb[a] = jtb[a] + row[a] * bi;
            for c in 0..n {
                jtj[a][c] = jtj[a][c] + row[a] * row[c];
            }
        }
    }
    let diag = (0..n).fold(T::zero(), |acc, i| acc.max(jtj[i][i]));
    let mu = mu_rel * diag;
    for (i, row) in jtj.iter_mut().enumerate() {
        row[i] = row[i] + mu;
    }
    lu_solve(jtj, jtb, T::epsilon())
}

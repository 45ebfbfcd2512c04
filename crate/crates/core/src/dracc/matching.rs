//! Maximum-weight bipartite matching by the Hungarian method.

use crate::scalar::Scalar;

/// Maximum total weight of a matching between rows and columns of `weights`.
///
/// Entries `<= 0` are never worth using and are treated as absent. Returns the
/// optimum and, for every row, its matched column.
pub fn max_weight_matching<R: Scalar>(weights: &[Vec<R>]) -> (R, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    let n = rows.max(cols);
    if n == 0 {
        return (R::zero(), vec![None; rows]);
    }
    let gain = |i: usize, j: usize| -> R {
        match weights.get(i).and_then(|r| r.get(j)) {
            Some(w) if *w > R::zero() => w.clone(),
            _ => R::zero(),
        }
    };
    // Minimise cost = -gain on the padded square matrix.
    let mut scale = R::one();
    for i in 0..rows {
        for j in 0..cols {
            scale = scale + gain(i, j);
        }
    }
    let inf = scale * R::from_count(n + 2);
    let mut u = vec![R::zero(); n + 1];
    let mut v = vec![R::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf.clone(); n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf.clone();
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = R::zero() - gain(i0 - 1, j - 1) - u[i0].clone() - v[j].clone();
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j].clone();
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]].clone() + delta.clone();
                    v[j] = v[j].clone() - delta.clone();
                } else {
                    minv[j] = minv[j].clone() - delta.clone();
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![None; rows];
    let mut total = R::zero();
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols {
            let g = gain(i - 1, j - 1);
            if g > R::zero() {
                total = total + g;
                assignment[i - 1] = Some(j - 1);
            }
        }
    }
    (total, assignment)
}

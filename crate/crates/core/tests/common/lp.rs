//! Dense two-phase simplex (Bland's rule) for `min c^T x, A x = b, x >= 0`.

#![allow(clippy::needless_range_loop)]

pub fn simplex(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    // tableau with artificials: columns [x (n) | art (m) | rhs]
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        let sgn = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sgn * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = sgn * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // phase 1 objective: minimise sum of artificials
    let mut obj = vec![0.0; width];
    for j in n..n + m {
        obj[j] = 1.0;
    }
    run(&mut t, &mut basis, &obj, n + m)?;
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| t[i][width - 1])
        .sum();
    if infeas > 1e-8 {
        return None;
    }
    // drive remaining artificials out of the basis
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > 1e-10) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }
    let mut obj2 = vec![0.0; width];
    obj2[..n].copy_from_slice(c);
    run(&mut t, &mut basis, &obj2, n)?;
    let mut x = vec![0.0; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[i][width - 1];
        }
    }
    let val = x.iter().zip(c).map(|(a, b)| a * b).sum();
    Some((val, x))
}

fn pivot(t: &mut [Vec<f64>], r: usize, col: usize) {
    let p = t[r][col];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let row = t[r].clone();
    for (i, ti) in t.iter_mut().enumerate() {
        if i != r {
            let f = ti[col];
            if f != 0.0 {
                for (v, rv) in ti.iter_mut().zip(&row) {
                    *v -= f * rv;
                }
            }
        }
    }
}

fn run(t: &mut [Vec<f64>], basis: &mut [usize], obj: &[f64], allowed: usize) -> Option<()> {
    let m = basis.len();
    let width = t[0].len();
    for _ in 0..50_000 {
        // reduced costs
        let mut enter = None;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = obj[j];
            for i in 0..m {
                rc -= obj[basis[i]] * t[i][j];
            }
            if rc < -1e-11 {
                enter = Some(j);
                break;
            }
        }
        let Some(j) = enter else { return Some(()) };
        let mut best: Option<(f64, usize)> = None;
        for i in 0..m {
            if t[i][j] > 1e-11 {
                let ratio = t[i][width - 1] / t[i][j];
                match best {
                    None => best = Some((ratio, i)),
                    Some((br, bi)) => {
                        if ratio < br - 1e-13
                            || ((ratio - br).abs() <= 1e-13 && basis[i] < basis[bi])
                        {
                            best = Some((ratio, i));
                        }
                    }
                }
            }
        }
        let (_, r) = best?;
        pivot(t, r, j);
        basis[r] = j;
    }
    None
}

/// `min sum_i w_i |c_i|  s.t.  B c = y` for real `B`, as an LP in `c = u - v`.
pub fn weighted_l1_min(bmat: &[Vec<f64>], y: &[f64], w: &[f64]) -> Option<f64> {
    let n = w.len();
    let a: Vec<Vec<f64>> = bmat
        .iter()
        .map(|row| row.iter().cloned().chain(row.iter().map(|v| -v)).collect())
        .collect();
    let cost: Vec<f64> = w.iter().cloned().chain(w.iter().cloned()).collect();
    debug_assert_eq!(cost.len(), 2 * n);
    simplex(&a, y, &cost).map(|(v, _)| v)
}

/// Number of sparsity patterns with `s_1 = 0` and `1 <= s_j <= 2^{j-2}`
/// on `r` dyadic levels, `2^{(r-1)(r-2)/2}`.
pub fn count_vanishing_level_patterns(r: usize) -> u128 {
    if r < 2 {
        return 0;
    }
    let e = (r - 1) * (r - 2) / 2;
    assert!(e < 128, "r = {r} too large");
    1u128 << e
}

/// All patterns counted by [`count_vanishing_level_patterns`], in
/// lexicographic order. Intended for small `r`.
pub fn vanishing_level_patterns(r: usize) -> Vec<Vec<usize>> {
    if r < 2 {
        return vec![];
    }
    let mut out = vec![vec![0usize]];
    for j in 2..=r {
        let cap = 1usize << (j - 2);
        out = out
            .into_iter()
            .flat_map(|p| {
                (1..=cap).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(count_vanishing_level_patterns(2), 1);
        assert_eq!(count_vanishing_level_patterns(4), 8);
        assert_eq!(count_vanishing_level_patterns(5), 64);
    }

    #[test]
    fn enumerator_agrees() {
        for r in 2..=6 {
            let p = vanishing_level_patterns(r);
            assert_eq!(p.len() as u128, count_vanishing_level_patterns(r));
            assert!(p.iter().all(|s| s[0] == 0 && s.len() == r));
            assert!(p.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

//! Factorials, binomial coefficients and small enumeration helpers.

use std::sync::OnceLock;

const PASCAL_ROWS: usize = 64;
const FACTORIAL_MAX: usize = 170;

fn pascal() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(PASCAL_ROWS);
        for n in 0..PASCAL_ROWS {
            let mut row = vec![1.0; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        rows
    })
}

fn factorials() -> &'static [f64; FACTORIAL_MAX + 1] {
    static TABLE: OnceLock<[f64; FACTORIAL_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; FACTORIAL_MAX + 1];
        for i in 1..=FACTORIAL_MAX {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

/// `n!` in double precision. Overflows to infinity above 170.
pub fn factorial(n: usize) -> f64 {
    factorials().get(n).copied().unwrap_or(f64::INFINITY)
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n < PASCAL_ROWS {
        return pascal()[n][k];
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Binomial law `C(m, l) μ^l (1-μ)^(m-l)`.
pub fn binomial_pmf(m: usize, l: usize, mu: f64) -> f64 {
    if l > m {
        return 0.0;
    }
    binomial(m, l) * mu.powi(l as i32) * (1.0 - mu).powi((m - l) as i32)
}

/// Cumulative binomial law `Σ_{l=0}^{upto} C(m, l) μ^l (1-μ)^(m-l)`.
pub fn binomial_cdf(m: usize, upto: usize, mu: f64) -> f64 {
    if upto >= m {
        return 1.0;
    }
    (0..=upto).map(|l| binomial_pmf(m, l, mu)).sum()
}

/// Stirling numbers of the second kind `S(l, j)` for `0 <= j <= l <= n`.
pub fn stirling2_table(n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n + 1]; n + 1];
    s[0][0] = 1.0;
    for l in 1..=n {
        for j in 1..=l {
            s[l][j] = j as f64 * s[l - 1][j] + s[l - 1][j - 1];
        }
    }
    s
}

/// All integer partitions of `total` into parts `>= min_part`, each listed in
/// descending order. Partitions come out grouped by largest part, ascending.
pub fn partitions(total: usize, min_part: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max_part: usize, min_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in min_part..=max_part.min(rest) {
            cur.push(part);
            rec(rest - part, part, min_part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, total, min_part.max(1), &mut Vec::new(), &mut out);
    // rec() yields parts in ascending-first order; flip each to descending.
    for p in &mut out {
        p.sort_unstable_by(|a, b| b.cmp(a));
    }
    out
}

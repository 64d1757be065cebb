//! Rank statistics used by the comparison experiments: Mann-Whitney U,
//! Wilcoxon signed-rank, and Spearman correlation, all with normal
//! approximations and midrank tie handling.

/// Average ranks (1-based) with ties sharing their midrank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = midrank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation coefficient.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        cov += (xi - mx) * (yi - my);
        vx += (xi - mx).powi(2);
        vy += (yi - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

/// One-sided Mann-Whitney test statistic for H1 "a tends smaller than b".
/// Returns a z-score; large positive values support the alternative.
pub fn mann_whitney_z(a: &[f64], b: &[f64]) -> f64 {
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let r = ranks(&pooled);
    let rank_sum_a: f64 = r[..a.len()].iter().sum();
    // U for "b exceeds a"
    let u = n1 * n2 + n1 * (n1 + 1.0) / 2.0 - rank_sum_a;
    let mean = n1 * n2 / 2.0;
    let n = n1 + n2;
    // tie correction
    let mut tie_term = 0.0;
    let mut sorted = pooled;
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 0.0;
    }
    (u - mean) / var.sqrt()
}

/// One-sided Wilcoxon signed-rank z for paired data, H1 "a tends smaller
/// than b". Large positive z supports the alternative.
pub fn wilcoxon_signed_rank_z(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return 0.0;
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let r = ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&r)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, rank)| rank)
        .sum();
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    // tie correction on |d|
    let mut tie_term = 0.0;
    let mut sorted = abs;
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 0.0;
    }
    // small W+ (a below b) maps to positive z
    (mean - w_plus) / var.sqrt()
}

/// One-sided critical z values.
pub const Z_ALPHA_05: f64 = 1.6449;
pub const Z_ALPHA_01: f64 = 2.3263;

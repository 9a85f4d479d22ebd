//! Small statistics used by the experiment summaries.

/// Least-squares nondecreasing fit (pool adjacent violators).
pub fn isotonic_nondecreasing(values: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat_n(m, w))
        .collect()
}

/// Number of adjacent pairs with `v[i + 1] < v[i] - slack`.
pub fn monotone_violations(values: &[f64], slack: f64) -> usize {
    values.windows(2).filter(|w| w[1] < w[0] - slack).count()
}

/// Mean of the central `keep` fraction of the sorted values, e.g. `keep =
/// 0.9` averages everything between the 5th and 95th percentiles.
pub fn trimmed_mean(values: &[f64], keep: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let drop = ((v.len() as f64) * (1.0 - keep) / 2.0).floor() as usize;
    let kept = &v[drop..v.len() - drop];
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Slope of the ordinary least-squares line through `(x, y)`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

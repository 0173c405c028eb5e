/// Median of `values`; the mean of the two middle values for even counts.
/// `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Largest relative gap, in percent, between any noisy median and the
/// noiseless one.
pub fn deviation_pct(ideal: f64, noisy: &[f64]) -> f64 {
    noisy.iter().map(|&x| (x - ideal).abs() / ideal * 100.0).fold(0.0, f64::max)
}

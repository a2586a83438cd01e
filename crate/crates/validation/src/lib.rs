//! Signal helpers for the acceptance run.

/// Times of local maxima of `series` after `t_min`, refined by a parabola
/// through the three samples around each peak.
pub fn peak_times(series: &[(f64, f64)], t_min: f64) -> Vec<f64> {
    series
        .windows(3)
        .filter(|w| w[0].0 >= t_min && w[1].1 > w[0].1 && w[1].1 >= w[2].1)
        .map(|w| {
            let (y0, y1, y2) = (w[0].1, w[1].1, w[2].1);
            let h = w[1].0 - w[0].0;
            let den = y0 - 2.0 * y1 + y2;
            if den == 0.0 {
                w[1].0
            } else {
                w[1].0 + 0.5 * h * (y0 - y2) / den
            }
        })
        .collect()
}

/// Angular frequency from the mean spacing of consecutive peaks; `None` with
/// fewer than three peaks.
pub fn peak_frequency(series: &[(f64, f64)], t_min: f64) -> Option<f64> {
    let p = peak_times(series, t_min);
    if p.len() < 3 {
        return None;
    }
    let period = (p[p.len() - 1] - p[0]) / (p.len() - 1) as f64;
    Some(2.0 * std::f64::consts::PI / period)
}

/// Peak-to-trough swing over each window of `width` after `t_min`.
pub fn swings(series: &[(f64, f64)], t_min: f64, width: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut start = t_min;
    let end = series.last().map_or(0.0, |s| s.0);
    while start + width <= end + 1e-12 {
        let (lo, hi) = series
            .iter()
            .filter(|s| s.0 >= start && s.0 < start + width)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.1), b.max(s.1)));
        out.push(hi - lo);
        start += width;
    }
    out
}

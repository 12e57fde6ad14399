//! Small sample-statistics helpers shared by diagnostics and pipelines.

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with denominator n-1.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn sample_std(x: &[f64]) -> f64 {
    sample_variance(x).sqrt()
}

/// Adjusted Fisher-Pearson skewness: g1 * sqrt(n(n-1)) / (n-2), where g1
/// uses biased central moments. Requires n >= 3.
pub fn skewness(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = mean(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    if m2 == 0.0 {
        return f64::NAN;
    }
    let g1 = m3 / m2.powf(1.5);
    g1 * (n * (n - 1.0)).sqrt() / (n - 2.0)
}

/// Pearson correlation of two equal-length series.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Number of tail observations at the given confidence: ceil((1-c) * n),
/// clamped to [1, n]. The small slack absorbs the binary representation of
/// the confidence (1 - 0.95 sits just above 0.05, which would otherwise
/// push ceil one bucket too far).
pub fn tail_count(n: usize, confidence: f64) -> usize {
    let q = (1.0 - confidence) * n as f64;
    let k = (q - 1e-9).ceil() as usize;
    k.clamp(1, n)
}

/// k-th smallest element (k >= 1) of a series.
pub fn kth_smallest(x: &[f64], k: usize) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in series"));
    sorted[k - 1]
}

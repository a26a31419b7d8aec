//! Small numerical helpers shared by the estimators.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`. A single point or
/// constant `x` gives slope 0 through the mean.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return LineFit { slope: 0.0, intercept: 0.0, rms_residual: 0.0 };
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    LineFit { slope, intercept, rms_residual: (sse / n).sqrt() }
}

/// Strictly decreasing with a constant ratio (relative tolerance 1e-6).
pub fn is_geometric(sorted_desc: &[f64]) -> bool {
    if sorted_desc.windows(2).any(|w| !(w[1] < w[0])) {
        return false;
    }
    if sorted_desc.len() < 3 {
        return true;
    }
    let q = sorted_desc[1] / sorted_desc[0];
    sorted_desc.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-6)
}

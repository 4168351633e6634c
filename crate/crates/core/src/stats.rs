//! Order-fixed reductions and small regression helpers.

/// Pairwise (tree) sum: the association order depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample moments by two passes over the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased variance.
    pub var: f64,
    pub m3: f64,
    pub m4: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    if n == 0 {
        return Moments { n, mean: f64::NAN, var: f64::NAN, m3: f64::NAN, m4: f64::NAN };
    }
    let nf = n as f64;
    // Shift by the first sample so that constant data has exactly zero spread.
    let x0 = xs[0];
    let mut buf: Vec<f64> = xs.iter().map(|x| x - x0).collect();
    let offset = pairwise_sum(&buf) / nf;
    let mean = x0 + offset;
    buf.iter_mut().zip(xs).for_each(|(b, x)| *b = (x - x0 - offset).powi(2));
    let s2 = pairwise_sum(&buf);
    buf.iter_mut().zip(xs).for_each(|(b, x)| *b = (x - x0 - offset).powi(3));
    let s3 = pairwise_sum(&buf);
    buf.iter_mut().zip(xs).for_each(|(b, x)| *b = (x - x0 - offset).powi(4));
    let s4 = pairwise_sum(&buf);
    let var = if n > 1 { s2 / (nf - 1.0) } else { 0.0 };
    Moments { n, mean, var, m3: s3 / nf, m4: s4 / nf }
}

impl Moments {
    pub fn se_mean(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the variance, `√((m4 − s⁴)/n)`.
    pub fn se_var(&self) -> f64 {
        ((self.m4 - self.var * self.var).max(0.0) / self.n as f64).sqrt()
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Root mean square of `a − b`.
pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (s / a.len() as f64).sqrt()
}

/// Sup distance between the empirical CDF of `sample` and a CDF given at
/// sorted `nodes`, interpolated linearly in between.
pub fn ks_distance(sample: &[f64], nodes: &[f64], cdf: &[f64]) -> f64 {
    let mut s: Vec<f64> = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let eval = |t: f64| -> f64 {
        match nodes.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => cdf[i],
            Err(0) => 0.0,
            Err(i) if i >= nodes.len() => cdf[nodes.len() - 1],
            Err(i) => {
                let w = (t - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
                cdf[i - 1] + w * (cdf[i] - cdf[i - 1])
            }
        }
    };
    s.iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = eval(t);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

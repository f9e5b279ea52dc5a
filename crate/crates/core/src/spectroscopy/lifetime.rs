//! Time-resolved decay traces and a binned single-exponential fit.

use super::{check_positive, check_unit, SpectroscopyError};
use crate::seed::rng;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Counts in bins `[i·w, (i+1)·w)` after excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub bin_width: f64,
    pub counts: Vec<f64>,
}

impl DecayTrace {
    /// Noiseless trace: exact bin probabilities times `total`.
    pub fn expected(components: &[DecayComponent], total: f64, bin_width: f64, bins: usize) -> Self {
        let norm: f64 = components.iter().map(|c| c.weight).sum();
        let counts = (0..bins)
            .map(|i| {
                let (t0, t1) = (i as f64 * bin_width, (i + 1) as f64 * bin_width);
                components
                    .iter()
                    .map(|c| total * c.weight / norm * ((-c.rate * t0).exp() - (-c.rate * t1).exp()))
                    .sum()
            })
            .collect();
        DecayTrace { bin_width, counts }
    }

    /// `t,counts` with bin starts.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,counts\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(s, "{},{}", i as f64 * self.bin_width, c);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayComponent {
    /// 1/ns
    pub rate: f64,
    pub weight: f64,
}

/// Histogram `photons` exponential delays drawn from the weighted mixture.
/// Delays past the last bin are dropped.
pub fn synthesize_decay(
    components: &[DecayComponent],
    photons: u64,
    bin_width: f64,
    bins: usize,
    seed: u64,
) -> Result<DecayTrace, SpectroscopyError> {
    check_positive("bin_width", bin_width)?;
    if photons == 0 || bins == 0 || components.is_empty() {
        return Err(SpectroscopyError::ZeroCounts);
    }
    let norm: f64 = components.iter().map(|c| c.weight).sum();
    check_positive("weight sum", norm)?;
    let mut dists = Vec::new();
    for c in components {
        check_positive("rate", c.rate)?;
        check_unit("weight share", c.weight / norm)?;
        dists.push((c.weight / norm, Exp::new(c.rate).expect("positive rate")));
    }
    let mut r = rng(seed);
    let mut counts = vec![0.0; bins];
    for _ in 0..photons {
        let mut u = r.random::<f64>();
        let mut pick = dists.len() - 1;
        for (k, (w, _)) in dists.iter().enumerate() {
            if u < *w {
                pick = k;
                break;
            }
            u -= w;
        }
        let t = dists[pick].1.sample(&mut r);
        let i = (t / bin_width) as usize;
        if i < bins {
            counts[i] += 1.0;
        }
    }
    Ok(DecayTrace { bin_width, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeFit {
    /// 1/ns
    pub rate: f64,
    pub std_error: f64,
    /// Pearson χ²/dof of the extrapolated single exponential over all bins
    /// expecting at least five counts.
    pub chi2_reduced: f64,
    /// `χ²_red` beyond `1 + 4√(2/dof)`: not a single exponential.
    pub non_exponential: bool,
    /// Dynamic range of the fitted tail window, decades.
    pub decades: f64,
}

/// Mean and variance of `j` under `P(j) ∝ q^j`, `j = 0..k`.
fn geometric_moments(q: f64, k: usize) -> (f64, f64) {
    let (mut s0, mut s1, mut s2, mut p) = (0.0, 0.0, 0.0, 1.0);
    for j in 0..k {
        let jf = j as f64;
        s0 += p;
        s1 += jf * p;
        s2 += jf * jf * p;
        p *= q;
    }
    let mean = s1 / s0;
    (mean, s2 / s0 - mean * mean)
}

/// Maximum-likelihood rate from the bins starting at `tail_start` (ns).
/// Within that window the binned exponential is a truncated geometric law,
/// whose mean fixes `q = e^{−λw}`; the standard error follows from its
/// Fisher information.
pub fn fit_lifetime(trace: &DecayTrace, tail_start: f64) -> Result<LifetimeFit, SpectroscopyError> {
    check_positive("bin_width", trace.bin_width)?;
    let w = trace.bin_width;
    let i0 = (tail_start.max(0.0) / w).ceil() as usize;
    if i0 + 2 > trace.counts.len() {
        return Err(SpectroscopyError::InsufficientRange(0.0));
    }
    let tail = &trace.counts[i0..];
    let k = tail.len();
    let n: f64 = tail.iter().sum();
    if !(n > 0.0) {
        return Err(SpectroscopyError::EmptySpectrum);
    }
    let mean = tail.iter().enumerate().map(|(j, c)| j as f64 * c).sum::<f64>() / n;
    if mean >= (k as f64 - 1.0) / 2.0 {
        return Err(SpectroscopyError::InsufficientRange(0.0));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if geometric_moments(mid, k).0 < mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let rate = -q.ln() / w;
    let decades = rate * k as f64 * w / std::f64::consts::LN_10;
    if decades < 2.0 {
        return Err(SpectroscopyError::InsufficientRange(decades));
    }
    let (_, var) = geometric_moments(q, k);
    let std_error = 1.0 / (w * (n * var).sqrt());

    // extrapolate over the whole trace with the amplitude fixed by the tail
    let tail_norm: f64 = (0..k).map(|j| q.powi(j as i32)).sum();
    let amp = n / tail_norm;
    let (mut chi2, mut used) = (0.0, 0usize);
    for (i, &c) in trace.counts.iter().enumerate() {
        let e = amp * q.powf(i as f64 - i0 as f64);
        if e >= 5.0 {
            chi2 += (c - e).powi(2) / e;
            used += 1;
        }
    }
    let dof = used.saturating_sub(2).max(1) as f64;
    let chi2_reduced = chi2 / dof;
    Ok(LifetimeFit {
        rate,
        std_error,
        chi2_reduced,
        non_exponential: chi2_reduced > 1.0 + 4.0 * (2.0 / dof).sqrt(),
        decades,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(rate: f64) -> [DecayComponent; 1] {
        [DecayComponent { rate, weight: 1.0 }]
    }

    #[test]
    fn noiseless_rate_is_exact() {
        let t = DecayTrace::expected(&single(1.0), 1e5, 0.05, 400);
        let f = fit_lifetime(&t, 0.5).unwrap();
        assert!((f.rate - 1.0).abs() < 1e-6, "{}", f.rate);
        assert!(f.chi2_reduced < 1e-12);
        assert!(!f.non_exponential);
    }

    #[test]
    fn sampled_rate_within_two_percent() {
        let t = synthesize_decay(&single(0.8), 100_000, 0.05, 300, 21).unwrap();
        let f = fit_lifetime(&t, 0.5).unwrap();
        assert!((f.rate - 0.8).abs() < 0.02, "{}", f.rate);
        assert!(f.std_error < 0.01);
        assert!(!f.non_exponential, "{}", f.chi2_reduced);
    }

    #[test]
    fn biexponential_flagged_with_dominant_rate() {
        let comps = [
            DecayComponent {
                rate: 0.8,
                weight: 0.9,
            },
            DecayComponent {
                rate: 3.0,
                weight: 0.1,
            },
        ];
        let t = synthesize_decay(&comps, 100_000, 0.05, 300, 22).unwrap();
        let f = fit_lifetime(&t, 2.0).unwrap();
        assert!(f.non_exponential, "{}", f.chi2_reduced);
        assert!((f.rate - 0.8).abs() / 0.8 < 0.05, "{}", f.rate);
    }

    #[test]
    fn short_trace_rejected() {
        // 1/ns decay over 2 ns is under one decade
        let t = DecayTrace::expected(&single(1.0), 1e5, 0.1, 20);
        assert!(matches!(
            fit_lifetime(&t, 0.0),
            Err(SpectroscopyError::InsufficientRange(_))
        ));
    }
}

//! Detector timestamp streams and pulsed second-order correlations.

use super::{check_positive, check_unit, SpectroscopyError};
use crate::seed::{derive_seed, rng};
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Where an emitter's photons go.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Beamsplitter sending a photon to detector A with this probability.
    Split(f64),
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamEmitter {
    /// 1/ns
    pub decay_rate: f64,
    /// Probability that a pulse yields a photon.
    pub excitation: f64,
    pub route: Route,
}

impl StreamEmitter {
    pub fn new(decay_rate: f64, route: Route) -> Self {
        StreamEmitter {
            decay_rate,
            excitation: 1.0,
            route,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// Dark counts per ns on each detector.
    pub dark_rate: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            efficiency: 1.0,
            dark_rate: 0.0,
        }
    }
}

/// Sorted arrival times (ns) on the two detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorStreams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub duration: f64,
}

fn dark_counts(rate: f64, duration: f64, seed: u64) -> Vec<f64> {
    if rate <= 0.0 {
        return Vec::new();
    }
    let mut r = rng(seed);
    let n = Poisson::new(rate * duration)
        .expect("positive mean")
        .sample(&mut r) as usize;
    (0..n).map(|_| r.random::<f64>() * duration).collect()
}

fn finish(mut a: Vec<f64>, mut b: Vec<f64>, duration: f64) -> DetectorStreams {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    DetectorStreams { a, b, duration }
}

/// Pulsed excitation: every pulse each emitter emits at most one photon,
/// delayed by an exponential with its decay rate. Emitter `k` draws from
/// `derive_seed(seed, k)`; dark counts use indices past the emitters.
pub fn simulate_photon_stream(
    emitters: &[StreamEmitter],
    pulse_rate_mhz: f64,
    pulses: u64,
    detector: &DetectorModel,
    seed: u64,
) -> Result<DetectorStreams, SpectroscopyError> {
    check_positive("pulse_rate", pulse_rate_mhz)?;
    check_unit("efficiency", detector.efficiency)?;
    if !(detector.dark_rate >= 0.0 && detector.dark_rate.is_finite()) {
        return Err(SpectroscopyError::InvalidParameter {
            name: "dark_rate",
            value: detector.dark_rate,
        });
    }
    let period = 1000.0 / pulse_rate_mhz;
    let duration = period * pulses as f64;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (k, e) in emitters.iter().enumerate() {
        check_positive("decay_rate", e.decay_rate)?;
        check_unit("excitation", e.excitation)?;
        if let Route::Split(p) = e.route {
            check_unit("split", p)?;
        }
        let mut r = rng(derive_seed(seed, k as u64));
        let exp = Exp::new(e.decay_rate).expect("positive rate");
        for n in 0..pulses {
            if r.random::<f64>() >= e.excitation {
                continue;
            }
            let t = n as f64 * period + exp.sample(&mut r);
            let to_a = match e.route {
                Route::Split(p) => r.random::<f64>() < p,
                Route::A => true,
                Route::B => false,
            };
            if r.random::<f64>() < detector.efficiency {
                if to_a {
                    a.push(t);
                } else {
                    b.push(t);
                }
            }
        }
    }
    let base = emitters.len() as u64;
    a.extend(dark_counts(detector.dark_rate, duration, derive_seed(seed, base)));
    b.extend(dark_counts(
        detector.dark_rate,
        duration,
        derive_seed(seed, base + 1),
    ));
    Ok(finish(a, b, duration))
}

/// Continuous Poissonian light at `rate` photons/ns split 50:50.
pub fn poisson_stream(rate: f64, duration: f64, seed: u64) -> Result<DetectorStreams, SpectroscopyError> {
    check_positive("rate", rate)?;
    check_positive("duration", duration)?;
    let mut r = rng(seed);
    let n = Poisson::new(rate * duration)
        .expect("positive mean")
        .sample(&mut r) as usize;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..n {
        let t = r.random::<f64>() * duration;
        if r.random::<bool>() {
            a.push(t);
        } else {
            b.push(t);
        }
    }
    Ok(finish(a, b, duration))
}

/// Histogram of `t_b − t_a` over `[−window, window)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    pub bin_width: f64,
    pub window: f64,
    pub counts: Vec<u64>,
}

impl CorrelationHistogram {
    pub fn tau(&self, i: usize) -> f64 {
        -self.window + (i as f64 + 0.5) * self.bin_width
    }

    /// Coincidences with delay in `[lo, hi)`, by bin center.
    pub fn area(&self, lo: f64, hi: f64) -> u64 {
        (0..self.counts.len())
            .filter(|&i| (lo..hi).contains(&self.tau(i)))
            .map(|i| self.counts[i])
            .sum()
    }

    /// `tau,counts`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,counts\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(s, "{},{}", self.tau(i), c);
        }
        s
    }
}

/// Start-stop pairs between two sorted streams, counted with a two-pointer
/// sweep.
pub fn correlate(
    a: &[f64],
    b: &[f64],
    bin_width: f64,
    window: f64,
) -> Result<CorrelationHistogram, SpectroscopyError> {
    check_positive("bin_width", bin_width)?;
    check_positive("window", window)?;
    if a.is_empty() || b.is_empty() {
        return Err(SpectroscopyError::EmptyStream);
    }
    let nbins = (2.0 * window / bin_width).round().max(1.0) as usize;
    let mut counts = vec![0u64; nbins];
    let mut lo = 0;
    for &ta in a {
        while lo < b.len() && b[lo] < ta - window {
            lo += 1;
        }
        for &tb in &b[lo..] {
            let tau = tb - ta;
            if tau >= window {
                break;
            }
            let i = ((tau + window) / bin_width) as usize;
            if i < nbins {
                counts[i] += 1;
            }
        }
    }
    Ok(CorrelationHistogram {
        bin_width,
        window,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Report {
    pub g2_zero: f64,
    pub zero_peak: u64,
    pub side_peak_mean: f64,
    pub side_peaks: usize,
    /// `g²(0) < 1/2`
    pub single_photon: bool,
}

/// Pulsed normalization: area of the zero-delay peak over the mean area of
/// the side peaks, each integrated over one period. Needs at least ten
/// complete side peaks.
pub fn g2_zero(hist: &CorrelationHistogram, period: f64) -> Result<G2Report, SpectroscopyError> {
    check_positive("period", period)?;
    let needed = 5.5 * period;
    if hist.window < needed - 1e-9 * period {
        return Err(SpectroscopyError::WindowTooShort {
            window: hist.window,
            needed,
        });
    }
    let peak = |k: i64| {
        let c = k as f64 * period;
        hist.area(c - period / 2.0, c + period / 2.0)
    };
    let kmax = ((hist.window + 1e-9 * period) / period - 0.5).floor() as i64;
    let sides: Vec<u64> = (1..=kmax).flat_map(|k| [peak(k), peak(-k)]).collect();
    let mean = sides.iter().sum::<u64>() as f64 / sides.len() as f64;
    if !(mean > 0.0) {
        return Err(SpectroscopyError::EmptyStream);
    }
    let zero = peak(0);
    let g2 = zero as f64 / mean;
    Ok(G2Report {
        g2_zero: g2,
        zero_peak: zero,
        side_peak_mean: mean,
        side_peaks: sides.len(),
        single_photon: g2 < 0.5,
    })
}

/// One timestamp per line.
pub fn timestamps_to_text(t: &[f64]) -> String {
    let mut s = String::with_capacity(t.len() * 16);
    for v in t {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn read_timestamps(text: &str) -> Result<Vec<f64>, SpectroscopyError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|e| SpectroscopyError::Parse {
            line: n + 1,
            msg: format!("{e}"),
        })?;
        if !v.is_finite() {
            return Err(SpectroscopyError::Parse {
                line: n + 1,
                msg: "non-finite timestamp".into(),
            });
        }
        out.push(v);
    }
    if out.windows(2).any(|w| w[1] < w[0]) {
        out.sort_by(f64::total_cmp);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PERIOD: f64 = 1000.0 / 76.0;

    #[test]
    fn one_photon_per_pulse_at_unit_efficiency() {
        let e = StreamEmitter::new(0.8, Route::Split(0.5));
        let s = simulate_photon_stream(&[e], 76.0, 20_000, &DetectorModel::default(), 1).unwrap();
        assert_eq!(s.a.len() + s.b.len(), 20_000);
        let mut all: Vec<f64> = s.a.iter().chain(&s.b).copied().collect();
        all.sort_by(f64::total_cmp);
        let mean_delay: f64 =
            all.iter().map(|t| t - (t / PERIOD).floor() * PERIOD).sum::<f64>() / all.len() as f64;
        // 1/0.8 ns; the 13 ns period clips ~3e-5 of the tail
        assert!((mean_delay - 1.25).abs() < 0.03, "{mean_delay}");
    }

    #[test]
    fn zero_efficiency_is_empty() {
        let e = StreamEmitter::new(0.8, Route::Split(0.5));
        let d = DetectorModel {
            efficiency: 0.0,
            dark_rate: 0.0,
        };
        let s = simulate_photon_stream(&[e], 76.0, 1000, &d, 1).unwrap();
        assert!(s.a.is_empty() && s.b.is_empty());
    }

    #[test]
    fn single_emitter_antibunches() {
        let e = StreamEmitter::new(0.8, Route::Split(0.5));
        let s = simulate_photon_stream(&[e], 76.0, 100_000, &DetectorModel::default(), 5).unwrap();
        let h = correlate(&s.a, &s.b, 0.1, 12.0 * PERIOD).unwrap();
        let g = g2_zero(&h, PERIOD).unwrap();
        // only neighbouring pulses whose delays differ by more than T/2 land here
        assert!(g.g2_zero < 0.02, "{}", g.g2_zero);
        assert!(g.single_photon);
        assert_eq!(g.side_peaks, 22);
    }

    #[test]
    fn independent_emitters_are_uncorrelated() {
        let a = StreamEmitter {
            excitation: 0.5,
            ..StreamEmitter::new(0.8, Route::A)
        };
        let b = StreamEmitter {
            excitation: 0.5,
            ..StreamEmitter::new(1.1, Route::B)
        };
        let s = simulate_photon_stream(&[a, b], 76.0, 100_000, &DetectorModel::default(), 9).unwrap();
        let h = correlate(&s.a, &s.b, 0.1, 12.0 * PERIOD).unwrap();
        let g = g2_zero(&h, PERIOD).unwrap();
        assert!((g.g2_zero - 1.0).abs() < 0.1, "{}", g.g2_zero);
    }

    #[test]
    fn poisson_light_is_flat() {
        let s = poisson_stream(0.05, 2.0e6, 4).unwrap();
        let h = correlate(&s.a, &s.b, 1.0, 12.0 * PERIOD).unwrap();
        let g = g2_zero(&h, PERIOD).unwrap();
        assert!((g.g2_zero - 1.0).abs() < 0.05, "{}", g.g2_zero);
    }

    #[test]
    fn short_window_rejected() {
        let h = correlate(&[0.0, 1.0], &[0.5], 0.1, PERIOD / 2.0).unwrap();
        assert!(matches!(
            g2_zero(&h, PERIOD),
            Err(SpectroscopyError::WindowTooShort { .. })
        ));
        assert_eq!(
            correlate(&[], &[1.0], 0.1, 1.0).unwrap_err(),
            SpectroscopyError::EmptyStream
        );
    }

    #[test]
    fn correlate_matches_brute_force() {
        let a = [0.3, 2.0, 2.5, 9.9];
        let b = [0.1, 1.7, 2.2, 5.0, 11.0];
        let h = correlate(&a, &b, 0.5, 4.0).unwrap();
        let mut brute = vec![0u64; 16];
        for ta in a {
            for tb in b {
                let tau: f64 = tb - ta;
                if (-4.0..4.0).contains(&tau) {
                    brute[((tau + 4.0) / 0.5) as usize] += 1;
                }
            }
        }
        assert_eq!(h.counts, brute);
    }

    #[test]
    fn timestamp_text_round_trip() {
        let t = vec![0.125, 13.157894736842104, 1e6 + 0.1];
        assert_eq!(read_timestamps(&timestamps_to_text(&t)).unwrap(), t);
        assert!(matches!(
            read_timestamps("1.0\nabc\n"),
            Err(SpectroscopyError::Parse { line: 2, .. })
        ));
    }
}

use crate::config::{G2Config, Source};
use crate::error::{config, CliError};
use crate::output::Outputs;
use chiral_core::spectroscopy::{
    correlate, fit_lifetime, g2_zero, poisson_stream, read_timestamps, simulate_photon_stream,
    timestamps_to_text, DecayTrace, DetectorModel, DetectorStreams, G2Report, LifetimeFit, Route,
    StreamEmitter,
};
use serde::Serialize;

#[derive(Serialize)]
struct Report {
    source: Source,
    period_ns: f64,
    counts_a: usize,
    counts_b: usize,
    #[serde(flatten)]
    g2: G2Report,
    verdict: &'static str,
    lifetime: Option<LifetimeFit>,
}

fn read(path: &str) -> Result<Vec<f64>, CliError> {
    if path.is_empty() {
        return Err(config("source = \"files\" needs timestamps_a and timestamps_b"));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
    let mut t = read_timestamps(&text).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
    t.sort_by(f64::total_cmp);
    Ok(t)
}

fn streams(cfg: &G2Config) -> Result<DetectorStreams, CliError> {
    let detector = DetectorModel {
        efficiency: cfg.efficiency,
        dark_rate: cfg.dark_rate,
    };
    let emitter = |route| StreamEmitter {
        decay_rate: cfg.decay_rate,
        excitation: cfg.excitation,
        route,
    };
    let s = match cfg.source {
        Source::Single => simulate_photon_stream(
            &[emitter(Route::Split(cfg.split))],
            cfg.pulse_rate_mhz,
            cfg.pulses,
            &detector,
            cfg.seed,
        )?,
        Source::Pair => simulate_photon_stream(
            &[emitter(Route::A), emitter(Route::B)],
            cfg.pulse_rate_mhz,
            cfg.pulses,
            &detector,
            cfg.seed,
        )?,
        Source::Poisson => poisson_stream(cfg.poisson_rate, cfg.poisson_duration, cfg.seed)?,
        Source::Files => {
            let (a, b) = (read(&cfg.timestamps_a)?, read(&cfg.timestamps_b)?);
            let duration = a
                .last()
                .copied()
                .unwrap_or(0.0)
                .max(b.last().copied().unwrap_or(0.0));
            DetectorStreams { a, b, duration }
        }
    };
    Ok(s)
}

/// Arrival times folded onto one pulse period, both detectors together.
fn decay_trace(s: &DetectorStreams, period: f64, bin: f64) -> DecayTrace {
    let bins = (period / bin).floor().max(1.0) as usize;
    let mut counts = vec![0.0; bins];
    for &t in s.a.iter().chain(&s.b) {
        let i = (t.rem_euclid(period) / bin) as usize;
        if i < bins {
            counts[i] += 1.0;
        }
    }
    DecayTrace {
        bin_width: bin,
        counts,
    }
}

pub fn run(cfg: &G2Config) -> Result<(Outputs, String), CliError> {
    if !(cfg.pulse_rate_mhz > 0.0) {
        return Err(config("pulse_rate_mhz must be positive"));
    }
    let period = 1000.0 / cfg.pulse_rate_mhz;
    let s = streams(cfg)?;
    let hist = correlate(&s.a, &s.b, cfg.bin_width, cfg.window_periods * period)?;
    let g2 = g2_zero(&hist, period)?;
    let pulsed = matches!(cfg.source, Source::Single | Source::Pair);
    let lifetime = if cfg.fit_lifetime && pulsed {
        Some(fit_lifetime(
            &decay_trace(&s, period, cfg.lifetime_bin),
            cfg.lifetime_tail_start,
        )?)
    } else {
        None
    };

    let mut out = Outputs::default();
    out.text("g2_histogram.csv", hist.to_csv());
    out.json(
        "g2_report.json",
        &Report {
            source: cfg.source,
            period_ns: period,
            counts_a: s.a.len(),
            counts_b: s.b.len(),
            g2,
            verdict: if g2.single_photon {
                "single-photon"
            } else {
                "not single-photon"
            },
            lifetime,
        },
    )?;
    if cfg.write_timestamps && cfg.source != Source::Files {
        out.text("timestamps_a.txt", timestamps_to_text(&s.a));
        out.text("timestamps_b.txt", timestamps_to_text(&s.b));
    }
    let mut line = format!("g2(0) = {:.4} over {} side peaks", g2.g2_zero, g2.side_peaks);
    if let Some(l) = lifetime {
        line += &format!(", decay rate {:.4} ± {:.4} 1/ns", l.rate, l.std_error);
    }
    Ok((out, line))
}

use serde::{Deserialize, Serialize};

use super::{require, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s < 0.0 {
            Polarity::Negative
        } else {
            Polarity::Positive
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// Trapezoidal drive pulse: linear rise, flat hold, linear fall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseWaveform {
    /// Peak current magnitude (A).
    pub peak_current: f64,
    /// Rise and fall edge width (s).
    pub rise_time: f64,
    /// Flat-top duration (s).
    pub hold_time: f64,
    /// Repetition period of positive pulses (s).
    pub period_positive: f64,
    /// Repetition period of negative pulses (s).
    pub period_negative: f64,
    pub polarity: Polarity,
}

impl PulseWaveform {
    pub fn new(
        peak_current: f64,
        rise_time: f64,
        hold_time: f64,
        period_positive: f64,
        period_negative: f64,
        polarity: Polarity,
    ) -> Result<Self> {
        let w = Self {
            peak_current,
            rise_time,
            hold_time,
            period_positive,
            period_negative,
            polarity,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.rise_time > 0.0 && self.rise_time.is_finite(), || {
            format!("rise time must be positive, got {}", self.rise_time)
        })?;
        require(self.hold_time >= 0.0 && self.hold_time.is_finite(), || {
            format!("hold time must be non-negative, got {}", self.hold_time)
        })?;
        require(self.peak_current >= 0.0 && self.peak_current.is_finite(), || {
            format!("peak current must be non-negative, got {}", self.peak_current)
        })?;
        require(self.period_positive > 0.0 && self.period_negative > 0.0, || {
            "pulse periods must be positive".into()
        })?;
        Ok(())
    }

    /// Default drive pulse: 10 µs edges, 0.4 ms hold, 0.4 ms periods.
    pub fn standard(peak_current: f64, polarity: Polarity) -> Self {
        Self {
            peak_current: peak_current.abs(),
            rise_time: 1.0e-5,
            hold_time: 4.0e-4,
            period_positive: 4.0e-4,
            period_negative: 4.0e-4,
            polarity,
        }
    }

    pub fn with_peak(mut self, peak_current: f64) -> Self {
        self.peak_current = peak_current.abs();
        self
    }

    /// Total pulse width: two edges plus the hold.
    pub fn duration(&self) -> f64 {
        2.0 * self.rise_time + self.hold_time
    }

    /// Signed current at time `t` after the pulse start.
    pub fn current_at(&self, t: f64) -> f64 {
        let i = self.peak_current * self.polarity.sign();
        let r = self.rise_time;
        let h = self.hold_time;
        if t <= 0.0 || t >= 2.0 * r + h {
            0.0
        } else if t < r {
            i * t / r
        } else if t <= r + h {
            i
        } else {
            i * (2.0 * r + h - t) / r
        }
    }

    /// Samples (t, I) covering the pulse with spacing at most `time_step`;
    /// the trapezoid corners are always included.
    pub fn samples(&self, time_step: f64) -> Vec<(f64, f64)> {
        let i = self.peak_current * self.polarity.sign();
        let r = self.rise_time;
        let h = self.hold_time;
        let corners = [(0.0, 0.0), (r, i), (r + h, i), (2.0 * r + h, 0.0)];
        let mut out = vec![corners[0]];
        for w in corners.windows(2) {
            let (t0, i0) = w[0];
            let (t1, i1) = w[1];
            let span = t1 - t0;
            if span <= 0.0 {
                continue;
            }
            let n = (span / time_step).ceil().max(1.0) as usize;
            for j in 1..=n {
                let f = j as f64 / n as f64;
                let cur = if j == n { i1 } else { i0 + (i1 - i0) * f };
                out.push((t0 + span * f, cur));
            }
        }
        out
    }
}

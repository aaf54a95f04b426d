use std::fmt::Write as _;

use super::SpectrumError;

/// Annealing curves `A(s)` (driver) and `B(s)` (problem) in GHz, sampled at
/// strictly increasing `s` from 0 to 1 and interpolated piecewise linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    points: Vec<(f64, f64, f64)>,
}

impl AnnealSchedule {
    pub fn new(points: Vec<(f64, f64, f64)>) -> Result<Self, SpectrumError> {
        let bad = |msg: String| Err(SpectrumError::InvalidSchedule(msg));
        if points.len() < 2 {
            return bad("need at least two points".into());
        }
        if points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
            return bad("s must run from 0 to 1".into());
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad(format!("s not strictly increasing at {}", w[1].0));
            }
        }
        for &(s, a, b) in &points {
            if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
                return bad(format!("negative or non-finite energy at s = {s}"));
            }
        }
        Ok(Self { points })
    }

    /// `A(s) = a0 (1 - s)`, `B(s) = b0 s`.
    pub fn linear(a0: f64, b0: f64) -> Result<Self, SpectrumError> {
        Self::new(vec![(0.0, a0, 0.0), (1.0, 0.0, b0)])
    }

    pub fn points(&self) -> &[(f64, f64, f64)] {
        &self.points
    }

    /// `(A(s), B(s))`; `s` is clamped to `[0, 1]`.
    pub fn at(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let idx = self.points.partition_point(|p| p.0 <= s).clamp(1, self.points.len() - 1);
        let (s0, a0, b0) = self.points[idx - 1];
        let (s1, a1, b1) = self.points[idx];
        let w = (s - s0) / (s1 - s0);
        (a0 + w * (a1 - a0), b0 + w * (b1 - b0))
    }

    /// Largest `|dA/ds|` and `|dB/ds|` over the segments.
    pub fn max_slopes(&self) -> (f64, f64) {
        self.points.windows(2).fold((0.0f64, 0.0f64), |(da, db), w| {
            let ds = w[1].0 - w[0].0;
            (da.max(((w[1].1 - w[0].1) / ds).abs()), db.max(((w[1].2 - w[0].2) / ds).abs()))
        })
    }

    /// CSV with header `s,A_GHz,B_GHz`.
    pub fn from_csv(text: &str) -> Result<Self, SpectrumError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim().replace(' ', "") == "s,A_GHz,B_GHz" => {}
            _ => return Err(SpectrumError::InvalidSchedule("expected header `s,A_GHz,B_GHz`".into())),
        }
        let mut points = Vec::new();
        for (idx, line) in lines {
            let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            match fields.as_deref() {
                Ok([s, a, b]) => points.push((*s, *a, *b)),
                _ => return Err(SpectrumError::InvalidSchedule(format!("line {}: {line:?}", idx + 1))),
            }
        }
        Self::new(points)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,A_GHz,B_GHz\n");
        for &(s, a, b) in &self.points {
            let _ = writeln!(out, "{s},{a},{b}");
        }
        out
    }
}

impl Default for AnnealSchedule {
    /// Linear ramps with `A(0) = B(1) = 10` GHz.
    fn default() -> Self {
        Self::linear(10.0, 10.0).expect("valid default schedule")
    }
}

//! Smoothing and differentiation of centrality sequences.
//!
//! Raw centrality series are spiky (the degree series is integer-valued), so
//! derivatives come from a moving local least-squares polynomial fit: at each
//! frame a polynomial of the configured degree is fitted to the window
//! centered there and its analytic first and second derivatives are read off
//! at the center. Windows shrink one-sidedly at the boundaries; the first and
//! last `poly_degree` frames are treated as low-confidence and excluded from
//! argmax and extremum searches by default.
//!
//! SLE (style likelihood) is the magnitude of the first derivative per
//! second; SIE (style intensity) the magnitude of the second derivative per
//! second squared.

use crate::error::{Error, Result};

/// A smoothed sequence with per-second first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSeries {
    start_frame: u64,
    values: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    window: usize,
    poly_degree: usize,
    frame_rate_hz: f64,
}

/// A local minimum or maximum of the underlying (smoothed) series.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePoint {
    pub frame: u64,
    pub kind: ExtremumKind,
    /// Largest SLE gap within the epsilon-ball around the point; zero for
    /// flat stretches, positive for genuine oscillation extrema.
    pub sharpness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

/// Fits a polynomial of degree `degree` to (x, y) samples by least squares
/// and returns its coefficients (constant term first). Normal equations
/// solved by Gaussian elimination with partial pivoting; the x values here
/// are small centered frame offsets, so conditioning is benign.
fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let m = degree + 1;
    let mut moments = vec![0.0; 2 * degree + 1];
    let mut rhs = vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut xp = 1.0;
        for k in 0..=2 * degree {
            moments[k] += xp;
            if k < m {
                rhs[k] += xp * y;
            }
            xp *= x;
        }
    }
    let mut a = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            a[r * m + c] = moments[r + c];
        }
    }
    // solve a * coeffs = rhs
    let mut coeffs = rhs;
    for col in 0..m {
        let mut pivot = col;
        for r in (col + 1)..m {
            if a[r * m + col].abs() > a[pivot * m + col].abs() {
                pivot = r;
            }
        }
        if pivot != col {
            for c in 0..m {
                a.swap(col * m + c, pivot * m + c);
            }
            coeffs.swap(col, pivot);
        }
        let diag = a[col * m + col];
        if diag == 0.0 {
            continue;
        }
        for r in (col + 1)..m {
            let factor = a[r * m + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for c in col..m {
                a[r * m + c] -= factor * a[col * m + c];
            }
            coeffs[r] -= factor * coeffs[col];
        }
    }
    for col in (0..m).rev() {
        let diag = a[col * m + col];
        if diag == 0.0 {
            coeffs[col] = 0.0;
            continue;
        }
        let mut v = coeffs[col];
        for c in (col + 1)..m {
            v -= a[col * m + c] * coeffs[c];
        }
        coeffs[col] = v / diag;
    }
    coeffs
}

/// Smooths `values` and computes per-second derivatives by local polynomial
/// fits. `window` must be odd and at least `poly_degree + 2`; the sequence
/// must be at least one window long.
pub fn smooth_and_differentiate(
    values: &[f64],
    start_frame: u64,
    window: usize,
    poly_degree: usize,
    frame_rate_hz: f64,
) -> Result<SmoothedSeries> {
    if window % 2 == 0 {
        return Err(Error::Parameter(format!("window must be odd, got {window}")));
    }
    if window < poly_degree + 2 {
        return Err(Error::Parameter(format!(
            "window ({window}) must be at least poly_degree + 2 ({})",
            poly_degree + 2
        )));
    }
    if !(frame_rate_hz > 0.0) {
        return Err(Error::Parameter(format!(
            "frame_rate_hz must be positive, got {frame_rate_hz}"
        )));
    }
    let n = values.len();
    if n < window {
        return Err(Error::SeriesTooShort { len: n, window });
    }
    let half = window / 2;
    let mut fitted = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let mut xs: Vec<f64> = Vec::with_capacity(window);
    for t in 0..n {
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(n - 1);
        let pts = hi - lo + 1;
        let degree = poly_degree.min(pts - 1);
        xs.clear();
        for i in lo..=hi {
            xs.push(i as f64 - t as f64);
        }
        let coeffs = polyfit(&xs, &values[lo..=hi], degree);
        fitted[t] = coeffs[0];
        let per_frame_d1 = coeffs.get(1).copied().unwrap_or(0.0);
        let per_frame_d2 = coeffs.get(2).copied().unwrap_or(0.0) * 2.0;
        d1[t] = per_frame_d1 * frame_rate_hz;
        d2[t] = per_frame_d2 * frame_rate_hz * frame_rate_hz;
    }
    Ok(SmoothedSeries {
        start_frame,
        values: fitted,
        d1,
        d2,
        window,
        poly_degree,
        frame_rate_hz,
    })
}

impl SmoothedSeries {
    pub fn start_frame(&self) -> u64 {
        self.start_frame
    }

    pub fn end_frame(&self) -> u64 {
        self.start_frame + self.values.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn poly_degree(&self) -> usize {
        self.poly_degree
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.frame_rate_hz
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    /// Style likelihood estimate per frame: |d1|.
    pub fn sle(&self) -> Vec<f64> {
        self.d1.iter().map(|v| v.abs()).collect()
    }

    /// Style intensity estimate per frame: |d2|.
    pub fn sie(&self) -> Vec<f64> {
        self.d2.iter().map(|v| v.abs()).collect()
    }

    pub fn sle_at(&self, frame: u64) -> Option<f64> {
        self.index_of(frame).map(|i| self.d1[i].abs())
    }

    pub fn sie_at(&self, frame: u64) -> Option<f64> {
        self.index_of(frame).map(|i| self.d2[i].abs())
    }

    fn index_of(&self, frame: u64) -> Option<usize> {
        if frame < self.start_frame {
            return None;
        }
        let i = (frame - self.start_frame) as usize;
        (i < self.values.len()).then_some(i)
    }

    /// Range of full-confidence indices: the first and last `poly_degree`
    /// frames use strongly truncated windows and are excluded.
    fn interior(&self) -> std::ops::Range<usize> {
        let n = self.values.len();
        let margin = self.poly_degree.min(n.saturating_sub(1) / 2);
        margin..(n - margin)
    }

    /// Frame of maximum SLE within `[t_a, t_b]` (absolute frames), ties
    /// broken by the earliest frame. Boundary low-confidence frames are
    /// excluded unless the interval contains nothing else.
    pub fn argmax_sle(&self, t_a: u64, t_b: u64) -> Result<u64> {
        if t_b < t_a || t_b < self.start_frame || t_a > self.end_frame() {
            return Err(Error::Parameter(format!(
                "interval [{t_a}, {t_b}] outside series range [{}, {}]",
                self.start_frame,
                self.end_frame()
            )));
        }
        let lo = (t_a.max(self.start_frame) - self.start_frame) as usize;
        let hi = (t_b.min(self.end_frame()) - self.start_frame) as usize;
        let interior = self.interior();
        let (mut lo_eff, mut hi_eff) = (lo.max(interior.start), hi.min(interior.end.saturating_sub(1)));
        if lo_eff > hi_eff {
            lo_eff = lo;
            hi_eff = hi;
        }
        let mut best = lo_eff;
        for i in lo_eff..=hi_eff {
            if self.d1[i].abs() > self.d1[best].abs() {
                best = i;
            }
        }
        Ok(self.start_frame + best as u64)
    }

    /// Maximum SLE over the interior frames.
    pub fn sle_max(&self) -> (u64, f64) {
        let interior = self.interior();
        let mut best = interior.start;
        for i in interior.clone() {
            if self.d1[i].abs() > self.d1[best].abs() {
                best = i;
            }
        }
        (self.start_frame + best as u64, self.d1[best].abs())
    }

    /// Locates local extrema of the smoothed series: frames where the first
    /// derivative changes sign. Values with |d1| <= zero_tol count as zero;
    /// the extremum frame is the frame of smallest |d1| within the crossing
    /// (earliest on ties).
    ///
    /// Sharpness is the smaller of the two one-sided SLE gaps over the
    /// epsilon-neighborhood: a genuine oscillation extremum has SLE rising
    /// on both sides, while the tiny derivative undershoot at the foot of a
    /// monotone step rises on one side only and scores near zero. Points
    /// with sharpness <= zero_tol are dropped, which also excludes constant
    /// stretches.
    pub fn find_extreme_points(&self, epsilon: usize, zero_tol: f64) -> Result<Vec<ExtremePoint>> {
        if epsilon == 0 {
            return Err(Error::Parameter("epsilon must be at least 1 frame".into()));
        }
        if zero_tol < 0.0 {
            return Err(Error::Parameter(format!(
                "zero_tol must be non-negative, got {zero_tol}"
            )));
        }
        let interior = self.interior();
        let signed: Vec<(usize, i8)> = interior
            .clone()
            .filter_map(|i| {
                let v = self.d1[i];
                if v.abs() <= zero_tol {
                    None
                } else {
                    Some((i, if v > 0.0 { 1 } else { -1 }))
                }
            })
            .collect();
        let mut points = Vec::new();
        for pair in signed.windows(2) {
            let (i1, s1) = pair[0];
            let (i2, s2) = pair[1];
            if s1 == s2 {
                continue;
            }
            // extremum sits where |d1| is smallest between the signed frames
            let mut at = i1;
            for i in i1..=i2 {
                if self.d1[i].abs() < self.d1[at].abs() {
                    at = i;
                }
            }
            let kind = if s1 > 0 { ExtremumKind::Maximum } else { ExtremumKind::Minimum };
            let lo = at.saturating_sub(epsilon);
            let hi = (at + epsilon).min(self.values.len() - 1);
            let here = self.d1[at].abs();
            let mut left_max = here;
            for i in lo..=at {
                left_max = left_max.max(self.d1[i].abs());
            }
            let mut right_max = here;
            for i in at..=hi {
                right_max = right_max.max(self.d1[i].abs());
            }
            let sharpness = (left_max - here).min(right_max - here);
            if sharpness > zero_tol {
                points.push(ExtremePoint { frame: self.start_frame + at as u64, kind, sharpness });
            }
        }
        Ok(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth(values: &[f64], fps: f64) -> SmoothedSeries {
        smooth_and_differentiate(values, 0, 11, 3, fps).unwrap()
    }

    #[test]
    fn linear_input_exact_first_derivative() {
        // v(t) = 3 * (t seconds) sampled at 10 Hz
        let fps = 10.0;
        let values: Vec<f64> = (0..40).map(|t| 3.0 * t as f64 / fps).collect();
        let s = smooth(&values, fps);
        for i in 0..s.len() {
            assert!((s.d1()[i] - 3.0).abs() < 1e-9, "d1[{i}] = {}", s.d1()[i]);
            assert!(s.d2()[i].abs() < 1e-9, "d2[{i}] = {}", s.d2()[i]);
        }
    }

    #[test]
    fn constant_input_zero_derivatives() {
        let values = vec![7.5; 30];
        let s = smooth(&values, 10.0);
        assert!(s.d1().iter().all(|v| v.abs() < 1e-12));
        assert!(s.d2().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn quadratic_input_exact_second_derivative() {
        // v(t) = t^2 in frame units at 1 Hz so seconds == frames
        let values: Vec<f64> = (0..50).map(|t| (t as f64).powi(2)).collect();
        let s = smooth(&values, 1.0);
        for i in 3..s.len() - 3 {
            assert!((s.d2()[i] - 2.0).abs() < 1e-8, "d2[{i}] = {}", s.d2()[i]);
            let central = (values[i + 1] - values[i - 1]) / 2.0;
            assert!((s.d1()[i] - central).abs() < 1e-6);
        }
    }

    #[test]
    fn cubic_reproduced_exactly_interior() {
        let values: Vec<f64> =
            (0..60).map(|t| (0.5 * t as f64).powi(3) - 2.0 * t as f64 + 1.0).collect();
        let s = smooth_and_differentiate(&values, 0, 11, 3, 1.0).unwrap();
        for i in 5..55 {
            let t = i as f64;
            let expect_d1 = 3.0 * 0.125 * t * t - 2.0;
            let expect_d2 = 6.0 * 0.125 * t;
            assert!((s.d1()[i] - expect_d1).abs() < 1e-6 * expect_d1.abs().max(1.0));
            assert!((s.d2()[i] - expect_d2).abs() < 1e-6 * expect_d2.abs().max(1.0));
        }
    }

    #[test]
    fn short_series_rejected() {
        let err = smooth_and_differentiate(&[1.0; 5], 0, 11, 3, 10.0).unwrap_err();
        assert!(matches!(err, Error::SeriesTooShort { .. }));
    }

    #[test]
    fn even_window_rejected() {
        let err = smooth_and_differentiate(&[1.0; 30], 0, 10, 3, 10.0).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn sle_sie_are_magnitudes() {
        let fps = 10.0;
        let values: Vec<f64> = (0..40).map(|t| -3.0 * t as f64 / fps).collect();
        let s = smooth(&values, fps);
        assert!(s.sle().iter().all(|&v| (v - 3.0).abs() < 1e-9));
        assert!(s.sie().iter().all(|&v| v < 1e-9));
    }

    #[test]
    fn constant_series_has_no_extreme_points() {
        let s = smooth(&[2.0; 40], 10.0);
        assert!(s.find_extreme_points(5, 1e-3).unwrap().is_empty());
    }

    #[test]
    fn single_parabola_one_maximum() {
        let values: Vec<f64> = (0..41).map(|t| {
            let x = t as f64 - 20.0;
            100.0 - x * x
        }).collect();
        let s = smooth(&values, 1.0);
        let pts = s.find_extreme_points(5, 1e-3).unwrap();
        assert_eq!(pts.len(), 1, "{pts:?}");
        assert_eq!(pts[0].frame, 20);
        assert_eq!(pts[0].kind, ExtremumKind::Maximum);
        assert!(pts[0].sharpness > 0.0);
    }

    #[test]
    fn negated_series_swaps_extremum_kinds() {
        let values: Vec<f64> =
            (0..120).map(|t| (2.0 * std::f64::consts::PI * t as f64 / 40.0).sin()).collect();
        let neg: Vec<f64> = values.iter().map(|v| -v).collect();
        let s = smooth(&values, 10.0);
        let sn = smooth(&neg, 10.0);
        let p = s.find_extreme_points(5, 1e-3).unwrap();
        let pn = sn.find_extreme_points(5, 1e-3).unwrap();
        assert_eq!(p.len(), pn.len());
        for (a, b) in p.iter().zip(&pn) {
            assert_eq!(a.frame, b.frame);
            assert_ne!(a.kind, b.kind);
        }
    }

    #[test]
    fn sinusoid_extrema_near_true_peaks() {
        let period = 40.0;
        let values: Vec<f64> =
            (0..200).map(|t| (2.0 * std::f64::consts::PI * t as f64 / period).sin()).collect();
        let s = smooth(&values, 10.0);
        let pts = s.find_extreme_points(5, 1e-3).unwrap();
        assert!(pts.len() >= 5, "found {}", pts.len());
        for p in &pts {
            // true extrema at 10 + 20k frames
            let nearest = ((p.frame as f64 - 10.0) / 20.0).round() * 20.0 + 10.0;
            assert!(
                (p.frame as f64 - nearest).abs() <= 3.0,
                "extremum at {} too far from {}",
                p.frame,
                nearest
            );
        }
    }

    #[test]
    fn sle_invariant_to_constant_shift() {
        let values: Vec<f64> =
            (0..80).map(|t| (t as f64 * 0.17).sin() * 2.0).collect();
        let shifted: Vec<f64> = values.iter().map(|v| v + 42.0).collect();
        let a = smooth(&values, 10.0);
        let b = smooth(&shifted, 10.0);
        for i in 0..a.len() {
            assert!((a.d1()[i] - b.d1()[i]).abs() < 1e-9);
            assert!((a.d2()[i] - b.d2()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn per_second_derivative_scales_with_frame_rate() {
        // same per-frame data: halving the frame rate halves the per-second d1
        let values: Vec<f64> = (0..40).map(|t| 0.3 * t as f64).collect();
        let fast = smooth(&values, 10.0);
        let slow = smooth(&values, 5.0);
        for i in 5..35 {
            assert!((fast.d1()[i] - 2.0 * slow.d1()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn argmax_monotone_increasing_hits_interval_end() {
        let values: Vec<f64> = (0..40).map(|t| (t as f64 / 10.0).powi(2)).collect();
        let s = smooth(&values, 10.0);
        // |d1| grows with t; interior ends at frame 36
        assert_eq!(s.argmax_sle(5, 36).unwrap(), 36);
    }

    #[test]
    fn argmax_constant_ties_break_earliest() {
        let values: Vec<f64> = (0..40).map(|t| 3.0 * t as f64).collect();
        let s = smooth(&values, 10.0);
        assert_eq!(s.argmax_sle(8, 20).unwrap(), 8);
    }

    #[test]
    fn argmax_empty_interval_is_error() {
        let s = smooth(&[1.0; 20], 10.0);
        assert!(s.argmax_sle(15, 10).is_err());
        assert!(s.argmax_sle(30, 40).is_err());
    }

    #[test]
    fn sharpness_nonnegative_on_noisy_input() {
        let values: Vec<f64> = (0..100)
            .map(|t| (t as f64 * 0.3).sin() + 0.3 * (t as f64 * 1.7).sin())
            .collect();
        let s = smooth(&values, 10.0);
        for p in s.find_extreme_points(5, 1e-3).unwrap() {
            assert!(p.sharpness >= 0.0);
        }
    }
}

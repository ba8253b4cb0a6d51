//! Line-shape measurements on sampled spectra.

use alloc::vec::Vec;

use crate::error::{Error, Result};

fn check_samples(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < min {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: alloc::format!("need at least {min} samples, got {}", x.len()),
        });
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "abscissae must be strictly increasing".into(),
        });
    }
    Ok(())
}

fn argmax(y: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in y.iter().enumerate() {
        if v > y[best] {
            best = i;
        }
    }
    best
}

/// Position and height of the global maximum, refined by a parabola through
/// the three samples around it.
pub fn peak(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_samples(x, y, 1)?;
    let i = argmax(y);
    if i == 0 || i + 1 == y.len() {
        return Ok((x[i], y[i]));
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    // Newton divided differences
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c = (d12 - d01) / (x2 - x0);
    if !(c < 0.0) {
        return Ok((x1, y1));
    }
    let b = d01 - c * (x0 + x1);
    let xp = -b / (2.0 * c);
    let yp = y0 + d01 * (xp - x0) + c * (xp - x0) * (xp - x1);
    Ok((xp, yp))
}

/// Half width at half maximum of the global peak, from linear interpolation
/// of the half-height crossings on each side (averaged).
pub fn half_width(x: &[f64], y: &[f64]) -> Result<f64> {
    check_samples(x, y, 3)?;
    let i = argmax(y);
    let half = 0.5 * y[i];
    if !(half > 0.0) {
        return Err(Error::InvalidParameter {
            name: "y",
            reason: "the peak must be positive".into(),
        });
    }
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    let right = (i..y.len() - 1).find(|&k| y[k + 1] <= half).map(|k| cross(k, k + 1));
    let left = (1..=i).rev().find(|&k| y[k - 1] <= half).map(|k| cross(k - 1, k));
    match (left, right) {
        (Some(l), Some(r)) => Ok(0.5 * (r - l)),
        (Some(l), None) => Ok(x[i] - l),
        (None, Some(r)) => Ok(r - x[i]),
        (None, None) => Err(Error::InvalidParameter {
            name: "y",
            reason: "no half-maximum crossing inside the window".into(),
        }),
    }
}

/// Parameters of `y = amplitude · γ² / ((x − center)² + γ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorentzian {
    pub center: f64,
    pub hwhm: f64,
    pub amplitude: f64,
}

impl Lorentzian {
    pub fn eval(&self, x: f64) -> f64 {
        let g2 = self.hwhm * self.hwhm;
        let d = x - self.center;
        self.amplitude * g2 / (d * d + g2)
    }
}

/// Fits a Lorentzian to the samples above `floor · max y`.
///
/// `1/y` of a Lorentzian is a quadratic in `x`; it is fitted by least
/// squares with weights `y²`, which undo the amplification of small values.
pub fn fit_lorentzian(x: &[f64], y: &[f64], floor: f64) -> Result<Lorentzian> {
    check_samples(x, y, 3)?;
    let ymax = y[argmax(y)];
    if !(ymax > 0.0) {
        return Err(Error::InvalidParameter {
            name: "y",
            reason: "the peak must be positive".into(),
        });
    }
    let shift = x[argmax(y)];
    let mut normal = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    let mut used = 0;
    for (&xi, &yi) in x.iter().zip(y) {
        if yi <= floor * ymax || yi <= 0.0 {
            continue;
        }
        used += 1;
        let u = xi - shift;
        let basis = [1.0, u, u * u];
        let w = yi * yi;
        let target = ymax / yi;
        for r in 0..3 {
            for c in 0..3 {
                normal[r][c] += w * basis[r] * basis[c];
            }
            rhs[r] += w * basis[r] * target;
        }
    }
    if used < 3 {
        return Err(Error::InvalidParameter {
            name: "floor",
            reason: "fewer than three samples above the floor".into(),
        });
    }
    let [a, b, c] = solve3(normal, rhs).ok_or(Error::NoConvergence("singular Lorentzian fit"))?;
    if !(c > 0.0) {
        return Err(Error::NoConvergence("Lorentzian fit has no maximum"));
    }
    let center = -b / (2.0 * c);
    let g2 = a / c - center * center;
    if !(g2 > 0.0) {
        return Err(Error::NoConvergence("Lorentzian fit has negative width"));
    }
    Ok(Lorentzian {
        center: center + shift,
        hwhm: libm::sqrt(g2),
        amplitude: ymax / (c * g2),
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col] == 0.0 {
            return None;
        }
        m.swap(col, p);
        v.swap(col, p);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            let pivot = m[col];
            for (x, p) in m[r].iter_mut().zip(pivot).skip(col) {
                *x -= f * p;
            }
            v[r] -= f * v[col];
        }
    }
    let mut out = [0.0; 3];
    for r in (0..3).rev() {
        let mut s = v[r];
        for c in r + 1..3 {
            s -= m[r][c] * out[c];
        }
        out[r] = s / m[r][r];
    }
    Some(out)
}

/// A local extremum that survived the prominence filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub value: f64,
    pub is_max: bool,
}

/// Alternating extrema of `y` whose swings exceed `prominence · max |y|`.
///
/// A zigzag filter: a turning point is committed only once the signal has
/// moved away from it by more than the threshold, so ripples smaller than
/// the threshold are ignored. The first and last samples never count.
pub fn extrema(y: &[f64], prominence: f64) -> Vec<Extremum> {
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut out = Vec::new();
    if y.len() < 3 || scale == 0.0 {
        return out;
    }
    let threshold = prominence * scale;
    // direction: None until the first significant move
    let mut rising: Option<bool> = None;
    let mut pivot = 0usize;
    let anchor = y[0];
    for i in 1..y.len() {
        match rising {
            None => {
                if y[i] - anchor > threshold {
                    rising = Some(true);
                    pivot = i;
                } else if anchor - y[i] > threshold {
                    rising = Some(false);
                    pivot = i;
                }
            }
            Some(true) => {
                if y[i] >= y[pivot] {
                    pivot = i;
                } else if y[pivot] - y[i] > threshold {
                    out.push(Extremum {
                        index: pivot,
                        value: y[pivot],
                        is_max: true,
                    });
                    rising = Some(false);
                    pivot = i;
                }
            }
            Some(false) => {
                if y[i] <= y[pivot] {
                    pivot = i;
                } else if y[i] - y[pivot] > threshold {
                    out.push(Extremum {
                        index: pivot,
                        value: y[pivot],
                        is_max: false,
                    });
                    rising = Some(true);
                    pivot = i;
                }
            }
        }
    }
    out
}

/// Number of prominent interior extrema.
pub fn count_extrema(y: &[f64], prominence: f64) -> usize {
    extrema(y, prominence).len()
}

/// Abscissae of prominent interior maxima.
pub fn resolved_peaks(x: &[f64], y: &[f64], prominence: f64) -> Result<Vec<f64>> {
    check_samples(x, y, 1)?;
    Ok(extrema(y, prominence)
        .into_iter()
        .filter(|e| e.is_max)
        .map(|e| x[e.index])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_lorentzian_is_recovered() {
        let l = Lorentzian {
            center: 3.3,
            hwhm: 0.7,
            amplitude: 2.5,
        };
        let x = grid(-5.0, 10.0, 301);
        let y: Vec<f64> = x.iter().map(|&v| l.eval(v)).collect();
        let fit = fit_lorentzian(&x, &y, 0.05).unwrap();
        assert!((fit.center - 3.3).abs() < 1e-9);
        assert!((fit.hwhm - 0.7).abs() < 1e-9);
        assert!((fit.amplitude - 2.5).abs() < 1e-9);
        let (xp, yp) = peak(&x, &y).unwrap();
        assert!((xp - 3.3).abs() < 5e-3 && (yp - 2.5).abs() < 1e-2);
        assert!((half_width(&x, &y).unwrap() - 0.7).abs() < 5e-3);
    }

    #[test]
    fn extrema_of_two_bumps() {
        let x = grid(0.0, 10.0, 501);
        let y: Vec<f64> = x
            .iter()
            .map(|&v| libm::exp(-(v - 3.0) * (v - 3.0)) - 0.8 * libm::exp(-(v - 7.0) * (v - 7.0)))
            .collect();
        let e = extrema(&y, 0.05);
        assert_eq!(e.len(), 2);
        assert!(e[0].is_max && !e[1].is_max);
        assert!((x[e[0].index] - 3.0).abs() < 0.05);
        assert_eq!(resolved_peaks(&x, &y, 0.05).unwrap().len(), 1);
        // ripple below the threshold is ignored
        let rippled: Vec<f64> = y
            .iter()
            .zip(&x)
            .map(|(&v, &t)| v + 0.01 * libm::sin(40.0 * t))
            .collect();
        assert_eq!(count_extrema(&rippled, 0.05), 2);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_lorentzian(&[0.0, 1.0], &[1.0, 2.0], 0.0).is_err());
        assert!(half_width(&[0.0, 1.0, 2.0], &[-1.0, -2.0, -3.0]).is_err());
        assert!(peak(&[1.0, 0.0], &[1.0, 2.0]).is_err());
        assert_eq!(count_extrema(&[0.0; 10], 0.1), 0);
    }

    proptest! {
        #[test]
        fn lorentzian_fit_is_exact(center in -3.0f64..3.0, hwhm in 0.2f64..2.0, amp in 0.1f64..10.0) {
            let l = Lorentzian { center, hwhm, amplitude: amp };
            let x = grid(-10.0, 10.0, 401);
            let y: Vec<f64> = x.iter().map(|&v| l.eval(v)).collect();
            let fit = fit_lorentzian(&x, &y, 0.1).unwrap();
            prop_assert!((fit.center - center).abs() < 1e-8);
            prop_assert!((fit.hwhm / hwhm - 1.0).abs() < 1e-8);
            prop_assert!((fit.amplitude / amp - 1.0).abs() < 1e-8);
        }

        #[test]
        fn extrema_alternate(ys in proptest::collection::vec(-1.0f64..1.0, 3..60), p in 0.01f64..0.5) {
            let e = extrema(&ys, p);
            for w in e.windows(2) {
                prop_assert!(w[0].is_max != w[1].is_max);
                prop_assert!(w[0].index < w[1].index);
            }
        }
    }
}

//! One-dimensional maximisation used by the test oracles.

use crate::error::{ModelError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximiser and maximum of a scalar function on an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// `f` must be unimodal on the interval. A coarse scan rejects functions
/// whose sampled values rise again after falling.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(ModelError::Numerical(format!("bad bracket [{lo}, {hi}]")));
    }
    check_unimodal(&f, lo, hi)?;

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a) <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = Maximum {
        x: mid,
        value: f(mid),
    };
    for (x, v) in [(lo, f(lo)), (hi, f(hi))] {
        if v > best.value {
            best = Maximum { x, value: v };
        }
    }
    Ok(best)
}

fn check_unimodal<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<()> {
    const SAMPLES: usize = 33;
    let vals: Vec<f64> = (0..SAMPLES)
        .map(|i| f(lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64))
        .collect();
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let slack = 1e-12 * scale;
    let mut falling = false;
    for w in vals.windows(2) {
        if w[1] < w[0] - slack {
            falling = true;
        } else if falling && w[1] > w[0] + slack {
            return Err(ModelError::Numerical(
                "objective is not unimodal on the search interval".into(),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 1.25) * (x - 1.25) + 3.0, 0.0, 10.0, 1e-12).unwrap();
        assert!((m.x - 1.25).abs() < 1e-7);
        assert!((m.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_maximum() {
        let m = golden_section_max(|x| -x, 0.0, 4.0, 1e-12).unwrap();
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn rejects_bimodal() {
        let r = golden_section_max(|x: f64| (3.0 * x).cos(), 0.0, 6.0, 1e-10);
        assert!(matches!(r, Err(ModelError::Numerical(_))));
    }
}

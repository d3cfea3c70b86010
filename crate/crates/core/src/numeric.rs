//! Small numerical helpers shared across modules.

use num_complex::Complex64;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of complex values, componentwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `sin(pi x)` with exact zeros at the integers.
#[inline]
pub fn sin_pi(x: f64) -> f64 {
    let nearest = x.round();
    let frac = x - nearest;
    let s = (std::f64::consts::PI * frac).sin();
    // parity of the nearest integer; |x| < 2^53 here so the cast is exact enough
    if (nearest.rem_euclid(2.0)) == 1.0 {
        -s
    } else {
        s
    }
}

/// `max |a_i - b_i|` over paired slices.
pub fn sup_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Sine and cosine integrals `(Si(x), Ci(x))` for `x > 0`.
///
/// Power series up to 2, beyond that the continued fraction for `E1(ix)`.
pub fn sici(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= 2.0 {
        let (mut si, mut cin) = (0.0, 0.0);
        let mut term = x;
        let mut k = 0u32;
        loop {
            // term = (-1)^k x^{2k+1} / (2k+1)!
            si += term / (2 * k + 1) as f64;
            let even = -term * x / (2 * k + 2) as f64;
            cin -= even / (2 * k + 2) as f64;
            term = even * x / (2 * k + 3) as f64;
            k += 1;
            if term.abs() < 1e-18 * si.abs().max(1e-300) {
                break;
            }
        }
        return (si, EULER_GAMMA + x.ln() - cin);
    }
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..200 {
        let a = -((i - 1) as f64).powi(2);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let h = Complex64::new(x.cos(), -x.sin()) * h;
    (std::f64::consts::FRAC_PI_2 + h.im, -h.re)
}

/// `Cin(x) = ∫_0^x (1 − cos s)/s ds`, which is `γ + ln x − Ci(x)` but stays
/// finite at zero.
pub fn cin(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let (_, ci) = sici(x);
    if x > 2.0 {
        return EULER_GAMMA + x.ln() - ci;
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..40u32 {
        term *= -x * x / ((2 * k - 1) * 2 * k) as f64;
        sum -= term / (2 * k) as f64;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Two-sided standard normal quantile at 97.5%.
pub const Z_975: f64 = 1.959_963_984_540_054;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1e16);
        for _ in 0..10 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 10.0);
    }

    #[test]
    fn sine_cosine_integrals() {
        let cases = [
            (1e-3, 0.000_999_999_944_444_446, -6.330_539_864_080_594, 2.499_999_895_833_336e-7),
            (0.5, 0.493_107_418_043_066_7, -0.177_784_078_806_612_9, 0.061_852_563_148_200_45),
            (1.0, 0.946_083_070_367_183, 0.337_403_922_900_968_1, 0.239_811_742_000_564_7),
            (2.0, 1.605_412_976_802_694_8, 0.422_980_828_774_865, 0.847_382_016_686_613_2),
            (2.5, 1.778_520_173_443_826_6, 0.285_871_196_365_383_5, 1.207_635_200_410_304_4),
            (10.0, 1.658_347_594_218_874, -0.045_456_433_004_455_37, 2.925_257_190_900_034),
            (100.0, 1.562_225_466_889_056_3, -0.005_148_825_142_610_492, 5.187_534_676_032_235),
            (1e4, 1.570_891_545_385_962, -3.055_191_672_448_521e-5, 9.787_586_588_794_44),
        ];
        for (x, si, ci, c) in cases {
            let (s, k) = sici(x);
            assert!((s - si).abs() <= 1e-15 * si.abs().max(1.0), "Si({x}) = {s}");
            assert!((k - ci).abs() <= 1e-14 * ci.abs().max(1e-3), "Ci({x}) = {k}");
            assert!((cin(x) - c).abs() <= 1e-14 * c.abs().max(1e-6), "Cin({x}) = {}", cin(x));
        }
    }

    #[test]
    fn sin_pi_is_exact_at_integers() {
        for k in -1000..1000 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-15);
        assert!((sin_pi(1.5) + 1.0).abs() < 1e-15);
        assert!((sin_pi(-0.5) + 1.0).abs() < 1e-15);
        assert!((sin_pi(1e6 + 0.25) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }
}

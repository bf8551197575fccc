//! Gauss–Legendre rules on the unit interval.

/// Points and weights of an n-point Gauss–Legendre rule mapped to [0, 1].
/// Weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Rule with `order` points, clamped to 1..=5. An n-point rule integrates
    /// polynomials of degree 2n - 1 exactly.
    pub fn new(order: usize) -> Self {
        let (xs, ws): (&[f64], &[f64]) = match order.clamp(1, 5) {
            1 => (&[0.0], &[2.0]),
            2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
            3 => (
                &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
                &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
            ),
            4 => (
                &[
                    -0.861_136_311_594_052_6,
                    -0.339_981_043_584_856_3,
                    0.339_981_043_584_856_3,
                    0.861_136_311_594_052_6,
                ],
                &[
                    0.347_854_845_137_453_9,
                    0.652_145_154_862_546_1,
                    0.652_145_154_862_546_1,
                    0.347_854_845_137_453_9,
                ],
            ),
            _ => (
                &[
                    -0.906_179_845_938_664,
                    -0.538_469_310_105_683_1,
                    0.0,
                    0.538_469_310_105_683_1,
                    0.906_179_845_938_664,
                ],
                &[
                    0.236_926_885_056_189_1,
                    0.478_628_670_499_366_5,
                    0.568_888_888_888_888_9,
                    0.478_628_670_499_366_5,
                    0.236_926_885_056_189_1,
                ],
            ),
        };
        GaussRule {
            points: xs.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: ws.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integrates `f` over [a, b].
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let len = b - a;
        self.iter().map(|(x, w)| w * f(a + x * len)).sum::<f64>() * len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for n in 1..=5 {
            let r = GaussRule::new(n);
            assert_eq!(r.len(), n);
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_up_to_degree_2n_minus_1() {
        for n in 1..=5 {
            let r = GaussRule::new(n);
            for deg in 0..(2 * n) as i32 {
                let got = r.integrate(-0.3, 1.7, |x| x.powi(deg));
                let exact = (1.7f64.powi(deg + 1) - (-0.3f64).powi(deg + 1)) / (deg + 1) as f64;
                assert!((got - exact).abs() < 1e-13 * exact.abs().max(1.0), "n={n} deg={deg}");
            }
        }
    }
}

//! Quadrature rules on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Degrees 1–6 use fully symmetric (Strang–Fix / Dunavant) rules. Higher
//! degrees fall back to a collapsed Gauss–Legendre product, which is less
//! economical but exact to any requested degree.

use thiserror::Error;

/// Highest degree [`QuadratureRule::new`] will build.
pub const MAX_DEGREE: usize = 30;

#[derive(Debug, Error, PartialEq)]
#[error("unsupported quadrature degree {degree} (supported 0..={max})")]
pub struct UnsupportedDegree {
    pub degree: usize,
    pub max: usize,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub degree: usize,
    /// Barycentric coordinates `(λ0, λ1, λ2)`; `λ1 = ξ`, `λ2 = η`.
    pub points: Vec<[f64; 3]>,
    /// Weights on the reference triangle (sum to 1/2).
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    // Tabulated to 20 digits as published.
    #[allow(clippy::excessive_precision)]
    pub fn new(degree: usize) -> Result<Self, UnsupportedDegree> {
        let mut rule = Self { degree, points: Vec::new(), weights: Vec::new() };
        match degree {
            0 | 1 => rule.push_orbit1(1.0),
            2 => rule.push_orbit3(2.0 / 3.0, 1.0 / 3.0),
            3 | 4 => {
                rule.push_orbit3(0.108_103_018_168_070_227_36, 0.223_381_589_678_011_465_70);
                rule.push_orbit3(0.816_847_572_980_458_513_08, 0.109_951_743_655_321_867_64);
            }
            5 => {
                let s15 = 15f64.sqrt();
                rule.push_orbit1(0.225);
                rule.push_orbit3((9.0 + 2.0 * s15) / 21.0, (155.0 - s15) / 1200.0);
                rule.push_orbit3((9.0 - 2.0 * s15) / 21.0, (155.0 + s15) / 1200.0);
            }
            6 => {
                rule.push_orbit3(0.501_426_509_658_179_157_42, 0.116_786_275_726_379_366_03);
                rule.push_orbit3(0.873_821_971_016_995_543_32, 0.050_844_906_370_206_816_92);
                rule.push_orbit6(
                    0.053_145_049_844_816_947_35,
                    0.310_352_451_033_784_405_42,
                    0.082_851_075_618_373_575_19,
                );
            }
            d if d <= MAX_DEGREE => rule.push_collapsed_gauss(d),
            d => return Err(UnsupportedDegree { degree: d, max: MAX_DEGREE }),
        }
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates `(ξ, η)` of point `q`.
    pub fn xi_eta(&self, q: usize) -> [f64; 2] {
        [self.points[q][1], self.points[q][2]]
    }

    /// Integral over the reference triangle of `g(ξ, η)`.
    pub fn integrate_reference(&self, mut g: impl FnMut(f64, f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * g(p[1], p[2])).sum()
    }

    // Orbit weights below are normalized to a unit-area triangle; halved here.
    fn push_orbit1(&mut self, w: f64) {
        self.points.push([1.0 / 3.0; 3]);
        self.weights.push(0.5 * w);
    }

    /// Points `(a, b, b)` with `b = (1 - a)/2` and permutations.
    fn push_orbit3(&mut self, a: f64, w: f64) {
        let b = 0.5 * (1.0 - a);
        for p in [[a, b, b], [b, a, b], [b, b, a]] {
            self.points.push(p);
            self.weights.push(0.5 * w);
        }
    }

    /// Points `(a, b, c)`, `c = 1 - a - b`, and all six permutations.
    fn push_orbit6(&mut self, a: f64, b: f64, w: f64) {
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.points.push(p);
            self.weights.push(0.5 * w);
        }
    }

    /// Product rule on the unit square mapped by `(u, v) ↦ (u, v (1 - u))`.
    fn push_collapsed_gauss(&mut self, degree: usize) {
        let nu = (degree + 2).div_ceil(2);
        let nv = (degree + 1).div_ceil(2);
        let (xu, wu) = gauss_legendre_unit(nu);
        let (xv, wv) = gauss_legendre_unit(nv);
        for (u, wu) in xu.iter().zip(&wu) {
            for (v, wv) in xv.iter().zip(&wv) {
                let xi = *u;
                let eta = v * (1.0 - u);
                self.points.push([1.0 - xi - eta, xi, eta]);
                self.weights.push(wu * wv * (1.0 - u));
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// ∫_T ξ^a η^b = a! b! / (a + b + 2)!
    fn monomial_exact(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn weights_sum_to_reference_area() {
        for d in 0..=MAX_DEGREE {
            let r = QuadratureRule::new(d).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 0.5).abs() < 1e-15, "degree {d}: {s}");
            for p in &r.points {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
                assert!(p.iter().all(|&l| l >= -1e-15));
            }
        }
    }

    #[test]
    fn exact_for_all_monomials_up_to_degree() {
        for d in 1..=MAX_DEGREE {
            let r = QuadratureRule::new(d).unwrap();
            let rtol = if d <= 6 { 2e-15 } else { 1e-14 };
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let got = r.integrate_reference(|x, y| x.powi(a as i32) * y.powi(b as i32));
                    let want = monomial_exact(a, b);
                    assert!((got - want).abs() <= rtol * want, "deg {d}: x^{a} y^{b}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn constant_integrates_to_half() {
        let r = QuadratureRule::new(1).unwrap();
        assert_eq!(r.integrate_reference(|_, _| 1.0), 0.5);
    }

    #[test]
    fn x2y2_with_degree_four_and_six() {
        let want = 1.0 / 180.0;
        let r4 = QuadratureRule::new(4).unwrap().integrate_reference(|x, y| x * x * y * y);
        let r6 = QuadratureRule::new(6).unwrap().integrate_reference(|x, y| x * x * y * y);
        assert!((r4 - want).abs() <= 1e-15, "{r4}");
        assert!((r6 - want).abs() <= 1e-15, "{r6}");
    }

    #[test]
    fn rejects_excessive_degree() {
        assert_eq!(
            QuadratureRule::new(MAX_DEGREE + 1).unwrap_err(),
            UnsupportedDegree { degree: MAX_DEGREE + 1, max: MAX_DEGREE }
        );
    }
}

//! Collapsed-coordinate (Duffy) product rules built from Gauss–Legendre points.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::SpaceError;

/// Highest polynomial exactness offered by [`quadrature`].
pub const MAX_EXACTNESS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Segment,
    Triangle,
    Tetrahedron,
}

/// Points in reference coordinates (unused trailing coordinates are zero).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub exactness: usize,
    pub domain: Domain,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n <= 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = 0.5 * (t + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn build(domain: Domain, exactness: usize) -> QuadratureRule {
    match domain {
        Domain::Segment => {
            let n = exactness / 2 + 1;
            let (x, w) = gauss_legendre01(n);
            QuadratureRule {
                points: x.iter().map(|&s| [s, 0.0, 0.0]).collect(),
                weights: w,
                exactness,
                domain,
            }
        }
        Domain::Triangle => {
            // x = u, y = v (1 - u); Jacobian (1 - u) raises the u-degree by one.
            let n = exactness.div_ceil(2) + 1;
            let (g, gw) = gauss_legendre01(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for (i, &u) in g.iter().enumerate() {
                for (j, &v) in g.iter().enumerate() {
                    points.push([u, v * (1.0 - u), 0.0]);
                    weights.push(gw[i] * gw[j] * (1.0 - u));
                }
            }
            QuadratureRule {
                points,
                weights,
                exactness,
                domain,
            }
        }
        Domain::Tetrahedron => {
            // x = u, y = v (1 - u), z = w (1 - u)(1 - v).
            let n = (exactness + 2) / 2 + 1;
            let (g, gw) = gauss_legendre01(n);
            let mut points = Vec::with_capacity(n * n * n);
            let mut weights = Vec::with_capacity(n * n * n);
            for (i, &u) in g.iter().enumerate() {
                for (j, &v) in g.iter().enumerate() {
                    for (k, &w) in g.iter().enumerate() {
                        points.push([u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)]);
                        weights.push(gw[i] * gw[j] * gw[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
            QuadratureRule {
                points,
                weights,
                exactness,
                domain,
            }
        }
    }
}

type Cache = Mutex<HashMap<(Domain, usize), Arc<QuadratureRule>>>;

/// Rule on the reference segment `[0,1]`, triangle or tetrahedron that
/// integrates polynomials up to degree `exactness` exactly. Rules are cached.
pub fn quadrature(domain: Domain, exactness: usize) -> Result<Arc<QuadratureRule>, SpaceError> {
    if exactness > MAX_EXACTNESS {
        return Err(SpaceError::UnsupportedDegree(exactness));
    }
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    Ok(guard
        .entry((domain, exactness))
        .or_insert_with(|| Arc::new(build(domain, exactness)))
        .clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::poly::{monomial_exponents, monomial_integral_tet, monomial_integral_tri};

    #[test]
    fn tet_weights_sum_to_volume() {
        let q = quadrature(Domain::Tetrahedron, 1).unwrap();
        let s: f64 = q.weights.iter().sum();
        assert!((s - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_degree_two() {
        let q = quadrature(Domain::Triangle, 2).unwrap();
        let i = |f: &dyn Fn([f64; 3]) -> f64| -> f64 {
            q.points.iter().zip(&q.weights).map(|(p, w)| w * f(*p)).sum()
        };
        assert!((i(&|p| p[0] * p[0]) - 1.0 / 12.0).abs() < 1e-15);
        assert!((i(&|p| p[0] * p[1]) - 1.0 / 24.0).abs() < 1e-15);
        assert!((i(&|p| p[1] * p[1]) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn monomial_sweeps() {
        for ex in [0, 3, 8, 12] {
            let q = quadrature(Domain::Tetrahedron, ex).unwrap();
            for e in monomial_exponents(ex) {
                let approx: f64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .map(|(p, w)| w * p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32))
                    .sum();
                assert!((approx - monomial_integral_tet(e[0], e[1], e[2])).abs() < 1e-12, "{e:?}");
            }
            let q = quadrature(Domain::Triangle, ex).unwrap();
            for e in monomial_exponents(ex).into_iter().filter(|e| e[2] == 0) {
                let approx: f64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .map(|(p, w)| w * p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32))
                    .sum();
                assert!((approx - monomial_integral_tri(e[0], e[1])).abs() < 1e-13);
            }
            let q = quadrature(Domain::Segment, ex).unwrap();
            for d in 0..=ex {
                let approx: f64 = q.points.iter().zip(&q.weights).map(|(p, w)| w * p[0].powi(d as i32)).sum();
                assert!((approx - 1.0 / (d as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_excessive_degree() {
        assert!(quadrature(Domain::Tetrahedron, 13).is_err());
    }
}

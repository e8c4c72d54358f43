//! Dense polynomials in three variables over the monomial basis.
//!
//! Monomials `x^a y^b z^c` are ordered by total degree, and within one degree
//! by decreasing `a`, then increasing `c`. The ordering does not depend on the
//! polynomial degree, so a degree-`d` polynomial is a prefix of any
//! higher-degree representation. Two-variable polynomials are stored as
//! three-variable ones with no `z` dependence.

use nalgebra::DMatrix;

/// Number of monomials of total degree at most `deg` in three variables.
pub fn n_monomials(deg: usize) -> usize {
    (deg + 1) * (deg + 2) * (deg + 3) / 6
}

/// Position of `x^a y^b z^c` in the global monomial ordering.
pub fn monomial_index(a: usize, b: usize, c: usize) -> usize {
    let s = a + b + c;
    let r = b + c;
    s * (s + 1) * (s + 2) / 6 + r * (r + 1) / 2 + c
}

/// Exponents of every monomial up to degree `deg`, in storage order.
pub fn monomial_exponents(deg: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(n_monomials(deg));
    for s in 0..=deg {
        for r in 0..=s {
            for c in 0..=r {
                out.push([s - r, r - c, c]);
            }
        }
    }
    out
}

/// Exponents of the monomials of degree exactly `deg`.
pub fn homogeneous_exponents(deg: usize) -> Vec<[usize; 3]> {
    monomial_exponents(deg)
        .into_iter()
        .filter(|e| e[0] + e[1] + e[2] == deg)
        .collect()
}

/// Exponents `(a, b, 0)` of two-variable monomials up to degree `deg`.
pub fn monomial_exponents_2d(deg: usize) -> Vec<[usize; 3]> {
    monomial_exponents(deg)
        .into_iter()
        .filter(|e| e[2] == 0)
        .collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Exact integral of `x^a y^b z^c` over the reference tetrahedron.
pub fn monomial_integral_tet(a: usize, b: usize, c: usize) -> f64 {
    factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
}

/// Exact integral of `x^a y^b` over the reference triangle.
pub fn monomial_integral_tri(a: usize, b: usize) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    deg: usize,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero(deg: usize) -> Self {
        Self {
            deg,
            coeffs: vec![0.0; n_monomials(deg)],
        }
    }

    pub fn constant(v: f64) -> Self {
        Self {
            deg: 0,
            coeffs: vec![v],
        }
    }

    pub fn monomial(e: [usize; 3]) -> Self {
        let deg = e[0] + e[1] + e[2];
        let mut p = Self::zero(deg);
        p.coeffs[monomial_index(e[0], e[1], e[2])] = 1.0;
        p
    }

    pub fn from_coeffs(deg: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), n_monomials(deg));
        Self { deg, coeffs }
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, e: [usize; 3]) -> f64 {
        let i = monomial_index(e[0], e[1], e[2]);
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Re-expresses the polynomial with storage for degree `deg`.
    pub fn with_degree(&self, deg: usize) -> Self {
        let mut p = Self::zero(deg);
        for (i, e) in monomial_exponents(self.deg).into_iter().enumerate() {
            let v = self.coeffs[i];
            if v != 0.0 {
                assert!(e[0] + e[1] + e[2] <= deg, "truncating a nonzero coefficient");
                p.coeffs[monomial_index(e[0], e[1], e[2])] = v;
            }
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let deg = self.deg.max(other.deg);
        let mut p = self.with_degree(deg);
        for (i, v) in other.coeffs.iter().enumerate() {
            p.coeffs[i] += v;
        }
        p
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            deg: self.deg,
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
        }
    }

    pub fn axpy(&mut self, s: f64, other: &Poly) {
        if other.deg > self.deg {
            *self = self.with_degree(other.deg);
        }
        for (i, v) in other.coeffs.iter().enumerate() {
            self.coeffs[i] += s * v;
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let deg = self.deg + other.deg;
        let mut p = Poly::zero(deg);
        let ea = monomial_exponents(self.deg);
        let eb = monomial_exponents(other.deg);
        for (i, a) in ea.iter().enumerate() {
            let ca = self.coeffs[i];
            if ca == 0.0 {
                continue;
            }
            for (j, b) in eb.iter().enumerate() {
                let cb = other.coeffs[j];
                if cb != 0.0 {
                    p.coeffs[monomial_index(a[0] + b[0], a[1] + b[1], a[2] + b[2])] += ca * cb;
                }
            }
        }
        p
    }

    /// Multiplies by the coordinate variable `var` (0 = x, 1 = y, 2 = z).
    pub fn mul_var(&self, var: usize) -> Poly {
        let mut p = Poly::zero(self.deg + 1);
        for (i, mut e) in monomial_exponents(self.deg).into_iter().enumerate() {
            e[var] += 1;
            p.coeffs[monomial_index(e[0], e[1], e[2])] = self.coeffs[i];
        }
        p
    }

    pub fn deriv(&self, var: usize) -> Poly {
        let deg = self.deg.saturating_sub(1);
        let mut p = Poly::zero(deg);
        for (i, e) in monomial_exponents(self.deg).into_iter().enumerate() {
            if e[var] == 0 {
                continue;
            }
            let mut f = e;
            f[var] -= 1;
            p.coeffs[monomial_index(f[0], f[1], f[2])] += e[var] as f64 * self.coeffs[i];
        }
        p
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let mut pw = vec![[1.0; 3]; self.deg + 1];
        for d in 1..=self.deg {
            for v in 0..3 {
                pw[d][v] = pw[d - 1][v] * x[v];
            }
        }
        let mut s = 0.0;
        for (i, e) in monomial_exponents(self.deg).into_iter().enumerate() {
            s += self.coeffs[i] * pw[e[0]][0] * pw[e[1]][1] * pw[e[2]][2];
        }
        s
    }

    /// Values at the points of a [`monomial_table`] of degree `>= self.deg()`.
    pub fn eval_table(&self, table: &DMatrix<f64>) -> Vec<f64> {
        let mut out = vec![0.0; table.ncols()];
        for (m, &v) in self.coeffs.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for (q, o) in out.iter_mut().enumerate() {
                *o += v * table[(m, q)];
            }
        }
        out
    }

    /// Exact integral over the reference tetrahedron.
    pub fn integrate_tet(&self) -> f64 {
        monomial_exponents(self.deg)
            .into_iter()
            .zip(&self.coeffs)
            .map(|(e, c)| c * monomial_integral_tet(e[0], e[1], e[2]))
            .sum()
    }

    /// Exact integral over the reference triangle of a polynomial in `x, y`.
    pub fn integrate_tri(&self) -> f64 {
        monomial_exponents(self.deg)
            .into_iter()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                assert!(e[2] == 0 || *c == 0.0, "triangle integral of a z-dependent polynomial");
                c * monomial_integral_tri(e[0], e[1])
            })
            .sum()
    }
}

/// Table of monomial values: row `i` is monomial `i`, column `q` is point `q`.
pub fn monomial_table(deg: usize, points: &[[f64; 3]]) -> DMatrix<f64> {
    let exps = monomial_exponents(deg);
    let mut t = DMatrix::zeros(exps.len(), points.len());
    for (q, x) in points.iter().enumerate() {
        let mut pw = vec![[1.0; 3]; deg + 1];
        for d in 1..=deg {
            for v in 0..3 {
                pw[d][v] = pw[d - 1][v] * x[v];
            }
        }
        for (i, e) in exps.iter().enumerate() {
            t[(i, q)] = pw[e[0]][0] * pw[e[1]][1] * pw[e[2]][2];
        }
    }
    t
}

/// A polynomial vector field with three components.
#[derive(Clone, Debug, PartialEq)]
pub struct VecPoly(pub [Poly; 3]);

impl VecPoly {
    pub fn zero(deg: usize) -> Self {
        VecPoly([Poly::zero(deg), Poly::zero(deg), Poly::zero(deg)])
    }

    pub fn deg(&self) -> usize {
        self.0.iter().map(Poly::deg).max().unwrap_or(0)
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        [self.0[0].eval(x), self.0[1].eval(x), self.0[2].eval(x)]
    }

    /// Values at the points of a [`monomial_table`] of degree `>= self.deg()`.
    pub fn eval_table(&self, table: &DMatrix<f64>) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; table.ncols()];
        for c in 0..3 {
            for (m, &v) in self.0[c].coeffs().iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                for (q, o) in out.iter_mut().enumerate() {
                    o[c] += v * table[(m, q)];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &VecPoly) -> VecPoly {
        VecPoly([self.0[0].add(&o.0[0]), self.0[1].add(&o.0[1]), self.0[2].add(&o.0[2])])
    }

    pub fn scale(&self, s: f64) -> VecPoly {
        VecPoly([self.0[0].scale(s), self.0[1].scale(s), self.0[2].scale(s)])
    }

    pub fn axpy(&mut self, s: f64, o: &VecPoly) {
        for c in 0..3 {
            self.0[c].axpy(s, &o.0[c]);
        }
    }

    /// Curl with respect to the polynomial's own variables.
    pub fn curl(&self) -> VecPoly {
        let [u, v, w] = &self.0;
        VecPoly([
            w.deriv(1).add(&v.deriv(2).scale(-1.0)),
            u.deriv(2).add(&w.deriv(0).scale(-1.0)),
            v.deriv(0).add(&u.deriv(1).scale(-1.0)),
        ])
    }

    pub fn div(&self) -> Poly {
        self.0[0]
            .deriv(0)
            .add(&self.0[1].deriv(1))
            .add(&self.0[2].deriv(2))
    }

    /// Applies a constant 3x3 matrix to the vector values.
    pub fn transform(&self, m: &[[f64; 3]; 3]) -> VecPoly {
        let deg = self.deg();
        let mut out = VecPoly::zero(deg);
        for r in 0..3 {
            for c in 0..3 {
                if m[r][c] != 0.0 {
                    out.0[r].axpy(m[r][c], &self.0[c]);
                }
            }
        }
        out
    }
}

pub fn grad(p: &Poly) -> VecPoly {
    VecPoly([p.deriv(0), p.deriv(1), p.deriv(2)])
}

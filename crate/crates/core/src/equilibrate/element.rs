//! Step 1: per-element correction `H^` with `curl H^ = j - curl H_h` and
//! `(mu H^, grad psi)_T = 0` for all `psi` in `P_k'(T)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::EquilibrationError;
use crate::femsys::{phys_deriv, BrokenField, CurrentDensity, MaterialField};
use crate::mesh::Mesh;
use crate::polyspace::maps::{matvec, AffineMap};
use crate::polyspace::spaces::SpaceKind;
use crate::polyspace::tables::ref_table;

#[derive(Clone, Debug)]
pub struct ElementCorrection {
    pub aux_degree: usize,
    /// Reference-basis coefficients of `H^|_T` in `R_k'(T)`.
    pub coeffs: Vec<Vec<f64>>,
    pub h_hat: BrokenField,
    /// `||j - curl H_h||_T`.
    pub residual_current: Vec<f64>,
    /// `||j - curl H_h - curl H^||_T`; zero when `j` lies in `D_k'`.
    pub oscillation: Vec<f64>,
}

impl ElementCorrection {
    /// Global `(sum_T osc_T^2)^{1/2}`.
    pub fn total_oscillation(&self) -> f64 {
        self.oscillation.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Relative pivot ratio below which a local system counts as singular.
pub(crate) const PIVOT_TOL: f64 = 1e-14;

pub(crate) fn solve_dense(m: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = m.full_piv_lu();
    let u = lu.u();
    let d: Vec<f64> = (0..u.nrows().min(u.ncols())).map(|i| u[(i, i)].abs()).collect();
    let max = d.iter().cloned().fold(0.0, f64::max);
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= PIVOT_TOL * max {
        return None;
    }
    lu.solve(b)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Solves the element problems. The curl equation is imposed in least-squares
/// form (tested with `curl R_k'(T)`), which is exact whenever
/// `j - curl H_h` lies in `curl R_k'(T)`; otherwise the remainder is reported
/// as data oscillation. `jh` is `curl H_h` per element.
pub fn step1_element_corrections(
    mesh: &Mesh,
    maps: &[AffineMap],
    mu: &MaterialField,
    j: &CurrentDensity,
    jh: &BrokenField,
    aux_degree: usize,
    strict: bool,
) -> Result<ElementCorrection, EquilibrationError> {
    let kp = aux_degree;
    let ex = j.exactness(kp);
    let ned = ref_table(SpaceKind::Nedelec1Tet, kp, ex)?;
    let lag = ref_table(SpaceKind::PScalarTet, kp, ex)?;
    let rule = &ned.rule;
    let nr = ned.values.n_basis();
    // The Lagrange basis sums to one, so dropping its last member leaves a
    // basis of grad P_k'.
    let np = lag.values.n_basis() - 1;
    let results: Vec<Result<(Vec<f64>, f64, f64), EquilibrationError>> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let cov = m.covariant();
            let w_abs = m.abs_det();
            let mu_t = mu.mu(mesh.tag(t));
            let nq = rule.len();
            let curls: Vec<Vec<[f64; 3]>> = ned
                .derivs
                .values
                .iter()
                .map(|c| c.iter().map(|v| matvec(&m.jac, *v).map(|x| x / m.det)).collect())
                .collect();
            let vals: Vec<Vec<[f64; 3]>> = ned
                .values
                .values
                .iter()
                .map(|c| c.iter().map(|v| matvec(&cov, *v)).collect())
                .collect();
            let grads: Vec<Vec<[f64; 3]>> = lag.derivs.values[..np]
                .iter()
                .map(|c| c.iter().map(|v| matvec(&cov, *v)).collect())
                .collect();
            let jd: Vec<[f64; 3]> = rule
                .points
                .iter()
                .map(|&p| {
                    let a = j.eval(t, m, p);
                    let b = jh.eval(t, p);
                    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
                })
                .collect();
            let wq: Vec<f64> = rule.weights.iter().map(|w| w * w_abs).collect();

            let mut kmat = DMatrix::<f64>::zeros(nr, nr);
            let mut g = DVector::<f64>::zeros(nr + np);
            for i in 0..nr {
                for jj in 0..=i {
                    let v: f64 = (0..nq).map(|q| wq[q] * dot(curls[i][q], curls[jj][q])).sum();
                    kmat[(i, jj)] = v;
                    kmat[(jj, i)] = v;
                }
                g[i] = (0..nq).map(|q| wq[q] * dot(jd[q], curls[i][q])).sum();
            }
            let mut bmat = DMatrix::<f64>::zeros(nr, np);
            for i in 0..nr {
                for a in 0..np {
                    bmat[(i, a)] = mu_t * (0..nq).map(|q| wq[q] * dot(vals[i][q], grads[a][q])).sum::<f64>();
                }
            }
            // Balance the multiplier block against the curl block.
            let kmax = kmat.amax().max(f64::MIN_POSITIVE);
            let bmax = bmat.amax().max(f64::MIN_POSITIVE);
            bmat *= kmax / bmax;
            let n = nr + np;
            let mut sys = DMatrix::<f64>::zeros(n, n);
            sys.view_mut((0, 0), (nr, nr)).copy_from(&kmat);
            sys.view_mut((0, nr), (nr, np)).copy_from(&bmat);
            sys.view_mut((nr, 0), (np, nr)).copy_from(&bmat.transpose());
            let sol = solve_dense(sys, &g).ok_or(EquilibrationError::LocalSolveSingular(t))?;
            let c: Vec<f64> = sol.iter().take(nr).copied().collect();

            let mut res2 = 0.0;
            let mut osc2 = 0.0;
            for q in 0..nq {
                let mut ch = [0.0; 3];
                for i in 0..nr {
                    for d in 0..3 {
                        ch[d] += c[i] * curls[i][q][d];
                    }
                }
                let r = [jd[q][0] - ch[0], jd[q][1] - ch[1], jd[q][2] - ch[2]];
                res2 += wq[q] * dot(jd[q], jd[q]);
                osc2 += wq[q] * dot(r, r);
            }
            if strict {
                if let CurrentDensity::Broken(b) = j {
                    let f = &b.elems[t];
                    let div = phys_deriv(&f.0[0], &m.jac_inv, 0)
                        .add(&phys_deriv(&f.0[1], &m.jac_inv, 1))
                        .add(&phys_deriv(&f.0[2], &m.jac_inv, 2));
                    let dn = (0..nq)
                        .map(|q| wq[q] * div.eval(rule.points[q]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let jn = (0..nq)
                        .map(|q| {
                            let v = f.eval(rule.points[q]);
                            wq[q] * dot(v, v)
                        })
                        .sum::<f64>()
                        .sqrt();
                    if dn > 1e-9 * jn / mesh.diameter(t) + 1e-14 {
                        return Err(EquilibrationError::DataIncompatible { tet: t, divergence: dn });
                    }
                }
            }
            Ok((c, res2.sqrt(), osc2.sqrt()))
        })
        .collect();

    let space = &ned.space;
    let mut coeffs = Vec::with_capacity(mesh.n_tets());
    let mut residual_current = Vec::with_capacity(mesh.n_tets());
    let mut oscillation = Vec::with_capacity(mesh.n_tets());
    let mut elems = Vec::with_capacity(mesh.n_tets());
    for (t, r) in results.into_iter().enumerate() {
        let (c, res, osc) = r?;
        elems.push(space.combine(&c).transform(&maps[t].covariant()));
        coeffs.push(c);
        residual_current.push(res);
        oscillation.push(osc);
    }
    Ok(ElementCorrection {
        aux_degree,
        coeffs,
        h_hat: BrokenField { elems },
        residual_current,
        oscillation,
    })
}

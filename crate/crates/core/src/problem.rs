//! Two-point IBVP specification: spatial operator order, evolution direction,
//! boundary forms, initial datum, and the adjoint/complementary boundary
//! forms obtained from the bilinear concomitant.
//!
//! The operator is `S φ = (-i)^n φ^(n)` on [0,1] restricted to the domain
//! `Φ = {φ : B_j φ = 0}`, with `B_j φ = Σ_k b_{jk} φ^(k)(0) + β_{jk} φ^(k)(1)`.

use crate::num::{self, c, CPoly, C64, I};
use serde::{Deserialize, Serialize};

pub const DOMAIN_TOL: f64 = 1e-8;
pub const MAX_ORDER: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("direction a must have unit modulus (|a| = {0})")]
    NonUnitDirection(f64),
    #[error("inadmissible direction a for order n={n}: {reason}")]
    InadmissibleDirection { n: usize, reason: String },
    #[error("boundary forms are linearly dependent (rank {rank} < n = {n})")]
    DependentBoundaryForms { rank: usize, n: usize },
    #[error("order n={0} outside supported range 2..={MAX_ORDER}")]
    UnsupportedOrder(usize),
    #[error("boundary matrix could not be completed to full rank")]
    DegenerateCompletion,
    #[error("datum does not satisfy the boundary conditions (max |B_j f| = {0:.3e})")]
    DatumNotInDomain(f64),
}

/// One boundary form row: `Σ_k b[k] φ^(k)(0) + beta[k] φ^(k)(1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub b: Vec<C64>,
    pub beta: Vec<C64>,
}

/// Raw problem description, as read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: usize,
    pub a: C64,
    pub bc: Vec<BoundaryRow>,
    #[serde(default)]
    pub label: String,
}

impl ProblemSpec {
    pub fn new(n: usize, a: C64, bc: Vec<BoundaryRow>, label: &str) -> Self {
        ProblemSpec {
            n,
            a,
            bc,
            label: label.to_string(),
        }
    }

    /// Boundary-form coefficient matrix `[b | beta]`, n rows by 2n columns.
    pub fn form_matrix(&self) -> Vec<Vec<C64>> {
        self.bc
            .iter()
            .map(|row| {
                let mut r = Vec::with_capacity(2 * self.n);
                for k in 0..self.n {
                    r.push(*row.b.get(k).unwrap_or(&c(0.0, 0.0)));
                }
                for k in 0..self.n {
                    r.push(*row.beta.get(k).unwrap_or(&c(0.0, 0.0)));
                }
                r
            })
            .collect()
    }

    pub fn validate(self) -> Result<ValidatedProblem, ProblemError> {
        if self.n < 2 || self.n > MAX_ORDER {
            return Err(ProblemError::UnsupportedOrder(self.n));
        }
        let amod = self.a.norm();
        if (amod - 1.0).abs() > 1e-12 {
            return Err(ProblemError::NonUnitDirection(amod));
        }
        if self.n % 2 == 1 {
            if (self.a - I).norm() > 1e-9 && (self.a + I).norm() > 1e-9 {
                return Err(ProblemError::InadmissibleDirection {
                    n: self.n,
                    reason: "odd order requires a = ±i".into(),
                });
            }
        } else if self.a.re < -1e-12 {
            return Err(ProblemError::InadmissibleDirection {
                n: self.n,
                reason: "even order requires Re(a) >= 0".into(),
            });
        }
        if self.bc.len() != self.n {
            return Err(ProblemError::DependentBoundaryForms {
                rank: self.bc.len().min(self.n),
                n: self.n,
            });
        }
        let rank = num::rank(self.form_matrix(), 1e-10);
        if rank < self.n {
            return Err(ProblemError::DependentBoundaryForms { rank, n: self.n });
        }
        Ok(ValidatedProblem {
            spec: self,
            bform_rank: rank,
        })
    }
}

/// A spec whose invariants (unit direction, admissibility, independent
/// boundary forms) have been certified.
#[derive(Debug, Clone)]
pub struct ValidatedProblem {
    pub spec: ProblemSpec,
    pub bform_rank: usize,
}

impl ValidatedProblem {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn a(&self) -> C64 {
        self.spec.a
    }

    /// Apply the boundary forms to a datum: `(B_1 f, ..., B_n f)`.
    pub fn apply_boundary_forms(&self, f: &Datum) -> Vec<C64> {
        let n = self.n();
        self.spec
            .bc
            .iter()
            .map(|row| {
                let mut v = c(0.0, 0.0);
                for k in 0..n {
                    if let Some(&bk) = row.b.get(k) {
                        v += bk * f.deriv_at(k, 0.0);
                    }
                    if let Some(&bk) = row.beta.get(k) {
                        v += bk * f.deriv_at(k, 1.0);
                    }
                }
                v
            })
            .collect()
    }

    /// Max boundary-form residual of the datum.
    pub fn domain_defect(&self, f: &Datum) -> f64 {
        self.apply_boundary_forms(f)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn datum_in_domain(&self, f: &Datum, tol: f64) -> bool {
        self.domain_defect(f) < tol
    }

    pub fn require_in_domain(&self, f: &Datum) -> Result<(), ProblemError> {
        let d = self.domain_defect(f);
        if d < DOMAIN_TOL {
            Ok(())
        } else {
            Err(ProblemError::DatumNotInDomain(d))
        }
    }

    /// Hash of (n, a, bc) used to key zero caches; edits to any coefficient
    /// change the hash.
    pub fn cache_key(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |bits: u64| {
            h ^= bits;
            h = h.wrapping_mul(0x1000_0000_01b3);
        };
        mix(self.n() as u64);
        mix(self.a().re.to_bits());
        mix(self.a().im.to_bits());
        for row in &self.spec.bc {
            for z in row.b.iter().chain(row.beta.iter()) {
                mix(z.re.to_bits());
                mix(z.im.to_bits());
            }
        }
        h
    }
}

// ---------------------------------------------------------------------------
// Bilinear concomitant and adjoint boundary forms.
// ---------------------------------------------------------------------------

/// Adjoint boundary coefficients `b*_{jk}`, `beta*_{jk}` together with the
/// complementary vector boundary forms completing the concomitant identity
/// `[φψ](1) - [φψ](0) = Bφ · B_c*ψ + B_cφ · B*ψ` (sesquilinear dot).
#[derive(Debug, Clone)]
pub struct AdjointData {
    pub bstar: Vec<Vec<C64>>,
    pub betastar: Vec<Vec<C64>>,
    /// Complementary forms of B, as rows over (φ(0..n-1)(0), φ(0..n-1)(1)).
    pub bc_comp: Vec<Vec<C64>>,
    /// Complementary forms of B*, same layout.
    pub bcstar_comp: Vec<Vec<C64>>,
}

/// `[φψ](x)`: the bilinear concomitant of the formally self-adjoint operator,
/// `(-i)^n Σ_j (-1)^j φ^(n-1-j)(x) conj(ψ^(j)(x))`.
pub fn concomitant(n: usize, phi: &CPoly, psi: &CPoly, x: f64) -> C64 {
    let pref = (-I).powu(n as u32);
    let mut s = c(0.0, 0.0);
    for j in 0..n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += pref * sign * phi.deriv_at(n - 1 - j, x) * psi.deriv_at(j, x).conj();
    }
    s
}

/// Boundary traces `(f(x), f'(x), ..., f^(n-1)(x))` at x=0 then x=1.
pub fn boundary_vector(n: usize, f: &CPoly) -> Vec<C64> {
    let mut v = Vec::with_capacity(2 * n);
    for k in 0..n {
        v.push(f.deriv_at(k, 0.0));
    }
    for k in 0..n {
        v.push(f.deriv_at(k, 1.0));
    }
    v
}

/// Construct adjoint and complementary boundary forms by completing `[b|β]`
/// to an invertible 2n x 2n matrix and reading coefficients off the inverse
/// against the concomitant matrix.
pub fn adjoint_boundary_forms(vp: &ValidatedProblem) -> Result<AdjointData, ProblemError> {
    let n = vp.n();
    let wb = vp.spec.form_matrix();
    let wc = num::orth_complement(&wb);
    if wc.len() != n {
        return Err(ProblemError::DegenerateCompletion);
    }
    let mut w = wb.clone();
    w.extend(wc.iter().cloned());
    let winv = num::inverse(&w).ok_or(ProblemError::DegenerateCompletion)?;

    // Concomitant matrix on stacked boundary vectors: diag(-A, A) with
    // A[n-1-j][j] = (-i)^n (-1)^j.
    let pref = (-I).powu(n as u32);
    let mut atilde = vec![vec![c(0.0, 0.0); 2 * n]; 2 * n];
    for j in 0..n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        atilde[n - 1 - j][j] = -pref * sign;
        atilde[2 * n - 1 - j][n + j] = pref * sign;
    }

    // G = (W^{-1})^T * Atilde; rows 0..n give conj(B_c*), rows n..2n conj(B*).
    let mut g = vec![vec![c(0.0, 0.0); 2 * n]; 2 * n];
    for r in 0..2 * n {
        for cc in 0..2 * n {
            let mut s = c(0.0, 0.0);
            for k in 0..2 * n {
                s += winv[k][r] * atilde[k][cc];
            }
            g[r][cc] = s;
        }
    }

    let bcstar_comp: Vec<Vec<C64>> = g[0..n]
        .iter()
        .map(|row| row.iter().map(|z| z.conj()).collect())
        .collect();
    let wstar: Vec<Vec<C64>> = g[n..2 * n]
        .iter()
        .map(|row| row.iter().map(|z| z.conj()).collect())
        .collect();

    let bstar = wstar.iter().map(|row| row[0..n].to_vec()).collect();
    let betastar = wstar.iter().map(|row| row[n..2 * n].to_vec()).collect();

    Ok(AdjointData {
        bstar,
        betastar,
        bc_comp: wc,
        bcstar_comp,
    })
}

impl AdjointData {
    /// Apply the j-th adjoint form to a polynomial.
    pub fn apply_star(&self, j: usize, psi: &CPoly) -> C64 {
        let n = self.bstar.len();
        let mut v = c(0.0, 0.0);
        for k in 0..n {
            v += self.bstar[j][k] * psi.deriv_at(k, 0.0);
            v += self.betastar[j][k] * psi.deriv_at(k, 1.0);
        }
        v
    }

    /// Residual of the concomitant decomposition on a (φ, ψ) pair.
    pub fn decomposition_residual(&self, vp: &ValidatedProblem, phi: &CPoly, psi: &CPoly) -> f64 {
        let n = vp.n();
        let lhs = concomitant(n, phi, psi, 1.0) - concomitant(n, phi, psi, 0.0);
        let u = boundary_vector(n, phi);
        let v = boundary_vector(n, psi);
        let apply = |rows: &Vec<Vec<C64>>, vec: &Vec<C64>| -> Vec<C64> {
            rows.iter()
                .map(|row| row.iter().zip(vec).map(|(a, b)| a * b).sum())
                .collect()
        };
        let bphi: Vec<C64> = vp.apply_boundary_forms(&Datum::from_poly(phi.clone()));
        let bcphi = apply(&self.bc_comp, &u);
        let bcstar_psi = apply(&self.bcstar_comp, &v);
        let mut wstar_rows = Vec::with_capacity(n);
        for j in 0..n {
            let mut row = self.bstar[j].clone();
            row.extend(self.betastar[j].iter().copied());
            wstar_rows.push(row);
        }
        let bstar_psi = apply(&wstar_rows, &v);
        let mut rhs = c(0.0, 0.0);
        for j in 0..n {
            rhs += bphi[j] * bcstar_psi[j].conj();
            rhs += bcphi[j] * bstar_psi[j].conj();
        }
        (lhs - rhs).norm()
    }
}

// ---------------------------------------------------------------------------
// Initial datum.
// ---------------------------------------------------------------------------

/// Initial datum in monomial form. Polynomial data keep derivatives and the
/// Fourier-type transform exact; smooth non-polynomial data enter through
/// Chebyshev interpolation (`from_fn`), converted to the monomial basis.
#[derive(Debug, Clone)]
pub struct Datum {
    pub poly: CPoly,
}

impl Datum {
    pub fn from_poly(poly: CPoly) -> Self {
        Datum { poly }
    }

    pub fn from_real_coeffs(co: &[f64]) -> Self {
        Datum {
            poly: CPoly::from_real(co),
        }
    }

    pub fn zero() -> Self {
        Datum {
            poly: CPoly::zero(),
        }
    }

    /// Interpolate a smooth function on [0,1] by a Chebyshev-Lobatto
    /// polynomial of degree <= `deg` (capped at 24) and convert to monomial
    /// coefficients. Intended for entire/analytic data like sin(πx).
    pub fn from_fn(f: impl Fn(f64) -> f64, deg: usize) -> Self {
        let deg = deg.clamp(2, 24);
        let nn = deg;
        let samples: Vec<f64> = (0..=nn)
            .map(|j| {
                let u = (std::f64::consts::PI * j as f64 / nn as f64).cos();
                f((u + 1.0) / 2.0)
            })
            .collect();
        // DCT-I Chebyshev coefficients.
        let mut theta = vec![0.0; nn + 1];
        for (k, th) in theta.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, &fj) in samples.iter().enumerate() {
                let w = if j == 0 || j == nn { 0.5 } else { 1.0 };
                s += w * fj * (std::f64::consts::PI * (j * k) as f64 / nn as f64).cos();
            }
            *th = 2.0 * s / nn as f64;
        }
        theta[0] *= 0.5;
        theta[nn] *= 0.5;
        let maxc = theta.iter().map(|t| t.abs()).fold(0.0, f64::max);
        // T_k(2x-1) in monomial basis.
        let u = CPoly::from_real(&[-1.0, 2.0]);
        let mut t_prev = CPoly::from_real(&[1.0]);
        let mut t_cur = u.clone();
        let mut acc = t_prev.scale(c(theta[0], 0.0));
        for (k, &th) in theta.iter().enumerate().skip(1) {
            if th.abs() > 1e-15 * maxc.max(1.0) {
                acc = acc.add(&t_cur.scale(c(th, 0.0)));
            }
            if k < nn {
                let next = u.mul(&t_cur).scale(c(2.0, 0.0)).add(&t_prev.scale(c(-1.0, 0.0)));
                t_prev = t_cur;
                t_cur = next;
            }
        }
        Datum { poly: acc }
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.poly.eval_real(x)
    }

    pub fn deriv_at(&self, k: usize, x: f64) -> C64 {
        self.poly.deriv_at(k, x)
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// `S f = (-i)^n f^(n)` as a new datum.
    pub fn apply_s(&self, n: usize) -> Datum {
        let mut p = self.poly.clone();
        for _ in 0..n {
            p = p.derivative();
        }
        Datum {
            poly: p.scale((-I).powu(n as u32)),
        }
    }

    pub fn add(&self, other: &Datum) -> Datum {
        Datum {
            poly: self.poly.add(&other.poly),
        }
    }

    pub fn scale(&self, k: C64) -> Datum {
        Datum {
            poly: self.poly.scale(k),
        }
    }
}

// JSON forms ---------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum DatumJson {
    #[serde(rename = "poly")]
    Poly { coeffs: Vec<C64> },
}

impl DatumJson {
    pub fn to_datum(&self) -> Datum {
        match self {
            DatumJson::Poly { coeffs } => Datum::from_poly(CPoly::new(coeffs.clone())),
        }
    }

    pub fn from_datum(d: &Datum) -> Self {
        DatumJson::Poly {
            coeffs: d.poly.c.clone(),
        }
    }
}

/// On-disk problem file: spec plus optional datum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    pub a: C64,
    pub bc: Vec<BoundaryRow>,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<DatumJson>,
}

impl ProblemFile {
    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            n: self.n,
            a: self.a,
            bc: self.bc.clone(),
            label: self.label.clone(),
        }
    }
}

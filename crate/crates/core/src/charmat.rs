//! Adjoint characteristic matrix M(λ), its determinant Δ(λ), cofactor minors
//! X_{lj}(λ) and the forward-transform kernels φ±_λ(x).
//!
//! Entries are M_{kj}(λ) = M⁺_{kj}(λ) + M⁻_{kj}(λ) e^{-i α^{k-1} λ} with
//! polynomial parts M±_{kj}(λ) = Σ_r (-i α^{k-1} λ)^r (b*/β*)_{jr} of degree
//! at most n-1. All evaluation runs on scaled-exponent values (`num::Sc`):
//! the exponentials span thousands of orders of magnitude across the contour
//! systems and the determinants are strongly graded, so plain f64 assembly
//! would overflow or lose them entirely.

use crate::num::{self, c, C64, Sc, I};
use crate::problem::{AdjointData, ValidatedProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Plus,
    Minus,
}

impl Half {
    pub fn other(self) -> Half {
        match self {
            Half::Plus => Half::Minus,
            Half::Minus => Half::Plus,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CharError {
    #[error("λ = {0} is within the determinant floor of a characteristic zero")]
    NearCharacteristicZero(C64),
}

/// Value of a forward-transform kernel φ±_λ(x).
#[derive(Debug, Clone, Copy)]
pub struct KernelValue {
    pub value: Sc,
    pub half: Half,
}

/// The adjoint characteristic matrix in coefficient form.
#[derive(Debug, Clone)]
pub struct CharMatrix {
    n: usize,
    alpha: C64,
    bstar: Vec<Vec<C64>>,
    betastar: Vec<Vec<C64>>,
}

impl CharMatrix {
    pub fn new(vp: &ValidatedProblem, adj: &AdjointData) -> Self {
        let n = vp.n();
        // Degree bound: each M±_{kj} is a polynomial of degree <= n-1, which
        // is structural as long as the coefficient tables have n entries.
        assert!(adj.bstar.len() == n && adj.betastar.len() == n);
        for j in 0..n {
            assert!(adj.bstar[j].len() == n && adj.betastar[j].len() == n);
        }
        CharMatrix {
            n,
            alpha: (2.0 * std::f64::consts::PI * I / n as f64).exp(),
            bstar: adj.bstar.clone(),
            betastar: adj.betastar.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    /// Unscaled M(λ) together with its M± parts. Intended for diagnostics
    /// and tests at moderate |λ|.
    pub fn matrix_parts(&self, lm: C64) -> (Vec<Vec<C64>>, Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let ev = self.eval(lm);
        let n = self.n;
        let mut m = vec![vec![c(0.0, 0.0); n]; n];
        for k in 0..n {
            for j in 0..n {
                m[k][j] = ev.entries[k][j].value();
            }
        }
        (m, ev.mplus.clone(), ev.mminus.clone())
    }

    /// Evaluation snapshot at λ. Immutable; safe to share across threads.
    pub fn eval(&self, lm: C64) -> CharEval {
        let n = self.n;
        let mut w = Vec::with_capacity(n);
        let mut rot = c(1.0, 0.0);
        for _ in 0..n {
            w.push(rot * lm);
            rot *= self.alpha;
        }
        let mut entries = vec![vec![Sc::zero(); n]; n];
        let mut mplus = vec![vec![c(0.0, 0.0); n]; n];
        let mut mminus = vec![vec![c(0.0, 0.0); n]; n];
        for k in 0..n {
            let z = -I * w[k];
            for j in 0..n {
                let p = horner(&self.bstar[j], z);
                let q = horner(&self.betastar[j], z);
                mplus[k][j] = p;
                mminus[k][j] = q;
                entries[k][j] = Sc::plain(p).add(Sc::new(q, z));
            }
        }
        let det = num::sc_det(entries.clone());
        CharEval {
            n,
            lm,
            alpha: self.alpha,
            w,
            entries,
            mplus,
            mminus,
            det,
        }
    }

    /// Δ(λ) = det M(λ).
    pub fn det_sc(&self, lm: C64) -> Sc {
        self.eval(lm).det
    }

    /// Δ'(λ) by analytic differentiation of the exponential-polynomial rows:
    /// Σ_l det(M with row l replaced by M'_l).
    pub fn det_deriv_sc(&self, lm: C64) -> Sc {
        let ev = self.eval(lm);
        let n = self.n;
        let mut total = Sc::zero();
        for l in 0..n {
            let z = -I * ev.w[l];
            let dz = -I * self.alpha.powu(l as u32);
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let dp = horner_deriv(&self.bstar[j], z) * dz;
                let dq = horner_deriv(&self.betastar[j], z) * dz;
                let q = ev.mminus[l][j];
                row.push(Sc::plain(dp).add(Sc::new(dq + q * dz, z)));
            }
            total = total.add(ev.det_with_row(l, row));
        }
        total
    }

    /// Guard against evaluation too close to a characteristic zero. Healthy
    /// points pass a cheap determinant-magnitude tier (the spec's det_floor,
    /// 1e-13 relative to the Hadamard row bound); suspicious points get the
    /// precise first-order distance test |Δ/Δ'|.
    pub fn guard(&self, ev: &CharEval) -> Result<(), CharError> {
        if ev.det.ln_norm() > ev.hadamard_ln() + (1e-13_f64).ln() {
            return Ok(());
        }
        let dp = self.det_deriv_sc(ev.lm);
        if dp.is_zero() {
            return Err(CharError::NearCharacteristicZero(ev.lm));
        }
        let dist = ev.det.div(dp);
        if dist.ln_norm() < (1e-8 * (1.0 + ev.lm.norm())).ln() {
            return Err(CharError::NearCharacteristicZero(ev.lm));
        }
        Ok(())
    }

    /// Forward-transform kernel φ±_λ(x) (the conjugated kernel multiplying f
    /// inside F±).
    pub fn kernel(&self, ev: &CharEval, x: f64, half: Half) -> Result<KernelValue, CharError> {
        self.guard(ev)?;
        let mut s = Sc::zero();
        for l in 0..self.n {
            let d = ev.d_row1(l, half);
            s = s.add(d.mul(Sc::expc(-I * ev.w[l] * x)));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let value = match half {
            Half::Plus => s.div(ev.det).scale(c(1.0 / two_pi, 0.0)),
            Half::Minus => s
                .div(ev.det)
                .mul(Sc::expc(-I * ev.lm))
                .scale(c(-1.0 / two_pi, 0.0)),
        };
        Ok(KernelValue { value, half })
    }
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = c(0.0, 0.0);
    for &ck in coeffs.iter().rev() {
        acc = acc * z + ck;
    }
    acc
}

fn horner_deriv(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = c(0.0, 0.0);
    for (r, &ck) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * z + ck * r as f64;
    }
    acc
}

/// Snapshot of M at a fixed λ.
#[derive(Debug, Clone)]
pub struct CharEval {
    pub n: usize,
    pub lm: C64,
    pub alpha: C64,
    /// w_k = α^{k-1} λ
    pub w: Vec<C64>,
    /// M entries as scaled-exponent values
    pub entries: Vec<Vec<Sc>>,
    /// unscaled polynomial parts M±_{kj}(λ)
    pub mplus: Vec<Vec<C64>>,
    pub mminus: Vec<Vec<C64>>,
    pub det: Sc,
}

impl CharEval {
    /// log of the Hadamard-style scale Π_k max_j |M_{kj}|.
    pub fn hadamard_ln(&self) -> f64 {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.ln_norm())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum()
    }

    /// det of M with row `l` replaced.
    pub fn det_with_row(&self, l: usize, row: Vec<Sc>) -> Sc {
        let mut m = self.entries.clone();
        m[l] = row;
        num::sc_det(m)
    }

    /// det of M with row l replaced by the polynomial row M±_{1j}(λ).
    pub fn d_row1(&self, l: usize, half: Half) -> Sc {
        let src = match half {
            Half::Plus => &self.mplus,
            Half::Minus => &self.mminus,
        };
        let row = src[0].iter().map(|&v| Sc::plain(v)).collect();
        self.det_with_row(l, row)
    }

    /// Cofactor minor det X_{lj} = (-1)^{l+j} det(M without row l, column j),
    /// 1-based indices; equals the cyclically wrapped submatrix determinant
    /// for odd n and satisfies Σ_l det X_{lj} M_{lk} = Δ δ_{jk} for all n.
    pub fn minor_sc(&self, l: usize, j: usize) -> Sc {
        assert!((1..=self.n).contains(&l) && (1..=self.n).contains(&j));
        let mut sub = Vec::with_capacity(self.n - 1);
        for (k, row) in self.entries.iter().enumerate() {
            if k == l - 1 {
                continue;
            }
            let r: Vec<Sc> = row
                .iter()
                .enumerate()
                .filter(|(cidx, _)| *cidx != j - 1)
                .map(|(_, &v)| v)
                .collect();
            sub.push(r);
        }
        let sign = if (l + j) % 2 == 0 { 1.0 } else { -1.0 };
        num::sc_det(sub).scale(c(sign, 0.0))
    }
}

/// Characteristic-function interface used by the zero finder: any evaluator
/// of Δ and Δ' (det M based or an explicit fixture form).
pub trait CharFn: Sync {
    fn delta_sc(&self, lm: C64) -> Sc;
    fn deriv_sc(&self, lm: C64) -> Sc;

    /// Newton step Δ/Δ'.
    fn newton_step(&self, lm: C64) -> C64 {
        let d = self.delta_sc(lm);
        let dp = self.deriv_sc(lm);
        if dp.is_zero() {
            return c(f64::NAN, f64::NAN);
        }
        d.div(dp).value()
    }

    /// |Δ/Δ'|: first-order distance to the nearest zero.
    fn newton_residual(&self, lm: C64) -> f64 {
        self.newton_step(lm).norm()
    }
}

impl CharFn for CharMatrix {
    fn delta_sc(&self, lm: C64) -> Sc {
        self.det_sc(lm)
    }

    fn deriv_sc(&self, lm: C64) -> Sc {
        self.det_deriv_sc(lm)
    }
}

impl CharFn for crate::fixtures::FixtureKind {
    fn delta_sc(&self, lm: C64) -> Sc {
        Sc::plain(self.delta(lm))
    }

    fn deriv_sc(&self, lm: C64) -> Sc {
        Sc::plain(self.delta_deriv(lm))
    }
}

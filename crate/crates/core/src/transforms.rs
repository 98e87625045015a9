//! Forward spectral transforms F±_λ(f) and the Fourier-type transform
//! f̂(λ) = ∫₀¹ e^{-iλx} f(x) dx, exact for polynomial data.
//!
//! The moment integrals ∫ x^m e^{-iλx} dx are computed by the directionally
//! stable recursion (forward for |λ| above the degree, inhomogeneous
//! backward recurrence below it, Taylor near 0) and also as rational parts
//! f̂ = A(λ) + e^{-iλ} B(λ), which is what the contour planner's jump-split
//! rays integrate.

use crate::charmat::{CharError, CharMatrix, Half};
use crate::fixtures::{alpha3, FixtureKind};
use crate::num::{c, cexp, C64, Sc, I};
use crate::problem::{adjoint_boundary_forms, Datum, ProblemError, ValidatedProblem};

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("spectral function undefined on half {0:?} at λ={1}")]
    UndefinedHalf(Half, C64),
}

// ---------------------------------------------------------------------------
// Moment integrals and f̂.
// ---------------------------------------------------------------------------

/// I_m(λ) = ∫₀¹ x^m e^{-iλx} dx for m = 0..=deg.
pub fn moment_integrals(lm: C64, deg: usize) -> Vec<C64> {
    let a = lm.norm();
    if a < 0.5 {
        return (0..=deg).map(|m| moment_taylor(lm, m)).collect();
    }
    let ex = cexp(-I * lm);
    let mut out = vec![c(0.0, 0.0); deg + 1];
    out[0] = (c(1.0, 0.0) - ex) / (I * lm);
    if deg == 0 {
        return out;
    }
    // Forward is contractive while m < |λ|.
    let m_switch = deg.min((a as usize).saturating_sub(1));
    for m in 1..=m_switch {
        out[m] = (I / lm) * (ex - m as f64 * out[m - 1]);
    }
    if m_switch == deg {
        return out;
    }
    // Inhomogeneous backward recurrence: the seed error contracts by |λ|/m
    // per step, so pick the start high enough that it damps below 1e-60
    // even against the e^{Im λ} scale of the true values.
    let ln_seed = lm.im.max(0.0);
    let mut top = deg + 24;
    loop {
        let mut damp = 0.0;
        for m in (m_switch + 2)..=top {
            damp += (a / m as f64).ln();
        }
        if ln_seed + damp < -140.0 || top > deg + 600 {
            break;
        }
        top += 16;
    }
    let mut j = c(0.0, 0.0);
    for m in (m_switch + 1..=top).rev() {
        j = (ex + I * lm * j) / (m as f64);
        // j now holds I_{m-1}
        if m - 1 <= deg && m - 1 > m_switch {
            out[m - 1] = j;
        }
    }
    out
}

fn moment_taylor(lm: C64, m: usize) -> C64 {
    let z = -I * lm;
    let mut term = c(1.0, 0.0);
    let mut acc = term / (m as f64 + 1.0);
    for k in 1..80 {
        term = term * z / (k as f64);
        let add = term / ((m + k + 1) as f64);
        acc += add;
        if add.norm() < 1e-20 * acc.norm().max(1e-20) {
            break;
        }
    }
    acc
}

/// f̂(λ) = ∫₀¹ e^{-iλx} f(x) dx for monomial data.
pub fn fhat(f: &Datum, lm: C64) -> C64 {
    if f.poly.c.is_empty() {
        return c(0.0, 0.0);
    }
    let moments = moment_integrals(lm, f.poly.degree());
    f.poly
        .c
        .iter()
        .zip(&moments)
        .map(|(&cm, &im)| cm * im)
        .sum()
}

/// Rational-part tables of f̂ = A(λ) + e^{-iλ} B(λ):
/// A(λ) = Σ_p α_p u^p, B(λ) = -Σ_p β_p u^p with u = 1/(iλ).
#[derive(Debug, Clone)]
pub struct HatParts {
    alpha: Vec<C64>,
    beta: Vec<C64>,
    pub degree: usize,
}

impl HatParts {
    pub fn new(f: &Datum) -> Self {
        let deg = f.poly.degree();
        let co = &f.poly.c;
        let mut fact = vec![1.0_f64; deg + 2];
        for m in 1..=deg + 1 {
            fact[m] = fact[m - 1] * m as f64;
        }
        let mut alpha = vec![c(0.0, 0.0); deg + 2];
        let mut beta = vec![c(0.0, 0.0); deg + 2];
        for p in 1..=deg + 1 {
            if let Some(&cp) = co.get(p - 1) {
                alpha[p] = cp * fact[p - 1];
            }
            let mut b = c(0.0, 0.0);
            for (m, &cm) in co.iter().enumerate().skip(p.saturating_sub(1)) {
                if m + 1 >= p {
                    b += cm * (fact[m] / fact[m + 1 - p]);
                }
            }
            beta[p] = b;
        }
        HatParts {
            alpha,
            beta,
            degree: deg,
        }
    }

    /// (A, B) at λ. Poles only at λ = 0; accurate once |λ| is comfortably
    /// above the datum degree (the planner anchors split rays there).
    pub fn eval(&self, lm: C64) -> (C64, C64) {
        let u = c(1.0, 0.0) / (I * lm);
        let mut a = c(0.0, 0.0);
        let mut b = c(0.0, 0.0);
        for p in (1..self.alpha.len()).rev() {
            a = (a + self.alpha[p]) * u;
            b = (b + self.beta[p]) * u;
        }
        (a, -b)
    }
}

/// f̂ as a scaled value, stable for any Im λ: below the overflow scale the
/// direct recursion is used, above it the rational split carries the
/// exponential factor symbolically.
pub fn fhat_sc(f: &Datum, parts: &HatParts, w: C64) -> Sc {
    if w.im < 30.0 {
        Sc::plain(fhat(f, w))
    } else {
        let (a, b) = parts.eval(w);
        Sc::plain(a).add(Sc::new(b, -I * w))
    }
}

// ---------------------------------------------------------------------------
// General forward transform.
// ---------------------------------------------------------------------------

/// Validated problem bundled with its adjoint data and characteristic
/// matrix: everything the transforms need.
#[derive(Debug, Clone)]
pub struct TransformEngine {
    pub vp: ValidatedProblem,
    pub adj: crate::problem::AdjointData,
    pub cm: CharMatrix,
}

impl TransformEngine {
    pub fn new(vp: ValidatedProblem) -> Result<Self, ProblemError> {
        let adj = adjoint_boundary_forms(&vp)?;
        let cm = CharMatrix::new(&vp, &adj);
        Ok(TransformEngine { vp, adj, cm })
    }

    pub fn n(&self) -> usize {
        self.vp.n()
    }

    pub fn a(&self) -> C64 {
        self.vp.a()
    }

    /// F±_λ(f) by the determinant form
    /// F⁺ = (1/2πΔ) Σ_l det(M with row l → M⁺ row 1) f̂(α^{l-1}λ),
    /// F⁻ the same with M⁻ row 1 and the extra factor -e^{-iλ}.
    pub fn forward(
        &self,
        f: &Datum,
        parts: &HatParts,
        lm: C64,
        half: Half,
    ) -> Result<Sc, TransformError> {
        let ev = self.cm.eval(lm);
        self.cm.guard(&ev)?;
        let mut s = Sc::zero();
        for l in 0..self.n() {
            let d = ev.d_row1(l, half);
            s = s.add(d.mul(fhat_sc(f, parts, ev.w[l])));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        Ok(match half {
            Half::Plus => s.div(ev.det).scale(c(1.0 / two_pi, 0.0)),
            Half::Minus => s
                .div(ev.det)
                .mul(Sc::expc(-I * lm))
                .scale(c(-1.0 / two_pi, 0.0)),
        })
    }
}

// ---------------------------------------------------------------------------
// Spectral functions: what the quadrature plans integrate.
// ---------------------------------------------------------------------------

/// A half-tagged spectral function λ → F(λ). `jump_parts` exposes the
/// rational split of the jump F⁺ - F⁻ (including the 1/2π), which the
/// planner integrates on deformed rays where the meromorphic parts cannot
/// go.
pub trait SpectralFn: Sync {
    fn eval(&self, lm: C64, half: Half) -> Result<Sc, TransformError>;

    /// (A, B) with F⁺(λ) - F⁻(λ) = A(λ) + e^{-iλ}B(λ); None when no such
    /// split is available.
    fn jump_parts(&self, lm: C64) -> Option<(C64, C64)>;

    /// Degree of the underlying polynomial data (sizing for split anchors).
    fn datum_degree(&self) -> usize {
        0
    }
}

/// F±_λ(f) for a fixed datum through the general engine.
pub struct ForwardTransform<'a> {
    pub eng: &'a TransformEngine,
    pub f: Datum,
    parts: HatParts,
}

impl<'a> ForwardTransform<'a> {
    pub fn new(eng: &'a TransformEngine, f: Datum) -> Self {
        let parts = HatParts::new(&f);
        ForwardTransform { eng, f, parts }
    }
}

impl SpectralFn for ForwardTransform<'_> {
    fn eval(&self, lm: C64, half: Half) -> Result<Sc, TransformError> {
        self.eng.forward(&self.f, &self.parts, lm, half)
    }

    fn jump_parts(&self, lm: C64) -> Option<(C64, C64)> {
        let (a, b) = self.parts.eval(lm);
        let two_pi = 2.0 * std::f64::consts::PI;
        Some((a / two_pi, b / two_pi))
    }

    fn datum_degree(&self) -> usize {
        self.f.poly.degree()
    }
}

/// λ^pow · F(λ): the weighted functions entering the diagonalization
/// identities (pow = n on Γ₀, pow = -n on Γ_a).
pub struct PowerWeighted<'a> {
    pub inner: &'a dyn SpectralFn,
    pub pow: i32,
}

impl SpectralFn for PowerWeighted<'_> {
    fn eval(&self, lm: C64, half: Half) -> Result<Sc, TransformError> {
        Ok(self.inner.eval(lm, half)?.scale(lm.powi(self.pow)))
    }

    fn jump_parts(&self, lm: C64) -> Option<(C64, C64)> {
        let (a, b) = self.inner.jump_parts(lm)?;
        let w = lm.powi(self.pow);
        Some((a * w, b * w))
    }

    fn datum_degree(&self) -> usize {
        self.inner.datum_degree()
    }
}

// ---------------------------------------------------------------------------
// Explicit LKdV fixtures (paper normalization), for cross-validation.
// ---------------------------------------------------------------------------

/// Hand-derived Δ, ζ± evaluators for the two LKdV problems. Plain complex
/// arithmetic: intended for moderate |Im λ| (tests, identities), not deep
/// contour work.
pub struct LKdVFixture {
    pub kind: FixtureKind,
}

impl LKdVFixture {
    pub fn new(kind: FixtureKind) -> Self {
        assert!(matches!(kind, FixtureKind::Lkdv1 | FixtureKind::Lkdv2));
        LKdVFixture { kind }
    }

    pub fn delta(&self, lm: C64) -> C64 {
        self.kind.delta(lm)
    }

    pub fn zeta_plus(&self, f: &Datum, lm: C64) -> C64 {
        let al = alpha3();
        let al2 = al * al;
        let e = |z: C64| z.exp();
        let f0 = fhat(f, lm);
        let f1 = fhat(f, al * lm);
        let f2 = fhat(f, al2 * lm);
        match self.kind {
            FixtureKind::Lkdv1 => {
                f0 * (e(I * lm) + 2.0 * al * e(-I * al * lm) + 2.0 * al2 * e(-I * al2 * lm))
                    + f1 * (al * e(I * al * lm) - 2.0 * al * e(-I * lm))
                    + f2 * (al2 * e(I * al2 * lm) - 2.0 * al2 * e(-I * lm))
            }
            FixtureKind::Lkdv2 => {
                f0 * (al * e(-I * al * lm) + al2 * e(-I * al2 * lm))
                    - (al * f1 + al2 * f2) * e(-I * lm)
            }
            FixtureKind::HeatDirichlet => unreachable!(),
        }
    }

    pub fn zeta_minus(&self, f: &Datum, lm: C64) -> C64 {
        let al = alpha3();
        let al2 = al * al;
        let e = |z: C64| z.exp();
        let f0 = fhat(f, lm);
        let f1 = fhat(f, al * lm);
        let f2 = fhat(f, al2 * lm);
        match self.kind {
            FixtureKind::Lkdv1 => {
                -f0 * (c(2.0, 0.0) + al2 * e(-I * al * lm) + al * e(-I * al2 * lm))
                    - al * f1 * (c(2.0, 0.0) - e(-I * al2 * lm))
                    - al2 * f2 * (c(2.0, 0.0) - e(-I * al * lm))
            }
            FixtureKind::Lkdv2 => -f0 - al * f1 - al2 * f2,
            FixtureKind::HeatDirichlet => unreachable!(),
        }
    }

    /// F± in fixture normalization: F⁺ = ζ⁺/2πΔ, F⁻ = e^{-iλ} ζ⁻/2πΔ.
    pub fn forward(&self, f: &Datum, lm: C64, half: Half) -> C64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let d = self.delta(lm);
        match half {
            Half::Plus => self.zeta_plus(f, lm) / (two_pi * d),
            Half::Minus => (-I * lm).exp() * self.zeta_minus(f, lm) / (two_pi * d),
        }
    }
}

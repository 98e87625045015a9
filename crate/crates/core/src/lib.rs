//! Transform-pair machinery for two-point linear constant-coefficient
//! evolution problems on the unit interval: problem-tailored spectral
//! transforms built from the adjoint characteristic matrix, complex contour
//! quadrature for their inversion, and numerical certification of the
//! augmented-eigenfunction identities behind them.
//!
//! The high-level entry point is [`Ibvp`], which bundles a validated
//! problem, its zero catalog and transform engine, and exposes
//! reconstruction, evolution and residue-series evaluation. The modules
//! follow the pipeline: [`problem`] (boundary forms, adjoints, data),
//! [`charmat`] (characteristic matrix and kernels), [`zeros`] (Δ zero
//! catalog), [`contours`] + [`plan`] (contour systems and deformed
//! quadrature), [`transforms`] (forward/inverse transforms), [`solver`]
//! (q(x,t) evaluation) and [`verify`] (spectral certification).

pub mod charmat;
pub mod cli;
pub mod contours;
pub mod exec;
pub mod fixtures;
pub mod num;
pub mod plan;
pub mod problem;
pub mod solver;
pub mod transforms;
pub mod verify;
pub mod zeros;

use num::{c, C64};

pub use charmat::{CharFn, CharMatrix, Half};
pub use plan::{ContourMode, PlanRequest, QuadraturePlan};
pub use problem::{Datum, ProblemSpec, ValidatedProblem};
pub use transforms::{ForwardTransform, SpectralFn, TransformEngine};
pub use zeros::ZeroCatalog;

/// Interior band for reconstruction/evaluation requests; endpoint values
/// are recoverable only as interior limits.
pub const DEFAULT_X_MIN: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Problem(#[from] problem::ProblemError),
    #[error(transparent)]
    Zeros(#[from] zeros::ZeroError),
    #[error(transparent)]
    Plan(#[from] plan::PlanError),
    #[error(transparent)]
    Transform(#[from] transforms::TransformError),
    #[error("{0}")]
    Invalid(String),
}

/// How the conditionally convergent residue series is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    None,
    /// mean of the trailing half of the partial sums
    TailMean,
}

/// A problem bundled with everything needed to evaluate its transform pair:
/// validated spec, adjoint characteristic matrix, zero catalog (fixture
/// determinants are used for the built-in problems so that Δ' carries the
/// hand-derived normalization) and separation radius ε.
pub struct Ibvp {
    pub eng: TransformEngine,
    pub cat: ZeroCatalog,
    pub fixture: Option<fixtures::FixtureKind>,
    pub x_min: f64,
    pub quad_tol: f64,
}

impl Ibvp {
    pub fn new(spec: ProblemSpec, radius: f64) -> Result<Self, Error> {
        Self::with_cache(spec, radius, None)
    }

    pub fn with_cache(
        spec: ProblemSpec,
        radius: f64,
        cache_dir: Option<&std::path::Path>,
    ) -> Result<Self, Error> {
        let vp = spec.validate()?;
        let fixture = fixtures::detect(&vp.spec);
        let eng = TransformEngine::new(vp)?;
        let angles = contours::edge_angles(&contours::sectors(eng.n(), eng.a()));
        let opts = zeros::LocateOptions {
            edge_angles: angles,
            order_hint: eng.n(),
            ..Default::default()
        };
        let charfn: &dyn CharFn = match &fixture {
            Some(k) => k,
            None => &eng.cm,
        };
        let key = eng.vp.cache_key();
        let cache_path = cache_dir.map(|d| d.join(format!("zeros-{key:016x}-{radius}.json")));
        let cat = match cache_path
            .as_ref()
            .and_then(|p| zeros::cache_load(p, key, radius, charfn))
        {
            Some(cat) => cat,
            None => {
                let cat = zeros::locate_zeros(charfn, radius, &opts)?;
                if let Some(p) = &cache_path {
                    let _ = std::fs::create_dir_all(p.parent().unwrap());
                    let _ = zeros::cache_store(p, key, &cat);
                }
                cat
            }
        };
        Ok(Ibvp {
            eng,
            cat,
            fixture,
            x_min: DEFAULT_X_MIN,
            quad_tol: 1e-10,
        })
    }

    pub fn n(&self) -> usize {
        self.eng.n()
    }

    pub fn a(&self) -> C64 {
        self.eng.a()
    }

    pub fn forward_fn(&self, f: Datum) -> ForwardTransform<'_> {
        ForwardTransform::new(&self.eng, f)
    }

    pub fn clamp_x(&self, x: f64) -> f64 {
        x.clamp(self.x_min, 1.0 - self.x_min)
    }

    fn band_of(&self, xs: &[f64]) -> (f64, f64) {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (self.clamp_x(lo.min(hi)), self.clamp_x(hi.max(lo)))
    }

    pub fn request(&self, t: f64, xs: &[f64], degree: usize) -> PlanRequest {
        let (lo, hi) = self.band_of(xs);
        PlanRequest {
            t,
            x_min: lo,
            x_max: hi,
            tol: self.quad_tol,
            budget: 40.0,
            datum_degree: degree,
            arc_radius: 1.0,
            require_x_decay: false,
        }
    }

    pub fn plan(&self, mode: ContourMode, req: &PlanRequest) -> Result<QuadraturePlan, Error> {
        Ok(plan::plan_gamma(self.n(), self.a(), &self.cat, mode, req)?)
    }

    /// Inverse transform of an arbitrary spectral function at points xs:
    /// Σ over plan nodes of w·e^{iλx}e^{-aλⁿt}·F(λ) along the deformed
    /// Γ₀ ∪ Γₐ system.
    pub fn inverse_transform(
        &self,
        sf: &dyn SpectralFn,
        xs: &[f64],
        t: f64,
        mode: ContourMode,
    ) -> Result<(Vec<C64>, f64), Error> {
        let req = self.request(t, xs, sf.datum_degree());
        let plan = self.plan(mode, &req)?;
        let sample = plan.sample(sf)?;
        let vals = exec::map(xs, |&x| sample.eval_at(self.clamp_x(x)));
        Ok((vals, sample.achieved_tol))
    }

    /// Reconstruction f_x(F_λ(f)) on a grid (t = 0).
    pub fn reconstruct(&self, f: &Datum, xs: &[f64]) -> Result<Vec<C64>, Error> {
        let ft = self.forward_fn(f.clone());
        Ok(self
            .inverse_transform(&ft, xs, 0.0, ContourMode::General)?
            .0)
    }

    /// Extend the catalog until it holds at least `count` zeros (asymptotic
    /// seeds for the first LKdV fixture, growing subdivision otherwise).
    pub fn ensure_zero_count(&mut self, count: usize) -> Result<(), Error> {
        if self.cat.zeros.len() >= count {
            return Ok(());
        }
        if self.fixture == Some(fixtures::FixtureKind::Lkdv1) {
            // 6 zeros per ring, rings 2π apart
            let need_r = (count as f64 / 6.0 + 1.5) * 2.0 * std::f64::consts::PI;
            self.cat = zeros::extend_lkdv1_seeded(&self.cat, need_r.max(self.cat.radius));
            return Ok(());
        }
        let charfn: &dyn CharFn = match &self.fixture {
            Some(k) => k,
            None => &self.eng.cm,
        };
        let mut r = self.cat.radius;
        for _ in 0..5 {
            if self.cat.zeros.len() >= count {
                break;
            }
            r *= 1.5;
            let angles = contours::edge_angles(&contours::sectors(self.n(), self.a()));
            self.cat = zeros::locate_zeros(
                charfn,
                r,
                &zeros::LocateOptions {
                    edge_angles: angles,
                    order_hint: self.n(),
                    ..Default::default()
                },
            )?;
        }
        if self.cat.zeros.len() < count {
            return Err(Error::Invalid(format!(
                "could not catalog {count} zeros (have {})",
                self.cat.zeros.len()
            )));
        }
        Ok(())
    }

    /// Residue-series inverse: Σ over the N smallest-|σ| zeros of the
    /// ε-circle integrals ∮ e^{iλx} e^{-aλⁿt} F(λ) dλ, with optional tail
    /// averaging of the partial sums (the series converges conditionally).
    pub fn residue_series(
        &self,
        sf: &dyn SpectralFn,
        x: f64,
        t: f64,
        n_terms: usize,
        averaging: Averaging,
    ) -> Result<C64, Error> {
        if n_terms == 0 {
            return Ok(c(0.0, 0.0));
        }
        if self.cat.zeros.len() < n_terms {
            return Err(Error::Invalid(format!(
                "catalog holds {} zeros, series needs {n_terms} (call ensure_zero_count)",
                self.cat.zeros.len()
            )));
        }
        let x = self.clamp_x(x);
        let terms = exec::try_map(&self.cat.zeros[..n_terms], |z| {
            self.circle_integral(sf, z.sigma, self.cat.epsilon, self.cat.half_of(z.sigma), x, t)
        })?;
        let partials: Vec<C64> = terms
            .iter()
            .scan(c(0.0, 0.0), |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        Ok(match averaging {
            Averaging::None => *partials.last().unwrap(),
            Averaging::TailMean => {
                let k = partials.len().div_ceil(2);
                let tail = &partials[partials.len() - k..];
                tail.iter().sum::<C64>() / k as f64
            }
        })
    }

    /// ∮_{C(σ,ρ)} e^{iλx} e^{-aλⁿt} F_half(λ) dλ by trapezoid doubling.
    pub fn circle_integral(
        &self,
        sf: &dyn SpectralFn,
        sigma: C64,
        radius: f64,
        half: Half,
        x: f64,
        t: f64,
    ) -> Result<C64, Error> {
        let a = self.a();
        let n = self.n() as u32;
        let eval = |nn: usize| -> Result<C64, Error> {
            let mut s = c(0.0, 0.0);
            for k in 0..nn {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / nn as f64;
                let e = c(th.cos(), th.sin());
                let lm = sigma + radius * e;
                let dz = radius * c(-th.sin(), th.cos()) * (2.0 * std::f64::consts::PI / nn as f64);
                let v = sf.eval(lm, half)?;
                s += dz * v.m * num::cexp(v.shift + num::I * lm * x - a * lm.powu(n) * t);
            }
            Ok(s)
        };
        let mut nn = 16;
        let mut prev = eval(nn)?;
        for _ in 0..9 {
            nn *= 2;
            let cur = eval(nn)?;
            if (cur - prev).norm() < self.quad_tol * 0.5 {
                return Ok(cur);
            }
            prev = cur;
        }
        Ok(prev)
    }
}

//! Characteristic-zero location: argument-principle counting on rectangles,
//! recursive subdivision + Newton refinement, separation parameter ε, and
//! asymptotically seeded catalog extension for the first LKdV problem.

use crate::charmat::{CharFn, Half};
use crate::fixtures::{lkdv1_seed, FixtureKind, SeedBranch};
use crate::num::{c, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ZeroError {
    #[error("search boundary stays too close to a zero after {0} perturbation attempts")]
    BoundaryTooCloseToZero(usize),
    #[error("subdivision budget exhausted near {0}")]
    NonConvergence(C64),
    #[error("winding number not close to an integer ({0:.3})")]
    NonIntegerWinding(f64),
    #[error("cache io: {0}")]
    CacheIo(String),
}

/// A located zero of Δ with its order and an optional asymptotic branch tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralZero {
    pub sigma: C64,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
}

/// All zeros inside the search square [-R,R]^2 plus the separation radius ε
/// used for every contour construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroCatalog {
    pub zeros: Vec<SpectralZero>,
    pub epsilon: f64,
    pub radius: f64,
    /// λ=0 is a structural zero whose transform singularity is removable;
    /// recorded so contours still enclose it consistently.
    #[serde(default)]
    pub removable_at_origin: bool,
}

impl ZeroCatalog {
    /// Half-plane assignment: zeros with Im σ > -ε belong to the closed
    /// upper half-plane (ties near the axis go up, deterministically).
    pub fn half_of(&self, sigma: C64) -> Half {
        if sigma.im > -self.epsilon {
            Half::Plus
        } else {
            Half::Minus
        }
    }

    pub fn total_order(&self) -> usize {
        self.zeros.iter().map(|z| z.order).sum()
    }

    pub fn min_separation(&self) -> f64 {
        let mut sep = f64::INFINITY;
        for (i, a) in self.zeros.iter().enumerate() {
            for b in &self.zeros[i + 1..] {
                sep = sep.min((a.sigma - b.sigma).norm());
            }
        }
        sep
    }

    pub fn nearest_zero_distance(&self, p: C64) -> f64 {
        self.zeros
            .iter()
            .map(|z| (z.sigma - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn sort(&mut self) {
        self.zeros.sort_by(|a, b| {
            let ka = (a.sigma.norm(), a.sigma.arg());
            let kb = (b.sigma.norm(), b.sigma.arg());
            ka.partial_cmp(&kb).unwrap()
        });
    }
}

// ---------------------------------------------------------------------------
// Argument-principle counting.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn centered(center: C64, half_w: f64, half_h: f64) -> Self {
        Rect {
            re_lo: center.re - half_w,
            re_hi: center.re + half_w,
            im_lo: center.im - half_h,
            im_hi: center.im + half_h,
        }
    }

    fn corners(&self) -> [C64; 4] {
        [
            c(self.re_lo, self.im_lo),
            c(self.re_hi, self.im_lo),
            c(self.re_hi, self.im_hi),
            c(self.re_lo, self.im_hi),
        ]
    }

    fn contains(&self, p: C64) -> bool {
        p.re >= self.re_lo && p.re <= self.re_hi && p.im >= self.im_lo && p.im <= self.im_hi
    }

    fn diam(&self) -> f64 {
        (self.re_hi - self.re_lo).hypot(self.im_hi - self.im_lo)
    }
}

struct EdgeWalk<'a> {
    cf: &'a dyn CharFn,
    order_hint: usize,
    hit_zero: bool,
}

impl<'a> EdgeWalk<'a> {
    fn value(&mut self, p: C64) -> C64 {
        let sc = self.cf.delta_sc(p);
        if !sc.m.is_finite() || sc.m.norm() < 1e-280 {
            self.hit_zero = true;
        }
        // Full phase: arg(Δ) = arg(m) + Im(shift). The real shift scales the
        // magnitude only and is irrelevant to the winding.
        sc.m * c(sc.shift.im.cos(), sc.shift.im.sin())
    }

    fn arg_change(&mut self, a: C64, b: C64, va: C64, vb: C64, depth: usize) -> f64 {
        if self.hit_zero {
            return 0.0;
        }
        let ratio = vb / va;
        let d = ratio.arg();
        if d.abs() <= std::f64::consts::FRAC_PI_2 && depth >= 2 {
            return d;
        }
        if depth > 40 {
            self.hit_zero = true;
            return 0.0;
        }
        let mid = 0.5 * (a + b);
        let vm = self.value(mid);
        self.arg_change(a, mid, va, vm, depth + 1) + self.arg_change(mid, b, vm, vb, depth + 1)
    }

    fn edge(&mut self, a: C64, b: C64) -> f64 {
        // Initial panels bounded by the fastest exponential phase rate.
        let len = (b - a).norm();
        let scale = a.norm().max(b.norm());
        let rate = self.order_hint as f64 * 1.0 + 0.02 * scale;
        let pieces = ((len * rate / 1.2).ceil() as usize).clamp(4, 8192);
        let mut total = 0.0;
        let mut prev = a;
        let mut vprev = self.value(prev);
        for k in 1..=pieces {
            let p = a + (b - a) * (k as f64 / pieces as f64);
            let v = self.value(p);
            total += self.arg_change(prev, p, vprev, v, 0);
            prev = p;
            vprev = v;
        }
        total
    }
}

/// Winding number of Δ around 0 along the positively oriented rectangle
/// boundary; equals the number of enclosed zeros counted with order.
pub fn count_zeros(cf: &dyn CharFn, rect: Rect, order_hint: usize) -> Result<usize, ZeroError> {
    match try_count(cf, rect, order_hint)? {
        Some(n) => Ok(n),
        None => {
            // Perturb the boundary away from a zero sitting on it.
            let mut r = rect;
            for attempt in 0..5 {
                let bump = 0.137 * (attempt + 1) as f64 * cell_pad(&rect);
                r = Rect {
                    re_lo: rect.re_lo - bump,
                    re_hi: rect.re_hi + bump * 1.03,
                    im_lo: rect.im_lo - bump * 0.97,
                    im_hi: rect.im_hi + bump * 1.07,
                };
                if let Some(n) = try_count(cf, r, order_hint)? {
                    return Ok(n);
                }
            }
            Err(ZeroError::BoundaryTooCloseToZero(5))
        }
    }
}

fn cell_pad(rect: &Rect) -> f64 {
    0.01 * rect.diam().max(1e-3)
}

fn try_count(cf: &dyn CharFn, rect: Rect, order_hint: usize) -> Result<Option<usize>, ZeroError> {
    let corners = rect.corners();
    let mut walk = EdgeWalk {
        cf,
        order_hint,
        hit_zero: false,
    };
    let mut total = 0.0;
    for k in 0..4 {
        total += walk.edge(corners[k], corners[(k + 1) % 4]);
        if walk.hit_zero {
            return Ok(None);
        }
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let n = winding.round();
    if (winding - n).abs() > 0.25 {
        return Err(ZeroError::NonIntegerWinding(winding));
    }
    if n < -0.5 {
        return Err(ZeroError::NonIntegerWinding(winding));
    }
    Ok(Some(n as usize))
}

// ---------------------------------------------------------------------------
// Subdivision search + Newton polish.
// ---------------------------------------------------------------------------

pub struct LocateOptions {
    pub tol: f64,
    /// Sector-edge ray angles used to cap ε so main contour rays keep 2ε
    /// clearance from edge-hugging zero families.
    pub edge_angles: Vec<f64>,
    pub order_hint: usize,
}

impl Default for LocateOptions {
    fn default() -> Self {
        LocateOptions {
            tol: 1e-12,
            edge_angles: vec![],
            order_hint: 3,
        }
    }
}

/// Locate all zeros in the square [-R,R]^2 by recursive rectangle
/// subdivision, refine with Newton, certify orders by local argument counts.
pub fn locate_zeros(cf: &dyn CharFn, radius: f64, opts: &LocateOptions) -> Result<ZeroCatalog, ZeroError> {
    // Slightly asymmetric root box so that split midlines avoid the origin
    // and other symmetric zero placements.
    let root = Rect {
        re_lo: -radius - 0.0131,
        re_hi: radius + 0.0273,
        im_lo: -radius - 0.0179,
        im_hi: radius + 0.0317,
    };
    let total = count_zeros(cf, root, opts.order_hint)?;
    let mut found: Vec<C64> = Vec::new();
    let mut stack = vec![(root, total)];
    let mut budget = 60_000usize;
    while let Some((cell, count)) = stack.pop() {
        if count == 0 {
            continue;
        }
        budget = budget
            .checked_sub(1)
            .ok_or(ZeroError::NonConvergence(c(cell.re_lo, cell.im_lo)))?;
        let center = c(
            0.5 * (cell.re_lo + cell.re_hi),
            0.5 * (cell.im_lo + cell.im_hi),
        );
        if cell.diam() < 0.8 {
            if let Some(z) = newton(cf, center, opts.tol, cell.diam() * 2.0) {
                let padded = Rect {
                    re_lo: cell.re_lo - 1e-9,
                    re_hi: cell.re_hi + 1e-9,
                    im_lo: cell.im_lo - 1e-9,
                    im_hi: cell.im_hi + 1e-9,
                };
                if padded.contains(z) {
                    if !found.iter().any(|f| (f - z).norm() < 1e-6 * (1.0 + z.norm())) {
                        found.push(z);
                    }
                    // One multiple zero (or a resolved cluster member) can
                    // explain the whole cell count; otherwise keep splitting.
                    let local = count_zeros(
                        cf,
                        Rect::centered(z, cell.diam() * 0.02 + 1e-4, cell.diam() * 0.02 + 1e-4),
                        opts.order_hint,
                    )?;
                    if local >= count {
                        continue;
                    }
                }
            }
            if cell.diam() < 1e-4 {
                return Err(ZeroError::NonConvergence(center));
            }
        }
        // Split the longer side, nudging the midline until neither child
        // boundary runs through a zero and the counts are consistent. An
        // inherited count can be off by a unit when an ancestor edge passed
        // very close to a multiple zero; if every nudge agrees on a
        // different total, the finer child walks win.
        let mut done = false;
        let mut consensus: Vec<(Rect, usize, Rect, usize)> = Vec::new();
        for attempt in 0..7 {
            let f = 0.5 + 0.083 * attempt as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 };
            let (a, b) = split_at(cell, f);
            let ca = match try_count(cf, a, opts.order_hint)? {
                Some(v) => v,
                None => continue,
            };
            let cb = match try_count(cf, b, opts.order_hint)? {
                Some(v) => v,
                None => continue,
            };
            if ca + cb != count {
                consensus.push((a, ca, b, cb));
                continue;
            }
            stack.push((a, ca));
            stack.push((b, cb));
            done = true;
            break;
        }
        if !done {
            let agreeing = consensus
                .iter()
                .filter(|(_, ca, _, cb)| {
                    consensus
                        .first()
                        .map(|(_, c0, _, c1)| ca + cb == c0 + c1)
                        .unwrap_or(false)
                })
                .count();
            if agreeing >= 3 {
                let (a, ca, b, cb) = consensus[0];
                stack.push((a, ca));
                stack.push((b, cb));
            } else {
                return Err(ZeroError::BoundaryTooCloseToZero(7));
            }
        }
    }

    // Snap, certify orders, filter to the search square.
    let mut zeros = Vec::new();
    for mut z in found {
        // The origin is a structural zero of every fixture Δ; Newton
        // stagnates near multiple zeros at the determinant noise floor, so
        // snap generously.
        if z.norm() < 1e-6 {
            z = c(0.0, 0.0);
        }
        if !root.contains(z) {
            continue;
        }
        let order = order_at(cf, z, opts.order_hint)?;
        if order == 0 {
            continue;
        }
        zeros.push(SpectralZero {
            sigma: z,
            order,
            branch: None,
        });
    }

    let mut cat = ZeroCatalog {
        zeros,
        epsilon: 0.0,
        radius,
        removable_at_origin: false,
    };
    cat.sort();
    cat.epsilon = compute_epsilon(&cat, &opts.edge_angles);
    cat.removable_at_origin = cat.zeros.iter().any(|z| z.sigma.norm() == 0.0);
    // Completeness: the orders must add up to the argument-principle count.
    if cat.total_order() != total {
        return Err(ZeroError::NonConvergence(c(0.0, 0.0)));
    }
    Ok(cat)
}

fn split_at(cell: Rect, frac: f64) -> (Rect, Rect) {
    if cell.re_hi - cell.re_lo >= cell.im_hi - cell.im_lo {
        let mid = cell.re_lo + frac * (cell.re_hi - cell.re_lo);
        (
            Rect { re_hi: mid, ..cell },
            Rect { re_lo: mid, ..cell },
        )
    } else {
        let mid = cell.im_lo + frac * (cell.im_hi - cell.im_lo);
        (
            Rect { im_hi: mid, ..cell },
            Rect { im_lo: mid, ..cell },
        )
    }
}

/// Newton iteration on Δ/Δ'; linear convergence at multiple zeros is fine
/// within the iteration budget.
pub fn newton(cf: &dyn CharFn, start: C64, tol: f64, leash: f64) -> Option<C64> {
    let mut z = start;
    for _ in 0..120 {
        let step = cf.newton_step(z);
        if !step.is_finite() {
            return None;
        }
        z -= step;
        if (z - start).norm() > leash.max(1.0) {
            return None;
        }
        if step.norm() < tol {
            return Some(z);
        }
    }
    None
}

/// Order of the zero at σ via the argument principle on a small square.
fn order_at(cf: &dyn CharFn, sigma: C64, hint: usize) -> Result<usize, ZeroError> {
    let r = 1e-3 * (1.0 + sigma.norm());
    count_zeros(cf, Rect::centered(sigma, r, r), hint)
}

fn compute_epsilon(cat: &ZeroCatalog, edge_angles: &[f64]) -> f64 {
    let sep = cat.min_separation();
    let mut eps = 0.45 * (sep / 5.0).min(1.0);
    for z in &cat.zeros {
        for &th in edge_angles {
            let d = dist_to_ray(z.sigma, th);
            if d > 1e-9 {
                eps = eps.min(0.45 * d);
            }
        }
    }
    eps.max(1e-6)
}

/// Distance from p to the ray {s e^{iθ} : s ≥ 0}.
pub fn dist_to_ray(p: C64, theta: f64) -> f64 {
    let dir = c(theta.cos(), theta.sin());
    let s = (p * dir.conj()).re;
    if s <= 0.0 {
        p.norm()
    } else {
        (p - dir * s).norm()
    }
}

// ---------------------------------------------------------------------------
// Seeded extension for LKdV problem 1 (zeros at 0, α^j λ_k, α^j μ_k).
// ---------------------------------------------------------------------------

/// Extend a problem-1 catalog with Newton-refined asymptotic seeds out to
/// |σ| <= radius, tagging the branch and rotation index. Subdivision over a
/// large disk is much slower than seeding; the asymptotic error is
/// O(e^{-√3 k π}) so Newton always lands on the adjacent true zero.
pub fn extend_lkdv1_seeded(cat: &ZeroCatalog, radius: f64) -> ZeroCatalog {
    let kind = FixtureKind::Lkdv1;
    let alpha = crate::fixtures::alpha3();
    let mut out = cat.clone();
    let kmax = ((radius / (2.0 * std::f64::consts::PI)) + 1.0) as usize + 1;
    for k in 1..=kmax {
        for branch in [SeedBranch::Lambda, SeedBranch::Mu] {
            let seed = lkdv1_seed(k, branch);
            for j in 0..3 {
                let rotated = seed * alpha.powu(j);
                if rotated.norm() > radius {
                    continue;
                }
                if let Some(z) = newton(&kind, rotated, 1e-12, 1.0) {
                    if out
                        .zeros
                        .iter()
                        .any(|f| (f.sigma - z).norm() < 1e-6 * (1.0 + z.norm()))
                    {
                        continue;
                    }
                    let tag = format!(
                        "a^{}*{}_{}",
                        j,
                        match branch {
                            SeedBranch::Lambda => "lambda",
                            SeedBranch::Mu => "mu",
                        },
                        k
                    );
                    out.zeros.push(SpectralZero {
                        sigma: z,
                        order: 1,
                        branch: Some(tag),
                    });
                }
            }
        }
    }
    out.radius = radius.max(out.radius);
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// JSON cache.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CacheFile {
    key: u64,
    radius: f64,
    catalog: ZeroCatalog,
}

pub fn cache_store(path: &std::path::Path, key: u64, cat: &ZeroCatalog) -> Result<(), ZeroError> {
    let file = CacheFile {
        key,
        radius: cat.radius,
        catalog: cat.clone(),
    };
    let body = serde_json::to_string_pretty(&file).map_err(|e| ZeroError::CacheIo(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, body).map_err(|e| ZeroError::CacheIo(e.to_string()))?;
    std::fs::rename(&tmp, path).map_err(|e| ZeroError::CacheIo(e.to_string()))?;
    Ok(())
}

/// Load a cached catalog; the cache is advisory and revalidated by Newton
/// residual at every zero.
pub fn cache_load(
    path: &std::path::Path,
    key: u64,
    radius: f64,
    cf: &dyn CharFn,
) -> Option<ZeroCatalog> {
    let body = std::fs::read_to_string(path).ok()?;
    let file: CacheFile = serde_json::from_str(&body).ok()?;
    if file.key != key || (file.radius - radius).abs() > 1e-12 {
        return None;
    }
    for z in &file.catalog.zeros {
        if z.sigma.norm() == 0.0 {
            continue;
        }
        if cf.newton_residual(z.sigma) > 1e-7 {
            return None;
        }
    }
    Some(file.catalog)
}

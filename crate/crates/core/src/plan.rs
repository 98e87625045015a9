//! Quadrature planner for the inverse-transform contour systems.
//!
//! The literal contours (sector boundaries carrying oscillatory integrands
//! with no decay on the real-axis edges) are deformed, exactly, into paths
//! with recorded exponential decay:
//!
//! - t > 0: every sector edge rotates a quarter-width into its sector, where
//!   Re(aλⁿ) ≥ c|λ|ⁿ supplies the decay. Zeros crossed by a rotation keep
//!   their ε-circles in the plan (weighted by e^{-aσⁿt}, exponentially small
//!   in |σ|) — Cauchy bookkeeping, not an approximation.
//! - t = 0: edges with Im e^{iθ} ≠ 0 already decay through e^{iλx} (plus
//!   side) or the e^{-iλ} factor inside F⁻ (minus side) and stay put.
//!   Real-axis edges carrying F⁺ are rewritten through the jump identity
//!   F⁺ = f̂/2π + F⁻: the rational parts of f̂ rotate freely (poles only at
//!   0, behind the anchor), the meromorphic remainder rotates toward its
//!   decay half-plane by a catalog-validated angle. Real-axis edges carrying
//!   F⁻ rotate down directly. On-edge zeros are absorbed by flipping the
//!   detour side against their Γ₀ circles, which removes every slowly
//!   converging circle series from the plan.
//!
//! All finite-σ circle coefficients are tracked symbolically per half; a
//! circle with equal and opposite F⁺/F⁻ coefficients integrates the entire
//! jump and is dropped (σ ≠ 0).

use crate::charmat::Half;
use crate::contours::{interior_bulge, sectors, Sector, SegmentKind};
use crate::num::{c, cexp, gauss_legendre, C64, Sc, I};
use crate::transforms::{SpectralFn, TransformError};
use crate::zeros::{dist_to_ray, ZeroCatalog};

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("no decay mechanism reaches the budget on segment '{0}'")]
    TruncationUnreachable(String),
    #[error("cannot deform '{0}' clear of the zero at {1}")]
    ClearanceViolation(String, C64),
    #[error("spectral function provides no jump split (needed for a t=0 real-axis edge)")]
    JumpUnavailable,
    #[error("catalog radius {have} too small (need ≥ {need:.1})")]
    CatalogTooSmall { have: f64, need: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// What a node evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Side(Half),
    /// Rational part A of the jump F⁺ - F⁻ = A + e^{-iλ}B.
    JumpA,
    /// Rational part B (carries the e^{-iλ}).
    JumpB,
}

#[derive(Debug, Clone)]
pub struct PlanSegment {
    pub label: String,
    pub geom: SegmentKind,
    /// Length along the parametrization (rays: truncation length).
    pub len: f64,
    pub role: Role,
    /// Orientation/sign coefficient (incoming edges carry -1).
    pub coeff: f64,
    /// Calibration abscissa for the doubling test.
    pub xref: f64,
}

#[derive(Debug, Clone)]
pub struct PlanCircle {
    pub sigma: C64,
    pub radius: f64,
    pub coeff_plus: i32,
    pub coeff_minus: i32,
    pub xref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourMode {
    /// Γ₀ ∪ Γₐ from the catalog.
    General,
    /// The fixed LKdV figure contours (Γ₀ = C(0,1/2), sector arcs at the
    /// given radius). Valid for the third-order fixtures.
    LkdvFixture,
    /// Γₐ only (the literal sector boundaries with their 2ε circles).
    GammaAOnly,
    /// Γ₀ only (circle sums; classical series side of the identities).
    Gamma0Only,
    /// Γₐ plus ε-circles around every zero except the origin: the
    /// minimal-type-I system that reconstructs once λ=0 is removable.
    Type2Only,
}

#[derive(Debug, Clone)]
pub struct PlanRequest {
    pub t: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub tol: f64,
    /// Exponential decay budget: rays truncate where the recorded bound
    /// reaches e^{-budget}.
    pub budget: f64,
    /// Degree of the data this plan will integrate (split-anchor sizing).
    pub datum_degree: usize,
    /// Fixture arc radius for ContourMode::LkdvFixture.
    pub arc_radius: f64,
    /// Also require e^{iλx} decay at truncation (integrands with parts that
    /// carry no t-decay, e.g. inhomogeneous boundary terms).
    pub require_x_decay: bool,
}

impl PlanRequest {
    pub fn reconstruction(x_min: f64, x_max: f64) -> Self {
        PlanRequest {
            t: 0.0,
            x_min,
            x_max,
            tol: 1e-10,
            budget: 40.0,
            datum_degree: 8,
            arc_radius: 1.0,
            require_x_decay: false,
        }
    }

    pub fn evolution(t: f64, x_min: f64, x_max: f64) -> Self {
        PlanRequest {
            t,
            x_min,
            x_max,
            tol: 1e-10,
            budget: 40.0,
            datum_degree: 8,
            arc_radius: 1.0,
            require_x_decay: false,
        }
    }
}

/// An executable node plan: deformed segments, surviving circles, the
/// deformation record, and the evolution parameters baked into the weights.
#[derive(Debug, Clone)]
pub struct QuadraturePlan {
    pub segments: Vec<PlanSegment>,
    pub circles: Vec<PlanCircle>,
    pub deformation_log: Vec<String>,
    pub n: usize,
    pub a: C64,
    pub t: f64,
    pub target_tol: f64,
    /// ln of the recorded truncation bound (≤ -budget by construction).
    pub trunc_bound_ln: f64,
    pub epsilon: f64,
}

// ---------------------------------------------------------------------------
// Planner.
// ---------------------------------------------------------------------------

struct Ledger {
    sigma: Vec<C64>,
    plus: Vec<i32>,
    minus: Vec<i32>,
}

impl Ledger {
    fn bump(&mut self, sigma: C64, half: Half, delta: i32) {
        let idx = self
            .sigma
            .iter()
            .position(|&s| (s - sigma).norm() < 1e-9 * (1.0 + sigma.norm()));
        let i = match idx {
            Some(i) => i,
            None => {
                self.sigma.push(sigma);
                self.plus.push(0);
                self.minus.push(0);
                self.sigma.len() - 1
            }
        };
        match half {
            Half::Plus => self.plus[i] += delta,
            Half::Minus => self.minus[i] += delta,
        }
    }
}

pub fn plan_gamma(
    n: usize,
    a: C64,
    cat: &ZeroCatalog,
    mode: ContourMode,
    req: &PlanRequest,
) -> Result<QuadraturePlan, PlanError> {
    let eps = cat.epsilon;
    let two_eps = 2.0 * eps;
    let secs = sectors(n, a);
    let mut log = Vec::new();

    let fixture = mode == ContourMode::LkdvFixture;
    let r0 = if fixture {
        req.arc_radius
    } else if cat.removable_at_origin {
        two_eps
    } else {
        let d = cat.nearest_zero_distance(c(0.0, 0.0));
        (0.25_f64).min(eps.max(1e-3)).min(0.25 * d.max(1e-3))
    };

    // Circle ledger. General mode starts from Γ₀ (one ccw ε-circle per
    // zero) minus the Γₐ 2ε-circles around sector-interior zeros, which
    // cancel pairwise. Fixture mode has no per-zero circles. Gamma0Only
    // keeps Γ₀ and stops there.
    let mut ledger = Ledger {
        sigma: vec![],
        plus: vec![],
        minus: vec![],
    };
    for z in &cat.zeros {
        let keep = match mode {
            ContourMode::General | ContourMode::Gamma0Only => true,
            ContourMode::Type2Only => z.sigma.norm() > 1e-12,
            _ => false,
        };
        if keep {
            ledger.bump(z.sigma, cat.half_of(z.sigma), 1);
        }
    }
    if matches!(
        mode,
        ContourMode::General | ContourMode::GammaAOnly | ContourMode::Type2Only
    ) {
        // the negatively oriented 2ε circles of Γₐ around sector-interior
        // zeros (they cancel the matching ε-circles when those are present)
        for z in &cat.zeros {
            if z.sigma.norm() <= r0 * 0.99 {
                continue;
            }
            let th = z.sigma.arg();
            let interior = secs.iter().any(|s| {
                s.contains_angle(th)
                    && dist_to_ray(z.sigma, s.lo) >= eps
                    && dist_to_ray(z.sigma, s.hi) >= eps
            });
            if interior {
                ledger.bump(z.sigma, cat.half_of(z.sigma), -1);
            }
        }
    }

    let mut segments: Vec<PlanSegment> = Vec::new();

    if matches!(
        mode,
        ContourMode::General
            | ContourMode::GammaAOnly
            | ContourMode::LkdvFixture
            | ContourMode::Type2Only
    ) {
        for sec in &secs {
            // hi edge (incoming), then junction arc, then lo edge (outgoing)
            let hi_eff = plan_edge(
                n, a, cat, sec, sec.hi, -1.0, r0, req, fixture, &mut segments, &mut ledger,
                &mut log,
            )?;
            let lo_eff = plan_edge(
                n, a, cat, sec, sec.lo, 1.0, r0, req, fixture, &mut segments, &mut ledger,
                &mut log,
            )?;
            if r0 > 0.0 {
                segments.push(PlanSegment {
                    label: format!("junction[{:.3},{:.3}]", sec.lo, sec.hi),
                    geom: SegmentKind::Arc {
                        center: c(0.0, 0.0),
                        radius: r0,
                        th0: hi_eff,
                        th1: lo_eff,
                    },
                    len: r0 * (hi_eff - lo_eff).abs(),
                    role: Role::Side(sec.half),
                    coeff: 1.0,
                    xref: req.x_min,
                })
            }
        }
    }

    if fixture {
        // the figure's Γ₀: circle of radius 1/2 around the origin, plus side
        ledger.sigma.push(c(0.0, 0.0));
        ledger.plus.push(1);
        ledger.minus.push(0);
    }

    // Materialize circles. Drop σ ≠ 0 circles whose F⁺/F⁻ coefficients sum
    // to zero: their combined integrand is the entire jump.
    let mut circles = Vec::new();
    for (i, &sigma) in ledger.sigma.iter().enumerate() {
        let (cp, cm) = (ledger.plus[i], ledger.minus[i]);
        if cp == 0 && cm == 0 {
            continue;
        }
        if cp + cm == 0 && sigma.norm() > 1e-12 {
            log.push(format!("circle at {sigma}: jump-cancelled ({cp:+}F+ {cm:+}F-)"));
            continue;
        }
        let radius = if fixture && sigma.norm() < 1e-12 {
            0.5
        } else {
            eps
        };
        // weight prune at t > 0: the full circle bound e^{-Re(aσⁿ)t + n|σ|^{n-1}εt}
        if req.t > 0.0 && sigma.norm() > 0.0 {
            let w = -(a * sigma.powu(n as u32)).re * req.t
                + n as f64 * sigma.norm().powi(n as i32 - 1) * radius * req.t;
            if w < -req.budget - 20.0 {
                log.push(format!("circle at {sigma}: pruned, weight bound e^{w:.1}"));
                continue;
            }
        }
        circles.push(PlanCircle {
            sigma,
            radius,
            coeff_plus: cp,
            coeff_minus: cm,
            xref: req.x_min,
        });
    }

    // Deterministic ordering.
    circles.sort_by(|p, q| {
        (p.sigma.norm(), p.sigma.arg())
            .partial_cmp(&(q.sigma.norm(), q.sigma.arg()))
            .unwrap()
    });

    Ok(QuadraturePlan {
        segments,
        circles,
        deformation_log: log,
        n,
        a,
        t: req.t,
        target_tol: req.tol,
        trunc_bound_ln: -req.budget,
        epsilon: eps,
    })
}

#[allow(clippy::too_many_arguments)]
fn plan_edge(
    n: usize,
    a: C64,
    cat: &ZeroCatalog,
    sec: &Sector,
    angle: f64,
    orient: f64,
    r0: f64,
    req: &PlanRequest,
    fixture: bool,
    segments: &mut Vec<PlanSegment>,
    ledger: &mut Ledger,
    log: &mut Vec<String>,
) -> Result<f64, PlanError> {
    let eps = cat.epsilon;
    let two_eps = 2.0 * eps;
    let anchor = r0 * c(angle.cos(), angle.sin());
    let role = Role::Side(sec.half);
    let on_edge: Vec<C64> = cat
        .zeros
        .iter()
        .map(|z| z.sigma)
        .filter(|&z| z.norm() > r0 * 0.99 && dist_to_ray(z, angle) < eps)
        .collect();

    if req.t > 0.0 {
        // Rotate a quarter width into the sector; regain swept circles.
        let inward = if (angle - sec.lo).abs() < 1e-12 { 1.0 } else { -1.0 };
        let mut omega = sec.width() * 0.4995;
        let mut chosen = None;
        for _ in 0..9 {
            let th = angle + inward * omega;
            let ray_ok = cat.zeros.iter().all(|z| {
                z.sigma.norm() <= r0 * 0.99
                    || dist_to_ray_from(z.sigma, anchor_at(r0, th), th) >= two_eps - 1e-12
            });
            if ray_ok {
                chosen = Some(th);
                break;
            }
            omega *= 0.82;
        }
        let th = chosen.ok_or_else(|| {
            PlanError::ClearanceViolation(format!("edge {angle:.3} (t>0)"), c(0.0, 0.0))
        })?;
        // swept zeros: strictly between angle and th (on-edge ones sit
        // behind the interior detours and are not crossed)
        for z in &cat.zeros {
            if z.sigma.norm() <= r0 * 0.99 || on_edge.iter().any(|&s| (s - z.sigma).norm() < 1e-12)
            {
                continue;
            }
            let za = z.sigma.arg();
            let between = if inward > 0.0 {
                za > angle + 1e-12 && za < th - 1e-12
            } else {
                za < angle - 1e-12 && za > th + 1e-12
            };
            if between {
                let rot_sign = inward; // ccw rotation regains +1
                let delta = (orient * rot_sign) as i32;
                ledger.bump(z.sigma, sec.half, delta);
                log.push(format!(
                    "edge {angle:.3}: swept zero {} regained {delta:+} on {:?}",
                    z.sigma, sec.half
                ));
            }
        }
        let len = truncation_length(
            anchor_at(r0, th),
            th,
            sec.half,
            req,
            n,
            a,
            true,
        )
        .ok_or_else(|| PlanError::TruncationUnreachable(format!("edge {angle:.3} -> {th:.3}")))?;
        segments.push(PlanSegment {
            label: format!("edge{angle:.3}->{th:.3}"),
            geom: SegmentKind::Ray {
                anchor: anchor_at(r0, th),
                angle: th,
            },
            len,
            role,
            coeff: orient,
            xref: xref_for(role, req),
        });
        log.push(format!("edge {angle:.3}: rotated to {th:.3} (t-decay)"));
        return Ok(th);
    }

    // t = 0.
    let s = angle.sin();
    let decays = match sec.half {
        Half::Plus => s > 0.02,
        Half::Minus => s < -0.02,
    };
    if decays {
        // undeformed; x-decay along the edge
        let len = truncation_length(anchor, angle, sec.half, req, n, a, false)
            .ok_or_else(|| PlanError::TruncationUnreachable(format!("edge {angle:.3}")))?;
        let bulge = interior_bulge(sec, angle);
        for (i, piece) in
            crate::contours::edge_path(angle, r0, r0 + len, &on_edge, two_eps, bulge)
                .into_iter()
                .enumerate()
        {
            segments.push(PlanSegment {
                label: format!("edge{angle:.3}#{i}"),
                geom: piece,
                len: piece_len(&piece),
                role,
                coeff: orient,
                xref: xref_for(role, req),
            });
        }
        return Ok(angle);
    }

    // Real-axis edge at t = 0.
    match sec.half {
        Half::Minus => {
            // rotate the whole F⁻ edge into its decay half-plane
            let inward = if (angle - sec.lo).abs() < 1e-12 { 1.0 } else { -1.0 };
            let th = choose_clear_rotation(cat, anchor, angle, inward, r0, two_eps, &on_edge)
                .ok_or_else(|| {
                    PlanError::ClearanceViolation(format!("minus edge {angle:.3}"), c(0.0, 0.0))
                })?;
            let len = truncation_length(anchor, th, Half::Minus, req, n, a, false)
                .ok_or_else(|| PlanError::TruncationUnreachable(format!("edge {angle:.3}")))?;
            segments.push(PlanSegment {
                label: format!("minus-edge{angle:.3}->{th:.3}"),
                geom: SegmentKind::Ray { anchor, angle: th },
                len,
                role,
                coeff: orient,
                xref: xref_for(role, req),
            });
            log.push(format!("edge {angle:.3}: F- rotated to {th:.3}"));
            let _ = fixture;
            return Ok(angle);
        }
        Half::Plus => {
            // Jump split. Absorb on-edge zeros against their Γ₀ circles so
            // the bridge passes below them and the F⁻ ray sweeps nothing.
            for &z in &on_edge {
                ledger.bump(z, Half::Plus, -1);
                log.push(format!("edge {angle:.3}: absorbed Γ₀ circle at {z}"));
            }
            let dirmul = if angle.cos() >= 0.0 { 1.0 } else { -1.0 }; // +x or -x axis
            // split anchor: past the datum-degree blowup radius, in a gap
            let base = r0.max(0.8 * req.datum_degree as f64 + 1.0);
            let r_split = choose_split_radius(base, &on_edge, dirmul, eps);
            let z_split = r_split * c(angle.cos(), angle.sin());
            // bridge with below-side detours
            if r_split > r0 * (1.0 + 1e-9) {
                let bulge_below = below_bulge(angle);
                for (i, piece) in
                    crate::contours::edge_path(angle, r0, r_split, &on_edge, two_eps, bulge_below)
                        .into_iter()
                        .enumerate()
                {
                    segments.push(PlanSegment {
                        label: format!("bridge{angle:.3}#{i}"),
                        geom: piece,
                        len: piece_len(&piece),
                        role,
                        coeff: orient,
                        xref: xref_for(role, req),
                    });
                }
            }
            // A up, B down (pole only at the origin, behind the anchor)
            let up = if angle.cos() >= 0.0 {
                std::f64::consts::FRAC_PI_4
            } else {
                3.0 * std::f64::consts::FRAC_PI_4
            };
            let down = -up;
            for (role_j, th) in [(Role::JumpA, up), (Role::JumpB, down)] {
                let half_eq = match role_j {
                    Role::JumpA => Half::Plus,
                    _ => Half::Minus,
                };
                let len = truncation_length(z_split, th, half_eq, req, n, a, false)
                    .ok_or_else(|| {
                        PlanError::TruncationUnreachable(format!("jump ray {th:.3}"))
                    })?;
                segments.push(PlanSegment {
                    label: format!("jump{angle:.3}@{th:.3}"),
                    geom: SegmentKind::Ray {
                        anchor: z_split,
                        angle: th,
                    },
                    len,
                    role: role_j,
                    coeff: orient,
                    xref: xref_for(role_j, req),
                });
            }
            // the meromorphic remainder F⁻ rotates down
            let downward = if angle.cos() >= 0.0 { -1.0 } else { 1.0 };
            let th = choose_clear_rotation(cat, z_split, angle, downward, r_split, two_eps, &on_edge)
                .ok_or_else(|| {
                    PlanError::ClearanceViolation(format!("split F- {angle:.3}"), c(0.0, 0.0))
                })?;
            let len = truncation_length(z_split, th, Half::Minus, req, n, a, false)
                .ok_or_else(|| PlanError::TruncationUnreachable(format!("split F- {th:.3}")))?;
            segments.push(PlanSegment {
                label: format!("split-minus{angle:.3}->{th:.3}"),
                geom: SegmentKind::Ray {
                    anchor: z_split,
                    angle: th,
                },
                len,
                role: Role::Side(Half::Minus),
                coeff: orient,
                xref: req.x_max,
            });
            log.push(format!(
                "edge {angle:.3}: split (bridge to {r_split:.2}, jump ±{up:.3}, F- to {th:.3})"
            ));
        }
    }
    let _ = fixture;
    Ok(angle)
}

fn anchor_at(r0: f64, th: f64) -> C64 {
    r0 * c(th.cos(), th.sin())
}

fn below_bulge(angle: f64) -> f64 {
    // pick the bulge sign whose normal points into C⁻
    let plus_normal = (angle + std::f64::consts::FRAC_PI_2).sin();
    if plus_normal < 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn piece_len(p: &SegmentKind) -> f64 {
    match *p {
        SegmentKind::Line { a, b } => (b - a).norm(),
        SegmentKind::Arc { radius, th0, th1, .. } => radius * (th1 - th0).abs(),
        SegmentKind::Circle { radius, .. } => 2.0 * std::f64::consts::PI * radius,
        SegmentKind::Ray { .. } => f64::INFINITY,
    }
}

/// Distance from p to the ray {z0 + s e^{iθ} : s ≥ 0}.
fn dist_to_ray_from(p: C64, z0: C64, th: f64) -> f64 {
    let rel = (p - z0) * c(th.cos(), th.sin()).conj();
    if rel.re <= 0.0 {
        (p - z0).norm()
    } else {
        rel.im.abs()
    }
}

/// Largest rotation (from a fixed candidate list) of the ray at `angle`
/// about `z0` in direction `dir` that keeps 2ε clearance from all catalog
/// zeros and sweeps none (the edge's own on-edge zeros are excluded: the
/// detour side already accounts for them).
fn choose_clear_rotation(
    cat: &ZeroCatalog,
    z0: C64,
    angle: f64,
    dir: f64,
    min_radius: f64,
    two_eps: f64,
    on_edge: &[C64],
) -> Option<f64> {
    for frac in [
        std::f64::consts::FRAC_PI_6,
        std::f64::consts::FRAC_PI_8,
        std::f64::consts::PI / 12.0,
        std::f64::consts::PI / 16.0,
        std::f64::consts::PI / 24.0,
        std::f64::consts::PI / 48.0,
    ] {
        let th = angle + dir * frac;
        let mut ok = true;
        for z in &cat.zeros {
            if z.sigma.norm() <= min_radius * 0.2 {
                continue;
            }
            if dist_to_ray_from(z.sigma, z0, th) < two_eps - 1e-12 {
                ok = false;
                break;
            }
            if on_edge.iter().any(|&s| (s - z.sigma).norm() < 1e-12) {
                // accounted for by the detour side; only clearance matters
                continue;
            }
            // swept test: inside the open wedge between angle and th
            let rel = (z.sigma - z0) * c(angle.cos(), angle.sin()).conj();
            if rel.re > 0.0 {
                let za = rel.arg();
                if dir > 0.0 && za > 1e-12 && za < frac - 1e-12
                    || dir < 0.0 && za < -1e-12 && za > -frac + 1e-12
                {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(th);
        }
    }
    None
}

fn choose_split_radius(base: f64, on_edge: &[C64], dirmul: f64, eps: f64) -> f64 {
    // positions measured along the axis direction (positive)
    let mut zs: Vec<f64> = on_edge.iter().map(|z| dirmul * z.re).collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let clear = |r: f64| -> bool {
        zs.iter().all(|&s| {
            // behind: keep 2.2ε; ahead: need headroom for the down-ray
            if s <= r {
                r - s >= 2.2 * eps
            } else {
                s - r >= 4.5 * eps
            }
        })
    };
    if clear(base) {
        return base;
    }
    let mut candidates: Vec<f64> = zs.iter().map(|&s| s + 2.4 * eps).collect();
    candidates.push(base + 4.5 * eps);
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for cnd in candidates {
        if cnd >= base && clear(cnd) {
            return cnd;
        }
    }
    base
}

fn xref_for(role: Role, req: &PlanRequest) -> f64 {
    match role {
        Role::Side(Half::Plus) | Role::JumpA => req.x_min,
        Role::Side(Half::Minus) | Role::JumpB => req.x_max,
    }
}

/// Decay exponent of the integrand bound at distance s along the ray:
/// the e^{iλx}/e^{iλ(x-1)} part plus, when enabled, the e^{-Re(aλⁿ)t} part.
fn decay_ln(
    z0: C64,
    th: f64,
    s: f64,
    half: Half,
    req: &PlanRequest,
    n: usize,
    a: C64,
    use_t: bool,
) -> f64 {
    let lm = z0 + s * c(th.cos(), th.sin());
    let xpart = match half {
        Half::Plus => req.x_min * lm.im,
        Half::Minus => -(1.0 - req.x_max) * lm.im,
    };
    let tpart = if use_t || req.t > 0.0 {
        req.t * (a * lm.powu(n as u32)).re
    } else {
        0.0
    };
    if req.require_x_decay {
        xpart.min(xpart + tpart)
    } else {
        xpart + tpart
    }
}

fn truncation_length(
    z0: C64,
    th: f64,
    half: Half,
    req: &PlanRequest,
    n: usize,
    a: C64,
    use_t: bool,
) -> Option<f64> {
    let target = req.budget;
    let g = |s: f64| decay_ln(z0, th, s, half, req, n, a, use_t);
    if g(1e7) < target {
        return None;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) < target {
        hi *= 2.0;
        if hi > 1e7 {
            return Some(1e7);
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi.max(1.0))
}

// ---------------------------------------------------------------------------
// Sampling and evaluation.
// ---------------------------------------------------------------------------

/// Calibrated nodes with cached spectral values: contribution of node j at
/// (x) is w·m·exp(base + iλx), base = shift - aλⁿt.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    pub lam: Vec<C64>,
    mant: Vec<C64>,
    base: Vec<C64>,
    pub achieved_tol: f64,
    pub trunc_bound_ln: f64,
    pub node_count: usize,
}

impl QuadraturePlan {
    /// Evaluate the spectral function along the plan, doubling nodes per
    /// segment until the Cauchy difference at the calibration abscissa drops
    /// below the target.
    pub fn sample(&self, sf: &dyn SpectralFn) -> Result<SpectralSample, PlanError> {
        self.sample_inner(sf, true)
    }

    /// Sequential-execution variant of [`sample`](Self::sample); the node
    /// set and result are identical (ordered reductions), only the map is
    /// single-threaded. Used by the benchmark suite as the baseline.
    pub fn sample_sequential(&self, sf: &dyn SpectralFn) -> Result<SpectralSample, PlanError> {
        self.sample_inner(sf, false)
    }

    fn sample_inner(&self, sf: &dyn SpectralFn, par: bool) -> Result<SpectralSample, PlanError> {
        let mut lam = Vec::new();
        let mut mant = Vec::new();
        let mut base = Vec::new();
        let mut achieved: f64 = 0.0;

        let push_nodes = |nodes: &[(C64, C64, Sc)], lam: &mut Vec<C64>, mant: &mut Vec<C64>, base: &mut Vec<C64>| {
            for &(l, w, v) in nodes {
                lam.push(l);
                mant.push(w * v.m);
                base.push(v.shift - self.a * l.powu(self.n as u32) * self.t);
            }
        };

        for seg in &self.segments {
            let nodes = self.calibrate_segment(seg, sf, &mut achieved, par)?;
            push_nodes(&nodes, &mut lam, &mut mant, &mut base);
        }
        for circ in &self.circles {
            let nodes = self.calibrate_circle(circ, sf, &mut achieved)?;
            push_nodes(&nodes, &mut lam, &mut mant, &mut base);
        }
        let node_count = lam.len();
        Ok(SpectralSample {
            lam,
            mant,
            base,
            achieved_tol: achieved,
            trunc_bound_ln: self.trunc_bound_ln,
            node_count,
        })
    }

    /// Convenience: sample then evaluate at one x.
    pub fn integrate(&self, sf: &dyn SpectralFn, x: f64) -> Result<C64, PlanError> {
        Ok(self.sample(sf)?.eval_at(x))
    }

    fn eval_node(&self, sf: &dyn SpectralFn, role: Role, lm: C64) -> Result<Sc, PlanError> {
        match role {
            Role::Side(h) => Ok(sf.eval(lm, h)?),
            Role::JumpA => {
                let (aa, _) = sf.jump_parts(lm).ok_or(PlanError::JumpUnavailable)?;
                Ok(Sc::plain(aa))
            }
            Role::JumpB => {
                let (_, bb) = sf.jump_parts(lm).ok_or(PlanError::JumpUnavailable)?;
                Ok(Sc::new(bb, -I * lm))
            }
        }
    }

    fn calibrate_segment(
        &self,
        seg: &PlanSegment,
        sf: &dyn SpectralFn,
        achieved: &mut f64,
        par: bool,
    ) -> Result<Vec<(C64, C64, Sc)>, PlanError> {
        let order = 12;
        let (gx, gw) = gauss_legendre(order);
        let make = |panels: usize| -> Vec<(C64, C64)> {
            // (λ, path weight)
            let mut out = Vec::with_capacity(panels * order);
            for p in 0..panels {
                let t0 = p as f64 / panels as f64;
                let t1 = (p + 1) as f64 / panels as f64;
                for (xi, wi) in gx.iter().zip(&gw) {
                    let u = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * xi;
                    let (z, dz) = param(&seg.geom, seg.len, u);
                    out.push((z, dz * (0.5 * (t1 - t0) * wi) * seg.coeff));
                }
            }
            out
        };
        let mut panels = initial_panels(seg);
        let mut prev: Option<(C64, Vec<(C64, C64, Sc)>)> = None;
        for _ in 0..14 {
            let raw = make(panels);
            let vals = self.evaluate_many(sf, seg.role, &raw, par)?;
            let total = self.reference_total(&vals, seg.xref);
            if let Some((pt, _)) = &prev {
                let diff = (total - pt).norm();
                if diff < self.target_tol * 0.25 || panels > (1 << 15) {
                    *achieved = achieved.max(diff);
                    return Ok(vals);
                }
            }
            prev = Some((total, vals));
            panels *= 2;
        }
        let (pt, vals) = prev.unwrap();
        *achieved = achieved.max((pt - self.reference_total(&vals, seg.xref)).norm().max(self.target_tol));
        Ok(vals)
    }

    fn calibrate_circle(
        &self,
        circ: &PlanCircle,
        sf: &dyn SpectralFn,
        achieved: &mut f64,
    ) -> Result<Vec<(C64, C64, Sc)>, PlanError> {
        let make = |nn: usize| -> Vec<(C64, C64)> {
            (0..nn)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / nn as f64;
                    let e = c(th.cos(), th.sin());
                    let z = circ.sigma + circ.radius * e;
                    let dz = circ.radius * c(-th.sin(), th.cos()) * (2.0 * std::f64::consts::PI / nn as f64);
                    (z, dz)
                })
                .collect()
        };
        let mut nn = 16;
        let mut prev: Option<(C64, Vec<(C64, C64, Sc)>)> = None;
        for _ in 0..10 {
            let raw = make(nn);
            let mut vals = Vec::with_capacity(raw.len());
            for &(z, w) in &raw {
                let mut v = Sc::zero();
                if circ.coeff_plus != 0 {
                    v = v.add(self.eval_node(sf, Role::Side(Half::Plus), z)?.scale(c(circ.coeff_plus as f64, 0.0)));
                }
                if circ.coeff_minus != 0 {
                    v = v.add(self.eval_node(sf, Role::Side(Half::Minus), z)?.scale(c(circ.coeff_minus as f64, 0.0)));
                }
                vals.push((z, w, v));
            }
            let total = self.reference_total(&vals, circ.xref);
            if let Some((pt, _)) = &prev {
                let diff = (total - pt).norm();
                if diff < self.target_tol * 0.25 || nn > 4096 {
                    *achieved = achieved.max(diff);
                    return Ok(vals);
                }
            }
            prev = Some((total, vals));
            nn *= 2;
        }
        let (_, vals) = prev.unwrap();
        Ok(vals)
    }

    fn evaluate_many(
        &self,
        sf: &dyn SpectralFn,
        role: Role,
        raw: &[(C64, C64)],
        par: bool,
    ) -> Result<Vec<(C64, C64, Sc)>, PlanError> {
        let vals = if par {
            crate::exec::try_map(raw, |&(z, _)| self.eval_node(sf, role, z))?
        } else {
            crate::exec::try_map_seq(raw, |&(z, _)| self.eval_node(sf, role, z))?
        };
        Ok(raw
            .iter()
            .zip(vals)
            .map(|(&(z, w), v)| (z, w, v))
            .collect())
    }

    fn reference_total(&self, vals: &[(C64, C64, Sc)], xref: f64) -> C64 {
        let mut s = c(0.0, 0.0);
        for &(z, w, v) in vals {
            let expo = v.shift + I * z * xref - self.a * z.powu(self.n as u32) * self.t;
            s += w * v.m * cexp(expo);
        }
        s
    }

    /// Greatest distance violation of plan nodes against the 2ε rule
    /// (circles excluded: they sit at ε/2ε of their own centers by design).
    pub fn min_node_clearance(&self, cat: &ZeroCatalog) -> f64 {
        let mut min = f64::INFINITY;
        for seg in &self.segments {
            for u in 0..64 {
                let (z, _) = param(&seg.geom, seg.len, (u as f64 + 0.5) / 64.0);
                min = min.min(cat.nearest_zero_distance(z));
            }
        }
        min
    }
}

fn initial_panels(seg: &PlanSegment) -> usize {
    // a couple of panels per unit length covers all phase rates here;
    // the doubling loop certifies the rest
    ((seg.len / 2.5).ceil() as usize).clamp(2, 1 << 12)
}

/// Position and path derivative at parameter u ∈ [0,1].
fn param(geom: &SegmentKind, len: f64, u: f64) -> (C64, C64) {
    match *geom {
        SegmentKind::Line { a, b } => (a + (b - a) * u, b - a),
        SegmentKind::Ray { anchor, angle } => {
            let dir = c(angle.cos(), angle.sin());
            (anchor + dir * (len * u), dir * len)
        }
        SegmentKind::Arc {
            center,
            radius,
            th0,
            th1,
        } => {
            let th = th0 + (th1 - th0) * u;
            let e = c(th.cos(), th.sin());
            (
                center + radius * e,
                radius * c(-th.sin(), th.cos()) * (th1 - th0),
            )
        }
        SegmentKind::Circle { center, radius, ccw } => {
            let sgn = if ccw { 1.0 } else { -1.0 };
            let th = 2.0 * std::f64::consts::PI * u * sgn;
            let e = c(th.cos(), th.sin());
            (
                center + radius * e,
                radius * c(-th.sin(), th.cos()) * 2.0 * std::f64::consts::PI * sgn,
            )
        }
    }
}

impl SpectralSample {
    pub fn eval_at(&self, x: f64) -> C64 {
        let mut s = c(0.0, 0.0);
        for i in 0..self.lam.len() {
            let expo = self.base[i] + I * self.lam[i] * x;
            s += self.mant[i] * cexp(expo);
        }
        s
    }
}

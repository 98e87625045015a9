//! Oriented contour systems: the ε-circle family Γ₀, the sector boundaries
//! Γₐ of {Re(aλⁿ) > 0} with 2ε-disk avoidance, the fixed LKdV figure
//! contours, and residue circles. The quadrature planner consumes the same
//! sector/detour geometry; the segment lists here are the literal, dumpable
//! view used by plots and distance-invariant checks.

use crate::charmat::Half;
use crate::num::{c, C64};
use crate::zeros::{dist_to_ray, ZeroCatalog};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    /// Straight piece from a to b.
    Line { a: C64, b: C64 },
    /// Arc of C(center, radius) from angle th0 to th1 (signed sweep).
    Arc {
        center: C64,
        radius: f64,
        th0: f64,
        th1: f64,
    },
    /// Full circle, positively oriented when ccw.
    Circle { center: C64, radius: f64, ccw: bool },
    /// Ray from anchor to infinity in direction angle (truncated by plans).
    Ray { anchor: C64, angle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Gamma0,
    GammaA,
    LkdvGamma,
    ResidueCircle,
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub id: usize,
    pub kind: SegmentKind,
    pub half: Half,
    pub purpose: Purpose,
}

/// An angular sector {θ ∈ (lo, hi)} of one half-plane where Re(aλⁿ) > 0.
#[derive(Debug, Clone, Copy)]
pub struct Sector {
    pub half: Half,
    pub lo: f64,
    pub hi: f64,
}

impl Sector {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains_angle(&self, th: f64) -> bool {
        th > self.lo + 1e-12 && th < self.hi - 1e-12
    }
}

/// Sectors of {Re(a λⁿ) > 0}, split at the real axis and tagged by
/// half-plane. Angles are in (-π, π].
pub fn sectors(n: usize, a: C64) -> Vec<Sector> {
    let phi = a.arg();
    let mut cuts: Vec<f64> = Vec::new();
    // boundaries where cos(φ + nθ) = 0
    let nf = n as f64;
    let mut m = (-(nf + 2.0)).floor() as i64 - 2;
    while (m as f64) < 2.0 * nf + 4.0 {
        for sgn in [-1.0, 1.0] {
            let th = (sgn * std::f64::consts::FRAC_PI_2 - phi + 2.0 * std::f64::consts::PI * m as f64) / nf;
            if th > -std::f64::consts::PI - 1e-12 && th <= std::f64::consts::PI + 1e-12 {
                cuts.push(th);
            }
        }
        m += 1;
    }
    cuts.push(-std::f64::consts::PI);
    cuts.push(0.0);
    cuts.push(std::f64::consts::PI);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let mut out = Vec::new();
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi - lo < 1e-10 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let val = (a * c(mid.cos(), mid.sin()).powu(n as u32)).re;
        if val > 0.0 {
            let half = if mid > 0.0 { Half::Plus } else { Half::Minus };
            out.push(Sector { half, lo, hi });
        }
    }
    out
}

/// All sector edge angles (each sector contributes lo and hi).
pub fn edge_angles(secs: &[Sector]) -> Vec<f64> {
    let mut v: Vec<f64> = secs.iter().flat_map(|s| [s.lo, s.hi]).collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    v
}

/// Detour side for an edge ray: +1 bulges toward e^{i(angle+π/2)}, -1 the
/// other way. Region boundaries bulge into the sector interior.
pub fn interior_bulge(sector: &Sector, edge_angle: f64) -> f64 {
    if (edge_angle - sector.lo).abs() < (edge_angle - sector.hi).abs() {
        1.0
    } else {
        -1.0
    }
}

/// Pieces of an edge ray from radius r0 outward, bulging around on-edge
/// zeros with 2ε arcs. Emitted in outgoing order; `trunc` may be infinite
/// (final piece becomes a Ray).
pub fn edge_path(
    angle: f64,
    r0: f64,
    trunc: f64,
    on_edge: &[C64],
    two_eps: f64,
    bulge: f64,
) -> Vec<SegmentKind> {
    let dir = c(angle.cos(), angle.sin());
    let mut zs: Vec<(f64, C64)> = on_edge
        .iter()
        .map(|&z| ((z * dir.conj()).re, z))
        .filter(|(s, z)| {
            *s > r0 && (trunc.is_infinite() || *s < trunc) && dist_to_ray(*z, angle) < two_eps
        })
        .collect();
    zs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    let mut pieces = Vec::new();
    let mut cursor = dir * r0;
    for (s0, z) in zs {
        let d = (z - dir * s0).norm();
        let rc = (two_eps * two_eps - d * d).max(0.0).sqrt();
        let entry = dir * (s0 - rc);
        let exit = dir * (s0 + rc);
        if (entry - cursor).norm() > 1e-12 {
            pieces.push(SegmentKind::Line { a: cursor, b: entry });
        }
        let th0 = (entry - z).arg();
        let th1_raw = (exit - z).arg();
        let mid_target = angle + bulge * std::f64::consts::FRAC_PI_2;
        // pick the branch of th1 passing the bulge side; a 2ε detour never
        // exceeds a half turn
        let mut best = th1_raw;
        let mut best_err = f64::INFINITY;
        for k in [-1.0, 0.0, 1.0] {
            let cand = th1_raw + 2.0 * std::f64::consts::PI * k;
            if (cand - th0).abs() > std::f64::consts::PI + 1e-9 {
                continue;
            }
            let midang = 0.5 * (th0 + cand);
            let err = angle_dist(midang, mid_target);
            if err < best_err {
                best_err = err;
                best = cand;
            }
        }
        pieces.push(SegmentKind::Arc {
            center: z,
            radius: two_eps,
            th0,
            th1: best,
        });
        cursor = exit;
    }
    if trunc.is_infinite() {
        pieces.push(SegmentKind::Ray {
            anchor: cursor,
            angle,
        });
    } else if ((dir * trunc) - cursor).norm() > 1e-12 {
        pieces.push(SegmentKind::Line {
            a: cursor,
            b: dir * trunc,
        });
    }
    pieces
}

fn angle_dist(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % (2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    if d < -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    d.abs()
}

/// Γ₀: one positively oriented ε-circle per cataloged zero, tagged by the
/// half-plane the zero is assigned to.
pub fn build_gamma0(cat: &ZeroCatalog) -> Vec<Segment> {
    cat.zeros
        .iter()
        .enumerate()
        .map(|(id, z)| Segment {
            id,
            kind: SegmentKind::Circle {
                center: z.sigma,
                radius: cat.epsilon,
                ccw: true,
            },
            half: cat.half_of(z.sigma),
            purpose: Purpose::Gamma0,
        })
        .collect()
}

/// Γₐ±: positively oriented boundaries of the sectors {Re(aλⁿ)>0} minus
/// 2ε-disks: per sector an incoming edge, an inner junction arc, an outgoing
/// edge, plus negatively oriented 2ε-circles around interior zeros.
pub fn build_gamma_a(n: usize, a: C64, cat: &ZeroCatalog) -> Vec<Segment> {
    let secs = sectors(n, a);
    let eps = cat.epsilon;
    let two_eps = 2.0 * eps;
    let r0 = if cat.removable_at_origin { two_eps } else { 0.0 };
    let mut segs = Vec::new();
    let mut id = 0;
    let push = |kind: SegmentKind, half: Half, segs: &mut Vec<Segment>, id: &mut usize| {
        segs.push(Segment {
            id: *id,
            kind,
            half,
            purpose: Purpose::GammaA,
        });
        *id += 1;
    };
    for sec in &secs {
        let on_edge = |angle: f64| -> Vec<C64> {
            cat.zeros
                .iter()
                .map(|z| z.sigma)
                .filter(|&z| z.norm() > r0 * 0.99 && dist_to_ray(z, angle) < eps)
                .collect()
        };
        // incoming hi edge (reversed outgoing pieces)
        let hi_pieces = edge_path(sec.hi, r0, f64::INFINITY, &on_edge(sec.hi), two_eps, -1.0);
        for p in hi_pieces.into_iter().rev() {
            push(reverse_piece(p), sec.half, &mut segs, &mut id);
        }
        // junction arc along C(0, r0) from hi to lo through the interior
        if r0 > 0.0 {
            push(
                SegmentKind::Arc {
                    center: c(0.0, 0.0),
                    radius: r0,
                    th0: sec.hi,
                    th1: sec.lo,
                },
                sec.half,
                &mut segs,
                &mut id,
            );
        }
        // outgoing lo edge
        for p in edge_path(sec.lo, r0, f64::INFINITY, &on_edge(sec.lo), two_eps, 1.0) {
            push(p, sec.half, &mut segs, &mut id);
        }
        // interior zeros: negatively oriented 2ε circles
        for z in &cat.zeros {
            let th = z.sigma.arg();
            if z.sigma.norm() > r0
                && sec.contains_angle(th)
                && dist_to_ray(z.sigma, sec.lo) >= eps
                && dist_to_ray(z.sigma, sec.hi) >= eps
            {
                push(
                    SegmentKind::Circle {
                        center: z.sigma,
                        radius: two_eps,
                        ccw: false,
                    },
                    sec.half,
                    &mut segs,
                    &mut id,
                );
            }
        }
    }
    segs
}

fn reverse_piece(p: SegmentKind) -> SegmentKind {
    match p {
        SegmentKind::Line { a, b } => SegmentKind::Line { a: b, b: a },
        SegmentKind::Arc {
            center,
            radius,
            th0,
            th1,
        } => SegmentKind::Arc {
            center,
            radius,
            th0: th1,
            th1: th0,
        },
        SegmentKind::Circle { center, radius, ccw } => SegmentKind::Circle {
            center,
            radius,
            ccw: !ccw,
        },
        // a reversed infinite ray only appears inside edge assembly, where
        // the planner re-parametrizes it; keep the tag
        SegmentKind::Ray { anchor, angle } => SegmentKind::Ray { anchor, angle },
    }
}

/// The fixed LKdV contour system of the introduction: Γ₀ = C(0, 1/2) and
/// Γ± = boundaries of {λ ∈ C± : Im λ³ > 0, |λ| > r}, r defaulting to 1.
pub fn build_lkdv_contours(arc_radius: f64) -> Vec<Segment> {
    let a = c(0.0, -1.0);
    let secs = sectors(3, a);
    let mut segs = vec![Segment {
        id: 0,
        kind: SegmentKind::Circle {
            center: c(0.0, 0.0),
            radius: 0.5,
            ccw: true,
        },
        half: Half::Plus,
        purpose: Purpose::LkdvGamma,
    }];
    let mut id = 1;
    for sec in &secs {
        segs.push(Segment {
            id,
            kind: SegmentKind::Ray {
                anchor: arc_radius * c(sec.hi.cos(), sec.hi.sin()),
                angle: sec.hi,
            },
            half: sec.half,
            purpose: Purpose::LkdvGamma,
        });
        id += 1;
        segs.push(Segment {
            id,
            kind: SegmentKind::Arc {
                center: c(0.0, 0.0),
                radius: arc_radius,
                th0: sec.hi,
                th1: sec.lo,
            },
            half: sec.half,
            purpose: Purpose::LkdvGamma,
        });
        id += 1;
        segs.push(Segment {
            id,
            kind: SegmentKind::Ray {
                anchor: arc_radius * c(sec.lo.cos(), sec.lo.sin()),
                angle: sec.lo,
            },
            half: sec.half,
            purpose: Purpose::LkdvGamma,
        });
        id += 1;
    }
    segs
}

/// ε-circles around the N smallest-|σ| zeros (the residue-series contours).
pub fn residue_circles(cat: &ZeroCatalog, n_terms: usize) -> Vec<Segment> {
    cat.zeros
        .iter()
        .take(n_terms)
        .enumerate()
        .map(|(id, z)| Segment {
            id,
            kind: SegmentKind::Circle {
                center: z.sigma,
                radius: cat.epsilon,
                ccw: true,
            },
            half: cat.half_of(z.sigma),
            purpose: Purpose::ResidueCircle,
        })
        .collect()
}

/// Sample points along a segment (for dumps and distance checks); rays are
/// cut at `ray_len`.
pub fn sample_points(kind: &SegmentKind, count: usize, ray_len: f64) -> Vec<C64> {
    let ts: Vec<f64> = (0..count).map(|k| (k as f64 + 0.5) / count as f64).collect();
    match *kind {
        SegmentKind::Line { a, b } => ts.iter().map(|&t| a + (b - a) * t).collect(),
        SegmentKind::Arc {
            center,
            radius,
            th0,
            th1,
        } => ts
            .iter()
            .map(|&t| {
                let th = th0 + (th1 - th0) * t;
                center + radius * c(th.cos(), th.sin())
            })
            .collect(),
        SegmentKind::Circle { center, radius, .. } => ts
            .iter()
            .map(|&t| {
                let th = 2.0 * std::f64::consts::PI * t;
                center + radius * c(th.cos(), th.sin())
            })
            .collect(),
        SegmentKind::Ray { anchor, angle } => ts
            .iter()
            .map(|&t| anchor + ray_len * t * c(angle.cos(), angle.sin()))
            .collect(),
    }
}

//! The symmetrized bidisk `G = {(z₁+z₂, z₁z₂) : |z₁|, |z₂| < 1}`.
//!
//! Membership is decided through the coordinate family
//! `φ(α, s, p) = (2αp − s)/(2 − αs)`: a point `(s, p)` with `|s| < 2` lies in
//! `G` exactly when `|φ(α, s, p)| < 1` for every `|α| ≤ 1`. For fixed `(s, p)`
//! the map `α ↦ φ` is holomorphic on a neighborhood of the closed disk, so the
//! supremum is a one-dimensional search over the unit circle.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Default absolute accuracy of [`sup_phi`].
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;

const SCAN_POINTS: usize = 1024;

/// A point of `G` with its certified membership margin `1 − sup_α |φ(α, s, p)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GPoint {
    s: C64,
    p: C64,
    margin: f64,
}

impl GPoint {
    /// Validates membership; points on or outside the boundary are rejected.
    pub fn new(s: C64, p: C64) -> Result<Self> {
        let m = is_member(s, p);
        if !m.member {
            return Err(Error::Domain(format!(
                "({s}, {p}) is not in the symmetrized bidisk (sup |φ| = {})",
                m.sup_phi
            )));
        }
        Ok(GPoint {
            s,
            p,
            margin: m.margin,
        })
    }

    /// The image `π(z₁, z₂)` of a bidisk point.
    pub fn from_pair(z1: C64, z2: C64) -> Result<Self> {
        let (s, p) = symmetrize(z1, z2);
        Self::new(s, p)
    }

    pub fn s(&self) -> C64 {
        self.s
    }

    pub fn p(&self) -> C64 {
        self.p
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// `φ(α, s, p)` without the domain check; valid for `|α| ≤ 1`.
    #[inline]
    pub fn phi(&self, alpha: C64) -> C64 {
        phi_unchecked(alpha, self.s, self.p)
    }

    /// Max-coordinate distance to another point.
    pub fn distance(&self, other: &GPoint) -> f64 {
        (self.s - other.s).norm().max((self.p - other.p).norm())
    }
}

/// `π(z₁, z₂) = (z₁ + z₂, z₁z₂)`.
pub fn symmetrize(z1: C64, z2: C64) -> (C64, C64) {
    (z1 + z2, z1 * z2)
}

#[inline]
pub(crate) fn phi_unchecked(alpha: C64, s: C64, p: C64) -> C64 {
    (2.0 * alpha * p - s) / (2.0 - alpha * s)
}

/// `φ(α, s, p) = (2αp − s)/(2 − αs)`.
pub fn phi(alpha: C64, s: C64, p: C64) -> Result<C64> {
    let den = 2.0 - alpha * s;
    if den.norm() < 1e-14 {
        return Err(Error::Domain(format!(
            "2 − αs vanishes at α = {alpha}, s = {s}"
        )));
    }
    Ok((2.0 * alpha * p - s) / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupPhi {
    pub sup: f64,
    pub witness_alpha: C64,
}

/// `sup_{|α| ≤ 1} |φ(α, s, p)|`, attained on the unit circle.
///
/// A 1024-point scan in `θ = arg α` followed by golden-section refinement
/// around the best sample. `|φ(e^{iθ})|` traces a circle's modulus under a
/// linear fractional map, so it has a single local maximum.
pub fn sup_phi(s: C64, p: C64, refine_tol: f64) -> Result<SupPhi> {
    if !(s.norm() < 2.0) {
        return Err(Error::Domain(format!("|s| = {} is not below 2", s.norm())));
    }
    let value = |theta: f64| phi_unchecked(C64::from_polar(1.0, theta), s, p).norm();
    let step = TAU / SCAN_POINTS as f64;
    let (best_k, _) = (0..SCAN_POINTS)
        .map(|k| (k, value(k as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let center = best_k as f64 * step;
    let (theta, sup) = golden_max(value, center - step, center + step, refine_tol);
    Ok(SupPhi {
        sup,
        witness_alpha: C64::from_polar(1.0, theta.rem_euclid(TAU)),
    })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), lo, hi, tol);
    (x, -v)
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`; returns the best
/// point seen, endpoints and midpoint included.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = [(lo, f(lo)), (hi, f(hi)), (0.5 * (lo + hi), f(0.5 * (lo + hi)))]
        .into_iter()
        .fold((lo, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let tol = tol.max(1e-15);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        for cand in [(c, fc), (d, fd)] {
            if cand.1 < best.1 {
                best = cand;
            }
        }
        iters += 1;
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    /// `1 − sup_phi` (negative or zero outside `G`).
    pub margin: f64,
    pub sup_phi: f64,
    pub witness_alpha: C64,
}

/// Strict membership test; no tolerance slack, the margin is reported instead.
pub fn is_member(s: C64, p: C64) -> Membership {
    if !s.re.is_finite() || !s.im.is_finite() || !p.re.is_finite() || !p.im.is_finite() {
        return Membership {
            member: false,
            margin: f64::NEG_INFINITY,
            sup_phi: f64::INFINITY,
            witness_alpha: C64::new(1.0, 0.0),
        };
    }
    match sup_phi(s, p, DEFAULT_REFINE_TOL) {
        Ok(sp) => Membership {
            member: sp.sup < 1.0,
            margin: 1.0 - sp.sup,
            sup_phi: sp.sup,
            witness_alpha: sp.witness_alpha,
        },
        Err(_) => Membership {
            member: false,
            margin: 0.0,
            sup_phi: f64::INFINITY,
            witness_alpha: C64::new(1.0, 0.0),
        },
    }
}

/// Uniform (area measure) sample from the open unit disk.
pub(crate) fn disk_sample<R: Rng>(rng: &mut R) -> C64 {
    let r = rng.gen::<f64>().sqrt();
    let t = rng.gen::<f64>() * 2.0 * PI;
    C64::from_polar(r, t)
}

/// `count` points `π(z₁, z₂)` with `z₁, z₂` area-uniform in the unit disk.
///
/// Deterministic in `seed`; draws that land numerically on the boundary are
/// redrawn so every returned point is a strict member.
pub fn sample_g(count: usize, seed: u64) -> Vec<GPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z1 = disk_sample(&mut rng);
        let z2 = disk_sample(&mut rng);
        if let Ok(pt) = GPoint::from_pair(z1, z2) {
            out.push(pt);
        }
    }
    out
}

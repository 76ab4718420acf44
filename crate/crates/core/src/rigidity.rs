//! Twisted commutation: detecting `η` with `F∘H = C_η∘H∘F`, commutation of
//! maps and of their squares, fixed points of `H` and `H²`, and a combined
//! report.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::dynamics::filtration_radius;
use crate::error::{Error, Result};
use crate::henon::{HenonChain, Point2, DEFAULT_EXPANSION_CAP};
use crate::poly::{fmt_complex, BivariatePolynomial, Complex, Exponent, PolyMap2};

pub const FIXED_POINT_MERGE_RADIUS: f64 = 1e-6;
const NEWTON_MAX_STEPS: usize = 60;
const LATTICE_SIDE: usize = 17;

/// Which right-hand twist accompanies `F∘H = C_η∘H∘F`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RightTwist {
    /// `F∘H = H∘F∘C_η`.
    Eta,
    /// `F∘H = H∘F∘C_η⁻¹`.
    EtaInverse,
    Neither,
}

impl fmt::Display for RightTwist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RightTwist::Eta => "H∘F∘C_eta",
            RightTwist::EtaInverse => "H∘F∘C_eta^-1",
            RightTwist::Neither => "neither",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistCandidate {
    pub eta: Complex,
    /// Coefficient residual of `C_η∘H∘F` against `F∘H`.
    pub residual: f64,
    /// `η⁻¹` proposed from the second coordinates.
    pub witness_inverse: Complex,
    pub right_eta_residual: f64,
    pub right_eta_inverse_residual: f64,
    pub right: RightTwist,
}

impl TwistCandidate {
    pub fn relation(&self) -> &'static str {
        "F∘H = C_eta∘H∘F"
    }
}

fn largest_term(p: &BivariatePolynomial) -> Option<(Exponent, Complex)> {
    p.terms().fold(
        None,
        |best: Option<(Exponent, Complex)>, (e, c)| match best {
            Some((_, b)) if b.norm() >= c.norm() => best,
            _ => Some((e, c)),
        },
    )
}

fn support_above(p: &BivariatePolynomial, cut: f64) -> BTreeSet<Exponent> {
    p.terms()
        .filter(|(_, c)| c.norm() > cut)
        .map(|(e, _)| e)
        .collect()
}

/// Twist of the shape `F∘H = C_η∘H∘F`, if one holds within `tol`.
pub fn find_twist(f: &HenonChain, h: &HenonChain, tol: f64) -> Result<Option<TwistCandidate>> {
    let fh = h.then(f).expand()?;
    let hf = f.then(h).expand()?;
    for (name, a, b) in [
        ("first", &fh.first, &hf.first),
        ("second", &fh.second, &hf.second),
    ] {
        let cut = tol * a.max_abs_coeff().max(b.max_abs_coeff()).max(1.0);
        let (sa, sb) = (support_above(a, cut), support_above(b, cut));
        if sa != sb {
            return Err(Error::DegreeMismatch(format!(
                "{name} coordinates of F∘H and H∘F have different supports ({} vs {} terms)",
                sa.len(),
                sb.len()
            )));
        }
    }
    let (Some((e1, c1)), Some((e2, c2))) = (largest_term(&hf.first), largest_term(&hf.second))
    else {
        return Ok(None);
    };
    let eta = fh.first.term(e1) / c1;
    let witness_inverse = fh.second.term(e2) / c2;
    if eta.norm() == 0.0 || !eta.is_finite() {
        return Ok(None);
    }
    let residual = PolyMap2::twist(eta).compose(&hf)?.residual(&fh);
    if residual > tol {
        return Ok(None);
    }
    let right_eta_residual = hf.compose(&PolyMap2::twist(eta))?.residual(&fh);
    let right_eta_inverse_residual = hf.compose(&PolyMap2::twist(eta.inv()))?.residual(&fh);
    let right = if right_eta_residual <= tol {
        RightTwist::Eta
    } else if right_eta_inverse_residual <= tol {
        RightTwist::EtaInverse
    } else {
        RightTwist::Neither
    };
    Ok(Some(TwistCandidate {
        eta,
        residual,
        witness_inverse,
        right_eta_residual,
        right_eta_inverse_residual,
        right,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommuteResult {
    pub commute: bool,
    pub residual: f64,
}

pub fn check_commute(f: &HenonChain, h: &HenonChain, tol: f64) -> Result<CommuteResult> {
    check_commute_with_cap(f, h, tol, DEFAULT_EXPANSION_CAP)
}

pub fn check_commute_with_cap(
    f: &HenonChain,
    h: &HenonChain,
    tol: f64,
    cap: usize,
) -> Result<CommuteResult> {
    let fh = h.then(f).expand_with_cap(cap)?;
    let hf = f.then(h).expand_with_cap(cap)?;
    let (commute, residual) = fh.equal_within(&hf, tol);
    Ok(CommuteResult { commute, residual })
}

/// `F²∘H² = H²∘F²`.
pub fn verify_squares_commute(f: &HenonChain, h: &HenonChain, tol: f64) -> Result<CommuteResult> {
    verify_squares_commute_with_cap(f, h, tol, DEFAULT_EXPANSION_CAP)
}

pub fn verify_squares_commute_with_cap(
    f: &HenonChain,
    h: &HenonChain,
    tol: f64,
    cap: usize,
) -> Result<CommuteResult> {
    check_commute_with_cap(&f.power(2)?, &h.power(2)?, tol, cap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointSet {
    pub points: Vec<Point2>,
    /// `‖Hᵏ(p) − p‖` for each point.
    pub residuals: Vec<f64>,
    pub seeds_used: usize,
    pub seeds_failed: usize,
}

type Vec2 = [Complex; 2];

fn residual_map(h: &HenonChain, order: usize, z: Vec2) -> Option<Vec2> {
    let mut p = Point2::new(z[0], z[1]);
    for _ in 0..order {
        p = h.forward(p);
    }
    let g = [p.x - z[0], p.y - z[1]];
    (g[0].is_finite() && g[1].is_finite()).then_some(g)
}

fn norm2(v: &Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn newton(h: &HenonChain, order: usize, seed: Vec2) -> Option<Vec2> {
    let mut z = seed;
    let mut g = residual_map(h, order, z)?;
    for _ in 0..NEWTON_MAX_STEPS {
        let scale = 1.0 + norm2(&z);
        if norm2(&g) <= 4.0 * f64::EPSILON * scale {
            return Some(z);
        }
        // Holomorphic map: real-direction central differences give the complex partials.
        let step = 1e-6 * scale;
        let mut jac = [[Complex::new(0.0, 0.0); 2]; 2];
        for k in 0..2 {
            let mut plus = z;
            let mut minus = z;
            plus[k] += step;
            minus[k] -= step;
            let gp = residual_map(h, order, plus)?;
            let gm = residual_map(h, order, minus)?;
            for i in 0..2 {
                jac[i][k] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let dz = [
            (jac[1][1] * g[0] - jac[0][1] * g[1]) / det,
            (jac[0][0] * g[1] - jac[1][0] * g[0]) / det,
        ];
        let current = norm2(&g);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = [z[0] - dz[0] * lambda, z[1] - dz[1] * lambda];
            if let Some(gt) = residual_map(h, order, trial) {
                if norm2(&gt) < current {
                    accepted = Some((trial, gt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((next, gn)) = accepted else {
            break;
        };
        z = next;
        g = gn;
    }
    (norm2(&g) <= 1e-10 * (1.0 + norm2(&z))).then_some(z)
}

fn seed_lattice(radius: f64) -> Vec<Vec2> {
    let n = LATTICE_SIDE;
    let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
    let offsets = [-radius / 2.0, 0.0, radius / 2.0];
    let mut seeds = Vec::with_capacity(n * n * 9);
    for i in 0..n {
        for j in 0..n {
            for s in offsets {
                for t in offsets {
                    seeds.push([Complex::new(coord(i), s), Complex::new(coord(j), t)]);
                }
            }
        }
    }
    seeds
}

fn canonical_cmp(a: &Point2, b: &Point2) -> std::cmp::Ordering {
    [a.x.re, a.x.im, a.y.re, a.y.im]
        .iter()
        .zip([b.x.re, b.x.im, b.y.re, b.y.im].iter())
        .map(|(u, v)| u.total_cmp(v))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Solutions of `Hᵏ(z) = z` (`k` = `order` ∈ {1, 2}) inside the bidisk of
/// radius `R`, by damped Newton from a fixed seed lattice.
pub fn fixed_points(h: &HenonChain, order: usize) -> Result<FixedPointSet> {
    if !(1..=2).contains(&order) {
        return Err(Error::PreconditionViolated(format!(
            "order must be 1 or 2, got {order}"
        )));
    }
    let radius = filtration_radius(h)?.radius;
    let seeds = seed_lattice(radius);
    let converged: Vec<Option<Point2>> = seeds
        .par_iter()
        .map(|&seed| {
            newton(h, order, seed)
                .map(|z| Point2::new(z[0], z[1]))
                .filter(|p| p.max_abs() <= radius * (1.0 + 1e-9))
        })
        .collect();
    let seeds_failed = converged.iter().filter(|p| p.is_none()).count();

    let mut candidates: Vec<Point2> = converged.into_iter().flatten().collect();
    candidates.sort_by(canonical_cmp);
    let mut points: Vec<Point2> = Vec::new();
    for p in candidates {
        if points.iter().all(|q| q.dist(&p) > FIXED_POINT_MERGE_RADIUS) {
            points.push(p);
        }
    }

    let mut residuals = Vec::with_capacity(points.len());
    let mut verified = Vec::with_capacity(points.len());
    for p in points {
        let image = (0..order).fold(p, |z, _| h.forward(z));
        let r = image.dist(&p);
        if r <= 1e-8 * (1.0 + p.norm()) {
            verified.push(p);
            residuals.push(r);
        }
    }
    Ok(FixedPointSet {
        points: verified,
        residuals,
        seeds_used: seeds.len(),
        seeds_failed,
    })
}

/// Result of one report section; sections fail independently.
#[derive(Clone, Debug, PartialEq)]
pub enum Section<T> {
    Done(T),
    NotComputed(String),
}

impl<T> Section<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Section::Done(v),
            Err(Error::ExpansionTooLarge { degree, cap }) => {
                Section::NotComputed(format!("not computed (cap): degree {degree} exceeds {cap}"))
            }
            Err(e) => Section::NotComputed(format!("not computed: {e}")),
        }
    }

    pub fn done(&self) -> Option<&T> {
        match self {
            Section::Done(v) => Some(v),
            Section::NotComputed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityReport {
    pub tolerance: f64,
    pub twist: Section<Option<TwistCandidate>>,
    pub commute_fh: Section<CommuteResult>,
    pub commute_squares: Section<CommuteResult>,
    pub jacobian_f: Complex,
    pub jacobian_h: Complex,
    pub notes: Vec<String>,
}

pub fn rigidity_report(f: &HenonChain, h: &HenonChain, tol: f64) -> RigidityReport {
    rigidity_report_with_cap(f, h, tol, DEFAULT_EXPANSION_CAP)
}

pub fn rigidity_report_with_cap(
    f: &HenonChain,
    h: &HenonChain,
    tol: f64,
    cap: usize,
) -> RigidityReport {
    let twist = match (
        h.then(f).expand_with_cap(cap),
        f.then(h).expand_with_cap(cap),
    ) {
        (Ok(_), Ok(_)) => Section::from_result(find_twist(f, h, tol)),
        (Err(e), _) | (_, Err(e)) => Section::from_result(Err(e)),
    };
    let commute_fh = Section::from_result(check_commute_with_cap(f, h, tol, cap));
    let commute_squares = Section::from_result(verify_squares_commute_with_cap(f, h, tol, cap));
    let jacobian_f = f.jacobian_det();
    let jacobian_h = h.jacobian_det();

    let mut notes = vec!["det C_eta = 1 for every eta".to_string()];
    match twist.done() {
        Some(Some(t)) => {
            notes.push(format!("|eta| - 1 = {:.3e}", t.eta.norm() - 1.0));
            notes.push(format!("right-hand relation: F∘H = {}", t.right));
        }
        Some(None) => notes.push("no twist of the form F∘H = C_eta∘H∘F within tolerance".into()),
        None => {}
    }
    if (jacobian_f.norm() - 1.0).abs() <= tol && (jacobian_h.norm() - 1.0).abs() <= tol {
        notes.push("both Jacobians have modulus 1".into());
    } else {
        notes.push(format!(
            "Jacobian moduli: |det F| = {}, |det H| = {}",
            jacobian_f.norm(),
            jacobian_h.norm()
        ));
    }
    if let (Some(c), Some(s)) = (commute_fh.done(), commute_squares.done()) {
        if c.commute && !s.commute {
            notes.push("inconsistent: F and H commute but their squares do not".into());
        }
    }
    RigidityReport {
        tolerance: tol,
        twist,
        commute_fh,
        commute_squares,
        jacobian_f,
        jacobian_h,
        notes,
    }
}

fn complex_json(c: Complex) -> Value {
    json!([c.re, c.im])
}

fn commute_json(s: &Section<CommuteResult>) -> Value {
    match s {
        Section::Done(c) => {
            json!({"status": "computed", "commute": c.commute, "residual": c.residual})
        }
        Section::NotComputed(why) => json!({"status": why}),
    }
}

impl RigidityReport {
    pub fn to_json(&self) -> Value {
        let twist = match &self.twist {
            Section::Done(Some(t)) => json!({
                "status": "computed",
                "found": true,
                "eta": complex_json(t.eta),
                "residual": t.residual,
                "relation": t.relation(),
                "witness_eta_inverse": complex_json(t.witness_inverse),
                "right_relation": t.right.to_string(),
                "right_eta_residual": t.right_eta_residual,
                "right_eta_inverse_residual": t.right_eta_inverse_residual,
            }),
            Section::Done(None) => json!({"status": "computed", "found": false}),
            Section::NotComputed(why) => json!({"status": why}),
        };
        json!({
            "tolerance": self.tolerance,
            "twist": twist,
            "commute_FH": commute_json(&self.commute_fh),
            "commute_squares": commute_json(&self.commute_squares),
            "jacobians": {"F": complex_json(self.jacobian_f), "H": complex_json(self.jacobian_h)},
            "notes": self.notes,
        })
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.twist {
            Section::Done(Some(t)) => {
                let _ = writeln!(out, "twist: {}", fmt_complex(t.eta));
                let _ = writeln!(out, "twist_residual: {:e}", t.residual);
                let _ = writeln!(out, "twist_relation: {}", t.relation());
                let _ = writeln!(out, "twist_right: {}", t.right);
            }
            Section::Done(None) => out.push_str("twist: none\n"),
            Section::NotComputed(why) => {
                let _ = writeln!(out, "twist: {why}");
            }
        }
        for (key, s) in [
            ("commute_FH", &self.commute_fh),
            ("commute_squares", &self.commute_squares),
        ] {
            match s {
                Section::Done(c) => {
                    let _ = writeln!(out, "{key}: {}", c.commute);
                    let _ = writeln!(out, "{key}_residual: {:e}", c.residual);
                }
                Section::NotComputed(why) => {
                    let _ = writeln!(out, "{key}: {why}");
                }
            }
        }
        let _ = writeln!(out, "jacobian_F: {}", fmt_complex(self.jacobian_f));
        let _ = writeln!(out, "jacobian_H: {}", fmt_complex(self.jacobian_h));
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henon::ElementaryFactor;
    use crate::poly::Polynomial;
    use crate::random::random_chain;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn basic() -> HenonChain {
        HenonChain::simple_real(&[0.0, 0.0, 1.0]).unwrap()
    }

    fn omega() -> Complex {
        Complex::from_polar(1.0, TAU / 3.0)
    }

    /// `C_ω∘H = (ωy, ω²y² − ω²x)`.
    fn example_f() -> HenonChain {
        let w = omega();
        let w2 = w * w;
        HenonChain::single(
            ElementaryFactor::new(
                w,
                Complex::new(0.0, 0.0),
                w2,
                Polynomial::new(vec![Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), w2]).unwrap(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn twist_of_identical_maps_is_one() {
        let t = find_twist(&basic(), &basic(), 1e-9).unwrap().unwrap();
        assert!((t.eta - Complex::new(1.0, 0.0)).norm() <= 1e-12);
        assert!(t.residual <= 1e-12);
    }

    #[test]
    fn example_pair_twist() {
        let t = find_twist(&example_f(), &basic(), 1e-9).unwrap().unwrap();
        let w2 = omega() * omega();
        assert!((t.eta - w2).norm() <= 1e-9);
        assert!(t.residual <= 1e-9);
        assert!((t.witness_inverse - w2.inv()).norm() <= 1e-9);
        assert!((t.eta.norm() - 1.0).abs() <= 1e-6);
        assert_eq!(t.right, RightTwist::Eta);
    }

    #[test]
    fn unrelated_pair_has_no_twist() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_chain(&mut rng, 1);
        let h = basic();
        match find_twist(&f, &h, 1e-9) {
            Err(Error::DegreeMismatch(_)) | Ok(None) => {}
            other => panic!("unexpected {other:?}"),
        }
        // No point of the unit circle comes close.
        let fh = h.then(&f).expand().unwrap();
        let hf = f.then(&h).expand().unwrap();
        let best = (0..360)
            .map(|k| Complex::from_polar(1.0, TAU * k as f64 / 360.0))
            .map(|eta| PolyMap2::twist(eta).compose(&hf).unwrap().residual(&fh))
            .fold(f64::INFINITY, f64::min);
        assert!(best > 1e-3, "{best}");
    }

    #[test]
    fn twist_from_admissible_group() {
        // H with p = y + y^3 has twist group {±1}; F = C_{-1}∘H.
        let h = HenonChain::simple_real(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        let group = crate::normal_form::admissible_twist_group(
            &crate::normal_form::NormalChain::from_chain(&h).unwrap(),
        )
        .unwrap();
        assert!(group.contains(Complex::new(-1.0, 0.0)));
        let f = HenonChain::single(
            ElementaryFactor::new(
                Complex::new(-1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(-1.0, 0.0),
                Polynomial::from_real(&[0.0, -1.0, 0.0, -1.0]),
            )
            .unwrap(),
        );
        let (ok, _) = f.expand().unwrap().equal_within(
            &PolyMap2::twist(Complex::new(-1.0, 0.0))
                .compose(&h.expand().unwrap())
                .unwrap(),
            1e-12,
        );
        assert!(ok);
        let t = find_twist(&f, &h, 1e-9).unwrap().unwrap();
        let hf = f.then(&h).expand().unwrap();
        let fh = h.then(&f).expand().unwrap();
        assert!(PolyMap2::twist(t.eta).compose(&hf).unwrap().residual(&fh) <= 1e-9);
    }

    #[test]
    fn commute_examples() {
        let h = basic();
        assert!(check_commute(&h, &h, 1e-9).unwrap().commute);
        let c = check_commute(&example_f(), &h, 1e-9).unwrap();
        assert!(!c.commute && c.residual >= 0.1);
        let s = verify_squares_commute(&example_f(), &h, 1e-9).unwrap();
        assert!(s.commute && s.residual <= 1e-9);
        let swapped = verify_squares_commute(&h, &example_f(), 1e-9).unwrap();
        assert_eq!(s.commute, swapped.commute);
        assert!((s.residual - swapped.residual).abs() <= 1e-12);
        assert!(
            verify_squares_commute(&h.power(2).unwrap(), &h, 1e-9)
                .unwrap()
                .commute
        );
    }

    #[test]
    fn random_pair_squares_do_not_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = HenonChain::single(crate::random::random_factor(&mut rng));
        let g = HenonChain::single(crate::random::random_factor(&mut rng));
        // Oracle: evaluate both compositions at a point.
        let z = Point2::real(0.3, -0.2);
        let lhs = f.forward(f.forward(g.forward(g.forward(z))));
        let rhs = g.forward(g.forward(f.forward(f.forward(z))));
        assert!(lhs.dist(&rhs) > 1e-6);
        assert!(!verify_squares_commute(&f, &g, 1e-9).unwrap().commute);
    }

    #[test]
    fn squares_cap_reports_degree() {
        let h = HenonChain::simple_real(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        match verify_squares_commute_with_cap(&h, &h, 1e-9, 64) {
            Err(Error::ExpansionTooLarge { degree, cap }) => assert_eq!((degree, cap), (81, 64)),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn contains(set: &FixedPointSet, p: Point2, tol: f64) -> bool {
        set.points.iter().any(|q| q.dist(&p) <= tol)
    }

    #[test]
    fn fixed_points_of_basic_map() {
        let set = fixed_points(&basic(), 1).unwrap();
        assert_eq!(set.points.len(), 2, "{:?}", set.points);
        assert!(contains(&set, Point2::origin(), 1e-8));
        assert!(contains(&set, Point2::real(2.0, 2.0), 1e-8));
        assert!(set.residuals.iter().all(|r| *r <= 1e-8));
    }

    #[test]
    fn fixed_points_move_under_conjugation() {
        let shifted = basic().conjugate_by_translation(Point2::real(2.0, 2.0));
        let set = fixed_points(&shifted, 1).unwrap();
        assert_eq!(set.points.len(), 2);
        assert!(contains(
            &set,
            Point2::real(-2.0, -2.0),
            FIXED_POINT_MERGE_RADIUS
        ));
        assert!(contains(&set, Point2::origin(), FIXED_POINT_MERGE_RADIUS));
    }

    #[test]
    fn period_two_points() {
        let one = fixed_points(&basic(), 1).unwrap();
        let two = fixed_points(&basic(), 2).unwrap();
        for p in &one.points {
            assert!(contains(&two, *p, FIXED_POINT_MERGE_RADIUS));
        }
        let w = omega();
        assert!(contains(&two, Point2::new(w * w * 2.0, w * 2.0), 1e-8));
        assert!(contains(&two, Point2::new(w * 2.0, w * w * 2.0), 1e-8));
        for p in &two.points {
            let back = basic().forward(basic().forward(*p));
            assert!(back.dist(p) <= 1e-8 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn report_examples() {
        let h = basic();
        let same = rigidity_report(&h, &h, 1e-9);
        let t = same.twist.done().unwrap().as_ref().unwrap();
        assert!((t.eta - 1.0).norm() <= 1e-12);
        assert!(same.commute_fh.done().unwrap().commute);
        assert!(same.commute_squares.done().unwrap().commute);

        let r = rigidity_report(&example_f(), &h, 1e-9);
        let t = r.twist.done().unwrap().as_ref().unwrap();
        assert!((t.eta - omega() * omega()).norm() <= 1e-9);
        assert!(!r.commute_fh.done().unwrap().commute);
        assert!(r.commute_squares.done().unwrap().commute);
        let text = r.to_text();
        assert!(text.contains("commute_FH: false"));
        assert!(text.contains("commute_squares: true"));
        assert_eq!(r.to_json()["commute_squares"]["commute"], true);

        let cubic = HenonChain::simple_real(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let capped = rigidity_report(&cubic, &cubic, 1e-9);
        assert!(matches!(&capped.commute_squares, Section::NotComputed(s) if s.contains("cap")));
        assert!(capped.commute_fh.done().unwrap().commute);
    }
}

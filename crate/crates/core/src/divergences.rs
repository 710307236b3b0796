//! Output premetrics on exact finite distributions, and the budget arithmetic
//! built on top of them: the closed-form swapping bound, the zCDP to
//! (ε, δ) conversion, and sequential composition.
//!
//! The multiplicative family is evaluated in exact rational arithmetic; the
//! log is only taken when a value is rendered. The Rényi family inherently
//! needs real exponents and is evaluated in floating point.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{format_rational, ln_rational, rat, rat_one, rat_to_f64, rat_zero, PlbValue, Rational};

/// Largest union support for which the δ-divergence scans all `2^k` events;
/// beyond this the likelihood-ratio prefix family is used instead.
pub const EVENT_SCAN_MAX_SUPPORT: usize = 20;

/// An exact finite probability mass function over canonical output labels.
///
/// Construction enforces the invariants: labels unique and sorted, masses
/// positive rationals summing to exactly 1. Zero-mass atoms are dropped, so
/// two distributions are equal iff their atom lists are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputDistribution {
    atoms: Vec<(String, Rational)>,
}

impl OutputDistribution {
    pub fn from_map(map: BTreeMap<String, Rational>) -> Result<Self> {
        let mut atoms = Vec::with_capacity(map.len());
        let mut total = rat_zero();
        for (label, mass) in map {
            if mass.is_negative() {
                return Err(Error::InvalidParameter(format!(
                    "negative probability mass for {label:?}"
                )));
            }
            if mass.is_zero() {
                continue;
            }
            total += &mass;
            atoms.push((label, mass));
        }
        if !total.is_one() {
            return Err(Error::MassNotOne(format_rational(&total)));
        }
        Ok(OutputDistribution { atoms })
    }

    pub fn from_pairs(pairs: Vec<(String, Rational)>) -> Result<Self> {
        let mut map: BTreeMap<String, Rational> = BTreeMap::new();
        for (label, mass) in pairs {
            *map.entry(label).or_insert_with(rat_zero) += mass;
        }
        Self::from_map(map)
    }

    pub fn point_mass(label: String) -> Self {
        OutputDistribution {
            atoms: vec![(label, rat_one())],
        }
    }

    pub fn atoms(&self) -> &[(String, Rational)] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn mass(&self, label: &str) -> Rational {
        match self.atoms.binary_search_by(|(l, _)| l.as_str().cmp(label)) {
            Ok(i) => self.atoms[i].1.clone(),
            Err(_) => rat_zero(),
        }
    }

    /// Canonical serialization used for byte-identity comparisons.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (label, mass) in &self.atoms {
            out.extend_from_slice(label.as_bytes());
            out.push(b'=');
            out.extend_from_slice(format_rational(mass).as_bytes());
            out.push(b'\n');
        }
        out
    }
}

/// Merges two distributions onto their unioned support, returning per-atom
/// mass pairs. Labels are not needed by the divergences.
fn union_masses(p: &OutputDistribution, q: &OutputDistribution) -> Vec<(Rational, Rational)> {
    let mut out = Vec::with_capacity(p.atoms.len() + q.atoms.len());
    let (mut i, mut j) = (0, 0);
    while i < p.atoms.len() || j < q.atoms.len() {
        match (p.atoms.get(i), q.atoms.get(j)) {
            (Some((lp, mp)), Some((lq, mq))) => match lp.cmp(lq) {
                std::cmp::Ordering::Equal => {
                    out.push((mp.clone(), mq.clone()));
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push((mp.clone(), rat_zero()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((rat_zero(), mq.clone()));
                    j += 1;
                }
            },
            (Some((_, mp)), None) => {
                out.push((mp.clone(), rat_zero()));
                i += 1;
            }
            (None, Some((_, mq))) => {
                out.push((rat_zero(), mq.clone()));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Maximum absolute log-likelihood ratio, the pure-DP output premetric.
///
/// The event supremum of a probability ratio is attained on atoms, so this
/// scans atoms only: the result is `ln` of the largest single-atom ratio in
/// either direction. Atoms with mass zero on both sides are skipped; positive
/// mass against zero mass yields infinity.
pub fn mult_divergence(p: &OutputDistribution, q: &OutputDistribution) -> PlbValue {
    let mut max_ratio = rat_one();
    for (mp, mq) in union_masses(p, q) {
        match (mp.is_zero(), mq.is_zero()) {
            (true, true) => {}
            (false, true) | (true, false) => return PlbValue::Infinite,
            (false, false) => {
                let ratio = if mp >= mq { mp / mq } else { mq / mp };
                if ratio > max_ratio {
                    max_ratio = ratio;
                }
            }
        }
    }
    PlbValue::from_ln_arg(max_ratio)
}

/// Brute-force event supremum of the absolute log probability ratio. Exact
/// reference route for [`mult_divergence`]; exponential in the support size.
pub fn mult_event_supremum(p: &OutputDistribution, q: &OutputDistribution) -> Result<PlbValue> {
    let masses = union_masses(p, q);
    let k = masses.len();
    if k > EVENT_SCAN_MAX_SUPPORT {
        return Err(Error::CapExceeded {
            what: "event scan support".into(),
            estimate: k as u128,
            cap: EVENT_SCAN_MAX_SUPPORT as u128,
        });
    }
    let mut max_ratio = rat_one();
    let mut infinite = false;
    scan_events(&masses, |ps, qs| {
        match (ps.is_zero(), qs.is_zero()) {
            (true, true) => {}
            (false, true) | (true, false) => infinite = true,
            (false, false) => {
                let ratio = if ps >= qs {
                    ps.clone() / qs
                } else {
                    qs.clone() / ps
                };
                if ratio > max_ratio {
                    max_ratio = ratio;
                }
            }
        }
    });
    Ok(if infinite {
        PlbValue::Infinite
    } else {
        PlbValue::from_ln_arg(max_ratio)
    })
}

/// Visits every nonempty event over `masses`, passing the event's mass under
/// each distribution. Gray-code order so each step adjusts one atom.
fn scan_events(masses: &[(Rational, Rational)], mut visit: impl FnMut(&Rational, &Rational)) {
    let k = masses.len();
    assert!(k < 64, "event scan support too large");
    let mut ps = rat_zero();
    let mut qs = rat_zero();
    let mut in_event = vec![false; k];
    for step in 1u64..(1u64 << k) {
        let bit = step.trailing_zeros() as usize;
        if in_event[bit] {
            ps -= &masses[bit].0;
            qs -= &masses[bit].1;
            in_event[bit] = false;
        } else {
            ps += &masses[bit].0;
            qs += &masses[bit].1;
            in_event[bit] = true;
        }
        visit(&ps, &qs);
    }
}

fn check_delta(delta: &Rational) -> Result<()> {
    if delta < &rat_zero() || delta > &rat_one() {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1], got {}",
            format_rational(delta)
        )));
    }
    Ok(())
}

/// δ-relaxed multiplicative divergence:
/// `sup_S max{ ln([P(S)-δ]+/Q(S)), ln([Q(S)-δ]+/P(S)), 0 }`.
///
/// A clamped-to-zero numerator contributes nothing (including against a zero
/// denominator); a positive numerator against a zero denominator is infinite.
/// Scans all events up to [`EVENT_SCAN_MAX_SUPPORT`] atoms, then switches to
/// the likelihood-ratio prefix family, which attains the supremum.
pub fn delta_mult_divergence(
    p: &OutputDistribution,
    q: &OutputDistribution,
    delta: &Rational,
) -> Result<PlbValue> {
    check_delta(delta)?;
    let k = union_masses(p, q).len();
    if k <= EVENT_SCAN_MAX_SUPPORT {
        delta_mult_event_supremum(p, q, delta)
    } else {
        delta_mult_upset_supremum(p, q, delta)
    }
}

/// Brute-force route over all `2^k` events.
pub fn delta_mult_event_supremum(
    p: &OutputDistribution,
    q: &OutputDistribution,
    delta: &Rational,
) -> Result<PlbValue> {
    check_delta(delta)?;
    let masses = union_masses(p, q);
    let k = masses.len();
    if k > EVENT_SCAN_MAX_SUPPORT {
        return Err(Error::CapExceeded {
            what: "event scan support".into(),
            estimate: k as u128,
            cap: EVENT_SCAN_MAX_SUPPORT as u128,
        });
    }
    let mut max_ratio = rat_one();
    let mut infinite = false;
    scan_events(&masses, |ps, qs| {
        for (num, den) in [(ps, qs), (qs, ps)] {
            if num <= delta {
                continue; // clamped numerator, contributes 0
            }
            if den.is_zero() {
                infinite = true;
                continue;
            }
            let ratio = (num.clone() - delta) / den;
            if ratio > max_ratio {
                max_ratio = ratio;
            }
        }
    });
    Ok(if infinite {
        PlbValue::Infinite
    } else {
        PlbValue::from_ln_arg(max_ratio)
    })
}

/// Prefix-family route: the maximizing event is an up-set of the likelihood
/// ratio, so only prefixes of the ratio-sorted atom list need scanning.
pub fn delta_mult_upset_supremum(
    p: &OutputDistribution,
    q: &OutputDistribution,
    delta: &Rational,
) -> Result<PlbValue> {
    check_delta(delta)?;
    let masses = union_masses(p, q);
    let mut max_ratio = rat_one();
    for flip in [false, true] {
        let mut sorted: Vec<(Rational, Rational)> = masses
            .iter()
            .map(|(a, b)| {
                if flip {
                    (b.clone(), a.clone())
                } else {
                    (a.clone(), b.clone())
                }
            })
            .collect();
        // Descending likelihood ratio num/den via cross-multiplication;
        // den == 0 with num > 0 sorts first, num == 0 sorts last.
        sorted.sort_by(|(p1, q1), (p2, q2)| (p2.clone() * q1).cmp(&(p1.clone() * q2)));
        let mut num_sum = rat_zero();
        let mut den_sum = rat_zero();
        for (num, den) in &sorted {
            num_sum += num;
            den_sum += den;
            if &num_sum <= delta {
                continue;
            }
            if den_sum.is_zero() {
                return Ok(PlbValue::Infinite);
            }
            let ratio = (num_sum.clone() - delta) / &den_sum;
            if ratio > max_ratio {
                max_ratio = ratio;
            }
        }
    }
    Ok(PlbValue::from_ln_arg(max_ratio))
}

fn check_alpha(alpha: &Rational) -> Result<f64> {
    if alpha <= &rat_one() {
        return Err(Error::InvalidParameter(format!(
            "Renyi order must exceed 1, got {}",
            format_rational(alpha)
        )));
    }
    Ok(rat_to_f64(alpha))
}

/// Rényi divergence of order `alpha > 1`:
/// `(1/(alpha-1)) ln Σ_t P(t)^alpha Q(t)^(1-alpha)`; infinite when P puts
/// mass where Q does not. Directional; callers symmetrize where needed.
pub fn renyi_divergence(
    p: &OutputDistribution,
    q: &OutputDistribution,
    alpha: &Rational,
) -> Result<f64> {
    let a = check_alpha(alpha)?;
    let mut sum = 0.0f64;
    for (mp, mq) in union_masses(p, q) {
        if mp.is_zero() {
            continue;
        }
        if mq.is_zero() {
            return Ok(f64::INFINITY);
        }
        let ln_p = ln_rational(&mp);
        let ln_q = ln_rational(&mq);
        // P(t)^alpha Q(t)^(1-alpha) = P(t) * exp((alpha-1)(ln P - ln Q)),
        // stable as alpha approaches 1.
        sum += (ln_p + (a - 1.0) * (ln_p - ln_q)).exp();
    }
    Ok(sum.ln() / (a - 1.0))
}

/// Default grid resolution for [`zcdp_parameter`].
pub const ZCDP_GRID_POINTS: usize = 128;

/// Supremum of the order-normalized Rényi divergence over a geometric order
/// grid, symmetrized over argument order.
///
/// The grid runs `alpha - 1` geometrically from `2^-20` to `alpha_max - 1`
/// inclusive. A grid supremum is a lower bound on the true supremum over all
/// orders; the resolution is part of this function's contract.
pub fn zcdp_parameter(
    p: &OutputDistribution,
    q: &OutputDistribution,
    alpha_max: &Rational,
) -> Result<f64> {
    zcdp_parameter_with_grid(p, q, alpha_max, ZCDP_GRID_POINTS)
}

pub fn zcdp_parameter_with_grid(
    p: &OutputDistribution,
    q: &OutputDistribution,
    alpha_max: &Rational,
    points: usize,
) -> Result<f64> {
    let a_max = check_alpha(alpha_max)?;
    if points < 2 {
        return Err(Error::InvalidParameter(
            "zCDP grid needs at least 2 points".into(),
        ));
    }
    let mut sup: f64 = 0.0;
    for alpha in zcdp_grid(a_max, points) {
        let alpha_rat = Rational::from_float(alpha)
            .ok_or_else(|| Error::InvalidParameter("non-finite grid order".into()))?;
        let fwd = renyi_divergence(p, q, &alpha_rat)?;
        let bwd = renyi_divergence(q, p, &alpha_rat)?;
        sup = sup.max(fwd.max(bwd) / alpha);
        if sup.is_infinite() {
            break;
        }
    }
    Ok(sup)
}

/// The geometric order grid, endpoints included.
pub fn zcdp_grid(alpha_max: f64, points: usize) -> Vec<f64> {
    let lo = (2.0f64).powi(-20);
    let hi = alpha_max - 1.0;
    if hi <= lo {
        return vec![alpha_max];
    }
    let step = (hi / lo).powf(1.0 / (points as f64 - 1.0));
    (0..points)
        .map(|i| 1.0 + lo * step.powi(i as i32))
        .collect()
}

/// Closed-form budget bound for permutation swapping at swap rate `p` with
/// largest matching-group size `b`:
/// `ln(b+1) - ln o` for `p <= 1/2` and `max{ln o, ln(b+1) - ln o}` above,
/// where `o = p/(1-p)`. Exact: the log argument is kept rational.
pub fn psa_plb_bound(p: &Rational, b: u64) -> Result<PlbValue> {
    if p <= &rat_zero() || p >= &rat_one() {
        return Err(Error::InvalidParameter(format!(
            "swap rate must lie strictly between 0 and 1, got {}",
            format_rational(p)
        )));
    }
    if b == 0 {
        return Err(Error::InvalidParameter(
            "largest matching group must be at least 1".into(),
        ));
    }
    let odds = p.clone() / (rat_one() - p);
    let b_plus_1 = Rational::from_integer((b + 1).into());
    let main = b_plus_1 / &odds;
    let arg = if p <= &rat(1, 2) {
        main
    } else {
        std::cmp::max(odds, main)
    };
    Ok(PlbValue::from_ln_arg(arg))
}

/// zCDP budget to (ε, δ) budget: `ε = ρ + 2 sqrt(ρ ln(1/δ))`.
pub fn zcdp_to_adp(rho: f64, delta: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rho must be positive and finite, got {rho}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    Ok(rho + 2.0 * (rho * (1.0 / delta).ln()).sqrt())
}

/// Sequential composition of pure budgets; infinity is absorbing.
pub fn compose_pure(eps1: f64, eps2: f64) -> f64 {
    assert!(eps1 >= 0.0 && eps2 >= 0.0, "budgets must be non-negative");
    eps1 + eps2
}

/// Sequential composition of zCDP budgets; infinity is absorbing.
pub fn compose_zcdp(rho1: f64, rho2: f64) -> f64 {
    assert!(rho1 >= 0.0 && rho2 >= 0.0, "budgets must be non-negative");
    rho1 + rho2
}

/// The output premetric of a specification.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputPremetricKind {
    Multiplicative,
    DeltaMultiplicative { delta: Rational },
    RenyiOfOrder { alpha: Rational },
    ZcdpSupremum { alpha_max: Rational },
}

impl OutputPremetricKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            OutputPremetricKind::Multiplicative => Ok(()),
            OutputPremetricKind::DeltaMultiplicative { delta } => check_delta(delta),
            OutputPremetricKind::RenyiOfOrder { alpha } => check_alpha(alpha).map(|_| ()),
            OutputPremetricKind::ZcdpSupremum { alpha_max } => check_alpha(alpha_max).map(|_| ()),
        }
    }

    /// Distance between two output distributions, symmetrized where the
    /// underlying divergence is directional.
    pub fn eval(&self, p: &OutputDistribution, q: &OutputDistribution) -> Result<PlbValue> {
        match self {
            OutputPremetricKind::Multiplicative => Ok(mult_divergence(p, q)),
            OutputPremetricKind::DeltaMultiplicative { delta } => delta_mult_divergence(p, q, delta),
            OutputPremetricKind::RenyiOfOrder { alpha } => {
                let fwd = renyi_divergence(p, q, alpha)?;
                let bwd = renyi_divergence(q, p, alpha)?;
                Ok(PlbValue::approx(fwd.max(bwd)))
            }
            OutputPremetricKind::ZcdpSupremum { alpha_max } => {
                Ok(PlbValue::approx(zcdp_parameter(p, q, alpha_max)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn two_atom(p1: Rational) -> OutputDistribution {
        OutputDistribution::from_pairs(vec![
            ("a".into(), p1.clone()),
            ("b".into(), rat_one() - p1),
        ])
        .unwrap()
    }

    #[test]
    fn construction_enforces_unit_mass() {
        let bad = OutputDistribution::from_pairs(vec![("a".into(), rat(1, 2))]);
        assert!(matches!(bad, Err(Error::MassNotOne(_))));
        let neg = OutputDistribution::from_pairs(vec![
            ("a".into(), rat(3, 2)),
            ("b".into(), rat(-1, 2)),
        ]);
        assert!(neg.is_err());
    }

    #[test]
    fn mult_divergence_cases() {
        let p = two_atom(rat(3, 4));
        let q = two_atom(rat(1, 4));
        assert!(mult_divergence(&p, &p).is_zero());
        // max |ln P/Q| = ln 3, attained on an atom
        let d = mult_divergence(&p, &q);
        assert_eq!(d.exact_parts().unwrap().0, &rat(3, 1));
        // brute force over all 4 events agrees exactly
        let brute = mult_event_supremum(&p, &q).unwrap();
        assert_eq!(d, brute);

        let a = OutputDistribution::point_mass("a".into());
        let b = OutputDistribution::point_mass("b".into());
        assert!(mult_divergence(&a, &b).is_infinite());
    }

    #[test]
    fn delta_divergence_frozen_values() {
        let p = two_atom(rat(3, 4));
        let q = two_atom(rat(1, 4));
        // delta = 0 reduces to the pure divergence
        let d0 = delta_mult_divergence(&p, &q, &rat_zero()).unwrap();
        assert_eq!(d0, mult_divergence(&p, &q));
        // delta = 1 clamps every numerator
        let d1 = delta_mult_divergence(&p, &q, &rat_one()).unwrap();
        assert!(d1.is_zero());
        // delta = 1/4: the best event is a single atom, ratio (3/4-1/4)/(1/4) = 2
        let d = delta_mult_divergence(&p, &q, &rat(1, 4)).unwrap();
        assert_eq!(d.exact_parts().unwrap().0, &rat(2, 1));
    }

    #[test]
    fn delta_routes_agree_on_point_masses() {
        let a = OutputDistribution::point_mass("a".into());
        let b = OutputDistribution::point_mass("b".into());
        let brute = delta_mult_event_supremum(&a, &b, &rat(1, 2)).unwrap();
        let upset = delta_mult_upset_supremum(&a, &b, &rat(1, 2)).unwrap();
        assert!(brute.is_infinite());
        assert!(upset.is_infinite());
        // delta = 1 kills the infinity: numerators clamp to zero
        let one = delta_mult_event_supremum(&a, &b, &rat_one()).unwrap();
        assert!(one.is_zero());
    }

    #[test]
    fn delta_out_of_range_rejected() {
        let p = two_atom(rat(1, 2));
        assert!(delta_mult_divergence(&p, &p, &rat(3, 2)).is_err());
        assert!(delta_mult_divergence(&p, &p, &rat(-1, 2)).is_err());
    }

    #[test]
    fn renyi_order_two_frozen() {
        let p = two_atom(rat(3, 4));
        let q = two_atom(rat(1, 4));
        // sum P^2/Q = (9/16)/(1/4) + (1/16)/(3/4) = 9/4 + 1/12 = 7/3
        let d = renyi_divergence(&p, &q, &rat(2, 1)).unwrap();
        assert!((d - (7.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!(renyi_divergence(&p, &p, &rat(2, 1)).unwrap().abs() < 1e-15);
        assert!(renyi_divergence(&p, &q, &rat(1, 1)).is_err());
    }

    #[test]
    fn renyi_approaches_kl_near_order_one() {
        let p = two_atom(rat(3, 4));
        let q = two_atom(rat(1, 4));
        // independent KL computation: sum P ln(P/Q)
        let kl = 0.75 * (3.0f64).ln() + 0.25 * (1.0f64 / 3.0).ln();
        let alpha = rat_one() + rat(1, 1_000_000);
        let d = renyi_divergence(&p, &q, &alpha).unwrap();
        assert!((d - kl).abs() < 1e-4, "renyi {d} vs kl {kl}");
    }

    #[test]
    fn renyi_infinite_without_absolute_continuity() {
        let p = two_atom(rat(3, 4));
        let a = OutputDistribution::point_mass("a".into());
        assert!(renyi_divergence(&p, &a, &rat(2, 1))
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn zcdp_identity_and_grid_refinement() {
        let p = two_atom(rat(3, 4));
        let q = two_atom(rat(1, 4));
        assert_eq!(zcdp_parameter(&p, &p, &rat(32, 1)).unwrap(), 0.0);
        let coarse = zcdp_parameter_with_grid(&p, &q, &rat(32, 1), 64).unwrap();
        let fine = zcdp_parameter_with_grid(&p, &q, &rat(32, 1), 256).unwrap();
        assert!((coarse - fine).abs() < 1e-6, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn renyi_is_monotone_in_order_on_grid() {
        let p = two_atom(rat(3, 4));
        let q = two_atom(rat(1, 4));
        let mut last = 0.0;
        for alpha in zcdp_grid(16.0, 64) {
            let a = Rational::from_float(alpha).unwrap();
            let d = renyi_divergence(&p, &q, &a).unwrap();
            assert!(d >= last - 1e-12, "order {alpha}: {d} < {last}");
            last = d;
        }
    }

    #[test]
    fn swap_bound_closed_form() {
        // p = 1/2, b = 1: odds are 1, bound is ln 2
        let b1 = psa_plb_bound(&rat(1, 2), 1).unwrap();
        assert_eq!(b1.exact_parts().unwrap().0, &rat(2, 1));
        // published anchors
        let low = psa_plb_bound(&rat(1, 20), 11_700).unwrap().to_f64();
        assert!((low - 12.31).abs() < 0.01, "got {low}");
        let high = psa_plb_bound(&rat(1, 20), 13_700_000).unwrap().to_f64();
        assert!((high - 19.38).abs() < 0.01, "got {high}");
        // above p = 1/2 the odds term can dominate
        let odds_side = psa_plb_bound(&rat(9, 10), 1).unwrap();
        assert_eq!(odds_side.exact_parts().unwrap().0, &rat(9, 1));
        assert!(psa_plb_bound(&rat(3, 2), 10).is_err());
        assert!(psa_plb_bound(&rat(1, 2), 0).is_err());
    }

    #[test]
    fn swap_bound_monotone_in_rate_and_group_size() {
        let mut last = f64::INFINITY;
        for num in 1..=10 {
            let p = rat(num, 20); // p in (0, 0.5]
            let v = psa_plb_bound(&p, 100).unwrap().to_f64();
            assert!(v <= last + 1e-12);
            last = v;
        }
        let mut prev = 0.0;
        for b in [1u64, 2, 5, 10, 100, 10_000] {
            let v = psa_plb_bound(&rat(1, 4), b).unwrap().to_f64();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn zcdp_conversion_cases() {
        let eps = zcdp_to_adp(55.371, 1e-10).unwrap();
        assert!((eps - 126.78).abs() < 0.01, "got {eps}");
        assert_eq!(zcdp_to_adp(0.7, 1.0).unwrap(), 0.7);
        // second arithmetic path: delta = 10^-6 means ln(1/delta) = 6 ln 10
        let direct = zcdp_to_adp(0.5, 1e-6).unwrap();
        let other = 0.5 + 2.0 * (0.5 * 6.0 * (10.0f64).ln()).sqrt();
        assert!((direct - other).abs() < 1e-9);
        assert!(zcdp_to_adp(-1.0, 0.5).is_err());
        assert!(zcdp_to_adp(1.0, 0.0).is_err());
    }

    #[test]
    fn composition_is_additive_with_absorbing_infinity() {
        assert_eq!(compose_pure(0.0, 1.5), 1.5);
        assert_eq!(compose_pure(f64::INFINITY, 1.0), f64::INFINITY);
        assert_eq!(compose_zcdp(0.25, 0.5), 0.75);
    }
}

//! Achievable-rate pentagons with and without the secrecy constraint, the
//! key-recycling ramp constants, and the per-slot rate schedule.

use serde::Serialize;

use crate::channel::{ChannelSpec, InputPair};
use crate::error::{Error, Result};

/// Differences this close to an integer are treated as exact before
/// rounding up or down.
pub const SNAP_TOL: f64 = 1e-9;

/// Below this an (unclamped) secrecy-rate denominator counts as zero.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Smallest integer ≥ x, except that values within [`SNAP_TOL`] of an
/// integer snap to it first.
pub fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL {
        r
    } else {
        x.ceil()
    }
}

/// Largest integer ≤ x with the same snapping rule.
pub fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL {
        r
    } else {
        x.floor()
    }
}

/// The five mutual informations everything downstream is built from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MutualRates {
    /// I(X1; Y | X2)
    pub i1_given2: f64,
    /// I(X2; Y | X1)
    pub i2_given1: f64,
    /// I(X1, X2; Y)
    pub i_sum: f64,
    /// I(X1; Z)
    pub leak1: f64,
    /// I(X2; Z)
    pub leak2: f64,
}

pub fn mutual_rates(spec: &ChannelSpec, inputs: &InputPair) -> Result<MutualRates> {
    let law = spec.joint_law(inputs)?;
    Ok(MutualRates {
        i1_given2: law.conditional_mutual_information(&["x1"], &["y"], &["x2"])?,
        i2_given1: law.conditional_mutual_information(&["x2"], &["y"], &["x1"])?,
        i_sum: law.mutual_information(&["x1", "x2"], &["y"])?,
        leak1: law.mutual_information(&["x1"], &["z"])?,
        leak2: law.mutual_information(&["x2"], &["z"])?,
    })
}

/// {(r1, r2) : 0 ≤ r1 ≤ cap1, 0 ≤ r2 ≤ cap2, r1 + r2 ≤ cap_sum}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePentagon {
    pub cap1: f64,
    pub cap2: f64,
    pub cap_sum: f64,
}

impl RatePentagon {
    pub fn new(cap1: f64, cap2: f64, cap_sum: f64) -> Result<Self> {
        for (label, cap) in [("cap1", cap1), ("cap2", cap2), ("cap_sum", cap_sum)] {
            if !cap.is_finite() || cap < 0.0 {
                return Err(Error::InvalidConfig(format!("{label} = {cap} is not a valid cap")));
            }
        }
        let mut cap_sum = cap_sum;
        if cap_sum > cap1 + cap2 {
            if cap_sum <= cap1 + cap2 + SNAP_TOL {
                cap_sum = cap1 + cap2;
            } else {
                return Err(Error::InvalidConfig(format!(
                    "cap_sum {cap_sum} exceeds cap1 + cap2 = {}",
                    cap1 + cap2
                )));
            }
        }
        Ok(Self { cap1, cap2, cap_sum })
    }

    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        self.contains_approx(r1, r2, 0.0)
    }

    pub fn contains_approx(&self, r1: f64, r2: f64, tol: f64) -> bool {
        r1 >= -tol
            && r2 >= -tol
            && r1 <= self.cap1 + tol
            && r2 <= self.cap2 + tol
            && r1 + r2 <= self.cap_sum + tol
    }

    /// Per-user caps actually reachable once the sum cap is in force.
    pub fn effective_caps(&self) -> (f64, f64) {
        (self.cap1.min(self.cap_sum), self.cap2.min(self.cap_sum))
    }

    /// Corner points counterclockwise from the origin, deduplicated.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let (e1, e2) = self.effective_caps();
        let candidates = [
            (0.0, 0.0),
            (e1, 0.0),
            (e1, self.cap2.min(self.cap_sum - e1)),
            (self.cap1.min(self.cap_sum - e2), e2),
            (0.0, e2),
        ];
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(5);
        for v in candidates {
            if out.last() != Some(&v) && out.first() != Some(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Componentwise cap domination, up to tol.
    pub fn dominated_by(&self, other: &RatePentagon, tol: f64) -> bool {
        self.cap1 <= other.cap1 + tol
            && self.cap2 <= other.cap2 + tol
            && self.cap_sum <= other.cap_sum + tol
    }
}

/// Secrecy pentagon: each cap is the Bob rate minus Eve's information,
/// clamped at zero.
pub fn secrecy_pentagon(spec: &ChannelSpec, inputs: &InputPair) -> Result<RatePentagon> {
    let r = mutual_rates(spec, inputs)?;
    let cap1 = (r.i1_given2 - r.leak1).max(0.0);
    let cap2 = (r.i2_given1 - r.leak2).max(0.0);
    let cap_sum = (r.i_sum - r.leak1 - r.leak2).min(cap1 + cap2).max(0.0);
    RatePentagon::new(cap1, cap2, cap_sum)
}

/// Ordinary MAC pentagon (no eavesdropper).
pub fn mac_pentagon(spec: &ChannelSpec, inputs: &InputPair) -> Result<RatePentagon> {
    let r = mutual_rates(spec, inputs)?;
    RatePentagon::new(
        r.i1_given2,
        r.i2_given1,
        r.i_sum.min(r.i1_given2 + r.i2_given1),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RampConstants {
    pub lambda1: u32,
    pub lambda2: u32,
    /// max(lambda1, lambda2) + 1: first slot at which both users can run
    /// their keyed parts at full MAC rate.
    pub lambda: u32,
}

/// λᵢ = smallest integer ≥ I(Xᵢ;Y|X_ī) / (I(Xᵢ;Y|X_ī) − I(Xᵢ;Z)).
///
/// The denominator is taken before clamping; a nonpositive value means the
/// user cannot bootstrap any secret key.
pub fn ramp_constants(spec: &ChannelSpec, inputs: &InputPair) -> Result<RampConstants> {
    let r = mutual_rates(spec, inputs)?;
    let lambda_for = |label: &str, num: f64, leak: f64| -> Result<u32> {
        let den = num - leak;
        if den <= POSITIVITY_TOL {
            return Err(Error::NoPositiveSecrecyRate(format!(
                "{label}: I(X;Y|other) - I(X;Z) = {den}"
            )));
        }
        Ok(ceil_snapped(num / den) as u32)
    };
    let lambda1 = lambda_for("user 1", r.i1_given2, r.leak1)?;
    let lambda2 = lambda_for("user 2", r.i2_given1, r.leak2)?;
    Ok(RampConstants {
        lambda1,
        lambda2,
        lambda: lambda1.max(lambda2) + 1,
    })
}

/// One row of the ramp schedule.  Rates are bits per channel use of the
/// part they describe: `keyed*` per keyed-part use, `overall*` per use of
/// the whole slot at the schedule's l.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlotRates {
    pub slot: u32,
    pub keyed1: f64,
    pub keyed2: f64,
    /// Sum-rate cap in force at this slot: min(k·s_sum, m_sum).  The pair
    /// (keyed1, keyed2) satisfies keyed1 + keyed2 ≤ this.
    pub keyed_sum: f64,
    pub overall1: f64,
    pub overall2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RampSchedule {
    pub lambda1: u32,
    pub lambda2: u32,
    /// First slot at which the keyed-part pair equals its saturated value.
    pub lambda_star: u32,
    pub l: u64,
    pub secrecy: RatePentagon,
    pub mac: RatePentagon,
    pub per_slot: Vec<SlotRates>,
}

/// min(k·s, m), with secrecy rates at or below [`POSITIVITY_TOL`] treated
/// as exactly zero so degenerate components never creep upward.
fn ramp_component(k: f64, s: f64, m: f64) -> f64 {
    if s <= POSITIVITY_TOL {
        0.0
    } else {
        (k * s).min(m)
    }
}

/// Keyed-part pair at slot k: min(k·sᵢ, mᵢ) per user, then both scaled by
/// a common factor if the slot's sum cap min(k·s_sum, m_sum) binds.
fn keyed_pair(k: f64, s: &RatePentagon, m: &RatePentagon) -> (f64, f64, f64) {
    let mut r1 = ramp_component(k, s.cap1, m.cap1);
    let mut r2 = ramp_component(k, s.cap2, m.cap2);
    let cap = ramp_component(k, s.cap_sum, m.cap_sum);
    let total = r1 + r2;
    if total > cap + POSITIVITY_TOL {
        let scale = if total > 0.0 { cap / total } else { 0.0 };
        r1 *= scale;
        r2 *= scale;
    }
    (r1, r2, cap)
}

/// The k → ∞ limit of [`keyed_pair`].
fn saturated_pair(s: &RatePentagon, m: &RatePentagon) -> (f64, f64, f64) {
    let mut r1 = if s.cap1 > POSITIVITY_TOL { m.cap1 } else { 0.0 };
    let mut r2 = if s.cap2 > POSITIVITY_TOL { m.cap2 } else { 0.0 };
    let cap = if s.cap_sum > POSITIVITY_TOL { m.cap_sum } else { 0.0 };
    let total = r1 + r2;
    if total > cap + POSITIVITY_TOL {
        let scale = if total > 0.0 { cap / total } else { 0.0 };
        r1 *= scale;
        r2 *= scale;
    }
    (r1, r2, cap)
}

/// Builds the per-slot schedule for slots 1..=k_max.  `l` fixes the
/// keyed-to-wiretap block ratio used for the overall-rate column; the k=1
/// row's overall rate reduces to the pure wiretap rate.
pub fn slot_schedule(
    spec: &ChannelSpec,
    inputs: &InputPair,
    k_max: u32,
    l: u64,
) -> Result<RampSchedule> {
    if k_max < 1 {
        return Err(Error::InvalidConfig("k_max must be at least 1".into()));
    }
    if l < 1 {
        return Err(Error::InvalidConfig("l must be at least 1".into()));
    }
    let constants = ramp_constants(spec, inputs)?;
    let secrecy = secrecy_pentagon(spec, inputs)?;
    let mac = mac_pentagon(spec, inputs)?;

    let saturated = saturated_pair(&secrecy, &mac);
    // Every active min() component saturates exactly by this slot.
    let mut bound = k_max;
    for (num, den) in [
        (mac.cap1, secrecy.cap1),
        (mac.cap2, secrecy.cap2),
        (mac.cap_sum, secrecy.cap_sum),
    ] {
        if den > POSITIVITY_TOL {
            bound = bound.max(ceil_snapped(num / den).min(1e5) as u32);
        }
    }

    let lf = l as f64;
    let mut lambda_star = None;
    let mut per_slot = Vec::with_capacity(k_max as usize);
    for k in 1..=bound {
        let (r1, r2, cap) = keyed_pair(k as f64, &secrecy, &mac);
        if lambda_star.is_none()
            && (r1 - saturated.0).abs() <= POSITIVITY_TOL
            && (r2 - saturated.1).abs() <= POSITIVITY_TOL
        {
            lambda_star = Some(k);
        }
        if k <= k_max {
            per_slot.push(SlotRates {
                slot: k,
                keyed1: r1,
                keyed2: r2,
                keyed_sum: cap,
                overall1: (secrecy.cap1 + lf * r1) / (1.0 + lf),
                overall2: (secrecy.cap2 + lf * r2) / (1.0 + lf),
            });
        }
        if lambda_star.is_some() && k >= k_max {
            break;
        }
    }

    Ok(RampSchedule {
        lambda1: constants.lambda1,
        lambda2: constants.lambda2,
        // The scan finds the first saturated slot at any practical scale;
        // past the capped bound the analytic value is the honest answer.
        lambda_star: lambda_star.unwrap_or(bound),
        l,
        secrecy,
        mac,
        per_slot,
    })
}

/// Overall per-user rate of slot k when the keyed part spans l wiretap
/// blocks: (wiretap + l·keyed)/(1 + l).  Slot 1 has no keyed part.
pub fn overall_rate(schedule: &RampSchedule, k: u32, l: u64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::InvalidSlot(k as usize));
    }
    let row = schedule
        .per_slot
        .iter()
        .find(|r| r.slot == k)
        .ok_or(Error::InvalidSlot(k as usize))?;
    if l < 1 {
        return Err(Error::InvalidConfig("l must be at least 1".into()));
    }
    let lf = l as f64;
    Ok((
        (schedule.secrecy.cap1 + lf * row.keyed1) / (1.0 + lf),
        (schedule.secrecy.cap2 + lf * row.keyed2) / (1.0 + lf),
    ))
}

#[derive(Debug, Clone)]
pub struct TimeShare {
    /// Weighted combinations of every choice of one vertex per pentagon.
    pub points: Vec<(f64, f64)>,
    /// The mixture region itself: weighted sums of effective caps.
    pub hull: RatePentagon,
}

/// Time sharing across pentagons with the given convex weights.
pub fn time_share(pentagons: &[RatePentagon], weights: &[f64]) -> Result<TimeShare> {
    if pentagons.is_empty() {
        return Err(Error::EmptyInput("pentagons"));
    }
    if pentagons.len() != weights.len() {
        return Err(Error::WeightMismatch(format!(
            "{} pentagons but {} weights",
            pentagons.len(),
            weights.len()
        )));
    }
    let mut total = 0.0;
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::WeightMismatch(format!("weight {w} is not in [0, 1]")));
        }
        total += w;
    }
    if (total - 1.0).abs() > SNAP_TOL {
        return Err(Error::WeightMismatch(format!("weights sum to {total}")));
    }

    let mut cap1 = 0.0;
    let mut cap2 = 0.0;
    let mut cap_sum = 0.0;
    for (p, &w) in pentagons.iter().zip(weights) {
        let (e1, e2) = p.effective_caps();
        cap1 += w * e1;
        cap2 += w * e2;
        cap_sum += w * p.cap_sum;
    }
    let hull = RatePentagon::new(cap1, cap2, cap_sum)?;

    let mut points = vec![(0.0, 0.0)];
    for (p, &w) in pentagons.iter().zip(weights) {
        let mut next = Vec::new();
        for &(a1, a2) in &points {
            for &(v1, v2) in &p.vertices() {
                next.push((a1 + w * v1, a2 + w * v2));
            }
        }
        points = next;
    }
    Ok(TimeShare { points, hull })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fixtures;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const H1_4: f64 = 0.811_278_124_459_132_8; // binary entropy of 1/4

    #[test]
    fn identity_channel_pentagons_coincide_at_1_1_2() {
        let spec = fixtures::ch_id();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let s = secrecy_pentagon(&spec, &inputs).unwrap();
        let m = mac_pentagon(&spec, &inputs).unwrap();
        for p in [s, m] {
            assert_abs_diff_eq!(p.cap1, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p.cap2, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p.cap_sum, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn copy_channel_secrecy_region_is_the_origin() {
        let spec = fixtures::ch_copy_eve();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let s = secrecy_pentagon(&spec, &inputs).unwrap();
        assert_eq!((s.cap1, s.cap2, s.cap_sum), (0.0, 0.0, 0.0));
        let m = mac_pentagon(&spec, &inputs).unwrap();
        assert_abs_diff_eq!(m.cap_sum, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn xor_eve_costs_nothing_in_the_pentagon() {
        // Eve's parity reveals nothing about either message alone.
        let spec = fixtures::ch_xor_eve();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let s = secrecy_pentagon(&spec, &inputs).unwrap();
        assert_abs_diff_eq!(s.cap1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.cap2, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.cap_sum, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bsc_eve_caps_match_the_closed_form() {
        let spec = fixtures::ch_bsc_eve();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let s = secrecy_pentagon(&spec, &inputs).unwrap();
        assert_abs_diff_eq!(s.cap1, H1_4, epsilon = 1e-12);
        assert_abs_diff_eq!(s.cap2, H1_4, epsilon = 1e-12);
        assert_abs_diff_eq!(s.cap_sum, 2.0 * H1_4, epsilon = 1e-12);
    }

    #[test]
    fn ramp_constants_on_fixtures() {
        let inputs = crate::channel::InputPair::uniform(2, 2).unwrap();
        let id = ramp_constants(&fixtures::ch_id(), &inputs).unwrap();
        assert_eq!((id.lambda1, id.lambda2, id.lambda), (1, 1, 2));

        let bsc = ramp_constants(&fixtures::ch_bsc_eve(), &inputs).unwrap();
        // 1/h(1/4) = 1.2326... rounds up to 2.
        assert_eq!((bsc.lambda1, bsc.lambda2, bsc.lambda), (2, 2, 3));

        let err = ramp_constants(&fixtures::ch_copy_eve(), &inputs).unwrap_err();
        assert!(matches!(err, Error::NoPositiveSecrecyRate(_)));
    }

    #[test]
    fn snapped_rounding_absorbs_float_noise() {
        assert_eq!(ceil_snapped(2.0000000001), 2.0);
        assert_eq!(ceil_snapped(2.1), 3.0);
        assert_eq!(ceil_snapped(1.9999999999), 2.0);
        assert_eq!(floor_snapped(1.9999999999), 2.0);
        assert_eq!(floor_snapped(1.9), 1.0);
    }

    #[test]
    fn schedule_saturates_at_lambda_star() {
        let spec = fixtures::ch_bsc_eve();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let sched = slot_schedule(&spec, &inputs, 6, 1).unwrap();
        assert_eq!(sched.lambda_star, 2);
        assert!(sched.lambda_star <= sched.lambda1.max(sched.lambda2) + 1);
        for row in &sched.per_slot {
            // Direct re-evaluation of the min-formula.
            let k = row.slot as f64;
            let expect1 = (k * sched.secrecy.cap1).min(sched.mac.cap1);
            let expect2 = (k * sched.secrecy.cap2).min(sched.mac.cap2);
            assert_abs_diff_eq!(row.keyed1, expect1, epsilon = 1e-12);
            assert_abs_diff_eq!(row.keyed2, expect2, epsilon = 1e-12);
            assert_abs_diff_eq!(
                row.keyed_sum,
                (k * sched.secrecy.cap_sum).min(sched.mac.cap_sum),
                epsilon = 1e-12
            );
            if row.slot >= sched.lambda_star {
                assert_abs_diff_eq!(row.keyed1, sched.mac.cap1, epsilon = 1e-12);
                assert_abs_diff_eq!(row.keyed2, sched.mac.cap2, epsilon = 1e-12);
            }
            assert!(sched.mac.contains_approx(row.keyed1, row.keyed2, 1e-9));
        }
        // Monotone ramp on a symmetric fixture.
        for pair in sched.per_slot.windows(2) {
            assert!(pair[1].keyed1 >= pair[0].keyed1 - 1e-12);
            assert!(pair[1].keyed2 >= pair[0].keyed2 - 1e-12);
        }
    }

    #[test]
    fn slot_one_overall_rate_is_the_wiretap_rate() {
        let spec = fixtures::ch_bsc_eve();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let sched = slot_schedule(&spec, &inputs, 3, 4).unwrap();
        assert_abs_diff_eq!(sched.per_slot[0].overall1, sched.secrecy.cap1, epsilon = 1e-12);
        assert_abs_diff_eq!(sched.per_slot[0].overall2, sched.secrecy.cap2, epsilon = 1e-12);
    }

    #[test]
    fn overall_rate_interpolates_wiretap_and_keyed() {
        let spec = fixtures::ch_bsc_eve();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let sched = slot_schedule(&spec, &inputs, 4, 1).unwrap();
        let (r1, _) = overall_rate(&sched, 4, 4).unwrap();
        // (0.5 + 4·1.0)/5-style arithmetic at the real caps.
        let expected = (sched.secrecy.cap1 + 4.0 * sched.mac.cap1) / 5.0;
        assert_abs_diff_eq!(r1, expected, epsilon = 1e-12);
        assert!(matches!(
            overall_rate(&sched, 1, 4),
            Err(Error::InvalidSlot(1))
        ));
        assert!(matches!(
            overall_rate(&sched, 9, 4),
            Err(Error::InvalidSlot(9))
        ));
    }

    #[test]
    fn overall_rate_large_l_limit_reaches_the_keyed_rate() {
        let spec = fixtures::ch_bsc_eve();
        let inputs = crate::channel::InputPair::uniform_for(&spec);
        let sched = slot_schedule(&spec, &inputs, 3, 1).unwrap();
        let keyed = sched.mac.cap1;
        let wiretap = sched.secrecy.cap1;
        for l in [1u64, 4, 16, 99, 1000] {
            let (r1, _) = overall_rate(&sched, 3, l).unwrap();
            let gap = (keyed - wiretap) / (1.0 + l as f64);
            assert_abs_diff_eq!(keyed - r1, gap, epsilon = 1e-12);
        }
    }

    #[test]
    fn vertices_cover_the_standard_shapes() {
        let p = RatePentagon::new(1.0, 1.0, 1.5).unwrap();
        assert_eq!(
            p.vertices(),
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 1.0)]
        );
        let rect = RatePentagon::new(1.0, 2.0, 3.0).unwrap();
        assert_eq!(
            rect.vertices(),
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (0.0, 2.0)]
        );
        let tri = RatePentagon::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(tri.vertices(), vec![(0.0, 0.0), (0.5, 0.0), (0.0, 0.5)]);
        let origin = RatePentagon::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(origin.vertices(), vec![(0.0, 0.0)]);
    }

    #[test]
    fn pentagon_validation_rejects_bad_caps() {
        assert!(RatePentagon::new(-0.1, 1.0, 1.0).is_err());
        assert!(RatePentagon::new(1.0, 1.0, 2.5).is_err());
        // A hair over cap1+cap2 snaps down.
        let p = RatePentagon::new(1.0, 1.0, 2.0 + 1e-12).unwrap();
        assert_eq!(p.cap_sum, 2.0);
    }

    #[test]
    fn time_share_points_stay_in_the_hull() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut caps = || {
                let c1: f64 = rng.random::<f64>() * 2.0;
                let c2: f64 = rng.random::<f64>() * 2.0;
                let cs = rng.random::<f64>() * (c1 + c2);
                RatePentagon::new(c1, c2, cs).unwrap()
            };
            let pentagons = [caps(), caps(), caps()];
            let w: f64 = rng.random();
            let weights = [w * 0.5, (1.0 - w) * 0.5, 0.5];
            let ts = time_share(&pentagons, &weights).unwrap();
            for &(r1, r2) in &ts.points {
                assert!(
                    ts.hull.contains_approx(r1, r2, 1e-9),
                    "point ({r1}, {r2}) escapes hull {:?}",
                    ts.hull
                );
            }
        }
    }

    #[test]
    fn time_share_weight_validation() {
        let p = RatePentagon::new(1.0, 1.0, 2.0).unwrap();
        assert!(matches!(
            time_share(&[p], &[0.9]),
            Err(Error::WeightMismatch(_))
        ));
        assert!(matches!(
            time_share(&[p, p], &[0.5]),
            Err(Error::WeightMismatch(_))
        ));
        assert!(matches!(
            time_share(&[], &[]),
            Err(Error::EmptyInput("pentagons"))
        ));
        assert!(time_share(&[p, p], &[0.25, 0.75]).is_ok());
    }

    #[test]
    fn degenerate_sum_cap_freezes_the_ramp_at_zero() {
        // Secrecy caps positive individually but the sum term vanishes:
        // the keyed schedule then never leaves the origin.
        let s = RatePentagon::new(0.3, 0.3, 0.0).unwrap();
        let m = RatePentagon::new(1.0, 1.0, 2.0).unwrap();
        let (r1, r2, cap) = keyed_pair(5.0, &s, &m);
        assert_eq!((r1, r2, cap), (0.0, 0.0, 0.0));
    }
}

//! Boundary divisions: cyclically ordered arcs with alternating parity
//! labels, the compatibility checks, and the critical-case split and merge
//! combinatorics.
//!
//! All shipped boundary curves are circles, so a geometric division is a
//! circle plus an increasing list of junction angles; arc `a` ends at
//! junction `a` and its parity is the parity of `a`. The merge operates on
//! the abstract labeled cycle (the merged curve of the critical case is not
//! a circle), carrying measured margins instead of geometry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::C64;

#[derive(Debug, Error)]
pub enum DivisionError {
    #[error("a division needs an even arc count >= 4, got {count}")]
    BadCount { count: usize },
    #[error("junction angles must be strictly increasing within one turn")]
    BadAngles,
    #[error("no compliant junction found near angle {angle:.4} (derivative floor {floor:.3e})")]
    JunctionStuck { angle: f64, floor: f64 },
    #[error("division counts differ after equalization: {l1} vs {l2}")]
    UnequalCounts { l1: usize, l2: usize },
}

/// One boundary circle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CircleCurve {
    pub center: C64,
    pub radius: f64,
}

impl CircleCurve {
    pub fn point(&self, angle: f64) -> C64 {
        self.center + C64::from_polar(self.radius, angle)
    }
}

/// Division of one boundary circle: arc `a` spans from junction `a-1` to
/// junction `a` (mod l) counterclockwise and carries the parity of `a`
/// (odd index: first-component height arc; even index: second-component).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentDivision {
    pub circle: CircleCurve,
    pub junctions: Vec<f64>,
}

impl ComponentDivision {
    pub fn new(circle: CircleCurve, junctions: Vec<f64>) -> Result<Self, DivisionError> {
        let l = junctions.len();
        if l < 4 || l % 2 != 0 {
            return Err(DivisionError::BadCount { count: l });
        }
        for w in junctions.windows(2) {
            if w[1] <= w[0] {
                return Err(DivisionError::BadAngles);
            }
        }
        if junctions[l - 1] - junctions[0] >= 2.0 * std::f64::consts::PI {
            return Err(DivisionError::BadAngles);
        }
        Ok(Self { circle, junctions })
    }

    /// Uniform division with l arcs starting at `offset`.
    pub fn uniform(circle: CircleCurve, l: usize, offset: f64) -> Result<Self, DivisionError> {
        let junctions =
            (0..l).map(|a| offset + 2.0 * std::f64::consts::PI * a as f64 / l as f64).collect();
        Self::new(circle, junctions)
    }

    pub fn len(&self) -> usize {
        self.junctions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.junctions.is_empty()
    }

    /// Angular span (start, end) of arc `a`, end >= start.
    pub fn arc_span(&self, a: usize) -> (f64, f64) {
        let l = self.len();
        let end = self.junctions[a];
        let start = if a == 0 {
            self.junctions[l - 1] - 2.0 * std::f64::consts::PI
        } else {
            self.junctions[a - 1]
        };
        (start, end)
    }

    /// Junction point p_a (shared endpoint of arcs a and a+1).
    pub fn junction_point(&self, a: usize) -> C64 {
        self.circle.point(self.junctions[a])
    }

    pub fn arc_samples(&self, a: usize, n: usize) -> Vec<C64> {
        let (s, e) = self.arc_span(a);
        (0..n).map(|k| self.circle.point(s + (e - s) * k as f64 / (n - 1) as f64)).collect()
    }
}

/// Division of a full boundary: one component per boundary circle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Division {
    pub components: Vec<ComponentDivision>,
}

impl Division {
    pub fn counts(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.len()).collect()
    }
}

/// Per-arc compatibility data: worst margins of the parity inequality and
/// junction derivative floors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompatReport {
    /// per component, per arc: min over samples of (u_k - delta) for the
    /// parity component k
    pub arc_margins: Vec<Vec<f64>>,
    /// per component, per junction: min(|f1|, |f2|) - floor
    pub junction_margins: Vec<Vec<f64>>,
    pub deriv_floor: f64,
    pub pass: bool,
}

impl CompatReport {
    pub fn worst_arc_margin(&self) -> f64 {
        self.arc_margins
            .iter()
            .flat_map(|v| v.iter())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn worst_junction_margin(&self) -> f64 {
        self.junction_margins
            .iter()
            .flat_map(|v| v.iter())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Verify the parity inequalities and junction derivative conditions of a
/// division against evaluators for u and for the Weierstrass triple.
pub fn check_compatible(
    division: &Division,
    u_eval: &dyn Fn(C64) -> [f64; 3],
    f_eval: &dyn Fn(C64) -> [C64; 3],
    delta: f64,
    samples_per_arc: usize,
) -> CompatReport {
    // derivative floor relative to the median boundary derivative size
    let mut mags: Vec<f64> = Vec::new();
    for comp in &division.components {
        for a in 0..comp.len() {
            for z in comp.arc_samples(a, 16) {
                let f = f_eval(z);
                mags.push(f[0].norm().max(f[1].norm()));
            }
        }
    }
    mags.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median = mags.get(mags.len() / 2).copied().unwrap_or(1.0);
    let floor = crate::tol::DERIV_FLOOR_REL * median;

    let mut arc_margins = Vec::new();
    let mut junction_margins = Vec::new();
    let mut pass = true;
    for comp in &division.components {
        let l = comp.len();
        let mut arcs = Vec::with_capacity(l);
        for a in 0..l {
            let component_index = if a % 2 == 1 { 0 } else { 1 };
            let mut margin = f64::INFINITY;
            for z in comp.arc_samples(a, samples_per_arc) {
                let u = u_eval(z);
                margin = margin.min(u[component_index] - delta);
            }
            pass &= margin > 0.0;
            arcs.push(margin);
        }
        arc_margins.push(arcs);
        let mut juncts = Vec::with_capacity(l);
        for a in 0..l {
            let f = f_eval(comp.junction_point(a));
            let m = f[0].norm().min(f[1].norm()) - floor;
            pass &= m > 0.0;
            juncts.push(m);
        }
        junction_margins.push(juncts);
    }
    CompatReport { arc_margins, junction_margins, deriv_floor: floor, pass }
}

/// Build a compatible division on a circle where both leading components of
/// `u` clear `delta`: junctions start uniform and are nudged along the
/// circle until the derivative conditions hold.
pub fn synthesize_division(
    circle: CircleCurve,
    l: usize,
    u_eval: &dyn Fn(C64) -> [f64; 3],
    f_eval: &dyn Fn(C64) -> [C64; 3],
    delta: f64,
) -> Result<ComponentDivision, DivisionError> {
    let mut junctions = Vec::with_capacity(l);
    // floor as in check_compatible
    let mut mags: Vec<f64> = (0..64)
        .map(|k| {
            let z = circle.point(2.0 * std::f64::consts::PI * k as f64 / 64.0);
            let f = f_eval(z);
            f[0].norm().max(f[1].norm())
        })
        .collect();
    mags.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let floor = crate::tol::DERIV_FLOOR_REL * mags[mags.len() / 2];

    let width = 2.0 * std::f64::consts::PI / l as f64;
    for a in 0..l {
        let base = width * (a as f64 + 0.5);
        let mut found = None;
        // search symmetric offsets within 30% of the arc width
        for step in 0..25 {
            let off = width * 0.3 * (step as f64 / 24.0);
            for angle in [base + off, base - off] {
                let f = f_eval(circle.point(angle));
                if f[0].norm() > floor && f[1].norm() > floor {
                    found = Some(angle);
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        junctions.push(found.ok_or(DivisionError::JunctionStuck { angle: base, floor })?);
    }
    let div = ComponentDivision::new(circle, junctions)?;
    // the caller re-checks the parity inequalities; u is probed here only to
    // keep the signature honest
    let _ = u_eval;
    let _ = delta;
    Ok(div)
}

/// Critical split: make the arc count a multiple of 4 that is at least 8 by
/// splitting the initial portion of arc 0 into `l` adjacent subarcs. The
/// split piece must carry both-component height (verified by the caller via
/// check_compatible on the refined division).
pub fn critical_split(comp: &ComponentDivision) -> Result<ComponentDivision, DivisionError> {
    let l = comp.len();
    if l % 4 == 0 && l >= 8 {
        return Ok(comp.clone());
    }
    // arc 0 spans (start, end); its initial sub-span of fraction 0.45 is
    // divided into l adjacent subarcs
    let (start, end) = comp.arc_span(0);
    let span = (end - start) * 0.45;
    let mut junctions = Vec::with_capacity(2 * l);
    // new junctions inside arc 0: start+span/l, ..., start+span (l of them),
    // then the original junctions 0..l-1
    for j in 1..=l {
        junctions.push(start + span * j as f64 / l as f64);
    }
    junctions.extend(comp.junctions.iter().copied());
    // normalize to an increasing window
    let base = junctions[0];
    let mut norm: Vec<f64> = junctions
        .iter()
        .map(|&t| {
            let mut x = t;
            while x < base {
                x += 2.0 * std::f64::consts::PI;
            }
            while x >= base + 2.0 * std::f64::consts::PI {
                x -= 2.0 * std::f64::consts::PI;
            }
            x
        })
        .collect();
    norm.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ComponentDivision::new(comp.circle, norm)
}

/// Abstract labeled division for the merge bookkeeping: a cyclic sequence of
/// arc labels with measured height margins (min over the arc of u_k - delta
/// for k = 1, 2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbstractDivision {
    pub arcs: Vec<AbstractArc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbstractArc {
    pub label: String,
    pub margin_u1: f64,
    pub margin_u2: f64,
}

impl AbstractDivision {
    pub fn from_margins(prefix: &str, margins: &[(f64, f64)]) -> Self {
        Self {
            arcs: margins
                .iter()
                .enumerate()
                .map(|(i, &(m1, m2))| AbstractArc {
                    label: format!("{prefix}{i}"),
                    margin_u1: m1,
                    margin_u2: m2,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Parity compatibility of the labeled cycle: odd-index arcs need
    /// margin_u1 > 0, even-index arcs margin_u2 > 0.
    pub fn compatible(&self) -> bool {
        let l = self.len();
        if l < 4 || l % 2 != 0 {
            return false;
        }
        self.arcs.iter().enumerate().all(|(a, arc)| {
            if a % 2 == 1 {
                arc.margin_u1 > 0.0
            } else {
                arc.margin_u2 > 0.0
            }
        })
    }
}

/// Critical merge: splice two equal-count divisions across two bridge arcs
/// into one division of 2l arcs, the bridge arcs landing at indices 0 and l.
/// The bridge margins come from the bridge extension targets.
pub fn critical_merge(
    div1: &AbstractDivision,
    div2: &AbstractDivision,
    bridge: (AbstractArc, AbstractArc),
) -> Result<AbstractDivision, DivisionError> {
    let l = div1.len();
    if l != div2.len() {
        return Err(DivisionError::UnequalCounts { l1: l, l2: div2.len() });
    }
    if l < 4 || l % 2 != 0 {
        return Err(DivisionError::BadCount { count: l });
    }
    let mut arcs = Vec::with_capacity(2 * l);
    arcs.push(bridge.0); // index 0 (even slot: needs u2 margin)
    arcs.extend(div2.arcs[1..].iter().cloned()); // indices 1..l-1
    arcs.push(bridge.1); // index l
    arcs.extend(div1.arcs[1..].iter().cloned()); // indices l+1..2l-1
    Ok(AbstractDivision { arcs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle() -> CircleCurve {
        CircleCurve { center: C64::new(0.0, 0.0), radius: 1.0 }
    }

    #[test]
    fn arc_spans_and_junctions() {
        let d = ComponentDivision::uniform(unit_circle(), 4, 0.1).unwrap();
        let (s, e) = d.arc_span(0);
        assert!(e > s);
        assert!((e - 0.1).abs() < 1e-12);
        // arcs cover the circle exactly once
        let total: f64 = (0..4).map(|a| { let (s, e) = d.arc_span(a); e - s }).sum();
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn split_rule_counts() {
        for (l, expect) in [(4usize, 8usize), (6, 12), (8, 8), (10, 20), (12, 12), (14, 28), (16, 16)] {
            let d = ComponentDivision::uniform(unit_circle(), l, 0.0).unwrap();
            let out = critical_split(&d).unwrap();
            assert_eq!(out.len(), expect, "l = {l}");
            assert!(out.len() % 4 == 0 && out.len() >= 8);
        }
    }

    #[test]
    fn split_preserves_untouched_junctions() {
        let d = ComponentDivision::uniform(unit_circle(), 6, 0.0).unwrap();
        let out = critical_split(&d).unwrap();
        for &t in &d.junctions {
            assert!(
                out.junctions.iter().any(|&s| {
                    let mut diff = (s - t).abs();
                    diff = diff.min((diff - 2.0 * std::f64::consts::PI).abs());
                    diff < 1e-9
                }),
                "junction {t} lost"
            );
        }
    }

    #[test]
    fn merge_counts_and_parity() {
        let margins1: Vec<(f64, f64)> = (0..4).map(|a| if a % 2 == 1 { (0.5, -1.0) } else { (-1.0, 0.5) }).collect();
        let margins2 = margins1.clone();
        let d1 = AbstractDivision::from_margins("a", &margins1);
        let d2 = AbstractDivision::from_margins("b", &margins2);
        assert!(d1.compatible());
        let bridge = (
            AbstractArc { label: "beta".into(), margin_u1: -1.0, margin_u2: 0.4 },
            AbstractArc { label: "beta'".into(), margin_u1: -1.0, margin_u2: 0.4 },
        );
        let merged = critical_merge(&d1, &d2, bridge).unwrap();
        assert_eq!(merged.len(), 8);
        assert!(merged.compatible(), "merged cycle fails parity");
        // seam arcs sit at 0 and l with the bridge margins
        assert_eq!(merged.arcs[0].label, "beta");
        assert_eq!(merged.arcs[4].label, "beta'");
        assert!((merged.arcs[0].margin_u2 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_split_merge_sweep() {
        // acceptance-style sweep over l = 4..=16
        for l in (4..=16).step_by(2) {
            let d = ComponentDivision::uniform(unit_circle(), l, 0.3).unwrap();
            let out = critical_split(&d).unwrap();
            assert!(out.len() % 4 == 0 && out.len() >= 8, "split of {l}");
            // merge two copies at the equalized count
            let margins: Vec<(f64, f64)> =
                (0..out.len()).map(|a| if a % 2 == 1 { (0.3, 0.3) } else { (0.3, 0.3) }).collect();
            let a1 = AbstractDivision::from_margins("x", &margins);
            let a2 = AbstractDivision::from_margins("y", &margins);
            let merged = critical_merge(
                &a1,
                &a2,
                (
                    AbstractArc { label: "s0".into(), margin_u1: 0.1, margin_u2: 0.1 },
                    AbstractArc { label: "s1".into(), margin_u1: 0.1, margin_u2: 0.1 },
                ),
            )
            .unwrap();
            assert_eq!(merged.len(), 2 * out.len());
            assert!(merged.compatible());
        }
    }

    #[test]
    fn compat_check_flags_flipped_parity() {
        // u1 - 1 = 1.2 sin(2 theta) is positive exactly on the odd arcs of
        // the uniform 4-division at offset 0, u2 mirrors it; at junctions
        // both components sit at 1, above delta = 0.9
        let circle = unit_circle();
        let div = Division {
            components: vec![ComponentDivision::uniform(circle, 4, 0.0).unwrap()],
        };
        let u_eval = |z: C64| -> [f64; 3] {
            let th = z.arg();
            [1.0 + 1.2 * (2.0 * th).sin(), 1.0 - 1.2 * (2.0 * th).sin(), 0.0]
        };
        let f_eval = |_z: C64| -> [C64; 3] {
            [C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)]
        };
        let report = check_compatible(&div, &u_eval, &f_eval, 0.9, 33);
        assert!(report.pass, "margins {:?}", report.arc_margins);

        // rotate the junctions by one arc: parities flip, every arc's
        // interior dips below delta
        let mut rot = div.clone();
        rot.components[0].junctions =
            rot.components[0].junctions.iter().map(|t| t + 0.5 * std::f64::consts::PI).collect();
        let report = check_compatible(&rot, &u_eval, &f_eval, 0.9, 33);
        assert!(!report.pass);
        assert!(report.arc_margins[0].iter().all(|&m| m <= 0.0));
    }
}

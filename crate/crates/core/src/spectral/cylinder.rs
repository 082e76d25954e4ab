//! Digit and cell events as finite interval unions, and their exact joint
//! measures along τ and along the induced map τ_B.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{pow2_inv, rat, Rational, StepFunction};
use crate::observables::CellIndex;

/// A finite union of disjoint half-open intervals in [0,1).
#[derive(Clone, PartialEq, Eq)]
pub struct CylinderEvent {
    intervals: Vec<(Rational, Rational)>,
    pub description: String,
}

impl fmt::Debug for CylinderEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = ", self.description)?;
        for (i, (a, b)) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "[{a}, {b})")?;
        }
        Ok(())
    }
}

impl CylinderEvent {
    /// Sorts, drops empty pieces and joins touching intervals; rejects overlaps.
    pub fn new(mut intervals: Vec<(Rational, Rational)>, description: impl Into<String>) -> Result<Self> {
        intervals.retain(|(a, b)| a < b);
        intervals.sort_by(|x, y| x.0.cmp(&y.0));
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            if a.is_negative() || b > Rational::one() {
                return Err(Error::Domain(format!("[{a}, {b}) not inside [0,1)")));
            }
            match out.last_mut() {
                Some(last) if a < last.1 => return Err(Error::Domain("overlapping intervals".into())),
                Some(last) if a == last.1 => last.1 = b,
                _ => out.push((a, b)),
            }
        }
        Ok(CylinderEvent {
            intervals: out,
            description: description.into(),
        })
    }

    pub fn full() -> Self {
        CylinderEvent {
            intervals: vec![(Rational::zero(), Rational::one())],
            description: "Ω".into(),
        }
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn measure(&self) -> Rational {
        self.intervals.iter().map(|(a, b)| b - a).fold(Rational::zero(), |s, l| s + l)
    }

    pub fn indicator(&self) -> StepFunction {
        StepFunction::indicator_union(&self.intervals).expect("disjoint intervals")
    }

    /// `τ^{−lag}` of the event.
    pub fn preimage_tau(&self, lag: u32) -> CylinderEvent {
        let k = 1u64 << lag;
        let s = pow2_inv(lag);
        let mut iv = Vec::with_capacity(self.intervals.len() * k as usize);
        for j in 0..k {
            let off = Rational::from_integer(j.into());
            for (a, b) in &self.intervals {
                iv.push(((&off + a) * &s, (&off + b) * &s));
            }
        }
        CylinderEvent::new(iv, format!("τ^-{lag}({})", self.description)).expect("disjoint copies")
    }

    pub fn intersect(&self, o: &CylinderEvent) -> CylinderEvent {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < o.intervals.len() {
            let (a1, b1) = &self.intervals[i];
            let (a2, b2) = &o.intervals[j];
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        CylinderEvent {
            intervals: out,
            description: format!("{} ∩ {}", self.description, o.description),
        }
    }

    pub fn union(&self, o: &CylinderEvent) -> Result<CylinderEvent> {
        let mut iv = self.intervals.clone();
        iv.extend(o.intervals.iter().cloned());
        CylinderEvent::new(iv, format!("{} ∪ {}", self.description, o.description))
    }

    pub fn complement(&self) -> CylinderEvent {
        let mut out = Vec::new();
        let mut left = Rational::zero();
        for (a, b) in &self.intervals {
            if &left < a {
                out.push((left.clone(), a.clone()));
            }
            left = b.clone();
        }
        if left < Rational::one() {
            out.push((left, Rational::one()));
        }
        CylinderEvent {
            intervals: out,
            description: format!("¬({})", self.description),
        }
    }
}

/// A constraint on the first digit `a₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DigitCondition {
    Eq(u64),
    AtLeast(u64),
    In(Vec<u64>),
}

/// The event `{a₁ satisfies cond}`, with `{a₁ = i} = [1/(i+1), 1/i)`.
pub fn digit_event(cond: &DigitCondition, digit_cap: u64) -> Result<CylinderEvent> {
    let check = |v: u64| {
        if v == 0 {
            Err(Error::Domain("digits start at 1".into()))
        } else if v > digit_cap {
            Err(Error::DigitCap { value: v, cap: digit_cap })
        } else {
            Ok(())
        }
    };
    let cell = |i: u64| (rat(1, i as i64 + 1), rat(1, i as i64));
    match cond {
        DigitCondition::Eq(i) => {
            check(*i)?;
            CylinderEvent::new(vec![cell(*i)], format!("a=={i}"))
        }
        DigitCondition::AtLeast(c) => {
            check(*c)?;
            CylinderEvent::new(vec![(Rational::zero(), rat(1, *c as i64))], format!("a>={c}"))
        }
        DigitCondition::In(set) => {
            let mut s = set.clone();
            s.sort_unstable();
            s.dedup();
            for &v in &s {
                check(v)?;
            }
            CylinderEvent::new(s.iter().map(|&i| cell(i)).collect(), format!("a in {s:?}"))
        }
    }
}

/// `λ(∩_k τ^{−lag_k} E_k)`, by intersecting interval preimages.
pub fn joint_measure_tau(events: &[(u32, CylinderEvent)], piece_cap: u64) -> Result<Rational> {
    let mut acc = CylinderEvent::full();
    for (lag, e) in events {
        let requested = (e.intervals.len() as u64).saturating_mul(1u64 << (*lag).min(62));
        if requested > piece_cap {
            return Err(Error::PieceCap { requested, cap: piece_cap });
        }
        acc = acc.intersect(&e.preimage_tau(*lag));
    }
    Ok(acc.measure())
}

/// An event for the induced map: a union of cells, optionally together with
/// every level `≥ tail_from` (`{φ > tail_from} = [0, 2^{−tail_from})`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedEvent {
    pub cells: Vec<CellIndex>,
    pub tail_from: Option<u32>,
}

impl InducedEvent {
    pub fn cell(c: CellIndex) -> Self {
        InducedEvent {
            cells: vec![c],
            tail_from: None,
        }
    }

    pub fn cells(cells: Vec<CellIndex>) -> Self {
        InducedEvent { cells, tail_from: None }
    }

    /// `{φ = j+1}`, i.e. `J_j`.
    pub fn level(j: u32) -> Self {
        Self::cell(CellIndex { j, i: 0, m: 1 })
    }

    /// `{φ > j}`: all levels `≥ j`.
    pub fn level_tail(j: u32) -> Self {
        InducedEvent {
            cells: Vec::new(),
            tail_from: Some(j),
        }
    }

    pub fn with_tail(mut self, j: u32) -> Self {
        self.tail_from = Some(j);
        self
    }

    /// Finest resolution used by the cells.
    pub fn resolution(&self) -> u32 {
        self.cells.iter().map(|c| c.m).max().unwrap_or(1)
    }

    /// Deepest level named individually (a tail from `j` names level `j − 1`).
    pub fn max_level(&self) -> u32 {
        let cells = self.cells.iter().map(|c| c.j).max().unwrap_or(0);
        let tail = self.tail_from.map_or(0, |j| j.saturating_sub(1));
        cells.max(tail)
    }

    pub fn to_event(&self) -> Result<CylinderEvent> {
        let mut iv: Vec<(Rational, Rational)> = self
            .cells
            .iter()
            .filter(|c| self.tail_from.is_none_or(|t| c.j < t))
            .map(|c| (c.lower(), c.upper()))
            .collect();
        if let Some(t) = self.tail_from {
            iv.push((Rational::zero(), pow2_inv(t)));
        }
        CylinderEvent::new(iv, format!("{self:?}"))
    }
}

/// `P_B g(y) = Σ_n 2^{−(n+1)} g((y+1)/2^{n+1})`, the transfer operator of τ_B.
/// Branches deeper than the first breakpoint of `g` see the constant first
/// value and are summed as a geometric tail.
pub fn induced_transfer(g: &StepFunction) -> Result<StepFunction> {
    let first = &g.breaks()[1];
    let c = g.values()[0].clone();
    // smallest L with 2^{−L} ≤ first breakpoint
    let mut l = 0u32;
    while &pow2_inv(l) > first {
        l += 1;
    }
    let mut acc = StepFunction::constant(c * pow2_inv(l));
    for n in 0..l {
        let branch = g.restrict_rescale(&pow2_inv(n + 1), &pow2_inv(n))?;
        acc = acc.add(&branch.scale(&pow2_inv(n + 1)));
    }
    Ok(acc)
}

/// `λ(∩_k τ_B^{−lag_k} E_k)` for events measurable with respect to the
/// resolution-`stride` cells, at lags `offset + t·stride`.
pub fn joint_measure_tau_b(events: &[(u64, InducedEvent)], stride: u32, offset: u64, level_cap: u32) -> Result<Rational> {
    if stride == 0 {
        return Err(Error::Domain("stride must be ≥ 1".into()));
    }
    let mut evs: Vec<(u64, CylinderEvent)> = Vec::with_capacity(events.len());
    for (lag, e) in events {
        if *lag < offset || !(lag - offset).is_multiple_of(u64::from(stride)) {
            return Err(Error::Stride {
                lag: *lag,
                stride: u64::from(stride),
                offset,
            });
        }
        if e.resolution() > stride || e.max_level() > level_cap {
            return Err(Error::NotCellMeasurable { m: stride, level_cap });
        }
        evs.push((*lag, e.to_event()?));
    }
    joint_measure_tau_b_unchecked(&evs)
}

/// The induced joint measure without the stride and measurability checks.
pub fn joint_measure_tau_b_unchecked(events: &[(u64, CylinderEvent)]) -> Result<Rational> {
    if events.is_empty() {
        return Ok(Rational::one());
    }
    let mut evs = events.to_vec();
    evs.sort_by_key(|(lag, _)| *lag);
    let mut g = evs[0].1.indicator();
    let mut at = evs[0].0;
    for (lag, e) in &evs[1..] {
        for _ in at..*lag {
            g = induced_transfer(&g)?;
        }
        at = *lag;
        g = g.product(&e.indicator());
    }
    Ok(g.integral())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, DEFAULT_PIECE_CAP};

    #[test]
    fn digit_events() {
        let e1 = digit_event(&DigitCondition::Eq(1), 6).unwrap();
        assert_eq!(e1.intervals(), &[(rat(1, 2), int(1))]);
        assert_eq!(e1.measure(), rat(1, 2));
        assert_eq!(digit_event(&DigitCondition::AtLeast(2), 6).unwrap().measure(), rat(1, 2));
        assert_eq!(digit_event(&DigitCondition::Eq(2), 6).unwrap().measure(), rat(1, 6));
        assert_eq!(digit_event(&DigitCondition::In(vec![1, 2]), 6).unwrap().measure(), rat(2, 3));
        assert!(matches!(digit_event(&DigitCondition::Eq(9), 6), Err(Error::DigitCap { .. })));
    }

    #[test]
    fn joint_tau_examples() {
        let a2 = digit_event(&DigitCondition::Eq(2), 6).unwrap();
        let a1 = digit_event(&DigitCondition::Eq(1), 6).unwrap();
        let j = joint_measure_tau(&[(0, a2.clone()), (1, a1.clone())], DEFAULT_PIECE_CAP).unwrap();
        assert_eq!(j, rat(1, 6));
        assert_eq!(j - a2.measure() * a1.measure(), rat(1, 12));
        let ge2 = digit_event(&DigitCondition::AtLeast(2), 6).unwrap();
        assert_eq!(joint_measure_tau(&[(0, ge2.clone()), (1, ge2)], DEFAULT_PIECE_CAP).unwrap(), rat(1, 4));
        assert_eq!(joint_measure_tau(&[(3, a2.clone())], DEFAULT_PIECE_CAP).unwrap(), rat(1, 6));
    }

    #[test]
    fn set_operations() {
        let a = CylinderEvent::new(vec![(int(0), rat(1, 2))], "a").unwrap();
        let b = CylinderEvent::new(vec![(rat(1, 4), rat(3, 4))], "b").unwrap();
        assert_eq!(a.intersect(&b).measure(), rat(1, 4));
        assert_eq!(a.complement().intervals(), &[(rat(1, 2), int(1))]);
        assert!(a.union(&b).is_err());
        assert_eq!(a.union(&a.complement()).unwrap().intervals(), &[(int(0), int(1))]);
    }

    #[test]
    fn induced_transfer_preserves_mass_and_constants() {
        let one = StepFunction::constant(int(1));
        assert_eq!(induced_transfer(&one).unwrap(), one);
        let g = StepFunction::indicator(rat(1, 5), rat(7, 9)).unwrap();
        assert_eq!(induced_transfer(&g).unwrap().integral(), g.integral());
    }

    #[test]
    fn induced_examples() {
        // x ∈ J₁ and τ_B x = 4x − 1 ∈ J₁ ⇔ x ∈ [5/16, 3/8)
        let j = joint_measure_tau_b(&[(0, InducedEvent::level(1)), (1, InducedEvent::level(1))], 1, 0, 8).unwrap();
        assert_eq!(j, rat(1, 16));
        let c = CellIndex::new(1, 0, 2).unwrap();
        let j = joint_measure_tau_b(&[(0, InducedEvent::cell(c)), (2, InducedEvent::cell(c))], 2, 0, 8).unwrap();
        assert_eq!(j, rat(1, 64));
        let c3 = CellIndex::new(4, 2, 3).unwrap();
        assert_eq!(joint_measure_tau_b(&[(0, InducedEvent::cell(c3))], 3, 0, 8).unwrap(), pow2_inv(7));
        assert!(matches!(
            joint_measure_tau_b(&[(0, InducedEvent::cell(c)), (1, InducedEvent::cell(c))], 2, 0, 8),
            Err(Error::Stride { .. })
        ));
        assert!(matches!(
            joint_measure_tau_b(&[(0, InducedEvent::cell(c3))], 2, 0, 8),
            Err(Error::NotCellMeasurable { .. })
        ));
        let tail = InducedEvent::level_tail(3).to_event().unwrap();
        assert_eq!(tail.intervals(), &[(int(0), rat(1, 8))]);
    }

    /// Bit-string oracle: the bracket `[decided true, decided true + undecided]/2^L`
    /// over all strings of length L must contain the exact measure.
    fn bracket(events: &[(u64, (u32, u64, u32))], bits: u32) -> (Rational, Rational) {
        let (mut yes, mut open) = (0u64, 0u64);
        for s in 0..1u64 << bits {
            let bit = |k: u32| (s >> (bits - 1 - k)) & 1 == 1;
            let mut pos = 0u32;
            let mut excursion = 0u64;
            let mut verdict = Some(true);
            let mut pending: Vec<_> = events.to_vec();
            pending.sort();
            'outer: for (lag, (j, i, m)) in pending {
                while excursion < lag {
                    loop {
                        if pos >= bits {
                            verdict = None;
                            break 'outer;
                        }
                        pos += 1;
                        if bit(pos - 1) {
                            break;
                        }
                    }
                    excursion += 1;
                }
                // cell test: j zeros, a one, then m−1 bits B with i = 2^{m−1}−1−B
                let need = j + m;
                if pos + need > bits {
                    verdict = None;
                    break;
                }
                let mut ok = (0..j).all(|k| !bit(pos + k)) && bit(pos + j);
                let mut b = 0u64;
                for k in 0..m - 1 {
                    b = 2 * b + bit(pos + j + 1 + k) as u64;
                }
                ok &= (1u64 << (m - 1)) - 1 - b == i;
                if !ok {
                    verdict = Some(false);
                    break;
                }
            }
            match verdict {
                Some(true) => yes += 1,
                None => open += 1,
                Some(false) => {}
            }
        }
        let d = Rational::from_integer((1u64 << bits).into());
        (
            Rational::from_integer(yes.into()) / &d,
            Rational::from_integer((yes + open).into()) / d,
        )
    }

    #[test]
    fn induced_measure_agrees_with_bit_enumeration() {
        let cases: Vec<Vec<(u64, (u32, u64, u32))>> = vec![
            vec![(0, (1, 0, 1)), (1, (1, 0, 1))],
            vec![(0, (0, 1, 2)), (1, (2, 0, 2))],
            vec![(0, (1, 0, 2)), (2, (0, 1, 2)), (3, (1, 1, 2))],
            vec![(0, (2, 3, 3)), (1, (0, 0, 2))],
        ];
        for case in cases {
            let evs: Vec<(u64, CylinderEvent)> = case
                .iter()
                .map(|(lag, (j, i, m))| (*lag, InducedEvent::cell(CellIndex::new(*j, *i, *m).unwrap()).to_event().unwrap()))
                .collect();
            let exact = joint_measure_tau_b_unchecked(&evs).unwrap();
            let (lo, hi) = bracket(&case, 18);
            assert!(lo <= exact && exact <= hi, "{case:?}: {exact} not in [{lo}, {hi}]");
            assert!(&hi - &lo < rat(1, 100));
        }
    }
}

//! Bowditch's descending-path classifier.
//!
//! Starting at the base vertex, repeatedly cross the edge that decreases
//! the flipped coordinate the most. The walk ends at an attractor (a sink or
//! an attracting indecisive edge), at a real region with trace in `(-2, 2)`
//! when `k < 2`, at an exceptional character, or when the budget runs out.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::character::{
    apply, exceptional_kind, in_generalized_fricke_c11, kappa, BoundaryKind, Color, ExceptionalKind,
    Generator, ImaginaryCharacter, MoveWord,
};
use crate::error::{Error, Result};
use crate::farey::{Fraction, Parity};
use crate::scalar::{two, Scalar};
use crate::surface::q_z;
use crate::tree::{
    base_vertex, descend_step_character, edge_info_character, flip_fractions, is_orthogonal_indecisive_character,
    replay_fractions, Vertex,
};

/// Number of trailing colors inspected by [`end_invariant_estimate`].
pub const END_TAIL: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_depth: usize,
    /// Coordinates above this size abort the computation.
    pub max_abs: f64,
    pub geodesic_walk_limit: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_depth: 10_000, max_abs: 1e300, geodesic_walk_limit: 100_000 }
    }
}

impl Budget {
    pub fn new(max_depth: usize, max_abs: f64, geodesic_walk_limit: usize) -> Result<Self> {
        if max_depth == 0 || geodesic_walk_limit == 0 || !(max_abs > 0.0) {
            return Err(Error::Domain("budget limits must be positive".into()));
        }
        Ok(Self { max_depth, max_abs, geodesic_walk_limit })
    }
}

/// Estimate of the end of the tree a non-terminating descent heads to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EndEstimate {
    /// The descent winds around the region with this class.
    Region(Fraction),
    /// Common leading partial quotients of the final triangle's classes.
    Prefix(Vec<BigInt>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification<T = f64> {
    GeneralizedFrickeC11 {
        sink: ImaginaryCharacter<T>,
        delta: T,
        boundary: BoundaryKind,
        word: MoveWord,
    },
    FrickeC02 {
        sink: ImaginaryCharacter<T>,
        word: MoveWord,
    },
    AttractingIndecisiveEdge {
        endpoints: [ImaginaryCharacter<T>; 2],
        word: MoveWord,
    },
    EllipticPrimitive {
        region_fraction: Fraction,
        trace: T,
        word: MoveWord,
    },
    Exceptional {
        kind: ExceptionalKind,
    },
    Undetermined {
        depth_reached: usize,
        end_estimate: Option<EndEstimate>,
    },
}

impl<T> Classification<T> {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Classification::GeneralizedFrickeC11 { .. } => "GeneralizedFrickeC11",
            Classification::FrickeC02 { .. } => "FrickeC02",
            Classification::AttractingIndecisiveEdge { .. } => "AttractingIndecisiveEdge",
            Classification::EllipticPrimitive { .. } => "EllipticPrimitive",
            Classification::Exceptional { .. } => "Exceptional",
            Classification::Undetermined { .. } => "Undetermined",
        }
    }

    pub fn word(&self) -> Option<&MoveWord> {
        match self {
            Classification::GeneralizedFrickeC11 { word, .. }
            | Classification::FrickeC02 { word, .. }
            | Classification::AttractingIndecisiveEdge { word, .. }
            | Classification::EllipticPrimitive { word, .. } => Some(word),
            _ => None,
        }
    }

    /// Number of tree edges crossed before the outcome was decided.
    pub fn depth(&self) -> usize {
        match self {
            Classification::Undetermined { depth_reached, .. } => *depth_reached,
            Classification::Exceptional { .. } => 0,
            _ => self.word().map_or(0, |w| w.colors().count()),
        }
    }

    /// Attractor found: the character lies in the Bowditch set.
    pub fn is_fricke(&self) -> bool {
        matches!(
            self,
            Classification::GeneralizedFrickeC11 { .. }
                | Classification::FrickeC02 { .. }
                | Classification::AttractingIndecisiveEdge { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionWitness {
    pub fraction: Fraction,
    pub parity: Parity,
    /// Real coefficient of the trace (imaginary regions carry `i·trace`).
    pub trace: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BqReport {
    pub satisfied: bool,
    pub omega_size: usize,
    pub witness: Option<RegionWitness>,
    /// False when the search stopped on the budget.
    pub complete: bool,
}

/// One descending move at a vertex; see [`descend_step_character`].
pub fn descend_step<T: Scalar>(v: &Vertex<T>) -> Option<(Color, Vertex<T>)> {
    let (color, character) = descend_step_character(&v.character)?;
    let mut address = v.address.clone();
    address.push(color.vieta());
    Some((color, Vertex { character, fractions: flip_fractions(&v.fractions, color), address }))
}

fn le_approx<T: Scalar>(a: &T, b: &T) -> bool {
    a <= b || a.approx_eq(b)
}

fn fricke_c02_tolerant<T: Scalar>(c: &ImaginaryCharacter<T>) -> bool {
    let t = two::<T>();
    le_approx(&c.z, &-t.clone()) && le_approx(&t, &(c.x.clone() * c.y.clone() + c.z.clone()))
}

fn too_large<T: Scalar>(c: &ImaginaryCharacter<T>, budget: &Budget) -> bool {
    [&c.x, &c.y, &c.z].iter().any(|v| {
        let f = v.to_f64().abs();
        !(f <= budget.max_abs)
    })
}

fn strictly_inside_two<T: Scalar>(t: &T) -> bool {
    let a = t.abs();
    a < two() && !a.approx_eq(&two())
}

/// A real region with small trace found by walking around an imaginary one.
struct WalkHit<T> {
    index: i64,
    trace: T,
    word: Vec<Generator>,
}

fn walk_around_imaginary<T: Scalar>(
    c: &ImaginaryCharacter<T>,
    slot: Color,
    budget: &Budget,
) -> Option<WalkHit<T>> {
    let [a, b] = slot.others();
    // the real slot among the two flipped ones
    let real_index_parity = if a == Color::Three { 0 } else { 1 };
    let start_index = real_index_parity as i64;
    if strictly_inside_two(&c.z) {
        return Some(WalkHit { index: start_index, trace: c.z.clone(), word: vec![] });
    }
    let limit = budget.geodesic_walk_limit;
    // forward: index 2 flips a, 3 flips b, ...; backward: -1 flips b, -2 flips a, ...
    for forward in [true, false] {
        let mut cur = c.clone();
        let mut word = Vec::new();
        let mut last_real = c.z.abs();
        for s in 0..limit {
            let index = if forward { s as i64 + 2 } else { -(s as i64) - 1 };
            let color = if index.rem_euclid(2) == 0 { a } else { b };
            cur = apply(&cur, color.vieta());
            word.push(color.vieta());
            if too_large(&cur, budget) {
                break;
            }
            if color != Color::Three {
                continue;
            }
            if strictly_inside_two(&cur.z) {
                return Some(WalkHit { index, trace: cur.z.clone(), word });
            }
            let now = cur.z.abs();
            // the real traces abutting an imaginary region are unimodal in
            // absolute value, so once they grow past 2 they never return
            if now > last_real && !now.approx_eq(&last_real) {
                break;
            }
            last_real = now;
        }
    }
    None
}

/// Walks the alternating geodesic around the imaginary region in `slot`
/// looking for an abutting real region with trace in `(-2, 2)`.
///
/// Indices follow [`crate::tree::alternating_geodesic`]. The walk preserves
/// `z² + y·x·z - x² = k + 2 + y²` (for the Y region; symmetrically for X).
pub fn elliptic_walk<T: Scalar>(v: &Vertex<T>, slot: Color, budget: &Budget) -> Result<Option<(i64, T)>> {
    if slot == Color::Three {
        return Err(Error::Domain("elliptic_walk needs an imaginary region".into()));
    }
    if v.character.coord(slot).is_zero() {
        return Err(Error::Domain("imaginary trace is zero: character is exceptional".into()));
    }
    if kappa(&v.character) >= two() {
        return Err(Error::Domain("elliptic_walk needs k < 2".into()));
    }
    Ok(walk_around_imaginary(&v.character, slot, budget).map(|h| (h.index, h.trace)))
}

/// Estimate of the end of the tree from the tail of a descent address.
pub fn end_invariant_estimate(address: &MoveWord) -> Option<EndEstimate> {
    let colors: Vec<Color> = address.colors().collect();
    if colors.is_empty() {
        return None;
    }
    let fractions = replay_fractions(address);
    if colors.len() >= END_TAIL {
        let tail = &colors[colors.len() - END_TAIL..];
        let (c0, c1) = (tail[0], tail[1]);
        let alternating = c0 != c1 && tail.iter().enumerate().all(|(i, &c)| c == if i % 2 == 0 { c0 } else { c1 });
        if alternating {
            let fixed = Color::ALL.into_iter().find(|&c| c != c0 && c != c1).unwrap();
            return Some(EndEstimate::Region(fractions[fixed.index()].clone()));
        }
    }
    let expansions: Vec<Vec<BigInt>> = fractions.iter().filter_map(|f| f.continued_fraction()).collect();
    let first = expansions.first()?;
    let mut prefix = Vec::new();
    for (i, term) in first.iter().enumerate() {
        if expansions.iter().all(|e| e.get(i) == Some(term)) {
            prefix.push(term.clone());
        } else {
            break;
        }
    }
    Some(EndEstimate::Prefix(prefix))
}

fn exceptional_along<T: Scalar>(c: &ImaginaryCharacter<T>) -> Option<ExceptionalKind> {
    match (c.x.is_zero(), c.y.is_zero()) {
        (true, true) => Some(ExceptionalKind::Dihedral),
        (true, false) | (false, true) => Some(ExceptionalKind::CoordinateZero),
        _ => None,
    }
}

fn elliptic_result<T: Scalar>(word: MoveWord, trace: T) -> Classification<T> {
    let fractions = replay_fractions(&word);
    Classification::EllipticPrimitive { region_fraction: fractions[2].clone(), trace, word }
}

/// Tries both imaginary regions at `c`, the smaller trace first.
fn try_elliptic_walks<T: Scalar>(
    c: &ImaginaryCharacter<T>,
    word: &MoveWord,
    budget: &Budget,
) -> Option<Classification<T>> {
    let mut slots = [Color::One, Color::Two];
    if c.y.abs() < c.x.abs() {
        slots.swap(0, 1);
    }
    for slot in slots {
        if let Some(hit) = walk_around_imaginary(c, slot, budget) {
            let mut w = word.clone();
            w.0.extend(hit.word);
            return Some(elliptic_result(w, hit.trace));
        }
    }
    None
}

/// Runs the descent from the base vertex of `c` and classifies the outcome.
pub fn classify<T: Scalar>(c: &ImaginaryCharacter<T>, budget: &Budget) -> Result<Classification<T>> {
    if !c.is_finite() {
        return Err(Error::NonFinite(format!("{c:?}")));
    }
    if let Some(kind) = exceptional_kind(c) {
        return Ok(Classification::Exceptional { kind });
    }
    let k = kappa(c);
    let below_two = k < two();
    let mut cur = c.clone();
    let mut word = MoveWord::new();
    let mut depth = 0usize;
    loop {
        if let Some(kind) = exceptional_along(&cur) {
            return Ok(Classification::Exceptional { kind });
        }
        if below_two && strictly_inside_two(&cur.z) {
            return Ok(elliptic_result(word, cur.z.clone()));
        }
        if too_large(&cur, budget) {
            return Ok(Classification::Undetermined { depth_reached: depth, end_estimate: end_invariant_estimate(&word) });
        }
        match descend_step_character(&cur) {
            Some((color, next)) => {
                if depth >= budget.max_depth {
                    if below_two {
                        if let Some(hit) = try_elliptic_walks(&cur, &word, budget) {
                            return Ok(hit);
                        }
                    }
                    return Ok(Classification::Undetermined {
                        depth_reached: depth,
                        end_estimate: end_invariant_estimate(&word),
                    });
                }
                word.push(color.vieta());
                cur = next;
                depth += 1;
            }
            None => return Ok(terminal(cur, word, depth, &k, budget)),
        }
    }
}

fn terminal<T: Scalar>(
    cur: ImaginaryCharacter<T>,
    mut word: MoveWord,
    depth: usize,
    k: &T,
    budget: &Budget,
) -> Classification<T> {
    let indecisive = Color::ALL
        .into_iter()
        .filter(|&col| !edge_info_character(&cur, col).decisive)
        .min_by_key(|&col| !is_orthogonal_indecisive_character(&cur, col));
    let near_exceptional = indecisive.is_some_and(|col| !is_orthogonal_indecisive_character(&cur, col));
    if *k > two() && !near_exceptional {
        if let Some(boundary) = in_generalized_fricke_c11(&cur) {
            let delta = q_z(&cur.z, &cur.x, &cur.y) + two();
            return Classification::GeneralizedFrickeC11 { sink: cur, delta, boundary, word };
        }
    } else if *k <= two() {
        let normalized = if cur.z > T::zero() { apply(&cur, Generator::S1) } else { cur.clone() };
        if fricke_c02_tolerant(&normalized) {
            if cur.z > T::zero() {
                word.push(Generator::S1);
            }
            return Classification::FrickeC02 { sink: normalized, word };
        }
        if let Some(hit) = try_elliptic_walks(&cur, &word, budget) {
            return hit;
        }
    }
    if let Some(color) = indecisive {
        let other = apply(&cur, color.vieta());
        // A tie with the flipped value close to minus the old one means the
        // product of the other two coordinates vanished to working precision:
        // the descent is converging onto the exceptional set, not stopping.
        if other.coord(color).approx_eq(cur.coord(color)) {
            return Classification::AttractingIndecisiveEdge { endpoints: [cur, other], word };
        }
    }
    Classification::Undetermined { depth_reached: depth, end_estimate: end_invariant_estimate(&word) }
}

#[derive(Clone)]
struct RegionSeed<T> {
    character: ImaginaryCharacter<T>,
    fractions: [Fraction; 3],
    slot: Color,
}

fn region_trace_in_omega<T: Scalar>(t: &T, bound: &T) -> bool {
    le_approx(&t.abs(), bound)
}

fn witness_for<T: Scalar>(fraction: &Fraction, slot: Color, t: &T) -> Option<RegionWitness> {
    let bad = if slot == Color::Three { le_approx(&t.abs(), &two()) } else { t.is_zero() };
    bad.then(|| RegionWitness { fraction: fraction.clone(), parity: fraction.parity(), trace: t.to_f64() })
}

/// Checks the Bowditch conditions by enumerating the regions with
/// `|trace| ≤ bound`, a connected set containing the attractor.
pub fn bq_check<T: Scalar>(c: &ImaginaryCharacter<T>, bound: &T, budget: &Budget) -> Result<BqReport> {
    if *bound < two() {
        return Err(Error::Domain(format!("bq bound must be at least 2, got {bound:?}")));
    }
    if !c.is_finite() {
        return Err(Error::NonFinite(format!("{c:?}")));
    }
    let unsatisfied = |omega_size, witness, complete| BqReport { satisfied: false, omega_size, witness, complete };
    let mut v = base_vertex(c);
    let mut depth = 0usize;
    loop {
        for slot in Color::ALL {
            if let Some(w) = witness_for(&v.fractions[slot.index()], slot, v.character.coord(slot)) {
                return Ok(unsatisfied(0, Some(w), true));
            }
        }
        if too_large(&v.character, budget) {
            return Ok(unsatisfied(0, None, false));
        }
        match descend_step(&v) {
            Some((_, next)) if depth < budget.max_depth => {
                v = next;
                depth += 1;
            }
            Some(_) => return Ok(unsatisfied(0, None, false)),
            None => break,
        }
    }

    let mut seen: HashSet<Fraction> = HashSet::new();
    let mut queue: VecDeque<RegionSeed<T>> = VecDeque::new();
    for slot in Color::ALL {
        if region_trace_in_omega(v.character.coord(slot), bound) {
            seen.insert(v.fractions[slot.index()].clone());
            queue.push_back(RegionSeed { character: v.character.clone(), fractions: v.fractions.clone(), slot });
        }
    }
    let limit = budget.geodesic_walk_limit;
    while let Some(seed) = queue.pop_front() {
        let [a, b] = seed.slot.others();
        for forward in [true, false] {
            let mut cur = seed.character.clone();
            let mut fr = seed.fractions.clone();
            let mut last: [Option<T>; 3] = [None, None, None];
            let mut growing = [false; 3];
            for s in 0.. {
                if s >= limit || seen.len() > limit {
                    return Ok(unsatisfied(seen.len(), None, false));
                }
                let index = if forward { s as i64 + 2 } else { -(s as i64) - 1 };
                let color = if index.rem_euclid(2) == 0 { a } else { b };
                cur = apply(&cur, color.vieta());
                fr = flip_fractions(&fr, color);
                if too_large(&cur, budget) {
                    return Ok(unsatisfied(seen.len(), None, false));
                }
                let t = cur.coord(color).clone();
                let fraction = &fr[color.index()];
                if region_trace_in_omega(&t, bound) && !seen.contains(fraction) {
                    if let Some(w) = witness_for(fraction, color, &t) {
                        return Ok(unsatisfied(seen.len() + 1, Some(w), true));
                    }
                    seen.insert(fraction.clone());
                    queue.push_back(RegionSeed { character: cur.clone(), fractions: fr.clone(), slot: color });
                }
                let now = t.abs();
                let i = color.index();
                growing[i] = last[i].as_ref().is_some_and(|prev| now > *prev && !now.approx_eq(prev)) && now > *bound;
                last[i] = Some(now);
                if growing[a.index()] && growing[b.index()] {
                    break;
                }
            }
        }
    }
    Ok(BqReport { satisfied: true, omega_size: seen.len(), witness: None, complete: true })
}

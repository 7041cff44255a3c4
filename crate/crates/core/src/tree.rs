//! The trivalent tree of superbases with the flow induced by a character.
//!
//! A vertex carries a character `(x, y, z)` and the three Farey classes of
//! its complementary regions, in slots X, Y, Z. Crossing the edge of color
//! `c` applies the Vieta involution of that color and reflects the class in
//! slot `c` across the opposite Farey edge. Every edge is directed from the
//! region with the larger absolute trace towards the smaller one; ties are
//! indecisive and count as pointing into both endpoints.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::character::{apply, Color, Generator, ImaginaryCharacter, MoveWord};
use crate::error::{Error, Result};
use crate::farey::{Fraction, Parity};
use crate::scalar::{two, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct RegionLabel<T> {
    pub fraction: Fraction,
    pub parity: Parity,
    /// Real coefficient of the trace: the trace is `trace` for the real
    /// region and `i·trace` for the imaginary ones.
    pub trace: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex<T = f64> {
    pub character: ImaginaryCharacter<T>,
    pub fractions: [Fraction; 3],
    pub address: MoveWord,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeDirection {
    TowardSelf,
    AwayFromSelf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectedEdgeInfo<T> {
    pub color: Color,
    pub decisive: bool,
    pub direction: EdgeDirection,
    pub flipped_value: T,
}

impl<T: Scalar> DirectedEdgeInfo<T> {
    pub fn is_outward(&self) -> bool {
        self.direction == EdgeDirection::AwayFromSelf
    }

    /// Only the real region (color 3) sits across R-edges.
    pub fn is_real_edge(&self) -> bool {
        self.color == Color::Three
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexType {
    Source,
    Fork,
    Merge,
    Sink,
}

impl VertexType {
    fn from_inward_count(n: usize) -> Self {
        match n {
            0 => VertexType::Source,
            1 => VertexType::Fork,
            2 => VertexType::Merge,
            _ => VertexType::Sink,
        }
    }
}

/// Two edges point away from a vertex whose third region has `|trace| > 2`
/// although the two flipped traces are not both zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ForkViolation<T> {
    pub outward: [Color; 2],
    pub third: Color,
    pub third_trace: T,
}

/// Trace of a region abutting the region a geodesic turns around.
#[derive(Clone, Debug, PartialEq)]
pub struct AbuttingTrace<T> {
    pub index: i64,
    /// Slot the region occupies at the vertices adjacent to it.
    pub slot: Color,
    pub value: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeodesicRegime {
    /// `|z| < 2`: the abutting traces stay bounded.
    Elliptic,
    /// `|z| = 2`.
    ParabolicBoundary,
    /// `k > 2`, `2 < |z| < √(k+2)`: one sink, all other vertices merges.
    SinkOnBoundary,
    /// `k > 2`, `|z| = √(k+2)`: every edge points the same way.
    AllMergesOneDirection,
    /// `k > 2`, `|z| > √(k+2)`: one merge points away from the region.
    OneOutwardMerge,
    /// `k ≤ 2`, `|z| > 2`: the negative vertex is a sink or a merge
    /// depending on `|z|` versus `|-y_m y_{m+1} - z|`.
    SinkOrMergeByComparison,
}

impl<T: Scalar> Vertex<T> {
    pub fn region(&self, slot: Color) -> RegionLabel<T> {
        let fraction = self.fractions[slot.index()].clone();
        RegionLabel {
            parity: fraction.parity(),
            fraction,
            trace: self.character.coord(slot).clone(),
        }
    }

    pub fn regions(&self) -> [RegionLabel<T>; 3] {
        [self.region(Color::One), self.region(Color::Two), self.region(Color::Three)]
    }
}

/// The vertex `(X, Y, Z) ↦ ([1:0], [0:1], [1:1])` carrying `c`.
pub fn base_vertex<T: Scalar>(c: &ImaginaryCharacter<T>) -> Vertex<T> {
    Vertex {
        character: c.clone(),
        fractions: base_fractions(),
        address: MoveWord::new(),
    }
}

/// Value of the coordinate of color `color` after the Vieta flip.
pub fn flipped_value<T: Scalar>(c: &ImaginaryCharacter<T>, color: Color) -> T {
    apply(c, color.vieta()).coord(color).clone()
}

pub fn base_fractions() -> [Fraction; 3] {
    [
        Fraction::new(1, 0).unwrap(),
        Fraction::new(0, 1).unwrap(),
        Fraction::new(1, 1).unwrap(),
    ]
}

/// Farey reflection of the class in slot `color` across the other two.
pub fn flip_fractions(fractions: &[Fraction; 3], color: Color) -> [Fraction; 3] {
    let i = color.index();
    let [a, b] = color.others();
    let mut out = fractions.clone();
    out[i] = Fraction::flip(&fractions[a.index()], &fractions[b.index()], &fractions[i]);
    out
}

/// Region classes at the end of `word` started from the base vertex.
/// Sign-changes fix every class; the swap exchanges the X and Y slots.
pub fn replay_fractions(word: &MoveWord) -> [Fraction; 3] {
    let mut fr = base_fractions();
    for &g in word.generators() {
        if let Some(color) = g.color() {
            fr = flip_fractions(&fr, color);
        } else if g == Generator::P12 {
            fr.swap(0, 1);
        }
    }
    fr
}

pub fn step<T: Scalar>(v: &Vertex<T>, color: Color) -> Vertex<T> {
    let mut address = v.address.clone();
    address.push(color.vieta());
    Vertex {
        character: apply(&v.character, color.vieta()),
        fractions: flip_fractions(&v.fractions, color),
        address,
    }
}

/// Direction of the edge of color `color` at the character's vertex.
pub fn edge_info_character<T: Scalar>(c: &ImaginaryCharacter<T>, color: Color) -> DirectedEdgeInfo<T> {
    let old = c.coord(color);
    let new = flipped_value(c, color);
    let decisive = !old.abs_eq(&new);
    let direction = if decisive && new.abs() < old.abs() {
        EdgeDirection::AwayFromSelf
    } else {
        EdgeDirection::TowardSelf
    };
    DirectedEdgeInfo { color, decisive, direction, flipped_value: new }
}

pub fn edge_info<T: Scalar>(v: &Vertex<T>, color: Color) -> DirectedEdgeInfo<T> {
    edge_info_character(&v.character, color)
}

pub fn vertex_type_character<T: Scalar>(c: &ImaginaryCharacter<T>) -> VertexType {
    let inward = Color::ALL
        .iter()
        .filter(|&&color| !edge_info_character(c, color).is_outward())
        .count();
    VertexType::from_inward_count(inward)
}

pub fn vertex_type<T: Scalar>(v: &Vertex<T>) -> VertexType {
    vertex_type_character(&v.character)
}

pub fn fork_lemma_check<T: Scalar>(v: &Vertex<T>) -> Option<ForkViolation<T>> {
    let c = &v.character;
    let outward: Vec<Color> = Color::ALL
        .into_iter()
        .filter(|&color| edge_info_character(c, color).is_outward())
        .collect();
    for (i, &a) in outward.iter().enumerate() {
        for &b in &outward[i + 1..] {
            let third = Color::ALL.into_iter().find(|&t| t != a && t != b).unwrap();
            let t = c.coord(third).abs();
            let both_zero = c.coord(a).is_zero() && c.coord(b).is_zero();
            if t > two() && !t.approx_eq(&two()) && !both_zero {
                return Some(ForkViolation { outward: [a, b], third, third_trace: c.coord(third).clone() });
            }
        }
    }
    None
}

/// Descending move at a character: the decisive outward edge with the
/// largest decrease in absolute value, lowest color on ties.
pub fn descend_step_character<T: Scalar>(c: &ImaginaryCharacter<T>) -> Option<(Color, ImaginaryCharacter<T>)> {
    let mut best: Option<(Color, T)> = None;
    for color in Color::ALL {
        let e = edge_info_character(c, color);
        if !e.is_outward() {
            continue;
        }
        let decrease = c.coord(color).abs() - e.flipped_value.abs();
        if best.as_ref().is_none_or(|(_, d)| decrease > *d) {
            best = Some((color, decrease));
        }
    }
    best.map(|(color, _)| (color, apply(c, color.vieta())))
}

/// Traces of the regions abutting the region in `slot`, for indices in
/// `range`, computed by walking the alternating geodesic around it.
///
/// With `a < b` the other two slots, index 0 is the region in slot `a`
/// and index 1 the one in slot `b`; each further index is obtained by the
/// three-term edge relation. Around the real region (slot 3) this is
/// `y_{n+1} = z y_n - y_{n-1}` with `y_0 = x`, `y_1 = y`.
pub fn alternating_geodesic<T: Scalar>(
    v: &Vertex<T>,
    slot: Color,
    range: RangeInclusive<i64>,
) -> Vec<AbuttingTrace<T>> {
    let [a, b] = slot.others();
    let (lo, hi) = (*range.start(), *range.end());
    let mut forward = vec![
        AbuttingTrace { index: 0, slot: a, value: v.character.coord(a).clone() },
        AbuttingTrace { index: 1, slot: b, value: v.character.coord(b).clone() },
    ];
    let mut c = v.character.clone();
    for n in 2..=hi.max(1) {
        let flip = if n % 2 == 0 { a } else { b };
        c = apply(&c, flip.vieta());
        forward.push(AbuttingTrace { index: n, slot: flip, value: c.coord(flip).clone() });
    }
    let mut backward = Vec::new();
    let mut c = v.character.clone();
    for n in (lo.min(0)..0).rev() {
        // index -1 replaces slot b, -2 slot a, ...
        let flip = if n.rem_euclid(2) == 0 { a } else { b };
        c = apply(&c, flip.vieta());
        backward.push(AbuttingTrace { index: n, slot: flip, value: c.coord(flip).clone() });
    }
    backward.reverse();
    backward
        .into_iter()
        .chain(forward)
        .filter(|t| range.contains(&t.index))
        .collect()
}

/// `ab = (k + 2 - z²) / (z² - 4)`: product of the closed-form coefficients
/// of the imaginary traces around a real region of trace `z`.
pub fn ab_product<T: Scalar>(z: &T, k: &T) -> Result<T> {
    let z2 = z.clone() * z.clone();
    let denom = z2.clone() - crate::scalar::four();
    if z.abs().approx_eq(&two()) {
        return Err(Error::Domain(format!("ab_product undefined at z = {z:?}")));
    }
    Ok((k.clone() + two() - z2) / denom)
}

/// Closed-form coefficients `(a, b, λ)` with `y_n = a λⁿ + b λ⁻ⁿ`, for
/// `|z| > 2`; `λ` is the root of `λ² - zλ + 1` with `|λ| > 1`.
pub fn closed_form_coefficients(z: f64, x: f64, y: f64) -> Result<(f64, f64, f64)> {
    if z.abs().approx_eq(&2.0) || z.abs() < 2.0 {
        return Err(Error::Degenerate(format!("hyperbolic closed form needs |z| > 2, got {z}")));
    }
    let lambda = (z + z.signum() * (z * z - 4.0).sqrt()) / 2.0;
    let inv = 1.0 / lambda;
    let d = lambda - inv;
    Ok(((y - inv * x) / d, (lambda * x - y) / d, lambda))
}

/// `y_n` from the closed form. For `|z| > 2` this is `a λⁿ + b λ⁻ⁿ`; for
/// `|z| < 2`, `λ = e^{iθ}` with `2 cos θ = z` and the real form
/// `x cos nθ + (y - x cos θ) sin nθ / sin θ`.
pub fn closed_form_term(z: f64, x: f64, y: f64, n: i64) -> Result<f64> {
    if z.abs().approx_eq(&2.0) {
        return Err(Error::Degenerate(format!("closed form undefined at z = {z}; use the parabolic form")));
    }
    if z.abs() > 2.0 {
        let (a, b, lambda) = closed_form_coefficients(z, x, y)?;
        let n = n as i32;
        Ok(a * lambda.powi(n) + b * lambda.powi(-n))
    } else {
        let theta = (z / 2.0).acos();
        let nt = n as f64 * theta;
        Ok(x * nt.cos() + (y - x * theta.cos()) * nt.sin() / theta.sin())
    }
}

/// Parabolic forms: `y_n = x + n(y - x)` at `z = 2` and
/// `y_n = (-1)ⁿ (x - n(x + y))` at `z = -2`.
pub fn parabolic_term<T: Scalar>(z: &T, x: &T, y: &T, n: i64) -> Result<T> {
    let nn = T::from_i64(n);
    if z.approx_eq(&two()) {
        Ok(x.clone() + nn * (y.clone() - x.clone()))
    } else if z.approx_eq(&-two::<T>()) {
        let v = x.clone() - nn * (x.clone() + y.clone());
        Ok(if n.rem_euclid(2) == 0 { v } else { -v })
    } else {
        Err(Error::Degenerate(format!("parabolic form needs z = ±2, got {z:?}")))
    }
}

/// Least-squares fit of `y_n ≈ a λⁿ + b λ⁻ⁿ` to sampled traces with `λ`
/// fixed by `z`. Returns `(a, b, λ)`.
pub fn fit_closed_form(z: f64, samples: &[(i64, f64)]) -> Result<(f64, f64, f64)> {
    let (_, _, lambda) = closed_form_coefficients(z, 1.0, 1.0)?;
    if samples.len() < 2 {
        return Err(Error::Domain("need at least two samples to fit".into()));
    }
    // Modified Gram-Schmidt QR on the two basis columns.
    let u: Vec<f64> = samples.iter().map(|&(n, _)| lambda.powi(n as i32)).collect();
    let w: Vec<f64> = samples.iter().map(|&(n, _)| lambda.powi(-(n as i32))).collect();
    let rhs: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();
    let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
    let r11 = dot(&u, &u).sqrt();
    let q1: Vec<f64> = u.iter().map(|v| v / r11).collect();
    let r12 = dot(&q1, &w);
    let w_perp: Vec<f64> = w.iter().zip(&q1).map(|(wi, qi)| wi - r12 * qi).collect();
    let r22 = dot(&w_perp, &w_perp).sqrt();
    if r22 == 0.0 {
        return Err(Error::Degenerate("basis columns are dependent".into()));
    }
    let q2: Vec<f64> = w_perp.iter().map(|v| v / r22).collect();
    let c1 = dot(&q1, &rhs);
    let c2 = dot(&q2, &rhs);
    let b = c2 / r22;
    let a = (c1 - r12 * b) / r11;
    Ok((a, b, lambda))
}

/// Regime of the alternating geodesic around a real region of trace `z`
/// on the level `k`.
pub fn classify_real_region_geodesic(z: f64, k: f64) -> GeodesicRegime {
    let az = z.abs();
    if az.approx_eq(&2.0) {
        return GeodesicRegime::ParabolicBoundary;
    }
    if az < 2.0 {
        return GeodesicRegime::Elliptic;
    }
    if k <= 2.0 {
        return GeodesicRegime::SinkOrMergeByComparison;
    }
    let z2 = z * z;
    let threshold = k + 2.0;
    if z2.approx_eq(&threshold) {
        GeodesicRegime::AllMergesOneDirection
    } else if z2 < threshold {
        GeodesicRegime::SinkOnBoundary
    } else {
        GeodesicRegime::OneOutwardMerge
    }
}

/// The edge of color `color` is indecisive with the flipped value equal
/// to the old one (rather than its negative): the two generators have
/// orthogonal axes.
pub fn is_orthogonal_indecisive<T: Scalar>(v: &Vertex<T>, color: Color) -> bool {
    is_orthogonal_indecisive_character(&v.character, color)
}

pub fn is_orthogonal_indecisive_character<T: Scalar>(c: &ImaginaryCharacter<T>, color: Color) -> bool {
    flipped_value(c, color).approx_eq(c.coord(color))
}

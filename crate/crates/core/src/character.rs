//! Imaginary characters `(ix, iy, z)` and the action of Γ in real coordinates.
//!
//! A character is stored as the real triple `(x, y, z)`; the traces of the
//! basis elements are `ix`, `iy` and the trace of their product is `z`.
//! Γ is generated by the three Vieta involutions, the three sign-changes
//! and the coordinate swap:
//!
//! | generator | image of `(x, y, z)` |
//! |-----------|----------------------|
//! | `V1`      | `(yz - x, y, z)`     |
//! | `V2`      | `(x, xz - y, z)`     |
//! | `V3`      | `(x, y, -xy - z)`    |
//! | `S1`      | `(x, -y, -z)`        |
//! | `S2`      | `(-x, y, -z)`        |
//! | `S3`      | `(-x, -y, z)`        |
//! | `P12`     | `(y, x, z)`          |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{two, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImaginaryCharacter<T = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> ImaginaryCharacter<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// Fails when any coordinate is NaN or infinite.
    pub fn checked(x: T, y: T, z: T) -> Result<Self> {
        let c = Self::new(x, y, z);
        if c.is_finite() {
            Ok(c)
        } else {
            Err(Error::NonFinite(format!("{c:?}")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Coordinate by Vieta color (1 → x, 2 → y, 3 → z).
    pub fn coord(&self, color: Color) -> &T {
        match color {
            Color::One => &self.x,
            Color::Two => &self.y,
            Color::Three => &self.z,
        }
    }

    pub fn to_f64(&self) -> ImaginaryCharacter<f64> {
        ImaginaryCharacter::new(self.x.to_f64(), self.y.to_f64(), self.z.to_f64())
    }

    /// Writes the character as the CSV row `x,y,z`.
    pub fn to_csv_row(&self) -> String
    where
        T: fmt::Display,
    {
        format!("{},{},{}", self.x, self.y, self.z)
    }
}

impl ImaginaryCharacter<f64> {
    pub fn from_csv_row(row: &str) -> Result<Self> {
        let fields: Vec<&str> = row.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("expected 3 fields, got {}", fields.len())));
        }
        let mut v = [0.0; 3];
        for (slot, field) in v.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("{field:?}: {e}")))?;
        }
        Self::checked(v[0], v[1], v[2])
    }
}

impl<T: fmt::Display> fmt::Display for ImaginaryCharacter<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// One of the three Vieta colors of the tree of superbases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    One,
    Two,
    Three,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::One, Color::Two, Color::Three];

    pub fn index(self) -> usize {
        match self {
            Color::One => 0,
            Color::Two => 1,
            Color::Three => 2,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Color> {
        match n {
            1 => Some(Color::One),
            2 => Some(Color::Two),
            3 => Some(Color::Three),
            _ => None,
        }
    }

    pub fn vieta(self) -> Generator {
        match self {
            Color::One => Generator::V1,
            Color::Two => Generator::V2,
            Color::Three => Generator::V3,
        }
    }

    /// The two colors other than `self`, in increasing order.
    pub fn others(self) -> [Color; 2] {
        match self {
            Color::One => [Color::Two, Color::Three],
            Color::Two => [Color::One, Color::Three],
            Color::Three => [Color::One, Color::Two],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    V1,
    V2,
    V3,
    S1,
    S2,
    S3,
    P12,
}

impl Generator {
    pub const ALL: [Generator; 7] = [
        Generator::V1,
        Generator::V2,
        Generator::V3,
        Generator::S1,
        Generator::S2,
        Generator::S3,
        Generator::P12,
    ];

    pub fn is_vieta(self) -> bool {
        self.color().is_some()
    }

    pub fn color(self) -> Option<Color> {
        match self {
            Generator::V1 => Some(Color::One),
            Generator::V2 => Some(Color::Two),
            Generator::V3 => Some(Color::Three),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Generator::V1 => '1',
            Generator::V2 => '2',
            Generator::V3 => '3',
            Generator::S1 => 'a',
            Generator::S2 => 'b',
            Generator::S3 => 'c',
            Generator::P12 => 'p',
        }
    }

    pub fn from_symbol(c: char) -> Option<Generator> {
        Generator::ALL.into_iter().find(|g| g.symbol() == c)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A word over the generators, applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MoveWord(pub Vec<Generator>);

impl MoveWord {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, g: Generator) {
        self.0.push(g);
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    /// No two consecutive Vieta generators are equal.
    pub fn is_reduced(&self) -> bool {
        self.0
            .windows(2)
            .all(|w| !(w[0].is_vieta() && w[0] == w[1]))
    }

    /// Vieta colors of the word, skipping non-Vieta generators.
    pub fn colors(&self) -> impl Iterator<Item = Color> + '_ {
        self.0.iter().filter_map(|g| g.color())
    }
}

impl From<Vec<Generator>> for MoveWord {
    fn from(v: Vec<Generator>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MoveWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for MoveWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                Generator::from_symbol(c)
                    .ok_or_else(|| Error::Parse(format!("unknown generator symbol {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(MoveWord)
    }
}

impl Serialize for MoveWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MoveWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Boundary of a hyperbolic structure on the one-holed Klein bottle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BoundaryKind {
    Geodesic { length: f64 },
    Cusp,
    Cone { angle: f64 },
}

impl BoundaryKind {
    /// Classifies a boundary trace `δ < 2`; `None` for `δ ≥ 2`.
    ///
    /// Cone angles follow `δ = -2 cos(θ/2)`.
    pub fn from_delta<T: Scalar>(delta: &T) -> Option<BoundaryKind> {
        let minus_two = -two::<T>();
        if delta.approx_eq(&minus_two) {
            return Some(BoundaryKind::Cusp);
        }
        let d = delta.to_f64();
        if *delta < minus_two {
            Some(BoundaryKind::Geodesic { length: 2.0 * (-d / 2.0).acosh() })
        } else if *delta < two::<T>() {
            Some(BoundaryKind::Cone { angle: 2.0 * (-d / 2.0).acos() })
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExceptionalKind {
    Reducible,
    CoordinateZero,
    Dihedral,
}

/// `κ_Φ(x, y, z) = -x² - y² + z² + xyz - 2`, the commutator trace.
pub fn kappa<T: Scalar>(c: &ImaginaryCharacter<T>) -> T {
    let ImaginaryCharacter { x, y, z } = c;
    -(x.clone() * x.clone()) - y.clone() * y.clone()
        + z.clone() * z.clone()
        + x.clone() * y.clone() * z.clone()
        - two()
}

pub fn apply<T: Scalar>(c: &ImaginaryCharacter<T>, g: Generator) -> ImaginaryCharacter<T> {
    let ImaginaryCharacter { x, y, z } = c.clone();
    match g {
        Generator::V1 => {
            let nx = y.clone() * z.clone() - x;
            ImaginaryCharacter::new(nx, y, z)
        }
        Generator::V2 => {
            let ny = x.clone() * z.clone() - y;
            ImaginaryCharacter::new(x, ny, z)
        }
        Generator::V3 => {
            let nz = -(x.clone() * y.clone()) - z;
            ImaginaryCharacter::new(x, y, nz)
        }
        Generator::S1 => ImaginaryCharacter::new(x, -y, -z),
        Generator::S2 => ImaginaryCharacter::new(-x, y, -z),
        Generator::S3 => ImaginaryCharacter::new(-x, -y, z),
        Generator::P12 => ImaginaryCharacter::new(y, x, z),
    }
}

pub fn apply_word<T: Scalar>(c: &ImaginaryCharacter<T>, w: &MoveWord) -> ImaginaryCharacter<T> {
    w.0.iter().fold(c.clone(), |acc, &g| apply(&acc, g))
}

/// Boundary traces `(z, z')` of the three-holed-sphere-with-crosscap
/// picture, with `z' = -xy - z`.
pub fn boundary_traces_c02<T: Scalar>(c: &ImaginaryCharacter<T>) -> (T, T) {
    let zp = -(c.x.clone() * c.y.clone()) - c.z.clone();
    (c.z.clone(), zp)
}

/// Boundary trace `δ = x² - zxy + y² + 2` of the one-holed Klein bottle.
pub fn boundary_trace_c11<T: Scalar>(c: &ImaginaryCharacter<T>) -> T {
    crate::surface::q_z(&c.z, &c.x, &c.y) + two()
}

/// `z ≤ -2` and `xy + z ≥ 2`.
pub fn in_fricke_c02<T: Scalar>(c: &ImaginaryCharacter<T>) -> bool {
    let t = two::<T>();
    c.z <= -t.clone() && c.x.clone() * c.y.clone() + c.z.clone() >= t
}

/// Membership in the generalized Fricke space of the one-holed Klein bottle:
/// `|z| > 2` and `x² - zxy + y² < 0`, returning the boundary type.
pub fn in_generalized_fricke_c11<T: Scalar>(c: &ImaginaryCharacter<T>) -> Option<BoundaryKind> {
    let q = crate::surface::q_z(&c.z, &c.x, &c.y);
    if c.z.abs() > two() && q < T::zero() {
        BoundaryKind::from_delta(&(q + two()))
    } else {
        None
    }
}

pub fn exceptional_kind<T: Scalar>(c: &ImaginaryCharacter<T>) -> Option<ExceptionalKind> {
    match (c.x.is_zero(), c.y.is_zero()) {
        (true, true) => Some(ExceptionalKind::Dihedral),
        (true, false) | (false, true) => Some(ExceptionalKind::CoordinateZero),
        (false, false) if kappa(c).approx_eq(&two()) => Some(ExceptionalKind::Reducible),
        _ => None,
    }
}

/// The Nielsen move about `Z`: `(x, y, z) ↦ (xz - y, x, z)`, equal to `V2`
/// followed by `P12`.
pub fn nielsen_twist<T: Scalar>(c: &ImaginaryCharacter<T>) -> ImaginaryCharacter<T> {
    let nx = c.x.clone() * c.z.clone() - c.y.clone();
    ImaginaryCharacter::new(nx, c.x.clone(), c.z.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ch(x: f64, y: f64, z: f64) -> ImaginaryCharacter {
        ImaginaryCharacter::new(x, y, z)
    }

    fn q(x: i64, y: i64, z: i64) -> ImaginaryCharacter<BigRational> {
        ImaginaryCharacter::new(
            BigRational::from_i64(x),
            BigRational::from_i64(y),
            BigRational::from_i64(z),
        )
    }

    fn r(v: i64) -> BigRational {
        BigRational::from_i64(v)
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&q(0, 0, 0)), r(-2));
        assert_eq!(kappa(&q(1, 1, 3)), r(8));
        assert_eq!(kappa(&q(2, 2, -2)), r(-14));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(apply(&q(1, 1, 3), Generator::V3), q(1, 1, -4));
        assert_eq!(apply(&q(1, 1, 3), Generator::V1), q(2, 1, 3));
        assert_eq!(apply(&q(1, 1, 3), Generator::S2), q(-1, 1, -3));
    }

    #[test]
    fn apply_word_examples() {
        let c = q(1, 1, 3);
        assert_eq!(apply_word(&c, &MoveWord::new()), c);
        assert_eq!(apply_word(&c, &"33".parse().unwrap()), c);
        assert_eq!(apply_word(&c, &"13".parse().unwrap()), q(2, 1, -5));
    }

    #[test]
    fn word_strings() {
        let w: MoveWord = "123abcp".parse().unwrap();
        assert_eq!(w.to_string(), "123abcp");
        assert_eq!(w.len(), 7);
        assert!(w.is_reduced());
        assert!(!"1221".parse::<MoveWord>().unwrap().is_reduced());
        assert!("aa".parse::<MoveWord>().unwrap().is_reduced());
        assert!("12x".parse::<MoveWord>().is_err());
    }

    #[test]
    fn boundary_trace_examples() {
        assert_eq!(boundary_traces_c02(&q(3, 3, -2)), (r(-2), r(-7)));
        assert_eq!(boundary_traces_c02(&q(1, 1, 3)), (r(3), r(-4)));
        assert_eq!(boundary_traces_c02(&q(0, 0, 5)), (r(5), r(-5)));
        assert_eq!(boundary_trace_c11(&q(1, 1, 3)), r(1));
        assert_eq!(boundary_trace_c11(&q(2, 2, 4)), r(-6));
        assert_eq!(boundary_trace_c11(&q(0, 0, 7)), r(2));
    }

    #[test]
    fn fricke_c02_examples() {
        assert!(in_fricke_c02(&q(3, 3, -2)));
        assert!(!in_fricke_c02(&q(1, 1, -3)));
        assert!(in_fricke_c02(&q(2, 2, -2)));
    }

    #[test]
    fn generalized_fricke_c11_examples() {
        match in_generalized_fricke_c11(&ch(1.0, 1.0, 3.0)) {
            Some(BoundaryKind::Cone { angle }) => assert!((angle - 4.0 * PI / 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        match in_generalized_fricke_c11(&q(2, 2, 4)) {
            Some(BoundaryKind::Geodesic { length }) => {
                assert!((length - 2.0 * 3f64.acosh()).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(in_generalized_fricke_c11(&ch(1.0, 1.0, -3.0)), None);
        // δ = -2 exactly: x² - zxy + y² = -4
        assert_eq!(in_generalized_fricke_c11(&q(2, 2, 3)), Some(BoundaryKind::Cusp));
        // δ = 2 boundary is excluded
        assert_eq!(in_generalized_fricke_c11(&q(1, 1, 2)), None);
    }

    #[test]
    fn exceptional_examples() {
        assert_eq!(exceptional_kind(&q(0, 0, 3)), Some(ExceptionalKind::Dihedral));
        assert_eq!(exceptional_kind(&q(0, 2, 3)), Some(ExceptionalKind::CoordinateZero));
        assert_eq!(exceptional_kind(&q(1, 1, 3)), None);
        // κ = 2 on the parabolic line (x, x, 2)
        assert_eq!(exceptional_kind(&q(5, 5, 2)), Some(ExceptionalKind::Reducible));
    }

    #[test]
    fn nielsen_examples() {
        assert_eq!(nielsen_twist(&q(1, 1, 0)), q(-1, 1, 0));
        assert_eq!(nielsen_twist(&q(1, 1, 3)), q(2, 1, 3));
        assert_eq!(
            nielsen_twist(&q(1, 1, 3)),
            apply_word(&q(1, 1, 3), &"2p".parse().unwrap())
        );
        assert_eq!(nielsen_twist(&q(0, 0, 9)), q(0, 0, 9));
    }

    #[test]
    fn csv_round_trip() {
        let c = ch(1.5, -2.0, 3.25);
        assert_eq!(ImaginaryCharacter::from_csv_row(&c.to_csv_row()).unwrap(), c);
        assert!(ImaginaryCharacter::from_csv_row("1,2").is_err());
        assert!(ImaginaryCharacter::from_csv_row("1,nan,2").is_err());
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&ch(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(s, r#"{"x":1.0,"y":2.0,"z":3.0}"#);
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-60i64..60, 1i64..9).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    fn rational_character() -> impl Strategy<Value = ImaginaryCharacter<BigRational>> {
        (small_rational(), small_rational(), small_rational())
            .prop_map(|(x, y, z)| ImaginaryCharacter::new(x, y, z))
    }

    fn generator() -> impl Strategy<Value = Generator> {
        prop::sample::select(Generator::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn generators_preserve_kappa_and_are_involutions(c in rational_character(), g in generator()) {
            let image = apply(&c, g);
            prop_assert_eq!(kappa(&image), kappa(&c));
            prop_assert_eq!(apply(&image, g), c);
        }

        #[test]
        fn edge_relations(c in rational_character()) {
            let xy = c.x.clone() * c.y.clone();
            prop_assert_eq!(apply(&c, Generator::V3).z + c.z.clone(), -xy);
            prop_assert_eq!(apply(&c, Generator::V1).x + c.x.clone(), c.y.clone() * c.z.clone());
            prop_assert_eq!(apply(&c, Generator::V2).y + c.y.clone(), c.x.clone() * c.z.clone());
        }

        #[test]
        fn delta_identity(c in rational_character()) {
            prop_assert_eq!(boundary_trace_c11(&c), c.z.clone() * c.z.clone() - kappa(&c));
        }

        #[test]
        fn nielsen_preserves_kappa_and_z(c in rational_character()) {
            let t = nielsen_twist(&c);
            prop_assert_eq!(kappa(&t), kappa(&c));
            prop_assert_eq!(t.z, c.z);
        }

        #[test]
        fn dihedral_line_is_invariant(z in small_rational(), g in generator()) {
            let zero = BigRational::from_i64(0);
            let d = ImaginaryCharacter::new(zero.clone(), zero.clone(), z);
            let image = apply(&d, g);
            prop_assert!(image.x.is_zero() && image.y.is_zero());
            if matches!(g, Generator::V1 | Generator::V2 | Generator::S3) {
                prop_assert_eq!(image, d);
            }
        }

        #[test]
        fn fricke_c02_forces_kappa_at_most_minus_14(c in rational_character()) {
            if in_fricke_c02(&c) {
                prop_assert!(kappa(&c) <= BigRational::from_i64(-14));
            }
        }
    }
}

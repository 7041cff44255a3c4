//! Geometry of the level surfaces `κ_Φ = k`.
//!
//! Over each point `(x, y)` the level surface has the two candidate heights
//! `z± = (-xy ± √D) / 2` with `D = (x² + 4)(y² + 4) + 4(k - 2)`. For
//! `k > -2` these are the two sheets of the surface; `dA_k = dx∧dy / √D`
//! is the Γ-invariant area form on either sheet.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::character::ImaginaryCharacter;
use crate::error::{Error, Result};
use crate::scalar::{four, two, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SheetSelector {
    Plus,
    Minus,
}

impl SheetSelector {
    pub fn name(self) -> &'static str {
        match self {
            SheetSelector::Plus => "plus",
            SheetSelector::Minus => "minus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelTopology {
    TwoSheets,
    ConeSingular,
    Cylinder,
}

/// A rectangle of the xy-plane sampled on an `nx × ny` grid of cell centers.
///
/// Row 0 is the top row (`y` near `y_max`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("window bounds".into()));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::Domain(format!(
                "empty window [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::Domain("window resolution must be at least 1x1".into()));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn pixel_x(&self, col: usize) -> f64 {
        self.x_min + (col as f64 + 0.5) * self.dx()
    }

    pub fn pixel_y(&self, row: usize) -> f64 {
        self.y_max - (row as f64 + 0.5) * self.dy()
    }

    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        (self.pixel_x(col), self.pixel_y(row))
    }

    pub fn with_resolution(&self, nx: usize, ny: usize) -> Self {
        Self { nx, ny, ..*self }
    }

    pub fn doubled(&self) -> Self {
        self.with_resolution(self.nx * 2, self.ny * 2)
    }

    pub fn pixel_count(&self) -> usize {
        self.nx * self.ny
    }
}

/// `D = (x² + 4)(y² + 4) + 4(k - 2)`.
pub fn discriminant<T: Scalar>(k: &T, x: &T, y: &T) -> T {
    let f = four::<T>();
    (x.clone() * x.clone() + f.clone()) * (y.clone() * y.clone() + f.clone())
        + f * (k.clone() - two())
}

/// Height of the chosen sheet over `(x, y)`, or `None` when `D < 0`.
pub fn z_sheet(k: f64, x: f64, y: f64, s: SheetSelector) -> Option<f64> {
    let d = discriminant(&k, &x, &y);
    if d < 0.0 {
        return None;
    }
    let root = d.sqrt();
    let xy = x * y;
    Some(match s {
        SheetSelector::Plus => (-xy + root) / 2.0,
        SheetSelector::Minus => (-xy - root) / 2.0,
    })
}

/// The character on sheet `s` over `(x, y)`.
pub fn lift(k: f64, x: f64, y: f64, s: SheetSelector) -> Option<ImaginaryCharacter> {
    z_sheet(k, x, y, s).map(|z| ImaginaryCharacter::new(x, y, z))
}

pub fn projection_has_preimage<T: Scalar>(k: &T, x: &T, y: &T) -> bool {
    discriminant(k, x, y) >= T::zero()
}

/// `Q_z(x, y) = x² - zxy + y²`.
pub fn q_z<T: Scalar>(z: &T, x: &T, y: &T) -> T {
    x.clone() * x.clone() - z.clone() * x.clone() * y.clone() + y.clone() * y.clone()
}

/// Gradient of `κ_Φ`: `(-2x + yz, -2y + zx, 2z + xy)`.
pub fn grad_kappa<T: Scalar>(c: &ImaginaryCharacter<T>) -> (T, T, T) {
    let ImaginaryCharacter { x, y, z } = c.clone();
    let t = two::<T>();
    (
        -(t.clone() * x.clone()) + y.clone() * z.clone(),
        -(t.clone() * y.clone()) + z.clone() * x.clone(),
        t * z + x * y,
    )
}

pub fn level_topology(k: f64) -> LevelTopology {
    if k > -2.0 {
        LevelTopology::TwoSheets
    } else if k == -2.0 {
        LevelTopology::ConeSingular
    } else {
        LevelTopology::Cylinder
    }
}

/// Density `1/√D` of the invariant area form in the `(x, y)` chart.
pub fn area_density(k: f64, x: f64, y: f64) -> Result<f64> {
    let d = discriminant(&k, &x, &y);
    if d > 0.0 {
        Ok(1.0 / d.sqrt())
    } else {
        Err(Error::Domain(format!("discriminant {d} <= 0 at ({x}, {y}), k = {k}")))
    }
}

/// Midpoint quadrature of `dA_k` over the pixels of `window` whose lift to
/// sheet `s` satisfies `predicate`.
///
/// Rows are integrated in parallel; the row sums are combined by a fixed
/// pairwise reduction so the result does not depend on scheduling.
pub fn measure<P>(k: f64, s: SheetSelector, window: &Window, predicate: P) -> Result<f64>
where
    P: Fn(&ImaginaryCharacter) -> bool + Sync,
{
    let rows: Vec<f64> = (0..window.ny)
        .into_par_iter()
        .map(|row| {
            let y = window.pixel_y(row);
            let mut sum = 0.0;
            for col in 0..window.nx {
                let x = window.pixel_x(col);
                let density = area_density(k, x, y)?;
                let z = z_sheet(k, x, y, s).expect("positive discriminant has a lift");
                if predicate(&ImaginaryCharacter::new(x, y, z)) {
                    sum += density;
                }
            }
            Ok(sum)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&rows) * window.dx() * window.dy())
}

/// Quadrature value at the window's resolution plus the resolution-doubling
/// difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub value: f64,
    pub resolution: [usize; 2],
    pub error_estimate: f64,
}

pub fn measure_with_error<P>(k: f64, s: SheetSelector, window: &Window, predicate: P) -> Result<MeasureReport>
where
    P: Fn(&ImaginaryCharacter) -> bool + Sync,
{
    let coarse = measure(k, s, window, &predicate)?;
    let fine = measure(k, s, &window.doubled(), &predicate)?;
    Ok(MeasureReport {
        value: coarse,
        resolution: [window.nx, window.ny],
        error_estimate: (fine - coarse).abs(),
    })
}

pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Coefficients of `B_Φ` on `∂x∧∂y`, `∂y∧∂z`, `∂z∧∂x`:
/// `(2z + xy, -2x + yz, -2y + zx)`.
pub fn poisson_bivector<T: Scalar>(c: &ImaginaryCharacter<T>) -> (T, T, T) {
    let (gx, gy, gz) = grad_kappa(c);
    (gz, gx, gy)
}

/// Functions whose Hamiltonian fields are exposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFunction {
    X,
    Y,
    Z,
    /// `z' = -xy - z`, the trace across the `V3` edge.
    ZPrime,
}

/// Hamiltonian vector field `Ham(f)^i = B^{ij} ∂_j f` of a trace function.
///
/// With this convention `Ham(z) = (2y - xz, yz - 2x, 0)`.
pub fn ham_field<T: Scalar>(c: &ImaginaryCharacter<T>, which: TraceFunction) -> (T, T, T) {
    let (bxy, byz, bzx) = poisson_bivector(c);
    let (fx, fy, fz) = match which {
        TraceFunction::X => (T::one(), T::zero(), T::zero()),
        TraceFunction::Y => (T::zero(), T::one(), T::zero()),
        TraceFunction::Z => (T::zero(), T::zero(), T::one()),
        TraceFunction::ZPrime => (-c.y.clone(), -c.x.clone(), -T::one()),
    };
    (
        bxy.clone() * fy.clone() - bzx.clone() * fz.clone(),
        -(bxy * fx.clone()) + byz.clone() * fz,
        bzx * fx - byz * fy,
    )
}

/// Slopes `m± = (√(k+2) ± √(k-2)) / 2` of the lines bounding the basic
/// Fricke sectors in the plane `z = √(k+2)`.
pub fn slopes(k: f64) -> Result<(f64, f64)> {
    if !(k >= 2.0) {
        return Err(Error::Domain(format!("slopes need k >= 2, got {k}")));
    }
    let a = (k + 2.0).sqrt();
    let b = (k - 2.0).sqrt();
    Ok(((a + b) / 2.0, (a - b) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::kappa;

    fn ch(x: f64, y: f64, z: f64) -> ImaginaryCharacter {
        ImaginaryCharacter::new(x, y, z)
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&2.0, &0.0, &0.0), 16.0);
        assert_eq!(discriminant(&-14.0, &0.0, &0.0), -48.0);
        assert_eq!(discriminant(&8.0, &1.0, &1.0), 49.0);
    }

    #[test]
    fn z_sheet_examples() {
        for k in [-1.0, 2.0, 3.0, 8.0, 23.0] {
            let z = z_sheet(k, 0.0, 0.0, SheetSelector::Plus).unwrap();
            assert!((z - (k + 2.0f64).sqrt()).abs() < 1e-12);
        }
        assert_eq!(z_sheet(2.0, 0.0, 0.0, SheetSelector::Minus), Some(-2.0));
        assert_eq!(z_sheet(-14.0, 0.0, 0.0, SheetSelector::Plus), None);
        assert_eq!(z_sheet(8.0, 1.0, 1.0, SheetSelector::Plus), Some(3.0));
    }

    #[test]
    fn preimage_examples() {
        assert!(!projection_has_preimage(&-14.0, &0.0, &0.0));
        assert!(projection_has_preimage(&-14.0, &4.0, &4.0));
        for (x, y) in [(0.0, 0.0), (3.0, -1.0), (-100.0, 0.5)] {
            assert!(projection_has_preimage(&0.0, &x, &y));
        }
    }

    #[test]
    fn q_z_examples() {
        assert_eq!(q_z(&0.0, &1.0, &1.0), 2.0);
        assert_eq!(q_z(&3.0, &1.0, &1.0), -1.0);
        for t in [-3.0, 0.5, 7.0] {
            assert_eq!(q_z(&2.0, &t, &t), 0.0);
        }
    }

    #[test]
    fn q_z_positive_definite_inside_strip() {
        for z in [-1.9, -0.5, 0.0, 1.2, 1.99] {
            for (x, y) in [(1.0, 1.0), (-2.0, 3.0), (0.3, -0.1)] {
                assert!(q_z(&z, &x, &y) > 0.0);
            }
        }
    }

    #[test]
    fn grad_examples() {
        assert_eq!(grad_kappa(&ch(0.0, 0.0, 0.0)), (0.0, 0.0, 0.0));
        assert_eq!(grad_kappa(&ch(1.0, 1.0, 3.0)), (1.0, 1.0, 7.0));
        assert_eq!(grad_kappa(&ch(0.0, 0.0, 5.0)), (0.0, 0.0, 10.0));
    }

    #[test]
    fn topology_examples() {
        assert_eq!(level_topology(8.0), LevelTopology::TwoSheets);
        assert_eq!(level_topology(-2.0), LevelTopology::ConeSingular);
        assert_eq!(level_topology(-10.0), LevelTopology::Cylinder);
    }

    #[test]
    fn density_examples() {
        assert_eq!(area_density(2.0, 0.0, 0.0).unwrap(), 0.25);
        assert!((area_density(8.0, 1.0, 1.0).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!(area_density(-14.0, 0.0, 0.0).is_err());
        for k in [-1.5, 0.0, 8.0] {
            let bound = 1.0 / (4.0 * (k + 2.0f64)).sqrt();
            for (x, y) in [(0.0, 0.0), (1.0, -2.0), (5.0, 5.0)] {
                assert!(area_density(k, x, y).unwrap() <= bound + 1e-15);
            }
        }
        assert_eq!(area_density(3.0, 1.5, 2.0), area_density(3.0, -1.5, 2.0));
        assert_eq!(area_density(3.0, 1.5, 2.0), area_density(3.0, 1.5, -2.0));
    }

    #[test]
    fn measure_examples() {
        let w = Window::new(0.0, 1.0, 0.0, 1.0, 64, 64).unwrap();
        assert_eq!(measure(2.0, SheetSelector::Plus, &w, |_| false).unwrap(), 0.0);
        let all = measure(2.0, SheetSelector::Plus, &w, |_| true).unwrap();
        assert!(all > 0.0 && all <= 0.25);
        let left = measure(2.0, SheetSelector::Plus, &w, |c| c.x < 0.5).unwrap();
        let right = measure(2.0, SheetSelector::Plus, &w, |c| c.x >= 0.5).unwrap();
        assert!((left + right - all).abs() < 1e-14);
    }

    #[test]
    fn measure_rejects_void_pixels() {
        let w = Window::square(1.0, 8).unwrap();
        assert!(matches!(
            measure(-14.0, SheetSelector::Plus, &w, |_| true),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn measure_report_converges() {
        let w = Window::new(-1.0, 2.0, -0.5, 1.5, 128, 128).unwrap();
        let r = measure_with_error(8.0, SheetSelector::Plus, &w, |_| true).unwrap();
        assert!(r.error_estimate < 1e-5 * r.value);
    }

    #[test]
    fn bivector_examples() {
        assert_eq!(poisson_bivector(&ch(0.0, 0.0, 0.0)), (0.0, 0.0, 0.0));
        assert_eq!(poisson_bivector(&ch(1.0, 1.0, 3.0)), (7.0, 1.0, 1.0));
        let c = ch(0.7, -1.3, 2.2);
        let (gx, gy, gz) = grad_kappa(&c);
        assert_eq!(poisson_bivector(&c), (gz, gx, gy));
    }

    #[test]
    fn ham_examples() {
        assert_eq!(ham_field(&ch(0.0, 0.0, 4.0), TraceFunction::Z), (0.0, 0.0, 0.0));
        assert_eq!(ham_field(&ch(1.0, 1.0, 0.0), TraceFunction::Z), (2.0, -2.0, 0.0));
        let c = ch(1.5, 0.5, -2.5);
        let (_, _, hz) = ham_field(&c, TraceFunction::ZPrime);
        assert!((hz - 2.0 * (c.y * c.y - c.x * c.x)).abs() < 1e-12);
        // Ham(x), Ham(y) project to ∓(2z+xy)∂y, ±(2z+xy)∂x.
        let s = 2.0 * c.z + c.x * c.y;
        let hx = ham_field(&c, TraceFunction::X);
        let hy = ham_field(&c, TraceFunction::Y);
        assert_eq!((hx.0, hx.1), (0.0, -s));
        assert_eq!((hy.0, hy.1), (s, 0.0));
    }

    #[test]
    fn ham_fields_are_tangent() {
        let c = ch(1.25, -0.75, 3.5);
        let g = grad_kappa(&c);
        for f in [TraceFunction::X, TraceFunction::Y, TraceFunction::Z, TraceFunction::ZPrime] {
            let h = ham_field(&c, f);
            assert!((h.0 * g.0 + h.1 * g.1 + h.2 * g.2).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_examples() {
        assert_eq!(slopes(2.0).unwrap(), (1.0, 1.0));
        let (p, m) = slopes(8.0).unwrap();
        assert!((p - (10f64.sqrt() + 6f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((m - (10f64.sqrt() - 6f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((p * m - 1.0).abs() < 1e-12);
        assert!(slopes(1.0).is_err());
    }

    #[test]
    fn slope_lines_lie_on_level_set() {
        // (x, m x, √(k+2)) lies on κ = k
        let k = 8.0;
        let (p, m) = slopes(k).unwrap();
        for slope in [p, m] {
            let c = ch(0.8, 0.8 * slope, (k + 2.0f64).sqrt());
            assert!((kappa(&c) - k).abs() < 1e-12);
        }
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(1.0, 0.0, 0.0, 1.0, 4, 4).is_err());
        assert!(Window::new(0.0, 1.0, 0.0, 1.0, 0, 4).is_err());
        let w = Window::square(4.0, 8).unwrap();
        assert_eq!(w.pixel_center(0, 0), (-3.5, 3.5));
        assert_eq!(w.pixel_center(7, 7), (3.5, -3.5));
    }
}

//! Raster sweeps of the classification over a window of the xy-plane.
//!
//! Each pixel center `(x, y)` is lifted to the chosen sheet of `κ_Φ = k`
//! and classified. Rows are processed in parallel and written into
//! preallocated disjoint slices, so output never depends on the number of
//! threads.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::character::ImaginaryCharacter;
use crate::classify::{classify, Budget, Classification, EndEstimate};
use crate::error::{Error, Result};
use crate::surface::{measure_with_error, z_sheet, MeasureReport, SheetSelector, Window};
use crate::tree::replay_fractions;

/// Fixed 16-color palette shared by every coloring scheme.
pub const PALETTE: [[u8; 3]; 16] = [
    [0, 0, 0],       // void
    [46, 134, 193],  // generalized Fricke (one-holed Klein bottle)
    [39, 174, 96],   // Fricke (two-holed cross-surface)
    [142, 68, 173],  // attracting indecisive edge
    [231, 76, 60],   // elliptic primitive
    [241, 196, 15],  // exceptional
    [255, 255, 255], // undetermined
    [127, 127, 127], // non-finite lift
    [26, 188, 156],
    [52, 73, 94],
    [230, 126, 34],
    [149, 165, 166],
    [192, 57, 43],
    [22, 160, 133],
    [211, 84, 0],
    [155, 89, 182],
];

pub const VOID: u8 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coloring {
    ByVariant,
    ByEndEstimate,
    ByDepth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterJob {
    pub k: f64,
    pub sheet: SheetSelector,
    pub window: Window,
    pub budget: Budget,
    pub coloring: Coloring,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples.
    pub pixels: Vec<u8>,
}

/// Classification summary of one pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelRecord {
    pub x: f64,
    pub y: f64,
    /// `None` for pixels with no preimage on the sheet.
    pub z: Option<f64>,
    pub variant: Option<&'static str>,
    pub fricke: bool,
    pub depth: usize,
    pub color: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub image: Image,
    pub records: Vec<PixelRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sidecar {
    pub k: f64,
    pub sheet: SheetSelector,
    pub window: Window,
    pub resolution: [usize; 2],
    pub budget: Budget,
    pub coloring: Coloring,
    pub palette: Vec<[u8; 3]>,
    pub stats: BTreeMap<String, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub bowditch_fraction: f64,
    pub max_gap_pixels: usize,
}

/// Which classifications a measure counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantFilter {
    /// Any attractor: both Fricke variants and attracting indecisive edges.
    Fricke,
    GeneralizedFrickeC11,
    FrickeC02,
    AttractingIndecisiveEdge,
    EllipticPrimitive,
    Exceptional,
    Undetermined,
}

impl VariantFilter {
    pub fn matches<T>(self, c: &Classification<T>) -> bool {
        match self {
            VariantFilter::Fricke => c.is_fricke(),
            VariantFilter::GeneralizedFrickeC11 => matches!(c, Classification::GeneralizedFrickeC11 { .. }),
            VariantFilter::FrickeC02 => matches!(c, Classification::FrickeC02 { .. }),
            VariantFilter::AttractingIndecisiveEdge => matches!(c, Classification::AttractingIndecisiveEdge { .. }),
            VariantFilter::EllipticPrimitive => matches!(c, Classification::EllipticPrimitive { .. }),
            VariantFilter::Exceptional => matches!(c, Classification::Exceptional { .. }),
            VariantFilter::Undetermined => matches!(c, Classification::Undetermined { .. }),
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn hashed_color(key: &str) -> u8 {
    1 + (fnv1a(key.as_bytes()) % 15) as u8
}

fn variant_color(c: &Classification) -> u8 {
    match c {
        Classification::GeneralizedFrickeC11 { .. } => 1,
        Classification::FrickeC02 { .. } => 2,
        Classification::AttractingIndecisiveEdge { .. } => 3,
        Classification::EllipticPrimitive { .. } => 4,
        Classification::Exceptional { .. } => 5,
        Classification::Undetermined { .. } => 6,
    }
}

fn end_color(c: &Classification) -> u8 {
    let key = match c {
        Classification::EllipticPrimitive { region_fraction, .. } => format!("e{region_fraction}"),
        Classification::Undetermined { end_estimate: Some(EndEstimate::Region(f)), .. } => format!("u{f}"),
        Classification::Undetermined { end_estimate: Some(EndEstimate::Prefix(p)), .. } => {
            let terms: Vec<String> = p.iter().map(|t| t.to_string()).collect();
            format!("p{}", terms.join(","))
        }
        Classification::Exceptional { .. } | Classification::Undetermined { end_estimate: None, .. } => {
            return variant_color(c)
        }
        _ => {
            // the real region at the attractor indexes the component
            let word = c.word().expect("attractors carry a word");
            format!("f{}", replay_fractions(word)[2])
        }
    };
    hashed_color(&key)
}

fn depth_color(depth: usize) -> u8 {
    let bucket = (usize::BITS - (depth + 1).leading_zeros() - 1) as u8;
    1 + bucket.min(14)
}

fn pixel(job: &RasterJob, col: usize, row: usize) -> PixelRecord {
    let (x, y) = job.window.pixel_center(col, row);
    let Some(z) = z_sheet(job.k, x, y, job.sheet) else {
        return PixelRecord { x, y, z: None, variant: None, fricke: false, depth: 0, color: VOID };
    };
    match classify(&ImaginaryCharacter::new(x, y, z), &job.budget) {
        Ok(c) => {
            let color = match job.coloring {
                Coloring::ByVariant => variant_color(&c),
                Coloring::ByEndEstimate => end_color(&c),
                Coloring::ByDepth => depth_color(c.depth()),
            };
            PixelRecord {
                x,
                y,
                z: Some(z),
                variant: Some(c.variant_name()),
                fricke: c.is_fricke(),
                depth: c.depth(),
                color,
            }
        }
        Err(_) => PixelRecord { x, y, z: Some(z), variant: None, fricke: false, depth: 0, color: 7 },
    }
}

fn sweep(job: &RasterJob) -> Rendered {
    let (w, h) = (job.window.nx, job.window.ny);
    let mut pixels = vec![0u8; w * h * 3];
    let mut records: Vec<Option<PixelRecord>> = vec![None; w * h];
    pixels
        .par_chunks_mut(w * 3)
        .zip(records.par_chunks_mut(w))
        .enumerate()
        .for_each(|(row, (rgb, recs))| {
            for col in 0..w {
                let r = pixel(job, col, row);
                rgb[col * 3..col * 3 + 3].copy_from_slice(&PALETTE[r.color as usize]);
                recs[col] = Some(r);
            }
        });
    Rendered {
        image: Image { width: w, height: h, pixels },
        records: records.into_iter().map(|r| r.expect("every pixel is visited")).collect(),
    }
}

/// Classifies every pixel of the job; `threads = None` uses the global pool.
pub fn render_full(job: &RasterJob, threads: Option<usize>) -> Result<Rendered> {
    match threads {
        None => Ok(sweep(job)),
        Some(0) => Err(Error::Domain("thread count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
            Ok(pool.install(|| sweep(job)))
        }
    }
}

pub fn render(job: &RasterJob) -> Image {
    sweep(job).image
}

pub fn render_with_threads(job: &RasterJob, threads: usize) -> Result<Image> {
    Ok(render_full(job, Some(threads))?.image)
}

impl Image {
    /// Binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.to_ppm())
    }

    pub fn rgb(&self, col: usize, row: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

pub fn stats(records: &[PixelRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records {
        *out.entry(r.variant.unwrap_or(if r.z.is_none() { "Void" } else { "NonFinite" }).to_string())
            .or_insert(0) += 1;
    }
    out
}

pub fn sidecar(job: &RasterJob, records: &[PixelRecord]) -> Sidecar {
    Sidecar {
        k: job.k,
        sheet: job.sheet,
        window: job.window,
        resolution: [job.window.nx, job.window.ny],
        budget: job.budget,
        coloring: job.coloring,
        palette: PALETTE.to_vec(),
        stats: stats(records),
    }
}

/// CSV grid dump with header `x,y,z,variant,depth`; void pixels leave `z`
/// empty and report the variant `Void`.
pub fn write_csv<W: Write>(records: &[PixelRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "x,y,z,variant,depth")?;
    for r in records {
        let z = r.z.map(|z| format!("{z:.17e}")).unwrap_or_default();
        let variant = r.variant.unwrap_or(if r.z.is_none() { "Void" } else { "NonFinite" });
        writeln!(w, "{:.17e},{:.17e},{},{},{}", r.x, r.y, z, variant, r.depth)?;
    }
    Ok(())
}

/// Chessboard distance from every cell to the nearest marked cell, by the
/// two-pass chamfer transform with unit weights.
pub fn chebyshev_distance(marked: &[bool], width: usize, height: usize) -> Vec<usize> {
    const FAR: usize = usize::MAX / 2;
    let mut d: Vec<usize> = marked.iter().map(|&m| if m { 0 } else { FAR }).collect();
    let at = |r: usize, c: usize| r * width + c;
    for r in 0..height {
        for c in 0..width {
            let mut best = d[at(r, c)];
            if r > 0 {
                best = best.min(d[at(r - 1, c)] + 1);
                if c > 0 {
                    best = best.min(d[at(r - 1, c - 1)] + 1);
                }
                if c + 1 < width {
                    best = best.min(d[at(r - 1, c + 1)] + 1);
                }
            }
            if c > 0 {
                best = best.min(d[at(r, c - 1)] + 1);
            }
            d[at(r, c)] = best;
        }
    }
    for r in (0..height).rev() {
        for c in (0..width).rev() {
            let mut best = d[at(r, c)];
            if r + 1 < height {
                best = best.min(d[at(r + 1, c)] + 1);
                if c > 0 {
                    best = best.min(d[at(r + 1, c - 1)] + 1);
                }
                if c + 1 < width {
                    best = best.min(d[at(r + 1, c + 1)] + 1);
                }
            }
            if c + 1 < width {
                best = best.min(d[at(r, c + 1)] + 1);
            }
            d[at(r, c)] = best;
        }
    }
    d
}

/// Fraction of attractor pixels among non-void ones, and the largest
/// chessboard distance from a non-attractor pixel to an attractor pixel.
pub fn density_scan(job: &RasterJob) -> Result<DensityReport> {
    density_from_records(job, &render_full(job, None)?.records)
}

pub fn density_from_records(job: &RasterJob, records: &[PixelRecord]) -> Result<DensityReport> {
    if !(job.k > 2.0) {
        return Err(Error::Domain(format!("density scan needs k > 2, got {}", job.k)));
    }
    let live = records.iter().filter(|r| r.z.is_some()).count();
    if live == 0 {
        return Err(Error::Domain("every pixel of the window is void".into()));
    }
    let marked: Vec<bool> = records.iter().map(|r| r.fricke).collect();
    let fricke = marked.iter().filter(|&&m| m).count();
    if fricke == 0 {
        return Err(Error::Domain("no attractor pixel in the window".into()));
    }
    let d = chebyshev_distance(&marked, job.window.nx, job.window.ny);
    let max_gap_pixels = records
        .iter()
        .zip(&d)
        .filter(|(r, _)| r.z.is_some() && !r.fricke)
        .map(|(_, &d)| d)
        .max()
        .unwrap_or(0);
    Ok(DensityReport { bowditch_fraction: fricke as f64 / live as f64, max_gap_pixels })
}

/// Rational parametrization of the `k = 2` level on the negative sheet:
/// `(2 sinh(a/2), 2 sinh(b/2), -2 cosh((a+b)/2))`.
pub fn psi(a: f64, b: f64) -> ImaginaryCharacter {
    ImaginaryCharacter::new(2.0 * (a / 2.0).sinh(), 2.0 * (b / 2.0).sinh(), -2.0 * ((a + b) / 2.0).cosh())
}

/// Invariant area of the pixels whose classification passes `filter`,
/// with the resolution-doubling error estimate.
pub fn measure_region(
    k: f64,
    sheet: SheetSelector,
    window: &Window,
    filter: VariantFilter,
    budget: &Budget,
) -> Result<MeasureReport> {
    measure_with_error(k, sheet, window, |c| classify(c, budget).is_ok_and(|r| filter.matches(&r)))
}

//! Deterministic tiled rendering of parameter and dynamical planes, with
//! escape-time and period colourings, overlays and PPM/PNG output.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{cycle_multiplier, MapParams};
use crate::parabolic::ArcSample;
use crate::rays::RayPath;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid viewport: {0}")]
    InvalidViewport(String),
    #[error("invalid render configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("png encoding: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("png decoding: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("malformed image data: {0}")]
    Malformed(String),
}

/// A rectangular window with square pixels. `rotation` turns the frame by
/// `ω^rotation`, `ω = e^{2πi/(d+1)}`; rendering happens in the unrotated
/// frame, so images of ω-rotated viewports agree pixel for pixel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub center: Complex64,
    pub width: f64,
    pub pixels_x: usize,
    pub pixels_y: usize,
    #[serde(default)]
    pub rotation: u32,
}

impl Viewport {
    pub fn new(center: Complex64, width: f64, pixels_x: usize, pixels_y: usize) -> Result<Self, RenderError> {
        let vp = Self {
            center,
            width,
            pixels_x,
            pixels_y,
            rotation: 0,
        };
        vp.validate()?;
        Ok(vp)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(RenderError::InvalidViewport("width must be positive".into()));
        }
        if self.pixels_x == 0 || self.pixels_y == 0 {
            return Err(RenderError::InvalidViewport("pixel dimensions must be positive".into()));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(RenderError::InvalidViewport("centre must be finite".into()));
        }
        Ok(())
    }

    pub fn pixel_size(&self) -> f64 {
        self.width / self.pixels_x as f64
    }

    pub fn height(&self) -> f64 {
        self.pixel_size() * self.pixels_y as f64
    }

    /// Centre of pixel `(i, j)` in the unrotated frame; row 0 is at the top.
    pub fn local_point(&self, i: usize, j: usize) -> Complex64 {
        let h = self.pixel_size();
        let x = (i as f64 + 0.5 - self.pixels_x as f64 / 2.0) * h;
        let y = (j as f64 + 0.5 - self.pixels_y as f64 / 2.0) * h;
        Complex64::new(self.center.re + x, self.center.im - y)
    }

    /// Centre of pixel `(i, j)` in the plane, for maps of degree `d`.
    pub fn pixel_to_point(&self, i: usize, j: usize, d: u32) -> Complex64 {
        rotation_factor(d, self.rotation as i64) * self.local_point(i, j)
    }

    /// Continuous pixel coordinates of a point (inverse of
    /// [`Viewport::pixel_to_point`]).
    pub fn point_to_pixel(&self, z: Complex64, d: u32) -> (f64, f64) {
        let u = rotation_factor(d, -(self.rotation as i64)) * z;
        let h = self.pixel_size();
        let x = (u.re - self.center.re) / h + self.pixels_x as f64 / 2.0 - 0.5;
        let y = (self.center.im - u.im) / h + self.pixels_y as f64 / 2.0 - 0.5;
        (x, y)
    }
}

/// `ω^k` with `ω = e^{2πi/(d+1)}`.
pub fn rotation_factor(d: u32, k: i64) -> Complex64 {
    let n = d as i64 + 1;
    let k = k.rem_euclid(n);
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coloring {
    Escape,
    Period,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub max_iterations: u32,
    pub coloring: Coloring,
    pub tile_size: usize,
    /// Bailout radius; large so that the smooth potential is accurate.
    pub escape_radius: f64,
    /// Closing tolerance of the tail cycle search, relative to `max(1, |z|)`.
    pub period_tolerance: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            coloring: Coloring::Escape,
            tile_size: 64,
            escape_radius: 1e6,
            period_tolerance: 1e-9,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.max_iterations == 0 || self.tile_size == 0 {
            return Err(RenderError::InvalidConfig("iterations and tile size must be positive".into()));
        }
        if !(self.escape_radius > 2.0) {
            return Err(RenderError::InvalidConfig("escape radius must exceed 2".into()));
        }
        if !(self.period_tolerance > 0.0) {
            return Err(RenderError::InvalidConfig("period tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Classification of one pixel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelRecord {
    /// Iteration at which the orbit left the bailout disc; `None` inside.
    pub escape_iterations: Option<u32>,
    /// Period of the attracting cycle the orbit settles on, when confirmed.
    pub period: Option<u32>,
    /// Green's function `ln|z_n| / d^n`; zero inside.
    pub smooth_potential: f64,
    /// Fractional escape count `n + 1 − log_d(ln|z_n| / ln R)`.
    pub smooth_iterations: f64,
}

impl PixelRecord {
    pub fn interior(&self) -> bool {
        self.escape_iterations.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "plane")]
pub enum Plane {
    Parameter { degree: u32 },
    Dynamical { degree: u32, c: Complex64 },
}

impl Plane {
    pub fn degree(&self) -> u32 {
        match self {
            Plane::Parameter { degree } | Plane::Dynamical { degree, .. } => *degree,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterGrid {
    pub plane: Plane,
    pub viewport: Viewport,
    pub config: RenderConfig,
    /// Row-major, `pixels_x · pixels_y` records.
    pub pixels: Vec<PixelRecord>,
}

impl RasterGrid {
    pub fn get(&self, i: usize, j: usize) -> &PixelRecord {
        &self.pixels[j * self.viewport.pixels_x + i]
    }
}

/// Iterates `z` under `f_c` and classifies the orbit.
fn classify_orbit(params: &MapParams, z0: Complex64, cfg: &RenderConfig) -> PixelRecord {
    let d = params.degree as f64;
    let r2 = cfg.escape_radius * cfg.escape_radius;
    let mut z = z0;
    for n in 0..cfg.max_iterations {
        let m = z.norm_sqr();
        if m > r2 || !m.is_finite() {
            let ln_abs = 0.5 * m.ln();
            let potential = if m.is_finite() { ln_abs / d.powi(n as i32) } else { 0.0 };
            let smooth = n as f64 + 1.0 - (ln_abs / cfg.escape_radius.ln()).ln() / d.ln();
            return PixelRecord {
                escape_iterations: Some(n),
                period: None,
                smooth_potential: potential,
                smooth_iterations: smooth,
            };
        }
        z = params.step(z);
    }
    let period = match cfg.coloring {
        Coloring::Period => detect_period(params, z, cfg),
        Coloring::Escape => None,
    };
    PixelRecord {
        escape_iterations: None,
        period,
        smooth_potential: 0.0,
        smooth_iterations: f64::from(cfg.max_iterations),
    }
}

/// Tail cycle search from a point that has already iterated for a while:
/// a return to within tolerance, confirmed by an attracting multiplier.
fn detect_period(params: &MapParams, z_ref: Complex64, cfg: &RenderConfig) -> Option<u32> {
    let tol = cfg.period_tolerance * z_ref.norm().max(1.0);
    let mut z = z_ref;
    // Let the orbit settle further before looking for the return.
    for _ in 0..cfg.max_iterations {
        z = params.step(z);
    }
    let start = z;
    let mut orbit = vec![start];
    for p in 1..=cfg.max_iterations {
        z = params.step(z);
        if (z - start).norm() <= tol {
            let (_, rho) = cycle_multiplier(params, &orbit).ok()?;
            return (rho.norm() < 1.0).then_some(p);
        }
        orbit.push(z);
    }
    None
}

/// Renders `rows × cols` pixels tile by tile. Each pixel depends only on its
/// own coordinates, so the result does not depend on the number of workers.
fn render_tiles<F>(vp: &Viewport, cfg: &RenderConfig, pixel: F) -> Vec<PixelRecord>
where
    F: Fn(usize, usize) -> PixelRecord + Sync,
{
    let t = cfg.tile_size;
    let tiles_x = vp.pixels_x.div_ceil(t);
    let tiles_y = vp.pixels_y.div_ceil(t);
    let tiles: Vec<(usize, usize, Vec<PixelRecord>)> = (0..tiles_x * tiles_y)
        .into_par_iter()
        .map(|k| {
            let (tx, ty) = (k % tiles_x, k / tiles_x);
            let (x0, y0) = (tx * t, ty * t);
            let (x1, y1) = ((x0 + t).min(vp.pixels_x), (y0 + t).min(vp.pixels_y));
            let mut out = Vec::with_capacity((x1 - x0) * (y1 - y0));
            for j in y0..y1 {
                for i in x0..x1 {
                    out.push(pixel(i, j));
                }
            }
            (x0, y0, out)
        })
        .collect();
    let mut pixels = vec![
        PixelRecord {
            escape_iterations: None,
            period: None,
            smooth_potential: 0.0,
            smooth_iterations: 0.0,
        };
        vp.pixels_x * vp.pixels_y
    ];
    for (x0, y0, tile) in tiles {
        let w = (x0 + t).min(vp.pixels_x) - x0;
        for (r, row) in tile.chunks(w).enumerate() {
            let start = (y0 + r) * vp.pixels_x + x0;
            pixels[start..start + w].copy_from_slice(row);
        }
    }
    pixels
}

/// Classifies a single parameter by direct iteration of its critical orbit,
/// independently of any viewport.
pub fn classify_parameter(d: u32, c: Complex64, cfg: &RenderConfig) -> PixelRecord {
    classify_orbit(&MapParams { degree: d, c }, Complex64::new(0.0, 0.0), cfg)
}

/// Parameter plane of `z̄^d + c`: the critical orbit of each pixel.
pub fn render_parameter_plane(d: u32, vp: &Viewport, cfg: &RenderConfig) -> Result<RasterGrid, RenderError> {
    vp.validate()?;
    cfg.validate()?;
    if d < 2 {
        return Err(RenderError::InvalidConfig("degree must be at least 2".into()));
    }
    // f_{ω^k u} is conjugate to f_u by z ↦ ω^k z, so the unrotated
    // parameter classifies the pixel.
    let pixels = render_tiles(vp, cfg, |i, j| {
        let u = vp.local_point(i, j);
        classify_orbit(&MapParams { degree: d, c: u }, Complex64::new(0.0, 0.0), cfg)
    });
    Ok(RasterGrid {
        plane: Plane::Parameter { degree: d },
        viewport: *vp,
        config: *cfg,
        pixels,
    })
}

/// Dynamical plane of `f_c`: the orbit of each pixel.
pub fn render_dynamical_plane(params: &MapParams, vp: &Viewport, cfg: &RenderConfig) -> Result<RasterGrid, RenderError> {
    vp.validate()?;
    cfg.validate()?;
    if params.degree < 2 {
        return Err(RenderError::InvalidConfig("degree must be at least 2".into()));
    }
    // The ω^k-rotated view of f_c is the unrotated view of f_{ω^{-k} c}.
    let local = MapParams {
        degree: params.degree,
        c: rotation_factor(params.degree, -(vp.rotation as i64)) * params.c,
    };
    let pixels = render_tiles(vp, cfg, |i, j| classify_orbit(&local, vp.local_point(i, j), cfg));
    Ok(RasterGrid {
        plane: Plane::Dynamical {
            degree: params.degree,
            c: params.c,
        },
        viewport: *vp,
        config: *cfg,
        pixels,
    })
}

/// 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height * 3],
        }
    }

    pub fn pixel(&self, i: usize, j: usize) -> [u8; 3] {
        let k = 3 * (j * self.width + i);
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    pub fn put(&mut self, i: usize, j: usize, rgb: [u8; 3]) {
        let k = 3 * (j * self.width + i);
        self.data[k..k + 3].copy_from_slice(&rgb);
    }
}

const PERIOD_PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
];

fn channel(x: f64) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn escape_color(nu: f64) -> [u8; 3] {
    let t = (nu.max(0.0) + 1.0).ln() / 3.0;
    let f = |phase: f64| channel(0.5 + 0.5 * (std::f64::consts::TAU * (t + phase)).cos());
    [f(0.0), f(0.1), f(0.2)]
}

/// Maps classifications to colours: escape bands outside; black inside,
/// or one colour per period when period colouring was requested.
pub fn colorize(grid: &RasterGrid) -> RgbImage {
    let vp = &grid.viewport;
    let mut img = RgbImage::new(vp.pixels_x, vp.pixels_y);
    for j in 0..vp.pixels_y {
        for i in 0..vp.pixels_x {
            let p = grid.get(i, j);
            let rgb = match (p.escape_iterations, p.period, grid.config.coloring) {
                (Some(_), _, Coloring::Escape) => escape_color(p.smooth_iterations),
                (Some(_), _, Coloring::Period) => {
                    let g = channel(0.25 + 0.5 * (1.0 - (-p.smooth_iterations / 40.0).exp()));
                    [g, g, g]
                }
                (None, Some(k), Coloring::Period) => PERIOD_PALETTE[(k as usize - 1) % PERIOD_PALETTE.len()],
                (None, _, _) => [0, 0, 0],
            };
            img.put(i, j, rgb);
        }
    }
    img
}

/// Curves and markers drawn over a rendered plane, in plane coordinates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlayLayers {
    #[serde(default)]
    pub rays: Vec<RayPath>,
    #[serde(default)]
    pub arcs: Vec<ArcSample>,
    #[serde(default)]
    pub points: Vec<Complex64>,
    /// Free polylines, e.g. closed-form boundary curves.
    #[serde(default)]
    pub curves: Vec<Vec<Complex64>>,
}

impl OverlayLayers {
    pub fn is_empty(&self) -> bool {
        self.rays.is_empty() && self.arcs.is_empty() && self.points.is_empty() && self.curves.is_empty()
    }
}

const RAY_COLOR: [u8; 3] = [255, 255, 255];
const ARC_COLOR: [u8; 3] = [255, 64, 64];
const POINT_COLOR: [u8; 3] = [64, 255, 64];
const CURVE_COLOR: [u8; 3] = [255, 200, 0];

fn plot(img: &mut RgbImage, x: i64, y: i64, rgb: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as usize) < img.width && (y as usize) < img.height {
        img.put(x as usize, y as usize, rgb);
    }
}

/// Bresenham segment between pixel positions; segments entirely outside the
/// image or absurdly long are skipped.
fn draw_segment(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), rgb: [u8; 3]) {
    let (w, h) = (img.width as f64, img.height as f64);
    let outside = |p: (f64, f64), q: (f64, f64)| {
        (p.0 < 0.0 && q.0 < 0.0) || (p.1 < 0.0 && q.1 < 0.0) || (p.0 >= w && q.0 >= w) || (p.1 >= h && q.1 >= h)
    };
    if !(a.0.is_finite() && a.1.is_finite() && b.0.is_finite() && b.1.is_finite()) || outside(a, b) {
        return;
    }
    let limit = 4.0 * (w + h);
    if (a.0 - b.0).abs() > limit || (a.1 - b.1).abs() > limit {
        return;
    }
    let (mut x0, mut y0) = (a.0.round() as i64, a.1.round() as i64);
    let (x1, y1) = (b.0.round() as i64, b.1.round() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        plot(img, x0, y0, rgb);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

fn draw_marker(img: &mut RgbImage, p: (f64, f64), rgb: [u8; 3]) {
    if !(p.0.is_finite() && p.1.is_finite()) {
        return;
    }
    let (x, y) = (p.0.round() as i64, p.1.round() as i64);
    for k in -2..=2 {
        plot(img, x + k, y, rgb);
        plot(img, x, y + k, rgb);
    }
}

/// Composites the layers onto a copy of `base`, whose pixels correspond to
/// `vp` for maps of degree `d`.
pub fn overlay(base: &RgbImage, vp: &Viewport, d: u32, layers: &OverlayLayers) -> RgbImage {
    let mut img = base.clone();
    let to_px = |z: Complex64| vp.point_to_pixel(z, d);
    for ray in &layers.rays {
        for w in ray.points.windows(2) {
            draw_segment(&mut img, to_px(w[0]), to_px(w[1]), RAY_COLOR);
        }
    }
    let mut arcs: Vec<&ArcSample> = layers.arcs.iter().collect();
    arcs.sort_by(|a, b| a.arc_id.cmp(&b.arc_id).then(a.boundary_angle.total_cmp(&b.boundary_angle)));
    for w in arcs.windows(2) {
        if w[0].arc_id == w[1].arc_id {
            draw_segment(&mut img, to_px(w[0].c), to_px(w[1].c), ARC_COLOR);
        }
    }
    for a in &arcs {
        let p = to_px(a.c);
        plot(&mut img, p.0.round() as i64, p.1.round() as i64, ARC_COLOR);
    }
    for curve in &layers.curves {
        for w in curve.windows(2) {
            draw_segment(&mut img, to_px(w[0]), to_px(w[1]), CURVE_COLOR);
        }
    }
    for z in &layers.points {
        draw_marker(&mut img, to_px(*z), POINT_COLOR);
    }
    img
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "ppm" => Some(ImageFormat::Ppm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

/// Binary PPM (P6).
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, RenderError> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(RenderError::Malformed("truncated PPM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(RenderError::Malformed("only 8-bit P6 is supported".into()));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| RenderError::Malformed(e.to_string()));
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let data = bytes
        .get(pos..pos + 3 * w * h)
        .ok_or_else(|| RenderError::Malformed("truncated PPM data".into()))?
        .to_vec();
    Ok(RgbImage { width: w, height: h, data })
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>, RenderError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&img.data)?;
        writer.finish()?;
    }
    Ok(out)
}

pub fn decode_png(bytes: &[u8]) -> Result<RgbImage, RenderError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| RenderError::Malformed("image too large".into()))?];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(RenderError::Malformed("only 8-bit RGB PNG is supported".into()));
    }
    buf.truncate(info.buffer_size());
    Ok(RgbImage {
        width: info.width as usize,
        height: info.height as usize,
        data: buf,
    })
}

pub fn encode_image(img: &RgbImage, format: ImageFormat) -> Result<Vec<u8>, RenderError> {
    match format {
        ImageFormat::Ppm => Ok(encode_ppm(img)),
        ImageFormat::Png => encode_png(img),
    }
}

pub fn write_image(img: &RgbImage, path: &Path, format: ImageFormat) -> Result<(), RenderError> {
    let bytes = encode_image(img, format)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

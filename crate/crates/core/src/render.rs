//! Density field to RGBA8 image: compositing, tone mapping, palette lookup.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::density::{normalize, DensityGrid, Field};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("palette needs at least two control points")]
    PaletteTooShort,
    #[error("palette positions must increase strictly from 0 to 1")]
    PalettePositions,
    #[error("unknown palette `{0}` (expected ember or ocean)")]
    UnknownPalette(String),
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("floor must lie in [0, 1)")]
    Floor,
    #[error("PNG encoding failed: {0}")]
    Png(#[from] png::EncodingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    PurePixel,
    SmoothGlow,
    SmokyBloom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub position: f64,
    pub rgb: [u8; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PaletteRepr", into = "PaletteRepr")]
pub struct Palette {
    name: Option<String>,
    stops: Vec<Stop>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PaletteRepr {
    Named(String),
    Stops(Vec<Stop>),
}

impl TryFrom<PaletteRepr> for Palette {
    type Error = RenderError;
    fn try_from(r: PaletteRepr) -> Result<Self, RenderError> {
        match r {
            PaletteRepr::Named(n) => Palette::named(&n),
            PaletteRepr::Stops(s) => Palette::new(s),
        }
    }
}

impl From<Palette> for PaletteRepr {
    fn from(p: Palette) -> Self {
        match p.name {
            Some(n) => PaletteRepr::Named(n),
            None => PaletteRepr::Stops(p.stops),
        }
    }
}

const fn stop(position: f64, r: u8, g: u8, b: u8) -> Stop {
    Stop { position, rgb: [r, g, b] }
}

pub const EMBER: [Stop; 5] = [
    stop(0.0, 0, 0, 0),
    stop(0.25, 60, 8, 110),
    stop(0.55, 200, 50, 40),
    stop(0.8, 250, 170, 30),
    stop(1.0, 255, 255, 230),
];

pub const OCEAN: [Stop; 4] = [
    stop(0.0, 2, 4, 20),
    stop(0.4, 10, 60, 130),
    stop(0.75, 60, 180, 200),
    stop(1.0, 235, 250, 255),
];

impl Palette {
    pub fn new(stops: Vec<Stop>) -> Result<Self, RenderError> {
        if stops.len() < 2 {
            return Err(RenderError::PaletteTooShort);
        }
        let increasing = stops.windows(2).all(|w| w[0].position < w[1].position);
        if !increasing || stops[0].position != 0.0 || stops[stops.len() - 1].position != 1.0 {
            return Err(RenderError::PalettePositions);
        }
        Ok(Self { name: None, stops })
    }

    pub fn named(name: &str) -> Result<Self, RenderError> {
        let stops = match name {
            "ember" => EMBER.to_vec(),
            "ocean" => OCEAN.to_vec(),
            other => return Err(RenderError::UnknownPalette(other.to_string())),
        };
        Ok(Self {
            name: Some(name.to_string()),
            stops,
        })
    }

    pub fn ember() -> Self {
        Self::named("ember").expect("built-in palette")
    }

    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    /// Interpolated color at `v` in `[0, 1]`, each channel rounded half up.
    pub fn color(&self, v: f64) -> [u8; 3] {
        let v = v.clamp(0.0, 1.0);
        let s = &self.stops;
        let i = s[1..].iter().position(|st| v <= st.position).unwrap_or(s.len() - 2);
        let (a, b) = (s[i], s[i + 1]);
        let t = (v - a.position) / (b.position - a.position);
        let mut out = [0u8; 3];
        for ch in 0..3 {
            let (x, y) = (a.rgb[ch] as f64, b.rgb[ch] as f64);
            out[ch] = (x + t * (y - x) + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSpec {
    pub mode: RenderMode,
    pub palette: Palette,
    pub gamma: f64,
    pub floor: f64,
    pub glow_sigma: f64,
    pub glow_weight: f64,
    /// Weights of the blurs at sigma 2, 4 and 8 in bloom mode.
    pub bloom_weights: [f64; 3],
    pub log_scale: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            mode: RenderMode::SmoothGlow,
            palette: Palette::ember(),
            gamma: 0.8,
            floor: 0.02,
            glow_sigma: 1.5,
            glow_weight: 0.6,
            bloom_weights: [0.5, 0.25, 0.125],
            log_scale: true,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(RenderError::NonPositive("gamma"));
        }
        if !(self.glow_sigma.is_finite() && self.glow_sigma > 0.0) {
            return Err(RenderError::NonPositive("glow_sigma"));
        }
        if !(0.0..1.0).contains(&self.floor) {
            return Err(RenderError::Floor);
        }
        Ok(())
    }
}

/// RGBA8 raster, row-major, top row first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 4] {
        let i = 4 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2], self.pixels[i + 3]]
    }

    /// Hex SHA-256 of the raw pixel bytes.
    pub fn pixel_hash(&self) -> String {
        Sha256::digest(&self.pixels).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn write_png<W: Write>(&self, out: W) -> Result<(), RenderError> {
        let mut enc = png::Encoder::new(out, self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&self.pixels)?;
        writer.finish()?;
        Ok(())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RenderError> {
        let file = std::fs::File::create(path)?;
        self.write_png(std::io::BufWriter::new(file))
    }
}

/// `0` below `floor`, else `((v - floor) / (1 - floor))^gamma`.
pub fn tone_map_value(v: f64, gamma: f64, floor: f64) -> f64 {
    if v < floor {
        0.0
    } else {
        ((v - floor) / (1.0 - floor)).powf(gamma)
    }
}

pub fn tone_map(field: &Field, gamma: f64, floor: f64) -> Field {
    Field {
        width: field.width,
        height: field.height,
        values: field.values.iter().map(|&v| tone_map_value(v, gamma, floor)).collect(),
    }
}

/// Maps field row 0 (the bottom) to the last image row.
pub fn colorize(field: &Field, palette: &Palette) -> Image {
    let (w, h) = (field.width, field.height);
    let mut pixels = Vec::with_capacity(4 * w * h);
    for y in (0..h).rev() {
        for x in 0..w {
            let [r, g, b] = palette.color(field.at(x, y));
            pixels.extend_from_slice(&[r, g, b, 255]);
        }
    }
    Image {
        width: w,
        height: h,
        pixels,
    }
}

/// Normalized Gaussian taps for offsets `-R..=R`, `R = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let taps: Vec<f64> = (-r..=r).map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

fn blur_pass(src: &[f64], dst: &mut [f64], len: usize, stride: usize, count: usize, step: usize, kernel: &[f64]) {
    let r = (kernel.len() / 2) as i64;
    for line in 0..count {
        let base = line * step;
        for i in 0..len as i64 {
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                let k = (i + j as i64 - r).clamp(0, len as i64 - 1) as usize;
                acc += w * src[base + k * stride];
            }
            dst[base + i as usize * stride] = acc;
        }
    }
}

/// Separable Gaussian blur; samples beyond the border repeat the edge value.
pub fn gaussian_blur(field: &Field, sigma: f64) -> Field {
    let kernel = gaussian_kernel(sigma);
    let (w, h) = (field.width, field.height);
    let mut tmp = vec![0.0; w * h];
    blur_pass(&field.values, &mut tmp, w, 1, h, w, &kernel);
    let mut out = vec![0.0; w * h];
    blur_pass(&tmp, &mut out, h, w, w, 1, &kernel);
    Field {
        width: w,
        height: h,
        values: out,
    }
}

fn add_scaled(base: &Field, layers: &[(f64, Field)]) -> Field {
    let mut values = base.values.clone();
    for (weight, layer) in layers {
        for (v, l) in values.iter_mut().zip(&layer.values) {
            *v += weight * l;
        }
    }
    for v in &mut values {
        *v = v.clamp(0.0, 1.0);
    }
    Field {
        width: base.width,
        height: base.height,
        values,
    }
}

/// `clamp(base + weight * G(sigma), 0, 1)`.
pub fn glow(field: &Field, sigma: f64, weight: f64) -> Field {
    add_scaled(field, &[(weight, gaussian_blur(field, sigma))])
}

/// `clamp(base + w0 G(2) + w1 G(4) + w2 G(8), 0, 1)`.
pub fn bloom(field: &Field, weights: [f64; 3]) -> Field {
    let layers: Vec<(f64, Field)> = [2.0, 4.0, 8.0]
        .iter()
        .zip(weights)
        .map(|(&s, w)| (w, gaussian_blur(field, s)))
        .collect();
    add_scaled(field, &layers)
}

pub fn render_field(field: &Field, spec: &RenderSpec) -> Image {
    let composed = match spec.mode {
        RenderMode::PurePixel => field.clone(),
        RenderMode::SmoothGlow => glow(field, spec.glow_sigma, spec.glow_weight),
        RenderMode::SmokyBloom => bloom(field, spec.bloom_weights),
    };
    colorize(&tone_map(&composed, spec.gamma, spec.floor), &spec.palette)
}

pub fn render(grid: &DensityGrid, spec: &RenderSpec) -> Image {
    render_field(&normalize(grid, spec.log_scale), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Bounds;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn bw() -> Palette {
        Palette::new(vec![stop(0.0, 0, 0, 0), stop(1.0, 255, 255, 255)]).unwrap()
    }

    fn impulse(n: usize) -> Field {
        let mut f = Field::zeros(n, n);
        f.values[(n / 2) * n + n / 2] = 1.0;
        f
    }

    #[test]
    fn tone_map_examples() {
        for (g, fl) in [(0.8, 0.02), (2.0, 0.5), (0.3, 0.0)] {
            assert_eq!(tone_map_value(0.0, g, fl), 0.0);
            assert_eq!(tone_map_value(1.0, g, fl), 1.0);
            assert_eq!(tone_map_value(fl, g, fl), 0.0);
        }
        assert_eq!(tone_map_value(0.25, 0.5, 0.0), 0.5);
    }

    #[test]
    fn colorize_examples() {
        assert_eq!(bw().color(0.5), [128, 128, 128]);
        let ember = Palette::ember();
        assert_eq!(ember.color(0.0), EMBER[0].rgb);
        assert_eq!(ember.color(1.0), EMBER[4].rgb);
        assert_eq!(ember.color(0.55), EMBER[2].rgb);
        let ocean = Palette::named("ocean").unwrap();
        assert_eq!(ocean.color(0.0), OCEAN[0].rgb);
        assert_eq!(ocean.color(1.0), OCEAN[3].rgb);
    }

    #[test]
    fn palette_validation() {
        assert!(Palette::new(vec![stop(0.0, 0, 0, 0)]).is_err());
        assert!(Palette::new(vec![stop(0.0, 0, 0, 0), stop(0.0, 1, 1, 1), stop(1.0, 0, 0, 0)]).is_err());
        assert!(Palette::new(vec![stop(0.1, 0, 0, 0), stop(1.0, 1, 1, 1)]).is_err());
        assert!(Palette::named("viridis").is_err());
    }

    #[test]
    fn blur_keeps_uniform_fields() {
        let f = Field {
            width: 10,
            height: 7,
            values: vec![0.37; 70],
        };
        for v in gaussian_blur(&f, 1.5).values {
            assert!((v - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn blur_matches_direct_convolution() {
        let f = impulse(9);
        let blurred = gaussian_blur(&f, 1.0);
        let k = gaussian_kernel(1.0);
        assert_eq!(k.len(), 7);
        // Brute-force 2D convolution with the outer-product kernel.
        for y in 0..9i64 {
            for x in 0..9i64 {
                let mut acc = 0.0;
                for dy in -3..=3i64 {
                    for dx in -3..=3i64 {
                        let (sx, sy) = (x - dx, y - dy);
                        if (0..9).contains(&sx) && (0..9).contains(&sy) {
                            acc += k[(dx + 3) as usize] * k[(dy + 3) as usize] * f.at(sx as usize, sy as usize);
                        }
                    }
                }
                assert!((blurred.at(x as usize, y as usize) - acc).abs() < 1e-15);
            }
        }
        let center = blurred.at(4, 4);
        assert!((center - k[3] * k[3]).abs() < 1e-15);
        assert!((k[3] - 0.3989).abs() < 0.002);
    }

    #[test]
    fn blur_preserves_interior_mass() {
        let mut f = Field::zeros(40, 40);
        f.values[15 * 40 + 20] = 0.5;
        f.values[22 * 40 + 18] = 1.0;
        f.values[20 * 40 + 21] = 0.25;
        let before: f64 = f.values.iter().sum();
        let after: f64 = gaussian_blur(&f, 1.5).values.iter().sum();
        assert!((before - after).abs() < 1e-6);
    }

    #[test]
    fn bloom_support_is_bounded() {
        let f = impulse(61);
        let out = bloom(&f, [0.5, 0.25, 0.125]);
        for y in 0..61i64 {
            for x in 0..61i64 {
                let r = (x - 30).abs().max((y - 30).abs());
                if r > 24 {
                    assert_eq!(out.at(x as usize, y as usize), 0.0);
                }
            }
        }
        assert!(out.at(30 + 24, 30) > 0.0);
        let zero = Field::zeros(8, 8);
        assert_eq!(bloom(&zero, [0.5, 0.25, 0.125]), zero);
    }

    #[test]
    fn render_examples() {
        let b = Bounds::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let mut grid = DensityGrid::new(16, 16, b).unwrap();
        let spec = RenderSpec {
            mode: RenderMode::PurePixel,
            ..RenderSpec::default()
        };
        let img = render(&grid, &spec);
        assert!(img.pixels.chunks(4).all(|p| p == [0, 0, 0, 255]));

        grid.add(Complex64::new(0.1, 0.9));
        let img = render(&grid, &spec);
        let last = EMBER[4].rgb;
        let lit: Vec<usize> = (0..256).filter(|&i| img.pixels[4 * i..4 * i + 3] != [0, 0, 0]).collect();
        assert_eq!(lit.len(), 1);
        // Bin (1, 14) from the bottom is image row 1.
        assert_eq!(img.pixel(1, 1), [last[0], last[1], last[2], 255]);

        for mode in [RenderMode::SmoothGlow, RenderMode::SmokyBloom] {
            let s = RenderSpec { mode, ..RenderSpec::default() };
            let a = render(&grid, &s);
            assert_eq!(a, render(&grid, &s));
            assert_eq!(a.pixel_hash(), render(&grid, &s).pixel_hash());
            assert!(a.pixels.chunks(4).all(|p| p[3] == 255));
        }
    }

    #[test]
    fn png_round_trip() {
        let img = colorize(&impulse(16), &bw());
        let mut buf = Vec::new();
        img.write_png(&mut buf).unwrap();
        let dec = png::Decoder::new(std::io::Cursor::new(buf));
        let mut reader = dec.read_info().unwrap();
        let mut data = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut data).unwrap();
        assert_eq!((info.width, info.height), (16, 16));
        assert_eq!(&data[..info.buffer_size()], &img.pixels[..]);
        assert_eq!(img.pixel_hash().len(), 64);
    }

    #[test]
    fn spec_serde() {
        let spec = RenderSpec::default();
        let text = toml::to_string(&spec).unwrap();
        assert_eq!(toml::from_str::<RenderSpec>(&text).unwrap(), spec);
        let custom: RenderSpec =
            toml::from_str("mode = \"pure_pixel\"\npalette = [{position = 0.0, rgb = [0,0,0]}, {position = 1.0, rgb = [9,9,9]}]")
                .unwrap();
        assert_eq!(custom.palette.color(1.0), [9, 9, 9]);
        assert!(toml::from_str::<RenderSpec>("palette = \"nope\"").is_err());
        assert!(toml::from_str::<RenderSpec>("gama = 1.0").is_err());
    }

    proptest! {
        #[test]
        fn tone_map_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, g in 0.1f64..5.0, fl in 0.0f64..0.99) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(tone_map_value(lo, g, fl) <= tone_map_value(hi, g, fl));
        }

        #[test]
        fn colorize_monotone_palette(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let p = Palette::new(vec![stop(0.0, 0, 10, 0), stop(0.3, 50, 10, 0), stop(1.0, 255, 200, 0)]).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (x, y) = (p.color(lo), p.color(hi));
            for ch in 0..3 {
                prop_assert!(x[ch] <= y[ch]);
            }
        }

        #[test]
        fn composites_stay_in_unit_range(vals in proptest::collection::vec(0.0f64..=1.0, 64)) {
            let f = Field { width: 8, height: 8, values: vals };
            for v in glow(&f, 1.5, 0.6).values.iter().chain(bloom(&f, [0.5, 0.25, 0.125]).values.iter()) {
                prop_assert!((0.0..=1.0).contains(v));
            }
            let unclamped = gaussian_blur(&f, 2.0);
            for (x, b) in f.values.iter().zip(&unclamped.values) {
                prop_assert!(x + 0.5 * b >= *x);
            }
        }
    }
}

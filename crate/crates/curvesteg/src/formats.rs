//! File formats: curve and stipple JSON, SVG and OBJ export, OFF/OBJ mesh
//! input and raster image input.

use std::fmt::Write as _;
use std::path::Path;

use curvesteg_core::stipple::{GrayImage, StipplePattern};
use curvesteg_core::{Curve, TriangleMesh};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn load_curve(path: &Path) -> Result<Curve> {
    let curve: Curve = read_json(path)?;
    curve.validate()?;
    Ok(curve)
}

pub fn save_curve(path: &Path, curve: &Curve) -> Result<()> {
    write_json(path, curve)
}

/// Stipple points together with the size of the image they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StippleFile {
    pub width: usize,
    pub height: usize,
    pub points: Vec<[f64; 2]>,
}

impl StippleFile {
    pub fn new(width: usize, height: usize, pattern: &StipplePattern) -> Self {
        Self { width, height, points: pattern.points.clone() }
    }

    pub fn pattern(&self) -> StipplePattern {
        StipplePattern { points: self.points.clone() }
    }
}

/// Closed 2-d curve as an SVG polygon, y pointing down as in images.
pub fn curve_svg(curve: &Curve) -> Result<String> {
    if curve.dimension != 2 {
        return Err(Error::Invalid(format!("SVG export needs a 2-d curve, got {}-d", curve.dimension)));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &curve.points {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let pad = 0.02 * (x1 - x0).max(y1 - y0).max(1e-9);
    let stroke = 0.002 * (x1 - x0).max(y1 - y0).max(1e-9);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        x0 - pad,
        y0 - pad,
        x1 - x0 + 2.0 * pad,
        y1 - y0 + 2.0 * pad
    );
    s.push_str(r#"<polygon fill="none" stroke="black" stroke-linejoin="round" stroke-width=""#);
    let _ = write!(s, "{stroke}\" points=\"");
    for (i, p) in curve.points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.4},{:.4}", p[0], p[1]);
    }
    s.push_str("\"/>\n</svg>\n");
    Ok(s)
}

/// Closed curve as an OBJ polyline (2-d curves get z = 0).
pub fn curve_obj(curve: &Curve) -> String {
    let mut s = String::new();
    for p in &curve.points {
        let z = p.get(2).copied().unwrap_or(0.0);
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], z);
    }
    s.push('l');
    for i in 1..=curve.len() {
        let _ = write!(s, " {i}");
    }
    s.push_str(" 1\n");
    s
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Reads an OFF or OBJ triangle mesh, chosen by file extension.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let (vertices, faces) = match ext.as_deref() {
        Some("off") => parse_off(&text, path)?,
        Some("obj") => parse_obj(&text, path)?,
        _ => return Err(Error::Invalid(format!("{}: expected a .off or .obj mesh", path.display()))),
    };
    Ok(TriangleMesh::new(vertices, faces)?)
}

type RawMesh = (Vec<[f64; 3]>, Vec<[usize; 3]>);

pub fn parse_off(text: &str, path: &Path) -> Result<RawMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(path, 0, format!("unexpected end, wanted {what}")));
    let (line, head) = next("header")?;
    // The counts may share the header line ("OFF 4 4 6").
    let counts_text = match head.strip_prefix("OFF") {
        Some(rest) if rest.is_empty() || rest.starts_with(char::is_whitespace) => {
            if rest.trim().is_empty() {
                next("counts")?
            } else {
                (line, rest.trim())
            }
        }
        Some(rest) => return Err(parse_err(path, line, format!("unsupported OFF variant {}", rest.trim()))),
        None => (line, head),
    };
    let counts: Vec<usize> = counts_text
        .1
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(path, counts_text.0, format!("bad count {t}"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err(path, counts_text.0, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = next("vertex")?;
        let c: Vec<f64> = l
            .split_whitespace()
            .take(3)
            .map(|t| t.parse().map_err(|_| parse_err(path, line, format!("bad coordinate {t}"))))
            .collect::<Result<_>>()?;
        if c.len() != 3 {
            return Err(parse_err(path, line, "vertex needs 3 coordinates"));
        }
        vertices.push([c[0], c[1], c[2]]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, l) = next("face")?;
        let t: Vec<&str> = l.split_whitespace().collect();
        let k: usize = t.first().and_then(|v| v.parse().ok()).ok_or_else(|| parse_err(path, line, "bad face size"))?;
        if k != 3 {
            return Err(parse_err(path, line, format!("only triangles are supported, found a {k}-gon")));
        }
        if t.len() < 4 {
            return Err(parse_err(path, line, "face needs 3 indices"));
        }
        let mut f = [0usize; 3];
        for (c, v) in f.iter_mut().zip(&t[1..4]) {
            *c = v.parse().map_err(|_| parse_err(path, line, format!("bad index {v}")))?;
        }
        faces.push(f);
    }
    Ok((vertices, faces))
}

pub fn parse_obj(text: &str, path: &Path) -> Result<RawMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut parts = raw.split('#').next().unwrap_or("").split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut v = [0.0; 3];
                for c in &mut v {
                    let t = parts.next().ok_or_else(|| parse_err(path, line, "vertex needs 3 coordinates"))?;
                    *c = t.parse().map_err(|_| parse_err(path, line, format!("bad coordinate {t}")))?;
                }
                vertices.push(v);
            }
            Some("f") => {
                let idx: Vec<&str> = parts.collect();
                if idx.len() != 3 {
                    return Err(parse_err(path, line, format!("only triangles are supported, found {} vertices", idx.len())));
                }
                let mut f = [0usize; 3];
                for (c, t) in f.iter_mut().zip(idx) {
                    let first = t.split('/').next().unwrap_or("");
                    let k: isize = first.parse().map_err(|_| parse_err(path, line, format!("bad index {t}")))?;
                    let resolved = if k > 0 { k - 1 } else { vertices.len() as isize + k };
                    if k == 0 || resolved < 0 {
                        return Err(parse_err(path, line, format!("index {k} out of range")));
                    }
                    *c = resolved as usize;
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

/// Loads a raster image as luma in [0, 1], `Y = 0.299R + 0.587G + 0.114B`.
/// (`image`'s own grayscale conversion uses the Rec. 709 weights.)
pub fn load_gray_image(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.to_path_buf(), source })?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0.map(|c| c as f64 / 255.0);
            // Gray pixels map exactly; the weights only sum to 1 up to rounding.
            if r == g && g == b {
                r
            } else {
                (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok(GrayImage::new(w, h, pixels)?)
}

/// Writes a grayscale image as 8-bit PNG.
pub fn save_gray_png(path: &Path, img: &GrayImage) -> Result<()> {
    let buf: Vec<u8> = img.pixels.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect();
    let out = image::GrayImage::from_raw(img.width as u32, img.height as u32, buf)
        .ok_or_else(|| Error::Invalid("image buffer size mismatch".into()))?;
    out.save(path).map_err(|source| Error::Image { path: path.to_path_buf(), source })
}

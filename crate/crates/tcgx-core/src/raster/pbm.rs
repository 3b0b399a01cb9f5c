//! PBM (P4) input and output with a placement sidecar.
//!
//! The bitmap itself travels as binary PBM. Placement on the paper plane
//! rides in a sidecar next to it (same name, `.rplace` extension) holding a
//! single line `RPLACE <dpi> <x_mm> <y_mm>`; x/y are the paper position of
//! the top-left corner.

use std::fs;
use std::path::{Path, PathBuf};

use super::{MonoRaster, RasterError};
use crate::geom::Point;
use crate::textio::fmt_f64;

pub fn sidecar_path(pbm: &Path) -> PathBuf {
    pbm.with_extension("rplace")
}

fn pbm_err(path: &Path, msg: impl Into<String>) -> RasterError {
    RasterError::Pbm { file: path.display().to_string(), msg: msg.into() }
}

// P4 header: magic, then width and height as ASCII decimals separated by
// whitespace or `#` comments, then exactly one whitespace byte before data.
fn parse_header(path: &Path, data: &[u8]) -> Result<(u32, u32, usize), RasterError> {
    if data.len() < 2 || &data[0..2] != b"P4" {
        return Err(pbm_err(path, "not a binary PBM (P4) file"));
    }
    let mut pos = 2;
    let mut fields = [0u32; 2];
    for field in &mut fields {
        loop {
            match data.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while !matches!(data.get(pos), None | Some(b'\n')) {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_digit() => break,
                _ => return Err(pbm_err(path, "malformed header")),
            }
        }
        let mut v: u64 = 0;
        while let Some(b) = data.get(pos) {
            if !b.is_ascii_digit() {
                break;
            }
            v = v * 10 + u64::from(b - b'0');
            if v > u64::from(u32::MAX) {
                return Err(pbm_err(path, "dimension overflow"));
            }
            pos += 1;
        }
        *field = v as u32;
    }
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(pbm_err(path, "missing whitespace before bitmap data")),
    }
    Ok((fields[0], fields[1], pos))
}

fn load_pixels(path: &Path, dpi: u32, origin: Point) -> Result<MonoRaster, RasterError> {
    let data = fs::read(path)?;
    let (width, height, start) = parse_header(path, &data)?;
    if width == 0 || height == 0 {
        return Err(pbm_err(path, "zero-sized bitmap"));
    }
    let need = (width as usize).div_ceil(8) * height as usize;
    let rows = data
        .get(start..start + need)
        .ok_or_else(|| pbm_err(path, format!("expected {need} data bytes")))?;
    MonoRaster::from_bits(width, height, dpi, origin, rows.to_vec()).map_err(|e| match e {
        RasterError::Pbm { msg, .. } => pbm_err(path, msg),
        other => other,
    })
}

fn load_sidecar(path: &Path) -> Result<(u32, Point), RasterError> {
    let text = fs::read_to_string(path)?;
    let line = text.lines().next().unwrap_or("");
    let parts: Vec<&str> = line.split_whitespace().collect();
    let bad = || pbm_err(path, "expected 'RPLACE <dpi> <x_mm> <y_mm>'");
    if parts.len() != 4 || parts[0] != "RPLACE" {
        return Err(bad());
    }
    let dpi: u32 = parts[1].parse().map_err(|_| bad())?;
    let x: f64 = parts[2].parse().map_err(|_| bad())?;
    let y: f64 = parts[3].parse().map_err(|_| bad())?;
    if !x.is_finite() || !y.is_finite() {
        return Err(bad());
    }
    Ok((dpi, Point::new(x, y)))
}

/// Loads a bitmap and its placement sidecar.
pub fn load_raster(pbm: &Path) -> Result<MonoRaster, RasterError> {
    let sidecar = sidecar_path(pbm);
    if !sidecar.exists() {
        return Err(RasterError::MissingPlacement(sidecar.display().to_string()));
    }
    let (dpi, origin) = load_sidecar(&sidecar)?;
    load_pixels(pbm, dpi, origin)
}

/// Writes the bitmap and its placement sidecar; byte-stable.
pub fn save_raster(pbm: &Path, r: &MonoRaster) -> Result<(), RasterError> {
    let mut out = format!("P4\n{} {}\n", r.width(), r.height()).into_bytes();
    out.extend_from_slice(r.bits());
    fs::write(pbm, out)?;
    let o = r.origin();
    fs::write(
        sidecar_path(pbm),
        format!("RPLACE {} {} {}\n", r.dpi(), fmt_f64(o.x), fmt_f64(o.y)),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(w: u32, h: u32) -> MonoRaster {
        let mut r = MonoRaster::new(w, h, 150, Point::new(12.5, 40.0)).unwrap();
        for i in 0..w.min(h) {
            r.set(i, i, true);
        }
        r
    }

    #[test]
    fn save_load_round_trips_exactly() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("scan.pbm");
        let r = diag(13, 7);
        save_raster(&path, &r).unwrap();
        let back = load_raster(&path).unwrap();
        assert_eq!(back, r);
        save_raster(&tmp.path().join("again.pbm"), &back).unwrap();
        assert_eq!(
            fs::read(tmp.path().join("scan.pbm")).unwrap(),
            fs::read(tmp.path().join("again.pbm")).unwrap()
        );
    }

    #[test]
    fn header_comments_accepted() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("scan.pbm");
        let mut data = b"P4\n# scanned sheet 3\n10 # width\n2\n".to_vec();
        data.extend_from_slice(&[0x80, 0x00, 0x00, 0x40]);
        fs::write(&path, data).unwrap();
        fs::write(sidecar_path(&path), "RPLACE 75 0 0\n").unwrap();
        let r = load_raster(&path).unwrap();
        assert_eq!((r.width(), r.height(), r.dpi()), (10, 2, 75));
        assert!(r.get(0, 0) && r.get(9, 1));
    }

    #[test]
    fn missing_or_bad_sidecar_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("scan.pbm");
        save_raster(&path, &diag(8, 8)).unwrap();
        fs::remove_file(sidecar_path(&path)).unwrap();
        assert!(matches!(load_raster(&path), Err(RasterError::MissingPlacement(_))));

        fs::write(sidecar_path(&path), "RPLACE 150\n").unwrap();
        assert!(matches!(load_raster(&path), Err(RasterError::Pbm { .. })));

        fs::write(sidecar_path(&path), "RPLACE 40 0 0\n").unwrap();
        assert!(matches!(load_raster(&path), Err(RasterError::DpiOutOfRange(40))));
    }

    #[test]
    fn truncated_data_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("scan.pbm");
        fs::write(&path, b"P4\n16 4\n\x00\x00\x00").unwrap();
        fs::write(sidecar_path(&path), "RPLACE 100 0 0\n").unwrap();
        assert!(matches!(load_raster(&path), Err(RasterError::Pbm { .. })));
    }
}

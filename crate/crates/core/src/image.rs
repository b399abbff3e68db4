//! Grayscale rasters, the replicate-edge border policy, and PGM (P2/P5) I/O.

use std::fmt::Write as _;

use crate::error::{Error, PgmError, Result};

/// An 8-bit grayscale image stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

/// An in-bounds pixel coordinate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelPos {
    pub row: usize,
    pub col: usize,
}

impl PixelPos {
    pub fn new(row: usize, col: usize) -> Self {
        PixelPos { row, col }
    }

    pub fn signed(self) -> (isize, isize) {
        (self.row as isize, self.col as isize)
    }
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// Clamps a signed coordinate into `0..len`.
#[inline]
pub(crate) fn clamp_index(i: isize, len: usize) -> usize {
    if i <= 0 {
        0
    } else if i as usize >= len {
        len - 1
    } else {
        i as usize
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::BufferLength {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` at every position.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Builds an image from nested rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut pixels = Vec::with_capacity(width * height);
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::Mismatch(format!(
                    "ragged rows: expected width {width}, found {}",
                    row.len()
                )));
            }
            pixels.extend_from_slice(row);
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn at(&self, pos: PixelPos) -> u8 {
        self.get(pos.row, pos.col)
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    /// Samples with replicate-edge padding: coordinates are clamped into bounds.
    #[inline]
    pub fn sample_padded(&self, row: isize, col: isize) -> u8 {
        self.get(clamp_index(row, self.height), clamp_index(col, self.width))
    }

    pub fn positions(&self) -> impl Iterator<Item = PixelPos> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| PixelPos::new(r, c)))
    }

    /// Applies `f` to every intensity.
    pub fn map(&self, mut f: impl FnMut(u8) -> u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Appends the `size`x`size` window centered at (row, col), padded, in row-major order.
    pub(crate) fn gather_window(&self, row: isize, col: isize, size: usize, out: &mut Vec<u8>) {
        let half = (size / 2) as isize;
        for dr in -half..=half {
            let r = clamp_index(row + dr, self.height);
            let base = r * self.width;
            for dc in -half..=half {
                out.push(self.pixels[base + clamp_index(col + dc, self.width)]);
            }
        }
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' && self.bytes[self.pos] != b'\r' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<u32, PgmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            let reason = match self.bytes.get(self.pos) {
                None => "unexpected end of file".to_string(),
                Some(b) => format!("expected a decimal number, found byte 0x{b:02x}"),
            };
            return Err(PgmError::Header { field, reason });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse::<u32>().map_err(|e| PgmError::Header {
            field,
            reason: e.to_string(),
        })
    }
}

/// Decodes a P2 (ASCII) or P5 (binary) PGM with maxval at most 255.
///
/// Samples are returned as stored; they are not rescaled when maxval < 255.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    if bytes.len() < 2 {
        return Err(PgmError::Magic(String::from_utf8_lossy(bytes).into_owned()));
    }
    let magic = &bytes[..2];
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        b"P3" | b"P6" => return Err(PgmError::Color(String::from_utf8_lossy(magic).into_owned())),
        _ => return Err(PgmError::Magic(String::from_utf8_lossy(magic).into_owned())),
    };
    let mut rd = HeaderReader { bytes, pos: 2 };
    if rd.pos < bytes.len() && !bytes[rd.pos].is_ascii_whitespace() && bytes[rd.pos] != b'#' {
        return Err(PgmError::Magic(String::from_utf8_lossy(&bytes[..3]).into_owned()));
    }
    let width = rd.number("width")? as usize;
    if width == 0 {
        return Err(PgmError::Header {
            field: "width",
            reason: "must be positive".into(),
        });
    }
    let height = rd.number("height")? as usize;
    if height == 0 {
        return Err(PgmError::Header {
            field: "height",
            reason: "must be positive".into(),
        });
    }
    let maxval = rd.number("maxval")?;
    if maxval == 0 {
        return Err(PgmError::Header {
            field: "maxval",
            reason: "must be positive".into(),
        });
    }
    if maxval > 255 {
        return Err(PgmError::MaxvalTooLarge(maxval));
    }
    let count = width * height;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(rd.pos) {
            Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
            Some(_) => {
                return Err(PgmError::Header {
                    field: "maxval",
                    reason: "missing whitespace after maxval".into(),
                })
            }
            None => return Err(PgmError::Truncated { expected: count, found: 0 }),
        }
        let data = &bytes[rd.pos..];
        if data.len() < count {
            return Err(PgmError::Truncated {
                expected: count,
                found: data.len(),
            });
        }
        for (index, &v) in data[..count].iter().enumerate() {
            if u32::from(v) > maxval {
                return Err(PgmError::SampleOutOfRange {
                    index,
                    value: v.into(),
                    maxval,
                });
            }
            pixels.push(v);
        }
    } else {
        for index in 0..count {
            rd.skip_whitespace_and_comments();
            if rd.pos >= bytes.len() {
                return Err(PgmError::Truncated {
                    expected: count,
                    found: index,
                });
            }
            let v = rd.number("raster")?;
            if v > maxval {
                return Err(PgmError::SampleOutOfRange { index, value: v, maxval });
            }
            pixels.push(v as u8);
        }
    }
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

/// Encodes with maxval 255, as P2 when `ascii` is set and P5 otherwise.
pub fn write_pgm(img: &GrayImage, ascii: bool) -> Vec<u8> {
    let mut header = String::new();
    let magic = if ascii { "P2" } else { "P5" };
    let _ = write!(header, "{magic}\n{} {}\n255\n", img.width, img.height);
    let mut out = header.into_bytes();
    if !ascii {
        out.extend_from_slice(&img.pixels);
        return out;
    }
    // one image row per line, wrapped so no line exceeds 70 characters
    for row in img.pixels.chunks(img.width) {
        let mut line_len = 0;
        for (i, v) in row.iter().enumerate() {
            let s = v.to_string();
            if i > 0 {
                if line_len + 1 + s.len() > 70 {
                    out.push(b'\n');
                    line_len = 0;
                } else {
                    out.push(b' ');
                    line_len += 1;
                }
            }
            out.extend_from_slice(s.as_bytes());
            line_len += s.len();
        }
        out.push(b'\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_ascii_example() {
        let img = read_pgm(b"P2\n2 2\n255\n0 255 128 7\n").unwrap();
        assert_eq!(img, GrayImage::from_rows(&[[0u8, 255], [128, 7]]).unwrap());
    }

    #[test]
    fn binary_matches_ascii() {
        let mut p5 = b"P5\n2 2\n255\n".to_vec();
        p5.extend_from_slice(&[0, 255, 128, 7]);
        assert_eq!(read_pgm(&p5).unwrap(), read_pgm(b"P2\n2 2\n255\n0 255 128 7\n").unwrap());
    }

    #[test]
    fn rejects_large_maxval() {
        assert_eq!(read_pgm(b"P5\n3 1\n300\n\x00\x01\x02"), Err(PgmError::MaxvalTooLarge(300)));
    }

    #[test]
    fn header_comments_are_skipped() {
        let img = read_pgm(b"P2\n# made by hand\n2 # width\n1\n# max\n15\n3 15\n").unwrap();
        assert_eq!(img.pixels(), &[3, 15]);
    }

    #[test]
    fn error_names_field() {
        match read_pgm(b"P2\n2 x\n255\n") {
            Err(PgmError::Header { field, .. }) => assert_eq!(field, "height"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_pgm(b"P7\n1 1\n255\n0"), Err(PgmError::Magic(_))));
        assert!(matches!(read_pgm(b"P6\n1 1\n255\n000"), Err(PgmError::Color(_))));
    }

    #[test]
    fn truncated_payload() {
        assert_eq!(
            read_pgm(b"P5\n2 2\n255\n\x01\x02"),
            Err(PgmError::Truncated { expected: 4, found: 2 })
        );
        assert_eq!(
            read_pgm(b"P2\n2 2\n255\n1 2 3"),
            Err(PgmError::Truncated { expected: 4, found: 3 })
        );
    }

    #[test]
    fn sample_above_maxval_rejected() {
        assert!(matches!(
            read_pgm(b"P2\n1 1\n10\n11\n"),
            Err(PgmError::SampleOutOfRange { value: 11, .. })
        ));
    }

    #[test]
    fn writes_smallest_ascii() {
        let img = GrayImage::new(1, 1, vec![42]).unwrap();
        assert_eq!(write_pgm(&img, true), b"P2\n1 1\n255\n42\n");
    }

    #[test]
    fn long_rows_wrap() {
        let img = GrayImage::filled(40, 1, 200).unwrap();
        let bytes = write_pgm(&img, true);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.lines().all(|l| l.len() <= 70));
        assert_eq!(read_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn padding_clamps() {
        let img = GrayImage::from_rows(&[[1u8, 2], [3, 4]]).unwrap();
        assert_eq!(img.sample_padded(-5, -5), 1);
        assert_eq!(img.sample_padded(0, 1), 2);
        assert_eq!(img.sample_padded(10, 0), 3);
        assert_eq!(img.sample_padded(10, 10), 4);
    }

    #[test]
    fn rejects_empty_dimensions() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }

    fn arb_image() -> impl Strategy<Value = GrayImage> {
        (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h).prop_map(move |px| GrayImage::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn pgm_round_trip(img in arb_image(), ascii in any::<bool>()) {
            prop_assert_eq!(read_pgm(&write_pgm(&img, ascii)).unwrap(), img.clone());
            prop_assert_eq!(read_pgm(&write_pgm(&img, !ascii)).unwrap(), img);
        }

        #[test]
        fn padding_agrees_in_bounds(img in arb_image()) {
            for p in img.positions() {
                prop_assert_eq!(img.sample_padded(p.row as isize, p.col as isize), img.at(p));
            }
        }
    }
}

//! Indexed-color PNG reading and writing for label masks. The palette index
//! is the object id; palette colors are cosmetic and regenerated on write.

use super::{LabelMask, RasterError, RasterSize, MAX_OBJECT_ID};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> RasterError {
    RasterError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Read an indexed PNG as a label map. Bit depths 1, 2, 4, and 8 are
/// unpacked most-significant-bit first; any index above 254 is rejected.
pub fn load_label_mask(path: &Path) -> Result<LabelMask, RasterError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| RasterError::Decode {
        path: path.display().to_string(),
        source: e,
    })?;
    let buf_len = reader.output_buffer_size().ok_or_else(|| {
        let info = reader.info();
        RasterError::InvalidSize {
            width: info.width,
            height: info.height,
        }
    })?;
    let mut buf = vec![0u8; buf_len];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| RasterError::Decode {
            path: path.display().to_string(),
            source: e,
        })?;
    if info.color_type != png::ColorType::Indexed {
        return Err(RasterError::NotIndexed {
            path: path.display().to_string(),
        });
    }
    let depth = info.bit_depth as u8;
    if ![1, 2, 4, 8].contains(&depth) {
        return Err(RasterError::BadBitDepth {
            path: path.display().to_string(),
            depth,
        });
    }
    let size = RasterSize::new(info.width, info.height)?;
    let row_bytes = (info.width as usize * depth as usize).div_ceil(8);
    let mut labels = Vec::with_capacity(size.pixel_count());
    for y in 0..info.height as usize {
        let row = &buf[y * row_bytes..(y + 1) * row_bytes];
        for x in 0..info.width as usize {
            let index = match depth {
                8 => row[x],
                _ => {
                    // packed indices, most significant bits first
                    let per_byte = 8 / depth as usize;
                    let byte = row[x / per_byte];
                    let shift = 8 - depth as usize * (x % per_byte + 1);
                    (byte >> shift) & ((1u8 << depth) - 1)
                }
            };
            if index > MAX_OBJECT_ID {
                return Err(RasterError::LabelTooLarge(index as u16));
            }
            labels.push(index);
        }
    }
    LabelMask::from_vec(size, labels)
}

/// Write a label map as an 8-bit indexed PNG using [`id_color`] entries.
pub fn save_label_mask(path: &Path, mask: &LabelMask) -> Result<(), RasterError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        mask.size().width(),
        mask.size().height(),
    );
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    let mut palette = Vec::with_capacity(256 * 3);
    for id in 0..=255u8 {
        palette.extend_from_slice(&id_color(id));
    }
    encoder.set_palette(palette);
    let enc_err = |e: png::EncodingError| RasterError::Encode {
        path: path.display().to_string(),
        source: e,
    };
    let mut writer = encoder.write_header().map_err(enc_err)?;
    writer.write_image_data(mask.as_slice()).map_err(enc_err)?;
    Ok(())
}

/// Bitwise colormap: bit k of the id feeds bit (7 - k/3) of channel k % 3,
/// giving visually distinct colors for small ids (1 maroon, 2 green, ...).
pub fn id_color(id: u8) -> [u8; 3] {
    let mut rgb = [0u8; 3];
    let mut v = id as u32;
    for shift in 0..8 {
        for (c, channel) in rgb.iter_mut().enumerate() {
            *channel |= (((v >> c) & 1) as u8) << (7 - shift);
        }
        v >>= 3;
    }
    rgb
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn fixture(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name)
    }

    #[test]
    fn loads_eight_bit_fixture_exactly() {
        let m = load_label_mask(&fixture("two_objects.png")).unwrap();
        assert_eq!((m.size().width(), m.size().height()), (8, 6));
        #[rustfmt::skip]
        let want: Vec<u8> = vec![
            0, 0, 0, 0, 0, 0, 0, 0,
            0, 1, 1, 1, 0, 0, 2, 0,
            0, 1, 1, 1, 0, 0, 2, 0,
            0, 0, 0, 0, 0, 2, 2, 0,
            0, 0, 0, 0, 0, 0, 0, 0,
            0, 0, 0, 0, 0, 0, 0, 0,
        ];
        assert_eq!(m.as_slice(), &want[..]);
        assert_eq!(m.object_ids().into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn loads_packed_four_bit_fixture() {
        // odd width, so each row carries padding bits that must be skipped
        let m = load_label_mask(&fixture("small_4bit.png")).unwrap();
        assert_eq!((m.size().width(), m.size().height()), (5, 4));
        #[rustfmt::skip]
        let want: Vec<u8> = vec![
            0, 0, 0, 0, 0,
            0, 1, 1, 0, 0,
            0, 0, 1, 3, 0,
            2, 0, 0, 0, 0,
        ];
        assert_eq!(m.as_slice(), &want[..]);
    }

    #[test]
    fn save_load_roundtrip() {
        let size = RasterSize::new(13, 7).unwrap();
        let labels: Vec<u8> = (0..size.pixel_count())
            .map(|i| ((i * 7) % 5) as u8)
            .collect();
        let mask = LabelMask::from_vec(size, labels).unwrap();
        let dir = std::env::temp_dir().join("scribbleval-palette-test");
        let path = dir.join("roundtrip.png");
        save_label_mask(&path, &mask).unwrap();
        let back = load_label_mask(&path).unwrap();
        assert_eq!(back, mask);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rejects_non_indexed_png() {
        // write a tiny grayscale png, then refuse to read it as labels
        let dir = std::env::temp_dir().join("scribbleval-palette-gray");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("gray.png");
        {
            let file = File::create(&path).unwrap();
            let mut enc = png::Encoder::new(BufWriter::new(file), 2, 2);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0, 128, 255, 32]).unwrap();
        }
        match load_label_mask(&path) {
            Err(RasterError::NotIndexed { .. }) => {}
            other => panic!("expected NotIndexed, got {other:?}"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn id_colors_match_the_conventional_map() {
        assert_eq!(id_color(0), [0, 0, 0]);
        assert_eq!(id_color(1), [128, 0, 0]);
        assert_eq!(id_color(2), [0, 128, 0]);
        assert_eq!(id_color(3), [128, 128, 0]);
        assert_eq!(id_color(4), [0, 0, 128]);
    }
}

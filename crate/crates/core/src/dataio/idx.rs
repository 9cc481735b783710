use std::path::Path;

use super::{apply_subsample, require_file, DatasetKind, DatasetSpec, LoadedDataset};
use crate::error::{Error, Result};
use crate::learner::Dataset;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn read_all(path: &Path) -> Result<Vec<u8>> {
    require_file(path)?;
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn be_u32(bytes: &[u8], at: usize, path: &Path) -> Result<u32> {
    let word = bytes.get(at..at + 4).ok_or_else(|| Error::IdxTruncated {
        path: path.to_path_buf(),
        expected: at + 4,
        found: bytes.len(),
    })?;
    Ok(u32::from_be_bytes(word.try_into().expect("four bytes")))
}

/// Header fields of an IDX file: dimensions and the payload offset.
fn parse_header(bytes: &[u8], path: &Path, magic: u32) -> Result<(Vec<usize>, usize)> {
    let found = be_u32(bytes, 0, path)?;
    if found != magic {
        return Err(Error::IdxMagic {
            path: path.to_path_buf(),
            found,
            expected: magic,
        });
    }
    let n_dims = (magic & 0xff) as usize;
    let mut dims = Vec::with_capacity(n_dims);
    for d in 0..n_dims {
        dims.push(be_u32(bytes, 4 + 4 * d, path)? as usize);
    }
    let offset = 4 + 4 * n_dims;
    let expected = offset + dims.iter().product::<usize>();
    if bytes.len() < expected {
        return Err(Error::IdxTruncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len(),
        });
    }
    Ok((dims, offset))
}

/// Loads an IDX image/label pair. Pixels are flattened row-major and scaled
/// to [0, 1]; the class count is one more than the largest label.
pub fn load_idx_images(spec: &DatasetSpec) -> Result<LoadedDataset> {
    if spec.kind != DatasetKind::IdxImages {
        return Err(Error::Config("not an idx dataset spec".into()));
    }
    spec.validate()?;
    let image_path = spec.images.as_deref().expect("validated");
    let label_path = spec.labels.as_deref().expect("validated");

    let image_bytes = read_all(image_path)?;
    let label_bytes = read_all(label_path)?;
    let (image_dims, image_offset) = parse_header(&image_bytes, image_path, IMAGE_MAGIC)?;
    let (label_dims, label_offset) = parse_header(&label_bytes, label_path, LABEL_MAGIC)?;
    let (n, rows, cols) = (image_dims[0], image_dims[1], image_dims[2]);
    if n != label_dims[0] {
        return Err(Error::IdxCountMismatch {
            images: n,
            labels: label_dims[0],
        });
    }
    let d = rows * cols;
    if n == 0 || d == 0 {
        return Err(Error::Dataset(format!("{} holds no pixels", image_path.display())));
    }

    let features: Vec<f64> = image_bytes[image_offset..image_offset + n * d]
        .iter()
        .map(|&p| f64::from(p) / 255.0)
        .collect();
    let labels: Vec<u32> = label_bytes[label_offset..label_offset + n]
        .iter()
        .map(|&l| u32::from(l))
        .collect();
    let n_classes = labels.iter().max().map_or(0, |&m| m as usize + 1);
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::SingleClass);
    }
    let names = (0..d).map(|i| format!("px{}_{}", i / cols, i % cols)).collect();
    let data = Dataset::new(features, d, labels, n_classes, names, vec![])?;
    Ok(LoadedDataset {
        data: apply_subsample(data, spec.subsample)?,
        source_rows: n,
        dropped_rows: 0,
    })
}

/// Encodes images and labels as an IDX pair, the inverse of the loader.
pub fn encode_idx(images: &[u8], labels: &[u8], rows: usize, cols: usize) -> (Vec<u8>, Vec<u8>) {
    let n = labels.len();
    assert_eq!(images.len(), n * rows * cols, "image buffer size");
    let mut img = Vec::with_capacity(16 + images.len());
    img.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    for v in [n, rows, cols] {
        img.extend_from_slice(&(v as u32).to_be_bytes());
    }
    img.extend_from_slice(images);
    let mut lab = Vec::with_capacity(8 + n);
    lab.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(n as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    (img, lab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(dir: &Path, img: &[u8], lab: &[u8]) -> DatasetSpec {
        let i = dir.join("images.idx");
        let l = dir.join("labels.idx");
        std::fs::write(&i, img).unwrap();
        std::fs::write(&l, lab).unwrap();
        DatasetSpec::idx(i, l)
    }

    #[test]
    fn reads_dimensions_and_scales() {
        let dir = tempfile::tempdir().unwrap();
        let mut pixels = vec![0u8; 3 * 28 * 28];
        pixels[0] = 255;
        pixels[28 * 28 + 5] = 51;
        let (img, lab) = encode_idx(&pixels, &[0, 1, 2], 28, 28);
        let d = load_idx_images(&pair(dir.path(), &img, &lab)).unwrap().data;
        assert_eq!(d.n_features(), 784);
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.row(0)[0], 1.0);
        assert!((d.row(1)[5] - 0.2).abs() < 1e-12);
        assert_eq!(d.labels(), &[0, 1, 2]);
    }

    #[test]
    fn bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = encode_idx(&[0; 8], &[0, 1], 2, 2);
        let spec = pair(dir.path(), &lab, &img);
        assert!(matches!(load_idx_images(&spec), Err(Error::IdxMagic { .. })));
    }

    #[test]
    fn count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (img, _) = encode_idx(&[0; 8], &[0, 1], 2, 2);
        let (_, lab) = encode_idx(&[0; 12], &[0, 1, 1], 2, 2);
        let spec = pair(dir.path(), &img, &lab);
        assert!(matches!(
            load_idx_images(&spec),
            Err(Error::IdxCountMismatch { images: 2, labels: 3 })
        ));
    }

    #[test]
    fn truncation_detected() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = encode_idx(&[7; 8], &[0, 1], 2, 2);
        for cut in [2, 10, img.len() - 1] {
            let spec = pair(dir.path(), &img[..cut], &lab);
            assert!(matches!(load_idx_images(&spec), Err(Error::IdxTruncated { .. })), "cut {cut}");
        }
        let spec = pair(dir.path(), &img, &lab[..lab.len() - 1]);
        assert!(matches!(load_idx_images(&spec), Err(Error::IdxTruncated { .. })));
    }
}

//! The FFPK container: `"FFPK"` magic, version byte 0x01, a 32-bit
//! little-endian header length, a UTF-8 JSON header describing the arrays,
//! and a payload of 64-bit little-endian IEEE floats (complex values
//! interleaved re, im; arrays row-major). The header stores a CRC-32 of
//! the payload.

use crate::dataset::{DatasetMeta, FarFieldDataset};
use crate::error::{Error, Result};
use crate::gridfield::{make_grid, PotentialRealization, PresetDescriptor, StrengthField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"FFPK";
const VERSION: u8 = 0x01;

/// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
pub fn crc32(data: &[u8]) -> u32 {
    let mut table = [0u32; 256];
    for (i, t) in table.iter_mut().enumerate() {
        let mut c = i as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 { 0xedb8_8320 ^ (c >> 1) } else { c >> 1 };
        }
        *t = c;
    }
    let mut crc = 0xffff_ffffu32;
    for &b in data {
        crc = table[((crc ^ b as u32) & 0xff) as usize] ^ (crc >> 8);
    }
    crc ^ 0xffff_ffff
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl ArrayData {
    fn f64_len(&self) -> usize {
        match self {
            ArrayData::Real(v) => v.len(),
            ArrayData::Complex(v) => 2 * v.len(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ArrayData::Real(_) => "real",
            ArrayData::Complex(_) => "complex",
        }
    }

    fn write_to(&self, out: &mut Vec<u8>) {
        match self {
            ArrayData::Real(v) => {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            ArrayData::Complex(v) => {
                for x in v {
                    out.extend_from_slice(&x.re.to_le_bytes());
                    out.extend_from_slice(&x.im.to_le_bytes());
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NamedArray {
    pub name: String,
    pub data: ArrayData,
}

impl NamedArray {
    pub fn real(name: &str, data: Vec<f64>) -> Self {
        NamedArray {
            name: name.into(),
            data: ArrayData::Real(data),
        }
    }

    pub fn complex(name: &str, data: Vec<Complex64>) -> Self {
        NamedArray {
            name: name.into(),
            data: ArrayData::Complex(data),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ArrayDescriptor {
    name: String,
    kind: String,
    /// Number of f64 slots in the payload (2 per complex entry).
    len: usize,
}

/// Writes a container; re-reading yields bit-identical arrays.
pub fn write_container(path: &Path, header_doc: &Value, arrays: &[NamedArray]) -> Result<()> {
    let mut payload = Vec::new();
    let mut descriptors = Vec::with_capacity(arrays.len());
    for a in arrays {
        descriptors.push(ArrayDescriptor {
            name: a.name.clone(),
            kind: a.data.kind().into(),
            len: a.data.f64_len(),
        });
        a.data.write_to(&mut payload);
    }
    let mut header = header_doc.clone();
    let obj = header
        .as_object_mut()
        .ok_or_else(|| Error::container("bad header", "header must be a JSON object"))?;
    obj.insert("arrays".into(), serde_json::to_value(&descriptors)?);
    obj.insert("crc32".into(), Value::from(crc32(&payload)));
    let header_bytes = serde_json::to_vec(&header)?;

    let mut file = std::fs::File::create(path)?;
    file.write_all(MAGIC)?;
    file.write_all(&[VERSION])?;
    file.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    file.write_all(&header_bytes)?;
    file.write_all(&payload)?;
    Ok(())
}

/// Reads and validates a container.
pub fn read_container(path: &Path) -> Result<(Value, Vec<NamedArray>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 9 || &bytes[0..4] != MAGIC {
        return Err(Error::container("bad magic", format!("{}", path.display())));
    }
    if bytes[4] != VERSION {
        return Err(Error::container(
            "bad version",
            format!("got {}, expected {VERSION}", bytes[4]),
        ));
    }
    let header_len = u32::from_le_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]) as usize;
    let header_end = 9 + header_len;
    if bytes.len() < header_end {
        return Err(Error::container("truncated header", format!("{}", path.display())));
    }
    let header: Value = serde_json::from_slice(&bytes[9..header_end])
        .map_err(|e| Error::container("bad header", e.to_string()))?;
    let descriptors: Vec<ArrayDescriptor> = serde_json::from_value(
        header
            .get("arrays")
            .cloned()
            .ok_or_else(|| Error::container("bad header", "missing arrays"))?,
    )
    .map_err(|e| Error::container("bad header", e.to_string()))?;
    let declared_crc = header
        .get("crc32")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::container("bad header", "missing crc32"))? as u32;

    let payload = &bytes[header_end..];
    let total: usize = descriptors.iter().map(|d| d.len).sum();
    if payload.len() != total * 8 {
        return Err(Error::container(
            "truncated payload",
            format!("{} bytes, expected {}", payload.len(), total * 8),
        ));
    }
    if crc32(payload) != declared_crc {
        return Err(Error::container("checksum mismatch", format!("{}", path.display())));
    }

    let mut arrays = Vec::with_capacity(descriptors.len());
    let mut offset = 0usize;
    for d in descriptors {
        let take = &payload[offset * 8..(offset + d.len) * 8];
        offset += d.len;
        let floats: Vec<f64> = take
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let data = match d.kind.as_str() {
            "real" => ArrayData::Real(floats),
            "complex" => {
                if d.len % 2 != 0 {
                    return Err(Error::container("bad header", "odd complex length"));
                }
                ArrayData::Complex(
                    floats
                        .chunks_exact(2)
                        .map(|c| Complex64::new(c[0], c[1]))
                        .collect(),
                )
            }
            other => {
                return Err(Error::container("bad header", format!("unknown kind {other}")))
            }
        };
        arrays.push(NamedArray { name: d.name, data });
    }
    Ok((header, arrays))
}

fn find_array(arrays: &[NamedArray], name: &str) -> Result<ArrayData> {
    arrays
        .iter()
        .find(|a| a.name == name)
        .map(|a| a.data.clone())
        .ok_or_else(|| Error::container("bad header", format!("missing array {name}")))
}

#[derive(Serialize, Deserialize)]
struct PotentialHeader {
    kind: String,
    grid_n: usize,
    grid_l: f64,
    m: f64,
    seed: u64,
    preset: Option<PresetDescriptor>,
    sup_bound: f64,
    support_radius: f64,
}

/// Potential + strength container.
pub fn save_potential(path: &Path, v: &PotentialRealization) -> Result<()> {
    let grid = v.grid();
    let header = serde_json::to_value(PotentialHeader {
        kind: "potential".into(),
        grid_n: grid.n(),
        grid_l: grid.l_box(),
        m: v.order(),
        seed: v.seed(),
        preset: v.strength().preset().copied(),
        sup_bound: v.strength().sup_bound(),
        support_radius: v.strength().support_radius(),
    })?;
    write_container(
        path,
        &header,
        &[
            NamedArray::real("strength", v.strength().values().to_vec()),
            NamedArray::real("potential", v.values().to_vec()),
        ],
    )
}

pub fn load_potential(path: &Path) -> Result<PotentialRealization> {
    let (header, arrays) = read_container(path)?;
    let h: PotentialHeader = serde_json::from_value(header)
        .map_err(|e| Error::container("bad header", e.to_string()))?;
    if h.kind != "potential" {
        return Err(Error::container("bad header", format!("kind {} != potential", h.kind)));
    }
    let grid = make_grid(h.grid_n, h.grid_l)?;
    let strength = match find_array(&arrays, "strength")? {
        ArrayData::Real(vals) => {
            StrengthField::from_values(grid, vals, h.preset, h.sup_bound, h.support_radius)?
        }
        _ => return Err(Error::container("bad header", "strength must be real")),
    };
    let values = match find_array(&arrays, "potential")? {
        ArrayData::Real(vals) => vals,
        _ => return Err(Error::container("bad header", "potential must be real")),
    };
    PotentialRealization::from_values(strength, h.m, h.seed, values)
}

#[derive(Serialize, Deserialize)]
struct DatasetHeader {
    kind: String,
    meta: DatasetMeta,
    n_dir: usize,
    n_freq: usize,
}

/// Far-field dataset container.
pub fn save_dataset(path: &Path, ds: &FarFieldDataset) -> Result<()> {
    ds.validate()?;
    let header = serde_json::to_value(DatasetHeader {
        kind: "farfield".into(),
        meta: ds.meta.clone(),
        n_dir: ds.n_dir(),
        n_freq: ds.n_freq(),
    })?;
    let dir_flat: Vec<f64> = ds.directions.iter().flat_map(|d| d.to_vec()).collect();
    write_container(
        path,
        &header,
        &[
            NamedArray::real("directions", dir_flat),
            NamedArray::real("frequencies", ds.frequencies.clone()),
            NamedArray::complex("values", ds.values.clone()),
        ],
    )
}

pub fn load_dataset(path: &Path) -> Result<FarFieldDataset> {
    let (header, arrays) = read_container(path)?;
    let h: DatasetHeader = serde_json::from_value(header)
        .map_err(|e| Error::container("bad header", e.to_string()))?;
    if h.kind != "farfield" {
        return Err(Error::container("bad header", format!("kind {} != farfield", h.kind)));
    }
    let directions = match find_array(&arrays, "directions")? {
        ArrayData::Real(flat) => {
            if flat.len() != 3 * h.n_dir {
                return Err(Error::container("truncated payload", "directions length"));
            }
            flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
        }
        _ => return Err(Error::container("bad header", "directions must be real")),
    };
    let frequencies = match find_array(&arrays, "frequencies")? {
        ArrayData::Real(v) => v,
        _ => return Err(Error::container("bad header", "frequencies must be real")),
    };
    let values = match find_array(&arrays, "values")? {
        ArrayData::Complex(v) => v,
        _ => return Err(Error::container("bad header", "values must be complex")),
    };
    let ds = FarFieldDataset {
        directions,
        frequencies,
        values,
        meta: h.meta,
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfield::{strength_preset, synthesize_potential, PresetId};
    use tempdir::scratch_dir;

    mod tempdir {
        use std::path::PathBuf;
        use std::sync::atomic::{AtomicU64, Ordering};

        static COUNTER: AtomicU64 = AtomicU64::new(0);

        /// Per-test scratch directory under the target dir.
        pub fn scratch_dir(tag: &str) -> PathBuf {
            let id = COUNTER.fetch_add(1, Ordering::Relaxed);
            let dir = std::env::temp_dir().join(format!(
                "scatterlab-test-{tag}-{}-{id}",
                std::process::id()
            ));
            std::fs::create_dir_all(&dir).unwrap();
            dir
        }
    }

    #[test]
    fn crc32_known_vector() {
        assert_eq!(crc32(b"123456789"), 0xcbf4_3926);
        assert_eq!(crc32(b""), 0);
    }

    #[test]
    fn roundtrip_is_bit_identical() {
        let dir = scratch_dir("roundtrip");
        let path = dir.join("t.ffpk");
        let mut rng = crate::rng::CounterRng::new(3, 0);
        let complex: Vec<Complex64> = (0..16 * 16 * 16)
            .map(|_| {
                let (a, b) = rng.normal_pair();
                Complex64::new(a, b)
            })
            .collect();
        let real: Vec<f64> = (0..100).map(|_| rng.normal()).collect();
        let header = serde_json::json!({"kind": "test", "note": 7});
        write_container(
            &path,
            &header,
            &[
                NamedArray::complex("c", complex.clone()),
                NamedArray::real("r", real.clone()),
            ],
        )
        .unwrap();
        let (h, arrays) = read_container(&path).unwrap();
        assert_eq!(h.get("note").unwrap().as_i64(), Some(7));
        match (&arrays[0].data, &arrays[1].data) {
            (ArrayData::Complex(c), ArrayData::Real(r)) => {
                assert_eq!(c, &complex);
                assert_eq!(r, &real);
            }
            other => panic!("wrong kinds: {other:?}"),
        }
    }

    #[test]
    fn empty_array_list_is_a_valid_container() {
        let dir = scratch_dir("empty");
        let path = dir.join("empty.ffpk");
        write_container(&path, &serde_json::json!({"kind": "none"}), &[]).unwrap();
        let (_, arrays) = read_container(&path).unwrap();
        assert!(arrays.is_empty());
    }

    #[test]
    fn tampered_payload_fails_checksum() {
        let dir = scratch_dir("tamper");
        let path = dir.join("t.ffpk");
        write_container(
            &path,
            &serde_json::json!({"kind": "test"}),
            &[NamedArray::real("r", vec![1.0, 2.0, 3.0])],
        )
        .unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        match read_container(&path) {
            Err(Error::Container { code, .. }) => assert_eq!(code, "checksum mismatch"),
            other => panic!("expected checksum error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_truncation_have_distinct_codes() {
        let dir = scratch_dir("codes");
        let path = dir.join("t.ffpk");
        write_container(
            &path,
            &serde_json::json!({"kind": "test"}),
            &[NamedArray::real("r", vec![1.0, 2.0])],
        )
        .unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        match read_container(&path) {
            Err(Error::Container { code, .. }) => assert_eq!(code, "bad magic"),
            other => panic!("{other:?}"),
        }

        std::fs::write(&path, &good[..good.len() - 8]).unwrap();
        match read_container(&path) {
            Err(Error::Container { code, .. }) => assert_eq!(code, "truncated payload"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn potential_roundtrip_preserves_bits() {
        let dir = scratch_dir("potential");
        let path = dir.join("v.ffpk");
        let grid = make_grid(16, 0.7).unwrap();
        let h = strength_preset(PresetId::TwoBumps, grid, 1.5, 0.25).unwrap();
        let v = synthesize_potential(&h, 3.1, 99).unwrap();
        save_potential(&path, &v).unwrap();
        let back = load_potential(&path).unwrap();
        assert_eq!(back.values(), v.values());
        assert_eq!(back.strength().values(), v.strength().values());
        assert_eq!(back.order(), v.order());
        assert_eq!(back.seed(), v.seed());
        assert_eq!(back.strength().preset(), v.strength().preset());
    }
}

//! Binary little-endian PLY in the common Gaussian checkpoint layout.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, SymmetricEigen, UnitQuaternion, Vector3};

use super::SceneSource;
use crate::error::{Error, Result};
use crate::model::Gaussian3D;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

struct Element {
    name: String,
    count: usize,
    props: Vec<(String, Scalar)>,
}

impl Element {
    fn stride(&self) -> usize {
        self.props.iter().map(|p| p.1.size()).sum()
    }
}

fn read_header<R: BufRead>(r: &mut R) -> Result<Vec<Element>> {
    let mut line = String::new();
    let next = |r: &mut R, line: &mut String| -> Result<()> {
        line.clear();
        if r.read_line(line)? == 0 {
            return Err(Error::parse("header", "unexpected end of file before end_header"));
        }
        Ok(())
    };
    next(r, &mut line)?;
    if line.trim_end() != "ply" {
        return Err(Error::parse("header", "missing 'ply' magic"));
    }
    let mut format_seen = false;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        next(r, &mut line)?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["end_header"] => break,
            ["format", "binary_little_endian", "1.0"] => format_seen = true,
            ["format", other, ..] => {
                return Err(Error::parse("format", format!("unsupported PLY format '{other}'")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::parse(format!("element {name}"), format!("bad count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            ["property", "list", .., name] => {
                return Err(Error::parse(
                    format!("property {name}"),
                    "list properties are not supported",
                ))
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(format!("property {name}"), "property before any element"))?;
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| Error::parse(format!("property {name}"), format!("unknown type '{ty}'")))?;
                el.props.push((name.to_string(), ty));
            }
            _ => {
                return Err(Error::parse("header", format!("unrecognized line '{}'", line.trim_end())))
            }
        }
    }
    if !format_seen {
        return Err(Error::parse("format", "missing format line"));
    }
    Ok(elements)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Column index of every property the loader needs.
struct Layout {
    xyz: [usize; 3],
    dc: [usize; 3],
    rest: Vec<usize>,
    opacity: usize,
    scale: [usize; 3],
    rot: [usize; 4],
}

impl Layout {
    fn new(el: &Element) -> Result<Self> {
        let index: HashMap<&str, usize> = el.props.iter().enumerate().map(|(i, p)| (p.0.as_str(), i)).collect();
        let get = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::parse(name, "missing vertex property"))
        };
        let rest_count = el.props.iter().filter(|p| p.0.starts_with("f_rest_")).count();
        if ![0, 9, 24, 45].contains(&rest_count) {
            return Err(Error::parse(
                "f_rest",
                format!("{rest_count} coefficients (expected 0, 9, 24 or 45)"),
            ));
        }
        let rest = (0..rest_count)
            .map(|i| get(&format!("f_rest_{i}")))
            .collect::<Result<_>>()?;
        Ok(Self {
            xyz: [get("x")?, get("y")?, get("z")?],
            dc: [get("f_dc_0")?, get("f_dc_1")?, get("f_dc_2")?],
            rest,
            opacity: get("opacity")?,
            scale: [get("scale_0")?, get("scale_1")?, get("scale_2")?],
            rot: [get("rot_0")?, get("rot_1")?, get("rot_2")?, get("rot_3")?],
        })
    }
}

/// Read a checkpoint from any byte stream. Gaussian ids are vertex indices.
pub fn read_ply<R: Read>(reader: R, name: &str) -> Result<SceneSource> {
    let mut r = BufReader::new(reader);
    let elements = read_header(&mut r)?;
    let vi = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::parse("element vertex", "no vertex element"))?;
    for e in &elements[..vi] {
        let skip = (e.count * e.stride()) as u64;
        let copied = std::io::copy(&mut (&mut r).take(skip), &mut std::io::sink())?;
        if copied != skip {
            return Err(Error::parse(format!("element {}", e.name), "truncated payload"));
        }
    }
    let el = &elements[vi];
    let layout = Layout::new(el)?;
    let offsets: Vec<usize> = el
        .props
        .iter()
        .scan(0, |off, p| {
            let o = *off;
            *off += p.1.size();
            Some(o)
        })
        .collect();
    let stride = el.stride();
    let k_rest = layout.rest.len() / 3;
    let mut buf = vec![0u8; stride];
    let mut gaussians = Vec::with_capacity(el.count);
    for v in 0..el.count {
        r.read_exact(&mut buf).map_err(|_| {
            let field = el.props.first().map_or("vertex", |p| p.0.as_str());
            Error::parse(
                format!("vertex {v} ({field}..)"),
                format!("truncated payload: expected {} vertices", el.count),
            )
        })?;
        let f = |i: usize| el.props[i].1.read(&buf[offsets[i]..]);
        let position = Vector3::new(f(layout.xyz[0]), f(layout.xyz[1]), f(layout.xyz[2]));
        let q = nalgebra::Quaternion::new(
            f(layout.rot[0]),
            f(layout.rot[1]),
            f(layout.rot[2]),
            f(layout.rot[3]),
        );
        if !(q.norm() > 0.0 && q.norm().is_finite()) {
            return Err(Error::parse(format!("vertex {v} rot_0..3"), "quaternion has zero or non-finite norm"));
        }
        let rot = UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner();
        let s = Vector3::new(f(layout.scale[0]), f(layout.scale[1]), f(layout.scale[2])).map(f64::exp);
        let cov = rot * Matrix3::from_diagonal(&s.component_mul(&s)) * rot.transpose();
        let cov = 0.5 * (cov + cov.transpose());
        let mut sh = Vec::with_capacity(1 + k_rest);
        sh.push(layout.dc.map(|i| f(i) as f32));
        for k in 0..k_rest {
            sh.push([0, 1, 2].map(|c| f(layout.rest[c * k_rest + k]) as f32));
        }
        let g = Gaussian3D {
            id: v as u32,
            position: position.cast(),
            covariance3d: cov.cast(),
            opacity: sigmoid(f(layout.opacity)) as f32,
            sh,
        };
        g.validate()
            .map_err(|e| Error::parse(format!("vertex {v}"), e.to_string()))?;
        gaussians.push(g);
    }
    Ok(SceneSource::new(name, gaussians))
}

pub fn load_ply(path: &Path) -> Result<SceneSource> {
    let name = path
        .file_stem()
        .map_or_else(|| "scene".to_string(), |s| s.to_string_lossy().into_owned());
    read_ply(File::open(path)?, &name)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Scales and rotation quaternion `(w, x, y, z)` of a covariance.
fn decompose(cov: &Matrix3<f32>) -> ([f64; 3], [f64; 4]) {
    let eig = SymmetricEigen::new(cov.cast::<f64>());
    let mut r = eig.eigenvectors;
    if r.determinant() < 0.0 {
        r.column_mut(2).neg_mut();
    }
    let q = UnitQuaternion::from_matrix(&r);
    let s = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    ([s[0], s[1], s[2]], [q.w, q.i, q.j, q.k])
}

/// Write a scene in checkpoint layout; inverse of [`read_ply`] on its activations.
pub fn write_ply<W: Write>(scene: &SceneSource, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let k = scene.gaussians.first().map_or(1, |g| g.sh.len());
    if scene.gaussians.iter().any(|g| g.sh.len() != k) {
        return Err(Error::usage("all gaussians must share one SH degree to be written"));
    }
    let rest = 3 * (k - 1);
    writeln!(w, "ply\nformat binary_little_endian 1.0\nelement vertex {}", scene.len())?;
    let mut names: Vec<String> = ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
        .map(String::from)
        .to_vec();
    names.extend((0..rest).map(|i| format!("f_rest_{i}")));
    names.extend(
        ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"].map(String::from),
    );
    for n in &names {
        writeln!(w, "property float {n}")?;
    }
    writeln!(w, "end_header")?;
    for g in &scene.gaussians {
        let (s, q) = decompose(&g.covariance3d);
        let mut row: Vec<f32> = vec![g.position.x, g.position.y, g.position.z, 0.0, 0.0, 0.0];
        row.extend(g.sh[0]);
        for c in 0..3 {
            row.extend(g.sh[1..].iter().map(|coef| coef[c]));
        }
        row.push(logit(g.opacity as f64) as f32);
        row.extend(s.map(|v| v.ln() as f32));
        row.extend(q.map(|v| v as f32));
        for v in row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_ply_file(scene: &SceneSource, path: &Path) -> Result<()> {
    write_ply(scene, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(props: &[&str], n: usize) -> Vec<u8> {
        let mut h = format!("ply\nformat binary_little_endian 1.0\nelement vertex {n}\n");
        for p in props {
            h.push_str(&format!("property float {p}\n"));
        }
        h.push_str("end_header\n");
        h.into_bytes()
    }

    const BASIC: [&str; 14] = [
        "x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2", "rot_0",
        "rot_1", "rot_2", "rot_3",
    ];

    fn vertex(values: [f32; 14]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn two_vertices_with_neutral_activations() {
        let mut data = header(&BASIC, 2);
        let v = [1.0, 2.0, 3.0, 0.1, 0.2, 0.3, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        data.extend(vertex(v));
        data.extend(vertex(v));
        let scene = read_ply(&data[..], "t").unwrap();
        assert_eq!(scene.len(), 2);
        let g = &scene.gaussians[0];
        assert_eq!(g.opacity, 0.5);
        assert!((g.covariance3d - Matrix3::identity()).abs().max() < 1e-6);
        assert_eq!(g.sh, vec![[0.1, 0.2, 0.3]]);
        assert_eq!(scene.gaussians[1].id, 1);
    }

    #[test]
    fn missing_property_is_named() {
        let data = header(&BASIC[..13], 0);
        let err = read_ply(&data[..], "t").unwrap_err().to_string();
        assert!(err.contains("rot_3"), "{err}");
    }

    #[test]
    fn truncated_payload_is_reported() {
        let mut data = header(&BASIC, 2);
        data.extend(vertex([1.0; 14]));
        let err = read_ply(&data[..], "t").unwrap_err().to_string();
        assert!(err.contains("vertex 1") && err.contains("truncated"), "{err}");
    }

    #[test]
    fn ascii_format_is_rejected() {
        let data = b"ply\nformat ascii 1.0\nend_header\n";
        let err = read_ply(&data[..], "t").unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field == "format"));
    }

    #[test]
    fn rest_coefficients_are_channel_major() {
        let mut props: Vec<String> = BASIC.iter().map(|s| s.to_string()).collect();
        props.extend((0..9).map(|i| format!("f_rest_{i}")));
        let refs: Vec<&str> = props.iter().map(String::as_str).collect();
        let mut data = header(&refs, 1);
        let mut vals = vec![0.0f32; 23];
        vals[10] = 1.0;
        for i in 0..9 {
            vals[14 + i] = i as f32;
        }
        data.extend(vals.iter().flat_map(|v| v.to_le_bytes()));
        let scene = read_ply(&data[..], "t").unwrap();
        let sh = &scene.gaussians[0].sh;
        assert_eq!(sh.len(), 4);
        assert_eq!(sh[1], [0.0, 3.0, 6.0]);
        assert_eq!(sh[3], [2.0, 5.0, 8.0]);
    }

    #[test]
    fn normals_are_ignored() {
        let mut props = vec!["nx", "ny", "nz"];
        props.extend(BASIC);
        let mut data = header(&props, 1);
        let mut vals = vec![9.0f32, 9.0, 9.0];
        vals.extend([0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        data.extend(vals.iter().flat_map(|v| v.to_le_bytes()));
        let scene = read_ply(&data[..], "t").unwrap();
        assert_eq!(scene.gaussians[0].position.z, 2.0);
    }
}

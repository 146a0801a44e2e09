//! Minimal PLY reader covering ASCII and binary little-endian files.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyScalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PlyScalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlyProperty {
    Scalar { name: String, ty: PlyScalar },
    List { name: String, count: PlyScalar, item: PlyScalar },
}

impl PlyProperty {
    pub fn name(&self) -> &str {
        match self {
            PlyProperty::Scalar { name, .. } | PlyProperty::List { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlyValue {
    Scalar(f64),
    List(Vec<f64>),
}

impl PlyValue {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            PlyValue::Scalar(v) => Some(*v),
            PlyValue::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[f64]> {
        match self {
            PlyValue::List(v) => Some(v),
            PlyValue::Scalar(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlyElement {
    pub name: String,
    pub count: usize,
    pub properties: Vec<PlyProperty>,
    pub rows: Vec<Vec<PlyValue>>,
}

impl PlyElement {
    pub fn property_index(&self, name: &str) -> Option<usize> {
        self.properties.iter().position(|p| p.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlyFile {
    pub format: PlyFormat,
    pub elements: Vec<PlyElement>,
}

impl PlyFile {
    pub fn element(&self, name: &str) -> Option<&PlyElement> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&bytes).map_err(|msg| Error::format(path, msg))
    }

    pub fn parse(bytes: &[u8]) -> std::result::Result<Self, String> {
        let (format, mut elements, body_start) = parse_header(bytes)?;
        let body = &bytes[body_start..];
        match format {
            PlyFormat::Ascii => read_ascii(body, &mut elements)?,
            PlyFormat::BinaryLittleEndian => read_binary(body, &mut elements)?,
        }
        Ok(Self { format, elements })
    }
}

fn parse_header(bytes: &[u8]) -> std::result::Result<(PlyFormat, Vec<PlyElement>, usize), String> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or("missing end_header")?;
    let mut body_start = end + END.len();
    // Header ends at the newline following end_header.
    while body_start < bytes.len() && bytes[body_start] != b'\n' {
        body_start += 1;
    }
    body_start += 1;

    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| "header is not UTF-8")?;
    let mut lines = header.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("ply") {
        return Err("missing ply magic".into());
    }
    let mut format = None;
    let mut elements: Vec<PlyElement> = Vec::new();
    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", ..] => format = Some(PlyFormat::Ascii),
            ["format", "binary_little_endian", ..] => format = Some(PlyFormat::BinaryLittleEndian),
            ["format", other, ..] => return Err(format!("unsupported PLY format '{other}'")),
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => elements.push(PlyElement {
                name: name.to_string(),
                count: count.parse().map_err(|_| format!("bad element count '{count}'"))?,
                properties: Vec::new(),
                rows: Vec::new(),
            }),
            ["property", "list", count, item, name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                el.properties.push(PlyProperty::List {
                    name: name.to_string(),
                    count: PlyScalar::parse(count).ok_or_else(|| format!("unknown type '{count}'"))?,
                    item: PlyScalar::parse(item).ok_or_else(|| format!("unknown type '{item}'"))?,
                });
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                el.properties.push(PlyProperty::Scalar {
                    name: name.to_string(),
                    ty: PlyScalar::parse(ty).ok_or_else(|| format!("unknown type '{ty}'"))?,
                });
            }
            _ => return Err(format!("unrecognized header line '{line}'")),
        }
    }
    Ok((format.ok_or("missing format line")?, elements, body_start.min(bytes.len())))
}

fn read_binary(body: &[u8], elements: &mut [PlyElement]) -> std::result::Result<(), String> {
    let mut offset = 0usize;
    let take = |offset: &mut usize, n: usize| -> std::result::Result<&[u8], String> {
        let slice = body.get(*offset..*offset + n).ok_or("unexpected end of binary payload")?;
        *offset += n;
        Ok(slice)
    };
    for el in elements.iter_mut() {
        el.rows.reserve(el.count);
        for _ in 0..el.count {
            let mut row = Vec::with_capacity(el.properties.len());
            for prop in &el.properties {
                match prop {
                    PlyProperty::Scalar { ty, .. } => {
                        row.push(PlyValue::Scalar(ty.read_le(take(&mut offset, ty.size())?)));
                    }
                    PlyProperty::List { count, item, .. } => {
                        let n = count.read_le(take(&mut offset, count.size())?) as usize;
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            items.push(item.read_le(take(&mut offset, item.size())?));
                        }
                        row.push(PlyValue::List(items));
                    }
                }
            }
            el.rows.push(row);
        }
    }
    Ok(())
}

fn read_ascii(body: &[u8], elements: &mut [PlyElement]) -> std::result::Result<(), String> {
    let text = std::str::from_utf8(body).map_err(|_| "ASCII payload is not UTF-8")?;
    let mut tokens = text.split_whitespace();
    let mut next = || -> std::result::Result<f64, String> {
        let tok = tokens.next().ok_or("unexpected end of ASCII payload")?;
        tok.parse::<f64>().map_err(|_| format!("invalid number '{tok}'"))
    };
    for el in elements.iter_mut() {
        for _ in 0..el.count {
            let mut row = Vec::with_capacity(el.properties.len());
            for prop in &el.properties {
                match prop {
                    PlyProperty::Scalar { .. } => row.push(PlyValue::Scalar(next()?)),
                    PlyProperty::List { .. } => {
                        let n = next()? as usize;
                        let items = (0..n).map(|_| next()).collect::<std::result::Result<_, _>>()?;
                        row.push(PlyValue::List(items));
                    }
                }
            }
            el.rows.push(row);
        }
    }
    Ok(())
}

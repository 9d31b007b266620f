//! PLY parsing: header, then an ASCII or binary little-endian body.

use byteorder::{ByteOrder, LittleEndian};

use super::{ElementDef, Format, Header, PlyData, PropKind, PropertyDef, ScalarType};
use crate::cloud::PointCloud;
use crate::error::{CoreError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

fn parse_err(line: usize, msg: impl Into<String>) -> CoreError {
    CoreError::PlyParse {
        line,
        msg: msg.into(),
    }
}

/// Splits the header (text lines up to and including `end_header`) from the
/// body and parses the element/property declarations.
fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut elements: Vec<ElementDef> = Vec::new();
    let mut format = None;
    let mut offset = 0usize;
    let mut line_no = 0usize;

    loop {
        if offset >= bytes.len() {
            return Err(parse_err(line_no + 1, "missing end_header"));
        }
        let rest = &bytes[offset..];
        let line_end = rest
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| offset + p)
            .unwrap_or(bytes.len());
        let raw = &bytes[offset..line_end];
        let next_offset = (line_end + 1).min(bytes.len() + 1);
        line_no += 1;

        let line = std::str::from_utf8(raw)
            .map_err(|_| parse_err(line_no, "header line is not valid UTF-8"))?
            .trim_end_matches('\r')
            .trim();

        if line_no == 1 {
            if line != "ply" {
                return Err(parse_err(1, format!("expected magic \"ply\", found {line:?}")));
            }
            offset = next_offset;
            continue;
        }

        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or("");
        match keyword {
            "format" => {
                let kind = tokens.next().unwrap_or("");
                let version = tokens.next().unwrap_or("");
                if version != "1.0" {
                    return Err(parse_err(
                        line_no,
                        format!("unsupported PLY version {version:?} (only 1.0)"),
                    ));
                }
                format = Some(match kind {
                    "ascii" => Format::Ascii,
                    "binary_little_endian" => Format::BinaryLittleEndian,
                    "binary_big_endian" => {
                        return Err(CoreError::PlyUnsupported(
                            "binary_big_endian is not supported".into(),
                        ))
                    }
                    other => {
                        return Err(parse_err(line_no, format!("unknown format {other:?}")))
                    }
                });
            }
            "comment" | "obj_info" => {}
            "element" => {
                let name = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "element declaration missing name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| {
                        parse_err(line_no, "element declaration missing a valid count")
                    })?;
                elements.push(ElementDef {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let element = elements.last_mut().ok_or_else(|| {
                    parse_err(line_no, "property declared before any element")
                })?;
                let first = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "property missing type"))?;
                let kind = if first == "list" {
                    let count_ty = tokens
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| parse_err(line_no, "list property has invalid count type"))?;
                    let item_ty = tokens
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| parse_err(line_no, "list property has invalid item type"))?;
                    if !count_ty.is_integer() {
                        return Err(parse_err(line_no, "list count type must be an integer"));
                    }
                    PropKind::List {
                        count: count_ty,
                        item: item_ty,
                    }
                } else {
                    PropKind::Scalar(ScalarType::parse(first).ok_or_else(|| {
                        parse_err(line_no, format!("unknown property type {first:?}"))
                    })?)
                };
                let name = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "property missing name"))?;
                if element.properties.iter().any(|p| p.name == name) {
                    return Err(parse_err(line_no, format!("duplicate property {name:?}")));
                }
                element.properties.push(PropertyDef {
                    name: name.to_string(),
                    kind,
                });
            }
            "end_header" => {
                let format = format
                    .ok_or_else(|| parse_err(line_no, "end_header before a format line"))?;
                return Ok(Header {
                    format,
                    elements,
                    body_offset: next_offset.min(bytes.len()),
                    header_lines: line_no,
                });
            }
            "" => return Err(parse_err(line_no, "empty header line")),
            other => {
                return Err(parse_err(line_no, format!("unknown header keyword {other:?}")))
            }
        }
        offset = next_offset;
    }
}

/// Sequential reader over the body, abstracting ASCII tokens vs binary bytes.
enum Body<'a> {
    Ascii {
        /// Remaining body text.
        rest: &'a str,
        /// 1-based line number of the next line to read.
        next_line: usize,
        /// Tokens of the current line.
        tokens: std::str::SplitWhitespace<'a>,
        /// Line number of the current line (for error messages).
        current_line: usize,
    },
    Binary {
        bytes: &'a [u8],
        cursor: usize,
    },
}

impl<'a> Body<'a> {
    fn new(bytes: &'a [u8], header: &Header) -> Result<Self> {
        let body = &bytes[header.body_offset.min(bytes.len())..];
        Ok(match header.format {
            Format::Ascii => Body::Ascii {
                rest: std::str::from_utf8(body).map_err(|_| {
                    parse_err(header.header_lines + 1, "ASCII body is not valid UTF-8")
                })?,
                next_line: header.header_lines + 1,
                tokens: "".split_whitespace(),
                current_line: header.header_lines,
            },
            Format::BinaryLittleEndian => Body::Binary {
                bytes: body,
                cursor: 0,
            },
        })
    }

    /// Begins one element instance. In ASCII each instance occupies one
    /// (non-blank) line.
    fn begin_instance(&mut self, element: &str) -> Result<()> {
        match self {
            Body::Ascii {
                rest,
                next_line,
                tokens,
                current_line,
            } => loop {
                if rest.is_empty() {
                    return Err(CoreError::PlyTruncated(format!(
                        "body ended while reading element {element:?}"
                    )));
                }
                let (line, remainder) = match rest.find('\n') {
                    Some(pos) => (&rest[..pos], &rest[pos + 1..]),
                    None => (*rest, ""),
                };
                *rest = remainder;
                *current_line = *next_line;
                *next_line += 1;
                let line = line.trim();
                if !line.is_empty() {
                    *tokens = line.split_whitespace();
                    return Ok(());
                }
            },
            Body::Binary { .. } => Ok(()),
        }
    }

    /// Finishes one instance; in ASCII, rejects trailing tokens on the line.
    fn end_instance(&mut self, element: &str) -> Result<()> {
        if let Body::Ascii {
            tokens,
            current_line,
            ..
        } = self
        {
            if tokens.next().is_some() {
                return Err(parse_err(
                    *current_line,
                    format!("too many values on a line of element {element:?}"),
                ));
            }
        }
        Ok(())
    }

    fn next_token(&mut self) -> Result<&'a str> {
        match self {
            Body::Ascii {
                tokens,
                current_line,
                ..
            } => tokens
                .next()
                .ok_or_else(|| parse_err(*current_line, "line has too few values")),
            Body::Binary { .. } => unreachable!("token reads only occur in ASCII mode"),
        }
    }

    fn take_bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        match self {
            Body::Binary { bytes, cursor } => {
                if *cursor + n > bytes.len() {
                    return Err(CoreError::PlyTruncated(format!(
                        "binary body ended early: needed {} bytes at offset {}, have {}",
                        n,
                        cursor,
                        bytes.len()
                    )));
                }
                let slice = &bytes[*cursor..*cursor + n];
                *cursor += n;
                Ok(slice)
            }
            Body::Ascii { .. } => unreachable!("byte reads only occur in binary mode"),
        }
    }

    /// Reads one scalar of the given type, widened to f64.
    fn read_scalar(&mut self, ty: ScalarType) -> Result<f64> {
        match self {
            Body::Ascii { current_line, .. } => {
                let line = *current_line;
                let token = self.next_token()?;
                let parse_int = |t: &str| -> Result<f64> {
                    t.parse::<i64>().map(|v| v as f64).map_err(|_| {
                        parse_err(line, format!("expected an integer, found {t:?}"))
                    })
                };
                match ty {
                    ScalarType::F32 | ScalarType::F64 => {
                        token.parse::<f64>().map_err(|_| {
                            parse_err(line, format!("expected a number, found {token:?}"))
                        })
                    }
                    _ => parse_int(token),
                }
            }
            Body::Binary { .. } => Ok(match ty {
                ScalarType::I8 => self.take_bytes(1)?[0] as i8 as f64,
                ScalarType::U8 => self.take_bytes(1)?[0] as f64,
                ScalarType::I16 => LittleEndian::read_i16(self.take_bytes(2)?) as f64,
                ScalarType::U16 => LittleEndian::read_u16(self.take_bytes(2)?) as f64,
                ScalarType::I32 => LittleEndian::read_i32(self.take_bytes(4)?) as f64,
                ScalarType::U32 => LittleEndian::read_u32(self.take_bytes(4)?) as f64,
                ScalarType::F32 => LittleEndian::read_f32(self.take_bytes(4)?) as f64,
                ScalarType::F64 => LittleEndian::read_f64(self.take_bytes(8)?),
            }),
        }
    }

    /// Reads and discards one property value (scalar or list).
    fn skip_property(&mut self, kind: &PropKind) -> Result<()> {
        match kind {
            PropKind::Scalar(ty) => {
                self.read_scalar(*ty)?;
            }
            PropKind::List { count, item } => {
                let n = self.read_scalar(*count)? as usize;
                for _ in 0..n {
                    self.read_scalar(*item)?;
                }
            }
        }
        Ok(())
    }
}

/// Where each recognized vertex property routes.
#[derive(Clone, Copy)]
enum VertexSlot {
    X,
    Y,
    Z,
    Red,
    Green,
    Blue,
    Nx,
    Ny,
    Nz,
    Skip,
}

fn classify_vertex_properties(element: &ElementDef) -> Result<Vec<VertexSlot>> {
    let mut slots = Vec::with_capacity(element.properties.len());
    let has = |name: &str| element.properties.iter().any(|p| p.name == name);
    let colors_complete = has("red") && has("green") && has("blue");
    let normals_complete = has("nx") && has("ny") && has("nz");

    for prop in &element.properties {
        let slot = match (&prop.kind, prop.name.as_str()) {
            (PropKind::Scalar(ty), "x") if ty.is_float() => VertexSlot::X,
            (PropKind::Scalar(ty), "y") if ty.is_float() => VertexSlot::Y,
            (PropKind::Scalar(ty), "z") if ty.is_float() => VertexSlot::Z,
            (PropKind::Scalar(ty), name @ ("x" | "y" | "z")) => {
                return Err(CoreError::PlyUnsupported(format!(
                    "vertex property {name} must be float32/float64, found {ty:?}"
                )))
            }
            (PropKind::Scalar(ScalarType::U8), "red") if colors_complete => VertexSlot::Red,
            (PropKind::Scalar(ScalarType::U8), "green") if colors_complete => VertexSlot::Green,
            (PropKind::Scalar(ScalarType::U8), "blue") if colors_complete => VertexSlot::Blue,
            (PropKind::Scalar(ty), "nx") if normals_complete && ty.is_float() => VertexSlot::Nx,
            (PropKind::Scalar(ty), "ny") if normals_complete && ty.is_float() => VertexSlot::Ny,
            (PropKind::Scalar(ty), "nz") if normals_complete && ty.is_float() => VertexSlot::Nz,
            _ => VertexSlot::Skip,
        };
        slots.push(slot);
    }

    for required in ["x", "y", "z"] {
        if !has(required) {
            return Err(CoreError::PlyUnsupported(format!(
                "vertex element lacks required property {required:?}"
            )));
        }
    }
    Ok(slots)
}

struct VertexData<T> {
    points: Vec<Vec3<T>>,
    colors: Option<Vec<[u8; 3]>>,
    normals: Option<Vec<Vec3<T>>>,
}

fn read_vertices<T: Real>(
    body: &mut Body,
    element: &ElementDef,
    slots: &[VertexSlot],
) -> Result<VertexData<T>> {
    let has_colors = slots.iter().any(|s| matches!(s, VertexSlot::Red));
    let has_normals = slots.iter().any(|s| matches!(s, VertexSlot::Nx));
    let mut points = Vec::with_capacity(element.count);
    let mut colors = has_colors.then(|| Vec::with_capacity(element.count));
    let mut normals = has_normals.then(|| Vec::with_capacity(element.count));

    for _ in 0..element.count {
        body.begin_instance("vertex")?;
        let mut p = Vec3::<T>::zero();
        let mut rgb = [0u8; 3];
        let mut n = Vec3::<T>::zero();
        for (prop, slot) in element.properties.iter().zip(slots) {
            match slot {
                VertexSlot::Skip => body.skip_property(&prop.kind)?,
                _ => {
                    let ty = match &prop.kind {
                        PropKind::Scalar(ty) => *ty,
                        PropKind::List { .. } => unreachable!("recognized slots are scalar"),
                    };
                    let v = body.read_scalar(ty)?;
                    match slot {
                        VertexSlot::X => p.x = T::of(v),
                        VertexSlot::Y => p.y = T::of(v),
                        VertexSlot::Z => p.z = T::of(v),
                        VertexSlot::Red => rgb[0] = v as u8,
                        VertexSlot::Green => rgb[1] = v as u8,
                        VertexSlot::Blue => rgb[2] = v as u8,
                        VertexSlot::Nx => n.x = T::of(v),
                        VertexSlot::Ny => n.y = T::of(v),
                        VertexSlot::Nz => n.z = T::of(v),
                        VertexSlot::Skip => unreachable!(),
                    }
                }
            }
        }
        body.end_instance("vertex")?;
        points.push(p);
        if let Some(colors) = &mut colors {
            colors.push(rgb);
        }
        if let Some(normals) = &mut normals {
            normals.push(n);
        }
    }
    Ok(VertexData {
        points,
        colors,
        normals,
    })
}

fn read_faces(
    body: &mut Body,
    element: &ElementDef,
    vertex_count: usize,
) -> Result<Vec<[u32; 3]>> {
    let mut triangles = Vec::with_capacity(element.count);
    for _ in 0..element.count {
        body.begin_instance("face")?;
        for prop in &element.properties {
            let is_indices = matches!(prop.name.as_str(), "vertex_indices" | "vertex_index");
            match (&prop.kind, is_indices) {
                (PropKind::List { count, item }, true) => {
                    if !item.is_integer() {
                        return Err(CoreError::PlyUnsupported(
                            "face vertex indices must be an integer list".into(),
                        ));
                    }
                    let n = body.read_scalar(*count)? as usize;
                    if n < 3 {
                        return Err(CoreError::PlyTruncated(format!(
                            "face with {n} vertices (need at least 3)"
                        )));
                    }
                    let mut polygon = Vec::with_capacity(n);
                    for _ in 0..n {
                        let idx = body.read_scalar(*item)?;
                        if idx < 0.0 || idx >= vertex_count as f64 {
                            return Err(CoreError::PlyTruncated(format!(
                                "face references vertex {idx} but only {vertex_count} exist"
                            )));
                        }
                        polygon.push(idx as u32);
                    }
                    // Fan triangulation for polygons beyond triangles.
                    for i in 1..n - 1 {
                        triangles.push([polygon[0], polygon[i], polygon[i + 1]]);
                    }
                }
                _ => body.skip_property(&prop.kind)?,
            }
        }
        body.end_instance("face")?;
    }
    Ok(triangles)
}

/// Parses PLY bytes into a point cloud or (when a face element is declared)
/// a welded triangle mesh.
pub fn read_ply<T: Real>(bytes: &[u8]) -> Result<PlyData<T>> {
    let header = parse_header(bytes)?;
    let mut body = Body::new(bytes, &header)?;

    let mut vertices: Option<VertexData<T>> = None;
    let mut faces: Option<Vec<[u32; 3]>> = None;
    let mut has_face_element = false;

    for element in &header.elements {
        match element.name.as_str() {
            "vertex" => {
                let slots = classify_vertex_properties(element)?;
                vertices = Some(read_vertices(&mut body, element, &slots)?);
            }
            "face" => {
                has_face_element = true;
                let vertex_count = vertices.as_ref().map(|v| v.points.len()).unwrap_or(0);
                faces = Some(read_faces(&mut body, element, vertex_count)?);
            }
            _ => {
                // Unknown element: skip all its instances.
                for _ in 0..element.count {
                    body.begin_instance(&element.name)?;
                    for prop in &element.properties {
                        body.skip_property(&prop.kind)?;
                    }
                    body.end_instance(&element.name)?;
                }
            }
        }
    }

    let vertices = vertices.ok_or_else(|| {
        CoreError::PlyUnsupported("file has no vertex element".into())
    })?;

    if has_face_element {
        let mesh = TriangleMesh::new(vertices.points, faces.unwrap_or_default());
        let tol = mesh.default_weld_tolerance();
        let mesh = mesh.weld(tol);
        mesh.validate()?;
        Ok(PlyData::Mesh(mesh))
    } else {
        let cloud = PointCloud {
            points: vertices.points,
            colors: vertices.colors,
            normals: vertices.normals,
        };
        cloud.validate()?;
        Ok(PlyData::Cloud(cloud))
    }
}

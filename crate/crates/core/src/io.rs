//! Line-oriented text format for marked and unmarked meshes.
//!
//! ```text
//! nbisect-mesh 1
//! dimension <n>
//! vertices <N>
//! <multi-id ints> : <root ints> : <n coordinates>      (N lines, ascending multi-id)
//! elements <M>
//! unmarked <n+1 vertex refs>
//! tree <level> <n+1 refs> | <reflected refs> | <a>,<b> ...   (tree edges in preorder)
//! maubach <level> <tag> <n+1 refs>
//! end
//! ```
//!
//! A vertex reference is the 0-based position of the vertex in the vertex
//! section. Coordinates use the shortest representation that parses back
//! to the same `f64`. Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::bisect::{MaubachSimplex, TreeSimplex};
use crate::error::{Error, Result};
use crate::marking::BisectionTree;
use crate::mesh::{Element, GlobalEdge, Mesh, MultiId, Simplex, VertexTable};

const MAGIC: &str = "nbisect-mesh";
const VERSION: u32 = 1;

/// Serializes `mesh` to the text format.
pub fn write_mesh_string(mesh: &Mesh) -> Result<String> {
    let ids = mesh.vertices().sorted_ids();
    let index: HashMap<&MultiId, usize> = ids.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let r = |v: &MultiId| index[v];
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");

    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    writeln!(out, "dimension {}", mesh.dim()).unwrap();
    writeln!(out, "vertices {}", ids.len()).unwrap();
    for id in &ids {
        let rec = mesh.vertices().get(id)?;
        writeln!(
            out,
            "{} : {} : {}",
            join(&mut id.ids().iter().map(u32::to_string)),
            join(&mut rec.roots.ids().iter().map(u32::to_string)),
            join(&mut rec.coords.iter().map(f64::to_string)),
        )
        .unwrap();
    }
    writeln!(out, "elements {}", mesh.element_count()).unwrap();
    let refs = |s: &Simplex| join(&mut s.vertices().iter().map(|v| r(v).to_string()));
    for e in mesh.elements() {
        match e {
            Element::Unmarked(s) => writeln!(out, "unmarked {}", refs(s)),
            Element::Tree(t) => writeln!(
                out,
                "tree {} {} | {} | {}",
                t.level,
                refs(&t.simplex),
                join(&mut t.reflected.iter().map(|v| r(v).to_string())),
                join(&mut t.tree.preorder().into_iter().map(|e| format!("{},{}", r(e.a()), r(e.b())))),
            ),
            Element::Maubach(m) => writeln!(out, "maubach {} {} {}", m.level, m.tag, refs(&m.simplex)),
        }
        .unwrap();
    }
    out.push_str("end\n");
    Ok(out)
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh)?)?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    read_mesh_str(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    /// Next meaningful line with its 1-based number.
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok((i + 1, t));
            }
        }
        Err(parse_err(self.last + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

fn keyed<T: std::str::FromStr>(lines: &mut Lines, key: &str) -> Result<(usize, T)> {
    let (no, line) = lines.next(key)?;
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(parse_err(no, format!("expected '{key} <value>'")));
    }
    let v = it.next().ok_or_else(|| parse_err(no, format!("missing value after '{key}'")))?;
    if it.next().is_some() {
        return Err(parse_err(no, "trailing tokens"));
    }
    Ok((no, parse(no, v, key)?))
}

fn int_list(no: usize, text: &str) -> Result<Vec<u32>> {
    text.split_whitespace().map(|t| parse(no, t, "integer")).collect()
}

/// Parses the text format.
pub fn read_mesh_str(text: &str) -> Result<Mesh> {
    let mut lines = Lines::new(text);
    let (no, header) = lines.next("header")?;
    match header.split_whitespace().collect::<Vec<_>>()[..] {
        [MAGIC, v] if parse::<u32>(no, v, "version")? == VERSION => {}
        [MAGIC, v] => return Err(parse_err(no, format!("unsupported format version {v}"))),
        _ => return Err(parse_err(no, format!("expected '{MAGIC} {VERSION}'"))),
    }
    let (no, dim): (usize, usize) = keyed(&mut lines, "dimension")?;
    if dim == 0 {
        return Err(parse_err(no, "dimension must be at least 1"));
    }
    let (_, nv): (usize, usize) = keyed(&mut lines, "vertices")?;

    let mut table = VertexTable::new(dim);
    let mut ids = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = lines.next("vertex record")?;
        let parts: Vec<&str> = line.split(':').collect();
        if parts.len() != 3 {
            return Err(parse_err(no, "vertex record needs 'ids : roots : coordinates'"));
        }
        let id = MultiId::from_ids(int_list(no, parts[0])?).map_err(|_| parse_err(no, "empty multi-id"))?;
        let roots = MultiId::from_ids(int_list(no, parts[1])?).map_err(|_| parse_err(no, "empty root list"))?;
        let coords: Vec<f64> = parts[2]
            .split_whitespace()
            .map(|t| parse(no, t, "coordinate"))
            .collect::<Result<_>>()?;
        if coords.len() != dim {
            return Err(parse_err(
                no,
                format!("dimension mismatch: expected {dim} coordinates, found {}", coords.len()),
            ));
        }
        if table.contains(&id) {
            return Err(parse_err(no, format!("duplicate vertex {id}")));
        }
        table.insert_with_roots(id.clone(), coords, roots)?;
        ids.push(id);
    }

    let (_, ne): (usize, usize) = keyed(&mut lines, "elements")?;
    let vref = |no: usize, t: &str| -> Result<MultiId> {
        let i: usize = parse(no, t, "vertex reference")?;
        ids.get(i)
            .cloned()
            .ok_or_else(|| parse_err(no, format!("vertex reference {i} out of range")))
    };
    let simplex = |no: usize, toks: &[&str]| -> Result<Simplex> {
        if toks.len() != dim + 1 {
            return Err(parse_err(
                no,
                format!("dimension mismatch: expected {} vertices, found {}", dim + 1, toks.len()),
            ));
        }
        let vs = toks.iter().map(|t| vref(no, t)).collect::<Result<Vec<_>>>()?;
        Simplex::new(vs).map_err(|e| parse_err(no, e.to_string()))
    };

    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (no, line) = lines.next("element record")?;
        let (kind, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let element = match kind {
            "unmarked" => Element::Unmarked(simplex(no, &rest.split_whitespace().collect::<Vec<_>>())?),
            "maubach" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() < 2 {
                    return Err(parse_err(no, "maubach record needs level and tag"));
                }
                let level = parse(no, toks[0], "level")?;
                let tag: usize = parse(no, toks[1], "tag")?;
                if tag == 0 || tag > dim {
                    return Err(parse_err(no, format!("tag {tag} outside 1..={dim}")));
                }
                Element::Maubach(MaubachSimplex {
                    simplex: simplex(no, &toks[2..])?,
                    tag,
                    level,
                })
            }
            "tree" => {
                let parts: Vec<&str> = rest.split('|').collect();
                if parts.len() != 3 {
                    return Err(parse_err(no, "tree record needs 'level vertices | reflected | edges'"));
                }
                let head: Vec<&str> = parts[0].split_whitespace().collect();
                let level: usize = parse(no, head.first().copied().unwrap_or(""), "level")?;
                if level >= dim {
                    return Err(parse_err(no, format!("tree level {level} must be below {dim}")));
                }
                let s = simplex(no, &head[1..])?;
                let reflected = parts[1]
                    .split_whitespace()
                    .map(|t| vref(no, t))
                    .collect::<Result<Vec<_>>>()?;
                if reflected.len() != level {
                    return Err(parse_err(no, "reflected list length must equal the level"));
                }
                let edges = parts[2]
                    .split_whitespace()
                    .map(|t| {
                        let (a, b) = t
                            .split_once(',')
                            .ok_or_else(|| parse_err(no, format!("invalid edge '{t}'")))?;
                        GlobalEdge::new(vref(no, a)?, vref(no, b)?).map_err(|e| parse_err(no, e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let tree = BisectionTree::from_preorder(&edges, dim - level).map_err(|e| parse_err(no, e.to_string()))?;
                Element::Tree(TreeSimplex {
                    simplex: s,
                    reflected,
                    tree,
                    level,
                })
            }
            other => return Err(parse_err(no, format!("unknown element kind '{other}'"))),
        };
        elements.push(element);
    }
    let (no, line) = lines.next("'end'")?;
    if line != "end" {
        return Err(parse_err(no, "expected 'end'"));
    }
    if let Ok((no, _)) = lines.next("") {
        return Err(parse_err(no, "content after 'end'"));
    }
    Mesh::from_parts(table, elements)
}

// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use thiserror::Error;

use super::{path_outlines, Affine, FlatPolygon};
use crate::gdsii::{GdsElement, GdsLibrary, LayerKey};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlattenError {
    #[error("top structure {0:?} not found")]
    MissingTop(String),
    #[error("structure {from:?} references undefined structure {target:?}")]
    Dangling { from: String, target: String },
    #[error("reference cycle through structure {0:?}")]
    Cycle(String),
}

/// Flattens everything reachable from `top` into layer-tagged polygons.
/// `key = None` keeps all layers.
pub fn flatten(
    lib: &GdsLibrary,
    top: &str,
    key: Option<LayerKey>,
) -> Result<Vec<FlatPolygon>, FlattenError> {
    let mut out = Vec::new();
    flatten_each(lib, top, key, |p| out.push(p))?;
    Ok(out)
}

/// Streaming form of [`flatten`]: hands each polygon to `sink` as it is
/// produced. The hierarchy is validated before anything is emitted.
pub fn flatten_each(
    lib: &GdsLibrary,
    top: &str,
    key: Option<LayerKey>,
    mut sink: impl FnMut(FlatPolygon),
) -> Result<(), FlattenError> {
    let index: HashMap<&str, usize> = lib
        .structures
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let root = *index
        .get(top)
        .ok_or_else(|| FlattenError::MissingTop(top.to_owned()))?;

    let children = resolve_children(lib, &index);
    check_reachable(lib, &children, root)?;

    let walker = Walker {
        lib,
        children: &children,
        key,
    };
    walker.visit(root, &Affine::IDENTITY, &mut sink);
    Ok(())
}

/// Per structure, the target index of each reference element in element
/// order; `None` for names that do not resolve.
fn resolve_children(lib: &GdsLibrary, index: &HashMap<&str, usize>) -> Vec<Vec<Option<usize>>> {
    lib.structures
        .iter()
        .map(|s| {
            s.elements
                .iter()
                .filter_map(|e| match e {
                    GdsElement::SRef(r) => Some(&r.target),
                    GdsElement::ARef(a) => Some(&a.target),
                    _ => None,
                })
                .map(|t| index.get(t.as_str()).copied())
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    New,
    OnStack,
    Done,
}

/// Depth-first walk over everything reachable from `root`, rejecting
/// dangling names and cycles.
fn check_reachable(
    lib: &GdsLibrary,
    children: &[Vec<Option<usize>>],
    root: usize,
) -> Result<(), FlattenError> {
    let mut mark = vec![Mark::New; children.len()];
    let mut stack = vec![(root, 0usize)];
    mark[root] = Mark::OnStack;
    while let Some(top) = stack.last_mut() {
        let (node, pos) = *top;
        let Some(&slot) = children[node].get(pos) else {
            mark[node] = Mark::Done;
            stack.pop();
            continue;
        };
        top.1 += 1;
        let child = slot.ok_or_else(|| {
            let target = lib.structures[node]
                .elements
                .iter()
                .filter_map(|e| match e {
                    GdsElement::SRef(r) => Some(&r.target),
                    GdsElement::ARef(a) => Some(&a.target),
                    _ => None,
                })
                .nth(pos)
                .cloned()
                .unwrap_or_default();
            FlattenError::Dangling {
                from: lib.structures[node].name.clone(),
                target,
            }
        })?;
        match mark[child] {
            Mark::OnStack => return Err(FlattenError::Cycle(lib.structures[child].name.clone())),
            Mark::New => {
                mark[child] = Mark::OnStack;
                stack.push((child, 0));
            }
            Mark::Done => {}
        }
    }
    Ok(())
}

struct Walker<'a> {
    lib: &'a GdsLibrary,
    children: &'a [Vec<Option<usize>>],
    key: Option<LayerKey>,
}

impl Walker<'_> {
    fn visit(&self, idx: usize, xf: &Affine, sink: &mut impl FnMut(FlatPolygon)) {
        let s = &self.lib.structures[idx];
        let mut child = self.children[idx].iter();
        for e in &s.elements {
            match e {
                GdsElement::Boundary(b) => {
                    if self.key.is_none_or(|k| k == b.key) {
                        let pts = b
                            .points
                            .iter()
                            .map(|p| xf.apply_round(p.x as f64, p.y as f64))
                            .collect();
                        if let Some(poly) = FlatPolygon::new(b.key, pts) {
                            sink(poly);
                        }
                    }
                }
                GdsElement::Path(p) => {
                    if self.key.is_none_or(|k| k == p.key) {
                        for outline in path_outlines(p) {
                            let pts = outline.iter().map(|&(x, y)| xf.apply_round(x, y)).collect();
                            if let Some(poly) = FlatPolygon::new(p.key, pts) {
                                sink(poly);
                            }
                        }
                    }
                }
                GdsElement::SRef(r) => {
                    let target = child.next().copied().flatten().expect("resolved");
                    let inner = xf.then_inner(&Affine::from_gds(&r.transform));
                    self.visit(target, &inner, sink);
                }
                GdsElement::ARef(a) => {
                    let target = child.next().copied().flatten().expect("resolved");
                    let base = Affine::from_gds(&a.transform);
                    for r in 0..a.rows as i64 {
                        for c in 0..a.cols as i64 {
                            let offset = Affine::translation(
                                (c * a.col_step.x + r * a.row_step.x) as f64,
                                (c * a.col_step.y + r * a.row_step.y) as f64,
                            );
                            let inner = xf.then_inner(&offset.then_inner(&base));
                            self.visit(target, &inner, sink);
                        }
                    }
                }
                GdsElement::Other(_) => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::{Point, Rect};
    use crate::gdsii::{ARef, Boundary, GdsStructure, GdsTransform, GdsUnits, SRef};

    const L: LayerKey = LayerKey::new(1, 0);

    fn rect_el(r: Rect) -> GdsElement {
        GdsElement::Boundary(Boundary {
            key: L,
            points: r.corners().to_vec(),
        })
    }

    fn sref(target: &str, t: GdsTransform) -> GdsElement {
        GdsElement::SRef(SRef {
            target: target.into(),
            transform: t,
        })
    }

    fn lib(structs: Vec<(&str, Vec<GdsElement>)>) -> GdsLibrary {
        let mut l = GdsLibrary::new("T", GdsUnits::default());
        for (n, els) in structs {
            let mut s = GdsStructure::new(n);
            s.elements = els;
            l.structures.push(s);
        }
        l
    }

    #[test]
    fn single_rect() {
        let l = lib(vec![("TOP", vec![rect_el(Rect::new(0, 0, 10, 20))])]);
        let polys = flatten(&l, "TOP", None).unwrap();
        assert_eq!(polys.len(), 1);
        assert_eq!(polys[0].bbox, Rect::new(0, 0, 10, 20));
    }

    #[test]
    fn array_reference_lattice() {
        let l = lib(vec![
            ("CELL", vec![rect_el(Rect::new(0, 0, 10, 10))]),
            (
                "TOP",
                vec![GdsElement::ARef(ARef {
                    target: "CELL".into(),
                    transform: GdsTransform::translate(100, 200),
                    cols: 2,
                    rows: 3,
                    col_step: Point::new(50, 0),
                    row_step: Point::new(0, 40),
                })],
            ),
        ]);
        let mut origins: Vec<_> = flatten(&l, "TOP", None)
            .unwrap()
            .iter()
            .map(|p| (p.bbox.x0, p.bbox.y0))
            .collect();
        origins.sort();
        assert_eq!(
            origins,
            vec![
                (100, 200),
                (100, 240),
                (100, 280),
                (150, 200),
                (150, 240),
                (150, 280)
            ]
        );
    }

    #[test]
    fn nested_quarter_turns_equal_half_turn() {
        let rot = |deg| GdsTransform {
            angle_deg: deg,
            ..GdsTransform::default()
        };
        let cell = ("CELL", vec![rect_el(Rect::new(3, 5, 40, 17))]);
        let nested = lib(vec![
            cell.clone(),
            ("MID", vec![sref("CELL", rot(90.0))]),
            ("TOP", vec![sref("MID", rot(90.0))]),
        ]);
        let direct = lib(vec![cell, ("TOP", vec![sref("CELL", rot(180.0))])]);
        let mut a = flatten(&nested, "TOP", None).unwrap()[0].vertices.clone();
        let mut b = flatten(&direct, "TOP", None).unwrap()[0].vertices.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn dangling_and_cycle_detected() {
        let dangling = lib(vec![("TOP", vec![sref("NOPE", GdsTransform::default())])]);
        assert!(matches!(
            flatten(&dangling, "TOP", None),
            Err(FlattenError::Dangling { .. })
        ));
        let cyc = lib(vec![
            ("A", vec![sref("B", GdsTransform::default())]),
            ("B", vec![sref("A", GdsTransform::default())]),
            ("TOP", vec![sref("A", GdsTransform::default())]),
        ]);
        assert!(matches!(
            flatten(&cyc, "TOP", None),
            Err(FlattenError::Cycle(_))
        ));
        assert!(matches!(
            flatten(&cyc, "X", None),
            Err(FlattenError::MissingTop(_))
        ));
    }

    #[test]
    fn layer_filter() {
        let other = GdsElement::Boundary(Boundary {
            key: LayerKey::new(2, 0),
            points: Rect::new(0, 0, 5, 5).corners().to_vec(),
        });
        let l = lib(vec![("TOP", vec![rect_el(Rect::new(0, 0, 1, 1)), other])]);
        assert_eq!(
            flatten(&l, "TOP", Some(LayerKey::new(2, 0))).unwrap().len(),
            1
        );
        assert_eq!(flatten(&l, "TOP", None).unwrap().len(), 2);
    }
}

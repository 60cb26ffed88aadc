// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};

use super::{GdsElement, GdsError, GdsLibrary, GdsTransform, LayerKey, SRef};

/// Keeps the full structure and reference skeleton but only the geometry
/// on `key`. Non-geometric elements (TEXT, NODE, BOX) are dropped.
pub fn extract_layer(lib: &GdsLibrary, key: LayerKey) -> GdsLibrary {
    let mut out = lib.clone();
    for s in &mut out.structures {
        s.elements.retain(|e| match e {
            GdsElement::Boundary(b) => b.key == key,
            GdsElement::Path(p) => p.key == key,
            GdsElement::SRef(_) | GdsElement::ARef(_) => true,
            GdsElement::Other(_) => false,
        });
    }
    out
}

/// Structures that no other structure references, in library order.
pub fn top_structures(lib: &GdsLibrary) -> Vec<&str> {
    let referenced: HashSet<&str> = lib
        .structures
        .iter()
        .flat_map(|s| s.elements.iter())
        .filter_map(|e| match e {
            GdsElement::SRef(r) => Some(r.target.as_str()),
            GdsElement::ARef(a) => Some(a.target.as_str()),
            _ => None,
        })
        .collect();
    lib.structures
        .iter()
        .map(|s| s.name.as_str())
        .filter(|n| !referenced.contains(n))
        .collect()
}

/// Imports every structure of `art` into `base` and instantiates the art's
/// top structure once inside `top_cell` with an identity transform.
///
/// Art structures whose names collide with existing ones are renamed to
/// `<name>_ART<n>` with the smallest `n >= 1` that is still free.
pub fn merge_libraries(
    base: &GdsLibrary,
    art: &GdsLibrary,
    top_cell: &str,
) -> Result<GdsLibrary, GdsError> {
    let (b, a) = (base.units.meters_per_dbu, art.units.meters_per_dbu);
    if ((b - a) / b).abs() > 1e-12 {
        return Err(GdsError::UnitMismatch { base: b, art: a });
    }
    if base.structure(top_cell).is_none() {
        return Err(GdsError::MissingStructure(top_cell.to_owned()));
    }
    let art_top = top_structures(art)
        .first()
        .map(|s| s.to_string())
        .ok_or_else(|| GdsError::NoTopStructure(art.name.clone()))?;

    let mut taken: HashSet<String> = base.structures.iter().map(|s| s.name.clone()).collect();
    let mut renames: HashMap<&str, String> = HashMap::new();
    for s in &art.structures {
        let new_name = if taken.contains(&s.name) {
            (1..)
                .map(|n| format!("{}_ART{n}", s.name))
                .find(|c| !taken.contains(c))
                .expect("unbounded search")
        } else {
            s.name.clone()
        };
        taken.insert(new_name.clone());
        renames.insert(&s.name, new_name);
    }

    let mut out = base.clone();
    for s in &art.structures {
        let mut s = s.clone();
        s.name = renames[s.name.as_str()].clone();
        for e in &mut s.elements {
            match e {
                GdsElement::SRef(r) => {
                    if let Some(n) = renames.get(r.target.as_str()) {
                        r.target = n.clone();
                    }
                }
                GdsElement::ARef(r) => {
                    if let Some(n) = renames.get(r.target.as_str()) {
                        r.target = n.clone();
                    }
                }
                _ => {}
            }
        }
        out.structures.push(s);
    }
    let top = out.structure_mut(top_cell).expect("checked above");
    top.elements.push(GdsElement::SRef(SRef {
        target: renames[art_top.as_str()].clone(),
        transform: GdsTransform::default(),
    }));
    Ok(out)
}

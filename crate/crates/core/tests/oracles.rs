// SPDX-License-Identifier: Apache-2.0

//! Frozen reference values computed independently of this crate (hand-encoded
//! records, hand-composed matrices, plain arithmetic).

use artistic_core::compose::{
    colorize, composite_over, downscale, page_size_pt, LayerStyle, Rgb, RgbaTile,
};
use artistic_core::gdsii::{
    parse_library, real8, write_library, GdsElement, GdsTransform, PathElement,
};
use artistic_core::geom::{apply_transform, path_to_polygon};
use artistic_core::meerkat::{image_to_bw, RgbaImage};
use artistic_core::raster::{plan_tiles, CoverageTile, RenderFrame};
use artistic_core::{LayerKey, Point, Rect};

const REAL8_1E_3: u64 = 0x3E41_8937_4BC6_A7F0;
const REAL8_1E_9: u64 = 0x3944_B82F_A09B_5A54;

fn boundary_stream() -> Vec<u8> {
    let mut b: Vec<u8> = vec![0x00, 0x06, 0x00, 0x02, 0x02, 0x58];
    let dates: [i16; 12] = [2000, 1, 1, 0, 0, 0, 2000, 1, 1, 0, 0, 0];
    let push_dates = |b: &mut Vec<u8>, rtype: u8| {
        b.extend([0x00, 0x1C, rtype, 0x02]);
        for d in dates {
            b.extend(d.to_be_bytes());
        }
    };
    push_dates(&mut b, 0x01);
    b.extend([0x00, 0x08, 0x02, 0x06, b'L', b'I', b'B', 0x00]);
    b.extend([0x00, 0x14, 0x03, 0x05]);
    b.extend(REAL8_1E_3.to_be_bytes());
    b.extend(REAL8_1E_9.to_be_bytes());
    push_dates(&mut b, 0x05);
    b.extend([0x00, 0x08, 0x06, 0x06, b'T', b'O', b'P', 0x00]);
    b.extend([0x00, 0x04, 0x08, 0x00]);
    b.extend([0x00, 0x06, 0x0D, 0x02, 0x00, 0x86]);
    b.extend([0x00, 0x06, 0x0E, 0x02, 0x00, 0x00]);
    b.extend([0x00, 0x2C, 0x10, 0x03]);
    for (x, y) in [(0i32, 0i32), (1000, 0), (1000, 1000), (0, 1000), (0, 0)] {
        b.extend(x.to_be_bytes());
        b.extend(y.to_be_bytes());
    }
    b.extend([0x00, 0x04, 0x11, 0x00]);
    b.extend([0x00, 0x04, 0x07, 0x00]);
    b.extend([0x00, 0x04, 0x04, 0x00]);
    b
}

#[test]
fn real8_constants() {
    assert_eq!(real8::encode(1e-3).unwrap(), REAL8_1E_3);
    assert_eq!(real8::encode(1e-9).unwrap(), REAL8_1E_9);
    assert_eq!(real8::encode(1.0).unwrap(), 0x4110_0000_0000_0000);
    assert_eq!(real8::encode(0.5).unwrap(), 0x4080_0000_0000_0000);
    assert_eq!(real8::encode(-2.0).unwrap(), 0xC120_0000_0000_0000);
    assert_eq!(real8::encode(90.0).unwrap(), 0x425A_0000_0000_0000);
    assert_eq!(real8::decode(REAL8_1E_3), 1e-3);
    assert_eq!(real8::decode(REAL8_1E_9), 1e-9);
}

#[test]
fn hand_encoded_boundary() {
    let bytes = boundary_stream();
    let lib = parse_library(&bytes).unwrap();
    assert_eq!(lib.name, "LIB");
    assert_eq!(lib.structures.len(), 1);
    let s = &lib.structures[0];
    assert_eq!(s.name, "TOP");
    let GdsElement::Boundary(b) = &s.elements[0] else {
        panic!("expected a boundary");
    };
    assert_eq!(b.key, LayerKey::new(134, 0));
    assert_eq!(b.points.len(), 4);
    assert_eq!(b.points[2], Point::new(1000, 1000));
    assert_eq!(write_library(&lib).unwrap(), bytes);
}

#[test]
fn reflect_rotate_translate() {
    let t = GdsTransform {
        reflect_x: true,
        angle_deg: 90.0,
        translate: Point::new(10, 20),
        ..GdsTransform::default()
    };
    assert_eq!(apply_transform(Point::new(1, 2), &t), Point::new(12, 21));
}

#[test]
fn diagonal_path_offsets() {
    let path = PathElement {
        key: LayerKey::new(1, 0),
        width: 100,
        pathtype: 0,
        points: vec![Point::new(0, 0), Point::new(1000, 1000)],
    };
    let polys = path_to_polygon(&path);
    assert_eq!(polys.len(), 1);
    let mut v = polys[0].vertices.clone();
    v.sort();
    let mut expect = vec![
        Point::new(35, -35),
        Point::new(-35, 35),
        Point::new(1035, 965),
        Point::new(965, 1035),
    ];
    expect.sort();
    assert_eq!(v, expect);
}

#[test]
fn tile_plan_1000_by_600() {
    let frame = RenderFrame::new(Rect::new(0, 0, 1000, 600), 1.0, 1.0, 1, 250_000).unwrap();
    let g = plan_tiles(&frame).unwrap();
    assert_eq!((g.tile_w, g.tile_h, g.cols, g.rows), (496, 496, 3, 2));
    assert_eq!((g.tile(2).w, g.tile(2).h), (8, 496));
    assert_eq!((g.tile(3).w, g.tile(3).h), (496, 104));
}

#[test]
fn pure_red_is_ink() {
    let img = RgbaImage {
        width: 1,
        height: 1,
        pixels: vec![255, 0, 0, 255],
    };
    // luma 0.2126 * 255 = 54.2
    assert!(image_to_bw(&img, 128).get(0, 0));
    assert!(!image_to_bw(&img, 54).get(0, 0));
    assert!(image_to_bw(&img, 55).get(0, 0));
}

fn red_half() -> LayerStyle {
    LayerStyle {
        layer: 1,
        datatype: 0,
        color: Rgb([255, 0, 0]),
        opacity: 0.5,
        z_order: 0,
    }
}

#[test]
fn compose_worked_examples() {
    let cov = CoverageTile {
        index: 0,
        width: 1,
        height: 1,
        coverage: vec![255],
    };
    let tinted = colorize(&cov, &red_half());
    assert_eq!(tinted.pixel(0, 0), [128, 0, 0, 128]);

    let black = RgbaTile::opaque(0, 1, 1, Rgb([0, 0, 0]));
    assert_eq!(
        composite_over(&black, &tinted).unwrap().pixel(0, 0),
        [128, 0, 0, 255]
    );

    let opaque = RgbaTile::filled(0, 1, 1, [10, 20, 30, 255]);
    let acc = RgbaTile::filled(0, 1, 1, [200, 100, 50, 255]);
    assert_eq!(composite_over(&acc, &opaque).unwrap(), opaque);
    let clear = RgbaTile::filled(0, 1, 1, [0, 0, 0, 0]);
    assert_eq!(composite_over(&acc, &clear).unwrap(), acc);

    let block = RgbaTile {
        index: 0,
        width: 2,
        height: 2,
        pixels: [0u8, 255, 255, 255]
            .iter()
            .flat_map(|&r| [r, 0, 0, 255])
            .collect(),
    };
    assert_eq!(downscale(&block, 2).unwrap().pixel(0, 0), [191, 0, 0, 255]);
}

#[test]
fn page_sizes() {
    let p = page_size_pt(1200, 2400, 300.0);
    assert_eq!((p.width_pt, p.height_pt), (288.0, 576.0));
    // a 2 GP poster with A-series aspect at 2400 dpi stays within the PDF page limit
    let p = page_size_pt(37_606, 53_183, 2400.0);
    assert!((p.width_pt - 1128.18).abs() < 0.01 && (p.height_pt - 1595.49).abs() < 0.01);
}

#[test]
fn render_defaults() {
    assert_eq!(artistic_core::raster::DEFAULT_MAX_TILE_PX, 250_000_000);
    assert!(RenderFrame::new(Rect::new(0, 0, 1000, 1000), 25.0, 1.0, 4, 250_000_000).is_ok());
}

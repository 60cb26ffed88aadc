// SPDX-License-Identifier: Apache-2.0

//! Regenerates the bundled demo: `cargo run -p artistic-core --example gen_demo [DIR]`.

use std::path::PathBuf;

use artistic_core::compose::write_png_rgba;
use artistic_core::gdsii::write_library;
use artistic_core::synth::{synth_chip, synth_logo, ChipSpec, TOP_CELL};

fn main() {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/demo"));
    std::fs::create_dir_all(&dir).expect("create demo dir");

    let spec = ChipSpec::demo();
    let lib = synth_chip(&spec);
    std::fs::write(
        dir.join("demo.gds"),
        write_library(&lib).expect("encode gds"),
    )
    .expect("write gds");

    let logo = synth_logo(64, 64);
    write_png_rgba(&dir.join("logo.png"), logo.width, logo.height, &logo.pixels)
        .expect("write logo");

    let top = spec.top_metal();
    let config = serde_json::json!({
        "gds_in": "demo.gds",
        "top_cell": TOP_CELL,
        "top_metal": { "layer": top.layer, "datatype": top.datatype },
        "logo": {
            "path": "logo.png",
            "threshold": 128,
            "placement": [20.0, 20.0, 80.0, 80.0],
            "rules": {
                "cell_size": 1.0,
                "gap": 0.5,
                "min_cells": 2,
                "max_cells": 4,
                "keepout": 0.25,
                "density_window": 10,
                "max_density": 0.6,
                "seed": 42,
                "min_spacing": 0.5,
                "min_width": 1.0,
                "max_width": 2.5
            }
        },
        "frame": {
            "window": "auto",
            "nm_per_px": 100.0,
            "supersample": 2,
            "max_tile_px": 65536,
            "downscale": 2,
            "dpi": 300.0
        },
        "stack": [
            { "layer": 1, "datatype": 0, "color": "#3050ff", "opacity": 0.6, "z_order": 0 },
            { "layer": 2, "datatype": 0, "color": "#20c060", "opacity": 0.5, "z_order": 1 },
            { "layer": 3, "datatype": 0, "color": "#f0a020", "opacity": 0.5, "z_order": 2 },
            { "layer": 4, "datatype": 0, "color": "#e03030", "opacity": 0.7, "z_order": 3 }
        ],
        "background": "#000000",
        "outputs": {
            "gds_out": "out/demo_merged.gds",
            "png_out": "out/demo.png",
            "pdf_out": "out/demo.pdf",
            "svg_out": "out/demo_art.svg"
        }
    });
    let text = serde_json::to_string_pretty(&config).expect("config json") + "\n";
    std::fs::write(dir.join("demo.json"), text).expect("write config");
    println!("demo written to {}", dir.display());
}

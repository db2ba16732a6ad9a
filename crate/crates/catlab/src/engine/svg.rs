//! SVG space-time diagrams: rows are time steps, columns are cells, the step
//! at which a cell emits its output is outlined.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::trace::RunTrace;

const CELL: usize = 26;
const PAD: usize = 34;

fn color_for(name: &str, palette: &mut HashMap<String, String>) -> String {
    if let Some(c) = palette.get(name) {
        return c.clone();
    }
    // Stable, readable pastel derived from a small string hash.
    let mut h: u32 = 2166136261;
    for b in name.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(16777619);
    }
    let hue = h % 360;
    let light = 78 - (h / 360 % 3) * 8;
    let c = format!("hsl({hue},55%,{light}%)");
    palette.insert(name.to_string(), c.clone());
    c
}

/// Renders a run as an SVG 1.1 document with one rectangle per (time, cell).
pub fn render_svg(trace: &RunTrace) -> String {
    let steps = trace.steps.len();
    let cells = trace.steps.iter().map(|s| s.cells.len()).max().unwrap_or(0);
    let width = PAD * 2 + cells * CELL;
    let height = PAD * 2 + steps * CELL;
    let mut palette = HashMap::new();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" font-family="monospace" font-size="9">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, _) in (0..cells).enumerate() {
        let x = PAD + i * CELL + CELL / 2;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" text-anchor="middle">{}</text>"#,
            i + 1,
            y = PAD - 8
        );
    }
    for (t, step) in trace.steps.iter().enumerate() {
        let y = PAD + t * CELL;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{ty}" text-anchor="end">{t}</text>"#,
            x = PAD - 6,
            ty = y + CELL / 2 + 3
        );
        for (i, &state) in step.cells.iter().enumerate() {
            let x = PAD + i * CELL;
            let name = trace.state_name(state);
            let fill = color_for(name, &mut palette);
            let emitted_now = step.outputs.get(i).is_some_and(|o| o.is_some())
                && (t == 0
                    || trace.steps[t - 1].outputs.get(i).is_none_or(|o| o.is_none()));
            let stroke = if emitted_now {
                r#" stroke="black" stroke-width="2.5""#
            } else {
                r##" stroke="#bbb" stroke-width="0.5""##
            };
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"{stroke}><title>t={t} cell {c}: {name}{reg}</title></rect>"#,
                c = i + 1,
                reg = match step.outputs.get(i) {
                    Some(Some(w)) => format!(" out={w}"),
                    _ => String::new(),
                }
            );
            let label: String = name.chars().take(3).collect();
            let _ = writeln!(
                out,
                r#"<text x="{tx}" y="{ty}" text-anchor="middle">{label}</text>"#,
                tx = x + CELL / 2,
                ty = y + CELL / 2 + 3
            );
        }
    }
    let _ = writeln!(out, "</svg>");
    out
}

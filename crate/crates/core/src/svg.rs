//! Static SVG rendering of a frame.

use std::fmt::Write;

use crate::geometry::Rect;
use crate::session::Frame;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders circles (larger first, so small words stay visible) with a red
/// fill whose opacity follows stress, then centered labels.
pub fn render_svg(frame: &Frame, viewport: Rect) -> String {
    let mut order: Vec<usize> = (0..frame.agents.len()).collect();
    order.sort_by(|&a, &b| {
        frame.agents[b]
            .r
            .total_cmp(&frame.agents[a].r)
            .then(a.cmp(&b))
    });

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.2} {:.2} {:.2} {:.2}" width="{:.0}" height="{:.0}">"#,
        viewport.x, viewport.y, viewport.width, viewport.height, viewport.width, viewport.height
    );
    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#ffffff"/>"##,
        viewport.x, viewport.y, viewport.width, viewport.height
    );
    for &i in &order {
        let a = &frame.agents[i];
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#d62728" fill-opacity="{:.3}" stroke="#444444" stroke-width="1"/>"##,
            a.x,
            a.y,
            a.r,
            0.8 * a.stress
        );
    }
    for &i in &order {
        let a = &frame.agents[i];
        let size = (0.5 * a.r).clamp(10.0, 24.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="{:.1}" font-family="sans-serif" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            a.x,
            a.y,
            size,
            escape(&a.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

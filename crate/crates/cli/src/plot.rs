//! Price-space diagram: budget and indifference lines with the candidate
//! vertices, as a standalone SVG. Only defined for two-product markets.
//!
//! The taxed product goes on the horizontal axis. The view box spans the
//! budget lines and every revenue-earning candidate with a little headroom;
//! far-out vertices where nobody buys anything may fall outside the view.
//! Output is byte-deterministic for a fixed market.

use std::fmt::Write as _;

use sugartax_core::arrangement::{CandidateSet, HyperplaneKind};
use sugartax_core::market::Market;
use sugartax_core::numeric::{rat, to_f64};
use sugartax_core::response::{ResponseTable, TaxRate};

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("plot requires exactly two products, market has {0}")]
    NotTwoProducts(usize),
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 700.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 488.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub fn render_plot(
    market: &Market,
    candidates: &CandidateSet,
    table: &ResponseTable,
) -> Result<String, PlotError> {
    if market.product_count() != 2 {
        return Err(PlotError::NotTwoProducts(market.product_count()));
    }
    // Horizontal axis: the taxed product (product 0 when the flag is
    // ambiguous — none taxed, or both).
    let x_axis = match market.products().iter().filter(|p| p.taxed).count() {
        1 => market.products().iter().position(|p| p.taxed).unwrap(),
        _ => 0,
    };
    let y_axis = 1 - x_axis;

    // View range: budget-line positions plus revenue-earning candidates.
    let mut max = [1.0f64, 1.0f64];
    for h in &candidates.hyperplanes {
        if let HyperplaneKind::Budget { product, .. } = h.kind {
            let at = to_f64(&h.constant) / to_f64(&h.coeffs[product]);
            let axis = if product == x_axis { 0 } else { 1 };
            max[axis] = max[axis].max(at);
        }
    }
    for entry in table.entries() {
        if entry.net(&TaxRate::zero()) == rat(0) {
            continue;
        }
        max[0] = max[0].max(to_f64(entry.point.prices.get(x_axis)));
        max[1] = max[1].max(to_f64(entry.point.prices.get(y_axis)));
    }
    let (x_max, y_max) = (max[0] * 1.06, max[1] * 1.06);

    let sx = |x: f64| LEFT + x / x_max * (RIGHT - LEFT);
    let sy = |y: f64| BOTTOM - y / y_max * (BOTTOM - TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(
        svg,
        "<style>.axis{{stroke:#222;stroke-width:1.5}}.budget{{stroke-width:1.2}}\
         .indifference{{stroke-width:1.2;stroke-dasharray:5 3}}\
         .candidate{{fill:#111}}.label{{fill:#333;font-size:9px}}\
         .tick{{fill:#444;font-size:10px}}.axis-label{{fill:#000;font-size:12px}}</style>"
    );

    // Axis boundary lines (the p = 0 hyperplanes).
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
        sx(0.0),
        sy(0.0),
        sx(0.0),
        sy(y_max)
    );
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
        sx(0.0),
        sy(0.0),
        sx(x_max),
        sy(0.0)
    );

    // Ticks: five per axis.
    for k in 0..=4 {
        let fx = x_max * k as f64 / 4.0;
        let fy = y_max * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<text class=\"tick\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:.2}</text>",
            sx(fx),
            BOTTOM + 16.0,
            fx
        );
        let _ = writeln!(
            svg,
            "<text class=\"tick\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{:.2}</text>",
            LEFT - 6.0,
            sy(fy) + 4.0,
            fy
        );
    }
    let x_name = &market.products()[x_axis].id;
    let y_name = &market.products()[y_axis].id;
    let x_tag = if market.products()[x_axis].taxed {
        " (taxed)"
    } else {
        ""
    };
    let y_tag = if market.products()[y_axis].taxed {
        " (taxed)"
    } else {
        ""
    };
    let _ = writeln!(
        svg,
        "<text class=\"axis-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">price of {x_name}{x_tag}</text>",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        svg,
        "<text class=\"axis-label\" x=\"14\" y=\"{:.2}\" transform=\"rotate(-90 14 {:.2})\" \
         text-anchor=\"middle\">price of {y_name}{y_tag}</text>",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    // Consumer lines clipped to the view box.
    for h in &candidates.hyperplanes {
        let (class, consumer) = match h.kind {
            HyperplaneKind::Budget { consumer, .. } => ("budget", consumer),
            HyperplaneKind::Indifference { consumer, .. } => ("indifference", consumer),
            HyperplaneKind::Axis { .. } => continue, // drawn above
        };
        let a = to_f64(&h.coeffs[x_axis]);
        let b = to_f64(&h.coeffs[y_axis]);
        let d = to_f64(&h.constant);
        if let Some(((x1, y1), (x2, y2))) = clip_line(a, b, d, x_max, y_max) {
            let color = PALETTE[consumer % PALETTE.len()];
            let _ = writeln!(
                svg,
                "<line class=\"{class}\" stroke=\"{color}\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
                sx(x1),
                sy(y1),
                sx(x2),
                sy(y2)
            );
        }
    }

    // Candidate vertices with their table numbers.
    for point in &candidates.points {
        let x = to_f64(point.prices.get(x_axis));
        let y = to_f64(point.prices.get(y_axis));
        if x > x_max || y > y_max {
            continue;
        }
        let _ = writeln!(
            svg,
            "<circle class=\"candidate\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\"/>",
            sx(x),
            sy(y)
        );
        let _ = writeln!(
            svg,
            "<text class=\"label\" x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            sx(x) + 4.0,
            sy(y) - 4.0,
            point.index + 1
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Intersects `a*x + b*y = d` with the box `[0, x_max] x [0, y_max]`;
/// returns the two extreme in-box points when the line crosses it.
fn clip_line(a: f64, b: f64, d: f64, x_max: f64, y_max: f64) -> Option<((f64, f64), (f64, f64))> {
    let eps = 1e-9;
    let mut hits: Vec<(f64, f64)> = Vec::new();
    let mut push = |x: f64, y: f64| {
        if (-eps..=x_max + eps).contains(&x) && (-eps..=y_max + eps).contains(&y) {
            let point = (x.clamp(0.0, x_max), y.clamp(0.0, y_max));
            if !hits
                .iter()
                .any(|(px, py)| (px - point.0).abs() < eps && (py - point.1).abs() < eps)
            {
                hits.push(point);
            }
        }
    };
    if b.abs() > eps {
        push(0.0, d / b);
        push(x_max, (d - a * x_max) / b);
    }
    if a.abs() > eps {
        push(d / a, 0.0);
        push((d - b * y_max) / a, y_max);
    }
    if hits.len() < 2 {
        return None;
    }
    hits.sort_by(|p, q| p.partial_cmp(q).expect("finite coordinates"));
    let first = hits[0];
    let last = hits[hits.len() - 1];
    if (first.0 - last.0).abs() < eps && (first.1 - last.1).abs() < eps {
        return None;
    }
    Some((first, last))
}

//! Report rendering: candidate tables, solve summaries, welfare curves and
//! oracle verdicts, in a human text form and machine-readable JSON/CSV.
//!
//! Reference tables in this domain are printed at two decimal places and
//! their revenue figures are computed *at the printed prices*, so every
//! report carries two flavors of each money figure: the exact value at the
//! exact vertex, and the "display" value obtained by billing the vertex's
//! purchase pattern at prices rounded to the configured precision. The
//! display flavor is what reproduces published tables digit for digit; the
//! exact flavor is the ground truth.

use serde::Serialize;
use sugartax_core::arrangement::{CandidateSet, HyperplaneKind};
use sugartax_core::choice::{assignment, Assignment};
use sugartax_core::market::{Market, PriceVector};
use sugartax_core::numeric::{format_exact, format_fixed, round_to_precision, Rational};
use sugartax_core::optimizer::{welfare_curve, TaxSolution};
use sugartax_core::oracle::VerifyReport;
use sugartax_core::response::{revenue_split, EvaluatedCandidate, ResponseTable, TaxRate};
use sugartax_core::welfare::{WelfareBreakdown, WelfareMode};
use sugartax_core::{raw_utility, ResponseError};

/// Prices rounded to the report precision, as exact rationals.
pub fn display_prices(prices: &PriceVector, precision: u32) -> PriceVector {
    PriceVector(
        prices
            .0
            .iter()
            .map(|p| round_to_precision(p, precision))
            .collect(),
    )
}

/// Bills an already-computed purchase pattern at display-rounded prices:
/// `(gross, taxed part)`. This is the published-table convention — the
/// assignment comes from the exact point, the money from rounded prices.
pub fn display_revenue(
    market: &Market,
    prices: &PriceVector,
    choices: &Assignment,
    precision: u32,
) -> (Rational, Rational) {
    let rounded = display_prices(prices, precision);
    revenue_split(market, &rounded, choices)
}

/// Welfare at a candidate with revenues billed at display prices (the
/// surplus stays the exact point's realized surplus). The purchase pattern
/// is the seller-optimal resolution at `alpha`.
pub fn display_welfare(
    market: &Market,
    entry: &EvaluatedCandidate,
    alpha: &TaxRate,
    mode: WelfareMode,
    precision: u32,
) -> WelfareBreakdown {
    let (choices, _, _) = entry.profile.resolve(alpha);
    let (gross, taxed) = display_revenue(market, &entry.point.prices, &choices, precision);
    WelfareBreakdown::from_parts(entry.surplus(), gross, taxed, alpha, mode)
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRow {
    pub nr: usize,
    pub prices_display: Vec<String>,
    pub prices_exact: Vec<String>,
    /// Per consumer: `Some((product id, displayed utility))` or `None`.
    pub choices: Vec<Option<(String, String)>>,
    /// Gross revenue billed at the displayed prices.
    pub revenue: String,
    /// Gross revenue at the exact vertex.
    pub revenue_exact: String,
}

pub fn candidate_rows(
    market: &Market,
    candidates: &CandidateSet,
    precision: u32,
) -> Vec<CandidateRow> {
    candidates
        .points
        .iter()
        .map(|point| {
            let pattern = assignment(market, &point.prices);
            let choices = pattern
                .0
                .iter()
                .enumerate()
                .map(|(i, choice)| {
                    choice.product().map(|j| {
                        let utility = raw_utility(&market.consumers()[i], j, &point.prices);
                        (
                            market.products()[j].id.clone(),
                            format_fixed(&utility, precision),
                        )
                    })
                })
                .collect();
            let (display_gross, _) = display_revenue(market, &point.prices, &pattern, precision);
            let (exact_gross, _) = revenue_split(market, &point.prices, &pattern);
            CandidateRow {
                nr: point.index + 1,
                prices_display: point
                    .prices
                    .0
                    .iter()
                    .map(|p| format_fixed(p, precision))
                    .collect(),
                prices_exact: point.prices.0.iter().map(format_exact).collect(),
                choices,
                revenue: format_fixed(&display_gross, precision),
                revenue_exact: format_fixed(&exact_gross, precision),
            }
        })
        .collect()
}

pub fn render_candidates_text(market: &Market, rows: &[CandidateRow]) -> String {
    let mut header = vec!["nr".to_string()];
    for p in market.products() {
        header.push(format!("p[{}]", p.id));
    }
    for c in market.consumers() {
        header.push(c.id.clone());
    }
    header.push("revenue".into());
    header.push("revenue(exact p)".into());

    let mut body: Vec<Vec<String>> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut cells = vec![row.nr.to_string()];
        cells.extend(row.prices_display.iter().cloned());
        for choice in &row.choices {
            cells.push(match choice {
                Some((id, u)) => format!("{id} u={u}"),
                None => "-".into(),
            });
        }
        cells.push(row.revenue.clone());
        cells.push(row.revenue_exact.clone());
        body.push(cells);
    }
    render_table(&header, &body)
}

pub fn render_candidates_csv(market: &Market, rows: &[CandidateRow]) -> String {
    let mut out = String::from("nr");
    for p in market.products() {
        out.push_str(&format!(",price:{}", p.id));
    }
    for c in market.consumers() {
        out.push_str(&format!(",choice:{},utility:{}", c.id, c.id));
    }
    out.push_str(",revenue,revenue_exact\n");
    for row in rows {
        out.push_str(&row.nr.to_string());
        for p in &row.prices_display {
            out.push_str(&format!(",{p}"));
        }
        for choice in &row.choices {
            match choice {
                Some((id, u)) => out.push_str(&format!(",{id},{u}")),
                None => out.push_str(",-,"),
            }
        }
        out.push_str(&format!(",{},{}\n", row.revenue, row.revenue_exact));
    }
    out
}

fn render_table(header: &[String], body: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in body {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String], widths: &[usize]| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{:<width$}", cell, width = widths[i]));
        }
        line.trim_end().to_string()
    };
    out.push_str(&render_row(header, &widths));
    out.push('\n');
    for row in body {
        out.push_str(&render_row(row, &widths));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeWelfareReport {
    pub selected: bool,
    pub consumer_surplus: f64,
    pub firm_utility_exact: String,
    pub tax_exact: String,
    pub total_exact: f64,
    pub firm_utility_display: String,
    pub tax_display: String,
    pub total_display: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub alpha_lo: String,
    pub alpha_hi: String,
    pub point_nr: usize,
    pub prices_display: Vec<String>,
    pub welfare_display_lo: f64,
    pub welfare_display_hi: f64,
    pub welfare_exact_lo: f64,
    pub welfare_exact_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub grid_points: u128,
    pub alphas_checked: usize,
    pub passed: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub precision: u32,
    pub products: Vec<String>,
    pub taxed_products: Vec<String>,
    pub consumers: usize,
    pub hyperplanes_budget: usize,
    pub hyperplanes_indifference: usize,
    pub hyperplanes_axis: usize,
    pub candidates: usize,
    pub mode_selected: String,
    pub alpha_star: String,
    pub alpha_star_display: String,
    pub prices_exact: Vec<String>,
    pub prices_display: Vec<String>,
    pub break_evens: Vec<String>,
    pub staircase: Vec<StepReport>,
    pub welfare_definition: ModeWelfareReport,
    pub welfare_paper_example: ModeWelfareReport,
    pub oracle: Option<OracleSection>,
}

pub fn build_solve_report(
    market: &Market,
    candidates: &CandidateSet,
    solution: &TaxSolution,
    precision: u32,
    oracle: Option<&VerifyReport>,
) -> SolveReport {
    let table = ResponseTable::new(market, candidates);
    let alpha = TaxRate::new(solution.alpha.clone()).expect("solution rate in range");
    let entry = &table.entries()[solution.point.index];

    let mode_report = |mode: WelfareMode| -> ModeWelfareReport {
        let exact = entry.welfare(&alpha, mode);
        let display = display_welfare(market, entry, &alpha, mode, precision);
        ModeWelfareReport {
            selected: mode == solution.mode,
            consumer_surplus: exact.consumer_surplus,
            firm_utility_exact: format_fixed(&exact.firm_utility, precision),
            tax_exact: format_fixed(&exact.tax, precision),
            total_exact: exact.total,
            firm_utility_display: format_fixed(&display.firm_utility, precision),
            tax_display: format_fixed(&display.tax, precision),
            total_display: display.total,
        }
    };

    let steps = solution
        .staircase
        .iter()
        .map(|step| {
            let step_entry = &table.entries()[step.point.index];
            let lo = TaxRate::new(step.alpha_lo.clone()).expect("in range");
            let hi = TaxRate::new(step.alpha_hi.clone()).expect("in range");
            StepReport {
                alpha_lo: format_exact(&step.alpha_lo),
                alpha_hi: format_exact(&step.alpha_hi),
                point_nr: step.point.index + 1,
                prices_display: step
                    .point
                    .prices
                    .0
                    .iter()
                    .map(|p| format_fixed(p, precision))
                    .collect(),
                welfare_display_lo: display_welfare(
                    market,
                    step_entry,
                    &lo,
                    solution.mode,
                    precision,
                )
                .total,
                welfare_display_hi: display_welfare(
                    market,
                    step_entry,
                    &hi,
                    solution.mode,
                    precision,
                )
                .total,
                welfare_exact_lo: step.welfare_lo.total,
                welfare_exact_hi: step.welfare_hi.total,
            }
        })
        .collect();

    let kind_count = |want: fn(&HyperplaneKind) -> bool| {
        candidates
            .hyperplanes
            .iter()
            .filter(|h| want(&h.kind))
            .count()
    };
    SolveReport {
        precision,
        products: market.products().iter().map(|p| p.id.clone()).collect(),
        taxed_products: market
            .products()
            .iter()
            .filter(|p| p.taxed)
            .map(|p| p.id.clone())
            .collect(),
        consumers: market.consumer_count(),
        hyperplanes_budget: kind_count(|k| matches!(k, HyperplaneKind::Budget { .. })),
        hyperplanes_indifference: kind_count(|k| matches!(k, HyperplaneKind::Indifference { .. })),
        hyperplanes_axis: kind_count(|k| matches!(k, HyperplaneKind::Axis { .. })),
        candidates: candidates.len(),
        mode_selected: solution.mode.label().to_string(),
        alpha_star: format_exact(&solution.alpha),
        alpha_star_display: format_fixed(&solution.alpha, precision),
        prices_exact: solution.point.prices.0.iter().map(format_exact).collect(),
        prices_display: solution
            .point
            .prices
            .0
            .iter()
            .map(|p| format_fixed(p, precision))
            .collect(),
        break_evens: solution.evaluated.iter().map(format_exact).collect(),
        staircase: steps,
        welfare_definition: mode_report(WelfareMode::Definition),
        welfare_paper_example: mode_report(WelfareMode::PaperExample),
        oracle: oracle.map(|report| OracleSection {
            grid_points: report.grid_points,
            alphas_checked: report.alphas_checked,
            passed: report.passed(),
            violations: report.violations.iter().map(|v| v.to_string()).collect(),
        }),
    }
}

pub fn render_solve_text(report: &SolveReport) -> String {
    let p = report.precision as usize;
    let mut out = String::new();
    out.push_str(&format!(
        "market: {} products ({} taxed), {} consumers\n",
        report.products.len(),
        report.taxed_products.len(),
        report.consumers
    ));
    out.push_str(&format!(
        "hyperplanes: {} budget, {} indifference, {} axis\n",
        report.hyperplanes_budget, report.hyperplanes_indifference, report.hyperplanes_axis
    ));
    out.push_str(&format!("candidate price points: {}\n", report.candidates));
    out.push_str(&format!(
        "evaluated tax rates (break-evens and endpoints): {}\n",
        report.break_evens.len()
    ));
    out.push_str(&format!("staircase ({} mode):\n", report.mode_selected));
    for step in &report.staircase {
        out.push_str(&format!(
            "  alpha in [{}, {}]: point {} at ({}), W {:.p$} -> {:.p$}\n",
            step.alpha_lo,
            step.alpha_hi,
            step.point_nr,
            step.prices_display.join(", "),
            step.welfare_display_lo,
            step.welfare_display_hi,
        ));
    }
    out.push_str(&format!(
        "optimal tax rate: {} (exact {})\n",
        report.alpha_star_display, report.alpha_star
    ));
    out.push_str(&format!(
        "seller prices: ({})  exact ({})\n",
        report.prices_display.join(", "),
        report.prices_exact.join(", ")
    ));
    out.push_str("welfare at the optimum:\n");
    let rows = [
        ("definition", &report.welfare_definition),
        ("paper-example", &report.welfare_paper_example),
    ];
    for (name, mode) in rows {
        let marker = if mode.selected { "  [selected]" } else { "" };
        out.push_str(&format!("  {name}{marker}\n"));
        out.push_str(&format!(
            "    consumer surplus:        {:.6}\n",
            mode.consumer_surplus
        ));
        out.push_str(&format!(
            "    seller net (exact p):    {}\n",
            mode.firm_utility_exact
        ));
        out.push_str(&format!(
            "    tax collected (exact p): {}\n",
            mode.tax_exact
        ));
        out.push_str(&format!(
            "    W (exact prices):        {:.p$}\n",
            mode.total_exact
        ));
        out.push_str(&format!(
            "    W (display prices):      {:.p$}\n",
            mode.total_display
        ));
    }
    if let Some(oracle) = &report.oracle {
        out.push_str(&format!(
            "oracle: {} grid points, {} tax rates checked: {}\n",
            oracle.grid_points,
            oracle.alphas_checked,
            if oracle.passed { "pass" } else { "FAIL" }
        ));
        for violation in &oracle.violations {
            out.push_str(&format!("  violation: {violation}\n"));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub alpha: String,
    pub alpha_display: String,
    pub point_nr: usize,
    pub prices_display: Vec<String>,
    pub welfare_definition_display: f64,
    pub welfare_paper_display: f64,
    pub welfare_definition_exact: f64,
    pub welfare_paper_exact: f64,
}

/// Rows at every break-even plus `samples` uniform rates: the chosen point
/// under `mode` and the welfare in both modes at that point.
pub fn curve_rows(
    market: &Market,
    candidates: &CandidateSet,
    mode: WelfareMode,
    samples: usize,
    precision: u32,
) -> Result<Vec<CurveRow>, ResponseError> {
    let table = ResponseTable::new(market, candidates);
    let curve = welfare_curve(market, candidates, mode, samples)?;
    Ok(curve
        .samples
        .iter()
        .map(|sample| {
            let entry = &table.entries()[sample.point_index];
            let alpha = TaxRate::new(sample.alpha.clone()).expect("in range");
            let def_exact = entry.welfare(&alpha, WelfareMode::Definition);
            let paper_exact = entry.welfare(&alpha, WelfareMode::PaperExample);
            CurveRow {
                alpha: format_exact(&sample.alpha),
                alpha_display: format_fixed(&sample.alpha, precision.max(2)),
                point_nr: sample.point_index + 1,
                prices_display: entry
                    .point
                    .prices
                    .0
                    .iter()
                    .map(|p| format_fixed(p, precision))
                    .collect(),
                welfare_definition_display: display_welfare(
                    market,
                    entry,
                    &alpha,
                    WelfareMode::Definition,
                    precision,
                )
                .total,
                welfare_paper_display: display_welfare(
                    market,
                    entry,
                    &alpha,
                    WelfareMode::PaperExample,
                    precision,
                )
                .total,
                welfare_definition_exact: def_exact.total,
                welfare_paper_exact: paper_exact.total,
            }
        })
        .collect())
}

pub fn render_curve_text(rows: &[CurveRow], precision: u32) -> String {
    let p = precision as usize;
    let header: Vec<String> = [
        "alpha",
        "point",
        "prices",
        "W(definition)",
        "W(paper-example)",
        "W(def, exact p)",
        "W(paper, exact p)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.alpha_display.clone(),
                row.point_nr.to_string(),
                format!("({})", row.prices_display.join(", ")),
                format!("{:.p$}", row.welfare_definition_display),
                format!("{:.p$}", row.welfare_paper_display),
                format!("{:.p$}", row.welfare_definition_exact),
                format!("{:.p$}", row.welfare_paper_exact),
            ]
        })
        .collect();
    render_table(&header, &body)
}

pub fn render_curve_csv(rows: &[CurveRow]) -> String {
    let mut out =
        String::from("alpha,point,prices,w_definition,w_paper_example,w_definition_exact,w_paper_example_exact\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},({}),{},{},{},{}\n",
            row.alpha,
            row.point_nr,
            row.prices_display.join(" "),
            row.welfare_definition_display,
            row.welfare_paper_display,
            row.welfare_definition_exact,
            row.welfare_paper_exact,
        ));
    }
    out
}

pub fn render_verify_text(report: &VerifyReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "grid points: {}\ntax rates checked: {}\n",
        report.grid_points, report.alphas_checked
    ));
    for violation in &report.violations {
        out.push_str(&format!("violation: {violation}\n"));
    }
    out.push_str(&format!(
        "status: {}\n",
        if report.passed() { "pass" } else { "FAIL" }
    ));
    out
}

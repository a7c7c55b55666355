//! Optimal tax rate search: break-even enumeration plus staircase evaluation.
//!
//! The seller's payoff under every candidate price point is convex piecewise
//! affine in the tax rate (see [`crate::response::NetProfile`]), so its best
//! response can only switch — and welfare can only kink — at finitely many
//! rates: the candidates' own tie-resolution flips plus the pairwise payoff
//! crossings inside `[0, 1]`. Welfare therefore needs evaluating only at
//! those rates plus the interval endpoints; the best of them solves the
//! whole sequential game.

use crate::arrangement::{CandidateSet, PricePoint};
use crate::market::Market;
use crate::numeric::Rational;
use crate::response::{EvaluatedCandidate, ResponseError, ResponseTable, TaxRate};
use crate::welfare::{WelfareBreakdown, WelfareMode};
use num_traits::{One, Zero};

/// Where a candidate tax rate came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BreakEvenSource {
    /// The interval endpoints 0 and 1, always evaluated.
    Endpoint,
    /// Crossing of the payoff curves of two candidates (indices into the
    /// candidate set).
    Pair(usize, usize),
    /// A consumer's tie resolution at this candidate flips between a taxed
    /// and an untaxed product.
    Flip(usize),
}

/// A potentially optimal tax rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakEven {
    pub alpha: Rational,
    pub source: BreakEvenSource,
}

/// One run of the welfare staircase: the seller plays `point` throughout
/// `[alpha_lo, alpha_hi]` and welfare interpolates affinely between the two
/// endpoint breakdowns.
#[derive(Debug, Clone)]
pub struct StaircaseStep {
    pub alpha_lo: Rational,
    pub alpha_hi: Rational,
    pub point: PricePoint,
    pub welfare_lo: WelfareBreakdown,
    pub welfare_hi: WelfareBreakdown,
}

/// Output of [`optimize`].
#[derive(Debug, Clone)]
pub struct TaxSolution {
    pub mode: WelfareMode,
    /// Optimal tax rate.
    pub alpha: Rational,
    /// The seller's response at the optimal rate.
    pub point: PricePoint,
    /// Welfare at the optimum in the configured mode.
    pub welfare: WelfareBreakdown,
    pub staircase: Vec<StaircaseStep>,
    /// Every candidate rate that was evaluated, ascending.
    pub evaluated: Vec<Rational>,
    pub break_evens: Vec<BreakEven>,
}

/// Rate at which two affine payoff lines `U + (1-a) T` meet, if they are
/// not parallel. Equal taxed parts mean the lines never cross (or coincide).
pub fn line_break_even(
    untaxed_a: &Rational,
    taxed_a: &Rational,
    untaxed_b: &Rational,
    taxed_b: &Rational,
) -> Option<Rational> {
    let taxed_gap = taxed_a - taxed_b;
    if taxed_gap.is_zero() {
        return None;
    }
    Some(Rational::one() - (untaxed_b - untaxed_a) / taxed_gap)
}

/// All rates in `[0, 1]` where the payoff curves of two candidates cross.
///
/// Both curves are affine between consecutive tie-resolution flips, so each
/// merged flip segment contributes at most one crossing.
pub fn pair_break_even(a: &EvaluatedCandidate, b: &EvaluatedCandidate) -> Vec<Rational> {
    let mut cuts: Vec<Rational> = vec![Rational::zero(), Rational::one()];
    for rate in a
        .profile
        .flip_rates()
        .into_iter()
        .chain(b.profile.flip_rates())
    {
        if rate.is_zero() || rate.is_one() {
            continue;
        }
        if !cuts.contains(&rate) {
            cuts.push(rate);
        }
    }
    cuts.sort();
    let mut found = Vec::new();
    for window in cuts.windows(2) {
        let (lo, hi) = (&window[0], &window[1]);
        let probe = TaxRate::new((lo + hi) / crate::numeric::rat(2)).expect("midpoint in range");
        let (ua, ta) = a.profile.affine_at(&probe);
        let (ub, tb) = b.profile.affine_at(&probe);
        if let Some(alpha) = line_break_even(&ua, &ta, &ub, &tb) {
            if &alpha >= lo && &alpha <= hi && !found.contains(&alpha) {
                found.push(alpha);
            }
        }
    }
    found
}

fn break_evens_from_table(table: &ResponseTable) -> Vec<BreakEven> {
    let mut found: Vec<BreakEven> = vec![
        BreakEven {
            alpha: Rational::zero(),
            source: BreakEvenSource::Endpoint,
        },
        BreakEven {
            alpha: Rational::one(),
            source: BreakEvenSource::Endpoint,
        },
    ];
    let push = |alpha: Rational, source: BreakEvenSource, found: &mut Vec<BreakEven>| {
        if alpha < Rational::zero() || alpha > Rational::one() {
            return;
        }
        if !found.iter().any(|b| b.alpha == alpha) {
            found.push(BreakEven { alpha, source });
        }
    };
    let entries = table.entries();
    for (i, entry) in entries.iter().enumerate() {
        for rate in entry.profile.flip_rates() {
            push(rate, BreakEvenSource::Flip(i), &mut found);
        }
    }
    for i in 0..entries.len() {
        for j in (i + 1)..entries.len() {
            for alpha in pair_break_even(&entries[i], &entries[j]) {
                push(alpha, BreakEvenSource::Pair(i, j), &mut found);
            }
        }
    }
    found.sort_by(|x, y| x.alpha.cmp(&y.alpha));
    found
}

/// All potentially optimal tax rates: pairwise payoff crossings inside
/// `[0, 1]`, every candidate's tie-resolution flips, and both endpoints —
/// deduplicated exactly and sorted ascending.
pub fn break_evens(market: &Market, candidates: &CandidateSet) -> Vec<BreakEven> {
    break_evens_from_table(&ResponseTable::new(market, candidates))
}

fn staircase_from(
    table: &ResponseTable,
    rates: &[Rational],
    mode: WelfareMode,
) -> Result<Vec<StaircaseStep>, ResponseError> {
    let mut steps: Vec<StaircaseStep> = Vec::new();
    for window in rates.windows(2) {
        let (lo, hi) = (&window[0], &window[1]);
        let midpoint = TaxRate::new((lo + hi) / crate::numeric::rat(2)).expect("midpoint in range");
        let entry = table.best_for_mode(&midpoint, mode)?;
        let lo_rate = TaxRate::new(lo.clone()).expect("break-even in range");
        let hi_rate = TaxRate::new(hi.clone()).expect("break-even in range");
        match steps.last_mut() {
            Some(last) if last.point.index == entry.point.index => {
                last.alpha_hi = hi.clone();
                last.welfare_hi = entry.welfare(&hi_rate, mode);
            }
            _ => steps.push(StaircaseStep {
                alpha_lo: lo.clone(),
                alpha_hi: hi.clone(),
                point: entry.point.clone(),
                welfare_lo: entry.welfare(&lo_rate, mode),
                welfare_hi: entry.welfare(&hi_rate, mode),
            }),
        }
    }
    Ok(steps)
}

/// Orders two breakdowns: floating totals first, exact rational parts as the
/// tie judge (surpluses of float-equal totals cannot disagree materially).
fn welfare_cmp(a: &WelfareBreakdown, b: &WelfareBreakdown) -> std::cmp::Ordering {
    a.total
        .partial_cmp(&b.total)
        .expect("welfare totals are finite")
        .then_with(|| a.rational_part().cmp(&b.rational_part()))
}

/// Runs the full upper level: evaluates welfare at every break-even rate and
/// returns the maximizer.
///
/// Equal-welfare rates resolve to the smallest rate in definition mode and
/// the largest in paper-example mode; a welfare curve that is flat across
/// every evaluated rate reports the rate 0 (the tax never binds).
pub fn optimize(
    market: &Market,
    candidates: &CandidateSet,
    mode: WelfareMode,
) -> Result<TaxSolution, ResponseError> {
    let table = ResponseTable::new(market, candidates);
    let break_evens = break_evens_from_table(&table);
    let rates: Vec<Rational> = break_evens.iter().map(|b| b.alpha.clone()).collect();

    let mut evaluations = Vec::with_capacity(rates.len());
    for alpha in &rates {
        let rate = TaxRate::new(alpha.clone()).expect("break-even in range");
        let entry = table.best_for_mode(&rate, mode)?;
        evaluations.push((alpha.clone(), entry, entry.welfare(&rate, mode)));
    }
    let mut best = 0usize;
    for i in 1..evaluations.len() {
        let ordering = welfare_cmp(&evaluations[i].2, &evaluations[best].2);
        let replace = match mode {
            WelfareMode::Definition => ordering == std::cmp::Ordering::Greater,
            WelfareMode::PaperExample => ordering != std::cmp::Ordering::Less,
        };
        if replace {
            best = i;
        }
    }
    // A curve that never moves means the tax is irrelevant; report rate 0.
    let flat = evaluations
        .iter()
        .all(|e| welfare_cmp(&e.2, &evaluations[0].2) == std::cmp::Ordering::Equal);
    if flat {
        best = 0;
    }

    let staircase = staircase_from(&table, &rates, mode)?;
    let (alpha, entry, welfare) = evaluations.swap_remove(best);
    Ok(TaxSolution {
        mode,
        alpha,
        point: entry.point.clone(),
        welfare,
        staircase,
        evaluated: rates,
        break_evens,
    })
}

/// A welfare evaluation at one sampled rate.
#[derive(Debug, Clone)]
pub struct CurveSample {
    pub alpha: Rational,
    /// Candidate index of the seller's response at this rate.
    pub point_index: usize,
    pub welfare: WelfareBreakdown,
}

/// The staircase plus row-by-row evaluations at every break-even and at
/// `samples` evenly spaced rates.
#[derive(Debug, Clone)]
pub struct WelfareCurve {
    pub steps: Vec<StaircaseStep>,
    pub samples: Vec<CurveSample>,
}

/// Evaluates the welfare staircase, sampling `samples >= 2` uniform rates on
/// top of the break-evens. Samples strictly between two consecutive
/// break-evens always see the same best response as the enclosing step.
pub fn welfare_curve(
    market: &Market,
    candidates: &CandidateSet,
    mode: WelfareMode,
    samples: usize,
) -> Result<WelfareCurve, ResponseError> {
    assert!(samples >= 2, "need at least the two endpoint samples");
    let table = ResponseTable::new(market, candidates);
    let break_evens = break_evens_from_table(&table);
    let rates: Vec<Rational> = break_evens.iter().map(|b| b.alpha.clone()).collect();
    let steps = staircase_from(&table, &rates, mode)?;

    let mut all: Vec<Rational> = rates;
    for k in 0..samples {
        let alpha = Rational::new((k as i64).into(), ((samples - 1) as i64).into());
        if !all.contains(&alpha) {
            all.push(alpha);
        }
    }
    all.sort();
    let mut rows = Vec::with_capacity(all.len());
    for alpha in all {
        let rate = TaxRate::new(alpha.clone()).expect("sample in range");
        let entry = table.best_for_mode(&rate, mode)?;
        debug_assert!(
            steps
                .iter()
                .filter(|s| s.alpha_lo < alpha && alpha < s.alpha_hi)
                .all(|s| s.point.index == entry.point.index),
            "best response must be constant strictly inside a step"
        );
        rows.push(CurveSample {
            alpha,
            point_index: entry.point.index,
            welfare: entry.welfare(&rate, mode),
        });
    }
    Ok(WelfareCurve {
        steps,
        samples: rows,
    })
}

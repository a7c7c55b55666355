//! Brute-force grid oracle for validating the candidate enumeration.
//!
//! The oracle sweeps a dense rational price grid, builds the consumer
//! assignment fresh at every grid point and records the seller's best
//! after-tax payoff per tax rate. Vertices contain the true optimum, so the
//! grid can never beat the enumeration (exact, one-sided); any violation
//! means a bug in the enumeration pipeline.
//!
//! Grid prices are exact multiples of a rational step, so every comparison
//! against the enumeration stays exact. Internally the sweep clears all
//! denominators once and runs on `i128` (falling back to big integers when
//! the cleared values could overflow); the arithmetic is the exact pipeline
//! arithmetic with a common denominator factored out, not an approximation.
//! Being fast is not the point here — being obviously correct is — but the
//! acceptance sweeps cover millions of points, so the inner loop stays lean.

use crate::arrangement::CandidateSet;
use crate::market::{Market, PriceVector};
use crate::numeric::{format_exact, rat, to_f64, Rational};
use crate::optimizer::TaxSolution;
use crate::response::{NetProfile, ResponseOutcome, ResponseTable, TaxRate};
use crate::welfare::social_welfare;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("grid spec invalid: {0}")]
    BadGrid(String),
    #[error("grid box excludes candidate point ({0}); the oracle would be unsound")]
    UncoveredCandidate(String),
    #[error("candidate set is empty")]
    NoCandidates,
}

/// A rectangular price grid: per-axis bounds plus a common rational step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub lower: Vec<Rational>,
    pub upper: Vec<Rational>,
    pub price_step: Rational,
    pub alpha_step: Rational,
}

impl GridSpec {
    pub fn new(
        lower: Vec<Rational>,
        upper: Vec<Rational>,
        price_step: Rational,
        alpha_step: Rational,
    ) -> Result<Self, OracleError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(OracleError::BadGrid("bounds dimension mismatch".into()));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if lo.is_negative() {
                return Err(OracleError::BadGrid("negative lower bound".into()));
            }
            if hi <= lo {
                return Err(OracleError::BadGrid(
                    "upper bound must exceed lower bound".into(),
                ));
            }
        }
        if !price_step.is_positive() || !alpha_step.is_positive() {
            return Err(OracleError::BadGrid("steps must be positive".into()));
        }
        Ok(Self {
            lower,
            upper,
            price_step,
            alpha_step,
        })
    }

    /// Default verification grid: per axis `[0, 1.2 * max candidate
    /// coordinate]` (at least `[0, 1]`), the step picked from a decimal
    /// ladder so the grid holds at most four million points, tax step 0.05.
    pub fn covering(candidates: &CandidateSet, m: usize) -> Result<Self, OracleError> {
        let mut upper = vec![Rational::one(); m];
        for point in &candidates.points {
            for (j, c) in point.prices.0.iter().enumerate() {
                let stretched = c * rat(6) / rat(5);
                if stretched > upper[j] {
                    upper[j] = stretched;
                }
            }
        }
        let lower = vec![Rational::zero(); m];
        let budget = 4_000_000f64;
        let mut step = Rational::new(1.into(), 100.into());
        loop {
            let points: f64 = upper
                .iter()
                .map(|hi| (to_f64(hi) / to_f64(&step)).floor() + 1.0)
                .product();
            if points <= budget {
                break;
            }
            step *= rat(2); // 0.01 -> 0.02 -> 0.04 ... deterministic ladder
        }
        Self::new(lower, upper, step, Rational::new(1.into(), 20.into()))
    }

    /// Inclusive index range of grid lines (multiples of the step) per axis.
    fn axis_ranges(&self) -> Result<Vec<(i64, i64)>, OracleError> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| {
                let k_lo = (lo / &self.price_step).ceil().to_integer();
                let k_hi = (hi / &self.price_step).floor().to_integer();
                let (k_lo, k_hi) = (
                    k_lo.to_i64()
                        .ok_or_else(|| OracleError::BadGrid("grid index exceeds i64".into()))?,
                    k_hi.to_i64()
                        .ok_or_else(|| OracleError::BadGrid("grid index exceeds i64".into()))?,
                );
                if k_lo > k_hi {
                    return Err(OracleError::BadGrid(
                        "no grid line falls inside the bounds".into(),
                    ));
                }
                Ok((k_lo, k_hi))
            })
            .collect()
    }

    pub fn total_points(&self) -> Result<u128, OracleError> {
        Ok(self
            .axis_ranges()?
            .iter()
            .map(|(lo, hi)| (hi - lo + 1) as u128)
            .product())
    }

    /// Whether a price point lies inside the box.
    pub fn covers(&self, prices: &PriceVector) -> bool {
        prices
            .0
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(c, (lo, hi))| lo <= c && c <= hi)
    }

    /// The tax rates `0, step, 2*step, ..., 1`.
    pub fn alpha_samples(&self) -> Vec<Rational> {
        let mut rates = Vec::new();
        let mut alpha = Rational::zero();
        while alpha < Rational::one() {
            rates.push(alpha.clone());
            alpha += &self.alpha_step;
        }
        rates.push(Rational::one());
        rates
    }
}

/// Integer arithmetic the sweep runs on: `i128` when the cleared
/// denominators fit, arbitrary precision otherwise.
trait SweepInt:
    Clone
    + Ord
    + num_traits::Zero
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    fn from_bigint(v: &BigInt) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_bigint(&self) -> BigInt;
    fn approx_f64(&self) -> f64;
}

impl SweepInt for i128 {
    fn from_bigint(v: &BigInt) -> Self {
        v.to_i128().expect("bound-checked")
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn approx_f64(&self) -> f64 {
        *self as f64
    }
}

impl SweepInt for BigInt {
    fn from_bigint(v: &BigInt) -> Self {
        v.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Market data with all denominators cleared: utilities become
/// `a_scaled - s_scaled * k` over the common denominator `denom`, and
/// revenue contributions `demand_scaled * k` over `denom / step`.
struct ClearedMarket {
    /// `intercept * L * step_den` per (consumer, product).
    a_scaled: Vec<Vec<BigInt>>,
    /// `sensitivity * L * step_num` per (consumer, product).
    s_scaled: Vec<Vec<BigInt>>,
    /// `demand * L` per (consumer, product).
    d_scaled: Vec<Vec<BigInt>>,
    taxed: Vec<bool>,
    /// `L * step_den`: common positive denominator of the utility numerators.
    denom: BigInt,
    step_num: BigInt,
    step_den: BigInt,
    lcm: BigInt,
}

impl ClearedMarket {
    fn new(market: &Market, step: &Rational) -> Self {
        let mut lcm = BigInt::one();
        for c in market.consumers() {
            for u in &c.utilities {
                lcm = lcm.lcm(u.intercept.denom());
                lcm = lcm.lcm(u.sensitivity.denom());
            }
            for d in &c.demands {
                lcm = lcm.lcm(d.denom());
            }
        }
        let step_num = step.numer().clone();
        let step_den = step.denom().clone();
        let scale = |r: &Rational, by: &BigInt| -> BigInt {
            // r * lcm * by is an integer because lcm clears r's denominator.
            let scaled = r * Rational::from_integer(&lcm * by);
            debug_assert!(scaled.denom().is_one());
            scaled.to_integer()
        };
        let mut a_scaled = Vec::new();
        let mut s_scaled = Vec::new();
        let mut d_scaled = Vec::new();
        for c in market.consumers() {
            a_scaled.push(
                c.utilities
                    .iter()
                    .map(|u| scale(&u.intercept, &step_den))
                    .collect(),
            );
            s_scaled.push(
                c.utilities
                    .iter()
                    .map(|u| scale(&u.sensitivity, &step_num))
                    .collect(),
            );
            d_scaled.push(c.demands.iter().map(|d| scale(d, &BigInt::one())).collect());
        }
        ClearedMarket {
            a_scaled,
            s_scaled,
            d_scaled,
            taxed: market.products().iter().map(|p| p.taxed).collect(),
            denom: &lcm * &step_den,
            step_num,
            step_den,
            lcm,
        }
    }

    /// Largest magnitude the sweep can produce, for the overflow check.
    fn magnitude_bound(&self, ranges: &[(i64, i64)], alphas: &[(BigInt, BigInt)]) -> BigInt {
        let mut k_max = BigInt::zero();
        for (lo, hi) in ranges {
            k_max = k_max.max(BigInt::from(lo.abs().max(hi.abs())));
        }
        let mut util_bound = BigInt::zero();
        let mut revenue_bound = BigInt::zero();
        for i in 0..self.a_scaled.len() {
            let mut best_rev = BigInt::zero();
            for j in 0..self.a_scaled[i].len() {
                let u = self.a_scaled[i][j].abs() + self.s_scaled[i][j].abs() * &k_max;
                util_bound = util_bound.max(u);
                best_rev = best_rev.max(self.d_scaled[i][j].abs() * &k_max);
            }
            revenue_bound += best_rev;
        }
        let mut alpha_bound = BigInt::one();
        for (num, den) in alphas {
            alpha_bound = alpha_bound.max(num.abs() + den.abs());
        }
        util_bound.max(revenue_bound * alpha_bound)
    }
}

/// Per-consumer purchase options at one grid point, denominators cleared:
/// the best untaxed and best taxed revenue contribution among the
/// utility-maximizing tie set. `None` on both sides means no purchase.
#[derive(Clone)]
struct ScaledOptions<T> {
    untaxed: Option<T>,
    taxed: Option<T>,
}

/// Winner of the sweep for one tax rate: the seller-optimal tie resolution
/// is already applied, so `untaxed + (1 - alpha) * taxed` is the payoff.
struct BestCell<T> {
    ks: Vec<i64>,
    untaxed: T,
    taxed: T,
    score: T,
    /// Tax-free welfare, computed lazily when a payoff tie needs breaking.
    welfare_key: Option<f64>,
}

fn sweep_impl<T: SweepInt>(
    cleared: &ClearedMarket,
    ranges: &[(i64, i64)],
    alphas: &[(BigInt, BigInt)],
) -> Vec<BestCell<T>> {
    let n = cleared.a_scaled.len();
    let m = ranges.len();
    let a: Vec<Vec<T>> = cleared
        .a_scaled
        .iter()
        .map(|row| row.iter().map(T::from_bigint).collect())
        .collect();
    let s: Vec<Vec<T>> = cleared
        .s_scaled
        .iter()
        .map(|row| row.iter().map(T::from_bigint).collect())
        .collect();
    let d: Vec<Vec<T>> = cleared
        .d_scaled
        .iter()
        .map(|row| row.iter().map(T::from_bigint).collect())
        .collect();
    let rates: Vec<(T, T)> = alphas
        .iter()
        .map(|(num, den)| (T::from_bigint(num), T::from_bigint(den)))
        .collect();
    let denom_f = cleared.denom.to_f64().unwrap_or(f64::INFINITY);
    let gross_scale_f = cleared.step_num.to_f64().unwrap_or(0.0)
        / (cleared.lcm.to_f64().unwrap_or(f64::INFINITY)
            * cleared.step_den.to_f64().unwrap_or(f64::INFINITY));

    // Fresh assignment options at one grid point. Returns the revenue sums
    // of tie-free consumers, fills `flips` with the two-sided options, and
    // reports an upper bound on any resolution's total revenue.
    let evaluate = |ks: &[i64], options: &mut Vec<ScaledOptions<T>>| -> (T, T, T) {
        options.clear();
        let mut fixed_untaxed = T::zero();
        let mut fixed_taxed = T::zero();
        let mut bound = T::zero();
        for i in 0..n {
            let mut best_u: Option<T> = None;
            for j in 0..m {
                let u = a[i][j].clone() - s[i][j].clone() * T::from_i64(ks[j]);
                if u < T::zero() {
                    continue;
                }
                match &best_u {
                    Some(incumbent) if *incumbent >= u => {}
                    _ => best_u = Some(u),
                }
            }
            let Some(top) = best_u else {
                options.push(ScaledOptions {
                    untaxed: None,
                    taxed: None,
                });
                continue;
            };
            let mut slot = ScaledOptions::<T> {
                untaxed: None,
                taxed: None,
            };
            for j in 0..m {
                let u = a[i][j].clone() - s[i][j].clone() * T::from_i64(ks[j]);
                if u != top {
                    continue;
                }
                let earned = d[i][j].clone() * T::from_i64(ks[j]);
                let side = if cleared.taxed[j] {
                    &mut slot.taxed
                } else {
                    &mut slot.untaxed
                };
                match side {
                    Some(incumbent) if *incumbent >= earned => {}
                    _ => *side = Some(earned),
                }
            }
            match (&slot.untaxed, &slot.taxed) {
                (Some(u), Some(t)) => {
                    bound = bound + if u >= t { u.clone() } else { t.clone() };
                    options.push(slot);
                }
                (Some(u), None) => {
                    bound = bound + u.clone();
                    fixed_untaxed = fixed_untaxed + u.clone();
                    options.push(ScaledOptions {
                        untaxed: None,
                        taxed: None,
                    });
                }
                (None, Some(t)) => {
                    bound = bound + t.clone();
                    fixed_taxed = fixed_taxed + t.clone();
                    options.push(ScaledOptions {
                        untaxed: None,
                        taxed: None,
                    });
                }
                (None, None) => unreachable!("a top utility implies an option"),
            }
        }
        (fixed_untaxed, fixed_taxed, bound)
    };
    // Seller-optimal resolution of the two-sided options at one rate:
    // returns the extra (untaxed, taxed) revenue on top of the fixed sums.
    let resolve_flips = |options: &[ScaledOptions<T>], num: &T, den: &T| -> (T, T) {
        let mut untaxed = T::zero();
        let mut taxed = T::zero();
        for slot in options {
            let (Some(u), Some(t)) = (&slot.untaxed, &slot.taxed) else {
                continue;
            };
            let keep_untaxed = den.clone() * u.clone();
            let keep_taxed = (den.clone() - num.clone()) * t.clone();
            // Ties go to the grosser side (and `u == t` favors the taxed
            // product only at a zero rate, where the payoffs agree anyway).
            if keep_untaxed > keep_taxed || (keep_untaxed == keep_taxed && u > t) {
                untaxed = untaxed + u.clone();
            } else {
                taxed = taxed + t.clone();
            }
        }
        (untaxed, taxed)
    };
    let welfare_key = |ks: &[i64], gross: &T| -> f64 {
        let mut surplus = 0.0;
        for i in 0..n {
            let mut best_u: Option<T> = None;
            for j in 0..m {
                let u = a[i][j].clone() - s[i][j].clone() * T::from_i64(ks[j]);
                if u < T::zero() {
                    continue;
                }
                match &best_u {
                    Some(incumbent) if *incumbent >= u => {}
                    _ => best_u = Some(u),
                }
            }
            if let Some(u) = best_u {
                surplus += (1.0 + u.approx_f64() / denom_f).ln();
            }
        }
        surplus + gross.approx_f64() * gross_scale_f
    };

    let mut options: Vec<ScaledOptions<T>> = Vec::with_capacity(n);
    let mut ks: Vec<i64> = ranges.iter().map(|(lo, _)| *lo).collect();
    let (u0, t0, _) = evaluate(&ks, &mut options);
    let mut best: Vec<BestCell<T>> = rates
        .iter()
        .map(|(num, den)| {
            let (fu, ft) = resolve_flips(&options, num, den);
            let untaxed = u0.clone() + fu;
            let taxed = t0.clone() + ft;
            BestCell {
                ks: ks.clone(),
                score: den.clone() * untaxed.clone() + (den.clone() - num.clone()) * taxed.clone(),
                untaxed,
                taxed,
                welfare_key: None,
            }
        })
        .collect();
    // Lower bound on every per-rate incumbent, in un-scaled payoff units:
    // points whose revenue bound cannot reach it are skipped wholesale.
    let recompute_guard = |best: &[BestCell<T>]| -> T {
        best.iter()
            .zip(&rates)
            .map(|(cell, (_, den))| {
                // floor(score / den); den > 0.
                let score = cell.score.to_bigint();
                let den = den.to_bigint();
                T::from_bigint(&score.div_floor(&den))
            })
            .min()
            .expect("at least one rate")
    };
    let mut guard = recompute_guard(&best);

    loop {
        // Advance the odometer (the first point was consumed above).
        let mut axis = ranges.len();
        loop {
            if axis == 0 {
                return best;
            }
            axis -= 1;
            if ks[axis] < ranges[axis].1 {
                ks[axis] += 1;
                for later in axis + 1..ranges.len() {
                    ks[later] = ranges[later].0;
                }
                break;
            }
        }

        let (fixed_u, fixed_t, bound) = evaluate(&ks, &mut options);
        if bound < guard {
            continue; // strictly below every incumbent at every rate
        }
        let has_flips = options
            .iter()
            .any(|slot| slot.untaxed.is_some() && slot.taxed.is_some());
        let mut improved = false;
        for (cell, (num, den)) in best.iter_mut().zip(&rates) {
            let (untaxed, taxed) = if has_flips {
                let (fu, ft) = resolve_flips(&options, num, den);
                (fixed_u.clone() + fu, fixed_t.clone() + ft)
            } else {
                (fixed_u.clone(), fixed_t.clone())
            };
            let score = den.clone() * untaxed.clone() + (den.clone() - num.clone()) * taxed.clone();
            if score > cell.score {
                cell.ks = ks.clone();
                cell.untaxed = untaxed;
                cell.taxed = taxed;
                cell.score = score;
                cell.welfare_key = None;
                improved = true;
            } else if score == cell.score {
                // Exact payoff tie: prefer the higher-welfare point; the
                // sweep order is lexicographic, so on a full tie the
                // incumbent (smaller prices) stays.
                if cell.welfare_key.is_none() {
                    let incumbent_gross = cell.untaxed.clone() + cell.taxed.clone();
                    cell.welfare_key = Some(welfare_key(&cell.ks, &incumbent_gross));
                }
                let challenger = welfare_key(&ks, &(untaxed.clone() + taxed.clone()));
                if challenger > cell.welfare_key.unwrap() {
                    cell.ks = ks.clone();
                    cell.untaxed = untaxed;
                    cell.taxed = taxed;
                    cell.welfare_key = Some(challenger);
                }
            }
        }
        if improved {
            guard = recompute_guard(&best);
        }
    }
}

/// One per requested tax rate: the grid point with the best after-tax payoff.
#[derive(Debug, Clone)]
pub struct GridBest {
    pub alpha: TaxRate,
    pub outcome: ResponseOutcome,
}

/// Sweeps the whole grid once and reports the best grid point per tax rate.
///
/// No candidate-cover check happens here; [`verify_solution`] performs it.
pub fn grid_sweep(
    market: &Market,
    alphas: &[TaxRate],
    grid: &GridSpec,
) -> Result<Vec<GridBest>, OracleError> {
    if grid.lower.len() != market.product_count() {
        return Err(OracleError::BadGrid(
            "grid dimension does not match product count".into(),
        ));
    }
    if alphas.is_empty() {
        return Ok(Vec::new());
    }
    let ranges = grid.axis_ranges()?;
    let cleared = ClearedMarket::new(market, &grid.price_step);
    let scaled_alphas: Vec<(BigInt, BigInt)> = alphas
        .iter()
        .map(|a| (a.value().numer().clone(), a.value().denom().clone()))
        .collect();

    let bound = cleared.magnitude_bound(&ranges, &scaled_alphas);
    let fits_i128 = bound < (BigInt::from(i128::MAX) >> 3);
    let winners = if fits_i128 {
        sweep_impl::<i128>(&cleared, &ranges, &scaled_alphas)
            .into_iter()
            .map(|c| (c.ks, c.untaxed.to_bigint(), c.taxed.to_bigint()))
            .collect::<Vec<_>>()
    } else {
        sweep_impl::<BigInt>(&cleared, &ranges, &scaled_alphas)
            .into_iter()
            .map(|c| (c.ks, c.untaxed, c.taxed))
            .collect::<Vec<_>>()
    };

    let mut results = Vec::with_capacity(alphas.len());
    for (alpha, (ks, untaxed_scaled, taxed_scaled)) in alphas.iter().zip(winners) {
        let prices = PriceVector::new(
            ks.iter()
                .map(|k| rat(*k) * &grid.price_step)
                .collect::<Vec<_>>(),
        )
        .expect("grid prices nonnegative");
        let (choices, gross, taxed) = NetProfile::new(market, &prices).resolve(alpha);
        // The scaled integers are the pipeline values with denominators
        // cleared; reconstruct and compare to catch any drift.
        let scale = Rational::new(cleared.step_num.clone(), &cleared.lcm * &cleared.step_den);
        debug_assert_eq!(Rational::from_integer(taxed_scaled) * &scale, taxed);
        debug_assert_eq!(
            Rational::from_integer(untaxed_scaled) * &scale,
            &gross - &taxed
        );
        let tax = alpha.value() * &taxed;
        results.push(GridBest {
            alpha: alpha.clone(),
            outcome: ResponseOutcome {
                prices,
                candidate: None,
                assignment: choices,
                net: &gross - &tax,
                gross,
                taxed_revenue: taxed,
                tax,
            },
        });
    }
    Ok(results)
}

/// Best grid point for a single tax rate.
pub fn grid_best_response(
    market: &Market,
    alpha: &TaxRate,
    grid: &GridSpec,
) -> Result<ResponseOutcome, OracleError> {
    let mut results = grid_sweep(market, std::slice::from_ref(alpha), grid)?;
    Ok(results.pop().expect("one rate in, one result out").outcome)
}

/// A single oracle check that did not hold.
#[derive(Debug, Clone)]
pub enum Violation {
    /// The grid beat the enumerated best response: enumeration is missing
    /// a candidate (or mis-evaluating one).
    GridBeatsEnumeration {
        alpha: Rational,
        grid_prices: PriceVector,
        grid_net: Rational,
        enumerated_net: Rational,
    },
    /// A grid-evaluated welfare exceeded the claimed optimum.
    GridBeatsWelfare {
        alpha: Rational,
        grid_prices: PriceVector,
        grid_welfare: f64,
        solution_welfare: f64,
    },
    /// The grid box does not contain every candidate point.
    UncoveredCandidate { prices: PriceVector },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_prices =
            |p: &PriceVector| p.0.iter().map(format_exact).collect::<Vec<_>>().join(", ");
        match self {
            Violation::GridBeatsEnumeration {
                alpha,
                grid_prices,
                grid_net,
                enumerated_net,
            } => write!(
                f,
                "alpha {}: grid point ({}) earns {} > enumerated best {}",
                format_exact(alpha),
                fmt_prices(grid_prices),
                format_exact(grid_net),
                format_exact(enumerated_net)
            ),
            Violation::GridBeatsWelfare {
                alpha,
                grid_prices,
                grid_welfare,
                solution_welfare,
            } => write!(
                f,
                "alpha {}: welfare {} at grid point ({}) exceeds optimum {}",
                format_exact(alpha),
                grid_welfare,
                fmt_prices(grid_prices),
                solution_welfare
            ),
            Violation::UncoveredCandidate { prices } => {
                write!(
                    f,
                    "candidate ({}) lies outside the grid box",
                    fmt_prices(prices)
                )
            }
        }
    }
}

/// Outcome of [`verify_solution`]; never panics on a violation.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub alphas_checked: usize,
    pub grid_points: u128,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays the solved game on a dense grid: at every evaluated tax rate plus
/// the grid's own rate samples, the grid best response must not beat the
/// enumerated one (exact) and no grid-evaluated welfare may exceed the
/// solution's optimum beyond the `1e-9` log-evaluation allowance.
///
/// The welfare-dominance check only applies to definition-mode solutions.
/// Under paper-example accounting the collected tax counts twice, so a grid
/// point with a slightly lower seller payoff but far more taxed revenue can
/// show a higher welfare figure than the game optimum even though the
/// seller would never play it; payoff dominance stays exact in both modes.
pub fn verify_solution(
    market: &Market,
    candidates: &CandidateSet,
    solution: &TaxSolution,
    grid: &GridSpec,
) -> Result<VerifyReport, OracleError> {
    let mut violations = Vec::new();
    for point in &candidates.points {
        if !grid.covers(&point.prices) {
            violations.push(Violation::UncoveredCandidate {
                prices: point.prices.clone(),
            });
        }
    }

    let mut rates: Vec<Rational> = solution.evaluated.clone();
    for alpha in grid.alpha_samples() {
        if !rates.contains(&alpha) {
            rates.push(alpha);
        }
    }
    rates.sort();
    let alphas: Vec<TaxRate> = rates
        .into_iter()
        .map(|a| TaxRate::new(a).expect("rates lie in [0, 1]"))
        .collect();

    let table = ResponseTable::new(market, candidates);
    let sweeps = grid_sweep(market, &alphas, grid)?;
    for best in &sweeps {
        let enumerated = table
            .best(&best.alpha)
            .map_err(|_| OracleError::NoCandidates)?;
        let enumerated_net = enumerated.net(&best.alpha);
        if best.outcome.net > enumerated_net {
            violations.push(Violation::GridBeatsEnumeration {
                alpha: best.alpha.value().clone(),
                grid_prices: best.outcome.prices.clone(),
                grid_net: best.outcome.net.clone(),
                enumerated_net,
            });
        }
        if solution.mode == crate::welfare::WelfareMode::Definition {
            let grid_welfare = social_welfare(
                market,
                &best.outcome.prices,
                &best.outcome.assignment,
                &best.alpha,
                solution.mode,
            );
            if grid_welfare.total > solution.welfare.total + 1e-9 {
                violations.push(Violation::GridBeatsWelfare {
                    alpha: best.alpha.value().clone(),
                    grid_prices: best.outcome.prices.clone(),
                    grid_welfare: grid_welfare.total,
                    solution_welfare: solution.welfare.total,
                });
            }
        }
    }
    Ok(VerifyReport {
        alphas_checked: alphas.len(),
        grid_points: grid.total_points()?,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::enumerate_candidates;
    use crate::market::{Consumer, LinearUtility, Product};
    use crate::numeric::ratio;
    use crate::optimizer::optimize;
    use crate::testutil::cola_market;
    use crate::welfare::WelfareMode;

    fn unit_grid(hi: i64, step: (i64, i64)) -> GridSpec {
        GridSpec::new(
            vec![rat(0), rat(0)],
            vec![rat(hi), rat(hi)],
            ratio(step.0, step.1),
            ratio(1, 20),
        )
        .unwrap()
    }

    fn single_consumer_market() -> Market {
        Market::new(
            vec![
                Product {
                    id: "a".into(),
                    index: 0,
                    taxed: true,
                },
                Product {
                    id: "b".into(),
                    index: 1,
                    taxed: false,
                },
            ],
            vec![Consumer {
                id: "c".into(),
                utilities: vec![
                    LinearUtility::new(rat(1), rat(1)),
                    LinearUtility::new(rat(1), rat(1)),
                ],
                demands: vec![rat(1), rat(1)],
            }],
        )
        .unwrap()
    }

    #[test]
    fn closed_form_single_consumer_optimum() {
        let market = single_consumer_market();
        let best = grid_best_response(&market, &TaxRate::zero(), &unit_grid(2, (1, 10))).unwrap();
        // The region corner (1, 1): one unit sold at price 1.
        assert_eq!(best.net, rat(1));
        assert_eq!(best.prices.0, vec![rat(1), rat(1)]);
    }

    #[test]
    fn degenerate_grid_contains_only_the_origin() {
        let market = single_consumer_market();
        let grid = GridSpec::new(
            vec![rat(0), rat(0)],
            vec![ratio(1, 2), ratio(1, 2)],
            rat(1),
            ratio(1, 20),
        )
        .unwrap();
        let best = grid_best_response(&market, &TaxRate::zero(), &grid).unwrap();
        assert_eq!(best.net, rat(0));
    }

    #[test]
    fn grid_never_beats_enumeration_on_the_reference_market() {
        let market = cola_market();
        // Deliberately small box: fine for the payoff bound, the best
        // revenue region is well inside.
        let grid = unit_grid(12, (1, 100));
        let best = grid_best_response(&market, &TaxRate::zero(), &grid).unwrap();
        // The grid lands on the displayed prices (4.70, 5.47).
        assert_eq!(best.net, ratio(10930967, 100));
        let candidates = enumerate_candidates(&market);
        let table = ResponseTable::new(&market, &candidates);
        let enumerated = table.best(&TaxRate::zero()).unwrap().net(&TaxRate::zero());
        assert!(best.net <= enumerated);
        assert!((crate::numeric::to_f64(&best.net) - 109309.67).abs() < 50.0);
    }

    #[test]
    fn refining_the_grid_never_decreases_the_optimum() {
        let market = cola_market();
        let mut previous: Option<Rational> = None;
        for den in [5i64, 10, 20, 40] {
            let best =
                grid_best_response(&market, &TaxRate::zero(), &unit_grid(12, (1, den))).unwrap();
            if let Some(prev) = previous {
                assert!(best.net >= prev);
            }
            previous = Some(best.net);
        }
    }

    #[test]
    fn verify_passes_on_the_reference_market() {
        let market = cola_market();
        let candidates = enumerate_candidates(&market);
        let solution = optimize(&market, &candidates, WelfareMode::Definition).unwrap();
        let grid = GridSpec::covering(&candidates, 2).unwrap();
        let report = verify_solution(&market, &candidates, &solution, &grid).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
    }

    #[test]
    fn verify_flags_a_corrupted_candidate_set() {
        let market = cola_market();
        let full = enumerate_candidates(&market);
        // Drop the revenue-optimal vertex (4.7, 93/17).
        let broken = CandidateSet {
            hyperplanes: full.hyperplanes.clone(),
            points: full
                .points
                .iter()
                .filter(|p| p.prices.0 != vec![ratio(47, 10), ratio(93, 17)])
                .cloned()
                .collect(),
        };
        assert_eq!(broken.points.len() + 1, full.points.len());
        let solution = optimize(&market, &broken, WelfareMode::Definition).unwrap();
        let grid = unit_grid(12, (1, 100));
        let report = verify_solution(&market, &broken, &solution, &grid).unwrap();
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::GridBeatsEnumeration { alpha, .. } if alpha.is_zero()
        )));
    }

    #[test]
    fn verify_is_trivial_for_an_empty_consumer_list() {
        let market = Market::new(
            vec![
                Product {
                    id: "a".into(),
                    index: 0,
                    taxed: true,
                },
                Product {
                    id: "b".into(),
                    index: 1,
                    taxed: false,
                },
            ],
            vec![],
        )
        .unwrap();
        let candidates = enumerate_candidates(&market);
        assert_eq!(candidates.len(), 1); // just the origin
        let solution = optimize(&market, &candidates, WelfareMode::Definition).unwrap();
        let grid = GridSpec::covering(&candidates, 2).unwrap();
        let report = verify_solution(&market, &candidates, &solution, &grid).unwrap();
        assert!(report.passed());
        assert_eq!(solution.welfare.total, 0.0);
    }

    #[test]
    fn uncovered_candidates_are_reported() {
        let market = cola_market();
        let candidates = enumerate_candidates(&market);
        let solution = optimize(&market, &candidates, WelfareMode::Definition).unwrap();
        let tiny = unit_grid(2, (1, 2));
        let report = verify_solution(&market, &candidates, &solution, &tiny).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::UncoveredCandidate { .. })));
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(vec![rat(0)], vec![rat(0)], rat(1), rat(1)).is_err());
        assert!(GridSpec::new(vec![rat(-1)], vec![rat(1)], rat(1), rat(1)).is_err());
        assert!(GridSpec::new(vec![rat(0)], vec![rat(1)], rat(0), rat(1)).is_err());
        assert!(GridSpec::new(vec![rat(0)], vec![rat(1), rat(2)], rat(1), rat(1)).is_err());
    }
}

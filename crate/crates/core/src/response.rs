//! The seller's pricing level: revenue accounting and best response over the
//! candidate set for a fixed tax rate.
//!
//! For a fixed price point the set of products a consumer is willing to buy
//! does not depend on the tax, but *which* tied product serves the seller
//! best does: an untaxed option contributes its full revenue while a taxed
//! option contributes `(1 - alpha)` of it. A point's payoff is therefore
//!
//! ```text
//! net(alpha) = U0 + (1 - alpha) T0 + sum_i max(U_i, (1 - alpha) T_i)
//! ```
//!
//! with one `max` term per consumer indifferent between a taxed and an
//! untaxed product — convex, piecewise affine and non-increasing, with at
//! most one kink per consumer. Resolving ties in the seller's favor at the
//! current rate is exactly what makes the payoff upper semicontinuous in
//! prices, so its supremum over the whole orthant is attained at an
//! arrangement vertex; any fixed tie rule would break that. The best
//! response is the upper envelope of these profiles; exact payoff ties
//! between candidates resolve optimistically (larger welfare first, then
//! the lexicographically smaller price vector).

use crate::arrangement::{CandidateSet, PricePoint};
use crate::choice::{tied_choices, Assignment, Choice};
use crate::market::{clipped_utility, Market, PriceVector};
use crate::numeric::{to_f64, Rational};
use crate::welfare::{WelfareBreakdown, WelfareMode};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResponseError {
    #[error("tax rate must lie in [0, 1], got {0}")]
    TaxRateOutOfRange(String),
    #[error("candidate set is empty")]
    NoCandidates,
}

/// Ad-valorem tax rate, guaranteed inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaxRate(Rational);

impl TaxRate {
    pub fn new(alpha: Rational) -> Result<Self, ResponseError> {
        if alpha < Rational::zero() || alpha > Rational::one() {
            return Err(ResponseError::TaxRateOutOfRange(
                crate::numeric::format_exact(&alpha),
            ));
        }
        Ok(Self(alpha))
    }

    pub fn zero() -> Self {
        Self(Rational::zero())
    }

    pub fn one() -> Self {
        Self(Rational::one())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// `1 - alpha`, the taxed-revenue retention factor.
    pub fn retained(&self) -> Rational {
        Rational::one() - &self.0
    }
}

/// Everything the seller cares about at one price point and tax rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseOutcome {
    pub prices: PriceVector,
    /// Index into the candidate set when the point came from enumeration;
    /// `None` for free points such as grid-oracle evaluations.
    pub candidate: Option<usize>,
    pub assignment: Assignment,
    pub gross: Rational,
    pub taxed_revenue: Rational,
    /// `alpha * taxed_revenue`, transferred to the government.
    pub tax: Rational,
    /// `gross - tax`.
    pub net: Rational,
}

/// Total revenue `sum D_ij * p_j` over purchasing consumers.
pub fn gross_revenue(market: &Market, prices: &PriceVector, choices: &Assignment) -> Rational {
    revenue_split(market, prices, choices).0
}

/// Revenue earned on taxed products only.
pub fn taxed_revenue(market: &Market, prices: &PriceVector, choices: &Assignment) -> Rational {
    revenue_split(market, prices, choices).1
}

/// `(gross, taxed part)` in one pass.
pub fn revenue_split(
    market: &Market,
    prices: &PriceVector,
    choices: &Assignment,
) -> (Rational, Rational) {
    let mut gross = Rational::zero();
    let mut taxed = Rational::zero();
    for (i, j) in choices.purchases() {
        let earned = &market.consumers()[i].demands[j] * prices.get(j);
        if market.products()[j].taxed {
            taxed += &earned;
        }
        gross += earned;
    }
    (gross, taxed)
}

/// Tax collected: `alpha * (taxed-product revenue)`.
pub fn tax_collected(
    market: &Market,
    prices: &PriceVector,
    choices: &Assignment,
    alpha: &TaxRate,
) -> Rational {
    alpha.value() * taxed_revenue(market, prices, choices)
}

/// After-tax payoff: `gross - tax`, equivalently
/// `untaxed revenue + (1 - alpha) * taxed revenue`.
pub fn net_utility(
    market: &Market,
    prices: &PriceVector,
    choices: &Assignment,
    alpha: &TaxRate,
) -> Rational {
    let (gross, taxed) = revenue_split(market, prices, choices);
    gross - alpha.value() * taxed
}

/// One purchasing consumer's revenue options at a price point: the best
/// untaxed and the best taxed product among its utility-maximizing tie set,
/// as `(product index, revenue contribution)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PurchaseOptions {
    pub untaxed: Option<(usize, Rational)>,
    pub taxed: Option<(usize, Rational)>,
}

impl PurchaseOptions {
    /// The product bought at rate `alpha`: the option with the larger
    /// after-tax contribution, ties by gross contribution then lowest index.
    fn resolve(&self, alpha: &TaxRate) -> (usize, Rational, bool) {
        match (&self.untaxed, &self.taxed) {
            (Some((j, earned)), None) => (*j, earned.clone(), false),
            (None, Some((j, earned))) => (*j, earned.clone(), true),
            (Some((ju, u)), Some((jt, t))) => {
                // After-tax contribution first; a payoff tie goes to the
                // grosser side, and equal gross keeps the taxed sale (such
                // full ties only bind at a zero rate, where every welfare
                // term agrees anyway).
                let kept = alpha.retained() * t;
                let take_untaxed = match u.cmp(&kept) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => u > t,
                };
                if take_untaxed {
                    (*ju, u.clone(), false)
                } else {
                    (*jt, t.clone(), true)
                }
            }
            (None, None) => unreachable!("purchase options always carry a side"),
        }
    }
}

/// Tax-dependent payoff profile of one price point: per-consumer purchase
/// options plus the realized consumer surplus (tie products share the same
/// utility, so the surplus does not depend on how ties resolve).
#[derive(Debug, Clone)]
pub struct NetProfile {
    options: Vec<Option<PurchaseOptions>>,
    fixed_untaxed: Rational,
    fixed_taxed: Rational,
    /// `(U_i, T_i)` for consumers holding both a taxed and an untaxed option.
    two_sided: Vec<(Rational, Rational)>,
    surplus: f64,
}

impl NetProfile {
    pub fn new(market: &Market, prices: &PriceVector) -> Self {
        let mut options = Vec::with_capacity(market.consumer_count());
        let mut fixed_untaxed = Rational::zero();
        let mut fixed_taxed = Rational::zero();
        let mut two_sided = Vec::new();
        let mut surplus = 0.0;
        for consumer in market.consumers() {
            let tied = tied_choices(consumer, prices);
            if tied.is_empty() {
                options.push(None);
                continue;
            }
            surplus += (1.0 + to_f64(&clipped_utility(consumer, tied[0], prices))).ln();
            let mut best: [Option<(usize, Rational)>; 2] = [None, None];
            for j in tied {
                let earned = &consumer.demands[j] * prices.get(j);
                let side = usize::from(market.products()[j].taxed);
                match &best[side] {
                    Some((_, incumbent)) if *incumbent >= earned => {}
                    _ => best[side] = Some((j, earned)),
                }
            }
            let [untaxed, taxed] = best;
            match (&untaxed, &taxed) {
                (Some((_, u)), Some((_, t))) => two_sided.push((u.clone(), t.clone())),
                (Some((_, u)), None) => fixed_untaxed += u,
                (None, Some((_, t))) => fixed_taxed += t,
                (None, None) => unreachable!("tie set was nonempty"),
            }
            options.push(Some(PurchaseOptions { untaxed, taxed }));
        }
        NetProfile {
            options,
            fixed_untaxed,
            fixed_taxed,
            two_sided,
            surplus,
        }
    }

    pub fn surplus(&self) -> f64 {
        self.surplus
    }

    /// After-tax payoff at `alpha` under seller-optimal tie resolution.
    pub fn net(&self, alpha: &TaxRate) -> Rational {
        let kept = alpha.retained();
        let mut net = &self.fixed_untaxed + &self.fixed_taxed * &kept;
        for (u, t) in &self.two_sided {
            let taxed_side = t * &kept;
            net += if *u > taxed_side {
                u.clone()
            } else {
                taxed_side
            };
        }
        net
    }

    /// The payoff split `(untaxed-effective, taxed-effective)` at `alpha`,
    /// so that `net = untaxed + (1 - alpha) * taxed` locally around it.
    pub fn affine_at(&self, alpha: &TaxRate) -> (Rational, Rational) {
        let mut untaxed = self.fixed_untaxed.clone();
        let mut taxed = self.fixed_taxed.clone();
        for options in self.options.iter().flatten() {
            if options.untaxed.is_some() && options.taxed.is_some() {
                let (_, earned, is_taxed) = options.resolve(alpha);
                if is_taxed {
                    taxed += earned;
                } else {
                    untaxed += earned;
                }
            }
        }
        (untaxed, taxed)
    }

    /// Rates where a consumer's seller-optimal tie resolution switches from
    /// the taxed to the untaxed option: `1 - U/T` whenever `0 < U < T`.
    pub fn flip_rates(&self) -> Vec<Rational> {
        self.two_sided
            .iter()
            .filter(|(u, t)| u.is_positive() && u < t)
            .map(|(u, t)| Rational::one() - u / t)
            .collect()
    }

    /// The full resolution at `alpha`: who buys what, and the revenue split.
    pub fn resolve(&self, alpha: &TaxRate) -> (Assignment, Rational, Rational) {
        let mut gross = Rational::zero();
        let mut taxed_total = Rational::zero();
        let assignment = Assignment(
            self.options
                .iter()
                .map(|slot| match slot {
                    None => Choice::NoPurchase,
                    Some(options) => {
                        let (j, earned, is_taxed) = options.resolve(alpha);
                        if is_taxed {
                            taxed_total += &earned;
                        }
                        gross += earned;
                        Choice::Buy(j)
                    }
                })
                .collect(),
        );
        (assignment, gross, taxed_total)
    }
}

/// A candidate with its payoff profile cached.
#[derive(Debug, Clone)]
pub struct EvaluatedCandidate {
    pub point: PricePoint,
    pub profile: NetProfile,
}

impl EvaluatedCandidate {
    pub fn net(&self, alpha: &TaxRate) -> Rational {
        self.profile.net(alpha)
    }

    pub fn surplus(&self) -> f64 {
        self.profile.surplus()
    }

    /// Welfare breakdown at this candidate under the rate's resolution.
    pub fn welfare(&self, alpha: &TaxRate, mode: WelfareMode) -> WelfareBreakdown {
        let (_, gross, taxed) = self.profile.resolve(alpha);
        WelfareBreakdown::from_parts(self.profile.surplus(), gross, taxed, alpha, mode)
    }

    pub fn outcome(&self, alpha: &TaxRate) -> ResponseOutcome {
        let (assignment, gross, taxed) = self.profile.resolve(alpha);
        let tax = alpha.value() * &taxed;
        ResponseOutcome {
            prices: self.point.prices.clone(),
            candidate: Some(self.point.index),
            assignment,
            net: &gross - &tax,
            gross,
            taxed_revenue: taxed,
            tax,
        }
    }
}

/// Candidate evaluations for one market, reusable across tax rates.
#[derive(Debug, Clone)]
pub struct ResponseTable {
    entries: Vec<EvaluatedCandidate>,
}

impl ResponseTable {
    pub fn new(market: &Market, candidates: &CandidateSet) -> Self {
        let entries = candidates
            .points
            .iter()
            .map(|point| EvaluatedCandidate {
                profile: NetProfile::new(market, &point.prices),
                point: point.clone(),
            })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[EvaluatedCandidate] {
        &self.entries
    }

    /// The payoff-maximizing candidate at `alpha`. Ties go to the larger
    /// tax-free welfare, then to the lexicographically smaller price vector
    /// (entries are already price-sorted, so first-found wins the last rule).
    pub fn best(&self, alpha: &TaxRate) -> Result<&EvaluatedCandidate, ResponseError> {
        self.best_for_mode(alpha, WelfareMode::Definition)
    }

    /// Like [`ResponseTable::best`], but payoff ties are judged by welfare
    /// in the given mode — the follower is optimistic toward the objective
    /// the upper level actually optimizes.
    pub fn best_for_mode(
        &self,
        alpha: &TaxRate,
        mode: WelfareMode,
    ) -> Result<&EvaluatedCandidate, ResponseError> {
        let mut iter = self.entries.iter();
        let mut best = iter.next().ok_or(ResponseError::NoCandidates)?;
        let mut best_net = best.net(alpha);
        for entry in iter {
            let net = entry.net(alpha);
            if net > best_net
                || (net == best_net
                    && entry.welfare(alpha, mode).total > best.welfare(alpha, mode).total)
            {
                best = entry;
                best_net = net;
            }
        }
        Ok(best)
    }

    /// All candidates achieving the optimal payoff at `alpha`.
    pub fn tied_at(&self, alpha: &TaxRate) -> Vec<&EvaluatedCandidate> {
        match self.best(alpha) {
            Ok(best) => {
                let top = best.net(alpha);
                self.entries
                    .iter()
                    .filter(|e| e.net(alpha) == top)
                    .collect()
            }
            Err(_) => Vec::new(),
        }
    }
}

/// The seller's optimal candidate at tax rate `alpha`.
pub fn best_response(
    market: &Market,
    candidates: &CandidateSet,
    alpha: &TaxRate,
) -> Result<ResponseOutcome, ResponseError> {
    let table = ResponseTable::new(market, candidates);
    Ok(table.best(alpha)?.outcome(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::enumerate_candidates;
    use crate::choice::assignment;
    use crate::numeric::{rat, ratio};
    use crate::testutil::cola_market;

    fn at(market: &Market, p: Vec<Rational>) -> (PriceVector, Assignment) {
        let prices = PriceVector::new(p).unwrap();
        let choices = assignment(market, &prices);
        (prices, choices)
    }

    #[test]
    fn gross_revenue_at_printed_prices() {
        let market = cola_market();
        // 9942 * 4.7 + 11441 * 5.47
        let (p, a) = at(&market, vec![ratio(47, 10), ratio(547, 100)]);
        assert_eq!(gross_revenue(&market, &p, &a), ratio(10930967, 100));
        // Only the high segment still buys at (4.7, 8.7).
        let (p, a) = at(&market, vec![ratio(47, 10), ratio(87, 10)]);
        assert_eq!(gross_revenue(&market, &p, &a), ratio(467274, 10));
        let (p, a) = at(&market, vec![rat(0), rat(0)]);
        assert_eq!(gross_revenue(&market, &p, &a), rat(0));
    }

    #[test]
    fn tax_is_alpha_times_taxed_revenue() {
        let market = cola_market();
        let (p, a) = at(&market, vec![ratio(47, 10), ratio(547, 100)]);
        assert_eq!(
            tax_collected(&market, &p, &a, &TaxRate::one()),
            ratio(467274, 10)
        );
        assert_eq!(tax_collected(&market, &p, &a, &TaxRate::zero()), rat(0));
        // No sugary purchases at (5.63, 5.47): no tax at any rate.
        let (p, a) = at(&market, vec![ratio(563, 100), ratio(547, 100)]);
        assert_eq!(tax_collected(&market, &p, &a, &TaxRate::one()), rat(0));
    }

    #[test]
    fn net_equals_untaxed_plus_discounted_taxed() {
        let market = cola_market();
        let (p, a) = at(&market, vec![ratio(47, 10), ratio(547, 100)]);
        assert_eq!(
            net_utility(&market, &p, &a, &TaxRate::one()),
            ratio(6258227, 100)
        );
        assert_eq!(
            net_utility(&market, &p, &a, &TaxRate::zero()),
            ratio(10930967, 100)
        );
        let half = TaxRate::new(ratio(1, 2)).unwrap();
        let (gross, taxed) = revenue_split(&market, &p, &a);
        assert_eq!(
            net_utility(&market, &p, &a, &half),
            gross - ratio(1, 2) * taxed
        );
    }

    #[test]
    fn zero_tax_best_response_is_the_double_budget_vertex() {
        let market = cola_market();
        let candidates = enumerate_candidates(&market);
        let best = best_response(&market, &candidates, &TaxRate::zero()).unwrap();
        assert_eq!(best.prices.0, vec![ratio(47, 10), ratio(93, 17)]);
        // Exact revenue at the exact vertex: 9942*47/10 + 11441*93/17.
        assert_eq!(best.gross, ratio(546582, 5));
        assert_eq!(best.net, ratio(546582, 5));
    }

    #[test]
    fn full_tax_ties_resolve_toward_welfare() {
        let market = cola_market();
        let candidates = enumerate_candidates(&market);
        let table = ResponseTable::new(&market, &candidates);
        let tied = table.tied_at(&TaxRate::one());
        // Four candidates share the optimal payoff: all realize only the
        // sugar-free revenue 11441 * 93/17 = 62589 under a full tax.
        assert_eq!(tied.len(), 4);
        for entry in &tied {
            assert_eq!(entry.net(&TaxRate::one()), rat(62589));
            assert_eq!(entry.point.prices.0[1], ratio(93, 17));
        }
        // The welfare tie-break keeps the double-budget vertex, where the
        // sugary sale at 4.7 adds its full revenue on top.
        let best = table.best(&TaxRate::one()).unwrap();
        assert_eq!(best.point.prices.0, vec![ratio(47, 10), ratio(93, 17)]);
    }

    #[test]
    fn tie_resolution_switches_with_the_tax_rate() {
        // One consumer indifferent at its double-budget vertex between a
        // taxed product earning 10 and an untaxed one earning 9: the seller
        // keeps the taxed sale only while (1 - alpha) * 10 >= 9.
        let market = Market::new(
            vec![
                crate::market::Product {
                    id: "t".into(),
                    index: 0,
                    taxed: true,
                },
                crate::market::Product {
                    id: "u".into(),
                    index: 1,
                    taxed: false,
                },
            ],
            vec![crate::market::Consumer {
                id: "c".into(),
                utilities: vec![
                    crate::market::LinearUtility::new(rat(1), ratio(1, 10)),
                    crate::market::LinearUtility::new(ratio(9, 10), ratio(1, 10)),
                ],
                demands: vec![rat(1), rat(1)],
            }],
        )
        .unwrap();
        let prices = PriceVector::new(vec![rat(10), rat(9)]).unwrap();
        let profile = NetProfile::new(&market, &prices);
        assert_eq!(profile.flip_rates(), vec![ratio(1, 10)]);
        assert_eq!(profile.net(&TaxRate::zero()), rat(10));
        assert_eq!(profile.net(&TaxRate::one()), rat(9));
        let mid = TaxRate::new(ratio(1, 10)).unwrap();
        assert_eq!(profile.net(&mid), rat(9));
        // Below the flip the taxed sale is kept, above it the untaxed one.
        let (a, _, taxed) = profile.resolve(&TaxRate::new(ratio(1, 20)).unwrap());
        assert_eq!(a.0, vec![Choice::Buy(0)]);
        assert_eq!(taxed, rat(10));
        let (a, gross, taxed) = profile.resolve(&TaxRate::new(ratio(1, 5)).unwrap());
        assert_eq!(a.0, vec![Choice::Buy(1)]);
        assert_eq!(gross, rat(9));
        assert_eq!(taxed, rat(0));
        // At the flip itself the payoffs tie and the gross rule keeps the
        // taxed sale (10 > 9).
        let (a, _, _) = profile.resolve(&mid);
        assert_eq!(a.0, vec![Choice::Buy(0)]);
    }

    #[test]
    fn single_candidate_is_returned_as_is() {
        let market = cola_market();
        let full = enumerate_candidates(&market);
        let one = CandidateSet {
            hyperplanes: full.hyperplanes.clone(),
            points: vec![full.points[3].clone()],
        };
        let best = best_response(&market, &one, &TaxRate::zero()).unwrap();
        assert_eq!(best.prices, full.points[3].prices);
        assert_eq!(best.candidate, Some(full.points[3].index));
    }

    #[test]
    fn envelope_dominates_every_candidate_and_is_monotone() {
        let market = cola_market();
        let candidates = enumerate_candidates(&market);
        let table = ResponseTable::new(&market, &candidates);
        let mut previous: Option<Rational> = None;
        for k in 0..=20 {
            let alpha = TaxRate::new(ratio(k, 20)).unwrap();
            let best_net = table.best(&alpha).unwrap().net(&alpha);
            for entry in table.entries() {
                assert!(best_net >= entry.net(&alpha));
            }
            if let Some(prev) = previous {
                assert!(best_net <= prev, "envelope must be non-increasing");
            }
            previous = Some(best_net);
        }
    }

    #[test]
    fn reference_best_response_is_constant_in_alpha() {
        let market = cola_market();
        let candidates = enumerate_candidates(&market);
        let table = ResponseTable::new(&market, &candidates);
        for k in 0..=10 {
            let alpha = TaxRate::new(ratio(k, 10)).unwrap();
            let best = table.best(&alpha).unwrap();
            assert_eq!(best.point.prices.0, vec![ratio(47, 10), ratio(93, 17)]);
        }
    }

    #[test]
    fn tax_rate_validation() {
        assert!(TaxRate::new(ratio(11, 10)).is_err());
        assert!(TaxRate::new(ratio(-1, 10)).is_err());
        assert!(TaxRate::new(ratio(1, 3)).is_ok());
    }

    proptest::proptest! {
        // Every candidate payoff profile is convex, piecewise affine and
        // non-increasing in the rate, whatever ties it contains.
        #[test]
        fn profiles_are_convex_and_non_increasing(seed in 0u64..300) {
            let mut rng = crate::testutil::SmallRng::new(seed);
            let market = crate::testutil::random_market(&mut rng, 4);
            let candidates = enumerate_candidates(&market);
            let pick = (rng.range(0, candidates.len() as i64 - 1)) as usize;
            let profile = NetProfile::new(&market, &candidates.points[pick].prices);
            let nets: Vec<Rational> = (0..=10)
                .map(|k| profile.net(&TaxRate::new(ratio(k, 10)).unwrap()))
                .collect();
            for pair in nets.windows(2) {
                proptest::prop_assert!(pair[0] >= pair[1]);
            }
            for triple in nets.windows(3) {
                proptest::prop_assert!(&triple[0] + &triple[2] >= &triple[1] * rat(2));
            }
            // Flip rates stay inside the open unit interval.
            for rate in profile.flip_rates() {
                proptest::prop_assert!(rate > rat(0) && rate < rat(1));
            }
        }
    }
}

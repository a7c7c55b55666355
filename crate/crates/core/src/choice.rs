//! Consumer product selection at fixed prices (the lowest level of the game).
//!
//! Each consumer independently buys the product with the highest raw utility
//! among those with nonnegative raw utility, or nothing when every raw
//! utility is negative. Buying at exactly zero utility counts as buying:
//! that is what makes boundary price points revenue-relevant. Exact utility
//! ties between products resolve in the seller's favor — the highest revenue
//! contribution wins, then the lowest product index. Seller-favoring ties
//! are what make the seller's payoff upper semicontinuous in prices, so that
//! its supremum is actually attained at an arrangement vertex; a neutral
//! tie rule would leave the pricing level without a maximizer.

use crate::market::{raw_utility, Consumer, Market, PriceVector, Product};
use crate::numeric::Rational;
use num_traits::Zero;

/// What one consumer does at a given price vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    Buy(usize),
    NoPurchase,
}

impl Choice {
    pub fn product(&self) -> Option<usize> {
        match self {
            Choice::Buy(j) => Some(*j),
            Choice::NoPurchase => None,
        }
    }
}

/// One `Choice` per consumer, in `Market::consumers` order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<Choice>);

impl Assignment {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Iterates `(consumer index, bought product index)` over purchasers.
    pub fn purchases(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.product().map(|j| (i, j)))
    }
}

/// The products a consumer is willing to take: every index attaining the
/// maximal raw utility, provided that maximum is nonnegative.
pub fn tied_choices(consumer: &Consumer, prices: &PriceVector) -> Vec<usize> {
    let mut best: Option<Rational> = None;
    let mut tied: Vec<usize> = Vec::new();
    for j in 0..prices.len() {
        let value = raw_utility(consumer, j, prices);
        if value < Rational::zero() {
            continue;
        }
        match &best {
            Some(incumbent) if *incumbent > value => {}
            Some(incumbent) if *incumbent == value => tied.push(j),
            _ => {
                best = Some(value);
                tied.clear();
                tied.push(j);
            }
        }
    }
    tied
}

/// Utility-maximizing selection for a single consumer; among equally good
/// products the one earning the seller most (then the lowest index).
pub fn choose(consumer: &Consumer, prices: &PriceVector, products: &[Product]) -> Choice {
    debug_assert_eq!(products.len(), prices.len());
    let tied = tied_choices(consumer, prices);
    tied.into_iter()
        .map(Choice::Buy)
        .max_by(|a, b| {
            let earned = |c: &Choice| {
                let j = c.product().expect("tied choices are purchases");
                &consumer.demands[j] * prices.get(j)
            };
            // Equal earnings fall back to the reversed index comparison,
            // making the lowest index the maximum; the ordering is total
            // over distinct products, so the winner is unique.
            earned(a)
                .cmp(&earned(b))
                .then_with(|| b.product().cmp(&a.product()))
        })
        .unwrap_or(Choice::NoPurchase)
}

/// Applies [`choose`] to every consumer; the lower level is separable.
pub fn assignment(market: &Market, prices: &PriceVector) -> Assignment {
    Assignment(
        market
            .consumers()
            .iter()
            .map(|c| choose(c, prices, market.products()))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Consumer, LinearUtility, Market, Product};
    use crate::numeric::{rat, ratio};
    use crate::testutil::{cola_market, random_market, SmallRng};
    use proptest::prelude::*;

    fn prices(p: Vec<crate::numeric::Rational>) -> PriceVector {
        PriceVector::new(p).unwrap()
    }

    #[test]
    fn buys_at_exactly_zero_utility() {
        let market = cola_market();
        let (_, medium) = market.consumer_by_id("medium").unwrap();
        // At (4.7, 47/24) the sugar-free utility is exactly zero and the
        // sugary one is negative: still a purchase.
        let p = prices(vec![ratio(47, 10), ratio(47, 24)]);
        assert_eq!(choose(medium, &p, market.products()), Choice::Buy(1));
        assert_eq!(raw_utility(medium, 1, &p), rat(0));
    }

    #[test]
    fn no_purchase_when_all_utilities_negative() {
        let market = cola_market();
        let (_, medium) = market.consumer_by_id("medium").unwrap();
        let p = prices(vec![ratio(47, 10), ratio(547, 100)]);
        assert_eq!(choose(medium, &p, market.products()), Choice::NoPurchase);
    }

    #[test]
    fn exact_tie_goes_to_the_revenue_maximizing_product() {
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
            vec![Consumer {
                id: "c".into(),
                utilities: vec![
                    LinearUtility::new(rat(2), rat(1)),
                    LinearUtility::new(rat(2), rat(1)),
                ],
                demands: vec![rat(5), rat(5)],
            }],
        )
        .unwrap();
        // Equal utilities and prices: the remaining tie goes to the lowest
        // index.
        let p = prices(vec![rat(1), rat(1)]);
        assert_eq!(tied_choices(&market.consumers()[0], &p), vec![0, 1]);
        assert_eq!(
            choose(&market.consumers()[0], &p, market.products()),
            Choice::Buy(0)
        );
        // With unequal sensitivities a tie can pair unequal prices; the
        // dearer product wins the seller more.
        let steep = Market::new(
            market.products().to_vec(),
            vec![Consumer {
                id: "s".into(),
                utilities: vec![
                    LinearUtility::new(rat(2), rat(1)),
                    LinearUtility::new(rat(2), rat(2)),
                ],
                demands: vec![rat(5), rat(5)],
            }],
        )
        .unwrap();
        let p = prices(vec![rat(2), rat(1)]);
        assert_eq!(
            raw_utility(&steep.consumers()[0], 0, &p),
            raw_utility(&steep.consumers()[0], 1, &p)
        );
        assert_eq!(
            choose(&steep.consumers()[0], &p, steep.products()),
            Choice::Buy(0)
        );
        // The reference market's medium segment is exactly indifferent at
        // (0, 1.25); the sugar-free product carries all the revenue.
        let cola = cola_market();
        let (_, medium) = cola.consumer_by_id("medium").unwrap();
        let p = prices(vec![rat(0), ratio(5, 4)]);
        assert_eq!(raw_utility(medium, 0, &p), raw_utility(medium, 1, &p));
        assert_eq!(choose(medium, &p, cola.products()), Choice::Buy(1));
    }

    #[test]
    fn assignment_reproduces_reference_patterns() {
        let market = cola_market();
        let by_id = |id: &str| market.product_by_id(id).unwrap().index;
        let (cola, zero) = (by_id("cola"), by_id("zero"));

        let a = assignment(&market, &prices(vec![ratio(94, 100), ratio(158, 100)]));
        assert_eq!(
            a.0,
            vec![Choice::Buy(cola), Choice::Buy(zero), Choice::Buy(zero)]
        );

        let a = assignment(&market, &prices(vec![rat(0), ratio(196, 100)]));
        assert_eq!(
            a.0,
            vec![Choice::Buy(cola), Choice::Buy(cola), Choice::Buy(zero)]
        );

        // Above every budget line nobody buys.
        let a = assignment(&market, &prices(vec![rat(100), rat(100)]));
        assert!(a.0.iter().all(|c| *c == Choice::NoPurchase));
    }

    #[test]
    fn separability_across_consumers() {
        let mut rng = SmallRng::new(1);
        for _ in 0..40 {
            let market = random_market(&mut rng, 4);
            if market.consumer_count() < 2 {
                continue;
            }
            let p = prices(vec![
                ratio(rng.range(0, 60), 10),
                ratio(rng.range(0, 60), 10),
            ]);
            let base = assignment(&market, &p);
            // Perturb consumer 0's coefficients; everyone else's choice stays.
            let mut consumers = market.consumers().to_vec();
            consumers[0].utilities[0] = LinearUtility::new(ratio(7, 10), ratio(3, 10));
            let altered = Market::new(market.products().to_vec(), consumers).unwrap();
            let after = assignment(&altered, &p);
            assert_eq!(base.0[1..], after.0[1..]);
        }
    }

    #[test]
    fn monotone_exit_under_own_price_increase() {
        let mut rng = SmallRng::new(2);
        for _ in 0..200 {
            let market = random_market(&mut rng, 4);
            let p0 = ratio(rng.range(0, 80), 10);
            let p1 = ratio(rng.range(0, 80), 10);
            let j = rng.range(0, 1) as usize;
            let bump = ratio(rng.range(1, 40), 10);
            let before = prices(vec![p0.clone(), p1.clone()]);
            let mut raised = vec![p0, p1];
            raised[j] += bump;
            let after = prices(raised);
            for c in market.consumers() {
                let was = choose(c, &before, market.products());
                let now = choose(c, &after, market.products());
                // A consumer not on product j must be entirely unaffected;
                // in particular nobody ever moves toward j.
                if was != Choice::Buy(j) {
                    assert_eq!(was, now, "raising p_{j} must not disturb non-{j} choices");
                }
            }
        }
    }

    #[test]
    fn constant_inside_a_choice_region() {
        use crate::arrangement::build_hyperplanes;
        let mut rng = SmallRng::new(3);
        let mut checked = 0;
        while checked < 60 {
            let market = random_market(&mut rng, 4);
            let planes = build_hyperplanes(&market);
            let a = prices(vec![
                ratio(rng.range(0, 90), 13),
                ratio(rng.range(0, 90), 13),
            ]);
            let b = prices(vec![
                ratio(rng.range(0, 90), 13),
                ratio(rng.range(0, 90), 13),
            ]);
            // Only compare when the segment [a, b] crosses no hyperplane.
            let crossed = planes.iter().any(|h| {
                let sa = h.evaluate(&a);
                let sb = h.evaluate(&b);
                (sa > rat(0) && sb < rat(0))
                    || (sa < rat(0) && sb > rat(0))
                    || sa == rat(0)
                    || sb == rat(0)
            });
            if crossed {
                continue;
            }
            checked += 1;
            assert_eq!(assignment(&market, &a), assignment(&market, &b));
        }
    }

    proptest! {
        // Choice is invariant under uniform positive scaling of all
        // intercepts and sensitivities.
        #[test]
        fn scaling_invariance(seed in 0u64..500, lam_n in 1i64..12, lam_d in 1i64..12, a in 0i64..70, b in 0i64..70) {
            let mut rng = SmallRng::new(seed);
            let market = random_market(&mut rng, 5);
            let lam = ratio(lam_n, lam_d);
            let consumers = market
                .consumers()
                .iter()
                .map(|c| Consumer {
                    id: c.id.clone(),
                    utilities: c
                        .utilities
                        .iter()
                        .map(|u| LinearUtility::new(&u.intercept * &lam, &u.sensitivity * &lam))
                        .collect(),
                    demands: c.demands.clone(),
                })
                .collect();
            let scaled = Market::new(market.products().to_vec(), consumers).unwrap();
            let p = prices(vec![ratio(a, 10), ratio(b, 10)]);
            prop_assert_eq!(assignment(&market, &p), assignment(&scaled, &p));
        }
    }
}

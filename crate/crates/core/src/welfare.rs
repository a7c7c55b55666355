//! Social welfare accounting: consumer surplus plus seller payoff plus tax.
//!
//! Under the textbook definition the tax is a pure transfer, so
//! `W = U_c + U_f + T = U_c + gross revenue` and the rate drops out. The
//! worked example this solver reproduces instead adds the collected tax on
//! top once more (`W = U_c + gross + T`); that variant ships as an explicit
//! mode so reports can show both and mark which one drove the optimization.
//! Only the `ln` terms of the consumer surplus are floating point; every
//! revenue term stays rational until the final sum.

use crate::choice::Assignment;
use crate::market::{clipped_utility, Market, PriceVector};
use crate::numeric::{to_f64, Rational};
use crate::response::{revenue_split, TaxRate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WelfareMode {
    /// `W = U_c + gross revenue`; the tax cancels between seller and state.
    Definition,
    /// `W = U_c + gross revenue + tax collected`.
    PaperExample,
}

impl WelfareMode {
    pub fn label(&self) -> &'static str {
        match self {
            WelfareMode::Definition => "definition",
            WelfareMode::PaperExample => "paper-example",
        }
    }
}

impl std::str::FromStr for WelfareMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "definition" => Ok(WelfareMode::Definition),
            "paper-example" => Ok(WelfareMode::PaperExample),
            other => Err(format!(
                "unknown welfare mode `{other}` (expected `definition` or `paper-example`)"
            )),
        }
    }
}

/// Itemized welfare at one price point and tax rate.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareBreakdown {
    pub mode: WelfareMode,
    /// `sum ln(1 + utility)` over purchasers, in floating point.
    pub consumer_surplus: f64,
    /// Seller's after-tax payoff (gross - tax), exact.
    pub firm_utility: Rational,
    /// Tax collected, exact.
    pub tax: Rational,
    /// `U_c + firm_utility + tax` plus, in paper-example mode, the tax again.
    pub total: f64,
}

impl WelfareBreakdown {
    /// Assembles a breakdown from an already-known surplus and revenue split.
    pub fn from_parts(
        surplus: f64,
        gross: Rational,
        taxed: Rational,
        alpha: &TaxRate,
        mode: WelfareMode,
    ) -> Self {
        let tax = alpha.value() * taxed;
        let firm_utility = gross - &tax;
        let mut breakdown = WelfareBreakdown {
            mode,
            consumer_surplus: surplus,
            firm_utility,
            tax,
            total: 0.0,
        };
        breakdown.total = surplus + to_f64(&breakdown.rational_part());
        breakdown
    }

    /// The exact (tax + revenue) part of the total, before adding `U_c`.
    pub fn rational_part(&self) -> Rational {
        match self.mode {
            WelfareMode::Definition => &self.firm_utility + &self.tax,
            WelfareMode::PaperExample => &self.firm_utility + &self.tax + &self.tax,
        }
    }
}

/// `sum ln(1 + clipped utility)` over purchasing consumers.
///
/// Non-purchasers contribute nothing. Purchasers always have nonnegative
/// raw utility, so clipping only guards the boundary.
pub fn consumer_surplus(market: &Market, prices: &PriceVector, choices: &Assignment) -> f64 {
    choices
        .purchases()
        .map(|(i, j)| {
            let u = clipped_utility(&market.consumers()[i], j, prices);
            (1.0 + to_f64(&u)).ln()
        })
        .sum()
}

/// Full welfare breakdown at one price point and tax rate.
pub fn social_welfare(
    market: &Market,
    prices: &PriceVector,
    choices: &Assignment,
    alpha: &TaxRate,
    mode: WelfareMode,
) -> WelfareBreakdown {
    let (gross, taxed) = revenue_split(market, prices, choices);
    let surplus = consumer_surplus(market, prices, choices);
    WelfareBreakdown::from_parts(surplus, gross, taxed, alpha, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::assignment;
    use crate::numeric::{rat, ratio};
    use crate::testutil::{cola_market, random_market, SmallRng};

    fn at(market: &Market, p: Vec<Rational>) -> (PriceVector, Assignment) {
        let prices = PriceVector::new(p).unwrap();
        let choices = assignment(market, &prices);
        (prices, choices)
    }

    #[test]
    fn surplus_is_zero_when_all_realized_utilities_are_zero() {
        let market = cola_market();
        let (p, a) = at(&market, vec![ratio(47, 10), ratio(93, 17)]);
        assert_eq!(consumer_surplus(&market, &p, &a), 0.0);
    }

    #[test]
    fn surplus_sums_logs_of_realized_utilities() {
        let market = cola_market();
        let (p, a) = at(&market, vec![rat(0), ratio(5, 4)]);
        // Realized utilities 0.94, 0.17 and 0.7175.
        let expected = 1.94f64.ln() + 1.17f64.ln() + 1.7175f64.ln();
        let got = consumer_surplus(&market, &p, &a);
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 1.3606).abs() < 1e-3);
    }

    #[test]
    fn empty_assignment_contributes_nothing() {
        let market = cola_market();
        let (p, a) = at(&market, vec![rat(50), rat(50)]);
        assert!(a.purchases().next().is_none());
        assert_eq!(consumer_surplus(&market, &p, &a), 0.0);
    }

    #[test]
    fn definition_mode_drops_the_tax_paper_mode_counts_it_twice() {
        let market = cola_market();
        let (p, a) = at(&market, vec![ratio(47, 10), ratio(93, 17)]);
        let one = TaxRate::one();
        let def = social_welfare(&market, &p, &a, &one, WelfareMode::Definition);
        let paper = social_welfare(&market, &p, &a, &one, WelfareMode::PaperExample);
        // Exact-vertex gross = 9942*47/10 + 11441*93/17 = 546582/5.
        assert_eq!(def.rational_part(), ratio(546582, 5));
        assert_eq!(paper.rational_part(), ratio(546582, 5) + ratio(467274, 10));
        assert_eq!(&paper.rational_part() - &def.rational_part(), paper.tax);
        assert_eq!(def.consumer_surplus, 0.0);
    }

    #[test]
    fn modes_agree_at_zero_tax() {
        let market = cola_market();
        let (p, a) = at(&market, vec![ratio(94, 100), ratio(158, 100)]);
        let zero = TaxRate::zero();
        let def = social_welfare(&market, &p, &a, &zero, WelfareMode::Definition);
        let paper = social_welfare(&market, &p, &a, &zero, WelfareMode::PaperExample);
        assert_eq!(def.rational_part(), paper.rational_part());
        assert_eq!(def.total, paper.total);
    }

    #[test]
    fn definition_mode_is_independent_of_alpha() {
        let market = cola_market();
        let (p, a) = at(&market, vec![ratio(47, 10), ratio(47, 24)]);
        let w0 = social_welfare(&market, &p, &a, &TaxRate::zero(), WelfareMode::Definition);
        let w1 = social_welfare(&market, &p, &a, &TaxRate::one(), WelfareMode::Definition);
        let mid = TaxRate::new(ratio(3, 7)).unwrap();
        let wm = social_welfare(&market, &p, &a, &mid, WelfareMode::Definition);
        assert_eq!(w0.rational_part(), w1.rational_part());
        assert_eq!(w0.rational_part(), wm.rational_part());
    }

    #[test]
    fn mode_identity_and_nonnegative_surplus_on_random_instances() {
        let mut rng = SmallRng::new(5);
        for _ in 0..60 {
            let market = random_market(&mut rng, 5);
            let (p, a) = at(
                &market,
                vec![ratio(rng.range(0, 70), 10), ratio(rng.range(0, 70), 10)],
            );
            let alpha = TaxRate::new(ratio(rng.range(0, 20), 20)).unwrap();
            let def = social_welfare(&market, &p, &a, &alpha, WelfareMode::Definition);
            let paper = social_welfare(&market, &p, &a, &alpha, WelfareMode::PaperExample);
            assert_eq!(&paper.rational_part() - &def.rational_part(), def.tax);
            assert!(def.consumer_surplus >= 0.0);
        }
    }
}

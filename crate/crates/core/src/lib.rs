//! Exact solver for welfare-optimal ad-valorem taxation of a product market.
//!
//! The model is a three-stage sequential game. A regulator picks a tax rate
//! `alpha` on the taxed products; a revenue-maximizing seller then prices
//! every product; finally each consumer buys the product giving them the
//! highest nonnegative linear utility (or nothing). Because utilities are
//! affine in prices, consumer behavior is constant on the cells of the
//! budget/indifference hyperplane arrangement, so only the arrangement's
//! vertices can be seller-optimal — and the seller's payoff under each
//! vertex is affine in `alpha`, so welfare needs evaluating only at the
//! finitely many payoff break-even rates.
//!
//! Everything is computed over exact rationals; floating point appears only
//! in the logarithmic consumer-surplus term of the welfare total. A
//! brute-force grid oracle ([`oracle`]) independently validates the
//! enumeration on small instances.

pub mod arrangement;
pub mod choice;
pub mod market;
pub mod numeric;
pub mod optimizer;
pub mod oracle;
pub mod response;
pub mod welfare;

#[doc(hidden)]
pub mod testutil;

pub use arrangement::{
    build_hyperplanes, enumerate_candidates, CandidateSet, Hyperplane, HyperplaneKind, PricePoint,
};
pub use choice::{assignment, choose, tied_choices, Assignment, Choice};
pub use market::{
    clipped_utility, effective_intercept, raw_utility, Consumer, LinearUtility, Market, ModelError,
    PriceVector, Product,
};
pub use numeric::{format_exact, format_fixed, parse_rational, Rational};
pub use optimizer::{
    break_evens, line_break_even, optimize, pair_break_even, welfare_curve, BreakEven,
    BreakEvenSource, StaircaseStep, TaxSolution, WelfareCurve,
};
pub use oracle::{
    grid_best_response, grid_sweep, verify_solution, GridSpec, OracleError, VerifyReport, Violation,
};
pub use response::{
    best_response, gross_revenue, net_utility, revenue_split, tax_collected, EvaluatedCandidate,
    NetProfile, PurchaseOptions, ResponseError, ResponseOutcome, ResponseTable, TaxRate,
};
pub use welfare::{consumer_surplus, social_welfare, WelfareBreakdown, WelfareMode};

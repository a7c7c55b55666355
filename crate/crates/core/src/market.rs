//! Market instance types: products, consumers, linear utilities, prices.
//!
//! A consumer's utility for product `j` at prices `p` is the clipped affine
//! form `max(intercept - sensitivity * p_j, 0)`. The intercept already folds
//! in any claims/nutrition preprocessing (see [`effective_intercept`]); the
//! solver core only ever sees `(intercept, sensitivity)` pairs.

use crate::numeric::Rational;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("market must contain at least one product")]
    NoProducts,
    #[error("duplicate product id `{0}`")]
    DuplicateProduct(String),
    #[error("consumer `{consumer}` has {got} utilities, expected {expected}")]
    UtilityCount {
        consumer: String,
        got: usize,
        expected: usize,
    },
    #[error("consumer `{consumer}` has {got} demands, expected {expected}")]
    DemandCount {
        consumer: String,
        got: usize,
        expected: usize,
    },
    #[error(
        "consumer `{consumer}`, product `{product}`: price sensitivity must be strictly positive"
    )]
    NonPositiveSensitivity { consumer: String, product: String },
    #[error("consumer `{consumer}`, product `{product}`: demand must be nonnegative")]
    NegativeDemand { consumer: String, product: String },
    #[error("price vector has {got} components, expected {expected}")]
    PriceDimension { got: usize, expected: usize },
    #[error("negative price component at index {0}")]
    NegativePrice(usize),
}

/// A product on the market. `taxed` marks it as subject to the ad-valorem tax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub id: String,
    pub index: usize,
    pub taxed: bool,
}

/// Affine utility of one consumer for one product: `intercept - sensitivity * price`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearUtility {
    pub intercept: Rational,
    pub sensitivity: Rational,
}

impl LinearUtility {
    pub fn new(intercept: Rational, sensitivity: Rational) -> Self {
        Self {
            intercept,
            sensitivity,
        }
    }

    /// The affine form before clipping; may be negative.
    pub fn raw_at(&self, price: &Rational) -> Rational {
        &self.intercept - &self.sensitivity * price
    }
}

/// One consumer segment: a utility and a per-period demand for every product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consumer {
    pub id: String,
    pub utilities: Vec<LinearUtility>,
    pub demands: Vec<Rational>,
}

/// Nonnegative price per product, indexed like `Market::products`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PriceVector(pub Vec<Rational>);

impl PriceVector {
    pub fn new(prices: Vec<Rational>) -> Result<Self, ModelError> {
        for (j, p) in prices.iter().enumerate() {
            if p < &Rational::zero() {
                return Err(ModelError::NegativePrice(j));
            }
        }
        Ok(Self(prices))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> &Rational {
        &self.0[j]
    }
}

/// The full problem instance: every type downstream borrows from this.
///
/// Construction validates the structural invariants once; all values are
/// immutable afterwards and every operation on them is a pure function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    products: Vec<Product>,
    consumers: Vec<Consumer>,
}

impl Market {
    pub fn new(products: Vec<Product>, consumers: Vec<Consumer>) -> Result<Self, ModelError> {
        if products.is_empty() {
            return Err(ModelError::NoProducts);
        }
        for (j, p) in products.iter().enumerate() {
            if products[..j].iter().any(|q| q.id == p.id) {
                return Err(ModelError::DuplicateProduct(p.id.clone()));
            }
        }
        let m = products.len();
        for c in &consumers {
            if c.utilities.len() != m {
                return Err(ModelError::UtilityCount {
                    consumer: c.id.clone(),
                    got: c.utilities.len(),
                    expected: m,
                });
            }
            if c.demands.len() != m {
                return Err(ModelError::DemandCount {
                    consumer: c.id.clone(),
                    got: c.demands.len(),
                    expected: m,
                });
            }
            for (j, u) in c.utilities.iter().enumerate() {
                if u.sensitivity <= Rational::zero() {
                    return Err(ModelError::NonPositiveSensitivity {
                        consumer: c.id.clone(),
                        product: products[j].id.clone(),
                    });
                }
            }
            for (j, d) in c.demands.iter().enumerate() {
                if d < &Rational::zero() {
                    return Err(ModelError::NegativeDemand {
                        consumer: c.id.clone(),
                        product: products[j].id.clone(),
                    });
                }
            }
        }
        let products = products
            .into_iter()
            .enumerate()
            .map(|(index, p)| Product { index, ..p })
            .collect();
        Ok(Self {
            products,
            consumers,
        })
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn consumers(&self) -> &[Consumer] {
        &self.consumers
    }

    pub fn product_count(&self) -> usize {
        self.products.len()
    }

    pub fn consumer_count(&self) -> usize {
        self.consumers.len()
    }

    pub fn product_by_id(&self, id: &str) -> Option<&Product> {
        self.products.iter().find(|p| p.id == id)
    }

    pub fn consumer_by_id(&self, id: &str) -> Option<(usize, &Consumer)> {
        self.consumers.iter().enumerate().find(|(_, c)| c.id == id)
    }

    pub fn check_prices(&self, prices: &PriceVector) -> Result<(), ModelError> {
        if prices.len() != self.product_count() {
            return Err(ModelError::PriceDimension {
                got: prices.len(),
                expected: self.product_count(),
            });
        }
        Ok(())
    }
}

/// Folds package-claim and nutrition terms into a single utility intercept:
/// `beta_ij + beta1 * nr_claims + beta2 * nutr_val`.
pub fn effective_intercept(
    beta_ij: &Rational,
    beta1: &Rational,
    beta2: &Rational,
    nr_claims: &Rational,
    nutr_val: &Rational,
) -> Rational {
    beta_ij + beta1 * nr_claims + beta2 * nutr_val
}

/// Unclipped utility of consumer `c` for product `j` at prices `p`.
pub fn raw_utility(c: &Consumer, j: usize, p: &PriceVector) -> Rational {
    c.utilities[j].raw_at(p.get(j))
}

/// `max(raw_utility, 0)` — the utility that enters the consumer surplus.
pub fn clipped_utility(c: &Consumer, j: usize, p: &PriceVector) -> Rational {
    let raw = raw_utility(c, j, p);
    if raw < Rational::zero() {
        Rational::zero()
    } else {
        raw
    }
}

//! Shared fixtures for tests and benchmarks: the soft-drink reference market
//! and a seeded random-instance generator. Not part of the public API.

use crate::market::{Consumer, LinearUtility, Market, Product};
use crate::numeric::{rat, ratio, Rational};

/// The two-product soft-drink market used throughout the test suite:
/// one sugary product (taxed) and one sugar-free product, three consumer
/// segments with fitted linear utilities and fixed per-period demands.
pub fn cola_market() -> Market {
    let products = vec![
        Product {
            id: "cola".into(),
            index: 0,
            taxed: true,
        },
        Product {
            id: "zero".into(),
            index: 1,
            taxed: false,
        },
    ];
    let consumer = |id: &str, cola: (i64, i64), zero: (i64, i64), demand: i64| Consumer {
        id: id.into(),
        utilities: vec![
            LinearUtility::new(ratio(cola.0, 100), ratio(cola.1, 100)),
            LinearUtility::new(ratio(zero.0, 100), ratio(zero.1, 100)),
        ],
        demands: vec![rat(demand), rat(demand)],
    };
    let consumers = vec![
        consumer("high", (94, 20), (41, 26), 9942),
        consumer("medium", (17, 18), (47, 24), 9433),
        consumer("low", (53, 23), (93, 17), 11441),
    ];
    Market::new(products, consumers).unwrap()
}

/// A deterministic split-mix style generator; avoids depending on `rand`
/// from the library crate itself.
#[derive(Debug, Clone)]
pub struct SmallRng(u64);

impl SmallRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_add(0x9E37_79B9_7F4A_7C15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }
}

/// Random two-product market (product 0 taxed): intercepts and sensitivities
/// are hundredths in [0.10, 1.00], demands integers in [1, 10_000].
pub fn random_market(rng: &mut SmallRng, max_consumers: usize) -> Market {
    let n = rng.range(1, max_consumers as i64) as usize;
    random_market_exact(rng, n)
}

pub fn random_market_exact(rng: &mut SmallRng, consumers: usize) -> Market {
    let products = vec![
        Product {
            id: "taxed".into(),
            index: 0,
            taxed: true,
        },
        Product {
            id: "plain".into(),
            index: 1,
            taxed: false,
        },
    ];
    let mut list = Vec::with_capacity(consumers);
    for i in 0..consumers {
        let coeff = |rng: &mut SmallRng| ratio(rng.range(10, 100), 100);
        let demand: Rational = rat(rng.range(1, 10_000));
        list.push(Consumer {
            id: format!("c{i}"),
            utilities: vec![
                LinearUtility::new(coeff(rng), coeff(rng)),
                LinearUtility::new(coeff(rng), coeff(rng)),
            ],
            demands: vec![demand.clone(), demand],
        });
    }
    Market::new(products, list).unwrap()
}

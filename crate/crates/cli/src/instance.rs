//! Market instance files: a plain-text sectioned table format.
//!
//! ```text
//! [products]
//! id,taxed
//! cola,true
//! zero,false
//!
//! [globals]           # optional claims/nutrition preprocessing terms
//! beta1,beta2,nr_claims,nutr_val
//! 0,0,0,0
//!
//! [consumers]
//! consumer,product,beta,sensitivity,demand
//! high,cola,0.94,0.2,9942
//! ...
//! ```
//!
//! Numbers parse as exact rationals (`0.94` is 94/100; `93/17` also works),
//! every (consumer, product) pair must appear exactly once, and the claims /
//! nutrition terms are folded into the utility intercepts at load so the
//! solver only ever sees `(intercept, sensitivity)`.

use std::collections::BTreeMap;
use std::path::Path;

use sugartax_core::market::{Consumer, LinearUtility, Market, Product};
use sugartax_core::numeric::{format_exact, parse_rational, Rational};
use sugartax_core::{effective_intercept, ModelError};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: unknown section `{name}` (expected products, globals or consumers)")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: data row outside any section")]
    RowOutsideSection { line: usize },
    #[error("line {line}: expected header with columns {expected}, got `{got}`")]
    BadHeader {
        line: usize,
        expected: &'static str,
        got: String,
    },
    #[error("line {line}: expected {expected} fields, got {got}")]
    FieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: {source}")]
    BadNumber {
        line: usize,
        source: sugartax_core::numeric::ParseRationalError,
    },
    #[error("line {line}: invalid taxed flag `{got}` (use true or false)")]
    BadFlag { line: usize, got: String },
    #[error("line {line}: duplicate product id `{id}`")]
    DuplicateProduct { line: usize, id: String },
    #[error("line {line}: duplicate row for consumer `{consumer}` and product `{product}`")]
    DuplicatePair {
        line: usize,
        consumer: String,
        product: String,
    },
    #[error("line {line}: unknown product `{product}`")]
    UnknownProduct { line: usize, product: String },
    #[error("line {line}: price sensitivity must be strictly positive")]
    NonPositiveSensitivity { line: usize },
    #[error("line {line}: demand must be nonnegative")]
    NegativeDemand { line: usize },
    #[error("consumer `{consumer}` has no row for product `{product}`")]
    MissingPair { consumer: String, product: String },
    #[error("no [products] section found")]
    NoProducts,
    #[error("globals section needs exactly one data row")]
    BadGlobals,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Globals {
    beta1: Rational,
    beta2: Rational,
    nr_claims: Rational,
    nutr_val: Rational,
}

impl Default for Globals {
    fn default() -> Self {
        let zero = || Rational::from_integer(0.into());
        Globals {
            beta1: zero(),
            beta2: zero(),
            nr_claims: zero(),
            nutr_val: zero(),
        }
    }
}

pub fn load_instance(path: &Path) -> Result<Market, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Products,
    Globals,
    Consumers,
}

pub fn parse_instance(text: &str) -> Result<Market, InstanceError> {
    let mut section: Option<Section> = None;
    let mut header_seen = false;

    let mut products: Vec<Product> = Vec::new();
    let mut globals: Option<Globals> = None;
    // (consumer id, product id) -> (line, beta, sensitivity, demand)
    let mut rows: BTreeMap<(String, String), (usize, Rational, Rational, Rational)> =
        BTreeMap::new();
    let mut consumer_order: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = Some(match name.trim() {
                "products" => Section::Products,
                "globals" => Section::Globals,
                "consumers" => Section::Consumers,
                other => {
                    return Err(InstanceError::UnknownSection {
                        line,
                        name: other.into(),
                    })
                }
            });
            header_seen = false;
            continue;
        }
        let Some(current) = section else {
            return Err(InstanceError::RowOutsideSection { line });
        };
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !header_seen {
            header_seen = true;
            let expected = match current {
                Section::Products => "id,taxed",
                Section::Globals => "beta1,beta2,nr_claims,nutr_val",
                Section::Consumers => "consumer,product,beta,sensitivity,demand",
            };
            let want: Vec<&str> = expected.split(',').collect();
            if fields != want {
                return Err(InstanceError::BadHeader {
                    line,
                    expected,
                    got: trimmed.into(),
                });
            }
            continue;
        }
        let number = |text: &str| {
            parse_rational(text).map_err(|source| InstanceError::BadNumber { line, source })
        };
        match current {
            Section::Products => {
                if fields.len() != 2 {
                    return Err(InstanceError::FieldCount {
                        line,
                        expected: 2,
                        got: fields.len(),
                    });
                }
                let id = fields[0].to_string();
                if products.iter().any(|p| p.id == id) {
                    return Err(InstanceError::DuplicateProduct { line, id });
                }
                let taxed = match fields[1] {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(InstanceError::BadFlag {
                            line,
                            got: other.into(),
                        })
                    }
                };
                products.push(Product {
                    id,
                    index: products.len(),
                    taxed,
                });
            }
            Section::Globals => {
                if fields.len() != 4 {
                    return Err(InstanceError::FieldCount {
                        line,
                        expected: 4,
                        got: fields.len(),
                    });
                }
                if globals.is_some() {
                    return Err(InstanceError::BadGlobals);
                }
                globals = Some(Globals {
                    beta1: number(fields[0])?,
                    beta2: number(fields[1])?,
                    nr_claims: number(fields[2])?,
                    nutr_val: number(fields[3])?,
                });
            }
            Section::Consumers => {
                if fields.len() != 5 {
                    return Err(InstanceError::FieldCount {
                        line,
                        expected: 5,
                        got: fields.len(),
                    });
                }
                let consumer = fields[0].to_string();
                let product = fields[1].to_string();
                if !products.iter().any(|p| p.id == product) {
                    return Err(InstanceError::UnknownProduct { line, product });
                }
                let beta = number(fields[2])?;
                let sensitivity = number(fields[3])?;
                let demand = number(fields[4])?;
                if sensitivity <= Rational::from_integer(0.into()) {
                    return Err(InstanceError::NonPositiveSensitivity { line });
                }
                if demand < Rational::from_integer(0.into()) {
                    return Err(InstanceError::NegativeDemand { line });
                }
                let key = (consumer.clone(), product.clone());
                if rows.contains_key(&key) {
                    return Err(InstanceError::DuplicatePair {
                        line,
                        consumer,
                        product,
                    });
                }
                if !consumer_order.contains(&consumer) {
                    consumer_order.push(consumer.clone());
                }
                rows.insert(key, (line, beta, sensitivity, demand));
            }
        }
    }

    if products.is_empty() {
        return Err(InstanceError::NoProducts);
    }
    let globals = globals.unwrap_or_default();
    let mut consumers = Vec::with_capacity(consumer_order.len());
    for id in &consumer_order {
        let mut utilities = Vec::with_capacity(products.len());
        let mut demands = Vec::with_capacity(products.len());
        for product in &products {
            let key = (id.clone(), product.id.clone());
            let Some((_, beta, sensitivity, demand)) = rows.get(&key) else {
                return Err(InstanceError::MissingPair {
                    consumer: id.clone(),
                    product: product.id.clone(),
                });
            };
            utilities.push(LinearUtility::new(
                effective_intercept(
                    beta,
                    &globals.beta1,
                    &globals.beta2,
                    &globals.nr_claims,
                    &globals.nutr_val,
                ),
                sensitivity.clone(),
            ));
            demands.push(demand.clone());
        }
        consumers.push(Consumer {
            id: id.clone(),
            utilities,
            demands,
        });
    }
    Ok(Market::new(products, consumers)?)
}

/// Writes a market back out in the instance format. The claims/nutrition
/// preprocessing is already folded into the intercepts, so the emitted file
/// carries the effective intercepts and no globals section; reloading it
/// reproduces the market exactly.
pub fn emit_instance(market: &Market) -> String {
    let mut out = String::from("[products]\nid,taxed\n");
    for p in market.products() {
        out.push_str(&format!("{},{}\n", p.id, p.taxed));
    }
    out.push_str("\n[consumers]\nconsumer,product,beta,sensitivity,demand\n");
    for c in market.consumers() {
        for (j, p) in market.products().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.id,
                p.id,
                format_exact(&c.utilities[j].intercept),
                format_exact(&c.utilities[j].sensitivity),
                format_exact(&c.demands[j]),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sugartax_core::numeric::{rat, ratio};
    use sugartax_core::testutil::cola_market;

    const COLA: &str = "\
# soft-drink market
[products]
id,taxed
cola,true
zero,false

[globals]
beta1,beta2,nr_claims,nutr_val
0,0,0,0

[consumers]
consumer,product,beta,sensitivity,demand
high,cola,0.94,0.2,9942
high,zero,0.41,0.26,9942
medium,cola,0.17,0.18,9433
medium,zero,0.47,0.24,9433
low,cola,0.53,0.23,11441
low,zero,0.93,0.17,11441
";

    #[test]
    fn parses_the_reference_instance() {
        let market = parse_instance(COLA).unwrap();
        assert_eq!(market, cola_market());
        assert_eq!(market.consumer_count(), 3);
        let taxed: Vec<&str> = market
            .products()
            .iter()
            .filter(|p| p.taxed)
            .map(|p| p.id.as_str())
            .collect();
        assert_eq!(taxed, vec!["cola"]);
    }

    #[test]
    fn zero_globals_are_the_identity() {
        let without = COLA.replace("\n[globals]\nbeta1,beta2,nr_claims,nutr_val\n0,0,0,0\n", "");
        assert!(!without.contains("globals"));
        assert_eq!(
            parse_instance(&without).unwrap(),
            parse_instance(COLA).unwrap()
        );
    }

    #[test]
    fn globals_shift_intercepts() {
        let shifted = COLA.replace("0,0,0,0", "0.5,0.25,2,4");
        let market = parse_instance(&shifted).unwrap();
        let (_, high) = market.consumer_by_id("high").unwrap();
        // 0.94 + 0.5*2 + 0.25*4
        assert_eq!(high.utilities[0].intercept, ratio(94, 100) + rat(2));
    }

    #[test]
    fn zero_sensitivity_is_rejected_with_its_line() {
        let bad = COLA.replace("medium,cola,0.17,0.18,9433", "medium,cola,0.17,0,9433");
        let err = parse_instance(&bad).unwrap_err();
        match err {
            InstanceError::NonPositiveSensitivity { line } => assert_eq!(line, 15),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_pair_is_rejected_with_its_line() {
        let bad = format!("{COLA}low,zero,0.93,0.17,11441\n");
        let err = parse_instance(&bad).unwrap_err();
        assert!(matches!(err, InstanceError::DuplicatePair { line: 19, .. }));
    }

    #[test]
    fn unknown_product_is_rejected() {
        let bad = format!("{COLA}low,fanta,0.93,0.17,11441\n");
        let err = parse_instance(&bad).unwrap_err();
        assert!(matches!(
            err,
            InstanceError::UnknownProduct { line: 19, .. }
        ));
    }

    #[test]
    fn missing_pair_is_rejected() {
        let bad = COLA.replace("low,zero,0.93,0.17,11441\n", "");
        let err = parse_instance(&bad).unwrap_err();
        assert!(matches!(err, InstanceError::MissingPair { .. }));
    }

    #[test]
    fn malformed_inputs_error_rather_than_panic() {
        let cases = [
            "",
            "x,y,z\n",
            "[products]\n",
            "[products]\nid,taxed\n",
            "[products]\nid\n",
            "[unknown]\nid,taxed\n",
            "[products]\nid,taxed\na,maybe\n",
            "[products]\nid,taxed\na,true\n[consumers]\nconsumer,product,beta,sensitivity,demand\nc,a,1,1\n",
            "[globals]\nbeta1,beta2,nr_claims,nutr_val\n1,2,3,4\n5,6,7,8\n",
            "[products]\nid,taxed\na,true\n[consumers]\nconsumer,product,beta,sensitivity,demand\nc,a,1e9,1,1\n",
        ];
        for case in cases {
            assert!(parse_instance(case).is_err(), "accepted: {case:?}");
        }
        // Huge exact numbers are fine.
        let big = "[products]\nid,taxed\na,true\n\n[consumers]\nconsumer,product,beta,sensitivity,demand\nc,a,123456789012345678901234567890.5,0.0000001,99999999999\n";
        let market = parse_instance(big).unwrap();
        assert_eq!(market.consumer_count(), 1);
    }

    #[test]
    fn emit_then_load_round_trips_exactly() {
        let market = parse_instance(COLA).unwrap();
        let emitted = emit_instance(&market);
        let reloaded = parse_instance(&emitted).unwrap();
        assert_eq!(market, reloaded);
        // Also for awkward rationals that have no finite decimal form.
        let odd = COLA.replace("0.93,0.17", "31/7,2/3");
        let market = parse_instance(&odd).unwrap();
        assert_eq!(parse_instance(&emit_instance(&market)).unwrap(), market);
    }
}

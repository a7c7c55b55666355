//! Candidate price enumeration: vertices of the budget / indifference / axis
//! hyperplane arrangement in the nonnegative price orthant.
//!
//! Consumer choices are constant on the interior of every cell of this
//! arrangement and the seller's revenue is linear in prices there, so only
//! arrangement vertices can be revenue-optimal. With `m` products a vertex
//! is the unique solution of a nonsingular `m x m` system drawn from the
//! hyperplane list; singular subsets simply contribute nothing. All systems
//! are solved over exact rationals — no epsilon anywhere.

use crate::market::{Market, PriceVector};
use crate::numeric::Rational;
use num_traits::{One, Signed, Zero};

/// Which market feature a hyperplane encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HyperplaneKind {
    /// `sensitivity * p_j = intercept`: consumer `consumer` stops buying
    /// product `product` beyond this price.
    Budget { consumer: usize, product: usize },
    /// Equal raw utility between `lower` and `upper` for `consumer`.
    Indifference {
        consumer: usize,
        lower: usize,
        upper: usize,
    },
    /// `p_j = 0`.
    Axis { product: usize },
}

/// Affine locus `sum_j coeffs[j] * p_j = constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    pub kind: HyperplaneKind,
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl Hyperplane {
    /// Signed residual `sum coeffs * p - constant`; zero iff `p` lies on it.
    pub fn evaluate(&self, prices: &PriceVector) -> Rational {
        self.coeffs
            .iter()
            .zip(prices.0.iter())
            .map(|(c, p)| c * p)
            .fold(Rational::zero(), |acc, t| acc + t)
            - &self.constant
    }
}

/// A deduplicated arrangement vertex plus the hyperplanes through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PricePoint {
    /// Position in the lexicographically sorted candidate list (0-based).
    pub index: usize,
    pub prices: PriceVector,
    /// Indices into `CandidateSet::hyperplanes` of every hyperplane the
    /// point lies on (at least `m` of them by construction).
    pub on_hyperplanes: Vec<usize>,
}

/// All candidate-optimal price vectors for a market, sorted
/// lexicographically, together with the generating hyperplane list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub hyperplanes: Vec<Hyperplane>,
    pub points: Vec<PricePoint>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Builds every budget hyperplane (`n * m`), every pairwise indifference
/// hyperplane (`n * C(m,2)`) and the `m` axis hyperplanes `p_j = 0`.
///
/// The axis planes are not part of the textbook construction but boundary
/// vertices such as a price of zero for one product only arise from them.
pub fn build_hyperplanes(market: &Market) -> Vec<Hyperplane> {
    let m = market.product_count();
    let mut planes = Vec::new();
    for (i, consumer) in market.consumers().iter().enumerate() {
        for j in 0..m {
            let mut coeffs = vec![Rational::zero(); m];
            coeffs[j] = consumer.utilities[j].sensitivity.clone();
            planes.push(Hyperplane {
                kind: HyperplaneKind::Budget {
                    consumer: i,
                    product: j,
                },
                coeffs,
                constant: consumer.utilities[j].intercept.clone(),
            });
        }
    }
    for (i, consumer) in market.consumers().iter().enumerate() {
        for j in 0..m {
            for k in (j + 1)..m {
                // a_j - s_j p_j = a_k - s_k p_k  <=>  s_j p_j - s_k p_k = a_j - a_k
                let mut coeffs = vec![Rational::zero(); m];
                coeffs[j] = consumer.utilities[j].sensitivity.clone();
                coeffs[k] = -consumer.utilities[k].sensitivity.clone();
                planes.push(Hyperplane {
                    kind: HyperplaneKind::Indifference {
                        consumer: i,
                        lower: j,
                        upper: k,
                    },
                    coeffs,
                    constant: &consumer.utilities[j].intercept - &consumer.utilities[k].intercept,
                });
            }
        }
    }
    for j in 0..m {
        let mut coeffs = vec![Rational::zero(); m];
        coeffs[j] = Rational::one();
        planes.push(Hyperplane {
            kind: HyperplaneKind::Axis { product: j },
            coeffs,
            constant: Rational::zero(),
        });
    }
    planes
}

/// Solves the square system formed by the selected hyperplanes by Gaussian
/// elimination over rationals. `None` when singular (parallel or dependent).
fn intersect(planes: &[Hyperplane], subset: &[usize], m: usize) -> Option<Vec<Rational>> {
    let mut a: Vec<Vec<Rational>> = subset
        .iter()
        .map(|&i| {
            let mut row = planes[i].coeffs.clone();
            row.push(planes[i].constant.clone());
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let pivot_value = a[col][col].clone();
        for item in a[col].iter_mut() {
            *item /= &pivot_value;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (cell, pivot_cell) in a[r][col..=m].iter_mut().zip(&pivot_row[col..=m]) {
                    *cell -= &factor * pivot_cell;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[m].clone()).collect())
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    if k == 0 {
        visit(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        // Advance the rightmost index that can still move.
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < pos + n - k {
                break;
            }
        }
        idx[pos] += 1;
        for later in pos + 1..k {
            idx[later] = idx[later - 1] + 1;
        }
    }
}

/// Enumerates all arrangement vertices in the nonnegative orthant.
///
/// Every size-`m` hyperplane subset with a unique intersection point is
/// solved exactly; points with a negative coordinate are dropped and exact
/// duplicates merged. For two products this is all pairwise line crossings.
pub fn enumerate_candidates(market: &Market) -> CandidateSet {
    let m = market.product_count();
    let hyperplanes = build_hyperplanes(market);
    let mut seen: std::collections::BTreeSet<Vec<Rational>> = Default::default();
    combinations(hyperplanes.len(), m, |subset| {
        if let Some(point) = intersect(&hyperplanes, subset, m) {
            if point.iter().all(|p| !p.is_negative()) {
                seen.insert(point);
            }
        }
    });
    let points = seen
        .into_iter()
        .enumerate()
        .map(|(index, coords)| {
            let prices = PriceVector(coords);
            let on_hyperplanes = hyperplanes
                .iter()
                .enumerate()
                .filter(|(_, h)| h.evaluate(&prices).is_zero())
                .map(|(i, _)| i)
                .collect();
            PricePoint {
                index,
                prices,
                on_hyperplanes,
            }
        })
        .collect();
    CandidateSet {
        hyperplanes,
        points,
    }
}

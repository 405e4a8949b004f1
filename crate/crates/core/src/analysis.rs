//! Closed-form moments and finite-n bounds for random covers.
//!
//! Exact quantities are returned as rationals. Quantities whose magnitude can
//! overflow `f64` are evaluated in log-space and reported through
//! [`BoundReport`].

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use statrs::function::factorial::ln_binomial;

use crate::degeneracy::DegeneracyOrdering;
use crate::density::{max_density_exact, ratio};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Relative tolerance applied before rounding log-space values to integers.
pub const LOG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentParams {
    pub n: usize,
    pub m: usize,
    /// Fold count (`k`, or `a` in the b-fold setting).
    pub k: usize,
    pub b: usize,
    pub rho: BigRational,
    pub d: usize,
}

impl MomentParams {
    pub fn new(n: usize, m: usize, k: usize, b: usize, rho: BigRational, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        if k == 0 || b == 0 || b > k {
            return Err(Error::invalid(format!("need 1 <= b <= k, got b={b}, k={k}")));
        }
        if rho.is_negative() || ratio(m, n) > rho {
            return Err(Error::invalid(format!("rho={rho} is below m/n={m}/{n}")));
        }
        Ok(MomentParams { n, m, k, b, rho, d })
    }

    /// Parameters of `g` with `rho` and `d` computed exactly.
    pub fn for_graph(g: &Graph, k: usize, b: usize) -> Result<Self> {
        let rho = max_density_exact(g).max_density;
        let d = DegeneracyOrdering::smallest_last(g).degeneracy;
        MomentParams::new(g.vertex_count(), g.edge_count(), k, b, rho, d)
    }

    fn rho_f64(&self) -> f64 {
        self.rho.to_f64().expect("finite density")
    }
}

/// Formula that produced a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    VarianceRatio,
    Chebyshev,
    Markov,
    GtUnion,
    SparseConstruction,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::VarianceRatio => "variance-ratio",
            Provenance::Chebyshev => "chebyshev",
            Provenance::Markov => "markov",
            Provenance::GtUnion => "gt-union",
            Provenance::SparseConstruction => "sparse-construction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// The bound as an `f64`; may be `inf` for unclamped quantities.
    pub value: f64,
    /// Natural log of the unclamped quantity (`-inf` when it is 0).
    pub ln_value: f64,
    /// True when `value` was cut down to 1.
    pub clamped: bool,
    /// Exact value when it is rational and cheap to obtain.
    pub exact: Option<BigRational>,
    pub provenance: Provenance,
}

impl BoundReport {
    fn probability(ln_value: f64, provenance: Provenance) -> Self {
        let clamped = ln_value > 0.0;
        BoundReport {
            value: if clamped { 1.0 } else { ln_value.exp() },
            ln_value,
            clamped,
            exact: None,
            provenance,
        }
    }
}

fn pow_big(base: u64, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

fn binomial_big(n: usize, r: usize) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Natural log of a positive big integer, accurate for any magnitude.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of a nonpositive integer");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a nonnegative rational (`-inf` at 0).
pub fn ln_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// `exp(ln_rational(x))`, saturating to `inf` instead of failing.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| ln_rational(x).exp())
}

/// Expected number of independent transversals, `k^n ((k-1)/k)^m`.
pub fn expected_transversals(p: &MomentParams) -> BigRational {
    let num = pow_big(p.k as u64, p.n) * pow_big(p.k as u64 - 1, p.m);
    BigRational::new(num, pow_big(p.k as u64, p.m))
}

/// Expected number of independent `b`-fold transversals,
/// `C(a,b)^n (C(a-b,b)/C(a,b))^m`.
pub fn expected_bfold_transversals(p: &MomentParams) -> BigRational {
    let choose = binomial_big(p.k, p.b);
    let disjoint = binomial_big(p.k - p.b, p.b);
    let num = num_traits::pow(choose.clone(), p.n) * num_traits::pow(disjoint, p.m);
    BigRational::new(num, num_traits::pow(choose, p.m))
}

/// The three overlap situations for a pair of transversals on one edge
/// `uv`: (a) they agree on `u` and on `v`; (b) they agree on exactly one of
/// `u`, `v`; (c) they disagree on both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairCase {
    A,
    B,
    C,
}

/// Probability that both transversals avoid the random matching on the
/// edge, in the given case.
pub fn pair_case_probability(case: PairCase, k: usize) -> Result<BigRational> {
    if k == 0 || (k < 2 && case != PairCase::A) {
        return Err(Error::invalid(format!("k={k} too small for case {case:?}")));
    }
    let k_ = k as i64;
    let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    Ok(match case {
        PairCase::A => r(k_ - 1, k_),
        PairCase::B => r(k_ - 2, k_),
        PairCase::C => {
            let p = r(k_ - 1, k_);
            &p * &p + r(1, k_ * k_ * (k_ - 1))
        }
    })
}

/// `min(C(nu,2), rho * nu)`.
pub fn mu_cap(nu: usize, rho: &BigRational) -> BigRational {
    let pairs = ratio(nu * nu.saturating_sub(1) / 2, 1);
    let dense = rho * BigRational::from_integer(BigInt::from(nu));
    pairs.min(dense)
}

fn ln_g_with(nu: usize, p: &MomentParams, mu_exponent: f64) -> f64 {
    let k = p.k as f64;
    let n = p.n as f64;
    let nu_f = nu as f64;
    let mut ln = ln_binomial(p.n as u64, nu as u64) - nu_f * k.ln();
    if p.n > nu {
        ln += (n - nu_f) * (-1.0 / k).ln_1p();
    }
    if mu_exponent != 0.0 {
        ln += mu_exponent * (1.0 / (k - 1.0)).ln_1p();
    }
    ln
}

fn check_k2(p: &MomentParams) -> Result<()> {
    if p.k < 2 {
        return Err(Error::invalid(format!("need k >= 2, got {}", p.k)));
    }
    Ok(())
}

/// `ln g(nu)`, or `-inf` when `nu > n`.
pub fn ln_g_term(nu: usize, p: &MomentParams) -> Result<f64> {
    check_k2(p)?;
    if nu > p.n {
        return Ok(f64::NEG_INFINITY);
    }
    let mu = mu_cap(nu, &p.rho).to_f64().expect("finite");
    Ok(ln_g_with(nu, p, mu))
}

/// `g(nu) = C(n,nu) k^-nu (1-1/k)^(n-nu) (1+1/(k-1))^mu(nu)`.
pub fn g_term(nu: usize, p: &MomentParams) -> Result<f64> {
    Ok(ln_g_term(nu, p)?.exp())
}

/// `g(nu)` with the `mu` exponent set to 0; these sum to 1 over `nu`.
pub fn base_g_term(nu: usize, p: &MomentParams) -> Result<f64> {
    check_k2(p)?;
    if nu > p.n {
        return Ok(0.0);
    }
    Ok(ln_g_with(nu, p, 0.0).exp())
}

fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Sums of `g(nu)` over `nu <= cut`, `cut < nu <= k-1` and `k <= nu <= n`.
pub fn g_partial_sums(p: &MomentParams, cut: usize) -> Result<[f64; 3]> {
    check_k2(p)?;
    let mut sums = [0.0; 3];
    for nu in 0..=p.n {
        let part = if nu <= cut {
            0
        } else if nu < p.k {
            1
        } else {
            2
        };
        sums[part] += g_term(nu, p)?;
    }
    Ok(sums)
}

/// Upper bound on `Var(X) / E(X)^2`:
/// `(1 + 1/(k-1)^3)^(rho n) * sum_nu g(nu) - 1`.
pub fn variance_ratio_bound(p: &MomentParams) -> Result<BoundReport> {
    check_k2(p)?;
    let k = p.k as f64;
    let terms = (0..=p.n).map(|nu| ln_g_term(nu, p)).collect::<Result<Vec<_>>>()?;
    let ln_total = p.rho_f64() * p.n as f64 * (1.0 / (k - 1.0).powi(3)).ln_1p() + log_sum_exp(terms);
    let value = ln_total.exp_m1().max(0.0);
    let ln_value = if ln_total > 40.0 {
        ln_total + (-(-ln_total).exp()).ln_1p()
    } else {
        value.ln()
    };
    Ok(BoundReport {
        value,
        ln_value,
        clamped: false,
        exact: None,
        provenance: Provenance::VarianceRatio,
    })
}

/// `min(1, variance_ratio_bound)`, an upper bound on `P(X = 0)`.
pub fn chebyshev_non_color_bound(p: &MomentParams) -> Result<BoundReport> {
    if expected_transversals(p).is_zero() {
        return Err(Error::invalid("E(X) = 0: the Chebyshev bound is vacuous"));
    }
    let v = variance_ratio_bound(p)?;
    Ok(BoundReport {
        provenance: Provenance::Chebyshev,
        ..BoundReport::probability(v.ln_value, Provenance::Chebyshev)
    })
}

/// `min(1, E(#independent b-fold transversals))`, an upper bound on the
/// probability of colorability.
pub fn markov_color_bound(p: &MomentParams) -> BoundReport {
    let e = expected_bfold_transversals(p);
    let one = BigRational::one();
    let clamped = e > one;
    let exact = if clamped { one } else { e.clone() };
    BoundReport {
        value: rational_to_f64(&exact),
        ln_value: ln_rational(&e),
        clamped,
        exact: Some(exact),
        provenance: Provenance::Markov,
    }
}

/// Union bound on the failure probability of the greedy procedure:
/// `min(1, n exp(-a (1-b/a)^d / 8))`. For `b > 1` the tail estimate needs
/// `a (1-b/a)^d >= 2b`; below that the bound is reported as 1.
pub fn gt_failure_bound(p: &MomentParams) -> Result<BoundReport> {
    if p.k < 2 {
        return Err(Error::invalid(format!("need a >= 2, got {}", p.k)));
    }
    let a = p.k as f64;
    let mean = a * (1.0 - p.b as f64 / a).powi(p.d as i32);
    if p.b > 1 && mean < 2.0 * p.b as f64 {
        return Ok(BoundReport {
            value: 1.0,
            ln_value: 0.0,
            clamped: true,
            exact: None,
            provenance: Provenance::GtUnion,
        });
    }
    let ln_value = (p.n as f64).ln() - mean / 8.0;
    Ok(BoundReport::probability(ln_value, Provenance::GtUnion))
}

/// Parameters of the disjoint-cliques construction `tK_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseConstruction {
    pub q: usize,
    pub epsilon: f64,
    /// Number of copies, `ceil(ln(1/eps) ((q-1)!)^C(q,2))`.
    pub t: BigUint,
    pub ln_t: f64,
}

impl SparseConstruction {
    /// Upper bound `exp(-t (k!)^-C(q,2))` on the probability that `tK_q`
    /// is `k`-colorable, for `1 <= k <= q-1`.
    pub fn bound_at(&self, k: usize) -> Result<BoundReport> {
        if k == 0 || k >= self.q {
            return Err(Error::invalid(format!("need 1 <= k <= q-1 = {}, got {k}", self.q - 1)));
        }
        let pairs = (self.q * (self.q - 1) / 2) as f64;
        let ln_fact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
        let exponent = (self.ln_t - pairs * ln_fact).exp();
        Ok(BoundReport::probability(-exponent, Provenance::SparseConstruction))
    }
}

pub fn sparse_construction(epsilon: f64, q: usize) -> Result<SparseConstruction> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} not in (0,1)")));
    }
    if q < 2 {
        return Err(Error::invalid(format!("need q >= 2, got {q}")));
    }
    let pairs = q * (q - 1) / 2;
    let fact: BigInt = (1..q).map(BigInt::from).product();
    let power = num_traits::pow(fact, pairs);
    let ln_eps = -epsilon.ln();
    let ln_x = ln_eps.ln() + ln_bigint(&power);
    let t = if power.bits() <= 52 {
        let x = ln_eps * power.to_f64().expect("small");
        let nearest = x.round();
        let c = if (x - nearest).abs() <= LOG_TOLERANCE * x.abs().max(1.0) {
            nearest
        } else {
            x.ceil()
        };
        BigUint::from(c as u64)
    } else {
        // Beyond f64 integer precision only the leading digits are meaningful.
        let x = ln_x.exp();
        if x.is_finite() {
            BigUint::from(x.ceil() as u128)
        } else {
            let shift = (ln_x / std::f64::consts::LN_2).floor() as u64 - 60;
            let mant = (ln_x - shift as f64 * std::f64::consts::LN_2).exp();
            (BigUint::from(mant.ceil() as u64)) << shift
        }
    };
    let t = t.max(BigUint::one());
    let ln_t = ln_bigint(&BigInt::from(t.clone()));
    Ok(SparseConstruction {
        q,
        epsilon,
        t,
        ln_t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdFamily {
    /// `rho / ln rho`.
    General { rho: f64 },
    /// `n / (2 ln n)` for `K_n`.
    Complete { n: usize },
    /// `(m-1) n / (2 ln n)` for `K_{m x n}`.
    Multipartite { parts: usize, size: usize },
}

pub fn threshold_function(family: ThresholdFamily) -> Result<f64> {
    match family {
        ThresholdFamily::General { rho } => {
            if rho.is_nan() || rho <= 1.0 {
                return Err(Error::invalid(format!("need rho > 1, got {rho}")));
            }
            Ok(rho / rho.ln())
        }
        ThresholdFamily::Complete { n } => {
            if n < 3 {
                return Err(Error::invalid(format!("need n >= 3, got {n}")));
            }
            Ok(n as f64 / (2.0 * (n as f64).ln()))
        }
        ThresholdFamily::Multipartite { parts, size } => {
            if parts < 2 || size < 3 {
                return Err(Error::invalid(format!(
                    "need parts >= 2 and size >= 3, got {parts}, {size}"
                )));
            }
            Ok((parts - 1) as f64 * size as f64 / (2.0 * (size as f64).ln()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, k: usize, b: usize, rho: (usize, usize), d: usize) -> MomentParams {
        MomentParams::new(n, m, k, b, ratio(rho.0, rho.1), d).unwrap()
    }

    #[test]
    fn expected_counts() {
        assert_eq!(expected_transversals(&params(3, 3, 2, 1, (1, 1), 2)), ratio(1, 1));
        assert_eq!(expected_transversals(&params(2, 1, 2, 1, (1, 2), 1)), ratio(2, 1));
        assert!(expected_transversals(&params(4, 2, 1, 1, (1, 2), 1)).is_zero());
        assert_eq!(expected_bfold_transversals(&params(2, 1, 4, 2, (1, 2), 1)), ratio(6, 1));
        assert!(expected_bfold_transversals(&params(3, 2, 3, 2, (2, 3), 1)).is_zero());
        let p = params(5, 6, 4, 1, (3, 2), 2);
        assert_eq!(expected_bfold_transversals(&p), expected_transversals(&p));
    }

    #[test]
    fn params_validation() {
        assert!(MomentParams::new(2, 3, 2, 1, ratio(1, 1), 1).is_err());
        assert!(MomentParams::new(2, 1, 2, 3, ratio(1, 1), 1).is_err());
        assert!(MomentParams::new(0, 0, 2, 1, ratio(0, 1), 0).is_err());
    }

    #[test]
    fn pair_cases() {
        assert_eq!(pair_case_probability(PairCase::C, 3).unwrap(), ratio(1, 2));
        assert_eq!(pair_case_probability(PairCase::C, 2).unwrap(), ratio(1, 2));
        assert!(pair_case_probability(PairCase::B, 2).unwrap().is_zero());
        assert!(pair_case_probability(PairCase::B, 1).is_err());
        assert_eq!(pair_case_probability(PairCase::A, 1).unwrap(), ratio(0, 1));
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu_cap(3, &ratio(1, 1)), ratio(3, 1));
        assert_eq!(mu_cap(5, &ratio(3, 2)), ratio(15, 2));
        assert!(mu_cap(0, &ratio(3, 2)).is_zero());
    }

    #[test]
    fn g_values() {
        let p = params(2, 1, 2, 1, (1, 2), 1);
        assert!((g_term(2, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!((g_term(0, &p).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(g_term(3, &p).unwrap(), 0.0);
        for (n, k) in [(2, 2), (10, 3), (200, 7), (1000, 40)] {
            let p = params(n, 0, k, 1, (0, 1), 0);
            let s: f64 = (0..=n).map(|nu| base_g_term(nu, &p).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12, "n={n} k={k} sum={s}");
        }
    }

    #[test]
    fn variance_ratio_hand_value() {
        let p = params(2, 1, 2, 1, (1, 2), 1);
        let v = variance_ratio_bound(&p).unwrap();
        assert!((v.value - 1.5).abs() < 1e-12);
        let c = chebyshev_non_color_bound(&p).unwrap();
        assert_eq!(c.value, 1.0);
        assert!(c.clamped);
    }

    #[test]
    fn chebyshev_decreases_in_k() {
        let mut last = f64::INFINITY;
        for k in 2..40 {
            let v = variance_ratio_bound(&params(2, 1, k, 1, (1, 2), 1)).unwrap().value;
            assert!(v <= last);
            last = v;
        }
        assert!(last < 0.1);
        assert!(chebyshev_non_color_bound(&params(3, 3, 1, 1, (1, 1), 2)).is_err());
    }

    #[test]
    fn markov_values() {
        assert_eq!(markov_color_bound(&params(3, 2, 3, 2, (2, 3), 1)).value, 0.0);
        let b = markov_color_bound(&params(3, 3, 2, 1, (1, 1), 2));
        assert_eq!(b.exact, Some(ratio(1, 1)));
        assert!(!b.clamped);
        assert_eq!(markov_color_bound(&params(6, 6, 1, 1, (1, 1), 2)).value, 0.0);
    }

    #[test]
    fn gt_bound_values() {
        let b = gt_failure_bound(&params(10, 0, 40, 1, (0, 1), 0)).unwrap();
        assert!((b.value - 10.0 * (-5.0f64).exp()).abs() < 1e-12);
        let mut last = 1.0;
        for a in 2..400 {
            let v = gt_failure_bound(&params(50, 100, a, 1, (2, 1), 3)).unwrap().value;
            assert!(v <= last);
            last = v;
        }
        let vacuous = gt_failure_bound(&params(10, 20, 8, 3, (2, 1), 3)).unwrap();
        assert!(vacuous.clamped && vacuous.value == 1.0);
    }

    #[test]
    fn sparse_values() {
        let s = sparse_construction((-1.0f64).exp(), 2).unwrap();
        assert_eq!(s.t, BigUint::from(1u32));
        assert!((s.bound_at(1).unwrap().value - (-1.0f64).exp()).abs() < 1e-12);
        let s = sparse_construction(0.5, 3).unwrap();
        assert_eq!(s.t, BigUint::from(6u32));
        assert!((s.bound_at(2).unwrap().value - (-0.75f64).exp()).abs() < 1e-12);
        assert!(s.bound_at(3).is_err());
        let big = sparse_construction(0.1, 12).unwrap();
        assert!(big.ln_t > 1000.0);
        assert!(sparse_construction(0.5, 1).is_err());
    }

    #[test]
    fn thresholds() {
        let e2 = 1f64.exp().powi(2);
        let v = threshold_function(ThresholdFamily::General { rho: e2 }).unwrap();
        assert!((v - e2 / 2.0).abs() < 1e-12);
        let c = threshold_function(ThresholdFamily::Complete { n: 100 }).unwrap();
        assert!((c - 10.857).abs() < 1e-3);
        let m = threshold_function(ThresholdFamily::Multipartite { parts: 2, size: 100 }).unwrap();
        assert_eq!(c, m);
        assert!(threshold_function(ThresholdFamily::General { rho: 1.0 }).is_err());
    }
}

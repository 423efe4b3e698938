//! Canonical growth functions and the dominance calculus over them.
//!
//! A [`GrowthTerm`] denotes the function `n ↦ coeff · base^n · n^poly ·
//! lg(n)^logexp`. The family is closed under the operations we need and the
//! big-O preorder on it is decidable by comparing `(base, poly, logexp)`
//! lexicographically, coefficients ignored. A set of named
//! [`ResourceProfile`]s can then be reduced to its dominant members and to a
//! single overall-complexity term (the sum of the dominant terms).

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GrowthError {
    #[error("coefficient must be positive and finite, got {0}")]
    BadCoeff(f64),
    #[error("exponential base must be finite and >= 1, got {0}")]
    BadBase(f64),
    #[error("polynomial degree must be finite and >= 0, got {0}")]
    BadPoly(f64),
    #[error("resource set is empty")]
    EmptySet,
    #[error("duplicate resource name `{0}`")]
    DuplicateName(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// The canonical form `coeff · base^n · n^poly · lg(n)^logexp`.
///
/// Invariants: `coeff > 0`, `base >= 1`, `poly >= 0`, all finite. The log
/// factor is evaluated as `lg(max(n, 2))` so it never annihilates a term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthTerm {
    coeff: f64,
    base: f64,
    poly: f64,
    logexp: u32,
}

impl GrowthTerm {
    pub fn new(coeff: f64, base: f64, poly: f64, logexp: u32) -> Result<Self, GrowthError> {
        if !coeff.is_finite() || coeff <= 0.0 {
            return Err(GrowthError::BadCoeff(coeff));
        }
        if !base.is_finite() || base < 1.0 {
            return Err(GrowthError::BadBase(base));
        }
        if !poly.is_finite() || poly < 0.0 {
            return Err(GrowthError::BadPoly(poly));
        }
        Ok(GrowthTerm { coeff, base, poly, logexp })
    }

    /// `n^degree`, coefficient 1.
    pub fn polynomial(degree: f64) -> Self {
        GrowthTerm::new(1.0, 1.0, degree, 0).expect("valid polynomial term")
    }

    /// `base^n`, coefficient 1.
    pub fn exponential(base: f64) -> Self {
        GrowthTerm::new(1.0, base, 0.0, 0).expect("valid exponential term")
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn poly(&self) -> f64 {
        self.poly
    }

    pub fn logexp(&self) -> u32 {
        self.logexp
    }

    /// Evaluates the term at `n >= 1`.
    ///
    /// Overflow saturates to `f64::INFINITY`; it never wraps. The log factor
    /// is `lg(max(n, 2))`, so the result is finite and positive whenever the
    /// float range allows.
    pub fn eval(&self, n: u64) -> f64 {
        assert!(n >= 1, "growth terms are evaluated at n >= 1");
        let nf = n as f64;
        let log = nf.max(2.0).log2();
        let v = self.coeff * self.base.powf(nf) * nf.powf(self.poly) * log.powi(self.logexp as i32);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }

    fn shape(&self) -> (f64, f64, u32) {
        (self.base, self.poly, self.logexp)
    }
}

impl fmt::Display for GrowthTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.base != 1.0 {
            parts.push(format!("{}^n", self.base));
        }
        if self.poly == 1.0 {
            parts.push("n".to_string());
        } else if self.poly != 0.0 {
            parts.push(format!("n^{}", self.poly));
        }
        if self.logexp == 1 {
            parts.push("lg(n)".to_string());
        } else if self.logexp > 1 {
            parts.push(format!("lg(n)^{}", self.logexp));
        }
        if parts.is_empty() {
            return write!(f, "{}", self.coeff);
        }
        if self.coeff != 1.0 {
            write!(f, "{}*", self.coeff)?;
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// `f ≲ g` iff `f ∈ O(g)`: lexicographic comparison of `(base, poly,
/// logexp)`; coefficients are absorbed by the O. Total on this family.
pub fn lesssim(f: &GrowthTerm, g: &GrowthTerm) -> bool {
    let ord = f
        .shape()
        .partial_cmp(&g.shape())
        .expect("growth term fields are finite");
    ord != Ordering::Greater
}

/// Both `f ≲ g` and `g ≲ f`: same growth class.
pub fn equivalent(f: &GrowthTerm, g: &GrowthTerm) -> bool {
    lesssim(f, g) && lesssim(g, f)
}

/// A named resource together with its complexity function.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceProfile {
    pub name: String,
    pub complexity: GrowthTerm,
}

impl ResourceProfile {
    pub fn new(name: impl Into<String>, complexity: GrowthTerm) -> Self {
        ResourceProfile { name: name.into(), complexity }
    }
}

/// The maximal profiles of a finite, non-empty resource set under `≲`.
///
/// A profile `A` is dominant iff for every `B` in the set, `A ≲ B` implies
/// `B ≲ A`. The result is non-empty and, because the preorder is total on
/// this family, all returned profiles are mutually equivalent.
pub fn dominant_set(resources: &[ResourceProfile]) -> Result<Vec<&ResourceProfile>, GrowthError> {
    if resources.is_empty() {
        return Err(GrowthError::EmptySet);
    }
    let dominant: Vec<&ResourceProfile> = resources
        .iter()
        .filter(|a| {
            resources
                .iter()
                .all(|b| !lesssim(&a.complexity, &b.complexity) || lesssim(&b.complexity, &a.complexity))
        })
        .collect();
    debug_assert!(!dominant.is_empty());
    Ok(dominant)
}

/// The sum of the dominant complexity functions, canonicalized.
///
/// Dominant terms share `(base, poly, logexp)`, so the sum is that shape with
/// the coefficients added.
pub fn overall_complexity(resources: &[ResourceProfile]) -> Result<GrowthTerm, GrowthError> {
    let dominant = dominant_set(resources)?;
    let head = dominant[0].complexity;
    debug_assert!(dominant.iter().all(|p| p.complexity.shape() == head.shape()));
    let coeff = dominant.iter().map(|p| p.complexity.coeff).sum();
    GrowthTerm::new(coeff, head.base, head.poly, head.logexp)
}

/// Parses the line-oriented resource format: `name coeff base poly logexp`
/// per line, whitespace-separated, `#` starts a comment. Names must be
/// unique. Errors carry 1-based line numbers.
pub fn parse_profiles(text: &str) -> Result<Vec<ResourceProfile>, GrowthError> {
    fn field<T: std::str::FromStr>(line: usize, what: &str, tok: &str) -> Result<T, GrowthError> {
        tok.parse().map_err(|_| GrowthError::Parse {
            line,
            msg: format!("cannot parse {what} from `{tok}`"),
        })
    }

    let mut out: Vec<ResourceProfile> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(GrowthError::Parse {
                line,
                msg: format!("expected `name coeff base poly logexp`, got {} fields", tokens.len()),
            });
        }
        let name = tokens[0].to_string();
        if out.iter().any(|p| p.name == name) {
            return Err(GrowthError::Parse {
                line,
                msg: GrowthError::DuplicateName(name).to_string(),
            });
        }
        let coeff: f64 = field(line, "coeff", tokens[1])?;
        let base: f64 = field(line, "base", tokens[2])?;
        let poly: f64 = field(line, "poly", tokens[3])?;
        let logexp: u32 = field(line, "logexp", tokens[4])?;
        let term = GrowthTerm::new(coeff, base, poly, logexp)
            .map_err(|e| GrowthError::Parse { line, msg: e.to_string() })?;
        out.push(ResourceProfile::new(name, term));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn term(coeff: f64, base: f64, poly: f64, logexp: u32) -> GrowthTerm {
        GrowthTerm::new(coeff, base, poly, logexp).unwrap()
    }

    #[test]
    fn eval_direct_substitution() {
        assert_eq!(term(1.0, 2.0, 0.0, 0).eval(3), 8.0);
        assert_eq!(term(1.0, 1.0, 2.0, 0).eval(5), 25.0);
        // The precision complexity shape 2^{2n+1}/pi^2 as 2/pi^2 * 4^n.
        let precision = term(2.0 / (PI * PI), 4.0, 0.0, 0);
        let expected = 128.0 / (PI * PI);
        assert!((precision.eval(3) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn eval_log_factor_is_clamped() {
        let t = term(1.0, 1.0, 0.0, 3);
        // lg(max(1,2)) = 1, so the value stays positive at n = 1.
        assert_eq!(t.eval(1), 1.0);
        assert_eq!(t.eval(8), 27.0);
    }

    #[test]
    fn eval_overflow_saturates() {
        let t = term(1.0, 10.0, 0.0, 0);
        assert_eq!(t.eval(400), f64::INFINITY);
    }

    #[test]
    fn invalid_terms_rejected() {
        assert_eq!(GrowthTerm::new(0.0, 1.0, 0.0, 0), Err(GrowthError::BadCoeff(0.0)));
        assert_eq!(GrowthTerm::new(1.0, 0.5, 0.0, 0), Err(GrowthError::BadBase(0.5)));
        assert_eq!(GrowthTerm::new(1.0, 1.0, -1.0, 0), Err(GrowthError::BadPoly(-1.0)));
        assert!(GrowthTerm::new(f64::NAN, 1.0, 0.0, 0).is_err());
    }

    #[test]
    fn lesssim_examples() {
        let n10 = GrowthTerm::polynomial(10.0);
        let two_n = GrowthTerm::exponential(2.0);
        assert!(lesssim(&n10, &two_n));
        assert!(!lesssim(&two_n, &n10));

        // Constants are absorbed: 3n^2 and n^2 are equivalent.
        let a = term(3.0, 1.0, 2.0, 0);
        let b = term(1.0, 1.0, 2.0, 0);
        assert!(equivalent(&a, &b));

        // A log factor grows: n*lg(n) is not O(n).
        let nlog = term(1.0, 1.0, 1.0, 1);
        let n = GrowthTerm::polynomial(1.0);
        assert!(!lesssim(&nlog, &n));
        assert!(lesssim(&n, &nlog));
    }

    #[test]
    fn dominant_set_examples() {
        let r = vec![
            ResourceProfile::new("time", GrowthTerm::exponential(2.0)),
            ResourceProfile::new("space", GrowthTerm::polynomial(1.0)),
        ];
        let dom = dominant_set(&r).unwrap();
        assert_eq!(dom.len(), 1);
        assert_eq!(dom[0].name, "time");

        let r = vec![
            ResourceProfile::new("time", GrowthTerm::polynomial(1.0)),
            ResourceProfile::new("space", GrowthTerm::polynomial(1.0)),
        ];
        let dom = dominant_set(&r).unwrap();
        assert_eq!(dom.len(), 2);
    }

    #[test]
    fn precision_dominates_polynomial_time_and_space() {
        // Oracle: pairwise lesssim checks on the three profiles.
        let time = ResourceProfile::new("time", GrowthTerm::polynomial(3.0));
        let space = ResourceProfile::new("space", GrowthTerm::polynomial(2.0));
        let precision =
            ResourceProfile::new("precision", term(2.0 / (PI * PI), 4.0, 0.0, 0));
        assert!(lesssim(&time.complexity, &precision.complexity));
        assert!(!lesssim(&precision.complexity, &time.complexity));
        assert!(lesssim(&space.complexity, &precision.complexity));
        assert!(!lesssim(&precision.complexity, &space.complexity));

        let r = vec![time, space, precision];
        let dom = dominant_set(&r).unwrap();
        assert_eq!(dom.len(), 1);
        assert_eq!(dom[0].name, "precision");

        let overall = overall_complexity(&r).unwrap();
        assert!(equivalent(&overall, &r[2].complexity));
        assert_eq!(overall.base(), 4.0);
    }

    #[test]
    fn overall_sums_dominant_coefficients() {
        let r = vec![
            ResourceProfile::new("time", GrowthTerm::polynomial(1.0)),
            ResourceProfile::new("space", GrowthTerm::polynomial(1.0)),
        ];
        let overall = overall_complexity(&r).unwrap();
        assert_eq!(overall.coeff(), 2.0);
        assert_eq!(overall.poly(), 1.0);

        let r = vec![
            ResourceProfile::new("time", GrowthTerm::exponential(2.0)),
            ResourceProfile::new("space", GrowthTerm::polynomial(1.0)),
        ];
        let overall = overall_complexity(&r).unwrap();
        assert_eq!(overall.base(), 2.0);
        assert_eq!(overall.coeff(), 1.0);
    }

    #[test]
    fn empty_set_rejected() {
        assert_eq!(dominant_set(&[]).unwrap_err(), GrowthError::EmptySet);
        assert_eq!(overall_complexity(&[]).unwrap_err(), GrowthError::EmptySet);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "\
# resources of the store/retrieve system
time 1 1 3 0
space 1 1 2 0   # trailing comment
precision 0.2026 4 0 0
";
        let profiles = parse_profiles(text).unwrap();
        assert_eq!(profiles.len(), 3);
        assert_eq!(profiles[0].name, "time");
        assert_eq!(profiles[2].complexity.base(), 4.0);

        let err = parse_profiles("time 1 1 3\n").unwrap_err();
        assert!(matches!(err, GrowthError::Parse { line: 1, .. }));

        let err = parse_profiles("ok 1 1 1 0\nbad 1 x 1 0\n").unwrap_err();
        assert!(matches!(err, GrowthError::Parse { line: 2, .. }));

        let err = parse_profiles("t 1 1 1 0\nt 1 1 2 0\n").unwrap_err();
        assert!(matches!(err, GrowthError::Parse { line: 2, .. }));
        assert!(err.to_string().contains("duplicate resource name `t`"));

        // Out-of-range field values surface as parse errors with the line.
        let err = parse_profiles("t 1 0.5 1 0\n").unwrap_err();
        assert!(matches!(err, GrowthError::Parse { line: 1, .. }));
    }

    #[test]
    fn ratio_of_strictly_slower_term_decreases() {
        // Sampled empirical consistency: f strictly below g on each
        // separation axis, ratio non-increasing toward 0 on n = 8..64.
        let pairs = vec![
            (GrowthTerm::polynomial(3.0), GrowthTerm::exponential(2.0)),
            (GrowthTerm::polynomial(2.0), GrowthTerm::polynomial(3.0)),
            (term(1.0, 1.0, 1.0, 1), GrowthTerm::polynomial(2.0)),
            (GrowthTerm::polynomial(1.0), term(2.0 / (PI * PI), 4.0, 0.0, 0)),
            (GrowthTerm::polynomial(2.0), term(1.0, 1.0, 2.0, 1)),
        ];
        for (f, g) in pairs {
            assert!(lesssim(&f, &g) && !lesssim(&g, &f), "pair must be strict");
            let ratios: Vec<f64> =
                [8u64, 16, 32, 64].iter().map(|&n| f.eval(n) / g.eval(n)).collect();
            for w in ratios.windows(2) {
                assert!(w[1] <= w[0] + 1e-15, "ratio increased: {ratios:?}");
            }
            assert!(ratios[3] < ratios[0]);
        }
    }

    prop_compose! {
        fn arb_term()(
            coeff in 0.1f64..10.0,
            base in prop_oneof![Just(1.0f64), 1.0f64..4.0],
            poly in prop_oneof![Just(0.0f64), 0.0f64..4.0],
            logexp in 0u32..4,
        ) -> GrowthTerm {
            GrowthTerm::new(coeff, base, poly, logexp).unwrap()
        }
    }

    proptest! {
        #[test]
        fn lesssim_reflexive(f in arb_term()) {
            prop_assert!(lesssim(&f, &f));
        }

        #[test]
        fn lesssim_total(f in arb_term(), g in arb_term()) {
            prop_assert!(lesssim(&f, &g) || lesssim(&g, &f));
        }

        #[test]
        fn lesssim_transitive(f in arb_term(), g in arb_term(), h in arb_term()) {
            if lesssim(&f, &g) && lesssim(&g, &h) {
                prop_assert!(lesssim(&f, &h));
            }
        }

        #[test]
        fn dominant_set_is_maximal_subset(terms in prop::collection::vec(arb_term(), 1..8)) {
            let resources: Vec<ResourceProfile> = terms
                .into_iter()
                .enumerate()
                .map(|(i, t)| ResourceProfile::new(format!("r{i}"), t))
                .collect();
            let dom = dominant_set(&resources).unwrap();
            prop_assert!(!dom.is_empty());
            for m in &dom {
                prop_assert!(resources.iter().any(|r| std::ptr::eq(r, *m)));
                for b in &resources {
                    if lesssim(&m.complexity, &b.complexity) {
                        prop_assert!(lesssim(&b.complexity, &m.complexity));
                    }
                }
            }
            let overall = overall_complexity(&resources).unwrap();
            for m in &dom {
                prop_assert!(equivalent(&overall, &m.complexity));
            }
        }
    }
}

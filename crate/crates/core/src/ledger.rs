//! Exact-arithmetic decision procedures for the small-dilation filtration
//! of homotopy groups of spheres, with machine-checkable certificates.
//!
//! All threshold comparisons run over exact rationals. A class descriptor
//! records a base class in pi_m(S^n) together with a suspension count p, so
//! the suspended class lives in pi_{m+p}(S^{n+p}). Certificates assert
//! membership (or non-membership, or ignorance) of a class in the subgroup
//! of classes realizable with arbitrarily small k-dilation, and each carries
//! the rule that justifies it.
//!
//! Recorded structural facts (group isomorphisms, existence of classes) are
//! stored as `axiom-fact` entries whose verdict is `unknown`, used as an
//! n/a marker; their notes start with `fact:`. Genuinely open questions are
//! also `axiom-fact`/`unknown`, with notes starting `open question:`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::LedgerError;

/// A homotopy class given as a base class in pi_m(S^n) plus a suspension
/// count. The suspended class lives in pi_{m+p}(S^{n+p}).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDescriptor {
    pub m: u32,
    pub n: u32,
    pub p: u32,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_order: Option<u32>,
}

impl ClassDescriptor {
    pub fn new(m: u32, n: u32, p: u32, label: &str) -> Result<Self, LedgerError> {
        if n < 1 || m < n {
            return Err(LedgerError::BadBaseDims { m, n });
        }
        Ok(ClassDescriptor {
            m,
            n,
            p,
            label: label.to_string(),
            torsion_order: None,
        })
    }

    pub fn with_torsion(mut self, order: u32) -> Self {
        self.torsion_order = Some(order);
        self
    }

    /// Dimension of the sphere the suspended class maps from.
    pub fn total_domain_dim(&self) -> u32 {
        self.m + self.p
    }

    /// Dimension of the sphere the suspended class maps into.
    pub fn total_target_dim(&self) -> u32 {
        self.n + self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Member => write!(f, "member"),
            Verdict::NonMember => write!(f, "non-member"),
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

/// Justification rule attached to a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// Membership of a p-fold suspension at every k strictly above
    /// n + (n/m)p, by the explicit rectangle construction.
    Prop1Suspension,
    /// Rank bound: k-dilation vanishes identically once k exceeds the
    /// dimension of the domain or of the target sphere.
    TargetDimRank,
    /// A class with nonzero Hopf invariant admits no representatives of
    /// arbitrarily small 2n'-dilation, where the class lives in
    /// pi_{4n'-1}(S^{2n'}).
    HopfObstruction { hopf_invariant: i64 },
    /// A homotopically nontrivial self-map of S^n has n-dilation at least 1.
    DegreeObstruction { degree: i64 },
    /// Nontrivial classes admit no representatives of 2-dilation below 1
    /// (mean-curvature-flow theorem, recorded as an axiom).
    TsuiWang,
    /// Sums and inverses of members are members at the same k.
    SubgroupClosure,
    /// Membership propagates upward in k, non-membership downward.
    Nesting,
    /// An input fact with a citation, not a computation.
    AxiomFact,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Prop1Suspension => "prop1-suspension",
            Rule::TargetDimRank => "target-dim-rank",
            Rule::HopfObstruction { .. } => "hopf-obstruction",
            Rule::DegreeObstruction { .. } => "degree-obstruction",
            Rule::TsuiWang => "tsui-wang",
            Rule::SubgroupClosure => "subgroup-closure",
            Rule::Nesting => "nesting",
            Rule::AxiomFact => "axiom-fact",
        }
    }
}

/// A machine-checkable filtration fact: `class` is (or is not, or is not
/// known to be) realizable with arbitrarily small `k`-dilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub id: String,
    pub class: ClassDescriptor,
    pub k: u32,
    pub verdict: Verdict,
    #[serde(flatten)]
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<String>,
    pub note: String,
}

/// Resolves premise references by id.
#[derive(Debug, Clone, Default)]
pub struct CertificateStore {
    map: BTreeMap<String, Certificate>,
}

impl CertificateStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, cert: Certificate) {
        self.map.insert(cert.id.clone(), cert);
    }

    pub fn get(&self, id: &str) -> Option<&Certificate> {
        self.map.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Certificate> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Smallest integer k with k > n + (n/m) p, over exact rationals.
///
/// Rejects p = 0 (the construction divides by p) and m < n.
pub fn min_k_for_suspension(m: u32, n: u32, p: u32) -> Result<u32, LedgerError> {
    if n < 1 || m < n {
        return Err(LedgerError::BadBaseDims { m, n });
    }
    if p == 0 {
        return Err(LedgerError::ZeroSuspension(p));
    }
    let threshold = suspension_threshold(m, n, p);
    // Smallest integer strictly above a rational t is floor(t) + 1.
    let k = threshold.floor().to_integer() + 1;
    Ok(k as u32)
}

/// The exact threshold n + (n/m) p.
pub fn suspension_threshold(m: u32, n: u32, p: u32) -> Rational64 {
    let m = i64::from(m);
    let n = i64::from(n);
    let p = i64::from(p);
    Rational64::from_integer(n) + Rational64::new(n * p, m)
}

/// First `count` target dimensions M admitting nontrivial classes from
/// S^M realizable with arbitrarily small 3-dilation into S^N, N >= 3.
///
/// M = N + i over i = 8j+1 with i > 2N - 6. Every returned M carries a
/// membership certificate at k = 3 through the suspension rule with
/// (m, n, p) = (i+2, 2, N-2); see [`theorem1_certificates`].
pub fn theorem1_targets(n_target: u32, count: usize) -> Result<Vec<u64>, LedgerError> {
    if n_target < 3 {
        return Err(LedgerError::TargetBelowRange(n_target));
    }
    let lower = 2 * i64::from(n_target) - 6;
    let mut out = Vec::with_capacity(count);
    let mut j = 0i64;
    while out.len() < count {
        let i = 8 * j + 1;
        if i > lower {
            out.push((i64::from(n_target) + i) as u64);
        }
        j += 1;
    }
    Ok(out)
}

/// Certificates backing [`theorem1_targets`]: one membership certificate at
/// k = 3 per listed M, premised on the recorded image-of-J fact.
pub fn theorem1_certificates(
    n_target: u32,
    count: usize,
) -> Result<Vec<(u64, Certificate)>, LedgerError> {
    let targets = theorem1_targets(n_target, count)?;
    let mut out = Vec::with_capacity(targets.len());
    for m_total in targets {
        let i = m_total - u64::from(n_target);
        let class = ClassDescriptor::new(
            i as u32 + 2,
            2,
            n_target - 2,
            &format!("image-of-J class, stem {i}"),
        )?
        .with_torsion(2);
        let cert = Certificate {
            id: format!("thm1.n{n_target}.m{m_total}"),
            class,
            k: 3,
            verdict: Verdict::Member,
            rule: Rule::Prop1Suspension,
            premises: vec!["axiom.j-image".to_string()],
            note: format!(
                "suspended class in pi_{m_total}(S^{n_target}) from stem i={i}"
            ),
        };
        out.push((m_total, cert));
    }
    Ok(out)
}

/// Rank certificate for maps into S^2: every class is realizable with
/// arbitrarily small 3-dilation because 3-forms vanish on a 2-dimensional
/// target. Used by callers that enumerate targets with N = 2.
pub fn s2_rank_certificate(m_total: u32) -> Certificate {
    Certificate {
        id: format!("rank.s2.m{m_total}"),
        class: ClassDescriptor {
            m: m_total,
            n: 2,
            p: 0,
            label: "any class".to_string(),
            torsion_order: None,
        },
        k: 3,
        verdict: Verdict::Member,
        rule: Rule::TargetDimRank,
        premises: Vec::new(),
        note: "3-dilation of any smooth map into S^2 is identically zero".to_string(),
    }
}

/// Checks the side conditions of a certificate's rule, resolving premises
/// through `store`. `Ok(false)` means a side condition fails;
/// `Err` signals cycles or unresolvable premise ids.
pub fn certificate_check(
    store: &CertificateStore,
    cert: &Certificate,
) -> Result<bool, LedgerError> {
    match certificate_check_detailed(store, cert) {
        Ok(()) => Ok(true),
        Err(LedgerError::RuleViolation { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Like [`certificate_check`] but reports the first violated condition.
pub fn certificate_check_detailed(
    store: &CertificateStore,
    cert: &Certificate,
) -> Result<(), LedgerError> {
    let mut in_progress = Vec::new();
    check_rec(store, cert, &mut in_progress)
}

fn check_rec(
    store: &CertificateStore,
    cert: &Certificate,
    in_progress: &mut Vec<String>,
) -> Result<(), LedgerError> {
    if in_progress.contains(&cert.id) {
        return Err(LedgerError::CyclicPremises(cert.id.clone()));
    }
    in_progress.push(cert.id.clone());

    let premises: Vec<&Certificate> = cert
        .premises
        .iter()
        .map(|id| {
            store
                .get(id)
                .ok_or_else(|| LedgerError::UnknownCertificate(id.clone()))
        })
        .collect::<Result<_, _>>()?;
    for premise in &premises {
        check_rec(store, premise, in_progress)?;
    }

    let fail = |condition: &str| LedgerError::RuleViolation {
        id: cert.id.clone(),
        rule: cert.rule.name().to_string(),
        condition: condition.to_string(),
    };

    let class = &cert.class;
    if class.n < 1 || class.m < class.n {
        return Err(fail("class requires m >= n >= 1"));
    }
    let k = cert.k;
    let result = match &cert.rule {
        Rule::Prop1Suspension => {
            if cert.verdict != Verdict::Member {
                Err(fail("suspension rule only yields membership"))
            } else if class.p == 0 {
                Err(fail("suspension rule needs p >= 1"))
            } else if Rational64::from_integer(i64::from(k))
                <= suspension_threshold(class.m, class.n, class.p)
            {
                Err(fail("requires k > n + (n/m)p exactly"))
            } else {
                Ok(())
            }
        }
        Rule::TargetDimRank => {
            let rank_cap = class.total_domain_dim().min(class.total_target_dim());
            if cert.verdict != Verdict::Member {
                Err(fail("rank rule only yields membership"))
            } else if k <= rank_cap {
                Err(fail("requires k > min(domain dim, target dim)"))
            } else {
                Ok(())
            }
        }
        Rule::HopfObstruction { hopf_invariant } => {
            let m_tot = class.total_domain_dim();
            let n_tot = class.total_target_dim();
            if cert.verdict != Verdict::NonMember {
                Err(fail("Hopf obstruction only yields non-membership"))
            } else if *hopf_invariant == 0 {
                Err(fail("requires a nonzero recorded Hopf invariant"))
            } else if !n_tot.is_multiple_of(2) || m_tot + 1 != 2 * n_tot {
                Err(fail("class must live in pi_{4n'-1}(S^{2n'})"))
            } else if k > n_tot {
                Err(fail("requires k <= 2n'"))
            } else {
                Ok(())
            }
        }
        Rule::DegreeObstruction { degree } => {
            if cert.verdict != Verdict::NonMember {
                Err(fail("degree obstruction only yields non-membership"))
            } else if *degree == 0 {
                Err(fail("requires nonzero degree"))
            } else if class.total_domain_dim() != class.total_target_dim() {
                Err(fail("degree obstruction needs equal sphere dimensions"))
            } else if k > class.total_target_dim() {
                Err(fail("requires k <= n for the n-sphere"))
            } else {
                Ok(())
            }
        }
        Rule::TsuiWang => {
            if cert.verdict != Verdict::NonMember {
                Err(fail("2-dilation bound only yields non-membership"))
            } else if k > 2 {
                Err(fail("requires k <= 2"))
            } else if class.total_domain_dim() < 2 {
                Err(fail("requires domain dimension at least 2"))
            } else if cert.note.is_empty() {
                Err(fail("axiom requires a citation note"))
            } else {
                Ok(())
            }
        }
        Rule::SubgroupClosure => {
            if cert.verdict != Verdict::Member {
                Err(fail("closure only yields membership"))
            } else {
                let ok_premises = premises.iter().filter(|pc| {
                    pc.verdict == Verdict::Member
                        && pc.k <= k
                        && pc.class.total_domain_dim() == class.total_domain_dim()
                        && pc.class.total_target_dim() == class.total_target_dim()
                });
                if ok_premises.count() >= 1 {
                    Ok(())
                } else {
                    Err(fail(
                        "needs at least one member premise at k' <= k with matching dimensions",
                    ))
                }
            }
        }
        Rule::Nesting => {
            let matching = premises.iter().filter(|pc| {
                pc.class.total_domain_dim() == class.total_domain_dim()
                    && pc.class.total_target_dim() == class.total_target_dim()
                    && pc.class.label == class.label
            });
            let ok = match cert.verdict {
                Verdict::Member => matching
                    .filter(|pc| pc.verdict == Verdict::Member && pc.k <= k)
                    .count()
                    >= 1,
                Verdict::NonMember => matching
                    .filter(|pc| pc.verdict == Verdict::NonMember && pc.k >= k)
                    .count()
                    >= 1,
                Verdict::Unknown => false,
            };
            if ok {
                Ok(())
            } else {
                Err(fail(
                    "membership propagates to larger k only, non-membership to smaller k only",
                ))
            }
        }
        Rule::AxiomFact => {
            if cert.note.is_empty() {
                Err(fail("axiom requires a citation note"))
            } else {
                Ok(())
            }
        }
    };
    in_progress.pop();
    result
}

// ---------------------------------------------------------------------------
// Encoded fact table
// ---------------------------------------------------------------------------

const FACTS_KV: &str = include_str!("../data/filtration_facts.kv");

/// The shipped fact table, parsed once.
pub fn fact_store() -> &'static CertificateStore {
    use std::sync::OnceLock;
    static STORE: OnceLock<CertificateStore> = OnceLock::new();
    STORE.get_or_init(|| parse_fact_table(FACTS_KV).expect("shipped fact table must parse"))
}

/// All encoded certificates about classes in pi_m(S^n).
///
/// Covered groups: n = 2 with m <= 9, and (m, n) in
/// {(4,3), (5,3), (6,3), (5,4), (6,4), (7,4)}. Anything else is an explicit
/// miss, never an empty fabrication.
pub fn filtration_table(m: u32, n: u32) -> Result<Vec<Certificate>, LedgerError> {
    let in_table = (n == 2 && (2..=9).contains(&m))
        || matches!((m, n), (4, 3) | (5, 3) | (6, 3) | (5, 4) | (6, 4) | (7, 4));
    if !in_table {
        return Err(LedgerError::NoEncodedFacts { m, n });
    }
    let store = fact_store();
    let mut certs: Vec<Certificate> = store
        .iter()
        .filter(|c| c.class.total_domain_dim() == m && c.class.total_target_dim() == n)
        .cloned()
        .collect();
    certs.sort_by(|a, b| (a.k, &a.id).cmp(&(b.k, &b.id)));
    Ok(certs)
}

/// Parse the line-oriented `key=value` fact format. Fields are separated by
/// `|`; unknown keys are rejected so the format stays round-trippable.
pub fn parse_fact_table(text: &str) -> Result<CertificateStore, LedgerError> {
    let mut store = CertificateStore::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_id = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        let mut order: Vec<&str> = Vec::new();
        for piece in line.split('|') {
            let (key, value) = piece.split_once('=').ok_or(LedgerError::ParseError {
                line: line_id,
                message: format!("field `{piece}` lacks `=`"),
            })?;
            if fields.insert(key, value).is_some() {
                return Err(LedgerError::ParseError {
                    line: line_id,
                    message: format!("duplicate key `{key}`"),
                });
            }
            order.push(key);
        }
        let expect_order = [
            "id", "m", "n", "p", "label", "torsion", "k", "verdict", "rule", "h", "deg",
            "premises", "note",
        ];
        let mut cursor = expect_order.iter();
        for key in &order {
            if !cursor.any(|e| e == key) {
                return Err(LedgerError::ParseError {
                    line: line_id,
                    message: format!("key `{key}` out of canonical order"),
                });
            }
        }
        let get = |key: &str| -> Result<&str, LedgerError> {
            fields.get(key).copied().ok_or(LedgerError::ParseError {
                line: line_id,
                message: format!("missing key `{key}`"),
            })
        };
        let parse_u32 = |key: &str| -> Result<u32, LedgerError> {
            get(key)?.parse().map_err(|_| LedgerError::ParseError {
                line: line_id,
                message: format!("bad integer for `{key}`"),
            })
        };
        let parse_i64 = |value: &str| -> Result<i64, LedgerError> {
            value.parse().map_err(|_| LedgerError::ParseError {
                line: line_id,
                message: "bad integer".to_string(),
            })
        };

        let rule = match get("rule")? {
            "prop1-suspension" => Rule::Prop1Suspension,
            "target-dim-rank" => Rule::TargetDimRank,
            "hopf-obstruction" => Rule::HopfObstruction {
                hopf_invariant: parse_i64(get("h")?)?,
            },
            "degree-obstruction" => Rule::DegreeObstruction {
                degree: parse_i64(get("deg")?)?,
            },
            "tsui-wang" => Rule::TsuiWang,
            "subgroup-closure" => Rule::SubgroupClosure,
            "nesting" => Rule::Nesting,
            "axiom-fact" => Rule::AxiomFact,
            other => {
                return Err(LedgerError::ParseError {
                    line: line_id,
                    message: format!("unknown rule `{other}`"),
                })
            }
        };
        let verdict = match get("verdict")? {
            "member" => Verdict::Member,
            "non-member" => Verdict::NonMember,
            "unknown" => Verdict::Unknown,
            other => {
                return Err(LedgerError::ParseError {
                    line: line_id,
                    message: format!("unknown verdict `{other}`"),
                })
            }
        };
        let torsion_order = match fields.get("torsion") {
            Some(v) => Some(v.parse().map_err(|_| LedgerError::ParseError {
                line: line_id,
                message: "bad torsion order".to_string(),
            })?),
            None => None,
        };
        let premises = match fields.get("premises") {
            Some(v) if !v.is_empty() => v.split(',').map(str::to_string).collect(),
            _ => Vec::new(),
        };
        let cert = Certificate {
            id: get("id")?.to_string(),
            class: ClassDescriptor {
                m: parse_u32("m")?,
                n: parse_u32("n")?,
                p: parse_u32("p")?,
                label: get("label")?.to_string(),
                torsion_order,
            },
            k: parse_u32("k")?,
            verdict,
            rule,
            premises,
            note: get("note")?.to_string(),
        };
        store.insert(cert);
    }
    Ok(store)
}

/// Canonical serialization of a store back to the `key=value` line format.
/// Round-trips byte-exactly with [`parse_fact_table`] output ordering.
pub fn serialize_fact_table(store: &CertificateStore) -> String {
    let mut out = String::new();
    for cert in store.iter() {
        out.push_str(&serialize_fact_line(cert));
        out.push('\n');
    }
    out
}

fn serialize_fact_line(cert: &Certificate) -> String {
    let mut line = format!(
        "id={}|m={}|n={}|p={}|label={}",
        cert.id, cert.class.m, cert.class.n, cert.class.p, cert.class.label
    );
    if let Some(t) = cert.class.torsion_order {
        line.push_str(&format!("|torsion={t}"));
    }
    line.push_str(&format!("|k={}|verdict={}|rule={}", cert.k, cert.verdict, cert.rule.name()));
    match &cert.rule {
        Rule::HopfObstruction { hopf_invariant } => line.push_str(&format!("|h={hopf_invariant}")),
        Rule::DegreeObstruction { degree } => line.push_str(&format!("|deg={degree}")),
        _ => {}
    }
    if !cert.premises.is_empty() {
        line.push_str(&format!("|premises={}", cert.premises.join(",")));
    }
    line.push_str(&format!("|note={}", cert.note));
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_k_examples() {
        assert_eq!(min_k_for_suspension(3, 2, 1).unwrap(), 3);
        // Threshold lands exactly on the integer 6; strict inequality forces 7.
        assert_eq!(min_k_for_suspension(3, 3, 3).unwrap(), 7);
        // Stem i = 9 into S^4: (m, n, p) = (11, 2, 2).
        assert_eq!(min_k_for_suspension(11, 2, 2).unwrap(), 3);
    }

    #[test]
    fn min_k_rejects_bad_input() {
        assert!(matches!(
            min_k_for_suspension(3, 2, 0),
            Err(LedgerError::ZeroSuspension(0))
        ));
        assert!(matches!(
            min_k_for_suspension(2, 3, 1),
            Err(LedgerError::BadBaseDims { .. })
        ));
    }

    #[test]
    fn min_k_matches_brute_force_scan() {
        // Independent oracle: scan k = 1..n+p+1 for the first k with
        // k*m > n*m + n*p over integers.
        for m in 1..=12u32 {
            for n in 1..=m {
                for p in 1..=10u32 {
                    let k = min_k_for_suspension(m, n, p).unwrap();
                    let brute = (1..=(n + p + 1))
                        .find(|kk| {
                            i64::from(*kk) * i64::from(m)
                                > i64::from(n) * i64::from(m) + i64::from(n) * i64::from(p)
                        })
                        .unwrap();
                    assert_eq!(k, brute, "mismatch at m={m} n={n} p={p}");
                    // Bracketing: k-1 <= threshold < k.
                    let t = suspension_threshold(m, n, p);
                    assert!(Rational64::from_integer(i64::from(k) - 1) <= t);
                    assert!(t < Rational64::from_integer(i64::from(k)));
                }
            }
        }
    }

    #[test]
    fn theorem1_lists() {
        assert_eq!(theorem1_targets(3, 5).unwrap(), vec![4, 12, 20, 28, 36]);
        assert_eq!(theorem1_targets(4, 4).unwrap(), vec![13, 21, 29, 37]);
        // Hand enumeration: i = 8j+1 > 4 gives i = 9, 17, 25.
        assert_eq!(theorem1_targets(5, 3).unwrap(), vec![14, 22, 30]);
        assert!(matches!(
            theorem1_targets(2, 3),
            Err(LedgerError::TargetBelowRange(2))
        ));
    }

    #[test]
    fn theorem1_targets_structure() {
        for n in 3..=8u32 {
            let ms = theorem1_targets(n, 6).unwrap();
            for w in ms.windows(2) {
                assert!(w[0] < w[1]);
            }
            for &m_total in &ms {
                assert_eq!(m_total % 8, u64::from(n + 1) % 8);
                let i = m_total - u64::from(n);
                assert_eq!(min_k_for_suspension(i as u32 + 2, 2, n - 2).unwrap(), 3);
            }
        }
    }

    #[test]
    fn theorem1_certificates_validate() {
        let store = fact_store();
        for (_, cert) in theorem1_certificates(4, 4).unwrap() {
            assert!(certificate_check(store, &cert).unwrap());
        }
    }

    #[test]
    fn nesting_direction() {
        let mut store = CertificateStore::new();
        let class = ClassDescriptor::new(3, 2, 1, "suspended generator").unwrap();
        let base = Certificate {
            id: "base".into(),
            class: class.clone(),
            k: 3,
            verdict: Verdict::Member,
            rule: Rule::Prop1Suspension,
            premises: vec![],
            note: String::new(),
        };
        store.insert(base.clone());
        let up = Certificate {
            id: "up".into(),
            class: class.clone(),
            k: 4,
            verdict: Verdict::Member,
            rule: Rule::Nesting,
            premises: vec!["base".into()],
            note: String::new(),
        };
        let down = Certificate {
            id: "down".into(),
            class,
            k: 2,
            verdict: Verdict::Member,
            rule: Rule::Nesting,
            premises: vec!["base".into()],
            note: String::new(),
        };
        assert!(certificate_check(&store, &up).unwrap());
        assert!(!certificate_check(&store, &down).unwrap());
    }

    #[test]
    fn whole_group_at_k_above_domain_dim() {
        // k = m+1 membership needs no premises for any class.
        let store = CertificateStore::new();
        let cert = Certificate {
            id: "whole".into(),
            class: ClassDescriptor::new(6, 3, 0, "any class").unwrap(),
            k: 7,
            verdict: Verdict::Member,
            rule: Rule::TargetDimRank,
            premises: vec![],
            note: String::new(),
        };
        assert!(certificate_check(&store, &cert).unwrap());
    }

    #[test]
    fn check_is_monotone_in_premises() {
        // Adding one more valid premise never flips true to false.
        let mut store = CertificateStore::new();
        let class = ClassDescriptor::new(3, 2, 1, "a").unwrap();
        let mk_member = |id: &str, k: u32| Certificate {
            id: id.into(),
            class: class.clone(),
            k,
            verdict: Verdict::Member,
            rule: Rule::Prop1Suspension,
            premises: vec![],
            note: String::new(),
        };
        store.insert(mk_member("p1", 3));
        store.insert(mk_member("p2", 4));
        let mut cert = Certificate {
            id: "sum".into(),
            class: class.clone(),
            k: 4,
            verdict: Verdict::Member,
            rule: Rule::SubgroupClosure,
            premises: vec!["p1".into()],
            note: String::new(),
        };
        assert!(certificate_check(&store, &cert).unwrap());
        cert.premises.push("p2".into());
        assert!(certificate_check(&store, &cert).unwrap());
    }

    #[test]
    fn subgroup_closure_of_two_members() {
        let mut store = CertificateStore::new();
        let a = ClassDescriptor::new(5, 2, 1, "a").unwrap();
        let b = ClassDescriptor::new(4, 1, 2, "b").unwrap();
        assert_eq!(a.total_domain_dim(), b.total_domain_dim());
        assert_eq!(a.total_target_dim(), b.total_target_dim());
        for (id, class) in [("cert.a", a.clone()), ("cert.b", b)] {
            store.insert(Certificate {
                id: id.into(),
                class,
                k: 4,
                verdict: Verdict::Member,
                rule: Rule::Prop1Suspension,
                premises: vec![],
                note: String::new(),
            });
        }
        let sum = Certificate {
            id: "cert.sum".into(),
            class: ClassDescriptor::new(6, 3, 0, "a+b").unwrap(),
            k: 4,
            verdict: Verdict::Member,
            rule: Rule::SubgroupClosure,
            premises: vec!["cert.a".into(), "cert.b".into()],
            note: String::new(),
        };
        assert!(certificate_check(&store, &sum).unwrap());
        let inverse = Certificate {
            id: "cert.neg".into(),
            class: ClassDescriptor::new(6, 3, 0, "-a").unwrap(),
            k: 4,
            verdict: Verdict::Member,
            rule: Rule::SubgroupClosure,
            premises: vec!["cert.a".into()],
            note: String::new(),
        };
        assert!(certificate_check(&store, &inverse).unwrap());
    }

    #[test]
    fn cyclic_premises_detected() {
        let mut store = CertificateStore::new();
        let class = ClassDescriptor::new(3, 2, 1, "a").unwrap();
        let mk = |id: &str, premise: &str| Certificate {
            id: id.into(),
            class: class.clone(),
            k: 3,
            verdict: Verdict::Member,
            rule: Rule::Nesting,
            premises: vec![premise.into()],
            note: String::new(),
        };
        store.insert(mk("x", "y"));
        store.insert(mk("y", "x"));
        let cert = store.get("x").unwrap().clone();
        assert!(matches!(
            certificate_check(&store, &cert),
            Err(LedgerError::CyclicPremises(_))
        ));
    }

    #[test]
    fn fact_table_round_trip_is_bit_exact() {
        // The shipped file is canonical: parsing and re-serializing must
        // reproduce it byte for byte.
        let store = parse_fact_table(FACTS_KV).unwrap();
        assert_eq!(serialize_fact_table(&store), FACTS_KV);
    }

    #[test]
    fn all_shipped_certificates_validate() {
        let store = fact_store();
        for cert in store.iter() {
            if cert.verdict == Verdict::Unknown {
                continue;
            }
            let ok = certificate_check(store, cert);
            assert!(
                matches!(ok, Ok(true)),
                "certificate {} failed: {:?}",
                cert.id,
                certificate_check_detailed(store, cert)
            );
        }
    }

    #[test]
    fn table_pi7_s4() {
        let certs = filtration_table(7, 4).unwrap();
        // Kernel-of-H membership at k=4 with torsion order 12.
        let member = certs
            .iter()
            .find(|c| {
                c.k == 4 && c.verdict == Verdict::Member && matches!(c.rule, Rule::Prop1Suspension)
            })
            .expect("membership certificate");
        assert_eq!(member.class.torsion_order, Some(12));
        assert!(!member.premises.is_empty());
        // Hopf obstruction at k=4 for the infinite-order part.
        assert!(certs.iter().any(|c| {
            c.k == 4
                && c.verdict == Verdict::NonMember
                && matches!(c.rule, Rule::HopfObstruction { hopf_invariant: 1 })
        }));
    }

    #[test]
    fn table_pi4_s3() {
        let certs = filtration_table(4, 3).unwrap();
        let member = certs
            .iter()
            .find(|c| c.k == 3 && c.verdict == Verdict::Member)
            .expect("nontrivial class in V_3");
        assert!(matches!(member.rule, Rule::Prop1Suspension));
        assert_eq!(member.class.torsion_order, Some(2));
    }

    #[test]
    fn table_s2_any_m() {
        for m in 2..=9 {
            let certs = filtration_table(m, 2).unwrap();
            assert!(certs.iter().any(|c| {
                c.k == 3 && c.verdict == Verdict::Member && matches!(c.rule, Rule::TargetDimRank)
            }));
        }
    }

    #[test]
    fn table_records_open_questions() {
        let certs = filtration_table(6, 3).unwrap();
        assert!(certs.iter().any(|c| c.verdict == Verdict::Unknown && c.k == 3));
    }

    #[test]
    fn out_of_table_is_explicit_miss() {
        assert!(matches!(
            filtration_table(100, 50),
            Err(LedgerError::NoEncodedFacts { m: 100, n: 50 })
        ));
    }
}

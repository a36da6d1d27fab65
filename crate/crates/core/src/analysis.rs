//! Weakness identification: attributing the log total probability (LTP) of a
//! test run to subsets of positions (impact), and splitting the probability
//! of each word into the shares contributed by the model's components.
//!
//! The decomposition of a sum `S = sum_i a_i * b_i` assigns factor shares per
//! term as ratios of logarithms, weighted by each term's portion of `S`:
//!
//! ```text
//! p_A = sum_i (a_i b_i / S) * log2(a_i) / log2(a_i b_i),   A = S^p_A
//! ```
//!
//! so that `A * B = S` and the shares add up to one. The three-factor form
//! extends this term-wise.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::corpus::TaggedCorpus;
use crate::evaluation::{csv_field, EvalRecord};
use crate::models::WordClass;
use crate::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("no records to analyze")]
    EmptyRecords,
    #[error("decomposition needs at least one term")]
    EmptyTerms,
    #[error("factor {0} outside (0, 1]")]
    FactorOutOfRange(f64),
    #[error("sum S = {0} outside (0, 1); shares undefined")]
    SumOutOfRange(f64),
    #[error("records carry no factor terms; run the analysis on a factored model")]
    MissingFactors,
    #[error("all records have probability 1; no log mass to attribute")]
    EmptyLogMass,
    #[error("no records with previous tag {0:?}")]
    UnknownTagName(String),
    #[error("no words bearing tag {0:?} in the training text")]
    NoWordsWithTag(String),
}

/// Grouping rules for impact reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImpactKey {
    /// The conditioning context of each prediction.
    PrevTag,
    /// The tag the model assigned to the word itself.
    AssignedTag,
    /// seen / unseen / unknown.
    WordClass,
    /// The assigned tag, restricted to records whose previous tag is the
    /// given one.
    FollowingTagGiven(String),
    /// The surface form.
    Word,
}

impl ImpactKey {
    fn name(&self) -> String {
        match self {
            ImpactKey::PrevTag => "prev_tag".into(),
            ImpactKey::AssignedTag => "assigned_tag".into(),
            ImpactKey::WordClass => "word_class".into(),
            ImpactKey::FollowingTagGiven(g) => format!("following_tag_given_{g}"),
            ImpactKey::Word => "word".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct ImpactRow<T> {
    pub key: String,
    pub n: usize,
    pub ltp: T,
    /// LTP per occurrence.
    pub avg: T,
    /// Fraction of the report's total LTP.
    pub fraction: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct ImpactReport<T> {
    pub partition: String,
    pub total_ltp: T,
    /// Sorted by descending fraction, ties broken by key.
    pub rows: Vec<ImpactRow<T>>,
}

/// Groups records by a key, sums the LTP per group and reports each group's
/// impact: the fraction of the (grouped) LTP it causes.
pub fn impact<T: Scalar>(
    records: &[EvalRecord<T>],
    key: &ImpactKey,
) -> Result<ImpactReport<T>, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyRecords);
    }
    let mut groups: std::collections::BTreeMap<String, (usize, T)> = std::collections::BTreeMap::new();
    let mut total = T::zero();
    for rec in records {
        let group = match key {
            ImpactKey::PrevTag => rec.prev_tag.clone().unwrap_or_else(|| "(none)".into()),
            ImpactKey::AssignedTag => rec.assigned_tag.clone().unwrap_or_else(|| "(none)".into()),
            ImpactKey::WordClass => rec.class.to_string(),
            ImpactKey::FollowingTagGiven(g) => {
                if rec.prev_tag.as_deref() != Some(g.as_str()) {
                    continue;
                }
                rec.assigned_tag.clone().unwrap_or_else(|| "(none)".into())
            }
            ImpactKey::Word => rec.surface.clone(),
        };
        let entry = groups.entry(group).or_insert((0, T::zero()));
        entry.0 += 1;
        entry.1 = entry.1 + rec.log2p;
        total = total + rec.log2p;
    }
    if groups.is_empty() {
        if let ImpactKey::FollowingTagGiven(g) = key {
            return Err(AnalysisError::UnknownTagName(g.clone()));
        }
        return Err(AnalysisError::EmptyRecords);
    }
    if total == T::zero() {
        return Err(AnalysisError::EmptyLogMass);
    }
    let mut rows: Vec<ImpactRow<T>> = groups
        .into_iter()
        .map(|(key, (n, ltp))| ImpactRow {
            key,
            n,
            ltp,
            avg: ltp / T::from(n).unwrap(),
            fraction: ltp / total,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.fraction
            .partial_cmp(&a.fraction)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.key.cmp(&b.key))
    });
    Ok(ImpactReport { partition: key.name(), total_ltp: total, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoFactorDecomposition<T> {
    pub p_a: T,
    pub p_b: T,
    pub a: T,
    pub b: T,
    pub s: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeFactorDecomposition<T> {
    pub p_a: T,
    pub p_b: T,
    pub p_c: T,
    pub a: T,
    pub b: T,
    pub c: T,
    pub s: T,
}

fn check_factor<T: Float>(x: T) -> Result<(), AnalysisError> {
    if x > T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(AnalysisError::FactorOutOfRange(x.to_f64().unwrap_or(f64::NAN)))
    }
}

fn check_sum<T: Float>(s: T) -> Result<(), AnalysisError> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(AnalysisError::SumOutOfRange(s.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Splits `S = sum a_i * b_i` into `A * B = S` with log-shares `p_a + p_b = 1`.
pub fn decompose_two<T: Float>(terms: &[(T, T)]) -> Result<TwoFactorDecomposition<T>, AnalysisError> {
    if terms.is_empty() {
        return Err(AnalysisError::EmptyTerms);
    }
    let mut s = T::zero();
    for &(a, b) in terms {
        check_factor(a)?;
        check_factor(b)?;
        s = s + a * b;
    }
    check_sum(s)?;
    let mut p_a = T::zero();
    let mut p_b = T::zero();
    let half = T::one() / (T::one() + T::one());
    for &(a, b) in terms {
        let product = a * b;
        let weight = product / s;
        let (sa, sb) = if product == T::one() {
            // Both factors are exactly 1; the term carries no log mass to
            // apportion, so it is split evenly.
            (half, half)
        } else {
            let l = product.log2();
            (a.log2() / l, b.log2() / l)
        };
        p_a = p_a + weight * sa;
        p_b = p_b + weight * sb;
    }
    Ok(TwoFactorDecomposition { p_a, p_b, a: s.powf(p_a), b: s.powf(p_b), s })
}

/// Three-factor form of [`decompose_two`]: `A * B * C = S`,
/// `p_a + p_b + p_c = 1`.
pub fn decompose_three<T: Float>(
    terms: &[(T, T, T)],
) -> Result<ThreeFactorDecomposition<T>, AnalysisError> {
    if terms.is_empty() {
        return Err(AnalysisError::EmptyTerms);
    }
    let mut s = T::zero();
    for &(a, b, c) in terms {
        check_factor(a)?;
        check_factor(b)?;
        check_factor(c)?;
        s = s + a * b * c;
    }
    check_sum(s)?;
    let third = T::one() / T::from(3).unwrap();
    let mut p_a = T::zero();
    let mut p_b = T::zero();
    let mut p_c = T::zero();
    for &(a, b, c) in terms {
        let product = a * b * c;
        let weight = product / s;
        let (sa, sb, sc) = if product == T::one() {
            (third, third, third)
        } else {
            let l = product.log2();
            (a.log2() / l, b.log2() / l, c.log2() / l)
        };
        p_a = p_a + weight * sa;
        p_b = p_b + weight * sb;
        p_c = p_c + weight * sc;
    }
    Ok(ThreeFactorDecomposition {
        p_a,
        p_b,
        p_c,
        a: s.powf(p_a),
        b: s.powf(p_b),
        c: s.powf(p_c),
        s,
    })
}

/// Fractions of the total LTP caused by each component of the model: the
/// unknown branch, the unseen branch, the constant scale, the word-given-tag
/// factor and the tag-transition factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentShares<T> {
    pub unknown: T,
    pub unseen: T,
    pub fact: T,
    pub word: T,
    pub pos: T,
}

impl<T: Float> ComponentShares<T> {
    pub fn sum(&self) -> T {
        self.unknown + self.unseen + self.fact + self.word + self.pos
    }
}

/// Decomposes every seen-word record over its (scale, tag, word) terms and
/// aggregates the shares weighted by the record's log mass. Unknown and
/// unseen records contribute their whole log mass to their own columns.
/// Records with probability exactly 1 carry no log mass and are skipped.
pub fn component_report<T: Scalar>(
    records: &[EvalRecord<T>],
) -> Result<ComponentShares<T>, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyRecords);
    }
    let mut unknown = T::zero();
    let mut unseen = T::zero();
    let mut fact = T::zero();
    let mut word = T::zero();
    let mut pos = T::zero();
    let mut total = T::zero();
    for rec in records {
        if rec.log2p == T::zero() {
            continue;
        }
        total = total + rec.log2p;
        match rec.class {
            WordClass::Unknown => unknown = unknown + rec.log2p,
            WordClass::Unseen => unseen = unseen + rec.log2p,
            WordClass::Seen => {
                if rec.factors.is_empty() {
                    return Err(AnalysisError::MissingFactors);
                }
                let terms: Vec<(T, T, T)> =
                    rec.factors.iter().map(|f| (f.scale, f.tag_factor, f.word_factor)).collect();
                let d = decompose_three(&terms)?;
                fact = fact + d.p_a * rec.log2p;
                pos = pos + d.p_b * rec.log2p;
                word = word + d.p_c * rec.log2p;
            }
        }
    }
    if total == T::zero() {
        return Err(AnalysisError::EmptyLogMass);
    }
    Ok(ComponentShares {
        unknown: unknown / total,
        unseen: unseen / total,
        fact: fact / total,
        word: word / total,
        pos: pos / total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct ContextDetailRow<T> {
    pub tag: String,
    pub n: usize,
    pub ltp: T,
    pub avg: T,
    /// Share of the group's LTP from the tag-transition factor.
    pub f_tag: T,
    /// Share from the word-given-tag factor.
    pub f_word: T,
    /// Everything else: the constant scale, unseen and unknown words.
    pub f_rest: T,
}

/// Per-context detail for the requested previous tags.
pub fn context_detail<T: Scalar>(
    records: &[EvalRecord<T>],
    tags: &[&str],
) -> Result<Vec<ContextDetailRow<T>>, AnalysisError> {
    let mut rows = Vec::with_capacity(tags.len());
    for &tag in tags {
        let group: Vec<&EvalRecord<T>> =
            records.iter().filter(|r| r.prev_tag.as_deref() == Some(tag)).collect();
        if group.is_empty() {
            return Err(AnalysisError::UnknownTagName(tag.to_string()));
        }
        let mut ltp = T::zero();
        let mut pos_mass = T::zero();
        let mut word_mass = T::zero();
        for rec in &group {
            ltp = ltp + rec.log2p;
            if rec.class == WordClass::Seen && rec.log2p != T::zero() {
                if rec.factors.is_empty() {
                    return Err(AnalysisError::MissingFactors);
                }
                let terms: Vec<(T, T, T)> =
                    rec.factors.iter().map(|f| (f.scale, f.tag_factor, f.word_factor)).collect();
                let d = decompose_three(&terms)?;
                pos_mass = pos_mass + d.p_b * rec.log2p;
                word_mass = word_mass + d.p_c * rec.log2p;
            }
        }
        if ltp == T::zero() {
            return Err(AnalysisError::EmptyLogMass);
        }
        let f_tag = pos_mass / ltp;
        let f_word = word_mass / ltp;
        rows.push(ContextDetailRow {
            tag: tag.to_string(),
            n: group.len(),
            ltp,
            avg: ltp / T::from(group.len()).unwrap(),
            f_tag,
            f_word,
            f_rest: T::one() - f_tag - f_word,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct WordDetailRow<T> {
    pub tag: String,
    pub n: usize,
    /// Log mass attributed to the word-given-tag factor within this tag.
    pub ltp: T,
    pub avg: T,
    /// Fraction of the total word-factor mass.
    pub fraction: T,
    /// Fraction of the whole test LTP.
    pub fraction_total: T,
}

/// How hard the words of each (assigned) tag are to predict given the tag:
/// the word-factor share of LTP, grouped by tag. Unknown and unseen words are
/// left out.
pub fn word_detail<T: Scalar>(
    records: &[EvalRecord<T>],
) -> Result<Vec<WordDetailRow<T>>, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyRecords);
    }
    let mut groups: std::collections::BTreeMap<String, (usize, T)> = std::collections::BTreeMap::new();
    let mut total_word_mass = T::zero();
    let mut total_ltp = T::zero();
    for rec in records {
        total_ltp = total_ltp + rec.log2p;
        if rec.class != WordClass::Seen || rec.log2p == T::zero() {
            continue;
        }
        if rec.factors.is_empty() {
            return Err(AnalysisError::MissingFactors);
        }
        let terms: Vec<(T, T, T)> =
            rec.factors.iter().map(|f| (f.scale, f.tag_factor, f.word_factor)).collect();
        let d = decompose_three(&terms)?;
        let mass = d.p_c * rec.log2p;
        let tag = rec.assigned_tag.clone().unwrap_or_else(|| "(none)".into());
        let entry = groups.entry(tag).or_insert((0, T::zero()));
        entry.0 += 1;
        entry.1 = entry.1 + mass;
        total_word_mass = total_word_mass + mass;
    }
    if total_word_mass == T::zero() || total_ltp == T::zero() {
        return Err(AnalysisError::EmptyLogMass);
    }
    let mut rows: Vec<WordDetailRow<T>> = groups
        .into_iter()
        .map(|(tag, (n, mass))| WordDetailRow {
            tag,
            n,
            ltp: mass,
            avg: mass / T::from(n).unwrap(),
            fraction: mass / total_word_mass,
            fraction_total: mass / total_ltp,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.fraction
            .partial_cmp(&a.fraction)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.tag.cmp(&b.tag))
    });
    Ok(rows)
}

/// Cumulative impact curve: after sorting by descending fraction, the point
/// `(k/K, cumulative fraction of LTP)` for each prefix of keys. The last
/// point is exactly (1, 1).
pub fn zipf_curve<T: Scalar>(report: &ImpactReport<T>) -> Vec<(T, T)> {
    let k = report.rows.len();
    let total = report.rows.iter().fold(T::zero(), |acc, r| acc + r.ltp);
    let mut cum = T::zero();
    report
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            cum = cum + row.ltp;
            (T::from(i + 1).unwrap() / T::from(k).unwrap(), cum / total)
        })
        .collect()
}

/// For x = 1..=20, the fraction of distinct words bearing `tag` in training
/// whose occurrence count is below x. Nondecreasing in x.
pub fn rare_word_curve<T: Scalar>(
    train: &TaggedCorpus,
    tag: &str,
) -> Result<Vec<(u32, T)>, AnalysisError> {
    let mut counts: std::collections::BTreeMap<&str, u64> = std::collections::BTreeMap::new();
    for tok in &train.tokens {
        if tok.tag == tag {
            *counts.entry(tok.surface.as_str()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(AnalysisError::NoWordsWithTag(tag.to_string()));
    }
    Ok(rare_word_curve_from_counts(counts.values().copied()))
}

/// Same curve from precomputed per-word occurrence counts.
pub fn rare_word_curve_from_counts<T: Scalar>(counts: impl IntoIterator<Item = u64>) -> Vec<(u32, T)> {
    let counts: Vec<u64> = counts.into_iter().collect();
    let total = T::from(counts.len()).unwrap();
    (1..=20u32)
        .map(|x| {
            let below = counts.iter().filter(|&&c| c < u64::from(x)).count();
            (x, T::from(below).unwrap() / total)
        })
        .collect()
}

pub fn impact_csv<T: Scalar>(report: &ImpactReport<T>) -> String {
    let mut out = String::from("key,n,ltp,avg,fraction\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&row.key),
            row.n,
            row.ltp,
            row.avg,
            row.fraction
        ));
    }
    out
}

pub fn components_csv<T: Scalar>(shares: &ComponentShares<T>) -> String {
    format!(
        "unknown,unseen,fact,word,pos\n{},{},{},{},{}\n",
        shares.unknown, shares.unseen, shares.fact, shares.word, shares.pos
    )
}

pub fn context_detail_csv<T: Scalar>(rows: &[ContextDetailRow<T>]) -> String {
    let mut out = String::from("tag,n,ltp,avg,f_tag,f_word,f_rest\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_field(&row.tag),
            row.n,
            row.ltp,
            row.avg,
            row.f_tag,
            row.f_word,
            row.f_rest
        ));
    }
    out
}

pub fn word_detail_csv<T: Scalar>(rows: &[WordDetailRow<T>]) -> String {
    let mut out = String::from("tag,n,ltp,avg,fraction,fraction_total\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&row.tag),
            row.n,
            row.ltp,
            row.avg,
            row.fraction,
            row.fraction_total
        ));
    }
    out
}

pub fn curve_csv<T: Scalar, X: std::fmt::Display>(points: &[(X, T)], x_name: &str, y_name: &str) -> String {
    let mut out = format!("{x_name},{y_name}\n");
    for (x, y) in points {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform_records(text: &[&str], p: f64) -> Vec<EvalRecord<f64>> {
        text.iter()
            .enumerate()
            .map(|(i, w)| EvalRecord {
                index: i,
                surface: w.to_string(),
                class: WordClass::Seen,
                prev_tag: None,
                assigned_tag: None,
                prob: p,
                log2p: p.log2(),
                factors: vec![],
                variable: None,
            })
            .collect()
    }

    #[test]
    fn impact_of_bddad() {
        let recs = uniform_records(&["b", "d", "d", "a", "d"], 0.25);
        let report = impact(&recs, &ImpactKey::Word).unwrap();
        let by_key: std::collections::BTreeMap<&str, f64> =
            report.rows.iter().map(|r| (r.key.as_str(), r.fraction)).collect();
        assert_abs_diff_eq!(by_key["d"], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(by_key["a"], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(by_key["b"], 0.2, epsilon = 1e-12);
        assert!(!by_key.contains_key("c"));
        assert_eq!(report.rows[0].key, "d");
        let sum: f64 = report.rows.iter().map(|r| r.fraction).sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_group_has_full_impact() {
        let recs = uniform_records(&["x", "x"], 0.5);
        let report = impact(&recs, &ImpactKey::Word).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].fraction, 1.0);
        assert!(impact::<f64>(&[], &ImpactKey::Word).is_err());
    }

    #[test]
    fn decompose_two_reference_values() {
        let d = decompose_two(&[(0.5, 0.25), (0.5, 0.5)]).unwrap();
        assert_abs_diff_eq!(d.s, 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(d.p_a, 4.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.p_b, 5.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.a, 0.6466, epsilon = 1e-3);
        assert_abs_diff_eq!(d.b, 0.5799, epsilon = 1e-3);
        assert_abs_diff_eq!(d.a * d.b, d.s, epsilon = 1e-12);

        let single = decompose_two(&[(0.5, 0.25)]).unwrap();
        assert_abs_diff_eq!(single.p_a, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn decompose_two_unit_b_side() {
        let d = decompose_two(&[(0.25, 1.0), (0.5, 1.0)]).unwrap();
        assert_eq!(d.p_b, 0.0);
        assert_eq!(d.p_a, 1.0);
        assert_abs_diff_eq!(d.a, d.s, epsilon = 1e-15);
    }

    #[test]
    fn decompose_errors() {
        assert!(decompose_two::<f64>(&[]).is_err());
        assert!(decompose_two(&[(0.0, 0.5)]).is_err());
        assert!(decompose_two(&[(0.9, 0.9), (0.9, 0.9)]).is_err()); // S >= 1
    }

    #[test]
    fn decompose_three_degenerate_c() {
        let with_c = decompose_three(&[(0.5, 0.25, 1.0), (0.5, 0.5, 1.0)]).unwrap();
        let two = decompose_two(&[(0.5, 0.25), (0.5, 0.5)]).unwrap();
        assert_abs_diff_eq!(with_c.p_a, two.p_a, epsilon = 1e-12);
        assert_abs_diff_eq!(with_c.p_b, two.p_b, epsilon = 1e-12);
        assert_eq!(with_c.p_c, 0.0);

        let sym = decompose_three(&[(0.6, 0.6, 0.6)]).unwrap();
        assert_abs_diff_eq!(sym.p_a, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sym.p_b, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sym.p_c, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_term_share_falls_as_factor_grows() {
        // For fixed S, the share of the first factor decreases as the factor
        // increases towards 1.
        let s = 0.125f64;
        let mut last = f64::INFINITY;
        for i in 1..=10 {
            let a = s + (1.0 - s) * i as f64 / 10.0;
            let b = s / a;
            let d = decompose_two(&[(a, b)]).unwrap();
            assert!(d.p_a < last);
            last = d.p_a;
        }
    }

    fn seen_record(factors: Vec<(f64, f64, f64)>) -> EvalRecord<f64> {
        let prob: f64 = factors.iter().map(|(a, b, c)| a * b * c).sum();
        EvalRecord {
            index: 0,
            surface: "w".into(),
            class: WordClass::Seen,
            prev_tag: Some("N".into()),
            assigned_tag: Some("N".into()),
            prob,
            log2p: prob.log2(),
            factors: factors
                .into_iter()
                .map(|(scale, tag_factor, word_factor)| crate::models::FactorTerm {
                    scale,
                    tag_factor,
                    word_factor,
                })
                .collect(),
            variable: None,
        }
    }

    #[test]
    fn component_shares_sum_to_one() {
        let mut records = vec![
            seen_record(vec![(0.9, 0.5, 0.25)]),
            seen_record(vec![(0.9, 0.25, 0.125), (0.9, 0.125, 0.5)]),
        ];
        records.push(EvalRecord {
            index: 2,
            surface: "zzz".into(),
            class: WordClass::Unknown,
            prev_tag: Some("N".into()),
            assigned_tag: Some("N".into()),
            prob: 0.1,
            log2p: 0.1f64.log2(),
            factors: vec![],
            variable: None,
        });
        let shares = component_report(&records).unwrap();
        assert_abs_diff_eq!(shares.sum(), 1.0, epsilon = 1e-9);
        assert!(shares.unknown > 0.0);
    }

    #[test]
    fn unique_tag_certain_word_has_no_word_share() {
        // f(w|g) = 1 for every record: the word column gets nothing.
        let records = vec![seen_record(vec![(0.9, 0.5, 1.0)]), seen_record(vec![(0.9, 0.25, 1.0)])];
        let shares = component_report(&records).unwrap();
        assert_abs_diff_eq!(shares.word, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn context_detail_two_factor_group() {
        // Scale 1 and no unknowns: everything is tag + word, f_rest ~ 0.
        let records = vec![seen_record(vec![(1.0, 0.5, 0.5)]), seen_record(vec![(1.0, 0.25, 0.5)])];
        let rows = context_detail(&records, &["N"]).unwrap();
        assert_eq!(rows[0].n, 2);
        assert_abs_diff_eq!(rows[0].f_rest, 0.0, epsilon = 1e-12);
        assert!(context_detail(&records, &["Q"]).is_err());
    }

    #[test]
    fn zipf_curve_endpoints() {
        let recs = uniform_records(&["a", "b", "c", "d"], 0.25);
        let report = impact(&recs, &ImpactKey::Word).unwrap();
        let curve = zipf_curve(&report);
        assert_eq!(curve.len(), 4);
        assert_abs_diff_eq!(curve[0].0, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(curve[0].1, 0.25, epsilon = 1e-12);
        assert_eq!(curve.last().unwrap().0, 1.0);
        assert_eq!(curve.last().unwrap().1, 1.0);

        let bddad = uniform_records(&["b", "d", "d", "a", "d"], 0.25);
        let curve = zipf_curve(&impact(&bddad, &ImpactKey::Word).unwrap());
        // The top key "d" carries 0.6 of the mass.
        assert_abs_diff_eq!(curve[0].1, 0.6, epsilon = 1e-12);
    }

    #[test]
    fn rare_words_all_hapax() {
        use crate::corpus::{read_lob, TagMap};
        let map = TagMap::identity("id", &["N"]);
        let corpus = read_lob(std::io::Cursor::new("^ a_N b_N c_N"), &map).unwrap().corpus;
        let curve: Vec<(u32, f64)> = rare_word_curve(&corpus, "N").unwrap();
        assert_eq!(curve[0], (1, 0.0));
        assert_eq!(curve[1], (2, 1.0));
        for w in curve.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
        assert!(rare_word_curve::<f64>(&corpus, "V").is_err());
    }
}

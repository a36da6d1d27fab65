//! Frequency counting, maximum-likelihood estimation, additive smoothing and
//! information-theoretic measures. This is the estimation substrate shared by
//! every model in the crate; all probability math is generic over the scalar
//! type.

use std::collections::BTreeMap;

use num_traits::Float;

use crate::num;

#[derive(Debug, thiserror::Error)]
pub enum DistributionError {
    #[error("context has zero total count; MLE undefined")]
    EmptyContext,
    #[error("smoothing floor v1 must satisfy 0 <= v1 < 1/|E| (|E| = {events})")]
    FloorTooLarge { events: usize },
    #[error("event sets differ ({left} vs {right} events)")]
    EventSetMismatch { left: usize, right: usize },
    #[error("posterior assigns mass to an event with zero prior probability")]
    InfiniteDivergence,
}

/// Occurrence counts of events per context, with per-context totals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreqTable<C: Ord + Clone, E: Ord + Clone> {
    contexts: BTreeMap<C, ContextCounts<E>>,
    trials: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextCounts<E: Ord + Clone> {
    pub events: BTreeMap<E, u64>,
    pub total: u64,
}

impl<E: Ord + Clone> Default for ContextCounts<E> {
    fn default() -> Self {
        ContextCounts { events: BTreeMap::new(), total: 0 }
    }
}

impl<C: Ord + Clone, E: Ord + Clone> FreqTable<C, E> {
    pub fn new() -> Self {
        FreqTable { contexts: BTreeMap::new(), trials: 0 }
    }

    pub fn add(&mut self, context: C, event: E) {
        self.add_n(context, event, 1);
    }

    pub fn add_n(&mut self, context: C, event: E, n: u64) {
        let ctx = self.contexts.entry(context).or_default();
        *ctx.events.entry(event).or_insert(0) += n;
        ctx.total += n;
        self.trials += n;
    }

    /// Elementwise addition; tables counted over disjoint shards of the same
    /// data merge into the table of the whole.
    pub fn merge(&mut self, other: &FreqTable<C, E>) {
        for (c, counts) in &other.contexts {
            for (e, n) in &counts.events {
                self.add_n(c.clone(), e.clone(), *n);
            }
        }
    }

    pub fn count(&self, context: &C, event: &E) -> u64 {
        self.contexts.get(context).and_then(|c| c.events.get(event)).copied().unwrap_or(0)
    }

    pub fn context_total(&self, context: &C) -> u64 {
        self.contexts.get(context).map(|c| c.total).unwrap_or(0)
    }

    /// Total number of trials N (the input length).
    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&C, &ContextCounts<E>)> {
        self.contexts.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

/// Counts a sequence of (context, event) observations.
pub fn count<C, E, I>(events: I) -> FreqTable<C, E>
where
    C: Ord + Clone,
    E: Ord + Clone,
    I: IntoIterator<Item = (C, E)>,
{
    let mut table = FreqTable::new();
    for (c, e) in events {
        table.add(c, e);
    }
    table
}

/// Per-context probability vectors over a declared event set.
///
/// Vectors are dense over the declared events; contexts that were never
/// observed simply have no entry and materialize zeros on lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct CondDistribution<T, C: Ord + Clone, E: Ord + Clone> {
    events: Vec<E>,
    event_index: BTreeMap<E, usize>,
    contexts: BTreeMap<C, Vec<T>>,
}

impl<T: Float, C: Ord + Clone, E: Ord + Clone> CondDistribution<T, C, E> {
    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[E] {
        &self.events
    }

    pub fn prob(&self, context: &C, event: &E) -> T {
        match (self.contexts.get(context), self.event_index.get(event)) {
            (Some(v), Some(&i)) => v[i],
            _ => T::zero(),
        }
    }

    pub fn vector(&self, context: &C) -> Option<&[T]> {
        self.contexts.get(context).map(Vec::as_slice)
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&C, &[T])> {
        self.contexts.iter().map(|(c, v)| (c, v.as_slice()))
    }
}

/// Maximum-likelihood estimates from a frequency table. Every context must
/// have a positive total; unobserved events in a context get probability 0.
pub fn mle<T, C, E>(freq: &FreqTable<C, E>) -> Result<CondDistribution<T, C, E>, DistributionError>
where
    T: Float,
    C: Ord + Clone,
    E: Ord + Clone,
{
    let mut events: Vec<E> = Vec::new();
    let mut event_index: BTreeMap<E, usize> = BTreeMap::new();
    for (_, counts) in freq.contexts() {
        for e in counts.events.keys() {
            if !event_index.contains_key(e) {
                event_index.insert(e.clone(), events.len());
                events.push(e.clone());
            }
        }
    }
    let mut contexts = BTreeMap::new();
    for (c, counts) in freq.contexts() {
        if counts.total == 0 {
            return Err(DistributionError::EmptyContext);
        }
        let total = T::from(counts.total).unwrap();
        let mut vec = vec![T::zero(); events.len()];
        for (e, n) in &counts.events {
            vec[event_index[e]] = T::from(*n).unwrap() / total;
        }
        contexts.insert(c.clone(), vec);
    }
    Ok(CondDistribution { events, event_index, contexts })
}

/// Additive smoothing: `p' = v2 * p + v1` with `v2 = 1 - |E| * v1`, applied
/// per context. Keeps each vector normalized and, for `v1 > 0`, strictly
/// positive.
pub fn smooth_additive<T, C, E>(
    dist: &CondDistribution<T, C, E>,
    v1: T,
) -> Result<CondDistribution<T, C, E>, DistributionError>
where
    T: Float,
    C: Ord + Clone,
    E: Ord + Clone,
{
    let e_count = dist.event_count();
    let e = T::from(e_count).unwrap();
    if v1 < T::zero() || v1 * e >= T::one() {
        return Err(DistributionError::FloorTooLarge { events: e_count });
    }
    let v2 = T::one() - e * v1;
    let contexts = dist
        .contexts
        .iter()
        .map(|(c, v)| (c.clone(), v.iter().map(|&p| v2 * p + v1).collect()))
        .collect();
    Ok(CondDistribution {
        events: dist.events.clone(),
        event_index: dist.event_index.clone(),
        contexts,
    })
}

/// Linear interpolation `lambda * d1 + (1 - lambda) * d2` of two probability
/// vectors over the same event set.
pub fn interpolate<T: Float>(d1: &[T], d2: &[T], lambda: T) -> Result<Vec<T>, DistributionError> {
    if d1.len() != d2.len() {
        return Err(DistributionError::EventSetMismatch { left: d1.len(), right: d2.len() });
    }
    Ok(d1
        .iter()
        .zip(d2)
        .map(|(&a, &b)| lambda * a + (T::one() - lambda) * b)
        .collect())
}

/// Shannon entropy in bits, with 0 * log2(0) taken as 0.
pub fn entropy<T: Float>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |acc, &x| {
        if x > T::zero() {
            acc - x * x.log2()
        } else {
            acc
        }
    })
}

/// Relative entropy D(posterior || prior) in bits. Requires
/// `prior[e] = 0 => posterior[e] = 0`; the 0 * log2(0/0) terms vanish.
pub fn relative_entropy<T: Float>(posterior: &[T], prior: &[T]) -> Result<T, DistributionError> {
    if posterior.len() != prior.len() {
        return Err(DistributionError::EventSetMismatch {
            left: posterior.len(),
            right: prior.len(),
        });
    }
    let mut d = T::zero();
    for (&p, &q) in posterior.iter().zip(prior) {
        if p > T::zero() {
            if q <= T::zero() {
                return Err(DistributionError::InfiniteDivergence);
            }
            d = d + p * (p / q).log2();
        }
    }
    Ok(d)
}

/// Normalization tolerance used by the invariant checks in this crate.
pub fn norm_tolerance<T: Float>() -> T {
    num(1e-9)
}

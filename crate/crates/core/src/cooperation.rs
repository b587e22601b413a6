//! Speaker selection, consensus, resource shares, and the endorsement ledger.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::{Real, Scalar};
use crate::trophic::DirectedGraph;

pub type AgentId = u64;

/// Softmax of the abilities, shifted by the maximum so large abilities do
/// not overflow.
pub fn speaker_probabilities<T: Real>(alphas: &[T]) -> Vec<T> {
    let Some(max) = alphas.iter().copied().reduce(T::max) else {
        return Vec::new();
    };
    let exps: Vec<T> = alphas.iter().map(|&a| (a - max).exp()).collect();
    let sum = exps.iter().fold(T::zero(), |s, &e| s + e);
    exps.into_iter().map(|e| e / sum).collect()
}

/// Inverse-CDF draw from [`speaker_probabilities`] using one uniform.
pub fn select_speaker<T: Real, R: Rng + ?Sized>(alphas: &[T], rng: &mut R) -> usize {
    let draw = T::lit(rng.random::<f64>());
    pick_by_cdf(&speaker_probabilities(alphas), draw)
}

/// First index whose cumulative probability exceeds `draw`.
pub fn pick_by_cdf<T: Real>(probs: &[T], draw: T) -> usize {
    let mut acc = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return i;
        }
    }
    // rounding left the total a hair below the draw
    probs.iter().rposition(|&p| p > T::zero()).unwrap_or(0)
}

/// Rank of each ability divided by team size, ascending, ties averaged.
pub fn percentile_ranks<T: Scalar>(alphas: &[T]) -> Vec<T> {
    let n = alphas.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| alphas[a].partial_cmp(&alphas[b]).expect("comparable abilities"));
    let two = T::one() + T::one();
    let size = T::from_count(n);
    let mut ranks = vec![T::zero(); n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && alphas[order[end]] == alphas[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean rank
        let mean_rank = (T::from_count(start + 1) + T::from_count(end)) / two;
        for &k in &order[start..end] {
            ranks[k] = mean_rank / size;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Speaker,
    Listener,
}

/// Speakers map into `(0.5, 1]`, listeners into `(0, 0.5]`.
pub fn expected_dominance<T: Scalar>(rank: T, role: Role) -> T {
    let half = T::one() / (T::one() + T::one());
    match role {
        Role::Speaker => half + half * rank,
        Role::Listener => half * rank,
    }
}

/// `1 + mean over listeners of (α_s − α_l)(d_s − d_l)`.
pub fn consensus_coefficient<T: Scalar>(speaker: (T, T), listeners: &[(T, T)]) -> T {
    assert!(!listeners.is_empty(), "consensus needs at least one listener");
    let (alpha_s, d_s) = speaker;
    let sum = listeners
        .iter()
        .fold(T::zero(), |acc, &(alpha_l, d_l)| acc + (alpha_s - alpha_l) * (d_s - d_l));
    T::one() + sum / T::from_count(listeners.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T> {
    pub shares: Vec<T>,
    /// Some numerator `1 + d·α` was not positive; shares fell back to uniform.
    pub degenerate: bool,
}

/// Shares proportional to `1 + d·α_i`, or uniform if any numerator is not positive.
pub fn allocate_shares<T: Scalar>(alphas: &[T], consensus: T) -> Allocation<T> {
    let n = alphas.len();
    assert!(n > 0, "allocation needs a non-empty team");
    let numerators: Vec<T> = alphas.iter().map(|&a| T::one() + consensus * a).collect();
    if numerators.iter().any(|&x| x <= T::zero()) {
        let uniform = T::one() / T::from_count(n);
        return Allocation {
            shares: vec![uniform; n],
            degenerate: true,
        };
    }
    let total = numerators.iter().fold(T::zero(), |s, &x| s + x);
    Allocation {
        shares: numerators.into_iter().map(|x| x / total).collect(),
        degenerate: false,
    }
}

/// Outcome of the consensus pipeline for one team, before any energy moves.
#[derive(Debug, Clone, PartialEq)]
pub struct Consensus<T> {
    /// Index into the team of the selected speaker.
    pub speaker: usize,
    pub ranks: Vec<T>,
    pub dominance: Vec<T>,
    pub coefficient: T,
    pub allocation: Allocation<T>,
}

/// Speaker draw, ranks, expected dominance, consensus coefficient and shares.
pub fn run_consensus<T: Real, R: Rng + ?Sized>(alphas: &[T], rng: &mut R) -> Consensus<T> {
    assert!(alphas.len() >= 2, "a cooperation team needs a speaker and a listener");
    let speaker = select_speaker(alphas, rng);
    let ranks = percentile_ranks(alphas);
    let dominance: Vec<T> = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| expected_dominance(r, if i == speaker { Role::Speaker } else { Role::Listener }))
        .collect();
    let listeners: Vec<(T, T)> = (0..alphas.len())
        .filter(|&i| i != speaker)
        .map(|i| (alphas[i], dominance[i]))
        .collect();
    let coefficient = consensus_coefficient((alphas[speaker], dominance[speaker]), &listeners);
    let allocation = allocate_shares(alphas, coefficient);
    Consensus {
        speaker,
        ranks,
        dominance,
        coefficient,
        allocation,
    }
}

/// A completed cooperation event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooperationEvent {
    pub step: u64,
    /// Event index within the step.
    pub index: u32,
    pub team: [AgentId; 3],
    pub speaker: AgentId,
    pub listeners: [AgentId; 2],
    pub consensus: f64,
    /// Share of each team member, aligned with `team`.
    pub shares: [f64; 3],
    pub energy_pool: f64,
    pub degenerate_allocation: bool,
}

/// Cumulative listener → speaker endorsement counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionLedger {
    weights: BTreeMap<(AgentId, AgentId), u64>,
    events: u64,
}

impl InteractionLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// One endorsement per listener toward the speaker. Listeners equal to
    /// the speaker are ignored so the diagonal stays empty.
    pub fn record_event(&mut self, speaker: AgentId, listeners: &[AgentId]) {
        for &l in listeners {
            if l != speaker {
                *self.weights.entry((l, speaker)).or_insert(0) += 1;
            }
        }
        self.events += 1;
    }

    pub fn weight(&self, listener: AgentId, speaker: AgentId) -> u64 {
        self.weights.get(&(listener, speaker)).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.values().sum()
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    /// `(listener, speaker, count)` in ascending key order.
    pub fn entries(&self) -> impl Iterator<Item = (AgentId, AgentId, u64)> + '_ {
        self.weights.iter().map(|(&(l, s), &w)| (l, s, w))
    }

    /// Endorsement graph restricted to edges whose endpoints both pass
    /// `keep`. Nodes are labelled by agent id and indexed in ascending id order.
    pub fn to_graph(&self, keep: impl Fn(AgentId) -> bool) -> DirectedGraph<f64> {
        let mut ids: Vec<AgentId> = self
            .weights
            .keys()
            .flat_map(|&(l, s)| [l, s])
            .filter(|&id| keep(id))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let mut g = DirectedGraph::new();
        for id in &ids {
            g.add_node(&id.to_string());
        }
        for (&(l, s), &w) in &self.weights {
            if let (Ok(li), Ok(si)) = (ids.binary_search(&l), ids.binary_search(&s)) {
                g.add_edge_by_index(li, si, w as f64).expect("positive weight");
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn softmax_equal_abilities() {
        let p = speaker_probabilities(&[7.0f64, 7.0, 7.0]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn softmax_two_values_and_translation() {
        // 1 / (1 + e) and e / (1 + e)
        let expect = [0.268_941_421_369_995_1, 0.731_058_578_630_004_9];
        for alphas in [[1.0f64, 2.0], [1000.0, 1001.0]] {
            let p = speaker_probabilities(&alphas);
            assert!(p.iter().all(|x| x.is_finite()));
            assert!((p[0] - expect[0]).abs() < 1e-9 && (p[1] - expect[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn saturated_softmax_always_picks_the_strongest() {
        let mut rng = substream(0, 0, 0, Purpose::Cooperation);
        for _ in 0..1000 {
            assert_eq!(select_speaker(&[160.0, 100.0, 100.0], &mut rng), 0);
        }
        assert_eq!(pick_by_cdf(&[1.0, 0.0, 0.0], 0.999_999_999), 0);
        assert_eq!(pick_by_cdf(&[0.5, 0.5, 0.0], 1.0), 1);
    }

    #[test]
    fn speaker_frequency_matches_softmax() {
        let mut rng = substream(1, 0, 0, Purpose::Cooperation);
        let n = 100_000;
        let hits = (0..n).filter(|_| select_speaker(&[1.0, 2.0], &mut rng) == 1).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.731).abs() < 0.01, "{freq}");
    }

    #[test]
    fn speaker_sequence_is_seeded() {
        let draw = |seed| {
            let mut rng = substream(seed, 0, 0, Purpose::Cooperation);
            (0..50).map(|_| select_speaker(&[100.0, 100.5, 101.0], &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
    }

    #[test]
    fn ranks() {
        assert_eq!(percentile_ranks(&[r(1, 1), r(2, 1), r(3, 1)]), vec![r(1, 3), r(2, 3), r(1, 1)]);
        assert_eq!(percentile_ranks(&[r(5, 1); 3]), vec![r(2, 3); 3]);
        assert_eq!(percentile_ranks(&[r(5, 1)]), vec![r(1, 1)]);
        assert_eq!(percentile_ranks(&[r(3, 1), r(1, 1), r(3, 1)]), vec![r(5, 6), r(1, 3), r(5, 6)]);
    }

    #[test]
    fn dominance() {
        assert_eq!(expected_dominance(r(1, 1), Role::Speaker), r(1, 1));
        assert_eq!(expected_dominance(r(1, 2), Role::Listener), r(1, 4));
        let tiny = expected_dominance(1e-12, Role::Listener);
        assert!(tiny > 0.0 && tiny < 1e-11);
    }

    #[test]
    fn consensus_values() {
        // equal abilities are neutral whatever the dominances
        let d = consensus_coefficient((r(100, 1), r(5, 6)), &[(r(100, 1), r(1, 3)), (r(100, 1), r(1, 3))]);
        assert_eq!(d, r(1, 1));
        // two-agent team α = (2, 1), speaker first
        let ranks = percentile_ranks(&[r(2, 1), r(1, 1)]);
        assert_eq!(ranks, vec![r(1, 1), r(1, 2)]);
        let ds = expected_dominance(ranks[0], Role::Speaker);
        let dl = expected_dominance(ranks[1], Role::Listener);
        assert_eq!(consensus_coefficient((r(2, 1), ds), &[(r(1, 1), dl)]), r(7, 4));
        // weaker speaker meets resistance
        let ds = expected_dominance(0.5, Role::Speaker);
        let dl = expected_dominance(1.0, Role::Listener);
        assert!(consensus_coefficient((1.0f64, ds), &[(2.0, dl)]) < 1.0);
    }

    #[test]
    fn shares() {
        let a = allocate_shares(&[r(7, 1), r(7, 1), r(7, 1)], r(3, 2));
        assert_eq!(a.shares, vec![r(1, 3); 3]);
        let a = allocate_shares(&[r(1, 1), r(50, 1), r(99, 1)], r(0, 1));
        assert_eq!(a.shares, vec![r(1, 3); 3]);
        let a = allocate_shares(&[r(1, 1), r(3, 1)], r(1, 1));
        assert_eq!(a.shares, vec![r(1, 3), r(2, 3)]);
        assert!(!a.degenerate);
        let a = allocate_shares(&[100.0, 101.0, 99.0], -0.5);
        assert!(a.degenerate);
        assert_eq!(a.shares, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn consensus_pipeline_equal_team() {
        let mut rng = substream(3, 0, 0, Purpose::Cooperation);
        let c = run_consensus(&[100.0f64, 100.0, 100.0], &mut rng);
        assert_eq!(c.coefficient, 1.0);
        assert!(c.allocation.shares.iter().all(|&s| (s - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn ledger_mass_and_diagonal() {
        let mut l = InteractionLedger::new();
        l.record_event(3, &[1, 2]);
        l.record_event(3, &[1, 4]);
        l.record_event(1, &[1, 2]);
        assert_eq!(l.weight(1, 3), 2);
        assert_eq!(l.weight(1, 1), 0);
        assert_eq!(l.event_count(), 3);
        let g = l.to_graph(|id| id != 4);
        assert_eq!(g.labels(), &["1", "2", "3"]);
        assert_eq!(g.total_weight(), 4.0);
    }
}

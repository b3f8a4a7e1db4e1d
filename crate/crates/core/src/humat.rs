//! Need-based decision engine: alternative evaluation, cognitive dissonance,
//! dilemma-driven communication between agents, and institutional broadcasts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{HumatParams, Orientation};
use crate::population::{Agent, NeedProfile};
use crate::rng::StreamRng;
use crate::social::{LinkKind, SocialGraph};

/// Behavioral alternatives toward the containment measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Accept,
    Reject,
}

impl Alternative {
    pub fn ix(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Self {
        match self {
            Alternative::Accept => Alternative::Reject,
            Alternative::Reject => Alternative::Accept,
        }
    }
}

pub const ALTERNATIVES: [Alternative; 2] = [Alternative::Accept, Alternative::Reject];

/// Persuasion factor of institutional broadcasts at full trust.
pub const CRITICAL_NODE_PERSUASION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeEvaluation {
    /// Per-need evaluation E = satisfaction x importance.
    pub per_need: Vec<f64>,
    /// Mean of the per-need evaluations.
    pub overall: f64,
    pub sum_pos: f64,
    /// Signed sum of negative evaluations (<= 0).
    pub sum_neg: f64,
}

pub fn evaluate_alternative(profile: &NeedProfile, alt: Alternative) -> AlternativeEvaluation {
    let per_need: Vec<f64> = profile
        .needs
        .iter()
        .map(|n| n.satisfaction[alt.ix()] * n.importance)
        .collect();
    let mut sum_pos = 0.0;
    let mut sum_neg = 0.0;
    for &e in &per_need {
        if e > 0.0 {
            sum_pos += e;
        } else {
            sum_neg += e;
        }
    }
    let overall = per_need.iter().sum::<f64>() / per_need.len() as f64;
    AlternativeEvaluation {
        per_need,
        overall,
        sum_pos,
        sum_neg,
    }
}

pub fn evaluate_alternatives(profile: &NeedProfile) -> [AlternativeEvaluation; 2] {
    [
        evaluate_alternative(profile, Alternative::Accept),
        evaluate_alternative(profile, Alternative::Reject),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissonanceTerms {
    /// Smaller of the absolute positive/negative evaluation masses.
    pub d: f64,
    /// Larger of the two.
    pub c: f64,
    /// 2d/(d+c), or 0 when both masses vanish. Always in [0,1].
    pub dissonance: f64,
}

pub fn dissonance(eval: &AlternativeEvaluation) -> DissonanceTerms {
    let pos = eval.sum_pos.abs();
    let neg = eval.sum_neg.abs();
    let d = pos.min(neg);
    let c = pos.max(neg);
    let dissonance = if d + c == 0.0 { 0.0 } else { 2.0 * d / (d + c) };
    DissonanceTerms { d, c, dissonance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DilemmaKind {
    Belongingness,
    NonBelongingness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dilemma {
    pub need_ix: usize,
    pub kind: DilemmaKind,
}

/// Dilemma needs are those whose evaluation sign opposes every other need's
/// sign; they are only reported when the dissonance exceeds the tolerance.
pub fn dissonance_and_dilemmas(
    eval: &AlternativeEvaluation,
    belonging_ix: usize,
    tolerance: f64,
) -> (DissonanceTerms, Vec<Dilemma>) {
    let terms = dissonance(eval);
    let mut dilemmas = Vec::new();
    if terms.dissonance > tolerance {
        for (ix, &e) in eval.per_need.iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            let opposed_to_all = eval
                .per_need
                .iter()
                .enumerate()
                .filter(|&(other, _)| other != ix)
                .all(|(_, &o)| if e > 0.0 { o < 0.0 } else { o > 0.0 });
            if opposed_to_all {
                let kind = if ix == belonging_ix {
                    DilemmaKind::Belongingness
                } else {
                    DilemmaKind::NonBelongingness
                };
                dilemmas.push(Dilemma { need_ix: ix, kind });
            }
        }
    }
    (terms, dilemmas)
}

/// Both alternatives evaluated, with dissonance terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Deliberation {
    pub evals: [AlternativeEvaluation; 2],
    pub diss: [DissonanceTerms; 2],
}

pub fn deliberate(profile: &NeedProfile) -> Deliberation {
    let evals = evaluate_alternatives(profile);
    let diss = [dissonance(&evals[0]), dissonance(&evals[1])];
    Deliberation { evals, diss }
}

/// Four-step choice cascade: overall satisfaction, then dissonance, then the
/// hedonic evaluation, then a coin flip.
pub fn choose_alternative(
    del: &Deliberation,
    hedonic_ix: usize,
    params: &HumatParams,
    rng: &mut StreamRng,
) -> Alternative {
    let [acc, rej] = [&del.evals[0], &del.evals[1]];
    if (acc.overall - rej.overall).abs() >= params.overall_threshold {
        return if acc.overall > rej.overall {
            Alternative::Accept
        } else {
            Alternative::Reject
        };
    }
    let (da, dr) = (del.diss[0].dissonance, del.diss[1].dissonance);
    if (da - dr).abs() > params.dissonance_threshold {
        return if da < dr {
            Alternative::Accept
        } else {
            Alternative::Reject
        };
    }
    let (ha, hr) = (acc.per_need[hedonic_ix], rej.per_need[hedonic_ix]);
    if (ha - hr).abs() >= params.hedonic_threshold {
        return if ha > hr {
            Alternative::Accept
        } else {
            Alternative::Reject
        };
    }
    if rng.random_bool(0.5) {
        Alternative::Accept
    } else {
        Alternative::Reject
    }
}

/// Need similarity M: importance closeness, gated to zero when the two
/// agents' evaluations of the need disagree in sign.
pub fn similarity(imp_a: f64, imp_b: f64, eval_a: f64, eval_b: f64) -> f64 {
    let share_sign = (eval_a > 0.0 && eval_b > 0.0) || (eval_a < 0.0 && eval_b < 0.0);
    if share_sign {
        1.0 - (imp_a - imp_b).abs()
    } else {
        0.0
    }
}

/// Pulls the influenced agent's satisfactions for `alternative` toward the
/// influencer's, need by need, weighted by trust and similarity.
pub fn apply_communication(
    influenced: &mut NeedProfile,
    influencer: &NeedProfile,
    trust: f64,
    alpha: f64,
    alternative: Alternative,
) {
    let b = alternative.ix();
    for (need_e, need_o) in influenced.needs.iter_mut().zip(&influencer.needs) {
        let eval_e = need_e.satisfaction[b] * need_e.importance;
        let eval_o = need_o.satisfaction[b] * need_o.importance;
        let m = similarity(need_e.importance, need_o.importance, eval_e, eval_o);
        let p = alpha * trust * m;
        need_e.satisfaction[b] = (1.0 - p) * need_e.satisfaction[b] + p * need_o.satisfaction[b];
    }
}

/// Institutional update: both alternatives move toward the broadcast stance
/// (+1 for the promoted alternative, -1 for the other) with no similarity
/// gate, at persuasion trust x 0.2.
pub fn apply_broadcast(profile: &mut NeedProfile, trust: f64, promoted: Alternative) {
    let p = trust * CRITICAL_NODE_PERSUASION;
    for need in &mut profile.needs {
        let s_prom = &mut need.satisfaction[promoted.ix()];
        *s_prom = (1.0 - p) * *s_prom + p;
        let s_other = &mut need.satisfaction[promoted.other().ix()];
        *s_other = (1.0 - p) * *s_other - p;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommunicationAction {
    /// Ask someone's opinion; triggered by non-belongingness dilemmas.
    Inquiring,
    /// Broadcast one's own position; triggered by belongingness dilemmas.
    Signaling,
}

/// Weighted pick among the agent's living links: preference for same-behavior
/// contacts when inquiring and opposite-behavior when signaling (falling back
/// to every living link), weight = trust x (1+successes)/(1+attempts).
/// Returns the index into the agent's out-link list.
pub fn select_interlocutor(
    agent: usize,
    action: CommunicationAction,
    graph: &SocialGraph,
    choices: &[Alternative],
    alive: &[bool],
    rng: &mut StreamRng,
) -> Option<usize> {
    let links = graph.out(agent);
    let living: Vec<usize> = (0..links.len())
        .filter(|&ix| alive[links[ix].target])
        .collect();
    if living.is_empty() {
        return None;
    }
    let own = choices[agent];
    let matching: Vec<usize> = living
        .iter()
        .copied()
        .filter(|&ix| {
            let same = choices[links[ix].target] == own;
            match action {
                CommunicationAction::Inquiring => same,
                CommunicationAction::Signaling => !same,
            }
        })
        .collect();
    let pool = if matching.is_empty() {
        &living
    } else {
        &matching
    };

    let weight = |ix: usize| {
        let l = &links[ix];
        l.trust * (1.0 + f64::from(l.successes)) / (1.0 + f64::from(l.attempts))
    };
    let total: f64 = pool.iter().map(|&ix| weight(ix)).sum();
    if total <= 0.0 {
        return Some(pool[rng.random_range(0..pool.len())]);
    }
    let mut u = rng.random::<f64>() * total;
    for &ix in pool {
        u -= weight(ix);
        if u < 0.0 {
            return Some(ix);
        }
    }
    Some(*pool.last().expect("pool is non-empty"))
}

/// Mutable slices of world state the daily cycle operates on.
pub struct CycleWorld<'a> {
    pub agents: &'a mut [Agent],
    pub choices: &'a mut [Alternative],
    pub graph: &'a mut SocialGraph,
    pub alive: &'a [bool],
    pub params: &'a HumatParams,
    pub hedonic_ix: usize,
    pub belonging_ix: usize,
}

impl CycleWorld<'_> {
    fn rechoose(&mut self, agent: usize, rng: &mut StreamRng) -> bool {
        let del = deliberate(&self.agents[agent].needs);
        let new = choose_alternative(&del, self.hedonic_ix, self.params, rng);
        let flipped = new != self.choices[agent];
        self.choices[agent] = new;
        flipped
    }

    /// One communication: the influenced side's profile moves, it re-chooses,
    /// and its link toward the influencer records the attempt.
    fn communicate(
        &mut self,
        influenced: usize,
        influencer: usize,
        kind: LinkKind,
        alternative: Alternative,
        rng: &mut StreamRng,
    ) {
        let link_ix = self
            .graph
            .find_link(influenced, influencer, kind)
            .expect("link existence is symmetric per kind");
        let trust = self.graph.out(influenced)[link_ix].trust;
        let [inf, src] = self
            .agents
            .get_disjoint_mut([influenced, influencer])
            .expect("no self-links");
        apply_communication(
            &mut inf.needs,
            &src.needs,
            trust,
            self.params.alpha,
            alternative,
        );
        let flipped = self.rechoose(influenced, rng);
        self.graph.record_attempt(influenced, link_ix, flipped);
    }

    fn act(&mut self, agent: usize, action: CommunicationAction, rng: &mut StreamRng) -> bool {
        let Some(link_ix) =
            select_interlocutor(agent, action, self.graph, self.choices, self.alive, rng)
        else {
            return false;
        };
        let link = &self.graph.out(agent)[link_ix];
        let (target, kind) = (link.target, link.kind);
        let alternative = self.choices[agent];
        match action {
            CommunicationAction::Inquiring => {
                self.communicate(agent, target, kind, alternative, rng)
            }
            CommunicationAction::Signaling => {
                self.communicate(target, agent, kind, alternative, rng)
            }
        }
        true
    }
}

/// Full daily cycle for one agent: refresh the belongingness satisfactions
/// from the network, re-choose, act on at most one dilemma, and possibly hold
/// a spontaneous chat. Returns the number of communications performed.
pub fn agent_cycle(w: &mut CycleWorld, agent: usize, rng: &mut StreamRng) -> u32 {
    if !w.alive[agent] {
        return 0;
    }

    // Belongingness tracks the share of living contacts currently accepting.
    let mut contacts: Vec<usize> = w
        .graph
        .out(agent)
        .iter()
        .map(|l| l.target)
        .filter(|&t| w.alive[t])
        .collect();
    contacts.sort_unstable();
    contacts.dedup();
    if !contacts.is_empty() {
        let accepting = contacts
            .iter()
            .filter(|&&t| w.choices[t] == Alternative::Accept)
            .count();
        let f = accepting as f64 / contacts.len() as f64;
        let belonging = &mut w.agents[agent].needs.needs[w.belonging_ix];
        belonging.satisfaction[Alternative::Accept.ix()] = 2.0 * f - 1.0;
        belonging.satisfaction[Alternative::Reject.ix()] = 1.0 - 2.0 * f;
    }

    w.rechoose(agent, rng);
    let chosen = w.choices[agent];
    let del = deliberate(&w.agents[agent].needs);
    let (_, dilemmas) = dissonance_and_dilemmas(
        &del.evals[chosen.ix()],
        w.belonging_ix,
        w.params.dissonance_tolerance,
    );

    let mut communications = 0;
    if !dilemmas.is_empty() {
        let action = if dilemmas
            .iter()
            .any(|d| d.kind == DilemmaKind::Belongingness)
        {
            CommunicationAction::Signaling
        } else {
            CommunicationAction::Inquiring
        };
        if w.act(agent, action, rng) {
            communications += 1;
        }
    }
    if w.params.random_chat_probability > 0.0 && rng.random_bool(w.params.random_chat_probability) {
        if w.act(agent, CommunicationAction::Signaling, rng) {
            communications += 1;
        }
    }
    communications
}

// ---------------------------------------------------------------------------
// Critical nodes

/// An institutional node with its sampled audience and per-member trust.
#[derive(Debug, Clone)]
pub struct CriticalNode {
    pub id: String,
    pub members: Vec<usize>,
    /// Trust of each member in this node, parallel to `members`.
    pub trust: Vec<f64>,
}

impl CriticalNode {
    /// Uniform audience of `network_size` agents with uniform [0,1] trusts.
    pub fn sample(id: &str, network_size: u32, population: usize, rng: &mut StreamRng) -> Self {
        let size = (network_size as usize).min(population);
        if size < network_size as usize {
            log::warn!(
                "critical node {id}: network_size {network_size} clamped to population {population}"
            );
        }
        // Partial Fisher-Yates: the first `size` slots are a uniform sample.
        let mut ids: Vec<usize> = (0..population).collect();
        for i in 0..size {
            let j = rng.random_range(i..population);
            ids.swap(i, j);
        }
        ids.truncate(size);
        let trust = (0..size).map(|_| rng.random::<f64>()).collect();
        CriticalNode {
            id: id.to_string(),
            members: ids,
            trust,
        }
    }
}

/// A resolved broadcast plan (node references are indices into the node list).
#[derive(Debug, Clone)]
pub struct BroadcastPlan {
    pub node_ix: usize,
    pub orientation: Orientation,
    pub start_day: u32,
    pub end_day: u32,
    pub frequency_days: u32,
    pub reach: f64,
    pub secondary_node_ix: Option<usize>,
}

impl BroadcastPlan {
    pub fn due(&self, day: u32) -> bool {
        (self.start_day..=self.end_day).contains(&day)
            && (day - self.start_day) % self.frequency_days == 0
    }
}

/// Sends one due broadcast: a uniform sample of ceil(reach x network size)
/// living members of the carrying node's audience is pulled toward the plan's
/// orientation. Returns the influenced agent ids.
pub fn critical_broadcast(
    plan: &BroadcastPlan,
    nodes: &[CriticalNode],
    agents: &mut [Agent],
    alive: &[bool],
    rng: &mut StreamRng,
) -> Vec<usize> {
    // The broadcast rides on the secondary node's audience and trust when one
    // is configured.
    let carrier = &nodes[plan.secondary_node_ix.unwrap_or(plan.node_ix)];
    let target_count = (plan.reach * carrier.members.len() as f64).ceil() as usize;
    let mut living: Vec<usize> = (0..carrier.members.len())
        .filter(|&ix| alive[carrier.members[ix]])
        .collect();
    let k = target_count.min(living.len());
    for i in 0..k {
        let j = rng.random_range(i..living.len());
        living.swap(i, j);
    }
    living.truncate(k);

    let promoted = match plan.orientation {
        Orientation::ProMeasures => Alternative::Accept,
        Orientation::AntiMeasures => Alternative::Reject,
    };
    let mut influenced = Vec::with_capacity(k);
    for &member_ix in &living {
        let agent_ix = carrier.members[member_ix];
        apply_broadcast(
            &mut agents[agent_ix].needs,
            carrier.trust[member_ix],
            promoted,
        );
        influenced.push(agent_ix);
    }
    influenced
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::NeedState;
    use crate::rng::RngFactory;

    fn profile(entries: &[(f64, f64, f64)]) -> NeedProfile {
        NeedProfile {
            needs: entries
                .iter()
                .map(|&(importance, sat_accept, sat_reject)| NeedState {
                    importance,
                    satisfaction: [sat_accept, sat_reject],
                })
                .collect(),
        }
    }

    fn rng() -> StreamRng {
        RngFactory::new(123, 0).stream("humat-tests")
    }

    #[test]
    fn evaluation_is_satisfaction_times_importance() {
        let p = profile(&[(0.8, 0.5, -0.5)]);
        let e = evaluate_alternative(&p, Alternative::Accept);
        assert_eq!(e.per_need[0], 0.4);
        let p0 = profile(&[(0.3, 0.0, 0.0), (0.9, 0.0, 0.0)]);
        assert_eq!(evaluate_alternative(&p0, Alternative::Accept).overall, 0.0);
    }

    #[test]
    fn overall_is_mean_of_evaluations() {
        // E = {0.4, -0.2} with unit importances.
        let p = profile(&[(1.0, 0.4, 0.0), (1.0, -0.2, 0.0)]);
        let e = evaluate_alternative(&p, Alternative::Accept);
        assert_eq!(e.overall, 0.1);
        assert_eq!(e.sum_pos, 0.4);
        assert_eq!(e.sum_neg, -0.2);
    }

    #[test]
    fn dissonance_symmetric_case_is_one() {
        let p = profile(&[(1.0, 0.3, 0.0), (1.0, -0.3, 0.0)]);
        let e = evaluate_alternative(&p, Alternative::Accept);
        assert_eq!(dissonance(&e).dissonance, 1.0);
    }

    #[test]
    fn single_sign_evaluations_have_zero_dissonance() {
        let p = profile(&[(1.0, 0.3, 0.0), (0.5, 0.8, 0.0), (0.2, 0.1, 0.0)]);
        let e = evaluate_alternative(&p, Alternative::Accept);
        let (terms, dilemmas) = dissonance_and_dilemmas(&e, 0, 0.0);
        assert_eq!(terms.dissonance, 0.0);
        assert!(dilemmas.is_empty());
    }

    #[test]
    fn belongingness_dilemma_detected() {
        // E = {belonging +0.4, hedonic -0.2, security -0.1}: D = 6/7 > 0.5.
        let p = profile(&[(1.0, 0.4, 0.0), (1.0, -0.2, 0.0), (1.0, -0.1, 0.0)]);
        let e = evaluate_alternative(&p, Alternative::Accept);
        let (terms, dilemmas) = dissonance_and_dilemmas(&e, 0, 0.5);
        assert!((terms.dissonance - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(dilemmas.len(), 1);
        assert_eq!(dilemmas[0].need_ix, 0);
        assert_eq!(dilemmas[0].kind, DilemmaKind::Belongingness);
    }

    #[test]
    fn dilemmas_suppressed_below_tolerance() {
        let p = profile(&[(1.0, 0.4, 0.0), (1.0, -0.35, 0.0)]);
        let e = evaluate_alternative(&p, Alternative::Accept);
        let (terms, dilemmas) = dissonance_and_dilemmas(&e, 0, 0.99);
        assert!(terms.dissonance > 0.9);
        assert!(dilemmas.is_empty());
    }

    fn params() -> HumatParams {
        HumatParams::default()
    }

    #[test]
    fn choice_prefers_clear_overall_gap() {
        let del = Deliberation {
            evals: [
                evaluate_alternative(&profile(&[(1.0, 0.5, 0.1)]), Alternative::Accept),
                evaluate_alternative(&profile(&[(1.0, 0.5, 0.1)]), Alternative::Reject),
            ],
            diss: [dissonance_zero(), dissonance_zero()],
        };
        assert_eq!(
            choose_alternative(&del, 0, &params(), &mut rng()),
            Alternative::Accept
        );
    }

    fn dissonance_zero() -> DissonanceTerms {
        DissonanceTerms {
            d: 0.0,
            c: 0.0,
            dissonance: 0.0,
        }
    }

    fn deliberation_with(o: [f64; 2], d: [f64; 2], hedonic: [f64; 2]) -> Deliberation {
        let make = |overall: f64, h: f64| AlternativeEvaluation {
            per_need: vec![h],
            overall,
            sum_pos: overall.max(0.0),
            sum_neg: overall.min(0.0),
        };
        Deliberation {
            evals: [make(o[0], hedonic[0]), make(o[1], hedonic[1])],
            diss: [
                DissonanceTerms {
                    d: 0.0,
                    c: 0.0,
                    dissonance: d[0],
                },
                DissonanceTerms {
                    d: 0.0,
                    c: 0.0,
                    dissonance: d[1],
                },
            ],
        }
    }

    #[test]
    fn choice_falls_back_to_lower_dissonance() {
        let del = deliberation_with([0.15, 0.1], [0.9, 0.1], [0.0, 0.0]);
        assert_eq!(
            choose_alternative(&del, 0, &params(), &mut rng()),
            Alternative::Reject
        );
    }

    #[test]
    fn choice_falls_back_to_hedonic_gap() {
        let del = deliberation_with([0.1, 0.05], [0.2, 0.15], [0.5, 0.1]);
        assert_eq!(
            choose_alternative(&del, 0, &params(), &mut rng()),
            Alternative::Accept
        );
    }

    #[test]
    fn full_tie_is_uniform_across_seeds() {
        let del = deliberation_with([0.0, 0.0], [0.0, 0.0], [0.0, 0.0]);
        let mut accepts = 0;
        for seed in 0..2000 {
            let mut r = RngFactory::new(seed, 0).stream("tie");
            if choose_alternative(&del, 0, &params(), &mut r) == Alternative::Accept {
                accepts += 1;
            }
        }
        assert!((900..=1100).contains(&accepts), "{accepts}/2000 accepts");
    }

    #[test]
    fn choice_step_one_ignores_common_offset() {
        for offset in [-0.3, 0.0, 0.4] {
            let del = deliberation_with([0.5 + offset, 0.1 + offset], [0.0, 0.0], [0.0, 0.0]);
            assert_eq!(
                choose_alternative(&del, 0, &params(), &mut rng()),
                Alternative::Accept
            );
        }
    }

    #[test]
    fn similarity_gates_on_sign_mismatch() {
        assert!((similarity(0.9, 0.6, 0.5, 0.2) - 0.7).abs() < 1e-12);
        assert!((similarity(0.9, 0.6, -0.5, -0.2) - 0.7).abs() < 1e-12);
        assert_eq!(similarity(0.9, 0.9, 0.5, -0.2), 0.0);
        assert_eq!(similarity(0.9, 0.9, 0.0, 0.2), 0.0);
    }

    #[test]
    fn communication_moves_satisfaction_by_alpha() {
        // alpha=0.4, T=1, M=1 (equal importances, same sign): S 0 -> 0.4.
        let mut influenced = profile(&[(1.0, 1e-9, 0.0)]);
        let influencer = profile(&[(1.0, 1.0, 0.0)]);
        apply_communication(&mut influenced, &influencer, 1.0, 0.4, Alternative::Accept);
        let s = influenced.needs[0].satisfaction[0];
        assert!((s - 0.4).abs() < 1e-8, "satisfaction {s}");
    }

    #[test]
    fn zero_trust_means_no_influence() {
        let mut influenced = profile(&[(0.7, 0.3, -0.2)]);
        let before = influenced.clone();
        let influencer = profile(&[(0.7, 0.9, 0.8)]);
        apply_communication(&mut influenced, &influencer, 0.0, 0.4, Alternative::Accept);
        assert_eq!(influenced, before);
    }

    #[test]
    fn opposite_evaluations_mean_no_influence() {
        let mut influenced = profile(&[(0.7, 0.3, 0.0)]);
        let before = influenced.clone();
        let influencer = profile(&[(0.7, -0.9, 0.0)]);
        apply_communication(&mut influenced, &influencer, 1.0, 0.4, Alternative::Accept);
        assert_eq!(influenced, before);
    }

    #[test]
    fn satisfactions_stay_in_range_under_repeated_updates() {
        let mut influenced = profile(&[(1.0, -1.0, 1.0), (0.5, 0.9, -0.9)]);
        let influencer = profile(&[(1.0, 1.0, -1.0), (0.6, 1.0, -1.0)]);
        for _ in 0..100 {
            apply_communication(&mut influenced, &influencer, 1.0, 0.5, Alternative::Accept);
            apply_communication(&mut influenced, &influencer, 1.0, 0.5, Alternative::Reject);
            for n in &influenced.needs {
                for s in n.satisfaction {
                    assert!((-1.0..=1.0).contains(&s), "satisfaction {s} escaped");
                }
            }
        }
    }

    #[test]
    fn broadcast_full_trust_moves_one_fifth() {
        let mut p = profile(&[(1.0, 0.0, 0.0)]);
        apply_broadcast(&mut p, 1.0, Alternative::Accept);
        assert_eq!(p.needs[0].satisfaction[0], 0.2);
        assert_eq!(p.needs[0].satisfaction[1], -0.2);
    }

    #[test]
    fn broadcast_schedule_days() {
        let plan = BroadcastPlan {
            node_ix: 0,
            orientation: Orientation::ProMeasures,
            start_day: 0,
            end_day: 20,
            frequency_days: 5,
            reach: 1.0,
            secondary_node_ix: None,
        };
        let due: Vec<u32> = (0..=25).filter(|&d| plan.due(d)).collect();
        assert_eq!(due, vec![0, 5, 10, 15, 20]);
    }
}

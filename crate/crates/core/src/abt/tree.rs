use rand::Rng;
use rustc_hash::FxHashMap;

use super::{heuristic_value, ucb_select, SolverConfig, SolverError};
use crate::pomdp::{propagate, resample, BeliefError, DomainModel, ParticleBelief};

pub type NodeId = usize;

/// Visit count |H(b,a)| and return sum for one action at one node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ActionStats {
    visits: usize,
    return_sum: f64,
}

impl ActionStats {
    pub fn visits(&self) -> usize {
        self.visits
    }

    /// Q̂ for this action; 0 when unvisited.
    pub fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.return_sum / self.visits as f64
        }
    }

    fn record(&mut self, tail_return: f64) {
        self.visits += 1;
        self.return_sum += tail_return;
    }
}

#[derive(Debug, Clone)]
pub struct BeliefNode<K> {
    stats: Vec<ActionStats>,
    children: FxHashMap<(usize, K), NodeId>,
    /// Episodes that took an action at this node, in sampling order.
    episodes: Vec<usize>,
}

impl<K: Eq + std::hash::Hash> BeliefNode<K> {
    fn new(n_actions: usize) -> Self {
        Self {
            stats: vec![ActionStats::default(); n_actions],
            children: FxHashMap::default(),
            episodes: Vec::new(),
        }
    }

    pub fn child(&self, action: usize, key: &K) -> Option<NodeId>
    where
        K: Clone,
    {
        self.children.get(&(action, key.clone())).copied()
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children.values().copied()
    }
}

impl<K> BeliefNode<K> {
    pub fn stats(&self) -> &[ActionStats] {
        &self.stats
    }

    pub fn episode_ids(&self) -> &[usize] {
        &self.episodes
    }

    pub fn total_visits(&self) -> usize {
        self.stats.iter().map(|s| s.visits).sum()
    }
}

/// One `(s_i, a_i, o_i, r_i)` quadruple of an episode.
#[derive(Debug, Clone)]
pub struct EpisodeStep<S, O> {
    pub state: S,
    pub action: usize,
    pub observation: O,
    pub reward: f64,
}

/// A sampled trajectory through the tree plus its closing `(s_N, −, −, r_N)`.
#[derive(Debug, Clone)]
pub struct Episode<S, O> {
    pub steps: Vec<EpisodeStep<S, O>>,
    pub final_state: S,
    /// Exact terminal value, or the heuristic estimate at the horizon.
    pub final_value: f64,
    /// Node at which each step's action was taken.
    nodes: Vec<NodeId>,
}

impl<S, O> Episode<S, O> {
    /// `Σ_{i=from}^{N} γ^{i-from} r_i`, with `r_N` the final value.
    pub fn tail_return(&self, from: usize, gamma: f64) -> f64 {
        let mut total = 0.0;
        let mut weight = 1.0;
        for step in &self.steps[from..] {
            total += weight * step.reward;
            weight *= gamma;
        }
        total + weight * self.final_value
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// What happened to the tree when the root moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdvanceReport {
    /// The belief update found no compatible particle and the regeneration
    /// hook supplied a fresh belief.
    pub regenerated: bool,
    /// Root particles drawn from the regeneration hook, including the case
    /// of a full regeneration.
    pub replenished: usize,
    /// Episodes carried over under the new root.
    pub retained_episodes: usize,
}

/// Belief tree rooted at the current belief.
pub struct BeliefTree<M: DomainModel> {
    belief: ParticleBelief<M::State>,
    nodes: Vec<BeliefNode<M::ObservationKey>>,
    episodes: Vec<Episode<M::State, M::Observation>>,
    n_actions: usize,
}

pub(crate) const ROOT: NodeId = 0;

impl<M: DomainModel> BeliefTree<M> {
    /// Empty tree over `belief`.
    pub fn new(belief: ParticleBelief<M::State>, model: &M) -> Self {
        let n_actions = model.action_set().len();
        Self {
            belief,
            nodes: vec![BeliefNode::new(n_actions)],
            episodes: Vec::new(),
            n_actions,
        }
    }

    pub fn belief(&self) -> &ParticleBelief<M::State> {
        &self.belief
    }

    pub fn root(&self) -> &BeliefNode<M::ObservationKey> {
        &self.nodes[ROOT]
    }

    pub fn root_id(&self) -> NodeId {
        ROOT
    }

    pub fn node(&self, id: NodeId) -> &BeliefNode<M::ObservationKey> {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn episodes(&self) -> &[Episode<M::State, M::Observation>] {
        &self.episodes
    }

    /// Q̂(b, a): mean discounted tail return of the episodes through (b, a).
    pub fn q_estimate(&self, node: NodeId, action: usize) -> Result<f64, SolverError> {
        let stats = &self.nodes[node].stats[action];
        if stats.visits == 0 {
            return Err(SolverError::NoVisits(action));
        }
        Ok(stats.mean())
    }

    /// Greedy root action: argmax of Q̂ over visited actions, lowest index on
    /// ties.
    pub fn best_action(&self) -> Result<usize, SolverError> {
        let mut best: Option<(usize, f64)> = None;
        for (a, s) in self.nodes[ROOT].stats.iter().enumerate() {
            if s.visits == 0 {
                continue;
            }
            let q = s.mean();
            if best.is_none_or(|(_, b)| q > b) {
                best = Some((a, q));
            }
        }
        best.map(|(a, _)| a).ok_or(SolverError::NoEpisodes)
    }

    /// Samples `config.episodes` new episodes and returns the greedy action.
    pub fn plan<R: Rng + ?Sized>(
        &mut self,
        model: &M,
        config: &SolverConfig,
        rng: &mut R,
    ) -> Result<usize, SolverError> {
        self.plan_while(model, config, rng, |_| true)
    }

    /// Anytime variant of [`plan`](Self::plan): `keep_going(k)` is asked
    /// before episode `k` and search stops at the first `false`.
    pub fn plan_while<R, F>(
        &mut self,
        model: &M,
        config: &SolverConfig,
        rng: &mut R,
        mut keep_going: F,
    ) -> Result<usize, SolverError>
    where
        R: Rng + ?Sized,
        F: FnMut(usize) -> bool,
    {
        config.validate()?;
        for k in 0..config.episodes {
            if !keep_going(k) {
                break;
            }
            self.sample_episode(model, config, rng);
        }
        self.best_action()
    }

    fn child_or_insert(&mut self, node: NodeId, action: usize, key: M::ObservationKey) -> NodeId {
        let next_id = self.nodes.len();
        let id = *self.nodes[node].children.entry((action, key)).or_insert(next_id);
        if id == next_id {
            self.nodes.push(BeliefNode::new(self.n_actions));
        }
        id
    }

    /// Samples one episode from a root particle, inserts it into the tree and
    /// backs its returns up along the visited nodes. Returns the episode index.
    pub fn sample_episode<R: Rng + ?Sized>(&mut self, model: &M, config: &SolverConfig, rng: &mut R) -> usize {
        let start = self.belief.sample_index(rng);
        let mut state = self.belief.states()[start].clone();
        let mut node = ROOT;
        let mut steps = Vec::with_capacity(config.horizon);
        let mut nodes = Vec::with_capacity(config.horizon);
        let final_value = loop {
            if let Some(v) = model.terminal_value(&state) {
                break v;
            }
            if steps.len() == config.horizon {
                break heuristic_value(&state, model, config, rng);
            }
            let action = ucb_select(&self.nodes[node], config.ucb_c, rng);
            let next = model.sample_transition(&state, action, rng);
            let observation = model.sample_observation(&next, action, rng);
            let reward = model.reward(&state, action, &next);
            let child = self.child_or_insert(node, action, model.observation_key(&observation));
            steps.push(EpisodeStep {
                state,
                action,
                observation,
                reward,
            });
            nodes.push(node);
            node = child;
            state = next;
        };
        let episode = Episode {
            steps,
            final_state: state,
            final_value,
            nodes,
        };
        let id = self.episodes.len();
        self.backup(&episode, id, config.discount.value());
        self.episodes.push(episode);
        id
    }

    fn backup(&mut self, episode: &Episode<M::State, M::Observation>, id: usize, gamma: f64) {
        let mut tail = episode.final_value;
        for (step, &node) in episode.steps.iter().zip(&episode.nodes).rev() {
            tail = step.reward + gamma * tail;
            let n = &mut self.nodes[node];
            n.stats[step.action].record(tail);
            n.episodes.push(id);
        }
    }

    /// Moves the root to the branch matching the executed action and the
    /// received observation.
    ///
    /// The root belief is pushed through the particle filter. About as many
    /// particles as the effective sample size of the reweighted set are kept
    /// by resampling, and `regenerate` supplies the rest from the received
    /// observation, so the root always holds `n_par` particles. If no
    /// particle is compatible with the observation the whole belief comes
    /// from `regenerate`. Episodes passing through the matching child are
    /// truncated to start there and the statistics are recounted from them;
    /// everything else is dropped.
    pub fn advance<R, G>(
        &mut self,
        action: usize,
        observation: &M::Observation,
        model: &M,
        config: &SolverConfig,
        rng: &mut R,
        mut regenerate: G,
    ) -> Result<AdvanceReport, SolverError>
    where
        R: Rng + ?Sized,
        G: FnMut(&M::Observation, &mut R) -> ParticleBelief<M::State>,
    {
        config.validate()?;
        let n_par = config.particles;
        let (kept, regenerated) = match propagate(&self.belief, action, observation, model, rng) {
            Ok(weighted) => {
                let keep = (weighted.effective_sample_size().round() as usize).clamp(1, n_par);
                (resample(&weighted, keep, rng)?.into_states(), false)
            }
            Err(BeliefError::AllWeightsZero) => (Vec::new(), true),
            Err(e) => return Err(e.into()),
        };
        let replenished = n_par - kept.len();
        let mut states = kept;
        if replenished > 0 {
            let fresh = regenerate(observation, rng);
            states.extend(resample(&fresh, replenished, rng)?.into_states());
        }
        let belief = ParticleBelief::uniform(states)?;

        let key = model.observation_key(observation);
        let child = self.nodes[ROOT].child(action, &key);
        let old_episodes = std::mem::take(&mut self.episodes);
        self.belief = belief;
        self.nodes = vec![BeliefNode::new(self.n_actions)];

        let Some(child) = child else {
            return Ok(AdvanceReport {
                regenerated,
                replenished,
                retained_episodes: 0,
            });
        };
        let gamma = config.discount.value();
        for mut episode in old_episodes {
            // Retained: the episode continued past the root through `child`.
            if episode.nodes.len() < 2 || episode.nodes[1] != child {
                continue;
            }
            episode.steps.remove(0);
            let id = self.episodes.len();
            let mut node = ROOT;
            let mut nodes = Vec::with_capacity(episode.steps.len());
            for step in &episode.steps {
                nodes.push(node);
                let k = model.observation_key(&step.observation);
                node = self.child_or_insert(node, step.action, k);
            }
            episode.nodes = nodes;
            self.backup(&episode, id, gamma);
            self.episodes.push(episode);
        }
        Ok(AdvanceReport {
            regenerated,
            replenished,
            retained_episodes: self.episodes.len(),
        })
    }

    /// Replaces the root belief and drops the whole tree.
    pub fn reset(&mut self, belief: ParticleBelief<M::State>) {
        self.belief = belief;
        self.nodes = vec![BeliefNode::new(self.n_actions)];
        self.episodes.clear();
    }
}

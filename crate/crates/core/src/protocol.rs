//! d-level secret sharing by entanglement swapping.
//!
//! `n` parties share an `n`-particle cat state `(u_1, …, u_n)`; party `i`
//! holds cat particle `c_i` and a Bell pair `(s_i, s'_i)` with labels
//! `(v_i, v'_i)`. Party 1 (Alice) Bell-measures `(c_1, s'_1)`, which hands
//! the cat's black node to `s_1`. Each other party `i` then Bell-measures
//! `(s_i, c_i)`, moving its white node onto `s'_i`. The key is the label pair
//! of Alice's measured Bell state, `(u_1 - k_1, v'_1 + ℓ_1)`, and Alice
//! announces the labels of the final cat on `(s_1, s'_2, …, s'_n)`:
//!
//! ```text
//! (v_1 + k_1 + … + k_n, v'_2 + ℓ_2, …, v'_n + ℓ_n)
//! ```
//!
//! Every party recovers the second key dit alone; the first needs every
//! `k_i` for `i ≥ 2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catbell::{bell_state, cat_state, BellLabels, CatLabels};
use crate::error::{Error, Result};
use crate::qudit::{Dimension, Dit};
use crate::statevec::{amplitude_count, Basis, ParticleId, StateVector, PROBABILITY_FLOOR};
use crate::swapcalc::{sample_outcome, CatFragment, Register, SwapOutcome, SwapRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Label algebra with uniformly drawn outcomes.
    Symbolic,
    /// Dense oracle with Born-sampled outcomes.
    StateVector,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Symbolic => "symbolic",
            Engine::StateVector => "statevector",
        }
    }
}

/// Public initial labels of one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub dim: Dimension,
    pub n: usize,
    pub cat_labels: CatLabels,
    /// `(v_i, v'_i)` for parties `1..=n`, at index `i - 1`.
    pub bell_labels: Vec<BellLabels>,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(dim: Dimension, cat_labels: CatLabels, bell_labels: Vec<BellLabels>, seed: u64) -> Result<Self> {
        let n = cat_labels.len();
        if cat_labels.dim() != dim || bell_labels.iter().any(|b| b.dim() != dim) {
            return Err(Error::InvalidConfig("labels use a different dimension".into()));
        }
        if bell_labels.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{n} parties share the cat but {} Bell pairs were given",
                bell_labels.len()
            )));
        }
        Ok(Self { dim, n, cat_labels, bell_labels, seed })
    }

    /// All labels zero.
    pub fn zero(dim: Dimension, n: usize, seed: u64) -> Result<Self> {
        let cat = CatLabels::from_values(dim, std::iter::repeat_n(0, n))
            .map_err(|_| Error::InvalidConfig(format!("need at least 2 parties, got {n}")))?;
        Self::new(dim, cat, vec![BellLabels::new(dim, 0, 0); n], seed)
    }

    /// Uniformly random labels.
    pub fn random<R: Rng + ?Sized>(dim: Dimension, n: usize, seed: u64, rng: &mut R) -> Result<Self> {
        let d = dim.get() as i64;
        let cat = CatLabels::from_values(dim, (0..n).map(|_| rng.gen_range(0..d)))
            .map_err(|_| Error::InvalidConfig(format!("need at least 2 parties, got {n}")))?;
        let bells = (0..n).map(|_| BellLabels::new(dim, rng.gen_range(0..d), rng.gen_range(0..d))).collect();
        Self::new(dim, cat, bells, seed)
    }

    /// `u_i`, 1-based.
    pub fn u(&self, party: usize) -> Dit {
        self.cat_labels.get(party - 1)
    }

    /// `(v_i, v'_i)`, 1-based.
    pub fn bell(&self, party: usize) -> BellLabels {
        self.bell_labels[party - 1]
    }

    /// Cat particle `c_i` held by party `i`.
    pub fn cat_particle(&self, party: usize) -> ParticleId {
        ParticleId(party as u32 - 1)
    }

    /// Black node `s_i` of party `i`'s Bell pair.
    pub fn bell_black(&self, party: usize) -> ParticleId {
        ParticleId((self.n + 2 * (party - 1)) as u32)
    }

    /// White node `s'_i` of party `i`'s Bell pair.
    pub fn bell_white(&self, party: usize) -> ParticleId {
        ParticleId((self.n + 2 * (party - 1) + 1) as u32)
    }

    /// Amplitudes the dense engine needs: `d^{3n}`.
    pub fn oracle_size(&self) -> Option<u128> {
        self.dim.checked_pow(3 * self.n)
    }

    /// The pair measured by `party`, in measurement order.
    pub fn measured_pair(&self, party: usize) -> (ParticleId, ParticleId) {
        if party == 1 {
            (self.cat_particle(1), self.bell_white(1))
        } else {
            (self.bell_black(party), self.cat_particle(party))
        }
    }

    fn rule_for(party: usize) -> SwapRule {
        if party == 1 {
            SwapRule::BlackNode
        } else {
            SwapRule::WhiteNode
        }
    }

    fn initial_register(&self) -> Result<Register> {
        let cat_particles = (1..=self.n).map(|i| self.cat_particle(i)).collect();
        let mut fragments = vec![CatFragment::new(cat_particles, self.cat_labels.clone())?];
        for i in 1..=self.n {
            fragments.push(CatFragment::bell(self.bell_black(i), self.bell_white(i), self.bell(i))?);
        }
        Register::new(self.dim, fragments)
    }

    fn initial_state(&self) -> Result<StateVector> {
        amplitude_count(self.dim, 3 * self.n)?;
        let cat_particles: Vec<_> = (1..=self.n).map(|i| self.cat_particle(i)).collect();
        let mut state = cat_state(self.dim, &cat_particles, &self.cat_labels)?;
        for i in 1..=self.n {
            state = state.tensor(&bell_state(self.dim, (self.bell_black(i), self.bell_white(i)), self.bell(i))?)?;
        }
        Ok(state)
    }
}

/// Full record of one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub config: ProtocolConfig,
    pub engine: Engine,
    /// `(k_i, ℓ_i)` in measurement order; index `i - 1` is party `i`.
    pub outcomes: Vec<SwapOutcome>,
    /// Labels of the final cat on `(s_1, s'_2, …, s'_n)`.
    pub announced: CatLabels,
    /// Labels of Alice's measured Bell state on `(c_1, s'_1)`.
    pub key: BellLabels,
    /// Final Bell labels of each party; index 0 equals `key`.
    pub final_bells: Vec<BellLabels>,
}

impl Transcript {
    /// What party `i ≥ 2` knows after the announcement.
    pub fn view(&self, party: usize) -> Result<PartyView> {
        if party < 2 || party > self.config.n {
            return Err(Error::InvalidParty(party));
        }
        Ok(PartyView {
            party,
            dim: self.config.dim,
            cat_labels: self.config.cat_labels.clone(),
            bell_labels: self.config.bell_labels.clone(),
            own_outcome: self.outcomes[party - 1],
            final_bell: self.final_bells[party - 1],
            announced: self.announced.clone(),
        })
    }

    /// Checks the announcement and key against the outcomes with exact label
    /// arithmetic. Returns the first violated identity.
    pub fn consistency_error(&self) -> Option<String> {
        let c = &self.config;
        let sum_k = self.outcomes.iter().fold(c.dim.dit(0), |acc, o| acc + o.k);
        if self.announced.get(0) != c.bell(1).u1 + sum_k {
            return Some("announced[0] != v1 + sum k".into());
        }
        for i in 2..=c.n {
            if self.announced.get(i - 1) != c.bell(i).u2 + self.outcomes[i - 1].l {
                return Some(format!("announced[{}] != v'{i} + l{i}", i - 1));
            }
        }
        let (k1, l1) = (self.outcomes[0].k, self.outcomes[0].l);
        if self.key != (BellLabels { u1: c.u(1) - k1, u2: c.bell(1).u2 + l1 }) {
            return Some("key != (u1 - k1, v'1 + l1)".into());
        }
        for i in 2..=c.n {
            let o = self.outcomes[i - 1];
            let expected = BellLabels { u1: c.bell(i).u1 - o.k, u2: c.u(i) - l1 - o.l };
            if self.final_bells[i - 1] != expected {
                return Some(format!("party {i} final Bell mismatch"));
            }
        }
        None
    }

    /// Configuration for the next round reusing this round's final states:
    /// the announced cat and each party's final Bell pair.
    pub fn next_config(&self, seed: u64) -> Result<ProtocolConfig> {
        ProtocolConfig::new(self.config.dim, self.announced.clone(), self.final_bells.clone(), seed)
    }
}

/// The information one non-Alice party holds: public initial labels, its
/// own outcome and final Bell state, and the announcement. It carries no
/// other party's outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyView {
    pub party: usize,
    pub dim: Dimension,
    pub cat_labels: CatLabels,
    pub bell_labels: Vec<BellLabels>,
    pub own_outcome: SwapOutcome,
    pub final_bell: BellLabels,
    pub announced: CatLabels,
}

impl PartyView {
    /// `k_i = v_i - (first label of the final Bell state)`.
    pub fn k_share(&self) -> Dit {
        self.bell_labels[self.party - 1].u1 - self.final_bell.u1
    }
}

/// Recovers the second key dit `v'_1 + ℓ_1` from one party's view.
pub fn recover_second_dit(view: &PartyView) -> Dit {
    let i = view.party;
    let l_i = view.announced.get(i - 1) - view.bell_labels[i - 1].u2;
    let l_1 = view.cat_labels.get(i - 1) - l_i - view.final_bell.u2;
    view.bell_labels[0].u2 + l_1
}

/// Recovers the first key dit `u_1 - k_1` once every party `2..=n` shares `k_i`.
pub fn recover_first_dit_pooled(views: &[PartyView]) -> Result<Dit> {
    let first = views.first().ok_or(Error::InsufficientShares(2))?;
    let n = first.bell_labels.len();
    let mut sum = first.dim.dit(0);
    for party in 2..=n {
        let view = views.iter().find(|v| v.party == party).ok_or(Error::InsufficientShares(party))?;
        sum = sum + view.k_share();
    }
    let k1 = first.announced.get(0) - first.bell_labels[0].u1 - sum;
    Ok(first.cat_labels.get(0) - k1)
}

/// Posterior over the first key dit for a coalition of non-Alice parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Posterior {
    /// Unnormalized weight of each first-dit value `0..d`.
    Counts(Vec<u128>),
    /// The coalition holds every share; use [`recover_first_dit_pooled`].
    UsePooledRecovery,
}

impl Posterior {
    pub fn probabilities(&self) -> Option<Vec<f64>> {
        match self {
            Posterior::Counts(counts) => {
                let total: u128 = counts.iter().sum();
                Some(counts.iter().map(|&c| c as f64 / total as f64).collect())
            }
            Posterior::UsePooledRecovery => None,
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Posterior::Counts(c) if c.windows(2).all(|w| w[0] == w[1]))
    }
}

/// Marginalizes the first key dit over the unknown `k_j` of parties outside
/// `known`, given the announcement and the coalition's own views.
pub fn collusion_posterior(transcript: &Transcript, known: &[usize]) -> Result<Posterior> {
    let n = transcript.config.n;
    let dim = transcript.config.dim;
    let d = dim.as_usize();
    let mut views = Vec::with_capacity(known.len());
    for &party in known {
        if views.iter().any(|v: &PartyView| v.party == party) {
            continue;
        }
        views.push(transcript.view(party)?);
    }
    let unknown = (n - 1) - views.len();
    if unknown == 0 {
        return Ok(Posterior::UsePooledRecovery);
    }

    // k_1 = announced[0] - v_1 - Σ_known k_i - S, with S the sum of unknown shares.
    let known_sum = views.iter().fold(dim.dit(0), |acc, v| acc + v.k_share());
    let fixed = transcript.announced.get(0) - transcript.config.bell(1).u1 - known_sum;

    // Exact distribution of S: repeated cyclic convolution with uniform.
    let mut weights = vec![0u128; d];
    weights[0] = 1;
    for _ in 0..unknown {
        let total: u128 = weights.iter().sum();
        weights = (0..d).map(|_| total).collect();
    }

    // first dit = u_1 - k_1 = u_1 - fixed + S
    let offset = transcript.config.u(1) - fixed;
    let mut counts = vec![0u128; d];
    for (s, w) in weights.iter().enumerate() {
        counts[(offset + dim.dit(s as i64)).value() as usize] += w;
    }
    Ok(Posterior::Counts(counts))
}

/// Runs one round with outcomes drawn from a generator seeded by `config.seed`.
pub fn run_round(config: &ProtocolConfig, engine: Engine) -> Result<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run(config, engine, &mut OutcomeSource::Sampled(&mut rng))
}

/// Runs one round with caller-chosen `(k_i, ℓ_i)` for parties `1..=n`.
pub fn run_round_forced(config: &ProtocolConfig, engine: Engine, outcomes: &[SwapOutcome]) -> Result<Transcript> {
    if outcomes.len() != config.n {
        return Err(Error::LengthMismatch { expected: config.n, got: outcomes.len() });
    }
    run(config, engine, &mut OutcomeSource::Forced(outcomes))
}

enum OutcomeSource<'a> {
    Sampled(&'a mut ChaCha8Rng),
    Forced(&'a [SwapOutcome]),
}

fn run(config: &ProtocolConfig, engine: Engine, source: &mut OutcomeSource<'_>) -> Result<Transcript> {
    match engine {
        Engine::Symbolic => run_symbolic(config, source),
        Engine::StateVector => run_dense(config, source),
    }
}

fn run_symbolic(config: &ProtocolConfig, source: &mut OutcomeSource<'_>) -> Result<Transcript> {
    let mut register = config.initial_register()?;
    let mut outcomes = Vec::with_capacity(config.n);
    for party in 1..=config.n {
        let outcome = match source {
            OutcomeSource::Sampled(rng) => sample_outcome(config.dim, *rng),
            OutcomeSource::Forced(list) => list[party - 1],
        };
        let (p, q) = config.measured_pair(party);
        register = register.bell_measure_with_rule(ProtocolConfig::rule_for(party), p, q, outcome)?.register;
        outcomes.push(outcome);
    }
    let bell_of = |p: ParticleId| -> Result<BellLabels> {
        register
            .fragment_of(p)?
            .labels()
            .as_bell()
            .ok_or_else(|| Error::UnsupportedConfiguration(format!("{p} is not in a Bell pair")))
    };
    let final_bells = (1..=config.n).map(|i| bell_of(config.measured_pair(i).0)).collect::<Result<Vec<_>>>()?;
    let announced = register.fragment_of(config.bell_black(1))?.labels().clone();
    Ok(Transcript {
        config: config.clone(),
        engine: Engine::Symbolic,
        outcomes,
        announced,
        key: final_bells[0],
        final_bells,
    })
}

/// Translates the Bell labels observed by `party` into `(k, ℓ)`.
///
/// `white_label` is the current label of the cat white node the party
/// measures (`u_i - ℓ_1` after Alice's step).
fn decode_outcome(config: &ProtocolConfig, party: usize, observed: BellLabels, white_label: Dit) -> SwapOutcome {
    let own = config.bell(party);
    if party == 1 {
        // (u1 - k, v' + l)
        SwapOutcome { k: config.u(1) - observed.u1, l: observed.u2 - own.u2 }
    } else {
        // (v - k, w - l)
        SwapOutcome { k: own.u1 - observed.u1, l: white_label - observed.u2 }
    }
}

fn encode_outcome(config: &ProtocolConfig, party: usize, outcome: SwapOutcome, white_label: Dit) -> BellLabels {
    let own = config.bell(party);
    if party == 1 {
        BellLabels { u1: config.u(1) - outcome.k, u2: own.u2 + outcome.l }
    } else {
        BellLabels { u1: own.u1 - outcome.k, u2: white_label - outcome.l }
    }
}

fn run_dense(config: &ProtocolConfig, source: &mut OutcomeSource<'_>) -> Result<Transcript> {
    let mut state = config.initial_state()?;
    let mut outcomes: Vec<SwapOutcome> = Vec::with_capacity(config.n);
    let mut final_bells = Vec::with_capacity(config.n);
    for party in 1..=config.n {
        let (p, q) = config.measured_pair(party);
        let white_label = if party == 1 {
            config.u(1)
        } else {
            config.u(party) - outcomes[0].l
        };
        let observed = match source {
            OutcomeSource::Sampled(rng) => {
                let branch = state.measure_in_basis(&[p, q], Basis::Bell, *rng)?;
                state = branch.residual;
                BellLabels::new(config.dim, branch.outcome.labels[0] as i64, branch.outcome.labels[1] as i64)
            }
            OutcomeSource::Forced(list) => {
                let labels = encode_outcome(config, party, list[party - 1], white_label);
                let reference = bell_state(config.dim, (p, q), labels)?;
                let projection = state.project_onto(&reference)?;
                state = projection.post.ok_or_else(|| {
                    Error::UnsupportedConfiguration(format!(
                        "forced outcome for party {party} has probability {}",
                        projection.probability
                    ))
                })?;
                labels
            }
        };
        outcomes.push(decode_outcome(config, party, observed, white_label));
        final_bells.push(observed);
    }
    let announced = read_cat_labels(config, &state)?;
    Ok(Transcript {
        config: config.clone(),
        engine: Engine::StateVector,
        outcomes,
        announced,
        key: final_bells[0],
        final_bells,
    })
}

/// Reads the final cat's labels off the dense state, which must be a cat
/// basis eigenstate on `(s_1, s'_2, …, s'_n)`.
fn read_cat_labels(config: &ProtocolConfig, state: &StateVector) -> Result<CatLabels> {
    let mut subset = vec![config.bell_black(1)];
    subset.extend((2..=config.n).map(|i| config.bell_white(i)));
    let branches = state.measurement_branches(&subset, Basis::Cat)?;
    let (outcome, _, _) = branches
        .into_iter()
        .find(|(o, _, _)| o.probability > 1.0 - 1e-9)
        .ok_or_else(|| Error::UnsupportedConfiguration("final state is not a cat basis state".into()))?;
    CatLabels::from_values(config.dim, outcome.labels.iter().map(|&v| v as i64))
}

/// Enumerates every outcome branch of a round on the dense engine, recursing
/// over the oracle's own nonzero-probability Bell outcomes. Each transcript
/// is paired with its branch probability.
pub fn enumerate_branches(config: &ProtocolConfig) -> Result<Vec<(Transcript, f64)>> {
    let state = config.initial_state()?;
    let mut out = Vec::new();
    branch_rec(config, state, 1, Vec::new(), Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

fn branch_rec(
    config: &ProtocolConfig,
    state: StateVector,
    party: usize,
    outcomes: Vec<SwapOutcome>,
    final_bells: Vec<BellLabels>,
    probability: f64,
    out: &mut Vec<(Transcript, f64)>,
) -> Result<()> {
    if party > config.n {
        let announced = read_cat_labels(config, &state)?;
        out.push((
            Transcript {
                config: config.clone(),
                engine: Engine::StateVector,
                outcomes,
                announced,
                key: final_bells[0],
                final_bells,
            },
            probability,
        ));
        return Ok(());
    }
    let (p, q) = config.measured_pair(party);
    let white_label = if party == 1 { config.u(1) } else { config.u(party) - outcomes[0].l };
    for (outcome, _, post) in state.measurement_branches(&[p, q], Basis::Bell)? {
        let Some(residual) = post else { continue };
        if outcome.probability < PROBABILITY_FLOOR {
            continue;
        }
        let observed = BellLabels::new(config.dim, outcome.labels[0] as i64, outcome.labels[1] as i64);
        let mut outcomes = outcomes.clone();
        outcomes.push(decode_outcome(config, party, observed, white_label));
        let mut bells = final_bells.clone();
        bells.push(observed);
        branch_rec(config, residual, party + 1, outcomes, bells, probability * outcome.probability, out)?;
    }
    Ok(())
}

/// Brute-force check of the collusion posterior: over all oracle branches
/// that agree with `observed` on the announcement and on every coalition
/// member's outcome, counts how often each first key dit occurs.
pub fn collusion_branch_counts(observed: &Transcript, known: &[usize]) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; observed.config.dim.as_usize()];
    for (branch, _) in enumerate_branches(&observed.config)? {
        let consistent = branch.announced == observed.announced
            && known.iter().all(|&i| {
                branch.outcomes[i - 1] == observed.outcomes[i - 1]
                    && branch.final_bells[i - 1] == observed.final_bells[i - 1]
            });
        if consistent {
            counts[branch.key.u1.value() as usize] += 1;
        }
    }
    Ok(counts)
}

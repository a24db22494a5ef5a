//! Symbolic entanglement swapping over `Z_d` labels.
//!
//! A [`Register`] holds cat fragments over disjoint particles. A Bell
//! measurement on a pair `(p, q)` where `p` is the black node of one fragment
//! and `q` a white node of another rewrites labels without touching
//! amplitudes. Three configurations are supported:
//!
//! | rule        | fragment of `p` | fragment of `q` | branch phase |
//! |-------------|-----------------|-----------------|--------------|
//! | `BellBell`  | Bell `(u1,u2)`  | Bell `(v1,v2)`  | `ζ^{+kℓ}`    |
//! | `BlackNode` | cat `(u1..un)`  | Bell `(v,v')`   | `ζ^{-kℓ}`    |
//! | `WhiteNode` | Bell `(v,v')`   | cat `(u1..un)`  | `ζ^{+kℓ}`    |
//!
//! Every branch has amplitude `ζ^{±kℓ}/d`, so outcomes are uniform over
//! `Z_d²`. The phase signs are what the dense oracle confirms for `d ≥ 3`;
//! at `d = 2` the sign is immaterial.

use rand::Rng;

use crate::catbell::{cat_state, BellLabels, CatLabels};
use crate::error::{Error, Result};
use crate::qudit::{Dimension, Dit, PhasePower};
use crate::statevec::{ParticleId, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwapRule {
    /// Black node of one Bell pair with the white node of another.
    BellBell,
    /// Black node of a cat with the white node of a Bell pair.
    BlackNode,
    /// Black node of a Bell pair with a white node of a cat.
    WhiteNode,
}

impl SwapRule {
    pub const ALL: [SwapRule; 3] = [SwapRule::BellBell, SwapRule::BlackNode, SwapRule::WhiteNode];

    /// Sign `s` of the branch phase `ζ^{s·kℓ}`.
    pub fn phase_sign(self) -> i64 {
        match self {
            SwapRule::BellBell | SwapRule::WhiteNode => 1,
            SwapRule::BlackNode => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SwapRule::BellBell => "bell",
            SwapRule::BlackNode => "black",
            SwapRule::WhiteNode => "white",
        }
    }
}

/// Summation indices `(k, ℓ)` labelling a Bell-measurement branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwapOutcome {
    pub k: Dit,
    pub l: Dit,
}

impl SwapOutcome {
    pub fn new(dim: Dimension, k: i64, l: i64) -> Self {
        Self { k: dim.dit(k), l: dim.dit(l) }
    }

    /// All `d²` outcomes, `k` major.
    pub fn all(dim: Dimension) -> impl Iterator<Item = SwapOutcome> {
        dim.dits().flat_map(move |k| dim.dits().map(move |l| SwapOutcome { k, l }))
    }
}

/// Uniform draw over `Z_d²`.
pub fn sample_outcome<R: Rng + ?Sized>(dim: Dimension, rng: &mut R) -> SwapOutcome {
    let d = dim.get();
    SwapOutcome::new(dim, rng.gen_range(0..d) as i64, rng.gen_range(0..d) as i64)
}

/// A cat state on named particles; `particles[0]` is the black node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatFragment {
    particles: Vec<ParticleId>,
    labels: CatLabels,
}

impl CatFragment {
    pub fn new(particles: Vec<ParticleId>, labels: CatLabels) -> Result<Self> {
        if particles.len() != labels.len() {
            return Err(Error::LengthMismatch { expected: particles.len(), got: labels.len() });
        }
        for (i, p) in particles.iter().enumerate() {
            if particles[..i].contains(p) {
                return Err(Error::DuplicateParticle(*p));
            }
        }
        Ok(Self { particles, labels })
    }

    pub fn bell(p: ParticleId, q: ParticleId, labels: BellLabels) -> Result<Self> {
        Self::new(vec![p, q], labels.into())
    }

    pub fn particles(&self) -> &[ParticleId] {
        &self.particles
    }

    pub fn labels(&self) -> &CatLabels {
        &self.labels
    }

    pub fn black(&self) -> ParticleId {
        self.particles[0]
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_bell(&self) -> bool {
        self.len() == 2
    }

    pub fn slot_of(&self, particle: ParticleId) -> Option<usize> {
        self.particles.iter().position(|&p| p == particle)
    }

    pub fn to_statevector(&self) -> Result<StateVector> {
        cat_state(self.labels.dim(), &self.particles, &self.labels)
    }
}

/// Fragments produced by one application of a swap rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapProducts {
    /// Bell fragment on the measured pair `(p, q)`.
    pub measured: CatFragment,
    /// Everything else, entangled into one fragment.
    pub residual: CatFragment,
    /// Branch phase `ζ^{±kℓ}`.
    pub phase: PhasePower,
}

/// Decides which rule covers measuring `first.black()` with `second.particles()[slot]`.
pub fn classify(first: &CatFragment, second: &CatFragment, slot: usize) -> Result<SwapRule> {
    if slot == 0 || slot >= second.len() {
        return Err(Error::UnsupportedConfiguration(
            "second particle must be a white node of its fragment".into(),
        ));
    }
    match (first.len(), second.len()) {
        (2, 2) => Ok(SwapRule::BellBell),
        (_, 2) => Ok(SwapRule::BlackNode),
        (2, _) => Ok(SwapRule::WhiteNode),
        _ => Err(Error::UnsupportedConfiguration(
            "cat-cat swapping through two multi-particle fragments".into(),
        )),
    }
}

/// Applies `rule` to the pair `(first.black(), second.particles()[slot])`.
///
/// Besides the configurations [`classify`] picks, `BlackNode` and `WhiteNode`
/// also accept a two-particle cat, which yields the Bell–Bell identity under
/// the relabelling `(k, ℓ) → (-k, ±ℓ)`.
pub fn apply_rule(
    rule: SwapRule,
    first: &CatFragment,
    second: &CatFragment,
    slot: usize,
    outcome: SwapOutcome,
) -> Result<SwapProducts> {
    let unsupported = |why: &str| Err(Error::UnsupportedConfiguration(format!("{}: {why}", rule.name())));
    if slot == 0 || slot >= second.len() {
        return unsupported("second particle must be a white node");
    }
    let dim = first.labels.dim();
    let SwapOutcome { k, l } = outcome;
    let phase = dim.phase(rule.phase_sign() * k.value() as i64 * l.value() as i64);
    let p = first.black();
    let q = second.particles[slot];

    let (measured_labels, residual) = match rule {
        SwapRule::BellBell => {
            if !(first.is_bell() && second.is_bell()) {
                return unsupported("both fragments must be Bell pairs");
            }
            let (u1, u2) = (first.labels.get(0), first.labels.get(1));
            let (v1, v2) = (second.labels.get(0), second.labels.get(1));
            let residual = CatFragment::bell(
                second.black(),
                first.particles[1],
                BellLabels { u1: v1 - k, u2: u2 - l },
            )?;
            (BellLabels { u1: u1 + k, u2: v2 + l }, residual)
        }
        SwapRule::BlackNode => {
            if !second.is_bell() {
                return unsupported("the white node must belong to a Bell pair");
            }
            let (v, v_prime) = (second.labels.get(0), second.labels.get(1));
            let mut particles = vec![second.black()];
            particles.extend_from_slice(&first.particles[1..]);
            let labels = std::iter::once(v + k)
                .chain(first.labels.as_slice()[1..].iter().map(|&u| u - l))
                .collect();
            let residual = CatFragment::new(particles, CatLabels::new(labels)?)?;
            (BellLabels { u1: first.labels.black() - k, u2: v_prime + l }, residual)
        }
        SwapRule::WhiteNode => {
            if !first.is_bell() {
                return unsupported("the black node must belong to a Bell pair");
            }
            let (v, v_prime) = (first.labels.get(0), first.labels.get(1));
            let u_m = second.labels.get(slot);
            let mut particles = second.particles.clone();
            particles[slot] = first.particles[1];
            let mut labels = second.labels.clone();
            labels.set(0, second.labels.black() + k);
            labels.set(slot, v_prime + l);
            let residual = CatFragment::new(particles, labels)?;
            (BellLabels { u1: v - k, u2: u_m - l }, residual)
        }
    };
    Ok(SwapProducts {
        measured: CatFragment::bell(p, q, measured_labels)?,
        residual,
        phase,
    })
}

/// A set of cat fragments over disjoint particles, with the phase and
/// `1/√d` scale accumulated by measurements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    dim: Dimension,
    fragments: Vec<CatFragment>,
    global_phase: PhasePower,
    scale_exponent: u32,
}

/// One Bell measurement on a register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Swap {
    pub rule: SwapRule,
    pub outcome: SwapOutcome,
    pub register: Register,
}

impl Register {
    pub fn new(dim: Dimension, fragments: Vec<CatFragment>) -> Result<Self> {
        let mut seen: Vec<ParticleId> = Vec::new();
        for fragment in &fragments {
            if fragment.labels.dim() != dim {
                return Err(Error::Dimension(fragment.labels.dim().get()));
            }
            for &p in &fragment.particles {
                if seen.contains(&p) {
                    return Err(Error::DuplicateParticle(p));
                }
                seen.push(p);
            }
        }
        Ok(Self { dim, fragments, global_phase: PhasePower::one(dim), scale_exponent: 0 })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn fragments(&self) -> &[CatFragment] {
        &self.fragments
    }

    pub fn global_phase(&self) -> PhasePower {
        self.global_phase
    }

    /// Accumulated power of `1/√d`; each measurement contributes `1/d`.
    pub fn scale_exponent(&self) -> u32 {
        self.scale_exponent
    }

    pub fn particle_count(&self) -> usize {
        self.fragments.iter().map(CatFragment::len).sum()
    }

    /// Fragment index and slot holding `particle`.
    pub fn locate(&self, particle: ParticleId) -> Result<(usize, usize)> {
        self.fragments
            .iter()
            .enumerate()
            .find_map(|(i, f)| f.slot_of(particle).map(|slot| (i, slot)))
            .ok_or(Error::UnknownParticle(particle))
    }

    pub fn fragment_of(&self, particle: ParticleId) -> Result<&CatFragment> {
        self.locate(particle).map(|(i, _)| &self.fragments[i])
    }

    /// Bell-measures `(p, q)` with a caller-chosen outcome, picking the rule
    /// from the fragment shapes.
    pub fn bell_measure(&self, p: ParticleId, q: ParticleId, outcome: SwapOutcome) -> Result<Swap> {
        let (first, second, slot) = self.measured_fragments(p, q)?;
        let rule = classify(&self.fragments[first], &self.fragments[second], slot)?;
        self.swap(rule, first, second, slot, outcome)
    }

    /// Like [`Register::bell_measure`] with `(k, ℓ)` drawn uniformly.
    pub fn bell_measure_sampled<R: Rng + ?Sized>(&self, p: ParticleId, q: ParticleId, rng: &mut R) -> Result<Swap> {
        let (first, second, slot) = self.measured_fragments(p, q)?;
        let rule = classify(&self.fragments[first], &self.fragments[second], slot)?;
        self.swap(rule, first, second, slot, sample_outcome(self.dim, rng))
    }

    /// Bell-measures `(p, q)` under an explicitly named rule.
    pub fn bell_measure_with_rule(
        &self,
        rule: SwapRule,
        p: ParticleId,
        q: ParticleId,
        outcome: SwapOutcome,
    ) -> Result<Swap> {
        let (first, second, slot) = self.measured_fragments(p, q)?;
        self.swap(rule, first, second, slot, outcome)
    }

    /// Every `(p, q, rule)` that [`Register::bell_measure`] accepts.
    pub fn canonical_pairs(&self) -> Vec<(ParticleId, ParticleId, SwapRule)> {
        let mut pairs = Vec::new();
        for (i, a) in self.fragments.iter().enumerate() {
            for (j, b) in self.fragments.iter().enumerate() {
                if i == j {
                    continue;
                }
                for slot in 1..b.len() {
                    if let Ok(rule) = classify(a, b, slot) {
                        pairs.push((a.black(), b.particles[slot], rule));
                    }
                }
            }
        }
        pairs
    }

    /// Dense state: tensor product of all fragments times `ζ^{globalPhase}`.
    pub fn to_statevector(&self) -> Result<StateVector> {
        let (head, rest) = self.fragments.split_first().ok_or(Error::EmptyRegister)?;
        let mut state = head.to_statevector()?;
        for fragment in rest {
            state = state.tensor(&fragment.to_statevector()?)?;
        }
        Ok(state.scaled(self.global_phase.to_complex()))
    }

    fn measured_fragments(&self, p: ParticleId, q: ParticleId) -> Result<(usize, usize, usize)> {
        let (first, p_slot) = self.locate(p)?;
        let (second, q_slot) = self.locate(q)?;
        if first == second {
            return Err(Error::UnsupportedConfiguration(format!(
                "{p} and {q} belong to the same fragment"
            )));
        }
        if p_slot != 0 {
            return Err(Error::UnsupportedConfiguration(format!(
                "{p} is not the black node of its fragment"
            )));
        }
        Ok((first, second, q_slot))
    }

    fn swap(&self, rule: SwapRule, first: usize, second: usize, slot: usize, outcome: SwapOutcome) -> Result<Swap> {
        let products = apply_rule(rule, &self.fragments[first], &self.fragments[second], slot, outcome)?;
        let mut fragments: Vec<CatFragment> = self
            .fragments
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != first && i != second)
            .map(|(_, f)| f.clone())
            .collect();
        fragments.push(products.residual);
        fragments.push(products.measured);
        let register = Register {
            dim: self.dim,
            fragments,
            global_phase: self.global_phase * products.phase,
            scale_exponent: self.scale_exponent + 2,
        };
        Ok(Swap { rule, outcome, register })
    }
}

/// Label data for one swap identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SwapCase {
    BellBell { first: BellLabels, second: BellLabels },
    BlackNode { cat: CatLabels, bell: BellLabels },
    /// `slot` is the 0-based position of the measured white node (`1..n`).
    WhiteNode { cat: CatLabels, bell: BellLabels, slot: usize },
}

impl SwapCase {
    pub fn rule(&self) -> SwapRule {
        match self {
            SwapCase::BellBell { .. } => SwapRule::BellBell,
            SwapCase::BlackNode { .. } => SwapRule::BlackNode,
            SwapCase::WhiteNode { .. } => SwapRule::WhiteNode,
        }
    }

    pub fn dim(&self) -> Dimension {
        match self {
            SwapCase::BellBell { first, .. } => first.dim(),
            SwapCase::BlackNode { bell, .. } | SwapCase::WhiteNode { bell, .. } => bell.dim(),
        }
    }

    /// The two input fragments, the measured slot in the second one, and the
    /// measured pair. The first fragment is the one whose black node is measured.
    pub fn fragments(&self) -> Result<(CatFragment, CatFragment, usize)> {
        let ids = |start: u32, n: usize| (start..start + n as u32).map(ParticleId).collect::<Vec<_>>();
        match self {
            SwapCase::BellBell { first, second } => Ok((
                CatFragment::new(ids(1, 2), (*first).into())?,
                CatFragment::new(ids(3, 2), (*second).into())?,
                1,
            )),
            SwapCase::BlackNode { cat, bell } => {
                let n = cat.len();
                Ok((
                    CatFragment::new(ids(1, n), cat.clone())?,
                    CatFragment::new(ids(n as u32 + 1, 2), (*bell).into())?,
                    1,
                ))
            }
            SwapCase::WhiteNode { cat, bell, slot } => {
                let n = cat.len();
                Ok((
                    CatFragment::new(ids(n as u32 + 1, 2), (*bell).into())?,
                    CatFragment::new(ids(1, n), cat.clone())?,
                    *slot,
                ))
            }
        }
    }
}

/// Builds both sides of a swap identity densely and returns the largest
/// amplitude difference.
///
/// The left side is the product of the two input fragments. The right side is
/// the explicit sum over all `(k, ℓ)` of `(phase/d)·residual⊗measured` as
/// produced by [`apply_rule`].
pub fn verify_swap_identity(case: &SwapCase) -> Result<f64> {
    let (first, second, slot) = case.fragments()?;
    let dim = case.dim();
    let lhs = first.to_statevector()?.tensor(&second.to_statevector()?)?;
    let mut rhs = StateVector::zeros(dim, lhs.particles().to_vec())?;
    let inv_d = 1.0 / dim.get() as f64;
    for outcome in SwapOutcome::all(dim) {
        let products = apply_rule(case.rule(), &first, &second, slot, outcome)?;
        let term = products.residual.to_statevector()?.tensor(&products.measured.to_statevector()?)?;
        rhs.add_scaled(products.phase.to_complex() * inv_d, &term)?;
    }
    lhs.max_deviation(&rhs)
}

/// Oracle Born probabilities of every `(k, ℓ)` branch of a swap case:
/// projects the dense product state onto the Bell state the rule assigns to
/// the measured pair.
pub fn oracle_outcome_probabilities(case: &SwapCase) -> Result<Vec<(SwapOutcome, f64)>> {
    let (first, second, slot) = case.fragments()?;
    let lhs = first.to_statevector()?.tensor(&second.to_statevector()?)?;
    SwapOutcome::all(case.dim())
        .map(|outcome| {
            let products = apply_rule(case.rule(), &first, &second, slot, outcome)?;
            let reference = products.measured.to_statevector()?;
            Ok((outcome, lhs.project_onto(&reference)?.probability))
        })
        .collect()
}

/// Exponent `t` such that `state ≈ ζ^t · reference`, if one exists.
pub fn phase_exponent(reference: &StateVector, state: &StateVector, tol: f64) -> Result<Option<u32>> {
    let overlap = reference.inner(state)?;
    let dim = reference.dim();
    Ok(dim
        .dits()
        .map(|t| t.value())
        .find(|&t| (dim.phase(t as i64).to_complex() - overlap).norm() < tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catbell::bell_state;
    use crate::statevec::Basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn pid(i: u32) -> ParticleId {
        ParticleId(i)
    }

    fn cat(d: Dimension, particles: &[u32], labels: &[i64]) -> CatFragment {
        CatFragment::new(
            particles.iter().map(|&i| pid(i)).collect(),
            CatLabels::from_values(d, labels.iter().copied()).unwrap(),
        )
        .unwrap()
    }

    fn fragment_on<'a>(reg: &'a Register, particles: &[u32]) -> &'a CatFragment {
        let ps: Vec<_> = particles.iter().map(|&i| pid(i)).collect();
        reg.fragments().iter().find(|f| f.particles() == ps.as_slice()).expect("fragment present")
    }

    /// Oracle post-measurement state (measured Bell ⊗ residual) for a forced swap.
    fn oracle_after(reg: &Register, p: ParticleId, q: ParticleId, measured: &CatFragment) -> (f64, StateVector) {
        let dense = reg.to_statevector().unwrap();
        let reference = bell_state(reg.dim(), (p, q), measured.labels().as_bell().unwrap()).unwrap();
        let proj = dense.project_onto(&reference).unwrap();
        (proj.probability, reference.tensor(&proj.post.unwrap()).unwrap())
    }

    #[test]
    fn bell_bell_example_d2() {
        let d = dim(2);
        let reg = Register::new(d, vec![cat(d, &[1, 2], &[0, 0]), cat(d, &[3, 4], &[0, 0])]).unwrap();
        let swap = reg.bell_measure(pid(1), pid(4), SwapOutcome::new(d, 1, 1)).unwrap();
        assert_eq!(swap.rule, SwapRule::BellBell);
        assert_eq!(fragment_on(&swap.register, &[1, 4]).labels().values(), vec![1, 1]);
        assert_eq!(fragment_on(&swap.register, &[3, 2]).labels().values(), vec![1, 1]);
        assert_eq!(swap.register.global_phase().to_complex().re, -1.0);
        assert_eq!(swap.register.scale_exponent(), 2);

        let measured = fragment_on(&swap.register, &[1, 4]).clone();
        let (prob, oracle) = oracle_after(&reg, pid(1), pid(4), &measured);
        assert!((prob - 0.25).abs() < 1e-12);
        assert!(swap.register.to_statevector().unwrap().max_deviation(&oracle).unwrap() < 1e-12);
    }

    #[test]
    fn black_node_example_d2() {
        let d = dim(2);
        // cat on (1,2,3); Bell on (s, s') = (10, 11).
        let reg = Register::new(d, vec![cat(d, &[1, 2, 3], &[0, 0, 0]), cat(d, &[10, 11], &[0, 0])]).unwrap();
        let swap = reg.bell_measure(pid(1), pid(11), SwapOutcome::new(d, 1, 0)).unwrap();
        assert_eq!(swap.rule, SwapRule::BlackNode);
        assert_eq!(fragment_on(&swap.register, &[10, 2, 3]).labels().values(), vec![1, 0, 0]);
        assert_eq!(fragment_on(&swap.register, &[1, 11]).labels().values(), vec![1, 0]);

        let measured = fragment_on(&swap.register, &[1, 11]).clone();
        let (prob, oracle) = oracle_after(&reg, pid(1), pid(11), &measured);
        assert!((prob - 0.25).abs() < 1e-12);
        assert!(swap.register.to_statevector().unwrap().max_deviation(&oracle).unwrap() < 1e-12);
    }

    #[test]
    fn white_node_example_d3() {
        let d = dim(3);
        let reg = Register::new(d, vec![cat(d, &[1, 2, 3], &[1, 2, 0]), cat(d, &[10, 11], &[2, 1])]).unwrap();
        let swap = reg.bell_measure(pid(10), pid(3), SwapOutcome::new(d, 0, 0)).unwrap();
        assert_eq!(swap.rule, SwapRule::WhiteNode);
        assert_eq!(fragment_on(&swap.register, &[1, 2, 11]).labels().values(), vec![1, 2, 1]);
        assert_eq!(fragment_on(&swap.register, &[10, 3]).labels().values(), vec![2, 0]);
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        let d = dim(3);
        let reg = Register::new(
            d,
            vec![cat(d, &[1, 2, 3], &[0, 0, 0]), cat(d, &[4, 5, 6], &[0, 0, 0]), cat(d, &[7, 8], &[0, 0])],
        )
        .unwrap();
        let o = SwapOutcome::new(d, 0, 0);
        // Two white nodes of distinct cats.
        assert!(matches!(reg.bell_measure(pid(2), pid(5), o), Err(Error::UnsupportedConfiguration(_))));
        // Cat black node with a cat white node.
        assert!(matches!(reg.bell_measure(pid(1), pid(5), o), Err(Error::UnsupportedConfiguration(_))));
        // Two black nodes.
        assert!(matches!(reg.bell_measure(pid(7), pid(1), o), Err(Error::UnsupportedConfiguration(_))));
        // Same fragment.
        assert!(matches!(reg.bell_measure(pid(1), pid(2), o), Err(Error::UnsupportedConfiguration(_))));
        // Bell white node as p.
        assert!(matches!(reg.bell_measure(pid(8), pid(2), o), Err(Error::UnsupportedConfiguration(_))));
        assert_eq!(reg.bell_measure(pid(99), pid(2), o).unwrap_err(), Error::UnknownParticle(pid(99)));
        // Explicit rule that does not fit the shapes.
        assert!(matches!(
            reg.bell_measure_with_rule(SwapRule::BellBell, pid(7), pid(2), o),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn register_rejects_overlap() {
        let d = dim(2);
        let err = Register::new(d, vec![cat(d, &[1, 2], &[0, 0]), cat(d, &[2, 3], &[0, 0])]).unwrap_err();
        assert_eq!(err, Error::DuplicateParticle(pid(2)));
        assert_eq!(Register::new(d, vec![]).unwrap().to_statevector().unwrap_err(), Error::EmptyRegister);
    }

    #[test]
    fn to_statevector_examples() {
        let d = dim(2);
        let single = Register::new(d, vec![cat(d, &[0, 1], &[0, 0])]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let amps = single.to_statevector().unwrap();
        assert!((amps.amplitudes()[0].re - r).abs() < 1e-12 && (amps.amplitudes()[3].re - r).abs() < 1e-12);
        let pair = Register::new(d, vec![cat(d, &[0, 1], &[0, 0]), cat(d, &[2, 3], &[1, 1])]).unwrap();
        let dense = pair.to_statevector().unwrap();
        assert_eq!(dense.amplitudes().len(), 16);
        assert!((dense.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verify_examples() {
        let d2 = dim(2);
        let case = SwapCase::BellBell { first: BellLabels::new(d2, 0, 0), second: BellLabels::new(d2, 0, 0) };
        assert!(verify_swap_identity(&case).unwrap() < 1e-12);

        let d3 = dim(3);
        let case = SwapCase::BlackNode {
            cat: CatLabels::from_values(d3, [1, 2, 0]).unwrap(),
            bell: BellLabels::new(d3, 2, 1),
        };
        assert!(verify_swap_identity(&case).unwrap() < 1e-12);

        let d5 = dim(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let case = SwapCase::WhiteNode {
            cat: CatLabels::from_values(d5, (0..4).map(|_| rng.gen_range(0..5))).unwrap(),
            bell: BellLabels::new(d5, rng.gen_range(0..5), rng.gen_range(0..5)),
            slot: 2,
        };
        assert!(verify_swap_identity(&case).unwrap() < 1e-12);
    }

    /// With the opposite phase sign the Bell–Bell and white-node identities
    /// fail once `d ≥ 3`, while the black-node identity needs it.
    #[test]
    fn phase_sign_matters_for_d3() {
        let d = dim(3);
        let first = CatFragment::bell(pid(1), pid(2), BellLabels::new(d, 1, 2));
        let second = CatFragment::bell(pid(3), pid(4), BellLabels::new(d, 2, 0));
        let (first, second) = (first.unwrap(), second.unwrap());
        let lhs = first.to_statevector().unwrap().tensor(&second.to_statevector().unwrap()).unwrap();
        let mut flipped = StateVector::zeros(d, lhs.particles().to_vec()).unwrap();
        for outcome in SwapOutcome::all(d) {
            let products = apply_rule(SwapRule::BellBell, &first, &second, 1, outcome).unwrap();
            let term = products.residual.to_statevector().unwrap().tensor(&products.measured.to_statevector().unwrap()).unwrap();
            flipped.add_scaled(products.phase.inverse().to_complex() / 3.0, &term).unwrap();
        }
        assert!(lhs.max_deviation(&flipped).unwrap() > 0.1);
    }

    #[test]
    fn two_particle_cat_rules_agree_with_bell_bell() {
        // Black-node and white-node rules applied to a 2-cat describe the same
        // state as the Bell–Bell rule.
        let d = dim(3);
        let a = cat(d, &[1, 2], &[1, 2]);
        let b = cat(d, &[3, 4], &[2, 1]);
        for rule in SwapRule::ALL {
            let lhs = a.to_statevector().unwrap().tensor(&b.to_statevector().unwrap()).unwrap();
            let mut rhs = StateVector::zeros(d, lhs.particles().to_vec()).unwrap();
            for outcome in SwapOutcome::all(d) {
                let products = apply_rule(rule, &a, &b, 1, outcome).unwrap();
                let term = products.residual.to_statevector().unwrap().tensor(&products.measured.to_statevector().unwrap()).unwrap();
                rhs.add_scaled(products.phase.to_complex() / 3.0, &term).unwrap();
            }
            assert!(lhs.max_deviation(&rhs).unwrap() < 1e-12, "{rule:?}");
        }
    }

    #[test]
    fn sampling_examples() {
        let d2 = dim(2);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            let o = sample_outcome(d2, &mut rng);
            counts[(o.k.value() * 2 + o.l.value()) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01, "{counts:?}");
        }

        let d3 = dim(3);
        let mut seen = [false; 9];
        for _ in 0..10_000 {
            let o = sample_outcome(d3, &mut rng);
            seen[(o.k.value() * 3 + o.l.value()) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));

        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| sample_outcome(d3, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn label_conservation() {
        let d = dim(4);
        let bb = (cat(d, &[1, 2], &[3, 1]), cat(d, &[3, 4], &[2, 2]));
        let cb = (cat(d, &[1, 2, 3], &[1, 3, 2]), cat(d, &[5, 6], &[3, 0]));
        for outcome in SwapOutcome::all(d) {
            let p = apply_rule(SwapRule::BellBell, &bb.0, &bb.1, 1, outcome).unwrap();
            let (m, r) = (p.measured.labels(), p.residual.labels());
            assert_eq!(m.get(0) + r.get(0), d.dit(3 + 2));
            assert_eq!(m.get(1) + r.get(1), d.dit(1 + 2));

            let p = apply_rule(SwapRule::BlackNode, &cb.0, &cb.1, 1, outcome).unwrap();
            assert_eq!(p.residual.labels().get(0) + p.measured.labels().get(0), d.dit(3 + 1));
        }
    }

    #[test]
    fn canonical_pairs_cover_rules() {
        let d = dim(2);
        let reg = Register::new(
            d,
            vec![cat(d, &[1, 2, 3], &[0, 0, 0]), cat(d, &[4, 5], &[0, 0]), cat(d, &[6, 7], &[0, 0])],
        )
        .unwrap();
        let pairs = reg.canonical_pairs();
        assert!(pairs.contains(&(pid(1), pid(5), SwapRule::BlackNode)));
        assert!(pairs.contains(&(pid(4), pid(3), SwapRule::WhiteNode)));
        assert!(pairs.contains(&(pid(4), pid(7), SwapRule::BellBell)));
        assert_eq!(pairs.len(), 2 + 2 + 2 + 2);
    }

    #[test]
    fn oracle_probabilities_are_uniform() {
        let d = dim(3);
        let case = SwapCase::WhiteNode {
            cat: CatLabels::from_values(d, [2, 0, 1]).unwrap(),
            bell: BellLabels::new(d, 1, 1),
            slot: 1,
        };
        let probs = oracle_outcome_probabilities(&case).unwrap();
        assert_eq!(probs.len(), 9);
        assert!(probs.iter().all(|(_, p)| (p - 1.0 / 9.0).abs() < 1e-12));
    }

    #[test]
    fn sampled_swap_matches_born_measurement_support() {
        // The oracle's Born-sampled Bell outcome always corresponds to some
        // symbolic (k, ℓ) branch.
        let d = dim(3);
        let reg = Register::new(d, vec![cat(d, &[1, 2, 3], &[1, 0, 2]), cat(d, &[4, 5], &[0, 1])]).unwrap();
        let dense = reg.to_statevector().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let branch = dense.measure_in_basis(&[pid(1), pid(5)], Basis::Bell, &mut rng).unwrap();
            let hit = SwapOutcome::all(d).any(|o| {
                let swap = reg.bell_measure(pid(1), pid(5), o).unwrap();
                fragment_on(&swap.register, &[1, 5]).labels().values() == branch.outcome.labels
            });
            assert!(hit);
        }
    }

    #[test]
    fn phase_exponent_reads_back() {
        let d = dim(3);
        let base = cat(d, &[0, 1], &[1, 1]).to_statevector().unwrap();
        let rotated = base.scaled(d.phase(2).to_complex());
        assert_eq!(phase_exponent(&base, &rotated, 1e-9).unwrap(), Some(2));
    }
}

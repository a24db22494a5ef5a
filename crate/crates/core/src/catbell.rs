//! Generalized Bell and cat states.
//!
//! A cat state on particles `(p_1, …, p_n)` with labels `(u_1, …, u_n)` is
//!
//! ```text
//! Ψ(u_1, …, u_n) = (1/√d) Σ_j ζ^{j·u_1} |j, j+u_2, …, j+u_n⟩
//! ```
//!
//! The first particle is the *black node* and carries the phase label; the
//! others are *white nodes* carrying offsets. A Bell state is the `n = 2` case.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qudit::{unpack_index, zeta, Coefficient, Dimension, Dit};
use crate::statevec::{amplitude_count, Basis, ParticleId, StateVector};

/// Label pair `(u1, u2)` of a generalized Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabels {
    pub u1: Dit,
    pub u2: Dit,
}

impl BellLabels {
    /// Builds labels, reducing both values mod `d`.
    pub fn new(dim: Dimension, u1: i64, u2: i64) -> Self {
        Self { u1: dim.dit(u1), u2: dim.dit(u2) }
    }

    pub fn dim(&self) -> Dimension {
        self.u1.dim()
    }

    pub fn values(&self) -> [u32; 2] {
        [self.u1.value(), self.u2.value()]
    }
}

impl From<BellLabels> for CatLabels {
    fn from(b: BellLabels) -> Self {
        CatLabels { labels: vec![b.u1, b.u2] }
    }
}

/// Label tuple `(u1, …, un)` of a cat state; position 0 is the black node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CatLabels {
    labels: Vec<Dit>,
}

impl CatLabels {
    pub fn new(labels: Vec<Dit>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::TooFewParticles(labels.len()));
        }
        let dim = labels[0].dim();
        if let Some(bad) = labels.iter().find(|l| l.dim() != dim) {
            return Err(Error::Dimension(bad.dim().get()));
        }
        Ok(Self { labels })
    }

    /// Builds labels from integers, reducing each mod `d`.
    pub fn from_values(dim: Dimension, values: impl IntoIterator<Item = i64>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| dim.dit(v)).collect())
    }

    pub fn dim(&self) -> Dimension {
        self.labels[0].dim()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn black(&self) -> Dit {
        self.labels[0]
    }

    pub fn get(&self, i: usize) -> Dit {
        self.labels[i]
    }

    pub fn set(&mut self, i: usize, value: Dit) {
        assert_eq!(value.dim(), self.dim());
        self.labels[i] = value;
    }

    pub fn as_slice(&self) -> &[Dit] {
        &self.labels
    }

    pub fn values(&self) -> Vec<u32> {
        self.labels.iter().map(|l| l.value()).collect()
    }

    /// Converts a two-label tuple back into [`BellLabels`].
    pub fn as_bell(&self) -> Option<BellLabels> {
        (self.labels.len() == 2).then(|| BellLabels { u1: self.labels[0], u2: self.labels[1] })
    }

    /// Every label tuple of length `n`, in lexicographic order.
    pub fn all(dim: Dimension, n: usize) -> Result<impl Iterator<Item = CatLabels>> {
        if n < 2 {
            return Err(Error::TooFewParticles(n));
        }
        let count = amplitude_count(dim, n)?;
        Ok((0..count).map(move |i| {
            CatLabels::from_values(dim, unpack_index(dim, n, i).into_iter().map(i64::from))
                .expect("n >= 2")
        }))
    }
}

/// `(1/√d) Σ_j ζ^{j·u1} |j, j+u2⟩` on `(p, q)`.
pub fn bell_state(dim: Dimension, (p, q): (ParticleId, ParticleId), labels: BellLabels) -> Result<StateVector> {
    cat_state(dim, &[p, q], &labels.into())
}

/// `(1/√d) Σ_j ζ^{j·u1} |j, j+u2, …, j+un⟩` on `particles`.
pub fn cat_state(dim: Dimension, particles: &[ParticleId], labels: &CatLabels) -> Result<StateVector> {
    if particles.len() < 2 {
        return Err(Error::TooFewParticles(particles.len()));
    }
    if particles.len() != labels.len() {
        return Err(Error::LengthMismatch { expected: particles.len(), got: labels.len() });
    }
    if labels.dim() != dim {
        return Err(Error::Dimension(labels.dim().get()));
    }
    let d = dim.as_usize();
    let mut amps = vec![Complex64::new(0.0, 0.0); amplitude_count(dim, particles.len())?];
    let scale = 1.0 / (d as f64).sqrt();
    for j in 0..dim.get() {
        let index = labels.as_slice()[1..]
            .iter()
            .fold(j as usize, |acc, label| acc * d + dim.reduce(j as i64 + label.value() as i64) as usize);
        amps[index] = zeta(dim, j as i64 * labels.black().value() as i64) * scale;
    }
    StateVector::from_amplitudes(dim, particles.to_vec(), amps)
}

/// Prepares a cat state with the Hadamard + controlled-shift circuit: `H` on
/// the first qudit of `|u1, …, un⟩`, then a controlled shift from the first
/// qudit onto each of the others.
pub fn cat_via_circuit(dim: Dimension, particles: &[ParticleId], digits: &[u32]) -> Result<StateVector> {
    if particles.len() < 2 {
        return Err(Error::TooFewParticles(particles.len()));
    }
    let head = particles[0];
    let mut state = StateVector::basis_state(dim, particles.to_vec(), digits)?.apply_hadamard(head)?;
    for &target in &particles[1..] {
        state = state.apply_controlled_shift(head, target, 1)?;
    }
    Ok(state)
}

/// Expands `|j, k⟩` in the Bell basis: `(1/√d) Σ_u ζ^{-ju} Ψ(u, k-j)`.
pub fn expand_basis_in_bell(dim: Dimension, j: u32, k: u32) -> Result<Vec<(Coefficient, BellLabels)>> {
    Dit::new(dim, j)?;
    Dit::new(dim, k)?;
    Ok(dim
        .dits()
        .map(|u| {
            let coefficient = Coefficient {
                phase: dim.phase(-(j as i64) * u.value() as i64),
                inv_sqrt_d: 1,
            };
            (coefficient, BellLabels::new(dim, u.value() as i64, k as i64 - j as i64))
        })
        .collect())
}

/// Expands `|u1, …, un⟩` in the cat basis: `(1/√d) Σ_j ζ^{-j·u1} Ψ(j, u2-u1, …, un-u1)`.
pub fn expand_basis_in_cat(dim: Dimension, digits: &[u32]) -> Result<Vec<(Coefficient, CatLabels)>> {
    if digits.len() < 2 {
        return Err(Error::TooFewParticles(digits.len()));
    }
    for &digit in digits {
        Dit::new(dim, digit)?;
    }
    let first = digits[0] as i64;
    dim.dits()
        .map(|j| {
            let coefficient = Coefficient { phase: dim.phase(-(j.value() as i64) * first), inv_sqrt_d: 1 };
            let labels = std::iter::once(j.value() as i64)
                .chain(digits[1..].iter().map(|&u| u as i64 - first));
            Ok((coefficient, CatLabels::from_values(dim, labels)?))
        })
        .collect()
}

/// Outcome of growing an `n`-particle cat from an `(n-1)`-cat and a Bell pair.
#[derive(Debug, Clone)]
pub struct GrownCat {
    /// Computational-basis value observed on the measured Bell qudit.
    pub observed: Dit,
    /// Residual state on the cat's particles followed by the Bell target.
    pub state: StateVector,
    /// Labels of the unique cat basis state the residual lies on.
    pub labels: CatLabels,
    /// Global phase of the residual relative to `cat_state(labels)`.
    pub phase: Complex64,
}

/// Grows a cat state by one particle.
///
/// The last particle of `cat` controls a shift on the Bell pair's first
/// particle `a`; the Bell pair's second particle `b` is then measured in the
/// computational basis. The residual on `cat ∪ {a}` is identified by
/// projecting onto every cat basis state, and must match exactly one.
pub fn grow_cat<R: Rng + ?Sized>(cat: &StateVector, bell: &StateVector, rng: &mut R) -> Result<GrownCat> {
    let dim = cat.dim();
    if cat.num_particles() < 2 {
        return Err(Error::TooFewParticles(cat.num_particles()));
    }
    if bell.num_particles() != 2 {
        return Err(Error::LengthMismatch { expected: 2, got: bell.num_particles() });
    }
    let control = *cat.particles().last().expect("non-empty");
    let (a, b) = (bell.particles()[0], bell.particles()[1]);

    let joint = cat.tensor(bell)?.apply_controlled_shift(control, a, 1)?;
    let branch = joint.measure_in_basis(&[b], Basis::Computational, rng)?;
    let observed = Dit::new(dim, branch.outcome.labels[0])?;

    let mut order = cat.particles().to_vec();
    order.push(a);
    let residual = branch.residual.reorder(&order)?;

    let mut matches = Vec::new();
    for labels in CatLabels::all(dim, order.len())? {
        let reference = cat_state(dim, &order, &labels)?;
        let overlap = reference.inner(&residual)?;
        if overlap.norm_sqr() > 1e-9 {
            matches.push((labels, overlap));
        }
    }
    match matches.as_slice() {
        [(labels, overlap)] if (overlap.norm_sqr() - 1.0).abs() < 1e-9 => Ok(GrownCat {
            observed,
            state: residual,
            labels: labels.clone(),
            phase: *overlap,
        }),
        _ => Err(Error::UnsupportedConfiguration(format!(
            "residual overlaps {} cat basis states",
            matches.len()
        ))),
    }
}

//! Dense state-vector engine.
//!
//! This is the brute-force oracle the symbolic engine is checked against. A
//! [`StateVector`] carries its particle list explicitly; axis `i` of the
//! amplitude array belongs to `particles[i]`, with `particles[0]` the most
//! significant digit. Reordering particles is a metadata operation for
//! callers; only [`StateVector::reorder`] actually permutes amplitudes.
//!
//! All operations are pure and return new states.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::catbell::{cat_state, CatLabels};
use crate::error::{Error, Result};
use crate::qudit::{pack_index, unpack_index, zeta, Dimension};

/// Maximum number of amplitudes a single state may hold.
pub const MAX_AMPLITUDES: u128 = 1 << 24;

/// Probabilities below this are treated as impossible branches.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Opaque name of one physical qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticleId(pub u32);

impl fmt::Display for ParticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Amplitude count for `n` qudits, refusing anything above [`MAX_AMPLITUDES`].
pub fn amplitude_count(dim: Dimension, n: usize) -> Result<usize> {
    match dim.checked_pow(n) {
        Some(a) if a <= MAX_AMPLITUDES => Ok(a as usize),
        Some(a) => Err(Error::OracleCap { amplitudes: a, cap: MAX_AMPLITUDES }),
        None => Err(Error::OracleCap { amplitudes: u128::MAX, cap: MAX_AMPLITUDES }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: Dimension,
    particles: Vec<ParticleId>,
    amps: Vec<Complex64>,
}

/// Result of projecting a state onto a reference state of some of its particles.
#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// Renormalized residual on the unmeasured particles, `None` when the
    /// branch probability is below [`PROBABILITY_FLOOR`].
    pub post: Option<StateVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Computational,
    /// Generalized Bell basis on exactly two particles.
    Bell,
    /// Cat basis on two or more particles.
    Cat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    /// Digits for the computational basis, cat/Bell labels otherwise.
    pub labels: Vec<u32>,
    pub probability: f64,
}

/// One possible branch of a projective measurement.
#[derive(Debug, Clone)]
pub struct Branch {
    pub outcome: MeasurementOutcome,
    pub reference: StateVector,
    pub residual: StateVector,
}

impl Branch {
    /// The full post-measurement state: measured particles in the basis
    /// state, followed by the residual.
    pub fn collapsed(&self) -> StateVector {
        self.reference
            .tensor(&self.residual)
            .expect("reference and residual are disjoint by construction")
    }
}

impl StateVector {
    /// Wraps raw amplitudes. No normalization is imposed, so this can hold
    /// intermediate sums.
    pub fn from_amplitudes(
        dim: Dimension,
        particles: Vec<ParticleId>,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        check_distinct(&particles)?;
        let expected = amplitude_count(dim, particles.len())?;
        if amps.len() != expected {
            return Err(Error::LengthMismatch { expected, got: amps.len() });
        }
        Ok(Self { dim, particles, amps })
    }

    pub fn zeros(dim: Dimension, particles: Vec<ParticleId>) -> Result<Self> {
        check_distinct(&particles)?;
        let len = amplitude_count(dim, particles.len())?;
        Ok(Self { dim, particles, amps: vec![Complex64::new(0.0, 0.0); len] })
    }

    pub fn basis_state(dim: Dimension, particles: Vec<ParticleId>, digits: &[u32]) -> Result<Self> {
        if digits.len() != particles.len() {
            return Err(Error::LengthMismatch { expected: particles.len(), got: digits.len() });
        }
        let index = pack_index(dim, digits)?;
        let mut state = Self::zeros(dim, particles)?;
        state.amps[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn particles(&self) -> &[ParticleId] {
        &self.particles
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[u32]) -> Result<Complex64> {
        if digits.len() != self.particles.len() {
            return Err(Error::LengthMismatch { expected: self.particles.len(), got: digits.len() });
        }
        Ok(self.amps[pack_index(self.dim, digits)?])
    }

    pub fn num_particles(&self) -> usize {
        self.particles.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn axis_of(&self, particle: ParticleId) -> Result<usize> {
        self.particles
            .iter()
            .position(|&p| p == particle)
            .ok_or(Error::UnknownParticle(particle))
    }

    fn stride(&self, axis: usize) -> usize {
        self.dim.as_usize().pow((self.particles.len() - 1 - axis) as u32)
    }

    /// Applies `H = (1/√d) Σ ζ^{ij} |i⟩⟨j|` to one qudit.
    pub fn apply_hadamard(&self, particle: ParticleId) -> Result<Self> {
        let axis = self.axis_of(particle)?;
        let d = self.dim.as_usize();
        let scale = 1.0 / (d as f64).sqrt();
        let h: Vec<Complex64> = (0..d * d)
            .map(|ij| zeta(self.dim, ((ij / d) * (ij % d)) as i64) * scale)
            .collect();
        let stride = self.stride(axis);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for block in (0..self.amps.len()).step_by(stride * d) {
            for offset in 0..stride {
                let base = block + offset;
                for i in 0..d {
                    out[base + i * stride] = (0..d)
                        .map(|j| h[i * d + j] * self.amps[base + j * stride])
                        .sum();
                }
            }
        }
        Ok(self.with_amps(out))
    }

    /// Applies `R^power`, mapping `|j⟩ → |j + power mod d⟩`.
    pub fn apply_shift(&self, particle: ParticleId, power: i64) -> Result<Self> {
        let axis = self.axis_of(particle)?;
        let d = self.dim.as_usize();
        let shift = self.dim.reduce(power) as usize;
        let stride = self.stride(axis);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for block in (0..self.amps.len()).step_by(stride * d) {
            for offset in 0..stride {
                let base = block + offset;
                for j in 0..d {
                    out[base + ((j + shift) % d) * stride] = self.amps[base + j * stride];
                }
            }
        }
        Ok(self.with_amps(out))
    }

    /// Controlled shift `|i⟩|j⟩ → |i⟩|j + exponent·i⟩`.
    pub fn apply_controlled_shift(
        &self,
        control: ParticleId,
        target: ParticleId,
        exponent: i64,
    ) -> Result<Self> {
        if control == target {
            return Err(Error::ControlIsTarget(control));
        }
        let control_stride = self.stride(self.axis_of(control)?);
        let target_stride = self.stride(self.axis_of(target)?);
        let d = self.dim.as_usize();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &amp) in self.amps.iter().enumerate() {
            let c = (idx / control_stride) % d;
            let t = (idx / target_stride) % d;
            let new_t = self.dim.reduce(t as i64 + exponent * c as i64) as usize;
            out[idx - t * target_stride + new_t * target_stride] = amp;
        }
        Ok(self.with_amps(out))
    }

    /// Kronecker product; `self`'s particles come first.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(other.dim.get()));
        }
        let mut particles = self.particles.clone();
        particles.extend_from_slice(&other.particles);
        check_distinct(&particles)?;
        amplitude_count(self.dim, particles.len())?;
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        Ok(Self { dim: self.dim, particles, amps })
    }

    /// Permutes axes so that the particle list becomes `order`.
    pub fn reorder(&self, order: &[ParticleId]) -> Result<Self> {
        if order.len() != self.particles.len() {
            return Err(Error::LengthMismatch { expected: self.particles.len(), got: order.len() });
        }
        check_distinct(order)?;
        if order == self.particles.as_slice() {
            return Ok(self.clone());
        }
        let old_strides: Vec<usize> = order
            .iter()
            .map(|&p| self.axis_of(p).map(|axis| self.stride(axis)))
            .collect::<Result<_>>()?;
        let d = self.dim.as_usize();
        let n = order.len();
        let mut out = Vec::with_capacity(self.amps.len());
        let mut digits = vec![0usize; n];
        let mut old_index = 0usize;
        for _ in 0..self.amps.len() {
            out.push(self.amps[old_index]);
            // Odometer increment over the new digit order.
            for k in (0..n).rev() {
                digits[k] += 1;
                old_index += old_strides[k];
                if digits[k] < d {
                    break;
                }
                digits[k] = 0;
                old_index -= d * old_strides[k];
            }
        }
        Ok(Self { dim: self.dim, particles: order.to_vec(), amps: out })
    }

    /// `⟨self|other⟩`, aligning `other` to this particle order.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        let other = other.reorder(&self.particles)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest absolute amplitude difference after aligning particle orders.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64> {
        let other = other.reorder(&self.particles)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.with_amps(self.amps.iter().map(|a| a * factor).collect())
    }

    /// `self += factor · other`, aligning `other` to this particle order.
    pub fn add_scaled(&mut self, factor: Complex64, other: &StateVector) -> Result<()> {
        let other = other.reorder(&self.particles)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Projects onto `reference` over the reference's particles.
    pub fn project_onto(&self, reference: &StateVector) -> Result<Projection> {
        let norm = reference.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        for &p in &reference.particles {
            self.axis_of(p)?;
        }
        let complement: Vec<ParticleId> = self
            .particles
            .iter()
            .copied()
            .filter(|p| !reference.particles.contains(p))
            .collect();
        let mut order = reference.particles.clone();
        order.extend_from_slice(&complement);
        let permuted = self.reorder(&order)?;

        let cols = permuted.amps.len() / reference.amps.len();
        let mut residual = vec![Complex64::new(0.0, 0.0); cols];
        for (r, ref_amp) in reference.amps.iter().enumerate() {
            if *ref_amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let conj = ref_amp.conj();
            let row = &permuted.amps[r * cols..(r + 1) * cols];
            for (acc, a) in residual.iter_mut().zip(row) {
                *acc += conj * a;
            }
        }
        let probability: f64 = residual.iter().map(|a| a.norm_sqr()).sum();
        let post = (probability >= PROBABILITY_FLOOR).then(|| {
            let scale = 1.0 / probability.sqrt();
            Self {
                dim: self.dim,
                particles: complement,
                amps: residual.into_iter().map(|a| a * scale).collect(),
            }
        });
        Ok(Projection { probability, post })
    }

    /// Every branch of a projective measurement of `subset` in `basis`,
    /// including zero-probability branches (with an all-zero residual).
    pub fn measurement_branches(&self, subset: &[ParticleId], basis: Basis) -> Result<Vec<(MeasurementOutcome, StateVector, Option<StateVector>)>> {
        let labels = basis_labels(self.dim, subset, basis)?;
        labels
            .into_iter()
            .map(|labels| {
                let reference = basis_vector(self.dim, subset, basis, &labels)?;
                let proj = self.project_onto(&reference)?;
                Ok((MeasurementOutcome { labels, probability: proj.probability }, reference, proj.post))
            })
            .collect()
    }

    /// Samples a measurement outcome with Born-rule probabilities.
    ///
    /// Outcomes are enumerated in lexicographic label order and picked by
    /// cumulative probability, so a seeded generator gives a reproducible
    /// sequence.
    pub fn measure_in_basis<R: Rng + ?Sized>(
        &self,
        subset: &[ParticleId],
        basis: Basis,
        rng: &mut R,
    ) -> Result<Branch> {
        let branches: Vec<_> = self
            .measurement_branches(subset, basis)?
            .into_iter()
            .filter_map(|(outcome, reference, post)| post.map(|residual| Branch { outcome, reference, residual }))
            .collect();
        let total: f64 = branches.iter().map(|b| b.outcome.probability).sum();
        let target = rng.gen::<f64>() * total;
        let mut cumulative = 0.0;
        let last = branches.len() - 1;
        for (i, branch) in branches.iter().enumerate() {
            cumulative += branch.outcome.probability;
            if target < cumulative || i == last {
                return Ok(branch.clone());
            }
        }
        unreachable!("a normalized state has at least one branch")
    }

    fn with_amps(&self, amps: Vec<Complex64>) -> Self {
        Self { dim: self.dim, particles: self.particles.clone(), amps }
    }
}

/// The basis vector with the given labels on `subset`.
pub fn basis_vector(dim: Dimension, subset: &[ParticleId], basis: Basis, labels: &[u32]) -> Result<StateVector> {
    match basis {
        Basis::Computational => StateVector::basis_state(dim, subset.to_vec(), labels),
        Basis::Bell | Basis::Cat => {
            let labels = CatLabels::from_values(dim, labels.iter().map(|&v| v as i64))?;
            cat_state(dim, subset, &labels)
        }
    }
}

fn basis_labels(dim: Dimension, subset: &[ParticleId], basis: Basis) -> Result<Vec<Vec<u32>>> {
    match (basis, subset.len()) {
        (_, 0) => return Err(Error::EmptySubset),
        (Basis::Bell, n) if n != 2 => return Err(Error::LengthMismatch { expected: 2, got: n }),
        (Basis::Cat, n) if n < 2 => return Err(Error::TooFewParticles(n)),
        _ => {}
    }
    let count = amplitude_count(dim, subset.len())?;
    Ok((0..count).map(|i| unpack_index(dim, subset.len(), i)).collect())
}

fn check_distinct(particles: &[ParticleId]) -> Result<()> {
    for (i, p) in particles.iter().enumerate() {
        if particles[..i].contains(p) {
            return Err(Error::DuplicateParticle(*p));
        }
    }
    Ok(())
}

//! Seeded generators for the benchmark state ensembles.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::state::{self, BipartiteDensity, PureState, SchmidtVector};
use crate::{Error, Result};

/// One independent random stream per `(seed, index)`, so that sample `i` of
/// an experiment is the same however the work is split across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnsembleSpec {
    /// Schmidt-diagonal pure states with flat-Dirichlet coefficients on `r` levels.
    FixedSnPure {
        r: usize,
        d_a: usize,
        d_b: usize,
    },
    /// `(1 − ε) U|0⟩⟨0|U† + ε I/d²` with Haar `U`.
    HaarDepolarized {
        d: usize,
        eps: f64,
    },
    /// Marginals of Haar pure states on `H_AB ⊗ C^ancilla`.
    Induced {
        d_a: usize,
        d_b: usize,
        ancilla: usize,
    },
    Isotropic {
        d: usize,
        fidelity: f64,
    },
    /// `(1 − ε)|+_r⟩⟨+_r| + ε I/(d_a d_b)`.
    MeDepolarized {
        r: usize,
        d_a: usize,
        d_b: usize,
        eps: f64,
    },
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::out_of_range(name, format!("{x} not in [0, 1]")))
            }
        };
        match *self {
            Self::FixedSnPure { r, d_a, d_b } | Self::MeDepolarized { r, d_a, d_b, .. } => {
                if r == 0 || r > d_a || d_a > d_b {
                    return Err(Error::out_of_range(
                        "r, d_a, d_b",
                        format!("need 1 ≤ r ≤ d_a ≤ d_b, got ({r}, {d_a}, {d_b})"),
                    ));
                }
                if let Self::MeDepolarized { eps, .. } = *self {
                    unit("eps", eps)?;
                }
                Ok(())
            }
            Self::HaarDepolarized { d, eps } => {
                positive("d", d)?;
                unit("eps", eps)
            }
            Self::Induced { d_a, d_b, ancilla } => {
                positive("d_a", d_a)?;
                positive("d_b", d_b)?;
                positive("ancilla", ancilla)
            }
            Self::Isotropic { d, fidelity } => {
                positive("d", d)?;
                unit("fidelity", fidelity)
            }
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Self::FixedSnPure { d_a, d_b, .. }
            | Self::MeDepolarized { d_a, d_b, .. }
            | Self::Induced { d_a, d_b, .. } => (d_a, d_b),
            Self::HaarDepolarized { d, .. } | Self::Isotropic { d, .. } => (d, d),
        }
    }

    /// Schmidt number when it is known analytically for every sample.
    pub fn known_schmidt_number(&self) -> Option<usize> {
        match *self {
            Self::FixedSnPure { r, .. } => Some(r),
            Self::Isotropic { d, fidelity } => Some(isotropic_schmidt_number(d, fidelity)),
            Self::MeDepolarized { r, eps: 0.0, .. } => Some(r),
            _ => None,
        }
    }

    pub fn sample(&self, stream: RandomStream) -> Result<BipartiteDensity> {
        self.validate()?;
        let mut rng = stream.rng();
        match *self {
            Self::FixedSnPure { r, d_a, d_b } => {
                Ok(fixed_sn_pure(r, d_a, d_b, &mut rng)?.density())
            }
            Self::HaarDepolarized { d, eps } => haar_depolarized(d, eps, &mut rng),
            Self::Induced { d_a, d_b, ancilla } => induced_mixed(d_a, d_b, ancilla, &mut rng),
            Self::Isotropic { d, fidelity } => isotropic_state(d, fidelity),
            Self::MeDepolarized { r, d_a, d_b, eps } => me_depolarized(r, d_a, d_b, eps),
        }
    }
}

fn positive(name: &'static str, x: usize) -> Result<()> {
    if x == 0 {
        return Err(Error::out_of_range(name, "must be positive"));
    }
    Ok(())
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `diag(R)`
/// moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        col *= phase;
    }
    q
}

/// Haar-random unit vector of length `dim`.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    let v = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Flat Dirichlet sample on `r` entries, sorted and zero-padded to length `d`.
pub fn dirichlet_simplex<R: Rng + ?Sized>(
    r: usize,
    d: usize,
    rng: &mut R,
) -> Result<SchmidtVector> {
    if r == 0 || r > d {
        return Err(Error::out_of_range("r", format!("{r} not in 1..={d}")));
    }
    let weights: Vec<f64> = (0..r).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    SchmidtVector::from_weights(&weights)?.padded(d)
}

pub fn fixed_sn_pure<R: Rng + ?Sized>(
    r: usize,
    d_a: usize,
    d_b: usize,
    rng: &mut R,
) -> Result<PureState> {
    if r == 0 || r > d_a || d_a > d_b {
        return Err(Error::out_of_range(
            "r, d_a, d_b",
            format!("need 1 ≤ r ≤ d_a ≤ d_b, got ({r}, {d_a}, {d_b})"),
        ));
    }
    PureState::from_schmidt(&dirichlet_simplex(r, d_a, rng)?, d_a, d_b)
}

pub fn haar_depolarized<R: Rng + ?Sized>(
    d: usize,
    eps: f64,
    rng: &mut R,
) -> Result<BipartiteDensity> {
    let dim = d * d;
    let psi = PureState::normalized(d, d, haar_vector(dim, rng))?;
    psi.density().depolarize(eps)
}

/// `Tr_C |Ψ⟩⟨Ψ|` for Haar `|Ψ⟩` on `H_AB ⊗ C^ancilla`, i.e. `G G† / Tr(G G†)`
/// with `G` a `D × ancilla` Ginibre matrix.
pub fn induced_mixed<R: Rng + ?Sized>(
    d_a: usize,
    d_b: usize,
    ancilla: usize,
    rng: &mut R,
) -> Result<BipartiteDensity> {
    positive("ancilla", ancilla)?;
    let g = ginibre(d_a * d_b, ancilla, rng);
    let mut rho = &g * g.adjoint();
    let tr = linalg::trace(&rho).re;
    rho.unscale_mut(tr);
    hermitize(&mut rho);
    BipartiteDensity::new(d_a, d_b, rho)
}

fn hermitize(m: &mut ComplexMatrix) {
    *m = (&*m + m.adjoint()).scale(0.5);
}

/// `ρ_F = (1 − F)/(d² − 1) I + (d²F − 1)/(d² − 1) |+_d⟩⟨+_d|`.
pub fn isotropic_state(d: usize, fidelity: f64) -> Result<BipartiteDensity> {
    positive("d", d)?;
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::out_of_range(
            "fidelity",
            format!("{fidelity} not in [0, 1]"),
        ));
    }
    if d == 1 {
        return Ok(BipartiteDensity::maximally_mixed(1, 1));
    }
    let n = (d * d - 1) as f64;
    let plus = state::maximally_entangled(d, d, d)?.density();
    let rho = linalg::identity(d * d).scale((1.0 - fidelity) / n)
        + plus.matrix().scale(((d * d) as f64 * fidelity - 1.0) / n);
    BipartiteDensity::new(d, d, rho)
}

/// `SN(ρ_F) = ⌈dF⌉`, and 1 for separable `F ≤ 1/d`.
pub fn isotropic_schmidt_number(d: usize, fidelity: f64) -> usize {
    ((d as f64 * fidelity - 1e-9).ceil() as usize).max(1)
}

pub fn me_depolarized(r: usize, d_a: usize, d_b: usize, eps: f64) -> Result<BipartiteDensity> {
    if r > d_a || d_a > d_b {
        return Err(Error::out_of_range(
            "r, d_a, d_b",
            format!("need r ≤ d_a ≤ d_b, got ({r}, {d_a}, {d_b})"),
        ));
    }
    state::maximally_entangled(r, d_a, d_b)?
        .density()
        .depolarize(eps)
}

/// Convex mixture of `terms` random pure states, each of Schmidt rank at most
/// `k`, so that `SN ≤ k`. Weights are flat Dirichlet.
pub fn bounded_sn_mixture<R: Rng + ?Sized>(
    k: usize,
    d_a: usize,
    d_b: usize,
    terms: usize,
    rng: &mut R,
) -> Result<BipartiteDensity> {
    if k == 0 || k > d_a.min(d_b) {
        return Err(Error::out_of_range(
            "k",
            format!("{k} not in 1..={}", d_a.min(d_b)),
        ));
    }
    positive("terms", terms)?;
    let weights: Vec<f64> = (0..terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let dim = d_a * d_b;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for w in weights {
        let mut amps = ComplexVector::zeros(dim);
        for _ in 0..k {
            let a = DVector::from_fn(d_a, |_, _| complex_gaussian(rng));
            let b = DVector::from_fn(d_b, |_, _| complex_gaussian(rng));
            amps += a.kronecker(&b);
        }
        let amps = amps.unscale(amps.norm());
        rho += linalg::projector(&amps).scale(w / total);
    }
    hermitize(&mut rho);
    BipartiteDensity::new(d_a, d_b, rho)
}

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{ComplexMatrix, DensityMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Abort threshold for `|Tr rho - 1|` during integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Hamiltonian (as `H/hbar`, a rate) plus jump operators already scaled by
/// the square root of their rates.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladGenerator {
    hamiltonian: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<ComplexMatrix>) -> Result<Self> {
        hamiltonian.check_dense_cap()?;
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                what: "Hamiltonian",
                deviation: defect,
            });
        }
        for l in &jumps {
            hamiltonian.same_dim(l)?;
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    /// `H - (i/2) sum L^dag L`
    fn effective_hamiltonian(&self) -> DMatrix<C64> {
        let mut h = self.hamiltonian.as_dmatrix().clone();
        for l in &self.jumps {
            let l = l.as_dmatrix();
            h -= l.adjoint() * l * C64::new(0.0, 0.5);
        }
        h
    }

    /// `L(rho) = -i[H, rho] - 1/2 sum {L^dag L, rho} + sum L rho L^dag`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.hamiltonian.same_dim(rho)?;
        let rhs = Rhs::new(self);
        Ok(ComplexMatrix::wrap(rhs.eval(rho.as_dmatrix())))
    }

    /// Vectorized superoperator acting on row-major `vec(rho)`, using
    /// `vec(A rho B) = (A ⊗ B^T) vec(rho)`.
    pub fn liouvillian(&self) -> DMatrix<C64> {
        let n = self.dim();
        let id = DMatrix::<C64>::identity(n, n);
        let heff = self.effective_hamiltonian();
        let minus_i = C64::new(0.0, -1.0);
        // -i (Heff rho - rho Heff^dag)
        let mut sup = (heff.kronecker(&id) - id.kronecker(&heff.adjoint().transpose())) * minus_i;
        for l in &self.jumps {
            let l = l.as_dmatrix();
            sup += l.kronecker(&l.map(|z| z.conj()));
        }
        sup
    }
}

struct Rhs {
    heff: DMatrix<C64>,
    jumps: Vec<(DMatrix<C64>, DMatrix<C64>)>,
}

impl Rhs {
    fn new(generator: &LindbladGenerator) -> Self {
        Self {
            heff: generator.effective_hamiltonian(),
            jumps: generator
                .jumps
                .iter()
                .map(|l| (l.as_dmatrix().clone(), l.as_dmatrix().adjoint()))
                .collect(),
        }
    }

    fn eval(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let a = &self.heff * rho;
        // -i (Heff rho - (Heff rho)^dag) since rho is Hermitian up to rounding
        let mut out = (&a - rho * self.heff.adjoint()) * C64::new(0.0, -1.0);
        for (l, ld) in &self.jumps {
            out += l * rho * ld;
        }
        out
    }
}

/// Sampled states from a master-equation or slice-map run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &DensityMatrix)> {
        self.times.last().copied().zip(self.states.last())
    }
}

/// Classical fixed-step RK4 integration of the Lindblad equation.
///
/// The step is shrunk to `t_final / ceil(t_final / step)` so the run ends
/// exactly on `t_final`. States are recorded at every `sample_every`-th step
/// and always at the final time. Each step is re-symmetrized to remove
/// anti-Hermitian rounding.
pub fn evolve_lindblad(
    rho0: &DensityMatrix,
    generator: &LindbladGenerator,
    t_final: f64,
    step: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    crate::error::require_positive("step", step)?;
    crate::error::require_non_negative("t_final", t_final)?;
    if sample_every == 0 {
        return Err(crate::error::invalid("sample_every", "must be >= 1"));
    }
    generator.hamiltonian.same_dim(rho0.matrix())?;

    let n_steps = if t_final == 0.0 {
        0
    } else {
        ((t_final / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    };
    let h = if n_steps == 0 {
        0.0
    } else {
        t_final / n_steps as f64
    };

    let rhs = Rhs::new(generator);
    let mut rho = rho0.matrix().as_dmatrix().clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
    };
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);

    for k in 1..=n_steps {
        let k1 = rhs.eval(&rho);
        let k2 = rhs.eval(&(&rho + &k1 * half));
        let k3 = rhs.eval(&(&rho + &k2 * half));
        let k4 = rhs.eval(&(&rho + &k3 * full));
        rho += (k1 + k2 * two + k3 * two + k4) * sixth;
        rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);

        if k % sample_every == 0 || k == n_steps {
            let t = if k == n_steps { t_final } else { k as f64 * h };
            let drift = (rho.trace().re - 1.0).abs();
            if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
                return Err(Error::TraceDrift { t, drift });
            }
            traj.times.push(t);
            traj.states
                .push(DensityMatrix::new_unchecked(ComplexMatrix::from_dmatrix(
                    rho.clone(),
                )?));
        }
    }
    Ok(traj)
}

/// Relative singular-value threshold for counting Liouvillian null vectors.
const NULL_TOL: f64 = 1e-9;

/// Unique stationary state of the generator.
///
/// Refuses degenerate null spaces: a stationary manifold (as for pure
/// dephasing) has no preferred representative.
pub fn steady_state(generator: &LindbladGenerator) -> Result<DensityMatrix> {
    let n = generator.dim();
    let sup = generator.liouvillian();
    let svd = sup.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = &svd.singular_values;
    let largest = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = NULL_TOL * largest.max(1.0);

    let null: Vec<usize> = (0..sigma.len())
        .filter(|&i| sigma[i] <= threshold)
        .collect();
    match null.len() {
        0 => {
            let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
            return Err(Error::NoSteadyState { smallest });
        }
        1 => {}
        nullity => return Err(Error::NonUniqueSteadyState { nullity }),
    }

    let row = v_t.row(null[0]);
    let mut rho = DMatrix::<C64>::from_fn(n, n, |i, j| row[i * n + j].conj());
    let tr = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(ComplexMatrix::from_dmatrix(rho)?)
}

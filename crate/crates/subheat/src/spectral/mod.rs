//! Spectral calculus for the generator.
//!
//! [`SpectralDecomposition::eigendecompose`] solves the generalized symmetric
//! problem `K phi = lambda M phi` (stiffness vs mass matrix) through the
//! measure-normalized similarity transform `M^{-1/2} K M^{-1/2}` and is the
//! engine behind every kernel, fractional power and energy in the crate. For
//! killed spaces the decomposition lives on the interior nodes only.

mod bounds;
mod fractional;
mod kernel;

pub use bounds::{kernel_bound_fit, BoundFitReport};
pub use fractional::{
    fractional_energy, fractional_form_matrix, fractional_laplacian, fractional_laplacian_bochner,
    FractionalEnergy,
};
pub use kernel::{
    heat_kernel, lp_to_linf_norm, subordinated_kernel, subordinated_kernel_by_integral,
    KernelMatrix,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::MetricMeasureGraph;

/// Dense budget for the deterministic eigensolver.
pub const MAX_DENSE_NODES: usize = 12_000;

/// Eigenvalues and mu-orthonormal eigenvectors of the generator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending, nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector `phi_k` over the reduced node set,
    /// orthonormal in the mu-weighted inner product.
    pub basis: DMatrix<f64>,
    /// Reduced index -> graph node index (identity for conservative spaces).
    pub nodes: Vec<usize>,
    /// Vertex masses over the reduced node set.
    pub mass: DVector<f64>,
    /// True iff the form is killed (`lambda_0 > 0`).
    pub killed: bool,
}

impl SpectralDecomposition {
    /// Solve `K phi = lambda M phi` for the graph's conductance form.
    pub fn eigendecompose(graph: &MetricMeasureGraph) -> Result<Self> {
        let nodes = graph.interior_nodes();
        let n = nodes.len();
        if n > MAX_DENSE_NODES {
            return Err(Error::Resource(format!(
                "dense eigendecomposition budget is {MAX_DENSE_NODES} nodes, graph has {n}"
            )));
        }
        if n == 0 {
            return Err(Error::Invariant("no interior nodes".into()));
        }
        let mut reduced_index = vec![usize::MAX; graph.node_count()];
        for (ri, &g) in nodes.iter().enumerate() {
            reduced_index[g] = ri;
        }

        // stiffness matrix over interior nodes; boundary neighbors still
        // contribute to the diagonal (killing term)
        let mut k = DMatrix::<f64>::zeros(n, n);
        for &(a, b, c) in &graph.edges {
            let (a, b) = (a as usize, b as usize);
            let (ra, rb) = (reduced_index[a], reduced_index[b]);
            if ra != usize::MAX {
                k[(ra, ra)] += c;
            }
            if rb != usize::MAX {
                k[(rb, rb)] += c;
            }
            if ra != usize::MAX && rb != usize::MAX {
                k[(ra, rb)] -= c;
                k[(rb, ra)] -= c;
            }
        }
        let mass = DVector::from_iterator(n, nodes.iter().map(|&g| graph.measure[g]));
        let inv_sqrt_m = mass.map(|m| 1.0 / m.sqrt());

        // B = M^{-1/2} K M^{-1/2}, exactly symmetrized
        let mut b = k;
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] *= inv_sqrt_m[i] * inv_sqrt_m[j];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (b[(i, j)] + b[(j, i)]);
                b[(i, j)] = avg;
                b[(j, i)] = avg;
            }
        }

        let scale = b.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let eig = b.symmetric_eigen();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

        let killed = !graph.boundary.is_empty();
        let mut eigenvalues = Vec::with_capacity(n);
        let mut basis = DMatrix::<f64>::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            let mut lambda = eig.eigenvalues[src];
            if lambda < -1e-8 * scale.max(1.0) {
                return Err(Error::Invariant(format!(
                    "negative eigenvalue {lambda} from a Markovian form"
                )));
            }
            // rounding noise around the conservative zero mode
            if !killed && lambda.abs() <= 1e-11 * scale.max(1.0) {
                lambda = 0.0;
            }
            lambda = lambda.max(0.0);
            eigenvalues.push(lambda);
            // phi = M^{-1/2} psi with a canonical sign
            let psi = eig.eigenvectors.column(src);
            let mut best = 0usize;
            let mut best_abs = 0.0;
            for i in 0..n {
                let a = psi[i].abs();
                if a > best_abs + 1e-300 {
                    best_abs = a;
                    best = i;
                }
            }
            let sign = if psi[best] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                basis[(i, col)] = sign * psi[i] * inv_sqrt_m[i];
            }
        }

        let spec = SpectralDecomposition {
            eigenvalues,
            basis,
            nodes,
            mass,
            killed,
        };
        spec.check_invariants(scale)?;
        Ok(spec)
    }

    fn check_invariants(&self, scale: f64) -> Result<()> {
        let n = self.dim();
        // orthonormality under the mu-weighted inner product
        let weighted = {
            let mut w = self.basis.clone();
            for i in 0..n {
                for j in 0..n {
                    w[(i, j)] *= self.mass[i];
                }
            }
            w
        };
        let gram = self.basis.transpose() * &weighted;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - target).abs() > 1e-8 {
                    return Err(Error::Invariant(format!(
                        "eigenvectors not mu-orthonormal: gram[{i},{j}] = {}",
                        gram[(i, j)]
                    )));
                }
            }
        }
        if self.killed {
            if self.eigenvalues[0] <= 0.0 {
                return Err(Error::Invariant(
                    "killed form must have lambda_0 > 0".into(),
                ));
            }
        } else if self.eigenvalues[0] > 1e-8 * scale.max(1.0) {
            return Err(Error::Invariant(format!(
                "conservative form must have lambda_0 = 0, got {}",
                self.eigenvalues[0]
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Smallest decay rate of the semigroup (spectral gap).
    pub fn gap(&self) -> f64 {
        if self.killed {
            self.eigenvalues[0]
        } else {
            self.eigenvalues[1]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.sum()
    }

    /// Restrict a function on all graph nodes to the reduced node set.
    pub fn restrict(&self, f: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.nodes.iter().map(|&g| f[g]))
    }

    /// Spectral coefficients `<f, phi_k>_mu` of a reduced vector.
    pub fn coefficients(&self, f: &DVector<f64>) -> DVector<f64> {
        let weighted = f.component_mul(&self.mass);
        self.basis.transpose() * weighted
    }

    /// Apply the spectral multiplier `m(lambda)` to a reduced vector.
    pub fn apply_multiplier(&self, f: &DVector<f64>, m: impl Fn(f64) -> f64) -> DVector<f64> {
        let mut coef = self.coefficients(f);
        for (k, c) in coef.iter_mut().enumerate() {
            *c *= m(self.eigenvalues[k]);
        }
        &self.basis * coef
    }

    /// `P_t^{(delta)} f` on the reduced node set (`delta = 1` is the base
    /// semigroup).
    pub fn semigroup_apply(&self, delta: f64, t: f64, f: &DVector<f64>) -> DVector<f64> {
        self.apply_multiplier(f, |lam| (-t * lam.powf(delta)).exp())
    }

    /// L^p norm (mu-weighted) of a reduced vector; `p = infinity` via max.
    pub fn lp_norm(&self, f: &DVector<f64>, p: f64) -> f64 {
        if p.is_infinite() {
            return f.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        }
        let s: f64 = f
            .iter()
            .zip(self.mass.iter())
            .map(|(&v, &m)| v.abs().powf(p) * m)
            .sum();
        s.powf(1.0 / p)
    }
}

//! The regular-graph correspondence between the uniform loop-series
//! polynomial `theta(beta, gamma)` and the Ising partition function
//! `Z(K, h)`, plus the zero-field susceptibility formula it yields.

use crate::error::{Error, Result};
use crate::exact::{exact_partition, ising_partition, Caps};
use crate::graph::Mrf;
use crate::loops::theta_uniform_on_graph;
use serde::Serialize;

/// Ising-side coordinates of the correspondence. `y = tanh(h')` is the
/// edge-field variable and `z = tanh(K)` the coupling variable.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsingParams {
    pub coupling: f64,
    pub field: f64,
    pub y: f64,
    pub z: f64,
    pub degree: usize,
}

impl IsingParams {
    /// Builds the full parameter set from `(y, z)` for a `d`-regular graph:
    /// `K = atanh(z)` and `h = atanh(y) + (1 - d) atanh(y z)`.
    pub fn from_yz(y: f64, z: f64, degree: usize) -> Result<Self> {
        if y.abs() >= 1.0 || z.abs() >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "require |y| < 1 and |z| < 1, got y = {y}, z = {z}"
            )));
        }
        Ok(IsingParams {
            coupling: z.atanh(),
            field: y.atanh() + (1.0 - degree as f64) * (y * z).atanh(),
            y,
            z,
            degree,
        })
    }

    /// The uniform edge coefficient `beta = (1 - y^2) z / (1 - y^2 z^2)`.
    pub fn beta(&self) -> f64 {
        (1.0 - self.y * self.y) * self.z / (1.0 - self.y * self.y * self.z * self.z)
    }

    /// The uniform node coefficient
    /// `gamma = 2 y (1 + z) / sqrt((1 - y^2)(1 - y^2 z^2))`.
    pub fn gamma(&self) -> f64 {
        let y2 = self.y * self.y;
        2.0 * self.y * (1.0 + self.z) / ((1.0 - y2) * (1.0 - y2 * self.z * self.z)).sqrt()
    }
}

/// Solves the uniform edge belief from `(beta, gamma)`:
/// `b(x_i, x_j) = 1/4 (1 + (x_i + x_j) g/sqrt(4+g^2) + x_i x_j g^2/(4+g^2)) + x_i x_j beta/(4+g^2)`.
///
/// Errors when any entry leaves `(0, 1)`. Also returns the implied node
/// belief.
pub fn bij_from_beta_gamma(beta: f64, gamma: f64) -> Result<([[f64; 2]; 2], [f64; 2])> {
    let g2 = gamma * gamma;
    let u = gamma / (4.0 + g2).sqrt();
    let spin = |x: usize| 1.0 - 2.0 * x as f64;
    let mut table = [[0.0; 2]; 2];
    for x_i in 0..2 {
        for x_j in 0..2 {
            let si = spin(x_i);
            let sj = spin(x_j);
            table[x_i][x_j] = 0.25 * (1.0 + (si + sj) * u + si * sj * g2 / (4.0 + g2))
                + si * sj * beta / (4.0 + g2);
            if !(table[x_i][x_j] > 0.0 && table[x_i][x_j] < 1.0) {
                return Err(Error::InvalidBetaGammaRegion { beta, gamma });
            }
        }
    }
    let node = [0.5 * (1.0 + u), 0.5 * (1.0 - u)];
    Ok((table, node))
}

/// Evaluates `theta(beta, gamma) = sum_x prod_edges b_ij prod_nodes
/// b_i^{1-d}` by brute force on a regular graph, using the beliefs solved
/// from the coefficients. An independent route to the loop-enumeration
/// value of theta.
pub fn theta_via_identity(m: &Mrf, beta: f64, gamma: f64, caps: &Caps) -> Result<f64> {
    let degree = m.regular_degree().ok_or(Error::NotRegular)?;
    let (table, node) = bij_from_beta_gamma(beta, gamma)?;
    let synthetic = m.map_psi(|_, _| table)?;
    let power = 1.0 - degree as f64;
    let synthetic = synthetic.with_phi(
        (0..m.node_count())
            .map(|_| [node[0].powf(power), node[1].powf(power)])
            .collect(),
    )?;
    exact_partition(&synthetic, caps)
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryReport {
    pub params: IsingParams,
    pub beta: f64,
    pub gamma: f64,
    /// Loop-enumeration value of theta(beta, gamma).
    pub theta: f64,
    /// Brute-force value through the belief identity.
    pub theta_identity: f64,
    pub z_ising: f64,
    pub edge_prefactor: f64,
    pub node_prefactor: f64,
    /// `Z(K,h) * A^|E| * B^|V|`; equals theta.
    pub rhs: f64,
    pub rel_err: f64,
}

/// Checks the change-of-variables identity on a regular graph:
/// `theta(beta(y,z), gamma(y,z)) = Z(K, h) * A^{|E|} * B^{|V|}` with
/// `A = sqrt(1-z^2)(1+y^2 z)/(1-y^2 z^2)` and
/// `B = sqrt((1-y^2)(1-y^2 z^2))/(2(1+y^2 z))`.
pub fn corollary_change_of_variables(
    m: &Mrf,
    y: f64,
    z: f64,
    caps: &Caps,
) -> Result<CorollaryReport> {
    let degree = m.regular_degree().ok_or(Error::NotRegular)?;
    let params = IsingParams::from_yz(y, z, degree)?;
    let beta = params.beta();
    let gamma = params.gamma();
    let theta = theta_uniform_on_graph(m, beta, gamma, caps)?;
    let theta_identity = theta_via_identity(m, beta, gamma, caps)?;
    let z_ising = ising_partition(m, params.coupling, params.field, caps)?;
    let y2z = y * y * z;
    let y2z2 = y * y * z * z;
    let edge_prefactor = (1.0 - z * z).sqrt() * (1.0 + y2z) / (1.0 - y2z2);
    let node_prefactor = ((1.0 - y * y) * (1.0 - y2z2)).sqrt() / (2.0 * (1.0 + y2z));
    let rhs = z_ising
        * edge_prefactor.powi(m.edge_count() as i32)
        * node_prefactor.powi(m.node_count() as i32);
    let rel_err = (theta - rhs).abs() / rhs.abs();
    Ok(CorollaryReport {
        params,
        beta,
        gamma,
        theta,
        theta_identity,
        z_ising,
        edge_prefactor,
        node_prefactor,
        rhs,
        rel_err,
    })
}

/// Per-spin susceptibility assembled from the theta derivatives:
/// `chi = [(1+z)(1+z-dz) + (2z(z^2-1) d(log theta)/dz
///        + 8(1+z)^2 d(log theta)/d(gamma^2)) / N] / (1+z-dz)^2`.
///
/// The Bethe term is intensive while `log theta` of a finite graph is a
/// global quantity, hence the division by the node count in the correction
/// terms; with `theta = 1` the expression collapses to the Bethe form.
pub fn chi_per_spin_from_theta_derivatives(
    z: f64,
    degree: usize,
    node_count: usize,
    dlog_theta_dz: f64,
    dlog_theta_dgamma2: f64,
) -> f64 {
    let d = degree as f64;
    let denom = 1.0 + z - d * z;
    ((1.0 + z) * denom
        + (2.0 * z * (z * z - 1.0) * dlog_theta_dz
            + 8.0 * (1.0 + z) * (1.0 + z) * dlog_theta_dgamma2)
            / node_count as f64)
        / (denom * denom)
}

/// The Bethe (theta = 1) per-spin susceptibility `(1+z)/(1+z-dz)`.
pub fn bethe_susceptibility_per_spin(z: f64, degree: usize) -> f64 {
    (1.0 + z) / (1.0 + z - degree as f64 * z)
}

#[derive(Debug, Clone, Serialize)]
pub struct SusceptibilityReport {
    pub coupling: f64,
    pub z: f64,
    pub degree: usize,
    pub node_count: usize,
    /// Global susceptibility from the theta-derivative formula
    /// (per-spin value times N).
    pub chi_formula: f64,
    /// Global susceptibility `d^2 log Z(K, h) / dh^2` at `h = 0` by central
    /// finite differences.
    pub chi_fd: f64,
    pub rel_err: f64,
    pub bethe_chi_per_spin: f64,
}

/// Compares the susceptibility formula (theta derivatives by central
/// differences over the loop enumeration) against the brute-force second
/// derivative of `log Z(K, h)` at `h = 0`.
pub fn susceptibility_check(m: &Mrf, coupling: f64, caps: &Caps) -> Result<SusceptibilityReport> {
    let degree = m.regular_degree().ok_or(Error::NotRegular)?;
    let z = coupling.tanh();
    let denom = 1.0 + z - degree as f64 * z;
    if denom.abs() < 1e-9 {
        return Err(Error::SusceptibilitySingular { z, degree });
    }

    let log_theta = |beta: f64, gamma: f64| -> Result<f64> {
        Ok(theta_uniform_on_graph(m, beta, gamma, caps)?.ln())
    };

    // d log theta / dz at (z, 0): central difference with one Richardson step.
    let dz_step = 1e-4;
    let central = |eps: f64| -> Result<f64> {
        Ok((log_theta(z + eps, 0.0)? - log_theta(z - eps, 0.0)?) / (2.0 * eps))
    };
    let dlog_dz = (4.0 * central(dz_step / 2.0)? - central(dz_step)?) / 3.0;

    // d log theta / d(gamma^2) at gamma = 0: theta is even in gamma, so a
    // one-sided quotient in gamma^2 is already second order; refine once.
    let g_step = 1e-3;
    let base = log_theta(z, 0.0)?;
    let quot = |eps: f64| -> Result<f64> { Ok((log_theta(z, eps)? - base) / (eps * eps)) };
    let dlog_dgamma2 = (4.0 * quot(g_step / 2.0)? - quot(g_step)?) / 3.0;

    let chi_per_spin =
        chi_per_spin_from_theta_derivatives(z, degree, m.node_count(), dlog_dz, dlog_dgamma2);
    let chi_formula = chi_per_spin * m.node_count() as f64;

    // Oracle: second central difference of log Z(K, h) in h.
    let h_step = 1e-3;
    let log_z = |h: f64| -> Result<f64> { Ok(ising_partition(m, coupling, h, caps)?.ln()) };
    let second = |eps: f64| -> Result<f64> {
        Ok((log_z(eps)? - 2.0 * log_z(0.0)? + log_z(-eps)?) / (eps * eps))
    };
    let chi_fd = (4.0 * second(h_step / 2.0)? - second(h_step)?) / 3.0;

    Ok(SusceptibilityReport {
        coupling,
        z,
        degree,
        node_count: m.node_count(),
        chi_formula,
        chi_fd,
        rel_err: (chi_formula - chi_fd).abs() / chi_fd.abs(),
        bethe_chi_per_spin: bethe_susceptibility_per_spin(z, degree),
    })
}

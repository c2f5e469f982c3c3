"""Independent oracles shared across the test modules.

Everything here is deliberately written from scratch against the model
definition, without reusing the package's own closed forms, so that
tests compare two independent routes to the same quantity.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm


def drift_matrix_reference(gamma, lam, variant="full"):
    """Classical equations of motion assembled directly term by term.

    Phase-space order (X, P, q, p).  Derived from the quadratic energy
    function by hand, independently of the package implementation.
    """
    if variant == "full":
        return np.array(
            [
                [0.0, 1.0, -lam, 0.0],
                [-1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, gamma],
                [0.0, lam, -(gamma + lam**2), 0.0],
            ]
        )
    if variant == "no_diamagnetic":
        return np.array(
            [
                [0.0, 1.0, -lam, 0.0],
                [-1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, gamma],
                [0.0, lam, -gamma, 0.0],
            ]
        )
    if variant == "rwa":
        return np.array(
            [
                [0.0, 1.0, -lam / 2.0, 0.0],
                [-1.0, 0.0, 0.0, -lam / 2.0],
                [lam / 2.0, 0.0, 0.0, gamma],
                [0.0, lam / 2.0, -gamma, 0.0],
            ]
        )
    raise ValueError(variant)


def propagator_reference(gamma, lam, t, variant="full"):
    """Matrix-exponential propagator, the oracle for all closed forms."""
    return expm(drift_matrix_reference(gamma, lam, variant) * t)


def destroy_reference(dim):
    """Bosonic lowering operator as a dense matrix."""
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1).astype(complex)


def single_mode_ops(dim):
    a = destroy_reference(dim)
    x = (a + a.conj().T) / np.sqrt(2.0)
    p = 1j * (a.conj().T - a) / np.sqrt(2.0)
    n = a.conj().T @ a
    return a, x, p, n


def hamiltonian_reference(gamma, lam, n_b, n_a, variant="full"):
    """Two-mode Hamiltonian built with explicit Kronecker products.

    Matter mode first (dimension ``n_b + 1``), photon mode second
    (dimension ``n_a + 1``), matching the package's index convention.
    """
    db, da = n_b + 1, n_a + 1
    ib, ia = np.eye(db), np.eye(da)
    b, _, pb, nb = single_mode_ops(db)
    a, qa, _, na = single_mode_ops(da)
    h = np.kron(nb + 0.5 * ib, ia) + gamma * np.kron(ib, na + 0.5 * ia)
    if variant in ("full", "no_diamagnetic"):
        h = h - lam * np.kron(pb, qa)
        if variant == "full":
            h = h + 0.5 * lam**2 * np.kron(ib, qa @ qa)
    elif variant == "rwa":
        h = h - 0.5j * lam * np.kron(b.conj().T, a) + 0.5j * lam * np.kron(b, a.conj().T)
    else:
        raise ValueError(variant)
    return h


def expectation(psi, op):
    return complex(np.vdot(psi, op @ psi))


def schroedinger_reference(h, psi0, times):
    """Direct expm-based evolution for small dimensions."""
    return [expm(-1j * h * t) @ psi0 for t in times]


def lindblad_moment_reference(gamma, lam, kappa, mean0, cov0, times, variant="full"):
    """First and second moments of the lossy evolution via an ODE solver.

    For the damped quadratic model the means follow
    ``d m/dt = (A - kappa/2 P) m`` and the covariance follows the
    corresponding Lyapunov equation with diffusion ``kappa/2 P`` on the
    photon quadratures, where ``P`` projects onto (q, p).  Integrated
    with an independent adaptive solver as the oracle for the
    density-matrix backend.
    """
    a_mat = drift_matrix_reference(gamma, lam, variant)
    proj = np.diag([0.0, 0.0, 1.0, 1.0])
    a_eff = a_mat - 0.5 * kappa * proj
    diff = 0.5 * kappa * proj

    def rhs(_, y):
        m = y[:4]
        c = y[4:].reshape(4, 4)
        dm = a_eff @ m
        dc = a_eff @ c + c @ a_eff.T + diff
        return np.concatenate([dm, dc.ravel()])

    y0 = np.concatenate([np.asarray(mean0, float), np.asarray(cov0, float).ravel()])
    sol = solve_ivp(
        rhs, (times[0], times[-1]), y0, t_eval=times, rtol=1e-10, atol=1e-12
    )
    means = sol.y[:4].T
    covs = sol.y[4:].T.reshape(len(times), 4, 4)
    return means, covs


def photon_stats_from_moments(mean, cov):
    """Mean and variance of the photon number from Gaussian moments.

    Independent re-derivation: for a Gaussian state with quadrature
    means (qbar, pbar) and covariance block S on (q, p),
    <n> = (qbar^2 + pbar^2 + tr S)/2 - 1/2 and
    Var n = (tr(S @ S) )/2 + v^T S v - 1/4 with v = (qbar, pbar).
    """
    v = np.asarray(mean[2:4], float)
    s = np.asarray(cov[2:4, 2:4], float)
    mean_n = 0.5 * (v @ v + np.trace(s)) - 0.5
    var_n = 0.5 * np.trace(s @ s) + v @ s @ v - 0.25
    return mean_n, var_n


def initial_matter_mandel_q_reference(x0, w):
    """Closed-form Mandel Q of a displaced squeezed single mode."""
    w2 = w**2
    num = (1.0 - w2) ** 2 * (1.0 + w2**2) - 4.0 * w2**2 * (1.0 - w2) * x0**2
    den = 4.0 * w2**2 * x0**2 + 2.0 * w2 * (1.0 - w2) ** 2
    return num / den


def displaced_squeezed_reference(x0, w, dim):
    """Matter initial state via operator exponentials only."""
    a = destroy_reference(dim)
    adag = a.conj().T
    alpha = x0 / np.sqrt(2.0)
    r = -np.log(w)
    vac = np.zeros(dim, complex)
    vac[0] = 1.0
    disp = expm(alpha * adag - np.conj(alpha) * a)
    squeeze = expm(0.5 * r * (a @ a - adag @ adag))
    psi = disp @ (squeeze @ vac)
    return psi / np.linalg.norm(psi)

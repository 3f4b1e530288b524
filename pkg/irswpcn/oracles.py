"""
Brute-force reference solutions for tiny instances: grid searches over the
duration simplex, the relative phase of a 2-element reflect vector and the
2 x 2 unit-diagonal PSD set.
"""
import logging
import math

import numpy as np

from irswpcn.time_alloc import ClusterGains, allocate, allocation_throughput

logger = logging.getLogger(__name__)


def simplex_grid_allocation(gamma, T, step):
    """
    Best (tau0, tau) on the grid {tau0 + sum(tau) = T} with spacing `step`.
    Returns (values, tau0, tau) where tau has one entry per cluster.
    """
    gamma = np.asarray(gamma, dtype=float)
    K = gamma.size
    ticks = np.arange(0, T + step / 2, step)
    axes = np.meshgrid(*([ticks] * K), indexing="ij")
    tau0 = axes[0].ravel()
    tau = [a.ravel() for a in axes[1:]]
    last = T - tau0 - sum(tau)
    keep = last >= -step / 2
    tau0 = tau0[keep]
    tau = [t[keep] for t in tau] + [np.maximum(last[keep], 0.0)]
    value = _allocation_values(gamma, tau0, tau)
    best = int(np.argmax(value))
    return float(value[best]), float(tau0[best]), tuple(float(t[best]) for t in tau)


def _allocation_values(gamma, tau0, tau):
    value = np.zeros_like(tau0)
    for g, t in zip(gamma, tau):
        with np.errstate(divide="ignore", invalid="ignore"):
            term = t * np.log2(1 + g * tau0 / t)
        value += np.where(t > 0, term, 0.0)
    return value


def refine_allocation(gamma, T, tau0, tau, step, final_step, max_passes=200):
    """
    Local grid refinement of a simplex grid optimum: search a 9-point window
    of half-width `step` around the incumbent in every free coordinate,
    re-center, and shrink the window 4x whenever the optimum is interior,
    until the window spacing is at most `final_step`.
    Returns (value, tau0, tau) like `simplex_grid_allocation`.
    """
    gamma = np.asarray(gamma, dtype=float)
    center = np.array([tau0, *tau[:-1]], dtype=float)
    offsets = np.linspace(-1.0, 1.0, 9)
    for _ in range(max_passes):
        axes = np.meshgrid(*[c + step * offsets for c in center], indexing="ij")
        points = np.stack([a.ravel() for a in axes])
        last = T - points.sum(axis=0)
        keep = np.all(points >= 0, axis=0) & (last >= 0)
        points, last = points[:, keep], last[keep]
        value = _allocation_values(gamma, points[0], [*points[1:], last])
        best = int(np.argmax(value))
        on_edge = np.any(np.isclose(np.abs(points[:, best] - center), step))
        center = points[:, best]
        if on_edge:
            continue
        if step / 4 <= final_step:
            break
        step /= 4
    tau = (*center[1:], T - float(np.sum(center)))
    return float(value[best]), float(center[0]), tuple(float(t) for t in tau)


def _phase_vectors(step):
    phi = np.arange(0, 2 * math.pi, step)
    return np.stack([np.ones_like(phi, dtype=complex), np.exp(1j * phi)], axis=1)


def _quadratic_forms(vectors, A):
    # w^H A w for every row w
    return np.real(np.einsum("pi,ij,pj->p", vectors.conj(), A, vectors))


def _gains(vectors, channels):
    """|w^H v|^2 with one row per channel v and one column per grid vector w."""
    return np.stack(
        [_quadratic_forms(vectors, np.outer(v, v.conj())) for v in channels]
    )


def phase_grid_linear(C, step=math.pi / 1000):
    """max over w = [1, e^{j phi}] of w^H C w."""
    return float(np.max(_quadratic_forms(_phase_vectors(step), np.asarray(C))))


def phase_grid_log(terms, step=math.pi / 1000):
    """max over w = [1, e^{j phi}] of sum tau log2(1 + lam w^H G w)."""
    w = _phase_vectors(step)
    value = sum(
        t.tau * np.log2(1 + t.lam * np.maximum(_quadratic_forms(w, t.G), 0))
        for t in terms
    )
    return float(np.max(value))


def elliptope_grid(objective, points=2000):
    """
    max of objective(W) over 2 x 2 unit-diagonal PSD W = [[1, z], [z*, 1]],
    |z| <= 1, on a points x points (rho, phi) grid. `objective` gets the
    array of off-diagonal entries and returns an array of values.
    """
    rho = np.linspace(0, 1, points)
    phi = np.linspace(0, 2 * math.pi, points, endpoint=False)
    z = (rho[:, None] * np.exp(1j * phi[None, :])).ravel()
    return float(np.max(objective(z)))


def linear_on_elliptope(C):
    C = np.asarray(C)
    return lambda z: np.real(C[0, 0] + C[1, 1] + 2 * np.real(C[1, 0] * z))


def log_on_elliptope(terms):
    def value(z):
        total = 0.0
        for t in terms:
            trace = linear_on_elliptope(t.G)(z)
            total = total + t.tau * np.log2(1 + t.lam * np.maximum(trace, 0))
        return total

    return value


def exhaustive_throughput(params, chans, step=math.pi / 200):
    """
    Best throughput over 2-element reflect vectors [1, e^{j phi}] for w_0 and
    every w_k, each point followed by the optimal durations.

    The optimal duration value grows with every cluster gain and gamma_k
    depends on w_k alone, so for each w_0 the uplink phases are maximized
    cluster by cluster.
    """
    if chans.N != 2:
        raise ValueError("exhaustive search is only defined for N = 2")
    w = _phase_vectors(step)
    scale = params.eta * params.P0 / params.sigma2
    down = [_gains(w, chans.cascaded_downlink(k)) for k in range(chans.K)]
    up = [_gains(w, chans.cascaded_uplink(k)) for k in range(chans.K)]
    best = -math.inf
    for p in range(w.shape[0]):
        gamma = [scale * float(np.max(down[k][:, p] @ up[k])) for k in range(chans.K)]
        gains = ClusterGains(tuple(gamma))
        best = max(best, allocation_throughput(gains, allocate(gains, params.T)))
    logger.debug(f"exhaustive optimum {best:.6g} over {w.shape[0]} downlink phases")
    return best

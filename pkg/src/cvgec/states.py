"""Phase-space representation of multimode Gaussian states.

A state of N bosonic modes is carried as a mean vector and covariance
matrix over the quadratures, interleaved as (x1, p1, ..., xN, pN).  We use
the convention [x, p] = i, so the vacuum has variance 1/2 per quadrature;
shot-noise units (SNU) normalize variances to that value.

All types are immutable values and every operation is a pure function of
its inputs, so states can be shared and evaluated in parallel freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

#: Quadrature variance of the vacuum in natural units.
VACUUM_VARIANCE = 0.5

_SYMMETRY_TOL = 1e-12
_NOISE_PSD_TOL = -1e-10
_PHYSICALITY_TOL = 1e-9


class QuadratureAxis(Enum):
    """The two field quadratures of a mode."""

    X = 0
    P = 1


@dataclass(frozen=True)
class Quadrature:
    """A single quadrature slot: mode index plus X or P axis."""

    mode: int
    axis: QuadratureAxis

    def index(self) -> int:
        """Position of this quadrature in the interleaved ordering."""
        return 2 * self.mode + self.axis.value


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state of one or more modes.

    Args:
        mean: real vector of length 2N, ordered (x1, p1, ..., xN, pN).
        cov: real symmetric 2N x 2N covariance matrix in the same ordering,
            natural units (vacuum variance 1/2).

    Symmetry of ``cov`` is enforced to 1e-12 on construction.  Physicality
    (symplectic eigenvalues >= 1/2) is *not* enforced here; use
    :func:`physicality_check` to test it.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if mean.size == 0 or mean.size % 2 != 0:
            raise ValueError("need a positive even number of quadratures")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance shape {cov.shape} does not match mean length {mean.size}"
            )
        scale = max(1.0, float(np.max(np.abs(cov))))  # relative for large covariances
        if np.max(np.abs(cov - cov.T)) > _SYMMETRY_TOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2


def symplectic_form(n_modes: int) -> np.ndarray:
    """The 2N x 2N symplectic form for the (x, p)-interleaved ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum_state(n: int) -> GaussianState:
    """N-mode vacuum: zero mean, covariance (1/2) * identity."""
    if n < 1:
        raise ValueError("need at least one mode")
    return GaussianState(np.zeros(2 * n), VACUUM_VARIANCE * np.eye(2 * n))


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    """Shift the mean of one mode by (dx, dp); the covariance is unchanged."""
    _check_mode(state, mode)
    mean = state.mean.copy()
    mean[2 * mode] += dx
    mean[2 * mode + 1] += dp
    return GaussianState(mean, state.cov)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state with the modes of ``b`` appended after those of ``a``."""
    mean = np.concatenate([a.mean, b.mean])
    cov = np.zeros((mean.size, mean.size))
    na = a.mean.size
    cov[:na, :na] = a.cov
    cov[na:, na:] = b.cov
    return GaussianState(mean, cov)


def add_noise(state: GaussianState, noise_cov: np.ndarray) -> GaussianState:
    """Add zero-mean classical noise with the given covariance.

    ``noise_cov`` must be symmetric positive semidefinite (eigenvalues
    >= -1e-10 to absorb rounding) and match the state dimension.
    """
    noise_cov = np.asarray(noise_cov, dtype=float)
    if noise_cov.shape != state.cov.shape:
        raise ValueError("noise covariance dimension mismatch")
    if np.max(np.abs(noise_cov - noise_cov.T)) > _SYMMETRY_TOL:
        raise ValueError("noise covariance is not symmetric")
    if np.linalg.eigvalsh(noise_cov).min() < _NOISE_PSD_TOL:
        raise ValueError("noise covariance is not positive semidefinite")
    return GaussianState(state.mean, state.cov + noise_cov)


def partial_trace(state: GaussianState, keep) -> GaussianState:
    """Reduced state over the kept modes (ascending mode order)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    for k in keep:
        _check_mode(state, k)
    idx = np.array([2 * k + q for k in keep for q in (0, 1)])
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def quadrature_variance(state: GaussianState, q: Quadrature) -> float:
    """Variance of a single quadrature in natural units."""
    _check_mode(state, q.mode)
    k = q.index()
    return float(state.cov[k, k])


def as_snu(variance: float) -> float:
    """Convert a natural-units variance to shot-noise units (vacuum = 1)."""
    return variance / VACUUM_VARIANCE


def duan_simon(state: GaussianState, pair: tuple[int, int]) -> float:
    """Inseparability number Var(x_i - x_j) + Var(p_i + p_j).

    Second moments are taken about the mean.  Values below 2 certify
    entanglement of the mode pair; any product of single-mode states
    yields at least 2.
    """
    i, j = pair
    if i == j:
        raise ValueError("need two distinct modes")
    _check_mode(state, i)
    _check_mode(state, j)
    c = state.cov
    xi, xj = 2 * i, 2 * j
    pi, pj = xi + 1, xj + 1
    var_x = c[xi, xi] + c[xj, xj] - 2.0 * c[xi, xj]
    var_p = c[pi, pi] + c[pj, pj] + 2.0 * c[pi, pj]
    return float(var_x + var_p)


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Symplectic spectrum of the covariance matrix, ascending.

    The N values are the moduli of the (paired) eigenvalues of
    i * Omega * cov; a physical state has all of them >= 1/2.
    """
    ev = np.linalg.eigvals(symplectic_form(state.n_modes) @ state.cov)
    return np.sort(np.abs(ev))[::2]


def physicality_check(state: GaussianState) -> bool:
    """True if the state satisfies the uncertainty principle.

    Checks min symplectic eigenvalue >= 1/2 - 1e-9; returns a status
    rather than raising.
    """
    return bool(symplectic_eigenvalues(state).min() >= VACUUM_VARIANCE - _PHYSICALITY_TOL)


def to_json(state: GaussianState) -> str:
    """Debug serialization: n_modes, mean, and row-major covariance."""
    return json.dumps(
        {
            "n_modes": state.n_modes,
            "mean": state.mean.tolist(),
            "cov": state.cov.ravel().tolist(),
        }
    )


def from_json(text: str) -> GaussianState:
    """Inverse of :func:`to_json`."""
    obj = json.loads(text)
    n = int(obj["n_modes"])
    mean = np.array(obj["mean"], dtype=float)
    cov = np.array(obj["cov"], dtype=float).reshape(2 * n, 2 * n)
    return GaussianState(mean, cov)


def _check_mode(state: GaussianState, mode: int) -> None:
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")

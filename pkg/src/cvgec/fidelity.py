"""Uhlmann fidelity for single-mode Gaussian states.

Uses the closed form for one mode: with covariances A, B, mean difference
d and
    Delta = det(A + B),   Lambda = 4 (det A - 1/4) (det B - 1/4),
the fidelity is
    F = exp(-d^T (A + B)^{-1} d / 2) / (sqrt(Delta + Lambda) - sqrt(Lambda)).
For two coherent states this reduces to exp(-|d|^2 / 2) and it equals 1
exactly on identical states.  Multimode fidelity is out of scope.
"""

from __future__ import annotations

import numpy as np

from .states import GaussianState


def fidelity(a: GaussianState, b: GaussianState) -> float:
    """Fidelity between two single-mode Gaussian states, in [0, 1]."""
    if a.n_modes != 1 or b.n_modes != 1:
        raise ValueError("fidelity is implemented for single-mode states only")
    total = a.cov + b.cov
    delta = a.mean - b.mean
    det_total = float(np.linalg.det(total))
    lam = 4.0 * (np.linalg.det(a.cov) - 0.25) * (np.linalg.det(b.cov) - 0.25)
    lam = max(float(lam), 0.0)  # clip rounding on near-pure states
    arg = -0.5 * delta @ np.linalg.solve(total, delta)
    f = float(np.exp(arg) / (np.sqrt(det_total + lam) - np.sqrt(lam)))
    return min(max(f, 0.0), 1.0)

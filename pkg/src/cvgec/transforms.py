"""Symplectic transforms: beam splitters, phase shifts, squeezers.

A transform stores its matrix over an explicit tuple of target modes and
is embedded into the full mode space when applied, so the same element can
act on any state that contains those modes.  Construction verifies the
symplectic identity S Omega S^T = Omega to 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .states import GaussianState, symplectic_form, vacuum_state

_SYMPLECTIC_TOL = 1e-12
_MAX_SQUEEZING = 20.0


class BsConvention(Enum):
    """Sign convention of the beam-splitter amplitudes.

    PI_FLIP places a relative pi phase on the second output, giving the
    mode matrix ((sqrt(T), -sqrt(1-T)), (-sqrt(1-T), -sqrt(T))).  This is
    the convention under which an encode/decode pair with equal
    transmissivity composes to the identity and correlated noise cancels.
    ROTATION is the proper rotation ((sqrt(T), sqrt(1-T)),
    (-sqrt(1-T), sqrt(T))).
    """

    PI_FLIP = "pi_flip"
    ROTATION = "rotation"


@dataclass(frozen=True)
class SymplecticTransform:
    """Linear phase-space map acting on the listed modes.

    Args:
        matrix: 2k x 2k real symplectic matrix over the k target modes,
            quadratures interleaved per mode.
        modes: the k distinct state modes the matrix acts on, in matrix
            block order.
        displacement: optional length-2k shift added after the linear map.
    """

    matrix: np.ndarray
    modes: tuple[int, ...]
    displacement: np.ndarray | None = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        modes = tuple(int(m) for m in self.modes)
        if len(set(modes)) != len(modes):
            raise ValueError("target modes must be distinct")
        k = len(modes)
        if matrix.shape != (2 * k, 2 * k):
            raise ValueError("matrix shape does not match number of target modes")
        omega = symplectic_form(k)
        if np.max(np.abs(matrix @ omega @ matrix.T - omega)) > _SYMPLECTIC_TOL:
            raise ValueError("matrix is not symplectic")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "modes", modes)
        if self.displacement is not None:
            disp = np.array(self.displacement, dtype=float)
            if disp.shape != (2 * k,):
                raise ValueError("displacement length does not match target modes")
            disp.flags.writeable = False
            object.__setattr__(self, "displacement", disp)

    @property
    def n_modes(self) -> int:
        return len(self.modes)


def expand(t: SymplecticTransform, n_modes: int) -> np.ndarray:
    """Full 2N x 2N matrix of ``t`` acting inside an N-mode space."""
    if max(t.modes) >= n_modes:
        raise ValueError("transform targets a mode outside the state")
    full = np.eye(2 * n_modes)
    idx = _quad_indices(t.modes)
    full[np.ix_(idx, idx)] = t.matrix
    return full


def apply(t: SymplecticTransform, state: GaussianState) -> GaussianState:
    """Evolve a state: mean -> S mean (+ displacement), cov -> S cov S^T."""
    s = expand(t, state.n_modes)
    mean = s @ state.mean
    if t.displacement is not None:
        mean[_quad_indices(t.modes)] += t.displacement
    return GaussianState(mean, s @ state.cov @ s.T)


def compose(second: SymplecticTransform, first: SymplecticTransform) -> SymplecticTransform:
    """The transform equal to ``first`` followed by ``second``."""
    modes = tuple(sorted(set(first.modes) | set(second.modes)))
    pos = {m: i for i, m in enumerate(modes)}
    n = len(modes)

    def embed(t):
        full = np.eye(2 * n)
        idx = _quad_indices(tuple(pos[m] for m in t.modes))
        full[np.ix_(idx, idx)] = t.matrix
        return full

    s1, s2 = embed(first), embed(second)
    disp = np.zeros(2 * n)
    if first.displacement is not None:
        disp[_quad_indices(tuple(pos[m] for m in first.modes))] += first.displacement
    disp = s2 @ disp
    if second.displacement is not None:
        disp[_quad_indices(tuple(pos[m] for m in second.modes))] += second.displacement
    has_disp = first.displacement is not None or second.displacement is not None
    return SymplecticTransform(s2 @ s1, modes, disp if has_disp else None)


def beam_splitter_matrix(t: float, convention: BsConvention = BsConvention.PI_FLIP) -> np.ndarray:
    """2x2 mode-amplitude matrix of a beam splitter with transmissivity t."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    c = np.sqrt(t)
    s = np.sqrt(1.0 - t)
    if convention is BsConvention.PI_FLIP:
        return np.array([[c, -s], [-s, -c]])
    return np.array([[c, s], [-s, c]])


def beam_splitter(
    t: float,
    modes: tuple[int, int],
    convention: BsConvention = BsConvention.PI_FLIP,
) -> SymplecticTransform:
    """Beam splitter of transmissivity ``t`` between two modes.

    Both quadratures transform with the same real amplitude matrix, so the
    symplectic matrix is the mode matrix tensored with the 2x2 identity.
    """
    i, j = modes
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    b = beam_splitter_matrix(t, convention)
    return SymplecticTransform(np.kron(b, np.eye(2)), (i, j))


def phase_shift(phi: float, mode: int) -> SymplecticTransform:
    """Phase-space rotation by ``phi`` on one mode; phi = pi flips signs."""
    c, s = np.cos(phi), np.sin(phi)
    return SymplecticTransform(np.array([[c, s], [-s, c]]), (mode,))


def squeeze(r: float, theta: float = 0.0, mode: int = 0) -> SymplecticTransform:
    """Single-mode squeezer.

    At theta = 0 the x variance scales by exp(-2r) and the p variance by
    exp(+2r); theta rotates the squeezing axis.  |r| > 20 is rejected to
    avoid overflow, far beyond any regime of interest.
    """
    if not np.isfinite(r) or abs(r) > _MAX_SQUEEZING:
        raise ValueError("squeezing parameter out of supported range")
    rot = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    core = np.diag([np.exp(-r), np.exp(r)])
    return SymplecticTransform(rot @ core @ rot.T, (mode,))


def two_mode_squeezed(r: float) -> GaussianState:
    """Two-mode squeezed vacuum.

    Built by squeezing the two vacua along orthogonal quadratures (+r on
    mode 0, -r on mode 1) and interfering them on a balanced beam splitter.
    Its inseparability number is 2 exp(-2r).
    """
    state = vacuum_state(2)
    state = apply(squeeze(r, 0.0, mode=0), state)
    state = apply(squeeze(-r, 0.0, mode=1), state)
    return apply(beam_splitter(0.5, (0, 1)), state)


def _quad_indices(modes: tuple[int, ...]) -> list[int]:
    return [2 * m + q for m in modes for q in (0, 1)]

"""Passive-network synthesis: orthogonal matrices as beam-splitter meshes.

A real orthogonal N x N mode matrix is factored by triangular elimination
with Givens-style two-mode rotations into at most N(N-1)/2 beam splitters
plus single-mode pi phase flips.  Plans serialize to a line-oriented text
format (one element per line) used by the `synth` CLI command.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .transforms import BsConvention, beam_splitter, phase_shift

_ORTHO_TOL = 1e-10
_RECOMPOSE_TOL = 1e-10


@dataclass(frozen=True)
class BeamSplitterElement:
    """Two-mode beam splitter, rotation convention, transmissivity t."""

    mode_a: int
    mode_b: int
    t: float


@dataclass(frozen=True)
class PhaseShiftElement:
    """Single-mode phase shift by ``phi`` radians (pi is a sign flip)."""

    mode: int
    phi: float


@dataclass(frozen=True)
class NetworkPlan:
    """Ordered element list realizing a target orthogonal mode matrix.

    Elements are listed in application order (the first element acts
    first).  Construction verifies that recomposing the elements
    reproduces the target to 1e-10.
    """

    elements: tuple
    target: np.ndarray

    def __post_init__(self):
        target = np.array(self.target, dtype=float)
        target.flags.writeable = False
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "elements", tuple(self.elements))
        n = target.shape[0]
        if target.shape != (n, n):
            raise ValueError("target must be square")
        err = np.max(np.abs(plan_symplectic(self) - np.kron(target, np.eye(2))))
        if err > _RECOMPOSE_TOL:
            raise ValueError(f"plan does not recompose its target (error {err:.3e})")

    @property
    def n_modes(self) -> int:
        return self.target.shape[0]


def element_symplectic(element, n_modes: int) -> np.ndarray:
    """Full 2N x 2N symplectic matrix of a single plan element."""
    from .transforms import expand

    if isinstance(element, BeamSplitterElement):
        t = beam_splitter(element.t, (element.mode_a, element.mode_b), BsConvention.ROTATION)
    elif isinstance(element, PhaseShiftElement):
        t = phase_shift(element.phi, element.mode)
    else:
        raise TypeError(f"unknown plan element {element!r}")
    return expand(t, n_modes)


def plan_symplectic(plan: NetworkPlan) -> np.ndarray:
    """Recomposed 2N x 2N symplectic matrix of the whole plan."""
    n = plan.target.shape[0]
    total = np.eye(2 * n)
    for element in plan.elements:
        total = element_symplectic(element, n) @ total
    return total


def decompose_network(u: np.ndarray) -> NetworkPlan:
    """Factor a real orthogonal matrix into beam splitters and sign flips.

    Subdiagonal entries are eliminated column by column with two-mode
    rotations; the leftover diagonal of signs becomes leading pi flips.
    The returned plan applies its elements in order to realize ``u``; the
    decode plan for the transposed matrix is given by :func:`inverse_plan`.
    """
    u = np.array(u, dtype=float)
    n = u.shape[0]
    if u.shape != (n, n) or np.max(np.abs(u.T @ u - np.eye(n))) > _ORTHO_TOL:
        raise ValueError("input must be a real orthogonal matrix")

    work = u.copy()
    givens = []  # (j, i, c, s) with rows (j, i) hit by ((c, s), (-s, c))
    for j in range(n - 1):
        for i in range(j + 1, n):
            if work[i, j] == 0.0:
                continue
            h = np.hypot(work[j, j], work[i, j])
            c, s = work[j, j] / h, work[i, j] / h
            rot = np.array([[c, s], [-s, c]])
            work[[j, i], :] = rot @ work[[j, i], :]
            givens.append((j, i, c, s))

    elements = []
    for k in range(n):  # leftover diagonal of +-1
        if work[k, k] < 0:
            elements.append(PhaseShiftElement(k, np.pi))
    # u = G_1^T ... G_m^T D, so apply D first, then the transposed
    # rotations in reverse recording order.
    for j, i, c, s in reversed(givens):
        elements.extend(_rotation_elements(j, i, c, -s))
    return NetworkPlan(tuple(elements), u)


def inverse_plan(plan: NetworkPlan) -> NetworkPlan:
    """Plan realizing the transposed (inverse) target: reverse and invert."""
    elements = []
    for element in reversed(plan.elements):
        if isinstance(element, PhaseShiftElement):
            elements.append(PhaseShiftElement(element.mode, -element.phi))
        else:
            # BS(t)^T = F_b BS(t) F_b with F_b the sign flip on mode_b.
            elements.append(PhaseShiftElement(element.mode_b, np.pi))
            elements.append(BeamSplitterElement(element.mode_a, element.mode_b, element.t))
            elements.append(PhaseShiftElement(element.mode_b, np.pi))
    return NetworkPlan(tuple(elements), plan.target.T)


def complete_orthonormal(first_column: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is the given unit vector.

    Remaining columns come from orthonormalizing the standard basis, so
    the completion is deterministic.
    """
    s = np.asarray(first_column, dtype=float)
    n = s.size
    if abs(np.linalg.norm(s) - 1.0) > 1e-9:
        raise ValueError("first column must be a unit vector")
    cols = [s]
    for k in range(n):
        if len(cols) == n:
            break
        r = np.zeros(n)
        r[k] = 1.0
        for _ in range(2):
            for q in cols:
                r -= (q @ r) * q
        norm = np.linalg.norm(r)
        if norm > 1e-9:
            cols.append(r / norm)
    if len(cols) != n:
        raise ValueError("failed to complete the basis")
    return np.column_stack(cols)


def target_checksum(target: np.ndarray) -> str:
    """Identity stamp of a target matrix: sha256 over 1e-12-rounded entries."""
    text = " ".join(format(x, ".12f") for x in np.asarray(target, dtype=float).ravel())
    return hashlib.sha256(text.encode()).hexdigest()


def serialize_plan(plan: NetworkPlan) -> str:
    """Line-oriented text form: header (N, target checksum), then elements."""
    lines = [f"N {plan.n_modes}", f"checksum {target_checksum(plan.target)}"]
    for element in plan.elements:
        if isinstance(element, BeamSplitterElement):
            lines.append(
                f"BS {element.mode_a} {element.mode_b} {format(element.t, '.17g')}"
            )
        else:
            lines.append(f"PS {element.mode} {format(element.phi, '.17g')}")
    return "\n".join(lines) + "\n"


def parse_plan(text: str) -> tuple[NetworkPlan, str]:
    """Parse the text format; returns the plan and the header checksum.

    The plan's target is reconstructed by recomposing the elements, so the
    checksum serves as an identity stamp for consumers that hold the
    original matrix ('#' lines are ignored).
    """
    n = None
    checksum = ""
    elements = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "N":
                n = int(parts[1])
            elif parts[0] == "checksum":
                checksum = parts[1]
            elif parts[0] == "BS":
                elements.append(
                    BeamSplitterElement(int(parts[1]), int(parts[2]), float(parts[3]))
                )
            elif parts[0] == "PS":
                elements.append(PhaseShiftElement(int(parts[1]), float(parts[2])))
            else:
                raise ValueError(f"unknown element {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad plan line {lineno}: {raw!r}") from exc
    if n is None:
        raise ValueError("plan is missing its N header")
    total = np.eye(2 * n)
    for element in elements:
        total = element_symplectic(element, n) @ total
    target = total[::2, ::2]  # mode matrix: x-block of the symplectic form
    return NetworkPlan(tuple(elements), target), checksum


def _rotation_elements(j: int, i: int, c: float, s: float) -> list:
    """Elements realizing the rotation ((c, s), (-s, c)) on modes (j, i)."""
    out = []
    if c < 0:  # pull out a global sign: R(theta) = R(theta - pi) * R(pi)
        out.append(PhaseShiftElement(j, np.pi))
        out.append(PhaseShiftElement(i, np.pi))
        c, s = -c, -s
    t = min(max(c * c, 0.0), 1.0)
    if s >= 0:
        out.append(BeamSplitterElement(j, i, t))
    else:
        # ((c, -|s|), (|s|, c)) = F_i BS(t) F_i
        out.append(PhaseShiftElement(i, np.pi))
        out.append(BeamSplitterElement(j, i, t))
        out.append(PhaseShiftElement(i, np.pi))
    return out

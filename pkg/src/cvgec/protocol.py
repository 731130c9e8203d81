"""Beam-splitter encode/decode error correction for correlated noise.

The two-channel scheme splits the signal and an auxiliary vacuum over the
two noisy channels with an encoding beam splitter (pi-flip convention) and
coherently recombines them with a decoding beam splitter.  At
T_e = T_d = g2 / (g1 + g2) the shared classical noise exits entirely
through the discarded decoder port and the signal port sees a purely lossy
channel, for any noise variance.

Also provided: the direct (unencoded) transmission used as the
"uncorrected" reference, an incoherent measure-and-feedforward baseline,
and the N-channel generalization that encodes the signal into the common
null space of all noise coupling patterns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, NoiseSource, apply_channel
from .network import complete_orthonormal
from .states import GaussianState, displace, partial_trace, tensor, vacuum_state
from .transforms import (
    BsConvention,
    SymplecticTransform,
    apply,
    beam_splitter,
    beam_splitter_matrix,
)

_NULL_TOL = 1e-9


class NoProtectedSubspaceError(ValueError):
    """The noise patterns span every channel mode; no signal mode is safe."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Settings for one run of the two-channel scheme.

    ``signal_mode`` names the input mode of the state that enters the
    encoder; the auxiliary encoder input is always a fresh vacuum appended
    by the protocol.
    """

    T_e: float
    T_d: float
    channel: ChannelModel
    signal_mode: int = 0

    def __post_init__(self):
        if not 0.0 <= self.T_e <= 1.0 or not 0.0 <= self.T_d <= 1.0:
            raise ValueError("transmissivities must lie in [0, 1]")
        if self.channel.n_channels < 2:
            raise ValueError("the protocol needs at least two channels")


@dataclass(frozen=True)
class NoisePatternSet:
    """Coupling amplitude vectors of independent noise sources over N channels."""

    patterns: tuple[np.ndarray, ...]

    def __post_init__(self):
        patterns = tuple(np.array(p, dtype=float) for p in self.patterns)
        if not patterns:
            raise ValueError("need at least one pattern")
        n = patterns[0].size
        if any(p.ndim != 1 or p.size != n for p in patterns):
            raise ValueError("all patterns must be vectors of equal length")
        for p in patterns:
            p.flags.writeable = False
        object.__setattr__(self, "patterns", patterns)

    @property
    def n_channels(self) -> int:
        return self.patterns[0].size


def optimal_splitting(g1: float, g2: float) -> float:
    """Noise-cancelling transmissivity g2 / (g1 + g2) for both splitters."""
    if g1 <= 0 or g2 <= 0:
        raise ValueError("noise magnitudes must be positive")
    return g2 / (g1 + g2)


def optimal_splitting_for(model: ChannelModel) -> float:
    """Optimal transmissivity read off a two-channel, single-source model."""
    if model.n_channels != 2 or len(model.sources) != 1:
        raise ValueError("need a two-channel model with exactly one source")
    c = model.sources[0].coupling
    return optimal_splitting(c[0] ** 2, c[1] ** 2)


def encode(state: GaussianState, t_e: float, modes: tuple[int, int] = (0, 1)) -> GaussianState:
    """Split the signal over the two channel inputs (pi-flip convention)."""
    return apply(beam_splitter(t_e, modes, BsConvention.PI_FLIP), state)


def decode(state: GaussianState, t_d: float, modes: tuple[int, int] = (0, 1)) -> GaussianState:
    """Recombine the channel outputs; the first mode is the signal port,
    the second the discarded noise port."""
    return apply(beam_splitter(t_d, modes, BsConvention.PI_FLIP), state)


def run_protocol(cfg: ProtocolConfig, state: GaussianState, signal_mode: int | None = None) -> GaussianState:
    """Encode, transmit, decode; keep both decoder ports.

    Returns a state over the original modes plus one extra: the signal
    slot holds the corrected output and the appended final mode is the
    discarded decoder port.  Mismatched (non-interfering) noise booked by
    the channel is routed onto both ports with the decoder amplitudes
    before the bookkeeping modes are dropped.
    """
    if cfg.channel.n_channels != 2:
        raise ValueError("run_protocol drives the two-channel scheme")
    sig = cfg.signal_mode if signal_mode is None else signal_mode
    n0 = state.n_modes
    st = tensor(state, vacuum_state(1))  # auxiliary encoder input at n0
    ports = (sig, n0)
    st = encode(st, cfg.T_e, ports)
    st = apply_channel(st, ports, cfg.channel)
    st = decode(st, cfg.T_d, ports)
    routing = beam_splitter_matrix(cfg.T_d, BsConvention.PI_FLIP)
    st = _fold_noninterfering(st, ports, routing, book_start=n0 + 1, model=cfg.channel)
    return partial_trace(st, range(n0 + 1))


def corrected_channel(cfg: ProtocolConfig, state: GaussianState, signal_mode: int | None = None) -> GaussianState:
    """End-to-end corrected transmission; the discarded port is dropped.

    With T_e = T_d = optimal_splitting(g1, g2) and no mismatch this equals
    a pure-loss channel of transmissivity eta on the signal mode.
    """
    n0 = state.n_modes
    return partial_trace(run_protocol(cfg, state, signal_mode), range(n0))


def uncorrected_channel(
    cfg: ProtocolConfig,
    state: GaussianState,
    signal_mode: int | None = None,
    channel: int = 0,
) -> GaussianState:
    """Direct transmission through a single channel, no encoding.

    The signal mode is assigned to ``channel``; every other channel
    carries a fresh vacuum.  This is the reference curve a decoder set to
    full transmission measures.
    """
    sig = cfg.signal_mode if signal_mode is None else signal_mode
    model = cfg.channel
    if not 0 <= channel < model.n_channels:
        raise ValueError("channel index out of range")
    n0 = state.n_modes
    st = tensor(state, vacuum_state(model.n_channels - 1))
    carriers = []
    extra = n0
    for i in range(model.n_channels):
        if i == channel:
            carriers.append(sig)
        else:
            carriers.append(extra)
            extra += 1
    st = apply_channel(st, tuple(carriers), model)
    routing = np.zeros((1, model.n_channels))
    routing[0, channel] = 1.0
    st = _fold_noninterfering(st, (sig,), routing, book_start=n0 + model.n_channels - 1, model=model)
    return partial_trace(st, range(n0))


def incoherent_strategy(cfg: ProtocolConfig, state: GaussianState, signal_mode: int | None = None) -> GaussianState:
    """Measure-and-feedforward baseline on the idle channel.

    The signal travels channel 1 unencoded while channel 2 carries only
    vacuum plus the correlated noise.  Channel 2's output is read out in
    both quadratures (balanced split against a vacuum, then ideal x and p
    readouts) and the outcomes displace the signal output with the
    noise-cancelling gain -sqrt(2 g1 / g2).  The correlated noise cancels
    in the mean square; the measurement leaves an excess-noise penalty of
    g1 / g2 natural units per quadrature, independent of the noise level.
    Implemented as the Gaussian conditional (Schur-complement) update
    composed with the outcome-proportional displacement, which collapses
    to a linear covariance update over the joint Gaussian.
    """
    model = cfg.channel
    if model.n_channels != 2:
        raise ValueError("the incoherent baseline is defined for two channels")
    if len(model.sources) != 1:
        raise ValueError("the incoherent baseline assumes a single correlated source")
    c1, c2 = model.sources[0].coupling
    if c2 == 0:
        raise ValueError("nothing to measure: the idle channel carries no noise")
    sig = cfg.signal_mode if signal_mode is None else signal_mode

    n0 = state.n_modes
    st = tensor(state, vacuum_state(1))  # idle-channel carrier at n0
    st = apply_channel(st, (sig, n0), model)
    book_start = n0 + 1
    n_book = 2 * len(model.sources)
    anc = book_start + n_book
    st = tensor(st, vacuum_state(1))  # heterodyne ancilla
    bs = beam_splitter_matrix(0.5, BsConvention.PI_FLIP)
    st = apply(beam_splitter(0.5, (n0, anc), BsConvention.PI_FLIP), st)

    # Outcomes: x at the first splitter port, p at the second.  The gain
    # cancelling the correlated term follows from the port amplitudes.
    y_idx = [2 * n0, 2 * anc + 1]
    gain_x = -c1 / (bs[0, 0] * c2)
    gain_p = -c1 / (bs[1, 0] * c2)
    gains = np.zeros((st.mean.size, 2))
    gains[2 * sig, 0] = gain_x
    gains[2 * sig + 1, 1] = gain_p
    st = _feedforward(st, y_idx, gains)

    routing = np.array([[1.0, 0.0]])
    st = _fold_noninterfering(st, (sig,), routing, book_start=book_start, model=model)
    return partial_trace(st, range(n0))


def characterize_single_mode_map(channel_fn) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Probe a Gaussian map on one mode and return (X, d, Y).

    The map acts as mean -> X mean + d and cov -> X cov X^T + Y; it is
    reconstructed from the images of the vacuum and two displaced vacua.
    """
    base = channel_fn(vacuum_state(1))
    d = base.mean
    x = np.zeros((2, 2))
    for k in range(2):
        probe = displace(vacuum_state(1), 0, 1.0 if k == 0 else 0.0, 1.0 if k == 1 else 0.0)
        x[:, k] = channel_fn(probe).mean - d
    y = base.cov - 0.5 * x @ x.T
    return x, d, y


def pure_loss_reference(state: GaussianState, eta: float, mode: int = 0) -> GaussianState:
    """Pure-loss map of transmissivity eta applied to one mode of a state."""
    n = state.n_modes
    scale = np.ones(2 * n)
    scale[2 * mode] = scale[2 * mode + 1] = np.sqrt(eta)
    cov = np.outer(scale, scale) * state.cov
    cov[2 * mode, 2 * mode] += (1.0 - eta) * 0.5
    cov[2 * mode + 1, 2 * mode + 1] += (1.0 - eta) * 0.5
    return GaussianState(scale * state.mean, cov)


def null_space_encoder(patterns) -> np.ndarray:
    """Unit signal vector orthogonal to every noise coupling pattern.

    Ties (a protected subspace of dimension > 1) are broken
    deterministically: the standard basis vectors are orthonormalized
    against the patterns in order and the first surviving direction wins,
    with the sign fixed so the first nonzero component is positive.
    """
    if not isinstance(patterns, NoisePatternSet):
        patterns = NoisePatternSet(tuple(patterns))
    n = patterns.n_channels
    basis = _orthonormalize(patterns.patterns, n)
    if len(basis) >= n:
        raise NoProtectedSubspaceError(
            "noise patterns span all channels; no protected mode exists"
        )
    q = np.array(basis)
    for k in range(n):
        r = np.zeros(n)
        r[k] = 1.0
        for _ in range(2):  # re-orthogonalize for 1e-12 accuracy
            r -= q.T @ (q @ r)
        norm = np.linalg.norm(r)
        if norm > _NULL_TOL:
            s = r / norm
            first = np.flatnonzero(np.abs(s) > _NULL_TOL)[0]
            return s if s[first] > 0 else -s
    raise NoProtectedSubspaceError("no direction survives orthogonalization")


def n_channel_protocol(
    patterns,
    eta: float,
    variances,
    state: GaussianState,
    signal_mode: int = 0,
    xi: float = 0.0,
) -> GaussianState:
    """Encode into the protected mode, transmit N channels, decode.

    ``variances`` gives the per-quadrature variance of each pattern's
    shared noise variable (natural units).  With xi = 0 the output equals
    the pure-loss channel of transmissivity eta regardless of every source
    variance.
    """
    if not isinstance(patterns, NoisePatternSet):
        patterns = NoisePatternSet(tuple(patterns))
    variances = np.broadcast_to(
        np.asarray(variances, dtype=float), (len(patterns.patterns),)
    )
    s = null_space_encoder(patterns)
    n = patterns.n_channels
    u = complete_orthonormal(s)

    n0 = state.n_modes
    st = tensor(state, vacuum_state(n - 1))
    carriers = (signal_mode,) + tuple(range(n0, n0 + n - 1))
    st = apply(SymplecticTransform(np.kron(u, np.eye(2)), carriers), st)

    sources = tuple(
        NoiseSource(p, v, label=f"pattern{k}")
        for k, (p, v) in enumerate(zip(patterns.patterns, variances))
    )
    model = ChannelModel(n, eta, 0.0, sources, xi)
    st = apply_channel(st, carriers, model)

    st = apply(SymplecticTransform(np.kron(u.T, np.eye(2)), carriers), st)
    st = _fold_noninterfering(st, carriers, u.T, book_start=n0 + n - 1, model=model)
    return partial_trace(st, range(n0))


def _orthonormalize(vectors, n: int) -> list[np.ndarray]:
    """Modified Gram-Schmidt in input order, dropping dependent vectors."""
    basis: list[np.ndarray] = []
    for v in vectors:
        r = np.array(v, dtype=float)
        scale = np.linalg.norm(r)
        if scale == 0.0:
            continue
        for _ in range(2):
            for q in basis:
                r -= (q @ r) * q
        norm = np.linalg.norm(r)
        if norm > _NULL_TOL * scale:
            basis.append(r / norm)
    return basis


def _feedforward(state: GaussianState, y_idx, gains: np.ndarray) -> GaussianState:
    """Unconditional state after adding ``gains @ y`` to the quadratures,
    where y are the measured quadrature slots ``y_idx``."""
    cov = state.cov
    y_idx = list(y_idx)
    sigma_yy = cov[np.ix_(y_idx, y_idx)]
    sigma_ys = cov[y_idx, :]
    new_cov = cov + gains @ sigma_yy @ gains.T + gains @ sigma_ys + sigma_ys.T @ gains.T
    new_mean = state.mean + gains @ state.mean[y_idx]
    return GaussianState(new_mean, new_cov)


def _fold_noninterfering(
    state: GaussianState,
    ports,
    routing: np.ndarray,
    book_start: int,
    model: ChannelModel,
) -> GaussianState:
    """Route bookkeeping excess noise onto the decoder ports.

    ``routing[k, i]`` is the amplitude with which channel i's
    non-interfering noise reaches port ``ports[k]``; each bookkeeping
    variable contributes with shared realizations, so cross-port
    covariances are tracked too.  The excess is read from the bookkeeping
    modes themselves (their variance above vacuum), laid out source-major
    from ``book_start``.
    """
    n_src = len(model.sources)
    if n_src == 0 or model.mismatch == 0.0:
        return state
    n_ch = model.n_channels
    cov = state.cov.copy()
    for s in range(n_src):
        for q in (0, 1):
            excess = np.empty(n_ch)
            for i in range(n_ch):
                b = book_start + s * n_ch + i
                excess[i] = state.cov[2 * b + q, 2 * b + q] - 0.5
            block = routing @ np.diag(excess) @ routing.T
            for a, pa in enumerate(ports):
                for bb, pb in enumerate(ports):
                    cov[2 * pa + q, 2 * pb + q] += block[a, bb]
    return GaussianState(state.mean, cov)

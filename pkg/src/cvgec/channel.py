"""Lossy channels carrying classical noise correlated across channels.

Each of the C channels applies loss eta and couples to a thermal
environment; on top of that, a set of classical noise sources injects a
shared zero-mean random displacement into several channels at once.
Source s has a coupling amplitude vector c_s (one real entry per channel,
so the noise power landing on channel i is c_s[i]^2 * variance_s) and acts
identically and independently on x and p (circularly symmetric noise).

Mode mismatch: a fraction ``mismatch`` (xi) of each source's power is
carried by spatial modes orthogonal to the signal, which do not interfere
at any downstream beam splitter.  :func:`apply_channel` books that power
in auxiliary modes appended after the existing state modes, one per
(source, channel) pair in source-major order, each holding vacuum plus the
mismatched excess.  Downstream consumers route those excesses incoherently
(see the protocol module); the total per-channel excess is independent of
xi, only its split between interfering and non-interfering parts changes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .states import VACUUM_VARIANCE, GaussianState, vacuum_state, tensor


@dataclass(frozen=True)
class NoiseSource:
    """One classical noise source shared across channels.

    Args:
        coupling: real amplitude per channel; channel i picks up
            coupling[i] * v for the shared random variable v.
        variance: per-quadrature variance of v in natural units.
        label: optional name carried through configs.
    """

    coupling: np.ndarray
    variance: float
    label: str = ""

    def __post_init__(self):
        coupling = np.array(self.coupling, dtype=float)
        if coupling.ndim != 1 or coupling.size == 0:
            raise ValueError("coupling must be a nonempty vector")
        if self.variance < 0:
            raise ValueError("source variance must be nonnegative")
        coupling.flags.writeable = False
        object.__setattr__(self, "coupling", coupling)


@dataclass(frozen=True)
class ChannelModel:
    """Per-channel loss and thermal noise plus shared classical sources.

    ``eta`` and ``thermal`` broadcast from scalars; the default is an
    ideal (lossless, zero-temperature) channel.
    """

    n_channels: int
    eta: np.ndarray = 1.0
    thermal: np.ndarray = 0.0
    sources: tuple[NoiseSource, ...] = ()
    mismatch: float = 0.0

    def __post_init__(self):
        if self.n_channels < 1:
            raise ValueError("need at least one channel")
        eta = np.broadcast_to(np.asarray(self.eta, dtype=float), (self.n_channels,)).copy()
        thermal = np.broadcast_to(
            np.asarray(self.thermal, dtype=float), (self.n_channels,)
        ).copy()
        if np.any(eta <= 0) or np.any(eta > 1):
            raise ValueError("transmissivities must lie in (0, 1]")
        if np.any(thermal < 0):
            raise ValueError("thermal occupations must be nonnegative")
        if not 0.0 <= self.mismatch < 1.0:
            raise ValueError("mismatch fraction must lie in [0, 1)")
        sources = tuple(self.sources)
        for src in sources:
            if src.coupling.size != self.n_channels:
                raise ValueError("source coupling length must equal n_channels")
        eta.flags.writeable = False
        thermal.flags.writeable = False
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "thermal", thermal)
        object.__setattr__(self, "sources", sources)


def with_mismatch(model: ChannelModel, xi: float) -> ChannelModel:
    """Copy of the model with the mismatch fraction replaced."""
    if not 0.0 <= xi < 1.0:
        raise ValueError("mismatch fraction must lie in [0, 1)")
    return replace(model, mismatch=xi)


def mismatch_from_visibility(visibility: float) -> float:
    """Non-interfering power fraction xi = 1 - V^2 for interference visibility V."""
    if not 0.0 < visibility <= 1.0:
        raise ValueError("visibility must lie in (0, 1]")
    return 1.0 - visibility**2


def excess_noise_snu(model: ChannelModel, channel: int) -> float:
    """Total classical excess noise of one channel, relative to shot noise."""
    if not 0 <= channel < model.n_channels:
        raise ValueError("channel index out of range")
    total = sum(src.variance * src.coupling[channel] ** 2 for src in model.sources)
    return float(total / VACUUM_VARIANCE)


def bookkeeping_excess(model: ChannelModel) -> np.ndarray:
    """Mismatched noise power per (source, channel), natural units.

    Entry [s, i] is the per-quadrature excess variance held by the
    auxiliary mode that :func:`apply_channel` appends for source s on
    channel i.
    """
    if not model.sources:
        return np.zeros((0, model.n_channels))
    return np.array(
        [model.mismatch * src.variance * src.coupling**2 for src in model.sources]
    )


def apply_channel(state: GaussianState, modes, model: ChannelModel) -> GaussianState:
    """Send the assigned modes of a state through the channel model.

    ``modes[i]`` is the state mode carried by channel i.  Each one is
    attenuated (mean by sqrt(eta), covariance toward the environment
    variance 1/2 + thermal), then the classical sources add their
    interfering covariance; the mismatched remainder lands in appended
    bookkeeping modes as described in the module docstring.
    """
    modes = tuple(int(m) for m in modes)
    if len(modes) != model.n_channels:
        raise ValueError("mode assignment length must equal n_channels")
    if len(set(modes)) != len(modes):
        raise ValueError("assigned modes must be distinct")
    if any(not 0 <= m < state.n_modes for m in modes):
        raise ValueError("assigned mode outside the state")

    n = state.n_modes
    scale = np.ones(2 * n)
    env = np.zeros((2 * n, 2 * n))
    for i, m in enumerate(modes):
        scale[2 * m] = scale[2 * m + 1] = np.sqrt(model.eta[i])
        env_var = (1.0 - model.eta[i]) * (VACUUM_VARIANCE + model.thermal[i])
        env[2 * m, 2 * m] = env_var
        env[2 * m + 1, 2 * m + 1] = env_var
    mean = scale * state.mean
    cov = np.outer(scale, scale) * state.cov + env

    # Interfering part of each source: rank-1 across the assigned modes,
    # identical and independent in x and p.
    matched = 1.0 - model.mismatch
    for src in model.sources:
        for q in (0, 1):
            vec = np.zeros(2 * n)
            for i, m in enumerate(modes):
                vec[2 * m + q] = src.coupling[i]
            cov += matched * src.variance * np.outer(vec, vec)

    out = GaussianState(mean, cov)
    excess = bookkeeping_excess(model)
    for s in range(excess.shape[0]):
        for i in range(model.n_channels):
            aux = vacuum_state(1)
            extra = excess[s, i] * np.eye(2)
            aux = GaussianState(aux.mean, aux.cov + extra)
            out = tensor(out, aux)
    return out


def standard_two_channel(
    eps_snu: float,
    g_ratio: float,
    eta: float = 1.0,
    xi: float = 0.0,
    thermal: float = 0.0,
) -> ChannelModel:
    """Two-channel model from the sweep parameterization.

    ``eps_snu`` is the excess noise of channel 1 at the channel output in
    shot-noise units (the noise axis used throughout); channel 2 carries
    eps_snu / g_ratio where g_ratio = g1 / g2.  A single correlated source
    with couplings (sqrt(g1), sqrt(g2)) realizes both.
    """
    if g_ratio <= 0:
        raise ValueError("g ratio must be positive")
    if eps_snu < 0:
        raise ValueError("excess noise must be nonnegative")
    g1, g2 = g_ratio, 1.0
    variance = VACUUM_VARIANCE * eps_snu / g1
    source = NoiseSource(np.sqrt([g1, g2]), variance, label="correlated")
    return ChannelModel(2, eta, thermal, (source,), xi)


# Plain-text key/value configuration.  Lines:
#   n_channels <int>
#   eta <float per channel>
#   thermal <float per channel>
#   mismatch <float>
#   source <label> <variance> <coupling per channel>
# Blank lines and '#' comments are ignored; labels must not contain spaces.


def dump_channel_config(model: ChannelModel) -> str:
    """Serialize a channel model to the key/value text format."""
    fmt = lambda x: format(float(x), ".17g")
    lines = [
        f"n_channels {model.n_channels}",
        "eta " + " ".join(fmt(e) for e in model.eta),
        "thermal " + " ".join(fmt(t) for t in model.thermal),
        f"mismatch {fmt(model.mismatch)}",
    ]
    for k, src in enumerate(model.sources):
        label = src.label or f"source{k}"
        coup = " ".join(fmt(c) for c in src.coupling)
        lines.append(f"source {label} {fmt(src.variance)} {coup}")
    return "\n".join(lines) + "\n"


def parse_channel_config(text: str) -> ChannelModel:
    """Parse the key/value text format produced by :func:`dump_channel_config`."""
    n_channels = None
    eta = thermal = None
    mismatch = 0.0
    raw_sources = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        try:
            if key == "n_channels":
                n_channels = int(rest[0])
            elif key == "eta":
                eta = np.array([float(x) for x in rest])
            elif key == "thermal":
                thermal = np.array([float(x) for x in rest])
            elif key == "mismatch":
                mismatch = float(rest[0])
            elif key == "source":
                label, variance, coupling = rest[0], float(rest[1]), rest[2:]
                raw_sources.append((label, variance, np.array([float(x) for x in coupling])))
            else:
                raise ValueError(f"unknown key {key!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad channel config line {lineno}: {raw!r}") from exc
    if n_channels is None:
        raise ValueError("channel config is missing n_channels")
    if eta is None:
        eta = np.ones(n_channels)
    if thermal is None:
        thermal = np.zeros(n_channels)
    sources = tuple(
        NoiseSource(coupling, variance, label) for label, variance, coupling in raw_sources
    )
    return ChannelModel(n_channels, eta, thermal, sources, mismatch)

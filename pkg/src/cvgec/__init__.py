"""Gaussian phase-space engine for correlated-noise channel error correction.

Covariance-matrix simulation of multimode Gaussian states, lossy channels
with classically correlated noise, the beam-splitter encode/decode scheme
that cancels that noise, an incoherent measure-and-feedforward baseline,
and passive-network synthesis for the N-channel generalization.
"""

__version__ = "0.1.0"

from .states import (
    GaussianState,
    Quadrature,
    QuadratureAxis,
    VACUUM_VARIANCE,
    add_noise,
    as_snu,
    displace,
    duan_simon,
    partial_trace,
    physicality_check,
    quadrature_variance,
    symplectic_eigenvalues,
    tensor,
    vacuum_state,
)
from .transforms import (
    BsConvention,
    SymplecticTransform,
    apply,
    beam_splitter,
    compose,
    phase_shift,
    squeeze,
    two_mode_squeezed,
)
from .fidelity import fidelity
from .channel import (
    ChannelModel,
    NoiseSource,
    apply_channel,
    excess_noise_snu,
    mismatch_from_visibility,
    standard_two_channel,
    with_mismatch,
)
from .protocol import (
    NoProtectedSubspaceError,
    NoisePatternSet,
    ProtocolConfig,
    corrected_channel,
    incoherent_strategy,
    n_channel_protocol,
    null_space_encoder,
    optimal_splitting,
    run_protocol,
    uncorrected_channel,
)
from .network import NetworkPlan, decompose_network, inverse_plan

__all__ = [name for name in dir() if not name.startswith("_")]

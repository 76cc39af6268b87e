"""Gaussian key rates, sampling and the two-party protocol simulator."""
from .gaussian import (
    TwoModeCovariance,
    ChannelParams,
    KeyRateResult,
    epr_correlation,
    effective_gain,
    lossy_correlation,
    rayleigh_length,
    rayleigh_eta,
    tmsv_covariance,
    apply_loss,
    add_excess_noise,
    cm_from_correlations,
    symplectic_eigenvalues,
    entropy_function,
    key_rate,
    fig3_sweep,
)
from .sampling import party_streams, sample_quadratures
from .homodyne import HomodyneEstimate, homodyne_gaussian_check
from .estimation import ChannelEstimate, RevealedPairs, estimate_channel
from .protocol import MessageType, Message, ProtocolConfig, PublicParameters, Transcript, DuplexChannel, run_protocol

__all__ = [
    'TwoModeCovariance',
    'ChannelParams',
    'KeyRateResult',
    'epr_correlation',
    'effective_gain',
    'lossy_correlation',
    'rayleigh_length',
    'rayleigh_eta',
    'tmsv_covariance',
    'apply_loss',
    'add_excess_noise',
    'cm_from_correlations',
    'symplectic_eigenvalues',
    'entropy_function',
    'key_rate',
    'fig3_sweep',
    'party_streams',
    'sample_quadratures',
    'HomodyneEstimate',
    'homodyne_gaussian_check',
    'ChannelEstimate',
    'RevealedPairs',
    'estimate_channel',
    'MessageType',
    'Message',
    'ProtocolConfig',
    'PublicParameters',
    'Transcript',
    'DuplexChannel',
    'run_protocol',
]

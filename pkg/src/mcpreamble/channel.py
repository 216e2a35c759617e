"""Multipath channel model: tapped delay line with Rayleigh-faded taps.

The default profile is the six-path Vehicular A power delay profile
(delays 0..2510 ns, powers 0..-20 dB).  It is resampled onto the system
sample grid by rounding each path delay to the nearest sample and adding
powers that land on the same tap.  The sample period is chosen so the
last path falls on the last usable tap for the configured L_h, which
keeps the delay spread proportionally identical across scales; with
L_h = 32 this puts the six paths on samples [0, 3, 8, 12, 19, 28].

Tap powers are normalized to sum to one, so E||h||^2 = 1 and the CFR
satisfies E||H||^2 = M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

VEH_A_DELAYS_NS = np.array([0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0])
VEH_A_POWERS_DB = np.array([0.0, -1.0, -9.0, -10.0, -15.0, -20.0])

# Reference discretization: with L_h = 32 the last Vehicular A path sits
# on sample 28.  Other channel lengths scale that anchor proportionally.
_REF_LAST_TAP = 28
_REF_L_H = 32


@dataclass(frozen=True)
class TapProfile:
    """Discrete power delay profile on the system sample grid."""

    taps: np.ndarray     # integer sample positions, strictly increasing
    powers: np.ndarray   # linear mean power per tap, sums to one

    def __post_init__(self) -> None:
        taps = np.asarray(self.taps, dtype=np.int64)
        powers = np.asarray(self.powers, dtype=float)
        if taps.shape != powers.shape or taps.ndim != 1:
            raise ValueError("taps and powers must be 1-d arrays of equal length")
        if np.any(np.diff(taps) <= 0) or taps[0] < 0:
            raise ValueError("taps must be nonnegative and strictly increasing")
        if np.any(powers <= 0):
            raise ValueError("tap powers must be positive")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "powers", powers / powers.sum())

    @property
    def n_taps(self) -> int:
        return int(self.taps[-1]) + 1


def sample_profile(L_h: int, delays_ns=None, powers_db=None) -> TapProfile:
    """Resample a continuous power delay profile for a given channel length.

    The sample period is set so the largest delay rounds to the tap
    round(_REF_LAST_TAP * L_h / _REF_L_H), capped at L_h - 1 so very
    short responses stay in range; paths rounding to the same sample
    have their linear powers added.
    """
    delays = VEH_A_DELAYS_NS if delays_ns is None else np.asarray(delays_ns, float)
    powers = VEH_A_POWERS_DB if powers_db is None else np.asarray(powers_db, float)
    if delays.shape != powers.shape:
        raise ValueError("delay and power vectors must have equal length")
    last = min(max(1, round(_REF_LAST_TAP * L_h / _REF_L_H)), L_h - 1)
    ts = delays.max() / last
    pos = np.round(delays / ts).astype(np.int64)
    lin = 10.0 ** (powers / 10.0)
    taps = np.unique(pos)
    merged = np.array([lin[pos == t].sum() for t in taps])
    return TapProfile(taps=taps, powers=merged)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the fading channel, zero padded to length L_h."""

    h: np.ndarray

    def cfr(self, M: int) -> np.ndarray:
        return cfr_from_cir(self.h, M)


def gen_veh_a(seed, config: SystemConfig, profile: TapProfile | None = None) -> ChannelRealization:
    """Draw one Rayleigh realization of the (resampled) Vehicular A channel.

    Each occupied tap is an independent circular complex Gaussian with
    variance equal to its profile power.  seed is anything accepted by
    numpy.random.default_rng.
    """
    if profile is None:
        profile = sample_profile(config.L_h)
    if profile.n_taps > config.L_h:
        raise ValueError("profile longer than L_h")
    rng = np.random.default_rng(seed)
    n = len(profile.taps)
    gains = np.sqrt(profile.powers / 2.0) * (
        rng.standard_normal(n) + 1j * rng.standard_normal(n)
    )
    h = np.zeros(config.L_h, dtype=complex)
    h[profile.taps] = gains
    return ChannelRealization(h=h)


def cfr_from_cir(h, M: int) -> np.ndarray:
    """Channel frequency response F_{M x L_h} h (zero-padded FFT)."""
    h = np.asarray(h, dtype=complex).reshape(-1)
    if len(h) > M:
        raise ValueError("impulse response longer than the DFT size")
    return np.fft.fft(h, n=M)


def propagate(s, h, sigma2: float, seed) -> np.ndarray:
    """Linear convolution with h plus circular complex AWGN.

    Returns the full convolution, length len(s) + len(h) - 1.  sigma2 is
    the total noise variance per complex sample (sigma2/2 per component).
    """
    s = np.asarray(s, dtype=complex).reshape(-1)
    h = np.asarray(h, dtype=complex).reshape(-1)
    if sigma2 < 0:
        raise ValueError("noise variance must be nonnegative")
    r = np.convolve(s, h)
    if sigma2 > 0:
        rng = np.random.default_rng(seed)
        # interleaved draw: the first n samples of the noise stream do not
        # depend on n, so equal seeds give common noise across windows
        z = rng.standard_normal((len(r), 2))
        r = r + np.sqrt(sigma2 / 2.0) * (z[:, 0] + 1j * z[:, 1])
    return r


def ebn0_to_sigma2(ebn0_db: float, e_sym: float) -> float:
    """Noise variance per complex sample for a given Eb/N0 in dB.

    e_sym is the per-subcarrier symbol energy; symbols are counted as
    QPSK (two bits), so E_b = e_sym / 2 and sigma^2 = E_b / 10^(g/10).
    """
    return e_sym / (2.0 * 10.0 ** (ebn0_db / 10.0))

"""DP-QPSK transmitter: RRC-shaped reference waveform and spectral perturbations.

A transmitted probe spectrum is the reference spectrum with its PSD scaled by
a constant ratio inside each of three disjoint baseband regions: the boosted
bands (A), the compensating remainder (B), and the notch (N, zeroed). Ratios
are chosen so total transmitted power never changes.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .field import SampledField, _is_smooth

QPSK_POINTS = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2)


class InfeasiblePerturbationError(ValueError):
    """Requested boost would need more power than the waveform carries."""


class RegionError(ValueError):
    """Region geometry broken: overlap, gap, or outside the sampled band."""


@dataclass
class TxConfig:
    """Transmitter parameters (defaults are the full-scale simulation values)."""

    baud_rate: float = 56.8e9
    rolloff: float = 0.07
    samples_per_symbol: int = 3
    n_symbols: int = 2**17
    nfl_rel_db: Optional[float] = -22.5  # noise floor PSD below in-band signal PSD; None disables
    seed: int = 1

    def __post_init__(self):
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must be in [0, 1]")
        if self.samples_per_symbol < 2:
            raise ValueError("need >= 2 samples/symbol for the shaped spectrum")
        if self.baud_rate <= 0:
            raise ValueError("baud_rate must be positive")
        if self.n_symbols < 2:
            raise ValueError("n_symbols must be >= 2")
        if not _is_smooth(self.n_symbols * self.samples_per_symbol):
            raise ValueError(
                f"grid length {self.n_symbols * self.samples_per_symbol} not "
                "{2,3,5}-smooth; adjust n_symbols or samples_per_symbol"
            )

    @property
    def sample_rate(self) -> float:
        return self.baud_rate * self.samples_per_symbol

    @property
    def boi_halfwidth(self) -> float:
        """Half the occupied bandwidth: (1+rolloff) * baud / 2."""
        return 0.5 * (1.0 + self.rolloff) * self.baud_rate


@dataclass
class RegionSet:
    """Disjoint baseband intervals tiling the bandwidth of interest.

    f_a/f_b/f_n are lists of [lo, hi) intervals in Hz; f_boi is the single
    interval they must cover exactly.
    """

    f_a: list
    f_b: list
    f_n: list
    f_boi: tuple

    def __post_init__(self):
        self.f_a = [tuple(map(float, iv)) for iv in self.f_a]
        self.f_b = [tuple(map(float, iv)) for iv in self.f_b]
        self.f_n = [tuple(map(float, iv)) for iv in self.f_n]
        self.f_boi = tuple(map(float, self.f_boi))
        for lo, hi in [*self.f_a, *self.f_b, *self.f_n, self.f_boi]:
            if not hi > lo:
                raise RegionError(f"empty or inverted interval [{lo}, {hi})")
        ivs = sorted([*self.f_a, *self.f_b, *self.f_n])
        for (lo1, hi1), (lo2, hi2) in zip(ivs, ivs[1:]):
            if lo2 < hi1 - 1e-6:
                raise RegionError(f"regions overlap near {lo2:.3e} Hz")
        lo, hi = self.f_boi
        if abs(ivs[0][0] - lo) > 1e-3 or abs(ivs[-1][1] - hi) > 1e-3:
            raise RegionError("regions do not span the bandwidth of interest")
        for (_, hi1), (lo2, _) in zip(ivs, ivs[1:]):
            if lo2 > hi1 + 1e-3:
                raise RegionError(f"gap in region coverage near {hi1:.3e} Hz")

    def masks(self, freqs: np.ndarray):
        """Boolean bin masks (a, b, n, boi) for an FFT frequency grid."""
        def mask_of(intervals):
            m = np.zeros(len(freqs), dtype=bool)
            for lo, hi in intervals:
                m |= (freqs >= lo) & (freqs < hi)
            return m

        lo, hi = self.f_boi
        return (
            mask_of(self.f_a),
            mask_of(self.f_b),
            mask_of(self.f_n),
            (freqs >= lo) & (freqs < hi),
        )


def default_regions(cfg: TxConfig) -> RegionSet:
    """Probe geometry used throughout: two 1 GHz boost bands at +11.5 and
    +14.5 GHz around a 2 GHz notch at +13 GHz, remainder compensating."""
    half = cfg.boi_halfwidth
    if half <= 15e9:
        raise RegionError("signal too narrow for the default probe geometry")
    return RegionSet(
        f_a=[(11e9, 12e9), (14e9, 15e9)],
        f_n=[(12e9, 14e9)],
        f_b=[(-half, 11e9), (15e9, half)],
        f_boi=(-half, half),
    )


@dataclass
class PerturbationProfile:
    """One probe spectrum: region geometry plus the PSD ratios per region.

    The power fractions the ratios were balanced against are kept so the
    conservation identity can be re-checked after construction.
    """

    delta_a: float
    delta_b: float
    delta_n: float
    regions: RegionSet
    k_a: float
    k_b: float
    k_n: float

    def __post_init__(self):
        if self.delta_a < 0 or self.delta_b <= 0 or self.delta_n < 0:
            raise InfeasiblePerturbationError("PSD ratios must be non-negative, delta_b > 0")
        budget = self.k_a * self.delta_a + self.k_b * self.delta_b + self.k_n * self.delta_n
        if abs(budget - 1.0) > 1e-9:
            raise InfeasiblePerturbationError(
                f"power not conserved: K-weighted ratio sum {budget!r} != 1"
            )


def rrc_spectrum(freqs: np.ndarray, baud_rate: float, rolloff: float) -> np.ndarray:
    """Raised-cosine power spectrum (unit mid-band level) on a frequency grid.

    This is the analytic |shaping filter|^2; integrating it over a region and
    dividing by baud_rate gives the fraction of signal power in that region.
    """
    f = np.abs(np.asarray(freqs, dtype=float))
    flat_edge = 0.5 * (1.0 - rolloff) * baud_rate
    stop_edge = 0.5 * (1.0 + rolloff) * baud_rate
    out = np.zeros_like(f)
    out[f <= flat_edge] = 1.0
    if rolloff > 0:
        t = (f > flat_edge) & (f < stop_edge)
        out[t] = 0.5 * (1.0 + np.cos(np.pi / (rolloff * baud_rate) * (f[t] - flat_edge)))
    return out


def generate_reference(cfg: TxConfig) -> SampledField:
    """Synthesize the seeded DP-QPSK reference waveform at unit mean power.

    Symbols are i.i.d. uniform over the 4-point alphabet per polarization;
    shaping is done spectrally (circular convolution), so the waveform is
    exactly cyclostationary on the grid and its spectrum follows the analytic
    root-raised-cosine shape with no filter transients.
    """
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xD9)))
    n = cfg.n_symbols * cfg.samples_per_symbol
    shaping = np.sqrt(rrc_spectrum(np.fft.fftfreq(n, 1.0 / cfg.sample_rate),
                                   cfg.baud_rate, cfg.rolloff))
    pols = []
    for _ in range(2):
        symbols = QPSK_POINTS[rng.integers(0, 4, cfg.n_symbols)]
        impulses = np.zeros(n, dtype=complex)
        impulses[:: cfg.samples_per_symbol] = symbols
        pols.append(np.fft.ifft(np.fft.fft(impulses) * shaping))
    x, y = pols
    scale = 1.0 / math.sqrt(np.mean(np.abs(x) ** 2) + np.mean(np.abs(y) ** 2))
    return SampledField(x * scale, y * scale, cfg.sample_rate)


def power_fractions(fld: SampledField, regions: RegionSet):
    """Fractions (K_A, K_B, K_N) of in-band power per region.

    Computed from the field's own full-resolution periodogram so that a
    profile balanced with these fractions conserves power exactly when
    applied to the same field.
    """
    freqs = fld.freqs()
    lo, hi = regions.f_boi
    if lo < -fld.sample_rate / 2 or hi > fld.sample_rate / 2:
        raise RegionError("bandwidth of interest extends beyond the sampled band")
    psd = np.abs(np.fft.fft(fld.samples_x)) ** 2 + np.abs(np.fft.fft(fld.samples_y)) ** 2
    m_a, m_b, m_n, m_boi = regions.masks(freqs)
    total = psd[m_boi].sum()
    if total <= 0:
        raise ValueError("field carries no in-band power")
    k_a = psd[m_a & m_boi].sum() / total
    k_b = psd[m_b & m_boi].sum() / total
    k_n = psd[m_n & m_boi].sum() / total
    return float(k_a), float(k_b), float(k_n)


def delta_b_for(delta_a: float, k_a: float, k_b: float) -> float:
    """Compensating PSD ratio for region B given the boost ratio for A.

    Solves K_A*delta_a + K_B*delta_b = 1 (notch ratio fixed at zero), which
    pins total transmitted power to the reference value.
    """
    if k_b <= 0:
        raise InfeasiblePerturbationError("region B carries no power to rebalance")
    if k_a * delta_a >= 1.0:
        raise InfeasiblePerturbationError(
            f"boost K_A*delta_A = {k_a * delta_a:.6g} >= 1 leaves no power for region B"
        )
    return (1.0 - k_a * delta_a) / k_b


def build_profile(fld: SampledField, regions: RegionSet, delta_a_db: float) -> PerturbationProfile:
    """Power-conserving profile for one boost value (dB) against a reference field."""
    k_a, k_b, k_n = power_fractions(fld, regions)
    delta_a = 10.0 ** (delta_a_db / 10.0)
    delta_b = delta_b_for(delta_a, k_a, k_b)
    return PerturbationProfile(delta_a, delta_b, 0.0, regions, k_a, k_b, k_n)


def apply_perturbation(fld: SampledField, profile: PerturbationProfile) -> SampledField:
    """Scale the field's spectral amplitude by sqrt(ratio) inside each region.

    Both polarizations get the same scaling; bins outside the bandwidth of
    interest are untouched. Amplitude (not PSD) scaling is the unique
    phase-preserving realization of the piecewise PSD ratios.
    """
    freqs = fld.freqs()
    m_a, m_b, m_n, _ = profile.regions.masks(freqs)
    gain = np.ones(len(freqs))
    gain[m_a] = math.sqrt(profile.delta_a)
    gain[m_b] = math.sqrt(profile.delta_b)
    gain[m_n] = math.sqrt(profile.delta_n)
    x = np.fft.ifft(np.fft.fft(fld.samples_x) * gain)
    y = np.fft.ifft(np.fft.fft(fld.samples_y) * gain)
    return SampledField(x, y, fld.sample_rate, fld.center_freq)


def add_tx_noise_floor(fld: SampledField, cfg: TxConfig, seed) -> SampledField:
    """Add the transmitter noise floor: white circular Gaussian noise confined
    to the bandwidth of interest, cfg.nfl_rel_db below the in-band average
    signal PSD.

    The reference level is computed from the input field's in-band power,
    which perturbation leaves unchanged, so the floor is the same for every
    profile.
    """
    if cfg.nfl_rel_db is None or cfg.nfl_rel_db == -math.inf:
        return fld.copy()
    lo, hi = -cfg.boi_halfwidth, cfg.boi_halfwidth
    n = len(fld)
    freqs = fld.freqs()
    boi = (freqs >= lo) & (freqs < hi)
    width = hi - lo
    psd_x = np.abs(np.fft.fft(fld.samples_x)) ** 2
    psd_y = np.abs(np.fft.fft(fld.samples_y)) ** 2
    in_band_power = (psd_x[boi].sum() + psd_y[boi].sum()) / n**2
    signal_apsd = in_band_power / width  # both polarizations, W/Hz
    noise_psd_per_pol = 0.5 * signal_apsd * 10.0 ** (cfg.nfl_rel_db / 10.0)

    rng = np.random.default_rng(seed)
    # E|W[k]|^2 = psd * n * fs on in-band bins makes the periodogram sit at
    # the target density.
    amp = math.sqrt(noise_psd_per_pol * n * fld.sample_rate / 2.0)
    out = []
    for samples in (fld.samples_x, fld.samples_y):
        spec = np.zeros(n, dtype=complex)
        draws = rng.standard_normal((2, int(boi.sum())))
        spec[boi] = amp * (draws[0] + 1j * draws[1])
        out.append(samples + np.fft.ifft(spec))
    return SampledField(out[0], out[1], fld.sample_rate, fld.center_freq)

"""Domain types and link validation.

All quantities are SI (Hz, W, m, Np/m ...).  Objects are immutable after
construction and safe to share across threads; ``validate_link`` is a pure
function and idempotent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ValidationError


class Direction(enum.Enum):
    """Propagation direction of a Raman pump relative to the signal."""

    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class Channel:
    """One WDM channel.

    Attributes
    ----------
    center_frequency:
        Absolute optical frequency f_i (Hz).
    bandwidth:
        Symbol-rate bandwidth B_i (Hz).
    launch_power_per_span:
        Launch power P_ij (W) at the input of each span.
    """

    center_frequency: float
    bandwidth: float
    launch_power_per_span: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "launch_power_per_span", tuple(self.launch_power_per_span)
        )


@dataclass(frozen=True)
class WdmGrid:
    """Ordered set of channels, ascending in center frequency."""

    channels: Tuple[Channel, ...]

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([c.center_frequency for c in self.channels])

    @property
    def bandwidths(self) -> np.ndarray:
        return np.array([c.bandwidth for c in self.channels])

    @property
    def band_center(self) -> float:
        """Midpoint between the lowest and highest channel frequency."""
        f = self.frequencies
        return 0.5 * (f[0] + f[-1])

    def launch_powers(self, span_index: int) -> np.ndarray:
        return np.array([c.launch_power_per_span[span_index] for c in self.channels])

    def total_launch_power(self, span_index: int) -> float:
        return float(self.launch_powers(span_index).sum())


@dataclass(frozen=True)
class Pump:
    """A Raman pump line.

    ``attenuation`` is the intrinsic fibre loss at the pump wavelength (Np/m).
    """

    frequency: float
    input_power: float
    direction: Direction
    attenuation: float


AttenuationLike = Union[float, Callable[[float], float]]
GainTable = Tuple[Tuple[float, ...], Tuple[float, ...]]


@dataclass(frozen=True)
class FiberSpan:
    """Physical description of one fibre span.

    Attributes
    ----------
    length:
        Span length L (m).
    beta2, beta3:
        Dispersion coefficients (s^2/m, s^3/m), quoted at the band-center
        reference frequency; phase-mismatch formulas take frequency offsets
        from that reference.
    gamma:
        Nonlinear coefficient (1/(W*m)).
    attenuation:
        Intrinsic loss (Np/m): either a constant or a callable of absolute
        frequency.
    raman_slope:
        Normalized triangular Raman gain slope C_r (1/(W*m*Hz)).
    gain_table:
        Optional sampled gain curve g_r(df)/A_eff as
        ``(offsets_hz, values_per_w_per_m)`` on [0, df_max]; linear
        interpolation, clamped to zero outside the table.  When present it
        replaces the triangular slope in the ODE solver (opt-in there).
    """

    length: float
    beta2: float
    beta3: float
    gamma: float
    attenuation: AttenuationLike
    raman_slope: float
    gain_table: Optional[GainTable] = None

    def __post_init__(self):
        if self.gain_table is not None:
            offsets, values = self.gain_table
            object.__setattr__(
                self, "gain_table", (tuple(offsets), tuple(values))
            )

    def alpha_at(self, frequency) -> float:
        """Intrinsic loss (Np/m) at an absolute frequency."""
        if callable(self.attenuation):
            return self.attenuation(frequency)
        return self.attenuation * np.ones_like(np.asarray(frequency, dtype=float)) \
            if np.ndim(frequency) else float(self.attenuation)

    def gain_at(self, delta_f, tabulated: bool = False):
        """Signed Raman gain for a frequency offset ``delta_f = f_donor - f``.

        Positive ``delta_f`` (donor above) means gain; negative means loss.
        """
        delta_f = np.asarray(delta_f, dtype=float)
        if tabulated and self.gain_table is not None:
            offsets = np.asarray(self.gain_table[0])
            values = np.asarray(self.gain_table[1])
            mag = np.interp(np.abs(delta_f), offsets, values)
            mag = np.where(np.abs(delta_f) > offsets[-1], 0.0, mag)
            out = np.sign(delta_f) * mag
        else:
            out = self.raman_slope * delta_f
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class LinkConfig:
    """A transmission link: one span type repeated ``span_count`` times."""

    span: FiberSpan
    span_count: int
    grid: WdmGrid
    pumps: Tuple[Pump, ...] = ()
    coherence_epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pumps", tuple(self.pumps))

    def pumps_by_direction(self, direction: Direction) -> Tuple[Pump, ...]:
        return tuple(p for p in self.pumps if p.direction is direction)


@dataclass(frozen=True)
class SnrBudget:
    """Linear-scale SNR contributions external to the NLI model.

    Entries may be ``math.inf`` (contribution absent), a scalar broadcast to
    every channel, or a per-channel sequence.
    """

    snr_ase: Union[float, Tuple[float, ...]] = math.inf
    snr_trx: Union[float, Tuple[float, ...]] = math.inf

    def __post_init__(self):
        for name in ("snr_ase", "snr_trx"):
            v = getattr(self, name)
            if isinstance(v, Sequence) and not isinstance(v, str):
                object.__setattr__(self, name, tuple(float(x) for x in v))

    def as_arrays(self, n_channels: int):
        out = []
        for name in ("snr_ase", "snr_trx"):
            v = getattr(self, name)
            arr = np.broadcast_to(np.asarray(v, dtype=float), (n_channels,)).copy()
            out.append(arr)
        return tuple(out)


def link_diagnostics(config: LinkConfig) -> list:
    """Return the list of violated invariants (empty when valid)."""
    diags = []
    grid = config.grid
    n_spans = config.span_count
    span = config.span

    if n_spans < 1:
        diags.append(f"span count must be >= 1, got {n_spans}")
    eps = config.coherence_epsilon
    if not (0.0 <= eps <= 1.0):
        diags.append(f"coherence epsilon must lie in [0, 1], got {eps}")

    if span.length <= 0:
        diags.append(f"span length must be positive, got {span.length}")
    if span.gamma < 0:
        diags.append(f"nonlinear coefficient must be >= 0, got {span.gamma}")

    if grid.n_channels == 0:
        diags.append("grid has no channels")
    for i, ch in enumerate(grid.channels):
        if ch.bandwidth <= 0:
            diags.append(f"channel {i}: bandwidth must be positive")
        if len(ch.launch_power_per_span) != n_spans:
            diags.append(
                f"channel {i}: {len(ch.launch_power_per_span)} launch powers "
                f"for {n_spans} spans"
            )
        if any(p <= 0 for p in ch.launch_power_per_span):
            diags.append(f"channel {i}: non-positive launch power")
        try:
            a = span.alpha_at(ch.center_frequency)
            if a <= 0:
                diags.append(
                    f"channel {i}: attenuation must be positive on the band"
                )
        except Exception as exc:  # pragma: no cover - defensive
            diags.append(f"channel {i}: attenuation evaluation failed ({exc})")

    chans = grid.channels
    for i in range(len(chans) - 1):
        lo, hi = chans[i], chans[i + 1]
        if hi.center_frequency <= lo.center_frequency:
            diags.append(f"overlapping channels at index {i},{i + 1}: "
                         "frequencies not strictly increasing")
        elif (hi.center_frequency - lo.center_frequency
              < 0.5 * (lo.bandwidth + hi.bandwidth) - 1e-6):
            diags.append(f"overlapping channels at index {i},{i + 1}: "
                         "spectral overlap")

    if chans:
        f_top = max(c.center_frequency + 0.5 * c.bandwidth for c in chans)
    else:
        f_top = -math.inf
    for p_idx, pump in enumerate(config.pumps):
        if pump.input_power < 0:
            diags.append(f"pump {p_idx}: negative pump power")
        if pump.attenuation <= 0:
            diags.append(f"pump {p_idx}: attenuation must be positive")
        if pump.frequency <= f_top:
            diags.append(
                f"pump {p_idx}: frequency inside or below the signal band"
            )

    if span.gain_table is not None:
        offsets, values = span.gain_table
        if any(v < 0 for v in values):
            diags.append("gain table contains negative entries")
        if list(offsets) != sorted(offsets) or (offsets and offsets[0] < 0):
            diags.append("gain table offsets must be ascending and start at >= 0")

    return diags


def validate_link(config: LinkConfig) -> LinkConfig:
    """Return ``config`` unchanged iff all invariants hold.

    Raises
    ------
    ValidationError
        carrying the full diagnostics list otherwise.
    """
    diags = link_diagnostics(config)
    if diags:
        raise ValidationError(diags)
    return config

"""Closed-form nonlinear-interference evaluation.

Builds the per-channel tilt decomposition of the linearized power profile,
evaluates the closed-form link function and the XPM/SPM contributions, and
assembles per-channel eta and SNR.

Sign note: the sin-weighted tail term appears in several published variants
with an inconsistent sign.  The implementation below uses the sign that
reproduces the unambiguous complex-modulus form of the link function
|sum Upsilon (kappa_f e^{j phi L} - kappa_b)/(-alpha_l + j phi)|^2
to machine precision, which the test suite asserts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .domain import Channel, FiberSpan, LinkConfig, SnrBudget, WdmGrid
from .errors import (DegenerateDispersionError, DegenerateTiltError,
                     NumericalError, ValidationError)
from .profile import ProfileParams

#: The three (l1, l2) index pairs with 0 <= l1 + l2 <= 1.
INDEX_PAIRS = ((0, 0), (1, 0), (0, 1))

_TILT_EPS = 1e-12
_PHI_EPS = 1e-30
_XPM_PREF = 32.0 / 27.0
_SPM_PREF = 16.0 / 27.0


def _sign(x: float) -> float:
    """sign with sign(0) := 0."""
    return 0.0 if x == 0.0 else math.copysign(1.0, x)


@dataclass(frozen=True)
class ClosedFormTerms:
    """Tilt decomposition of one channel's linearized profile.

    The profile factor 1 - x(zeta) (f_i - f_hat) is written as a sum of
    three exponentials indexed by ``INDEX_PAIRS``; ``upsilon`` holds the
    coefficients, ``alpha_l`` the decay rates alpha + l1 alpha_f -
    l2 alpha_b, and ``kappa_f`` / ``kappa_b`` the two endpoint weights
    e^{-(alpha + l1 alpha_f) L} and e^{-l2 alpha_b L}.
    """

    t_f: float
    t_b: float
    t_total: float
    upsilon: np.ndarray
    alpha_l: np.ndarray
    kappa_f: np.ndarray
    kappa_b: np.ndarray
    alpha: float
    alpha_f: float
    alpha_b: float
    length: float

    def __post_init__(self):
        for name in ("upsilon", "alpha_l", "kappa_f", "kappa_b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class PhaseMismatch:
    """Dispersion phase factors for one channel (and optionally one pair).

    ``phi_i`` scales as 1/(m Hz^2) (self-channel), ``phi_ik`` as 1/(m Hz)
    (channel pair); ``phi_ik`` is None when no interferer was given.
    """

    phi_i: float
    phi_ik: Optional[float] = None


def closed_form_terms(params: ProfileParams, f_i: float, length: float
                      ) -> ClosedFormTerms:
    """Tilt decomposition for a channel at absolute frequency ``f_i``.

    Raises
    ------
    DegenerateTiltError
        If the total tilt factor T is numerically zero (the linearized
        profile crosses zero inside the span).
    """
    delta = f_i - params.f_hat
    t_f = -params.p_f * params.c_f * delta / params.alpha_f
    t_b = -params.p_b * params.c_b * delta / params.alpha_b
    t_total = 1.0 + t_f - t_b * math.exp(-params.alpha_b * length)
    if abs(t_total) < _TILT_EPS:
        raise DegenerateTiltError(
            f"total tilt factor T = {t_total:.3e} is numerically zero; "
            "the linearized profile crosses zero inside the span"
        )
    upsilon = np.array([t_total, -t_f, t_b])
    alpha_l = np.array([
        params.alpha,
        params.alpha + params.alpha_f,
        params.alpha - params.alpha_b,
    ])
    kappa_f = np.array([
        math.exp(-params.alpha * length),
        math.exp(-(params.alpha + params.alpha_f) * length),
        math.exp(-params.alpha * length),
    ])
    kappa_b = np.array([1.0, 1.0, math.exp(-params.alpha_b * length)])
    return ClosedFormTerms(
        t_f=t_f, t_b=t_b, t_total=t_total,
        upsilon=upsilon, alpha_l=alpha_l, kappa_f=kappa_f, kappa_b=kappa_b,
        alpha=params.alpha, alpha_f=params.alpha_f, alpha_b=params.alpha_b,
        length=length,
    )


def tilt_reconstruction(terms: ClosedFormTerms, zeta):
    """Rebuild 1 - x(zeta) (f_i - f_hat) from the three-term decomposition.

    Equals exactly 1 at zeta = 0 for any parameters.
    """
    zeta = np.asarray(zeta, dtype=float)
    rates = terms.alpha_l - terms.alpha  # l1 alpha_f - l2 alpha_b
    out = np.sum(
        terms.upsilon * terms.kappa_b
        * np.exp(-np.multiply.outer(zeta, rates)),
        axis=-1,
    )
    return out if out.ndim else float(out)


def phase_mismatch(span: FiberSpan, f_i: float, f_k: Optional[float] = None
                   ) -> PhaseMismatch:
    """Dispersion phase factors; ``f_i``/``f_k`` are offsets (Hz) from the
    reference frequency at which beta2/beta3 are quoted.

    Raises
    ------
    DegenerateDispersionError
        If an interferer is given and the pair factor vanishes.
    """
    b2, b3 = span.beta2, span.beta3
    phi_i = -4.0 * math.pi ** 2 * (b2 + 2.0 * math.pi * b3 * f_i)
    phi_ik = None
    if f_k is not None:
        phi_ik = (-4.0 * math.pi ** 2 * (f_k - f_i)
                  * (b2 + math.pi * b3 * (f_i + f_k)))
        if abs(phi_ik) < _PHI_EPS:
            raise DegenerateDispersionError(
                f"pair phase factor vanishes for offsets "
                f"f_i = {f_i:.4e} Hz, f_k = {f_k:.4e} Hz"
            )
    return PhaseMismatch(phi_i=phi_i, phi_ik=phi_ik)


def _check_rate_sums(terms: ClosedFormTerms) -> np.ndarray:
    """Pairwise alpha_l + alpha_l' matrix; rejects near-cancellation.

    Index pairs whose Upsilon weight is exactly zero do not contribute and
    are exempt from the check (their rate sum may legitimately vanish,
    e.g. alpha_l = alpha - alpha_b = 0 in the pump-free reduction).
    """
    a = terms.alpha_l
    ab = a[:, None] + a[None, :]
    up = terms.upsilon
    active = (up[:, None] * up[None, :]) != 0.0
    if np.any(active & (np.abs(ab) < 1e-6 * terms.alpha)):
        raise NumericalError(
            "a pairwise rate sum alpha_l + alpha_l' nearly vanishes; "
            "the closed form is numerically undefined for these parameters"
        )
    return np.where(active, ab, 1.0)


def mu_closed(phi, terms: ClosedFormTerms):
    """Closed-form link function mu(phi) (m^2) for one channel's terms.

    ``phi`` (1/m) may be a scalar or an array.  All tilt factors are
    evaluated at the channel under test (single-profile substitution).
    """
    _check_rate_sums(terms)
    phi_arr = np.asarray(phi, dtype=float)
    p = phi_arr[..., None, None]
    a = terms.alpha_l
    up = terms.upsilon
    kf, kb = terms.kappa_f, terms.kappa_b
    length = terms.length

    aa = a[:, None] * a[None, :]
    uu = up[:, None] * up[None, :]
    kff = kf[:, None] * kf[None, :] + kb[:, None] * kb[None, :]
    kfb_p = kf[:, None] * kb[None, :] + kb[:, None] * kf[None, :]
    kfb_m = kf[:, None] * kb[None, :] - kb[:, None] * kf[None, :]
    adiff = a[:, None] - a[None, :]

    p2 = p * p
    active = uu != 0.0
    denom = (a[:, None] ** 2 + p2) * (a[None, :] ** 2 + p2)
    denom = np.where(active, denom, 1.0)
    num = (kff * (aa + p2)
           - kfb_p * (aa + p2) * np.cos(p * length)
           - kfb_m * adiff * p * np.sin(p * length))
    out = np.sum(np.where(active, uu * num / denom, 0.0), axis=(-2, -1))
    return out if out.ndim else float(out)


def mu_closed_complex(phi, terms: ClosedFormTerms):
    """Link function via the complex-modulus form (cross-check path)."""
    _check_rate_sums(terms)
    phi_arr = np.asarray(phi, dtype=float)
    p = phi_arr[..., None]
    active = terms.upsilon != 0.0
    denom = np.where(active, -terms.alpha_l + 1j * p, 1.0)
    s = np.sum(
        np.where(
            active,
            terms.upsilon
            * (terms.kappa_f * np.exp(1j * p * terms.length) - terms.kappa_b)
            / denom,
            0.0,
        ),
        axis=-1,
    )
    out = np.abs(s) ** 2
    return out if out.ndim else float(out)


def _pair_factors(terms: ClosedFormTerms):
    a = terms.alpha_l
    up = terms.upsilon
    kf, kb = terms.kappa_f, terms.kappa_b
    uu = up[:, None] * up[None, :]
    ab = _check_rate_sums(terms)
    kff = kf[:, None] * kf[None, :] + kb[:, None] * kb[None, :]
    kfb_p = kf[:, None] * kb[None, :] + kb[:, None] * kf[None, :]
    kfb_m = kf[:, None] * kb[None, :] - kb[:, None] * kf[None, :]
    e_al = np.exp(-np.abs(a * terms.length))
    # A vanishing rate only occurs in zero-weight terms or at the atan/asinh
    # limit points; a tiny stand-in keeps the arguments finite either way.
    a_div = np.where(a == 0.0, 1e-300, a)
    return a_div, uu, ab, kff, kfb_p, kfb_m, e_al


def eta_xpm_pair(
    channel_i: Channel,
    channel_k: Channel,
    terms: ClosedFormTerms,
    phase: PhaseMismatch,
    span: FiberSpan,
    n: int,
    span_index: int = 0,
) -> float:
    """Closed-form XPM contribution of interferer k onto channel i (1/W^2).

    ``terms`` must be the tilt decomposition of the *interferer* (built at
    f_k): the spectral integrand collapses to the interfering channel's
    power profile. Includes the interferer power ratio (P_k/P_i)^2 and the
    span count ``n`` (incoherent accumulation), so that the NLI power
    contributed by this pair is the return value times P_i^3.
    """
    if channel_k.center_frequency == channel_i.center_frequency:
        raise ValidationError("XPM pair requires distinct channels")
    if phase.phi_ik is None:
        raise ValidationError("phase mismatch lacks the pair factor phi_ik")
    phi_ik = phase.phi_ik
    b_i = channel_i.bandwidth
    b_k = channel_k.bandwidth
    p_i = channel_i.launch_power_per_span[span_index]
    p_k = channel_k.launch_power_per_span[span_index]

    a, uu, ab, kff, kfb_p, kfb_m, e_al = _pair_factors(terms)
    at = np.arctan(phi_ik * b_i / (2.0 * a))
    main = at[:, None] + at[None, :]
    sgn_a = np.sign(terms.alpha_l) * _sign(phi_ik)
    ca = sgn_a * e_al
    cos_tail = ca[:, None] + ca[None, :]
    sin_tail = (_sign(-phi_ik) * e_al[:, None]
                + _sign(phi_ik) * e_al[None, :])
    bracket = (2.0 * kff * main
               - math.pi * (kfb_p * cos_tail + kfb_m * sin_tail))
    total = float(np.sum(uu * bracket / ab))
    return (n * _XPM_PREF * span.gamma ** 2 * (p_k / p_i) ** 2
            / (phi_ik * b_k) * total)


def eta_spm(
    channel_i: Channel,
    terms: ClosedFormTerms,
    phase: PhaseMismatch,
    span: FiberSpan,
    n: int,
    epsilon: float = 0.0,
) -> float:
    """Closed-form SPM contribution of channel i onto itself (1/W^2).

    Includes the n^{1+epsilon} coherent accumulation factor; the launch
    power is divided out (NLI power = return value times P_i^3).
    """
    phi_i = phase.phi_i
    if phi_i == 0.0:
        raise DegenerateDispersionError(
            "self-channel phase factor phi_i is zero (dispersion-free); "
            "the SPM closed form is undefined"
        )
    b_i = channel_i.bandwidth
    if b_i <= 0 or terms.length <= 0:
        raise ValidationError("SPM needs positive bandwidth and span length")

    a, uu, ab, kff, kfb_p, kfb_m, e_al = _pair_factors(terms)
    ash = np.arcsinh(3.0 * phi_i * b_i ** 2 / (8.0 * math.pi * a))
    main = ash[:, None] + ash[None, :]
    log_w = math.log(math.sqrt(abs(phi_i) * terms.length / (2.0 * math.pi))
                     * b_i)
    sgn_a = np.sign(terms.alpha_l) * _sign(phi_i)
    ca = sgn_a * e_al
    cos_tail = ca[:, None] + ca[None, :]
    sin_tail = (_sign(-phi_i) * e_al[:, None]
                + _sign(phi_i) * e_al[None, :])
    bracket = (2.0 * kff * main
               - 4.0 * log_w * (kfb_p * cos_tail + kfb_m * sin_tail))
    total = float(np.sum(uu * bracket / ab))
    return (n ** (1.0 + epsilon) * _SPM_PREF * math.pi * span.gamma ** 2
            / (b_i ** 2 * phi_i) * total)


@dataclass(frozen=True)
class NliReport:
    """Per-channel NLI and SNR summary for one link."""

    frequencies: np.ndarray
    launch_powers: np.ndarray
    eta_spm: np.ndarray
    eta_xpm: np.ndarray
    eta_total: np.ndarray
    degenerate_pairs: Tuple[Tuple[int, int], ...] = ()
    snr_nli: Optional[np.ndarray] = None
    snr_total: Optional[np.ndarray] = None
    snr_total_db: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("frequencies", "launch_powers", "eta_spm", "eta_xpm",
                     "eta_total", "snr_nli", "snr_total", "snr_total_db"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "degenerate_pairs",
                           tuple(tuple(p) for p in self.degenerate_pairs))

    @property
    def n_channels(self) -> int:
        return self.frequencies.size

    def _rows(self):
        fmt = "{:.8e}".format
        n = self.n_channels
        snr_nli_db = (10.0 * np.log10(self.snr_nli)
                      if self.snr_nli is not None else np.full(n, np.nan))
        snr_db = (self.snr_total_db if self.snr_total_db is not None
                  else np.full(n, np.nan))
        for i in range(n):
            yield (fmt(self.frequencies[i]), fmt(self.eta_spm[i]),
                   fmt(self.eta_xpm[i]), fmt(self.eta_total[i]),
                   fmt(snr_nli_db[i]), fmt(snr_db[i]))

    def to_csv(self, path_or_buf=None) -> str:
        header = "f_i_hz,eta_spm_per_w2,eta_xpm_per_w2,eta_total_per_w2," \
                 "snr_nli_db,snr_db"
        text = header + "\n" + "\n".join(",".join(r) for r in self._rows()) \
            + "\n"
        return _emit(text, path_or_buf)

    def to_json(self, path_or_buf=None) -> str:
        payload = {
            "channels": [
                {
                    "f_i_hz": float(self.frequencies[i]),
                    "launch_power_w": float(self.launch_powers[i]),
                    "eta_spm_per_w2": float(self.eta_spm[i]),
                    "eta_xpm_per_w2": float(self.eta_xpm[i]),
                    "eta_total_per_w2": float(self.eta_total[i]),
                    "snr_nli": (None if self.snr_nli is None
                                else float(self.snr_nli[i])),
                    "snr_total": (None if self.snr_total is None
                                  else float(self.snr_total[i])),
                    "snr_total_db": (None if self.snr_total_db is None
                                     else float(self.snr_total_db[i])),
                }
                for i in range(self.n_channels)
            ],
            "degenerate_pairs": [list(p) for p in self.degenerate_pairs],
        }
        return _emit(json.dumps(payload, indent=2) + "\n", path_or_buf)


def _emit(text, path_or_buf):
    if path_or_buf is None:
        return text
    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        path_or_buf.write(text)
    return text


def _terms_arrays(fit, grid: WdmGrid, length: float):
    ups = np.empty((grid.n_channels, 3))
    al = np.empty_like(ups)
    kf = np.empty_like(ups)
    kb = np.empty_like(ups)
    for i, ch in enumerate(grid.channels):
        t = closed_form_terms(fit.channel_fits[i].params,
                              ch.center_frequency, length)
        ups[i] = t.upsilon
        al[i] = t.alpha_l
        kf[i] = t.kappa_f
        kb[i] = t.kappa_b
    return ups, al, kf, kb


def _eta_arrays_vectorized(config: LinkConfig, fit, span_powers: np.ndarray):
    """Per-span SPM and pairwise-XPM eta arrays, fully vectorized.

    Returns (eta_spm_unit, eta_xpm_matrix, degenerate_pairs) for a single
    span with launch powers ``span_powers``; no n or epsilon factors.
    """
    span = config.span
    grid = config.grid
    n_ch = grid.n_channels
    length = span.length
    f_ref = grid.band_center
    f_off = grid.frequencies - f_ref
    b = grid.bandwidths
    p = span_powers

    ups, al, kf, kb = _terms_arrays(fit, grid, length)
    ab = al[:, :, None] + al[:, None, :]
    uu = ups[:, :, None] * ups[:, None, :]
    active = uu != 0.0
    alpha_min = min(fit.channel_fits[i].params.alpha for i in range(n_ch))
    if np.any(active & (np.abs(ab) < 1e-6 * alpha_min)):
        raise NumericalError(
            "a pairwise rate sum alpha_l + alpha_l' nearly vanishes"
        )
    ab = np.where(active, ab, 1.0)
    kff = kf[:, :, None] * kf[:, None, :] + kb[:, :, None] * kb[:, None, :]
    kfb_p = kf[:, :, None] * kb[:, None, :] + kb[:, :, None] * kf[:, None, :]
    kfb_m = kf[:, :, None] * kb[:, None, :] - kb[:, :, None] * kf[:, None, :]
    e_al = np.exp(-np.abs(al * length))
    w = np.where(active, uu / ab, 0.0)
    sgn_al = np.sign(al)
    # zero-rate terms get a subnormal placeholder so the arctan/arcsinh
    # arguments below saturate to +-inf (their correct limiting value);
    # the resulting overflow in the divide is intended
    al_div = np.where(al == 0.0, 1e-300, al)

    # SPM (per channel)
    phi_i = -4.0 * math.pi ** 2 * (span.beta2
                                   + 2.0 * math.pi * span.beta3 * f_off)
    if np.any(phi_i == 0.0):
        raise DegenerateDispersionError(
            "phi_i vanishes for at least one channel"
        )
    with np.errstate(over="ignore"):
        ash = np.arcsinh(3.0 * phi_i[:, None] * b[:, None] ** 2
                         / (8.0 * math.pi * al_div))
    main = ash[:, :, None] + ash[:, None, :]
    log_w = np.log(np.sqrt(np.abs(phi_i) * length / (2.0 * math.pi)) * b)
    ca = sgn_al * np.sign(phi_i)[:, None] * e_al
    cos_tail = ca[:, :, None] + ca[:, None, :]
    sin_tail = (np.sign(-phi_i)[:, None, None] * e_al[:, :, None]
                + np.sign(phi_i)[:, None, None] * e_al[:, None, :])
    bracket = 2.0 * kff * main - 4.0 * log_w[:, None, None] * (
        kfb_p * cos_tail + kfb_m * sin_tail)
    eta_spm_unit = (_SPM_PREF * math.pi * span.gamma ** 2
                    / (b ** 2 * phi_i) * np.sum(w * bracket, axis=(1, 2)))

    # XPM (per ordered pair (i, k))
    df = f_off[None, :] - f_off[:, None]  # f_k - f_i
    phi_ik = (-4.0 * math.pi ** 2 * df
              * (span.beta2 + math.pi * span.beta3
                 * (f_off[None, :] + f_off[:, None])))
    off_diag = ~np.eye(n_ch, dtype=bool)
    degenerate = off_diag & (np.abs(phi_ik) < _PHI_EPS)
    valid = off_diag & ~degenerate
    phi_safe = np.where(valid, phi_ik, 1.0)

    # The tilt decomposition for pair (i, k) is the interferer's (axis 1):
    # the spectral integrand collapses to channel k's power profile.
    with np.errstate(over="ignore"):
        at = np.arctan(phi_safe[:, :, None] * b[:, None, None]
                       / (2.0 * al_div[None, :, :]))
    main_x = at[:, :, :, None] + at[:, :, None, :]
    ca_x = (sgn_al[None, :, :] * np.sign(phi_safe)[:, :, None]
            * e_al[None, :, :])
    cos_tail_x = ca_x[:, :, :, None] + ca_x[:, :, None, :]
    sin_tail_x = (np.sign(-phi_safe)[:, :, None, None]
                  * e_al[None, :, :, None]
                  + np.sign(phi_safe)[:, :, None, None]
                  * e_al[None, :, None, :])
    bracket_x = 2.0 * kff[None, :] * main_x - math.pi * (
        kfb_p[None, :] * cos_tail_x + kfb_m[None, :] * sin_tail_x)
    s = np.sum(w[None, :] * bracket_x, axis=(2, 3))
    ratio2 = (p[None, :] / p[:, None]) ** 2
    eta_xpm_mat = (_XPM_PREF * span.gamma ** 2 * ratio2
                   / (phi_safe * b[None, :]) * s)
    eta_xpm_mat = np.where(valid, eta_xpm_mat, 0.0)
    pairs = tuple((int(i), int(k)) for i, k in zip(*np.nonzero(degenerate)))
    return eta_spm_unit, eta_xpm_mat, pairs


def _eta_arrays_scalar(config: LinkConfig, fit, span_powers: np.ndarray):
    """Scalar-loop reference path producing the same arrays."""
    span = config.span
    grid = config.grid
    n_ch = grid.n_channels
    f_ref = grid.band_center
    eta_spm_unit = np.empty(n_ch)
    eta_xpm_mat = np.zeros((n_ch, n_ch))
    pairs = []
    all_terms = [
        closed_form_terms(fit.channel_fits[j].params,
                          ch.center_frequency, span.length)
        for j, ch in enumerate(grid.channels)
    ]
    for i, ch_i in enumerate(grid.channels):
        fi_off = ch_i.center_frequency - f_ref
        pm_i = phase_mismatch(span, fi_off)
        ch_i_unit = Channel(ch_i.center_frequency, ch_i.bandwidth,
                            (span_powers[i],))
        eta_spm_unit[i] = eta_spm(ch_i_unit, all_terms[i], pm_i, span, 1, 0.0)
        for k, ch_k in enumerate(grid.channels):
            if k == i:
                continue
            fk_off = ch_k.center_frequency - f_ref
            try:
                pm = phase_mismatch(span, fi_off, fk_off)
            except DegenerateDispersionError:
                pairs.append((i, k))
                continue
            ch_k_unit = Channel(ch_k.center_frequency, ch_k.bandwidth,
                                (span_powers[k],))
            eta_xpm_mat[i, k] = eta_xpm_pair(ch_i_unit, ch_k_unit,
                                             all_terms[k], pm, span, 1)
    return eta_spm_unit, eta_xpm_mat, tuple(pairs)


def eta_total(config: LinkConfig, fit, vectorized: bool = True) -> NliReport:
    """Accumulate per-channel eta over all spans (1/W^2).

    eta_n(f_i) = sum_j (P_{i,j}/P_i)^2 [eta_SPM,j n^epsilon + eta_XPM,j];
    identical launch powers across spans take the fast path (one per-span
    evaluation scaled by the span count).
    """
    if fit.n_channels != config.grid.n_channels:
        raise ValidationError(
            f"fit covers {fit.n_channels} channels but the grid has "
            f"{config.grid.n_channels}"
        )
    grid = config.grid
    n = config.span_count
    eps = config.coherence_epsilon
    p_ref = grid.launch_powers(0)
    per_span = _eta_arrays_vectorized if vectorized else _eta_arrays_scalar

    all_powers = [grid.launch_powers(j) for j in range(n)]
    uniform = all(np.array_equal(all_powers[0], pj) for pj in all_powers)
    if uniform:
        spm_unit, xpm_mat, pairs = per_span(config, fit, all_powers[0])
        e_spm = spm_unit * n ** (1.0 + eps)
        e_xpm = n * np.sum(xpm_mat, axis=1)
    else:
        e_spm = np.zeros(grid.n_channels)
        e_xpm = np.zeros(grid.n_channels)
        pairs = ()
        for j in range(n):
            spm_unit, xpm_mat, pairs_j = per_span(config, fit, all_powers[j])
            scale = (all_powers[j] / p_ref) ** 2
            e_spm += scale * spm_unit * n ** eps
            e_xpm += scale * np.sum(xpm_mat, axis=1)
            pairs = pairs_j
    return NliReport(
        frequencies=grid.frequencies,
        launch_powers=p_ref,
        eta_spm=e_spm,
        eta_xpm=e_xpm,
        eta_total=e_spm + e_xpm,
        degenerate_pairs=pairs,
    )


def assemble_snr(eta: NliReport, budget: SnrBudget, grid: WdmGrid) -> NliReport:
    """Complete a report with SNR_NLI and the reciprocal-sum total SNR."""
    n = eta.n_channels
    p_i = eta.launch_powers
    snr_ase, snr_trx = budget.as_arrays(n)
    for name, arr in (("snr_ase", snr_ase), ("snr_trx", snr_trx)):
        if np.any(arr <= 0.0) or np.any(np.isnan(arr)):
            raise ValidationError(f"{name} entries must be positive")
    with np.errstate(divide="ignore"):
        snr_nli = 1.0 / (eta.eta_total * p_i ** 2)
    inv = 1.0 / snr_nli + 1.0 / snr_ase + 1.0 / snr_trx
    snr_total = 1.0 / inv
    return NliReport(
        frequencies=eta.frequencies,
        launch_powers=eta.launch_powers,
        eta_spm=eta.eta_spm,
        eta_xpm=eta.eta_xpm,
        eta_total=eta.eta_total,
        degenerate_pairs=eta.degenerate_pairs,
        snr_nli=snr_nli,
        snr_total=snr_total,
        snr_total_db=10.0 * np.log10(snr_total),
    )

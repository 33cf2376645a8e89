"""Semi-analytical signal-power profile: evaluation and fitting.

The linearized profile used by the closed form is

    rho(z, f) = exp(-alpha z) * [1 - (C_f P_f L_eff(z) + C_b P_b Lb_eff(z))
                                     * (f - f_hat)]

with L_eff(z) = (1 - exp(-alpha_f z)) / alpha_f and
Lb_eff(z) = (exp(-alpha_b (L - z)) - exp(-alpha_b L)) / alpha_b.  Its exact
precursor keeps the tilt in the exponent and normalizes over the total
bandwidth with a sinh factor.

``fit_profile`` matches the linearized model to an ODE solution per channel
by damped least squares on the dB-domain residual.  The objective has many
local minima once the pump gain is strong, so the fitter combines the
physical initial guess with a deterministic variable-projection seed grid
and seeded random restarts, and polishes the best candidates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import least_squares

from .domain import LinkConfig
from .errors import ValidationError
from .raman import PowerEvolution, normalized_profile

_LN10 = math.log(10.0)
_K_DB = 10.0 / _LN10  # nepers -> dB


@dataclass(frozen=True)
class ProfileParams:
    """Per-channel fitted quintuple plus the shared pump context.

    ``alpha``, ``alpha_f``, ``alpha_b`` are effective rates (Np/m); ``c_f``
    and ``c_b`` are effective Raman slopes (1/(W*m*Hz)); ``p_f`` is the total
    co-propagating power at z = 0 (channels plus forward pumps), ``p_b`` the
    total backward-pump power and ``f_hat`` the average pump frequency (Hz).
    """

    alpha: float
    c_f: float
    c_b: float
    alpha_f: float
    alpha_b: float
    p_f: float
    p_b: float
    f_hat: float


def effective_length(z, alpha_f: float):
    """Forward effective length (1 - exp(-alpha_f z)) / alpha_f."""
    z = np.asarray(z, dtype=float)
    out = -np.expm1(-alpha_f * z) / alpha_f
    return out if out.ndim else float(out)


def backward_effective_length(z, length: float, alpha_b: float):
    """Backward analogue (exp(-alpha_b (L - z)) - exp(-alpha_b L)) / alpha_b."""
    z = np.asarray(z, dtype=float)
    out = (np.exp(-alpha_b * (length - z)) - np.exp(-alpha_b * length)) / alpha_b
    return out if out.ndim else float(out)


def tilt_integral(params: ProfileParams, z, length: float):
    """Accumulated tilt x(z) = C_f P_f L_eff(z) + C_b P_b Lb_eff(z)."""
    return (params.c_f * params.p_f * effective_length(z, params.alpha_f)
            + params.c_b * params.p_b
            * backward_effective_length(z, length, params.alpha_b))


def eval_profile_taylor(params: ProfileParams, z, f_i: float, length: float):
    """First-order (linearized) profile; exactly 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    x = tilt_integral(params, z, length)
    out = np.exp(-params.alpha * z) * (1.0 - x * (f_i - params.f_hat))
    return out if out.ndim else float(out)


def eval_profile_exact(params: ProfileParams, z, f_i: float, length: float,
                       total_bandwidth: float):
    """Pre-linearization profile with the sinh normalization factor.

    rho = exp(-alpha z) * x B / (2 sinh(x B / 2)) * exp(-x (f - f_hat)),
    with the removable singularity at x -> 0 evaluated by series.
    """
    if total_bandwidth <= 0:
        raise ValidationError("total bandwidth must be positive")
    z = np.asarray(z, dtype=float)
    x = np.asarray(tilt_integral(params, z, length), dtype=float)
    t = 0.5 * x * total_bandwidth
    small = np.abs(t) < 1e-6
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        norm = np.where(small, 1.0 - t * t / 6.0, t / np.sinh(np.where(small, 1.0, t)))
    out = np.exp(-params.alpha * z) * norm * np.exp(-x * (f_i - params.f_hat))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ChannelFit:
    """Fit result for one channel."""

    params: ProfileParams
    rms_db: float
    n_eval: int
    converged: bool


@dataclass(frozen=True)
class FitReport:
    """Per-channel profile fits for one span."""

    channel_fits: Tuple[ChannelFit, ...]

    def __post_init__(self):
        object.__setattr__(self, "channel_fits", tuple(self.channel_fits))

    @property
    def n_channels(self) -> int:
        return len(self.channel_fits)

    @property
    def max_rms_db(self) -> float:
        return max(cf.rms_db for cf in self.channel_fits)

    def to_json(self, path_or_buf=None) -> str:
        payload = {
            "channels": [
                {
                    "params": asdict(cf.params),
                    "rms_db": cf.rms_db,
                    "n_eval": cf.n_eval,
                    "converged": cf.converged,
                }
                for cf in self.channel_fits
            ]
        }
        text = json.dumps(payload, indent=2) + "\n"
        if path_or_buf is None:
            return text
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            with open(path_or_buf, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            path_or_buf.write(text)
        return text


def shared_fit_context(evolution: PowerEvolution, config: LinkConfig):
    """(P_f, P_b, f_hat) held fixed during fitting.

    P_f is the total co-propagating launch power (channels plus forward
    pumps), P_b the total backward-pump power, f_hat the power-unweighted
    mean pump frequency or the band center when there are no pumps.
    """
    from .domain import Direction

    span_index = evolution.span_index
    p_f = config.grid.total_launch_power(span_index)
    p_f += sum(p.input_power for p in config.pumps_by_direction(Direction.FORWARD))
    p_b = sum(p.input_power for p in config.pumps_by_direction(Direction.BACKWARD))
    if config.pumps:
        f_hat = float(np.mean([p.frequency for p in config.pumps]))
    else:
        f_hat = config.grid.band_center
    return p_f, p_b, f_hat


def _residual_and_jac(length, z, target_db, delta, p_f, p_b, free, fixed):
    """Build residual/jacobian callables over the free-parameter subset.

    ``free`` is a list of names among (alpha, c_f, c_b, alpha_f, alpha_b);
    ``fixed`` maps the remaining names to values.
    """
    idx = {name: k for k, name in enumerate(free)}

    def unpack(pvec):
        get = lambda name: pvec[idx[name]] if name in idx else fixed[name]
        return (get("alpha"), get("c_f"), get("c_b"),
                get("alpha_f"), get("alpha_b"))

    def model_parts(pvec):
        a, cf, cb, af, ab = unpack(pvec)
        leff = -np.expm1(-af * z) / af
        lbeff = (np.exp(-ab * (length - z)) - np.exp(-ab * length)) / ab
        x = cf * p_f * leff + cb * p_b * lbeff
        u = 1.0 - x * delta
        return a, cf, cb, af, ab, leff, lbeff, u

    floor = 1e-12

    def residual(pvec):
        a, cf, cb, af, ab, leff, lbeff, u = model_parts(pvec)
        u_safe = np.maximum(u, floor)
        r = _K_DB * (-a * z + np.log(u_safe)) - target_db
        bad = u < floor
        if np.any(bad):
            r = r + np.where(bad, 1e3 * (floor - u), 0.0)
        return r

    def jacobian(pvec):
        a, cf, cb, af, ab, leff, lbeff, u = model_parts(pvec)
        u_safe = np.maximum(u, floor)
        bad = u < floor
        inv_u = np.where(bad, 0.0, 1.0 / u_safe)
        jac = np.empty((z.size, len(free)))
        # d u / d param = -delta * d x / d param
        for k, name in enumerate(free):
            if name == "alpha":
                jac[:, k] = -_K_DB * z
                continue
            if name == "c_f":
                dx = p_f * leff
            elif name == "c_b":
                dx = p_b * lbeff
            elif name == "alpha_f":
                dx = cf * p_f * (z * np.exp(-af * z) - leff) / af
            elif name == "alpha_b":
                dlb = (-(length - z) * np.exp(-ab * (length - z))
                       + length * np.exp(-ab * length) - lbeff) / ab
                dx = cb * p_b * dlb
            else:  # pragma: no cover
                raise KeyError(name)
            du = -delta * dx
            jac[:, k] = _K_DB * du * inv_u + np.where(bad, -1e3 * du, 0.0)
        return jac

    return residual, jacobian, unpack


def _varpro_seeds(length, z, target_db, delta, p_f, p_b, ratios, alpha_phys,
                  with_backward):
    """Variable-projection seed grid.

    For each candidate (alpha, alpha_f, alpha_b) the two slope coefficients
    enter the pre-log model linearly, so they are obtained by a tiny linear
    least-squares solve against the de-trended target.
    """
    seeds = []
    leff_grid = [(-np.expm1(-r * alpha_phys * z) / (r * alpha_phys)) * p_f
                 for r in ratios]
    if with_backward:
        lbeff_grid = [((np.exp(-r * alpha_phys * (length - z))
                        - np.exp(-r * alpha_phys * length))
                       / (r * alpha_phys)) * p_b
                      for r in ratios]
    for ra in ratios:
        a = ra * alpha_phys
        u_target = 10.0 ** ((target_db + _K_DB * a * z) / 10.0)
        y = (1.0 - u_target) / delta
        for i_f, rf in enumerate(ratios):
            col_f = leff_grid[i_f]
            if with_backward:
                for i_b, rb in enumerate(ratios):
                    col_b = lbeff_grid[i_b]
                    g11 = col_f @ col_f
                    g12 = col_f @ col_b
                    g22 = col_b @ col_b
                    det = g11 * g22 - g12 * g12
                    if det <= 0:
                        continue
                    b1 = col_f @ y
                    b2 = col_b @ y
                    cf = (g22 * b1 - g12 * b2) / det
                    cb = (g11 * b2 - g12 * b1) / det
                    seeds.append((a, cf, cb, rf * alpha_phys, rb * alpha_phys))
            else:
                g11 = col_f @ col_f
                if g11 <= 0:
                    continue
                cf = (col_f @ y) / g11
                seeds.append((a, cf, 0.0, rf * alpha_phys, alpha_phys))
    return seeds


def _fit_exponential(z, target_db, alpha_phys):
    """Closed-form fit when there is no Raman coupling at all."""
    slope = np.polyfit(z, target_db, 1)[0]  # dB per metre
    alpha = -slope / _K_DB
    rms = float(np.sqrt(np.mean((target_db - slope * z - np.polyval(
        np.polyfit(z, target_db, 1), 0.0) + 0.0) ** 2))) if False else None
    fitted_db = np.polyval(np.polyfit(z, target_db, 1), z)
    rms = float(np.sqrt(np.mean((target_db - fitted_db) ** 2)))
    return alpha, rms


def fit_profile(
    evolution: PowerEvolution,
    config: LinkConfig,
    *,
    n_random_starts: int = 24,
    n_grid: int = 12,
    n_polish: int = 12,
    rng_seed: int = 20260823,
    max_iterations: int = 200,
    xtol: float = 1e-10,
    ftol: float = 1e-12,
) -> FitReport:
    """Fit the linearized profile to an ODE solution, channel by channel.

    The per-channel objective is the sum of squared dB-domain residuals over
    the evolution's z grid.  Free parameters are (alpha, c_f, c_b, alpha_f,
    alpha_b) within physical bounds; (P_f, P_b, f_hat) come from the link
    configuration and are held fixed.  When there is no backward pump, c_b
    is unidentifiable and is pinned to zero.

    Raises
    ------
    ValidationError
        If the evolution has fewer than 50 z samples or a channel's profile
        is not strictly positive.
    """
    z = evolution.z_grid
    if z.size < 50:
        raise ValidationError(
            f"profile fit needs >= 50 z samples, got {z.size}"
        )
    length = config.span.length
    p_f, p_b, f_hat = shared_fit_context(evolution, config)

    span = config.span
    c_r = span.raman_slope
    if c_r == 0.0 and span.gain_table is not None:
        offsets, values = span.gain_table
        if offsets[-1] > 0:
            c_r = max(values) / offsets[-1]

    rng = np.random.default_rng(rng_seed)
    fits = []
    prev_best: Optional[np.ndarray] = None
    for ch_idx in range(evolution.n_channels):
        f_i = config.grid.channels[ch_idx].center_frequency
        rho = normalized_profile(evolution, ch_idx)
        if np.any(rho <= 0.0):
            raise ValidationError(
                f"channel {ch_idx}: numeric profile is not strictly positive"
            )
        target_db = 10.0 * np.log10(rho)
        alpha_phys = span.alpha_at(f_i)

        if c_r == 0.0:
            alpha_fit, rms = _fit_exponential(z, target_db, alpha_phys)
            params = ProfileParams(alpha_fit, 0.0, 0.0, alpha_phys, alpha_phys,
                                   p_f, p_b, f_hat)
            fits.append(ChannelFit(params, rms, 1, True))
            continue

        delta = f_i - f_hat
        if delta == 0.0:
            # Center-frequency channel sees no tilt in this model.
            alpha_fit, rms = _fit_exponential(z, target_db, alpha_phys)
            params = ProfileParams(alpha_fit, c_r, c_r if p_b > 0 else 0.0,
                                   alpha_phys, alpha_phys, p_f, p_b, f_hat)
            fits.append(ChannelFit(params, rms, 1, True))
            continue

        with_backward = p_b > 0.0
        if with_backward:
            free = ["alpha", "c_f", "c_b", "alpha_f", "alpha_b"]
            fixed = {}
        else:
            free = ["alpha", "c_f", "alpha_f"]
            fixed = {"c_b": 0.0, "alpha_b": alpha_phys}

        bound_map = {
            "alpha": (alpha_phys / 5.0, 5.0 * alpha_phys),
            "c_f": (-10.0 * c_r, 10.0 * c_r),
            "c_b": (-10.0 * c_r, 10.0 * c_r),
            "alpha_f": (alpha_phys / 5.0, 5.0 * alpha_phys),
            "alpha_b": (alpha_phys / 5.0, 5.0 * alpha_phys),
        }
        scale_map = {
            "alpha": alpha_phys, "c_f": c_r, "c_b": c_r,
            "alpha_f": alpha_phys, "alpha_b": alpha_phys,
        }
        lo = np.array([bound_map[n][0] for n in free])
        hi = np.array([bound_map[n][1] for n in free])
        x_scale = np.array([scale_map[n] for n in free])

        residual, jacobian, unpack = _residual_and_jac(
            length, z, target_db, delta, p_f, p_b, free, fixed
        )

        nominal_full = {"alpha": alpha_phys, "c_f": c_r, "c_b": c_r,
                        "alpha_f": alpha_phys, "alpha_b": alpha_phys}
        seeds = [np.array([nominal_full[n] for n in free])]
        ratios = np.geomspace(0.2, 5.0, n_grid)
        grid_seeds = _varpro_seeds(length, z, target_db, delta, p_f, p_b,
                                   ratios, alpha_phys, with_backward)
        name_order = ("alpha", "c_f", "c_b", "alpha_f", "alpha_b")
        for full in grid_seeds:
            as_map = dict(zip(name_order, full))
            seeds.append(np.array([as_map[n] for n in free]))
        random_seeds = [lo + rng.random(len(free)) * (hi - lo)
                        for _ in range(n_random_starts)]
        if prev_best is not None and prev_best.size == len(free):
            random_seeds.append(prev_best.copy())

        clip = lambda s: np.clip(s, lo * (1 + 1e-9) + 0.0, hi * (1 - 1e-9))
        seeds = [clip(s) for s in seeds]
        scores = np.array([float(np.sum(residual(s) ** 2)) for s in seeds])
        order = np.argsort(scores)[: 1 + n_polish]
        to_polish = [seeds[k] for k in order] + [clip(s) for s in random_seeds]

        best = None
        for s0 in to_polish:
            try:
                res = least_squares(
                    residual, s0, jac=jacobian, bounds=(lo, hi),
                    method="trf", x_scale=x_scale,
                    xtol=xtol, ftol=ftol, gtol=1e-14,
                    max_nfev=max_iterations,
                )
            except Exception:
                continue
            rms = float(np.sqrt(np.mean(res.fun ** 2)))
            if best is None or rms < best[0]:
                best = (rms, res)
        if best is None:  # pragma: no cover - least_squares very rarely raises
            raise ValidationError(
                f"channel {ch_idx}: every fit attempt failed"
            )
        rms, res = best
        prev_best = res.x.copy()
        a, cf, cb, af, ab = unpack(res.x)
        params = ProfileParams(a, cf, cb, af, ab, p_f, p_b, f_hat)
        fits.append(ChannelFit(params, rms, int(res.nfev), res.status > 0))

    return FitReport(tuple(fits))

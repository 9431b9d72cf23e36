"""Structured-singular-value margins for the repeated real scalar block.

The only uncertainty structure in the loop is ``Delta = delta * I_2`` on
the ``w_omega``/``z_omega`` channel pair (the pulled-out mode frequency).
For that structure the exact real margin is cheap: march the closure
``w = delta * z`` along the real axis and bisect the first loss of
stability (or of well-posedness, the crossing at infinite frequency).
``mu_lower`` is the reciprocal of that smallest destabilizing magnitude
and is exact for this block, so the name keeps only the conventional
"lower" role it plays against the complex-structure bound.

``mu_upper`` is the frequency-maximized spectral radius of the w->z
transfer, the exact structured value for a repeated *complex* scalar and
hence an upper bound for the real one.  The critical frequency found by
the bisection is folded into the evaluation grid so the bound provably
dominates the margin numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IllPosedLoop, NominalUnstable
from .linss import StateSpace, lft_upper, spectral_abscissa, STAB_TOL

__all__ = ["MuResult", "mu_real_repeated", "destabilizing_frequency"]


@dataclass(frozen=True)
class MuResult:
    """Margins for the repeated-real-scalar uncertainty block.

    ``delta_crit`` is the signed smallest destabilizing value, or None
    when no real closure within the search range destabilizes the loop
    (then ``mu_lower`` is 0 by convention).
    """

    mu_lower: float
    mu_upper: float
    delta_crit: Optional[float]


def _destabilized(sys: StateSpace, delta: float, w_channel: str, z_channel: str) -> bool:
    try:
        closed = lft_upper(sys, delta, w_channel, z_channel)
    except IllPosedLoop:
        return True
    return spectral_abscissa(closed) >= -STAB_TOL


def _first_crossing(sys, sign, delta_max, w_channel, z_channel,
                    scan_points, tol):
    """Smallest |delta| with the given sign losing stability, or None."""
    grid = np.linspace(0.0, delta_max, scan_points + 1)[1:]
    lo = 0.0
    hit = None
    for t in grid:
        if _destabilized(sys, sign * t, w_channel, z_channel):
            hit = t
            break
        lo = t
    if hit is None:
        return None
    hi = hit
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _destabilized(sys, sign * mid, w_channel, z_channel):
            hi = mid
        else:
            lo = mid
    return sign * hi


def destabilizing_frequency(sys: StateSpace, delta: float,
                            w_channel: str = "w_omega",
                            z_channel: str = "z_omega") -> float:
    """|Im| of the closed-loop eigenvalue closest to the imaginary axis."""
    try:
        closed = lft_upper(sys, delta, w_channel, z_channel)
    except IllPosedLoop:
        return np.inf
    if closed.n_states == 0:
        return np.inf
    ev = np.linalg.eigvals(closed.A)
    return float(abs(ev[np.argmax(ev.real)].imag))


def mu_real_repeated(sys: StateSpace, delta_max: float = 20.0,
                     w_channel: str = "w_omega", z_channel: str = "z_omega",
                     scan_points: int = 64, tol: float = 1e-9,
                     n_freq: int = 400) -> MuResult:
    """Exact real margin and complex upper bound for ``delta * I``.

    The nominal loop (``delta = 0``) must be strictly stable.  Both signs
    of delta are scanned out to ``delta_max`` and the first crossing is
    bisected; no crossing means ``mu_lower = 0``.
    """
    if sys.n_states and spectral_abscissa(sys) >= -STAB_TOL:
        raise NominalUnstable(
            f"nominal system unstable (abscissa {spectral_abscissa(sys):.3e})")

    candidates = [d for d in (
        _first_crossing(sys, +1.0, delta_max, w_channel, z_channel, scan_points, tol),
        _first_crossing(sys, -1.0, delta_max, w_channel, z_channel, scan_points, tol),
    ) if d is not None]
    delta_crit = min(candidates, key=abs) if candidates else None
    mu_lower = 1.0 / abs(delta_crit) if delta_crit is not None else 0.0

    sub = sys.subsystem(outputs=[z_channel], inputs=[w_channel])
    freqs = [0.0]
    if sub.n_states:
        mags = np.abs(np.linalg.eigvals(sub.A))
        mags = mags[mags > 1e-12]
        if mags.size:
            freqs.extend(np.geomspace(mags.min() / 10.0, mags.max() * 10.0, n_freq))
    if delta_crit is not None:
        w_star = destabilizing_frequency(sys, delta_crit, w_channel, z_channel)
        if np.isfinite(w_star):
            freqs.extend([w_star, w_star * 0.999, w_star * 1.001])

    mu_upper = float(np.max(np.abs(np.linalg.eigvals(sub.D)))) if sub.D.size else 0.0
    for w in freqs:
        G = sub.transfer_at(1j * w) if w > 0.0 else sub.dc_gain()
        mu_upper = max(mu_upper, float(np.max(np.abs(np.linalg.eigvals(G)))))
    return MuResult(mu_lower=mu_lower, mu_upper=mu_upper, delta_crit=delta_crit)

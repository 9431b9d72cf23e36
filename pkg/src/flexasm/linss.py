"""Labeled-channel LTI state-space algebra.

Every dynamic block in the library is a :class:`StateSpace`: a continuous
time model

    x' = A x + B u,      y = C x + D u

whose input and output vectors are partitioned into *named channels*
(e.g. a 6-wide wrench ``"W_P"`` next to a 3-wide torque ``"T_G"``).  All
structural operations -- interconnection, channel inversion, linear
fractional transformations, frame changes -- address signals by channel
name, never by raw index, which is what keeps large block diagrams
assemblable without bookkeeping mistakes.

The module also provides the analysis layer used by every cost function:
frequency response, stability, controllable/observable projection, and the
H-infinity / H2 system norms.

Conventions
-----------
* Continuous time only, real matrices, Laplace variable s.
* Channels are ``(name, width)`` pairs; names are unique per direction.
* Systems are immutable; all operations return new objects, so concurrent
  evaluation of different systems or frequencies is safe.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    IllPosedLoop,
    MarginalModeObservable,
    NonSquareSelection,
    NonzeroFeedthrough,
    SingularDBlock,
    UnknownChannel,
    UnstableSystem,
    WidthMismatch,
)

__all__ = [
    "StateSpace",
    "FrequencyGrid",
    "FreqResponse",
    "StabilityResult",
    "ss",
    "gain",
    "integrator",
    "interconnect",
    "invert_channels",
    "lft_lower",
    "lft_upper",
    "freq_response",
    "sigma_max",
    "is_stable",
    "spectral_abscissa",
    "minimal_stable_projection",
    "hinf_norm",
    "h2_norm",
    "state_transform",
    "split_channel",
    "rename_channels",
]

# Stability boundary used throughout: poles with Re >= -STAB_TOL count as
# not (strictly) stable.
_log = logging.getLogger(__name__)

STAB_TOL = 1e-10

# Well-posedness bound on rcond(I - D_loop).
WELLPOSED_RCOND = 1e-10


def _norm_channels(spec: Iterable, total: int, kind: str):
    chans = []
    names = set()
    for entry in spec:
        name, width = entry
        width = int(width)
        if width < 1:
            raise ValueError(f"{kind} channel {name!r} must have width >= 1")
        if name in names:
            raise ValueError(f"duplicate {kind} channel name {name!r}")
        names.add(name)
        chans.append((str(name), width))
    if sum(w for _, w in chans) != total:
        raise ValueError(
            f"{kind} channel widths sum to {sum(w for _, w in chans)}, "
            f"expected {total}"
        )
    return tuple(chans)


def _ro(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateSpace:
    """Immutable labeled-channel continuous-time LTI model.

    Parameters
    ----------
    A, B, C, D:
        Real matrices with the usual shapes (n x n, n x m, p x n, p x m).
    in_channels, out_channels:
        Ordered ``(name, width)`` pairs partitioning the input/output
        vectors.  Widths must sum to m and p respectively.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    in_channels: tuple = field(default=())
    out_channels: tuple = field(default=())

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        p, m = D.shape
        B = np.zeros((n, m)) if self.B is None else np.asarray(self.B, dtype=float).reshape(n, m)
        C = np.zeros((p, n)) if self.C is None else np.asarray(self.C, dtype=float).reshape(p, n)
        if A.shape != (n, n):
            raise ValueError("A must be square")
        object.__setattr__(self, "A", _ro(A))
        object.__setattr__(self, "B", _ro(B))
        object.__setattr__(self, "C", _ro(C))
        object.__setattr__(self, "D", _ro(D))
        ins = self.in_channels or ((("u", m),) if m else ())
        outs = self.out_channels or ((("y", p),) if p else ())
        object.__setattr__(self, "in_channels", _norm_channels(ins, m, "input"))
        object.__setattr__(self, "out_channels", _norm_channels(outs, p, "output"))

    # -- basic introspection ------------------------------------------------

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.D.shape[0]

    def _slice(self, channels, name) -> slice:
        start = 0
        for chan, width in channels:
            if chan == name:
                return slice(start, start + width)
            start += width
        raise UnknownChannel(f"channel {name!r} not in {[c for c, _ in channels]}")

    def in_slice(self, name: str) -> slice:
        return self._slice(self.in_channels, name)

    def out_slice(self, name: str) -> slice:
        return self._slice(self.out_channels, name)

    def in_width(self, name: str) -> int:
        s = self.in_slice(name)
        return s.stop - s.start

    def out_width(self, name: str) -> int:
        s = self.out_slice(name)
        return s.stop - s.start

    def has_input(self, name: str) -> bool:
        return any(c == name for c, _ in self.in_channels)

    def has_output(self, name: str) -> bool:
        return any(c == name for c, _ in self.out_channels)

    def subsystem(self, outputs=None, inputs=None) -> "StateSpace":
        """Select a subset of channels (state dimension unchanged)."""
        in_names = [c for c, _ in self.in_channels] if inputs is None else list(inputs)
        out_names = [c for c, _ in self.out_channels] if outputs is None else list(outputs)
        cols = np.concatenate([np.arange(self.in_slice(c).start, self.in_slice(c).stop)
                               for c in in_names]) if in_names else np.array([], dtype=int)
        rows = np.concatenate([np.arange(self.out_slice(c).start, self.out_slice(c).stop)
                               for c in out_names]) if out_names else np.array([], dtype=int)
        return StateSpace(
            self.A, self.B[:, cols], self.C[rows, :], self.D[np.ix_(rows, cols)],
            tuple((c, self.in_width(c)) for c in in_names),
            tuple((c, self.out_width(c)) for c in out_names),
        )

    def transfer_at(self, s: complex) -> np.ndarray:
        """Evaluate C (sI - A)^-1 B + D at one complex frequency."""
        if self.n_states == 0:
            return self.D.astype(complex)
        X = np.linalg.solve(s * np.eye(self.n_states) - self.A, self.B)
        return self.C @ X + self.D

    def dc_gain(self) -> np.ndarray:
        """Static gain D - C A^-1 B (A must be invertible)."""
        if self.n_states == 0:
            return self.D.copy()
        return self.D - self.C @ np.linalg.solve(self.A, self.B)

    def __repr__(self):  # pragma: no cover - debug helper
        ins = ", ".join(f"{c}({w})" for c, w in self.in_channels)
        outs = ", ".join(f"{c}({w})" for c, w in self.out_channels)
        return f"StateSpace(n={self.n_states}, in=[{ins}], out=[{outs}])"


def ss(A, B, C, D, in_channels=(), out_channels=()) -> StateSpace:
    """Shorthand constructor."""
    return StateSpace(A, B, C, D, in_channels, out_channels)


def gain(D, in_channels=(), out_channels=()) -> StateSpace:
    """Static (stateless) gain block."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    return StateSpace(np.zeros((0, 0)), np.zeros((0, D.shape[1])),
                      np.zeros((D.shape[0], 0)), D, in_channels, out_channels)


def integrator(width: int, in_name: str = "u", out_name: str = "y") -> StateSpace:
    """Bank of ``width`` parallel integrators 1/s."""
    eye = np.eye(width)
    return StateSpace(np.zeros((width, width)), eye, eye, np.zeros((width, width)),
                      ((in_name, width),), ((out_name, width),))


def rename_channels(sys: StateSpace, inputs=None, outputs=None) -> StateSpace:
    """Return the same model with channels renamed via the given mappings."""
    inputs = inputs or {}
    outputs = outputs or {}
    return StateSpace(
        sys.A, sys.B, sys.C, sys.D,
        tuple((inputs.get(c, c), w) for c, w in sys.in_channels),
        tuple((outputs.get(c, c), w) for c, w in sys.out_channels),
    )


def split_channel(sys: StateSpace, name: str, parts: Sequence) -> StateSpace:
    """Split one channel into consecutive narrower ones (metadata only).

    ``parts`` is a list of ``(name, width)`` whose widths must sum to the
    original channel width.  Works on whichever direction carries ``name``.
    """
    def _split(channels, is_input):
        out = []
        hit = False
        for chan, width in channels:
            if chan == name:
                hit = True
                if sum(w for _, w in parts) != width:
                    raise WidthMismatch(
                        f"split of {name!r}: parts sum to "
                        f"{sum(w for _, w in parts)}, channel width {width}")
                out.extend((str(p), int(w)) for p, w in parts)
            else:
                out.append((chan, width))
        return tuple(out), hit

    ins, hit_in = _split(sys.in_channels, True)
    outs, hit_out = _split(sys.out_channels, False)
    if not (hit_in or hit_out):
        raise UnknownChannel(f"channel {name!r} not present")
    return StateSpace(sys.A, sys.B, sys.C, sys.D, ins, outs)


def state_transform(sys: StateSpace, T: np.ndarray) -> StateSpace:
    """Similarity transform z = T^-1 x (response invariant)."""
    Ti = np.linalg.inv(T)
    return StateSpace(Ti @ sys.A @ T, Ti @ sys.B, sys.C @ T, sys.D,
                      sys.in_channels, sys.out_channels)


# ---------------------------------------------------------------------------
# Interconnection
# ---------------------------------------------------------------------------

def _resolve(blocks, ref: str, direction: str):
    """Resolve 'block.channel' into (block_index, slice into stacked vector)."""
    try:
        bname, cname = ref.split(".", 1)
    except ValueError:
        raise UnknownChannel(f"reference {ref!r} must be 'block.channel'") from None
    for idx, (name, blk) in enumerate(blocks):
        if name != bname:
            continue
        sl = blk.in_slice(cname) if direction == "in" else blk.out_slice(cname)
        offset = sum(b.n_inputs if direction == "in" else b.n_outputs
                     for _, b in blocks[:idx])
        return slice(offset + sl.start, offset + sl.stop)
    raise UnknownChannel(f"block {bname!r} not found for reference {ref!r}")


def interconnect(blocks, wiring, external_in, external_out) -> StateSpace:
    """Close a block diagram of labeled systems into one system.

    Parameters
    ----------
    blocks:
        Ordered ``(name, StateSpace)`` pairs.  States stack in this order.
    wiring:
        ``(source, target)`` pairs of ``"block.channel"`` references; the
        source is an output channel, the target an input channel of equal
        width.  Several sources may target one input (signals add), and one
        source may fan out to several inputs.
    external_in:
        ``(new_name, target_or_targets)`` pairs.  External inputs add on
        top of any wired signal at the same target.  Inputs that are
        neither wired nor external are held at zero.
    external_out:
        ``(new_name, source)`` pairs selecting which internal outputs the
        closed system exposes.

    Notes
    -----
    The static loop ``I - D_loop`` must be well posed: it is solved once,
    so the result has exactly ``sum(n_states)`` states.
    """
    blocks = list(blocks)
    names = [n for n, _ in blocks]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate block names in {names}")

    n = sum(b.n_states for _, b in blocks)
    m_all = sum(b.n_inputs for _, b in blocks)
    p_all = sum(b.n_outputs for _, b in blocks)
    A = sla.block_diag(*[b.A for _, b in blocks]) if blocks else np.zeros((0, 0))
    B = sla.block_diag(*[b.B for _, b in blocks])
    C = sla.block_diag(*[b.C for _, b in blocks])
    D = sla.block_diag(*[b.D for _, b in blocks])
    A = np.asarray(A, dtype=float).reshape(n, n)
    B = np.asarray(B, dtype=float).reshape(n, m_all)
    C = np.asarray(C, dtype=float).reshape(p_all, n)
    D = np.asarray(D, dtype=float).reshape(p_all, m_all)

    S = np.zeros((m_all, p_all))
    for src, dst in wiring:
        so = _resolve(blocks, src, "out")
        si = _resolve(blocks, dst, "in")
        if (so.stop - so.start) != (si.stop - si.start):
            raise WidthMismatch(
                f"wiring {src!r} (width {so.stop - so.start}) -> "
                f"{dst!r} (width {si.stop - si.start})")
        S[si, so] += np.eye(so.stop - so.start)

    ext_in = []
    for entry in external_in:
        new_name, targets = entry
        if isinstance(targets, str):
            targets = [targets]
        slices = [_resolve(blocks, t, "in") for t in targets]
        widths = {s.stop - s.start for s in slices}
        if len(widths) != 1:
            raise WidthMismatch(f"external input {new_name!r} targets differ in width")
        ext_in.append((str(new_name), widths.pop(), slices))
    m_ext = sum(w for _, w, _ in ext_in)
    E = np.zeros((m_all, m_ext))
    col = 0
    for _, width, slices in ext_in:
        for s in slices:
            E[s, col:col + width] += np.eye(width)
        col += width

    ext_out = []
    for new_name, src in external_out:
        s = _resolve(blocks, src, "out")
        ext_out.append((str(new_name), s.stop - s.start, s))
    p_ext = sum(w for _, w, _ in ext_out)
    F = np.zeros((p_ext, p_all))
    row = 0
    for _, width, s in ext_out:
        F[row:row + width, s] = np.eye(width)
        row += width

    loop = np.eye(p_all) - D @ S
    if p_all and 1.0 / np.linalg.cond(loop, 1) < WELLPOSED_RCOND:
        raise IllPosedLoop(
            f"static loop is ill posed (rcond={1.0 / np.linalg.cond(loop, 1):.2e})")
    psi = np.linalg.solve(loop, np.eye(p_all)) if p_all else loop

    A_cl = A + B @ S @ psi @ C
    B_cl = B @ (np.eye(m_all) + S @ psi @ D) @ E
    C_cl = F @ psi @ C
    D_cl = F @ psi @ D @ E

    return StateSpace(A_cl, B_cl, C_cl, D_cl,
                      tuple((nm, w) for nm, w, _ in ext_in),
                      tuple((nm, w) for nm, w, _ in ext_out))


def invert_channels(sys: StateSpace, in_names, out_names) -> StateSpace:
    """Swap the roles of selected input and output channels.

    The feedthrough block from the selected inputs to the selected outputs
    must be square and invertible.  New inputs are the former outputs (in
    listed order) followed by the untouched inputs; dually for outputs.
    """
    in_names = [in_names] if isinstance(in_names, str) else list(in_names)
    out_names = [out_names] if isinstance(out_names, str) else list(out_names)
    w_in = sum(sys.in_width(c) for c in in_names)
    w_out = sum(sys.out_width(c) for c in out_names)
    if w_in != w_out:
        raise NonSquareSelection(f"invert widths {w_in} vs {w_out}")

    cols1 = np.concatenate([np.arange(sys.in_slice(c).start, sys.in_slice(c).stop)
                            for c in in_names])
    rows1 = np.concatenate([np.arange(sys.out_slice(c).start, sys.out_slice(c).stop)
                            for c in out_names])
    cols2 = np.array([i for i in range(sys.n_inputs) if i not in set(cols1)], dtype=int)
    rows2 = np.array([i for i in range(sys.n_outputs) if i not in set(rows1)], dtype=int)

    B1, B2 = sys.B[:, cols1], sys.B[:, cols2]
    C1, C2 = sys.C[rows1, :], sys.C[rows2, :]
    D11 = sys.D[np.ix_(rows1, cols1)]
    D12 = sys.D[np.ix_(rows1, cols2)]
    D21 = sys.D[np.ix_(rows2, cols1)]
    D22 = sys.D[np.ix_(rows2, cols2)]

    cond = np.linalg.cond(D11) if D11.size else np.inf
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularDBlock(f"feedthrough block not invertible (cond={cond:.3e})")
    _log.debug("invert_channels %s -> %s: feedthrough condition %.3e",
               in_names, out_names, cond)
    Dinv = np.linalg.solve(D11, np.eye(w_in))

    A_n = sys.A - B1 @ Dinv @ C1
    B_n = np.hstack([B1 @ Dinv, B2 - B1 @ Dinv @ D12])
    C_n = np.vstack([-Dinv @ C1, C2 - D21 @ Dinv @ C1])
    D_n = np.block([[Dinv, -Dinv @ D12],
                    [D21 @ Dinv, D22 - D21 @ Dinv @ D12]])

    new_in = tuple((c, sys.out_width(c)) for c in out_names) + tuple(
        (c, w) for c, w in sys.in_channels if c not in in_names)
    new_out = tuple((c, sys.in_width(c)) for c in in_names) + tuple(
        (c, w) for c, w in sys.out_channels if c not in out_names)
    return StateSpace(A_n, B_n, C_n, D_n, new_in, new_out)


def lft_lower(plant: StateSpace, K: StateSpace, u_channel: str, y_channel: str) -> StateSpace:
    """Lower LFT: close ``u_channel = K * y_channel`` and drop both."""
    if K.n_inputs != plant.out_width(y_channel) or K.n_outputs != plant.in_width(u_channel):
        raise WidthMismatch(
            f"K is {K.n_outputs}x{K.n_inputs}, loop needs "
            f"{plant.in_width(u_channel)}x{plant.out_width(y_channel)}")
    k_in = K.in_channels[0][0]
    k_out = K.out_channels[0][0]
    ext_in = [(c, f"p.{c}") for c, _ in plant.in_channels if c != u_channel]
    ext_out = [(c, f"p.{c}") for c, _ in plant.out_channels if c != y_channel]
    return interconnect(
        [("p", plant), ("k", K)],
        [(f"p.{y_channel}", f"k.{k_in}"), (f"k.{k_out}", f"p.{u_channel}")],
        ext_in, ext_out)


def lft_upper(plant: StateSpace, delta: float, w_channel: str = "w_omega",
              z_channel: str = "z_omega") -> StateSpace:
    """Upper LFT with a repeated real scalar: close ``w = delta * z``."""
    w = plant.in_width(w_channel)
    if plant.out_width(z_channel) != w:
        raise WidthMismatch(f"{w_channel}/{z_channel} widths differ")
    blk = gain(float(delta) * np.eye(w), (("z", w),), (("w", w),))
    ext_in = [(c, f"p.{c}") for c, _ in plant.in_channels if c != w_channel]
    ext_out = [(c, f"p.{c}") for c, _ in plant.out_channels if c != z_channel]
    return interconnect(
        [("p", plant), ("d", blk)],
        [(f"p.{z_channel}", "d.z"), ("d.w", f"p.{w_channel}")],
        ext_in, ext_out)


# ---------------------------------------------------------------------------
# Frequency response and stability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing positive angular frequencies [rad/s]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise ValueError("frequency grid is empty")
        if np.any(pts <= 0.0) or np.any(np.diff(pts) <= 0.0):
            raise ValueError("grid must be strictly increasing and positive")
        object.__setattr__(self, "points", _ro(pts))

    @staticmethod
    def log(wmin: float, wmax: float, n: int) -> "FrequencyGrid":
        return FrequencyGrid(np.geomspace(wmin, wmax, n))

    def __len__(self):
        return self.points.size


@dataclass(frozen=True)
class FreqResponse:
    """Result of a frequency sweep.

    ``values[k]`` is the complex p x m transfer matrix at ``points[k]``;
    entries for skipped pole-adjacent frequencies are recorded in
    ``skipped`` and excluded from ``points``/``values``.
    """

    points: np.ndarray
    values: np.ndarray
    skipped: tuple = ()

    def magnitude(self) -> np.ndarray:
        """Largest singular value per retained grid point."""
        return np.array([np.linalg.svd(v, compute_uv=False)[0] for v in self.values])


def freq_response(sys: StateSpace, grid) -> FreqResponse:
    """Evaluate the transfer matrix on a grid of angular frequencies.

    Points closer than 1e-12 to an eigenvalue of A (an exactly marginal
    pole) are skipped and reported, not errored: open-loop free-floating
    plants legitimately carry such modes.
    """
    pts = grid.points if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    eigs = np.linalg.eigvals(sys.A) if sys.n_states else np.array([])
    kept, vals, skipped = [], [], []
    for w in pts:
        if eigs.size and np.min(np.abs(1j * w - eigs)) < 1e-12:
            skipped.append(float(w))
            continue
        kept.append(float(w))
        vals.append(sys.transfer_at(1j * w))
    return FreqResponse(np.asarray(kept), np.asarray(vals), tuple(skipped))


def sigma_max(sys: StateSpace, w: float) -> float:
    """Largest singular value of the transfer matrix at one frequency."""
    return float(np.linalg.svd(sys.transfer_at(1j * w), compute_uv=False)[0])


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    spectral_abscissa: float

    def __bool__(self):
        return self.stable


def spectral_abscissa(sys_or_A) -> float:
    A = sys_or_A.A if isinstance(sys_or_A, StateSpace) else np.asarray(sys_or_A)
    if A.shape[0] == 0:
        return -np.inf
    return float(np.max(np.linalg.eigvals(A).real))


def is_stable(sys: StateSpace) -> StabilityResult:
    """Strict Hurwitz test: every pole must satisfy Re < -1e-10."""
    alpha = spectral_abscissa(sys)
    return StabilityResult(alpha < -STAB_TOL, alpha)


# ---------------------------------------------------------------------------
# Minimal projection
# ---------------------------------------------------------------------------

def _staircase_basis(A, B, tol):
    """Orthogonal basis ordering controllable states first (Van Dooren).

    Returns ``(Z, k)``: columns of Z are the new basis, the first k states
    span the controllable subspace of (A, B).
    """
    n = A.shape[0]
    if n == 0:
        return np.eye(0), 0
    scale = max(1.0, float(np.linalg.norm(A)), float(np.linalg.norm(B)))
    thresh = tol * scale
    Z = np.eye(n)
    Acur = A.copy()
    Bcur = B.copy()
    k = 0
    while k < n and Bcur.shape[1] > 0:
        U, s, _ = np.linalg.svd(Bcur) if Bcur.size else (np.eye(n - k), np.array([]), None)
        r = int(np.sum(s > thresh))
        if r == 0:
            break
        Acur = U.T @ Acur @ U
        Zk = np.eye(n)
        Zk[k:, k:] = U
        Z = Z @ Zk
        k += r
        Bcur = Acur[r:, :r]
        Acur = Acur[r:, r:]
    return Z, k


def minimal_stable_projection(sys: StateSpace, in_channels=None, out_channels=None,
                              tol: float = 1e-8) -> StateSpace:
    """Project onto the selected channel pair and drop silent states.

    States that are uncontrollable from the selected inputs or unobservable
    from the selected outputs (staircase rank test at ``tol``) are removed.
    If any *remaining* state has a pole with Re >= -1e-10 the norm on this
    channel is infinite and :class:`MarginalModeObservable` is raised.
    """
    if isinstance(in_channels, str):
        in_channels = [in_channels]
    if isinstance(out_channels, str):
        out_channels = [out_channels]
    sub = sys.subsystem(outputs=out_channels, inputs=in_channels)

    Z, kc = _staircase_basis(sub.A, sub.B, tol)
    A1 = (Z.T @ sub.A @ Z)[:kc, :kc]
    B1 = (Z.T @ sub.B)[:kc, :]
    C1 = (sub.C @ Z)[:, :kc]

    W, ko = _staircase_basis(A1.T, C1.T, tol)
    A2 = (W.T @ A1 @ W)[:ko, :ko]
    B2 = (W.T @ B1)[:ko, :]
    C2 = (C1 @ W)[:, :ko]

    reduced = StateSpace(A2, B2, C2, sub.D, sub.in_channels, sub.out_channels)
    alpha = spectral_abscissa(reduced)
    if alpha >= -STAB_TOL:
        raise MarginalModeObservable(
            f"marginal or unstable mode (abscissa {alpha:.3e}) visible on "
            f"channel pair {in_channels} -> {out_channels}")
    return reduced


# ---------------------------------------------------------------------------
# System norms
# ---------------------------------------------------------------------------

def _hamiltonian_imag_crossings(sys: StateSpace, g: float):
    """Imaginary-axis eigenfrequencies of the H-infinity test Hamiltonian."""
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n = A.shape[0]
    R = g * g * np.eye(sys.n_inputs) - D.T @ D
    Rinv = np.linalg.solve(R, np.eye(sys.n_inputs))
    Ah = A + B @ Rinv @ D.T @ C
    H = np.block([
        [Ah, B @ Rinv @ B.T],
        [-C.T @ (np.eye(sys.n_outputs) + D @ Rinv @ D.T) @ C, -Ah.T],
    ])
    ev = np.linalg.eigvals(H)
    crossings = [abs(l.imag) for l in ev
                 if abs(l.real) <= 1e-8 * max(1.0, abs(l.imag))]
    return sorted(set(np.round(crossings, 12)))


def _seed_frequencies(sys: StateSpace):
    eigs = np.linalg.eigvals(sys.A)
    ws = {1e-6, 1e-3, 1.0, 1e3}
    for l in eigs:
        w0 = abs(l.imag) if abs(l.imag) > 1e-12 else abs(l.real)
        if w0 > 1e-12:
            for f in (0.2, 0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 2.0, 5.0):
                ws.add(w0 * f)
    return sorted(ws)


def hinf_norm(sys: StateSpace, rtol: float = 1e-6) -> float:
    """Peak gain sup_w sigma_max(G(jw)) via Hamiltonian bisection.

    The bracket starts at the seeded-grid maximum and 1.5x that value and
    is widened geometrically if needed; bisection with Bruinsma-Steinbuch
    midpoint refinement terminates at relative width ``rtol``.
    """
    if sys.n_states == 0:
        return float(np.linalg.svd(sys.D, compute_uv=False)[0]) if sys.D.size else 0.0
    if not is_stable(sys):
        raise UnstableSystem(
            f"H-infinity norm of unstable system (abscissa {spectral_abscissa(sys):.3e})")

    sd = float(np.linalg.svd(sys.D, compute_uv=False)[0]) if sys.D.size else 0.0
    glo = max(sd, max(sigma_max(sys, w) for w in _seed_frequencies(sys)))
    if glo <= 0.0:
        return 0.0
    ghi = 1.5 * glo
    for _ in range(80):
        if not _hamiltonian_imag_crossings(sys, ghi * (1.0 + 1e-12)):
            break
        glo = ghi
        ghi *= 2.0
    else:  # pragma: no cover - defensive
        raise ArithmeticError("H-infinity bracket expansion failed")

    while (ghi - glo) > rtol * ghi:
        g = 0.5 * (glo + ghi)
        ws = _hamiltonian_imag_crossings(sys, g)
        if ws:
            cand = [g]
            for i in range(len(ws) - 1):
                cand.append(sigma_max(sys, 0.5 * (ws[i] + ws[i + 1])))
            cand.extend(sigma_max(sys, w) for w in ws if w > 0)
            glo = max(glo, max(cand))
            if glo >= ghi:
                ghi = glo * (1.0 + rtol)
        else:
            ghi = g
    return 0.5 * (glo + ghi)


def h2_norm(sys: StateSpace) -> float:
    """H2 norm sqrt(trace(C P C^T)) with A P + P A^T + B B^T = 0.

    The Lyapunov equation is solved by Schur reduction and back
    substitution (Bartels-Stewart).  Requires strict stability and zero
    feedthrough.
    """
    if np.max(np.abs(sys.D)) > 1e-12 if sys.D.size else False:
        raise NonzeroFeedthrough("H2 norm needs D = 0 on the selected channel")
    if sys.n_states == 0:
        return 0.0
    if not is_stable(sys):
        raise UnstableSystem(
            f"H2 norm of unstable system (abscissa {spectral_abscissa(sys):.3e})")
    P = sla.solve_continuous_lyapunov(sys.A, -sys.B @ sys.B.T)
    val = float(np.trace(sys.C @ P @ sys.C.T))
    return float(np.sqrt(max(val, 0.0)))

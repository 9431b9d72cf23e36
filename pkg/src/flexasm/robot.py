"""Serial-arm models: rigid link chains, kinematics, joint trajectories.

An arm has six rigid links L0..L5 spanning joints J0..J6, with five
revolute joints at J1..J5.  J0 is the end-effector side (it grips tiles
or docking ports), J6 mounts on the robot's central hub.  All link frames
align at the zero configuration; joint k rotates link k relative to link
k-1 about ``axes[k-1]``.

Chains are built in either orientation:

* ``base="J0"``: twist imposed at J0 (arm standing on the structure),
  child wrench at J6 (the hub hangs on the arm).
* ``base="J6"``: twist imposed at J6 (arm hanging off the hub), child
  wrench at J0 (free tip, or a carried tile).

Published link data gives masses, CoMs and inertias but no joint
offsets; the default geometry places each joint pair symmetrically about
the link CoM (offset = twice the CoM position), which is the only
self-consistent inference and is overridable in configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IkNotConverged, JointOutOfRange
from .linss import StateSpace, interconnect
from .multibody import (
    ModalBodyData,
    apply_frame,
    dcm_about_axis,
    titop_two_port,
    transport_inertia,
)

__all__ = [
    "ArmGeometry",
    "default_arm_geometry",
    "validate_joints",
    "arm_two_port",
    "link_poses",
    "forward_kinematics",
    "inverse_kinematics",
    "dls_solve",
    "QuinticTrajectory",
    "quintic_scalar",
    "quintic_waypoints",
    "JOINT_LIMIT",
]

JOINT_LIMIT = 2.0 * np.pi

# Table data for one arm: six links, five joints.
_LINK_MASSES = (5.0, 5.0, 10.0, 5.0, 10.0, 5.0)
_LINK_COM_X = (0.0, 0.0, -0.1062, 0.0, -0.1031, 0.0)
_LINK_COM_Z = (0.0625, 0.05, 0.0, 0.0810, 0.0, 0.0810)
_LINK_J = (0.2, 0.2, 0.4, 0.2, 0.4, 0.2)
# default axis stack: shoulder yaw then four pitches.  All-pitch distal
# joints let the zig-zag link stack straighten fully, which the walking
# gait needs to straddle diagonal tiles at the published 1 m pitch.
_DEFAULT_AXES = ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (0.0, 1.0, 0.0),
                 (0.0, 1.0, 0.0), (0.0, 1.0, 0.0))


@dataclass(frozen=True)
class ArmGeometry:
    """Six-link serial arm description in link frames.

    ``joint_offsets[i]`` is J_i -> J_{i+1} in link i's frame; ``coms[i]``
    the link CoM from J_i; ``inertias[i]`` the link inertia at its CoM.
    """

    joint_offsets: np.ndarray         # (6, 3)
    joint_axes: np.ndarray            # (5, 3) unit vectors
    masses: np.ndarray                # (6,)
    coms: np.ndarray                  # (6, 3)
    inertias: np.ndarray              # (6, 3, 3)

    def __post_init__(self):
        off = np.asarray(self.joint_offsets, dtype=float).reshape(6, 3)
        axes = np.asarray(self.joint_axes, dtype=float).reshape(5, 3)
        nrm = np.linalg.norm(axes, axis=1)
        if np.any(np.abs(nrm - 1.0) > 1e-9):
            axes = axes / nrm[:, None]
        object.__setattr__(self, "joint_offsets", off)
        object.__setattr__(self, "joint_axes", axes)
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float).reshape(6))
        object.__setattr__(self, "coms", np.asarray(self.coms, dtype=float).reshape(6, 3))
        object.__setattr__(self, "inertias", np.asarray(self.inertias, dtype=float).reshape(6, 3, 3))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def reach(self) -> float:
        return float(np.sum(np.linalg.norm(self.joint_offsets, axis=1)))


def default_arm_geometry() -> ArmGeometry:
    coms = np.column_stack([_LINK_COM_X, np.zeros(6), _LINK_COM_Z])
    return ArmGeometry(
        joint_offsets=2.0 * coms,
        joint_axes=np.array(_DEFAULT_AXES),
        masses=np.array(_LINK_MASSES),
        coms=coms,
        inertias=np.array([j * np.eye(3) for j in _LINK_J]),
    )


def validate_joints(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(5)
    if np.any(np.abs(q) > JOINT_LIMIT + 1e-12):
        raise JointOutOfRange(f"joint angles {q} exceed +-2*pi")
    return q


# ---------------------------------------------------------------------------
# dynamics: static chain model
# ---------------------------------------------------------------------------

def _link_body(geom: ArmGeometry, i: int, reverse: bool) -> ModalBodyData:
    """Rigid two-port data for link i, P at J_i (or J_{i+1} when reversed)."""
    m = float(geom.masses[i])
    if not reverse:
        com = geom.coms[i]
        pc = geom.joint_offsets[i]
    else:
        com = geom.coms[i] - geom.joint_offsets[i]
        pc = -geom.joint_offsets[i]
    return ModalBodyData(
        mass=m, com=com,
        inertia_P=transport_inertia(geom.inertias[i], m, com),
        freqs=[], dampings=[], L_P=np.zeros((0, 6)),
        phi_C=np.zeros((6, 0)), pc=pc, name=f"link{i}")


def arm_two_port(geom: ArmGeometry, q, base: str = "J0") -> StateSpace:
    """Static 12x12 arm model at a fixed joint configuration.

    Channels: inputs ``(W_tip, xdd_base)``, outputs ``(xdd_tip, W_base)``.
    Base/tip signals are expressed in the adjacent link's frame (l0 at J0,
    l5 at J6); joint rotations are substituted numerically, so gridding a
    trajectory is just a loop over configurations.
    """
    q = validate_joints(q)
    rots = [dcm_about_axis(geom.joint_axes[k], q[k]) for k in range(5)]

    blocks = []
    wiring = []
    if base == "J0":
        for i in range(6):
            sys = titop_two_port(_link_body(geom, i, reverse=False))
            if i >= 1:
                # P-side signals of link i re-expressed in link i-1's frame
                sys = apply_frame(sys, "xdd_P", rots[i - 1])
                sys = apply_frame(sys, "W_P", rots[i - 1])
            blocks.append((f"L{i}", sys))
        for i in range(5):
            wiring.append((f"L{i}.xdd_C", f"L{i + 1}.xdd_P"))
            wiring.append((f"L{i + 1}.W_P", f"L{i}.W_C"))
        ext_in = [("W_tip", "L5.W_C"), ("xdd_base", "L0.xdd_P")]
        ext_out = [("xdd_tip", "L5.xdd_C"), ("W_base", "L0.W_P")]
    elif base == "J6":
        for i in range(6):
            sys = titop_two_port(_link_body(geom, i, reverse=True))
            if i <= 4:
                # P-side now sits at J_{i+1}: express in link i+1's frame
                sys = apply_frame(sys, "xdd_P", rots[i].R.T)
                sys = apply_frame(sys, "W_P", rots[i].R.T)
            blocks.append((f"L{i}", sys))
        for i in range(5, 0, -1):
            wiring.append((f"L{i}.xdd_C", f"L{i - 1}.xdd_P"))
            wiring.append((f"L{i - 1}.W_P", f"L{i}.W_C"))
        ext_in = [("W_tip", "L0.W_C"), ("xdd_base", "L5.xdd_P")]
        ext_out = [("xdd_tip", "L0.xdd_C"), ("W_base", "L5.W_P")]
    else:
        raise ValueError(f"base must be 'J0' or 'J6', got {base!r}")

    return interconnect(blocks, wiring, ext_in, ext_out)


# ---------------------------------------------------------------------------
# kinematics
# ---------------------------------------------------------------------------

def link_poses(geom: ArmGeometry, q, base: str = "J0"):
    """Joint positions and link-frame rotations in base coordinates.

    Returns ``(joints, rotations)``: seven joint positions J0..J6 and six
    rotation matrices mapping link-frame coordinates into the base frame.
    """
    q = validate_joints(q)
    joints = [np.zeros(3)]
    rots = []
    R = np.eye(3)
    p = np.zeros(3)
    for i in range(6):
        if i >= 1:
            R = R @ dcm_about_axis(geom.joint_axes[i - 1], q[i - 1]).R
        rots.append(R)
        p = p + R @ geom.joint_offsets[i]
        joints.append(p)
    joints = np.array(joints)
    if base == "J6":
        R6 = rots[-1]
        joints = (joints - joints[-1]) @ R6
        rots = [R6.T @ r for r in rots]
    elif base != "J0":
        raise ValueError(f"base must be 'J0' or 'J6', got {base!r}")
    return joints, rots


def forward_kinematics(geom: ArmGeometry, q, base: str = "J0"):
    """Pose (position, DCM) of the far end of the chain in base coordinates."""
    joints, rots = link_poses(geom, q, base)
    if base == "J0":
        return joints[-1], rots[-1]
    return joints[0], rots[0]


def link_mass_properties(geom: ArmGeometry, q, base: str = "J0"):
    """Per-link ``(mass, com, inertia_at_com, R)`` in base coordinates."""
    joints, rots = link_poses(geom, q, base)
    out = []
    for i in range(6):
        R = rots[i]
        com = joints[i] + R @ geom.coms[i]
        out.append((float(geom.masses[i]), com, geom.inertias[i], R))
    return out


def dls_solve(residual: Callable, q0, lower, upper, tol: float,
              max_iter: int = 200, damping: float = 1e-2,
              stall_iters: int = 25):
    """Damped least-squares descent on a residual vector.

    Levenberg-Marquardt flavor: the damping grows when a step fails to
    shrink the error and relaxes otherwise.  The Jacobian comes from
    forward differences; joint values are clipped to the bounds.  Raises
    :class:`IkNotConverged` when the error stays above ``tol`` or stops
    improving for ``stall_iters`` iterations (so alternative seeds can be
    tried cheaply).
    """
    q = np.clip(np.array(q0, dtype=float), lower, upper)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    h = 1e-6
    lam = damping
    e = np.asarray(residual(q), dtype=float)
    en = float(np.linalg.norm(e))
    best = en
    since_best = 0
    for _ in range(max_iter):
        if en < tol:
            return q
        J = np.zeros((e.size, q.size))
        for k in range(q.size):
            dq = np.array(q)
            dq[k] += h
            J[:, k] = (np.asarray(residual(dq)) - e) / h
        for _ in range(10):
            step = J.T @ np.linalg.solve(
                J @ J.T + lam * lam * np.eye(e.size), -e)
            nrm = np.linalg.norm(step)
            if nrm > 0.6:
                step *= 0.6 / nrm
            q_new = np.clip(q + step, lower, upper)
            e_new = np.asarray(residual(q_new), dtype=float)
            en_new = float(np.linalg.norm(e_new))
            if en_new < en:
                lam = max(lam / 3.0, 1e-5)
                break
            lam *= 5.0
        else:
            raise IkNotConverged(f"descent stuck at task error {en:.3e}")
        q, e, en = q_new, e_new, en_new
        if en < best * (1.0 - 1e-9):
            best = en
            since_best = 0
        else:
            since_best += 1
            if since_best >= stall_iters:
                raise IkNotConverged(f"stalled at task error {en:.3e}")
    raise IkNotConverged(f"task error {en:.3e} after {max_iter} iterations")


def inverse_kinematics(geom: ArmGeometry, target_pos, target_axis=None,
                       q_seed=None, base: str = "J0",
                       tool_axis=(0.0, 0.0, 1.0),
                       pos_tol: float = 1e-4, axis_tol: float = 1e-3):
    """Joint angles reaching a tip position (and optionally a tool axis).

    A five-joint chain cannot command a full 6-dof pose, so the task is
    position plus, when ``target_axis`` is given, the direction of the
    tool axis.  Damped least squares from ``q_seed`` (home by default).
    """
    target_pos = np.asarray(target_pos, dtype=float).reshape(3)
    tool_axis = np.asarray(tool_axis, dtype=float)
    tool_axis = tool_axis / np.linalg.norm(tool_axis)
    if target_axis is not None:
        target_axis = np.asarray(target_axis, dtype=float)
        target_axis = target_axis / np.linalg.norm(target_axis)
    q0 = np.zeros(5) if q_seed is None else validate_joints(q_seed)
    scale = axis_tol and pos_tol / axis_tol

    def residual(q):
        pos, R = forward_kinematics(geom, q, base)
        e = pos - target_pos
        if target_axis is None:
            return e
        return np.concatenate([e, scale * (R @ tool_axis - target_axis)])

    q = dls_solve(residual, q0, -JOINT_LIMIT * np.ones(5),
                  JOINT_LIMIT * np.ones(5), tol=0.5 * pos_tol)
    return q


# ---------------------------------------------------------------------------
# quintic joint trajectories
# ---------------------------------------------------------------------------

def quintic_scalar(t: float) -> float:
    """Rest-to-rest quintic shape: s(t) = 10 t^3 - 15 t^4 + 6 t^5."""
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


@dataclass(frozen=True)
class QuinticTrajectory:
    """Rest-to-rest joint sweep q0 -> q1 on normalized time [0, 1]."""

    q0: np.ndarray
    q1: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q0", np.asarray(self.q0, dtype=float))
        object.__setattr__(self, "q1", np.asarray(self.q1, dtype=float))

    def at(self, t: float) -> np.ndarray:
        return self.q0 + quintic_scalar(float(t)) * (self.q1 - self.q0)

    def waypoints(self, z: int) -> list:
        if z < 2:
            raise ValueError("need at least two waypoints")
        return [self.at(k / (z - 1)) for k in range(z)]


def quintic_waypoints(q0, q1, z: int) -> list:
    """z equally spaced waypoints of the quintic sweep from q0 to q1."""
    return QuinticTrajectory(q0, q1).waypoints(z)

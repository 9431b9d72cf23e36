"""The walking arm: kinematics, trajectories, and its static model.

Shows forward/inverse kinematics of one five-joint arm, the rest-to-rest
quintic sweeps used to grid trajectories, and the chain model whose base
sees the full 40 kg of the arm.
"""

import numpy as np

from flexasm import robot

geom = robot.default_arm_geometry()
print("arm reach (sum of link offsets):", round(geom.reach(), 4), "m;",
      "total mass:", geom.total_mass, "kg")

pos, R = robot.forward_kinematics(geom, np.zeros(5))
print("home tip position:", np.round(pos, 4))

target = pos + np.array([0.25, 0.1, -0.3])
q = robot.inverse_kinematics(geom, target)
reached, _ = robot.forward_kinematics(geom, q)
print("IK to", np.round(target, 3), "-> error",
      np.linalg.norm(reached - target))

wps = robot.quintic_waypoints(np.zeros(5), q, 7)
print("quintic sweep: 7 waypoints, midpoint fraction",
      robot.quintic_scalar(0.5))

sys = robot.arm_two_port(geom, q, base="J0")
Dm = sys.D[sys.out_slice("W_base"), :][:, sys.in_slice("xdd_base")]
print("mass seen at the base:", -Dm[0, 0], "kg")

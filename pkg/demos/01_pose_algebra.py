"""Pose algebra walkthrough: relative transforms, anchors, and the geodesic
metric.

Run with: python3 demos/01_pose_algebra.py
"""

import numpy as np

from relhpe import (EulerAngles, SE3Pose, apply_anchor, euler_from_rotation,
                    geodesic_deg, relative, rotation_from_euler)


def pose(yaw, pitch=0.0, roll=0.0, t=(0.0, 0.0, 0.0)):
    return SE3Pose(rotation_from_euler(EulerAngles(yaw, pitch, roll)),
                   np.array(t), "world")


def main():
    anchor = pose(5.0, -2.0, 1.0, t=(10.0, 0.0, 850.0))
    query = pose(40.0, 12.0, -4.0, t=(35.0, -8.0, 820.0))

    rel = relative(query, anchor)
    print("anchor-query gap:",
          f"{geodesic_deg(anchor.rotation, query.rotation):.3f} deg")
    print("relative rotation (quaternion):", rel.rotation.quat)
    print("relative translation (mm):", rel.translation)

    # composing the relative transform with the anchor recovers the query
    recovered = apply_anchor(rel, anchor)
    print("recovery error:",
          f"{geodesic_deg(recovered.rotation, query.rotation):.2e} deg,",
          f"{np.linalg.norm(recovered.translation - query.translation):.2e} mm")

    e = euler_from_rotation(recovered.rotation)
    print(f"recovered Euler: yaw={e.yaw:.2f} pitch={e.pitch:.2f} "
          f"roll={e.roll:.2f} (deg)")


if __name__ == "__main__":
    main()

"""Multi-stage camera loss walkthrough.

Builds a four-stage sequence of increasingly accurate predictions and shows
how the stage weights and the per-term breakdown behave.

Run with: python3 demos/02_training_loss.py
"""

import math

import numpy as np

from relhpe import (EulerAngles, LossConfig, StagePrediction, loss_cam,
                    rotation_from_euler)
from relhpe.camera import CameraPose


def main():
    true = CameraPose(t=np.array([12.0, -4.0, 830.0]),
                      q=rotation_from_euler(EulerAngles(25.0, 8.0, -3.0)),
                      fov_h=math.radians(55.0), fov_w=math.radians(65.0))

    # each stage halves the remaining error
    stages = []
    for k in range(1, 5):
        f = 0.5 ** k
        pred = CameraPose(
            t=true.t + f * np.array([40.0, -25.0, 60.0]),
            q=rotation_from_euler(EulerAngles(25.0 + f * 20.0, 8.0, -3.0)),
            fov_h=true.fov_h + f * math.radians(6.0),
            fov_w=true.fov_w - f * math.radians(4.0))
        stages.append(StagePrediction(k, pred, true))

    for gamma in (0.3, 0.6, 1.0):
        total, breakdown = loss_cam(stages, LossConfig(gamma=gamma))
        print(f"gamma={gamma}: total={total:.4f}")
        for b in breakdown:
            print(f"  stage {b.stage_index}: weight={b.weight:.4f} "
                  f"T={b.translation:.4f} R={b.rotation:.4f} F={b.fov:.4f}")

    # ablation modes
    for mode in ("full", "no_fov", "rotation_only", "geodesic"):
        total, _ = loss_cam(stages, LossConfig(mode=mode))
        print(f"mode={mode:14s} total={total:.4f}")


if __name__ == "__main__":
    main()

"""Where to sample: deepest mouth point and lip-plane direction from RGB-D.

A synthetic face stands in for the camera: a flat lip region at 0.4 m, a
mouth cavity 7 cm deeper, and landmarks around the lips.

Run: python demos/sampling_pose.py
"""
import numpy as np

from swabsim.pose import min_bounding_rect, sampling_pose, synthetic_scene

for yaw, noise in [(0.0, 0.0), (12.0, 0.0), (12.0, 0.002)]:
    landmarks, depth, truth = synthetic_scene(yaw_deg=yaw, noise_sigma=noise, seed=0)
    pose = sampling_pose(landmarks, depth)
    err = np.degrees(np.arccos(np.clip(pose.direction @ truth["normal"], -1, 1)))
    print(f"yaw {yaw:5.1f} deg, noise {1000 * noise:.0f} mm")
    print(f"  rect      {tuple(round(x, 1) for x in min_bounding_rect(landmarks).as_tuple())}")
    print(f"  point     {np.round(pose.point, 4)} m at pixel {pose.pixel}")
    print(f"  direction {np.round(pose.direction, 4)} (error {err:.2f} deg)")
    print(f"  approach  {np.round(pose.approach, 4)}")

"""Simulated tactile sensor: render a contact frame, find the blob, read the force.

Run: python demos/tactile_sensing.py [out.pgm]
"""
import sys

import numpy as np

from swabsim.tactile import (
    CalibrationModel,
    TactileSensor,
    extract_contact,
    feature_to_force,
    force_to_offset,
    render_frame,
    save_frame,
)

cal = CalibrationModel()
sensor = TactileSensor(noise_sigma=0.01, seed=0)
rest = sensor.rest_feature
print(f"rest blob: center ({rest.center_u:.1f}, {rest.center_v:.1f}) px, radius {rest.radius:.1f} px")

# A few wall pushes: lateral ones slide the blob, an axial one grows it.
print("\n target [N]  deflection [mm]          feature (u, v, r)        read [N]")
for target, direction in [(0.05, (1, 0, 0)), (0.15, (0, -1, 0)), (0.22, (0.6, 0.8, 0)), (0.30, (0, 0, 1))]:
    d = np.array(direction, float) * force_to_offset(target, cal)
    _, feat = sensor.read(d)
    read = feature_to_force(feat, rest, cal)
    print(f"{target:10.2f}  {np.array2string(d, precision=1):22s} "
          f"({feat.center_u:5.2f}, {feat.center_v:5.2f}, {feat.radius:5.2f})  {read:8.4f}")

# Frames are plain PGM images, readable by most viewers.
out = sys.argv[1] if len(sys.argv) > 1 else "contact_frame.pgm"
frame = render_frame([10.0, -6.0, 4.0], noise_seed=1)
save_frame(frame, out)
f = extract_contact(frame)
print(f"\nwrote {out}; blob at ({f.center_u:.2f}, {f.center_v:.2f}) r={f.radius:.2f}")

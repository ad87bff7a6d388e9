"""Fitting the offset-to-force curve from noisy bench samples.

A reference load cell would give forces with some scatter; here 160 samples
carry 0.02 N of Gaussian noise. The quadratic fit averages it out.

Run: python demos/calibration_fit.py
"""
import numpy as np

from swabsim.tactile import CalibrationModel, fit_offset_calibration, offset_to_force

rng = np.random.default_rng(42)
truth = CalibrationModel()
offsets = rng.uniform(0, 45, 160)
measured = offset_to_force(offsets, truth) + rng.normal(0, 0.02, offsets.size)

free = fit_offset_calibration(np.column_stack([offsets, measured]))
pinned = fit_offset_calibration(np.column_stack([offsets, measured]), through_origin=True)
print("            c2           c1          c0")
print(f"truth   {truth.offset_quadratic[0]:.4e}  {truth.offset_quadratic[1]:.4e}  {truth.offset_quadratic[2]:.4f}")
print(f"free    {free[0]:.4e}  {free[1]:.4e}  {free[2]:.4f}")
print(f"pinned  {pinned[0]:.4e}  {pinned[1]:.4e}  {pinned[2]:.4f}")

model = CalibrationModel(offset_quadratic=pinned)
grid = np.linspace(0, 45, 10)
err = np.abs(offset_to_force(grid, model) - offset_to_force(grid, truth))
print(f"\nmean residual vs samples {np.mean(np.abs(offset_to_force(offsets, model) - measured)):.4f} N")
print(f"worst error vs truth on [0, 45] mm {err.max():.4f} N")

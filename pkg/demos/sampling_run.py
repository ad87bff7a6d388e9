"""The full sampling sequence in a simulated mouth.

The arm approaches along the swab axis, then the Left, Right and Middle
phases each press the swab against their wall until the tactile error has
settled. The trace is written as CSV for plotting.

Run: python demos/sampling_run.py [out_dir]
"""
import sys

from swabsim.config import load_scenario
from swabsim.runner import FORCE_BAND, run_scenario, write_trace

cfg = load_scenario("default")
trace, metrics = run_scenario(cfg)

print(f"{'phase':9s}{'status':11s}{'time [s]':>9s}{'steady [N]':>12s}{'max [N]':>9s}{'in band':>9s}")
for p in metrics.phases:
    print(f"{p.name:9s}{p.status:11s}{p.duration:9.3f}{p.steady_force:12.3f}{p.max_force:9.3f}{p.band_fraction:9.2f}")
print(f"\ntotal {metrics.total_duration:.2f} s simulated in {metrics.wall_clock:.2f} s; "
      f"band {FORCE_BAND[0]}-{FORCE_BAND[1]} N")

out = sys.argv[1] if len(sys.argv) > 1 else "sampling_out"
for path in write_trace(trace, out, metrics):
    print("wrote", path)

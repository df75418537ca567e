"""Delta and the average phase rate across the DC offset, with the step edges located.

The narrow dip near 0.49 is only 0.006 wide, so a coarser grid merges
two steps and detect_steps raises InconsistentOrder.  About 20 s on one core.
"""

import math
import sys

import phaselock.sweep as sw
from phaselock import BiasSpec

T = 2 * math.pi / 0.47
family = BiasSpec.rect_pulse_train(0.0, 3.5, 0.2, T, area="lobe")
workers = int(sys.argv[1]) if len(sys.argv) > 1 else 1

rows = sw.iv_curve(family, sw.grid_from(-1.0, 1.6, 0.005), worker_count=workers)
steps = sw.detect_steps(rows, family)

unit = 2 * math.pi / T
print(f"{'iota_dc':>8} {'Delta':>10}  {'regime':<14} v_av/(2pi/T)")
for r in rows[::20]:
    print(f"{r.iota_dc:8.3f} {r.delta:10.4f}  {r.regime:<14} {r.v_av / unit:.4f}")

print("\nsteps (edges refined on Delta = 0):")
for s in steps:
    print(f"  k = {s.k:+d}  [{s.lo:.6f}, {s.hi:.6f}]" + ("  (open)" if s.lo_open or s.hi_open else ""))

print("\nnegative Delta minima between steps:")
for x, d in sw.negative_dips(rows):
    print(f"  iota_dc = {x:.3f}  Delta = {d:.4f}")

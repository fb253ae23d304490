"""
Streaming hardware model
========================

Operating frequencies, the on-chip buffer budget, and a raster-order
simulation of the path-cost datapath checked against the frame-based
reference.
"""

import numpy as np

from rankstereo import SgmConfig
from rankstereo.arch import (bitwidth_plan, frequency_table, memory_budget, simulate_lr,
                             streaming_pipeline)
from rankstereo.cost import CostVolume, max_cost
from rankstereo.imagery import GrayImage
from rankstereo.sgm import Penalties
from rankstereo.synthetic import layered_scene

# %%
# Nine line matchers share one pixel period, so the clock is nine times the
# pixel rate.
for label, mhz in frequency_table():
    print(f"{label:>14}: {mhz:6.1f} MHz")

# %%
# Path-cost buffer for 64 disparities at 450 pixels per line, 16-bit entries.
bits = memory_budget(64, 450, 2**16 - 1)
print(f"buffer budget: {bits} bits = {bits / 8 / 1024:.1f} KB")

# %%
# Bit widths that can never overflow: costs need ceil(log2(C_max + 1)) bits
# and a path cost never exceeds C_max + P2'.
cfg = SgmConfig()
cost_bits, lr_bits = bitwidth_plan(max_cost(cfg.cost_kind, cfg.kernel), cfg.penalties)
print(f"cost bits {cost_bits}, path-cost bits {lr_bits}")

# %%
# Stream a small scene pixel by pixel through line buffers, the rank cost
# units and the shared path-cost engine.
scene = layered_scene(64, 40, (2, 6, 11), seed=4)
disp, rep = streaming_pipeline(scene.left, scene.right, SgmConfig(dmax=16, lmax=2**lr_bits - 1))
for line in rep.lines():
    print(line)

# %%
# Too narrow a word saturates. With 6-bit path costs the engine clips and
# counts events; the output may then drift from the reference.
rng = np.random.default_rng(0)
vol = CostVolume(rng.integers(0, 60, (12, 16, 8)))
_, eng = simulate_lr(vol, GrayImage(rng.integers(0, 256, (12, 16), dtype=np.uint8)),
                     Penalties(8, 96), 2**6 - 1)
print(f"saturation events at 6 bits: {eng.saturations}")

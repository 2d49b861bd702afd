#!/usr/bin/env python3
# Plant 2-cells on a random graph, sample flows that circulate around them,
# then ask the factorization heuristic to find the cells back from the flows
# alone.

import numpy as np

from cellflow import InferenceConfig, SynthConfig, infer_mfci, random_complex, sample_flows
from cellflow.synth import reference_loss

synth = SynthConfig(node_count=15, edge_probability=0.6, planted_cells=5,
                    flow_count=16, cell_std=1.0, noise_std=0.1, seed=3)
truth = random_complex(synth)
flows = sample_flows(truth, synth.flow_count, synth.cell_std, synth.noise_std,
                     np.random.default_rng(3))
print("instance:", truth)
print("noise-floor loss of the planted complex:", round(reference_loss(truth, flows), 4))

cfg = InferenceConfig(
    total_cells=5,
    candidates_per_iteration=3,   # discretize the 3 best factor columns
    added_per_iteration=1,        # keep the best candidate per iteration
    method="svd",
    discretization="deterministic",
    projection="exact",
)
inferred, trace = infer_mfci(truth.graph, flows, cfg)

print("\niteration | cells | loss")
for record in trace.records:
    print(f"{record.iteration:9d} | {record.cells_total:5d} | {record.loss:.4f}")

planted = {cell.canonical() for cell in truth.cells}
recovered = sum(cell.canonical() in planted for cell in inferred.cells)
print(f"\nexactly recovered planted cells: {recovered} of {truth.cell_count}")
print("final loss:", round(trace.final.loss, 4))
print("solver calls consumed:", trace.final.cumulative_solver_calls)

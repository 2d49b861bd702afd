#!/usr/bin/env python3
# Edge flows on a graph split into three orthogonal parts: gradient flows
# (differences of node potentials), curl flows (circulations around 2-cells),
# and a harmonic remainder.  This walkthrough builds a tiny cell complex and
# takes the decomposition apart.

import numpy as np

from cellflow import CellComplex, OrientedGraph, hodge_decompose, validate_cycle

# A square with one diagonal: 4 nodes, 5 edges.
graph = OrientedGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
print("graph:", graph)
print("incidence matrix (rows = nodes, columns = edges):")
print(graph.incidence().toarray())

# Glue a 2-cell onto the triangle 0-1-2.  Its boundary is a signed edge
# vector: +1 with the edge orientation, -1 against it.
triangle = validate_cycle(graph, [0, 1, 2, 0])
complex_ = CellComplex(graph, [triangle])
print("\ntriangle boundary vector:", triangle.dense())

# Compose a flow from known ingredients plus a bit of everything else.
rng = np.random.default_rng(7)
potentials = rng.standard_normal(4)
gradient_part = graph.incidence().T.astype(float) @ potentials
circulation_part = 2.0 * triangle.dense()
flow = gradient_part + circulation_part + rng.standard_normal(5) * 0.3

grad, curl, harm = hodge_decompose(graph, complex_, flow)

print("\nflow:           ", np.round(flow, 4))
print("gradient part:  ", np.round(grad, 4))
print("curl part:      ", np.round(curl, 4))
print("harmonic part:  ", np.round(harm, 4))
print("\nrecomposition error:", np.linalg.norm(grad + curl + harm - flow))
print("grad . curl =", float(grad @ curl))
print("grad . harm =", float(grad @ harm))
print("curl . harm =", float(curl @ harm))

# The harmonic norm is the inference loss: what no set of node potentials
# and no circulation around the *known* cells can explain.
print("\nloss (harmonic norm):", np.linalg.norm(harm))

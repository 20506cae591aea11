"""
Same problem, different qubits
==============================

With offsets attached to physical qubits and couplers, moving an embedding by
one unit cell changes which offsets the problem sees.  Repeated experiments
show how far apart the success-rate distributions land.
"""

import itertools

from qacal import (AnnealSchedule, NoiseModel, SimulatedAnnealer, build_chimera, embed_clique,
                   embedding_variation_histograms, generate_clique_problem, translate_embedding,
                   with_ground_energy)
from qacal.analysis import means_differ

q = with_ground_energy(generate_clique_problem(8, "uniform", seed=3))
g = build_chimera(3, 3)
base = embed_clique(8, g)
offsets = [(0, 0), (0, 1), (1, 0), (1, 1)]
embs = [translate_embedding(base, g, off) for off in offsets]

for label, noise in [("physical offsets", NoiseModel.physical(g, 0.05, 0.01, seed=0)),
                     ("no noise", None)]:
    be = SimulatedAnnealer(g, noise, AnnealSchedule(100, 0.1, 5.0), 1.0)
    hists = embedding_variation_histograms(q, embs, be, samplings=1, experiments=20, reads=200)
    print(label)
    for off, h in zip(offsets, hists):
        print(f"  offset {off}: mean {h.mean:.3f} +- {h.standard_error:.3f}")
    split = [(offsets[a.embedding], offsets[b.embedding])
             for a, b in itertools.combinations(hists, 2) if means_differ(a, b)]
    print("  pairs apart by more than 3 standard errors:", split)

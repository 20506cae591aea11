"""
Calibrating by sampling corrections
===================================

Draw correction matrices dQ with a latin hypercube inside the range that keeps
Q0 + dQ normalized, measure each one and keep the best.  The winner is then
measured again with fresh seeds, because its recorded score is optimistically
biased: it was picked as the maximum of many noisy estimates.
"""

from qacal import (AnnealSchedule, NoiseModel, SimulatedAnnealer, argmax_strategy, build_chimera,
                   dq_ranges, embed_clique, evaluate_batch, evaluate_repeated,
                   generate_clique_problem, lhs, with_ground_energy)

q = with_ground_energy(generate_clique_problem(8, "uniform", seed=3))
g = build_chimera(2, 2)
emb = embed_clique(8, g)
backend = SimulatedAnnealer(g, NoiseModel.logical(8, 0.05, 0.01, seed=1),
                            AnnealSchedule(100, 0.1, 5.0), 1.0)

# eta = 0.05: each element may move by 5% of its normalization-preserving range
box = dq_ranges(q, 0.05)
design = lhs(box, 300, seed=2)
ds = evaluate_batch(q, design, backend, emb, 200, seed=3, eta=0.05)
print(f"{len(ds)} corrections, success rates {ds.success_rate.min():.3f}..{ds.success_rate.max():.3f}")

best = argmax_strategy(ds)
print("recorded score of the winner", best.metrics.success_rate)

###############################################################################
# Ten fresh samplings of 200 reads, with and without the winner.
baseline = evaluate_repeated(q, None, backend, emb, 10, 200, seed=4)
verified = evaluate_repeated(q, best.matrix, backend, emb, 10, 200, seed=4)
print(f"baseline {baseline.mean_sr:.3f} +- {baseline.std_sr:.3f}")
print(f"argmax   {verified.mean_sr:.3f} +- {verified.std_sr:.3f}")

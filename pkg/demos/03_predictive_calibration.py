"""
A linear surrogate of the annealer
==================================

Fit an affine model of performance over the sampled corrections, let
differential evolution find its optimum inside boxes of growing eta, and
measure each answer on the annealer.  The boxes past the sampled eta are
pure extrapolation, so every candidate is checked.
"""

from qacal import (AnnealSchedule, NoiseModel, SimulatedAnnealer, build_chimera, dq_ranges,
                   embed_clique, evaluate_batch, generate_clique_problem, lhs,
                   predictive_strategy, with_ground_energy)

q = with_ground_energy(generate_clique_problem(8, "uniform", seed=3))
g = build_chimera(2, 2)
emb = embed_clique(8, g)
backend = SimulatedAnnealer(g, NoiseModel.logical(8, 0.05, 0.01, seed=1),
                            AnnealSchedule(100, 0.1, 5.0), 1.0)
ds = evaluate_batch(q, lhs(dq_ranges(q, 0.05), 600, seed=2), backend, emb, 200, seed=3, eta=0.05)

res = predictive_strategy(ds, q, backend, emb, eta_list=[0.01, 0.02, 0.05, 0.1, 0.15],
                          repeats=10, reads=200, seed=4)
sel = res.selection
print(f"model: reg={sel.reg} alpha={sel.alpha} pooled CV R^2={sel.cv_r2:.3f}")
print(f"baseline {res.baseline.mean_sr:.3f}")
for c in res.per_eta:
    print(f"eta {c.eta:<5} predicted {c.predicted:.3f}  measured {c.measured.mean_sr:.3f}"
          f" +- {c.measured.std_sr:.3f}")
print("best eta", res.best.eta)

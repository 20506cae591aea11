"""
A noisy annealer stand-in
=========================

Build a small clique problem, embed it on a Chimera graph and see what fixed
offsets on the couplers do to the success rate.
"""

import numpy as np

from qacal import (AnnealSchedule, NoiseModel, SimulatedAnnealer, build_chimera, compute_metrics,
                   embed_clique, generate_clique_problem, with_ground_energy)

# an 8-variable clique, normalized to [-1, 1], with its exact ground energy attached
q = with_ground_energy(generate_clique_problem(8, "uniform", seed=3))
print("ground energy", q.ground_energy)

# two Chimera unit cells per side hold an 8-clique with chains of three qubits
g = build_chimera(2, 2)
emb = embed_clique(8, g)
print("chains", emb.chains)

schedule = AnnealSchedule(sweeps=100, beta_start=0.1, beta_end=5.0)

###############################################################################
# Without noise the annealer solves the problem a fair fraction of the time.
clean = SimulatedAnnealer(g, None, schedule, chain_strength=1.0)
print("noiseless", compute_metrics(clean.sample(q, emb, 500, seed=0), q))

###############################################################################
# Systematic offsets are drawn once and applied to every read.  Per-read
# Gaussian jitter comes on top.  Success is always judged against the
# problem we meant to submit.
for scale in (0.02, 0.05, 0.1):
    noisy = SimulatedAnnealer(g, NoiseModel.logical(8, scale, sigma=0.01, seed=0), schedule, 1.0)
    m = compute_metrics(noisy.sample(q, emb, 500, seed=0), q)
    print(f"offsets up to {scale}: success rate {m.success_rate:.3f}")

###############################################################################
# Cancelling the offsets by hand recovers most of the loss.  In practice
# they are unknown, which is what the calibration strategies are for.
nm = NoiseModel.logical(8, 0.05, sigma=0.0, seed=0)
be = SimulatedAnnealer(g, nm, schedule, 1.0)
fixed = q.with_flat(np.clip(q.flat() - nm.systematic, -1, 1))
print("offsets cancelled", compute_metrics(be.sample(fixed, emb, 500, seed=0, reference=q), q))

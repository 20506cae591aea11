"""Calibration of quantum-annealer inputs against systematic Hamiltonian error.

Submodules
----------
qubo        problems, energies, normalization, correction ranges, metrics
chimera     Chimera graphs, clique embeddings, embedding and unembedding
annealer    noisy simulated annealer and the sample-set contract
remote      HTTP client for an external sampler service
sampling    latin hypercube sampling, batch evaluation, dataset files
regression  linear surrogate models, cross-validation, model selection
de          differential evolution
strategies  argmax and predictive correction strategies
analysis    performance/learning curves, line walks, embedding histograms
cli         command-line orchestration
"""
__version__ = "0.1.0"

from .qubo import (ENERGY_TOL, CalibrationMatrix, Metrics, QuboProblem, RangeBounds,
                   brute_force_ground_state, compute_metrics, dq_ranges, energies, energy,
                   generate_clique_problem, normalize, relative_energy, with_ground_energy)
from .chimera import (ChimeraGraph, Embedding, EmbeddingError, build_chimera, check_embedding,
                      embed_clique, embed_qubo, translate_embedding, unembed)
from .annealer import (AnnealSchedule, NoiseModel, SampleSet, SimulatedAnnealer, apply_noise,
                       read_stream, sample, simulated_anneal_read)
from .remote import (MalformedResponseError, RemoteSampler, SamplerError, SamplerHTTPError,
                     SamplerNetworkError, remote_sample)
from .sampling import (CalibrationDataset, derive_seed, evaluate_batch, lhs, load_dataset,
                       save_dataset)
from .regression import (RegressionModel, UndefinedVarianceError, cross_validate, fit_linear,
                         r_squared, select_model)
from .de import DEConfig, differential_evolution
from .strategies import argmax_strategy, evaluate_repeated, predictive_strategy
from .analysis import (CurvePoint, bootstrap_performance_curve, embedding_variation_histograms,
                       learning_curve, random_walk_probe)

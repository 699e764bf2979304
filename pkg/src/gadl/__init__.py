"""gadl: tied-weight autoencoder stacks trained by a GA/backprop hybrid.

A population of complete layer weight-sets evolves by rank-based culling,
uniform crossover, and zero-mutation, while survivors are refined with
backpropagation between generations. Stacks are assembled greedily layer
by layer, and a harness compares the hybrid against plain multi-restart
backprop under an equal gradient-update budget.
"""

from .autoencoder import (
    Gradients,
    TiedAutoencoder,
    decode,
    encode,
    gradient,
    init_autoencoder,
    reconstruct,
    rmse,
    sgd_step,
    sparsity,
)
from .classifier import SoftmaxClassifier, error_rate, predict, train_classifier
from .data import (
    Dataset,
    LabeledDataset,
    load_idx_images,
    load_idx_labels,
    subset,
    synthetic_blobs,
    to_dataset,
)
from .ga import (
    Chromosome,
    EvaluatedChromosome,
    GaConfig,
    Population,
    crossover,
    evaluate,
    generation_step,
    init_population,
    mutate,
    rank_and_cull,
    refine_survivors,
    select_parents,
    train_layer,
)
from .harness import ExperimentConfig, compare, load_config, run_baseline, run_ga
from .kernels import BACKEND
from .numerics import RandomStream, matvec, matvec_transposed, sigmoid
from .serialize import load_autoencoder, load_stack, save_autoencoder, save_stack
from .stack import DeepStack, extract_features, push_trained_layer, train_stack

__version__ = "0.1.0"

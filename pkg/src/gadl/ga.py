"""Population-based training of one tied-autoencoder layer.

Each chromosome is a complete parameter set for the layer under training.
One generation does, in order:

1. score every chromosome (reconstruction RMSE on a fixed evaluation set,
   fitness = 1/RMSE),
2. sort fittest-first and drop the bottom half,
3. refine every survivor with a fixed number of SGD steps on mini-batches,
4. refill the culled slots with offspring bred from the refined survivors:
   parents drawn uniformly (fitness ignored), uniform per-parameter
   crossover, then mutation that overwrites individual weights with exact
   zeros.

The budget currency is gradient updates; fitness evaluations are free.
Every random decision comes from a labelled fork of one stream, so a whole
training run is a pure function of (config, shape, data order, seed).
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .autoencoder import (
    TiedAutoencoder,
    as_batch,
    gradient,
    init_autoencoder,
    rmse,
    sgd_step,
    sparsity,
)
from .numerics import RandomStream

__all__ = [
    "FITNESS_EPS",
    "Chromosome",
    "EvaluatedChromosome",
    "GaConfig",
    "GenerationRecord",
    "Population",
    "crossover",
    "evaluate",
    "generation_cost",
    "generation_step",
    "history_to_csv",
    "init_population",
    "mutate",
    "rank_and_cull",
    "refine_survivors",
    "select_parents",
    "train_layer",
]

# fitness = 1 / max(rmse, FITNESS_EPS); the floor keeps a perfect
# reconstruction from producing an infinite fitness while preserving order
FITNESS_EPS = 1e-12


@dataclass(frozen=True)
class GaConfig:
    """Knobs for one layer's evolutionary run.

    ``updates_per_survivor_per_generation=None`` means one epoch-equivalent
    of mini-batches per generation, split evenly across survivors. The
    culled fraction is fixed at one half.
    """

    population_size: int = 10
    crossover_rate: float = 0.8
    mutation_rate: float = 0.01
    updates_per_survivor_per_generation: int | None = None
    learning_rate: float = 0.1
    batch_size: int = 20
    fitness_eval_sample_count: int = 1000
    budget_total_updates: int = 40000
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2 != 0:
            raise ValueError("population_size must be even and >= 2")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        u = self.updates_per_survivor_per_generation
        if u is not None and u < 0:
            raise ValueError("updates_per_survivor_per_generation must be >= 0")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.fitness_eval_sample_count < 1:
            raise ValueError("fitness_eval_sample_count must be >= 1")
        if self.budget_total_updates < 1:
            raise ValueError("budget_total_updates must be >= 1")

    @property
    def survivor_count(self):
        return self.population_size // 2

    @property
    def cull_count(self):
        return self.population_size // 2


@dataclass
class Chromosome:
    """One complete layer parameter set; the unit of selection."""

    params: TiedAutoencoder
    id: int
    birth_generation: int


@dataclass
class EvaluatedChromosome:
    """Chromosome plus its score; ``rmse is None`` until evaluated."""

    chromosome: Chromosome
    rmse: float | None = None
    fitness: float | None = None


@dataclass
class Population:
    members: list
    generation: int
    updates_consumed: int
    next_id: int


@dataclass
class GenerationRecord:
    generation: int
    best_rmse: float
    mean_rmse: float
    best_sparsity: float
    updates_consumed: int


def init_population(cfg, shape, rng):
    """Seed ``population_size`` chromosomes from independent substreams."""
    hidden, visible = shape
    members = []
    for i in range(cfg.population_size):
        ae = init_autoencoder(hidden, visible, rng.fork("init", i))
        members.append(EvaluatedChromosome(Chromosome(ae, id=i, birth_generation=0)))
    return Population(members, generation=0, updates_consumed=0,
                      next_id=cfg.population_size)


def evaluate(pop, eval_samples):
    """Fill in rmse and fitness for every member; order unchanged."""
    members = []
    for m in pop.members:
        r = rmse(m.chromosome.params, eval_samples)
        members.append(EvaluatedChromosome(m.chromosome, r, 1.0 / max(r, FITNESS_EPS)))
    return replace(pop, members=members)


def _rank_key(member):
    # fittest first, ties broken by lower id
    return (-member.fitness, member.chromosome.id)


def rank_and_cull(pop):
    """Sort fittest-first and keep the top half.

    Returns ``(survivors, culled_count)``. Ties rank the lower chromosome
    id first, so the split is stable.
    """
    if any(m.rmse is None for m in pop.members):
        raise ValueError("population must be evaluated before ranking")
    ranked = sorted(pop.members, key=_rank_key)
    culled_count = len(ranked) // 2
    return ranked[: len(ranked) - culled_count], culled_count


def resolve_updates_per_survivor(cfg, n_samples):
    """SGD steps each survivor gets per generation.

    Explicit config value wins; otherwise one epoch-equivalent of
    mini-batches over the training set, divided evenly across survivors
    (never below one).
    """
    if cfg.updates_per_survivor_per_generation is not None:
        return cfg.updates_per_survivor_per_generation
    n_batches = max(1, n_samples // cfg.batch_size)
    return max(1, n_batches // cfg.survivor_count)


def generation_cost(cfg, n_samples):
    """Gradient updates one generation consumes."""
    return cfg.survivor_count * resolve_updates_per_survivor(cfg, n_samples)


def _batch_indices(n_samples, batch_size, count, rng, generation):
    """Deterministic mini-batch index blocks for one generation.

    Blocks come from permutations of the sample range, forked from the
    layer stream by (generation, repetition), and are consumed in order.
    """
    blocks = []
    rep = 0
    per_perm = max(1, n_samples // batch_size)
    while len(blocks) < count:
        perm = rng.fork("batches", generation, rep).permutation(n_samples)
        for k in range(per_perm):
            blocks.append(perm[k * batch_size : (k + 1) * batch_size])
        rep += 1
    return blocks[:count]


def refine_survivors(survivors, data, cfg, generation, rng):
    """Backprop-refine each survivor on its own run of mini-batches.

    Returns ``(refined, updates_used)``. Refined members lose their stale
    scores (``rmse`` comes back as None); the caller re-evaluates.
    """
    x = as_batch(data, survivors[0].chromosome.params.visible)
    u = resolve_updates_per_survivor(cfg, x.shape[0])
    if u == 0:
        return list(survivors), 0
    blocks = _batch_indices(x.shape[0], cfg.batch_size, len(survivors) * u,
                            rng, generation)
    refined = []
    for s_idx, member in enumerate(survivors):
        ae = member.chromosome.params
        for j in range(u):
            batch = x[blocks[s_idx * u + j]]
            ae = sgd_step(ae, gradient(ae, batch), cfg.learning_rate)
        refined.append(EvaluatedChromosome(
            Chromosome(ae, member.chromosome.id, member.chromosome.birth_generation)
        ))
    return refined, len(survivors) * u


def select_parents(survivors, rng):
    """Two distinct survivors, uniformly, fitness ignored."""
    if len(survivors) < 2:
        raise ValueError("parent selection needs at least 2 survivors")
    i = rng.integers(len(survivors))
    j = rng.integers(len(survivors) - 1)
    if j >= i:
        j += 1
    return survivors[i], survivors[j]


def crossover(parent_a, parent_b, rate, rng, offspring_id, birth_generation=0):
    """Breed one offspring from two chromosomes.

    With probability ``rate`` every parameter (weights and biases alike) is
    taken from either parent with probability 1/2, independently;
    otherwise the offspring is a plain copy of ``parent_a``. Either way it
    gets a fresh id.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("crossover rate must be in [0, 1]")
    a, b = parent_a.params, parent_b.params
    if a.weights.shape != b.weights.shape:
        raise ValueError("parents must have identical shapes")
    if rng.next_uniform() < rate:
        pick_w = rng.uniform(size=a.weights.shape) < 0.5
        pick_e = rng.uniform(size=a.enc_bias.shape) < 0.5
        pick_d = rng.uniform(size=a.dec_bias.shape) < 0.5
        ae = TiedAutoencoder(
            np.where(pick_w, a.weights, b.weights),
            np.where(pick_e, a.enc_bias, b.enc_bias),
            np.where(pick_d, a.dec_bias, b.dec_bias),
        )
    else:
        ae = a.copy()
    return Chromosome(ae, offspring_id, birth_generation)


def mutate(c, rate, rng):
    """Zero out each weight independently with probability ``rate``.

    Only the weight matrix mutates; biases pass through bit-exactly, and
    untouched weights keep their exact values. Zeroing connections is what
    pushes the network toward sparsity.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("mutation rate must be in [0, 1]")
    p = c.params
    zero = rng.uniform(size=p.weights.shape) < rate
    w = np.where(zero, 0.0, p.weights)
    return Chromosome(
        TiedAutoencoder(w, p.enc_bias.copy(), p.dec_bias.copy()),
        c.id,
        c.birth_generation,
    )


def generation_step(pop, data, eval_samples, cfg, rng):
    """Advance the population by one full generation.

    Evaluate (unless scores are already fresh), cull the bottom half,
    refine survivors, breed offspring from the refined survivors to
    restore the population size, then score the new population. Returned
    populations are always evaluated.
    """
    if any(m.rmse is None for m in pop.members):
        pop = evaluate(pop, eval_samples)
    survivors, culled_count = rank_and_cull(pop)
    refined, used = refine_survivors(survivors, data, cfg, pop.generation, rng)
    breed_rng = rng.fork("breed", pop.generation)
    offspring = []
    next_id = pop.next_id
    for _ in range(culled_count):
        pa, pb = select_parents(refined, breed_rng)
        child = crossover(pa.chromosome, pb.chromosome, cfg.crossover_rate,
                          breed_rng, next_id, pop.generation + 1)
        child = mutate(child, cfg.mutation_rate, breed_rng)
        offspring.append(EvaluatedChromosome(child))
        next_id += 1
    new_pop = Population(
        members=refined + offspring,
        generation=pop.generation + 1,
        updates_consumed=pop.updates_consumed + used,
        next_id=next_id,
    )
    return evaluate(new_pop, eval_samples)


def _best_member(pop):
    return min(pop.members, key=_rank_key)


def _record(pop):
    best = _best_member(pop)
    mean = math.fsum(m.rmse for m in pop.members) / len(pop.members)
    return GenerationRecord(
        generation=pop.generation,
        best_rmse=best.rmse,
        mean_rmse=mean,
        best_sparsity=sparsity(best.chromosome.params, 0.0),
        updates_consumed=pop.updates_consumed,
    )


def train_layer(cfg, shape, data, eval_samples, rng=None):
    """Evolve one layer until the next generation would overrun the budget.

    Returns ``(best, history)``: the parameters of the fittest chromosome
    of the final evaluated population (ties to the lowest id) and one
    record per generation.
    """
    if rng is None:
        rng = RandomStream(cfg.seed)
    x = as_batch(data, shape[1])
    cost = generation_cost(cfg, x.shape[0])
    if cost < 1:
        raise ValueError("generation cost is zero; no schedule can consume the budget")
    if cost > cfg.budget_total_updates:
        raise ValueError(
            f"budget_total_updates={cfg.budget_total_updates} cannot cover a "
            f"single generation, which costs {cost} updates "
            f"({cfg.survivor_count} survivors x "
            f"{resolve_updates_per_survivor(cfg, x.shape[0])} updates)"
        )
    pop = init_population(cfg, shape, rng)
    history = []
    while pop.updates_consumed + cost <= cfg.budget_total_updates:
        pop = generation_step(pop, x, eval_samples, cfg, rng)
        history.append(_record(pop))
    best = _best_member(pop)
    return best.chromosome.params.copy(), history


def history_to_csv(history):
    """Render generation records as CSV (header row, '.' decimals)."""
    lines = ["generation,best_rmse,mean_rmse,best_sparsity_exact,updates_consumed"]
    for rec in history:
        lines.append(
            f"{rec.generation},{rec.best_rmse!r},{rec.mean_rmse!r},"
            f"{rec.best_sparsity!r},{rec.updates_consumed}"
        )
    return "\n".join(lines) + "\n"

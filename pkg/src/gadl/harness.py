"""The comparison experiment as a reproducible pipeline.

Two arms under one update budget: the baseline trains the whole stack with
plain backprop from several independent restarts and keeps the restart
with the lowest final-layer reconstruction error; the evolutionary arm
runs once with the same total number of gradient updates. Both stacks then
feed the identical downstream classifier, and everything lands in a
metrics CSV, a human-readable summary, and serialized model files.

"Equal budget" means equal gradient-update counts. Wall-clock time is
recorded in the summary for information only, because it is not
reproducible across machines; update counts are.

The two arms draw from disjoint labelled forks of the master seed, so
changing one arm's internals can never perturb the other's results.
"""

import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .autoencoder import as_batch, gradient, init_autoencoder, rmse, sgd_step
from .classifier import error_rate, train_classifier
from .data import LabeledDataset, load_idx_images, load_idx_labels, subset, \
    synthetic_blobs, to_dataset
from .ga import GaConfig, history_to_csv, train_layer
from .numerics import RandomStream
from .serialize import save_stack
from .stack import extract_features, train_stack

__all__ = [
    "ArmReport",
    "DESK_ARCHITECTURE",
    "DESK_BUDGET",
    "DESK_TEST",
    "DESK_TRAIN",
    "ExperimentConfig",
    "build_config",
    "compare",
    "load_config",
    "load_experiment_data",
    "parse_config_text",
    "run_baseline",
    "run_ga",
]

# desk-scale preset: finishes in minutes while still exercising two-layer
# stacking, both arms, and the classifier. The loss is normalized per
# component, which shrinks gradients by the layer width, so the preset
# raises the learning rate to a value calibrated for these widths.
DESK_ARCHITECTURE = (784, 64, 32)
DESK_TRAIN = 5000
DESK_TEST = 1000
DESK_BUDGET = 40000
DESK_LEARNING_RATE = 4.0

# synthetic data is generated from a fixed internal seed so that the same
# samples stand in for a real dataset no matter which master seed a run uses
SYNTHETIC_DATA_SEED = 97
SYNTHETIC_SPREAD = 0.15
SYNTHETIC_CLUSTERS = 10

N_CLASSES = 10


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run needs, config-file addressable."""

    train_images: str | None = None
    train_labels: str | None = None
    test_images: str | None = None
    test_labels: str | None = None
    synthetic: bool = False
    architecture: tuple = (784, 500, 250, 100, 50)
    baseline_restarts: int = 10
    budget_total_updates: int = 40000
    population_size: int = 10
    crossover_rate: float = 0.8
    mutation_rate: float = 0.01
    updates_per_survivor_per_generation: int | None = None
    learning_rate: float = 0.1
    batch_size: int = 20
    fitness_eval_sample_count: int = 1000
    classifier_epochs: int = 30
    classifier_learning_rate: float = 0.5
    classifier_batch_size: int = 50
    desk_scale: bool = False
    train_subset: int | None = None
    test_subset: int | None = None
    out_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        if self.baseline_restarts < 1:
            raise ValueError("baseline_restarts must be >= 1")
        if len(self.architecture) < 2 or any(w < 1 for w in self.architecture):
            raise ValueError("architecture needs >= 2 strictly positive widths")
        # surfaces bad GA values at config time rather than mid-run
        self.ga_config()

    def ga_config(self, budget=None, seed=None):
        return GaConfig(
            population_size=self.population_size,
            crossover_rate=self.crossover_rate,
            mutation_rate=self.mutation_rate,
            updates_per_survivor_per_generation=(
                self.updates_per_survivor_per_generation
            ),
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            fitness_eval_sample_count=self.fitness_eval_sample_count,
            budget_total_updates=budget or self.budget_total_updates,
            seed=self.seed if seed is None else seed,
        )


@dataclass
class ArmReport:
    """Per-arm experiment record; wall clock is informational only."""

    arm: str
    architecture: tuple
    layer_rmse: list
    layer_sparsity: list
    updates_budget: int
    updates_consumed: int
    seed: int
    classification_error: float | None = None
    wall_clock_s: float = 0.0
    notes: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# configuration files: plain "key = value" lines, '#' starts a comment

def _parse_bool(s):
    low = s.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _parse_widths(s):
    parts = [p for p in s.replace(",", " ").split() if p]
    return tuple(int(p) for p in parts)


def _parse_optional_int(s):
    return None if s.lower() in ("", "none") else int(s)


_FIELD_PARSERS = {
    "train_images": str,
    "train_labels": str,
    "test_images": str,
    "test_labels": str,
    "synthetic": _parse_bool,
    "architecture": _parse_widths,
    "baseline_restarts": int,
    "budget_total_updates": int,
    "population_size": int,
    "crossover_rate": float,
    "mutation_rate": float,
    "updates_per_survivor_per_generation": _parse_optional_int,
    "learning_rate": float,
    "batch_size": int,
    "fitness_eval_sample_count": int,
    "classifier_epochs": int,
    "classifier_learning_rate": float,
    "classifier_batch_size": int,
    "desk_scale": _parse_bool,
    "train_subset": _parse_optional_int,
    "test_subset": _parse_optional_int,
    "out_dir": str,
    "seed": int,
}

assert set(_FIELD_PARSERS) == {f.name for f in fields(ExperimentConfig)}


def parse_config_text(text):
    """Parse config-file text into a {field: value} dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FIELD_PARSERS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _FIELD_PARSERS[key](val)
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: bad value for {key}: {exc}") from exc
    return values


def build_config(values, seed=None, out_dir=None, desk_scale=False):
    """Assemble an ExperimentConfig from parsed values plus CLI overrides.

    Precedence, lowest to highest: dataclass defaults, the desk-scale
    preset (when enabled by file or flag), explicit file keys, then the
    seed/out overrides.
    """
    merged = {}
    if desk_scale or values.get("desk_scale", False):
        merged.update(
            desk_scale=True,
            architecture=DESK_ARCHITECTURE,
            train_subset=DESK_TRAIN,
            test_subset=DESK_TEST,
            budget_total_updates=DESK_BUDGET,
            learning_rate=DESK_LEARNING_RATE,
        )
    merged.update({k: v for k, v in values.items() if k != "desk_scale"})
    if seed is not None:
        merged["seed"] = int(seed)
    if out_dir is not None:
        merged["out_dir"] = out_dir
    return ExperimentConfig(**merged)


def load_config(path, seed=None, out_dir=None, desk_scale=False):
    with open(path, "r", encoding="utf-8") as f:
        values = parse_config_text(f.read())
    return build_config(values, seed=seed, out_dir=out_dir, desk_scale=desk_scale)


# ---------------------------------------------------------------------------
# data

def load_experiment_data(cfg):
    """Return (train, test, description) as labeled datasets.

    With ``synthetic = true`` the run uses deterministic clustered data of
    the configured input width instead of IDX files; otherwise all four
    IDX paths must be set. Subsets take the first n samples, so the data
    seen by a run does not depend on the master seed.
    """
    if cfg.synthetic:
        n_train = cfg.train_subset or DESK_TRAIN
        n_test = cfg.test_subset or DESK_TEST
        blob_rng = RandomStream(SYNTHETIC_DATA_SEED).fork("samples")
        full = synthetic_blobs(cfg.architecture[0], SYNTHETIC_CLUSTERS,
                               n_train + n_test, SYNTHETIC_SPREAD, blob_rng)
        train = subset(full, np.arange(n_train))
        test = subset(full, np.arange(n_train, n_train + n_test))
        desc = (f"synthetic blobs (dim {cfg.architecture[0]}, "
                f"{SYNTHETIC_CLUSTERS} clusters, fixed internal seed "
                f"{SYNTHETIC_DATA_SEED})")
        return train, test, desc

    paths = (cfg.train_images, cfg.train_labels, cfg.test_images, cfg.test_labels)
    if any(p is None for p in paths):
        raise ValueError(
            "all four IDX paths (train_images, train_labels, test_images, "
            "test_labels) are required unless synthetic = true"
        )
    train = LabeledDataset(to_dataset(load_idx_images(cfg.train_images)).x,
                           load_idx_labels(cfg.train_labels))
    test = LabeledDataset(to_dataset(load_idx_images(cfg.test_images)).x,
                          load_idx_labels(cfg.test_labels))
    if train.dim != cfg.architecture[0]:
        raise ValueError(
            f"data dimension {train.dim} does not match architecture input "
            f"width {cfg.architecture[0]}"
        )
    if cfg.train_subset is not None:
        train = subset(train, np.arange(min(cfg.train_subset, train.n)))
    if cfg.test_subset is not None:
        test = subset(test, np.arange(min(cfg.test_subset, test.n)))
    return train, test, "IDX files"


# ---------------------------------------------------------------------------
# the two arms

def _exact_zero_fraction(weights):
    return float(np.mean(weights == 0.0))


def _train_layer_backprop(hidden, visible, features, budget_updates,
                          learning_rate, batch_size, rng):
    """Plain mini-batch SGD for one layer under an exact update budget."""
    ae = init_autoencoder(hidden, visible, rng.fork("init"))
    x = as_batch(features, visible)
    n = x.shape[0]
    per_epoch = max(1, n // batch_size)
    done = 0
    epoch = 0
    while done < budget_updates:
        order = rng.fork("epoch", epoch).permutation(n)
        for k in range(per_epoch):
            if done >= budget_updates:
                break
            idx = order[k * batch_size : (k + 1) * batch_size]
            ae = sgd_step(ae, gradient(ae, x[idx]), learning_rate)
            done += 1
        epoch += 1
    return ae


def run_baseline(cfg, train_x, eval_idx, rng):
    """Best-of-n restarts of pure backprop under the arm budget.

    Each restart trains a full stack from an independent initialization on
    ``budget / restarts`` updates (split evenly across layers); the
    restart with the lowest final-layer RMSE on the evaluation subset
    wins. Returns ``(stack, report)``.
    """
    n_layers = len(cfg.architecture) - 1
    per_layer = cfg.budget_total_updates // cfg.baseline_restarts // n_layers
    if per_layer < 1:
        raise ValueError(
            f"budget_total_updates={cfg.budget_total_updates} is too small for "
            f"{cfg.baseline_restarts} restarts x {n_layers} layers"
        )
    best = None
    restart_finals = []
    for r in range(cfg.baseline_restarts):
        layer_rmses = []

        def train_one(hidden, visible, feats, layer_rng):
            ae = _train_layer_backprop(hidden, visible, feats, per_layer,
                                       cfg.learning_rate, cfg.batch_size,
                                       layer_rng)
            layer_rmses.append(rmse(ae, feats[eval_idx]))
            return ae, []

        stack, _ = train_stack(cfg.architecture, train_x, train_one,
                               rng.fork("restart", r))
        restart_finals.append(layer_rmses[-1])
        if best is None or layer_rmses[-1] < best[1][-1]:
            best = (stack, layer_rmses, r)
    stack, layer_rmses, chosen = best
    consumed = cfg.baseline_restarts * n_layers * per_layer
    report = ArmReport(
        arm="baseline",
        architecture=cfg.architecture,
        layer_rmse=layer_rmses,
        layer_sparsity=[_exact_zero_fraction(l.weights) for l in stack.layers],
        updates_budget=cfg.budget_total_updates,
        updates_consumed=consumed,
        seed=cfg.seed,
        notes={"restarts": cfg.baseline_restarts, "chosen_restart": chosen,
               "updates_per_layer_per_restart": per_layer,
               "restart_final_rmse": restart_finals},
    )
    return stack, report


def run_ga(cfg, train_x, eval_idx, rng):
    """Single evolutionary run under the arm budget, split evenly per layer.

    Returns ``(stack, report, histories)``.
    """
    n_layers = len(cfg.architecture) - 1
    per_layer = cfg.budget_total_updates // n_layers
    histories = []

    def train_one(hidden, visible, feats, layer_rng):
        ga_cfg = cfg.ga_config(budget=per_layer)
        best, history = train_layer(ga_cfg, (hidden, visible), feats,
                                    feats[eval_idx], layer_rng)
        histories.append(history)
        return best, history

    stack, _ = train_stack(cfg.architecture, train_x, train_one, rng)
    report = ArmReport(
        arm="ga",
        architecture=cfg.architecture,
        layer_rmse=[h[-1].best_rmse for h in histories],
        layer_sparsity=[h[-1].best_sparsity for h in histories],
        updates_budget=cfg.budget_total_updates,
        updates_consumed=sum(h[-1].updates_consumed for h in histories),
        seed=cfg.seed,
        notes={"generations_per_layer": [len(h) for h in histories]},
    )
    return stack, report, histories


# ---------------------------------------------------------------------------
# reports

CLASSIFIER_NOTE = (
    "Classification uses the in-repo softmax (multinomial logistic\n"
    "regression) classifier instead of an RBF-kernel SVM; suitable SVM\n"
    "hyperparameters for this setup are unspecified, so absolute error\n"
    "rates are not comparable to SVM-based results. Both arms share the\n"
    "identical classifier configuration and seed, which keeps the\n"
    "arm-to-arm comparison meaningful."
)


def _metrics_csv(reports):
    lines = ["arm,row,layer,hidden,visible,rmse,sparsity,"
             "classification_error,updates_budget,updates_consumed,seed"]
    for rep in reports:
        widths = rep.architecture
        for k, (r, s) in enumerate(zip(rep.layer_rmse, rep.layer_sparsity), start=1):
            lines.append(f"{rep.arm},layer,{k},{widths[k]},{widths[k - 1]},"
                         f"{r!r},{s!r},,,,")
        lines.append(f"{rep.arm},summary,,,,,,{rep.classification_error!r},"
                     f"{rep.updates_budget},{rep.updates_consumed},{rep.seed}")
    return "\n".join(lines) + "\n"


def _summary_text(cfg, reports, data_desc):
    widths = "-".join(str(w) for w in cfg.architecture)
    out = [
        "Tied-autoencoder stack comparison: baseline backprop vs GA-assisted",
        "",
        f"data: {data_desc}",
        f"architecture: {widths}",
        f"master seed: {cfg.seed}",
        f"update budget per arm: {cfg.budget_total_updates} gradient updates",
        "budget note: arms are matched by gradient-update count, not",
        "wall-clock; fitness evaluations in the GA arm are uncounted",
        "overhead, so its effective compute is slightly higher.",
        "",
    ]
    for rep in reports:
        out.append(f"[{rep.arm}]")
        for k, (r, s) in enumerate(zip(rep.layer_rmse, rep.layer_sparsity), start=1):
            out.append(f"  layer {k} ({rep.architecture[k - 1]} -> "
                       f"{rep.architecture[k]}): rmse {r:.6f}, "
                       f"exact-zero weight fraction {s:.6f}")
        out.append(f"  classification error: {rep.classification_error:.4f}")
        out.append(f"  updates consumed: {rep.updates_consumed} "
                   f"of {rep.updates_budget}")
        out.append(f"  wall clock: {rep.wall_clock_s:.2f} s (informational)")
        for key, val in rep.notes.items():
            out.append(f"  {key}: {val}")
        out.append("")
    out.append(CLASSIFIER_NOTE)
    out.append("")
    return "\n".join(out)


def compare(cfg):
    """Run both arms, classify, write reports; returns the two reports.

    Outputs under ``cfg.out_dir``: ``metrics.csv`` (deterministic given
    config and seed), ``summary.txt`` (includes wall clock), the two
    serialized stacks, and per-layer GA history CSVs.
    """
    master = RandomStream(cfg.seed)
    train, test, data_desc = load_experiment_data(cfg)
    eval_count = min(cfg.fitness_eval_sample_count, train.n)
    eval_idx = master.fork("fitness-eval").permutation(train.n)[:eval_count]

    t0 = time.perf_counter()
    b_stack, b_rep = run_baseline(cfg, train.x, eval_idx, master.fork("baseline"))
    b_rep.wall_clock_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    g_stack, g_rep, histories = run_ga(cfg, train.x, eval_idx, master.fork("ga"))
    g_rep.wall_clock_s = time.perf_counter() - t0

    if b_rep.updates_budget != g_rep.updates_budget:
        raise RuntimeError("arms were configured with unequal budgets")
    granularity = max(
        (h[0].updates_consumed for h in histories if h), default=1
    )
    if abs(b_rep.updates_consumed - g_rep.updates_consumed) > granularity:
        raise RuntimeError(
            f"update parity violated beyond one generation: baseline "
            f"{b_rep.updates_consumed}, ga {g_rep.updates_consumed}, "
            f"granularity {granularity}"
        )

    for stack, rep in ((b_stack, b_rep), (g_stack, g_rep)):
        f_train = extract_features(stack, train.x)
        f_test = extract_features(stack, test.x)
        clf = train_classifier(
            f_train, train.labels, cfg.classifier_epochs,
            cfg.classifier_learning_rate, master.fork("classifier"),
            n_classes=N_CLASSES, batch_size=cfg.classifier_batch_size,
        )
        rep.classification_error = error_rate(clf, f_test, test.labels)

    os.makedirs(cfg.out_dir, exist_ok=True)
    save_stack(b_stack, os.path.join(cfg.out_dir, "stack_baseline.gadl"))
    save_stack(g_stack, os.path.join(cfg.out_dir, "stack_ga.gadl"))
    with open(os.path.join(cfg.out_dir, "metrics.csv"), "w", encoding="utf-8") as f:
        f.write(_metrics_csv([b_rep, g_rep]))
    with open(os.path.join(cfg.out_dir, "summary.txt"), "w", encoding="utf-8") as f:
        f.write(_summary_text(cfg, [b_rep, g_rep], data_desc))
    for k, history in enumerate(histories, start=1):
        path = os.path.join(cfg.out_dir, f"history_ga_layer{k}.csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write(history_to_csv(history))
    return b_rep, g_rep

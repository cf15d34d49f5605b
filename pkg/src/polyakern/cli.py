"""Command-line interface: data ingestion, experiment orchestration, and
result emission.

Subcommands
-----------
``kernel eval|ft|table``
    Evaluate a kernel, its Fourier transform, or a CSV table of both.
``features``
    Featurize a LIBSVM dataset and write sparse ``row:value`` text plus a
    metadata sidecar.
``approx-error``
    Kernel-matrix approximation error curves: per (map kind, copy count)
    the theoretical relative Frobenius error and a Monte Carlo estimate.
``fit`` / ``predict`` / ``cv``
    Ridge regression or one-vs-all classification with a JSON model
    bundle; grid-searched (shape, τ, λ) by k-fold cross-validation.
``bench``
    End-to-end comparison of map kinds across copy counts: approximation
    error plus test MSE or accuracy.

Conventions
-----------
Input data is LIBSVM text (``label idx:value ...``, 1-based indices).
Attributes are normalized per column to [−1, 1] by an affine map fit on
the training rows; the map is stored in model bundles so prediction
applies the identical transform.  All randomness derives from ``--seed``
(default from ``POLYAKERN_SEED`` or a built-in constant), and reruns with
the same arguments produce byte-identical output files.  Failures print a
single-line JSON record ``{"error": ...}`` to stderr and exit nonzero.
Trials are independent by construction (per-trial child seeds), so they
may be distributed; this implementation runs them sequentially for
reproducibility, and each output file has a single writer.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from . import approx, learn
from .errors import ParseError, PolyakernError
from .feature_maps import (
    BINNING,
    FOURIER_COMPLEX,
    FOURIER_REAL,
    KINDS,
    FeatureMapConfig,
    IsotropicNormal,
    TensorCauchy,
    build_map,
    featurize,
    gram,
)
from .polya_kernels import KernelSpec, eval_ft, eval_kernel, format_kernel_spec, parse_kernel_spec
from .rng import RandomStream, default_seed

# ---------------------------------------------------------------------------
# LIBSVM ingestion


def parse_libsvm(path) -> learn.Dataset:
    """Read ``label idx:value ...`` lines into a dense dataset.

    Indices are 1-based and densified to the maximum index seen anywhere
    in the file; absent indices are zero.  Malformed lines raise
    :class:`ParseError` carrying the 1-based line number.
    """
    labels = []
    rows = []
    width = 0
    with open(path, "r", encoding="ascii") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise ParseError(
                    f"label {tokens[0]!r} is not numeric", line=lineno
                ) from None
            entries = {}
            for token in tokens[1:]:
                idx_text, sep, val_text = token.partition(":")
                if not sep:
                    raise ParseError(
                        f"expected index:value, got {token!r}", line=lineno
                    )
                try:
                    idx = int(idx_text)
                    val = float(val_text)
                except ValueError:
                    raise ParseError(
                        f"could not parse index:value pair {token!r}", line=lineno
                    ) from None
                if idx < 1:
                    raise ParseError(
                        f"feature indices are 1-based, got {idx}", line=lineno
                    )
                entries[idx - 1] = val
                width = max(width, idx)
            labels.append(label)
            rows.append(entries)
    if not labels:
        raise ParseError(f"no data lines in {path}")
    points = np.zeros((len(labels), width))
    for i, entries in enumerate(rows):
        for j, val in entries.items():
            points[i, j] = val
    return learn.Dataset.full(points, np.asarray(labels))


def write_libsvm(path, points, targets) -> None:
    """Write a dense dataset as LIBSVM text (zero entries omitted)."""
    points = np.asarray(points, dtype=float)
    targets = np.asarray(targets, dtype=float)
    with open(path, "w", encoding="ascii") as handle:
        for row, label in zip(points, targets):
            parts = [repr(float(label))]
            parts.extend(
                f"{j + 1}:{float(v)!r}" for j, v in enumerate(row) if v != 0.0
            )
            handle.write(" ".join(parts) + "\n")


# ---------------------------------------------------------------------------
# Attribute normalization


@dataclass(frozen=True)
class AffineNormalizer:
    """Per-column affine map sending the training range onto [−1, 1].

    Constant columns (zero half-width) map to 0.  Values outside the
    training range transform by the same affine map and may exceed [−1, 1].
    """

    center: np.ndarray
    halfwidth: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        safe = np.where(self.halfwidth > 0.0, self.halfwidth, 1.0)
        scaled = (X - self.center) / safe
        return np.where(self.halfwidth > 0.0, scaled, 0.0)

    def to_json(self):
        return {"center": list(self.center), "halfwidth": list(self.halfwidth)}

    @classmethod
    def from_json(cls, blob):
        return cls(
            center=np.asarray(blob["center"], dtype=float),
            halfwidth=np.asarray(blob["halfwidth"], dtype=float),
        )


def fit_normalizer(train_points) -> AffineNormalizer:
    train_points = np.asarray(train_points, dtype=float)
    if train_points.shape[0] == 0:
        raise ValueError("cannot fit a normalizer on an empty training split")
    lo = train_points.min(axis=0)
    hi = train_points.max(axis=0)
    return AffineNormalizer(center=(lo + hi) / 2.0, halfwidth=(hi - lo) / 2.0)


def normalize(ds: learn.Dataset) -> learn.Dataset:
    """Affinely map each attribute so the training rows span [−1, 1]."""
    norm = fit_normalizer(ds.train_points)
    return learn.Dataset(norm.apply(ds.points), ds.targets, ds.train_idx, ds.test_idx)


# ---------------------------------------------------------------------------
# Map/kernel argument plumbing

_LAW_FAMILIES = {"cauchy": (TensorCauchy, "scale"), "normal": (IsotropicNormal, "stddev")}


def parse_fourier_law(text: str):
    """Parse ``cauchy:scale=v`` or ``normal:stddev=v`` frequency laws."""
    name, sep, params = text.partition(":")
    if name not in _LAW_FAMILIES:
        raise ParseError(
            f"unknown frequency law {name!r}; expected one of "
            f"{sorted(_LAW_FAMILIES)}"
        )
    cls, param_name = _LAW_FAMILIES[name]
    if not sep or not params:
        raise ParseError(f"frequency law needs {param_name}=<value>")
    key, sep, value = params.partition("=")
    if key != param_name or not sep:
        raise ParseError(f"frequency law {name!r} takes exactly {param_name}=<value>")
    try:
        return cls(**{param_name: float(value)})
    except ValueError as exc:
        raise ParseError(f"bad frequency-law parameter: {exc}") from None


def format_fourier_law(law) -> str:
    if isinstance(law, TensorCauchy):
        return f"cauchy:scale={law.scale!r}"
    return f"normal:stddev={law.stddev!r}"


def _kernel_for_kind(kind: str, kernel_text: str, tau, law_text=None) -> object:
    """Parse the --kernel argument for a given map kind.

    Binning maps take a distribution-backed kernel spec; Fourier maps take
    a frequency law — from ``law_text`` when a command mixes both kinds,
    otherwise from the --kernel slot itself.  ``tau`` (if given) overrides
    the spec's scaling.
    """
    if kind == BINNING:
        spec = parse_kernel_spec(kernel_text)
        if tau is not None:
            spec = KernelSpec(spec.dist, tau=float(tau))
        return spec
    return parse_fourier_law(law_text if law_text is not None else kernel_text)


def _kernel_to_text(kernel) -> str:
    if isinstance(kernel, KernelSpec):
        return format_kernel_spec(kernel)
    return format_fourier_law(kernel)


def _floats(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ParseError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> Tuple[int, ...]:
    values = _floats(text)
    if any(v != int(v) for v in values):
        raise ParseError(f"expected comma-separated integers, got {text!r}")
    return tuple(int(v) for v in values)


def _fmt(value) -> str:
    return repr(float(value))


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Model bundles

MODEL_FORMAT = "polyakern-model-v1"


def _map_metadata(cfg: FeatureMapConfig) -> dict:
    return {
        "kind": cfg.kind,
        "kernel": _kernel_to_text(cfg.kernel),
        "dim": cfg.dim,
        "copies": cfg.copies,
        "seed": cfg.seed,
        "hash_buckets": cfg.hash_buckets,
    }


def _config_from_metadata(meta: dict) -> FeatureMapConfig:
    return FeatureMapConfig(
        kind=meta["kind"],
        kernel=_kernel_for_kind(meta["kind"], meta["kernel"], tau=None),
        dim=int(meta["dim"]),
        copies=int(meta["copies"]),
        seed=int(meta["seed"]),
        hash_buckets=meta.get("hash_buckets"),
    )


def _vocabulary_to_json(state) -> list:
    return [
        [copy, list(map(int, bins)), column]
        for (copy, bins), column in state.vocabulary.items()
    ]


def _restore_vocabulary(state, blob) -> None:
    for copy, bins, column in blob:
        state.vocabulary[(int(copy), tuple(int(b) for b in bins))] = int(column)


def save_model(path, task, cfg, state, normalizer, models, classes=None) -> None:
    """Serialize a fitted model: map metadata, vocabulary, weights."""
    bundle = {
        "format": MODEL_FORMAT,
        "task": task,
        "map": _map_metadata(cfg),
        "normalizer": normalizer.to_json(),
        "vocabulary": _vocabulary_to_json(state) if cfg.kind == BINNING else [],
        "models": [
            {
                "weights": list(map(float, m.weights)),
                "y_mean": m.y_mean,
                "lambda": m.lam,
                "route": m.route,
            }
            for m in models
        ],
    }
    if classes is not None:
        bundle["classes"] = list(map(float, classes))
    Path(path).write_text(json.dumps(bundle), encoding="ascii")


def load_model(path):
    """Rebuild (task, state, normalizer, models, classes) from a bundle."""
    bundle = json.loads(Path(path).read_text(encoding="ascii"))
    if bundle.get("format") != MODEL_FORMAT:
        raise ParseError(f"{path} is not a model bundle (format field missing)")
    cfg = _config_from_metadata(bundle["map"])
    state = build_map(cfg)
    if cfg.kind == BINNING:
        _restore_vocabulary(state, bundle["vocabulary"])
    normalizer = AffineNormalizer.from_json(bundle["normalizer"])
    models = tuple(
        learn.RidgeModel(
            state=state,
            weights=np.asarray(m["weights"], dtype=float),
            lam=float(m["lambda"]),
            y_mean=float(m["y_mean"]),
            route=m["route"],
        )
        for m in bundle["models"]
    )
    classes = bundle.get("classes")
    return bundle["task"], state, normalizer, models, classes


# ---------------------------------------------------------------------------
# Subcommand implementations


def _cmd_kernel(args) -> int:
    spec = parse_kernel_spec(args.kernel)
    if args.tau is not None:
        spec = KernelSpec(spec.dist, tau=float(args.tau))
    if args.kernel_cmd == "eval":
        lines = ["r,k"]
        lines += [f"{_fmt(r)},{_fmt(eval_kernel(spec, r))}" for r in args.values]
    elif args.kernel_cmd == "ft":
        lines = ["t,ft"]
        lines += [f"{_fmt(t)},{_fmt(eval_ft(spec, t).value)}" for t in args.values]
    else:  # table
        grid = np.linspace(0.0, args.max, args.points)
        lines = ["r,k,ft"]
        lines += [
            f"{_fmt(r)},{_fmt(eval_kernel(spec, r))},{_fmt(eval_ft(spec, r).value)}"
            for r in grid
        ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _load_normalized(path) -> learn.Dataset:
    return normalize(parse_libsvm(path))


def _format_feature_value(value) -> str:
    if isinstance(value, complex) or np.iscomplexobj(value):
        value = complex(value)
        return f"{value.real!r}{value.imag:+}j"
    return repr(float(value))


def _cmd_features(args) -> int:
    if not args.out:
        raise ValueError("features requires --out PREFIX for its two files")
    ds = _load_normalized(args.data)
    kernel = _kernel_for_kind(args.map, args.kernel, args.tau)
    cfg = FeatureMapConfig(
        kind=args.map, kernel=kernel, dim=ds.points.shape[1],
        copies=args.copies, seed=args.seed, hash_buckets=args.hash_buckets,
    )
    state = build_map(cfg)
    batch = featurize(state, ds.points)
    lines = []
    if batch.kind == BINNING:
        weight = 1.0 / math.sqrt(batch.copies)
        for i in range(batch.n):
            entries = (f"{int(row)}:{weight!r}" for row in batch.indices[:, i])
            lines.append(" ".join(entries))
    else:
        for i in range(batch.n):
            column = batch.data[:, i]
            lines.append(
                " ".join(
                    f"{row}:{_format_feature_value(v)}" for row, v in enumerate(column)
                )
            )
    prefix = Path(str(args.out))
    features_path = prefix.with_name(prefix.name + ".features.txt")
    meta_path = prefix.with_name(prefix.name + ".meta.json")
    features_path.write_text("\n".join(lines) + "\n", encoding="ascii")
    meta = _map_metadata(cfg)
    meta["n"] = batch.n
    meta["width"] = int(batch.width) if batch.kind == BINNING else cfg.copies
    meta_path.write_text(json.dumps(meta), encoding="ascii")
    return 0


def _stderr_rel(stats) -> float:
    """Delta-method standard error for sqrt(mean_sq / ||K||_F^2)."""
    if stats.mean_sq <= 0.0:
        return 0.0
    return stats.stderr_sq / (2.0 * math.sqrt(stats.mean_sq * stats.norm_k_sq))


def _synthetic_points(seed: int, n: int = 50, dim: int = 3) -> np.ndarray:
    return 2.0 * RandomStream(seed, path=(9,)).uniform(n * dim).reshape(n, dim) - 1.0


def _cmd_approx_error(args) -> int:
    kinds = tuple(k.strip() for k in args.map.split(","))
    for kind in kinds:
        if kind not in KINDS:
            raise ValueError(f"unknown map kind {kind!r}; expected one of {KINDS}")
    if args.data is not None:
        points = _load_normalized(args.data).points
        if args.subsample is not None and args.subsample < len(points):
            points = points[: args.subsample]
    else:
        points = _synthetic_points(args.seed)
    sizes = _ints(args.copies)
    lines = ["kind,copies,theory,empirical_mean,empirical_stderr"]
    for kind in kinds:
        kernel = _kernel_for_kind(kind, args.kernel, args.tau, args.fourier_law)
        for copies in sizes:
            cfg = FeatureMapConfig(
                kind=kind, kernel=kernel, dim=points.shape[1],
                copies=copies, seed=args.seed,
            )
            stats = approx.empirical_error(kernel, points, cfg, trials=args.trials)
            lines.append(
                f"{kind},{copies},{_fmt(stats.theory_rel)},"
                f"{_fmt(stats.empirical_rel)},{_fmt(_stderr_rel(stats))}"
            )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_fit(args) -> int:
    ds = parse_libsvm(args.data)
    normalizer = fit_normalizer(ds.train_points)
    X = normalizer.apply(ds.points)
    y = ds.targets
    kernel = _kernel_for_kind(args.map, args.kernel, args.tau)
    cfg = FeatureMapConfig(
        kind=args.map, kernel=kernel, dim=X.shape[1],
        copies=args.copies, seed=args.seed, hash_buckets=args.hash_buckets,
    )
    if args.task == "regression":
        state = build_map(cfg)
        batch = featurize(state, X)
        model = learn.fit(state, batch, y, lam=args.lam)
        save_model(args.out, args.task, cfg, state, normalizer, [model])
    else:
        classes = np.unique(y)
        if args.task == "binary" and len(classes) != 2:
            raise ValueError(
                f"binary task needs exactly two classes, found {len(classes)}"
            )
        clf = learn.one_vs_all(learn.Dataset.full(X, y), cfg, lam=args.lam)
        state = clf.models[0].state
        save_model(
            args.out, args.task, cfg, state, normalizer, clf.models, clf.classes
        )
    return 0


def _cmd_predict(args) -> int:
    task, state, normalizer, models, classes = load_model(args.model)
    ds = parse_libsvm(args.data)
    X = normalizer.apply(ds.points)
    if task == "regression":
        preds = learn.predict(models[0], X)
    else:
        clf = learn.OneVsAllModel(classes=tuple(classes), models=models)
        preds = learn.predict_labels(clf, X)
    lines = ["index,prediction"]
    lines += [f"{i},{_fmt(v)}" for i, v in enumerate(preds)]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_cv(args) -> int:
    ds = _load_normalized(args.data)
    space = learn.CvSearchSpace(
        family=args.family,
        shapes=_floats(args.shapes) if args.shapes else None,
        taus=_floats(args.taus) if args.taus else learn.TAU_GRID,
        lambdas=_floats(args.lambdas) if args.lambdas else learn.LAMBDA_GRID,
        copies=args.copies,
        folds=args.folds,
        seed=args.seed,
        task=args.task,
    )
    result = learn.cross_validate(ds, space)
    if args.out:
        lines = ["shape,tau,lambda,score"]
        lines += [
            f"{_fmt(s)},{_fmt(t)},{_fmt(l)},{_fmt(sc)}" for s, t, l, sc in result.table
        ]
        _emit("\n".join(lines) + "\n", args.out)
    sys.stdout.write(
        json.dumps(
            {
                "family": result.family,
                "shape": result.shape,
                "tau": result.tau,
                "lambda": result.lam,
                "score": result.score,
            }
        )
        + "\n"
    )
    return 0


# ---------------------------------------------------------------------------
# Benchmark orchestration


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one benchmark run."""

    data_path: str
    task: str  # regression | binary | multiclass
    kinds: Tuple[str, ...]
    kernel_text: str
    law_text: str
    tau: float | None
    sizes: Tuple[int, ...]  # copy counts, ascending
    trials: int
    lam: float
    seed: int
    subsample: int | None
    probe: int = 100  # points used for the error statistics

    def __post_init__(self):
        if self.task not in ("regression", "binary", "multiclass"):
            raise ValueError(f"unknown task {self.task!r}")
        if not self.kinds:
            raise ValueError("need at least one map kind")
        for kind in self.kinds:
            if kind not in (FOURIER_REAL, BINNING):
                raise ValueError(
                    f"bench compares learnable maps; {kind!r} is not one of "
                    f"('{FOURIER_REAL}', '{BINNING}')"
                )
        if not self.sizes or list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("copy counts must be nonempty, ascending, distinct")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.subsample is not None and self.subsample < 5:
            raise ValueError("subsample must keep at least 5 points")


def _bench_seed(base: int, kind_index: int, copies: int, trial: int) -> int:
    stream = RandomStream(base, path=(kind_index, copies, trial))
    return int(stream.integers(0, 2 ** 63 - 1, 1)[0])


def run_experiment(cfg: ExperimentConfig) -> str:
    """Run the benchmark and return its CSV text."""
    ds = parse_libsvm(cfg.data_path)
    points, targets = ds.points, ds.targets
    if cfg.subsample is not None and cfg.subsample < len(targets):
        keep = np.sort(
            np.argsort(RandomStream(cfg.seed, path=(3,)).uniform(len(targets)))[
                : cfg.subsample
            ]
        )
        points, targets = points[keep], targets[keep]
    split = learn.train_test_split(points, targets, seed=cfg.seed)
    normalizer = fit_normalizer(split.train_points)
    X_train = normalizer.apply(split.train_points)
    X_test = normalizer.apply(split.test_points)
    y_train, y_test = split.train_targets, split.test_targets
    probe = X_train[: min(cfg.probe, len(X_train))]

    lines = [
        "method,copies,theory_rel_error,empirical_rel_error,"
        "empirical_stderr,metric"
    ]
    for kind_index, kind in enumerate(cfg.kinds):
        kernel = _kernel_for_kind(kind, cfg.kernel_text, cfg.tau, cfg.law_text)
        K = approx.exact_gram(kernel, probe).values
        norm_k_sq = float(np.sum(K * K))
        k2 = (
            approx.exact_gram(kernel, probe, double=True).values
            if kind == FOURIER_REAL
            else None
        )
        for copies in cfg.sizes:
            theory_sq = approx.expected_sq_frobenius(kind, K, copies, k2=k2)
            errors = []
            metrics = []
            for trial in range(cfg.trials):
                seed = _bench_seed(cfg.seed, kind_index, copies, trial)
                map_cfg = FeatureMapConfig(
                    kind=kind, kernel=kernel, dim=X_train.shape[1],
                    copies=copies, seed=seed,
                )
                state = build_map(map_cfg)
                errors.append(
                    float(np.sum((gram(featurize(state, probe)) - K) ** 2))
                )
                if cfg.task == "regression":
                    batch = featurize(state, X_train)
                    model = learn.fit(state, batch, y_train, lam=cfg.lam)
                    preds = learn.predict(model, X_test)
                    metrics.append(float(np.mean((preds - y_test) ** 2)))
                else:
                    clf = learn.one_vs_all(
                        learn.Dataset.full(X_train, y_train), map_cfg, lam=cfg.lam
                    )
                    preds = learn.predict_labels(clf, X_test)
                    metrics.append(float(np.mean(preds == y_test)))
            mean_sq = float(np.mean(errors))
            stderr_sq = (
                float(np.std(errors, ddof=1) / math.sqrt(len(errors)))
                if len(errors) > 1
                else 0.0
            )
            emp_rel = math.sqrt(mean_sq / norm_k_sq) if mean_sq > 0 else 0.0
            stderr_rel = (
                stderr_sq / (2.0 * math.sqrt(mean_sq * norm_k_sq))
                if mean_sq > 0
                else 0.0
            )
            lines.append(
                f"{kind},{copies},{_fmt(math.sqrt(theory_sq / norm_k_sq))},"
                f"{_fmt(emp_rel)},{_fmt(stderr_rel)},{_fmt(np.mean(metrics))}"
            )
    return "\n".join(lines) + "\n"


def _cmd_bench(args) -> int:
    cfg = ExperimentConfig(
        data_path=args.data,
        task=args.task,
        kinds=tuple(k.strip() for k in args.map.split(",")),
        kernel_text=args.kernel,
        law_text=args.fourier_law,
        tau=args.tau,
        sizes=_ints(args.copies),
        trials=args.trials,
        lam=args.lam,
        seed=args.seed,
        subsample=args.subsample,
    )
    _emit(run_experiment(cfg), args.out)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _add_common(parser, *, seed=True, out=True, tau=False):
    if seed:
        parser.add_argument("--seed", type=int, default=default_seed(),
                            help="master seed (default: POLYAKERN_SEED or built-in)")
    if out:
        parser.add_argument("--out", default=None, help="output file (default: stdout)")
    if tau:
        parser.add_argument("--tau", type=float, default=None,
                            help="override the kernel's area parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyakern",
        description="Distribution-built kernels, random feature maps, and "
                    "ridge learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    kernel = sub.add_parser("kernel", help="evaluate kernels and transforms")
    ksub = kernel.add_subparsers(dest="kernel_cmd", required=True)
    for name, value_name in (("eval", "r"), ("ft", "t")):
        p = ksub.add_parser(name)
        p.add_argument("--kernel", required=True, help="kernel spec, e.g. gamma:s=2,theta=1;tau=1")
        p.add_argument("values", nargs="+", type=float, metavar=value_name)
        _add_common(p, seed=False, tau=True)
        p.set_defaults(func=_cmd_kernel)
    table = ksub.add_parser("table")
    table.add_argument("--kernel", required=True)
    table.add_argument("--max", type=float, default=10.0)
    table.add_argument("--points", type=int, default=101)
    _add_common(table, seed=False, tau=True)
    table.set_defaults(func=_cmd_kernel)

    features = sub.add_parser("features", help="featurize a dataset")
    features.add_argument("data")
    features.add_argument("--map", required=True, choices=sorted(KINDS))
    features.add_argument("--kernel", required=True)
    features.add_argument("--copies", type=int, required=True)
    features.add_argument("--hash-buckets", type=int, default=None)
    _add_common(features, tau=True)
    features.set_defaults(func=_cmd_features)

    approx_err = sub.add_parser("approx-error", help="approximation error curves")
    approx_err.add_argument("data", nargs="?", default=None)
    approx_err.add_argument("--kernel", required=True)
    approx_err.add_argument(
        "--map", default=f"{FOURIER_COMPLEX},{FOURIER_REAL},{BINNING}"
    )
    approx_err.add_argument("--copies", default="1,4,16")
    approx_err.add_argument("--trials", type=int, default=50)
    approx_err.add_argument("--subsample", type=int, default=None)
    approx_err.add_argument(
        "--fourier-law", default="cauchy:scale=1",
        help="frequency law used by fourier kinds (match it to --kernel yourself)",
    )
    _add_common(approx_err, tau=True)
    approx_err.set_defaults(func=_cmd_approx_error)

    fit = sub.add_parser("fit", help="fit a ridge model")
    fit.add_argument("data")
    fit.add_argument("--task", required=True,
                     choices=("regression", "binary", "multiclass"))
    fit.add_argument("--map", required=True,
                     choices=(FOURIER_REAL, BINNING))
    fit.add_argument("--kernel", required=True)
    fit.add_argument("--copies", type=int, required=True)
    fit.add_argument("--lambda", dest="lam", type=float, required=True)
    fit.add_argument("--hash-buckets", type=int, default=None)
    _add_common(fit, tau=True)
    fit.set_defaults(func=_cmd_fit)

    predict = sub.add_parser("predict", help="predict with a model bundle")
    predict.add_argument("data")
    predict.add_argument("--model", required=True)
    _add_common(predict, seed=False)
    predict.set_defaults(func=_cmd_predict)

    cv = sub.add_parser("cv", help="cross-validate (shape, tau, lambda)")
    cv.add_argument("data")
    cv.add_argument("--family", default="gamma")
    cv.add_argument("--shapes", default=None)
    cv.add_argument("--taus", default=None)
    cv.add_argument("--lambdas", default=None)
    cv.add_argument("--copies", type=int, default=64)
    cv.add_argument("--folds", type=int, default=4)
    cv.add_argument("--task", default="regression",
                    choices=("regression", "classification"))
    _add_common(cv)
    cv.set_defaults(func=_cmd_cv)

    bench = sub.add_parser("bench", help="error + learning benchmark")
    bench.add_argument("data")
    bench.add_argument("--task", required=True,
                       choices=("regression", "binary", "multiclass"))
    bench.add_argument("--map", default=f"{FOURIER_REAL},{BINNING}")
    bench.add_argument("--kernel", required=True)
    bench.add_argument("--copies", default="8,32,128")
    bench.add_argument("--trials", type=int, default=5)
    bench.add_argument("--lambda", dest="lam", type=float, default=0.1)
    bench.add_argument("--subsample", type=int, default=None)
    bench.add_argument(
        "--fourier-law", default="cauchy:scale=1",
        help="frequency law used by fourier kinds (match it to --kernel yourself)",
    )
    _add_common(bench, tau=True)
    bench.set_defaults(func=_cmd_bench)

    return parser


def _error_record(message: str) -> None:
    sys.stderr.write(json.dumps({"error": message}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = 0 if exc.code is None else int(exc.code)
        if code != 0:
            _error_record("invalid command-line arguments")
        return code
    try:
        return args.func(args)
    except (PolyakernError, ValueError, KeyError, OSError) as exc:
        _error_record(str(exc) or exc.__class__.__name__)
        return 1


if __name__ == "__main__":
    sys.exit(main())

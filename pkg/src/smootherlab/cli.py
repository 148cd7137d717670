"""Command-line harness around the sweeps and studies.

Every subcommand follows the same shape: a complete default config, an
optional JSON config file merged over it, repeatable --set key.path=value
overrides merged over that, and a strict key check that rejects anything the
defaults do not know about. The effective config is echoed to the output
directory as config.json next to the result tables, so a run directory is
self-describing and reruns are byte-for-byte reproducible.

Exit codes: 0 on success, 1 for validation problems (bad flags, unknown
config keys, malformed datasets, schedule violations), 2 for numerical
failures inside an otherwise valid run.
"""
from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .boosting import fit_boost, fit_boost_ensemble
from .dataset import (
    Dataset,
    SyntheticSpec,
    load_csv,
    load_idx,
    subsample,
    synth_generate,
    synth_images,
)
from .effparams import (
    generalized_eff_params,
    train_eff_params_classical,
    write_effparams_csv,
)
from .errors import SingularDesignError, ValidationError
from .experiments import (
    AXIS2_INIT,
    AnalyticModelConfig,
    SweepConfig,
    back_to_u,
    bias_variance,
    composite_schedule,
    cond_study,
    fixed_design_check,
    model_selection_study,
    peak_move,
    run_grid,
    run_sweep,
)
from .knn import fit_knn
from .linear import LinearFit, fit_minnorm, fit_ols, fit_pcr, fit_svd_basis
from .rff import DEFAULT_SCALE, sample_frequencies, transform
from .svg import LineChart
from .tableio import atomic_write_text, write_csv
from .trees import fit_ensemble, fit_tree

# --------------------------------------------------------------------------- defaults

_DESK_IMAGES = {
    "kind": "images",
    "n_train": 300,
    "n_test": 600,
    "side": 16,
    "n_classes": 5,
    "noise_std": 0.25,
    "label_noise": 0.15,
    "seed": 0,
}

_FULL_IMAGES = {
    "kind": "images",
    "n_train": 1000,
    "n_test": 2000,
    "side": 28,
    "n_classes": 10,
    "noise_std": 0.25,
    "label_noise": 0.15,
    "seed": 0,
}

DATASET_DEFAULTS = {
    "idx": {
        "kind": "idx",
        "images": "",
        "labels": "",
        "test_images": "",
        "test_labels": "",
        "n_train": None,
        "n_test": None,
        "balanced": False,
        "seed": 0,
    },
    "csv": {
        "kind": "csv",
        "train": "",
        "test": "",
        "normalize": True,
        "n_train": None,
        "n_test": None,
        "balanced": False,
        "seed": 0,
    },
    "synthetic": {
        "kind": "synthetic",
        "generator": "sine",
        "n_train": 200,
        "n_test": 400,
        "d": 2,
        "noise_std": 0.1,
        "seed": 0,
    },
    "images": dict(_DESK_IMAGES),
}

SHARED_DEFAULTS = {
    "base_seed": 0,
    "rff_seed": None,
    "rff_scale": DEFAULT_SCALE,
    "learning_rate": 0.85,
    "boost_leaf_budget": 10,
    "tree_subset": None,
    "effparams_class": 0,
    "axis1_init": None,
}

MODEL_DEFAULTS = {
    "ols": {"kind": "ols", "p_phi": 64, "rff_seed": 0, "rff_scale": DEFAULT_SCALE,
            "class_index": 0},
    "minnorm": {"kind": "minnorm", "p_phi": 600, "rff_seed": 0,
                "rff_scale": DEFAULT_SCALE, "class_index": 0},
    "svd_basis": {"kind": "svd_basis", "p_phi": 600, "rff_seed": 0,
                  "rff_scale": DEFAULT_SCALE, "class_index": 0},
    "pcr": {"kind": "pcr", "p_phi": 512, "p_pc": 128, "rff_seed": 0,
            "rff_scale": DEFAULT_SCALE, "class_index": 0},
    "knn": {"kind": "knn", "k": 5, "class_index": 0},
    "tree": {"kind": "tree", "max_leaves": 10, "seed": 1, "subset_size": None,
             "class_index": 0},
    "forest": {"kind": "forest", "max_leaves": 10, "p_ens": 5, "seed": 1,
               "subset_size": None, "class_index": 0},
    "boost": {"kind": "boost", "n_rounds": 100, "learning_rate": 0.85,
              "leaf_budget": 10, "seed": 1, "stop_tol": 1e-4,
              "subset_size": None, "class_index": 0},
    "boost_ensemble": {"kind": "boost_ensemble", "n_rounds": 20, "p_ens": 5,
                       "learning_rate": 0.85, "leaf_budget": 10, "seed": 1,
                       "subset_size": None, "class_index": 0},
}

ANALYTIC_MODEL_DEFAULTS = {
    "kind": "ols",
    "n_features": 2,
    "k": 3,
    "rff_p": 0,
    "rff_seed": 0,
    "rff_scale": DEFAULT_SCALE,
}


def _sweep_defaults():
    return {
        "dataset": dict(_DESK_IMAGES),
        "family": "rff_linear",
        "axis1_values": None,  # None picks a family default sized to n_train
        "axis2_values": None,
        "shared": dict(SHARED_DEFAULTS),
    }


def command_defaults(command: str) -> dict:
    if command == "ingest":
        return {"dataset": dict(_DESK_IMAGES)}
    if command == "fit":
        return {"dataset": dict(_DESK_IMAGES), "model": dict(MODEL_DEFAULTS["pcr"])}
    if command in ("sweep", "grid", "back-to-u"):
        return _sweep_defaults()
    if command == "peaks":
        cfg = _sweep_defaults()
        cfg["switches"] = None
        return cfg
    if command == "effparams":
        return {
            "dataset": dict(_DESK_IMAGES),
            "model": dict(MODEL_DEFAULTS["pcr"]),
            "knn_k": [1, 2, 5, 10],
        }
    if command == "cond-study":
        return {
            "dataset": dict(_DESK_IMAGES),
            "p_phi_values": None,
            "k_values": None,
            "rff_seed": 0,
            "rff_scale": DEFAULT_SCALE,
        }
    if command == "fixed-design":
        return {
            "n": 60,
            "d": 3,
            "generator": "sine",
            "noise_std": 0.3,
            "seed": 0,
            "resample_seed": 123,
            # low-d inputs need wide frequencies for a full-rank cosine design
            "rff_scale": 3.0,
            "interp_tol": 1e-4,
            "loss_tol": 1e-8,
        }
    if command == "bias-variance":
        return {
            "spec": {"generator": "sine", "n": 40, "d": 1, "noise_std": 0.3,
                     "seed": 0},
            "model": dict(ANALYTIC_MODEL_DEFAULTS),
            "n_resamples": 400,
            "n_test_points": 25,
        }
    if command == "select":
        return {
            "dataset": dict(_DESK_IMAGES),
            "leaf_grid": [2, 5, 10, "max"],
            "lr_grid": [0.5, 0.85],
            "interp_tol": 1e-4,
            "max_rounds": 200,
            "seed": 1,
        }
    raise ValidationError(f"unknown command {command!r}")


# where --seed lands for each command
_SEED_PATHS = {
    "ingest": ("dataset", "seed"),
    "fit": ("model", "seed"),
    "sweep": ("shared", "base_seed"),
    "grid": ("shared", "base_seed"),
    "peaks": ("shared", "base_seed"),
    "back-to-u": ("shared", "base_seed"),
    "effparams": ("model", "seed"),
    "cond-study": ("rff_seed",),
    "fixed-design": ("seed",),
    "bias-variance": ("spec", "seed"),
    "select": ("seed",),
}


# --------------------------------------------------------------------------- config plumbing


def _merge_strict(defaults: dict, user: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        if key not in defaults:
            known = ", ".join(sorted(defaults))
            raise ValidationError(
                f"unknown config key {path + key!r} (known: {known})"
            )
        base = defaults[key]
        if isinstance(base, dict) and isinstance(value, dict):
            out[key] = _merge_strict(base, value, path + key + ".")
        else:
            out[key] = value
    return out


def _merge_kinded(defaults_by_kind, user: dict, fallback: dict, path: str) -> dict:
    """Merge a dict whose legal keys depend on its 'kind' entry."""
    kind = user.get("kind", fallback["kind"])
    if kind not in defaults_by_kind:
        raise ValidationError(
            f"unknown {path} kind {kind!r}; choose from {sorted(defaults_by_kind)}"
        )
    base = dict(defaults_by_kind[kind])
    if fallback.get("kind") == kind:
        base.update(fallback)  # keep caller-tuned defaults for the same kind
    return _merge_strict(base, user, path + ".")


def build_config(
    command: str, file_config: dict, sets: list[str], full_scale: bool = False
) -> dict:
    user = copy.deepcopy(file_config)
    for expr in sets:
        _apply_set(user, expr)
    defaults = command_defaults(command)
    if full_scale and "dataset" in defaults:
        defaults["dataset"] = dict(_FULL_IMAGES)
    # kind-dependent sections are matched against their own key tables
    out = {}
    handled = set()
    if "dataset" in defaults:
        handled.add("dataset")
        out["dataset"] = _merge_kinded(
            DATASET_DEFAULTS, user.get("dataset", {}) or {},
            defaults["dataset"], "dataset",
        )
    if "model" in defaults and command in ("fit", "effparams"):
        handled.add("model")
        out["model"] = _merge_kinded(
            MODEL_DEFAULTS, user.get("model", {}) or {},
            defaults["model"], "model",
        )
    rest_defaults = {k: v for k, v in defaults.items() if k not in handled}
    rest_user = {k: v for k, v in user.items() if k not in handled}
    out.update(_merge_strict(rest_defaults, rest_user))
    return out


def _apply_set(user: dict, expr: str) -> None:
    key, sep, raw = expr.partition("=")
    if not sep or not key:
        raise ValidationError(f"--set needs key.path=value, got {expr!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = user
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = node[part] = {}
        elif not isinstance(nxt, dict):
            raise ValidationError(f"--set path {key!r} descends into non-dict {part!r}")
        node = nxt
    node[parts[-1]] = value


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def _echo_config(out_dir: Path, command: str, config: dict) -> None:
    payload = {"command": command, "config": _jsonable(config)}
    atomic_write_text(
        out_dir / "config.json", json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


# --------------------------------------------------------------------------- datasets


def _split(ds: Dataset, n_train: int) -> tuple[Dataset, Dataset]:
    def cut(lo, hi):
        return Dataset(
            features=ds.features[lo:hi],
            targets=ds.targets[lo:hi],
            class_labels=None if ds.class_labels is None else ds.class_labels[lo:hi],
            name=ds.name,
            true_values=None if ds.true_values is None else ds.true_values[lo:hi],
        )

    return cut(0, n_train), cut(n_train, ds.n)


def load_datasets(cfg: dict) -> tuple[Dataset, Dataset]:
    kind = cfg["kind"]
    if kind == "idx":
        for key in ("images", "labels", "test_images", "test_labels"):
            if not cfg[key]:
                raise ValidationError(f"dataset.{key} is required for kind 'idx'")
        train = load_idx(cfg["images"], cfg["labels"], name="idx-train")
        test = load_idx(cfg["test_images"], cfg["test_labels"], name="idx-test")
    elif kind == "csv":
        for key in ("train", "test"):
            if not cfg[key]:
                raise ValidationError(f"dataset.{key} is required for kind 'csv'")
        train = load_csv(cfg["train"], name="csv-train", normalize=cfg["normalize"])
        test = load_csv(cfg["test"], name="csv-test", normalize=cfg["normalize"])
    elif kind == "synthetic":
        spec = SyntheticSpec(
            cfg["generator"], cfg["n_train"] + cfg["n_test"], cfg["d"],
            cfg["noise_std"], cfg["seed"],
        )
        return _split(synth_generate(spec), cfg["n_train"])
    elif kind == "images":
        full = synth_images(
            cfg["n_train"] + cfg["n_test"],
            side=cfg["side"],
            n_classes=cfg["n_classes"],
            noise_std=cfg["noise_std"],
            seed=cfg["seed"],
            label_noise=cfg["label_noise"],
        )
        return _split(full, cfg["n_train"])
    else:  # pragma: no cover - kinds validated during merge
        raise ValidationError(f"unknown dataset kind {kind!r}")
    if cfg["n_train"] is not None:
        train = subsample(train, cfg["n_train"], cfg["seed"], balanced=cfg["balanced"])
    if cfg["n_test"] is not None:
        test = subsample(test, cfg["n_test"], cfg["seed"] + 1, balanced=cfg["balanced"])
    return train, test


def _binary_targets(ds: Dataset, class_index: int) -> np.ndarray:
    if ds.class_labels is None:
        return ds.targets
    if not (0 <= class_index < ds.n_classes):
        raise ValidationError(
            f"class_index {class_index} out of range [0, {ds.n_classes})"
        )
    return (ds.class_labels == class_index).astype(float)


# --------------------------------------------------------------------------- axis defaults


def default_axis_values(family: str, n: int) -> tuple[list[int], list[int]]:
    if family == "rff_linear":
        axis1 = sorted(
            {v for v in (2, 8, 32, 64, 128, 192, 256, 384, 512, 768) if v < n}
            | {n - 1}
        )
        axis2 = [0, n, 3 * n]
    elif family == "tree":
        axis1 = sorted({v for v in (2, 5, 10, 20, 50, 100, 200) if v < n} | {n})
        axis2 = [1, 2, 5, 10]
    elif family == "boosting":
        axis1 = [1, 2, 3, 5, 8, 12, 20, 30]
        axis2 = [1, 2, 5, 10]
    else:
        raise ValidationError(f"unknown family {family!r}")
    return axis1, axis2


def _resolve_axes(cfg: dict, n: int) -> tuple[list[int], list[int]]:
    d1, d2 = default_axis_values(cfg["family"], n)
    axis1 = cfg["axis1_values"] if cfg["axis1_values"] is not None else d1
    axis2 = cfg["axis2_values"] if cfg["axis2_values"] is not None else d2
    return [int(v) for v in axis1], [int(v) for v in axis2]


def _composite_axis2(family: str, values: list[int]) -> list[int]:
    """Drop axis-2 values equal to the leg's starting state, so composite
    walks do not evaluate the switch point twice."""
    init = AXIS2_INIT[family]
    kept = [v for v in values if v != init]
    return kept or values


def _shared_config(cfg: dict) -> SweepConfig:
    s = cfg["shared"]
    return SweepConfig(
        base_seed=int(s["base_seed"]),
        rff_seed=None if s["rff_seed"] is None else int(s["rff_seed"]),
        rff_scale=float(s["rff_scale"]),
        learning_rate=float(s["learning_rate"]),
        boost_leaf_budget=int(s["boost_leaf_budget"]),
        tree_subset=None if s["tree_subset"] is None else int(s["tree_subset"]),
        effparams_class=int(s["effparams_class"]),
        axis1_init=None if s["axis1_init"] is None else int(s["axis1_init"]),
    )


# --------------------------------------------------------------------------- model fitting (fit / effparams)


def _fit_model(cfg: dict, train: Dataset):
    """Returns (model, weight-query function taking raw inputs, info dict)."""
    kind = cfg["kind"]
    y = _binary_targets(train, cfg["class_index"])
    X = train.features
    if kind in ("ols", "minnorm", "svd_basis", "pcr"):
        fmap = sample_frequencies(
            cfg["rff_seed"], cfg["p_phi"], train.d, cfg["rff_scale"]
        )
        Phi = transform(fmap, X, cfg["p_phi"])
        if kind == "ols":
            fit = fit_ols(Phi, y)
        elif kind == "minnorm":
            fit = fit_minnorm(Phi, y)
        elif kind == "svd_basis":
            fit = fit_svd_basis(Phi, y)
        else:
            fit = fit_pcr(Phi, y, cfg["p_pc"])
        raw = cfg["p_phi"] if kind != "pcr" else cfg["p_pc"] + 1

        def query(X0):
            return fit.weight_matrix(transform(fmap, np.atleast_2d(X0), cfg["p_phi"]))

        def predict(X0):
            return fit.predict(transform(fmap, np.atleast_2d(X0), cfg["p_phi"]))

        return fit, query, predict, {"raw_params": raw}
    if kind == "knn":
        model = fit_knn(X, y, cfg["k"])
        return model, model.weight_matrix, model.predict, {"raw_params": None}
    if kind == "tree":
        model = fit_tree(X, y, cfg["max_leaves"], seed=cfg["seed"],
                         subset_size=cfg["subset_size"])
        return model, model.weight_matrix, model.predict, {
            "raw_params": model.n_leaves
        }
    if kind == "forest":
        model = fit_ensemble(X, y, cfg["max_leaves"], cfg["p_ens"],
                             base_seed=cfg["seed"], subset_size=cfg["subset_size"])
        raw = sum(t.n_leaves for t in model.members)
        return model, model.weight_matrix, model.predict, {"raw_params": raw}
    if kind == "boost":
        model = fit_boost(X, y, n_rounds=cfg["n_rounds"],
                          learning_rate=cfg["learning_rate"],
                          leaf_budget=cfg["leaf_budget"], seed=cfg["seed"],
                          stop_tol=cfg["stop_tol"], subset_size=cfg["subset_size"])
        raw = sum(t.n_leaves for t in model.trees)
        return model, model.weight_matrix, model.predict, {
            "raw_params": raw, "rounds_used": model.n_rounds
        }
    if kind == "boost_ensemble":
        model = fit_boost_ensemble(X, y, cfg["n_rounds"], cfg["p_ens"],
                                   base_seed=cfg["seed"],
                                   learning_rate=cfg["learning_rate"],
                                   leaf_budget=cfg["leaf_budget"],
                                   subset_size=cfg["subset_size"])
        raw = sum(sum(t.n_leaves for t in m.trees) for m in model.members)
        return model, model.weight_matrix, model.predict, {"raw_params": raw}
    raise ValidationError(f"unknown model kind {kind!r}")


# --------------------------------------------------------------------------- svg helpers


def _sweep_chart(result, title: str) -> LineChart:
    idx = np.array([r.point_index for r in result.records], dtype=float)
    chart = LineChart(title, "schedule position", "summed squared loss", log_y=True)
    chart.add("test", idx, result.test_mse)
    chart.add("train", idx, np.maximum(result.train_mse, 1e-18))
    return chart


# --------------------------------------------------------------------------- subcommands


def _cmd_ingest(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    summary = {
        "train": {"n": train.n, "d": train.d, "classes": train.n_classes,
                  "name": train.name},
        "test": {"n": test.n, "d": test.d, "classes": test.n_classes,
                 "name": test.name},
    }
    atomic_write_text(out / "dataset.json",
                      json.dumps(_jsonable(summary), indent=2) + "\n")
    return (
        f"ingest: train n={train.n} d={train.d} classes={train.n_classes} "
        f"test n={test.n} -> {out / 'dataset.json'}"
    )


def _cmd_fit(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    model, query, predict, info = _fit_model(cfg["model"], train)
    y_tr = _binary_targets(train, cfg["model"]["class_index"])
    y_te = _binary_targets(test, cfg["model"]["class_index"])
    W_tr = query(train.features)
    W_te = query(test.features)
    n = train.n
    report = {
        "model": cfg["model"]["kind"],
        "train_mse": float(np.mean((W_tr @ y_tr - y_tr) ** 2)),
        "test_mse": float(np.mean((predict(test.features) - y_te) ** 2)),
        "p_train": float(n * np.mean(np.sum(W_tr * W_tr, axis=1))),
        "p_test": float(n * np.mean(np.sum(W_te * W_te, axis=1))),
        **info,
    }
    report["effective_knn_test"] = float(n / report["p_test"])
    atomic_write_text(out / "fit_report.json",
                      json.dumps(_jsonable(report), indent=2) + "\n")
    return (
        f"fit: {report['model']} train_mse={report['train_mse']:.4g} "
        f"test_mse={report['test_mse']:.4g} p_train={report['p_train']:.4g} "
        f"p_test={report['p_test']:.4g} -> {out / 'fit_report.json'}"
    )


def _cmd_sweep(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    axis1, axis2 = _resolve_axes(cfg, train.n)
    axis2 = _composite_axis2(cfg["family"], axis2)
    schedule = composite_schedule(cfg["family"], axis1, axis2,
                                  shared=_shared_config(cfg))
    result = run_sweep(schedule, train, test, threads=args.threads)
    path = out / "sweep.csv"
    result.write_csv(path)
    if args.svg:
        _sweep_chart(result, f"composite sweep ({cfg['family']})").write(
            out / "sweep.svg"
        )
    peak = int(np.argmax(result.test_mse))
    return (
        f"sweep: family={cfg['family']} points={len(result.records)} "
        f"peak_test_mse={result.test_mse[peak]:.4g}@{peak} "
        f"final_test_mse={result.test_mse[-1]:.4g} -> {path}"
    )


def _cmd_grid(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    axis1, axis2 = _resolve_axes(cfg, train.n)
    result = run_grid(cfg["family"], axis1, axis2, train, test,
                      shared=_shared_config(cfg), threads=args.threads)
    path = out / "grid.csv"
    result.write_csv(path)
    if args.svg:
        chart = LineChart(f"grid ({cfg['family']})", "axis-1 value",
                          "summed squared loss", log_y=True)
        for a2 in axis2:
            rows = [r for r in result.records if r.axis2_value == a2]
            chart.add(
                f"{rows[0].axis2_name}={a2}",
                np.array([r.axis1_value for r in rows], dtype=float),
                np.array([r.test_mse for r in rows]),
            )
        chart.write(out / "grid.svg")
    return (
        f"grid: family={cfg['family']} points={len(result.records)} -> {path}"
    )


def _cmd_peaks(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    axis1, axis2 = _resolve_axes(cfg, train.n)
    switches = cfg["switches"]
    if switches is None:
        top = axis1[-1]
        switches = sorted({max(2, int(round(top * f))) for f in (0.8, 0.9, 1.0)})
    results = peak_move(cfg["family"], switches, train, test,
                        shared=_shared_config(cfg), axis1_grid=axis1,
                        axis2_values=_composite_axis2(cfg["family"], axis2),
                        threads=args.threads)
    chart = LineChart(f"peak moving ({cfg['family']})", "schedule position",
                      "summed squared loss", log_y=True)
    lines = []
    for switch, result in zip(switches, results):
        path = out / f"peaks_switch{switch}.csv"
        result.write_csv(path)
        peak = int(np.argmax(result.test_mse))
        switch_at = result.schedule.switch_indices()
        lines.append(f"switch={switch} peak@{peak} (axis change @{switch_at})")
        idx = np.array([r.point_index for r in result.records], dtype=float)
        chart.add(f"switch={switch}", idx, result.test_mse)
    if args.svg:
        chart.write(out / "peaks.svg")
    return f"peaks: family={cfg['family']} " + "; ".join(lines) + f" -> {out}"


def _cmd_back_to_u(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    axis1, axis2 = _resolve_axes(cfg, train.n)
    result = back_to_u(cfg["family"], train, test, axis1, axis2,
                       shared=_shared_config(cfg), threads=args.threads)
    path = out / "back_to_u.csv"
    result.write_csv(path)
    if args.svg:
        chart = LineChart(f"back to U ({cfg['family']})",
                          "generalized params (test inputs)",
                          "summed squared loss", log_y=True, log_x=True)
        for name in result.branch_names():
            rows = result.branch(name)
            chart.add(name, np.array([r.p_test for r in rows]),
                      np.array([r.test_mse for r in rows]),
                      dashed=name.startswith("contour"))
        chart.write(out / "back_to_u.svg")
    n_contours = sum(1 for b in result.branch_names() if b.startswith("contour"))
    return (
        f"back-to-u: family={cfg['family']} branches={len(result.branch_names())} "
        f"contours={n_contours} -> {path}"
    )


def _cmd_effparams(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    model, query, _, info = _fit_model(cfg["model"], train)

    class _Wrapped:
        n_train = train.n

        @staticmethod
        def weight_matrix(inputs):
            return query(inputs)

    rows = [
        (cfg["model"]["kind"], generalized_eff_params(_Wrapped, train.features,
                                                      set_name="train")),
        (cfg["model"]["kind"], generalized_eff_params(_Wrapped, test.features,
                                                      set_name="test")),
    ]
    for k in cfg["knn_k"]:
        y = _binary_targets(train, cfg["model"]["class_index"])
        knn = fit_knn(train.features, y, int(k))
        rows.append((f"knn_k={k}", generalized_eff_params(knn, test.features,
                                                          set_name="test")))
    path = out / "effparams.csv"
    write_effparams_csv(path, rows)
    extra = {}
    if isinstance(model, LinearFit):
        extra = train_eff_params_classical(model.hat_matrix())
        atomic_write_text(out / "classical.json",
                          json.dumps(_jsonable(extra), indent=2) + "\n")
    head = rows[1][1]
    line = (
        f"effparams: {cfg['model']['kind']} p_test={head.p_generalized:.4g} "
        f"effective_knn={head.effective_knn:.4g}"
    )
    if extra:
        line += f" p_cov={extra['p_cov']:.4g}"
    return line + f" -> {path}"


def _cmd_cond_study(cfg, out, args) -> str:
    train, _ = load_datasets(cfg["dataset"])
    n = train.n
    p_values = cfg["p_phi_values"]
    if p_values is None:
        p_values = sorted({max(2, n // 8), n // 2, n - 1, n, 2 * n})
    k_values = cfg["k_values"]
    if k_values is None:
        k_values = [1, max(1, n // 2), n - 1, n]
    fmap = sample_frequencies(cfg["rff_seed"], max(p_values), train.d,
                              cfg["rff_scale"])
    rows = cond_study(fmap, train, p_values, k_values)
    path = out / "conditioning.csv"
    write_csv(path, ["p_phi", "k", "sigma_k", "cond_k"],
              [[r.p_phi, r.k, r.sigma_k, r.cond_k] for r in rows])
    worst = max((r for r in rows if np.isfinite(r.cond_k)),
                key=lambda r: r.cond_k, default=None)
    tag = f"max_finite_cond={worst.cond_k:.4g}@p_phi={worst.p_phi},k={worst.k}" \
        if worst else "all_infinite"
    return f"cond-study: rows={len(rows)} {tag} -> {path}"


def _cmd_fixed_design(cfg, out, args) -> str:
    spec = SyntheticSpec(cfg["generator"], cfg["n"], cfg["d"], cfg["noise_std"],
                         cfg["seed"])
    ds = synth_generate(spec)
    X, y = ds.features, ds.targets
    rng = np.random.default_rng(cfg["resample_seed"])
    y_new = ds.true_values + rng.normal(0.0, cfg["noise_std"], size=ds.n)
    # interpolators of very different raw size: min-norm at n, 2n and 8n
    # features, a fully grown tree, and 1-nearest-neighbour
    widths = [ds.n, 2 * ds.n, 8 * ds.n]
    fmap = sample_frequencies(cfg["seed"], widths[-1], ds.d, cfg["rff_scale"])
    Phi = transform(fmap, X, widths[-1])
    models: dict[str, object] = {
        f"minnorm_p{w}": fit_minnorm(Phi[:, :w], y) for w in widths
    }
    models["full_tree"] = fit_tree(X, y, max_leaves=ds.n, seed=1, subset_size=ds.d)
    models["knn_k1"] = fit_knn(X, y, 1)
    report = fixed_design_check(models, y, y_new, interp_tol=cfg["interp_tol"],
                                loss_tol=cfg["loss_tol"])
    atomic_write_text(out / "fixed_design.json",
                      json.dumps(_jsonable(report), indent=2) + "\n")
    return (
        f"fixed-design: models={len(models)} reference={report.reference_loss:.6g} "
        f"max_dev={report.max_loss_deviation:.3g} -> {out / 'fixed_design.json'}"
    )


def _cmd_bias_variance(cfg, out, args) -> str:
    spec = SyntheticSpec(cfg["spec"]["generator"], cfg["spec"]["n"],
                         cfg["spec"]["d"], cfg["spec"]["noise_std"],
                         cfg["spec"]["seed"])
    m = cfg["model"]
    model = AnalyticModelConfig(kind=m["kind"], n_features=m["n_features"],
                                k=m["k"], rff_p=m["rff_p"],
                                rff_seed=m["rff_seed"], rff_scale=m["rff_scale"])
    report = bias_variance(spec, model, n_resamples=cfg["n_resamples"],
                           n_test_points=cfg["n_test_points"])
    header = ["point", "analytic_bias", "analytic_variance", "analytic_mse",
              "mc_bias", "mc_variance", "mc_mse", "se_bias", "se_variance",
              "se_mse"]
    rows = [
        [j, report.analytic_bias[j], report.analytic_variance[j],
         report.analytic_mse[j], report.mc_bias[j], report.mc_variance[j],
         report.mc_mse[j], report.se_bias[j], report.se_variance[j],
         report.se_mse[j]]
        for j in range(report.analytic_bias.size)
    ]
    path = out / "bias_variance.csv"
    write_csv(path, header, rows)
    return (
        f"bias-variance: {m['kind']} max_z_bias={report.max_z_bias:.2f} "
        f"max_z_var={report.max_z_variance:.2f} max_z_mse={report.max_z_mse:.2f} "
        f"-> {path}"
    )


def _cmd_select(cfg, out, args) -> str:
    train, test = load_datasets(cfg["dataset"])
    result = model_selection_study(
        train, test, cfg["leaf_grid"], cfg["lr_grid"],
        interp_tol=cfg["interp_tol"], max_rounds=cfg["max_rounds"],
        seed=cfg["seed"],
    )
    header = ["leaf_budget", "learning_rate", "rounds_used", "train_mse",
              "interpolating", "test_mse", "p_test"]
    rows = [
        [r.leaf_budget, r.learning_rate, r.rounds_used, r.train_mse,
         int(r.interpolating), r.test_mse, r.p_test]
        for r in result.rows
    ]
    path = out / "selection.csv"
    write_csv(path, header, rows)
    sel = result.selected
    picked = (
        f"selected leaf_budget={sel.leaf_budget} lr={sel.learning_rate} "
        f"test_mse={sel.test_mse:.4g}" if sel else "selected none"
    )
    rho = "n/a" if result.spearman is None else f"{result.spearman:.3f}"
    return f"select: configs={len(result.rows)} {picked} spearman={rho} -> {path}"


_COMMANDS = {
    "ingest": _cmd_ingest,
    "fit": _cmd_fit,
    "sweep": _cmd_sweep,
    "grid": _cmd_grid,
    "peaks": _cmd_peaks,
    "back-to-u": _cmd_back_to_u,
    "effparams": _cmd_effparams,
    "cond-study": _cmd_cond_study,
    "fixed-design": _cmd_fixed_design,
    "bias-variance": _cmd_bias_variance,
    "select": _cmd_select,
}


# --------------------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we use 1
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="smootherlab",
        description="Smoother-weight experiments: sweeps, effective parameter "
        "counts, and diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config file merged over the defaults")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (repeatable, dotted paths)")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default runs/<command>)")
        p.add_argument("--seed", type=int, default=None,
                       help="seed override routed to the command's seed knob")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (else SMOOTHERLAB_THREADS, else cores)")
        p.add_argument("--full-scale", action="store_true",
                       help="use the large preset dataset instead of desk scale")
        p.add_argument("--svg", action="store_true",
                       help="also render charts next to the CSV output")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        file_cfg = {}
        if args.config is not None:
            try:
                file_cfg = json.loads(Path(args.config).read_text())
            except OSError as exc:
                raise ValidationError(f"cannot read config: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ValidationError(f"config is not valid JSON: {exc}") from exc
            if not isinstance(file_cfg, dict):
                raise ValidationError("config file must hold a JSON object")
        cfg = build_config(args.command, file_cfg, args.set,
                           full_scale=args.full_scale)
        if args.seed is not None:
            path = _SEED_PATHS[args.command]
            if path == ("model", "seed") and "seed" not in cfg["model"]:
                # linear models draw their randomness from the feature map
                path = ("model", "rff_seed")
            node = cfg
            *head, last = path
            for part in head:
                node = node[part]
            node[last] = args.seed
        out_dir = args.out if args.out is not None else Path("runs") / args.command
        out_dir.mkdir(parents=True, exist_ok=True)
        _echo_config(out_dir, args.command, cfg)
        line = _COMMANDS[args.command](cfg, out_dir, args)
        print(line)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SingularDesignError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Datasets, experiment pipelines and the ``qtopo`` command line.

Exit codes: 0 success, 1 usage or I/O error, 2 numeric or size-limit failure.
The default output directory comes from ``QTOPO_OUTPUT_DIR`` (else ``.``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import encode as enc
from .bottleneck import bottleneck_distance, diagram_set_distance
from .mds import EmbeddingResult, classical_mds, qmds
from .metric import (as_point_cloud, distance_matrix_from_csv, distance_matrix_to_csv, distortion,
                     euclidean_distance_matrix, gh_upper_bound, optimal_weight,
                     scale_free_distortion, strain, stress)
from .ph import (DEFAULT_SIMPLEX_CAP, SimplexLimitError, barcode_to_csv, diagrams,
                 diagrams_from_json, diagrams_to_json)
from .quantum import (Metric, distance_from_fidelity, distance_matrix, is_pure_vector,
                      pure_fidelity_matrix, states_to_json, swap_test_fidelity_matrix)

OUTPUT_ENV = "QTOPO_OUTPUT_DIR"
_SIMPLEX_INPUT = ("sqrt", "diagonal")


class UsageError(ValueError):
    """Invalid configuration or command-line input."""


def fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


# datasets


def gen_roots_of_unity(n: int, r: float = 1.0) -> np.ndarray:
    if n < 2 or not r > 0:
        raise UsageError("roots of unity need n >= 2 and r > 0")
    t = 2 * np.pi * np.arange(n) / n
    return np.c_[r * np.cos(t), r * np.sin(t)]


def gen_noisy_circle(n: int, r: float = 1.0, sigma: float = 0.05, seed: int = 0) -> np.ndarray:
    """Uniform angles on [0, 2pi) and radii r + N(0, sigma^2)."""
    if n < 2 or not r > 0 or sigma < 0:
        raise UsageError("noisy circle needs n >= 2, r > 0, sigma >= 0")
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, 2 * np.pi, n)
    rad = r + sigma * rng.normal(size=n)
    return np.c_[rad * np.cos(t), rad * np.sin(t)]


def circle_geodesic_distances(angles, r: float = 1.0) -> np.ndarray:
    t = np.mod(np.asarray(angles, dtype=float), 2 * np.pi)
    d = np.abs(t[:, None] - t[None, :])
    return r * np.minimum(d, 2 * np.pi - d)


def roots_geodesic_distances(n: int, r: float = 1.0) -> np.ndarray:
    """Arc-length metric on the n-th roots of unity from index differences."""
    k = np.arange(n)
    steps = np.abs(k[:, None] - k[None, :])
    return 2 * np.pi * r * np.minimum(steps, n - steps) / n


def cloud_to_csv(X) -> str:
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in np.atleast_2d(X))


def cloud_from_csv(text: str) -> np.ndarray:
    rows = [line for line in text.splitlines() if line.strip()]
    return as_point_cloud([[float(v) for v in line.split(",")] for line in rows])


# configuration


@dataclass
class ExperimentConfig:
    dataset: dict = field(default_factory=lambda: {"kind": "noisy_circle", "n": 200, "r": 1.0,
                                                   "sigma": 0.05, "seed": 0})
    base_metric: str = "euclidean"
    encoding: dict = field(default_factory=lambda: {"name": "sqrt"})
    quantum_metric: str | None = None
    max_hom_degree: int = 1
    shots: int | None = None
    shot_seed: int = 0
    output_dir: str | None = None
    cmds_dim: int = 2
    simplex_cap: int = DEFAULT_SIMPLEX_CAP

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        kind = self.dataset.get("kind")
        if kind not in ("roots_of_unity", "noisy_circle", "file"):
            raise UsageError(f"unknown dataset kind {kind!r}")
        if kind != "file":
            if int(self.dataset.get("n", 0)) < 2 or not float(self.dataset.get("r", 1.0)) > 0:
                raise UsageError("dataset needs n >= 2 and r > 0")
            if float(self.dataset.get("sigma", 0.0)) < 0:
                raise UsageError("sigma must be >= 0")
        if self.base_metric not in ("euclidean", "geodesic_circle"):
            raise UsageError(f"unknown base metric {self.base_metric!r}")
        if self.encoding.get("name") not in enc.ENCODINGS:
            raise UsageError(f"unknown encoding {self.encoding.get('name')!r}")
        if self.quantum_metric is not None:
            try:
                Metric(self.quantum_metric)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        if not 0 <= self.max_hom_degree <= 4:
            raise UsageError("max_hom_degree must lie in [0, 4]")
        if self.shots is not None and self.shots < 1:
            raise UsageError("shots must be >= 1")

    def out_dir(self) -> Path:
        return Path(self.output_dir or os.environ.get(OUTPUT_ENV, "."))


def load_dataset(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Point cloud and base distance matrix for a config."""
    ds = cfg.dataset
    kind = ds["kind"]
    r = float(ds.get("r", 1.0))
    if kind == "roots_of_unity":
        X = gen_roots_of_unity(int(ds["n"]), r)
    elif kind == "noisy_circle":
        X = gen_noisy_circle(int(ds["n"]), r, float(ds.get("sigma", 0.05)), int(ds.get("seed", 0)))
    else:
        X = cloud_from_csv(Path(ds["path"]).read_text())
    if cfg.base_metric == "euclidean":
        return X, euclidean_distance_matrix(X)
    if X.shape[1] != 2:
        raise UsageError("geodesic_circle needs planar points")
    if kind == "roots_of_unity":
        return X, roots_geodesic_distances(X.shape[0], r)
    return X, circle_geodesic_distances(np.arctan2(X[:, 1], X[:, 0]), r)


def default_quantum_metric(cfg: ExperimentConfig) -> str:
    if cfg.quantum_metric:
        return cfg.quantum_metric
    if cfg.encoding["name"] == "utd":
        return Metric.HILBERT_SCHMIDT.value
    if cfg.dataset["kind"] == "roots_of_unity":
        return Metric.BURES_FIDELITY.value
    return Metric.BURES_ANGLE.value


def encode_dataset(X: np.ndarray, encoding: dict) -> list[np.ndarray]:
    """Apply an encoding description: optional uniform transform, pre-scale, feature map.

    Keys: ``name``; ``transform`` ("uniform" or "none"); ``prescale``;
    ``shrink`` (uts only); ``coords`` ("first-m" or "all") choosing which
    simplex coordinates feed angle-type maps after the uniform transform.
    """
    name = encoding["name"]
    if name in ("utd", "uts"):
        return enc.encode_cloud(X, name, shrink=float(encoding.get("shrink", 1.0)))
    default_transform = "uniform" if name in ("angle", "iqp") + _SIMPLEX_INPUT else "none"
    transform = encoding.get("transform", default_transform)
    if transform not in ("uniform", "none"):
        raise UsageError(f"unknown transform {transform!r}")
    if transform == "uniform":
        t = enc.fit_uniform_transform(X).with_shrink(float(encoding.get("shrink", 1.0)))
        P = enc.apply_uniform_transform(t, X)
        if name not in _SIMPLEX_INPUT and encoding.get("coords", "first-m") == "first-m":
            P = P[:, : X.shape[1]]
        default_prescale = {"angle": math.pi, "iqp": math.pi / 2}.get(name, 1.0)
    else:
        P = X
        default_prescale = 1.0
    prescale = float(encoding.get("prescale", default_prescale))
    return enc.encode_cloud(P, name, prescale=prescale)


def encoded_distances(states, metric: str, shots: int | None = None, seed: int = 0) -> np.ndarray:
    if shots:
        if not all(is_pure_vector(s) for s in states):
            raise UsageError("shot-noise fidelities need pure states")
        F = swap_test_fidelity_matrix(states, shots, seed)
        D = distance_from_fidelity(F, metric)
        np.fill_diagonal(D, 0.0)
        return D
    return distance_matrix(states, metric)


def compare_distance_matrices(D_X, D_Y, max_hom_degree: int = 1,
                              cap: int = DEFAULT_SIMPLEX_CAP) -> dict:
    """All scalar comparisons plus per-degree bottleneck of weighted diagrams."""
    w, resid = optimal_weight(D_X, D_Y, "max")
    WY = w * np.asarray(D_Y)
    dX = diagrams(D_X, max_hom_degree, cap)
    dY = diagrams(WY, max_hom_degree, cap)
    per, worst = diagram_set_distance(dX, dY)
    sf, lam = scale_free_distortion(D_X, D_Y)
    return {
        "distortion": distortion(D_X, D_Y),
        "scale_free_distortion": sf,
        "scale_free_lambda": lam,
        "stress": stress(D_X, D_Y),
        "strain": strain(D_X, D_Y),
        "weight": w,
        "weighted_distortion": resid,
        "weighted_stress": stress(D_X, WY),
        "gh_upper_bound": gh_upper_bound(D_X, WY),
        "bottleneck": per,
        "bottleneck_max": worst,
        "diagrams_original": dX,
        "diagrams_encoded": dY,
    }


def _table_rows(report: dict) -> list[tuple[str, float]]:
    rows = [(k, report[k]) for k in ("distortion", "scale_free_distortion", "scale_free_lambda",
                                     "stress", "strain", "weight", "weighted_distortion",
                                     "weighted_stress", "gh_upper_bound")]
    rows += [(f"bottleneck_h{k}", v) for k, v in enumerate(report["bottleneck"])]
    return rows


def run_pipeline(cfg: ExperimentConfig) -> dict:
    """Encode a dataset, compare metrics and diagrams, and write report files."""
    cfg.validate()
    X, D_X = load_dataset(cfg)
    states = encode_dataset(X, cfg.encoding)
    metric = default_quantum_metric(cfg)
    D_Y = encoded_distances(states, metric, cfg.shots, cfg.shot_seed)
    report = compare_distance_matrices(D_X, D_Y, cfg.max_hom_degree, cfg.simplex_cap)
    report["quantum_metric"] = metric
    emb = classical_mds(report["weight"] * D_Y, target_dim=cfg.cmds_dim)

    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    (out / "cloud.csv").write_text(cloud_to_csv(X))
    (out / "distances_original.csv").write_text(distance_matrix_to_csv(D_X))
    (out / "distances_encoded.csv").write_text(distance_matrix_to_csv(D_Y))
    (out / "states.json").write_text(states_to_json(states))
    (out / "diagrams_original.json").write_text(diagrams_to_json(report["diagrams_original"]))
    (out / "diagrams_encoded.json").write_text(diagrams_to_json(report["diagrams_encoded"]))
    (out / "barcode_original.csv").write_text(barcode_to_csv(report["diagrams_original"]))
    (out / "barcode_encoded.csv").write_text(barcode_to_csv(report["diagrams_encoded"]))
    (out / "comparison.csv").write_text(
        "quantity,value\n" + "".join(f"{k},{fmt(v)}\n" for k, v in _table_rows(report)))
    (out / "comparison.json").write_text(json.dumps(
        {"config": asdict(cfg), "quantum_metric": metric,
         **{k: (v if math.isfinite(v) else "inf") for k, v in _table_rows(report)}}, sort_keys=True))
    (out / "cmds_encoded.csv").write_text(cloud_to_csv(emb.coordinates))
    return report


def great_circle_residual(B) -> float:
    """Largest distance of Bloch points from their best-fit plane through the origin."""
    B = np.asarray(B, dtype=float)
    normal = np.linalg.svd(B, full_matrices=False)[2][-1]
    return float(np.abs(B @ normal).max())


def run_qmds(cfg: ExperimentConfig, hilbert_dim: int = 2, seed: int = 0, rates=(1e-3, 1e-4),
             max_iter: int = 200_000) -> EmbeddingResult:
    cfg.validate()
    _, D = load_dataset(cfg)
    res = qmds(D, hilbert_dim, rates=rates, seed=seed, max_iter=max_iter)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    D_FS = distance_matrix(list(res.coordinates), Metric.FUBINI_STUDY)
    if hilbert_dim == 2:
        B = np.array([enc.bloch_vector(s) for s in res.coordinates])
        res.extra["great_circle_residual"] = great_circle_residual(B)
        (out / "bloch.csv").write_text(cloud_to_csv(B))
    (out / "qmds_result.json").write_text(res.to_json())
    (out / "distances_fs.csv").write_text(distance_matrix_to_csv(D_FS))
    return res


# command line


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config (flags override it)")
    p.add_argument("--dataset", choices=["roots_of_unity", "noisy_circle", "file"])
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--path")
    p.add_argument("--base-metric", choices=["euclidean", "geodesic_circle"])
    p.add_argument("--output-dir")


def _config_from_args(a) -> ExperimentConfig:
    obj = json.loads(Path(a.config).read_text()) if a.config else {}
    cfg = ExperimentConfig(**{k: v for k, v in obj.items() if k in ExperimentConfig.__dataclass_fields__})
    ds = dict(cfg.dataset)
    if a.dataset:
        ds = {"kind": a.dataset}
    for key in ("n", "r", "sigma", "seed", "path"):
        val = getattr(a, key, None)
        if val is not None:
            ds[key] = val
    ds.setdefault("n", 200)
    cfg.dataset = ds
    if a.base_metric:
        cfg.base_metric = a.base_metric
    if a.output_dir:
        cfg.output_dir = a.output_dir
    encoding = dict(cfg.encoding)
    if getattr(a, "encoding", None):
        encoding = {"name": a.encoding}
    for key in ("prescale", "shrink", "transform", "coords"):
        val = getattr(a, key, None)
        if val is not None:
            encoding[key] = val
    cfg.encoding = encoding
    for key in ("quantum_metric", "max_hom_degree", "shots"):
        val = getattr(a, key, None)
        if val is not None:
            setattr(cfg, key, val)
    cfg.validate()
    return cfg


def _encoding_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--encoding", choices=list(enc.ENCODINGS))
    p.add_argument("--prescale", type=float)
    p.add_argument("--shrink", type=float)
    p.add_argument("--transform", choices=["uniform", "none"])
    p.add_argument("--coords", choices=["first-m", "all"])
    p.add_argument("--quantum-metric", choices=[m.value for m in Metric])
    p.add_argument("--shots", type=int)


def _read_diagrams(path: str):
    return diagrams_from_json(Path(path).read_text())


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qtopo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a dataset and its base distance matrix")
    _dataset_args(g)

    e = sub.add_parser("encode", help="encode a dataset and write states and distances")
    _dataset_args(e)
    _encoding_args(e)

    h = sub.add_parser("ph", help="persistence diagrams of a distance matrix CSV")
    h.add_argument("distances")
    h.add_argument("--max-degree", type=int, default=1)
    h.add_argument("--json", help="write diagrams JSON here")
    h.add_argument("--csv", help="write barcode CSV here (default: stdout)")

    b = sub.add_parser("bottleneck", help="per-degree bottleneck distance of two diagram JSON files")
    b.add_argument("first")
    b.add_argument("second")

    c = sub.add_parser("compare", help="compare two distance matrix CSV files")
    c.add_argument("original")
    c.add_argument("encoded")
    c.add_argument("--max-degree", type=int, default=1)

    q = sub.add_parser("qmds", help="quantum MDS of a dataset")
    _dataset_args(q)
    q.add_argument("--hilbert-dim", type=int, default=2)
    q.add_argument("--qmds-seed", type=int, default=0)
    q.add_argument("--max-iter", type=int, default=200_000)

    p = sub.add_parser("pipeline", help="full encode / compare / persistence pipeline")
    _dataset_args(p)
    _encoding_args(p)
    p.add_argument("--max-hom-degree", type=int)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (UsageError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"qtopo: {exc}", file=sys.stderr)
        return 1
    except (SimplexLimitError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qtopo: numeric failure: {exc}", file=sys.stderr)
        return 2


def _dispatch(a) -> int:
    if a.cmd == "gen":
        cfg = _config_from_args(a)
        X, D = load_dataset(cfg)
        out = cfg.out_dir()
        out.mkdir(parents=True, exist_ok=True)
        (out / "cloud.csv").write_text(cloud_to_csv(X))
        (out / "distances.csv").write_text(distance_matrix_to_csv(D))
        print(f"wrote {X.shape[0]} points to {out}")
    elif a.cmd == "encode":
        cfg = _config_from_args(a)
        X, _ = load_dataset(cfg)
        states = encode_dataset(X, cfg.encoding)
        D = encoded_distances(states, default_quantum_metric(cfg), cfg.shots, cfg.shot_seed)
        out = cfg.out_dir()
        out.mkdir(parents=True, exist_ok=True)
        (out / "states.json").write_text(states_to_json(states))
        (out / "distances_encoded.csv").write_text(distance_matrix_to_csv(D))
        print(f"wrote {len(states)} states to {out}")
    elif a.cmd == "ph":
        D = distance_matrix_from_csv(Path(a.distances).read_text())
        if not 0 <= a.max_degree <= 4:
            raise UsageError("max degree must lie in [0, 4]")
        dg = diagrams(D, a.max_degree)
        if a.json:
            Path(a.json).write_text(diagrams_to_json(dg))
        if a.csv:
            Path(a.csv).write_text(barcode_to_csv(dg))
        else:
            sys.stdout.write(barcode_to_csv(dg))
    elif a.cmd == "bottleneck":
        per, _ = diagram_set_distance(_read_diagrams(a.first), _read_diagrams(a.second))
        sys.stdout.write("degree,distance\n" + "".join(f"{k},{fmt(v)}\n" for k, v in enumerate(per)))
    elif a.cmd == "compare":
        D_X = distance_matrix_from_csv(Path(a.original).read_text())
        D_Y = distance_matrix_from_csv(Path(a.encoded).read_text())
        if D_X.shape != D_Y.shape:
            raise UsageError("distance matrices differ in size")
        report = compare_distance_matrices(D_X, D_Y, a.max_degree)
        sys.stdout.write("quantity,value\n" + "".join(f"{k},{fmt(v)}\n" for k, v in _table_rows(report)))
    elif a.cmd == "qmds":
        cfg = _config_from_args(a)
        res = run_qmds(cfg, a.hilbert_dim, a.qmds_seed, max_iter=a.max_iter)
        for k in ("surrogate_stress", "mean_residual", "iterations"):
            print(f"{k},{fmt(res.extra[k])}")
        print(f"fs_stress,{fmt(res.final_stress)}")
        print(f"distortion,{fmt(res.final_distortion)}")
    elif a.cmd == "pipeline":
        cfg = _config_from_args(a)
        report = run_pipeline(cfg)
        sys.stdout.write("quantity,value\n" + "".join(f"{k},{fmt(v)}\n" for k, v in _table_rows(report)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

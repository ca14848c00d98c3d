"""Topological evaluation of generative models.

For each repetition a batch ``Y1`` is drawn from the data and a batch ``Y2``
from the model; both are filtered with Vietoris-Rips complexes, their
persistence diagrams computed, and the bottleneck distance recorded per
homology dimension together with the maximum over dimensions. Repetition
``r`` uses the same data rows for every model evaluated with one config.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from topogen.bottleneck import bottleneck_distance
from topogen.errors import InputError
from topogen.genmodels import GenerativeModel, generate
from topogen.genmodels.config import parse_kv
from topogen.persistence import PersistenceDiagram, compute_persistence
from topogen.pointcloud import PointCloud, pairwise_distances
from topogen.rips import build_vietoris_rips, max_pairwise_distance

log = logging.getLogger("topogen.pipeline")

Z95 = 1.96
REPORT_HEADER = ["model", "dim", "mean", "lower", "upper", "reps", "batch"]
COMBINED = "max"


@dataclass
class EvalConfig:
    """Settings for repeated topological comparison.

    ``max_scale`` is either ``"diameter"`` (per repetition, the larger of the
    two batch diameters) or a fixed positive length.
    """

    m_topo: int = 128
    reps: int = 100
    max_scale: Union[str, float] = "diameter"
    dims: tuple[int, ...] = (0, 1)
    seed: int = 0
    max_dim: int = 2
    ci: str = "normal"
    bootstrap_samples: int = 2000
    min_effective: float = 0.8

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if isinstance(self.max_scale, str) and self.max_scale != "diameter":
            self.max_scale = float(self.max_scale)
        self.validate()

    def validate(self) -> None:
        if self.m_topo < 4:
            raise InputError("m_topo must be >= 4")
        if self.reps < 2:
            raise InputError("reps must be >= 2")
        if not self.dims or any(d not in (0, 1) for d in self.dims):
            raise InputError("dims must be a nonempty subset of {0, 1}")
        if self.max_dim not in (1, 2):
            raise InputError("max_dim must be 1 or 2")
        if self.max_scale != "diameter" and not (math.isfinite(self.max_scale) and self.max_scale > 0):
            raise InputError("max_scale must be 'diameter' or a positive length")
        if self.ci not in ("normal", "bootstrap"):
            raise InputError("ci must be 'normal' or 'bootstrap'")
        if not 0 < self.min_effective <= 1:
            raise InputError("min_effective must lie in (0, 1]")

    def to_items(self) -> list[tuple[str, str]]:
        scale = self.max_scale if self.max_scale == "diameter" else repr(float(self.max_scale))
        return [
            ("m_topo", str(self.m_topo)),
            ("reps", str(self.reps)),
            ("max_scale", scale),
            ("dims", ",".join(map(str, self.dims))),
            ("eval_seed", str(self.seed)),
            ("max_dim", str(self.max_dim)),
            ("ci", self.ci),
            ("bootstrap_samples", str(self.bootstrap_samples)),
            ("min_effective", repr(float(self.min_effective))),
        ]


# ---- batch sources ----

class ModelSource:
    """Draws ``Y2`` from a generative model."""

    def __init__(self, model: GenerativeModel, name: Optional[str] = None):
        self.model = model
        self.name = name or model.kind

    def sample(self, m: int, rng: np.random.Generator, y1: np.ndarray) -> np.ndarray:
        return generate(self.model, m, rng).points


class ResampleSource:
    """Draws ``Y2`` as a fresh batch of rows from a point cloud."""

    def __init__(self, cloud: PointCloud, name: str = "resample"):
        self.cloud = cloud
        self.name = name

    def sample(self, m: int, rng: np.random.Generator, y1: np.ndarray) -> np.ndarray:
        if m > self.cloud.n:
            raise InputError(f"topology batch {m} exceeds the {self.cloud.n} rows to resample")
        return self.cloud.points[rng.choice(self.cloud.n, size=m, replace=False)]


class IdentitySource:
    """``Y2 := Y1``; the distance must vanish."""

    name = "identity"

    def sample(self, m: int, rng: np.random.Generator, y1: np.ndarray) -> np.ndarray:
        return y1


class ConstantSource:
    """Every generated point equals ``point``."""

    def __init__(self, point, name: str = "constant"):
        self.point = np.asarray(point, dtype=np.float64).ravel()
        self.name = name

    def sample(self, m: int, rng: np.random.Generator, y1: np.ndarray) -> np.ndarray:
        return np.tile(self.point, (m, 1))


def as_source(model, name: Optional[str] = None):
    if isinstance(model, GenerativeModel):
        return ModelSource(model, name)
    if isinstance(model, PointCloud):
        return ResampleSource(model, name or "resample")
    if hasattr(model, "sample"):
        if name is not None:
            model.name = name
        return model
    raise InputError(f"cannot evaluate object of type {type(model).__name__}")


# ---- topology of one batch ----

def batch_diagram(points: np.ndarray, max_scale: float, max_dim: int = 2) -> PersistenceDiagram:
    dist = pairwise_distances(PointCloud(points))
    return compute_persistence(build_vietoris_rips(dist, max_scale, max_dim))


def diameter(points: np.ndarray) -> float:
    return max_pairwise_distance(pairwise_distances(PointCloud(points)))


def repetition_seeds(seed: int, reps: int) -> list[tuple[np.random.SeedSequence, np.random.SeedSequence]]:
    """Independent (data, model) seed pairs for each repetition."""
    return [tuple(child.spawn(2)) for child in np.random.SeedSequence(seed).spawn(reps)]


@dataclass
class _Rep:
    y1: np.ndarray
    diameter: float
    diagrams: dict = field(default_factory=dict)  # scale -> diagram


class DataBatches:
    """The ``Y1`` batches of one config, with diagrams cached per scale.

    Sharing one instance between models gives paired comparisons without
    recomputing the data diagrams.
    """

    def __init__(self, data: PointCloud, cfg: EvalConfig):
        if cfg.m_topo > data.n:
            raise InputError(f"m_topo {cfg.m_topo} exceeds the {data.n} data rows")
        self.cfg = cfg
        self.data = data
        self.seeds = repetition_seeds(cfg.seed, cfg.reps)
        self._reps: dict[int, _Rep] = {}

    def batch(self, r: int) -> _Rep:
        rep = self._reps.get(r)
        if rep is None:
            rng = np.random.default_rng(self.seeds[r][0])
            y1 = self.data.points[rng.choice(self.data.n, size=self.cfg.m_topo, replace=False)]
            rep = self._reps[r] = _Rep(y1, diameter(y1))
        return rep

    def diagram(self, r: int, scale: float) -> PersistenceDiagram:
        rep = self.batch(r)
        dgm = rep.diagrams.get(scale)
        if dgm is None:
            dgm = rep.diagrams[scale] = batch_diagram(rep.y1, scale, self.cfg.max_dim)
        return dgm


# ---- statistics ----

@dataclass(frozen=True)
class Interval:
    mean: float
    lower: float
    upper: float


def confidence_interval(values: Sequence[float], method: str = "normal", seed: int = 0,
                        samples: int = 2000) -> Interval:
    """95% interval for the mean of nonnegative ``values``.

    ``normal``: ``mean -+ 1.96 s / sqrt(R)`` with the sample standard deviation.
    ``bootstrap``: 2.5/97.5 percentiles of resampled means. Bounds are kept
    inside ``[0, inf)`` since distances are nonnegative.
    """
    v = np.asarray(values, dtype=np.float64)
    if len(v) < 2:
        raise InputError("a confidence interval needs at least 2 values")
    if np.isinf(v).any():
        return Interval(math.inf, math.inf, math.inf)
    mean = float(v.mean())
    if method == "normal":
        half = Z95 * float(v.std(ddof=1)) / math.sqrt(len(v))
        lo, hi = mean - half, mean + half
    elif method == "bootstrap":
        rng = np.random.default_rng(seed)
        means = v[rng.integers(0, len(v), size=(samples, len(v)))].mean(axis=1)
        lo, hi = (float(q) for q in np.percentile(means, [2.5, 97.5]))
        lo, hi = min(lo, mean), max(hi, mean)
    else:
        raise InputError(f"unknown interval method {method!r}")
    return Interval(mean, max(lo, 0.0), hi)


@dataclass
class EvalReport:
    """Per-dimension and combined bottleneck statistics of one model.

    ``distances`` has one row per effective repetition and one column per
    entry of ``dims`` followed by the combined (max over dims) column.
    """

    model: str
    dims: tuple[int, ...]
    stats: dict  # "0" / "1" / "max" -> Interval
    distances: np.ndarray
    reps_requested: int
    batch: int
    skipped: tuple[int, ...] = ()
    degenerate: int = 0

    @property
    def reps(self) -> int:
        return len(self.distances)

    @property
    def combined(self) -> Interval:
        return self.stats[COMBINED]

    def rows(self, keys: Optional[Sequence[str]] = None) -> list[list[str]]:
        keys = self.keys() if keys is None else keys
        return [[self.model, k, _num(self.stats[k].mean), _num(self.stats[k].lower),
                 _num(self.stats[k].upper), str(self.reps), str(self.batch)] for k in keys]

    def keys(self) -> list[str]:
        return [str(d) for d in self.dims] + [COMBINED]


def _num(v: float) -> str:
    return "inf" if math.isinf(v) else repr(float(v))


def evaluate(model, data: PointCloud, cfg: EvalConfig, name: Optional[str] = None,
             batches: Optional[DataBatches] = None) -> EvalReport:
    """Repeated bottleneck comparison of data batches against model batches.

    Args:
        model: a ``GenerativeModel``, a ``PointCloud`` to resample from, or
            any object with ``sample(m, rng, y1)`` (see ``IdentitySource``).
        data: the true point cloud.
        cfg: evaluation settings.
        name: label for the report row; defaults to the model kind.
        batches: shared ``Y1`` cache; pass the same one to pair several models.

    A batch whose points all coincide is logged and counted. A repetition
    is skipped only when both batches are degenerate, leaving nothing to
    compare; the run fails if fewer than
    ``cfg.min_effective * cfg.reps`` repetitions remain.
    """
    source = as_source(model, name)
    batches = DataBatches(data, cfg) if batches is None else batches
    if batches.cfg is not cfg and batches.cfg != cfg:
        raise InputError("shared batches were drawn under a different config")
    rows, skipped, degenerate = [], [], 0
    for r in range(cfg.reps):
        rep = batches.batch(r)
        y2 = np.asarray(source.sample(cfg.m_topo, np.random.default_rng(batches.seeds[r][1]), rep.y1),
                        dtype=np.float64)
        if y2.shape != rep.y1.shape:
            raise InputError(f"{source.name}: generated batch has shape {y2.shape}, "
                             f"expected {rep.y1.shape}")
        same = y2 is rep.y1
        d2 = rep.diameter if same else diameter(y2)
        degenerate += (rep.diameter == 0) + (d2 == 0)
        if rep.diameter == 0 and d2 == 0:
            log.warning("%s: repetition %d skipped, both batches degenerate", source.name, r)
            skipped.append(r)
            continue
        if rep.diameter == 0 or d2 == 0:
            log.warning("%s: repetition %d has a degenerate batch", source.name, r)
        # Past its own diameter a batch's 2-skeleton is complete and its
        # diagram no longer changes, so filtering each batch to its own
        # diameter equals filtering both to the larger one.
        s1 = rep.diameter if cfg.max_scale == "diameter" else float(cfg.max_scale)
        s2 = d2 if cfg.max_scale == "diameter" else float(cfg.max_scale)
        dg1 = batches.diagram(r, s1)
        dg2 = dg1 if same else batch_diagram(y2, s2, cfg.max_dim)
        per = [bottleneck_distance(dg1, dg2, dim=k) for k in cfg.dims]
        rows.append(per + [max(per)])
    need = math.ceil(cfg.min_effective * cfg.reps)
    if len(rows) < max(need, 2):
        raise InputError(f"{source.name}: only {len(rows)} of {cfg.reps} repetitions usable "
                         f"(need {max(need, 2)})")
    dist = np.array(rows, dtype=np.float64)
    keys = [str(k) for k in cfg.dims] + [COMBINED]
    stats = {k: confidence_interval(dist[:, i], cfg.ci, cfg.seed, cfg.bootstrap_samples)
             for i, k in enumerate(keys)}
    return EvalReport(source.name, cfg.dims, stats, dist, cfg.reps, cfg.m_topo, tuple(skipped), degenerate)


def compare_models(models: Sequence, data: PointCloud, cfg: EvalConfig,
                   names: Optional[Sequence[Optional[str]]] = None) -> list[EvalReport]:
    """Evaluate each model on the same data batches; ascending by combined mean.

    The sort is stable, so ties keep input order.
    """
    if len(models) < 2:
        raise InputError("compare_models needs at least 2 models")
    names = [None] * len(models) if names is None else list(names)
    batches = DataBatches(data, cfg)
    reports = [evaluate(m, data, cfg, n, batches) for m, n in zip(models, names)]
    return sorted(reports, key=lambda rep: rep.combined.mean)


# ---- report and manifest files ----

def format_report_csv(reports: Sequence[EvalReport], keys: Optional[Sequence[str]] = None) -> str:
    lines = [",".join(REPORT_HEADER)]
    for rep in reports:
        lines.extend(",".join(row) for row in rep.rows(keys))
    return "\n".join(lines) + "\n"


def write_report_csv(reports: Sequence[EvalReport], path, keys: Optional[Sequence[str]] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_report_csv(reports, keys))


def read_report_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REPORT_HEADER:
            raise InputError(f"{path}: unexpected report header {reader.fieldnames}")
        return list(reader)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def format_manifest(items: Sequence[tuple[str, str]]) -> str:
    out = []
    for key, value in items:
        value = str(value)
        if "\n" in value or "#" in value:
            raise InputError(f"manifest value for {key!r} may not contain newlines or '#'")
        out.append(f"{key} = {value}\n")
    return "".join(out)


def write_manifest(items: Sequence[tuple[str, str]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_manifest(items))


def read_manifest(path) -> dict[str, str]:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise InputError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return parse_kv(fh.read(), path)

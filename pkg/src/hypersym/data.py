"""Dataset ingestion, temporal link-prediction splits and negative k-set sampling.

Two on-disk formats are supported:

* simplex lists: ``<prefix>-nverts.txt`` (vertices per simplex),
  ``<prefix>-simplices.txt`` (flattened 1-based vertex ids) and
  ``<prefix>-times.txt`` (one timestamp per simplex), whitespace separated;
* JSON ``{"n": int, "edges": [[int, ...], ...], "timestamps": [num, ...]}``
  with 0-based ids and optional timestamps.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .core import Hypergraph

log = logging.getLogger(__name__)

EXACT_COUNT_LIMIT = 10**6
SPLITS = ("train", "val", "test")
SIMPLEX_SUFFIXES = ("-nverts.txt", "-simplices.txt", "-times.txt")

Source = Union[str, IO[str]]


class DataFormatError(ValueError):
    """Malformed dataset input."""


@dataclass(frozen=True)
class TemporalHypergraph:
    hypergraph: Hypergraph
    timestamps: np.ndarray
    dropped_small: int = 0
    merged_duplicates: int = 0
    synthetic_times: bool = False   # times were the listing order, not read from input

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=np.float64)
        if t.shape != (self.hypergraph.m,):
            raise DataFormatError(f"{t.size} timestamps for {self.hypergraph.m} hyperedges")
        if not np.all(np.isfinite(t)):
            raise DataFormatError("timestamps must be finite")
        t.setflags(write=False)
        object.__setattr__(self, "timestamps", t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemporalHypergraph):
            return NotImplemented
        return (self.hypergraph.n == other.hypergraph.n
                and dict(zip(self.hypergraph.edges, self.timestamps.tolist()))
                == dict(zip(other.hypergraph.edges, other.timestamps.tolist())))

    __hash__ = None  # type: ignore[assignment]


def from_edges(n: int, edges: Iterable[Iterable[int]], times: Iterable[float] | None = None) -> TemporalHypergraph:
    """Canonicalize timestamped hyperedges: singletons dropped, duplicates
    merged onto the earliest timestamp, first-appearance order kept."""
    first: dict[tuple[int, ...], float] = {}
    small = dup = 0
    edges = list(edges)
    synthetic = times is None
    times = range(len(edges)) if synthetic else list(times)
    if len(edges) != len(times):
        raise DataFormatError(f"{len(edges)} hyperedges but {len(times)} timestamps")
    for idx, (raw, t) in enumerate(zip(edges, times)):
        e = tuple(sorted(set(int(v) for v in raw)))
        if e and (e[0] < 0 or e[-1] >= n):
            raise DataFormatError(f"hyperedge {idx} {list(raw)} has a vertex outside [0, {n})")
        if len(e) < 2:
            small += 1
            continue
        t = float(t)
        if e in first:
            dup += 1
            first[e] = min(first[e], t)
        else:
            first[e] = t
    if small or dup:
        log.info("dropped %d singleton hyperedges, merged %d duplicates", small, dup)
    return TemporalHypergraph(Hypergraph(n, list(first)), np.array(list(first.values()), dtype=np.float64),
                              dropped_small=small, merged_duplicates=dup, synthetic_times=synthetic)


def _read(src: Source) -> str:
    return src if isinstance(src, str) else src.read()


def _tokens(src: Source, kind: type, what: str) -> list:
    out = []
    for tok in _read(src).split():
        try:
            out.append(int(tok) if kind is int else float(tok))
        except ValueError:
            raise DataFormatError(f"non-numeric token {tok!r} in {what}") from None
    return out


def parse_simplex_list(nverts: Source, simplices: Source, times: Source) -> TemporalHypergraph:
    """Parse the three aligned simplex-list streams (1-based vertex ids).

    Vertex ``i`` becomes ``i - 1``; ``n`` is the largest id seen.
    """
    counts = _tokens(nverts, int, "nverts")
    flat = _tokens(simplices, int, "simplices")
    stamps = _tokens(times, float, "times")
    if any(c < 0 for c in counts):
        raise DataFormatError("negative simplex size in nverts")
    if sum(counts) != len(flat):
        raise DataFormatError(f"nverts declares {sum(counts)} vertex ids, simplices holds {len(flat)}")
    if len(stamps) != len(counts):
        raise DataFormatError(f"{len(counts)} simplices but {len(stamps)} timestamps")
    if flat and min(flat) < 1:
        raise DataFormatError("simplex vertex ids must be 1-based positive integers")
    bounds = np.concatenate([[0], np.cumsum(counts, dtype=np.int64)])
    edges = [[v - 1 for v in flat[bounds[i]:bounds[i + 1]]] for i in range(len(counts))]
    return from_edges(max(flat, default=0), edges, stamps)


def emit_simplex_list(th: TemporalHypergraph) -> tuple[str, str, str]:
    """Inverse of :func:`parse_simplex_list` (one token per line)."""
    h = th.hypergraph
    nverts = "".join(f"{len(e)}\n" for e in h.edges)
    simplices = "".join(f"{v + 1}\n" for e in h.edges for v in e)
    times = "".join(f"{t!r}\n" for t in th.timestamps.tolist())
    return nverts, simplices, times


def simplex_paths(prefix: str | Path) -> tuple[Path, Path, Path]:
    a, b, c = (Path(f"{prefix}{s}") for s in SIMPLEX_SUFFIXES)
    return a, b, c


def read_simplex_files(prefix: str | Path) -> TemporalHypergraph:
    a, b, c = (path.read_text() for path in simplex_paths(prefix))
    return parse_simplex_list(a, b, c)


def write_simplex_files(th: TemporalHypergraph, prefix: str | Path) -> None:
    for path, text in zip(simplex_paths(prefix), emit_simplex_list(th)):
        path.write_text(text)


def from_json_obj(obj: dict) -> TemporalHypergraph:
    """Hypergraph from the plain JSON layout. Without timestamps the hyperedges
    get integer times in the order listed."""
    try:
        n = int(obj["n"])
        edges = [list(map(int, e)) for e in obj["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"expected {{'n': int, 'edges': [[int, ...], ...]}}: {exc}") from None
    return from_edges(n, edges, obj.get("timestamps"))


def to_json_obj(th: TemporalHypergraph) -> dict:
    out = {"n": th.hypergraph.n, "edges": [list(e) for e in th.hypergraph.edges]}
    if not th.synthetic_times:
        out["timestamps"] = th.timestamps.tolist()
    return out


def resolve_format(path: str | Path, fmt: str = "auto") -> str:
    """``auto``: ``.json`` files and other existing files are JSON, anything else a simplex-list prefix."""
    if fmt != "auto":
        return fmt
    path = Path(path)
    if path.suffix == ".json":
        return "json"
    simplex = not path.is_file() or path.name.endswith(SIMPLEX_SUFFIXES)
    return "simplex" if simplex else "json"


def load(path: str | Path, fmt: str = "auto") -> TemporalHypergraph:
    """Load ``path`` as JSON or as a simplex-list prefix (``fmt`` in auto/json/simplex)."""
    path = Path(path)
    fmt = resolve_format(path, fmt)
    if fmt == "json":
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}: invalid JSON ({exc})") from None
        return from_json_obj(obj)
    if fmt == "simplex":
        prefix = str(path)
        for suffix in SIMPLEX_SUFFIXES:
            if prefix.endswith(suffix):
                prefix = prefix[: -len(suffix)]
        return read_simplex_files(prefix)
    raise ValueError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------- splits

@dataclass(frozen=True)
class SplitSpec:
    train_pct: float = 0.80
    val_pct: float = 0.85
    target_size: int = 3
    negative_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_pct < self.val_pct <= 1.0:
            raise ValueError("need 0 < train_pct < val_pct <= 1")
        if self.target_size < 2:
            raise ValueError("target_size must be at least 2")
        if self.negative_ratio < 0:
            raise ValueError("negative_ratio must be non-negative")


@dataclass(frozen=True)
class SplitPart:
    observed: list[tuple[int, ...]]
    positives: list[tuple[int, ...]]
    negatives: list[tuple[int, ...]]
    shortfall: int = 0

    def to_dict(self) -> dict:
        return {"observed": [list(e) for e in self.observed],
                "positives": [list(e) for e in self.positives],
                "negatives": [list(e) for e in self.negatives]}


@dataclass(frozen=True)
class LinkPredictionSplit:
    train: SplitPart
    val: SplitPart
    test: SplitPart
    thresholds: tuple[float, float]
    spec: SplitSpec

    def parts(self) -> dict[str, SplitPart]:
        return {"train": self.train, "val": self.val, "test": self.test}

    def to_dict(self) -> dict:
        out = {k: v.to_dict() for k, v in self.parts().items()}
        out["meta"] = {"train_threshold": self.thresholds[0], "val_threshold": self.thresholds[1],
                       "target_size": self.spec.target_size, "negative_ratio": self.spec.negative_ratio,
                       "seed": self.spec.seed,
                       "shortfall": {k: v.shortfall for k, v in self.parts().items()}}
        return out


def nearest_rank(values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile: the ``ceil(pct * N)``-th smallest value."""
    s = sorted(values)
    if not s:
        raise ValueError("percentile of an empty sequence")
    # round first so 0.85 * 20 does not become 17.000000000000004
    rank = min(max(math.ceil(round(pct * len(s), 9)), 1), len(s))
    return s[rank - 1]


def split_labels(times: np.ndarray, spec: SplitSpec) -> tuple[np.ndarray, float, float]:
    """0/1/2 per hyperedge for train/val/test, plus the two thresholds."""
    t80 = nearest_rank(times.tolist(), spec.train_pct)
    t85 = nearest_rank(times.tolist(), spec.val_pct)
    labels = np.where(times <= t80, 0, np.where(times <= t85, 1, 2))
    return labels, t80, t85


def temporal_split(th: TemporalHypergraph, spec: SplitSpec = SplitSpec()) -> LinkPredictionSplit:
    """Partition hyperedges by time, then hold out half of each part's
    size-``k`` hyperedges as positives and sample as many negatives."""
    h = th.hypergraph
    if h.m == 0:
        raise ValueError("temporal_split needs at least one hyperedge")
    labels, t80, t85 = split_labels(th.timestamps, spec)
    streams = np.random.SeedSequence(spec.seed).spawn(2 * len(SPLITS))
    parts = []
    for j, name in enumerate(SPLITS):
        ids = np.flatnonzero(labels == j)
        target = [int(e) for e in ids if len(h.edges[e]) == spec.target_size]
        order = np.random.default_rng(streams[2 * j]).permutation(len(target))
        held = {target[i] for i in order[: len(target) // 2].tolist()}
        positives = [h.edges[e] for e in sorted(held)]
        observed = [h.edges[e] for e in ids.tolist() if e not in held]
        want = int(round(spec.negative_ratio * len(positives)))
        neg = negative_sample(h, spec.target_size, want, streams[2 * j + 1]) if want else NegativeSamples([], 0)
        if not positives:
            log.info("split %s has no size-%d positives", name, spec.target_size)
        parts.append(SplitPart(observed, positives, neg.sets, neg.shortfall))
    return LinkPredictionSplit(*parts, thresholds=(t80, t85), spec=spec)


# --------------------------------------------------------------------------- negatives

@dataclass(frozen=True)
class NegativeSamples:
    sets: list[tuple[int, ...]]
    shortfall: int
    available: int | None = field(default=None)


def negative_sample(h: Hypergraph, k: int, count: int, seed) -> NegativeSamples:
    """``count`` distinct uniformly random k-subsets of the vertices that are
    not hyperedges of ``h``.

    When ``C(n, k) <= 10**6`` the number of valid sets is known exactly and a
    request at or above it returns every valid set. Otherwise rejection
    sampling runs under a budget and an exhausted budget is a shortfall.
    """
    if not 1 <= k <= h.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={h.n}")
    if count < 0:
        raise ValueError("count must be non-negative")
    existing = {e for e in h.edges if len(e) == k}
    rng = np.random.default_rng(seed)
    total = math.comb(h.n, k)
    available = total - len(existing) if total <= EXACT_COUNT_LIMIT else None
    if available is not None and count >= available:
        sets = [c for c in combinations(range(h.n), k) if c not in existing]
        if count > available:
            log.warning("only %d valid negative %d-sets exist, %d requested", available, k, count)
        return NegativeSamples(sets, count - available, available)
    chosen: dict[tuple[int, ...], None] = {}
    budget = max(10_000, 100 * count)
    for _ in range(budget):
        if len(chosen) == count:
            break
        s = tuple(sorted(rng.choice(h.n, size=k, replace=False).tolist()))
        if s not in existing:
            chosen.setdefault(s)
    shortfall = count - len(chosen)
    if shortfall:
        log.warning("rejection budget exhausted: %d of %d negatives found", len(chosen), count)
    return NegativeSamples(list(chosen), shortfall, available)


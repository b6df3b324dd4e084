"""String-keyed configuration of a clustering run.

A :class:`ParamSet` is an ordered list of ``key=value`` pairs such as::

    algorithm=kmeans
    kmeans.k=10
    kmeans.variant=sort

:func:`build_algorithm` validates it against the schema of the chosen
algorithm, fills in defaults and returns an immutable :class:`RunSpec`;
:func:`execute` runs it on a dataset.
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from .core import Clustering, Metric, as_points
from .extraction import cut_by_height, cut_by_k, extract_with_noise
from .hac import MINIMAX_ACCELERATIONS, condensed_matrix, run_agnes, run_anderberg, run_minimax, run_nnchain, run_slink
from .initialization import KINDS as INIT_KINDS, initial_means, initial_medoids
from .io import parse_int_range
from .kmeans import VARIANTS, KMeansConfig, run_kmeans
from .kmedoids import pam_build, pam_swap, run_clara, run_clarans, run_park
from .linkage import LinkageScheme
from .rng import derive_seed, make_rng

ALGORITHMS = ("agnes", "anderberg", "nnchain", "slink", "minimax", "kmeans", "kmedoids", "clara", "clarans")
HAC_ALGORITHMS = ALGORITHMS[:5]
MEDOID_ALGOS = ("pam", "reynolds", "fastpam1", "fastpam", "park")
_KEY = re.compile(r"^[a-z][a-z0-9_]*(\.[a-z][a-z0-9_]*)*$")


class ConfigError(ValueError):
    pass


class ParamSet:
    """Ordered ``(key, value)`` text pairs; a repeated key keeps its last value."""

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        self._values: dict[str, str] = {}
        for key, value in pairs:
            self.set(key, value)

    @classmethod
    def parse(cls, items: Iterable[str]) -> "ParamSet":
        pairs = []
        for item in items:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"expected key=value, got {item!r}")
            pairs.append((key.strip(), value.strip()))
        return cls(pairs)

    def set(self, key: str, value) -> "ParamSet":
        if not _KEY.match(key):
            raise ConfigError(f"invalid parameter key {key!r}")
        if key in self._values:
            warnings.warn(f"parameter {key} given twice; using {value!r}", UserWarning, stacklevel=2)
            del self._values[key]
        self._values[key] = str(value)
        return self

    def get(self, key: str) -> Optional[str]:
        return self._values.get(key)

    def items(self):
        return list(self._values.items())

    def __contains__(self, key):
        return key in self._values


# --- value types -------------------------------------------------------------

def _integer(low: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise ConfigError(f"expected an integer, got {text!r}") from None
        if value < low:
            raise ConfigError(f"expected an integer >= {low}, got {value}")
        return value
    return parse


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def _flag(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected true or false, got {text!r}")


def _choice(options):
    def parse(text: str) -> str:
        if text not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


def _krange(text: str) -> tuple[int, ...]:
    try:
        return parse_int_range(text)
    except ValueError as exc:
        raise ConfigError(f"bad k value {text!r}: {exc}") from None


def _linkage(text: str) -> str:
    try:
        return LinkageScheme(text).kind
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _metric(text: str) -> str:
    try:
        return Metric.parse(text).value
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _neighbors(text: str):
    if "." in text:
        value = _real(text)
        if not 0 < value < 1:
            raise ConfigError(f"fractional maxneighbor must be in (0, 1), got {value}")
        return value
    return _integer(0)(text)


_REQUIRED = object()
_HAC_CUT = {
    "hac.k": (_krange, None),
    "hac.height": (_real, None),
    "hac.minsize": (_integer(1), None),
}
_MEDOID_METRIC = {"metric": (_metric, "euclidean")}


def _prefixed(prefix, schema):
    return {f"{prefix}.{key}": spec for key, spec in schema.items()}


SCHEMAS: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    **{
        name: {
            "hac.linkage": (_linkage, "single" if name == "slink" else "ward"),
            "hac.beta": (_real, None),
            "hac.metric": (_metric, None),
            **_HAC_CUT,
        }
        for name in ("agnes", "anderberg", "nnchain", "slink")
    },
    "minimax": {
        "hac.metric": (_metric, "euclidean"),
        "hac.accel": (_choice(MINIMAX_ACCELERATIONS), "nnchain"),
        **_HAC_CUT,
    },
    "kmeans": {
        "kmeans.k": (_krange, _REQUIRED),
        "kmeans.variant": (_choice(VARIANTS), "lloyd"),
        "kmeans.maxiter": (_integer(0), 0),
        "kmeans.init": (_choice(INIT_KINDS[:-1]), "kmeanspp"),
        "kmeans.rate": (_real, 0.05),
    },
    "kmedoids": _prefixed("kmedoids", {
        "k": (_krange, _REQUIRED),
        "algo": (_choice(MEDOID_ALGOS), "fastpam"),
        "init": (_choice([k for k in INIT_KINDS if k not in ("uniform_generated", "normal_generated", "predefined")]),
                 "pam_build"),
        "maxiter": (_integer(0), 0),
        "tolerance": (_real, 1.0),
        **_MEDOID_METRIC,
    }),
    "clara": _prefixed("clara", {
        "k": (_krange, _REQUIRED),
        "numsamples": (_integer(1), 5),
        "samplesize": (_integer(1), None),
        "fast": (_flag, False),
        "keep_best": (_flag, True),
        **_MEDOID_METRIC,
    }),
    "clarans": _prefixed("clarans", {
        "k": (_krange, _REQUIRED),
        "numlocal": (_integer(1), 2),
        "maxneighbor": (_neighbors, None),
        "fast": (_flag, False),
        **_MEDOID_METRIC,
    }),
}


@dataclass(frozen=True)
class RunSpec:
    """Validated, defaulted run description; equal inputs give equal specs."""

    algorithm: str
    seed: int
    options: tuple  # sorted (key, value) pairs, every schema key present

    def __getitem__(self, key: str):
        for name, value in self.options:
            if name == key:
                return value
        raise KeyError(key)

    @property
    def ks(self) -> Optional[tuple[int, ...]]:
        """The requested cluster counts, or ``None`` for a height cut."""
        for name, value in self.options:
            if name.endswith(".k"):
                return value
        return None


def build_algorithm(params: "ParamSet | Iterable[tuple[str, str]]") -> RunSpec:
    p = params if isinstance(params, ParamSet) else ParamSet(params)
    algorithm = p.get("algorithm")
    if algorithm is None:
        raise ConfigError(f"missing algorithm (valid: {', '.join(ALGORITHMS)})")
    if algorithm not in SCHEMAS:
        raise ConfigError(f"unknown algorithm {algorithm!r} (valid: {', '.join(ALGORITHMS)})")
    schema = SCHEMAS[algorithm]
    unknown = [key for key, _ in p.items() if key not in schema and key not in ("algorithm", "seed")]
    if unknown:
        valid = ", ".join(["algorithm", "seed", *schema])
        raise ConfigError(f"unknown parameter {unknown[0]} for {algorithm} (valid: {valid})")
    seed = _integer(0)(p.get("seed")) if "seed" in p else 0
    options = {}
    for key, (parse, default) in schema.items():
        text = p.get(key)
        if text is None:
            if default is _REQUIRED:
                raise ConfigError(f"missing {key}")
            options[key] = default
        else:
            try:
                options[key] = parse(text)
            except ConfigError as exc:
                raise ConfigError(f"{key}: {exc}") from None
    if algorithm in HAC_ALGORITHMS:
        _check_hac(algorithm, options)
    return RunSpec(algorithm, seed, tuple(sorted(options.items())))


def _check_hac(algorithm, options):
    if algorithm != "minimax":
        kind = options["hac.linkage"]
        if algorithm == "slink" and kind != "single":
            raise ConfigError("slink computes single linkage only")
        beta = options["hac.beta"]
        if beta is not None and kind != "flexible_beta":
            raise ConfigError("hac.beta only applies to flexible_beta")
        linkage = LinkageScheme(kind, beta)
        wanted = "squared_euclidean" if linkage.squared_input_expected else "euclidean"
        if options["hac.metric"] is None:
            options["hac.metric"] = wanted
        elif linkage.squared_input_expected and options["hac.metric"] != wanted:
            raise ConfigError(f"{kind} linkage expects hac.metric=squared_euclidean")
        if algorithm == "nnchain" and not linkage.reducible:
            raise ConfigError(f"nnchain requires a reducible linkage, {linkage} is not")
    cuts = [key for key in _HAC_CUT if options[key] is not None]
    if "hac.height" in cuts and len(cuts) > 1:
        raise ConfigError("hac.height cannot be combined with hac.k or hac.minsize")
    if options["hac.minsize"] is not None and options["hac.k"] is None:
        raise ConfigError("hac.minsize requires hac.k")


def run_seed(spec: RunSpec, k: Optional[int]) -> int:
    """Seed of the run for one k; independent runs never share a stream."""
    return derive_seed(spec.seed, 0 if k is None else k)


def execute(spec: RunSpec, data, k: Optional[int] = None) -> Clustering:
    """Run ``spec`` for one cluster count (from ``spec.ks`` unless given)."""
    x = as_points(data)
    if k is None and spec.ks is not None:
        if len(spec.ks) != 1:
            raise ConfigError("several k values requested; pass k explicitly")
        k = spec.ks[0]
    rng = make_rng(run_seed(spec, k))
    algo = spec.algorithm
    if algo in HAC_ALGORITHMS:
        return _execute_hac(spec, x, k)
    if algo == "kmeans":
        cfg = KMeansConfig(k, spec["kmeans.variant"], spec["kmeans.maxiter"], spec["kmeans.rate"])
        centers = initial_means(spec["kmeans.init"], x, k, rng)
        return run_kmeans(x, cfg, centers).clustering
    if algo == "kmedoids":
        metric = spec["kmedoids.metric"]
        m = condensed_matrix(x, metric)
        method = spec["kmedoids.algo"]
        if spec["kmedoids.init"] == "pam_build":
            start = list(pam_build(m, k).medoids)
        else:
            start = initial_medoids(spec["kmedoids.init"], x, k, rng, metric)
        if method == "park":
            return run_park(m, k, start, spec["kmedoids.maxiter"]).clustering
        return pam_swap(m, start, method, tolerance=spec["kmedoids.tolerance"],
                        maxiter=spec["kmedoids.maxiter"]).clustering
    if algo == "clara":
        return run_clara(x, k, numsamples=spec["clara.numsamples"], samplesize=spec["clara.samplesize"],
                         fast=spec["clara.fast"], keep_best=spec["clara.keep_best"], seed=rng,
                         metric=spec["clara.metric"]).clustering
    m = condensed_matrix(x, spec["clarans.metric"])
    return run_clarans(m, k, numlocal=spec["clarans.numlocal"], maxneighbor=spec["clarans.maxneighbor"],
                       fast=spec["clarans.fast"], seed=rng).clustering


def _execute_hac(spec, x, k):
    if k is None and spec["hac.height"] is None:
        raise ConfigError("hierarchical runs need hac.k or hac.height to produce a flat clustering")
    m = condensed_matrix(x, spec["hac.metric"])
    algo = spec.algorithm
    if algo == "minimax":
        history = run_minimax(m, spec["hac.accel"])
    elif algo == "slink":
        history = run_slink(m)
    else:
        linkage = LinkageScheme(spec["hac.linkage"], spec["hac.beta"])
        history = {"agnes": run_agnes, "anderberg": run_anderberg, "nnchain": run_nnchain}[algo](m, linkage)
    if spec["hac.height"] is not None:
        return cut_by_height(history, spec["hac.height"])
    if spec["hac.minsize"] is not None:
        return extract_with_noise(history, k, spec["hac.minsize"])
    return cut_by_k(history, k)

"""Parameter grids, sweep evaluation and figure tables."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .chernoff_engine import chernoff_bound, m_copy_curve, m_copy_error_bound, quantum_advantage
from .constants import FIGURE_DEFAULTS, FIGURE_LOG10_M, PROBES
from .errors import ParameterError
from .target_model import ProbeSpec, TargetParams

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("probe", "r", "kappa", "nbar", "Ns", "s_opt", "q", "half_q", "M", "half_q_M")
FORMATS = ("csv", "json")


def parse_grid(value):
    """Grid from ``"a,b,c"``, ``"start:stop:count"``, a number or a list of numbers."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),)
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    text = str(value).strip()
    if not text:
        raise ParameterError("grid must not be empty.")
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            count = int(count)
            if count < 1:
                raise ParameterError(f"grid count must be positive, got {count}.")
            return tuple(float(v) for v in np.linspace(float(start), float(stop), count))
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ParameterError(f"grid must be 'a,b,c' or 'start:stop:count', got {text!r}.") from exc


@dataclass(frozen=True)
class SweepConfig:
    probes: tuple = ("coherent",)
    r: tuple = (0.0,)
    kappa: tuple = (0.01,)
    nbar: tuple = (1.0,)
    ns: tuple = (0.5,)
    m: int = 1
    out: str = None
    fmt: str = "csv"
    workers: int = 1

    def __post_init__(self):
        probes = (self.probes,) if isinstance(self.probes, str) else tuple(self.probes)
        object.__setattr__(self, "probes", probes)
        for name in ("r", "kappa", "nbar", "ns"):
            object.__setattr__(self, name, parse_grid(getattr(self, name)))
        for name in ("probes", "r", "kappa", "nbar", "ns"):
            if not getattr(self, name):
                raise ParameterError(f"{name} grid must not be empty.")
        for probe in self.probes:
            if probe not in PROBES:
                raise ParameterError(f"probe must be one of {PROBES}, got {probe!r}.")
        for r in self.r:
            for kappa in self.kappa:
                for nbar in self.nbar:
                    TargetParams(r, kappa, nbar)
        for ns in self.ns:
            if ns < 0.0:
                raise ParameterError(f"ns must be non-negative, got {ns}.")
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m!r}.")
        if self.fmt not in FORMATS:
            raise ParameterError(f"format must be one of {FORMATS}, got {self.fmt!r}.")
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise ParameterError(f"workers must be a positive integer, got {self.workers!r}.")

    @classmethod
    def from_mapping(cls, mapping, **overrides):
        """Config from a JSON mapping; non-None ``overrides`` win over file values."""
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(mapping) - known
        if unknown:
            raise ParameterError(f"Unknown sweep config keys: {sorted(unknown)}.")
        values = dict(mapping)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def points(self):
        """Grid points in lexicographic order over (probe, r, kappa, nbar, ns)."""
        return [
            (probe, r, kappa, nbar, ns)
            for probe in self.probes
            for r in self.r
            for kappa in self.kappa
            for nbar in self.nbar
            for ns in self.ns
        ]


def parallel_map(fn, items, workers):
    """``map`` over ``items``, in order, with a process pool when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def chernoff_row(point, m=1):
    probe, r, kappa, nbar, ns = point
    result = chernoff_bound(ProbeSpec.from_name(probe, ns), TargetParams(r, kappa, nbar))
    return {
        "probe": probe, "r": r, "kappa": kappa, "nbar": nbar, "Ns": ns,
        "s_opt": result.s_opt, "q": result.q, "half_q": result.half_q,
        "at_boundary": result.at_boundary,
        "M": m, "half_q_M": m_copy_error_bound(result.q, m),
    }


def _sweep_row(args):
    point, m = args
    return chernoff_row(point, m)


def run_sweep(config):
    points = config.points()
    logger.info("Sweeping %d grid points with %d worker(s)", len(points), config.workers)
    return parallel_map(_sweep_row, [(p, config.m) for p in points], config.workers)


# --- Figures ---

@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    ns: float
    kappa: float
    nbar: tuple
    r: tuple
    m: int = 10
    log10_m: tuple = field(default=FIGURE_LOG10_M)

    def __post_init__(self):
        if self.figure_id not in FIGURE_DEFAULTS:
            raise ParameterError(
                f"figure must be one of {sorted(FIGURE_DEFAULTS)}, got {self.figure_id!r}."
            )
        object.__setattr__(self, "nbar", parse_grid(self.nbar))
        object.__setattr__(self, "r", parse_grid(self.r))
        if not self.nbar or not self.r:
            raise ParameterError("Figure grids must not be empty.")
        for r in self.r:
            for nbar in self.nbar:
                TargetParams(r, self.kappa, nbar)
        if self.ns < 0.0:
            raise ParameterError(f"ns must be non-negative, got {self.ns}.")
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m!r}.")
        start, stop, count = self.log10_m
        if start < 0.0 or stop < start or count < 1:
            raise ParameterError(f"log10_m must be (start >= 0, stop >= start, count >= 1), got {self.log10_m}.")

    @classmethod
    def defaults(cls, figure_id, **overrides):
        """Default parameters for ``figure_id``; non-None ``overrides`` replace them."""
        if figure_id not in FIGURE_DEFAULTS:
            raise ParameterError(
                f"figure must be one of {sorted(FIGURE_DEFAULTS)}, got {figure_id!r}."
            )
        base = dict(FIGURE_DEFAULTS[figure_id])
        spec = cls(figure_id, base["ns"], base["kappa"], base["nbar"], base["r"], base.get("m", 10))
        return replace(spec, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def columns(self):
        if self.figure_id == "fig2":
            return ("r", "probe", "nbar", "s_opt", "half_q")
        if self.figure_id == "fig3a":
            return ("r", "nbar", f"half_delta_{self.m}")
        return ("log10_M", "probe", "nbar", "r", "log10_half_qM")

    def metadata(self):
        meta = {
            "figure": self.figure_id,
            "ns": self.ns,
            "kappa": self.kappa,
            "nbar": list(self.nbar),
            "r": list(self.r),
            "columns": list(self.columns),
        }
        if self.figure_id == "fig3a":
            meta["m"] = self.m
        if self.figure_id in ("fig3b", "fig3c"):
            meta["log10_m"] = list(self.log10_m)
            meta["note"] = "M is log-spaced over 10**log10_m; the range is a default, not a fitted value."
        return meta


def _advantage_row(args):
    r, kappa, nbar, ns, m = args
    result = quantum_advantage(TargetParams(r, kappa, nbar), ns, m)
    return {"r": r, "nbar": nbar, f"half_delta_{m}": result.half_delta}


def figure_rows(spec, workers=1):
    if spec.figure_id == "fig2":
        points = [(probe, r, spec.kappa, nbar, spec.ns)
                  for probe in PROBES for nbar in spec.nbar for r in spec.r]
        rows = parallel_map(chernoff_row, points, workers)
        return [{c: row[c] for c in spec.columns} for row in rows]

    if spec.figure_id == "fig3a":
        items = [(r, spec.kappa, nbar, spec.ns, spec.m) for nbar in spec.nbar for r in spec.r]
        return parallel_map(_advantage_row, items, workers)

    log10_m = np.linspace(*spec.log10_m[:2], int(spec.log10_m[2]))
    points = [(probe, r, spec.kappa, nbar, spec.ns)
              for probe in PROBES for nbar in spec.nbar for r in spec.r]
    rows = []
    for row in parallel_map(chernoff_row, points, workers):
        curve = m_copy_curve(row["q"], 10.0 ** log10_m)
        rows.extend(
            {"log10_M": float(x), "probe": row["probe"], "nbar": row["nbar"], "r": row["r"],
             "log10_half_qM": float(y)}
            for x, y in zip(log10_m, curve)
        )
    return rows

"""Grid-backed scalar functions on [u_min, u_max] with declared tails.

A GridFunction interpolates monotone-cubically (PCHIP) between its nodes,
optionally defers to an exact evaluator when one is known, and extends past
the last node through an explicit tail model. Cumulative integrals come in
three flavours:

* A(u): from the left edge up to u,
* B(u): from u out to infinity (tail handled in closed form),
* F: the full mass.

A, B and F share one set of per-interval panel integrals and are rebuilt
with exactly-rounded summation, so A + B = F holds to a couple of ulps and
B at the first node is bit-identical to F. Downstream boundary identities
lean on that.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .quadrature import integrate
from .special import _upper_gamma_real_eta

__all__ = [
    "ExponentialTail",
    "ZeroTail",
    "ConstantTail",
    "Tail",
    "TailFitError",
    "TailModelError",
    "GridFunction",
    "default_grid",
    "cumulative",
]


class TailFitError(RuntimeError):
    """The tail window does not look like a decaying exponential."""


class TailModelError(ValueError):
    """The declared tail cannot support the requested operation."""


@dataclass(frozen=True)
class ExponentialTail:
    """f(u) ~ coef * u^power * e^{-rate*u} beyond the last node.

    ``coef=None`` means "match the last grid value" (continuity fit).
    """

    rate: float
    power: float = 0.0
    coef: float | None = None


@dataclass(frozen=True)
class ZeroTail:
    """Identically zero beyond the last node."""


@dataclass(frozen=True)
class ConstantTail:
    """Constant ``level`` beyond the last node (not integrable unless 0)."""

    level: float


Tail = Union[ExponentialTail, ZeroTail, ConstantTail]


def _tail_to_json(tail: Tail | None) -> dict | None:
    if tail is None:
        return None
    if isinstance(tail, ExponentialTail):
        return {"kind": "Exponential", "rate": tail.rate,
                "power": tail.power, "coef": tail.coef}
    if isinstance(tail, ZeroTail):
        return {"kind": "Zero"}
    if isinstance(tail, ConstantTail):
        return {"kind": "Constant", "level": tail.level}
    raise TypeError(f"unknown tail {tail!r}")


def _tail_from_json(data: dict | None) -> Tail | None:
    if data is None:
        return None
    kind = data.get("kind")
    if kind == "Exponential":
        return ExponentialTail(rate=float(data["rate"]),
                               power=float(data.get("power", 0.0)),
                               coef=data.get("coef"))
    if kind == "Zero":
        return ZeroTail()
    if kind == "Constant":
        return ConstantTail(level=float(data["level"]))
    raise TailModelError(f"unknown tail kind {kind!r}")


@dataclass(frozen=True)
class GridFunction:
    """Scalar function sampled on an ascending grid.

    Attributes:
        nodes: strictly increasing sample points.
        values: samples, same length as nodes.
        tail: behaviour beyond the last node (None = refuse to extrapolate).
        exact: optional vectorized ground-truth evaluator; when present it
            is preferred over interpolation everywhere it is finite.
        meta: free-form metadata, carried through CSV round-trips.
    """

    nodes: np.ndarray
    values: np.ndarray
    tail: Tail | None = None
    exact: Callable | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("GridFunction needs at least two nodes")
        if values.shape != nodes.shape:
            raise ValueError("nodes and values must have matching shapes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @cached_property
    def _interp(self) -> PchipInterpolator:
        return PchipInterpolator(self.nodes, self.values, extrapolate=False)

    @cached_property
    def _tail_coef(self) -> float:
        tail = self.tail
        if not isinstance(tail, ExponentialTail):
            raise TailModelError("tail coefficient only defined for Exponential")
        if tail.coef is not None:
            return tail.coef
        u_n = self.nodes[-1]
        base = u_n ** tail.power * math.exp(-tail.rate * u_n)
        if base == 0.0:
            return 0.0
        return float(self.values[-1]) / base

    def _tail_eval(self, u: np.ndarray) -> np.ndarray:
        tail = self.tail
        if tail is None:
            raise TailModelError(
                f"evaluation past the last node {self.nodes[-1]:.6g} needs a "
                "tail model")
        if isinstance(tail, ZeroTail):
            return np.zeros_like(u)
        if isinstance(tail, ConstantTail):
            return np.full_like(u, tail.level)
        with np.errstate(over="ignore", under="ignore"):
            return self._tail_coef * u**tail.power * np.exp(-tail.rate * u)

    def __call__(self, u):
        scalar = np.ndim(u) == 0
        uu = np.atleast_1d(np.asarray(u, dtype=float))
        if self.exact is not None:
            out = np.asarray(self.exact(uu), dtype=float)
            return float(out[0]) if scalar else out
        lo, hi = self.nodes[0], self.nodes[-1]
        if np.any(uu < lo - 1e-12 * max(1.0, abs(lo))):
            raise ValueError(
                f"evaluation below the first node {lo:.6g} requested")
        out = np.empty_like(uu)
        inside = uu <= hi
        if np.any(inside):
            out[inside] = self._interp(np.clip(uu[inside], lo, hi))
        if np.any(~inside):
            out[~inside] = self._tail_eval(uu[~inside])
        return float(out[0]) if scalar else out

    def derivative(self, u, k: int = 1):
        """k-th derivative of the interpolant (interior only)."""
        scalar = np.ndim(u) == 0
        uu = np.clip(np.atleast_1d(np.asarray(u, dtype=float)),
                     self.nodes[0], self.nodes[-1])
        out = self._interp.derivative(k)(uu)
        return float(out[0]) if scalar else out

    # -- tail fitting ------------------------------------------------------

    def fit_tail(self, fraction: float = 0.1) -> "GridFunction":
        """Fit an ExponentialTail on the last ``fraction`` of the grid.

        Linear least squares on log|f| = log K + power*log u - rate*u.
        Refuses (TailFitError) when the implied rate is not positive or the
        window changes sign.
        """
        n_win = max(4, int(len(self.nodes) * fraction))
        u = self.nodes[-n_win:]
        v = self.values[-n_win:]
        if np.all(v == 0.0):
            return GridFunction(self.nodes, self.values, tail=ZeroTail(),
                                exact=self.exact, meta=self.meta)
        sign = np.sign(v[np.argmax(np.abs(v))])
        if np.any(sign * v <= 0.0):
            raise TailFitError("tail window changes sign; no exponential fit")
        y = np.log(sign * v)
        design = np.column_stack([np.ones_like(u), np.log(u), -u])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        log_k, power, rate = coef
        if rate <= 0.0:
            raise TailFitError(
                f"fitted tail rate {rate:.3e} is not positive; the sampled "
                "window does not decay")
        tail = ExponentialTail(rate=float(rate), power=float(power),
                               coef=float(sign * math.exp(log_k)))
        return GridFunction(self.nodes, self.values, tail=tail,
                            exact=self.exact, meta=self.meta)

    # -- persistence ---------------------------------------------------------

    def to_csv(self, path) -> None:
        """Write `u,value` rows plus a JSON sidecar with the tail model."""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["u", "value"])
            for u, v in zip(self.nodes, self.values):
                writer.writerow([repr(float(u)), repr(float(v))])
        sidecar = {"tail": _tail_to_json(self.tail), "meta": self.meta}
        path.with_suffix(".json").write_text(
            json.dumps(sidecar, indent=2), encoding="utf-8")

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        path = Path(path)
        nodes, values = [], []
        with path.open("r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip() for h in header[:2]] != ["u", "value"]:
                raise ValueError(f"unexpected CSV header {header!r}")
            for row in reader:
                nodes.append(float(row[0]))
                values.append(float(row[1]))
        tail, meta = None, {}
        side = path.with_suffix(".json")
        if side.exists():
            data = json.loads(side.read_text(encoding="utf-8"))
            tail = _tail_from_json(data.get("tail"))
            meta = data.get("meta", {})
        return cls(np.array(nodes), np.array(values), tail=tail, meta=meta)


def default_grid(u_min: float, u_max: float, n: int = 1024) -> np.ndarray:
    """Working grid: log-dense below 1, uniform beyond, ``n`` nodes."""
    if not u_max > u_min >= 0:
        raise ValueError(f"need 0 <= u_min < u_max, got [{u_min}, {u_max}]")
    if u_min >= 1.0 or u_max <= 1.0:
        if u_min > 0 and u_max / u_min > 50:
            return np.geomspace(u_min, u_max, n)
        return np.linspace(u_min, u_max, n)
    n_low = n // 2
    if u_min > 0:
        low = np.geomspace(u_min, 1.0, n_low)
    else:
        low = np.concatenate([[0.0], np.geomspace(1e-5, 1.0, n_low - 1)])
    high = np.linspace(1.0, u_max, n - n_low + 1)[1:]
    return np.concatenate([low, high])


def _tail_mass(f: GridFunction) -> float:
    """Closed-form integral of the declared tail from the last node out."""
    tail = f.tail
    if tail is None:
        raise TailModelError(
            "B/F cumulative needs a declared tail (Exponential with positive "
            "rate, or Zero)")
    if isinstance(tail, ZeroTail):
        return 0.0
    if isinstance(tail, ConstantTail):
        if tail.level == 0.0:
            return 0.0
        raise TailModelError("constant nonzero tail has no finite mass")
    if tail.rate <= 0.0:
        raise TailModelError(
            f"tail rate {tail.rate:.3e} <= 0: infinite-horizon integral "
            "diverges")
    u_n = float(f.nodes[-1])
    coef = f._tail_coef
    if coef == 0.0:
        return 0.0
    # int_{u_n}^inf u^p e^{-r u} du = r^{-(p+1)} Gamma(p+1, r u_n)
    r, p = tail.rate, tail.power
    return coef * r ** (-(p + 1.0)) * _upper_gamma_real_eta(p + 1.0, r * u_n)


def _panel_integrals(f: GridFunction, tol: float) -> np.ndarray:
    out = np.empty(len(f.nodes) - 1)
    for i, (a, b) in enumerate(zip(f.nodes[:-1], f.nodes[1:])):
        out[i] = integrate(f, float(a), float(b), tol=tol).value
    return out


def _hermite_exact(out: GridFunction, slopes: np.ndarray) -> None:
    """Attach a value+derivative collocated evaluator to a cumulative.

    The true derivative of a cumulative integral is (+/-) the integrand,
    which is known exactly at the nodes, so a cubic Hermite interpolant
    is an order better than fitting values alone. Beyond the last node
    the declared tail takes over; below the first the value is clamped.
    """
    herm = CubicHermiteSpline(out.nodes, out.values, slopes)
    lo, hi = float(out.nodes[0]), float(out.nodes[-1])

    def exact(u):
        uu = np.atleast_1d(np.asarray(u, dtype=float))
        res = np.empty_like(uu)
        inside = uu <= hi
        if np.any(inside):
            res[inside] = herm(np.clip(uu[inside], lo, hi))
        if np.any(~inside):
            res[~inside] = out._tail_eval(uu[~inside])
        return res

    object.__setattr__(out, "exact", exact)


def cumulative(f: GridFunction, kind: str, tol: float = 1e-10):
    """Cumulative integrals of a GridFunction.

    kind "A": GridFunction of int_{u_min}^u f.
    kind "B": GridFunction of int_u^inf f (needs an integrable tail).
    kind "F": float, the full mass int_{u_min}^inf f.

    All three are assembled from one shared set of panel integrals with
    exactly-rounded summation, so B(u_min) == F bitwise and A + B matches F
    everywhere to rounding.
    """
    if kind not in ("A", "B", "F"):
        raise ValueError(f"kind must be A, B or F, got {kind!r}")
    panels = _panel_integrals(f, tol)
    slopes = np.asarray(f(f.nodes), dtype=float)
    if kind == "A":
        vals = np.array([math.fsum(panels[:j]) for j in range(len(f.nodes))])
        level = math.fsum(panels)
        out = GridFunction(f.nodes, vals, tail=ConstantTail(level=level),
                           meta={"cumulative": "A"})
        _hermite_exact(out, slopes)
        return out
    tail_mass = _tail_mass(f)
    if kind == "F":
        return math.fsum([*panels, tail_mass])
    vals = np.array([math.fsum([*panels[j:], tail_mass])
                     for j in range(len(f.nodes))])
    tail: Tail
    if isinstance(f.tail, ExponentialTail):
        tail = ExponentialTail(rate=f.tail.rate, power=f.tail.power)
    else:
        tail = ZeroTail()
    out = GridFunction(f.nodes, vals, tail=tail, meta={"cumulative": "B"})
    _hermite_exact(out, -slopes)
    return out

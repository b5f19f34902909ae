"""Diagonal model of a bounded self-adjoint operator.

The operator ``A`` is represented by its eigenvalues ``alphas`` (point atoms of
the spectral measure, unit weight, multiplicities by repetition).  State
vectors are plain 1-D numpy arrays of the same length; every operation here is
a coordinatewise multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionError, DomainError, ParameterError

SubspaceTag = Literal["stable", "center", "unstable"]
TAGS = ("stable", "center", "unstable")

TOL_CENTER = 1e-10


@dataclass(frozen=True)
class SpectrumSpec:
    """Sorted eigenvalues of ``A``.

    Positive entries span the stable subspace, zeros the center subspace and
    negative entries the unstable subspace.
    """

    alphas: np.ndarray

    def __post_init__(self):
        a = np.array(self.alphas, dtype=float).ravel()
        if a.size == 0:
            raise ParameterError("spectrum must contain at least one eigenvalue")
        if not np.all(np.isfinite(a)):
            raise ParameterError("eigenvalues must be finite")
        if np.any(np.diff(a) < 0):
            raise ParameterError("eigenvalues must be sorted ascending")
        if np.max(np.abs(a)) == 0:
            raise ParameterError("norm_bound must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "alphas", a)

    @property
    def n(self) -> int:
        return self.alphas.size

    @property
    def norm_bound(self) -> float:
        return float(np.max(np.abs(self.alphas)))

    def mask(self, tag: SubspaceTag) -> np.ndarray:
        if tag == "stable":
            return self.alphas > 0
        if tag == "center":
            return self.alphas == 0
        if tag == "unstable":
            return self.alphas < 0
        raise ParameterError(f"unknown subspace tag {tag!r}")

    def scaled(self, factor: float) -> "SpectrumSpec":
        return SpectrumSpec(self.alphas * factor)

    @classmethod
    def from_values(cls, values) -> "SpectrumSpec":
        return cls(np.sort(np.asarray(values, dtype=float)))


def explicit(values) -> SpectrumSpec:
    return SpectrumSpec.from_values(values)


def harmonic(n: int, scale: float = 1.0, signed: bool = False) -> SpectrumSpec:
    """Ladder ``scale / j``, ``j = 1..n``; mirrored to negative values if ``signed``."""
    a = scale / np.arange(1, n + 1, dtype=float)
    if signed:
        a = np.concatenate([-a, a])
    return SpectrumSpec.from_values(a)


def geometric(n: int, ratio: float = 0.5, scale: float = 1.0, start: int = 0,
              signed: bool = False) -> SpectrumSpec:
    """Ladder ``scale * ratio**j`` for ``j = start .. start+n-1``."""
    if not 0 < ratio < 1:
        raise ParameterError("geometric ratio must lie in (0, 1)")
    a = scale * ratio ** np.arange(start, start + n, dtype=float)
    if signed:
        a = np.concatenate([-a, a])
    return SpectrumSpec.from_values(a)


def from_config(block: dict) -> SpectrumSpec:
    """Build a spectrum from a parsed ``spectrum = {kind: ..., n: ...}`` block."""
    if "kind" not in block:
        raise ParameterError("spectrum block needs a 'kind' entry")
    kind = block["kind"]
    signed = bool(block.get("signed", False))
    if kind == "explicit":
        values = block.get("values", block.get("alphas"))
        if values is None:
            raise ParameterError("explicit spectrum needs 'values'")
        if isinstance(values, str):
            values = [float(v) for v in values.replace(";", ",").split(",") if v.strip()]
        spec = explicit(values)
        if "n" in block and int(block["n"]) != spec.n:
            raise ParameterError("explicit spectrum length does not match n")
        return spec
    n = int(block["n"])
    if kind == "harmonic":
        return harmonic(n, float(block.get("scale", 1.0)), signed)
    if kind == "geometric":
        return geometric(n, float(block.get("ratio", 0.5)), float(block.get("scale", 1.0)),
                         int(block.get("start", 0)), signed)
    raise ParameterError(f"unknown spectrum kind {kind!r}")


def _check(spec: SpectrumSpec, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[0] != spec.n:
        raise DimensionError(f"vector length {v.shape[0]} does not match spectrum size {spec.n}")
    return v


def _bcast(spec: SpectrumSpec, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    # Coefficients multiply the leading axis, so (N,) and (N, K) inputs both work.
    return w.reshape((-1,) + (1,) * (v.ndim - 1)) * v


def apply_A(spec: SpectrumSpec, v) -> np.ndarray:
    v = _check(spec, v)
    return _bcast(spec, spec.alphas, v)


def project(spec: SpectrumSpec, v, tag: SubspaceTag) -> np.ndarray:
    v = _check(spec, v)
    return _bcast(spec, spec.mask(tag).astype(float), v)


def sign(spec: SpectrumSpec, v) -> np.ndarray:
    v = _check(spec, v)
    return _bcast(spec, np.sign(spec.alphas), v)


def abs_power(spec: SpectrumSpec, v, r: float) -> np.ndarray:
    """Apply ``|A|**r`` for ``r > 0``; center coordinates are annihilated."""
    if not r > 0:
        raise ParameterError("abs_power needs r > 0; use abs_power_inv for negative powers")
    v = _check(spec, v)
    return _bcast(spec, np.abs(spec.alphas) ** r, v)


def abs_power_inv(spec: SpectrumSpec, v, r: float, tol_center: float = TOL_CENTER) -> np.ndarray:
    """Apply the unbounded inverse ``|A|**-r`` on ``Range |A|**r``.

    Raises
    ------
    DomainError
        If ``v`` has a center component larger than ``tol_center * |v|``.
    """
    if not r > 0:
        raise ParameterError("abs_power_inv needs r > 0")
    v = _check(spec, v)
    center = spec.mask("center")
    if np.any(center):
        scale = float(np.linalg.norm(v))
        if np.max(np.abs(v[center])) > tol_center * scale:
            raise DomainError("vector has a center component: not in Range |A|^r")
    w = np.zeros(spec.n)
    nz = ~center
    w[nz] = np.abs(spec.alphas[nz]) ** (-r)
    return _bcast(spec, w, v)

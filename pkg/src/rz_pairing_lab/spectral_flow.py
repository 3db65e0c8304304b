"""Signed counting of eigenvalue crossings through zero.

Families are catalog-shaped: a constant spectrum, the circle-twist path whose
branches are n + a(s) for a piecewise-linear holonomy a(s), or a tabulated
list of spectra. Zero eigenvalues follow the +epsilon convention: a mode
sitting exactly at zero counts as positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

from .spectra import Spectrum

Breakpoints = Tuple[Tuple[float, float], ...]


class ResolutionError(ValueError):
    """The evaluation grid is too coarse to separate adjacent crossings."""


@dataclass(frozen=True)
class ConstantFamily:
    spectrum: Spectrum
    grid: int = 2


@dataclass(frozen=True)
class CircleTwistPath:
    """Holonomy path a(s), piecewise linear on [0, 1], branches n + a(s)."""

    breakpoints: Breakpoints
    grid: int = 256

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) < 2:
            raise ValueError("need at least two breakpoints")
        if bp[0][0] != 0.0 or bp[-1][0] != 1.0:
            raise ValueError("breakpoints must cover s = 0 and s = 1")
        for (s0, _), (s1, _) in zip(bp, bp[1:]):
            if s1 <= s0:
                raise ValueError("breakpoint parameters must be strictly increasing")
        if self.grid < 2:
            raise ValueError("grid must be >= 2")

    def a_of_s(self, s: float) -> float:
        bp = self.breakpoints
        if s <= bp[0][0]:
            return bp[0][1]
        for (s0, a0), (s1, a1) in zip(bp, bp[1:]):
            if s == s1:
                # exact knot values keep the +epsilon endpoint convention
                # immune to interpolation rounding
                return a1
            if s < s1:
                t = (s - s0) / (s1 - s0)
                return a0 + t * (a1 - a0)
        return bp[-1][1]


@dataclass(frozen=True)
class TabulatedFamily:
    samples: Tuple[Tuple[float, Spectrum], ...]
    grid: int = 2

    def __post_init__(self):
        if len(self.samples) < 2:
            raise ValueError("need at least two samples")
        if self.samples[0][0] != 0.0 or self.samples[-1][0] != 1.0:
            raise ValueError("samples must cover s = 0 and s = 1")
        for (s0, _), (s1, _) in zip(self.samples, self.samples[1:]):
            if s1 <= s0:
                raise ValueError("sample parameters must be strictly increasing")


SpectralFamily = Union[ConstantFamily, CircleTwistPath, TabulatedFamily]


def affine_twist(a0: float, winding: float, grid: int = 256) -> CircleTwistPath:
    """Path a(s) = a0 + winding * s."""
    return CircleTwistPath(((0.0, float(a0)), (1.0, float(a0) + float(winding))), grid)


def subpath(path: CircleTwistPath, s0: float, s1: float) -> CircleTwistPath:
    """Restriction of a twist path to [s0, s1], rescaled to [0, 1]."""
    if not 0.0 <= s0 < s1 <= 1.0:
        raise ValueError("need 0 <= s0 < s1 <= 1")
    knots = sorted({s0, s1} | {s for s, _ in path.breakpoints if s0 < s < s1})
    bp = tuple(((s - s0) / (s1 - s0), path.a_of_s(s)) for s in knots)
    return CircleTwistPath(bp, path.grid)


def reversed_family(fam: SpectralFamily) -> SpectralFamily:
    """The same family traversed from s = 1 back to s = 0."""
    if isinstance(fam, ConstantFamily):
        return fam
    if isinstance(fam, CircleTwistPath):
        bp = tuple((1.0 - s, a) for s, a in reversed(fam.breakpoints))
        return CircleTwistPath(bp, fam.grid)
    samples = tuple((1.0 - s, spec) for s, spec in reversed(fam.samples))
    return TabulatedFamily(samples, fam.grid)


def _nonneg_count(spec: Spectrum) -> int:
    # +epsilon convention: kernel modes count as positive.
    return spec.kernel_dim + sum(m for v, m in spec.eigenvalues if v > 0)


def spectral_flow(fam: SpectralFamily) -> int:
    """Net number of eigenvalue branches crossing zero upward along ``fam``.

    Circle-twist paths are walked on a uniform grid; each step moves every
    branch by the same increment, and a step of |da| >= 1/2 cannot separate
    adjacent crossings, which raises ResolutionError.
    """
    if isinstance(fam, ConstantFamily):
        return 0
    if isinstance(fam, CircleTwistPath):
        n = fam.grid
        a_prev = fam.a_of_s(0.0)
        flow = 0
        for j in range(1, n + 1):
            a_next = fam.a_of_s(j / n)
            if abs(a_next - a_prev) >= 0.5:
                raise ResolutionError(
                    f"holonomy step |da| = {abs(a_next - a_prev):.3g} >= 1/2 at "
                    f"grid {n}; increase the grid"
                )
            flow += math.floor(a_next) - math.floor(a_prev)
            a_prev = a_next
        return flow
    counts = [spec.mode_count for _, spec in fam.samples]
    if len(set(counts)) != 1:
        raise ValueError(
            "tabulated samples must share a total mode count to make crossing "
            f"counting well-defined, got {counts}"
        )
    flow = 0
    prev = _nonneg_count(fam.samples[0][1])
    for _, spec in fam.samples[1:]:
        cur = _nonneg_count(spec)
        flow += cur - prev
        prev = cur
    return flow

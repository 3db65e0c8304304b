"""Eigenvalue data for the model operators.

Two constructions are covered: the circle operator -i d/dtheta twisted by a
flat line bundle with holonomy ``a`` (eigenvalues n + a), and the 2x2 block
combination of a graded operator with an odd self-adjoint one, whose spectrum
splits into paired modes +-sqrt(k^2 + lambda_i) and a kernel-projector block
carrying the index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

#: Values closer than this are merged during collation (sqrt rounding slack).
COLLATE_TOL = 1e-12

EigList = Tuple[Tuple[float, int], ...]


@dataclass(frozen=True)
class Spectrum:
    """Finite multiset of nonzero real eigenvalues plus an explicit kernel.

    Zero modes are never stored in ``eigenvalues``; their count lives in
    ``kernel_dim``.
    """

    eigenvalues: EigList
    kernel_dim: int = 0

    def __post_init__(self):
        if self.kernel_dim < 0:
            raise ValueError("kernel_dim must be nonnegative")
        prev = -math.inf
        for value, mult in self.eigenvalues:
            if value == 0.0:
                raise ValueError("zero eigenvalues belong in kernel_dim")
            if mult < 1:
                raise ValueError("multiplicities must be >= 1")
            if value <= prev:
                raise ValueError("eigenvalue list must be strictly ascending")
            prev = value

    @property
    def mode_count(self) -> int:
        """Total number of modes counting multiplicity and the kernel."""
        return self.kernel_dim + sum(m for _, m in self.eigenvalues)

    def union(self, other: "Spectrum") -> "Spectrum":
        """Disjoint-union spectrum (eigenvalue multisets merged)."""
        values = [(v, m) for v, m in self.eigenvalues] + list(other.eigenvalues)
        return collate_spectrum(values, self.kernel_dim + other.kernel_dim)

    def expanded(self, include_kernel: bool = True) -> np.ndarray:
        """Flat sorted array of eigenvalues repeated by multiplicity."""
        vals = [np.repeat(v, m) for v, m in self.eigenvalues]
        if include_kernel and self.kernel_dim:
            vals.append(np.zeros(self.kernel_dim))
        if not vals:
            return np.zeros(0)
        return np.sort(np.concatenate(vals))

    def to_csv(self) -> str:
        lines = [f"kernel_dim,{self.kernel_dim}", "value,multiplicity"]
        lines += [f"{v!r},{m}" for v, m in self.eigenvalues]
        return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str) -> Spectrum:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("kernel_dim,"):
        raise ValueError("spectrum CSV must start with a kernel_dim line")
    kernel_dim = int(lines[0].split(",", 1)[1])
    eigs = []
    for ln in lines[1:]:
        if ln == "value,multiplicity":
            continue
        v, m = ln.split(",")
        eigs.append((float(v), int(m)))
    return Spectrum(tuple(eigs), kernel_dim)


def collate_spectrum(
    weighted: Iterable[Tuple[float, int]],
    kernel_dim: int = 0,
    tol: float = COLLATE_TOL,
) -> Spectrum:
    """Build a Spectrum from (value, multiplicity) pairs.

    Values within ``tol`` of zero are routed to the kernel; values within
    ``tol`` of each other are merged (the first representative wins).
    """
    nonzero = []
    for value, mult in weighted:
        if abs(value) <= tol:
            kernel_dim += mult
        else:
            nonzero.append((value, mult))
    nonzero.sort()
    merged: list[list] = []
    for value, mult in nonzero:
        if merged and value - merged[-1][0] <= tol:
            merged[-1][1] += mult
        else:
            merged.append([value, mult])
    return Spectrum(tuple((v, m) for v, m in merged), kernel_dim)


@dataclass(frozen=True)
class BlockOperatorData:
    """Kernel dimensions and positive Laplacian spectrum of a graded operator.

    ``h_plus``/``h_minus`` are dim ker of the two associated Laplacians;
    ``positive_eigs`` lists the strictly positive eigenvalues shared by both.
    """

    h_plus: int
    h_minus: int
    positive_eigs: EigList = ()

    def __post_init__(self):
        if self.h_plus < 0 or self.h_minus < 0:
            raise ValueError("kernel dimensions must be nonnegative")
        prev = 0.0
        for value, mult in self.positive_eigs:
            if value <= 0.0:
                raise ValueError("positive_eigs must be strictly positive")
            if mult < 1:
                raise ValueError("multiplicities must be >= 1")
            if value <= prev:
                raise ValueError("positive_eigs must be strictly ascending")
            prev = value

    @property
    def index_plus(self) -> int:
        return self.h_plus - self.h_minus


def circle_twisted_spectrum(a: float, cutoff: int) -> Spectrum:
    """Truncated spectrum {n + a : |n| <= cutoff} of the twisted circle operator.

    ``a`` is the holonomy class in [0, 1). The untwisted case a = 0 puts the
    n = 0 mode into the kernel; for a in (0, 1) no eigenvalue vanishes.
    """
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise ValueError(f"holonomy must lie in [0, 1), got {a}")
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    eigs = []
    kernel = 0
    for n in range(-cutoff, cutoff + 1):
        value = n + a
        if value == 0.0:
            kernel += 1
        else:
            eigs.append((value, 1))
    return Spectrum(tuple(eigs), kernel)


def sharp_product_spectrum(p: BlockOperatorData, a_spec: Spectrum) -> Spectrum:
    """Spectrum of the 2x2 block combination of ``p`` with ``a_spec``.

    Every mode k of ``a_spec`` (zero modes included, as k = 0) pairs with each
    positive Laplacian eigenvalue lambda to give +-sqrt(k^2 + lambda), and the
    kernel-projector block contributes k with multiplicity h_plus and -k with
    multiplicity h_minus. Exact zeros land in the kernel.
    """
    modes = list(a_spec.eigenvalues)
    if a_spec.kernel_dim:
        modes.append((0.0, a_spec.kernel_dim))
    out: list[Tuple[float, int]] = []
    for k, mk in modes:
        for lam, ml in p.positive_eigs:
            s = math.sqrt(k * k + lam)
            out.append((s, mk * ml))
            out.append((-s, mk * ml))
        if p.h_plus:
            out.append((k, mk * p.h_plus))
        if p.h_minus:
            out.append((-k, mk * p.h_minus))
    return collate_spectrum(out)


def eta_partial_sum(spec: Spectrum, s: float) -> float:
    """Truncated eta series sum_{lambda != 0} sgn(lambda) mult / |lambda|^s.

    Kernel modes are excluded. Terms are grouped by |lambda| with net signed
    multiplicity, so negation-symmetric spectra cancel exactly at every s.
    No regularization is applied; at s = 0 this is the raw signed mode count
    of the truncation.
    """
    net: dict[float, int] = {}
    for value, mult in spec.eigenvalues:
        key = abs(value)
        net[key] = net.get(key, 0) + (mult if value > 0 else -mult)
    total = 0.0
    for key in sorted(net):
        if net[key]:
            total += net[key] / key**s
    return total


def symmetric_part_is_cancelling(spec: Spectrum, tol: float = COLLATE_TOL) -> bool:
    """True when the nonzero part of ``spec`` is symmetric under negation."""
    vals = spec.expanded(include_kernel=False)
    if vals.size == 0:
        return True
    return bool(np.all(np.abs(vals + vals[::-1]) <= tol * np.maximum(1.0, np.abs(vals))))


def warn_if_asymmetric(spec: Spectrum) -> None:
    # Partial eta sums of asymmetric truncations carry bias at s = 0.
    if not symmetric_part_is_cancelling(spec):
        warnings.warn(
            "nonzero spectrum is not negation-symmetric; the s=0 partial sum "
            "carries truncation bias",
            RuntimeWarning,
            stacklevel=3,
        )

"""Exterior calculus on a fixed catalog of model manifolds.

Forms are stored degree by degree as exact multiples of normalized closed
generators (ATOM data: the constant 1, the unit-period angular form on the
circle, unit-integral volume generators on spheres and the 2-torus, and their
products), plus grid-sampled coefficient functions on the circle and 2-torus
(GRID data). Atom arithmetic is exact over the rationals; grid calculus is
spectral (FFT derivatives, trapezoid quadrature on periodic grids).

The module also carries the characteristic-class layer used by the pairings:
Todd forms (constant 1 on this stably parallelizable catalog), Chern
characters of catalog bundles, odd Chern characters of unitary maps, their
transgression along homotopies, and the exactness-condition residual.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

TWO_PI = 2.0 * math.pi

#: Default angular grid resolution; trapezoid quadrature is spectrally
#: accurate on these periodic grids.
DEFAULT_GRID = 1024

Coeff = Union[Fraction, float]
GenKey = Union[str, Tuple["GenKey", "GenKey"]]


# ---------------------------------------------------------------------------
# Manifold catalog
# ---------------------------------------------------------------------------


class ModelManifold:
    """Base class of the closed manifold catalog."""

    oriented = True

    @property
    def dim(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class Point(ModelManifold):
    @property
    def dim(self) -> int:
        return 0

    def __str__(self) -> str:
        return "Point"


@dataclass(frozen=True)
class Circle(ModelManifold):
    @property
    def dim(self) -> int:
        return 1

    def __str__(self) -> str:
        return "Circle"


@dataclass(frozen=True)
class Sphere(ModelManifold):
    """Even-dimensional sphere; only its cohomology generators are modeled."""

    n: int

    def __post_init__(self):
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError(f"catalog spheres must have even dimension >= 2, got {self.n}")

    @property
    def dim(self) -> int:
        return self.n

    def __str__(self) -> str:
        return f"Sphere({self.n})"


@dataclass(frozen=True)
class Torus2(ModelManifold):
    @property
    def dim(self) -> int:
        return 2

    def __str__(self) -> str:
        return "Torus2"


@dataclass(frozen=True)
class ProductManifold(ModelManifold):
    left: ModelManifold
    right: ModelManifold

    @property
    def dim(self) -> int:
        return self.left.dim + self.right.dim

    def __str__(self) -> str:
        return f"Product({self.left}, {self.right})"


@dataclass(frozen=True)
class Cylinder(ModelManifold):
    """base x [0, 1]; carried in the catalog for bookkeeping, not integration."""

    base: ModelManifold

    @property
    def dim(self) -> int:
        return self.base.dim + 1

    def __str__(self) -> str:
        return f"Cylinder({self.base})"


# ---------------------------------------------------------------------------
# Generator tables
# ---------------------------------------------------------------------------

_SIMPLE_GENS: Dict[type, Dict[str, int]] = {
    Point: {"1": 0},
    Circle: {"1": 0, "s": 1},
    Torus2: {"1": 0, "a": 1, "b": 1, "v": 2},
    Cylinder: {"1": 0},
}


def generator_degrees(M: ModelManifold) -> Dict[GenKey, int]:
    """All generator keys of ``M`` with their degrees."""
    if isinstance(M, Sphere):
        return {"1": 0, "v": M.n}
    if isinstance(M, ProductManifold):
        out: Dict[GenKey, int] = {}
        for kl, dl in generator_degrees(M.left).items():
            for kr, dr in generator_degrees(M.right).items():
                out[(kl, kr)] = dl + dr
        return out
    return dict(_SIMPLE_GENS[type(M)])


def gen_degree(M: ModelManifold, key: GenKey) -> int:
    if isinstance(M, ProductManifold):
        if not isinstance(key, tuple) or len(key) != 2:
            raise KeyError(f"product generator key must be a pair, got {key!r}")
        return gen_degree(M.left, key[0]) + gen_degree(M.right, key[1])
    degs = generator_degrees(M)
    if key not in degs:
        raise KeyError(f"unknown generator {key!r} on {M}")
    return degs[key]


def unit_key(M: ModelManifold) -> GenKey:
    if isinstance(M, ProductManifold):
        return (unit_key(M.left), unit_key(M.right))
    return "1"


def top_key(M: ModelManifold) -> Optional[GenKey]:
    """Top-degree generator with unit integral; None when there is none."""
    if isinstance(M, Point):
        return "1"
    if isinstance(M, (Circle,)):
        return "s"
    if isinstance(M, (Sphere, Torus2)):
        return "v"
    if isinstance(M, ProductManifold):
        tl, tr = top_key(M.left), top_key(M.right)
        if tl is None or tr is None:
            return None
        return (tl, tr)
    return None


def gen_integral(M: ModelManifold, key: GenKey) -> Fraction:
    """Integral of a generator over ``M``: 1 for the top generator, else 0."""
    return Fraction(1) if key == top_key(M) else Fraction(0)


def wedge_gens(M: ModelManifold, k1: GenKey, k2: GenKey) -> Tuple[int, Optional[GenKey]]:
    """Product of two generators as (sign, key); key None means zero."""
    if k1 == unit_key(M):
        return 1, k2
    if k2 == unit_key(M):
        return 1, k1
    if isinstance(M, ProductManifold):
        l1, r1 = k1
        l2, r2 = k2
        sign = -1 if (gen_degree(M.right, r1) * gen_degree(M.left, l2)) % 2 else 1
        sl, kl = wedge_gens(M.left, l1, l2)
        if kl is None:
            return 0, None
        sr, kr = wedge_gens(M.right, r1, r2)
        if kr is None:
            return 0, None
        return sign * sl * sr, (kl, kr)
    if isinstance(M, Torus2):
        if (k1, k2) == ("a", "b"):
            return 1, "v"
        if (k1, k2) == ("b", "a"):
            return -1, "v"
    # everything else squares to zero or overflows the dimension
    return 0, None


# ---------------------------------------------------------------------------
# Coefficient helpers
# ---------------------------------------------------------------------------


def _as_coeff(c) -> Coeff:
    if isinstance(c, bool):
        raise TypeError("boolean is not a form coefficient")
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, (Fraction, float)):
        return c
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _cmul(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    return float(a) * float(b)


def _cadd(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return float(a) + float(b)


def _czero(c: Coeff) -> bool:
    return c == 0


# ---------------------------------------------------------------------------
# Form
# ---------------------------------------------------------------------------

_GRID_MANIFOLDS = (Circle, Torus2)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=float).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Form:
    """Graded differential form on a catalog manifold.

    ``atoms`` maps generator keys to exact or floating coefficients; ``grids``
    maps degrees to sampled coefficient functions (circle: arrays over the
    angular grid, with degree-1 coefficients taken against d(theta); 2-torus:
    degree 1 holds the pair of d(theta_i) components, degree 2 the
    d(theta_1)^d(theta_2) component).
    """

    manifold: ModelManifold
    atoms: Mapping[GenKey, Coeff] = field(default_factory=dict)
    grids: Mapping[int, object] = field(default_factory=dict)
    grid_size: Optional[int] = None

    def __post_init__(self):
        atoms = {}
        for key, c in self.atoms.items():
            gen_degree(self.manifold, key)  # raises on unknown keys
            c = _as_coeff(c)
            if not _czero(c):
                atoms[key] = c
        object.__setattr__(self, "atoms", atoms)
        if self.grids and not isinstance(self.manifold, _GRID_MANIFOLDS):
            raise ValueError(
                f"GRID components are not supported on {self.manifold}; "
                "only Circle and Torus2 carry sampled coefficients"
            )
        grids = {}
        for deg, payload in self.grids.items():
            if not 0 <= deg <= self.manifold.dim:
                raise ValueError(f"grid degree {deg} out of range on {self.manifold}")
            if isinstance(self.manifold, Circle):
                arr = _freeze(payload)
                if arr.ndim != 1:
                    raise ValueError("circle grid components must be 1-d arrays")
                grids[deg] = arr
            else:
                if deg == 1:
                    p, q = payload
                    grids[deg] = (_freeze(p), _freeze(q))
                else:
                    grids[deg] = _freeze(payload)
        sizes = set()
        for deg, payload in grids.items():
            arrs = payload if isinstance(payload, tuple) else (payload,)
            for arr in arrs:
                if not np.all(np.isfinite(arr)):
                    raise ValueError("grid samples must be finite")
                if isinstance(self.manifold, Torus2) and arr.shape != (arr.shape[0],) * 2:
                    raise ValueError("torus grids must be square")
                sizes.add(arr.shape[0])
        if len(sizes) > 1:
            raise ValueError(f"inconsistent grid sizes {sorted(sizes)}")
        size = sizes.pop() if sizes else self.grid_size
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "grid_size", size)

    # -- structure ---------------------------------------------------------

    def degrees(self) -> Tuple[int, ...]:
        degs = {gen_degree(self.manifold, k) for k in self.atoms}
        degs.update(self.grids)
        return tuple(sorted(degs))

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.atoms:
            return False
        for payload in self.grids.values():
            arrs = payload if isinstance(payload, tuple) else (payload,)
            for arr in arrs:
                if np.max(np.abs(arr), initial=0.0) > tol:
                    return False
        return True

    def component(self, degree: int) -> "Form":
        atoms = {k: c for k, c in self.atoms.items() if gen_degree(self.manifold, k) == degree}
        grids = {d: p for d, p in self.grids.items() if d == degree}
        return Form(self.manifold, atoms, grids, self.grid_size)

    def drop_degree(self, degree: int) -> "Form":
        atoms = {k: c for k, c in self.atoms.items() if gen_degree(self.manifold, k) != degree}
        grids = {d: p for d, p in self.grids.items() if d != degree}
        return Form(self.manifold, atoms, grids, self.grid_size)

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "Form") -> "Form":
        if not isinstance(other, Form):
            return NotImplemented
        if self.manifold != other.manifold:
            raise ValueError(f"manifold mismatch: {self.manifold} vs {other.manifold}")
        if self.grid_size and other.grid_size and self.grid_size != other.grid_size:
            raise ValueError("grid size mismatch")
        atoms = dict(self.atoms)
        for k, c in other.atoms.items():
            atoms[k] = _cadd(atoms[k], c) if k in atoms else c
        grids: Dict[int, object] = dict(self.grids)
        for d, p in other.grids.items():
            if d not in grids:
                grids[d] = p
            elif isinstance(p, tuple):
                grids[d] = (grids[d][0] + p[0], grids[d][1] + p[1])
            else:
                grids[d] = grids[d] + p
        return Form(self.manifold, atoms, grids, self.grid_size or other.grid_size)

    def __neg__(self) -> "Form":
        return self.scale(-1)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        c = _as_coeff(c)
        atoms = {k: _cmul(v, c) for k, v in self.atoms.items()}
        grids: Dict[int, object] = {}
        for d, p in self.grids.items():
            if isinstance(p, tuple):
                grids[d] = (p[0] * float(c), p[1] * float(c))
            else:
                grids[d] = p * float(c)
        return Form(self.manifold, atoms, grids, self.grid_size)

    def __rmul__(self, c) -> "Form":
        return self.scale(c)


def zero_form(M: ModelManifold) -> Form:
    return Form(M)


def constant_form(M: ModelManifold, c) -> Form:
    return Form(M, {unit_key(M): _as_coeff(c)})


def atom_form(M: ModelManifold, key: GenKey, c) -> Form:
    return Form(M, {key: _as_coeff(c)})


def top_form(M: ModelManifold, c) -> Form:
    key = top_key(M)
    if key is None:
        raise ValueError(f"{M} has no top generator")
    return Form(M, {key: _as_coeff(c)})


def circle_grid_form(degree: int, samples: np.ndarray) -> Form:
    return Form(Circle(), {}, {degree: np.asarray(samples, dtype=float)})


def torus_grid_form(degree: int, payload) -> Form:
    return Form(Torus2(), {}, {degree: payload})


def circle_theta(grid_size: int = DEFAULT_GRID) -> np.ndarray:
    """Uniform angular grid theta_j = 2 pi j / G."""
    return TWO_PI * np.arange(grid_size) / grid_size


# ---------------------------------------------------------------------------
# Spectral derivative and exterior derivative
# ---------------------------------------------------------------------------


def spectral_derivative(samples: np.ndarray, axis: int = 0) -> np.ndarray:
    """d/d(theta) on a uniform periodic grid via FFT."""
    samples = np.asarray(samples)
    g = samples.shape[axis]
    freq = np.fft.fftfreq(g, d=1.0 / g)
    shape = [1] * samples.ndim
    shape[axis] = g
    trans = np.fft.fft(samples, axis=axis) * (1j * freq.reshape(shape))
    if g % 2 == 0:
        # odd derivative of a real signal has no Nyquist content
        idx = [slice(None)] * samples.ndim
        idx[axis] = g // 2
        trans[tuple(idx)] = 0.0
    out = np.fft.ifft(trans, axis=axis)
    return out if np.iscomplexobj(samples) else out.real


def exterior_derivative(f: Form) -> Form:
    """Exterior derivative; atoms are closed, grids differentiate spectrally."""
    M = f.manifold
    grids: Dict[int, object] = {}
    if isinstance(M, Circle):
        if 0 in f.grids:
            grids[1] = spectral_derivative(f.grids[0])
    elif isinstance(M, Torus2):
        if 0 in f.grids:
            g0 = f.grids[0]
            grids[1] = (spectral_derivative(g0, axis=0), spectral_derivative(g0, axis=1))
        if 1 in f.grids:
            p, q = f.grids[1]
            curl = spectral_derivative(q, axis=0) - spectral_derivative(p, axis=1)
            prev = grids.get(1)
            grids[2] = curl
            if prev is not None:
                grids[1] = prev
    return Form(M, {}, grids, f.grid_size)


# ---------------------------------------------------------------------------
# Wedge product
# ---------------------------------------------------------------------------


def _atom_pointwise(M: ModelManifold, atoms: Mapping[GenKey, Coeff], degree: int):
    """Constant pointwise value of the atom part in grid coordinates."""
    if isinstance(M, Circle):
        if degree == 0:
            return float(atoms.get("1", 0.0))
        return float(atoms.get("s", 0.0)) / TWO_PI
    if degree == 0:
        return float(atoms.get("1", 0.0))
    if degree == 1:
        return (float(atoms.get("a", 0.0)) / TWO_PI, float(atoms.get("b", 0.0)) / TWO_PI)
    return float(atoms.get("v", 0.0)) / (TWO_PI * TWO_PI)


def _grid_or_none(f: Form, degree: int):
    return f.grids.get(degree)


def _pw(f: Form, degree: int, g: int):
    """Pointwise sampled value (atoms + grid) of one degree, or None if absent."""
    M = f.manifold
    const = _atom_pointwise(M, f.atoms, degree)
    grid = _grid_or_none(f, degree)
    if isinstance(M, Circle):
        if grid is None and const == 0.0:
            return None
        base = np.full(g, const)
        return base + grid if grid is not None else base
    if degree == 1:
        if grid is None and const == (0.0, 0.0):
            return None
        base = (np.full((g, g), const[0]), np.full((g, g), const[1]))
        if grid is None:
            return base
        return (base[0] + grid[0], base[1] + grid[1])
    if grid is None and const == 0.0:
        return None
    base = np.full((g, g), const)
    return base + grid if grid is not None else base


def wedge(f: Form, g: Form) -> Form:
    """Graded product; components above the manifold dimension vanish."""
    if f.manifold != g.manifold:
        raise ValueError(f"manifold mismatch: {f.manifold} vs {g.manifold}")
    M = f.manifold
    atoms: Dict[GenKey, Coeff] = {}
    for k1, c1 in f.atoms.items():
        for k2, c2 in g.atoms.items():
            sign, key = wedge_gens(M, k1, k2)
            if key is None or sign == 0:
                continue
            term = _cmul(c1, c2)
            if sign == -1:
                term = _cmul(term, Fraction(-1))
            atoms[key] = _cadd(atoms[key], term) if key in atoms else term
    if not f.grids and not g.grids:
        return Form(M, atoms)

    if f.grid_size and g.grid_size and f.grid_size != g.grid_size:
        raise ValueError("grid size mismatch")
    size = f.grid_size or g.grid_size
    grids: Dict[int, object] = {}

    def _accum(deg: int, val) -> None:
        if deg in grids:
            if isinstance(val, tuple):
                grids[deg] = (grids[deg][0] + val[0], grids[deg][1] + val[1])
            else:
                grids[deg] = grids[deg] + val
        else:
            grids[deg] = val

    # grid-involving cross terms; the pure atom x atom part stays exact above
    pairs = [(d1, d2) for d1 in f.degrees() for d2 in g.degrees()
             if d1 + d2 <= M.dim and (d1 in f.grids or d2 in g.grids)]
    for d1, d2 in pairs:
        a = _pw(f, d1, size)
        b = _pw(g, d2, size)
        if a is None or b is None:
            continue
        # subtract the atom x atom part already counted exactly
        ca = _atom_pointwise(M, f.atoms, d1)
        cb = _atom_pointwise(M, g.atoms, d2)
        if isinstance(M, Circle):
            _accum(d1 + d2, a * b - ca * cb)
        elif d1 == 1 and d2 == 1:
            cross = a[0] * b[1] - a[1] * b[0]
            _accum(2, cross - (ca[0] * cb[1] - ca[1] * cb[0]))
        elif d1 == 1 or d2 == 1:
            scalar, vec, cs, cv = (b, a, cb, ca) if d1 == 1 else (a, b, ca, cb)
            _accum(d1 + d2, (vec[0] * scalar - cv[0] * cs, vec[1] * scalar - cv[1] * cs))
        else:
            _accum(d1 + d2, a * b - ca * cb)
    return Form(M, atoms, grids, size)


def exp_form(F: Form) -> Form:
    """Exponential series 1 + F + F^2/2! + ..., truncated at the dimension."""
    out = constant_form(F.manifold, 1)
    term = constant_form(F.manifold, 1)
    for n in range(1, F.manifold.dim + 1):
        term = wedge(term, F).scale(Fraction(1, n))
        if term.is_zero():
            break
        out = out + term
    return out


# ---------------------------------------------------------------------------
# Integration and norms
# ---------------------------------------------------------------------------


def integrate(f: Form, M: ModelManifold):
    """Integral of the top-degree component over ``M``.

    Atom contributions are exact rationals whenever their coefficients are;
    grid contributions use the trapezoid rule on the periodic grid.
    """
    if f.manifold != M:
        raise ValueError(f"form on {f.manifold} cannot be integrated over {M}")
    total: Coeff = Fraction(0)
    for key, c in f.atoms.items():
        w = gen_integral(M, key)
        if w:
            total = _cadd(total, _cmul(c, w))
    grid_part = 0.0
    if isinstance(M, Circle) and M.dim in f.grids:
        g = f.grids[1]
        grid_part = float(np.sum(g)) * TWO_PI / g.shape[0]
    elif isinstance(M, Torus2) and 2 in f.grids:
        g = f.grids[2]
        grid_part = float(np.sum(g)) * (TWO_PI / g.shape[0]) ** 2
    if grid_part != 0.0 or (f.grids and M.dim in f.grids):
        return float(total) + grid_part
    return total


def sup_norm(f: Form) -> float:
    """Coefficient sup-norm: max |atom coefficient| and max |grid sample|."""
    best = 0.0
    for c in f.atoms.values():
        best = max(best, abs(float(c)))
    for payload in f.grids.values():
        arrs = payload if isinstance(payload, tuple) else (payload,)
        for arr in arrs:
            best = max(best, float(np.max(np.abs(arr), initial=0.0)))
    return best


# ---------------------------------------------------------------------------
# Characteristic forms of catalog bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrivialBundle:
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("trivial bundle rank must be nonnegative")

    def __str__(self) -> str:
        return f"trivial({self.rank})"


@dataclass(frozen=True)
class LineBundle:
    """Line bundle with integer first Chern number, on Sphere(2) or Torus2."""

    c1: int

    def __str__(self) -> str:
        return f"line({self.c1})"


@dataclass(frozen=True)
class BottBundle:
    """Rank-zero virtual bundle on Sphere(2p) whose ch is the unit top generator."""

    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("Bott bundle order must be >= 1")

    def __str__(self) -> str:
        return f"bott({self.p})"


@dataclass(frozen=True)
class SumBundle:
    left: "BundleData"
    right: "BundleData"

    def __str__(self) -> str:
        return f"({self.left} + {self.right})"


@dataclass(frozen=True)
class TensorBundle:
    left: "BundleData"
    right: "BundleData"

    def __str__(self) -> str:
        return f"({self.left} * {self.right})"


@dataclass(frozen=True)
class BoxBundle:
    """External product over a ProductManifold, factor by factor."""

    left: "BundleData"
    right: "BundleData"

    def __str__(self) -> str:
        return f"({self.left} x {self.right})"


BundleData = Union[TrivialBundle, LineBundle, BottBundle, SumBundle, TensorBundle, BoxBundle]


def virtual_rank(E: BundleData) -> int:
    if isinstance(E, TrivialBundle):
        return E.rank
    if isinstance(E, LineBundle):
        return 1
    if isinstance(E, BottBundle):
        return 0
    if isinstance(E, SumBundle):
        return virtual_rank(E.left) + virtual_rank(E.right)
    if isinstance(E, (TensorBundle, BoxBundle)):
        return virtual_rank(E.left) * virtual_rank(E.right)
    raise TypeError(f"not a bundle: {E!r}")


def ch_bundle(E: BundleData, M: ModelManifold) -> Form:
    """Chern character form of a catalog bundle on ``M`` (exact atoms)."""
    if isinstance(E, TrivialBundle):
        return constant_form(M, Fraction(E.rank))
    if isinstance(E, LineBundle):
        if isinstance(M, Sphere) and M.n == 2 or isinstance(M, Torus2):
            return constant_form(M, 1) + top_form(M, Fraction(E.c1))
        raise ValueError(f"line bundles live on Sphere(2) or Torus2, not {M}")
    if isinstance(E, BottBundle):
        if isinstance(M, Sphere) and M.n == 2 * E.p:
            return top_form(M, Fraction(1))
        raise ValueError(f"bott({E.p}) lives on Sphere({2 * E.p}), not {M}")
    if isinstance(E, SumBundle):
        return ch_bundle(E.left, M) + ch_bundle(E.right, M)
    if isinstance(E, TensorBundle):
        return wedge(ch_bundle(E.left, M), ch_bundle(E.right, M))
    if isinstance(E, BoxBundle):
        if not isinstance(M, ProductManifold):
            raise ValueError(f"external products need a ProductManifold, not {M}")
        chl = ch_bundle(E.left, M.left)
        chr_ = ch_bundle(E.right, M.right)
        if chl.grids or chr_.grids:
            raise ValueError("external products support atom characters only")
        atoms: Dict[GenKey, Coeff] = {}
        for kl, cl in chl.atoms.items():
            for kr, cr in chr_.atoms.items():
                atoms[(kl, kr)] = _cmul(cl, cr)
        return Form(M, atoms)
    raise TypeError(f"not a bundle: {E!r}")


def todd_form(M: ModelManifold) -> Form:
    """Todd form; the constant 1 on every (stably parallelizable) catalog entry."""
    return constant_form(M, 1)


# ---------------------------------------------------------------------------
# Unitary maps, odd Chern character, transgression
# ---------------------------------------------------------------------------

#: Unitarity slack admitted for sampled maps.
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class K1Identity:
    """The constant identity map into U(rank) on any catalog manifold."""

    rank: int
    manifold: ModelManifold = field(default_factory=Circle)

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")


@dataclass(frozen=True)
class K1Winding:
    """theta -> e^{i k theta} on the circle."""

    k: int


@dataclass(frozen=True)
class K1DirectSum:
    parts: Tuple["K1Element", ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("direct sum needs at least one part")
        mans = {k1_manifold(p) for p in self.parts}
        if len(mans) > 1:
            raise ValueError("direct-sum parts must share a manifold")


class K1GridUnitary:
    """Sampled N x N unitary values on the circle grid.

    The homotopy class is not computable from samples alone; callers assert it
    through ``winding_class`` when class-dependent operations need it.
    """

    def __init__(self, samples: np.ndarray, winding_class: Optional[int] = None):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
            raise ValueError("samples must have shape (grid, N, N)")
        ident = np.eye(samples.shape[1])
        dev = np.max(np.abs(samples @ samples.conj().transpose(0, 2, 1) - ident))
        if dev > UNITARY_TOL:
            raise ValueError(f"samples deviate from unitarity by {dev:.3e}")
        samples = samples.copy()
        samples.flags.writeable = False
        self.samples = samples
        self.winding_class = winding_class

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)


K1Element = Union[K1Identity, K1Winding, K1DirectSum, K1GridUnitary]


def k1_manifold(g: K1Element) -> ModelManifold:
    if isinstance(g, K1Identity):
        return g.manifold
    if isinstance(g, (K1Winding, K1GridUnitary)):
        return Circle()
    if isinstance(g, K1DirectSum):
        return k1_manifold(g.parts[0])
    raise TypeError(f"not a unitary element: {g!r}")


def k1_rank(g: K1Element) -> int:
    if isinstance(g, K1Identity):
        return g.rank
    if isinstance(g, K1Winding):
        return 1
    if isinstance(g, K1DirectSum):
        return sum(k1_rank(p) for p in g.parts)
    if isinstance(g, K1GridUnitary):
        return g.samples.shape[1]
    raise TypeError(f"not a unitary element: {g!r}")


def k1_winding(g: K1Element) -> int:
    """Homotopy class as a total winding number; grids must assert theirs."""
    if isinstance(g, K1Identity):
        return 0
    if isinstance(g, K1Winding):
        return g.k
    if isinstance(g, K1DirectSum):
        return sum(k1_winding(p) for p in g.parts)
    if isinstance(g, K1GridUnitary):
        if g.winding_class is None:
            raise ValueError(
                "grid-sampled unitaries carry no computable homotopy class; "
                "construct them with winding_class set"
            )
        return g.winding_class
    raise TypeError(f"not a unitary element: {g!r}")


def k1_samples(g: K1Element, grid_size: int) -> np.ndarray:
    """Sample a catalog unitary on the circle grid as (grid, N, N) values."""
    theta = circle_theta(grid_size)
    if isinstance(g, K1Identity):
        return np.broadcast_to(np.eye(g.rank, dtype=complex), (grid_size, g.rank, g.rank)).copy()
    if isinstance(g, K1Winding):
        return np.exp(1j * g.k * theta)[:, None, None]
    if isinstance(g, K1DirectSum):
        blocks = [k1_samples(p, grid_size) for p in g.parts]
        n = sum(b.shape[1] for b in blocks)
        out = np.zeros((grid_size, n, n), dtype=complex)
        at = 0
        for b in blocks:
            r = b.shape[1]
            out[:, at : at + r, at : at + r] = b
            at += r
        return out
    if isinstance(g, K1GridUnitary):
        if g.samples.shape[0] != grid_size:
            raise ValueError(
                f"grid size mismatch: element sampled at {g.samples.shape[0]}, "
                f"requested {grid_size}"
            )
        return np.asarray(g.samples)
    raise TypeError(f"not a unitary element: {g!r}")


def odd_ch(g: K1Element) -> Form:
    """Odd Chern character, normalized so the circle winding k has integral k.

    The degree-(2n+1) coefficient is (-1)^n n! / ((2 pi i)^{n+1} (2n+1)!)
    times Tr(g^{-1} dg)^{2n+1}; on one-dimensional carriers only n = 0
    survives.
    """
    M = k1_manifold(g)
    if isinstance(g, K1Identity):
        return zero_form(M)
    if isinstance(g, K1Winding):
        return atom_form(Circle(), "s", Fraction(g.k))
    if isinstance(g, K1DirectSum):
        out = zero_form(M)
        for p in g.parts:
            out = out + odd_ch(p)
        return out
    if isinstance(g, K1GridUnitary):
        samples = np.asarray(g.samples)
        dsamples = spectral_derivative(samples, axis=0)
        trace = np.einsum("gij,gij->g", samples.conj(), dsamples)
        # Tr(g^{-1} dg) is anti-Hermitian, so /(2 pi i) leaves the imaginary part
        return circle_grid_form(1, trace.imag / TWO_PI)
    raise TypeError(f"not a unitary element: {g!r}")


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class UnitaryHomotopy:
    """Sampled path of unitary maps g_t on the circle, t in [0, 1].

    ``samples`` has shape (steps + 1, grid, N, N). Exact t-derivatives may be
    supplied in ``dt_samples``; otherwise second-order differences are used.
    """

    def __init__(self, samples: np.ndarray, dt_samples: Optional[np.ndarray] = None):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 4 or samples.shape[2] != samples.shape[3]:
            raise ValueError("samples must have shape (steps+1, grid, N, N)")
        if samples.shape[0] < 2:
            raise ValueError("need at least two time samples")
        ident = np.eye(samples.shape[2])
        dev = np.max(np.abs(samples @ samples.conj().transpose(0, 1, 3, 2) - ident))
        if dev > UNITARY_TOL:
            raise ValueError(f"path samples deviate from unitarity by {dev:.3e}")
        self.samples = samples
        if dt_samples is not None:
            dt_samples = np.asarray(dt_samples, dtype=complex)
            if dt_samples.shape != samples.shape:
                raise ValueError("dt_samples must match samples in shape")
        self.dt_samples = dt_samples

    @property
    def t_steps(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def grid_size(self) -> int:
        return self.samples.shape[1]

    @property
    def rank(self) -> int:
        return self.samples.shape[2]

    @classmethod
    def from_callable(cls, fn, t_steps: int, grid_size: int, dfn=None) -> "UnitaryHomotopy":
        """Build from fn(t, theta_array) -> (grid, N, N) unitary samples."""
        theta = circle_theta(grid_size)
        ts = np.linspace(0.0, 1.0, t_steps + 1)
        samples = np.stack([np.asarray(fn(t, theta), dtype=complex) for t in ts])
        dts = None
        if dfn is not None:
            dts = np.stack([np.asarray(dfn(t, theta), dtype=complex) for t in ts])
        return cls(samples, dts)


def _path_dt(path: UnitaryHomotopy) -> np.ndarray:
    if path.dt_samples is not None:
        return np.asarray(path.dt_samples)
    g = path.samples
    h = 1.0 / path.t_steps
    dt = np.empty_like(g)
    dt[1:-1] = (g[2:] - g[:-2]) / (2 * h)
    dt[0] = (-3 * g[0] + 4 * g[1] - g[2]) / (2 * h)
    dt[-1] = (3 * g[-1] - 4 * g[-2] + g[-3]) / (2 * h)
    return dt


#: Minimum admitted number of time steps for transgression quadrature.
MIN_TRANSGRESSION_STEPS = 64


def transgression(g0: K1Element, g1: K1Element, path: UnitaryHomotopy) -> Form:
    """Even transgression form of the odd Chern character along ``path``.

    Normalized consistently with ``odd_ch`` so that d(Tch) equals
    odd_ch(g1) - odd_ch(g0); on the circle only the degree-0 term
    (2 pi i)^{-1} integral of Tr(g_t^{-1} dg_t/dt) dt survives. Endpoints must
    match g0 and g1 to within 1e-8.
    """
    if k1_rank(g0) != k1_rank(g1):
        raise ValueError("endpoint ranks differ")
    if path.t_steps < MIN_TRANSGRESSION_STEPS:
        raise ValueError(f"need at least {MIN_TRANSGRESSION_STEPS} time steps")
    if path.rank != k1_rank(g0):
        raise ValueError("path rank does not match the endpoints")
    grid = path.grid_size
    for endpoint, sample in ((g0, path.samples[0]), (g1, path.samples[-1])):
        dev = np.max(np.abs(sample - k1_samples(endpoint, grid)))
        if dev > 1e-8:
            raise ValueError(f"path endpoint deviates from {endpoint!r} by {dev:.3e}")
    dt = _path_dt(path)
    integrand = np.einsum("tgij,tgij->tg", path.samples.conj(), dt)
    integral = _trapezoid(integrand, dx=1.0 / path.t_steps, axis=0)
    return circle_grid_form(0, integral.imag / TWO_PI)


def exactness_residual(mu: Form, g: K1Element) -> float:
    """Sup-norm defect of the exactness condition tying mu to g.

    Measures d(mu) minus the degree >= 3 part of odd_ch(g); on the circle
    catalog the character has no such part, so valid cocycles have closed
    (locally constant) mu.
    """
    if any(d % 2 for d in mu.degrees()):
        raise ValueError("mu must be an even-degree form")
    if mu.manifold != k1_manifold(g):
        raise ValueError(f"mu lives on {mu.manifold} but g lives on {k1_manifold(g)}")
    defect = exterior_derivative(mu) - odd_ch(g).drop_degree(1)
    return sup_norm(defect)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _key_str(key: GenKey) -> str:
    if isinstance(key, tuple):
        return f"({_key_str(key[0])})x({_key_str(key[1])})"
    return key


def form_to_json(f: Form) -> str:
    entries = []
    for key, c in sorted(f.atoms.items(), key=lambda kv: _key_str(kv[0])):
        coeff = f"{c.numerator}/{c.denominator}" if isinstance(c, Fraction) else c
        entries.append(
            {
                "degree": gen_degree(f.manifold, key),
                "kind": "atom",
                "generator": _key_str(key),
                "coefficient": coeff,
            }
        )
    for deg in sorted(f.grids):
        payload = f.grids[deg]
        arrs = payload if isinstance(payload, tuple) else (payload,)
        entries.append(
            {
                "degree": deg,
                "kind": "grid",
                "grid_size": f.grid_size,
                "samples": [a.tolist() for a in arrs],
            }
        )
    return json.dumps({"manifold": str(f.manifold), "components": entries})

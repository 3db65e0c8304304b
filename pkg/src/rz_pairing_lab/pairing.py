"""The R/Z-valued duality pairings and their well-definedness checks.

Three pairings are implemented on the catalog: the degree-one pairing (circle
eta against loop holonomy), the degree-two pairing (the 1/2 analytic constant
against a curvature integral), and the even K-theory pairing whose analytic
term is a closed-form table keyed by catalog data and whose topological term
runs through the forms engine. The relation residuals turn the additivity and
invariance claims into measurable numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .circlevals import CircleValue, circle_add, circle_dist, circle_eq, reduce_mod_z
from .eta import EtaResult, eta_circle_flat, reduced_eta
from .forms import (
    BottBundle,
    BoxBundle,
    BundleData,
    Circle,
    Form,
    GenKey,
    K1DirectSum,
    K1Element,
    K1GridUnitary,
    K1Identity,
    K1Winding,
    LineBundle,
    ModelManifold,
    Point,
    ProductManifold,
    Sphere,
    SumBundle,
    TensorBundle,
    Torus2,
    TrivialBundle,
    ch_bundle,
    constant_form,
    exactness_residual,
    gen_degree,
    integrate,
    k1_manifold,
    k1_rank,
    k1_winding,
    sup_norm,
    todd_form,
    unit_key,
    virtual_rank,
    wedge,
)

#: Exactness-condition slack admitted when validating cocycles.
EXACTNESS_TOL = 1e-8


class UnsupportedCycleError(ValueError):
    """The analytic closed-form table has no entry for this combination."""


# ---------------------------------------------------------------------------
# Catalog maps and pullbacks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityMap:
    space: ModelManifold


@dataclass(frozen=True)
class ConstantMap:
    """Map collapsing the domain to the basepoint of the codomain."""

    domain: ModelManifold
    codomain: ModelManifold


@dataclass(frozen=True)
class FactorProjection:
    domain: ProductManifold
    side: str = "left"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")


@dataclass(frozen=True)
class SelfMapDegree:
    """Degree-w self-map: theta -> w theta on the circle, or the degree-w
    self-map of the 2-sphere acting by w on the top generator."""

    space: ModelManifold
    w: int

    def __post_init__(self):
        ok = isinstance(self.space, Circle) or (
            isinstance(self.space, Sphere) and self.space.n == 2
        )
        if not ok:
            raise ValueError("degree-w self-maps are cataloged on Circle and Sphere(2) only")


CatalogMap = Union[IdentityMap, ConstantMap, FactorProjection, SelfMapDegree]


def map_domain(f: CatalogMap) -> ModelManifold:
    if isinstance(f, IdentityMap):
        return f.space
    if isinstance(f, ConstantMap):
        return f.domain
    if isinstance(f, FactorProjection):
        return f.domain
    return f.space


def map_codomain(f: CatalogMap) -> ModelManifold:
    if isinstance(f, IdentityMap):
        return f.space
    if isinstance(f, ConstantMap):
        return f.codomain
    if isinstance(f, FactorProjection):
        return f.domain.left if f.side == "left" else f.domain.right
    return f.space


def pullback_form(mu: Form, f: CatalogMap) -> Form:
    """Pullback of a catalog form along a catalog map."""
    if mu.manifold != map_codomain(f):
        raise ValueError(f"form lives on {mu.manifold}, map lands in {map_codomain(f)}")
    if isinstance(f, IdentityMap):
        return mu
    if isinstance(f, ConstantMap):
        # only the degree-0 part survives; evaluate it at the basepoint
        value = mu.atoms.get(unit_key(mu.manifold), Fraction(0))
        if 0 in mu.grids:
            g0 = mu.grids[0]
            base = g0[0] if g0.ndim == 1 else g0[0, 0]
            value = float(value) + float(base)
        return constant_form(f.domain, value)
    if isinstance(f, FactorProjection):
        if mu.grids:
            raise ValueError("factor pullbacks support atom forms only")
        other_unit = unit_key(f.domain.right if f.side == "left" else f.domain.left)
        atoms: Dict[GenKey, object] = {}
        for key, c in mu.atoms.items():
            atoms[(key, other_unit) if f.side == "left" else (other_unit, key)] = c
        return Form(f.domain, atoms)
    # degree-w self-map
    if isinstance(f.space, Sphere):
        if mu.grids:
            raise ValueError("sphere forms are atom-only")
        atoms = dict(mu.atoms)
        if "v" in atoms:
            atoms["v"] = atoms["v"] * f.w
        return Form(f.space, atoms)
    atoms = dict(mu.atoms)
    if "s" in atoms:
        atoms["s"] = atoms["s"] * f.w
    grids: Dict[int, object] = {}
    if mu.grids:
        size = mu.grid_size
        idx = (f.w * np.arange(size)) % size
        if 0 in mu.grids:
            grids[0] = mu.grids[0][idx]
        if 1 in mu.grids:
            grids[1] = f.w * mu.grids[1][idx]
    return Form(f.space, atoms, grids)


def pullback_bundle(V: BundleData, f: CatalogMap) -> BundleData:
    """Pullback of a catalog bundle along a catalog map."""
    if isinstance(f, IdentityMap):
        return V
    if isinstance(f, ConstantMap):
        return TrivialBundle(virtual_rank(V))
    if isinstance(f, FactorProjection):
        if f.side == "left":
            return BoxBundle(V, TrivialBundle(1))
        return BoxBundle(TrivialBundle(1), V)
    if isinstance(V, TrivialBundle):
        return V
    if isinstance(V, LineBundle) and isinstance(f.space, Sphere):
        return LineBundle(f.w * V.c1)
    raise UnsupportedCycleError(f"no catalog pullback of {V} along a degree-{f.w} self-map")


def pullback_k1(g: K1Element, f: CatalogMap) -> K1Element:
    """Pullback of a catalog unitary along a catalog map."""
    if k1_manifold(g) != map_codomain(f):
        raise ValueError(f"unitary lives on {k1_manifold(g)}, map lands in {map_codomain(f)}")
    if isinstance(f, IdentityMap):
        return g
    if isinstance(f, ConstantMap):
        # constant pullbacks are nullhomotopic; only rank and class survive
        return K1Identity(k1_rank(g), f.domain)
    if isinstance(f, FactorProjection):
        if isinstance(g, K1Identity):
            return K1Identity(g.rank, f.domain)
        raise UnsupportedCycleError(
            f"pullback of {g!r} along a factor projection is not representable "
            "in the catalog"
        )
    if isinstance(f.space, Sphere):
        return g  # only identities live on spheres
    if isinstance(g, K1Identity):
        return K1Identity(g.rank, f.space)
    if isinstance(g, K1Winding):
        return K1Winding(g.k * f.w)
    if isinstance(g, K1DirectSum):
        return K1DirectSum(tuple(pullback_k1(p, f) for p in g.parts))
    size = g.samples.shape[0]
    idx = (f.w * np.arange(size)) % size
    cls = None if g.winding_class is None else g.winding_class * f.w
    return K1GridUnitary(g.samples[idx], cls)


# ---------------------------------------------------------------------------
# Cocycles, cycles, reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RZK0Cocycle:
    """Triple (g, flat pair, mu) with the exactness condition enforced.

    The flat connection pair is determined by ``g`` and carried implicitly.
    ``reduced`` opts into the zero-virtual-trace convention: for identity g,
    the degree-0 part of mu must vanish.
    """

    g: K1Element
    mu: Form
    base: ModelManifold
    reduced: bool = False

    def __post_init__(self):
        if self.mu.manifold != self.base:
            raise ValueError(f"mu lives on {self.mu.manifold}, base is {self.base}")
        if k1_manifold(self.g) != self.base:
            raise ValueError(f"g lives on {k1_manifold(self.g)}, base is {self.base}")
        res = exactness_residual(self.mu, self.g)
        if res > EXACTNESS_TOL:
            raise ValueError(f"exactness condition violated: residual {res:.3e}")
        if self.reduced and isinstance(self.g, K1Identity):
            if sup_norm(self.mu.component(0)) > 1e-12:
                raise ValueError(
                    "reduced cocycles with identity g must have zero virtual "
                    "trace: the degree-0 part of mu has to vanish"
                )


@dataclass(frozen=True)
class GeometricKCycle:
    """Even-dimensional catalog cycle (M, E, f)."""

    M: ModelManifold
    E: BundleData
    f: CatalogMap

    def __post_init__(self):
        if self.M.dim % 2 != 0:
            raise ValueError(f"cycle manifolds must be even-dimensional, got {self.M}")
        if map_domain(self.f) != self.M:
            raise ValueError(f"map domain {map_domain(self.f)} does not match {self.M}")
        ch_bundle(self.E, self.M)  # raises when the bundle does not fit M


@dataclass(frozen=True)
class PairingReport:
    """One pairing evaluation: analytic term, topological term, combined value."""

    analytic_term: CircleValue
    topological_term: object
    value: CircleValue
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        expected = circle_add(self.analytic_term, reduce_mod_z(-self.topological_term))
        if not circle_eq(self.value, expected, 0.0):
            raise ValueError("report value does not match its two terms")

    def to_json(self) -> str:
        return json.dumps(
            {
                "analytic_term": self.analytic_term.render(),
                "topological_term": float(self.topological_term),
                "value": self.value.render(),
                "diagnostics": {k: str(v) for k, v in sorted(self.diagnostics.items())},
            }
        )


def _combine(aps: EtaResult, topo, diagnostics: Dict[str, object]) -> PairingReport:
    value = circle_add(aps.reduced, reduce_mod_z(-topo))
    return PairingReport(aps.reduced, topo, value, diagnostics)


# ---------------------------------------------------------------------------
# Degree-one and degree-two pairings
# ---------------------------------------------------------------------------


def pair_h1(a_class, loop_winding: int) -> PairingReport:
    """Circle pairing: reduced twisted eta minus the pullback holonomy.

    The pullback holonomy is a' = loop_winding * a_class mod Z. For a' in
    (0, 1) the value is 1 - 2a' mod Z; a' = 0 falls back to the untwisted
    operator (eta 0, kernel 1), an extension flagged in diagnostics.
    """
    if not isinstance(loop_winding, Integral) or isinstance(loop_winding, bool):
        raise TypeError("loop winding must be an integer")
    if isinstance(a_class, (Fraction, Integral)) and not isinstance(a_class, bool):
        a1 = reduce_mod_z(Fraction(a_class) * loop_winding)
        pulled = a1.frac
    else:
        a1 = reduce_mod_z(float(a_class) * loop_winding)
        pulled = a1.representative
    diagnostics: Dict[str, object] = {"pulled_holonomy": a1.render()}
    if a1.representative == 0.0:
        aps = reduced_eta(0, 1)
        topo = Fraction(0)
        diagnostics["analytic_provenance"] = "closed-form:untwisted-circle"
        diagnostics["flags"] = "untwisted-extension"
    else:
        aps = eta_circle_flat(pulled)
        topo = pulled
        diagnostics["analytic_provenance"] = "closed-form:twisted-circle"
    return _combine(aps, topo, diagnostics)


def pair_h2(b, cycle_degree: int = 1) -> PairingReport:
    """Surface pairing: the constant 1/2 analytic term minus deg * b mod Z.

    ``b`` is the normalized curvature integral of the pulled-back class and
    ``cycle_degree`` the degree of the map from the surface to the 2-sphere.
    """
    if not isinstance(cycle_degree, Integral) or isinstance(cycle_degree, bool):
        raise TypeError("cycle degree must be an integer")
    aps = reduced_eta(0, 1)
    if isinstance(b, (Fraction, Integral)) and not isinstance(b, bool):
        topo = Fraction(b) * cycle_degree
    else:
        topo = float(b) * cycle_degree
    return _combine(aps, topo, {"analytic_provenance": "closed-form:identity-glued-surface"})


# ---------------------------------------------------------------------------
# The K0 pairing
# ---------------------------------------------------------------------------


def _analytic_table(cycle: GeometricKCycle, h: K1Element) -> Tuple[EtaResult, str]:
    """Closed-form table for the analytic term, keyed by catalog data.

    Entries exist for nullhomotopic gluings over cycles with nonnegative
    integer index I = integral of ch(E) Td(M): eta vanishes and the kernel is
    rank(h) * I copies of the circle-operator kernel. Anything else raises
    rather than guessing spectral data.
    """
    try:
        w = k1_winding(h)
    except ValueError as exc:
        raise UnsupportedCycleError(
            f"cannot decide the gluing class of {h!r}: {exc}"
        ) from exc
    if w != 0:
        raise UnsupportedCycleError(
            f"no closed form tabulated for gluing class winding={w} on "
            f"({cycle.M}, {cycle.E}); the table covers nullhomotopic gluings only"
        )
    index = integrate(wedge(ch_bundle(cycle.E, cycle.M), todd_form(cycle.M)), cycle.M)
    if isinstance(index, Fraction):
        if index.denominator != 1:
            raise UnsupportedCycleError(
                f"index {index} of ({cycle.M}, {cycle.E}) is not an integer"
            )
        index_int = int(index)
    else:
        index_int = round(index)
        if abs(index - index_int) > 1e-9:
            raise UnsupportedCycleError(
                f"index {index!r} of ({cycle.M}, {cycle.E}) is not an integer"
            )
    if index_int < 0:
        raise UnsupportedCycleError(
            f"no closed form tabulated for negative index {index_int} on "
            f"({cycle.M}, {cycle.E}); only I >= 0 kernels are known"
        )
    kernel = k1_rank(h) * index_int
    if isinstance(cycle.M, Sphere) and isinstance(cycle.E, BottBundle):
        provenance = "table:sphere-bott-trivial-gluing"
    elif isinstance(cycle.M, Point):
        provenance = "table:point-cycle"
    else:
        provenance = "table:index-kernel-rule"
    return EtaResult(Fraction(0), kernel), provenance


def analytic_term_k0(cycle: GeometricKCycle, g: K1Element) -> EtaResult:
    """Analytic term of the K0 pairing for a tabulated (cycle, gluing) pair."""
    result, _ = _analytic_table(cycle, g)
    return result


def _pair_parts(x: RZK0Cocycle, c: GeometricKCycle):
    if x.base != map_codomain(c.f):
        raise ValueError(f"cocycle base {x.base} does not match map codomain {map_codomain(c.f)}")
    h = pullback_k1(x.g, c.f)
    aps, provenance = _analytic_table(c, h)
    pulled = pullback_form(x.mu, c.f)
    integrand = wedge(wedge(pulled, ch_bundle(c.E, c.M)), todd_form(c.M))
    topo = integrate(integrand, c.M)
    return aps, topo, provenance


def pair_k0(x: RZK0Cocycle, c: GeometricKCycle) -> PairingReport:
    """Even pairing: tabulated reduced eta minus the characteristic integral."""
    aps, topo, provenance = _pair_parts(x, c)
    return _combine(aps, topo, {"analytic_provenance": provenance})


# ---------------------------------------------------------------------------
# Relation residuals and module structure
# ---------------------------------------------------------------------------


def k0_relation_residual(
    e1: RZK0Cocycle,
    e2: RZK0Cocycle,
    e3: RZK0Cocycle,
    tch: Form,
    c: GeometricKCycle,
) -> float:
    """Additivity defect of the pairing over a relation triple.

    The middle cocycle's unitary must be homotopic to the direct sum of the
    outer two, which the catalog verifies through ranks and winding numbers;
    ``tch`` is the transgression form tying the mu's together. Returns the
    circular distance between pairing e2 and the sum of pairings e1 and e3.
    """
    if any(d % 2 for d in tch.degrees()):
        raise ValueError("transgression form must be even-degree")
    if k1_rank(e2.g) != k1_rank(e1.g) + k1_rank(e3.g):
        raise ValueError(
            "relation requires rank(g2) = rank(g1) + rank(g3), got "
            f"{k1_rank(e2.g)} vs {k1_rank(e1.g)} + {k1_rank(e3.g)}"
        )
    if k1_winding(e2.g) != k1_winding(e1.g) + k1_winding(e3.g):
        raise ValueError(
            "relation requires winding(g2) = winding(g1) + winding(g3), got "
            f"{k1_winding(e2.g)} vs {k1_winding(e1.g)} + {k1_winding(e3.g)}"
        )
    lhs = pair_k0(e2, c).value
    rhs = circle_add(pair_k0(e1, c).value, pair_k0(e3, c).value)
    return circle_dist(lhs, rhs)


@dataclass(frozen=True)
class DirectSumRelation:
    """(M, E1 + E2, f) against the sum of the two summand cycles."""

    cycle: GeometricKCycle
    e1: BundleData
    e2: BundleData


@dataclass(frozen=True)
class DisjointUnionRelation:
    """Pairing over a disjoint union against the sum of pairings."""

    c1: GeometricKCycle
    c2: GeometricKCycle


@dataclass(frozen=True)
class BundleModification:
    """(M, E, f) against (M x S^{2p}, bott x E, f o projection)."""

    cycle: GeometricKCycle
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("modification order must be >= 1")


KHomologyRelation = Union[DirectSumRelation, DisjointUnionRelation, BundleModification]


def modified_cycle(c: GeometricKCycle, p: int) -> GeometricKCycle:
    """Bundle-modified cycle over M x S^{2p} with trivial sphere bundle."""
    m2 = ProductManifold(c.M, Sphere(2 * p))
    e2 = BoxBundle(c.E, BottBundle(p))
    if isinstance(c.f, IdentityMap):
        f2: CatalogMap = FactorProjection(m2, "left")
    elif isinstance(c.f, ConstantMap):
        f2 = ConstantMap(m2, c.f.codomain)
    else:
        raise UnsupportedCycleError(
            f"bundle modification along {type(c.f).__name__} is not in the catalog"
        )
    return GeometricKCycle(m2, e2, f2)


def khomology_residual(x: RZK0Cocycle, relation: KHomologyRelation) -> float:
    """Defect of one K-homology relation under the pairing with ``x``."""
    if isinstance(relation, DirectSumRelation):
        c = relation.cycle
        lhs = pair_k0(x, GeometricKCycle(c.M, SumBundle(relation.e1, relation.e2), c.f)).value
        rhs = circle_add(
            pair_k0(x, GeometricKCycle(c.M, relation.e1, c.f)).value,
            pair_k0(x, GeometricKCycle(c.M, relation.e2, c.f)).value,
        )
        return circle_dist(lhs, rhs)
    if isinstance(relation, DisjointUnionRelation):
        aps1, topo1, _ = _pair_parts(x, relation.c1)
        aps2, topo2, _ = _pair_parts(x, relation.c2)
        if isinstance(aps1.eta, Fraction) and isinstance(aps2.eta, Fraction):
            eta_sum = aps1.eta + aps2.eta
        else:
            eta_sum = float(aps1.eta) + float(aps2.eta)
        union_aps = EtaResult(eta_sum, aps1.kernel_dim + aps2.kernel_dim)
        if isinstance(topo1, Fraction) and isinstance(topo2, Fraction):
            topo = topo1 + topo2
        else:
            topo = float(topo1) + float(topo2)
        lhs = circle_add(union_aps.reduced, reduce_mod_z(-topo))
        rhs = circle_add(pair_k0(x, relation.c1).value, pair_k0(x, relation.c2).value)
        return circle_dist(lhs, rhs)
    if isinstance(relation, BundleModification):
        original = pair_k0(x, relation.cycle).value
        modified = pair_k0(x, modified_cycle(relation.cycle, relation.p)).value
        return circle_dist(original, modified)
    raise TypeError(f"not a K-homology relation: {relation!r}")


def module_action(V: BundleData, x: RZK0Cocycle) -> RZK0Cocycle:
    """Module multiplication of a catalog bundle on a cocycle.

    The new mu is ch(V) wedge mu; trivial bundles of rank r additionally
    replace g by r diagonal copies, while line and Bott factors act on mu
    only (the catalog has no unitary twist for them).
    """
    chv = ch_bundle(V, x.base)
    mu2 = wedge(chv, x.mu)
    if isinstance(V, TrivialBundle):
        if V.rank < 1:
            raise ValueError("module action by the zero bundle is not in the catalog")
        g2 = x.g if V.rank == 1 else K1DirectSum((x.g,) * V.rank)
    else:
        g2 = x.g
    return RZK0Cocycle(g2, mu2, x.base, reduced=x.reduced)


def cap_product(V: BundleData, c: GeometricKCycle) -> GeometricKCycle:
    """Cap product: (M, E, f) becomes (M, f*V tensor E, f)."""
    return GeometricKCycle(c.M, TensorBundle(pullback_bundle(V, c.f), c.E), c.f)


def ch_rq(x: RZK0Cocycle, k: int, tch_path: Form) -> Form:
    """Even-form representative (1/k) Tch - mu of the rational-coefficient class.

    Requires a torsion-trivializable unitary: the catalog admits winding 0
    (and identities) with trivializing multiplier ``k``.
    """
    if not isinstance(k, Integral) or isinstance(k, bool) or k < 1:
        raise ValueError(f"multiplier must be a positive integer, got {k!r}")
    w = k1_winding(x.g)
    if w != 0:
        raise ValueError(
            f"element with winding {w} is not torsion: no positive multiple of "
            "it is homotopic to the identity"
        )
    if tch_path.manifold != x.base:
        raise ValueError("transgression form must live on the cocycle base")
    if any(d % 2 for d in tch_path.degrees()):
        raise ValueError("transgression form must be even-degree")
    return tch_path.scale(Fraction(1, k)) - x.mu

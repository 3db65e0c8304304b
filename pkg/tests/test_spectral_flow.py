from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rz_pairing_lab.spectra import circle_twisted_spectrum
from rz_pairing_lab.spectral_flow import (
    CircleTwistPath,
    ConstantFamily,
    ResolutionError,
    TabulatedFamily,
    affine_twist,
    reversed_family,
    spectral_flow,
    subpath,
)


def crossing_oracle(path: CircleTwistPath) -> int:
    """Oracle: enumerate solutions of n + a(s) = 0 segment by segment with the
    sign of da/ds, counting endpoint zeros as positive."""
    import math

    flow = 0
    for (s0, a0), (s1, a1) in zip(path.breakpoints, path.breakpoints[1:]):
        if a1 > a0:
            # upward crossings: branches entering [ -a1, -a0 ) from below
            flow += len([n for n in range(math.ceil(-a1), math.ceil(-a0))])
        elif a0 > a1:
            flow -= len([n for n in range(math.ceil(-a0), math.ceil(-a1))])
    return flow


def test_constant_family_is_flat():
    fam = ConstantFamily(circle_twisted_spectrum(0.25, 10))
    assert spectral_flow(fam) == 0


def test_single_upward_wind():
    assert spectral_flow(affine_twist(0.25, 1)) == 1


def test_two_downward_crossings():
    assert spectral_flow(affine_twist(0.25, -2)) == -2


def test_crossing_oracle_agrees_on_piecewise_paths():
    path = CircleTwistPath(((0.0, 0.25), (0.4, 1.9), (0.7, -0.6), (1.0, 0.3)), grid=512)
    assert spectral_flow(path) == crossing_oracle(path)


@given(
    st.fractions(min_value=0, max_value=Fraction(63, 64), max_denominator=64),
    st.integers(min_value=-6, max_value=6),
)
def test_integer_winding_recovers_w(a0, w):
    assert spectral_flow(affine_twist(float(a0), w, grid=64)) == w


def test_resolution_error_on_coarse_grid():
    with pytest.raises(ResolutionError):
        spectral_flow(affine_twist(0.25, 3, grid=4))


def test_zero_at_start_counts_positive():
    # branch n = 0 starts at zero; moving up it never crosses, moving down it does
    assert spectral_flow(affine_twist(0.0, 1)) == 1  # n = -1 crosses at s = 1
    assert spectral_flow(affine_twist(0.0, -1)) == -1


@settings(max_examples=50)
@given(
    st.lists(
        st.fractions(min_value=-3, max_value=3, max_denominator=16),
        min_size=2,
        max_size=5,
    )
)
def test_reverse_negates_flow(a_values):
    knots = [i / (len(a_values) - 1) for i in range(len(a_values))]
    path = CircleTwistPath(tuple(zip(knots, map(float, a_values))), grid=1024)
    assert spectral_flow(reversed_family(path)) == -spectral_flow(path)


@settings(max_examples=50)
@given(
    st.lists(
        st.fractions(min_value=-2, max_value=2, max_denominator=8),
        min_size=3,
        max_size=5,
    )
)
def test_concatenation_additivity(a_values):
    knots = [i / (len(a_values) - 1) for i in range(len(a_values))]
    path = CircleTwistPath(tuple(zip(knots, map(float, a_values))), grid=1024)
    first = spectral_flow(subpath(path, 0.0, 0.5))
    second = spectral_flow(subpath(path, 0.5, 1.0))
    assert first + second == spectral_flow(path)


def test_tabulated_family_matches_twist_path():
    from rz_pairing_lab.spectra import collate_spectrum

    def unreduced_spectrum(a, cutoff=30):
        return collate_spectrum([(n + a, 1) for n in range(-cutoff, cutoff + 1)])

    # winding by 1.5 from 0.25: one branch (n = -1) crosses upward
    samples = tuple(
        (s, unreduced_spectrum(0.25 + 1.5 * s)) for s in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    )
    fam = TabulatedFamily(samples)
    assert spectral_flow(fam) == 1
    assert spectral_flow(fam) == spectral_flow(affine_twist(0.25, 1.5))


def test_tabulated_family_rejects_count_mismatch():
    samples = (
        (0.0, circle_twisted_spectrum(0.25, 10)),
        (1.0, circle_twisted_spectrum(0.25, 11)),
    )
    with pytest.raises(ValueError):
        spectral_flow(TabulatedFamily(samples))


def test_breakpoint_validation():
    with pytest.raises(ValueError):
        CircleTwistPath(((0.0, 0.1),))
    with pytest.raises(ValueError):
        CircleTwistPath(((0.1, 0.1), (1.0, 0.2)))
    with pytest.raises(ValueError):
        CircleTwistPath(((0.0, 0.1), (0.5, 0.2), (0.5, 0.3), (1.0, 0.4)))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rz_pairing_lab.spectra import (
    BlockOperatorData,
    Spectrum,
    circle_twisted_spectrum,
    collate_spectrum,
    eta_partial_sum,
    sharp_product_spectrum,
    spectrum_from_csv,
)


def block_matrix_eigenvalues(p: BlockOperatorData, a_spec: Spectrum) -> np.ndarray:
    """Oracle: assemble the full block matrix on the truncated basis and
    diagonalize it, independently of the production collation rule."""
    lams = np.concatenate([np.repeat(v, m) for v, m in p.positive_eigs]) if p.positive_eigs else np.zeros(0)
    n_lam = lams.size
    dim_plus = p.h_plus + n_lam
    dim_minus = p.h_minus + n_lam
    P = np.zeros((dim_minus, dim_plus))
    P[:n_lam, :n_lam] = np.diag(np.sqrt(lams))
    modes = list(a_spec.eigenvalues)
    if a_spec.kernel_dim:
        modes.append((0.0, a_spec.kernel_dim))
    out = []
    for k, mult in modes:
        block = np.block(
            [
                [k * np.eye(dim_plus), P.T],
                [P, -k * np.eye(dim_minus)],
            ]
        )
        vals = np.linalg.eigvalsh(block)
        out.extend(list(vals) * mult)
    return np.sort(np.asarray(out))


def test_circle_spectrum_quarter():
    spec = circle_twisted_spectrum(0.25, 2)
    assert spec.kernel_dim == 0
    assert [v for v, _ in spec.eigenvalues] == [-1.75, -0.75, 0.25, 1.25, 2.25]
    assert all(m == 1 for _, m in spec.eigenvalues)


def test_circle_spectrum_untwisted_kernel():
    spec = circle_twisted_spectrum(0.0, 1)
    assert spec.kernel_dim == 1
    assert [v for v, _ in spec.eigenvalues] == [-1.0, 1.0]


def test_circle_spectrum_half():
    spec = circle_twisted_spectrum(0.5, 1)
    assert [v for v, _ in spec.eigenvalues] == [-0.5, 0.5, 1.5]


def test_circle_spectrum_domain_errors():
    with pytest.raises(ValueError):
        circle_twisted_spectrum(1.0, 5)
    with pytest.raises(ValueError):
        circle_twisted_spectrum(-0.1, 5)
    with pytest.raises(ValueError):
        circle_twisted_spectrum(0.25, 0)


@given(
    st.floats(min_value=0.0, max_value=0.999, allow_nan=False),
    st.integers(min_value=1, max_value=200),
)
def test_circle_spectrum_mode_count(a, cutoff):
    assert circle_twisted_spectrum(a, cutoff).mode_count == 2 * cutoff + 1


def test_spectrum_rejects_zero_entries():
    with pytest.raises(ValueError):
        Spectrum(((0.0, 1),))
    with pytest.raises(ValueError):
        Spectrum(((1.0, 0),))
    with pytest.raises(ValueError):
        Spectrum(((2.0, 1), (1.0, 1)))


def test_sharp_product_single_lambda():
    p = BlockOperatorData(h_plus=1, h_minus=0, positive_eigs=((4.0, 1),))
    spec = sharp_product_spectrum(p, Spectrum(((1.0, 1),)))
    values = [(v, m) for v, m in spec.eigenvalues]
    s5 = math.sqrt(5.0)
    assert spec.kernel_dim == 0
    assert values == [(-s5, 1), (1.0, 1), (s5, 1)]


def test_sharp_product_kernel_only():
    p = BlockOperatorData(h_plus=1, h_minus=0)
    spec = sharp_product_spectrum(p, Spectrum((), kernel_dim=1))
    assert spec.kernel_dim == 1
    assert spec.eigenvalues == ()


def test_sharp_product_collated_example():
    p = BlockOperatorData(h_plus=2, h_minus=1, positive_eigs=((1.0, 1),))
    a_spec = Spectrum(((-1.0, 1), (1.0, 1)))
    spec = sharp_product_spectrum(p, a_spec)
    s2 = math.sqrt(2.0)
    assert spec.kernel_dim == 0
    assert spec.eigenvalues == ((-s2, 2), (-1.0, 3), (1.0, 3), (s2, 2))
    oracle = block_matrix_eigenvalues(p, a_spec)
    assert np.allclose(spec.expanded(), oracle, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=3),
    st.integers(min_value=0, max_value=3),
    st.lists(st.floats(min_value=0.1, max_value=50.0), max_size=5),
    st.lists(
        st.floats(min_value=-20.0, max_value=20.0).filter(lambda v: abs(v) > 1e-3),
        max_size=6,
    ),
    st.integers(min_value=0, max_value=2),
)
def test_sharp_product_matches_block_matrix(h_plus, h_minus, lams, modes, kernel):
    eigs = tuple((v, i % 2 + 1) for i, v in enumerate(sorted(set(lams))))
    p = BlockOperatorData(h_plus=h_plus, h_minus=h_minus, positive_eigs=eigs)
    a_spec = collate_spectrum([(v, 1) for v in modes], kernel_dim=kernel)
    spec = sharp_product_spectrum(p, a_spec)
    oracle = block_matrix_eigenvalues(p, a_spec)
    assert np.allclose(spec.expanded(), oracle, atol=1e-8)


def test_sharp_paired_part_cancels_at_every_s():
    # the +-sqrt(k^2 + lambda) pairs drop out of the eta sum identically
    p = BlockOperatorData(h_plus=0, h_minus=0, positive_eigs=((1.0, 1), (4.0, 2)))
    a_spec = circle_twisted_spectrum(0.25, 30)
    spec = sharp_product_spectrum(p, a_spec)
    for s in (0.0, 0.5, 1.0, 2.0):
        assert eta_partial_sum(spec, s) == 0.0


def test_eta_partial_sum_symmetric_zero():
    assert eta_partial_sum(Spectrum(((-1.0, 1), (1.0, 1))), 3.7) == 0.0


def test_eta_partial_sum_single_positive():
    assert eta_partial_sum(Spectrum(((0.25, 1),)), 0.0) == 1.0


def test_eta_partial_sum_hurwitz_oracle():
    import mpmath

    spec = circle_twisted_spectrum(0.25, 1000)
    ours = eta_partial_sum(spec, 2.0)
    oracle = float(mpmath.zeta(2, 0.25) - mpmath.zeta(2, 0.75))
    assert abs(ours - oracle) <= 1e-6


def test_eta_partial_sum_additive_over_union():
    a = circle_twisted_spectrum(0.25, 40)
    b = circle_twisted_spectrum(0.5, 25)
    union = a.union(b)
    assert union.mode_count == a.mode_count + b.mode_count
    for s in (0.0, 1.5):
        total = eta_partial_sum(a, s) + eta_partial_sum(b, s)
        assert math.isclose(eta_partial_sum(union, s), total, rel_tol=0, abs_tol=1e-12)


def test_block_operator_validation():
    with pytest.raises(ValueError):
        BlockOperatorData(h_plus=-1, h_minus=0)
    with pytest.raises(ValueError):
        BlockOperatorData(h_plus=0, h_minus=0, positive_eigs=((-1.0, 1),))
    assert BlockOperatorData(h_plus=3, h_minus=1).index_plus == 2


def test_csv_round_trip():
    spec = circle_twisted_spectrum(0.25, 3)
    text = spec.to_csv()
    assert text.splitlines()[0] == "kernel_dim,0"
    again = spectrum_from_csv(text)
    assert again == spec

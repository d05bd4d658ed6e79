import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pstlattice.design import design_separations
from pstlattice.lattice import (
    PST,
    ChannelSpec,
    CouplingLaw,
    Custom,
    Geometry,
    Hamiltonian,
    Harmonic,
    Uniform,
    ValidationError,
    build_hamiltonian,
    build_hamiltonian_from_geometry,
)

LAW = CouplingLaw(19.5, 0.152)


def test_pst_n9_first_coupling():
    h = build_hamiltonian(ChannelSpec(9, 10.0, PST(math.pi / 20)))
    assert h.couplings[0, 1] == pytest.approx(math.pi / 20 * math.sqrt(8), rel=1e-14)
    assert h.couplings[0, 1] == pytest.approx(0.4443, abs=1e-4)
    assert np.all(h.diagonal == 0)


def test_pst_two_sites():
    h = build_hamiltonian(ChannelSpec(2, 1.0, PST(1.0)))
    np.testing.assert_array_equal(h.couplings, [[0.0, 1.0], [1.0, 0.0]])


def test_harmonic_profile_ends():
    c = build_hamiltonian(ChannelSpec(9, 10.0, Harmonic(0.3))).nn_couplings()
    assert c[0] == pytest.approx(0.3)
    assert c[-1] == pytest.approx(0.3 * math.sqrt(8))
    assert c[-1] == pytest.approx(0.8485, abs=1e-4)


def test_uniform_and_custom():
    assert np.all(ChannelSpec(5, 1.0, Uniform(0.56)).couplings() == 0.56)
    np.testing.assert_array_equal(ChannelSpec(3, 1.0, Custom((1, 2))).couplings(), [1.0, 2.0])


def test_single_site_channel_is_trivial():
    h = build_hamiltonian(ChannelSpec(1, 1.0, PST(1.0)))
    assert h.size == 1
    assert h.couplings[0, 0] == 0


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(n_sites=3, length_cm=1.0, profile=Custom((1.0,))), "profile.couplings"),
        (dict(n_sites=3, length_cm=0.0, profile=PST(1.0)), "length_cm"),
        (dict(n_sites=3, length_cm=-2.0, profile=PST(1.0)), "length_cm"),
        (dict(n_sites=0, length_cm=1.0, profile=PST(1.0)), "n_sites"),
        (dict(n_sites=3, length_cm=1.0, profile=Uniform(-1.0)), "profile.c"),
        (dict(n_sites=3, length_cm=1.0, profile=Custom((1.0, -1.0))), "profile.couplings"),
    ],
)
def test_invalid_spec_names_field(kwargs, field):
    with pytest.raises(ValidationError) as exc:
        ChannelSpec(**kwargs)
    assert exc.value.field == field


def test_law_and_geometry_validation():
    with pytest.raises(ValidationError):
        CouplingLaw(0.0, 0.1)
    with pytest.raises(ValidationError):
        CouplingLaw(1.0, -0.1)
    with pytest.raises(ValidationError):
        Geometry([10.0, 0.0])


def test_hamiltonian_rejects_gain_and_asymmetry():
    with pytest.raises(ValidationError):
        Hamiltonian(np.zeros((2, 2)), [0.1j, 0])
    with pytest.raises(ValidationError):
        Hamiltonian(np.array([[0.0, 1.0], [0.5, 0.0]]))


def test_hamiltonian_is_immutable():
    h = build_hamiltonian(ChannelSpec(3, 1.0, PST(1.0)))
    with pytest.raises(ValueError):
        h.couplings[0, 1] = 5.0


def test_geometry_single_gap_coupling():
    h = build_hamiltonian_from_geometry(Geometry([20.0]), LAW)
    assert h.couplings[0, 1] == pytest.approx(19.5 * math.exp(-3.04), rel=1e-14)
    assert h.couplings[0, 1] == pytest.approx(0.933, abs=5e-4)


def test_cutoff_above_alpha_zeroes_everything():
    h = build_hamiltonian_from_geometry(Geometry([5.0, 7.0, 9.0]), LAW, coupling_cutoff=20.0)
    assert not np.any(h.couplings)


def test_next_neighbour_ratio():
    h = build_hamiltonian_from_geometry(Geometry([21.9] * 3), LAW, coupling_cutoff=0.0)
    ratio = h.couplings[0, 2] / h.couplings[0, 1]
    assert ratio == pytest.approx(math.exp(-0.152 * 21.9), rel=1e-12)
    assert ratio == pytest.approx(0.036, abs=5e-4)
    assert ratio <= 0.038


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.floats(1e-3, 10.0))
def test_pst_profile_is_palindromic(n, c0):
    c = build_hamiltonian(ChannelSpec(n, 1.0, PST(c0))).nn_couplings()
    np.testing.assert_array_equal(c, c[::-1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(5.0, 40.0), min_size=2, max_size=12))
def test_geometry_rows_decrease_with_band_distance(seps):
    h = build_hamiltonian_from_geometry(Geometry(seps), LAW, coupling_cutoff=0.0)
    n = h.size
    for k in range(n):
        right = h.couplings[k, k + 1:]
        left = h.couplings[k, :k][::-1]
        assert np.all(np.diff(right) < 0)
        assert np.all(np.diff(left) < 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 20), st.floats(1.0, 20.0))
def test_geometry_nn_only_matches_direct_build(n, length):
    spec = ChannelSpec(n, length, PST(math.pi / (2 * length)))
    geom = design_separations(spec.couplings(), LAW)
    direct = build_hamiltonian(spec).couplings
    # keep only the nearest-neighbour band
    nn_min = np.min(spec.couplings())
    x = geom.positions()
    next_nn = LAW.alpha * np.exp(-LAW.beta * (x[2:] - x[:-2])) if n > 2 else np.array([0.0])
    cutoff = 0.5 * (nn_min + next_nn.max()) if n > 2 else 0.0
    if n > 2 and next_nn.max() >= nn_min:
        return
    via_geom = build_hamiltonian_from_geometry(geom, LAW, coupling_cutoff=cutoff).couplings
    np.testing.assert_allclose(via_geom, direct, rtol=1e-10, atol=0)

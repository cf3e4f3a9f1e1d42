"""Catalog self-consistency: every stored fact is recomputed here."""

import math

import numpy as np
import pytest

from lpstab.catalog import CATALOG, get, rotating_frame
from lpstab.errors import InputError
from lpstab.linalg import mat_norm
from lpstab.lognorm import INF, NAMED, ONE, TWO, mu
from lpstab.periodic import validate_periodicity


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_entries_are_periodic(name):
    entry = CATALOG[name]()
    assert validate_periodicity(entry.system) <= 1e-9
    assert entry.name and entry.description


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_closed_transition_solves_the_ode(name):
    # d/dt Phi(t, s) = A(t) Phi(t, s) and Phi(s, s) = I, checked by central
    # differences at scattered times
    entry = CATALOG[name]()
    if entry.transition is None:
        pytest.skip("no closed form stored")
    sysd = entry.system
    h = 1e-6
    for s in (sysd.t0, sysd.t0 + 0.4 * sysd.period):
        eye = entry.transition(s, s)
        assert np.abs(eye - np.eye(sysd.n)).max() <= 1e-12
        for t in (s + 0.3, s + 1.1, s + 2.9):
            dphi = (entry.transition(t + h, s) - entry.transition(t - h, s)) / (2.0 * h)
            want = sysd.matrix(t) @ entry.transition(t, s)
            scale = 1.0 + float(np.abs(want).max())
            assert np.abs(dphi - want).max() <= 1e-5 * scale, (name, s, t)


def test_rotating_frame_notes():
    for beta in (0.25, 1.0, 1.5):
        entry = rotating_frame(beta)
        sysd = entry.system
        for t in (0.0, 0.9, 2.4):
            A = sysd.matrix(t)
            assert mu(A, TWO) == pytest.approx(entry.notes["mu_two"], abs=1e-12)
            assert mu(-A, TWO) == pytest.approx(entry.notes["mu_two_reversed"], abs=1e-12)
        lo, hi = sorted(entry.notes["fce_real_parts"])
        assert (lo, hi) == (min(beta - 1.0, -1.0), max(beta - 1.0, -1.0))


def test_rotating_frame_rate_norm():
    # |A'(t)|_2 is the constant beta: A(t) = -I + beta R(t) with R a rotation
    # of the projector, so the derivative has both singular values beta/2 * 2
    h = 1e-6
    for beta in (0.5, 1.5):
        sysd = rotating_frame(beta).system
        for t in (0.0, math.pi / 4.0, 1.9):
            dA = (sysd.matrix(t + h) - sysd.matrix(t - h)) / (2.0 * h)
            assert mat_norm(dA, TWO) == pytest.approx(beta, abs=1e-4)
        assert rotating_frame(beta).notes["rate_norm_two"] == beta


def test_strong_coupling_notes():
    entry = CATALOG["strong_coupling"]()
    sysd = entry.system
    for t in (0.0, 0.2, 0.45):
        A = sysd.matrix(t)
        assert np.trace(A) == pytest.approx(entry.notes["trace"], abs=1e-12)
        assert np.abs(A - A.T).max() == 0.0


def test_jordan_notes():
    entry = CATALOG["lti_jordan_marginal"]()
    A = entry.system.matrix(0.0)
    assert mu(A, ONE) == entry.notes["mu_one"]
    assert mu(A, INF) == entry.notes["mu_inf"]
    assert mu(A, TWO) == pytest.approx(entry.notes["mu_two"], abs=1e-12)
    assert mu(-A, TWO) == pytest.approx(entry.notes["mu_reversed_two"], abs=1e-12)


def test_get_aliases_and_params():
    # example1/example2 are aliases for the two worked systems
    assert get("example1").name == get("rotating_frame").name
    assert get("example2").name == get("strong_coupling").name
    assert get("example1", {"beta": 3.0}).name == "rotating_frame(3)"
    assert get("lti_diag", {"a": -0.5, "b": -4.0}).notes["mu_all"] == -0.5


def test_get_rejects_bad_input():
    with pytest.raises(InputError, match="unknown"):
        get("does_not_exist")
    with pytest.raises(InputError):
        get("strong_coupling", {"beta": 2.0})
    with pytest.raises(InputError):
        get("rotating_frame", {"nope": 1.0})


def test_norm_names_cover_cli_surface():
    assert sorted(NAMED) == ["inf", "one", "two"]

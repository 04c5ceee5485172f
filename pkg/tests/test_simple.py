import math

import numpy as np
import pytest

from adiabatic.simple import (ModelError, Sector, StatePoint, adiabat_energy, check_concavity,
                              check_pressure_entropy_identity, forward_sector_contains, ideal_gas,
                              integrate_adiabat, integrate_adiabat_path, table_model, temperature,
                              van_der_waals)
from adiabatic.states import DomainError


def test_ideal_gas_adiabat_closed_form(gas):
    curve = integrate_adiabat(gas, StatePoint(1.0, (1.0,)), 8.0)
    assert curve.final_u == pytest.approx(8.0 ** (-2 / 3), rel=1e-6)
    # every sample lies on U V^(2/3) = const
    for v, u in curve.samples:
        assert u * v[0] ** (2 / 3) == pytest.approx(1.0, rel=1e-6)


def test_adiabat_path_independent_of_waypoints(gas):
    direct = integrate_adiabat(gas, StatePoint(1.0, (1.0,)), 8.0).final_u
    via = integrate_adiabat_path(gas, StatePoint(1.0, (1.0,)), [0.5, 3.0, 8.0]).final_u
    assert via == pytest.approx(direct, rel=1e-6)


def test_adiabat_target_outside_domain(gas):
    with pytest.raises(DomainError):
        integrate_adiabat(gas, StatePoint(1.0, (1.0,)), 5000.0)


def test_zero_length_adiabat(gas):
    assert integrate_adiabat(gas, StatePoint(2.0, (3.0,)), 3.0).final_u == 2.0


def test_sector_geometry(gas):
    x = StatePoint(1.0, (1.0,))
    u = adiabat_energy(gas, x, (2.0,))
    assert forward_sector_contains(gas, x, StatePoint(u, (2.0,))) is Sector.EQUIVALENT
    assert forward_sector_contains(gas, x, StatePoint(u * 1.1, (2.0,))) is Sector.PRECEDES
    assert forward_sector_contains(gas, x, StatePoint(u * 0.9, (2.0,))) is Sector.SUCCEEDS


def test_temperature_of_ideal_gas(gas):
    for u, v in [(0.5, 1.0), (3.0, 2.0), (40.0, 7.0)]:
        T, br = temperature(gas, None, StatePoint(u, (v,)))
        assert T == pytest.approx(2 * u / 3, rel=1e-6)
        assert br.t_minus <= T <= br.t_plus


def test_temperature_needs_entropy():
    model = table_model("t", [1, 2, 3], [1, 2, 3], np.ones((3, 3)))
    with pytest.raises(ModelError):
        temperature(model, None, StatePoint(2.0, (2.0,)))


def test_pressure_identity(gas, vdw):
    pts = [StatePoint(u, (v,)) for u in (1.0, 5.0) for v in (1.0, 4.0)]
    assert check_pressure_entropy_identity(gas, None, pts).passed
    assert check_pressure_entropy_identity(vdw, None, pts).passed


def test_vdw_temperature_matches_caloric_equation(vdw):
    x = StatePoint(2.0, (3.0,))
    T, _ = temperature(vdw, None, x)
    assert T == pytest.approx((2.0 + 3.0 / 3.0) / 4.0, rel=1e-6)


def test_concavity_of_ideal_gas(gas):
    secants = [(StatePoint(1, (1,)), StatePoint(5, (2,))), (StatePoint(0.5, (4,)), StatePoint(3, (0.5,)))]
    assert check_concavity(None, gas, secants).passed


def test_convex_entropy_flagged(gas):
    def convex(u, v):
        return u * u + v[0]
    secants = [(StatePoint(1, (1,)), StatePoint(5, (1,)))]
    assert check_concavity(convex, gas, secants).failed


def test_scaled_model_is_extensive(gas):
    g3 = gas.scaled(3.0)
    x = StatePoint(2.0, (1.5,))
    assert g3.entropy(x.scaled(3.0)) == pytest.approx(3 * gas.entropy(x))
    assert g3.pressure(6.0, (4.5,))[0] == pytest.approx(gas.pressure(2.0, (1.5,))[0])


def test_table_model_adiabat_matches_gas():
    u = np.linspace(0.2, 6.0, 60)
    v = np.linspace(0.5, 9.0, 60)
    p = 2 * u[:, None] / (3 * v[None, :])
    model = table_model("tab", u, v, p)
    got = integrate_adiabat(model, StatePoint(2.0, (1.0,)), 4.0).final_u
    assert got == pytest.approx(2.0 * 4.0 ** (-2 / 3), rel=5e-3)

import pytest

from conftest import load
from pwforge import ambient, walker
from pwforge.projective import Connection, base_chart


def built(name):
    P = load(name)
    return P, ambient.build_ambient(P.D, P.Phi)


@pytest.mark.parametrize("name", ["flat2", "pp", "appB_case2", "dphi_appB", "nonflat2"])
def test_ambient_planar_entries(name):
    P, am = built(name)
    assert am.dim == 2 * P.n + 2
    assert ambient.verify_ricci_flat(am)[0]
    assert ambient.homogeneity_holds(am)
    assert ambient.restriction(am) == walker.build_pw(P.D, P.Phi).g
    assert ambient.check_log_t_harmonic(am)[0]


def test_negative_control_dimension_two():
    _, am = built("pp")
    # rho^2 is the undetermined order for a four-dimensional conformal structure
    assert ambient.verify_ricci_flat(ambient.perturbed(am, power=2))[0]
    ok, size = ambient.verify_ricci_flat(ambient.perturbed(am, power=3))
    assert not ok and size > 0
    assert not ambient.verify_ricci_flat(ambient.perturbed(am, 0, 1, power=1))[0]


def test_extra_modification_unmodulated_deformation():
    P = load("extra_alpha1_c0")
    am = ambient.build_ambient_extra(P.D, P.Phi, P.alpha, P.c)
    assert am.meta["kind"] == "extra"
    assert ambient.verify_ricci_flat(am)[0]
    assert ambient.homogeneity_holds(am)


def test_extra_modification_needs_plane():
    D = Connection.flat(base_chart(3))
    with pytest.raises(ValueError):
        ambient.build_ambient_extra(D, None, D.chart.parse("1"))


def test_laplacian_of_coordinates():
    m = walker.build_pw(Connection.flat(base_chart(2)))
    assert ambient.laplacian(m, m.chart.parse("x1")).is_zero()
    # g^{xp} = delta, so the Laplacian of x1*p1 is 2
    assert ambient.laplacian(m, m.chart.parse("x1*p1")) == m.chart.const(2)


def test_name_clash():
    m = walker.build_pw(Connection.flat(base_chart(2)))
    with pytest.raises(ValueError):
        ambient.ambient_chart(m.chart, t="x1")

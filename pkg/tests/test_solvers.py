import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import load, pp_generators, pp_metric
from pwforge import solvers, walker
from pwforge.projective import Connection, appendix_family, base_chart
from pwforge.ring import QQ
from pwforge.tensor import Tensor

C2 = base_chart(2)


def test_scalar_kernel_flat_plane():
    res = solvers.solve_scalar_bgg(Connection.flat(C2), 3)
    assert res.dim == 3 and res.certified
    assert res.rank + res.dim == res.ncols


def test_killing_forms_flat_plane():
    res = solvers.killing_forms(Connection.flat(C2))
    assert res.dim == 3 and res.stabilized
    alphas = res.vectors("alpha")
    for lit in ({0: "1"}, {1: "1"}, {0: "x2", 1: "-x1"}):
        assert solvers.in_span(alphas, Tensor.from_dict(C2, "l", lit, weight=2)) is not None


def test_adjoint_kernel_flat_plane_small_cap():
    assert solvers.first_bgg_kernel(Connection.flat(C2), "adjoint", 2, stabilize=False).dim == 8


@pytest.mark.parametrize("seq", solvers.BGG_SEQUENCES)
def test_flat_kernels_dimension_two(seq):
    res = solvers.first_bgg_kernel(Connection.flat(C2), seq, 3)
    assert res.dim == solvers.flat_kernel_dimension(seq, 2)


def test_unknown_sequence():
    with pytest.raises(ValueError):
        solvers.first_bgg_kernel(Connection.flat(C2), "spinor", 2)


def test_affine_symmetries_examples():
    assert solvers.affine_symmetries(Connection.flat(C2)).dim == 6
    P = load("appB_case2")
    res = solvers.affine_symmetries(P.D, 4)
    assert res.dim == 2 and res.stabilized


def test_projective_symmetries_flat_plane():
    res = solvers.projective_symmetries(Connection.flat(C2), 3)
    assert res.dim == 8
    assert res.extra["affine_subspace_dim"] == 6


def test_einstein_scales_pp():
    P = load("pp")
    res = solvers.einstein_scales_reduced(P.D, P.Phi)
    assert res.dim == 3
    assert all(s["xi"].is_zero() for s in res.solutions)
    taus = [Tensor.scalar(C2, s["tau"].value()) for s in res.solutions]
    assert solvers.same_span(taus, [Tensor.scalar(C2, f) for f in ("1", "x1", "x2")])
    m = walker.build_pw(P.D, P.Phi)
    for s in res.solutions:
        shown, direct, ok = solvers.einstein_scalar_check(m, s["tau"], s["xi"])
        assert shown == 0 and direct == 0 and ok


def test_einstein_flat_plane_reduced_vs_direct():
    D = Connection.flat(C2)
    red = solvers.einstein_scales_reduced(D)
    m = walker.build_pw(D)
    direct = solvers.einstein_scales_direct(m)
    assert red.dim == direct.dim == 6
    sig = [Tensor.scalar(m.chart, solvers.assemble_sigma(m, s["tau"], s["xi"])) for s in red.solutions]
    assert solvers.same_span(sig, [s["sigma"] for s in direct.solutions])


def test_pp_killing_span_and_lifts():
    P = load("pp")
    res = solvers.conformal_killing_reduced(P.D, P.Phi)
    assert res.dim == 9 and res.extra["lifts_are_killing"]
    m = pp_metric()
    gens = pp_generators(m)
    assert solvers.same_span(res.extra["fields"], gens)
    assert all(s["w"].is_zero() for s in res.solutions)
    assert solvers.homothety_grading(res) == {2: 0, 0: 6, -2: 3}
    direct = solvers.conformal_killing_direct(m)
    assert solvers.same_span(gens, [s["v"] for s in direct.solutions])


def test_conformally_flat_plane_grading():
    res = solvers.conformal_killing_reduced(Connection.flat(C2))
    assert res.dim == 15
    assert solvers.homothety_grading(res) == {2: 3, 0: 8, -2: 4}


def test_pp_algebra():
    gens = pp_generators(pp_metric())
    t = solvers.lie_structure(gens)
    assert t.antisymmetric and t.jacobi
    nil = solvers.nilradical(t)
    assert len(nil) == 5
    x = [QQ(0)] * 9
    x[2] = x[5] = QQ(1)                          # e3 + e6
    info = solvers.ad_eigenspaces(t, x, nil)
    assert info["irrational_degree"] == 0
    assert sorted(info["eigenvalues"].values()) == [1, 2, 2]
    full = solvers.ad_eigenspaces(t, x)
    assert full["eigenvalues"][0] == 4
    assert len(solvers.derived_algebra(t)) == 8


def test_lie_structure_errors():
    m = pp_metric()
    gens = pp_generators(m)
    with pytest.raises(solvers.NotClosedError):
        solvers.lie_structure(gens[:2] + gens[3:5])    # e4, e5 bracket to e3 - e6
    with pytest.raises(ValueError):
        solvers.lie_structure([gens[0], gens[0].scale(2)])
    assert solvers.lie_structure([]).dim == 0


def test_homothety_is_not_a_pp_symmetry():
    m = pp_metric()
    gens = pp_generators(m)
    t = solvers.lie_structure(gens)
    with pytest.raises(solvers.NotClosedError):
        solvers.external_ad(t, gens, walker.frames(m).k_up)


@given(st.integers(0, 10_000))
@settings(max_examples=10, deadline=None)
def test_same_span_under_recombination(seed):
    rng = random.Random(seed)
    gens = pp_generators(pp_metric())[:4]
    mixed = []
    for i in range(4):
        acc = gens[i].scale(QQ(1))
        for j in range(i + 1, 4):
            acc = acc + gens[j].scale(QQ(f"{rng.randint(-3, 3)}/{rng.randint(1, 4)}"))
        mixed.append(acc)
    assert solvers.same_span(gens, mixed)
    assert not solvers.same_span(gens, mixed[:3] + [mixed[2].scale(2)])


def test_stabilisation_reports_cap():
    D = appendix_family(C2, a1=2, a0=3, b0=7)
    res = solvers.affine_symmetries(D, 2)
    assert res.stabilized and res.caps["x_degree"] == 2
    assert solvers.default_cap(Connection.flat(C2)) == 3

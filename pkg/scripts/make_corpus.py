"""Regenerate the bundled problem corpus (src/pwforge/corpus/*.json).

Random entries use fixed seeds, so rerunning reproduces the same files.
"""
import json
import random
from pathlib import Path

from pwforge import bgg
from pwforge.projective import (Connection, appendix_family, appendix_family_upsilon, base_chart,
                                random_special_connection, random_tensor)
from pwforge.tensor import LOW

OUT = Path(__file__).resolve().parents[1] / "src" / "pwforge" / "corpus"


def upsilon_lit(**params):
    C = base_chart(2)
    return {k: v for k, v in appendix_family_upsilon(C, **params).to_literal()["components"].items()}


def sym_lit(T):
    return dict(sorted(T.to_literal()["components"].items()))


def write(name, problem):
    problem = {"name": name, **problem}
    (OUT / f"{name}.json").write_text(json.dumps(problem, indent=2, sort_keys=True) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("flat2", {"dim": 2, "description": "flat projective plane, unmodified"})
    write("flat3", {"dim": 3, "description": "flat projective 3-space, unmodified"})
    write("pp", {"dim": 2, "phi": {"1,1": "x2^2"}, "task": "killing",
                 "description": "submaximal example: Phi = (x2)^2 dx1 dx1 over the flat plane"})
    cases = {
        "appB_case0": dict(a2=1, a1=2, a0=3, b1=5, b0=7),
        "appB_case1": dict(a1=2, a0=3, b1=5, b0=7),
        "appB_case2": dict(a1=2, a0=3, b0=7),
        "appB_case3": dict(a1=2, a0=3),
        "appB_case4": dict(a0=3),
        "appB_case6": dict(),
    }
    expect = {"appB_case0": 0, "appB_case1": 1, "appB_case2": 2, "appB_case3": 3, "appB_case4": 4,
              "appB_case6": 6}
    for name, params in cases.items():
        write(name, {"dim": 2, "upsilon": upsilon_lit(**params), "task": "affine-sym",
                     "caps": {"x_degree": 4}, "expect": {"affine_dimension": expect[name]},
                     "description": f"projective change of the flat plane with parameters {params}"})
    write("appB_random", {"dim": 2, "upsilon": upsilon_lit(a2="3/7", a1="-2/5", a0="1/3", b1="5/4", b0=-6),
                          "task": "affine-sym", "caps": {"x_degree": 4}, "expect": {"affine_dimension": 0},
                          "description": "random rational generic member of the same family"})
    C = base_chart(2)
    flat = Connection.flat(C)
    phi = C.parse("x2")
    from pwforge.tensor import Tensor
    f = Tensor.from_dict(C, (LOW,), {0: phi}, weight=2)
    write("dphi_flat", {"dim": 2, "phi": sym_lit(bgg.b1_oneform(flat, f)),
                        "description": "Phi = D_(phi) with phi = x2 dx1 over the flat plane"})
    D1 = appendix_family(C, a1=2, a0=3, b1=5, b0=7)
    f2 = Tensor.from_dict(C, (LOW,), {1: C.parse("x1^2")}, weight=2)
    write("dphi_appB", {"dim": 2, "upsilon": upsilon_lit(a1=2, a0=3, b1=5, b0=7),
                        "phi": sym_lit(bgg.b1_oneform(D1, f2)),
                        "description": "Phi = D_(phi) with phi = (x1)^2 dx2 over Appendix B case (1)"})
    for a in ("1", "x1"):
        for c in (0, 5):
            tag = "1" if a == "1" else "x1"
            write(f"extra_alpha{tag}_c{c}", {"dim": 2, "alpha": a, "c": c, "task": "ambient",
                                             "description": f"extra modification alpha = {a}, deformation c = {c}"})
    rng = random.Random(20240517)
    D2 = random_special_connection(C, rng, degree=1, density=0.4)
    P2 = random_tensor(C, (LOW, LOW), rng, degree=1, density=0.5)
    P2 = P2.symmetrize(0, 1)
    write("nonflat2", {"dim": 2, "connection": D2.to_literal(), "phi": sym_lit(P2),
                       "description": "random special connection and modification (seeded)"})
    C3 = base_chart(3)
    rng3 = random.Random(7)
    D3 = random_special_connection(C3, rng3, degree=1, density=0.15)
    write("nonflat3", {"dim": 3, "connection": D3.to_literal(), "phi": {"1,1": "x2", "2,3": "1", "3,2": "1"},
                       "description": "random special connection in dimension three (seeded)"})


if __name__ == "__main__":
    main()

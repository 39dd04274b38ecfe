from pwforge import cli, walker
from pwforge.tensor import Tensor

# lifts of the pp symmetries, one per free constant c_i
PP_GENERATORS = {
    1: {"x1": "1"},
    2: {"x2": "1", "p1": "-x1*x2", "p2": "1/2*x1^2"},
    3: {"x1": "x1", "p1": "p1", "p2": "2*p2"},
    4: {"x2": "x1", "p1": "-p2 - 1/2*x1^2*x2", "p2": "1/6*x1^3"},
    5: {"x1": "x2", "p1": "-1/3*x2^3", "p2": "-p1"},
    6: {"x2": "x2", "p1": "2*p1", "p2": "p2"},
    7: {"p1": "1"},
    8: {"p2": "1"},
    9: {"p1": "x2", "p2": "-x1"},
}


def load(name):
    return cli.Problem(*cli.read_problem(name))


def pw_field(m, comps):
    T = Tensor.zeros(m.chart, "u")
    slot = {"x1": m.pw.x(0), "x2": m.pw.x(1), "p1": m.pw.p(0), "p2": m.pw.p(1)}
    for k, s in comps.items():
        T.comps[slot[k]] = m.chart.parse(s)
    return T


def pp_generators(m):
    return [pw_field(m, PP_GENERATORS[i]) for i in range(1, 10)]


def pp_metric():
    P = load("pp")
    return walker.build_pw(P.D, P.Phi)


# criterion number -> summary line, filled in by test_acceptance
ACCEPTANCE_LINES: dict = {}


def record(num: int, ok: bool, detail: str) -> str:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[num] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])

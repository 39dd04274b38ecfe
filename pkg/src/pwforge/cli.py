"""Command line batch interface.

    pwforge <task> <problem.json | bundled-name> [--caps-x N] [--json | --text] [--out FILE]
    pwforge corpus [--dump DIR]

Exit status is 0 whenever the computation ran, whatever the mathematical
verdicts; 2 for unreadable or schema-invalid problems; 3 when the input
violates a precondition (for instance a connection that is not special).
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from importlib import resources
from pathlib import Path

from . import __version__, ambient, bgg, solvers, walker
from .projective import Connection, NotSpecialError, base_chart, projective_change
from .ring import PolyParseError
from .tensor import LOW, UP, Tensor

TASKS = ("curvature", "flatness", "einstein", "killing", "affine-sym", "proj-sym", "killing-forms",
         "bgg-verify", "ambient", "logt", "relations")

CONVENTIONS = {
    "curvature_sign": "(D_A D_B - D_B D_A) xi^C = R_AB^C_D xi^D; Ric_BD = R_AB^A_D",
    "projective_schouten": "P_AB = Ric_AB / (n - 1) (special connections only)",
    "pw_metric": "g(dx^A, dp_B) = delta_A^B, g(dx^A, dx^B) = -2 Gamma_A^C_B p_C + Phi_AB, g(dp, dp) = 0",
    "phi_normalization": "Phi_AB enters the metric components with coefficient 1",
    "symmetrization": "weight 1/k! per symmetrized or skewed group",
    "epsilon": "eps_12 = 1, eps^12 = 1",
    "conformal_schouten": "(Ric - Scal / (2(N - 1)) g) / (N - 2)",
    "ambient_coordinates": "(t, x, p, rho); G_tt = 2 rho, G_t,rho = t, G_ab = t^2 h(rho)_ab",
}


class ProblemError(Exception):
    """Schema or parse failure, with a JSON-path style location."""

    def __init__(self, source: str, where: str, msg: str):
        super().__init__(f"{source}: {where}: {msg}")


class PreconditionError(Exception):
    pass


# -- problem files ------------------------------------------------------------------

def corpus_names() -> list:
    root = resources.files("pwforge") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def corpus_text(name: str) -> str:
    return (resources.files("pwforge") / "corpus" / f"{name}.json").read_text()


def read_problem(ref: str) -> tuple:
    """(raw dict, source label); falls back to the bundled corpus by stem."""
    path = Path(ref)
    if path.exists():
        text, source = path.read_text(), str(path)
    else:
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        if stem not in corpus_names():
            raise ProblemError(ref, "$", "no such file and no bundled problem with that name")
        text, source = corpus_text(stem), f"corpus:{stem}"
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemError(source, f"line {e.lineno} column {e.colno}", e.msg) from None
    if not isinstance(raw, dict):
        raise ProblemError(source, "$", "top level must be an object")
    return raw, source


class Problem:
    """Parsed problem: connection, modification and optional extras."""

    ALLOWED = {"name", "dim", "coords", "connection", "phi", "upsilon", "alpha", "c", "caps", "task",
               "description", "seed", "trials", "expect"}

    def __init__(self, raw: dict, source: str = "<problem>"):
        self.source = source
        self.raw = raw
        unknown_keys = sorted(set(raw) - self.ALLOWED)
        if unknown_keys:
            raise ProblemError(source, f"$.{unknown_keys[0]}", "unknown field")
        n = raw.get("dim")
        if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= 4:
            raise ProblemError(source, "$.dim", "dim must be an integer between 1 and 4")
        self.n = n
        coords = raw.get("coords")
        if coords is not None:
            if not (isinstance(coords, list) and len(coords) == n and all(isinstance(c, str) for c in coords)):
                raise ProblemError(source, "$.coords", f"expected a list of {n} names")
        self.chart = base_chart(n, coords)
        self.name = str(raw.get("name", Path(source).stem))
        self.task = raw.get("task")
        self.D = self._connection(raw.get("connection", {}))
        ups = raw.get("upsilon")
        if ups is not None:
            self.D = projective_change(self.D, self._tensor(ups, (LOW,), "$.upsilon"))
        phi = raw.get("phi", {})
        self.Phi = self._tensor(phi, (LOW, LOW), "$.phi", weight=2, symmetric=True)
        self.alpha = None
        if raw.get("alpha") is not None:
            self.alpha = self._poly(raw["alpha"], "$.alpha")
        self.c = raw.get("c", 0)
        if not isinstance(self.c, (int, str)) or isinstance(self.c, bool):
            raise ProblemError(source, "$.c", "deformation constant must be an integer or a rational string")
        try:
            from .ring import QQ
            self.c = QQ(self.c)
        except (ValueError, ZeroDivisionError):
            raise ProblemError(source, "$.c", "not a rational number") from None
        caps = raw.get("caps", {})
        if not isinstance(caps, dict):
            raise ProblemError(source, "$.caps", "expected an object")
        xd = caps.get("x_degree")
        if xd is not None and (not isinstance(xd, int) or xd < 0):
            raise ProblemError(source, "$.caps.x_degree", "expected a non-negative integer")
        self.x_cap = xd
        self.seed = raw.get("seed", 0)
        self.trials = raw.get("trials", 3)

    def _poly(self, text, where):
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = str(text)
        if not isinstance(text, str):
            raise ProblemError(self.source, where, "expected a polynomial string")
        try:
            return self.chart.parse(text)
        except PolyParseError as e:
            raise ProblemError(self.source, where, str(e)) from None

    def _index(self, key, rank, where):
        try:
            idx = tuple(int(k) - 1 for k in key.split(","))
        except ValueError:
            raise ProblemError(self.source, where, f"bad index key {key!r}") from None
        if len(idx) != rank or any(i < 0 or i >= self.n for i in idx):
            raise ProblemError(self.source, where, f"index key {key!r} needs {rank} entries in 1..{self.n}")
        return idx

    def _connection(self, entries):
        where = "$.connection"
        if not isinstance(entries, dict):
            raise ProblemError(self.source, where, "expected an object keyed 'A,C,B'")
        parsed = {}
        for key, val in sorted(entries.items()):
            loc = f"{where}['{key}']"
            idx = self._index(key, 3, loc)
            parsed[tuple(i + 1 for i in idx)] = self._poly(val, loc)
        try:
            return Connection.from_dict(self.chart, parsed)
        except ValueError as e:
            raise ProblemError(self.source, where, str(e)) from None

    def _tensor(self, entries, sig, where, weight=0, symmetric=False):
        if not isinstance(entries, dict):
            raise ProblemError(self.source, where, "expected an object of components")
        T = Tensor.zeros(self.chart, sig, weight)
        for key, val in sorted(entries.items()):
            loc = f"{where}['{key}']"
            idx = self._index(key, len(sig), loc)
            p = self._poly(val, loc)
            if symmetric and idx[0] != idx[1]:
                other = idx[::-1]
                skey = ",".join(str(i + 1) for i in other)
                if skey in entries and self._poly(entries[skey], loc) != p:
                    raise ProblemError(self.source, loc, "symmetric partner disagrees")
                T.comps[other] = p
            T.comps[idx] = p
        return T

    def cap(self, override=None):
        return override if override is not None else self.x_cap


# -- serialisation helpers ------------------------------------------------------

def lit(T) -> dict:
    d = T.to_literal()
    d["components"] = dict(sorted(d["components"].items()))
    return d


def pstr(p) -> str:
    return str(p)


def basis_out(res: solvers.SolutionBasis, keys=None) -> list:
    out = []
    for s in res.solutions:
        out.append({k: lit(v) for k, v in s.items() if keys is None or k in keys})
    return out


def solve_summary(res: solvers.SolutionBasis) -> dict:
    return {"dimension": res.dim, "rank": res.rank, "columns": res.ncols, "rank_mod_p": res.rank_mod_p,
            "certified": res.certified, "stabilized": res.stabilized, "caps": res.caps}


def _need_special(P: Problem):
    if not P.D.is_special():
        raise PreconditionError("the connection is not special (Ricci tensor not symmetric)")


# -- tasks ------------------------------------------------------------------------

def task_curvature(P: Problem, cap):
    _need_special(P)
    pk = P.D.curvature()
    m = walker.build_pw(P.D, P.Phi)
    mc = m.curvature()
    return {
        "projective": {"riemann": lit(pk.riemann), "ricci": lit(pk.ricci), "schouten": lit(pk.schouten),
                       "weyl": lit(pk.weyl), "cotton": lit(pk.cotton)},
        "metric": {"ricci": lit(mc.ricci), "schouten": lit(mc.schouten), "scalar": pstr(mc.scalar),
                   "weyl_low": lit(mc.weyl_low), "weyl_zero": mc.weyl.is_zero()},
    }


def task_flatness(P: Problem, cap):
    _need_special(P)
    verdict, witness = walker.is_conformally_flat(P.D, P.Phi)
    return {"conformally_flat": verdict, **witness}


def task_einstein(P: Problem, cap):
    _need_special(P)
    red = solvers.einstein_scales_reduced(P.D, P.Phi, P.cap(cap))
    m = walker.build_pw(P.D, P.Phi)
    direct = solvers.einstein_scales_direct(m, P.cap(cap))
    sigmas = [solvers.assemble_sigma(m, s["tau"], s["xi"]) for s in red.solutions]
    agree = solvers.same_span([Tensor.scalar(m.chart, s) for s in sigmas],
                              [s["sigma"] for s in direct.solutions])
    elems = []
    for s, sig in zip(red.solutions, sigmas):
        shown, metric, ok = solvers.einstein_scalar_check(m, s["tau"], s["xi"])
        elems.append({"tau": pstr(s["tau"].value()), "xi": lit(s["xi"]), "sigma": pstr(sig),
                      "scalar_displayed": pstr(shown), "scalar_metric": pstr(metric), "scalar_agree": ok})
    return {"reduced": solve_summary(red), "direct": solve_summary(direct), "spans_agree": agree,
            "dimension": red.dim, "basis": elems}


def task_killing(P: Problem, cap):
    _need_special(P)
    red = solvers.conformal_killing_reduced(P.D, P.Phi, P.cap(cap))
    m = walker.build_pw(P.D, P.Phi)
    direct = solvers.conformal_killing_direct(m, P.cap(cap))
    fields = red.extra["fields"]
    agree = solvers.same_span(fields, [s["v"] for s in direct.solutions])
    algebra = {}
    try:
        t = solvers.lie_structure(fields)
        nil = solvers.nilradical(t)
        algebra = {"closed": True, "antisymmetric": t.antisymmetric, "jacobi": t.jacobi,
                   "derived_dimension": len(solvers.derived_algebra(t)),
                   "radical_dimension": len(solvers.solvable_radical(t)), "nilradical_dimension": len(nil)}
    except solvers.NotClosedError as e:
        algebra = {"closed": False, "reason": str(e)}
    except ArithmeticError as e:
        algebra["nilradical_error"] = str(e)
    basis = []
    for s, f in zip(red.solutions, fields):
        basis.append({"w": lit(s["w"]), "v": lit(s["v"]), "alpha": lit(s["alpha"]),
                      "psi0": pstr(s["psi0"].value()), "field": lit(f)})
    return {"reduced": solve_summary(red), "direct": solve_summary(direct), "spans_agree": agree,
            "lifts_are_killing": red.extra["lifts_are_killing"], "dimension": red.dim,
            "k_grading": {str(k): v for k, v in solvers.homothety_grading(red).items()},
            "algebra": algebra, "basis": basis}


def _simple_solve(fn, key):
    def task(P: Problem, cap):
        _need_special(P)
        res = fn(P.D, P.cap(cap))
        out = {"dimension": res.dim, **solve_summary(res), "basis": [lit(s[key]) for s in res.solutions]}
        for k, v in sorted(res.extra.items()):
            if k != "dim_at_cap_plus_1":
                out[k] = v
        return out
    return task


def task_bgg(P: Problem, cap):
    _need_special(P)
    rng = random.Random(int(P.seed))
    comps = bgg.verify_compositions(P.D, rng, int(P.trials))
    kernels = {}
    flat = P.D.is_flat_coordinates()
    for seq in solvers.BGG_SEQUENCES:
        res = solvers.first_bgg_kernel(P.D, seq, P.cap(cap))
        entry = {"dimension": res.dim, "stabilized": res.stabilized, "certified": res.certified}
        if flat:
            entry["flat_expected"] = solvers.flat_kernel_dimension(seq, P.n)
        kernels[seq] = entry
    return {"compositions": comps, "kernels": kernels}


def _ambient_block(am) -> dict:
    rf, size = ambient.verify_ricci_flat(am)
    lg, val = ambient.check_log_t_harmonic(am)
    return {"ricci_flat": rf, "max_residual_monomials": size, "log_t_harmonic": lg,
            "log_t_laplacian_numerator": pstr(val), "homogeneous_degree_2": ambient.homogeneity_holds(am)}


def task_ambient(P: Problem, cap):
    _need_special(P)
    am = ambient.build_ambient(P.D, P.Phi)
    out = _ambient_block(am)
    out["restriction_is_pw"] = ambient.restriction(am) == walker.build_pw(P.D, P.Phi).g
    out["negative_control_rho2"] = not ambient.verify_ricci_flat(ambient.perturbed(am, power=2))[0]
    out["negative_control_rho3"] = not ambient.verify_ricci_flat(ambient.perturbed(am, power=3))[0]
    if P.alpha is not None and P.n == 2:
        ex = ambient.build_ambient_extra(P.D, P.Phi, P.alpha, P.c)
        out["extra"] = {"alpha": pstr(P.alpha), "c": str(P.c), **_ambient_block(ex)}
    return out


def task_logt(P: Problem, cap):
    _need_special(P)
    am = ambient.build_ambient(P.D, P.Phi)
    ok, val = ambient.check_log_t_harmonic(am)
    out = {"log_t_harmonic": ok, "numerator": pstr(val)}
    if P.alpha is not None and P.n == 2:
        ok2, val2 = ambient.check_log_t_harmonic(ambient.build_ambient_extra(P.D, P.Phi, P.alpha, P.c))
        out["extra"] = {"log_t_harmonic": ok2, "numerator": pstr(val2)}
    return out


def task_relations(P: Problem, cap):
    _need_special(P)
    rep = walker.check_relations(P.D, P.Phi)
    core = ("riemann", "ricci_pullback", "weyl", "intcon")
    return {"checks": dict(sorted(rep.checks.items())), "residual_monomials": dict(sorted(rep.residuals.items())),
            "core_passed": all(rep.checks[k] for k in core), "all_passed": rep.passed}


DISPATCH = {
    "curvature": task_curvature,
    "flatness": task_flatness,
    "einstein": task_einstein,
    "killing": task_killing,
    "affine-sym": _simple_solve(solvers.affine_symmetries, "v"),
    "proj-sym": _simple_solve(solvers.projective_symmetries, "v"),
    "killing-forms": _simple_solve(solvers.killing_forms, "alpha"),
    "bgg-verify": task_bgg,
    "ambient": task_ambient,
    "logt": task_logt,
    "relations": task_relations,
}


def run(task: str, problem: Problem, caps_x=None) -> dict:
    if task not in DISPATCH:
        raise ValueError(f"unknown task {task!r}")
    results = DISPATCH[task](problem, caps_x)
    return {"task": task, "problem": problem.name, "source": problem.source, "engine": f"pwforge {__version__}",
            "conventions": CONVENTIONS, "results": results}


# -- output ------------------------------------------------------------------------

def to_text(report: dict) -> str:
    lines = [f"task: {report['task']}", f"problem: {report['problem']} ({report['source']})"]

    def walk(obj, prefix):
        if isinstance(obj, dict):
            if set(obj) >= {"chart", "indices", "components"}:
                comps = obj["components"]
                body = ", ".join(f"[{k}] {v}" for k, v in comps.items()) or "0"
                lines.append(f"{prefix}: {body}")
                return
            for k, v in obj.items():
                walk(v, f"{prefix}.{k}" if prefix else k)
        elif isinstance(obj, list):
            if not obj:
                lines.append(f"{prefix}: []")
            for i, v in enumerate(obj):
                walk(v, f"{prefix}[{i}]")
        else:
            lines.append(f"{prefix}: {obj}")
    walk(report["results"], "")
    lines.append("conventions:")
    lines.extend(f"  {k}: {v}" for k, v in report["conventions"].items())
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "text":
        return to_text(report)
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pwforge", description="Exact computations for modified Patterson-Walker metrics.")
    ap.add_argument("--version", action="version", version=f"pwforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for t in TASKS + ("run",):
        p = sub.add_parser(t, help="use the task named in the problem file" if t == "run" else f"run the {t} task")
        p.add_argument("problem", help="problem JSON file or bundled corpus name")
        p.add_argument("--caps-x", type=int, default=None, help="polynomial degree cap in the base variables")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--json", dest="fmt", action="store_const", const="json")
        g.add_argument("--text", dest="fmt", action="store_const", const="text")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.set_defaults(fmt="json")
    c = sub.add_parser("corpus", help="list or export the bundled problems")
    c.add_argument("--dump", default=None, help="copy every bundled problem into this directory")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "corpus":
        names = corpus_names()
        if args.dump:
            out = Path(args.dump)
            out.mkdir(parents=True, exist_ok=True)
            for nm in names:
                (out / f"{nm}.json").write_text(corpus_text(nm))
        sys.stdout.write("\n".join(names) + "\n")
        return 0
    try:
        raw, source = read_problem(args.problem)
        problem = Problem(raw, source)
        task = args.command
        if task == "run":
            task = problem.task
            if task not in TASKS:
                raise ProblemError(source, "$.task", f"expected one of {', '.join(TASKS)}")
        if args.caps_x is not None and args.caps_x < 0:
            raise ProblemError(source, "--caps-x", "expected a non-negative integer")
        report = run(task, problem, args.caps_x)
    except ProblemError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except (PreconditionError, NotSpecialError) as e:
        sys.stderr.write(f"error: {args.problem}: {e}\n")
        return 3
    text = render(report, args.fmt)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

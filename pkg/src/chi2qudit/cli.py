"""Command-line verification suites.

Each suite writes ``<name>.json`` (deterministic) and ``<name>.timing.json``
into the report directory, prints one line per check and exits 0 when every
check passes, 1 otherwise and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class Check:
    id: str
    anchor: str
    measured: float
    tolerance: float
    passed: bool
    relation: str = "<"


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def below(self, id: str, anchor: str, measured: float, tol: float) -> Check:
        c = Check(id, anchor, float(measured), float(tol), bool(measured < tol), "<")
        self.checks.append(c)
        return c

    def equal(self, id: str, anchor: str, measured: float, expected: float) -> Check:
        c = Check(id, anchor, float(measured), float(expected), bool(measured == expected), "==")
        self.checks.append(c)
        return c

    def above(self, id: str, anchor: str, measured: float, bound: float) -> Check:
        c = Check(id, anchor, float(measured), float(bound), bool(measured > bound), ">")
        self.checks.append(c)
        return c

    def within(self, id: str, anchor: str, measured: float, lo: float, hi: float) -> Check:
        c = Check(id, anchor, float(measured), float(hi), bool(lo <= measured <= hi), f"in [{lo}, {hi}]")
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "params": self.params,
                "checks": [asdict(c) for c in self.checks], "data": self.data}

    def dumps(self) -> str:
        return json.dumps(_plain(self.to_json()), sort_keys=True, indent=2)


def _plain(x):
    """Make numpy scalars and complex numbers JSON-safe."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


# --- suites ---------------------------------------------------------------------------

def suite_closure(n: int, tol: float) -> SuiteReport:
    from .liealg import closure
    from .operators import chi2_generators

    g = chi2_generators(n)
    rep, _ = closure([g[k] for k in ("G1", "G2", "Ns", "Ni", "Np")], tol=tol)
    r = SuiteReport("closure", params={"n": n, "tol": tol}, data=rep.to_json())
    r.equal("dimension", "full u(n+1) controllability", rep.dim, (n + 1) ** 2)
    return r


def suite_h2() -> SuiteReport:
    from .liealg import (H2_TABLE, gell_mann_checks, gell_mann_reconstruct, h2_generators,
                         h2_table_consistency)

    r = SuiteReport("h2-matrices")
    gaps = h2_table_consistency()
    for k in sorted(gaps, key=lambda s: int(s[1:])):
        r.below(f"table.{k}", "tabulated H2 generators", gaps[k], 1e-12)
    for k, v in gell_mann_checks(gell_mann_reconstruct(H2_TABLE)).items():
        r.below(f"gell_mann.table.{k}", "Gell-Mann combinations of tabulated generators", v, 1e-12)
    g9 = gell_mann_reconstruct(H2_TABLE)["G9"]
    r.below("gell_mann.G9_identity", "G9 equals identity", float(np.max(np.abs(g9 - np.eye(3)))), 1e-12)
    computed = {k: v.entries for k, v in h2_generators().items()}
    r.data["computed_gell_mann"] = gell_mann_checks(gell_mann_reconstruct(computed))
    r.data["table_gaps"] = gaps
    return r


def suite_lambda2z() -> SuiteReport:
    from .gates import build_lambda2_z

    circ, rep = build_lambda2_z()
    r = SuiteReport("lambda2z", data={"report": rep.to_json(), "netlist": circ.netlist()})
    r.below("distance", "qubit controlled-Z circuit", rep.distance, 1e-10)
    r.below("leakage", "qubit controlled-Z circuit", rep.leakage, 1e-10)
    return r


def suite_lambda3z(berry: int) -> SuiteReport:
    from .gates import PhaseConvention, build_lambda3_z

    circ, rep = build_lambda3_z(PhaseConvention.with_roundtrip(berry))
    r = SuiteReport("lambda3z", params={"berry": berry},
                    data={"report": rep.to_json(), "netlist": circ.netlist()})
    r.below("residual", "qutrit controlled-Z up to local diagonals", rep.residual, 1e-10)
    r.below("leakage", "qutrit controlled-Z circuit", rep.leakage, 1e-10)
    if berry == 1:
        dev = max(float(np.max(np.abs(np.asarray(v) - 1))) for v in rep.corrections.values())
        r.below("corrections_identity", "unit round-trip phase", dev, 1e-10)
    return r


def suite_injection(seed: int, with_subtraction: bool = True) -> SuiteReport:
    from .fock import StateVector, SubspaceBasis
    from .injection import (composed_subtraction, imprimitivity_check, inject_pump, injection_modes,
                            prepare_fock_ladder, rotate_111_to_002)

    r = SuiteReport("injection", params={"seed": seed, "subtraction": with_subtraction})
    m = injection_modes(1)
    out = inject_pump(StateVector.basis_state(SubspaceBasis(m, [(0, 0, 1, 1)]), (0, 0, 1, 1)))
    r.below("inject.overlap", "pump injection map", abs(abs(out.amplitude((1, 1, 1, 0))) - 1), 1e-12)

    _, rot = rotate_111_to_002()
    for k, v in rot.errors.items():
        r.below(f"rotation.{k}", "|1,1,1> to |0,0,2> protocol", v, 1e-10)
    _, literal = rotate_111_to_002(step3="as-written")
    r.data["rotation"] = rot.to_json()
    r.data["rotation_as_written"] = literal.to_json()

    lad = prepare_fock_ladder(3, seed=seed)
    r.below("ladder.infidelity", "Fock ladder to |0,0,3>", max(0.0, 1 - lad.fidelity), 1e-8)
    r.below("ladder.ancillas", "one ancilla photon per rung", abs(lad.ancilla_photons - 2), 1e-10)
    r.data["ladder"] = lad.to_json()

    ent = imprimitivity_check(1.0, [2 ** -0.5] * 2, [2 ** -0.5] * 2)
    zero = imprimitivity_check(0.0, [2 ** -0.5] * 2, [2 ** -0.5] * 2)
    r.above("imprimitivity.entangles", "entangling ancilla evolution", ent.entropy, 0.01)
    r.below("imprimitivity.theta0", "identity evolution", zero.entropy, 1e-12)
    r.data["imprimitivity"] = ent.to_json()

    if with_subtraction:
        sub = composed_subtraction(3, seed=seed)
        r.below("subtraction.sip", "pump-ancilla subtraction", sub.sip.sequence.achieved_residual, 1e-6)
        r.below("subtraction.psi", "signal/idler-ancilla subtraction", sub.psi.sequence.achieved_residual, 1e-6)
        r.below("subtraction.forbidden", "no |1,1>|n-2> ancilla component", sub.images.forbidden, 1e-8)
        r.data["subtraction"] = sub.to_json()
    return r


def suite_trotter(n: int, theta: float, m_max: int, axis: int) -> tuple[SuiteReport, str]:
    from .trotter import curve_csv, error_curve

    curve = error_curve(theta, n, axis, m_max)
    r = SuiteReport("trotter", params={"n": n, "theta": theta, "m_max": m_max, "axis": axis},
                    data={"curve": [[m, e] for m, e in curve]})
    errs = dict(curve)
    for m in sorted(errs):
        if m >= 8 and 2 * m in errs and errs[2 * m] > 1e-13:
            r.within(f"ratio.m{m}", "first-order Trotter scaling", errs[m] / errs[2 * m], 1.8, 2.2)
    return r, curve_csv(curve)


def suite_synthesize(problem_path: str, seed: int | None, replay: str | None) -> tuple[SuiteReport, dict]:
    from .synthesis import PulseSequence, SynthesisProblem, evaluate, synthesize

    prob = SynthesisProblem.from_json(json.loads(Path(problem_path).read_text()))
    if seed is not None:
        prob.seed = seed
    if replay:
        seq = PulseSequence.from_json(json.loads(Path(replay).read_text()))
    else:
        seq = synthesize(prob)
    res = evaluate(prob, seq)
    r = SuiteReport("synthesize", params={"problem": os.path.basename(problem_path), "seed": prob.seed,
                                          "replay": bool(replay)}, data={"sequence": seq.to_json()})
    r.checks.append(Check("residual", "problem tolerance", float(res), prob.tol, bool(res <= prob.tol), "<="))
    return r, seq.to_json()


# --- entry point ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chi2qudit", description="Verification suites for chi(2) qudit constructions.")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized procedures")
    p.add_argument("--out", default=None, help="report directory (default: $CHI2_REPORT_DIR or ./reports)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("closure", help="Lie closure of the chi(2) generators on H_n")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--tol", type=float, default=1e-9)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=["h2-matrices", "lambda2z", "lambda3z", "injection"])
    v.add_argument("--berry", type=int, choices=[1, -1], default=1)
    v.add_argument("--no-subtraction", action="store_true", help="skip the slow subtraction synthesis")

    t = sub.add_parser("trotter", help="Trotter convergence curve")
    t.add_argument("--n", type=int, default=2)
    t.add_argument("--theta", type=float, default=0.7)
    t.add_argument("--m-max", type=int, default=1024)
    t.add_argument("--axis", type=int, choices=[1, 2], default=1)

    s = sub.add_parser("synthesize", help="solve a SynthesisProblem JSON file")
    s.add_argument("--problem", required=True)
    s.add_argument("--replay", default=None, help="evaluate a saved PulseSequence instead of solving")
    return p


def report_dir(arg: str | None) -> Path:
    d = Path(arg or os.environ.get("CHI2_REPORT_DIR") or "reports")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write(out: Path, name: str, rep: SuiteReport, wall: float) -> None:
    (out / f"{name}.json").write_text(rep.dumps() + "\n")
    (out / f"{name}.timing.json").write_text(json.dumps({"suite": rep.suite, "wall_time_s": wall}) + "\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    extra: dict[str, str] = {}
    try:
        if args.command == "closure":
            if args.n < 1:
                raise ValueError("--n must be >= 1")
            rep, name = suite_closure(args.n, args.tol), f"closure_n{args.n}"
        elif args.command == "verify":
            if args.suite == "h2-matrices":
                rep = suite_h2()
            elif args.suite == "lambda2z":
                rep = suite_lambda2z()
            elif args.suite == "lambda3z":
                rep = suite_lambda3z(args.berry)
            else:
                rep = suite_injection(args.seed, not args.no_subtraction)
            name = rep.suite + (f"_berry{args.berry:+d}" if args.suite == "lambda3z" else "")
        elif args.command == "trotter":
            if args.n < 2 or args.m_max < 1:
                raise ValueError("--n must be >= 2 and --m-max >= 1")
            rep, csv_text = suite_trotter(args.n, args.theta, args.m_max, args.axis)
            name = f"trotter_n{args.n}_axis{args.axis}"
            extra[f"{name}.csv"] = csv_text
        else:
            rep, seq = suite_synthesize(args.problem, args.seed, args.replay)
            name = "synthesize"
            extra["sequence.json"] = json.dumps(seq, sort_keys=True, indent=2) + "\n"
    except (OSError, json.JSONDecodeError, AttributeError, KeyError, TypeError, ValueError) as exc:
        print(f"chi2qudit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = report_dir(args.out)
    _write(out, name, rep, time.perf_counter() - t0)
    for fname, text in extra.items():
        (out / fname).write_text(text)
    for c in rep.checks:
        mark = "PASS" if c.passed else "FAIL"
        bound = "" if c.relation.startswith("in") else f" {c.tolerance:.3e}"
        print(f"{mark} {rep.suite}.{c.id}: {c.measured:.3e} {c.relation}{bound} ({c.anchor})")
    print(f"{'PASS' if rep.passed else 'FAIL'} {rep.suite} -> {out / (name + '.json')}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

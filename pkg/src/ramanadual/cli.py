"""Command-line interface: ``ramanadual <command> ...``.

Exit codes: 0 on success, 1 when a verification fails, 2 on a parse or
solver error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .duals import (build_classical_dual, build_ramana_dual, gap_analysis, ramana_num_constraints,
                    ramana_num_vars, verify_ramana)
from .facial import FacialReductionError, facial_reduction, verify_certificate
from .sdpa import SdpaParseError, is_program_file, load_instance, parse_sdpa_program, write_sdpa
from .serialize import (AnalysisReport, SchemaError, analysis_report_to_json,
                        certificate_from_json, certificate_to_json, ramana_solution_from_json)
from .solver import SolverOptions, Status, certify, solve

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_VERIFY, EXIT_ERROR = 0, 1, 2


class _CliError(Exception):
    """Parse or solver failure; reported on stderr with exit code 2."""


def _out(msg: str = "") -> None:
    print(msg)


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, str):
        return v
    return f"{float(v):.10g}"


def _load(path: str):
    try:
        return load_instance(path)
    except (SdpaParseError, ValueError) as exc:
        raise _CliError(f"{path}: {exc}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _CliError(f"{path}: {exc.strerror or exc}") from None


def cmd_analyze(args) -> int:
    inst = _load(args.file)
    rep = gap_analysis(inst, solve_ramana=not args.skip_ramana_solve)
    ar = AnalysisReport.from_gap_report(rep, inst)
    _out(f"instance      {inst.name}  (n={inst.n}, m={inst.m})")
    _out(f"face rank     {_fmt(rep.face_rank)}   singularity degree {_fmt(rep.singularity_steps)}")
    if ar.certificate is not None:
        _out(f"certificate   sizes {ar.certificate['block_sizes']}  valid {_fmt(ar.certificate['valid'])}")
    _out(f"primal        {_fmt(rep.primal_value)}   attained {_fmt(rep.primal_attained)}")
    _out(f"classical     {_fmt(rep.classical_dual_value)}   attained {_fmt(rep.classical_dual_attained)}")
    _out(f"strong dual   {_fmt(rep.strong_dual_value)}")
    _out(f"ramana        {_fmt(rep.ramana_value)}   attained {_fmt(rep.ramana_attained)}"
         f"   verified {_fmt(rep.ramana_verified)}")
    _out(f"gap           {_fmt(rep.gap)}")
    for err in rep.errors:
        _out(f"note          {err}")
    if args.json:
        Path(args.json).write_text(analysis_report_to_json(ar))
        _out(f"report        {args.json}")
    if rep.statuses.get("facial_reduction") != "Optimal":
        return EXIT_ERROR
    cert_ok = ar.certificate is None or ar.certificate["valid"]
    return EXIT_OK if (cert_ok and rep.ramana_verified and rep.sandwich_ok) else EXIT_VERIFY


def cmd_build_ramana(args) -> int:
    inst = _load(args.file)
    prog = build_ramana_dual(inst)
    Path(args.out).write_text(write_sdpa(prog))
    _out(f"ramana dual of {inst.name}: {prog.num_vars} variables "
         f"(closed form {ramana_num_vars(inst.n, inst.m)}), {prog.num_constraints} constraints "
         f"(closed form {ramana_num_constraints(inst.n, inst.m)})")
    _out(f"psd blocks {list(prog.psd_orders)}, free scalars {prog.n_free}")
    _out(f"written to {args.out}")
    return EXIT_OK


def cmd_facial_reduce(args) -> int:
    inst = _load(args.file)
    try:
        fr = facial_reduction(inst)
    except FacialReductionError as exc:
        raise _CliError(f"facial reduction failed: {exc}") from None
    cert = fr.certificate
    check = verify_certificate(inst, cert, args.tol)
    _out(f"face rank r = {cert.face_rank}, k = {cert.k}, sizes {list(cert.block_sizes)}")
    _out(f"slater margin {_fmt(fr.slack.slater_margin)}, cond(T) {_fmt(cert.accumulated_T.condition_number())}")
    _out(f"certificate residuals {[_fmt(v) for v in check.equation_residuals]}  valid {_fmt(check.valid)}")
    if args.cert:
        Path(args.cert).write_text(certificate_to_json(cert, inst))
        _out(f"certificate written to {args.cert}")
    return EXIT_OK if check else EXIT_VERIFY


def cmd_verify(args) -> int:
    inst = _load(args.file)
    try:
        if args.cert:
            cert = certificate_from_json(_read(args.cert), inst)
            rep = verify_certificate(inst, cert, 1e-6 if args.tol is None else args.tol)
            _out(f"certificate: valid {_fmt(rep.valid)}, max residual {_fmt(rep.max_residual)}")
        else:
            sol = ramana_solution_from_json(_read(args.ramana_solution), inst)
            rep = verify_ramana(inst, sol, 1e-9 if args.tol is None else args.tol)
            _out(f"ramana solution: valid {_fmt(rep.valid)}, objective {_fmt(rep.objective)}, "
                 f"max residual {_fmt(rep.max_residual)}")
    except (SchemaError, ValueError) as exc:
        raise _CliError(str(exc)) from None
    for msg in rep.messages:
        _out(f"  {msg}")
    return EXIT_OK if rep else EXIT_VERIFY


def cmd_solve(args) -> int:
    text = _read(args.file)
    if is_program_file(text):
        try:
            prog = parse_sdpa_program(text, name=Path(args.file).stem)
        except SdpaParseError as exc:
            raise _CliError(f"{args.file}: {exc}") from None
        what = f"conic program {prog.name}"
    else:
        inst = _load(args.file)
        prog = build_classical_dual(inst)
        what = f"classical dual pair of {inst.name}"
    opts = SolverOptions(gap_tol=args.gap_tol)
    try:
        res = solve(prog, opts)
    except ValueError as exc:
        raise _CliError(f"solver rejected the program: {exc}") from None
    _out(f"{what}: status {res.status.value} after {res.iterations} iterations")
    _out(f"inf objective {_fmt(res.primal_value)}, sup objective {_fmt(res.dual_value)}")
    if res.status not in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
        print(f"error: solver did not converge ({res.reason})", file=sys.stderr)
        return EXIT_ERROR
    chk = certify(prog, res, tol=max(10 * args.gap_tol, 1e-8))
    _out(f"certify: ok {_fmt(chk.ok)}, residuals {_fmt(chk.primal_residual)} / "
         f"{_fmt(chk.dual_residual)}, gap {_fmt(chk.gap)}")
    return EXIT_OK if chk else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ramanadual",
                                description="Exact duals and facial reduction for small SDPs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="values of (P), (D), strong and Ramana duals")
    a.add_argument("file")
    a.add_argument("--json", metavar="OUT", help="write the analysis report as JSON")
    a.add_argument("--skip-ramana-solve", action="store_true",
                   help="do not run the interior-point method on the rendered Ramana program")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("build-ramana", help="write the Ramana dual in SDPA format")
    b.add_argument("file")
    b.add_argument("out")
    b.set_defaults(func=cmd_build_ramana)

    f = sub.add_parser("facial-reduce", help="compute and check a certificate chain")
    f.add_argument("file")
    f.add_argument("--cert", metavar="OUT", help="write the certificate as JSON")
    f.add_argument("--tol", type=float, default=1e-6)
    f.set_defaults(func=cmd_facial_reduce)

    v = sub.add_parser("verify", help="check a certificate or a Ramana solution")
    v.add_argument("file")
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--cert", metavar="JSON")
    g.add_argument("--ramana-solution", metavar="JSON")
    v.add_argument("--tol", type=float, default=None,
                   help="default 1e-6 for certificates, 1e-9 for Ramana solutions")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="interior-point solve of the classical pair or a program file")
    s.add_argument("file")
    s.add_argument("--gap-tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit status: 0 when the computed verdict is true (or the command simply
succeeded), 1 when it is false, 2 when the input could not be processed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import channels as ch
from . import io
from . import povm
from .config import DEFAULT_FEAS_TOL, DEFAULT_SEED, RunConfig, _env_tol
from .errors import CovxError
from .optimizer import ConvexSetSpec, maximize_linear
from .reps import FiniteGroup, GroupElement, isotypic_decompose

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class _Fail(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covx", description="Extremality of covariant POVMs and quantum operations.")
    p.add_argument("--tol", type=float, default=None, help="relative rank threshold (default 1e-9, or $COVX_TOL)")
    p.add_argument("--feas-tol", type=float, default=DEFAULT_FEAS_TOL, help="feasibility residual bound")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED, help="RNG seed")
    p.add_argument("--output", choices=("json", "text"), default="json")
    sub = p.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("decompose", help="isotypic decomposition of a representation")
    d.add_argument("rep")

    pv = sub.add_parser("povm", help="covariant POVM seeds").add_subparsers(dest="action", required=True)
    for name in ("check", "extremal", "witness"):
        q = pv.add_parser(name)
        q.add_argument("xi")
        q.add_argument("rep")
        if name != "check":
            q.add_argument("--witness-out", "-o", default=None, help="write the witness matrix here")
    q = pv.add_parser("prob", help="outcome probability density at a group element")
    q.add_argument("xi")
    q.add_argument("rep")
    q.add_argument("rho")
    g = q.add_mutually_exclusive_group()
    g.add_argument("--angle", type=float, default=None)
    g.add_argument("--index", type=int, default=None)

    cc = sub.add_parser("channel", help="Choi operators").add_subparsers(dest="action", required=True)
    for name in ("check", "extremal", "witness"):
        q = cc.add_parser(name)
        q.add_argument("choi")
        q.add_argument("rep", nargs="?" if name == "check" else None)
        q.add_argument("--rep-in", default=None, help="input representation U; REP is then V on the output")
        if name != "check":
            q.add_argument("--witness-out", "-o", default=None)
    q = cc.add_parser("apply")
    q.add_argument("choi")
    q.add_argument("rho")
    q.add_argument("--heisenberg", action="store_true", help="apply the dual map to an output observable")
    q = cc.add_parser("example")
    q.add_argument("name", choices=ch.BUILTIN_NAMES)
    q.add_argument("--d", type=int, default=None)
    q.add_argument("--check", choices=("extremal", "tni", "covariance", "all"), default=None)

    o = sub.add_parser("optimize", help="maximize Tr[W Z] over a covariant set")
    o.add_argument("kind", choices=("povm", "channel"))
    o.add_argument("--cost", required=True)
    o.add_argument("--rep", required=True)
    o.add_argument("--rep-in", default=None)
    o.add_argument("--dim-in", type=int, default=None, help="input dimension (channels)")
    o.add_argument("--restarts", type=int, default=4)
    o.add_argument("--max-iter", type=int, default=100_000)
    o.add_argument("--out", default=None, help="write the maximizer here")

    e = sub.add_parser("examples", help="write every built-in instance to a directory")
    e.add_argument("--out-dir", default="covx_examples")
    return p


# ------------------------------------------------------------------ output


def _emit(cfg: RunConfig, report: dict, stream=None):
    stream = stream or sys.stdout
    if cfg.output == "json":
        stream.write(json.dumps(report, indent=1) + "\n")
        return
    for key, val in report.items():
        if isinstance(val, dict) and "rows" in val and "data" in val:
            val = f"<{val['rows']}x{val['cols']} matrix>"
        elif isinstance(val, (list, dict)):
            val = json.dumps(val)
        stream.write(f"{key}: {val}\n")


def _rep(path, rep_in=None):
    rep = io.load_rep(path)
    if rep_in is not None:
        rep = ch.channel_rep(rep, io.load_rep(rep_in))
    return rep


# ---------------------------------------------------------------- commands


def _decompose(args, cfg):
    dec = isotypic_decompose(_rep(args.rep), cfg.tol, cfg.rng_seed)
    _emit(cfg, {"blocks": dec.table(), "sum_m_squared": dec.sum_sq_multiplicities(),
                "residuals": dec.residuals()})
    return EXIT_TRUE


def _povm(args, cfg):
    rep = _rep(args.rep)
    dec = isotypic_decompose(rep, cfg.tol, cfg.rng_seed)
    xi = io.load_matrix(args.xi)
    if args.action == "check":
        feas = povm.check_seed(xi, dec, cfg.feas_tol)
        _emit(cfg, feas.to_json())
        return EXIT_TRUE if feas.feasible else EXIT_FALSE
    seed = povm.PovmSeed(xi, dec)
    if args.action == "prob":
        rho = io.load_matrix(args.rho)
        if args.index is not None or (args.angle is None and isinstance(rep, FiniteGroup)):
            g = GroupElement(index=args.index or 0)
        else:
            g = GroupElement(angle=args.angle or 0.0)
        val = povm.probability_density(seed, rho, g, cfg.feas_tol)
        _emit(cfg, {"density": val})
        return EXIT_TRUE
    rep_ = povm.extremality(seed, cfg.tol, cfg.feas_tol)
    return _finish_extremality(args, cfg, rep_)


def _finish_extremality(args, cfg, report):
    out = report.to_json()
    if report.witness is not None and args.witness_out:
        io.save_matrix(args.witness_out, report.witness)
        out["witness_file"] = str(args.witness_out)
    _emit(cfg, out)
    if args.action == "witness":
        return EXIT_TRUE if report.witness is not None else EXIT_FALSE
    return EXIT_TRUE if report.is_extremal else EXIT_FALSE


def _channel(args, cfg):
    if args.action == "example":
        return _channel_example(args, cfg)
    R, dim_in, dim_out = io.load_channel(args.choi)
    choi = ch.ChoiOperator(R, dim_in, dim_out)
    if args.action == "apply":
        M = io.load_matrix(args.rho)
        out = ch.apply_heisenberg(choi, M) if args.heisenberg else ch.apply_channel(choi, M)
        _emit(cfg, {"matrix": io.matrix_to_json(out)})
        return EXIT_TRUE
    if args.action == "check":
        v = ch.check_tni(choi, cfg.feas_tol)
        out = v.to_json()
        ok = v.ok
        if args.rep:
            res = ch.covariance_check(R, _rep(args.rep, args.rep_in))
            out["covariance_residual"] = res
            ok = ok and res <= cfg.feas_tol
        _emit(cfg, out)
        return EXIT_TRUE if ok else EXIT_FALSE
    rep = _rep(args.rep, args.rep_in)
    dec = isotypic_decompose(rep, cfg.tol, cfg.rng_seed)
    cov = ch.from_commutant(R, dec, dim_in, dim_out, tol=max(cfg.feas_tol, 1e-8))
    return _finish_extremality(args, cfg, ch.qo_extremality(cov, cfg.tol, cfg.feas_tol))


def _channel_example(args, cfg):
    cov, meta = ch.builtin_examples(args.name, args.d)
    out = {"name": args.name, "R": io.channel_to_json(cov.R, cov.dim_in, cov.dim_out),
           "rep": io.rep_to_json(meta["rep"]), "rank": meta["rank"]}
    if "fidelity" in meta:
        out["fidelity"] = meta["fidelity"]
    ok = True
    if args.check in ("tni", "all"):
        v = ch.check_tni(cov, cfg.feas_tol)
        out["tni"] = v.status
        ok &= v.ok
    if args.check in ("covariance", "all"):
        res = ch.covariance_check(cov.R, meta["rep"])
        out["covariance_residual"] = res
        ok &= res <= cfg.feas_tol
    if args.check in ("extremal", "all"):
        rep_ = ch.qo_extremality(cov, cfg.tol, cfg.feas_tol)
        out["extremality"] = rep_.to_json()
        ok &= rep_.is_extremal
    _emit(cfg, out)
    return EXIT_TRUE if ok else EXIT_FALSE


def _optimize(args, cfg):
    rep = _rep(args.rep, args.rep_in)
    dec = isotypic_decompose(rep, cfg.tol, cfg.rng_seed)
    W = io.load_matrix(args.cost)
    if args.kind == "povm":
        spec = ConvexSetSpec.povm(dec)
    else:
        if args.dim_in is None:
            raise _Fail("optimize channel needs --dim-in")
        if dec.carrier_dim % args.dim_in:
            raise _Fail(f"--dim-in {args.dim_in} does not divide the carrier dimension {dec.carrier_dim}")
        spec = ConvexSetSpec.channel(dec, args.dim_in, dec.carrier_dim // args.dim_in)
    res = maximize_linear(W, spec, cfg, restarts=args.restarts, max_iter=args.max_iter)
    out = res.to_json()
    if args.kind == "povm":
        out["extremality"] = povm.extremality(povm.PovmSeed(res.maximizer, dec), cfg.tol, cfg.feas_tol).to_json()
    else:
        cov = ch.from_commutant(res.maximizer, dec, spec.dim_in, spec.dim_out, tol=1e-6)
        out["extremality"] = ch.qo_extremality(cov, cfg.tol, cfg.feas_tol).to_json()
        out.update(dim_in=spec.dim_in, dim_out=spec.dim_out)
    if args.out:
        io.save_matrix(args.out, res.maximizer)
    _emit(cfg, out)
    return EXIT_TRUE if res.converged else EXIT_FALSE


def _examples(args, cfg):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    cases = [("clone12", None), ("clone13", None)] + [
        (n, d) for n in ("depolarizing", "transpose_plus", "transpose_minus") for d in (2, 3)]
    for name, d in cases:
        cov, meta = ch.builtin_examples(name, d)
        stem = name if d is None else f"{name}_d{d}"
        io.write_json(out_dir / f"{stem}.json", io.channel_to_json(cov.R, cov.dim_in, cov.dim_out))
        io.save_rep(out_dir / f"rep_{stem}.json", meta["rep"])
        written += [f"{stem}.json", f"rep_{stem}.json"]
        if "W" in meta:
            io.save_matrix(out_dir / f"cost_{stem}.json", meta["W"])
            written.append(f"cost_{stem}.json")
    _emit(cfg, {"out_dir": str(out_dir), "files": written})
    return EXIT_TRUE


_DISPATCH = {"decompose": _decompose, "povm": _povm, "channel": _channel,
             "optimize": _optimize, "examples": _examples}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_TRUE if exc.code == 0 else EXIT_ERROR
    try:
        cfg = RunConfig(tol=args.tol if args.tol is not None else _env_tol(), feas_tol=args.feas_tol,
                        rng_seed=args.seed, output=args.output)
        old = sys.stdout
        sys.stdout = stdout
        try:
            return _DISPATCH[args.cmd](args, cfg)
        finally:
            sys.stdout = old
    except (CovxError, ValueError, TypeError, OSError, _Fail) as exc:
        stderr.write(f"covx: error: {exc}\n")
        return EXIT_ERROR


def main(argv=None) -> int:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

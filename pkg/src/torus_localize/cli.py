"""Command-line entry point.

Every command prints (or writes with ``--out``) one JSON document holding
``version``, ``command``, ``config``, ``seed``, ``result`` and
``wall_time_ms``.  Exit codes: 0 success, 2 invalid input, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import FormConfig, corpus_names, load_config
from .ellipsoid import (binary_reduce, cc_sequence, enumerate_level_set, gaussian_representations,
                        linnik_admissible)
from .errors import NumericFailure, TorusLocalizeError, ValidationError
from .form_arith import decompose, diophantine_probe, is_integer_multiple
from .localize import (MODES, EigenfunctionSpec, approximation_error, field_cl_norm,
                       obstruction_scan, synthesize, synthesize_quasimode)
from .nodal import extract_components, find_critical_points, sample_field
from .parallel import ENV_THREADS, default_threads
from .spherical import (HelmholtzField, HerglotzDensity, ScriptJField, plane_wave_sum,
                        write_csv, write_pgm)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _density(arg: str | None, d: int, seed: int) -> HerglotzDensity:
    if arg in (None, "one", "1"):
        return HerglotzDensity.constant(d)
    if arg.startswith("random:"):
        return HerglotzDensity.random(d, int(arg.split(":", 1)[1]), seed)
    try:
        with open(arg) as fh:
            p = HerglotzDensity.from_text(fh.read())
    except OSError as exc:
        raise ValidationError(f"cannot read density {arg}: {exc}") from None
    if p.d != d:
        raise ValidationError(f"density has dim {p.d}, form has dim {d}")
    return p


def _target(p: HerglotzDensity):
    if p.L == 0:
        scale = p.coeffs[0].real / (1.0 if p.d == 2 else math.sqrt(4 * math.pi))
        if scale == 1.0:
            return ScriptJField(p.d)
    return HelmholtzField(p)


# commands -------------------------------------------------------------------

def cmd_analyze_form(a, threads):
    cfg = load_config(a.form)
    dec = decompose(cfg.Q)
    res = {"form": cfg.describe(), "m": dec.m, "decomposition": dec.as_json(),
           "integer_multiple": dec.m == 1}
    if dec.m == 1:
        res["beta"] = dec.as_json()["betas"][0]
    rep = diophantine_probe(cfg.Q, a.kmax, a.tau, threads)
    res.update({"betas": dec.as_json()["betas"], "parts": dec.as_json()["parts"],
                "max_multiplicity": rep.max_multiplicity,
                "diophantine_margin": rep.margin, "diophantine": rep.as_json()})
    return res


def _integer_piece(cfg: FormConfig):
    r = is_integer_multiple(cfg.Q)
    if not r.yes:
        return None, None
    return r.integer_form, r.beta


def cmd_enumerate(a, threads):
    cfg = load_config(a.form)
    Q1, beta = _integer_piece(cfg)
    if Q1 is None:
        raise ValidationError("enumerate needs a multiple of an integer form; use analyze-form")
    st = enumerate_level_set(Q1, a.level, threads=threads)
    res = {"form": cfg.describe(), "beta": str(beta), "level": a.level,
           "lambda_over_4pi2": str(beta * a.level),
           "count": len(st), "points": st.points.tolist()}
    if cfg.d >= 3:
        try:
            adm = linnik_admissible(Q1, a.level)
            res["linnik"] = {"admissible": adm.admissible, "reasons": list(adm.reasons),
                             "modulus": adm.modulus,
                             "witness": list(adm.witness) if adm.witness else None}
        except ValidationError as exc:
            res["linnik"] = {"error": str(exc)}
    return res


def cmd_reduce(a, threads):
    cfg = load_config(a.form)
    Q1, _ = _integer_piece(cfg)
    if Q1 is None:
        raise ValidationError("reduce needs a multiple of an integer form")
    r = binary_reduce(Q1)
    return {"form": cfg.describe(), "q11": r.q11, "q12": r.q12, "q22": r.q22, "tq": r.tq,
            "p": r.p, "q": r.q, "T": [list(row) for row in r.T], "scale": r.scale,
            "reduced_form": [1, 0, r.q], "identity_holds": r.identity_holds()}


def _decimal_digits(v: int) -> int:
    # str() of huge ints is capped by the interpreter, so count by powers of ten
    k = max(1, int(v.bit_length() * math.log10(2)))
    while 10 ** k <= v:
        k += 1
    while k > 1 and 10 ** (k - 1) > v:
        k -= 1
    return k


def cmd_cc_seq(a, threads):
    cc = cc_sequence(a.q, a.j, m_cap=a.m_cap, factor=a.factors or a.reps > 0)
    digits = _decimal_digits(cc.value)
    res = {"q": cc.q, "j": cc.j, "upper_index": cc.upper, "digits": digits,
           "value_hex": hex(cc.value)}
    if digits < 4000:
        res["value"] = str(cc.value)
    if cc.factored is not None and a.factors:
        res["factors"] = [[str(p), e] for p, e in cc.factored.factors]
    if a.reps > 0:
        if cc.q != 1:
            raise ValidationError("representations are generated for q = 1 only")
        reps = gaussian_representations(cc.factored, cap=a.reps, seed=a.seed)
        res["representations"] = {"total": str(reps.total), "sampled": reps.sampled,
                                  "returned": len(reps.points),
                                  "first": [[str(x), str(y)] for x, y in reps.points[:5]]}
    return res


def cmd_synthesize(a, threads):
    cfg = load_config(a.form)
    p = _density(a.density, cfg.d, a.seed)
    spec = synthesize(cfg.Q, a.level, p, a.mode, B=cfg.B, L_fit=a.fit_degree, threads=threads)
    res = {"form": cfg.describe(), "level": a.level, "mode": a.mode,
           "count": len(spec.K), "lambda": spec.lam, "meta": spec.meta}
    if a.ball > 0:
        target = _target(p)
        err = approximation_error(spec, target, a.ball, a.cl, threads)
        res["error"] = err.as_json()
        res["target_cl_norm"] = field_cl_norm(target, a.ball, a.cl, threads)
    if a.spec_out:
        spec.dump(a.spec_out)
        res["spec_file"] = a.spec_out
    else:
        res["spec"] = spec.to_json()
    return res


def cmd_obstruct(a, threads):
    cfg = load_config(a.form)
    if a.target == "scriptj":
        target = ScriptJField(cfg.d)
    elif a.target.startswith("planewave"):
        target = plane_wave_sum(int(a.target[len("planewave"):] or 5), cfg.d)
    else:
        target = HelmholtzField(_density(a.target, cfg.d, a.seed))
    rep = obstruction_scan(cfg.Q, target, a.lmax, a.ball, B=cfg.B, threads=threads)
    return {"form": cfg.describe(), "lmax": a.lmax, "ball": a.ball, **rep.as_json()}


def cmd_quasimode(a, threads):
    cfg = load_config(a.form)
    p = _density(a.density, cfg.d, a.seed)
    spec = synthesize_quasimode(cfg.B, a.Lambda, a.eta, p)
    res = {"form": cfg.describe(), "Lambda": a.Lambda, "eta": a.eta,
           "window": list(spec.window), "count": len(spec.K)}
    if a.ball > 0:
        res["error"] = approximation_error(spec, _target(p), a.ball, a.cl, threads).as_json()
    if a.spec_out:
        spec.dump(a.spec_out)
        res["spec_file"] = a.spec_out
    return res


def cmd_nodal(a, threads):
    spec = EigenfunctionSpec.load(a.spec)
    f = spec.field()
    grid = sample_field(f, a.ball, a.resolution, threads)
    comps = extract_components(grid)
    crit = find_critical_points(f, grid, ball=a.crit_ball)
    res = {"spec": a.spec, "ball": a.ball, "resolution": grid.h, "perturbed": grid.perturbed,
           "components": [c.as_json() for c in comps],
           "closed_inside": sum(c.closed and c.inside_ball for c in comps),
           "critical_points": [c.as_json() for c in crit.points],
           "unresolved": crit.unresolved}
    if a.components:
        with open(a.components, "w") as fh:
            json.dump(_jsonable(res["components"]), fh, indent=1)
    if a.raster:
        if grid.d != 2:
            raise ValidationError("rasters are written for d = 2 only")
        write_pgm(a.raster, grid.values.T)
    if a.csv:
        write_csv(a.csv, grid.points(), grid.values.ravel())
    return res


def cmd_selftest(a, threads):
    from .selftest import run_selftest
    checks = run_selftest(threads)
    failed = [c for c in checks if not c["ok"]]
    if failed:
        raise NumericFailure("selftest failed: " + ", ".join(c["name"] for c in failed))
    return {"checks": checks, "corpus": corpus_names()}


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torus-localize",
                                 description="Spectral geometry of flat tori.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${ENV_THREADS} or all cores)")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        return sp

    sp = common(sub.add_parser("analyze-form", help="decomposition and Diophantine probe"))
    sp.add_argument("--form", "--config", dest="form", required=True)
    sp.add_argument("--kmax", type=int, default=20)
    sp.add_argument("--tau", type=float, default=None)
    sp.set_defaults(run=cmd_analyze_form)

    sp = common(sub.add_parser("enumerate", help="integer points on a level set"))
    sp.add_argument("--form", required=True)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--json", dest="out_json", help="alias of --out")
    sp.set_defaults(run=cmd_enumerate)

    sp = common(sub.add_parser("reduce", help="binary reduction to K1^2 + q K2^2"))
    sp.add_argument("--form", required=True)
    sp.set_defaults(run=cmd_reduce)

    sp = common(sub.add_parser("cc-seq", help="product of q m^2 + 1"))
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--factors", action="store_true")
    sp.add_argument("--m-cap", type=int, default=10 ** 4)
    sp.add_argument("--reps", type=int, default=0, help="also generate this many representations")
    sp.set_defaults(run=cmd_cc_seq)

    sp = common(sub.add_parser("synthesize", help="eigenfunction approximating a Herglotz field"))
    sp.add_argument("--form", required=True)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--density", default=None, help="file, 'one' or 'random:L'")
    sp.add_argument("--mode", choices=MODES, default="paper")
    sp.add_argument("--fit-degree", type=int, default=None)
    sp.add_argument("--ball", type=float, default=5.0)
    sp.add_argument("--cl", type=int, default=0)
    sp.add_argument("--spec-out", default=None)
    sp.set_defaults(run=cmd_synthesize)

    sp = common(sub.add_parser("obstruct", help="eigenspace distances for every stratum"))
    sp.add_argument("--form", required=True)
    sp.add_argument("--lmax", type=float, default=1e4)
    sp.add_argument("--target", default="scriptj", help="scriptj, planewaveJ or a density file")
    sp.add_argument("--ball", type=float, default=1.0)
    sp.set_defaults(run=cmd_obstruct)

    sp = common(sub.add_parser("quasimode", help="frequency-window quasimode"))
    sp.add_argument("--form", required=True)
    sp.add_argument("--lambda", dest="Lambda", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--density", default=None)
    sp.add_argument("--ball", type=float, default=5.0)
    sp.add_argument("--cl", type=int, default=0)
    sp.add_argument("--spec-out", default=None)
    sp.set_defaults(run=cmd_quasimode)

    sp = common(sub.add_parser("nodal", help="nodal components and critical points"))
    sp.add_argument("--spec", required=True)
    sp.add_argument("--ball", type=float, default=10.0)
    sp.add_argument("--resolution", type=float, default=0.05)
    sp.add_argument("--crit-ball", type=float, default=1.0)
    sp.add_argument("--components")
    sp.add_argument("--raster")
    sp.add_argument("--csv")
    sp.set_defaults(run=cmd_nodal)

    sp = common(sub.add_parser("selftest", help="brute-force oracle checks on the corpus"))
    sp.set_defaults(run=cmd_selftest)
    return ap


def _config_record(args) -> dict:
    skip = {"run", "threads", "out", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def render(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=1, sort_keys=True) + "\n"


def main(argv=None, env=None) -> int:
    env = os.environ if env is None else env
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None:
        threads = max(1, args.threads)
    elif env.get(ENV_THREADS):
        threads = max(1, int(env[ENV_THREADS]))
    else:
        threads = default_threads()
    out = getattr(args, "out", None) or getattr(args, "out_json", None)
    t0 = time.perf_counter()
    try:
        result = args.run(args, threads)
    except (TorusLocalizeError, ValueError) as exc:
        code = 3 if isinstance(exc, NumericFailure) else 2
        print(f"torus-localize {args.command}: {exc}", file=sys.stderr)
        if code == 2 and not isinstance(exc, TorusLocalizeError):
            ap.print_usage(sys.stderr)
        return code
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"torus-localize {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3
    report = {"version": __version__, "command": args.command, "config": _config_record(args),
              "seed": args.seed, "result": result,
              "wall_time_ms": round(1000 * (time.perf_counter() - t0), 3)}
    text = render(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

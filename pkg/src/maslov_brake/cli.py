"""Command line entry point ``maslov-brake <task> [--config file.json] [--seed S] [--out DIR]``.

Exit codes: 0 pass, 1 theory-invariant failure, 2 usage or parse error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import report
from .config import TASKS, RunConfig
from .errors import ConfigError, NumericalError, PreconditionError, TheoryViolation

EXIT_OK, EXIT_THEORY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# input resolution
# ---------------------------------------------------------------------------


def _systems(cfg: RunConfig) -> list[tuple[str, object, dict]]:
    """``(label, CoefficientPath, metadata)`` triples for the configured source."""
    from .corpus import generate_corpus, mixed_corpus
    from .iteration import normal_form_path
    from .symplectic import CoefficientPath

    if cfg.system is not None:
        try:
            if isinstance(cfg.system, dict):
                B = CoefficientPath.from_json_dict(cfg.system)
                label = "inline"
            else:
                B = CoefficientPath.load(cfg.system)
                label = Path(cfg.system).stem
        except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"field 'system': cannot load coefficient path ({exc})") from exc
        return [(label, B, {"source": "system"})]
    if cfg.normal_form is not None:
        kind, *params = cfg.normal_form
        try:
            B = normal_form_path(str(kind), *params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'normal_form': {exc}") from exc
        return [("normal_form", B, {"source": "normal_form", "normal_form": cfg.normal_form})]
    c = cfg.corpus
    if c.get("mixed"):
        samples = mixed_corpus(int(c.get("count", 10)), cfg.seed, tuple(c.get("scales", (0.5, 2.0, 8.0))), tuple(c.get("dims", (1, 2, 3))))
    else:
        samples = generate_corpus(int(c.get("n", 1)), int(c.get("count", 10)), cfg.seed, float(c.get("scale", 2.0)), int(c.get("order", 2)))
    return [(f"n{s.n}-s{s.seed}-i{s.index}", s.path, {"source": "corpus", "seed": s.seed, "index": s.index, "n": s.n, "scale": s.scale}) for s in samples]


def _hamiltonian(cfg: RunConfig):
    from .hamiltonian import BUILTINS, HamiltonianSpec, builtin, second_order_spec

    h = cfg.hamiltonian
    if isinstance(h, str) and h in BUILTINS:
        spec = builtin(h)
    else:
        try:
            d = h if isinstance(h, dict) else json.loads(Path(h).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"field 'hamiltonian': not a builtin name and not a readable JSON file ({exc})") from exc
        spec = HamiltonianSpec.from_dict(d)
    if cfg.variant is not None:
        if not spec.kind.startswith("second-order"):
            raise ConfigError("field 'variant': only second-order Hamiltonians have variants")
        spec = second_order_spec(spec.terms, spec.n, cfg.variant, spec.name)
    return spec


def _policy(cfg: RunConfig):
    from .galerkin import IndexPolicy

    return IndexPolicy(m_max=cfg.m_max)


def _map(cfg: RunConfig, fn, items):
    """Order-preserving fan-out over independent items."""
    if cfg.workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# tasks; each returns (payload, tables, summary lines, failures)
# ---------------------------------------------------------------------------


def task_index(cfg):
    from .galerkin import index_l0_omega, index_l0_via_relative, index_omega_periodic
    from .winding import l0_index_from_coefficients

    policy = _policy(cfg)

    def one(item):
        label, B, meta = item
        rows, fails = [], []
        if cfg.flavor == "l0":
            res = {}
            if cfg.method in ("winding", "both"):
                res["winding"] = l0_index_from_coefficients(B)
            if cfg.method in ("galerkin", "both"):
                res["galerkin"] = index_l0_via_relative(B, policy)
            if len(res) == 2 and (res["winding"].i, res["winding"].nu) != (res["galerkin"].i, res["galerkin"].nu):
                fails.append(f"{label}: winding and Galerkin L0 indices disagree")
            for method, p in res.items():
                rows.append([label, "l0", "", method, p.i, p.nu])
            return {"label": label, "meta": meta, "results": {k: v.as_dict() for k, v in res.items()}}, rows, fails
        out = []
        for ang in cfg.omega:
            if cfg.flavor == "omega":
                p = index_omega_periodic(B, float(ang), policy)
            else:
                p = index_l0_omega(B, float(ang), policy)
            out.append(p.as_dict())
            rows.append([label, cfg.flavor, float(ang), "galerkin", p.i, p.nu])
        return {"label": label, "meta": meta, "results": out}, rows, fails

    return _collect(cfg, one, ["system", "flavor", "omega_angle", "method", "i", "nu"], "index")


def task_iterate(cfg):
    from .galerkin import index_l0_via_relative
    from .iteration import IterationContext

    policy = _policy(cfg)

    def one(item):
        label, B, meta = item
        ctx = IterationContext(B, policy)
        res, rows, fails = [], [], []
        for k in cfg.k:
            it = ctx.iterated(k)
            w = ctx.l0(k)
            g = index_l0_via_relative(B.rescaled(float(k)), policy)
            agree = (w.i, w.nu) == (g.i, g.nu)
            if not agree:
                fails.append(f"{label}: engines disagree on the {k}-th iterate")
            res.append({"k": k, "junction_error": it.junction_error, "endpoint": it.full.end, "winding": w.as_dict(), "galerkin": g.as_dict(), "agree": agree})
            rows.append([label, k, w.i, w.nu, g.i, g.nu, agree, it.junction_error])
        return {"label": label, "meta": meta, "iterates": res}, rows, fails

    return _collect(cfg, one, ["system", "k", "i_winding", "nu_winding", "i_galerkin", "nu_galerkin", "agree", "junction_error"], "iterate")


def task_bott(cfg):
    from .iteration import IterationContext, bott_l0_check, bott_nullity_check

    policy = _policy(cfg)

    def one(item):
        label, B, meta = item
        ctx = IterationContext(B, policy)
        res, rows, fails = [], [], []
        for k in cfg.k:
            b = bott_l0_check(B, k, ctx)
            nl = bott_nullity_check(B, k, ctx)
            verdict = "equal" if b.equal and nl.equal else "unequal"
            if verdict != "equal":
                fails.append(f"{label}: Bott formula fails at k={k}")
            res.append({"k": k, "index": b.as_dict(), "nullity": nl.as_dict(), "verdict": verdict})
            rows.append([label, meta.get("n", B.n), k, b.lhs_i, b.rhs_i, b.lhs_nu, b.rhs_nu, nl.direct, nl.root_sum, verdict])
        return {"label": label, "meta": meta, "checks": res}, rows, fails

    header = ["system", "n", "k", "lhs_i", "rhs_i", "lhs_nu", "rhs_nu", "nu1_direct", "nu1_root_sum", "verdict"]
    return _collect(cfg, one, header, "bott")


def task_ineq(cfg):
    from .iteration import IterationContext, iteration_inequality_check

    policy = _policy(cfg)

    def one(item):
        label, B, meta = item
        ctx = IterationContext(B, policy)
        res, rows, fails = [], [], []
        for k in cfg.k:
            if k < 2:
                raise ConfigError("field 'k': the inequality task needs k >= 2")
            r = iteration_inequality_check(B, k, ctx)
            if not r.holds:
                fails.append(f"{label}: iteration inequality violated at k={k}")
            res.append(r.as_dict())
            rows.append([label, meta.get("n", B.n), k, r.lhs, r.mid, r.rhs, r.holds, r.left_equal, r.right_equal, r.classifier["verdict"], r.rhs_literal, r.literal_holds])
        return {"label": label, "meta": meta, "checks": res}, rows, fails

    header = ["system", "n", "k", "lower", "i_L0_k", "upper", "holds", "lower_equal", "upper_equal", "classifier", "upper_literal", "literal_holds"]
    return _collect(cfg, one, header, "ineq")


def task_split(cfg):
    from .iteration import splitting_numbers

    policy = _policy(cfg)

    def one(item):
        label, B, meta = item
        res, rows = [], []
        for ang in cfg.omega:
            s = splitting_numbers(B, float(ang), policy=policy)
            res.append(s.as_dict())
            rows.append([label, float(ang), s.Splus, s.Sminus, s.nu])
        return {"label": label, "meta": meta, "splitting": res}, rows, []

    return _collect(cfg, one, ["system", "omega_angle", "S_plus", "S_minus", "nu"], "split")


def task_relindex(cfg):
    from .galerkin import index_function_scan, relative_index

    policy = _policy(cfg)
    label, B, meta = _systems(cfg)[0]
    tables, fails = {}, []
    if cfg.scan is not None:
        t0, t1, steps = cfg.scan
        table = index_function_scan(B, np.linspace(float(t0), float(t1), int(steps)), policy, strict=False)
        if not table.ok:
            fails.append(f"{label}: index-function scan checks failed {table.checks}")
        payload = {"label": label, "meta": meta, "scan": table.as_dict()}
        tables["scan"] = (["theta", "i", "nu"], [[r[0], r[1], r[2]] for r in table.rows])
        summary = [f"scan over {int(steps)} angles: jumps={len(table.jumps)} ok={table.ok}"]
    else:
        r = relative_index(B, cfg.kind, cfg.theta, policy)
        payload = {"label": label, "meta": meta, "relative_index": r.as_dict()}
        tables["history"] = (["m", "neg_A_minus_B", "neg_A"], r.history)
        summary = [f"relative index ({cfg.kind}, theta={cfg.theta}) = {r.value}, nullity {r.nullity}, m*={r.mStar}"]
    return payload, tables, summary, fails


def _certificates(cfg, with_orbit: bool):
    from .brake import hessian_spectrum, linearize_orbit, verify_brake_certificate

    spec = _hamiltonian(cfg)
    lo, hi = cfg.morse_levels
    payload, tables, summary, fails = {"hamiltonian": spec.as_dict(), "certificates": []}, {}, [], []
    for tau in cfg.tau:
        cert = verify_brake_certificate(
            spec,
            float(tau),
            _policy(cfg),
            seeds=cfg.seeds,
            morse_levels=range(lo, hi + 1),
            period_tol=cfg.tolerances["period"],
            junction_tol=cfg.tolerances["junction"],
        )
        payload["certificates"].append(cert.as_dict())
        tag = f"tau{float(tau):g}"
        summary.append(f"tau={float(tau):g}: passed={cert.passed} " + " ".join(f"{k}={v}" for k, v in cert.clauses.items()))
        if not cert.passed:
            fails.append(f"certificate failed at tau={tau}: {[k for k, v in cert.clauses.items() if v is False]}")
        if with_orbit:
            n2 = 2 * spec.n
            tables[f"orbit_{tag}"] = (["t"] + [f"z{i + 1}" for i in range(n2)], cert.orbit.csv_rows())
            ev = hessian_spectrum(linearize_orbit(cert.orbit), hi)
            tables[f"hessian_{tag}"] = (["index", "eigenvalue"], [[i, float(v)] for i, v in enumerate(ev)])
    return payload, tables, summary, fails


def task_solve(cfg):
    return _certificates(cfg, True)


def task_verify(cfg):
    return _certificates(cfg, False)


def task_corpus(cfg):
    from .corpus import generate_corpus, mixed_corpus
    from .symplectic import check_brake_symmetry
    from .winding import l0_index_from_coefficients

    c = cfg.corpus
    if c.get("mixed"):
        samples = mixed_corpus(int(c.get("count", 10)), cfg.seed, tuple(c.get("scales", (0.5, 2.0, 8.0))), tuple(c.get("dims", (1, 2, 3))))
    else:
        samples = generate_corpus(int(c.get("n", 1)), int(c.get("count", 10)), cfg.seed, float(c.get("scale", 2.0)), int(c.get("order", 2)))

    def one(s):
        sym = check_brake_symmetry(s.path)["max_violation"]
        p = l0_index_from_coefficients(s.path)
        return s, sym, p

    results = _map(cfg, one, samples)
    rows = [[s.seed, s.index, s.n, s.scale, sym, p.i, p.nu] for s, sym, p in results]
    fails = [f"sample {s.index}: symmetry violation {sym:.2e}" for s, sym, _ in results if sym > 1e-12]
    distinct = sorted({p.i for _, _, p in results})
    payload = {"samples": [s.as_dict() for s in samples], "distinct_i_L0": distinct}
    summary = [f"{len(samples)} samples, distinct i_L0 values {distinct}, max symmetry violation {max(r[4] for r in rows):.2e}"]
    return payload, {"summary": (["seed", "index", "n", "scale", "symmetry_violation", "i_L0", "nu_L0"], rows)}, summary, fails


def _collect(cfg, one, header, name):
    items = _systems(cfg)
    results = _map(cfg, one, items)
    payload = {"results": [r[0] for r in results]}
    rows = [row for r in results for row in r[1]]
    fails = [f for r in results for f in r[2]]
    summary = [f"{name}: {len(items)} system(s), {len(rows)} row(s), {len(fails)} failure(s)"]
    return payload, {"summary": (header, rows)}, summary, fails


TASK_FUNCS = {
    "index": task_index,
    "iterate": task_iterate,
    "bott": task_bott,
    "ineq": task_ineq,
    "split": task_split,
    "relindex": task_relindex,
    "solve": task_solve,
    "verify": task_verify,
    "corpus": task_corpus,
}


def run_config(cfg: RunConfig) -> tuple[int, list[Path]]:
    """Run one validated configuration and write its artifacts to ``cfg.out``."""
    started = time.time()
    payload, tables, summary, fails = TASK_FUNCS[cfg.task](cfg)
    status = EXIT_THEORY if fails else EXIT_OK
    payload = {"task": cfg.task, "seed": cfg.seed, "config": {k: v for k, v in cfg.to_dict().items() if k != "out"}, "status": "fail" if fails else "pass", "failures": fails, **payload}
    summary = [f"task {cfg.task} seed {cfg.seed}: {'FAIL' if fails else 'PASS'}"] + summary + fails
    files = report.emit_report(cfg.out, cfg.task, payload, tables, summary)
    files.append(report.write_metadata(cfg.out, " ".join(sys.argv), started))
    return status, files


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_scan(text: str) -> list:
    try:
        a, b, c = text.split(":")
        return [float(a), float(b), int(c)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("scan must look like theta0:theta1:steps") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maslov-brake", description="L0-index computation, iteration checks and brake-orbit solving.")
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--system", help="coefficient-path JSON file")
    p.add_argument("--normal-form", nargs="+", help="e.g. N1 1 1, R 2.0, hyperbolic 1.0")
    p.add_argument("--n", type=int, help="corpus dimension")
    p.add_argument("--count", type=int, help="corpus size")
    p.add_argument("--scale", type=float, help="corpus coefficient scale")
    p.add_argument("--flavor", choices=("l0", "omega", "l0-omega"))
    p.add_argument("--method", choices=("winding", "galerkin", "both"))
    p.add_argument("--omega", type=float, nargs="+", help="angles of omega")
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--kind", choices=("L0-fourier", "L0-omega", "periodic-omega"))
    p.add_argument("--theta", type=float)
    p.add_argument("--m-max", type=int)
    p.add_argument("--scan", type=_parse_scan)
    p.add_argument("--hamiltonian", help="builtin name or Hamiltonian JSON file")
    p.add_argument("--tau", type=float, nargs="+")
    p.add_argument("--variant", choices=("odd-dirichlet", "neumann"))
    p.add_argument("--seeds", type=float, nargs="+", help="shooting seeds (n = 1)")
    p.add_argument("--workers", type=int)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.load(args.config) if args.config else None
    if base is not None and base.task != args.task:
        raise ConfigError(f"config task {base.task!r} does not match command {args.task!r}")
    d = base.to_dict() if base is not None else {"task": args.task}
    over = {
        "seed": args.seed,
        "out": args.out,
        "system": args.system,
        "normal_form": [args.normal_form[0]] + [float(v) for v in args.normal_form[1:]] if args.normal_form else None,
        "flavor": args.flavor,
        "method": args.method,
        "omega": args.omega,
        "k": args.k,
        "kind": args.kind,
        "theta": args.theta,
        "m_max": args.m_max,
        "scan": args.scan,
        "hamiltonian": args.hamiltonian,
        "tau": args.tau,
        "variant": args.variant,
        "seeds": [[s] for s in args.seeds] if args.seeds else None,
        "workers": args.workers,
    }
    if args.n is not None or args.count is not None or args.scale is not None:
        corpus = dict(d.get("corpus") or {})
        for key, v in (("n", args.n), ("count", args.count), ("scale", args.scale)):
            if v is not None:
                corpus[key] = v
        over["corpus"] = corpus
    d.update({k: v for k, v in over.items() if v is not None})
    return RunConfig.from_dict(d, args.config or "command line")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        status, files = run_config(cfg)
    except (ConfigError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TheoryViolation as exc:
        print(f"theory violation: {exc}", file=sys.stderr)
        return EXIT_THEORY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{cfg.task}: {'PASS' if status == EXIT_OK else 'FAIL'} ({cfg.out})")
    return status


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front door: one binary, one subcommand per module suite.

    llab verify-identities --n 1,2,3,4 --cases 1000 --seed 7 --out reports/
    llab torus --n 2,3 --N 1 --samples 100 --out reports/
    llab hyperbolic --R 2,4 --h 0.2,0.1 --out reports/
    llab decompose input.json output.json

Exit code 0 iff every requested verdict passes (decompose: iff it
completes).  LLAB_THREADS caps suite parallelism.  Reports are
deterministic byte-for-byte apart from the provenance timestamp.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from llab.reports import ReportBundle, SuiteConfig, dump_json_deterministic


def _int_list(s: str) -> list[int]:
    return [int(x) for x in str(s).split(",") if x.strip() != ""]


def _float_list(s: str) -> list[float]:
    return [float(x) for x in str(s).split(",") if x.strip() != ""]


def run_suite(cfg: SuiteConfig) -> ReportBundle:
    """Dispatch a SuiteConfig to its module suite and bundle the result."""
    from llab import suites

    p = cfg.params
    if cfg.suite == "verify-identities":
        payload = suites.identity_suite(
            n_values=p.get("n_values", (1, 2, 3, 4)),
            cases=p.get("cases", 1000),
            cross_cases=p.get("cross_cases", 500),
            seed=cfg.seed,
            tol=cfg.tolerance,
            threads=p.get("threads"),
        )
    elif cfg.suite == "torus":
        payload = suites.torus_suite(
            n_values=p.get("n_values", (2, 3)),
            N=p.get("N", 1),
            samples=p.get("samples", 100),
            seed=cfg.seed,
            tol=cfg.tolerance,
            threads=p.get("threads"),
        )
    elif cfg.suite == "hyperbolic":
        payload = suites.hyperbolic_suite(
            R_values=p.get("R_values", (2.0, 4.0)),
            h_values=p.get("h_values", (0.2, 0.1)),
            k=p.get("k", 0),
            eps=p.get("eps", 0.6),
            seed=cfg.seed,
            cache_dir=p.get("cache_dir"),
            rel_tol=p.get("rel_tol", 1e-8),
        )
    else:
        raise ValueError(f"unknown suite id {cfg.suite!r}")

    bundle = ReportBundle(suite=cfg.suite, config=cfg, payload=payload, passed=bool(payload["passed"]))
    if cfg.out_dir is not None:
        bundle.write(cfg.out_dir)
    return bundle


def decompose_file(in_path, out_path) -> dict:
    """Read a form + triple reference, write both decompositions.

    Input: {"triple": {...} | {"standard": n}, "form": {n, k, coeffs}}.
    Output carries the Lefschetz components (with primitivity residuals)
    and the bidegree components, each with reconstruction residuals.
    """
    from llab.algebra import (
        form_from_json,
        form_to_json,
        norm,
        pq_decompose,
        triple_from_json,
    )
    from llab.lefschetz import dual_lefschetz, is_primitive, primitive_decompose

    try:
        obj = json.loads(Path(in_path).read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed JSON in {in_path}: {e}") from e
    if not isinstance(obj, dict) or "form" not in obj or "triple" not in obj:
        raise ValueError('input must be {"triple": ..., "form": ...}')

    t = triple_from_json(obj["triple"])
    fobj = obj["form"]
    n, k = int(fobj["n"]), int(fobj["k"])
    if not (0 <= k <= 2 * n):
        raise ValueError(f"degree k={k} outside [0, {2 * n}]")
    if n != t.n:
        raise ValueError(f"form dimension n={n} does not match triple n={t.n}")
    a = form_from_json(fobj)

    lef = primitive_decompose(a, t)
    scale = max(norm(a, t), 1e-300)
    lef_out = {}
    for r, beta in lef.components.items():
        if not np.any(np.abs(beta.data) > 1e-14 * scale):
            continue  # structurally absent level
        lam = dual_lefschetz(beta, t)
        lef_out[str(r)] = {
            "form": form_to_json(beta),
            "primitivity_residual": float(np.max(np.abs(lam.data), initial=0.0)) / scale,
            "is_primitive": bool(is_primitive(beta, t, tol=1e-9)),
        }

    big = pq_decompose(a, t)
    big_out = {
        f"{p},{q}": form_to_json(c) for (p, q), c in sorted(big.components.items()) if np.any(c.data)
    }
    recon_big = None
    for c in big.components.values():
        recon_big = c if recon_big is None else recon_big + c

    out = {
        "input": {"form": form_to_json(a), "n": n, "k": k},
        "lefschetz_components": lef_out,
        "bidegree_components": big_out,
        "reconstruction_residuals": {
            "lefschetz": lef.residual(a, t),
            "bidegree": float(np.max(np.abs((recon_big - a).data), initial=0.0)) / scale,
        },
    }
    Path(out_path).write_bytes(dump_json_deterministic(out))
    return out


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="llab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, default_tol=1e-10):
        sp.add_argument("--seed", type=int, default=7)
        sp.add_argument("--tol", type=float, default=default_tol)
        sp.add_argument("--out", type=str, default=None, help="report output directory")
        sp.add_argument("--format", type=str, default="json", help="comma list: json,csv")

    sp = sub.add_parser("verify-identities", help="pointwise algebra/Lefschetz identity suite")
    sp.add_argument("--n", type=_int_list, default=[1, 2, 3, 4])
    sp.add_argument("--cases", type=int, default=1000)
    sp.add_argument("--cross-cases", type=int, default=500)
    sp.add_argument("--threads", type=int, default=None)
    common(sp)

    sp = sub.add_parser("torus", help="Fourier-model harmonic/identity suite")
    sp.add_argument("--n", type=_int_list, default=[2, 3])
    sp.add_argument("--N", type=int, default=1, help="frequency cutoff per coordinate")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--threads", type=int, default=None)
    common(sp)

    sp = sub.add_parser("hyperbolic", help="FEM spectral-gap suite on the disc")
    sp.add_argument("--R", type=_float_list, default=[2.0, 4.0])
    sp.add_argument("--h", type=_float_list, default=[0.2, 0.1])
    sp.add_argument("--k", type=int, default=0, choices=(0, 1))
    sp.add_argument("--eps", type=float, default=0.6)
    sp.add_argument("--rel-tol", type=float, default=1e-8)
    sp.add_argument("--cache-dir", type=str, default=None)
    common(sp, default_tol=1e-8)

    sp = sub.add_parser("decompose", help="Lefschetz + bidegree decomposition of a form file")
    sp.add_argument("input", type=str)
    sp.add_argument("output", type=str)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "decompose":
        try:
            out = decompose_file(args.input, args.output)
        except (ValueError, OSError, KeyError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        rs = out["reconstruction_residuals"]
        print(
            f"decomposed: {len(out['lefschetz_components'])} Lefschetz component(s), "
            f"{len(out['bidegree_components'])} bidegree component(s); "
            f"reconstruction residuals {rs['lefschetz']:.3e} / {rs['bidegree']:.3e}"
        )
        return 0

    formats = tuple(x.strip() for x in args.format.split(",") if x.strip())
    params: dict = {}
    if args.command == "verify-identities":
        params = {
            "n_values": args.n,
            "cases": args.cases,
            "cross_cases": args.cross_cases,
            "threads": args.threads,
        }
    elif args.command == "torus":
        params = {"n_values": args.n, "N": args.N, "samples": args.samples, "threads": args.threads}
    elif args.command == "hyperbolic":
        params = {
            "R_values": args.R,
            "h_values": args.h,
            "k": args.k,
            "eps": args.eps,
            "rel_tol": args.rel_tol,
            "cache_dir": args.cache_dir,
        }

    cfg = SuiteConfig(
        suite=args.command,
        seed=args.seed,
        tolerance=args.tol,
        params=params,
        out_dir=args.out,
        formats=formats,
    )
    try:
        bundle = run_suite(cfg)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    status = "PASS" if bundle.passed else "FAIL"
    warn = bundle.payload.get("warning")
    extra = f" (warning: {warn})" if warn else ""
    mr = bundle.payload.get("max_residual")
    mr_s = f", max residual {mr:.3e}" if isinstance(mr, float) else ""
    print(f"[{status}] suite {cfg.suite}{mr_s}{extra}; config {cfg.config_hash()}")
    if cfg.out_dir:
        print(f"reports written to {cfg.out_dir}/")
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    sys.exit(main())

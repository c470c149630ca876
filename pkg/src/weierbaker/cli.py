"""Command line entry points.

Exit codes follow the certificate verdicts: 0 for pass (and for pure
data commands that complete), 1 for a certified failure, 2 for usage
errors including parameters outside a certificate's validity range, 3
for inconclusive.  Every randomized command is deterministic in its
seed, and ``report --format json`` is byte-identical across runs with
the same arguments.

Two environment variables are honored: WEIERBAKER_THREADS caps the
BLAS/OpenMP thread pools (applied on package import, before numpy
loads), and WEIERBAKER_OUT_DIR is prefixed to any relative --out path.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .errors import DomainError, OutOfValidityError

KAPPA0_TOL = 5e-4

_VERDICT_EXIT = {"pass": 0, "fail": 1, "inconclusive": 3}

_EVAL_TARGETS = ("W", "S", "g", "g1", "g2") + tuple(
    f"{f}{i}" for f in "kl" for i in (1, 2, 3, 4)
)


def _add_parameter_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kappa", type=float, help="series parameter in [0.5, 1)")
    p.add_argument(
        "--gamma", type=float, help="curve parameter in (0.5, 1]; kappa = 1/(2*gamma)"
    )


def _roughness(args: argparse.Namespace):
    from .dyadic import Roughness

    if (args.kappa is None) == (args.gamma is None):
        raise DomainError("exactly one of --kappa or --gamma is required")
    if args.kappa is not None:
        return Roughness.from_kappa(args.kappa)
    return Roughness.from_gamma(args.gamma)


def _resolve_out(raw: str | None) -> Path | None:
    if raw is None:
        return None
    p = Path(raw)
    base = os.environ.get("WEIERBAKER_OUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _write_csv(rows, out: Path | None) -> None:
    if out is None:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _write_bytes(data: bytes, out: Path | None) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)


def _write_json(obj, out: Path | None) -> None:
    _write_bytes(json.dumps(obj, sort_keys=True, indent=2).encode() + b"\n", out)


def cmd_eval(args: argparse.Namespace) -> int:
    import numpy as np

    from .dyadic import BitSequence, PhasePoint
    from .series import eval_S, eval_W, eval_g_grid

    r = _roughness(args)
    if args.grid < 2:
        raise DomainError("--grid must be at least 2")
    xs = np.linspace(0.0, 1.0, args.grid)
    kw = {} if args.terms is None else {"terms": args.terms}
    target = args.target
    if target == "W":
        vals = [eval_W(float(x), r, **kw) for x in xs]
        lo = np.array([v.lo for v in vals])
        hi = np.array([v.hi for v in vals])
    elif target == "S":
        past = BitSequence((0,) * args.depth)
        vals = [eval_S(PhasePoint(past, float(x)), r, **kw) for x in xs]
        lo = np.array([v.lo for v in vals])
        hi = np.array([v.hi for v in vals])
    elif target in ("g", "g1", "g2"):
        order = {"g": 0, "g1": 1, "g2": 2}[target]
        lo, hi = eval_g_grid(xs, order, r, **kw)
    else:
        from .certify import eval_k_grid, eval_l_grid

        grid_fn = eval_k_grid if target[0] == "k" else eval_l_grid
        lo, hi = grid_fn(int(target[1]), xs, r, **kw)

    def rows():
        yield ("x", "lo", "hi")
        for i in range(xs.size):
            yield (repr(float(xs[i])), repr(float(lo[i])), repr(float(hi[i])))

    _write_csv(rows(), _resolve_out(args.out))
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    from . import certify

    out = _resolve_out(args.out)
    if args.scope == "kappa0":
        if args.kappa is not None or args.gamma is not None:
            raise DomainError("scope kappa0 estimates the threshold; it takes no parameter")
        bracket = certify.estimate_kappa0(KAPPA0_TOL)
        _write_json(
            {
                "lemma_id": "kappa0_bracket",
                "lo": bracket.lo,
                "hi": bracket.hi,
                "width": bracket.width,
                "tol": KAPPA0_TOL,
            },
            out,
        )
        return 0
    r = _roughness(args)
    kw = {} if args.terms is None else {"terms": args.terms}
    if args.scope == "g-roots":
        rep = certify.certify_g_roots(r, **kw)
    elif args.scope == "k":
        rep = certify.certify_k_signs(r, **kw)
    elif args.scope == "l":
        rep = certify.certify_l_signs(r, **kw)
    elif args.scope == "cases":
        if args.case is not None:
            rep = certify.certify_case(certify.case_by_id(args.case), r, **kw)
        else:
            checks = []
            config = {}
            for c in certify.TABLE_CASES:
                sub = certify.certify_case(c, r, **kw)
                config = dict(sub.config)
                checks.append(
                    certify.CheckResult((0.0, 1.0), sub.verdict, min(k.margin for k in sub.checks))
                )
            rep = certify.CertificateReport(
                lemma_id="case_table_shape",
                kappa=r.kappa,
                config=config,
                checks=tuple(checks),
                verdict=certify._combine([k.verdict for k in checks]),
            )
    else:
        rep = certify.certify_kappa(r, **kw)
    _write_bytes(rep.to_json().encode() + b"\n", out)
    return _VERDICT_EXIT[rep.verdict]


def cmd_measure(args: argparse.Namespace) -> int:
    from .measures import sample_rho

    r = _roughness(args)
    m = sample_rho(
        r,
        args.samples,
        restricted=args.scope == "rho-hat",
        seed=args.seed,
        bins=args.bins,
        depth=args.depth,
    )
    _write_csv(m.csv_rows(), _resolve_out(args.out))
    return 0


def cmd_density(args: argparse.Namespace) -> int:
    import numpy as np

    from .measures import density_rho, density_rho_hat, support_halfwidth

    r = _roughness(args)
    half = support_halfwidth(r)
    y_grid = np.linspace(-half, half, args.bins + 1)
    if args.scope == "rho":
        est = density_rho(
            r, y_grid=y_grid, n_pairs=args.samples, n_max=args.nmax,
            seed=args.seed, depth=args.depth,
        )
    else:
        est = density_rho_hat(
            r, y_grid=y_grid, n_pairs=args.samples, seed=args.seed, depth=args.depth
        )
    _write_csv(est.csv_rows(), _resolve_out(args.out))
    return 0


def cmd_sbr(args: argparse.Namespace) -> int:
    from .measures import char_fn_l2_diag, marginal_l2_refinement, sbr_marginal

    r = _roughness(args)
    out = _resolve_out(args.out)
    if args.scope == "marginal":
        n = 20000 if args.samples is None else args.samples
        m = sbr_marginal(0.55, r, n, args.seed, bins=args.bins, depth=args.depth)
        _write_csv(m.csv_rows(), out)
    elif args.scope == "saturation":
        n = 2048 if args.samples is None else args.samples
        diag = char_fn_l2_diag(r, args.umax, n, args.seed, depth=args.depth)
        _write_csv(diag.csv_rows(), out)
    else:
        n = 200000 if args.samples is None else args.samples
        ref = marginal_l2_refinement(r, 0.55, n, args.seed, depth=args.depth)
        _write_json(ref.to_dict(), out)
    return 0


def cmd_figures(args: argparse.Namespace) -> int:
    from .figures import render_all

    out = _resolve_out(args.out) or _resolve_out("figures")
    for path in render_all(out):
        print(path)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from .report import build_payload, payload_bytes, run_profile

    out = _resolve_out(args.out)
    if args.format == "json":
        data = payload_bytes(args.scope)
        _write_bytes(data + b"\n", out)
        overall = json.loads(data)["overall"]
    else:
        results = run_profile(args.scope)
        overall = "pass"
        for res in results:
            if res.verdict == "fail":
                overall = "fail"
            elif res.verdict == "inconclusive" and overall == "pass":
                overall = "inconclusive"
        text = "\n".join([res.line() for res in results] + [f"overall: {overall}", ""])
        _write_bytes(text.encode(), out)
    return _VERDICT_EXIT[overall]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weierbaker",
        description="Certified evaluation, shape certificates and invariant-measure "
        "statistics for the rough-attractor toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "eval",
        help="tabulate a certified enclosure on a uniform grid over [0, 1]",
        description="Write CSV columns x, lo, hi for one target. The stable "
        "slope S is evaluated along the all-zero past at varying fibre "
        "coordinate; k2 is tabulated as displayed (it is negative).",
    )
    p.add_argument("target", choices=_EVAL_TARGETS, metavar="target",
                   help=f"one of {', '.join(_EVAL_TARGETS)}")
    _add_parameter_flags(p)
    p.add_argument("--terms", type=int, help="series terms per enclosure")
    p.add_argument("--depth", type=int, default=64, help="bit depth of the S past")
    p.add_argument("--grid", type=int, default=1001, help="number of grid points")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser(
        "certify",
        help="run a certificate scope and write its JSON report",
        description="Exit 0 when certified, 1 on a certified failure, 3 when "
        "inconclusive, 2 when the parameter lies outside the scope's "
        "validity range.  Scope kappa0 bisects the certification threshold "
        f"to width {KAPPA0_TOL} and takes no parameter flag.",
    )
    p.add_argument(
        "--scope",
        choices=("g-roots", "k", "l", "cases", "kappa", "kappa0"),
        default="kappa",
    )
    _add_parameter_flags(p)
    p.add_argument("--case", type=int, choices=range(1, 11), metavar="N",
                   help="restrict scope cases to one table row (1..10)")
    p.add_argument("--terms", type=int, help="series terms per enclosure")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser(
        "measure",
        help="histogram draws of the slope difference (CSV)",
        description="Columns bin_lo, bin_hi, mass, stderr.  Scope rho-hat "
        "restricts to macroscopic pairs and reports the acceptance mass; "
        "scope rho is the unrestricted pushforward with total mass one.",
    )
    p.add_argument("--scope", choices=("rho", "rho-hat"), default="rho-hat")
    _add_parameter_flags(p)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=512)
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser(
        "density",
        help="root-sum density estimate of a pushforward (CSV)",
        description="Columns y, phi, stderr, cap_rate on a symmetric grid "
        "over the certified support.  Scope rho telescopes the restricted "
        "density over --nmax scales.",
    )
    p.add_argument("--scope", choices=("rho-hat", "rho"), default="rho-hat")
    _add_parameter_flags(p)
    p.add_argument("--samples", type=int, default=20000, help="macroscopic pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=512, help="y-grid cells")
    p.add_argument("--nmax", type=int, default=40, help="telescoping scales (scope rho)")
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser(
        "sbr",
        help="fibre-marginal absolute-continuity diagnostics",
        description="Scope marginal histograms S at the fixed section "
        "x = 0.55 (CSV bin_lo, bin_hi, mass, stderr); scope saturation "
        "tabulates the Plancherel partial integral (CSV K, l2_partial, "
        "increment); scope refinement reports debiased L2 estimates across "
        "bin refinements (JSON).  Default --samples: 20000, 2048, 200000.",
    )
    p.add_argument("--scope", choices=("marginal", "saturation", "refinement"),
                   default="marginal")
    _add_parameter_flags(p)
    p.add_argument("--samples", type=int, help="draws (default depends on scope)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=512, help="histogram bins (scope marginal)")
    p.add_argument("--umax", type=float, default=1e5, help="frequency cutoff (scope saturation)")
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(fn=cmd_sbr)

    p = sub.add_parser(
        "figures",
        help="render the ten SVG figures into a directory",
        description="Deterministic SVG output; rerunning with the same "
        "inputs reproduces identical bytes.",
    )
    p.add_argument("--out", help="output directory (default ./figures)")
    p.set_defaults(fn=cmd_figures)

    p = sub.add_parser(
        "report",
        help="run the acceptance criteria and report pass/fail",
        description="Exit mirrors the worst verdict.  The full profile "
        "includes the documented expected failure of the k2 positivity "
        "claim, so it exits 1 by design; JSON output omits runtimes and is "
        "byte-identical across runs.",
    )
    p.add_argument("--scope", choices=("full", "smoke"), default="full")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DomainError, OutOfValidityError) as exc:
        print(f"weierbaker: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # Reader closed stdout (e.g. piping into head); quit quietly.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())

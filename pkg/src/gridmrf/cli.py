"""Command-line front end.

Subcommands map onto the library operations: sample, fit-pl, fit-sa,
fit-ghm, select, cohist, mrfi, render, demo (plus a hidden `oracle`
command for brute-force exploration at toy scale).  Every run that writes
an output also writes a plain-text manifest next to the primary output;
re-running the recorded argv reproduces the outputs bit-exactly (all
randomness flows from the --seed flag through documented stream splitting).

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import io
import shlex
import sys
import time

import numpy as np

from . import __version__
from .estimators import (FitError, MrfFit, default_gamma_sequence, fit_pl,
                         fit_sa, position_scores, select_interactions)
from .fields import (DiscreteField, RealField, read_discrete_field, read_pgm,
                     read_real_csv, read_region, write_discrete_field,
                     write_real_csv)
from .hmrf import HmrfFit, fit_ghm, fourier_basis, polynomial_basis
from .interactions import (InteractionStructure, build_structure,
                           parse_norm_spec, parse_structure_spec,
                           read_positions, write_positions)
from .kernel import cohist
from .oracle import (exact_conditional, exact_expected_stats, exact_mle,
                     partition_function)
from .potentials import expand_array, read_model_spec, summarize_array, write_model_spec
from .render import render_to_png
from .sampler import SamplerConfig, sample_mrf


class UsageError(Exception):
    """Bad flags or inconsistent flag combinations (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# summaries


def _counts_block(counts: np.ndarray) -> str:
    head = "".join(f"{k:>7}" for k in range(counts.size))
    vals = "".join(f"{int(c):>7}" for c in counts)
    return head + "\n" + vals


def _stars(contribution: float) -> str:
    if contribution > 2.0 / 3.0:
        return "***"
    if contribution > 1.0 / 3.0:
        return "**"
    return "*"


def summary_report(fit) -> str:
    """Human-readable fit summary.

    For MRF fits, "Rel. Contribution" of a position is its per-position
    max absolute potential divided by the largest such value over all
    positions (so the strongest position reads 1.000); stars mark the
    thirds of that scale.
    """
    if isinstance(fit, MrfFit):
        method = ("Pseudolikelihood" if fit.method == "PL"
                  else "Stochastic Approximation")
        n_colors = int(fit.color_counts.size)
        out = [f"Model adjusted via {method} ",
               f"Image dimension: {fit.dims[0]} {fit.dims[1]} ",
               f"{n_colors} colors, distributed as:",
               _counts_block(fit.color_counts), ""]
        if len(fit.structure) == 0:
            out.append("No interacting positions.")
            return "\n".join(out) + "\n"
        scores = position_scores(fit)
        top = scores.max()
        if fit.family in ("onepar", "oneeach"):
            out.append("Interactions for different-valued pairs: ")
            values = (np.full(len(fit.structure), fit.theta_vec[0])
                      if fit.family == "onepar" else fit.theta_vec)
        else:
            out.append("Interaction strengths (per-position max |value|): ")
            values = scores
        out.append("Position|  Value  Rel. Contribution")
        for k, (r1, r2) in enumerate(fit.structure):
            contrib = scores[k] / top if top > 0 else 0.0
            out.append(f"{'(%d,%d)' % (r1, r2):>8}| {values[k]:6.3f}  "
                       f"{contrib:.3f} {_stars(contrib)}")
        return "\n".join(out) + "\n"
    if isinstance(fit, HmrfFit):
        dims = (fit.z_pred.height, fit.z_pred.width)
        out = ["Gaussian mixture model driven by Hidden MRF fitted by "
               "EM-algorithm.",
               f"Image dimensions: {dims[0]} {dims[1]} ",
               "Predicted mixture component table:",
               _counts_block(fit.component_counts),
               f"Number of covariates (or basis functions): "
               f"{fit.n_covariates} ",
               f"Interaction structure considered: "
               f"{' '.join('(%d,%d)' % p for p in fit.structure)} ",
               "",
               "Mixture parameters:",
               " Component     mu  sigma "]
        for k in range(fit.params.mu.size):
            out.append(f"{k:>10} {fit.params.mu[k]:6.2f} "
                       f"{fit.params.sigma[k]:6.2f} ")
        out += ["", f"Model fitted in {fit.iterations} iterations."]
        return "\n".join(out) + "\n"
    raise TypeError("summary_report expects an MrfFit or HmrfFit")


# ---------------------------------------------------------------------------
# manifests


def write_manifest(path: str, subcommand: str, argv: list[str], seed,
                   inputs: list[str], outputs: list[str],
                   duration: float) -> None:
    with open(path, "w") as fh:
        fh.write("# gridmrf run manifest\n")
        fh.write(f"tool gridmrf {__version__}\n")
        fh.write(f"subcommand {subcommand}\n")
        fh.write(f"argv {shlex.join(argv)}\n")
        fh.write(f"seed {'none' if seed is None else seed}\n")
        for p in inputs:
            fh.write(f"input {p}\n")
        for p in outputs:
            fh.write(f"output {p}\n")
        fh.write(f"duration_s {duration:.3f}\n")


def read_manifest_argv(path: str) -> list[str]:
    """Recover the full argv recorded in a manifest."""
    argv = None
    with open(path) as fh:
        for line in fh:
            if line.startswith("argv "):
                argv = shlex.split(line[len("argv "):].strip())
    if argv is None:
        raise ValueError(f"{path}: no argv line")
    return argv


def replay_manifest(path: str) -> int:
    return run(read_manifest_argv(path))


# ---------------------------------------------------------------------------
# shared flag handling


def _add_structure_flags(p: argparse.ArgumentParser, required: bool = False):
    p.add_argument("--mrfi", help="norm ball spec, e.g. norm:L1:1")
    p.add_argument("--pos", action="append", default=[],
                   metavar="R1,R2", help="extra interacting position")
    p.add_argument("--positions-file", help="file with one 'r1 r2' per line")


def _parse_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected 'a,b', got {text!r}")
    return int(parts[0]), int(parts[1])


def _structure_from_args(args) -> InteractionStructure:
    if getattr(args, "positions_file", None):
        with open(args.positions_file) as fh:
            return read_positions(fh)
    extras = [_parse_pair(p) for p in args.pos]
    if args.mrfi:
        max_norm, norm_type = parse_norm_spec(args.mrfi)
        return build_structure(max_norm, norm_type, extras)
    if extras:
        return InteractionStructure(tuple(extras))
    raise UsageError("specify an interaction structure "
                     "(--mrfi, --pos or --positions-file)")


def _read_discrete(path: str) -> DiscreteField:
    if path.lower().endswith(".pgm"):
        with open(path, "rb") as fh:
            return read_pgm(fh.read())
    with open(path) as fh:
        return read_discrete_field(fh)


def _read_real(path: str) -> RealField:
    with open(path) as fh:
        return read_real_csv(fh)


def _load_theta(args, structure=None):
    if getattr(args, "theta", None):
        with open(args.theta) as fh:
            pot = read_model_spec(fh)
        if structure is not None and \
                not pot.structure.equivalent(structure):
            raise UsageError("--theta positions conflict with --mrfi/--pos")
        return pot
    if getattr(args, "potts", None) is not None:
        if structure is None:
            raise UsageError("--potts needs an interaction structure")
        c = getattr(args, "colors", None)
        if c is None:
            raise UsageError("--potts needs --colors")
        return expand_array(np.array([args.potts]), "onepar", structure, c)
    raise UsageError("specify potentials (--theta or --potts with --colors)")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args, argv):
    t0 = time.monotonic()
    inputs = []
    structure = None
    if args.mrfi or args.pos or args.positions_file:
        structure = _structure_from_args(args)
    pot = _load_theta(args, structure)
    # the model-spec file owns the slice <-> position order
    structure = pot.structure
    if args.theta:
        inputs.append(args.theta)

    fixed = sub = None
    if args.fixed:
        with open(args.fixed) as fh:
            fixed = read_region(fh)
        inputs.append(args.fixed)
    if args.sub:
        with open(args.sub) as fh:
            sub = read_region(fh)
        inputs.append(args.sub)
    config = SamplerConfig(cycles=args.cycles, seed=args.seed,
                           fixed_region=fixed, sub_region=sub)
    if args.init:
        init = _read_discrete(args.init)
        inputs.append(args.init)
    elif args.dims:
        init = _parse_pair(args.dims)
    else:
        raise UsageError("specify --dims or --init")
    field = sample_mrf(init, structure, pot, config)

    outputs = [args.out]
    with open(args.out, "w") as fh:
        write_discrete_field(field, fh, header_c=True)
    png = args.png or args.out + ".png"
    render_to_png(field, png)
    outputs.append(png)
    write_manifest(args.out + ".manifest", "sample", argv, args.seed,
                   inputs, outputs, time.monotonic() - t0)
    return 0


def _cmd_fit_pl(args, argv):
    t0 = time.monotonic()
    z = _read_discrete(args.z)
    structure = _structure_from_args(args)
    init = None
    if args.init:
        with open(args.init) as fh:
            init = read_model_spec(fh)
    fit = fit_pl(z, structure, args.family, init=init, gtol=args.gtol,
                 maxiter=args.maxiter)
    with open(args.out_model, "w") as fh:
        write_model_spec(fit.theta, fh)
    sys.stdout.write(summary_report(fit))
    write_manifest(args.out_model + ".manifest", "fit-pl", argv, None,
                   [args.z], [args.out_model], time.monotonic() - t0)
    return 0


def _write_metrics(path: str, metrics) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,distance\n")
        for it, dist in metrics:
            fh.write(f"{it},{dist!r}\n")


def _cmd_fit_sa(args, argv):
    t0 = time.monotonic()
    z = _read_discrete(args.z)
    structure = _structure_from_args(args)
    gamma = default_gamma_sequence(args.gamma_max, args.steps)
    fit = fit_sa(z, structure, args.family, gamma, cycles=args.cycles,
                 refresh_each=args.refresh_each,
                 refresh_cycles=args.refresh_cycles, seed=args.seed)
    outputs = [args.out_model]
    with open(args.out_model, "w") as fh:
        write_model_spec(fit.theta, fh)
    if args.metrics:
        _write_metrics(args.metrics, fit.metrics)
        outputs.append(args.metrics)
    sys.stdout.write(summary_report(fit))
    write_manifest(args.out_model + ".manifest", "fit-sa", argv, args.seed,
                   [args.z], outputs, time.monotonic() - t0)
    return 0


def _parse_basis(spec: str, dims):
    if spec == "none":
        return None
    kind, _, rest = spec.partition(":")
    pair = _parse_pair(rest)
    if kind == "poly":
        return polynomial_basis(pair, dims)
    if kind == "fourier":
        return fourier_basis(pair, dims)
    raise UsageError(f"bad basis spec {spec!r}; use poly:d1,d2 | "
                     "fourier:k1,k2 | none")


def _cmd_fit_ghm(args, argv):
    t0 = time.monotonic()
    y = _read_real(args.y)
    with open(args.theta) as fh:
        pot = read_model_spec(fh)
    basis = _parse_basis(args.basis, (y.height, y.width))
    fit = fit_ghm(y, pot.structure, pot, basis=basis,
                  equal_vars=args.equal_vars, maxiter=args.maxiter,
                  max_dist=args.max_dist, icm_cycles=args.icm_cycles,
                  seed=args.seed)
    outputs = [args.out_params]
    with open(args.out_params, "w") as fh:
        fh.write("component,mu,sigma\n")
        for k in range(fit.params.mu.size):
            fh.write(f"{k},{float(fit.params.mu[k])!r},"
                     f"{float(fit.params.sigma[k])!r}\n")
    if args.out_z:
        with open(args.out_z, "w") as fh:
            write_discrete_field(fit.z_pred, fh, header_c=True)
        outputs.append(args.out_z)
    if args.out_fixed:
        with open(args.out_fixed, "w") as fh:
            write_real_csv(fit.fixed, fh)
        outputs.append(args.out_fixed)
    if args.out_predicted:
        with open(args.out_predicted, "w") as fh:
            write_real_csv(fit.predicted, fh)
        outputs.append(args.out_predicted)
    sys.stdout.write(summary_report(fit))
    write_manifest(args.out_params + ".manifest", "fit-ghm", argv, args.seed,
                   [args.y, args.theta], outputs, time.monotonic() - t0)
    return 0


def _cmd_select(args, argv):
    t0 = time.monotonic()
    z = _read_discrete(args.z)
    candidates = parse_structure_spec(args.candidates)
    gamma = default_gamma_sequence(args.gamma_max, args.steps)
    selected = select_interactions(
        z, candidates, args.family, args.threshold, gamma_seq=gamma,
        cycles=args.cycles, refresh_each=args.refresh_each,
        refresh_cycles=args.refresh_cycles, seed=args.seed)
    with open(args.out, "w") as fh:
        write_positions(selected, fh)
    sys.stdout.write(f"{len(selected)} interacting positions.\n")
    for r1, r2 in selected:
        sys.stdout.write(f"  {r1:>4} {r2:>6}\n")
    write_manifest(args.out + ".manifest", "select", argv, args.seed,
                   [args.z], [args.out], time.monotonic() - t0)
    return 0


def _cmd_cohist(args, argv):
    t0 = time.monotonic()
    z = _read_discrete(args.z)
    structure = _structure_from_args(args)
    hist = cohist(z, structure)
    with open(args.out, "w") as fh:
        fh.write("a,b,r1,r2,count\n")
        for k, (r1, r2) in enumerate(structure):
            for a in range(z.C + 1):
                for b in range(z.C + 1):
                    fh.write(f"{a},{b},{r1},{r2},{hist.counts[a, b, k]}\n")
    write_manifest(args.out + ".manifest", "cohist", argv, None,
                   [args.z], [args.out], time.monotonic() - t0)
    return 0


def _cmd_mrfi(args, argv):
    structure = _structure_from_args(args)
    if args.count:
        sys.stdout.write(f"{len(structure)}\n")
    else:
        buf = io.StringIO()
        write_positions(structure, buf)
        sys.stdout.write(buf.getvalue())
    if args.out:
        with open(args.out, "w") as fh:
            write_positions(structure, fh)
    return 0


def _cmd_render(args, argv):
    t0 = time.monotonic()
    kind = args.kind
    if kind == "auto":
        kind = "real" if args.infile.lower().endswith(".csv") else "discrete"
    field = _read_real(args.infile) if kind == "real" \
        else _read_discrete(args.infile)
    render_to_png(field, args.out, palette=args.palette)
    write_manifest(args.out + ".manifest", "render", argv, None,
                   [args.infile], [args.out], time.monotonic() - t0)
    return 0


def _cmd_oracle(args, argv):
    structure = _structure_from_args(args)
    if args.op == "partition":
        pot = _load_theta(args, structure)
        dims = _parse_pair(args.dims)
        val = partition_function(dims, structure, pot)
        sys.stdout.write(f"log_partition {val!r}\n")
    elif args.op == "expected":
        pot = _load_theta(args, structure)
        dims = _parse_pair(args.dims)
        vals = exact_expected_stats(dims, structure, pot, args.family)
        sys.stdout.write("expected_stats " +
                         " ".join(repr(v) for v in vals) + "\n")
    elif args.op == "conditional":
        pot = _load_theta(args, structure)
        z = _read_discrete(args.z)
        pix = _parse_pair(args.pixel)
        vals = exact_conditional((z.height, z.width), structure, pot, pix, z)
        sys.stdout.write("conditional " +
                         " ".join(repr(v) for v in vals) + "\n")
    elif args.op == "mle":
        z = _read_discrete(args.z)
        vals = exact_mle(z, structure, args.family)
        sys.stdout.write("mle " + " ".join(repr(v) for v in vals) + "\n")
    else:
        raise UsageError(f"unknown oracle op {args.op!r}")
    return 0


def _cmd_demo(args, argv):
    t0 = time.monotonic()
    import os
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    size = args.size
    structure = InteractionStructure(((1, 0), (0, 1), (4, 4)))
    truth = expand_array(np.array([-1.0, -1.0, 0.2]), "oneeach", structure, 1)

    sys.stdout.write(f"[1/5] sampling a {size}x{size} texture field\n")
    data = sample_mrf((size, size), structure, truth,
                      SamplerConfig(cycles=60, seed=args.seed))
    data_path = os.path.join(outdir, "texture_data.txt")
    with open(data_path, "w") as fh:
        write_discrete_field(data, fh, header_c=True)
    render_to_png(data, os.path.join(outdir, "texture_data.png"))

    sys.stdout.write("[2/5] selecting interactions from the Linf-6 "
                     "candidate set\n")
    candidates = build_structure(6, "Linf", ())
    selected = select_interactions(
        data, candidates, "oneeach", 0.1,
        gamma_seq=default_gamma_sequence(1.0, args.steps),
        cycles=2, refresh_each=args.steps + 1, seed=args.seed + 1)
    with open(os.path.join(outdir, "selected_positions.txt"), "w") as fh:
        write_positions(selected, fh)
    sys.stdout.write(f"    selected: {selected}\n")

    sys.stdout.write("[3/5] fitting by maximum pseudo-likelihood\n")
    fit = fit_pl(data, selected, "oneeach")
    with open(os.path.join(outdir, "fitted_model.txt"), "w") as fh:
        write_model_spec(fit.theta, fh)
    sys.stdout.write(summary_report(fit))

    sys.stdout.write("[4/5] resampling from the fitted model\n")
    synth = sample_mrf((size, size), selected, fit.theta,
                       SamplerConfig(cycles=60, seed=args.seed + 2))
    synth_path = os.path.join(outdir, "texture_synthesized.txt")
    with open(synth_path, "w") as fh:
        write_discrete_field(synth, fh, header_c=True)
    render_to_png(synth, os.path.join(outdir, "texture_synthesized.png"))

    sys.stdout.write("[5/5] rendering side-by-side comparison\n")
    from PIL import Image
    left = Image.open(os.path.join(outdir, "texture_data.png"))
    right = Image.open(os.path.join(outdir, "texture_synthesized.png"))
    combo = Image.new("RGBA", (left.width + right.width + 4, left.height),
                      (255, 255, 255, 255))
    combo.paste(left, (0, 0))
    combo.paste(right, (left.width + 4, 0))
    combo_path = os.path.join(outdir, "side_by_side.png")
    combo.save(combo_path)
    write_manifest(os.path.join(outdir, "demo.manifest"), "demo", argv,
                   args.seed, [], [data_path, synth_path, combo_path],
                   time.monotonic() - t0)
    sys.stdout.write(f"demo outputs in {outdir}\n")
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _build_parser() -> _Parser:
    parser = _Parser(prog="gridmrf",
                     description="Markov random fields on 2-D lattices: "
                                 "simulation, estimation, segmentation.")
    parser.add_argument("--version", action="version",
                        version=f"gridmrf {__version__}")
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on worker threads (runs sequentially)")
    parser.add_argument("--reproducible", action="store_true",
                        help="force deterministic reductions (always on in "
                             "this implementation)")
    visible = ("sample, fit-pl, fit-sa, fit-ghm, select, cohist, mrfi, "
               "render, demo")
    sub = parser.add_subparsers(dest="subcommand", metavar=f"{{{visible}}}")

    p = sub.add_parser("sample", help="sample a field via Gibbs cycles")
    p.add_argument("--dims", metavar="N,M")
    p.add_argument("--init", help="initial field file")
    _add_structure_flags(p)
    p.add_argument("--theta", help="model-spec file")
    p.add_argument("--potts", type=float, help="onepar potential value")
    p.add_argument("--colors", type=int, help="C for --potts")
    p.add_argument("--cycles", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixed", help="fixed-region 0/1 grid file")
    p.add_argument("--sub", help="sub-region 0/1 grid file")
    p.add_argument("--out", required=True)
    p.add_argument("--png", help="render path (default: <out>.png)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("fit-pl", help="maximum pseudo-likelihood fit")
    p.add_argument("--z", required=True)
    _add_structure_flags(p)
    p.add_argument("--family", default="onepar")
    p.add_argument("--init", help="initial model-spec file")
    p.add_argument("--gtol", type=float, default=1e-5)
    p.add_argument("--maxiter", type=int, default=500)
    p.add_argument("--out-model", required=True)
    p.set_defaults(func=_cmd_fit_pl)

    p = sub.add_parser("fit-sa", help="stochastic approximation fit")
    p.add_argument("--z", required=True)
    _add_structure_flags(p)
    p.add_argument("--family", default="onepar")
    p.add_argument("--gamma-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--cycles", type=int, default=2)
    p.add_argument("--refresh-each", type=int, default=None)
    p.add_argument("--refresh-cycles", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-model", required=True)
    p.add_argument("--metrics", help="CSV of per-iteration distances")
    p.set_defaults(func=_cmd_fit_sa)

    p = sub.add_parser("fit-ghm", help="hidden-MRF Gaussian mixture fit")
    p.add_argument("--y", required=True, help="CSV real field")
    p.add_argument("--theta", required=True, help="model-spec file")
    p.add_argument("--basis", default="none",
                   help="poly:d1,d2 | fourier:k1,k2 | none")
    p.add_argument("--equal-vars", action="store_true")
    p.add_argument("--maxiter", type=int, default=100)
    p.add_argument("--max-dist", type=float, default=1e-3)
    p.add_argument("--icm-cycles", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-params", required=True)
    p.add_argument("--out-z")
    p.add_argument("--out-fixed")
    p.add_argument("--out-predicted")
    p.set_defaults(func=_cmd_fit_ghm)

    p = sub.add_parser("select", help="threshold-based interaction selection")
    p.add_argument("--z", required=True)
    p.add_argument("--candidates", required=True,
                   help="candidate norm ball, e.g. norm:Linf:6")
    p.add_argument("--family", default="oneeach")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--gamma-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--cycles", type=int, default=2)
    p.add_argument("--refresh-each", type=int, default=None)
    p.add_argument("--refresh-cycles", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("cohist", help="co-occurrence histogram as CSV")
    p.add_argument("--z", required=True)
    _add_structure_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cohist)

    p = sub.add_parser("mrfi", help="build and inspect interaction structures")
    p.add_argument("spec", nargs="?", help="norm:L1:1 style spec")
    p.add_argument("--pos", action="append", default=[], metavar="R1,R2")
    p.add_argument("--positions-file")
    p.add_argument("--count", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_mrfi,
                   mrfi=None)

    p = sub.add_parser("render", help="render a field file to PNG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=("auto", "discrete", "real"),
                   default="auto")
    p.add_argument("--palette", default="auto")
    p.set_defaults(func=_cmd_render)

    # hidden: brute-force oracle for manual exploration at toy scale
    p = sub.add_parser("oracle")
    p.add_argument("--op", required=True,
                   choices=("partition", "expected", "conditional", "mle"))
    p.add_argument("--dims", metavar="N,M")
    _add_structure_flags(p)
    p.add_argument("--theta")
    p.add_argument("--potts", type=float)
    p.add_argument("--colors", type=int)
    p.add_argument("--family", default="onepar")
    p.add_argument("--z")
    p.add_argument("--pixel", metavar="I,J")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("demo", help="end-to-end synthetic workflows")
    p.add_argument("workflow", choices=("texture",))
    p.add_argument("--size", type=int, default=150)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--outdir", default="gridmrf-demo")
    p.set_defaults(func=_cmd_demo)

    return parser


def run(argv) -> int:
    """Execute a CLI invocation; returns the exit code (0/1/2)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "subcommand", None):
            parser.print_help()
            return 1
        # the mrfi subcommand takes its spec positionally
        if args.subcommand == "mrfi":
            args.mrfi = args.spec
        return args.func(args, list(argv))
    except UsageError as exc:
        sys.stderr.write(f"gridmrf: usage error: {exc}\n")
        return 1
    except (FitError, ValueError, OSError, RuntimeError, KeyError,
            IndexError) as exc:
        sys.stderr.write(f"gridmrf: error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))

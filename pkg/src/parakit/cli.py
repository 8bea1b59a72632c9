"""Command-line entry point wiring the whole toolkit.

Subcommands
-----------
gen        sample a named field family onto a grid and write a field file
decompose  split a field into dyadic bands; band files + energy table
norm       evaluate one function-space norm; JSON report
bmo        parabolic BMO search; JSON report with the argmax cube
extend     reflect a bounded-box field to the tripled box; seam report
verify     run one inequality check over a field family; CSV/JSON rows
pde-run    integrate the periodic gradient-flow model; trajectory + fits
sweep      implied-constant statistics for several checks over a family

Exit codes: 0 success, 1 domain error (unreadable input, violated
precondition, solver breach), 2 usage error (unknown flag, missing or
malformed value).

Every artifact embeds the run manifest — the command, its full parameter
set, the seed, profile/package versions, and the output names — as the
"manifest" key of JSON reports and field-file headers and as a leading
`# manifest:` comment line in CSV files. Manifests contain no clocks or
host state, so rerunning a command with an equal manifest reproduces every
artifact byte for byte. All writes go through a temp file and an atomic
rename: a failed run leaves no partial artifacts.

The worker count for the cube-scan kernels is read from the
PARAKIT_THREADS environment variable (default 1).
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__, cubes, harness, littlewood_paley as lp, norms, pde
from .extension import (
    extend_field,
    l1_expansion_report,
    localized_embedding,
    radius_ladder,
    seam_derivative_check,
)
from .grid import make_grid, physical_energy, read_field, write_field
from .profiles import PROFILE_VERSION

__all__ = ["main"]


# ---------------------------------------------------------------------------
# shared plumbing


def _floats(text):
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _ints(text):
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _exponent(text):
    """Lebesgue exponent: a float or 'inf'."""
    if text.strip().lower() in ("inf", "infinity"):
        return np.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'inf', got {text!r}")


def _domain(text):
    """Per-axis intervals 'lo:hi,lo:hi,...', time last."""
    pairs = []
    for tok in text.split(","):
        parts = tok.split(":")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(
                f"expected 'lo:hi' intervals separated by commas, got {text!r}"
            )
        pairs.append((float(parts[0]), float(parts[1])))
    return tuple(pairs)


def _add_grid_args(parser):
    parser.add_argument(
        "--shape",
        type=_ints,
        required=True,
        help="cells per axis, spatial axes then time, all even >= 4 (e.g. 128,128)",
    )
    parser.add_argument(
        "--box",
        type=_floats,
        default=None,
        help="spatial box length per axis (default 2*pi each)",
    )
    parser.add_argument(
        "--time-len", type=float, default=None, help="time box length (default 2*pi)"
    )
    parser.add_argument(
        "--origin",
        type=_floats,
        default=None,
        help="lower corner per axis, time last (default centered box)",
    )
    parser.add_argument(
        "--bounded",
        action="store_true",
        help="treat the box as a bounded domain instead of a torus",
    )


def _grid_from_args(args):
    shape = args.shape
    n = len(shape) - 1
    if n not in (1, 2):
        raise ValueError(f"--shape must have 2 or 3 axes, got {len(shape)}")
    box = args.box if args.box is not None else (2.0 * np.pi,) * n
    if len(box) == 1 and n == 2:
        box = box * 2
    time_len = args.time_len if args.time_len is not None else 2.0 * np.pi
    grid = make_grid(
        n=n,
        shape=shape,
        box_len=box,
        time_len=time_len,
        origin=args.origin,
        periodic=not args.bounded,
    )
    if args.origin is None:
        grid = grid.centered()
    return grid


def _manifest(args, outputs):
    skip = {"func", "command"}
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, float) and np.isinf(value):
            value = "inf"
        if isinstance(value, tuple):
            value = list(value)
        params[key] = value
    return {
        "command": args.command,
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "profile_version": PROFILE_VERSION,
        "package_version": __version__,
        "outputs": [str(p) for p in outputs],
    }


def _write_text_atomic(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _write_json(path, payload, manifest):
    body = dict(payload)
    body["manifest"] = manifest
    _write_text_atomic(path, json.dumps(body, sort_keys=True, indent=2) + "\n")


def _write_csv(path, header, rows, manifest):
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write_text_atomic(path, buf.getvalue())


def _policy_from_args(args):
    return cubes.CubeSearchPolicy(
        stride_fraction=args.stride_fraction, min_cells=args.min_cells
    )


def _add_policy_args(parser):
    parser.add_argument(
        "--stride-fraction",
        type=float,
        default=0.5,
        help="cube-center stride as a fraction of the half-extent",
    )
    parser.add_argument(
        "--min-cells",
        type=int,
        default=3,
        help="smallest cube extent in grid cells",
    )


# ---------------------------------------------------------------------------
# gen


def _cmd_gen(args):
    grid = _grid_from_args(args)
    params = {}
    if args.family == "const":
        params["value"] = args.value
    elif args.family == "logspike":
        if args.amplitude is None:
            raise ValueError("--amplitude is required for the logspike family")
        params["amplitude"] = args.amplitude
        if args.center is not None:
            params["center"] = args.center
    elif args.family == "random":
        if args.seed is None:
            raise ValueError("--seed is required for the random family")
        params.update(seed=args.seed, decay=args.decay, localized=not args.no_localize)
    elif args.family == "packet":
        if args.seed is None:
            raise ValueError("--seed is required for the packet family")
        params.update(seed=args.seed, cycles=args.cycles, localized=not args.no_localize)
    fld = harness.generate_field(args.family, grid, **params)
    write_field(fld, args.output, manifest=_manifest(args, [args.output]))
    return 0


# ---------------------------------------------------------------------------
# decompose


def _cmd_decompose(args):
    fld = read_field(args.field)
    profile = lp.BumpProfile(smoothing_order=args.smoothing_order)
    partition = lp.build_partition(fld.grid, profile=profile, levels=args.levels)
    stack = lp.decompose(fld, partition)
    os.makedirs(args.output, exist_ok=True)
    band_files = [
        os.path.join(args.output, f"band_{j:02d}.field")
        for j in range(partition.band_count)
    ]
    manifest = _manifest(args, band_files + [os.path.join(args.output, "bands.json")])
    table = []
    for j, (band, path) in enumerate(zip(stack.bands, band_files)):
        table.append(
            {
                "j": j,
                "file": os.path.basename(path),
                "energy": physical_energy(band),
                "sup": float(np.max(np.abs(band.values))),
            }
        )
    for band, path in zip(stack.bands, band_files):
        write_field(band, path, manifest=manifest)
    _write_json(
        os.path.join(args.output, "bands.json"),
        {
            "levels": partition.levels,
            "smoothing_order": args.smoothing_order,
            "bands": table,
        },
        manifest,
    )
    return 0


# ---------------------------------------------------------------------------
# norm


def _cmd_norm(args):
    fld = read_field(args.field)
    space = args.space
    params = {}
    if space == "lp":
        params = {"p": args.p}
        value = norms.lp_norm(fld, args.p, domain=args.domain)
    elif space == "sobolev":
        params = {"m": args.m}
        value = norms.parabolic_sobolev_norm(fld, args.m, domain=args.domain)
    elif space in ("besov", "lt", "lt-trunc"):
        params = {"s": args.s, "p": args.p, "q": args.q}
        if space == "besov":
            value = lp.besov_norm(fld, args.s, args.p, args.q)
        else:
            value = lp.lizorkin_triebel_norm(
                fld, args.s, args.p, args.q, truncated=space == "lt-trunc"
            )
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown space {space!r}")
    report = {
        "space": space,
        "params": {
            k: ("inf" if isinstance(v, float) and np.isinf(v) else v)
            for k, v in params.items()
        },
        "value": value,
        "domain": [list(pair) for pair in args.domain] if args.domain else None,
    }
    _write_json(args.output, report, _manifest(args, [args.output]))
    return 0


# ---------------------------------------------------------------------------
# bmo


def _cmd_bmo(args):
    fld = read_field(args.field)
    form = {"osc": "oscillation", "oscillation": "oscillation", "inf": "inf"}[args.form]
    result = cubes.bmo_search(
        fld,
        domain=args.domain,
        policy=_policy_from_args(args),
        form=form,
        radii=args.radii,
    )
    report = {
        "value": result.value,
        "argmax_cube": {
            "center": list(result.argmax_cube.center),
            "radius": result.argmax_cube.radius,
        },
        "form": result.form,
        "policy": {
            "stride_fraction": result.policy.stride_fraction,
            "min_cells": result.policy.min_cells,
        },
        "domain": [list(pair) for pair in result.domain],
        "cubes_scanned": result.cubes_scanned,
        "backend": result.backend,
    }
    _write_json(args.output, report, _manifest(args, [args.output]))
    return 0


# ---------------------------------------------------------------------------
# extend


def _cmd_extend(args):
    fld = read_field(args.field)
    ext = extend_field(
        fld, args.m, spatial_order=args.spatial_order, time_order=args.time_order
    )
    outputs = [args.output]
    seam_path = args.seam_out or f"{args.output}.seam.json"
    if args.emit_seam_report:
        outputs.append(seam_path)
    manifest = _manifest(args, outputs)
    write_field(ext, args.output, manifest=manifest)
    if args.emit_seam_report:
        g = fld.grid
        domain_box = tuple((o, o + L) for o, L in zip(g.origin, g.lengths))
        report = {
            "seams": seam_derivative_check(fld, ext, args.m),
            "l1": l1_expansion_report(
                fld,
                ext,
                args.m,
                spatial_order=args.spatial_order,
                time_order=args.time_order,
            ),
            "radius_ladder": radius_ladder(domain_box),
        }
        _write_json(seam_path, report, manifest)
    return 0


# ---------------------------------------------------------------------------
# verify / sweep


def _family_from_args(args):
    """Build the swept field family from the per-family list flags."""
    if args.family == "const":
        sweeps = {"value": args.value}
    elif args.family == "logspike":
        sweeps = {"amplitude": args.M}
    elif args.family == "random":
        sweeps = {"seed": args.seed, "decay": args.decay}
    elif args.family == "packet":
        sweeps = {"seed": args.seed, "cycles": args.cycles}
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown family {args.family!r}")
    return harness.sweep_family(args.family, **sweeps)


def _add_family_args(parser):
    parser.add_argument(
        "--family",
        required=True,
        choices=("const", "logspike", "random", "packet"),
        help="field family to sweep",
    )
    parser.add_argument(
        "--value", type=_floats, default=(1.0,), help="const: values to sweep"
    )
    parser.add_argument(
        "--M", type=_floats, default=(2.0, 4.0, 8.0), help="logspike: amplitudes"
    )
    parser.add_argument(
        "--seed", type=_ints, default=(0, 1, 2), help="random/packet: seeds"
    )
    parser.add_argument(
        "--decay", type=_floats, default=(1.0,), help="random: band decay rates"
    )
    parser.add_argument(
        "--cycles", type=_floats, default=(4.0,), help="packet: oscillation counts"
    )


def _scalar_items(mapping):
    return {
        k: v
        for k, v in mapping.items()
        if isinstance(v, (int, float)) and not isinstance(v, bool)
    }


def _cmd_verify(args):
    grid = _grid_from_args(args)
    family = _family_from_args(args)
    policy = _policy_from_args(args)
    reports = [
        harness.run_check(
            args.check,
            fld,
            m=args.m,
            policy=policy,
            box_factor=args.box_factor,
            field_desc=desc,
        )
        for desc, fld in family.realize(grid)
    ]
    manifest = _manifest(args, [args.output])
    if args.emit == "json":
        _write_json(
            args.output,
            {"check": args.check, "reports": [r.as_dict() for r in reports]},
            manifest,
        )
        return 0
    param_keys = sorted(k for k in reports[0].field_desc if k != "family")
    ing_keys = sorted(_scalar_items(reports[0].ingredients))
    header = (
        ["check", "family"]
        + param_keys
        + ["lhs", "implied_constant", "degenerate"]
        + ing_keys
    )
    rows = []
    for rep in reports:
        row = [rep.check, rep.field_desc["family"]]
        row += [rep.field_desc[k] for k in param_keys]
        row += [rep.lhs, rep.implied_constant, int(rep.degenerate)]
        row += [rep.ingredients[k] for k in ing_keys]
        rows.append(row)
    _write_csv(args.output, header, rows, manifest)
    return 0


def _cmd_sweep(args):
    grid = _grid_from_args(args)
    family = _family_from_args(args)
    policy = _policy_from_args(args)
    rows = harness.constant_sweep(
        family,
        args.check,
        grid,
        m=args.m,
        policy=policy,
        box_factor=args.box_factor,
    )
    manifest = _manifest(args, [args.output])
    header = ["check", "family", "count", "degenerate", "min", "median", "max"]
    table = [[row[k] for k in header] for row in rows]
    if args.emit == "json":
        payload = {
            "rows": [{k: row[k] for k in header} for row in rows],
        }
        _write_json(args.output, payload, manifest)
    else:
        _write_csv(args.output, header, table, manifest)
    return 0


# ---------------------------------------------------------------------------
# pde-run


def _cmd_pde_run(args):
    config = pde.PdeConfig(
        n_modes=args.N,
        dt=args.dt,
        shift=args.a,
        t_end=args.T,
        gradient_floor=args.gradient_floor,
        record_every=args.record_every,
        forcing=not args.no_forcing,
    )
    v0 = pde.initial_gradient(args.v0, args.N)
    diag = pde.run(config, v0)
    fit = pde.check_apriori(diag)

    trajectory = diag.vx_field(max_cells=args.max_cells)
    h_t = config.record_every * config.dt
    n_snap = len(diag.times)
    norm_every = args.norm_every or max(4, n_snap // 8)
    norm_at = {}
    for i in range(n_snap):
        k = i + 1
        if k % norm_every == 0 and k >= 4:
            window = diag.vx_field(t_upper=k * h_t, max_cells=args.max_cells)
            emb = localized_embedding(window, m=1)
            norm_at[i] = (
                cubes.bmo_norm(window),
                norms.parabolic_sobolev_norm(emb.field, 1, domain=emb.inner_box),
            )

    os.makedirs(args.output, exist_ok=True)
    paths = {
        name: os.path.join(args.output, name)
        for name in ("trajectory.field", "diagnostics.csv", "fit.json")
    }
    manifest = _manifest(args, sorted(paths.values()))
    rows = []
    for i in range(n_snap):
        bmo_v, sob_v = norm_at.get(i, ("", ""))
        rows.append([diag.times[i], diag.m_values[i], diag.g_values[i], bmo_v, sob_v])
    write_field(trajectory, paths["trajectory.field"], manifest=manifest)
    _write_csv(paths["diagnostics.csv"], ["t", "m", "G", "bmo", "sobolev"], rows, manifest)
    _write_json(paths["fit.json"], dict(fit), manifest)
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser():
    parser = argparse.ArgumentParser(
        prog="parakit",
        description=__doc__.split("\n\n")[0],
        epilog="PARAKIT_THREADS sets the cube-scan worker count (default 1).",
    )
    parser.add_argument("--version", action="version", version=f"parakit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a field family onto a grid")
    _add_grid_args(p)
    p.add_argument(
        "--family",
        required=True,
        choices=("const", "logspike", "random", "packet"),
    )
    p.add_argument("--value", type=float, default=1.0, help="const: the value")
    p.add_argument("--amplitude", type=float, default=None, help="logspike: clip height")
    p.add_argument("--center", type=_floats, default=None, help="logspike: spike center")
    p.add_argument("--seed", type=int, default=None, help="random/packet: RNG seed")
    p.add_argument("--decay", type=float, default=1.0, help="random: band decay rate")
    p.add_argument("--cycles", type=float, default=4.0, help="packet: oscillations")
    p.add_argument(
        "--no-localize",
        action="store_true",
        help="random/packet: skip the interior plateau envelope",
    )
    p.add_argument("-o", "--output", required=True, help="field file to write")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("decompose", help="dyadic band decomposition of a field")
    p.add_argument("field", help="input field file")
    p.add_argument("--levels", type=int, default=None, help="band count override")
    p.add_argument("--smoothing-order", type=int, default=4)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("norm", help="evaluate one function-space norm")
    p.add_argument("field", help="input field file")
    p.add_argument(
        "--space",
        required=True,
        choices=("lp", "sobolev", "besov", "lt", "lt-trunc"),
    )
    p.add_argument("--s", type=float, default=0.0, help="besov/lt: smoothness")
    p.add_argument("--p", type=_exponent, default=2.0, help="outer exponent or 'inf'")
    p.add_argument("--q", type=_exponent, default=2.0, help="band exponent or 'inf'")
    p.add_argument("--m", type=int, default=1, help="sobolev: parabolic order")
    p.add_argument("--domain", type=_domain, default=None, help="'lo:hi,...' time last")
    p.add_argument("-o", "--output", required=True, help="JSON report path")
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("bmo", help="parabolic BMO search")
    p.add_argument("field", help="input field file")
    p.add_argument("--domain", type=_domain, default=None, help="'lo:hi,...' time last")
    p.add_argument("--form", default="osc", choices=("osc", "oscillation", "inf"))
    p.add_argument("--radii", type=_floats, default=None, help="explicit cube radii")
    _add_policy_args(p)
    p.add_argument("-o", "--output", required=True, help="JSON report path")
    p.set_defaults(func=_cmd_bmo)

    p = sub.add_parser("extend", help="reflect a bounded field to the tripled box")
    p.add_argument("field", help="input field file (bounded box)")
    p.add_argument("--m", type=int, required=True, help="parabolic Sobolev order")
    p.add_argument("--spatial-order", type=int, default=None, help="override (default 2m)")
    p.add_argument("--time-order", type=int, default=None, help="override (default m)")
    p.add_argument(
        "--emit-seam-report",
        action="store_true",
        help="also write seam-derivative mismatches, strip mass, radius ladder",
    )
    p.add_argument("--seam-out", default=None, help="seam report path")
    p.add_argument("-o", "--output", required=True, help="extended field file")
    p.set_defaults(func=_cmd_extend)

    p = sub.add_parser("verify", help="run one inequality check over a family")
    p.add_argument("--check", required=True, choices=harness.CHECKS)
    _add_family_args(p)
    _add_grid_args(p)
    p.add_argument("--m", type=int, default=1, help="parabolic Sobolev order")
    p.add_argument("--box-factor", type=float, default=4.0)
    _add_policy_args(p)
    p.add_argument("--emit", default="csv", choices=("csv", "json"))
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="implied-constant statistics over a family")
    p.add_argument(
        "--check",
        type=lambda s: tuple(s.split(",")),
        required=True,
        help="comma-separated checks",
    )
    _add_family_args(p)
    _add_grid_args(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--box-factor", type=float, default=4.0)
    _add_policy_args(p)
    p.add_argument("--emit", default="csv", choices=("csv", "json"))
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("pde-run", help="integrate the gradient-flow model")
    p.add_argument("--N", type=int, required=True, help="spatial modes (even)")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--a", type=float, required=True, help="nonlocal shift in (0,1)")
    p.add_argument("--T", type=float, required=True, help="time horizon")
    p.add_argument("--v0", required=True, help="initial gradient: const | sine:<amp>")
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--gradient-floor", type=float, default=0.05)
    p.add_argument("--no-forcing", action="store_true", help="pure-diffusion test mode")
    p.add_argument("--max-cells", type=int, default=128)
    p.add_argument(
        "--norm-every",
        type=int,
        default=0,
        help="snapshots between BMO/Sobolev evaluations (0 = about 8 per run)",
    )
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_pde_run)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, KeyError) as err:
        print(f"parakit {args.command}: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: mesh generation, spectra, kernel slices, propagation,
oracle dumps, and the verification suite.

Exit codes: 0 success, 1 runtime or data failure, 2 usage or config error.
Every output is deterministic given the flags (and seed), and every CSV
starts with '#'-prefixed metadata lines. The ROBIN_SEED environment variable
overrides the default seed of the verification suite.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .assembly import robin_form
from .errors import MeshFormatError
from .kernel import Field, SpectralKernel
from .mesh import Mesh, interval_mesh, read_mesh, rectangle_mesh, write_mesh
from .oracle import interval_spectrum, rectangle_spectrum
from .spectral import Spectrum, read_spectrum, solve_spectrum, write_spectrum
from .verify import VerifyConfig, run_all

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _default_seed() -> int:
    return int(os.environ.get("ROBIN_SEED", "42"))


def _fail(message: str, code: int) -> int:
    print(f"robinheat: error: {message}", file=sys.stderr)
    return code


def _csv_header(args_line: str, seed: int | None = None, extra: dict | None = None):
    lines = [f"# command: robinheat {args_line}", f"# version: {__version__}"]
    if seed is not None:
        lines.append(f"# seed: {seed}")
    for key, val in (extra or {}).items():
        lines.append(f"# {key}: {val}")
    return lines


def _write_lines(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# field file format
# ---------------------------------------------------------------------------

def write_field(field: Field, path) -> None:
    lines = ["robinfield 1", f"t {field.time:.17g}", f"n {len(field.values)}"]
    lines.extend(f"{v:.17g}" for v in field.values)
    _write_lines(path, lines)


def read_field(path) -> Field:
    with open(path) as fh:
        raw = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(fh)]
    body = [(no, ln) for no, ln in raw if ln]
    if not body or body[0][1] != "robinfield 1":
        raise MeshFormatError("expected header 'robinfield 1'",
                              line=body[0][0] if body else 1)
    tok = body[1][1].split()
    if len(tok) != 2 or tok[0] != "t":
        raise MeshFormatError("expected 't <time>'", line=body[1][0])
    t = float(tok[1])
    tok = body[2][1].split()
    if len(tok) != 2 or tok[0] != "n":
        raise MeshFormatError("expected 'n <count>'", line=body[2][0])
    n = int(tok[1])
    if len(body) != 3 + n:
        raise MeshFormatError(f"expected {n} values, found {len(body) - 3}",
                              line=body[-1][0])
    values = np.empty(n)
    for i, (no, ln) in enumerate(body[3:]):
        try:
            values[i] = float(ln)
        except ValueError:
            raise MeshFormatError(f"non-numeric field value {ln!r}", line=no) from None
    return Field(values, t)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_mesh(args) -> int:
    if args.shape == "interval":
        if args.length <= 0 or args.cells < 2:
            return _fail("need --length > 0 and --cells >= 2", USAGE_ERROR)
        mesh = interval_mesh(args.length, args.cells)
    else:
        if args.lx <= 0 or args.ly <= 0 or args.nx < 1 or args.ny < 1:
            return _fail("need positive --lx/--ly and --nx/--ny >= 1", USAGE_ERROR)
        mesh = rectangle_mesh(args.lx, args.ly, args.nx, args.ny)
    write_mesh(mesh, args.out)
    return 0


def _load_mesh(path) -> Mesh:
    try:
        return read_mesh(path)
    except OSError as exc:
        raise RuntimeError(f"cannot read mesh {path}: {exc}") from exc


def cmd_eigs(args) -> int:
    if args.k < 1:
        return _fail("--k must be >= 1", USAGE_ERROR)
    mesh = _load_mesh(args.mesh)
    if args.k > mesh.num_vertices:
        return _fail(f"--k {args.k} exceeds vertex count {mesh.num_vertices}",
                     USAGE_ERROR)
    form = robin_form(mesh, args.alpha)
    spectrum = solve_spectrum(form, args.k)
    if args.out_spec:
        write_spectrum(spectrum, args.out_spec)
    if args.out_csv:
        lines = _csv_header(args.args_line)
        lines.append("index,lambda,residual")
        for i, p in enumerate(spectrum.pairs, start=1):
            lines.append(f"{i},{p.value:.17g},{p.residual:.3g}")
        _write_lines(args.out_csv, lines)
    return 0


def _load_kernel(args) -> tuple[Mesh, Spectrum, SpectralKernel]:
    mesh = _load_mesh(args.mesh)
    form = robin_form(mesh, 0.0)  # alpha replaced after reading the spectrum
    spectrum = read_spectrum(args.spec)
    if spectrum.mesh_hash != mesh.hash():
        raise RuntimeError(
            f"spectrum file {args.spec} was computed on a different mesh "
            f"(hash {spectrum.mesh_hash[:12]}.. != {mesh.hash()[:12]}..)")
    spectrum.mass = form.mass
    return mesh, spectrum, SpectralKernel(mesh, spectrum)


def cmd_kernel(args) -> int:
    if args.t <= 0:
        return _fail("--t must be positive", USAGE_ERROR)
    mesh, spectrum, kernel = _load_kernel(args)
    if len(args.fix_y) != mesh.dim:
        return _fail(f"--fix-y needs {mesh.dim} coordinate(s) for this mesh",
                     USAGE_ERROR)
    y0 = np.array(args.fix_y)
    tail = kernel.tail_bound(args.t)
    n_modes = len(spectrum.pairs)
    extra = {"N": n_modes, "tail_bound": f"{tail:.6g}", "t": f"{args.t:.17g}",
             "alpha": f"{spectrum.alpha:.17g}"}
    warned = args.t < kernel.t_min
    if warned:
        extra["warning"] = (f"t below t_min={kernel.t_min:.6g}; values are the "
                            "resolved-space projection only")
        print(f"robinheat: warning: t={args.t:g} is below t_min="
              f"{kernel.t_min:.6g}", file=sys.stderr)
    print(f"robinheat: kernel slice with N={n_modes} modes, tail bound "
          f"{tail:.6g}", file=sys.stderr)
    lines = _csv_header(args.args_line, extra=extra)
    lines.append("x,y,value" if mesh.dim == 2 else "x,value")
    wy = kernel.mode_values_at(y0)
    decay = np.exp(-kernel.values * args.t)
    slice_vals = kernel.vectors @ (decay * wy)
    for vert, val in zip(mesh.vertices, slice_vals):
        coords = ",".join(f"{c:.17g}" for c in vert)
        lines.append(f"{coords},{val:.17g}")
    _write_lines(args.out, lines)
    return 0


def cmd_evolve(args) -> int:
    try:
        times = [float(t) for t in args.times.split(",") if t.strip()]
    except ValueError:
        return _fail(f"cannot parse --times {args.times!r}", USAGE_ERROR)
    if not times or any(t < 0 for t in times):
        return _fail("--times needs nonnegative comma-separated values", USAGE_ERROR)
    if (args.u0 is None) == (args.u0_const is None):
        return _fail("need exactly one of --u0 or --u0-const", USAGE_ERROR)
    mesh, spectrum, kernel = _load_kernel(args)
    if args.u0 is not None:
        u0 = read_field(args.u0)
        if len(u0.values) != mesh.num_vertices:
            return _fail(f"field has {len(u0.values)} values, mesh has "
                         f"{mesh.num_vertices} vertices", RUNTIME_ERROR)
        u0 = u0.values
    else:
        u0 = np.full(mesh.num_vertices, args.u0_const)
    tails = {t: kernel.tail_bound(t) if t > 0 else 0.0 for t in times}
    extra = {"N": len(spectrum.pairs), "alpha": f"{spectrum.alpha:.17g}",
             "times": ",".join(f"{t:.17g}" for t in times),
             "tail_bound": ",".join(f"{tails[t]:.6g}" for t in times)}
    below = [t for t in times if t < kernel.t_min]
    if below:
        extra["warning"] = f"times below t_min={kernel.t_min:.6g}: {below}"
        print(f"robinheat: warning: times {below} below t_min="
              f"{kernel.t_min:.6g}", file=sys.stderr)
    print(f"robinheat: evolving with N={len(spectrum.pairs)} modes, tail bounds "
          + ", ".join(f"{tails[t]:.3g}" for t in times), file=sys.stderr)
    fields = [kernel.propagate(u0, t).values for t in times]
    lines = _csv_header(args.args_line, extra=extra)
    coord_names = "x,y" if mesh.dim == 2 else "x"
    lines.append(coord_names + "," + ",".join(f"u(t={t:g})" for t in times))
    for i, vert in enumerate(mesh.vertices):
        coords = ",".join(f"{c:.17g}" for c in vert)
        lines.append(coords + "," + ",".join(f"{f[i]:.17g}" for f in fields))
    _write_lines(args.out, lines)
    return 0


def cmd_verify(args) -> int:
    base = VerifyConfig()
    base.seed = _default_seed()  # ROBIN_SEED overrides the default; a config
    try:                         # file's seed key still wins
        if args.config:
            with open(args.config) as fh:
                cfg = VerifyConfig.from_text(fh.read(), base=base)
        else:
            cfg = base
    except (OSError, ValueError) as exc:
        return _fail(str(exc), USAGE_ERROR)
    report = run_all(cfg)
    print(report.table())
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.to_json())
    return 0 if report.all_passed() else RUNTIME_ERROR


def cmd_oracle(args) -> int:
    if args.k < 1:
        return _fail("--k must be >= 1", USAGE_ERROR)
    if args.domain == "interval":
        if args.length <= 0:
            return _fail("--length must be positive", USAGE_ERROR)
        modes = interval_spectrum(args.length, args.alpha, args.k)
        rows = [(i + 1, m.value, m.kind) for i, m in enumerate(modes)]
    else:
        if args.lx <= 0 or args.ly <= 0:
            return _fail("--lx/--ly must be positive", USAGE_ERROR)
        mx = interval_spectrum(args.lx, args.alpha, args.k)
        my = interval_spectrum(args.ly, args.alpha, args.k)
        pairs = rectangle_spectrum(args.lx, args.ly, args.alpha, args.k)
        rows = [(i + 1, lam, f"{mx[ix].kind}*{my[iy].kind}")
                for i, (lam, (ix, iy)) in enumerate(pairs)]
    lines = _csv_header(args.args_line)
    lines.append("index,lambda,kind")
    for idx, lam, kind in rows:
        lines.append(f"{idx},{lam:.17g},{kind}")
    _write_lines(args.out, lines)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robinheat",
        description="Robin heat kernels on interval and rectangle meshes")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mesh = sub.add_parser("mesh", help="generate a mesh file")
    mesh_sub = p_mesh.add_subparsers(dest="shape", required=True)
    p_int = mesh_sub.add_parser("interval")
    p_int.add_argument("--length", type=float, required=True)
    p_int.add_argument("--cells", type=int, required=True)
    p_int.add_argument("--out", required=True)
    p_rect = mesh_sub.add_parser("rect")
    p_rect.add_argument("--lx", type=float, required=True)
    p_rect.add_argument("--ly", type=float, required=True)
    p_rect.add_argument("--nx", type=int, required=True)
    p_rect.add_argument("--ny", type=int, required=True)
    p_rect.add_argument("--out", required=True)
    p_mesh.set_defaults(func=cmd_mesh)

    p_eigs = sub.add_parser("eigs", help="solve the lowest eigenpairs")
    p_eigs.add_argument("--mesh", required=True)
    p_eigs.add_argument("--alpha", type=float, required=True)
    p_eigs.add_argument("--k", type=int, required=True)
    p_eigs.add_argument("--out-spec")
    p_eigs.add_argument("--out-csv")
    p_eigs.set_defaults(func=cmd_eigs)

    p_ker = sub.add_parser("kernel", help="emit a kernel slice H(., y0, t)")
    p_ker.add_argument("--spec", required=True)
    p_ker.add_argument("--mesh", required=True)
    p_ker.add_argument("--t", type=float, required=True)
    p_ker.add_argument("--fix-y", type=float, nargs="+", required=True,
                       metavar="COORD")
    p_ker.add_argument("--out", required=True)
    p_ker.set_defaults(func=cmd_kernel)

    p_ev = sub.add_parser("evolve", help="propagate initial data")
    p_ev.add_argument("--spec", required=True)
    p_ev.add_argument("--mesh", required=True)
    p_ev.add_argument("--u0")
    p_ev.add_argument("--u0-const", type=float)
    p_ev.add_argument("--times", required=True)
    p_ev.add_argument("--out", required=True)
    p_ev.set_defaults(func=cmd_evolve)

    p_ver = sub.add_parser("verify", help="run the verification suite")
    group = p_ver.add_mutually_exclusive_group(required=True)
    group.add_argument("--config")
    group.add_argument("--default", action="store_true")
    p_ver.add_argument("--report")
    p_ver.set_defaults(func=cmd_verify)

    p_or = sub.add_parser("oracle", help="dump exact spectra as CSV")
    or_sub = p_or.add_subparsers(dest="domain", required=True)
    o_int = or_sub.add_parser("interval")
    o_int.add_argument("--length", type=float, required=True)
    o_int.add_argument("--alpha", type=float, required=True)
    o_int.add_argument("--k", type=int, required=True)
    o_int.add_argument("--out", required=True)
    o_rect = or_sub.add_parser("rect")
    o_rect.add_argument("--lx", type=float, required=True)
    o_rect.add_argument("--ly", type=float, required=True)
    o_rect.add_argument("--alpha", type=float, required=True)
    o_rect.add_argument("--k", type=int, required=True)
    o_rect.add_argument("--out", required=True)
    p_or.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.args_line = " ".join(argv)
    try:
        return args.func(args)
    except (MeshFormatError, RuntimeError, ValueError, OSError) as exc:
        return _fail(str(exc), RUNTIME_ERROR)


if __name__ == "__main__":
    sys.exit(main())

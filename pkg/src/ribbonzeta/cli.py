"""Command-line entry point: ``ribbonzeta <subcommand> ...``.

Every subcommand writes CSV whose header comments carry the tool version,
the resolved configuration and the seed.  Library errors exit with status 1
and a line ``error: <Code>: <message>`` on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import empirical, grid_delta, histogram, wasserstein1
from .errors import GraphFormatError, InvalidArgument, RibbonZetaError, VerificationFailed
from .geodesics import enumerate_geodesics, is_simple
from .graphio import read_graph
from .kontsevich import MODES, cell_polytope, cell_constant, labeled_cells, sample_space
from .ribbon import face_lengths, topological_type
from .zeta import delta_batch, delta_oracle, delta_polynomial, delta_spectral

SEED_MAX = 2**64


@dataclass
class RunConfig:
    subcommand: str
    inputs: list[str] = field(default_factory=list)
    seed: int = 0
    options: dict = field(default_factory=dict)
    output: str | None = None


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(cfg: RunConfig, header: list[str], rows, out) -> None:
    buf = io.StringIO()
    buf.write(f"# ribbonzeta {__version__}\n")
    buf.write("# config: " + json.dumps(asdict(cfg), sort_keys=True) + "\n")
    buf.write(f"# seed: {cfg.seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    if cfg.output:
        Path(cfg.output).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())


def _lengths(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidArgument(f"boundary lengths must be comma-separated numbers: {text!r}") from exc
    if not vals:
        raise InvalidArgument("no boundary lengths given")
    return vals


def _seed(text: str) -> int:
    s = int(text)
    if not 0 <= s < SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return s


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args, cfg, out):
    mg = read_graph(args.file)
    g, n = topological_type(mg.graph)
    lens = face_lengths(mg)
    rows = [(f, g, n, " ".join(map(str, cyc)), float(lens[f])) for f, cyc in enumerate(mg.graph.faces)]
    _emit(cfg, ["face", "genus", "n_faces", "half_edges", "length"], rows, out)


def cmd_cells(args, cfg, out):
    rows = []
    L = _lengths(args.lengths) if args.lengths else None
    for i, lc in enumerate(labeled_cells(args.g, args.n, args.mode)):
        const = cell_constant(lc.cell, L, args.mode)
        volume = ""
        if L is not None:
            try:
                volume = cell_polytope(lc.cell, L, args.mode, lc.labels).volume
            except RibbonZetaError:
                volume = 0.0
        rep = lc.cell.representative
        rows.append((i, lc.cell.automorphism_count, lc.stabilizer, " ".join(map(str, lc.labels)),
                     rep.n_edges, rep.n_vertices, const, volume,
                     " ".join(map(str, rep.twin)), " ".join(map(str, rep.next_at_vertex))))
    _emit(cfg, ["cell_id", "automorphisms", "label_stabilizer", "face_labels", "n_edges",
                "n_vertices", "constant", "volume", "twin", "next_at_vertex"], rows, out)


def cmd_geodesics(args, cfg, out):
    mg = read_graph(args.file)
    paths = enumerate_geodesics(mg, args.max_length, oriented=args.oriented)
    trivalent = mg.graph.is_trivalent
    rows = []
    for p in paths:
        simple = is_simple(mg, p) if trivalent else ""
        if args.simple_only and simple is not True:
            continue
        rows.append((" ".join(map(str, p.steps)), p.metric_length, p.combinatorial_length, simple))
    _emit(cfg, ["steps", "metric_length", "combinatorial_length", "simple"], rows, out)


def _default_x_max(mg) -> float:
    return 25.0 * float(mg.length_array.mean())


def cmd_delta(args, cfg, out):
    mg = read_graph(args.file)
    if args.method == "spectral":
        res = delta_spectral(mg, args.tol)
    elif args.method == "polynomial":
        res = delta_polynomial(mg, args.tol)
    else:
        res = delta_oracle(mg, args.x_max or _default_x_max(mg))
    _emit(cfg, ["delta", "method", "residual"], [(res.delta, res.method, res.residual)], out)


def cmd_verify(args, cfg, out):
    mg = read_graph(args.file)
    spectral = delta_spectral(mg, args.tol)
    results = [(spectral, "")]
    failures = []
    if mg.is_rational:
        poly = delta_polynomial(mg, args.tol)
        ok = abs(poly.delta - spectral.delta) <= 1e-8
        results.append((poly, ok))
        if not ok:
            failures.append("polynomial")
    oracle = delta_oracle(mg, args.x_max or _default_x_max(mg))
    ok = abs(oracle.delta - spectral.delta) <= 0.05 * spectral.delta
    results.append((oracle, ok))
    if not ok:
        failures.append("oracle")
    rows = [(r.method, r.delta, r.residual, agree) for r, agree in results]
    _emit(cfg, ["method", "delta", "residual", "agrees_with_spectral"], rows, out)
    if failures:
        raise VerificationFailed(f"{', '.join(failures)} disagree with the spectral value")


def _sample_with_delta(args):
    L = _lengths(args.lengths)
    sample = sample_space(args.g, args.n, L, args.N, args.seed, args.mode,
                          aut_weight=not args.no_aut_weight)
    deltas = np.empty(len(sample))
    for c, rows in sample.by_cell():
        deltas[rows] = delta_batch(sample.cells[c].cell.representative, sample.lengths[rows])
    return sample, deltas


def cmd_sample(args, cfg, out):
    if args.N < 1:
        raise InvalidArgument("N must be at least 1")
    sample, deltas = _sample_with_delta(args)
    E = sample.lengths.shape[1]
    rows = ((int(c), *map(float, l), float(d)) for c, l, d in zip(sample.cell_ids, sample.lengths, deltas))
    _emit(cfg, ["cell_id", *[f"l{e}" for e in range(E)], "delta"], rows, out)


def cmd_dist(args, cfg, out):
    if args.bins < 2:
        raise InvalidArgument("need at least 2 bins")
    _, deltas = _sample_with_delta(args)
    h = histogram(empirical(deltas), args.bins, kde_bandwidth=args.kde)
    rows = [(float(a), float(b), float(m)) for a, b, m in zip(h.edges[:-1], h.edges[1:], h.masses)]
    _emit(cfg, ["left", "right", "mass"], rows, out)


def cmd_grid(args, cfg, out):
    if args.resolution < 8:
        raise InvalidArgument("resolution must be at least 8")
    grid = grid_delta(args.resolution)
    rows = [(float(x), float(y), float(1 - x - y), float(d)) for x, y, d in zip(grid.x, grid.y, grid.delta)]
    _emit(cfg, ["x", "y", "z", "delta"], rows, out)


def read_sample_column(path, column: str = "delta") -> list[float]:
    """Values from a sample CSV (comment lines skipped); uses ``column`` if
    present, otherwise the only column."""
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    except OSError as exc:
        raise GraphFormatError(f"cannot read {path}: {exc.strerror}") from exc
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        raise InvalidArgument(f"{path} has no data")
    if column in header:
        k = header.index(column)
    elif len(header) == 1:
        k = 0
    else:
        raise InvalidArgument(f"{path} has no {column!r} column")
    try:
        return [float(row[k]) for row in reader]
    except (ValueError, IndexError) as exc:
        raise InvalidArgument(f"{path}: malformed value in column {column!r}") from exc


def cmd_wasserstein(args, cfg, out):
    a = empirical(read_sample_column(args.file_a, args.column))
    b = empirical(read_sample_column(args.file_b, args.column))
    _emit(cfg, ["wasserstein1"], [(float(wasserstein1(a, b)),)], out)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ribbonzeta", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"ribbonzeta {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("-o", "--output", help="write CSV here instead of stdout")
        return sp

    def add_sampling(sp):
        sp.add_argument("g", type=int)
        sp.add_argument("n", type=int)
        sp.add_argument("lengths", help="boundary lengths L1,...,Ln")
        sp.add_argument("N", type=int, help="number of samples")
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--mode", choices=MODES, default="standard")
        sp.add_argument("--no-aut-weight", action="store_true")

    sp = add("validate", cmd_validate, "print type, faces and face lengths")
    sp.add_argument("file")

    sp = add("cells", cmd_cells, "list trivalent cells of a type")
    sp.add_argument("g", type=int)
    sp.add_argument("n", type=int)
    sp.add_argument("--lengths", help="boundary lengths L1,...,Ln for cell volumes")
    sp.add_argument("--mode", choices=MODES, default="standard")

    sp = add("geodesics", cmd_geodesics, "list closed geodesics up to a length")
    sp.add_argument("file")
    sp.add_argument("--max-length", type=float, required=True)
    sp.add_argument("--simple-only", action="store_true")
    sp.add_argument("--oriented", action="store_true", help="count the two orientations separately")

    sp = add("delta", cmd_delta, "critical exponent of a graph")
    sp.add_argument("file")
    sp.add_argument("--method", choices=("spectral", "polynomial", "oracle"), default="spectral")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--x-max", type=float, help="counting range for the oracle (default 25 x mean edge)")

    sp = add("verify", cmd_verify, "cross-check all critical exponent methods")
    sp.add_argument("file")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--x-max", type=float)

    sp = add("sample", cmd_sample, "sample the Kontsevich measure")
    add_sampling(sp)

    sp = add("dist", cmd_dist, "histogram of sampled critical exponents")
    add_sampling(sp)
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--kde", type=float, metavar="BANDWIDTH", help="Gaussian smoothing (presentation only)")

    sp = add("grid", cmd_grid, "critical exponent over the (1,1) simplex")
    sp.add_argument("--resolution", type=int, default=60)

    sp = add("wasserstein", cmd_wasserstein, "Wasserstein-1 distance between two sample CSVs")
    sp.add_argument("file_a")
    sp.add_argument("file_b")
    sp.add_argument("--column", default="delta")
    return p


def _config(args) -> RunConfig:
    skip = {"func", "subcommand", "output", "seed", "file", "file_a", "file_b"}
    inputs = [getattr(args, k) for k in ("file", "file_a", "file_b") if getattr(args, k, None)]
    options = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.subcommand, inputs, getattr(args, "seed", 0), options, args.output)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        args.func(args, _config(args), out)
    except RibbonZetaError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: InvalidArgument: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

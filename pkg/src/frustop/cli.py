"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on
usage or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import NAMED, Instance, builtin_corpus, planted_instances
from .disorder import BondConfig, sample_couplings, split_networks
from .ground_state import (
    DEFAULT_SITE_CAP,
    SiteCapExceeded,
    brute_force_ground_states,
    domain_walls,
    interface_check,
    theorem31_decomposition,
)
from .lattice import Chain, Lattice, build_complex
from .percolation import MODES, cluster_scan, exact_prob_unfrustrated, lower_bound, mc_prob_unfrustrated, strip
from .topology import (
    NoSpanningSurface,
    Report,
    Subcomplex,
    frustration_class,
    homology,
    link_mod2,
    verify_cohomology_exactness,
    verify_commutative_diagram,
    verify_duality,
    verify_homology_exactness,
    verify_universal_coefficients,
)

SCHEMA = "frustop/1"


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    seed: int
    lattice: dict | None = None
    x: list[float] | float | None = None
    j0: float | None = None
    caps: dict = field(default_factory=dict)
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    options: dict = field(default_factory=dict)
    argv: list[str] = field(default_factory=list)
    version: str = __version__
    schema: str = SCHEMA

    def to_dict(self) -> dict:
        return asdict(self)


def _manifest(args, *pos, **kw) -> RunManifest:
    return RunManifest(*pos, argv=list(args.argv), **kw)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc


def _lattice_from_args(args) -> Lattice:
    try:
        if args.lattice:
            return Lattice.from_json(args.lattice)
        extents = tuple(args.extents)
        bc = tuple(args.bc) if args.bc else ("free",) * len(extents)
        return Lattice(len(extents), extents, bc)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid lattice: {exc}") from exc


def _load_bonds(path: str) -> tuple[Lattice, BondConfig, dict]:
    try:
        doc = json.loads(Path(path).read_text())
        lattice = Lattice.from_dict(doc["lattice"])
        bonds = BondConfig.from_dict(doc["bonds"])
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed bond file {path}: {exc}") from exc
    return lattice, bonds, doc


def _instance_from_file(path: str) -> Instance:
    lattice, bonds, _ = _load_bonds(path)
    cx = build_complex(lattice)
    if len(bonds) != cx.n_bonds:
        raise UsageError(f"{path}: {len(bonds)} signs for a lattice with {cx.n_bonds} bonds")
    return Instance(Path(path).stem, cx, bonds)


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    if args.named:
        inst = NAMED[args.named]()
        lattice = inst.complex.lattice
        manifest = _manifest(args, "gen", args.seed, lattice.to_dict(), None, inst.bonds.j0,
                               outputs=[args.out] if args.out else [], options={"named": args.named})
        _emit(dumps({"manifest": manifest.to_dict(), "lattice": lattice.to_dict(), "bonds": inst.bonds.to_dict()}),
              args.out)
        return 0
    if not (args.extents or args.lattice):
        raise UsageError("give --extents, --lattice or --named")
    lattice = _lattice_from_args(args)
    if not 0.0 <= args.x <= 1.0 or not args.j0 > 0:
        raise UsageError("need 0 <= x <= 1 and j0 > 0")
    cx = build_complex(lattice)
    bonds = sample_couplings(cx, args.x, args.j0, args.seed, args.trial)
    manifest = _manifest(args, "gen", args.seed, lattice.to_dict(), args.x, args.j0,
                           outputs=[args.out] if args.out else [], options={"trial": args.trial})
    _emit(dumps({"manifest": manifest.to_dict(), "lattice": lattice.to_dict(), "bonds": bonds.to_dict()}), args.out)
    return 0


def analyze_instance(inst: Instance) -> dict:
    cx = inst.complex
    split = split_networks(inst.bonds, cx)
    nplus = Subcomplex.from_plaquettes(cx, split.unfrustrated_plaquettes, fill=False)
    nminus = Subcomplex.from_plaquettes(cx, split.frustrated_plaquettes)
    fc = frustration_class(inst.bonds, nplus)
    return {
        "n_plaquettes": cx.n_plaquettes,
        "frustrated": split.n_frustrated,
        "frustrated_fraction": split.n_frustrated / cx.n_plaquettes if cx.n_plaquettes else 0.0,
        "components_minus": sorted((len(c) for c in split.components_minus), reverse=True),
        "components_plus": sorted((len(c) for c in split.components_plus), reverse=True),
        "pairs": [list(p) for p in split.pairs],
        "unmatched": split.unmatched,
        "h1_nplus": homology(nplus, 1).dim_H,
        "h1_nminus": homology(nminus, 1).dim_H,
        "phi": list(fc.signs),
        "negative_bonds": int(inst.bonds.negative.sum()),
    }


def cmd_analyze(args) -> int:
    inst = _instance_from_file(args.bonds)
    manifest = _manifest(args, "analyze", args.seed, inst.complex.lattice.to_dict(), inputs=[args.bonds])
    _emit(dumps({"manifest": manifest.to_dict(), "result": analyze_instance(inst)}), args.out)
    return 0


def ground_state_report(inst: Instance, cap: int) -> tuple[dict, bool]:
    cx = inst.complex
    gs = brute_force_ground_states(cx, inst.bonds, cap)
    checks = [interface_check(s, inst.bonds, cx) for s in gs.states]
    walls = domain_walls(gs.canonical, inst.bonds, cx)
    doc = gs.to_dict()
    doc["walls"] = walls.sorted_cells()
    doc["wall_boundaries"] = [g.indices() for g in walls.boundaries]
    doc["interface_identity"] = all(c.passed for c in checks)
    return doc, doc["interface_identity"]


def cmd_gs(args) -> int:
    inst = _instance_from_file(args.bonds)
    try:
        doc, ok = ground_state_report(inst, args.cap)
    except SiteCapExceeded as exc:
        raise UsageError(str(exc)) from exc
    manifest = _manifest(args, "gs", args.seed, inst.complex.lattice.to_dict(), caps={"sites": args.cap},
                           inputs=[args.bonds])
    _emit(dumps({"manifest": manifest.to_dict(), "result": doc}), args.out)
    return 0 if ok else 1


def linking_report(inst: Instance) -> Report:
    """Linking parity of each H1(N+) basis loop with the boundary of the negative-bond walls."""
    cx = inst.complex
    rep = Report("linking parity")
    nplus = inst.nplus
    D = cx.dual.complex
    walls = cx.dual.dual_mask(1, inst.bonds.negative)
    gamma = Chain(cx.d - 2, D.boundary_mask(cx.d - 1, walls))
    for i, loop in enumerate(homology(nplus, 1).basis):
        phi = int(np.count_nonzero(loop.support & inst.bonds.negative) & 1)
        try:
            link = link_mod2(loop, gamma, cx)
        except NoSpanningSurface as exc:
            rep.add(f"loop {i}", True, outcome="no spanning surface", reason=str(exc))
            rep.dims["no_spanning_surface"] = rep.dims.get("no_spanning_surface", 0) + 1
            continue
        rep.add(f"loop {i}", link == phi, link=link, frustration=phi)
    return rep


def verify_instance(inst: Instance, cap: int = DEFAULT_SITE_CAP) -> dict:
    cx = inst.complex
    nminus, nplus = inst.nminus, inst.nplus
    reports = [
        verify_homology_exactness(nminus, nplus),
        verify_cohomology_exactness(nminus, nplus),
        verify_commutative_diagram(inst.bonds, nminus, nplus),
        verify_universal_coefficients(nplus),
        verify_universal_coefficients(Subcomplex.full(cx)),
        verify_duality(nplus),
        linking_report(inst),
    ]
    reports[3].name = "universal coefficients (N+)"
    reports[4].name = "universal coefficients (lattice)"
    if cx.n_sites <= cap:
        gs = brute_force_ground_states(cx, inst.bonds, cap)
        rep = Report("ground states")
        rep.dims.update({"degeneracy": gs.degeneracy, "energy": gs.energy_units})
        rep.add("interface identity on every ground state",
                all(interface_check(s, inst.bonds, cx).passed for s in gs.states))
        diagram = verify_commutative_diagram(inst.bonds, nminus, nplus, spins=gs.canonical)
        rep.add("diagram with ground-state walls", diagram.passed)
        reports.append(rep)
        try:
            dec = theorem31_decomposition(nplus, inst.bonds, cap)
        except ValueError:
            dec = None
        if dec is not None:
            t = Report("wall decomposition")
            t.dims["walls"] = dec.r
            for i, a in enumerate(dec.analyses):
                t.add(f"wall {i} not null-homologous", not a.null_homologous)
                t.add(f"wall {i} crosses a frustrated loop oddly", a.witness_loop is not None)
            reports.append(t)
    docs = [r.to_dict() for r in reports]
    return {"name": inst.name, "passed": all(d["passed"] for d in docs), "reports": docs}


SUITES = {"corpus": builtin_corpus, "planted": planted_instances}


def cmd_verify(args) -> int:
    if (args.bonds is None) == (args.suite is None):
        raise UsageError("give either a bond file or --suite")
    if args.bonds:
        instances = [_instance_from_file(args.bonds)]
    else:
        instances = SUITES[args.suite](args.seed) if args.suite == "corpus" else SUITES[args.suite]()
    results = sorted((verify_instance(i, args.cap) for i in instances), key=lambda r: r["name"])
    ok = all(r["passed"] for r in results)
    manifest = _manifest(args, "verify", args.seed, caps={"sites": args.cap},
                           inputs=[args.bonds] if args.bonds else [], options={"suite": args.suite})
    if args.format == "csv":
        buf = io.StringIO()
        buf.write(f"# manifest: {json.dumps(manifest.to_dict(), sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance", "report", "check", "passed"])
        for r in results:
            for rep in r["reports"]:
                for c in rep["checks"]:
                    w.writerow([r["name"], rep["name"], c["name"], int(c["passed"])])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(dumps({"manifest": manifest.to_dict(), "passed": ok, "instances": results}), args.out)
    return 0 if ok else 1


def cmd_replay(args) -> int:
    """Rerun the command recorded in a manifest (or in any output that embeds one)."""
    path = Path(args.manifest)
    try:
        text = path.read_text()
        if text.startswith("# manifest: "):
            doc = json.loads(text.splitlines()[0][len("# manifest: "):])
        else:
            doc = json.loads(text)
            doc = doc.get("manifest", doc)
        argv = [str(a) for a in doc["argv"]]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise UsageError(f"no manifest argv in {path}: {exc}") from exc
    if not argv or "replay" in argv:
        raise UsageError("manifest has no replayable command")
    return main(argv)


def _x_values(args) -> list[float]:
    if args.x_range:
        start, stop, step = args.x_range
        if step <= 0 or start > stop:
            raise UsageError("x-range needs start <= stop and a positive step")
        n = int(round((stop - start) / step))
        xs = [round(start + i * step, 10) for i in range(n + 1)]
    else:
        xs = list(args.x)
    if not xs or any(not 0.0 <= x <= 1.0 for x in xs):
        raise UsageError("x values must lie in [0, 1]")
    return xs


PERC_COLUMNS = ["mode", "x", "size", "trials", "estimate", "stderr", "bound", "exact", "largest_fraction",
                "largest_stderr"]


def cmd_percolate(args) -> int:
    xs = _x_values(args)
    if args.trials < 1:
        raise UsageError("trials must be positive")
    rows = []
    if args.mode == "strip":
        cx, mask = strip(args.strip)
        for x in xs:
            rep = mc_prob_unfrustrated(cx, mask, x, args.trials, args.seed)
            row = rep.to_dict()
            row.update(mode="strip", size=[args.strip], bound=str(lower_bound(x, args.strip)),
                       exact=str(exact_prob_unfrustrated(cx, mask, x)))
            rows.append(row)
        lattice_doc = None
    else:
        lattices = [_lattice_from_args(args)]
        if args.sizes:
            base = lattices[0]
            lattices = [Lattice(base.d, (s,) * base.d, base.bc) for s in args.sizes]
        for lat in lattices:
            for x in xs:
                row = cluster_scan(lat, x, args.trials, args.seed, args.mode).to_dict()
                row["exact"] = None
                rows.append(row)
        lattice_doc = lattices[0].to_dict()
    manifest = _manifest(args, "percolate", args.seed, lattice_doc, xs, caps={"trials": args.trials},
                           options={"mode": args.mode, "strip": args.strip, "sizes": args.sizes})
    if args.format == "json":
        _emit(dumps({"manifest": manifest.to_dict(), "rows": rows}), args.out)
        return 0
    buf = io.StringIO()
    buf.write(f"# manifest: {json.dumps(manifest.to_dict(), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PERC_COLUMNS)
    for r in rows:
        size = "x".join(map(str, r["size"])) if r["size"] else ""
        w.writerow([r["mode"], repr(r["x"]), size, r["trials"], repr(r["estimate"]), repr(r["stderr"]),
                    r["bound"] if r["bound"] is not None else "", r["exact"] or "",
                    "" if r["largest_fraction"] is None else repr(r["largest_fraction"]),
                    "" if r["largest_stderr"] is None else repr(r["largest_stderr"])])
    _emit(buf.getvalue(), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 already; keep the message short
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _add_lattice(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--extents", type=int, nargs="+", help="cells per axis, e.g. 8 8")
    g.add_argument("--lattice", help='JSON lattice spec, e.g. {"d":2,"extents":[8,8],"bc":["free","free"]}')
    p.add_argument("--bc", nargs="+", choices=("free", "periodic"), help="boundary condition per axis")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS lets the flags appear before or after the subcommand
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", default=argparse.SUPPRESS)
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv", default=argparse.SUPPRESS)
    common.add_argument("--out", "-o", default=argparse.SUPPRESS, help="output path (default stdout)")

    parser = _Parser(prog="frustop", description="Topology of frustration in Ising spin glasses.",
                     parents=[common])
    parser.add_argument("--version", action="version", version=f"frustop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="sample a +-J bond configuration")
    _add_lattice(p, required=False)
    p.add_argument("--named", choices=sorted(NAMED), help="write a built-in instance instead of sampling")
    p.add_argument("--x", type=float, default=0.5, help="probability of a positive bond")
    p.add_argument("--j0", type=float, default=1.0)
    p.add_argument("--trial", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", parents=[common], help="frustration networks, H1 and the frustration class")
    p.add_argument("bonds")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gs", parents=[common], help="exact ground states by enumeration")
    p.add_argument("bonds")
    p.add_argument("--cap", type=int, default=DEFAULT_SITE_CAP, help="maximum number of sites")
    p.set_defaults(func=cmd_gs)

    p = sub.add_parser("verify", parents=[common], help="run every topology check")
    p.add_argument("bonds", nargs="?")
    p.add_argument("--suite", choices=sorted(SUITES))
    p.add_argument("--cap", type=int, default=DEFAULT_SITE_CAP)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("percolate", parents=[common], help="percolation and unfrustration probabilities")
    _add_lattice(p, required=False)
    p.add_argument("--mode", choices=MODES + ("strip",), default="strip")
    p.add_argument("--strip", type=int, default=3, help="strip length for --mode strip")
    p.add_argument("--sizes", type=int, nargs="+", help="scan cubic/square sizes instead of --extents")
    xg = p.add_mutually_exclusive_group()
    xg.add_argument("--x", type=float, nargs="+", default=[0.5])
    xg.add_argument("--x-range", type=float, nargs=3, metavar=("START", "STOP", "STEP"))
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_percolate)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest", help="a JSON output, CSV output or bare manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = argv
    for name, default in (("seed", 0), ("format", None), ("out", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.command == "percolate" and args.mode != "strip" and not (args.extents or args.lattice):
        parser.exit(2, "frustop percolate: error: cluster modes need --extents or --lattice\n")
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"frustop {args.command}: error: {exc}\n")
        return 2
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())

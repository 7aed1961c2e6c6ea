"""Command-line interface.

Every command prints a line-oriented ``key: value`` report that starts with a
schema header.  Reports are deterministic for a fixed ``--seed``.
"""

import argparse
import os
import random
import sys
import warnings

from . import __version__
from .certificates import pingpong_certify, rank_search
from .coarse import estimate_delta, four_point_defect
from .connectors import connector_diagnostics, minimal_connector
from .constants import ConstantsRegistry
from .errors import Indeterminate, NielsenHypError, PreconditionError, SpecError
from .hulls import COARSE, TREE_EXACT, SubgroupGens, check_hull_closeness, convex_hull_approx
from .nielsen import GTuple, LoopConfig, trichotomy, transfer_loop
from .space import make_space
from .svg import render

SCHEMA = "nielsenhyp-report/1"
EXIT_USAGE = 2


class Report:
    def __init__(self, command, args):
        self.exit_code = 0
        self.lines = ["schema: " + SCHEMA, "command: " + command]
        self.lines.append("seed: %d" % args.seed)
        for item in sorted(args.set or []):
            self.lines.append("override: " + item)

    def add(self, key, value):
        self.lines.append("%s: %s" % (key, _fmt(value)))

    def text(self):
        return "\n".join(self.lines) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return "%.6f" % v
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _load_space(args):
    spec = args.space or "free 2"
    if os.path.exists(spec):
        with open(spec) as fh:
            spec = fh.read()
    return make_space(spec)


def _registry(args, space):
    reg = ConstantsRegistry()
    if space.delta == 0:
        reg.tree_exact()
    try:
        reg.apply_overrides(args.set or [])
    except (KeyError, ValueError, ZeroDivisionError) as ex:
        raise SpecError(str(ex))
    return reg


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


# ----------------------------------------------------------------------------
# commands


def cmd_delta(space, args, reg):
    if not space.is_word and space.backend_kind != "tree":
        raise PreconditionError("delta needs a graph backend")
    if space.backend_kind == "tree":
        sample = list(space.backend.vertices)
    else:
        sample = space.ball(space.basepoint(), args.radius, cap=args.cap)
    if args.sample and args.sample < len(sample):
        rng = random.Random(args.seed)
        sample = sorted(rng.sample(sample, args.sample), key=space.sort_key)
    rep = Report("delta", args)
    rep.add("backend", space.backend_kind)
    if space.backend_kind != "tree":
        rep.add("radius", args.radius)
    rep.add("sample_size", len(sample))
    thin = estimate_delta(space, sample)
    rep.add("thin_triangle_delta", float(thin))
    rep.add("four_point_defect", float(four_point_defect(space, sample)))
    rep.add("declared_delta", space.delta)
    rep.add("estimated_at_least", float(thin))
    return rep, None


def cmd_hull(space, args, reg):
    gens = [space.parse_isometry(g) for g in args.gens]
    if not gens:
        raise PreconditionError("hull needs at least one generator")
    mode = args.mode or (TREE_EXACT if space.backend_kind == "free_cayley" else COARSE)
    U = SubgroupGens(gens)
    H = convex_hull_approx(space, U, args.window, mode=mode, registry=reg)
    rep = Report("hull", args)
    rep.add("backend", space.backend_kind)
    rep.add("generators", [space.format_isometry(g) for g in gens])
    rep.add("mode", mode)
    rep.add("window", float(args.window))
    rep.add("threshold", H.threshold)
    for key in ("orbit_sample", "limit_sample", "small_disp", "z_set", "hull", "weak_hull"):
        rep.add("size." + key, len(getattr(H, key)))
    chk = check_hull_closeness(space, H, reg)
    rep.add("hausdorff.weak_vs_hull", float(chk["weak_vs_hull"]))
    rep.add("hausdorff.orbit_vs_hull", float(chk["orbit_vs_hull"]))
    rep.add("small_displacement_check", chk["axis_checks_ok"])
    for note in H.warnings:
        rep.add("warning", note)
    if len(H.hull) <= args.list_max:
        rep.add("hull_points", [space.format_point(p) for p in H.hull])
    svg = None
    if args.svg:
        svg = render(space, [("hull", H.hull), ("orbit", H.orbit_sample)],
                     title="hull of <%s>" % ", ".join(space.format_isometry(g) for g in gens))
    return rep, svg


def _read_sets(space, args):
    raw = []
    if args.sets:
        with open(args.sets) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    raw.append(line.split())
    for item in args.set_words:
        raw.append(item.split(","))
    if len(raw) < 2:
        raise PreconditionError("connector needs at least two sets")
    return [[space.parse_point(p) for p in S] for S in raw]


def cmd_connector(space, args, reg):
    sets = _read_sets(space, args)
    conn = minimal_connector(space, sets)
    diag = connector_diagnostics(space, conn, reg)
    rep = Report("connector", args)
    rep.add("backend", space.backend_kind)
    rep.add("sets", len(sets))
    rep.add("exact", conn.exact)
    if conn.merged:
        rep.add("notice", "overlapping sets merged into one component")
        for grp in conn.merged:
            rep.add("merged", [k + 1 for k in grp])
    rep.add("perimeter", float(diag["perimeter"]))
    rep.add("components", diag["components"])
    rep.add("terminals", diag["terminals"])
    for k, comp in enumerate(conn.components):
        rep.add("component.%d.length" % (k + 1), float(comp.length))
        rep.add("component.%d.terminals" % (k + 1),
                ["%s@%d" % (space.format_point(p), i + 1) for p, i in comp.terminals])
    rep.add("omega.worst_lambda", float(diag["worst_lambda"]))
    rep.add("omega.worst_eps", float(diag["worst_eps"]))
    if "hausdorff_to_geodesics" in diag:
        rep.add("hausdorff_to_geodesics", float(diag["hausdorff_to_geodesics"]))
    svg = None
    if args.svg:
        paths = [("component %d" % (k + 1), e) for k, c in enumerate(conn.components)
                 for e in c.edges]
        svg = render(space, [("set %d" % (k + 1), S) for k, S in enumerate(conn.sets)], paths,
                     title="minimal connector, perimeter %s" % _fmt(float(diag["perimeter"])))
    return rep, svg


def cmd_reduce(space, args, reg):
    t = [space.parse_isometry(w) for w in args.tuple]
    if not t:
        raise PreconditionError("reduce needs a non-empty tuple")
    cfg = LoopConfig(multiplier_len_cap=args.mult_cap, max_steps=args.budget)
    res = transfer_loop(space, t, args.l, cfg, registry=reg)
    st = res.state
    rep = Report("reduce", args)
    rep.add("backend", space.backend_kind)
    rep.add("input", [space.format_isometry(w) for w in t])
    rep.add("l", args.l)
    rep.add("outcome", res.outcome)
    rep.add("structural_steps", res.structural_steps)
    rep.add("step_bound", int(reg.get("transfer_bound", len(t))))
    rep.add("final_tuple", [space.format_isometry(w) for w in st.entries])
    for k, part in enumerate(st.parts):
        rep.add("part.%d" % (k + 1), [p + 1 for p in part])
        rep.add("part.%d.conjugator" % (k + 1), space.format_isometry(st.conjugators[k]))
    rep.add("hyperbolic", [p + 1 for p in st.hyperbolic])
    rep.add("mn", list(st.mn))
    if res.outcome == "success":
        rep.add("conjugator", space.format_isometry(res.conjugator))
        rep.add("short_entries", [space.format_isometry(w) for w in res.short_entries])
        rep.add("max_conjugated_len", float(res.max_conjugated_len))
    for key in ("same_subgroup", "replays", "claim", "confirmed"):
        if key in res.oracle:
            rep.add("oracle." + key, res.oracle[key])
    rep.add("move_count", sum(1 for line in res.log if not line.startswith("#")))
    if res.outcome == "free_split" and st.parts and space.backend_kind == "free_cayley":
        factors = [SubgroupGens(st.part_elements(k)) for k in range(len(st.parts))]
        factors += [SubgroupGens([st.entries[p]]) for p in st.hyperbolic]
        if len(factors) >= 2:
            try:
                cert = pingpong_certify(space, GTuple(factors, []), 2, 2, registry=reg)
                rep.add("certificate.verdict", _verdict(cert.verdict))
                rep.add("certificate.checked", len(cert.checked_words))
            except PreconditionError as ex:
                rep.add("certificate", "not issued (%s)" % ex)
    if args.log:
        _write(args.log, "\n".join(res.log) + ("\n" if res.log else ""))
    svg = None
    if args.svg:
        svg = render(space, [("entries", st.entries)], title="reduced tuple")
    return rep, svg


def _verdict(v):
    return {True: "true", False: "false", None: "indeterminate"}[v]


def cmd_certify(space, args, reg):
    factors = [SubgroupGens([space.parse_isometry(g) for g in f.split("+")], "U%d" % (k + 1))
               for k, f in enumerate(args.factors)]
    if len(factors) < 2:
        raise PreconditionError("certify needs at least two factors")
    M = GTuple(factors, [])
    rep = Report("certify", args)
    tri = trichotomy(space, M, registry=reg)
    rep.add("trichotomy", tri.case)
    try:
        cert = pingpong_certify(space, M, args.syllables, args.cap or 2, registry=reg)
    except PreconditionError as ex:
        rep.add("certificate", "not issued")
        rep.add("reason", str(ex))
        rep.exit_code = ex.exit_code
        return rep, None
    for line in cert.to_text().splitlines():
        if line.startswith("  ") or line == "checked_words:":
            continue
        key, _, val = line.partition(": ")
        rep.add("certificate." + key, val)
    if args.log:
        _write(args.log, cert.to_text())
    if cert.verdict is None:
        rep.exit_code = Indeterminate.exit_code
    return rep, None


def cmd_rank(space, args, reg):
    R = rank_search(space, args.k, args.radius, cap=args.cap or 10 ** 6)
    rep = Report("rank-demo", args)
    rep.add("k", R.k)
    rep.add("radius", R.radius)
    rep.add("subsets", R.subsets)
    rep.add("conjugacy_classes", len(R.classes))
    rep.add("smallest_rank", R.smallest_rank)
    for r, c in R.rank_histogram.items():
        rep.add("rank.%d" % r, c)
    rep.add("merged_beyond_radius", R.beyond_radius)
    for k, c in enumerate(R.classes):
        rep.add("class.%d" % (k + 1), "rank=%d count=%d basis=%s"
                % (c.rank, c.count, ",".join(space.format_isometry(w) for w in c.representative)))
    return rep, None


COMMANDS = {
    "delta": cmd_delta,
    "hull": cmd_hull,
    "reduce": cmd_reduce,
    "connector": cmd_connector,
    "certify": cmd_certify,
    "rank-demo": cmd_rank,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="space spec file (or inline spec text); default 'free 2'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--set", action="append", metavar="KEY=VAL",
                        help="override a registry constant")
    common.add_argument("--svg", metavar="PATH")
    common.add_argument("--log", metavar="PATH")
    common.add_argument("--cap", type=int)
    common.add_argument("--out", metavar="PATH", help="write the report here as well")

    p = argparse.ArgumentParser(prog="nielsenhyp", description="Nielsen-method tools for groups acting on hyperbolic spaces.")
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("delta", parents=[common], help="estimate hyperbolicity on a ball")
    s.add_argument("--radius", type=int, default=2)
    s.add_argument("--sample", type=int, help="random subsample size (uses --seed)")

    s = sub.add_parser("hull", parents=[common], help="windowed convex hull of a subgroup")
    s.add_argument("gens", nargs="*")
    s.add_argument("--window", type=float, default=4)
    s.add_argument("--mode", choices=[TREE_EXACT, COARSE])
    s.add_argument("--list-max", type=int, default=64)

    s = sub.add_parser("reduce", parents=[common], help="run the transfer loop")
    s.add_argument("tuple", nargs="*")
    s.add_argument("--l", type=int, default=1)
    s.add_argument("--budget", type=int, default=64)
    s.add_argument("--mult-cap", type=int, default=2)

    s = sub.add_parser("connector", parents=[common], help="minimal connector of point sets")
    s.add_argument("set_words", nargs="*", help="comma-separated points of one set")
    s.add_argument("--sets", metavar="FILE", help="one set per line, points separated by spaces")

    s = sub.add_parser("certify", parents=[common], help="ping-pong free-product certificate")
    s.add_argument("factors", nargs="*", help="one factor per argument, generators joined by '+'")
    s.add_argument("--syllables", type=int, default=4)

    s = sub.add_parser("rank-demo", parents=[common], help="rank search over a ball")
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--radius", type=int, default=1)
    return p


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return ex.code if isinstance(ex.code, int) else EXIT_USAGE
    try:
        space = _load_space(args)
        reg = _registry(args, space)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep, svg = COMMANDS[args.command](space, args, reg)
    except NielsenHypError as ex:
        print("error: %s" % ex, file=sys.stderr)
        return ex.exit_code
    text = rep.text()
    stdout.write(text)
    if args.out:
        _write(args.out, text)
    if args.svg and svg is not None:
        _write(args.svg, svg)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())

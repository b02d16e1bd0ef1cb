"""``kvn`` command line: run an experiment, print a report with verdict lines.

Exit codes: 0 all verdicts PASS, 1 some verdict FAIL, 2 invalid input,
3 solver failure, 4 ambiguous kernel tolerance.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import graph as gm
from . import interval as iv
from . import quantum_graph as qg
from . import semigroup as sg
from . import wentzell as wz
from .errors import DegenerateDifference, ParseError, SolverError, TolTooCoarse, ValidationError
from .krein import form_spectrum
from .linalg import gen_sym_eig, null_space, sym_eig

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVER, EXIT_TOL = 0, 1, 2, 3, 4
CSV_COLUMNS = ("quantity", "k", "value", "reference", "margin", "verdict")
ORDER_RANGE = (1.7, 2.3)


@dataclass
class RunReport:
    command: str
    inputs: dict
    rows: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def add(self, quantity, value, k="", reference="", margin="", verdict="", **extra):
        row = {"quantity": quantity, "k": k, "value": value, "reference": reference,
               "margin": margin, "verdict": verdict}
        row.update(extra)
        self.rows.append(row)
        return row

    def check(self, quantity, ok, value, k="", reference="", margin="", **extra):
        return self.add(quantity, value, k, reference, margin, "PASS" if ok else "FAIL", **extra)

    @property
    def ok(self):
        return all(r["verdict"] != "FAIL" for r in self.rows)

    def to_dict(self):
        return {"command": self.command, "inputs": self.inputs, "results": self.rows,
                "tables": self.tables, "provenance": self.provenance}


# ---------------------------------------------------------------- formatting

def _num(x, digits):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, f".{digits}g")


def _json(obj, indent=0):
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _num(obj, 17)


def render_json(report):
    return _json(report.to_dict()) + "\n"


def render_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    cell = lambda v: _num(v, 12) if isinstance(v, (int, float, np.number)) else v  # noqa: E731
    for r in report.rows:
        w.writerow([cell(r[c]) for c in CSV_COLUMNS])
    for name, mat in report.tables.items():
        for i, row in enumerate(np.atleast_2d(np.asarray(mat, dtype=float))):
            for j, v in enumerate(row):
                w.writerow([name, f"{i},{j}", cell(v), "", "", ""])
    return buf.getvalue()


def render_text(report):
    out = [f"# kvn {report.command}"]
    for key, val in report.inputs.items():
        out.append(f"#   {key} = {val}")
    for name, mat in report.tables.items():
        out.append(f"{name} =")
        out.append(np.array2string(np.asarray(mat, dtype=float), precision=10,
                                   suppress_small=True, max_line_width=120))
    for r in report.rows:
        head = r["quantity"] + (f"[{r['k']}]" if r["k"] != "" else "")
        value = r.get("status") or _fmt(r["value"])
        parts = [f"{head}: {value}"]
        if r["reference"] != "":
            parts.append(f"{r.get('ref_label', 'reference')}: {_fmt(r['reference'])}")
        if r["margin"] != "":
            parts.append(f"margin: {_fmt(r['margin'])}")
        if r["verdict"]:
            parts.append(f"verdict: {r['verdict']}")
        line = ", ".join(parts)
        if r.get("note"):
            line += f"  ({r['note']})"
        out.append(line)
    return "\n".join(out) + "\n"


def _fmt(v):
    return v if isinstance(v, str) else _num(v, 12)


RENDERERS = {"text": render_text, "json": render_json, "csv": render_csv}


# ------------------------------------------------------------------- inputs

def _graph(args):
    if args.input is None:
        return gm.single_edge(1.0)
    return gm.load_graph(args.input)


def _floats(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from exc


def _load_lambda(path, graph):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if isinstance(data, dict):
        data = data.get("lambda")
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a matrix or an object with key 'lambda'")
    try:
        lam = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: matrix entries must be numbers") from exc
    return qg.VertexCondition.custom(graph, lam)


def _condition(spec, graph):
    if spec in ("friedrichs", "kirchhoff"):
        return qg.VertexCondition.kirchhoff(graph)
    if spec == "krein":
        return qg.VertexCondition.krein(graph)
    if spec.startswith("lambda:"):
        return _load_lambda(spec[len("lambda:"):], graph)
    raise ValidationError(f"unknown extension {spec!r}; use friedrichs, krein or lambda:<file>")


def _tol(args):
    return getattr(args, "tol", None)


def _graph_inputs(args, graph):
    return {"graph": graph.to_dict(), "mesh": args.mesh}


# ----------------------------------------------------------------- commands

def cmd_graph(args):
    g = _graph(args)
    rep = RunReport("graph", {"graph": g.to_dict()})
    L = gm.discrete_laplacian(g, "resistance")
    rep.tables["incidence"] = gm.incidence(g).full
    rep.tables["L"] = L
    rep.tables["Lambda"] = gm.discrete_laplacian(g, "conductance")
    for v, d in gm.degree(g).items():
        rep.add("degree", d, k=v)
    comps = gm.n_components(g)
    rep.add("components", comps, note="connected" if comps == 1 else "disconnected")
    eig = sym_eig(L, vectors=False)
    for j, lam in enumerate(eig.values):
        rep.add("eigenvalue_L", lam, k=j)
    scale = max(1.0, float(np.abs(eig.values).max()))
    rep.check("L_psd", eig.values[0] >= -1e-12 * scale, eig.values[0], margin=eig.values[0])
    dim, _ = null_space(L, rel_tol=_tol(args))
    rep.check("kernel_dim_L", dim == comps, dim, reference=comps, ref_label="components",
              margin=0 if dim == comps else -abs(dim - comps))
    return rep


def _qg_setup(args, command):
    g = _graph(args)
    vc = _condition(args.extension, g)
    mg = qg.MetricGraph(g, args.mesh)
    inputs = _graph_inputs(args, g)
    inputs["extension"] = args.extension
    return g, vc, mg, RunReport(command, inputs)


def cmd_qg_spectrum(args):
    g, vc, mg, rep = _qg_setup(args, "qg spectrum")
    rep.inputs.update(k=args.k, lumped=args.lumped)
    sp = qg.spectrum(mg, vc, k=args.k, lumped=args.lumped, rel_tol=_tol(args), vectors=False)
    rep.add("kernel_dim", sp.kernel_dim)
    orders = {}
    base = qg.MetricGraph(g, max(2, args.mesh // 4))
    if args.order and base.mesh_per_edge * 4 == args.mesh:
        try:
            orders = qg.refine_and_estimate_order(base, vc, args.k, rel_tol=_tol(args),
                                                  lumped=args.lumped)
        except DegenerateDifference as exc:
            rep.add("order", float("nan"), note=str(exc))
    for j, lam in enumerate(sp.values):
        rep.add("eigenvalue", lam, k=j)
    lo, hi = ORDER_RANGE
    for j, p in orders.items():
        rep.check("order", lo <= p <= hi, p, k=j, reference=2.0, margin=min(p - lo, hi - p))
    return rep


def cmd_qg_kernel(args):
    g, vc, mg, rep = _qg_setup(args, "qg kernel")
    dim = qg.kernel_dimension(mg, vc, rel_tol=_tol(args))
    if vc.kind == "krein":
        want, label = g.n_vertices, "|V|"
    elif vc.kind == "kirchhoff":
        want, label = gm.n_components(g), "components"
    else:
        rep.add("kernel_dim", dim)
        return rep
    rep.check("kernel_dim", dim == want, dim, reference=want, ref_label=label,
              margin=-abs(dim - want))
    return rep


def cmd_qg_semigroup(args):
    g, vc, mg, rep = _qg_setup(args, "qg semigroup")
    ts = args.t or [0.1, 0.5, 1.0]
    rep.inputs["t"] = ts
    form = qg.assemble(mg, vc, lumped=True)
    violated = []
    markov = []
    for t in ts:
        s = sg.evolve(form.stiffness, t, mass=form.mass)
        pos = sg.check_positivity(s, args.check_tol)
        con = sg.check_linf_contractivity(s, args.check_tol)
        rep.add("positivity", pos.value, k=t, status="holds" if pos else "VIOLATED",
                note=f"min entry {pos.value:.6g}")
        rep.add("linf_contractivity", con.value, k=t, status="holds" if con else "VIOLATED",
                note=f"max row sum {con.value:.6g}")
        violated.append(not pos.ok)
        markov.append(pos.ok and con.ok)
    if vc.kind == "kirchhoff":
        rep.check("markov_all_t", all(markov), int(sum(markov)), reference=len(ts),
                  ref_label="samples")
    elif vc.kind == "krein":
        rep.check("positivity_fails_some_t", any(violated), int(sum(violated)),
                  reference=len(ts), ref_label="samples")
    return rep


def _direction(args, n):
    if args.seed is None:
        return np.eye(n), "identity"
    rng = np.random.default_rng(args.seed)
    A = rng.standard_normal((n, n))
    return A @ A.T + n * np.eye(n), f"random SPD (seed {args.seed})"


def cmd_qg_probe(args):
    g = _graph(args)
    mg = qg.MetricGraph(g, args.mesh)
    rep = RunReport("qg probe", _graph_inputs(args, g))
    Q, label = _direction(args, g.n_vertices)
    rep.inputs["direction"] = label
    eps_list = args.eps or [1e-3, 1e-2]
    rep.inputs["eps"] = eps_list
    base = qg.positivity_threshold_probe(mg, Q, 0.0)
    rep.add("smallest_eigenvalue", base, k=0.0, note="Krein vertex matrix itself")
    for eps in eps_list:
        lam = qg.positivity_threshold_probe(mg, Q, eps)
        rep.check("smallest_eigenvalue", lam < 0, lam, k=eps, margin=-lam)
    return rep


def cmd_interval(args):
    ends = frozenset(args.dirichlet_end or ())
    spec = iv.IntervalOperatorSpec(args.kind, q=args.q, dirichlet_end=ends)
    rep = RunReport("interval", {"kind": args.kind, "q": args.q,
                                 "dirichlet_end": sorted(ends), "k": args.k, "mesh": args.mesh})
    roots = iv.exact_spectrum(spec, args.k)
    fem = None
    if args.mesh:
        fem = form_spectrum(iv.fem_form(spec, args.mesh), vectors=False, rel_tol=1e-6).values
    j = 0
    worst_res, worst_bc = 0.0, 0.0
    for r in roots:
        for u, du in iv.eigenfunctions(spec, r):
            if j >= args.k:
                break
            worst_bc = max(worst_bc, float(np.abs(iv.boundary_residual(spec, u, du)).max()))
            ref = float(fem[j]) if fem is not None and j < fem.size else ""
            margin = (ref - r.lam) if ref != "" else ""
            rep.add("eigenvalue", r.lam, k=j, reference=ref, ref_label="fem", margin=margin,
                    note=f"{r.branch} {r.mode}".strip())
            j += 1
        worst_res = max(worst_res, r.residual)
    rep.check("secular_residual", worst_res <= 1e-12, worst_res, reference=1e-12,
              ref_label="bound", margin=1e-12 - worst_res)
    rep.check("boundary_condition_residual", worst_bc <= 1e-10, worst_bc, reference=1e-10,
              ref_label="bound", margin=1e-10 - worst_bc)
    if args.kind == "robin" and args.q != 0:
        table = iv.robin_chain(abs(args.q), args.k)
        gaps = np.diff(table, axis=0)
        rep.check("robin_chain", bool(np.all(gaps >= 0)), float(gaps.min()),
                  margin=float(gaps.min()), note="-|q| <= neumann <= |q| <= dirichlet")
    if args.kind == "krein":
        D = iv.dtn_interval()
        rep.tables["dtn"] = D
        ref = gm.discrete_laplacian(gm.single_edge(1.0))
        rep.check("dtn_equals_edge_laplacian", bool(np.array_equal(D, ref)),
                  float(np.abs(D - ref).max()))
    return rep


def cmd_wentzell(args):
    params = wz.WentzellParams(eta2=args.eta2, eta1=args.eta1)
    rep = RunReport("wentzell", {"eta2": args.eta2, "eta1": args.eta1, "mesh": args.mesh,
                                 "k": args.k, "extension": args.extension})
    res = wz.wentzell_compare(params, args.mesh, args.k, rel_tol=_tol(args))
    first = res.krein if args.extension == "krein" else res.friedrichs
    other = res.friedrichs if args.extension == "krein" else res.krein
    rep.add("kernel_dim", res.kernel_dim if args.extension == "krein" else 0)
    for j in range(args.k):
        rep.add("eigenvalue", first[j], k=j, reference=other[j],
                ref_label="friedrichs" if args.extension == "krein" else "krein")
    for j, lam in enumerate(res.reduced):
        rep.add("reduced_krein", lam, k=j)
    for c in res.checks:
        rep.check(c.name, c.ok, c.min_margin, margin=c.min_margin)
    for eps in args.eps or [1e-3, 1e-2]:
        lam = wz.wentzell_minimality_probe(params, args.mesh, eps)
        rep.check("minimality_probe", lam < 0, lam, k=eps, margin=-lam)
    return rep


def cmd_compare(args):
    g = _graph(args)
    mg = qg.MetricGraph(g, args.mesh)
    rep = RunReport("compare", {**_graph_inputs(args, g), "k": args.k})
    lam_k = gm.discrete_laplacian(g, "conductance")
    spectra = {}
    for name, s in (("krein", 1.0), ("half_krein", 0.5), ("kirchhoff", 0.0)):
        vc = qg.VertexCondition.custom(g, s * lam_k)
        K, M = qg.assemble(mg, vc).restricted()
        spectra[name] = gen_sym_eig(K, M, vectors=False).values[: args.k]
    scale = max(1.0, float(np.abs(spectra["kirchhoff"]).max()))
    for j in range(args.k):
        a, b, c = spectra["krein"][j], spectra["half_krein"][j], spectra["kirchhoff"][j]
        margin = min(b - a, c - b)
        rep.check("ordering", margin >= -1e-9 * scale, b, k=j, margin=margin,
                  note=f"krein {a:.10g} <= half {b:.10g} <= kirchhoff {c:.10g}")
    Q = np.eye(g.n_vertices)
    for eps in args.eps or [1e-3, 1e-2]:
        lam = qg.positivity_threshold_probe(mg, Q, eps)
        rep.check("minimality_probe", lam < 0, lam, k=eps, margin=-lam)
    return rep


# ------------------------------------------------------------------- parser

def _common(p, mesh=True, k=None):
    p.add_argument("--format", choices=tuple(RENDERERS), default="text")
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--tol", type=float, default=None,
                   help="relative kernel threshold (overrides KVN_KERNEL_TOL)")
    p.add_argument("--timestamp", action="store_true", help="record the run time in provenance")
    if mesh:
        p.add_argument("--mesh", type=int, default=qg.DEFAULT_MESH, help="cells per edge")
    if k is not None:
        p.add_argument("-k", type=int, default=k, help="number of eigenvalues")


def _graph_arg(p):
    p.add_argument("--input", help="graph JSON file (default: one unit edge)")


def build_parser():
    parser = argparse.ArgumentParser(prog="kvn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kvn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="incidence, Laplacians, degrees and spectrum of a graph")
    _graph_arg(p)
    _common(p, mesh=False)
    p.set_defaults(func=cmd_graph)

    pq = sub.add_parser("qg", help="quantum graph experiments")
    qsub = pq.add_subparsers(dest="qg_command", required=True)
    for name, func, k in (("spectrum", cmd_qg_spectrum, 6), ("kernel", cmd_qg_kernel, None),
                          ("semigroup", cmd_qg_semigroup, None), ("probe", cmd_qg_probe, None)):
        q = qsub.add_parser(name)
        _graph_arg(q)
        _common(q, k=k)
        if name != "probe":
            q.add_argument("--extension", default="friedrichs",
                           help="friedrichs | krein | lambda:<file>")
        q.set_defaults(func=func)
        if name == "spectrum":
            q.add_argument("--lumped", action="store_true", help="use the lumped mass matrix")
            q.add_argument("--no-order", dest="order", action="store_false",
                           help="skip the refinement order estimate")
        if name == "semigroup":
            q.add_argument("--t", type=_floats, default=None, help="times, e.g. '0.1,0.5,1'")
            q.add_argument("--check-tol", type=float, default=sg.DEFAULT_TOL)
        if name == "probe":
            q.add_argument("--eps", type=_floats, default=None)
            q.add_argument("--seed", type=int, default=None,
                           help="use a random SPD direction from this seed")

    p = sub.add_parser("interval", help="exact spectra on (0, 1)")
    p.add_argument("--kind", choices=iv.KINDS, required=True)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--dirichlet-end", type=int, choices=(0, 1), action="append")
    _common(p, mesh=False, k=5)
    p.add_argument("--mesh", type=int, default=None, help="also solve the P1 model on this mesh")
    p.set_defaults(func=cmd_interval)

    p = sub.add_parser("wentzell", help="bulk-boundary operators with damped dynamic boundary")
    p.add_argument("--eta2", type=float, default=1.0)
    p.add_argument("--eta1", type=float, default=0.0)
    p.add_argument("--extension", choices=("krein", "friedrichs"), default="krein")
    p.add_argument("--eps", type=_floats, default=None)
    _common(p, k=5)
    p.set_defaults(func=cmd_wentzell)

    p = sub.add_parser("compare", help="eigenvalue ordering across vertex conditions")
    _graph_arg(p)
    p.add_argument("--eps", type=_floats, default=None)
    _common(p, k=8)
    p.set_defaults(func=cmd_compare)
    return parser


def _provenance(args):
    prov = {"tool": "kvn", "version": __version__}
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        stamp = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    elif getattr(args, "timestamp", False):
        stamp = datetime.now(tz=timezone.utc).replace(microsecond=0)
    else:
        return prov
    prov["timestamp"] = stamp.isoformat()
    return prov


def run(argv=None):
    """Parse, execute and render; returns ``(exit_code, text)``."""
    args = build_parser().parse_args(argv)
    try:
        rep = args.func(args)
    except TolTooCoarse as exc:
        return EXIT_TOL, f"kvn: {exc}\nhint: pass --tol or set KVN_KERNEL_TOL\n"
    except SolverError as exc:
        return EXIT_SOLVER, f"kvn: solver error: {exc}\n"
    except (ValidationError, ParseError, ValueError) as exc:
        return EXIT_INPUT, f"kvn: invalid input: {exc}\n"
    rep.provenance = _provenance(args)
    text = RENDERERS[args.format](rep)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            return EXIT_INPUT, f"kvn: cannot write {args.out}: {exc}\n"
        text = ""
    return (EXIT_OK if rep.ok else EXIT_FAIL), text


def main(argv=None):
    code, text = run(argv)
    stream = sys.stdout if code in (EXIT_OK, EXIT_FAIL) else sys.stderr
    stream.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Degeneration graphs: DOT output, the verified preorder, rigidity.

Nodes of the preorder are plain algebras, whole families ``F(*)`` and
family instances ``F(v)``.  A witness whose source depends on the family
parameter (or on t) starts at ``F(*)``; one whose target depends on it ends
at ``F(*)``.  Every instance sits below its family.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import catalog
from .degeneration import load_witnesses, scaling_witness, verify_witness
from .invariants import derivation_dim
from .parsing import evaluate_text

__all__ = [
    "VARIETIES",
    "Variety",
    "node_of",
    "Preorder",
    "build_preorder",
    "maximal_elements",
    "to_dot",
    "parse_dot",
    "DotError",
    "figure_levels",
    "rigidity_report",
]


@dataclass(frozen=True)
class Variety:
    name: str
    dim: int
    figure: str
    groups: tuple
    zero: str
    rigid: frozenset  # expected maximal elements


VARIETIES = {
    "nilpotent3": Variety("nilpotent3", 3, "A2", ("tableA3",), "ZERO3", frozenset({"N2"})),
    "commutative4": Variety("commutative4", 4, "B2", ("tableB3", "tableB4"), "ZERO4", frozenset({"C19(*)"})),
    "anticommutative5": Variety("anticommutative5", 5, "anticommutative",
                                ("anticommutative", "anticommutative-extra"), "ZERO5", frozenset({"A11"})),
}
_BY_FIGURE = {v.figure: v for v in VARIETIES.values()}
_CONST = re.compile(r"^[-+*/^()\s0-9i]+$")


def node_of(ident: str, arg: str | None) -> str:
    """Preorder node of a witness endpoint."""
    if arg is None:
        return ident if not catalog.entry(ident).is_family else f"{ident}(*)"
    if _CONST.match(arg):
        return f"{ident}({evaluate_text(arg, {})})"
    return f"{ident}(*)"


def _family(node: str):
    m = re.fullmatch(r"(\w+)\((.+)\)", node)
    return (m.group(1), m.group(2)) if m else (node, None)


@dataclass
class Preorder:
    nodes: set = field(default_factory=set)
    edges: dict = field(default_factory=dict)  # (u, v) -> evidence

    def add(self, u, v, why):
        self.nodes |= {u, v}
        self.edges.setdefault((u, v), why)

    def successors(self, u):
        return [v for (a, v) in self.edges if a == u]

    def reach(self, u):
        seen, todo = {u}, [u]
        while todo:
            x = todo.pop()
            for y in self.successors(x):
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return seen

    def closure(self):
        return {u: self.reach(u) for u in sorted(self.nodes)}


def build_preorder(variety: Variety, reports=None, dps: int = 50):
    """Preorder generated by verified witnesses of one variety.

    ``reports`` maps witness id to an already computed Report; missing rows
    are verified here.  Returns (preorder, list of failed rows).
    """
    po = Preorder()
    failed = []
    for ent in catalog.entries(variety.dim):
        po.nodes.add(f"{ent.id}(*)" if ent.is_family else ent.id)
    for group in variety.groups:
        for w in load_witnesses(group):
            rep = (reports or {}).get(w.id) or verify_witness(w, dps)
            if rep.verdict != "pass":
                failed.append(w.id)
                continue
            po.add(node_of(w.source, w.source_arg), node_of(w.target, w.target_arg), w.id)
    for node in sorted(po.nodes):
        ident, arg = _family(node)
        if arg is not None and arg != "*":
            po.add(f"{ident}(*)", node, "instance of the family")
    for node in sorted(po.nodes):
        if node == variety.zero:
            continue
        ident, arg = _family(node)
        value = None
        if arg == "*":
            value = catalog.samples(ident)[-1]
        elif arg is not None:
            value = evaluate_text(arg, {})
        res = scaling_witness(catalog.get(ident, value), label=node)
        if res.verdict == "pass":
            po.add(node, variety.zero, "scaling E = t*I")
        else:
            failed.append(f"{node} -> {variety.zero}")
    return po, failed


def maximal_elements(po: Preorder):
    """Nodes x such that y >= x implies x >= y."""
    clo = po.closure()
    out = []
    for x in sorted(po.nodes):
        if not any(x in clo[y] and y not in clo[x] for y in po.nodes):
            out.append(x)
    return out


# DOT output ----------------------------------------------------------------------


def _level(ident, n):
    ent = catalog.entry(ident)
    der = ent.printed_der if ent.printed_der is not None else derivation_dim(catalog.get(ident, catalog.samples(ident)[-1]
                                                                    if ent.is_family else None))
    return n * n - der


def figure_levels(figure: str):
    """{node id: level} for every algebra of the figure's variety, level = n^2 - dim Der.

    Levels use the printed dimensions so that the rows match the drawn figures.
    """
    v = _variety_for(figure)
    return {e.id: _level(e.id, v.dim) for e in catalog.entries(v.dim)}


def _variety_for(figure):
    try:
        return _BY_FIGURE[figure]
    except KeyError:
        raise KeyError(f"unknown figure {figure!r}; expected one of {sorted(_BY_FIGURE)}") from None


def _quote(s):
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(figure: str, rigid=None) -> str:
    """Graphviz digraph of a printed degeneration graph.

    Nodes sit on rank rows by level n^2 - dim Der, edges carry the parameter
    constraints, rigid algebras get a double border.
    """
    v = _variety_for(figure)
    rigid = {_family(r)[0] for r in (v.rigid if rigid is None else rigid)}
    levels = figure_levels(figure)
    lines = [f"digraph {_quote(figure)} {{", "  rankdir=TB;", "  node [shape=box, fontname=\"Helvetica\"];"]
    ordered = sorted(set(levels.values()), reverse=True)
    for lvl in ordered:
        members = sorted(k for k, x in levels.items() if x == lvl)
        lines.append(f"  subgraph {_quote(f'level_{lvl}')} {{")
        lines.append("    rank=same;")
        lines.append(f"    {_quote(f'L{lvl}')} [shape=plaintext, label={_quote(lvl)}];")
        for ident in members:
            ent = catalog.entry(ident)
            label = f"{ident}({ent.param})" if ent.is_family else ident
            attrs = [f"label={_quote(label)}"]
            if ident in rigid:
                attrs += ["peripheries=2", "style=bold", f"xlabel={_quote('rigid')}"]
            lines.append(f"    {_quote(ident)} [{', '.join(attrs)}];")
        lines.append("  }")
    if len(ordered) > 1:
        chain = " -> ".join(_quote(f"L{x}") for x in ordered)
        lines.append(f"  {chain} [style=invis];")
    for e in catalog.edges(figure):
        attr = f" [label={_quote(e.label)}]" if e.label else ""
        lines.append(f"  {_quote(e.source)} -> {_quote(e.target)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# minimal DOT grammar checker --------------------------------------------------------


class DotError(ValueError):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/|\#[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<id>[A-Za-z_\x80-￿][A-Za-z_0-9\x80-￿]*|-?(?:\.[0-9]+|[0-9]+(?:\.[0-9]*)?))
  | (?P<edgeop>->|--)
  | (?P<punct>[{}\[\];,=:])
""", re.VERBOSE | re.DOTALL)
_KEYWORDS = {"strict", "graph", "digraph", "node", "edge", "subgraph"}


def _tokens(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DotError(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        val = m.group()
        if kind == "string":
            val = re.sub(r"\\(.)", r"\1", val[1:-1])
            kind = "id"
        elif kind == "id" and val.lower() in _KEYWORDS:
            kind = val.lower()
        out.append((kind, val))
    return out


class _DotParser:
    """Recursive descent over the Graphviz grammar (ports omitted)."""

    def __init__(self, text):
        self.toks = _tokens(text)
        self.i = 0
        self.nodes = {}
        self.edges = []
        self.directed = False

    def peek(self, k=0):
        return self.toks[self.i + k][0] if self.i + k < len(self.toks) else None

    def take(self, kind, val=None):
        if self.peek() != kind or (val is not None and self.toks[self.i][1] != val):
            got = self.toks[self.i][1] if self.i < len(self.toks) else "end of input"
            raise DotError(f"expected {val or kind}, got {got!r}")
        self.i += 1
        return self.toks[self.i - 1][1]

    def graph(self):
        if self.peek() == "strict":
            self.take("strict")
        if self.peek() == "digraph":
            self.take("digraph")
            self.directed = True
        else:
            self.take("graph")
        name = self.take("id") if self.peek() == "id" else None
        self.take("punct", "{")
        self.stmt_list()
        self.take("punct", "}")
        if self.i != len(self.toks):
            raise DotError("trailing input after the graph")
        return name

    def stmt_list(self):
        while not (self.peek() == "punct" and self.toks[self.i][1] == "}"):
            if self.peek() is None:
                raise DotError("unterminated statement list")
            self.stmt()
            if self.peek() == "punct" and self.toks[self.i][1] == ";":
                self.take("punct", ";")

    def attr_list(self):
        attrs = {}
        while self.peek() == "punct" and self.toks[self.i][1] == "[":
            self.take("punct", "[")
            while not (self.peek() == "punct" and self.toks[self.i][1] == "]"):
                key = self.take("id")
                self.take("punct", "=")
                attrs[key] = self.take("id")
                if self.peek() == "punct" and self.toks[self.i][1] in ",;":
                    self.i += 1
            self.take("punct", "]")
        return attrs

    def endpoint(self):
        if self.peek() in ("subgraph",) or (self.peek() == "punct" and self.toks[self.i][1] == "{"):
            return self.subgraph()
        name = self.take("id")
        self.nodes.setdefault(name, {})
        return [name]

    def subgraph(self):
        before = set(self.nodes)
        if self.peek() == "subgraph":
            self.take("subgraph")
            if self.peek() == "id":
                self.take("id")
        self.take("punct", "{")
        self.stmt_list()
        self.take("punct", "}")
        return [n for n in self.nodes if n not in before]

    def stmt(self):
        kind = self.peek()
        if kind in ("graph", "node", "edge"):
            self.i += 1
            self.attr_list()
            return
        if kind == "id" and self.peek(1) == "punct" and self.toks[self.i + 1][1] == "=":
            self.take("id")
            self.take("punct", "=")
            self.take("id")
            return
        left = self.endpoint()
        chain = [left]
        while self.peek() == "edgeop":
            op = self.take("edgeop")
            if (op == "->") != self.directed:
                raise DotError(f"edge operator {op} in a {'di' if self.directed else ''}graph")
            chain.append(self.endpoint())
        attrs = self.attr_list()
        if len(chain) == 1:
            if len(left) == 1 and kind == "id":
                self.nodes[left[0]].update(attrs)
            return
        for a, b in zip(chain, chain[1:]):
            for u in a:
                for w in b:
                    self.edges.append((u, w, attrs))


def parse_dot(text: str):
    """Check DOT syntax; returns {"name", "directed", "nodes": {id: attrs}, "edges": [(u, v, attrs)]}."""
    p = _DotParser(text)
    name = p.graph()
    return {"name": name, "directed": p.directed, "nodes": p.nodes, "edges": p.edges}


# rigidity ---------------------------------------------------------------------------


@dataclass
class RigidityResult:
    variety: str
    maximal: list
    expected: list
    undominated: list  # nodes not below any maximal element
    failed_rows: list

    @property
    def ok(self):
        return sorted(self.maximal) == sorted(self.expected) and not self.undominated and not self.failed_rows


def rigidity_report(reports=None, dps: int = 50):
    """Maximal elements of each verified preorder against the expected rigid/generic ones."""
    out = []
    for v in VARIETIES.values():
        po, failed = build_preorder(v, reports, dps)
        maxi = maximal_elements(po)
        covered = set()
        for m in maxi:
            covered |= po.reach(m)
        out.append(RigidityResult(v.name, maxi, sorted(v.rigid), sorted(po.nodes - covered), failed))
    return out


def format_rigidity(results) -> str:
    lines = []
    for r in results:
        status = "ok" if r.ok else "MISMATCH"
        lines.append(f"{r.variety}: maximal {', '.join(r.maximal)}; expected {', '.join(r.expected)} [{status}]")
        if r.undominated:
            lines.append(f"  not dominated: {', '.join(r.undominated)}")
        if r.failed_rows:
            lines.append(f"  failed rows: {', '.join(r.failed_rows)}")
    return "\n".join(lines) + "\n"


def unsupported_edges(figure: str, po: Preorder):
    """Figure edges with no path of verified witnesses between the endpoints.

    Family endpoints are matched coarsely: a path may start at the family node
    and end at any node of the target family.
    """
    missing = []
    for e in catalog.edges(figure):
        src = f"{e.source}(*)" if catalog.entry(e.source).is_family else e.source
        reached = po.reach(src) - {src}
        if not any(_family(r)[0] == e.target for r in reached):
            missing.append(e)
    return missing


# consistency ------------------------------------------------------------------------

REMARK_PAIRS = (("C09", "C26"), ("C26", "C08"))


def _concrete(name: str) -> str:
    """Sample label of an algebra; parametric indices collapse to the family node."""
    ident, arg = _family(name)
    if arg is None or _CONST.match(arg):
        return name
    return f"{ident}(*)"


def concrete_graph(reports) -> Preorder:
    """Edges between concrete algebras from every passing witness sample."""
    po = Preorder()
    for rep in reports:
        for s in rep.samples:
            if s.verdict == "pass" and s.source is not None:
                po.add(_concrete(s.source.name), _concrete(s.target.name), rep.id)
    return po


def _cert_pair(report_id: str):
    src, _, tgt = report_id.partition(" -/-> ")
    return src.strip(), tgt.strip()


@dataclass
class ConsistencyResult:
    conflicts: list  # (source, target, certificate row)
    remarks: list  # (pair, witness-free, derivation or None)

    @property
    def ok(self):
        return not self.conflicts and all(free and how for _, free, how in self.remarks)


def consistency(witness_reports, cert_reports) -> ConsistencyResult:
    """No certified pair may be joined by verified witnesses; remark pairs must be derivable.

    A -/-> B is derived when some X has a verified path X -> A and a
    passing certificate X -/-> B.
    """
    po = concrete_graph(witness_reports)
    certified = {}
    for r in cert_reports:
        if r.verdict == "pass":
            certified.setdefault(_cert_pair(r.id), r.details.get("row", r.id))
    conflicts = []
    for (s, t), row in sorted(certified.items()):
        if s in po.nodes and t in po.reach(s) - {s}:
            conflicts.append((s, t, row))
    remarks = []
    for a, b in REMARK_PAIRS:
        free = a not in po.nodes or b not in po.reach(a)
        how = None
        for (x, y), row in sorted(certified.items()):
            if y == b and x in po.nodes and a in po.reach(x):
                how = f"{x} -> {a} verified, {x} -/-> {b} certified ({row})"
                break
        remarks.append(((a, b), free, how))
    return ConsistencyResult(conflicts, remarks)

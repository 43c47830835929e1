"""Machine-readable classification data: algebras, parameters, graph edges.

Data files live in ``nilalg/data`` and share one block syntax::

    [ID]
    key: value
    key: value
    <body lines>

Keys may repeat.  ``#`` starts a comment.  ``checksums.sha256`` pins the
content of every data file.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .algebra import Algebra, parse_algebra
from .parsing import evaluate_text
from .scalar import GaussRat, ParamRat, TExpr

__all__ = [
    "Block",
    "CatalogEntry",
    "GraphEdge",
    "DomainError",
    "read_blocks",
    "data_text",
    "entries",
    "entry",
    "get",
    "build",
    "base",
    "samples",
    "in_domain",
    "edges",
    "FIGURES",
    "verify_checksums",
    "write_checksums",
    "set_data_dir",
    "data_dir",
]

DEFAULT_SAMPLES = ("0", "1", "-1", "2", "i", "1/2")
CATALOG_FILES = ("nilpotent3.alg", "commutative4.alg", "anticommutative5.alg")
FIGURES = {"A2": "figureA2.edges", "B2": "figureB2.edges", "anticommutative": "anticommutative5.edges"}
CHECKSUM_FILE = "checksums.sha256"


class DomainError(ValueError):
    """A family parameter outside the family's domain."""


@dataclass
class Block:
    title: str
    meta: list = field(default_factory=list)
    body: list = field(default_factory=list)
    line: int = 0

    def get(self, key, default=None):
        for k, v in self.meta:
            if k == key:
                return v
        return default

    def get_all(self, key):
        return [v for k, v in self.meta if k == key]


_KEY = re.compile(r"^([a-z][a-z0-9_-]*)\s*:\s*(.*)$")


def read_blocks(text: str):
    blocks, cur = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = re.fullmatch(r"\s*\[(.+)\]\s*", line)
        if m:
            cur = Block(m.group(1).strip(), line=lineno)
            blocks.append(cur)
            continue
        if cur is None:
            raise ValueError(f"line {lineno}: content before the first block")
        km = _KEY.match(line.strip())
        if km and not cur.body:
            cur.meta.append((km.group(1), km.group(2).strip()))
        else:
            cur.body.append(line.strip())
    return blocks


_DATA_DIR = None
_CACHES = []


def register_cache(fn):
    """Register an lru_cache'd loader to be cleared when the data directory changes."""
    _CACHES.append(fn)
    return fn


def set_data_dir(path=None):
    """Read data files from ``path`` instead of the packaged copy (None restores it)."""
    global _DATA_DIR
    _DATA_DIR = None if path is None else Path(path)
    for fn in _CACHES:
        fn.cache_clear()


def data_dir():
    return _DATA_DIR if _DATA_DIR is not None else resources.files("nilalg") / "data"


_data_dir = data_dir


def data_text(name: str) -> str:
    return (_data_dir() / name).read_text(encoding="utf-8")


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    dim: int
    flavor: str
    param: str | None
    domain: str | None
    der: int | None
    printed_der: int | None
    table: str
    label: str | None
    extra_samples: tuple
    source_file: str

    @property
    def is_family(self) -> bool:
        return self.param is not None

    def display(self) -> str:
        return self.label or self.id


@register_cache
@lru_cache(maxsize=None)
def _load(name: str):
    out = {}
    for blk in read_blocks(data_text(name)):
        text = "\n".join(blk.body)
        header = re.match(r"dim\s+(\d+)\s*;\s*(\w+)", text)
        if header is None:
            raise ValueError(f"{name}:{blk.line}: block {blk.title} lacks an algebra header")
        printed = blk.get("der")
        der = blk.get("corrected-der", printed)
        extra = tuple(s.strip() for s in (blk.get("samples") or "").split(",") if s.strip())
        entry = CatalogEntry(
            id=blk.title,
            dim=int(header.group(1)),
            flavor=header.group(2),
            param=blk.get("param"),
            domain=blk.get("domain"),
            der=int(der) if der is not None else None,
            printed_der=int(printed) if printed is not None else None,
            table=name,
            label=blk.get("label"),
            extra_samples=extra,
            source_file=name,
        )
        if entry.id in out:
            raise ValueError(f"{name}: duplicate id {entry.id}")
        out[entry.id] = (entry, text)
    return out


def entries(dim: int | None = None):
    """All classification entries (optionally of one dimension), in file order."""
    out = []
    for name in CATALOG_FILES:
        for entry, _ in _load(name).values():
            if dim is None or entry.dim == dim:
                out.append(entry)
    return out


def _lookup(ident: str):
    for name in CATALOG_FILES:
        table = _load(name)
        if ident in table:
            return table[ident]
    raise KeyError(f"unknown catalog id {ident!r}")


def entry(ident: str) -> CatalogEntry:
    return _lookup(ident)[0]


def in_domain(domain: str | None, alpha) -> bool:
    """Membership of a concrete value in a parameter domain (``C`` or ``C>=0``)."""
    if domain in (None, "C"):
        return True
    if domain == "C>=0":
        alpha = GaussRat.coerce(alpha)
        return alpha.re > 0 or (alpha.re == 0 and alpha.im >= 0)
    raise ValueError(f"unknown domain {domain!r}")


def build(ident: str, alpha=None) -> Algebra:
    """Structure constants for any parameter value, ignoring the domain.

    ``alpha`` may be a Gaussian rational, a ParamRat (symbolic family) or a
    TExpr (parametric index).
    """
    ent, text = _lookup(ident)
    params = {}
    if ent.param:
        if alpha is None:
            raise ValueError(f"{ident} needs a value for its parameter {ent.param}")
        params[ent.param] = _coerce_param(alpha)
    elif alpha is not None:
        raise ValueError(f"{ident} takes no parameter")
    name = ident if alpha is None else f"{ident}({alpha})"
    return parse_algebra(text, params, name)


def _coerce_param(alpha):
    if isinstance(alpha, (GaussRat, ParamRat, TExpr)):
        return alpha
    if isinstance(alpha, str):
        return evaluate_text(alpha, {"t": TExpr.t()})
    return GaussRat.coerce(alpha)


def get(ident: str, params=None) -> Algebra:
    """Catalog algebra; concrete parameters must lie in the family domain.

    ``params`` is a value for the family parameter, or a dict {name: value}.
    """
    ent = entry(ident)
    alpha = params
    if isinstance(params, dict):
        if ent.param is None:
            if params:
                raise ValueError(f"{ident} takes no parameter")
            alpha = None
        else:
            alpha = params.get(ent.param)
    if ent.param and alpha is not None:
        alpha = _coerce_param(alpha)
        if isinstance(alpha, GaussRat) and not in_domain(ent.domain, alpha):
            raise DomainError(f"{ident}: parameter {alpha} outside domain {ent.domain}")
    return build(ident, alpha)


def samples(ident: str):
    """Default sample values of a family, filtered by its domain."""
    ent = entry(ident)
    if not ent.param:
        return []
    seen, out = set(), []
    for s in DEFAULT_SAMPLES + ent.extra_samples:
        v = evaluate_text(s, {})
        if v in seen or not in_domain(ent.domain, v):
            continue
        seen.add(v)
        out.append(v)
    return out


@register_cache
@lru_cache(maxsize=None)
def _bases():
    out = {}
    for blk in read_blocks(data_text("bases.alg")):
        out[blk.title] = parse_algebra("\n".join(blk.body), name=blk.title)
    return out


def base(ident: str) -> Algebra:
    """Base algebra used for central extensions (3-dim commutative, 4-dim anticommutative)."""
    try:
        return _bases()[ident]
    except KeyError:
        raise KeyError(f"unknown base algebra {ident!r}") from None


# graph edges -------------------------------------------------------------


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    label: str = ""

    def __str__(self):
        return f"{self.source} -> {self.target}" + (f" [{self.label}]" if self.label else "")


def edges(figure: str):
    """Edges of a printed degeneration graph, in file order, without duplicates."""
    if figure not in FIGURES:
        raise KeyError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}")
    out, seen = [], set()
    for lineno, raw in enumerate(data_text(FIGURES[figure]).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"(\w+)\s*->\s*(\w+)\s*(?:\|\s*(.+))?", line)
        if m is None:
            raise ValueError(f"{FIGURES[figure]}:{lineno}: bad edge {line!r}")
        e = GraphEdge(m.group(1), m.group(2), (m.group(3) or "").strip())
        for ident in (e.source, e.target):
            entry(ident)
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


# checksums ------------------------------------------------------------------


def _data_files():
    return sorted(p.name for p in _data_dir().iterdir()
                  if p.is_file() and p.name != CHECKSUM_FILE and not p.name.startswith("."))


def _digest(name):
    return hashlib.sha256((_data_dir() / name).read_bytes()).hexdigest()


def write_checksums(path=None):
    lines = [f"{_digest(n)}  {n}" for n in _data_files()]
    target = path or (_data_dir() / CHECKSUM_FILE)
    with open(target, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def verify_checksums():
    """Names of data files whose content differs from the pinned digest."""
    pinned = {}
    for line in data_text(CHECKSUM_FILE).splitlines():
        if line.strip():
            digest, name = line.split()
            pinned[name] = digest
    bad = [n for n in _data_files() if pinned.get(n) != _digest(n)]
    bad += [n for n in pinned if n not in _data_files()]
    return sorted(set(bad))


"""Line-oriented text formats: HSMODEL, HSSOL and HSEMB.

Sets are written ``{a,b}`` with atoms in the model's declaration order; group
elements are sets of blocks, ``{{a,b},{a,c}}``, and ``{}`` is zero.
"""

from __future__ import annotations

import hashlib
import re
from pathlib import Path
from typing import Iterable, Optional

from .morphisms import Embedding
from .solutions import Solution
from .structure import (
    ATOM_RE,
    GSTAR,
    G_SORT,
    HSTAR,
    H_SORT,
    I_SORT,
    K_SORT,
    CompTuple,
    Element,
    Model,
    StalkPoint,
    validate_model,
)


class FormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_BLOCK = re.compile(r"\{([^{}]*)\}")


def fmt_block(m: Model, u: Iterable) -> str:
    return "{" + ",".join(m.sorted_atoms(u)) + "}"


def fmt_group(m: Model, g: Iterable) -> str:
    return "{" + ",".join(fmt_block(m, u) for u in m.sort_blocks(g)) + "}"


def _parse_set(text: str, lineno: int) -> frozenset:
    mt = _BLOCK.fullmatch(text.strip())
    if not mt:
        raise FormatError(lineno, f"expected a set like {{a,b}}, got {text!r}")
    body = mt.group(1).strip()
    if not body:
        return frozenset()
    items = [x.strip() for x in body.split(",")]
    if any(not ATOM_RE.match(x) for x in items):
        raise FormatError(lineno, f"bad atom in {text!r}")
    if len(set(items)) != len(items):
        raise FormatError(lineno, f"repeated atom in {text!r}")
    return frozenset(items)


def _parse_group(text: str, lineno: int) -> frozenset:
    t = text.strip()
    if not (t.startswith("{") and t.endswith("}")):
        raise FormatError(lineno, f"expected a set of blocks, got {text!r}")
    inner = t[1:-1].strip()
    if not inner:
        return frozenset()
    parts = _BLOCK.findall(inner)
    rebuilt = ",".join("{" + p + "}" for p in parts)
    if rebuilt.replace(" ", "") != inner.replace(" ", ""):
        raise FormatError(lineno, f"malformed set of blocks {text!r}")
    return frozenset(_parse_set("{" + p + "}", lineno) for p in parts)


def _lines(text: str):
    for i, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        yield i, line


def _header(lines, magic: str) -> None:
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise FormatError(1, f"empty document, expected '{magic} 1'") from None
    if line != f"{magic} 1":
        raise FormatError(lineno, f"expected header '{magic} 1'")


def serialize_model(m: Model) -> str:
    out = ["HSMODEL 1", f"N {m.n}", "ATOMS " + " ".join(m.atoms)]
    for t in m.tuples:
        if t in m.twist:
            out.append(f"Q {fmt_block(m, t.v)}|{fmt_block(m, t.w)} 1")
    return "\n".join(out) + "\n"


def parse_model(text: str) -> Model:
    lines = _lines(text)
    _header(lines, "HSMODEL")
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise FormatError(2, "missing 'N <n>' line") from None
    mt = re.fullmatch(r"N\s+(\d+)", line)
    if not mt:
        raise FormatError(lineno, "expected 'N <n>'")
    n = int(mt.group(1))
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise FormatError(3, "missing 'ATOMS' line") from None
    if not (line == "ATOMS" or line.startswith("ATOMS ")):
        raise FormatError(lineno, "expected 'ATOMS a1 a2 ...'")
    atoms = tuple(line.split()[1:])
    twist = set()
    base = Model(atoms, n)
    problems = validate_model(base)
    if problems:
        raise FormatError(lineno, "; ".join(problems))
    for lineno, line in lines:
        mt = re.fullmatch(r"Q\s+(\{[^{}]*\})\|(\{[^{}]*\})\s+([01])", line)
        if not mt:
            raise FormatError(lineno, f"expected 'Q {{v}}|{{w}} <0|1>', got {line!r}")
        v = _parse_set(mt.group(1), lineno)
        w = _parse_set(mt.group(2), lineno)
        if not (len(v) == n and len(w) == n + 1 and v < w and w <= base.atom_set):
            raise FormatError(lineno, "invalid compatible tuple")
        t = CompTuple(v, w)
        if t in twist:
            raise FormatError(lineno, "tuple listed twice")
        if mt.group(3) == "1":
            twist.add(t)
    return Model(atoms, n, frozenset(twist))


def model_ref(m: Model) -> str:
    return "sha256:" + hashlib.sha256(serialize_model(m).encode()).hexdigest()[:16]


def _resolve(ref: str, m: Optional[Model], lineno: int, base_dir: Optional[Path]) -> Model:
    if ref.startswith("sha256:"):
        if m is None:
            raise FormatError(lineno, "model given by hash; pass the model explicitly")
        if model_ref(m) != ref:
            raise FormatError(lineno, "model hash does not match the supplied model")
        return m
    if m is not None:
        return m
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return parse_model(path.read_text())


def serialize_solution(h: Solution, ref: Optional[str] = None) -> str:
    m = h.model
    dom = m.sort_blocks(h.domain)
    out = ["HSSOL 1", f"MODEL {ref or model_ref(m)}"]
    out.append("DOMAIN" + "".join(" " + fmt_block(m, u) for u in dom))
    for u in dom:
        out.append(f"F {fmt_block(m, u)} = {fmt_group(m, h.gamma[u])}")
    for u in dom:
        out.append(f"L {fmt_block(m, u)} = {h.ell[u]}")
    return "\n".join(out) + "\n"


def parse_solution(text: str, model: Optional[Model] = None, base_dir: Optional[Path] = None) -> Solution:
    lines = _lines(text)
    _header(lines, "HSSOL")
    lineno, line = next(lines, (2, ""))
    if not line.startswith("MODEL "):
        raise FormatError(lineno, "expected 'MODEL <path or hash>'")
    m = _resolve(line.split(None, 1)[1], model, lineno, base_dir)
    lineno, line = next(lines, (3, ""))
    if not (line == "DOMAIN" or line.startswith("DOMAIN ")):
        raise FormatError(lineno, "expected 'DOMAIN {..} {..} ...'")
    domain = frozenset(_parse_set("{" + p + "}", lineno) for p in _BLOCK.findall(line[6:]))
    gamma, ell = {}, {}
    for lineno, line in lines:
        mt = re.fullmatch(r"([FL])\s+(\{[^{}]*\})\s*=\s*(.+)", line)
        if not mt:
            raise FormatError(lineno, f"expected 'F <block> = ...' or 'L <block> = <bit>', got {line!r}")
        u = _parse_set(mt.group(2), lineno)
        if u not in domain:
            raise FormatError(lineno, "block outside DOMAIN")
        if mt.group(1) == "F":
            gamma[u] = _parse_group(mt.group(3), lineno)
        else:
            if mt.group(3).strip() not in ("0", "1"):
                raise FormatError(lineno, "L value must be 0 or 1")
            ell[u] = int(mt.group(3))
    return Solution(m, domain, gamma, ell)


def serialize_embedding(f: Embedding, source_ref: Optional[str] = None, target_ref: Optional[str] = None) -> str:
    src, tgt = f.source, f.target
    out = [
        "HSEMB 1",
        f"SOURCE {source_ref or model_ref(src)}",
        f"TARGET {target_ref or model_ref(tgt)}",
        "PI" + "".join(f" {a}->{f.pi[a]}" for a in src.atoms),
    ]
    for u in src.blocks:
        if f.d(u):
            out.append(f"D {fmt_block(src, u)} = {fmt_group(tgt, f.d(u))}")
    for u in src.blocks:
        if f.e(u):
            out.append(f"E {fmt_block(src, u)} = 1")
    return "\n".join(out) + "\n"


def parse_embedding(
    text: str,
    source: Optional[Model] = None,
    target: Optional[Model] = None,
    base_dir: Optional[Path] = None,
) -> Embedding:
    lines = _lines(text)
    _header(lines, "HSEMB")
    lineno, line = next(lines, (2, ""))
    if line.startswith("SOURCE "):
        source = _resolve(line.split(None, 1)[1], source, lineno, base_dir)
        lineno, line = next(lines, (3, ""))
    if line.startswith("TARGET "):
        target = _resolve(line.split(None, 1)[1], target, lineno, base_dir)
        lineno, line = next(lines, (4, ""))
    if source is None or target is None:
        raise FormatError(lineno, "source and target models are required")
    if not (line == "PI" or line.startswith("PI ")):
        raise FormatError(lineno, "expected 'PI a->x ...'")
    pi = {}
    for item in line.split()[1:]:
        if "->" not in item:
            raise FormatError(lineno, f"bad PI entry {item!r}")
        a, b = item.split("->", 1)
        if a in pi:
            raise FormatError(lineno, f"atom {a} mapped twice")
        pi[a] = b
    delta, eps = {}, {}
    for lineno, line in lines:
        mt = re.fullmatch(r"([DE])\s+(\{[^{}]*\})\s*=\s*(.+)", line)
        if not mt:
            raise FormatError(lineno, f"expected 'D <block> = ...' or 'E <block> = <bit>', got {line!r}")
        u = _parse_set(mt.group(2), lineno)
        if mt.group(1) == "D":
            delta[u] = _parse_group(mt.group(3), lineno)
        else:
            if mt.group(3).strip() not in ("0", "1"):
                raise FormatError(lineno, "E value must be 0 or 1")
            eps[u] = int(mt.group(3))
    return Embedding(source, target, pi, delta, eps)


def write_model(path: Path, m: Model) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_model(m))
    return path


def read_model(path) -> Model:
    return parse_model(Path(path).read_text())


def write_amalgam(directory: Path, amalgam, base_name: str = "base") -> Path:
    """Write an amalgam as HSMODEL files for base/sides/result and HSEMB files for f1, f2."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_model(d / f"{base_name}.hsm", amalgam.base)
    write_model(d / "side1.hsm", amalgam.side1)
    write_model(d / "side2.hsm", amalgam.side2)
    write_model(d / "result.hsm", amalgam.result)
    (d / "f1.hsemb").write_text(serialize_embedding(amalgam.f1, "side1.hsm", "result.hsm"))
    (d / "f2.hsemb").write_text(serialize_embedding(amalgam.f2, "side2.hsm", "result.hsm"))
    return d


def read_amalgam(directory: Path):
    from .amalgamation import Amalgam

    d = Path(directory)
    base = read_model(d / "base.hsm")
    side1 = read_model(d / "side1.hsm")
    side2 = read_model(d / "side2.hsm")
    result = read_model(d / "result.hsm")
    f1 = parse_embedding((d / "f1.hsemb").read_text(), side1, result)
    f2 = parse_embedding((d / "f2.hsemb").read_text(), side2, result)
    return Amalgam(base, side1, side2, result, f1, f2)


def parse_element(text: str):
    """Read an element written the way it prints: ``I:a``, ``K:{a,b}``,
    ``G:{{a,b}}``, ``H:1``, ``Gstar:{a,b}+{{a,c}}`` or ``Hstar:{a,b}+1``."""
    sort, sep, body = text.strip().partition(":")
    if not sep:
        raise FormatError(1, f"expected '<sort>:<value>', got {text!r}")
    if sort == I_SORT:
        if not ATOM_RE.match(body):
            raise FormatError(1, f"bad atom {body!r}")
        return Element(I_SORT, body)
    if sort == K_SORT:
        return Element(K_SORT, _parse_set(body, 1))
    if sort == G_SORT:
        return Element(G_SORT, _parse_group(body, 1))
    if sort == H_SORT:
        if body not in ("0", "1"):
            raise FormatError(1, "H value must be 0 or 1")
        return Element(H_SORT, int(body))
    if sort in (GSTAR, HSTAR):
        mt = re.fullmatch(r"(\{[^{}]*\})\+(.+)", body)
        if not mt:
            raise FormatError(1, f"expected '{{block}}+offset', got {body!r}")
        u = _parse_set(mt.group(1), 1)
        if sort == GSTAR:
            return StalkPoint(GSTAR, u, _parse_group(mt.group(2), 1))
        if mt.group(2) not in ("0", "1"):
            raise FormatError(1, "Hstar offset must be 0 or 1")
        return StalkPoint(HSTAR, u, int(mt.group(2)))
    raise FormatError(1, f"unknown sort {sort!r}")

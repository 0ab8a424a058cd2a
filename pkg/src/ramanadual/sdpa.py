"""SDPA sparse format (``.dat-s``) for instances and conic programs.

SDPA's primal is ``min c'x  s.t.  sum_i x_i F_i - F_0 psd``. For an
instance ``(A, B, c)`` of ``sup c'x  s.t.  sum_i x_i A_i <= B`` the files use
``F_0 = -B``, ``F_i = -A_i`` and the negated objective, so SDPA's optimal
value is minus ours. Every file written here states this in its header.

A :class:`~ramanadual.solver.ConicProgram` ``inf c'x  s.t.  A x = b``, ``x in K``
is written in SDPA's dual form ``max <F_0, Y>  s.t.  <F_i, Y> = c_i``:
``F_0`` carries ``-c``, row ``i`` becomes ``F_i`` and ``b`` becomes the SDPA
vector. Psd blocks stay blocks, nonnegatives form one diagonal block, and
free scalars are split as ``u - v`` into a second diagonal block of twice
their number, flagged by a ``ramanadual:free`` comment so they are merged
again on reading.

Every number is written with ``repr``, so reading a written file gives back
the same floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import SdpInstance
from .solver import ConicProgram, coeffs_to_mat, tri_coeffs
from .symmat import diag_concat

__all__ = ["SdpaFile", "SdpaParseError", "read_sdpa", "parse_sdpa", "parse_sdpa_program",
           "write_sdpa", "load_instance", "is_program_file"]

_SIGN_NOTE = ("* sign convention: F0 = -B, Fi = -A_i, SDPA objective = -c; the SDPA optimal value"
              " is minus the value of sup c'x s.t. sum x_i A_i <= B")
_PROGRAM_NOTE = ("* conic program inf c'x s.t. Ax = b, x in K written in SDPA dual form:"
                 " F0 = -C, Fi = row i, SDPA vector = b")
_SPLIT = re.compile(r"[\s,(){}]+")


class SdpaParseError(ValueError):
    """Malformed SDPA text; ``line`` is the 1-based line of the offending token."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class SdpaFile:
    """Raw content of an SDPA sparse file.

    ``blocks[b][k]`` is the matrix ``F_k`` restricted to block ``b`` (dense,
    order ``|block_sizes[b]|``); negative sizes mark diagonal blocks.
    ``markers`` holds the ``* ramanadual:key value`` comments.
    """

    m: int
    block_sizes: tuple[int, ...]
    c: np.ndarray
    blocks: list[np.ndarray]
    markers: dict

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    def matrix(self, k: int) -> np.ndarray:
        """``F_k`` over all blocks, concatenated along the diagonal."""
        return diag_concat(*(blk[k] for blk in self.blocks))


def _lines(text: str):
    """Token lists of the non-comment lines with their line numbers, and the markers."""
    lines, markers = [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith('"') or line.startswith("*"):
            body = line.lstrip('"*').strip()
            if body.startswith("ramanadual:"):
                key, _, val = body[len("ramanadual:"):].partition(" ")
                markers[key.strip()] = val.strip()
            continue
        toks = [t for t in _SPLIT.split(line) if t]
        if toks:
            lines.append((lineno, toks))
    return lines, markers


def _int(tok: str, what: str, line: int) -> int:
    try:
        val = float(tok)
    except ValueError:
        raise SdpaParseError(f"expected integer {what}, got {tok!r}", line) from None
    if not val.is_integer():
        raise SdpaParseError(f"expected integer {what}, got {tok!r}", line)
    return int(val)


def _float(tok: str, what: str, line: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise SdpaParseError(f"non-numeric {what} {tok!r}", line) from None


def read_sdpa(text: str) -> SdpaFile:
    """Parse SDPA sparse text without interpreting it.

    Header lines may carry trailing annotations (``2 =mdim``): only their
    leading numbers are read. Each entry line is ``k block i j value``.

    Raises:
        SdpaParseError: malformed header, non-numeric token or index out of range.
    """
    lines, markers = _lines(text)
    last_line = max(len(text.splitlines()), 1)
    it = iter(lines)

    def header(what: str):
        try:
            return next(it)
        except StopIteration:
            raise SdpaParseError(f"unexpected end of file, expected {what}", last_line) from None

    line, toks = header("number of constraint matrices m")
    m = _int(toks[0], "number of constraint matrices m", line)
    if m < 0:
        raise SdpaParseError(f"m must be nonnegative, got {m}", line)
    line, toks = header("number of blocks")
    nb = _int(toks[0], "number of blocks", line)
    if nb < 1:
        raise SdpaParseError(f"need at least one block, got {nb}", line)
    line, toks = header("block structure")
    if len(toks) < nb:
        raise SdpaParseError(f"block structure lists {len(toks)} sizes, expected {nb}", line)
    sizes = [_int(t, "block size", line) for t in toks[:nb]]
    if 0 in sizes:
        raise SdpaParseError("block size 0", line)
    c = []
    while len(c) < m:
        line, toks = header("objective vector")
        c.extend(_float(t, "objective entry", line) for t in toks[: m - len(c)])
    c = np.array(c, dtype=float)
    blocks = [np.zeros((m + 1, abs(s), abs(s))) for s in sizes]
    seen = set()
    for line, toks in it:
        if len(toks) != 5:
            raise SdpaParseError(f"entry line needs 5 fields (k block i j value), got {len(toks)}", line)
        k = _int(toks[0], "matrix number", line)
        b = _int(toks[1], "block number", line)
        i = _int(toks[2], "row index", line)
        j = _int(toks[3], "column index", line)
        v = _float(toks[4], "entry value", line)
        if not 0 <= k <= m:
            raise SdpaParseError(f"matrix number {k} out of range 0..{m}", line)
        if not 1 <= b <= nb:
            raise SdpaParseError(f"block number {b} out of range 1..{nb}", line)
        size = sizes[b - 1]
        if not (1 <= i <= abs(size) and 1 <= j <= abs(size)):
            raise SdpaParseError(f"index ({i}, {j}) out of range for block {b} of order {abs(size)}", line)
        if size < 0 and i != j:
            raise SdpaParseError(f"off-diagonal entry ({i}, {j}) in diagonal block {b}", line)
        i, j = min(i, j), max(i, j)
        if (k, b, i, j) in seen:
            raise SdpaParseError(f"duplicate entry for F{k}, block {b}, ({i}, {j})", line)
        seen.add((k, b, i, j))
        blocks[b - 1][k, i - 1, j - 1] = v
        blocks[b - 1][k, j - 1, i - 1] = v
    return SdpaFile(m, tuple(sizes), c, blocks, markers)


def parse_sdpa(text: str, name: str | None = None) -> SdpInstance:
    """SDPA text to an instance of ``sup c'x  s.t.  sum x_i A_i <= B``.

    Multi-block files become one instance whose matrices are the block
    diagonal concatenations.
    """
    f = read_sdpa(text)
    if f.m == 0:
        raise SdpaParseError("an instance needs at least one constraint matrix (m = 0)", 1)
    if f.markers.get("kind") == "program":
        raise SdpaParseError("file holds a conic program; use parse_sdpa_program", 1)
    A = tuple(-f.matrix(k) for k in range(1, f.m + 1))
    B = -f.matrix(0)
    nm = name if name is not None else f.markers.get("name", "")
    return SdpInstance(A, B, -f.c, name=nm)


def parse_sdpa_program(text: str, name: str | None = None) -> ConicProgram:
    """SDPA text to a conic program in the layout :func:`write_sdpa` produces.

    Square blocks become psd blocks; a diagonal block is the nonnegative
    part, and the block named by the ``ramanadual:free`` marker is merged
    back into free scalars.
    """
    f = read_sdpa(text)
    free_block = int(f.markers["free"]) - 1 if "free" in f.markers else None
    psd = [b for b, s in enumerate(f.block_sizes) if s > 0]
    diag = [b for b, s in enumerate(f.block_sizes) if s < 0 and b != free_block]
    if psd and diag and min(diag) < max(psd):
        raise SdpaParseError("diagonal blocks must follow the psd blocks", 1)
    if free_block is not None and (free_block >= f.num_blocks or f.block_sizes[free_block] >= 0
                                   or f.block_sizes[free_block] % 2):
        raise SdpaParseError("ramanadual:free marker must name a diagonal block of even size", 1)

    def columns(k: int) -> np.ndarray:
        parts = [tri_coeffs(f.blocks[b][k]) for b in psd]
        parts += [np.diag(f.blocks[b][k]).copy() for b in diag]
        if free_block is not None:
            d = np.diag(f.blocks[free_block][k])
            h = d.size // 2
            if not np.array_equal(d[h:], -d[:h]):
                raise SdpaParseError(f"split free columns of F{k} are not opposite", 1)
            parts.append(d[:h].copy())
        return np.concatenate(parts) if parts else np.zeros(0)

    c = -columns(0)
    A = np.array([columns(k) for k in range(1, f.m + 1)]).reshape(f.m, c.size)
    n_nonneg = sum(-f.block_sizes[b] for b in diag)
    n_free = -f.block_sizes[free_block] // 2 if free_block is not None else 0
    nm = name if name is not None else f.markers.get("name", "")
    return ConicProgram(c=c, A=A, b=f.c.copy(), psd_orders=tuple(f.block_sizes[b] for b in psd),
                        n_nonneg=n_nonneg, n_free=n_free, name=nm)


def _fmt(v: float) -> str:
    return repr(float(v))


def _entries(k: int, b: int, F: np.ndarray, diagonal: bool) -> list[str]:
    out = []
    if diagonal:
        for i in np.flatnonzero(np.diag(F)):
            out.append(f"{k} {b} {i + 1} {i + 1} {_fmt(F[i, i])}")
        return out
    iu, ju = np.triu_indices(F.shape[0])
    for i, j in zip(iu, ju):
        if F[i, j] != 0.0:
            out.append(f"{k} {b} {i + 1} {j + 1} {_fmt(F[i, j])}")
    return out


def _header(m: int, sizes: list[int], vec: np.ndarray, notes: list[str]) -> list[str]:
    return notes + [str(m), str(len(sizes)), " ".join(str(s) for s in sizes),
                    " ".join(_fmt(v) for v in vec)]


def _write_instance(inst: SdpInstance) -> str:
    mats = [inst.B] + list(inst.A)
    diagonal = all(np.count_nonzero(M - np.diag(np.diag(M))) == 0 for M in mats)
    n = inst.n
    notes = [f'"{inst.name or "instance"}: sup c\'x s.t. sum x_i A_i <= B', _SIGN_NOTE]
    if inst.name:
        notes.append(f"* ramanadual:name {inst.name}")
    lines = _header(inst.m, [-n if diagonal else n], -inst.c, notes)
    for k, M in enumerate(mats):
        lines += _entries(k, 1, -M, diagonal)
    return "\n".join(lines) + "\n"


def _write_program(prog: ConicProgram) -> str:
    sizes = list(prog.psd_orders)
    if prog.n_nonneg:
        sizes.append(-prog.n_nonneg)
    notes = [f'"{prog.name or "program"}: conic program', _PROGRAM_NOTE, "* ramanadual:kind program"]
    if prog.name:
        notes.append(f"* ramanadual:name {prog.name}")
    if prog.n_free:
        sizes.append(-2 * prog.n_free)
        notes.append(f"* ramanadual:free {len(sizes)}")
        notes.append("* free scalars are split as u - v over that diagonal block")
    if not sizes:
        raise ValueError("program has no variables")
    lines = _header(prog.num_constraints, sizes, prog.b, notes)
    rows = [-prog.c] + list(prog.A)
    for k, row in enumerate(rows):
        for b, (sl, order) in enumerate(zip(prog.block_slices(), prog.psd_orders), start=1):
            lines += _entries(k, b, coeffs_to_mat(row[sl], order), False)
        b = len(prog.psd_orders)
        if prog.n_nonneg:
            b += 1
            lines += _entries(k, b, np.diag(row[prog.nonneg_slice]), True)
        if prog.n_free:
            b += 1
            f = row[prog.free_slice]
            lines += _entries(k, b, np.diag(np.concatenate([f, -f])), True)
    return "\n".join(lines) + "\n"


def write_sdpa(obj: SdpInstance | ConicProgram) -> str:
    """SDPA sparse text for an instance or a conic program."""
    if isinstance(obj, SdpInstance):
        return _write_instance(obj)
    if isinstance(obj, ConicProgram):
        return _write_program(obj)
    raise TypeError(f"cannot write {type(obj).__name__} as SDPA")


def is_program_file(text: str) -> bool:
    """Whether ``text`` was written from a conic program rather than an instance."""
    return _lines(text)[1].get("kind") == "program"


def load_instance(path) -> SdpInstance:
    """Read an instance from a ``.dat-s`` file, named after the file unless it names itself."""
    p = Path(path)
    text = p.read_text()
    inst = parse_sdpa(text)
    if not inst.name:
        inst = SdpInstance(inst.A, inst.B, inst.c, name=p.stem)
    return inst

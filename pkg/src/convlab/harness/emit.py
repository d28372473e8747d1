"""Sample emission: exact values of a family on a rational grid, as CSV."""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .. import witnesses as W
from ..exactreal import MonomialSum, eval_enclosure
from ..pwfun import Domain, values_on_grid

HEADER = ("n", "x", "value_mid", "value_width")


class IoFailure(OSError):
    pass


def parse_grid(text: str) -> list[Fraction]:
    """``a:b:step`` with rational entries; both ends included when hit."""
    try:
        a, b, step = (Fraction(part.strip()) for part in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise ValueError("grid needs a <= b and step > 0")
    count = int((b - a) / step)
    return [a + i * step for i in range(count + 1)]


def parse_n_list(text: str) -> list[int]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    ns = [int(t) for t in items]
    if any(n < 1 for n in ns):
        raise ValueError("indices must be >= 1")
    return ns


def sample_rows(fam, ns: Sequence[int], xs: Sequence[Fraction], precision: int = 64) -> list[tuple]:
    F = W.build(fam)
    xs = sorted(Fraction(x) for x in xs)
    if F.domain is Domain.UNIT and xs and (xs[0] < 0 or xs[-1] > 1):
        raise ValueError("grid leaves [0, 1]")
    if xs and xs[0] < 0:
        raise ValueError("grid leaves [0, +inf)")
    rows = []
    zero = MonomialSum()
    for n in ns:
        vals = values_on_grid(F(n), xs)
        for i, x in enumerate(xs):
            e = eval_enclosure(vals.get(i, zero), precision)
            rows.append((n, str(x), repr(float(e.mid)), repr(float(e.width))))
    return rows


def emit_samples(fam, ns: Sequence[int], grid: str | Sequence[Fraction], out, precision: int = 64) -> int:
    """Write ``n,x,value_mid,value_width`` rows to ``out``; returns the row count."""
    xs = parse_grid(grid) if isinstance(grid, str) else list(grid)
    rows = sample_rows(fam, ns, xs, precision)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    w.writerows(rows)
    try:
        Path(out).write_text(buf.getvalue())
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc
    return len(rows)

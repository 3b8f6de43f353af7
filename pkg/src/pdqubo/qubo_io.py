"""Plain-text QUBO files.

::

    # comment
    qubo 3
    offset 2
    0 0 -1.5
    0 1 2

Indices are 0-based, ``i <= j`` and ``i == j`` denotes a linear term.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DomainError, ParseError
from .model import QuboModel

__all__ = ["format_decimal", "format_qubo", "parse_qubo", "read_qubo"]


def _terminating(den: int) -> int | None:
    """Decimal places needed for 1/den, or None if the expansion repeats."""
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    return max(twos, fives) if den == 1 else None


def format_decimal(value) -> str:
    """Render a coefficient as a decimal literal.

    Terminating rationals are written exactly (shortest form, no exponent);
    the rest fall back to the shortest round-trip decimal of the float.
    Re-reading and re-writing either form reproduces the same bytes.
    """
    value = Fraction(value)
    places = _terminating(value.denominator)
    if places is None:
        return repr(float(value))
    sign = "-" if value < 0 else ""
    scaled = abs(value.numerator) * 10**places // value.denominator
    if places == 0:
        return f"{sign}{scaled}"
    digits = str(scaled).rjust(places + 1, "0")
    whole, frac = digits[:-places], digits[-places:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def format_qubo(model: QuboModel, header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    lines.append(f"qubo {model.num_vars}")
    if model.offset != 0:
        lines.append(f"offset {format_decimal(model.offset)}")
    terms = [((i, i), c) for i, c in model.linear.items()]
    terms += list(model.quadratic.items())
    for (i, j), c in sorted(terms):
        lines.append(f"{i} {j} {format_decimal(c)}")
    return "\n".join(lines) + "\n"


def _number(token: str, lineno: int, source):
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"invalid coefficient {token!r}", lineno, source) from None


def _index(token: str, lineno: int, source) -> int:
    try:
        i = int(token)
    except ValueError:
        raise ParseError(f"invalid index {token!r}", lineno, source) from None
    if i < 0:
        raise ParseError(f"negative index {i}", lineno, source)
    return i


def parse_qubo(text: str, source: str | None = None) -> QuboModel:
    num_vars = None
    offset = Fraction(0)
    linear: dict[int, Fraction] = {}
    quadratic: dict[tuple[int, int], Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if num_vars is None:
            if len(parts) != 2 or parts[0] != "qubo":
                raise ParseError("expected header 'qubo <num_vars>'", lineno, source)
            num_vars = _index(parts[1], lineno, source)
            continue
        if parts[0] == "offset":
            if len(parts) != 2:
                raise ParseError("expected 'offset <decimal>'", lineno, source)
            offset += _number(parts[1], lineno, source)
            continue
        if len(parts) != 3:
            raise ParseError("expected 'i j coeff'", lineno, source)
        i, j = _index(parts[0], lineno, source), _index(parts[1], lineno, source)
        if i > j:
            raise ParseError(f"term indices must satisfy i <= j, got {i} > {j}", lineno, source)
        if j >= num_vars:
            raise ParseError(f"index {j} out of range for {num_vars} variables", lineno, source)
        c = _number(parts[2], lineno, source)
        if i == j:
            linear[i] = linear.get(i, Fraction(0)) + c
        else:
            quadratic[(i, j)] = quadratic.get((i, j), Fraction(0)) + c
    if num_vars is None:
        raise ParseError("missing 'qubo <num_vars>' header", None, source)
    try:
        return QuboModel(num_vars, linear, quadratic, offset)
    except DomainError as exc:
        raise ParseError(str(exc), None, source) from exc


def read_qubo(path) -> QuboModel:
    with open(path, encoding="utf-8") as fh:
        return parse_qubo(fh.read(), source=str(path))

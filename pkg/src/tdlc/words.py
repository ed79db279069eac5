"""Words in a finite generating set, enumerated in a fixed breadth-first order."""

from __future__ import annotations

import re

from .core import ParseError


def symmetric(model, gens):
    out = []
    for g in gens:
        out.append(g)
        out.append(model.invert(g))
    return out


def words_upto(model, gens, length, include_identity=False, budget=None):
    """Distinct elements given by words of length 1..length, breadth first."""
    sym = symmetric(model, gens)
    ident = model.identity()
    seen = {ident}
    out = [ident] if include_identity else []
    frontier = [ident]
    for _ in range(length):
        nxt = []
        for w in frontier:
            for s in sym:
                if budget is not None:
                    budget.spend()
                x = model.compose(w, s)
                if x in seen:
                    continue
                seen.add(x)
                out.append(x)
                nxt.append(x)
        frontier = nxt
    return out


def words_with_length(model, gens, length):
    """(element, word) pairs; the word is a list of (generator index, +-1)."""
    sym = []
    for i, g in enumerate(gens):
        sym.append((g, (i, 1)))
        sym.append((model.invert(g), (i, -1)))
    ident = model.identity()
    seen = {ident: []}
    frontier = [(ident, [])]
    out = []
    for _ in range(length):
        nxt = []
        for w, word in frontier:
            for s, letter in sym:
                x = model.compose(w, s)
                if x in seen:
                    continue
                seen[x] = word + [letter]
                out.append((x, word + [letter]))
                nxt.append((x, word + [letter]))
        frontier = nxt
    return out


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\^\s*(-?\d+))?\s*\*?")


def parse_word(model, text, names):
    """Parse 'a^2*b^-1 c' over named elements."""
    pos, result = 0, model.identity()
    text = text.strip()
    if text in ("", "id", "1"):
        return result
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot parse word {text!r} at {pos}")
        name, exp = m.group(1), int(m.group(2) or 1)
        if name == "id":
            pos = m.end()
            continue
        if name not in names:
            raise ParseError(f"unknown generator {name!r}")
        result = model.compose(result, model.power(names[name], exp))
        pos = m.end()
    return result

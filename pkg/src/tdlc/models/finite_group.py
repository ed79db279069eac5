"""Finite groups from multiplication tables, with their subgroup lattice."""

from __future__ import annotations

import itertools
from functools import cached_property

from ..core import InvalidParameter


def _perm_group(points, gens):
    """Close a set of permutations (tuples) under composition."""
    elems = {tuple(range(points))}
    frontier = list(elems)
    while frontier:
        nxt = []
        for a in frontier:
            for b in gens:
                c = tuple(a[b[i]] for i in range(points))
                if c not in elems:
                    elems.add(c)
                    nxt.append(c)
        frontier = nxt
    return sorted(elems)


def _table_from_perms(perms):
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms[0])
    return [[index[tuple(a[b[i]] for i in range(n))] for b in perms] for a in perms]


BUILTIN = {
    "C1": (["e"], [[0]]),
    "C2": (["e", "a"], [[0, 1], [1, 0]]),
    "C3": (["e", "a", "b"], [[0, 1, 2], [1, 2, 0], [2, 0, 1]]),
}


def _s3():
    perms = _perm_group(3, [(1, 0, 2), (1, 2, 0)])
    names = {(0, 1, 2): "e", (1, 0, 2): "s", (0, 2, 1): "t", (2, 1, 0): "u",
             (1, 2, 0): "r", (2, 0, 1): "q"}
    return [names[p] for p in perms], _table_from_perms(perms)


BUILTIN["S3"] = _s3()


class FiniteGroup:
    def __init__(self, names, table):
        self._memo = {}
        n = len(table)
        if n == 0:
            raise InvalidParameter("F", "empty alphabet")
        if len(names) != n or any(len(row) != n for row in table):
            raise InvalidParameter("F", "multiplication table is not square")
        if any(not (0 <= x < n) for row in table for x in row):
            raise InvalidParameter("F", "table entries out of range")
        self.order = n
        self.names = list(names)
        self.mul = [list(r) for r in table]
        ident = [e for e in range(n) if all(table[e][x] == x and table[x][e] == x for x in range(n))]
        if ident != [0]:
            raise InvalidParameter("F", "element 0 must be the identity")
        for a, b, c in itertools.product(range(n), repeat=3):
            if table[table[a][b]][c] != table[a][table[b][c]]:
                raise InvalidParameter("F", "table is not associative")
        self.inv = []
        for a in range(n):
            inv = [b for b in range(n) if table[a][b] == 0]
            if len(inv) != 1:
                raise InvalidParameter("F", "table has no inverses")
            self.inv.append(inv[0])

    @classmethod
    def from_spec(cls, spec):
        if isinstance(spec, str):
            if spec not in BUILTIN:
                raise InvalidParameter("F", f"unknown group {spec!r}")
            return cls(*BUILTIN[spec])
        if isinstance(spec, dict) and "table" in spec:
            names = spec.get("names") or [str(i) for i in range(len(spec["table"]))]
            return cls(names, spec["table"])
        raise InvalidParameter("F", "give a builtin name or {names, table}")

    def m(self, a, b):
        return self.mul[a][b]

    def conj(self, a, x):
        return self.mul[self.mul[a][x]][self.inv[a]]

    def generated(self, elems):
        out = {0} | set(elems)
        frontier = list(out)
        while frontier:
            nxt = []
            for a in frontier:
                for b in list(out):
                    for c in (self.mul[a][b], self.mul[b][a]):
                        if c not in out:
                            out.add(c)
                            nxt.append(c)
            frontier = nxt
        return frozenset(out)

    @cached_property
    def subgroups(self):
        """All subgroups, sorted by (size, elements); ids index into this list."""
        found = {frozenset({0})}
        frontier = [frozenset({0})]
        while frontier:
            nxt = []
            for H in frontier:
                for x in range(self.order):
                    if x not in H:
                        K = self.generated(H | {x})
                        if K not in found:
                            found.add(K)
                            nxt.append(K)
            frontier = nxt
        return sorted(found, key=lambda H: (len(H), sorted(H)))

    @cached_property
    def sub_id(self):
        return {H: i for i, H in enumerate(self.subgroups)}

    @property
    def trivial_id(self):
        return 0

    @property
    def full_id(self):
        return len(self.subgroups) - 1

    def sub(self, i):
        return self.subgroups[i]

    def meet(self, i, j):
        key = ("meet", i, j)
        if key not in self._memo:
            self._memo[key] = self.sub_id[self.subgroups[i] & self.subgroups[j]]
        return self._memo[key]

    def join(self, i, j):
        return self.sub_id[self.generated(self.subgroups[i] | self.subgroups[j])]

    def conj_sub(self, a, i):
        key = ("conj", a, i)
        if key not in self._memo:
            self._memo[key] = self.sub_id[frozenset(self.conj(a, x) for x in self.subgroups[i])]
        return self._memo[key]

    def is_normal(self, i):
        return all(self.conj_sub(a, i) == i for a in range(self.order))

    def leq(self, i, j):
        return self.subgroups[i] <= self.subgroups[j]

    def coset_reps(self, i, j):
        """Representatives of the left cosets of subgroup j inside subgroup i (j <= i)."""
        big, small = self.subgroups[i], self.subgroups[j]
        reps, covered = [], set()
        for a in sorted(big):
            if a in covered:
                continue
            reps.append(a)
            covered.update(self.mul[a][b] for b in small)
        return reps

    def element_order(self, a):
        x, n = a, 1
        while x != 0:
            x = self.mul[x][a]
            n += 1
        return n

    def quotient(self, i):
        """(FiniteGroup of F/N, map F -> F/N) for a normal subgroup id i."""
        N = self.subgroups[i]
        cosets = []
        label = {}
        for a in range(self.order):
            if a in label:
                continue
            c = frozenset(self.mul[a][n] for n in N)
            for x in c:
                label[x] = len(cosets)
            cosets.append(min(c))
        table = [[label[self.mul[cosets[a]][cosets[b]]] for b in range(len(cosets))]
                 for a in range(len(cosets))]
        names = [self.names[c] for c in cosets]
        return FiniteGroup(names, table), label

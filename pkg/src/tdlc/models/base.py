"""The interface every model family implements.

Elements and descriptors are immutable hashable values owned by a model.
Descriptor equality is structural: each family keeps its descriptors in a
canonical form so that == decides equality of the named subgroups.
"""

from __future__ import annotations

import random

from ..core import ModelMismatch, NotNested, NotRepresentable


class GroupModel:
    family = "abstract"
    # base in which displacement indices are expressed as integers
    index_base = 2
    # whether coset_reps/factor are available for the tidy-above check
    enumerable = True
    abelian = False  # the subgroups named by descriptors commute with each other

    def __init__(self, spec: dict):
        self.spec = spec
        self.model_id = f"{self.family}:{sorted(spec.items())!r}"

    # -- elements ---------------------------------------------------------
    def identity(self):
        raise NotImplementedError

    def compose(self, g, h):
        raise NotImplementedError

    def invert(self, g):
        raise NotImplementedError

    def check(self, x):
        """Raise ModelMismatch unless x is an element of this model."""
        if not self.is_element(x):
            raise ModelMismatch(f"{x!r} is not an element of {self.family}")
        return x

    def is_element(self, x):
        raise NotImplementedError

    def equals(self, g, h):
        self.check(g)
        self.check(h)
        return g == h

    def power(self, g, n):
        if n < 0:
            g, n = self.invert(g), -n
        result = self.identity()
        base = g
        while n:
            if n & 1:
                result = self.compose(result, base)
            base = self.compose(base, base)
            n >>= 1
        return result

    def commutator(self, g, h):
        return self.compose(self.compose(g, h), self.compose(self.invert(g), self.invert(h)))

    def conj_element(self, g, x):
        return self.compose(self.compose(g, x), self.invert(g))

    # -- descriptors ------------------------------------------------------
    def basis(self, k):
        raise NotImplementedError

    def trivial(self):
        raise NotImplementedError

    def conjugate(self, g, D):
        """Descriptor of g D g^-1."""
        raise NotImplementedError

    def intersect(self, A, B):
        raise NotImplementedError

    def contains(self, sup, sub):
        """True when sub is a subgroup of sup."""
        raise NotImplementedError

    def index(self, sup, sub):
        raise NotImplementedError

    def member(self, x, D):
        raise NotImplementedError

    def join(self, A, B):
        """Closed subgroup generated by A and B (NotRepresentable if outside the family)."""
        raise NotImplementedError

    def normalizes(self, g, D):
        return self.conjugate(g, D) == D

    def nested_index(self, sup, sub):
        if not self.contains(sup, sub):
            raise NotNested(f"{sub} is not contained in {sup}")
        return self.index(sup, sub)

    def same_at_level(self, A, B, j):
        """A U_j == B U_j, or None when the family cannot decide it."""
        try:
            a = self.join(A, self.basis(j))
            b = self.join(B, self.basis(j))
        except NotRepresentable:
            return None
        return self.contains(a, b) and self.contains(b, a)

    def product_set(self, A, B):
        """Descriptor of the set AB when the family knows it is a subgroup, else None."""
        if self.contains(A, B):
            return A
        if self.contains(B, A):
            return B
        if self.abelian:
            return self.join(A, B)
        return None

    def eigenfactor_candidates(self, U, U0):
        """Descriptors between U0 and U worth testing as eigenfactors, smallest first."""
        return [U0, U]

    def discrete_signature(self, x):
        """Image of x in the discrete quotient by the descriptor-named part, or None."""
        return None

    def is_trivial(self, D):
        return D == self.trivial()

    # -- enumeration hooks --------------------------------------------------
    def coset_reps(self, D, k, limit):
        """Representatives of D / (D cap U_k); raises EnumerationTooLarge past limit."""
        raise NotImplementedError

    def coset_key(self, x, k):
        """Hashable label of the coset x U_k."""
        raise NotImplementedError

    def factor(self, u, A, B, k=None):
        """(a, b) with a in A, b in B and u in ab U_k (exactly ab = u when k is None), or None."""
        raise NotImplementedError

    def product_equals(self, U, A, B):
        """Exact structural test of U = AB where the family supports it, else None."""
        return None

    def sample(self, rng: random.Random, D=None):
        raise NotImplementedError

    # -- closed forms (None when the family has none for this input) ---------
    def cf_scale(self, g):
        return None

    def cf_limit(self, g, U, sign):
        return None

    def cf_nub(self, g):
        return None

    def cf_contraction(self, g, k):
        return None

    def cf_contracts(self, g, x, k):
        return None

    def tidy_candidates(self, g):
        return []

    def invariant_closure(self, U, gens):
        """Smallest H-invariant closed subgroup containing U, with a Certificate, or None."""
        return None

    def tits_outer(self, xs):
        """Smallest descriptor certified to contain the Tits core of xs, with exact flag."""
        return None

    # -- text -------------------------------------------------------------
    def format_element(self, g) -> str:
        return repr(g)

    def parse_element(self, text: str):
        raise NotImplementedError

    def format_descriptor(self, D) -> str:
        return repr(D)

    def __repr__(self):
        return f"<{self.family} model {self.spec}>"

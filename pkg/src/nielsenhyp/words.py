"""Group words as tuples of nonzero ints.

Generator ``i`` (1-based) is the int ``i`` and its inverse is ``-i``.  The
textual form uses lowercase letters for generators and the matching capital
for inverses, so ``abA`` is a b a^-1.  ``a^-1`` and ``a^3`` are accepted on
input.  Shortlex order uses the letter order a < A < b < B < ...
"""

import re

Word = tuple

_TOKEN = re.compile(r"([A-Za-z])(\^(-?\d+))?")


class Alphabet:
    """Maps generator names to ints and back."""

    def __init__(self, names):
        names = list(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        for nm in names:
            if len(nm) != 1 or not nm.islower():
                raise ValueError("generator names must be single lowercase letters: %r" % nm)
        self.names = names
        self._index = {nm: i + 1 for i, nm in enumerate(names)}

    @classmethod
    def standard(cls, n):
        if not 1 <= n <= 26:
            raise ValueError("rank must be between 1 and 26")
        return cls("abcdefghijklmnopqrstuvwxyz"[:n])

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self):
        return hash(tuple(self.names))

    def letters(self):
        """All letters in shortlex order: 1, -1, 2, -2, ..."""
        out = []
        for i in range(1, len(self.names) + 1):
            out += [i, -i]
        return out

    def parse(self, text):
        """Parse a word; ``1`` or the empty string is the identity."""
        from .errors import SpecError

        text = text.strip().replace(" ", "").replace("*", "")
        if text in ("", "1", "e"):
            return ()
        out = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise SpecError("cannot parse word %r at position %d" % (text, pos))
            ch, _, exp = m.groups()
            idx = self._index.get(ch.lower())
            if idx is None:
                raise SpecError("unknown generator %r in %r" % (ch, text))
            letter = idx if ch.islower() else -idx
            k = int(exp) if exp is not None else 1
            if k < 0:
                letter, k = -letter, -k
            out += [letter] * k
            pos = m.end()
        return reduce_word(out)

    def format(self, w):
        if not w:
            return "1"
        return "".join(
            self.names[x - 1] if x > 0 else self.names[-x - 1].upper() for x in w
        )


def reduce_word(w):
    """Free reduction."""
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(w):
    return tuple(-x for x in reversed(w))


def multiply(*ws):
    out = []
    for w in ws:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def power(w, k):
    if k < 0:
        w, k = inverse(w), -k
    return multiply(*([w] * k))


def conjugate(w, g):
    """g w g^-1"""
    return multiply(g, w, inverse(g))


def letter_key(x):
    return 2 * (abs(x) - 1) + (0 if x > 0 else 1)


def shortlex_key(w):
    return (len(w), tuple(letter_key(x) for x in w))


def lcp(u, v):
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def cyclic_reduction(w):
    """Return (c, r) with w = c r c^-1 and r cyclically reduced."""
    w = reduce_word(w)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[:i], w[i:j + 1]


def words_up_to(letters, length, reduced=True):
    """Shortlex enumeration of freely reduced words over ``letters``."""
    out = [()]
    layer = [()]
    for _ in range(length):
        nxt = []
        for w in layer:
            for x in letters:
                if reduced and w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        out += nxt
        layer = nxt
    return out

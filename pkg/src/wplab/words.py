"""Vectorised enumeration of reduced words in a two-letter free basis."""

from __future__ import annotations

import numpy as np

# letters 0..3 stand for X, Y, X^-1, Y^-1; inverse of letter i is (i + 2) % 4
_INV = np.array([2, 3, 0, 1])


def _stack_gens(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    def inv(m):
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    return np.stack([X, Y, inv(X), inv(Y)])


def reduced_words(X: np.ndarray, Y: np.ndarray, max_len: int, include_empty: bool = True):
    """All reduced words of length <= max_len in the basis ``(X, Y)``.

    Returns ``(mats, first, last, length)`` arrays in a deterministic order:
    by length, then lexicographic in the letter order ``X, Y, X^-1, Y^-1``.
    ``first``/``last`` hold letter codes (-1 for the empty word).
    """
    gens = _stack_gens(X, Y)
    mats = [np.eye(2)[None]]
    first = [np.array([-1])]
    last = [np.array([-1])]
    length = [np.array([0])]
    cur_m = gens.copy()
    cur_first = np.arange(4)
    cur_last = np.arange(4)
    for k in range(1, max_len + 1):
        mats.append(cur_m)
        first.append(cur_first)
        last.append(cur_last)
        length.append(np.full(cur_m.shape[0], k))
        if k == max_len:
            break
        # extend each word by every letter that does not cancel its last letter
        n = cur_m.shape[0]
        letters = np.tile(np.arange(4), n)
        parent = np.repeat(np.arange(n), 4)
        keep = letters != _INV[cur_last[parent]]
        letters, parent = letters[keep], parent[keep]
        cur_m = np.einsum("nij,njk->nik", cur_m[parent], gens[letters])
        cur_first = cur_first[parent]
        cur_last = letters
    out = (np.concatenate(mats), np.concatenate(first), np.concatenate(last), np.concatenate(length))
    if not include_empty:
        out = tuple(a[1:] for a in out)
    return out


def word_strings(max_len: int, names=("X", "Y", "x", "y")) -> list[str]:
    """String labels matching the order of :func:`reduced_words` (for reporting)."""
    out = [""]
    cur = list(names)
    inv = {names[i]: names[(i + 2) % 4] for i in range(4)}
    for k in range(1, max_len + 1):
        out.extend(cur)
        if k == max_len:
            break
        cur = [w + c for w in cur for c in names if c != inv[w[-1]]]
    return out


def nielsen_is_basis(w1: str, w2: str) -> bool:
    """True when two words over ``A,B,a,b`` form a free basis of F(A, B)."""
    from .fuchsian import invert_word, reduce_word

    u, v = reduce_word(w1), reduce_word(w2)
    if not u or not v:
        return False
    changed = True
    while changed:
        changed = False
        for _ in range(2):
            for cand in (u + v, u + invert_word(v), v + u, invert_word(v) + u):
                c = reduce_word(cand)
                if c and len(c) < len(u):
                    u, changed = c, True
                    break
            u, v = v, u
    return len(u) == 1 and len(v) == 1 and u.lower() != v.lower()

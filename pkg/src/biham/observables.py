"""Trace-word observables.

An observable is a real linear combination of ``Re tr(W)`` / ``Im tr(W)``
where W is a word in the letters G, Ginv, L, Q, Qinv with positive powers.
The text form is e.g. ``"0.5*Re tr(L L) - 2*Im tr(G^2 L)"``.

Letters resolve against the point they are evaluated on:

* ``PhasePoint`` / ``ModelPoint2``: G = g, L = L
* ``ModelPoint1``: G = g, L = b b^dagger
* ``ReducedPoint``: Q = diag(exp(iq)), L = L
* a bare ``ndarray`` K in GL(n, C): pulled back through K -> (gR, bR bR^dagger)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .linalg import dag
from .points import ModelPoint1, PhasePoint, ReducedPoint, RSCoords, SutherlandCoords

LETTERS = ("G", "Ginv", "L", "Q", "Qinv")
GROUP_LETTERS = {"G", "Ginv"}
TORUS_LETTERS = {"Q", "Qinv"}
INVERSE = {"G": "Ginv", "Ginv": "G", "Q": "Qinv", "Qinv": "Q", "L": None}


@dataclass(frozen=True)
class Term:
    coef: float
    part: str  # "Re" or "Im"
    word: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if self.part not in ("Re", "Im"):
            raise ValueError(f"part must be Re or Im, got {self.part!r}")
        for letter, power in self.word:
            if letter not in LETTERS:
                raise ValueError(f"unknown letter {letter!r}")
            if int(power) < 1:
                raise ValueError("letter powers must be positive")

    def letters(self) -> list[str]:
        out = []
        for letter, power in self.word:
            out.extend([letter] * power)
        return out


@dataclass(frozen=True)
class ObservableExpr:
    terms: tuple[Term, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("observable needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    # ------------------------------------------------------------ algebra
    def __add__(self, other: ObservableExpr) -> ObservableExpr:
        return ObservableExpr(self.terms + other.terms)

    def __mul__(self, c: float) -> ObservableExpr:
        return ObservableExpr(tuple(Term(c * t.coef, t.part, t.word) for t in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> ObservableExpr:
        return self * -1.0

    def __sub__(self, other: ObservableExpr) -> ObservableExpr:
        return self + (-other)

    def __call__(self, point) -> float:
        return evaluate(self, point)

    def __str__(self) -> str:
        return format_observable(self)

    @property
    def alphabet(self) -> set[str]:
        return {letter for t in self.terms for letter, _ in t.word}


def word(*letters: str, coef: float = 1.0, part: str = "Re") -> ObservableExpr:
    """Build ``coef * part tr(letters...)`` merging repeated adjacent letters."""
    return ObservableExpr((Term(coef, part, _compress(letters)),))


def _compress(letters) -> tuple[tuple[str, int], ...]:
    out: list[list] = []
    for letter in letters:
        if out and out[-1][0] == letter:
            out[-1][1] += 1
        else:
            out.append([letter, 1])
    return tuple((a, b) for a, b in out)


# ------------------------------------------------------------ text format

_TERM_RE = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:(?P<coef>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*\*\s*)?"
    r"(?P<part>Re|Im)\s+tr\s*\((?P<body>[^)]*)\)\s*"
)
_LETTER_RE = re.compile(r"^(G|Ginv|L|Q|Qinv)(?:\^(\d+))?$")


def parse_observable(text: str) -> ObservableExpr:
    pos = 0
    terms = []
    text = text.strip()
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse observable at column {pos + 1}: {text[pos:]!r}")
        if terms and m.group("sign") is None:
            raise ValueError(f"missing '+' or '-' before term at column {pos + 1}")
        coef = float(m.group("coef")) if m.group("coef") else 1.0
        if m.group("sign") == "-":
            coef = -coef
        letters = []
        for tok in m.group("body").split():
            lm = _LETTER_RE.match(tok)
            if not lm:
                raise ValueError(f"unknown letter {tok!r} in {text!r}")
            letters.extend([lm.group(1)] * int(lm.group(2) or 1))
        terms.append(Term(coef, m.group("part"), _compress(letters)))
        pos = m.end()
    if not terms:
        raise ValueError("empty observable")
    return ObservableExpr(tuple(terms))


def _fmt_coef(c: float) -> str:
    if float(c).is_integer() and abs(c) < 1e15:
        return str(int(c))
    return repr(float(c))


def format_observable(f: ObservableExpr) -> str:
    out = []
    for i, t in enumerate(f.terms):
        body = " ".join(a if p == 1 else f"{a}^{p}" for a, p in t.word)
        c = t.coef
        if i == 0:
            out.append(f"{_fmt_coef(c)}*{t.part} tr({body})")
        else:
            sign = "-" if c < 0 else "+"
            out.append(f" {sign} {_fmt_coef(abs(c))}*{t.part} tr({body})")
    return "".join(out)


# ------------------------------------------------------------- evaluation

def letter_matrices(point) -> dict[str, np.ndarray]:
    """Matrices substituted for each letter at ``point``."""
    if isinstance(point, ReducedPoint):
        Q = point.Q
        return {"Q": Q, "Qinv": Q.conj(), "L": point.L}
    if isinstance(point, PhasePoint):
        return {"G": point.g, "Ginv": dag(point.g), "L": point.L}
    if isinstance(point, ModelPoint1):
        return {"G": point.g, "Ginv": dag(point.g), "L": point.L}
    if isinstance(point, np.ndarray):
        from .factorization import split

        s = split(point)
        return {"G": s.gR, "Ginv": dag(s.gR), "L": s.bR @ dag(s.bR)}
    raise TypeError(f"unsupported point type {type(point).__name__}")


def _resolve(point):
    if isinstance(point, (RSCoords, SutherlandCoords)):
        from . import coords

        return coords.to_reduced(point)
    return point


def _check_alphabet(f: ObservableExpr, mats: dict) -> None:
    missing = f.alphabet - set(mats)
    if missing:
        raise ValueError(f"letters {sorted(missing)} are not defined on this point kind")


def _word_product(letters, mats, n) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    for a in letters:
        out = out @ mats[a]
    return out


def evaluate(f: ObservableExpr, point) -> float:
    point = _resolve(point)
    mats = letter_matrices(point)
    _check_alphabet(f, mats)
    n = mats["L"].shape[0]
    total = 0.0
    for t in f.terms:
        tr = np.trace(_word_product(t.letters(), mats, n))
        total += t.coef * (tr.real if t.part == "Re" else tr.imag)
    return float(total)


def term_trace_gradients(letters, mats, n) -> dict[str, np.ndarray]:
    """Matrices Z with d/dt tr(W) = tr(X Z) for each perturbation slot.

    Slots: ``left`` (A -> e^{tX} A for G/Q letters), ``right`` (G -> G e^{tX})
    and ``L`` (L -> L + tX).
    """
    m = len(letters)
    A = [mats[a] for a in letters]
    eye = np.eye(n, dtype=complex)
    P = [eye]
    for Ai in A:
        P.append(P[-1] @ Ai)
    S = [eye] * (m + 1)
    for i in range(m - 1, -1, -1):
        S[i] = A[i] @ S[i + 1]

    def rot(i):
        return S[i] @ P[i]

    Zl = np.zeros((n, n), dtype=complex)
    Zr = np.zeros((n, n), dtype=complex)
    ZL = np.zeros((n, n), dtype=complex)
    for i, a in enumerate(letters):
        if a in ("G", "Q"):
            Zl += rot(i)
            Zr += rot(i + 1)
        elif a in ("Ginv", "Qinv"):
            Zl -= rot(i + 1)
            Zr -= rot(i)
        else:
            ZL += S[i + 1] @ P[i]
    return {"left": Zl, "right": Zr, "L": ZL}


def gl_gradients(f: ObservableExpr, point) -> dict[str, np.ndarray]:
    """gl-valued gradients Gamma with d/dt f = <Gamma, X> per slot."""
    mats = letter_matrices(point)
    _check_alphabet(f, mats)
    n = mats["L"].shape[0]
    out = {k: np.zeros((n, n), dtype=complex) for k in ("left", "right", "L")}
    for t in f.terms:
        Z = term_trace_gradients(t.letters(), mats, n)
        # Re tr(XZ) = <iZ, X>,  Im tr(XZ) = <Z, X>
        factor = t.coef * (1j if t.part == "Re" else 1.0)
        for k in out:
            out[k] += factor * Z[k]
    return out


# ---------------------------------------------------- structural transforms

def identity_shift_derivative(f: ObservableExpr) -> ObservableExpr | None:
    """The observable d/dt f(g, L + t 1) as a trace-word sum (None if zero)."""
    terms = []
    for t in f.terms:
        letters = t.letters()
        for i, a in enumerate(letters):
            if a == "L":
                rest = letters[:i] + letters[i + 1:]
                terms.append(Term(t.coef, t.part, _compress(rest)))
    return ObservableExpr(tuple(terms)) if terms else None


def extend_invariant(f: ObservableExpr) -> ObservableExpr:
    """Extend an observable on T^n_reg x Herm(n) to U(n) x Herm(n) by Q -> g.

    Any trace word in Q, Q^-1, L is invariant under simultaneous conjugation,
    so the substituted word is the U(n)-invariant extension.
    """
    if f.alphabet & GROUP_LETTERS:
        raise ValueError("input must be a word in Q, Qinv, L only")
    sub = {"Q": "G", "Qinv": "Ginv", "L": "L"}
    return ObservableExpr(tuple(
        Term(t.coef, t.part, tuple((sub[a], p) for a, p in t.word)) for t in f.terms
    ))


def restrict_to_torus(F: ObservableExpr) -> ObservableExpr:
    if F.alphabet & TORUS_LETTERS:
        raise ValueError("input must be a word in G, Ginv, L only")
    sub = {"G": "Q", "Ginv": "Qinv", "L": "L"}
    return ObservableExpr(tuple(
        Term(t.coef, t.part, tuple((sub[a], p) for a, p in t.word)) for t in F.terms
    ))


# ----------------------------------------------------------- random words

def random_observable(rng: np.random.Generator, alphabet=("G", "Ginv", "L"),
                      max_len: int = 4, n_terms: int = 2) -> ObservableExpr:
    terms = []
    for _ in range(n_terms):
        length = int(rng.integers(1, max_len + 1))
        letters = [alphabet[int(i)] for i in rng.integers(0, len(alphabet), length)]
        part = "Re" if rng.random() < 0.5 else "Im"
        coef = float(np.round(rng.uniform(-1.0, 1.0), 3)) or 0.5
        terms.append(Term(coef, part, _compress(letters)))
    return ObservableExpr(tuple(terms))


def enumerate_words(alphabet, max_len: int):
    for length in range(1, max_len + 1):
        yield from product(alphabet, repeat=length)

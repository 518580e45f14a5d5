"""Weighted Pauli-sum Hamiltonians: parsing, normalization, truncation.

A Hamiltonian is an ordered list of strictly positive weights attached to
signed Pauli strings.  Negative input coefficients are absorbed into the
string's sign at construction so the weight vector is always a valid
(unnormalized) probability distribution.  The aggregates every downstream
consumer needs are cached: ``L`` (term count), ``lam`` (sum of weights,
the l1 norm) and ``lam_max`` (largest single weight).

Text format ``hamtxt v1``: one ``<coefficient> <pauli-word>`` pair per
line, ``#`` starts a comment, blank lines allowed, all words the same
length over {I, X, Y, Z}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

PAULI_AXES = "IXYZ"

# Float summation noise allowance for the lam <= lam_max * L invariant
# (e.g. 0.1 + 0.1 + 0.1 rounds above 0.3).
_AGG_RTOL = 1e-12


class HamiltonianError(ValueError):
    """Invalid Hamiltonian data (domain errors)."""


class HamiltonianParseError(HamiltonianError):
    """Malformed hamtxt input; carries the offending 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis with a global sign.

    The represented operator is ``sign * P(axes)``, Hermitian with operator
    norm exactly 1 for any word that is not all-identity.
    """

    axes: str
    sign: int = 1

    def __post_init__(self):
        if not self.axes or any(c not in PAULI_AXES for c in self.axes):
            raise HamiltonianError(f"invalid Pauli word {self.axes!r}")
        if self.sign not in (1, -1):
            raise HamiltonianError(f"sign must be +1 or -1, got {self.sign!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.axes


@dataclass(frozen=True)
class Term:
    """One Hamiltonian term: strictly positive weight times a signed Pauli."""

    weight: float
    op: PauliString

    def __post_init__(self):
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise HamiltonianError(f"term weight must be finite and > 0, got {self.weight!r}")
        if self.op.is_identity:
            # The identity component only shifts energy and breaks the
            # norm-1 term invariant; callers must strip it.
            raise HamiltonianError("all-identity Pauli word is not a valid term")

    @property
    def signed_coefficient(self) -> float:
        return self.op.sign * self.weight


@dataclass(frozen=True)
class ControlledTerm:
    """Term lifted to |1><1| (x) op on one extra (control) qubit.

    The lifted operator keeps operator norm 1, so weights and aggregates
    are unchanged relative to the base term.
    """

    base: Term

    @property
    def weight(self) -> float:
        return self.base.weight

    @property
    def n_qubits(self) -> int:
        return self.base.op.n_qubits + 1


@dataclass(frozen=True)
class WeightProfile:
    """Aggregate view (L, lam, lam_max) detached from explicit Pauli data."""

    L: int
    lam: float
    lam_max: float

    def __post_init__(self):
        if self.L < 1:
            raise HamiltonianError(f"L must be >= 1, got {self.L}")
        if not (self.lam > 0 and self.lam_max > 0):
            raise HamiltonianError("lam and lam_max must be > 0")
        if self.lam_max > self.lam * (1 + _AGG_RTOL):
            raise HamiltonianError(f"lam_max={self.lam_max} exceeds lam={self.lam}")
        if self.lam > self.lam_max * self.L * (1 + _AGG_RTOL):
            raise HamiltonianError(
                f"lam={self.lam} exceeds lam_max*L={self.lam_max * self.L}"
            )


class Hamiltonian:
    """Normalized weighted Pauli sum with cached (L, lam, lam_max).

    Construction merges duplicate Pauli words by signed-coefficient
    addition (exact zeros are dropped), absorbs negative coefficients into
    the string sign, and rejects all-identity words.  Instances are
    immutable and safe to share across threads.
    """

    __slots__ = ("_n_qubits", "_terms", "_lam", "_lam_max")

    def __init__(self, entries: Iterable[tuple[float, str]]):
        merged: dict[str, float] = {}
        n_qubits = None
        for coeff, word in entries:
            if n_qubits is None:
                n_qubits = len(word)
            elif len(word) != n_qubits:
                raise HamiltonianError(
                    f"inconsistent Pauli word length: {word!r} vs {n_qubits} qubits"
                )
            if not word or any(c not in PAULI_AXES for c in word):
                raise HamiltonianError(f"invalid Pauli word {word!r}")
            if not math.isfinite(coeff):
                raise HamiltonianError(f"non-finite coefficient {coeff!r}")
            if word in merged:
                merged[word] += coeff
            else:
                merged[word] = coeff

        terms = []
        for word, coeff in merged.items():
            if coeff == 0.0:
                continue
            sign = 1 if coeff > 0 else -1
            terms.append(Term(abs(coeff), PauliString(word, sign)))
        if not terms:
            raise HamiltonianError("Hamiltonian has no terms")

        self._n_qubits = n_qubits
        self._terms = tuple(terms)
        weights = [t.weight for t in terms]
        self._lam = math.fsum(weights)
        self._lam_max = max(weights)

    @classmethod
    def from_terms(cls, terms: Iterable[Term]) -> "Hamiltonian":
        return cls((t.signed_coefficient, t.op.axes) for t in terms)

    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    @property
    def terms(self) -> tuple[Term, ...]:
        return self._terms

    @property
    def L(self) -> int:
        return len(self._terms)

    @property
    def lam(self) -> float:
        """Sum of term weights (l1 norm); upper bounds the operator norm."""
        return self._lam

    @property
    def lam_max(self) -> float:
        """Largest single term weight."""
        return self._lam_max

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(t.weight for t in self._terms)

    def profile(self) -> WeightProfile:
        return WeightProfile(self.L, self._lam, self._lam_max)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Term]:
        return iter(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return self._n_qubits == other._n_qubits and self._terms == other._terms

    def __repr__(self) -> str:
        return (
            f"Hamiltonian(n_qubits={self._n_qubits}, L={self.L}, "
            f"lam={self._lam!r}, lam_max={self._lam_max!r})"
        )

    def canonical(self) -> "Hamiltonian":
        """Copy with terms in canonical order: weight descending, then word."""
        ordered = sorted(self._terms, key=lambda t: (-t.weight, t.op.axes))
        return Hamiltonian.from_terms(ordered)

    def serialize(self) -> str:
        """Canonical ``hamtxt v1`` text; parse(serialize(h)) == h.canonical()."""
        lines = ["# hamtxt v1"]
        for term in sorted(self._terms, key=lambda t: (-t.weight, t.op.axes)):
            lines.append(f"{term.signed_coefficient!r} {term.op.axes}")
        return "\n".join(lines) + "\n"

    def truncate(self, eps: float) -> "Hamiltonian":
        """Drop the smallest terms whose removed weight stays <= eps.

        Removal is greedy in ascending weight order; ties are broken by
        input order with earlier terms kept longer.  Requires eps < lam so
        the result is never empty.
        """
        if not (math.isfinite(eps) and eps > 0):
            raise HamiltonianError(f"truncation budget must be > 0, got {eps!r}")
        if eps >= self._lam:
            raise HamiltonianError(
                f"truncation budget {eps} >= lam {self._lam} would remove every term"
            )
        order = sorted(range(self.L), key=lambda i: (self._terms[i].weight, -i))
        removed: set[int] = set()
        budget = 0.0
        for i in order:
            w = self._terms[i].weight
            if budget + w > eps:
                break
            budget += w
            removed.add(i)
        kept = [t for i, t in enumerate(self._terms) if i not in removed]
        return Hamiltonian.from_terms(kept)

    def controlled_extension(self) -> "ControlledExtension":
        """Lift every term to |1><1| (x) H_j on n+1 qubits.

        L, lam and lam_max are unchanged by the lift.
        """
        return ControlledExtension(
            terms=tuple(ControlledTerm(t) for t in self._terms),
            n_qubits=self._n_qubits + 1,
            profile=self.profile(),
        )


@dataclass(frozen=True)
class ControlledExtension:
    terms: tuple[ControlledTerm, ...]
    n_qubits: int
    profile: WeightProfile


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse ``hamtxt v1`` text into a normalized Hamiltonian.

    Raises HamiltonianParseError (with line number) on malformed
    coefficients, bad Pauli characters, inconsistent word lengths, or an
    empty term list.
    """
    entries: list[tuple[float, str]] = []
    word_len = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise HamiltonianParseError(
                f"expected '<coefficient> <pauli-word>', got {raw.strip()!r}", line_no
            )
        coeff_text, word = fields
        try:
            coeff = float(coeff_text)
        except ValueError:
            raise HamiltonianParseError(f"malformed coefficient {coeff_text!r}", line_no) from None
        if not math.isfinite(coeff):
            raise HamiltonianParseError(f"non-finite coefficient {coeff_text!r}", line_no)
        if any(c not in PAULI_AXES for c in word):
            raise HamiltonianParseError(f"characters outside {{I,X,Y,Z}} in {word!r}", line_no)
        if word_len is None:
            word_len = len(word)
        elif len(word) != word_len:
            raise HamiltonianParseError(
                f"word {word!r} has length {len(word)}, expected {word_len}", line_no
            )
        if set(word) == {"I"}:
            raise HamiltonianParseError(
                "all-identity term is not allowed (it only shifts energy)", line_no
            )
        entries.append((coeff, word))
    if not entries:
        raise HamiltonianParseError("no Hamiltonian terms found")
    try:
        return Hamiltonian(entries)
    except HamiltonianParseError:
        raise
    except HamiltonianError as exc:
        raise HamiltonianParseError(str(exc)) from exc

"""Lecture et écriture des fichiers de repères et d'algèbres.

Grammaire des repères ::

    file   := "dim" INT NEWLINE line+
    line   := IDENT "=" expr
    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := RATIONAL | VAR | DVAR | factor "^" INT | "(" expr ")"

Une valeur est soit un scalaire (polynôme en x1..xn) soit un champ
(combinaison de d1..dn) ; chaque ligne doit produire un champ. Le
caractère ``#`` ouvre un commentaire jusqu'à la fin de ligne.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import (
    IndexOutOfRange,
    InvalidAlgebra,
    ParseError,
    ZeroDenominator,
)
from .flags import Frame, PolyField, coordinate_ring
from .linalg import from_qq, to_qq
from .nilpotent import StratifiedAlgebra, validate_algebra

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()/=])"
)
_VAR = re.compile(r"x(\d+)")
_DVAR = re.compile(r"d(\d+)")
_BASIS = re.compile(r"e(\d+)")

# Degré total maximal d'une puissance
MAX_DEGREE = 64


@dataclass(frozen=True)
class Token:
    """Lexème positionné (colonne 1-basée)."""

    kind: str
    text: str
    line: int
    column: int


def _tokenize(line: str, lineno: int) -> list[Token]:
    code = line.split("#", 1)[0]
    tokens: list[Token] = []
    pos = 0
    while pos < len(code):
        match = _TOKEN.match(code, pos)
        if match is None:
            raise ParseError(f"caractère inattendu {code[pos]!r}", lineno, pos + 1)
        kind = match.lastgroup or ""
        if kind != "ws":
            tokens.append(Token(kind, match.group(), lineno, pos + 1))
        pos = match.end()
    return tokens


def _significant_lines(text: str) -> Iterator[tuple[int, list[Token]]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line, lineno)
        if tokens:
            yield lineno, tokens


class _Cursor:
    """Parcours d'une ligne de lexèmes."""

    def __init__(self, tokens: list[Token], lineno: int) -> None:
        """Lexèmes d'une ligne."""
        self.tokens = tokens
        self.lineno = lineno
        self.pos = 0

    def peek(self) -> Token | None:
        """Lexème courant sans avancer."""
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str) -> Token:
        """Lexème suivant, obligatoire."""
        tok = self.peek()
        if tok is None:
            column = (
                self.tokens[-1].column + len(self.tokens[-1].text)
                if self.tokens else 1
            )
            raise ParseError(f"{expected} attendu en fin de ligne", self.lineno, column)
        self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        """Consomme l'opérateur s'il est présent."""
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        """Opérateur obligatoire."""
        tok = self.take(repr(text))
        if tok.kind != "op" or tok.text != text:
            raise ParseError(f"{text!r} attendu, trouvé {tok.text!r}", tok.line, tok.column)
        return tok

    def integer(self) -> Token:
        """Entier obligatoire."""
        tok = self.take("entier")
        if tok.kind != "num":
            raise ParseError(f"entier attendu, trouvé {tok.text!r}", tok.line, tok.column)
        return tok

    def rational(self, first: Token) -> Fraction:
        """INT ("/" INT)? à partir du numérateur déjà lu."""
        if not self.accept("/"):
            return Fraction(int(first.text))
        den = self.integer()
        if int(den.text) == 0:
            raise ZeroDenominator("dénominateur nul", den.line, den.column)
        return Fraction(int(first.text), int(den.text))

    def finish(self) -> None:
        """Refuse tout lexème restant."""
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"lexème en trop {tok.text!r}", tok.line, tok.column)


@dataclass(frozen=True)
class _Value:
    """Scalaire (vector is None) ou champ (composantes)."""

    scalar: Any = None
    vector: tuple[Any, ...] | None = None


class _FrameParser:
    """Descente récursive sur une ligne de repère."""

    def __init__(self, n: int) -> None:
        """Dimension ambiante."""
        self.n = n
        self.ring = coordinate_ring(n)

    def _index(self, tok: Token, digits: str) -> int:
        j = int(digits)
        if not 1 <= j <= self.n:
            raise IndexOutOfRange(
                f"indice {tok.text} hors de 1..{self.n}", tok.line, tok.column
            )
        return j

    def _combine(self, a: _Value, b: _Value, sign: int, tok: Token) -> _Value:
        if a.vector is None or b.vector is None:
            if a.vector is not None or b.vector is not None:
                raise ParseError(
                    "somme d'un scalaire et d'un champ", tok.line, tok.column
                )
            return _Value(
                scalar=a.scalar + b.scalar if sign > 0 else a.scalar - b.scalar
            )
        return _Value(
            vector=tuple(
                x + y if sign > 0 else x - y
                for x, y in zip(a.vector, b.vector, strict=True)
            )
        )

    def _product(self, a: _Value, b: _Value, tok: Token) -> _Value:
        if a.vector is not None:
            if b.vector is not None:
                raise ParseError("produit de deux champs", tok.line, tok.column)
            return _Value(vector=tuple(c * b.scalar for c in a.vector))
        if b.vector is not None:
            return _Value(vector=tuple(c * a.scalar for c in b.vector))
        return _Value(scalar=a.scalar * b.scalar)

    def expr(self, cur: _Cursor) -> _Value:
        """expr := term (("+" | "-") term)*."""
        value = self.term(cur)
        while (tok := cur.peek()) is not None and tok.text in {"+", "-"}:
            cur.pos += 1
            value = self._combine(value, self.term(cur), 1 if tok.text == "+" else -1, tok)
        return value

    def term(self, cur: _Cursor) -> _Value:
        """term := factor ("*" factor)*."""
        value = self.factor(cur)
        while (tok := cur.peek()) is not None and tok.text == "*":
            cur.pos += 1
            value = self._product(value, self.factor(cur), tok)
        return value

    def factor(self, cur: _Cursor) -> _Value:
        """Facteur éventuellement élevé à une puissance entière."""
        value = self.atom(cur)
        while (tok := cur.peek()) is not None and tok.text == "^":
            cur.pos += 1
            power = cur.integer()
            if value.vector is not None:
                raise ParseError("puissance d'un champ", tok.line, tok.column)
            exponent = int(power.text)
            degree = max((sum(m) for m in value.scalar.monoms()), default=0)
            if exponent > MAX_DEGREE or degree * exponent > MAX_DEGREE:
                raise ParseError(
                    f"exposant {exponent} au-delà du degré {MAX_DEGREE}",
                    power.line,
                    power.column,
                )
            value = _Value(scalar=value.scalar ** exponent)
        return value

    def atom(self, cur: _Cursor) -> _Value:
        """RATIONAL, VAR, DVAR ou expression parenthésée."""
        tok = cur.take("facteur")
        if tok.kind == "num":
            return _Value(scalar=self.ring.ground_new(to_qq(cur.rational(tok))))
        if tok.kind == "op" and tok.text == "(":
            value = self.expr(cur)
            cur.expect(")")
            return value
        if tok.kind == "name":
            if m := _VAR.fullmatch(tok.text):
                return _Value(scalar=self.ring.gens[self._index(tok, m[1]) - 1])
            if m := _DVAR.fullmatch(tok.text):
                j = self._index(tok, m[1])
                return _Value(
                    vector=tuple(
                        self.ring.one if i == j else self.ring.zero
                        for i in range(1, self.n + 1)
                    )
                )
        raise ParseError(f"facteur inattendu {tok.text!r}", tok.line, tok.column)


def _header(lines: Iterator[tuple[int, list[Token]]], keyword: str) -> tuple[int, _Cursor]:
    first = next(lines, None)
    if first is None:
        raise ParseError(f"en-tête {keyword!r} manquant", 1, 1)
    lineno, tokens = first
    cur = _Cursor(tokens, lineno)
    tok = cur.take(keyword)
    if tok.kind != "name" or tok.text != keyword:
        raise ParseError(f"{keyword!r} attendu, trouvé {tok.text!r}", tok.line, tok.column)
    return lineno, cur


def parse_frame(text: str) -> Frame:
    """Lit un fichier de repère ; erreurs positionnées (ligne, colonne)."""
    lines = _significant_lines(text)
    lineno, cur = _header(lines, "dim")
    dim_tok = cur.integer()
    cur.finish()
    n = int(dim_tok.text)
    if n < 1:
        raise ParseError("dimension nulle", dim_tok.line, dim_tok.column)
    parser = _FrameParser(n)
    fields: list[PolyField] = []
    seen: set[str] = set()
    for lineno, tokens in lines:
        cur = _Cursor(tokens, lineno)
        name = cur.take("identifiant")
        if name.kind != "name":
            raise ParseError(f"identifiant attendu, trouvé {name.text!r}", name.line, name.column)
        if name.text in seen:
            raise ParseError(f"champ {name.text} déjà défini", name.line, name.column)
        seen.add(name.text)
        cur.expect("=")
        value = parser.expr(cur)
        cur.finish()
        if value.vector is None:
            raise ParseError(f"{name.text} n'est pas un champ de vecteurs", name.line, name.column)
        fields.append(PolyField(value.vector))
    if not fields:
        raise ParseError("aucun champ défini", lineno + 1, 1)
    logging.debug("Repère lu: %d champs sur R^%d", len(fields), n)
    return Frame(tuple(fields))


def _format_monomial(monom: tuple[int, ...]) -> list[str]:
    return [
        f"x{i}" if e == 1 else f"x{i}^{e}"
        for i, e in enumerate(monom, start=1)
        if e
    ]


def _format_terms(fld: PolyField) -> list[tuple[Fraction, str]]:
    terms = []
    for j, comp in enumerate(fld.components, start=1):
        for monom, coeff in comp.terms():
            c = from_qq(coeff)
            if not c:
                continue
            parts = _format_monomial(monom)
            if abs(c) != 1:
                parts.insert(0, str(abs(c)))
            terms.append((c, "*".join([*parts, f"d{j}"])))
    return terms


def format_field(fld: PolyField) -> str:
    """Expression d'un champ dans la grammaire des repères."""
    terms = _format_terms(fld)
    if not terms:
        return "0*d1"
    out = []
    for pos, (c, body) in enumerate(terms):
        if pos == 0:
            # Pas de moins unaire dans la grammaire
            out.append(body if c > 0 else f"(0 - 1)*{body}")
        else:
            out.append(f"{'+' if c > 0 else '-'} {body}")
    return " ".join(out)


def format_frame(frame: Frame, labels: tuple[str, ...] = ()) -> str:
    """Texte relisible par ``parse_frame``."""
    names = labels or tuple(f"X{i}" for i in range(1, frame.rank + 1))
    body = [
        f"{name} = {format_field(fld)}"
        for name, fld in zip(names, frame.fields, strict=True)
    ]
    return "\n".join([f"dim {frame.dim}", *body]) + "\n"


def _basis_index(tok: Token, total: int) -> int:
    m = _BASIS.fullmatch(tok.text) if tok.kind == "name" else None
    if m is None:
        raise ParseError(f"vecteur de base attendu, trouvé {tok.text!r}", tok.line, tok.column)
    idx = int(m[1])
    if not 1 <= idx <= total:
        raise IndexOutOfRange(f"indice {tok.text} hors de 1..{total}", tok.line, tok.column)
    return idx


def _algebra_rhs(cur: _Cursor, total: int) -> dict[int, Fraction]:
    """["-"] terme (("+"|"-") terme)* ou "0" ; terme := [RATIONAL "*"] e<m>."""
    first = cur.peek()
    if first is not None and first.kind == "num" and first.text == "0" and len(cur.tokens) == cur.pos + 1:
        cur.pos += 1
        return {}
    out: defaultdict[int, Fraction] = defaultdict(Fraction)
    sign = -1 if cur.accept("-") else 1
    while True:
        tok = cur.take("terme")
        coeff = Fraction(1)
        if tok.kind == "num":
            coeff = cur.rational(tok)
            cur.expect("*")
            tok = cur.take("vecteur de base")
        out[_basis_index(tok, total)] += sign * coeff
        nxt = cur.peek()
        if nxt is None:
            break
        if nxt.text not in {"+", "-"}:
            raise ParseError(f"'+' ou '-' attendu, trouvé {nxt.text!r}", nxt.line, nxt.column)
        cur.pos += 1
        sign = 1 if nxt.text == "+" else -1
    return {m: c for m, c in out.items() if c}


def parse_algebra(text: str) -> StratifiedAlgebra:
    """Lit un fichier d'algèbre puis la valide (InvalidAlgebra sinon)."""
    lines = _significant_lines(text)
    _, cur = _header(lines, "layers")
    dims: list[int] = []
    while cur.peek() is not None:
        tok = cur.integer()
        if int(tok.text) < 1:
            raise ParseError("couche de dimension nulle", tok.line, tok.column)
        dims.append(int(tok.text))
    if not dims:
        raise ParseError("au moins une couche attendue", cur.lineno, 1)
    total = sum(dims)
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    for lineno, tokens in lines:
        cur = _Cursor(tokens, lineno)
        kw = cur.take("bracket")
        if kw.kind != "name" or kw.text != "bracket":
            raise ParseError(f"'bracket' attendu, trouvé {kw.text!r}", kw.line, kw.column)
        left_tok = cur.take("vecteur de base")
        i = _basis_index(left_tok, total)
        j = _basis_index(cur.take("vecteur de base"), total)
        if i >= j:
            raise ParseError(f"paire ({i}, {j}) non ordonnée", left_tok.line, left_tok.column)
        if (i, j) in brackets:
            raise ParseError(f"paire ({i}, {j}) déjà définie", left_tok.line, left_tok.column)
        cur.expect("=")
        brackets[(i, j)] = _algebra_rhs(cur, total)
    alg = StratifiedAlgebra(tuple(dims), brackets)
    report = validate_algebra(alg)
    if not report.valid:
        raise InvalidAlgebra(report)
    return alg


def format_algebra(alg: StratifiedAlgebra) -> str:
    """Texte relisible par ``parse_algebra``."""
    out = ["layers " + " ".join(str(d) for d in alg.layer_dims)]
    for (i, j), row in sorted(alg.brackets.items()):
        terms = [(c, f"e{m}") for m, c in sorted(row.items()) if c]
        if not terms:
            continue
        rhs = []
        for pos, (c, e) in enumerate(terms):
            body = e if abs(c) == 1 else f"{abs(c)}*{e}"
            if pos == 0:
                rhs.append(body if c > 0 else f"-{body}")
            else:
                rhs.append(f"{'+' if c > 0 else '-'} {body}")
        out.append(f"bracket e{i} e{j} = {' '.join(rhs)}")
    return "\n".join(out) + "\n"

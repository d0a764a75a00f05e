"""Exact symbolic expressions over base, jet, parameter, and covector variables.

Expressions are kept in a normal form at all times: a sum of monomials
with rational coefficients, where a monomial is a product of atoms with
positive integer exponents.  Atoms are variables, opaque primitive
applications like sin(...) or a registered K(...), and reciprocals of
polynomial expressions (the quotient node).  Only the polynomial and
rational structure is canonicalized; primitive applications stay opaque,
so structural equality is exact precisely where the linear algebra
downstream needs it (coefficient extraction, zero tests) without doing
general simplification.

Coefficients are `fractions.Fraction` throughout, so every code path
that feeds a rank or kernel computation stays exact as long as the
expression is free of transcendental primitives.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .mindex import MultiIndex


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message, text=None, pos=None):
        if pos is not None:
            message = "%s (at position %d)" % (message, pos)
        super().__init__(message)
        self.pos = pos
        self.text = text


class EvaluationError(ExprError):
    pass


class EvalZeroDivision(EvaluationError):
    """A quotient payload evaluated to zero at the requested point."""


class DifferentiationError(ExprError):
    pass


# ---------------------------------------------------------------------------
# atoms

_RANK_BASE = 0
_RANK_JET = 1
_RANK_PARAM = 2
_RANK_COVECTOR = 3
_RANK_PRIM = 4
_RANK_RECIP = 5


class Atom:
    """Common behavior for the multiplicative building blocks of monomials."""

    __slots__ = ("key",)

    def __eq__(self, other):
        return isinstance(other, Atom) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return atom_str(self)


class VarRef(Atom):
    """A plain variable: base x_i, jet u^alpha_I, parameter, or covector xi_i."""

    __slots__ = ()


class BaseVar(VarRef):
    __slots__ = ("i",)

    def __init__(self, i):
        if i < 1:
            raise ValueError("base axis must be >= 1")
        object.__setattr__(self, "i", int(i))
        object.__setattr__(self, "key", (_RANK_BASE, (self.i,)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")


class JetVar(VarRef):
    __slots__ = ("alpha", "index")

    def __init__(self, alpha, index):
        index = MultiIndex(index)
        if alpha < 1:
            raise ValueError("fiber component must be >= 1")
        object.__setattr__(self, "alpha", int(alpha))
        object.__setattr__(self, "index", index)
        deg, neg = index.graded_lex_key()
        object.__setattr__(self, "key", (_RANK_JET, (deg,) + neg + (self.alpha,)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")


class ParamVar(VarRef):
    __slots__ = ("name",)

    def __init__(self, name):
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "key", (_RANK_PARAM, (self.name,)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")


class CovectorVar(VarRef):
    __slots__ = ("i",)

    def __init__(self, i):
        if i < 1:
            raise ValueError("covector axis must be >= 1")
        object.__setattr__(self, "i", int(i))
        object.__setattr__(self, "key", (_RANK_COVECTOR, (self.i,)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")


class PrimCall(Atom):
    """Opaque application of a registered analytic primitive to one argument."""

    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        arg = as_expr(arg)
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "key", (_RANK_PRIM, (self.name, arg.sort_key())))

    def __setattr__(self, *a):
        raise AttributeError("immutable")


class Recip(Atom):
    """Reciprocal of a reciprocal-free expression (the quotient node).

    The payload is normalized to have leading coefficient 1, so that
    equal quotients get equal atoms.
    """

    __slots__ = ("payload",)

    def __init__(self, payload):
        payload = as_expr(payload)
        if payload.is_zero():
            raise ZeroDivisionError("division by the zero expression")
        if payload.has_recip():
            raise ExprError("nested quotients are not supported")
        object.__setattr__(self, "payload", payload)
        object.__setattr__(self, "key", (_RANK_RECIP, (payload.sort_key(),)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")


# ---------------------------------------------------------------------------
# expressions


def _merge_monomials(m1, m2):
    # both sorted by atom key; exponents are positive so nothing cancels
    out = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        a1, e1 = m1[i]
        a2, e2 = m2[j]
        if a1.key == a2.key:
            out.append((a1, e1 + e2))
            i += 1
            j += 1
        elif a1.key < a2.key:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


class Expr:
    """Immutable normalized expression; all arithmetic returns new values."""

    __slots__ = ("_terms", "_key")

    def __init__(self, terms=None):
        self._terms = dict(terms) if terms else {}
        self._key = None

    @classmethod
    def _make(cls, terms):
        e = cls.__new__(cls)
        e._terms = {m: c for m, c in terms.items() if c != 0}
        e._key = None
        return e

    @classmethod
    def const(cls, value):
        c = Fraction(value)
        if c == 0:
            return ZERO
        return cls._make({(): c})

    @classmethod
    def variable(cls, v):
        if not isinstance(v, Atom):
            raise TypeError("expected an atom, got %r" % (v,))
        return cls._make({((v, 1),): Fraction(1)})

    # -- inspection

    def terms(self):
        """Canonically ordered (monomial, coefficient) pairs."""
        return sorted(self._terms.items(), key=lambda mc: _mono_key(mc[0]))

    def sort_key(self):
        if self._key is None:
            self._key = tuple(
                (_mono_key(m), (c.numerator, c.denominator)) for m, c in self.terms()
            )
        return self._key

    def is_zero(self):
        return not self._terms

    def is_constant(self):
        return all(m == () for m in self._terms)

    def constant_value(self):
        if not self.is_constant():
            raise ExprError("not a constant: %s" % self)
        return self._terms.get((), Fraction(0))

    def has_recip(self):
        return any(
            isinstance(a, Recip) or (isinstance(a, PrimCall) and a.arg.has_recip())
            for m in self._terms
            for a, _ in m
        )

    def has_primitive(self):
        for m in self._terms:
            for a, _ in m:
                if isinstance(a, PrimCall):
                    return True
                if isinstance(a, Recip) and a.payload.has_primitive():
                    return True
        return False

    def is_polynomial(self):
        """True when the expression is a polynomial in plain variables."""
        return not self.has_recip() and not self.has_primitive()

    def free_vars(self):
        out = set()
        for m in self._terms:
            for a, _ in m:
                if isinstance(a, VarRef):
                    out.add(a)
                elif isinstance(a, PrimCall):
                    out |= a.arg.free_vars()
                elif isinstance(a, Recip):
                    out |= a.payload.free_vars()
        return out

    def jet_vars(self):
        return sorted(
            (v for v in self.free_vars() if isinstance(v, JetVar)), key=lambda v: v.key
        )

    def max_jet_degree(self):
        degs = [v.index.degree for v in self.free_vars() if isinstance(v, JetVar)]
        return max(degs, default=-1)

    def coefficient_of(self, v):
        """d(self)/dv for affine occurrences; exact linear coefficient."""
        return differentiate(self, v)

    # -- arithmetic

    def __add__(self, other):
        other = as_expr(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            s = terms.get(m, _F0) + c
            if s == 0:
                terms.pop(m, None)
            else:
                terms[m] = s
        return Expr._make(terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr._make({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) + (-self)

    def __mul__(self, other):
        other = as_expr(other)
        if not self._terms or not other._terms:
            return ZERO
        terms = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _merge_monomials(m1, m2)
                s = terms.get(m, _F0) + c1 * c2
                if s == 0:
                    terms.pop(m, None)
                else:
                    terms[m] = s
        return Expr._make(terms)

    __rmul__ = __mul__

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            return inverse(self) ** (-n)
        result = ONE
        square = self
        while n:
            if n & 1:
                result = result * square
            n >>= 1
            if n:
                square = square * square
        return result

    def __truediv__(self, other):
        return self * inverse(as_expr(other))

    def __rtruediv__(self, other):
        return as_expr(other) * inverse(self)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = as_expr(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.sort_key() == other.sort_key()

    def __hash__(self):
        return hash(self.sort_key())

    def __str__(self):
        return format_expr(self)

    def __repr__(self):
        return "Expr(%s)" % format_expr(self)


def _mono_key(m):
    return tuple((a.key, e) for a, e in m)


_F0 = Fraction(0)
ZERO = Expr()
ONE = Expr({(): Fraction(1)})


def as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, Atom):
        return Expr.variable(x)
    if isinstance(x, (int, Fraction)):
        return Expr.const(x)
    raise TypeError("cannot coerce %r to an expression" % (x,))


def base(i):
    return Expr.variable(BaseVar(i))


def jet(alpha, index):
    return Expr.variable(JetVar(alpha, index))


def param(name):
    return Expr.variable(ParamVar(name))


def covector(i):
    return Expr.variable(CovectorVar(i))


def inverse(e):
    """1/e.  Monomials invert factorwise; rational expressions are
    cleared to a single quotient; general sums become one Recip atom."""
    e = as_expr(e)
    if e.is_zero():
        raise ZeroDivisionError("division by the zero expression")
    if e.is_constant():
        return Expr.const(Fraction(1) / e.constant_value())
    items = e.terms()
    if len(items) == 1:
        mono, c = items[0]
        out = Expr.const(Fraction(1) / c)
        for a, exp in mono:
            if isinstance(a, Recip):
                out = out * a.payload**exp
            else:
                out = out * Expr.variable(Recip(Expr.variable(a))) ** exp
        return out
    if e.has_recip():
        p, d = clear_denominators(e)
        if p.has_recip():
            raise ExprError("cannot invert quotients inside primitive arguments")
        return d * inverse(p)
    lead = items[0][1]
    return Expr.const(Fraction(1) / lead) * Expr.variable(Recip(e * Fraction(1, 1) / lead))


# ---------------------------------------------------------------------------
# primitive registry


class PrimitiveDef:
    def __init__(self, name, derivative=None, float_impl=None):
        self.name = name
        self.derivative = derivative  # callable Expr -> Expr, or None
        self.float_impl = float_impl  # callable float -> float, or None


_REGISTRY = {}


def register_primitive(name, derivative=None, derivative_name=None, float_impl=None):
    """Register a univariate smooth primitive.

    `derivative` is a callable mapping the argument expression to the
    derivative expression; alternatively `derivative_name` registers an
    opaque primitive of that name as the derivative (further derivatives
    of it are an error until registered themselves).
    """
    if derivative is None and derivative_name is not None:
        if derivative_name not in _REGISTRY:
            _REGISTRY[derivative_name] = PrimitiveDef(derivative_name)
        derivative = lambda arg: prim(derivative_name, arg)  # noqa: E731
    _REGISTRY[name] = PrimitiveDef(name, derivative, float_impl)


def primitive_registered(name):
    return name in _REGISTRY


def prim(name, arg):
    if name not in _REGISTRY:
        raise ExprError("unregistered primitive %r" % name)
    return Expr.variable(PrimCall(name, as_expr(arg)))


register_primitive("sin", derivative=lambda a: prim("cos", a), float_impl=math.sin)
register_primitive("cos", derivative=lambda a: -prim("sin", a), float_impl=math.cos)
register_primitive("exp", derivative=lambda a: prim("exp", a), float_impl=math.exp)


# ---------------------------------------------------------------------------
# calculus


def _atom_derivative(a, v):
    if isinstance(a, VarRef):
        return ONE if a == v else ZERO
    if isinstance(a, PrimCall):
        inner = differentiate(a.arg, v)
        if inner.is_zero():
            return ZERO
        rule = _REGISTRY[a.name].derivative
        if rule is None:
            raise DifferentiationError(
                "primitive %r has no registered derivative rule" % a.name
            )
        return rule(a.arg) * inner
    if isinstance(a, Recip):
        inner = differentiate(a.payload, v)
        if inner.is_zero():
            return ZERO
        r = Expr.variable(a)
        return -inner * r * r
    raise TypeError(a)


def differentiate(e, v):
    """Exact partial derivative of e with respect to the variable v."""
    e = as_expr(e)
    if not isinstance(v, VarRef):
        raise TypeError("differentiation variable must be a VarRef")
    out = ZERO
    for mono, c in e._terms.items():
        for idx, (a, exp) in enumerate(mono):
            da = _atom_derivative(a, v)
            if da.is_zero():
                continue
            rest = list(mono)
            if exp == 1:
                rest.pop(idx)
            else:
                rest[idx] = (a, exp - 1)
            out = out + Expr._make({tuple(rest): c * exp}) * da
    return out


def substitute(e, bindings):
    """Simultaneous substitution of expressions for variables."""
    e = as_expr(e)
    if not bindings:
        return e
    bindings = {v: as_expr(x) for v, x in bindings.items()}
    out = ZERO
    for mono, c in e._terms.items():
        term = Expr.const(c)
        for a, exp in mono:
            term = term * _substitute_atom(a, bindings) ** exp
            if term.is_zero():
                break
        out = out + term
    return out


def _substitute_atom(a, bindings):
    if isinstance(a, VarRef):
        return bindings.get(a, Expr.variable(a))
    if isinstance(a, PrimCall):
        return Expr.variable(PrimCall(a.name, substitute(a.arg, bindings)))
    if isinstance(a, Recip):
        return inverse(substitute(a.payload, bindings))
    raise TypeError(a)


def evaluate(e, assignment, exact=True):
    """Evaluate at a point.  Exact mode returns a Fraction and refuses
    transcendental primitives; float mode returns a float."""
    e = as_expr(e)
    total = Fraction(0) if exact else 0.0
    for mono, c in e._terms.items():
        val = Fraction(c) if exact else float(c)
        for a, exp in mono:
            val = val * _evaluate_atom(a, assignment, exact) ** exp
        total = total + val
    return total


def _evaluate_atom(a, assignment, exact):
    if isinstance(a, VarRef):
        if a not in assignment:
            raise EvaluationError("no value assigned to %s" % atom_str(a))
        v = assignment[a]
        return Fraction(v) if exact else float(v)
    if isinstance(a, PrimCall):
        inner = _evaluate_atom_arg(a.arg, assignment, exact)
        if exact:
            raise EvaluationError(
                "exact evaluation of transcendental primitive %r" % a.name
            )
        impl = _REGISTRY[a.name].float_impl
        if impl is None:
            raise EvaluationError("primitive %r has no numeric implementation" % a.name)
        return impl(inner)
    if isinstance(a, Recip):
        inner = _evaluate_atom_arg(a.payload, assignment, exact)
        if inner == 0:
            raise EvalZeroDivision("division by zero while evaluating a quotient")
        return (Fraction(1) / inner) if exact else (1.0 / inner)
    raise TypeError(a)


def _evaluate_atom_arg(e, assignment, exact):
    return evaluate(e, assignment, exact=exact)


def clear_denominators(e):
    """Rewrite e == p / d with p free of quotient atoms.

    Returns (p, d) where d is the product of the distinct quotient
    payloads raised to their maximal exponents across the terms of e.
    Quotients hidden inside opaque primitive arguments are left alone.
    Multiplying by d is injective on rational expressions (the payloads
    are nonzero by construction), so e == 0 iff p == 0.
    """
    e = as_expr(e)
    payloads = {}
    for mono, _ in e._terms.items():
        for a, exp in mono:
            if isinstance(a, Recip):
                k = a.payload.sort_key()
                prev = payloads.get(k)
                if prev is None or exp > prev[1]:
                    payloads[k] = (a.payload, exp)
    if not payloads:
        return e, ONE
    order = sorted(payloads)
    out = ZERO
    for mono, c in e._terms.items():
        seen = {}
        plain = []
        for a, exp in mono:
            if isinstance(a, Recip):
                seen[a.payload.sort_key()] = exp
            else:
                plain.append((a, exp))
        term = Expr._make({tuple(plain): c})
        for k in order:
            payload, top = payloads[k]
            deficit = top - seen.get(k, 0)
            if deficit:
                term = term * payload**deficit
        out = out + term
    d = ONE
    for k in order:
        payload, top = payloads[k]
        d = d * payload**top
    return out, d


def quotient_payloads(e):
    """Distinct quotient payloads at the top level of e, keyed by the
    payload sort key, with the maximal exponent seen across terms."""
    e = as_expr(e)
    out = {}
    for mono in e._terms:
        for a, exp in mono:
            if isinstance(a, Recip):
                k = a.payload.sort_key()
                if k not in out or exp > out[k][1]:
                    out[k] = (a.payload, exp)
    return out


def is_identically_zero(e):
    """Sound zero test for rational expressions: clears quotients, then
    tests the structural normal form.  With opaque primitives present a
    False result may still be semantically zero; True is always correct."""
    p, _ = clear_denominators(e)
    return p.is_zero()


# ---------------------------------------------------------------------------
# printing


def _format_fraction(c):
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


def _format_index(I):
    return "(" + ",".join(str(e) for e in I) + ")"


def atom_str(a):
    if isinstance(a, BaseVar):
        return "x%d" % a.i
    if isinstance(a, CovectorVar):
        return "xi%d" % a.i
    if isinstance(a, ParamVar):
        return a.name
    if isinstance(a, JetVar):
        head = "u" if a.alpha == 1 else "u%d" % a.alpha
        return "%s[%s]" % (head, _format_index(a.index))
    if isinstance(a, PrimCall):
        return "%s(%s)" % (a.name, format_expr(a.arg))
    if isinstance(a, Recip):
        return "1/(%s)" % format_expr(a.payload)
    raise TypeError(a)


def _format_term(mono, c):
    num = []
    den = []
    for a, exp in mono:
        if isinstance(a, Recip):
            s = "(%s)" % format_expr(a.payload)
            den.append(s if exp == 1 else "%s^%d" % (s, exp))
        else:
            s = atom_str(a)
            num.append(s if exp == 1 else "%s^%d" % (s, exp))
    parts = []
    if c != 1 or not num:
        parts.append(_format_fraction(c))
    parts.extend(num)
    text = "*".join(parts)
    for d in den:
        text += "/%s" % d
    return text


def format_expr(e):
    e = as_expr(e)
    items = e.terms()
    if not items:
        return "0"
    chunks = []
    for mono, c in items:
        if c < 0 and chunks:
            chunks.append(" - ")
            chunks.append(_format_term(mono, -c))
        else:
            if chunks:
                chunks.append(" + ")
            chunks.append(_format_term(mono, c))
    return "".join(chunks)


# ---------------------------------------------------------------------------
# parsing


class ExprContext:
    """Declarations an expression is parsed against: dimensions, chart
    order, parameter names, and whether covectors are allowed."""

    def __init__(self, m, n=1, order=0, params=(), allow_covectors=False):
        self.m = m
        self.n = n
        self.order = order
        self.params = set(params)
        self.allow_covectors = allow_covectors


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*'*)"
    r"|(?P<punct>\*\*|[()\[\],+\-*/^]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        msr = _TOKEN_RE.match(text, pos)
        if msr is None or msr.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError("unexpected character %r" % text[pos], text, pos)
        if msr.lastgroup is not None:
            kind = msr.lastgroup
            value = msr.group(kind)
            tokens.append((kind, value, msr.start(kind)))
        pos = msr.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, ctx):
        self.text = text
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.i = 0
        self.saw_decimal = False

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            raise ParseError("expected %r, found %r" % (value, val or "end"), self.text, pos)

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input %r" % val, self.text, pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if val == "+":
                self.next()
                e = e + self.term()
            elif val == "-":
                self.next()
                e = e - self.term()
            else:
                return e

    def term(self):
        e = self.power()
        while True:
            kind, val, pos = self.peek()
            if val == "*":
                self.next()
                e = e * self.power()
            elif val == "/":
                self.next()
                rhs = self.power()
                try:
                    e = e / rhs
                except ZeroDivisionError:
                    raise ParseError("division by zero", self.text, pos)
            else:
                return e

    def power(self):
        e = self.unary()
        kind, val, _ = self.peek()
        if val in ("^", "**"):
            self.next()
            e = e ** self.int_literal()
        return e

    def int_literal(self):
        sign = 1
        kind, val, pos = self.peek()
        if val == "-":
            self.next()
            sign = -1
        kind, val, pos = self.next()
        if kind != "number" or "." in val:
            raise ParseError("expected an integer exponent", self.text, pos)
        return sign * int(val)

    def unary(self):
        kind, val, _ = self.peek()
        if val == "-":
            self.next()
            return -self.unary()
        if val == "+":
            self.next()
            return self.unary()
        return self.postfix()

    def postfix(self):
        kind, val, pos = self.next()
        if kind == "number":
            if "." in val:
                self.saw_decimal = True
                return Expr.const(Fraction(val))
            return Expr.const(int(val))
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            return self.name(val, pos)
        raise ParseError("unexpected token %r" % (val or "end"), self.text, pos)

    def name(self, name, pos):
        ctx = self.ctx
        if name == "u" or (re.fullmatch(r"u\d+", name) and self.peek()[1] == "["):
            alpha = 1 if name == "u" else int(name[1:])
            return self.jet_variable(alpha, pos)
        mbase = re.fullmatch(r"x(\d+)", name)
        if mbase:
            i = int(mbase.group(1))
            if not 1 <= i <= ctx.m:
                raise ParseError("base variable %s out of range 1..%d" % (name, ctx.m), self.text, pos)
            return base(i)
        mcov = re.fullmatch(r"xi(\d+)", name)
        if mcov and ctx.allow_covectors:
            i = int(mcov.group(1))
            if not 1 <= i <= ctx.m:
                raise ParseError("covector %s out of range 1..%d" % (name, ctx.m), self.text, pos)
            return covector(i)
        if self.peek()[1] == "(":
            return self.call(name, pos)
        if name in ctx.params:
            return param(name)
        raise ParseError("undeclared identifier %r" % name, self.text, pos)

    def call(self, name, pos):
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.next()
            args.append(self.expr())
        self.expect(")")
        if name in self.ctx.params:
            # parameter functions may be written applied to the base point,
            # e.g. g11(x1, x2); the arguments must be the base tuple
            expected = [base(i + 1) for i in range(self.ctx.m)]
            if args != expected and args != [base(1)]:
                raise ParseError(
                    "parameter %r may only be applied to the base coordinates" % name,
                    self.text, pos,
                )
            return param(name)
        if primitive_registered(name):
            if len(args) != 1:
                raise ParseError("primitive %r takes one argument" % name, self.text, pos)
            return prim(name, args[0])
        raise ParseError("undeclared identifier %r" % name, self.text, pos)

    def jet_variable(self, alpha, pos):
        ctx = self.ctx
        self.expect("[")
        self.expect("(")
        entries = [self.int_entry()]
        while self.peek()[1] == ",":
            self.next()
            if self.peek()[1] == ")":
                break
            entries.append(self.int_entry())
        self.expect(")")
        self.expect("]")
        if alpha > ctx.n:
            raise ParseError("fiber component u%d exceeds fiber dimension %d" % (alpha, ctx.n), self.text, pos)
        if len(entries) != ctx.m:
            raise ParseError(
                "jet index %s has %d entries, expected %d" % (tuple(entries), len(entries), ctx.m),
                self.text, pos,
            )
        I = MultiIndex(entries)
        if I.degree > ctx.order:
            raise ParseError(
                "jet index %s exceeds order %d" % (_format_index(I), ctx.order),
                self.text, pos,
            )
        return jet(alpha, I)

    def int_entry(self):
        kind, val, pos = self.next()
        if kind != "number" or "." in val:
            raise ParseError("expected a nonnegative integer", self.text, pos)
        return int(val)


def parse_expr(text, ctx):
    """Parse an expression against the declared context.

    Raises ParseError with a position for syntax errors, undeclared
    identifiers, and jet indices beyond the declared order.
    """
    return _Parser(text, ctx).parse()


def parse_expr_flagged(text, ctx):
    """Like parse_expr but also reports whether a decimal literal occurred
    (decimal literals force float mode file-wide in the DSL)."""
    p = _Parser(text, ctx)
    e = p.parse()
    return e, p.saw_decimal


# ---------------------------------------------------------------------------
# seeded rational sampling (shared by property tests and samplers)


def random_rational(rng, bound=9, nonzero=False):
    while True:
        c = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        if not nonzero or c != 0:
            return c


def random_polynomial(rng, variables, degree=2, terms=3, bound=5):
    """Random polynomial expression in the given variables."""
    variables = list(variables)
    out = ZERO
    for _ in range(terms):
        mono = ONE
        for _ in range(rng.randint(0, degree)):
            mono = mono * Expr.variable(rng.choice(variables))
        out = out + Expr.const(random_rational(rng, bound)) * mono
    return out

"""Instances, restrictions and query-access models over the {-1,+1} hypercube.

Models are written in a small s-expression language::

    (or x0 (and x1 (not x2))) d=3
    (tree 4 (xor x1 x2) (const +1)) d=8
    (table e8) d=3

``xor`` is the product of its arguments' signs; ``and``/``or`` treat +1 as true.
A ``table`` literal is a hex integer whose bit ``c`` is set when the instance with
code ``c`` maps to +1 (see :func:`instance_code`), so the most significant bit is
the all-+1 corner.
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TABLE_MAX_DIM = 20


class ModelError(ValueError):
    pass


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class DimensionError(ModelError):
    pass


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

def as_instance(x, d: int | None = None) -> np.ndarray:
    """Validate and return ``x`` as an int8 vector of signs."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise DimensionError(f"instance must be one-dimensional, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise DimensionError(f"instance has length {arr.shape[0]}, model dimension is {d}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("instance entries must be -1 or +1")
    return arr.astype(np.int8)


def instance_from_bits(bits: str, d: int | None = None) -> np.ndarray:
    """Decode a '0'/'1' string (index 0 leftmost, '1' is +1)."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"instance string must be a nonempty 0/1 string, got {bits!r}")
    x = np.fromiter((1 if c == "1" else -1 for c in bits), dtype=np.int8, count=len(bits))
    return as_instance(x, d)


def instance_to_bits(x) -> str:
    return "".join("1" if v > 0 else "0" for v in np.asarray(x))


def instance_code(x) -> int:
    """Integer code of an instance: the bitstring of :func:`instance_to_bits` read in binary."""
    return int(instance_to_bits(x), 2) if len(x) else 0


def codes_of(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    weights = (1 << np.arange(d - 1, -1, -1, dtype=np.int64))
    return ((X > 0).astype(np.int64) * weights).sum(axis=1)


def all_instances(d: int) -> np.ndarray:
    """All ``2**d`` instances as rows, in code order."""
    codes = np.arange(1 << d, dtype=np.int64)
    shifts = np.arange(d - 1, -1, -1, dtype=np.int64)
    bits = (codes[:, None] >> shifts) & 1
    return (2 * bits - 1).astype(np.int8)


# ---------------------------------------------------------------------------
# Restrictions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Restriction:
    """Partial assignment of features, kept in insertion (root-to-node) order."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        seen = set()
        for i, v in self.pairs:
            if i in seen:
                raise ValueError(f"feature {i} assigned twice in restriction")
            if v not in (-1, 1):
                raise ValueError(f"restriction value for feature {i} must be -1 or +1, got {v}")
            if i < 0:
                raise ValueError(f"negative feature index {i}")
            seen.add(i)

    @classmethod
    def of(cls, assignments: Iterable[tuple[int, int]] | dict[int, int] = ()) -> "Restriction":
        items = assignments.items() if isinstance(assignments, dict) else assignments
        return cls(tuple((int(i), int(v)) for i, v in items))

    @classmethod
    def from_instance(cls, x, features: Iterable[int]) -> "Restriction":
        return cls(tuple((int(i), int(x[i])) for i in features))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def features(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def extend(self, i: int, value: int) -> "Restriction":
        return Restriction(self.pairs + ((int(i), int(value)),))

    def union(self, other: "Restriction") -> "Restriction":
        return Restriction(self.pairs + other.pairs)

    def canonical(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.pairs))

    def key(self) -> str:
        """Order-independent encoding, e.g. ``"3+,7-"``."""
        return ",".join(f"{i}{'+' if v > 0 else '-'}" for i, v in self.canonical())

    def check_dimension(self, d: int) -> None:
        for i, _ in self.pairs:
            if i >= d:
                raise DimensionError(f"feature index {i} out of range for dimension {d}")

    def agrees_with(self, x) -> bool:
        return all(int(x[i]) == v for i, v in self.pairs)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Copy of ``X`` (one instance or a batch) with the restricted coordinates overwritten."""
        if not self.pairs:
            return X
        X = np.array(X, copy=True)
        idx = [i for i, _ in self.pairs]
        X[..., idx] = np.array([v for _, v in self.pairs], dtype=X.dtype)
        return X

    def __str__(self) -> str:
        return "{" + ", ".join(f"x{i}={'+1' if v > 0 else '-1'}" for i, v in self.pairs) + "}"


# ---------------------------------------------------------------------------
# Expression AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    arg: "Node"


@dataclass(frozen=True)
class And:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Xor:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Maj:
    args: tuple["Node", "Node", "Node"]


@dataclass(frozen=True)
class Tree:
    index: int
    neg: "Node"
    pos: "Node"


@dataclass(frozen=True)
class Table:
    bits: int  # bit c set <=> instance with code c maps to +1


Node = Const | Var | Not | And | Or | Xor | Maj | Tree | Table


@dataclass(frozen=True)
class ModelExpr:
    root: Node
    dimension: int

    def __post_init__(self):
        _validate(self.root, self.dimension)

    def __str__(self) -> str:
        return format_model(self)


def _table_digits(d: int) -> int:
    return max(1, (1 << d) // 4)


def _validate(node: Node, d: int) -> None:
    if d < 0:
        raise DimensionError(f"dimension must be nonnegative, got {d}")
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Const):
            if n.value not in (-1, 1):
                raise ModelError(f"constant must be -1 or +1, got {n.value}")
        elif isinstance(n, Var):
            if not 0 <= n.index < d:
                raise DimensionError(f"variable x{n.index} out of range for d={d}")
        elif isinstance(n, Tree):
            if not 0 <= n.index < d:
                raise DimensionError(f"tree feature {n.index} out of range for d={d}")
            stack += [n.neg, n.pos]
        elif isinstance(n, Table):
            if d > TABLE_MAX_DIM:
                raise DimensionError(f"truth tables are capped at d <= {TABLE_MAX_DIM}, got d={d}")
            if n.bits < 0 or n.bits >> (1 << d):
                raise DimensionError(f"table literal does not fit 2^{d} entries")
        elif isinstance(n, Not):
            stack.append(n.arg)
        elif isinstance(n, (And, Or, Xor, Maj)):
            if not n.args:
                raise ModelError(f"{type(n).__name__.lower()} needs at least one argument")
            if isinstance(n, Maj) and len(n.args) != 3:
                raise ModelError("maj takes exactly three arguments")
            stack += list(n.args)
        else:
            raise TypeError(f"not a model node: {n!r}")


def format_model(expr: ModelExpr) -> str:
    """Canonical text of a model; ``parse_model(format_model(m)) == m``."""
    d = expr.dimension

    def fmt(n: Node) -> str:
        if isinstance(n, Const):
            return f"(const {'+1' if n.value > 0 else '-1'})"
        if isinstance(n, Var):
            return f"x{n.index}"
        if isinstance(n, Not):
            return f"(not {fmt(n.arg)})"
        if isinstance(n, Tree):
            return f"(tree {n.index} {fmt(n.neg)} {fmt(n.pos)})"
        if isinstance(n, Table):
            return f"(table {n.bits:0{_table_digits(d)}x})"
        name = type(n).__name__.lower()
        return f"({name} {' '.join(fmt(a) for a in n.args)})"

    return f"{fmt(expr.root)} d={d}"


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokenize(text: str):
    pos = 0
    line, line_start = 1, 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex)
        line += text.count("\n", pos, start)
        nl = text.rfind("\n", 0, start)
        line_start = nl + 1 if nl >= 0 else 0
        yield m.group(m.lastindex), line, start - line_start + 1
        pos = m.end()
    rest = text[pos:]
    if rest.strip():
        raise ModelSyntaxError("unexpected input", line, pos - line_start + 1)


_VAR = re.compile(r"x(\d+)$")
_ARITY = {"not": 1, "maj": 3}


def parse_model(text: str) -> ModelExpr:
    """Parse ``<expr> d=<int>`` into a validated :class:`ModelExpr`."""
    tokens = list(_tokenize(text))
    end = (1, 1)
    if tokens:
        last, ln, col = tokens[-1]
        end = (ln, col + len(last))
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ModelSyntaxError("unexpected end of input", *end)
        tok = tokens[pos]
        pos += 1
        return tok

    def integer(tok) -> int:
        s, ln, col = tok
        try:
            return int(s)
        except ValueError:
            raise ModelSyntaxError(f"expected an integer, got {s!r}", ln, col) from None

    def expr() -> Node:
        tok = take()
        s, ln, col = tok
        if s == ")":
            raise ModelSyntaxError("unexpected ')'", ln, col)
        if s != "(":
            m = _VAR.match(s)
            if m is None:
                raise ModelSyntaxError(f"expected an expression, got {s!r}", ln, col)
            return Var(int(m.group(1)))
        op, oln, ocol = take()
        if op == "const":
            v = take()
            if v[0] not in ("+1", "-1", "1"):
                raise ModelSyntaxError(f"constant must be +1 or -1, got {v[0]!r}", v[1], v[2])
            node: Node = Const(-1 if v[0] == "-1" else 1)
        elif op == "var":
            node = Var(integer(take()))
        elif op == "table":
            h = take()
            try:
                node = Table(int(h[0], 16))
            except ValueError:
                raise ModelSyntaxError(f"bad hex table literal {h[0]!r}", h[1], h[2]) from None
            node = (node, len(h[0]), h[1], h[2])  # digit count checked once d is known
        elif op == "tree":
            i = integer(take())
            node = Tree(i, expr(), expr())
        elif op in ("not", "and", "or", "xor", "maj"):
            args = []
            while peek() is not None and peek()[0] != ")":
                args.append(expr())
            want = _ARITY.get(op)
            if (want is not None and len(args) != want) or not args:
                raise ModelSyntaxError(
                    f"'{op}' takes {want if want else 'at least one'} argument(s), got {len(args)}",
                    oln, ocol)
            node = Not(args[0]) if op == "not" else {
                "and": And, "or": Or, "xor": Xor, "maj": Maj}[op](tuple(args))
        else:
            raise ModelSyntaxError(f"unknown operator {op!r}", oln, ocol)
        close = take()
        if close[0] != ")":
            raise ModelSyntaxError(f"expected ')', got {close[0]!r}", close[1], close[2])
        return node

    tables = []

    def unwrap(n):
        # pull table placeholders back out, remembering their source position
        if isinstance(n, tuple):
            tables.append(n)
            return n[0]
        if isinstance(n, Not):
            return Not(unwrap(n.arg))
        if isinstance(n, Tree):
            return Tree(n.index, unwrap(n.neg), unwrap(n.pos))
        if isinstance(n, (And, Or, Xor, Maj)):
            return type(n)(tuple(unwrap(a) for a in n.args))
        return n

    root = unwrap(expr())
    tok = take()
    m = re.fullmatch(r"d=(\d+)", tok[0])
    if m is None:
        raise ModelSyntaxError(f"expected 'd=<int>', got {tok[0]!r}", tok[1], tok[2])
    d = int(m.group(1))
    if pos != len(tokens):
        extra = tokens[pos]
        raise ModelSyntaxError(f"trailing input {extra[0]!r}", extra[1], extra[2])
    for table, ndigits, ln, col in tables:
        if d > TABLE_MAX_DIM:
            raise DimensionError(f"truth tables are capped at d <= {TABLE_MAX_DIM}, got d={d}")
        if ndigits != _table_digits(d) or table.bits >> (1 << d):
            raise DimensionError(
                f"table literal at line {ln}, column {col} must have {_table_digits(d)} hex "
                f"digit(s) encoding 2^{d} entries")
    return ModelExpr(root, d)


# ---------------------------------------------------------------------------
# Compilation to batched numpy evaluation
# ---------------------------------------------------------------------------

def table_labels(bits: int, d: int) -> np.ndarray:
    """Unpack a table literal into ``2**d`` signs indexed by instance code."""
    n = 1 << d
    raw = np.frombuffer(bits.to_bytes(max(1, (n + 7) // 8), "little"), dtype=np.uint8)
    flags = np.unpackbits(raw, bitorder="little")[:n]
    return (2 * flags.astype(np.int8) - 1)


def table_bits(labels: Sequence[int] | np.ndarray) -> int:
    flags = (np.asarray(labels) > 0).astype(np.uint8)
    return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")


def _compile(node: Node, d: int):
    if isinstance(node, Const):
        v = node.value
        return lambda X: np.full(X.shape[0], v, dtype=np.int8)
    if isinstance(node, Var):
        i = node.index
        return lambda X: X[:, i].astype(np.int8)
    if isinstance(node, Not):
        g = _compile(node.arg, d)
        return lambda X: -g(X)
    if isinstance(node, Table):
        labels = table_labels(node.bits, d)
        return lambda X: labels[codes_of(X)]
    if isinstance(node, Tree):
        i, neg, pos = node.index, _compile(node.neg, d), _compile(node.pos, d)
        return lambda X: np.where(X[:, i] > 0, pos(X), neg(X)).astype(np.int8)
    gs = [_compile(a, d) for a in node.args]
    if isinstance(node, And):
        return lambda X: np.where(np.all([g(X) > 0 for g in gs], axis=0), 1, -1).astype(np.int8)
    if isinstance(node, Or):
        return lambda X: np.where(np.any([g(X) > 0 for g in gs], axis=0), 1, -1).astype(np.int8)
    if isinstance(node, Xor):
        return lambda X: np.prod([g(X) for g in gs], axis=0).astype(np.int8)
    if isinstance(node, Maj):
        return lambda X: np.sign(np.sum([g(X) for g in gs], axis=0, dtype=np.int16)).astype(np.int8)
    raise TypeError(f"not a model node: {node!r}")


class QueryCounter:
    """Thread-safe monotone count of model evaluations."""

    def __init__(self):
        self._n = 0
        self._lock = threading.Lock()

    def add(self, n: int) -> None:
        with self._lock:
            self._n += n

    @property
    def count(self) -> int:
        return self._n

    def reset(self) -> None:
        with self._lock:
            self._n = 0


class BlackboxModel:
    """Query access to ``f : {-1,+1}^d -> {-1,+1}``.

    Subclasses implement :meth:`_evaluate_batch`; every instance passed through
    :meth:`evaluate_batch` is counted as one query on :attr:`counter`.
    """

    def __init__(self, dimension: int, counter: QueryCounter | None = None):
        self.dimension = dimension
        self.counter = counter if counter is not None else QueryCounter()

    @property
    def queries(self) -> int:
        return self.counter.count

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.int8)
        if X.ndim != 2 or X.shape[1] != self.dimension:
            raise DimensionError(
                f"expected a batch of shape (n, {self.dimension}), got {X.shape}")
        self.counter.add(X.shape[0])
        return self._evaluate_batch(X)

    def evaluate(self, x) -> int:
        x = as_instance(x, self.dimension)
        return int(self.evaluate_batch(x[None, :])[0])

    __call__ = evaluate

    def restrict(self, alpha: Restriction) -> "BlackboxModel":
        alpha.check_dimension(self.dimension)
        if not alpha.pairs:
            return self
        return RestrictedModel(self, alpha)

    def _evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ExprModel(BlackboxModel):
    def __init__(self, expr: ModelExpr, counter: QueryCounter | None = None):
        super().__init__(expr.dimension, counter)
        self.expr = expr
        self._fn = _compile(expr.root, expr.dimension)

    def _evaluate_batch(self, X):
        return self._fn(X)

    def __repr__(self):
        return f"ExprModel({format_model(self.expr)!r})"


class FunctionModel(BlackboxModel):
    """Wrap a vectorized callable ``(n, d) int8 -> (n,) signs``."""

    def __init__(self, fn, dimension: int, counter: QueryCounter | None = None):
        super().__init__(dimension, counter)
        self._fn = fn

    def _evaluate_batch(self, X):
        return np.asarray(self._fn(X), dtype=np.int8)


class RestrictedModel(BlackboxModel):
    """``f_alpha``: same dimension as the parent, with alpha's coordinates spliced in."""

    def __init__(self, parent: BlackboxModel, alpha: Restriction):
        super().__init__(parent.dimension, parent.counter)
        # flatten nested views so a chain of restrictions costs one splice
        if isinstance(parent, RestrictedModel):
            # the inner view already ignores its own coordinates
            fixed = set(parent.alpha.features)
            alpha = parent.alpha.union(Restriction(tuple(p for p in alpha if p[0] not in fixed)))
            parent = parent.parent
        self.parent = parent
        self.alpha = alpha

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.int8)
        if X.ndim != 2 or X.shape[1] != self.dimension:
            raise DimensionError(
                f"expected a batch of shape (n, {self.dimension}), got {X.shape}")
        return self.parent.evaluate_batch(self.alpha.apply(X))


def compile_model(source: str | ModelExpr, counter: QueryCounter | None = None) -> ExprModel:
    expr = parse_model(source) if isinstance(source, str) else source
    return ExprModel(expr, counter)


def evaluate(model: BlackboxModel | ModelExpr, x) -> int:
    if isinstance(model, ModelExpr):
        model = ExprModel(model)
    return model.evaluate(x)


def restrict(model: BlackboxModel, alpha: Restriction) -> BlackboxModel:
    return model.restrict(alpha)

"""
First-order formulas over relational signatures.

Concrete syntax::

    EX x. EX y. (R(x,y) & ~(x = y))
    ALL x. (P(x) | EX y. R(x,y))

Quantifier bodies extend as far right as possible, `~` binds tightest,
then `&`, then `|`; chains of the same connective parse to one n-ary node.
`TRUE` and `FALSE` denote the empty conjunction and disjunction.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import BoundExceeded, SignatureMismatch
from .graphparams import tree_depth
from .structures import Signature, Structure, gaifman

MODEL_TABLE_MAX_BITS = 20


class Formula:
    """Base class of the AST nodes."""

    __slots__ = ()

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return render(self)


@dataclass(frozen=True, eq=True)
class Atom(Formula):
    rel: str
    args: tuple


@dataclass(frozen=True, eq=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True, eq=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, eq=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True, eq=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True, eq=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = And(())
FALSE = Or(())


def exists(vars_, body):
    for v in reversed(list(vars_)):
        body = Exists(v, body)
    return body


def forall(vars_, body):
    for v in reversed(list(vars_)):
        body = Forall(v, body)
    return body


def conj(args):
    args = tuple(args)
    return args[0] if len(args) == 1 else And(args)


def disj(args):
    args = tuple(args)
    return args[0] if len(args) == 1 else Or(args)


# -- parsing -------------------------------------------------------------------


class FormulaSyntaxError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(EX|ALL|TRUE|FALSE)\b|([A-Za-z_][A-Za-z0-9_']*)|(\S))")


def _tokenize(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1):
            out.append(("kw", m.group(1), m.start(1)))
        elif m.group(2):
            out.append(("id", m.group(2), m.start(2)))
        elif m.group(3):
            out.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            got = tok[1] if tok[1] is not None else "end of input"
            raise FormulaSyntaxError(f"expected {want!r}, got {got!r}", tok[2])
        self.i += 1
        return tok

    def formula(self):
        tok = self.peek()
        if tok[0] == "kw" and tok[1] in ("EX", "ALL"):
            self.take()
            var = self.take("id")[1]
            self.take("op", ".")
            body = self.formula()
            return Exists(var, body) if tok[1] == "EX" else Forall(var, body)
        return self.disjunction()

    def disjunction(self):
        args = [self.conjunction()]
        while self.peek()[:2] == ("op", "|"):
            self.take()
            args.append(self.conjunction_or_quantifier())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conjunction_or_quantifier(self):
        tok = self.peek()
        if tok[0] == "kw" and tok[1] in ("EX", "ALL"):
            return self.formula()
        return self.conjunction()

    def conjunction(self):
        args = [self.unary()]
        while self.peek()[:2] == ("op", "&"):
            self.take()
            tok = self.peek()
            if tok[0] == "kw" and tok[1] in ("EX", "ALL"):
                args.append(self.formula())
                break
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self):
        tok = self.peek()
        if tok[:2] == ("op", "~"):
            self.take()
            nxt = self.peek()
            if nxt[0] == "kw" and nxt[1] in ("EX", "ALL"):
                return Not(self.formula())
            return Not(self.unary())
        if tok[:2] == ("op", "("):
            self.take()
            inner = self.formula()
            self.take("op", ")")
            return inner
        if tok[0] == "kw" and tok[1] == "TRUE":
            self.take()
            return TRUE
        if tok[0] == "kw" and tok[1] == "FALSE":
            self.take()
            return FALSE
        if tok[0] == "kw":
            # a quantifier in operand position without parentheses
            return self.formula()
        if tok[0] == "id":
            name = self.take()[1]
            if self.peek()[:2] == ("op", "("):
                self.take()
                args = [self.take("id")[1]]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.take("id")[1])
                self.take("op", ")")
                return Atom(name, tuple(args))
            self.take("op", "=")
            right = self.take("id")[1]
            return Eq(name, right)
        got = tok[1] if tok[1] is not None else "end of input"
        raise FormulaSyntaxError(f"unexpected {got!r}", tok[2])


def parse_formula(text, signature=None, sentence=False):
    """Parse `text` into a Formula.

    Arities are checked against `signature` when given, otherwise only for
    consistency between uses.  With sentence=True free variables are an error.
    """
    p = _Parser(text)
    phi = p.formula()
    tok = p.peek()
    if tok[0] != "end":
        raise FormulaSyntaxError(f"unexpected {tok[1]!r}", tok[2])
    infer_signature(phi, signature)
    if sentence and free_variables(phi):
        raise ValueError(f"sentence has free variables {sorted(free_variables(phi))}")
    return phi


def parse_sentence(text, signature=None):
    return parse_formula(text, signature, sentence=True)


def parse_formula_file(text):
    """Formula file: optional `signature R/2 ...` line, then the sentence.

    Returns (sentence, signature).
    """
    lines = []
    signature = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith("signature"):
            signature = Signature.of(*line.split()[1:])
        elif line:
            lines.append(line)
    phi = parse_sentence(" ".join(lines), signature)
    return phi, infer_signature(phi, signature)


def infer_signature(phi, signature=None):
    seen = {}
    for node in walk(phi):
        if isinstance(node, Atom):
            a = len(node.args)
            if signature is not None:
                try:
                    want = signature.arity(node.rel)
                except KeyError:
                    raise SignatureMismatch(f"relation {node.rel!r} not in signature {signature}") from None
                if want != a:
                    raise SignatureMismatch(f"{node.rel} used with arity {a}, signature says {want}")
            elif seen.setdefault(node.rel, a) != a:
                raise SignatureMismatch(f"{node.rel} used with arities {seen[node.rel]} and {a}")
    if signature is not None:
        return signature
    if not seen:
        return Signature((("R", 2),))
    return Signature(tuple(seen.items()))


# -- rendering -----------------------------------------------------------------


def render(phi):
    if isinstance(phi, Atom):
        return f"{phi.rel}({','.join(phi.args)})"
    if isinstance(phi, Eq):
        return f"{phi.left} = {phi.right}"
    if isinstance(phi, Not):
        return "~" + _operand(phi.arg)
    if isinstance(phi, And):
        if not phi.args:
            return "TRUE"
        return "(" + " & ".join(_operand(a) for a in phi.args) + ")"
    if isinstance(phi, Or):
        if not phi.args:
            return "FALSE"
        return "(" + " | ".join(_operand(a) for a in phi.args) + ")"
    if isinstance(phi, Exists):
        return f"EX {phi.var}. {render(phi.body)}"
    if isinstance(phi, Forall):
        return f"ALL {phi.var}. {render(phi.body)}"
    raise TypeError(phi)


def _operand(phi):
    s = render(phi)
    if isinstance(phi, (Exists, Forall, Eq)):
        return "(" + s + ")"
    return s


# -- structural metrics ----------------------------------------------------------


def children(phi):
    if isinstance(phi, (And, Or)):
        return phi.args
    if isinstance(phi, Not):
        return (phi.arg,)
    if isinstance(phi, (Exists, Forall)):
        return (phi.body,)
    return ()


def walk(phi):
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def free_variables(phi):
    if isinstance(phi, Atom):
        return frozenset(phi.args)
    if isinstance(phi, Eq):
        return frozenset((phi.left, phi.right))
    if isinstance(phi, (Exists, Forall)):
        return free_variables(phi.body) - {phi.var}
    return frozenset().union(*(free_variables(c) for c in children(phi)))


def quantifier_rank(phi):
    if isinstance(phi, (Exists, Forall)):
        return 1 + quantifier_rank(phi.body)
    return max((quantifier_rank(c) for c in children(phi)), default=0)


def variable_width(phi):
    """Largest number of free variables of any sub-formula."""
    return max(len(free_variables(node)) for node in walk(phi))


def connective_block(phi):
    """Largest operand count of an and/or block after flattening same-type chains."""
    best = 1
    for node in walk(nnf(phi)):
        if isinstance(node, (And, Or)):
            best = max(best, len(_flatten(node)))
    return best


def _flatten(node):
    out = []
    for a in node.args:
        if type(a) is type(node) and a.args:
            out.extend(_flatten(a))
        else:
            out.append(a)
    return out


@dataclass(frozen=True)
class Classification:
    positive: bool
    existential: bool
    existential_positive: bool


def classify(phi):
    positive = not any(isinstance(n, Not) for n in walk(phi))
    no_universal = not any(isinstance(n, Forall) for n in walk(phi))
    existential = no_universal and not _negation_outside_quantifiers(phi)
    return Classification(positive, existential, positive and existential)


def _negation_outside_quantifiers(phi):
    if isinstance(phi, Not):
        return True
    if isinstance(phi, (Exists, Forall)):
        return False
    return any(_negation_outside_quantifiers(c) for c in children(phi))


def nnf(phi, negate=False):
    """Negation normal form: negations only directly above atoms."""
    if isinstance(phi, (Atom, Eq)):
        return Not(phi) if negate else phi
    if isinstance(phi, Not):
        return nnf(phi.arg, not negate)
    if isinstance(phi, And):
        args = tuple(nnf(a, negate) for a in phi.args)
        return Or(args) if negate else And(args)
    if isinstance(phi, Or):
        args = tuple(nnf(a, negate) for a in phi.args)
        return And(args) if negate else Or(args)
    if isinstance(phi, Exists):
        body = nnf(phi.body, negate)
        return Forall(phi.var, body) if negate else Exists(phi.var, body)
    if isinstance(phi, Forall):
        body = nnf(phi.body, negate)
        return Exists(phi.var, body) if negate else Forall(phi.var, body)
    raise TypeError(phi)


# -- semantics -------------------------------------------------------------------


def evaluate(phi, A, env=None):
    """A |= phi under the assignment env (variable name -> element)."""
    env = dict(env or {})
    missing = free_variables(phi) - set(env)
    if missing:
        raise ValueError(f"free variables {sorted(missing)} not assigned")
    rels = dict(zip(A.signature.names, A.relations))
    for node in walk(phi):
        if isinstance(node, Atom):
            if node.rel not in rels:
                raise SignatureMismatch(f"relation {node.rel!r} not in structure signature")
            if len(node.args) != A.signature.arity(node.rel):
                raise SignatureMismatch(f"{node.rel} used with wrong arity")
    return _eval(phi, rels, A.size, env)


def _eval(phi, rels, n, env):
    if isinstance(phi, Atom):
        return tuple(env[x] for x in phi.args) in rels[phi.rel]
    if isinstance(phi, Eq):
        return env[phi.left] == env[phi.right]
    if isinstance(phi, Not):
        return not _eval(phi.arg, rels, n, env)
    if isinstance(phi, And):
        return all(_eval(a, rels, n, env) for a in phi.args)
    if isinstance(phi, Or):
        return any(_eval(a, rels, n, env) for a in phi.args)
    if isinstance(phi, (Exists, Forall)):
        saved = env.get(phi.var, None)
        had = phi.var in env
        test = any if isinstance(phi, Exists) else all
        result = test(_eval_with(phi.body, rels, n, env, phi.var, a) for a in range(n))
        if had:
            env[phi.var] = saved
        else:
            env.pop(phi.var, None)
        return result
    raise TypeError(phi)


def _eval_with(body, rels, n, env, var, value):
    env[var] = value
    return _eval(body, rels, n, env)


def model_table(phi, n, signature=None, max_bits=MODEL_TABLE_MAX_BITS):
    """MODEL_{phi,n} as a boolean array indexed by the encoding integer.

    Entry e is True iff decode(e) satisfies phi, where bit i of e is the
    i-th encoding bit.  Evaluation recurses over phi once, carrying a vector
    of truth values over all encodings at each node.
    """
    sig = infer_signature(phi, signature)
    if free_variables(phi):
        raise ValueError("model_table needs a sentence")
    length = sig.encoding_length(n)
    if length > max_bits:
        raise BoundExceeded(f"MODEL table at n={n} has {length} input bits > {max_bits}")
    idx = np.arange(1 << length, dtype=np.int64)
    offsets = {}
    off = 0
    for name, arity in sig.relations:
        offsets[name] = off
        off += n**arity
    columns = {}

    def column(bit):
        if bit not in columns:
            columns[bit] = ((idx >> bit) & 1).astype(bool)
        return columns[bit]

    ones = np.ones(1 << length, dtype=bool)

    def rec(node, env):
        if isinstance(node, Atom):
            pos = 0
            for x in node.args:
                pos = pos * n + env[x]
            return column(offsets[node.rel] + pos)
        if isinstance(node, Eq):
            return ones if env[node.left] == env[node.right] else ~ones
        if isinstance(node, Not):
            return ~rec(node.arg, env)
        if isinstance(node, And):
            out = ones
            for a in node.args:
                out = out & rec(a, env)
            return out
        if isinstance(node, Or):
            out = ~ones
            for a in node.args:
                out = out | rec(a, env)
            return out
        if isinstance(node, (Exists, Forall)):
            parts = [rec(node.body, {**env, node.var: a}) for a in range(n)]
            if isinstance(node, Exists):
                return np.logical_or.reduce(parts)
            return np.logical_and.reduce(parts)
        raise TypeError(node)

    return np.array(rec(phi, {}), dtype=bool)


# -- primitive-positive sentences -----------------------------------------------------


@dataclass(frozen=True)
class PPNode:
    """Conjunction of atoms and of existentially quantified sub-nodes.

    `children` holds (variable, PPNode) pairs meaning EX variable. node.
    """

    atoms: frozenset = frozenset()
    children: tuple = ()
    equalities: frozenset = frozenset()

    @property
    def qr(self):
        return max((1 + c.qr for _, c in self.children), default=0)

    def variables(self):
        out = []
        for v, c in self.children:
            out.append(v)
            out.extend(c.variables())
        return out

    def all_atoms(self):
        out = set(self.atoms)
        for _, c in self.children:
            out |= c.all_atoms()
        return out

    def all_equalities(self):
        out = set(self.equalities)
        for _, c in self.children:
            out |= c.all_equalities()
        return out

    def merge(self, other):
        return PPNode(self.atoms | other.atoms, self.children + other.children,
                      self.equalities | other.equalities)

    def substitute(self, old, new):
        def sub(x):
            return new if x == old else x
        atoms = frozenset(Atom(a.rel, tuple(sub(x) for x in a.args)) for a in self.atoms)
        eqs = set()
        for e in self.equalities:
            l, r = sub(e.left), sub(e.right)
            if l != r:
                eqs.add(Eq(*sorted((l, r))))
        kids = tuple((v, c.substitute(old, new)) for v, c in self.children)
        return PPNode(atoms, kids, frozenset(eqs))

    def to_formula(self):
        parts = sorted(self.atoms, key=render) + sorted(self.equalities, key=render)
        parts += [Exists(v, c.to_formula()) for v, c in self.children]
        return conj(parts) if parts else TRUE


@dataclass(frozen=True)
class PPSentence:
    """Existential closure of a conjunction of relational atoms.

    The quantification tree (`root`) records how the quantifiers nest, so
    the quantifier rank is the tree height rather than the variable count.
    """

    signature: Signature
    root: PPNode

    def __post_init__(self):
        if self.root.all_equalities():
            raise ValueError("primitive-positive sentences carry no equality atoms")
        seen = self.root.variables()
        if len(seen) != len(set(seen)):
            raise ValueError("quantified variables must be distinct")
        _check_scoping(self.root, frozenset())

    @property
    def prefix(self):
        return tuple(self.root.variables())

    @property
    def matrix(self):
        return frozenset(self.root.all_atoms())

    @property
    def qr(self):
        return self.root.qr

    def to_formula(self):
        return self.root.to_formula()

    def __str__(self):
        return render(self.to_formula())


def _check_scoping(node, scope):
    for a in node.atoms:
        if not set(a.args) <= scope:
            raise ValueError(f"atom {render(a)} uses variables outside its quantifier scope")
    for v, c in node.children:
        _check_scoping(c, scope | {v})


def _rename_apart(phi, counter, env):
    if isinstance(phi, Atom):
        return Atom(phi.rel, tuple(env.get(x, x) for x in phi.args))
    if isinstance(phi, Eq):
        return Eq(env.get(phi.left, phi.left), env.get(phi.right, phi.right))
    if isinstance(phi, And):
        return And(tuple(_rename_apart(a, counter, env) for a in phi.args))
    if isinstance(phi, Or):
        return Or(tuple(_rename_apart(a, counter, env) for a in phi.args))
    if isinstance(phi, Exists):
        fresh = f"{phi.var}_{next(counter)}"
        return Exists(fresh, _rename_apart(phi.body, counter, {**env, phi.var: fresh}))
    raise ValueError(f"not existential-positive: {render(phi)}")


def _pp_disjuncts(phi):
    if isinstance(phi, Atom):
        return [PPNode(atoms=frozenset([phi]))]
    if isinstance(phi, Eq):
        if phi.left == phi.right:
            return [PPNode()]
        return [PPNode(equalities=frozenset([Eq(*sorted((phi.left, phi.right)))]))]
    if isinstance(phi, Or):
        out = []
        for a in phi.args:
            out.extend(_pp_disjuncts(a))
        return out
    if isinstance(phi, And):
        out = [PPNode()]
        for a in phi.args:
            out = [x.merge(y) for x, y in itertools.product(out, _pp_disjuncts(a))]
        return out
    if isinstance(phi, Exists):
        return [_close(phi.var, d) for d in _pp_disjuncts(phi.body)]
    raise TypeError(phi)


def _close(var, node):
    # inner quantifiers have already absorbed equalities on their own
    # variables, so any equality mentioning var pairs it with an outer one
    for e in sorted(node.all_equalities(), key=render):
        if var in (e.left, e.right):
            other = e.right if e.left == var else e.left
            return node.substitute(var, other)
    return PPNode(children=((var, node),))


def to_pp_disjunction(phi, signature=None):
    """Rewrite an existential-positive sentence as a list of PP sentences.

    Disjunctions are distributed outwards and equalities removed by
    identifying variables; no output is deeper than the input.
    """
    if not classify(phi).existential_positive:
        raise ValueError("to_pp_disjunction needs an existential-positive sentence")
    if free_variables(phi):
        raise ValueError("to_pp_disjunction needs a sentence")
    sig = infer_signature(phi, signature)
    renamed = _rename_apart(phi, itertools.count(), {})
    out = []
    for node in _pp_disjuncts(renamed):
        assert not node.all_equalities()
        out.append(PPSentence(sig, _tidy_names(node)))
    return out


def _tidy_names(node):
    """Rename bound variables to x0, x1, ... in prefix order."""
    names = node.variables()
    mapping = {v: f"x{i}" for i, v in enumerate(names)}

    def rec(nd):
        atoms = frozenset(Atom(a.rel, tuple(mapping[x] for x in a.args)) for a in nd.atoms)
        return PPNode(atoms, tuple((mapping[v], rec(c)) for v, c in nd.children))

    return rec(node)


def pp_from_formula(phi, signature=None):
    """View a conjunctive existential-positive sentence as a single PP sentence."""
    parts = to_pp_disjunction(phi, signature)
    if len(parts) != 1:
        raise ValueError("formula has a disjunction; it is not primitive-positive")
    return parts[0]


def canonical_structure(psi):
    """Structure whose elements are psi's variables and whose tuples are its atoms."""
    if not isinstance(psi, PPSentence):
        psi = pp_from_formula(psi)
    variables = psi.prefix
    if not variables:
        raise ValueError("a PP sentence without variables has no canonical structure")
    index = {v: i for i, v in enumerate(variables)}
    tuples = {name: [] for name in psi.signature.names}
    for a in psi.matrix:
        tuples[a.rel].append(tuple(index[x] for x in a.args))
    return Structure.build(psi.signature, len(variables), tuples)


def pp_sentence_of(M, forest):
    """PP sentence describing M, with quantifiers nested along `forest`.

    Element v becomes variable x{v}; each tuple is placed at the deepest of
    its elements, which works because a valid elimination forest puts all
    elements of a tuple on one branch.
    """
    forest.validate(gaifman(M))
    depth = [forest.depth_of(v) for v in M.universe]
    placed = {v: [] for v in M.universe}
    for name, ts in zip(M.signature.names, M.relations):
        for t in ts:
            deepest = max(set(t), key=lambda x: (depth[x], x))
            placed[deepest].append(Atom(name, tuple(f"x{x}" for x in t)))

    def node(v):
        kids = tuple((f"x{c}", node(c)) for c in forest.children(v))
        return PPNode(frozenset(placed[v]), kids)

    root = PPNode(frozenset(), tuple((f"x{r}", node(r)) for r in forest.roots()))
    return PPSentence(M.signature, root)


def ep_sentence_of_class(mincores):
    """Existential-positive sentence defining the class generated by `mincores`."""
    if not mincores:
        return FALSE
    parts = []
    for M in mincores:
        _, forest = tree_depth(gaifman(M))
        parts.append(pp_sentence_of(M, forest).to_formula())
    return disj(parts)

"""Expression-tree genotype: representation, evaluation and variation operators.

A tree is represented by its root :class:`Node`.  Nodes are immutable after
construction, so subtrees are shared freely between trees; crossover and
mutation rebuild only the path from the root to the replaced subtree.

Function symbols:

* ``add sub mul div`` take two or more children; evaluation folds the
  children left to right (relevant for ``sub`` and ``div``).  Random
  generation only ever emits the binary form; the n-ary form exists so that
  parsed trees such as ``(+ a b c)`` are first-class values.
* ``sin cos tan exp log square sqrt`` take exactly one child.

Division is unprotected true division, ``log`` is the natural logarithm and
returns NaN for non-positive arguments, ``sqrt`` of a negative is NaN.
Non-finite values propagate through evaluation; invalid models are expected
to be penalised by the fitness function, not masked here.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterator, Sequence

import numpy as np

from .data import Dataset

UNARY_SYMBOLS: tuple[str, ...] = ("sin", "cos", "tan", "exp", "log", "square", "sqrt")
BINARY_SYMBOLS: tuple[str, ...] = ("add", "sub", "mul", "div")
DEFAULT_FUNCTION_SET: tuple[str, ...] = BINARY_SYMBOLS + UNARY_SYMBOLS

CONSTANT_LOW = -20.0
CONSTANT_HIGH = 20.0
DEFAULT_MAX_LENGTH = 100
DEFAULT_MAX_DEPTH = 17


class StructuralError(ValueError):
    """A tree is malformed for the requested operation (e.g. a variable
    index that the dataset does not have).  Distinct from numeric
    non-finiteness, which is a value, not an error."""


class Node:
    """One tree node; the root node stands for the whole tree.

    ``symbol`` is ``"const"``, ``"var"`` or a function symbol.  ``value``
    holds the constant value or the 0-based variable index.  ``size``,
    ``height`` and ``max_var`` are cached at construction so length checks,
    depth checks and evaluation preconditions are O(1).
    """

    __slots__ = ("symbol", "value", "children", "size", "height", "max_var")

    def __init__(self, symbol: str, value, children: tuple["Node", ...]):
        self.symbol = symbol
        self.value = value
        self.children = children
        if children:
            self.size = 1 + sum(c.size for c in children)
            self.height = 1 + max(c.height for c in children)
            self.max_var = max(c.max_var for c in children)
        else:
            self.size = 1
            self.height = 1
            self.max_var = value if symbol == "var" else -1

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __eq__(self, other) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        if self.symbol != other.symbol or self.size != other.size:
            return False
        if not self.children:
            return self.value == other.value
        return all(a == b for a, b in zip(self.children, other.children))

    __hash__ = None  # structural equality, not hashable

    def __repr__(self) -> str:
        if self.symbol == "const":
            return f"Node(const {self.value!r})"
        if self.symbol == "var":
            return f"Node(x{self.value})"
        return f"Node({self.symbol}, size={self.size})"


def constant(value: float) -> Node:
    return Node("const", float(value), ())


def variable(index: int) -> Node:
    if index < 0:
        raise StructuralError(f"variable index must be non-negative, got {index}")
    return Node("var", int(index), ())


def function(symbol: str, children: Sequence[Node]) -> Node:
    kids = tuple(children)
    if symbol in UNARY_SYMBOLS:
        if len(kids) != 1:
            raise StructuralError(f"'{symbol}' takes exactly 1 child, got {len(kids)}")
    elif symbol in BINARY_SYMBOLS:
        if len(kids) < 2:
            raise StructuralError(f"'{symbol}' takes at least 2 children, got {len(kids)}")
    else:
        raise StructuralError(f"unknown function symbol '{symbol}'")
    return Node(symbol, None, kids)


def length(tree: Node) -> int:
    """Total node count."""
    return tree.size


def depth(tree: Node) -> int:
    """Longest root-to-leaf path, counted in nodes (single node = 1)."""
    return tree.height


def iter_nodes(tree: Node) -> Iterator[Node]:
    """Pre-order traversal of all nodes."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def subtree_at(tree: Node, index: int) -> Node:
    """Subtree rooted at pre-order position ``index`` (root = 0)."""
    if not 0 <= index < tree.size:
        raise IndexError(f"node index {index} out of range for tree of size {tree.size}")
    node = tree
    while index > 0:
        index -= 1
        for child in node.children:
            if index < child.size:
                node = child
                break
            index -= child.size
    return node


def node_depth_at(tree: Node, index: int) -> int:
    """Depth (root = 1) of the node at pre-order position ``index``."""
    if not 0 <= index < tree.size:
        raise IndexError(f"node index {index} out of range for tree of size {tree.size}")
    node = tree
    d = 1
    while index > 0:
        index -= 1
        for child in node.children:
            if index < child.size:
                node = child
                d += 1
                break
            index -= child.size
    return d


def replace_subtree(tree: Node, index: int, replacement: Node) -> Node:
    """New tree with the subtree at pre-order position ``index`` replaced.

    Untouched subtrees are shared with the input tree.
    """
    if not 0 <= index < tree.size:
        raise IndexError(f"node index {index} out of range for tree of size {tree.size}")
    if index == 0:
        return replacement
    index -= 1
    new_children = []
    replaced = False
    for child in tree.children:
        if not replaced and index < child.size:
            new_children.append(replace_subtree(child, index, replacement))
            replaced = True
        else:
            if not replaced:
                index -= child.size
            new_children.append(child)
    return Node(tree.symbol, tree.value, tuple(new_children))


# --- evaluation ---------------------------------------------------------

def _log_nonpositive_nan(x):
    arr = np.asarray(x, dtype=float)
    positive = arr > 0.0
    return np.where(positive, np.log(np.where(positive, arr, 1.0)), np.nan)


_UNARY_IMPL: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": _log_nonpositive_nan,
    "square": np.square,
    "sqrt": np.sqrt,
}

_BINARY_IMPL: dict[str, Callable] = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.true_divide,
}


def _eval(node: Node, cols: list[np.ndarray]):
    symbol = node.symbol
    if symbol == "var":
        return cols[node.value]
    if symbol == "const":
        return node.value
    fold = _BINARY_IMPL.get(symbol)
    if fold is not None:
        kids = node.children
        acc = _eval(kids[0], cols)
        for child in kids[1:]:
            acc = fold(acc, _eval(child, cols))
        return acc
    return _UNARY_IMPL[symbol](_eval(node.children[0], cols))


def _finish_eval(tree: Node, out, n_rows: int) -> np.ndarray:
    if np.ndim(out) == 0:
        return np.full(n_rows, float(out))
    out = np.asarray(out, dtype=float)
    if tree.symbol == "var":
        out = out.copy()  # never hand back a view into X
    return out


def make_matrix_evaluator(X: np.ndarray) -> Callable[[Node], np.ndarray]:
    """Prepared evaluator over fixed rows, for scoring many trees.

    Splits the columns of ``X`` once; the returned callable behaves exactly
    like ``evaluate_matrix(tree, X)``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-d (rows x variables)")
    n_rows, n_cols = X.shape
    cols = [np.ascontiguousarray(X[:, j]) for j in range(n_cols)]

    def evaluate_tree(tree: Node) -> np.ndarray:
        if tree.max_var >= n_cols:
            raise StructuralError(
                f"tree uses variable x{tree.max_var} but data has {n_cols} columns"
            )
        with np.errstate(all="ignore"):
            out = _eval(tree, cols)
        return _finish_eval(tree, out, n_rows)

    return evaluate_tree


def evaluate_matrix(tree: Node, X: np.ndarray) -> np.ndarray:
    """Evaluate ``tree`` over the rows of matrix ``X`` (rows x variables)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-d (rows x variables)")
    if tree.max_var >= X.shape[1]:
        raise StructuralError(
            f"tree uses variable x{tree.max_var} but data has {X.shape[1]} columns"
        )
    cols = [X[:, j] for j in range(X.shape[1])]
    with np.errstate(all="ignore"):
        out = _eval(tree, cols)
    return _finish_eval(tree, out, X.shape[0])


def evaluate(tree: Node, data: Dataset, rows: np.ndarray | None = None) -> np.ndarray:
    """Evaluate ``tree`` on ``data``, one output per selected row.

    ``rows`` defaults to all rows.  Raises :class:`StructuralError` if the
    tree references a variable index the dataset does not have; numeric
    trouble (division by zero, log of a non-positive, overflow) yields
    non-finite values instead.
    """
    X = data.columns if rows is None else data.columns[rows]
    return evaluate_matrix(tree, X)


# --- random generation --------------------------------------------------

def _random_leaf(rng: np.random.Generator, n_variables: int) -> Node:
    if n_variables > 0 and rng.random() < 0.5:
        return variable(int(rng.integers(n_variables)))
    return constant(float(rng.uniform(CONSTANT_LOW, CONSTANT_HIGH)))


def _freeze(proto) -> Node:
    symbol, value, kids = proto
    if not kids:
        return Node(symbol, value, ())
    return Node(symbol, value, tuple(_freeze(k) for k in kids))


def random_tree(
    rng: np.random.Generator,
    function_set: Sequence[str] = DEFAULT_FUNCTION_SET,
    n_variables: int = 1,
    max_length: int = DEFAULT_MAX_LENGTH,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> Node:
    """Grow a random tree obeying both the length and the depth cap.

    PTC2-style: a target length is drawn uniformly from [1, max_length],
    then open slots are expanded breadth-first until the committed size
    reaches the target; remaining slots become leaves.  Expansion near the
    target is restricted to arities that cannot overshoot it, so the cap
    holds exactly.  Leaves are a variable (uniform index) or a constant
    (uniform in [-20, 20]) with equal probability.
    """
    if max_length < 1:
        raise ValueError("max_length must be >= 1")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    unary = [s for s in function_set if s in UNARY_SYMBOLS]
    binary = [s for s in function_set if s in BINARY_SYMBOLS]
    target = int(rng.integers(1, max_length + 1))
    if target == 1 or max_depth == 1 or not (unary or binary):
        return _random_leaf(rng, n_variables)

    # proto node: [symbol, value, children list]; slots reference the parent
    # child list so they can be filled in place.
    holder = [None]
    slots: deque = deque([(holder, 0, 1)])
    committed = 1
    while slots and committed < target:
        parent_kids, pos, d = slots.popleft()
        choices: list[str] = []
        if d < max_depth:
            if committed + 1 <= target:
                choices.extend(unary)
            if committed + 2 <= target:
                choices.extend(binary)
        if not choices:
            parent_kids[pos] = [*_leaf_proto(rng, n_variables)]
            continue
        symbol = choices[int(rng.integers(len(choices)))]
        arity = 1 if symbol in UNARY_SYMBOLS else 2
        kids = [None] * arity
        parent_kids[pos] = [symbol, None, kids]
        committed += arity
        for k in range(arity):
            slots.append((kids, k, d + 1))
    while slots:
        parent_kids, pos, _ = slots.popleft()
        parent_kids[pos] = [*_leaf_proto(rng, n_variables)]
    return _freeze(holder[0])


def _leaf_proto(rng: np.random.Generator, n_variables: int):
    leaf = _random_leaf(rng, n_variables)
    return (leaf.symbol, leaf.value, [])


# --- variation operators ------------------------------------------------

def _biased_cut_index(tree: Node, rng: np.random.Generator) -> int:
    """Pre-order index of a crossover point, 90% biased to internal nodes."""
    if tree.size == 1:
        return 0
    internal = []
    leaves = []
    for i, node in enumerate(iter_nodes(tree)):
        (internal if node.children else leaves).append(i)
    if internal and rng.random() < 0.9:
        return internal[int(rng.integers(len(internal)))]
    return leaves[int(rng.integers(len(leaves)))]


def crossover(
    parent1: Node,
    parent2: Node,
    rng: np.random.Generator,
    max_length: int = DEFAULT_MAX_LENGTH,
) -> Node:
    """Subtree crossover.

    Replaces a cut point of ``parent1`` (90% bias toward internal nodes
    when any exist) with a uniformly chosen subtree of ``parent2``.  Cut
    points are re-drawn up to 9 times if the child would exceed
    ``max_length``; after that the unmodified ``parent1`` is returned
    (nodes are immutable, so sharing is safe).
    """
    for _ in range(10):
        cut = _biased_cut_index(parent1, rng)
        removed = subtree_at(parent1, cut)
        donor = subtree_at(parent2, int(rng.integers(parent2.size)))
        if parent1.size - removed.size + donor.size <= max_length:
            return replace_subtree(parent1, cut, donor)
    return parent1


def _indices_of(tree: Node, kind: str) -> list[int]:
    if kind == "function":
        return [i for i, n in enumerate(iter_nodes(tree)) if n.children]
    return [i for i, n in enumerate(iter_nodes(tree)) if n.symbol == kind]


def mutate_symbol(
    tree: Node,
    rng: np.random.Generator,
    function_set: Sequence[str] = DEFAULT_FUNCTION_SET,
) -> Node:
    """Swap one function node's symbol for a different same-arity symbol."""
    candidates = _indices_of(tree, "function")
    if not candidates:
        return tree
    idx = candidates[int(rng.integers(len(candidates)))]
    node = subtree_at(tree, idx)
    pool = UNARY_SYMBOLS if node.symbol in UNARY_SYMBOLS else BINARY_SYMBOLS
    options = [s for s in function_set if s in pool and s != node.symbol]
    if not options:
        return tree
    symbol = options[int(rng.integers(len(options)))]
    return replace_subtree(tree, idx, Node(symbol, None, node.children))


def mutate_constant(tree: Node, rng: np.random.Generator) -> Node:
    """Additive N(0, 1) jitter on one uniformly chosen constant."""
    candidates = _indices_of(tree, "const")
    if not candidates:
        return tree
    idx = candidates[int(rng.integers(len(candidates)))]
    node = subtree_at(tree, idx)
    return replace_subtree(tree, idx, constant(node.value + rng.normal(0.0, 1.0)))


def mutate_variable(tree: Node, rng: np.random.Generator, n_variables: int) -> Node:
    """Reassign one uniformly chosen variable node to a different index."""
    candidates = _indices_of(tree, "var")
    if not candidates:
        return tree
    idx = candidates[int(rng.integers(len(candidates)))]
    node = subtree_at(tree, idx)
    if n_variables > 1:
        new_index = int(rng.integers(n_variables - 1))
        if new_index >= node.value:
            new_index += 1
    else:
        new_index = node.value
    return replace_subtree(tree, idx, variable(new_index))


def mutate_subtree(
    tree: Node,
    rng: np.random.Generator,
    n_variables: int,
    max_length: int = DEFAULT_MAX_LENGTH,
    max_depth: int = DEFAULT_MAX_DEPTH,
    function_set: Sequence[str] = DEFAULT_FUNCTION_SET,
) -> Node:
    """Replace one uniformly chosen subtree with a fresh random tree whose
    length and depth budgets keep the whole tree inside both caps."""
    idx = int(rng.integers(tree.size))
    old = subtree_at(tree, idx)
    at_depth = node_depth_at(tree, idx)
    budget_length = max(1, max_length - tree.size + old.size)
    budget_depth = max(1, max_depth - at_depth + 1)
    fresh = random_tree(rng, function_set, n_variables, budget_length, budget_depth)
    return replace_subtree(tree, idx, fresh)


def mutate(
    tree: Node,
    rng: np.random.Generator,
    n_variables: int,
    max_length: int = DEFAULT_MAX_LENGTH,
    max_depth: int = DEFAULT_MAX_DEPTH,
    function_set: Sequence[str] = DEFAULT_FUNCTION_SET,
) -> Node:
    """Apply one uniformly chosen mutation mode.

    Modes: (a) arity-preserving symbol change, (b) additive Gaussian
    jitter (sigma = 1) on one constant, (c) variable-index swap, (d)
    replacement of a random subtree by a fresh random tree sized to keep
    both caps.  Modes whose node kind is absent from the tree are excluded
    from the draw; (d) always applies.
    """
    modes = ["subtree"]
    if _indices_of(tree, "function"):
        modes.append("symbol")
    if _indices_of(tree, "const"):
        modes.append("jitter")
    if _indices_of(tree, "var"):
        modes.append("swap_var")
    mode = modes[int(rng.integers(len(modes)))]
    if mode == "symbol":
        return mutate_symbol(tree, rng, function_set)
    if mode == "jitter":
        return mutate_constant(tree, rng)
    if mode == "swap_var":
        return mutate_variable(tree, rng, n_variables)
    return mutate_subtree(tree, rng, n_variables, max_length, max_depth, function_set)

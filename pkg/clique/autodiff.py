"""
Define-by-run reverse-mode differentiation over dense numpy arrays.

Every primitive appends its output to the tape of its inputs and attaches a
`_backward` closure that pushes `out.grad` into the inputs' grads. A tape is
built fresh for each forward pass, so records are already in topological order
and `Tape.backward` only has to sweep them in reverse.
"""
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from clique.constants import LEAKY_SLOPE, FilterSpec
from clique.graph import Graph


class Var:
    __slots__ = ("value", "grad", "requires_grad", "name", "op", "tape", "_backward")

    def __init__(self, value, tape: "Tape", requires_grad=False, name=None, op="leaf"):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.zeros_like(self.value)
        self.requires_grad = requires_grad
        self.name = name
        self.op = op
        self.tape = tape
        self._backward = lambda: None

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        if isinstance(other, Var):
            return add(self, scale(other, -1.0))
        return add(self, -other)

    def __repr__(self):
        return f"Var(op={self.op}, shape={self.value.shape})"


class Tape:
    """Ordered record of the operations of one forward pass."""

    def __init__(self):
        self.records: List[Var] = []
        self.leaves: List[Var] = []

    def var(self, value, requires_grad=False, name=None) -> Var:
        leaf = Var(value, self, requires_grad=requires_grad, name=name)
        self.leaves.append(leaf)
        return leaf

    def record(self, value, parents: Sequence[Var], op: str) -> Var:
        out = Var(value, self, requires_grad=any(p.requires_grad for p in parents), op=op)
        self.records.append(out)
        return out

    def backward(self, root: Var) -> Dict[str, np.ndarray]:
        """Reverse sweep from a scalar root; returns grads of named requires_grad leaves."""
        if root.tape is not self:
            raise ValueError("Root does not belong to this tape")
        if root.value.size != 1:
            raise ValueError(f"Backward needs a scalar root, got shape {root.value.shape}")
        if not self.records:
            raise RuntimeError("Backward called before any forward operation was recorded")

        for var in self.leaves + self.records:
            var.grad = np.zeros_like(var.value)
        root.grad = np.ones_like(root.value)
        for var in reversed(self.records):
            if var.requires_grad:
                var._backward()

        return {
            leaf.name: leaf.grad
            for leaf in self.leaves
            if leaf.requires_grad and leaf.name is not None
        }


def backward(tape: Tape, root: Var) -> Dict[str, np.ndarray]:
    return tape.backward(root)


# --- Helpers ---
def _tape_of(*vars_: Var) -> Tape:
    tapes = {id(v.tape): v.tape for v in vars_}
    if len(tapes) != 1:
        raise ValueError("Vars from different tapes cannot be combined")
    return vars_[0].tape


def _check_shape(condition: bool, message: str):
    if not condition:
        raise ValueError(message)


# --- Primitives ---
def add(x: Var, y) -> Var:
    if not isinstance(y, Var):
        out = x.tape.record(x.value + y, (x,), "add_const")

        def _backward():
            x.grad += out.grad

        out._backward = _backward
        return out

    tape = _tape_of(x, y)
    _check_shape(x.shape == y.shape, f"add: shape mismatch {x.shape} vs {y.shape}")
    out = tape.record(x.value + y.value, (x, y), "add")

    def _backward():
        x.grad += out.grad
        y.grad += out.grad

    out._backward = _backward
    return out


def scale(x: Var, factor: float) -> Var:
    factor = float(factor)
    out = x.tape.record(factor * x.value, (x,), "scale")

    def _backward():
        x.grad += factor * out.grad

    out._backward = _backward
    return out


def total(x: Var) -> Var:
    out = x.tape.record(x.value.sum(), (x,), "total")

    def _backward():
        x.grad += out.grad * np.ones_like(x.value)

    out._backward = _backward
    return out


def inner(x: Var, y: Var) -> Var:
    """Scalar sum(x * y)."""
    tape = _tape_of(x, y)
    _check_shape(x.shape == y.shape, f"inner: shape mismatch {x.shape} vs {y.shape}")
    out = tape.record(np.sum(x.value * y.value), (x, y), "inner")

    def _backward():
        x.grad += out.grad * y.value
        y.grad += out.grad * x.value

    out._backward = _backward
    return out


def affine(x: Var, weights: Var, bias: Var) -> Var:
    """x @ weights + bias, with x (n, i), weights (i, o), bias (o,)."""
    tape = _tape_of(x, weights, bias)
    _check_shape(
        x.value.ndim == 2 and weights.value.ndim == 2 and x.shape[1] == weights.shape[0],
        f"affine: cannot multiply {x.shape} by {weights.shape}",
    )
    _check_shape(
        bias.shape == (weights.shape[1],),
        f"affine: bias shape {bias.shape} does not match {weights.shape[1]} outputs",
    )
    out = tape.record(x.value @ weights.value + bias.value, (x, weights, bias), "affine")

    def _backward():
        x.grad += out.grad @ weights.value.T
        weights.grad += x.value.T @ out.grad
        bias.grad += out.grad.sum(axis=0)

    out._backward = _backward
    return out


def sparse_op_apply(graph: Graph, spec: FilterSpec, x: Var) -> Var:
    """One fixed graph filter; the backward pass applies the filter's transpose."""
    _check_shape(x.shape[0] == graph.node_count, f"sparse_op_apply: {x.shape} rows != n")
    out = x.tape.record(graph.apply_filter(spec, x.value), (x,), f"filter[{spec.label}]")

    def _backward():
        x.grad += graph.apply_filter(spec, out.grad, transpose=True)

    out._backward = _backward
    return out


def filter_bank_apply(graph: Graph, filters: Sequence[FilterSpec], x: Var) -> List[Var]:
    """Every filter of the bank applied to x, sharing operator powers in the forward pass."""
    _check_shape(x.shape[0] == graph.node_count, f"filter_bank_apply: {x.shape} rows != n")
    outputs = []
    for spec, value in zip(filters, graph.apply_filter_bank(x.value, filters)):
        out = x.tape.record(value, (x,), f"filter[{spec.label}]")

        def _backward(out=out, spec=spec):
            x.grad += graph.apply_filter(spec, out.grad, transpose=True)

        out._backward = _backward
        outputs.append(out)
    return outputs


def concat_columns(*parts: Var) -> Var:
    tape = _tape_of(*parts)
    rows = {p.shape[0] for p in parts}
    _check_shape(
        len(rows) == 1 and all(p.value.ndim == 2 for p in parts),
        f"concat_columns: incompatible shapes {[p.shape for p in parts]}",
    )
    out = tape.record(np.hstack([p.value for p in parts]), parts, "concat")
    bounds = np.cumsum([0] + [p.shape[1] for p in parts])

    def _backward():
        for part, start, stop in zip(parts, bounds[:-1], bounds[1:]):
            part.grad += out.grad[:, start:stop]

    out._backward = _backward
    return out


def take_column(x: Var, index: int) -> Var:
    out = x.tape.record(x.value[:, index : index + 1], (x,), "column")

    def _backward():
        x.grad[:, index : index + 1] += out.grad

    out._backward = _backward
    return out


def elementwise_mul(x: Var, weights: Var) -> Var:
    """x * weights where weights is either x-shaped or a single column broadcast over x."""
    tape = _tape_of(x, weights)
    column = weights.shape == (x.shape[0], 1)
    _check_shape(
        column or weights.shape == x.shape,
        f"elementwise_mul: cannot broadcast {weights.shape} over {x.shape}",
    )
    out = tape.record(x.value * weights.value, (x, weights), "mul")

    def _backward():
        x.grad += out.grad * weights.value
        contribution = out.grad * x.value
        weights.grad += contribution.sum(axis=1, keepdims=True) if column else contribution

    out._backward = _backward
    return out


def relu(x: Var) -> Var:
    out = x.tape.record(np.maximum(x.value, 0.0), (x,), "relu")

    def _backward():
        x.grad += (x.value > 0) * out.grad

    out._backward = _backward
    return out


def leaky_relu(x: Var, slope: float = LEAKY_SLOPE) -> Var:
    out = x.tape.record(np.where(x.value > 0, x.value, slope * x.value), (x,), "leaky_relu")

    def _backward():
        x.grad += np.where(x.value > 0, 1.0, slope) * out.grad

    out._backward = _backward
    return out


def softmax_rows(scores: Var) -> Var:
    shifted = scores.value - scores.value.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    out = scores.tape.record(exp / exp.sum(axis=1, keepdims=True), (scores,), "softmax")

    def _backward():
        weighted = (out.grad * out.value).sum(axis=1, keepdims=True)
        scores.grad += out.value * (out.grad - weighted)

    out._backward = _backward
    return out


def softmax_over_group(scores: Sequence[Var]) -> List[Var]:
    """Per-node softmax across a group of (n, 1) score columns."""
    weights = softmax_rows(concat_columns(*scores))
    return [take_column(weights, f) for f in range(len(scores))]


def row_dot(x: Var, vector: Var) -> Var:
    """(n, m) x (m,) -> (n, 1) column of row-wise dot products."""
    tape = _tape_of(x, vector)
    _check_shape(
        vector.shape == (x.shape[1],), f"row_dot: vector {vector.shape} vs rows {x.shape}"
    )
    out = tape.record((x.value @ vector.value)[:, None], (x, vector), "row_dot")

    def _backward():
        x.grad += out.grad @ vector.value[None, :]
        vector.grad += x.value.T @ out.grad[:, 0]

    out._backward = _backward
    return out


def min_max_normalize(h: Var) -> Var:
    """(h - min h) / (max h - min h); all 0.5 with zero gradient when h is constant."""
    flat = h.value.ravel()
    _check_shape(flat.size > 0, "min_max_normalize: empty input")
    low, high = int(np.argmin(flat)), int(np.argmax(flat))
    spread = flat[high] - flat[low]
    if spread == 0:
        out = h.tape.record(np.full_like(h.value, 0.5), (h,), "min_max")
        return out

    normalized = (h.value - flat[low]) / spread
    out = h.tape.record(normalized, (h,), "min_max")

    def _backward():
        g = out.grad.ravel()
        y = out.value.ravel()
        grad = g / spread
        grad[low] += np.sum(g * (y - 1.0)) / spread
        grad[high] -= np.sum(g * y) / spread
        h.grad += grad.reshape(h.value.shape)

    out._backward = _backward
    return out


def quad_form_loss(p: Var, graph: Graph, beta: float) -> Var:
    """-p^T W p + beta * p^T Wbar p, with the complement term in O(|E| + n)."""
    flat = p.value.ravel()
    _check_shape(flat.size == graph.node_count, f"quad_form_loss: {p.shape} vs n")
    value = -graph.quad_form(flat) + beta * graph.complement_quad_form(flat)
    out = p.tape.record(value, (p,), "quad_form_loss")

    def _backward():
        walk = graph.adjacency @ flat
        grad = -2.0 * walk + beta * (2.0 * flat.sum() - 2.0 * walk - 2.0 * flat)
        p.grad += out.grad * grad.reshape(p.value.shape)

    out._backward = _backward
    return out


# --- Gradient Checking ---
def grad_check(
    f: Callable[[Tape, Dict[str, Var]], Var],
    params: Dict[str, np.ndarray],
    h: float = 1e-5,
    max_coords: Optional[int] = None,
    seed: int = 0,
    floor: float = 1e-3,
) -> float:
    """
    Largest relative error between backward gradients and central differences.

    `f` builds a scalar on the given tape from the named parameter Vars. With
    `max_coords`, each parameter is checked on that many sampled coordinates.
    The denominator is max(|analytic|, |numeric|, floor) so vanishing
    gradients are compared absolutely.
    """
    if h <= 0:
        raise ValueError(f"Finite-difference step must be positive, got {h}")

    tape = Tape()
    leaves = {name: tape.var(value.copy(), requires_grad=True, name=name) for name, value in params.items()}
    analytic = tape.backward(f(tape, leaves))

    def evaluate(values: Dict[str, np.ndarray]) -> float:
        probe = Tape()
        return float(f(probe, {k: probe.var(v) for k, v in values.items()}).value)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, value in params.items():
        coords = np.arange(value.size)
        if max_coords is not None and value.size > max_coords:
            coords = rng.choice(value.size, size=max_coords, replace=False)
        for coord in coords:
            shifted = {k: v.copy() for k, v in params.items()}
            flat = shifted[name].reshape(-1)
            flat[coord] = value.reshape(-1)[coord] + h
            upper = evaluate(shifted)
            flat[coord] = value.reshape(-1)[coord] - h
            lower = evaluate(shifted)
            numeric = (upper - lower) / (2.0 * h)
            exact = analytic[name].reshape(-1)[coord]
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), floor)
            worst = max(worst, error)
    return worst

"""Discretized-angle training route: least-squares objective over one-hot
angle selectors, quadratization to a QUBO, and exhaustive / annealing solvers.

Variable layout: angle k at level v maps to flat index k * parts + v;
auxiliary variables introduced by quadratization are appended after the
one-hot block.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .simulator import RegisterLayout, encode_input, ring_sign_pattern

EXHAUSTIVE_VAR_BOUND = 26
_ENUM_CHUNK = 1 << 22


class AdiabaticError(ValueError):
    pass


class InfeasibleAssignmentError(AdiabaticError):
    pass


@dataclass(frozen=True)
class Discretization:
    """Midpoint grid of allowed angles and their exp(value/2) images."""

    parts: int
    values: np.ndarray
    exp_half: np.ndarray
    range_max: float = 1.0


def discretize(parts: int, range_max: float = 1.0) -> Discretization:
    if parts < 2:
        raise AdiabaticError("discretization needs at least 2 parts")
    i = np.arange(parts)
    values = range_max * (2 * i + 1) / (2 * parts)
    return Discretization(parts=parts, values=values,
                          exp_half=np.exp(values / 2.0), range_max=range_max)


def record_targets(label: int) -> tuple:
    """Target values for output-vector components 0 and 8 given the trend label."""
    if label not in (0, 1):
        raise AdiabaticError(f"label must be 0 or 1, got {label!r}")
    return (0.0, 1.0) if label == 1 else (1.0, 0.0)


class BinaryPolynomial:
    """Pseudo-Boolean polynomial: map from variable-index frozensets to coefficients."""

    def __init__(self, terms=None, offset: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.offset = float(offset)

    def add_term(self, variables, coefficient: float):
        key = frozenset(variables)
        if not key:
            self.offset += coefficient
            return
        new = self.terms.get(key, 0.0) + coefficient
        if new == 0.0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def variables(self):
        out = set()
        for k in self.terms:
            out |= k
        return out

    def evaluate(self, assignment) -> float:
        """Value at a 0/1 assignment (sequence indexed by variable index)."""
        on = frozenset(i for i, b in enumerate(assignment) if b)
        return self.offset + sum(c for k, c in self.terms.items() if k <= on)

    def copy(self) -> "BinaryPolynomial":
        return BinaryPolynomial(self.terms, self.offset)


@dataclass
class QuboModel:
    n_vars: int
    linear: np.ndarray
    quadratic: dict  # (i, j) with i < j -> coefficient
    offset: float
    penalty_lambda: float
    groups: list  # one-hot groups: list of lists of variable indices
    aux_products: list = field(default_factory=list)  # (aux_index, (i, j))

    def energy(self, assignment) -> float:
        x = np.asarray(assignment, dtype=float)
        e = self.offset + float(self.linear @ x)
        for (i, j), c in self.quadratic.items():
            e += c * x[i] * x[j]
        return e

    def dense_coupling(self) -> np.ndarray:
        """Symmetric off-diagonal coupling matrix (each pair counted once per side)."""
        w = np.zeros((self.n_vars, self.n_vars))
        for (i, j), c in self.quadratic.items():
            w[i, j] += c
            w[j, i] += c
        return w


@dataclass(frozen=True)
class AnnealSchedule:
    sweeps: int = 8000
    beta_start: float = 0.1
    beta_end: float = 10.0
    reads: int = 16
    rng_seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1:
            raise AdiabaticError("sweeps must be at least 1")
        if not (self.beta_end > self.beta_start > 0):
            raise AdiabaticError("need beta_end > beta_start > 0")


@dataclass
class SolveResult:
    best_assignment: np.ndarray
    best_energy: float
    explored_count: int
    feasible_count: int
    elapsed_seconds: float
    decoded_theta: np.ndarray
    feasible: bool = True


def one_hot_groups(n_angles: int, parts: int):
    return [list(range(k * parts, (k + 1) * parts)) for k in range(n_angles)]


def build_objective(rows, disc: Discretization, layout: RegisterLayout,
                    replicate: bool = True) -> BinaryPolynomial:
    """Least-squares error of components 0 and 8 of the phase-dropped block output.

    For a record with current value x the predicted component j is
    psi_x[j] * prod_k sum_v x_{k,v} * exp(sign[j,k] * d_v / 2); the squared
    error against the label's target vector is expanded over the one-hot
    selectors (products within a group vanish on the feasible set and are
    dropped; the one-hot penalties enforce that).
    """
    if len(rows) == 0:
        raise AdiabaticError("objective needs a nonempty training set")
    signs = ring_sign_pattern(layout)
    n_angles = layout.total
    p = disc.parts
    j_indices = (0, 1 << layout.measured_bit)
    n = len(rows)

    # per-record statistics; the level coefficients are record independent
    a_sum = np.zeros(2)   # sum psi_j^2
    b_sum = np.zeros(2)   # sum psi_j * y_j
    const = 0.0           # sum y_j^2
    for window, label in rows:
        x = float(np.asarray(window, dtype=float)[0])  # most recent value
        psi = np.real(encode_input(x, layout, replicate=replicate).amplitudes)
        targets = record_targets(label)
        for jj, (j, y) in enumerate(zip(j_indices, targets)):
            a_sum[jj] += psi[j] ** 2
            b_sum[jj] += psi[j] * y
            const += y ** 2

    poly = BinaryPolynomial(offset=const / n)
    for jj, j in enumerate(j_indices):
        coef = np.exp(signs[j].astype(float)[:, None] * disc.values[None, :] / 2.0)
        a_j, b_j = a_sum[jj] / n, b_sum[jj] / n
        for levels in itertools.product(range(p), repeat=n_angles):
            prod = 1.0
            for k, v in enumerate(levels):
                prod *= coef[k, v]
            mono = frozenset(k * p + v for k, v in enumerate(levels))
            poly.add_term(mono, a_j * prod * prod - 2.0 * b_j * prod)
    return poly


def objective_scalar(rows, theta, layout: RegisterLayout, replicate: bool = True) -> float:
    """Direct evaluation of the least-squares error at real angles."""
    signs = ring_sign_pattern(layout)
    theta = np.asarray(theta, dtype=float)
    j_indices = (0, 1 << layout.measured_bit)
    total = 0.0
    for window, label in rows:
        x = float(np.asarray(window, dtype=float)[0])
        psi = np.real(encode_input(x, layout, replicate=replicate).amplitudes)
        targets = record_targets(label)
        for j, y in zip(j_indices, targets):
            pred = psi[j] * float(np.exp(signs[j].astype(float) @ (theta / 2.0)))
            total += (pred - y) ** 2
    return total / len(rows)


def add_one_hot_penalties(poly: BinaryPolynomial, disc: Discretization,
                          n_angles: int, penalty_lambda: float) -> BinaryPolynomial:
    """Add lambda * (sum_v x_{k,v} - 1)^2 for every angle group, expanded."""
    if penalty_lambda <= 0:
        raise AdiabaticError("penalty_lambda must be positive")
    out = poly.copy()
    for group in one_hot_groups(n_angles, disc.parts):
        out.offset += penalty_lambda
        for v in group:
            out.add_term((v,), -penalty_lambda)
        for v, w in itertools.combinations(group, 2):
            out.add_term((v, w), 2.0 * penalty_lambda)
    return out


def estimate_penalty_lambda(poly: BinaryPolynomial, disc: Discretization,
                            n_angles: int, rng_seed: int = 0, samples: int = 64) -> float:
    """Cheap dominance estimate: twice the objective spread over random feasible points, plus one."""
    rng = np.random.default_rng(rng_seed)
    p = disc.parts
    n = n_angles * p
    vals = []
    for _ in range(samples):
        x = np.zeros(n, dtype=int)
        for k in range(n_angles):
            x[k * p + rng.integers(p)] = 1
        vals.append(poly.evaluate(x))
    return 2.0 * (max(vals) - min(vals)) + 1.0


def quadratize(poly: BinaryPolynomial, penalty_lambda: float | None = None,
               groups=None) -> QuboModel:
    """Reduce to quadratic by substituting variable pairs with auxiliaries.

    Each substitution z ~ x_i * x_j adds the penalty
    lambda * (x_i x_j - 2 x_i z - 2 x_j z + 3 z). Pairs are chosen by
    highest co-occurrence among degree >= 3 terms, ties by lowest pair.
    With penalty_lambda=None each auxiliary gets its own safe penalty
    (1 + the absolute coefficient mass of the terms it lowers), which
    guarantees min-over-auxiliaries reproduces the polynomial exactly.
    """
    terms = dict(poly.terms)
    offset = poly.offset
    orig_vars = set()
    for k in terms:
        orig_vars |= k
    next_var = (max(orig_vars) + 1) if orig_vars else 0
    aux_products = []
    penalty_terms = []  # ((vars...), coeff) added after all substitutions

    while True:
        high = [k for k in terms if len(k) >= 3]
        if not high:
            break
        counts = {}
        for k in high:
            for pair in itertools.combinations(sorted(k), 2):
                counts[pair] = counts.get(pair, 0) + 1
        best_pair = min(counts, key=lambda pr: (-counts[pr], pr))
        i, j = best_pair
        z = next_var
        next_var += 1
        aux_products.append((z, (i, j)))
        mass = 0.0
        for k in high:
            if i in k and j in k:
                c = terms.pop(k)
                mass += abs(c)
                newk = (k - {i, j}) | {z}
                terms[newk] = terms.get(newk, 0.0) + c
                if terms[newk] == 0.0:
                    del terms[newk]
        lam = penalty_lambda if penalty_lambda is not None else 1.0 + mass
        penalty_terms.append(((i, j), lam))
        penalty_terms.append(((i, z), -2.0 * lam))
        penalty_terms.append(((j, z), -2.0 * lam))
        penalty_terms.append(((z,), 3.0 * lam))

    n_vars = next_var
    linear = np.zeros(n_vars)
    quadratic = {}

    def put(key, c):
        if len(key) == 1:
            (i,) = key
            linear[i] += c
        else:
            i, j = sorted(key)
            quadratic[(i, j)] = quadratic.get((i, j), 0.0) + c

    for k, c in terms.items():
        if len(k) == 0:
            offset += c
        else:
            put(tuple(k), c)
    for key, c in penalty_terms:
        put(key, c)

    return QuboModel(
        n_vars=n_vars,
        linear=linear,
        quadratic={k: v for k, v in quadratic.items() if v != 0.0},
        offset=offset,
        penalty_lambda=penalty_lambda if penalty_lambda is not None else -1.0,
        groups=list(groups) if groups else [],
        aux_products=aux_products,
    )


def decode(assignment, disc: Discretization, groups) -> np.ndarray:
    """Map a feasible one-hot assignment back to real angles."""
    theta = np.empty(len(groups))
    for k, group in enumerate(groups):
        hot = [v for v in group if assignment[v]]
        if len(hot) != 1:
            raise InfeasibleAssignmentError(
                f"angle group {k} has {len(hot)} selected levels, expected exactly 1"
            )
        theta[k] = disc.values[hot[0] - group[0]]
    return theta


def _feasible_ints(n_vars: int, groups) -> tuple:
    """All assignment integers (bit i = variable i) satisfying every one-hot group.

    Scans the full 2^n_vars range in chunks; returns (feasible ints, explored count).
    """
    total = 1 << n_vars
    masks = [(sum(1 << v for v in g)) for g in groups]
    shifts = [min(g) for g in groups]
    widths = [len(g) for g in groups]
    out = []
    for start in range(0, total, _ENUM_CHUNK):
        stop = min(start + _ENUM_CHUNK, total)
        idx = np.arange(start, stop, dtype=np.int64)
        ok = np.ones(idx.shape, dtype=bool)
        for shift, width in zip(shifts, widths):
            sl = (idx >> shift) & ((1 << width) - 1)
            ok &= (sl != 0) & ((sl & (sl - 1)) == 0)
        out.append(idx[ok])
    return np.concatenate(out), total


def solve_exhaustive(model, disc: Discretization, groups) -> SolveResult:
    """Enumerate every assignment, keep feasible ones, return the minimum energy.

    `model` is a BinaryPolynomial (over the one-hot variables) or a
    QuboModel. Ties are broken by the lowest assignment integer, matching
    the first entry of the feasibility-ordered solution list.
    """
    start = time.perf_counter()
    if isinstance(model, QuboModel):
        n_vars = model.n_vars
        evaluate = model.energy
    else:
        n_vars = len(groups) * disc.parts
        evaluate = model.evaluate
    if n_vars > EXHAUSTIVE_VAR_BOUND:
        raise AdiabaticError(
            f"{n_vars} binary variables exceeds the enumeration bound of "
            f"{EXHAUSTIVE_VAR_BOUND}; use the annealing solver instead"
        )
    feasible, explored = _feasible_ints(n_vars, groups)
    best_energy, best_int = np.inf, None
    for code in feasible:  # increasing integer order: ties keep the first
        bits = np.array([(int(code) >> i) & 1 for i in range(n_vars)], dtype=np.int8)
        e = float(evaluate(bits))
        if best_int is None or e < best_energy:
            best_energy, best_int = e, int(code)
    bits = np.array([(best_int >> i) & 1 for i in range(n_vars)], dtype=np.int8)
    return SolveResult(
        best_assignment=bits,
        best_energy=best_energy,
        explored_count=explored,
        feasible_count=int(len(feasible)),
        elapsed_seconds=time.perf_counter() - start,
        decoded_theta=decode(bits, disc, groups),
    )


def solve_anneal(model: QuboModel, schedule: AnnealSchedule,
                 disc: Discretization, groups) -> SolveResult:
    """Single-bit-flip Metropolis annealing over a geometric beta ladder.

    Every restart starts from a random feasible one-hot point with its
    auxiliaries consistent. Energies and one-hot counts are maintained
    incrementally, so every accepted flip is a sample and transient visits
    to good feasible states are captured; a zero-temperature descent
    finishes each read. If no feasible sample is ever observed the result
    carries feasible=False and the best infeasible sample.
    """
    from ._anneal_kernel import anneal as _kernel

    start = time.perf_counter()
    n = model.n_vars
    group_flat = np.array([v for g in groups for v in g], dtype=np.int64)
    group_offsets = np.cumsum([0] + [len(g) for g in groups]).astype(np.int64)
    group_of = np.full(n, -1, dtype=np.int64)
    for k, g in enumerate(groups):
        group_of[np.asarray(g, dtype=np.int64)] = k
    aux = model.aux_products
    aux_z = np.array([z for z, _ in aux], dtype=np.int64)
    aux_i = np.array([ij[0] for _, ij in aux], dtype=np.int64)
    aux_j = np.array([ij[1] for _, ij in aux], dtype=np.int64)
    best_f, _, found_f, best_any, best_any_energy, feasible_count = _kernel(
        model.linear.astype(np.float64), model.dense_coupling(), float(model.offset),
        group_flat, group_offsets, group_of, aux_z, aux_i, aux_j,
        schedule.sweeps, schedule.reads, float(schedule.beta_start),
        float(schedule.beta_end), schedule.rng_seed,
    )
    explored = schedule.reads * schedule.sweeps * n
    elapsed = time.perf_counter() - start
    if not found_f:
        return SolveResult(
            best_assignment=best_any.astype(np.int8),
            best_energy=float(model.energy(best_any)),
            explored_count=explored,
            feasible_count=0,
            elapsed_seconds=elapsed,
            decoded_theta=np.full(len(groups), np.nan),
            feasible=False,
        )
    bits = best_f.astype(np.int8)
    best_feasible_energy = float(model.energy(bits))  # exact, not incremental
    return SolveResult(
        best_assignment=bits,
        best_energy=best_feasible_energy,
        explored_count=explored,
        feasible_count=feasible_count,
        elapsed_seconds=elapsed,
        decoded_theta=decode(bits, disc, groups),
    )


def export_qubo(model: QuboModel, path):
    """Write the QUBO as `i j coefficient` triples with a variable-count header."""
    lines = [f"# qubo n_vars={model.n_vars} offset={float(model.offset)!r}"]
    for i in range(model.n_vars):
        if model.linear[i] != 0.0:
            lines.append(f"{i} {i} {float(model.linear[i])!r}")
    for (i, j) in sorted(model.quadratic):
        lines.append(f"{i} {j} {float(model.quadratic[(i, j)])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

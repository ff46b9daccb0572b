"""Quantum evaluation and see-saw optimization of Bell expressions.

States are density matrices on C^{d1} x C^{d2}.  Qubit correlation
expressions use Bloch-vector observables; probability-form expressions use
rank-1 projective measurements given by one unitary per setting
(outcome projectors are the conjugated computational-basis projectors).

The see-saw alternates exact partial updates, each of which cannot decrease
the objective:

* state step: principal eigenvector of the Bell operator;
* qubit observable step: normalized Bloch vector of the effective operator;
* qudit measurement step: Jacobi-style sweeps over outcome pairs, where the
  restricted two-dimensional problem is solved exactly by a 2x2
  eigendecomposition.

All see-saw outputs are lower bounds on the true quantum maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .scenario import (
    BellExpression,
    CorrelationExpression,
    ProbabilityExpression,
)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class DimensionError(ValueError):
    """State / measurement / expression dimensions do not match."""


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class QuantumState:
    """Bipartite density matrix with its local dimensions."""

    matrix: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", rho)
        d = self.dims[0] * self.dims[1]
        if rho.shape != (d, d):
            raise DimensionError(f"state shape {rho.shape} != ({d}, {d})")
        if np.abs(rho - rho.conj().T).max() > HERMITICITY_TOL:
            raise DimensionError("state is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
            raise DimensionError("state trace differs from 1")
        if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
            raise DimensionError("state is not positive semidefinite")

    @property
    def vector(self) -> Optional[np.ndarray]:
        """The pure-state vector when the state has rank 1, else None."""
        vals, vecs = np.linalg.eigh(self.matrix)
        if vals[-2] > 1e-8:
            return None
        return vecs[:, -1]


def pure_state(vector: Sequence[complex], dims: tuple[int, int]) -> QuantumState:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return QuantumState(matrix=np.outer(v, v.conj()), dims=dims)


def max_entangled(d: int) -> QuantumState:
    v = np.zeros(d * d, dtype=complex)
    for k in range(d):
        v[k * d + k] = 1.0
    return pure_state(v, (d, d))


def schmidt_state(coefficients: Sequence[float], d: int) -> QuantumState:
    """Pure state sum_k c_k |kk> (coefficients are normalized if needed)."""
    v = np.zeros(d * d, dtype=complex)
    for k, c in enumerate(coefficients):
        v[k * d + k] = c
    return pure_state(v, (d, d))


def isotropic_mixture(psi: QuantumState, visibility: float) -> QuantumState:
    """v * psi + (1 - v) * I / (d1 d2)."""
    d = psi.dims[0] * psi.dims[1]
    rho = visibility * psi.matrix + (1.0 - visibility) * np.eye(d) / d
    return QuantumState(matrix=rho, dims=psi.dims)


def schmidt_coefficients(state: QuantumState) -> np.ndarray:
    """Schmidt coefficients of a (numerically) pure bipartite state."""
    v = state.vector
    if v is None:
        raise ValueError("state is not pure; Schmidt coefficients undefined")
    return np.linalg.svd(v.reshape(state.dims), compute_uv=False)


# ---------------------------------------------------------------------------
# measurements


@dataclass(frozen=True)
class Measurements:
    """One party's measurement settings.

    kind "bloch": data has shape (M, 3), one unit Bloch vector per setting.
    kind "unitary": data has shape (M, d, d); outcome k of setting m
    projects onto the conjugated basis state, P_k = U^dag |k><k| U.
    """

    kind: str
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        object.__setattr__(self, "data", data)
        if self.kind == "bloch":
            if data.ndim != 2 or data.shape[1] != 3:
                raise DimensionError("bloch data must have shape (M, 3)")
            norms = np.linalg.norm(data, axis=1)
            if np.abs(norms - 1.0).max() > 1e-10:
                raise DimensionError("Bloch vectors must be unit norm")
        elif self.kind == "unitary":
            if data.ndim != 3 or data.shape[1] != data.shape[2]:
                raise DimensionError("unitary data must have shape (M, d, d)")
            d = data.shape[1]
            for u in data:
                if np.abs(u.conj().T @ u - np.eye(d)).max() > 1e-10:
                    raise DimensionError("matrix is not unitary")
        else:
            raise DimensionError(f"unknown measurement kind {self.kind!r}")

    @property
    def settings(self) -> int:
        return self.data.shape[0]

    def projectors(self) -> np.ndarray:
        """Array (M, d, d, d): projectors()[m, k] is the outcome-k projector."""
        if self.kind == "bloch":
            out = np.empty((self.settings, 2, 2, 2), dtype=complex)
            for m, n in enumerate(self.data):
                obs = np.tensordot(n, PAULI, axes=1)
                out[m, 0] = (np.eye(2) + obs) / 2
                out[m, 1] = (np.eye(2) - obs) / 2
            return out
        d = self.data.shape[1]
        out = np.empty((self.settings, d, d, d), dtype=complex)
        for m, u in enumerate(self.data):
            for k in range(d):
                row = u[k]
                out[m, k] = np.outer(row.conj(), row)
        return out


def bloch_to_unitary(n: Sequence[float]) -> np.ndarray:
    """Unitary whose conjugated basis projectors are the +-1 eigenprojectors
    of n.sigma, outcome 0 on the +1 eigenspace."""
    obs = np.tensordot(np.asarray(n, dtype=float), PAULI, axes=1)
    vals, vecs = np.linalg.eigh(obs)
    # eigh sorts ascending; outcome 0 must be the +1 eigenvector
    order = np.argsort(-vals)
    return vecs[:, order].conj().T


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases[None, :]


def random_bloch(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# coefficient arrays


class _CorrData:
    """Dense float coefficient arrays of a 2-party correlation expression."""

    def __init__(self, expr: CorrelationExpression):
        if expr.scenario.parties != 2:
            raise DimensionError("quantum analysis is bipartite only")
        m1, m2 = expr.scenario.settings
        self.m1, self.m2 = m1, m2
        self.J = np.zeros((m1, m2))
        self.ca = np.zeros(m1)
        self.cb = np.zeros(m2)
        self.c0 = 0.0
        for (i, j), c in expr.coeffs.items():
            v = float(c)
            if i and j:
                self.J[i - 1, j - 1] = v
            elif i:
                self.ca[i - 1] = v
            elif j:
                self.cb[j - 1] = v
            else:
                self.c0 = v


class _ProbData:
    """Dense float coefficient arrays of a probability expression."""

    def __init__(self, expr: ProbabilityExpression):
        m1, m2 = expr.scenario.settings
        d1, d2 = expr.scenario.outcomes
        self.m1, self.m2, self.d1, self.d2 = m1, m2, d1, d2
        self.C = np.zeros((m1, d1, m2, d2))
        self.MA = np.zeros((m1, d1))
        self.MB = np.zeros((m2, d2))
        self.c0 = float(expr.constant)
        for (i, a, j, b), c in expr.joint.items():
            self.C[i - 1, a, j - 1, b] = float(c)
        for (i, a), c in expr.marg_a.items():
            self.MA[i - 1, a] = float(c)
        for (j, b), c in expr.marg_b.items():
            self.MB[j - 1, b] = float(c)


def _rho4(state: QuantumState) -> np.ndarray:
    d1, d2 = state.dims
    return state.matrix.reshape(d1, d2, d1, d2)


def correlation_tensor(state: QuantumState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(T, ra, rb): two-qubit correlation matrix and local Bloch vectors."""
    if state.dims != (2, 2):
        raise DimensionError("correlation tensor needs a two-qubit state")
    r4 = _rho4(state)
    T = np.real(np.einsum("ikjl,aji,blk->ab", r4, PAULI, PAULI))
    ra = np.real(np.einsum("ikjl,aji,lk->a", r4, PAULI, np.eye(2)))
    rb = np.real(np.einsum("ikjl,ji,alk->a", r4, np.eye(2), PAULI))
    return T, ra, rb


# ---------------------------------------------------------------------------
# evaluation


def joint_probability_table(
    state: QuantumState, meas_a: Measurements, meas_b: Measurements
) -> np.ndarray:
    """P[i, k, j, l] = P(A_i = k, B_j = l); nonnegative, normalized per
    setting pair and no-signaling by construction."""
    pa = meas_a.projectors()
    pb = meas_b.projectors()
    if pa.shape[2] != state.dims[0] or pb.shape[2] != state.dims[1]:
        raise DimensionError("measurement dimension does not match the state")
    r4 = _rho4(state)
    return np.real(np.einsum("abcd,ikca,jldb->ikjl", r4, pa, pb))


def quantum_value(
    expr: BellExpression,
    state: QuantumState,
    meas_a: Measurements,
    meas_b: Measurements,
) -> float:
    """Quantum expectation of a Bell expression."""
    if isinstance(expr, CorrelationExpression):
        data = _CorrData(expr)
        if meas_a.kind == meas_b.kind == "bloch":
            T, ra, rb = correlation_tensor(state)
            A, B = meas_a.data, meas_b.data
            return float(
                data.c0
                + data.ca @ (A @ ra)
                + data.cb @ (B @ rb)
                + np.einsum("ij,ia,ab,jb->", data.J, A, T, B)
            )
        expr = _corr_to_prob_cached(expr)
    data = _ProbData(expr)
    if meas_a.settings < data.m1 or meas_b.settings < data.m2:
        raise DimensionError("not enough measurement settings for expression")
    P = joint_probability_table(state, meas_a, meas_b)
    pa = meas_a.projectors()
    pb = meas_b.projectors()
    r4 = _rho4(state)
    rho_a = np.einsum("abcb->ac", r4)
    rho_b = np.einsum("abad->bd", r4)
    marg_a = np.real(np.einsum("ac,ikca->ik", rho_a, pa))
    marg_b = np.real(np.einsum("bd,jldb->jl", rho_b, pb))
    return float(
        data.c0
        + np.sum(data.MA * marg_a[: data.m1])
        + np.sum(data.MB * marg_b[: data.m2])
        + np.sum(data.C * P[: data.m1, :, : data.m2, :])
    )


_CORR_PROB_CACHE: dict[int, ProbabilityExpression] = {}


def _corr_to_prob_cached(expr: CorrelationExpression) -> ProbabilityExpression:
    from .scenario import correlation_to_probability

    key = id(expr)
    if key not in _CORR_PROB_CACHE:
        _CORR_PROB_CACHE[key] = correlation_to_probability(expr)
    return _CORR_PROB_CACHE[key]


def bell_operator(
    expr: BellExpression, meas_a: Measurements, meas_b: Measurements
) -> np.ndarray:
    """Hermitian operator whose expectation is the expression's value."""
    if isinstance(expr, CorrelationExpression):
        data = _CorrData(expr)
        if meas_a.kind == "bloch":
            obs_a = np.tensordot(meas_a.data, PAULI, axes=1)
            obs_b = np.tensordot(meas_b.data, PAULI, axes=1)
            d1 = d2 = 2
            op = data.c0 * np.eye(4, dtype=complex)
            for i in range(data.m1):
                if data.ca[i]:
                    op += data.ca[i] * np.kron(obs_a[i], np.eye(2))
            for j in range(data.m2):
                if data.cb[j]:
                    op += data.cb[j] * np.kron(np.eye(2), obs_b[j])
            for i in range(data.m1):
                for j in range(data.m2):
                    if data.J[i, j]:
                        op += data.J[i, j] * np.kron(obs_a[i], obs_b[j])
            return op
        expr = _corr_to_prob_cached(expr)
    data = _ProbData(expr)
    pa = meas_a.projectors()
    pb = meas_b.projectors()
    d1, d2 = pa.shape[2], pb.shape[2]
    op = data.c0 * np.eye(d1 * d2, dtype=complex)
    eye_b = np.eye(d2)
    eye_a = np.eye(d1)
    for i in range(data.m1):
        for k in range(d1):
            if data.MA[i, k]:
                op += data.MA[i, k] * np.kron(pa[i, k], eye_b)
    for j in range(data.m2):
        for l in range(d2):
            if data.MB[j, l]:
                op += data.MB[j, l] * np.kron(eye_a, pb[j, l])
    for i in range(data.m1):
        for k in range(d1):
            row = data.C[i, k]
            if not row.any():
                continue
            acc = np.zeros((d2, d2), dtype=complex)
            for j in range(data.m2):
                for l in range(d2):
                    if row[j, l]:
                        acc += row[j, l] * pb[j, l]
            op += np.kron(pa[i, k], acc)
    return op


# ---------------------------------------------------------------------------
# see-saw


@dataclass
class ViolationResult:
    value: float
    state: QuantumState
    meas_a: Measurements
    meas_b: Measurements
    restarts_used: int
    converged: bool


@dataclass
class VisibilityResult:
    threshold: float
    bracket_width: float
    value_at_threshold: float
    bound: float


def _update_bloch(data: _CorrData, T, ra, rb, A, B):
    """Exact alternating Bloch updates for one iteration; returns objective."""
    for i in range(data.m1):
        v = data.ca[i] * ra + T @ (data.J[i] @ B)
        n = np.linalg.norm(v)
        if n > 1e-14:
            A[i] = v / n
    for j in range(data.m2):
        v = data.cb[j] * rb + T.T @ (data.J[:, j] @ A)
        n = np.linalg.norm(v)
        if n > 1e-14:
            B[j] = v / n
    return float(
        data.c0
        + data.ca @ (A @ ra)
        + data.cb @ (B @ rb)
        + np.einsum("ij,ia,ab,jb->", data.J, A, T, B)
    )


def _jacobi_basis_update(basis: np.ndarray, G: list[np.ndarray], sweeps: int = 20):
    """Maximize sum_k v_k^dag G_k v_k over orthonormal bases {v_k} by exact
    pairwise (2x2) rotations; monotone by construction."""
    d = basis.shape[1]
    for _ in range(sweeps):
        gain = 0.0
        for k in range(d):
            for l in range(k + 1, d):
                vk = basis[:, k]
                vl = basis[:, l]
                gk = np.array(
                    [
                        [vk.conj() @ G[k] @ vk, vk.conj() @ G[k] @ vl],
                        [vl.conj() @ G[k] @ vk, vl.conj() @ G[k] @ vl],
                    ]
                )
                gl = np.array(
                    [
                        [vk.conj() @ G[l] @ vk, vk.conj() @ G[l] @ vl],
                        [vl.conj() @ G[l] @ vk, vl.conj() @ G[l] @ vl],
                    ]
                )
                diff = gk - gl
                vals, vecs = np.linalg.eigh(diff)
                new = vals[-1].real + np.trace(gl).real
                old = (gk[0, 0] + gl[1, 1]).real
                if new > old + 1e-15:
                    w = vecs[:, -1]
                    nk = w[0] * vk + w[1] * vl
                    nl = -np.conj(w[1]) * vk + np.conj(w[0]) * vl
                    basis[:, k] = nk
                    basis[:, l] = nl
                    gain += new - old
        if gain < 1e-13:
            break
    return basis


def _update_prob_party(data: _ProbData, rho4, bases, proj_other, party: str):
    """Jacobi-update every setting of one party against the other's projectors."""
    if party == "A":
        m, d, d_other = data.m1, data.d1, data.d2
    else:
        m, d, d_other = data.m2, data.d2, data.d1
    for i in range(m):
        G = []
        for k in range(d):
            if party == "A":
                W = data.MA[i, k] * np.eye(d_other, dtype=complex)
                for j in range(data.m2):
                    for l in range(d_other):
                        if data.C[i, k, j, l]:
                            W = W + data.C[i, k, j, l] * proj_other[j, l]
                Gk = np.einsum("abcd,db->ac", rho4, W)
            else:
                W = data.MB[i, k] * np.eye(d_other, dtype=complex)
                for j in range(data.m1):
                    for l in range(d_other):
                        if data.C[j, l, i, k]:
                            W = W + data.C[j, l, i, k] * proj_other[j, l]
                Gk = np.einsum("abcd,ca->bd", rho4, W)
            G.append(Gk)
        bases[i] = _jacobi_basis_update(bases[i], G)
    return bases


def _bases_to_meas(bases: np.ndarray) -> Measurements:
    # basis columns v_k with projector v_k v_k^dag; unitary rows are v_k^dag
    return Measurements(kind="unitary", data=np.conj(np.swapaxes(bases, 1, 2)))


def _random_meas(kind: str, m: int, d: int, rng: np.random.Generator) -> Measurements:
    if kind == "bloch":
        return Measurements(kind="bloch", data=np.array([random_bloch(rng) for _ in range(m)]))
    return Measurements(
        kind="unitary", data=np.array([haar_unitary(d, rng) for _ in range(m)])
    )


def _principal_state(op: np.ndarray, dims: tuple[int, int]) -> QuantumState:
    vals, vecs = np.linalg.eigh(op)
    v = vecs[:, -1]
    return QuantumState(matrix=np.outer(v, v.conj()), dims=dims)


def _see_saw_once(
    expr: BellExpression,
    dims: tuple[int, int],
    meas_a: Measurements,
    meas_b: Measurements,
    state: Optional[QuantumState],
    max_iters: int,
    tol: float,
):
    """One restart.  Returns (value, state, meas_a, meas_b, converged)."""
    fixed_state = state is not None
    is_corr = isinstance(expr, CorrelationExpression) and meas_a.kind == "bloch"
    if is_corr:
        data = _CorrData(expr)
        A = np.array(meas_a.data, dtype=float)
        B = np.array(meas_b.data, dtype=float)
        if fixed_state:
            T, ra, rb = correlation_tensor(state)
        value = -np.inf
        converged = False
        cur_state = state
        for _ in range(max_iters):
            if not fixed_state:
                op = bell_operator(
                    expr,
                    Measurements("bloch", A),
                    Measurements("bloch", B),
                )
                cur_state = _principal_state(op, dims)
                T, ra, rb = correlation_tensor(cur_state)
            new_value = _update_bloch(data, T, ra, rb, A, B)
            if new_value - value < tol:
                value = max(value, new_value)
                converged = True
                break
            value = new_value
        return value, cur_state, Measurements("bloch", A), Measurements("bloch", B), converged

    prob = expr if isinstance(expr, ProbabilityExpression) else _corr_to_prob_cached(expr)
    data = _ProbData(prob)
    d1, d2 = dims
    bases_a = np.conj(np.swapaxes(np.array(meas_a.data, dtype=complex), 1, 2))
    bases_b = np.conj(np.swapaxes(np.array(meas_b.data, dtype=complex), 1, 2))
    value = -np.inf
    converged = False
    cur_state = state
    for _ in range(max_iters):
        ma = _bases_to_meas(bases_a)
        mb = _bases_to_meas(bases_b)
        if not fixed_state:
            op = bell_operator(prob, ma, mb)
            cur_state = _principal_state(op, dims)
        rho4 = _rho4(cur_state)
        proj_b = mb.projectors()
        bases_a = _update_prob_party(data, rho4, bases_a, proj_b, "A")
        proj_a = _bases_to_meas(bases_a).projectors()
        bases_b = _update_prob_party(data, rho4, bases_b, proj_a, "B")
        new_value = quantum_value(
            prob, cur_state, _bases_to_meas(bases_a), _bases_to_meas(bases_b)
        )
        if new_value - value < tol:
            value = max(value, new_value)
            converged = True
            break
        value = new_value
    return value, cur_state, _bases_to_meas(bases_a), _bases_to_meas(bases_b), converged


# ---------------------------------------------------------------------------
# phase-restricted (Fourier) measurement family
#
# U(m) = F diag(1, e^{i p_1}, ..., e^{i p_{d-1}}) with F the discrete Fourier
# matrix: the standard multiport-beamsplitter parametrization, d-1 free
# phases per setting.  Restricted optima can sit strictly below the
# unrestricted projective ones; the family is kept for reproducing values
# quoted for it.


def _fourier_matrix(d: int) -> np.ndarray:
    w = np.exp(2j * np.pi / d)
    k = np.arange(d)
    return w ** np.outer(k, k) / math.sqrt(d)


def fourier_phase_meas(phases: np.ndarray) -> Measurements:
    """Measurements for a (M, d-1) phase array."""
    phases = np.asarray(phases, dtype=float)
    m, dm1 = phases.shape
    d = dm1 + 1
    F = _fourier_matrix(d)
    data = np.empty((m, d, d), dtype=complex)
    for s in range(m):
        diag = np.concatenate([[1.0], np.exp(1j * phases[s])])
        data[s] = F * diag[None, :]
    return Measurements(kind="unitary", data=data)


def _phase_sweep(expr, state, phases_a, phases_b, value):
    """One exact coordinate-ascent pass over every phase of both parties.

    Each probability is linear in e^{+-i p} for a single phase p, so the
    objective restricted to p is A + B cos p + C sin p, maximized in closed
    form; every step is exact, hence monotone.
    """
    for phases, other_first in ((phases_a, True), (phases_b, False)):
        m, dm1 = phases.shape
        for s in range(m):
            for q in range(dm1):
                orig = phases[s, q]
                samples = []
                for probe in (0.0, 0.5 * np.pi, np.pi):
                    phases[s, q] = probe
                    ma = fourier_phase_meas(phases_a)
                    mb = fourier_phase_meas(phases_b)
                    samples.append(quantum_value(expr, state, ma, mb))
                v0, v1, v2 = samples
                A = 0.5 * (v0 + v2)
                B = v0 - A
                C = v1 - A
                best = A + math.hypot(B, C)
                if best > value:
                    phases[s, q] = math.atan2(C, B)
                    value = best
                else:
                    phases[s, q] = orig
    return value


def _see_saw_once_phase(expr, dims, phases_a, phases_b, state, max_iters, tol):
    fixed_state = state is not None
    prob = expr if isinstance(expr, ProbabilityExpression) else _corr_to_prob_cached(expr)
    value = -np.inf
    converged = False
    cur_state = state
    for _ in range(max_iters):
        ma = fourier_phase_meas(phases_a)
        mb = fourier_phase_meas(phases_b)
        if not fixed_state:
            op = bell_operator(prob, ma, mb)
            cur_state = _principal_state(op, dims)
        base = quantum_value(prob, cur_state, ma, mb)
        new_value = _phase_sweep(prob, cur_state, phases_a, phases_b, base)
        if new_value - value < tol:
            value = max(value, new_value)
            converged = True
            break
        value = new_value
    return (
        value,
        cur_state,
        fourier_phase_meas(phases_a),
        fourier_phase_meas(phases_b),
        converged,
    )


def _expr_dims(expr: BellExpression, dims: Optional[tuple[int, int]]):
    if dims is not None:
        return tuple(dims)
    if isinstance(expr, CorrelationExpression):
        return (2, 2)
    return tuple(expr.scenario.outcomes)


def _meas_kind(expr: BellExpression, dims) -> str:
    return "bloch" if isinstance(expr, CorrelationExpression) and dims == (2, 2) else "unitary"


def max_violation(
    expr: BellExpression,
    dims: Optional[tuple[int, int]] = None,
    restarts: int = 50,
    seed: int = 0,
    max_iters: int = 500,
    tol: float = 1e-9,
    family: str = "projective",
) -> ViolationResult:
    """See-saw over states and measurements; best of ``restarts`` runs.

    ``family`` is "projective" (unrestricted rank-1 projective measurements)
    or "fourier-phase" (phase-restricted Fourier bases).
    """
    return _see_saw_driver(expr, dims, None, restarts, seed, max_iters, tol, None, family)


def fixed_state_max(
    expr: BellExpression,
    state: QuantumState,
    restarts: int = 50,
    seed: int = 0,
    max_iters: int = 500,
    tol: float = 1e-9,
    warm: Optional[tuple[Measurements, Measurements]] = None,
    family: str = "projective",
) -> ViolationResult:
    """See-saw over measurements only, for a fixed state.

    ``warm`` supplies one extra initial measurement pair tried before the
    random restarts (used by the visibility bisection).
    """
    return _see_saw_driver(
        expr, state.dims, state, restarts, seed, max_iters, tol, warm, family
    )


def _see_saw_driver(expr, dims, state, restarts, seed, max_iters, tol, warm, family="projective"):
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if family not in ("projective", "fourier-phase"):
        raise ValueError(f"unknown measurement family {family!r}")
    dims = _expr_dims(expr, dims)
    if state is not None and tuple(state.dims) != dims:
        raise DimensionError(f"state dims {state.dims} != expression dims {dims}")
    m1, m2 = expr.scenario.settings
    rng = np.random.default_rng(seed)
    if family == "fourier-phase":
        if dims[0] != dims[1]:
            raise DimensionError("fourier-phase family needs equal local dimensions")
        best = None
        for _ in range(restarts):
            pa = rng.uniform(0.0, 2.0 * np.pi, size=(m1, dims[0] - 1))
            pb = rng.uniform(0.0, 2.0 * np.pi, size=(m2, dims[1] - 1))
            value, st, ma, mb, conv = _see_saw_once_phase(
                expr, dims, pa, pb, state, max_iters, tol
            )
            if best is None or value > best[0]:
                best = (value, st, ma, mb, conv)
        value, st, ma, mb, conv = best
        return ViolationResult(
            value=value,
            state=st,
            meas_a=ma,
            meas_b=mb,
            restarts_used=restarts,
            converged=conv,
        )
    kind = _meas_kind(expr, dims)
    inits = []
    if warm is not None:
        inits.append(warm)
    for _ in range(restarts):
        inits.append(
            (
                _random_meas(kind, m1, dims[0], rng),
                _random_meas(kind, m2, dims[1], rng),
            )
        )
    best = None
    for ma0, mb0 in inits:
        value, st, ma, mb, conv = _see_saw_once(
            expr, dims, ma0, mb0, state, max_iters, tol
        )
        if best is None or value > best[0] + 0.0:
            best = (value, st, ma, mb, conv)
    value, st, ma, mb, conv = best
    return ViolationResult(
        value=value,
        state=st,
        meas_a=ma,
        meas_b=mb,
        restarts_used=restarts,
        converged=conv,
    )


# ---------------------------------------------------------------------------
# closed-form CHSH criterion and visibility


def chsh_horodecki(state: QuantumState) -> float:
    """Exact maximal CHSH value of a two-qubit state: twice the root of the
    sum of the two largest squared singular values of its correlation
    matrix."""
    T, _, _ = correlation_tensor(state)
    s = np.linalg.svd(T, compute_uv=False)
    return float(2.0 * math.sqrt(s[0] ** 2 + s[1] ** 2))


class NoViolationError(RuntimeError):
    """The pure member of the mixing family does not violate the bound."""


def threshold_visibility(
    expr: BellExpression,
    psi: QuantumState,
    side: str = "upper",
    width: float = 1e-4,
    restarts: int = 20,
    seed: int = 0,
    max_iters: int = 500,
    tol: float = 1e-9,
) -> VisibilityResult:
    """Critical visibility of v |psi><psi| + (1-v) I/(d1 d2) by bisection.

    The optimized value is a pointwise maximum of functions linear in v,
    hence convex, so {v : no violation} is an interval containing 0 and
    bisection on the bracket is valid.
    """
    if side != "upper":
        raise NotImplementedError("visibility implemented for upper bounds")
    if expr.upper_bound is None:
        from .polytope import classical_bounds

        _, bound = classical_bounds(expr)
    else:
        bound = expr.upper_bound
    bound = float(bound)

    top = fixed_state_max(expr, psi, restarts=restarts, seed=seed, max_iters=max_iters, tol=tol)
    if top.value <= bound:
        raise NoViolationError(
            f"no violation at v=1 (value {top.value:.6g} <= bound {bound:.6g})"
        )
    warm = (top.meas_a, top.meas_b)
    zero = fixed_state_max(
        expr,
        isotropic_mixture(psi, 0.0),
        restarts=2,
        seed=seed + 1,
        max_iters=max_iters,
        tol=tol,
        warm=warm,
    )
    if zero.value > bound:
        raise NoViolationError("mixing family invalid: violation already at v=0")

    lo, hi = 0.0, 1.0
    value_hi = top.value
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        res = fixed_state_max(
            expr,
            isotropic_mixture(psi, mid),
            restarts=2,
            seed=seed + 2,
            max_iters=max_iters,
            tol=tol,
            warm=warm,
        )
        if res.value > bound:
            hi = mid
            value_hi = res.value
            warm = (res.meas_a, res.meas_b)
        else:
            lo = mid
    return VisibilityResult(
        threshold=0.5 * (lo + hi),
        bracket_width=hi - lo,
        value_at_threshold=value_hi,
        bound=bound,
    )

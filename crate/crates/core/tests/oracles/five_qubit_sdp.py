"""Independent reference values for the five-qubit code under amplitude damping.

Builds everything from numpy and solves the recovery SDP with cvxpy, so the
Rust solver can be checked against a second implementation. Run once and copy
the printed constants into the Rust tests:

    python3 five_qubit_sdp.py
"""

import itertools

import cvxpy as cp
import numpy as np

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def pauli(s):
    m = np.eye(1)
    for c in s:
        m = np.kron(m, PAULI[c])
    return m


GENERATORS = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]


def encoder():
    proj = np.eye(32)
    for g in GENERATORS:
        proj = proj @ (np.eye(32) + pauli(g)) / 2
    w, v = np.linalg.eigh(proj)
    basis = v[:, w > 0.5]
    zl = basis.conj().T @ pauli("ZZZZZ") @ basis
    zw, zv = np.linalg.eigh(zl)
    states = basis @ zv[:, np.argsort(-zw)]
    for k in range(2):
        col = states[:, k]
        lead = col[np.argmax(np.abs(col) > 1e-9)]
        states[:, k] = col * abs(lead) / lead
    return states


def damping(gamma, n):
    e0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    e1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    out = []
    for combo in itertools.product([e0, e1], repeat=n):
        m = np.eye(1)
        for e in combo:
            m = np.kron(m, e)
        out.append(m)
    return out


def data_matrix(u, gamma):
    rho = np.eye(2) / 2
    c = np.zeros((64, 64), dtype=complex)
    for e in damping(gamma, 5):
        v = (rho @ (e @ u).conj().T).reshape(-1)
        c += np.outer(v, v.conj())
    return c


def optimal(u, gamma):
    c = data_matrix(u, gamma)
    x = cp.Variable((64, 64), hermitian=True)
    cons = [x >> 0, cp.partial_trace(x, [2, 32], axis=0) == np.eye(32)]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(x @ c))), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return prob.value


def qec_fidelity(u, gamma):
    table = {}
    for w in range(6):
        for sites in itertools.combinations(range(5), w):
            for letters in itertools.product("XYZ", repeat=w):
                s = ["I"] * 5
                for q, l in zip(sites, letters):
                    s[q] = l
                s = "".join(s)
                syn = tuple(
                    int(sum(a != "I" and b != "I" and a != b for a, b in zip(s, g)) % 2)
                    for g in GENERATORS
                )
                table.setdefault(syn, s)
    recovery = []
    for syn, corr in table.items():
        p = np.eye(32)
        for bit, g in zip(syn, GENERATORS):
            p = p @ (np.eye(32) + (-1) ** bit * pauli(g)) / 2
        recovery.append(u.conj().T @ pauli(corr) @ p)
    rho = np.eye(2) / 2
    return sum(
        abs(np.trace(rho @ r @ e @ u)) ** 2 for r in recovery for e in damping(gamma, 5)
    )


if __name__ == "__main__":
    u = encoder()
    print(f"optimal(0.1) = {optimal(u, 0.1):.12f}")
    print(f"qec(0.1)     = {qec_fidelity(u, 0.1):.15f}")

"""Independent numpy evaluation of the golden correlation fixtures.

Discord is minimised by a 400x800 Bloch-sphere grid polished with scipy's
bounded L-BFGS-B; concurrence uses the spin-flip formula. Run from this
directory to regenerate golden_*.json.
"""
import json

import numpy as np
from scipy.optimize import minimize

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def entropy(m):
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    w = w[w > 1e-15]
    return float(-(w * np.log2(w)).sum())


def ptrace(rho, keep):
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("ijkj->ik", r) if keep == 0 else np.einsum("ijil->jl", r)


def cond_entropy(rho, measured, polar, azimuth):
    n = np.array([np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar)])
    total = 0.0
    for s in (1, -1):
        proj = (I2 + s * (n[0] * X + n[1] * Y + n[2] * Z)) / 2
        op = np.kron(proj, I2) if measured == 0 else np.kron(I2, proj)
        post = op @ rho @ op
        p = np.trace(post).real
        if p > 1e-14:
            total += p * entropy(ptrace(post, 1 - measured) / p)
    return total


def discord(rho, measured):
    pts = [(i * np.pi / 399, j * 2 * np.pi / 800) for i in range(400) for j in range(800)]
    vals = [cond_entropy(rho, measured, a, b) for a, b in pts]
    order = np.argsort(vals)[:6]
    best = min(vals)
    for k in order:
        r = minimize(lambda v: cond_entropy(rho, measured, v[0], v[1]), pts[k],
                     method="L-BFGS-B", bounds=[(0, np.pi), (-np.pi, 3 * np.pi)],
                     options={"ftol": 1e-15, "gtol": 1e-12})
        best = min(best, r.fun)
    s_m = entropy(ptrace(rho, measured))
    return s_m - entropy(rho) + best


def concurrence(rho):
    yy = np.kron(Y, Y)
    tilde = yy @ rho.conj() @ yy
    w = np.sqrt(np.clip(np.sort(np.linalg.eigvals(rho @ tilde).real)[::-1], 0, None))
    return max(0.0, w[0] - w[1] - w[2] - w[3])


def report(rho):
    mi = entropy(ptrace(rho, 0)) + entropy(ptrace(rho, 1)) - entropy(rho)
    c = concurrence(rho)
    return {
        "mutual_info": mi,
        "discord_rc": discord(rho, 0),
        "discord_cr": discord(rho, 1),
        "concurrence": c,
        "tangle": c * c,
    }


def dqc1(theta, alpha):
    u = np.diag([1, np.exp(1j * theta)])
    return np.block([[I2, alpha * u.conj().T], [alpha * u, I2]]) / 4


def matrix_json(m):
    return {"dim": 4, "re": m.real.tolist(), "im": m.imag.tolist(), "qubit_dims": [1, 1]}


phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
bell = np.outer(phi, phi.conj())
plus = np.array([[0.5, 0.5], [0.5, 0.5]])
cases = {
    "bell": (bell, "maximally entangled Bell state"),
    "werner_third": (np.eye(4) / 4 * (2 / 3) + bell / 3,
                     "Werner state at p = 1/3, on the separability boundary"),
    "classical_quantum": ((np.kron(np.diag([1, 0]), np.diag([1, 0]))
                           + np.kron(np.diag([0, 1]), plus)) / 2,
                          "classical on the control, quantum on the register"),
    "dqc1_quarter_turn": (dqc1(np.pi / 2, 1.0), "DQC1 output for Z_theta, theta = pi/2, alpha = 1"),
    "dqc1_partial": (dqc1(np.pi / 3, 0.58), "DQC1 output for Z_theta, theta = pi/3, alpha = 0.58"),
}
for name, (rho, note) in cases.items():
    fixture = {"note": note + "; values from oracle.py", "state": matrix_json(rho), "report": report(rho)}
    with open(f"golden_{name}.json", "w") as f:
        json.dump(fixture, f, indent=2)
        f.write("\n")
    print(name, fixture["report"])

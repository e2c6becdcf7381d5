"""Arbitrary-precision reference values frozen into the C++ tests.

Run with `python3 tests/oracles/oracles.py`; every printed number appears
verbatim in a test file.
"""
import json
import os
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 50
HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "..", "data")


def show(name, x):
    print(f"{name} = {mp.nstr(x, 20)}")


def log_gamma_density(t, a, lam):
    t, a, lam = mp.mpf(t), mp.mpf(a), mp.mpf(lam)
    return mp.log(t ** (a - 1) * lam ** a * mp.exp(-lam * t) / mp.gamma(a))


# --- sojourn ---------------------------------------------------------------
show("log_density(6.9; 2.83, 0.41)", log_gamma_density("6.9", "2.83", "0.41"))
show("log_density(0.05; 0.7, 3.2)", log_gamma_density("0.05", "0.7", "3.2"))
show("log_density(250; 40, 0.2)", log_gamma_density("250", "40", "0.2"))

for x in ["0.001", "0.5", "1", "2.83", "7.3", "10.5", "123.4", "10000"]:
    show(f"digamma({x})", mp.digamma(mp.mpf(x)))
    show(f"trigamma({x})", mp.psi(1, mp.mpf(x)))

values = ["1.2", "3.4", "0.7", "5.1", "2.2", "2.9", "4.4", "1.8"]
weights = ["1", "0.5", "1", "0.25", "1", "1", "0.75", "1"]
xs = [mp.mpf(v) for v in values]
ws = [mp.mpf(w) for w in weights]
W = sum(ws)
Sx = sum(w * x for w, x in zip(ws, xs))


def profile(a, c):
    lam = a * W / Sx
    ll = sum(w * log_gamma_density(x, a, lam) for w, x in zip(ws, xs))
    return ll - c * (a + mp.log(a))


for c in ["0", "0.3", "2"]:
    cc = mp.mpf(c)
    a_hat = mp.findroot(lambda a: mp.diff(lambda t: profile(t, cc), a), (mp.mpf("0.01"), mp.mpf(50)), solver="anderson")
    show(f"pmle shape (c={c})", a_hat)
    show(f"pmle rate (c={c})", a_hat * W / Sx)
    show(f"pmle objective (c={c})", profile(a_hat, cc))


# --- likelihood ------------------------------------------------------------
def load_component(name, g):
    doc = json.load(open(os.path.join(DATA, name)))
    comp = doc["model"]["components"][g]
    labels = doc["model"]["space"]["labels"]
    alpha = [Fraction(str(v)) for v in comp["alpha"]]
    alpha = [v / sum(alpha) for v in alpha]
    trans = []
    for row in comp["trans"]:
        r = [Fraction(str(v)) for v in row]
        trans.append([v / sum(r) for v in r])
    return labels, alpha, trans, comp["sojourn"]


labels, alpha, trans, soj = load_component("chocolate_70.json", 0)
path = ["Crunchy", "Cocoa", "Sweet", "Melting", "Sweet"]
durs = ["4.2", "3.1", "6.0", "2.5", "5.5"]
idx = [labels.index(s) for s in path]
lik = mp.mpf(alpha[idx[0]].numerator) / alpha[idx[0]].denominator
for k, (s, x) in enumerate(zip(idx, durs)):
    sp = soj[s]
    lik *= mp.exp(log_gamma_density(x, str(sp["shape"]), str(sp["rate"])))
    if k + 1 < len(idx):
        p = trans[s][idx[k + 1]]
        lik *= mp.mpf(p.numerator) / p.denominator
show("chocolate-70 trajectory loglik", mp.log(lik))

# Tiny mixture: 3 states, no absorbing state, G = 2, B = 2.
A = [[mp.mpf("0.6"), mp.mpf("0.3"), mp.mpf("0.1")], [mp.mpf("0.2"), mp.mpf("0.2"), mp.mpf("0.6")]]
P = [
    [[0, mp.mpf("0.7"), mp.mpf("0.3")], [mp.mpf("0.5"), 0, mp.mpf("0.5")], [mp.mpf("0.9"), mp.mpf("0.1"), 0]],
    [[0, mp.mpf("0.2"), mp.mpf("0.8")], [mp.mpf("0.4"), 0, mp.mpf("0.6")], [mp.mpf("0.3"), mp.mpf("0.7"), 0]],
]
S = [[("2", "1"), ("1.5", "0.5"), ("3", "2")], [("1", "0.4"), ("4", "1"), ("0.8", "0.3")]]
PI = [mp.mpf("0.35"), mp.mpf("0.65")]
subjects = [
    [([0, 1, 2], ["1.5", "2.0", "0.7"]), ([0, 2], ["2.2", "1.1"])],
    [([2, 0, 1, 0], ["3.3", "0.4", "2.6", "1.9"]), ([1, 2, 1], ["5.0", "0.9", "4.1"])],
    [([1, 0], ["0.3", "6.2"]), ([2, 1, 0, 2], ["1.4", "2.8", "0.6", "2.3"])],
]


def traj_lik(g, states, ds):
    v = A[g][states[0]]
    for k, (s, x) in enumerate(zip(states, ds)):
        a, lam = S[g][s]
        v *= mp.exp(log_gamma_density(x, a, lam))
        if k + 1 < len(states):
            v *= P[g][s][states[k + 1]]
    return v


total = mp.mpf(0)
for i, subj in enumerate(subjects):
    joint = []
    for g in range(2):
        v = mp.mpf(1)
        for states, ds in subj:
            v *= traj_lik(g, states, ds)
        joint.append(PI[g] * v)
    total += mp.log(sum(joint))
    for g in range(2):
        show(f"toy posterior[{i}][{g}]", joint[g] / sum(joint))
show("toy mixture loglik", total)

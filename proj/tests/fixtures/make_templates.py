"""Hand expansion of the PQC catalog, frozen into templates.json.

Written from the gate diagrams, independent of the C++ expansion code.
Rerun only when the catalog interpretation changes on purpose.
"""
import json
import pathlib


def layer(tid, n, nxt):
    ops = []

    def rot(kind):
        for q in range(n):
            ops.append({"gate": kind, "target": q, "slot": "param", "index": nxt()})

    def crx(c, t):
        ops.append({"gate": "CRX", "control": c, "target": t, "slot": "param", "index": nxt()})

    rot("RX")
    rot("RZ")
    if tid == "circuit4":
        for q in reversed(range(1, n)):
            crx(q, q - 1)
    elif tid == "circuit6":
        for c in reversed(range(n)):
            for t in reversed(range(n)):
                if t != c:
                    crx(c, t)
        rot("RX")
        rot("RZ")
    elif tid == "circuit8":
        for q in range(1, n, 2):
            crx(q, q - 1)
        rot("RX")
        rot("RZ")
        for q in range(2, n, 2):
            crx(q, q - 1)
    elif tid == "circuit19" and n >= 2:
        for q in reversed(range(n)):
            crx(q, (q + 1) % n)
    return ops


def expand(tid, n, layers, n_features, h_prefix):
    ops = []
    position = 0
    while position * n < n_features:
        width = min(n, n_features - position * n)
        if h_prefix:
            ops += [{"gate": "H", "target": q, "slot": "none"} for q in range(width)]
        ops += [{"gate": "RZ", "target": q, "slot": "feature", "index": position * n + q}
                for q in range(width)]
        position += 1
    if h_prefix:
        ops += [{"gate": "H", "target": q, "slot": "none"} for q in range(n_features, n)]
    counter = [0]

    def nxt():
        counter[0] += 1
        return counter[0] - 1

    for _ in range(layers):
        ops += layer(tid, n, nxt)
    return {"template": tid, "n_qubits": n, "layers": layers, "n_features": n_features,
            "h_prefix": h_prefix, "n_params": counter[0], "ops": ops}


cases = []
for tid in ["circuit1", "circuit4", "circuit6", "circuit8", "circuit19"]:
    for n in [1, 2, 3, 4]:
        for layers in [1, 2]:
            cases.append(expand(tid, n, layers, 2 * n - 1, True))
        cases.append(expand(tid, n, 1, 0, False))

out = pathlib.Path(__file__).with_name("templates.json")
out.write_text(json.dumps(cases, indent=1) + "\n")
print(f"wrote {len(cases)} expansions to {out}")

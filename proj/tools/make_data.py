"""Writes the sample JSON inputs under data/."""
import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"
I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def choi(kraus, din):
    """Unnormalized Choi matrix, input factor first."""
    dout = kraus[0].shape[0]
    j = np.zeros((din * dout, din * dout), dtype=complex)
    for k in kraus:
        v = np.zeros(din * dout, dtype=complex)
        for i in range(din):
            v += np.kron(np.eye(din)[i], k[:, i])
        j += np.outer(v, v.conj())
    return j


def mat(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def instrument(branches, din, dout, labels=None):
    labels = labels or [str(a) for a in range(len(branches))]
    return {"format": "instrument.v1", "dim_in": din, "dim_out": dout, "labels": labels,
            "branches": [mat(b) for b in branches]}


def povm(elements, labels=None):
    labels = labels or [str(a) for a in range(len(elements))]
    return {"format": "povm.v1", "dim": elements[0].shape[0], "labels": labels,
            "elements": [mat(e) for e in elements]}


def write(name, obj):
    (OUT / name).write_text(json.dumps(obj, indent=1) + "\n")


def main():
    OUT.mkdir(exist_ok=True)
    w = [0.5, 1 / 6, 1 / 6, 1 / 6]
    write("example1.json", instrument([choi([np.sqrt(p) * u], 2) for p, u in zip(w, [I2, X, Y, Z])], 2, 2,
                                      ["1", "2", "3", "4"]))
    write("identity.json", instrument([choi([I2], 2)], 2, 2))
    write("depolarize0.json", instrument([0.5 * np.eye(4)], 2, 2))
    p0, p1 = np.diag([1.0, 0]), np.diag([0, 1.0])
    plus, minus = 0.5 * (I2 + X), 0.5 * (I2 - X)
    write("luders_zx.json", [instrument([choi([p0], 2), choi([p1], 2)], 2, 2),
                             instrument([choi([plus], 2), choi([minus], 2)], 2, 2)])
    write("pvm_z.json", povm([p0, p1]))
    write("pvm_x.json", povm([plus, minus]))
    write("witness_ab.json", {"format": "witness.v1", "note": "pair (A, B)",
                              "sets": [[povm([p0, p1], ["1", "2"]), povm([plus, minus], ["1", "2"])]]})


if __name__ == "__main__":
    main()

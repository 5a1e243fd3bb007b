"""Generate satisfiable uniform random 3-SAT instances in DIMACS format.

Each clause has three distinct variables with random signs. Instances are
kept only once WalkSAT finds a model; the model is written next to the
instance as a bit string (bit i is variable i + 1).

    python3 scripts/gen_3sat.py OUT_DIR NAME VARS CLAUSES SEED
"""

import random
import sys
from pathlib import Path


def make_instance(rng, n, m):
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


def walksat(clauses, n, rng, max_flips=2_000_000, noise=0.5):
    assign = [rng.random() < 0.5 for _ in range(n + 1)]
    occurs = [[] for _ in range(n + 1)]
    for ci, c in enumerate(clauses):
        for lit in c:
            occurs[abs(lit)].append(ci)

    def sat(lit):
        return assign[abs(lit)] == (lit > 0)

    true_count = [sum(sat(l) for l in c) for c in clauses]
    unsat = {ci for ci, t in enumerate(true_count) if t == 0}
    for _ in range(max_flips):
        if not unsat:
            return assign[1:]
        c = clauses[rng.choice(tuple(unsat))]

        def breaks(v):
            return sum(1 for ci in occurs[v] if true_count[ci] == 1 and any(
                abs(l) == v and sat(l) for l in clauses[ci]))

        if rng.random() < noise:
            v = abs(rng.choice(c))
        else:
            v = min((abs(l) for l in c), key=breaks)
        for ci in occurs[v]:
            for l in clauses[ci]:
                if abs(l) == v:
                    true_count[ci] += -1 if sat(l) else 1
        assign[v] = not assign[v]
        for ci in occurs[v]:
            if true_count[ci] == 0:
                unsat.add(ci)
            else:
                unsat.discard(ci)
    return None


def main():
    out, name, n, m, seed = sys.argv[1], sys.argv[2], int(sys.argv[3]), int(sys.argv[4]), int(sys.argv[5])
    rng = random.Random(seed)
    attempt = 0
    while True:
        attempt += 1
        clauses = make_instance(rng, n, m)
        model = walksat(clauses, n, rng)
        if model is not None:
            break
    assert all(any(model[abs(l) - 1] == (l > 0) for l in c) for c in clauses)
    out = Path(out)
    lines = [
        f"c uniform random 3-SAT, {n} variables, {m} clauses",
        f"c generator seed {seed}, kept at attempt {attempt}",
        f"p cnf {n} {m}",
    ]
    lines += [" ".join(map(str, c)) + " 0" for c in clauses]
    (out / f"{name}.cnf").write_text("\n".join(lines) + "\n")
    (out / f"{name}.sol").write_text("".join("1" if b else "0" for b in model) + "\n")
    print(f"{name}: attempt {attempt}")


if __name__ == "__main__":
    main()

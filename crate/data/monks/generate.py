"""Generate Monks-style benchmark files from the three published target rules.

Attributes: a1,a2,a4 in {1,2,3}; a3,a6 in {1,2}; a5 in {1,2,3,4}.
The test file of each problem is the full 432-row grid labelled by the
noise-free rule. Training files are seeded samples without replacement with
the published sizes (124, 169, 122); monks-3 flips 5% of training labels.
"""
import csv
import itertools
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
DOMAINS = [(1, 2, 3), (1, 2, 3), (1, 2), (1, 2, 3), (1, 2, 3, 4), (1, 2)]
NAMES = ["a1", "a2", "a3", "a4", "a5", "a6"]


def monks1(a):
    return a[0] == a[1] or a[4] == 1


def monks2(a):
    return sum(1 for v in a if v == 1) == 2


def monks3(a):
    return (a[4] == 3 and a[3] == 1) or (a[4] != 4 and a[1] != 3)


PROBLEMS = [("monks-1", monks1, 124, 0.0), ("monks-2", monks2, 169, 0.0), ("monks-3", monks3, 122, 0.05)]


def write(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NAMES + ["class"])
        for attrs, label in rows:
            w.writerow(list(attrs) + [int(label)])


def main(seed=2024):
    grid = list(itertools.product(*DOMAINS))
    schema = {"target": "class", "positive_label": "1", "columns": {n: "categorical" for n in NAMES}}
    for idx, (name, rule, size, noise) in enumerate(PROBLEMS):
        rng = random.Random(seed + idx)
        test = [(a, rule(a)) for a in grid]
        sample = sorted(rng.sample(range(len(grid)), size))
        train = [(grid[i], rule(grid[i])) for i in sample]
        n_flip = round(noise * size)
        for i in rng.sample(range(size), n_flip):
            train[i] = (train[i][0], not train[i][1])
        write(HERE / f"{name}.train.csv", train)
        write(HERE / f"{name}.test.csv", test)
    (HERE / "schema.json").write_text(json.dumps(schema, indent=2) + "\n")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Write the small categorical benchmark datasets under data/.

iris, wine and breast_cancer come from scikit-learn and are quantile-binned
into 4 levels per attribute. titanic is expanded from the R Titanic
contingency table, tic-tac-toe is enumerated from complete games, and the
three MONK problems are evaluated on their full 432-instance attribute grid.
"""

import argparse
import csv
import itertools
from pathlib import Path

import numpy as np


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    print(f"{path}: {len(rows)} rows")


def binned(loader, name, out, bins=4):
    bunch = loader()
    x, y = bunch.data, bunch.target
    cols = []
    for j in range(x.shape[1]):
        edges = np.unique(np.quantile(x[:, j], np.linspace(0, 1, bins + 1)[1:-1]))
        cols.append(np.searchsorted(edges, x[:, j], side="right"))
    names = [f"V{j + 1}" for j in range(x.shape[1])]
    rows = [[f"q{cols[j][i] + 1}" for j in range(x.shape[1])] + [str(bunch.target_names[y[i]])]
            for i in range(x.shape[0])]
    write(out / f"{name}.csv", names + ["class"], rows)


def titanic(out):
    # counts per (survived, age, sex) over class 1st, 2nd, 3rd, Crew
    table = {
        ("No", "Child", "Male"): (0, 0, 35, 0),
        ("No", "Child", "Female"): (0, 0, 17, 0),
        ("No", "Adult", "Male"): (118, 154, 387, 670),
        ("No", "Adult", "Female"): (4, 13, 89, 3),
        ("Yes", "Child", "Male"): (5, 11, 13, 0),
        ("Yes", "Child", "Female"): (1, 13, 14, 0),
        ("Yes", "Adult", "Male"): (57, 14, 75, 192),
        ("Yes", "Adult", "Female"): (140, 80, 76, 20),
    }
    rows = []
    for (survived, age, sex), counts in table.items():
        for cls, k in zip(("1st", "2nd", "3rd", "Crew"), counts):
            rows += [[cls, sex, age, survived]] * k
    write(out / "titanic.csv", ["Class", "Sex", "Age", "Survived"], rows)


LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6)]


def winner(board):
    for a, b, c in LINES:
        if board[a] != "b" and board[a] == board[b] == board[c]:
            return board[a]
    return None


def tictactoe(out):
    finals = set()

    def play(board, player):
        if winner(board) or "b" not in board:
            finals.add(tuple(board))
            return
        for k in range(9):
            if board[k] == "b":
                board[k] = player
                play(board, "o" if player == "x" else "x")
                board[k] = "b"

    play(["b"] * 9, "x")
    rows = [list(b) + ["positive" if winner(b) == "x" else "negative"] for b in sorted(finals)]
    names = ["top-left", "top-middle", "top-right", "middle-left", "middle-middle", "middle-right",
             "bottom-left", "bottom-middle", "bottom-right"]
    write(out / "tic-tac-toe.csv", names + ["class"], rows)


def monks(out):
    grid = list(itertools.product(range(1, 4), range(1, 4), range(1, 3), range(1, 4), range(1, 5), range(1, 3)))
    concepts = {
        "monk1": lambda a: a[0] == a[1] or a[4] == 1,
        "monk2": lambda a: sum(v == 1 for v in a) == 2,
        "monk3": lambda a: (a[4] == 3 and a[3] == 1) or (a[4] != 4 and a[1] != 3),
    }
    names = [f"a{k}" for k in range(1, 7)]
    for name, concept in concepts.items():
        rows = [[f"{names[k]}_{v}" for k, v in enumerate(a)] + [str(int(concept(a)))] for a in grid]
        write(out / f"{name}.csv", names + ["class"], rows)


def main():
    from sklearn import datasets

    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    out = Path(parser.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)
    binned(datasets.load_iris, "iris", out)
    binned(datasets.load_wine, "wine", out)
    binned(datasets.load_breast_cancer, "breast_cancer", out)
    titanic(out)
    tictactoe(out)
    monks(out)


if __name__ == "__main__":
    main()

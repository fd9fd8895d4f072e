"""Generate the bundled SYNTHETIC stand-in for the Pima diabetes table.

The canonical Pima Indians Diabetes Database is not redistributed with this
repo. This script fabricates a 768-row table with the same shape: 500/268
class split, published class-conditional means and spreads, within-class
correlation structure, zero-coded missing values at the published counts,
and dataset-typical rounding. Rows are then arranged so that record 39 is
a high-BMI at-risk patient usable in walkthroughs.

Every draw flows from one seed; rerunning the script reproduces the CSV
byte for byte. Output: src/riskscope/assets/pima_synthetic.csv
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

from riskscope.data import Dataset, load_dataset, pima_schema
from riskscope.gbdt import train

OUT = Path(__file__).resolve().parent.parent / "src" / "riskscope" / "assets" / "pima_synthetic.csv"

FEATURES = [
    "Pregnancies", "Glucose", "BloodPressure", "SkinThickness",
    "Insulin", "BMI", "DiabetesPedigreeFunction", "Age",
]

N_BY_CLASS = {0: 500, 1: 268}

# Non-zero-value means/stds per class, from published summaries of the real table.
STATS = {
    0: {
        "Pregnancies": (3.30, 3.02), "Glucose": (110.6, 24.8), "BloodPressure": (70.9, 12.2),
        "SkinThickness": (27.2, 10.0), "Insulin": (130.3, 102.5), "BMI": (30.9, 6.9),
        "DiabetesPedigreeFunction": (0.430, 0.299), "Age": (31.2, 11.7),
    },
    1: {
        "Pregnancies": (4.87, 3.74), "Glucose": (142.3, 29.6), "BloodPressure": (75.3, 12.3),
        "SkinThickness": (33.0, 10.2), "Insulin": (206.8, 132.7), "BMI": (35.4, 6.6),
        "DiabetesPedigreeFunction": (0.551, 0.372), "Age": (37.1, 11.0),
    },
}

# Zero-coded missing values per class (real-table counts). Insulin precedes
# SkinThickness so skin gaps can nest inside insulin gaps.
ZERO_COUNTS = {
    "Glucose": {0: 3, 1: 2},
    "BloodPressure": {0: 19, 1: 16},
    "Insulin": {0: 236, 1: 138},
    "SkinThickness": {0: 139, 1: 88},
    "BMI": {0: 9, 1: 2},
}

CLIP = {
    "Pregnancies": (0, 17), "Glucose": (44, 199), "BloodPressure": (24, 122),
    "SkinThickness": (7, 99), "Insulin": (14, 846), "BMI": (18.2, 67.1),
    "DiabetesPedigreeFunction": (0.078, 2.42), "Age": (21, 81),
}

# Right-skewed marginals are mapped through a lognormal; the rest stay normal.
LOGNORMAL = {"Pregnancies", "Insulin", "DiabetesPedigreeFunction", "Age"}
SHIFT = {"Pregnancies": -1.0, "Age": 20.0}  # lognormal support offset

# Within-class latent correlations (upper triangle; unlisted pairs are 0).
CORR_PAIRS = {
    ("Pregnancies", "Age"): 0.55,
    ("Glucose", "Insulin"): 0.35,
    ("Glucose", "Age"): 0.15,
    ("BloodPressure", "Age"): 0.25,
    ("BloodPressure", "BMI"): 0.25,
    ("SkinThickness", "BMI"): 0.42,
    ("SkinThickness", "Insulin"): 0.30,
    ("Insulin", "BMI"): 0.20,
    ("Glucose", "BMI"): 0.12,
}


def correlation_matrix() -> np.ndarray:
    d = len(FEATURES)
    C = np.eye(d)
    for (a, b), r in CORR_PAIRS.items():
        i, j = FEATURES.index(a), FEATURES.index(b)
        C[i, j] = C[j, i] = r
    w, V = np.linalg.eigh(C)
    if w.min() <= 1e-8:  # clip to nearest positive-definite
        C = V @ np.diag(np.clip(w, 1e-6, None)) @ V.T
        s = np.sqrt(np.diag(C))
        C = C / np.outer(s, s)
    return C


def lognormal_params(mean: float, std: float) -> tuple[float, float]:
    cv2 = (std / mean) ** 2
    sigma2 = math.log1p(cv2)
    return math.log(mean) - sigma2 / 2.0, math.sqrt(sigma2)


def marginal(feature: str, z: np.ndarray, cls: int) -> np.ndarray:
    mean, std = STATS[cls][feature]
    if feature in LOGNORMAL:
        shift = SHIFT.get(feature, 0.0)
        mu, sigma = lognormal_params(mean - shift, std)
        vals = np.exp(mu + sigma * z) + shift
    else:
        vals = mean + std * z
    lo, hi = CLIP[feature]
    return np.clip(vals, lo, hi)


def round_like_source(feature: str, vals: np.ndarray) -> np.ndarray:
    if feature == "BMI":
        return np.round(vals, 1)
    if feature == "DiabetesPedigreeFunction":
        return np.round(vals, 3)
    return np.rint(vals)


def generate(seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(correlation_matrix())
    blocks, labels = [], []
    for cls, n in N_BY_CLASS.items():
        Z = rng.standard_normal((n, len(FEATURES))) @ L.T
        cols = [round_like_source(f, marginal(f, Z[:, j], cls)) for j, f in enumerate(FEATURES)]
        X = np.column_stack(cols)
        for f, counts in ZERO_COUNTS.items():
            j = FEATURES.index(f)
            k = counts[cls]
            if f == "SkinThickness":
                # Missingness nests: skin gaps sit inside the insulin gaps.
                ins_zero = np.nonzero(X[:, FEATURES.index("Insulin")] == 0)[0]
                rows = rng.choice(ins_zero, size=k, replace=False)
            else:
                rows = rng.choice(n, size=k, replace=False)
            X[rows, j] = 0.0
        blocks.append(X)
        labels.append(np.full(n, cls))
    X = np.vstack(blocks)
    y = np.concatenate(labels)
    order = rng.permutation(len(y))
    return X[order], y[order]


def pick_demo_row(X: np.ndarray, y: np.ndarray, model) -> int | None:
    """An at-risk row whose risk hinges on BMI: still at risk at BMI 28,
    below risk by BMI 22, so a walk down the BMI grid flips in the 20s."""
    proba = model.predict_proba_batch(X)
    bmi_j = FEATURES.index("BMI")
    glu_j = FEATURES.index("Glucose")
    for i in np.argsort(-proba):
        if y[i] != 1 or proba[i] < 0.55:
            continue
        if not (35.0 <= X[i, bmi_j] <= 39.0 and 120 <= X[i, glu_j] <= 165):
            continue
        trial = np.repeat(X[i][None, :], 2, axis=0)
        trial[:, bmi_j] = [28.0, 22.0]
        p28, p22 = model.predict_proba_batch(trial)
        if p28 >= 0.5 and p22 < 0.5:
            return int(i)
    return None


def write_csv(X: np.ndarray, y: np.ndarray, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(FEATURES + ["Outcome"])]
    for row, label in zip(X, y):
        cells = []
        for f, v in zip(FEATURES, row):
            if f == "BMI":
                cells.append(f"{v:.1f}")
            elif f == "DiabetesPedigreeFunction":
                cells.append(f"{v:.3f}")
            else:
                cells.append(str(int(v)))
        cells.append(str(int(label)))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def main() -> int:
    schema = pima_schema()
    for seed in range(50):
        X, y = generate(seed)
        ds = Dataset.from_arrays(schema, X, y)
        model = train(ds)
        acc = model.metadata["test_accuracy"]
        if not 0.70 <= acc <= 0.765:
            print(f"seed {seed}: accuracy {acc:.3f} outside target band, next")
            continue
        demo = pick_demo_row(X, y, model)
        if demo is None:
            print(f"seed {seed}: no BMI-driven demo row, next")
            continue
        X[[39, demo]] = X[[demo, 39]]
        y[[39, demo]] = y[[demo, 39]]
        ds2 = Dataset.from_arrays(schema, X, y)
        model2 = train(ds2)
        acc2 = model2.metadata["test_accuracy"]
        if not 0.70 <= acc2 <= 0.765 or model2.predict(X[39]) != 1:
            print(f"seed {seed}: post-swap accuracy {acc2:.3f} or row 39 invalid, next")
            continue
        write_csv(X, y, OUT)
        print(f"seed {seed}: wrote {OUT}")
        check = load_dataset(OUT, schema)
        m = train(check)
        r39 = check.record(39)
        print(f"  rows={len(check)} pos={int(check.labels.sum())} accuracy={m.metadata['test_accuracy']:.4f}")
        print(f"  record 39: BMI={r39.values[5]} Glucose={r39.values[1]} proba={m.predict_proba(r39.values):.3f}")
        return 0
    print("no seed satisfied the fixture constraints")
    return 1


if __name__ == "__main__":
    sys.exit(main())

"""Clustering and reconstruction metrics: K-means on H, accuracy, NMI, relative error."""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .matrix import frobenius_norm, make_rng


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    history: list  # inertia after every Lloyd assignment


@dataclass
class ClusterReport:
    accuracy: float
    nmi: float
    accuracy_std: float
    nmi_std: float
    trials: int
    per_trial: list = field(default_factory=list)
    rel_error: float = None

    def to_dict(self):
        out = asdict(self)
        out["per_trial"] = [{"accuracy": a, "nmi": b} for a, b in self.per_trial]
        out["summary"] = {
            "accuracy": f"{100 * self.accuracy:.2f}({100 * self.accuracy_std:.2f})",
            "nmi": f"{100 * self.nmi:.2f}({100 * self.nmi_std:.2f})",
        }
        return out


def _kmeanspp(x, k, rng):
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[c] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))
    return centers


def _assign(x, centers):
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, float(d2[np.arange(x.shape[0]), labels].sum())


def lloyd(x, centers, max_iter=300):
    centers = centers.copy()
    history = []
    labels, inertia = _assign(x, centers)
    history.append(inertia)
    for _ in range(max_iter):
        for c in range(centers.shape[0]):
            members = labels == c
            if np.any(members):
                centers[c] = x[members].mean(axis=0)
        new_labels, inertia = _assign(x, centers)
        history.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return KMeansResult(labels, centers, inertia, history)


def kmeans(h, k, restarts=10, seed=0, max_iter=300, details=False):
    """Cluster the columns of ``h`` (r x n) into ``k`` groups.

    Keeps the lowest-inertia run over ``restarts`` k-means++ seedings.
    """
    x = np.asarray(h, dtype=np.float64).T
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    best = None
    for run in range(restarts):
        rng = make_rng(seed, run)
        res = lloyd(x, _kmeanspp(x, k, rng), max_iter)
        if best is None or res.inertia < best.inertia:
            best = res
    return best if details else best.labels


def _contingency(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"label arrays differ in length: {pred.size} vs {truth.size}")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max(initial=-1) + 1, t.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def accuracy(pred, truth):
    """Best one-to-one matching of predicted to true clusters (Hungarian)."""
    table = _contingency(pred, truth)
    if table.size == 0:
        return 1.0
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum() / table.sum())


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth, average="geometric"):
    """Normalized mutual information; ``average`` is "geometric" or "arithmetic"."""
    table = _contingency(pred, truth).astype(np.float64)
    n = table.sum()
    if n == 0:
        return 1.0
    hp = _entropy(table.sum(axis=1))
    ht = _entropy(table.sum(axis=0))
    if hp == 0.0 or ht == 0.0:
        return 1.0 if hp == ht else 0.0
    pij = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / (n * n)
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / outer[nz])).sum())
    if average == "geometric":
        denom = np.sqrt(hp * ht)
    elif average == "arithmetic":
        denom = 0.5 * (hp + ht)
    else:
        raise ValueError(f"average must be 'geometric' or 'arithmetic', got {average!r}")
    return float(min(max(mi / denom, 0.0), 1.0))


def rel_error(v_clean, w, h):
    """||V_clean - W H||_F / ||V_clean||_F."""
    v_clean = np.asarray(v_clean, dtype=np.float64)
    denom = frobenius_norm(v_clean)
    if denom == 0.0:
        raise ValueError("clean matrix is all zero; relative error undefined")
    w = np.asarray(w, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if w.shape[1] != h.shape[0] or v_clean.shape != (w.shape[0], h.shape[1]):
        raise ValueError(f"shape mismatch: V {v_clean.shape}, W {w.shape}, H {h.shape}")
    return frobenius_norm(v_clean - w @ h) / denom


def evaluate(h, truth, k=None, trials=10, restarts=10, seed=0, v_clean=None, w=None):
    """Repeat K-means on H ``trials`` times and summarise accuracy and NMI."""
    h = np.asarray(h, dtype=np.float64)
    truth = np.asarray(truth)
    if truth.size != h.shape[1]:
        raise ValueError(f"{truth.size} labels for {h.shape[1]} columns")
    if k is None:
        k = np.unique(truth).size
    per = []
    for trial in range(trials):
        labels = kmeans(h, k, restarts=restarts, seed=int(make_rng(seed, trial).integers(2**63)))
        per.append((accuracy(labels, truth), nmi(labels, truth)))
    arr = np.array(per) if per else np.zeros((0, 2))
    err = rel_error(v_clean, w, h) if v_clean is not None and w is not None else None
    return ClusterReport(
        accuracy=float(arr[:, 0].mean()) if per else float("nan"),
        nmi=float(arr[:, 1].mean()) if per else float("nan"),
        accuracy_std=float(arr[:, 0].std()) if per else float("nan"),
        nmi_std=float(arr[:, 1].std()) if per else float("nan"),
        trials=trials, per_trial=per, rel_error=err,
    )

import numpy as np
from scipy import stats as _st

from ..errors import DegenerateInput, InvalidArgument


def welch_t(a, b):
    """Welch statistic and Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise InvalidArgument("each sample needs at least two points")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidArgument("samples contain non-finite values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    gap = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0:
        if gap == 0:
            raise DegenerateInput("both samples are constant with equal means")
        return np.copysign(np.inf, gap), float(a.size + b.size - 2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    return gap / np.sqrt(se2), df


def t_test_one_tailed(a, b):
    """Upper-tail p-value of a two-sample Welch t-test for ``mean(a) > mean(b)``."""
    t, df = welch_t(a, b)
    return float(_st.t.sf(t, df))


def classification_metrics(predicted, actual):
    """Accuracy, precision, recall and F1 with +1 as the positive class.

    Metrics whose denominator is zero are reported as 0 and listed under
    ``"undefined"``.
    """
    p = np.asarray(predicted).ravel()
    a = np.asarray(actual).ravel()
    if p.size != a.size:
        raise InvalidArgument("predicted and actual differ in length")
    if p.size == 0:
        raise InvalidArgument("no predictions")
    tp = int(np.sum((p == 1) & (a == 1)))
    fp = int(np.sum((p == 1) & (a != 1)))
    fn = int(np.sum((p != 1) & (a == 1)))
    undefined = []
    precision = tp / (tp + fp) if tp + fp else 0.0
    if tp + fp == 0:
        undefined.append("precision")
    recall = tp / (tp + fn) if tp + fn else 0.0
    if tp + fn == 0:
        undefined.append("recall")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        undefined.append("f1")
    return {
        "accuracy": float(np.mean(p == a)),
        "precision": float(precision),
        "recall": float(recall),
        "f1": float(f1),
        "undefined": undefined,
    }


def rmse(predicted, actual):
    p = np.asarray(predicted, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if p.size != a.size or p.size == 0:
        raise InvalidArgument("rmse needs two nonempty vectors of equal length")
    return float(np.sqrt(np.mean((p - a) ** 2)))

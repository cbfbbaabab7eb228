"""Measurement-side pipeline on multichannel signal blocks.

Implements the linear-algebra half of binary command classification:
common-average referencing, two-class spatial-filter training with
rank-aware whitening, normalized log-power features, a pooled-covariance
linear discriminant, and the signed-confidence log-ratio used for post hoc
signal-quality analysis. Blocks come from files or from the bundled
two-class colored-noise generator; there is no hardware or streaming here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "CspModel",
    "LdaModel",
    "SignalBlock",
    "car_reference",
    "classify",
    "confidence_logratio",
    "extract_features",
    "generate_blocks",
    "load_block_csv",
    "load_models",
    "save_models",
    "train_csp",
    "train_lda",
]

_EIG_FLOOR = 1e-10  # whitening keeps eigenvalues above this absolute floor


@dataclass(frozen=True)
class SignalBlock:
    """T x d sample matrix with a binary class label (0 left, 1 right)."""

    samples: np.ndarray
    label: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.samples.ndim != 2:
            raise ValueError("samples must be a T x d matrix")
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


@dataclass(frozen=True)
class CspModel:
    """Spatial filters: full (d-1) x d bank and the 4 x d selected rows."""

    w_full: np.ndarray
    w_selected: np.ndarray
    eigenvalues: np.ndarray  # of the whitened left-class covariance, descending


@dataclass(frozen=True)
class LdaModel:
    weights: np.ndarray  # hyperplane normal (4,)
    offset: float

    def score(self, f: np.ndarray) -> float:
        """Signed distance surrogate mu^T f - tau (the class log-odds)."""
        return float(self.weights @ np.asarray(f, dtype=float) - self.offset)


def car_reference(block: SignalBlock) -> SignalBlock:
    """Subtract each sample's cross-channel mean; row sums become zero."""
    x = block.samples
    if x.shape[1] < 2:
        raise ValueError("referencing needs at least two channels")
    return SignalBlock(x - x.mean(axis=1, keepdims=True), block.label)


def _class_covariance(blocks: Sequence[SignalBlock]) -> np.ndarray:
    """Average of trace-normalized, channel-centered block covariances."""
    acc = None
    for b in blocks:
        x = b.samples - b.samples.mean(axis=0, keepdims=True)
        c = x.T @ x
        c /= np.trace(c)
        acc = c if acc is None else acc + c
    return acc / len(blocks)


def train_csp(left: Sequence[SignalBlock], right: Sequence[SignalBlock]) -> CspModel:
    """Train the spatial filter bank from referenced training blocks.

    The composite covariance of referenced data has rank at most d-1, so
    whitening keeps the top d-1 eigenpairs; the whitened class covariances
    then share eigenvectors with eigenvalue pairs summing to one, and the
    filter bank projects onto those eigenvectors sorted by descending
    left-class eigenvalue. The selected bank keeps the top two filters for
    each class: rows 1, 2, d-2, d-1.
    """
    if not left or not right:
        raise ValueError("need at least one block per class")
    d = left[0].samples.shape[1]
    for b in list(left) + list(right):
        if b.samples.shape[1] != d:
            raise ValueError("channel counts differ across blocks")
        if b.samples.shape[0] <= d:
            raise ValueError("blocks need more samples than channels")

    c_l = _class_covariance(left)
    c_r = _class_covariance(right)
    comp = c_l + c_r

    evals, evecs = np.linalg.eigh(comp)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    keep = d - 1
    if np.sum(evals > _EIG_FLOOR) < keep:
        raise ValueError("composite covariance is rank deficient beyond referencing")
    lam_hat = evals[:keep]
    u_hat = evecs[:, :keep]
    p = (u_hat / np.sqrt(lam_hat)).T  # (d-1) x d whitening

    s_l = p @ c_l @ p.T
    b_evals, b_vecs = np.linalg.eigh(s_l)
    order = np.argsort(b_evals)[::-1]
    b_evals, b_vecs = b_evals[order], b_vecs[:, order]

    w = b_vecs.T @ p  # (d-1) x d
    sel = [0, 1, keep - 2, keep - 1]  # top two filters per class
    return CspModel(w_full=w, w_selected=w[sel], eigenvalues=b_evals)


def extract_features(block: SignalBlock | np.ndarray, csp: CspModel) -> np.ndarray:
    """Normalized log channel powers of the spatially filtered block.

    f_i = ln(p_i / sum_j p_j) with p_i the mean square of filtered channel
    i, so features are invariant to a common gain on the input.
    """
    x = block.samples if isinstance(block, SignalBlock) else np.asarray(block, dtype=float)
    if x.shape[1] != csp.w_selected.shape[1]:
        raise ValueError("block channel count does not match the trained filters")
    z = x @ csp.w_selected.T
    power = np.mean(z * z, axis=0)
    total = power.sum()
    if total <= 0.0:
        raise ValueError("block has zero power through the filters")
    return np.log(power / total)


def train_lda(
    features: Sequence[np.ndarray], labels: Sequence[int], ridge: float = 1e-6
) -> LdaModel:
    """Two-class discriminant with equal priors and pooled covariance.

    A singular pooled covariance falls back to a ridge of ``ridge`` times
    the mean diagonal; pass ridge=0 to make that case a hard error.
    """
    f = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if set(np.unique(y)) != {0, 1}:
        raise ValueError("both classes must be present")
    m0 = f[y == 0].mean(axis=0)
    m1 = f[y == 1].mean(axis=0)
    pooled = np.zeros((f.shape[1], f.shape[1]))
    for cls, mean in ((0, m0), (1, m1)):
        diff = f[y == cls] - mean
        pooled += diff.T @ diff
    pooled /= max(1, f.shape[0] - 2)

    try:
        weights = np.linalg.solve(pooled, m1 - m0)
        if not np.all(np.isfinite(weights)) or np.linalg.cond(pooled) > 1e12:
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        if ridge <= 0:
            raise ValueError("pooled covariance is singular; enable the ridge")
        pooled = pooled + ridge * max(1.0, float(np.trace(pooled)) / pooled.shape[0]) * np.eye(
            pooled.shape[0]
        )
        weights = np.linalg.solve(pooled, m1 - m0)
    offset = float(weights @ (m0 + m1) / 2.0)
    return LdaModel(weights=weights, offset=offset)


def classify(f: np.ndarray, model: LdaModel) -> int:
    """1 when the score mu^T f - tau is positive, else 0."""
    return 1 if model.score(f) > 0 else 0


def confidence_logratio(f: np.ndarray, model: LdaModel, x: int) -> float:
    """Signed classifier confidence against the ground-truth command x.

    (2x - 1)(mu^T f - tau): positive when the classifier leans toward the
    correct class, negative when it is confidently wrong, zero on the
    decision boundary.
    """
    if x not in (0, 1):
        raise ValueError("ground truth must be 0 or 1")
    return (2 * x - 1) * model.score(f)


def generate_blocks(
    n_per_class: int,
    t_samples: int = 512,
    d_channels: int = 19,
    seed=0,
    contrast: float = 4.0,
    drift: float = 0.0,
) -> list[SignalBlock]:
    """Bundled two-class colored-noise generator, already referenced.

    Class 0 boosts the variance of the first channel group, class 1 the
    second, by ``contrast``; an AR(1) filter band-limits the noise.
    ``drift`` in [0, 1] shrinks the contrast linearly over the session so
    late blocks separate less, mimicking a degrading signal. Blocks
    alternate classes in presentation order.
    """
    if n_per_class < 1:
        raise ValueError("need at least one block per class")
    rng = np.random.default_rng(seed)
    total = 2 * n_per_class
    blocks: list[SignalBlock] = []
    g1 = slice(0, max(1, d_channels // 4))
    g2 = slice(max(1, d_channels // 4), max(2, d_channels // 2))
    for i in range(total):
        label = i % 2
        fade = 1.0 - drift * (i / max(1, total - 1))
        boost = 1.0 + (contrast - 1.0) * fade
        scales = np.ones(d_channels)
        scales[g1 if label == 0 else g2] = np.sqrt(boost)
        noise = rng.normal(size=(t_samples, d_channels))
        # AR(1) coloring keeps the band limited without a filter stack
        for t in range(1, t_samples):
            noise[t] = 0.6 * noise[t - 1] + 0.8 * noise[t]
        x = noise * scales
        blocks.append(car_reference(SignalBlock(x, label)))
    return blocks


def load_block_csv(path, label: int) -> SignalBlock:
    """Read a block from CSV, one row per sample, one column per channel."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return SignalBlock(data, label)


def save_models(path, csp: CspModel, lda: LdaModel) -> None:
    """Serialize trained models to the documented JSON layout."""
    payload = {
        "version": 1,
        "csp": {
            "w_full": csp.w_full.tolist(),
            "w_selected": csp.w_selected.tolist(),
            "eigenvalues": csp.eigenvalues.tolist(),
        },
        "lda": {"weights": lda.weights.tolist(), "offset": lda.offset},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def load_models(path) -> tuple[CspModel, LdaModel]:
    with open(path) as fh:
        payload = json.load(fh)
    csp = CspModel(
        w_full=np.asarray(payload["csp"]["w_full"]),
        w_selected=np.asarray(payload["csp"]["w_selected"]),
        eigenvalues=np.asarray(payload["csp"]["eigenvalues"]),
    )
    lda = LdaModel(
        weights=np.asarray(payload["lda"]["weights"]), offset=float(payload["lda"]["offset"])
    )
    return csp, lda

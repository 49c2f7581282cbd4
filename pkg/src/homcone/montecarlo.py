"""Exact sampling of Wishart laws on Q_V with shape ``(k/2) n`` and moment checks.

A draw is ``pi(sum_{j<=k} z_j z_j^T)`` with ``z_j ~ N(0, theta^{-1}/2)`` in R^N.
Its Laplace transform at ``theta'`` is ``det(theta)^{k/2} det(theta+theta')^{-k/2}``,
which is the Wishart law on Q_V with parameter theta and shape ``(k/2) n``.

Draws are generated in fixed-size chunks, each with its own RNG stream spawned
from the seed, so a batch is bit-identical whatever the number of worker
threads.
"""
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConeError
from .power import log_leading_minors
from .structure import BlockStructure
from .wishart import laplace_Q, mean_Q, variance_Q

CHUNK = 50_000
MAGIC = "# homcone-sample"


def point_digest(x):
    """Short hash of a matrix, written with 17 significant digits."""
    text = " ".join("%.17g" % v for v in np.asarray(x, dtype=float).ravel())
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SampleBatch:
    """Draws from the Wishart law on Q_V, stored as z_basis coordinates (M x d)."""

    structure: BlockStructure
    theta: np.ndarray
    k: int
    seed: int
    coords: np.ndarray

    @property
    def M(self):
        return self.coords.shape[0]

    @property
    def shape(self):
        return 0.5 * self.k * self.structure.n_vector

    def sample(self, i):
        return self.structure.from_coords(self.coords[i])

    def samples(self):
        """All draws as an (M, N, N) array."""
        return np.tensordot(self.coords, self.structure.z_basis, axes=1)


def _check_theta(structure, theta):
    theta = structure.require_z(theta, "theta")
    log_leading_minors(structure, theta)  # raises NotInCone
    return theta


def _chunk(structure, L, k, m, seed_seq):
    rng = np.random.default_rng(seed_seq)
    Z = rng.standard_normal((m, k, structure.N)) @ L.T
    return kernels.wishart_coords(Z, structure.z_basis)


def sample(structure, theta, k, M, seed, workers=1):
    """Draw M samples of degree k at parameter theta.

    Raises
    ------
    NotInCone
        If theta is not in P_V.
    ValueError
        If k < 1 or M < 1.
    """
    k, M, seed = int(k), int(M), int(seed)
    if k < 1 or M < 1:
        raise ValueError("k and M must be positive")
    theta = _check_theta(structure, theta)
    L = np.linalg.cholesky(0.5 * np.linalg.inv(theta))
    sizes = [CHUNK] * (M // CHUNK) + ([M % CHUNK] if M % CHUNK else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, streams))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _chunk(structure, L, k, *job), jobs))
    else:
        parts = [_chunk(structure, L, k, *job) for job in jobs]
    return SampleBatch(structure, theta, k, seed, np.concatenate(parts, axis=0))


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean and covariance operator with standard errors (coordinates)."""

    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    cov_se: np.ndarray
    M: int


def empirical_moments(batch):
    """Sample mean, covariance in z_basis coordinates and their standard errors.

    The covariance standard error of entry (a, b) is ``sqrt(Var(y_a y_b) / M)``
    with ``y`` the centered coordinates.
    """
    M = batch.M
    if M < 2:
        raise ValueError("at least two samples are needed for a covariance")
    C = batch.coords
    mean = C.mean(axis=0)
    mean_se = C.std(axis=0, ddof=1) / np.sqrt(M)
    S2, S4 = kernels.centered_moments(C, mean)
    cov = S2 / (M - 1)
    var_prod = np.maximum(S4 / M - (S2 / M) ** 2, 0.0)
    return MomentEstimate(mean, mean_se, cov, np.sqrt(var_prod / M), M)


@dataclass(frozen=True)
class MomentReport:
    """Largest standardized deviations of the empirical moments from the closed forms."""

    mean_z: float
    cov_z: float
    mean_limit: float
    cov_limit: float
    n_mean: int
    n_cov: int

    @property
    def passed(self):
        return self.mean_z <= self.mean_limit and self.cov_z <= self.cov_limit

    def __str__(self):
        lines = [
            f"mean: max |z| = {self.mean_z:.3f} over {self.n_mean} coordinates "
            f"(limit {self.mean_limit:g}) {'ok' if self.mean_z <= self.mean_limit else 'FAIL'}",
            f"cov:  max |z| = {self.cov_z:.3f} over {self.n_cov} entries "
            f"(limit {self.cov_limit:g}) {'ok' if self.cov_z <= self.cov_limit else 'FAIL'}",
            "note: limits are per entry without Bonferroni correction; "
            f"a 5-sigma family-wise bound would be about {_bonferroni(self.n_mean + self.n_cov):.2f}",
        ]
        return "\n".join(lines)


def _bonferroni(n, alpha=5.7e-7):
    from scipy.stats import norm
    return float(norm.isf(alpha / (2 * n)))


def compare_moments(batch, mean_limit=4.0, cov_limit=5.0):
    """Compare a batch with ``mean_Q`` and ``variance_Q`` at shape ``(k/2) n``."""
    V = batch.structure
    est = empirical_moments(batch)
    s = batch.shape
    m = mean_Q(V, s, batch.theta)
    mean_exact = V.coords(m)
    cov_exact = variance_Q(V, s, m).matrix
    iu = np.triu_indices(V.dim_z)
    with np.errstate(divide="ignore", invalid="ignore"):
        zm = np.abs(est.mean - mean_exact) / est.mean_se
        zc = (np.abs(est.cov - cov_exact) / est.cov_se)[iu]
    # entries that vanish identically have zero spread and zero error
    zm = np.where(np.isnan(zm), 0.0, zm)
    zc = np.where(np.isnan(zc), 0.0, zc)
    return MomentReport(float(np.max(zm)), float(np.max(zc)), mean_limit, cov_limit,
                        len(zm), len(zc))


def empirical_laplace(batch, theta_prime):
    """Estimate of ``E exp(-<theta', W>)`` with its standard error and the exact value."""
    V = batch.structure
    tp = V.require_z(theta_prime, "theta'")
    vals = np.exp(-(batch.coords @ V.coords(tp)))
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(batch.M))
    s = batch.shape
    exact = laplace_Q(V, s, batch.theta + tp) / laplace_Q(V, s, batch.theta)
    return est, se, exact


def write_batch(path, batch):
    """Text export: hash header, structure and theta lines, then one sample per line."""
    V = batch.structure
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{MAGIC} structure={V.digest()} theta={point_digest(batch.theta)} "
                 f"k={batch.k} M={batch.M} seed={batch.seed} d={V.dim_z}\n")
        fh.write("# structure " + V.to_json(sort_keys=True) + "\n")
        fh.write("# theta " + json.dumps(np.asarray(batch.theta).tolist()) + "\n")
        for row in batch.coords:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")


def read_batch(path, structure=None, theta=None):
    """Read a batch written by :func:`write_batch`.

    ``structure`` and ``theta`` override the embedded copies; both are checked
    against the header hashes.

    Raises
    ------
    ConeError
        On a malformed file or a hash mismatch.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(MAGIC):
        raise ConeError("not a homcone sample file")
    try:
        meta = dict(item.split("=", 1) for item in lines[0][len(MAGIC):].split())
        k, M, seed, d = (int(meta[key]) for key in ("k", "M", "seed", "d"))
        body = [ln for ln in lines[1:] if ln.strip() and not ln.startswith("#")]
        extra = {ln.split(" ", 2)[1]: ln.split(" ", 2)[2] for ln in lines[1:] if ln.startswith("# ")}
        if structure is None:
            structure = BlockStructure.from_json(extra["structure"])
        if theta is None:
            theta = np.array(json.loads(extra["theta"]), dtype=float)
        coords = np.array([[float(v) for v in ln.split()] for ln in body], dtype=float)
    except (KeyError, ValueError, IndexError) as exc:
        raise ConeError(f"malformed sample file: {exc}") from exc
    if structure.digest() != meta["structure"]:
        raise ConeError("structure does not match the sample-file header")
    if point_digest(theta) != meta["theta"]:
        raise ConeError("theta does not match the sample-file header")
    if coords.shape != (M, d):
        raise ConeError(f"expected {M} samples of dimension {d}, found {coords.shape}")
    return SampleBatch(structure, np.asarray(theta, dtype=float), k, seed, coords.reshape(M, d))


__all__ = ["SampleBatch", "sample", "empirical_moments", "compare_moments", "empirical_laplace",
           "write_batch", "read_batch", "MomentEstimate", "MomentReport"]

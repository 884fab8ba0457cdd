# =============================================================================
# cavity/fockspace.py
# =============================================================================
# Purpose:
# Photon-number distributions of the cavity field: building the initial
# field, moments, index shifts and (de)serialisation.
#
# Distributions are dense arrays over n = 0..nmax. Operations that filter or
# shift return unnormalized results where that is documented; everything else
# returns a distribution summing to one.
# =============================================================================

import json
import logging
import math
from typing import Iterable, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.stats import poisson

from models.distribution import FieldKind, InitialFieldSpec, PhotonDistribution
from models.errors import InvalidSpecError, NormalizationError, TruncationError

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# Construction
# -----------------------------------------------------------------------------

def make_distribution(spec: InitialFieldSpec, nmax: int | None = None) -> PhotonDistribution:
    """
    Build the initial photon distribution described by `spec`.

    Args:
        spec: vacuum, fock(n) or coherent(nbar) plus the allowed tail mass
        nmax: truncation bound; defaults to spec.default_nmax()

    Returns:
        PhotonDistribution over 0..nmax, normalized

    Raises:
        InvalidSpecError: fock photon number above nmax, or nmax < 0
        TruncationError: coherent tail mass beyond nmax is >= tail_epsilon
    """
    if nmax is None:
        nmax = spec.default_nmax()
    if nmax < 0:
        raise InvalidSpecError(f"nmax must be >= 0, got {nmax}", nmax=nmax)

    probs = np.zeros(nmax + 1)

    if spec.kind is FieldKind.VACUUM or (spec.kind is FieldKind.COHERENT and spec.nbar == 0):
        probs[0] = 1.0
    elif spec.kind is FieldKind.FOCK:
        if spec.n > nmax:
            raise InvalidSpecError(
                f"Fock state |{spec.n}> does not fit below nmax={nmax}", n=spec.n, nmax=nmax
            )
        probs[spec.n] = 1.0
    else:
        tail = float(poisson.sf(nmax, spec.nbar))
        if tail >= spec.tail_epsilon:
            required = _required_poisson_cutoff(spec.nbar, spec.tail_epsilon, start=nmax)
            raise TruncationError(
                f"coherent state with nbar={spec.nbar} leaves tail mass {tail:.3e} above "
                f"nmax={nmax}; need nmax >= {required}",
                nmax=nmax,
                tail_mass=tail,
                required_nmax=required,
            )
        probs[:] = poisson.pmf(np.arange(nmax + 1), spec.nbar)
        probs /= math.fsum(probs)

    logger.debug(f"make_distribution: {spec.kind.value} field on 0..{nmax}")
    return PhotonDistribution(probs=probs)


def _required_poisson_cutoff(nbar: float, tail_epsilon: float, start: int) -> int:
    cutoff = max(start, int(poisson.isf(tail_epsilon, nbar)))
    while poisson.sf(cutoff, nbar) >= tail_epsilon:
        cutoff += 1
    return cutoff


def from_probabilities(probs: Sequence[float], normalize_result: bool = False) -> PhotonDistribution:
    """Wrap a raw probability list, optionally renormalizing it."""
    try:
        d = PhotonDistribution(probs=probs)
    except ValidationError as e:
        raise InvalidSpecError(f"invalid photon distribution: {e.errors()[0]['msg']}") from e
    return normalize(d) if normalize_result else d


def normalize(d: PhotonDistribution) -> PhotonDistribution:
    mass = d.mass
    if mass <= 0.0:
        raise NormalizationError("cannot normalize a distribution with zero mass")
    return PhotonDistribution(probs=d.probs / mass)


def pad(d: PhotonDistribution, nmax: int) -> PhotonDistribution:
    """Grow the truncation bound to `nmax` with zeros (never shrinks)."""
    if nmax <= d.nmax:
        return d
    probs = np.zeros(nmax + 1)
    probs[: d.nmax + 1] = d.probs
    return PhotonDistribution(probs=probs)


# -----------------------------------------------------------------------------
# Moments
# -----------------------------------------------------------------------------

def mean_photon(d: PhotonDistribution) -> float:
    n = np.arange(d.nmax + 1)
    return math.fsum(n * d.probs)


def variance(d: PhotonDistribution) -> float:
    n = np.arange(d.nmax + 1)
    mean = mean_photon(d)
    # central form; clamps the last bits of rounding below zero
    return max(0.0, math.fsum((n - mean) ** 2 * d.probs))


def moments_of_mixture(branches: Iterable[tuple[float, PhotonDistribution]]) -> tuple[float, float]:
    """
    Mean and variance of a weighted mixture of normalized distributions,
    assembled from per-branch moments: mean = avg <n>, var = avg <n^2> - mean^2.
    """
    weights, first, second = [], [], []
    for weight, d in branches:
        m = mean_photon(d)
        weights.append(weight)
        first.append(weight * m)
        second.append(weight * (variance(d) + m * m))
    total = math.fsum(weights)
    if total <= 0.0:
        raise NormalizationError("mixture has zero total weight")
    mean = math.fsum(first) / total
    return mean, max(0.0, math.fsum(second) / total - mean * mean)


# -----------------------------------------------------------------------------
# Index arithmetic
# -----------------------------------------------------------------------------

def shift(d: PhotonDistribution, nu: int) -> PhotonDistribution:
    """
    result[n] = d[n + nu], reading out-of-range indices as zero.

    The length is kept, so mass shifted past either end is lost. The result
    is NOT renormalized; callers detect boundary loss through its mass.
    """
    size = d.nmax + 1
    probs = np.zeros(size)
    if nu >= 0:
        if nu < size:
            probs[: size - nu] = d.probs[nu:]
    elif -nu < size:
        probs[-nu:] = d.probs[: size + nu]
    return PhotonDistribution(probs=probs)


# -----------------------------------------------------------------------------
# Serialisation
# -----------------------------------------------------------------------------

def to_json(d: PhotonDistribution) -> str:
    return json.dumps(d.probs.tolist())


def from_json(text: str) -> PhotonDistribution:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidSpecError(f"distribution JSON does not parse: {e}") from e
    if not isinstance(data, list):
        raise InvalidSpecError("distribution JSON must be an array of probabilities")
    return from_probabilities(data)


def csv_rows(d: PhotonDistribution) -> list[tuple[int, float]]:
    """Rows for the "n,probability" table."""
    return [(n, float(p)) for n, p in enumerate(d.probs)]

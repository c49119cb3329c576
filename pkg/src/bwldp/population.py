"""Finitely supported populations of covariance matrices."""

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidPopulation
from .spd import EPS_PD, SYM_RTOL

WEIGHT_TOL = 1e-12
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`. ``ok`` is true when ``failures`` is empty."""

    ok: bool
    failures: tuple
    n_atoms: int
    dim: int
    weight_sum: float
    min_eigenvalues: tuple
    # integrability exponent for which E exp(lambda * Pi^2(S, 0)) < inf
    exp_integrability: str = "inf (bounded support)"

    def to_dict(self):
        return {
            "ok": self.ok,
            "failures": list(self.failures),
            "n_atoms": self.n_atoms,
            "dim": self.dim,
            "weight_sum": self.weight_sum,
            "min_eigenvalues": list(self.min_eigenvalues),
            "exp_integrability": self.exp_integrability,
        }


@dataclass(frozen=True)
class DiscretePopulation:
    """Population ``sum_i w_i delta_{S_i}`` on strictly positive covariances.

    Parameters
    ----------
    atoms : array_like, shape (k, d, d)
    weights : array_like, shape (k,)

    The validation report is computed once on construction and stored in
    ``report``; use :meth:`require_valid` before relying on the invariants.
    """

    atoms: np.ndarray
    weights: np.ndarray
    report: ValidationReport = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        if atoms.ndim == 2:
            atoms = atoms[None]
        weights = np.array(self.weights, dtype=float).reshape(-1)
        atoms.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "report", _validate_arrays(atoms, weights))

    @classmethod
    def equal_weights(cls, atoms):
        atoms = np.asarray(atoms, dtype=float)
        return cls(atoms, np.full(len(atoms), 1.0 / len(atoms)))

    @property
    def k(self):
        return self.atoms.shape[0]

    @property
    def dim(self):
        return self.atoms.shape[-1]

    def require_valid(self):
        if not self.report.ok:
            raise InvalidPopulation("; ".join(self.report.failures))
        return self

    def reweighted(self, weights):
        """Same atoms with new weights (e.g. a tilt or an empirical measure)."""
        return DiscretePopulation(self.atoms, weights)

    def linear_mean(self):
        return np.einsum("i,ijk->jk", self.weights, self.atoms)

    def to_dict(self):
        return {
            "dim": int(self.dim),
            "atoms": [a.reshape(-1).tolist() for a in self.atoms],
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, spec):
        """Parse ``{"dim": d, "atoms": [[row-major d*d reals], ...], "weights": [...]}``."""
        try:
            d = int(spec["dim"])
            atoms = [np.asarray(a, dtype=float).reshape(d, d) for a in spec["atoms"]]
            weights = spec["weights"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidPopulation(f"malformed population spec: {exc}") from exc
        if len(atoms) == 0:
            raise InvalidPopulation("population has no atoms")
        return cls(np.stack(atoms), weights)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _validate_arrays(atoms, weights):
    failures = []
    k = atoms.shape[0] if atoms.ndim >= 1 else 0
    dim = atoms.shape[-1] if atoms.ndim == 3 else 0
    min_eigs = []
    if atoms.ndim != 3 or atoms.shape[1] != atoms.shape[2]:
        failures.append(f"atoms must have shape (k, d, d), got {atoms.shape}")
    elif k == 0:
        failures.append("population has no atoms")
    if weights.shape != (k,):
        failures.append(f"expected {k} weights, got {weights.shape[0]}")
    if not np.all(np.isfinite(weights)):
        failures.append("weights must be finite")
    elif np.any(weights < 0):
        failures.append("weights must be nonnegative")
    wsum = float(np.sum(weights)) if weights.size else 0.0
    if abs(wsum - 1.0) > WEIGHT_TOL:
        failures.append(f"weights sum to {wsum!r}, not 1")
    if atoms.ndim == 3 and atoms.shape[1] == atoms.shape[2]:
        for i, S in enumerate(atoms):
            if not np.all(np.isfinite(S)):
                failures.append(f"atom {i} has non-finite entries")
                min_eigs.append(float("nan"))
                continue
            scale = max(1.0, float(np.max(np.abs(S))))
            if np.max(np.abs(S - S.T)) > SYM_RTOL * scale:
                failures.append(f"atom {i} is not symmetric")
            lam = float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])
            min_eigs.append(lam)
            if lam <= EPS_PD:
                failures.append(f"atom {i} is not strictly positive (min eigenvalue {lam:.3e})")
    return ValidationReport(
        ok=not failures,
        failures=tuple(failures),
        n_atoms=int(k),
        dim=int(dim),
        weight_sum=wsum,
        min_eigenvalues=tuple(min_eigs),
    )


def validate(P):
    """Check weights, dimensions and strict positivity of every atom.

    Never raises; accepts either a :class:`DiscretePopulation` or an
    ``(atoms, weights)`` pair. Exponential integrability holds automatically for
    a finite support and is reported as such.
    """
    if isinstance(P, DiscretePopulation):
        return P.report
    atoms, weights = P
    try:
        atoms = np.array(atoms, dtype=float)
        weights = np.array(weights, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        return ValidationReport(False, (f"unparseable population: {exc}",), 0, 0, float("nan"), ())
    if atoms.ndim == 2:
        atoms = atoms[None]
    return _validate_arrays(atoms, weights)


def splitmix64(x):
    """SplitMix64 finalizer: a fixed 64-bit mixing function."""
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replicate_seed(seed, replicate):
    """Seed for replicate ``r``: ``seed XOR splitmix64(r)`` in 64-bit arithmetic."""
    return (int(seed) & _MASK64) ^ splitmix64(replicate)


def sample(P, n, seed):
    """Draw ``n`` IID atom indices from ``P`` with a PCG64 generator seeded by ``seed``."""
    P.require_valid()
    rng = np.random.default_rng(int(seed) & _MASK64)
    if P.k == 1:
        return np.zeros(n, dtype=np.int64)
    return rng.choice(P.k, size=n, p=P.weights)


def sample_replicate(P, n, seed, replicate):
    return sample(P, n, replicate_seed(seed, replicate))


@dataclass(frozen=True)
class PopulationStats:
    mu: float
    sigma_sq: float
    pi_min: float
    pi_max: float


def pi_norm_stats(P):
    """Mean and Hoeffding sub-Gaussian proxy of ``Pi(S, 0) = sqrt(tr S)`` under ``P``."""
    P.require_valid()
    pis = np.sqrt(np.trace(P.atoms, axis1=1, axis2=2))
    support = pis[P.weights > 0]
    lo, hi = float(support.min()), float(support.max())
    return PopulationStats(
        mu=float(np.dot(P.weights, pis)),
        sigma_sq=((hi - lo) / 2.0) ** 2,
        pi_min=lo,
        pi_max=hi,
    )

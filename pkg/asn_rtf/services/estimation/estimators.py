"""RTF vector estimators applied to the covariance matrices of one frequency bin.

All estimators return the estimate normalized to 1 at the global reference
microphone. `biased`, `cw`, `cw_d` and `cs` are principal-eigenvector methods;
`ods` fits a rank-1 matrix to the inter-node blocks of R_y only.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.optimize

from asn_rtf.exceptions import IdentifiabilityError, NormalizationError
from asn_rtf.models.config import OdsOptions
from asn_rtf.models.estimates import Method, RtfEstimate
from asn_rtf.models.layout import NodeLayout, block_spans, selection_mask
from asn_rtf.services.dsp import linalg
from asn_rtf.services.estimation.optimizer import minimize_lbfgs

logger = logging.getLogger(__name__)

DEFAULT_LOADING = 1e-8
REFERENCE_TOL = 1e-12


def normalize_to_reference(vector: np.ndarray, ref_index: int) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.complex128)
    if not np.all(np.isfinite(vector)):
        raise NormalizationError("estimate has non-finite entries")
    if np.abs(vector[ref_index]) < REFERENCE_TOL * np.linalg.norm(vector) or vector[ref_index] == 0:
        raise NormalizationError(f"reference entry {ref_index} is numerically zero")
    h = vector / vector[ref_index]
    h[ref_index] = 1.0 + 0.0j
    return h


def rtf_biased(ry: np.ndarray, layout: NodeLayout) -> RtfEstimate:
    pair = linalg.principal_eigenpair(ry)
    return RtfEstimate(normalize_to_reference(pair.vector, layout.ref_index), Method.BIASED, pair.value)


def rtf_subtraction(ry: np.ndarray, rv: np.ndarray, layout: NodeLayout) -> RtfEstimate:
    """Rank-1 approximation of the speech covariance estimate R_y - R_v."""
    pair = linalg.principal_eigenpair(linalg.as_hermitian(ry) - linalg.as_hermitian(rv))
    return RtfEstimate(normalize_to_reference(pair.vector, layout.ref_index), Method.CS, pair.value)


def _whitened_estimate(ry: np.ndarray, root: np.ndarray, inverse_root: np.ndarray,
                       layout: NodeLayout, method: Method) -> RtfEstimate:
    """Principal eigenvector of W R_y W^H, de-whitened with the forward root."""
    whitened = inverse_root @ linalg.as_hermitian(ry) @ inverse_root.conj().T
    pair = linalg.principal_eigenpair(0.5 * (whitened + whitened.conj().T))
    h = normalize_to_reference(root @ pair.vector, layout.ref_index)
    return RtfEstimate(h, method, pair.value)


def rtf_cw(ry: np.ndarray, rv: np.ndarray, layout: NodeLayout, loading: float = DEFAULT_LOADING,
           square_root: str = "cholesky") -> RtfEstimate:
    if square_root == "cholesky":
        root = linalg.cholesky_with_loading(rv, loading)
        inverse_root = linalg.lower_inverse(root)
    elif square_root == "hermitian":
        root = linalg.hermitian_sqrt(rv)
        inverse_root = np.linalg.inv(root)
    else:
        raise ValueError(f"unknown square root {square_root!r}")
    return _whitened_estimate(ry, root, inverse_root, layout, Method.CW)


def rtf_cw_d(ry: np.ndarray, rv: np.ndarray, layout: NodeLayout,
             loading: float = DEFAULT_LOADING) -> RtfEstimate:
    """CW whitened with the node-wise diagonal blocks of R_v only."""
    root, inverse_root = linalg.block_roots(rv, layout, loading)
    return _whitened_estimate(ry, root, inverse_root, layout, Method.CW_D)


def ods_residual(h_prime: np.ndarray, ry: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, ry - np.outer(h_prime, h_prime.conj()), 0)


def ods_cost(h_prime: np.ndarray, ry: np.ndarray, mask: np.ndarray) -> float:
    """||S ⊙ (R_y - h' h'^H)||_F^2."""
    residual = ods_residual(h_prime, ry, mask)
    return float(np.sum(residual.real ** 2 + residual.imag ** 2))


def ods_gradient(h_prime: np.ndarray, ry: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Wirtinger gradient ∂J/∂h̄' = -2 (S ⊙ (R_y - h' h'^H)) h'.

    The gradient over the stacked real coordinates [Re h', Im h'] is
    2 [Re g, Im g].
    """
    return -2.0 * ods_residual(h_prime, ry, mask) @ h_prime


def _to_real(z: np.ndarray) -> np.ndarray:
    return np.concatenate((z.real, z.imag))


def _to_complex(x: np.ndarray) -> np.ndarray:
    half = x.size // 2
    return x[:half] + 1j * x[half:]


@dataclass(frozen=True)
class OdsStart:
    h_prime: np.ndarray
    cost: float
    iterations: int
    converged: bool


class OdsSolver:
    """Multi-start minimization of the off-diagonal-selection cost for one bin."""

    def __init__(self, ry: np.ndarray, layout: NodeLayout, options: OdsOptions):
        self.ry = linalg.as_hermitian(ry)
        self.layout = layout
        self.options = options
        self.mask = selection_mask(layout)

    def objective(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        h = _to_complex(x)
        residual = ods_residual(h, self.ry, self.mask)
        cost = float(np.sum(residual.real ** 2 + residual.imag ** 2))
        return cost, 2.0 * _to_real(-2.0 * residual @ h)

    def tolerance(self, h: np.ndarray) -> float:
        return self.options.tol * (1.0 + np.linalg.norm(h) ** 3)

    def is_stationary(self, x: np.ndarray, real_gradient: np.ndarray) -> bool:
        # real gradient = 2 [Re g, Im g], so ||g|| = ||real gradient|| / 2
        return 0.5 * np.linalg.norm(real_gradient) <= self.tolerance(_to_complex(x))

    def initial_points(self, initial: Optional[np.ndarray] = None) -> List[np.ndarray]:
        rng = np.random.default_rng(self.options.seed)
        masked = np.abs(self.ry[self.mask])
        scale = np.sqrt(masked.mean()) if masked.size else 1.0
        dim = self.layout.total

        def random_start() -> np.ndarray:
            draw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            return scale * draw / np.sqrt(2.0)

        starts = []
        if initial is not None:
            starts.append(np.asarray(initial, dtype=np.complex128))
        elif self.options.init == "biased":
            pair = linalg.principal_eigenpair(self.ry)
            if pair.value > 0:
                starts.append(np.sqrt(pair.value) * pair.vector)
        while len(starts) < self.options.starts:
            starts.append(random_start())
        return starts

    def run_start(self, h0: np.ndarray) -> OdsStart:
        x0 = _to_real(h0)
        if self.options.backend == "scipy":
            result = scipy.optimize.minimize(
                self.objective, x0, jac=True, method="BFGS",
                options={"maxiter": self.options.max_iters, "gtol": self.options.tol},
            )
            value, gradient = self.objective(result.x)
            converged = self.is_stationary(result.x, gradient)
            return OdsStart(_to_complex(result.x), value, int(result.nit), converged)

        result = minimize_lbfgs(
            self.objective, x0, self.is_stationary,
            max_iters=self.options.max_iters, memory=self.options.memory,
        )
        return OdsStart(_to_complex(result.x), result.value, result.iterations, result.converged)

    def solve(self, initial: Optional[np.ndarray] = None) -> Tuple[OdsStart, List[OdsStart]]:
        runs = [self.run_start(h0) for h0 in self.initial_points(initial)]
        best = runs[0]
        for run in runs[1:]:
            # strict comparison keeps the lowest start index on ties
            if run.cost < best.cost:
                best = run
        return best, runs


def rtf_ods(ry: np.ndarray, layout: NodeLayout, options: Optional[OdsOptions] = None,
            initial: Optional[np.ndarray] = None) -> RtfEstimate:
    if layout.n_nodes < 3:
        raise IdentifiabilityError(
            f"ODS needs at least 3 nodes, got {layout.n_nodes}: with 2 nodes the "
            "RTF part outside the reference node is only known up to scale"
        )
    options = options or OdsOptions()
    best, _ = OdsSolver(ry, layout, options).solve(initial)
    if not best.converged:
        logger.warning(f"ODS stopped after {best.iterations} iterations without reaching tolerance "
                       f"(cost {best.cost:.3e})")
    h = normalize_to_reference(best.h_prime, layout.ref_index)
    return RtfEstimate(h, Method.ODS, best.cost, best.iterations, best.converged)


@dataclass(frozen=True)
class AmbiguityDemo:
    first: RtfEstimate
    second: RtfEstimate

    @property
    def cost_gap(self) -> float:
        return abs(self.first.value - self.second.value)


def ods_ambiguity_demo(ry: np.ndarray, layout: NodeLayout, options: Optional[OdsOptions] = None,
                       scale: complex = 2.0) -> AmbiguityDemo:
    """Exhibit the scaling ambiguity of a two-node layout.

    Any solution (h1, h2) can be replaced by (α h1, h2 / ᾱ) without changing the
    inter-node products, so both points have the same cost but different
    normalized estimates.
    """
    if layout.n_nodes != 2:
        raise IdentifiabilityError("the ambiguity demonstration needs exactly 2 nodes")
    options = options or OdsOptions()
    solver = OdsSolver(ry, layout, options)
    best, _ = solver.solve()

    (start, size), _ = block_spans(layout)
    moved = best.h_prime.copy()
    ref_block = slice(start, start + size)
    other = np.ones(layout.total, dtype=bool)
    other[ref_block] = False
    moved[ref_block] *= scale
    moved[other] /= np.conj(scale)
    second = solver.run_start(moved)

    def as_estimate(run: OdsStart) -> RtfEstimate:
        return RtfEstimate(normalize_to_reference(run.h_prime, layout.ref_index), Method.ODS,
                           run.cost, run.iterations, run.converged)

    return AmbiguityDemo(as_estimate(best), as_estimate(second))


def estimate_rtf(method: Method, ry: np.ndarray, rv: Optional[np.ndarray], layout: NodeLayout,
                 ods_options: Optional[OdsOptions] = None, loading: float = DEFAULT_LOADING) -> RtfEstimate:
    """Dispatch one bin to the estimator named by `method`."""
    method = Method(method)
    if method == Method.BIASED:
        return rtf_biased(ry, layout)
    if method == Method.ODS:
        return rtf_ods(ry, layout, ods_options)
    if rv is None:
        raise ValueError(f"method {method.value} needs a noise covariance")
    if method == Method.CW:
        return rtf_cw(ry, rv, layout, loading)
    if method == Method.CW_D:
        return rtf_cw_d(ry, rv, layout, loading)
    return rtf_subtraction(ry, rv, layout)

"""Gate application: the planned kernel and the dense reference oracle."""

import numpy as np

from src.core.errors import KernelError, KernelPatternError, KernelRangeError
from src.gates.core import Gate, classify_array
from src.kernel.plan import KernelPlan, TermTable, build_terms, snap_values, target_offsets_for
from src.sim.statevector import Statevector

# temporaries per chunk stay around this many elements
CHUNK_ELEMENTS = 1 << 20


def _override_values(plan: KernelPlan, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != plan.gate.matrix.shape:
        raise KernelPatternError(f"override matrix shape {m.shape} does not match planned {plan.gate.matrix.shape}")
    if plan.force_dense:
        return m.real.copy(), m.imag.copy()
    re_kinds = classify_array(m.real, plan.zero_tol, plan.one_tol)
    im_kinds = classify_array(m.imag, plan.zero_tol, plan.one_tol)
    bad = (re_kinds != plan.profile.re_kinds) | (im_kinds != plan.profile.im_kinds)
    if bad.any():
        r, c = (int(x) for x in np.argwhere(bad)[0])
        raise KernelPatternError(
            f"override entry ({r},{c}) classifies as {int(re_kinds[r, c])}/{int(im_kinds[r, c])}, "
            f"planned {int(plan.profile.re_kinds[r, c])}/{int(plan.profile.im_kinds[r, c])}"
        )
    return snap_values(m.real, re_kinds), snap_values(m.imag, im_kinds)


def _apply_terms(terms: TermTable, vec: np.ndarray, dim: int) -> np.ndarray:
    contrib = vec[:, terms.src]
    gen = terms.general
    if gen.any():
        contrib[:, gen] *= terms.coef[gen].astype(vec.dtype)
    neg = terms.negate
    if neg.any():
        contrib[:, neg] = -contrib[:, neg]
    out = np.zeros((vec.shape[0], 2 * dim), dtype=vec.dtype)
    out[:, terms.dest_ids] = np.add.reduceat(contrib, terms.starts, axis=1)
    return out


def apply_kernel(plan: KernelPlan, state: Statevector, matrix_override: np.ndarray | None = None,
                 t_begin: int = 0, t_end: int | None = None) -> None:
    if state.n != plan.n:
        raise KernelError(f"plan built for {plan.n} qubits applied to a {state.n}-qubit state")
    if t_end is None:
        t_end = plan.domain
    if not 0 <= t_begin <= t_end <= plan.domain:
        raise KernelRangeError(f"loop range [{t_begin}, {t_end}) outside [0, {plan.domain})")
    if plan.runtime_matrix != (matrix_override is not None):
        raise KernelPatternError(
            "runtime-matrix plans need an override matrix" if plan.runtime_matrix
            else "override matrix given to a plan with baked values"
        )
    if t_begin == t_end:
        return

    dtype = state.re.dtype
    dim = 1 << plan.k
    terms = plan.terms
    dense_re, dense_im = plan.dense_re, plan.dense_im
    if matrix_override is not None:
        re_vals, im_vals = _override_values(plan, matrix_override)
        if plan.strategy == "dense":
            dense_re, dense_im = re_vals, im_vals
        else:
            terms = build_terms(plan.profile.re_kinds, plan.profile.im_kinds, re_vals, im_vals)
    if plan.strategy == "dense":
        # [out_re | out_im] = [in_re | in_im] @ [[Re, Im], [-Im, Re]]^T laid out blockwise
        block = np.block([[dense_re.T, dense_im.T], [-dense_im.T, dense_re.T]]).astype(dtype)

    lanes = 1 << plan.s
    width = max(dim * lanes * 2, len(terms.src) * lanes if terms is not None else 0)
    step = max(1, CHUNK_ELEMENTS // width)
    re, im = state.re, state.im
    for lo in range(t_begin, t_end, step):
        t = np.arange(lo, min(lo + step, t_end), dtype=np.int64)
        idx = plan.amplitude_indices(t).reshape(-1, dim)
        vec = np.concatenate([re[idx], im[idx]], axis=1)
        if plan.strategy == "dense":
            out = vec @ block
        else:
            out = _apply_terms(terms, vec, dim)
        re[idx] = out[:, :dim]
        im[idx] = out[:, dim:]


def group_bases(n: int, targets: tuple[int, ...]) -> np.ndarray:
    """Indices with every target bit cleared, by inserting a zero bit per target."""
    bases = np.arange(1 << (n - len(targets)), dtype=np.int64)
    for q in sorted(targets):
        bases = ((bases >> q) << (q + 1)) | (bases & ((1 << q) - 1))
    return bases


def reference_apply(g: Gate, state: Statevector) -> None:
    """Unspecialised per-group dense matrix-vector product."""
    if g.targets[-1] >= state.n:
        raise KernelError(f"gate {g.describe()} does not fit a {state.n}-qubit state")
    idx = group_bases(state.n, g.targets)[:, None] + target_offsets_for(g.targets)[None, :]
    psi = state.re[idx].astype(np.float64) + 1j * state.im[idx].astype(np.float64)
    psi = psi @ g.matrix.T
    state.re[idx] = psi.real
    state.im[idx] = psi.imag

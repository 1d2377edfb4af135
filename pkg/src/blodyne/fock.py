"""Brute-force verification in a truncated multi-mode number basis.

This module rebuilds the detection problem from scratch: the two-mode
squeezed signal and the coherent local-oscillator tones are constructed as
explicit state vectors, the balanced mixing is applied, and the variance of
the difference photon-number observable is evaluated exactly on the
truncated space. Nothing here shares code with the closed-form expressions
in :mod:`blodyne.detection`; agreement between the two routes is the
strongest check the package offers.

Two evaluation routes exist:

* :func:`oracle_difference_variance` works in the input picture. For a
  balanced splitter the difference signal reduces operator-identically to
  the interference form i (a_k^dag b_j - b_j^dag a_k) summed over mode
  pairs, each oscillating at its beat frequency. The measured (stationary)
  variance is obtained exactly by grouping terms of equal beat frequency
  and summing the folded power of every group; cross terms between groups
  time-average to zero. This is the route that scales to strong tones.

* :func:`oracle_difference_variance_unitary` applies the splitter as an
  explicit matrix exponential per frequency and evaluates the same grouped
  observable on the output state. It exists as an independent self-check of
  the reduction above (plus unitarity and photon conservation) and is only
  meant for small truncations.

States are dense complex tensors; norm deficits from truncation are
reported as leakage and never silently renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.sparse import diags, kron
from scipy.sparse.linalg import expm_multiply
from scipy.stats import poisson

from . import _kernels
from .detection import FrequencyPlan, ImageBandCase, classify_image_band_case
from .gaussian import SqueezeParams

_INPUT_LEAKAGE_LIMIT = 1e-6


@dataclass(frozen=True)
class FockStateVector:
    """Dense complex amplitudes over a truncated multi-mode number basis.

    The array shape is (N_0 + 1, ..., N_{K-1} + 1) for per-mode cutoffs N_k.
    The squared norm may fall short of one; the deficit is the truncation
    leakage and is exposed, not hidden.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        nsq = _kernels.norm_sq(amp)
        if nsq > 1.0 + 1e-9:
            raise ValueError(f"state norm^2 = {nsq!r} exceeds 1; amplitudes are not physical")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.amplitudes.shape

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(d - 1 for d in self.amplitudes.shape)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def norm_sq(self) -> float:
        return _kernels.norm_sq(self.amplitudes)

    @property
    def leakage(self) -> float:
        return 1.0 - self.norm_sq


@dataclass(frozen=True)
class TruncationPolicy:
    """How to pick cutoffs: an explicit N, or a target truncation leakage.

    ``max_dimension`` caps the total amplitude count of any joint state the
    oracle is asked to build.
    """

    cutoff: int | None = None
    target_leakage: float = 1e-8
    max_dimension: int = 100_000_000

    def tmss_cutoff(self, s: float) -> int:
        required = tmss_cutoff_for_leakage(s, self.target_leakage)
        if self.cutoff is not None:
            if self.cutoff < required:
                raise ValueError(
                    f"cutoff {self.cutoff} cannot reach leakage {self.target_leakage:g} "
                    f"at s = {s:g}; need at least {required}"
                )
            return self.cutoff
        return required

    def coherent_cutoff(self, amplitude: float) -> int:
        required = coherent_cutoff(amplitude)
        if self.cutoff is not None:
            if self.cutoff < required:
                raise ValueError(
                    f"cutoff {self.cutoff} is below the coherent-state rule {required} "
                    f"for |beta| = {amplitude:g}"
                )
            return self.cutoff
        return required

    def check_dimension(self, dims) -> None:
        total = math.prod(int(d) for d in dims)
        if total > self.max_dimension:
            raise ValueError(
                f"joint dimension {total} exceeds the guard {self.max_dimension}; "
                "reduce the tone amplitude or raise max_dimension"
            )


def tmss_cutoff_for_leakage(s: float, eps: float) -> int:
    """Smallest cutoff N with tanh^(2(N+1))(s) <= eps (geometric tail)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("target leakage must lie in (0, 1)")
    if s <= 0.0:
        return 1
    t2 = math.tanh(s) ** 2
    n = math.ceil(math.log(eps) / math.log(t2)) - 1
    return max(1, n)


def coherent_cutoff(amplitude: float) -> int:
    """Cutoff rule N = ceil(|beta|^2 + 8 |beta| + 10), leakage well below 1e-8."""
    b = abs(amplitude)
    return int(math.ceil(b * b + 8.0 * b + 10.0))


def coherent_leakage(amplitude: float, cutoff: int) -> float:
    """Exact Poissonian tail mass above the cutoff."""
    return float(poisson.sf(cutoff, abs(amplitude) ** 2))


# ---------------------------------------------------------------------------
# state builders
# ---------------------------------------------------------------------------


def build_tmss(p: SqueezeParams, cutoff: int) -> FockStateVector:
    """Two-mode squeezed vacuum on the diagonal |n, n> basis.

    Amplitudes are sech(s) (-e^{i theta} tanh s)^n for n <= cutoff. The same
    state is reachable through the squeeze-generator matrix exponential; see
    :func:`build_tmss_via_expm`, which the tests hold to 1e-10 agreement.
    """
    if cutoff < 1:
        raise ValueError("build_tmss needs cutoff >= 1")
    n = np.arange(cutoff + 1)
    if p.s == 0.0:
        diag = np.zeros(cutoff + 1, dtype=np.complex128)
        diag[0] = 1.0
    else:
        th = math.tanh(p.s)
        diag = (1.0 / math.cosh(p.s)) * np.exp(
            n * math.log(th) + 1j * n * (p.theta + math.pi)
        )
    amp = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
    amp[n, n] = diag
    return FockStateVector(amp)


def build_tmss_via_expm(p: SqueezeParams, cutoff: int) -> FockStateVector:
    """Two-mode squeezed vacuum via the squeeze-generator matrix exponential.

    Applies exp(xi a1^dag a2^dag - conj(xi) a1 a2) with xi = -s e^{i theta}
    to |0, 0> on the truncated two-mode space. Independent of the closed-form
    amplitude route, hence useful as a self-check.
    """
    if cutoff < 1:
        raise ValueError("build_tmss_via_expm needs cutoff >= 1")
    d = cutoff + 1
    ladder = np.sqrt(np.arange(1, d))
    ad = diags(ladder, -1)
    a = diags(ladder, 1)
    xi = -p.s * complex(math.cos(p.theta), math.sin(p.theta))
    gen = xi * kron(ad, ad) - np.conj(xi) * kron(a, a)
    v0 = np.zeros(d * d, dtype=np.complex128)
    v0[0] = 1.0
    out = expm_multiply(gen.tocsc(), v0)
    return FockStateVector(out.reshape(d, d))


def build_coherent_product(tones, cutoff) -> FockStateVector:
    """Product of truncated coherent states, one mode per (amplitude, phase).

    ``cutoff`` is a single shared cutoff or a per-tone sequence. Amplitudes
    follow the Poissonian e^{-|b|^2/2} b^n / sqrt(n!) with b = |b| e^{i chi}.
    """
    tones = list(tones)
    if not tones:
        raise ValueError("build_coherent_product needs at least one tone")
    if isinstance(cutoff, (int, np.integer)):
        cutoffs = [int(cutoff)] * len(tones)
    else:
        cutoffs = [int(c) for c in cutoff]
        if len(cutoffs) != len(tones):
            raise ValueError("one cutoff per tone is required")
    vecs = []
    for (amplitude, phase), n_max in zip(tones, cutoffs):
        if amplitude < 0.0:
            raise ValueError("tone amplitudes must be >= 0")
        if n_max < 0:
            raise ValueError("cutoffs must be >= 0")
        n = np.arange(n_max + 1)
        if amplitude == 0.0:
            vec = np.zeros(n_max + 1, dtype=np.complex128)
            vec[0] = 1.0
        else:
            log_mag = -0.5 * amplitude**2 + n * math.log(amplitude)
            log_mag -= 0.5 * np.array([math.lgamma(k + 1.0) for k in n])
            vec = np.exp(log_mag + 1j * n * phase)
        vecs.append(vec)
    amp = vecs[0]
    for vec in vecs[1:]:
        amp = np.multiply.outer(amp, vec)
    return FockStateVector(amp)


def vacuum_fock(n_modes: int) -> FockStateVector:
    """n_modes-fold vacuum at cutoff 0 (a single retained level per mode)."""
    amp = np.zeros((1,) * n_modes, dtype=np.complex128)
    amp[(0,) * n_modes] = 1.0
    return FockStateVector(amp)


def tensor(a: FockStateVector, b: FockStateVector) -> FockStateVector:
    return FockStateVector(np.multiply.outer(a.amplitudes, b.amplitudes))


def build_blo_signal_state(p: SqueezeParams, case: ImageBandCase,
                           cutoff: int) -> FockStateVector:
    """Signal-side state for the two-tone scheme: squeezed pair plus the
    explicit image-band vacua the configuration calls for.

    Mode order matches :meth:`BeatPairing.for_blo`: (lower squeezed mode,
    upper squeezed mode, then image modes).
    """
    state = build_tmss(p, cutoff)
    n_images = {ImageBandCase.NO_IMAGE_BANDS: 0,
                ImageBandCase.SHARED_IMAGE_BAND: 1,
                ImageBandCase.TWO_IMAGE_BANDS: 2}[case]
    if n_images:
        state = tensor(state, vacuum_fock(n_images))
    return state


# ---------------------------------------------------------------------------
# low-level mode operators (test-scale helpers; dense numpy throughout)
# ---------------------------------------------------------------------------


def _axis_coeff(values: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = values.size
    return values.reshape(shape)


def lowered(amp: np.ndarray, axis: int) -> np.ndarray:
    """Apply the annihilation operator along one axis (shape preserved)."""
    d = amp.shape[axis]
    out = np.zeros_like(amp)
    src = [slice(None)] * amp.ndim
    dst = [slice(None)] * amp.ndim
    src[axis] = slice(1, d)
    dst[axis] = slice(0, d - 1)
    out[tuple(dst)] = amp[tuple(src)] * _axis_coeff(np.sqrt(np.arange(1.0, d)), axis, amp.ndim)
    return out


def raised(amp: np.ndarray, axis: int) -> np.ndarray:
    """Apply the creation operator along one axis.

    The top level is dropped, so callers must pad the axis with an unused
    zero level first for the result to be exact.
    """
    d = amp.shape[axis]
    out = np.zeros_like(amp)
    src = [slice(None)] * amp.ndim
    dst = [slice(None)] * amp.ndim
    src[axis] = slice(0, d - 1)
    dst[axis] = slice(1, d)
    out[tuple(dst)] = amp[tuple(src)] * _axis_coeff(np.sqrt(np.arange(1.0, d)), axis, amp.ndim)
    return out


def _number_acc(out: np.ndarray, amp: np.ndarray, axis: int, coeff: complex) -> None:
    out += coeff * amp * _axis_coeff(np.arange(amp.shape[axis], dtype=float), axis, amp.ndim)


def pad_amplitudes(amp: np.ndarray, extra: int = 1) -> np.ndarray:
    """Copy with ``extra`` unused zero levels appended to every mode."""
    padded = np.zeros(tuple(d + extra for d in amp.shape), dtype=np.complex128)
    padded[tuple(slice(0, d) for d in amp.shape)] = amp
    return padded


def mean_photon(state: FockStateVector, mode: int) -> float:
    """Occupation expectation of one mode (unnormalized state as is)."""
    prob = np.abs(state.amplitudes) ** 2
    axes = tuple(k for k in range(state.n_modes) if k != mode)
    dist = prob.sum(axis=axes) if axes else prob
    return float(np.dot(np.arange(dist.size), dist))


def pair_annihilation_moment(state: FockStateVector, mode_a: int, mode_b: int) -> complex:
    """<a_{mode_a} a_{mode_b}> on the (unnormalized) state."""
    amp = state.amplitudes
    low = lowered(lowered(amp, mode_a), mode_b)
    return _kernels.vdot(amp, low)


def covariance_matrix(state: FockStateVector):
    """Quadrature mean and covariance in the (x1, p1, x2, p2, ...) convention.

    Normalizes by the state's squared norm, so small truncation leakage
    enters only at second order. Intended for test-scale states.
    """
    padded = pad_amplitudes(state.amplitudes)
    nrm = _kernels.norm_sq(padded)
    vectors = []
    for mode in range(state.n_modes):
        low = lowered(padded, mode)
        rai = raised(padded, mode)
        vectors.append(0.5 * (low + rai))            # x
        vectors.append(-0.5j * (low - rai))          # p
    n2 = len(vectors)
    mean = np.array([(_kernels.vdot(padded, v) / nrm).real for v in vectors])
    cov = np.zeros((n2, n2))
    for i in range(n2):
        for j in range(i, n2):
            sym = (_kernels.vdot(vectors[i], vectors[j]) / nrm).real
            cov[i, j] = cov[j, i] = sym - mean[i] * mean[j]
    return mean, cov


# ---------------------------------------------------------------------------
# beat-frequency pairing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BeatPairing:
    """Frequency assignment of every signal mode and every LO mode (rad/s).

    The order of ``signal_freqs`` must match the mode order of the signal
    state handed to the oracle, and likewise for the LO product state. Every
    (signal mode, LO tone) combination beats at the difference of its
    frequencies; the oracle groups equal beats exactly.
    """

    signal_freqs: tuple[float, ...]
    lo_freqs: tuple[float, ...]

    @classmethod
    def for_standard(cls, fp: FrequencyPlan) -> "BeatPairing":
        """Single-tone scheme: signal modes (minus, plus) against one tone.

        Frequencies are stored relative to the lower signal mode: only
        differences enter the oracle, and optical-carrier magnitudes would
        otherwise cost more rounding than the beat-grouping tolerance.
        """
        if len(fp.lo_frequencies) != 1:
            raise ValueError("for_standard needs a single-tone frequency plan")
        return cls(signal_freqs=(0.0, fp.delta),
                   lo_freqs=(fp.lo_frequencies[0] - fp.omega_minus,))

    @classmethod
    def for_blo(cls, fp: FrequencyPlan, case: ImageBandCase,
                tol: float | None = None) -> "BeatPairing":
        """Two-tone scheme with the image modes the configuration requires.

        Signal mode order is (minus, plus, images...). Frequencies are
        anchored to the lower signal mode, and sub-tolerance detunings of
        the degenerate configurations are absorbed into exact values so that
        coincident beats group exactly.
        """
        found = classify_image_band_case(fp, tol)
        if found is not case:
            raise ValueError(
                f"frequency plan classifies as {found.value}, not {case.value}"
            )
        delta = fp.delta
        if case is ImageBandCase.NO_IMAGE_BANDS:
            return cls(signal_freqs=(0.0, delta), lo_freqs=(0.0, delta))
        if case is ImageBandCase.SHARED_IMAGE_BAND:
            quarter = 0.25 * delta
            return cls(
                signal_freqs=(0.0, delta, 2.0 * quarter),
                lo_freqs=(quarter, delta - quarter),
            )
        d1, d2 = fp.delta1, fp.delta2
        return cls(
            signal_freqs=(0.0, delta, 2.0 * d1, delta + 2.0 * d2),
            lo_freqs=(d1, delta + d2),
        )


def _cluster(values, tol: float):
    """Group scalar values within tol; returns (representatives, member ids)."""
    order = sorted(range(len(values)), key=lambda k: values[k])
    groups = []
    for idx in order:
        if groups and abs(values[idx] - groups[-1][0][-1]) <= tol:
            groups[-1][0].append(values[idx])
            groups[-1][1].append(idx)
        else:
            groups.append(([values[idx]], [idx]))
    return [(float(np.mean(vals)), members) for vals, members in groups]


# ---------------------------------------------------------------------------
# the oracle
# ---------------------------------------------------------------------------


def oracle_difference_variance(signal: FockStateVector, lo: FockStateVector,
                               pairing: BeatPairing, fp: FrequencyPlan, *,
                               policy: TruncationPolicy | None = None) -> float:
    """Exact stationary variance of the balanced difference photocurrent.

    Builds the dense joint state signal (x) LO, reduces the balanced
    splitter to the interference observable, groups its terms by beat
    frequency, and returns the sum of folded group powers: the time average
    of the instantaneous variance, which is what a spectrum analyzer
    accumulates across the beat notes. Inputs with truncation leakage above
    1e-6 are rejected, since the variance would no longer be trustworthy.
    """
    policy = policy if policy is not None else TruncationPolicy()
    n_sig, n_lo = signal.n_modes, lo.n_modes
    if n_sig != len(pairing.signal_freqs):
        raise ValueError(
            f"signal has {n_sig} modes but the pairing lists {len(pairing.signal_freqs)}"
        )
    if n_lo != len(pairing.lo_freqs):
        raise ValueError(
            f"LO has {n_lo} modes but the pairing lists {len(pairing.lo_freqs)}"
        )
    for state, name in ((signal, "signal"), (lo, "lo")):
        leak = state.leakage
        if leak > _INPUT_LEAKAGE_LIMIT:
            raise ValueError(
                f"{name} state leakage {leak:g} exceeds {_INPUT_LEAKAGE_LIMIT:g}; "
                "raise the cutoff"
            )

    in_dims = signal.dims + lo.dims
    padded_dims = tuple(d + 1 for d in in_dims)
    policy.check_dimension(padded_dims)

    joint = np.zeros(padded_dims, dtype=np.complex128)
    core = joint[tuple(slice(0, d) for d in in_dims)]
    np.multiply(
        signal.amplitudes.reshape(signal.dims + (1,) * n_lo),
        lo.amplitudes,
        out=core,
    )
    nrm = _kernels.norm_sq(joint)

    beats = []
    for k in range(n_sig):
        for j in range(n_lo):
            beats.append((k, j, pairing.signal_freqs[k] - pairing.lo_freqs[j]))
    tol = 1e-9 * max(fp.delta, max(abs(b[2]) for b in beats))

    clusters = _cluster([b[2] for b in beats], tol)

    def _component(pos, neg):
        # C = sum_pos i a_k^dag b_j  +  sum_neg (-i) b_j^dag a_k, applied to joint
        comp = np.zeros_like(joint)
        for k, j, _ in pos:
            _kernels.pair_ladder_acc(comp, joint, axis_up=k, axis_dn=n_sig + j,
                                     coeff=1j)
        for k, j, _ in neg:
            _kernels.pair_ladder_acc(comp, joint, axis_up=n_sig + j, axis_dn=k,
                                     coeff=-1j)
        return comp

    handled: list[float] = []
    variance = 0.0
    for nu, members in clusters:
        if abs(nu) <= tol:
            # Each DC pair contributes its term and the conjugate at the same
            # (zero) beat, so the component is Hermitian.
            dc = [beats[m] for m in members]
            x = _component(dc, dc)
            mean = (_kernels.vdot(joint, x) / nrm).real
            variance += _kernels.norm_sq(x) / nrm - mean * mean
            del x
            continue
        mu = abs(nu)
        if any(abs(h - mu) <= tol for h in handled):
            continue
        handled.append(mu)
        plus = [beats[m] for c_nu, ms in clusters if abs(c_nu - mu) <= tol for m in ms]
        minus = [beats[m] for c_nu, ms in clusters if abs(c_nu + mu) <= tol for m in ms]
        x = _component(plus, minus)
        y = _component(minus, plus)
        variance += (_kernels.norm_sq(x) + _kernels.norm_sq(y)) / nrm
        variance -= (abs(_kernels.vdot(joint, x)) ** 2
                     + abs(_kernels.vdot(joint, y)) ** 2) / nrm**2
        del x, y
    return float(variance)


# ---------------------------------------------------------------------------
# explicit-unitary self-check route
# ---------------------------------------------------------------------------


def balanced_bs_unitary(dim: int) -> np.ndarray:
    """Dense 50/50 splitter unitary on a dim x dim two-mode space.

    Realizes the mode map d1 = (a + i b)/sqrt(2), d2 = (i a + b)/sqrt(2),
    the same convention as gaussian.BeamSplitterSpec.balanced().
    """
    ladder = np.sqrt(np.arange(1.0, dim))
    ad = np.diag(ladder, -1)
    a = np.diag(ladder, 1)
    gen = np.kron(ad, a) + np.kron(a, ad)
    return expm(1j * (math.pi / 4.0) * gen)


def apply_balanced_bs(state: FockStateVector, mode_a: int, mode_b: int) -> FockStateVector:
    """Mix two modes of a Fock state on the balanced splitter.

    Both axes are enlarged to hold the full redistributed photon range, so
    the map is exactly unitary on the retained space.
    """
    if mode_a == mode_b:
        raise ValueError("beam splitter needs two distinct modes")
    amp = state.amplitudes
    d_new = amp.shape[mode_a] + amp.shape[mode_b] - 1
    dims = list(amp.shape)
    dims[mode_a] = dims[mode_b] = d_new
    big = np.zeros(tuple(dims), dtype=np.complex128)
    big[tuple(slice(0, d) for d in amp.shape)] = amp
    out = _apply_pair_unitary(big, balanced_bs_unitary(d_new), mode_a, mode_b)
    return FockStateVector(out)


def _apply_pair_unitary(amp: np.ndarray, u: np.ndarray, axis_a: int, axis_b: int) -> np.ndarray:
    d = amp.shape[axis_a]
    if amp.shape[axis_b] != d or u.shape != (d * d, d * d):
        raise ValueError("unitary does not match the axis dimensions")
    moved = np.moveaxis(amp, (axis_a, axis_b), (0, 1))
    rest = moved.shape[2:]
    flat = moved.reshape(d * d, -1)
    mixed = (u @ flat).reshape((d, d) + rest)
    return np.ascontiguousarray(np.moveaxis(mixed, (0, 1), (axis_a, axis_b)))


@dataclass(frozen=True)
class UnitaryOracleResult:
    variance: float
    norm_before: float
    norm_after: float
    photons_in: float
    photons_out: float


def oracle_difference_variance_unitary(signal: FockStateVector, lo: FockStateVector,
                                       pairing: BeatPairing, fp: FrequencyPlan, *,
                                       max_total_dimension: int = 5_000_000
                                       ) -> UnitaryOracleResult:
    """Same observable as :func:`oracle_difference_variance`, but through the
    explicit splitter unitary applied per frequency.

    Every frequency carries a signal-port and an LO-port mode (vacuum where
    the inputs are silent); after mixing, the grouped difference observable
    is evaluated on the output state. Dimensions grow quadratically per
    frequency, so this route is for small cross-checks only.
    """
    n_sig, n_lo = signal.n_modes, lo.n_modes
    if n_sig != len(pairing.signal_freqs) or n_lo != len(pairing.lo_freqs):
        raise ValueError("pairing does not match the state mode counts")

    all_freqs = list(pairing.signal_freqs) + list(pairing.lo_freqs)
    tol = 1e-9 * max(fp.delta, max(abs(f - g) for f in all_freqs for g in all_freqs) or fp.delta)
    clusters = _cluster(all_freqs, tol)

    freq_entries = []  # (frequency, signal mode index or None, lo mode index or None)
    for freq, members in clusters:
        sig_idx = [m for m in members if m < n_sig]
        lo_idx = [m - n_sig for m in members if m >= n_sig]
        if len(sig_idx) > 1 or len(lo_idx) > 1:
            raise ValueError("unitary route cannot host two same-port modes at one frequency")
        freq_entries.append((freq, sig_idx[0] if sig_idx else None,
                             lo_idx[0] if lo_idx else None))

    dims = []
    for _, si, li in freq_entries:
        da = signal.dims[si] if si is not None else 1
        db = lo.dims[li] if li is not None else 1
        dims.extend([da + db, da + db])  # da + db - 1 occupied plus one headroom level
    total = math.prod(dims)
    if total > max_total_dimension:
        raise ValueError(
            f"unitary-route dimension {total} exceeds {max_total_dimension}; "
            "this route is for small self-checks"
        )

    # Embed the input product state: axis order (a_f0, b_f0, a_f1, b_f1, ...).
    core = np.multiply.outer(signal.amplitudes, lo.amplitudes)
    perm = []
    for _, si, li in freq_entries:
        perm.append(si if si is not None else None)
        perm.append(n_sig + li if li is not None else None)
    present_axes = [p for p in perm if p is not None]
    core = np.transpose(core, axes=present_axes)
    joint = np.zeros(tuple(dims), dtype=np.complex128)
    corner = [slice(0, 1)] * len(dims)
    it = iter(core.shape)
    for pos, p in enumerate(perm):
        if p is not None:
            corner[pos] = slice(0, next(it))
    joint[tuple(corner)] = core.reshape(tuple(s.stop for s in corner))

    def _total_photons(arr):
        probe = np.zeros_like(arr)
        for axis in range(arr.ndim):
            _number_acc(probe, arr, axis, 1.0)
        return (_kernels.vdot(arr, probe)).real

    norm_before = _kernels.norm_sq(joint)
    photons_in = _total_photons(joint) / norm_before

    for f_idx, (_, si, li) in enumerate(freq_entries):
        ax_a, ax_b = 2 * f_idx, 2 * f_idx + 1
        joint = _apply_pair_unitary(joint, balanced_bs_unitary(dims[ax_a]), ax_a, ax_b)

    norm_after = _kernels.norm_sq(joint)
    photons_out = _total_photons(joint) / norm_after

    # Grouped difference observable on the output state, restricted to the
    # beat bands the pairing declares (a band and its mirror): frequency
    # pairs outside those bands are not part of the measurement.
    declared = []
    for k in range(n_sig):
        for j in range(n_lo):
            declared.append(pairing.signal_freqs[k] - pairing.lo_freqs[j])
    declared += [-d for d in declared]
    freqs = [entry[0] for entry in freq_entries]
    nF = len(freqs)
    beats = [(i, j, freqs[i] - freqs[j]) for i in range(nF) for j in range(nF)
             if any(abs((freqs[i] - freqs[j]) - d) <= tol for d in declared)]
    bclusters = _cluster([b[2] for b in beats], tol)

    def _component(members):
        comp = np.zeros_like(joint)
        for i, j, _ in members:
            if i == j:
                _number_acc(comp, joint, 2 * i, 1.0)       # d1 port
                _number_acc(comp, joint, 2 * i + 1, -1.0)  # d2 port
            else:
                _kernels.pair_ladder_acc(comp, joint, axis_up=2 * i, axis_dn=2 * j,
                                         coeff=1.0)
                _kernels.pair_ladder_acc(comp, joint, axis_up=2 * i + 1,
                                         axis_dn=2 * j + 1, coeff=-1.0)
        return comp

    handled: list[float] = []
    variance = 0.0
    for nu, members in bclusters:
        if abs(nu) <= tol:
            x = _component([beats[m] for m in members])
            mean = (_kernels.vdot(joint, x) / norm_after).real
            variance += _kernels.norm_sq(x) / norm_after - mean * mean
            continue
        mu = abs(nu)
        if any(abs(h - mu) <= tol for h in handled):
            continue
        handled.append(mu)
        plus = [beats[m] for c_nu, ms in bclusters if abs(c_nu - mu) <= tol for m in ms]
        minus = [beats[m] for c_nu, ms in bclusters if abs(c_nu + mu) <= tol for m in ms]
        x = _component(plus)
        y = _component(minus)
        variance += (_kernels.norm_sq(x) + _kernels.norm_sq(y)) / norm_after
        variance -= (abs(_kernels.vdot(joint, x)) ** 2
                     + abs(_kernels.vdot(joint, y)) ** 2) / norm_after**2

    return UnitaryOracleResult(
        variance=float(variance),
        norm_before=float(norm_before),
        norm_after=float(norm_after),
        photons_in=float(photons_in),
        photons_out=float(photons_out),
    )


# ---------------------------------------------------------------------------
# convenience runs against reference frequency plans
# ---------------------------------------------------------------------------


def reference_plan(case: ImageBandCase | None, *, omega_minus: float = 2.0e15,
                   delta: float = 2.0 * math.pi * 10.0e6,
                   two_band_detuning_fraction: float = 0.125) -> FrequencyPlan:
    """A concrete frequency plan realizing a detection configuration.

    ``case=None`` gives the single-tone plan with the tone centered between
    the signal modes. The two-image-band plan uses opposite detunings of
    ``two_band_detuning_fraction * delta``.
    """
    omega_plus = omega_minus + delta
    if case is None:
        return FrequencyPlan(omega_plus=omega_plus, omega_minus=omega_minus,
                             lo_frequencies=(omega_minus + 0.5 * delta,))
    if case is ImageBandCase.NO_IMAGE_BANDS:
        lo = (omega_minus, omega_plus)
    elif case is ImageBandCase.SHARED_IMAGE_BAND:
        lo = (omega_minus + 0.25 * delta, omega_plus - 0.25 * delta)
    else:
        if not 0.0 < two_band_detuning_fraction < 0.5:
            raise ValueError("two_band_detuning_fraction must lie in (0, 0.5)")
        if two_band_detuning_fraction == 0.25:
            raise ValueError("a 0.25 fraction collapses to the shared-image configuration")
        d1 = two_band_detuning_fraction * delta
        lo = (omega_minus + d1, omega_plus - d1)
    return FrequencyPlan(omega_plus=omega_plus, omega_minus=omega_minus, lo_frequencies=lo)


def oracle_blo_run(p: SqueezeParams, beta: float, chi1: float, chi2: float,
                   case: ImageBandCase, *, policy: TruncationPolicy | None = None,
                   plan: FrequencyPlan | None = None) -> float:
    """Build states for a two-tone configuration and run the oracle."""
    policy = policy if policy is not None else TruncationPolicy()
    plan = plan if plan is not None else reference_plan(case)
    signal = build_blo_signal_state(p, case, policy.tmss_cutoff(p.s))
    lo = build_coherent_product([(beta, chi1), (beta, chi2)], policy.coherent_cutoff(beta))
    pairing = BeatPairing.for_blo(plan, case)
    return oracle_difference_variance(signal, lo, pairing, plan, policy=policy)


def oracle_standard_run(p: SqueezeParams, beta: float, chi: float, *,
                        policy: TruncationPolicy | None = None,
                        plan: FrequencyPlan | None = None) -> float:
    """Build states for the single-tone configuration and run the oracle."""
    policy = policy if policy is not None else TruncationPolicy()
    plan = plan if plan is not None else reference_plan(None)
    signal = build_tmss(p, policy.tmss_cutoff(p.s))
    lo = build_coherent_product([(beta, chi)], policy.coherent_cutoff(beta))
    pairing = BeatPairing.for_standard(plan)
    return oracle_difference_variance(signal, lo, pairing, plan, policy=policy)

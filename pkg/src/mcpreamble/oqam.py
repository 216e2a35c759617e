"""OFDM/OQAM synthesis and analysis filter banks and their ambiguity table.

Subcarrier m at half-symbol position n carries the pulse

    g'_{m,n}(l) = g(l - n*M/2) * exp(j*(2*pi/M)*m*(l - c)),   c = (L_g-1)/2,

where g is a real, symmetric, unit-energy prototype of length L_g.  The
grid symbol at (m, n) is x_{m,n} = a_{m,n} * exp(j*phi_{m,n}) with real
amplitude a and a phase that is either 0 on every point (equal-phase
training) or follows the staggered rule phi = (pi/2)*(m+n) mod pi.

Prototypes come from the frequency-sampling construction: L_g = K*M taps
obtained from 2*K-1 frequency samples,

    g(l) = G_0 + 2 * sum_k G_k * cos(2*pi*k*(l - c) / L_g),

normalized to unit energy.  These pulses have spectral support narrower
than two subcarrier spacings, which makes every inner product between
pulses two or more subcarriers apart on the same column vanish exactly;
cross-column products decay with |dm| but are nonzero for |dm| <= 1.

The ambiguity table caches the inner products

    A(dm, dn) = sum_l g(l - dn*M/2) * g(l) * exp(j*2*pi*dm*(l - c)/M)

for literal index offsets dm (no wrapping: the offset between tones 0 and
M-1 is the literal M-1, and A(dm + M, dn) = -A(dm, dn) for even L_g, so
edge weights pick up a sign automatically).  Between arbitrary positions,
<g'_{p+dm, q+dn}, g'_{p,q}> = (-1)^(dm*q) * A(dm, dn).

Both filter banks have direct O(M*L_g) definitions; the implementations
here use M-point FFTs after folding the pulse products modulo M, which is
algebraically identical (geometric resummation, no approximation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig

# Frequency-sampling prototype coefficients G_0..G_{K-1} (G_0 = 1; the
# remaining 2*K-1 frequency samples follow by symmetry and the power
# complementarity G_k^2 + G_{K-k}^2 = 1).
PROTO_COEFFS = {
    1: [1.0],
    2: [1.0, np.sqrt(2.0) / 2.0],
    3: [1.0, 0.91143783, 0.41143783],
    4: [1.0, 0.97195983, np.sqrt(2.0) / 2.0, 0.23514695],
    5: [1.0, 0.99184131, 0.86541624, 0.50105361, 0.12747868],
}


@dataclass(frozen=True)
class PrototypeFilter:
    """Real symmetric unit-energy pulse tied to a subcarrier count M.

    K is the overlapping factor for frequency-sampling designs and None
    for pulses of other lengths (e.g. truncated ones).
    """

    g: np.ndarray
    M: int
    K: int | None

    def __post_init__(self) -> None:
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "g", g)
        if self.K is not None and len(g) != self.K * self.M:
            raise ValueError("frequency-sampling prototype must have length K*M")

    @property
    def L_g(self) -> int:
        return len(self.g)

    @property
    def center(self) -> float:
        return (self.L_g - 1) / 2.0

    @property
    def energy(self) -> float:
        return float(np.sum(self.g ** 2))


def design_prototype(M: int, K: int) -> PrototypeFilter:
    """Frequency-sampling prototype of length K*M, unit energy."""
    if K not in PROTO_COEFFS:
        raise ValueError(f"K must be one of {sorted(PROTO_COEFFS)}, got {K}")
    L_g = K * M
    c = (L_g - 1) / 2.0
    l = np.arange(L_g)
    coeffs = PROTO_COEFFS[K]
    g = np.full(L_g, coeffs[0], dtype=float)
    for k in range(1, K):
        g += 2.0 * coeffs[k] * np.cos(2.0 * np.pi * k * (l - c) / L_g)
    g /= np.sqrt(np.sum(g ** 2))
    return PrototypeFilter(g=g, M=M, K=K)


def truncate_prototype(proto: PrototypeFilter, length: int) -> PrototypeFilter:
    """Central `length` samples of a prototype, renormalized to unit energy."""
    if not (0 < length <= proto.L_g):
        raise ValueError(f"length must lie in 1..{proto.L_g}, got {length}")
    start = (proto.L_g - length) // 2
    g = proto.g[start:start + length].copy()
    g /= np.sqrt(np.sum(g ** 2))
    return PrototypeFilter(g=g, M=proto.M, K=None)


def save_prototype(proto: PrototypeFilter, path) -> None:
    """Write the pulse taps as plain text, one real per line."""
    np.savetxt(path, proto.g, fmt="%.17g")


def load_prototype(path, M: int) -> PrototypeFilter:
    """Read a pulse written by save_prototype."""
    g = np.loadtxt(path, dtype=float).reshape(-1)
    K = len(g) // M if len(g) % M == 0 else None
    return PrototypeFilter(g=g, M=M, K=K)


def data_phase(m, n) -> np.ndarray:
    """Staggered phase rule phi = (pi/2)*(m+n) mod pi, values in {0, pi/2}."""
    return (np.pi / 2.0) * (np.asarray(m + n) % 2)


@dataclass
class OqamGrid:
    """Real amplitudes and phases on the time-frequency grid.

    a and phi are (M, n_cols) real arrays; column n occupies time offset
    n*M/2.  The transmitted symbol is x = a * exp(j*phi).
    """

    a: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        self.a = np.asarray(self.a, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.a.shape != self.phi.shape or self.a.ndim != 2:
            raise ValueError("a and phi must be 2-d arrays of equal shape")

    @classmethod
    def zeros(cls, M: int, n_cols: int) -> "OqamGrid":
        return cls(a=np.zeros((M, n_cols)), phi=np.zeros((M, n_cols)))

    @property
    def M(self) -> int:
        return self.a.shape[0]

    @property
    def n_cols(self) -> int:
        return self.a.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.a * np.exp(1j * self.phi)

    def copy(self) -> "OqamGrid":
        return OqamGrid(a=self.a.copy(), phi=self.phi.copy())


def sfb(grid: OqamGrid, proto: PrototypeFilter, config: SystemConfig | None = None) -> np.ndarray:
    """Synthesis filter bank output for the whole grid.

    Per column n the M tones share the pulse window, so the sum over m is
    an M-point inverse DFT of the phase-derotated symbols, tiled modulo M
    under the pulse.  The tone ramp exp(j*2*pi*m*(l - c)/M) is referenced
    to absolute sample time, so the ring is read at absolute residues:

        s(n*M/2 + l) += g(l) * (M * ifft(x_n * e^{-j2pi m c/M}))[(n*M/2 + l) mod M]
    """
    M = grid.M
    if proto.M != M:
        raise ValueError("prototype and grid disagree on M")
    if config is not None and config.M != M:
        raise ValueError("config and grid disagree on M")
    L_g, half = proto.L_g, M // 2
    s = np.zeros((grid.n_cols - 1) * half + L_g, dtype=complex)
    derot = np.exp(-2j * np.pi * np.arange(M) * proto.center / M)
    x = grid.x
    offsets = np.arange(L_g)
    for n in range(grid.n_cols):
        col = x[:, n]
        if not col.any():
            continue
        q = M * np.fft.ifft(col * derot)
        s[n * half:n * half + L_g] += proto.g * q[(n * half + offsets) % M]
    return s


def _fold_column(r: np.ndarray, proto: PrototypeFilter, n: int) -> np.ndarray:
    """Pulse-windowed receive samples of column n folded modulo M."""
    M, L_g, half = proto.M, proto.L_g, proto.M // 2
    start = n * half
    if start < 0 or start + L_g > len(r):
        raise ValueError(
            f"column {n} needs samples {start}..{start + L_g - 1}, "
            f"got {len(r)} samples"
        )
    w = r[start:start + L_g] * proto.g
    folded = np.zeros(M, dtype=complex)
    np.add.at(folded, (start + np.arange(L_g)) % M, w)
    return folded


def afb_column(r, proto: PrototypeFilter, n: int) -> np.ndarray:
    """All M analysis outputs of column n:  y_p = <r, g'_{p,n}>.

    Folding the windowed samples modulo M turns the projection into one
    M-point DFT plus the center-phase rerotation.
    """
    r = np.asarray(r, dtype=complex).reshape(-1)
    folded = _fold_column(r, proto, n)
    rerot = np.exp(2j * np.pi * np.arange(proto.M) * proto.center / proto.M)
    return np.fft.fft(folded) * rerot


def afb(r, proto: PrototypeFilter, config: SystemConfig | None, points) -> np.ndarray:
    """Analysis filter bank outputs at the given (m, n) grid points."""
    r = np.asarray(r, dtype=complex).reshape(-1)
    pts = list(points)
    out = np.zeros(len(pts), dtype=complex)
    by_col: dict[int, list[int]] = {}
    for i, (m, n) in enumerate(pts):
        by_col.setdefault(int(n), []).append(i)
    for n, idxs in by_col.items():
        col = afb_column(r, proto, n)
        for i in idxs:
            out[i] = col[int(pts[i][0])]
    return out


@dataclass
class AmbiguityTable:
    """Cached pulse inner products A(dm, dn) for one prototype.

    weight() returns the literal-offset inner product; row() returns the
    weights of every tone of one column onto a given analysis point.
    """

    proto: PrototypeFilter
    _fold_fft: dict = field(default_factory=dict, repr=False)

    @property
    def M(self) -> int:
        return self.proto.M

    def _shifted_fft(self, dn: int) -> np.ndarray:
        """W_hat[k] = sum_l g(l - dn*M/2) g(l) exp(+j*2*pi*k*l/M), k = 0..M-1."""
        if dn not in self._fold_fft:
            M, L_g = self.M, self.proto.L_g
            shift = dn * (M // 2)
            l = np.arange(L_g)
            src = l - shift
            valid = (src >= 0) & (src < L_g)
            w = np.zeros(L_g)
            w[valid] = self.proto.g[src[valid]] * self.proto.g[l[valid]]
            folded = np.zeros(M, dtype=complex)
            np.add.at(folded, l % M, w)
            self._fold_fft[dn] = M * np.fft.ifft(folded)
        return self._fold_fft[dn]

    def weight(self, dm: int, dn: int, pilot_col: int = 0) -> complex:
        """<g'_{p+dm, q+dn}, g'_{p, q}> for literal offsets, q = pilot_col."""
        M = self.M
        what = self._shifted_fft(dn)
        a = np.exp(-2j * np.pi * dm * self.proto.center / M) * what[dm % M]
        if (dm * pilot_col) % 2:
            a = -a
        return complex(a)

    def row(self, p: int, dn: int, pilot_col: int = 0) -> np.ndarray:
        """Weights of tones m = 0..M-1 (column pilot_col + dn) onto (p, pilot_col)."""
        M = self.M
        what = self._shifted_fft(dn)
        dm = np.arange(M) - p
        w = np.exp(-2j * np.pi * dm * self.proto.center / M) * what[dm % M]
        if pilot_col % 2:
            w = np.where(dm % 2, -w, w)
        return w

    # Scalar shorthands for the first-order neighborhood.
    @property
    def beta(self) -> float:
        return float(self.weight(1, 0).real)

    @property
    def rho(self) -> float:
        return float(self.weight(0, 1).real)

    @property
    def wtilde(self) -> float:
        return float(abs(self.weight(1, 1)))

    def u(self, dm: int, dn: int) -> float:
        """Data-mode real interference weight.

        With staggered phases the cross term at offset (dm, dn) is
        j * u(dm, dn) times the interfering real symbol; u is real up to
        roundoff for the first-order neighborhood.
        """
        val = 1j ** ((dm + dn - 1) % 4) * self.weight(dm, dn)
        return float(val.real)

    def pr_residual(self) -> float:
        """Worst real-orthogonality violation over the pulse overlap range.

        Perfect reconstruction in the real field requires
        Re[j^-(dm+dn) A(dm, dn)] = delta(dm, dn); the first-order terms
        satisfy it exactly by symmetry, so the residual is dominated by
        second-order frequency offsets.
        """
        n_cols = 2 * (self.proto.L_g // self.M) + 1
        worst = 0.0
        for dn in range(0, n_cols):
            for dm in (0, 1, 2):
                if dm == 0 and dn == 0:
                    continue
                val = (1j ** (-(dm + dn) % 4) * self.weight(dm, dn)).real
                worst = max(worst, abs(val))
        return worst


def ambiguity(proto: PrototypeFilter, config: SystemConfig | None = None) -> AmbiguityTable:
    """Build the ambiguity table for a prototype."""
    if config is not None and config.M != proto.M:
        raise ValueError("config and prototype disagree on M")
    return AmbiguityTable(proto=proto)


# Offsets whose pulse inner products are first order in magnitude.
FIRST_ORDER_OFFSETS = [
    (-1, -1), (0, -1), (1, -1),
    (-1, 0), (1, 0),
    (-1, 1), (0, 1), (1, 1),
]


def pseudo_pilot(grid: OqamGrid, table: AmbiguityTable, point) -> complex:
    """First-order equivalent pilot at a grid point.

    Over a channel flat across the pulse neighborhood, the analysis
    output at `point` is approximately H * c with

        c = x_{p,q} + sum_first_order x_{p+dm, q+dn} <g'_{p+dm,q+dn}, g'_{p,q}>,

    which this returns.  Dividing the measurement by c instead of x alone
    removes the dominant intrinsic interference.
    """
    p, q = int(point[0]), int(point[1])
    M, x = grid.M, grid.x
    c = complex(x[p, q])
    for dm, dn in FIRST_ORDER_OFFSETS:
        n = q + dn
        if not (0 <= n < grid.n_cols):
            continue
        m = (p + dm) % M
        if x[m, n] == 0:
            continue
        c += x[m, n] * table.weight(m - p, dn, pilot_col=q)
    return c


def help_pilot(grid: OqamGrid, table: AmbiguityTable, pilot, helper) -> float:
    """Real amplitude at `helper` that cancels the interference at `pilot`.

    The grid must already hold phases at the helper position (its current
    amplitude is ignored).  All eight first-order contributions to an
    equal-phase pilot share one complex axis, so a single real amplitude
    cancels them; the solve is rejected if the residual axis mismatch
    exceeds roundoff by a wide margin.
    """
    p, q = int(pilot[0]), int(pilot[1])
    r, s = int(helper[0]), int(helper[1])
    work = grid.copy()
    work.a[r, s] = 0.0
    c = pseudo_pilot(work, table, (p, q))
    v = c - complex(work.x[p, q])
    w_h = table.weight(r - p, s - q, pilot_col=q)
    if abs(w_h) == 0:
        raise ValueError("helper position does not reach the pilot at first order")
    amp = -v / (np.exp(1j * grid.phi[r, s]) * w_h)
    if abs(amp.imag) > 1e-9 * max(1.0, abs(amp.real)):
        raise ValueError(
            f"interference at pilot {pilot} is not on the helper axis "
            f"(residual {amp.imag:.3e})"
        )
    return float(amp.real)

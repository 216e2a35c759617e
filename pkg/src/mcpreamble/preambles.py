"""Training preamble constructors with exact energy accounting.

Every constructor targets a training energy budget E and records, next to
the symbols themselves, the energy the preamble actually costs at the
antenna over its observation window:

  * CP-OFDM, N >= L_h equal pilots on an equispaced set: the prefix
    energy is exactly zero (no time sample of the equispaced comb falls
    in the copied range), so the antenna energy equals the subcarrier
    energy.
  * OFDM/OQAM, isolated pilots (spacing >= 2, frequency-sampling pulse):
    pulse cross products vanish exactly, antenna energy = sum of a_p^2.
  * OFDM/OQAM, full equal-phase column: antenna energy is
    a^2 * (M*(1+2*beta) - 4*beta); the -4*beta comes from the two
    wrap-around pairs whose weight is -beta instead of +beta.
  * sparse-plus-data scenarios: the data symbols are information, not
    training, but they leak energy into the training window (CP-OFDM) or
    require side pilots (OQAM), and that expected cost is part of the
    declared training energy.

Amplitudes are solved so the declared training energy equals E exactly
for the deterministic constructions, and in expectation over the data
for the sparse-plus-data ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .cpofdm import cp_energy
from .fourier import equispaced_set
from .oqam import (
    AmbiguityTable,
    OqamGrid,
    PrototypeFilter,
    ambiguity,
    data_phase,
    design_prototype,
    help_pilot,
    pseudo_pilot,
)

DIVISOR_MODES = ("plain", "pseudo")

SCENARIOS = ("qam-sd", "oqam-1a", "oqam-1b", "oqam-2", "oqam-3")


@dataclass(eq=False)
class Preamble:
    """One constructed training preamble plus its accounting.

    x is the CP-OFDM frequency vector (None for OQAM); grid is the OQAM
    time-frequency grid (None for CP-OFDM).  divisors holds what the
    per-pilot least-squares estimator divides by.  window is the length
    R of the observation interval the training occupies, used by the
    power-ratio comparisons.  E_train is the declared training energy
    (exact for deterministic preambles, expected over data otherwise).
    """

    system: str
    family: str
    scenario: str | None
    pilot_idx: np.ndarray
    divisors: np.ndarray
    x: np.ndarray | None
    grid: OqamGrid | None
    E: float
    E_train: float
    window: int
    energy_mode: str = "antenna"
    data_positions: tuple | None = None
    helper_map: dict | None = None

    @property
    def n_pilots(self) -> int:
        return len(self.pilot_idx)

    @property
    def pilot_energy(self) -> float:
        """Per-pilot symbol energy E_x."""
        if self.system == "cpofdm":
            vals = self.x[self.pilot_idx]
        else:
            vals = self.grid.a[self.pilot_idx, 0]
        return float(np.mean(np.abs(vals) ** 2))

    def scaled(self, amp: float) -> "Preamble":
        """Same layout with every amplitude multiplied by amp."""
        return Preamble(
            system=self.system,
            family=self.family,
            scenario=self.scenario,
            pilot_idx=self.pilot_idx.copy(),
            divisors=self.divisors * amp,
            x=None if self.x is None else self.x * amp,
            grid=None if self.grid is None else OqamGrid(
                a=self.grid.a * amp, phi=self.grid.phi.copy()
            ),
            E=self.E * amp ** 2,
            E_train=self.E_train * amp ** 2,
            window=self.window,
            energy_mode=self.energy_mode,
            data_positions=self.data_positions,
            helper_map=self.helper_map,
        )


def save_preamble(p: Preamble, path) -> None:
    """Plain-text form: one `index,re,im` row per nonzero grid entry.

    For OQAM the index of grid point (m, n) is m + n*M.
    """
    if p.system == "cpofdm":
        entries = [(m, v) for m, v in enumerate(p.x) if v != 0]
    else:
        x = p.grid.x
        M = p.grid.M
        entries = [
            (m + n * M, x[m, n])
            for n in range(p.grid.n_cols)
            for m in range(M)
            if x[m, n] != 0
        ]
    with open(path, "w") as fh:
        fh.write("index,re,im\n")
        for i, v in entries:
            fh.write(f"{i},{v.real:.17g},{v.imag:.17g}\n")


def load_preamble_values(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back (indices, complex values) written by save_preamble."""
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    idx = raw[:, 0].astype(np.int64)
    return idx, raw[:, 1] + 1j * raw[:, 2]


def _oqam_context(config: SystemConfig, proto, table):
    if proto is None:
        proto = design_prototype(config.M, config.K)
    if table is None:
        table = ambiguity(proto)
    return proto, table


def _sfb_energy_sparse(a: float, N: int) -> float:
    # isolated pilots: all cross products vanish exactly
    return a * a * N


def make_sparse_equal(
    system: str,
    N: int,
    i_0: int,
    E: float,
    config: SystemConfig,
    proto: PrototypeFilter | None = None,
    table: AmbiguityTable | None = None,
) -> Preamble:
    """Equal real pilots on an equispaced set of N >= L_h tones."""
    if N < config.L_h:
        raise ValueError(f"need N >= L_h={config.L_h} pilots, got {N}")
    idx = equispaced_set(config.M, N, i_0)
    amp = np.sqrt(E / N)
    if system == "cpofdm":
        x = np.zeros(config.M, dtype=complex)
        x[idx] = amp
        e_cp = cp_energy(x, config)
        return Preamble(
            system=system, family="sparse", scenario=None,
            pilot_idx=idx, divisors=x[idx].copy(), x=x, grid=None,
            E=E, E_train=N * amp ** 2 + e_cp, window=config.M + config.nu,
        )
    if system == "oqam":
        if config.M // N < 2:
            raise ValueError("OQAM pilots need spacing >= 2 subcarriers")
        proto, table = _oqam_context(config, proto, table)
        grid = OqamGrid.zeros(config.M, 1)
        grid.a[idx, 0] = amp
        return Preamble(
            system=system, family="sparse", scenario=None,
            pilot_idx=idx, divisors=np.full(N, amp, dtype=complex),
            x=None, grid=grid,
            E=E, E_train=_sfb_energy_sparse(amp, N), window=proto.L_g,
        )
    raise ValueError(f"unknown system {system!r}")


def make_full_equal(
    system: str,
    E: float,
    energy_mode: str,
    config: SystemConfig,
    proto: PrototypeFilter | None = None,
    table: AmbiguityTable | None = None,
    divisor: str = "pseudo",
) -> Preamble:
    """Equal real symbols on all M tones of one multicarrier symbol.

    energy_mode "antenna" solves the amplitude so the energy leaving the
    antenna equals E; "sfb_input" (OQAM) or "subcarrier" (CP-OFDM) puts E
    on the symbols themselves and lets the antenna energy differ.
    """
    M = config.M
    idx = np.arange(M, dtype=np.int64)
    if system == "cpofdm":
        if energy_mode not in ("antenna", "subcarrier"):
            raise ValueError(f"unknown energy_mode {energy_mode!r}")
        amp = np.sqrt(E / M)
        x = np.full(M, amp, dtype=complex)
        e_cp = cp_energy(x, config)  # exactly zero for the equal comb
        return Preamble(
            system=system, family="full", scenario=None,
            pilot_idx=idx, divisors=x.copy(), x=x, grid=None,
            E=E, E_train=M * amp ** 2 + e_cp, window=M + config.nu,
            energy_mode=energy_mode,
        )
    if system == "oqam":
        proto, table = _oqam_context(config, proto, table)
        if divisor not in DIVISOR_MODES:
            raise ValueError(f"divisor must be one of {DIVISOR_MODES}")
        beta = table.beta
        ant_factor = M * (1.0 + 2.0 * beta) - 4.0 * beta
        if energy_mode == "antenna":
            amp = np.sqrt(E / ant_factor)
        elif energy_mode == "sfb_input":
            amp = np.sqrt(E / M)
        else:
            raise ValueError(f"unknown energy_mode {energy_mode!r}")
        grid = OqamGrid.zeros(M, 1)
        grid.a[:, 0] = amp
        if divisor == "plain":
            div = np.full(M, amp, dtype=complex)
        else:
            div = np.array(
                [pseudo_pilot(grid, table, (m, 0)) for m in range(M)]
            )
        return Preamble(
            system=system, family="full", scenario=None,
            pilot_idx=idx, divisors=div, x=None, grid=grid,
            E=E, E_train=amp ** 2 * ant_factor, window=proto.L_g,
            energy_mode=energy_mode,
        )
    raise ValueError(f"unknown system {system!r}")


def make_full_equipower_qam(
    k: int,
    m: int,
    gamma: float,
    theta: float,
    E: float,
    config: SystemConfig,
) -> Preamble:
    """Two-impulse CP-OFDM preamble: equal power on every subcarrier.

    x_r = a_k exp(-2j*pi*r*k/M) + a_m exp(-2j*pi*r*m/M) with |k - m| =
    M/2 and the two coefficients in phase quadrature.  The time-domain
    symbol is two impulses at samples k and m, so the prefix energy is
    exactly zero whenever both fall before M - nu, and the peak-to-mean
    ratio of the useful part is M * max(gamma^2, 1 - gamma^2).
    """
    M = config.M
    if not (0 <= k < M and 0 <= m < M):
        raise ValueError("impulse positions must lie in 0..M-1")
    if (k - m) % M != M // 2:
        raise ValueError("impulse positions must differ by M/2")
    if not (0.0 <= gamma <= 1.0):
        raise ValueError("gamma must lie in [0, 1]")
    a_k = gamma * np.sqrt(E / M) * np.exp(1j * theta)
    a_m = np.sqrt(1.0 - gamma ** 2) * np.sqrt(E / M) * np.exp(1j * (theta + np.pi / 2))
    r = np.arange(M)
    x = a_k * np.exp(-2j * np.pi * r * k / M) + a_m * np.exp(-2j * np.pi * r * m / M)
    e_cp = cp_energy(x, config)
    return Preamble(
        system="cpofdm", family="equipower", scenario=None,
        pilot_idx=r.astype(np.int64), divisors=x.copy(), x=x, grid=None,
        E=E, E_train=float(np.sum(np.abs(x) ** 2)) + e_cp,
        window=M + config.nu,
    )


def _qpsk(rng: np.random.Generator, n: int, energy: float) -> np.ndarray:
    """Gray-mapped QPSK, |symbol|^2 = energy."""
    bits = rng.integers(0, 2, size=(n, 2))
    return np.sqrt(energy / 2.0) * ((1 - 2 * bits[:, 0]) + 1j * (1 - 2 * bits[:, 1]))


def _real_halves(rng: np.random.Generator, n: int, energy: float) -> np.ndarray:
    """Random signs carrying half a QPSK symbol's energy each."""
    return np.sqrt(energy / 2.0) * (1 - 2 * rng.integers(0, 2, size=n))


def expected_helper_ratio(scenario: str, table: AmbiguityTable) -> float:
    """zeta = E[helper^2] / E_x for the helper-pilot scenarios.

    The helper cancels the first-order interference v at its pilot, so
    E[helper^2] = E[|v|^2] / rho^2 with v summing the surviving data
    neighbors (each carrying E_x/2).
    """
    if scenario == "oqam-2":
        return table.wtilde ** 2 / table.rho ** 2
    if scenario == "oqam-3":
        return (table.beta ** 2 + table.wtilde ** 2) / table.rho ** 2
    return 0.0


def make_sparse_data(
    system: str,
    scenario: str,
    E: float,
    data_seed,
    config: SystemConfig,
    proto: PrototypeFilter | None = None,
    table: AmbiguityTable | None = None,
    i_0: int = 0,
) -> Preamble:
    """Sparse pilots sharing the training symbol with payload data.

    Scenarios:
      qam-sd   CP-OFDM, L_h pilots, QPSK data on every other tone.
      oqam-1a  OQAM, one column: pilots plus data on every other tone.
      oqam-1b  as 1a with the pilot-adjacent tones left empty.
      oqam-2   two columns: zeros around the pilots, data elsewhere,
               and a help pilot above each pilot canceling the
               first-order interference.
      oqam-3   as 2 with data also on the pilot-adjacent tones of the
               pilot column (larger help pilots).

    The data symbols are redrawn from data_seed on every call; pilots
    carry E/N each, data tones the same constellation energy.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}")
    rng = np.random.default_rng(data_seed)
    N = config.L_h
    idx = equispaced_set(config.M, N, i_0)
    e_x = E / N
    amp = np.sqrt(e_x)
    M = config.M

    if system == "cpofdm":
        if scenario != "qam-sd":
            raise ValueError(f"scenario {scenario!r} is not a CP-OFDM layout")
        x = np.zeros(M, dtype=complex)
        x[idx] = amp
        mask = np.ones(M, dtype=bool)
        mask[idx] = False
        x[mask] = _qpsk(rng, int(mask.sum()), e_x)
        # expected prefix cost of the data comb: E_x * nu / M per tone
        e_train = N * e_x + (M - N) * e_x * config.nu / M
        return Preamble(
            system=system, family="sparse_data", scenario=scenario,
            pilot_idx=idx, divisors=np.full(N, amp, dtype=complex), x=x,
            grid=None, E=E, E_train=e_train, window=M + config.nu,
            data_positions=tuple((int(mm), 0) for mm in np.where(mask)[0]),
        )

    if system != "oqam":
        raise ValueError(f"unknown system {system!r}")
    if scenario == "qam-sd":
        raise ValueError("qam-sd is not an OQAM layout")
    proto, table = _oqam_context(config, proto, table)
    if config.M // N < 2:
        raise ValueError("OQAM pilots need spacing >= 2 subcarriers")

    n_cols = 1 if scenario in ("oqam-1a", "oqam-1b") else 2
    grid = OqamGrid.zeros(M, n_cols)
    grid.a[idx, 0] = amp

    guard = np.zeros(M, dtype=bool)
    if scenario in ("oqam-1b", "oqam-2"):
        guard[(idx + 1) % M] = True
        guard[(idx - 1) % M] = True
    pilot_mask = np.zeros(M, dtype=bool)
    pilot_mask[idx] = True

    data_positions = []
    col0_data = np.where(~pilot_mask & ~guard)[0]
    grid.a[col0_data, 0] = _real_halves(rng, len(col0_data), e_x)
    grid.phi[col0_data, 0] = data_phase(col0_data, 0)
    data_positions += [(int(mm), 0) for mm in col0_data]

    helper_map = None
    if n_cols == 2:
        col1_data = np.where(~pilot_mask)[0]
        grid.a[col1_data, 1] = _real_halves(rng, len(col1_data), e_x)
        grid.phi[col1_data, 1] = data_phase(col1_data, 1)
        data_positions += [(int(mm), 1) for mm in col1_data]
        grid.phi[idx, 1] = data_phase(idx, 1)
        helper_map = {}
        for p in idx:
            grid.a[p, 1] = help_pilot(grid, table, (int(p), 0), (int(p), 1))
            helper_map[int(p)] = (int(p), 1)

    zeta = expected_helper_ratio(scenario, table)
    window = proto.L_g + (M // 2 if n_cols == 2 else 0)
    return Preamble(
        system=system, family="sparse_data", scenario=scenario,
        pilot_idx=idx, divisors=np.full(N, amp, dtype=complex), x=None,
        grid=grid, E=E, E_train=N * e_x * (1.0 + zeta), window=window,
        data_positions=tuple(data_positions), helper_map=helper_map,
    )

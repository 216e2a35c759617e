"""Energy accounting, closed-form MSE, error floors, and optimality checks.

Conventions used by every routine here:

  * MSE values are for the full CFR estimate, E||H_hat - H||^2 summed
    over the M tones, unless a result object says domain="cir"; the two
    differ exactly by a factor M because F_{M x L_h}^H F_{M x L_h} = M*I.
  * Training power ratios compare declared training energies per
    observation window, (E_1/R_1)/(E_2/R_2); payload data counts only
    through the side cost it forces on the training (prefix spillage,
    help pilots), never through its own useful energy.
  * Error floors are the sigma -> 0 residuals of the estimators under
    the per-subcarrier-flat channel model, built from the exact pulse
    inner products of the whole grid, not just the first-order ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import cfr_from_cir, gen_veh_a
from .config import SystemConfig
from .cpofdm import modulate
from .fourier import dft_submatrix
from .oqam import AmbiguityTable, PrototypeFilter, ambiguity, design_prototype, sfb
from .preambles import (
    Preamble,
    make_full_equal,
    make_full_equipower_qam,
    make_sparse_data,
    make_sparse_equal,
)


def papr(s) -> float:
    """Peak-to-average power ratio of a sample vector."""
    p = np.abs(np.asarray(s, dtype=complex)) ** 2
    if p.size == 0 or p.mean() == 0:
        raise ValueError("empty or all-zero signal")
    return float(p.max() / p.mean())


def antenna_energy(preamble: Preamble, config: SystemConfig,
                   proto: PrototypeFilter | None = None) -> float:
    """Exact synthesized energy of the preamble over its window.

    For CP-OFDM this includes the prefix; for OQAM it is the SFB output
    energy of the whole grid.  Sparse-plus-data preambles include their
    realized data energy here; their declared training energy E_train is
    the expectation-based accounting instead.
    """
    if preamble.system == "cpofdm":
        return modulate(preamble.x, config).energy
    if proto is None:
        proto = design_prototype(config.M, config.K)
    s = sfb(preamble.grid, proto, config)
    return float(np.sum(np.abs(s) ** 2))


@dataclass(frozen=True)
class TprReport:
    """Training power ratio between two preambles."""

    e1: float
    e2: float
    r1: int
    r2: int
    value: float

    @property
    def db(self) -> float:
        return 10.0 * np.log10(self.value)


def tpr(p1: Preamble, p2: Preamble, config: SystemConfig) -> TprReport:
    """Training power ratio (E_1/R_1) / (E_2/R_2) of declared energies."""
    value = (p1.E_train / p1.window) / (p2.E_train / p2.window)
    return TprReport(e1=p1.E_train, e2=p2.E_train,
                     r1=p1.window, r2=p2.window, value=value)


@dataclass(frozen=True)
class MsePrediction:
    """Closed-form estimation MSE split into noise part and floor."""

    noise: float
    floor: float
    tag: str
    domain: str = "cfr"

    @property
    def mse(self) -> float:
        return self.noise + self.floor


def genie_mse(sigma2: float, E: float, config: SystemConfig,
              domain: str = "cir") -> float:
    """Estimation-theoretic lower bound L_h*sigma^2/E (cir domain)."""
    v = config.L_h * sigma2 / E
    return v * config.M if domain == "cfr" else v


def _oqam_context(config, proto, table):
    if proto is None:
        proto = design_prototype(config.M, config.K)
    if table is None:
        table = ambiguity(proto)
    return proto, table


def closed_form_mse(
    preamble: Preamble,
    sigma2: float,
    config: SystemConfig,
    mode: str = "auto",
    proto: PrototypeFilter | None = None,
    table: AmbiguityTable | None = None,
    channel=None,
) -> MsePrediction:
    """Noise MSE of the LS estimator, plus the expected floor if any.

    mode follows estimate_from_pilots ("raw" | "projected" | "auto").
    The floor term needs a channel realization; without one it is zero,
    which is exact for every scheme except the sparse-plus-data OQAM
    scenarios.
    """
    if mode == "auto":
        mode = "raw" if preamble.n_pilots == config.M else "projected"
    M, L_h, N = config.M, config.L_h, preamble.n_pilots
    inv2 = np.sum(1.0 / np.abs(preamble.divisors) ** 2)

    if preamble.system == "cpofdm":
        if mode == "raw":
            pred = MsePrediction(noise=float(sigma2 * inv2), floor=0.0, tag="per-tone")
        else:
            pred = MsePrediction(
                noise=float(sigma2 * M * L_h / N ** 2 * inv2), floor=0.0,
                tag="interp-ls",
            )
        return pred

    proto, table = _oqam_context(config, proto, table)
    if mode == "raw":
        if N != M:
            raise ValueError("raw mode needs a full-grid preamble")
        noise = float(sigma2 * inv2)
        tag = "per-tone"
    elif N == M:
        # exact projected noise through the correlated AFB outputs:
        # (sigma^2/M) tr(D^H G0 D B) with D = diag(1/c), G0 = F F^H
        B = afb_noise_cov(proto, config, table=table)
        d = 1.0 / preamble.divisors
        F = dft_submatrix(M, np.arange(M), np.arange(L_h))
        G0 = F @ F.conj().T
        noise = float(np.real(
            np.sum(np.conj(d)[:, None] * G0 * d[None, :] * B.T)
        ) * sigma2 / M)
        tag = "projected-exact"
    else:
        # pilots >= 2 subcarriers apart: AFB noise uncorrelated across them
        noise = float(sigma2 * M * L_h / N ** 2 * inv2)
        tag = "interp-ls"
    floor = 0.0
    if channel is not None and preamble.family == "sparse_data":
        floor = expected_error_floor(preamble, channel, config, table=table, mode=mode)
    return MsePrediction(noise=noise, floor=floor, tag=tag)


def _flat_grid_outputs(grid, H, table: AmbiguityTable, points) -> np.ndarray:
    """Noiseless AFB outputs under the per-subcarrier-flat channel model.

    Every pulse (m, n) arrives scaled by H_m; the output at pilot point
    (p, 0) sums the exact inner products of the whole grid.
    """
    x = grid.x
    out = np.zeros(len(points), dtype=complex)
    for i, (p, q) in enumerate(points):
        acc = 0.0 + 0.0j
        for n in range(grid.n_cols):
            col = H * x[:, n]
            if not col.any():
                continue
            acc += np.dot(table.row(int(p), n - int(q), pilot_col=int(q)), col)
        out[i] = acc
    return out


def error_floor(
    preamble: Preamble,
    channel,
    config: SystemConfig,
    proto: PrototypeFilter | None = None,
    table: AmbiguityTable | None = None,
    mode: str = "auto",
) -> float:
    """Zero-noise residual CFR MSE of this preamble instance.

    CP-OFDM preambles have none (the demodulated model is exact inside
    the prefix).  OQAM floors come from the interference the divisor does
    not account for, propagated through the estimator.
    """
    if mode == "auto":
        mode = "raw" if preamble.n_pilots == config.M else "projected"
    if preamble.system == "cpofdm":
        return 0.0
    proto, table = _oqam_context(config, proto, table)
    M, L_h, N = config.M, config.L_h, preamble.n_pilots
    h = channel.h if hasattr(channel, "h") else np.asarray(channel)
    H = cfr_from_cir(h, M)
    idx = preamble.pilot_idx
    pts = [(int(p), 0) for p in idx]
    y0 = _flat_grid_outputs(preamble.grid, H, table, pts)
    w1 = y0 / preamble.divisors - H[idx]
    if mode == "raw":
        return float(np.sum(np.abs(w1) ** 2))
    F = dft_submatrix(M, idx, np.arange(L_h))
    h_w = F.conj().T @ w1 / N
    return float(M * np.sum(np.abs(h_w) ** 2))


def _first_order_member(dm_mod: int, dn: int, M: int) -> bool:
    return dn in (0, 1) and dm_mod in (1, M - 1)


def expected_error_floor(
    preamble: Preamble,
    channel,
    config: SystemConfig,
    proto: PrototypeFilter | None = None,
    table: AmbiguityTable | None = None,
    mode: str = "projected",
) -> float:
    """Floor of error_floor averaged exactly over the random data.

    The zero-noise pilot distortion is linear in the data symbols: each
    symbol contributes through its own pulse and, in the helped
    scenarios, through the help-pilot amplitudes it induces.  With
    independent zero-mean data of energy e_d per symbol the expected
    residual is e_d times a squared Frobenius norm of that linear map.
    """
    if preamble.system == "cpofdm" or not preamble.data_positions:
        return 0.0
    if mode == "raw":
        raise ValueError("sparse-plus-data preambles are estimated projected")
    proto, table = _oqam_context(config, proto, table)
    M, L_h = config.M, config.L_h
    h = channel.h if hasattr(channel, "h") else np.asarray(channel)
    H = cfr_from_cir(h, M)
    idx = preamble.pilot_idx
    N = len(idx)
    a = np.abs(preamble.divisors)
    e_d = preamble.pilot_energy / 2.0
    rho = table.rho
    helped = preamble.helper_map or {}
    n_cols = preamble.grid.n_cols
    W = {(int(p), n): table.row(int(p), n, pilot_col=0)
         for p in idx for n in range(n_cols)}
    # tones adjacent to a helped pilot act through its help pilot too
    # (the help amplitude is linear in the data, computed channel-blind
    # at the transmitter, so it arrives faded by the pilot tone's gain)
    near_helped: dict[int, list[int]] = {}
    for P in helped:
        near_helped.setdefault((P + 1) % M, []).append(int(P))
        near_helped.setdefault((P - 1) % M, []).append(int(P))

    # T[i, j]: distortion at pilot i per unit data symbol at position j
    T = np.zeros((N, len(preamble.data_positions)), dtype=complex)
    for j, (m, n) in enumerate(preamble.data_positions):
        phase = np.exp(1j * preamble.grid.phi[m, n])
        for i, p in enumerate(idx):
            acc = H[m] * W[(int(p), n)][m]
            for P in near_helped.get(m, ()):
                acc -= W[(P, n)][m] / rho * H[P] * W[(int(p), 1)][P]
            T[i, j] = phase * acc / a[i]
    F = dft_submatrix(M, idx, np.arange(L_h))
    A = F.conj().T @ T / N
    return float(e_d * M * np.sum(np.abs(A) ** 2))


def afb_noise_cov(
    proto: PrototypeFilter,
    config: SystemConfig,
    table: AmbiguityTable | None = None,
) -> np.ndarray:
    """Covariance of the AFB outputs of one column under unit-variance AWGN.

    B[p, q] = <g'_{q,n}, g'_{p,n}> = A(q - p, 0): unit diagonal, +/-beta
    on the first off-diagonals with the sign flipped at the wrap corners,
    and exactly zero beyond for the frequency-sampling prototypes.
    """
    if table is None:
        table = ambiguity(proto)
    M = config.M
    return np.vstack([table.row(p, 0) for p in range(M)])


# ---------------------------------------------------------------------------
# optimality verification suite


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    bound: float
    detail: str


@dataclass
class OptimalityReport:
    config: SystemConfig
    trials: int
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [
            f"optimality suite  M={self.config.M} L_h={self.config.L_h} "
            f"K={self.config.K}  trials={self.trials}  seed={self.seed}"
        ]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"[{mark}] {c.name:<28s} {c.detail}")
        n_ok = sum(c.passed for c in self.checks)
        lines.append(
            f"overall: {'PASS' if self.passed else 'FAIL'} "
            f"({n_ok}/{len(self.checks)})"
        )
        return "\n".join(lines)


def _cp_energy_batch(X: np.ndarray, nu: int) -> np.ndarray:
    """Prefix energies of a batch of frequency rows (shape T x M)."""
    M = X.shape[1]
    u = np.fft.ifft(X, axis=1)
    return M * np.sum(np.abs(u[:, M - nu:]) ** 2, axis=1)


def verify_optimality(
    config: SystemConfig,
    trials: int = 10000,
    seed: int = 1,
    sigma2: float = 1.0,
    proto: PrototypeFilter | None = None,
    table: AmbiguityTable | None = None,
) -> OptimalityReport:
    """Numerical verification of the optimality claims.

    (a) every random feasible sparse CP-OFDM preamble at training energy
        E has LS MSE >= L_h*sigma^2/E, with equality for the equal comb;
    (b) every random equal-phase full OQAM column with ||x||^2 = E has
        raw pseudo-pilot MSE >= M*sigma^2/(E*(1+2*beta)^2), approached
        by the equal column;
    (c) guarding or helping a sparse-plus-data layout can only lower its
        floor, by the stated large factors;
    (d) random equal-modulus preambles away from the two-impulse family
        never reach zero prefix energy, while the family always does and
        always meets the genie MSE.

    Plus stationarity/curvature of (a) and (b) at their optimizers and
    the exact sparse OQAM energy identity.
    """
    rng = np.random.default_rng(seed)
    M, L_h, nu, E = config.M, config.L_h, config.nu, config.E
    proto, table = _oqam_context(config, proto, table)
    beta = table.beta
    report = OptimalityReport(config=config, trials=trials, seed=seed)
    add = report.checks.append

    # (a) sparse CP-OFDM lower bound, random values and pilot counts
    bound_a = L_h * sigma2 / E
    worst_a = np.inf
    for N in (L_h, 2 * L_h, min(4 * L_h, M)):
        n_t = max(1, trials // 3)
        vals = rng.standard_normal((n_t, N)) + 1j * rng.standard_normal((n_t, N))
        vals *= (0.2 + rng.random((n_t, N)))  # spread the moduli
        i_0 = int(rng.integers(0, M // N))
        X = np.zeros((n_t, M), dtype=complex)
        X[:, i_0 + (M // N) * np.arange(N)] = vals
        e_train = np.sum(np.abs(vals) ** 2, axis=1) + _cp_energy_batch(X, nu) / M
        vals *= np.sqrt(E / e_train)[:, None]
        mse = (L_h * sigma2 / N ** 2) * np.sum(1.0 / np.abs(vals) ** 2, axis=1)
        worst_a = min(worst_a, float(np.min(mse / bound_a)))
    add(CheckResult(
        "qam_sparse_lower_bound", worst_a >= 1.0 - 1e-9, worst_a, 1.0,
        f"min mse/bound = {worst_a:.9f} (>= 1)"))

    # equality case: the equal comb reaches the bound exactly
    eq = np.full(L_h, np.sqrt(E / L_h))
    mse_eq = (L_h * sigma2 / L_h ** 2) * np.sum(1.0 / eq ** 2)
    dev = abs(mse_eq / bound_a - 1.0)
    add(CheckResult(
        "qam_sparse_equality", dev < 1e-12, dev, 1e-12,
        f"equal comb deviation {dev:.2e} (< 1e-12)"))

    # stationarity and curvature of (a) at the equal comb, on the sphere
    x0 = eq.astype(complex)
    f = lambda v: np.sum(1.0 / np.abs(v) ** 2)
    g_num = np.zeros(L_h)
    eps = 1e-6
    for i in range(L_h):
        d = np.zeros(L_h); d[i] = eps
        g_num[i] = (f(x0 + d) - f(x0 - d)) / (2 * eps)
    tangent = g_num - (g_num @ x0.real) * x0.real / (E)
    curv_ok = True
    for _ in range(32):
        d = rng.standard_normal(L_h)
        d -= (d @ x0.real) * x0.real / E
        d /= np.linalg.norm(d)
        second = f(x0 + eps * d) + f(x0 - eps * d) - 2 * f(x0)
        if second < -1e-9 * f(x0) * eps ** 2:
            curv_ok = False
    grad_norm = float(np.linalg.norm(tangent) / np.linalg.norm(g_num))
    add(CheckResult(
        "qam_sparse_stationarity", grad_norm < 1e-6 and curv_ok, grad_norm, 1e-6,
        f"projected gradient {grad_norm:.2e} (< 1e-6), curvature >= 0: {curv_ok}"))

    # (b) full OQAM raw lower bound under the SFB-input energy constraint.
    # sum 1/c_p^2 >= M^2 / sum c_p^2 and ||J a||^2 < (1+2*beta)^2 ||a||^2
    # (the interference matrix J has negacyclic eigenvalues
    # 1 + 2*beta*cos(pi*(2k+1)/M), all strictly below 1 + 2*beta).
    bound_b = M ** 2 * sigma2 / (E * (1.0 + 2.0 * beta) ** 2)
    n_t = max(1, trials)
    A_rand = np.abs(rng.standard_normal((n_t, M))) + 0.05
    A_rand *= np.sqrt(E / np.sum(A_rand ** 2, axis=1))[:, None]
    C = A_rand + beta * (np.roll(A_rand, 1, axis=1) + np.roll(A_rand, -1, axis=1))
    C[:, 0] -= 2 * beta * A_rand[:, -1]
    C[:, -1] -= 2 * beta * A_rand[:, 0]
    mse_b = sigma2 * np.sum(1.0 / C ** 2, axis=1)
    worst_b = float(np.min(mse_b / bound_b))
    a_eq = np.sqrt(E / M)
    mse_beq = sigma2 * ((M - 2) / (a_eq * (1 + 2 * beta)) ** 2 + 2 / a_eq ** 2)
    gap_eq = mse_beq / bound_b - 1.0
    add(CheckResult(
        "oqam_full_lower_bound", worst_b >= 1.0 - 1e-9 and mse_beq <= np.min(mse_b),
        worst_b, 1.0,
        f"min mse/bound = {worst_b:.6f} (>= 1), equal column within "
        f"{gap_eq:.2%} of the asymptotic bound"))

    # gradient of (b) at the equal column: matches the exact edge terms
    def f_b(a_vec):
        c = a_vec + beta * (np.roll(a_vec, 1) + np.roll(a_vec, -1))
        c[0] -= 2 * beta * a_vec[-1]
        c[-1] -= 2 * beta * a_vec[0]
        return np.sum(1.0 / c ** 2)

    a0 = np.full(M, a_eq)
    c0 = a0 + 2 * beta * a0
    c0 = c0.copy(); c0[0] = a_eq; c0[-1] = a_eq
    # analytic gradient: d f / d a_q = -2 sum_p c_p^-3 dc_p/da_q
    J = np.zeros((M, M))
    J[np.arange(M), np.arange(M)] = 1.0
    J[np.arange(M), (np.arange(M) + 1) % M] += beta
    J[np.arange(M), (np.arange(M) - 1) % M] += beta
    J[0, M - 1] -= 2 * beta
    J[M - 1, 0] -= 2 * beta
    g_ana = -2.0 * (J.T @ (1.0 / c0 ** 3))
    g_chk = np.zeros(4)
    for t, i in enumerate((0, 1, M // 2, M - 1)):
        d = np.zeros(M); d[i] = 1e-7
        g_chk[t] = (f_b(a0 + d) - f_b(a0 - d)) / 2e-7 - g_ana[i]
    tang = g_ana - (g_ana @ a0) * a0 / E
    # tangent component comes only from the two edge rows
    edge_scale = float(np.linalg.norm(tang) * a_eq ** 3)
    add(CheckResult(
        "oqam_full_stationarity",
        float(np.max(np.abs(g_chk))) < 1e-4 * float(np.max(np.abs(g_ana))),
        float(np.max(np.abs(g_chk))), 0.0,
        f"numeric gradient matches analytic (dev {np.max(np.abs(g_chk)):.2e}); "
        f"tangent residual {edge_scale:.3f}/a^3 is the edge effect"))

    # (c) floor ordering of the sparse-plus-data scenarios
    ch = gen_veh_a(np.random.SeedSequence([seed, 7]), config)
    floors = {}
    for sc in ("oqam-1a", "oqam-1b", "oqam-2", "oqam-3"):
        p = make_sparse_data("oqam", sc, E, np.random.SeedSequence([seed, 11]),
                             config, proto=proto, table=table)
        floors[sc] = expected_error_floor(p, ch, config, proto=proto, table=table)
    ratio_guard = floors["oqam-1b"] / floors["oqam-1a"]
    ratio_help = max(floors["oqam-2"], floors["oqam-3"]) / floors["oqam-1a"]
    # help pilots are solved channel-blind, so a residual proportional to
    # the channel variation across the neighborhood remains; scenario 3
    # adds data positions to scenario 2, so its floor can only be larger
    ordered = floors["oqam-2"] <= floors["oqam-3"] * (1 + 1e-9)
    add(CheckResult(
        "scenario_floor_ordering",
        ratio_guard < 1e-6 and ratio_help < 0.2 and ordered,
        ratio_guard, 1e-6,
        f"guarded/unguarded floor = {ratio_guard:.2e} (< 1e-6), "
        f"helped/unguarded = {ratio_help:.2e} (< 0.2), "
        f"floor(2) <= floor(3): {ordered}"))

    # (d) two-impulse family: uniqueness searched, membership verified
    n_t = max(1, trials)
    theta = rng.uniform(0, 2 * np.pi, size=(n_t, M))
    X = np.sqrt(E / M) * np.exp(1j * theta)
    cps = _cp_energy_batch(X, nu) / M
    min_cp = float(np.min(cps) / E)
    ks = rng.integers(0, M - nu - M // 2, size=64)
    gammas = rng.uniform(0.05, 0.95, size=64)
    thetas = rng.uniform(0, 2 * np.pi, size=64)
    fam_ok = True
    fam_worst = 0.0
    for k, g, th in zip(ks, gammas, thetas):
        p = make_full_equipower_qam(int(k), int(k) + M // 2, float(g), float(th),
                                    E, config)
        mods = np.abs(p.x) ** 2
        dev_mod = float(np.max(np.abs(mods - E / M)) / (E / M))
        mse_t = (L_h * sigma2 / M ** 2) * np.sum(1.0 / mods)
        dev_mse = abs(mse_t / bound_a - 1.0)
        cp_rel = (p.E_train - E) / E
        fam_worst = max(fam_worst, dev_mod, dev_mse, abs(cp_rel))
        if dev_mod > 1e-12 or dev_mse > 1e-12 or abs(cp_rel) > 1e-12:
            fam_ok = False
    add(CheckResult(
        "equipower_family_unique",
        fam_ok and min_cp > 1e-6,
        min_cp, 1e-6,
        f"family deviations <= {fam_worst:.2e} (<= 1e-12); random equal-modulus "
        f"prefix energy never below {min_cp:.2e}*E over {n_t} trials"))

    # PAPR: any proper two-impulse split beats the single-impulse column
    p_half = make_full_equipower_qam(0, M // 2, np.sqrt(0.5), 0.0, E, config)
    p_flat = make_full_equal("cpofdm", E, "antenna", config)
    pr_two = papr(modulate(p_half.x, config).useful)
    pr_one = papr(modulate(p_flat.x, config).useful)
    add(CheckResult(
        "equipower_papr", pr_two < pr_one - 1e-9, pr_two, pr_one,
        f"two-impulse PAPR {pr_two:.1f} < equal-value column PAPR {pr_one:.1f}"))

    # sparse OQAM energy identity: isolated pulses add exactly
    p_sp = make_sparse_equal("oqam", L_h, 0, E, config, proto=proto, table=table)
    e_meas = antenna_energy(p_sp, config, proto=proto)
    dev_e = abs(e_meas - E) / E
    add(CheckResult(
        "oqam_sparse_energy_exact", dev_e < 1e-12, dev_e, 1e-12,
        f"synthesized/declared energy deviation {dev_e:.2e} (< 1e-12)"))

    return report

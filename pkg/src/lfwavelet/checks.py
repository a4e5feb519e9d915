"""The characterization battery for tight frames and orthonormal wavelets.

Every check evaluates an exact finite sum on a finite set of cells and
reports the largest deviation from its target together with the cell
where it occurs (lowest index on ties).  Fundamental regions:

* orthonormality: uniform cells of O fine enough that all dilates in
  the scale range are looked up at or below the family's constancy
  scale; translates beyond the support radius give zero terms.
* Calderon sum: annular cells of O* and P \\ P^2.  The sum is invariant
  under xi -> P^-1 xi, so one annulus covers K \\ {0}; the second annulus
  confirms the periodicity cellwise.
* t_s vanishing: all cells of P^-M O.  Outside that ball every term has
  a factor psi^(P^-j xi) with j >= 0 and |xi| > q^M, which is zero; for
  s >= q^M the points xi and xi + u(s) cannot both lie in the ball.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .cells import (
    CellSet,
    annular_cells,
    dilation_sum,
    member_values,
    native_rel,
    q_digit_count,
    t_sum,
    uniform_cells,
)
from .errors import DomainError
from .functions import WaveletFamily

PASS_TOL = 1e-9
FAIL_TOL = 1e-6

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


def classify_residual(residual: float, pass_tol: float = PASS_TOL, fail_tol: float = FAIL_TOL) -> str:
    if residual < pass_tol:
        return PASS
    if residual >= fail_tol:
        return FAIL
    return INCONCLUSIVE


@dataclass
class CheckRecord:
    name: str
    max_residual: float
    status: str
    worst: dict = field(default_factory=dict)
    truncation: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out


def _worst(residuals: np.ndarray) -> int:
    # argmax returns the first maximum, which is the lowest cell index
    return int(np.argmax(residuals)) if residuals.size else 0


# --- t_s --------------------------------------------------------------------------------


def t_function(fam: WaveletFamily, s: int, cells: CellSet) -> np.ndarray:
    """t_s on each cell; s must not be a multiple of q."""
    if s <= 0 or s % fam.q == 0:
        raise DomainError(f"t_s is defined for s in N0 \\ qN0, got s = {s}")
    return t_sum(fam, cells, s)


def ts_region(fam: WaveletFamily) -> CellSet:
    """All cells of P^-M O at the resolution where t_s is constant on cells."""
    M, N = fam.window.M, fam.window.N
    return uniform_cells(fam.params, max(N, N + M - 1), radius=M)


# --- orthonormality ---------------------------------------------------------------------------


def default_jmax(fam: WaveletFamily) -> int:
    """Largest scale gap at which psi^l and a dilate of psi^m can overlap."""
    return max(0, fam.window.M + fam.require_certificate() - 1)


def orthonormality_sums(fam: WaveletFamily, j: int, res: int) -> tuple[CellSet, np.ndarray]:
    """F[l, m] = sum_k psi^l(xi + u(k)) conj(psi^m(P^-j (xi + u(k)))) on uniform cells of O."""
    cells = uniform_cells(fam.params, res)
    L = fam.size
    acc = np.zeros((L, L, len(cells)), dtype=complex)
    for k in range(fam.q**fam.window.M):
        eta = cells.shift(k)
        a = member_values(fam, eta)
        b = member_values(fam, eta.dilate(j))
        acc += a[:, None, :] * np.conj(b[None, :, :])
    return cells, acc


def check_orthonormality(fam: WaveletFamily, Jmax: int | None = None, res: int | None = None) -> CheckRecord:
    fam.require_certificate()
    Jmax = default_jmax(fam) if Jmax is None else Jmax
    res = fam.window.N + Jmax if res is None else res
    L = fam.size
    eye = np.eye(L)
    worst_val, worst_info = -1.0, {}
    for j in range(Jmax + 1):
        cells, F = orthonormality_sums(fam, j, res)
        target = eye[:, :, None] if j == 0 else 0.0
        dev = np.abs(F - target)
        flat = dev.reshape(-1, len(cells))
        per_cell = flat.max(axis=0)
        i = _worst(per_cell)
        if per_cell[i] > worst_val:
            lm = int(np.argmax(flat[:, i]))
            worst_val = float(per_cell[i])
            worst_info = {"j": j, "l": lm // L + 1, "m": lm % L + 1, **cells.describe(i)}
    return CheckRecord(
        "orthonormality",
        worst_val,
        classify_residual(worst_val),
        worst_info,
        {"Jmax": Jmax, "res": res},
    )


# --- Calderon sum ----------------------------------------------------------------------------


def calderon_cells(fam: WaveletFamily, rel: int | None = None) -> CellSet:
    return annular_cells(fam.params, native_rel(fam) if rel is None else rel, 0, 1)


def check_calderon(fam: WaveletFamily, rel: int | None = None) -> CheckRecord:
    cells = calderon_cells(fam, rel)
    vals = dilation_sum(fam, cells)
    dev = np.abs(vals - 1.0)
    i = _worst(dev)
    first = cells.res == cells.res.min()
    period = float(np.max(np.abs(vals[first] - vals[~first]), initial=0.0))
    return CheckRecord(
        "calderon",
        float(dev[i]),
        classify_residual(float(dev[i])),
        cells.describe(i),
        {"annuli": [0, 1], "rel": int(cells.res.min())},
        {"periodicity_residual": period},
    )


# --- t_s vanishing ---------------------------------------------------------------------------


def check_ts_vanishing(fam: WaveletFamily, Smax: int | None = None) -> CheckRecord:
    fam.require_certificate()
    Smax = fam.q ** max(fam.window.M, 1) if Smax is None else Smax
    cells = ts_region(fam)
    worst_val, worst_info = 0.0, {}
    for s in range(1, Smax):
        if s % fam.q == 0:
            continue
        mag = np.abs(t_function(fam, s, cells))
        i = _worst(mag)
        if mag[i] > worst_val or not worst_info:
            worst_val = float(mag[i])
            worst_info = {"s": s, **cells.describe(i)}
    return CheckRecord(
        "ts_vanishing",
        worst_val,
        classify_residual(worst_val),
        worst_info,
        {"Smax": Smax, "res": int(cells.res[0]), "radius": fam.window.M},
    )


# --- norm integral ---------------------------------------------------------------------------


def norm_integral(fam: WaveletFamily) -> float:
    """sum_l integral |psi^l|^2 / |xi|, exact cell by cell."""
    fam.require_certificate()
    q, N = fam.q, fam.window.N
    idx = np.arange(fam.window.size(q))
    # |xi| is constant on every cell except the one at 0, which carries no mass
    absxi = np.power(float(q), (q_digit_count(q, idx) - N).astype(float))
    mass = np.sum(np.abs(fam.values) ** 2, axis=0) * fam.window.cell_measure(q)
    live = idx > 0
    return float(np.sum(mass[live] / absxi[live]))


def check_norm_integral(fam: WaveletFamily) -> tuple[float, float]:
    return norm_integral(fam), (fam.q - 1) / fam.q


def member_norms(fam: WaveletFamily) -> np.ndarray:
    """L^2 norms of the members (Parseval: same on both sides)."""
    return np.array([m.norm() for m in fam.members])


# --- verdict ---------------------------------------------------------------------------------


@dataclass
class VerdictReport:
    checks: dict[str, CheckRecord]
    norms: list[float]
    norm_integral: float
    norm_integral_target: float
    flags: dict[str, bool]
    routes: dict[str, bool]
    routes_agree: bool
    bessel_source: str
    statuses: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
            "norms": self.norms,
            "norm_integral": self.norm_integral,
            "norm_integral_target": self.norm_integral_target,
            "flags": self.flags,
            "routes": self.routes,
            "routes_agree": self.routes_agree,
            "bessel_source": self.bessel_source,
            "statuses": self.statuses,
        }


def classify(
    fam: WaveletFamily,
    Jmax: int | None = None,
    Smax: int | None = None,
    pass_tol: float = PASS_TOL,
    fail_tol: float = FAIL_TOL,
    bessel_asserted: bool = False,
) -> VerdictReport:
    """Run every check and derive the tight-frame and orthonormal-basis verdicts.

    Route A: Calderon sum and t_s vanishing (tight frame with constant 1)
    plus unit norms.  Route B: orthonormality equations plus the norm
    integral.  Route B needs the system to be Bessel with constant 1; the
    orthonormality equations supply that, unless the caller asserts it
    (``bessel_asserted``), and the report records which source was used.
    """
    fam.require_certificate()
    ortho = check_orthonormality(fam, Jmax)
    cald = check_calderon(fam)
    ts = check_ts_vanishing(fam, Smax)
    value, target = check_norm_integral(fam)
    norms = member_norms(fam)
    norm_dev = float(np.max(np.abs(norms - 1.0)))
    integral_dev = abs(value - target)

    checks = {"orthonormality": ortho, "calderon": cald, "ts_vanishing": ts}
    checks["norm_integral"] = CheckRecord(
        "norm_integral", integral_dev, classify_residual(integral_dev, pass_tol, fail_tol), {}, {}, {"value": value, "target": target}
    )
    checks["unit_norms"] = CheckRecord(
        "unit_norms", norm_dev, classify_residual(norm_dev, pass_tol, fail_tol), {"l": int(np.argmax(np.abs(norms - 1.0))) + 1}
    )
    for rec in checks.values():
        rec.status = classify_residual(rec.max_residual, pass_tol, fail_tol)

    ok = {k: v.passed for k, v in checks.items()}
    tight = ok["calderon"] and ok["ts_vanishing"]
    route_a = tight and ok["unit_norms"]
    bessel = ok["orthonormality"] or bessel_asserted
    route_b = ok["orthonormality"] and ok["norm_integral"]
    flags = {
        "orthonormal_system": ok["orthonormality"],
        "tight_frame_constant_1": tight,
        "orthonormal_basis": route_a,
    }
    routes = {"calderon_ts_norms": route_a, "orthonormality_norm_integral": route_b}
    if bessel and ok["norm_integral"]:
        # with a Bessel-1 system the norm integral alone forces the Calderon sum
        routes["bessel_norm_integral_implies_calderon"] = ok["calderon"]
    return VerdictReport(
        checks,
        [float(x) for x in norms],
        value,
        target,
        flags,
        routes,
        route_a == route_b,
        "asserted" if bessel_asserted and not ok["orthonormality"] else "orthonormality",
        {k: v.status for k, v in checks.items()},
    )

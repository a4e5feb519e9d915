from itertools import product

import numpy as np
import pytest

from lfwavelet.cells import integer_cover, uniform_cells
from lfwavelet.characters import u_of
from lfwavelet.checks import classify
from lfwavelet.errors import ConsistencyError, ContractError, DomainError
from lfwavelet.families import annulus_control, haar_family, haar_wavelets
from lfwavelet.field import FieldParams, LaurentElem, laurent_add, laurent_mul
from lfwavelet.functions import (
    FREQUENCY,
    POINT,
    TestFunction,
    Window,
    cell_of_point,
    family_from,
    fourier_inverse,
    inner_product,
    integrate,
    transform,
    translate,
)
from lfwavelet.mra import (
    construct_scaling,
    dimension_function,
    dimension_map,
    extract_filters,
    is_mra_wavelet,
    modulation_matrices,
    modulation_matrix,
    nu_check,
    omega_identity_check,
    omega_vectors,
    scaling_checks,
    telescoping_residual,
)

from conftest import random_family

F2 = FieldParams(2)


def haar(params):
    return haar_family(params)[1]


def phase_perturbed_haar(rng, params, N=2):
    members = []
    for m in haar(params).members:
        fine = np.repeat(m.values, params.q**N) * np.exp(2j * np.pi * rng.random(m.values.size * params.q**N))
        members.append(TestFunction(params, FREQUENCY, Window(m.window.M, m.window.N + N), fine))
    return family_from(members)


# --- dimension function -------------------------------------------------------------------------


def literal_dimension(fam, x):
    """sum over l, j >= 1, k of |psi^l(P^-j (x + u(k)))|^2, evaluated pointwise at a Laurent element."""
    params, q = fam.params, fam.q
    M = fam.window.M
    total = 0.0
    for j in range(1, M - x.valuation() * -1 + 8 if not x.is_zero() else M + 8):
        scale = LaurentElem.monomial(params, -j, 1)
        for k in range(q ** max(M - 1, 0) + 1):
            y = laurent_mul(scale, laurent_add(x, u_of(params, k)))
            for m in fam.members:
                cell = cell_of_point(params, m.window, y)
                if cell is not None:
                    total += abs(m.values[cell]) ** 2
    return total


@pytest.mark.parametrize("pc", [(2, 1), (3, 1), (2, 2)])
def test_dimension_examples(pc):
    params = FieldParams(*pc)
    assert np.allclose(dimension_map(haar(params)).values, 1.0)
    dmap = dimension_map(annulus_control(params))
    assert np.allclose(dmap.values, params.q)
    assert dmap.periodicity_residual == 0
    zero = family_from([TestFunction.zeros(params, Window(1, 1), FREQUENCY)])
    assert np.all(dimension_map(zero).values == 0)


def test_dimension_matches_pointwise_oracle(rng):
    cases = [haar(F2), annulus_control(FieldParams(3)), random_family(rng, F2, Window(2, 1), 0), random_family(rng, FieldParams(3), Window(1, 1), 1)]
    for fam in cases:
        cells = integer_cover(fam)
        vals = dimension_function(fam, cells)
        for i in range(len(cells)):
            assert vals[i] == pytest.approx(literal_dimension(fam, cells.point(i)), abs=1e-12)


def test_dimension_additive_over_members(rng):
    fam = random_family(rng, FieldParams(3), Window(1, 1), 0, size=3)
    cells = integer_cover(fam)
    parts = [family_from([m]) for m in fam.members]
    assert np.allclose(dimension_function(fam, cells), sum(dimension_function(p, cells) for p in parts))


def test_dimension_rows_and_rel():
    dmap = dimension_map(haar(F2), rel=3)
    assert set(dmap.cells.res) >= {3}
    rows = dmap.rows()
    assert len(rows) == len(dmap.cells)
    assert all(r["value"] == pytest.approx(1.0) for r in rows)


# --- omega vectors ------------------------------------------------------------------------------


@pytest.mark.parametrize("pc", [(2, 1), (3, 1)])
def test_omega_identity_haar(pc):
    assert omega_identity_check(haar(FieldParams(*pc))).max_residual < 1e-12


def test_omega_identity_phase_perturbed(rng):
    assert omega_identity_check(phase_perturbed_haar(rng, F2)).max_residual < 1e-12


def test_omega_gate():
    with pytest.raises(ContractError):
        omega_identity_check(annulus_control(F2))
    with pytest.raises(ContractError):
        is_mra_wavelet(haar(F2).scaled(0.5))


def test_omega_vector_entries():
    fam = haar(FieldParams(3))
    cells = integer_cover(fam)
    om = omega_vectors(fam, cells, 1)
    for l, i in product(range(fam.size), range(len(cells))):
        for k in range(om.shape[2]):
            y = laurent_mul(LaurentElem.monomial(fam.params, -1, 1), laurent_add(cells.point(i), u_of(fam.params, k)))
            m = fam.members[l]
            cell = cell_of_point(fam.params, m.window, y)
            assert om[l, i, k] == pytest.approx(0 if cell is None else m.values[cell], abs=1e-12)


# --- MRA criterion and recovery ------------------------------------------------------------------


@pytest.mark.parametrize("pc", [(2, 1), (3, 1), (2, 2)])
def test_construct_scaling_haar(pc):
    params = FieldParams(*pc)
    phi, fam = haar_family(params)
    ok, _ = is_mra_wavelet(fam)
    assert ok
    rec = construct_scaling(fam)
    assert rec.ok
    assert rec.phi_hat.norm() == pytest.approx(1.0)
    # the Haar scaling function 1_O has transform 1_O; recovery is unique up to cellwise phase
    expected = transform(phi)
    q, R = params.q, rec.phi_hat.window.N
    assert np.allclose(np.abs(rec.phi_hat.values[: q**R]), np.abs(expected.values[0]))
    assert np.all(rec.phi_hat.values[q**R :] == 0)
    assert all(r["j"] >= 1 and 1 <= r["l"] <= fam.size for r in rec.provenance)


@pytest.mark.parametrize("pc", [(2, 1), (3, 1)])
def test_recovered_translates_orthonormal(pc):
    params = FieldParams(*pc)
    rec = construct_scaling(haar(params))
    phi = fourier_inverse(rec.phi_hat)
    for k in range(params.q**3):
        expected = 1.0 if k == 0 else 0.0
        assert inner_product(phi, translate(phi, k)) == pytest.approx(expected, abs=1e-12)


def test_construct_scaling_deterministic():
    fam = haar(FieldParams(3))
    a, b = construct_scaling(fam), construct_scaling(fam)
    assert np.array_equal(a.phi_hat.values, b.phi_hat.values)
    assert a.provenance == b.provenance


def test_construct_scaling_rejections(rng):
    with pytest.raises(ContractError):
        construct_scaling(annulus_control(F2))
    # a genuine wavelet whose scaling function is not locally constant near 0
    with pytest.raises(ConsistencyError):
        construct_scaling(phase_perturbed_haar(rng, F2))


def test_member_count_warning():
    fam = haar(F2)
    twin = family_from([fam.members[0], fam.members[0]])
    with pytest.warns(UserWarning, match="q - 1"):
        is_mra_wavelet(twin, classify(fam))
    with pytest.raises(ContractError):
        construct_scaling(twin, classify(fam))


# --- scaling-function checks ---------------------------------------------------------------------


def test_scaling_checks_examples():
    one = TestFunction(F2, FREQUENCY, Window(0, 0), [1.0])
    checks = scaling_checks(one)
    assert all(c.passed for c in checks.values())
    assert checks["den"].worst["j_star"] == 0
    half = scaling_checks(one * 2**-0.5)
    assert half["ons"].max_residual == pytest.approx(0.5)
    assert half["den"].max_residual == pytest.approx(1 - 2**-0.5)
    shifted = scaling_checks(TestFunction(F2, FREQUENCY, Window(1, 0), [0.0, 1.0]))
    assert shifted["ons"].passed
    assert not shifted["den"].passed
    with pytest.raises(DomainError):
        scaling_checks(TestFunction(F2, POINT, Window(0, 0), [1.0]))


def test_two_scale_relation_examples():
    # phi^ = 1_{PO}: m0 is 1 on P^2 O, 0 on PO \ P^2 O and undefined on the units,
    # where phi^ vanishes on every translate
    narrow = TestFunction(F2, FREQUENCY, Window(0, 1), [1.0, 0.0])
    checks = scaling_checks(narrow)
    eqn = checks["two_scale"]
    assert eqn.passed
    assert [c["index"] for c in eqn.details["undefined_cells"]] == [2, 3]
    assert np.allclose(eqn.details["m0"], [1, 0, 0, 0])
    assert not checks["ons"].passed


# --- filters, modulation and nu --------------------------------------------------------------------


@pytest.mark.parametrize("pc", [(2, 1), (3, 1), (2, 2)])
def test_modulation_unitary_haar(pc):
    params = FieldParams(*pc)
    fam = haar(params)
    phi_hat = construct_scaling(fam).phi_hat
    filters = extract_filters(phi_hat, fam)
    assert filters.residual < 1e-12
    assert not filters.undefined.any()
    rep = modulation_matrices(phi_hat, fam, filters)
    assert rep.residual < 1e-12
    mat, resid = modulation_matrix(phi_hat, fam, 0)
    assert mat.shape == (params.q, params.q)
    assert resid < 1e-12
    # Haar m_0 = 1_{PO}, so row 0 is m_0(P xi + P u(l2)) = [l2 == 0]
    assert np.allclose(np.abs(mat[0]), np.eye(params.q)[0])


def test_modulation_detects_missing_member():
    params = FieldParams(3)
    fam = haar(params)
    phi_hat = construct_scaling(fam).phi_hat
    m = fam.members
    broken = family_from([m[0], m[1].with_values(np.zeros_like(m[1].values))])
    assert modulation_matrices(phi_hat, broken).residual >= 1 / params.q
    with pytest.raises(ContractError):
        modulation_matrices(phi_hat, family_from([m[0]]))


def test_nu_check_haar():
    fam = haar(F2)
    phi_hat = construct_scaling(fam).phi_hat
    rec = nu_check(phi_hat, fam)
    assert rec.max_residual < 1e-12
    cells = uniform_cells(F2, rec.truncation["res"])
    units = np.array([cells.point(i).valuation() == 0 for i in range(len(cells))])
    nu1 = rec.details["nu_abs2"][1][0]
    assert np.allclose(nu1[units], 1.0)
    assert np.allclose(nu1[~units], 0.0)


@pytest.mark.parametrize("alpha", [2.0, 0.5j])
def test_nu_scaling_law(alpha):
    fam = haar(FieldParams(3))
    phi_hat = construct_scaling(fam).phi_hat
    base = nu_check(phi_hat, fam)
    scaled = nu_check(phi_hat * alpha, fam)
    assert scaled.details["proportionality"] < 1e-12
    for j in base.details["nu_abs2"]:
        assert np.allclose(scaled.details["nu_abs2"][j], base.details["nu_abs2"][j] / abs(alpha) ** 2)
    assert not scaled.passed


def test_telescoping():
    fam = haar(FieldParams(3))
    phi_hat = construct_scaling(fam).phi_hat
    assert telescoping_residual(phi_hat, fam) < 1e-12
    assert telescoping_residual(phi_hat * 2, fam) == pytest.approx(3.0)


# --- built-in families ---------------------------------------------------------------------------


def test_haar_wavelet_values():
    (psi,) = haar_wavelets(F2)
    assert psi.window == Window(0, 1)
    assert np.allclose(psi.values, [1, -1])
    phi, _ = haar_family(F2)
    assert phi.side == POINT and np.array_equal(phi.values, [1.0])


@pytest.mark.parametrize("pc", [(2, 1), (3, 1), (2, 2), (5, 1)])
def test_haar_wavelets_orthonormal(pc):
    params = FieldParams(*pc)
    phi, _ = haar_family(params)
    psis = haar_wavelets(params)
    assert len(psis) == params.q - 1
    for a, b in product(range(len(psis)), repeat=2):
        assert inner_product(psis[a], psis[b]) == pytest.approx(1.0 if a == b else 0.0, abs=1e-12)
    for psi in psis:
        assert integrate(psi) == pytest.approx(0, abs=1e-12)
        assert inner_product(psi, phi) == pytest.approx(0, abs=1e-12)

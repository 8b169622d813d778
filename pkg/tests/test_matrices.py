"""Profiles, matrix assembly and the cell kernels of the limit system."""

import json
import math

import numpy as np
import pytest

from htspectra.matrices import (
    DiagonalLaw,
    EnsembleSpec,
    SigmaProfile,
    alpha_kernel,
    assemble_band_matrix,
    block_embed,
    build_band_matrix,
    build_covariance_matrix,
    covariance_profile,
    equivalent_constant,
    profile_alpha_norm,
)
from htspectra.sampling import RngStreamSpec, StableTailLaw, normalizer_a_N


BAND = SigmaProfile("band", breakpoints=(0.0, 0.25, 0.75, 1.0),
                    values=(1.0, 0.0, 1.0))
PIECE = SigmaProfile("piecewise", breaks=(0.0, 0.5, 1.0),
                     matrix=((1.0, 2.0), (2.0, 3.0)))


def test_profile_validation():
    with pytest.raises(ValueError):
        SigmaProfile("other")
    with pytest.raises(ValueError):
        SigmaProfile("piecewise", breaks=(0.0, 1.0),
                     matrix=((1.0, 2.0), (2.0, 1.0)))
    with pytest.raises(ValueError):
        SigmaProfile("piecewise", breaks=(0.0, 0.5, 1.0),
                     matrix=((1.0, 2.0), (3.0, 1.0)))
    with pytest.raises(ValueError):   # phi not even
        SigmaProfile("band", breakpoints=(0.0, 0.25, 1.0), values=(1.0, 0.0))


def test_evaluate_variants():
    const = SigmaProfile("constant", c=2.5)
    assert const.evaluate(np.array(0.3), np.array(0.8)) == 2.5
    assert PIECE.evaluate(np.array(0.2), np.array(0.7)) == 2.0
    # band profile depends on x - y mod 1 only
    assert BAND.evaluate(np.array(0.1), np.array(0.2)) == \
        BAND.evaluate(np.array(0.6), np.array(0.7))
    assert BAND.evaluate(np.array(0.1), np.array(0.6)) == 0.0


def test_lattice_shape_and_symmetry():
    lat = PIECE.lattice(64)
    assert lat.shape == (64, 64)
    assert np.array_equal(lat, lat.T)


def test_json_round_trip():
    for prof in (SigmaProfile("constant", c=1.5), PIECE, BAND,
                 SigmaProfile("grid", resolution=2,
                              values=((1.0, 2.0), (2.0, 1.0)))):
        again = SigmaProfile.from_json(json.dumps(prof.to_json()))
        assert again == prof
    law = DiagonalLaw(atoms=((-1.0, 0.5), (1.0, 0.5)))
    assert DiagonalLaw.from_json(json.dumps(law.to_json())) == law


def test_diagonal_law_validation():
    with pytest.raises(ValueError):
        DiagonalLaw(atoms=())
    with pytest.raises(ValueError):
        DiagonalLaw(atoms=((0.0, 0.7),))
    with pytest.raises(ValueError):
        DiagonalLaw(atoms=((0.0, -0.5), (1.0, 1.5)))


def test_assemble_symmetry_and_scaling():
    x = np.arange(16.0).reshape(4, 4)
    a = assemble_band_matrix(x, SigmaProfile("constant", c=2.0), a_N=4.0)
    assert np.array_equal(a, a.T)
    # upper triangle of x drives both halves: A_ij = 2 * x_min(i,j),max / 4
    assert a[2, 1] == 2.0 * x[1, 2] / 4.0


def test_assemble_truncation_and_diagonal():
    x = np.array([[0.0, 10.0], [0.0, 1.0]])
    a = assemble_band_matrix(x, SigmaProfile("constant", c=1.0), a_N=1.0,
                             truncate_at=5.0, diagonal=np.array([7.0, 8.0]))
    assert a[0, 1] == 0.0 and a[1, 0] == 0.0     # truncated away
    assert a[0, 0] == 7.0 and a[1, 1] == 8.0 + 1.0


def test_build_band_matrix_reproducible():
    spec = EnsembleSpec(N=32, law=StableTailLaw(1.5),
                        profile=SigmaProfile("constant", c=1.0),
                        seed=RngStreamSpec(9))
    assert np.array_equal(build_band_matrix(spec), build_band_matrix(spec))


def test_truncation_validation():
    law = StableTailLaw(1.5)
    prof = SigmaProfile("constant", c=1.0)
    with pytest.raises(ValueError):
        EnsembleSpec(N=8, law=law, profile=prof, truncation=("fixed_B", -1.0))
    with pytest.raises(ValueError):
        # kappa cap is 1/(2(2-alpha)) = 1 for alpha=1.5
        EnsembleSpec(N=8, law=law, profile=prof,
                     truncation=("polynomial_kappa", 1.5))
    EnsembleSpec(N=8, law=law, profile=prof,
                 truncation=("polynomial_kappa", 0.2))


def test_covariance_matrix_rank_and_psd():
    law = StableTailLaw(1.2)
    w = build_covariance_matrix(law, 20, 8, RngStreamSpec(4))
    assert w.shape == (20, 20)
    ev = np.linalg.eigvalsh(w)
    assert np.all(ev > -1e-10)
    assert np.sum(np.abs(ev) < 1e-10 * np.max(ev)) == 12   # N - M zeros


def test_block_embed_squares_to_covariance():
    rng = RngStreamSpec(2).generator()
    x = rng.standard_normal((5, 3))
    law = StableTailLaw(1.5)
    a = normalizer_a_N(law, 8)
    b = block_embed(x, 1.0 / a)
    sq = b @ b
    w = build_covariance_matrix(law, 5, 3, RngStreamSpec(0), entries=x)
    assert np.allclose(sq[:5, :5], w)
    assert np.allclose(sq[:5, 5:], 0.0)


def riemann_alpha_norm(profile, alpha, n=4000):
    """Independent Riemann-sum route to sup_x int |sigma(x,v)|^alpha dv."""
    t = (np.arange(n) + 0.5) / n
    lat = np.abs(profile.evaluate(t[:, None], t[None, :])) ** alpha
    return float(np.max(lat.mean(axis=1)))


@pytest.mark.parametrize("profile", [SigmaProfile("constant", c=1.3),
                                     PIECE, BAND])
def test_alpha_norm_matches_riemann_oracle(profile):
    k, _ = profile_alpha_norm(profile, 1.5)
    assert abs(k - riemann_alpha_norm(profile, 1.5)) < 1e-3


def test_band_kernel_rows_sum_exactly():
    """Every row of the band kernel integrates to int |phi|^alpha, for any
    cell count -- this is what makes the constant solution exact."""
    for alpha in (0.8, 1.5):
        target = 0.5 ** 1  # |phi| in {0,1} so int |phi|^alpha = 0.5
        for cells in (3, 6, 11):
            w, k = alpha_kernel(BAND, alpha, cells=cells)
            rows = k @ w
            assert np.allclose(rows, target, atol=1e-12)


def test_alpha_kernel_piecewise_passthrough():
    w, k = alpha_kernel(PIECE, 1.5)
    assert np.allclose(w, [0.5, 0.5])
    assert np.allclose(k, np.abs(np.array(PIECE.matrix)) ** 1.5)


def test_equivalent_constant_value():
    sig = equivalent_constant(BAND, 1.5)
    assert sig.variant == "constant"
    assert abs(sig.c - 0.5 ** (1.0 / 1.5)) < 1e-15
    with pytest.raises(ValueError):
        equivalent_constant(PIECE, 1.5)


def test_covariance_profile_shape():
    prof = covariance_profile(0.5)
    b, m, w = prof.cells()
    assert np.allclose(b, [0.0, 2.0 / 3.0, 1.0])
    assert np.allclose(m, [[0.0, 1.0], [1.0, 0.0]])
    # tail integral (alpha/2) * 2 gamma / (1+gamma)^2 via the cells
    alpha = 1.0
    integral = float(w @ (np.abs(m) ** alpha) @ w)
    assert abs(integral - 2.0 * 0.5 / 1.5**2) < 1e-14

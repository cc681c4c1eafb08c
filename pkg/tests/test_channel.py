import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isac_hbf import SystemConfig, UlaGeometry, draw_channel, steering_matrix, ula_response
from isac_hbf.channel import channel_from_paths, path_loss_db
from isac_hbf.errors import ConfigError, DomainError


def test_broadside_cos_convention_is_all_equal():
    a = ula_response(UlaGeometry(4, 0.5, "cos"), 90.0)
    np.testing.assert_allclose(a, 0.5 * np.ones(4), atol=1e-15)


def test_endfire_cos_convention_alternates():
    a = ula_response(UlaGeometry(2, 0.5, "cos"), 0.0)
    np.testing.assert_allclose(a, np.array([1, -1]) / np.sqrt(2), atol=1e-15)


def test_sin_convention_puts_broadside_at_zero():
    np.testing.assert_allclose(ula_response(UlaGeometry(4), 0.0), 0.5 * np.ones(4), atol=1e-15)
    np.testing.assert_allclose(ula_response(UlaGeometry(2), 90.0), np.array([1, -1]) / np.sqrt(2), atol=1e-15)


@given(n=st.integers(1, 128), angle=st.floats(-90, 90), conv=st.sampled_from(["sin", "cos"]))
@settings(max_examples=60, deadline=None)
def test_response_has_unit_norm(n, angle, conv):
    assert abs(np.linalg.norm(ula_response(UlaGeometry(n, 0.5, conv), angle)) - 1.0) <= 1e-12


def test_zero_elements_rejected():
    with pytest.raises(DomainError):
        UlaGeometry(0)


def test_out_of_range_angle_is_logged(caplog):
    ula_response(UlaGeometry(4), 120.0)
    assert "outside" in caplog.text


def test_responses_decorrelate_away_from_endfire():
    g = UlaGeometry(64)
    theta = np.arange(-75.0, 66.0, 1.0)
    corr = np.abs(np.sum(steering_matrix(g, theta).conj() * steering_matrix(g, theta + 10.0), axis=0))
    assert corr.max() < 0.25


@pytest.mark.parametrize("d, shadow, expected", [(1, 0, 61.4), (100, 0, 101.4), (10, 2.0, 83.4)])
def test_path_loss_values(d, shadow, expected):
    assert path_loss_db(d, shadow) == pytest.approx(expected, abs=1e-12)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(DomainError):
        path_loss_db(0.0)


def test_draw_is_deterministic():
    cfg = SystemConfig(n_tx=16, n_rx=4)
    a = draw_channel(cfg, 0, np.random.default_rng(7))
    b = draw_channel(cfg, 0, np.random.default_rng(7))
    assert np.array_equal(a.matrix, b.matrix)


def test_channel_rebuilds_from_paths_and_svd_is_consistent():
    cfg = SystemConfig(n_tx=32, n_rx=8)
    ch = draw_channel(cfg, 1, np.random.default_rng(3))
    H = channel_from_paths(ch.paths, 8, 32)
    scale = np.linalg.norm(ch.matrix)
    assert np.linalg.norm(H - ch.matrix) <= 1e-10 * scale
    assert np.allclose(ch.U.conj().T @ ch.U, np.eye(8), atol=1e-10)
    assert np.allclose(ch.V.conj().T @ ch.V, np.eye(32), atol=1e-10)
    S = np.zeros((8, 32))
    S[:8, :8] = np.diag(ch.singular_values)
    assert np.linalg.norm(ch.U @ S @ ch.V.conj().T - ch.matrix) <= 1e-8 * scale
    assert np.all(np.diff(ch.singular_values) <= 0)


def test_single_path_channel_has_rank_one():
    cfg = SystemConfig(n_tx=16, n_rx=4, n_paths=1)
    s = draw_channel(cfg, 0, np.random.default_rng(1)).singular_values
    assert s[1] <= 1e-10 * s[0]


def test_gain_variance_matches_array_size():
    cfg = SystemConfig()
    rng = np.random.default_rng(11)
    ratios = []
    for _ in range(500):
        ch = draw_channel(cfg, 0, rng)
        pl = path_loss_db(ch.distance_m, ch.shadowing_db)
        ratios.append(np.linalg.norm(ch.matrix) ** 2 / 10 ** (-0.1 * pl))
    assert np.mean(ratios) == pytest.approx(cfg.n_rx * cfg.n_tx, rel=0.10)


def test_departure_angles_cluster_on_user_direction():
    cfg = SystemConfig(n_tx=16, n_rx=4, n_paths=200)
    ch = draw_channel(cfg, 2, np.random.default_rng(5))
    aod = np.array([p.aod_deg for p in ch.paths])
    assert abs(np.median(aod) - 60.0) < 3.0
    assert aod.min() >= -90 and aod.max() <= 90


def test_zero_paths_is_a_config_error():
    with pytest.raises(ConfigError):
        draw_channel(SystemConfig(n_paths=0), 0, np.random.default_rng(0))

"""Unit tests for configuration module."""

import pytest

from anisotropic_tl.config import Config
from anisotropic_tl.exceptions import ConfigError, NotExpansiveError


class TestConfig:
    """Tests for Config custom logic."""

    def test_defaults_validate(self):
        """Test the default configuration has no errors."""
        assert Config().validate() == []

    def test_environment_overrides(self, monkeypatch):
        """Test ATL_* variables feed the field defaults."""
        monkeypatch.setenv("ATL_N_PER_AXIS", "128")
        monkeypatch.setenv("ATL_SEED", "42")
        monkeypatch.setenv("ATL_THETA", "0.8")
        monkeypatch.setenv("ATL_WORKERS", "4")

        config = Config()

        assert config.n_per_axis == 128
        assert config.seed == 42
        assert config.theta == 0.8
        assert config.workers == 4

    def test_validate_reports_every_problem(self):
        """Test validate collects one message per invalid field."""
        config = Config()
        config.n_per_axis = 100
        config.theta = 1.5
        config.margin = 0.0
        config.slope_tol = -1.0
        config.workers = 0
        config.plateau_inner = 3.0

        errors = config.validate()

        assert "n_per_axis must be a power of two >= 64, got 100" in errors
        assert "theta must lie in (0, 1), got 1.5" in errors
        assert "margin must lie in (0, 1), got 0.0" in errors
        assert "slope_tol must be positive, got -1.0" in errors
        assert "workers must be at least 1, got 0" in errors
        assert any(e.startswith("profile parameters must be strictly increasing") for e in errors)

    def test_validate_non_square_matrix(self):
        """Test ragged configured matrices are reported."""
        config = Config()
        config.matrices = {"bad": [[2.0, 0.0], [0.0]]}

        assert "matrix 'bad' is not square" in config.validate()

    def test_from_file(self, tmp_path):
        """Test a TOML file overlays fields and named matrices."""
        path = tmp_path / "atl.toml"
        path.write_text('depth = 12\nseed = 3\n\n[matrices]\njordan = [[2.0, 1.0], [0.0, 2.0]]\n')

        config = Config.from_file(path)

        assert config.depth == 12
        assert config.seed == 3
        assert config.matrix("jordan").det_abs == pytest.approx(4.0)

    def test_from_file_unknown_key(self, tmp_path):
        """Test unknown keys raise ConfigError naming them."""
        path = tmp_path / "atl.toml"
        path.write_text("doublings = 3\n")

        with pytest.raises(ConfigError, match="doublings"):
            Config.from_file(path)

    def test_from_file_missing(self, tmp_path):
        """Test a missing file raises ConfigError."""
        with pytest.raises(ConfigError, match="not found"):
            Config.from_file(tmp_path / "absent.toml")

    def test_from_file_invalid_toml(self, tmp_path):
        """Test malformed TOML raises ConfigError."""
        path = tmp_path / "atl.toml"
        path.write_text("depth = = 3\n")

        with pytest.raises(ConfigError, match="cannot read"):
            Config.from_file(path)

    def test_matrix_unknown_name(self):
        """Test asking for an unconfigured matrix raises ConfigError."""
        with pytest.raises(ConfigError, match="no matrix named"):
            Config().matrix("missing")

    def test_matrix_is_certified(self):
        """Test configured matrices go through certification."""
        config = Config()
        config.matrices = {"flat": [[1.0, 0.0], [0.0, 2.0]]}

        with pytest.raises(NotExpansiveError):
            config.matrix("flat")

    def test_settings_carry_fields(self):
        """Test experiment settings mirror the configured grid and tolerances."""
        config = Config()
        config.n_per_axis = 128
        config.cover_band = 3
        config.ratio_cap = 5.0

        settings = config.settings()

        assert settings.n_per_axis == 128
        assert settings.band == 3
        assert settings.ratio_cap == 5.0
        assert settings.shape.plateau_outer == config.plateau_outer

    def test_provenance_omits_output_dir(self):
        """Test the provenance record leaves out the output directory."""
        record = Config().provenance()

        assert "output_dir" not in record
        assert record["depth"] == Config().depth

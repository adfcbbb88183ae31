"""
Tests for parameter vectors, the parameter space and material corrections.
"""

import math

import numpy as np
import pytest

from hfm.material import (
    EffectiveMaterial,
    InvalidMaterialError,
    derive_material,
    is_physical,
    max_wave_speed,
    wave_speed,
)
from hfm.parameters import Feature, ParameterError, ParameterSpace, ParameterVector


class TestParameterVector:
    """Tests for the named parameter vector."""

    def test_named_access(self):
        theta = ParameterVector((68.9, 0.33, 2700.0, 25.0))
        assert theta['rho'] == 2700.0
        assert theta.dim == 4

    def test_generic_dimension(self):
        theta = ParameterVector((1.0,), ('x',))
        assert theta.dim == 1

    def test_length_mismatch(self):
        with pytest.raises(ParameterError, match='feature names'):
            ParameterVector((1.0, 2.0), ('a',))

    def test_non_finite(self):
        with pytest.raises(ParameterError, match='non-finite'):
            ParameterVector((float('nan'), 0.3, 2700.0, 25.0))

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            ParameterVector((1.0,), ('x',))['E']


class TestParameterSpace:
    """Tests for the 8-sigma parameter box."""

    def test_reference_bounds_are_mean_pm_4_std(self):
        space = ParameterSpace.reference()

        np.testing.assert_allclose(space.lower, space.means - 4 * space.stds)
        np.testing.assert_allclose(space.upper, space.means + 4 * space.stds)
        assert space.names == ('E', 'nu', 'rho', 'T')
        np.testing.assert_allclose(space.means, [68.9, 0.33, 2700.0, 25.0])
        np.testing.assert_allclose(space.stds, [1.332, 0.007, 2.7, 6.0])

    def test_contains(self):
        space = ParameterSpace.reference()
        assert space.contains(space.means)
        assert not space.contains(space.upper + 1.0)

    def test_from_config(self):
        space = ParameterSpace.from_config([
            {'name': 'x1', 'mean': 0.0, 'std': math.pi / 4, 'distribution': 'uniform'},
        ])
        np.testing.assert_allclose(space.lower, [-math.pi])
        assert space.features[0].distribution == 'uniform'

    def test_missing_key(self):
        with pytest.raises(ParameterError, match='missing key'):
            ParameterSpace.from_config([{'name': 'x', 'mean': 0.0}])

    def test_non_positive_std(self):
        with pytest.raises(ParameterError, match='std'):
            Feature('x', 0.0, 0.0)

    def test_duplicate_names(self):
        with pytest.raises(ParameterError, match='Duplicate'):
            ParameterSpace((Feature('x', 0, 1), Feature('x', 1, 1)))


class TestDeriveMaterial:
    """Tests for the temperature corrections."""

    def test_zero_temperature_is_identity(self):
        material = derive_material(ParameterVector((68.9, 0.33, 2700.0, 0.0)))
        assert material == EffectiveMaterial(68.9, 0.33, 2700.0)

    def test_room_temperature(self):
        material = derive_material([68.9, 0.33, 2700.0, 25.0])

        assert material.E == pytest.approx(68.2425, abs=1e-12)
        assert material.nu == pytest.approx(0.405, abs=1e-12)
        assert material.rho == pytest.approx(2695.4, abs=1e-9)

    def test_table_means_stay_physical(self):
        space = ParameterSpace.reference()
        material = derive_material(space.mean_vector())

        assert material.E > 0
        assert 0 < material.nu < 0.5
        assert material.rho > 0

    def test_invalid_poisson_ratio(self):
        # nu^t = 0.358 + 0.003 * 49 = 0.505
        with pytest.raises(InvalidMaterialError, match='Poisson'):
            derive_material([68.9, 0.358, 2700.0, 49.0])
        assert not is_physical([68.9, 0.358, 2700.0, 49.0])

    def test_non_positive_poisson_ratio(self):
        with pytest.raises(InvalidMaterialError):
            derive_material([68.9, 0.01, 2700.0, -10.0])


class TestWaveSpeed:
    """Tests for the plate-wave speed."""

    def test_formula(self):
        material = EffectiveMaterial(E=70.0, nu=0.3, rho=2700.0)
        expected = math.sqrt(70.0e9 / (2700.0 * (1 - 0.09)))
        assert wave_speed(material) == pytest.approx(expected)

    def test_max_speed_bounds_the_box(self):
        space = ParameterSpace.reference()
        c_max = max_wave_speed(space)

        rng = np.random.default_rng(3)
        design = rng.uniform(space.lower, space.upper, size=(500, 4))
        for row in design:
            if is_physical(row):
                assert wave_speed(derive_material(row)) <= c_max

    def test_max_speed_needs_material_features(self):
        space = ParameterSpace((Feature('x', 0.0, 1.0),))
        with pytest.raises(InvalidMaterialError):
            max_wave_speed(space)

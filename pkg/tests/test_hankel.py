import numpy as np
import pytest

from kdistance.spectral.hankel import DecayError, hankel_transform, l2_norm


@pytest.mark.parametrize("v", [0, 0.5, 1, 2])
def test_parseval(v):
    t = np.linspace(0.0, 12.0, 3001)
    g = t ** (v + 0.5) * np.exp(-t * t) * (1 + t * t)
    H = hankel_transform(t, g, v, r_max=16.0)
    assert l2_norm(H.x, H.values) == pytest.approx(l2_norm(t, g), rel=1e-3)


@pytest.mark.parametrize("v", [0, 1.5])
def test_self_reciprocal(v):
    t = np.linspace(0.0, 12.0, 3001)
    F = hankel_transform(t, t ** (v + 0.5) * np.exp(-t * t / 2), v)
    ref = F.x ** (v + 0.5) * np.exp(-F.x**2 / 2)
    assert np.max(np.abs(F.values - ref)) <= 1e-3 * np.max(ref)


def test_zero_function():
    t = np.linspace(0, 5, 50)
    H = hankel_transform(t, np.zeros_like(t), 1)
    assert np.all(H.values == 0)


def test_rejects_slow_decay():
    t = np.linspace(0, 5, 50)
    with pytest.raises(DecayError):
        hankel_transform(t, np.exp(-t), 0)
    with pytest.raises(ValueError):
        hankel_transform(t[::-1], np.exp(-t * t)[::-1], 0)

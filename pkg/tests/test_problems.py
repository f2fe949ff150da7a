import numpy as np
import pytest

from atreg.errors import DimensionMismatch, FormatError, InvalidNoise, InvalidSize
from atreg.linalg import singular_values
from atreg.pgm import (bundled_image, load_image, read_pgm, synthetic_shapes,
                       write_pgm)
from atreg.problems import (add_noise, gen_baart, gen_blur, gen_foxgood,
                            gen_ilaplace, gen_shaw, make_problem)


def _consistency(p):
    return np.linalg.norm(p.A @ p.x_ex - p.b_ex) / np.linalg.norm(p.b_ex)


@pytest.mark.parametrize('gen', [gen_shaw, gen_baart, gen_foxgood, gen_ilaplace])
@pytest.mark.parametrize('n', [16, 120])
def test_consistency(gen, n):
    assert _consistency(gen(n)) <= 1e-12


@pytest.mark.parametrize('name', ['shaw', 'baart', 'foxgood', 'ilaplace'])
def test_severe_ill_conditioning(name):
    s = singular_values(make_problem(name, 64).A.todense())
    assert s[19] / s[0] < 1e-8


def test_shaw_properties():
    A = gen_shaw(32).A.todense()
    assert np.abs(A - A.T).max() <= 1e-12
    s = singular_values(A)
    assert np.argmax(s < 1e-10 * s[0]) < 19
    with pytest.raises(InvalidSize):
        gen_shaw(33)


def test_baart_positive_and_picard():
    p = gen_baart(64)
    A = p.A.todense()
    assert np.all(A > 0)
    U, s, _ = np.linalg.svd(A)
    coef = np.abs(U.T @ p.b_ex)
    ratio = coef[:10] / s[:10]
    # Picard: coefficients decay at least as fast as sigma_j, up to a factor 10
    for j in range(1, 10):
        assert ratio[j] <= 10 * ratio[:j].min()


def test_foxgood_properties():
    p = gen_foxgood(40)
    A = p.A.todense()
    assert np.abs(A - A.T).max() <= 1e-12
    assert np.all(np.diff(p.x_ex) > 0)


def test_ilaplace_properties():
    p = gen_ilaplace(64)
    A = p.A.todense()
    assert np.all(A > 0) and np.all(A <= 1)
    assert np.all(np.diff(A, axis=1) <= 0)


def test_blur_problem():
    n = 8
    img = np.random.default_rng(3).random(n * n)
    p = gen_blur(n, 1, 1.0, img)
    ratio = p.b_ex / img
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-14)
    assert ratio[0] > 0
    q = gen_blur(n, 3, 1.0, np.full(n * n, 0.5))
    B = q.b_ex.reshape(n, n, order='F')
    interior = B[2:-2, 2:-2]
    np.testing.assert_allclose(interior, interior[0, 0], rtol=1e-14)
    assert _consistency(q) <= 1e-12
    with pytest.raises(DimensionMismatch):
        gen_blur(n, 3, 1.0, np.ones(10))


def test_add_noise_scaling_and_determinism():
    b = gen_shaw(64).b_ex
    z = add_noise(b, 0.0, 1)
    assert np.all(z.e == 0) and np.array_equal(z.b, b)
    s = add_noise(b, 1e-3, 7)
    assert abs(np.linalg.norm(s.e) / np.linalg.norm(b) - 1e-3) <= 1e-14 * 1e-3 * 10
    np.testing.assert_array_equal(s.b, b + s.e)
    assert np.array_equal(add_noise(b, 1e-3, 7).b, s.b)
    assert not np.array_equal(add_noise(b, 1e-3, 8).b, s.b)
    with pytest.raises(InvalidNoise):
        add_noise(b, -1e-3, 0)


def test_pgm_roundtrip(tmp_path):
    img = np.array([[0, 255], [128, 64]]) / 255.0
    for binary in (True, False):
        path = tmp_path / ('a%d.pgm' % binary)
        write_pgm(path, img, binary=binary)
        rows, cols, pix = read_pgm(path)
        assert (rows, cols) == (2, 2)
        np.testing.assert_array_equal(pix.reshape(2, 2), img)
    np.testing.assert_array_equal(load_image(tmp_path / 'a1.pgm'),
                                  load_image(tmp_path / 'a0.pgm'))
    assert load_image(tmp_path / 'a1.pgm')[0, 1] == 1.0


def test_pgm_comments_and_quantization(tmp_path):
    path = tmp_path / 'c.pgm'
    path.write_bytes(b'P2\n# comment\n3 1\n# another\n255\n0 17 255\n')
    rows, cols, pix = read_pgm(path)
    assert (rows, cols) == (1, 3)
    np.testing.assert_allclose(pix, [0, 17 / 255, 1])
    x = np.random.default_rng(0).random((5, 7))
    write_pgm(tmp_path / 'q.pgm', x)
    assert np.abs(load_image(tmp_path / 'q.pgm') - x).max() <= 0.5 / 255 + 1e-15


@pytest.mark.parametrize('payload', [b'P3\n1 1\n255\n0\n', b'P5\n2 2\n255\n\x00',
                                     b'P2\n2 x\n255\n', b'P2\n1 1\n65535\n0\n', b''])
def test_pgm_malformed(tmp_path, payload):
    path = tmp_path / 'bad.pgm'
    path.write_bytes(payload)
    with pytest.raises(FormatError):
        read_pgm(path)


def test_bundled_images():
    for n in (64, 256):
        img = bundled_image(n)
        assert img.shape == (n, n)
        assert np.abs(img - synthetic_shapes(n)).max() <= 0.5 / 255 + 1e-15

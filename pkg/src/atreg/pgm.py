"""Minimal PGM (P2 ASCII / P5 binary) reader and writer, 8-bit only.

Pixel values are mapped to ``[0, 1]`` by dividing by the header's maxval.
"""
import os
import re

import numpy as np

from .errors import FormatError

__all__ = ['read_pgm', 'write_pgm', 'load_image', 'synthetic_shapes',
           'bundled_image', 'DATA_DIR']

DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')

_TOKEN = re.compile(rb'\s*(?:#[^\n]*\n\s*)*(\S+)')


def _header(data):
    """Parse magic, width, height, maxval; return them with the data offset."""
    fields = []
    pos = 0
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError('truncated PGM header')
        fields.append(m.group(1))
        pos = m.end()
    magic = fields[0]
    if magic not in (b'P2', b'P5'):
        raise FormatError('not a P2/P5 graymap (magic %r)' % magic)
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise FormatError('non-integer size or maxval in PGM header') from None
    if width < 1 or height < 1:
        raise FormatError('empty PGM image')
    if not 0 < maxval <= 255:
        raise FormatError('only 8-bit PGM is supported (maxval=%d)' % maxval)
    return magic, width, height, maxval, pos


def read_pgm(path):
    """Read a PGM file.

    Returns
    -------
    n_rows, n_cols : int
    pixels : ndarray
        Row-major pixel values scaled to ``[0, 1]``.
    """
    with open(path, 'rb') as fh:
        data = fh.read()
    magic, width, height, maxval, pos = _header(data)
    count = width * height
    if magic == b'P5':
        # exactly one whitespace byte separates header and raster
        raw = data[pos + 1:pos + 1 + count]
        if len(raw) != count:
            raise FormatError('raster has %d bytes, expected %d'
                              % (len(raw), count))
        values = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
    else:
        tokens = data[pos:].split()
        if len(tokens) < count:
            raise FormatError('raster has %d values, expected %d'
                              % (len(tokens), count))
        try:
            values = np.array([int(t) for t in tokens[:count]], dtype=np.float64)
        except ValueError:
            raise FormatError('non-integer pixel in P2 raster') from None
    if values.max(initial=0) > maxval:
        raise FormatError('pixel value exceeds maxval %d' % maxval)
    return height, width, values / maxval


def load_image(path):
    """Read a PGM file as a 2-D array in ``[0, 1]``."""
    rows, cols, pixels = read_pgm(path)
    return pixels.reshape(rows, cols)


def write_pgm(path, image, binary=True):
    """Write a 2-D array with values in ``[0, 1]`` as an 8-bit PGM.

    Values are clipped to ``[0, 1]`` and rounded to the nearest level.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError('write_pgm expects a 2-D image')
    rows, cols = image.shape
    levels = np.rint(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    if binary:
        payload = b'P5\n%d %d\n255\n' % (cols, rows) + levels.tobytes()
    else:
        lines = [b'P2', b'%d %d' % (cols, rows), b'255']
        lines += [b' '.join(b'%d' % v for v in row) for row in levels]
        payload = b'\n'.join(lines) + b'\n'
    with open(path, 'wb') as fh:
        fh.write(payload)


def synthetic_shapes(n):
    """Piecewise-constant test image: background, disk, square, triangle, bar."""
    y, x = np.mgrid[0:n, 0:n] / float(n)
    img = np.full((n, n), 0.15)
    img[(x - 0.32) ** 2 + (y - 0.34) ** 2 < 0.18 ** 2] = 0.85
    img[(np.abs(x - 0.70) < 0.14) & (np.abs(y - 0.30) < 0.14)] = 0.55
    img[(y > 0.55) & (y < 0.88) & (np.abs(x - 0.35) < (y - 0.55) * 0.6)] = 1.0
    img[(x > 0.58) & (x < 0.90) & (np.abs(y - 0.72) < 0.04)] = 0.35
    img[(x - 0.74) ** 2 + (y - 0.72) ** 2 < 0.05 ** 2] = 0.0
    return img


def bundled_image(n=64):
    """Load the shipped ``shapes{n}.pgm`` test image (n = 64 or 256)."""
    return load_image(os.path.join(DATA_DIR, 'shapes%d.pgm' % n))

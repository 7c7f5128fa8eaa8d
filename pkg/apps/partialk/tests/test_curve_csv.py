import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from apps.partialk.exceptions import UsageError
from apps.partialk.services.inversion_service import RadiiGrid, SummaryCurve
from apps.partialk.services.pattern_service import Window
from apps.partialk.services.spectral_service import SpectralMatrixField, SpectralService
from apps.partialk.utils.curve_csv import read_curve_csv, relative_error, spectral_field_frame, write_curve_csv


class CurveCSVTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.curve = SummaryCurve(
            kind='L', radii=RadiiGrid([1.0, 2.0, 3.0]), values=np.array([1.0, np.nan, 3.5]),
            targets=('X', 'Y'), covariates=('Z',),
        )

    def tearDown(self):
        self.tmp.cleanup()

    def test_header_and_missing_values(self):
        path = write_curve_csv(self.curve, self.dir / 'curve.csv', {'debias_factor': '1.5'})
        text = path.read_text()
        self.assertTrue(text.startswith('# statistic: L\n# pair: X,Y\n# covariates: Z\n'))
        self.assertIn('# debias_factor: 1.5\n', text)
        frame = read_curve_csv(path)
        self.assertTrue(np.isnan(frame['value'][1]))
        self.assertEqual(frame['value'][2], 3.5)

    def test_bands_add_columns(self):
        banded = self.curve.with_bands(np.zeros(3), np.ones(3))
        frame = read_curve_csv(write_curve_csv(banded, self.dir / 'env.csv'))
        self.assertEqual(list(frame.columns), ['r', 'value', 'lo', 'hi'])

    def test_unwritable_path(self):
        with self.assertRaises(UsageError):
            write_curve_csv(self.curve, self.dir / 'missing' / 'curve.csv')

    def test_field_columns(self):
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.2)
        values = np.zeros(grid.shape + (2, 2), dtype=complex)
        values[..., 0, 1] = 1j
        field = SpectralMatrixField(grid=grid, labels=('X', 'Y'), values=values, n_tapers=4)
        frame = spectral_field_frame(field)
        self.assertEqual(len(frame), grid.size)
        self.assertEqual(list(frame.columns[:4]), ['k1', 'k2', 're_X_X', 'im_X_X'])
        self.assertTrue((frame['im_X_Y'] == 1.0).all())

    def test_relative_error(self):
        np.testing.assert_allclose(relative_error([1.1, 2.0], [1.0, 2.0]), [0.1, 0.0])

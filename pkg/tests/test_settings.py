# tests/test_settings.py
from django.test import SimpleTestCase, override_settings

from graspid.conf import DEFAULTS, get_setting


class GetSettingTests(SimpleTestCase):
    def test_default_value(self):
        """Тест: параметр без переопределения берётся из значений по умолчанию"""
        self.assertEqual(get_setting('KNN_K'), DEFAULTS['KNN_K'])
        self.assertEqual(get_setting('TIE_TOLERANCE'), 1e-9)

    @override_settings(GRASPID={'KNN_K': 7})
    def test_override(self):
        """Тест: settings.GRASPID переопределяет только названные параметры"""
        self.assertEqual(get_setting('KNN_K'), 7)
        self.assertEqual(get_setting('MLP_EPOCHS'), DEFAULTS['MLP_EPOCHS'])

    @override_settings()
    def test_missing_settings_block(self):
        """Тест: без блока GRASPID действуют значения по умолчанию"""
        from django.conf import settings
        del settings.GRASPID
        self.assertEqual(get_setting('THRESHOLD'), 0.85)

    def test_unknown_name(self):
        """Тест неизвестного параметра"""
        with self.assertRaises(KeyError):
            get_setting('NO_SUCH_SETTING')

"""
Numerical settings for the sequential_decoding app.

Settings are read from the ``SEQUENTIAL_DECODING`` dict in the Django settings
module, e.g.::

    SEQUENTIAL_DECODING = {
        'TOL_PSD': 1e-9,
        'MAX_DIM': 4096,
    }

Any key that is missing falls back to DEFAULTS. Access values as attributes
of ``sim_settings``.
"""
from contextlib import contextmanager

from django.conf import settings
from django.core.signals import setting_changed

DEFAULTS = {
    'TOL_HERM': 1e-10,
    'TOL_PSD': 1e-9,
    'TOL_TRACE': 1e-9,
    'TOL_PROJECTOR': 1e-8,
    'TOL_COMPLETENESS': 1e-8,
    'PINV_CUTOFF': 1e-10,
    'ZERO_EIGENVALUE': 1e-12,
    'MAX_DIM': 4096,
    'ENUMERATION_BUDGET': 10**6,
    'EXACT_MAX_CODEWORDS': 64,
    'UNDERFLOW_THRESHOLD': 1e-14,
    'EXPANSION_MAX_N': 20,
    'MONOTONICITY_SLACK': 1e-10,
}


class SimulationSettings:
    def __init__(self, defaults=None):
        self.defaults = defaults or DEFAULTS
        self._cached_attrs = set()

    @property
    def user_settings(self):
        if not hasattr(self, '_user_settings'):
            self._user_settings = getattr(settings, 'SEQUENTIAL_DECODING', {})
        return self._user_settings

    def __getattr__(self, attr):
        if attr not in self.defaults:
            raise AttributeError(f"Invalid simulation setting: '{attr}'")

        try:
            val = self.user_settings[attr]
        except KeyError:
            val = self.defaults[attr]

        self._cached_attrs.add(attr)
        setattr(self, attr, val)
        return val

    @contextmanager
    def override(self, **values):
        """Temporarily replace settings, e.g. a tolerance given on the command line."""
        unknown = set(values) - set(self.defaults)
        if unknown:
            raise AttributeError(f"Invalid simulation settings: {sorted(unknown)}")
        try:
            for attr, val in values.items():
                self._cached_attrs.add(attr)
                setattr(self, attr, val)
            yield self
        finally:
            self.reload()

    def reload(self):
        for attr in self._cached_attrs:
            delattr(self, attr)
        self._cached_attrs.clear()
        if hasattr(self, '_user_settings'):
            delattr(self, '_user_settings')


sim_settings = SimulationSettings(DEFAULTS)


def reload_sim_settings(*args, **kwargs):
    if kwargs['setting'] == 'SEQUENTIAL_DECODING':
        sim_settings.reload()


setting_changed.connect(reload_sim_settings)

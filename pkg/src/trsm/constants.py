from scipy import constants as _sc

C0 = _sc.c
ETA0 = float((_sc.mu_0 / _sc.epsilon_0) ** 0.5)

MODES = ("reflection", "transmission")


def wavelength(f):
    return C0 / f


def check_mode(mode):
    if mode not in MODES:
        from .errors import ConfigError
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode
